use qvar::experiments::{zoo, FamilyBase};
use qvar::io;
use qvar::{Error, GeneratorModel, MatrixOperator, MeasureSpace, Result};

use crate::args::{GeneratorSource, OperatorSource, ZooName};

fn need_n(src: &OperatorSource, name: &str) -> Result<usize> {
    src.n.ok_or_else(|| Error::Input(format!("--zoo {name} needs --N")))
}

/// The operator and an identifier for reports.
pub fn load_operator(src: &OperatorSource) -> Result<(MatrixOperator, String)> {
    match (src.zoo, &src.op) {
        (Some(z), _) => {
            let spec = match z {
                ZooName::LazySymmetricWalk => zoo::ZooSpec::LazySymmetricWalk { n: need_n(src, "lazy_symmetric_walk")? },
                ZooName::RotationShift => zoo::ZooSpec::RotationShift { n: need_n(src, "rotation_shift")? },
                ZooName::RandomPositiveContraction => zoo::ZooSpec::RandomPositiveContraction {
                    n: need_n(src, "random_positive_contraction")?,
                    seed: src.op_seed,
                },
                ZooName::Convolution => zoo::ZooSpec::Convolution {
                    nu: src.nu.clone().ok_or_else(|| Error::Input("--zoo convolution needs --nu".into()))?,
                },
                ZooName::DiagonalNormal => zoo::ZooSpec::DiagonalNormal {
                    spectrum: src.spectrum.clone().ok_or_else(|| Error::Input("--zoo diagonal_normal needs --spectrum".into()))?,
                },
            };
            Ok((spec.build()?, spec.id()))
        }
        (None, Some(path)) => {
            let file = io::read_matrix(path)?;
            let weights = match &src.weights {
                Some(w) => Some(io::read_weights(w)?),
                None => file.weights,
            };
            let space = match weights {
                Some(w) => MeasureSpace::new(w)?,
                None => MeasureSpace::uniform(file.matrix.nrows()),
            };
            let id = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
            Ok((MatrixOperator::new(file.matrix, space)?, id))
        }
        (None, None) => Err(Error::Input("one of --zoo or --op is required".into())),
    }
}

/// Generator `A`, either read directly or as `T − I`.
pub fn load_generator(src: &GeneratorSource) -> Result<(GeneratorModel, String)> {
    let (t, id) = load_operator(&src.source)?;
    if src.generator {
        Ok((GeneratorModel::new(t.matrix().clone(), t.space().clone())?, id))
    } else {
        Ok((GeneratorModel::markov_generator_from(&t), format!("{id}-I")))
    }
}

/// Discrete or continuous base, depending on what the command needs.
pub fn load_base(src: &GeneratorSource, continuous: bool) -> Result<(FamilyBase, String)> {
    if continuous {
        let (g, id) = load_generator(src)?;
        Ok((FamilyBase::Continuous(g), id))
    } else {
        if src.generator {
            return Err(Error::Input("--generator only applies to continuous families".into()));
        }
        let (t, id) = load_operator(&src.source)?;
        Ok((FamilyBase::Discrete(t), id))
    }
}
