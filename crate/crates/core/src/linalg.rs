//! Dense complex linear algebra used throughout the crate.
//!
//! `nalgebra` supplies storage, LU and SVD. The non-Hermitian eigenproblem is
//! solved here with a Hessenberg reduction followed by a single-shift complex
//! QR iteration, because unimodular spectra (permutation matrices) are
//! exactly the inputs this crate cares about and they need exceptional shifts.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub(crate) fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Largest entry modulus.
pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Induced 1-norm (max column sum), unweighted.
pub fn norm_one(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Induced ∞-norm (max row sum), unweighted.
pub fn norm_inf(a: &CMat) -> f64 {
    (0..a.nrows())
        .map(|i| a.row(i).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Largest singular value.
pub fn spectral_norm(a: &CMat) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

pub fn inverse(a: &CMat) -> Result<CMat> {
    let lu = a.clone().lu();
    lu.try_inverse()
        .filter(|m| m.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
        .ok_or_else(|| Error::Numeric("singular matrix".into()))
}

/// Orthonormal basis (as columns) of the numerical null space of `a`.
///
/// Singular values below `rtol * max(1, σ_max)` count as zero.
pub fn null_space(a: &CMat, rtol: f64) -> CMat {
    let n = a.ncols();
    let svd = a.clone().svd(true, true);
    let v_t = svd.v_t.expect("svd computed with v_t");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = rtol * smax.max(1.0);
    let mut cols = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff {
            cols.push(v_t.row(k).adjoint());
        }
    }
    // SVD of a square matrix returns min(m, n) values; a wide rank deficit is
    // impossible here since callers pass square matrices.
    if cols.is_empty() {
        return CMat::zeros(n, 0);
    }
    CMat::from_columns(&cols)
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn hermitian_max_eigenvalue(h: &CMat) -> f64 {
    if h.is_empty() {
        return 0.0;
    }
    let sym = (h + h.adjoint()) * real(0.5);
    nalgebra::SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

fn householder_reflect(x: &[Complex64]) -> Option<Vec<Complex64>> {
    let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let tail = x[1..].iter().map(|z| z.norm_sqr()).sum::<f64>();
    if norm == 0.0 || tail == 0.0 {
        return None;
    }
    let phase = if x[0].norm() == 0.0 { ONE } else { x[0] / x[0].norm() };
    let alpha = -phase * norm;
    let mut v: Vec<Complex64> = x.to_vec();
    v[0] -= alpha;
    let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in v.iter_mut() {
        *z /= vn;
    }
    Some(v)
}

/// Rotation `[[c, s], [-conj(s), c]]` mapping `(a, b)` to `(r, 0)`.
#[inline]
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, ZERO);
    }
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let r = an.hypot(bn);
    (an / r, (a / an) * b.conj() / r)
}

/// Complex Schur decomposition `a = Q T Q^H` with `T` upper triangular.
pub fn schur(a: &CMat) -> Result<(CMat, CMat)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Input("schur requires a square matrix".into()));
    }
    let mut h = a.clone();
    let mut q = identity(n);
    if n == 0 {
        return Ok((q, h));
    }

    // Hessenberg reduction.
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let Some(v) = householder_reflect(&x) else { continue };
        // h <- (I - 2vv^H) h
        for j in 0..n {
            let mut dot = ZERO;
            for (t, vi) in v.iter().enumerate() {
                dot += vi.conj() * h[(k + 1 + t, j)];
            }
            for (t, vi) in v.iter().enumerate() {
                h[(k + 1 + t, j)] -= *vi * dot * 2.0;
            }
        }
        // h <- h (I - 2vv^H), q <- q (I - 2vv^H)
        for m in [&mut h, &mut q] {
            for i in 0..n {
                let mut dot = ZERO;
                for (t, vi) in v.iter().enumerate() {
                    dot += m[(i, k + 1 + t)] * *vi;
                }
                for (t, vi) in v.iter().enumerate() {
                    m[(i, k + 1 + t)] -= dot * vi.conj() * 2.0;
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }

    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let max_total = 100 * n.max(10);
    let mut rots: Vec<(f64, Complex64)> = Vec::with_capacity(n);
    while hi > 0 {
        // deflation search
        let mut l = hi;
        while l > 0 {
            let s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let scale = if s == 0.0 { max_abs(&h) } else { s };
            if h[(l, l - 1)].norm() <= eps * scale {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > max_total {
            return Err(Error::Numeric("QR iteration did not converge".into()));
        }

        let shift = if iter % 10 == 0 {
            let s = h[(hi, hi - 1)].norm();
            h[(hi, hi)] + Complex64::new(0.75 * s, 0.4375 * s)
        } else {
            // Wilkinson shift from the trailing 2x2 block.
            let a11 = h[(hi - 1, hi - 1)];
            let a12 = h[(hi - 1, hi)];
            let a21 = h[(hi, hi - 1)];
            let a22 = h[(hi, hi)];
            let tr_half = (a11 + a22) * 0.5;
            let det = a11 * a22 - a12 * a21;
            let disc = (tr_half * tr_half - det).sqrt();
            let e1 = tr_half + disc;
            let e2 = tr_half - disc;
            if (e1 - a22).norm() < (e2 - a22).norm() {
                e1
            } else {
                e2
            }
        };

        for k in l..=hi {
            h[(k, k)] -= shift;
        }
        rots.clear();
        for k in l..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..n {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            h[(k + 1, k)] = ZERO;
            rots.push((c, s));
        }
        for (idx, &(c, s)) in rots.iter().enumerate() {
            let k = l + idx;
            let top = (k + 2).min(hi);
            for i in 0..=top {
                let u = h[(i, k)];
                let v = h[(i, k + 1)];
                h[(i, k)] = u * c + s.conj() * v;
                h[(i, k + 1)] = -s * u + v * c;
            }
            for i in 0..n {
                let u = q[(i, k)];
                let v = q[(i, k + 1)];
                q[(i, k)] = u * c + s.conj() * v;
                q[(i, k + 1)] = -s * u + v * c;
            }
        }
        for k in l..=hi {
            h[(k, k)] += shift;
        }
    }
    for j in 0..n {
        for i in j + 1..n {
            h[(i, j)] = ZERO;
        }
    }
    Ok((q, h))
}

pub fn eigenvalues(a: &CMat) -> Result<Vec<Complex64>> {
    let (_, t) = schur(a)?;
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

pub fn spectral_radius(a: &CMat) -> Result<f64> {
    Ok(eigenvalues(a)?.iter().fold(0.0, |m, z| m.max(z.norm())))
}

/// Diagonalization `a = V diag(values) V^{-1}`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<Complex64>,
    pub vectors: CMat,
    pub inverse: CMat,
    /// 2-norm condition number of `vectors`.
    pub condition: f64,
}

impl EigenDecomposition {
    /// `V diag(f(λ)) V^{-1}`.
    pub fn apply<F: Fn(Complex64) -> Complex64>(&self, f: F) -> CMat {
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let fj = f(lam);
            for i in 0..scaled.nrows() {
                scaled[(i, j)] *= fj;
            }
        }
        scaled * &self.inverse
    }
}

/// Eigendecomposition through the Schur form, refusing when the eigenvector
/// matrix is worse conditioned than `cond_limit`.
pub fn eigen_decompose(a: &CMat, cond_limit: f64) -> Result<EigenDecomposition> {
    let n = a.nrows();
    let (q, t) = schur(a)?;
    let scale = max_abs(&t).max(1.0);
    let cluster = 1e-10 * scale;
    let mut y = CMat::zeros(n, n);
    for k in 0..n {
        let lam = t[(k, k)];
        y[(k, k)] = ONE;
        for j in (0..k).rev() {
            let mut num = ZERO;
            for l in j + 1..=k {
                num += t[(j, l)] * y[(l, k)];
            }
            let den = t[(j, j)] - lam;
            if den.norm() <= cluster {
                if num.norm() <= 1e-8 * scale {
                    y[(j, k)] = ZERO;
                } else {
                    return Err(Error::Degeneracy(format!(
                        "defective eigenvalue near {lam} (Jordan coupling {:.3e})",
                        num.norm()
                    )));
                }
            } else {
                y[(j, k)] = -num / den;
            }
        }
        let norm = y.column(k).norm();
        for j in 0..=k {
            y[(j, k)] /= norm;
        }
    }
    let vectors = q * y;
    let s = singular_values(&vectors);
    let condition = if n == 0 { 1.0 } else { s[0] / s[n - 1] };
    if !(condition.is_finite() && condition <= cond_limit) {
        return Err(Error::Degeneracy(format!(
            "eigenvector matrix condition number {condition:.3e} exceeds {cond_limit:.1e}"
        )));
    }
    let inverse = inverse(&vectors)?;
    Ok(EigenDecomposition {
        values: (0..n).map(|i| t[(i, i)]).collect(),
        vectors,
        inverse,
        condition,
    })
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a degree-13 Padé approximant.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    let norm = norm_one(a);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = a * real(0.5f64.powi(s));
    let b = PADE13;
    let id = identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * real(b[13]) + &a4 * real(b[11]) + &a2 * real(b[9]))
        + &a6 * real(b[7])
        + &a4 * real(b[5])
        + &a2 * real(b[3])
        + &id * real(b[1]);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * real(b[12]) + &a4 * real(b[10]) + &a2 * real(b[8]))
        + &a6 * real(b[6])
        + &a4 * real(b[4])
        + &a2 * real(b[2])
        + &id * real(b[0]);
    let p = &v + &u;
    let qm = &v - &u;
    let mut r = qm.lu().solve(&p).expect("Padé denominator is nonsingular for scaled input");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// `φ(A) = Σ_k A^k / (k+1)!`, i.e. `(e^A - I) A^{-1}` extended continuously to singular `A`.
///
/// Read off the upper-right block of `exp([[A, I], [0, 0]])`.
pub fn phi1(a: &CMat) -> CMat {
    let n = a.nrows();
    let mut aug = CMat::zeros(2 * n, 2 * n);
    aug.view_mut((0, 0), (n, n)).copy_from(a);
    for i in 0..n {
        aug[(i, n + i)] = ONE;
    }
    let e = expm(&aug);
    e.view((0, n), (n, n)).into_owned()
}
