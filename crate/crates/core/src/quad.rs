//! Adaptive Gauss–Kronrod (7/15) quadrature for vector-valued integrands.

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone)]
pub(crate) struct QuadResult {
    pub value: Vec<Complex64>,
    pub error: f64,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<Complex64>,
    error: f64,
}

fn gk15<F: Fn(f64) -> Vec<Complex64>>(f: &F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let dim = fc.len();
    let mut kron: Vec<Complex64> = fc.iter().map(|v| v * WGK[7]).collect();
    let mut gauss: Vec<Complex64> = fc.iter().map(|v| v * WG[3]).collect();
    for k in 0..7 {
        let lo = f(c - h * XGK[k]);
        let hi = f(c + h * XGK[k]);
        for i in 0..dim {
            let s = lo[i] + hi[i];
            kron[i] += s * WGK[k];
            if k % 2 == 1 {
                gauss[i] += s * WG[k / 2];
            }
        }
    }
    let error = kron.iter().zip(&gauss).map(|(k, g)| ((k - g) * h).norm()).fold(0.0, f64::max);
    Panel { a, b, value: kron.into_iter().map(|v| v * h).collect(), error }
}

/// Integrates `f` over `[a, b]`, starting from `panels` equal pieces and bisecting
/// the worst panel until the summed error estimate drops below `tol`.
pub(crate) fn integrate<F>(f: F, a: f64, b: f64, panels: usize, tol: f64, max_panels: usize) -> Result<QuadResult>
where
    F: Fn(f64) -> Vec<Complex64>,
{
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut work: Vec<Panel> = (0..panels)
        .map(|i| gk15(&f, a + i as f64 * width, if i + 1 == panels { b } else { a + (i + 1) as f64 * width }))
        .collect();
    let mut evaluations = 15 * panels;
    loop {
        let total: f64 = work.iter().map(|p| p.error).sum();
        if total <= tol {
            break;
        }
        if work.len() >= max_panels {
            return Err(Error::Numeric(format!(
                "quadrature did not reach tolerance {tol:.1e} within {max_panels} panels (error {total:.3e})"
            )));
        }
        let worst = work
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("nonempty");
        let p = work.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        work.push(gk15(&f, p.a, mid));
        work.push(gk15(&f, mid, p.b));
        evaluations += 30;
    }
    work.sort_by(|x, y| x.a.total_cmp(&y.a));
    let dim = work[0].value.len();
    let mut value = vec![Complex64::new(0.0, 0.0); dim];
    for p in &work {
        for (v, x) in value.iter_mut().zip(&p.value) {
            *v += x;
        }
    }
    Ok(QuadResult { value, error: work.iter().map(|p| p.error).sum(), evaluations })
}
