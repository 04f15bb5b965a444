//! Derivative-free one-dimensional search.

use crate::error::{LabError, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Location and value of an extremum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`,
/// stopping once the bracket is shorter than `tol · (1 + |x|)`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<Extremum> {
    if !(a < b) || !(tol > 0.0) {
        return Err(LabError::domain(format!(
            "golden section needs a < b and tol > 0 (a={a}, b={b})"
        )));
    }
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evaluations = 2;
    while hi - lo > tol * (1.0 + 0.5 * (lo + hi).abs()) && evaluations < 500 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
        evaluations += 1;
    }
    let (x, value) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    Ok(Extremum {
        x,
        value,
        evaluations,
    })
}

pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<Extremum> {
    let e = golden_max(|x| -f(x), a, b, tol)?;
    Ok(Extremum {
        value: -e.value,
        ..e
    })
}

/// Uniform grid scan of `nodes` points on `[a, b]` (endpoints included)
/// followed by golden-section refinement inside the neighbouring cells of
/// the best node. Endpoint maxima are kept when refinement does not beat them.
pub fn scan_then_refine<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    nodes: usize,
    tol: f64,
) -> Result<Extremum> {
    if nodes < 3 || !(a < b) {
        return Err(LabError::domain(
            "grid scan needs at least 3 nodes and a < b",
        ));
    }
    let h = (b - a) / (nodes - 1) as f64;
    let mut best = (0, f64::NEG_INFINITY);
    for k in 0..nodes {
        let v = f(a + k as f64 * h);
        if v > best.1 {
            best = (k, v);
        }
    }
    let k = best.0;
    let lo = a + k.saturating_sub(1) as f64 * h;
    let hi = a + (k + 1).min(nodes - 1) as f64 * h;
    let refined = golden_max(&mut f, lo, hi, tol)?;
    let grid_best = Extremum {
        x: a + k as f64 * h,
        value: best.1,
        evaluations: nodes,
    };
    Ok(if refined.value > grid_best.value {
        Extremum {
            evaluations: nodes + refined.evaluations,
            ..refined
        }
    } else {
        Extremum {
            evaluations: nodes + refined.evaluations,
            ..grid_best
        }
    })
}
