//! Numerical integration used as an independent check on closed forms.
//!
//! * [`integrate_1d`]: globally adaptive Gauss–Kronrod 7/15 on `[a, b]`, with
//!   `b = ∞` mapped to `[0, 1)` by `r = a + t/(1 − t)`.
//! * [`integrate_radial`]: `∫_{R^d} ρ(|y|²) dy = d ω_d ∫₀^∞ ρ(r²) r^{d−1} dr`.
//! * [`integrate_patch`], [`integrate_boundary`]: midpoint tensor grids on a
//!   [`Patch`] with a Richardson error estimate.

use std::collections::BinaryHeap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::geometry::{Integral, NodeView, Patch};
use crate::specfun::log_unit_ball_volume;

pub const DEFAULT_TOL_1D: f64 = 1e-10;
pub const DEFAULT_TOL_PATCH: f64 = 1e-8;
pub const MAX_DEPTH: u32 = 60;
const MAX_INTERVALS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

// Kronrod 15-point abscissae and weights; every other abscissa is a Gauss 7-point node.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut finite = fc.is_finite();
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        finite &= s.is_finite();
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    if !finite {
        return Err(LabError::NonConvergence(format!(
            "integrand not finite on [{a}, {b}]"
        )));
    }
    Ok((kronrod * h, ((kronrod - gauss) * h).abs()))
}

/// Adaptive integral of `f` over `[a, b]`; `b` may be `f64::INFINITY`.
pub fn integrate_1d<F>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    if !(tol > 0.0) || !a.is_finite() || b.is_nan() || !(b >= a) {
        return Err(LabError::domain(format!(
            "integrate_1d needs finite a <= b and tol > 0 (a={a}, b={b}, tol={tol})"
        )));
    }
    if b == a {
        return Ok(QuadratureResult {
            value: 0.0,
            abs_error_estimate: 0.0,
            evaluations: 0,
        });
    }
    if b.is_infinite() {
        let g = |t: f64| {
            let s = 1.0 - t;
            f(a + t / s) / (s * s)
        };
        return adaptive(&g, 0.0, 1.0, tol);
    }
    adaptive(&f, a, b, tol)
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<QuadratureResult> {
    let (value, error) = gk15(f, a, b)?;
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        a,
        b,
        value,
        error,
        depth: 0,
    });
    let mut total = value;
    let mut total_err = error;
    loop {
        if total_err <= tol.max(tol * total.abs()) {
            break;
        }
        let worst = heap.pop().expect("heap never empties");
        if worst.depth >= MAX_DEPTH || heap.len() >= MAX_INTERVALS {
            return Err(LabError::NonConvergence(format!(
                "error estimate {total_err:e} above tolerance after {evaluations} evaluations \
                 (worst interval [{}, {}] at depth {})",
                worst.a, worst.b, worst.depth
            )));
        }
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gk15(f, worst.a, mid)?;
        let (v2, e2) = gk15(f, mid, worst.b)?;
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        for (lo, hi, v, e) in [(worst.a, mid, v1, e1), (mid, worst.b, v2, e2)] {
            heap.push(Segment {
                a: lo,
                b: hi,
                value: v,
                error: e,
                depth: worst.depth + 1,
            });
        }
    }
    // Re-sum from the leaves to shed the drift of the running totals.
    let mut leaves: Vec<Segment> = heap.into_vec();
    leaves.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = leaves.iter().map(|s| s.value).sum();
    let abs_error_estimate = leaves.iter().map(|s| s.error).sum();
    Ok(QuadratureResult {
        value,
        abs_error_estimate,
        evaluations,
    })
}

/// Radial profile `s ↦ ρ(s)`, evaluated at `s = |y|²`.
#[derive(Clone)]
pub struct RadialProfile {
    rho: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    support: Option<f64>,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

impl RadialProfile {
    /// Profile on all of `[0, ∞)`.
    pub fn new(rho: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        RadialProfile {
            rho: Arc::new(rho),
            support: None,
        }
    }

    /// Profile vanishing for `s > s_max`. Integrated with `r = √s_max · sin φ`,
    /// which also absorbs a `(s_max − s)^{−1/2}` edge singularity.
    pub fn compact(s_max: f64, rho: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        RadialProfile {
            rho: Arc::new(rho),
            support: Some(s_max),
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self.support {
            Some(smax) if s > smax => 0.0,
            _ => (self.rho)(s),
        }
    }

    pub fn support(&self) -> Option<f64> {
        self.support
    }
}

/// `∫₀^∞ ρ(r²) r^{d−1} dr`, the radial part without the sphere area.
pub fn radial_moment(profile: &RadialProfile, d: usize, tol: f64) -> Result<QuadratureResult> {
    let k = (d - 1) as i32;
    match profile.support {
        Some(smax) => {
            if !(smax > 0.0) {
                return Err(LabError::domain("radial support must be positive"));
            }
            let root = smax.sqrt();
            integrate_1d(
                |phi: f64| {
                    let (sin, cos) = phi.sin_cos();
                    let r = root * sin;
                    // ρ(smax·sin²φ) · r^{d−1} · √smax cos φ, with the edge factor kept exact
                    (profile.rho)(smax * sin * sin) * r.powi(k) * root * cos
                },
                0.0,
                std::f64::consts::FRAC_PI_2,
                tol,
            )
        }
        None => integrate_1d(
            |r: f64| (profile.rho)(r * r) * r.powi(k),
            0.0,
            f64::INFINITY,
            tol,
        ),
    }
}

/// `∫_{R^d} ρ(|y|²) dy`.
pub fn integrate_radial(profile: &RadialProfile, d: usize, tol: f64) -> Result<QuadratureResult> {
    if d < 1 {
        return Err(LabError::domain("radial integral needs d >= 1"));
    }
    let area = d as f64 * log_unit_ball_volume(d)?.exp();
    let r = radial_moment(profile, d, tol)?;
    Ok(QuadratureResult {
        value: area * r.value,
        abs_error_estimate: area * r.abs_error_estimate,
        evaluations: r.evaluations,
    })
}

fn accept(i: Integral, tol: f64) -> Option<QuadratureResult> {
    (i.value.is_finite() && i.abs_error_estimate <= tol.max(tol * i.value.abs())).then_some(
        QuadratureResult {
            value: i.value,
            abs_error_estimate: i.abs_error_estimate,
            evaluations: i.evaluations,
        },
    )
}

/// Largest fine-grid node count [`integrate_patch`] will refine to.
pub const MAX_PATCH_NODES: usize = 1 << 21;

/// `∫_Σ f dvol_Σ` over the patch.
///
/// The patch's own two-grid estimate `|I_2N − I_N|/3` bounds the error of the
/// finer midpoint sum and is usually pessimistic for the extrapolated value.
/// When it misses `tol`, the grid is doubled and two successive Richardson
/// values `R_N`, `R_2N` are compared (Romberg: error ≈ `|R_2N − R_N|/15`),
/// doubling again until the tolerance is met or [`MAX_PATCH_NODES`] is reached.
pub fn integrate_patch<F>(patch: &Patch, f: F, tol: f64) -> Result<QuadratureResult>
where
    F: Fn(&NodeView) -> f64 + Sync,
{
    if !(tol > 0.0) {
        return Err(LabError::domain("integrate_patch needs tol > 0"));
    }
    let first = patch.integrate(&f);
    if let Some(r) = accept(first, tol) {
        return Ok(r);
    }
    let mut previous = first;
    let mut grid = patch.grid().to_vec();
    let mut evaluations = first.evaluations;
    loop {
        grid.iter_mut().for_each(|c| *c *= 2);
        let fine_nodes: usize = grid.iter().map(|c| 2 * c).product();
        if fine_nodes > MAX_PATCH_NODES {
            return Err(LabError::NonConvergence(format!(
                "patch estimate {:e} above tolerance {tol:e} at the node budget",
                previous.abs_error_estimate
            )));
        }
        let refined = Patch::new(patch.chart().clone(), &grid)?;
        let next = refined.integrate(&f);
        evaluations += next.evaluations;
        let romberg = Integral {
            abs_error_estimate: (next.value - previous.value).abs() / 15.0,
            evaluations,
            ..next
        };
        if let Some(r) = accept(romberg, tol) {
            return Ok(r);
        }
        previous = next;
    }
}

/// `∫_{∂Σ} f dσ_Σ` over the declared boundary faces.
pub fn integrate_boundary<F>(patch: &Patch, f: F) -> Result<QuadratureResult>
where
    F: Fn(&NodeView) -> f64 + Sync,
{
    let i = patch.integrate_boundary(f)?;
    if !i.value.is_finite() {
        return Err(LabError::NonConvergence(
            "boundary integral is not finite".into(),
        ));
    }
    Ok(QuadratureResult {
        value: i.value,
        abs_error_estimate: i.abs_error_estimate,
        evaluations: i.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Surface;
    use std::f64::consts::PI;

    #[test]
    fn one_dimensional_trivial_cases() {
        let r = integrate_1d(|x| 1.0 / (1.0 + x * x), 0.0, f64::INFINITY, 1e-10).unwrap();
        assert!((r.value - PI / 2.0).abs() < 1e-12);
        let r = integrate_1d(|x| (-x).exp(), 0.0, f64::INFINITY, 1e-10).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        let r = integrate_1d(|x| x.sin(), 0.0, PI, 1e-12).unwrap();
        assert!((r.value - 2.0).abs() < 1e-13);
        assert!(r.evaluations > 0);
    }

    #[test]
    fn rejects_bad_input_and_divergence() {
        assert!(integrate_1d(|x| x, 1.0, 0.0, 1e-10).is_err());
        assert!(integrate_1d(|x| x, 0.0, 1.0, 0.0).is_err());
        let err = integrate_1d(|x| 1.0 / x, 0.0, 1.0, 1e-10).unwrap_err();
        assert!(matches!(err, LabError::NonConvergence(_)));
    }

    #[test]
    fn radial_ball_volume_and_sqrt_edge() {
        let ball = RadialProfile::compact(1.0, |_| 1.0);
        let v = integrate_radial(&ball, 3, 1e-12).unwrap();
        assert!((v.value - 4.0 * PI / 3.0).abs() < 1e-12);

        let c = 1.0 / (PI * PI);
        let rho = RadialProfile::compact(1.0, move |s| c / (1.0 - s).sqrt());
        let mass = integrate_radial(&rho, 3, 1e-12).unwrap();
        assert!((mass.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn catenoid_area_and_rims() {
        let patch = Patch::new(Surface::Catenoid.chart().unwrap(), &[64, 16]).unwrap();
        let area = integrate_patch(&patch, |_| 1.0, 1e-8).unwrap();
        let exact = 2.0 * PI * (1.0 + 1f64.sinh() * 1f64.cosh());
        assert!((area.value - exact).abs() < 1e-8);
        let rims = integrate_boundary(&patch, |_| 1.0).unwrap();
        assert!((rims.value - 4.0 * PI * 1f64.cosh()).abs() < 1e-8);
    }

    #[test]
    fn disk_boundary_and_tolerance_failure() {
        let patch = Patch::new(Surface::disk().chart().unwrap(), &[16, 16]).unwrap();
        let rim = integrate_boundary(&patch, |_| 1.0).unwrap();
        assert!((rim.value - 2.0 * PI).abs() < 1e-12);
        let coarse = Patch::new(Surface::Catenoid.chart().unwrap(), &[2, 4]).unwrap();
        assert!(matches!(
            integrate_patch(&coarse, |v| v.u[0].exp(), 1e-300),
            Err(LabError::NonConvergence(_))
        ));
    }
}
