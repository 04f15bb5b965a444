//! Radial densities on the unit ball of `R^{n+m}`, their `α_ρ` functional,
//! and a numerical check of the Michael–Simon type isoperimetric inequality
//! `(∫ f^{n/(n−1)})^{(n−1)/n} ≤ C(n,m) (∫ √(|∇f|² + f²|H|²) + ∫_∂ f)`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::constants::{brendle_c, Branch};
use crate::error::{LabError, Result};
use crate::geometry::{Level, Patch};
use crate::optimize::scan_then_refine;
use crate::quadrature::{integrate_1d, integrate_radial, RadialProfile};
use crate::sobolev::TestFunction;
use crate::specfun::log_unit_ball_volume;

/// Pointwise floor enforced on `f` by [`check_isoperimetric`].
pub const POSITIVITY_FLOOR: f64 = 1e-8;
/// Grid size of the `r`-scan in [`alpha_of_density`].
pub const ALPHA_GRID: usize = 2048;

const INNER_TOL: f64 = 1e-13;

fn omega(d: usize) -> f64 {
    if d == 0 {
        1.0
    } else {
        log_unit_ball_volume(d).map(f64::exp).unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityKind {
    /// `c s^j`.
    Power { j: u32 },
    /// `c / √(1 − s)`, only normalised for `m = 1`.
    Sqrt,
}

/// `ρ(|y|²)` supported on the closed unit ball of `R^{n+m}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialDensity {
    pub kind: DensityKind,
    pub n: usize,
    pub m: usize,
    /// Multiplicative constant `c` making the total mass 1.
    pub normalizer: f64,
    /// Total mass measured by quadrature at construction.
    pub mass: f64,
}

impl RadialDensity {
    fn build(kind: DensityKind, n: usize, m: usize, normalizer: f64) -> Result<Self> {
        let mut d = RadialDensity {
            kind,
            n,
            m,
            normalizer,
            mass: f64::NAN,
        };
        let shape = d;
        let profile = RadialProfile::compact(1.0, move |s| shape.eval(s));
        d.mass = integrate_radial(&profile, n + m, 1e-12)?.value;
        if (d.mass - 1.0).abs() > 1e-8 {
            return Err(LabError::NonConvergence(format!(
                "density mass {} differs from 1",
                d.mass
            )));
        }
        Ok(d)
    }

    /// `ρ(s)` given both `s` and `1 − s`, so that the edge factor of the
    /// square-root density never suffers cancellation.
    pub fn eval_pair(&self, s: f64, one_minus_s: f64) -> f64 {
        if s > 1.0 || one_minus_s < 0.0 {
            return 0.0;
        }
        match self.kind {
            DensityKind::Power { j } => self.normalizer * s.powi(j as i32),
            DensityKind::Sqrt => self.normalizer / one_minus_s.sqrt(),
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.eval_pair(s, 1.0 - s)
    }
}

/// `ρ_j(s) = c_j s^j` with `c_j = (2j + n + m)/((n + m) ω_{n+m})`.
pub fn power_density(j: u32, n: usize, m: usize) -> Result<RadialDensity> {
    if j < 1 || n < 1 || m < 1 {
        return Err(LabError::domain(format!(
            "power density needs j, n, m >= 1 (got {j}, {n}, {m})"
        )));
    }
    let d = n + m;
    let c = (2 * j as usize + d) as f64 / (d as f64 * omega(d));
    RadialDensity::build(DensityKind::Power { j }, n, m, c)
}

/// `ρ(s) = c/√(1 − s)` with `c = 1/(π ω_n)`, for `m = 1`.
pub fn sqrt_density(n: usize) -> Result<RadialDensity> {
    if n < 2 {
        return Err(LabError::domain("sqrt density needs n >= 2"));
    }
    RadialDensity::build(DensityKind::Sqrt, n, 1, 1.0 / (PI * omega(n)))
}

/// `∫₀^{√(1−r²)} ρ(r² + t²) t^{m−1} dt`, integrated in `t = √(1−r²) sin φ`.
pub fn inner_integral(density: &RadialDensity, r: f64) -> Result<f64> {
    let r = r.clamp(0.0, 1.0 - 1e-12);
    let a2 = (1.0 - r) * (1.0 + r);
    let a = a2.sqrt();
    let k = density.m as i32 - 1;
    let res = integrate_1d(
        |phi: f64| {
            let (sin, cos) = phi.sin_cos();
            let s = r * r + a2 * sin * sin;
            let q = a2 * cos * cos;
            density.eval_pair(s, q) * (a * sin).powi(k) * a * cos
        },
        0.0,
        FRAC_PI_2,
        INNER_TOL,
    )?;
    Ok(res.value)
}

/// `∫_{−√(1−z²)}^{√(1−z²)} ρ(z² + v²) dv`.
pub fn slice_integral(density: &RadialDensity, z: f64) -> Result<f64> {
    let z = z.abs().min(1.0 - 1e-12);
    let a2 = (1.0 - z) * (1.0 + z);
    let a = a2.sqrt();
    let res = integrate_1d(
        |phi: f64| {
            let (sin, cos) = phi.sin_cos();
            density.eval_pair(z * z + a2 * sin * sin, a2 * cos * cos) * a * cos
        },
        -FRAC_PI_2,
        FRAC_PI_2,
        INNER_TOL,
    )?;
    Ok(res.value)
}

/// Largest `|slice(z) − slice(0)|` over `nodes` equally spaced `z ∈ [0, 1)`.
pub fn slice_deviation(density: &RadialDensity, nodes: usize) -> Result<f64> {
    let base = slice_integral(density, 0.0)?;
    let mut worst = 0.0f64;
    for k in 0..nodes {
        let z = k as f64 / nodes as f64;
        worst = worst.max((slice_integral(density, z)? - base).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Alpha {
    pub alpha: f64,
    /// The `r` attaining the supremum.
    pub r: f64,
}

/// `α_ρ = m ω_m sup_{r ∈ [0,1]} ∫₀^{√(1−r²)} ρ(r² + t²) t^{m−1} dt`.
pub fn alpha_of_density(density: &RadialDensity) -> Result<Alpha> {
    let mut failure = None;
    let best = scan_then_refine(
        |r| match inner_integral(density, r) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        1.0,
        ALPHA_GRID,
        1e-12,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let m = density.m;
    Ok(Alpha {
        alpha: m as f64 * omega(m) * best.value,
        r: best.x,
    })
}

/// `m ω_m c_j / (2j + m)`, the value of the supremum at `r = 0`.
pub fn power_alpha_upper(density: &RadialDensity) -> Result<f64> {
    let DensityKind::Power { j } = density.kind else {
        return Err(LabError::domain(
            "upper bound is stated for power densities",
        ));
    };
    let m = density.m as f64;
    Ok(m * omega(density.m) * density.normalizer / (2.0 * j as f64 + m))
}

/// Lower bound `max{m ω_m/((n+m) ω_{n+m}), 1/ω_n}` on `α_ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaBounds {
    pub n: usize,
    pub m: usize,
    pub codimension: f64,
    pub euclidean: f64,
    pub lower: f64,
    pub active: Branch,
}

pub fn alpha_bounds(n: usize, m: usize) -> Result<AlphaBounds> {
    if n < 2 || m < 1 {
        return Err(LabError::domain(format!(
            "alpha bounds need n >= 2, m >= 1 (got {n}, {m})"
        )));
    }
    let log_codim = (m as f64).ln() + log_unit_ball_volume(m)?
        - ((n + m) as f64).ln()
        - log_unit_ball_volume(n + m)?;
    let log_euclid = -log_unit_ball_volume(n)?;
    let active = if (log_codim - log_euclid).abs() <= 1e-12 {
        Branch::Tied
    } else if log_codim > log_euclid {
        Branch::Codimension
    } else {
        Branch::Euclidean
    };
    if m == 2 && active != Branch::Tied {
        return Err(LabError::NonConvergence(format!(
            "branches must tie at m = 2, got ln difference {}",
            log_codim - log_euclid
        )));
    }
    Ok(AlphaBounds {
        n,
        m,
        codimension: log_codim.exp(),
        euclidean: log_euclid.exp(),
        lower: log_codim.max(log_euclid).exp(),
        active,
    })
}

/// One row of a `j`-sweep of power densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub j: u32,
    pub alpha: f64,
    pub upper: f64,
    pub lower: f64,
    pub r: f64,
}

pub fn alpha_sweep(n: usize, m: usize, js: &[u32]) -> Result<Vec<SweepRow>> {
    let lower = alpha_bounds(n, m)?.lower;
    js.iter()
        .map(|&j| {
            let d = power_density(j, n, m)?;
            let a = alpha_of_density(&d)?;
            Ok(SweepRow {
                j,
                alpha: a.alpha,
                upper: power_alpha_upper(&d)?,
                lower,
                r: a.r,
            })
        })
        .collect()
}

/// Both sides of the isoperimetric inequality for one field on one patch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsoperimetricReport {
    pub surface: String,
    pub n: usize,
    pub m: usize,
    pub constant: f64,
    pub lhs: f64,
    pub interior: f64,
    pub boundary: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// `|ratio_fine − ratio_coarse|`.
    pub uncertainty: f64,
    /// `lhs ≤ rhs` up to the quadrature uncertainty of the ratio (at least `1e−12`).
    pub passed: bool,
}

/// Evaluate both sides for a field that is at least [`POSITIVITY_FLOOR`] on every node.
pub fn check_isoperimetric(patch: &Patch, f: &dyn TestFunction) -> Result<IsoperimetricReport> {
    let chart = patch.chart();
    let (n, m) = (chart.dim(), chart.codim());
    if n < 2 {
        return Err(LabError::domain("isoperimetric check needs n >= 2"));
    }
    for level in [Level::Coarse, Level::Fine] {
        for v in patch.nodes(level) {
            let value = f.value(&v);
            if !(value >= POSITIVITY_FLOOR) {
                return Err(LabError::Positivity {
                    value,
                    at: v.u.to_vec(),
                });
            }
        }
    }
    let constant = brendle_c(n, m)?;
    let q = n as f64 / (n as f64 - 1.0);
    let ints = patch.integrate_many(2, |v, out| {
        let mut d = vec![0.0; n];
        let val = f.eval(v, &mut d);
        let h = v.mean_curvature_norm();
        out[0] = val.powf(q);
        out[1] = (v.gradient_norm_sq(&d) + val * val * h * h).sqrt();
    });
    let edge = if patch.has_boundary() {
        patch.integrate_boundary(|v| f.value(v))?
    } else {
        Default::default()
    };
    let sides = |a: f64, b: f64, c: f64| {
        let lhs = a.powf(1.0 / q);
        let rhs = constant * (b + c);
        (lhs, rhs, lhs / rhs)
    };
    let (lhs, rhs, ratio) = sides(ints[0].value, ints[1].value, edge.value);
    let (_, _, rc) = sides(ints[0].coarse, ints[1].coarse, edge.coarse);
    let (_, _, rf) = sides(ints[0].fine, ints[1].fine, edge.fine);
    let uncertainty = (rf - rc).abs();
    Ok(IsoperimetricReport {
        surface: chart.name().to_string(),
        n,
        m,
        constant,
        lhs,
        interior: ints[1].value,
        boundary: edge.value,
        rhs,
        ratio,
        uncertainty,
        passed: ratio <= 1.0 + uncertainty.max(1e-12),
    })
}
