//! Test functions on patches and the Sobolev quotient
//! `‖f‖_{p*} / ‖∇^Σ f‖_p`.
//!
//! Built-in fields are functions of the ambient distance `|F(u) − c|`, so
//! their chart partials follow from the chain rule
//! `∂_i f = φ'(r) ⟨(x − c)/r, ∂_iF⟩` and no finite differencing is involved.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constants::{log_aubin_talenti, log_sobolev_s, log_sobolev_s_tilde, SobolevParams};
use crate::error::{LabError, Result};
use crate::geometry::{Level, NodeView, Patch};
use crate::optimize::golden_max;

/// Dirichlet energies below this are treated as zero.
pub const DEGENERATE_ENERGY: f64 = 1e-14;

/// A scalar field on a patch that can report its chart partials.
pub trait TestFunction: Send + Sync {
    /// Returns `f` at the node and writes `∂_i f` into `partials`.
    fn eval(&self, node: &NodeView, partials: &mut [f64]) -> f64;

    /// Ambient balls `(centre, radius)` outside of which `f` vanishes, or
    /// `None` if `f` has no compact support.
    fn support(&self) -> Option<Vec<(Vec<f64>, f64)>> {
        None
    }

    fn value(&self, node: &NodeView) -> f64 {
        let mut scratch = vec![0.0; node.n];
        self.eval(node, &mut scratch)
    }
}

/// `C²` cutoff equal to 1 for `r ≤ inner` and 0 for `r ≥ outer`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cutoff {
    pub inner: f64,
    pub outer: f64,
}

impl Cutoff {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.0 && outer > inner) {
            return Err(LabError::domain(format!(
                "cutoff needs 0 < inner < outer, got ({inner}, {outer})"
            )));
        }
        Ok(Cutoff { inner, outer })
    }

    /// `(χ(r), χ'(r))`, with `χ = 1 − (10s³ − 15s⁴ + 6s⁵)` on the transition.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        if r <= self.inner {
            return (1.0, 0.0);
        }
        if r >= self.outer {
            return (0.0, 0.0);
        }
        let w = self.outer - self.inner;
        let s = (r - self.inner) / w;
        let step = s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
        let dstep = 30.0 * s * s * (1.0 - s) * (1.0 - s) / w;
        (1.0 - step, -dstep)
    }
}

/// Radial shapes `φ(r)` in the ambient distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    /// `(1 + (r/λ)^{q})^{−e}`; with `q = p'` and `e = (n−p)/p` this is the
    /// Euclidean extremal profile.
    Bubble {
        scale: f64,
        power: f64,
        exponent: f64,
    },
    /// `exp(1 − 1/(1 − (r/R)²))` for `r < R`, zero outside.
    Bump { radius: f64 },
    /// `exp(−r²/(2w²))`.
    Gaussian { width: f64 },
}

impl Shape {
    fn eval(&self, r: f64) -> (f64, f64) {
        match *self {
            Shape::Bubble {
                scale,
                power,
                exponent,
            } => {
                let x = r / scale;
                let xq = x.powf(power);
                let base = 1.0 + xq;
                let v = base.powf(-exponent);
                // d/dr (1 + x^q)^{−e} = −e q x^{q−1} (1 + x^q)^{−e−1} / λ
                let d = if r > 0.0 {
                    -exponent * power * xq / x * v / base / scale
                } else {
                    0.0
                };
                (v, d)
            }
            Shape::Bump { radius } => {
                let t = r / radius;
                if t >= 1.0 {
                    return (0.0, 0.0);
                }
                let one_minus = 1.0 - t * t;
                let v = (1.0 - 1.0 / one_minus).exp();
                (v, -2.0 * t / (one_minus * one_minus) * v / radius)
            }
            Shape::Gaussian { width } => {
                let v = (-0.5 * r * r / (width * width)).exp();
                (v, -r / (width * width) * v)
            }
        }
    }

    fn radius(&self) -> Option<f64> {
        match *self {
            Shape::Bump { radius } => Some(radius),
            _ => None,
        }
    }
}

/// `a · φ(|x − c|) · χ(|x − c|)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialField {
    pub center: Vec<f64>,
    pub amplitude: f64,
    pub shape: Shape,
    pub cutoff: Option<Cutoff>,
}

impl RadialField {
    pub fn new(center: Vec<f64>, amplitude: f64, shape: Shape, cutoff: Option<Cutoff>) -> Self {
        RadialField {
            center,
            amplitude,
            shape,
            cutoff,
        }
    }

    /// Aubin–Talenti bubble of scale `λ` for exponent `p` on an `n`-dimensional patch.
    pub fn bubble(center: Vec<f64>, scale: f64, n: usize, p: f64, cutoff: Option<Cutoff>) -> Self {
        let shape = Shape::Bubble {
            scale,
            power: p / (p - 1.0),
            exponent: (n as f64 - p) / p,
        };
        RadialField::new(center, 1.0, shape, cutoff)
    }

    fn eval_radial(&self, x: &[f64]) -> (f64, f64, Vec<f64>) {
        let diff: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        let r = diff.iter().map(|d| d * d).sum::<f64>().sqrt();
        let (phi, dphi) = self.shape.eval(r);
        let (chi, dchi) = self.cutoff.map_or((1.0, 0.0), |c| c.eval(r));
        let v = self.amplitude * phi * chi;
        let dv = self.amplitude * (dphi * chi + phi * dchi);
        (
            v,
            dv,
            diff.into_iter()
                .map(|d| if r > 0.0 { d / r } else { 0.0 })
                .collect(),
        )
    }

    fn support_radius(&self) -> Option<f64> {
        match (self.shape.radius(), self.cutoff) {
            (Some(a), Some(c)) => Some(a.min(c.outer)),
            (Some(a), None) => Some(a),
            (None, Some(c)) => Some(c.outer),
            (None, None) => None,
        }
    }
}

impl TestFunction for RadialField {
    fn eval(&self, node: &NodeView, partials: &mut [f64]) -> f64 {
        let (v, dv, dir) = self.eval_radial(node.point);
        let big_n = node.ambient;
        for (i, out) in partials.iter_mut().enumerate().take(node.n) {
            let row = &node.jacobian[i * big_n..(i + 1) * big_n];
            *out = dv * row.iter().zip(&dir).map(|(a, b)| a * b).sum::<f64>();
        }
        v
    }

    fn support(&self) -> Option<Vec<(Vec<f64>, f64)>> {
        self.support_radius()
            .map(|r| vec![(self.center.clone(), r)])
    }
}

/// `offset + Σ terms`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSum {
    pub offset: f64,
    pub terms: Vec<RadialField>,
}

impl FieldSum {
    pub fn constant(c: f64) -> Self {
        FieldSum {
            offset: c,
            terms: Vec::new(),
        }
    }
}

impl TestFunction for FieldSum {
    fn eval(&self, node: &NodeView, partials: &mut [f64]) -> f64 {
        partials.iter_mut().for_each(|p| *p = 0.0);
        let mut scratch = vec![0.0; partials.len()];
        let mut v = self.offset;
        for t in &self.terms {
            v += t.eval(node, &mut scratch);
            for (p, s) in partials.iter_mut().zip(&scratch) {
                *p += s;
            }
        }
        v
    }

    fn support(&self) -> Option<Vec<(Vec<f64>, f64)>> {
        if self.offset != 0.0 {
            return None;
        }
        let mut balls = Vec::new();
        for t in &self.terms {
            balls.extend(t.support()?);
        }
        Some(balls)
    }
}

/// A user-supplied function of the chart coordinates, differentiated by
/// central differences with step `ε^{1/3}(1 + |u_i|)`.
pub struct ChartFunction<F> {
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> ChartFunction<F> {
    pub fn new(f: F) -> Self {
        ChartFunction { f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> TestFunction for ChartFunction<F> {
    fn eval(&self, node: &NodeView, partials: &mut [f64]) -> f64 {
        let mut u = node.u.to_vec();
        let step = f64::EPSILON.cbrt();
        for i in 0..node.n {
            let h = step * (1.0 + node.u[i].abs());
            u[i] = node.u[i] + h;
            let plus = (self.f)(&u);
            u[i] = node.u[i] - h;
            let minus = (self.f)(&u);
            u[i] = node.u[i];
            partials[i] = (plus - minus) / (2.0 * h);
        }
        (self.f)(node.u)
    }
}

/// `(∫ |f|^q dvol_Σ)^{1/q}` from the patch's extrapolated integral.
pub fn lp_norm(patch: &Patch, f: &dyn TestFunction, q: f64) -> Result<f64> {
    if !(q > 0.0) {
        return Err(LabError::domain("lp_norm needs q > 0"));
    }
    let i = patch.integrate(|v| f.value(v).abs().powf(q));
    Ok(i.value.max(0.0).powf(1.0 / q))
}

/// `(∫ |∇^Σ f|^p dvol_Σ)^{1/p}`.
pub fn dirichlet_energy(patch: &Patch, f: &dyn TestFunction, p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(LabError::domain("dirichlet_energy needs p > 1"));
    }
    let n = patch.dim();
    let i = patch.integrate(|v| {
        let mut d = vec![0.0; n];
        f.eval(v, &mut d);
        v.gradient_norm_sq(&d).powf(0.5 * p)
    });
    Ok(i.value.max(0.0).powf(1.0 / p))
}

/// Which sharp constant a quotient is compared with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundName {
    /// `S(n,p)`, for `p ≥ 2`, `n ≥ 3`.
    S,
    /// `S̃(n,m,p)`, for `1 < p ≤ 2`.
    STilde,
    /// `AT(n,p)`, reported for reference only.
    AtReference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundValue {
    pub name: BoundName,
    pub value: f64,
}

/// Both sides of the Sobolev inequality on one patch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientReport {
    pub surface: String,
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub grid: Vec<usize>,
    pub lpstar_norm: f64,
    pub dirichlet_p_norm: f64,
    pub quotient: f64,
    pub quotient_coarse: f64,
    pub quotient_fine: f64,
    /// `|quotient_fine − quotient_coarse|`.
    pub uncertainty: f64,
    pub bound: f64,
    pub bound_name: BoundName,
    /// `bound − quotient`; negative values are recorded, not hidden.
    pub margin: f64,
    /// Every bound that applies at these parameters, plus `AT` for reference.
    pub bounds: Vec<BoundValue>,
}

impl QuotientReport {
    pub fn bound_for(&self, name: BoundName) -> Option<f64> {
        self.bounds.iter().find(|b| b.name == name).map(|b| b.value)
    }
}

/// The sharp bounds that apply to `(n, m, p)`, primary first.
pub fn applicable_bounds(params: &SobolevParams) -> Result<Vec<BoundValue>> {
    let (n, m, p) = (params.n(), params.m(), params.p());
    let mut bounds = Vec::new();
    if let Ok(s) = log_sobolev_s(n, p) {
        bounds.push(BoundValue {
            name: BoundName::S,
            value: s.exp(),
        });
    }
    if m >= 1 {
        if let Ok(s) = log_sobolev_s_tilde(n, m, p) {
            bounds.push(BoundValue {
                name: BoundName::STilde,
                value: s.exp(),
            });
        }
    }
    if bounds.is_empty() {
        return Err(LabError::domain(format!(
            "no Sobolev bound is stated for n = {n}, m = {m}, p = {p}"
        )));
    }
    bounds.push(BoundValue {
        name: BoundName::AtReference,
        value: log_aubin_talenti(n, p)?.exp(),
    });
    Ok(bounds)
}

/// Ensure the declared support of `f` stays clear of the patch edges.
pub fn check_support(patch: &Patch, f: &dyn TestFunction) -> Result<()> {
    let chart = patch.chart();
    if chart.is_closed() {
        return Ok(());
    }
    let balls = f.support().ok_or_else(|| {
        LabError::domain("test function must be compactly supported inside the patch")
    })?;
    for (c, r) in balls {
        let d = patch
            .distance_to_edge(&c)
            .ok_or_else(|| LabError::domain("patch has no edge information"))?;
        if r >= d {
            return Err(LabError::domain(format!(
                "support radius {r} reaches the patch edge (distance {d})"
            )));
        }
    }
    Ok(())
}

/// Sobolev quotient of `f` on a minimal patch, with both grid levels.
pub fn sobolev_quotient(
    patch: &Patch,
    f: &dyn TestFunction,
    params: &SobolevParams,
) -> Result<QuotientReport> {
    let chart = patch.chart();
    if !chart.is_minimal() {
        return Err(LabError::NonMinimal {
            surface: chart.name().to_string(),
            bound: "Sobolev inequality on minimal submanifolds".into(),
        });
    }
    if params.n() != chart.dim() {
        return Err(LabError::domain(format!(
            "params have n = {} but the patch has dimension {}",
            params.n(),
            chart.dim()
        )));
    }
    check_support(patch, f)?;
    let bounds = applicable_bounds(params)?;
    let (bound_name, bound) = (bounds[0].name, bounds[0].value);
    let n = chart.dim();
    let (p, ps) = (params.p(), params.p_star());
    let ints = patch.integrate_many(2, |v, out| {
        let mut d = vec![0.0; n];
        let val = f.eval(v, &mut d);
        out[0] = val.abs().powf(ps);
        out[1] = v.gradient_norm_sq(&d).powf(0.5 * p);
    });
    let quotient_of = |a: f64, b: f64| -> Result<(f64, f64, f64)> {
        let top = a.max(0.0).powf(1.0 / ps);
        let bottom = b.max(0.0).powf(1.0 / p);
        if !(bottom > DEGENERATE_ENERGY) {
            return Err(LabError::DegenerateFunction(format!(
                "Dirichlet energy {bottom:e} is numerically zero"
            )));
        }
        Ok((top, bottom, top / bottom))
    };
    let (top, bottom, quotient) = quotient_of(ints[0].value, ints[1].value)?;
    let (_, _, qc) = quotient_of(ints[0].coarse, ints[1].coarse)?;
    let (_, _, qf) = quotient_of(ints[0].fine, ints[1].fine)?;
    Ok(QuotientReport {
        surface: chart.name().to_string(),
        n,
        m: chart.codim(),
        p,
        grid: patch.grid().to_vec(),
        lpstar_norm: top,
        dirichlet_p_norm: bottom,
        quotient,
        quotient_coarse: qc,
        quotient_fine: qf,
        uncertainty: (qf - qc).abs(),
        bound,
        bound_name,
        margin: bound - quotient,
        bounds,
    })
}

/// Bubble family: centres from a candidate list, scale `λ` searched on a log scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BubbleFamily {
    pub centers: Vec<Vec<f64>>,
    pub scale_min: f64,
    pub scale_max: f64,
    pub amplitude: f64,
    /// Cutoff radii as fractions of the distance from the centre to the patch edge.
    pub inner_fraction: f64,
    pub outer_fraction: f64,
}

impl BubbleFamily {
    pub fn new(centers: Vec<Vec<f64>>, scale_min: f64, scale_max: f64) -> Self {
        BubbleFamily {
            centers,
            scale_min,
            scale_max,
            amplitude: 1.0,
            inner_fraction: 0.7,
            outer_fraction: 0.95,
        }
    }

    /// The member centred at `center` with scale `scale`, or `None` if the
    /// centre is too close to the edge.
    pub fn member(&self, patch: &Patch, center: &[f64], scale: f64, p: f64) -> Option<RadialField> {
        let margin = if patch.chart().is_closed() {
            f64::INFINITY
        } else {
            patch.distance_to_edge(center)?
        };
        let cutoff = if margin.is_finite() {
            Some(Cutoff::new(self.inner_fraction * margin, self.outer_fraction * margin).ok()?)
        } else {
            None
        };
        let mut f = RadialField::bubble(center.to_vec(), scale, patch.dim(), p, cutoff);
        f.amplitude = self.amplitude;
        Some(f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaximizeResult {
    pub best: QuotientReport,
    pub center: Vec<f64>,
    pub scale: f64,
    pub evaluations: usize,
    /// The evaluation budget ran out before every centre was searched.
    pub budget_exhausted: bool,
}

/// Largest quotient over the family: golden-section search in `ln λ` per
/// centre, stopping when `budget` quotient evaluations have been spent.
pub fn maximize_quotient(
    patch: &Patch,
    family: &BubbleFamily,
    params: &SobolevParams,
    budget: usize,
) -> Result<MaximizeResult> {
    if family.amplitude == 0.0
        || family.centers.is_empty()
        || !(family.scale_min > 0.0 && family.scale_max >= family.scale_min)
    {
        return Err(LabError::EmptyFamily(
            "no centre, zero amplitude or an empty scale range".into(),
        ));
    }
    let mut best: Option<(QuotientReport, Vec<f64>, f64)> = None;
    let mut evaluations = 0usize;
    let mut exhausted = false;
    for center in &family.centers {
        if family
            .member(patch, center, family.scale_min, params.p())
            .is_none()
        {
            continue;
        }
        if evaluations >= budget {
            exhausted = true;
            break;
        }
        let (lo, hi) = (family.scale_min.ln(), family.scale_max.ln());
        let remaining = budget.saturating_sub(evaluations);
        // Golden section shrinks the bracket by 0.618 per step; cap by the budget.
        let tol = ((hi - lo) * 0.618f64.powi(remaining.min(60) as i32)).max(1e-3);
        let mut local_best: Option<(QuotientReport, f64)> = None;
        let mut eval = |ln_scale: f64| -> f64 {
            let scale = ln_scale.exp();
            let Some(f) = family.member(patch, center, scale, params.p()) else {
                return f64::NEG_INFINITY;
            };
            evaluations += 1;
            match sobolev_quotient(patch, &f, params) {
                Ok(r) => {
                    let q = r.quotient;
                    if local_best.as_ref().map_or(true, |(b, _)| q > b.quotient) {
                        local_best = Some((r, scale));
                    }
                    q
                }
                Err(_) => f64::NEG_INFINITY,
            }
        };
        if hi > lo {
            golden_max(&mut eval, lo, hi, tol)?;
            // Endpoints are where monotone quotients peak.
            eval(lo);
            eval(hi);
        } else {
            eval(lo);
        }
        if let Some((r, scale)) = local_best {
            if best
                .as_ref()
                .map_or(true, |(b, _, _)| r.quotient > b.quotient)
            {
                best = Some((r, center.clone(), scale));
            }
        }
    }
    let (best, center, scale) = best
        .ok_or_else(|| LabError::EmptyFamily("no admissible member produced a quotient".into()))?;
    Ok(MaximizeResult {
        best,
        center,
        scale,
        evaluations,
        budget_exhausted: exhausted,
    })
}

/// Seeded sum of one to three bumps centred at interior chart points, each
/// supported inside its distance to the patch edge.
pub fn seeded_bumps(patch: &Patch, seed: u64) -> Result<FieldSum> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chart = patch.chart();
    let count = rng.gen_range(1..=3);
    let mut terms = Vec::with_capacity(count);
    let mut attempts = 0;
    while terms.len() < count {
        attempts += 1;
        if attempts > 1000 {
            return Err(LabError::EmptyFamily(
                "could not place a bump inside the patch".into(),
            ));
        }
        let u: Vec<f64> = chart
            .domain()
            .iter()
            .map(|(lo, hi)| {
                let w = hi - lo;
                rng.gen_range(lo + 0.25 * w..hi - 0.25 * w)
            })
            .collect();
        let c = chart.point(&u);
        let d = if chart.is_closed() {
            1.0
        } else {
            match patch.distance_to_edge(&c) {
                Some(d) if d > 1e-3 => d,
                _ => continue,
            }
        };
        let radius = d * rng.gen_range(0.4..0.9);
        let amplitude = rng.gen_range(0.5..2.0);
        terms.push(RadialField::new(c, amplitude, Shape::Bump { radius }, None));
    }
    Ok(FieldSum { offset: 0.0, terms })
}

/// Seeded strictly positive field `offset + Σ Gaussians` (no support restriction).
pub fn seeded_positive_field(patch: &Patch, seed: u64) -> FieldSum {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chart = patch.chart();
    let count = rng.gen_range(1..=3);
    let terms = (0..count)
        .map(|_| {
            let u: Vec<f64> = chart
                .domain()
                .iter()
                .map(|(lo, hi)| rng.gen_range(*lo..*hi))
                .collect();
            RadialField::new(
                chart.point(&u),
                rng.gen_range(0.2..2.0),
                Shape::Gaussian {
                    width: rng.gen_range(0.2..0.8),
                },
                None,
            )
        })
        .collect();
    FieldSum {
        offset: rng.gen_range(0.2..1.0),
        terms,
    }
}

/// Fine-grid node values, for diagnostics.
pub fn min_on_grid(patch: &Patch, f: &dyn TestFunction) -> (f64, Vec<f64>) {
    patch
        .nodes(Level::Fine)
        .map(|v| (f.value(&v), v.u.to_vec()))
        .fold((f64::INFINITY, Vec::new()), |acc, x| {
            if x.0 < acc.0 {
                x
            } else {
                acc
            }
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Surface;
    use crate::specfun::{radial_integral_closed, RadialIntegralParams};
    use std::f64::consts::PI;

    #[test]
    fn cutoff_is_c1_and_bounded() {
        let c = Cutoff::new(0.7, 0.95).unwrap();
        assert_eq!(c.eval(0.5), (1.0, 0.0));
        assert_eq!(c.eval(1.0), (0.0, 0.0));
        let h = 1e-6;
        for r in [0.75, 0.8, 0.9] {
            let fd = (c.eval(r + h).0 - c.eval(r - h).0) / (2.0 * h);
            assert!((fd - c.eval(r).1).abs() < 1e-6);
        }
        assert!(Cutoff::new(0.9, 0.5).is_err());
    }

    #[test]
    fn shape_derivatives() {
        let shapes = [
            Shape::Bubble {
                scale: 0.3,
                power: 3.0,
                exponent: 1.0 / 3.0,
            },
            Shape::Bump { radius: 0.8 },
            Shape::Gaussian { width: 0.4 },
        ];
        let h = 1e-6;
        for s in shapes {
            for r in [0.1, 0.35, 0.6] {
                let fd = (s.eval(r + h).0 - s.eval(r - h).0) / (2.0 * h);
                assert!((fd - s.eval(r).1).abs() < 1e-6, "{s:?} at {r}");
            }
        }
    }

    #[test]
    fn trivial_norms_on_square_and_sphere() {
        let square = Patch::uniform(Surface::Flat { n: 2, m: 0 }.chart().unwrap(), 8).unwrap();
        let one = FieldSum::constant(1.0);
        assert!((lp_norm(&square, &one, 2.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(dirichlet_energy(&square, &one, 2.0).unwrap() == 0.0);
        let linear = ChartFunction::new(|u: &[f64]| u[0]);
        assert!((dirichlet_energy(&square, &linear, 2.0).unwrap() - 1.0).abs() < 1e-9);

        let sphere = Patch::new(Surface::Sphere { n: 2 }.chart().unwrap(), &[128, 16]).unwrap();
        let l2 = lp_norm(&sphere, &one, 2.0).unwrap();
        assert!((l2 - (4.0 * PI).sqrt()).abs() < 1e-8);
    }

    #[test]
    fn bubble_norms_match_radial_closed_forms() {
        // Unit bubble (1 + r²)^{-1/2} in R³, truncated at R = 500.
        let chart = Surface::FlatBall {
            n: 3,
            m: 0,
            radius: 500.0,
            grading: 8.0,
        }
        .chart()
        .unwrap();
        let patch = Patch::new(chart, &[200, 8, 4]).unwrap();
        let f = RadialField::bubble(vec![0.0; 3], 1.0, 3, 2.0, None);
        let l6 = lp_norm(&patch, &f, 6.0).unwrap().powi(6);
        let exact6 = 4.0
            * PI
            * radial_integral_closed(&RadialIntegralParams::new(1.0, 2.0, 2.0, 3.0).unwrap());
        assert!((l6 / exact6 - 1.0).abs() < 0.02);
        // |∇f|² = r² (1 + r²)^{-3}
        let e2 = dirichlet_energy(&patch, &f, 2.0).unwrap().powi(2);
        let exact2 = 4.0
            * PI
            * radial_integral_closed(&RadialIntegralParams::new(1.0, 2.0, 4.0, 3.0).unwrap());
        assert!((e2 / exact2 - 1.0).abs() < 0.02);
    }

    #[test]
    fn quotient_rejects_non_minimal_and_degenerate() {
        let sphere = Patch::uniform(Surface::Sphere { n: 2 }.chart().unwrap(), 8).unwrap();
        let params = SobolevParams::new(2, 1, 1.5).unwrap();
        let one = FieldSum::constant(1.0);
        assert!(matches!(
            sobolev_quotient(&sphere, &one, &params),
            Err(LabError::NonMinimal { .. })
        ));
        let cat = Patch::uniform(Surface::Catenoid.chart().unwrap(), 16).unwrap();
        let zero = RadialField::new(vec![1.0, 0.0, 0.0], 0.0, Shape::Bump { radius: 0.3 }, None);
        assert!(matches!(
            sobolev_quotient(&cat, &zero, &params),
            Err(LabError::DegenerateFunction(_))
        ));
        let wide = RadialField::new(vec![1.0, 0.0, 0.0], 1.0, Shape::Bump { radius: 5.0 }, None);
        assert!(sobolev_quotient(&cat, &wide, &params).is_err());
    }

    #[test]
    fn empty_family() {
        let cat = Patch::uniform(Surface::Catenoid.chart().unwrap(), 8).unwrap();
        let params = SobolevParams::new(2, 1, 1.5).unwrap();
        let mut fam = BubbleFamily::new(vec![vec![1.0, 0.0, 0.0]], 0.1, 0.2);
        fam.amplitude = 0.0;
        assert!(matches!(
            maximize_quotient(&cat, &fam, &params, 10),
            Err(LabError::EmptyFamily(_))
        ));
    }
}
