//! Entropic optimal transport from `f^{p*} dvol_Σ` on a patch to the Talenti
//! measure `ν ∝ (1 + |y|^{p'})^{−n−m/p'}` on `R^{n+m}`, and diagnostics of
//! the transport map's tangential structure.
//!
//! Costs are `|x − y|²/2`. The Sinkhorn iteration runs on the dual potentials
//! in the log domain, so no kernel entry ever underflows.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{j_bound, SobolevParams};
use crate::error::{LabError, Result};
use crate::geometry::{FaceKind, Level, Patch};
use crate::quadrature::integrate_1d;
use crate::sobolev::TestFunction;
use crate::specfun::{radial_integral_closed, RadialIntegralParams};

/// Default number of neighbours in the potential-gradient fit.
pub const DEFAULT_NEIGHBORS: usize = 12;
/// Default cap on points per side (the coupling is stored densely).
pub const MAX_POINTS: usize = 5000;

const CDF_CELLS: usize = 4096;

/// Per-point chart data carried by a source cloud.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceGeometry {
    pub n: usize,
    /// `N × n` chart coordinates.
    pub chart_coords: Vec<f64>,
    /// `N × n × dim` rows `∂_i F`.
    pub jacobians: Vec<f64>,
    /// `N × n × n` inverse metrics.
    pub metric_inv: Vec<f64>,
    /// Period of each chart axis, for axes with periodic faces.
    pub periods: Vec<Option<f64>>,
}

/// Points in `R^dim` with probability weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedCloud {
    pub dim: usize,
    /// `N × dim`, row-major.
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub geometry: Option<SourceGeometry>,
}

impl WeightedCloud {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    /// The same cloud in `R^dim`, with zero trailing coordinates.
    pub fn padded(&self, dim: usize) -> Result<Self> {
        if dim < self.dim || self.geometry.is_some() {
            return Err(LabError::domain(
                "only target clouds can be padded to a larger dimension",
            ));
        }
        let mut points = vec![0.0; self.len() * dim];
        for i in 0..self.len() {
            points[i * dim..i * dim + self.dim].copy_from_slice(self.point(i));
        }
        Ok(WeightedCloud {
            dim,
            points,
            weights: self.weights.clone(),
            geometry: None,
        })
    }

    /// `P_T v` at source point `i`, as `J^T g^{-1} J v`.
    pub fn project_tangent(&self, i: usize, v: &[f64]) -> Result<Vec<f64>> {
        let geo = self
            .geometry
            .as_ref()
            .ok_or_else(|| LabError::domain("tangent projection needs a source cloud"))?;
        let (n, d) = (geo.n, self.dim);
        let jac = &geo.jacobians[i * n * d..(i + 1) * n * d];
        let ginv = &geo.metric_inv[i * n * n..(i + 1) * n * n];
        let jv: Vec<f64> = (0..n)
            .map(|a| {
                jac[a * d..(a + 1) * d]
                    .iter()
                    .zip(v)
                    .map(|(x, y)| x * y)
                    .sum()
            })
            .collect();
        let mut out = vec![0.0; d];
        for a in 0..n {
            let coef: f64 = (0..n).map(|b| ginv[a * n + b] * jv[b]).sum();
            for k in 0..d {
                out[k] += coef * jac[a * d + k];
            }
        }
        Ok(out)
    }
}

/// Fine-grid patch nodes, `N` of them chosen by seed (all when `N` exceeds
/// the node count), weighted by `|f|^{p*} dvol_Σ` and normalised.
pub fn sample_source(
    patch: &Patch,
    f: &dyn TestFunction,
    params: &SobolevParams,
    count: usize,
    seed: u64,
) -> Result<WeightedCloud> {
    if count == 0 {
        return Err(LabError::domain("source cloud needs at least one point"));
    }
    let chart = patch.chart();
    let (n, dim) = (chart.dim(), chart.ambient_dim());
    let total = patch.node_count(Level::Fine);
    let mut idx: Vec<usize> = if count >= total {
        (0..total).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sample(&mut rng, total, count).into_vec()
    };
    idx.sort_unstable();
    let ps = params.p_star();
    let mut cloud = WeightedCloud {
        dim,
        points: Vec::with_capacity(idx.len() * dim),
        weights: Vec::with_capacity(idx.len()),
        geometry: Some(SourceGeometry {
            n,
            chart_coords: Vec::with_capacity(idx.len() * n),
            jacobians: Vec::with_capacity(idx.len() * n * dim),
            metric_inv: Vec::with_capacity(idx.len() * n * n),
            periods: (0..n)
                .map(|a| {
                    let (lo, hi) = chart.domain()[a];
                    (chart.face(a, false) == FaceKind::Periodic).then_some(hi - lo)
                })
                .collect(),
        }),
    };
    let geo = cloud.geometry.as_mut().unwrap();
    for &i in &idx {
        let v = patch.node(Level::Fine, i);
        cloud.points.extend_from_slice(v.point);
        cloud.weights.push(f.value(&v).abs().powf(ps) * v.weight);
        geo.chart_coords.extend_from_slice(v.u);
        geo.jacobians.extend_from_slice(v.jacobian);
        geo.metric_inv.extend_from_slice(v.metric_inv);
    }
    let mass: f64 = cloud.weights.iter().sum();
    if !(mass > 1e-300 && mass.is_finite()) {
        return Err(LabError::DegenerateFunction(format!(
            "source mass {mass:e} cannot be normalised"
        )));
    }
    cloud.weights.iter_mut().for_each(|w| *w /= mass);
    Ok(cloud)
}

/// Radial law of `|y|` under the Talenti measure on `R^{n+m}`, tabulated as
/// a CDF in `u = r/(1 + r)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialLaw {
    pub dim: usize,
    pub power: f64,
    pub exponent: f64,
    /// `∫₀^∞ r^{dim−1}(1 + r^{p'})^{−γ} dr` by quadrature.
    pub mass: f64,
    nodes: Vec<f64>,
    cdf: Vec<f64>,
}

impl RadialLaw {
    pub fn new(params: &SobolevParams) -> Result<Self> {
        let (n, m) = (params.n() as f64, params.m() as f64);
        let q = params.p_dual();
        let dim = params.n() + params.m();
        let gamma = n + m / q;
        let density = |r: f64| r.powi(dim as i32 - 1) * (1.0 + r.powf(q)).powf(-gamma);
        let nodes: Vec<f64> = (0..=CDF_CELLS)
            .map(|k| k as f64 / CDF_CELLS as f64)
            .collect();
        let to_r = |u: f64| {
            if u >= 1.0 {
                f64::INFINITY
            } else {
                u / (1.0 - u)
            }
        };
        let cells: Vec<f64> = nodes
            .par_windows(2)
            .map(|w| integrate_1d(density, to_r(w[0]), to_r(w[1]), 1e-12).map(|r| r.value))
            .collect::<Result<_>>()?;
        let mut cdf = Vec::with_capacity(nodes.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for c in &cells {
            acc += c;
            cdf.push(acc);
        }
        let mass = acc;
        let exact =
            radial_integral_closed(&RadialIntegralParams::new(1.0, q, dim as f64 - 1.0, gamma)?);
        if (mass / exact - 1.0).abs() > 1e-8 {
            return Err(LabError::NonConvergence(format!(
                "radial CDF mass {mass} does not match the closed form {exact}"
            )));
        }
        cdf.iter_mut().for_each(|c| *c /= mass);
        Ok(RadialLaw {
            dim,
            power: q,
            exponent: gamma,
            mass,
            nodes,
            cdf,
        })
    }

    /// Tabulated CDF at radius `r`, linear in `u` between nodes.
    pub fn cdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        if !r.is_finite() {
            return 1.0;
        }
        let u = r / (1.0 + r);
        let x = u * CDF_CELLS as f64;
        let k = (x.floor() as usize).min(CDF_CELLS - 1);
        let t = x - k as f64;
        self.cdf[k] + t * (self.cdf[k + 1] - self.cdf[k])
    }

    /// Monotone inverse of [`Self::cdf`].
    pub fn quantile(&self, prob: f64) -> f64 {
        let prob = prob.clamp(0.0, 1.0);
        let k = self
            .cdf
            .partition_point(|&c| c <= prob)
            .clamp(1, self.cdf.len() - 1)
            - 1;
        let (c0, c1) = (self.cdf[k], self.cdf[k + 1]);
        let t = if c1 > c0 {
            (prob - c0) / (c1 - c0)
        } else {
            0.0
        };
        let u = self.nodes[k] + t * (self.nodes[k + 1] - self.nodes[k]);
        if u >= 1.0 {
            f64::MAX
        } else {
            u / (1.0 - u)
        }
    }
}

/// `N` i.i.d. draws from the Talenti measure with equal weights.
pub fn sample_target(params: &SobolevParams, count: usize, seed: u64) -> Result<WeightedCloud> {
    let law = RadialLaw::new(params)?;
    Ok(sample_from_law(&law, count, seed))
}

pub fn sample_from_law(law: &RadialLaw, count: usize, seed: u64) -> WeightedCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = law.dim;
    let mut points = Vec::with_capacity(count * dim);
    for _ in 0..count {
        let r = law.quantile(rng.gen::<f64>());
        let dir: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        points.extend(dir.iter().map(|x| r * x / norm));
    }
    WeightedCloud {
        dim,
        points,
        weights: vec![1.0 / count as f64; count],
        geometry: None,
    }
}

/// Output of [`solve_plan`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportPlan {
    pub rows: usize,
    pub cols: usize,
    /// Dense row-major coupling.
    #[serde(skip)]
    pub coupling: Vec<f64>,
    /// Source potential, shifted to zero weighted mean.
    pub potential_source: Vec<f64>,
    pub potential_target: Vec<f64>,
    pub epsilon: f64,
    /// `Σ_i |Σ_j π_ij − a_i|`; column sums are exact by construction.
    pub marginal_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Final dual objective `⟨a, φ⟩ + ⟨b, ψ⟩`.
    pub dual_objective: f64,
    /// Largest decrease of the dual objective between half-steps (0 when monotone).
    pub dual_violation: f64,
    /// `Σ π_ij |x_i − y_j|²/2`.
    pub transport_cost: f64,
}

impl TransportPlan {
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.coupling[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.coupling[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (acc, p) in s.iter_mut().zip(self.row(i)) {
                *acc += p;
            }
        }
        s
    }

    /// True when the dual objective never decreased by more than `1e−12` relative.
    pub fn dual_monotone(&self) -> bool {
        self.dual_violation <= 1e-12 * (1.0 + self.dual_objective.abs())
    }
}

fn half_cost(x: &[f64], y: &[f64]) -> f64 {
    0.5 * x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
}

/// `−ε log Σ_j exp(lw_j + (h_j − c_j)/ε)` for one row or column.
fn soft_min<I: Iterator<Item = f64> + Clone>(terms: I, eps: f64) -> f64 {
    let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = terms.map(|t| (t - max).exp()).sum();
    -eps * (max + sum.ln())
}

fn log_weights(w: &[f64]) -> Vec<f64> {
    w.iter().map(|x| x.ln()).collect()
}

fn update_source(
    src: &WeightedCloud,
    tgt: &WeightedCloud,
    log_b: &[f64],
    g: &[f64],
    eps: f64,
) -> Vec<f64> {
    (0..src.len())
        .into_par_iter()
        .map(|i| {
            let x = src.point(i);
            soft_min(
                (0..tgt.len()).map(|j| log_b[j] + (g[j] - half_cost(x, tgt.point(j))) / eps),
                eps,
            )
        })
        .collect()
}

fn update_target(
    src: &WeightedCloud,
    tgt: &WeightedCloud,
    log_a: &[f64],
    f: &[f64],
    eps: f64,
) -> Vec<f64> {
    (0..tgt.len())
        .into_par_iter()
        .map(|j| {
            let y = tgt.point(j);
            soft_min(
                (0..src.len()).map(|i| log_a[i] + (f[i] - half_cost(src.point(i), y)) / eps),
                eps,
            )
        })
        .collect()
}

fn weighted_dot(w: &[f64], v: &[f64]) -> f64 {
    w.iter()
        .zip(v)
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, b)| a * b)
        .sum()
}

/// Log-domain Sinkhorn iteration with a fixed `ε`, stopped when the source
/// marginal residual drops to `tol` or after `max_iter` sweeps.
pub fn solve_plan(
    source: &WeightedCloud,
    target: &WeightedCloud,
    epsilon: f64,
    tol: f64,
    max_iter: usize,
) -> Result<TransportPlan> {
    if !(epsilon > 0.0) {
        return Err(LabError::domain("epsilon must be positive"));
    }
    if source.dim != target.dim {
        return Err(LabError::domain(format!(
            "source lives in R^{} but target in R^{}",
            source.dim, target.dim
        )));
    }
    if source.is_empty() || target.is_empty() {
        return Err(LabError::domain("empty cloud"));
    }
    if source.len() > MAX_POINTS || target.len() > MAX_POINTS {
        return Err(LabError::domain(format!(
            "clouds are capped at {MAX_POINTS} points"
        )));
    }
    let (a, b) = (&source.weights, &target.weights);
    let (log_a, log_b) = (log_weights(a), log_weights(b));
    let mut f = vec![0.0; source.len()];
    let mut g = update_target(source, target, &log_a, &f, epsilon);
    let mut dual = weighted_dot(a, &f) + weighted_dot(b, &g);
    let mut violation = 0.0f64;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iter {
        let f_new = update_source(source, target, &log_b, &g, epsilon);
        // Row sums of the current plan are a_i exp((f_i − f_new_i)/ε).
        residual = a
            .iter()
            .zip(f.iter().zip(&f_new))
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, (old, new))| w * ((old - new) / epsilon).exp_m1().abs())
            .sum();
        if residual <= tol {
            break;
        }
        iterations += 1;
        f = f_new;
        let d = weighted_dot(a, &f) + weighted_dot(b, &g);
        violation = violation.max(dual - d);
        dual = d;
        g = update_target(source, target, &log_a, &f, epsilon);
        let d = weighted_dot(a, &f) + weighted_dot(b, &g);
        violation = violation.max(dual - d);
        dual = d;
    }
    let shift = weighted_dot(a, &f);
    let coupling: Vec<f64> = (0..source.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let x = source.point(i);
            let (fi, lai) = (f[i], log_a[i]);
            let g = &g;
            let log_b = &log_b;
            (0..target.len()).map(move |j| {
                (lai + log_b[j] + (fi + g[j] - half_cost(x, target.point(j))) / epsilon).exp()
            })
        })
        .collect();
    let transport_cost = (0..source.len())
        .map(|i| {
            let x = source.point(i);
            coupling[i * target.len()..(i + 1) * target.len()]
                .iter()
                .enumerate()
                .map(|(j, p)| p * half_cost(x, target.point(j)))
                .sum::<f64>()
        })
        .sum();
    Ok(TransportPlan {
        rows: source.len(),
        cols: target.len(),
        coupling,
        potential_source: f.iter().map(|v| v - shift).collect(),
        potential_target: g.iter().map(|v| v + shift).collect(),
        epsilon,
        marginal_residual: residual,
        iterations,
        converged: residual <= tol,
        dual_objective: dual,
        dual_violation: violation,
        transport_cost,
    })
}

/// Row-normalised barycentre `Σ_j π_ij y_j / Σ_j π_ij` of every source point.
pub fn barycenters(plan: &TransportPlan, target: &WeightedCloud) -> Vec<Vec<f64>> {
    (0..plan.rows)
        .map(|i| {
            let row = plan.row(i);
            let mass: f64 = row.iter().sum();
            let mut y = vec![0.0; target.dim];
            if mass > 0.0 {
                for (j, p) in row.iter().enumerate() {
                    for (acc, c) in y.iter_mut().zip(target.point(j)) {
                        *acc += p * c;
                    }
                }
                y.iter_mut().for_each(|c| *c /= mass);
            }
            y
        })
        .collect()
}

fn wrapped(delta: f64, period: Option<f64>) -> f64 {
    match period {
        Some(p) => delta - p * (delta / p).round(),
        None => delta,
    }
}

/// Indices of the `k` nearest other source points (ambient distance, ties by index).
fn nearest(cloud: &WeightedCloud, i: usize, k: usize) -> Vec<usize> {
    let x = cloud.point(i);
    let mut d: Vec<(f64, usize)> = (0..cloud.len())
        .filter(|&j| j != i)
        .map(|j| (half_cost(x, cloud.point(j)), j))
        .collect();
    d.select_nth_unstable_by(k - 1, |a, b| a.partial_cmp(b).unwrap());
    d.truncate(k);
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    d.into_iter().map(|(_, j)| j).collect()
}

/// Ambient tangential gradient of `û = |x|²/2 − φ` at every source point,
/// fitted by least squares in chart coordinates over `k` neighbours and raised
/// with `g^{ij}`.
pub fn potential_gradients(
    plan: &TransportPlan,
    source: &WeightedCloud,
    k: usize,
) -> Result<Vec<Vec<f64>>> {
    let geo = source
        .geometry
        .as_ref()
        .ok_or_else(|| LabError::domain("gradient fit needs a source cloud"))?;
    let (n, d) = (geo.n, source.dim);
    let have = source.len().saturating_sub(1);
    if k < n || have < k {
        return Err(LabError::InsufficientNeighbors {
            needed: k.max(n),
            have,
        });
    }
    let u_hat: Vec<f64> = (0..source.len())
        .map(|i| {
            0.5 * source.point(i).iter().map(|x| x * x).sum::<f64>() - plan.potential_source[i]
        })
        .collect();
    (0..source.len())
        .into_par_iter()
        .map(|i| {
            let nb = nearest(source, i, k);
            let ui = &geo.chart_coords[i * n..(i + 1) * n];
            let mut a = DMatrix::<f64>::zeros(k, n);
            let mut rhs = DVector::<f64>::zeros(k);
            for (row, &j) in nb.iter().enumerate() {
                let uj = &geo.chart_coords[j * n..(j + 1) * n];
                for c in 0..n {
                    a[(row, c)] = wrapped(uj[c] - ui[c], geo.periods[c]);
                }
                rhs[row] = u_hat[j] - u_hat[i];
            }
            let coef = a
                .svd(true, true)
                .solve(&rhs, 1e-14)
                .map_err(|e| LabError::NonConvergence(format!("gradient fit: {e}")))?;
            let jac = &geo.jacobians[i * n * d..(i + 1) * n * d];
            let ginv = &geo.metric_inv[i * n * n..(i + 1) * n * n];
            let mut grad = vec![0.0; d];
            for r in 0..n {
                let raised: f64 = (0..n).map(|s| ginv[r * n + s] * coef[s]).sum();
                for c in 0..d {
                    grad[c] += raised * jac[r * d + c];
                }
            }
            Ok(grad)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualStats {
    /// `‖P_T ȳ(x) − ∇̂^Σ u(x)‖` per source point.
    pub per_point: Vec<f64>,
    pub median: f64,
    pub p90: f64,
    /// Largest `||ȳ|² − |P_T ȳ|² − |P_N ȳ|²| / max(1, |ȳ|²)`.
    pub projector_identity: f64,
    pub neighbors: usize,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn tangential_structure_residual(
    plan: &TransportPlan,
    source: &WeightedCloud,
    target: &WeightedCloud,
    neighbors: usize,
) -> Result<ResidualStats> {
    let grads = potential_gradients(plan, source, neighbors)?;
    let bars = barycenters(plan, target);
    let mut per_point = Vec::with_capacity(bars.len());
    let mut projector_identity = 0.0f64;
    for (i, y) in bars.iter().enumerate() {
        let t = source.project_tangent(i, y)?;
        let normal: Vec<f64> = y.iter().zip(&t).map(|(a, b)| a - b).collect();
        let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        let full = sq(y);
        projector_identity =
            projector_identity.max((full - sq(&t) - sq(&normal)).abs() / full.max(1.0));
        per_point.push(
            t.iter()
                .zip(&grads[i])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
        );
    }
    let mut sorted = per_point.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(ResidualStats {
        median: quantile(&sorted, 0.5),
        p90: quantile(&sorted, 0.9),
        per_point,
        projector_identity,
        neighbors,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JEstimate {
    /// `Σ_i r_i ‖P_T ȳ_i‖^{p'}` with `r_i` the plan's row sums.
    pub j_hat: f64,
    /// `Σ_ij π_ij ‖P_{T_i} y_j‖^{p'}`, an upper bound on `j_hat` by convexity.
    pub plan_moment: f64,
    pub j_bound: f64,
    /// `j_hat − j_bound`; positive values exceed the bound.
    pub excess: f64,
}

pub fn estimate_j(
    plan: &TransportPlan,
    source: &WeightedCloud,
    target: &WeightedCloud,
    params: &SobolevParams,
) -> Result<JEstimate> {
    let q = params.p_dual();
    let bars = barycenters(plan, target);
    let mut j_hat = 0.0;
    let mut plan_moment = 0.0;
    for (i, y) in bars.iter().enumerate() {
        let row = plan.row(i);
        let mass: f64 = row.iter().sum();
        let t = source.project_tangent(i, y)?;
        j_hat += mass * t.iter().map(|x| x * x).sum::<f64>().sqrt().powf(q);
        for (j, p) in row.iter().enumerate() {
            if *p > 0.0 {
                let t = source.project_tangent(i, target.point(j))?;
                plan_moment += p * t.iter().map(|x| x * x).sum::<f64>().sqrt().powf(q);
            }
        }
    }
    let bound = j_bound(params.n(), params.m(), params.p())?;
    Ok(JEstimate {
        j_hat,
        plan_moment,
        j_bound: bound,
        excess: j_hat - bound,
    })
}

/// The report written for one transport experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub surface: String,
    pub n: usize,
    pub m: usize,
    pub p: f64,
    #[serde(rename = "N")]
    pub points: usize,
    pub epsilon: f64,
    pub marginal_residual: f64,
    pub median_tangential_residual: f64,
    pub p90_tangential_residual: f64,
    pub projector_identity: f64,
    #[serde(rename = "J_hat")]
    pub j_hat: f64,
    pub plan_moment: f64,
    pub j_bound: f64,
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
    pub dual_monotone: bool,
    pub not_checked: Vec<String>,
}

/// Settings of [`run_experiment`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Experiment {
    pub points: usize,
    pub epsilon: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub neighbors: usize,
    pub seed: u64,
}

impl Default for Experiment {
    fn default() -> Self {
        Experiment {
            points: 500,
            epsilon: 0.01,
            tol: 1e-7,
            max_iter: 100_000,
            neighbors: DEFAULT_NEIGHBORS,
            seed: 7,
        }
    }
}

/// Source from `f` on `patch`, target from `params`, then plan, residuals and `Ĵ`.
pub fn run_experiment(
    patch: &Patch,
    f: &dyn TestFunction,
    params: &SobolevParams,
    exp: &Experiment,
) -> Result<(ExperimentReport, TransportPlan)> {
    let source = sample_source(patch, f, params, exp.points, exp.seed)?;
    let target = sample_target(params, exp.points, exp.seed.wrapping_add(1))?;
    let plan = solve_plan(&source, &target, exp.epsilon, exp.tol, exp.max_iter)?;
    let stats = tangential_structure_residual(&plan, &source, &target, exp.neighbors)?;
    let j = estimate_j(&plan, &source, &target, params)?;
    let report = ExperimentReport {
        surface: patch.chart().name().to_string(),
        n: params.n(),
        m: params.m(),
        p: params.p(),
        points: exp.points,
        epsilon: exp.epsilon,
        marginal_residual: plan.marginal_residual,
        median_tangential_residual: stats.median,
        p90_tangential_residual: stats.p90,
        projector_identity: stats.projector_identity,
        j_hat: j.j_hat,
        plan_moment: j.plan_moment,
        j_bound: j.j_bound,
        seed: exp.seed,
        iterations: plan.iterations,
        converged: plan.converged,
        dual_monotone: plan.dual_monotone(),
        not_checked: vec![
            "determinant-trace inequality (out of scope)".into(),
            "distributional Laplacian comparison (out of scope)".into(),
        ],
    };
    Ok((report, plan))
}

/// CSV rows `x_1..x_d, ybar_1..ybar_d, weight` for plotting matched pairs.
pub fn matched_pairs_csv(
    plan: &TransportPlan,
    source: &WeightedCloud,
    target: &WeightedCloud,
) -> String {
    let d = source.dim;
    let mut out = String::new();
    let header: Vec<String> = (1..=d)
        .map(|k| format!("x{k}"))
        .chain((1..=d).map(|k| format!("ybar{k}")))
        .chain(std::iter::once("weight".to_string()))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for (i, y) in barycenters(plan, target).iter().enumerate() {
        let row: Vec<String> = source
            .point(i)
            .iter()
            .chain(y)
            .map(|v| format!("{v:.12e}"))
            .chain(std::iter::once(format!("{:.12e}", source.weights[i])))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
