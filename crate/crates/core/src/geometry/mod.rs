//! Parametrized `n`-dimensional submanifolds of `R^{n+m}`.
//!
//! A [`Chart`] is a map `u ↦ F(u)` on an axis-aligned box with optional
//! analytic first and second derivatives. From those we get the induced metric
//! `g_ij = ⟨∂_iF, ∂_jF⟩`, the tangent/normal projectors, the second fundamental
//! form `II_ij = P_N(∂_i∂_jF)` and the mean curvature vector `H = g^{ij} II_ij`
//! (unnormalized trace, so `|H| = n` on the unit `n`-sphere).
//!
//! Array layouts used throughout: a Jacobian is `n × N` row-major with
//! `jac[i*N + a] = ∂_iF^a`; a Hessian is `n × n × N` with
//! `hess[(i*n + j)*N + a] = ∂_i∂_jF^a`.

pub mod catalog;
pub(crate) mod linalg;
pub mod patch;

use std::fmt;
use std::sync::Arc;

use crate::error::{LabError, Result};
use linalg::{dot, norm, spd_inverse};

pub use catalog::{catalog, Surface};
pub use patch::{Integral, Level, NodeView, Patch};

/// Metrics whose Hadamard ratio `det g / Π g_ii` is at or below this value are
/// rejected. The ratio is scale-free, so polar charts with a tiny but
/// well-conditioned area element near their centre are accepted.
pub const DEGENERATE_DET: f64 = 1e-14;

pub(crate) fn is_degenerate(metric: &[f64], det: f64, n: usize) -> bool {
    let diag: f64 = (0..n).map(|i| metric[i * n + i]).product();
    !(det > 0.0 && diag.is_finite() && det > DEGENERATE_DET * diag)
}

/// A smooth map from a box in `R^n` into `R^{n+m}`.
pub trait Parametrization: Send + Sync {
    fn dim(&self) -> usize;
    fn ambient_dim(&self) -> usize;
    fn point(&self, u: &[f64], out: &mut [f64]);

    /// Analytic Jacobian; return `false` to fall back to finite differences.
    fn jacobian(&self, _u: &[f64], _out: &mut [f64]) -> bool {
        false
    }

    /// Analytic Hessian; return `false` to fall back to finite differences.
    fn hessian(&self, _u: &[f64], _out: &mut [f64]) -> bool {
        false
    }
}

/// What a face of the parameter box represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceKind {
    /// A genuine boundary piece of the submanifold.
    Boundary,
    /// Identified with the opposite face.
    Periodic,
    /// Collapses to a lower-dimensional set (pole, centre of polar coordinates).
    Collapsed,
    /// Artificial truncation of a non-compact surface; test functions vanish near it.
    Open,
}

/// Parametrized piece of a submanifold.
#[derive(Clone)]
pub struct Chart {
    name: String,
    domain: Vec<(f64, f64)>,
    map: Arc<dyn Parametrization>,
    faces: Vec<FaceKind>,
    minimal: bool,
    force_fd: bool,
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chart")
            .field("name", &self.name)
            .field("n", &self.dim())
            .field("ambient", &self.ambient_dim())
            .field("domain", &self.domain)
            .field("faces", &self.faces)
            .field("minimal", &self.minimal)
            .finish()
    }
}

impl Chart {
    /// `faces` lists `[axis0 low, axis0 high, axis1 low, …]`.
    pub fn new(
        name: impl Into<String>,
        domain: Vec<(f64, f64)>,
        map: Arc<dyn Parametrization>,
        faces: Vec<FaceKind>,
        minimal: bool,
    ) -> Result<Self> {
        let n = map.dim();
        if domain.len() != n || faces.len() != 2 * n {
            return Err(LabError::domain(format!(
                "chart of dimension {n} needs {n} domain intervals and {} faces",
                2 * n
            )));
        }
        if map.ambient_dim() < n {
            return Err(LabError::domain(
                "ambient dimension smaller than chart dimension",
            ));
        }
        for (axis, &(lo, hi)) in domain.iter().enumerate() {
            if !(lo < hi) {
                return Err(LabError::domain(format!("empty domain on axis {axis}")));
            }
            let periodic = (faces[2 * axis] == FaceKind::Periodic) as u8
                + (faces[2 * axis + 1] == FaceKind::Periodic) as u8;
            if periodic == 1 {
                return Err(LabError::domain(format!(
                    "axis {axis}: periodic faces must come in pairs"
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            domain,
            map,
            faces,
            minimal,
            force_fd: false,
        })
    }

    /// Same chart, but derivatives always taken by central differences.
    pub fn with_finite_differences(mut self) -> Self {
        self.force_fd = true;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn dim(&self) -> usize {
        self.map.dim()
    }
    pub fn ambient_dim(&self) -> usize {
        self.map.ambient_dim()
    }
    pub fn codim(&self) -> usize {
        self.ambient_dim() - self.dim()
    }
    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }
    pub fn faces(&self) -> &[FaceKind] {
        &self.faces
    }
    pub fn face(&self, axis: usize, high: bool) -> FaceKind {
        self.faces[2 * axis + high as usize]
    }
    pub fn is_minimal(&self) -> bool {
        self.minimal
    }

    /// True when no face is a genuine or truncated boundary.
    pub fn is_closed(&self) -> bool {
        self.faces
            .iter()
            .all(|f| matches!(f, FaceKind::Periodic | FaceKind::Collapsed))
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        u.len() == self.dim()
            && u.iter()
                .zip(&self.domain)
                .all(|(x, (lo, hi))| *x >= *lo && *x <= *hi)
    }

    pub fn point(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient_dim()];
        self.map.point(u, &mut out);
        out
    }

    pub fn jacobian(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim() * self.ambient_dim()];
        if self.force_fd || !self.map.jacobian(u, &mut out) {
            self.fd_jacobian(u, &mut out);
        }
        out
    }

    pub fn hessian(&self, u: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n * n * self.ambient_dim()];
        if self.force_fd || !self.map.hessian(u, &mut out) {
            self.fd_hessian(u, &mut out);
        }
        out
    }

    fn fd_jacobian(&self, u: &[f64], out: &mut [f64]) {
        let big_n = self.ambient_dim();
        let step = f64::EPSILON.cbrt();
        let mut up = u.to_vec();
        let mut plus = vec![0.0; big_n];
        let mut minus = vec![0.0; big_n];
        for i in 0..self.dim() {
            let h = step * (1.0 + u[i].abs());
            up[i] = u[i] + h;
            self.map.point(&up, &mut plus);
            up[i] = u[i] - h;
            self.map.point(&up, &mut minus);
            up[i] = u[i];
            for a in 0..big_n {
                out[i * big_n + a] = (plus[a] - minus[a]) / (2.0 * h);
            }
        }
    }

    fn fd_hessian(&self, u: &[f64], out: &mut [f64]) {
        let n = self.dim();
        let big_n = self.ambient_dim();
        let step = f64::EPSILON.powf(0.25);
        let mut centre = vec![0.0; big_n];
        self.map.point(u, &mut centre);
        let mut up = u.to_vec();
        let mut buf = [
            vec![0.0; big_n],
            vec![0.0; big_n],
            vec![0.0; big_n],
            vec![0.0; big_n],
        ];
        for i in 0..n {
            let hi = step * (1.0 + u[i].abs());
            for j in i..n {
                if i == j {
                    up[i] = u[i] + hi;
                    self.map.point(&up, &mut buf[0]);
                    up[i] = u[i] - hi;
                    self.map.point(&up, &mut buf[1]);
                    up[i] = u[i];
                    for a in 0..big_n {
                        out[(i * n + i) * big_n + a] =
                            (buf[0][a] - 2.0 * centre[a] + buf[1][a]) / (hi * hi);
                    }
                } else {
                    let hj = step * (1.0 + u[j].abs());
                    let corners = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
                    for (k, (si, sj)) in corners.iter().enumerate() {
                        up[i] = u[i] + si * hi;
                        up[j] = u[j] + sj * hj;
                        self.map.point(&up, &mut buf[k]);
                    }
                    up[i] = u[i];
                    up[j] = u[j];
                    for a in 0..big_n {
                        let v = (buf[0][a] - buf[1][a] - buf[2][a] + buf[3][a]) / (4.0 * hi * hj);
                        out[(i * n + j) * big_n + a] = v;
                        out[(j * n + i) * big_n + a] = v;
                    }
                }
            }
        }
    }
}

/// Pullback metric `g_ij = ⟨∂_iF, ∂_jF⟩` from a Jacobian.
pub(crate) fn metric_from_jacobian(jac: &[f64], n: usize, big_n: usize) -> Vec<f64> {
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = dot(
                &jac[i * big_n..(i + 1) * big_n],
                &jac[j * big_n..(j + 1) * big_n],
            );
            g[i * n + j] = v;
            g[j * n + i] = v;
        }
    }
    g
}

/// Everything the crate needs to know about the chart at one parameter value.
#[derive(Debug, Clone)]
pub struct LocalFrame {
    pub n: usize,
    pub ambient: usize,
    pub point: Vec<f64>,
    pub jacobian: Vec<f64>,
    pub metric: Vec<f64>,
    pub metric_inv: Vec<f64>,
    pub det: f64,
    /// `n × n × N`, normal-valued.
    pub second_fundamental: Vec<f64>,
    pub mean_curvature: Vec<f64>,
}

impl LocalFrame {
    pub fn at(chart: &Chart, u: &[f64]) -> Result<Self> {
        let n = chart.dim();
        let big_n = chart.ambient_dim();
        if u.len() != n {
            return Err(LabError::domain(format!("expected {n} chart coordinates")));
        }
        let point = chart.point(u);
        let jacobian = chart.jacobian(u);
        let metric = metric_from_jacobian(&jacobian, n, big_n);
        let (metric_inv, det) = match spd_inverse(&metric, n) {
            Some((inv, det)) if !is_degenerate(&metric, det, n) => (inv, det),
            _ => return Err(LabError::ImmersionFailure(u.to_vec())),
        };
        let hess = chart.hessian(u);
        let mut frame = LocalFrame {
            n,
            ambient: big_n,
            point,
            jacobian,
            metric,
            metric_inv,
            det,
            second_fundamental: vec![0.0; n * n * big_n],
            mean_curvature: vec![0.0; big_n],
        };
        for i in 0..n {
            for j in 0..n {
                let off = (i * n + j) * big_n;
                let normal = frame.project_normal(&hess[off..off + big_n]);
                frame.second_fundamental[off..off + big_n].copy_from_slice(&normal);
                let w = frame.metric_inv[i * n + j];
                for a in 0..big_n {
                    frame.mean_curvature[a] += w * normal[a];
                }
            }
        }
        Ok(frame)
    }

    pub fn sqrt_det(&self) -> f64 {
        self.det.sqrt()
    }

    fn tangent(&self, i: usize) -> &[f64] {
        &self.jacobian[i * self.ambient..(i + 1) * self.ambient]
    }

    /// Orthogonal projection onto `T_xΣ`.
    pub fn project_tangent(&self, v: &[f64]) -> Vec<f64> {
        project_tangent(&self.jacobian, &self.metric_inv, self.n, self.ambient, v)
    }

    /// Orthogonal projection onto the normal space.
    pub fn project_normal(&self, v: &[f64]) -> Vec<f64> {
        let t = self.project_tangent(v);
        v.iter().zip(&t).map(|(a, b)| a - b).collect()
    }

    /// `N × N` row-major tangent projector `J^T g^{-1} J`.
    pub fn tangent_projector(&self) -> Vec<f64> {
        let big_n = self.ambient;
        let mut p = vec![0.0; big_n * big_n];
        for e in 0..big_n {
            let mut basis = vec![0.0; big_n];
            basis[e] = 1.0;
            let col = self.project_tangent(&basis);
            for a in 0..big_n {
                p[a * big_n + e] = col[a];
            }
        }
        p
    }

    /// Orthonormal basis of the normal space, Gram–Schmidt seeded by the
    /// ambient coordinate axes in order.
    pub fn normal_frame(&self) -> Vec<Vec<f64>> {
        let big_n = self.ambient;
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(big_n);
        for i in 0..self.n {
            if let Some(v) = orthonormalize(self.tangent(i), &basis, 1e-12) {
                basis.push(v);
            }
        }
        let mut normals = Vec::with_capacity(big_n - self.n);
        for e in 0..big_n {
            if normals.len() == big_n - self.n {
                break;
            }
            let mut axis = vec![0.0; big_n];
            axis[e] = 1.0;
            if let Some(v) = orthonormalize(&axis, &basis, 1e-3) {
                basis.push(v.clone());
                normals.push(v);
            }
        }
        normals
    }

    /// `∇^Σ f = g^{ij} ∂_jf ∂_iF` from chart-coordinate partials.
    pub fn surface_gradient(&self, partials: &[f64]) -> Vec<f64> {
        surface_gradient(
            &self.jacobian,
            &self.metric_inv,
            self.n,
            self.ambient,
            partials,
        )
    }
}

/// Gram–Schmidt step with re-orthogonalization; `None` if the residual norm
/// falls below `threshold`.
fn orthonormalize(v: &[f64], basis: &[Vec<f64>], threshold: f64) -> Option<Vec<f64>> {
    let mut w = v.to_vec();
    for _ in 0..2 {
        for b in basis {
            let c = dot(&w, b);
            for (x, y) in w.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
    }
    let len = norm(&w);
    if len < threshold * norm(v).max(1.0) {
        return None;
    }
    w.iter_mut().for_each(|x| *x /= len);
    Some(w)
}

pub(crate) fn project_tangent(
    jac: &[f64],
    metric_inv: &[f64],
    n: usize,
    big_n: usize,
    v: &[f64],
) -> Vec<f64> {
    let mut coeffs = vec![0.0; n];
    for j in 0..n {
        coeffs[j] = dot(&jac[j * big_n..(j + 1) * big_n], v);
    }
    let mut out = vec![0.0; big_n];
    for i in 0..n {
        let ci: f64 = (0..n).map(|j| metric_inv[i * n + j] * coeffs[j]).sum();
        for a in 0..big_n {
            out[a] += ci * jac[i * big_n + a];
        }
    }
    out
}

pub(crate) fn surface_gradient(
    jac: &[f64],
    metric_inv: &[f64],
    n: usize,
    big_n: usize,
    partials: &[f64],
) -> Vec<f64> {
    let mut out = vec![0.0; big_n];
    for i in 0..n {
        let ci: f64 = (0..n).map(|j| metric_inv[i * n + j] * partials[j]).sum();
        for a in 0..big_n {
            out[a] += ci * jac[i * big_n + a];
        }
    }
    out
}

/// `|∇^Σ f|² = g^{ij} ∂_if ∂_jf`.
pub(crate) fn gradient_norm_sq(metric_inv: &[f64], n: usize, partials: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += metric_inv[i * n + j] * partials[i] * partials[j];
        }
    }
    s
}

/// Induced metric at `u`; fails if the map is not an immersion there.
pub fn induced_metric(chart: &Chart, u: &[f64]) -> Result<Vec<f64>> {
    let n = chart.dim();
    let g = metric_from_jacobian(&chart.jacobian(u), n, chart.ambient_dim());
    match spd_inverse(&g, n) {
        Some((_, det)) if !is_degenerate(&g, det, n) => Ok(g),
        _ => Err(LabError::ImmersionFailure(u.to_vec())),
    }
}

/// Second fundamental form `II_ij` at `u`, laid out `n × n × N`.
pub fn second_fundamental_form(chart: &Chart, u: &[f64]) -> Result<Vec<f64>> {
    LocalFrame::at(chart, u).map(|f| f.second_fundamental)
}

/// Mean curvature vector `H = g^{ij} II_ij` at `u`.
pub fn mean_curvature(chart: &Chart, u: &[f64]) -> Result<Vec<f64>> {
    LocalFrame::at(chart, u).map(|f| f.mean_curvature)
}

/// Surface gradient of a scalar field given its chart partials `∂_if(u)`.
pub fn surface_gradient_at(chart: &Chart, partials: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    if partials.len() != chart.dim() {
        return Err(LabError::domain(
            "gradient length must equal chart dimension",
        ));
    }
    LocalFrame::at(chart, u).map(|f| f.surface_gradient(partials))
}

/// Worst-case curvature and projector diagnostics over seeded interior points.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CurvatureSurvey {
    pub surface: String,
    pub points: usize,
    pub max_mean_curvature: f64,
    pub min_mean_curvature: f64,
    /// Largest entry of `P² − P` or `P − Pᵀ`.
    pub projector_error: f64,
    /// Largest `|P_T II_ij|` relative to `max(1, |II_ij|)`.
    pub normality_error: f64,
}

/// Evaluate `|H|`, the tangent projector and the normality of `II` at `points`
/// seeded chart points, kept 2% of the box width away from every face.
pub fn curvature_survey(chart: &Chart, points: usize, seed: u64) -> Result<CurvatureSurvey> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<Vec<f64>> = (0..points)
        .map(|_| {
            chart
                .domain()
                .iter()
                .map(|(lo, hi)| {
                    let pad = 0.02 * (hi - lo);
                    rng.gen_range(lo + pad..hi - pad)
                })
                .collect()
        })
        .collect();
    let (n, big_n) = (chart.dim(), chart.ambient_dim());
    let mut survey = CurvatureSurvey {
        surface: chart.name().to_string(),
        points,
        max_mean_curvature: 0.0,
        min_mean_curvature: f64::INFINITY,
        projector_error: 0.0,
        normality_error: 0.0,
    };
    for u in &samples {
        let frame = LocalFrame::at(chart, u)?;
        let h = norm(&frame.mean_curvature);
        survey.max_mean_curvature = survey.max_mean_curvature.max(h);
        survey.min_mean_curvature = survey.min_mean_curvature.min(h);
        let p = frame.tangent_projector();
        for a in 0..big_n {
            for b in 0..big_n {
                let sq: f64 = (0..big_n)
                    .map(|c| p[a * big_n + c] * p[c * big_n + b])
                    .sum();
                let err = (sq - p[a * big_n + b])
                    .abs()
                    .max((p[a * big_n + b] - p[b * big_n + a]).abs());
                survey.projector_error = survey.projector_error.max(err);
            }
        }
        for ij in 0..n * n {
            let v = &frame.second_fundamental[ij * big_n..(ij + 1) * big_n];
            let t = frame.project_tangent(v);
            survey.normality_error = survey.normality_error.max(norm(&t) / norm(v).max(1.0));
        }
    }
    Ok(survey)
}
