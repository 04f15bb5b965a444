//! Chart plus two nested midpoint grids with per-node geometry cached.
//!
//! Every integral is evaluated on the coarse grid (the requested counts) and
//! on the fine grid (twice the counts per axis). The midpoint rule is second
//! order, so `(4 I_fine − I_coarse)/3` is reported with `|I_fine − I_coarse|/3`
//! as its error estimate.

use rayon::prelude::*;
use serde::Serialize;

use super::linalg::{dot, spd_inverse};
use super::{is_degenerate, metric_from_jacobian, Chart, FaceKind, LocalFrame};
use crate::error::{LabError, Result};

const CHUNK: usize = 4096;

/// Which of the two grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Coarse,
    Fine,
}

/// Struct-of-arrays cache for one grid.
#[derive(Debug, Clone)]
struct Nodes {
    n: usize,
    ambient: usize,
    codim: usize,
    len: usize,
    u: Vec<f64>,
    weight: Vec<f64>,
    point: Vec<f64>,
    jacobian: Vec<f64>,
    metric_inv: Vec<f64>,
    sqrt_det: Vec<f64>,
    mean_curvature: Vec<f64>,
    normals: Vec<f64>,
}

/// Read-only view of one cached node.
#[derive(Debug, Clone, Copy)]
pub struct NodeView<'a> {
    pub index: usize,
    pub n: usize,
    pub ambient: usize,
    /// Chart coordinates.
    pub u: &'a [f64],
    /// Quadrature weight including the volume element.
    pub weight: f64,
    pub point: &'a [f64],
    pub jacobian: &'a [f64],
    pub metric_inv: &'a [f64],
    pub sqrt_det: f64,
    pub mean_curvature: &'a [f64],
    /// `codim × N`, one orthonormal normal per row.
    pub normals: &'a [f64],
}

impl NodeView<'_> {
    pub fn surface_gradient(&self, partials: &[f64]) -> Vec<f64> {
        super::surface_gradient(
            self.jacobian,
            self.metric_inv,
            self.n,
            self.ambient,
            partials,
        )
    }

    pub fn gradient_norm_sq(&self, partials: &[f64]) -> f64 {
        super::gradient_norm_sq(self.metric_inv, self.n, partials)
    }

    pub fn project_tangent(&self, v: &[f64]) -> Vec<f64> {
        super::project_tangent(self.jacobian, self.metric_inv, self.n, self.ambient, v)
    }

    pub fn mean_curvature_norm(&self) -> f64 {
        dot(self.mean_curvature, self.mean_curvature).sqrt()
    }
}

impl Nodes {
    fn view(&self, i: usize) -> NodeView<'_> {
        let (n, big_n, k) = (self.n, self.ambient, self.codim);
        NodeView {
            index: i,
            n,
            ambient: big_n,
            u: &self.u[i * n..(i + 1) * n],
            weight: self.weight[i],
            point: &self.point[i * big_n..(i + 1) * big_n],
            jacobian: &self.jacobian[i * n * big_n..(i + 1) * n * big_n],
            metric_inv: &self.metric_inv[i * n * n..(i + 1) * n * n],
            sqrt_det: self.sqrt_det[i],
            mean_curvature: &self.mean_curvature[i * big_n..(i + 1) * big_n],
            normals: &self.normals[i * k * big_n..(i + 1) * k * big_n],
        }
    }

    fn sum<F>(&self, f: &F, out: &mut [f64])
    where
        F: Fn(&NodeView, &mut [f64]) + Sync,
    {
        let k = out.len();
        let partials: Vec<Vec<f64>> = (0..self.len)
            .collect::<Vec<_>>()
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut acc = vec![0.0; k];
                let mut vals = vec![0.0; k];
                for &i in chunk {
                    let view = self.view(i);
                    vals.iter_mut().for_each(|v| *v = 0.0);
                    f(&view, &mut vals);
                    for (a, v) in acc.iter_mut().zip(&vals) {
                        *a += view.weight * v;
                    }
                }
                acc
            })
            .collect();
        out.iter_mut().for_each(|v| *v = 0.0);
        for p in partials {
            for (o, v) in out.iter_mut().zip(p) {
                *o += v;
            }
        }
    }
}

/// Mixed-radix enumeration of the cells of a tensor grid; the last axis varies fastest.
fn cell_index(mut flat: usize, counts: &[usize], out: &mut [usize]) {
    for axis in (0..counts.len()).rev() {
        out[axis] = flat % counts[axis];
        flat /= counts[axis];
    }
}

fn build_nodes(chart: &Chart, counts: &[usize]) -> Result<Nodes> {
    let n = chart.dim();
    let big_n = chart.ambient_dim();
    let codim = chart.codim();
    let domain = chart.domain();
    let len: usize = counts.iter().product();
    let widths: Vec<f64> = domain
        .iter()
        .zip(counts)
        .map(|((lo, hi), c)| (hi - lo) / *c as f64)
        .collect();
    let cell_volume: f64 = widths.iter().product();

    let per_node: Vec<Result<(Vec<f64>, LocalFrame, Vec<Vec<f64>>)>> = (0..len)
        .into_par_iter()
        .map(|flat| {
            let mut idx = vec![0; n];
            cell_index(flat, counts, &mut idx);
            let u: Vec<f64> = (0..n)
                .map(|a| domain[a].0 + (idx[a] as f64 + 0.5) * widths[a])
                .collect();
            let frame = frame_or_singular(chart, &u)?;
            let normals = frame.normal_frame();
            Ok((u, frame, normals))
        })
        .collect();

    let mut nodes = Nodes {
        n,
        ambient: big_n,
        codim,
        len,
        u: Vec::with_capacity(len * n),
        weight: Vec::with_capacity(len),
        point: Vec::with_capacity(len * big_n),
        jacobian: Vec::with_capacity(len * n * big_n),
        metric_inv: Vec::with_capacity(len * n * n),
        sqrt_det: Vec::with_capacity(len),
        mean_curvature: Vec::with_capacity(len * big_n),
        normals: Vec::with_capacity(len * codim * big_n),
    };
    for item in per_node {
        let (u, frame, normals) = item?;
        let sd = frame.sqrt_det();
        nodes.u.extend_from_slice(&u);
        nodes.weight.push(cell_volume * sd);
        nodes.point.extend_from_slice(&frame.point);
        nodes.jacobian.extend_from_slice(&frame.jacobian);
        nodes.metric_inv.extend_from_slice(&frame.metric_inv);
        nodes.sqrt_det.push(sd);
        nodes
            .mean_curvature
            .extend_from_slice(&frame.mean_curvature);
        for v in &normals {
            nodes.normals.extend_from_slice(v);
        }
    }
    Ok(nodes)
}

fn frame_or_singular(chart: &Chart, u: &[f64]) -> Result<LocalFrame> {
    LocalFrame::at(chart, u).map_err(|e| match e {
        LabError::ImmersionFailure(node) => {
            let g = metric_from_jacobian(&chart.jacobian(&node), chart.dim(), chart.ambient_dim());
            let det = spd_inverse(&g, chart.dim()).map_or(0.0, |(_, d)| d);
            LabError::SingularMetric { node, det }
        }
        other => other,
    })
}

/// Boundary nodes of one grid: one entry per declared boundary face.
#[derive(Debug, Clone)]
struct BoundaryNodes {
    nodes: Nodes,
}

fn build_boundary(chart: &Chart, counts: &[usize]) -> Result<Option<BoundaryNodes>> {
    let n = chart.dim();
    let big_n = chart.ambient_dim();
    let domain = chart.domain();
    let mut nodes = Nodes {
        n,
        ambient: big_n,
        codim: chart.codim(),
        len: 0,
        u: Vec::new(),
        weight: Vec::new(),
        point: Vec::new(),
        jacobian: Vec::new(),
        metric_inv: Vec::new(),
        sqrt_det: Vec::new(),
        mean_curvature: Vec::new(),
        normals: Vec::new(),
    };
    let mut any = false;
    for axis in 0..n {
        for high in [false, true] {
            if chart.face(axis, high) != FaceKind::Boundary {
                continue;
            }
            any = true;
            let others: Vec<usize> = (0..n).filter(|&a| a != axis).collect();
            let face_counts: Vec<usize> = others.iter().map(|&a| counts[a]).collect();
            let widths: Vec<f64> = others
                .iter()
                .map(|&a| (domain[a].1 - domain[a].0) / counts[a] as f64)
                .collect();
            let cell: f64 = widths.iter().product();
            let len: usize = face_counts.iter().product();
            let fixed = if high { domain[axis].1 } else { domain[axis].0 };
            let mut idx = vec![0; n.saturating_sub(1)];
            for flat in 0..len {
                cell_index(flat, &face_counts, &mut idx);
                let mut u = vec![0.0; n];
                u[axis] = fixed;
                for (k, &a) in others.iter().enumerate() {
                    u[a] = domain[a].0 + (idx[k] as f64 + 0.5) * widths[k];
                }
                let frame = frame_or_singular(chart, &u)?;
                // (n−1)-volume element from the metric restricted to the face.
                let mut h = vec![0.0; others.len() * others.len()];
                for (i, &a) in others.iter().enumerate() {
                    for (j, &b) in others.iter().enumerate() {
                        h[i * others.len() + j] = frame.metric[a * n + b];
                    }
                }
                let face_det = if others.is_empty() {
                    1.0
                } else {
                    match spd_inverse(&h, others.len()) {
                        Some((_, d)) if !is_degenerate(&h, d, others.len()) => d,
                        _ => return Err(LabError::SingularMetric { node: u, det: 0.0 }),
                    }
                };
                let normals = frame.normal_frame();
                nodes.u.extend_from_slice(&u);
                nodes.weight.push(cell * face_det.sqrt());
                nodes.point.extend_from_slice(&frame.point);
                nodes.jacobian.extend_from_slice(&frame.jacobian);
                nodes.metric_inv.extend_from_slice(&frame.metric_inv);
                nodes.sqrt_det.push(frame.sqrt_det());
                nodes
                    .mean_curvature
                    .extend_from_slice(&frame.mean_curvature);
                for v in &normals {
                    nodes.normals.extend_from_slice(v);
                }
                nodes.len += 1;
            }
        }
    }
    Ok(any.then_some(BoundaryNodes { nodes }))
}

/// Integral evaluated on both grids.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Integral {
    /// Richardson-extrapolated value.
    pub value: f64,
    pub coarse: f64,
    pub fine: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

impl Integral {
    fn from_levels(coarse: f64, fine: f64, evaluations: usize) -> Self {
        Integral {
            value: (4.0 * fine - coarse) / 3.0,
            coarse,
            fine,
            abs_error_estimate: (fine - coarse).abs() / 3.0,
            evaluations,
        }
    }
}

/// A chart with its quadrature grids; immutable once built.
#[derive(Debug, Clone)]
pub struct Patch {
    chart: Chart,
    grid: Vec<usize>,
    coarse: Nodes,
    fine: Nodes,
    boundary: Option<(BoundaryNodes, BoundaryNodes)>,
}

impl Patch {
    /// `grid` gives the coarse node count per axis; the fine grid doubles each.
    pub fn new(chart: Chart, grid: &[usize]) -> Result<Self> {
        if grid.len() != chart.dim() || grid.iter().any(|&c| c == 0) {
            return Err(LabError::domain(format!(
                "grid needs {} positive counts",
                chart.dim()
            )));
        }
        let fine_grid: Vec<usize> = grid.iter().map(|c| 2 * c).collect();
        let coarse = build_nodes(&chart, grid)?;
        let fine = build_nodes(&chart, &fine_grid)?;
        let boundary = match (
            build_boundary(&chart, grid)?,
            build_boundary(&chart, &fine_grid)?,
        ) {
            (Some(c), Some(f)) => Some((c, f)),
            _ => None,
        };
        Ok(Patch {
            chart,
            grid: grid.to_vec(),
            coarse,
            fine,
            boundary,
        })
    }

    /// Same counts on every axis.
    pub fn uniform(chart: Chart, count: usize) -> Result<Self> {
        let grid = vec![count; chart.dim()];
        Self::new(chart, &grid)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }
    pub fn grid(&self) -> &[usize] {
        &self.grid
    }
    pub fn dim(&self) -> usize {
        self.chart.dim()
    }
    pub fn codim(&self) -> usize {
        self.chart.codim()
    }

    fn level(&self, level: Level) -> &Nodes {
        match level {
            Level::Coarse => &self.coarse,
            Level::Fine => &self.fine,
        }
    }

    pub fn node_count(&self, level: Level) -> usize {
        self.level(level).len
    }

    pub fn node(&self, level: Level, i: usize) -> NodeView<'_> {
        self.level(level).view(i)
    }

    pub fn nodes(&self, level: Level) -> impl Iterator<Item = NodeView<'_>> {
        let nodes = self.level(level);
        (0..nodes.len).map(move |i| nodes.view(i))
    }

    /// Integrate `k` scalar fields at once against `dvol_Σ`; `f` writes its
    /// `k` values into the provided slice.
    pub fn integrate_many<F>(&self, k: usize, f: F) -> Vec<Integral>
    where
        F: Fn(&NodeView, &mut [f64]) + Sync,
    {
        let mut c = vec![0.0; k];
        let mut fi = vec![0.0; k];
        self.coarse.sum(&f, &mut c);
        self.fine.sum(&f, &mut fi);
        let evals = self.coarse.len + self.fine.len;
        c.iter()
            .zip(&fi)
            .map(|(a, b)| Integral::from_levels(*a, *b, evals))
            .collect()
    }

    pub fn integrate<F>(&self, f: F) -> Integral
    where
        F: Fn(&NodeView) -> f64 + Sync,
    {
        self.integrate_many(1, |v, out| out[0] = f(v))[0]
    }

    /// Integral over the declared boundary faces against the induced `(n−1)`-volume.
    pub fn integrate_boundary<F>(&self, f: F) -> Result<Integral>
    where
        F: Fn(&NodeView) -> f64 + Sync,
    {
        let (c, fi) = self.boundary.as_ref().ok_or_else(|| {
            LabError::NoBoundary(if self.chart.is_closed() {
                format!("{} is closed", self.chart.name())
            } else {
                format!("{} declares only open faces", self.chart.name())
            })
        })?;
        let g = |v: &NodeView, out: &mut [f64]| out[0] = f(v);
        let mut a = [0.0];
        let mut b = [0.0];
        c.nodes.sum(&g, &mut a);
        fi.nodes.sum(&g, &mut b);
        Ok(Integral::from_levels(
            a[0],
            b[0],
            c.nodes.len + fi.nodes.len,
        ))
    }

    pub fn has_boundary(&self) -> bool {
        self.boundary.is_some()
    }

    /// Largest `|H|` over the fine grid.
    pub fn max_mean_curvature(&self) -> f64 {
        self.nodes(Level::Fine)
            .map(|v| v.mean_curvature_norm())
            .fold(0.0, f64::max)
    }

    /// Smallest ambient distance from `x` to a fine-grid boundary or open-face node.
    /// Returns `None` when the chart has no such faces.
    pub fn distance_to_edge(&self, x: &[f64]) -> Option<f64> {
        let chart = &self.chart;
        let n = chart.dim();
        let domain = chart.domain();
        let mut best: Option<f64> = None;
        for axis in 0..n {
            for high in [false, true] {
                if !matches!(chart.face(axis, high), FaceKind::Boundary | FaceKind::Open) {
                    continue;
                }
                let fixed = if high { domain[axis].1 } else { domain[axis].0 };
                for v in self.nodes(Level::Coarse) {
                    let mut u = v.u.to_vec();
                    u[axis] = fixed;
                    let p = chart.point(&u);
                    let d = p
                        .iter()
                        .zip(x)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    best = Some(best.map_or(d, |b: f64| b.min(d)));
                }
            }
        }
        best
    }
}
