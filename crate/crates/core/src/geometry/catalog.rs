//! Test submanifolds with analytic derivatives.

use std::f64::consts::PI;
use std::sync::Arc;

use super::{Chart, FaceKind, Parametrization};
use crate::error::{LabError, Result};

/// One-variable factor of a separable coordinate function.
#[derive(Debug, Clone, Copy)]
enum Factor {
    Const(f64),
    Linear(f64),
    Sin,
    Cos,
    Cosh,
    /// `r(s) = R (e^{a s} − 1)/(e^a − 1)`: radial coordinate with nodes packed near 0.
    Graded {
        radius: f64,
        rate: f64,
    },
}

impl Factor {
    fn eval(self, x: f64) -> (f64, f64, f64) {
        match self {
            Factor::Const(c) => (c, 0.0, 0.0),
            Factor::Linear(a) => (a * x, a, 0.0),
            Factor::Sin => (x.sin(), x.cos(), -x.sin()),
            Factor::Cos => (x.cos(), -x.sin(), -x.cos()),
            Factor::Cosh => (x.cosh(), x.sinh(), x.cosh()),
            Factor::Graded { radius, rate } => {
                if rate == 0.0 {
                    (radius * x, radius, 0.0)
                } else {
                    let scale = radius / rate.exp_m1();
                    let e = (rate * x).exp();
                    (
                        scale * (rate * x).exp_m1(),
                        scale * rate * e,
                        scale * rate * rate * e,
                    )
                }
            }
        }
    }
}

/// Map whose every coordinate is a product of one-variable factors.
struct SeparableMap {
    n: usize,
    /// `coords[a][i]` is the factor of coordinate `a` in variable `i`.
    coords: Vec<Vec<Factor>>,
}

impl SeparableMap {
    fn table(&self, u: &[f64]) -> Vec<Vec<(f64, f64, f64)>> {
        self.coords
            .iter()
            .map(|row| row.iter().zip(u).map(|(f, x)| f.eval(*x)).collect())
            .collect()
    }
}

impl Parametrization for SeparableMap {
    fn dim(&self) -> usize {
        self.n
    }
    fn ambient_dim(&self) -> usize {
        self.coords.len()
    }
    fn point(&self, u: &[f64], out: &mut [f64]) {
        for (a, row) in self.coords.iter().enumerate() {
            out[a] = row.iter().zip(u).map(|(f, x)| f.eval(*x).0).product();
        }
    }
    fn jacobian(&self, u: &[f64], out: &mut [f64]) -> bool {
        let big_n = self.coords.len();
        let t = self.table(u);
        for i in 0..self.n {
            for a in 0..big_n {
                let mut v = t[a][i].1;
                for l in (0..self.n).filter(|&l| l != i) {
                    v *= t[a][l].0;
                }
                out[i * big_n + a] = v;
            }
        }
        true
    }
    fn hessian(&self, u: &[f64], out: &mut [f64]) -> bool {
        let n = self.n;
        let big_n = self.coords.len();
        let t = self.table(u);
        for i in 0..n {
            for j in 0..n {
                for a in 0..big_n {
                    let mut v = if i == j {
                        t[a][i].2
                    } else {
                        t[a][i].1 * t[a][j].1
                    };
                    for l in (0..n).filter(|&l| l != i && l != j) {
                        v *= t[a][l].0;
                    }
                    out[(i * n + j) * big_n + a] = v;
                }
            }
        }
        true
    }
}

struct Enneper;

impl Parametrization for Enneper {
    fn dim(&self) -> usize {
        2
    }
    fn ambient_dim(&self) -> usize {
        3
    }
    fn point(&self, u: &[f64], out: &mut [f64]) {
        let (x, y) = (u[0], u[1]);
        out[0] = x - x * x * x / 3.0 + x * y * y;
        out[1] = y - y * y * y / 3.0 + y * x * x;
        out[2] = x * x - y * y;
    }
    fn jacobian(&self, u: &[f64], out: &mut [f64]) -> bool {
        let (x, y) = (u[0], u[1]);
        out.copy_from_slice(&[
            1.0 - x * x + y * y,
            2.0 * x * y,
            2.0 * x,
            2.0 * x * y,
            1.0 - y * y + x * x,
            -2.0 * y,
        ]);
        true
    }
    fn hessian(&self, u: &[f64], out: &mut [f64]) -> bool {
        let (x, y) = (u[0], u[1]);
        out.copy_from_slice(&[
            -2.0 * x,
            2.0 * y,
            2.0,
            2.0 * y,
            2.0 * x,
            0.0,
            2.0 * y,
            2.0 * x,
            0.0,
            2.0 * x,
            -2.0 * y,
            -2.0,
        ]);
        true
    }
}

/// Graph of `w = z²` in `C² = R⁴`.
struct HolomorphicGraph;

impl Parametrization for HolomorphicGraph {
    fn dim(&self) -> usize {
        2
    }
    fn ambient_dim(&self) -> usize {
        4
    }
    fn point(&self, u: &[f64], out: &mut [f64]) {
        let (x, y) = (u[0], u[1]);
        out.copy_from_slice(&[x, y, x * x - y * y, 2.0 * x * y]);
    }
    fn jacobian(&self, u: &[f64], out: &mut [f64]) -> bool {
        let (x, y) = (u[0], u[1]);
        out.copy_from_slice(&[1.0, 0.0, 2.0 * x, 2.0 * y, 0.0, 1.0, -2.0 * y, 2.0 * x]);
        true
    }
    fn hessian(&self, _u: &[f64], out: &mut [f64]) -> bool {
        out.copy_from_slice(&[
            0.0, 0.0, 2.0, 0.0, //
            0.0, 0.0, 0.0, 2.0, //
            0.0, 0.0, 0.0, 2.0, //
            0.0, 0.0, -2.0, 0.0,
        ]);
        true
    }
}

/// Factors of the unit vector on `S^{k}` in hyperspherical angles
/// `(θ_1, …, θ_k)`, each row padded with `Const(1)` for the `pad` leading variables.
fn hyperspherical_rows(k: usize, pad: usize) -> Vec<Vec<Factor>> {
    let mut rows = Vec::with_capacity(k + 1);
    for c in 0..=k {
        let mut row = vec![Factor::Const(1.0); pad + k];
        for i in 0..k {
            row[pad + i] = if i < c {
                Factor::Sin
            } else if i == c {
                Factor::Cos
            } else {
                Factor::Const(1.0)
            };
        }
        rows.push(row);
    }
    rows
}

fn angle_domain(k: usize) -> (Vec<(f64, f64)>, Vec<FaceKind>) {
    let mut domain = Vec::new();
    let mut faces = Vec::new();
    for i in 0..k {
        if i + 1 < k {
            domain.push((0.0, PI));
            faces.extend([FaceKind::Collapsed, FaceKind::Collapsed]);
        } else {
            domain.push((0.0, 2.0 * PI));
            faces.extend([FaceKind::Periodic, FaceKind::Periodic]);
        }
    }
    (domain, faces)
}

/// The catalog of named test submanifolds.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(tag = "surface", rename_all = "snake_case")]
pub enum Surface {
    /// Unit cube `[0,1]^n × {0}` in `R^{n+m}`.
    Flat { n: usize, m: usize },
    /// Ball of the given radius in polar/spherical coordinates, with an
    /// exponentially graded radial coordinate when `grading > 0`.
    FlatBall {
        n: usize,
        m: usize,
        radius: f64,
        grading: f64,
    },
    /// `(cosh s cos θ, cosh s sin θ, s)`, `s ∈ [−1,1]`.
    Catenoid,
    /// `(s cos θ, s sin θ, θ)`, `s ∈ [−1,1]`, `θ ∈ [−π,π]`.
    Helicoid,
    /// Enneper's surface on `[−1,1]²`.
    Enneper,
    /// `(x, y, x²−y², 2xy)` on `[−1,1]²`.
    HolomorphicGraphZ2,
    /// Unit sphere `S^n ⊂ R^{n+1}`.
    Sphere { n: usize },
}

impl Surface {
    pub fn disk() -> Self {
        Surface::FlatBall {
            n: 2,
            m: 1,
            radius: 1.0,
            grading: 0.0,
        }
    }

    pub fn from_name(name: &str, n: Option<usize>, m: Option<usize>) -> Result<Self> {
        let surface = match name {
            "flat" => Surface::Flat {
                n: n.unwrap_or(2),
                m: m.unwrap_or(1),
            },
            "flat_ball" => Surface::FlatBall {
                n: n.unwrap_or(3),
                m: m.unwrap_or(0),
                radius: 1.0,
                grading: 0.0,
            },
            "disk" => Surface::disk(),
            "catenoid" => Surface::Catenoid,
            "helicoid" => Surface::Helicoid,
            "enneper" => Surface::Enneper,
            "holomorphic_graph_z2" => Surface::HolomorphicGraphZ2,
            "sphere" => Surface::Sphere { n: n.unwrap_or(2) },
            other => return Err(LabError::UnknownSurface(other.to_string())),
        };
        Ok(surface)
    }

    pub fn name(&self) -> String {
        match self {
            Surface::Flat { n, m } => format!("flat({n},{m})"),
            Surface::FlatBall { n, m, .. } => format!("flat_ball({n},{m})"),
            Surface::Catenoid => "catenoid".into(),
            Surface::Helicoid => "helicoid".into(),
            Surface::Enneper => "enneper".into(),
            Surface::HolomorphicGraphZ2 => "holomorphic_graph_z2".into(),
            Surface::Sphere { n } => format!("sphere({n})"),
        }
    }

    pub fn is_minimal(&self) -> bool {
        !matches!(self, Surface::Sphere { .. })
    }

    pub fn dim(&self) -> usize {
        match *self {
            Surface::Flat { n, .. } | Surface::FlatBall { n, .. } | Surface::Sphere { n } => n,
            _ => 2,
        }
    }

    pub fn codim(&self) -> usize {
        match *self {
            Surface::Flat { m, .. } | Surface::FlatBall { m, .. } => m,
            Surface::HolomorphicGraphZ2 => 2,
            _ => 1,
        }
    }

    /// Members flagged minimal, one representative per family.
    pub fn minimal_members() -> Vec<Surface> {
        vec![
            Surface::Flat { n: 2, m: 1 },
            Surface::FlatBall {
                n: 3,
                m: 1,
                radius: 1.0,
                grading: 0.0,
            },
            Surface::Catenoid,
            Surface::Helicoid,
            Surface::Enneper,
            Surface::HolomorphicGraphZ2,
        ]
    }

    /// Every family, including the non-minimal spheres and the flat disk.
    pub fn all_members() -> Vec<Surface> {
        let mut all = Self::minimal_members();
        all.extend([
            Surface::disk(),
            Surface::Sphere { n: 2 },
            Surface::Sphere { n: 3 },
        ]);
        all
    }

    pub fn chart(&self) -> Result<Chart> {
        let name = self.name();
        let minimal = self.is_minimal();
        match *self {
            Surface::Flat { n, m } => {
                if n < 1 {
                    return Err(LabError::domain("flat chart needs n >= 1"));
                }
                let coords = (0..n + m)
                    .map(|a| {
                        (0..n)
                            .map(|i| match (a < n, a == i) {
                                (true, true) => Factor::Linear(1.0),
                                (true, false) => Factor::Const(1.0),
                                (false, _) => Factor::Const(0.0),
                            })
                            .collect()
                    })
                    .collect();
                Chart::new(
                    name,
                    vec![(0.0, 1.0); n],
                    Arc::new(SeparableMap { n, coords }),
                    vec![FaceKind::Boundary; 2 * n],
                    minimal,
                )
            }
            Surface::FlatBall {
                n,
                m,
                radius,
                grading,
            } => {
                if n < 2 || !(radius > 0.0) || grading < 0.0 {
                    return Err(LabError::domain(
                        "flat ball needs n >= 2, radius > 0, grading >= 0",
                    ));
                }
                let mut coords = hyperspherical_rows(n - 1, 1);
                for row in coords.iter_mut() {
                    row[0] = Factor::Graded {
                        radius,
                        rate: grading,
                    };
                }
                for _ in 0..m {
                    coords.push(vec![Factor::Const(0.0); n]);
                }
                let (angles, angle_faces) = angle_domain(n - 1);
                let mut domain = vec![(0.0, 1.0)];
                domain.extend(angles);
                let mut faces = vec![FaceKind::Collapsed, FaceKind::Boundary];
                faces.extend(angle_faces);
                Chart::new(
                    name,
                    domain,
                    Arc::new(SeparableMap { n, coords }),
                    faces,
                    minimal,
                )
            }
            Surface::Sphere { n } => {
                if n < 1 {
                    return Err(LabError::domain("sphere needs n >= 1"));
                }
                let coords = hyperspherical_rows(n, 0);
                let (domain, faces) = angle_domain(n);
                Chart::new(
                    name,
                    domain,
                    Arc::new(SeparableMap { n, coords }),
                    faces,
                    minimal,
                )
            }
            Surface::Catenoid => {
                use Factor::*;
                let coords = vec![
                    vec![Cosh, Cos],
                    vec![Cosh, Sin],
                    vec![Linear(1.0), Const(1.0)],
                ];
                Chart::new(
                    name,
                    vec![(-1.0, 1.0), (0.0, 2.0 * PI)],
                    Arc::new(SeparableMap { n: 2, coords }),
                    vec![
                        FaceKind::Boundary,
                        FaceKind::Boundary,
                        FaceKind::Periodic,
                        FaceKind::Periodic,
                    ],
                    minimal,
                )
            }
            Surface::Helicoid => {
                use Factor::*;
                let coords = vec![
                    vec![Linear(1.0), Cos],
                    vec![Linear(1.0), Sin],
                    vec![Const(1.0), Linear(1.0)],
                ];
                Chart::new(
                    name,
                    vec![(-1.0, 1.0), (-PI, PI)],
                    Arc::new(SeparableMap { n: 2, coords }),
                    vec![FaceKind::Boundary; 4],
                    minimal,
                )
            }
            Surface::Enneper => Chart::new(
                name,
                vec![(-1.0, 1.0); 2],
                Arc::new(Enneper),
                vec![FaceKind::Boundary; 4],
                minimal,
            ),
            Surface::HolomorphicGraphZ2 => Chart::new(
                name,
                vec![(-1.0, 1.0); 2],
                Arc::new(HolomorphicGraph),
                vec![FaceKind::Boundary; 4],
                minimal,
            ),
        }
    }
}

/// Chart for a catalog name; `n`/`m` are honoured where the family has them.
pub fn catalog(name: &str, n: Option<usize>, m: Option<usize>) -> Result<Chart> {
    Surface::from_name(name, n, m)?.chart()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_names() {
        let c = catalog("catenoid", None, None).unwrap();
        assert_eq!((c.dim(), c.codim()), (2, 1));
        assert!(c.is_minimal());
        let h = catalog("holomorphic_graph_z2", None, None).unwrap();
        assert_eq!((h.dim(), h.ambient_dim()), (2, 4));
        let s = catalog("sphere", Some(2), None).unwrap();
        assert_eq!((s.dim(), s.codim()), (2, 1));
        assert!(!s.is_minimal() && s.is_closed());
        assert!(matches!(
            catalog("torus", None, None),
            Err(LabError::UnknownSurface(_))
        ));
    }

    #[test]
    fn sphere_points_are_unit() {
        for n in 1..5 {
            let chart = Surface::Sphere { n }.chart().unwrap();
            let u: Vec<f64> = (0..n).map(|i| 0.3 + 0.4 * i as f64).collect();
            let p = chart.point(&u);
            let r: f64 = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((r - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn graded_ball_radius() {
        let chart = Surface::FlatBall {
            n: 3,
            m: 0,
            radius: 2.0,
            grading: 6.0,
        }
        .chart()
        .unwrap();
        let p = chart.point(&[1.0, 0.7, 0.2]);
        let r: f64 = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((r - 2.0).abs() < 1e-14);
        assert!(chart
            .point(&[0.0, 0.7, 0.2])
            .iter()
            .all(|x| x.abs() < 1e-300));
    }
}
