use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::mesh::{bad, BoundaryTag, Mesh, Reader};
use super::{SolverError, SolverResult};

/// Where a norm is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Omega,
    Gamma,
    GammaN,
    Boundary,
}

impl Region {
    fn takes(self, tag: BoundaryTag) -> bool {
        match self {
            Region::Omega => false,
            Region::Gamma => tag == BoundaryTag::Gamma,
            Region::GammaN => tag == BoundaryTag::GammaN,
            Region::Boundary => true,
        }
    }
}

/// A P1 field on a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteField {
    pub mesh: Arc<Mesh>,
    pub values: Vec<f64>,
}

/// Measures of `{|u| > k}` for one threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSetRecord {
    pub k: f64,
    pub omega: f64,
    pub gamma: f64,
    pub gamma_n: f64,
    pub boundary: f64,
    /// `|Ω(k)| + |∂Ω(k)|^{n/(n-1)}`
    pub sigma: f64,
}

/// `(∫ |v|^q)^{1/q}` from weighted samples, scaled by the largest sample so
/// large q does not overflow; `q = ∞` gives the max.
pub(crate) fn scaled_norm(samples: impl Iterator<Item = (f64, f64)> + Clone, q: f64) -> f64 {
    let peak = samples.clone().map(|(v, _)| v.abs()).fold(0.0, f64::max);
    if peak == 0.0 || q.is_infinite() {
        return peak;
    }
    let sum: f64 = samples.map(|(v, w)| w * (v.abs() / peak).powf(q)).sum();
    peak * sum.powf(1.0 / q)
}

/// Measure of `{v > k}` in a triangle with linear v (nodal values).
fn area_above(p: [[f64; 2]; 3], v: [f64; 3], k: f64) -> f64 {
    let mut poly: Vec<[f64; 2]> = Vec::with_capacity(4);
    for i in 0..3 {
        let j = (i + 1) % 3;
        let (a, b) = (v[i] - k, v[j] - k);
        if a > 0.0 {
            poly.push(p[i]);
        }
        if (a > 0.0) != (b > 0.0) {
            let t = a / (a - b);
            poly.push([p[i][0] + t * (p[j][0] - p[i][0]), p[i][1] + t * (p[j][1] - p[i][1])]);
        }
    }
    let mut twice = 0.0;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        twice += a[0] * b[1] - a[1] * b[0];
    }
    twice.abs() / 2.0
}

/// Fraction of a segment with `v > k` for linear v.
fn fraction_above(a: f64, b: f64, k: f64) -> f64 {
    let (a, b) = (a - k, b - k);
    match (a > 0.0, b > 0.0) {
        (true, true) => 1.0,
        (false, false) => 0.0,
        (true, false) => a / (a - b),
        (false, true) => b / (b - a),
    }
}

impl DiscreteField {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>) -> SolverResult<Self> {
        if values.len() != mesh.n_nodes() {
            return Err(SolverError::Config(format!(
                "{} values for {} nodes",
                values.len(),
                mesh.n_nodes()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::Config("field has non-finite values".into()));
        }
        Ok(DiscreteField { mesh, values })
    }

    pub fn zeros(mesh: Arc<Mesh>) -> Self {
        let n = mesh.n_nodes();
        DiscreteField { mesh, values: vec![0.0; n] }
    }

    /// Nodal interpolant of `u`.
    pub fn interpolate(mesh: Arc<Mesh>, u: impl Fn([f64; 2]) -> f64) -> Self {
        let values = mesh.vertices.iter().map(|&x| u(x)).collect();
        DiscreteField { mesh, values }
    }

    pub(crate) fn at(&self, e: usize, lambda: &[f64; 3]) -> f64 {
        self.mesh.elements[e]
            .iter()
            .enumerate()
            .map(|(k, &i)| lambda[k] * self.values[i])
            .sum()
    }

    pub fn gradient(&self, e: usize) -> [f64; 2] {
        let g = self.mesh.geom(e);
        let mut d = [0.0; 2];
        for (k, &i) in self.mesh.elements[e].iter().enumerate() {
            d[0] += self.values[i] * g.grads[k][0];
            d[1] += self.values[i] * g.grads[k][1];
        }
        d
    }

    fn omega_samples(&self) -> Vec<(f64, f64)> {
        (0..self.mesh.elements.len())
            .flat_map(|e| {
                self.mesh
                    .geom(e)
                    .points
                    .into_iter()
                    .map(move |qp| (self.at(e, &qp.lambda), qp.weight))
            })
            .collect()
    }

    /// `(‖u_h - u‖₂, ‖∇u_h - ∇u‖₂)` against an exact solution, by the
    /// element quadrature.
    pub fn error_against(
        &self,
        u: impl Fn([f64; 2]) -> f64,
        grad_u: impl Fn([f64; 2]) -> [f64; 2],
    ) -> (f64, f64) {
        let (mut l2, mut h1) = (0.0, 0.0);
        for e in 0..self.mesh.elements.len() {
            let g = self.gradient(e);
            for qp in self.mesh.geom(e).points {
                let x = self.mesh.point(e, &qp.lambda);
                let du = grad_u(x);
                l2 += qp.weight * (self.at(e, &qp.lambda) - u(x)).powi(2);
                h1 += qp.weight * ((g[0] - du[0]).powi(2) + (g[1] - du[1]).powi(2));
            }
        }
        (l2.sqrt(), h1.sqrt())
    }

    fn boundary_samples(&self, region: Region) -> Vec<(f64, f64)> {
        self.mesh
            .boundary_facets
            .iter()
            .filter(|f| region.takes(f.tag))
            .flat_map(|f| {
                self.mesh.facet_points(f).into_iter().map(move |(mu, _, w)| {
                    let v: f64 = f.nodes.iter().zip(mu).map(|(&i, m)| m * self.values[i]).sum();
                    (v, w)
                })
            })
            .collect()
    }

    fn region_nodes_max(&self, region: Region) -> f64 {
        match region {
            Region::Omega => self.values.iter().map(|v| v.abs()).fold(0.0, f64::max),
            _ => self
                .mesh
                .boundary_facets
                .iter()
                .filter(|f| region.takes(f.tag))
                .flat_map(|f| f.nodes.iter().map(|&i| self.values[i].abs()))
                .fold(0.0, f64::max),
        }
    }

    /// `‖u_h‖_{q,region}`; `q = ∞` is the nodal max, which is exact for P1.
    pub fn lebesgue_norm(&self, q: f64, region: Region) -> f64 {
        if q.is_infinite() {
            return self.region_nodes_max(region);
        }
        let samples = match region {
            Region::Omega => self.omega_samples(),
            _ => self.boundary_samples(region),
        };
        scaled_norm(samples.iter().copied(), q)
    }

    /// `‖∇u_h‖_q` over element-constant gradients.
    pub fn gradient_norm(&self, q: f64) -> f64 {
        let samples: Vec<(f64, f64)> = (0..self.mesh.elements.len())
            .map(|e| {
                let g = self.gradient(e);
                (g[0].hypot(g[1]), self.mesh.geom(e).measure)
            })
            .collect();
        scaled_norm(samples.iter().copied(), q)
    }

    /// Exact measures of `{|u_h| > k}` for each threshold.
    pub fn level_set_measures(&self, thresholds: &[f64]) -> Vec<LevelSetRecord> {
        let mesh = &self.mesh;
        let nf = mesh.dim as f64;
        thresholds
            .iter()
            .map(|&k| {
                let mut omega = 0.0;
                for (e, nodes) in mesh.elements.iter().enumerate() {
                    if mesh.dim == 1 {
                        let (a, b) = (self.values[nodes[0]], self.values[nodes[1]]);
                        let len = mesh.geom(e).measure;
                        omega += len * (fraction_above(a, b, k) + fraction_above(-a, -b, k));
                    } else {
                        let p = [nodes[0], nodes[1], nodes[2]].map(|i| mesh.vertices[i]);
                        let v = [nodes[0], nodes[1], nodes[2]].map(|i| self.values[i]);
                        omega += area_above(p, v, k) + area_above(p, v.map(|x| -x), k);
                    }
                }
                let (mut gamma, mut gamma_n) = (0.0, 0.0);
                for f in &mesh.boundary_facets {
                    let part = if mesh.dim == 1 {
                        (self.values[f.nodes[0]].abs() > k) as u8 as f64
                    } else {
                        let (a, b) = (self.values[f.nodes[0]], self.values[f.nodes[1]]);
                        mesh.facet_measure(f) * (fraction_above(a, b, k) + fraction_above(-a, -b, k))
                    };
                    match f.tag {
                        BoundaryTag::Gamma => gamma += part,
                        BoundaryTag::GammaN => gamma_n += part,
                    }
                }
                let boundary = gamma + gamma_n;
                let sigma = if mesh.dim > 1 {
                    omega + boundary.powf(nf / (nf - 1.0))
                } else {
                    f64::NAN
                };
                LevelSetRecord { k, omega, gamma, gamma_n, boundary, sigma }
            })
            .collect()
    }

    /// Nodal `T_k`: `min{|u|, k}`, or `sign(u)·min{|u|, k}` when `signed`.
    pub fn truncate(&self, k: f64, signed: bool) -> DiscreteField {
        let values = self
            .values
            .iter()
            .map(|&u| {
                let t = u.abs().min(k);
                if signed {
                    t.copysign(u)
                } else {
                    t
                }
            })
            .collect();
        DiscreteField { mesh: self.mesh.clone(), values }
    }

    pub fn max_abs(&self) -> f64 {
        self.region_nodes_max(Region::Omega)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Serializes nodal values to the `radbound-field 1` format; the mesh
    /// is written separately.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "radbound-field 1");
        let _ = writeln!(s, "values {}", self.values.len());
        for v in &self.values {
            let _ = writeln!(s, "{v:e}");
        }
        s
    }

    pub fn from_text(mesh: Arc<Mesh>, text: &str) -> SolverResult<Self> {
        let mut r = Reader::new(text);
        let (l, header) = r.next("header")?;
        if header != "radbound-field 1" {
            return Err(bad(l, "expected header `radbound-field 1`"));
        }
        let n = r.counted("values")?;
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            let (l, xs) = r.reals("value")?;
            match xs.as_slice() {
                [v] => values.push(*v),
                _ => return Err(bad(l, "one value per line")),
            }
        }
        DiscreteField::new(mesh, values)
    }
}
