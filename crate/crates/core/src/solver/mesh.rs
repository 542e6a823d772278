use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{SolverError, SolverResult};
use crate::constants::RectangleSides;
use crate::model::GeometryMeasures;

/// Which part of ∂Ω a boundary facet belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryTag {
    Gamma,
    GammaN,
}

impl BoundaryTag {
    fn code(self) -> &'static str {
        match self {
            BoundaryTag::Gamma => "G",
            BoundaryTag::GammaN => "N",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    /// Two vertices in 2-D, one in 1-D.
    pub nodes: Vec<usize>,
    pub tag: BoundaryTag,
}

/// Conforming simplicial mesh: triangles (`dim = 2`) or segments
/// (`dim = 1`). Coordinates are stored as `[x, y]` with `y = 0` in 1-D.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub dim: u8,
    pub vertices: Vec<[f64; 2]>,
    pub elements: Vec<Vec<usize>>,
    pub boundary_facets: Vec<Facet>,
    /// Largest element diameter.
    pub h: f64,
}

/// One quadrature point: barycentric coordinates and weight (measure
/// included).
#[derive(Debug, Clone, Copy)]
pub(crate) struct QuadPoint {
    pub lambda: [f64; 3],
    pub weight: f64,
}

// degree-4 rule on the reference triangle (weights sum to 1)
const TRI_A: f64 = 0.445_948_490_915_965;
const TRI_B: f64 = 0.091_576_213_509_771;
const TRI_WA: f64 = 0.223_381_589_678_011;
const TRI_WB: f64 = 0.109_951_743_655_322;

fn tri_rule() -> [([f64; 3], f64); 6] {
    let (a, b) = (TRI_A, TRI_B);
    [
        ([a, a, 1.0 - 2.0 * a], TRI_WA),
        ([a, 1.0 - 2.0 * a, a], TRI_WA),
        ([1.0 - 2.0 * a, a, a], TRI_WA),
        ([b, b, 1.0 - 2.0 * b], TRI_WB),
        ([b, 1.0 - 2.0 * b, b], TRI_WB),
        ([1.0 - 2.0 * b, b, b], TRI_WB),
    ]
}

/// 3-point Gauss rule on [0,1]: (position, weight).
pub(crate) fn segment_rule() -> [(f64, f64); 3] {
    let r = (0.6f64).sqrt() / 2.0;
    [(0.5 - r, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + r, 5.0 / 18.0)]
}

/// Measure, constant basis gradients and quadrature of one element.
#[derive(Debug, Clone)]
pub(crate) struct ElementGeom {
    pub measure: f64,
    pub grads: [[f64; 2]; 3],
    pub points: Vec<QuadPoint>,
}

impl Mesh {
    pub fn n_nodes(&self) -> usize {
        self.vertices.len()
    }

    pub(crate) fn geom(&self, e: usize) -> ElementGeom {
        let nodes = &self.elements[e];
        if self.dim == 1 {
            let (x0, x1) = (self.vertices[nodes[0]][0], self.vertices[nodes[1]][0]);
            let len = (x1 - x0).abs();
            let g = 1.0 / (x1 - x0);
            let points = segment_rule()
                .iter()
                .map(|&(s, w)| QuadPoint {
                    lambda: [1.0 - s, s, 0.0],
                    weight: w * len,
                })
                .collect();
            return ElementGeom {
                measure: len,
                grads: [[-g, 0.0], [g, 0.0], [0.0, 0.0]],
                points,
            };
        }
        let [p0, p1, p2] = [nodes[0], nodes[1], nodes[2]].map(|i| self.vertices[i]);
        let (d1, d2) = ([p1[0] - p0[0], p1[1] - p0[1]], [p2[0] - p0[0], p2[1] - p0[1]]);
        let det = d1[0] * d2[1] - d1[1] * d2[0];
        let area = det.abs() / 2.0;
        // gradients of λ1, λ2 from the inverse Jacobian; λ0 = 1 - λ1 - λ2
        let g1 = [d2[1] / det, -d2[0] / det];
        let g2 = [-d1[1] / det, d1[0] / det];
        let g0 = [-g1[0] - g2[0], -g1[1] - g2[1]];
        let points = tri_rule()
            .iter()
            .map(|&(lambda, w)| QuadPoint {
                lambda,
                weight: w * area,
            })
            .collect();
        ElementGeom {
            measure: area,
            grads: [g0, g1, g2],
            points,
        }
    }

    /// Physical coordinates of a barycentric point in element `e`.
    pub(crate) fn point(&self, e: usize, lambda: &[f64; 3]) -> [f64; 2] {
        let mut x = [0.0; 2];
        for (k, &i) in self.elements[e].iter().enumerate() {
            x[0] += lambda[k] * self.vertices[i][0];
            x[1] += lambda[k] * self.vertices[i][1];
        }
        x
    }

    /// Quadrature on a boundary facet: (node weights, point, weight).
    pub(crate) fn facet_points(&self, f: &Facet) -> Vec<([f64; 2], [f64; 2], f64)> {
        if self.dim == 1 {
            return vec![([1.0, 0.0], self.vertices[f.nodes[0]], 1.0)];
        }
        let (a, b) = (self.vertices[f.nodes[0]], self.vertices[f.nodes[1]]);
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        segment_rule()
            .iter()
            .map(|&(s, w)| {
                let x = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
                ([1.0 - s, s], x, w * len)
            })
            .collect()
    }

    pub(crate) fn facet_measure(&self, f: &Facet) -> f64 {
        if self.dim == 1 {
            return 1.0;
        }
        let (a, b) = (self.vertices[f.nodes[0]], self.vertices[f.nodes[1]]);
        ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
    }

    pub fn volume(&self) -> f64 {
        (0..self.elements.len()).map(|e| self.geom(e).measure).sum()
    }

    pub fn boundary_measure(&self, tag: Option<BoundaryTag>) -> f64 {
        self.boundary_facets
            .iter()
            .filter(|f| tag.is_none_or(|t| f.tag == t))
            .map(|f| self.facet_measure(f))
            .sum()
    }

    /// Measures in the form the bounds consume (2-D only).
    pub fn measures(&self) -> GeometryMeasures {
        GeometryMeasures {
            n: self.dim as u32,
            vol_omega: self.volume(),
            surf_boundary: self.boundary_measure(None),
            surf_gamma: self.boundary_measure(Some(BoundaryTag::Gamma)),
            surf_gamma_n: self.boundary_measure(Some(BoundaryTag::GammaN)),
        }
    }

    /// Centroid of element `e`.
    pub fn centroid(&self, e: usize) -> [f64; 2] {
        let k = self.elements[e].len() as f64;
        self.point(e, &[1.0 / k, 1.0 / k, if k == 3.0 { 1.0 / 3.0 } else { 0.0 }])
    }

    /// Serializes to the `radbound-mesh 1` text format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "radbound-mesh 1");
        let _ = writeln!(s, "dim {}", self.dim);
        let _ = writeln!(s, "vertices {}", self.vertices.len());
        for v in &self.vertices {
            let _ = writeln!(s, "{:e} {:e}", v[0], v[1]);
        }
        let _ = writeln!(s, "elements {}", self.elements.len());
        for e in &self.elements {
            let line: Vec<String> = e.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        let _ = writeln!(s, "facets {}", self.boundary_facets.len());
        for f in &self.boundary_facets {
            let line: Vec<String> = f.nodes.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(s, "{} {}", f.tag.code(), line.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> SolverResult<Mesh> {
        let mut r = Reader::new(text);
        let (l, header) = r.next("header")?;
        if header != "radbound-mesh 1" {
            return Err(bad(l, "expected header `radbound-mesh 1`"));
        }
        let dim = r.counted("dim")?;
        if dim != 1 && dim != 2 {
            return Err(SolverError::Format(format!("dim {dim} unsupported")));
        }
        let nv = r.counted("vertices")?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (l, xs) = r.reals("vertex")?;
            if xs.len() != 2 {
                return Err(bad(l, "vertex needs two coordinates"));
            }
            vertices.push([xs[0], xs[1]]);
        }
        let parse_ids = |l: usize, toks: &[&str], want: usize| -> SolverResult<Vec<usize>> {
            let ids: Vec<usize> = toks
                .iter()
                .map(|t| t.parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad(l, "bad index"))?;
            if ids.len() != want || ids.iter().any(|&i| i >= nv) {
                return Err(bad(l, "wrong arity or index out of range"));
            }
            Ok(ids)
        };
        let ne = r.counted("elements")?;
        let mut elements = Vec::with_capacity(ne);
        for _ in 0..ne {
            let (l, line) = r.next("element")?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            elements.push(parse_ids(l, &toks, dim + 1)?);
        }
        let nf = r.counted("facets")?;
        let mut boundary_facets = Vec::with_capacity(nf);
        for _ in 0..nf {
            let (l, line) = r.next("facet")?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            let tag = match toks.first() {
                Some(&"G") => BoundaryTag::Gamma,
                Some(&"N") => BoundaryTag::GammaN,
                _ => return Err(bad(l, "facet tag must be G or N")),
            };
            boundary_facets.push(Facet {
                nodes: parse_ids(l, &toks[1..], dim)?,
                tag,
            });
        }
        Ok(Mesh::finish(dim as u8, vertices, elements, boundary_facets))
    }

    fn finish(
        dim: u8,
        vertices: Vec<[f64; 2]>,
        elements: Vec<Vec<usize>>,
        boundary_facets: Vec<Facet>,
    ) -> Mesh {
        let mut mesh = Mesh {
            dim,
            vertices,
            elements,
            boundary_facets,
            h: 0.0,
        };
        mesh.h = mesh.max_diameter();
        mesh
    }

    fn max_diameter(&self) -> f64 {
        self.elements
            .iter()
            .map(|e| {
                let mut d: f64 = 0.0;
                for (i, &a) in e.iter().enumerate() {
                    for &b in &e[i + 1..] {
                        let (p, q) = (self.vertices[a], self.vertices[b]);
                        d = d.max(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
                    }
                }
                d
            })
            .fold(0.0, f64::max)
    }
}

pub(crate) fn bad(line: usize, msg: &str) -> SolverError {
    SolverError::Format(format!("line {line}: {msg}"))
}

/// Line cursor over a text artifact; skips blank lines.
pub(crate) struct Reader<'t> {
    lines: Vec<(usize, &'t str)>,
    pos: usize,
}

impl<'t> Reader<'t> {
    pub fn new(text: &'t str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        Reader { lines, pos: 0 }
    }

    pub fn next(&mut self, what: &str) -> SolverResult<(usize, &'t str)> {
        let item = self.lines.get(self.pos).copied().ok_or_else(|| {
            SolverError::Format(format!("unexpected end of input, expected {what}"))
        })?;
        self.pos += 1;
        Ok(item)
    }

    /// Reads `key <count>`.
    pub fn counted(&mut self, key: &str) -> SolverResult<usize> {
        let (l, line) = self.next(key)?;
        line.strip_prefix(key)
            .and_then(|rest| rest.trim().parse::<usize>().ok())
            .ok_or_else(|| bad(l, &format!("expected `{key} <count>`")))
    }

    pub fn reals(&mut self, what: &str) -> SolverResult<(usize, Vec<f64>)> {
        let (l, line) = self.next(what)?;
        let xs = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| bad(l, &format!("bad {what}")))?;
        Ok((l, xs))
    }
}

/// Structured triangulation of `[0,w]×[0,h]` with `resolution` cells per
/// side, each cell cut along its rising diagonal.
pub fn build_rectangle_mesh(
    width: f64,
    height: f64,
    resolution: usize,
    gamma: RectangleSides,
) -> SolverResult<Mesh> {
    if resolution < 2 {
        return Err(SolverError::Mesh(format!("resolution {resolution} < 2")));
    }
    if !(width > 0.0 && height > 0.0) {
        return Err(SolverError::Mesh("width and height must be positive".into()));
    }
    if !gamma.any() {
        return Err(SolverError::Mesh("Γ must contain at least one edge".into()));
    }
    let m = resolution;
    let id = |i: usize, j: usize| j * (m + 1) + i;
    let mut vertices = Vec::with_capacity((m + 1) * (m + 1));
    for j in 0..=m {
        for i in 0..=m {
            // exact endpoints so measures come out exact
            let x = if i == m { width } else { width * i as f64 / m as f64 };
            let y = if j == m { height } else { height * j as f64 / m as f64 };
            vertices.push([x, y]);
        }
    }
    let mut elements = Vec::with_capacity(2 * m * m);
    for j in 0..m {
        for i in 0..m {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            elements.push(vec![a, b, c]);
            elements.push(vec![a, c, d]);
        }
    }
    let tag = |on: bool| if on { BoundaryTag::Gamma } else { BoundaryTag::GammaN };
    let mut boundary_facets = Vec::with_capacity(4 * m);
    for i in 0..m {
        boundary_facets.push(Facet { nodes: vec![id(i, 0), id(i + 1, 0)], tag: tag(gamma.bottom) });
        boundary_facets.push(Facet { nodes: vec![id(m, i), id(m, i + 1)], tag: tag(gamma.right) });
        boundary_facets.push(Facet { nodes: vec![id(i + 1, m), id(i, m)], tag: tag(gamma.top) });
        boundary_facets.push(Facet { nodes: vec![id(0, i + 1), id(0, i)], tag: tag(gamma.left) });
    }
    Ok(Mesh::finish(2, vertices, elements, boundary_facets))
}

/// Uniform mesh of `[0, length]`; each endpoint is tagged Γ or Γ_N.
pub fn build_interval_mesh(
    length: f64,
    resolution: usize,
    gamma_left: bool,
    gamma_right: bool,
) -> SolverResult<Mesh> {
    if resolution < 2 || !(length > 0.0) {
        return Err(SolverError::Mesh("need resolution ≥ 2 and length > 0".into()));
    }
    if !(gamma_left || gamma_right) {
        return Err(SolverError::Mesh("Γ must contain an endpoint".into()));
    }
    let vertices = (0..=resolution)
        .map(|i| [if i == resolution { length } else { length * i as f64 / resolution as f64 }, 0.0])
        .collect();
    let elements = (0..resolution).map(|i| vec![i, i + 1]).collect();
    let tag = |on: bool| if on { BoundaryTag::Gamma } else { BoundaryTag::GammaN };
    let boundary_facets = vec![
        Facet { nodes: vec![0], tag: tag(gamma_left) },
        Facet { nodes: vec![resolution], tag: tag(gamma_right) },
    ];
    Ok(Mesh::finish(1, vertices, elements, boundary_facets))
}
