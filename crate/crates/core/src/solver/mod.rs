//! P1 finite elements for the nonlinear radiation problem on rectangles
//! (and intervals for smoke tests), plus the norms and level-set measures
//! the estimates are stated in.

mod band;
mod data;
mod field;
mod mesh;

use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

pub use band::{BandMatrix, Cholesky};
pub use data::{smooth_truncation, BoundaryLaw, CoefficientField, CoefficientSpec, FieldExpr, SourceData};
pub use field::{DiscreteField, LevelSetRecord, Region};
pub use mesh::{build_interval_mesh, build_rectangle_mesh, BoundaryTag, Facet, Mesh};

use crate::model::DataFn;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("mesh error: {0}")]
    Mesh(String),
    #[error("solver configuration error: {0}")]
    Config(String),
    #[error("assembly error: {0}")]
    Assembly(String),
    #[error("Newton did not converge in {iterations} iterations; residual history {history:?}")]
    NonConvergence { iterations: usize, history: Vec<f64> },
    #[error("format error: {0}")]
    Format(String),
}

pub type SolverResult<T> = std::result::Result<T, SolverError>;

pub const NEWTON_MAX_ITER: usize = 100;

/// Everything a solve needs.
#[derive(Debug, Clone)]
pub struct Problem {
    pub mesh: Arc<Mesh>,
    pub coeff: CoefficientField,
    pub data: SourceData,
    pub law: BoundaryLaw,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub field: DiscreteField,
    pub iterations: usize,
    /// Dual-norm residual after each Newton step (first entry: initial
    /// guess).
    pub residual_history: Vec<f64>,
}

struct Local {
    nodes: Vec<usize>,
    stiff: [[f64; 3]; 3],
    gram: [[f64; 3]; 3],
    load: [f64; 3],
}

/// Linear parts of the discrete system.
struct System {
    stiffness: BandMatrix,
    gram: Cholesky,
    load: Vec<f64>,
    gamma_facets: Vec<usize>,
}

fn bandwidth(mesh: &Mesh) -> usize {
    mesh.elements
        .iter()
        .map(|e| {
            let lo = e.iter().min().copied().unwrap_or(0);
            let hi = e.iter().max().copied().unwrap_or(0);
            hi - lo
        })
        .max()
        .unwrap_or(0)
}

fn local_element(p: &Problem, e: usize) -> Local {
    let mesh = &p.mesh;
    let geom = mesh.geom(e);
    let nodes = mesh.elements[e].clone();
    let k = nodes.len();
    let a = p.coeff.matrices[e];
    let mut stiff = [[0.0; 3]; 3];
    let mut gram = [[0.0; 3]; 3];
    let mut load = [0.0; 3];
    for i in 0..k {
        let gi = geom.grads[i];
        let agi = if mesh.dim == 1 {
            [a[0][0] * gi[0], 0.0]
        } else {
            [a[0][0] * gi[0] + a[0][1] * gi[1], a[1][0] * gi[0] + a[1][1] * gi[1]]
        };
        for j in 0..k {
            let gj = geom.grads[j];
            stiff[i][j] = geom.measure * (agi[0] * gj[0] + agi[1] * gj[1]);
            gram[i][j] = geom.measure * (gi[0] * gj[0] + gi[1] * gj[1]);
        }
    }
    for qp in &geom.points {
        let x = mesh.point(e, &qp.lambda);
        let f = p.data.f_at(x);
        let fv = p.data.fvec_at(x);
        for i in 0..k {
            let gi = geom.grads[i];
            load[i] += qp.weight * (f * qp.lambda[i] + fv[0] * gi[0] + fv[1] * gi[1]);
            for j in 0..k {
                gram[i][j] += qp.weight * qp.lambda[i] * qp.lambda[j];
            }
        }
    }
    Local { nodes, stiff, gram, load }
}

fn assemble(p: &Problem) -> SolverResult<System> {
    let mesh = &p.mesh;
    let n = mesh.n_nodes();
    let bw = bandwidth(mesh);
    // element work in parallel, scatter in element order so sums are
    // reproducible bit for bit
    let locals: Vec<Local> = (0..mesh.elements.len())
        .into_par_iter()
        .map(|e| local_element(p, e))
        .collect();
    let mut stiffness = BandMatrix::zeros(n, bw);
    let mut gram = BandMatrix::zeros(n, bw);
    let mut load = vec![0.0; n];
    for l in &locals {
        for (i, &a) in l.nodes.iter().enumerate() {
            load[a] += l.load[i];
            for (j, &b) in l.nodes.iter().enumerate() {
                if b <= a {
                    stiffness.add(a, b, l.stiff[i][j]);
                    gram.add(a, b, l.gram[i][j]);
                }
            }
        }
    }
    let mut gamma_facets = Vec::new();
    for (fi, f) in mesh.boundary_facets.iter().enumerate() {
        for (mu, x, w) in mesh.facet_points(f) {
            let v = match f.tag {
                BoundaryTag::Gamma => p.data.h_at(x),
                BoundaryTag::GammaN => p.data.g_at(x),
            };
            for (i, &a) in f.nodes.iter().enumerate() {
                load[a] += w * v * mu[i];
            }
        }
        if f.tag == BoundaryTag::Gamma {
            gamma_facets.push(fi);
        }
    }
    Ok(System {
        stiffness,
        gram: gram.cholesky()?,
        load,
        gamma_facets,
    })
}

impl System {
    /// `∫_Γ b(u_h) φ_i`, and optionally the Jacobian block
    /// `∫_Γ max{b'(u_h), floor} φ_i φ_j` added into `jac`.
    fn boundary_term(
        &self,
        p: &Problem,
        u: &[f64],
        mut jac: Option<(&mut BandMatrix, f64)>,
    ) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        for &fi in &self.gamma_facets {
            let f = &p.mesh.boundary_facets[fi];
            for (mu, _, w) in p.mesh.facet_points(f) {
                let uq: f64 = f.nodes.iter().zip(mu).map(|(&i, m)| m * u[i]).sum();
                let bv = p.law.value(uq);
                for (i, &a) in f.nodes.iter().enumerate() {
                    out[a] += w * bv * mu[i];
                }
                if let Some((jm, floor)) = jac.as_mut() {
                    let d = p.law.derivative(uq).max(*floor);
                    for (i, &a) in f.nodes.iter().enumerate() {
                        for (j, &b) in f.nodes.iter().enumerate() {
                            if b <= a {
                                jm.add(a, b, w * d * mu[i] * mu[j]);
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn residual(&self, p: &Problem, u: &[f64]) -> Vec<f64> {
        let ku = self.stiffness.mul_vec(u);
        let bu = self.boundary_term(p, u, None);
        ku.iter()
            .zip(&bu)
            .zip(&self.load)
            .map(|((k, b), l)| k + b - l)
            .collect()
    }

    /// `sup_v r(v)/‖v‖_{H¹}` over the FE space.
    fn dual_norm(&self, r: &[f64]) -> f64 {
        let z = self.gram.solve(r);
        z.iter().zip(r).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt()
    }

    fn jacobian(&self, p: &Problem, u: &[f64], floor: f64) -> BandMatrix {
        let mut j = self.stiffness.clone();
        self.boundary_term(p, u, Some((&mut j, floor)));
        j
    }
}

fn check(p: &Problem, tol: f64) -> SolverResult<()> {
    if !(tol > 0.0) {
        return Err(SolverError::Config(format!("tol = {tol} must be positive")));
    }
    p.law.validate()?;
    if p.coeff.matrices.len() != p.mesh.elements.len() {
        return Err(SolverError::Config("coefficient field does not match the mesh".into()));
    }
    if !p.mesh.boundary_facets.iter().any(|f| f.tag == BoundaryTag::Gamma) {
        return Err(SolverError::Config("Γ is empty".into()));
    }
    Ok(())
}

/// Solves the discrete weak problem to a dual-norm residual below `tol`.
pub fn assemble_and_solve(p: &Problem, tol: f64) -> SolverResult<Solution> {
    solve_from(p, tol, None)
}

/// As [`assemble_and_solve`], starting Newton from `guess` (default: the
/// solution of the linearized problem with `b(u) ≈ b_# u`).
pub fn solve_from(p: &Problem, tol: f64, guess: Option<&[f64]>) -> SolverResult<Solution> {
    check(p, tol)?;
    let sys = assemble(p)?;
    let n = p.mesh.n_nodes();
    let (b_low, _) = p.law.bounds();
    let linear_start = || -> SolverResult<Vec<f64>> {
        let mut j = sys.stiffness.clone();
        let lin = BoundaryLaw::Linear { b_star: b_low };
        let q = Problem { law: lin, ..p.clone() };
        sys.boundary_term(&q, &vec![0.0; n], Some((&mut j, b_low)));
        Ok(j.cholesky()?.solve(&sys.load))
    };
    let mut u = match guess {
        Some(g) if g.len() == n => g.to_vec(),
        Some(_) => return Err(SolverError::Config("initial guess has the wrong length".into())),
        None if p.data.is_zero() => vec![0.0; n],
        None => linear_start()?,
    };
    let floor = 1e-8 * b_low;
    let mut r = sys.residual(p, &u);
    let mut nr = sys.dual_norm(&r);
    let mut history = vec![nr];
    let mut iterations = 0;
    while nr > tol {
        if iterations == NEWTON_MAX_ITER {
            return Err(SolverError::NonConvergence { iterations, history });
        }
        iterations += 1;
        let chol = sys.jacobian(p, &u, floor).cholesky()?;
        let du = chol.solve(&r);
        let mut step = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(&du).map(|(a, d)| a - step * d).collect();
            let rt = sys.residual(p, &trial);
            let nt = sys.dual_norm(&rt);
            if nt < (1.0 - 1e-4 * step) * nr || step < 1e-12 {
                u = trial;
                r = rt;
                nr = nt;
                break;
            }
            step *= 0.5;
        }
        history.push(nr);
        // stagnation at round-off level counts as failure, not success
        if step < 1e-12 && nr > tol {
            return Err(SolverError::NonConvergence { iterations, history });
        }
    }
    Ok(Solution {
        field: DiscreteField::new(p.mesh.clone(), u)?,
        iterations,
        residual_history: history,
    })
}

/// Discrete residual of the weak problem at `u`, one entry per basis
/// function.
pub fn galerkin_residual(p: &Problem, u: &DiscreteField) -> SolverResult<Vec<f64>> {
    let sys = assemble(p)?;
    Ok(sys.residual(p, &u.values))
}

/// Dual-norm of the discrete residual at `u`.
pub fn residual_dual_norm(p: &Problem, u: &DiscreteField) -> SolverResult<f64> {
    let sys = assemble(p)?;
    Ok(sys.dual_norm(&sys.residual(p, &u.values)))
}

/// Discrete data pairing `∫f v + ∫f⃗·∇v + ∫_{Γ_N} g v + ∫_Γ h v`.
pub fn data_pairing(p: &Problem, v: &DiscreteField) -> SolverResult<f64> {
    let sys = assemble(p)?;
    Ok(sys.load.iter().zip(&v.values).map(|(a, b)| a * b).sum())
}

/// Norm of one data function, by the same quadrature the assembly uses.
pub fn source_norm(mesh: &Mesh, data: &SourceData, which: DataFn, q: f64) -> f64 {
    let samples: Vec<(f64, f64)> = match which {
        DataFn::F | DataFn::Fvec => (0..mesh.elements.len())
            .flat_map(|e| {
                mesh.geom(e).points.into_iter().map(move |qp| {
                    let x = mesh.point(e, &qp.lambda);
                    let v = match which {
                        DataFn::F => data.f_at(x),
                        _ => {
                            let fv = data.fvec_at(x);
                            fv[0].hypot(fv[1])
                        }
                    };
                    (v, qp.weight)
                })
            })
            .collect(),
        DataFn::G | DataFn::H => {
            let tag = if which == DataFn::G { BoundaryTag::GammaN } else { BoundaryTag::Gamma };
            mesh.boundary_facets
                .iter()
                .filter(|f| f.tag == tag)
                .flat_map(|f| {
                    mesh.facet_points(f).into_iter().map(move |(_, x, w)| {
                        let v = if which == DataFn::G { data.g_at(x) } else { data.h_at(x) };
                        (v, w)
                    })
                })
                .collect()
        }
    };
    field::scaled_norm(samples.iter().copied(), q)
}
