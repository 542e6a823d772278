use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{VerificationRecord, FORMULA_TOL, SOLVER_TOL};
use crate::bounds::{c_infinity_adjoint, green_bound, green_h1_bound, BoundReport};
use crate::constants::{DomainDescriptor, RectangleSides};
use crate::error::{Error, Result};
use crate::model::{CoefficientBounds, DataFn, DataNorms, Exponents, ProblemSpec};
use crate::solver::{
    assemble_and_solve, build_rectangle_mesh, source_norm, BoundaryLaw, CoefficientSpec, FieldExpr,
    Problem, Region, SourceData,
};

/// Allowed H¹ growth per halving of ρ: the ρ^{-1} law with 25% mesh slack.
pub const GROWTH_LIMIT: f64 = 2.0 * 1.25;

/// Allowed relative change of `G^ρ` away from the pole between
/// consecutive radii.
pub const CAUCHY_REL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenConfig {
    pub width: f64,
    pub height: f64,
    pub gamma: RectangleSides,
    pub resolution: usize,
    pub coeff: CoefficientSpec,
    pub law: BoundaryLaw,
    /// Defaults to the centroid.
    #[serde(default)]
    pub pole: Option<[f64; 2]>,
    pub rho_schedule: Vec<f64>,
    pub q_grid: Vec<f64>,
}

impl GreenConfig {
    /// Unit square, Γ = ∂Ω, A = I, b(u) = u, resolution 128, centered pole.
    pub fn unit_square() -> Self {
        GreenConfig {
            width: 1.0,
            height: 1.0,
            gamma: RectangleSides::ALL,
            resolution: 128,
            coeff: CoefficientSpec::Scalar { value: 1.0 },
            law: BoundaryLaw::Linear { b_star: 1.0 },
            pole: None,
            rho_schedule: vec![0.2, 0.1, 0.05, 0.025],
            q_grid: vec![1.1, 1.3, 1.5, 1.8],
        }
    }

    pub fn pole(&self) -> [f64; 2] {
        self.pole.unwrap_or([self.width / 2.0, self.height / 2.0])
    }

    fn validate(&self) -> Result<()> {
        let x = self.pole();
        let room = x[0].min(self.width - x[0]).min(x[1]).min(self.height - x[1]);
        if self.rho_schedule.is_empty() {
            return Err(Error::Config("empty ρ schedule".into()));
        }
        for w in self.rho_schedule.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::Config("ρ schedule must be strictly decreasing".into()));
            }
        }
        for &rho in &self.rho_schedule {
            if !(rho > 0.0) || !(rho < room) {
                return Err(Error::Config(format!(
                    "B_ρ(x) with ρ = {rho} is not inside Ω (distance from the pole to ∂Ω is {room})"
                )));
            }
        }
        for &q in &self.q_grid {
            if !(q > 1.0 && q < 2.0) {
                return Err(Error::Config(format!("q = {q} outside (1, n/(n-1)) = (1, 2)")));
            }
        }
        if self.law.ell() < 2.0 {
            return Err(Error::Config("the Green kernel needs ℓ ≥ 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreenRow {
    pub rho: f64,
    pub min_value: f64,
    /// `(q, ‖∇G^ρ‖_q)` over the q grid.
    pub grad_norms: Vec<(f64, f64)>,
    /// `‖G^ρ‖_{ℓ-1,Γ}`
    pub trace_norm: f64,
    /// `‖∇G^ρ‖₂ + ‖G^ρ‖_{2,Γ}`
    pub h1_norm: f64,
    /// Right side of the H¹ estimate (linear law only).
    pub h1_bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreenStudy {
    pub pole: [f64; 2],
    pub rho_schedule: Vec<f64>,
    pub rows: Vec<GreenRow>,
    /// `h1_norm[i+1] / h1_norm[i]`
    pub growth_factors: Vec<f64>,
    /// Max change of `G^ρ` on nodes away from the pole between consecutive
    /// radii, relative to the max of the last field there.
    pub cauchy_increments: Vec<f64>,
    pub records: Vec<VerificationRecord>,
    /// One Green-bound report per grid q.
    pub reports: Vec<BoundReport>,
}

fn green_spec(cfg: &GreenConfig, problem: &Problem) -> ProblemSpec {
    let (b_low, b_high) = cfg.law.bounds();
    let mut data = DataNorms::default();
    data.set(DataFn::F, 1.0, source_norm(&problem.mesh, &problem.data, DataFn::F, 1.0));
    ProblemSpec::new(
        problem.mesh.measures(),
        CoefficientBounds {
            a_low: problem.coeff.a_low,
            a_high: problem.coeff.a_high,
            b_low,
            b_high,
            ell: cfg.law.ell(),
            linear_b_star: match cfg.law {
                BoundaryLaw::Linear { b_star } => Some(b_star),
                BoundaryLaw::Power { .. } => None,
            },
            symmetric: true,
        },
        // placeholders: the Green estimates read no exponent, and the
        // adjoint C_∞ sets its own p
        Exponents::new(4.0, 4.0, 4.0, 2.0),
        data,
        DomainDescriptor::Rectangle {
            width: cfg.width,
            height: cfg.height,
            gamma: cfg.gamma,
        },
    )
}

/// Solves the mollified Green problem with `f = χ_{B_ρ(x)}/|B_ρ(x)|` for
/// each ρ (normalized by the discrete integral of the indicator) and checks
/// nonnegativity, the W^{1,q} and trace bounds, the H¹ growth rate, and the
/// pointwise convergence away from the pole.
pub fn green_study(cfg: &GreenConfig) -> Result<GreenStudy> {
    cfg.validate()?;
    let x = cfg.pole();
    let mesh = std::sync::Arc::new(build_rectangle_mesh(cfg.width, cfg.height, cfg.resolution, cfg.gamma)?);
    let coeff = cfg.coeff.build(&mesh)?;
    let problem_for = |rho: f64| {
        let disk = |amp| SourceData {
            f: FieldExpr::Disk { amp, center: x, radius: rho },
            ..Default::default()
        };
        let area = source_norm(&mesh, &disk(1.0), DataFn::F, 1.0);
        Problem {
            mesh: mesh.clone(),
            coeff: coeff.clone(),
            data: disk(1.0 / area),
            law: cfg.law,
        }
    };
    let spec = green_spec(cfg, &problem_for(cfg.rho_schedule[0]));
    let reports = cfg
        .q_grid
        .iter()
        .map(|&q| {
            let c_inf = c_infinity_adjoint(&spec, q)?
                .intermediate("C_infinity")
                .ok_or_else(|| Error::Config("adjoint report lacks C_infinity".into()))?;
            green_bound(&spec, c_inf, q)
        })
        .collect::<Result<Vec<_>>>()?;
    let ell = cfg.law.ell();
    let linear = matches!(cfg.law, BoundaryLaw::Linear { .. });
    let solved = cfg
        .rho_schedule
        .par_iter()
        .map(|&rho| {
            let p = problem_for(rho);
            let s = assemble_and_solve(&p, SOLVER_TOL)?;
            Ok((rho, s.field))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (rho, u) in &solved {
        let h1 = u.gradient_norm(2.0) + u.lebesgue_norm(2.0, Region::Gamma);
        rows.push(GreenRow {
            rho: *rho,
            min_value: u.min_value(),
            grad_norms: cfg.q_grid.iter().map(|&q| (q, u.gradient_norm(q))).collect(),
            trace_norm: u.lebesgue_norm(ell - 1.0, Region::Gamma),
            h1_norm: h1,
            h1_bound: if linear && ell == 2.0 { Some(green_h1_bound(&spec, *rho)?) } else { None },
        });
    }
    let growth_factors: Vec<f64> = rows.windows(2).map(|w| w[1].h1_norm / w[0].h1_norm).collect();
    let far = 1.5 * cfg.rho_schedule[0];
    let probe: Vec<usize> = (0..mesh.n_nodes())
        .filter(|&i| {
            let v = mesh.vertices[i];
            (v[0] - x[0]).hypot(v[1] - x[1]) >= far
        })
        .collect();
    let cauchy_increments: Vec<f64> = if probe.is_empty() {
        Vec::new()
    } else {
        let last = &solved[solved.len() - 1].1;
        let scale = probe.iter().map(|&i| last.values[i].abs()).fold(0.0, f64::max);
        solved
            .windows(2)
            .map(|w| {
                let d = probe
                    .iter()
                    .map(|&i| (w[1].1.values[i] - w[0].1.values[i]).abs())
                    .fold(0.0, f64::max);
                if scale > 0.0 { d / scale } else { d }
            })
            .collect()
    };

    let res = cfg.resolution;
    let mut records = Vec::new();
    let rec = |q: String, m: f64, b: f64, tol: f64, r: Option<&BoundReport>| {
        VerificationRecord::new("green", q, res, m, b, tol, r)
    };
    for row in &rows {
        let tag = format!("ρ={}", row.rho);
        records.push(rec(format!("nonnegativity[{tag}]"), (-row.min_value).max(0.0), 10.0 * SOLVER_TOL, 0.0, None));
        for ((q, norm), report) in row.grad_norms.iter().zip(&reports) {
            let b = report.bound("green_grad_lq").unwrap_or(f64::NAN);
            records.push(rec(format!("grad_lq[{tag},q={q}]"), *norm, b, FORMULA_TOL, Some(report)));
        }
        if let Some(report) = reports.first() {
            let b = report.bound("green_trace").unwrap_or(f64::NAN);
            records.push(rec(format!("trace[{tag}]"), row.trace_norm, b, FORMULA_TOL, Some(report)));
        }
        if let Some(b) = row.h1_bound {
            records.push(rec(format!("h1[{tag}]"), row.h1_norm, b, FORMULA_TOL, None));
        }
    }
    for (w, g) in rows.windows(2).zip(&growth_factors) {
        let ratio = w[0].rho / w[1].rho;
        // the ρ^{-1} law allows a factor equal to the radius ratio
        let limit = ratio * GROWTH_LIMIT / 2.0;
        records.push(rec(format!("h1_growth[ρ={}→{}]", w[0].rho, w[1].rho), *g, limit, FORMULA_TOL, None));
    }
    for (i, inc) in cauchy_increments.iter().enumerate() {
        records.push(rec(format!("cauchy[{}]", i + 1), *inc, CAUCHY_REL, FORMULA_TOL, None));
    }
    Ok(GreenStudy {
        pole: x,
        rho_schedule: cfg.rho_schedule.clone(),
        rows,
        growth_factors,
        cauchy_increments,
        records,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> GreenConfig {
        GreenConfig {
            resolution: 32,
            rho_schedule: vec![0.2, 0.1],
            q_grid: vec![1.3],
            ..GreenConfig::unit_square()
        }
    }

    #[test]
    fn coarse_study_passes() {
        let st = green_study(&small()).unwrap();
        assert_eq!(st.rows.len(), 2);
        assert!(st.records.iter().all(|r| r.passed), "{:#?}", st.records.iter().filter(|r| !r.passed).collect::<Vec<_>>());
        assert!(st.growth_factors[0] > 1.0);
    }

    #[test]
    fn ball_must_fit() {
        let cfg = GreenConfig { rho_schedule: vec![2.0], ..small() };
        assert!(matches!(green_study(&cfg), Err(Error::Config(_))));
        let cfg = GreenConfig { pole: Some([0.05, 0.5]), ..small() };
        assert!(matches!(green_study(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn schedule_must_decrease() {
        let cfg = GreenConfig { rho_schedule: vec![0.1, 0.2], ..small() };
        assert!(matches!(green_study(&cfg), Err(Error::Config(_))));
    }
}
