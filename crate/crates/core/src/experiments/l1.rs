use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{discretization_tol, solve_pair, Instance, Solved, VerificationRecord, FORMULA_TOL};
use crate::bounds::{c_infinity_adjoint, w1q_l1_bound, BoundReport, L1Norms};
use crate::error::{Error, Result};
use crate::model::{check_regime, DataFn, Proposition};
use crate::solver::{source_norm, Region};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct L1Row {
    pub m: f64,
    /// L¹ norms of the truncated data `F_m(f)`, `F_m(g)`, `F_m(h)`.
    pub norms: L1Norms,
    /// `(q, ‖∇u_m‖_q, bound)` over the q grid.
    pub grad_norms: Vec<(f64, f64, f64)>,
    /// `‖u_m‖_{ℓ-1,Γ}` and its bound.
    pub trace_norm: f64,
    pub trace_bound: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct L1Study {
    pub instance: String,
    /// L¹ norms of the untruncated data, by the same quadrature.
    pub untruncated: L1Norms,
    pub rows: Vec<L1Row>,
    pub records: Vec<VerificationRecord>,
    /// The W^{1,q} report of the last m, one per grid q.
    pub reports: Vec<BoundReport>,
}

fn l1_norms(s: &Solved) -> L1Norms {
    let n = |w| source_norm(&s.problem.mesh, &s.problem.data, w, 1.0);
    L1Norms {
        f: n(DataFn::F),
        g: n(DataFn::G),
        h: n(DataFn::H),
    }
}

struct Measured {
    norms: L1Norms,
    grads: Vec<f64>,
    trace: f64,
    reports: Vec<BoundReport>,
}

fn measure(s: &Solved, c_inf: &[f64], q_grid: &[f64]) -> Result<Measured> {
    let norms = l1_norms(s);
    let u = &s.solution.field;
    let reports = q_grid
        .iter()
        .zip(c_inf)
        .map(|(&q, &c)| w1q_l1_bound(&s.spec, norms, c, q))
        .collect::<Result<Vec<_>>>()?;
    Ok(Measured {
        norms,
        grads: q_grid.iter().map(|&q| u.gradient_norm(q)).collect(),
        trace: u.lebesgue_norm(s.spec.coefficients.ell - 1.0, Region::Gamma),
        reports,
    })
}

/// Solves with data `F_m(f)`, `F_m(g)`, `F_m(h)` for each m and checks the
/// W^{1,q} and trace estimates for L¹ data, with `C_∞` of the adjoint
/// problem.
pub fn l1_data_study(instance: &Instance, m_schedule: &[f64], q_grid: &[f64]) -> Result<L1Study> {
    if m_schedule.is_empty() || m_schedule.windows(2).any(|w| !(w[1] > w[0])) || !(m_schedule[0] > 0.0) {
        return Err(Error::Config("m schedule must be positive and increasing".into()));
    }
    let base_problem = instance.problem()?;
    let base_spec = instance.spec(&base_problem);
    let regime = check_regime(&base_spec, Proposition::L1Data);
    if !regime.applicable {
        return Err(Error::Regime {
            proposition: Proposition::L1Data,
            violations: regime.violations,
        });
    }
    let c_inf = q_grid
        .iter()
        .map(|&q| {
            c_infinity_adjoint(&base_spec, q)?
                .intermediate("C_infinity")
                .ok_or_else(|| Error::Config("adjoint report lacks C_infinity".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let untruncated = {
        let n = |w| source_norm(&base_problem.mesh, &base_problem.data, w, 1.0);
        L1Norms {
            f: n(DataFn::F),
            g: n(DataFn::G),
            h: n(DataFn::H),
        }
    };
    let solved = m_schedule
        .par_iter()
        .map(|&m| {
            let mut inst = instance.clone();
            inst.data.smoothing_m = Some(m);
            let (fine, coarse) = solve_pair(&inst)?;
            Ok((m, measure(&fine, &c_inf, q_grid)?, measure(&coarse, &c_inf, q_grid)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let name = &instance.name;
    let res = instance.resolution;
    let mut rows = Vec::new();
    let mut records = Vec::new();
    let mut last_reports = Vec::new();
    for (m, f, c) in solved {
        let mut grad_norms = Vec::new();
        for (i, &q) in q_grid.iter().enumerate() {
            let b = f.reports[i].bound("grad_lq").unwrap_or(f64::NAN);
            let bc = c.reports[i].bound("grad_lq").unwrap_or(f64::NAN);
            let tol = discretization_tol((f.grads[i], b), (c.grads[i], bc));
            records.push(VerificationRecord::new(
                name,
                format!("grad_lq[m={m},q={q}]"),
                res,
                f.grads[i],
                b,
                tol,
                Some(&f.reports[i]),
            ));
            grad_norms.push((q, f.grads[i], b));
        }
        let trace_bound = f.reports.first().and_then(|r| r.bound("trace_ellm1")).unwrap_or(f64::NAN);
        if let Some(r) = f.reports.first() {
            let bc = c.reports[0].bound("trace_ellm1").unwrap_or(f64::NAN);
            let tol = discretization_tol((f.trace, trace_bound), (c.trace, bc));
            records.push(VerificationRecord::new(name, format!("trace[m={m}]"), res, f.trace, trace_bound, tol, Some(r)));
        }
        records.push(VerificationRecord::new(
            name,
            format!("truncated_l1[m={m}]"),
            res,
            f.norms.sum(),
            untruncated.sum(),
            FORMULA_TOL,
            None,
        ));
        rows.push(L1Row {
            m,
            norms: f.norms,
            grad_norms,
            trace_norm: f.trace,
            trace_bound,
        });
        last_reports = f.reports;
    }
    Ok(L1Study {
        instance: name.clone(),
        untruncated,
        rows,
        records,
        reports: last_reports,
    })
}
