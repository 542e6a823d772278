use serde::{Deserialize, Serialize};

use super::{discretization_tol, solve_pair, Instance, Solved, VerificationRecord, FORMULA_TOL};
use crate::bounds::{linf_moser, BoundReport};
use crate::constants::moser_partial_sums;
use crate::error::{Error, Result};
use crate::solver::Region;

/// Largest ladder exponent evaluated; beyond it the ladder is truncated.
const MAX_EXPONENT: f64 = 1e12;

/// Required closeness of the ladder to the ess-sup at the last rung.
pub const LADDER_GAP: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderEntry {
    pub n: usize,
    /// `qχ^N`
    pub exponent: f64,
    pub norm: f64,
    /// `(c√2ℰ)^{a_N} χ^{b_N} ‖u‖_q` with `c = E_n^{(χ-1)/χ}`.
    pub rhs: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MoserStudy {
    pub instance: String,
    pub chi: f64,
    pub q: f64,
    pub e_script: f64,
    /// `E_n^{(χ-1)/χ} √2 ℰ`, the per-rung factor.
    pub step_constant: f64,
    pub ess_sup: f64,
    pub ladder: Vec<LadderEntry>,
    /// Rungs whose exponent overflowed were dropped.
    pub truncated: bool,
    /// `|Ω|^{-1/m}‖u_h‖_m` nondecreasing along the ladder.
    pub monotone_normalized: bool,
    /// Ladder constant with partial sums taken to convergence.
    pub limit_constant: f64,
    /// `ess_sup/‖u‖_q` from the Moser report.
    pub report_constant: f64,
    pub limit_rel_error: f64,
    pub records: Vec<VerificationRecord>,
    pub report: BoundReport,
}

struct Rungs {
    report: BoundReport,
    chi: f64,
    e_script: f64,
    step: f64,
    u_q: f64,
    ladder: Vec<LadderEntry>,
    truncated: bool,
}

fn rungs(s: &mut Solved, n_max: usize) -> Result<Rungs> {
    let p = s.spec.exponents.p;
    let q = 2.0 * p / (p - 2.0);
    let u = s.solution.field.clone();
    let u_q = u.lebesgue_norm(q, Region::Omega);
    let report = s.bound(|spec| linf_moser(spec, u_q))?;
    let get = |k: &str| {
        report
            .intermediate(k)
            .ok_or_else(|| Error::Config(format!("Moser report lacks {k}")))
    };
    let chi = get("chi")?;
    let e_script = get("E_script")?;
    let step = get("E_n")?.powf((chi - 1.0) / chi) * 2f64.sqrt() * e_script;
    let mut ladder = Vec::new();
    let mut truncated = false;
    for n in 0..=n_max {
        let exponent = q * chi.powi(n as i32);
        if !(exponent <= MAX_EXPONENT) {
            truncated = true;
            break;
        }
        let (a, b) = moser_partial_sums(chi, n);
        ladder.push(LadderEntry {
            n,
            exponent,
            norm: u.lebesgue_norm(exponent, Region::Omega),
            rhs: step.powf(a) * chi.powf(b) * u_q,
        });
    }
    Ok(Rungs {
        report,
        chi,
        e_script,
        step,
        u_q,
        ladder,
        truncated,
    })
}

/// Computes `‖u_h‖_{qχ^N}` for `N = 0..=n_max` with `q = 2p/(p-2)`, checks
/// each rung against the iteration inequality with the measured `‖u_h‖_q`
/// and `ℰ`, and (for χ ≥ 1.5) the closeness of the last rung to `max|u_h|`.
pub fn moser_iteration_study(instance: &Instance, n_max: usize) -> Result<MoserStudy> {
    let (mut fine, mut coarse) = solve_pair(instance)?;
    let f = rungs(&mut fine, n_max)?;
    let c = rungs(&mut coarse, n_max)?;
    let ess_sup = fine.solution.field.max_abs();
    let name = &instance.name;
    let res = instance.resolution;
    let mut records: Vec<VerificationRecord> = f
        .ladder
        .iter()
        .zip(&c.ladder)
        .map(|(r, rc)| {
            let tol = discretization_tol((r.norm, r.rhs), (rc.norm, rc.rhs));
            VerificationRecord::new(name, format!("ladder[N={}]", r.n), res, r.norm, r.rhs, tol, Some(&f.report))
        })
        .collect();
    if f.chi >= 1.5 && ess_sup > 0.0 {
        if let Some(last) = f.ladder.last() {
            records.push(VerificationRecord::new(
                name,
                format!("ladder_gap[N={}]", last.n),
                res,
                (ess_sup - last.norm) / ess_sup,
                LADDER_GAP,
                FORMULA_TOL,
                None,
            ));
        }
    }
    let vol = fine.spec.geometry.vol_omega;
    let normalized: Vec<f64> = f
        .ladder
        .iter()
        .map(|r| r.norm * vol.powf(-1.0 / r.exponent))
        .collect();
    let monotone_normalized = normalized.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12));
    // enough terms that χ^{-N}·N is below double precision
    let terms = ((80.0 / f.chi.ln()).ceil() as usize).clamp(64, 10_000_000);
    let (a, b) = moser_partial_sums(f.chi, terms);
    let limit_constant = f.step.powf(a) * f.chi.powf(b);
    let report_constant = f.report.bound("ess_sup").unwrap_or(f64::NAN) / f.u_q;
    let limit_rel_error = (limit_constant - report_constant).abs() / report_constant.abs();
    Ok(MoserStudy {
        instance: name.clone(),
        chi: f.chi,
        q: f.ladder.first().map_or(f64::NAN, |r| r.exponent),
        e_script: f.e_script,
        step_constant: f.step,
        ess_sup,
        ladder: f.ladder,
        truncated: f.truncated,
        monotone_normalized,
        limit_constant,
        report_constant,
        limit_rel_error,
        records,
        report: f.report,
    })
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;
    use crate::solver::{BoundaryLaw, FieldExpr, SourceData};

    fn fvec_data(amp: f64) -> SourceData {
        SourceData {
            fvec: [
                FieldExpr::Gaussian { amp, center: [0.3, 0.5], width: 0.15 },
                FieldExpr::Zero,
            ],
            ..Default::default()
        }
    }

    #[test]
    fn ladder_checks() {
        let mut inst = unit_instance("fvec", 16, fvec_data(40.0), BoundaryLaw::Linear { b_star: 1.0 });
        inst.exponents.chi = Some(2.0);
        let st = moser_iteration_study(&inst, 8).unwrap();
        assert_eq!(st.chi, 2.0);
        assert!(st.monotone_normalized);
        assert!(!st.truncated);
        assert!(st.records.iter().all(|r| r.passed), "{:#?}", st.records.iter().map(|r| (&r.quantity, r.measured, r.bound)).collect::<Vec<_>>());
        assert!(st.limit_rel_error < 1e-10, "{}", st.limit_rel_error);
    }

    #[test]
    fn huge_chi_truncates() {
        let mut inst = unit_instance("fvec", 8, fvec_data(40.0), BoundaryLaw::Linear { b_star: 1.0 });
        inst.exponents.chi = Some(1000.0);
        let st = moser_iteration_study(&inst, 8).unwrap();
        assert!(st.truncated);
        assert!(st.ladder.len() < 9);
    }
}
