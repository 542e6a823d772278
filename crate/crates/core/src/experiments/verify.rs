use serde::{Deserialize, Serialize};

use super::{discretization_tol, solve_pair, Instance, Solved, VerificationRecord};
use crate::bounds::{
    energy_bound, linear_robin_neumann_bound, linf_boundary_data, linf_degiorgi, linf_moser,
    BoundReport, HPairing,
};
use crate::error::{Error, Result};
use crate::model::{check_regime, Proposition, ProblemSpec};
use crate::solver::Region;

/// Measured value, bound, and the quantity name of one check.
type Check = (&'static str, f64, f64);

fn pair_records(
    instance: &Instance,
    mut run: impl FnMut(&mut Solved) -> Result<(Vec<Check>, BoundReport)>,
) -> Result<Vec<VerificationRecord>> {
    let (mut fine, mut coarse) = solve_pair(instance)?;
    let (checks, report) = run(&mut fine)?;
    let (coarse_checks, _) = run(&mut coarse)?;
    Ok(checks
        .iter()
        .zip(&coarse_checks)
        .map(|(&(name, m, b), &(_, mc, bc))| {
            let tol = discretization_tol((m, b), (mc, bc));
            VerificationRecord::new(&instance.name, name, instance.resolution, m, b, tol, Some(&report))
        })
        .collect())
}

fn precheck(instance: &Instance, proposition: Proposition) -> Result<()> {
    let problem = instance.problem()?;
    let spec = instance.spec(&problem);
    let r = check_regime(&spec, proposition);
    if r.applicable {
        Ok(())
    } else {
        Err(Error::Regime {
            proposition,
            violations: r.violations,
        })
    }
}

/// Checks the energy estimate
/// `a_#/2 ‖∇u‖₂² + b_#(ℓ-1)/ℓ ‖u‖_{ℓ,Γ}^ℓ ≤ 𝒜` and the two norm bounds
/// that follow from it.
pub fn verify_energy(instance: &Instance) -> Result<Vec<VerificationRecord>> {
    precheck(instance, Proposition::Energy)?;
    pair_records(instance, |s| {
        let report = s.bound(|spec| energy_bound(spec, HPairing::DualOfEll))?;
        let c = &s.spec.coefficients;
        let u = &s.solution.field;
        let grad = u.gradient_norm(2.0);
        let trace = u.lebesgue_norm(c.ell, Region::Gamma);
        let lhs = c.a_low / 2.0 * grad * grad
            + c.b_low * (c.ell - 1.0) / c.ell * trace.powf(c.ell);
        let bound = |k: &str| report.intermediate(k).or(report.bound(k)).unwrap_or(f64::NAN);
        let checks = vec![
            ("energy", lhs, bound("A_script")),
            ("grad_l2", grad, bound("grad_l2")),
            ("trace_ell", trace, bound("trace_ell")),
        ];
        Ok((checks, report))
    })
}

/// Which ess-sup estimate to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinfMethod {
    DeGiorgi,
    Moser,
    BoundaryData,
    #[serde(rename = "linear_rn")]
    LinearRN,
}

impl LinfMethod {
    pub const ALL: [LinfMethod; 4] = [
        LinfMethod::DeGiorgi,
        LinfMethod::Moser,
        LinfMethod::BoundaryData,
        LinfMethod::LinearRN,
    ];

    pub fn proposition(self) -> Proposition {
        match self {
            LinfMethod::DeGiorgi => Proposition::DeGiorgi,
            LinfMethod::Moser => Proposition::Moser,
            LinfMethod::BoundaryData => Proposition::BoundaryLinf,
            LinfMethod::LinearRN => Proposition::LinearRN,
        }
    }
}

/// The methods whose hypotheses `spec` satisfies.
pub fn applicable_methods(spec: &ProblemSpec) -> Vec<LinfMethod> {
    LinfMethod::ALL
        .into_iter()
        .filter(|m| check_regime(spec, m.proposition()).applicable)
        .collect()
}

/// Checks `max|u_h|` against the ess-sup bound of `method`. Moser and
/// BoundaryData take the solution norm on their right side from `u_h`.
pub fn verify_linf(instance: &Instance, method: LinfMethod) -> Result<Vec<VerificationRecord>> {
    precheck(instance, method.proposition())?;
    let tag = serde_json::to_value(method)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    let mut records = pair_records(instance, |s| {
        let u = s.solution.field.clone();
        let measured = u.max_abs();
        let e = s.spec.exponents;
        let report = match method {
            LinfMethod::DeGiorgi => s.bound(linf_degiorgi)?,
            LinfMethod::Moser => {
                let u_norm = u.lebesgue_norm(2.0 * e.p / (e.p - 2.0), Region::Omega);
                s.bound(|spec| linf_moser(spec, u_norm))?
            }
            LinfMethod::BoundaryData => {
                let trace = u.lebesgue_norm(2.0 * e.s / (e.s - 1.0), Region::Boundary);
                s.bound(|spec| linf_boundary_data(spec, trace))?
            }
            LinfMethod::LinearRN => s.bound(linear_robin_neumann_bound)?,
        };
        let mut checks = vec![("ess_sup", measured, report.bound("ess_sup").unwrap_or(f64::NAN))];
        if let Some(b) = report.bound("ess_sup_homogeneous") {
            checks.push(("ess_sup_homogeneous", measured, b));
        }
        Ok((checks, report))
    })?;
    for r in &mut records {
        r.quantity = format!("{}[{tag}]", r.quantity);
    }
    Ok(records)
}
