//! Verification harness: solves concrete instances, measures the quantities
//! each estimate controls, and compares them with the computed bounds.
//!
//! Data norms are always recomputed from the analytic [`SourceData`] by the
//! assembly quadrature. Bound functions ask for the norms they need through
//! [`Error::MissingNorm`]; [`with_norms`] fills them in on demand.

mod catalog;
mod decay;
mod green;
mod l1;
mod moser;
mod sweep;
mod verify;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bounds::BoundReport;
use crate::constants::{DomainDescriptor, RectangleSides};
use crate::error::{Error, Result};
use crate::model::{CoefficientBounds, DataFn, DataNorms, Exponents, ProblemSpec};
use crate::solver::{
    assemble_and_solve, build_rectangle_mesh, source_norm, BoundaryLaw, CoefficientSpec, Mesh,
    Problem, Solution, SourceData,
};

pub use catalog::{catalog, manufactured_convergence, ConvergenceLevel, ConvergenceStudy};
pub use decay::{degiorgi_decay_study, DecayRow, DecayStudy, DECAY_ALPHA};
pub use green::{green_study, GreenConfig, GreenRow, GreenStudy};
pub use l1::{l1_data_study, L1Row, L1Study};
pub use moser::{moser_iteration_study, MoserStudy};
pub use sweep::{sweep, SweepRow, SweepStatus, SweepTable};
pub use verify::{applicable_methods, verify_energy, verify_linf, LinfMethod};

/// Newton tolerance (dual-norm residual) for every harness solve.
pub const SOLVER_TOL: f64 = 1e-10;

/// Relative tolerance for checks that involve no discretization.
pub const FORMULA_TOL: f64 = 1e-9;

/// A solvable two-dimensional instance on `[0,width]×[0,height]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub name: String,
    pub width: f64,
    pub height: f64,
    pub gamma: RectangleSides,
    /// Cells per unit length on the finest mesh.
    pub resolution: usize,
    pub coeff: CoefficientSpec,
    pub law: BoundaryLaw,
    #[serde(default)]
    pub data: SourceData,
    pub exponents: Exponents,
    /// Poincaré source; the rectangle estimator when absent.
    #[serde(default)]
    pub poincare: Option<DomainDescriptor>,
}

impl Instance {
    pub fn at_resolution(&self, resolution: usize) -> Instance {
        Instance {
            resolution,
            ..self.clone()
        }
    }

    pub fn mesh(&self) -> Result<Arc<Mesh>> {
        Ok(Arc::new(build_rectangle_mesh(
            self.width,
            self.height,
            self.resolution,
            self.gamma,
        )?))
    }

    pub fn problem(&self) -> Result<Problem> {
        self.law.validate()?;
        let mesh = self.mesh()?;
        let coeff = self.coeff.build(&mesh)?;
        Ok(Problem {
            mesh,
            coeff,
            data: self.data.clone(),
            law: self.law,
        })
    }

    /// The bound-side description of `problem`: measures of its mesh, the
    /// ellipticity witnesses of its coefficient field and the boundary law,
    /// and every nonzero data function seeded with its L¹ norm.
    pub fn spec(&self, problem: &Problem) -> ProblemSpec {
        let (b_low, b_high) = self.law.bounds();
        let coefficients = CoefficientBounds {
            a_low: problem.coeff.a_low,
            a_high: problem.coeff.a_high,
            b_low,
            b_high,
            ell: self.law.ell(),
            linear_b_star: match self.law {
                BoundaryLaw::Linear { b_star } => Some(b_star),
                BoundaryLaw::Power { .. } => None,
            },
            symmetric: true,
        };
        let poincare = self.poincare.clone().unwrap_or(DomainDescriptor::Rectangle {
            width: self.width,
            height: self.height,
            gamma: self.gamma,
        });
        let mut data = DataNorms::default();
        for which in ALL_DATA {
            let v = source_norm(&problem.mesh, &problem.data, which, 1.0);
            if v > 0.0 {
                data.set(which, 1.0, v);
            }
        }
        ProblemSpec::new(
            problem.mesh.measures(),
            coefficients,
            self.exponents,
            data,
            poincare,
        )
    }

    /// Builds the problem, solves it, and returns both with the seeded spec.
    pub fn solve(&self) -> Result<Solved> {
        let problem = self.problem()?;
        let spec = self.spec(&problem);
        let solution = assemble_and_solve(&problem, SOLVER_TOL)?;
        Ok(Solved {
            problem,
            spec,
            solution,
        })
    }
}

const ALL_DATA: [DataFn; 4] = [DataFn::Fvec, DataFn::F, DataFn::G, DataFn::H];

/// A solved instance together with its bound-side spec.
#[derive(Debug, Clone)]
pub struct Solved {
    pub problem: Problem,
    pub spec: ProblemSpec,
    pub solution: Solution,
}

impl Solved {
    /// Runs `f` on the spec, supplying missing data norms by quadrature.
    pub fn bound<T>(&mut self, f: impl FnMut(&ProblemSpec) -> Result<T>) -> Result<T> {
        with_norms(&mut self.spec, &self.problem, f)
    }
}

fn data_fn_named(name: &str) -> Option<DataFn> {
    ALL_DATA.into_iter().find(|d| d.name() == name)
}

/// Evaluates `f` on `spec`, recording every data norm it asks for (via
/// [`Error::MissingNorm`]) from the quadrature of `problem.data`.
pub fn with_norms<T>(
    spec: &mut ProblemSpec,
    problem: &Problem,
    mut f: impl FnMut(&ProblemSpec) -> Result<T>,
) -> Result<T> {
    // each round adds one norm; four functions and a handful of exponents
    // per estimate keep this far below the cap
    for _ in 0..64 {
        match f(spec) {
            Err(Error::MissingNorm { function, exponent }) => {
                let which = data_fn_named(function)
                    .ok_or_else(|| Error::Config(format!("unknown data function {function}")))?;
                let v = source_norm(&problem.mesh, &problem.data, which, exponent);
                spec.data.set(which, exponent, v);
            }
            other => return other,
        }
    }
    Err(Error::Config("too many distinct data norms requested".into()))
}

/// One measured quantity against its bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub instance: String,
    pub quantity: String,
    pub resolution: usize,
    pub measured: f64,
    pub bound: f64,
    pub margin: f64,
    pub tol_rel: f64,
    pub passed: bool,
    /// The report the bound was read from, if any.
    pub report: Option<Box<BoundReport>>,
}

impl VerificationRecord {
    pub fn new(
        instance: &str,
        quantity: impl Into<String>,
        resolution: usize,
        measured: f64,
        bound: f64,
        tol_rel: f64,
        report: Option<&BoundReport>,
    ) -> Self {
        let margin = bound - measured;
        VerificationRecord {
            instance: instance.to_string(),
            quantity: quantity.into(),
            resolution,
            measured,
            bound,
            margin,
            tol_rel,
            passed: margin >= -tol_rel * bound.abs(),
            report: report.map(|r| Box::new(r.clone())),
        }
    }
}

/// Relative discretization tolerance for a check `measured ≤ bound`, from
/// the same check one mesh level coarser: the change of both sides,
/// relative to the bound, floored at [`FORMULA_TOL`].
pub fn discretization_tol(fine: (f64, f64), coarse: (f64, f64)) -> f64 {
    let (m, b) = fine;
    let (mc, bc) = coarse;
    let change = (m - mc).abs() + (b - bc).abs();
    if b.abs() > 0.0 {
        (change / b.abs()).max(FORMULA_TOL)
    } else {
        FORMULA_TOL
    }
}

/// The finest and the next coarser solve of `instance`, in parallel.
pub(crate) fn solve_pair(instance: &Instance) -> Result<(Solved, Solved)> {
    if instance.resolution < 4 || instance.resolution % 2 != 0 {
        return Err(Error::Config(format!(
            "resolution {} must be even and at least 4",
            instance.resolution
        )));
    }
    let coarse = instance.at_resolution(instance.resolution / 2);
    let (a, b) = rayon::join(|| instance.solve(), || coarse.solve());
    Ok((a?, b?))
}


#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;
    use crate::bounds::{energy_bound, HPairing};

    #[test]
    fn spec_seeds_l1_norms() {
        let inst = unit_instance("g", 8, gaussian_f(3.0), BoundaryLaw::Linear { b_star: 1.0 });
        let p = inst.problem().unwrap();
        let spec = inst.spec(&p);
        assert!(!spec.data.is_zero(DataFn::F));
        assert!(spec.data.is_zero(DataFn::H));
        assert_eq!(spec.geometry.surf_gamma, 4.0);
        assert_eq!(spec.coefficients.linear_b_star, Some(1.0));
    }

    #[test]
    fn norms_filled_on_demand() {
        let inst = unit_instance("g", 8, gaussian_f(3.0), BoundaryLaw::Linear { b_star: 1.0 });
        let p = inst.problem().unwrap();
        let mut spec = inst.spec(&p);
        let r = with_norms(&mut spec, &p, |s| energy_bound(s, HPairing::DualOfEll)).unwrap();
        let ft = source_norm(&p.mesh, &p.data, DataFn::F, 2.0);
        assert_eq!(spec.data.norm(DataFn::F, 2.0).unwrap(), ft);
        assert!(r.bound("grad_l2").unwrap() > 0.0);
    }

    #[test]
    fn record_pass_rule() {
        let r = VerificationRecord::new("x", "q", 8, 1.0 + 1e-12, 1.0, 1e-9, None);
        assert!(r.passed);
        let r = VerificationRecord::new("x", "q", 8, 1.1, 1.0, 1e-9, None);
        assert!(!r.passed);
        let r = VerificationRecord::new("x", "q", 8, 0.0, 0.0, 1e-9, None);
        assert!(r.passed);
    }

    #[test]
    fn odd_resolution_rejected() {
        let inst = unit_instance("g", 7, gaussian_f(1.0), BoundaryLaw::Linear { b_star: 1.0 });
        assert!(matches!(solve_pair(&inst), Err(Error::Config(_))));
    }
}
