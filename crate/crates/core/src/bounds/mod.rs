//! Explicit constants and final bounds, one function per estimate.
//!
//! Every function returns a [`BoundReport`] that carries the inputs it was
//! evaluated on (with every embedding constant it consumed pinned into the
//! snapshot), the intermediate constants under fixed names, and the final
//! bounds. [`evaluate`] on `report.inputs` and `report.operation`
//! reproduces the report bit for bit.

mod duality;
mod energy;
mod linf;
mod lq;
mod optimize;

use std::cell::RefCell;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::constants::{gamma_fn, EmbeddingConstants};
use crate::error::{Error, Result};
use crate::model::{check_regime, close, Proposition, ProblemSpec};

pub use duality::{c_infinity_adjoint, green_bound, w1q_duality_bound, w1q_l1_bound, L1Norms};
pub use energy::{energy_bound, energy_corollary_norms, HPairing};
pub use linf::{c_infinity, linear_robin_neumann_bound, linf_boundary_data, linf_degiorgi, linf_moser};
pub use lq::{big_k, lq_bound};
pub use optimize::minimize_on_ray;

/// The call that produced a report, with its non-spec arguments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Operation {
    Energy { pairing: HPairing },
    EnergyCorollary { a_script: f64, p: f64, s: f64 },
    Lq { q: f64, excess_measure: Option<f64> },
    DeGiorgi,
    Moser { u_norm: f64 },
    CInfinity,
    BoundaryData { u_trace_norm: f64 },
    #[serde(rename = "linear_rn")]
    LinearRN,
    L1Data { norms: L1Norms, c_inf: f64, q: f64 },
    Green { c_inf: f64, q: f64 },
    DualityW1q { q: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundReport {
    pub proposition: Proposition,
    pub operation: Operation,
    pub inputs: ProblemSpec,
    /// Free parameters and their chosen values (α, χ, …).
    pub parameters: IndexMap<String, f64>,
    pub intermediates: IndexMap<String, f64>,
    pub final_bounds: IndexMap<String, f64>,
    pub flags: Vec<String>,
}

impl BoundReport {
    pub fn intermediate(&self, name: &str) -> Option<f64> {
        self.intermediates.get(name).copied()
    }

    pub fn bound(&self, name: &str) -> Option<f64> {
        self.final_bounds.get(name).copied()
    }
}

/// Runs `operation` on `spec`.
pub fn evaluate(spec: &ProblemSpec, operation: &Operation) -> Result<BoundReport> {
    match operation {
        Operation::Energy { pairing } => energy_bound(spec, *pairing),
        Operation::EnergyCorollary { a_script, p, s } => {
            energy_corollary_norms(spec, *a_script, *p, *s)
        }
        Operation::Lq { q, excess_measure } => lq_bound(spec, *q, *excess_measure),
        Operation::DeGiorgi => linf_degiorgi(spec),
        Operation::Moser { u_norm } => linf_moser(spec, *u_norm),
        Operation::CInfinity => c_infinity(spec),
        Operation::BoundaryData { u_trace_norm } => linf_boundary_data(spec, *u_trace_norm),
        Operation::LinearRN => linear_robin_neumann_bound(spec),
        Operation::L1Data { norms, c_inf, q } => w1q_l1_bound(spec, *norms, *c_inf, *q),
        Operation::Green { c_inf, q } => green_bound(spec, *c_inf, *q),
        Operation::DualityW1q { q } => w1q_duality_bound(spec, *q),
    }
}

/// Re-runs the call recorded in `report` on its own snapshot.
pub fn reevaluate(report: &BoundReport) -> Result<BoundReport> {
    evaluate(&report.inputs, &report.operation)
}

/// `‖v‖_{p-ε} ≤ (p/ε)^{1/(p-ε)} |Ω|^{ε/[p(p-ε)]} ‖v‖_{*,p}`.
pub fn marcinkiewicz_norm_bound(weak_norm: f64, p: f64, eps: f64, vol: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= p - 1.0) {
        return Err(Error::Config(format!(
            "ε = {eps} must lie in (0, p-1] = (0, {}]",
            p - 1.0
        )));
    }
    if !(vol > 0.0) || !(weak_norm >= 0.0) {
        return Err(Error::Config("need |Ω| > 0 and a nonnegative weak norm".into()));
    }
    Ok((p / eps).powf(1.0 / (p - eps)) * vol.powf(eps / (p * (p - eps))) * weak_norm)
}

/// Volume of the unit ball in ℝⁿ.
pub fn unit_ball_volume(n: u32) -> f64 {
    let nf = n as f64;
    std::f64::consts::PI.powf(nf / 2.0) / gamma_fn(nf / 2.0 + 1.0).unwrap_or(f64::INFINITY)
}

/// Right side of the H¹ estimate for the mollified Green kernel `G^ρ`
/// (linear boundary law, ℓ = 2).
pub fn green_h1_bound(spec: &ProblemSpec, rho: f64) -> Result<f64> {
    let g = &spec.geometry;
    let c = &spec.coefficients;
    if c.ell != 2.0 {
        return Err(Error::Config("the H¹ estimate for G^ρ needs ℓ = 2".into()));
    }
    let nf = g.n as f64;
    let lead = 2.0 / c.a_low.min(c.b_low);
    if g.n > 2 {
        let s22 = spec.embedding(2.0, 2.0)?.s_ql;
        Ok(lead * s22 * unit_ball_volume(g.n).powf(1.0 / nf - 0.5) * rho.powf(1.0 - nf / 2.0))
    } else {
        let s12 = spec.embedding(1.0, 2.0)?.s_ql;
        Ok(lead * ((g.vol_omega + 1.0) / std::f64::consts::PI).sqrt() * s12 / rho)
    }
}

/// Collects the pieces of one report.
pub(crate) struct Builder<'a> {
    pub spec: &'a ProblemSpec,
    used: RefCell<Vec<EmbeddingConstants>>,
    pinned: ProblemSpec,
    parameters: IndexMap<String, f64>,
    intermediates: IndexMap<String, f64>,
    final_bounds: IndexMap<String, f64>,
    flags: Vec<String>,
}

impl<'a> Builder<'a> {
    pub fn new(spec: &'a ProblemSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Builder {
            spec,
            used: RefCell::new(Vec::new()),
            pinned: spec.clone(),
            parameters: IndexMap::new(),
            intermediates: IndexMap::new(),
            final_bounds: IndexMap::new(),
            flags: Vec::new(),
        })
    }

    pub fn require(&self, proposition: Proposition) -> Result<()> {
        let report = check_regime(self.spec, proposition);
        if report.applicable {
            Ok(())
        } else {
            Err(Error::Regime {
                proposition,
                violations: report.violations,
            })
        }
    }

    pub fn embedding(&self, q: f64, ell: f64) -> Result<EmbeddingConstants> {
        let e = self.spec.embedding(q, ell)?;
        let mut used = self.used.borrow_mut();
        if !used.iter().any(|u| close(u.q, q) && close(u.ell, ell)) {
            used.push(e);
        }
        Ok(e)
    }

    /// `S_{q,ℓ}`
    pub fn s(&self, q: f64, ell: f64) -> Result<f64> {
        Ok(self.embedding(q, ell)?.s_ql)
    }

    /// `K_{q,ℓ}`
    pub fn k(&self, q: f64, ell: f64) -> Result<f64> {
        Ok(self.embedding(q, ell)?.k_ql)
    }

    pub fn param(&mut self, name: &str, value: f64) {
        self.parameters.insert(name.to_string(), value);
    }

    pub fn inter(&mut self, name: &str, value: f64) -> f64 {
        self.intermediates.insert(name.to_string(), value);
        value
    }

    pub fn fin(&mut self, name: &str, value: f64) -> f64 {
        self.final_bounds.insert(name.to_string(), value);
        value
    }

    pub fn flag(&mut self, text: impl Into<String>) {
        self.flags.push(text.into());
    }

    /// Pins a chosen free parameter into the snapshot so re-evaluation does
    /// not search again.
    pub fn pin(&mut self, f: impl FnOnce(&mut ProblemSpec)) {
        f(&mut self.pinned);
    }

    pub fn finish(mut self, proposition: Proposition, operation: Operation) -> BoundReport {
        let mut flagged = Vec::new();
        for (name, v) in self.intermediates.iter().chain(self.final_bounds.iter()) {
            if !v.is_finite() || *v < 0.0 {
                flagged.push(format!("regime-infinite: {name}"));
            }
        }
        self.flags.extend(flagged);
        let mut inputs = self.pinned;
        for e in self.used.into_inner() {
            if !inputs
                .embeddings
                .iter()
                .any(|u| close(u.q, e.q) && close(u.ell, e.ell))
            {
                inputs.embeddings.push(e);
            }
        }
        BoundReport {
            proposition,
            operation,
            inputs,
            parameters: self.parameters,
            intermediates: self.intermediates,
            final_bounds: self.final_bounds,
            flags: self.flags,
        }
    }
}

/// `Σ_{m≥0} m χ^{-m}` as a `χ`-power factor: `χ^{χ/(χ-1)²}`.
pub(crate) fn chi_tail_factor(chi: f64) -> Result<f64> {
    Ok(chi.powf(crate::constants::tail_series(chi)?))
}

#[cfg(test)]
pub(crate) mod test_support {
    use crate::constants::{DomainDescriptor, RectangleSides};
    use crate::model::{CoefficientBounds, DataNorms, Exponents, GeometryMeasures, ProblemSpec};

    /// Unit cube with Γ = ∂Ω and `P_q = 1`.
    pub fn cube(p: f64, r: f64, s: f64, t: f64) -> ProblemSpec {
        ProblemSpec::new(
            GeometryMeasures {
                n: 3,
                vol_omega: 1.0,
                surf_boundary: 6.0,
                surf_gamma: 6.0,
                surf_gamma_n: 0.0,
            },
            CoefficientBounds {
                a_low: 1.0,
                a_high: 1.0,
                b_low: 1.0,
                b_high: 1.0,
                ell: 2.0,
                linear_b_star: Some(1.0),
                symmetric: true,
            },
            Exponents::new(p, r, s, t),
            DataNorms::default(),
            DomainDescriptor::Override { value: 1.0 },
        )
    }

    /// Unit square with Γ = bottom edge and the estimated `P_q`.
    pub fn square(p: f64, r: f64, s: f64, t: f64) -> ProblemSpec {
        ProblemSpec::new(
            GeometryMeasures::rectangle(1.0, 1.0, 1.0),
            CoefficientBounds {
                a_low: 1.0,
                a_high: 4.0,
                b_low: 1.0,
                b_high: 1.0,
                ell: 2.0,
                linear_b_star: Some(1.0),
                symmetric: true,
            },
            Exponents::new(p, r, s, t),
            DataNorms::default(),
            DomainDescriptor::Rectangle {
                width: 1.0,
                height: 1.0,
                gamma: RectangleSides::BOTTOM,
            },
        )
    }
}
