use serde::{Deserialize, Serialize};

use super::{Builder, BoundReport, Operation};
use crate::error::{Error, Result};
use crate::model::{DataFn, Proposition, ProblemSpec};

/// Which norm of h enters the energy estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HPairing {
    /// `‖h‖_{ℓ/(ℓ-1),Γ}`
    DualOfEll,
    /// `‖h‖_{s,Γ}`, lumped with g
    LsVariant,
}

/// Coefficients of the linear maps `ℋ_n(A,B) = h_a A + h_b B` and
/// `ℱ_n(A,B) = ℋ_n(f_a A, f_b B)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct EnergyMaps {
    pub h_a: f64,
    pub h_b: f64,
    pub f_a: f64,
    pub f_b: f64,
}

impl EnergyMaps {
    pub fn new(b: &Builder<'_>) -> Result<Self> {
        let spec = b.spec;
        let n = spec.geometry.n;
        let ell = spec.coefficients.ell;
        let vol = spec.geometry.vol_omega;
        let (t, s) = (spec.exponents.t, spec.exponents.s);
        if n > 2 {
            return Ok(EnergyMaps {
                h_a: b.s(2.0, ell)?,
                h_b: b.k(2.0, ell)?,
                f_a: 1.0,
                f_b: 1.0,
            });
        }
        let h_b = b.k(2.0 * s / (2.0 * s - 1.0), ell)?;
        let f_b = vol.powf((s - 1.0) / (2.0 * s));
        if t < 2.0 {
            Ok(EnergyMaps {
                h_a: b.s(2.0 * t / (3.0 * t - 2.0), ell)?,
                h_b,
                f_a: vol.powf((t - 1.0) / t),
                f_b,
            })
        } else {
            Ok(EnergyMaps {
                h_a: b.s(1.0, ell)? * vol.powf(0.5 - 1.0 / t),
                h_b,
                f_a: vol.sqrt(),
                f_b,
            })
        }
    }

    pub fn h(&self, a: f64, bb: f64) -> f64 {
        self.h_a * a + self.h_b * bb
    }

    pub fn f(&self, a: f64, bb: f64) -> f64 {
        self.h(self.f_a * a, self.f_b * bb)
    }

    /// `L_n` with `L_n A = ℱ_n(A,0) + ℋ_n(A,0)`.
    pub fn l_n(&self) -> f64 {
        self.h_a * (self.f_a + 1.0)
    }

    /// `M_n` with `M_n B = ℱ_n(0,B) + ℋ_n(0,B)`.
    pub fn m_n(&self) -> f64 {
        self.h_b * (self.f_b + 1.0)
    }
}

/// The energy estimate
/// `a_#/2 ‖∇u‖₂² + b_#(ℓ-1)/ℓ ‖u‖_{ℓ,Γ}^ℓ ≤ 𝒜`.
///
/// Final bounds: `grad_l2 = (2𝒜/a_#)^{1/2}` and
/// `trace_ell = (ℓ'𝒜/b_#)^{1/ℓ}`.
pub fn energy_bound(spec: &ProblemSpec, pairing: HPairing) -> Result<BoundReport> {
    let mut b = Builder::new(spec)?;
    b.require(Proposition::Energy)?;
    let c = &spec.coefficients;
    let ell = c.ell;
    let ell_c = c.ell_conjugate();
    let e = &spec.exponents;
    let fvec2 = spec.data.norm(DataFn::Fvec, 2.0)?;
    let ft = spec.data.norm(DataFn::F, e.t)?;
    let gs = spec.data.norm(DataFn::G, e.s)?;
    let maps = EnergyMaps::new(&b)?;
    let (f_val, h_val, h_term) = match pairing {
        HPairing::DualOfEll => {
            let h = spec.data.norm(DataFn::H, ell_c)?;
            (maps.f(ft, gs), maps.h(ft, gs), h)
        }
        HPairing::LsVariant => {
            let hs = spec.data.norm(DataFn::H, e.s)?;
            (maps.f(ft, gs + hs), maps.h(ft, gs + hs), 0.0)
        }
    };
    b.inter("F_n", f_val);
    b.inter("H_n", h_val);
    let grad_part = b.inter(
        "A_script_grad",
        (fvec2 + f_val).powi(2) / (2.0 * c.a_low),
    );
    let trace_part = b.inter(
        "A_script_trace",
        (h_term + h_val).powf(ell_c) / (ell_c * c.b_low.powf(1.0 / (ell - 1.0))),
    );
    let a_script = b.inter("A_script", grad_part + trace_part);
    b.fin("grad_l2", (2.0 * a_script / c.a_low).sqrt());
    b.fin("trace_ell", (ell_c * a_script / c.b_low).powf(1.0 / ell));
    Ok(b.finish(Proposition::Energy, Operation::Energy { pairing }))
}

/// Norm bounds that follow from the energy estimate: `u_l2p_pm2` bounds
/// `‖u‖_{2p/(p-2),Ω}` and `u_trace_2s_sm1` bounds `‖u‖_{2s/(s-1),∂Ω}`.
pub fn energy_corollary_norms(
    spec: &ProblemSpec,
    a_script: f64,
    p: f64,
    s: f64,
) -> Result<BoundReport> {
    let mut b = Builder::new(spec)?;
    let n = spec.geometry.n;
    let nf = n as f64;
    let mut violations = Vec::new();
    if !((n > 2 && p >= nf) || (n == 2 && p > 2.0)) {
        violations.push("p≥n>2 or p>n=2 required".to_string());
    }
    if !((n > 2 && s >= nf - 1.0) || (n == 2 && s > 1.0)) {
        violations.push("s≥n−1>1 or s>1 at n=2 required".to_string());
    }
    if !violations.is_empty() {
        return Err(Error::Regime {
            proposition: Proposition::Energy,
            violations,
        });
    }
    if !(a_script >= 0.0) {
        return Err(Error::Config(format!("𝒜 = {a_script} must be nonnegative")));
    }
    let c = &spec.coefficients;
    let ell = c.ell;
    let vol = spec.geometry.vol_omega;
    let grad = (2.0 * a_script / c.a_low).sqrt();
    let trace = (c.ell_conjugate() * a_script / c.b_low).powf(1.0 / ell);
    let q1 = 2.0 * p * nf / (2.0 * p + nf * (p - 2.0));
    let q2 = 2.0 * s * nf / (2.0 * s + (nf - 1.0) * (s - 1.0));
    let s_q1 = b.s(q1, ell)?;
    let k_q2 = b.k(q2, ell)?;
    b.param("a_script", a_script);
    b.param("p", p);
    b.param("s", s);
    b.fin(
        "u_l2p_pm2",
        s_q1 * (vol.powf(1.0 / nf - 1.0 / p) * grad + trace),
    );
    b.fin(
        "u_trace_2s_sm1",
        k_q2 * (vol.powf((s - nf + 1.0) / (2.0 * nf * s)) * grad + trace),
    );
    b.flag(
        "u_trace_2s_sm1 bounds the boundary norm ‖u‖_{2s/(s-1),∂Ω}; the displayed \
         statement names ‖u‖_{2s',Ω}",
    );
    Ok(b.finish(
        Proposition::Energy,
        Operation::EnergyCorollary { a_script, p, s },
    ))
}
