//! Special functions and best embedding constants.
//!
//! Every bound in [`crate::bounds`] is assembled from the whole-space
//! Sobolev and trace constants `S_q`, `K_q`, the Poincaré-type constant
//! `P_q` of the domain, and the combined constants `S_{q,ℓ}`, `K_{q,ℓ}` that
//! control `‖v‖_{q*}` and `‖v‖_{q_*,∂Ω}` by `‖∇v‖_q + ‖v‖_{ℓ,Γ}`.

mod gamma;
pub mod poincare;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use gamma::{gamma_fn, ln_gamma, GAMMA_MAX_ARG};
pub use poincare::{poincare_constant, DomainDescriptor, PoincareEstimator, RectangleSides};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConstantError {
    #[error("{function}: argument {value} outside its domain ({requirement})")]
    Domain {
        function: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("{function}: result overflows at argument {value}")]
    Range { function: &'static str, value: f64 },
    #[error("{constant}: requires {requirement} (q = {q}, n = {n})")]
    Regime {
        constant: &'static str,
        q: f64,
        n: u32,
        requirement: &'static str,
    },
    #[error("series Σ m χ^-m diverges for χ = {chi} (requires χ > 1)")]
    Divergent { chi: f64 },
    #[error("Poincaré constant: {0}")]
    Configuration(String),
}

/// Best constants for one `(q, ℓ)` pairing on a fixed domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingConstants {
    pub q: f64,
    pub ell: f64,
    pub n: u32,
    pub p_q: f64,
    pub s_q: f64,
    pub k_q: f64,
    pub s_ql: f64,
    pub k_ql: f64,
    pub gamma_surface: f64,
}

fn check_subcritical(constant: &'static str, q: f64, n: u32) -> Result<(), ConstantError> {
    if n < 2 {
        return Err(ConstantError::Regime {
            constant,
            q,
            n,
            requirement: "n ≥ 2",
        });
    }
    if !(q > 1.0 && q < n as f64) {
        return Err(ConstantError::Regime {
            constant,
            q,
            n,
            requirement: "1 < q < n",
        });
    }
    Ok(())
}

/// Talenti's best Sobolev constant `S_q` for `‖v‖_{nq/(n-q)} ≤ S_q ‖∇v‖_q` on ℝⁿ.
pub fn sobolev_best(q: f64, n: u32) -> Result<f64, ConstantError> {
    check_subcritical("S_q", q, n)?;
    let nf = n as f64;
    let log_ratio = ln_gamma(1.0 + nf / 2.0)? + ln_gamma(nf)?
        - ln_gamma(nf / q)?
        - ln_gamma(1.0 + nf - nf / q)?;
    let ln_s = -0.5 * PI.ln() - nf.ln() / q
        + (1.0 - 1.0 / q) * ((q - 1.0) / (nf - q)).ln()
        + log_ratio / nf;
    Ok(ln_s.exp())
}

/// The `q = 1` endpoint `S_1 = π^{-1/2} n^{-1} Γ(1+n/2)^{1/n}`.
pub fn sobolev_limit(n: u32) -> Result<f64, ConstantError> {
    if n < 2 {
        return Err(ConstantError::Regime {
            constant: "S_1",
            q: 1.0,
            n,
            requirement: "n ≥ 2",
        });
    }
    let nf = n as f64;
    Ok((-0.5 * PI.ln() - nf.ln() + ln_gamma(1.0 + nf / 2.0)? / nf).exp())
}

/// Best trace constant `K_q` for `‖v‖_{(n-1)q/(n-q),∂ℝⁿ₊} ≤ K_q ‖∇v‖_q`.
pub fn trace_best(q: f64, n: u32) -> Result<f64, ConstantError> {
    check_subcritical("K_q", q, n)?;
    let nf = n as f64;
    let qm1 = q - 1.0;
    let a = q * (nf - 1.0) / (2.0 * qm1);
    let b = (nf - 1.0) / (2.0 * qm1);
    let ln_k = 0.5 * (1.0 - q) * PI.ln()
        + qm1 * (qm1 / (nf - q)).ln()
        + (qm1 / (nf - 1.0)) * (ln_gamma(a)? - ln_gamma(b)?);
    Ok(ln_k.exp())
}

/// The `q = 1` endpoint of `K_q`, which is 1 in every dimension.
///
/// As `q ↓ 1` the factor `((q-1)/(n-q))^{q-1}` tends to 1 and the Gamma ratio
/// grows like `z^{(n-1)/2}` with `z = (n-1)/(2(q-1))`, so its
/// `(q-1)/(n-1)` power also tends to 1.
pub fn trace_limit(n: u32) -> Result<f64, ConstantError> {
    if n < 2 {
        return Err(ConstantError::Regime {
            constant: "K_1",
            q: 1.0,
            n,
            requirement: "n ≥ 2",
        });
    }
    Ok(1.0)
}

/// The factor `max{1 + P_q 2^{(n-1)(1-1/q)}, P_q |Γ|^{1/q-1/ℓ}}` shared by
/// `S_{q,ℓ}` and `K_{q,ℓ}`.
pub fn combination_factor(q: f64, ell: f64, n: u32, p_q: f64, gamma_surface: f64) -> f64 {
    let nf = n as f64;
    let first = 1.0 + p_q * 2f64.powf((nf - 1.0) * (1.0 - 1.0 / q));
    let second = p_q * gamma_surface.powf(1.0 / q - 1.0 / ell);
    first.max(second)
}

/// Builds `S_{q,ℓ}` and `K_{q,ℓ}`; `q = 1` uses the limit constants.
pub fn combined_constants(
    q: f64,
    ell: f64,
    n: u32,
    p_q: f64,
    gamma_surface: f64,
) -> Result<EmbeddingConstants, ConstantError> {
    if !(ell >= 1.0) {
        return Err(ConstantError::Domain {
            function: "combined_constants",
            value: ell,
            requirement: "ℓ ≥ 1",
        });
    }
    if !(p_q > 0.0) || !p_q.is_finite() {
        return Err(ConstantError::Domain {
            function: "combined_constants",
            value: p_q,
            requirement: "P_q > 0",
        });
    }
    if !(gamma_surface > 0.0) || !gamma_surface.is_finite() {
        return Err(ConstantError::Domain {
            function: "combined_constants",
            value: gamma_surface,
            requirement: "|Γ| > 0",
        });
    }
    let (s_q, k_q) = if q == 1.0 {
        (sobolev_limit(n)?, trace_limit(n)?)
    } else {
        (sobolev_best(q, n)?, trace_best(q, n)?)
    };
    let factor = combination_factor(q, ell, n, p_q, gamma_surface);
    Ok(EmbeddingConstants {
        q,
        ell,
        n,
        p_q,
        s_q,
        k_q,
        s_ql: s_q * factor,
        k_ql: k_q * factor,
        gamma_surface,
    })
}

/// `Σ_{m≥0} m χ^{-m} = χ/(χ-1)²`, the exponent of χ in the Moser constants.
pub fn tail_series(chi: f64) -> Result<f64, ConstantError> {
    if !(chi > 1.0) || !chi.is_finite() {
        return Err(ConstantError::Divergent { chi });
    }
    Ok(chi / ((chi - 1.0) * (chi - 1.0)))
}

/// Partial sums `(a_N, b_N) = (Σ_{m<N} χ^{-m}, Σ_{m<N} m χ^{-m})`.
pub fn moser_partial_sums(chi: f64, terms: usize) -> (f64, f64) {
    let mut a = 0.0;
    let mut b = 0.0;
    let mut power = 1.0;
    for m in 0..terms {
        a += power;
        b += m as f64 * power;
        power /= chi;
    }
    (a, b)
}
