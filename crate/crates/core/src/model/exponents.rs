use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Primitive exponents of an instance.
///
/// `p` pairs with f⃗ (and fixes the pairings `np/(p+n)` for f and
/// `(n-1)p/n` for g), `r` with h, `s` with g and h in the boundary-data
/// variants, `t` with f in the energy estimate. `alpha`, `chi` and `chi2` are
/// the free parameters of the two-dimensional L∞ bounds; when absent they
/// are chosen by minimizing the bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exponents {
    pub p: f64,
    pub r: f64,
    pub s: f64,
    pub t: f64,
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub chi: Option<f64>,
    #[serde(default)]
    pub chi2: Option<f64>,
}

impl Exponents {
    pub fn new(p: f64, r: f64, s: f64, t: f64) -> Self {
        Exponents {
            p,
            r,
            s,
            t,
            q: None,
            alpha: None,
            chi: None,
            chi2: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p", self.p), ("r", self.r), ("s", self.s), ("t", self.t)] {
            if !(v > 1.0) || !v.is_finite() {
                return Err(Error::Config(format!("exponent {name} = {v} must lie in (1, ∞)")));
            }
        }
        for (name, v) in [("q", self.q), ("α", self.alpha), ("χ", self.chi), ("χ₂", self.chi2)] {
            if let Some(v) = v {
                if !(v > 1.0) || !v.is_finite() {
                    return Err(Error::Config(format!("{name} = {v} must lie in (1, ∞)")));
                }
            }
        }
        Ok(())
    }
}

/// Primitive exponents together with the quantities derived from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentSet {
    pub n: u32,
    pub ell: f64,
    pub p: f64,
    pub q: Option<f64>,
    pub r: f64,
    pub s: f64,
    pub t: f64,
    pub alpha: Option<f64>,
    /// `min{1/2 - 1/p, 1/2 - 1/r}`
    pub delta: f64,
    /// `min{1/2 - 1/p, (1/2 - 1/r)(n-1)/n}`
    pub gamma: f64,
    /// `2(n-1)/[n-2-2(n-1)δ]`, when the denominator is positive
    pub big_q: Option<f64>,
    /// Moser ratio `n(p-2)/[p(n-2)]` for n > 2, configured value at n = 2
    pub chi: Option<f64>,
    /// Boundary Moser ratio `(s-1)(n-1)/[s(n-2)]` for n > 2, configured at n = 2
    pub chi2: Option<f64>,
    /// Derived fields left undefined, with the reason.
    pub undefined: Vec<String>,
}

impl ExponentSet {
    /// Same as `chi`; the first ratio of the linear split.
    pub fn chi1(&self) -> Option<f64> {
        self.chi
    }
}

pub fn derive_exponents(n: u32, ell: f64, e: &Exponents) -> ExponentSet {
    let nf = n as f64;
    let mut undefined = Vec::new();
    let delta = (0.5 - 1.0 / e.p).min(0.5 - 1.0 / e.r);
    let gamma = (0.5 - 1.0 / e.p).min((0.5 - 1.0 / e.r) * (nf - 1.0) / nf);
    let denom = nf - 2.0 - 2.0 * (nf - 1.0) * delta;
    let big_q = if denom > 0.0 {
        Some(2.0 * (nf - 1.0) / denom)
    } else {
        undefined.push(format!("Q: n-2-2(n-1)δ = {denom} ≤ 0"));
        None
    };
    let (chi, chi2) = if n > 2 {
        (
            Some(nf * (e.p - 2.0) / (e.p * (nf - 2.0))),
            Some((e.s - 1.0) * (nf - 1.0) / (e.s * (nf - 2.0))),
        )
    } else {
        if e.chi.is_none() {
            undefined.push("χ: free at n = 2".into());
        }
        if e.chi2.is_none() {
            undefined.push("χ₂: free at n = 2".into());
        }
        (e.chi, e.chi2)
    };
    ExponentSet {
        n,
        ell,
        p: e.p,
        q: e.q,
        r: e.r,
        s: e.s,
        t: e.t,
        alpha: e.alpha,
        delta,
        gamma,
        big_q,
        chi,
        chi2,
        undefined,
    }
}
