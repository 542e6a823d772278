//! Problem description: geometry measures, coefficient bounds, data norms
//! and exponents, plus per-proposition regime checks.

mod exponents;
mod regime;

use std::collections::HashMap;
use std::sync::Mutex;

use once_cell::sync::{Lazy, OnceCell};
use serde::{Deserialize, Serialize};

use crate::constants::{combined_constants, DomainDescriptor, EmbeddingConstants, PoincareEstimator};
use crate::error::{Error, Result};

pub use exponents::{derive_exponents, ExponentSet, Exponents};
pub use regime::{check_regime, hypotheses, Proposition, RegimeReport};

/// Relative tolerance for matching exponents and measures.
pub const MATCH_TOL: f64 = 1e-12;

pub(crate) fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= MATCH_TOL * a.abs().max(b.abs()).max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryMeasures {
    pub n: u32,
    pub vol_omega: f64,
    pub surf_boundary: f64,
    pub surf_gamma: f64,
    pub surf_gamma_n: f64,
}

impl GeometryMeasures {
    pub fn rectangle(width: f64, height: f64, gamma_length: f64) -> Self {
        let boundary = 2.0 * (width + height);
        GeometryMeasures {
            n: 2,
            vol_omega: width * height,
            surf_boundary: boundary,
            surf_gamma: gamma_length,
            surf_gamma_n: boundary - gamma_length,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("dimension n = {} must be ≥ 2", self.n)));
        }
        for (name, v) in [
            ("vol_omega", self.vol_omega),
            ("surf_boundary", self.surf_boundary),
            ("surf_gamma", self.surf_gamma),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} = {v} must be positive")));
            }
        }
        if !(self.surf_gamma_n >= 0.0) {
            return Err(Error::Config(format!(
                "surf_gamma_n = {} must be nonnegative",
                self.surf_gamma_n
            )));
        }
        if (self.surf_gamma + self.surf_gamma_n - self.surf_boundary).abs()
            > 1e-12 * self.surf_boundary.max(1.0)
        {
            return Err(Error::Config(format!(
                "|Γ| + |Γ_N| = {} differs from |∂Ω| = {}",
                self.surf_gamma + self.surf_gamma_n,
                self.surf_boundary
            )));
        }
        Ok(())
    }

    /// Same shape dilated by `lambda`.
    pub fn dilated(&self, lambda: f64) -> Self {
        let nf = self.n as f64;
        let s = lambda.powf(nf - 1.0);
        GeometryMeasures {
            n: self.n,
            vol_omega: self.vol_omega * lambda.powf(nf),
            surf_boundary: self.surf_boundary * s,
            surf_gamma: self.surf_gamma * s,
            surf_gamma_n: self.surf_gamma_n * s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientBounds {
    pub a_low: f64,
    pub a_high: f64,
    pub b_low: f64,
    pub b_high: f64,
    pub ell: f64,
    #[serde(default)]
    pub linear_b_star: Option<f64>,
    #[serde(default)]
    pub symmetric: bool,
}

impl CoefficientBounds {
    pub fn validate(&self) -> Result<()> {
        if !(self.a_low > 0.0 && self.a_low <= self.a_high && self.a_high.is_finite()) {
            return Err(Error::Config(format!(
                "need 0 < a_# ≤ a^#, got a_# = {}, a^# = {}",
                self.a_low, self.a_high
            )));
        }
        if !(self.b_low > 0.0 && self.b_low <= self.b_high && self.b_high.is_finite()) {
            return Err(Error::Config(format!(
                "need 0 < b_# ≤ b^#, got b_# = {}, b^# = {}",
                self.b_low, self.b_high
            )));
        }
        if !(self.ell >= 2.0 && self.ell.is_finite()) {
            return Err(Error::Config(format!("ℓ = {} must be ≥ 2", self.ell)));
        }
        if let Some(b) = self.linear_b_star {
            if !(b > 0.0) {
                return Err(Error::Config(format!("b_* = {b} must be positive")));
            }
            if self.ell != 2.0 || self.b_low != b || self.b_high != b {
                return Err(Error::Config(
                    "a linear boundary law needs ℓ = 2 and b_# = b^# = b_*".into(),
                ));
            }
        }
        Ok(())
    }

    /// `ℓ' = ℓ/(ℓ-1)`.
    pub fn ell_conjugate(&self) -> f64 {
        self.ell / (self.ell - 1.0)
    }
}

/// A norm value paired with the exponent it was measured in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormEntry {
    pub exponent: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFn {
    /// f⃗ on Ω
    Fvec,
    /// f on Ω
    F,
    /// g on Γ_N
    G,
    /// h on Γ
    H,
}

impl DataFn {
    pub fn name(self) -> &'static str {
        match self {
            DataFn::Fvec => "f⃗",
            DataFn::F => "f",
            DataFn::G => "g",
            DataFn::H => "h",
        }
    }
}

/// Norms of the data. An empty list means the function vanishes, so every
/// norm of it is zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataNorms {
    #[serde(default)]
    pub fvec: Vec<NormEntry>,
    #[serde(default)]
    pub f: Vec<NormEntry>,
    #[serde(default)]
    pub g: Vec<NormEntry>,
    #[serde(default)]
    pub h: Vec<NormEntry>,
}

impl DataNorms {
    pub fn entries(&self, which: DataFn) -> &[NormEntry] {
        match which {
            DataFn::Fvec => &self.fvec,
            DataFn::F => &self.f,
            DataFn::G => &self.g,
            DataFn::H => &self.h,
        }
    }

    pub fn entries_mut(&mut self, which: DataFn) -> &mut Vec<NormEntry> {
        match which {
            DataFn::Fvec => &mut self.fvec,
            DataFn::F => &mut self.f,
            DataFn::G => &mut self.g,
            DataFn::H => &mut self.h,
        }
    }

    pub fn is_zero(&self, which: DataFn) -> bool {
        self.entries(which).iter().all(|e| e.value == 0.0)
    }

    pub fn norm(&self, which: DataFn, exponent: f64) -> Result<f64> {
        if self.is_zero(which) {
            return Ok(0.0);
        }
        self.entries(which)
            .iter()
            .find(|e| close(e.exponent, exponent))
            .map(|e| e.value)
            .ok_or(Error::MissingNorm {
                function: which.name(),
                exponent,
            })
    }

    /// Records (or replaces) one norm value.
    pub fn set(&mut self, which: DataFn, exponent: f64, value: f64) {
        let list = self.entries_mut(which);
        if let Some(e) = list.iter_mut().find(|e| close(e.exponent, exponent)) {
            e.value = value;
        } else {
            list.push(NormEntry { exponent, value });
        }
    }

    /// Multiplies every norm by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let scale = |v: &Vec<NormEntry>| {
            v.iter()
                .map(|e| NormEntry {
                    exponent: e.exponent,
                    value: e.value * lambda,
                })
                .collect()
        };
        DataNorms {
            fvec: scale(&self.fvec),
            f: scale(&self.f),
            g: scale(&self.g),
            h: scale(&self.h),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for which in [DataFn::Fvec, DataFn::F, DataFn::G, DataFn::H] {
            for e in self.entries(which) {
                if !(e.exponent >= 1.0) || !e.exponent.is_finite() {
                    return Err(Error::Config(format!(
                        "norm of {} has exponent {}; need a finite exponent ≥ 1",
                        which.name(),
                        e.exponent
                    )));
                }
                if !(e.value >= 0.0) || !e.value.is_finite() {
                    return Err(Error::Config(format!(
                        "norm of {} at exponent {} is {}; need a finite value ≥ 0",
                        which.name(),
                        e.exponent,
                        e.value
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One boundary value problem instance, described by measures and norms.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub geometry: GeometryMeasures,
    pub coefficients: CoefficientBounds,
    pub exponents: Exponents,
    #[serde(default)]
    pub data: DataNorms,
    /// Explicit constants; take precedence over the Poincaré source.
    #[serde(default)]
    pub embeddings: Vec<EmbeddingConstants>,
    pub poincare: DomainDescriptor,
    #[serde(skip)]
    estimator: OnceCell<PoincareEstimator>,
}

static ESTIMATORS: Lazy<Mutex<HashMap<String, PoincareEstimator>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn shared_estimator(domain: &DomainDescriptor) -> PoincareEstimator {
    let key = serde_json::to_string(domain).unwrap_or_default();
    let mut cache = ESTIMATORS.lock().unwrap_or_else(|e| e.into_inner());
    cache
        .entry(key)
        .or_insert_with(|| PoincareEstimator::new(domain.clone()))
        .clone()
}

impl ProblemSpec {
    pub fn new(
        geometry: GeometryMeasures,
        coefficients: CoefficientBounds,
        exponents: Exponents,
        data: DataNorms,
        poincare: DomainDescriptor,
    ) -> Self {
        ProblemSpec {
            geometry,
            coefficients,
            exponents,
            data,
            embeddings: Vec::new(),
            poincare,
            estimator: OnceCell::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.coefficients.validate()?;
        self.data.validate()?;
        self.exponents.validate()?;
        for e in &self.embeddings {
            if e.n != self.geometry.n {
                return Err(Error::Config(format!(
                    "embedding entry (q = {}, ℓ = {}) has n = {}, spec has n = {}",
                    e.q, e.ell, e.n, self.geometry.n
                )));
            }
            if !(e.s_ql > 0.0 && e.k_ql > 0.0 && e.p_q > 0.0) {
                return Err(Error::Config(format!(
                    "embedding entry (q = {}, ℓ = {}) must be positive",
                    e.q, e.ell
                )));
            }
        }
        Ok(())
    }

    pub fn derived(&self) -> ExponentSet {
        derive_exponents(self.geometry.n, self.coefficients.ell, &self.exponents)
    }

    /// `P_q` from the Poincaré source.
    pub fn poincare_constant(&self, q: f64) -> Result<f64> {
        let est = self
            .estimator
            .get_or_init(|| shared_estimator(&self.poincare));
        est.value(q).map_err(|e| Error::MissingEmbedding {
            q,
            ell: f64::NAN,
            reason: e.to_string(),
        })
    }

    /// `S_{q,ℓ}`, `K_{q,ℓ}`: table entry if present, otherwise computed.
    pub fn embedding(&self, q: f64, ell: f64) -> Result<EmbeddingConstants> {
        if let Some(e) = self
            .embeddings
            .iter()
            .find(|e| close(e.q, q) && close(e.ell, ell))
        {
            return Ok(*e);
        }
        let p_q = self.poincare_constant(q).map_err(|e| match e {
            Error::MissingEmbedding { reason, .. } => Error::MissingEmbedding { q, ell, reason },
            other => other,
        })?;
        Ok(combined_constants(
            q,
            ell,
            self.geometry.n,
            p_q,
            self.geometry.surf_gamma,
        )?)
    }

    /// Copy with a replaced data block.
    pub fn with_data(&self, data: DataNorms) -> Self {
        let mut out = self.clone();
        out.data = data;
        out
    }
}
