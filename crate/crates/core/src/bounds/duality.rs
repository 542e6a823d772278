use serde::{Deserialize, Serialize};

use super::lq::big_k;
use super::{c_infinity, Builder, BoundReport, Operation};
use crate::error::{Error, Result};
use crate::model::{CoefficientBounds, DataFn, DataNorms, Proposition, ProblemSpec};

/// L¹ norms `‖f‖_{1,Ω}`, `‖g‖_{1,Γ_N}`, `‖h‖_{1,Γ}`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct L1Norms {
    pub f: f64,
    pub g: f64,
    pub h: f64,
}

impl L1Norms {
    pub fn sum(&self) -> f64 {
        self.f + self.g + self.h
    }
}

/// `C_∞` for the adjoint problem used by the L¹ and Green estimates:
/// linear law `b(w) = w`, unit `‖f⃗‖_{q'}` and no other data.
pub fn c_infinity_adjoint(spec: &ProblemSpec, q: f64) -> Result<BoundReport> {
    if !(q > 1.0) {
        return Err(Error::Config(format!("q = {q} must exceed 1")));
    }
    let qc = q / (q - 1.0);
    let mut adjoint = spec.clone();
    adjoint.coefficients = CoefficientBounds {
        b_low: 1.0,
        b_high: 1.0,
        ell: 2.0,
        linear_b_star: Some(1.0),
        ..spec.coefficients
    };
    adjoint.exponents.p = qc;
    adjoint.exponents.chi = None;
    let mut data = DataNorms::default();
    data.set(DataFn::Fvec, qc, 1.0);
    adjoint.data = data;
    // ℓ enters the embedding constants, so cached entries would be wrong
    adjoint.embeddings.retain(|e| e.ell == 2.0);
    c_infinity(&adjoint)
}

/// The W^{1,q} and trace estimates for L¹ data.
pub fn w1q_l1_bound(
    spec: &ProblemSpec,
    norms: L1Norms,
    c_inf: f64,
    q: f64,
) -> Result<BoundReport> {
    let mut b = Builder::new(spec)?;
    b.require(Proposition::L1Data)?;
    let nf = spec.geometry.n as f64;
    if !(q > 1.0 && q < nf / (nf - 1.0)) {
        return Err(Error::Regime {
            proposition: Proposition::L1Data,
            violations: vec![format!("1<q<n/(n−1) required, got q = {q}")],
        });
    }
    if !(c_inf > 0.0) || [norms.f, norms.g, norms.h].iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::Config("need C_∞ > 0 and nonnegative L¹ norms".into()));
    }
    let c = &spec.coefficients;
    let gamma = spec.geometry.surf_gamma;
    let sum = norms.sum();
    b.param("q", q);
    b.inter("C_infinity", c_inf);
    b.inter("L1_sum", sum);
    b.fin(
        "grad_lq",
        c_inf * (gamma * (1.0 + c.b_high) + sum + (1.0 + c.b_high) * sum / c.b_low),
    );
    b.fin(
        "trace_ellm1",
        (gamma + sum / c.b_low).powf(1.0 / (c.ell - 1.0)),
    );
    Ok(b.finish(
        Proposition::L1Data,
        Operation::L1Data { norms, c_inf, q },
    ))
}

/// The Green-kernel estimates; the same report for every pole.
pub fn green_bound(spec: &ProblemSpec, c_inf: f64, q: f64) -> Result<BoundReport> {
    let mut b = Builder::new(spec)?;
    b.require(Proposition::Green)?;
    let nf = spec.geometry.n as f64;
    if !(q >= 1.0 && q < nf / (nf - 1.0)) {
        return Err(Error::Regime {
            proposition: Proposition::Green,
            violations: vec![format!("1≤q<n/(n−1) required, got q = {q}")],
        });
    }
    if !(c_inf > 0.0) {
        return Err(Error::Config(format!("C_∞ = {c_inf} must be positive")));
    }
    let c = &spec.coefficients;
    let gamma = spec.geometry.surf_gamma;
    b.param("q", q);
    b.inter("C_infinity", c_inf);
    b.fin(
        "green_grad_lq",
        c_inf * (1.0 + (1.0 + c.b_high) * (gamma + 1.0 / c.b_low)),
    );
    b.fin(
        "green_trace",
        (gamma + 1.0 / c.b_low).powf(1.0 / (c.ell - 1.0)),
    );
    Ok(b.finish(Proposition::Green, Operation::Green { c_inf, q }))
}

/// The duality W^{1,q} estimate for the linear problem with `b_* = 1`.
pub fn w1q_duality_bound(spec: &ProblemSpec, q: f64) -> Result<BoundReport> {
    let mut b = Builder::new(spec)?;
    b.require(Proposition::DualityW1q)?;
    let g = &spec.geometry;
    let n = g.n;
    let nf = n as f64;
    let e = &spec.exponents;
    let p_min = e.t.min(e.s);
    let upper = 2.0 * (nf - 1.0) * p_min / (2.0 * (nf - 1.0) - p_min);
    let qc = q / (q - 1.0);
    let mut violations = Vec::new();
    if !(q > 1.0 && q < upper * (1.0 - 1e-12)) {
        violations.push(format!("1<q<2(n−1)p/[2(n−1)−p] = {upper} required, got q = {q}"));
    }
    if !(qc > 2.0 && qc < 2.0 * (nf - 1.0)) {
        violations.push(format!("2<q'<2(n−1) required, got q' = {qc}"));
    }
    if !violations.is_empty() {
        return Err(Error::Regime {
            proposition: Proposition::DualityW1q,
            violations,
        });
    }
    let a = spec.coefficients.a_low;
    let delta = b.inter("delta", 0.5 - 1.0 / qc);
    let tc = e.t / (e.t - 1.0);
    let sc = e.s / (e.s - 1.0);
    let (k_t, _) = big_k(n, tc, delta, g.vol_omega, g.surf_boundary)?;
    let (k_s, big_q) = big_k(n, sc, delta, g.vol_omega, g.surf_boundary)?;
    b.inter("Q", big_q);
    b.inter("K_tprime", k_t);
    b.inter("K_sprime", k_s);
    let vol = g.vol_omega;
    let bd = g.surf_boundary;
    // S_{n/(n+1),n/(n+1)} has index below 1; the q = 1 limit constants stand in
    let s_low = b.s(1.0, 1.0)?;
    let k11 = b.k(1.0, 1.0)?;
    let m_q = (vol.powf((nf - 2.0) / (2.0 * (nf - 1.0) * nf)) * b.s(2.0, 2.0)? + b.k(2.0, 2.0)?)
        + 2.0
            * vol.powf(1.0 / q - 0.5)
            * (s_low * (vol.powf(0.5 + 1.0 / nf) + bd.powf(0.5 + 1.0 / nf))
                + k11 * (vol.sqrt() + bd.sqrt()));
    b.inter("M_script_q", m_q);
    b.flag("S_{n/(n+1),n/(n+1)} replaced by S_{1,1} (index below 1)");
    let ft = spec.data.norm(DataFn::F, e.t)?;
    let gs = spec.data.norm(DataFn::G, e.s)?;
    let hs = spec.data.norm(DataFn::H, e.s)?;
    b.param("q", q);
    b.fin(
        "grad_lq",
        m_q * (1.0 / a + 1.0 / a.sqrt()) * (k_t * ft + k_s * (gs + hs)),
    );
    Ok(b.finish(Proposition::DualityW1q, Operation::DualityW1q { q }))
}
