use super::{Builder, BoundReport, Operation};
use crate::error::{Error, Result};
use crate::model::{DataFn, Proposition, ProblemSpec};

/// `C_{n,p,r} = S_{p',r'} ‖f‖_{np/(p+n)} + K_{p',r'} ‖g‖_{(n-1)p/n}`.
pub(crate) fn c_npr(b: &Builder<'_>) -> Result<f64> {
    let spec = b.spec;
    let nf = spec.geometry.n as f64;
    let (p, r) = (spec.exponents.p, spec.exponents.r);
    let f = spec.data.norm(DataFn::F, nf * p / (p + nf))?;
    let g = spec.data.norm(DataFn::G, (nf - 1.0) * p / nf)?;
    let pc = p / (p - 1.0);
    let rc = r / (r - 1.0);
    // skip the embedding lookup when it would be multiplied by zero
    let s_term = if f == 0.0 { 0.0 } else { b.s(pc, rc)? * f };
    let k_term = if g == 0.0 { 0.0 } else { b.k(pc, rc)? * g };
    Ok(s_term + k_term)
}

/// `𝒦_{q,δ} = 2^{(n-2)/(n-2-2(n-1)δ)} (Q/(Q-q))^{1/q} (|Ω|^{1/q-1/Q} + |∂Ω|^{1/q-1/Q})`
/// with `Q = 2(n-1)/[n-2-2(n-1)δ]`. Returns `(𝒦, Q)`.
pub fn big_k(n: u32, q: f64, delta: f64, vol: f64, boundary: f64) -> Result<(f64, f64)> {
    let nf = n as f64;
    let denom = nf - 2.0 - 2.0 * (nf - 1.0) * delta;
    if !(denom > 0.0) {
        return Err(Error::BlowUp {
            parameter: "δ",
            critical: (nf - 2.0) / (2.0 * (nf - 1.0)),
            value: delta,
        });
    }
    let big_q = 2.0 * (nf - 1.0) / denom;
    // Q carries round-off from δ; treat q within 1e-12 of Q as reaching it
    if !(q < big_q * (1.0 - 1e-12)) {
        return Err(Error::BlowUp {
            parameter: "q",
            critical: big_q,
            value: q,
        });
    }
    let e = 1.0 / q - 1.0 / big_q;
    let value = 2f64.powf((nf - 2.0) / denom)
        * (big_q / (big_q - q)).powf(1.0 / q)
        * (vol.powf(e) + boundary.powf(e));
    Ok((value, big_q))
}

/// The Lq estimate for `‖u‖_{q,Ω} + ‖u‖_{q,∂Ω}`.
///
/// `excess_measure` is `|Ω̄[|u|>1]|`; `None` uses the worst case
/// `|Ω| + |∂Ω|`.
pub fn lq_bound(spec: &ProblemSpec, q: f64, excess_measure: Option<f64>) -> Result<BoundReport> {
    let mut b = Builder::new(spec)?;
    b.require(Proposition::Lq)?;
    let g = &spec.geometry;
    let nf = g.n as f64;
    let c = &spec.coefficients;
    let d = spec.derived();
    let (p, r, delta) = (d.p, d.r, d.delta);
    let excess = match excess_measure {
        Some(m) if m >= 0.0 => m,
        Some(m) => return Err(Error::Config(format!("excess measure {m} is negative"))),
        None => {
            b.flag("excess measure defaulted to |Ω| + |∂Ω|");
            g.vol_omega + g.surf_boundary
        }
    };
    if !(q >= 1.0) {
        return Err(Error::Config(format!("q = {q} must be ≥ 1")));
    }
    let (k_qd, big_q) = big_k(g.n, q, delta, g.vol_omega, g.surf_boundary)?;
    b.param("q", q);
    b.param("excess_measure", excess);
    b.inter("delta", delta);
    b.inter("Q", big_q);
    let cnpr = b.inter("C_npr", c_npr(&b)?);
    let fvec = spec.data.norm(DataFn::Fvec, p)?;
    let h = spec.data.norm(DataFn::H, r)?;
    let ab = (c.a_low * c.b_low).sqrt();
    let lead = g.vol_omega.powf((nf - 2.0) / (2.0 * (nf - 1.0) * nf)) * b.s(2.0, 2.0)? + b.k(2.0, 2.0)?;
    let bracket = (1.0 / c.a_low + 1.0 / ab) * (fvec + cnpr) * g.vol_omega.powf(0.5 - 1.0 / p - delta)
        + (1.0 / c.b_low + 1.0 / ab) * (h + cnpr) * g.surf_gamma.powf(0.5 - 1.0 / r - delta);
    let big_b = b.inter("B_script", lead * bracket);
    b.inter("K_qdelta", k_qd);
    let alpha = 2.0 * (nf - 1.0) / (nf - 2.0);
    let beta = alpha * delta;
    // log₂ of the alternative; the power itself overflows as β → 1
    b.param("prefactor_proof_alternative_log2", alpha / ((1.0 - beta) * (1.0 - beta)));
    b.flag(
        "prefactor 2^{(n-2)/(n-2-2(n-1)δ)} used as displayed; the level-set lemma \
         suggests 2^{α/(1-β)²}, recorded as prefactor_proof_alternative_log2",
    );
    let excess_term = 2.0 * excess.powf((nf - 2.0) / (2.0 * (nf - 1.0)) - delta);
    b.fin("lq_norm", k_qd * (big_b + excess_term));
    Ok(b.finish(
        Proposition::Lq,
        Operation::Lq {
            q,
            excess_measure,
        },
    ))
}
