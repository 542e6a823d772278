use super::energy::EnergyMaps;
use super::lq::c_npr;
use super::{chi_tail_factor, minimize_on_ray, Builder, BoundReport, Operation};
use crate::error::{Error, Result};
use crate::model::{DataFn, Proposition, ProblemSpec};

type Lookup<'x> = &'x dyn Fn(f64, f64) -> Result<f64>;

/// Uses the configured free parameter or minimizes `objective` over
/// `(lower, ∞)`. Records the choice under `name`.
fn choose(
    b: &mut Builder<'_>,
    name: &str,
    configured: Option<f64>,
    lower: f64,
    objective: impl FnMut(f64) -> Option<f64>,
) -> Result<f64> {
    let value = match configured {
        Some(v) if v > lower => v,
        Some(v) => {
            return Err(Error::Config(format!(
                "{name} = {v} must exceed {lower}"
            )))
        }
        None => {
            let (v, _) = minimize_on_ray(lower, objective).ok_or_else(|| {
                Error::Config(format!("no admissible {name} in ({lower}, ∞)"))
            })?;
            b.flag(format!("{name} chosen by minimizing the bound"));
            v
        }
    };
    b.param(name, value);
    Ok(value)
}

/// `E_n`: `S_{2,2}^{χ/(χ-1)}` for n > 2; for n = 2
/// `S_{σ,σ}^{χ/(χ-1)} max{|Ω|,|Γ|}^{(p-2)/[2p(χ-1)]}` with
/// `σ = 2pχ/(p(χ+1)-2)`.
pub(crate) fn e_n(spec: &ProblemSpec, p: f64, chi: f64, s: Lookup<'_>) -> Result<f64> {
    let g = &spec.geometry;
    let power = chi / (chi - 1.0);
    if g.n > 2 {
        return Ok(s(2.0, 2.0)?.powf(power));
    }
    let sigma = 2.0 * p * chi / (p * (chi + 1.0) - 2.0);
    let e = (p - 2.0) / (2.0 * p * (chi - 1.0));
    Ok(s(sigma, sigma)?.powf(power) * g.vol_omega.powf(e).max(g.surf_gamma.powf(e)))
}

/// `G_n`: `K_{2,2}^{χ/(χ-1)}` for n > 2; for n = 2
/// `K_{σ,σ}^{χ/(χ-1)} max{|Ω|,|Γ|}^{(s-1)/[4s(χ-1)]}` with
/// `σ = 4sχ/(2sχ+s-1)`.
pub(crate) fn g_n(spec: &ProblemSpec, s_exp: f64, chi: f64, k: Lookup<'_>) -> Result<f64> {
    let g = &spec.geometry;
    let power = chi / (chi - 1.0);
    if g.n > 2 {
        return Ok(k(2.0, 2.0)?.powf(power));
    }
    let sigma = 4.0 * s_exp * chi / (2.0 * s_exp * chi + s_exp - 1.0);
    let e = (s_exp - 1.0) / (4.0 * s_exp * (chi - 1.0));
    Ok(k(sigma, sigma)?.powf(power) * g.vol_omega.powf(e).max(g.surf_gamma.powf(e)))
}

/// `Σ ln xᵢ` when every factor is finite and positive, so that the product
/// itself is representable. Free parameters are only searched where the
/// reported bound does not overflow or underflow.
fn ln_product(factors: &[f64]) -> Option<f64> {
    factors
        .iter()
        .all(|x| x.is_finite() && *x > 0.0)
        .then(|| factors.iter().map(|x| x.ln()).sum())
}

fn s_lookup(spec: &ProblemSpec) -> impl Fn(f64, f64) -> Result<f64> + '_ {
    move |q, ell| Ok(spec.embedding(q, ell)?.s_ql)
}

fn k_lookup(spec: &ProblemSpec) -> impl Fn(f64, f64) -> Result<f64> + '_ {
    move |q, ell| Ok(spec.embedding(q, ell)?.k_ql)
}

/// `ℰ = ((‖f⃗‖_p²/a_# + 2‖f‖_{p/2}) / min{a_#, b})^{1/2}`.
fn moser_e(spec: &ProblemSpec, b_low: f64) -> Result<f64> {
    let c = &spec.coefficients;
    let p = spec.exponents.p;
    let fp = spec.data.norm(DataFn::Fvec, p)?;
    let f = spec.data.norm(DataFn::F, p / 2.0)?;
    Ok(((fp * fp / c.a_low + 2.0 * f) / c.a_low.min(b_low)).sqrt())
}

/// The De Giorgi ess-sup bound, plus the homogeneous-data variant
/// (`ess_sup_homogeneous`, with `Z_n`) when f = g = h = 0.
pub fn linf_degiorgi(spec: &ProblemSpec) -> Result<BoundReport> {
    let mut b = Builder::new(spec)?;
    b.require(Proposition::DeGiorgi)?;
    let geo = &spec.geometry;
    let nf = geo.n as f64;
    let c = &spec.coefficients;
    let d = spec.derived();
    let (p, r, gamma) = (d.p, d.r, d.gamma);
    let cnpr = b.inter("C_npr", c_npr(&b)?);
    b.inter("gamma", gamma);
    let fp = spec.data.norm(DataFn::Fvec, p)?;
    let hr = spec.data.norm(DataFn::H, r)?;
    let ab = (c.a_low * c.b_low).sqrt();
    let measure = geo.vol_omega + geo.surf_boundary;
    let homogeneous = spec.data.is_zero(DataFn::F)
        && spec.data.is_zero(DataFn::G)
        && spec.data.is_zero(DataFn::H);
    if geo.n > 2 {
        let sk = b.s(2.0, 2.0)? + b.k(2.0, 2.0)?;
        let z = sk
            * ((1.0 / c.a_low + 1.0 / ab) * (fp + cnpr) * geo.vol_omega.powf(0.5 - 1.0 / p - gamma)
                + (1.0 / c.b_low + 1.0 / ab)
                    * (hr + cnpr)
                    * geo.surf_gamma.powf(0.5 - 1.0 / r - gamma * nf / (nf - 1.0)));
        b.inter("Z_script", z);
        let e = gamma - 0.5 + 1.0 / nf;
        b.fin("ess_sup", 1.0 + 2f64.powf(gamma / e) * measure.powf(e) * z);
        if homogeneous {
            let zn = b.inter("Z_n", sk * 2f64.powf(nf * (p - 2.0) / (2.0 * (p - nf))));
            b.fin(
                "ess_sup_homogeneous",
                1.0 + zn * fp * measure.powf(1.0 / nf - 1.0 / p) * (1.0 / c.a_low + 1.0 / ab),
            );
        }
    } else {
        let sk = b.s(1.0, 1.0)? + b.k(1.0, 1.0)?;
        let vol = geo.vol_omega;
        let z_of = |alpha: f64| {
            let w = vol.powf(1.0 / (2.0 * alpha));
            sk * ((w / c.a_low + 1.0 / ab) * (fp + cnpr) * vol.powf(0.5 - 1.0 / p - gamma)
                + (1.0 / c.b_low + w / ab)
                    * (hr + cnpr)
                    * geo.surf_gamma.powf(0.5 - 1.0 / r - 2.0 * gamma))
        };
        let bound_of = |alpha: f64| {
            let ag = alpha * gamma;
            2f64.powf((ag + 0.5) / (ag - 0.5))
                * measure.powf(gamma - 1.0 / (2.0 * alpha))
                * z_of(alpha)
        };
        let lower = 1.0 / (2.0 * gamma);
        let alpha = choose(&mut b, "alpha", d.alpha, lower, |a| Some(bound_of(a)))?;
        b.pin(|s| s.exponents.alpha = Some(alpha));
        b.inter("Z_script", z_of(alpha));
        b.fin("ess_sup", 1.0 + bound_of(alpha));
        if homogeneous {
            let num = (alpha + 1.0) / 2.0 - 1.0 / p;
            let den = (alpha - 1.0) / 2.0 - 1.0 / p;
            let zn = b.inter("Z_n", sk * 2f64.powf(num / den));
            b.fin(
                "ess_sup_homogeneous",
                1.0 + zn
                    * fp
                    * measure.powf((alpha - 1.0) / (2.0 * alpha) - 1.0 / p)
                    * (vol.powf(1.0 / (2.0 * alpha)) / c.a_low + 1.0 / ab),
            );
        }
        b.flag("n = 2 uses S_{1,1}, K_{1,1} as displayed");
    }
    Ok(b.finish(Proposition::DeGiorgi, Operation::DeGiorgi))
}

/// Picks χ for the Moser-type bounds: derived for n > 2, configured or
/// minimized for n = 2.
fn moser_chi(
    b: &mut Builder<'_>,
    name: &str,
    derived: Option<f64>,
    configured: Option<f64>,
    objective: impl FnMut(f64) -> Option<f64>,
) -> Result<f64> {
    if b.spec.geometry.n > 2 {
        let chi = derived.ok_or_else(|| Error::Config(format!("{name} undefined")))?;
        if !(chi > 1.0) {
            return Err(Error::BlowUp {
                parameter: "χ",
                critical: 1.0,
                value: chi,
            });
        }
        b.param(name, chi);
        return Ok(chi);
    }
    if let Some(chi) = configured.filter(|c| !(*c > 1.0)) {
        return Err(Error::Regime {
            proposition: Proposition::Moser,
            violations: vec![format!("{name} = {chi} must exceed 1")],
        });
    }
    choose(b, name, configured, 1.0, objective)
}

/// The Moser ess-sup bound in terms of `u_norm = ‖u‖_{2p/(p-2),Ω}`.
pub fn linf_moser(spec: &ProblemSpec, u_norm: f64) -> Result<BoundReport> {
    let mut b = Builder::new(spec)?;
    b.require(Proposition::Moser)?;
    if !(u_norm >= 0.0) {
        return Err(Error::Config(format!("‖u‖ = {u_norm} must be nonnegative")));
    }
    let p = spec.exponents.p;
    let big_e = moser_e(spec, spec.coefficients.b_low)?;
    let d = spec.derived();
    let chi = moser_chi(&mut b, "chi", d.chi, spec.exponents.chi, |chi| {
        let s = s_lookup(spec);
        let mut f = vec![e_n(spec, p, chi, &s).ok()?, chi_tail_factor(chi).ok()?];
        if big_e > 0.0 {
            f.push((2f64.sqrt() * big_e).powf(chi / (chi - 1.0)));
        }
        ln_product(&f)
    })?;
    b.pin(|s| s.exponents.chi = Some(chi));
    b.param("u_norm", u_norm);
    let en = {
        let bb = &b;
        e_n(spec, p, chi, &|q, l| bb.s(q, l))?
    };
    b.inter("E_script", big_e);
    b.inter("chi", chi);
    b.inter("E_n", en);
    let tail = b.inter("chi_tail_factor", chi_tail_factor(chi)?);
    b.fin(
        "ess_sup",
        en * tail * (2f64.sqrt() * big_e).powf(chi / (chi - 1.0)) * u_norm,
    );
    if spec.geometry.n == 2 {
        b.flag("E_2 uses the index 2pχ/(p(χ+1)-2)");
    }
    Ok(b.finish(Proposition::Moser, Operation::Moser { u_norm }))
}

fn c_inf_value(spec: &ProblemSpec, chi: f64, s: Lookup<'_>) -> Result<f64> {
    let g = &spec.geometry;
    let c = &spec.coefficients;
    let nf = g.n as f64;
    let p = spec.exponents.p;
    let en = e_n(spec, p, chi, s)?;
    let q1 = 2.0 * p * nf / (2.0 * p + nf * (p - 2.0));
    let vol = g.vol_omega;
    Ok(en
        * chi_tail_factor(chi)?
        * (2.0 / (c.a_low * c.a_low.min(c.b_low))).powf(chi / (2.0 * (chi - 1.0)))
        * s(q1, c.ell)?
        * (vol.powf(1.0 / nf - 2.0 / p + 0.5) / c.a_low
            + (c.ell_conjugate() * vol.powf(1.0 - 1.0 / p) / (2.0 * c.a_low * c.b_low))
                .powf(1.0 / c.ell)))
}

/// The L∞ constant `C_∞` with `ess sup|u| ≤ C_∞ ‖f⃗‖_p^{1+χ/(χ-1)}`.
pub fn c_infinity(spec: &ProblemSpec) -> Result<BoundReport> {
    let mut b = Builder::new(spec)?;
    b.require(Proposition::CInfinity)?;
    let p = spec.exponents.p;
    let fp = spec.data.norm(DataFn::Fvec, p)?;
    let d = spec.derived();
    let chi = moser_chi(&mut b, "chi", d.chi, spec.exponents.chi, |chi| {
        let s = s_lookup(spec);
        let mut f = vec![c_inf_value(spec, chi, &s).ok()?];
        if fp > 0.0 {
            f.push(fp.powf(1.0 + chi / (chi - 1.0)));
        }
        ln_product(&f)
    })?;
    b.pin(|s| s.exponents.chi = Some(chi));
    let (ci, en) = {
        let bb = &b;
        (
            c_inf_value(spec, chi, &|q, l| bb.s(q, l))?,
            e_n(spec, p, chi, &|q, l| bb.s(q, l))?,
        )
    };
    b.inter("chi", chi);
    b.inter("E_n", en);
    b.inter("C_infinity", ci);
    b.fin("ess_sup", ci * fp.powf(1.0 + chi / (chi - 1.0)));
    b.flag("C_∞ evaluated as displayed: |Ω|^{1-1/p} in the trace term, ‖f⃗‖_p factored out");
    Ok(b.finish(Proposition::CInfinity, Operation::CInfinity))
}

/// The boundary-data ess-sup bound in terms of
/// `u_trace_norm = ‖u‖_{2s/(s-1),∂Ω}`.
pub fn linf_boundary_data(spec: &ProblemSpec, u_trace_norm: f64) -> Result<BoundReport> {
    let mut b = Builder::new(spec)?;
    b.require(Proposition::BoundaryLinf)?;
    if !(u_trace_norm >= 0.0) {
        return Err(Error::Config(format!(
            "‖u‖ = {u_trace_norm} must be nonnegative"
        )));
    }
    let c = &spec.coefficients;
    let s_exp = spec.exponents.s;
    let gs = spec.data.norm(DataFn::G, s_exp)?;
    let hs = spec.data.norm(DataFn::H, s_exp)?;
    let big_g = ((gs + hs) / c.a_low.min(c.b_low)).sqrt();
    let d = spec.derived();
    let chi = moser_chi(&mut b, "chi2", d.chi2, spec.exponents.chi2, |chi| {
        let k = k_lookup(spec);
        let mut f = vec![g_n(spec, s_exp, chi, &k).ok()?, chi_tail_factor(chi).ok()?];
        if big_g > 0.0 {
            f.push((2f64.sqrt() * big_g).powf(chi / (chi - 1.0)));
        }
        ln_product(&f)
    })?;
    b.pin(|s| s.exponents.chi2 = Some(chi));
    b.param("u_trace_norm", u_trace_norm);
    let gn = {
        let bb = &b;
        g_n(spec, s_exp, chi, &|q, l| bb.k(q, l))?
    };
    b.inter("G_script", big_g);
    b.inter("chi2", chi);
    b.inter("G_n", gn);
    let tail = b.inter("chi_tail_factor", chi_tail_factor(chi)?);
    b.fin(
        "ess_sup",
        gn * tail * (2f64.sqrt() * big_g).powf(chi / (chi - 1.0)) * u_trace_norm,
    );
    Ok(b.finish(
        Proposition::BoundaryLinf,
        Operation::BoundaryData { u_trace_norm },
    ))
}

struct RnParts {
    xi1: f64,
    xi2: f64,
}

fn xi1(spec: &ProblemSpec, chi: f64, s: Lookup<'_>) -> Result<f64> {
    let nf = spec.geometry.n as f64;
    let p = spec.exponents.p;
    let q1 = 2.0 * p * nf / (2.0 * p + nf * (p - 2.0));
    Ok(e_n(spec, p, chi, s)?
        * chi_tail_factor(chi)?
        * 2f64.sqrt().powf(chi / (chi - 1.0))
        * s(q1, spec.coefficients.ell)?
        * (spec.geometry.vol_omega.powf((p - nf) / (nf * p)) + 1.0))
}

fn xi2(spec: &ProblemSpec, chi: f64, k: Lookup<'_>) -> Result<f64> {
    let nf = spec.geometry.n as f64;
    let s_exp = spec.exponents.s;
    let q2 = 2.0 * s_exp * nf / (2.0 * s_exp + (nf - 1.0) * (s_exp - 1.0));
    Ok(g_n(spec, s_exp, chi, k)?
        * chi_tail_factor(chi)?
        * 2f64.sqrt().powf(chi / (chi - 1.0))
        * k(q2, spec.coefficients.ell)?
        * (spec.geometry.vol_omega.powf((s_exp - nf + 1.0) / (2.0 * nf * s_exp)) + 1.0))
}

/// The two-term ess-sup bound for the linear Robin–Neumann problem.
pub fn linear_robin_neumann_bound(spec: &ProblemSpec) -> Result<BoundReport> {
    let mut b = Builder::new(spec)?;
    b.require(Proposition::LinearRN)?;
    let c = &spec.coefficients;
    let e = &spec.exponents;
    let b_star = c.linear_b_star.unwrap_or(c.b_low);
    let m = c.a_low.min(b_star);
    let fp = spec.data.norm(DataFn::Fvec, e.p)?;
    let f_half = spec.data.norm(DataFn::F, e.p / 2.0)?;
    let f2 = spec.data.norm(DataFn::Fvec, 2.0)?;
    let ft = spec.data.norm(DataFn::F, e.t)?;
    let gs = spec.data.norm(DataFn::G, e.s)?;
    let hs = spec.data.norm(DataFn::H, e.s)?;
    let maps = EnergyMaps::new(&b)?;
    let l_n = b.inter("L_n", maps.l_n());
    let m_n = b.inter("M_n", maps.m_n());
    let base1 = (fp * fp / c.a_low + 2.0 * f_half) / m;
    let lin1 = (f2 + l_n * ft) / m;
    let base2 = (gs + hs) / m;
    let lin2 = m_n * (gs + hs) / m;
    let d = spec.derived();
    let with_data = |xi: f64, base: f64, chi: f64| {
        let mut f = vec![xi];
        if base > 0.0 {
            f.push(base.powf(chi / (2.0 * (chi - 1.0))));
        }
        ln_product(&f)
    };
    let chi1 = moser_chi(&mut b, "chi1", d.chi, e.chi, |chi| {
        let s = s_lookup(spec);
        with_data(xi1(spec, chi, &s).ok()?, base1, chi)
    })?;
    let chi2 = moser_chi(&mut b, "chi2", d.chi2, e.chi2, |chi| {
        let k = k_lookup(spec);
        with_data(xi2(spec, chi, &k).ok()?, base2, chi)
    })?;
    b.pin(|s| {
        s.exponents.chi = Some(chi1);
        s.exponents.chi2 = Some(chi2);
    });
    let parts = {
        let bb = &b;
        RnParts {
            xi1: xi1(spec, chi1, &|q, l| bb.s(q, l))?,
            xi2: xi2(spec, chi2, &|q, l| bb.k(q, l))?,
        }
    };
    b.inter("Xi1", parts.xi1);
    b.inter("Xi2", parts.xi2);
    let t1 = b.inter(
        "term_interior",
        parts.xi1 * base1.powf(chi1 / (2.0 * (chi1 - 1.0))) * lin1,
    );
    let t2 = b.inter(
        "term_boundary",
        parts.xi2 * base2.powf(chi2 / (2.0 * (chi2 - 1.0))) * lin2,
    );
    b.fin("ess_sup", t1 + t2);
    Ok(b.finish(Proposition::LinearRN, Operation::LinearRN))
}
