//! Second, independent evaluation of every closed-form constant.
//!
//! Written from the displayed formulas, not from the library code. Gamma
//! values come from statrs. The deviations recorded for the library (the
//! E₂ index, S_{1,1} in 𝓜_q, K_1 = 1) are reproduced here on purpose: the
//! oracle checks the arithmetic, not those choices.

use std::f64::consts::PI;

use radbound_core::model::{DataFn, DataNorms, ProblemSpec};
use statrs::function::gamma::ln_gamma;

use super::form::{num, Bdry, Form, Gamma, Measures, Vol};

pub type Named = Vec<(&'static str, Form)>;

pub fn talenti_s(q: f64, n: u32) -> f64 {
    let nf = n as f64;
    let ratio = ln_gamma(1.0 + nf / 2.0) + ln_gamma(nf) - ln_gamma(nf / q) - ln_gamma(1.0 + nf - nf / q);
    PI.powf(-0.5) * nf.powf(-1.0 / q) * ((q - 1.0) / (nf - q)).powf(1.0 - 1.0 / q) * (ratio / nf).exp()
}

pub fn talenti_s1(n: u32) -> f64 {
    let nf = n as f64;
    PI.powf(-0.5) / nf * (ln_gamma(1.0 + nf / 2.0) / nf).exp()
}

pub fn talenti_k(q: f64, n: u32) -> f64 {
    let nf = n as f64;
    let a = q * (nf - 1.0) / (2.0 * (q - 1.0));
    let b = (nf - 1.0) / (2.0 * (q - 1.0));
    PI.powf((1.0 - q) / 2.0)
        * ((q - 1.0) / (nf - q)).powf(q - 1.0)
        * ((ln_gamma(a) - ln_gamma(b)) * (q - 1.0) / (nf - 1.0)).exp()
}

/// Σ_{m≥0} m χ^{-m}, summed until the terms stop mattering.
pub fn tail_sum(chi: f64) -> f64 {
    let mut sum = 0.0;
    let mut m = 1.0;
    loop {
        let term = m * chi.powf(-m);
        sum += term;
        if term < 1e-18 * sum && m > chi / (chi - 1.0) {
            return sum;
        }
        m += 1.0;
    }
}

pub fn measures(spec: &ProblemSpec) -> Measures {
    Measures {
        vol: spec.geometry.vol_omega,
        gamma: spec.geometry.surf_gamma,
        bdry: spec.geometry.surf_boundary,
    }
}

/// The norm of `which` at `exponent`; panics if the sampler did not record it.
pub fn norm(d: &DataNorms, which: DataFn, exponent: f64) -> f64 {
    let list = d.entries(which);
    if list.iter().all(|e| e.value == 0.0) {
        return 0.0;
    }
    list.iter()
        .find(|e| (e.exponent - exponent).abs() <= 1e-9 * exponent.max(1.0))
        .map(|e| e.value)
        .unwrap_or_else(|| panic!("oracle: no norm of {which:?} at {exponent}"))
}

pub struct Oracle<'a> {
    pub spec: &'a ProblemSpec,
    pub n: u32,
    nf: f64,
    /// Poincaré constant, fixed by override.
    pq: f64,
}

impl<'a> Oracle<'a> {
    pub fn new(spec: &'a ProblemSpec) -> Self {
        let pq = match spec.poincare {
            radbound_core::constants::DomainDescriptor::Override { value } => value,
            _ => panic!("the oracle needs an overridden Poincaré constant"),
        };
        Oracle {
            spec,
            n: spec.geometry.n,
            nf: spec.geometry.n as f64,
            pq,
        }
    }

    fn factor(&self, q: f64, ell: f64) -> Form {
        let first = 1.0 + self.pq * 2f64.powf((self.nf - 1.0) * (1.0 - 1.0 / q));
        num(first).max(self.pq * Gamma.powf(1.0 / q - 1.0 / ell))
    }

    /// S_{q,ℓ}
    pub fn s(&self, q: f64, ell: f64) -> Form {
        let base = if q == 1.0 { talenti_s1(self.n) } else { talenti_s(q, self.n) };
        base * self.factor(q, ell)
    }

    /// K_{q,ℓ}
    pub fn k(&self, q: f64, ell: f64) -> Form {
        let base = if q == 1.0 { 1.0 } else { talenti_k(q, self.n) };
        base * self.factor(q, ell)
    }

    fn d(&self, which: DataFn, exponent: f64) -> f64 {
        norm(&self.spec.data, which, exponent)
    }

    fn a(&self) -> f64 {
        self.spec.coefficients.a_low
    }

    fn b(&self) -> f64 {
        self.spec.coefficients.b_low
    }

    fn ell(&self) -> f64 {
        self.spec.coefficients.ell
    }

    /// (ℋ coefficients of A and B, ℱ weights of A and B)
    fn energy_maps(&self) -> (Form, Form, Form, Form) {
        let (t, s, ell) = (self.spec.exponents.t, self.spec.exponents.s, self.ell());
        if self.n > 2 {
            return (self.s(2.0, ell), self.k(2.0, ell), num(1.0), num(1.0));
        }
        let kb = self.k(2.0 * s / (2.0 * s - 1.0), ell);
        let fb = Vol.powf(1.0 / (2.0 * s / (s - 1.0)));
        if t < 2.0 {
            (self.s(2.0 * t / (3.0 * t - 2.0), ell), kb, Vol.powf((t - 1.0) / t), fb)
        } else {
            (self.s(1.0, ell) * Vol.powf(0.5 - 1.0 / t), kb, Vol.powf(0.5), fb)
        }
    }

    /// 𝒜 with ℋ_n, ℱ_n; `ls` selects the variant with h in L^s.
    pub fn energy(&self, ls: bool) -> Named {
        let e = &self.spec.exponents;
        let ell = self.ell();
        let ellc = ell / (ell - 1.0);
        let (ha, hb, wa, wb) = self.energy_maps();
        let ft = self.d(DataFn::F, e.t);
        let mut gs = self.d(DataFn::G, e.s);
        let hterm = if ls {
            gs += self.d(DataFn::H, e.s);
            0.0
        } else {
            self.d(DataFn::H, ellc)
        };
        let h_val = ha.clone() * ft + hb.clone() * gs;
        let f_val = ha * wa * ft + hb * wb * gs;
        let fv2 = self.d(DataFn::Fvec, 2.0);
        let grad = (f_val.clone() + fv2).powf(2.0) / (2.0 * self.a());
        let trace = (ell - 1.0) / (ell * self.b().powf(1.0 / (ell - 1.0))) * (h_val.clone() + hterm).powf(ellc);
        let a_script = grad.clone() + trace.clone();
        vec![
            ("F_n", f_val),
            ("H_n", h_val),
            ("A_script_grad", grad),
            ("A_script_trace", trace),
            ("A_script", a_script.clone()),
            ("grad_l2", (a_script.clone() * (2.0 / self.a())).sqrt()),
            ("trace_ell", (a_script * (ellc / self.b())).powf(1.0 / ell)),
        ]
    }

    /// C_{n,p,r}
    pub fn c_npr(&self) -> Form {
        let (p, r, nf) = (self.spec.exponents.p, self.spec.exponents.r, self.nf);
        let (pc, rc) = (p / (p - 1.0), r / (r - 1.0));
        self.s(pc, rc) * self.d(DataFn::F, nf * p / (p + nf)) + self.k(pc, rc) * self.d(DataFn::G, (nf - 1.0) * p / nf)
    }

    pub fn big_q(&self, delta: f64) -> f64 {
        2.0 * (self.nf - 1.0) / (self.nf - 2.0 - 2.0 * (self.nf - 1.0) * delta)
    }

    /// 𝒦_{q,δ}
    pub fn k_qdelta(&self, q: f64, delta: f64) -> Form {
        let nf = self.nf;
        let bq = self.big_q(delta);
        let e = 1.0 / q - 1.0 / bq;
        2f64.powf((nf - 2.0) / (nf - 2.0 - 2.0 * (nf - 1.0) * delta))
            * (bq / (bq - q)).powf(1.0 / q)
            * (Vol.powf(e) + Bdry.powf(e))
    }

    /// The bracket shared by ℬ and 𝒵_n, with the |Ω| and |Γ| exponents
    /// and the optional |Ω|^{1/(2α)} weights.
    fn bracket(&self, e_vol: f64, e_gamma: f64, weight: Form) -> Form {
        let (a, b) = (self.a(), self.b());
        let ab = (a * b).sqrt();
        let e = &self.spec.exponents;
        let c = self.c_npr();
        let fp = self.d(DataFn::Fvec, e.p);
        let hr = self.d(DataFn::H, e.r);
        (weight.clone() / a + 1.0 / ab) * (c.clone() + fp) * Vol.powf(e_vol)
            + (1.0 / b + weight / ab) * (c + hr) * Gamma.powf(e_gamma)
    }

    pub fn lq(&self, q: f64) -> Named {
        let (p, r, nf) = (self.spec.exponents.p, self.spec.exponents.r, self.nf);
        let delta = (0.5 - 1.0 / p).min(0.5 - 1.0 / r);
        let lead = Vol.powf((nf - 2.0) / (2.0 * (nf - 1.0) * nf)) * self.s(2.0, 2.0) + self.k(2.0, 2.0);
        let bb = lead * self.bracket(0.5 - 1.0 / p - delta, 0.5 - 1.0 / r - delta, num(1.0));
        let kk = self.k_qdelta(q, delta);
        let excess = (Vol + Bdry).powf((nf - 2.0) / (2.0 * (nf - 1.0)) - delta);
        vec![
            ("delta", num(delta)),
            ("Q", num(self.big_q(delta))),
            ("C_npr", self.c_npr()),
            ("B_script", bb.clone()),
            ("K_qdelta", kk.clone()),
            ("lq_norm", kk * (bb + 2.0 * excess)),
        ]
    }

    pub fn degiorgi(&self) -> Named {
        let e = &self.spec.exponents;
        let (p, r, nf) = (e.p, e.r, self.nf);
        let (a, b) = (self.a(), self.b());
        let ab = (a * b).sqrt();
        let gamma = (0.5 - 1.0 / p).min((0.5 - 1.0 / r) * (nf - 1.0) / nf);
        let d = &self.spec.data;
        let homogeneous = [DataFn::F, DataFn::G, DataFn::H]
            .iter()
            .all(|w| d.entries(*w).iter().all(|x| x.value == 0.0));
        let fp = self.d(DataFn::Fvec, p);
        let mut out = vec![("C_npr", self.c_npr()), ("gamma", num(gamma))];
        if self.n > 2 {
            let sk = self.s(2.0, 2.0) + self.k(2.0, 2.0);
            let z = sk.clone() * self.bracket(0.5 - 1.0 / p - gamma, 0.5 - 1.0 / r - gamma * nf / (nf - 1.0), num(1.0));
            let ex = gamma - 0.5 + 1.0 / nf;
            out.push(("Z_script", z.clone()));
            out.push(("ess_sup", 1.0 + 2f64.powf(gamma / ex) * (Vol + Bdry).powf(ex) * z));
            if homogeneous {
                let zn = sk * 2f64.powf(nf * (p - 2.0) / (2.0 * (p - nf)));
                out.push(("Z_n", zn.clone()));
                out.push((
                    "ess_sup_homogeneous",
                    1.0 + zn * fp * (Vol + Bdry).powf(1.0 / nf - 1.0 / p) * (1.0 / a + 1.0 / ab),
                ));
            }
        } else {
            let alpha = e.alpha.expect("oracle: α must be configured at n = 2");
            let sk = self.s(1.0, 1.0) + self.k(1.0, 1.0);
            let w = Vol.powf(1.0 / (2.0 * alpha));
            let z = sk.clone() * self.bracket(0.5 - 1.0 / p - gamma, 0.5 - 1.0 / r - 2.0 * gamma, w.clone());
            let ag = alpha * gamma;
            out.push(("Z_script", z.clone()));
            out.push((
                "ess_sup",
                1.0 + 2f64.powf((ag + 0.5) / (ag - 0.5)) * (Vol + Bdry).powf(gamma - 1.0 / (2.0 * alpha)) * z,
            ));
            if homogeneous {
                let zn = sk * 2f64.powf(((alpha + 1.0) / 2.0 - 1.0 / p) / ((alpha - 1.0) / 2.0 - 1.0 / p));
                out.push(("Z_n", zn.clone()));
                out.push((
                    "ess_sup_homogeneous",
                    1.0 + zn * fp * (Vol + Bdry).powf((alpha - 1.0) / (2.0 * alpha) - 1.0 / p) * (w / a + 1.0 / ab),
                ));
            }
        }
        out
    }

    fn chi(&self) -> f64 {
        let (p, nf) = (self.spec.exponents.p, self.nf);
        if self.n > 2 {
            nf * (p - 2.0) / (p * (nf - 2.0))
        } else {
            self.spec.exponents.chi.expect("oracle: χ must be configured at n = 2")
        }
    }

    fn chi2(&self) -> f64 {
        let (s, nf) = (self.spec.exponents.s, self.nf);
        if self.n > 2 {
            (s - 1.0) * (nf - 1.0) / (s * (nf - 2.0))
        } else {
            self.spec.exponents.chi2.expect("oracle: χ₂ must be configured at n = 2")
        }
    }

    /// E_n
    pub fn e_n(&self, chi: f64) -> Form {
        let p = self.spec.exponents.p;
        let pw = chi / (chi - 1.0);
        if self.n > 2 {
            return self.s(2.0, 2.0).powf(pw);
        }
        let sigma = 2.0 * p * chi / (p * (chi + 1.0) - 2.0);
        let ex = (p - 2.0) / (2.0 * p * (chi - 1.0));
        self.s(sigma, sigma).powf(pw) * Vol.powf(ex).max(Gamma.powf(ex))
    }

    /// G_n
    pub fn g_n(&self, chi: f64) -> Form {
        let s = self.spec.exponents.s;
        let pw = chi / (chi - 1.0);
        if self.n > 2 {
            return self.k(2.0, 2.0).powf(pw);
        }
        let sigma = 4.0 * s * chi / (2.0 * s * chi + s - 1.0);
        let ex = (s - 1.0) / (4.0 * s * (chi - 1.0));
        self.k(sigma, sigma).powf(pw) * Vol.powf(ex).max(Gamma.powf(ex))
    }

    pub fn moser(&self, u_norm: f64) -> Named {
        let p = self.spec.exponents.p;
        let fp = self.d(DataFn::Fvec, p);
        let f = self.d(DataFn::F, p / 2.0);
        let big_e = ((fp * fp / self.a() + 2.0 * f) / self.a().min(self.b())).sqrt();
        let chi = self.chi();
        let en = self.e_n(chi);
        let tail = chi.powf(tail_sum(chi));
        vec![
            ("E_script", num(big_e)),
            ("chi", num(chi)),
            ("E_n", en.clone()),
            ("chi_tail_factor", num(tail)),
            ("ess_sup", en * tail * (2f64.sqrt() * big_e).powf(chi / (chi - 1.0)) * u_norm),
        ]
    }

    pub fn c_infinity(&self) -> Named {
        let (p, nf, a, b, ell) = (self.spec.exponents.p, self.nf, self.a(), self.b(), self.ell());
        let chi = self.chi();
        let en = self.e_n(chi);
        let idx = 2.0 * p * nf / (2.0 * p + nf * (p - 2.0));
        let ci = en.clone()
            * chi.powf(tail_sum(chi))
            * (2.0 / (a * a.min(b))).powf(chi / (2.0 * (chi - 1.0)))
            * self.s(idx, ell)
            * (Vol.powf(1.0 / nf - 2.0 / p + 0.5) / a
                + (ell / (ell - 1.0) / (2.0 * a * b) * Vol.powf(1.0 - 1.0 / p)).powf(1.0 / ell));
        let fp = self.d(DataFn::Fvec, p);
        vec![
            ("chi", num(chi)),
            ("E_n", en),
            ("C_infinity", ci.clone()),
            ("ess_sup", ci * fp.powf(1.0 + chi / (chi - 1.0))),
        ]
    }

    pub fn boundary(&self, u_trace: f64) -> Named {
        let s = self.spec.exponents.s;
        let big_g = ((self.d(DataFn::G, s) + self.d(DataFn::H, s)) / self.a().min(self.b())).sqrt();
        let chi = self.chi2();
        let gn = self.g_n(chi);
        vec![
            ("G_script", num(big_g)),
            ("chi2", num(chi)),
            ("G_n", gn.clone()),
            ("chi_tail_factor", num(chi.powf(tail_sum(chi)))),
            ("ess_sup", gn * chi.powf(tail_sum(chi)) * (2f64.sqrt() * big_g).powf(chi / (chi - 1.0)) * u_trace),
        ]
    }

    pub fn linear_rn(&self) -> Named {
        let e = &self.spec.exponents;
        let (p, s, t, nf, a, ell) = (e.p, e.s, e.t, self.nf, self.a(), self.ell());
        let m = a.min(self.spec.coefficients.linear_b_star.expect("oracle: linear law"));
        let (chi1, chi2) = (self.chi(), self.chi2());
        let xi1 = self.e_n(chi1)
            * chi1.powf(tail_sum(chi1))
            * 2f64.sqrt().powf(chi1 / (chi1 - 1.0))
            * self.s(2.0 * p * nf / (2.0 * p + nf * (p - 2.0)), ell)
            * (Vol.powf((p - nf) / (nf * p)) + 1.0);
        let xi2 = self.g_n(chi2)
            * chi2.powf(tail_sum(chi2))
            * 2f64.sqrt().powf(chi2 / (chi2 - 1.0))
            * self.k(2.0 * s * nf / (2.0 * s + (nf - 1.0) * (s - 1.0)), ell)
            * (Vol.powf((s - nf + 1.0) / (2.0 * nf * s)) + 1.0);
        let (l_n, m_n) = if self.n > 2 {
            (2.0 * self.s(2.0, ell), 2.0 * self.k(2.0, ell))
        } else {
            let l = if t < 2.0 {
                (Vol.powf((t - 1.0) / t) + 1.0) * self.s(2.0 * t / (3.0 * t - 2.0), ell)
            } else {
                (Vol.powf(0.5) + 1.0) * Vol.powf(0.5 - 1.0 / t) * self.s(1.0, ell)
            };
            let mm = (Vol.powf((s - 1.0) / (2.0 * s)) + 1.0) * self.k(2.0 * s / (2.0 * s - 1.0), ell);
            (l, mm)
        };
        let d = |w, x| self.d(w, x);
        let base1 = (d(DataFn::Fvec, p).powi(2) / a + 2.0 * d(DataFn::F, p / 2.0)) / m;
        let gh = d(DataFn::G, s) + d(DataFn::H, s);
        let t1 = xi1.clone()
            * base1.powf(chi1 / (2.0 * (chi1 - 1.0)))
            * (l_n.clone() * d(DataFn::F, t) + d(DataFn::Fvec, 2.0))
            / m;
        let t2 = xi2.clone() * (gh / m).powf(chi2 / (2.0 * (chi2 - 1.0))) * m_n.clone() * gh / m;
        vec![
            ("L_n", l_n),
            ("M_n", m_n),
            ("Xi1", xi1),
            ("Xi2", xi2),
            ("term_interior", t1.clone()),
            ("term_boundary", t2.clone()),
            ("ess_sup", t1 + t2),
        ]
    }

    pub fn duality(&self, q: f64) -> Named {
        let e = &self.spec.exponents;
        let (nf, a) = (self.nf, self.a());
        let qc = q / (q - 1.0);
        let delta = 0.5 - 1.0 / qc;
        let kt = self.k_qdelta(e.t / (e.t - 1.0), delta);
        let ks = self.k_qdelta(e.s / (e.s - 1.0), delta);
        let m_q = Vol.powf((nf - 2.0) / (2.0 * (nf - 1.0) * nf)) * self.s(2.0, 2.0)
            + self.k(2.0, 2.0)
            + 2.0
                * Vol.powf(1.0 / q - 0.5)
                * (self.s(1.0, 1.0) * (Vol.powf(0.5 + 1.0 / nf) + Bdry.powf(0.5 + 1.0 / nf))
                    + self.k(1.0, 1.0) * (Vol.powf(0.5) + Bdry.powf(0.5)));
        let data = kt.clone() * self.d(DataFn::F, e.t) + ks.clone() * (self.d(DataFn::G, e.s) + self.d(DataFn::H, e.s));
        vec![
            ("delta", num(delta)),
            ("Q", num(self.big_q(delta))),
            ("K_tprime", kt),
            ("K_sprime", ks),
            ("M_script_q", m_q.clone()),
            ("grad_lq", m_q * (1.0 / a + 1.0 / a.sqrt()) * data),
        ]
    }
}
