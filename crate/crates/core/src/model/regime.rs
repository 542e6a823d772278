use serde::{Deserialize, Serialize};

use super::{DataFn, ProblemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Proposition {
    Energy,
    Lq,
    DeGiorgi,
    Moser,
    CInfinity,
    BoundaryLinf,
    #[serde(rename = "linear_rn")]
    LinearRN,
    L1Data,
    Green,
    DualityW1q,
}

impl Proposition {
    pub const ALL: [Proposition; 10] = [
        Proposition::Energy,
        Proposition::Lq,
        Proposition::DeGiorgi,
        Proposition::Moser,
        Proposition::CInfinity,
        Proposition::BoundaryLinf,
        Proposition::LinearRN,
        Proposition::L1Data,
        Proposition::Green,
        Proposition::DualityW1q,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Proposition::Energy => "energy",
            Proposition::Lq => "lq",
            Proposition::DeGiorgi => "de_giorgi",
            Proposition::Moser => "moser",
            Proposition::CInfinity => "c_infinity",
            Proposition::BoundaryLinf => "boundary_linf",
            Proposition::LinearRN => "linear_rn",
            Proposition::L1Data => "l1_data",
            Proposition::Green => "green",
            Proposition::DualityW1q => "duality_w1q",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub proposition: Proposition,
    pub applicable: bool,
    pub violations: Vec<String>,
}

const P_GT_N: &str = "p>n≥2";
const ELL_GE_2: &str = "ℓ≥2";
const G_ZERO: &str = "g=0 on Γ_N";
const H_ZERO: &str = "h=0 on Γ";
const F_ZERO: &str = "f=0 in Ω";
const FVEC_ZERO: &str = "f⃗=0 in Ω";
const SYMMETRIC: &str = "A symmetric";
const LINEAR_B: &str = "b(u)=b_*u on Γ";

/// Hypotheses of each proposition, in the order they are checked.
pub fn hypotheses(proposition: Proposition) -> Vec<&'static str> {
    match proposition {
        Proposition::Energy => vec![
            ELL_GE_2,
            "t=2n/(n+2) if n>2, t>1 if n=2",
            "s=2(n−1)/n if n>2, s>1 if n=2",
        ],
        Proposition::Lq => vec!["2<p<2(n−1)", "2<r<2(n−1)"],
        Proposition::DeGiorgi => vec![P_GT_N, "r>2(n−1)"],
        Proposition::Moser => vec![P_GT_N, ELL_GE_2, G_ZERO, H_ZERO],
        Proposition::CInfinity => vec![P_GT_N, ELL_GE_2, F_ZERO, G_ZERO, H_ZERO],
        Proposition::BoundaryLinf => vec!["s>n−1", FVEC_ZERO, F_ZERO],
        Proposition::LinearRN => vec![LINEAR_B, "ℓ=2", P_GT_N, "s>n−1"],
        Proposition::L1Data => vec![SYMMETRIC, FVEC_ZERO, ELL_GE_2],
        Proposition::Green => vec![SYMMETRIC, ELL_GE_2],
        Proposition::DualityW1q => vec![
            "n>2",
            "b(u)=b_*u on Γ with b_*=1",
            SYMMETRIC,
            FVEC_ZERO,
            "t≤2n/(n+2)",
            "s≤2(n−1)/n",
        ],
    }
}

fn holds(spec: &ProblemSpec, hypothesis: &str) -> bool {
    let n = spec.geometry.n as f64;
    let e = &spec.exponents;
    let c = &spec.coefficients;
    let tol = 1e-12;
    match hypothesis {
        "p>n≥2" => e.p > n && n >= 2.0,
        "ℓ≥2" => c.ell >= 2.0,
        "ℓ=2" => c.ell == 2.0,
        "g=0 on Γ_N" => spec.data.is_zero(DataFn::G),
        "h=0 on Γ" => spec.data.is_zero(DataFn::H),
        "f=0 in Ω" => spec.data.is_zero(DataFn::F),
        "f⃗=0 in Ω" => spec.data.is_zero(DataFn::Fvec),
        "A symmetric" => c.symmetric,
        "b(u)=b_*u on Γ" => c.linear_b_star.is_some(),
        "b(u)=b_*u on Γ with b_*=1" => c.linear_b_star == Some(1.0),
        "t=2n/(n+2) if n>2, t>1 if n=2" => {
            if n > 2.0 {
                (e.t - 2.0 * n / (n + 2.0)).abs() <= tol
            } else {
                e.t > 1.0
            }
        }
        "s=2(n−1)/n if n>2, s>1 if n=2" => {
            if n > 2.0 {
                (e.s - 2.0 * (n - 1.0) / n).abs() <= tol
            } else {
                e.s > 1.0
            }
        }
        "2<p<2(n−1)" => 2.0 < e.p && e.p < 2.0 * (n - 1.0),
        "2<r<2(n−1)" => 2.0 < e.r && e.r < 2.0 * (n - 1.0),
        "r>2(n−1)" => e.r > 2.0 * (n - 1.0),
        "s>n−1" => e.s > n - 1.0,
        "n>2" => n > 2.0,
        "t≤2n/(n+2)" => e.t <= 2.0 * n / (n + 2.0) + tol,
        "s≤2(n−1)/n" => e.s <= 2.0 * (n - 1.0) / n + tol,
        other => unreachable!("unknown hypothesis {other}"),
    }
}

/// Which hypotheses of `proposition` the instance satisfies.
pub fn check_regime(spec: &ProblemSpec, proposition: Proposition) -> RegimeReport {
    let n = spec.geometry.n;
    let violations: Vec<String> = hypotheses(proposition)
        .into_iter()
        .filter(|h| !holds(spec, h))
        .map(|h| {
            if proposition == Proposition::Lq && n == 2 {
                format!("{h} unsatisfiable at n=2")
            } else {
                format!("{h} required")
            }
        })
        .collect();
    RegimeReport {
        proposition,
        applicable: violations.is_empty(),
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::DomainDescriptor;
    use crate::model::{CoefficientBounds, DataNorms, Exponents, GeometryMeasures};

    fn spec(n: u32, p: f64, r: f64) -> ProblemSpec {
        let geometry = if n == 2 {
            GeometryMeasures::rectangle(1.0, 1.0, 4.0)
        } else {
            GeometryMeasures {
                n,
                vol_omega: 1.0,
                surf_boundary: 6.0,
                surf_gamma: 6.0,
                surf_gamma_n: 0.0,
            }
        };
        ProblemSpec::new(
            geometry,
            CoefficientBounds {
                a_low: 1.0,
                a_high: 1.0,
                b_low: 1.0,
                b_high: 1.0,
                ell: 2.0,
                linear_b_star: None,
                symmetric: false,
            },
            Exponents::new(p, r, 2.0, 2.0),
            DataNorms::default(),
            DomainDescriptor::Override { value: 1.0 },
        )
    }

    #[test]
    fn lq_empty_at_n2() {
        for p in [2.5, 3.0, 10.0] {
            let rep = check_regime(&spec(2, p, p), Proposition::Lq);
            assert!(!rep.applicable);
            assert_eq!(rep.violations[0], "2<p<2(n−1) unsatisfiable at n=2");
        }
    }

    #[test]
    fn lq_applicable_at_n3() {
        assert!(check_regime(&spec(3, 3.5, 3.5), Proposition::Lq).applicable);
    }

    #[test]
    fn moser_needs_vanishing_g() {
        let mut s = spec(3, 4.0, 5.0);
        s.data.set(DataFn::G, 2.0, 0.3);
        let rep = check_regime(&s, Proposition::Moser);
        assert_eq!(rep.violations, vec!["g=0 on Γ_N required".to_string()]);
    }

    #[test]
    fn linear_rn_needs_linear_law() {
        let mut s = spec(2, 4.0, 4.0);
        s.exponents.s = 2.0;
        let rep = check_regime(&s, Proposition::LinearRN);
        assert_eq!(rep.violations, vec!["b(u)=b_*u on Γ required".to_string()]);
        s.coefficients.linear_b_star = Some(1.0);
        assert!(check_regime(&s, Proposition::LinearRN).applicable);
    }
}
