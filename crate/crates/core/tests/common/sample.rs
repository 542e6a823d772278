//! Random regime-valid specs, one family per bound operation.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use radbound_core::bounds::{HPairing, Operation};
use radbound_core::constants::DomainDescriptor;
use radbound_core::model::{CoefficientBounds, DataFn, DataNorms, Exponents, GeometryMeasures, ProblemSpec};

use super::form::Measures;
use super::oracle::{Named, Oracle};

pub type Rng8 = ChaCha8Rng;

/// One sampled point: the spec, the library call, and the oracle's forms.
pub struct Point {
    pub spec: ProblemSpec,
    pub op: Operation,
}

impl Point {
    pub fn forms(&self) -> Named {
        let o = Oracle::new(&self.spec);
        match &self.op {
            Operation::Energy { pairing } => o.energy(*pairing == HPairing::LsVariant),
            Operation::Lq { q, .. } => o.lq(*q),
            Operation::DeGiorgi => o.degiorgi(),
            Operation::Moser { u_norm } => o.moser(*u_norm),
            Operation::CInfinity => o.c_infinity(),
            Operation::BoundaryData { u_trace_norm } => o.boundary(*u_trace_norm),
            Operation::LinearRN => o.linear_rn(),
            Operation::DualityW1q { q } => o.duality(*q),
            other => panic!("no oracle for {other:?}"),
        }
    }

    pub fn measures(&self) -> Measures {
        super::oracle::measures(&self.spec)
    }
}

fn geometry(rng: &mut Rng8, n: u32) -> GeometryMeasures {
    let bdry = rng.random_range(0.3..20.0);
    let gamma = if rng.random_bool(0.3) { bdry } else { bdry * rng.random_range(0.05..1.0) };
    GeometryMeasures {
        n,
        vol_omega: rng.random_range(0.1..10.0),
        surf_boundary: bdry,
        surf_gamma: gamma,
        surf_gamma_n: bdry - gamma,
    }
}

fn coefficients(rng: &mut Rng8, ell: f64, linear: bool) -> CoefficientBounds {
    let a_low = rng.random_range(0.2..3.0);
    let b_low = rng.random_range(0.2..3.0);
    CoefficientBounds {
        a_low,
        a_high: a_low * rng.random_range(1.0..4.0),
        b_low,
        b_high: if linear { b_low } else { b_low * rng.random_range(1.0..3.0) },
        ell: if linear { 2.0 } else { ell },
        linear_b_star: linear.then_some(b_low),
        symmetric: true,
    }
}

fn spec(rng: &mut Rng8, n: u32, ell: f64, linear: bool, e: Exponents) -> ProblemSpec {
    let geometry = geometry(rng, n);
    let coefficients = coefficients(rng, ell, linear);
    let pq = rng.random_range(0.2..3.0);
    ProblemSpec::new(geometry, coefficients, e, DataNorms::default(), DomainDescriptor::Override { value: pq })
}

/// Sets a random norm, zero with probability `zero`.
fn put(rng: &mut Rng8, s: &mut ProblemSpec, which: DataFn, exponent: f64, zero: f64) {
    let v = if rng.random_bool(zero) { 0.0 } else { rng.random_range(0.01..5.0) };
    s.data.set(which, exponent, v);
}

fn clear(s: &mut ProblemSpec, which: DataFn) {
    s.data.entries_mut(which).clear();
}

pub fn energy(rng: &mut Rng8) -> Point {
    let n = rng.random_range(2..=4);
    let nf = n as f64;
    let (t, s_exp) = if n > 2 {
        (2.0 * nf / (nf + 2.0), 2.0 * (nf - 1.0) / nf)
    } else {
        (rng.random_range(1.05..4.0), rng.random_range(1.05..4.0))
    };
    let ell = rng.random_range(2.0..5.0);
    let mut s = spec(rng, n, ell, false, Exponents::new(3.0, 3.0, s_exp, t));
    let ell = s.coefficients.ell;
    put(rng, &mut s, DataFn::Fvec, 2.0, 0.1);
    put(rng, &mut s, DataFn::F, t, 0.1);
    put(rng, &mut s, DataFn::G, s_exp, 0.1);
    put(rng, &mut s, DataFn::H, ell / (ell - 1.0), 0.1);
    put(rng, &mut s, DataFn::H, s_exp, 0.0);
    let pairing = if rng.random_bool(0.5) { HPairing::DualOfEll } else { HPairing::LsVariant };
    Point { spec: s, op: Operation::Energy { pairing } }
}

fn cnpr_data(rng: &mut Rng8, s: &mut ProblemSpec) {
    let nf = s.geometry.n as f64;
    let (p, r) = (s.exponents.p, s.exponents.r);
    put(rng, s, DataFn::Fvec, p, 0.1);
    put(rng, s, DataFn::F, nf * p / (p + nf), 0.2);
    put(rng, s, DataFn::G, (nf - 1.0) * p / nf, 0.2);
    put(rng, s, DataFn::H, r, 0.2);
}

pub fn lq(rng: &mut Rng8) -> Point {
    let n = rng.random_range(3..=5);
    let top = 2.0 * (n as f64 - 1.0);
    let (p, r) = (rng.random_range(2.05..top - 0.05), rng.random_range(2.05..top - 0.05));
    let mut s = spec(rng, n, 2.0, false, Exponents::new(p, r, 2.0, 2.0));
    cnpr_data(rng, &mut s);
    let q_max = Oracle::new(&s).big_q((0.5 - 1.0 / p).min(0.5 - 1.0 / r));
    let q = rng.random_range(1.0..0.95 * q_max);
    Point { spec: s, op: Operation::Lq { q, excess_measure: None } }
}

pub fn degiorgi(rng: &mut Rng8, homogeneous: bool) -> Point {
    let n = rng.random_range(2..=4);
    let nf = n as f64;
    let p = nf + rng.random_range(0.1..8.0);
    let r = 2.0 * (nf - 1.0) + rng.random_range(0.1..8.0);
    let mut s = spec(rng, n, 2.0, false, Exponents::new(p, r, 2.0, 2.0));
    cnpr_data(rng, &mut s);
    if homogeneous {
        for w in [DataFn::F, DataFn::G, DataFn::H] {
            clear(&mut s, w);
        }
    }
    if n == 2 {
        let gamma = (0.5 - 1.0 / p).min((0.5 - 1.0 / r) / 2.0);
        s.exponents.alpha = Some(rng.random_range(1.01..3.0) / (2.0 * gamma));
    }
    Point { spec: s, op: Operation::DeGiorgi }
}

fn plane_chi(rng: &mut Rng8) -> f64 {
    rng.random_range(1.2..6.0)
}

pub fn moser(rng: &mut Rng8) -> Point {
    let n = rng.random_range(2..=4);
    let p = n as f64 + rng.random_range(0.1..8.0);
    let ell = rng.random_range(2.0..5.0);
    let mut s = spec(rng, n, ell, false, Exponents::new(p, 3.0, 2.0, 2.0));
    put(rng, &mut s, DataFn::Fvec, p, 0.1);
    put(rng, &mut s, DataFn::F, p / 2.0, 0.3);
    if n == 2 {
        s.exponents.chi = Some(plane_chi(rng));
    }
    let u_norm = rng.random_range(0.1..10.0);
    Point { spec: s, op: Operation::Moser { u_norm } }
}

pub fn c_infinity(rng: &mut Rng8) -> Point {
    let n = rng.random_range(2..=4);
    let p = n as f64 + rng.random_range(0.1..8.0);
    let ell = rng.random_range(2.0..5.0);
    let mut s = spec(rng, n, ell, false, Exponents::new(p, 3.0, 2.0, 2.0));
    put(rng, &mut s, DataFn::Fvec, p, 0.0);
    if n == 2 {
        s.exponents.chi = Some(plane_chi(rng));
    }
    Point { spec: s, op: Operation::CInfinity }
}

pub fn boundary(rng: &mut Rng8) -> Point {
    let n = rng.random_range(2..=4);
    let s_exp = n as f64 - 1.0 + rng.random_range(0.1..6.0);
    let ell = rng.random_range(2.0..5.0);
    let mut s = spec(rng, n, ell, false, Exponents::new(3.0, 3.0, s_exp, 2.0));
    put(rng, &mut s, DataFn::G, s_exp, 0.2);
    put(rng, &mut s, DataFn::H, s_exp, 0.2);
    if n == 2 {
        s.exponents.chi2 = Some(plane_chi(rng));
    }
    let u = rng.random_range(0.1..10.0);
    Point { spec: s, op: Operation::BoundaryData { u_trace_norm: u } }
}

pub fn linear_rn(rng: &mut Rng8) -> Point {
    let n = rng.random_range(2..=4);
    let nf = n as f64;
    let p = nf + rng.random_range(0.1..8.0);
    let s_exp = nf - 1.0 + rng.random_range(0.1..6.0);
    let t = if n > 2 { 2.0 * nf / (nf + 2.0) } else { rng.random_range(1.05..4.0) };
    let mut s = spec(rng, n, 2.0, true, Exponents::new(p, 3.0, s_exp, t));
    put(rng, &mut s, DataFn::Fvec, p, 0.1);
    put(rng, &mut s, DataFn::Fvec, 2.0, 0.0);
    put(rng, &mut s, DataFn::F, p / 2.0, 0.2);
    put(rng, &mut s, DataFn::F, t, 0.0);
    put(rng, &mut s, DataFn::G, s_exp, 0.2);
    put(rng, &mut s, DataFn::H, s_exp, 0.1);
    if n == 2 {
        s.exponents.chi = Some(plane_chi(rng));
        s.exponents.chi2 = Some(plane_chi(rng));
    }
    Point { spec: s, op: Operation::LinearRN }
}

pub fn duality(rng: &mut Rng8) -> Point {
    loop {
        let n = rng.random_range(3..=5);
        let nf = n as f64;
        let t = rng.random_range(1.02..2.0 * nf / (nf + 2.0));
        let s_exp = rng.random_range(1.02..2.0 * (nf - 1.0) / nf);
        let pm = t.min(s_exp);
        let upper = (2.0 * (nf - 1.0) * pm / (2.0 * (nf - 1.0) - pm)).min(2.0);
        let lower = 2.0 * (nf - 1.0) / (2.0 * nf - 3.0);
        if !(upper > lower) {
            continue;
        }
        let q = lower + (upper - lower) * rng.random_range(0.05..0.95);
        let qc = q / (q - 1.0);
        let big_q = 2.0 * (nf - 1.0) * qc / (2.0 * (nf - 1.0) - qc);
        if !(t / (t - 1.0) < 0.99 * big_q && s_exp / (s_exp - 1.0) < 0.99 * big_q) {
            continue;
        }
        let mut s = spec(rng, n, 2.0, true, Exponents::new(3.0, 3.0, s_exp, t));
        s.coefficients.b_low = 1.0;
        s.coefficients.b_high = 1.0;
        s.coefficients.linear_b_star = Some(1.0);
        put(rng, &mut s, DataFn::F, t, 0.1);
        put(rng, &mut s, DataFn::G, s_exp, 0.2);
        put(rng, &mut s, DataFn::H, s_exp, 0.2);
        return Point { spec: s, op: Operation::DualityW1q { q } };
    }
}

/// Every family, by name.
pub const FAMILIES: [&str; 9] = [
    "energy",
    "lq",
    "de_giorgi",
    "de_giorgi_homogeneous",
    "moser",
    "c_infinity",
    "boundary",
    "linear_rn",
    "duality",
];

pub fn draw(family: &str, rng: &mut Rng8) -> Point {
    match family {
        "energy" => energy(rng),
        "lq" => lq(rng),
        "de_giorgi" => degiorgi(rng, false),
        "de_giorgi_homogeneous" => degiorgi(rng, true),
        "moser" => moser(rng),
        "c_infinity" => c_infinity(rng),
        "boundary" => boundary(rng),
        "linear_rn" => linear_rn(rng),
        "duality" => duality(rng),
        other => panic!("unknown family {other}"),
    }
}
