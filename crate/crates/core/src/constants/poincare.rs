//! Poincaré-type constant `P_q` for
//! `‖v‖_q ≤ P_q (Σᵢ ‖∂ᵢv‖_q + |Γ|^{1/q-1} |∫_Γ v|)`.
//!
//! The constant is data for every downstream bound. Canonical shapes
//! (rectangles, intervals) get a numerical estimate; anything else needs an
//! explicit override.
//!
//! The estimate is the supremum of the quotient
//! `‖v‖_q / (Σᵢ‖∂ᵢv‖_q + |Γ|^{1/q-1}|∫_Γ v|)` over the trial family
//! `span{cos(iπx/W)cos(jπy/H) : 0 ≤ i,j ≤ 3} ⊕ span{ξ, η, ξ², η², ξη}`
//! (ξ = x/W, η = y/H; on an interval `cos(iπx/L)`, i ≤ 6, and ξ, ξ²),
//! found by projected gradient ascent, multiplied by [`SAFETY_FACTOR`].
//! For q = 2 it is additionally bounded below by the spectral route
//! `max{(|Ω|/|Γ|)^{1/2}, μ^{-1/2}}`, where μ is the first Neumann eigenvalue
//! on `{v : ∫_Γ v = 0}`.

use std::sync::Arc;

use once_cell::sync::OnceCell;
use serde::{Deserialize, Serialize};

use super::ConstantError;

/// Inflation applied to every numerically estimated `P_q`.
pub const SAFETY_FACTOR: f64 = 1.1;

/// Exponent grid used by [`PoincareEstimator`]: 1.00, 1.05, …, 4.00.
const GRID_START: f64 = 1.0;
const GRID_STEP: f64 = 0.05;
const GRID_NODES: usize = 61;

/// Which sides of an axis-aligned rectangle belong to Γ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectangleSides {
    pub bottom: bool,
    pub right: bool,
    pub top: bool,
    pub left: bool,
}

impl RectangleSides {
    pub const ALL: RectangleSides = RectangleSides {
        bottom: true,
        right: true,
        top: true,
        left: true,
    };

    pub const BOTTOM: RectangleSides = RectangleSides {
        bottom: true,
        right: false,
        top: false,
        left: false,
    };

    pub fn any(&self) -> bool {
        self.bottom || self.right || self.top || self.left
    }

    /// |Γ| for a `width × height` rectangle.
    pub fn gamma_length(&self, width: f64, height: f64) -> f64 {
        let mut total = 0.0;
        if self.bottom {
            total += width;
        }
        if self.top {
            total += width;
        }
        if self.left {
            total += height;
        }
        if self.right {
            total += height;
        }
        total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainDescriptor {
    Rectangle {
        width: f64,
        height: f64,
        gamma: RectangleSides,
    },
    /// `[0, length]`; Γ is a nonempty subset of the two endpoints.
    Interval {
        length: f64,
        gamma_left: bool,
        gamma_right: bool,
    },
    /// The same user-supplied `P_q` for every q.
    Override { value: f64 },
    /// User-supplied values at specific exponents.
    OverrideTable { entries: Vec<PoincareEntry> },
    /// A shape without an estimator; needs an override.
    Other { description: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoincareEntry {
    pub q: f64,
    pub value: f64,
}

fn check_q(q: f64) -> Result<(), ConstantError> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(ConstantError::Domain {
            function: "poincare_constant",
            value: q,
            requirement: "1 ≤ q < ∞",
        });
    }
    Ok(())
}

/// `P_q` for `domain`, estimated directly at `q` (no caching).
pub fn poincare_constant(domain: &DomainDescriptor, q: f64) -> Result<f64, ConstantError> {
    check_q(q)?;
    match domain {
        DomainDescriptor::Override { value } => {
            if *value > 0.0 && value.is_finite() {
                Ok(*value)
            } else {
                Err(ConstantError::Configuration(format!(
                    "override value {value} must be positive"
                )))
            }
        }
        DomainDescriptor::OverrideTable { entries } => entries
            .iter()
            .find(|e| (e.q - q).abs() <= 1e-12 * q.max(1.0))
            .map(|e| e.value)
            .ok_or_else(|| {
                ConstantError::Configuration(format!("override table has no entry for q = {q}"))
            }),
        DomainDescriptor::Other { description } => Err(ConstantError::Configuration(format!(
            "no estimator for domain '{description}'; supply an override"
        ))),
        DomainDescriptor::Rectangle { .. } | DomainDescriptor::Interval { .. } => {
            let family = SampledFamily::for_domain(domain)?;
            let mut estimate = family.supremum(q);
            if (q - 2.0).abs() < 1e-14 {
                estimate = estimate.max(spectral_p2(domain)?);
            }
            Ok(SAFETY_FACTOR * estimate)
        }
    }
}

/// Cached `P_q` provider. For canonical shapes the value at `q` is the
/// larger of the two bracketing grid-node estimates, so nearby exponents
/// share work.
#[derive(Debug, Clone)]
pub struct PoincareEstimator {
    domain: DomainDescriptor,
    nodes: Arc<Vec<OnceCell<f64>>>,
}

impl PoincareEstimator {
    pub fn new(domain: DomainDescriptor) -> Self {
        let nodes = (0..GRID_NODES).map(|_| OnceCell::new()).collect();
        PoincareEstimator {
            domain,
            nodes: Arc::new(nodes),
        }
    }

    pub fn domain(&self) -> &DomainDescriptor {
        &self.domain
    }

    fn node(&self, index: usize) -> Result<f64, ConstantError> {
        let q = GRID_START + GRID_STEP * index as f64;
        self.nodes[index]
            .get_or_try_init(|| poincare_constant(&self.domain, q))
            .copied()
    }

    pub fn value(&self, q: f64) -> Result<f64, ConstantError> {
        check_q(q)?;
        match &self.domain {
            DomainDescriptor::Rectangle { .. } | DomainDescriptor::Interval { .. } => {
                let pos = (q - GRID_START) / GRID_STEP;
                let lo = pos.floor();
                if lo as usize >= GRID_NODES - 1 && pos > (GRID_NODES - 1) as f64 + 1e-9 {
                    return Err(ConstantError::Domain {
                        function: "PoincareEstimator::value",
                        value: q,
                        requirement: "q ≤ 4 for the cached estimator",
                    });
                }
                let lo_idx = lo as usize;
                if (pos - lo).abs() < 1e-9 {
                    return self.node(lo_idx);
                }
                if (lo + 1.0 - pos).abs() < 1e-9 {
                    return self.node(lo_idx + 1);
                }
                Ok(self.node(lo_idx)?.max(self.node(lo_idx + 1)?))
            }
            other => poincare_constant(other, q),
        }
    }
}

/// Lower bound on the quotient at q = 2 via the constrained Neumann
/// eigenvalue, computed from the secular equation of the cosine basis.
pub fn spectral_p2(domain: &DomainDescriptor) -> Result<f64, ConstantError> {
    // (κ, d²) for modes touching the constraint; unconstrained eigenvalues separately
    let (modes, free_min, volume, gamma): (Vec<(f64, f64)>, f64, f64, f64) = match domain {
        DomainDescriptor::Rectangle {
            width,
            height,
            gamma,
        } => {
            if !gamma.any() {
                return Err(ConstantError::Configuration("Γ must be nonempty".into()));
            }
            let (w, h) = (*width, *height);
            let terms = 20_000usize;
            let mut modes = Vec::new();
            // only i = 0 or j = 0 modes have nonzero Γ-integrals
            let horizontal = gamma.bottom || gamma.top;
            let vertical = gamma.left || gamma.right;
            for j in 0..terms {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                let c = w * (gamma.bottom as u8 as f64 + gamma.top as u8 as f64 * sign)
                    + if j == 0 {
                        h * (gamma.left as u8 as f64 + gamma.right as u8 as f64)
                    } else {
                        0.0
                    };
                let mass = w * h * if j == 0 { 1.0 } else { 0.5 };
                let kappa = (j as f64 * std::f64::consts::PI / h).powi(2);
                if c != 0.0 {
                    modes.push((kappa, c * c / mass));
                }
            }
            for i in 1..terms {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                let c = h * (gamma.left as u8 as f64 + gamma.right as u8 as f64 * sign);
                let mass = w * h * 0.5;
                let kappa = (i as f64 * std::f64::consts::PI / w).powi(2);
                if c != 0.0 {
                    modes.push((kappa, c * c / mass));
                }
            }
            // smallest eigenvalue among modes the constraint does not see
            let mut free = f64::INFINITY;
            let first_x = (std::f64::consts::PI / w).powi(2);
            let first_y = (std::f64::consts::PI / h).powi(2);
            if !vertical {
                // cos(πx/W) modes are unconstrained
                free = free.min(first_x);
            } else if !(gamma.left && gamma.right) {
                // one vertical side: cos(πx/W)cos(πy/H) is unconstrained
                free = free.min(first_x + first_y);
            } else {
                // both vertical sides: odd i modes cancel; i = 1 pairs with j = 1
                free = free.min(first_x + first_y);
            }
            if !horizontal {
                free = free.min(first_y);
            } else {
                free = free.min(first_x + first_y);
            }
            (modes, free, w * h, gamma.gamma_length(w, h))
        }
        DomainDescriptor::Interval {
            length,
            gamma_left,
            gamma_right,
        } => {
            if !(*gamma_left || *gamma_right) {
                return Err(ConstantError::Configuration("Γ must be nonempty".into()));
            }
            let l = *length;
            let mut modes = Vec::new();
            let mut free = f64::INFINITY;
            for i in 0..200_000usize {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                let c = *gamma_left as u8 as f64 + *gamma_right as u8 as f64 * sign;
                let mass = l * if i == 0 { 1.0 } else { 0.5 };
                let kappa = (i as f64 * std::f64::consts::PI / l).powi(2);
                if c != 0.0 {
                    modes.push((kappa, c * c / mass));
                } else {
                    free = free.min(kappa);
                }
            }
            let count = *gamma_left as u8 as f64 + *gamma_right as u8 as f64;
            (modes, free, l, count)
        }
        _ => {
            return Err(ConstantError::Configuration(
                "spectral route needs a rectangle or interval".into(),
            ))
        }
    };
    // degenerate κ among constrained modes leaves an unconstrained combination
    let mut sorted: Vec<f64> = modes.iter().map(|m| m.0).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut free_min = free_min;
    for pair in sorted.windows(2) {
        if pair[0] > 0.0 && (pair[1] - pair[0]).abs() <= 1e-12 * pair[0] {
            free_min = free_min.min(pair[0]);
            break;
        }
    }
    let first_pole = sorted
        .iter()
        .copied()
        .find(|&k| k > 0.0)
        .unwrap_or(f64::INFINITY);
    let secular = |mu: f64| -> f64 { modes.iter().map(|(k, d2)| d2 / (k - mu)).sum() };
    let upper = first_pole.min(free_min);
    let mu = if secular(upper * (1.0 - 1e-12)) < 0.0 {
        upper
    } else {
        let (mut lo, mut hi) = (0.0f64, first_pole);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if secular(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (0.5 * (lo + hi)).min(free_min)
    };
    // truncation overestimates μ slightly; shave 5 %
    let mu = 0.95 * mu;
    Ok((volume / gamma).sqrt().max(1.0 / mu.sqrt()))
}

/// Trial family sampled at midpoint quadrature nodes.
struct SampledFamily {
    interior_weights: Vec<f64>,
    /// values[k][i]: basis k at interior point i
    values: Vec<Vec<f64>>,
    /// derivatives[d][k][i]
    derivatives: Vec<Vec<Vec<f64>>>,
    gamma_weights: Vec<f64>,
    gamma_values: Vec<Vec<f64>>,
    gamma_measure: f64,
}

type Basis2 = Box<dyn Fn(f64, f64) -> (f64, f64, f64)>;

impl SampledFamily {
    fn for_domain(domain: &DomainDescriptor) -> Result<Self, ConstantError> {
        match domain {
            DomainDescriptor::Rectangle {
                width,
                height,
                gamma,
            } => Self::rectangle(*width, *height, *gamma),
            DomainDescriptor::Interval {
                length,
                gamma_left,
                gamma_right,
            } => Self::interval(*length, *gamma_left, *gamma_right),
            _ => Err(ConstantError::Configuration(
                "trial family needs a rectangle or interval".into(),
            )),
        }
    }

    fn rectangle(w: f64, h: f64, gamma: RectangleSides) -> Result<Self, ConstantError> {
        if !(w > 0.0 && h > 0.0) {
            return Err(ConstantError::Configuration(
                "rectangle sides must be positive".into(),
            ));
        }
        if !gamma.any() {
            return Err(ConstantError::Configuration("Γ must be nonempty".into()));
        }
        use std::f64::consts::PI;
        let mut basis: Vec<Basis2> = Vec::new();
        for i in 0..=3 {
            for j in 0..=3 {
                let (kx, ky) = (i as f64 * PI / w, j as f64 * PI / h);
                basis.push(Box::new(move |x, y| {
                    let (cx, cy) = ((kx * x).cos(), (ky * y).cos());
                    (cx * cy, -kx * (kx * x).sin() * cy, -ky * cx * (ky * y).sin())
                }));
            }
        }
        basis.push(Box::new(move |x, _| (x / w, 1.0 / w, 0.0)));
        basis.push(Box::new(move |_, y| (y / h, 0.0, 1.0 / h)));
        basis.push(Box::new(move |x, _| ((x / w).powi(2), 2.0 * x / (w * w), 0.0)));
        basis.push(Box::new(move |_, y| ((y / h).powi(2), 0.0, 2.0 * y / (h * h))));
        basis.push(Box::new(move |x, y| (x * y / (w * h), y / (w * h), x / (w * h))));

        let grid = 32usize;
        let (dx, dy) = (w / grid as f64, h / grid as f64);
        let mut points = Vec::with_capacity(grid * grid);
        for a in 0..grid {
            for b in 0..grid {
                points.push(((a as f64 + 0.5) * dx, (b as f64 + 0.5) * dy));
            }
        }
        let mut gamma_points = Vec::new();
        let mut gamma_weights = Vec::new();
        for a in 0..grid {
            let t = (a as f64 + 0.5) / grid as f64;
            if gamma.bottom {
                gamma_points.push((t * w, 0.0));
                gamma_weights.push(dx);
            }
            if gamma.top {
                gamma_points.push((t * w, h));
                gamma_weights.push(dx);
            }
            if gamma.left {
                gamma_points.push((0.0, t * h));
                gamma_weights.push(dy);
            }
            if gamma.right {
                gamma_points.push((w, t * h));
                gamma_weights.push(dy);
            }
        }
        let mut values = Vec::new();
        let mut ddx = Vec::new();
        let mut ddy = Vec::new();
        let mut gamma_values = Vec::new();
        for f in &basis {
            let mut v = Vec::with_capacity(points.len());
            let mut vx = Vec::with_capacity(points.len());
            let mut vy = Vec::with_capacity(points.len());
            for &(x, y) in &points {
                let (a, b, c) = f(x, y);
                v.push(a);
                vx.push(b);
                vy.push(c);
            }
            values.push(v);
            ddx.push(vx);
            ddy.push(vy);
            gamma_values.push(gamma_points.iter().map(|&(x, y)| f(x, y).0).collect());
        }
        Ok(SampledFamily {
            interior_weights: vec![dx * dy; points.len()],
            values,
            derivatives: vec![ddx, ddy],
            gamma_measure: gamma.gamma_length(w, h),
            gamma_weights,
            gamma_values,
        })
    }

    fn interval(l: f64, left: bool, right: bool) -> Result<Self, ConstantError> {
        if !(l > 0.0) {
            return Err(ConstantError::Configuration(
                "interval length must be positive".into(),
            ));
        }
        if !(left || right) {
            return Err(ConstantError::Configuration("Γ must be nonempty".into()));
        }
        use std::f64::consts::PI;
        let mut basis: Vec<Box<dyn Fn(f64) -> (f64, f64)>> = Vec::new();
        for i in 0..=6 {
            let k = i as f64 * PI / l;
            basis.push(Box::new(move |x| ((k * x).cos(), -k * (k * x).sin())));
        }
        basis.push(Box::new(move |x| (x / l, 1.0 / l)));
        basis.push(Box::new(move |x| ((x / l).powi(2), 2.0 * x / (l * l))));
        let grid = 256usize;
        let dx = l / grid as f64;
        let points: Vec<f64> = (0..grid).map(|a| (a as f64 + 0.5) * dx).collect();
        let mut gamma_points = Vec::new();
        if left {
            gamma_points.push(0.0);
        }
        if right {
            gamma_points.push(l);
        }
        let mut values = Vec::new();
        let mut deriv = Vec::new();
        let mut gamma_values = Vec::new();
        for f in &basis {
            values.push(points.iter().map(|&x| f(x).0).collect());
            deriv.push(points.iter().map(|&x| f(x).1).collect());
            gamma_values.push(gamma_points.iter().map(|&x| f(x).0).collect());
        }
        Ok(SampledFamily {
            interior_weights: vec![dx; points.len()],
            values,
            derivatives: vec![deriv],
            gamma_weights: vec![1.0; gamma_points.len()],
            gamma_measure: gamma_points.len() as f64,
            gamma_values,
        })
    }

    fn combine(rows: &[Vec<f64>], coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; rows[0].len()];
        for (row, &c) in rows.iter().zip(coeffs) {
            if c != 0.0 {
                for (o, r) in out.iter_mut().zip(row) {
                    *o += c * r;
                }
            }
        }
        out
    }

    /// q-norm of `samples` and its gradient factor `|s|^{q-1} sgn(s) w N^{1-q}`.
    fn norm_and_weights(weights: &[f64], samples: &[f64], q: f64) -> (f64, Vec<f64>) {
        let scale = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        if scale == 0.0 {
            return (0.0, vec![0.0; samples.len()]);
        }
        let mut sum = 0.0;
        for (w, s) in weights.iter().zip(samples) {
            sum += w * (s.abs() / scale).powf(q);
        }
        let norm = scale * sum.powf(1.0 / q);
        let grad = weights
            .iter()
            .zip(samples)
            .map(|(w, s)| w * (s.abs() / norm).powf(q - 1.0) * s.signum())
            .collect();
        (norm, grad)
    }

    /// Quotient and its gradient with respect to the coefficients.
    fn quotient(&self, coeffs: &[f64], q: f64) -> (f64, Vec<f64>) {
        let k = coeffs.len();
        let v = Self::combine(&self.values, coeffs);
        let (num, num_w) = Self::norm_and_weights(&self.interior_weights, &v, q);
        let mut den = 0.0;
        let mut grad_den = vec![0.0; k];
        for d in &self.derivatives {
            let dv = Self::combine(d, coeffs);
            let (nd, w) = Self::norm_and_weights(&self.interior_weights, &dv, q);
            den += nd;
            for (b, row) in d.iter().enumerate() {
                grad_den[b] += row.iter().zip(&w).map(|(r, x)| r * x).sum::<f64>();
            }
        }
        let gv = Self::combine(&self.gamma_values, coeffs);
        let integral: f64 = gv.iter().zip(&self.gamma_weights).map(|(a, b)| a * b).sum();
        let gfac = self.gamma_measure.powf(1.0 / q - 1.0);
        den += gfac * integral.abs();
        for (b, row) in self.gamma_values.iter().enumerate() {
            let dint: f64 = row.iter().zip(&self.gamma_weights).map(|(a, c)| a * c).sum();
            grad_den[b] += gfac * integral.signum() * dint;
        }
        if den <= 0.0 {
            return (0.0, vec![0.0; k]);
        }
        let ratio = num / den;
        let grad = (0..k)
            .map(|b| {
                let dnum: f64 = self.values[b].iter().zip(&num_w).map(|(r, x)| r * x).sum();
                (dnum * den - num * grad_den[b]) / (den * den)
            })
            .collect();
        (ratio, grad)
    }

    fn normalize(c: &mut [f64]) {
        let n = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            c.iter_mut().for_each(|x| *x /= n);
        }
    }

    fn ascend(&self, start: Vec<f64>, q: f64) -> f64 {
        let mut c = start;
        Self::normalize(&mut c);
        let (mut best, mut grad) = self.quotient(&c, q);
        let mut step = 0.5;
        for _ in 0..150 {
            let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if gnorm == 0.0 {
                break;
            }
            let mut improved = false;
            for _ in 0..30 {
                let mut trial: Vec<f64> = c
                    .iter()
                    .zip(&grad)
                    .map(|(x, g)| x + step * g / gnorm)
                    .collect();
                Self::normalize(&mut trial);
                let (value, g) = self.quotient(&trial, q);
                if value > best {
                    let gain = value - best;
                    c = trial;
                    best = value;
                    grad = g;
                    improved = gain > 1e-12 * best;
                    step = (step * 1.5).min(1.0);
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        best
    }

    /// Supremum of the quotient over the family.
    fn supremum(&self, q: f64) -> f64 {
        let k = self.values.len();
        let mut singles: Vec<(f64, usize)> = (0..k)
            .map(|b| {
                let mut c = vec![0.0; k];
                c[b] = 1.0;
                (self.quotient(&c, q).0, b)
            })
            .collect();
        singles.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        let mut best = singles[0].0;
        let mut starts = Vec::new();
        for &(_, b) in singles.iter().take(3) {
            let mut c = vec![0.0; k];
            c[b] = 1.0;
            starts.push(c);
        }
        // constant plus each leading mode
        for &(_, b) in singles.iter().take(3) {
            let mut c = vec![0.0; k];
            c[0] = 0.5;
            c[b] += 1.0;
            starts.push(c);
        }
        for s in starts {
            best = best.max(self.ascend(s, q));
        }
        best
    }
}
