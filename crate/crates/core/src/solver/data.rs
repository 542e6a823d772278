use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::mesh::Mesh;
use super::{SolverError, SolverResult};

/// Analytic scalar data on the plane (1-D meshes evaluate at `y = 0`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldExpr {
    Zero,
    Constant { value: f64 },
    /// `c0 + cx·x + cy·y`
    Linear { c0: f64, cx: f64, cy: f64 },
    /// `amp·cos(kx·π·x)·cos(ky·π·y)`
    CosMode { amp: f64, kx: f64, ky: f64 },
    /// `amp·exp(-|x-c|²/(2w²))`
    Gaussian { amp: f64, center: [f64; 2], width: f64 },
    /// `amp` on the closed disk, 0 outside.
    Disk { amp: f64, center: [f64; 2], radius: f64 },
    /// `amp·|x-cx|^{-power}·|y-cy|^{-power}`; integrable for power < 1.
    SeparableSingular { amp: f64, center: [f64; 2], power: f64 },
    Sum { terms: Vec<FieldExpr> },
}

impl FieldExpr {
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        match self {
            FieldExpr::Zero => 0.0,
            FieldExpr::Constant { value } => *value,
            FieldExpr::Linear { c0, cx, cy } => c0 + cx * x[0] + cy * x[1],
            FieldExpr::CosMode { amp, kx, ky } => {
                amp * (kx * PI * x[0]).cos() * (ky * PI * x[1]).cos()
            }
            FieldExpr::Gaussian { amp, center, width } => {
                let r2 = (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2);
                amp * (-r2 / (2.0 * width * width)).exp()
            }
            FieldExpr::Disk { amp, center, radius } => {
                let r2 = (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2);
                if r2 <= radius * radius {
                    *amp
                } else {
                    0.0
                }
            }
            FieldExpr::SeparableSingular { amp, center, power } => {
                amp * (x[0] - center[0]).abs().powf(-power) * (x[1] - center[1]).abs().powf(-power)
            }
            FieldExpr::Sum { terms } => terms.iter().map(|t| t.eval(x)).sum(),
        }
    }

    /// Structural zero test (no evaluation).
    pub fn is_zero(&self) -> bool {
        match self {
            FieldExpr::Zero => true,
            FieldExpr::Constant { value } => *value == 0.0,
            FieldExpr::Linear { c0, cx, cy } => *c0 == 0.0 && *cx == 0.0 && *cy == 0.0,
            FieldExpr::CosMode { amp, .. }
            | FieldExpr::Gaussian { amp, .. }
            | FieldExpr::Disk { amp, .. }
            | FieldExpr::SeparableSingular { amp, .. } => *amp == 0.0,
            FieldExpr::Sum { terms } => terms.iter().all(FieldExpr::is_zero),
        }
    }

    pub fn scaled(&self, lambda: f64) -> FieldExpr {
        match self {
            FieldExpr::Zero => FieldExpr::Zero,
            FieldExpr::Constant { value } => FieldExpr::Constant { value: lambda * value },
            FieldExpr::Linear { c0, cx, cy } => FieldExpr::Linear {
                c0: lambda * c0,
                cx: lambda * cx,
                cy: lambda * cy,
            },
            FieldExpr::CosMode { amp, kx, ky } => FieldExpr::CosMode { amp: lambda * amp, kx: *kx, ky: *ky },
            FieldExpr::Gaussian { amp, center, width } => FieldExpr::Gaussian {
                amp: lambda * amp,
                center: *center,
                width: *width,
            },
            FieldExpr::Disk { amp, center, radius } => FieldExpr::Disk {
                amp: lambda * amp,
                center: *center,
                radius: *radius,
            },
            FieldExpr::SeparableSingular { amp, center, power } => FieldExpr::SeparableSingular {
                amp: lambda * amp,
                center: *center,
                power: *power,
            },
            FieldExpr::Sum { terms } => FieldExpr::Sum {
                terms: terms.iter().map(|t| t.scaled(lambda)).collect(),
            },
        }
    }
}

impl Default for FieldExpr {
    fn default() -> Self {
        FieldExpr::Zero
    }
}

/// `F_m(τ) = mτ/(m+|τ|)`.
pub fn smooth_truncation(m: f64, tau: f64) -> f64 {
    m * tau / (m + tau.abs())
}

/// Right-hand side of the weak problem.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceData {
    #[serde(default)]
    pub f: FieldExpr,
    #[serde(default)]
    pub fvec: [FieldExpr; 2],
    #[serde(default)]
    pub g: FieldExpr,
    #[serde(default)]
    pub h: FieldExpr,
    /// When set, f, g and h pass through `F_m` pointwise.
    #[serde(default)]
    pub smoothing_m: Option<f64>,
}

impl SourceData {
    fn smooth(&self, v: f64) -> f64 {
        match self.smoothing_m {
            Some(m) => smooth_truncation(m, v),
            None => v,
        }
    }

    pub fn f_at(&self, x: [f64; 2]) -> f64 {
        self.smooth(self.f.eval(x))
    }

    pub fn g_at(&self, x: [f64; 2]) -> f64 {
        self.smooth(self.g.eval(x))
    }

    pub fn h_at(&self, x: [f64; 2]) -> f64 {
        self.smooth(self.h.eval(x))
    }

    pub fn fvec_at(&self, x: [f64; 2]) -> [f64; 2] {
        [self.fvec[0].eval(x), self.fvec[1].eval(x)]
    }

    pub fn is_zero(&self) -> bool {
        self.f.is_zero() && self.fvec.iter().all(FieldExpr::is_zero) && self.g.is_zero() && self.h.is_zero()
    }

    pub fn scaled(&self, lambda: f64) -> SourceData {
        SourceData {
            f: self.f.scaled(lambda),
            fvec: [self.fvec[0].scaled(lambda), self.fvec[1].scaled(lambda)],
            g: self.g.scaled(lambda),
            h: self.h.scaled(lambda),
            smoothing_m: self.smoothing_m,
        }
    }
}

/// Piecewise-constant leading coefficient, described independently of a
/// mesh. Each piece is a symmetric 2×2 matrix `[[a11, a12], [a12, a22]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientSpec {
    /// `value · I`
    Scalar { value: f64 },
    Matrix { a11: f64, a12: f64, a22: f64 },
    /// `left · I` for x < split, `right · I` otherwise.
    Halves { left: f64, right: f64, split: f64 },
    /// `low · I` / `high · I` on a `cells × cells` checkerboard of the
    /// bounding box `[0,w]×[0,h]`.
    Checkerboard { low: f64, high: f64, cells: usize, width: f64, height: f64 },
}

impl CoefficientSpec {
    fn matrix_at(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        let diag = |v: f64| [[v, 0.0], [0.0, v]];
        match *self {
            CoefficientSpec::Scalar { value } => diag(value),
            CoefficientSpec::Matrix { a11, a12, a22 } => [[a11, a12], [a12, a22]],
            CoefficientSpec::Halves { left, right, split } => {
                diag(if x[0] < split { left } else { right })
            }
            CoefficientSpec::Checkerboard { low, high, cells, width, height } => {
                let i = ((x[0] / width) * cells as f64).floor() as i64;
                let j = ((x[1] / height) * cells as f64).floor() as i64;
                diag(if (i + j).rem_euclid(2) == 0 { low } else { high })
            }
        }
    }

    pub fn build(&self, mesh: &Mesh) -> SolverResult<CoefficientField> {
        CoefficientField::from_fn(mesh, |x| self.matrix_at(x))
    }
}

/// Per-element symmetric matrices with their eigenvalue bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    pub matrices: Vec<[[f64; 2]; 2]>,
    /// Smallest eigenvalue over all elements (the `a_#` witness).
    pub a_low: f64,
    /// Largest eigenvalue over all elements (the `a^#` witness).
    pub a_high: f64,
}

fn eigen_bounds(m: &[[f64; 2]; 2]) -> (f64, f64) {
    let tr = m[0][0] + m[1][1];
    let disc = ((m[0][0] - m[1][1]).powi(2) + 4.0 * m[0][1] * m[0][1]).sqrt();
    ((tr - disc) / 2.0, (tr + disc) / 2.0)
}

impl CoefficientField {
    /// Evaluates `a` at each element centroid. In 1-D only `a[0][0]` is
    /// used.
    pub fn from_fn(mesh: &Mesh, a: impl Fn([f64; 2]) -> [[f64; 2]; 2]) -> SolverResult<Self> {
        let matrices: Vec<_> = (0..mesh.elements.len()).map(|e| a(mesh.centroid(e))).collect();
        Self::new(mesh, matrices)
    }

    pub fn new(mesh: &Mesh, matrices: Vec<[[f64; 2]; 2]>) -> SolverResult<Self> {
        if matrices.len() != mesh.elements.len() {
            return Err(SolverError::Config("one matrix per element required".into()));
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (e, m) in matrices.iter().enumerate() {
            if m[0][1] != m[1][0] {
                return Err(SolverError::Config(format!("A not symmetric on element {e}")));
            }
            let (l, h) = if mesh.dim == 1 { (m[0][0], m[0][0]) } else { eigen_bounds(m) };
            if !(l > 0.0 && h.is_finite()) {
                return Err(SolverError::Config(format!(
                    "A not uniformly elliptic on element {e} (eigenvalues {l}, {h})"
                )));
            }
            lo = lo.min(l);
            hi = hi.max(h);
        }
        Ok(CoefficientField {
            matrices,
            a_low: lo,
            a_high: hi,
        })
    }

    /// Checks the stored witnesses against the claimed bounds.
    pub fn satisfies(&self, a_low: f64, a_high: f64) -> bool {
        self.a_low >= a_low && self.a_high <= a_high
    }
}

/// The boundary law `b(u)` on Γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryLaw {
    /// `b(u) = b_* u`
    Linear { b_star: f64 },
    /// `b(u) = scale·|u|^{ℓ-2}u`
    Power { ell: f64, scale: f64 },
}

impl BoundaryLaw {
    pub fn ell(&self) -> f64 {
        match self {
            BoundaryLaw::Linear { .. } => 2.0,
            BoundaryLaw::Power { ell, .. } => *ell,
        }
    }

    /// `(b_#, b^#)`; both equal the scale for these laws.
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            BoundaryLaw::Linear { b_star } => (b_star, b_star),
            BoundaryLaw::Power { scale, .. } => (scale, scale),
        }
    }

    pub fn value(&self, u: f64) -> f64 {
        match *self {
            BoundaryLaw::Linear { b_star } => b_star * u,
            BoundaryLaw::Power { ell, scale } => scale * u.abs().powf(ell - 2.0) * u,
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        match *self {
            BoundaryLaw::Linear { b_star } => b_star,
            BoundaryLaw::Power { ell, scale } => scale * (ell - 1.0) * u.abs().powf(ell - 2.0),
        }
    }

    pub fn validate(&self) -> SolverResult<()> {
        let ok = match *self {
            BoundaryLaw::Linear { b_star } => b_star > 0.0 && b_star.is_finite(),
            BoundaryLaw::Power { ell, scale } => ell >= 2.0 && ell.is_finite() && scale > 0.0 && scale.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(SolverError::Config(format!("invalid boundary law {self:?}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::RectangleSides;
    use crate::solver::build_rectangle_mesh;

    #[test]
    fn smoothing_values() {
        for (m, want) in [(1.0, 0.5), (10.0, 10.0 / 11.0), (100.0, 100.0 / 101.0)] {
            assert!((smooth_truncation(m, 1.0) - want).abs() < 1e-15);
        }
        assert!(smooth_truncation(1e12, 3.0) - 3.0 < 1e-10);
    }

    #[test]
    fn eigen_checks() {
        let mesh = build_rectangle_mesh(1.0, 1.0, 4, RectangleSides::ALL).unwrap();
        let c = CoefficientSpec::Halves { left: 1.0, right: 4.0, split: 0.5 }.build(&mesh).unwrap();
        assert_eq!((c.a_low, c.a_high), (1.0, 4.0));
        assert!(c.satisfies(1.0, 4.0));
        let m = CoefficientSpec::Matrix { a11: 2.0, a12: 1.0, a22: 2.0 }.build(&mesh).unwrap();
        assert!((m.a_low - 1.0).abs() < 1e-15 && (m.a_high - 3.0).abs() < 1e-15);
        assert!(CoefficientSpec::Matrix { a11: 1.0, a12: 2.0, a22: 1.0 }.build(&mesh).is_err());
    }

    #[test]
    fn zero_detection() {
        assert!(FieldExpr::Sum { terms: vec![FieldExpr::Zero, FieldExpr::Constant { value: 0.0 }] }.is_zero());
        assert!(!FieldExpr::CosMode { amp: 1.0, kx: 1.0, ky: 0.0 }.is_zero());
    }
}
