use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Instance, SOLVER_TOL};
use crate::constants::RectangleSides;
use crate::error::Result;
use crate::model::Exponents;
use crate::solver::{assemble_and_solve, BoundaryLaw, CoefficientSpec, FieldExpr, Problem, SourceData};

const RESOLUTION: usize = 64;

fn sides(bottom: bool, right: bool, top: bool, left: bool) -> RectangleSides {
    RectangleSides { bottom, right, top, left }
}

fn halves() -> CoefficientSpec {
    CoefficientSpec::Halves { left: 1.0, right: 4.0, split: 0.5 }
}

fn gaussian(amp: f64, center: [f64; 2], width: f64) -> FieldExpr {
    FieldExpr::Gaussian { amp, center, width }
}

fn instance(
    name: &str,
    gamma: RectangleSides,
    coeff: CoefficientSpec,
    law: BoundaryLaw,
    data: SourceData,
) -> Instance {
    Instance {
        name: name.into(),
        width: 1.0,
        height: 1.0,
        gamma,
        resolution: RESOLUTION,
        coeff,
        law,
        data,
        exponents: Exponents::new(4.0, 4.0, 4.0, 2.0),
        poincare: None,
    }
}

/// The shipped instance catalog: unit squares (one 2×1 rectangle) with
/// ℓ ∈ {2, 3, 4}, Γ ranging from one side to all of ∂Ω, and piecewise
/// constant A with contrast 4.
///
/// Data amplitudes are large on purpose: the Moser-type bounds grow like
/// the data to the power `1 + χ/(χ-1)` while the solution grows linearly,
/// so they can fail for small data (see the README).
pub fn catalog() -> Vec<Instance> {
    let lin = BoundaryLaw::Linear { b_star: 1.0 };
    let cubic = BoundaryLaw::Power { ell: 3.0, scale: 1.0 };
    let quartic = BoundaryLaw::Power { ell: 4.0, scale: 2.0 };
    let f = |amp| SourceData { f: gaussian(amp, [0.4, 0.6], 0.2), ..Default::default() };
    let fvec = |amp| SourceData {
        fvec: [gaussian(amp, [0.3, 0.5], 0.15), gaussian(amp / 2.0, [0.6, 0.4], 0.15)],
        ..Default::default()
    };
    let h = |v| SourceData { h: FieldExpr::Constant { value: v }, ..Default::default() };
    let mut out = vec![
        instance("lin-f-all", RectangleSides::ALL, halves(), lin, f(80.0)),
        instance("lin-fvec-bottom-top", sides(true, false, true, false), halves(), lin, fvec(60.0)),
        instance("lin-h-bottom-left", sides(true, false, false, true), halves(), lin, h(20.0)),
        instance(
            "lin-g-bottom",
            RectangleSides::BOTTOM,
            halves(),
            lin,
            SourceData {
                g: FieldExpr::CosMode { amp: 10.0, kx: 1.0, ky: 0.0 },
                h: FieldExpr::Constant { value: 5.0 },
                ..Default::default()
            },
        ),
        instance(
            "lin-mixed-right",
            sides(false, true, false, false),
            halves(),
            lin,
            SourceData {
                f: gaussian(40.0, [0.3, 0.3], 0.2),
                g: FieldExpr::Constant { value: 2.0 },
                h: FieldExpr::Constant { value: 4.0 },
                ..Default::default()
            },
        ),
        instance("cubic-f-all", RectangleSides::ALL, halves(), cubic, f(120.0)),
        instance("cubic-fvec-left-right", sides(false, true, false, true), halves(), cubic, fvec(60.0)),
        instance("cubic-h-top", sides(false, false, true, false), halves(), cubic, h(30.0)),
        instance("quartic-f-all", RectangleSides::ALL, halves(), quartic, f(150.0)),
        instance(
            "quartic-fh-bottom-right",
            sides(true, true, false, false),
            halves(),
            quartic,
            SourceData {
                f: gaussian(60.0, [0.7, 0.7], 0.2),
                h: FieldExpr::Constant { value: 10.0 },
                ..Default::default()
            },
        ),
        instance(
            "quartic-gh-bottom",
            RectangleSides::BOTTOM,
            halves(),
            quartic,
            SourceData {
                g: FieldExpr::Constant { value: 8.0 },
                h: FieldExpr::Constant { value: 8.0 },
                ..Default::default()
            },
        ),
    ];
    let mut rect = instance(
        "lin-fvec-f-rectangle",
        sides(true, false, false, true),
        CoefficientSpec::Checkerboard { low: 1.0, high: 4.0, cells: 4, width: 2.0, height: 1.0 },
        lin,
        SourceData {
            fvec: [gaussian(40.0, [1.0, 0.5], 0.2), FieldExpr::Zero],
            f: gaussian(40.0, [0.5, 0.5], 0.2),
            ..Default::default()
        },
    );
    rect.width = 2.0;
    out.push(rect);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceLevel {
    pub resolution: usize,
    pub h: f64,
    pub l2_error: f64,
    pub h1_error: f64,
    /// `∫|∇u_h|²`
    pub energy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub levels: Vec<ConvergenceLevel>,
    pub l2_rates: Vec<f64>,
    pub h1_rates: Vec<f64>,
    /// `∫|∇u*|² = π²/2`
    pub exact_energy: f64,
    /// `|∫|∇u_h|² - ∫|∇u_{2h}|²|` at the finest level.
    pub energy_error_estimate: f64,
}

/// Manufactured solution `u* = cos(πx)cos(πy)` on the unit square with
/// A = I, b(u) = u on Γ = ∂Ω: `f = 2π²u*`, `h = u*` (the normal derivative
/// of u* vanishes on ∂Ω).
pub fn manufactured_convergence(resolutions: &[usize]) -> Result<ConvergenceStudy> {
    let base = instance(
        "manufactured",
        RectangleSides::ALL,
        CoefficientSpec::Scalar { value: 1.0 },
        BoundaryLaw::Linear { b_star: 1.0 },
        SourceData {
            f: FieldExpr::CosMode { amp: 2.0 * PI * PI, kx: 1.0, ky: 1.0 },
            h: FieldExpr::CosMode { amp: 1.0, kx: 1.0, ky: 1.0 },
            ..Default::default()
        },
    );
    let u = |x: [f64; 2]| (PI * x[0]).cos() * (PI * x[1]).cos();
    let du = |x: [f64; 2]| {
        [
            -PI * (PI * x[0]).sin() * (PI * x[1]).cos(),
            -PI * (PI * x[0]).cos() * (PI * x[1]).sin(),
        ]
    };
    let levels = resolutions
        .par_iter()
        .map(|&res| {
            let p: Problem = base.at_resolution(res).problem()?;
            let s = assemble_and_solve(&p, SOLVER_TOL)?;
            let (l2, h1) = s.field.error_against(u, du);
            let g = s.field.gradient_norm(2.0);
            Ok(ConvergenceLevel {
                resolution: res,
                h: p.mesh.h,
                l2_error: l2,
                h1_error: h1,
                energy: g * g,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rate = |e: &dyn Fn(&ConvergenceLevel) -> f64| -> Vec<f64> {
        levels
            .windows(2)
            .map(|w| (e(&w[0]) / e(&w[1])).ln() / (w[0].h / w[1].h).ln())
            .collect()
    };
    let l2_rates = rate(&|l| l.l2_error);
    let h1_rates = rate(&|l| l.h1_error);
    let energy_error_estimate = match levels.as_slice() {
        [.., a, b] => (b.energy - a.energy).abs(),
        _ => f64::NAN,
    };
    Ok(ConvergenceStudy {
        levels,
        l2_rates,
        h1_rates,
        exact_energy: PI * PI / 2.0,
        energy_error_estimate,
    })
}
