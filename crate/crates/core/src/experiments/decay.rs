use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{discretization_tol, solve_pair, Instance, Solved, VerificationRecord};
use crate::error::{Error, Result};
use crate::model::{DataFn, Proposition, ProblemSpec};

/// Level-set exponent of the two-dimensional decay step. Any α ≥ 2 keeps
/// the embedding exponents `2α/(α+2)` and `2α/(α+1)` at least 1.
pub const DECAY_ALPHA: f64 = 4.0;

const GRID_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub k: f64,
    pub omega: f64,
    pub boundary: f64,
    /// `|Ω̄(k)| = |Ω(k)| + |∂Ω(k)|`
    pub total: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayStudy {
    pub instance: String,
    pub alpha: f64,
    pub delta: f64,
    /// `ℬ` of the one-step inequality.
    pub b_script: f64,
    pub parts: IndexMap<String, f64>,
    pub rows: Vec<DecayRow>,
    pub records: Vec<VerificationRecord>,
    /// Least-squares slope of `ln|Ω̄(k)|` against `ln k`.
    pub fitted_exponent: Option<f64>,
}

/// `ℬ` for n = 2 from the truncated energy inequality, which holds for all
/// p, r > 2:
/// `ℬ = L [(1/a_# + 1/√(a_#b_#))(‖f⃗‖_p + C)|Ω|^{1/2-1/p-δ}
///       + (1/b_# + 1/√(a_#b_#))(‖h‖_r + C)|Γ|^{1/2-1/r-δ}]`
/// with `L = max{S_{q₁,2}|Ω|^{1/α} + K_{q₂,2}|Ω|^{1/(2α)}, S_{q₁,2} + K_{q₂,2}}`,
/// `q₁ = 2α/(α+2)`, `q₂ = 2α/(α+1)`, and `C = C_{2,p,r}`.
fn decay_constant(spec: &ProblemSpec, alpha: f64) -> Result<(f64, f64, IndexMap<String, f64>)> {
    let g = &spec.geometry;
    if g.n != 2 {
        return Err(Error::Config(format!(
            "the decay study runs on planar solves; got n = {}",
            g.n
        )));
    }
    let (p, r) = (spec.exponents.p, spec.exponents.r);
    let mut violations = Vec::new();
    if !(p > 2.0) {
        violations.push(format!("p>2 (got {p})"));
    }
    if !(r > 2.0) {
        violations.push(format!("r>2 (got {r})"));
    }
    if !violations.is_empty() {
        return Err(Error::Regime {
            proposition: Proposition::Lq,
            violations,
        });
    }
    let c = &spec.coefficients;
    let delta = (0.5 - 1.0 / p).min(0.5 - 1.0 / r);
    let q1 = 2.0 * alpha / (alpha + 2.0);
    let q2 = 2.0 * alpha / (alpha + 1.0);
    let s1 = spec.embedding(q1, 2.0)?.s_ql;
    let k2 = spec.embedding(q2, 2.0)?.k_ql;
    let vol = g.vol_omega;
    let l = (s1 * vol.powf(1.0 / alpha) + k2 * vol.powf(0.5 / alpha)).max(s1 + k2);
    let f = spec.data.norm(DataFn::F, 2.0 * p / (p + 2.0))?;
    let gn = spec.data.norm(DataFn::G, p / 2.0)?;
    let (pc, rc) = (p / (p - 1.0), r / (r - 1.0));
    let pr = spec.embedding(pc, rc)?;
    let cnpr = pr.s_ql * f + pr.k_ql * gn;
    let fp = spec.data.norm(DataFn::Fvec, p)?;
    let hr = spec.data.norm(DataFn::H, r)?;
    let ab = (c.a_low * c.b_low).sqrt();
    let interior = (1.0 / c.a_low + 1.0 / ab) * (fp + cnpr) * vol.powf(0.5 - 1.0 / p - delta);
    let boundary = (1.0 / c.b_low + 1.0 / ab) * (hr + cnpr) * g.surf_gamma.powf(0.5 - 1.0 / r - delta);
    let b_script = l * (interior + boundary);
    let mut parts = IndexMap::new();
    parts.insert("L".to_string(), l);
    parts.insert("C_npr".to_string(), cnpr);
    parts.insert("term_interior".to_string(), interior);
    parts.insert("term_boundary".to_string(), boundary);
    Ok((b_script, delta, parts))
}

fn rows(s: &Solved, grid: &[f64]) -> Vec<DecayRow> {
    s.solution
        .field
        .level_set_measures(grid)
        .into_iter()
        .map(|r| DecayRow {
            k: r.k,
            omega: r.omega,
            boundary: r.boundary,
            total: r.omega + r.boundary,
        })
        .collect()
}

/// 16 geometric points from 1 to `max`, or just `[1]` when `max ≤ 1`.
pub fn default_k_grid(max: f64) -> Vec<f64> {
    if !(max > 1.0) {
        return vec![1.0];
    }
    let last = (GRID_POINTS - 1) as f64;
    (0..GRID_POINTS).map(|i| max.powf(i as f64 / last)).collect()
}

fn fit_slope(rows: &[DecayRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.total > 0.0 && r.k > 0.0)
        .map(|r| (r.k.ln(), r.total.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Tabulates `|Ω̄(k)|` and checks `(h-k)|Ω̄(h)|^{1/α} ≤ ℬ|Ω̄(k)|^δ` at
/// every consecutive pair of `k_grid` (default: [`default_k_grid`] up to
/// `max|u_h|`). The table stops at the first empty level set.
pub fn degiorgi_decay_study(instance: &Instance, k_grid: Option<&[f64]>) -> Result<DecayStudy> {
    let (mut fine, mut coarse) = solve_pair(instance)?;
    let alpha = DECAY_ALPHA;
    let (b_fine, delta, parts) = fine.bound(|s| decay_constant(s, alpha))?;
    let (b_coarse, _, _) = coarse.bound(|s| decay_constant(s, alpha))?;
    let grid = match k_grid {
        Some(g) => g.to_vec(),
        None => default_k_grid(fine.solution.field.max_abs()),
    };
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|k| !(*k >= 1.0)) {
        return Err(Error::Config("k grid must be increasing and start at k ≥ 1".into()));
    }
    let mut table = rows(&fine, &grid);
    if let Some(end) = table.iter().position(|r| r.total == 0.0) {
        table.truncate(end + 1);
    }
    let coarse_rows = rows(&coarse, &grid);
    let side = |rows: &[DecayRow], i: usize, b: f64| {
        let (lo, hi) = (rows[i], rows[i + 1]);
        ((hi.k - lo.k) * hi.total.powf(1.0 / alpha), b * lo.total.powf(delta))
    };
    let records = (0..table.len().saturating_sub(1))
        .map(|i| {
            let (lhs, rhs) = side(&table, i, b_fine);
            let tol = discretization_tol((lhs, rhs), side(&coarse_rows, i, b_coarse));
            VerificationRecord::new(
                &instance.name,
                format!("decay[k={:.6},h={:.6}]", table[i].k, table[i + 1].k),
                instance.resolution,
                lhs,
                rhs,
                tol,
                None,
            )
        })
        .collect();
    Ok(DecayStudy {
        instance: instance.name.clone(),
        alpha,
        delta,
        b_script: b_fine,
        parts,
        fitted_exponent: fit_slope(&table),
        rows: table,
        records,
    })
}
