use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::bounds::{evaluate, Operation};
use crate::constants::DomainDescriptor;
use crate::error::{Error, Result};
use crate::model::ProblemSpec;

/// Parameters [`sweep`] knows how to vary.
pub const SWEEP_PARAMETERS: [&str; 12] = [
    "a_low", "a_high", "b_low", "b_high", "b_star", "p", "r", "s", "t", "chi", "q", "dilation",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepStatus {
    Ok,
    Regime,
    BlowUp,
    Error,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub operation: String,
    pub status: SweepStatus,
    pub message: String,
    /// Intermediates followed by final bounds.
    pub quantities: IndexMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepTable {
    pub parameter: String,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Long format: one line per (point, operation, quantity); failed
    /// points get one line with an empty quantity.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Config(format!("csv: {e}"));
        w.write_record(["parameter", "value", "operation", "status", "quantity", "number", "message"])
            .map_err(io)?;
        for r in &self.rows {
            let status = serde_json::to_value(r.status)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default();
            let value = format!("{:e}", r.value);
            if r.quantities.is_empty() {
                w.write_record([&self.parameter, &value, &r.operation, &status, "", "", &r.message])
                    .map_err(io)?;
            }
            for (k, v) in &r.quantities {
                w.write_record([&self.parameter, &value, &r.operation, &status, k, &format!("{v:e}"), &r.message])
                    .map_err(io)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
    }
}

pub fn operation_name(op: &Operation) -> String {
    serde_json::to_value(op)
        .ok()
        .and_then(|v| v.get("op").and_then(|s| s.as_str()).map(str::to_string))
        .unwrap_or_default()
}

/// `spec` and `op` with `parameter` set to `value`.
pub fn with_parameter(
    spec: &ProblemSpec,
    op: &Operation,
    parameter: &str,
    value: f64,
) -> Result<(ProblemSpec, Operation)> {
    let mut s = spec.clone();
    let mut op = op.clone();
    let c = &mut s.coefficients;
    let e = &mut s.exponents;
    match parameter {
        "a_low" => c.a_low = value,
        "a_high" => c.a_high = value,
        "b_low" => c.b_low = value,
        "b_high" => c.b_high = value,
        "b_star" => {
            c.b_low = value;
            c.b_high = value;
            c.linear_b_star = Some(value);
        }
        "p" => e.p = value,
        "r" => e.r = value,
        "s" => e.s = value,
        "t" => e.t = value,
        "chi" => e.chi = Some(value),
        "q" => match &mut op {
            Operation::Lq { q, .. }
            | Operation::DualityW1q { q }
            | Operation::L1Data { q, .. }
            | Operation::Green { q, .. } => *q = value,
            _ => e.q = Some(value),
        },
        "dilation" => {
            s.geometry = s.geometry.dilated(value);
            if let DomainDescriptor::Rectangle { width, height, .. } = &mut s.poincare {
                *width *= value;
                *height *= value;
            }
            // combined constants depend on |Γ|
            s.embeddings.clear();
        }
        other => {
            return Err(Error::Config(format!(
                "unknown sweep parameter {other}; expected one of {}",
                SWEEP_PARAMETERS.join(", ")
            )))
        }
    }
    Ok((s, op))
}

/// Evaluates each operation at each grid value of `parameter`. Per-point
/// failures are recorded in the row; blow-ups are marked as such.
pub fn sweep(spec: &ProblemSpec, parameter: &str, grid: &[f64], ops: &[Operation]) -> Result<SweepTable> {
    if !SWEEP_PARAMETERS.contains(&parameter) {
        return Err(Error::Config(format!(
            "unknown sweep parameter {parameter}; expected one of {}",
            SWEEP_PARAMETERS.join(", ")
        )));
    }
    let mut rows = Vec::new();
    for &value in grid {
        for op in ops {
            let result = with_parameter(spec, op, parameter, value)
                .and_then(|(s, o)| evaluate(&s, &o));
            let (status, message, quantities) = match result {
                Ok(r) => {
                    let mut q = r.intermediates.clone();
                    q.extend(r.final_bounds.iter().map(|(k, v)| (k.clone(), *v)));
                    (SweepStatus::Ok, r.flags.join("; "), q)
                }
                Err(e @ Error::BlowUp { .. }) => (SweepStatus::BlowUp, e.to_string(), IndexMap::new()),
                Err(e @ Error::Regime { .. }) => (SweepStatus::Regime, e.to_string(), IndexMap::new()),
                Err(e) => (SweepStatus::Error, e.to_string(), IndexMap::new()),
            };
            rows.push(SweepRow {
                value,
                operation: operation_name(op),
                status,
                message,
                quantities,
            });
        }
    }
    Ok(SweepTable {
        parameter: parameter.to_string(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::HPairing;
    use crate::model::{CoefficientBounds, DataFn, DataNorms, Exponents, GeometryMeasures};

    fn cube() -> ProblemSpec {
        let mut data = DataNorms::default();
        data.set(DataFn::Fvec, 2.0, 1.0);
        data.set(DataFn::Fvec, 3.0, 1.0);
        data.set(DataFn::F, 1.2, 0.5);
        data.set(DataFn::F, 1.5, 0.5);
        data.set(DataFn::H, 2.0, 0.3);
        data.set(DataFn::H, 3.0, 0.3);
        ProblemSpec::new(
            GeometryMeasures { n: 3, vol_omega: 1.0, surf_boundary: 6.0, surf_gamma: 6.0, surf_gamma_n: 0.0 },
            CoefficientBounds {
                a_low: 1.0,
                a_high: 1.0,
                b_low: 1.0,
                b_high: 1.0,
                ell: 2.0,
                linear_b_star: Some(1.0),
                symmetric: true,
            },
            Exponents::new(3.0, 3.0, 4.0 / 3.0, 1.2),
            data,
            DomainDescriptor::Override { value: 1.0 },
        )
    }

    #[test]
    fn energy_nonincreasing_in_a_low() {
        let op = Operation::Energy { pairing: HPairing::DualOfEll };
        let t = sweep(&cube(), "a_low", &[0.25, 0.5, 1.0], &[op]).unwrap();
        let a: Vec<f64> = t.rows.iter().map(|r| r.quantities.get("A_script").copied().unwrap_or_else(|| panic!("{}", r.message))).collect();
        assert!(a[0] >= a[1] && a[1] >= a[2], "{a:?}");
    }

    #[test]
    fn lq_blow_up_marked() {
        // δ = 1/6 at n = 3, p = r = 3, so Q = 12
        let op = Operation::Lq { q: 2.0, excess_measure: None };
        let t = sweep(&cube(), "q", &[6.0, 11.0, 11.9, 12.0, 13.0], &[op]).unwrap();
        let st: Vec<SweepStatus> = t.rows.iter().map(|r| r.status).collect();
        assert_eq!(&st[..3], &[SweepStatus::Ok; 3]);
        assert_eq!(&st[3..], &[SweepStatus::BlowUp; 2]);
        let k: Vec<f64> = t.rows[..3].iter().map(|r| r.quantities["K_qdelta"]).collect();
        assert!(k[0] < k[1] && k[1] < k[2]);
        let csv = t.to_csv().unwrap();
        assert!(csv.lines().any(|l| l.contains("blow_up")));
    }

    #[test]
    fn unknown_parameter() {
        assert!(sweep(&cube(), "zeta", &[1.0], &[Operation::DeGiorgi]).is_err());
    }
}
