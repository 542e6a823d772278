use serde_json::{json, Value};

use radbound_core::bounds::{c_infinity_adjoint, evaluate, BoundReport, HPairing, L1Norms, Operation};
use radbound_core::experiments::{
    applicable_methods, degiorgi_decay_study, green_study, l1_data_study, moser_iteration_study, sweep,
    verify_energy, verify_linf, VerificationRecord,
};
use radbound_core::model::{check_regime, DataFn, Proposition};
use radbound_core::solver::Region;
use radbound_core::ProblemSpec;

use crate::config::{BoundsArgs, Config, Study};
use crate::output::{num, Artifact};
use crate::Failure;

/// Result of a command: the artifact, and whether every check passed.
pub struct Run {
    pub artifact: Artifact,
    pub passed: bool,
}

impl Run {
    fn ok(artifact: Artifact) -> Run {
        Run { artifact, passed: true }
    }
}

fn need(what: &str, v: Option<f64>) -> Result<f64, String> {
    v.ok_or_else(|| format!("needs bounds.{what}"))
}

/// The call for `p`, or why it cannot be made from the config.
fn operation(spec: &ProblemSpec, p: Proposition, args: &BoundsArgs) -> Result<Vec<Operation>, String> {
    let op = match p {
        Proposition::Energy => Operation::Energy {
            pairing: args.pairing.unwrap_or(HPairing::DualOfEll),
        },
        Proposition::Lq => Operation::Lq {
            q: need("q", args.q)?,
            excess_measure: args.excess_measure,
        },
        Proposition::DeGiorgi => Operation::DeGiorgi,
        Proposition::Moser => Operation::Moser {
            u_norm: need("u_norm", args.u_norm)?,
        },
        Proposition::CInfinity => Operation::CInfinity,
        Proposition::BoundaryLinf => Operation::BoundaryData {
            u_trace_norm: need("u_trace_norm", args.u_trace_norm)?,
        },
        Proposition::LinearRN => Operation::LinearRN,
        Proposition::DualityW1q => Operation::DualityW1q {
            q: need("duality_q", args.duality_q)?,
        },
        Proposition::L1Data | Proposition::Green => {
            let q = need("adjoint_q", args.adjoint_q)?;
            let c_inf = c_infinity_adjoint(spec, q)
                .map_err(|e| e.to_string())?
                .intermediate("C_infinity")
                .ok_or("adjoint report lacks C_infinity")?;
            if p == Proposition::Green {
                Operation::Green { c_inf, q }
            } else {
                let l1 = |w| spec.data.norm(w, 1.0).map_err(|e| e.to_string());
                let norms = L1Norms {
                    f: l1(DataFn::F)?,
                    g: l1(DataFn::G)?,
                    h: l1(DataFn::H)?,
                };
                Operation::L1Data { norms, c_inf, q }
            }
        }
    };
    Ok(vec![op])
}

fn report_rows(r: &BoundReport, rows: &mut Vec<Vec<String>>) {
    let p = r.proposition.key().to_string();
    let groups = [
        ("parameter", &r.parameters),
        ("intermediate", &r.intermediates),
        ("bound", &r.final_bounds),
    ];
    for (kind, map) in groups {
        for (k, v) in map {
            rows.push(vec![p.clone(), kind.to_string(), k.clone(), num(*v)]);
        }
    }
}

pub fn bounds(cfg: &Config, seed: u64) -> Result<Run, Failure> {
    let spec = cfg.spec()?;
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    let mut not_applicable = Vec::new();
    for p in Proposition::ALL {
        let regime = check_regime(spec, p);
        if !regime.applicable {
            not_applicable.push(regime);
            continue;
        }
        match operation(spec, p, &cfg.bounds) {
            Ok(ops) => {
                for op in ops {
                    match evaluate(spec, &op) {
                        Ok(r) => reports.push(r),
                        Err(e) => skipped.push(json!({"proposition": p.key(), "reason": e.to_string()})),
                    }
                }
            }
            Err(reason) => skipped.push(json!({"proposition": p.key(), "reason": reason})),
        }
    }
    if reports.is_empty() {
        let why: Vec<String> = not_applicable
            .iter()
            .map(|r| format!("{}: {}", r.proposition.key(), r.violations.join(", ")))
            .chain(skipped.iter().map(|s| format!("{}: {}", s["proposition"], s["reason"])))
            .collect();
        return Err(Failure::Regime(format!("no estimate applies to this spec\n  {}", why.join("\n  "))));
    }
    let mut rows = Vec::new();
    for r in &reports {
        report_rows(r, &mut rows);
    }
    let json = json!({
        "schema": "radbound-bounds/1",
        "seed": seed,
        "reports": reports,
        "skipped": skipped,
        "not_applicable": not_applicable,
    });
    Ok(Run::ok(Artifact {
        json,
        header: vec!["proposition", "kind", "name", "value"],
        rows,
        csv: None,
    }))
}

pub fn regimes(cfg: &Config, seed: u64) -> Result<Run, Failure> {
    let spec = cfg.spec()?;
    let matrix: Vec<_> = Proposition::ALL.into_iter().map(|p| check_regime(spec, p)).collect();
    let rows = matrix
        .iter()
        .map(|r| {
            vec![
                r.proposition.key().to_string(),
                r.applicable.to_string(),
                r.violations.join("; "),
            ]
        })
        .collect();
    Ok(Run::ok(Artifact {
        json: json!({"schema": "radbound-regimes/1", "seed": seed, "regimes": matrix}),
        header: vec!["proposition", "applicable", "violations"],
        rows,
        csv: None,
    }))
}

pub fn solve(cfg: &Config, seed: u64) -> Result<Run, Failure> {
    let inst = cfg.instance()?;
    let solved = inst.solve()?;
    let u = &solved.solution.field;
    let p = inst.exponents.p;
    let ell = inst.law.ell();
    let norms = [
        ("l2".to_string(), u.lebesgue_norm(2.0, Region::Omega)),
        (format!("l{p}"), u.lebesgue_norm(p, Region::Omega)),
        ("max_abs".to_string(), u.max_abs()),
        ("min".to_string(), u.min_value()),
        ("grad_l2".to_string(), u.gradient_norm(2.0)),
        (format!("trace_gamma_l{ell}"), u.lebesgue_norm(ell, Region::Gamma)),
        ("trace_boundary_l2".to_string(), u.lebesgue_norm(2.0, Region::Boundary)),
    ];
    let nodes: Vec<Value> = u
        .mesh
        .vertices
        .iter()
        .zip(&u.values)
        .map(|(x, v)| json!([x[0], x[1], v]))
        .collect();
    let csv_rows: Vec<Vec<String>> = u
        .mesh
        .vertices
        .iter()
        .zip(&u.values)
        .map(|(x, v)| vec![num(x[0]), num(x[1]), num(*v)])
        .collect();
    let mut csv = String::from("x,y,u\n");
    for r in &csv_rows {
        csv.push_str(&r.join(","));
        csv.push('\n');
    }
    let json = json!({
        "schema": "radbound-solve/1",
        "seed": seed,
        "instance": inst.name,
        "resolution": inst.resolution,
        "iterations": solved.solution.iterations,
        "residual_history": solved.solution.residual_history,
        "norms": norms.iter().map(|(k, v)| (k.clone(), json!(v))).collect::<serde_json::Map<_, _>>(),
        "nodes": nodes,
    });
    Ok(Run::ok(Artifact {
        json,
        header: vec!["norm", "value"],
        rows: norms.iter().map(|(k, v)| vec![k.clone(), num(*v)]).collect(),
        csv: Some(csv),
    }))
}

fn record_rows(records: &[VerificationRecord]) -> Vec<Vec<String>> {
    records
        .iter()
        .map(|r| {
            vec![
                r.instance.clone(),
                r.quantity.clone(),
                r.resolution.to_string(),
                num(r.measured),
                num(r.bound),
                num(r.margin),
                num(r.tol_rel),
                if r.passed { "pass" } else { "FAIL" }.to_string(),
            ]
        })
        .collect()
}

const RECORD_HEADER: [&str; 8] = ["instance", "quantity", "resolution", "measured", "bound", "margin", "tol_rel", "status"];

/// Re-judges every record at `tol` instead of its own tolerance.
fn override_tol(records: Vec<VerificationRecord>, tol: Option<f64>) -> Vec<VerificationRecord> {
    let Some(tol) = tol else { return records };
    records
        .into_iter()
        .map(|r| {
            VerificationRecord::new(&r.instance, r.quantity, r.resolution, r.measured, r.bound, tol, r.report.as_deref())
        })
        .collect()
}

pub fn verify(cfg: &Config, seed: u64, tol: Option<f64>) -> Result<Run, Failure> {
    let inst = cfg.instance()?;
    let args = &cfg.verify;
    let mut records = Vec::new();
    for study in &args.studies {
        match study {
            Study::Energy => records.extend(verify_energy(inst)?),
            Study::Linf => {
                let spec = inst.spec(&inst.problem()?);
                for m in applicable_methods(&spec) {
                    records.extend(verify_linf(inst, m)?);
                }
            }
            Study::Decay => records.extend(degiorgi_decay_study(inst, args.k_grid.as_deref())?.records),
            Study::Moser => records.extend(moser_iteration_study(inst, args.moser_rungs)?.records),
            Study::L1 => records.extend(l1_data_study(inst, &args.m_schedule, &args.q_grid)?.records),
        }
    }
    let records = override_tol(records, tol);
    let passed = records.iter().all(|r| r.passed);
    let rows = record_rows(&records);
    let json = json!({
        "schema": "radbound-verify/1",
        "seed": seed,
        "instance": inst.name,
        "tol_override": tol,
        "passed": passed,
        "records": records,
    });
    Ok(Run {
        artifact: Artifact {
            json,
            header: RECORD_HEADER.to_vec(),
            rows,
            csv: None,
        },
        passed,
    })
}

pub fn green(cfg: &Config, seed: u64, tol: Option<f64>) -> Result<Run, Failure> {
    let gc = cfg
        .green
        .as_ref()
        .ok_or_else(|| Failure::Config("missing [green] table".into()))?;
    let mut study = green_study(gc)?;
    study.records = override_tol(std::mem::take(&mut study.records), tol);
    let passed = study.records.iter().all(|r| r.passed);
    let mut rows = Vec::new();
    for r in &study.rows {
        for (q, g) in &r.grad_norms {
            rows.push(vec![
                num(r.rho),
                num(r.min_value),
                num(*q),
                num(*g),
                num(r.trace_norm),
                num(r.h1_norm),
                r.h1_bound.map(num).unwrap_or_default(),
            ]);
        }
    }
    let json = json!({
        "schema": "radbound-green/1",
        "seed": seed,
        "tol_override": tol,
        "passed": passed,
        "study": study,
    });
    Ok(Run {
        artifact: Artifact {
            json,
            header: vec!["rho", "min_value", "q", "grad_lq", "trace_norm", "h1_norm", "h1_bound"],
            rows,
            csv: None,
        },
        passed,
    })
}

pub fn sweep_cmd(cfg: &Config, seed: u64) -> Result<Run, Failure> {
    let spec = cfg.spec()?;
    let args = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Failure::Config("missing [sweep] table".into()))?;
    let table = sweep(spec, &args.parameter, &args.grid, &args.operations)?;
    let csv = table.to_csv()?;
    let mut rows = Vec::new();
    for r in &table.rows {
        let status = serde_json::to_value(r.status)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        if r.quantities.is_empty() {
            rows.push(vec![num(r.value), r.operation.clone(), status.clone(), String::new(), String::new(), r.message.clone()]);
        }
        for (k, v) in &r.quantities {
            rows.push(vec![num(r.value), r.operation.clone(), status.clone(), k.clone(), num(*v), String::new()]);
        }
    }
    Ok(Run::ok(Artifact {
        json: json!({"schema": "radbound-sweep/1", "seed": seed, "table": table}),
        header: vec!["value", "operation", "status", "quantity", "number", "message"],
        rows,
        csv: Some(csv),
    }))
}
