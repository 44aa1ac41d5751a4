//! Command bodies: each maps an embedded input and its options to a result
//! value, so `verify` can rerun them from a result file alone.

use serde::Deserialize;
use serde_json::{json, Value};

use itlog_core::dag::{is_certificate, subgraph_lattice, tight_edges, verify_grading, weight_grading, Dag};
use itlog_core::hn::{hn_filtration, is_semistable, Polarization};
use itlog_core::lattice::{FinLattice, WeightedLattice};
use itlog_core::rational::{fmt_q, to_f64};
use itlog_core::weight::{iterated_weight_filtration, verify_weight_filtration, weight_filtration};
use itlog_core::Q;
use itlog_flow::asymptotic::{build_asymptotic_solution, residual_l1};
use itlog_flow::fit::{fit_exponents, fit_groups, EigenTable, FitResult};
use itlog_flow::flow::{integrate, IntegrateOptions};
use itlog_flow::quiver::{thin_filtration, thin_quadruple};
use itlog_flow::staralg::Quadruple;

use crate::{
    meta, parse_json, AsymptoticArgs, CliError, CliResult, CommonArgs, Embedded, FitArgs, HnArgs, LatticeArgs, Model,
    SimulateArgs, Start, CSV_META_PREFIX,
};

/// Rounded to 12 significant digits so output is stable across platforms.
pub fn fnum(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    json!(r)
}

fn qnum(x: &Q, exact: bool) -> Value {
    if exact {
        json!(fmt_q(x))
    } else {
        fnum(to_f64(x))
    }
}

fn qnums(xs: &[Q], exact: bool) -> Value {
    Value::Array(xs.iter().map(|x| qnum(x, exact)).collect())
}

fn options<T: for<'de> Deserialize<'de>>(v: &Value) -> CliResult<T> {
    T::deserialize(v).map_err(|e| CliError::BadInput(format!("options do not match the command: {e}")))
}

fn mismatch(cmd: &str) -> CliError {
    CliError::BadInput(format!("embedded input does not fit command {cmd}"))
}

pub fn model_dag(m: &Model) -> CliResult<Dag> {
    Ok(match m {
        Model::Dag(d) => d.to_dag()?,
        Model::Quiver(q) => q.to_dag()?,
    })
}

pub fn model_quadruple(m: &Model) -> CliResult<Quadruple> {
    Ok(match m {
        Model::Dag(d) => thin_quadruple(&d.to_dag()?)?,
        Model::Quiver(q) => q.to_quadruple()?,
    })
}

fn weighted(input: &Embedded, cmd: &str) -> CliResult<(WeightedLattice, Option<Dag>)> {
    match input {
        Embedded::Model(Model::Dag(d)) => {
            let g = d.to_dag()?;
            Ok((subgraph_lattice(&g)?, Some(g)))
        }
        Embedded::Lattice { lattice, x } => {
            let l = lattice.to_lattice()?;
            let wl = match x {
                Some(xd) => {
                    let w = xd.weights(&l)?;
                    WeightedLattice::from_classes(l, &w)?
                }
                None => WeightedLattice::unit(l),
            };
            Ok((wl, None))
        }
        _ => Err(mismatch(cmd)),
    }
}

fn names(l: &FinLattice, chain: &[usize]) -> Value {
    json!(chain.iter().map(|&e| l.name(e)).collect::<Vec<_>>())
}

/// Vertex id → label of the chain step that adds it.
fn vertex_labels(g: &Dag, l: &FinLattice, chain: &[usize], labels: &[Value]) -> CliResult<Value> {
    let mut out = serde_json::Map::new();
    for (k, w) in chain.windows(2).enumerate() {
        let lost = || CliError::Compute("subgraph lattice lost its vertex sets".into());
        let diff = l.mask(w[1]).ok_or_else(lost)? & !l.mask(w[0]).ok_or_else(lost)?;
        for (i, id) in g.ids.iter().enumerate() {
            if diff >> i & 1 == 1 {
                out.insert(id.clone(), labels[k].clone());
            }
        }
    }
    Ok(Value::Object(out))
}

fn fit_value(name: &str, f: &FitResult) -> Value {
    json!({
        "name": name,
        "coefficients": f.coefficients.iter().map(|&x| fnum(x)).collect::<Vec<_>>(),
        "errors": f.errors.iter().map(|&x| fnum(x)).collect::<Vec<_>>(),
        "condition": fnum(f.condition),
        "samples": f.samples,
    })
}

/// Result value of a JSON-producing command.
pub fn compute(cmd: &str, input: &Embedded, opts: &Value) -> CliResult<Value> {
    match cmd {
        "grade-dag" => {
            let c: CommonArgs = options(opts)?;
            let Embedded::Model(Model::Dag(doc)) = input else { return Err(mismatch(cmd)) };
            let g = doc.to_dag()?;
            let (v, cert) = weight_grading(&g);
            let tight: Vec<Value> = tight_edges(&g, &v)
                .into_iter()
                .map(|k| json!([g.ids[g.edges[k].src], g.ids[g.edges[k].dst]]))
                .collect();
            Ok(json!({
                "vertices": g.ids,
                "v": qnums(&v, c.exact),
                "certificate": qnums(&cert.u, c.exact),
                "tight_edges": tight,
                "verified": verify_grading(&g, &v) && is_certificate(&g, &v, &cert),
            }))
        }
        "hn" => {
            let c: HnArgs = options(opts)?;
            let Embedded::Polarized { lattice, polarization } = input else { return Err(mismatch(cmd)) };
            let l = lattice.to_lattice()?;
            let z = Polarization::new(polarization.values(&l)?).valuation(&l)?;
            let hn = hn_filtration(&l, &z);
            let values: Vec<Value> = hn.values.iter().map(|g| json!([qnum(&g.re, c.common.exact), qnum(&g.im, c.common.exact)])).collect();
            Ok(json!({
                "chain": names(&l, &hn.chain),
                "values": values,
                "phases": hn.phases().into_iter().map(fnum).collect::<Vec<_>>(),
                "mass": fnum(hn.mass().to_f64()),
                "semistable": is_semistable(&l, &z),
            }))
        }
        "weight" => {
            let c: LatticeArgs = options(opts)?;
            let (wl, g) = weighted(input, cmd)?;
            let a = weight_filtration(&wl)?;
            let labels: Vec<Value> = a.labels.iter().map(|x| qnum(x, c.common.exact)).collect();
            let mut out = json!({
                "chain": names(&wl.lattice, &a.chain),
                "labels": labels,
                "verified": verify_weight_filtration(&wl, &a),
            });
            if let Some(g) = g {
                out["vertex_labels"] = vertex_labels(&g, &wl.lattice, &a.chain, &labels)?;
            }
            Ok(out)
        }
        "iterate" => {
            let c: LatticeArgs = options(opts)?;
            let exact = c.common.exact;
            let (wl, g) = weighted(input, cmd)?;
            let it = iterated_weight_filtration(&wl)?;
            let labels: Vec<Value> = it.labels.iter().map(|ls| qnums(ls, exact)).collect();
            let levels: Vec<Value> = it
                .levels
                .iter()
                .map(|lv| {
                    json!({
                        "elements": lv.lattice.lattice.len(),
                        "chain": names(&lv.lattice.lattice, &lv.filtration.chain),
                        "labels": qnums(&lv.filtration.labels, exact),
                    })
                })
                .collect();
            let mut out = json!({
                "depth": it.depth,
                "chain": names(&wl.lattice, &it.chain),
                "labels": labels,
                "levels": levels,
            });
            if let Some(g) = g {
                out["vertex_labels"] = vertex_labels(&g, &wl.lattice, &it.chain, &labels)?;
            }
            Ok(out)
        }
        "asymptotic" => {
            let a: AsymptoticArgs = options(opts)?;
            let Embedded::Model(m) = input else { return Err(mismatch(cmd)) };
            let g = model_dag(m)?;
            let f = thin_filtration(&g)?;
            if f.depth() > a.depth {
                return Err(itlog_flow::Error::DepthExceeded(f.depth()).into());
            }
            let form = build_asymptotic_solution(&thin_quadruple(&g)?, &f.gradings)?;
            if a.t_lo <= form.t_min() {
                return Err(CliError::BadInput(format!("--t-lo must exceed {} for depth {}", form.t_min(), form.depth())));
            }
            let terms: Vec<Value> = form
                .terms()
                .iter()
                .map(|t| {
                    json!({
                        "vertex": g.ids[t.block],
                        "exponents": qnums(&t.exponents, a.common.exact),
                        "projector_rank": t.rank,
                    })
                })
                .collect();
            let phi = form.normalized_phi()?;
            let arrows: Vec<Value> = g
                .edges
                .iter()
                .zip(&phi.0)
                .map(|(e, m)| json!({"src": g.ids[e.src], "dst": g.ids[e.dst], "abs": fnum(m[(0, 0)].norm())}))
                .collect();
            let prof = residual_l1(&form, (a.t_lo, a.t_hi), a.samples)?;
            Ok(json!({
                "depth": form.depth(),
                "terms": terms,
                "normalized_phi": arrows,
                "residual": {
                    "t_span": [fnum(a.t_lo), fnum(a.t_hi)],
                    "max_norm": fnum(prof.norms.iter().cloned().fold(0.0, f64::max)),
                    "slope": prof.slope.map(fnum).unwrap_or(Value::Null),
                    "integrable": prof.integrable,
                },
            }))
        }
        "fit" => {
            let a: FitArgs = options(opts)?;
            let Embedded::Table { csv, model } = input else { return Err(mismatch(cmd)) };
            let table = EigenTable::read_csv(csv.as_bytes())?;
            let fits = fit_exponents(&table, a.depth, a.seed)?;
            let mut out = json!({
                "basis": basis_names(a.depth),
                "fits": fits.iter().map(|(n, f)| fit_value(n, f)).collect::<Vec<_>>(),
            });
            if let Some(m) = model {
                out["groups"] = group_fits(&table, m, &a)?;
            }
            Ok(out)
        }
        _ => Err(CliError::BadInput(format!("{cmd} does not produce a JSON result"))),
    }
}

fn basis_names(depth: usize) -> Vec<String> {
    let mut out: Vec<String> = (1..=depth).map(|k| format!("log^({k}) t")).collect();
    out.push("1".into());
    out
}

/// Level-ℓ fits of the mass-weighted mean log-eigenvalue over vertices that
/// share their level-ℓ label.
fn group_fits(table: &EigenTable, m: &Model, a: &FitArgs) -> CliResult<Value> {
    let g = model_dag(m)?;
    let f = thin_filtration(&g)?;
    let masses: Vec<f64> = g.masses.iter().map(to_f64).collect();
    let column = |v: usize| {
        let name = format!("h[{}]", g.ids[v]);
        table
            .columns
            .iter()
            .position(|c| *c == name)
            .ok_or_else(|| CliError::BadInput(format!("table has no column {name}")))
    };
    let mut out = Vec::new();
    for level in 0..f.depth() {
        let groups = f.level_groups(level, &masses);
        let spec = groups
            .iter()
            .map(|(lab, members)| {
                let cols = members.iter().map(|&(v, w)| Ok((column(v)?, w))).collect::<CliResult<Vec<_>>>()?;
                Ok((fmt_q(lab), cols))
            })
            .collect::<CliResult<Vec<_>>>()?;
        for ((lab, members), (_, fit)) in groups.iter().zip(fit_groups(table, &spec, a.depth, a.seed)?) {
            let mut v = fit_value(&format!("level {}", level + 1), &fit);
            v["level"] = json!(level + 1);
            v["label"] = qnum(lab, a.common.exact);
            v["vertices"] = json!(members.iter().map(|&(i, _)| &g.ids[i]).collect::<Vec<_>>());
            out.push(v);
        }
    }
    Ok(Value::Array(out))
}

/// CSV body (header and rows) of a simulation.
pub fn simulate_csv(input: &Embedded, a: &SimulateArgs) -> CliResult<String> {
    let Embedded::Model(m) = input else { return Err(mismatch("simulate")) };
    let q = model_quadruple(m)?;
    let opts = IntegrateOptions {
        rtol: a.rtol,
        atol: a.atol,
        samples_per_decade: a.samples_per_decade,
        ..IntegrateOptions::default()
    };
    let h0 = match a.start {
        Start::Identity => q.amb.b_identity(),
        Start::Normalized => {
            let g = model_dag(m)?;
            build_asymptotic_solution(&q, &thin_filtration(&g)?.gradings)?.normalized_start()
        }
    };
    let traj = integrate(&q, &h0, (a.t0, a.t_max), &opts)?;
    let table = EigenTable::from_trajectory(&q.amb, &traj);
    let mut buf = Vec::new();
    table.write_csv(&mut buf, a.precision)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

/// Structural comparison with relative tolerance on numbers.
fn compare(a: &Value, b: &Value, path: &str) -> Result<(), String> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap_or(f64::NAN), y.as_f64().unwrap_or(f64::NAN));
            if (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs())) {
                Ok(())
            } else {
                Err(format!("{path}: {x} vs recomputed {y}"))
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                return Err(format!("{path}: length {} vs recomputed {}", x.len(), y.len()));
            }
            x.iter().zip(y).enumerate().try_for_each(|(i, (p, q))| compare(p, q, &format!("{path}[{i}]")))
        }
        (Value::Object(x), Value::Object(y)) => {
            if x.len() != y.len() || x.keys().any(|k| !y.contains_key(k)) {
                return Err(format!("{path}: fields differ from the recomputed result"));
            }
            x.iter().try_for_each(|(k, p)| compare(p, &y[k], &format!("{path}.{k}")))
        }
        _ if a == b => Ok(()),
        _ => Err(format!("{path}: {a} vs recomputed {b}")),
    }
}

fn compare_tables(a: &EigenTable, b: &EigenTable) -> Result<(), String> {
    if a.columns != b.columns || a.times.len() != b.times.len() {
        return Err("table shape differs from the recomputed trajectory".into());
    }
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1e-300);
    for (k, (&x, &y)) in a.times.iter().zip(&b.times).enumerate() {
        if !close(x, y) {
            return Err(format!("row {k}: t = {x} vs {y}"));
        }
    }
    for (c, (s, r)) in a.series.iter().zip(&b.series).enumerate() {
        for (k, (&x, &y)) in s.iter().zip(r).enumerate() {
            if !close(x, y) {
                return Err(format!("{} row {k}: {x} vs recomputed {y}", a.columns[c]));
            }
        }
    }
    Ok(())
}

fn head_field<'a>(head: &'a Value, path: &[&str]) -> CliResult<&'a Value> {
    path.iter()
        .try_fold(head, |v, k| v.get(*k))
        .ok_or_else(|| CliError::BadInput(format!("result file lacks {}", path.join("."))))
}

/// Recomputes a result file from its embedded input and options.
pub fn verify(text: &str, hash: String, c: &CommonArgs) -> CliResult<String> {
    let fail = |m: String| CliError::Compute(format!("verification failed: {m}"));
    let mut checks = Vec::new();
    let (head, body) = match text.strip_prefix(CSV_META_PREFIX) {
        Some(rest) => {
            let (line, body) = rest.split_once('\n').unwrap_or((rest, ""));
            (parse_json::<Value>(line, "CSV metadata line")?, Some(body))
        }
        None => (parse_json::<Value>(text, "result file")?, None),
    };
    if head_field(&head, &["meta", "tool"])? != "itlog" {
        return Err(CliError::BadInput("not an itlog result file".into()));
    }
    let cmd = head_field(&head, &["meta", "command"])?
        .as_str()
        .ok_or_else(|| CliError::BadInput("meta.command must be a string".into()))?
        .to_string();
    let opts = head_field(&head, &["meta", "options"])?.clone();
    let input: Embedded = serde_json::from_value(head_field(&head, &["input"])?.clone())
        .map_err(|e| CliError::BadInput(format!("embedded input does not match its schema: {e}")))?;
    match body {
        Some(body) => {
            if cmd != "simulate" {
                return Err(CliError::BadInput(format!("CSV result from {cmd}")));
            }
            let a: SimulateArgs = options(&opts)?;
            let stored = EigenTable::read_csv(body.as_bytes())?;
            if stored.times.windows(2).any(|w| w[1] <= w[0]) {
                return Err(fail("sample times are not increasing".into()));
            }
            if stored.series.iter().flatten().any(|&x| !(x > 0.0)) {
                return Err(fail("non-positive eigenvalue".into()));
            }
            checks.push("times increasing, eigenvalues positive");
            let again = EigenTable::read_csv(simulate_csv(&input, &a)?.as_bytes())?;
            compare_tables(&stored, &again).map_err(fail)?;
            checks.push("trajectory recomputed");
        }
        None => {
            let stored = head_field(&head, &["result"])?;
            let again = compute(&cmd, &input, &opts)?;
            compare(stored, &again, "result").map_err(fail)?;
            checks.push("result recomputed");
            if let Some(v) = stored.get("verified") {
                if v != &json!(true) {
                    return Err(fail("result is marked unverified".into()));
                }
                checks.push("certificate accepted");
            }
        }
    }
    let doc = json!({
        "meta": meta("verify", json!(hash), serde_json::to_value(c).expect("options serialize")),
        "verified_command": cmd,
        "checks": checks,
        "ok": true,
    });
    Ok(format!("{}\n", serde_json::to_string_pretty(&doc).expect("values serialize")))
}
