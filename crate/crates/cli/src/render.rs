//! Human rendering of the JSON reports.

use std::fmt::Write;

use serde_json::Value;

fn num(v: &Value) -> String {
    match v.as_f64() {
        // adding zero turns -0 into 0
        Some(x) => format!("{:.6e}", x + 0.0),
        None => v.to_string(),
    }
}

fn point(v: &Value) -> String {
    let coords: Vec<String> = v
        .as_array()
        .map(|a| a.iter().map(|c| format!("{}", c.as_f64().unwrap_or(f64::NAN) + 0.0)).collect())
        .unwrap_or_default();
    format!("({})", coords.join(", "))
}

fn bool_word(v: &Value) -> &'static str {
    if v.as_bool().unwrap_or(false) {
        "true"
    } else {
        "false"
    }
}

pub fn human(r: &Value) -> String {
    let mut s = String::new();
    let status = r["status"].as_str().unwrap_or("?");
    if let Some(e) = r.get("error") {
        let _ = writeln!(s, "{}: {status}: {}", r["command"].as_str().unwrap_or("copodual"), e.as_str().unwrap_or(""));
        return s;
    }
    let _ = writeln!(s, "status: {status}");
    match r["command"].as_str() {
        Some("check-cop") => {
            let _ = writeln!(s, "min value: {}", num(&r["min_value"]));
            let _ = writeln!(s, "witness: {}", point(&r["witness"]));
        }
        Some("find-immobile") => {
            let levels = r["immobile"].as_array().cloned().unwrap_or_default();
            if levels.iter().all(|l| l.as_array().is_none_or(|a| a.is_empty())) {
                let _ = writeln!(s, "immobile indices: none");
            }
            for (m, lv) in levels.iter().enumerate() {
                for t in lv.as_array().into_iter().flatten() {
                    let _ = writeln!(s, "level {m}: τ = {}", point(t));
                }
            }
            let _ = writeln!(s, "Slater: {}", bool_word(&r["slater_probe"]));
        }
        Some("build-dual") => {
            let _ = writeln!(s, "m0: {}", r["m0"]);
            let _ = writeln!(s, "primal value: {}", num(&r["primal_value"]));
            let _ = writeln!(s, "dual value: {}", num(&r["dual_value"]));
            let _ = writeln!(s, "gap: {}", num(&r["gap"]));
            let _ = writeln!(s, "max equality residual: {}", num(&r["report"]["max_equality_residual"]));
            let _ = writeln!(s, "x0: {}", point(&r["x0"]));
        }
        Some("verify") => {
            let _ = writeln!(s, "primal feasible: {}", bool_word(&r["primal_feasibility"]["feasible"]));
            let _ = writeln!(s, "primal value: {}", num(&r["report"]["primal_value"]));
            let _ = writeln!(s, "dual value: {}", num(&r["report"]["dual_value"]));
            let _ = writeln!(s, "gap: {}", num(&r["report"]["gap"]));
            let _ = writeln!(s, "max equality residual: {}", num(&r["report"]["max_equality_residual"]));
        }
        Some("sdp-convert") => {
            let f = &r["feasibility"];
            let _ = writeln!(s, "full-form value: {}", num(&r["ed_value"]));
            let _ = writeln!(s, "reduced value: {}", num(&r["edr_value"]));
            let _ = writeln!(s, "max equality residual: {}", num(&f["max_equality_residual"]));
            for (m, e) in f["level_min_eigs"].as_array().into_iter().flatten().enumerate() {
                let _ = writeln!(s, "level {m} Schur min eigenvalue: {}", num(e));
            }
            let _ = writeln!(s, "U min eigenvalue: {}", num(&f["u_min_eig"]));
        }
        _ => {}
    }
    s
}
