//! Analytic report for one parameter set.

use randsld::analytics::{ds, guard, Analytic};
use randsld::{DropShuffleParams, GuardParams};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeParams {
    pub r: usize,
    pub p_steady: f64,
    pub p_cont: f64,
    pub p_drop: f64,
    /// Block for reach probabilities and hitting times.
    pub alpha: Vec<usize>,
    /// Choice point index inside `alpha`.
    pub i: usize,
    /// Largest test-case length for the drop-and-shuffle tables.
    pub l_max: usize,
}

impl Default for AnalyzeParams {
    fn default() -> Self {
        AnalyzeParams { r: 3, p_steady: 1.0 / 3.0, p_cont: 0.5, p_drop: 0.5, alpha: Vec::new(), i: 1, l_max: 3 }
    }
}

struct Verdicts(Vec<String>);

impl Verdicts {
    fn value<T: Serialize>(&mut self, v: Analytic<T>) -> Value {
        match v {
            Ok(x) => json!(x),
            Err(e) => {
                let msg = e.to_string();
                if !self.0.contains(&msg) {
                    self.0.push(msg.clone());
                }
                Value::String(msg)
            }
        }
    }
}

fn guard_section(p: &AnalyzeParams) -> Value {
    let g = match GuardParams::uniform(p.r, p.p_steady, p.p_cont) {
        Ok(g) => g,
        Err(e) => return json!({ "error": e.to_string() }),
    };
    let mut v = Verdicts(Vec::new());
    let eo_en = guard::guard_expectations(&g);
    let expected_outputs = v.value(eo_en.clone().map(|x| x.0));
    let expected_visits = v.value(eo_en.map(|x| x.1));
    let u: Vec<Value> = (1..=p.r + 1).map(|i| v.value(guard::guard_u(i, &g))).collect();
    let delta = v.value(guard::delta(&g));
    let reach_root = v.value(guard::block_reach_prob(&p.alpha, &g, true));
    let reach_block = v.value(guard::block_reach_prob(&p.alpha, &g, false));
    let mht = v.value(guard::guard_hitting_time(&p.alpha, p.i, &g));
    json!({
        "params": { "r": p.r, "p": p.p_steady, "p_c": p.p_cont },
        "eta": g.eta(),
        "nu": p.p_steady * p.p_cont,
        "expected_outputs": expected_outputs,
        "expected_visits": expected_visits,
        "delta": delta,
        "leave_upward": u,
        "block_reach": { "alpha": p.alpha, "from_root": reach_root, "from_block_start": reach_block },
        "hitting_time": { "alpha": p.alpha, "i": p.i, "value": mht },
        "valid": v.0.is_empty(),
        "reasons": v.0,
    })
}

fn ds_section(p: &AnalyzeParams) -> Value {
    let d = match DropShuffleParams::new(p.p_drop, p.r) {
        Ok(d) => d,
        Err(e) => return json!({ "error": e.to_string() }),
    };
    let mut v = Verdicts(Vec::new());
    let c = v.value(ds::ds_constant(&d));
    let q: Vec<f64> = (0..=p.l_max).map(|l| ds::ds_q(l, p.p_drop)).collect();
    let h: Vec<Value> = (0..=p.l_max).map(|l| v.value(ds::ds_h(l, &d))).collect();
    let mht: Vec<Value> = (0..=p.l_max).map(|l| v.value(ds::ds_hitting_time(l, &d))).collect();
    let mut quiet = Verdicts(Vec::new());
    let h_tb: Vec<Value> = (0..=p.l_max).map(|l| quiet.value(ds::ds_h_printed(l, &d))).collect();
    let mht_tb: Vec<Value> = (0..=p.l_max).map(|l| quiet.value(ds::ds_hitting_time_printed(l, &d))).collect();
    json!({
        "params": { "r": p.r, "p_d": p.p_drop },
        "bound": 1.0 - 1.0 / (p.r as f64).sqrt(),
        "C": c,
        "q": q,
        "h": h,
        "hitting_time": mht,
        "textbook": { "h": h_tb, "hitting_time": mht_tb },
        "valid": v.0.is_empty(),
        "reasons": v.0,
    })
}

pub fn analyze(p: &AnalyzeParams) -> Value {
    json!({ "guard": guard_section(p), "drop_shuffle": ds_section(p) })
}

/// Divergence conditions are reported, not raised.
pub fn is_divergence(v: &Value) -> bool {
    v.as_str().is_some_and(|s| s.starts_with("diverges"))
}
