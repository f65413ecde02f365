use serde_json::Value;

use super::RunReport;

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Plain-text form: header, verdicts, then the body's top-level fields with
/// nested values as compact JSON.
pub(super) fn render(r: &RunReport) -> String {
    let mut s = format!("command: {}\n", r.command);
    if let Some(d) = &r.config_digest {
        s.push_str(&format!("config: {d}\n"));
    }
    for (k, v) in &r.params {
        s.push_str(&format!("{k}: {}\n", scalar(v)));
    }
    for (k, pass) in &r.verdicts {
        s.push_str(&format!("[{}] {k}\n", if *pass { "pass" } else { "FAIL" }));
    }
    s.push_str(&format!("result: {}\n", if r.pass { "pass" } else { "FAIL" }));
    if let Value::Object(m) = &r.body {
        for (k, v) in m {
            s.push_str(&format!("{k}: {}\n", scalar(v)));
        }
    }
    s
}
