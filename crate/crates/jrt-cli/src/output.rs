use std::fmt::Write as _;

use crate::config::OutputFormat;
use crate::report::{Relation, Report};
use crate::suites::SuiteEntry;

pub fn render(report: &Report, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => serde_json::to_string_pretty(report).expect("report serializes") + "\n",
        OutputFormat::Text => text(report),
        OutputFormat::Csv => csv(report),
    }
}

fn text(report: &Report) -> String {
    let mut s = String::new();
    for r in &report.records {
        let _ = write!(s, "{:<7} {} #{} {}", r.status, r.suite, r.sample_id, r.check);
        if let (Some(l), Some(rh), Some(rel)) = (&r.lhs, &r.rhs, r.relation) {
            let op = if rel == Relation::Equal { "==" } else { "!=" };
            let _ = write!(s, ": {l} {op} {rh}");
        }
        if let Some(d) = &r.detail {
            let _ = write!(s, " ({d})");
        }
        if let Some(ms) = r.runtime_ms {
            let _ = write!(s, " [{ms} ms]");
        }
        s.push('\n');
    }
    let m = &report.summary;
    let _ = writeln!(s, "pass {} fail {} skipped {}", m.pass, m.fail, m.skipped);
    s
}

fn csv(report: &Report) -> String {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(["suite", "sample_id", "check", "status", "relation", "lhs", "rhs", "parameters", "seed", "runtime_ms", "detail"])
        .expect("in-memory write");
    for r in &report.records {
        w.write_record([
            r.suite.clone(),
            r.sample_id.to_string(),
            r.check.clone(),
            r.status.to_string(),
            r.relation.map(|x| json(&x)).unwrap_or_default(),
            r.lhs.as_ref().map(|x| json(x)).unwrap_or_default(),
            r.rhs.as_ref().map(|x| json(x)).unwrap_or_default(),
            json(&r.parameters),
            r.seed.to_string(),
            r.runtime_ms.map(|x| x.to_string()).unwrap_or_default(),
            r.detail.clone().unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

fn json<T: serde::Serialize + ?Sized>(v: &T) -> String {
    serde_json::to_string(v).expect("serializes")
}

pub fn render_suites(list: &[SuiteEntry], format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => serde_json::to_string_pretty(list).expect("serializes") + "\n",
        OutputFormat::Text | OutputFormat::Csv => {
            let mut s = String::new();
            for e in list {
                let flag = if e.default_run { "" } else { " [not run by default]" };
                let _ = writeln!(s, "{:<20} {}{}\n{:<20} defaults: {}", e.name, e.anchor, flag, "", e.defaults);
            }
            s
        }
    }
}
