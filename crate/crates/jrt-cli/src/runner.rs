use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use crate::config::{ConfigError, ScenarioConfig};
use crate::report::{Record, Report, Status};
use crate::suites::{self, Ctx};

/// FNV-1a over (seed, suite, sample id), so each sample's stream does not
/// depend on which other suites run.
pub fn sub_seed(seed: u64, suite: &str, sample_id: usize) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let bytes = seed.to_le_bytes().into_iter().chain(suite.bytes()).chain((sample_id as u64).to_le_bytes());
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn panic_message(e: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = e.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = e.downcast_ref::<String>() {
        s.clone()
    } else {
        "unknown panic".into()
    }
}

/// Runs every selected suite sequentially. Errors inside a sample become
/// failed records; only configuration problems abort the run.
pub fn run_suite(config: &ScenarioConfig) -> Result<Report, ConfigError> {
    config.validate()?;
    let ctx = Ctx::new(config).map_err(|e| ConfigError::Invalid { field: "prime", reason: e.to_string() })?;
    let mut records = Vec::new();
    for name in config.selected_suites() {
        let suite = suites::find(name).expect("validated");
        for id in 0..(suite.items)(&ctx) {
            let seed = sub_seed(config.seed, name, id);
            let start = Instant::now();
            let out = panic::catch_unwind(AssertUnwindSafe(|| (suite.body)(&ctx, id, seed)));
            let runtime_ms = config.timings.then(|| start.elapsed().as_millis() as u64);
            let bare = |status: Status, detail: String| Record {
                suite: name.to_string(),
                sample_id: id,
                check: "sample".into(),
                parameters: Default::default(),
                lhs: None,
                rhs: None,
                relation: None,
                status,
                runtime_ms,
                seed,
                detail: Some(detail),
            };
            match out {
                Ok(Ok(checks)) => records.extend(checks.into_iter().map(|c| Record {
                    suite: name.to_string(),
                    sample_id: id,
                    status: if c.holds() { Status::Pass } else { Status::Fail },
                    check: c.check,
                    parameters: c.parameters,
                    lhs: Some(c.lhs),
                    rhs: Some(c.rhs),
                    relation: Some(c.relation),
                    runtime_ms,
                    seed,
                    detail: None,
                })),
                Ok(Err(e @ jrt::Error::Unsupported(_))) => records.push(bare(Status::Skipped, e.to_string())),
                Ok(Err(e)) => records.push(bare(Status::Fail, e.to_string())),
                Err(p) => records.push(bare(Status::Fail, format!("panic: {}", panic_message(p)))),
            }
        }
    }
    Ok(Report::new(records, config.clone()))
}
