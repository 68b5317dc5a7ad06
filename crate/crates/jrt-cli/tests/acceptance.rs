//! Acceptance run: one line per criterion. Every comparison is exact
//! (rational or Laurent-polynomial equality); the only numeric tolerance is
//! the wall-clock bound on the n = 1 fundamental-lemma runs.
//!
//! Three criteria are stated with a coefficient or sign that does not hold
//! numerically. For those the line reports the stated form as FAIL next to
//! the corrected form, and the run asserts exactly that split.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use jrt::finite::{self, Fq2};
use jrt_cli::report::{Record, Value};
use jrt_cli::{run_suite, Report, ScenarioConfig, Status};

const FL_TIME_LIMIT: Duration = Duration::from_secs(60);

fn run(prime: u64, rank: usize, samples: usize, seed: u64, suites: &[&str]) -> Report {
    let cfg = ScenarioConfig {
        prime,
        rank,
        samples,
        seed,
        suites: suites.iter().map(|s| s.to_string()).collect(),
        ..ScenarioConfig::default()
    };
    run_suite(&cfg).expect("valid config")
}

fn param<'a>(r: &'a Record, key: &str) -> Option<&'a str> {
    r.parameters.get(key).and_then(|v| v.as_str())
}

fn passed(r: &Record) -> bool {
    r.status == Status::Pass
}

/// Sampled pair suites force the side; the side read off the invariants must agree.
fn sides_consistent(rep: &Report) -> bool {
    rep.records.iter().all(|r| param(r, "side") == param(r, "side_from_invariants"))
}

fn count_side(rep: &Report, side: &str) -> usize {
    rep.records.iter().filter(|r| param(r, "side") == Some(side)).count()
}

fn fails(rep: &Report) -> usize {
    rep.records.iter().filter(|r| !passed(r)).count()
}

fn all_pass(rep: &Report) -> bool {
    !rep.records.is_empty() && rep.records.iter().all(passed)
}

fn lhs_is(rep: &Report, check: &str, expect: i64) -> bool {
    rep.records.iter().any(|r| r.check == check && passed(r) && r.lhs == Some(Value::Integer(expect)))
}

struct Outcome {
    ok: bool,
    /// Set when the criterion's own wording is known not to hold and a
    /// corrected form is checked instead.
    stated_fails: bool,
    line: String,
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn c1_fundamental_lemma() -> Outcome {
    let mut ok = true;
    let mut parts = vec![];
    for p in [3, 5] {
        let t = Instant::now();
        let rep = run(p, 1, 50, 7, &["fl_n1"]);
        let dt = t.elapsed();
        let (s, ns) = (count_side(&rep, "split"), count_side(&rep, "nonsplit"));
        let good = all_pass(&rep) && sides_consistent(&rep) && s >= 25 && ns >= 25 && dt < FL_TIME_LIMIT;
        ok &= good;
        parts.push(format!("p={p}: {s} split + {ns} nonsplit, {} fail, {:.1}s", fails(&rep), dt.as_secs_f64()));
    }
    Outcome { ok, stated_fails: false, line: format!("unit fundamental lemma n=1 (exact, < 60 s per prime): {}", parts.join("; ")) }
}

fn c2_quasi_canonical() -> Outcome {
    let mut ok = true;
    let mut parts = vec![];
    let mut stated_fail = 0;
    let mut stated_total = 0;
    for p in [3, 5] {
        let rep = run(p, 1, 50, 11, &["qcfl_n1"]);
        let good = all_pass(&rep) && sides_consistent(&rep) && count_side(&rep, "split") >= 25 && count_side(&rep, "nonsplit") >= 25;
        ok &= good;
        parts.push(format!("p={p}: {}/{} pairs", rep.records.iter().filter(|r| passed(r)).count(), rep.records.len()));
        let alt = run(p, 1, 50, 11, &["qcfl_n1_alt"]);
        stated_fail += fails(&alt);
        stated_total += alt.records.len();
    }
    let hom = run(3, 1, 20, 11, &["qcfl_hom_n1"]);
    ok &= all_pass(&hom) && sides_consistent(&hom);
    let hom_alt = run(3, 1, 20, 11, &["qcfl_hom_n1_alt"]);
    let hom_alt_fail = fails(&hom_alt);
    // The stated forms are expected to break on split samples.
    let documented = stated_fail > 0 && hom_alt_fail > 0;
    Outcome {
        ok: ok && documented,
        stated_fails: true,
        line: format!(
            "quasi-canonical FL n=1 (exact): stated u∗1 coefficient q^{{2(n+1)}}−1 FAIL ({stated_fail}/{stated_total} mismatches), \
             stated homogeneous form FAIL ({hom_alt_fail}/{} mismatches); corrected coefficient q^n−1 {} ({}), \
             homogeneous form with (−1)^n·c′(q^n−1) {} ({}/{} checks, direct = reduced)",
            hom_alt.records.len(),
            verdict(ok),
            parts.join("; "),
            verdict(all_pass(&hom)),
            hom.records.iter().filter(|r| passed(r)).count(),
            hom.records.len(),
        ),
    }
}

fn c3_semilie_reduction() -> Outcome {
    let mut ok = true;
    let mut stated_fail = 0;
    let mut parts = vec![];
    for n in [1, 2] {
        let rep = run(3, n, 10, 13, &["orb_red"]);
        ok &= all_pass(&rep) && rep.records.len() >= 10;
        parts.push(format!("n={n}: {}/{}", rep.records.iter().filter(|r| passed(r)).count(), rep.records.len()));
        stated_fail += fails(&run(3, n, 10, 13, &["orb_red_alt"]));
    }
    Outcome {
        ok: ok && stated_fail > 0,
        stated_fails: true,
        line: format!(
            "semi-Lie reduction (exact Laurent equality, p=3): stated coefficient q^{{2(n+1)}}−1 FAIL ({stated_fail}/20 mismatches); \
             corrected coefficient q^n−1 {} ({})",
            verdict(ok),
            parts.join(", ")
        ),
    }
}

fn sampled_over_ranks(suite: &str, samples: usize, seed: u64) -> (bool, String) {
    let mut ok = true;
    let mut parts = vec![];
    for n in [1, 2] {
        let rep = run(3, n, samples, seed, &[suite]);
        ok &= all_pass(&rep) && rep.records.len() >= samples;
        parts.push(format!("n={n}: {}/{}", rep.records.iter().filter(|r| passed(r)).count(), rep.records.len()));
    }
    (ok, parts.join(", "))
}

fn c4_translate() -> Outcome {
    let (ok, s) = sampled_over_ranks("u_translate", 15, 17);
    Outcome { ok, stated_fails: false, line: format!("u′ = h0·u translation factor (−1)^n q^{{ns}} (exact Laurent equality): {s}") }
}

fn c5_covariance() -> Outcome {
    let (ok, s) = sampled_over_ranks("covariance", 50, 19);
    Outcome { ok, stated_fails: false, line: format!("transfer factor covariance under GL_n(F0) conjugation (exact): {s}") }
}

fn c6_constants() -> Outcome {
    let mut ok = true;
    let mut parts = vec![];
    for (p, expect) in [(3, 80), (5, 624), (7, 2400)] {
        let rep = run(p, 1, 1, 0, &["constants"]);
        let good = all_pass(&rep) && lhs_is(&rep, "c_1", 1) && lhs_is(&rep, "c_prime_1_mirabolic_index", expect);
        ok &= good;
        parts.push(format!("q={p}: c′₁={expect}"));
    }
    Outcome { ok, stated_fails: false, line: format!("constants c₁ = 1, c′₁ = (q²+1)(q²−1) by mirabolic index (exact): {}", parts.join(", ")) }
}

fn c7_finite_counts() -> Outcome {
    let mut ok = true;
    for p in [3i64, 5, 7] {
        let rep = run(p as u64, 1, 1, 0, &["finite_counts"]);
        ok &= all_pass(&rep) && lhs_is(&rep, "type0_over_type2", p + 1) && lhs_is(&rep, "isotropic_lines_in_perp", p + 1);
    }
    Outcome { ok, stated_fails: false, line: "finite counts q+1 (type 0 over type 2, isotropic lines in u^⊥) at q = 3, 5, 7 (exact)".into() }
}

fn c8_orbit_counts() -> Outcome {
    let rep = run(3, 1, 1, 0, &["orbits_12"]);
    let mut ok = all_pass(&rep);
    let kfk5 = finite::kfk_n1(Fq2::new(5).expect("prime")).expect("finite computation");
    ok &= kfk5.equal;
    Outcome {
        ok,
        stated_fails: false,
        line: format!(
            "finite orbit counts at q=3 (1/1/2 orbits, transitivity, coset split, double coset) plus the n=1 double coset at q=5 (exact): {}/{} checks",
            rep.records.iter().filter(|r| passed(r)).count() + kfk5.equal as usize,
            rep.records.len() + 1
        ),
    }
}

fn c9_hecke() -> Outcome {
    let q3 = run(3, 1, 1, 0, &["hecke_conv"]);
    let q5 = run(5, 1, 1, 0, &["hecke_conv"]);
    let q5_coeffs = q5.records.iter().filter(|r| r.check == "phi2_coefficient").all(passed);
    let ok = all_pass(&q3) && q5_coeffs;
    Outcome { ok, stated_fails: false, line: "Hecke identities: convolution at 1 equals vol(K^{[2,0]}) at q=3; φ₂ coefficients at q = 3, 5 (exact)".into() }
}

fn c10_satake() -> Outcome {
    let ok = [3, 5].iter().all(|&p| all_pass(&run(p, 1, 1, 0, &["satake_mismatch"])));
    Outcome { ok, stated_fails: false, line: "Satake transforms q(X+X⁻¹) and q(X+2+X⁻¹) reproduced and unequal at q = 3, 5 (exact)".into() }
}

fn c11_bridge() -> Outcome {
    let (ok, s) = sampled_over_ranks("semilie_bridge", 12, 23);
    Outcome { ok, stated_fails: false, line: format!("group vs semi-Lie unitary orbital integral (exact): {s}") }
}

fn c12_type01() -> Outcome {
    let rep = run(3, 1, 30, 29, &["type01_n1"]);
    let ok = all_pass(&rep) && sides_consistent(&rep) && rep.records.len() >= 15;
    let alt = run(3, 1, 30, 29, &["type01_n1_alt"]);
    let stated_fail = fails(&alt);
    let nonsplit_fail = alt.records.iter().filter(|r| !passed(r) && param(r, "side") == Some("nonsplit")).count();
    Outcome {
        ok: ok && stated_fail > 0,
        stated_fails: true,
        line: format!(
            "type (0,1) transfer n=1, p=3 (exact): stated sign (−1)^{{n−1}} FAIL ({stated_fail}/{} mismatches, {nonsplit_fail} of them nonsplit); sign (−1)^n {} ({}/{})",
            alt.records.len(),
            verdict(ok),
            rep.records.iter().filter(|r| passed(r)).count(),
            rep.records.len()
        ),
    }
}

fn c13_oracles() -> Outcome {
    let rep = run(3, 1, 20, 31, &["window_oracles"]);
    let mut kinds = std::collections::BTreeMap::<String, (usize, usize)>::new();
    for r in &rep.records {
        let k = param(r, "kind").unwrap_or("?").to_string();
        let e = kinds.entry(k).or_default();
        e.0 += passed(r) as usize;
        e.1 += 1;
    }
    let ok = all_pass(&rep) && kinds.values().all(|&(_, n)| n >= 20);
    let s: Vec<_> = kinds.iter().map(|(k, (a, n))| format!("{k} {a}/{n}")).collect();
    Outcome { ok, stated_fails: false, line: format!("sandwich vs brute-force windows, p=3 (exact): {}", s.join(", ")) }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("1", c1_fundamental_lemma),
        ("2", c2_quasi_canonical),
        ("3", c3_semilie_reduction),
        ("4", c4_translate),
        ("5", c5_covariance),
        ("6", c6_constants),
        ("7", c7_finite_counts),
        ("8", c8_orbit_counts),
        ("9", c9_hecke),
        ("10", c10_satake),
        ("11", c11_bridge),
        ("12", c12_type01),
        ("13", c13_oracles),
    ];
    let mut all = true;
    for (id, f) in criteria {
        let t = Instant::now();
        let o = f();
        all &= o.ok;
        let tag = if o.stated_fails && o.ok {
            "FAIL as stated, PASS corrected".to_string()
        } else {
            verdict(o.ok).to_string()
        };
        println!("[{tag}] criterion {id:>2}: {} ({:.1}s)", o.line, t.elapsed().as_secs_f64());
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
