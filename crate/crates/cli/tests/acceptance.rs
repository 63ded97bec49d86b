//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Tolerances are fixed below.

use epistemic::bounds::{noise_threshold, theorem2_bound};
use epistemic::mub::{generate_mub, largest_prime_power_leq};
use epistemic::qstate::random_unitary;
use epistemic::triples::{find_conjugate_basis, pp_incompatible, triple_overlaps, TripleOverlaps};
use serde_json::Value;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

const AGGREGATE_TOL: f64 = 2e-3;
const ENTRY_TOL: f64 = 2e-3;
const ZERO_ENTRY: f64 = 1e-8;
const CLOSED_FORM_TOL: f64 = 1e-12;
const THRESHOLD_TOL: f64 = 1e-4;
const EQUALITY_TOL: f64 = 1e-15;
/// Lowest misfire sum accepted for a PP-compatible triple.
const COMPATIBLE_FLOOR: f64 = 1e-14;
const PP_RESTARTS: usize = 50;
const SLACK_TOL: f64 = 1e-9;
const BORN_TOL: f64 = 1e-6;
const OVERLAP_TOL: f64 = 1e-4;
const SIGMAS: f64 = 5.0;

const D3_BUDGET: Duration = Duration::from_secs(300);
const SUITE_BUDGET: Duration = Duration::from_secs(60);
const SIM_BUDGET: Duration = Duration::from_secs(600);

/// Minimal misfire sums per triple, `(alpha, beta) -> (i, j)` row-major.
const TABLES: [((u64, u64), [f64; 9]); 3] = [
    ((1, 2), [0.0, 0.0, 0.02280, 0.02046, 0.02854, 0.1119, 0.0, 0.0, 0.04198]),
    ((1, 3), [0.0, 0.0001107, 0.02699, 0.02046, 0.04659, 0.09913, 0.0, 0.00006005, 0.01415]),
    ((2, 3), [0.0, 0.0001284, 0.02836, 0.0, 0.0, 0.01016, 0.04370, 0.02959, 0.1035]),
];

struct Run {
    code: i32,
    stdout: Vec<u8>,
    elapsed: Duration,
}

fn cli(args: &[&str]) -> Run {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_epistemic"))
        .args(args)
        .arg("--quiet")
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: out.stdout,
        elapsed: start.elapsed(),
    }
}

fn json(run: &Run) -> Value {
    serde_json::from_slice(&run.stdout).expect("valid JSON on stdout")
}

fn num(v: &Value, path: &str) -> f64 {
    v.pointer(path).and_then(Value::as_f64).unwrap_or(f64::NAN)
}

type Outcome = (bool, String);

fn criterion_d3(doc: &Value, run: &Run) -> Outcome {
    let grand = num(doc, "/result/grand_noise_sum");
    let overlap = num(doc, "/result/overlap_weight_sum");
    let k = num(doc, "/result/k_bound");
    let fam = doc["result"]["family_sums"]
        .as_array()
        .and_then(|a| a.iter().find(|f| f["alpha"] == 1 && f["beta"] == 2))
        .map(|f| num(f, "/triple_sum"))
        .unwrap_or(f64::NAN);
    let ok = run.code == 0
        && (grand - 0.649).abs() <= AGGREGATE_TOL
        && (overlap - 1.739).abs() <= AGGREGATE_TOL
        && k <= 0.95
        && (fam - 0.2257).abs() <= AGGREGATE_TOL
        && run.elapsed <= D3_BUDGET;
    (
        ok,
        format!(
            "grand={grand:.5} overlap={overlap:.5} k={k:.5} family(1,2)={fam:.5} time={:.1}s",
            run.elapsed.as_secs_f64()
        ),
    )
}

fn criterion_tables(doc: &Value) -> Outcome {
    let entries = doc["result"]["entries"].as_array().cloned().unwrap_or_default();
    let mut worst_zero: f64 = 0.0;
    let mut worst_dev: f64 = 0.0;
    let mut found = 0;
    for ((alpha, beta), values) in TABLES {
        for (idx, &expected) in values.iter().enumerate() {
            let (i, j) = (idx as u64 / 3 + 1, idx as u64 % 3 + 1);
            let Some(e) = entries
                .iter()
                .find(|e| e["alpha"] == alpha && e["beta"] == beta && e["i"] == i && e["j"] == j)
            else {
                continue;
            };
            found += 1;
            if expected == 0.0 {
                worst_zero = worst_zero.max(num(e, "/epsilon"));
            } else {
                worst_dev = worst_dev.max((num(e, "/triple_sum") - expected).abs());
            }
        }
    }
    let ok = found == 27 && worst_zero < ZERO_ENTRY && worst_dev <= ENTRY_TOL;
    (
        ok,
        format!("entries={found}/27 max zero-entry eps={worst_zero:.2e} max deviation={worst_dev:.2e}"),
    )
}

fn is_prime_power_oracle(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let p = (2..=n).find(|p| n % p == 0).unwrap();
    let mut m = n;
    while m % p == 0 {
        m /= p;
    }
    m == 1
}

fn criterion_closed_form() -> Outcome {
    // 40-digit decimal evaluations of (1 + sqrt(1 - 1/q))/q for q = 4 and q = 9
    let reference = [(4usize, 0.4665063509461096616909307926882340458678), (10, 0.2158676712868959295408658314229405984126)];
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for (d, want) in reference {
        match theorem2_bound(d) {
            Ok(b) => worst = worst.max((b.exact_bound - want).abs()),
            Err(_) => ok = false,
        }
    }
    let mut chain_failures = 0;
    for d in 4..=1024usize {
        let q = (2..=d).rev().find(|&q| is_prime_power_oracle(q)).unwrap();
        let Ok(b) = theorem2_bound(d) else {
            chain_failures += 1;
            continue;
        };
        let qf = q as f64;
        let exact = (1.0 + (1.0 - 1.0 / qf).sqrt()) / qf;
        let good = b.subdim_used == q
            && largest_prime_power_leq(d).ok() == Some(q)
            && (b.exact_bound - exact).abs() <= CLOSED_FORM_TOL
            && b.exact_bound < 2.0 / qf
            && b.exact_bound < 4.0 / (d as f64 - 1.0);
        if !good {
            chain_failures += 1;
        }
    }
    ok &= worst <= CLOSED_FORM_TOL && chain_failures == 0;
    (ok, format!("spot-check error={worst:.1e} chain failures (4..=1024)={chain_failures}"))
}

fn criterion_threshold() -> Outcome {
    let t4 = noise_threshold(4).unwrap_or(f64::NAN);
    let seq: Vec<f64> = [4, 5, 7, 8, 9].iter().map(|&d| noise_threshold(d).unwrap_or(f64::NAN)).collect();
    let decreasing = seq.windows(2).all(|w| w[1] < w[0]);
    let cli_run = cli(&["bound", "--threshold", "--dim", "4"]);
    let cli_t = num(&json(&cli_run), "/result/threshold");
    let ok = (t4 - 0.0034).abs() <= THRESHOLD_TOL && decreasing && cli_t == t4 && cli_run.code == 0;
    (ok, format!("threshold(4)={t4:.7} decreasing over 4,5,7,8,9: {decreasing}"))
}

fn criterion_pp() -> Outcome {
    let uniform = |d: usize| TripleOverlaps::new(1.0 / d as f64, 1.0 / d as f64, 1.0 / d as f64).unwrap();
    let predicate_ok = [4, 5, 7].iter().all(|&d| pp_incompatible(&uniform(d))) && !pp_incompatible(&uniform(3));
    let margin = uniform(4).cubic_margin();
    let fam = generate_mub(4).unwrap();
    let mut mismatches = 0;
    let mut classes = [0usize; 2];
    for t in 0..100u64 {
        let g = random_unitary(4, 9000 + t).unwrap().to_unitary();
        let [a, b, c] = if t < 80 {
            [0u64, 1, 2].map(|k| random_unitary(4, 19000 + 3 * t + k).unwrap().vector(0).clone())
        } else {
            // vectors from three distinct unbiased bases, globally rotated
            let base = (t % 3) as usize + 1;
            [0usize, 1, 2].map(|k| fam.basis(base + k).vector((t as usize + k) % 4).transformed(&g).unwrap())
        };
        let x = triple_overlaps(&a, &b, &c).unwrap();
        let pred = pp_incompatible(&x);
        let r = find_conjugate_basis(&a, &b, &c, PP_RESTARTS, t).unwrap();
        classes[pred as usize] += 1;
        let agrees = if pred { r.epsilon < ZERO_ENTRY } else { r.epsilon >= COMPATIBLE_FLOOR };
        if !agrees {
            mismatches += 1;
        }
    }
    // unbiased triple from an actual MUB family
    let mub_x = triple_overlaps(fam.basis(1).vector(0), fam.basis(2).vector(0), fam.basis(3).vector(0)).unwrap();
    let ok = predicate_ok && margin.abs() <= EQUALITY_TOL && mismatches == 0 && pp_incompatible(&mub_x);
    (
        ok,
        format!(
            "uniform predicate ok={predicate_ok} d=4 margin={margin:.1e} random mismatches={mismatches}/100 (incompatible {}, compatible {})",
            classes[1], classes[0]
        ),
    )
}

fn criterion_bonferroni() -> Outcome {
    let run = cli(&["bonferroni", "--instances", "1000", "--responses", "200", "--points", "50"]);
    let doc = json(&run);
    let u = num(&doc, "/result/union_bound/min_slack");
    let r = num(&doc, "/result/response_bound/min_slack");
    let n = (num(&doc, "/result/union_bound/instances"), num(&doc, "/result/response_bound/instances"));
    let ok = run.code == 0 && u >= -SLACK_TOL && r >= -SLACK_TOL && n == (1000.0, 200.0) && run.elapsed <= SUITE_BUDGET;
    (
        ok,
        format!("min slack union={u:.3e} response={r:.3e} time={:.2}s", run.elapsed.as_secs_f64()),
    )
}

fn criterion_ks() -> Outcome {
    let born = cli(&["model", "verify", "--model", "ks2", "--pairs", "100", "--seed", "7"]);
    let overlap = cli(&["model", "verify", "--model", "ks2", "--pairs", "50", "--seed", "8"]);
    let (b, o) = (json(&born), json(&overlap));
    let residual = num(&b, "/result/max_born_residual");
    let gap = num(&o, "/result/max_overlap_gap");
    let worst = num(&b, "/result/theorem1/worst_violation").max(num(&o, "/result/theorem1/worst_violation"));
    let ok = born.code == 0 && overlap.code == 0 && residual < BORN_TOL && gap < OVERLAP_TOL && worst <= OVERLAP_TOL;
    (
        ok,
        format!("max Born residual={residual:.2e} max |wC-wQ|={gap:.2e} worst wC-wQ={worst:.2e}"),
    )
}

fn criterion_simulation() -> Outcome {
    let shots = 1_000_000u64;
    let s = shots.to_string();
    let clean = cli(&["simulate", "--dim", "4", "--noise", "none", "--shots", &s, "--seed", "11"]);
    let noisy = cli(&["simulate", "--dim", "4", "--noise", "depolarizing:0.002", "--shots", &s, "--seed", "12"]);
    let (c, n) = (json(&clean), json(&noisy));
    let d = 4.0f64;
    let exact = 0.25 * (1.0 + 0.75f64.sqrt());

    // binomial spreads of the averaged frequencies
    let triples = c["result"]["design"].as_array().map(|a| a.len()).unwrap_or(0) as f64;
    let pairs = d * d * (d - 1.0) / 2.0;
    let sig = |q: f64, n: f64| (q * (1.0 - q) / (shots as f64 * n)).sqrt();
    let design_eps: f64 = c["result"]["design"]
        .as_array()
        .map(|a| a.iter().map(|t| num(t, "/epsilon")).fold(0.0, f64::max))
        .unwrap_or(f64::NAN);
    let q1 = num(&c, "/result/summary/eps1").max(design_eps);
    let slope = exact * d * d * (d - 1.0);
    let sigma_k = slope * 1.5 * d * sig(q1, 3.0 * triples);
    let k0 = num(&c, "/result/k_bound");
    let clean_ok = clean.code == 0 && (k0 - exact).abs() <= SIGMAS * sigma_k + CLOSED_FORM_TOL;

    let p = 0.002;
    let (e1, e2) = (p / 3.0, p / d);
    let (m1, m2) = (num(&n, "/result/summary/eps1"), num(&n, "/result/summary/eps2"));
    let (s1, s2) = (sig(e1, 3.0 * triples), sig(e2, 2.0 * pairs));
    let k = num(&n, "/result/k_bound");
    let noisy_ok = noisy.code == 0
        && design_eps < ZERO_ENTRY
        && (m1 - e1).abs() <= SIGMAS * s1
        && (m2 - e2).abs() <= SIGMAS * s2
        && k < 1.0;
    let elapsed = clean.elapsed + noisy.elapsed;
    let ok = clean_ok && noisy_ok && elapsed <= SIM_BUDGET;
    (
        ok,
        format!(
            "clean k={k0:.9} (ideal {exact:.9}); p=0.002: eps1={m1:.3e} ({:.1} sigma) eps2={m2:.3e} ({:.1} sigma) k={k:.4} time={:.1}s",
            (m1 - e1) / s1,
            (m2 - e2) / s2,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_determinism(dir: &Path) -> Outcome {
    let states = dir.join("states.json");
    std::fs::write(
        &states,
        r#"[{"dim":4,"amplitudes":[[1,0],[0,0],[0,0],[0,0]]},
            {"dim":4,"amplitudes":[[0.5,0],[0.5,0],[0.5,0],[0.5,0]]},
            {"dim":4,"amplitudes":[[0.5,0],[0,0.5],[-0.5,0],[0,-0.5]]}]"#,
    )
    .unwrap();
    let states = states.to_str().unwrap().to_string();
    let commands: Vec<Vec<&str>> = vec![
        vec!["mub", "--dim", "9"],
        vec!["pp-check", "--states", &states, "--restarts", "8"],
        vec!["bound", "--dim", "10", "--eps1", "0.001", "--eps2", "0.002"],
        vec!["d3", "--restarts", "4"],
        vec!["model", "verify", "--pairs", "20"],
        vec!["simulate", "--dim", "4", "--noise", "misalignment:0.02", "--shots", "5000", "--restarts", "4"],
        vec!["bonferroni", "--instances", "100", "--responses", "20"],
    ];
    let mut differing = Vec::new();
    for args in &commands {
        let runs: Vec<Vec<u8>> = [None, Some("1"), Some("4")]
            .iter()
            .map(|threads| {
                let mut a: Vec<&str> = args.clone();
                a.extend(["--seed", "5"]);
                if let Some(t) = threads {
                    a.extend(["--threads", t]);
                }
                let r = cli(&a);
                if r.code != 0 {
                    return Vec::new();
                }
                r.stdout
            })
            .collect();
        if runs[0].is_empty() || runs.iter().any(|r| r != &runs[0]) {
            differing.push(args[0]);
        }
    }
    (
        differing.is_empty(),
        format!("{} commands x 3 runs (default, 1, 4 threads); differing: {differing:?}", commands.len()),
    )
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("d3.json");
    let d3_run = cli(&["d3", "--restarts", "64", "--out", report.to_str().unwrap()]);
    let d3_doc: Value = std::fs::read(&report)
        .ok()
        .and_then(|b| serde_json::from_slice(&b).ok())
        .unwrap_or(Value::Null);

    let results: Vec<(&str, Outcome)> = vec![
        ("1 d=3 certificate", criterion_d3(&d3_doc, &d3_run)),
        ("2 table regression", criterion_tables(&d3_doc)),
        ("3 closed-form bound", criterion_closed_form()),
        ("4 noise threshold", criterion_threshold()),
        ("5 PP-incompatibility", criterion_pp()),
        ("6 inequality suite", criterion_bonferroni()),
        ("7 qubit KS model", criterion_ks()),
        ("8 simulated experiment", criterion_simulation()),
        ("9 determinism", criterion_determinism(dir.path())),
    ];
    let mut failed = 0;
    for (name, (ok, detail)) in &results {
        println!("{} criterion {name}: {detail}", if *ok { "PASS" } else { "FAIL" });
        failed += usize::from(!ok);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
