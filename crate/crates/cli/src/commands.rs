//! Subcommand implementations. Each returns the JSON result, an optional
//! CSV rendering and a short text report.

use crate::output::csv_f64;
use epistemic::bounds::{noise_threshold, theorem2_bound, theorem2_bound_with_noise, KBoundReport};
use epistemic::d3cert::{self, canonical_states, CertificateReport};
use epistemic::expsim::{
    aggregate_eps, below_threshold, binomial_sigmas, depolarizing_prediction, design_for, experimental_k_bound,
    run_experiment, F4Diagnostic, FrequencyTable, NoiseChannel, NoiseConfig, NoiseSummary,
};
use epistemic::mub::{generate_mub, is_prime_power, verify_mub, MubFamily, MubReport};
use epistemic::ontomodel::{
    born_check, ks_model_d2, overlap_pair, random_inequality_suite, verify_theorem1, DiscreteModel, InequalitySuite,
    OntologicalModel, Theorem1Report,
};
use epistemic::qstate::{quantum_overlap, random_state_with, random_unitary_with, Measurement, PureState};
use epistemic::rng::stream_rng;
use epistemic::triples::{find_conjugate_basis, pp_incompatible, triple_overlaps};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

/// Why a command did not finish cleanly; selects the exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad input supplied by the user (exit 2).
    Usage(String),
    /// The computation failed or a check did not hold (exit 1).
    Compute(String),
}

impl From<epistemic::Error> for Failure {
    fn from(e: epistemic::Error) -> Self {
        Failure::Compute(e.to_string())
    }
}

pub struct Output<T> {
    pub result: T,
    pub csv: Option<String>,
    pub report: String,
    /// Set when the run finished but a convergence or validity check failed;
    /// outputs are still written before exiting with code 1.
    pub failed: Option<String>,
}

impl<T> Output<T> {
    fn new(result: T, report: String) -> Self {
        Self {
            result,
            csv: None,
            report,
            failed: None,
        }
    }
}

fn line(out: &mut String, label: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "  {label:<28} {value}");
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

// ---- mub ----

#[derive(Serialize)]
pub struct MubOutput {
    pub family: MubFamily,
    pub check: MubReport,
}

pub fn mub(dim: usize) -> Result<Output<MubOutput>, Failure> {
    let family = generate_mub(dim)?;
    let check = verify_mub(&family);
    let mut r = format!("mutually unbiased bases, d = {dim}\n");
    line(&mut r, "bases", family.len());
    line(&mut r, "max |fidelity - 1/d|", format!("{:.3e}", check.max_deviation));
    line(&mut r, "max orthonormality defect", format!("{:.3e}", check.max_orthonormality_defect));
    line(&mut r, "passes", check.passes);
    let failed = (!check.passes).then(|| "generated family failed verification".to_string());
    let mut out = Output::new(MubOutput { family, check }, r);
    out.failed = failed;
    Ok(out)
}

// ---- pp-check ----

#[derive(Deserialize)]
#[serde(untagged)]
enum StatesFile {
    List(Vec<PureState>),
    Wrapped { states: Vec<PureState> },
}

#[derive(Serialize)]
pub struct PpCheckOutput {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub pp_incompatible: bool,
    pub epsilon: f64,
    pub triple_sum: f64,
    pub misfires: [f64; 3],
    pub basis: Vec<PureState>,
    pub converged: bool,
    pub restarts: usize,
    pub agreeing_restarts: usize,
}

pub fn pp_check(states: &Path, restarts: usize, seed: u64) -> Result<Output<PpCheckOutput>, Failure> {
    let text = read_file(states)?;
    let parsed: StatesFile =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", states.display())))?;
    let list = match parsed {
        StatesFile::List(v) | StatesFile::Wrapped { states: v } => v,
    };
    let [a, b, c] = <[PureState; 3]>::try_from(list)
        .map_err(|v| Failure::Usage(format!("expected exactly 3 states, found {}", v.len())))?;
    let x = triple_overlaps(&a, &b, &c)?;
    let res = find_conjugate_basis(&a, &b, &c, restarts, seed)?;
    let pp = pp_incompatible(&x);
    let mut r = format!("PP-incompatibility check, d = {}\n", a.dim());
    line(&mut r, "fidelities (x1, x2, x3)", format!("{:.6}, {:.6}, {:.6}", x.x1, x.x2, x.x3));
    line(&mut r, "PP-incompatible", pp);
    line(&mut r, "minimal epsilon", format!("{:.6e}", res.epsilon));
    line(&mut r, "restarts agreeing", format!("{}/{}", res.agreeing_restarts, restarts));
    let failed = (!res.converged).then(|| "conjugate-basis search did not converge".to_string());
    let mut out = Output::new(
        PpCheckOutput {
            x1: x.x1,
            x2: x.x2,
            x3: x.x3,
            pp_incompatible: pp,
            epsilon: res.epsilon,
            triple_sum: res.triple_sum,
            misfires: res.misfires,
            basis: res.basis,
            converged: res.converged,
            restarts,
            agreeing_restarts: res.agreeing_restarts,
        },
        r,
    );
    out.failed = failed;
    Ok(out)
}

// ---- bound ----

#[derive(Serialize)]
#[serde(untagged)]
pub enum BoundOutput {
    Single(KBoundReport),
    Threshold(ThresholdOutput),
    Curve(Vec<KBoundReport>),
}

#[derive(Serialize)]
pub struct ThresholdOutput {
    pub dim: usize,
    pub subdim_used: usize,
    pub threshold: f64,
    /// Noise-adjusted bound with both averages at the threshold.
    pub bound_at_threshold: f64,
}

const BOUND_CSV_HEADER: &str = "dim,subdim_used,exact_bound,coarse_bound,coarse_bound_any_dim\n";

fn bound_csv_row(out: &mut String, b: &KBoundReport) {
    let _ = writeln!(
        out,
        "{},{},{},{},{}",
        b.dim,
        b.subdim_used,
        csv_f64(b.exact_bound),
        csv_f64(b.coarse_bound),
        csv_f64(b.coarse_bound_any_dim)
    );
}

fn bound_report(r: &mut String, b: &KBoundReport) {
    let _ = writeln!(r, "overlap-ratio bound, d = {} (evaluated at d' = {})", b.dim, b.subdim_used);
    line(r, "k <= (1 + sqrt(1-1/d'))/d'", format!("{:.12}", b.exact_bound));
    line(r, "k < 2/d'", format!("{:.12}", b.coarse_bound));
    line(r, "k < 4/(d-1)", format!("{:.12}", b.coarse_bound_any_dim));
    if let Some(n) = &b.noise_adjusted {
        line(r, "eps1, eps2", format!("{:e}, {:e}", n.eps1, n.eps2));
        line(r, "noisy bound (tight)", format!("{:.12}", n.tight));
        line(r, "noisy bound (coarse)", format!("{:.12}", n.coarse));
        line(r, "tight bound below 1", n.below_one);
    }
    if let Some(ok) = b.threshold_ok {
        line(r, "both eps below threshold", ok);
    }
}

pub fn bound(
    dim: usize,
    eps1: Option<f64>,
    eps2: Option<f64>,
    threshold: bool,
    up_to: Option<usize>,
) -> Result<Output<BoundOutput>, Failure> {
    let mut r = String::new();
    if threshold {
        let b = theorem2_bound(dim)?;
        let t = noise_threshold(b.subdim_used)?;
        let at = theorem2_bound_with_noise(b.subdim_used, t, t)?;
        let k = at.noise_adjusted.map(|n| n.tight).unwrap_or(f64::NAN);
        let _ = writeln!(r, "noise threshold, d = {dim} (evaluated at d' = {})", b.subdim_used);
        line(&mut r, "threshold", format!("{t:.10}"));
        line(&mut r, "noisy bound at threshold", format!("{k:.12}"));
        let csv = format!("dim,subdim_used,threshold\n{dim},{},{}\n", b.subdim_used, csv_f64(t));
        let mut out = Output::new(
            BoundOutput::Threshold(ThresholdOutput {
                dim,
                subdim_used: b.subdim_used,
                threshold: t,
                bound_at_threshold: k,
            }),
            r,
        );
        out.csv = Some(csv);
        return Ok(out);
    }
    if let Some(max) = up_to {
        if max < dim {
            return Err(Failure::Usage(format!("--up-to {max} is below --dim {dim}")));
        }
        let rows = (dim..=max).map(theorem2_bound).collect::<Result<Vec<_>, _>>()?;
        let mut csv = BOUND_CSV_HEADER.to_string();
        for b in &rows {
            bound_csv_row(&mut csv, b);
        }
        let _ = writeln!(r, "overlap-ratio bounds for d = {dim}..={max}");
        let last = rows.last().expect("non-empty range");
        line(&mut r, "d * bound at d = max", format!("{:.6}", last.exact_bound * max as f64));
        let mut out = Output::new(BoundOutput::Curve(rows), r);
        out.csv = Some(csv);
        return Ok(out);
    }
    let b = match (eps1, eps2) {
        (None, None) => theorem2_bound(dim)?,
        (e1, e2) => theorem2_bound_with_noise(dim, e1.unwrap_or(0.0), e2.unwrap_or(0.0))?,
    };
    bound_report(&mut r, &b);
    let mut csv = BOUND_CSV_HEADER.to_string();
    bound_csv_row(&mut csv, &b);
    let mut out = Output::new(BoundOutput::Single(b), r);
    out.csv = Some(csv);
    Ok(out)
}

// ---- d3 ----

#[derive(Serialize)]
pub struct D3Output {
    pub c: PureState,
    pub c_raw_norm: f64,
    /// `|<e^alpha_i|c>|^2`, row-major over `(alpha, i)`
    pub c_fidelities: Vec<f64>,
    #[serde(flatten)]
    pub certificate: CertificateReport,
}

pub fn d3(restarts: usize, seed: u64) -> Result<Output<D3Output>, Failure> {
    let inst = canonical_states();
    let cert = d3cert::optimize_all_triples(&inst, restarts, seed)?;
    let mut r = format!("three-dimensional certificate ({restarts} restarts per triple, seed {seed})\n");
    for f in &cert.family_sums {
        line(&mut r, &format!("family ({},{}) noise sum", f.alpha, f.beta), format!("{:.6}", f.triple_sum));
    }
    line(&mut r, "grand noise sum", format!("{:.6}", cert.grand_noise_sum));
    line(&mut r, "overlap weight sum", format!("{:.6}", cert.overlap_weight_sum));
    line(&mut r, "k bound", format!("{:.6}", cert.k_bound));
    line(&mut r, "k < 1 certified", cert.k_bound < 1.0 && cert.all_converged);
    line(&mut r, "all triples converged", cert.all_converged);
    let failed = d3cert::certify_report(&cert).err().map(|e| e.to_string());
    let csv = d3cert::to_csv(&cert);
    let mut out = Output::new(
        D3Output {
            c_fidelities: d3cert::c_fidelities(&inst),
            c: inst.c,
            c_raw_norm: inst.c_raw_norm,
            certificate: cert,
        },
        r,
    );
    out.csv = Some(csv);
    out.failed = failed;
    Ok(out)
}

// ---- model verify ----

#[derive(Serialize)]
pub struct ModelOutput {
    pub model: String,
    pub pairs: usize,
    pub born_tolerance: f64,
    pub violation_tolerance: f64,
    /// Largest Born residual over random projective measurements.
    pub max_born_residual: f64,
    pub born_checks: usize,
    /// Largest `|omega_C - omega_Q|` over the pairs.
    pub max_overlap_gap: f64,
    pub theorem1: Theorem1Report,
    pub passes: bool,
}

/// Random states, measurements and pairs for the qubit model.
fn ks_samples(pairs: usize, seed: u64) -> Result<(Vec<(PureState, Measurement)>, Vec<(PureState, PureState)>), Failure> {
    let mut born = Vec::with_capacity(pairs);
    let mut pp = Vec::with_capacity(pairs);
    for t in 0..pairs as u64 {
        let mut rng = stream_rng(seed, t);
        let psi = random_state_with(2, &mut rng)?;
        let m = Measurement::projective(&random_unitary_with(2, &mut rng)?);
        let phi = random_state_with(2, &mut rng)?;
        born.push((psi.clone(), m));
        pp.push((psi, phi));
    }
    Ok((born, pp))
}

fn discrete_samples(model: &DiscreteModel) -> (Vec<(PureState, Measurement)>, Vec<(PureState, PureState)>) {
    let kets: Vec<PureState> = model.kets().map(|(_, k)| k.clone()).collect();
    let born = kets
        .iter()
        .flat_map(|k| model.measurements().map(move |(_, m)| (k.clone(), m.clone())))
        .collect();
    let mut pairs = Vec::new();
    for (i, a) in kets.iter().enumerate() {
        for b in &kets[i + 1..] {
            pairs.push((a.clone(), b.clone()));
        }
    }
    (born, pairs)
}

pub fn model_verify(
    model_arg: &str,
    pairs: usize,
    seed: u64,
    resolution: usize,
    born_tol: f64,
    tol: f64,
) -> Result<Output<ModelOutput>, Failure> {
    let (model, born, pp): (Box<dyn OntologicalModel>, _, _) = if model_arg == "ks2" {
        let (b, p) = ks_samples(pairs, seed)?;
        (Box::new(ks_model_d2(resolution)?), b, p)
    } else {
        let text = read_file(Path::new(model_arg))?;
        let m = DiscreteModel::from_json_str(&text).map_err(|e| Failure::Usage(format!("{model_arg}: {e}")))?;
        let (b, p) = discrete_samples(&m);
        if p.is_empty() {
            return Err(Failure::Usage(format!("{model_arg}: model needs at least two kets")));
        }
        (Box::new(m), b, p)
    };
    let mut max_born: f64 = 0.0;
    for (psi, m) in &born {
        max_born = max_born.max(born_check(model.as_ref(), psi, m)?);
    }
    let mut gap: f64 = 0.0;
    for (a, b) in &pp {
        gap = gap.max((overlap_pair(model.as_ref(), a, b)? - quantum_overlap(a, b)?).abs());
    }
    let t1 = verify_theorem1(model.as_ref(), &pp, born_tol)?;
    let passes = max_born <= born_tol && t1.worst_violation <= tol;
    let mut r = format!("ontological model check: {model_arg}\n");
    line(&mut r, "pairs", pp.len());
    line(&mut r, "max Born residual", format!("{max_born:.3e}"));
    line(&mut r, "max |omega_C - omega_Q|", format!("{gap:.3e}"));
    line(&mut r, "worst omega_C - omega_Q", format!("{:.3e}", t1.worst_violation));
    line(&mut r, "Born-gate failures", t1.precondition_failures);
    line(&mut r, "omega_C <= omega_Q holds", passes);
    let failed = (!passes).then(|| "model check failed".to_string());
    let mut csv = String::from("index,omega_c,omega_q,born_residual,precondition_ok\n");
    for p in &t1.pairs {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            p.index,
            csv_f64(p.omega_c),
            csv_f64(p.omega_q),
            csv_f64(p.born_residual),
            p.precondition_ok
        );
    }
    let mut out = Output::new(
        ModelOutput {
            model: model_arg.to_string(),
            pairs: pp.len(),
            born_tolerance: born_tol,
            violation_tolerance: tol,
            max_born_residual: max_born,
            born_checks: born.len(),
            max_overlap_gap: gap,
            theorem1: t1,
            passes,
        },
        r,
    );
    out.csv = Some(csv);
    out.failed = failed;
    Ok(out)
}

/// The qubit model integrates exactly; the grid only serves support queries.
pub const DEFAULT_MODEL_RESOLUTION: usize = 64;

// ---- simulate ----

#[derive(Serialize)]
pub struct DesignTriple {
    pub alpha: usize,
    pub beta: usize,
    pub i: usize,
    pub j: usize,
    pub epsilon: f64,
}

#[derive(Serialize)]
pub struct Prediction {
    pub eps1: f64,
    pub eps2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

#[derive(Serialize)]
pub struct Threshold {
    pub value: f64,
    pub below: bool,
}

#[derive(Serialize)]
pub struct SimulateOutput {
    pub dim: usize,
    pub noise: NoiseConfig,
    pub design_restarts: usize,
    pub design: Vec<DesignTriple>,
    pub table: FrequencyTable,
    pub summary: NoiseSummary,
    pub k_bound: f64,
    /// `tight` for prime powers `d >= 4`, `general` otherwise.
    pub bound_form: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<Threshold>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depolarizing_prediction: Option<Prediction>,
    pub f4: F4Diagnostic,
}

pub fn simulate(
    dim: usize,
    channel: NoiseChannel,
    shots: u64,
    seed: u64,
    restarts: usize,
    batches: usize,
) -> Result<Output<SimulateOutput>, Failure> {
    let design = design_for(dim, restarts, seed)?;
    let noise = NoiseConfig {
        batches,
        ..NoiseConfig::new(channel, shots, seed)
    };
    let table = run_experiment(&design, &noise)?;
    let summary = aggregate_eps(&table, &design)?;
    let k_bound = experimental_k_bound(&summary)?;
    let bound_form = if dim >= 4 && is_prime_power(dim) { "tight" } else { "general" };
    let threshold = below_threshold(&summary).map(|(value, below)| Threshold { value, below });
    let prediction = match channel {
        NoiseChannel::Depolarizing { p } => {
            let (e1, e2) = depolarizing_prediction(&design, p);
            let (s1, s2) = binomial_sigmas(&design, shots, e1, e2);
            Some(Prediction {
                eps1: e1,
                eps2: e2,
                sigma1: s1,
                sigma2: s2,
            })
        }
        _ => None,
    };
    let f4 = table.f4_mass();

    let mut r = format!("simulated experiment, d = {dim}, noise {channel}, {shots} shots per setting\n");
    line(&mut r, "eps1 (triples)", format!("{:.6e}", summary.eps1));
    line(&mut r, "eps2 (same-basis pairs)", format!("{:.6e}", summary.eps2));
    if let Some(p) = &prediction {
        line(&mut r, "predicted eps1 +- sigma", format!("{:.6e} +- {:.1e}", p.eps1, p.sigma1));
        line(&mut r, "predicted eps2 +- sigma", format!("{:.6e} +- {:.1e}", p.eps2, p.sigma2));
    }
    match &threshold {
        Some(t) => line(&mut r, "threshold", format!("{:.6e} (both below: {})", t.value, t.below)),
        None => line(&mut r, "threshold", "n/a for this dimension"),
    }
    line(&mut r, &format!("k bound ({bound_form})"), format!("{k_bound:.6}"));
    line(&mut r, "k < 1", k_bound < 1.0);
    line(&mut r, "f4 mass (overall/worst)", format!("{:.3e} / {:.3e}", f4.overall, f4.worst_setting));

    let mut csv = String::from("kind,alpha,beta,i,j,prepared,outcome,count,frequency\n");
    for t in &table.triples {
        for (k, row) in t.counts.iter().enumerate() {
            let n: u64 = row.iter().sum();
            for (o, c) in row.iter().enumerate() {
                let _ = writeln!(
                    csv,
                    "triple,{},{},{},{},{},{},{},{}",
                    t.alpha,
                    t.beta,
                    t.i,
                    t.j,
                    k + 1,
                    o + 1,
                    c,
                    csv_f64(*c as f64 / n.max(1) as f64)
                );
            }
        }
    }
    for b in &table.bases {
        let n: u64 = b.counts.iter().sum();
        for (o, c) in b.counts.iter().enumerate() {
            let _ = writeln!(
                csv,
                "basis,{},,{},,{},{},{},{}",
                b.alpha,
                b.i,
                b.i,
                o + 1,
                c,
                csv_f64(*c as f64 / n.max(1) as f64)
            );
        }
    }

    let triples = design
        .triples
        .iter()
        .map(|t| DesignTriple {
            alpha: t.alpha,
            beta: t.beta,
            i: t.i,
            j: t.j,
            epsilon: t.epsilon,
        })
        .collect();
    let mut out = Output::new(
        SimulateOutput {
            dim,
            noise,
            design_restarts: restarts,
            design: triples,
            table,
            summary,
            k_bound,
            bound_form,
            threshold,
            depolarizing_prediction: prediction,
            f4,
        },
        r,
    );
    out.csv = Some(csv);
    Ok(out)
}

// ---- bonferroni ----

pub fn bonferroni(instances: usize, responses: usize, points: usize, seed: u64) -> Result<Output<InequalitySuite>, Failure> {
    let s = random_inequality_suite(instances, responses, points, seed)?;
    let mut r = format!("ontic inequality suite, {points} points, seed {seed}\n");
    for (name, st) in [("union bound", &s.union_bound), ("response bound", &s.response_bound)] {
        line(
            &mut r,
            name,
            format!(
                "{} instances, min slack {:.3e}, violations {}",
                st.instances, st.min_slack, st.violations
            ),
        );
    }
    line(&mut r, "passes", s.passes);
    let failed = (!s.passes).then(|| "inequality violated".to_string());
    let mut out = Output::new(s, r);
    out.failed = failed;
    Ok(out)
}
