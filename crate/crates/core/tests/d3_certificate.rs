//! Full three-dimensional certificate at the default search budget,
//! regressed against the reference minimisation tables.

use epistemic::config::{DEFAULT_RESTARTS, DEFAULT_SEED};
use epistemic::d3cert::{canonical_states, certify_k, optimize_all_triples, CertificateReport, D3Instance};
use epistemic::linalg::C64;
use epistemic::qstate::PureState;
use epistemic::triples::{pp_incompatible, triple_overlaps};
use std::sync::OnceLock;

const TOL: f64 = 2e-3;

fn run() -> &'static (D3Instance, CertificateReport) {
    static RUN: OnceLock<(D3Instance, CertificateReport)> = OnceLock::new();
    RUN.get_or_init(|| {
        let inst = canonical_states();
        let report = optimize_all_triples(&inst, DEFAULT_RESTARTS, DEFAULT_SEED).unwrap();
        (inst, report)
    })
}

/// Reference minimal misfire sums, `(alpha, beta) -> [(i, j) row-major]`.
const REFERENCE: [((usize, usize), [f64; 9]); 3] = [
    ((1, 2), [0.0, 0.0, 0.02280, 0.02046, 0.02854, 0.1119, 0.0, 0.0, 0.04198]),
    ((1, 3), [0.0, 0.0001107, 0.02699, 0.02046, 0.04659, 0.09913, 0.0, 0.00006005, 0.01415]),
    ((2, 3), [0.0, 0.0001284, 0.02836, 0.0, 0.0, 0.01016, 0.04370, 0.02959, 0.1035]),
];

#[test]
fn aggregates_and_k_bound() {
    let (_, r) = run();
    assert!(r.all_converged);
    assert!((r.grand_noise_sum - 0.649).abs() <= TOL, "{}", r.grand_noise_sum);
    assert!((r.overlap_weight_sum - 1.739).abs() <= TOL, "{}", r.overlap_weight_sum);
    assert!(r.k_bound <= 0.95, "{}", r.k_bound);
    assert!(r.k_bound >= 0.94);
    let fam = r.family_sums.iter().find(|f| (f.alpha, f.beta) == (1, 2)).unwrap();
    assert!((fam.triple_sum - 0.2257).abs() <= TOL, "{}", fam.triple_sum);
    let total: f64 = r.family_sums.iter().map(|f| f.triple_sum).sum();
    assert!((total - r.grand_noise_sum).abs() < 1e-12);
    assert!((certify_k(0.0, r.overlap_weight_sum).unwrap() - 1.0 / r.overlap_weight_sum).abs() < 1e-15);
}

#[test]
fn every_entry_matches_the_reference_tables() {
    let (inst, r) = run();
    assert_eq!(r.entries.len(), 27);
    for ((alpha, beta), values) in REFERENCE {
        for (idx, &expected) in values.iter().enumerate() {
            let (i, j) = (idx / 3 + 1, idx % 3 + 1);
            let e = r.entry(alpha, beta, i, j).unwrap();
            let x = triple_overlaps(inst.vector(alpha, i), inst.vector(beta, j), &inst.c).unwrap();
            if expected == 0.0 {
                assert!(e.epsilon < 1e-8, "({alpha},{beta}) ({i},{j}): {}", e.epsilon);
                assert!(pp_incompatible(&x), "({alpha},{beta}) ({i},{j})");
            } else {
                assert!((e.triple_sum - expected).abs() <= TOL, "({alpha},{beta}) ({i},{j}): {}", e.triple_sum);
                assert!(!pp_incompatible(&x), "({alpha},{beta}) ({i},{j})");
            }
            assert_eq!(e.pp_incompatible, pp_incompatible(&x));
            assert!((e.triple_sum - 3.0 * e.epsilon).abs() < 1e-15);
        }
    }
}

fn gram_schmidt(cols: [[(f64, f64); 3]; 3]) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = Vec::new();
    for col in cols {
        let mut v: Vec<C64> = col.iter().map(|&(re, im)| C64::new(re, im)).collect();
        for u in &out {
            let p: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= p * y;
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        out.push(v.into_iter().map(|z| z / n).collect());
    }
    out
}

/// The worst row of the first table, evaluated directly from a printed
/// minimising frame: the search must do at least as well.
#[test]
fn optimizer_beats_a_printed_frame() {
    let (inst, r) = run();
    let frame = gram_schmidt([
        [(-0.2272, -0.8467), (0.2018, 0.0689), (0.4148, -0.1180)],
        [(0.2412, 0.1173), (0.7575, 0.3690), (-0.1806, -0.4306)],
        [(0.1067, -0.3848), (-0.4565, 0.1902), (-0.6536, -0.4109)],
    ]);
    let states = [inst.vector(1, 2), inst.vector(2, 3), &inst.c];
    let direct: f64 = frame
        .iter()
        .zip(states)
        .map(|(f, s): (&Vec<C64>, &PureState)| {
            f.iter()
                .zip(s.amplitudes())
                .map(|(a, b)| a.conj() * b)
                .sum::<C64>()
                .norm_sqr()
        })
        .sum();
    assert!((direct - 0.1119).abs() <= TOL, "{direct}");
    let e = r.entry(1, 2, 2, 3).unwrap();
    assert!(e.triple_sum <= direct + 1e-9);
}
