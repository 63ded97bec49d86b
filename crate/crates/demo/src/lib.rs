//! Browser bindings. Every export returns a JSON string; errors come back as
//! rejected strings on the JS side.

use epistemic::bounds::{noisy_bound, theorem2_bound};
use epistemic::d3cert::{canonical_states, quantum_epsilon};
use epistemic::linalg::C64;
use epistemic::ontomodel::{ks_model_d2, OntologicalModel, MIN_GRID_RESOLUTION};
use epistemic::qstate::{quantum_overlap, PureState};
use epistemic::triples::{find_conjugate_basis, pp_incompatible, triple_overlaps};
use serde_json::json;
use wasm_bindgen::prelude::*;

type Res = Result<String, epistemic::Error>;

/// Bound on `k` for `d = 4..=max_dim`; with `eps > 0` also the noisy tight
/// bound for `eps1 = eps2 = eps` (where the dimension is a prime power).
pub fn bound_table(max_dim: usize, eps: f64) -> Res {
    let mut rows = Vec::new();
    for d in 4..=max_dim.max(4) {
        let b = theorem2_bound(d)?;
        let noisy = if eps > 0.0 {
            noisy_bound(b.subdim_used, eps, eps).ok().map(|(t, _)| t)
        } else {
            None
        };
        rows.push(json!({
            "dim": d,
            "subdim": b.subdim_used,
            "exact": b.exact_bound,
            "coarse": b.coarse_bound,
            "any_dim": b.coarse_bound_any_dim,
            "noisy": noisy,
        }));
    }
    Ok(serde_json::Value::Array(rows).to_string())
}

/// Qubit states `|0>` and the state at Bloch angle `theta` from it:
/// classical overlap in the Kochen–Specker model against the quantum one.
pub fn ks_overlap(theta: f64) -> Res {
    let model = ks_model_d2(MIN_GRID_RESOLUTION)?;
    let a = PureState::basis(2, 0)?;
    let b = PureState::new(vec![C64::new((theta / 2.0).cos(), 0.0), C64::new((theta / 2.0).sin(), 0.0)])?;
    Ok(json!({
        "theta": theta,
        "omega_c": model.overlap(&[&a, &b])?,
        "omega_q": quantum_overlap(&a, &b)?,
    })
    .to_string())
}

/// Conjugate-basis search for one triple `(e^alpha_i, e^beta_j, c)` of the
/// three-dimensional instance.
pub fn d3_triple(alpha: usize, beta: usize, i: usize, j: usize, restarts: usize, seed: u64) -> Res {
    if !(1..=3).contains(&alpha) || !(1..=3).contains(&beta) || alpha == beta || !(1..=3).contains(&i) || !(1..=3).contains(&j) {
        return Err(epistemic::Error::InvalidArgument("indices must be in 1..=3 with alpha != beta".into()));
    }
    let inst = canonical_states();
    let (a, b) = (inst.vector(alpha, i), inst.vector(beta, j));
    let r = find_conjugate_basis(a, b, &inst.c, restarts, seed)?;
    let (eps, sum) = quantum_epsilon(a, b, &inst.c, &r.basis)?;
    let x = triple_overlaps(a, b, &inst.c)?;
    let basis: Vec<Vec<[f64; 2]>> = r
        .basis
        .iter()
        .map(|f| f.amplitudes().iter().map(|z| [z.re, z.im]).collect())
        .collect();
    Ok(json!({
        "epsilon": eps,
        "triple_sum": sum,
        "misfires": r.misfires,
        "pp_incompatible": pp_incompatible(&x),
        "converged": r.converged,
        "agreeing_restarts": r.agreeing_restarts,
        "basis": basis,
    })
    .to_string())
}

fn js(r: Res) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen(js_name = boundTable)]
pub fn bound_table_js(max_dim: u32, eps: f64) -> Result<String, JsValue> {
    js(bound_table(max_dim as usize, eps))
}

#[wasm_bindgen(js_name = ksOverlap)]
pub fn ks_overlap_js(theta: f64) -> Result<String, JsValue> {
    js(ks_overlap(theta))
}

#[wasm_bindgen(js_name = d3Triple)]
pub fn d3_triple_js(alpha: u32, beta: u32, i: u32, j: u32, restarts: u32, seed: u32) -> Result<String, JsValue> {
    js(d3_triple(alpha as usize, beta as usize, i as usize, j as usize, restarts as usize, seed as u64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn bound_rows_cover_the_range() {
        let v: Value = serde_json::from_str(&bound_table(12, 1e-4).unwrap()).unwrap();
        let rows = v.as_array().unwrap();
        assert_eq!(rows.len(), 9);
        assert_eq!(rows[2]["subdim"], 5);
        assert!(rows[0]["noisy"].as_f64().unwrap() > rows[0]["exact"].as_f64().unwrap());
        let v: Value = serde_json::from_str(&bound_table(5, 0.0).unwrap()).unwrap();
        assert!(v[0]["noisy"].is_null());
    }

    #[test]
    fn ks_overlap_is_maximal() {
        for theta in [0.3, 1.0, 2.0, 3.0] {
            let v: Value = serde_json::from_str(&ks_overlap(theta).unwrap()).unwrap();
            let (c, q) = (v["omega_c"].as_f64().unwrap(), v["omega_q"].as_f64().unwrap());
            assert!((c - q).abs() < 1e-9, "{theta}: {c} vs {q}");
        }
    }

    #[test]
    fn d3_triple_reports_a_basis() {
        let v: Value = serde_json::from_str(&d3_triple(1, 2, 1, 1, 4, 1).unwrap()).unwrap();
        assert_eq!(v["basis"].as_array().unwrap().len(), 3);
        assert!(v["epsilon"].as_f64().unwrap() < 1e-8);
        assert!(d3_triple(1, 1, 1, 1, 4, 1).is_err());
    }
}
