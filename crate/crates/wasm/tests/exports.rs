use serde_json::Value;
use zaktop_wasm::{bands_json, invariant_json, sweep_json};

#[test]
fn bands_of_gapped_chain() {
    let v: Value = serde_json::from_str(&bands_json("0:0.5,1:1", 65).unwrap()).unwrap();
    let lower = v["lower"].as_array().unwrap();
    let upper = v["upper"].as_array().unwrap();
    assert_eq!(lower.len(), 65);
    for (l, u) in lower.iter().zip(upper) {
        assert!((l.as_f64().unwrap() + u.as_f64().unwrap()).abs() < 1e-12);
    }
    // k = π sits at index 32: |z(π)| = |0.5 - 1|.
    assert!((upper[32].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(v["winding"], 1);
    let z0 = &v["z"][0];
    assert!((z0[0].as_f64().unwrap() - 1.5).abs() < 1e-12);
}

#[test]
fn bands_of_gapless_chain_have_no_winding() {
    let v: Value = serde_json::from_str(&bands_json("0:1,1:1", 17).unwrap()).unwrap();
    assert!(v["winding"].is_null());
}

#[test]
fn invariant_report() {
    let v: Value = serde_json::from_str(&invariant_json("1:1", 1024).unwrap()).unwrap();
    assert_eq!(v["z2"], 1);
    assert_eq!(v["azc_class"], "BDI");
    let v: Value = serde_json::from_str(&invariant_json("0:2,1:1", 1024).unwrap()).unwrap();
    assert_eq!(v["z2"], 0);
}

#[test]
fn invariant_rejects_gapless_chain() {
    let err = invariant_json("0:1,1:1", 1024).unwrap_err();
    assert!(err.contains("gapless"), "{err}");
}

#[test]
fn sweep_locates_closing() {
    let v: Value = serde_json::from_str(&sweep_json("0:0,1:1", "0:2,1:1", 41).unwrap()).unwrap();
    let transitions = v["transitions"].as_array().unwrap();
    assert_eq!(transitions.len(), 1);
    assert!((transitions[0]["t"].as_f64().unwrap() - 0.5).abs() < 1e-3);
}

#[test]
fn bad_input_is_an_error() {
    assert!(bands_json("1:x", 10).is_err());
    assert!(bands_json("1:1", 1).is_err());
    assert!(sweep_json("1:1", "1:1", 1).is_err());
}
