//! parse(render(x)) = x for every report type that crosses the JSON
//! boundary.

use num_bigint::BigUint;
use proptest::prelude::*;
use tmap_core::classes::enumerate_recursive;
use tmap_core::density::{density_report, empirical_density};
use tmap_core::dynamics::orbit;
use tmap_core::search::{
    conjecture_scan, mu_search, verify_all, MuSearchResult, ScanCheckpoint, ScanParams,
    VerifyConfig, VerifyReport,
};
use tmap_core::{ClassSet, DensityReport, OrbitTrace, Rat};

fn roundtrip<T>(value: &T)
where
    T: serde::Serialize + serde::de::DeserializeOwned + PartialEq + std::fmt::Debug,
{
    let text = serde_json::to_string(value).unwrap();
    let back: T = serde_json::from_str(&text).unwrap();
    assert_eq!(&back, value, "roundtrip changed the value: {text}");
}

#[test]
fn class_set_roundtrip() {
    let set: ClassSet = enumerate_recursive(2, 6, 10_000_000).unwrap();
    roundtrip(&set);

    // Field names are part of the interface.
    let text = serde_json::to_string(&set).unwrap();
    for key in ["\"n\"", "\"M\"", "\"modulus\"", "\"residues\""] {
        assert!(text.contains(key), "missing {key} in {text}");
    }
}

#[test]
fn density_report_roundtrip() {
    let plain: DensityReport = density_report(6, 8);
    roundtrip(&plain);

    let with_counts = empirical_density(3, 5_000, 30).unwrap();
    roundtrip(&with_counts);

    // Fractions ride as decimal strings plus a display rendering.
    let text = serde_json::to_string(&plain).unwrap();
    assert!(text.contains("\"num\""));
    assert!(text.contains("\"den\""));
    assert!(text.contains("\"display\""));
}

#[test]
fn orbit_trace_roundtrip() {
    let x = Rat::from_u64(13, 6).unwrap();
    let finite: OrbitTrace = orbit(&x, 50).unwrap();
    roundtrip(&finite);

    let capped = orbit(&Rat::from_u64(17, 3).unwrap(), 2).unwrap();
    roundtrip(&capped);
}

#[test]
fn scan_checkpoint_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ckpt.json");
    let params = ScanParams {
        m_lo: 2,
        m_hi: 3,
        a_hi: 200,
        cap: 2,
    };
    let ckpt: ScanCheckpoint = conjecture_scan(&params, &path).unwrap();
    assert!(!ckpt.exceeders.is_empty());
    roundtrip(&ckpt);

    // The on-disk bytes parse back to the same state too.
    let text = std::fs::read_to_string(&path).unwrap();
    let parsed: ScanCheckpoint = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed, ckpt);
}

#[test]
fn mu_and_verify_roundtrip() {
    let found: MuSearchResult = mu_search(3, 1, None, 1).unwrap();
    assert!(!found.cap_incidents.is_empty());
    roundtrip(&found);

    let missing = mu_search(3, 2, Some(BigUint::from(7u32)), 64).unwrap();
    roundtrip(&missing);

    let report: VerifyReport = verify_all(&VerifyConfig {
        class_equality: None,
        recurrence_closed_form: None,
        order_half_agreement: Some(Default::default()),
        family_orders: None,
        partial_sum_closed_forms: None,
    });
    roundtrip(&report);
}

proptest! {
    #[test]
    fn rational_fields_survive_any_value(num in any::<u64>(), den in 1u64..,
                                         shift in 0usize..200) {
        // Push values far beyond u64 to make sure nothing silently
        // round-trips through a machine integer.
        let num = BigUint::from(num) << shift;
        let den = BigUint::from(den) << (shift / 2);
        let r = Rat::new(num, den).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        let back: Rat = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, r);
    }
}
