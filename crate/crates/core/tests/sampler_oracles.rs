//! Sampler correctness against independent brute-force oracles, plus the
//! structural invariants every sampler must hold.

mod common;

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{
    cnn_removed, enn_removed, ncr_removed, oss_removed, random_grid_rows, renn_removed,
    to_dataset, tomek_pairs, Row,
};
use fraudbench::dataset::{class_counts, LabeledDataset};
use fraudbench::resample::{
    apply_sampler, cnn_condense, enforce_ratio, enn, ncr, oss, renn, tomek_links, OssOrder,
    RemovalReason, SamplerConfig, SamplerMethod, SamplerOutcome,
};

fn removed_set(outcome: &SamplerOutcome, reason: RemovalReason) -> BTreeSet<u64> {
    outcome
        .removed
        .iter()
        .filter(|r| r.reason == reason)
        .map(|r| r.row_id)
        .collect()
}

fn assert_partition(input: &LabeledDataset, outcome: &SamplerOutcome) {
    let mut all: Vec<u64> = outcome.kept.row_ids().to_vec();
    all.extend(outcome.removed.iter().map(|r| r.row_id));
    all.sort_unstable();
    let mut expected: Vec<u64> = input.row_ids().to_vec();
    expected.sort_unstable();
    assert_eq!(all, expected, "kept + removed must partition the input");
}

fn assert_minority_preserved(input: &LabeledDataset, outcome: &SamplerOutcome) {
    assert_eq!(
        class_counts(input).1,
        class_counts(&outcome.kept).1,
        "minority rows must never be removed"
    );
    assert!(outcome.removed.iter().all(|r| r.label == 0));
}

#[test]
fn samplers_match_brute_force_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xfb);
    for case in 0..120 {
        let dims = rng.random_range(1..=3);
        let rows = random_grid_rows(&mut rng, 2, 30, dims);
        let d = to_dataset(&rows);
        let k = rng.random_range(1..=3.min(rows.len() - 1));
        let seed = rng.random_range(0..1_000);
        check_all_samplers(&rows, &d, k, seed, case);
    }
}

fn check_all_samplers(rows: &[Row], d: &LabeledDataset, k: usize, seed: u64, case: usize) {
    let ctx = |name: &str| format!("case {case}, {name}, k {k}, seed {seed}, rows {rows:?}");

    let out = enn(d, k).unwrap();
    assert_eq!(removed_set(&out, RemovalReason::Edited), enn_removed(rows, k), "{}", ctx("enn"));
    assert_partition(d, &out);
    assert_minority_preserved(d, &out);

    let out = renn(d, k, 100).unwrap();
    let (oracle_removed, oracle_passes) = renn_removed(rows, k, 100);
    assert_eq!(removed_set(&out, RemovalReason::Edited), oracle_removed, "{}", ctx("renn"));
    assert_eq!(out.passes, oracle_passes, "{}", ctx("renn passes"));
    assert_partition(d, &out);
    assert_minority_preserved(d, &out);

    let links: BTreeSet<(u64, u64)> = tomek_links(d).unwrap().into_iter().collect();
    assert_eq!(links, tomek_pairs(rows), "{}", ctx("tomek"));

    let out = cnn_condense(d, seed).unwrap();
    assert_eq!(
        removed_set(&out, RemovalReason::Redundant),
        cnn_removed(rows, seed, None),
        "{}",
        ctx("cnn")
    );
    assert_partition(d, &out);
    assert_minority_preserved(d, &out);

    for (order, tomek_first) in [(OssOrder::TomekThenCnn, true), (OssOrder::CnnThenTomek, false)] {
        let cfg = SamplerConfig {
            seed,
            oss_order: order,
            target_ratio: None,
            ..SamplerConfig::new(SamplerMethod::Oss)
        };
        let out = oss(d, &cfg).unwrap();
        let (oracle_tomek, oracle_redundant) = oss_removed(rows, seed, tomek_first);
        assert_eq!(removed_set(&out, RemovalReason::Tomek), oracle_tomek, "{}", ctx("oss/tomek"));
        assert_eq!(
            removed_set(&out, RemovalReason::Redundant),
            oracle_redundant,
            "{}",
            ctx("oss/redundant")
        );
        assert_partition(d, &out);
        assert_minority_preserved(d, &out);
    }

    let cfg = SamplerConfig {
        seed,
        enn_k: k,
        target_ratio: None,
        ..SamplerConfig::new(SamplerMethod::Ncr)
    };
    let out = ncr(d, &cfg).unwrap();
    let (oracle_edited, oracle_redundant) = ncr_removed(rows, k, seed);
    assert_eq!(removed_set(&out, RemovalReason::Edited), oracle_edited, "{}", ctx("ncr/edited"));
    assert_eq!(
        removed_set(&out, RemovalReason::Redundant),
        oracle_redundant,
        "{}",
        ctx("ncr/redundant")
    );
    assert_partition(d, &out);
    assert_minority_preserved(d, &out);
    // The guard binds the condensing stage: once any redundant removal
    // happened, the majority must still exceed half the minority count.
    if !oracle_redundant.is_empty() {
        let (maj_after, min_after) = class_counts(&out.kept);
        assert!(2 * maj_after > min_after, "{}", ctx("ncr guard"));
    }
}

#[test]
fn enn_output_is_superset_of_renn_output() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..40 {
        let rows = random_grid_rows(&mut rng, 5, 30, 2);
        let d = to_dataset(&rows);
        let single = enn(&d, 3).unwrap();
        let repeated = renn(&d, 3, 100).unwrap();
        let single_kept: BTreeSet<u64> = single.kept.row_ids().iter().copied().collect();
        let repeated_kept: BTreeSet<u64> = repeated.kept.row_ids().iter().copied().collect();
        assert!(repeated_kept.is_subset(&single_kept));
    }
}

#[test]
fn renn_idempotent_on_random_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    for _ in 0..25 {
        let rows = random_grid_rows(&mut rng, 5, 25, 2);
        let d = to_dataset(&rows);
        let first = renn(&d, 3, 100).unwrap();
        if class_counts(&first.kept).0 == 0 || first.kept.n_rows() <= 3 {
            continue; // remainder cannot host another pass
        }
        let second = renn(&first.kept, 3, 100).unwrap();
        assert!(second.removed.is_empty());
        assert_eq!(second.passes, 1);
    }
}

#[test]
fn samplers_invariant_under_integer_translation() {
    // Grid coordinates plus integer offsets stay exactly representable, so
    // every distance comparison is unchanged and removals must be identical.
    let mut rng = ChaCha8Rng::seed_from_u64(79);
    for _ in 0..25 {
        let rows = random_grid_rows(&mut rng, 5, 25, 2);
        let shift: f64 = rng.random_range(-50..50) as f64;
        let shifted: Vec<Row> = rows
            .iter()
            .map(|(id, x, l)| (*id, x.iter().map(|v| v + shift).collect(), *l))
            .collect();
        let d = to_dataset(&rows);
        let ds = to_dataset(&shifted);
        for method in [
            SamplerMethod::Enn,
            SamplerMethod::Renn,
            SamplerMethod::Oss,
            SamplerMethod::Ncr,
        ] {
            let cfg = SamplerConfig {
                seed: 5,
                target_ratio: None,
                ..SamplerConfig::new(method)
            };
            let a = apply_sampler(&d, &cfg).unwrap();
            let b = apply_sampler(&ds, &cfg).unwrap();
            assert_eq!(a.removed, b.removed, "method {method}");
        }
    }
}

#[test]
fn ratio_step_counts_and_determinism() {
    let mut rng = ChaCha8Rng::seed_from_u64(80);
    for _ in 0..25 {
        let rows = random_grid_rows(&mut rng, 5, 30, 2);
        let d = to_dataset(&rows);
        let (maj, min) = class_counts(&d);
        let passthrough = SamplerOutcome {
            kept: d.clone(),
            removed: vec![],
            passes: 0,
        };
        let ratio = rng.random_range(1..=3) as f64;
        let out = enforce_ratio(passthrough.clone(), ratio, 11).unwrap();
        let (maj_after, min_after) = class_counts(&out.kept);
        assert_eq!(min_after, min);
        let cap = (ratio * min as f64).ceil() as usize;
        if maj as f64 > ratio * min as f64 {
            assert_eq!(maj_after, cap);
        } else {
            assert_eq!(maj_after, maj);
        }
        let again = enforce_ratio(passthrough, ratio, 11).unwrap();
        assert_eq!(out.removed, again.removed);
    }
}
