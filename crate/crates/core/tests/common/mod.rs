//! Shared test support: independent brute-force re-implementations of the
//! sampler rules, used as oracles against the library.
//!
//! Everything here works on plain row tuples with pairwise distance scans
//! and explicit sorts — no NeighborIndex, no SamplerOutcome plumbing. The
//! only shared machinery is the seeded shuffle that defines CNN's visiting
//! order, which is part of the procedure itself.

#![allow(dead_code)]

use std::collections::BTreeSet;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fraudbench::dataset::LabeledDataset;

/// (row id, coordinates, label), kept sorted by id.
pub type Row = (u64, Vec<f64>, u8);

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Ids of the k nearest rows to `rows[i]`, self excluded, ties by lower id.
pub fn knn_of(rows: &[Row], i: usize, k: usize) -> Vec<u64> {
    let mut dists: Vec<(f64, u64)> = rows
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, (id, x, _))| (sq_dist(x, &rows[i].1), *id))
        .collect();
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    dists.into_iter().take(k).map(|(_, id)| id).collect()
}

fn label_of(rows: &[Row], id: u64) -> u8 {
    rows.iter().find(|(rid, _, _)| *rid == id).unwrap().2
}

/// ENN by definition: majority rows whose k nearest neighbors are strictly
/// minority-majority, judged simultaneously on the full input.
pub fn enn_removed(rows: &[Row], k: usize) -> BTreeSet<u64> {
    let mut removed = BTreeSet::new();
    for (i, (id, _, label)) in rows.iter().enumerate() {
        if *label != 0 {
            continue;
        }
        let votes = knn_of(rows, i, k)
            .into_iter()
            .filter(|nid| label_of(rows, *nid) == 1)
            .count();
        if 2 * votes > k {
            removed.insert(*id);
        }
    }
    removed
}

/// Repeated ENN: iterate to a fixed point or the pass cap; counts every
/// executed pass, including the final empty one.
pub fn renn_removed(rows: &[Row], k: usize, max_iter: usize) -> (BTreeSet<u64>, usize) {
    let mut current: Vec<Row> = rows.to_vec();
    let mut removed = BTreeSet::new();
    let mut passes = 0;
    for _ in 0..max_iter {
        if !current.iter().any(|(_, _, l)| *l == 0) || current.len() <= k {
            break;
        }
        passes += 1;
        let pass = enn_removed(&current, k);
        if pass.is_empty() {
            break;
        }
        current.retain(|(id, _, _)| !pass.contains(id));
        removed.extend(pass);
    }
    (removed, passes)
}

/// Mutual-1-NN opposite-label pairs, as (smaller id, larger id).
pub fn tomek_pairs(rows: &[Row]) -> BTreeSet<(u64, u64)> {
    let nn: Vec<u64> = (0..rows.len()).map(|i| knn_of(rows, i, 1)[0]).collect();
    let mut pairs = BTreeSet::new();
    for (i, (id, _, label)) in rows.iter().enumerate() {
        let j = rows.iter().position(|(rid, _, _)| *rid == nn[i]).unwrap();
        if nn[j] == *id && *label != rows[j].2 {
            let (a, b) = (*id, rows[j].0);
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    pairs
}

/// One-step CNN store simulation. `guard_minority` carries the minority
/// count for the NCR variant: a removal must leave strictly more than half
/// that many majority rows, and the first blocked removal stops the stage.
pub fn cnn_removed(rows: &[Row], seed: u64, guard_minority: Option<usize>) -> BTreeSet<u64> {
    let minority_idx: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].2 == 1).collect();
    let mut majority_idx: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].2 == 0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    majority_idx.shuffle(&mut rng);

    let mut store: Vec<usize> = minority_idx;
    store.push(majority_idx[0]);
    let mut remaining = majority_idx.len();
    let mut removed = BTreeSet::new();
    for &cand in &majority_idx[1..] {
        // 1-NN against the store, ties by lower id.
        let best = store
            .iter()
            .map(|&s| (sq_dist(&rows[s].1, &rows[cand].1), rows[s].0, s))
            .min_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap())
            .unwrap();
        let predicted = rows[best.2].2;
        if predicted != 0 {
            store.push(cand);
            continue;
        }
        if let Some(minority_total) = guard_minority {
            if 2 * (remaining - 1) <= minority_total {
                break;
            }
        }
        removed.insert(rows[cand].0);
        remaining -= 1;
    }
    removed
}

/// OSS by definition, returning (tomek removals, redundant removals).
pub fn oss_removed(rows: &[Row], seed: u64, tomek_first: bool) -> (BTreeSet<u64>, BTreeSet<u64>) {
    let tomek_stage = |rows: &[Row]| -> BTreeSet<u64> {
        tomek_pairs(rows)
            .into_iter()
            .flat_map(|(a, b)| [a, b])
            .filter(|id| label_of(rows, *id) == 0)
            .collect()
    };
    let cnn_stage = |rows: &[Row]| -> BTreeSet<u64> {
        if rows.iter().any(|(_, _, l)| *l == 0) {
            cnn_removed(rows, seed, None)
        } else {
            BTreeSet::new()
        }
    };
    if tomek_first {
        let tomek = tomek_stage(rows);
        let survivors: Vec<Row> = rows
            .iter()
            .filter(|(id, _, _)| !tomek.contains(id))
            .cloned()
            .collect();
        let redundant = cnn_stage(&survivors);
        (tomek, redundant)
    } else {
        let redundant = cnn_stage(rows);
        let survivors: Vec<Row> = rows
            .iter()
            .filter(|(id, _, _)| !redundant.contains(id))
            .cloned()
            .collect();
        let tomek = if survivors.iter().any(|(_, _, l)| *l == 0) {
            tomek_stage(&survivors)
        } else {
            BTreeSet::new()
        };
        (tomek, redundant)
    }
}

/// NCR by definition: ENN stage then the guarded one-step CNN stage.
pub fn ncr_removed(rows: &[Row], k: usize, seed: u64) -> (BTreeSet<u64>, BTreeSet<u64>) {
    let minority_total = rows.iter().filter(|(_, _, l)| *l == 1).count();
    let edited = enn_removed(rows, k);
    let survivors: Vec<Row> = rows
        .iter()
        .filter(|(id, _, _)| !edited.contains(id))
        .cloned()
        .collect();
    let majority_left = survivors.iter().filter(|(_, _, l)| *l == 0).count();
    let redundant = if majority_left > 0 && 2 * (majority_left - 1) > minority_total {
        cnn_removed(&survivors, seed, Some(minority_total))
    } else {
        BTreeSet::new()
    };
    (edited, redundant)
}

/// Random grid dataset: ids 0..n-1, coordinates that are multiples of 0.25
/// in [0, 4) so every distance comparison is exact, both classes present.
pub fn random_grid_rows(rng: &mut ChaCha8Rng, min_rows: usize, max_rows: usize, dims: usize) -> Vec<Row> {
    let n = rng.random_range(min_rows.max(2)..=max_rows.max(2));
    let mut rows: Vec<Row> = (0..n)
        .map(|i| {
            let x: Vec<f64> = (0..dims)
                .map(|_| rng.random_range(0..16) as f64 * 0.25)
                .collect();
            // Skewed labels: minority is genuinely rarer most of the time.
            let label = u8::from(rng.random_range(0..4) == 0);
            (i as u64, x, label)
        })
        .collect();
    // Force both classes.
    rows[0].2 = 0;
    let last = rows.len() - 1;
    rows[last].2 = 1;
    rows
}

pub fn to_dataset(rows: &[Row]) -> LabeledDataset {
    let dims = rows[0].1.len();
    let flat: Vec<f64> = rows.iter().flat_map(|(_, x, _)| x.iter().copied()).collect();
    LabeledDataset::new(
        Array2::from_shape_vec((rows.len(), dims), flat).unwrap(),
        rows.iter().map(|(_, _, l)| *l).collect(),
        rows.iter().map(|(id, _, _)| *id).collect(),
        (0..dims).map(|j| format!("f{j}")).collect(),
    )
    .unwrap()
}
