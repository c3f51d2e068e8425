//! Nearest-neighbor under-sampling: ENN, RENN, One-Sided Selection, and the
//! Neighborhood Cleaning Rule, plus Tomek-link detection, one-step CNN
//! condensation, and a seeded random ratio cap.
//!
//! Every sampler removes majority-class rows only and reports each removal
//! with the rule that caused it. Inputs are canonicalized into ascending
//! row-id order first, so the "lower id wins" distance tie rule is
//! independent of input row permutation and all outputs are deterministic
//! functions of (dataset, config, seed).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::dataset::{class_counts, LabeledDataset};
use crate::error::{Error, Result};
use crate::neighbors::{IndexStrategy, NeighborIndex};

/// Under-sampling method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerMethod {
    Enn,
    Renn,
    Oss,
    Ncr,
    /// Pass-through baseline; removes nothing.
    None,
}

impl std::fmt::Display for SamplerMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SamplerMethod::Enn => "enn",
            SamplerMethod::Renn => "renn",
            SamplerMethod::Oss => "oss",
            SamplerMethod::Ncr => "ncr",
            SamplerMethod::None => "none",
        };
        f.write_str(s)
    }
}

/// Stage order for One-Sided Selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OssOrder {
    /// Tomek-link removal first, then one-step CNN.
    #[default]
    TomekThenCnn,
    /// Classic order: one-step CNN first, then Tomek-link removal.
    CnnThenTomek,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub method: SamplerMethod,
    /// Neighbor count for the editing rules (ENN/RENN/NCR).
    pub enn_k: usize,
    /// Cap on repeated ENN passes in RENN.
    pub renn_max_iter: usize,
    /// Seed for CNN's random visiting order and the ratio step.
    pub seed: u64,
    /// Optional majority:minority cap applied after cleaning.
    pub target_ratio: Option<f64>,
    pub oss_order: OssOrder,
}

impl SamplerConfig {
    /// Defaults for a method: `enn_k` 3, 100 RENN passes max, a 10:1 ratio
    /// cap for the cleaning methods and no cap for the `none` baseline.
    pub fn new(method: SamplerMethod) -> Self {
        let target_ratio = match method {
            SamplerMethod::None => None,
            _ => Some(10.0),
        };
        Self {
            method,
            enn_k: 3,
            renn_max_iter: 100,
            seed: 0,
            target_ratio,
            oss_order: OssOrder::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.enn_k < 1 {
            return Err(Error::InvalidParameter {
                name: "enn_k",
                reason: "must be at least 1".into(),
            });
        }
        if self.renn_max_iter < 1 {
            return Err(Error::InvalidParameter {
                name: "renn_max_iter",
                reason: "must be at least 1".into(),
            });
        }
        if let Some(r) = self.target_ratio {
            if !(r >= 1.0) {
                return Err(Error::InvalidParameter {
                    name: "target_ratio",
                    reason: format!("must be at least 1, got {r}"),
                });
            }
        }
        Ok(())
    }
}

/// Why a row was removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalReason {
    /// Misclassified by the k-NN editing rule (ENN/RENN/NCR stage 1).
    Edited,
    /// Majority member of a Tomek link.
    Tomek,
    /// Correctly classified against the CNN store; carries no boundary
    /// information.
    Redundant,
    /// Random removal by the ratio cap.
    Ratio,
}

impl std::fmt::Display for RemovalReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RemovalReason::Edited => "edited",
            RemovalReason::Tomek => "tomek",
            RemovalReason::Redundant => "redundant",
            RemovalReason::Ratio => "ratio",
        };
        f.write_str(s)
    }
}

/// One removed row in the audit trail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Removal {
    pub row_id: u64,
    pub label: u8,
    pub reason: RemovalReason,
}

/// A reduced dataset plus the audit of what was removed and why.
#[derive(Debug, Clone)]
pub struct SamplerOutcome {
    pub kept: LabeledDataset,
    pub removed: Vec<Removal>,
    /// Number of ENN passes executed (RENN); 1 for single-pass methods,
    /// 0 for the `none` baseline.
    pub passes: usize,
}

impl SamplerOutcome {
    pub fn removed_ids(&self) -> Vec<u64> {
        self.removed.iter().map(|r| r.row_id).collect()
    }

    /// Write the removal audit as CSV: `row_id,label,reason`.
    pub fn write_audit_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("row_id,label,reason\n");
        for r in &self.removed {
            out.push_str(&format!("{},{},{}\n", r.row_id, r.label, r.reason));
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Run the configured method, then the ratio cap if one is set.
pub fn apply_sampler(d: &LabeledDataset, cfg: &SamplerConfig) -> Result<SamplerOutcome> {
    cfg.validate()?;
    let outcome = match cfg.method {
        SamplerMethod::Enn => enn(d, cfg.enn_k)?,
        SamplerMethod::Renn => renn(d, cfg.enn_k, cfg.renn_max_iter)?,
        SamplerMethod::Oss => oss(d, cfg)?,
        SamplerMethod::Ncr => ncr(d, cfg)?,
        SamplerMethod::None => SamplerOutcome {
            kept: d.sorted_by_row_id(),
            removed: Vec::new(),
            passes: 0,
        },
    };
    match cfg.target_ratio {
        Some(ratio) => enforce_ratio(outcome, ratio, cfg.seed),
        None => Ok(outcome),
    }
}

fn require_both_classes(d: &LabeledDataset) -> Result<()> {
    let (maj, min) = class_counts(d);
    if maj == 0 {
        return Err(Error::SingleClass { only_class: 1 });
    }
    if min == 0 {
        return Err(Error::SingleClass { only_class: 0 });
    }
    Ok(())
}

/// One ENN pass: positions of majority rows whose k nearest neighbors
/// (self excluded, within `d`) are strictly majority-minority. All decisions
/// are made against the unmodified input, then applied together.
fn enn_pass_positions(d: &LabeledDataset, k: usize) -> Result<Vec<usize>> {
    let index = NeighborIndex::build(d.features().clone(), IndexStrategy::Auto)?;
    let majority = d.positions_of_class(0);
    let labels = d.labels();
    let removed: Result<Vec<Option<usize>>> = majority
        .par_iter()
        .map(|&pos| {
            let row = d.features().row(pos);
            let res = index.knn_query(row.as_slice().expect("contiguous row"), k, Some(pos))?;
            let minority_votes = res
                .neighbor_ids
                .iter()
                .filter(|&&id| labels[id] == 1)
                .count();
            Ok((2 * minority_votes > k).then_some(pos))
        })
        .collect();
    Ok(removed?.into_iter().flatten().collect())
}

fn outcome_from_removed(
    d: &LabeledDataset,
    removed_positions: &[usize],
    reason_of: impl Fn(usize) -> RemovalReason,
    passes: usize,
) -> SamplerOutcome {
    let mut is_removed = vec![false; d.n_rows()];
    for &p in removed_positions {
        is_removed[p] = true;
    }
    let kept_positions: Vec<usize> = (0..d.n_rows()).filter(|&i| !is_removed[i]).collect();
    let mut removed: Vec<Removal> = removed_positions
        .iter()
        .map(|&p| Removal {
            row_id: d.row_ids()[p],
            label: d.labels()[p],
            reason: reason_of(p),
        })
        .collect();
    removed.sort_by_key(|r| r.row_id);
    SamplerOutcome {
        kept: d.select_rows(&kept_positions),
        removed,
        passes,
    }
}

/// Edited Nearest Neighbors: remove majority rows misclassified by the
/// strict majority of their k nearest neighbors.
pub fn enn(d: &LabeledDataset, k: usize) -> Result<SamplerOutcome> {
    require_both_classes(d)?;
    let d = d.sorted_by_row_id();
    let removed = enn_pass_positions(&d, k)?;
    Ok(outcome_from_removed(&d, &removed, |_| RemovalReason::Edited, 1))
}

/// Repeated ENN: apply ENN passes until one removes nothing or `max_iter`
/// is reached. `passes` counts every executed pass, including the final
/// empty one.
pub fn renn(d: &LabeledDataset, k: usize, max_iter: usize) -> Result<SamplerOutcome> {
    require_both_classes(d)?;
    if max_iter < 1 {
        return Err(Error::InvalidParameter {
            name: "renn_max_iter",
            reason: "must be at least 1".into(),
        });
    }
    if k >= d.n_rows() {
        return Err(Error::KTooLarge {
            k,
            available: d.n_rows().saturating_sub(1),
        });
    }
    let mut current = d.sorted_by_row_id();
    let mut removed: Vec<Removal> = Vec::new();
    let mut passes = 0;
    for _ in 0..max_iter {
        // A fully edited-out majority class ends the iteration, as does a
        // remainder too small to supply k neighbors; neither admits further
        // edits, so no pass runs.
        if current.positions_of_class(0).is_empty() || current.n_rows() <= k {
            break;
        }
        passes += 1;
        let pass_removed = enn_pass_positions(&current, k)?;
        if pass_removed.is_empty() {
            break;
        }
        for &p in &pass_removed {
            removed.push(Removal {
                row_id: current.row_ids()[p],
                label: current.labels()[p],
                reason: RemovalReason::Edited,
            });
        }
        let keep: Vec<usize> = (0..current.n_rows())
            .filter(|i| !pass_removed.contains(i))
            .collect();
        current = current.select_rows(&keep);
    }
    removed.sort_by_key(|r| r.row_id);
    Ok(SamplerOutcome {
        kept: current,
        removed,
        passes,
    })
}

/// Tomek links: unordered row-id pairs of opposite-label points that are
/// each other's single nearest neighbor (self excluded, ties by lower id).
pub fn tomek_links(d: &LabeledDataset) -> Result<Vec<(u64, u64)>> {
    require_both_classes(d)?;
    let d = d.sorted_by_row_id();
    tomek_link_positions(&d)
        .map(|pairs| {
            pairs
                .into_iter()
                .map(|(a, b)| (d.row_ids()[a], d.row_ids()[b]))
                .collect()
        })
}

/// Positional form of `tomek_links`; pairs are (smaller, larger) position.
fn tomek_link_positions(d: &LabeledDataset) -> Result<Vec<(usize, usize)>> {
    if d.n_rows() < 2 {
        return Ok(Vec::new());
    }
    let index = NeighborIndex::build(d.features().clone(), IndexStrategy::Auto)?;
    let nn = index.self_knn(1)?;
    let nn_of: Vec<usize> = nn.into_iter().map(|r| r.neighbor_ids[0]).collect();
    let labels = d.labels();
    let mut pairs = Vec::new();
    for a in 0..d.n_rows() {
        let b = nn_of[a];
        if a < b && nn_of[b] == a && labels[a] != labels[b] {
            pairs.push((a, b));
        }
    }
    Ok(pairs)
}

/// One-step condensed nearest neighbor: seed a store with every minority
/// row plus one randomly chosen majority row, visit the remaining majority
/// rows in seeded random order, and add each to the store only if the store
/// 1-NN-misclassifies it. Rows never added are removed as redundant.
pub fn cnn_condense(d: &LabeledDataset, seed: u64) -> Result<SamplerOutcome> {
    require_both_classes(d)?;
    let d = d.sorted_by_row_id();
    let removed = cnn_redundant_positions(&d, seed, None)?;
    Ok(outcome_from_removed(
        &d,
        &removed,
        |_| RemovalReason::Redundant,
        1,
    ))
}

/// Core of the one-step CNN rule, returning the redundant positions.
///
/// `removal_guard`, when present, is consulted before each removal with the
/// majority count that would remain; returning false blocks the removal and
/// every later one (the count can only shrink further).
fn cnn_redundant_positions(
    d: &LabeledDataset,
    seed: u64,
    removal_guard: Option<&dyn Fn(usize) -> bool>,
) -> Result<Vec<usize>> {
    let minority = d.positions_of_class(1);
    let mut majority = d.positions_of_class(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    majority.shuffle(&mut rng);

    let mut store: Vec<usize> = minority;
    store.push(majority[0]);
    let mut majority_remaining = majority.len();
    let mut removed = Vec::new();

    for &pos in &majority[1..] {
        let predicted = store_1nn_label(d, &store, pos);
        if predicted != 0 {
            store.push(pos);
            continue;
        }
        if let Some(guard) = removal_guard {
            if !guard(majority_remaining - 1) {
                break;
            }
        }
        removed.push(pos);
        majority_remaining -= 1;
    }
    removed.sort_unstable();
    Ok(removed)
}

/// Label of the store point nearest to `pos` (ties by lower position).
fn store_1nn_label(d: &LabeledDataset, store: &[usize], pos: usize) -> u8 {
    let q = d.features().row(pos);
    let q = q.as_slice().expect("contiguous row");
    let mut best: Option<(f64, usize)> = None;
    for &s in store {
        let row = d.features().row(s);
        let row = row.as_slice().expect("contiguous row");
        let mut dist2 = 0.0;
        for (a, b) in row.iter().zip(q) {
            let diff = a - b;
            dist2 += diff * diff;
        }
        if best.map_or(true, |b| (dist2, s) < b) {
            best = Some((dist2, s));
        }
    }
    d.labels()[best.expect("store is never empty").1]
}

/// One-Sided Selection: Tomek-link removal plus one-step CNN, in the
/// configured order.
pub fn oss(d: &LabeledDataset, cfg: &SamplerConfig) -> Result<SamplerOutcome> {
    require_both_classes(d)?;
    let d = d.sorted_by_row_id();
    let mut removed: Vec<Removal> = Vec::new();
    let mut current = d.clone();

    let run_tomek = |current: &LabeledDataset, removed: &mut Vec<Removal>| -> Result<LabeledDataset> {
        let link_majority: Vec<usize> = tomek_link_positions(current)?
            .into_iter()
            .flat_map(|(a, b)| [a, b])
            .filter(|&p| current.labels()[p] == 0)
            .collect();
        for &p in &link_majority {
            removed.push(Removal {
                row_id: current.row_ids()[p],
                label: 0,
                reason: RemovalReason::Tomek,
            });
        }
        let keep: Vec<usize> = (0..current.n_rows())
            .filter(|p| !link_majority.contains(p))
            .collect();
        Ok(current.select_rows(&keep))
    };
    let run_cnn = |current: &LabeledDataset, removed: &mut Vec<Removal>| -> Result<LabeledDataset> {
        if current.positions_of_class(0).is_empty() {
            return Ok(current.clone());
        }
        let redundant = cnn_redundant_positions(current, cfg.seed, None)?;
        for &p in &redundant {
            removed.push(Removal {
                row_id: current.row_ids()[p],
                label: 0,
                reason: RemovalReason::Redundant,
            });
        }
        let keep: Vec<usize> = (0..current.n_rows())
            .filter(|p| !redundant.contains(p))
            .collect();
        Ok(current.select_rows(&keep))
    };

    match cfg.oss_order {
        OssOrder::TomekThenCnn => {
            current = run_tomek(&current, &mut removed)?;
            current = run_cnn(&current, &mut removed)?;
        }
        OssOrder::CnnThenTomek => {
            current = run_cnn(&current, &mut removed)?;
            if !current.positions_of_class(0).is_empty() {
                current = run_tomek(&current, &mut removed)?;
            }
        }
    }
    removed.sort_by_key(|r| r.row_id);
    Ok(SamplerOutcome {
        kept: current,
        removed,
        passes: 1,
    })
}

/// Neighborhood Cleaning Rule: an ENN editing stage, then one-step CNN
/// removals guarded so the majority class never drops to half the minority
/// size or below.
pub fn ncr(d: &LabeledDataset, cfg: &SamplerConfig) -> Result<SamplerOutcome> {
    require_both_classes(d)?;
    let d = d.sorted_by_row_id();
    let minority_count = class_counts(&d).1;

    let edited = enn_pass_positions(&d, cfg.enn_k)?;
    let mut removed: Vec<Removal> = edited
        .iter()
        .map(|&p| Removal {
            row_id: d.row_ids()[p],
            label: 0,
            reason: RemovalReason::Edited,
        })
        .collect();
    let keep: Vec<usize> = (0..d.n_rows()).filter(|p| !edited.contains(p)).collect();
    let current = d.select_rows(&keep);

    let majority_left = current.positions_of_class(0).len();
    // Guard: a removal may not push the majority count to <= minority/2.
    let guard = |remaining: usize| 2 * remaining > minority_count;
    if majority_left > 0 && guard(majority_left - 1) {
        let redundant = cnn_redundant_positions(&current, cfg.seed, Some(&guard))?;
        for &p in &redundant {
            removed.push(Removal {
                row_id: current.row_ids()[p],
                label: 0,
                reason: RemovalReason::Redundant,
            });
        }
        let keep: Vec<usize> = (0..current.n_rows())
            .filter(|p| !redundant.contains(p))
            .collect();
        let kept = current.select_rows(&keep);
        removed.sort_by_key(|r| r.row_id);
        return Ok(SamplerOutcome {
            kept,
            removed,
            passes: 1,
        });
    }
    removed.sort_by_key(|r| r.row_id);
    Ok(SamplerOutcome {
        kept: current,
        removed,
        passes: 1,
    })
}

/// Majority rows to keep under a ratio cap: `ceil(ratio * minority)`.
pub fn ratio_target_majority(minority: usize, ratio: f64) -> usize {
    (ratio * minority as f64).ceil() as usize
}

/// If the kept set's majority:minority ratio exceeds `target_ratio`,
/// uniformly remove random majority rows (seeded) until the majority count
/// equals `ceil(target_ratio * minority)`; otherwise return the outcome
/// unchanged.
pub fn enforce_ratio(
    outcome: SamplerOutcome,
    target_ratio: f64,
    seed: u64,
) -> Result<SamplerOutcome> {
    if !(target_ratio >= 1.0) {
        return Err(Error::InvalidParameter {
            name: "target_ratio",
            reason: format!("must be at least 1, got {target_ratio}"),
        });
    }
    let (maj, min) = class_counts(&outcome.kept);
    if min == 0 || (maj as f64) <= target_ratio * (min as f64) {
        return Ok(outcome);
    }
    let keep_majority = ratio_target_majority(min, target_ratio);
    let mut majority = outcome.kept.positions_of_class(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    majority.shuffle(&mut rng);
    let dropped = &majority[keep_majority..];

    let mut removed = outcome.removed;
    for &p in dropped {
        removed.push(Removal {
            row_id: outcome.kept.row_ids()[p],
            label: 0,
            reason: RemovalReason::Ratio,
        });
    }
    removed.sort_by_key(|r| r.row_id);
    let mut is_dropped = vec![false; outcome.kept.n_rows()];
    for &p in dropped {
        is_dropped[p] = true;
    }
    let keep: Vec<usize> = (0..outcome.kept.n_rows())
        .filter(|&i| !is_dropped[i])
        .collect();
    Ok(SamplerOutcome {
        kept: outcome.kept.select_rows(&keep),
        removed,
        passes: outcome.passes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    /// 1-D dataset builder: (coordinate, label) per row, ids 0..n-1.
    fn line(points: &[(f64, u8)]) -> LabeledDataset {
        let features =
            Array2::from_shape_vec((points.len(), 1), points.iter().map(|p| p.0).collect())
                .unwrap();
        let labels = points.iter().map(|p| p.1).collect();
        let row_ids = (0..points.len() as u64).collect();
        LabeledDataset::new(features, labels, row_ids, vec!["x".into()]).unwrap()
    }

    #[test]
    fn enn_removes_boundary_majority_point() {
        // Majority at 0.0, 0.1, 4.8; minority at 4.9, 5.1. The majority
        // point 4.8 has neighbors {4.9, 5.1, 0.1}: two of three minority.
        let d = line(&[(0.0, 0), (0.1, 0), (4.8, 0), (4.9, 1), (5.1, 1)]);
        let out = enn(&d, 3).unwrap();
        assert_eq!(out.removed_ids(), vec![2]);
        assert_eq!(out.removed[0].reason, RemovalReason::Edited);
        assert_eq!(out.kept.row_ids(), &[0, 1, 3, 4]);
        assert_eq!(out.passes, 1);
    }

    #[test]
    fn enn_keeps_separated_clusters() {
        let d = line(&[(0.0, 0), (0.1, 0), (0.2, 0), (0.3, 0), (50.0, 1), (50.1, 1), (50.2, 1), (50.3, 1)]);
        let out = enn(&d, 3).unwrap();
        assert!(out.removed.is_empty());
        assert_eq!(out.kept.n_rows(), 8);
    }

    #[test]
    fn enn_is_deterministic() {
        let d = line(&[(0.0, 0), (0.1, 0), (4.8, 0), (4.9, 1), (5.1, 1)]);
        let a = enn(&d, 3).unwrap();
        let b = enn(&d, 3).unwrap();
        assert_eq!(a.removed, b.removed);
        assert_eq!(a.kept, b.kept);
    }

    #[test]
    fn enn_rejects_single_class() {
        let d = line(&[(0.0, 0), (1.0, 0), (2.0, 0)]);
        assert!(matches!(enn(&d, 1), Err(Error::SingleClass { only_class: 0 })));
    }

    #[test]
    fn renn_exposes_chain_removals() {
        // Minority at 0.0/0.2/0.4; a majority chain 0.6/0.8/1.0 where each
        // removal exposes the next point; a safe majority cluster at 5.x.
        let d = line(&[
            (0.0, 1),
            (0.2, 1),
            (0.4, 1),
            (0.6, 0),
            (0.8, 0),
            (1.0, 0),
            (5.0, 0),
            (5.1, 0),
            (5.2, 0),
        ]);
        let single = enn(&d, 3).unwrap();
        assert_eq!(single.removed_ids(), vec![3]);

        let repeated = renn(&d, 3, 100).unwrap();
        assert_eq!(repeated.removed_ids(), vec![3, 4, 5]);
        assert_eq!(repeated.passes, 3); // two removing passes + the empty one
        assert!(repeated.removed.len() > single.removed.len());
    }

    #[test]
    fn renn_fixed_point_equals_enn() {
        let d = line(&[(0.0, 0), (0.1, 0), (0.2, 0), (9.0, 1), (9.1, 1)]);
        let one = enn(&d, 3).unwrap();
        assert!(one.removed.is_empty());
        let rep = renn(&d, 3, 100).unwrap();
        assert_eq!(rep.kept, one.kept);
        assert_eq!(rep.passes, 1);
    }

    #[test]
    fn renn_with_cap_one_matches_enn() {
        let d = line(&[
            (0.0, 1),
            (0.2, 1),
            (0.4, 1),
            (0.6, 0),
            (0.8, 0),
            (1.0, 0),
            (5.0, 0),
            (5.1, 0),
            (5.2, 0),
        ]);
        let capped = renn(&d, 3, 1).unwrap();
        let one = enn(&d, 3).unwrap();
        assert_eq!(capped.removed, one.removed);
        assert_eq!(capped.kept, one.kept);
    }

    #[test]
    fn renn_is_idempotent() {
        let d = line(&[
            (0.0, 1),
            (0.2, 1),
            (0.4, 1),
            (0.6, 0),
            (0.8, 0),
            (1.0, 0),
            (5.0, 0),
            (5.1, 0),
            (5.2, 0),
        ]);
        let first = renn(&d, 3, 100).unwrap();
        let second = renn(&first.kept, 3, 100).unwrap();
        assert!(second.removed.is_empty());
    }

    #[test]
    fn tomek_finds_single_boundary_pair() {
        // Majority at 0.0 and 10.0, minority at 0.5: 0.0 and 0.5 are mutual
        // nearest neighbors; 10.0's nearest is 0.5 but not vice versa.
        let d = line(&[(0.0, 0), (10.0, 0), (0.5, 1)]);
        let links = tomek_links(&d).unwrap();
        assert_eq!(links, vec![(0, 2)]);
    }

    #[test]
    fn tomek_none_for_separated_clusters() {
        let d = line(&[(0.0, 0), (0.1, 0), (0.2, 0), (9.0, 1), (9.1, 1)]);
        assert!(tomek_links(&d).unwrap().is_empty());
    }

    #[test]
    fn tomek_invariant_under_mirroring() {
        let d = line(&[(0.0, 0), (10.0, 0), (0.5, 1), (3.0, 0), (2.8, 1)]);
        let mirrored = {
            let features = d.features().mapv(|v| -v);
            LabeledDataset::new(
                features,
                d.labels().to_vec(),
                d.row_ids().to_vec(),
                d.feature_names().to_vec(),
            )
            .unwrap()
        };
        assert_eq!(tomek_links(&d).unwrap(), tomek_links(&mirrored).unwrap());
    }

    #[test]
    fn cnn_collapses_redundant_cluster() {
        // Minority at 0.0; majority cluster at 10.0/10.1/10.2. Whichever
        // majority point seeds the store, both others classify correctly
        // against it and are removed.
        let d = line(&[(0.0, 1), (10.0, 0), (10.1, 0), (10.2, 0)]);
        for seed in 0..20 {
            let out = cnn_condense(&d, seed).unwrap();
            assert_eq!(out.removed.len(), 2, "seed {seed}");
            assert!(out
                .removed
                .iter()
                .all(|r| r.reason == RemovalReason::Redundant && r.label == 0));
            assert_eq!(class_counts(&out.kept), (1, 1));
            // Reproducible per seed.
            let again = cnn_condense(&d, seed).unwrap();
            assert_eq!(out.removed, again.removed);
        }
        // The documented walk-through: the store seeded with 10.0 keeps
        // exactly {0.0, 10.0} and drops 10.1 and 10.2.
        let seed_keeping_first = (0..100)
            .find(|&s| {
                let out = cnn_condense(&d, s).unwrap();
                out.kept.row_ids() == [0, 1]
            })
            .expect("some seed visits 10.0 first");
        let out = cnn_condense(&d, seed_keeping_first).unwrap();
        assert_eq!(out.removed_ids(), vec![2, 3]);
    }

    #[test]
    fn cnn_identical_points_keep_one() {
        let d = line(&[(0.0, 1), (7.0, 0), (7.0, 0), (7.0, 0), (7.0, 0)]);
        let out = cnn_condense(&d, 5).unwrap();
        assert_eq!(class_counts(&out.kept), (1, 1));
        assert_eq!(out.removed.len(), 3);
    }

    #[test]
    fn oss_combines_tomek_and_redundant_removals() {
        // Tomek pair (0.0, 0.5) plus a distant majority cluster that CNN
        // condenses to one representative.
        let d = line(&[(0.0, 0), (10.0, 0), (0.5, 1), (10.1, 0), (10.2, 0)]);
        let cfg = SamplerConfig {
            target_ratio: None,
            ..SamplerConfig::new(SamplerMethod::Oss)
        };
        let out = oss(&d, &cfg).unwrap();
        let tomek: Vec<u64> = out
            .removed
            .iter()
            .filter(|r| r.reason == RemovalReason::Tomek)
            .map(|r| r.row_id)
            .collect();
        let redundant: Vec<u64> = out
            .removed
            .iter()
            .filter(|r| r.reason == RemovalReason::Redundant)
            .map(|r| r.row_id)
            .collect();
        assert_eq!(tomek, vec![0]);
        assert_eq!(redundant.len(), 2);
        // Minority always retained.
        assert_eq!(class_counts(&out.kept).1, 1);
        assert!(out.kept.row_ids().contains(&2));
    }

    #[test]
    fn oss_without_links_equals_cnn() {
        let d = line(&[(0.0, 1), (0.1, 1), (10.0, 0), (10.1, 0), (10.2, 0)]);
        assert!(tomek_links(&d).unwrap().is_empty());
        let cfg = SamplerConfig {
            target_ratio: None,
            seed: 11,
            ..SamplerConfig::new(SamplerMethod::Oss)
        };
        let a = oss(&d, &cfg).unwrap();
        let b = cnn_condense(&d, 11).unwrap();
        assert_eq!(a.removed, b.removed);
        assert_eq!(a.kept, b.kept);
    }

    #[test]
    fn oss_orders_can_differ_but_keep_minority() {
        let d = line(&[(0.0, 0), (10.0, 0), (0.5, 1), (10.1, 0), (10.2, 0), (5.0, 1)]);
        for order in [OssOrder::TomekThenCnn, OssOrder::CnnThenTomek] {
            let cfg = SamplerConfig {
                target_ratio: None,
                oss_order: order,
                ..SamplerConfig::new(SamplerMethod::Oss)
            };
            let out = oss(&d, &cfg).unwrap();
            assert_eq!(class_counts(&out.kept).1, 2, "order {order:?}");
        }
    }

    #[test]
    fn ncr_guard_blocks_condensing_stage() {
        // Four minority, three clustered majority: ENN removes nothing, and
        // any CNN removal would drop the majority to 2 <= 4/2, so NCR must
        // equal plain ENN.
        let d = line(&[
            (0.0, 1),
            (0.1, 1),
            (0.2, 1),
            (0.3, 1),
            (10.0, 0),
            (10.05, 0),
            (10.1, 0),
        ]);
        let cfg = SamplerConfig {
            target_ratio: None,
            ..SamplerConfig::new(SamplerMethod::Ncr)
        };
        let out = ncr(&d, &cfg).unwrap();
        let plain = enn(&d, cfg.enn_k).unwrap();
        assert_eq!(out.removed, plain.removed);
        assert_eq!(out.kept, plain.kept);
    }

    #[test]
    fn ncr_combines_edited_and_redundant() {
        // The ENN example augmented with a distant redundant majority
        // cluster: stage 1 edits 4.8 away, stage 2 condenses the cluster.
        let d = line(&[
            (0.0, 0),
            (0.1, 0),
            (4.8, 0),
            (4.9, 1),
            (5.1, 1),
            (20.0, 0),
            (20.1, 0),
            (20.2, 0),
            (20.3, 0),
        ]);
        let cfg = SamplerConfig {
            target_ratio: None,
            seed: 4,
            ..SamplerConfig::new(SamplerMethod::Ncr)
        };
        let out = ncr(&d, &cfg).unwrap();
        let edited: Vec<u64> = out
            .removed
            .iter()
            .filter(|r| r.reason == RemovalReason::Edited)
            .map(|r| r.row_id)
            .collect();
        assert_eq!(edited, vec![2]);
        assert!(out
            .removed
            .iter()
            .any(|r| r.reason == RemovalReason::Redundant));
        // Minority intact; majority stays above half the minority count.
        let (maj, min) = class_counts(&out.kept);
        assert_eq!(min, 2);
        assert!(2 * maj > min);
    }

    #[test]
    fn ratio_target_matches_reference_counts() {
        assert_eq!(ratio_target_majority(492, 10.0), 4920);
        assert_eq!(ratio_target_majority(3, 2.5), 8);
        assert_eq!(ratio_target_majority(100, 10.0), 1000);
    }

    fn passthrough(d: &LabeledDataset) -> SamplerOutcome {
        SamplerOutcome {
            kept: d.clone(),
            removed: Vec::new(),
            passes: 0,
        }
    }

    #[test]
    fn enforce_ratio_caps_majority() {
        let mut points: Vec<(f64, u8)> = (0..150).map(|i| (i as f64, 0)).collect();
        points.extend((0..10).map(|i| (1000.0 + i as f64, 1)));
        let d = line(&points);
        let out = enforce_ratio(passthrough(&d), 10.0, 3).unwrap();
        assert_eq!(class_counts(&out.kept), (100, 10));
        assert_eq!(out.removed.len(), 50);
        assert!(out.removed.iter().all(|r| r.reason == RemovalReason::Ratio));
        // Deterministic per seed, different across seeds.
        let again = enforce_ratio(passthrough(&d), 10.0, 3).unwrap();
        assert_eq!(out.removed, again.removed);
        let other = enforce_ratio(passthrough(&d), 10.0, 4).unwrap();
        assert_ne!(out.removed, other.removed);
    }

    #[test]
    fn enforce_ratio_identity_when_already_balanced() {
        let d = line(&[(0.0, 0), (1.0, 0), (10.0, 1)]);
        let out = enforce_ratio(passthrough(&d), 10.0, 1).unwrap();
        assert!(out.removed.is_empty());
        assert_eq!(out.kept, d);
    }

    #[test]
    fn apply_sampler_chains_ratio_step() {
        let mut points: Vec<(f64, u8)> = (0..60).map(|i| (i as f64 * 0.01, 0)).collect();
        points.extend([(10.0, 1), (10.01, 1)]);
        let d = line(&points);
        let cfg = SamplerConfig {
            seed: 9,
            ..SamplerConfig::new(SamplerMethod::Enn)
        };
        let out = apply_sampler(&d, &cfg).unwrap();
        let (maj, min) = class_counts(&out.kept);
        assert_eq!(min, 2);
        assert_eq!(maj, 20); // ceil(10 * 2)
        assert!(out.removed.iter().any(|r| r.reason == RemovalReason::Ratio));
    }

    #[test]
    fn none_method_keeps_everything() {
        let d = line(&[(0.0, 0), (1.0, 0), (10.0, 1)]);
        let out = apply_sampler(&d, &SamplerConfig::new(SamplerMethod::None)).unwrap();
        assert_eq!(out.kept, d);
        assert!(out.removed.is_empty());
        assert_eq!(out.passes, 0);
    }

    #[test]
    fn audit_csv_lists_removals() {
        let d = line(&[(0.0, 0), (0.1, 0), (4.8, 0), (4.9, 1), (5.1, 1)]);
        let out = enn(&d, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("audit.csv");
        out.write_audit_csv(&path).unwrap();
        let content = std::fs::read_to_string(&path).unwrap();
        assert_eq!(content, "row_id,label,reason\n2,0,edited\n");
    }
}
