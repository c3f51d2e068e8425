//! End-to-end experiment runner: load, preprocess, under-sample per method,
//! split, train and evaluate the k-NN and dense-net classifiers, and persist
//! every artifact needed to reproduce the numbers.
//!
//! Artifacts written to the output directory:
//!
//! - `resolved_config.toml` — the fully resolved configuration; re-running
//!   it reproduces the run byte for byte
//! - `report.json` / `report.txt` — the deterministic run report
//! - `timings.json` — wall-clock timings (deliberately outside the report)
//! - per sampler cell: `<method>_audit.csv`, `<method>_{knn,dnn}_predictions.csv`,
//!   `<method>_{knn,dnn}_roc.csv`, `<method>_dnn_model.fbnet`
//!
//! An `INCOMPLETE` marker exists in the output directory while a run is in
//! flight; it is removed on success, so its presence flags aborted output.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use crate::config::{ExperimentConfig, ResampleScope};
use crate::dataset::{
    class_counts, load_csv, preprocess, stratified_split, LabeledDataset, PreprocessConfig,
    Scaling,
};
use crate::error::{Error, Result};
use crate::eval::{auc, confusion, roc_curve, summarize, RocCurve};
use crate::neighbors::KnnModel;
use crate::net::{paper_architecture, save_model, train, NetworkModel};
use crate::report::{
    CellReport, CellTiming, ClassCounts, DatasetSummary, ModelEval, ReferenceResults, RunReport,
    RunTimings,
};
use crate::resample::apply_sampler;

/// One row of the per-model predictions dump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionRow {
    pub row_id: u64,
    pub truth: u8,
    pub score: f64,
    pub label: u8,
}

/// Write predictions as CSV (`row_id,truth,score,label`); scores use
/// shortest round-trip formatting so reloading is exact.
pub fn write_predictions_csv(rows: &[PredictionRow], path: &Path) -> Result<()> {
    let mut out = String::from("row_id,truth,score,label\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.row_id, r.truth, r.score, r.label));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reload a predictions dump written by `write_predictions_csv`.
pub fn read_predictions_csv(path: &Path) -> Result<Vec<PredictionRow>> {
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = content.lines();
    match lines.next() {
        Some("row_id,truth,score,label") => {}
        other => {
            return Err(Error::CsvFormat {
                line: 1,
                message: format!("expected predictions header, found {other:?}"),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        let parse_err = || Error::CsvFormat {
            line: (i + 2) as u64,
            message: format!("bad predictions row {line:?}"),
        };
        if cells.len() != 4 {
            return Err(parse_err());
        }
        rows.push(PredictionRow {
            row_id: cells[0].parse().map_err(|_| parse_err())?,
            truth: cells[1].parse().map_err(|_| parse_err())?,
            score: cells[2].parse().map_err(|_| parse_err())?,
            label: cells[3].parse().map_err(|_| parse_err())?,
        });
    }
    Ok(rows)
}

/// Build the ROC curve for one evaluated cell and write it as CSV
/// (`threshold,fpr,tpr`). Refuses empty score sets.
pub fn emit_roc(y_true: &[u8], scores: &[f64], path: &Path) -> Result<RocCurve> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("no scores to emit".into()));
    }
    let curve = roc_curve(y_true, scores)?;
    curve.write_csv(path)?;
    Ok(curve)
}

struct EvaluatedModel {
    eval: ModelEval,
    rows: Vec<PredictionRow>,
}

fn evaluate_model(
    test: &LabeledDataset,
    labels: Vec<u8>,
    scores: Vec<f64>,
    predictions_file: String,
    roc_file: String,
    output_dir: &Path,
) -> Result<EvaluatedModel> {
    let rows: Vec<PredictionRow> = test
        .row_ids()
        .iter()
        .zip(test.labels())
        .zip(labels.iter().zip(&scores))
        .map(|((&row_id, &truth), (&label, &score))| PredictionRow {
            row_id,
            truth,
            score,
            label,
        })
        .collect();
    write_predictions_csv(&rows, &output_dir.join(&predictions_file))?;
    let curve = emit_roc(test.labels(), &scores, &output_dir.join(&roc_file))?;
    let cm = confusion(test.labels(), &labels)?;
    Ok(EvaluatedModel {
        eval: ModelEval {
            confusion: cm,
            metrics: summarize(&cm)?,
            auc: auc(&curve),
            predictions_file,
            roc_file,
        },
        rows,
    })
}

/// Execute the full experiment described by `cfg`, writing all artifacts
/// into `cfg.output_dir`. Fully deterministic given the resolved config.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<(RunReport, RunTimings)> {
    let total_timer = Instant::now();
    let out_dir = &cfg.output_dir;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let marker = out_dir.join("INCOMPLETE");
    std::fs::write(&marker, "run in progress or aborted\n").map_err(|e| Error::io(&marker, e))?;

    let raw = load_csv(&cfg.data_path, None).map_err(|e| e.in_stage("load"))?;
    let raw_counts = class_counts(&raw);
    let dataset = DatasetSummary {
        path: cfg.data_path.display().to_string(),
        rows: raw.n_rows(),
        counts: ClassCounts {
            majority: raw_counts.0,
            minority: raw_counts.1,
        },
        feature_columns: raw.n_features(),
    };

    // Column drop always happens up front; z-scoring happens here too when
    // fitted on the whole dataset, otherwise after the split (train-fitted).
    let scale_after_split = cfg.preprocess.fit_scope
        == crate::dataset::FitScope::TrainOnly
        && cfg.preprocess.scaling == Scaling::Zscore;
    let phase_a = PreprocessConfig {
        drop_columns: cfg.preprocess.drop_columns.clone(),
        scaling: if scale_after_split {
            Scaling::None
        } else {
            cfg.preprocess.scaling
        },
        fit_scope: cfg.preprocess.fit_scope,
    };
    let (base, _) = preprocess(&raw, &phase_a, None).map_err(|e| e.in_stage("preprocess"))?;

    let scale_split = |train: LabeledDataset,
                       test: LabeledDataset|
     -> Result<(LabeledDataset, LabeledDataset)> {
        if !scale_after_split {
            return Ok((train, test));
        }
        let zcfg = PreprocessConfig {
            drop_columns: vec![],
            scaling: Scaling::Zscore,
            fit_scope: cfg.preprocess.fit_scope,
        };
        let (train, stats) = preprocess(&train, &zcfg, None).map_err(|e| e.in_stage("preprocess"))?;
        let (test, _) =
            preprocess(&test, &zcfg, Some(&stats)).map_err(|e| e.in_stage("preprocess"))?;
        Ok((train, test))
    };

    // With train-only resampling the split is shared by every cell.
    let shared_split = match cfg.pipeline.resample_scope {
        ResampleScope::TrainOnly => {
            let (train, test) =
                stratified_split(&base, &cfg.split).map_err(|e| e.in_stage("split"))?;
            Some(scale_split(train, test)?)
        }
        ResampleScope::Whole => None,
    };

    let mut cells = Vec::with_capacity(cfg.sampler.len());
    let mut timings = RunTimings::default();
    for settings in &cfg.sampler {
        let method = settings.method.to_string();
        let sampler_cfg = settings.sampler_config();

        let sample_timer = Instant::now();
        let (counts_before, outcome, train_set, test_set) =
            match (&cfg.pipeline.resample_scope, &shared_split) {
                (ResampleScope::Whole, _) => {
                    let before = class_counts(&base);
                    let outcome = apply_sampler(&base, &sampler_cfg)
                        .map_err(|e| e.in_stage(format!("sampler/{method}")))?;
                    let (train, test) = stratified_split(&outcome.kept, &cfg.split)
                        .map_err(|e| e.in_stage(format!("split/{method}")))?;
                    let (train, test) = scale_split(train, test)?;
                    (before, outcome, train, test)
                }
                (ResampleScope::TrainOnly, Some((train, test))) => {
                    let before = class_counts(train);
                    let outcome = apply_sampler(train, &sampler_cfg)
                        .map_err(|e| e.in_stage(format!("sampler/{method}")))?;
                    let train = outcome.kept.clone();
                    (before, outcome, train, test.clone())
                }
                (ResampleScope::TrainOnly, None) => unreachable!("split computed above"),
            };
        let sample_ms = sample_timer.elapsed().as_millis();

        let after = class_counts(&outcome.kept);
        let audit_file = format!("{method}_audit.csv");
        outcome
            .write_audit_csv(&out_dir.join(&audit_file))
            .map_err(|e| e.in_stage(format!("sampler/{method}")))?;
        let mut removals: BTreeMap<String, usize> = BTreeMap::new();
        for removal in &outcome.removed {
            *removals.entry(removal.reason.to_string()).or_insert(0) += 1;
        }

        let knn_timer = Instant::now();
        let knn_model = KnnModel::fit(train_set.clone(), cfg.knn.k, cfg.knn.strategy)
            .map_err(|e| e.in_stage(format!("knn/{method}")))?;
        let votes = knn_model
            .classify_batch(test_set.features())
            .map_err(|e| e.in_stage(format!("knn/{method}")))?;
        let (knn_labels, knn_scores): (Vec<u8>, Vec<f64>) = votes.into_iter().unzip();
        let knn = evaluate_model(
            &test_set,
            knn_labels,
            knn_scores,
            format!("{method}_knn_predictions.csv"),
            format!("{method}_knn_roc.csv"),
            out_dir,
        )
        .map_err(|e| e.in_stage(format!("eval/knn/{method}")))?;
        let knn_ms = knn_timer.elapsed().as_millis();

        let dnn_timer = Instant::now();
        let specs = paper_architecture(train_set.n_features())?;
        let mut net_model = NetworkModel::new(train_set.n_features(), &specs, cfg.net.init_seed)?;
        let history = train(&mut net_model, &train_set, &cfg.net.train_config())
            .map_err(|e| e.in_stage(format!("net/{method}")))?;
        let final_epoch = history.last().expect("at least one epoch");
        let dnn_model_file = format!("{method}_dnn_model.fbnet");
        save_model(&net_model, &out_dir.join(&dnn_model_file))
            .map_err(|e| e.in_stage(format!("net/{method}")))?;
        let (dnn_labels, dnn_scores) = net_model
            .predict(test_set.features(), cfg.net.classify_threshold)
            .map_err(|e| e.in_stage(format!("net/{method}")))?;
        let dnn = evaluate_model(
            &test_set,
            dnn_labels,
            dnn_scores,
            format!("{method}_dnn_predictions.csv"),
            format!("{method}_dnn_roc.csv"),
            out_dir,
        )
        .map_err(|e| e.in_stage(format!("eval/dnn/{method}")))?;
        let dnn_ms = dnn_timer.elapsed().as_millis();

        // The dumps are the source of truth; the report must agree with
        // them exactly.
        debug_assert_eq!(knn.rows.len(), test_set.n_rows());
        debug_assert_eq!(dnn.rows.len(), test_set.n_rows());

        cells.push(CellReport {
            sampler: method.clone(),
            counts_before: ClassCounts {
                majority: counts_before.0,
                minority: counts_before.1,
            },
            counts_after: ClassCounts {
                majority: after.0,
                minority: after.1,
            },
            removals,
            passes: outcome.passes,
            train_rows: train_set.n_rows(),
            test_rows: test_set.n_rows(),
            audit_file,
            knn: knn.eval,
            dnn: dnn.eval,
            dnn_model_file,
            dnn_final_train_loss: final_epoch.loss,
            dnn_final_train_accuracy: final_epoch.accuracy,
        });
        timings.cells.push(CellTiming {
            sampler: method,
            sample_ms,
            knn_ms,
            dnn_ms,
        });
    }

    let report = RunReport {
        resolved_config: cfg.to_toml(),
        dataset,
        cells,
        reference: ReferenceResults::default(),
    };
    timings.total_ms = total_timer.elapsed().as_millis();

    let config_path = out_dir.join("resolved_config.toml");
    std::fs::write(&config_path, cfg.to_toml()).map_err(|e| Error::io(&config_path, e))?;
    let report_json = out_dir.join("report.json");
    std::fs::write(&report_json, report.to_json()).map_err(|e| Error::io(&report_json, e))?;
    let report_txt = out_dir.join("report.txt");
    std::fs::write(&report_txt, report.render_text()).map_err(|e| Error::io(&report_txt, e))?;
    let timings_path = out_dir.join("timings.json");
    std::fs::write(
        &timings_path,
        serde_json::to_string_pretty(&timings).expect("timings serialize"),
    )
    .map_err(|e| Error::io(&timings_path, e))?;

    std::fs::remove_file(&marker).map_err(|e| Error::io(&marker, e))?;
    Ok((report, timings))
}
