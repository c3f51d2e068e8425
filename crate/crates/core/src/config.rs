//! Experiment configuration: a single TOML file with defaults for
//! everything except the data path.
//!
//! Unknown keys are hard errors (the parse error lists the accepted keys),
//! and every invariant violation is reported with its field path. The
//! resolved configuration serializes back to the same grammar with all
//! defaults and derived seeds made explicit, so a persisted resolved config
//! reproduces the run exactly.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{FitScope, PreprocessConfig, Scaling, SplitSpec};
use crate::error::{Error, Result};
use crate::neighbors::IndexStrategy;
use crate::net::{OptimizerSpec, TrainConfig};
use crate::resample::{OssOrder, SamplerConfig, SamplerMethod};
use crate::seeding::stage_seed;

/// Which portion of the data the sampler runs on: the whole dataset before
/// splitting, or the train partition only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ResampleScope {
    #[default]
    Whole,
    TrainOnly,
}

#[derive(Debug, Clone, Serialize)]
pub struct KnnSettings {
    pub k: usize,
    pub strategy: IndexStrategy,
}

#[derive(Debug, Clone, Serialize)]
pub struct NetSettings {
    pub epochs: usize,
    pub batch_size: usize,
    pub classify_threshold: f64,
    pub init_seed: u64,
    pub shuffle_seed: u64,
    pub optimizer: OptimizerSpec,
}

impl NetSettings {
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            optimizer: self.optimizer,
            shuffle_seed: self.shuffle_seed,
            classify_threshold: self.classify_threshold,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SamplerSettings {
    pub method: SamplerMethod,
    pub enn_k: usize,
    pub renn_max_iter: usize,
    pub seed: u64,
    /// Whether to run the random ratio cap after cleaning.
    pub apply_ratio: bool,
    pub target_ratio: f64,
    pub oss_order: OssOrder,
}

impl SamplerSettings {
    pub fn sampler_config(&self) -> SamplerConfig {
        SamplerConfig {
            method: self.method,
            enn_k: self.enn_k,
            renn_max_iter: self.renn_max_iter,
            seed: self.seed,
            target_ratio: self.apply_ratio.then_some(self.target_ratio),
            oss_order: self.oss_order,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineSettings {
    pub resample_scope: ResampleScope,
}

/// Fully resolved experiment configuration: every default filled in, every
/// seed derived.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub data_path: PathBuf,
    pub output_dir: PathBuf,
    pub master_seed: u64,
    pub preprocess: PreprocessConfig,
    pub split: SplitSpec,
    pub knn: KnnSettings,
    pub net: NetSettings,
    pub sampler: Vec<SamplerSettings>,
    pub pipeline: PipelineSettings,
}

impl ExperimentConfig {
    /// TOML rendering of the resolved configuration; a valid config file in
    /// its own right.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

// --- raw file grammar -------------------------------------------------------

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    data_path: Option<PathBuf>,
    output_dir: Option<PathBuf>,
    master_seed: Option<u64>,
    preprocess: Option<RawPreprocess>,
    split: Option<RawSplit>,
    knn: Option<RawKnn>,
    net: Option<RawNet>,
    sampler: Option<Vec<RawSampler>>,
    pipeline: Option<RawPipeline>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPreprocess {
    drop_columns: Option<Vec<String>>,
    scaling: Option<Scaling>,
    fit_scope: Option<FitScope>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSplit {
    train_fraction: Option<f64>,
    stratified: Option<bool>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKnn {
    k: Option<usize>,
    strategy: Option<IndexStrategy>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNet {
    epochs: Option<usize>,
    batch_size: Option<usize>,
    classify_threshold: Option<f64>,
    init_seed: Option<u64>,
    shuffle_seed: Option<u64>,
    optimizer: Option<OptimizerSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSampler {
    method: SamplerMethod,
    enn_k: Option<usize>,
    renn_max_iter: Option<usize>,
    seed: Option<u64>,
    apply_ratio: Option<bool>,
    target_ratio: Option<f64>,
    oss_order: Option<OssOrder>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPipeline {
    resample_scope: Option<ResampleScope>,
}

/// Default sampler lineup when the file lists none: the four cleaning
/// methods, in the order they are usually reported.
fn default_sampler_methods() -> Vec<RawSampler> {
    [
        SamplerMethod::Renn,
        SamplerMethod::Enn,
        SamplerMethod::Oss,
        SamplerMethod::Ncr,
    ]
    .into_iter()
    .map(|method| RawSampler {
        method,
        enn_k: None,
        renn_max_iter: None,
        seed: None,
        apply_ratio: None,
        target_ratio: None,
        oss_order: None,
    })
    .collect()
}

/// Parse and validate a config file: defaults resolved, seeds derived from
/// the master seed, every invariant violation reported with its field path.
pub fn validate_config(path: &Path) -> Result<ExperimentConfig> {
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let raw: RawConfig =
        toml::from_str(&content).map_err(|e| Error::Config(vec![e.to_string()]))?;
    resolve_config(raw)
}

fn resolve_config(raw: RawConfig) -> Result<ExperimentConfig> {
    let mut problems: Vec<String> = Vec::new();

    let data_path = raw.data_path.unwrap_or_default();
    if data_path.as_os_str().is_empty() {
        problems.push("data_path: required, none given".into());
    }
    let master_seed = raw.master_seed.unwrap_or(42);

    let rp = raw.preprocess.unwrap_or_default();
    let preprocess = PreprocessConfig {
        drop_columns: rp.drop_columns.unwrap_or_else(|| vec!["Time".into()]),
        scaling: rp.scaling.unwrap_or_default(),
        fit_scope: rp.fit_scope.unwrap_or_default(),
    };

    let rs = raw.split.unwrap_or_default();
    let split = SplitSpec {
        train_fraction: rs.train_fraction.unwrap_or(0.8),
        stratified: rs.stratified.unwrap_or(true),
        seed: rs.seed.unwrap_or_else(|| stage_seed(master_seed, "split")),
    };
    if !(split.train_fraction > 0.0 && split.train_fraction < 1.0) {
        problems.push(format!(
            "split.train_fraction: must be in (0, 1), got {}",
            split.train_fraction
        ));
    }

    let rk = raw.knn.unwrap_or_default();
    let knn = KnnSettings {
        k: rk.k.unwrap_or(5),
        strategy: rk.strategy.unwrap_or_default(),
    };
    if knn.k < 1 {
        problems.push("knn.k: must be at least 1".into());
    }

    let rn = raw.net.unwrap_or_default();
    let net = NetSettings {
        epochs: rn.epochs.unwrap_or(100),
        batch_size: rn.batch_size.unwrap_or(32),
        classify_threshold: rn.classify_threshold.unwrap_or(0.5),
        init_seed: rn
            .init_seed
            .unwrap_or_else(|| stage_seed(master_seed, "net/init")),
        shuffle_seed: rn
            .shuffle_seed
            .unwrap_or_else(|| stage_seed(master_seed, "net/shuffle")),
        optimizer: rn.optimizer.unwrap_or_default(),
    };
    if net.epochs < 1 {
        problems.push("net.epochs: must be at least 1".into());
    }
    if net.batch_size < 1 {
        problems.push("net.batch_size: must be at least 1".into());
    }
    if !(net.classify_threshold > 0.0 && net.classify_threshold < 1.0) {
        problems.push(format!(
            "net.classify_threshold: must be in (0, 1), got {}",
            net.classify_threshold
        ));
    }
    let (OptimizerSpec::Sgd { learning_rate } | OptimizerSpec::Adam { learning_rate }) =
        net.optimizer;
    if !(learning_rate.is_finite() && learning_rate >= 0.0) {
        problems.push(format!(
            "net.optimizer.learning_rate: must be finite and nonnegative, got {learning_rate}"
        ));
    }

    let raw_samplers = match raw.sampler {
        Some(list) if list.is_empty() => {
            problems.push("sampler: at least one entry required".into());
            Vec::new()
        }
        Some(list) => list,
        None => default_sampler_methods(),
    };
    let mut sampler = Vec::with_capacity(raw_samplers.len());
    for (i, s) in raw_samplers.into_iter().enumerate() {
        let resolved = SamplerSettings {
            method: s.method,
            enn_k: s.enn_k.unwrap_or(3),
            renn_max_iter: s.renn_max_iter.unwrap_or(100),
            seed: s
                .seed
                .unwrap_or_else(|| stage_seed(master_seed, &format!("sampler/{}", s.method))),
            apply_ratio: s
                .apply_ratio
                .unwrap_or(s.method != SamplerMethod::None),
            target_ratio: s.target_ratio.unwrap_or(10.0),
            oss_order: s.oss_order.unwrap_or_default(),
        };
        if resolved.enn_k < 1 {
            problems.push(format!("sampler[{i}].enn_k: must be at least 1"));
        }
        if resolved.renn_max_iter < 1 {
            problems.push(format!("sampler[{i}].renn_max_iter: must be at least 1"));
        }
        if resolved.apply_ratio && !(resolved.target_ratio >= 1.0) {
            problems.push(format!(
                "sampler[{i}].target_ratio: must be at least 1, got {}",
                resolved.target_ratio
            ));
        }
        if sampler
            .iter()
            .any(|other: &SamplerSettings| other.method == resolved.method)
        {
            problems.push(format!(
                "sampler[{i}].method: duplicate method {}; each cell needs a distinct method",
                resolved.method
            ));
        }
        sampler.push(resolved);
    }

    let pipeline = PipelineSettings {
        resample_scope: raw
            .pipeline
            .unwrap_or_default()
            .resample_scope
            .unwrap_or_default(),
    };

    if !problems.is_empty() {
        return Err(Error::Config(problems));
    }
    Ok(ExperimentConfig {
        data_path,
        output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("out")),
        master_seed,
        preprocess,
        split,
        knn,
        net,
        sampler,
        pipeline,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn config_from(content: &str) -> Result<ExperimentConfig> {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        validate_config(f.path())
    }

    #[test]
    fn minimal_config_gets_full_defaults() {
        let cfg = config_from("data_path = \"data.csv\"\n").unwrap();
        assert_eq!(cfg.knn.k, 5);
        assert_eq!(cfg.net.epochs, 100);
        assert_eq!(cfg.net.batch_size, 32);
        assert_eq!(cfg.split.train_fraction, 0.8);
        assert_eq!(cfg.master_seed, 42);
        assert_eq!(cfg.sampler.len(), 4);
        assert!(cfg.sampler.iter().all(|s| s.apply_ratio && s.target_ratio == 10.0));
        assert_eq!(cfg.preprocess.drop_columns, vec!["Time".to_string()]);
        // Seeds are derived, distinct per sampler.
        let seeds: Vec<u64> = cfg.sampler.iter().map(|s| s.seed).collect();
        let mut unique = seeds.clone();
        unique.sort_unstable();
        unique.dedup();
        assert_eq!(unique.len(), 4);
    }

    #[test]
    fn out_of_range_fraction_names_the_field() {
        let err = config_from("data_path = \"d.csv\"\n[split]\ntrain_fraction = 1.5\n")
            .unwrap_err();
        match err {
            Error::Config(problems) => {
                assert!(problems.iter().any(|p| p.contains("split.train_fraction")));
            }
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn unknown_key_suggests_alternatives() {
        let err = config_from("data_path = \"d.csv\"\n[net]\nbatchsize = 32\n").unwrap_err();
        match err {
            Error::Config(problems) => {
                let text = problems.join("\n");
                assert!(text.contains("batchsize"), "{text}");
                assert!(text.contains("batch_size"), "{text}");
            }
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn multiple_problems_reported_together() {
        let err = config_from(
            "data_path = \"d.csv\"\n[split]\ntrain_fraction = -0.2\n[net]\nepochs = 0\n[knn]\nk = 0\n",
        )
        .unwrap_err();
        match err {
            Error::Config(problems) => {
                assert!(problems.len() >= 3, "{problems:?}");
            }
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn none_sampler_defaults_to_no_ratio_cap() {
        let cfg = config_from("data_path = \"d.csv\"\n[[sampler]]\nmethod = \"none\"\n").unwrap();
        assert_eq!(cfg.sampler.len(), 1);
        assert!(!cfg.sampler[0].apply_ratio);
        assert!(cfg.sampler[0].sampler_config().target_ratio.is_none());
    }

    #[test]
    fn duplicate_sampler_methods_rejected() {
        let err = config_from(
            "data_path = \"d.csv\"\n[[sampler]]\nmethod = \"enn\"\n[[sampler]]\nmethod = \"enn\"\n",
        )
        .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn resolved_config_round_trips() {
        let cfg = config_from("data_path = \"data.csv\"\n[net]\nepochs = 7\n").unwrap();
        let echoed = cfg.to_toml();
        let again = config_from(&echoed).unwrap();
        assert_eq!(again.to_toml(), echoed);
        assert_eq!(again.net.epochs, 7);
        assert_eq!(again.split.seed, cfg.split.seed);
    }

    #[test]
    fn explicit_seeds_override_derivation() {
        let cfg = config_from(
            "data_path = \"d.csv\"\n[split]\nseed = 5\n[[sampler]]\nmethod = \"oss\"\nseed = 9\n",
        )
        .unwrap();
        assert_eq!(cfg.split.seed, 5);
        assert_eq!(cfg.sampler[0].seed, 9);
    }
}
