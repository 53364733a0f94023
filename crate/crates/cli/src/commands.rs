//! Implementations behind the CLI subcommands. Each function returns a
//! summary struct; printing happens in `main`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rfzone_core::classweights::{balanced_weights, ClassWeight, ClassWeightTable};
use rfzone_core::dataset::{
    self, label_from_zone_column, label_reads, session_split, stratified_subsample, LabeledDataset,
    SplitPair,
};
use rfzone_core::dtree::{fit, DecisionTree, Hyperparams, TreeStats};
use rfzone_core::floorplan::{Floorplan, ZoneId};
use rfzone_core::metrics::{evaluate, BootstrapConfig, CostMatrix, EvalReport};
use rfzone_core::propagation::{generate_reads, PropagationModel, SimConfig};
use rfzone_core::report::{write_report_dir, REPORT_FILES};

use crate::manifest::{
    artifact_entry, RunManifest, SplitManifest, RUN_MANIFEST_VERSION, SPLIT_MANIFEST_VERSION,
};
use crate::{CliError, EvalOptions, Fold, RunConfig, SimOptions, TrainOptions, WeightMode};

pub struct GenerateOutcome {
    pub out_path: PathBuf,
    pub reads: usize,
    pub per_zone: Vec<(ZoneId, u64)>,
}

pub struct TrainOutcome {
    pub weights: ClassWeightTable,
    pub stats: TreeStats,
    pub labeled_rows: usize,
    pub subsample_rows: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    pub test_sessions: Vec<u32>,
    pub model_path: PathBuf,
    pub split_path: PathBuf,
    pub weights_path: PathBuf,
}

pub struct EvalOutcome {
    pub report: EvalReport,
    pub rows: usize,
    pub fold: &'static str,
    pub out_dir: PathBuf,
}

pub struct PipelineOutcome {
    pub eval: EvalOutcome,
    pub manifest_path: PathBuf,
    pub artifact_count: usize,
}

pub struct WeightsOutcome {
    pub weights: ClassWeightTable,
    pub out_path: Option<PathBuf>,
}

fn load_floorplan_opt(path: Option<&Path>) -> Result<Floorplan, CliError> {
    match path {
        None => Ok(Floorplan::default_lab()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| {
                CliError::Usage(format!("cannot read floorplan {}: {e}", p.display()))
            })?;
            rfzone_core::load_floorplan(&text).map_err(|e| CliError::Usage(e.to_string()))
        }
    }
}

/// Load a reads CSV, drop null rows, and label: by the `Zone` column when
/// every row carries one, otherwise by container position on the floorplan.
fn load_labeled(reads_path: &Path, fp: &Floorplan) -> Result<(LabeledDataset, usize), CliError> {
    let file = fs::File::open(reads_path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", reads_path.display())))?;
    let raws = dataset::load_reads_csv(file).map_err(|e| CliError::Runtime(e.to_string()))?;
    let source_rows = raws.len();
    let raws = dataset::drop_nulls(raws);
    let labeled = if !raws.is_empty() && raws.iter().all(|r| r.zone.is_some()) {
        label_from_zone_column(&raws, fp).map_err(|e| CliError::Runtime(e.to_string()))?
    } else {
        let reads = dataset::to_read_set(&raws).map_err(|e| CliError::Runtime(e.to_string()))?;
        label_reads(&reads, fp).map_err(|e| CliError::Runtime(e.to_string()))?
    };
    Ok((labeled, source_rows))
}

fn present_counts(ds: &LabeledDataset) -> BTreeMap<ZoneId, u64> {
    ds.class_counts()
        .into_iter()
        .filter(|(_, c)| *c > 0)
        .collect()
}

fn weight_report_table(
    mode: WeightMode,
    full: &LabeledDataset,
    subsample: &LabeledDataset,
) -> Result<ClassWeightTable, CliError> {
    match mode {
        WeightMode::PreSubsample => {
            balanced_weights(&present_counts(full)).map_err(|e| CliError::Runtime(e.to_string()))
        }
        WeightMode::PostSubsample => balanced_weights(&present_counts(subsample))
            .map_err(|e| CliError::Runtime(e.to_string())),
        WeightMode::Uniform => ClassWeightTable::from_entries(
            present_counts(full)
                .into_iter()
                .map(|(zone, count)| ClassWeight {
                    zone,
                    count,
                    weight: 1.0,
                })
                .collect(),
        )
        .map_err(|e| CliError::Runtime(e.to_string())),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| {
                CliError::Runtime(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    fs::write(path, contents)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

/// Simulate reads over the floorplan and write them as CSV.
pub fn cmd_generate(
    floorplan: Option<&Path>,
    sim: &SimOptions,
    seed: u64,
    out_path: &Path,
) -> Result<GenerateOutcome, CliError> {
    let fp = load_floorplan_opt(floorplan)?;
    let cfg = SimConfig {
        sessions: sim.sessions,
        reads_per_tag_per_session: sim.reads_per_tag_per_session,
        seed,
        model: PropagationModel {
            p0_dbm: sim.p0,
            d0_m: sim.d0,
            eta: sim.eta,
            sigma_db: sim.sigma,
        },
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let reads = generate_reads(&fp, &cfg).map_err(|e| CliError::Runtime(e.to_string()))?;

    let mut per_zone: BTreeMap<ZoneId, u64> = fp.zone_ids().into_iter().map(|z| (z, 0)).collect();
    for record in &reads.records {
        let zone = fp
            .zone_of_container(&record.container_id)
            .expect("generated containers resolve");
        *per_zone.get_mut(zone).expect("zone in canonical set") += 1;
    }
    write_file(out_path, &reads.to_csv())?;
    Ok(GenerateOutcome {
        out_path: out_path.to_path_buf(),
        reads: reads.len(),
        per_zone: per_zone.into_iter().collect(),
    })
}

fn validate_train_options(opts: &TrainOptions) -> Result<(), CliError> {
    if opts.subsample_target < 1 {
        return Err(CliError::Usage("subsample-target must be >= 1".into()));
    }
    if !(opts.test_fraction > 0.0 && opts.test_fraction < 1.0) {
        return Err(CliError::Usage("test-fraction must be in (0, 1)".into()));
    }
    if opts.max_depth < 1 {
        return Err(CliError::Usage("max-depth must be >= 1".into()));
    }
    if opts.min_samples_split < 2 {
        return Err(CliError::Usage("min-samples-split must be >= 2".into()));
    }
    Ok(())
}

fn derive_folds(
    labeled: &LabeledDataset,
    subsample_target: usize,
    test_fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset, SplitPair), CliError> {
    let sub = stratified_subsample(labeled, subsample_target, seed)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let split =
        session_split(&sub, test_fraction, seed).map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok((sub, split))
}

/// Label, weight, subsample, split and fit; persist the model, the split
/// manifest and the weight report.
pub fn cmd_train(
    floorplan: Option<&Path>,
    reads_path: &Path,
    opts: &TrainOptions,
    seed: u64,
    out_dir: &Path,
) -> Result<TrainOutcome, CliError> {
    validate_train_options(opts)?;
    let fp = load_floorplan_opt(floorplan)?;
    let (labeled, source_rows) = load_labeled(reads_path, &fp)?;
    let (sub, split) = derive_folds(&labeled, opts.subsample_target, opts.test_fraction, seed)?;
    let report_table = weight_report_table(opts.weight_mode, &labeled, &sub)?;
    let class_weights = match opts.weight_mode {
        WeightMode::Uniform => None,
        _ => Some(report_table.clone()),
    };
    let hp = Hyperparams {
        criterion: opts.criterion,
        max_depth: opts.max_depth,
        min_samples_split: opts.min_samples_split,
        class_weights,
    };
    let tree = fit(&split.train, &hp).map_err(|e| CliError::Runtime(e.to_string()))?;

    let manifest = SplitManifest {
        format_version: SPLIT_MANIFEST_VERSION,
        seed,
        subsample_target: opts.subsample_target,
        test_fraction: opts.test_fraction,
        weight_mode: opts.weight_mode.as_str().to_string(),
        criterion: opts.criterion.to_string(),
        max_depth: opts.max_depth,
        min_samples_split: opts.min_samples_split,
        source_rows,
        labeled_rows: labeled.len(),
        subsample_rows: sub.len(),
        train_rows: split.train.len(),
        test_rows: split.test.len(),
        test_sessions: split.test_sessions.clone(),
    };

    let model_path = out_dir.join("model.json");
    let split_path = out_dir.join("split.json");
    let weights_path = out_dir.join("weights.csv");
    write_file(&model_path, &tree.to_json())?;
    write_file(&split_path, &manifest.to_json())?;
    write_file(&weights_path, &report_table.to_csv())?;

    Ok(TrainOutcome {
        weights: report_table,
        stats: tree.stats,
        labeled_rows: labeled.len(),
        subsample_rows: sub.len(),
        train_rows: split.train.len(),
        test_rows: split.test.len(),
        test_sessions: split.test_sessions,
        model_path,
        split_path,
        weights_path,
    })
}

/// Evaluate a persisted model. With a split manifest the folds are re-derived
/// from the recorded recipe and verified against it; without one the whole
/// reads file is the evaluation fold.
#[allow(clippy::too_many_arguments)]
pub fn cmd_evaluate(
    model_path: &Path,
    reads_path: &Path,
    split_path: Option<&Path>,
    floorplan: Option<&Path>,
    fold: Option<Fold>,
    opts: &EvalOptions,
    seed: u64,
    out_dir: &Path,
) -> Result<EvalOutcome, CliError> {
    if split_path.is_none() && fold.is_some() {
        return Err(CliError::Usage(
            "--fold requires --split (without a split manifest the whole file is evaluated)".into(),
        ));
    }
    let fp = load_floorplan_opt(floorplan)?;
    let model_text = fs::read_to_string(model_path)
        .map_err(|e| CliError::Usage(format!("cannot read model {}: {e}", model_path.display())))?;
    let tree =
        DecisionTree::from_json(&model_text).map_err(|e| CliError::Runtime(e.to_string()))?;
    let (labeled, _) = load_labeled(reads_path, &fp)?;
    if tree.zones != labeled.zones {
        return Err(CliError::Runtime(format!(
            "model/data schema mismatch: model has {} zones, data has {}",
            tree.zones.len(),
            labeled.zones.len()
        )));
    }

    let (fold_name, fold_ds) = match split_path {
        None => ("all", labeled),
        Some(path) => {
            let manifest = SplitManifest::load(path)?;
            let (_, split) = derive_folds(
                &labeled,
                manifest.subsample_target,
                manifest.test_fraction,
                manifest.seed,
            )?;
            if split.test_sessions != manifest.test_sessions
                || split.train.len() != manifest.train_rows
                || split.test.len() != manifest.test_rows
            {
                return Err(CliError::Runtime(format!(
                    "split manifest mismatch: reads file does not reproduce the recorded split \
                     (expected test sessions {:?}, derived {:?})",
                    manifest.test_sessions, split.test_sessions
                )));
            }
            match fold.unwrap_or(Fold::Test) {
                Fold::Test => ("test", split.test),
                Fold::Train => ("train", split.train),
            }
        }
    };

    let adj = fp.adjacency();
    let lambda = CostMatrix::from_adjacency(&adj, opts.adjacent_cost, opts.non_adjacent_cost)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let bootstrap = if opts.bootstrap_resamples > 0 {
        if !(opts.ci_level > 0.0 && opts.ci_level < 1.0) {
            return Err(CliError::Usage("ci-level must be in (0, 1)".into()));
        }
        Some(BootstrapConfig {
            resamples: opts.bootstrap_resamples,
            level: opts.ci_level,
            seed,
        })
    } else {
        None
    };

    let predictions = tree.predict_dataset(&fold_ds);
    let report = evaluate(
        &fold_ds.labels,
        &predictions,
        &fold_ds.zones,
        &adj,
        &lambda,
        bootstrap,
    )
    .map_err(|e| CliError::Runtime(e.to_string()))?;
    write_report_dir(&report, &fold_ds, out_dir).map_err(|e| {
        CliError::Runtime(format!("cannot write report to {}: {e}", out_dir.display()))
    })?;

    Ok(EvalOutcome {
        rows: fold_ds.len(),
        report,
        fold: fold_name,
        out_dir: out_dir.to_path_buf(),
    })
}

/// Compute the class-weight report for a reads file.
pub fn cmd_weights(
    floorplan: Option<&Path>,
    reads_path: &Path,
    out_path: Option<&Path>,
) -> Result<WeightsOutcome, CliError> {
    let fp = load_floorplan_opt(floorplan)?;
    let (labeled, _) = load_labeled(reads_path, &fp)?;
    let table = balanced_weights(&present_counts(&labeled))
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    if let Some(path) = out_path {
        write_file(path, &table.to_csv())?;
    }
    Ok(WeightsOutcome {
        weights: table,
        out_path: out_path.map(Path::to_path_buf),
    })
}

/// Generate, train and evaluate from one seed, then write the run manifest.
pub fn cmd_pipeline(config: &RunConfig) -> Result<PipelineOutcome, CliError> {
    let out_dir = &config.out_dir;
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;

    let reads_path = out_dir.join("reads.csv");
    cmd_generate(
        config.floorplan.as_deref(),
        &config.sim,
        config.seed,
        &reads_path,
    )?;
    let train = cmd_train(
        config.floorplan.as_deref(),
        &reads_path,
        &config.train,
        config.seed,
        out_dir,
    )?;
    let report_dir = out_dir.join("report");
    let eval = cmd_evaluate(
        &train.model_path,
        &reads_path,
        Some(&train.split_path),
        config.floorplan.as_deref(),
        Some(Fold::Test),
        &config.eval,
        config.seed,
        &report_dir,
    )?;

    let mut config_map = BTreeMap::new();
    config_map.insert(
        "floorplan".to_string(),
        config
            .floorplan
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "builtin-default".to_string()),
    );
    config_map.insert("sessions".into(), config.sim.sessions.to_string());
    config_map.insert(
        "reads_per_tag_per_session".into(),
        config.sim.reads_per_tag_per_session.to_string(),
    );
    config_map.insert("p0".into(), config.sim.p0.to_string());
    config_map.insert("d0".into(), config.sim.d0.to_string());
    config_map.insert("eta".into(), config.sim.eta.to_string());
    config_map.insert("sigma".into(), config.sim.sigma.to_string());
    config_map.insert(
        "subsample_target".into(),
        config.train.subsample_target.to_string(),
    );
    config_map.insert(
        "test_fraction".into(),
        config.train.test_fraction.to_string(),
    );
    config_map.insert("criterion".into(), config.train.criterion.to_string());
    config_map.insert("max_depth".into(), config.train.max_depth.to_string());
    config_map.insert(
        "min_samples_split".into(),
        config.train.min_samples_split.to_string(),
    );
    config_map.insert("weight_mode".into(), config.train.weight_mode.to_string());
    config_map.insert(
        "bootstrap_resamples".into(),
        config.eval.bootstrap_resamples.to_string(),
    );
    config_map.insert("ci_level".into(), config.eval.ci_level.to_string());
    config_map.insert(
        "adjacent_cost".into(),
        config.eval.adjacent_cost.to_string(),
    );
    config_map.insert(
        "non_adjacent_cost".into(),
        config.eval.non_adjacent_cost.to_string(),
    );

    let mut versions = BTreeMap::new();
    versions.insert("rfzone-core".to_string(), rfzone_core::VERSION.to_string());
    versions.insert("rfzone-cli".to_string(), crate::VERSION.to_string());
    versions.insert(
        "tree-format".to_string(),
        rfzone_core::dtree::TREE_FORMAT_VERSION.to_string(),
    );

    let artifacts = vec![
        artifact_entry("reads", out_dir, "reads.csv")?,
        artifact_entry("weights", out_dir, "weights.csv")?,
        artifact_entry("model", out_dir, "model.json")?,
        artifact_entry("split", out_dir, "split.json")?,
        artifact_entry("report", out_dir, "report/report.txt")?,
    ];
    let mut aux_outputs = Vec::new();
    for file in REPORT_FILES {
        if file != "report.txt" {
            aux_outputs.push(artifact_entry(file, out_dir, &format!("report/{file}"))?);
        }
    }

    let manifest = RunManifest {
        format_version: RUN_MANIFEST_VERSION,
        seed: config.seed,
        config: config_map,
        versions,
        artifacts,
        aux_outputs,
    };
    let manifest_path = out_dir.join("manifest.json");
    write_file(&manifest_path, &manifest.to_json())?;

    Ok(PipelineOutcome {
        eval,
        manifest_path,
        artifact_count: 5,
    })
}
