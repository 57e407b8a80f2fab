//! Orchestration of the resampled experiment protocol.
//!
//! Run directory layout (`<output>/run-<hash>/`):
//!
//! ```text
//! config.toml            resolved configuration
//! split_plan.json        the resampling plan
//! jobs/<model>.json      completion record of each trained model
//! models/<model>.ckpt    checkpoints
//! logs/<model>.csv|json  per-epoch training logs
//! predictions/*.csv      test-set score matrices (models and ensembles)
//! roc/<exp>/r<k>/<finding>.csv
//! correlation/<ensemble>-r<k>[-<finding>].csv   Pearson ×100
//! correlation_summary.csv
//! aucs.csv               long form: experiment,resample,finding,auc
//! auc_report.csv|json|txt
//! average_loss.csv       per-epoch losses averaged over resamples
//! records/<exp>.json     experiment records
//! ```
//!
//! A model counts as done once its job record exists with the current
//! config hash; rerunning skips such models, so an interrupted run resumes.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::preprocess::variant_cache;
use super::{Experiment, ModelJob, PipelineConfig};
use crate::dataset::{
    load_labels, make_splits, write_atomic, Finding, LabelRow, SplitPlan, Variant,
    N_FINDINGS,
};
use crate::error::{Error, Result};
use crate::eval::{
    aggregate, correlation_matrix, ensemble_average, finding_aucs, per_finding_correlation, roc_curve,
    table_csv, table_text, AucReport, PredictionMatrix, Provenance,
};
use crate::imaging::Image;
use crate::model::{encode_checkpoint, predict_five_crop, train, TrainSample, TrainingLog};

/// Name of the file in the output directory that points at the last run.
pub const LATEST_RUN_FILE: &str = "latest_run";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses every core.
    pub workers: Option<usize>,
    /// Overrides the configured experiment list.
    pub experiments: Option<Vec<Experiment>>,
}

/// Completion marker of one trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub model_id: String,
    pub variant: Variant,
    pub resample: usize,
    pub seed_offset: u64,
    pub config_hash: String,
    pub checkpoint_sha256: String,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub started_unix: u64,
    pub finished_unix: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResampleRecord {
    pub resample: usize,
    pub model_ids: Vec<String>,
    pub model_checksums: Vec<String>,
    /// Relative to the run directory.
    pub predictions: String,
    pub aucs: [Option<f64>; N_FINDINGS],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment: Experiment,
    pub config_hash: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub resamples: Vec<ResampleRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSummary {
    pub ensemble: Experiment,
    pub resample: usize,
    pub mean_off_diagonal: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub run_dir: PathBuf,
    pub trained: usize,
    pub reused: usize,
    pub reports: Vec<(Experiment, AucReport)>,
    /// Per experiment, per resample AUCs.
    pub aucs: BTreeMap<Experiment, Vec<[Option<f64>; N_FINDINGS]>>,
    pub correlations: Vec<CorrelationSummary>,
}

impl RunSummary {
    pub fn report(&self, e: Experiment) -> Option<&AucReport> {
        self.reports.iter().find(|(x, _)| *x == e).map(|(_, r)| r)
    }

    /// Mean over resamples of the per-resample mean off-diagonal coefficient.
    pub fn mean_correlation(&self, e: Experiment) -> Option<f64> {
        let v: Vec<f64> = self
            .correlations
            .iter()
            .filter(|c| c.ensemble == e)
            .filter_map(|c| c.mean_off_diagonal)
            .collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Serialization(e.to_string()))?;
    write_atomic(path, text.as_bytes())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Artifacts(format!("{}: {e}", path.display())))
}

/// Shared, read-only state of one run.
struct Context<'a> {
    cfg: &'a PipelineConfig,
    config_hash: String,
    run_dir: PathBuf,
    rows: HashMap<&'a str, LabelRow>,
    plan: &'a SplitPlan,
}

impl Context<'_> {
    fn labels_of(&self, ids: &[String]) -> Vec<LabelRow> {
        ids.iter().map(|id| self.rows[id.as_str()]).collect()
    }

    fn dir(&self, name: &str) -> PathBuf {
        self.run_dir.join(name)
    }

    fn load_variant(&self, ids: &[String], v: Variant) -> Result<Vec<Image>> {
        let cache = variant_cache(self.cfg);
        ids.iter()
            .map(|id| {
                cache.get(id, v)?.ok_or_else(|| Error::MissingCache {
                    missing: 1,
                    dir: cache.dir().to_path_buf(),
                })
            })
            .collect()
    }

    /// Reuses a finished model or trains it, returning its test predictions.
    fn run_job(&self, job: &ModelJob) -> Result<(PredictionMatrix, JobRecord, TrainingLog, bool)> {
        let id = job.id();
        let record_path = self.dir("jobs").join(format!("{id}.json"));
        let pred_path = self.dir("predictions").join(format!("{id}.csv"));
        let log_path = self.dir("logs").join(format!("{id}.json"));
        if record_path.is_file() {
            let record: JobRecord = read_json(&record_path)?;
            if record.config_hash == self.config_hash && pred_path.is_file() && log_path.is_file() {
                log::info!("{id}: reusing finished model");
                return Ok((PredictionMatrix::load(&pred_path)?, record, read_json(&log_path)?, true));
            }
            log::warn!("{id}: stale job record, retraining");
        }

        let started = now();
        let resample = &self.plan.resamples[job.resample];
        check_leakage(&resample.test, "train", &resample.train)?;
        let train_images = self.load_variant(&resample.train, job.variant)?;
        let train_labels = self.labels_of(&resample.train);
        let samples: Vec<TrainSample<'_>> = resample
            .train
            .iter()
            .zip(&train_images)
            .zip(&train_labels)
            .map(|((id, image), labels)| TrainSample { id, image, labels })
            .collect();
        let mut tc = self.cfg.train.clone();
        tc.seed = tc.seed.wrapping_add(job.seed_offset);
        let mut mc = self.cfg.model.clone();
        mc.seed = mc.seed.wrapping_add(job.seed_offset);
        log::info!("{id}: training on {} samples", samples.len());
        let outcome = train(&samples, &tc, &mc, &self.cfg.augment)?;
        check_leakage(&resample.test, "train", &outcome.log.train_ids)?;
        check_leakage(&resample.test, "validation", &outcome.log.val_ids)?;

        let test_images = self.load_variant(&resample.test, job.variant)?;
        let scores = test_images
            .par_iter()
            .map(|img| {
                let p = predict_five_crop(&outcome.model, img, &self.cfg.augment)?;
                Ok(std::array::from_fn(|f| p[f]))
            })
            .collect::<Result<Vec<[f64; N_FINDINGS]>>>()?;
        let preds = PredictionMatrix::new(
            resample.test.clone(),
            scores,
            Provenance {
                source: job.variant.name().into(),
                resample: job.resample,
                model_id: id.clone(),
                members: Vec::new(),
            },
        )?;

        let ckpt = encode_checkpoint(&outcome.model, &tc);
        write_atomic(&self.dir("models").join(format!("{id}.ckpt")), &ckpt)?;
        write_atomic(&self.dir("logs").join(format!("{id}.csv")), outcome.log.to_csv().as_bytes())?;
        write_json(&log_path, &outcome.log)?;
        preds.save(&pred_path)?;
        let record = JobRecord {
            model_id: id.clone(),
            variant: job.variant,
            resample: job.resample,
            seed_offset: job.seed_offset,
            config_hash: self.config_hash.clone(),
            checkpoint_sha256: hex::encode(Sha256::digest(&ckpt)),
            best_epoch: outcome.log.best_epoch,
            best_val_loss: outcome.log.best_val_loss,
            started_unix: started,
            finished_unix: now(),
        };
        // written last: its presence marks the job complete
        write_json(&record_path, &record)?;
        Ok((preds, record, outcome.log, false))
    }
}

/// Fails with [`Error::Leakage`] if any of `ids` is a test id.
fn check_leakage(test: &[String], stage: &'static str, ids: &[String]) -> Result<()> {
    let test: HashSet<&str> = test.iter().map(String::as_str).collect();
    let leaked: Vec<String> = ids.iter().filter(|id| test.contains(id.as_str())).cloned().collect();
    if leaked.is_empty() {
        Ok(())
    } else {
        Err(Error::Leakage { stage, ids: leaked })
    }
}

fn check_cache(cfg: &PipelineConfig, ids: &[String], variants: &BTreeSet<Variant>) -> Result<()> {
    let cache = variant_cache(cfg);
    let mut missing = 0;
    for v in variants {
        for id in ids {
            if !cache.contains(id, *v)? {
                missing += 1;
            }
        }
    }
    if missing > 0 {
        return Err(Error::MissingCache {
            missing,
            dir: cache.dir().to_path_buf(),
        });
    }
    Ok(())
}

/// Trains every model the selected experiments need, builds the ensembles,
/// and writes AUC, ROC and correlation reports into the run directory.
pub fn cmd_run(cfg: &PipelineConfig, opts: &RunOptions) -> Result<RunSummary> {
    let started = now();
    let mut experiments = opts.experiments.clone().unwrap_or_else(|| cfg.experiments.clone());
    experiments.sort();
    experiments.dedup();
    if experiments.is_empty() {
        return Err(Error::Config("no experiments selected".into()));
    }
    Experiment::check_dependencies(&experiments)?;

    let labels = load_labels(&cfg.paths.labels)?;
    let plan = make_splits(labels.ids(), cfg.split.n_resamples, cfg.split.train_frac, cfg.split.seed)?;
    let run_dir = cfg.run_dir();
    fs::create_dir_all(&run_dir).map_err(|e| Error::io(&run_dir, e))?;
    let plan_path = run_dir.join("split_plan.json");
    if plan_path.is_file() && SplitPlan::load(&plan_path)? != plan {
        return Err(Error::Artifacts(format!(
            "{} holds a different split plan; the label file changed since that run",
            plan_path.display()
        )));
    }
    plan.save(&plan_path)?;
    cfg.save(run_dir.join("config.toml"))?;

    let jobs: BTreeSet<ModelJob> = experiments
        .iter()
        .flat_map(|e| (0..plan.n_resamples()).flat_map(move |r| e.members(r)))
        .collect();
    let variants: BTreeSet<Variant> = jobs.iter().map(|j| j.variant).collect();
    check_cache(cfg, labels.ids(), &variants)?;

    let ctx = Context {
        cfg,
        config_hash: cfg.hash(),
        run_dir: run_dir.clone(),
        rows: labels.ids().iter().map(String::as_str).zip(labels.rows().iter().copied()).collect(),
        plan: &plan,
    };
    let jobs: Vec<ModelJob> = jobs.into_iter().collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.workers {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results = pool.install(|| jobs.par_iter().map(|j| ctx.run_job(j)).collect::<Result<Vec<_>>>())?;

    let mut trained = 0;
    let mut reused = 0;
    let mut models: HashMap<ModelJob, (PredictionMatrix, JobRecord)> = HashMap::new();
    let mut logs: BTreeMap<(Variant, u64), Vec<TrainingLog>> = BTreeMap::new();
    for (job, (preds, record, log, was_reused)) in jobs.iter().zip(results) {
        if was_reused {
            reused += 1;
        } else {
            trained += 1;
        }
        logs.entry((job.variant, job.seed_offset)).or_default().push(log);
        models.insert(*job, (preds, record));
    }

    let mut aucs_by_exp: BTreeMap<Experiment, Vec<[Option<f64>; N_FINDINGS]>> = BTreeMap::new();
    let mut long_form = String::from("experiment,resample,finding,auc\n");
    let mut correlations = Vec::new();
    let mut corr_summary = String::from("ensemble,resample,mean_off_diagonal\n");
    let mut records = Vec::new();

    for &exp in &experiments {
        let mut resample_records = Vec::new();
        for resample in &plan.resamples {
            let r = resample.index;
            let members = exp.members(r);
            let member_preds: Vec<PredictionMatrix> = members.iter().map(|j| models[j].0.clone()).collect();
            let (preds, pred_rel) = if exp.is_ensemble() {
                let model_id = format!("{exp}-r{r}");
                let e = ensemble_average(
                    &member_preds,
                    Provenance {
                        source: exp.name().into(),
                        resample: r,
                        model_id: model_id.clone(),
                        members: Vec::new(),
                    },
                )?;
                let rel = format!("predictions/{model_id}.csv");
                e.save(run_dir.join(&rel))?;

                let names: Vec<String> = members.iter().map(ModelJob::id).collect();
                let corr = correlation_matrix(&member_preds, names.clone())?;
                write_atomic(&run_dir.join(format!("correlation/{exp}-r{r}.csv")), corr.to_csv().as_bytes())?;
                for (f, m) in Finding::ALL.iter().zip(per_finding_correlation(&member_preds, names)?) {
                    write_atomic(&run_dir.join(format!("correlation/{exp}-r{r}-{f}.csv")), m.to_csv().as_bytes())?;
                }
                let mean = corr.mean_off_diagonal();
                writeln!(corr_summary, "{exp},{r},{}", mean.map(|m| format!("{m:.6}")).unwrap_or_default()).unwrap();
                correlations.push(CorrelationSummary {
                    ensemble: exp,
                    resample: r,
                    mean_off_diagonal: mean,
                });
                (e, rel)
            } else {
                (member_preds[0].clone(), format!("predictions/{}.csv", members[0].id()))
            };

            let test_labels = ctx.labels_of(&resample.test);
            let aucs: [Option<f64>; N_FINDINGS] = finding_aucs(&preds, &test_labels)?
                .try_into()
                .expect("one AUC per finding");
            for f in Finding::ALL {
                let y: Vec<bool> = test_labels.iter().map(|row| row[f.index()]).collect();
                if let Ok(curve) = roc_curve(&preds.column(f.index()), &y) {
                    write_atomic(&run_dir.join(format!("roc/{exp}/r{r}/{f}.csv")), curve.to_csv().as_bytes())?;
                }
                let a = aucs[f.index()];
                writeln!(long_form, "{exp},{r},{f},{}", a.map(|v| format!("{v:.6}")).unwrap_or_default()).unwrap();
            }
            aucs_by_exp.entry(exp).or_default().push(aucs);
            resample_records.push(ResampleRecord {
                resample: r,
                model_ids: members.iter().map(ModelJob::id).collect(),
                model_checksums: members.iter().map(|j| models[j].1.checkpoint_sha256.clone()).collect(),
                predictions: pred_rel,
                aucs,
            });
        }
        records.push(ExperimentRecord {
            experiment: exp,
            config_hash: ctx.config_hash.clone(),
            started_unix: started,
            finished_unix: now(),
            resamples: resample_records,
        });
    }

    let reports: Vec<(Experiment, AucReport)> = aucs_by_exp.iter().map(|(e, a)| (*e, aggregate(a))).collect();
    let named: Vec<(String, AucReport)> = reports.iter().map(|(e, r)| (e.name().to_string(), r.clone())).collect();
    write_atomic(&run_dir.join("auc_report.csv"), table_csv(&named).as_bytes())?;
    write_atomic(&run_dir.join("auc_report.txt"), table_text(&named).as_bytes())?;
    write_json(&run_dir.join("auc_report.json"), &named)?;
    write_atomic(&run_dir.join("aucs.csv"), long_form.as_bytes())?;
    if !correlations.is_empty() {
        write_atomic(&run_dir.join("correlation_summary.csv"), corr_summary.as_bytes())?;
    }
    write_atomic(&run_dir.join("average_loss.csv"), average_loss_csv(&logs).as_bytes())?;
    for rec in &records {
        write_json(&run_dir.join(format!("records/{}.json", rec.experiment)), rec)?;
    }
    let name = run_dir.file_name().expect("run dir has a name").to_string_lossy();
    write_atomic(&cfg.paths.output.join(LATEST_RUN_FILE), format!("{name}\n").as_bytes())?;

    Ok(RunSummary {
        run_dir,
        trained,
        reused,
        reports,
        aucs: aucs_by_exp,
        correlations,
    })
}

/// Losses per epoch averaged over the resamples of each model family,
/// `model,epoch,mean_train_loss,mean_val_loss,n`.
fn average_loss_csv(logs: &BTreeMap<(Variant, u64), Vec<TrainingLog>>) -> String {
    let mut out = String::from("model,epoch,mean_train_loss,mean_val_loss,n\n");
    for ((variant, seed), runs) in logs {
        let max_epochs = runs.iter().map(|l| l.epochs.len()).max().unwrap_or(0);
        for e in 0..max_epochs {
            let recs: Vec<_> = runs.iter().filter_map(|l| l.epochs.get(e)).collect();
            let n = recs.len() as f64;
            let tl = recs.iter().map(|r| r.train_loss).sum::<f64>() / n;
            let vl = recs.iter().map(|r| r.val_loss).sum::<f64>() / n;
            writeln!(out, "{variant}-s{seed},{},{tl:.6},{vl:.6},{}", e + 1, recs.len()).unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leakage_is_detected() {
        let ids = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let test = ids(&["a", "b"]);
        assert!(check_leakage(&test, "train", &ids(&["c", "d"])).is_ok());
        match check_leakage(&test, "validation", &ids(&["c", "b"])) {
            Err(Error::Leakage { stage, ids }) => {
                assert_eq!(stage, "validation");
                assert_eq!(ids, vec!["b".to_string()]);
            }
            other => panic!("expected leakage error, got {other:?}"),
        }
    }
}
