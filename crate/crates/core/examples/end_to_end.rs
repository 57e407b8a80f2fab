//! The full desk-scale protocol on a synthetic corpus: generate 600 images,
//! fill the variant cache, train all six experiments over five resamples,
//! and render the report.
//!
//! ```text
//! cargo run --release --example end_to_end -- [work-dir]
//! ```

use std::time::Instant;

use cxrpipe::dataset::Finding;
use cxrpipe::pipeline::{cmd_preprocess, cmd_report, cmd_run, Experiment, Paths, PipelineConfig, RunOptions};
use cxrpipe::synthetic::{generate_corpus, write_corpus, ChestConfig};

fn main() -> cxrpipe::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let work = std::env::args().nth(1).unwrap_or_else(|| "end-to-end".into());
    let work = std::path::PathBuf::from(work);
    let t0 = Instant::now();

    let corpus = generate_corpus(600, &ChestConfig::default(), 0)?;
    write_corpus(&corpus, &work)?;
    let cfg = PipelineConfig::desk_scale(Paths {
        images: work.join("images"),
        labels: work.join("labels.csv"),
        cache: work.join("cache"),
        output: work.join("runs"),
    });
    cfg.save(work.join("config.toml"))?;

    let pre = cmd_preprocess(&cfg)?;
    print!("{pre}");
    let run = cmd_run(&cfg, &RunOptions::default())?;
    println!("{} models trained, {} reused", run.trained, run.reused);
    let report = cmd_report(&cfg.paths.output)?;
    print!("{}", report.table);

    let mass = |e| run.report(e).and_then(|r| r.get(Finding::Mass).mean).unwrap_or(f64::NAN);
    let avg = |e| run.report(e).and_then(|r| r.average.mean).unwrap_or(f64::NAN);
    println!("mass AUC: normal {:.3}, lung {:.3}", mass(Experiment::Normal), mass(Experiment::Lung));
    println!(
        "mean Pearson: en_normal {:.3}, en_preprocessed {:.3}",
        run.mean_correlation(Experiment::EnNormal).unwrap_or(f64::NAN),
        run.mean_correlation(Experiment::EnPreprocessed).unwrap_or(f64::NAN)
    );
    println!(
        "AVG AUC: en_normal {:.3}, en_preprocessed {:.3}",
        avg(Experiment::EnNormal),
        avg(Experiment::EnPreprocessed)
    );
    println!("{} report files; total {:.0}s", report.files.len(), t0.elapsed().as_secs_f64());
    Ok(())
}
