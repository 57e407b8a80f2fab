//! Trains the classifier on a small synthetic corpus, scores the held-out
//! images with five-crop averaging, then transfers the trunk to a fresh
//! two-output head and fine-tunes it.
//!
//! ```text
//! cargo run --release --example train_tiny -- [epochs]
//! ```

use cxrpipe::augment::AugConfig;
use cxrpipe::dataset::{make_splits, Finding, LabelRow};
use cxrpipe::eval::{finding_aucs, PredictionMatrix, Provenance};
use cxrpipe::model::{predict_five_crop, train, train_from, ModelConfig, TrainConfig, TrainSample};
use cxrpipe::synthetic::{generate_corpus, ChestConfig};

fn main() -> cxrpipe::Result<()> {
    let epochs: usize = std::env::args().nth(1).map_or(30, |s| s.parse().expect("epochs must be an integer"));
    let corpus = generate_corpus(300, &ChestConfig::default(), 11)?;
    let plan = make_splits(corpus.labels.ids(), 1, 0.7, 0)?;
    let split = &plan.resamples[0];
    let index = corpus.labels.index_of();
    let rows = corpus.labels.rows();
    let samples = |ids: &[String]| -> Vec<usize> { ids.iter().map(|id| index[id.as_str()]).collect() };
    let (train_idx, test_idx) = (samples(&split.train), samples(&split.test));

    let ac = AugConfig { train_size: 32, crop_size: 32, test_size: 36, ..AugConfig::default() };
    let mc = ModelConfig { input_size: 32, ..ModelConfig::default() };
    let tc = TrainConfig { max_epochs: epochs, plateau_patience: 5, ..TrainConfig::default() };
    let train_set: Vec<TrainSample> = train_idx
        .iter()
        .map(|&i| TrainSample { id: &corpus.labels.ids()[i], image: &corpus.images[i], labels: &rows[i] })
        .collect();

    let outcome = train(&train_set, &tc, &mc, &ac)?;
    print!("{}", outcome.log.to_csv());
    println!("best epoch {} (validation loss {:.4})", outcome.log.best_epoch, outcome.log.best_val_loss);

    let scores = test_idx
        .iter()
        .map(|&i| {
            let p = predict_five_crop(&outcome.model, &corpus.images[i], &ac)?;
            Ok(std::array::from_fn(|f| p[f]))
        })
        .collect::<cxrpipe::Result<Vec<[f64; 8]>>>()?;
    let preds = PredictionMatrix::new(split.test.clone(), scores, Provenance::default())?;
    let test_rows: Vec<LabelRow> = test_idx.iter().map(|&i| rows[i]).collect();
    for (f, a) in Finding::ALL.iter().zip(finding_aucs(&preds, &test_rows)?) {
        match a {
            Some(a) => println!("  {:<18} AUC {a:.3}", f.name()),
            None => println!("  {:<18} AUC undefined (one class in the test split)", f.name()),
        }
    }

    // Transfer: keep the trunk, learn a new head for {mass, cardiomegaly}.
    let pair = [Finding::Mass.index(), Finding::Cardiomegaly.index()];
    let pair_rows: Vec<[bool; 2]> = train_idx.iter().map(|&i| pair.map(|f| rows[i][f])).collect();
    let pair_set: Vec<TrainSample> = train_idx
        .iter()
        .zip(&pair_rows)
        .map(|(&i, r)| TrainSample { id: &corpus.labels.ids()[i], image: &corpus.images[i], labels: r })
        .collect();
    let transferred = outcome.model.replace_head(2, 99);
    let h = transferred.head_start();
    assert_eq!(&transferred.params()[..h], &outcome.model.params()[..h]);
    let tuned = train_from(transferred, &pair_set, &TrainConfig { max_epochs: epochs.min(5), ..tc }, &ac)?;
    println!(
        "two-output head fine-tuned for {} epochs, best validation loss {:.4}",
        tuned.log.epochs.len(),
        tuned.log.best_val_loss
    );
    Ok(())
}
