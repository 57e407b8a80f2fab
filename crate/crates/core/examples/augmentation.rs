//! Training-time augmentation and the five-crop test transform.
//!
//! Draws many random patches to show the area / aspect distribution, then
//! writes a few augmented samples and the five test crops as PGMs.
//!
//! ```text
//! cargo run --release --example augmentation -- [out-dir]
//! ```

use cxrpipe::augment::{augment, sample_patch, test_transform, AugConfig};
use cxrpipe::dataset::LabelRow;
use cxrpipe::imaging::save_image_pgm8;
use cxrpipe::rng::Rng;
use cxrpipe::synthetic::{chest_image, ChestConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::path::PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "augmentation".into()));
    std::fs::create_dir_all(&out)?;
    let cfg = AugConfig::default();
    let img = chest_image(&LabelRow::default(), &ChestConfig::default(), &mut Rng::new(1));

    let mut rng = Rng::new(2);
    let draws: Vec<_> = (0..10_000).map(|_| sample_patch(img.width(), img.height(), &mut rng, &cfg)).collect();
    let kept: Vec<f64> = draws
        .iter()
        .map(|g| (g.bbox.width() * g.bbox.height()) as f64 / (img.width() * img.height()) as f64)
        .collect();
    let mean = kept.iter().sum::<f64>() / kept.len() as f64;
    let (lo, hi) = kept.iter().fold((1.0f64, 0.0f64), |(lo, hi), &a| (lo.min(a), hi.max(a)));
    let fallbacks = draws.iter().filter(|g| g.fell_back).count();
    println!("10000 patches: area fraction mean {mean:.3}, range {lo:.3}..{hi:.3}, {fallbacks} fallbacks");
    let log_aspect: Vec<f64> = draws.iter().map(|g| g.aspect.ln()).collect();
    let mean_ln = log_aspect.iter().sum::<f64>() / log_aspect.len() as f64;
    println!("log aspect mean {mean_ln:+.4} (log-uniform on [3/4, 4/3] is centred on 0)");

    for i in 0..4 {
        save_image_pgm8(&augment(&img, &mut rng, &cfg), out.join(format!("augmented_{i}.pgm")))?;
    }
    for (name, c) in ["tl", "tr", "bl", "br", "c"].iter().zip(test_transform(&img, &cfg)?) {
        save_image_pgm8(&c, out.join(format!("test_crop_{name}.pgm")))?;
    }
    println!(
        "wrote 4 augmented {0}x{0} samples and five {1}x{1} test crops (from a {2}x{2} resize) to {3}",
        cfg.train_size,
        cfg.crop_size,
        cfg.test_size,
        out.display()
    );
    Ok(())
}
