//! Band attenuation on a synthetic radiograph: measures how much of the rib
//! stripe energy and of a small mass survives suppression at several
//! strengths.
//!
//! ```text
//! cargo run --release --example bone_suppression -- [out-dir]
//! ```

use cxrpipe::dataset::{Finding, LabelRow};
use cxrpipe::imaging::{save_image_pgm8, BoneSuppression, BoneSuppressor, Image};
use cxrpipe::rng::Rng;
use cxrpipe::synthetic::{chest_image, ChestConfig};

/// Standard deviation of `a - b`: the energy of whatever differs between
/// the two images, ignoring a constant offset.
fn diff_sd(a: &Image, b: &Image) -> f64 {
    let d: Vec<f64> = a.data().iter().zip(b.data()).map(|(x, y)| f64::from(x - y)).collect();
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    (d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / d.len() as f64).sqrt()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::path::PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "bone-suppression".into()));
    std::fs::create_dir_all(&out)?;

    // Same noise stream with and without ribs, and with and without a mass.
    let plain = ChestConfig::default();
    let no_ribs = ChestConfig { rib_amplitude: 0.0, ..plain.clone() };
    let mut mass = LabelRow::default();
    mass[Finding::Mass.index()] = true;
    let ribs = chest_image(&LabelRow::default(), &plain, &mut Rng::new(9));
    let flat = chest_image(&LabelRow::default(), &no_ribs, &mut Rng::new(9));
    let with_mass = chest_image(&mass, &plain, &mut Rng::new(9));

    println!("strength  rib energy left  mass signal left");
    for strength in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let op = BoneSuppression { strength, ..BoneSuppression::default() };
        let rib_left = diff_sd(&op.suppress(&ribs), &op.suppress(&flat)) / diff_sd(&ribs, &flat);
        let mass_left = diff_sd(&op.suppress(&with_mass), &op.suppress(&ribs)) / diff_sd(&with_mass, &ribs);
        println!("{strength:>8.2}  {rib_left:>15.3}  {mass_left:>16.3}");
    }

    save_image_pgm8(&ribs, out.join("original.pgm"))?;
    save_image_pgm8(&BoneSuppression::default().suppress(&ribs), out.join("bone_suppressed.pgm"))?;
    println!("wrote original.pgm and bone_suppressed.pgm to {}", out.display());
    Ok(())
}
