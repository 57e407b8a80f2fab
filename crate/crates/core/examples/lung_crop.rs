//! Segments the lung fields of one synthetic radiograph, prints the crop box
//! rule at several borders and writes the mask and crop next to the input.
//!
//! ```text
//! cargo run --release --example lung_crop -- [out-dir]
//! ```

use cxrpipe::dataset::LabelRow;
use cxrpipe::imaging::{crop, lung_bounding_box, otsu_threshold, save_image_pgm8, save_mask_pgm, segment_lung_fields};
use cxrpipe::rng::Rng;
use cxrpipe::synthetic::{chest_image, ChestConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::path::PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "lung-crop".into()));
    std::fs::create_dir_all(&out)?;

    let img = chest_image(&LabelRow::default(), &ChestConfig::default(), &mut Rng::new(5));
    println!("image {}x{}, Otsu threshold bin {}", img.width(), img.height(), otsu_threshold(&img)?);

    let mask = segment_lung_fields(&img)?;
    println!("lung mask covers {} of {} pixels", mask.count(), img.width() * img.height());
    for border in [0, 3, 10, 100] {
        let b = lung_bounding_box(&mask, border)?;
        println!("border {border:>3}: x {}..{}, y {}..{} ({}x{})", b.x0, b.x1, b.y0, b.y1, b.width(), b.height());
    }

    let cropped = crop(&img, &lung_bounding_box(&mask, 3)?)?;
    save_image_pgm8(&img, out.join("original.pgm"))?;
    save_mask_pgm(&mask, out.join("mask.pgm"))?;
    save_image_pgm8(&cropped, out.join("lung_cropped.pgm"))?;
    println!("wrote original.pgm, mask.pgm and lung_cropped.pgm to {}", out.display());
    Ok(())
}
