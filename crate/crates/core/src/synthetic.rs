//! Synthetic fixtures: a label table with the published per-finding counts,
//! and a generator of small chest-radiograph-like images with planted
//! finding signatures.
//!
//! Generated images fill the frame with soft-tissue texture (the wide,
//! uninformative margins), hold two dark elliptical lung fields crossed by
//! sinusoidal rib stripes, and a bright heart between them. Each finding
//! adds one visual signature:
//!
//! | finding          | signature                                             |
//! |------------------|-------------------------------------------------------|
//! | pleural effusion | lower part of one lung filled in                      |
//! | infiltrate       | diffuse bright patch inside one lung                  |
//! | congestion       | both lungs uniformly brighter                         |
//! | atelectasis      | one lung vertically collapsed                         |
//! | pneumothorax     | very dark lateral strip in one lung                   |
//! | cardiomegaly     | heart widened                                         |
//! | mass             | 3-pixel bright blob inside a lung                     |
//! | foreign object   | small saturated rectangle over the thorax             |

use std::fs;
use std::path::Path;

use crate::dataset::{write_labels, Finding, LabelRow, LabelTable, N_FINDINGS};
use crate::error::{Error, Result};
use crate::imaging::{save_image_pgm16, Image};
use crate::rng::{domain, Rng};

/// Sample count of the published label table.
pub const TABLE1_SAMPLES: usize = 3125;

/// Positive counts per finding, in taxonomy order.
pub const TABLE1_POSITIVES: [usize; N_FINDINGS] = [147, 152, 170, 212, 11, 529, 447, 1121];

/// Printed prevalences in percent, one decimal.
pub const TABLE1_PREVALENCE_PERCENT: [f64; N_FINDINGS] = [4.7, 4.9, 5.4, 6.8, 0.4, 16.9, 14.3, 35.9];

const TABLE1_SEED: u64 = 3125;

/// The label fixture bundled with the crate.
pub const BUNDLED_TABLE1_LABELS: &str = include_str!("../data/table1_labels.csv");

/// Labels for `n` samples where finding `f` has exactly `positives[f]`
/// positives, placed uniformly at random and independently per finding.
pub fn labels_with_counts(ids: Vec<String>, positives: &[usize; N_FINDINGS], seed: u64) -> Result<LabelTable> {
    let n = ids.len();
    let mut rows = vec![[false; N_FINDINGS]; n];
    for (f, &k) in positives.iter().enumerate() {
        if k > n {
            return Err(Error::InvalidParameter(format!(
                "{k} positives requested for {} with {n} samples",
                Finding::ALL[f]
            )));
        }
        let mut order: Vec<usize> = (0..n).collect();
        Rng::derive(seed, &[domain::LABELS, f as u64]).shuffle(&mut order);
        for &i in &order[..k] {
            rows[i][f] = true;
        }
    }
    LabelTable::new(ids, rows)
}

/// Regenerates the bundled label fixture.
pub fn table1_labels() -> LabelTable {
    let ids = (1..=TABLE1_SAMPLES).map(|i| format!("case{i:04}")).collect();
    labels_with_counts(ids, &TABLE1_POSITIVES, TABLE1_SEED).expect("fixture counts fit")
}

/// Knobs of the image generator.
#[derive(Debug, Clone, PartialEq)]
pub struct ChestConfig {
    pub size: usize,
    /// Prevalence per finding; defaults to the published table except mass.
    pub prevalence: [f64; N_FINDINGS],
    /// Rib stripe period in pixels.
    pub rib_period: f64,
    pub rib_amplitude: f64,
    /// Intensity added at the centre of a mass blob.
    pub mass_contrast: f64,
    pub noise_sd: f64,
}

impl Default for ChestConfig {
    fn default() -> Self {
        let mut prevalence = TABLE1_PREVALENCE_PERCENT.map(|p| p / 100.0);
        prevalence[Finding::Mass.index()] = 0.15;
        Self {
            size: 64,
            prevalence,
            rib_period: 12.0,
            rib_amplitude: 0.10,
            mass_contrast: 0.40,
            noise_sd: 0.03,
        }
    }
}

struct Lung {
    cx: f64,
    cy: f64,
    rx: f64,
    ry: f64,
}

impl Lung {
    /// Normalised elliptical radius; < 1 inside.
    fn radius(&self, x: f64, y: f64) -> f64 {
        (((x - self.cx) / self.rx).powi(2) + ((y - self.cy) / self.ry).powi(2)).sqrt()
    }

    fn interior_point(&self, rng: &mut Rng, shrink: f64) -> (f64, f64) {
        let r = shrink * rng.uniform(0.0, 1.0).sqrt();
        let t = rng.uniform(0.0, std::f64::consts::TAU);
        (self.cx + r * self.rx * t.cos(), self.cy + r * self.ry * t.sin())
    }
}

/// Smooth 0→1 ramp as `d` crosses `edge` over one pixel-ish width.
fn inside(d: f64, edge: f64, softness: f64) -> f64 {
    (0.5 - (d - edge) / softness).clamp(0.0, 1.0)
}

/// Draws one image with the signatures of `labels`.
pub fn chest_image(labels: &LabelRow, cfg: &ChestConfig, rng: &mut Rng) -> Image {
    let s = cfg.size as f64;
    let k = s / 64.0;
    let has = |f: Finding| labels[f.index()];

    let sep = (19.0 + rng.uniform(-1.5, 1.5)) * k;
    let cy = (33.0 + rng.uniform(-2.0, 2.0)) * k;
    let cx = s / 2.0 + rng.uniform(-1.5, 1.5) * k;
    let mut lungs = [
        Lung { cx: cx - sep / 2.0, cy, rx: (7.5 + rng.uniform(-0.5, 0.5)) * k, ry: (13.0 + rng.uniform(-1.0, 1.0)) * k },
        Lung { cx: cx + sep / 2.0, cy, rx: (7.5 + rng.uniform(-0.5, 0.5)) * k, ry: (13.0 + rng.uniform(-1.0, 1.0)) * k },
    ];
    if has(Finding::Atelectasis) {
        let l = &mut lungs[rng.index_inclusive(1)];
        let collapse = l.ry * 0.35;
        l.ry -= collapse;
        l.cy -= collapse;
    }
    let heart = (cx, cy + 7.0 * k, if has(Finding::Cardiomegaly) { 8.5 } else { 5.0 } * k, 7.0 * k);

    // Low-frequency tissue texture shared by the whole frame.
    let waves: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.uniform(0.01, 0.04),
                rng.uniform(0.0, std::f64::consts::TAU),
                rng.uniform(0.0, std::f64::consts::TAU),
                rng.uniform(0.02, 0.06) / k,
            )
        })
        .collect();
    let rib_phase = rng.uniform(0.0, std::f64::consts::TAU);

    let effusion = has(Finding::PleuralEffusion).then(|| (rng.index_inclusive(1), rng.uniform(0.25, 0.4)));
    let infiltrate = has(Finding::Infiltrate).then(|| {
        let side = rng.index_inclusive(1);
        let (x, y) = lungs[side].interior_point(rng, 0.6);
        (x, y, rng.uniform(2.5, 3.5) * k)
    });
    let pneumothorax = has(Finding::Pneumothorax).then(|| rng.index_inclusive(1));
    let mass = has(Finding::Mass).then(|| {
        let side = rng.index_inclusive(1);
        lungs[side].interior_point(rng, 0.7)
    });
    let foreign = has(Finding::ForeignObject).then(|| {
        let (w, h) = if rng.bernoulli(0.5) { (3.0, 5.0) } else { (5.0, 3.0) };
        (rng.uniform(14.0, 46.0) * k, rng.uniform(18.0, 46.0) * k, w * k, h * k)
    });

    let lung_level = if has(Finding::Congestion) { 0.38 } else { 0.25 };
    let mut data = Vec::with_capacity(cfg.size * cfg.size);
    for yi in 0..cfg.size {
        for xi in 0..cfg.size {
            let (x, y) = (xi as f64 + 0.5, yi as f64 + 0.5);
            let mut tissue = 0.72;
            for &(amp, px, py, freq) in &waves {
                tissue += amp * ((x * freq + px).sin() + (y * freq + py).cos()) / 2.0;
            }

            let mut lung_w = 0.0f64;
            let mut lung_v = 0.0;
            for (side, l) in lungs.iter().enumerate() {
                let d = l.radius(x, y);
                let w = inside(d, 1.0, 0.15);
                if w <= 0.0 {
                    continue;
                }
                let mut v = lung_level;
                if let Some((eside, frac)) = effusion {
                    if eside == side {
                        let fill_top = l.cy + l.ry * (1.0 - 2.0 * frac);
                        v += 0.3 * ((y - fill_top) / (1.5 * k)).clamp(0.0, 1.0);
                    }
                }
                if let Some(pside) = pneumothorax {
                    // lateral edge: left lung's left side, right lung's right side
                    let lateral = if side == 0 { l.cx - x } else { x - l.cx } / l.rx;
                    if pside == side && lateral > 0.55 {
                        v = 0.05;
                    }
                }
                lung_w = lung_w.max(w);
                lung_v = v;
            }
            let mut v = tissue * (1.0 - lung_w) + lung_v * lung_w;

            // Ribs: bright bands curving down laterally, strongest over the lungs.
            let phase = std::f64::consts::TAU * (y + 0.25 * (x - cx).abs()) / (cfg.rib_period * k) + rib_phase;
            v += cfg.rib_amplitude * (0.5 + 0.5 * phase.sin()) * (0.4 + 0.6 * lung_w);

            let hd = (((x - heart.0) / heart.2).powi(2) + ((y - heart.1) / heart.3).powi(2)).sqrt();
            let hw = inside(hd, 1.0, 0.2);
            v = v * (1.0 - hw) + 0.85 * hw;

            if let Some((ix, iy, sd)) = infiltrate {
                v += 0.22 * (-((x - ix).powi(2) + (y - iy).powi(2)) / (2.0 * sd * sd)).exp() * lung_w;
            }
            if let Some((mx, my)) = mass {
                let r = ((x - mx).powi(2) + (y - my).powi(2)).sqrt();
                v += cfg.mass_contrast * inside(r, 1.5 * k, 0.8);
            }
            if let Some((fx, fy, fw, fh)) = foreign {
                if (x - fx).abs() < fw / 2.0 && (y - fy).abs() < fh / 2.0 {
                    v = 1.0;
                }
            }
            v += cfg.noise_sd * rng.normal();
            data.push(v.clamp(0.0, 1.0) as f32);
        }
    }
    Image::new(cfg.size, cfg.size, data).expect("generated values are clamped")
}

/// A labelled synthetic corpus held in memory.
pub struct Corpus {
    pub labels: LabelTable,
    pub images: Vec<Image>,
}

/// `n` images whose label counts are `round(prevalence · n)` per finding.
pub fn generate_corpus(n: usize, cfg: &ChestConfig, seed: u64) -> Result<Corpus> {
    let ids: Vec<String> = (0..n).map(|i| format!("syn{i:05}")).collect();
    let counts = cfg.prevalence.map(|p| (p * n as f64).round() as usize);
    let labels = labels_with_counts(ids, &counts, seed)?;
    let images = labels
        .rows()
        .iter()
        .enumerate()
        .map(|(i, row)| chest_image(row, cfg, &mut Rng::derive(seed, &[domain::IMAGES, i as u64])))
        .collect();
    Ok(Corpus { labels, images })
}

/// Writes `<dir>/images/<id>.pgm` (16-bit) and `<dir>/labels.csv`.
pub fn write_corpus(corpus: &Corpus, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    let images = dir.join("images");
    fs::create_dir_all(&images).map_err(|e| Error::io(&images, e))?;
    for (id, img) in corpus.labels.ids().iter().zip(&corpus.images) {
        save_image_pgm16(img, images.join(format!("{id}.pgm")))?;
    }
    write_labels(&corpus.labels, dir.join("labels.csv"))
}
