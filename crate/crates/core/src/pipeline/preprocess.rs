//! Materializes every image variant into the cache.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;

use super::PipelineConfig;
use crate::dataset::{load_labels, materialize_variant, Variant, VariantCache};
use crate::error::Result;
use crate::imaging::load_image;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PreprocessSummary {
    pub samples: usize,
    /// Variant files written by this invocation.
    pub computed: usize,
    /// Variant files already present and skipped.
    pub cached: usize,
    /// Cropped variants that fell back to the full image.
    pub fallbacks: usize,
    /// `(sample id, reason)` for images that could not be processed.
    pub failures: Vec<(String, String)>,
}

impl PreprocessSummary {
    pub fn is_success(&self) -> bool {
        self.failures.is_empty()
    }
}

impl std::fmt::Display for PreprocessSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "{} samples: {} variant files computed, {} cached, {} segmentation fallbacks, {} failures",
            self.samples,
            self.computed,
            self.cached,
            self.fallbacks,
            self.failures.len()
        )?;
        for (id, reason) in &self.failures {
            writeln!(f, "  {id}: {reason}")?;
        }
        Ok(())
    }
}

pub fn variant_cache(cfg: &PipelineConfig) -> VariantCache {
    VariantCache::new(&cfg.paths.cache, &cfg.preprocess.hash())
}

/// Writes the four variants of every labelled image that is not cached
/// yet. Unreadable images are collected in the summary and do not stop the
/// others; only label and cache I/O errors abort.
pub fn cmd_preprocess(cfg: &PipelineConfig) -> Result<PreprocessSummary> {
    let labels = load_labels(&cfg.paths.labels)?;
    let cache = variant_cache(cfg);
    let computed = AtomicUsize::new(0);
    let cached = AtomicUsize::new(0);
    let fallbacks = AtomicUsize::new(0);
    let failures = Mutex::new(Vec::new());

    labels.ids().par_iter().try_for_each(|id| -> Result<()> {
        let mut todo = Vec::new();
        for v in Variant::ALL {
            if cache.contains(id, v)? {
                cached.fetch_add(1, Ordering::Relaxed);
            } else {
                todo.push(v);
            }
        }
        if todo.is_empty() {
            return Ok(());
        }
        let path = cfg.paths.images.join(format!("{id}.pgm"));
        let img = match load_image(&path) {
            Ok(img) => img,
            Err(e) => {
                log::error!("{id}: {e}");
                failures.lock().expect("no panics while held").push((id.clone(), e.to_string()));
                return Ok(());
            }
        };
        for v in todo {
            let m = materialize_variant(&img, v, &cfg.preprocess);
            if m.fell_back {
                fallbacks.fetch_add(1, Ordering::Relaxed);
            }
            cache.put(id, v, &m.image)?;
            computed.fetch_add(1, Ordering::Relaxed);
        }
        Ok(())
    })?;

    let mut failures = failures.into_inner().expect("no panics while held");
    failures.sort();
    Ok(PreprocessSummary {
        samples: labels.len(),
        computed: computed.into_inner(),
        cached: cached.into_inner(),
        fallbacks: fallbacks.into_inner(),
        failures,
    })
}
