//! Repeated random train/test resampling.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{domain, Rng};

pub const SPLIT_PLAN_FORMAT: &str = "cxrpipe-split-plan";
const SPLIT_PLAN_VERSION: u32 = 1;

/// One train/test partition. Both lists keep the input id order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resample {
    pub index: usize,
    pub train: Vec<String>,
    pub test: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    pub train_frac: f64,
    pub resamples: Vec<Resample>,
}

/// `round(train_frac * n)`, kept within `1..n` so both sides are non-empty.
pub fn train_size(n: usize, train_frac: f64) -> usize {
    ((train_frac * n as f64).round() as usize).clamp(1, n - 1)
}

/// Independent unstratified shuffles, one per resample, each driven by a
/// ChaCha8 stream seeded from `(seed, resample index)`.
pub fn make_splits(ids: &[String], n_resamples: usize, train_frac: f64, seed: u64) -> Result<SplitPlan> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train_frac {train_frac} must lie in (0, 1)"
        )));
    }
    if ids.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 ids to split, got {}",
            ids.len()
        )));
    }
    if n_resamples == 0 {
        return Err(Error::InvalidParameter("n_resamples must be >= 1".into()));
    }
    let n_train = train_size(ids.len(), train_frac);
    let resamples = (0..n_resamples)
        .map(|r| {
            let mut order: Vec<usize> = (0..ids.len()).collect();
            Rng::derive(seed, &[domain::SPLIT, r as u64]).shuffle(&mut order);
            let mut in_train = vec![false; ids.len()];
            for &i in &order[..n_train] {
                in_train[i] = true;
            }
            let (train, test): (Vec<_>, Vec<_>) =
                ids.iter().cloned().zip(in_train).partition(|(_, t)| *t);
            Resample {
                index: r,
                train: train.into_iter().map(|(id, _)| id).collect(),
                test: test.into_iter().map(|(id, _)| id).collect(),
            }
        })
        .collect();
    Ok(SplitPlan {
        format: SPLIT_PLAN_FORMAT.into(),
        version: SPLIT_PLAN_VERSION,
        seed,
        train_frac,
        resamples,
    })
}

impl SplitPlan {
    pub fn n_resamples(&self) -> usize {
        self.resamples.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("split plan serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let plan: SplitPlan =
            serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        if plan.format != SPLIT_PLAN_FORMAT || plan.version != SPLIT_PLAN_VERSION {
            return Err(Error::Serialization(format!(
                "unsupported split plan {} v{}",
                plan.format, plan.version
            )));
        }
        Ok(plan)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}
