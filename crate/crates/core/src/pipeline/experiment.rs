//! The six experiments: four single-variant models and two ensembles.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::Variant;
use crate::error::{Error, Result};

/// Members of the seed-diverse ensemble.
pub const EN_NORMAL_MEMBERS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Normal,
    Bs,
    Lung,
    BsLung,
    /// Four normal-image models differing only in their seeds.
    EnNormal,
    /// One model per image variant.
    EnPreprocessed,
}

/// One trained model: a variant, a resample, and a seed offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModelJob {
    pub variant: Variant,
    pub resample: usize,
    pub seed_offset: u64,
}

impl ModelJob {
    pub fn id(&self) -> String {
        format!("{}-r{}-s{}", self.variant, self.resample, self.seed_offset)
    }
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Normal,
        Experiment::Bs,
        Experiment::Lung,
        Experiment::BsLung,
        Experiment::EnNormal,
        Experiment::EnPreprocessed,
    ];

    pub fn all() -> Vec<Experiment> {
        Self::ALL.to_vec()
    }

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Normal => "normal",
            Experiment::Bs => "bs",
            Experiment::Lung => "lung",
            Experiment::BsLung => "bs_lung",
            Experiment::EnNormal => "en_normal",
            Experiment::EnPreprocessed => "en_preprocessed",
        }
    }

    /// Image variant of a single-model experiment.
    pub fn variant(self) -> Option<Variant> {
        match self {
            Experiment::Normal => Some(Variant::Normal),
            Experiment::Bs => Some(Variant::BoneSuppressed),
            Experiment::Lung => Some(Variant::LungCropped),
            Experiment::BsLung => Some(Variant::Combined),
            _ => None,
        }
    }

    pub fn is_ensemble(self) -> bool {
        self.variant().is_none()
    }

    /// Models whose predictions make up this experiment on one resample.
    pub fn members(self, resample: usize) -> Vec<ModelJob> {
        let job = |variant, seed_offset| ModelJob {
            variant,
            resample,
            seed_offset,
        };
        match self {
            Experiment::EnNormal => (0..EN_NORMAL_MEMBERS as u64).map(|s| job(Variant::Normal, s)).collect(),
            Experiment::EnPreprocessed => Variant::ALL.iter().map(|&v| job(v, 0)).collect(),
            single => vec![job(single.variant().expect("single-model experiment"), 0)],
        }
    }

    /// The preprocessed ensemble is built from the four single-variant
    /// experiments, so all four must be selected with it.
    pub fn check_dependencies(selected: &[Experiment]) -> Result<()> {
        if selected.contains(&Experiment::EnPreprocessed) {
            let missing: Vec<&str> = [Experiment::Normal, Experiment::Bs, Experiment::Lung, Experiment::BsLung]
                .into_iter()
                .filter(|e| !selected.contains(e))
                .map(Experiment::name)
                .collect();
            if !missing.is_empty() {
                return Err(Error::Config(format!(
                    "en_preprocessed requires the experiments {}",
                    missing.join(", ")
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}
