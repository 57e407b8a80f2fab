use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

pub const N_FINDINGS: usize = 8;

/// The eight annotated findings. Declaration order is the column order of
/// every label and score matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Finding {
    PleuralEffusion,
    Infiltrate,
    Congestion,
    Atelectasis,
    Pneumothorax,
    Cardiomegaly,
    Mass,
    ForeignObject,
}

impl Finding {
    pub const ALL: [Finding; N_FINDINGS] = [
        Finding::PleuralEffusion,
        Finding::Infiltrate,
        Finding::Congestion,
        Finding::Atelectasis,
        Finding::Pneumothorax,
        Finding::Cardiomegaly,
        Finding::Mass,
        Finding::ForeignObject,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Finding::PleuralEffusion => "pleural_effusion",
            Finding::Infiltrate => "infiltrate",
            Finding::Congestion => "congestion",
            Finding::Atelectasis => "atelectasis",
            Finding::Pneumothorax => "pneumothorax",
            Finding::Cardiomegaly => "cardiomegaly",
            Finding::Mass => "mass",
            Finding::ForeignObject => "foreign_object",
        }
    }

    /// Column index.
    pub fn index(self) -> usize {
        self as usize
    }

    /// Findings averaged in the summary row; pneumothorax is left out for
    /// its very low positive count.
    pub fn in_average(self) -> bool {
        self != Finding::Pneumothorax
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Finding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Finding::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown finding `{s}`")))
    }
}
