//! The four from-scratch classifiers and their training machinery.

mod ga;
mod model;
mod train;

pub use ga::{run_ga, GaOutcome, Genes};
pub use model::{Activation, Layer, NetworkModel};
pub use train::{compute_loss_and_gradients, fraction_correct, one_hot, train};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The four classifier kinds, in report column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NetworkKind {
    PatternNet,
    Feedforward,
    FitNet,
    CascadeNet,
}

impl NetworkKind {
    pub const ALL: [NetworkKind; 4] = [
        NetworkKind::PatternNet,
        NetworkKind::Feedforward,
        NetworkKind::FitNet,
        NetworkKind::CascadeNet,
    ];

    /// Column position in the report table.
    pub fn index(self) -> usize {
        match self {
            NetworkKind::PatternNet => 0,
            NetworkKind::Feedforward => 1,
            NetworkKind::FitNet => 2,
            NetworkKind::CascadeNet => 3,
        }
    }

    /// Hidden layer widths (the output pair layer is implicit).
    pub fn hidden_widths(self) -> &'static [usize] {
        match self {
            NetworkKind::CascadeNet => &[10, 5],
            _ => &[10],
        }
    }

    /// Cascade-forward wiring: every layer also sees the raw input and all
    /// earlier layers' outputs.
    pub fn is_cascade(self) -> bool {
        matches!(self, NetworkKind::CascadeNet)
    }

    /// Softmax/cross-entropy kinds; the rest use sigmoid outputs with MSE.
    pub fn uses_softmax(self) -> bool {
        matches!(self, NetworkKind::PatternNet | NetworkKind::CascadeNet)
    }
}

impl fmt::Display for NetworkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            NetworkKind::PatternNet => "PatternNet",
            NetworkKind::Feedforward => "Feedforward",
            NetworkKind::FitNet => "FitNet",
            NetworkKind::CascadeNet => "CascadeNet",
        };
        f.write_str(name)
    }
}

impl FromStr for NetworkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "patternnet" => Ok(NetworkKind::PatternNet),
            "feedforward" => Ok(NetworkKind::Feedforward),
            "fitnet" => Ok(NetworkKind::FitNet),
            "cascade" | "cascadenet" => Ok(NetworkKind::CascadeNet),
            other => Err(Error::InvalidArgument(format!("unknown network kind {other:?}"))),
        }
    }
}

/// Gradient-descent settings. The update rule is classical momentum:
/// v <- momentum*v - learning_rate*grad; params <- params + v.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    /// Seeds the uniform +-1/sqrt(fan_in) weight init and everything the
    /// FitNet GA draws.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { learning_rate: 0.05, momentum: 0.9, epochs: 500, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidArgument("learning_rate must be > 0".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidArgument("momentum must be in [0, 1)".into()));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidArgument("epochs must be >= 1".into()));
        }
        Ok(())
    }
}

/// Genetic-algorithm settings for FitNet hyperparameter search.
#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    /// Learning-rate gene bounds; searched on a log scale.
    pub lr_bounds: (f64, f64),
    pub momentum_bounds: (f64, f64),
    pub mutation_rate: f64,
    pub tournament: usize,
    pub elitism: usize,
    /// Fraction of the training rows held out as the inner fitness set.
    pub validation_fraction: f64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population: 12,
            generations: 8,
            lr_bounds: (1e-3, 0.5),
            momentum_bounds: (0.0, 0.95),
            mutation_rate: 0.2,
            tournament: 3,
            elitism: 1,
            validation_fraction: 0.25,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population == 0 || self.generations == 0 {
            return Err(Error::InvalidArgument("population and generations must be >= 1".into()));
        }
        if !(self.lr_bounds.0 > 0.0 && self.lr_bounds.0 <= self.lr_bounds.1) {
            return Err(Error::InvalidArgument("lr_bounds must satisfy 0 < lo <= hi".into()));
        }
        if !(0.0 <= self.momentum_bounds.0
            && self.momentum_bounds.0 <= self.momentum_bounds.1
            && self.momentum_bounds.1 < 1.0)
        {
            return Err(Error::InvalidArgument("momentum_bounds must lie in [0, 1)".into()));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::InvalidArgument("mutation_rate must be in [0, 1]".into()));
        }
        if self.tournament == 0 || self.elitism > self.population {
            return Err(Error::InvalidArgument("bad tournament or elitism size".into()));
        }
        if !(0.0 < self.validation_fraction && self.validation_fraction < 1.0) {
            return Err(Error::InvalidArgument("validation_fraction must be in (0, 1)".into()));
        }
        Ok(())
    }
}
