//! Named parameter sets selected with `--preset`.

use clap::ValueEnum;
use kickrotor_core::methods;

use crate::config::{RunConfig, ASYMPTOTIC_FIT_WINDOW};

/// `(g, K)` combinations of the kinetic-energy overview at `hbar_eff = 2.89`,
/// from the localized non-interacting rotor to strong coupling.
pub const FIG1_PAIRS: [(f64, f64); 5] = [(0.0, 5.0), (5.0, 8.0), (10.0, 12.0), (12.0, 12.0), (20.0, 15.0)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// The `(g, K)` pairs of the kinetic-energy overview; scale set by the config or `--kicks`.
    PaperFig1,
    /// 10^5 kicks at dt = 10^-4 on 4096 modes, fit window [10^4, 10^5]. Runs for days.
    PaperScale,
}

impl Preset {
    pub fn apply(self, config: &mut RunConfig) {
        config.hbar_eff = 2.89;
        match self {
            Preset::PaperFig1 => {}
            Preset::PaperScale => {
                config.n_kicks = 100_000;
                config.dt = 1e-4;
                config.n_modes = 4096;
                config.sweep.fit_window = Some(ASYMPTOTIC_FIT_WINDOW);
            }
        }
    }

    /// `(g, K)` runs implied by the preset, if it prescribes several.
    pub fn pairs(self) -> Option<&'static [(f64, f64)]> {
        match self {
            Preset::PaperFig1 => Some(&FIG1_PAIRS),
            Preset::PaperScale => None,
        }
    }
}

/// Starting point when a preset is used without a config file.
pub fn base_config() -> RunConfig {
    RunConfig::minimal(methods::GPE, 12.0, 10.0, 2.89)
}
