//! Photon-triplet generation rates for third-order parametric
//! down-conversion (TOPDC) in integrated waveguides and microring
//! resonators.
//!
//! Frequencies are angular (rad/s) everywhere inside the crate. Conversions
//! to and from wavelengths, cyclic frequencies and engineering units live in
//! [`units`].

use std::fmt;

use serde::{Deserialize, Serialize};

pub mod bandwidth;
pub mod constants;
pub mod dispersion;
mod error;
pub mod modeoverlap;
pub mod phasematch;
pub mod rates;
pub mod sample;
pub mod units;

pub use bandwidth::{BandwidthMethod, BandwidthResult};
pub use dispersion::{DispersionModel, GroupQuantities, IndexTable, Smoothing};
pub use error::{Error, Result};
pub use modeoverlap::{ModeProfile, NonlinearParameterSet};
pub use phasematch::{PumpState, Resonance, RingSpec, WaveguideSpec};
pub use rates::{BandwidthSource, Device, ProcessScenario, RateResult};

/// Mode bands taking part in a process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    Pump,
    /// Degenerate triplet band, `ω_F = ω_P/3`.
    Fundamental,
    /// Unseeded generated band of a non-degenerate process.
    Generated,
    /// Seeded band.
    Seed,
    /// Output band of the doubly stimulated process, `ω = ω_P − 2ω_S`.
    Idler,
}

impl Band {
    pub const ALL: [Band; 5] = [
        Band::Pump,
        Band::Fundamental,
        Band::Generated,
        Band::Seed,
        Band::Idler,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Band::Pump => "pump",
            Band::Fundamental => "fundamental",
            Band::Generated => "generated",
            Band::Seed => "seed",
            Band::Idler => "idler",
        }
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Band {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Band::ALL
            .into_iter()
            .find(|b| b.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown band `{s}`")))
    }
}

/// Process variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Process {
    /// Spontaneous, all three photons in the fundamental band.
    SpDegenerate,
    /// Spontaneous, two photons in the generated band and one in the seed band.
    #[serde(rename = "sp_nondegenerate")]
    SpNonDegenerate,
    /// Seed band driven, two photons generated.
    Stimulated,
    /// Seed band driven and counted twice, one photon generated in the idler band.
    DoublyStimulated,
}

impl Process {
    pub const ALL: [Process; 4] = [
        Process::SpDegenerate,
        Process::SpNonDegenerate,
        Process::Stimulated,
        Process::DoublyStimulated,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Process::SpDegenerate => "sp_degenerate",
            Process::SpNonDegenerate => "sp_nondegenerate",
            Process::Stimulated => "stimulated",
            Process::DoublyStimulated => "doubly_stimulated",
        }
    }

    pub fn is_spontaneous(self) -> bool {
        matches!(self, Process::SpDegenerate | Process::SpNonDegenerate)
    }

    /// Bands besides the pump that the process touches.
    pub fn bands(self) -> &'static [Band] {
        match self {
            Process::SpDegenerate => &[Band::Fundamental],
            Process::SpNonDegenerate | Process::Stimulated => &[Band::Generated, Band::Seed],
            Process::DoublyStimulated => &[Band::Seed, Band::Idler],
        }
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Process {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        let p = match key.as_str() {
            "sp_degenerate" | "spontaneous" | "fff" => Process::SpDegenerate,
            "sp_nondegenerate" | "ggs" => Process::SpNonDegenerate,
            "stimulated" | "gg(s)" | "st" => Process::Stimulated,
            "doubly_stimulated" | "dst" => Process::DoublyStimulated,
            _ => return Err(Error::Parse(format!("unknown process `{s}`"))),
        };
        Ok(p)
    }
}
