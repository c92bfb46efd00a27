//! Calibration parameters and flip-flop characterization data.
//!
//! Two kinds of inputs live here and are deliberately kept apart:
//!
//! * [`Calibration`]: desk-model calibration values (unit capacitances, stage
//!   delay coefficients, pull-up resistance, activity scaling). These are
//!   tool defaults, not measured device data; every run echoes them so
//!   results stay attributable.
//! * [`FfTable`]: per-flip-flop timing/power characterization used as input
//!   data by the timing checks and power model.
//!
//! Both ship as versioned TOML files (see `data/`) and can be overridden at
//! runtime; the builtin defaults below are the single source of truth and a
//! test keeps the shipped files in sync.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::elements::{FlipFlopKind, FlipFlopTimingModel};
use crate::error::{CoreError, Result};

pub const CALIBRATION_FORMAT_VERSION: u32 = 1;
pub const FF_TABLE_FORMAT_VERSION: u32 = 1;

/// Gate-load capacitance per stage kind, in farads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitCaps {
    pub gater: f64,
    pub buffer: f64,
    pub psff: f64,
    pub prff: f64,
    pub tspcff: f64,
    pub ff13t: f64,
}

impl UnitCaps {
    pub fn flip_flop(&self, kind: FlipFlopKind) -> f64 {
        match kind {
            FlipFlopKind::Psff => self.psff,
            FlipFlopKind::Prff => self.prff,
            FlipFlopKind::Tspcff => self.tspcff,
            FlipFlopKind::Ff13t => self.ff13t,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("unit_caps.gater", self.gater),
            ("unit_caps.buffer", self.buffer),
            ("unit_caps.psff", self.psff),
            ("unit_caps.prff", self.prff),
            ("unit_caps.tspcff", self.tspcff),
            ("unit_caps.ff13t", self.ff13t),
        ] {
            if !(v > 0.0) {
                return Err(CoreError::validation(name, "must be > 0"));
            }
        }
        Ok(())
    }
}

/// Affine stage delay: intrinsic + slope * load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayParams {
    /// Intrinsic delay in seconds.
    pub intrinsic: f64,
    /// Load sensitivity in seconds per farad.
    pub slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageDelayTable {
    pub gater: DelayParams,
    pub buffer: DelayParams,
}

/// Power-model calibration. `activity_scale` exists because per-FF
/// characterized power multiplied by the full FF count far exceeds realistic
/// tree totals; the tool reproduces orderings and savings percentages, not
/// absolute milliwatts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerCalibration {
    pub activity_scale: f64,
    /// Internal energy per gater transition, joules.
    pub gater_internal_energy: f64,
    /// Internal energy per buffer transition, joules.
    pub buffer_internal_energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineCalibration {
    /// Pull-up path resistance, ohms. The restoring supply is modeled as an
    /// RC charge through this resistance.
    pub pullup_resistance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McCalibration {
    /// Delay sensitivity per unit fractional length deviation.
    pub sensitivity: f64,
}

/// Full calibration bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub format_version: u32,
    pub unit_caps: UnitCaps,
    pub stage_delay: StageDelayTable,
    pub power: PowerCalibration,
    pub engine: EngineCalibration,
    pub monte_carlo: McCalibration,
}

impl Default for Calibration {
    fn default() -> Self {
        Calibration {
            format_version: CALIBRATION_FORMAT_VERSION,
            unit_caps: UnitCaps {
                gater: 2e-15,
                buffer: 1e-15,
                psff: 5e-16,
                prff: 5e-16,
                tspcff: 5e-16,
                ff13t: 5e-16,
            },
            stage_delay: StageDelayTable {
                gater: DelayParams {
                    intrinsic: 1.2e-11,
                    slope: 3e3,
                },
                buffer: DelayParams {
                    intrinsic: 8e-12,
                    slope: 3e3,
                },
            },
            power: PowerCalibration {
                activity_scale: 0.01,
                gater_internal_energy: 1e-16,
                buffer_internal_energy: 5e-17,
            },
            engine: EngineCalibration {
                pullup_resistance: 1.0,
            },
            monte_carlo: McCalibration { sensitivity: 1.0 },
        }
    }
}

impl Calibration {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cal: Calibration =
            toml::from_str(text).map_err(|e| CoreError::Calibration(e.to_string()))?;
        cal.validate()?;
        Ok(cal)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("calibration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != CALIBRATION_FORMAT_VERSION {
            return Err(CoreError::Calibration(format!(
                "unsupported calibration format_version {} (expected {})",
                self.format_version, CALIBRATION_FORMAT_VERSION
            )));
        }
        self.unit_caps.validate()?;
        if !(self.power.activity_scale > 0.0) {
            return Err(CoreError::validation("power.activity_scale", "must be > 0"));
        }
        if !(self.engine.pullup_resistance > 0.0) {
            return Err(CoreError::validation(
                "engine.pullup_resistance",
                "must be > 0",
            ));
        }
        Ok(())
    }
}

/// One flip-flop record as stored in the characterization file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FfRecord {
    pub kind: FlipFlopKind,
    /// Layout area relative to the baseline FF; metadata only, unused by any
    /// model.
    pub normalized_area: f64,
    pub t_cq: f64,
    pub t_setup: f64,
    pub t_hold: f64,
    pub static_power_d0: f64,
    pub static_power_d1: f64,
    /// (frequency Hz, watts), strictly increasing in both.
    pub dynamic_power: Vec<(f64, f64)>,
}

/// Characterization table keyed by flip-flop kind.
#[derive(Debug, Clone, PartialEq)]
pub struct FfTable {
    pub format_version: u32,
    records: BTreeMap<FlipFlopKind, FfRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FfTableFile {
    format_version: u32,
    flip_flop: Vec<FfRecord>,
}

impl FfTable {
    pub fn get(&self, kind: FlipFlopKind) -> &FfRecord {
        &self.records[&kind]
    }

    pub fn model(&self, kind: FlipFlopKind) -> FlipFlopTimingModel {
        let r = self.get(kind);
        FlipFlopTimingModel {
            kind: r.kind,
            t_cq: r.t_cq,
            t_setup: r.t_setup,
            t_hold: r.t_hold,
            static_power_d0: r.static_power_d0,
            static_power_d1: r.static_power_d1,
            dynamic_power_points: r.dynamic_power.clone(),
        }
    }

    pub fn kinds(&self) -> impl Iterator<Item = FlipFlopKind> + '_ {
        self.records.keys().copied()
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: FfTableFile =
            toml::from_str(text).map_err(|e| CoreError::Calibration(e.to_string()))?;
        if file.format_version != FF_TABLE_FORMAT_VERSION {
            return Err(CoreError::Calibration(format!(
                "unsupported flip-flop table format_version {} (expected {})",
                file.format_version, FF_TABLE_FORMAT_VERSION
            )));
        }
        let mut records = BTreeMap::new();
        for rec in file.flip_flop {
            validate_record(&rec)?;
            if records.insert(rec.kind, rec.clone()).is_some() {
                return Err(CoreError::Calibration(format!(
                    "duplicate flip-flop record for {}",
                    rec.kind
                )));
            }
        }
        for kind in FlipFlopKind::ALL {
            if !records.contains_key(&kind) {
                return Err(CoreError::Calibration(format!(
                    "missing flip-flop record for {kind}"
                )));
            }
        }
        Ok(FfTable {
            format_version: file.format_version,
            records,
        })
    }

    pub fn to_toml_string(&self) -> String {
        let file = FfTableFile {
            format_version: self.format_version,
            flip_flop: self.records.values().cloned().collect(),
        };
        toml::to_string_pretty(&file).expect("ff table serializes")
    }
}

fn validate_record(rec: &FfRecord) -> Result<()> {
    if !(rec.t_cq > 0.0) {
        return Err(CoreError::validation("t_cq", "must be > 0"));
    }
    for pair in rec.dynamic_power.windows(2) {
        if !(pair[1].0 > pair[0].0 && pair[1].1 > pair[0].1) {
            return Err(CoreError::validation(
                "dynamic_power",
                "points must be strictly increasing in frequency and power",
            ));
        }
    }
    if rec.dynamic_power.is_empty() {
        return Err(CoreError::validation("dynamic_power", "must be non-empty"));
    }
    Ok(())
}

impl Default for FfTable {
    /// Characterization defaults for the four supported kinds: clk-to-q,
    /// setup/hold, static power per data state, and dynamic power at
    /// 1..5 GHz.
    fn default() -> Self {
        let records = [
            FfRecord {
                kind: FlipFlopKind::Psff,
                normalized_area: 1.0,
                t_cq: 32.5e-12,
                t_setup: 14e-12,
                t_hold: 2e-12,
                static_power_d0: 1550e-12,
                static_power_d1: 593e-12,
                dynamic_power: vec![
                    (1e9, 8.3e-6),
                    (2e9, 14.1e-6),
                    (3e9, 21e-6),
                    (4e9, 28e-6),
                    (5e9, 35.1e-6),
                ],
            },
            FfRecord {
                kind: FlipFlopKind::Prff,
                normalized_area: 0.59,
                t_cq: 35.1e-12,
                t_setup: -95e-12,
                t_hold: 96e-12,
                static_power_d0: 278e-12,
                static_power_d1: 272e-12,
                dynamic_power: vec![
                    (1e9, 7.16e-6),
                    (2e9, 13.8e-6),
                    (3e9, 20.4e-6),
                    (4e9, 27.1e-6),
                    (5e9, 33.8e-6),
                ],
            },
            FfRecord {
                kind: FlipFlopKind::Tspcff,
                normalized_area: 0.84,
                t_cq: 41.9e-12,
                t_setup: -92e-12,
                t_hold: 93e-12,
                static_power_d0: 283e-12,
                static_power_d1: 664e-12,
                dynamic_power: vec![
                    (1e9, 12.3e-6),
                    (2e9, 20.2e-6),
                    (3e9, 28e-6),
                    (4e9, 35.9e-6),
                    (5e9, 43.7e-6),
                ],
            },
            FfRecord {
                kind: FlipFlopKind::Ff13t,
                normalized_area: 1.75,
                t_cq: 37.3e-12,
                t_setup: -25e-12,
                t_hold: 60e-12,
                static_power_d0: 501e-12,
                static_power_d1: 538e-12,
                dynamic_power: vec![
                    (1e9, 16.2e-6),
                    (2e9, 31.1e-6),
                    (3e9, 46e-6),
                    (4e9, 61e-6),
                    (5e9, 76e-6),
                ],
            },
        ];
        FfTable {
            format_version: FF_TABLE_FORMAT_VERSION,
            records: records.into_iter().map(|r| (r.kind, r)).collect(),
        }
    }
}
