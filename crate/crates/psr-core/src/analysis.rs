//! Skew measurement, tree-level power estimation, architecture comparison,
//! and Monte-Carlo variation studies.
//!
//! Power composition uses an explicit activity scale: characterized per-FF
//! power times the full FF population far exceeds realistic tree totals, so
//! the tool reproduces orderings and savings percentages, not absolute
//! milliwatts.

use std::fmt::Write as _;

use rand::distributions::{Distribution as _, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::Serialize;

use crate::calib::{Calibration, FfTable, StageDelayTable};
use crate::elements::{self, DriveStage, FlipFlopKind, FlipFlopTimingModel};
use crate::error::{CoreError, Result};
use crate::netlist::{Distribution, NodeTable, SimNetwork, StageKind, TreeSpec, VariationSpec};
use crate::pipeline::{self, TreeRunOptions};
use crate::rlc;
use crate::transient::{crossing_times, CrossingDirection, Waveform};
use crate::tuning;

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_HISTOGRAM_BINS: usize = 50;

/// Per-leaf arrival times and their spread.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkewReport {
    /// (leaf name, first rising arrival in the window), in branch order.
    pub arrivals: Vec<(String, f64)>,
    /// max(arrivals) - min(arrivals).
    pub skew: f64,
    pub threshold: f64,
    /// Always "rising"; recorded for report readers.
    pub direction: &'static str,
}

/// First rising crossing per leaf within a common cycle window.
pub fn measure_skew(
    leaf_waveforms: &[Waveform],
    nodes: &NodeTable,
    threshold: f64,
    window: (f64, f64),
) -> Result<SkewReport> {
    if leaf_waveforms.is_empty() {
        return Err(CoreError::Precondition("no leaf waveforms".into()));
    }
    let mut arrivals = Vec::with_capacity(leaf_waveforms.len());
    for w in leaf_waveforms {
        let name = nodes.name(w.node).to_string();
        let arrival = crossing_times(w, threshold, CrossingDirection::Rising)?
            .into_iter()
            .find(|&t| t >= window.0 && t < window.1)
            .ok_or_else(|| {
                CoreError::Precondition(format!(
                    "leaf '{name}' never crosses {threshold} V rising in \
                     [{:e}, {:e}) s",
                    window.0, window.1
                ))
            })?;
        arrivals.push((name, arrival));
    }
    let max = arrivals.iter().map(|a| a.1).fold(f64::MIN, f64::max);
    let min = arrivals.iter().map(|a| a.1).fold(f64::MAX, f64::min);
    Ok(SkewReport {
        arrivals,
        skew: max - min,
        threshold,
        direction: "rising",
    })
}

/// Conventional-tree leaf arrivals from the load-dependent stage-delay
/// model: every actively driving stage sees its share of the full branch
/// load, so on-chip load variation turns directly into arrival spread.
pub fn conventional_arrivals(
    network: &SimNetwork,
    delays: &StageDelayTable,
) -> Vec<(String, f64)> {
    network
        .branches
        .iter()
        .map(|b| {
            let mut arrival = 0.0;
            for stage in &b.stages {
                let share = b.tank.c / stage.count as f64;
                match stage.kind {
                    StageKind::Gater => {
                        arrival += elements::stage_delay(DriveStage::Gater, share, delays)
                    }
                    StageKind::Buffer => {
                        arrival += elements::stage_delay(DriveStage::Buffer, share, delays)
                    }
                    StageKind::FlipFlop(_) => {}
                }
            }
            (format!("{}.leaf", b.name), arrival)
        })
        .collect()
}

/// Skew of the conventional baseline tree.
pub fn conventional_skew(network: &SimNetwork, delays: &StageDelayTable) -> SkewReport {
    let arrivals = conventional_arrivals(network, delays);
    let max = arrivals.iter().map(|a| a.1).fold(f64::MIN, f64::max);
    let min = arrivals.iter().map(|a| a.1).fold(f64::MAX, f64::min);
    SkewReport {
        arrivals,
        skew: max - min,
        threshold: network.vdd / 2.0,
        direction: "rising",
    }
}

/// Clocking architecture under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Conventional,
    Resonant,
}

impl std::fmt::Display for Architecture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Architecture::Conventional => f.write_str("conventional"),
            Architecture::Resonant => f.write_str("resonant"),
        }
    }
}

/// Tree power breakdown at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerReport {
    pub frequency: f64,
    pub ff_power: f64,
    pub driver_power: f64,
    pub buffer_gater_power: f64,
    pub static_power: f64,
    pub total: f64,
    pub architecture: Architecture,
    /// Fraction of the driver swing recovered by recycling; 0 for the
    /// conventional architecture.
    pub recycled_fraction: f64,
}

/// Tree power at effective clock rate `f`.
///
/// Conventional drivers burn C*vdd^2 per node per cycle; resonant drivers
/// burn C*vdd*(vdd - swing), the supply only topping up the non-recycled
/// part of the swing. FF power interpolates the characterization table and
/// is scaled by the calibrated activity factor; gater/buffer internal energy
/// is charged per cycle in both architectures.
pub fn tree_power(
    network: &SimNetwork,
    f: f64,
    arch: Architecture,
    ff_models: &FfTable,
    calib: &Calibration,
) -> Result<PowerReport> {
    let vdd = network.vdd;
    let mut ff_power = 0.0;
    let mut static_power = 0.0;
    let mut buffer_gater_power = 0.0;
    let mut driver_power = 0.0;
    let mut recycled_weighted = 0.0;
    let mut cap_total = 0.0;

    for branch in &network.branches {
        for stage in &branch.stages {
            match stage.kind {
                StageKind::FlipFlop(kind) => {
                    let model = ff_models.model(kind);
                    let dynamic = elements::ff_dynamic_power(&model, f)?;
                    ff_power += stage.count as f64 * dynamic * calib.power.activity_scale;
                    // Half the population holds each data value.
                    static_power += stage.count as f64
                        * 0.5
                        * (model.static_power_d0 + model.static_power_d1);
                }
                StageKind::Gater => {
                    buffer_gater_power +=
                        stage.count as f64 * calib.power.gater_internal_energy * f;
                }
                StageKind::Buffer => {
                    buffer_gater_power +=
                        stage.count as f64 * calib.power.buffer_internal_energy * f;
                }
            }
        }
        let c = branch.tank.c;
        cap_total += c;
        match arch {
            Architecture::Conventional => {
                driver_power += c * vdd * vdd * f;
            }
            Architecture::Resonant => {
                let swing = rlc::free_swing(vdd, rlc::quality_factor(&branch.tank)).swing;
                driver_power += c * vdd * (vdd - swing) * f;
                recycled_weighted += c * swing;
            }
        }
    }

    let recycled_fraction = match arch {
        Architecture::Conventional => 0.0,
        Architecture::Resonant => recycled_weighted / (cap_total * vdd),
    };
    Ok(PowerReport {
        frequency: f,
        ff_power,
        driver_power,
        buffer_gater_power,
        static_power,
        total: ff_power + driver_power + buffer_gater_power + static_power,
        architecture: arch,
        recycled_fraction,
    })
}

/// One comparison row: an architecture/FF pairing at one frequency.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub frequency: f64,
    pub architecture: Architecture,
    pub ff_kind: FlipFlopKind,
    pub power: PowerReport,
    pub skew: f64,
    /// (conventional - this) / conventional at the same frequency.
    pub power_savings: f64,
    pub skew_savings: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

/// Replace every FF group of a spec by one kind.
fn spec_with_kind(spec: &TreeSpec, kind: FlipFlopKind) -> TreeSpec {
    let mut out = spec.clone();
    for b in &mut out.branches {
        for group in &mut b.ff_groups {
            group.0 = kind;
        }
    }
    out
}

/// Run tuned-resonant and conventional pipelines per frequency and emit
/// power, skew, and percentage savings per row. Frequencies are effective
/// register clock rates; the resonant trees are tuned once at the highest
/// requested frequency (match plus refinement).
pub fn compare_architectures(
    spec: &TreeSpec,
    freqs: &[f64],
    kinds: &[FlipFlopKind],
    ff_models: &FfTable,
    calib: &Calibration,
    refine_budget: u32,
) -> Result<ComparisonTable> {
    if freqs.is_empty() {
        return Err(CoreError::Precondition("no frequencies requested".into()));
    }
    let f_target = freqs.iter().cloned().fold(f64::MIN, f64::max);

    // Conventional reference always uses the PSFF.
    let conv_spec = spec_with_kind(spec, FlipFlopKind::Psff);
    let conv_net = crate::netlist::elaborate(&conv_spec, &calib.unit_caps)?;
    let conv_skew = conventional_skew(&conv_net, &calib.stage_delay).skew;

    // Tune each resonant variant on its own elaboration (unit caps differ
    // per FF kind in general).
    let mut resonant = Vec::new();
    for &kind in kinds {
        let rspec = spec_with_kind(spec, kind);
        let rnet = crate::netlist::elaborate(&rspec, &calib.unit_caps)?;
        let config = crate::transient::SimConfig::new(
            crate::transient::SimConfig::max_dt_for(&rnet),
            1.0 / f_target,
            rnet.vdd,
        );
        let tuned = tuning::tune_network(&rnet, f_target, Some(refine_budget), &config, calib)?;
        let tuned_net = pipeline::with_inductances(&rnet, &tuned.inductances);
        resonant.push((kind, tuned_net));
    }

    let mut rows = Vec::new();
    for &f in freqs {
        let conv_power = tree_power(&conv_net, f, Architecture::Conventional, ff_models, calib)?;
        rows.push(ComparisonRow {
            frequency: f,
            architecture: Architecture::Conventional,
            ff_kind: FlipFlopKind::Psff,
            power: conv_power,
            skew: conv_skew,
            power_savings: 0.0,
            skew_savings: 0.0,
        });
        for (kind, tuned_net) in &resonant {
            let power = tree_power(tuned_net, f, Architecture::Resonant, ff_models, calib)?;
            let run = pipeline::run_tree(tuned_net, f, calib, &TreeRunOptions::default())?;
            let skew = measure_skew(
                &run.leaves,
                &tuned_net.nodes,
                tuned_net.vdd / 2.0,
                run.window,
            )?
            .skew;
            rows.push(ComparisonRow {
                frequency: f,
                architecture: Architecture::Resonant,
                ff_kind: *kind,
                power,
                skew,
                power_savings: (conv_power.total - power.total) / conv_power.total,
                skew_savings: (conv_skew - skew) / conv_skew,
            });
        }
    }
    Ok(ComparisonTable { rows })
}

/// Monte-Carlo summary of clk-to-q delay under length variation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary {
    pub samples: u64,
    pub mean_t_cq: f64,
    pub stddev: f64,
    /// (bin lower edge, count).
    pub histogram: Vec<(f64, u64)>,
    pub seed: u64,
}

/// Draw per-sample length deviations and map them to t_cq through the
/// linear sensitivity model. Per-sample RNG streams derive from
/// (seed, sample index), so results are schedule-independent and
/// reproducible.
pub fn run_monte_carlo(
    model: &FlipFlopTimingModel,
    variation: &VariationSpec,
    sensitivity: f64,
) -> Result<McSummary> {
    run_monte_carlo_with_bins(model, variation, sensitivity, DEFAULT_HISTOGRAM_BINS)
}

pub fn run_monte_carlo_with_bins(
    model: &FlipFlopTimingModel,
    variation: &VariationSpec,
    sensitivity: f64,
    bins: usize,
) -> Result<McSummary> {
    variation.validate()?;
    let n = variation.samples;
    let bound = variation.length_variation;
    let mut values = Vec::with_capacity(n as usize);
    for k in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(variation.seed, k));
        let delta = draw_deviation(&mut rng, variation.distribution, bound);
        values.push(model.t_cq * (1.0 + sensitivity * delta));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let stddev = if n > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(McSummary {
        samples: n,
        mean_t_cq: mean,
        stddev,
        histogram: histogram(&values, bins)?,
        seed: variation.seed,
    })
}

/// SplitMix64 finalizer over (seed, index).
fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn draw_deviation(rng: &mut ChaCha8Rng, dist: Distribution, bound: f64) -> f64 {
    if bound == 0.0 {
        return 0.0;
    }
    match dist {
        Distribution::GaussianTruncated => {
            // 3 sigma at the bound, rejection-truncated at the bound.
            let normal = Normal::new(0.0, bound / 3.0).expect("valid sigma");
            loop {
                let d = normal.sample(rng);
                if d.abs() <= bound {
                    return d;
                }
            }
        }
        Distribution::Uniform => Uniform::new_inclusive(-bound, bound).sample(rng),
    }
}

/// Uniform bins over [min, max]; right-open except the last (closed).
pub fn histogram(samples: &[f64], bins: usize) -> Result<Vec<(f64, u64)>> {
    if bins < 1 {
        return Err(CoreError::Precondition("bins must be >= 1".into()));
    }
    if samples.is_empty() {
        return Err(CoreError::Precondition("no samples to bin".into()));
    }
    let min = samples.iter().cloned().fold(f64::MAX, f64::min);
    let max = samples.iter().cloned().fold(f64::MIN, f64::max);
    let width = (max - min) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &x in samples {
        let idx = if width == 0.0 {
            0
        } else {
            (((x - min) / width) as usize).min(bins - 1)
        };
        counts[idx] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(j, c)| (min + j as f64 * width, c))
        .collect())
}

// ---------------------------------------------------------------------------
// Report exports
// ---------------------------------------------------------------------------

pub fn skew_report_to_csv(report: &SkewReport) -> String {
    let mut out = String::new();
    writeln!(out, "# schema psrsim.skew v{REPORT_SCHEMA_VERSION}").unwrap();
    writeln!(out, "# skew_s {}", report.skew).unwrap();
    writeln!(out, "leaf,arrival_s").unwrap();
    for (leaf, arrival) in &report.arrivals {
        writeln!(out, "{leaf},{arrival}").unwrap();
    }
    out
}

pub fn comparison_to_csv(table: &ComparisonTable) -> String {
    let mut out = String::new();
    writeln!(out, "# schema psrsim.compare v{REPORT_SCHEMA_VERSION}").unwrap();
    writeln!(
        out,
        "freq_hz,architecture,ff_kind,ff_power_w,driver_power_w,buffer_gater_power_w,\
         static_power_w,total_power_w,recycled_fraction,skew_s,power_savings_pct,skew_savings_pct"
    )
    .unwrap();
    for r in &table.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.frequency,
            r.architecture,
            r.ff_kind,
            r.power.ff_power,
            r.power.driver_power,
            r.power.buffer_gater_power,
            r.power.static_power,
            r.power.total,
            r.power.recycled_fraction,
            r.skew,
            100.0 * r.power_savings,
            100.0 * r.skew_savings,
        )
        .unwrap();
    }
    out
}

pub fn mc_to_csv(summary: &McSummary) -> String {
    let mut out = String::new();
    writeln!(out, "# schema psrsim.mc v{REPORT_SCHEMA_VERSION}").unwrap();
    writeln!(out, "samples,mean_tcq_s,stddev_s,seed").unwrap();
    writeln!(
        out,
        "{},{},{},{}",
        summary.samples, summary.mean_t_cq, summary.stddev, summary.seed
    )
    .unwrap();
    out
}

pub fn histogram_to_csv(summary: &McSummary) -> String {
    let mut out = String::new();
    writeln!(out, "# schema psrsim.histogram v{REPORT_SCHEMA_VERSION}").unwrap();
    writeln!(out, "bin_lower_edge_s,count").unwrap();
    for &(edge, count) in &summary.histogram {
        writeln!(out, "{edge},{count}").unwrap();
    }
    out
}
