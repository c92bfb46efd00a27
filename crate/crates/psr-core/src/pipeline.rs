//! Full-tree simulation pipeline: clock source -> pulse generator -> PSR
//! drivers -> derived register clocks and leaf arrivals.
//!
//! Frequencies here are effective register clock rates (the Pclk pulse
//! rate). Pulses fire on both source clock edges, so the source runs at half
//! the effective rate.
//!
//! Leaf waveforms are the inverted driver outputs shifted by the branch
//! chain latency. In the resonant architecture the gater/buffer chain passes
//! the resonant pulse with a fixed per-stage latency at its nominal local
//! load; branch load imbalance acts on the tank (where inductor matching
//! compensates it), not on the pass elements. The conventional baseline in
//! `analysis` instead attributes load imbalance to its actively driving
//! stages.

use crate::calib::{Calibration, StageDelayTable};
use crate::elements::{self, DriveStage, PulseInterval};
use crate::error::Result;
use crate::netlist::{SimBranch, SimNetwork, StageKind};
use crate::transient::{self, SignalKind, SimConfig, SimOutput, Waveform};

/// Tree-run knobs; the defaults settle two effective cycles and then expose
/// a one-cycle measurement window.
#[derive(Debug, Clone, Copy)]
pub struct TreeRunOptions {
    pub settle_cycles: u32,
    /// Extra tail beyond the measurement window, in effective cycles.
    pub tail_cycles: f64,
    pub record_stride: usize,
}

impl Default for TreeRunOptions {
    fn default() -> Self {
        TreeRunOptions {
            settle_cycles: 2,
            tail_cycles: 0.5,
            record_stride: 1,
        }
    }
}

/// Result of a full-tree run.
#[derive(Debug, Clone)]
pub struct TreeRun {
    pub output: SimOutput,
    /// Boosted pulse rail (behavioral square wave).
    pub v_sr: Waveform,
    /// Inverted driver output per branch.
    pub pclk: Vec<Waveform>,
    /// Pclk shifted by the branch chain latency, per branch.
    pub leaves: Vec<Waveform>,
    /// Cycle-aligned measurement window after settling.
    pub window: (f64, f64),
    pub config: SimConfig,
}

/// Fixed chain latency of a branch in the resonant architecture: each stage
/// at its nominal local load. Flip-flops are the endpoints and add nothing.
pub fn resonant_chain_latency(branch: &SimBranch, delays: &StageDelayTable) -> f64 {
    let mut d = 0.0;
    for stage in &branch.stages {
        match stage.kind {
            StageKind::Gater => {
                d += elements::stage_delay(DriveStage::Gater, stage.unit_cap, delays)
            }
            StageKind::Buffer => {
                d += elements::stage_delay(DriveStage::Buffer, stage.unit_cap, delays)
            }
            StageKind::FlipFlop(_) => {}
        }
    }
    d
}

/// Simulate the whole tree at an effective register clock rate.
pub fn run_tree(
    network: &SimNetwork,
    effective_freq: f64,
    calib: &Calibration,
    opts: &TreeRunOptions,
) -> Result<TreeRun> {
    run_tree_with_dt(network, effective_freq, calib, opts, None)
}

/// Like [`run_tree`] but on a caller-pinned dt grid (used by the tuner so
/// every candidate evaluation shares one grid).
pub fn run_tree_with_dt(
    network: &SimNetwork,
    effective_freq: f64,
    calib: &Calibration,
    opts: &TreeRunOptions,
    dt: Option<f64>,
) -> Result<TreeRun> {
    let t_eff = 1.0 / effective_freq;
    let source_freq = effective_freq / 2.0;
    let t_end = (opts.settle_cycles as f64 + 1.0 + opts.tail_cycles) * t_eff;

    let t_d = network.pulse_gen.delay();
    let edges = elements::clock_edges(source_freq, t_end);
    let pulses = elements::pulse_train(&edges, t_d)?;

    let mut config = SimConfig::new(
        dt.unwrap_or_else(|| SimConfig::max_dt_for(network)),
        t_end,
        network.vdd,
    );
    config.record_stride = opts.record_stride;
    config.pullup_resistance = calib.engine.pullup_resistance;

    let schedule =
        elements::driver_schedule(network, &pulses, t_end, config.pullup_resistance)?;
    let output = transient::simulate(network, &schedule, &config)?;

    let vdd = network.vdd;
    let mut pclk = Vec::with_capacity(network.branches.len());
    let mut leaves = Vec::with_capacity(network.branches.len());
    for branch in &network.branches {
        let rclk = output
            .waveform(branch.rclk, SignalKind::Voltage)
            .expect("driver waveform recorded");
        let mut inverted = rclk.map_values(|v| vdd - v);
        inverted.node = branch.pclk;
        let latency = resonant_chain_latency(branch, &calib.stage_delay);
        leaves.push(inverted.delayed(latency, branch.leaf));
        pclk.push(inverted);
    }

    let v_sr = v_sr_waveform(network, &pulses, &output);

    let window_start = opts.settle_cycles as f64 * t_eff;
    Ok(TreeRun {
        output,
        v_sr,
        pclk,
        leaves,
        window: (window_start, window_start + t_eff),
        config,
    })
}

/// Behavioral boosted rail: high for the pulse width, sampled on the same
/// grid as the electrical waveforms.
fn v_sr_waveform(network: &SimNetwork, pulses: &[PulseInterval], output: &SimOutput) -> Waveform {
    let amplitude = elements::boosted_amplitude(&network.pulse_gen, network.vdd);
    let node = network
        .nodes
        .id("V_SR")
        .expect("every network interns V_SR");
    let grid = &output.waveforms[0].samples;
    let mut samples = Vec::with_capacity(grid.len());
    let mut p = 0usize;
    for &(t, _) in grid {
        while p < pulses.len() && pulses[p].end() <= t {
            p += 1;
        }
        let high = p < pulses.len() && pulses[p].start <= t && t < pulses[p].end();
        samples.push((t, if high { amplitude } else { 0.0 }));
    }
    Waveform {
        node,
        kind: SignalKind::Voltage,
        samples,
    }
}

/// Replace per-branch inductances, returning the retuned network.
pub fn with_inductances(network: &SimNetwork, inductances: &[f64]) -> SimNetwork {
    assert_eq!(network.branches.len(), inductances.len());
    let mut out = network.clone();
    for (b, &l) in out.branches.iter_mut().zip(inductances) {
        b.tank.l = l;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calib::Calibration;
    use crate::elements::{BoosterSpec, PulseGenSpec};
    use crate::netlist::SimNetwork;
    use crate::rlc::RlcTank;
    use crate::transient::{crossing_times, CrossingDirection};

    fn driver_network(vdd: f64) -> SimNetwork {
        // 5 GHz tank, Q = 5.
        let l: f64 = 1.0132e-9;
        let c: f64 = 1e-12;
        let r = (l / c).sqrt() / 5.0;
        let mut net = SimNetwork::single_tank("d", RlcTank::new(l, c, r).unwrap());
        net.vdd = vdd;
        net.source_freq = 0.5e9;
        net.pulse_gen = PulseGenSpec {
            l1: 1.0132e-9,
            c1: 1e-12,
            booster: BoosterSpec {
                l2: 1e-9,
                c2: 1e-12,
                boost_gain: 1.5,
            },
        };
        net
    }

    #[test]
    fn tree_run_produces_pclk_pulses_at_double_rate() {
        let net = driver_network(0.8);
        let calib = Calibration::default();
        let run = run_tree(&net, 1e9, &calib, &TreeRunOptions::default()).unwrap();
        // Rising Pclk crossings at vdd/2 arrive once per effective cycle.
        let xs = crossing_times(&run.pclk[0], 0.4, CrossingDirection::Rising).unwrap();
        assert!(xs.len() >= 3, "expected pulses, got {}", xs.len());
        let spacing = xs[2] - xs[1];
        assert!(
            (spacing - 1e-9).abs() < 2.0 * run.config.dt,
            "pulse spacing {spacing:e}"
        );
    }

    #[test]
    fn leaf_is_pclk_shifted_by_chain_latency() {
        let net = driver_network(0.8);
        let calib = Calibration::default();
        let run = run_tree(&net, 1e9, &calib, &TreeRunOptions::default()).unwrap();
        // No stages on a bare driver network: latency zero, same samples.
        let latency = resonant_chain_latency(&net.branches[0], &calib.stage_delay);
        assert_eq!(latency, 0.0);
        assert_eq!(run.leaves[0].samples, run.pclk[0].samples);
    }

    #[test]
    fn v_sr_rail_toggles() {
        let net = driver_network(0.8);
        let calib = Calibration::default();
        let run = run_tree(&net, 1e9, &calib, &TreeRunOptions::default()).unwrap();
        let high = run.v_sr.samples.iter().filter(|&&(_, v)| v > 0.0).count();
        assert!(high > 0 && high < run.v_sr.samples.len());
        // Boosted level, not the bare rail.
        let peak = run.v_sr.samples.iter().map(|&(_, v)| v).fold(0.0, f64::max);
        assert!((peak - 1.2).abs() < 1e-12, "peak {peak}");
    }
}
