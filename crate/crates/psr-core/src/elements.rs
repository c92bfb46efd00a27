//! Behavioral models of the circuit elements: pulse generator with voltage
//! doubler, PSR driver, buffer/gater delay stages, and the four flip-flop
//! types with setup/hold checking.
//!
//! Flip-flop electrical behavior is event-level (bits plus a timing model):
//! the clock path is electrical (RLC), the data path behavioral.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::calib::{DelayParams, StageDelayTable};
use crate::error::{CoreError, Result};
use crate::netlist::{SimBranch, SimNetwork};
use crate::rlc::{self, RlcTank};
use crate::transient::{self, Phase, SimConfig, SwitchSchedule, Waveform};

/// Supported flip-flop kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FlipFlopKind {
    /// Primary-secondary flip-flop, the conventional edge-triggered baseline.
    #[serde(rename = "PSFF")]
    Psff,
    /// Pulsed resonant flip-flop.
    #[serde(rename = "PRFF")]
    Prff,
    /// True single-phase clock pulsed flip-flop.
    #[serde(rename = "TSPCFF")]
    Tspcff,
    /// 13-transistor pulsed flip-flop.
    #[serde(rename = "FF13T")]
    Ff13t,
}

impl FlipFlopKind {
    pub const ALL: [FlipFlopKind; 4] = [
        FlipFlopKind::Psff,
        FlipFlopKind::Prff,
        FlipFlopKind::Tspcff,
        FlipFlopKind::Ff13t,
    ];

    /// Pulsed kinds are transparent for the pulse duration; the PSFF is
    /// edge-triggered.
    pub fn is_pulsed(&self) -> bool {
        !matches!(self, FlipFlopKind::Psff)
    }
}

impl fmt::Display for FlipFlopKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FlipFlopKind::Psff => "PSFF",
            FlipFlopKind::Prff => "PRFF",
            FlipFlopKind::Tspcff => "TSPCFF",
            FlipFlopKind::Ff13t => "FF13T",
        };
        f.write_str(s)
    }
}

impl FromStr for FlipFlopKind {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "PSFF" => Ok(FlipFlopKind::Psff),
            "PRFF" => Ok(FlipFlopKind::Prff),
            "TSPCFF" => Ok(FlipFlopKind::Tspcff),
            "FF13T" | "13TPFF" => Ok(FlipFlopKind::Ff13t),
            other => Err(CoreError::validation(
                "flip-flop kind",
                format!("unknown kind '{other}' (expected PSFF, PRFF, TSPCFF, or FF13T)"),
            )),
        }
    }
}

/// Dual-rail booster of the pulse generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoosterSpec {
    /// Booster inductor, henries.
    pub l2: f64,
    /// Booster load capacitance, farads.
    pub c2: f64,
    /// Amplitude gain, dimensionless >= 1.
    pub boost_gain: f64,
}

/// Pulse generator: a series delay tank plus the voltage-doubler booster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseGenSpec {
    /// Delay inductor, henries.
    pub l1: f64,
    /// Matching capacitance, farads.
    pub c1: f64,
    pub booster: BoosterSpec,
}

impl PulseGenSpec {
    /// Generated delay and pulse width: pi*sqrt(l1*c1).
    pub fn delay(&self) -> f64 {
        rlc::pulse_width(self.l1, self.c1)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("pulse_gen.l1", self.l1),
            ("pulse_gen.c1", self.c1),
            ("pulse_gen.booster.l2", self.booster.l2),
            ("pulse_gen.booster.c2", self.booster.c2),
        ] {
            if !(v > 0.0) {
                return Err(CoreError::validation(name, "must be > 0"));
            }
        }
        if !(self.booster.boost_gain >= 1.0) {
            return Err(CoreError::validation(
                "pulse_gen.booster.gain",
                "must be >= 1",
            ));
        }
        Ok(())
    }
}

/// Per-kind timing and power characterization.
#[derive(Debug, Clone, PartialEq)]
pub struct FlipFlopTimingModel {
    pub kind: FlipFlopKind,
    /// Clock-to-q delay, seconds.
    pub t_cq: f64,
    /// Setup time, seconds; negative values permit data arrival after the
    /// capturing edge.
    pub t_setup: f64,
    /// Hold time, seconds.
    pub t_hold: f64,
    pub static_power_d0: f64,
    pub static_power_d1: f64,
    /// (frequency Hz, watts), strictly increasing in both.
    pub dynamic_power_points: Vec<(f64, f64)>,
}

/// Internal storage state of a flip-flop: output q plus the complementary
/// storage nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlipFlopState {
    pub q: bool,
    pub s: bool,
    pub s_b: bool,
}

impl FlipFlopState {
    pub fn with_q(q: bool) -> Self {
        FlipFlopState { q, s: q, s_b: !q }
    }
}

/// Signal names used by digital event streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Signal {
    Clk,
    VSr,
    RClk,
    Pclk,
    Data,
    Reset,
}

/// A level change on a named signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DigitalEvent {
    pub time: f64,
    pub signal: Signal,
    pub level: bool,
}

impl DigitalEvent {
    pub fn new(time: f64, signal: Signal, level: bool) -> Self {
        DigitalEvent {
            time,
            signal,
            level,
        }
    }
}

/// A pulse on the boosted rail: [start, start + width).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseInterval {
    pub start: f64,
    pub width: f64,
}

impl PulseInterval {
    pub fn end(&self) -> f64 {
        self.start + self.width
    }
}

/// Generate a pulse of width `t_d` at every clock edge (both rising and
/// falling), doubling the pulse rate relative to the clock frequency.
///
/// Errors when `t_d` reaches the spacing between consecutive edges: the
/// pulses would merge.
pub fn pulse_train(clk_edges: &[DigitalEvent], t_d: f64) -> Result<Vec<PulseInterval>> {
    if !(t_d > 0.0) {
        return Err(CoreError::Precondition("pulse width must be > 0".into()));
    }
    for pair in clk_edges.windows(2) {
        if pair[0].level == pair[1].level {
            return Err(CoreError::Precondition(
                "clock edges must alternate levels".into(),
            ));
        }
        let spacing = pair[1].time - pair[0].time;
        if t_d >= spacing {
            return Err(CoreError::Precondition(format!(
                "pulse width {t_d:e} s >= edge spacing {spacing:e} s; pulses would merge"
            )));
        }
    }
    Ok(clk_edges
        .iter()
        .map(|e| PulseInterval {
            start: e.time,
            width: t_d,
        })
        .collect())
}

/// Alternating clock edges at `freq`, starting with a rising edge at t = 0,
/// covering [0, t_end).
pub fn clock_edges(freq: f64, t_end: f64) -> Vec<DigitalEvent> {
    let half_period = 0.5 / freq;
    let mut edges = Vec::new();
    let mut level = true;
    let mut k = 0u64;
    loop {
        let t = k as f64 * half_period;
        if t >= t_end {
            break;
        }
        edges.push(DigitalEvent::new(t, Signal::Clk, level));
        level = !level;
        k += 1;
    }
    edges
}

/// Boosted amplitude of the doubler output: gain * vdd, behaviorally clamped
/// at the 2x doubling ceiling.
pub fn boosted_amplitude(spec: &PulseGenSpec, vdd: f64) -> f64 {
    (spec.booster.boost_gain * vdd).min(2.0 * vdd)
}

/// Drive a single PSR driver tank with the given boosted pulses and return
/// the R_CLK waveform. The inverse of this waveform is the Pclk seen by the
/// registers; Pclk events sit at the vdd/2 crossings.
pub fn psr_driver_run(
    tank: &RlcTank,
    pulses: &[PulseInterval],
    config: &SimConfig,
) -> Result<Waveform> {
    if rlc::classify_damping(tank) != rlc::Damping::Underdamped {
        return Err(CoreError::Precondition(
            "PSR driver requires an underdamped tank".into(),
        ));
    }
    let network = SimNetwork::single_tank("drv", *tank);
    let schedule = driver_schedule(&network, pulses, config.t_end, config.pullup_resistance)?;
    let out = transient::simulate(&network, &schedule, config)?;
    let node = network.nodes.id("drv.R_CLK").expect("driver node exists");
    Ok(out
        .waveforms
        .into_iter()
        .find(|w| w.node == node && w.kind == transient::SignalKind::Voltage)
        .expect("driver voltage waveform"))
}

/// Build the per-branch switch schedule induced by a boosted pulse train.
///
/// Each pulse opens the discharge path. The discharge phase spans one full
/// resonant period of the branch tank (the down-swing to V_OL and the
/// recycled up-swing to V_OH) when that fits before the next pulse; when it
/// does not, the phase is cut to a half period (the down-swing alone, where
/// the inductor current naturally returns to zero). The pull-up phase then
/// restores the rail until the next pulse. A pull-up window of at least
/// max(7*Rpu*C, 5% of the pulse spacing) is always reserved so the rail
/// recovers at every operating frequency.
pub fn driver_schedule(
    network: &SimNetwork,
    pulses: &[PulseInterval],
    t_end: f64,
    pullup_resistance: f64,
) -> Result<SwitchSchedule> {
    let mut schedule = SwitchSchedule::new();
    for (b, branch) in network.branches.iter().enumerate() {
        schedule.push(0.0, b, Phase::PullUp);
        for (k, pulse) in pulses.iter().enumerate() {
            if pulse.start >= t_end {
                break;
            }
            let next_start = pulses.get(k + 1).map(|p| p.start).unwrap_or(f64::INFINITY);
            let spacing = next_start - pulse.start;
            let duration = discharge_duration(branch, spacing, pullup_resistance)?;
            schedule.push(pulse.start, b, Phase::ResonantDischarge);
            schedule.push(pulse.start + duration, b, Phase::PullUp);
        }
    }
    schedule.sort();
    Ok(schedule)
}

fn discharge_duration(branch: &SimBranch, spacing: f64, pullup_resistance: f64) -> Result<f64> {
    let t_res = 1.0 / rlc::resonant_frequency(&branch.tank);
    if !spacing.is_finite() {
        return Ok(t_res);
    }
    let w_min = (7.0 * pullup_resistance * branch.tank.c).max(0.05 * spacing);
    if t_res + w_min <= spacing {
        Ok(t_res)
    } else if 0.5 * t_res + w_min <= spacing {
        Ok(0.5 * t_res)
    } else {
        Err(CoreError::Precondition(format!(
            "pulse spacing {spacing:e} s cannot fit a discharge of branch '{}' \
             (resonant period {t_res:e} s)",
            branch.name
        )))
    }
}

/// Stage kinds with an affine delay model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriveStage {
    Gater,
    Buffer,
}

/// Affine stage delay: intrinsic + slope * load.
pub fn stage_delay(kind: DriveStage, load: f64, params: &StageDelayTable) -> f64 {
    let DelayParams { intrinsic, slope } = match kind {
        DriveStage::Gater => params.gater,
        DriveStage::Buffer => params.buffer,
    };
    intrinsic + slope * load
}

/// One step of the 13T pulsed flip-flop state machine.
///
/// reset_n low forces q = 0 regardless of the clock (active-low asynchronous
/// reset). With the pulse low the FF holds; with the pulse high it is
/// transparent and writes `data`. Total over all inputs.
pub fn ff13t_step(state: FlipFlopState, pclk: bool, data: bool, reset_n: bool) -> FlipFlopState {
    if !reset_n {
        FlipFlopState::with_q(false)
    } else if !pclk {
        state
    } else {
        FlipFlopState::with_q(data)
    }
}

/// A recorded capture: when the q output settles and to what value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capture {
    pub time: f64,
    pub q: bool,
}

/// Replay capture semantics over event streams.
///
/// The PSFF captures the pre-edge data value on rising clock edges. Pulsed
/// kinds are transparent for the pulse window [rise, fall): the last data
/// value seen in the window sticks, and the q transition is reported t_cq
/// after the deciding event. reset_n low at the trigger forces q = 0.
///
/// Event lists must be time-ordered; levels before the first event of a
/// stream default to data = 0, reset_n = 1.
pub fn ff_capture(
    model: &FlipFlopTimingModel,
    clock_events: &[DigitalEvent],
    data_events: &[DigitalEvent],
    reset_events: &[DigitalEvent],
) -> Vec<Capture> {
    let mut captures = Vec::new();
    if model.kind.is_pulsed() {
        let mut k = 0;
        while k < clock_events.len() {
            let rise = &clock_events[k];
            if !rise.level {
                k += 1;
                continue;
            }
            let window_end = clock_events[k + 1..]
                .iter()
                .find(|e| !e.level)
                .map(|e| e.time)
                .unwrap_or(f64::INFINITY);
            // Last data change inside [rise, fall) decides; otherwise the
            // value standing at the window open.
            let mut value = level_before(data_events, rise.time, false);
            let mut trigger = rise.time;
            for e in data_events {
                if e.time >= rise.time && e.time < window_end {
                    value = e.level;
                    trigger = e.time;
                }
            }
            if !level_before(reset_events, window_end, true) {
                value = false;
            }
            captures.push(Capture {
                time: trigger + model.t_cq,
                q: value,
            });
            k += 1;
        }
    } else {
        for edge in clock_events.iter().filter(|e| e.level) {
            let mut value = level_before(data_events, edge.time, false);
            if !level_before(reset_events, edge.time, true) {
                value = false;
            }
            captures.push(Capture {
                time: edge.time + model.t_cq,
                q: value,
            });
        }
    }
    captures
}

/// Signal level strictly before time `t`, with a default for the era before
/// the first event.
fn level_before(events: &[DigitalEvent], t: f64, default: bool) -> bool {
    let mut level = default;
    for e in events {
        if e.time < t {
            level = e.level;
        } else {
            break;
        }
    }
    level
}

/// Setup/hold check outcome with slack values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetupHoldReport {
    pub setup_violated: bool,
    pub hold_violated: bool,
    /// (edge - data_change) - t_setup; negative means violated.
    pub setup_slack: f64,
    /// (data_change - edge) - t_hold; meaningful for changes at/after the
    /// edge, where negative means inside the hold window.
    pub hold_slack: f64,
}

/// Check a single data change against a capturing edge.
///
/// Setup is violated iff edge - data_change < t_setup; a negative t_setup
/// permits data changes up to |t_setup| after the edge. Hold uses the
/// half-open window [edge, edge + t_hold): a change exactly at the window
/// close passes.
pub fn check_setup_hold(model: &FlipFlopTimingModel, data_change: f64, edge: f64) -> SetupHoldReport {
    let separation = edge - data_change;
    let after_edge = data_change - edge;
    SetupHoldReport {
        setup_violated: separation < model.t_setup,
        hold_violated: after_edge >= 0.0 && after_edge < model.t_hold,
        setup_slack: separation - model.t_setup,
        hold_slack: after_edge - model.t_hold,
    }
}

/// Piecewise-linear dynamic power over the characterized points; exact at
/// characterized frequencies, refused outside the range.
pub fn ff_dynamic_power(model: &FlipFlopTimingModel, f: f64) -> Result<f64> {
    let points = &model.dynamic_power_points;
    let (lo, hi) = (points[0].0, points[points.len() - 1].0);
    if f < lo || f > hi {
        return Err(CoreError::Range(format!(
            "frequency {f:e} Hz outside characterized range [{lo:e}, {hi:e}] Hz for {}",
            model.kind
        )));
    }
    for pair in points.windows(2) {
        let ((f0, p0), (f1, p1)) = (pair[0], pair[1]);
        if f == f0 {
            return Ok(p0);
        }
        if f <= f1 {
            return Ok(p0 + (p1 - p0) * (f - f0) / (f1 - f0));
        }
    }
    Ok(points[points.len() - 1].1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calib::FfTable;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn model(kind: FlipFlopKind) -> FlipFlopTimingModel {
        FfTable::default().model(kind)
    }

    #[test]
    fn pulse_train_doubles_a_half_ghz_clock() {
        // 0.5 GHz clock, t_d = 100 ps: a pulse starts every 1 ns.
        let edges = clock_edges(0.5e9, 5e-9);
        let pulses = pulse_train(&edges, 100e-12).unwrap();
        assert_eq!(pulses.len(), 5);
        for (k, p) in pulses.iter().enumerate() {
            assert_relative_eq!(p.start, k as f64 * 1e-9, epsilon = 1e-20);
            assert_eq!(p.width, 100e-12);
        }
    }

    #[test]
    fn pulse_train_empty_input() {
        assert!(pulse_train(&[], 100e-12).unwrap().is_empty());
    }

    #[test]
    fn pulse_train_one_ghz_clock() {
        // 1 GHz clock over 5 ns: 10 edges, spacing 500 ps.
        let edges = clock_edges(1e9, 5e-9);
        let pulses = pulse_train(&edges, 100e-12).unwrap();
        assert_eq!(pulses.len(), 10);
        for pair in pulses.windows(2) {
            assert_relative_eq!(pair[1].start - pair[0].start, 500e-12, epsilon = 1e-22);
        }
    }

    #[test]
    fn pulse_train_rejects_merging_pulses() {
        let edges = clock_edges(5e9, 2e-9); // edges every 100 ps
        let err = pulse_train(&edges, 100e-12).unwrap_err();
        assert!(matches!(err, CoreError::Precondition(_)));
    }

    #[test]
    fn frequency_doubling_is_exact() {
        // Count pulses over an integer number of clock periods.
        for freq in [0.25e9, 0.5e9, 1e9, 2e9] {
            let periods = 8u64;
            let t_end = periods as f64 / freq;
            let edges = clock_edges(freq, t_end - 1e-15);
            let pulses = pulse_train(&edges, 20e-12).unwrap();
            assert_eq!(pulses.len() as u64, 2 * periods);
        }
    }

    #[test]
    fn boosted_amplitude_gain_and_clamp() {
        let mut spec = PulseGenSpec {
            l1: 1e-9,
            c1: 1e-12,
            booster: BoosterSpec {
                l2: 1e-9,
                c2: 1e-12,
                boost_gain: 1.0,
            },
        };
        assert_eq!(boosted_amplitude(&spec, 0.8), 0.8);
        spec.booster.boost_gain = 1.5;
        assert_relative_eq!(boosted_amplitude(&spec, 0.8), 1.2, max_relative = 1e-15);
        spec.booster.boost_gain = 3.0;
        assert_relative_eq!(boosted_amplitude(&spec, 0.8), 1.6, max_relative = 1e-15);
    }

    #[test]
    fn stage_delay_affine() {
        let table = StageDelayTable {
            gater: DelayParams {
                intrinsic: 1e-11,
                slope: 2e3,
            },
            buffer: DelayParams {
                intrinsic: 5e-12,
                slope: 2e3,
            },
        };
        // Zero-load buffer: intrinsic exactly.
        assert_eq!(stage_delay(DriveStage::Buffer, 0.0, &table), 5e-12);
        // intrinsic 5 ps + 2 ps/fF * 10 fF = 25 ps.
        assert_relative_eq!(
            stage_delay(DriveStage::Buffer, 10e-15, &table),
            25e-12,
            max_relative = 1e-12
        );
        // Chain of three identical buffers is additive.
        let single = stage_delay(DriveStage::Buffer, 3e-15, &table);
        assert_relative_eq!(3.0 * single, single + single + single, max_relative = 1e-15);
    }

    #[test]
    fn ff13t_reset_dominates() {
        let s = ff13t_step(FlipFlopState::with_q(true), true, true, false);
        assert!(!s.q);
    }

    #[test]
    fn ff13t_holds_with_pulse_low() {
        let s = ff13t_step(FlipFlopState::with_q(true), false, false, true);
        assert!(s.q);
    }

    #[test]
    fn ff13t_writes_zero() {
        let s = ff13t_step(FlipFlopState::with_q(true), true, false, true);
        assert!(!s.q);
    }

    #[test]
    fn ff13t_totality_and_complementarity() {
        // All input combinations times both prior states.
        for q0 in [false, true] {
            for pclk in [false, true] {
                for data in [false, true] {
                    for reset_n in [false, true] {
                        let s = ff13t_step(FlipFlopState::with_q(q0), pclk, data, reset_n);
                        assert_eq!(s.s, !s.s_b);
                        assert_eq!(s.q, s.s);
                        if !reset_n {
                            assert!(!s.q);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn psff_capture_with_t_cq() {
        // Table-driven PSFF: C-Q 32.5 ps, data stable 1, rising edge at 1 ns.
        let m = model(FlipFlopKind::Psff);
        let clock = [
            DigitalEvent::new(1e-9, Signal::Clk, true),
            DigitalEvent::new(1.5e-9, Signal::Clk, false),
        ];
        let data = [DigitalEvent::new(0.0, Signal::Data, true)];
        let caps = ff_capture(&m, &clock, &data, &[]);
        assert_eq!(caps.len(), 1);
        assert!(caps[0].q);
        assert_relative_eq!(caps[0].time, 1e-9 + 32.5e-12, max_relative = 1e-12);
    }

    #[test]
    fn no_clock_no_captures() {
        let m = model(FlipFlopKind::Psff);
        assert!(ff_capture(&m, &[], &[], &[]).is_empty());
    }

    #[test]
    fn pulsed_capture_sees_in_window_data() {
        // Data toggles 0->1 at 10 ps after the pulse start; window 100 ps.
        let m = model(FlipFlopKind::Ff13t);
        let clock = [
            DigitalEvent::new(1e-9, Signal::Pclk, true),
            DigitalEvent::new(1.1e-9, Signal::Pclk, false),
        ];
        let data = [DigitalEvent::new(1.01e-9, Signal::Data, true)];
        let caps = ff_capture(&m, &clock, &data, &[]);
        assert_eq!(caps.len(), 1);
        assert!(caps[0].q);
        assert_relative_eq!(caps[0].time, 1.01e-9 + m.t_cq, max_relative = 1e-12);
    }

    #[test]
    fn pulsed_agrees_with_edge_capture_on_stable_data() {
        // When data is stable through every pulse window, pulsed captures
        // equal PSFF edge captures on the same streams (t_cq held equal).
        let mut pulsed = model(FlipFlopKind::Prff);
        let mut edge = model(FlipFlopKind::Psff);
        pulsed.t_cq = 30e-12;
        edge.t_cq = 30e-12;
        let mut clock = Vec::new();
        for k in 0..8 {
            let t = k as f64 * 1e-9;
            clock.push(DigitalEvent::new(t, Signal::Pclk, true));
            clock.push(DigitalEvent::new(t + 100e-12, Signal::Pclk, false));
        }
        // Data changes only between windows.
        let data = [
            DigitalEvent::new(0.5e-9, Signal::Data, true),
            DigitalEvent::new(2.5e-9, Signal::Data, false),
            DigitalEvent::new(5.5e-9, Signal::Data, true),
        ];
        let a = ff_capture(&pulsed, &clock, &data, &[]);
        let b = ff_capture(&edge, &clock, &data, &[]);
        assert_eq!(a, b);
    }

    #[test]
    fn setup_hold_reference_cases() {
        let psff = model(FlipFlopKind::Psff);
        // Data 20 ps before the edge: pass with 6 ps slack.
        let r = check_setup_hold(&psff, 0.98e-9, 1e-9);
        assert!(!r.setup_violated);
        assert_relative_eq!(r.setup_slack, 6e-12, max_relative = 1e-9);
        // Data 10 ps before the edge: setup violation, slack -4 ps.
        let r = check_setup_hold(&psff, 0.99e-9, 1e-9);
        assert!(r.setup_violated);
        assert_relative_eq!(r.setup_slack, -4e-12, max_relative = 1e-9);

        let prff = model(FlipFlopKind::Prff);
        // Data 50 ps after the edge: no setup violation, hold violation.
        let r = check_setup_hold(&prff, 1.05e-9, 1e-9);
        assert!(!r.setup_violated);
        assert!(r.hold_violated);
    }

    #[test]
    fn hold_window_is_half_open() {
        // Edge at t = 0 keeps the boundary arithmetic exact.
        let psff = model(FlipFlopKind::Psff);
        // Change exactly at edge + t_hold passes.
        let r = check_setup_hold(&psff, 2e-12, 0.0);
        assert!(!r.hold_violated);
        let r = check_setup_hold(&psff, 1.999e-12, 0.0);
        assert!(r.hold_violated);
    }

    #[test]
    fn dynamic_power_table_and_interpolation() {
        let m = model(FlipFlopKind::Psff);
        assert_eq!(ff_dynamic_power(&m, 1e9).unwrap(), 8.3e-6);
        assert_eq!(ff_dynamic_power(&m, 5e9).unwrap(), 35.1e-6);
        // 1.5 GHz: midway between 8.3 and 14.1 -> 11.2 uW.
        assert_relative_eq!(
            ff_dynamic_power(&m, 1.5e9).unwrap(),
            11.2e-6,
            max_relative = 1e-12
        );
        assert!(ff_dynamic_power(&m, 6e9).is_err());
        assert!(ff_dynamic_power(&m, 0.5e9).is_err());
    }

    #[test]
    fn dynamic_power_exact_at_every_characterized_point() {
        for kind in FlipFlopKind::ALL {
            let m = model(kind);
            for &(f, p) in &m.dynamic_power_points {
                assert_eq!(ff_dynamic_power(&m, f).unwrap(), p);
            }
        }
    }

    proptest! {
        /// Increasing data-to-edge separation monotonically increases setup
        /// slack.
        #[test]
        fn setup_slack_monotone(
            sep in -2e-10f64..2e-10,
            delta in 1e-13f64..1e-10,
        ) {
            let m = model(FlipFlopKind::Prff);
            let edge = 1e-9;
            let near = check_setup_hold(&m, edge - sep, edge);
            let far = check_setup_hold(&m, edge - sep - delta, edge);
            prop_assert!(far.setup_slack > near.setup_slack);
        }
    }
}
