//! Fixed-step transient simulation of switched RLC branches.
//!
//! Classical 4th-order integration at a fixed dt, with event-scheduled phase
//! changes per branch. The step straddling an event is split so state is
//! advanced exactly to the event time before the topology changes; the
//! recording grid itself stays uniform. Supplied and dissipated energies are
//! integrated alongside the electrical state so the ledger closes to the
//! integrator's own accuracy.
//!
//! Phases:
//! * `ResonantDischarge`: the series-RLC loop, ringing about the mid-rail
//!   equivalent source vdd/2.
//! * `PullUp`: RC charge toward the supply through the configured pull-up
//!   resistance; the inductor path is open.
//! * `Hold`: zero-current freeze.
//!
//! Opening the inductor path (leaving `ResonantDischarge`) books any residual
//! inductor energy as switching dissipation, keeping the ledger closed.

use std::fmt;
use std::fmt::Write as _;

use crate::error::{CoreError, Result};
use crate::netlist::{NodeId, NodeTable, SimNetwork};
use crate::rlc::{self, Damping, TankState};

/// Branch operating phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    PullUp,
    ResonantDischarge,
    Hold,
}

/// A scheduled topology change on one branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchEvent {
    pub time: f64,
    pub branch: usize,
    pub phase: Phase,
}

/// Time-ordered switching schedule. Every branch needs an event at t = 0
/// fixing its initial phase.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SwitchSchedule {
    pub events: Vec<SwitchEvent>,
}

impl SwitchSchedule {
    pub fn new() -> Self {
        SwitchSchedule { events: Vec::new() }
    }

    /// Single-phase schedule for every branch of an n-branch network.
    pub fn uniform(n_branches: usize, phase: Phase) -> Self {
        let mut s = SwitchSchedule::new();
        for b in 0..n_branches {
            s.push(0.0, b, phase);
        }
        s
    }

    pub fn push(&mut self, time: f64, branch: usize, phase: Phase) {
        self.events.push(SwitchEvent {
            time,
            branch,
            phase,
        });
    }

    /// Stable sort by time, preserving insertion order of simultaneous
    /// events.
    pub fn sort(&mut self) {
        self.events.sort_by(|a, b| a.time.total_cmp(&b.time));
    }

    fn validate(&self, n_branches: usize) -> Result<()> {
        if self.events.is_empty() {
            return Err(CoreError::Precondition("empty switch schedule".into()));
        }
        let mut prev = 0.0;
        let mut starts = vec![false; n_branches];
        for (idx, e) in self.events.iter().enumerate() {
            if idx == 0 && e.time != 0.0 {
                return Err(CoreError::Precondition(
                    "first schedule event must be at t = 0".into(),
                ));
            }
            if e.time < prev {
                return Err(CoreError::Precondition(
                    "schedule events must be time-ordered".into(),
                ));
            }
            prev = e.time;
            if e.branch >= n_branches {
                return Err(CoreError::Precondition(format!(
                    "schedule references branch {} of a {}-branch network",
                    e.branch, n_branches
                )));
            }
            if e.time == 0.0 {
                starts[e.branch] = true;
            }
        }
        if let Some(b) = starts.iter().position(|s| !s) {
            return Err(CoreError::Precondition(format!(
                "branch {b} has no phase event at t = 0"
            )));
        }
        Ok(())
    }
}

/// Fixed-step simulation configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Integration step, seconds.
    pub dt: f64,
    /// End time, seconds (quantized up to the dt grid).
    pub t_end: f64,
    /// Supply voltage, volts.
    pub vdd: f64,
    /// Record every n-th grid point.
    pub record_stride: usize,
    /// Pull-up path resistance, ohms.
    pub pullup_resistance: f64,
    /// Pull-up target voltage; defaults to vdd.
    pub pullup_voltage: Option<f64>,
    /// Initial capacitor voltage per branch; defaults to vdd (rail parked
    /// high). Inductor current always starts at zero.
    pub initial_vc: Option<f64>,
    /// Bypass the dt safety ceilings. The ceilings exist so the integrator
    /// stays on its convergence target; runs with this flag set are outside
    /// the validated regime.
    pub allow_unstable_dt: bool,
}

impl SimConfig {
    pub fn new(dt: f64, t_end: f64, vdd: f64) -> Self {
        SimConfig {
            dt,
            t_end,
            vdd,
            record_stride: 1,
            pullup_resistance: 1.0,
            pullup_voltage: None,
            initial_vc: None,
            allow_unstable_dt: false,
        }
    }

    /// Largest dt satisfying the per-tank ceiling t_res/200 across a
    /// network.
    pub fn max_dt_for(network: &SimNetwork) -> f64 {
        network
            .branches
            .iter()
            .map(|b| 1.0 / rlc::resonant_frequency(&b.tank) / 200.0)
            .fold(f64::INFINITY, f64::min)
    }

    fn validate(&self, network: &SimNetwork) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= self.t_end) {
            return Err(CoreError::Config(format!(
                "need 0 < dt <= t_end, got dt = {:e}, t_end = {:e}",
                self.dt, self.t_end
            )));
        }
        if self.record_stride < 1 {
            return Err(CoreError::Config("record_stride must be >= 1".into()));
        }
        if !(self.pullup_resistance > 0.0) {
            return Err(CoreError::Config("pullup_resistance must be > 0".into()));
        }
        if self.allow_unstable_dt {
            return Ok(());
        }
        for b in &network.branches {
            let t_res = 1.0 / rlc::resonant_frequency(&b.tank);
            // Ceiling derived from the oracle-equivalence target.
            if rlc::classify_damping(&b.tank) == Damping::Underdamped
                && self.dt > t_res / 200.0 * (1.0 + 1e-12)
            {
                return Err(CoreError::Config(format!(
                    "dt = {:e} s exceeds t_res/200 = {:e} s for branch '{}' \
                     (set allow_unstable_dt to override)",
                    self.dt,
                    t_res / 200.0,
                    b.name
                )));
            }
            // Stiff-decay stability bounds for the integrator.
            if b.tank.r > 0.0 {
                let dt_max = 0.2 * (2.0 * b.tank.l / b.tank.r);
                if self.dt > dt_max {
                    return Err(CoreError::Config(format!(
                        "dt = {:e} s exceeds the decay stability bound {:e} s \
                         for branch '{}' (set allow_unstable_dt to override)",
                        self.dt, dt_max, b.name
                    )));
                }
            }
            let tau_pu = self.pullup_resistance * b.tank.c;
            if self.dt > 2.5 * tau_pu {
                return Err(CoreError::Config(format!(
                    "dt = {:e} s exceeds 2.5x the pull-up time constant {:e} s \
                     for branch '{}' (set allow_unstable_dt to override)",
                    self.dt, tau_pu, b.name
                )));
            }
        }
        Ok(())
    }
}

/// Sampled quantity kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalKind {
    Voltage,
    Current,
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignalKind::Voltage => f.write_str("voltage"),
            SignalKind::Current => f.write_str("current"),
        }
    }
}

/// A sampled node trace with uniform spacing dt * record_stride.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub node: NodeId,
    pub kind: SignalKind,
    pub samples: Vec<(f64, f64)>,
}

impl Waveform {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// A copy with every value mapped (e.g. rail inversion).
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Waveform {
        Waveform {
            node: self.node,
            kind: self.kind,
            samples: self.samples.iter().map(|&(t, v)| (t, f(v))).collect(),
        }
    }

    /// A copy shifted later in time by `delay`, reassigned to `node`.
    pub fn delayed(&self, delay: f64, node: NodeId) -> Waveform {
        Waveform {
            node,
            kind: self.kind,
            samples: self
                .samples
                .iter()
                .map(|&(t, v)| (t + delay, v))
                .collect(),
        }
    }
}

/// Energy book for one simulation run. `stored` is the net change of tank
/// stored energy over the run, so `supplied == dissipated + stored` up to
/// integration error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyLedger {
    pub supplied: f64,
    pub dissipated: f64,
    pub stored: f64,
}

impl EnergyLedger {
    /// |supplied - dissipated - stored| relative to the run's energy scale.
    pub fn closure_error(&self) -> f64 {
        let scale = self
            .supplied
            .abs()
            .max(self.dissipated.abs())
            .max(self.stored.abs())
            .max(f64::MIN_POSITIVE);
        (self.supplied - self.dissipated - self.stored).abs() / scale
    }

    pub fn is_closed(&self, tol: f64) -> bool {
        self.closure_error() <= tol
    }
}

/// Simulation result: recorded waveforms plus the energy ledger.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub waveforms: Vec<Waveform>,
    pub ledger: EnergyLedger,
    /// Final state per branch.
    pub final_states: Vec<TankState>,
}

impl SimOutput {
    pub fn waveform(&self, node: NodeId, kind: SignalKind) -> Option<&Waveform> {
        self.waveforms
            .iter()
            .find(|w| w.node == node && w.kind == kind)
    }
}

#[derive(Debug, Clone, Copy)]
struct EngState {
    v: f64,
    i: f64,
    e_sup: f64,
    e_dis: f64,
}

struct PhaseDynamics {
    phase: Phase,
    drive: f64,
    r_loop: f64,
    l: f64,
    c: f64,
}

impl PhaseDynamics {
    #[inline]
    fn deriv(&self, s: EngState) -> EngState {
        match self.phase {
            Phase::ResonantDischarge => {
                let di = (self.drive - s.v - self.r_loop * s.i) / self.l;
                EngState {
                    v: s.i / self.c,
                    i: di,
                    e_sup: self.drive * s.i,
                    e_dis: s.i * s.i * self.r_loop,
                }
            }
            Phase::PullUp => {
                let i_pu = (self.drive - s.v) / self.r_loop;
                EngState {
                    v: i_pu / self.c,
                    i: 0.0,
                    e_sup: self.drive * i_pu,
                    e_dis: i_pu * i_pu * self.r_loop,
                }
            }
            Phase::Hold => EngState {
                v: 0.0,
                i: 0.0,
                e_sup: 0.0,
                e_dis: 0.0,
            },
        }
    }

    #[inline]
    fn rk4(&self, s: EngState, h: f64) -> EngState {
        let add = |a: EngState, k: EngState, f: f64| EngState {
            v: a.v + f * k.v,
            i: a.i + f * k.i,
            e_sup: a.e_sup + f * k.e_sup,
            e_dis: a.e_dis + f * k.e_dis,
        };
        let k1 = self.deriv(s);
        let k2 = self.deriv(add(s, k1, 0.5 * h));
        let k3 = self.deriv(add(s, k2, 0.5 * h));
        let k4 = self.deriv(add(s, k3, h));
        EngState {
            v: s.v + h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v),
            i: s.i + h / 6.0 * (k1.i + 2.0 * k2.i + 2.0 * k3.i + k4.i),
            e_sup: s.e_sup + h / 6.0 * (k1.e_sup + 2.0 * k2.e_sup + 2.0 * k3.e_sup + k4.e_sup),
            e_dis: s.e_dis + h / 6.0 * (k1.e_dis + 2.0 * k2.e_dis + 2.0 * k3.e_dis + k4.e_dis),
        }
    }
}

/// Run the switched transient simulation.
///
/// Branches share only the ideal source, so they are advanced independently;
/// simulating jointly or one at a time yields identical waveforms. Identical
/// inputs produce bit-identical outputs.
pub fn simulate(
    network: &SimNetwork,
    schedule: &SwitchSchedule,
    config: &SimConfig,
) -> Result<SimOutput> {
    config.validate(network)?;
    schedule.validate(network.branches.len())?;

    let dt = config.dt;
    let n_steps = (config.t_end / dt - 1e-9).ceil().max(1.0) as u64;
    let v_pu = config.pullup_voltage.unwrap_or(config.vdd);
    let v_discharge = 0.5 * config.vdd;
    let initial_vc = config.initial_vc.unwrap_or(config.vdd);
    let eps = dt * 1e-9;

    let mut waveforms = Vec::with_capacity(network.branches.len() * 2);
    let mut ledger = EnergyLedger::default();
    let mut final_states = Vec::with_capacity(network.branches.len());

    for (b, branch) in network.branches.iter().enumerate() {
        let events: Vec<&SwitchEvent> =
            schedule.events.iter().filter(|e| e.branch == b).collect();
        let tank = branch.tank;
        let n_samples = (n_steps as usize) / config.record_stride + 2;
        let mut volt = Vec::with_capacity(n_samples);
        let mut curr = Vec::with_capacity(n_samples);

        let mut state = EngState {
            v: initial_vc,
            i: 0.0,
            e_sup: 0.0,
            e_dis: 0.0,
        };
        let initial_energy =
            TankState::new(state.v, state.i).stored_energy(&tank);
        let mut phase = Phase::Hold;
        let mut ev = 0usize;

        let apply_due = |t: f64,
                             ev: &mut usize,
                             phase: &mut Phase,
                             state: &mut EngState| {
            while *ev < events.len() && events[*ev].time <= t + eps {
                let new_phase = events[*ev].phase;
                if *phase == Phase::ResonantDischarge
                    && new_phase != Phase::ResonantDischarge
                {
                    // Switch opening dumps residual inductor energy.
                    state.e_dis += 0.5 * tank.l * state.i * state.i;
                    state.i = 0.0;
                }
                if new_phase == Phase::Hold {
                    state.i = 0.0;
                }
                *phase = new_phase;
                *ev += 1;
            }
        };

        for k in 0..=n_steps {
            let t_k = k as f64 * dt;
            apply_due(t_k, &mut ev, &mut phase, &mut state);
            if k % config.record_stride as u64 == 0 {
                volt.push((t_k, state.v));
                curr.push((t_k, state.i));
            }
            if k == n_steps {
                break;
            }
            let t_next = (k + 1) as f64 * dt;
            let mut t = t_k;
            loop {
                let dyn_ = PhaseDynamics {
                    phase,
                    drive: if phase == Phase::PullUp { v_pu } else { v_discharge },
                    r_loop: if phase == Phase::PullUp {
                        config.pullup_resistance
                    } else {
                        tank.r
                    },
                    l: tank.l,
                    c: tank.c,
                };
                let next_ev_time = events
                    .get(ev)
                    .map(|e| e.time)
                    .filter(|&te| te < t_next - eps);
                let target = next_ev_time.unwrap_or(t_next);
                if target > t + eps {
                    state = dyn_.rk4(state, target - t);
                }
                t = target;
                if !(state.v.is_finite() && state.i.is_finite()) {
                    return Err(CoreError::NumericalBlowup {
                        time: t,
                        branch: branch.name.clone(),
                    });
                }
                if next_ev_time.is_none() {
                    break;
                }
                apply_due(t, &mut ev, &mut phase, &mut state);
            }
        }

        let final_state = TankState::new(state.v, state.i);
        ledger.supplied += state.e_sup;
        ledger.dissipated += state.e_dis;
        ledger.stored += final_state.stored_energy(&tank) - initial_energy;
        final_states.push(final_state);

        waveforms.push(Waveform {
            node: branch.rclk,
            kind: SignalKind::Voltage,
            samples: volt,
        });
        waveforms.push(Waveform {
            node: branch.rclk,
            kind: SignalKind::Current,
            samples: curr,
        });
    }

    Ok(SimOutput {
        waveforms,
        ledger,
        final_states,
    })
}

/// Crossing direction for threshold queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingDirection {
    Rising,
    Falling,
}

/// Every crossing of `threshold` in the given direction, linearly
/// interpolated between bracketing samples, in time order.
pub fn crossing_times(
    w: &Waveform,
    threshold: f64,
    direction: CrossingDirection,
) -> Result<Vec<f64>> {
    if w.samples.is_empty() {
        return Err(CoreError::Precondition("empty waveform".into()));
    }
    let mut out = Vec::new();
    for pair in w.samples.windows(2) {
        let ((t0, v0), (t1, v1)) = (pair[0], pair[1]);
        let crossed = match direction {
            CrossingDirection::Rising => v0 < threshold && v1 >= threshold,
            CrossingDirection::Falling => v0 > threshold && v1 <= threshold,
        };
        if crossed {
            out.push(t0 + (threshold - v0) / (v1 - v0) * (t1 - t0));
        }
    }
    Ok(out)
}

/// Trapezoidal Joule integral of i^2 R over a current record.
pub fn dissipated_energy(current: &Waveform, resistance: f64) -> f64 {
    let mut total = 0.0;
    for pair in current.samples.windows(2) {
        let ((t0, i0), (t1, i1)) = (pair[0], pair[1]);
        total += 0.5 * (i0 * i0 + i1 * i1) * resistance * (t1 - t0);
    }
    total
}

pub const WAVEFORM_CSV_SCHEMA: &str = "psrsim.waveform v1";

/// Waveform CSV export: `time_s,node,kind,value` rows in full round-trip
/// float precision.
pub fn waveforms_to_csv(waveforms: &[Waveform], nodes: &NodeTable) -> String {
    let mut out = String::new();
    writeln!(out, "# schema {WAVEFORM_CSV_SCHEMA}").unwrap();
    writeln!(out, "time_s,node,kind,value").unwrap();
    for w in waveforms {
        let name = nodes.name(w.node);
        for &(t, v) in &w.samples {
            writeln!(out, "{t},{name},{},{v}", w.kind).unwrap();
        }
    }
    out
}
