//! Closed-form series-RLC mathematics.
//!
//! Resonant frequency, quality factor, free-swing energy-recycling voltages,
//! pulse width, and the exact transient solution of a constant-voltage-driven
//! series RLC segment. The segment solution doubles as the oracle for the
//! numerical integrator in `transient`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// A series-RLC tank. `r` is the lumped series resistance of switch, wiring,
/// and inductor; no decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RlcTank {
    /// Inductance in henries.
    pub l: f64,
    /// Capacitance in farads.
    pub c: f64,
    /// Lumped series resistance in ohms.
    pub r: f64,
}

impl RlcTank {
    pub fn new(l: f64, c: f64, r: f64) -> Result<Self> {
        if !(l > 0.0) {
            return Err(CoreError::validation("inductance", "must be > 0"));
        }
        if !(c > 0.0) {
            return Err(CoreError::validation("capacitance", "must be > 0"));
        }
        if !(r >= 0.0) {
            return Err(CoreError::validation("resistance", "must be >= 0"));
        }
        Ok(RlcTank { l, c, r })
    }
}

/// Damping regime of a second-order tank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Damping {
    Underdamped,
    Critical,
    Overdamped,
}

/// Derived per-tank metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TankMetrics {
    /// Resonant frequency 1/(2*pi*sqrt(LC)) in Hz.
    pub f_res: f64,
    /// Resonant period 1/f_res in seconds.
    pub t_res: f64,
    /// Quality factor sqrt(L/(C*R^2)); `f64::INFINITY` when R == 0.
    pub q: f64,
    pub damping: Damping,
}

/// Free-swing output levels from energy recycling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwingResult {
    /// Resonant high output V_OH in volts.
    pub v_oh: f64,
    /// Resonant low output V_OL in volts.
    pub v_ol: f64,
    /// v_oh - v_ol.
    pub swing: f64,
}

/// Instantaneous tank state: capacitor voltage and inductor current.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TankState {
    /// Capacitor voltage in volts.
    pub v_c: f64,
    /// Inductor current in amperes.
    pub i_l: f64,
}

impl TankState {
    pub const ZERO: TankState = TankState { v_c: 0.0, i_l: 0.0 };

    pub fn new(v_c: f64, i_l: f64) -> Self {
        TankState { v_c, i_l }
    }

    pub fn is_finite(&self) -> bool {
        self.v_c.is_finite() && self.i_l.is_finite()
    }

    /// Stored energy 0.5*C*v^2 + 0.5*L*i^2 for the given tank.
    pub fn stored_energy(&self, tank: &RlcTank) -> f64 {
        0.5 * tank.c * self.v_c * self.v_c + 0.5 * tank.l * self.i_l * self.i_l
    }
}

/// Resonant frequency 1/(2*pi*sqrt(LC)). Independent of R.
pub fn resonant_frequency(tank: &RlcTank) -> f64 {
    1.0 / (2.0 * PI * (tank.l * tank.c).sqrt())
}

/// Quality factor sqrt(L/(C*R^2)). R == 0 yields the infinite-Q marker
/// `f64::INFINITY` rather than a crash; `free_swing` treats it as the limit.
pub fn quality_factor(tank: &RlcTank) -> f64 {
    if tank.r == 0.0 {
        f64::INFINITY
    } else {
        (tank.l / (tank.c * tank.r * tank.r)).sqrt()
    }
}

/// Free-swing output levels for a tank of quality factor `q`:
/// v_oh = (vdd/2)(1 + e^(-pi/q)), v_ol = (vdd/2)(1 - e^(-pi/2q)).
/// Accepts the infinite-Q marker, where both exponentials become 1.
pub fn free_swing(vdd: f64, q: f64) -> SwingResult {
    // exp(-pi/inf) == exp(-0) == 1, so the marker needs no special case.
    let v_oh = 0.5 * vdd * (1.0 + (-PI / q).exp());
    let v_ol = 0.5 * vdd * (1.0 - (-PI / (2.0 * q)).exp());
    SwingResult {
        v_oh,
        v_ol,
        swing: v_oh - v_ol,
    }
}

/// Pulse width of a series tank: pi*sqrt(LC), half the resonant period.
pub fn pulse_width(l: f64, c: f64) -> f64 {
    PI * (l * c).sqrt()
}

/// Standard second-order criterion: underdamped iff R^2 < 4L/C, critical when
/// equal within relative 1e-12.
pub fn classify_damping(tank: &RlcTank) -> Damping {
    let r2 = tank.r * tank.r;
    let crit = 4.0 * tank.l / tank.c;
    if (r2 - crit).abs() <= 1e-12 * crit {
        Damping::Critical
    } else if r2 < crit {
        Damping::Underdamped
    } else {
        Damping::Overdamped
    }
}

/// All derived metrics for a tank.
pub fn metrics(tank: &RlcTank) -> TankMetrics {
    let f_res = resonant_frequency(tank);
    TankMetrics {
        f_res,
        t_res: 1.0 / f_res,
        q: quality_factor(tank),
        damping: classify_damping(tank),
    }
}

/// Exact state of a constant-voltage-driven series RLC at time `t`.
///
/// Solves L*di/dt + R*i + v_c = drive with i = C*dv_c/dt. Writing
/// u = v_c - drive gives u'' + 2a*u' + w0^2*u = 0 with a = R/2L,
/// w0^2 = 1/LC; underdamped solutions oscillate at wd = sqrt(w0^2 - a^2):
///
///   v_c(t) = drive + e^(-a t) (A cos wd t + B sin wd t)
///   i_l(t) = C e^(-a t) ((wd B - a A) cos wd t - (a B + wd A) sin wd t)
///
/// with A = v_c(0) - drive and B = (i_l(0)/C + a A)/wd.
///
/// Only the underdamped regime is supported; the resonant architecture is
/// meaningless outside it, and the numerical engine still covers the rest.
pub fn segment_solution(
    tank: &RlcTank,
    initial: TankState,
    drive: f64,
    t: f64,
) -> Result<TankState> {
    if classify_damping(tank) != Damping::Underdamped {
        return Err(CoreError::UnsupportedRegime(format!(
            "segment_solution requires an underdamped tank (R^2 < 4L/C); \
             got L={:e} H, C={:e} F, R={:e} ohm",
            tank.l, tank.c, tank.r
        )));
    }
    if t == 0.0 {
        return Ok(initial);
    }
    let alpha = tank.r / (2.0 * tank.l);
    let w0_sq = 1.0 / (tank.l * tank.c);
    let wd = (w0_sq - alpha * alpha).sqrt();

    let a = initial.v_c - drive;
    let b = (initial.i_l / tank.c + alpha * a) / wd;

    let decay = (-alpha * t).exp();
    let (sin, cos) = (wd * t).sin_cos();

    let v_c = drive + decay * (a * cos + b * sin);
    let i_l = tank.c * decay * ((wd * b - alpha * a) * cos - (alpha * b + wd * a) * sin);
    Ok(TankState { v_c, i_l })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_relative_eq, relative_eq};
    use proptest::prelude::*;

    fn tank(l: f64, c: f64, r: f64) -> RlcTank {
        RlcTank::new(l, c, r).unwrap()
    }

    #[test]
    fn resonant_frequency_reference_values() {
        // 1/(2*pi*sqrt(1e-9 * 1e-12)) = 5.0329 GHz
        let f = resonant_frequency(&tank(1e-9, 1e-12, 0.0));
        assert_relative_eq!(f, 5.0329e9, max_relative = 1e-4);

        // Inverse of the inductor-matching example: 1.013 nH, 1 pF -> 5.000 GHz
        let f = resonant_frequency(&tank(1.013e-9, 1e-12, 0.0));
        assert_relative_eq!(f, 5.000e9, max_relative = 2e-4);
    }

    #[test]
    fn resonant_frequency_sqrt_scaling() {
        let base = resonant_frequency(&tank(1e-9, 1e-12, 0.0));
        let scaled = resonant_frequency(&tank(4e-9, 1e-12, 0.0));
        assert_relative_eq!(scaled, base / 2.0, max_relative = 1e-12);
        // Independent of R.
        assert_eq!(
            resonant_frequency(&tank(1e-9, 1e-12, 50.0)),
            resonant_frequency(&tank(1e-9, 1e-12, 0.0))
        );
    }

    #[test]
    fn quality_factor_reference_values() {
        assert_relative_eq!(
            quality_factor(&tank(1e-9, 1e-12, 10.0)),
            10f64.sqrt(),
            max_relative = 1e-12
        );
        // sqrt(4e-9 / (1e-12 * 400)) = 3.1623
        assert_relative_eq!(
            quality_factor(&tank(4e-9, 1e-12, 20.0)),
            10f64.sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn quality_factor_halves_when_r_doubles() {
        let q1 = quality_factor(&tank(1e-9, 1e-12, 7.0));
        let q2 = quality_factor(&tank(1e-9, 1e-12, 14.0));
        assert_relative_eq!(q2, q1 / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn quality_factor_infinite_marker() {
        assert!(quality_factor(&tank(1e-9, 1e-12, 0.0)).is_infinite());
    }

    #[test]
    fn free_swing_infinite_q_is_full_rail() {
        let s = free_swing(0.8, f64::INFINITY);
        assert_eq!(s.v_oh, 0.8);
        assert_eq!(s.v_ol, 0.0);
        assert_eq!(s.swing, 0.8);
    }

    #[test]
    fn free_swing_at_q_pi() {
        // v_oh = 0.4(1+e^-1), v_ol = 0.4(1-e^-0.5)
        let s = free_swing(0.8, PI);
        assert_relative_eq!(s.v_oh, 0.4 * (1.0 + (-1f64).exp()), max_relative = 1e-15);
        assert_relative_eq!(s.v_ol, 0.4 * (1.0 - (-0.5f64).exp()), max_relative = 1e-15);
        assert_relative_eq!(s.v_oh, 0.54716, max_relative = 1e-4);
        assert_relative_eq!(s.v_ol, 0.15739, max_relative = 1e-4);
        assert_relative_eq!(s.swing, 0.38977, max_relative = 1e-4);
    }

    #[test]
    fn free_swing_at_q_one() {
        // swing = 0.4 * (e^-pi + e^-pi/2) = 0.100437
        let s = free_swing(0.8, 1.0);
        let expected = 0.4 * ((-PI).exp() + (-PI / 2.0).exp());
        assert_relative_eq!(s.swing, expected, max_relative = 1e-15);
        assert_relative_eq!(s.swing, 0.10044, max_relative = 1e-4);
    }

    #[test]
    fn pulse_width_reference_values() {
        assert_relative_eq!(pulse_width(1e-9, 1e-12), 99.346e-12, max_relative = 1e-4);
        assert_relative_eq!(pulse_width(1.013e-9, 1e-12), 100.0e-12, max_relative = 2e-4);
        // Quadrupling C doubles the width.
        assert_relative_eq!(
            pulse_width(1e-9, 4e-12),
            2.0 * pulse_width(1e-9, 1e-12),
            max_relative = 1e-12
        );
    }

    #[test]
    fn damping_classification() {
        assert_eq!(classify_damping(&tank(1e-9, 1e-12, 0.0)), Damping::Underdamped);
        // R = 2*sqrt(L/C) = 63.2456 ohm exactly critical
        let r_crit = 2.0 * (1e-9f64 / 1e-12).sqrt();
        assert_eq!(
            classify_damping(&tank(1e-9, 1e-12, r_crit)),
            Damping::Critical
        );
        assert_eq!(
            classify_damping(&tank(1e-9, 1e-12, 100.0)),
            Damping::Overdamped
        );
    }

    #[test]
    fn segment_solution_identity_at_t_zero() {
        let t = tank(1e-9, 1e-12, 10.0);
        let s0 = TankState::new(0.37, -1.2e-3);
        assert_eq!(segment_solution(&t, s0, 0.4, 0.0).unwrap(), s0);
    }

    #[test]
    fn segment_solution_lossless_cosine() {
        // R=0, v_c(0)=vdd, i_l(0)=0, drive 0: v_c(t) = vdd*cos(2 pi f t).
        let t = tank(1e-9, 1e-12, 0.0);
        let m = metrics(&t);
        let s = segment_solution(&t, TankState::new(0.8, 0.0), 0.0, m.t_res / 4.0).unwrap();
        assert!(s.v_c.abs() < 1e-12, "v_c at quarter period = {}", s.v_c);
        // And full period returns to the start.
        let s = segment_solution(&t, TankState::new(0.8, 0.0), 0.0, m.t_res).unwrap();
        assert_relative_eq!(s.v_c, 0.8, max_relative = 1e-9);
    }

    #[test]
    fn segment_solution_rejects_overdamped() {
        let t = tank(1e-9, 1e-12, 100.0);
        let err = segment_solution(&t, TankState::ZERO, 0.4, 1e-12).unwrap_err();
        assert!(matches!(err, CoreError::UnsupportedRegime(_)));
    }

    /// Brute-force RK4 at dt = t_res/1e5, built before (and independent of)
    /// the main engine, checking the closed form within 1e-6 relative.
    #[test]
    fn segment_solution_matches_fine_step_integration() {
        let tk = tank(1e-9, 1e-12, 10.0);
        let m = metrics(&tk);
        let drive = 0.4; // vdd/2 for vdd = 0.8
        let dt = m.t_res / 1e5;
        let mut state = TankState::ZERO;
        let mut t = 0.0;
        let steps_per_sample = 100_000 / 64;
        let scale = 0.4; // response magnitude, for relative comparison

        for _ in 0..64 {
            for _ in 0..steps_per_sample {
                state = rk4_step(&tk, state, drive, dt);
                t += dt;
            }
            let exact = segment_solution(&tk, TankState::ZERO, drive, t).unwrap();
            assert!(
                (state.v_c - exact.v_c).abs() / scale < 1e-6,
                "t={t:e}: rk4 {} vs exact {}",
                state.v_c,
                exact.v_c
            );
        }
    }

    fn rk4_step(tank: &RlcTank, s: TankState, drive: f64, dt: f64) -> TankState {
        let f = |s: TankState| {
            TankState::new(
                s.i_l / tank.c,
                (drive - s.v_c - tank.r * s.i_l) / tank.l,
            )
        };
        let k1 = f(s);
        let k2 = f(TankState::new(
            s.v_c + 0.5 * dt * k1.v_c,
            s.i_l + 0.5 * dt * k1.i_l,
        ));
        let k3 = f(TankState::new(
            s.v_c + 0.5 * dt * k2.v_c,
            s.i_l + 0.5 * dt * k2.i_l,
        ));
        let k4 = f(TankState::new(s.v_c + dt * k3.v_c, s.i_l + dt * k3.i_l));
        TankState::new(
            s.v_c + dt / 6.0 * (k1.v_c + 2.0 * k2.v_c + 2.0 * k3.v_c + k4.v_c),
            s.i_l + dt / 6.0 * (k1.i_l + 2.0 * k2.i_l + 2.0 * k3.i_l + k4.i_l),
        )
    }

    #[test]
    fn lossless_segment_conserves_energy_over_ten_periods() {
        let tk = tank(1e-9, 1e-12, 0.0);
        let m = metrics(&tk);
        let s0 = TankState::new(0.8, 0.0);
        let e0 = s0.stored_energy(&tk);
        for k in 1..=100 {
            let t = k as f64 * m.t_res / 10.0;
            let s = segment_solution(&tk, s0, 0.0, t).unwrap();
            let drift = (s.stored_energy(&tk) - e0).abs() / e0;
            assert!(drift < 1e-9, "energy drift {drift:e} at t={t:e}");
        }
    }

    #[test]
    fn swing_limit_at_large_q() {
        let s = free_swing(0.8, 1e6);
        assert!((0.8 - s.swing).abs() < 1e-5 * 0.8);
    }

    proptest! {
        /// Half-period law: pulse_width * 2 * f_res == 1.
        #[test]
        fn half_period_law(l in 1e-12f64..1e-6, c in 1e-15f64..1e-9) {
            let t = tank(l, c, 0.0);
            let product = pulse_width(l, c) * 2.0 * resonant_frequency(&t);
            prop_assert!((product - 1.0).abs() < 1e-12);
        }

        /// Swing strictly increases with q; v_ol strictly decreases; both
        /// bounded in [0, vdd].
        #[test]
        fn swing_monotone_in_q(q in 0.1f64..1e4, factor in 1.001f64..10.0) {
            let vdd = 0.8;
            let lo = free_swing(vdd, q);
            let hi = free_swing(vdd, q * factor);
            prop_assert!(hi.swing > lo.swing);
            prop_assert!(hi.v_ol < lo.v_ol);
            for s in [lo, hi] {
                prop_assert!(s.v_ol >= 0.0 && s.v_ol <= s.v_oh && s.v_oh <= vdd);
                prop_assert!((s.swing - (s.v_oh - s.v_ol)).abs() < 1e-15);
            }
        }

        /// Multiplying L and dividing C by the same factor keeps f_res and
        /// scales q by that factor.
        #[test]
        fn scale_invariance(
            l in 1e-12f64..1e-6,
            c in 1e-15f64..1e-9,
            r in 0.01f64..100.0,
            k in 0.1f64..10.0,
        ) {
            let base = tank(l, c, r);
            let scaled = tank(l * k, c / k, r);
            prop_assert!(relative_eq!(
                resonant_frequency(&base),
                resonant_frequency(&scaled),
                max_relative = 1e-9
            ));
            prop_assert!(relative_eq!(
                quality_factor(&scaled),
                quality_factor(&base) * k,
                max_relative = 1e-9
            ));
        }
    }
}
