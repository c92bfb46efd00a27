//! Skew reduction by inductor matching.
//!
//! The closed-form match sets L_i = 1/((2 pi f_target)^2 C_i) so every
//! branch tank resonates at the same frequency; the optional refinement loop
//! compensates second-order effects the closed form ignores (pull-up
//! resistance, damping-induced frequency shift) by a derivative-free
//! coordinate search on measured skew.

use std::fmt::Write as _;

use crate::analysis;
use crate::calib::Calibration;
use crate::error::{CoreError, Result};
use crate::netlist::SimNetwork;
use crate::pipeline::{self, TreeRunOptions};
use crate::rlc;
use crate::transient::SimConfig;
use crate::units::format_canonical;

pub const TUNING_REPORT_VERSION: u32 = 1;

/// Outcome of a tuning pass.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningResult {
    /// Per-branch inductances, henries.
    pub inductances: Vec<f64>,
    /// Matching target, hertz.
    pub f_target: f64,
    /// Relative spread of achieved resonant frequencies: (max - min) / target.
    pub f_res_spread: f64,
    pub skew_before: f64,
    pub skew_after: f64,
    /// False when the refinement budget ran out while still improving.
    pub converged: bool,
}

/// Closed-form inductor matching: L_i = 1/((2 pi f_target)^2 C_i), making
/// resonant_frequency(L_i, C_i) == f_target for every branch.
pub fn match_inductors(branch_caps: &[f64], f_target: f64) -> Vec<f64> {
    let w = 2.0 * std::f64::consts::PI * f_target;
    branch_caps.iter().map(|&c| 1.0 / (w * w * c)).collect()
}

/// Measured leaf arrivals (branch order) of a network at its own source
/// clock (effective rate 2x source_freq), on an optionally pinned dt grid.
fn measured_arrivals(
    network: &SimNetwork,
    calib: &Calibration,
    dt: Option<f64>,
) -> Result<Vec<f64>> {
    let f_eff = 2.0 * network.source_freq;
    let run = pipeline::run_tree_with_dt(
        network,
        f_eff,
        calib,
        &TreeRunOptions::default(),
        dt,
    )?;
    let report = analysis::measure_skew(
        &run.leaves,
        &network.nodes,
        network.vdd / 2.0,
        run.window,
    )?;
    Ok(report.arrivals.into_iter().map(|(_, t)| t).collect())
}

fn skew_of(arrivals: &[f64]) -> f64 {
    let max = arrivals.iter().cloned().fold(f64::MIN, f64::max);
    let min = arrivals.iter().cloned().fold(f64::MAX, f64::min);
    max - min
}

/// Total absolute misalignment against the mean arrival; the tie-break
/// objective that lets tied extremes move off a minimax plateau one branch
/// at a time.
fn misalignment_of(arrivals: &[f64]) -> f64 {
    let mean = arrivals.iter().sum::<f64>() / arrivals.len() as f64;
    arrivals.iter().map(|a| (a - mean).abs()).sum()
}

fn measured_skew(network: &SimNetwork, calib: &Calibration, dt: Option<f64>) -> Result<f64> {
    Ok(skew_of(&measured_arrivals(network, calib, dt)?))
}

/// Coordinate-wise bracketed search on each branch inductance minimizing
/// measured skew. Never returns a result worse than the initial point;
/// deterministic. `budget` caps objective evaluations per branch
/// (default 50 in the CLI).
pub fn refine_by_simulation(
    network: &SimNetwork,
    initial_l: &[f64],
    config: &SimConfig,
    calib: &Calibration,
    budget: u32,
) -> Result<TuningResult> {
    if initial_l.len() != network.branches.len() {
        return Err(CoreError::Precondition(format!(
            "{} inductances for a {}-branch network",
            initial_l.len(),
            network.branches.len()
        )));
    }
    let base = pipeline::with_inductances(network, initial_l);
    for b in &base.branches {
        if rlc::classify_damping(&b.tank) != rlc::Damping::Underdamped {
            return Err(CoreError::Precondition(format!(
                "branch '{}' is not underdamped at the initial inductance",
                b.name
            )));
        }
    }

    // One shared grid for every candidate evaluation, with headroom for the
    // search range pushing f_res up.
    let dt = SimConfig::max_dt_for(&base) / 1.3;
    let _ = config; // dt/vdd baseline comes from the network and calibration

    let mut best_l = initial_l.to_vec();
    let mut best_arrivals = measured_arrivals(&base, calib, Some(dt))?;
    let mut best_skew = skew_of(&best_arrivals);
    let mut best_misalign = misalignment_of(&best_arrivals);
    let skew_before = best_skew;
    let n = best_l.len();

    // Skew is a max-min objective with flat regions per coordinate, so each
    // 1-D bracketed search minimizes the branch's arrival misalignment
    // against the midpoint of the other branches (unimodal in L).
    // Acceptance is lexicographic: skew strictly first, total misalignment
    // as the tie-break within float-equal skew, so tied extremes can leave a
    // plateau one branch at a time while skew stays non-increasing.
    let evals_per_round = 10u32;
    let rounds = (budget / evals_per_round).max(1);
    let mut converged = true;
    let phi = (5f64.sqrt() - 1.0) / 2.0;

    for round in 0..rounds {
        let width = 0.15 * 0.25f64.powi(round.min(8) as i32);
        let mut round_improved = false;
        for b in 0..n {
            if n < 2 {
                break;
            }
            let others_mid = {
                let others: Vec<f64> = best_arrivals
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != b)
                    .map(|(_, &a)| a)
                    .collect();
                0.5 * (others.iter().cloned().fold(f64::MIN, f64::max)
                    + others.iter().cloned().fold(f64::MAX, f64::min))
            };
            let center = best_l[b];
            let mut lo = center * (1.0 - width);
            let mut hi = center * (1.0 + width);

            // Each evaluation yields both the alignment metric and the full
            // arrival vector; the lexicographically best candidate wins.
            let mut coord_best: Option<(f64, f64, f64, Vec<f64>)> = None;
            let mut eval = |l: f64, best_l: &[f64]| -> Result<f64> {
                let mut candidate_l = best_l.to_vec();
                candidate_l[b] = l;
                let arr = measured_arrivals(
                    &pipeline::with_inductances(network, &candidate_l),
                    calib,
                    Some(dt),
                )?;
                let skew = skew_of(&arr);
                let mis = misalignment_of(&arr);
                let better = coord_best.as_ref().map_or(true, |&(_, s, m, _)| {
                    skew < s || (skew == s && mis < m)
                });
                if better {
                    coord_best = Some((l, skew, mis, arr.clone()));
                }
                Ok((arr[b] - others_mid).abs())
            };

            let mut x1 = hi - phi * (hi - lo);
            let mut x2 = lo + phi * (hi - lo);
            let mut f1 = eval(x1, &best_l)?;
            let mut f2 = eval(x2, &best_l)?;
            for _ in 0..(evals_per_round - 2) {
                if f1 <= f2 {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - phi * (hi - lo);
                    f1 = eval(x1, &best_l)?;
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + phi * (hi - lo);
                    f2 = eval(x2, &best_l)?;
                }
            }
            if let Some((cand_l, cand_skew, cand_mis, cand_arrivals)) = coord_best {
                if cand_skew < best_skew || (cand_skew == best_skew && cand_mis < best_misalign) {
                    if best_skew - cand_skew > (1e-3 * best_skew).max(1e-16)
                        || best_misalign - cand_mis > (1e-3 * best_misalign).max(1e-16)
                    {
                        round_improved = true;
                    }
                    best_skew = cand_skew;
                    best_misalign = cand_mis;
                    best_l[b] = cand_l;
                    best_arrivals = cand_arrivals;
                }
            }
        }
        if round + 1 == rounds && round_improved {
            converged = false;
        }
        if !round_improved {
            break;
        }
    }

    let tuned = pipeline::with_inductances(network, &best_l);
    Ok(TuningResult {
        f_res_spread: f_res_spread(&tuned),
        inductances: best_l,
        f_target: mean_f_res(&tuned),
        skew_before,
        skew_after: best_skew,
        converged,
    })
}

/// Skew measured at each clock frequency with the same tuned inductors.
/// Frequencies are effective register clock rates and must not exceed the
/// tuned resonant frequency.
pub fn wideband_skew_profile(
    network: &SimNetwork,
    tuned_l: &[f64],
    clock_freqs: &[f64],
    config: &SimConfig,
    calib: &Calibration,
) -> Result<Vec<(f64, f64)>> {
    let tuned = pipeline::with_inductances(network, tuned_l);
    let f_limit = tuned
        .branches
        .iter()
        .map(|b| rlc::resonant_frequency(&b.tank))
        .fold(f64::INFINITY, f64::min);
    let _ = config;
    let mut out = Vec::with_capacity(clock_freqs.len());
    for &f in clock_freqs {
        if f > f_limit * (1.0 + 1e-9) {
            return Err(CoreError::Precondition(format!(
                "clock frequency {f:e} Hz exceeds the tuned resonant frequency {f_limit:e} Hz"
            )));
        }
        let run = pipeline::run_tree(&tuned, f, calib, &TreeRunOptions::default())?;
        let report = analysis::measure_skew(
            &run.leaves,
            &tuned.nodes,
            tuned.vdd / 2.0,
            run.window,
        )?;
        out.push((f, report.skew));
    }
    Ok(out)
}

/// Full tuning pass: closed-form match at `f_target`, optional refinement,
/// and before/after skew against the documented untuned baseline (a single
/// shared inductor equal to the mean matched value).
pub fn tune_network(
    network: &SimNetwork,
    f_target: f64,
    refine_budget: Option<u32>,
    config: &SimConfig,
    calib: &Calibration,
) -> Result<TuningResult> {
    let caps: Vec<f64> = network.branches.iter().map(|b| b.tank.c).collect();
    let matched = match_inductors(&caps, f_target);
    let mean_l = matched.iter().sum::<f64>() / matched.len() as f64;
    let baseline = pipeline::with_inductances(network, &vec![mean_l; matched.len()]);
    for b in &baseline.branches {
        if rlc::classify_damping(&b.tank) != rlc::Damping::Underdamped {
            return Err(CoreError::Precondition(format!(
                "branch '{}' is overdamped at the matched inductance; reduce its resistance",
                b.name
            )));
        }
    }
    let skew_before = measured_skew(&baseline, calib, None)?;

    if let Some(budget) = refine_budget {
        let mut result = refine_by_simulation(network, &matched, config, calib, budget)?;
        result.skew_before = skew_before.max(result.skew_after);
        result.f_target = f_target;
        Ok(result)
    } else {
        let tuned = pipeline::with_inductances(network, &matched);
        let skew_after = measured_skew(&tuned, calib, None)?;
        Ok(TuningResult {
            f_res_spread: f_res_spread(&tuned),
            inductances: matched,
            f_target,
            skew_before: skew_before.max(skew_after),
            skew_after,
            converged: true,
        })
    }
}

fn mean_f_res(network: &SimNetwork) -> f64 {
    let sum: f64 = network
        .branches
        .iter()
        .map(|b| rlc::resonant_frequency(&b.tank))
        .sum();
    sum / network.branches.len() as f64
}

fn f_res_spread(network: &SimNetwork) -> f64 {
    let freqs: Vec<f64> = network
        .branches
        .iter()
        .map(|b| rlc::resonant_frequency(&b.tank))
        .collect();
    let max = freqs.iter().cloned().fold(f64::MIN, f64::max);
    let min = freqs.iter().cloned().fold(f64::MAX, f64::min);
    (max - min) / mean_f_res(network)
}

/// Structured-text tuning report: per-branch C, matched L, achieved f_res,
/// and skew before/after.
pub fn tuning_report_text(result: &TuningResult, network: &SimNetwork) -> String {
    let mut out = String::new();
    let e = format_canonical;
    writeln!(out, "tuning_report v{TUNING_REPORT_VERSION}").unwrap();
    writeln!(out, "f_target {}", e(result.f_target)).unwrap();
    writeln!(out, "f_res_spread {}", e(result.f_res_spread)).unwrap();
    writeln!(out, "skew_before {}", e(result.skew_before)).unwrap();
    writeln!(out, "skew_after {}", e(result.skew_after)).unwrap();
    writeln!(out, "converged {}", result.converged).unwrap();
    for (branch, &l) in network.branches.iter().zip(&result.inductances) {
        let f_res = rlc::resonant_frequency(&rlc::RlcTank {
            l,
            c: branch.tank.c,
            r: branch.tank.r,
        });
        writeln!(
            out,
            "branch {} cap {} inductance {} f_res {}",
            branch.name,
            e(branch.tank.c),
            e(l),
            e(f_res)
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn match_inductors_reference_values() {
        // C = 1 pF at 5 GHz -> 1.0132 nH.
        let l = match_inductors(&[1e-12], 5e9);
        assert_relative_eq!(l[0], 1.0132e-9, max_relative = 1e-4);

        // (0.8, 1.0, 1.2) pF at 5 GHz.
        let l = match_inductors(&[0.8e-12, 1e-12, 1.2e-12], 5e9);
        assert_relative_eq!(l[0], 1.2665e-9, max_relative = 1e-4);
        assert_relative_eq!(l[1], 1.0132e-9, max_relative = 1e-4);
        assert_relative_eq!(l[2], 0.8443e-9, max_relative = 1e-4);
    }

    #[test]
    fn equal_caps_give_equal_inductors() {
        let l = match_inductors(&[2e-12; 5], 3e9);
        assert!(l.iter().all(|&x| x == l[0]));
    }

    #[test]
    fn matching_exactness_and_product_law() {
        let caps = [0.8e-12, 0.95e-12, 1.1e-12, 1.33e-12];
        let f_target = 5e9;
        let ls = match_inductors(&caps, f_target);
        let p0 = ls[0] * caps[0];
        for (&l, &c) in ls.iter().zip(&caps) {
            let f = rlc::resonant_frequency(&rlc::RlcTank { l, c, r: 0.0 });
            assert!(
                ((f - f_target) / f_target).abs() <= 1e-12,
                "f_res off target by {:e}",
                (f - f_target) / f_target
            );
            // L_i * C_i identical across branches.
            assert_relative_eq!(l * c, p0, max_relative = 1e-15);
        }
    }
}
