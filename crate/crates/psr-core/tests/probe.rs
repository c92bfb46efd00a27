//! Scratch probe (temporary): prints the pipeline numbers the acceptance
//! suite will pin down.

use psr_core::analysis::{self, Architecture};
use psr_core::calib::{Calibration, FfTable};
use psr_core::elements::{BoosterSpec, FlipFlopKind, PulseGenSpec};
use psr_core::netlist::{self, BranchSpec, TreeSpec};
use psr_core::pipeline::{self, TreeRunOptions};
use psr_core::transient::SimConfig;
use psr_core::tuning;

fn spread_tree(kind: FlipFlopKind) -> TreeSpec {
    let mults = [0.80, 0.857, 0.914, 0.971, 1.029, 1.086, 1.143, 1.20];
    let branches = mults
        .iter()
        .enumerate()
        .map(|(i, &m)| BranchSpec {
            name: format!("b{i}"),
            inductance: 247.4e-12,
            resistance: 2.59,
            gater_count: 512,
            buffer_count: 1024,
            ff_groups: vec![(kind, 4096)],
            explicit_cap: None,
            cap_multiplier: m,
        })
        .collect();
    TreeSpec {
        name: "probe".into(),
        vdd: 0.8,
        source_freq: 2.5e9,
        pulse_gen: PulseGenSpec {
            l1: 2.533e-10,
            c1: 4e-12,
            booster: BoosterSpec {
                l2: 2.533e-10,
                c2: 4e-12,
                boost_gain: 1.8,
            },
        },
        branches,
        variation: None,
    }
}

#[test]
fn probe_numbers() {
    let calib = Calibration::default();
    let ff = FfTable::default();
    let spec = spread_tree(FlipFlopKind::Prff);
    let net = netlist::elaborate(&spec, &calib.unit_caps).unwrap();
    println!("branch caps: {:?}", net.branches.iter().map(|b| b.tank.c).collect::<Vec<_>>());

    let caps: Vec<f64> = net.branches.iter().map(|b| b.tank.c).collect();
    let matched = tuning::match_inductors(&caps, 5e9);
    let mean_l = matched.iter().sum::<f64>() / 8.0;

    // Untuned baseline skew at 5 GHz effective.
    let untuned = pipeline::with_inductances(&net, &vec![mean_l; 8]);
    let run = pipeline::run_tree(&untuned, 5e9, &calib, &TreeRunOptions::default()).unwrap();
    let skew_untuned =
        analysis::measure_skew(&run.leaves, &untuned.nodes, 0.4, run.window).unwrap();
    println!("untuned skew @5GHz: {:.4e}", skew_untuned.skew);

    // Matched-only skew at each frequency.
    let tuned_net = pipeline::with_inductances(&net, &matched);
    for f in [1e9, 2e9, 3e9, 4e9, 5e9] {
        let run = pipeline::run_tree(&tuned_net, f, &calib, &TreeRunOptions::default()).unwrap();
        let skew = analysis::measure_skew(&run.leaves, &tuned_net.nodes, 0.4, run.window).unwrap();
        println!("matched skew @{:.0e}: {:.4e}", f, skew.skew);
    }

    // Refined skew at several budgets.
    let config = SimConfig::new(SimConfig::max_dt_for(&net), 1e-9, net.vdd);
    for budget in [50, 100, 200] {
        let t0 = std::time::Instant::now();
        let refined =
            tuning::refine_by_simulation(&net, &matched, &config, &calib, budget).unwrap();
        println!(
            "refine budget {budget} took {:?}; skew before {:.4e} after {:.4e} converged {}",
            t0.elapsed(),
            refined.skew_before,
            refined.skew_after,
            refined.converged
        );
    }

    // Conventional skew.
    let conv = analysis::conventional_skew(&net, &calib.stage_delay);
    println!("conventional skew: {:.4e}", conv.skew);

    // Arrival structure at the refined point.
    let refined = tuning::refine_by_simulation(&net, &matched, &config, &calib, 100).unwrap();
    let rnet = pipeline::with_inductances(&net, &refined.inductances);
    let rrun = pipeline::run_tree(&rnet, 5e9, &calib, &TreeRunOptions::default()).unwrap();
    let rep = analysis::measure_skew(&rrun.leaves, &rnet.nodes, 0.4, rrun.window).unwrap();
    for (name, t) in &rep.arrivals {
        println!("  refined arrival {name}: {t:.6e}");
    }
    println!(
        "  refined L ratios vs matched: {:?}",
        refined
            .inductances
            .iter()
            .zip(&matched)
            .map(|(r, m)| r / m)
            .collect::<Vec<_>>()
    );

    // Power table.
    for f in [1e9, 3e9, 5e9] {
        let conv_spec = spread_tree(FlipFlopKind::Psff);
        let conv_net = netlist::elaborate(&conv_spec, &calib.unit_caps).unwrap();
        let pc = analysis::tree_power(&conv_net, f, Architecture::Conventional, &ff, &calib).unwrap();
        print!("f={:.0e} conv(PSFF) {:.3e}", f, pc.total);
        for kind in [FlipFlopKind::Prff, FlipFlopKind::Tspcff, FlipFlopKind::Ff13t] {
            let rspec = spread_tree(kind);
            let rnet = netlist::elaborate(&rspec, &calib.unit_caps).unwrap();
            let rnet = pipeline::with_inductances(&rnet, &matched);
            let pr = analysis::tree_power(&rnet, f, Architecture::Resonant, &ff, &calib).unwrap();
            print!("  res({kind}) {:.3e} save {:.1}%", pr.total, 100.0 * (pc.total - pr.total) / pc.total);
        }
        println!();
    }

    // Energy ledger closure on the tree run.
    println!("ledger closure: {:.3e}", run.output.ledger.closure_error());

    // Wideband with matched inductors.
    let config = SimConfig::new(SimConfig::max_dt_for(&tuned_net), 1e-9, net.vdd);
    let profile =
        tuning::wideband_skew_profile(&net, &matched, &[1e9, 2e9, 3e9, 4e9, 5e9], &config, &calib)
            .unwrap();
    let skews: Vec<f64> = profile.iter().map(|&(_, s)| s).collect();
    let mean = skews.iter().sum::<f64>() / skews.len() as f64;
    let spread = skews.iter().cloned().fold(f64::MIN, f64::max)
        - skews.iter().cloned().fold(f64::MAX, f64::min);
    println!("wideband skews: {skews:?}");
    println!("wideband mean {mean:.4e}, spread {spread:.4e}, ratio {:.3}", spread / mean);
}
