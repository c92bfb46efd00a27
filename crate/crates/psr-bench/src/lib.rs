//! Shared fixtures for the benchmark targets.

use psr_core::calib::Calibration;
use psr_core::elements::{BoosterSpec, FlipFlopKind, PulseGenSpec};
use psr_core::netlist::{self, BranchSpec, SimNetwork, TreeSpec};

/// Paper-shaped eight-branch tree with a +/-20% load spread.
pub fn spread_tree() -> TreeSpec {
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
            ff_groups: vec![(FlipFlopKind::Prff, 4096)],
            explicit_cap: None,
            cap_multiplier: m,
        })
        .collect();
    TreeSpec {
        name: "bench_tree".into(),
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

pub fn elaborated() -> SimNetwork {
    let calib = Calibration::default();
    netlist::elaborate(&spread_tree(), &calib.unit_caps).expect("valid bench tree")
}
