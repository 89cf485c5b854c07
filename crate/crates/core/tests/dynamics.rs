//! Integration checks of the drive protocols and longer-time physics.

use ising_ring::evolve::{propagate_driven, DenseState, DrivenOptions};
use ising_ring::hamiltonian::DrivenIsingOp;
use ising_ring::lattice::{ModelParams, SpinConfig};
use ising_ring::mps::{tebd4_evolve, MpsConfig, MpsState};
use ising_ring::observables::{self, bubble_density};
use ising_ring::schedule::{DriveSchedule, ModulatedFlip, Profile, Segment};

fn all_up(n: usize) -> DenseState {
    DenseState::from_config(&SpinConfig::all_up(n).unwrap())
}

#[test]
fn flip_to_n1_resonance_grows_only_single_bubbles() {
    // quench to h_z = -2J at N = 8, h_x = 0.05: λ₁ grows while λ₂ stays
    // below 1e-4 over the pause (its only source is virtual dressing)
    let n = 8;
    let p = ModelParams::new(n, 1.0, 0.05, -2.0).unwrap();
    let h = ising_ring::hamiltonian::build_full(&p).unwrap();
    let mut psi = all_up(n);
    let mut max_l1 = 0.0f64;
    let mut max_l2 = 0.0f64;
    for _ in 0..20 {
        psi = ising_ring::evolve::propagate(&psi, &h, 0.25).unwrap();
        max_l1 = max_l1.max(bubble_density(&psi, 1).unwrap());
        max_l2 = max_l2.max(bubble_density(&psi, 2).unwrap());
    }
    assert!(max_l1 > 4e-2, "λ₁ stayed at {max_l1:.3e}");
    assert!(max_l2 < 1e-4, "λ₂ grew to {max_l2:.3e}");
}

#[test]
fn decay_protocol_with_ringing_flip_runs_end_to_end() {
    // the full four-segment protocol with a modulated flip; the ringing
    // repeatedly crosses the resonance and keeps creating bubbles
    let n = 8;
    let p = ModelParams::new(n, 1.0, 0.04, -2.0).unwrap();
    let op = DrivenIsingOp::new(&p).unwrap();
    let flip = ModulatedFlip::with_crossing_scale(-2.0, 1.5, 0.3, 0.6, 0.8).unwrap();
    let schedule = DriveSchedule::decay_protocol(15.0, 40.0, 4.0, p.h_x, 1.0, flip).unwrap();
    let opts = DrivenOptions::default();
    let mut final_m = 1.0;
    let out = propagate_driven(&all_up(n), &schedule, &op, 0.05, 2.0, &opts, |_, state| {
        final_m = observables::magnetization(state);
    })
    .unwrap();
    assert!(out.resolution_warning.is_none());
    assert!((out.state.norm() - 1.0).abs() < 1e-9);
    assert!(final_m < 0.999, "no dynamics happened: M = {final_m}");
    // measurement ramp turned the drive off; the final fields hold
    let (h_x_end, h_z_end) = schedule.sample(schedule.total_duration());
    assert_eq!(h_x_end, 0.0);
    assert!((h_z_end - (-2.0)).abs() < 0.3 * 0.02); // settled modulation
}

#[test]
fn two_bubble_front_moves_ballistically_at_small_n() {
    // scaled-down exchange scenario: the interface spreads and the early
    // front position grows roughly linearly
    let p = ModelParams::new(12, 1.0, 0.04, -1.0).unwrap();
    let traj =
        ising_ring::evolve::quench_two_bubble_scenario(&p, 4, 4, 1200.0, 150.0).unwrap();
    let origin = 4usize;
    let spread = |profile: &Vec<f64>| -> f64 {
        let total: f64 = profile.iter().sum();
        profile
            .iter()
            .enumerate()
            .map(|(j, w)| {
                let d = (j as f64 - origin as f64).abs().min(12.0 - (j as f64 - origin as f64).abs());
                w * d * d
            })
            .sum::<f64>()
            / total
    };
    let spreads: Vec<f64> = traj.interface.iter().map(&spread).collect();
    assert!(spreads[0] < 1e-10);
    let last = *spreads.last().unwrap();
    assert!(last > 0.3, "interface failed to spread: {spreads:?}");
    // early-time growth is sustained (each half of the run advances)
    let mid = spreads[spreads.len() / 2];
    assert!(mid > 0.05 && last > mid, "{spreads:?}");
}

#[test]
fn tebd_energy_drift_stays_small_over_long_runs() {
    // N = 20, χ = 64: relative energy drift below 1e-4 over T = 50
    let n = 20;
    let p = ModelParams::new(n, 1.0, 0.1, -0.35).unwrap();
    let cfg = MpsConfig::new(64, 0.05, 1e-10).unwrap();
    let traj = tebd4_evolve(
        MpsState::product_state(&SpinConfig::all_up(n).unwrap()),
        &p,
        50.0,
        &cfg,
        5.0,
    )
    .unwrap();
    let e0 = traj.records[0].record.energy;
    let scale = e0.abs().max(1.0);
    let drift = traj
        .records
        .iter()
        .map(|r| (r.record.energy - e0).abs())
        .fold(0.0, f64::max)
        / scale;
    assert!(drift < 1e-4, "relative energy drift {drift:.3e}");
    assert!(traj.state.max_bond_dimension() <= 64);
}
