mod support;

use std::f64::consts::PI;

use qdmi_core::qsci::{self, ToyHamiltonian};
use qdmi_stack::cli::default_hamiltonian;
use qdmi_stack::workflow::{
    self, energies_by_k, load_hamiltonian, HandoffRequest, HandoffResponse, QsciResult, Stage, WorkflowConfig,
};
use support::rig::{run_mode, Rig};

/// Ground energy of `-ZZI - IZZ - 0.5 (XII + IXI + IIX)` from LAPACK
/// (`numpy.linalg.eigvalsh`) on the explicit 8×8 matrix.
const TFIM3_GROUND: f64 = -2.403211925911553;

#[test]
fn full_subspace_matches_oracle() {
    let r = run_mode(false, true, |c| c.k = 8);
    assert!((r.energy - TFIM3_GROUND).abs() < 1e-9, "{}", r.energy);
    assert_eq!(r.basis.len(), 8);
}

#[test]
fn energy_is_nested_and_variational() {
    let r = run_mode(false, true, |_| {});
    let h = default_hamiltonian();
    let energies = energies_by_k(&h, &r.counts).unwrap();
    assert!(energies.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{energies:?}");
    assert!(energies.iter().all(|e| *e >= TFIM3_GROUND - 1e-9));
    assert_eq!(energies[3], r.energy);
    assert!((energies[7] - TFIM3_GROUND).abs() < 1e-9);
}

#[test]
fn all_four_modes_agree_bit_for_bit() {
    let runs: Vec<QsciResult> = [(false, false), (false, true), (true, false), (true, true)]
        .into_iter()
        .map(|(o, s)| run_mode(o, s, |_| {}))
        .collect();
    for r in &runs[1..] {
        assert_eq!(r.energy.to_bits(), runs[0].energy.to_bits());
        assert_eq!(r.counts, runs[0].counts);
        assert_eq!(r.params, runs[0].params);
    }
    assert_eq!(runs[0].alias, workflow::HARDWARE_ALIAS);
    assert_eq!(runs[1].alias, workflow::SIMULATOR_ALIAS);
}

#[test]
fn offload_matches_in_process_on_a_spread_distribution() {
    let spread = |c: &mut WorkflowConfig| {
        c.grid = vec![PI / 3.0];
        c.sweeps = 1;
        c.shots = 2000;
    };
    let local = run_mode(false, false, spread);
    let remote = run_mode(true, false, spread);
    assert!(local.counts.len() > 2, "{:?}", local.counts);
    assert_eq!(local.counts, remote.counts);
    assert_eq!(local.energy.to_bits(), remote.energy.to_bits());
}

#[test]
fn handoff_files_carry_circuit_shots_seed_and_counts() {
    let rig = Rig::new(7);
    let mut config = rig.config(true, true);
    config.seed = 99;
    let r = rig.run(&config, &default_hamiltonian()).unwrap();
    let request: HandoffRequest =
        serde_json::from_str(&std::fs::read_to_string(rig.dir.path().join("handoff-request.json")).unwrap()).unwrap();
    assert_eq!((request.shots, request.seed), (4096, 99));
    assert_eq!(request.circuit, qsci::build_ansatz(&r.params, &["QB1", "QB2", "QB3"], &[("QB1", "QB3"), ("QB2", "QB3")]).unwrap());
    let response: HandoffResponse =
        serde_json::from_str(&std::fs::read_to_string(rig.dir.path().join("handoff-response.json")).unwrap()).unwrap();
    assert_eq!(response.counts.values().sum::<u64>(), 4096);
}

#[test]
fn errors_name_their_stage() {
    let rig = Rig::new(3);
    let h = default_hamiltonian();
    let stage = |config: &WorkflowConfig| rig.run(config, &h).unwrap_err().stage;

    let mut c = rig.config(false, true);
    c.k = 9;
    assert_eq!(stage(&c), Stage::Config);

    let mut c = rig.config(false, true);
    c.simulator_alias = "no-such-device".into();
    assert_eq!(stage(&c), Stage::Session);

    let mut c = rig.config(false, true);
    c.simulator_alias = "mock-6q".into();
    let err = rig.run(&c, &h).unwrap_err();
    assert_eq!((err.stage, err.message.as_str()), (Stage::Scan, "ERROR_INVALID_ARGUMENT"));

    let wide = ToyHamiltonian::new(5, vec![(1.0, "ZZZZZ".into())]).unwrap();
    let mut c = rig.config(false, true);
    c.grid = vec![0.0];
    c.sweeps = 1;
    assert!(rig.run(&c, &wide).is_ok());

    std::fs::write(rig.dir.path().join("auth.json"), r#"{"access_token": "revoked"}"#).unwrap();
    let err = rig.run(&rig.config(true, true), &h).unwrap_err();
    assert_eq!(err.stage, Stage::Sample);
    assert!(err.message.contains("credential"), "{}", err.message);
}

#[test]
fn hamiltonian_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.json");
    std::fs::write(&path, r#"{"n": 2, "terms": [[-1.0, "ZZ"], [-0.5, "XI"], [-0.5, "IX"]]}"#).unwrap();
    let h = load_hamiltonian(&path).unwrap();
    assert_eq!(h, ToyHamiltonian::transverse_field_ising(2, 1.0, 0.5).unwrap());
    std::fs::write(&path, r#"{"n": 2, "terms": [[1.0, "ZY"]]}"#).unwrap();
    assert!(load_hamiltonian(&path).is_err());
}
