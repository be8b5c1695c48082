//! Cross-module invariants, checked over sampled inputs.

mod common;

use std::sync::Arc;

use mitbench::benchmark::{generate_circuit, sample_filtered_circuits, CircuitClass, CircuitKind};
use mitbench::circuit::{compile, Circuit, Gate, PauliOperator, Target};
use mitbench::mitigation::{
    cdr, cdr_graph, run_estimate, zne, zne_graph, CdrConfig, FoldMode, ZneConfig,
};
use mitbench::oracles::{
    depolarising_noisy_expectation, predicted_zne_poly_error, AnalyticDepolarisingBackend, DepolarisingProfile,
};
use mitbench::sim::{
    evolve_density, ideal_expectation, noisy_expectation, Backend, IdealBackend, NoiseModel, SampledBackend, Thermal,
};
use proptest::prelude::*;

use common::{clifford_t, experiment, filtered_su4, ideal_z, random_pauli, rng};

fn arb_gate(n: usize) -> impl Strategy<Value = Gate> {
    let one = (0..n, 0usize..8, 0.0..std::f64::consts::TAU).prop_map(|(q, k, t)| match k {
        0 => Gate::h(q),
        1 => Gate::sx(q),
        2 => Gate::s(q),
        3 => Gate::t(q),
        4 => Gate::x(q),
        5 => Gate::sdg(q),
        _ => Gate::rz(q, t),
    });
    let two = (0..n, 1..n).prop_map(move |(a, off)| Gate::cx(a, (a + off) % n));
    prop_oneof![3 => one, 1 => two]
}

fn arb_circuit(max_n: usize, max_gates: usize) -> impl Strategy<Value = Circuit> {
    (2..=max_n).prop_flat_map(move |n| {
        proptest::collection::vec(arb_gate(n), 0..=max_gates)
            .prop_map(move |gates| Circuit::from_gates(n, gates).unwrap())
    })
}

fn arb_pauli(n: usize) -> impl Strategy<Value = PauliOperator> {
    any::<u64>().prop_map(move |s| PauliOperator::single(random_pauli(n, &mut rng(s))))
}

fn circuit_and_pauli(max_n: usize, max_gates: usize) -> impl Strategy<Value = (Circuit, PauliOperator)> {
    arb_circuit(max_n, max_gates).prop_flat_map(|c| {
        let n = c.n_qubits;
        (Just(c), arb_pauli(n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn compile_preserves_expectation((c, o) in circuit_and_pauli(4, 20), lagos in any::<bool>()) {
        let target = if lagos { Target::lagos() } else { Target::all_to_all(Target::ibm_native()) };
        let compiled = compile(&c, &target).unwrap();
        let got = ideal_expectation(&compiled.circuit, &o.permuted(&compiled.final_layout)).unwrap();
        let want = ideal_expectation(&c, &o).unwrap();
        prop_assert!((got - want).abs() <= 1e-8, "{got} vs {want}");
    }

    #[test]
    fn ideal_mode_matches_statevector((c, o) in circuit_and_pauli(3, 20)) {
        let a = noisy_expectation(&c, &o, &NoiseModel::ideal()).unwrap();
        let b = ideal_expectation(&c, &o).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn global_depolarising_law((c, o) in circuit_and_pauli(4, 25), p1 in 0.0..0.05f64, p2 in 0.0..0.1f64) {
        let sim = noisy_expectation(&c, &o, &NoiseModel::global(p1, p2)).unwrap();
        let law = depolarising_noisy_expectation(ideal_expectation(&c, &o).unwrap(), &DepolarisingProfile::of(&c, p1, p2));
        prop_assert!((sim - law).abs() <= 1e-10);
    }

    #[test]
    fn density_matrix_stays_physical(c in arb_circuit(3, 15), p1 in 0.0..0.2f64, p2 in 0.0..0.3f64) {
        let nm = NoiseModel::local(p1, p2).with_thermal(Thermal::new(vec![20.0], vec![30.0]));
        let mut worst: (f64, f64) = (0.0, 0.0);
        evolve_density(&c, &nm, |rho| {
            worst.0 = worst.0.min(rho.min_eigenvalue());
            worst.1 = worst.1.max((rho.trace().re - 1.0).abs());
        }).unwrap();
        prop_assert!(worst.0 >= -1e-10 && worst.1 <= 1e-10, "{worst:?}");
    }

    #[test]
    fn mirrored_circuits_are_identity(seed in 0u64..1_000_000, n in 2usize..=5, half in 1usize..=3, gadget in any::<bool>()) {
        let kind = if gadget { CircuitKind::PauliGadget } else { CircuitKind::RandomSu4 };
        let g = generate_circuit(CircuitClass { kind, mirrored: true }, n, 2 * half, seed).unwrap();
        prop_assert!((ideal_z(&g.circuit) - 1.0).abs() <= 1e-10);
        prop_assert_eq!(g.layer_blocks.len(), 2 * half);
    }

    #[test]
    fn unmirrored_layer_count(seed in 0u64..1_000_000, n in 2usize..=5, d in 1usize..=6, gadget in any::<bool>()) {
        let kind = if gadget { CircuitKind::PauliGadget } else { CircuitKind::RandomSu4 };
        let g = generate_circuit(CircuitClass { kind, mirrored: false }, n, d, seed).unwrap();
        prop_assert_eq!(g.layer_blocks.len(), d);
        let expected = if gadget { 1 } else { n / 2 };
        prop_assert!(g.layer_blocks.iter().all(|&b| b == expected));
    }

    #[test]
    fn filtered_circuits_reverify(seed in 0u64..1_000_000, n in 2usize..=3) {
        let o = PauliOperator::global_z(n);
        let class = CircuitClass { kind: CircuitKind::PauliGadget, mirrored: false };
        for g in sample_filtered_circuits(class, n, 2, 3, (0.4, 0.6), &o, seed, 10_000).unwrap() {
            let v = ideal_z(&g.circuit).abs();
            prop_assert!((0.4 - 1e-10..=0.6 + 1e-10).contains(&v), "{v}");
        }
    }

    #[test]
    fn richardson_oracle_matches_engine(target in 0.6..0.995f64, seed in 0u64..50) {
        let c = filtered_su4(2, 2, seed);
        let ideal = ideal_z(&c);
        let p2 = 1.0 - target.powf(1.0 / c.gate_counts().1 as f64);
        let gamma = DepolarisingProfile::of(&c, 0.0, p2).gamma();
        let cfg = ZneConfig { lambdas: vec![1, 3, 5], fit: mitbench::mitigation::FitModel::Richardson, ..ZneConfig::default() };
        let m = zne(&experiment(c, 1000), &cfg, &AnalyticDepolarisingBackend { p1: 0.0, p2 }).unwrap();
        let measured = (m.mitigated - ideal).abs() / (m.noisy - ideal).abs();
        let predicted = predicted_zne_poly_error(gamma, &[1.0, 3.0, 5.0]).unwrap();
        prop_assert!((measured - predicted).abs() <= 1e-8, "{measured} vs {predicted}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn budgets_are_spent_exactly(budget in 1_000u64..50_000, seed in 0u64..1000, random in any::<bool>()) {
        let e = experiment(filtered_su4(2, 2, seed), budget);
        let backend = SampledBackend { noise: NoiseModel::local(1e-3, 1e-2) };
        let folding = if random { FoldMode::RandomGate } else { FoldMode::Circuit };
        let z = zne(&e, &ZneConfig { folding, seed, ..ZneConfig::default() }, &backend).unwrap();
        prop_assert_eq!(z.metadata["shots"].as_u64(), Some(budget));
        let c = cdr(&e, &CdrConfig { seed, ..CdrConfig::default() }, &backend, &IdealBackend).unwrap();
        prop_assert_eq!(c.metadata["shots"].as_u64(), Some(budget));
    }

    #[test]
    fn graphs_reproduce_monolithic_runs(seed in 0u64..1000) {
        let e = experiment(filtered_su4(2, 2, seed), 20_000);
        let noisy: Arc<dyn Backend> = Arc::new(SampledBackend { noise: NoiseModel::local(1e-3, 1e-2) });
        let ideal: Arc<dyn Backend> = Arc::new(IdealBackend);
        let zcfg = ZneConfig { seed, ..ZneConfig::default() };
        let g = zne_graph(zcfg.clone(), noisy.clone(), &e).unwrap();
        prop_assert_eq!(run_estimate(&g, &e).unwrap().to_json(), zne(&e, &zcfg, noisy.as_ref()).unwrap().to_json());
        let ccfg = CdrConfig { seed, ..CdrConfig::default() };
        let g = cdr_graph(ccfg.clone(), noisy.clone(), ideal.clone());
        prop_assert_eq!(run_estimate(&g, &e).unwrap().to_json(), cdr(&e, &ccfg, noisy.as_ref(), ideal.as_ref()).unwrap().to_json());
    }
}

#[test]
fn mitigated_estimates_are_deterministic() {
    let e = experiment(filtered_su4(3, 2, 5), 30_000);
    let backend = SampledBackend { noise: NoiseModel::local(1e-3, 1e-2) };
    let cfg = ZneConfig { seed: 9, ..ZneConfig::default() };
    assert_eq!(zne(&e, &cfg, &backend).unwrap().to_json(), zne(&e, &cfg, &backend).unwrap().to_json());
    let cfg = CdrConfig { seed: 9, ..CdrConfig::default() };
    assert_eq!(
        cdr(&e, &cfg, &backend, &IdealBackend).unwrap().to_json(),
        cdr(&e, &cfg, &backend, &IdealBackend).unwrap().to_json()
    );
}

#[test]
fn clifford_t_depolarising_agreement() {
    let (p1, p2) = (1e-3, 1e-2);
    for s in 0..50 {
        let c = clifford_t(2 + (s % 3) as usize, (s % 31) as usize, 20, s);
        let o = PauliOperator::global_z(c.n_qubits);
        let sim = noisy_expectation(&c, &o, &NoiseModel::global(p1, p2)).unwrap();
        let law = depolarising_noisy_expectation(ideal_expectation(&c, &o).unwrap(), &DepolarisingProfile::of(&c, p1, p2));
        assert!((sim - law).abs() <= 1e-10, "seed {s}: {sim} vs {law}");
    }
}
