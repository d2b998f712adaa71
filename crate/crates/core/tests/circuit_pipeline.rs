use htscatter_core::circuit::{
    compile_program, emit_trotter_step, gate_report, interpret, pauli_decompose, prep_circuit, reorder_for_state_prep,
    split_step_terms, CompileOptions, CompiledProgram, PauliProduct,
};
use htscatter_core::evolution::{adiabatic_prepare, trotter_evolve, Propagation, RampOperators, RampSchedule};
use htscatter_core::fock::{enumerate_basis, EnumerationOptions, ModelParams, TruncatedBasis, TruncationSpec};
use htscatter_core::hamiltonian::{assemble, Hamiltonian};
use htscatter_core::linalg::{expectation, inner};
use htscatter_core::observables::occupation_histogram;
use htscatter_core::wavepacket::{two_packet_state, WavepacketSpec};
use htscatter_core::StateVector;
use num_complex::Complex64;

fn setup(spec: TruncationSpec, g: f64, p0: f64) -> (TruncatedBasis, Hamiltonian, StateVector) {
    let p = ModelParams::new(1.0, 16.0, g).unwrap();
    let b = enumerate_basis(&p, spec, &EnumerationOptions::default()).unwrap();
    let h = assemble(&b).unwrap();
    let (psi, _) = two_packet_state(&b, &WavepacketSpec::new(p0, 0.75).unwrap()).unwrap();
    (b, h, psi)
}

fn fidelity(a: &[Complex64], b: &[Complex64]) -> f64 {
    inner(a, b).norm_sqr()
}

fn zero_register(n: usize) -> Vec<Complex64> {
    let mut reg = vec![Complex64::default(); 1 << n];
    reg[0] = Complex64::new(1.0, 0.0);
    reg
}

fn small_program(reorder: bool) -> (TruncatedBasis, Hamiltonian, StateVector, RampSchedule, CompiledProgram) {
    let (b, h, psi) = setup(TruncationSpec::QubitCount(4), 2.0, 1.5);
    let schedule = RampSchedule::from_step(1.0, 0.2).unwrap();
    let options = CompileOptions {
        reorder,
        ..CompileOptions::default()
    };
    let prog = compile_program(&h.free_energies, &h.interaction, psi.amplitudes(), &schedule, &options).unwrap();
    (b, h, psi, schedule, prog)
}

#[test]
fn small_register_prep_and_ramp() {
    let (b, h, psi, schedule, prog) = small_program(true);
    assert_eq!(prog.num_qubits, 4);
    assert_eq!(prog.permutation.support_qubits, 3);
    assert_eq!(schedule.steps, 5);

    let mut reg = zero_register(prog.num_qubits);
    interpret(&prog.state_prep, &mut reg).unwrap();
    assert!(fidelity(&reg, &prog.initial) > 1.0 - 1e-10);
    assert!(prog.state_prep.gates.iter().all(|g| g.qubits().0.iter().take(g.qubits().1).all(|&q| q >= 1)));

    interpret(&prog.ramp, &mut reg).unwrap();
    let matrix = prog.apply_matrix_stages(&prog.ramp_stages, &prog.initial).unwrap();
    let f = fidelity(&reg, &matrix);
    assert!(f > 0.999, "interpreter vs matrix {f}");
    assert!(f > 1.0 - 1e-10, "interpreter vs matrix {f}");

    // Against the exact ramp the split error of the Pauli product shows.
    let exact = adiabatic_prepare(&RampOperators::new(&h), &psi, &schedule, Propagation::Exact).unwrap();
    let back = StateVector::new(&b, prog.from_register(&reg)).unwrap();
    let f_exact = back.fidelity(&exact);
    assert!(f_exact > 0.99 && f_exact < 1.0, "{f_exact}");
}

#[test]
fn small_register_gate_counts_are_stable() {
    let (_, _, _, _, prog) = small_program(true);
    let mut text = String::new();
    for (name, c) in [("prep", &prog.state_prep), ("ramp", &prog.ramp), ("step", &prog.step)] {
        let r = gate_report(c);
        text += &format!("{name} {} {} {}\n", r.total_gates, r.two_qubit_gates, r.depth);
    }
    let golden = include_str!("golden/small_register_gates.txt");
    assert_eq!(text, golden);
}

#[test]
fn reordering_changes_only_the_register_layout() {
    let (b, h, psi, schedule, on) = small_program(true);
    let (_, _, _, _, off) = small_program(false);
    assert_eq!(off.permutation.support_qubits, 4);
    assert!(on.permutation.support_qubits < off.permutation.support_qubits);

    // Matrix pipeline: exact similarity invariance.
    let direct = adiabatic_prepare(&RampOperators::new(&h), &psi, &schedule, Propagation::Exact).unwrap();
    let fwd = &on.permutation.forward;
    let h0 = on.permutation.apply(&h.free_energies);
    let v = h.interaction.permuted(fwd);
    let moved = StateVector::new(&b, on.permutation.apply(psi.amplitudes())).unwrap();
    let ops = RampOperators {
        free_energies: &h0,
        interaction: &v,
        split: None,
    };
    let permuted = adiabatic_prepare(&ops, &moved, &schedule, Propagation::Exact).unwrap();
    let back = StateVector::new(&b, on.permutation.unapply(permuted.amplitudes())).unwrap();
    let hd = occupation_histogram(&b, &direct).unwrap();
    let hb = occupation_histogram(&b, &back).unwrap();
    for (n, p) in &hd {
        assert!((p - hb[n]).abs() < 1e-12, "N={n}");
    }

    // Circuits: the Pauli split depends on the layout, so agreement is at
    // product-formula accuracy.
    let run = |p: &CompiledProgram| {
        let mut reg = zero_register(p.num_qubits);
        interpret(&p.state_prep, &mut reg).unwrap();
        interpret(&p.ramp, &mut reg).unwrap();
        StateVector::new(&b, p.from_register(&reg)).unwrap()
    };
    let (a, c) = (run(&on), run(&off));
    let ha = occupation_histogram(&b, &a).unwrap();
    let hc = occupation_histogram(&b, &c).unwrap();
    for (n, p) in &ha {
        assert!((p - hc[n]).abs() < 1e-3, "N={n}");
    }
}

#[test]
fn permutation_preserves_expectations() {
    let (_, h, psi) = setup(TruncationSpec::QubitCount(6), 1.0, 2.5);
    let support: Vec<usize> = (0..psi.len()).filter(|&i| psi.amplitudes()[i] != Complex64::default()).collect();
    let perm = reorder_for_state_prep(psi.len(), &support).unwrap();
    assert!(!perm.is_identity());
    let moved = perm.apply(psi.amplitudes());
    assert!(moved[..1 << perm.support_qubits].iter().map(|a| a.norm_sqr()).sum::<f64>() > 1.0 - 1e-15);
    let full = h.full.permuted(&perm.forward);
    let before = expectation(&h.full, psi.amplitudes());
    let after = expectation(&full, &moved);
    assert!((before - after).abs() < 1e-12 * before.abs().max(1.0));
    assert_eq!(perm.unapply(&moved), psi.amplitudes());
}

#[test]
fn circuit_steps_match_pauli_path() {
    for (nq, g) in [(3, 1.0), (4, 2.0), (6, 0.5)] {
        let (_, h, psi) = setup(TruncationSpec::QubitCount(nq), g, 2.0);
        let v = pauli_decompose(&h.interaction, 0.0).unwrap();
        let product = PauliProduct::new(&v);
        let dt = 0.1;
        let step = emit_trotter_step(nq as usize, &split_step_terms(&h.free_energies, &v, 1.0).unwrap(), dt).unwrap();
        let mut reg = psi.amplitudes().to_vec();
        for _ in 0..20 {
            interpret(&step, &mut reg).unwrap();
        }
        let (want, t) = trotter_evolve(&h.free_energies, &product, 1.0, &psi, 2.0, dt).unwrap();
        assert!((t - 2.0).abs() < 1e-12);
        let err = reg
            .iter()
            .zip(want.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "n_q={nq}: {err}");
    }
}

#[test]
fn padding_states_stay_empty() {
    for e in [5.0, 6.0] {
        let (b, h, psi) = setup(TruncationSpec::EnergyCutoff(e), 1.5, 1.5);
        assert!(!b.len().is_power_of_two());
        let schedule = RampSchedule::from_step(1.0, 0.2).unwrap();
        let prog = compile_program(
            &h.free_energies,
            &h.interaction,
            psi.amplitudes(),
            &schedule,
            &CompileOptions::default(),
        )
        .unwrap();
        let mut reg = prog.initial.clone();
        interpret(&prog.ramp, &mut reg).unwrap();
        let mut elapsed = schedule.tau;
        for _ in 0..10 {
            interpret(&prog.step, &mut reg).unwrap();
            elapsed += 0.2;
        }
        assert!(prog.leakage(&reg) / elapsed < 1e-12, "dim {}: {}", b.len(), prog.leakage(&reg));
    }
}

#[test]
fn three_qubit_packet_prep() {
    let (_, _, psi, _, prog) = small_program(true);
    let k = prog.permutation.support_qubits;
    let moved = prog.permutation.apply(psi.amplitudes());
    let c = prep_circuit(&moved[..1 << k]).unwrap();
    let mut reg = zero_register(k);
    interpret(&c, &mut reg).unwrap();
    assert!(fidelity(&reg, &moved[..1 << k]) > 1.0 - 1e-10);
}
