//! Pauli decomposition, gate-level circuits and a state-vector interpreter.
//!
//! Qubit 0 is the most significant bit of a basis index, and letter `q` of
//! a Pauli string acts on qubit `q`.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::SymmetricOperator;
use crate::evolution::{apply_stages, preparation_stages, Propagation, RampOperators, RampSchedule, Stage};
use crate::linalg::Exponential;
use crate::wavepacket::StateVector;

/// Largest register the interpreter accepts by default.
pub const INTERPRETER_CEILING: usize = 14;

/// `c · P` with `P` encoded by X and Z masks over basis-index bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub x: u64,
    pub z: u64,
}

impl PauliTerm {
    fn bit(num_qubits: usize, qubit: usize) -> u64 {
        1u64 << (num_qubits - 1 - qubit)
    }

    /// Parses a string over `IXYZ`.
    pub fn from_letters(coefficient: f64, letters: &str) -> Result<Self> {
        let n = letters.chars().count();
        if n > 63 {
            return Err(Error::InvalidParameter("Pauli string longer than 63 qubits"));
        }
        let (mut x, mut z) = (0u64, 0u64);
        for (q, ch) in letters.chars().enumerate() {
            let b = Self::bit(n, q);
            match ch {
                'I' => {}
                'X' => x |= b,
                'Z' => z |= b,
                'Y' => {
                    x |= b;
                    z |= b;
                }
                _ => return Err(Error::InvalidParameter("Pauli letters must be I, X, Y or Z")),
            }
        }
        Ok(Self { coefficient, x, z })
    }

    pub fn letter(&self, num_qubits: usize, qubit: usize) -> char {
        let b = Self::bit(num_qubits, qubit);
        match (self.x & b != 0, self.z & b != 0) {
            (false, false) => 'I',
            (true, false) => 'X',
            (false, true) => 'Z',
            (true, true) => 'Y',
        }
    }

    pub fn letters(&self, num_qubits: usize) -> String {
        (0..num_qubits).map(|q| self.letter(num_qubits, q)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn is_diagonal(&self) -> bool {
        self.x == 0
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Qubits carrying a non-identity letter, ascending.
    pub fn support(&self, num_qubits: usize) -> Vec<usize> {
        (0..num_qubits)
            .filter(|&q| (self.x | self.z) & Self::bit(num_qubits, q) != 0)
            .collect()
    }

    /// `P|j⟩ = phase · |j ⊕ x⟩`.
    fn phase(&self, j: usize) -> Complex64 {
        let sign = if (j as u64 & self.z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        match self.y_count() % 4 {
            0 => Complex64::new(sign, 0.0),
            1 => Complex64::new(0.0, sign),
            2 => Complex64::new(-sign, 0.0),
            _ => Complex64::new(0.0, -sign),
        }
    }

    /// `ψ ← exp(-i c t P) ψ`.
    pub fn apply_exp(&self, psi: &mut [Complex64], t: f64) {
        let angle = self.coefficient * t;
        let (s, c) = (libm::sin(angle), libm::cos(angle));
        let x = self.x as usize;
        if x == 0 {
            let plus = Complex64::from_polar(1.0, -angle);
            let minus = plus.conj();
            for (j, a) in psi.iter_mut().enumerate() {
                *a *= if (j as u64 & self.z).count_ones() % 2 == 0 { plus } else { minus };
            }
            return;
        }
        let mi_s = Complex64::new(0.0, -s);
        for j in 0..psi.len() {
            let k = j ^ x;
            if j < k {
                let (a, b) = (psi[j], psi[k]);
                // P|j⟩ = ph_j |k⟩ and P|k⟩ = ph_k |j⟩.
                psi[k] = b * c + mi_s * self.phase(j) * a;
                psi[j] = a * c + mi_s * self.phase(k) * b;
            }
        }
    }

    /// `y = P x`.
    pub fn apply(&self, x_in: &[Complex64], y: &mut [Complex64]) {
        let x = self.x as usize;
        for (j, a) in x_in.iter().enumerate() {
            y[j ^ x] = self.phase(j) * *a;
        }
    }
}

/// Pauli expansion of a real symmetric operator on `2^n` states.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliDecomposition {
    pub num_qubits: usize,
    /// Off-diagonal terms by ascending `(x, z)`, then diagonal terms by `z`.
    pub terms: Vec<PauliTerm>,
    /// `Σ |c_P|` over terms removed by the threshold.
    pub dropped_weight: f64,
    /// Largest `|c_P|` among strings with an odd number of `Y`; zero up to
    /// rounding for a symmetric operator.
    pub max_odd_y: f64,
}

impl PauliDecomposition {
    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    /// `Σ c_P P` as a dense row-major matrix.
    pub fn to_dense(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = alloc::vec![0.0; d * d];
        for t in &self.terms {
            for j in 0..d {
                let ph = t.phase(j);
                out[(j ^ t.x as usize) * d + j] += t.coefficient * ph.re;
            }
        }
        out
    }

    /// Diagonal terms of the expansion (their exponentials commute).
    pub fn diagonal_terms(&self) -> impl Iterator<Item = &PauliTerm> {
        self.terms.iter().filter(|t| t.is_diagonal())
    }
}

/// Number of qubits for a power-of-two dimension.
pub fn padded_qubits(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::DimensionNotPadded { dim });
    }
    Ok(dim.trailing_zeros() as usize)
}

fn walsh_hadamard(v: &mut [f64]) {
    let mut h = 1;
    while h < v.len() {
        for i in (0..v.len()).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// `c_P = tr(P H) / 2^n` for every string, by one Walsh–Hadamard transform
/// per X mask: `O(n · 4^n)` operations.
pub fn pauli_decompose(op: &SymmetricOperator, drop_threshold: f64) -> Result<PauliDecomposition> {
    let dim = op.dim();
    let n = padded_qubits(dim)?;
    let scale = 1.0 / dim as f64;
    let mut off = Vec::new();
    let mut diag = Vec::new();
    let mut dropped = 0.0;
    let mut max_odd_y: f64 = 0.0;
    let mut g = alloc::vec![0.0; dim];
    for x in 0..dim {
        let mut any = false;
        for (k, slot) in g.iter_mut().enumerate() {
            *slot = op.get(k, k ^ x);
            any |= *slot != 0.0;
        }
        if !any {
            continue;
        }
        walsh_hadamard(&mut g);
        for (z, &w) in g.iter().enumerate() {
            let y = (x & z).count_ones();
            let value = w * scale;
            if y % 2 == 1 {
                max_odd_y = max_odd_y.max(value.abs());
                continue;
            }
            let c = if y % 4 == 0 { value } else { -value };
            if c == 0.0 {
                continue;
            }
            if c.abs() <= drop_threshold {
                dropped += c.abs();
                continue;
            }
            let term = PauliTerm {
                coefficient: c,
                x: x as u64,
                z: z as u64,
            };
            if x == 0 {
                diag.push(term);
            } else {
                off.push(term);
            }
        }
    }
    off.extend(diag);
    Ok(PauliDecomposition {
        num_qubits: n,
        terms: off,
        dropped_weight: dropped,
        max_odd_y,
    })
}

/// `exp(-i A t) ≈ Π_P exp(-i c_P P t)`, first term acting first.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliProduct {
    pub num_qubits: usize,
    pub terms: Vec<PauliTerm>,
}

impl PauliProduct {
    pub fn new(decomposition: &PauliDecomposition) -> Self {
        Self {
            num_qubits: decomposition.num_qubits,
            terms: decomposition.terms.clone(),
        }
    }
}

impl Exponential for PauliProduct {
    fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    fn apply_exp(&self, psi: &mut [Complex64], t: f64) {
        for term in &self.terms {
            term.apply_exp(psi, t);
        }
    }

    fn apply_exp_adjoint(&self, psi: &mut [Complex64], t: f64) {
        for term in self.terms.iter().rev() {
            term.apply_exp(psi, -t);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H(usize),
    RX(usize, f64),
    RY(usize, f64),
    RZ(usize, f64),
    /// `(control, target)`.
    CNOT(usize, usize),
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::H(_) => "H",
            Gate::RX(..) => "RX",
            Gate::RY(..) => "RY",
            Gate::RZ(..) => "RZ",
            Gate::CNOT(..) => "CNOT",
        }
    }

    pub fn qubits(&self) -> ([usize; 2], usize) {
        match *self {
            Gate::H(q) | Gate::RX(q, _) | Gate::RY(q, _) | Gate::RZ(q, _) => ([q, q], 1),
            Gate::CNOT(c, t) => ([c, t], 2),
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::RX(_, a) | Gate::RY(_, a) | Gate::RZ(_, a) => Some(a),
            _ => None,
        }
    }

    pub fn inverse(&self) -> Self {
        match *self {
            Gate::RX(q, a) => Gate::RX(q, -a),
            Gate::RY(q, a) => Gate::RY(q, -a),
            Gate::RZ(q, a) => Gate::RZ(q, -a),
            g => g,
        }
    }

    fn shifted(&self, offset: usize) -> Self {
        match *self {
            Gate::H(q) => Gate::H(q + offset),
            Gate::RX(q, a) => Gate::RX(q + offset, a),
            Gate::RY(q, a) => Gate::RY(q + offset, a),
            Gate::RZ(q, a) => Gate::RZ(q + offset, a),
            Gate::CNOT(c, t) => Gate::CNOT(c + offset, t + offset),
        }
    }
}

/// Gate list on `num_qubits` qubits implementing `e^{i·global_phase} · Π gates`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    pub num_qubits: usize,
    pub gates: Vec<Gate>,
    pub global_phase: f64,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            gates: Vec::new(),
            global_phase: 0.0,
        }
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    /// Appends `other` (acting after `self`).
    pub fn append(&mut self, other: &Circuit) {
        assert_eq!(self.num_qubits, other.num_qubits);
        self.gates.extend_from_slice(&other.gates);
        self.global_phase += other.global_phase;
    }

    pub fn inverse(&self) -> Self {
        Self {
            num_qubits: self.num_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
            global_phase: -self.global_phase,
        }
    }

    /// The same circuit on a `num_qubits` register, qubit `q` mapped to
    /// `q + offset`.
    pub fn embedded(&self, num_qubits: usize, offset: usize) -> Self {
        assert!(offset + self.num_qubits <= num_qubits);
        Self {
            num_qubits,
            gates: self.gates.iter().map(|g| g.shifted(offset)).collect(),
            global_phase: self.global_phase,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for g in &self.gates {
            let (qs, count) = g.qubits();
            for &q in &qs[..count] {
                if q >= self.num_qubits {
                    return Err(Error::QubitOutOfRange {
                        qubit: q,
                        num_qubits: self.num_qubits,
                    });
                }
            }
            if count == 2 && qs[0] == qs[1] {
                return Err(Error::InvalidParameter("CNOT control equals target"));
            }
            if let Some(a) = g.angle() {
                if !a.is_finite() {
                    return Err(Error::InvalidParameter("gate angle is not finite"));
                }
            }
        }
        if !self.global_phase.is_finite() {
            return Err(Error::InvalidParameter("global phase is not finite"));
        }
        Ok(())
    }

    /// Removes adjacent identical CNOT pairs until none remain.
    pub fn cancel_cnot_pairs(&mut self) {
        let mut out: Vec<Gate> = Vec::with_capacity(self.gates.len());
        for g in self.gates.drain(..) {
            if let (Gate::CNOT(..), Some(last)) = (g, out.last()) {
                if *last == g {
                    out.pop();
                    continue;
                }
            }
            out.push(g);
        }
        self.gates = out;
    }
}

/// Gate counts and greedy-layer depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GateReport {
    pub total_gates: usize,
    pub two_qubit_gates: usize,
    pub depth: usize,
}

pub fn gate_report(circuit: &Circuit) -> GateReport {
    let mut layer = alloc::vec![0usize; circuit.num_qubits.max(1)];
    let mut depth = 0;
    let mut two = 0;
    for g in &circuit.gates {
        let (qs, count) = g.qubits();
        let qs = &qs[..count];
        if count == 2 {
            two += 1;
        }
        let level = qs.iter().map(|&q| layer.get(q).copied().unwrap_or(0)).max().unwrap_or(0) + 1;
        for &q in qs {
            if let Some(slot) = layer.get_mut(q) {
                *slot = level;
            }
        }
        depth = depth.max(level);
    }
    GateReport {
        total_gates: circuit.gates.len(),
        two_qubit_gates: two,
        depth,
    }
}

/// Applies the circuit to `psi` in place.
pub fn interpret(circuit: &Circuit, psi: &mut [Complex64]) -> Result<()> {
    interpret_with_ceiling(circuit, psi, INTERPRETER_CEILING)
}

pub fn interpret_with_ceiling(circuit: &Circuit, psi: &mut [Complex64], ceiling: usize) -> Result<()> {
    let n = circuit.num_qubits;
    if n > ceiling {
        return Err(Error::DimensionTooLarge { dim: n, ceiling });
    }
    if psi.len() != 1 << n {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            found: psi.len(),
        });
    }
    circuit.validate()?;
    let bit = |q: usize| 1usize << (n - 1 - q);
    for g in &circuit.gates {
        match *g {
            Gate::CNOT(c, t) => {
                let (cb, tb) = (bit(c), bit(t));
                for j in 0..psi.len() {
                    if j & cb != 0 && j & tb == 0 {
                        psi.swap(j, j | tb);
                    }
                }
            }
            Gate::RZ(q, a) => {
                let b = bit(q);
                let lo = Complex64::from_polar(1.0, -0.5 * a);
                let hi = lo.conj();
                for (j, v) in psi.iter_mut().enumerate() {
                    *v *= if j & b == 0 { lo } else { hi };
                }
            }
            _ => {
                let (q, m) = single_qubit_matrix(g);
                let b = bit(q);
                for j in 0..psi.len() {
                    if j & b == 0 {
                        let (u, v) = (psi[j], psi[j | b]);
                        psi[j] = m[0] * u + m[1] * v;
                        psi[j | b] = m[2] * u + m[3] * v;
                    }
                }
            }
        }
    }
    if circuit.global_phase != 0.0 {
        let ph = Complex64::from_polar(1.0, circuit.global_phase);
        for v in psi.iter_mut() {
            *v *= ph;
        }
    }
    Ok(())
}

fn single_qubit_matrix(g: &Gate) -> (usize, [Complex64; 4]) {
    let r = |x: f64| Complex64::new(x, 0.0);
    match *g {
        Gate::H(q) => {
            let s = core::f64::consts::FRAC_1_SQRT_2;
            (q, [r(s), r(s), r(s), r(-s)])
        }
        Gate::RX(q, a) => {
            let (s, c) = (libm::sin(0.5 * a), libm::cos(0.5 * a));
            (q, [r(c), Complex64::new(0.0, -s), Complex64::new(0.0, -s), r(c)])
        }
        Gate::RY(q, a) => {
            let (s, c) = (libm::sin(0.5 * a), libm::cos(0.5 * a));
            (q, [r(c), r(-s), r(s), r(c)])
        }
        Gate::RZ(q, a) => (
            q,
            [
                Complex64::from_polar(1.0, -0.5 * a),
                Complex64::default(),
                Complex64::default(),
                Complex64::from_polar(1.0, 0.5 * a),
            ],
        ),
        Gate::CNOT(..) => unreachable!("two-qubit gate"),
    }
}

/// Appends `exp(-i c t P)` as a basis change, CNOT ladder and `RZ(2ct)`.
pub fn push_pauli_exponential(circuit: &mut Circuit, term: &PauliTerm, t: f64) {
    let n = circuit.num_qubits;
    if term.is_identity() {
        circuit.global_phase -= term.coefficient * t;
        return;
    }
    let active = term.support(n);
    for &q in &active {
        match term.letter(n, q) {
            'X' => circuit.push(Gate::H(q)),
            'Y' => circuit.push(Gate::RX(q, FRAC_PI_2)),
            _ => {}
        }
    }
    for w in active.windows(2) {
        circuit.push(Gate::CNOT(w[0], w[1]));
    }
    circuit.push(Gate::RZ(*active.last().expect("non-identity"), 2.0 * term.coefficient * t));
    for w in active.windows(2).rev() {
        circuit.push(Gate::CNOT(w[0], w[1]));
    }
    for &q in &active {
        match term.letter(n, q) {
            'X' => circuit.push(Gate::H(q)),
            'Y' => circuit.push(Gate::RX(q, -FRAC_PI_2)),
            _ => {}
        }
    }
}

/// One product-formula step `Π_P exp(-i c_P P dt)` in term order.
pub fn emit_trotter_step(num_qubits: usize, terms: &[PauliTerm], dt: f64) -> Result<Circuit> {
    if terms.is_empty() {
        return Err(Error::InvalidParameter("no Pauli terms to exponentiate"));
    }
    let mut c = Circuit::new(num_qubits);
    for t in terms {
        push_pauli_exponential(&mut c, t, dt);
    }
    Ok(c)
}

/// Uniformly controlled rotation about one axis: target `target`, controls
/// `controls` (most significant first), angle per control value.
fn push_multiplexed(circuit: &mut Circuit, axis: char, controls: &[usize], target: usize, angles: &[f64]) {
    debug_assert_eq!(angles.len(), 1 << controls.len());
    if angles.iter().all(|&a| a == 0.0) {
        return;
    }
    let Some((&last, rest)) = controls.split_last() else {
        circuit.push(match axis {
            'y' => Gate::RY(target, angles[0]),
            _ => Gate::RZ(target, angles[0]),
        });
        return;
    };
    let half: Vec<(f64, f64)> = angles
        .chunks(2)
        .map(|p| (0.5 * (p[0] + p[1]), 0.5 * (p[0] - p[1])))
        .collect();
    let sum: Vec<f64> = half.iter().map(|h| h.0).collect();
    let diff: Vec<f64> = half.iter().map(|h| h.1).collect();
    push_multiplexed(circuit, axis, rest, target, &sum);
    if diff.iter().any(|&a| a != 0.0) {
        circuit.push(Gate::CNOT(last, target));
        push_multiplexed(circuit, axis, rest, target, &diff);
        circuit.push(Gate::CNOT(last, target));
    }
}

/// Circuit preparing `amplitudes` (length `2^k`, unit norm) from `|0…0⟩`
/// exactly, including the global phase.
pub fn prep_circuit(amplitudes: &[Complex64]) -> Result<Circuit> {
    let k = padded_qubits(amplitudes.len())?;
    let norm = crate::linalg::norm(amplitudes);
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter("state to prepare is not normalised"));
    }
    let real = amplitudes.iter().all(|a| a.im == 0.0);
    let mut circuit = Circuit::new(k);
    // Subtree weights: level l holds 2^l sums of squared magnitudes.
    let mut levels: Vec<Vec<f64>> = alloc::vec![amplitudes.iter().map(|a| a.norm_sqr()).collect()];
    for _ in 0..k {
        let prev = levels.last().expect("seeded");
        let next: Vec<f64> = prev.chunks(2).map(|p| p[0] + p[1]).collect();
        levels.push(next);
    }
    levels.reverse();
    for q in 0..k {
        let angles: Vec<f64> = if q + 1 == k && real {
            amplitudes.chunks(2).map(|p| 2.0 * libm::atan2(p[1].re, p[0].re)).collect()
        } else {
            levels[q + 1]
                .chunks(2)
                .map(|p| 2.0 * libm::atan2(libm::sqrt(p[1]), libm::sqrt(p[0])))
                .collect()
        };
        let controls: Vec<usize> = (0..q).collect();
        push_multiplexed(&mut circuit, 'y', &controls, q, &angles);
    }
    if !real {
        let mut phases: Vec<f64> = amplitudes.iter().map(|a| a.arg()).collect();
        for q in (0..k).rev() {
            let angles: Vec<f64> = phases.chunks(2).map(|p| p[1] - p[0]).collect();
            phases = phases.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect();
            let controls: Vec<usize> = (0..q).collect();
            push_multiplexed(&mut circuit, 'z', &controls, q, &angles);
        }
        circuit.global_phase = phases[0];
    }
    circuit.cancel_cnot_pairs();
    Ok(circuit)
}

/// Reordering that moves a state's support into the leading `2^k` slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    /// `forward[old] = new`.
    pub forward: Vec<usize>,
    /// `inverse[new] = old`.
    pub inverse: Vec<usize>,
    /// Qubits spanning the support, `ceil(log2 |support|)`.
    pub support_qubits: usize,
}

impl Permutation {
    pub fn identity(dim: usize) -> Self {
        let id: Vec<usize> = (0..dim).collect();
        Self {
            forward: id.clone(),
            inverse: id,
            support_qubits: 0,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn apply<T: Copy + Default>(&self, v: &[T]) -> Vec<T> {
        let mut out = alloc::vec![T::default(); v.len()];
        for (old, &new) in self.forward.iter().enumerate() {
            out[new] = v[old];
        }
        out
    }

    pub fn unapply<T: Copy + Default>(&self, v: &[T]) -> Vec<T> {
        let mut out = alloc::vec![T::default(); v.len()];
        for (new, &old) in self.inverse.iter().enumerate() {
            out[old] = v[new];
        }
        out
    }
}

/// Places `support` (basis indices) first, keeping the relative order of
/// both the support and the rest. Returns the identity when the support
/// already lies in `[0, 2^k)`.
pub fn reorder_for_state_prep(dim: usize, support: &[usize]) -> Result<Permutation> {
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    let mut sorted: Vec<usize> = support.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if let Some(&bad) = sorted.iter().find(|&&i| i >= dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad + 1,
        });
    }
    let k = crate::fock::qubits_for_dim(sorted.len()) as usize;
    if sorted.iter().all(|&i| i < 1 << k) {
        let mut p = Permutation::identity(dim);
        p.support_qubits = k;
        return Ok(p);
    }
    let mut inverse = sorted.clone();
    let mut in_support = alloc::vec![false; dim];
    for &i in &sorted {
        in_support[i] = true;
    }
    inverse.extend((0..dim).filter(|&i| !in_support[i]));
    let mut forward = alloc::vec![0; dim];
    for (new, &old) in inverse.iter().enumerate() {
        forward[old] = new;
    }
    Ok(Permutation {
        forward,
        inverse,
        support_qubits: k,
    })
}

/// Default padding penalty: well above the operator's spectrum.
pub fn default_penalty(op: &SymmetricOperator) -> f64 {
    10.0 * (1.0 + op.inf_norm())
}

/// `H₀` and `V` padded to `2^n` states: `H₀` with `penalty` on the new
/// diagonal, `V` with zeros.
pub fn pad_split(free_energies: &[f64], interaction: &SymmetricOperator, penalty: f64) -> (Vec<f64>, SymmetricOperator) {
    let dim = free_energies.len().next_power_of_two().max(1);
    let mut h0 = free_energies.to_vec();
    h0.resize(dim, penalty);
    (h0, interaction.padded(dim, 0.0))
}

/// `exp(-i (H₀ + λV) h)` as one product-formula step: the off-diagonal
/// terms of `λV`, then the diagonal terms of `H₀ + λV`.
pub fn split_step_terms(h0: &[f64], v: &PauliDecomposition, lambda: f64) -> Result<Vec<PauliTerm>> {
    let diag_h0 = pauli_decompose(&SymmetricOperator::diagonal_matrix(h0), 0.0)?;
    if diag_h0.num_qubits != v.num_qubits {
        return Err(Error::DimensionMismatch {
            expected: v.dim(),
            found: h0.len(),
        });
    }
    let mut terms: Vec<PauliTerm> = v
        .terms
        .iter()
        .filter(|t| !t.is_diagonal())
        .map(|t| PauliTerm {
            coefficient: lambda * t.coefficient,
            ..*t
        })
        .collect();
    // V's diagonal terms, then H₀'s: all diagonal, so their order is free.
    terms.extend(v.diagonal_terms().map(|t| PauliTerm {
        coefficient: lambda * t.coefficient,
        ..*t
    }));
    terms.extend(diag_h0.terms.iter().copied());
    Ok(terms)
}

/// Circuit for a stage list acting on the padded operators. Only split
/// stages have a gate-level form.
pub fn stages_circuit(h0: &[f64], v: &PauliDecomposition, stages: &[Stage]) -> Result<Circuit> {
    let mut circuit = Circuit::new(v.num_qubits);
    for stage in stages {
        let Stage::Split {
            lambda,
            step,
            count,
            v_first,
        } = *stage
        else {
            return Err(Error::InvalidParameter("exact stages have no circuit form"));
        };
        let terms = split_step_terms(h0, v, lambda)?;
        // The circuit of a step applies the first term first, like the
        // product formula it mirrors.
        let one = if v_first {
            emit_trotter_step(v.num_qubits, &terms, step)?
        } else {
            emit_trotter_step(v.num_qubits, &terms, -step)?.inverse()
        };
        for _ in 0..count {
            circuit.append(&one);
        }
    }
    Ok(circuit)
}

/// Settings for [`compile_program`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompileOptions {
    /// Diagonal energy on padding states; `None` uses `10(1 + max H₀ + ‖V‖∞)`.
    pub penalty: Option<f64>,
    /// Pauli coefficients at or below this magnitude are dropped.
    pub drop_threshold: f64,
    /// Time step of the split factors.
    pub dt: f64,
    /// Move the initial state's support to the lowest indices first.
    pub reorder: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self {
            penalty: None,
            drop_threshold: 0.0,
            dt: 0.2,
            reorder: true,
        }
    }
}

/// Operators, initial state and circuits on a padded, reordered register.
#[derive(Debug, Clone)]
pub struct CompiledProgram {
    pub num_qubits: usize,
    pub permutation: Permutation,
    pub penalty: f64,
    pub free_energies: Vec<f64>,
    pub interaction: SymmetricOperator,
    pub decomposition: PauliDecomposition,
    /// Initial state in register order.
    pub initial: Vec<Complex64>,
    /// Prepares `initial` from `|0…0⟩`.
    pub state_prep: Circuit,
    /// Adiabatic preparation as split factors of size `dt`.
    pub ramp: Circuit,
    /// One full-coupling split step of size `dt`.
    pub step: Circuit,
    pub ramp_stages: Vec<Stage>,
}

impl CompiledProgram {
    /// Embeds a basis-ordered vector in the register.
    pub fn to_register(&self, amplitudes: &[Complex64]) -> Vec<Complex64> {
        let mut v = self.permutation.apply(amplitudes);
        v.resize(1 << self.num_qubits, Complex64::default());
        v
    }

    /// Basis-ordered vector from a register state; padding amplitudes are
    /// discarded.
    pub fn from_register(&self, register: &[Complex64]) -> Vec<Complex64> {
        let dim = self.permutation.forward.len();
        self.permutation.unapply(&register[..dim])
    }

    /// Total probability outside the physical states.
    pub fn leakage(&self, register: &[Complex64]) -> f64 {
        let dim = self.permutation.forward.len();
        register[dim..].iter().fold(0.0, |acc, a| acc + a.norm_sqr())
    }

    /// The matrix-level image of `stages` using the same product formula
    /// as the circuits.
    pub fn apply_matrix_stages(&self, stages: &[Stage], register: &[Complex64]) -> Result<Vec<Complex64>> {
        let product = PauliProduct::new(&self.decomposition);
        let ops = RampOperators {
            free_energies: &self.free_energies,
            interaction: &self.interaction,
            split: Some(&product),
        };
        let psi = StateVector::from_parts(0, register.to_vec());
        Ok(apply_stages(&ops, stages, &psi)?.into_amplitudes())
    }
}

/// Reorders the basis so the support of `initial` fills the lowest
/// `2^k` indices, pads to a power of two and emits the preparation, ramp
/// and time-step circuits.
pub fn compile_program(
    free_energies: &[f64],
    interaction: &SymmetricOperator,
    initial: &[Complex64],
    schedule: &RampSchedule,
    options: &CompileOptions,
) -> Result<CompiledProgram> {
    let dim = free_energies.len();
    if interaction.dim() != dim || initial.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: if interaction.dim() != dim { interaction.dim() } else { initial.len() },
        });
    }
    let support: Vec<usize> = (0..dim).filter(|&i| initial[i] != Complex64::default()).collect();
    let mut permutation = if options.reorder {
        reorder_for_state_prep(dim, &support)?
    } else if support.is_empty() {
        return Err(Error::EmptySupport);
    } else {
        Permutation::identity(dim)
    };
    let penalty = options.penalty.unwrap_or_else(|| {
        let top = free_energies.iter().copied().fold(0.0, f64::max);
        10.0 * (1.0 + top + interaction.inf_norm())
    });
    let h0 = permutation.apply(free_energies);
    let v = interaction.permuted(&permutation.forward);
    let (free_energies, interaction) = pad_split(&h0, &v, penalty);
    let num_qubits = padded_qubits(free_energies.len())?;
    if !options.reorder {
        let top = support.last().copied().unwrap_or(0);
        permutation.support_qubits = crate::fock::qubits_for_dim(top + 1) as usize;
    }
    let decomposition = pauli_decompose(&interaction, options.drop_threshold)?;
    let mut register = permutation.apply(initial);
    register.resize(1 << num_qubits, Complex64::default());
    let k = permutation.support_qubits;
    let state_prep = prep_circuit(&register[..1 << k])?.embedded(num_qubits, num_qubits - k);
    let ramp_stages = preparation_stages(schedule, Propagation::Trotter { dt: options.dt })?;
    let ramp = stages_circuit(&free_energies, &decomposition, &ramp_stages)?;
    let step = emit_trotter_step(num_qubits, &split_step_terms(&free_energies, &decomposition, 1.0)?, options.dt)?;
    Ok(CompiledProgram {
        num_qubits,
        permutation,
        penalty,
        free_energies,
        interaction,
        decomposition,
        initial: register,
        state_prep,
        ramp,
        step,
        ramp_stages,
    })
}
