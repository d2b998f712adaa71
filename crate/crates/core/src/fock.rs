//! Free-field Fock states on a circle and the truncated, zero-momentum,
//! parity-even basis built from them.
//!
//! Mode `n` carries momentum `k_n = 2πn/L` and energy `ω_n = sqrt(k_n² + M²)`.
//! A basis element is a parity orbit `{r, Pr}` of a zero-momentum Fock state,
//! stored through its canonical (order-minimal) representative.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;
use core::fmt;

use crate::error::{Error, Result};

/// Mass, circumference and quartic coupling of the theory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub mass: f64,
    pub length: f64,
    pub coupling: f64,
}

impl ModelParams {
    pub fn new(mass: f64, length: f64, coupling: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter("mass must be positive"));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidParameter("circumference must be positive"));
        }
        if !(coupling >= 0.0 && coupling.is_finite()) {
            return Err(Error::InvalidParameter("coupling must be non-negative"));
        }
        Ok(Self {
            mass,
            length,
            coupling,
        })
    }

    /// Unit mass on a circle of length `length`.
    pub fn unit_mass(length: f64, coupling: f64) -> Result<Self> {
        Self::new(1.0, length, coupling)
    }

    pub fn with_coupling(self, coupling: f64) -> Result<Self> {
        Self::new(self.mass, self.length, coupling)
    }

    /// Momentum of mode `n`.
    pub fn momentum(&self, n: i32) -> f64 {
        2.0 * PI * f64::from(n) / self.length
    }

    /// Energy of a single particle in mode `n`.
    pub fn omega(&self, n: i32) -> f64 {
        let k = self.momentum(n);
        libm::sqrt(k * k + self.mass * self.mass)
    }

    /// Largest `|n|` whose single-particle energy does not exceed `energy`.
    /// Returns `None` when even the zero mode is too heavy.
    pub fn mode_window(&self, energy: f64) -> Option<u32> {
        if self.mass > energy {
            return None;
        }
        let mut n = 0u32;
        while self.omega(n as i32 + 1) <= energy {
            n += 1;
        }
        Some(n)
    }
}

/// `(k_n, ω_n)` for mode `n`.
pub fn dispersion(n: i32, params: &ModelParams) -> (f64, f64) {
    (params.momentum(n), params.omega(n))
}

/// Occupation-number eigenstate of the free Hamiltonian.
///
/// Occupations are kept as `(mode, count)` pairs sorted by mode with every
/// count at least one. The total order compares particle number first and
/// then the occupation list lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct FockState {
    occ: Vec<(i32, u32)>,
}

impl FockState {
    pub fn vacuum() -> Self {
        Self { occ: Vec::new() }
    }

    /// Builds a state from arbitrary `(mode, count)` pairs. Repeated modes
    /// are merged and zero counts dropped.
    pub fn from_occupations<I: IntoIterator<Item = (i32, u32)>>(pairs: I) -> Self {
        let mut map: BTreeMap<i32, u32> = BTreeMap::new();
        for (n, r) in pairs {
            if r > 0 {
                *map.entry(n).or_insert(0) += r;
            }
        }
        Self {
            occ: map.into_iter().collect(),
        }
    }

    pub(crate) fn from_sorted_unchecked(occ: Vec<(i32, u32)>) -> Self {
        debug_assert!(occ.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(occ.iter().all(|&(_, r)| r > 0));
        Self { occ }
    }

    pub fn occupations(&self) -> &[(i32, u32)] {
        &self.occ
    }

    pub fn occupation(&self, n: i32) -> u32 {
        match self.occ.binary_search_by_key(&n, |&(m, _)| m) {
            Ok(i) => self.occ[i].1,
            Err(_) => 0,
        }
    }

    pub fn is_vacuum(&self) -> bool {
        self.occ.is_empty()
    }

    pub fn particle_number(&self) -> u32 {
        self.occ.iter().map(|&(_, r)| r).sum()
    }

    /// Total momentum in units of `2π/L`.
    pub fn momentum(&self) -> i64 {
        self.occ.iter().map(|&(n, r)| i64::from(n) * i64::from(r)).sum()
    }

    /// Largest `|n|` occupied, zero for the vacuum.
    pub fn max_abs_mode(&self) -> u32 {
        self.occ
            .iter()
            .map(|&(n, _)| n.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// Free energy `Σ r_n ω_n`.
    ///
    /// Terms are grouped by `|n|` and summed in ascending `|n|`, so states
    /// with the same multiset of `|n|` get bitwise-identical energies.
    pub fn energy(&self, params: &ModelParams) -> f64 {
        let mut by_abs: Vec<(u32, u32)> = self
            .occ
            .iter()
            .map(|&(n, r)| (n.unsigned_abs(), r))
            .collect();
        by_abs.sort_unstable();
        let mut total = 0.0;
        let mut i = 0;
        while i < by_abs.len() {
            let a = by_abs[i].0;
            let mut count = 0u32;
            while i < by_abs.len() && by_abs[i].0 == a {
                count += by_abs[i].1;
                i += 1;
            }
            total += params.omega(a as i32) * f64::from(count);
        }
        total
    }

    /// Spatial reflection: `r_n -> r_{-n}`.
    pub fn parity_image(&self) -> Self {
        let mut occ: Vec<(i32, u32)> = self.occ.iter().map(|&(n, r)| (-n, r)).collect();
        occ.reverse();
        Self { occ }
    }

    pub fn is_parity_symmetric(&self) -> bool {
        let n = self.occ.len();
        (0..n).all(|i| {
            let (m, r) = self.occ[i];
            let (m2, r2) = self.occ[n - 1 - i];
            m == -m2 && r == r2
        })
    }

    /// The order-minimal element of `{self, parity_image(self)}`.
    pub fn canonical(&self) -> Self {
        let image = self.parity_image();
        if image < *self {
            image
        } else {
            self.clone()
        }
    }

    /// `true` when this state is its own canonical representative.
    pub fn is_canonical(&self) -> bool {
        *self <= self.parity_image()
    }
}

impl Ord for FockState {
    fn cmp(&self, other: &Self) -> Ordering {
        self.particle_number()
            .cmp(&other.particle_number())
            .then_with(|| self.occ.cmp(&other.occ))
    }
}

impl PartialOrd for FockState {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (n, r)) in self.occ.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{n}:{r}")?;
        }
        write!(f, "}}")
    }
}

/// `n:r;n:r` label, empty for the vacuum.
impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (n, r)) in self.occ.iter().enumerate() {
            if i > 0 {
                write!(f, ";")?;
            }
            write!(f, "{n}:{r}")?;
        }
        Ok(())
    }
}

/// Parity-even combination `β(|r⟩ + P|r⟩)` labelled by its canonical
/// representative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityClass {
    representative: FockState,
    self_conjugate: bool,
}

impl ParityClass {
    pub fn new(state: &FockState) -> Self {
        Self {
            representative: state.canonical(),
            self_conjugate: state.is_parity_symmetric(),
        }
    }

    pub fn representative(&self) -> &FockState {
        &self.representative
    }

    pub fn is_self_conjugate(&self) -> bool {
        self.self_conjugate
    }

    /// `1/2` for self-conjugate orbits, `1/√2` otherwise.
    pub fn beta(&self) -> f64 {
        if self.self_conjugate {
            0.5
        } else {
            core::f64::consts::FRAC_1_SQRT_2
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationSpec {
    /// Keep every state with free energy `<= E_max`.
    EnergyCutoff(f64),
    /// Keep the `2^n_q` lowest states.
    QubitCount(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnumerationOptions {
    /// Drop states with an odd number of particles.
    pub even_particle_number_only: bool,
    /// Energy at which the first `QubitCount` search starts.
    pub initial_ceiling: f64,
    /// Multiplicative growth of the search ceiling between attempts.
    pub ceiling_growth: f64,
    /// Give up (`CutoffTooSmall`) once the ceiling exceeds this.
    pub max_ceiling: f64,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        Self {
            even_particle_number_only: false,
            initial_ceiling: 2.0,
            ceiling_growth: 2.0,
            max_ceiling: 256.0,
        }
    }
}

impl EnumerationOptions {
    pub fn even_only() -> Self {
        Self {
            even_particle_number_only: true,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BasisWarning {
    /// The last kept and first dropped states are degenerate, so the
    /// `QubitCount` cut splits an energy shell.
    DegenerateBoundary { energy: f64, kept: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisEntry {
    pub class: ParityClass,
    pub energy: f64,
}

impl BasisEntry {
    pub fn representative(&self) -> &FockState {
        self.class.representative()
    }

    pub fn particle_number(&self) -> u32 {
        self.class.representative().particle_number()
    }
}

/// Ordered truncated basis with exact representative lookup.
#[derive(Debug, Clone)]
pub struct TruncatedBasis {
    params: ModelParams,
    spec: TruncationSpec,
    options: EnumerationOptions,
    states: Vec<BasisEntry>,
    index: BTreeMap<FockState, usize>,
    mode_window: u32,
    warnings: Vec<BasisWarning>,
    fingerprint: u64,
}

impl TruncatedBasis {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn spec(&self) -> TruncationSpec {
        self.spec
    }

    pub fn options(&self) -> &EnumerationOptions {
        &self.options
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[BasisEntry] {
        &self.states
    }

    pub fn get(&self, i: usize) -> Option<&BasisEntry> {
        self.states.get(i)
    }

    pub fn energies(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.energy).collect()
    }

    /// Position of the parity class containing `state`, in either orientation.
    pub fn index_of(&self, state: &FockState) -> Option<usize> {
        if let Some(&i) = self.index.get(state) {
            return Some(i);
        }
        self.index.get(&state.parity_image()).copied()
    }

    /// Lookup for a state already known to be canonical.
    pub fn index_of_canonical(&self, state: &FockState) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Largest `|n|` occupied by any kept state.
    pub fn mode_window(&self) -> u32 {
        self.mode_window
    }

    /// Largest free energy in the basis.
    pub fn max_energy(&self) -> f64 {
        self.states.last().map_or(0.0, |s| s.energy)
    }

    /// `ceil(log2(dim))`.
    pub fn qubit_count(&self) -> u32 {
        qubits_for_dim(self.states.len())
    }

    pub fn warnings(&self) -> &[BasisWarning] {
        &self.warnings
    }

    /// Identity tag used to check that state vectors and operators were
    /// built on the same basis.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    fn from_entries(
        params: ModelParams,
        spec: TruncationSpec,
        options: EnumerationOptions,
        states: Vec<BasisEntry>,
        warnings: Vec<BasisWarning>,
    ) -> Self {
        let mut index = BTreeMap::new();
        let mut mode_window = 0;
        let mut hash = Fnv::new();
        hash.write_u64(params.mass.to_bits());
        hash.write_u64(params.length.to_bits());
        for (i, s) in states.iter().enumerate() {
            let rep = s.representative();
            index.insert(rep.clone(), i);
            mode_window = mode_window.max(rep.max_abs_mode());
            hash.write_u64(rep.occupations().len() as u64);
            for &(n, r) in rep.occupations() {
                hash.write_u64(n as u64);
                hash.write_u64(u64::from(r));
            }
        }
        Self {
            params,
            spec,
            options,
            states,
            index,
            mode_window,
            warnings,
            fingerprint: hash.finish(),
        }
    }
}

/// `ceil(log2(dim))`, zero for `dim <= 1`.
pub fn qubits_for_dim(dim: usize) -> u32 {
    if dim <= 1 {
        0
    } else {
        usize::BITS - (dim - 1).leading_zeros()
    }
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Self(0xcbf2_9ce4_8422_2325)
    }

    fn write_u64(&mut self, v: u64) {
        for b in v.to_le_bytes() {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

/// Enumerates the zero-momentum, parity-even sector below the truncation.
pub fn enumerate_basis(
    params: &ModelParams,
    spec: TruncationSpec,
    options: &EnumerationOptions,
) -> Result<TruncatedBasis> {
    match spec {
        TruncationSpec::EnergyCutoff(e_max) => {
            if !(e_max >= 0.0) || !e_max.is_finite() {
                return Err(Error::InvalidParameter("energy cutoff must be non-negative"));
            }
            let states = sector_below(params, e_max, options.even_particle_number_only);
            Ok(TruncatedBasis::from_entries(
                *params,
                spec,
                *options,
                states,
                Vec::new(),
            ))
        }
        TruncationSpec::QubitCount(n_q) => {
            if n_q == 0 || n_q >= usize::BITS {
                return Err(Error::InvalidParameter("qubit count must be in 1..64"));
            }
            if !(options.ceiling_growth > 1.0) || !(options.initial_ceiling > 0.0) {
                return Err(Error::InvalidParameter("ceiling search must grow from a positive start"));
            }
            let target = 1usize << n_q;
            let mut ceiling = options.initial_ceiling * params.mass;
            loop {
                let mut states = sector_below(params, ceiling, options.even_particle_number_only);
                if states.len() >= target {
                    let warnings = boundary_warning(&states, target).into_iter().collect();
                    states.truncate(target);
                    return Ok(TruncatedBasis::from_entries(
                        *params, spec, *options, states, warnings,
                    ));
                }
                let next = ceiling * options.ceiling_growth;
                if next > options.max_ceiling * params.mass {
                    return Err(Error::CutoffTooSmall {
                        required: target,
                        found: states.len(),
                        ceiling,
                    });
                }
                ceiling = next;
            }
        }
    }
}

fn boundary_warning(sorted: &[BasisEntry], kept: usize) -> Option<BasisWarning> {
    match (sorted.get(kept.wrapping_sub(1)), sorted.get(kept)) {
        (Some(last), Some(next)) if last.energy == next.energy => {
            Some(BasisWarning::DegenerateBoundary {
                energy: last.energy,
                kept,
            })
        }
        _ => None,
    }
}

/// All canonical zero-momentum states with energy `<= e_max`, sorted.
fn sector_below(params: &ModelParams, e_max: f64, even_only: bool) -> Vec<BasisEntry> {
    let mut out = Vec::new();
    for_each_zero_momentum_state(params, e_max, |state| {
        if even_only && state.particle_number() % 2 == 1 {
            return;
        }
        if !state.is_canonical() {
            return;
        }
        let energy = state.energy(params);
        if energy <= e_max {
            out.push(BasisEntry {
                class: ParityClass::new(state),
                energy,
            });
        }
    });
    out.sort_by(|a, b| {
        a.energy
            .total_cmp(&b.energy)
            .then_with(|| a.representative().cmp(b.representative()))
    });
    out
}

/// Depth-first walk over every zero-momentum Fock state whose energy can lie
/// below `e_max`. Callers re-check the energy with [`FockState::energy`].
pub(crate) fn for_each_zero_momentum_state<F: FnMut(&FockState)>(
    params: &ModelParams,
    e_max: f64,
    mut visit: F,
) {
    let Some(window) = params.mode_window(e_max) else {
        if e_max >= 0.0 {
            visit(&FockState::vacuum());
        }
        return;
    };
    // Large |n| first: heavy modes have few admissible occupations.
    let mut modes: Vec<i32> = Vec::with_capacity(2 * window as usize + 1);
    for a in (1..=window as i32).rev() {
        modes.push(a);
        modes.push(-a);
    }
    modes.push(0);
    let omegas: Vec<f64> = modes.iter().map(|&n| params.omega(n)).collect();
    let slack = 1e-9 * (1.0 + e_max);
    let momentum_cost = 2.0 * PI / params.length;
    // Largest |n| still available from position i onwards.
    let reach: Vec<i64> = modes.iter().map(|&n| i64::from(n.unsigned_abs())).collect();

    struct Walk<'a, F> {
        modes: &'a [i32],
        omegas: &'a [f64],
        reach: &'a [i64],
        budget: f64,
        slack: f64,
        momentum_cost: f64,
        stack: Vec<(i32, u32)>,
        visit: F,
    }

    impl<F: FnMut(&FockState)> Walk<'_, F> {
        fn go(&mut self, i: usize, energy: f64, momentum: i64) {
            let remaining = self.budget - energy;
            // Cancelling momentum P costs at least 2π|P|/L in energy.
            if self.momentum_cost * momentum.unsigned_abs() as f64 > remaining + self.slack {
                return;
            }
            if i == self.modes.len() {
                if momentum == 0 {
                    let mut occ = self.stack.clone();
                    occ.sort_unstable();
                    (self.visit)(&FockState::from_sorted_unchecked(occ));
                }
                return;
            }
            if momentum != 0 && self.reach[i] == 0 {
                return;
            }
            let n = self.modes[i];
            let w = self.omegas[i];
            self.go(i + 1, energy, momentum);
            let mut r = 1u32;
            loop {
                let e = energy + w * f64::from(r);
                if e > self.budget + self.slack {
                    break;
                }
                self.stack.push((n, r));
                self.go(i + 1, e, momentum + i64::from(n) * i64::from(r));
                self.stack.pop();
                r += 1;
            }
        }
    }

    let mut walk = Walk {
        modes: &modes,
        omegas: &omegas,
        reach: &reach,
        budget: e_max,
        slack,
        momentum_cost,
        stack: Vec::new(),
        visit: &mut visit,
    };
    walk.go(0, 0.0, 0);
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn p16() -> ModelParams {
        ModelParams::new(1.0, 16.0, 1.0).unwrap()
    }

    #[test]
    fn dispersion_values() {
        let p = p16();
        assert_eq!(dispersion(0, &p), (0.0, 1.0));
        let (k, w) = dispersion(1, &p);
        assert!((k - PI / 8.0).abs() < 1e-15);
        // sqrt(1 + (π/8)²) from an independent 30-digit evaluation.
        assert!((w - 1.074_342_854_384_493_6).abs() < 1e-14);
        assert_eq!(dispersion(-1, &p).1, w);
    }

    #[test]
    fn energies_and_momenta() {
        let p = p16();
        assert_eq!(FockState::vacuum().energy(&p), 0.0);
        assert_eq!(FockState::from_occupations([(0, 2)]).energy(&p), 2.0);
        let pair = FockState::from_occupations([(1, 1), (-1, 1)]);
        assert!((pair.energy(&p) - 2.148_685_708_768_987_2).abs() < 1e-13);
        assert_eq!(FockState::vacuum().momentum(), 0);
        assert_eq!(pair.momentum(), 0);
        assert_eq!(FockState::from_occupations([(2, 1), (-1, 1)]).momentum(), 1);
    }

    #[test]
    fn parity_examples() {
        let s = FockState::from_occupations([(1, 2)]);
        assert_eq!(s.parity_image(), FockState::from_occupations([(-1, 2)]));
        let z = FockState::from_occupations([(0, 3)]);
        assert_eq!(z.parity_image(), z);
        let t = FockState::from_occupations([(2, 1), (-1, 1)]);
        assert_eq!(
            t.parity_image(),
            FockState::from_occupations([(-2, 1), (1, 1)])
        );
    }

    #[test]
    fn beta_tracks_self_conjugacy() {
        let pair = ParityClass::new(&FockState::from_occupations([(3, 1), (-3, 1)]));
        assert!(pair.is_self_conjugate());
        assert_eq!(pair.beta(), 0.5);
        let asym = ParityClass::new(&FockState::from_occupations([(2, 1), (-1, 2)]));
        assert!(!asym.is_self_conjugate());
        assert_eq!(asym.beta(), core::f64::consts::FRAC_1_SQRT_2);
        assert!(asym.representative().is_canonical());
    }

    #[test]
    fn small_energy_cutoff() {
        let b = enumerate_basis(&p16(), TruncationSpec::EnergyCutoff(2.0), &Default::default())
            .unwrap();
        let reps: Vec<FockState> = b.states().iter().map(|s| s.representative().clone()).collect();
        assert_eq!(
            reps,
            vec![
                FockState::vacuum(),
                FockState::from_occupations([(0, 1)]),
                FockState::from_occupations([(0, 2)]),
            ]
        );
        assert_eq!(b.energies(), vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn zero_cutoff_is_vacuum_only() {
        let b = enumerate_basis(&p16(), TruncationSpec::EnergyCutoff(0.0), &Default::default())
            .unwrap();
        assert_eq!(b.len(), 1);
        assert!(b.states()[0].representative().is_vacuum());
        assert_eq!(b.qubit_count(), 0);
    }

    #[test]
    fn qubit_count_matches_prefix_of_cutoff_basis() {
        let p = p16();
        let q = enumerate_basis(&p, TruncationSpec::QubitCount(2), &Default::default()).unwrap();
        let wide =
            enumerate_basis(&p, TruncationSpec::EnergyCutoff(6.0), &Default::default()).unwrap();
        assert_eq!(q.len(), 4);
        assert_eq!(q.states(), &wide.states()[..4]);
        assert_eq!(q.index_of(&FockState::vacuum()), Some(0));
    }

    #[test]
    fn qubit_count_search_gives_up() {
        let opts = EnumerationOptions {
            max_ceiling: 3.0,
            ..Default::default()
        };
        let err = enumerate_basis(&p16(), TruncationSpec::QubitCount(8), &opts).unwrap_err();
        assert!(matches!(err, Error::CutoffTooSmall { required: 256, .. }));
    }

    #[test]
    fn degenerate_boundary_is_reported() {
        let p = p16();
        // {1,-1,2,-2,3,-3} and {1:2,2:1,-3:1,...} style ties share the |n| multiset;
        // here two synthetic entries with equal energy straddle the cut.
        let a = FockState::from_occupations([(1, 1), (-1, 1), (2, 1), (-2, 1), (3, 1), (-3, 1)]);
        let b = FockState::from_occupations([(1, 2), (2, 2), (-3, 2)]);
        assert_eq!(a.energy(&p), b.energy(&p));
        let entries = vec![
            BasisEntry { class: ParityClass::new(&FockState::vacuum()), energy: 0.0 },
            BasisEntry { class: ParityClass::new(&a), energy: a.energy(&p) },
            BasisEntry { class: ParityClass::new(&b), energy: b.energy(&p) },
        ];
        assert_eq!(
            boundary_warning(&entries, 2),
            Some(BasisWarning::DegenerateBoundary { energy: a.energy(&p), kept: 2 })
        );
        assert_eq!(boundary_warning(&entries, 1), None);
        assert_eq!(boundary_warning(&entries, 3), None);
    }

    #[test]
    fn lookup_accepts_either_orientation() {
        let b = enumerate_basis(&p16(), TruncationSpec::EnergyCutoff(4.0), &Default::default())
            .unwrap();
        let s = FockState::from_occupations([(2, 1), (-1, 2)]);
        let i = b.index_of(&s).unwrap();
        assert_eq!(b.index_of(&s.parity_image()), Some(i));
    }

    #[test]
    fn even_filter() {
        let b = enumerate_basis(&p16(), TruncationSpec::EnergyCutoff(4.0), &EnumerationOptions::even_only())
            .unwrap();
        assert!(b.states().iter().all(|s| s.particle_number() % 2 == 0));
        assert_eq!(b.states()[1].representative(), &FockState::from_occupations([(0, 2)]));
    }

    #[test]
    fn qubits_for_dim_values() {
        assert_eq!(qubits_for_dim(1), 0);
        assert_eq!(qubits_for_dim(2), 1);
        assert_eq!(qubits_for_dim(3), 2);
        assert_eq!(qubits_for_dim(1024), 10);
        assert_eq!(qubits_for_dim(1025), 11);
    }
}
