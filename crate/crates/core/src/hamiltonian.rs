//! Free Hamiltonian and normal-ordered quartic interaction on a truncated
//! basis.
//!
//! The interaction is expanded as
//!
//! ```text
//! V = gL/4 Σ_{n1+n2+n3+n4=0} Π_i (L ω_{n_i})^{-1/2}
//!       ( aaaa + 4 a†aaa + 6 a†a†aa + 4 a†a†a†a + a†a†a†a† )
//! ```
//!
//! with creation operators carrying the negated mode labels. Instead of
//! looping over ordered quadruples we walk annihilated and created mode
//! multisets and multiply by the number of orderings that map onto each.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fock::{qubits_for_dim, FockState, ModelParams, ParityClass, TruncatedBasis};

/// Modes and energies that images of the interaction may occupy. Anything
/// outside is dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageWindow {
    pub max_mode: u32,
    pub max_energy: f64,
}

impl ImageWindow {
    pub fn for_basis(basis: &TruncatedBasis) -> Self {
        Self {
            max_mode: basis.mode_window(),
            max_energy: basis.max_energy(),
        }
    }
}

const CLASS_WEIGHTS: [f64; 5] = [1.0, 4.0, 6.0, 4.0, 1.0];
const FACTORIALS: [f64; 5] = [1.0, 1.0, 2.0, 6.0, 24.0];

/// `V|s⟩` expanded over Fock states, with amplitudes of identical images
/// summed. The result is sorted by the Fock-state order.
pub fn apply_interaction(
    state: &FockState,
    params: &ModelParams,
    window: &ImageWindow,
) -> Vec<(FockState, f64)> {
    let mut images: BTreeMap<FockState, f64> = BTreeMap::new();
    if params.coupling == 0.0 {
        return Vec::new();
    }
    let prefactor = params.coupling * params.length / 4.0;
    let slack = 1e-9 * (1.0 + window.max_energy);
    let k = window.max_mode as i32;
    let inv_sqrt_lw = |n: i32| 1.0 / libm::sqrt(params.length * params.omega(n));

    let occ = state.occupations();
    for annihilated in 0..=4usize {
        let created = 4 - annihilated;
        if annihilated as u32 > state.particle_number() {
            continue;
        }
        let class_weight = prefactor * CLASS_WEIGHTS[created];
        for_each_submultiset(occ, annihilated, |take| {
            // take[j] particles removed from occ[j].
            let mut factor = class_weight * FACTORIALS[annihilated];
            let mut removed_momentum = 0i64;
            let mut remaining: Vec<(i32, u32)> = Vec::with_capacity(occ.len());
            for (j, &(n, r)) in occ.iter().enumerate() {
                let t = take[j];
                if t > 0 {
                    factor /= FACTORIALS[t as usize];
                    for q in 0..t {
                        factor *= libm::sqrt(f64::from(r - q)) * inv_sqrt_lw(n);
                    }
                    removed_momentum += i64::from(n) * i64::from(t);
                }
                if r > t {
                    remaining.push((n, r - t));
                }
            }
            let intermediate = FockState::from_sorted_unchecked(remaining);
            let budget = window.max_energy - intermediate.energy(params);
            if budget < -slack {
                return;
            }
            for_each_creation(
                created,
                removed_momentum,
                k,
                budget + slack,
                params,
                |modes| {
                    let mut amp = factor * FACTORIALS[created];
                    let mut added: Vec<(i32, u32)> = Vec::with_capacity(created);
                    for &m in modes {
                        match added.last_mut() {
                            Some((last, u)) if *last == m => *u += 1,
                            _ => added.push((m, 1)),
                        }
                    }
                    let mut occ_out: Vec<(i32, u32)> = Vec::with_capacity(intermediate.occupations().len() + created);
                    occ_out.extend_from_slice(intermediate.occupations());
                    for &(m, u) in &added {
                        amp /= FACTORIALS[u as usize];
                        let before = intermediate.occupation(m);
                        for q in 1..=u {
                            amp *= libm::sqrt(f64::from(before + q)) * inv_sqrt_lw(m);
                        }
                        match occ_out.binary_search_by_key(&m, |&(n, _)| n) {
                            Ok(i) => occ_out[i].1 += u,
                            Err(i) => occ_out.insert(i, (m, u)),
                        }
                    }
                    let image = FockState::from_sorted_unchecked(occ_out);
                    *images.entry(image).or_insert(0.0) += amp;
                },
            );
        });
    }
    images.into_iter().collect()
}

/// Visits every way of removing `size` particles from `occ`, as per-mode
/// removal counts.
fn for_each_submultiset<F: FnMut(&[u32])>(occ: &[(i32, u32)], size: usize, mut visit: F) {
    fn rec<F: FnMut(&[u32])>(
        occ: &[(i32, u32)],
        j: usize,
        left: u32,
        take: &mut Vec<u32>,
        visit: &mut F,
    ) {
        if j == occ.len() {
            if left == 0 {
                visit(take);
            }
            return;
        }
        let cap = occ[j].1.min(left);
        for t in 0..=cap {
            take[j] = t;
            rec(occ, j + 1, left - t, take, visit);
        }
        take[j] = 0;
    }
    let mut take = alloc::vec![0u32; occ.len()];
    rec(occ, 0, size as u32, &mut take, &mut visit);
}

/// Visits non-decreasing mode tuples of length `count` in `[-k, k]` whose
/// modes sum to `momentum` and whose energies sum to at most `budget`.
fn for_each_creation<F: FnMut(&[i32])>(
    count: usize,
    momentum: i64,
    k: i32,
    budget: f64,
    params: &ModelParams,
    mut visit: F,
) {
    #[allow(clippy::too_many_arguments)]
    fn rec<F: FnMut(&[i32])>(
        left: usize,
        lo: i32,
        momentum: i64,
        k: i32,
        budget: f64,
        params: &ModelParams,
        modes: &mut Vec<i32>,
        visit: &mut F,
    ) {
        if left == 0 {
            if momentum == 0 {
                visit(modes);
            }
            return;
        }
        if budget < params.mass * left as f64 {
            return;
        }
        let l = left as i64;
        for m in lo..=k {
            let rest = momentum - i64::from(m);
            let rest_left = l - 1;
            // Remaining modes are all >= m and <= k.
            if rest < i64::from(m) * rest_left {
                break;
            }
            if rest > i64::from(k) * rest_left {
                continue;
            }
            let w = params.omega(m);
            if w > budget {
                continue;
            }
            modes.push(m);
            rec(left - 1, m, rest, k, budget - w, params, modes, visit);
            modes.pop();
        }
    }
    let mut modes = Vec::with_capacity(count);
    rec(count, -k, momentum, k, budget, params, &mut modes, &mut visit);
}

/// `⟨î|V|ĵ⟩` between parity-even basis states.
///
/// With `V` parity invariant the four orbit terms fold to
/// `2 β_i β_j (⟨r_i|V|r_j⟩ + ⟨P r_i|V|r_j⟩)`.
pub fn interaction_matrix_element(i: &ParityClass, j: &ParityClass, params: &ModelParams) -> f64 {
    let target = i.representative();
    let window = ImageWindow {
        max_mode: target.max_abs_mode(),
        max_energy: target.energy(params),
    };
    let mirrored = target.parity_image();
    let mut overlap = 0.0;
    for (image, amp) in apply_interaction(j.representative(), params, &window) {
        if image == *target {
            overlap += amp;
        }
        if image == mirrored {
            overlap += amp;
        }
    }
    2.0 * i.beta() * j.beta() * overlap
}

/// Real symmetric matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    certified: bool,
}

impl SymmetricOperator {
    /// Builds the operator from its upper triangle (`row <= col`). Entries
    /// are mirrored, so the stored matrix is exactly symmetric. Duplicate
    /// coordinates are summed; exact zeros are not stored.
    pub fn from_upper_triplets(dim: usize, mut upper: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(r, c, _) in &upper {
            if r > c || c >= dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c.max(r) + 1,
                });
            }
        }
        upper.sort_by_key(|e| (e.0, e.1));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(upper.len());
        for (r, c, v) in upper {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        let mut full: Vec<(usize, usize, f64)> = Vec::with_capacity(2 * merged.len());
        for &(r, c, v) in &merged {
            if v == 0.0 {
                continue;
            }
            full.push((r, c, v));
            if r != c {
                full.push((c, r, v));
            }
        }
        Ok(Self::from_sorted_full(dim, full))
    }

    /// Builds from a full coordinate list; fails unless every entry has a
    /// bitwise-equal mirror.
    pub fn from_full_triplets(dim: usize, mut full: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(r, c, _) in &full {
            if r >= dim || c >= dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c.max(r) + 1,
                });
            }
        }
        full.retain(|e| e.2 != 0.0);
        full.sort_by_key(|e| (e.0, e.1));
        for w in full.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(Error::SymmetryViolation {
                    row: w[0].0,
                    col: w[0].1,
                });
            }
        }
        Self::from_sorted_full(dim, full).certify()
    }

    fn from_sorted_full(dim: usize, mut full: Vec<(usize, usize, f64)>) -> Self {
        full.sort_by_key(|e| (e.0, e.1));
        let mut row_ptr = alloc::vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(full.len());
        let mut vals = Vec::with_capacity(full.len());
        for &(r, c, v) in &full {
            row_ptr[r + 1] += 1;
            cols.push(c);
            vals.push(v);
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            dim,
            row_ptr,
            cols,
            vals,
            certified: false,
        }
    }

    pub fn diagonal_matrix(diag: &[f64]) -> Self {
        let upper = diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        let mut op = Self::from_upper_triplets(diag.len(), upper).expect("diagonal entries in range");
        op.certified = true;
        op
    }

    /// Checks `A[i][j] == A[j][i]` bitwise.
    pub fn verify_symmetry(&self) -> Result<()> {
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                if self.get(c, r).to_bits() != v.to_bits() {
                    return Err(Error::SymmetryViolation { row: r, col: c });
                }
            }
        }
        Ok(())
    }

    fn certify(mut self) -> Result<Self> {
        self.verify_symmetry()?;
        self.certified = true;
        Ok(self)
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn row_nnz(&self, r: usize) -> usize {
        self.row_ptr[r + 1] - self.row_ptr[r]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => 0.0,
        }
    }

    /// Coordinate triplets in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// Largest absolute row sum; bounds the spectral norm.
    pub fn inf_norm(&self) -> f64 {
        (0..self.dim)
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `y = A x` for a generic scalar type.
    pub fn apply<T>(&self, x: &[T], y: &mut [T])
    where
        T: Copy + core::ops::AddAssign + core::ops::Mul<f64, Output = T> + Default,
    {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = T::default();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += x[self.cols[k]] * self.vals[k];
            }
            *out = acc;
        }
    }

    /// `diag(d) + scale · self`, exactly symmetric.
    pub fn shifted(&self, diag: &[f64], scale: f64) -> Self {
        assert_eq!(diag.len(), self.dim);
        let mut upper: Vec<(usize, usize, f64)> = Vec::with_capacity(self.nnz() / 2 + self.dim);
        for (r, &d) in diag.iter().enumerate() {
            upper.push((r, r, d));
        }
        for (r, c, v) in self.triplets() {
            if r <= c {
                upper.push((r, c, scale * v));
            }
        }
        let mut op = Self::from_upper_triplets(self.dim, upper).expect("entries in range");
        op.certified = self.certified;
        op
    }

    /// `scale · self`.
    pub fn scaled(&self, scale: f64) -> Self {
        let mut op = self.clone();
        for v in &mut op.vals {
            *v *= scale;
        }
        if scale == 0.0 {
            return Self::from_upper_triplets(self.dim, Vec::new()).expect("empty");
        }
        op
    }

    /// Simultaneous row/column permutation `P A Pᵀ` with `perm[old] = new`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.dim);
        let full = self.triplets().map(|(r, c, v)| (perm[r], perm[c], v)).collect();
        let mut op = Self::from_sorted_full(self.dim, full);
        op.certified = self.certified;
        op
    }

    /// Embeds into a larger dimension, filling the new diagonal with `penalty`.
    pub fn padded(&self, dim: usize, penalty: f64) -> Self {
        assert!(dim >= self.dim);
        let mut full: Vec<(usize, usize, f64)> = self.triplets().collect();
        if penalty != 0.0 {
            full.extend((self.dim..dim).map(|i| (i, i, penalty)));
        }
        let mut op = Self::from_sorted_full(dim, full);
        op.certified = self.certified;
        op
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.dim * self.dim];
        for (r, c, v) in self.triplets() {
            out[r * self.dim + c] = v;
        }
        out
    }
}

/// `H₀`, `V` and `H = H₀ + V` on one basis.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    pub free_energies: Vec<f64>,
    pub interaction: SymmetricOperator,
    pub full: SymmetricOperator,
    pub coupling: f64,
    pub basis_fingerprint: u64,
}

impl Hamiltonian {
    pub fn dim(&self) -> usize {
        self.free_energies.len()
    }

    /// `H₀ + λ V`.
    pub fn with_coupling_scale(&self, lambda: f64) -> SymmetricOperator {
        self.interaction.shifted(&self.free_energies, lambda)
    }
}

/// Upper-triangle part (`row <= j`) of column `j` of `V`.
///
/// Images outside the basis are dropped, which is the truncation itself.
pub fn interaction_column(basis: &TruncatedBasis, j: usize) -> Vec<(usize, f64)> {
    let params = basis.params();
    let window = ImageWindow::for_basis(basis);
    let source = &basis.states()[j].class;
    let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
    for (image, amp) in apply_interaction(source.representative(), params, &window) {
        let canonical = image.canonical();
        let Some(i) = basis.index_of_canonical(&canonical) else {
            continue;
        };
        if i > j {
            continue;
        }
        let target = &basis.states()[i].class;
        let multiplicity = if target.is_self_conjugate() { 2.0 } else { 1.0 };
        *acc.entry(i).or_insert(0.0) += multiplicity * amp;
    }
    acc.into_iter()
        .map(|(i, overlap)| {
            let bi = basis.states()[i].class.beta();
            (i, 2.0 * bi * source.beta() * overlap)
        })
        .collect()
}

/// Assembles from precomputed columns (one per basis state, any order of
/// computation). Values are used as given; nothing is accumulated across
/// columns.
pub fn assemble_from_columns(
    basis: &TruncatedBasis,
    columns: Vec<Vec<(usize, f64)>>,
) -> Result<Hamiltonian> {
    let dim = basis.len();
    if dim == 0 {
        return Err(Error::InvalidParameter("basis is empty"));
    }
    if columns.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: columns.len(),
        });
    }
    let mut upper = Vec::new();
    for (j, col) in columns.into_iter().enumerate() {
        upper.extend(col.into_iter().map(|(i, v)| (i, j, v)));
    }
    let interaction = SymmetricOperator::from_upper_triplets(dim, upper)?.certify()?;
    let free_energies = basis.energies();
    let full = interaction.shifted(&free_energies, 1.0).certify()?;
    Ok(Hamiltonian {
        free_energies,
        interaction,
        full,
        coupling: basis.params().coupling,
        basis_fingerprint: basis.fingerprint(),
    })
}

/// `H = diag(E_i) + V` restricted to `basis`.
pub fn assemble(basis: &TruncatedBasis) -> Result<Hamiltonian> {
    let columns = (0..basis.len()).map(|j| interaction_column(basis, j)).collect();
    assemble_from_columns(basis, columns)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SparsityReport {
    /// `ceil(log2(dim))`.
    pub qubits: u32,
    /// Largest number of stored nonzeros in a row.
    pub max_row_nonzeros: usize,
    pub total_nonzeros: usize,
}

/// Row sparsity of `op`. Exact zeros are never stored, so an all-zero
/// matrix reports `max_row_nonzeros == 0`.
pub fn sparsity(op: &SymmetricOperator) -> SparsityReport {
    SparsityReport {
        qubits: qubits_for_dim(op.dim()),
        max_row_nonzeros: (0..op.dim()).map(|r| op.row_nnz(r)).max().unwrap_or(0),
        total_nonzeros: op.nnz(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{enumerate_basis, EnumerationOptions, TruncationSpec};
    use alloc::vec;

    fn params(g: f64) -> ModelParams {
        ModelParams::new(1.0, 16.0, g).unwrap()
    }

    fn wide() -> ImageWindow {
        ImageWindow {
            max_mode: 4,
            max_energy: 20.0,
        }
    }

    #[test]
    fn vacuum_creates_four_zero_modes() {
        let p = params(1.0);
        let images = apply_interaction(&FockState::vacuum(), &p, &wide());
        let four = FockState::from_occupations([(0, 4)]);
        let amp = images.iter().find(|(s, _)| *s == four).unwrap().1;
        assert!((amp - libm::sqrt(24.0) / 64.0).abs() < 1e-15);
        assert!(images.iter().all(|(s, _)| s.particle_number() == 4));
    }

    #[test]
    fn vacuum_to_two_particles_vanishes() {
        let p = params(1.0);
        let images = apply_interaction(&FockState::vacuum(), &p, &wide());
        assert!(images.iter().all(|(s, _)| s.particle_number() != 2));
    }

    #[test]
    fn doubly_occupied_zero_mode_diagonal() {
        let p = params(1.0);
        let s = FockState::from_occupations([(0, 2)]);
        let images = apply_interaction(&s, &p, &wide());
        let diag = images.iter().find(|(t, _)| *t == s).unwrap().1;
        assert!((diag - 3.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn images_conserve_momentum() {
        let p = params(2.0);
        let s = FockState::from_occupations([(2, 1), (-1, 2), (0, 1)]);
        let images = apply_interaction(&s, &p, &wide());
        assert!(!images.is_empty());
        assert!(images.iter().all(|(t, _)| t.momentum() == 0));
    }

    #[test]
    fn parity_matrix_elements() {
        let p = params(1.0);
        let vac = ParityClass::new(&FockState::vacuum());
        let one = ParityClass::new(&FockState::from_occupations([(0, 1)]));
        let four = ParityClass::new(&FockState::from_occupations([(0, 4)]));
        assert_eq!(interaction_matrix_element(&vac, &vac, &p), 0.0);
        assert_eq!(interaction_matrix_element(&one, &one, &p), 0.0);
        let v = interaction_matrix_element(&four, &vac, &p);
        assert!((v - libm::sqrt(24.0) / 64.0).abs() < 1e-15);
        let w = interaction_matrix_element(&vac, &four, &p);
        assert!((v - w).abs() < 1e-15);
    }

    #[test]
    fn small_basis_assembly() {
        let p = params(1.0);
        let b = enumerate_basis(&p, TruncationSpec::EnergyCutoff(2.0), &EnumerationOptions::default())
            .unwrap();
        let h = assemble(&b).unwrap();
        assert_eq!(h.free_energies, vec![0.0, 1.0, 2.0]);
        assert_eq!(h.interaction.get(0, 2), 0.0);
        assert_eq!(h.interaction.get(2, 0), 0.0);
        assert!((h.interaction.get(2, 2) - 3.0 / 16.0).abs() < 1e-15);
        assert_eq!(h.full.get(0, 0), 0.0);
        let rep = sparsity(&h.full);
        assert_eq!(rep.qubits, 2);
        assert_eq!(rep.max_row_nonzeros, 1);
        assert!(h.full.is_certified());
    }

    #[test]
    fn zero_coupling_is_diagonal() {
        let p = params(0.0);
        let b = enumerate_basis(&p, TruncationSpec::QubitCount(5), &EnumerationOptions::default())
            .unwrap();
        let h = assemble(&b).unwrap();
        assert_eq!(h.interaction.nnz(), 0);
        for (i, e) in b.energies().into_iter().enumerate() {
            assert_eq!(h.full.get(i, i), e);
        }
    }

    #[test]
    fn diagonal_sparsity() {
        let op = SymmetricOperator::diagonal_matrix(&[0.0, 1.0, 2.0]);
        let rep = sparsity(&op);
        assert_eq!((rep.max_row_nonzeros, rep.qubits), (1, 2));
    }

    #[test]
    fn full_triplets_reject_asymmetry() {
        let err = SymmetricOperator::from_full_triplets(2, vec![(0, 1, 1.0), (1, 0, 1.5)]).unwrap_err();
        assert!(matches!(err, Error::SymmetryViolation { .. }));
        let ok = SymmetricOperator::from_full_triplets(2, vec![(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        assert_eq!(ok.get(1, 0), 1.0);
    }

    #[test]
    fn selection_rule_on_particle_number() {
        let p = params(1.0);
        let b = enumerate_basis(&p, TruncationSpec::QubitCount(7), &EnumerationOptions::default())
            .unwrap();
        let h = assemble(&b).unwrap();
        for (r, c, _) in h.interaction.triplets() {
            let dn = b.states()[r].particle_number() as i64 - b.states()[c].particle_number() as i64;
            assert!(matches!(dn, 0 | 2 | -2 | 4 | -4), "({r},{c}) dn={dn}");
        }
    }
}
