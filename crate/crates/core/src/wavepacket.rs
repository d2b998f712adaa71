//! State vectors and the free two-wavepacket initial state.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{FockState, TruncatedBasis};
use crate::linalg;

/// Complex amplitudes over a truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    basis: u64,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(basis: &TruncatedBasis, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                found: amplitudes.len(),
            });
        }
        Ok(Self {
            basis: basis.fingerprint(),
            amplitudes,
        })
    }

    pub(crate) fn from_parts(basis: u64, amplitudes: Vec<Complex64>) -> Self {
        Self { basis, amplitudes }
    }

    /// The unit vector on basis element `index`.
    pub fn basis_state(basis: &TruncatedBasis, index: usize) -> Result<Self> {
        if index >= basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                found: index + 1,
            });
        }
        let mut amps = alloc::vec![Complex64::default(); basis.len()];
        amps[index] = Complex64::new(1.0, 0.0);
        Self::new(basis, amps)
    }

    pub fn vacuum(basis: &TruncatedBasis) -> Self {
        Self::basis_state(basis, 0).expect("basis always holds the vacuum")
    }

    pub fn basis_fingerprint(&self) -> u64 {
        self.basis
    }

    pub fn belongs_to(&self, basis: &TruncatedBasis) -> bool {
        self.basis == basis.fingerprint()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.amplitudes)
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        linalg::inner(&self.amplitudes, &other.amplitudes)
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Euclidean distance `‖self − other‖`.
    pub fn distance(&self, other: &Self) -> f64 {
        libm::sqrt(
            self.amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum(),
        )
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Reorders amplitudes with `perm[old] = new`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut out = alloc::vec![Complex64::default(); self.len()];
        for (old, &new) in perm.iter().enumerate() {
            out[new] = self.amplitudes[old];
        }
        Self::from_parts(self.basis, out)
    }
}

/// Mean momentum and momentum-space width of each packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavepacketSpec {
    pub p0: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PacketWarning {
    /// `1/p0 ≪ δ ≪ L` does not hold comfortably.
    WidthOutsideAdvisoryRange { p0: f64, delta: f64, length: f64 },
}

impl WavepacketSpec {
    pub fn new(p0: f64, delta: f64) -> Result<Self> {
        if !(p0 > 0.0 && p0.is_finite()) {
            return Err(Error::InvalidParameter("packet momentum must be positive"));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter("packet width must be positive"));
        }
        Ok(Self { p0, delta })
    }

    /// Flags widths that violate `1/p0 < δ < L` (strictly, no margin).
    pub fn advisory(&self, length: f64) -> Option<PacketWarning> {
        if 1.0 / self.p0 < self.delta && self.delta < length {
            None
        } else {
            Some(PacketWarning::WidthOutsideAdvisoryRange {
                p0: self.p0,
                delta: self.delta,
                length,
            })
        }
    }
}

/// Basis index of the pair state `|m, −m⟩` for every `m >= 0` present.
/// `m = 0` refers to `{0:2}`.
pub fn pair_index_table(basis: &TruncatedBasis) -> BTreeMap<u32, usize> {
    let mut out = BTreeMap::new();
    for (i, s) in basis.states().iter().enumerate() {
        if let Some(m) = pair_mode(s.representative()) {
            out.insert(m, i);
        }
    }
    out
}

/// `Some(m)` when `state` is `{m:1, −m:1}` or `{0:2}`.
pub fn pair_mode(state: &FockState) -> Option<u32> {
    match state.occupations() {
        [(0, 2)] => Some(0),
        [(a, 1), (b, 1)] if *a == -*b && *b > 0 => Some(*b as u32),
        _ => None,
    }
}

/// Unnormalised coefficient of `|m, −m⟩` in the free two-packet state.
pub fn pair_coefficient(m: u32, spec: &WavepacketSpec, length: f64) -> f64 {
    let d2 = spec.delta * spec.delta;
    if m == 0 {
        return core::f64::consts::SQRT_2 * libm::exp(-spec.p0 * spec.p0 * d2);
    }
    let k = 2.0 * core::f64::consts::PI * f64::from(m) / length;
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    sign * (libm::exp(-(spec.p0 - k) * (spec.p0 - k) * d2) + libm::exp(-(spec.p0 + k) * (spec.p0 + k) * d2))
}

/// Back-to-back packets centred at separation `L/2`, projected onto the
/// zero-momentum pair states present in `basis` and normalised.
pub fn two_packet_state(
    basis: &TruncatedBasis,
    spec: &WavepacketSpec,
) -> Result<(StateVector, Option<PacketWarning>)> {
    let table = pair_index_table(basis);
    if table.is_empty() {
        return Err(Error::EmptySupport);
    }
    let length = basis.params().length;
    let mut amps = alloc::vec![Complex64::default(); basis.len()];
    for (&m, &i) in &table {
        amps[i] = Complex64::new(pair_coefficient(m, spec, length), 0.0);
    }
    let norm = linalg::norm(&amps);
    if !(norm > 0.0) {
        return Err(Error::EmptySupport);
    }
    for a in &mut amps {
        *a /= norm;
    }
    Ok((StateVector::new(basis, amps)?, spec.advisory(length)))
}
