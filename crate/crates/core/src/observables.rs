//! Particle-number histograms and the two-particle separation density.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{ModelParams, TruncatedBasis};
use crate::wavepacket::{pair_index_table, StateVector};

/// Relative-coordinate wavefunction of the pair state `|n, −n⟩`.
pub fn pair_wavefunction(n: u32, y: f64, params: &ModelParams) -> f64 {
    let l = params.length;
    if n == 0 {
        libm::sqrt(2.0 / l)
    } else {
        2.0 / libm::sqrt(l) * libm::cos(params.momentum(n as i32) * y)
    }
}

/// `⟨ρ(y)⟩` on a uniform grid over `[0, L/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationDensity {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl SeparationDensity {
    /// Trapezoidal `∫ ρ dy`.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.grid, &self.values)
    }

    /// Trapezoidal `∫ y ρ dy`.
    pub fn first_moment(&self) -> f64 {
        let weighted: Vec<f64> = self.grid.iter().zip(&self.values).map(|(y, r)| y * r).collect();
        trapezoid(&self.grid, &weighted)
    }

    /// `∫ y ρ dy / ∫ ρ dy`, or `None` without pair support.
    pub fn mean_separation(&self) -> Option<f64> {
        let w = self.integral();
        (w > 0.0).then(|| self.first_moment() / w)
    }

    /// Grid index of the global maximum (first one on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    /// Positions of interior local maxima above `fraction` of the global
    /// maximum. The endpoints count when they exceed their one neighbour.
    pub fn peaks(&self, fraction: f64) -> Vec<f64> {
        let n = self.values.len();
        let top = self.values.iter().copied().fold(0.0, f64::max);
        if n < 2 || top <= 0.0 {
            return Vec::new();
        }
        let floor = fraction * top;
        let v = &self.values;
        (0..n)
            .filter(|&i| {
                let left = i == 0 || v[i] > v[i - 1];
                let right = i + 1 == n || v[i] >= v[i + 1];
                left && right && v[i] > floor
            })
            .map(|i| refine_peak(&self.grid, v, i))
            .collect()
    }

    /// Median gap between successive peaks above `fraction` of the maximum.
    pub fn fringe_spacing(&self, fraction: f64) -> Option<f64> {
        let peaks = self.peaks(fraction);
        if peaks.len() < 2 {
            return None;
        }
        let mut gaps: Vec<f64> = peaks.windows(2).map(|w| w[1] - w[0]).collect();
        gaps.sort_by(f64::total_cmp);
        let m = gaps.len();
        Some(if m % 2 == 1 {
            gaps[m / 2]
        } else {
            0.5 * (gaps[m / 2 - 1] + gaps[m / 2])
        })
    }
}

/// Parabolic interpolation of a sampled maximum.
fn refine_peak(grid: &[f64], v: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 == v.len() {
        return grid[i];
    }
    let denom = v[i - 1] - 2.0 * v[i] + v[i + 1];
    if denom >= 0.0 {
        return grid[i];
    }
    let shift = 0.5 * (v[i - 1] - v[i + 1]) / denom;
    grid[i] + shift * (grid[i + 1] - grid[i])
}

pub fn trapezoid(x: &[f64], f: &[f64]) -> f64 {
    x.windows(2)
        .zip(f.windows(2))
        .map(|(xs, fs)| 0.5 * (xs[1] - xs[0]) * (fs[0] + fs[1]))
        .sum()
}

/// Pair amplitudes `(m, c_m)` of `psi`, ascending in `m`.
pub fn pair_amplitudes(basis: &TruncatedBasis, psi: &StateVector) -> Result<Vec<(u32, Complex64)>> {
    if !psi.belongs_to(basis) {
        return Err(Error::BasisMismatch);
    }
    Ok(pair_index_table(basis)
        .into_iter()
        .map(|(m, i)| (m, psi.amplitudes()[i]))
        .collect())
}

/// `⟨ρ(y)⟩ = |Σ_n c_n φ_n(y)|²` on `grid_size` uniform points over `[0, L/2]`.
pub fn separation_density(basis: &TruncatedBasis, psi: &StateVector, grid_size: usize) -> Result<SeparationDensity> {
    if grid_size < 2 {
        return Err(Error::InsufficientPoints {
            required: 2,
            found: grid_size,
        });
    }
    let params = basis.params();
    let pairs = pair_amplitudes(basis, psi)?;
    let half = 0.5 * params.length;
    let grid: Vec<f64> = (0..grid_size)
        .map(|i| half * i as f64 / (grid_size - 1) as f64)
        .collect();
    let values = grid
        .iter()
        .map(|&y| {
            pairs
                .iter()
                .map(|&(m, c)| c * pair_wavefunction(m, y, params))
                .sum::<Complex64>()
                .norm_sqr()
        })
        .collect();
    Ok(SeparationDensity { grid, values })
}

/// Probability per particle number.
pub fn occupation_histogram(basis: &TruncatedBasis, psi: &StateVector) -> Result<BTreeMap<u32, f64>> {
    if !psi.belongs_to(basis) {
        return Err(Error::BasisMismatch);
    }
    let mut out = BTreeMap::new();
    for s in basis.states() {
        out.entry(s.particle_number()).or_insert(0.0);
    }
    for (s, a) in basis.states().iter().zip(psi.amplitudes()) {
        *out.get_mut(&s.particle_number()).expect("inserted above") += a.norm_sqr();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::exact_evolve;
    use crate::fock::{enumerate_basis, EnumerationOptions, TruncationSpec};
    use crate::hamiltonian::assemble;
    use crate::wavepacket::{two_packet_state, WavepacketSpec};

    fn basis(nq: u32, g: f64) -> TruncatedBasis {
        let p = ModelParams::new(1.0, 16.0, g).unwrap();
        enumerate_basis(&p, TruncationSpec::QubitCount(nq), &EnumerationOptions::default()).unwrap()
    }

    #[test]
    fn wavefunction_values() {
        let p = ModelParams::new(1.0, 16.0, 1.0).unwrap();
        assert!((pair_wavefunction(0, 3.3, &p) - libm::sqrt(0.125)).abs() < 1e-15);
        assert!((pair_wavefunction(1, 0.0, &p) - 0.5).abs() < 1e-15);
        assert!((pair_wavefunction(2, 4.0, &p) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_pair_is_flat() {
        let b = basis(4, 1.0);
        let idx = pair_index_table(&b)[&0];
        let psi = StateVector::basis_state(&b, idx).unwrap();
        let rho = separation_density(&b, &psi, 64).unwrap();
        for v in &rho.values {
            assert!((v - 0.125).abs() < 1e-15);
        }
        assert!((rho.integral() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn packet_density_normalised_and_peaked() {
        let b = basis(10, 1.0);
        let (psi, _) = two_packet_state(&b, &WavepacketSpec::new(2.5, 0.75).unwrap()).unwrap();
        let rho = separation_density(&b, &psi, 512).unwrap();
        assert!((rho.integral() - 1.0).abs() < 1e-6);
        assert!(rho.values.iter().all(|&v| v >= 0.0));
        let cell = rho.grid[1];
        assert!((rho.grid[rho.argmax()] - 8.0).abs() <= cell + 1e-12);
        let gap = rho.fringe_spacing(0.2).unwrap();
        let target = core::f64::consts::PI / 2.5;
        assert!((gap - target).abs() / target < 0.15, "gap {gap}");
    }

    #[test]
    fn histograms() {
        let b = basis(8, 1.0);
        let vac = StateVector::vacuum(&b);
        let h = occupation_histogram(&b, &vac).unwrap();
        assert_eq!(h[&0], 1.0);
        assert!(h.values().filter(|&&p| p > 0.0).count() == 1);
        let (psi, _) = two_packet_state(&b, &WavepacketSpec::new(2.5, 0.75).unwrap()).unwrap();
        let h = occupation_histogram(&b, &psi).unwrap();
        assert!((h[&2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn free_evolution_keeps_histogram() {
        let b = basis(8, 0.0);
        let h = assemble(&b).unwrap();
        let mut amps = alloc::vec![Complex64::default(); b.len()];
        for (i, a) in amps.iter_mut().enumerate() {
            *a = Complex64::new(1.0 / (1.0 + i as f64), 0.3 * libm::sin(i as f64));
        }
        let n = crate::linalg::norm(&amps);
        amps.iter_mut().for_each(|a| *a /= n);
        let psi = StateVector::new(&b, amps).unwrap();
        let before = occupation_histogram(&b, &psi).unwrap();
        let after = occupation_histogram(&b, &exact_evolve(&h.full, &psi, 3.0).unwrap()).unwrap();
        assert!((before.values().sum::<f64>() - 1.0).abs() < 1e-12);
        for (k, v) in &before {
            assert!((v - after[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn foreign_state_rejected() {
        let a = basis(4, 1.0);
        let b = basis(5, 1.0);
        let psi = StateVector::vacuum(&b);
        assert_eq!(occupation_histogram(&a, &psi).unwrap_err(), Error::BasisMismatch);
    }

    #[test]
    fn peaks_and_median() {
        let grid: Vec<f64> = (0..7).map(f64::from).collect();
        let rho = SeparationDensity {
            grid,
            values: alloc::vec![0.0, 1.0, 0.0, 1.0, 0.0, 0.1, 0.0],
        };
        assert_eq!(rho.peaks(0.2), [1.0, 3.0]);
        assert_eq!(rho.fringe_spacing(0.2), Some(2.0));
        assert_eq!(rho.fringe_spacing(0.05), Some(2.0));
    }
}
