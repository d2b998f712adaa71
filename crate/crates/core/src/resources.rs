//! Qubit and sparsity estimates for truncation versus a spatial lattice.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fock::{enumerate_basis, qubits_for_dim, EnumerationOptions, ModelParams, TruncationSpec};
use crate::hamiltonian::{assemble, sparsity, SparsityReport};

fn positive(x: f64, what: &'static str) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::InvalidParameter(what))
    }
}

/// `ceil(log2 dim)` for the zero-momentum sector below `e_max`.
pub fn ht_qubits_vs_emax(params: &ModelParams, e_max: f64) -> Result<u32> {
    positive(e_max, "E_max must be positive")?;
    let basis = enumerate_basis(params, TruncationSpec::EnergyCutoff(e_max), &EnumerationOptions::default())?;
    Ok(basis.qubit_count())
}

/// `round(n_q · ML · E_max/M)`.
pub fn lattice_qubits_vs_emax(qubits_per_site: u32, ml: f64, e_over_m: f64) -> Result<u64> {
    positive(ml, "ML must be positive")?;
    positive(e_over_m, "E_max/M must be positive")?;
    Ok(libm::round(f64::from(qubits_per_site) * ml * e_over_m) as u64)
}

/// `ε = (4!)² g² / (4π E_max² m²)`.
pub fn ht_truncation_error(g: f64, m: f64, e_max: f64) -> Result<f64> {
    positive(g, "coupling must be positive")?;
    positive(m, "mass must be positive")?;
    positive(e_max, "E_max must be positive")?;
    Ok(576.0 * g * g / (4.0 * core::f64::consts::PI * e_max * e_max * m * m))
}

/// Inverse of [`ht_truncation_error`] in `E_max`.
pub fn emax_for_error(g: f64, m: f64, epsilon: f64) -> Result<f64> {
    positive(g, "coupling must be positive")?;
    positive(m, "mass must be positive")?;
    positive(epsilon, "epsilon must be positive")?;
    Ok(libm::sqrt(576.0 * g * g / (4.0 * core::f64::consts::PI * epsilon * m * m)))
}

/// `V(r) = −(18 g²/m³) (π m r)^{-1/2} e^{−2mr}`.
pub fn interparticle_potential(r: f64, g: f64, m: f64) -> Result<f64> {
    positive(r, "separation must be positive")?;
    positive(m, "mass must be positive")?;
    let pi = core::f64::consts::PI;
    Ok(-18.0 * g * g / (m * m * m) / libm::sqrt(pi * m * r) * libm::exp(-2.0 * m * r))
}

/// `dV/dr = (18 g²/m³) (π m r)^{-1/2} e^{−2mr} (1/(2r) + 2m)`.
pub fn interparticle_force(r: f64, g: f64, m: f64) -> Result<f64> {
    let v = interparticle_potential(r, g, m)?;
    Ok(-v * (0.5 / r + 2.0 * m))
}

/// `V′(r) / V′(1/m)`; independent of the coupling.
pub fn force_ratio(r: f64, m: f64) -> Result<f64> {
    positive(r, "separation must be positive")?;
    positive(m, "mass must be positive")?;
    let x = m * r;
    Ok(libm::exp(-2.0 * (x - 1.0)) / libm::sqrt(x) * (0.5 / x + 2.0) / 2.5)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinVolume {
    pub r0: f64,
    pub length: f64,
    /// `ε >= 1`: the force ratio never exceeds `ε` beyond `r = 1/m`.
    pub saturated: bool,
}

/// Smallest `r₀ >= 1/m` with `V′(r₀)/V′(1/m) = ε`, and `L = 6 r₀`.
pub fn min_volume_for_epsilon(epsilon: f64, m: f64) -> Result<MinVolume> {
    positive(epsilon, "epsilon must be positive")?;
    positive(m, "mass must be positive")?;
    let mut lo = 1.0 / m;
    if epsilon >= 1.0 {
        return Ok(MinVolume {
            r0: lo,
            length: 6.0 * lo,
            saturated: true,
        });
    }
    let mut hi = 2.0 * lo;
    while force_ratio(hi, m)? > epsilon {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if force_ratio(mid, m)? > epsilon {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r0 = 0.5 * (lo + hi);
    Ok(MinVolume {
        r0,
        length: 6.0 * r0,
        saturated: false,
    })
}

/// `a` from the discretisation error `ε = 4 (m a)²`.
pub fn lattice_spacing_for_epsilon(epsilon: f64, m: f64) -> Result<f64> {
    positive(epsilon, "epsilon must be positive")?;
    positive(m, "mass must be positive")?;
    Ok(libm::sqrt(epsilon) / (2.0 * m))
}

/// `ceil(log2(1 + 4√s/(mπ) · (1 + √(L/(aε)))²))`.
pub fn lattice_qubits_per_site(epsilon: f64, sqrt_s: f64, length: f64, spacing: f64, m: f64) -> Result<u32> {
    positive(epsilon, "epsilon must be positive")?;
    positive(sqrt_s, "sqrt(s) must be positive")?;
    positive(length, "volume must be positive")?;
    positive(spacing, "lattice spacing must be positive")?;
    positive(m, "mass must be positive")?;
    let root = 1.0 + libm::sqrt(length / (spacing * epsilon));
    let arg = 1.0 + 4.0 * sqrt_s / (m * core::f64::consts::PI) * root * root;
    Ok(libm::ceil(libm::log2(arg)) as u32)
}

/// Lattice geometry and register size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    pub qubits_per_site: u32,
    pub spacing: f64,
    pub length: f64,
    pub mass: f64,
}

impl LatticeSpec {
    pub fn sites(&self) -> u64 {
        libm::ceil(self.length / self.spacing) as u64
    }

    pub fn total_qubits(&self) -> u64 {
        u64::from(self.qubits_per_site) * self.sites()
    }
}

/// Bracketing counts of zero-momentum states below an energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateCount {
    pub states_lower: u128,
    pub states_upper: u128,
    pub symmetric_lower: u128,
    pub symmetric_upper: u128,
    pub resolution: usize,
}

impl StateCount {
    /// Bounds on the number of parity classes, `(all + symmetric) / 2`.
    pub fn classes(&self) -> (u128, u128) {
        (
            (self.states_lower + self.symmetric_lower) / 2,
            (self.states_upper + self.symmetric_upper) / 2,
        )
    }

    pub fn qubits(&self) -> (u32, u32) {
        let (lo, hi) = self.classes();
        (qubits_for_count(lo), qubits_for_count(hi))
    }

    pub fn is_resolved(&self) -> bool {
        let (lo, hi) = self.qubits();
        lo == hi
    }
}

pub fn qubits_for_count(count: u128) -> u32 {
    if count <= 1 {
        0
    } else {
        128 - (count - 1).leading_zeros()
    }
}

/// Counter cell for the state-counting tables.
trait Tally: Copy + Default {
    const ONE: Self;
    fn add(self, other: Self) -> Self;
    fn widen(self) -> u128;
}

impl Tally for u64 {
    const ONE: Self = 1;
    fn add(self, other: Self) -> Self {
        self.saturating_add(other)
    }
    fn widen(self) -> u128 {
        u128::from(self)
    }
}

impl Tally for u128 {
    const ONE: Self = 1;
    fn add(self, other: Self) -> Self {
        self.saturating_add(other)
    }
    fn widen(self) -> u128 {
        self
    }
}

/// Quantised mode costs `(n, c_n)` for `|n| <= window`.
fn mode_costs(params: &ModelParams, window: u32, unit: f64, round_up: bool) -> Vec<(i32, usize)> {
    let w = window as i32;
    (-w..=w)
        .map(|n| {
            let q = params.omega(n) / unit;
            (n, (if round_up { libm::ceil(q) } else { libm::floor(q) }) as usize)
        })
        .collect()
}

/// Number of `(all, parity-symmetric)` zero-momentum states with total
/// quantised cost `<= budget`. `reach(e)` bounds `|P|` at cost `e`.
fn knapsack<T: Tally>(
    costs: &[(i32, usize)],
    budget: usize,
    half_span: usize,
    reach: impl Fn(usize) -> usize,
) -> (u128, u128) {
    let span = 2 * half_span + 1;
    let centre = half_span;
    let k = budget + 1;
    let mut table = alloc::vec![T::default(); k * span];
    table[centre] = T::ONE;
    for &(n, c) in costs {
        let shift = n.unsigned_abs() as usize;
        if c == 0 || c > budget || shift >= span {
            continue;
        }
        // Unbounded knapsack: ascending cost lets a mode repeat.
        for e in c..k {
            let r = reach(e).min(half_span);
            let lo = centre - r;
            let hi = centre + r + 1;
            let (head, tail) = table.split_at_mut(e * span);
            let src = &head[(e - c) * span..(e - c + 1) * span];
            let dst = &mut tail[..span];
            // dst[p] += src[p - n] for p in [lo, hi) with p - n in range.
            let (d0, d1) = if n >= 0 {
                (lo.max(shift), hi)
            } else {
                (lo, hi.min(span - shift))
            };
            if d0 >= d1 {
                continue;
            }
            let s0 = (d0 as i64 - n as i64) as usize;
            for (d, s) in dst[d0..d1].iter_mut().zip(&src[s0..s0 + (d1 - d0)]) {
                *d = d.add(*s);
            }
        }
    }
    let all = (0..k).fold(0u128, |acc, e| acc.saturating_add(table[e * span + centre].widen()));
    drop(table);
    // Parity-symmetric states: r_n = r_{-n}, so pairs cost 2c_n.
    let mut sym = alloc::vec![T::default(); k];
    sym[0] = T::ONE;
    for &(n, c) in costs.iter().filter(|(n, _)| *n >= 0) {
        let c = if n == 0 { c } else { 2 * c };
        if c == 0 || c > budget {
            continue;
        }
        for e in c..k {
            sym[e] = sym[e].add(sym[e - c]);
        }
    }
    let symmetric = sym.iter().fold(0u128, |acc, s| acc.saturating_add(s.widen()));
    (all, symmetric)
}

/// Counts zero-momentum Fock states with `H₀ <= e_max` without listing
/// them. Energies are quantised in units of `e_max / resolution`, rounding
/// mode energies up for the lower bound and down for the upper bound.
pub fn count_states(params: &ModelParams, e_max: f64, resolution: usize) -> Result<StateCount> {
    if !(e_max >= 0.0 && e_max.is_finite()) {
        return Err(Error::InvalidParameter("E_max must be non-negative"));
    }
    if resolution == 0 {
        return Err(Error::InvalidParameter("resolution must be positive"));
    }
    let Some(window) = params.mode_window(e_max) else {
        return Ok(StateCount {
            states_lower: 1,
            states_upper: 1,
            symmetric_lower: 1,
            symmetric_upper: 1,
            resolution,
        });
    };
    let half_span = momentum_bound(params, e_max);
    let per_unit_momentum = params.length / (2.0 * core::f64::consts::PI);
    let count = |resolution: usize, round_up: bool, wide: bool| -> (u128, u128) {
        let unit = e_max / resolution as f64;
        let costs = mode_costs(params, window, unit, round_up);
        let c_min = costs.iter().map(|c| c.1).min().unwrap_or(1).max(1);
        // Each quantum has |k_n| <= ω_n; with floor rounding ω_n < (c_n + 1)u
        // and there are at most e / c_min quanta.
        let reach = |e: usize| -> usize {
            let slack = if round_up { 0.0 } else { (e / c_min + 1) as f64 };
            libm::floor((e as f64 + slack) * unit * per_unit_momentum) as usize
        };
        if wide {
            knapsack::<u128>(&costs, resolution, half_span, reach)
        } else {
            knapsack::<u64>(&costs, resolution, half_span, reach)
        }
    };
    // A coarse upper bound decides whether 64-bit cells suffice.
    let coarse = count(resolution.min(64), false, true);
    let wide = coarse.0 >= u128::from(u64::MAX / 2);
    let (states_lower, symmetric_lower) = count(resolution, true, wide);
    let (states_upper, symmetric_upper) = count(resolution, false, wide);
    Ok(StateCount {
        states_lower,
        states_upper,
        symmetric_lower,
        symmetric_upper,
        resolution,
    })
}

/// Largest `|Σ n|` reachable below `e_max`: each quantum carries
/// `|n| <= ω_n L / 2π`.
fn momentum_bound(params: &ModelParams, e_max: f64) -> usize {
    libm::floor(e_max * params.length / (2.0 * core::f64::consts::PI)) as usize
}

/// Doubles the resolution until the qubit bounds agree or `max_resolution`
/// is reached.
pub fn count_states_resolved(params: &ModelParams, e_max: f64, max_resolution: usize) -> Result<StateCount> {
    let mut resolution = 256.min(max_resolution.max(1));
    loop {
        let count = count_states(params, e_max, resolution)?;
        if count.is_resolved() || resolution >= max_resolution {
            return Ok(count);
        }
        resolution = (2 * resolution).min(max_resolution);
    }
}

/// One row of the precision comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionRow {
    pub epsilon: f64,
    pub e_max: f64,
    pub volume: MinVolume,
    pub lattice: LatticeSpec,
    pub lattice_qubits: u64,
    pub ht_count: StateCount,
    /// Upper qubit bound; equals the lower one when `ht_count` is resolved.
    pub ht_qubits: u32,
}

/// Qubits needed for a `2 → 4` calculation at precision `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionSettings {
    pub coupling: f64,
    pub mass: f64,
    pub sqrt_s: f64,
    pub max_resolution: usize,
}

impl Default for PrecisionSettings {
    fn default() -> Self {
        Self {
            coupling: 1.0,
            mass: 1.0,
            sqrt_s: 5.0,
            max_resolution: 1 << 15,
        }
    }
}

pub fn precision_row(epsilon: f64, settings: &PrecisionSettings) -> Result<PrecisionRow> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter("epsilon must lie in (0, 1)"));
    }
    let m = settings.mass;
    let e_max = emax_for_error(settings.coupling, m, epsilon)?;
    let volume = min_volume_for_epsilon(epsilon, m)?;
    let spacing = lattice_spacing_for_epsilon(epsilon, m)?;
    let per_site = lattice_qubits_per_site(epsilon, settings.sqrt_s, volume.length, spacing, m)?;
    let lattice = LatticeSpec {
        qubits_per_site: per_site,
        spacing,
        length: volume.length,
        mass: m,
    };
    let params = ModelParams::new(m, volume.length, settings.coupling)?;
    let ht_count = count_states_resolved(&params, e_max, settings.max_resolution)?;
    Ok(PrecisionRow {
        epsilon,
        e_max,
        volume,
        lattice,
        lattice_qubits: lattice.total_qubits(),
        ht_qubits: ht_count.qubits().1,
        ht_count,
    })
}

pub fn precision_comparison(epsilons: &[f64], settings: &PrecisionSettings) -> Result<Vec<PrecisionRow>> {
    epsilons.iter().map(|&e| precision_row(e, settings)).collect()
}

/// Least-squares line with per-point residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
}

/// Points excluded from the low end of a sparsity fit.
pub const SPARSITY_FIT_SKIP: usize = 5;
/// Smallest scan accepted by [`sparsity_fit`].
pub const SPARSITY_FIT_MIN_POINTS: usize = 7;

pub fn fit_line(points: &[(f64, f64)]) -> Result<LinearFit> {
    if points.len() < 2 {
        return Err(Error::InsufficientPoints {
            required: 2,
            found: points.len(),
        });
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("fit abscissae are all equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = points.iter().map(|p| p.1 - (slope * p.0 + intercept)).collect();
    Ok(LinearFit {
        slope,
        intercept,
        residuals,
    })
}

/// Fits `ln d` against `ln N_q`, dropping the five smallest `N_q`.
pub fn sparsity_fit(reports: &[SparsityReport]) -> Result<LinearFit> {
    if reports.len() < SPARSITY_FIT_MIN_POINTS {
        return Err(Error::InsufficientPoints {
            required: SPARSITY_FIT_MIN_POINTS,
            found: reports.len(),
        });
    }
    let mut sorted: Vec<&SparsityReport> = reports.iter().collect();
    sorted.sort_by_key(|r| r.qubits);
    let points: Vec<(f64, f64)> = sorted[SPARSITY_FIT_SKIP..]
        .iter()
        .map(|r| (libm::log(f64::from(r.qubits)), libm::log(r.max_row_nonzeros as f64)))
        .collect();
    fit_line(&points)
}

/// Sparsity of the assembled `H` for each qubit count.
pub fn sparsity_scan(params: &ModelParams, qubits: &[u32]) -> Result<Vec<SparsityReport>> {
    qubits
        .iter()
        .map(|&nq| {
            let basis = enumerate_basis(params, TruncationSpec::QubitCount(nq), &EnumerationOptions::default())?;
            Ok(sparsity(&assemble(&basis)?.full))
        })
        .collect()
}

/// `ceil(log2 dim)`, re-exported for table builders.
pub fn ht_qubits_for_dim(dim: usize) -> u32 {
    qubits_for_dim(dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_error_roundtrip() {
        let e = ht_truncation_error(1.0, 1.0, 10.0).unwrap();
        assert!((e - 576.0 / (400.0 * core::f64::consts::PI)).abs() < 1e-15);
        for eps in [0.2, 0.05, 0.01] {
            let em = emax_for_error(1.0, 1.0, eps).unwrap();
            assert!((ht_truncation_error(1.0, 1.0, em).unwrap() - eps).abs() / eps < 1e-12);
        }
    }

    #[test]
    fn potential_values() {
        let v = interparticle_potential(1.0, 1.0, 1.0).unwrap();
        assert!((v + 18.0 / libm::sqrt(core::f64::consts::PI) * libm::exp(-2.0)).abs() < 1e-14);
        assert!(interparticle_potential(50.0, 1.0, 1.0).unwrap().abs() < 1e-40);
        let h = 1e-6;
        for r in [0.3, 1.0, 2.5] {
            let num = (interparticle_potential(r + h, 1.3, 1.1).unwrap() - interparticle_potential(r - h, 1.3, 1.1).unwrap())
                / (2.0 * h);
            let ana = interparticle_force(r, 1.3, 1.1).unwrap();
            assert!((num - ana).abs() / ana.abs() < 1e-7);
        }
        assert!((force_ratio(1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn min_volume_behaviour() {
        let sat = min_volume_for_epsilon(1.0, 1.0).unwrap();
        assert!(sat.saturated && sat.length == 6.0);
        let near = min_volume_for_epsilon(0.999_999, 1.0).unwrap();
        assert!((near.length - 6.0).abs() < 1e-4);
        let mut last = 0.0;
        for eps in [0.5, 0.2, 0.1, 0.05, 0.01, 0.001] {
            let v = min_volume_for_epsilon(eps, 1.0).unwrap();
            assert!(v.length > last);
            last = v.length;
            let residual = force_ratio(v.r0, 1.0).unwrap() - eps;
            assert!(residual.abs() < 1e-12, "{residual}");
        }
    }

    #[test]
    fn lattice_counts() {
        assert_eq!(lattice_qubits_vs_emax(2, 16.0, 1.0).unwrap(), 32);
        assert_eq!(lattice_qubits_vs_emax(2, 16.0, 5.0).unwrap(), 160);
        let a = lattice_spacing_for_epsilon(0.04, 1.0).unwrap();
        assert!((4.0 * a * a - 0.04).abs() < 1e-15);
        let mut last = 0;
        for eps in [0.2, 0.1, 0.05, 0.025] {
            let n = lattice_qubits_per_site(eps, 5.0, 10.0, 0.1, 1.0).unwrap();
            assert!(n >= last && n >= 1);
            last = n;
        }
    }

    #[test]
    fn counting_brackets_enumeration() {
        let p = ModelParams::new(1.0, 16.0, 1.0).unwrap();
        for e in [0.5, 2.0, 4.0, 6.0, 8.0] {
            let dim = enumerate_basis(&p, TruncationSpec::EnergyCutoff(e), &Default::default())
                .unwrap()
                .len() as u128;
            let c = count_states(&p, e, 1024).unwrap();
            let (lo, hi) = c.classes();
            assert!(lo <= dim && dim <= hi, "E={e}: {lo} <= {dim} <= {hi}");
            let resolved = count_states_resolved(&p, e, 1 << 14).unwrap();
            assert!(resolved.is_resolved());
            assert_eq!(resolved.qubits().0, qubits_for_dim(dim as usize));
        }
    }

    #[test]
    fn small_emax_qubits() {
        let p = ModelParams::new(1.0, 16.0, 1.0).unwrap();
        assert_eq!(ht_qubits_vs_emax(&p, 0.99).unwrap(), 0);
        assert_eq!(ht_qubits_vs_emax(&p, 2.0).unwrap(), 2);
        assert_eq!(qubits_for_count(0), 0);
        assert_eq!(qubits_for_count(1), 0);
        assert_eq!(qubits_for_count(3), 2);
        assert_eq!(qubits_for_count(4), 2);
        assert_eq!(qubits_for_count(5), 3);
    }

    #[test]
    fn fit_recovers_line() {
        let pts: Vec<(f64, f64)> = (1..10).map(|i| (f64::from(i), 3.25 * f64::from(i) - 1.5)).collect();
        let fit = fit_line(&pts).unwrap();
        assert!((fit.slope - 3.25).abs() < 1e-12);
        assert!((fit.intercept + 1.5).abs() < 1e-12);
        let few: Vec<SparsityReport> = (1..7)
            .map(|q| SparsityReport {
                qubits: q,
                max_row_nonzeros: 1,
                total_nonzeros: 1,
            })
            .collect();
        assert_eq!(
            sparsity_fit(&few).unwrap_err(),
            Error::InsufficientPoints { required: 7, found: 6 }
        );
    }
}
