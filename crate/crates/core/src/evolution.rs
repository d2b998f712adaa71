//! Exact, split-operator and adiabatic time evolution.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, SymmetricOperator};
use crate::linalg::{self, Exponential, Spectral};
use crate::wavepacket::StateVector;

fn check_dim(expected: usize, psi: &StateVector) -> Result<()> {
    if psi.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: psi.len(),
        });
    }
    Ok(())
}

/// Cached spectral propagator for a fixed operator.
#[derive(Debug, Clone)]
pub struct ExactPropagator {
    spectral: Spectral,
}

impl ExactPropagator {
    pub fn new(op: &SymmetricOperator) -> Result<Self> {
        Ok(Self {
            spectral: Spectral::new(op)?,
        })
    }

    pub fn with_ceiling(op: &SymmetricOperator, ceiling: usize) -> Result<Self> {
        Ok(Self {
            spectral: Spectral::with_ceiling(op, ceiling)?,
        })
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        check_dim(self.spectral.dim(), psi)?;
        let mut out = psi.clone();
        if t != 0.0 {
            self.spectral.apply_exp(out.amplitudes_mut(), t);
        }
        Ok(out)
    }
}

/// `exp(-i H t) ψ` through a one-off eigendecomposition.
pub fn exact_evolve(op: &SymmetricOperator, psi: &StateVector, t: f64) -> Result<StateVector> {
    check_dim(op.dim(), psi)?;
    ExactPropagator::new(op)?.evolve(psi, t)
}

/// Multiplies by `exp(-i d_r t)` entrywise.
pub fn apply_diagonal_phases(diag: &[f64], psi: &mut [Complex64], t: f64) {
    for (a, &d) in psi.iter_mut().zip(diag) {
        *a *= Complex64::from_polar(1.0, -d * t);
    }
}

/// One step `exp(-i H₀ dt) · exp(-i s V dt)`: the `V` factor acts first.
pub fn trotter_step<V: Exponential + ?Sized>(h0: &[f64], v: &V, scale: f64, psi: &mut [Complex64], dt: f64) {
    v.apply_exp(psi, scale * dt);
    apply_diagonal_phases(h0, psi, dt);
}

/// The adjoint of [`trotter_step`] with step `dt`.
pub fn trotter_step_adjoint<V: Exponential + ?Sized>(
    h0: &[f64],
    v: &V,
    scale: f64,
    psi: &mut [Complex64],
    dt: f64,
) {
    apply_diagonal_phases(h0, psi, -dt);
    v.apply_exp_adjoint(psi, scale * dt);
}

/// Number of steps of size `dt` closest to `t`, and the time they cover.
pub fn step_count(t: f64, dt: f64) -> Result<(usize, f64)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter("time step must be positive"));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter("evolution time must be non-negative"));
    }
    let n = libm::round(t / dt) as usize;
    Ok((n, n as f64 * dt))
}

/// First-order split evolution. Returns the state and the time actually
/// covered, `round(t/dt)·dt`.
pub fn trotter_evolve<V: Exponential + ?Sized>(
    h0: &[f64],
    v: &V,
    scale: f64,
    psi: &StateVector,
    t: f64,
    dt: f64,
) -> Result<(StateVector, f64)> {
    check_dim(h0.len(), psi)?;
    if v.dim() != h0.len() {
        return Err(Error::DimensionMismatch {
            expected: h0.len(),
            found: v.dim(),
        });
    }
    let (steps, actual) = step_count(t, dt)?;
    let mut out = psi.clone();
    for _ in 0..steps {
        trotter_step(h0, v, scale, out.amplitudes_mut(), dt);
    }
    Ok((out, actual))
}

/// Linear coupling ramp `λ_a = 1 − a/N`, `a = 0..=N`, `δτ = τ/N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampSchedule {
    pub tau: f64,
    pub steps: usize,
}

impl RampSchedule {
    pub fn new(tau: f64, steps: usize) -> Result<Self> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter("ramp time must be non-negative"));
        }
        if steps == 0 {
            return Err(Error::InvalidParameter("ramp needs at least one step"));
        }
        Ok(Self { tau, steps })
    }

    /// Schedule with `N = round(τ/δτ)` (at least one step).
    pub fn from_step(tau: f64, delta_tau: f64) -> Result<Self> {
        if !(delta_tau > 0.0) {
            return Err(Error::InvalidParameter("ramp step must be positive"));
        }
        Self::new(tau, (libm::round(tau / delta_tau) as usize).max(1))
    }

    pub fn delta_tau(&self) -> f64 {
        self.tau / self.steps as f64
    }

    /// Time spanned by the `N + 1` factors, `(N + 1)·δτ`.
    pub fn duration(&self) -> f64 {
        (self.steps + 1) as f64 * self.delta_tau()
    }

    pub fn coupling(&self, a: usize) -> f64 {
        1.0 - a as f64 / self.steps as f64
    }

    /// Couplings in the order the factors act on the state: `0 → 1`.
    pub fn acting_order(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).rev().map(|a| self.coupling(a))
    }
}

/// How the exponential of each instantaneous Hamiltonian is applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Propagation {
    /// Exact to the series remainder bound.
    Exact,
    /// Split sub-steps of (at most) `dt`.
    Trotter { dt: f64 },
}

/// One elementary factor of a ramp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stage {
    /// `exp(-i (H₀ + λV) t)`.
    Exact { lambda: f64, time: f64 },
    /// `count` split steps of size `step`; with `v_first` each is
    /// `e^{-iH₀h} e^{-iλVh}`, otherwise its adjoint for step `-h`.
    Split {
        lambda: f64,
        step: f64,
        count: usize,
        v_first: bool,
    },
}

impl Stage {
    pub fn inverse(&self) -> Self {
        match *self {
            Stage::Exact { lambda, time } => Stage::Exact { lambda, time: -time },
            Stage::Split {
                lambda,
                step,
                count,
                v_first,
            } => Stage::Split {
                lambda,
                step: -step,
                count,
                v_first: !v_first,
            },
        }
    }

    fn evolution(lambda: f64, time: f64, propagation: Propagation) -> Self {
        match propagation {
            Propagation::Exact => Stage::Exact { lambda, time },
            Propagation::Trotter { dt } => {
                let count = (libm::round(time.abs() / dt) as usize).max(1);
                Stage::Split {
                    lambda,
                    step: time / count as f64,
                    count,
                    v_first: time >= 0.0,
                }
            }
        }
    }
}

/// Factors of the preparation map in acting order: the ramp from `λ = 0`
/// to `λ = 1`, then the backward translation `exp(+i H T)` over the full
/// ramp duration `T = (N + 1)·δτ`.
pub fn preparation_stages(schedule: &RampSchedule, propagation: Propagation) -> Result<Vec<Stage>> {
    if let Propagation::Trotter { dt } = propagation {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter("time step must be positive"));
        }
    }
    let dtau = schedule.delta_tau();
    let mut stages: Vec<Stage> = schedule
        .acting_order()
        .map(|lambda| Stage::evolution(lambda, dtau, propagation))
        .collect();
    let back = Stage::evolution(1.0, schedule.duration(), propagation).inverse();
    stages.push(back);
    Ok(stages)
}

/// Inverse of a stage list: inverted factors in reverse order.
pub fn inverse_stages(stages: &[Stage]) -> Vec<Stage> {
    stages.iter().rev().map(Stage::inverse).collect()
}

/// The operators a ramp acts with.
#[derive(Clone, Copy)]
pub struct RampOperators<'a> {
    pub free_energies: &'a [f64],
    pub interaction: &'a SymmetricOperator,
    /// Exponential of `V` for split stages. `None` builds one on demand.
    pub split: Option<&'a dyn Exponential>,
}

impl<'a> RampOperators<'a> {
    pub fn new(h: &'a Hamiltonian) -> Self {
        Self {
            free_energies: &h.free_energies,
            interaction: &h.interaction,
            split: None,
        }
    }

    pub fn with_split(mut self, split: &'a dyn Exponential) -> Self {
        self.split = Some(split);
        self
    }

    pub fn dim(&self) -> usize {
        self.free_energies.len()
    }
}

/// Applies `stages` in order.
pub fn apply_stages(ops: &RampOperators<'_>, stages: &[Stage], psi: &StateVector) -> Result<StateVector> {
    check_dim(ops.dim(), psi)?;
    if ops.interaction.dim() != ops.dim() {
        return Err(Error::DimensionMismatch {
            expected: ops.dim(),
            found: ops.interaction.dim(),
        });
    }
    let needs_split = stages.iter().any(|s| matches!(s, Stage::Split { .. }));
    let owned;
    let split: Option<&dyn Exponential> = match (needs_split, ops.split) {
        (false, _) => None,
        (true, Some(s)) => Some(s),
        (true, None) => {
            owned = Spectral::new(ops.interaction)?;
            Some(&owned)
        }
    };
    let mut out = psi.clone();
    let amps = out.amplitudes_mut();
    for stage in stages {
        match *stage {
            Stage::Exact { lambda, time } => {
                linalg::expm_multiply(ops.free_energies, ops.interaction, lambda, amps, time);
            }
            Stage::Split {
                lambda,
                step,
                count,
                v_first,
            } => {
                let v = split.expect("split exponential prepared above");
                for _ in 0..count {
                    if v_first {
                        trotter_step(ops.free_energies, v, lambda, amps, step);
                    } else {
                        trotter_step_adjoint(ops.free_energies, v, lambda, amps, -step);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Adiabatic preparation: ramp the coupling on, then translate back by
/// `exp(+i H (N + 1) δτ)`.
pub fn adiabatic_prepare(
    ops: &RampOperators<'_>,
    psi: &StateVector,
    schedule: &RampSchedule,
    propagation: Propagation,
) -> Result<StateVector> {
    apply_stages(ops, &preparation_stages(schedule, propagation)?, psi)
}

/// Exact inverse of [`adiabatic_prepare`] with the same arguments.
pub fn ramp_down(
    ops: &RampOperators<'_>,
    psi: &StateVector,
    schedule: &RampSchedule,
    propagation: Propagation,
) -> Result<StateVector> {
    let stages = preparation_stages(schedule, propagation)?;
    apply_stages(ops, &inverse_stages(&stages), psi)
}
