//! The scattering recipe: free packets, free displacement, adiabatic ramp,
//! then split-step evolution with periodic observables.

use std::collections::BTreeMap;

use htscatter_core::evolution::{adiabatic_prepare, apply_diagonal_phases, trotter_step, RampOperators};
use htscatter_core::fock::{enumerate_basis, TruncatedBasis};
use htscatter_core::hamiltonian::{assemble, Hamiltonian};
use htscatter_core::linalg::{expectation, Spectral};
use htscatter_core::observables::{occupation_histogram, separation_density, SeparationDensity};
use htscatter_core::wavepacket::{two_packet_state, PacketWarning};
use htscatter_core::{Result, StateVector};

use crate::config::RunConfig;

#[derive(Debug, Clone)]
pub struct Sample {
    pub t: f64,
    pub norm: f64,
    pub energy: f64,
    pub density: SeparationDensity,
    pub histogram: BTreeMap<u32, f64>,
}

impl Sample {
    fn take(t: f64, basis: &TruncatedBasis, h: &Hamiltonian, psi: &StateVector, grid: usize) -> Result<Self> {
        Ok(Self {
            t,
            norm: psi.norm(),
            energy: expectation(&h.full, psi.amplitudes()),
            density: separation_density(basis, psi, grid)?,
            histogram: occupation_histogram(basis, psi)?,
        })
    }

    /// Trapezoidal `∫ ρ dy`: the two-particle weight.
    pub fn pair_weight(&self) -> f64 {
        self.density.integral()
    }

    pub fn first_moment(&self) -> f64 {
        self.density.first_moment()
    }

    pub fn probability(&self, particles: u32) -> f64 {
        self.histogram.get(&particles).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone)]
pub struct ScatterRun {
    pub basis: TruncatedBasis,
    /// Free packets before displacement.
    pub initial: StateVector,
    pub warning: Option<PacketWarning>,
    /// Observables of `initial`, time stamp 0.
    pub initial_sample: Sample,
    /// State after displacement and ramp; the evolution starts here.
    pub prepared: StateVector,
    pub samples: Vec<Sample>,
}

impl ScatterRun {
    /// Sample time minimising the first moment `∫ y ρ dy` (earliest on ties).
    pub fn collision_time(&self) -> f64 {
        let mut best = &self.samples[0];
        for s in &self.samples[1..] {
            if s.first_moment() < best.first_moment() {
                best = s;
            }
        }
        best.t
    }

    /// Median fringe gap of the free initial state.
    pub fn fringe_spacing(&self, fraction: f64) -> Option<f64> {
        self.initial_sample.density.fringe_spacing(fraction)
    }

    pub fn final_sample(&self) -> &Sample {
        self.samples.last().expect("at least the t = 0 sample")
    }
}

/// `k · every` rounded to 1e-12 so sample times print as written.
fn nominal_time(k: usize, every: f64) -> f64 {
    (k as f64 * every * 1e12).round() / 1e12
}

/// Runs the recipe for one configuration.
pub fn simulate(config: &RunConfig) -> Result<ScatterRun> {
    let params = config.model_params()?;
    let basis = enumerate_basis(&params, config.truncation_spec(), &config.enumeration_options())?;
    let h = assemble(&basis)?;
    let (initial, warning) = two_packet_state(&basis, &config.packet_spec()?)?;
    let grid = config.observables.grid_size;
    let initial_sample = Sample::take(0.0, &basis, &h, &initial, grid)?;

    let s = &config.schedule;
    let mut psi = initial.clone();
    apply_diagonal_phases(&h.free_energies, psi.amplitudes_mut(), s.free_displacement_time);
    let v = Spectral::new(&h.interaction)?;
    let ops = RampOperators::new(&h).with_split(&v);
    let prepared = adiabatic_prepare(&ops, &psi, &config.ramp_schedule()?, config.ramp_propagation())?;

    let per_sample = (s.sample_every / s.dt).round() as usize;
    let count = (s.t_max / s.sample_every).round() as usize;
    let mut samples = Vec::with_capacity(count + 1);
    let mut psi = prepared.clone();
    samples.push(Sample::take(0.0, &basis, &h, &psi, grid)?);
    for k in 1..=count {
        for _ in 0..per_sample {
            trotter_step(&h.free_energies, &v, 1.0, psi.amplitudes_mut(), s.dt);
        }
        samples.push(Sample::take(nominal_time(k, s.sample_every), &basis, &h, &psi, grid)?);
    }
    Ok(ScatterRun {
        basis,
        initial,
        warning,
        initial_sample,
        prepared,
        samples,
    })
}
