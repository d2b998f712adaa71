//! One function per CLI verb: compute, write tables, write the manifest.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use htscatter_core::circuit::{
    compile_program, gate_report, interpret, CompileOptions, CompiledProgram, PauliProduct, INTERPRETER_CEILING,
};
use htscatter_core::evolution::{adiabatic_prepare, apply_diagonal_phases, exact_evolve, trotter_step, Propagation, RampOperators};
use htscatter_core::fock::{enumerate_basis, qubits_for_dim, EnumerationOptions, ModelParams, TruncationSpec};
use htscatter_core::hamiltonian::{assemble, sparsity};
use htscatter_core::linalg::inner;
use htscatter_core::resources::{
    fit_line, lattice_qubits_vs_emax, precision_row, PrecisionSettings, SPARSITY_FIT_SKIP,
};
use htscatter_core::wavepacket::two_packet_state;
use htscatter_core::StateVector;

use crate::config::{LoadedConfig, OutputFormat, RunConfig};
use crate::error::RunError;
use crate::formats::{basis_table, num, state_table, write_circuit, write_matrix, Table};
use crate::manifest::{sha256_hex, OutputDir, RunManifest};
use crate::scatter::{simulate, ScatterRun};

/// Interpreter fidelity below which `emit-circuit` reports a failure.
pub const SELF_CHECK_FLOOR: f64 = 0.999;

/// Command-line options shared by all verbs.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides `outputs.directory`.
    pub out: Option<PathBuf>,
    /// Single-threaded and without wall-clock time in the manifest.
    pub deterministic: bool,
    pub threads: Option<usize>,
}

struct Run<'a> {
    loaded: &'a LoadedConfig,
    options: &'a RunOptions,
    verb: &'static str,
    started: Instant,
    dir: OutputDir,
    metrics: BTreeMap<String, Value>,
    dimension: Option<usize>,
    qubits: Option<u32>,
}

impl<'a> Run<'a> {
    fn start(loaded: &'a LoadedConfig, options: &'a RunOptions, verb: &'static str) -> Result<Self, RunError> {
        let root = options
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from(&loaded.config.outputs.directory));
        Ok(Self {
            loaded,
            options,
            verb,
            started: Instant::now(),
            dir: OutputDir::create(&root)?,
            metrics: BTreeMap::new(),
            dimension: None,
            qubits: None,
        })
    }

    fn config(&self) -> &RunConfig {
        &self.loaded.config
    }

    fn table(&mut self, name: &str, table: &Table) -> Result<(), RunError> {
        if self.config().outputs.formats.contains(&OutputFormat::Csv) {
            self.dir.write(name, &table.to_bytes())?;
        }
        Ok(())
    }

    fn metric(&mut self, key: &str, value: Value) {
        self.metrics.insert(key.to_string(), value);
    }

    fn finish(mut self) -> Result<RunManifest, RunError> {
        if self.config().outputs.formats.contains(&OutputFormat::Json) {
            let mut text = serde_json::to_string_pretty(&self.metrics).map_err(std::io::Error::other)?;
            text.push('\n');
            self.dir.write("summary.json", text.as_bytes())?;
        }
        let manifest = RunManifest {
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            verb: self.verb.to_string(),
            config_hash: sha256_hex(self.loaded.source.as_bytes()),
            basis_dimension: self.dimension,
            qubit_count: self.qubits,
            wall_clock_seconds: (!self.options.deterministic).then(|| self.started.elapsed().as_secs_f64()),
            files: Vec::new(),
            metrics: self.metrics,
        };
        Ok(self.dir.finish(manifest)?)
    }
}

/// Runs `f` on a pool sized by the options.
fn with_pool<T: Send>(options: &RunOptions, f: impl FnOnce() -> T + Send) -> Result<T, RunError> {
    let threads = if options.deterministic { 1 } else { options.threads.unwrap_or(0) };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(std::io::Error::other)?;
    Ok(pool.install(f))
}

/// `# key = value` lines recording the physics inputs.
fn input_comments(table: &mut Table, c: &RunConfig) {
    let (mode, value) = (c.truncation.mode, c.truncation.value);
    table
        .comment("M", num(c.model.mass))
        .comment("L", num(c.model.length))
        .comment("g", num(c.model.g))
        .comment("truncation", format!("{mode:?} {}", num(value)).to_lowercase())
        .comment("even_particle_number_only", c.truncation.even_particle_number_only);
}

fn packet_comments(table: &mut Table, c: &RunConfig) {
    let s = &c.schedule;
    table
        .comment("p0", num(c.packet.p0))
        .comment("delta", num(c.packet.delta))
        .comment("free_displacement_time", num(s.free_displacement_time))
        .comment("ramp_tau", num(s.ramp_tau))
        .comment("ramp_steps", s.ramp_steps)
        .comment("ramp_propagation", format!("{:?}", s.ramp_propagation).to_lowercase())
        .comment("dt", num(s.dt))
        .comment("grid_size", c.observables.grid_size);
}

pub fn run_basis(loaded: &LoadedConfig, options: &RunOptions) -> Result<RunManifest, RunError> {
    let mut run = Run::start(loaded, options, "basis")?;
    let c = run.config().clone();
    let basis = enumerate_basis(&c.model_params()?, c.truncation_spec(), &c.enumeration_options())?;
    let mut t = basis_table(&basis);
    t.comment("g", num(c.model.g));
    run.table("basis.csv", &t)?;
    run.dimension = Some(basis.len());
    run.qubits = Some(basis.qubit_count());
    run.metric("maxEnergy", json!(basis.max_energy()));
    run.metric("modeWindow", json!(basis.mode_window()));
    run.metric("warnings", json!(basis.warnings().iter().map(|w| format!("{w:?}")).collect::<Vec<_>>()));
    run.finish()
}

pub fn run_hamiltonian(loaded: &LoadedConfig, options: &RunOptions) -> Result<RunManifest, RunError> {
    let mut run = Run::start(loaded, options, "hamiltonian")?;
    let c = run.config().clone();
    let basis = enumerate_basis(&c.model_params()?, c.truncation_spec(), &c.enumeration_options())?;
    let h = assemble(&basis)?;
    run.table("basis.csv", &basis_table(&basis))?;
    run.dir.write("hamiltonian.mtx", write_matrix(&h.full).as_bytes())?;
    run.dir.write("interaction.mtx", write_matrix(&h.interaction).as_bytes())?;
    let report = sparsity(&h.full);
    run.dimension = Some(basis.len());
    run.qubits = Some(basis.qubit_count());
    run.metric("nonzeros", json!(report.total_nonzeros));
    run.metric("maxRowNonzeros", json!(report.max_row_nonzeros));
    run.metric("symmetric", json!(h.full.is_certified()));
    run.finish()
}

fn tag(parameter: &str, value: f64) -> String {
    format!("-{parameter}_{}", num(value))
}

/// All sweep points as `(file tag, config)`.
pub fn sweep_points(c: &RunConfig) -> Vec<(String, RunConfig)> {
    match &c.sweep {
        None => vec![(String::new(), c.clone())],
        Some(sw) => sw
            .values
            .iter()
            .map(|&v| (tag(sw.parameter.name(), v), c.with_sweep_value(sw.parameter, v)))
            .collect(),
    }
}

fn heatmap_table(run: &ScatterRun, c: &RunConfig) -> Table {
    let mut t = Table::new(&["t", "y", "density"]);
    input_comments(&mut t, c);
    packet_comments(&mut t, c);
    for s in &run.samples {
        for (y, d) in s.density.grid.iter().zip(&s.density.values) {
            t.push(vec![num(s.t), num(*y), num(*d)]);
        }
    }
    t
}

fn histogram_table(run: &ScatterRun, c: &RunConfig) -> Table {
    let mut t = Table::new(&["t", "N", "probability"]);
    input_comments(&mut t, c);
    packet_comments(&mut t, c);
    for s in &run.samples {
        for (n, p) in &s.histogram {
            t.push(vec![num(s.t), n.to_string(), num(*p)]);
        }
    }
    t
}

fn trajectory_table(run: &ScatterRun, c: &RunConfig) -> Table {
    let mut t = Table::new(&["t", "norm", "energy", "pair_weight", "first_moment", "mean_separation"]);
    input_comments(&mut t, c);
    packet_comments(&mut t, c);
    for s in &run.samples {
        let mean = s.density.mean_separation().map_or_else(String::new, num);
        t.push(vec![
            num(s.t),
            num(s.norm),
            num(s.energy),
            num(s.pair_weight()),
            num(s.first_moment()),
            mean,
        ]);
    }
    t
}

pub fn run_scatter(loaded: &LoadedConfig, options: &RunOptions) -> Result<RunManifest, RunError> {
    let mut run = Run::start(loaded, options, "scatter")?;
    let c = run.config().clone();
    let points = sweep_points(&c);
    let results: Vec<htscatter_core::Result<ScatterRun>> =
        with_pool(options, || points.par_iter().map(|(_, cfg)| simulate(cfg)).collect())?;
    let mut summary = Table::new(&[
        "tag",
        "g",
        "p0",
        "delta",
        "dimension",
        "collision_time",
        "fringe_spacing",
        "final_pair_weight",
        "final_p4",
    ]);
    input_comments(&mut summary, &c);
    packet_comments(&mut summary, &c);
    summary.comment("fringe_fraction", num(c.observables.fringe_fraction));
    let mut points_json = Vec::new();
    for ((tag, cfg), result) in points.iter().zip(results) {
        let r = result?;
        run.table(&format!("heatmap{tag}.csv"), &heatmap_table(&r, cfg))?;
        run.table(&format!("histogram{tag}.csv"), &histogram_table(&r, cfg))?;
        run.table(&format!("trajectory{tag}.csv"), &trajectory_table(&r, cfg))?;
        run.table(&format!("initial_state{tag}.csv"), &state_table(&r.basis, &r.initial))?;
        let fringe = r.fringe_spacing(cfg.observables.fringe_fraction);
        let last = r.final_sample();
        summary.push(vec![
            tag.trim_start_matches('-').to_string(),
            num(cfg.model.g),
            num(cfg.packet.p0),
            num(cfg.packet.delta),
            r.basis.len().to_string(),
            num(r.collision_time()),
            fringe.map_or_else(String::new, num),
            num(last.pair_weight()),
            num(last.probability(4)),
        ]);
        points_json.push(json!({
            "tag": tag.trim_start_matches('-'),
            "g": cfg.model.g,
            "p0": cfg.packet.p0,
            "delta": cfg.packet.delta,
            "collisionTime": r.collision_time(),
            "fringeSpacing": fringe,
            "maxNormDeviation": r.samples.iter().map(|s| (s.norm - 1.0).abs()).fold(0.0, f64::max),
            "packetWarning": r.warning.as_ref().map(|w| format!("{w:?}")),
        }));
        run.dimension = Some(r.basis.len());
        run.qubits = Some(r.basis.qubit_count());
    }
    run.table("summary.csv", &summary)?;
    run.metric("points", Value::Array(points_json));
    run.finish()
}

pub fn run_resources(loaded: &LoadedConfig, options: &RunOptions) -> Result<RunManifest, RunError> {
    let mut run = Run::start(loaded, options, "resources")?;
    let c = run.config().clone();
    let r = c.resources.clone();
    let mass = c.model.mass;
    let ml = mass * c.model.length;
    let params = ModelParams::new(mass, c.model.length, c.model.g)?;

    // Qubits against the energy cutoff.
    let grid = c.emax_grid();
    let dims: Vec<htscatter_core::Result<usize>> = with_pool(options, || {
        grid.par_iter()
            .map(|&e| {
                let b = enumerate_basis(&params, TruncationSpec::EnergyCutoff(e * mass), &EnumerationOptions::default())?;
                Ok(b.len())
            })
            .collect()
    })?;
    let mut t = Table::new(&["e_max_over_m", "ht_dimension", "ht_qubits", "lattice_qubits", "ratio"]);
    t.comment("ML", num(ml)).comment("nq_per_site", r.nq_per_site);
    for (&e, dim) in grid.iter().zip(dims) {
        let dim = dim?;
        let ht = qubits_for_dim(dim);
        let lattice = lattice_qubits_vs_emax(r.nq_per_site, ml, e)?;
        let ratio = if ht > 0 { num(lattice as f64 / f64::from(ht)) } else { String::new() };
        t.push(vec![num(e), dim.to_string(), ht.to_string(), lattice.to_string(), ratio]);
    }
    run.table("qubits_vs_emax.csv", &t)?;

    // Qubits against the precision target.
    let settings = PrecisionSettings {
        coupling: r.precision_coupling * mass * mass,
        mass,
        sqrt_s: r.sqrt_s * mass,
        max_resolution: r.max_resolution,
    };
    let rows: Vec<htscatter_core::Result<_>> =
        with_pool(options, || r.epsilons.par_iter().map(|&e| precision_row(e, &settings)).collect())?;
    let mut t = Table::new(&[
        "epsilon",
        "e_max",
        "r0",
        "volume",
        "spacing",
        "nq_per_site",
        "sites",
        "lattice_qubits",
        "ht_classes_lower",
        "ht_classes_upper",
        "ht_qubits",
        "count_resolution",
    ]);
    t.comment("M", num(mass))
        .comment("g", num(settings.coupling))
        .comment("sqrt_s", num(settings.sqrt_s))
        .comment("max_resolution", settings.max_resolution);
    let mut unresolved = Vec::new();
    for row in rows {
        let row = row?;
        if !row.ht_count.is_resolved() {
            unresolved.push(row.epsilon);
        }
        let (lo, hi) = row.ht_count.classes();
        t.push(vec![
            num(row.epsilon),
            num(row.e_max),
            num(row.volume.r0),
            num(row.volume.length),
            num(row.lattice.spacing),
            row.lattice.qubits_per_site.to_string(),
            row.lattice.sites().to_string(),
            row.lattice_qubits.to_string(),
            lo.to_string(),
            hi.to_string(),
            row.ht_qubits.to_string(),
            row.ht_count.resolution.to_string(),
        ]);
    }
    run.table("precision.csv", &t)?;
    run.metric("unresolvedEpsilons", json!(unresolved));

    // Sparsity of the assembled Hamiltonian.
    let mut qubits = r.sparsity_qubits.clone();
    qubits.sort_unstable();
    qubits.dedup();
    let reports: Vec<htscatter_core::Result<_>> = with_pool(options, || {
        qubits
            .par_iter()
            .map(|&nq| {
                let b = enumerate_basis(&params, TruncationSpec::QubitCount(nq), &EnumerationOptions::default())?;
                Ok((b.len(), sparsity(&assemble(&b)?.full)))
            })
            .collect()
    })?;
    let mut t = Table::new(&["n_qubits", "dimension", "max_row_nonzeros", "nonzeros"]);
    t.comment("ML", num(ml)).comment("g", num(c.model.g));
    let mut points = Vec::new();
    for rep in reports {
        let (dim, rep) = rep?;
        points.push((f64::from(rep.qubits).ln(), (rep.max_row_nonzeros as f64).ln()));
        t.push(vec![
            rep.qubits.to_string(),
            dim.to_string(),
            rep.max_row_nonzeros.to_string(),
            rep.total_nonzeros.to_string(),
        ]);
    }
    run.table("sparsity.csv", &t)?;
    if points.len() > SPARSITY_FIT_SKIP + 1 {
        let fit = fit_line(&points[SPARSITY_FIT_SKIP..])?;
        let mut t = Table::new(&["slope", "intercept", "points", "skipped"]);
        t.comment("fit", "ln d = slope ln N_q + intercept");
        t.push(vec![
            num(fit.slope),
            num(fit.intercept),
            (points.len() - SPARSITY_FIT_SKIP).to_string(),
            SPARSITY_FIT_SKIP.to_string(),
        ]);
        run.table("sparsity_fit.csv", &t)?;
        run.metric("sparsitySlope", json!(fit.slope));
        run.metric("sparsityIntercept", json!(fit.intercept));
    }
    run.finish()
}

/// Interpreter and reference states after the ramp and `steps` time steps.
#[derive(Debug, Clone)]
pub struct CircuitCheck {
    pub prep_fidelity: f64,
    /// Interpreter against the same product formula on matrices.
    pub matrix_fidelity: f64,
    /// Interpreter against exact exponentials of the ramp and evolution.
    pub exact_fidelity: f64,
    pub leakage: f64,
}

pub fn check_program(
    program: &CompiledProgram,
    exact_reference: &[Complex64],
    steps: usize,
    dt: f64,
) -> htscatter_core::Result<CircuitCheck> {
    let n = program.num_qubits;
    let mut reg = vec![Complex64::default(); 1 << n];
    reg[0] = Complex64::new(1.0, 0.0);
    interpret(&program.state_prep, &mut reg)?;
    let prep_fidelity = inner(&reg, &program.initial).norm_sqr();
    interpret(&program.ramp, &mut reg)?;
    for _ in 0..steps {
        interpret(&program.step, &mut reg)?;
    }
    let mut matrix = program.apply_matrix_stages(&program.ramp_stages, &program.initial)?;
    let product = PauliProduct::new(&program.decomposition);
    for _ in 0..steps {
        trotter_step(&program.free_energies, &product, 1.0, &mut matrix, dt);
    }
    let exact = program.to_register(exact_reference);
    Ok(CircuitCheck {
        prep_fidelity,
        matrix_fidelity: inner(&reg, &matrix).norm_sqr(),
        exact_fidelity: inner(&reg, &exact).norm_sqr(),
        leakage: program.leakage(&reg),
    })
}

/// Basis, padded operators and circuits for the configured packet.
pub fn compile_config(c: &RunConfig) -> htscatter_core::Result<(StateVector, Vec<Complex64>, CompiledProgram)> {
    let basis = enumerate_basis(&c.model_params()?, c.truncation_spec(), &c.enumeration_options())?;
    let h = assemble(&basis)?;
    let (mut psi, _) = two_packet_state(&basis, &c.packet_spec()?)?;
    apply_diagonal_phases(&h.free_energies, psi.amplitudes_mut(), c.schedule.free_displacement_time);
    let schedule = c.ramp_schedule()?;
    let options = CompileOptions {
        penalty: c.circuit.penalty,
        drop_threshold: c.circuit.drop_threshold,
        dt: c.circuit.dt,
        reorder: c.circuit.reorder,
    };
    let program = compile_program(&h.free_energies, &h.interaction, psi.amplitudes(), &schedule, &options)?;
    let prepared = adiabatic_prepare(&RampOperators::new(&h), &psi, &schedule, Propagation::Exact)?;
    let evolved = exact_evolve(&h.full, &prepared, c.circuit.trotter_steps as f64 * c.circuit.dt)?;
    Ok((psi, evolved.into_amplitudes(), program))
}

pub fn run_emit_circuit(loaded: &LoadedConfig, options: &RunOptions) -> Result<RunManifest, RunError> {
    let mut run = Run::start(loaded, options, "emit-circuit")?;
    let c = run.config().clone();
    let (psi, exact, program) = compile_config(&c)?;
    run.dimension = Some(psi.len());
    run.qubits = Some(program.num_qubits as u32);
    run.dir.write("prep.circ", write_circuit(&program.state_prep).as_bytes())?;
    run.dir.write("ramp.circ", write_circuit(&program.ramp).as_bytes())?;
    run.dir.write("step.circ", write_circuit(&program.step).as_bytes())?;

    let mut t = Table::new(&["circuit", "qubits", "total_gates", "two_qubit_gates", "depth"]);
    input_comments(&mut t, &c);
    t.comment("p0", num(c.packet.p0))
        .comment("delta", num(c.packet.delta))
        .comment("ramp_tau", num(c.schedule.ramp_tau))
        .comment("ramp_steps", c.schedule.ramp_steps)
        .comment("dt", num(c.circuit.dt))
        .comment("reorder", c.circuit.reorder)
        .comment("support_qubits", program.permutation.support_qubits);
    for (name, circuit, qubits) in [
        ("prep", &program.state_prep, program.permutation.support_qubits),
        ("ramp", &program.ramp, program.num_qubits),
        ("step", &program.step, program.num_qubits),
    ] {
        let r = gate_report(circuit);
        t.push(vec![
            name.into(),
            qubits.to_string(),
            r.total_gates.to_string(),
            r.two_qubit_gates.to_string(),
            r.depth.to_string(),
        ]);
    }
    run.table("gate_report.csv", &t)?;

    let mut terms = Table::new(&["pauli", "coefficient"]);
    terms.comment("dropped_weight", num(program.decomposition.dropped_weight));
    for term in &program.decomposition.terms {
        terms.push(vec![term.letters(program.num_qubits), num(term.coefficient)]);
    }
    run.table("interaction_pauli.csv", &terms)?;

    run.metric("supportQubits", json!(program.permutation.support_qubits));
    run.metric("penalty", json!(program.penalty));
    run.metric("pauliTerms", json!(program.decomposition.terms.len()));
    run.metric("droppedWeight", json!(program.decomposition.dropped_weight));
    let mut failure = None;
    if program.num_qubits <= INTERPRETER_CEILING {
        let check = check_program(&program, &exact, c.circuit.trotter_steps, c.circuit.dt)?;
        run.metric("prepFidelity", json!(check.prep_fidelity));
        run.metric("interpreterFidelity", json!(check.matrix_fidelity));
        run.metric("exactFidelity", json!(check.exact_fidelity));
        run.metric("leakage", json!(check.leakage));
        if !(check.matrix_fidelity >= SELF_CHECK_FLOOR) {
            failure = Some(format!(
                "interpreter fidelity {} below {SELF_CHECK_FLOOR}",
                check.matrix_fidelity
            ));
        }
    } else {
        run.metric("interpreterFidelity", Value::Null);
    }
    let manifest = run.finish()?;
    match failure {
        Some(msg) => Err(RunError::Check(msg)),
        None => Ok(manifest),
    }
}
