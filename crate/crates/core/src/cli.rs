//! Command-line front end: fixture loading, optimiser dispatch and trace output.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::adaptive::{adapt_vqe, AdaptConfig, Criterion, OperatorPool};
use crate::ansatz::AnsatzCircuit;
use crate::error::{Error, Result};
use crate::exact::{ground_energy_dense_sector, ground_energy_iterative, DENSE_QUBIT_LIMIT};
use crate::excitations::{build_uccsd_pool_ordered, generator, hartree_fock_state, ExcitationGenerator, ExcitationKind, PoolOrder};
use crate::fixture::{default_dir, Fixture};
use crate::fourier::{equidistant_grid, fit_1d_interpolate, fit_1d_lstsq, FourierSeries1D, SampleSet};
use crate::noise::NoiseModel;
use crate::optimizers::{
    auto_pair, default_gd_step, default_thresholds, excitation_solve_2d, excitation_solve_2d_with,
    excitation_solve_from, gradient_descent, molecule_of, rotosolve, score_parameters, ConvergenceConfig,
    ConvergenceMode, EnergyEvaluator, EventKind, RunMetadata, SweepOrder, Thresholds,
};
use crate::trig_min::global_min_1d_near;

#[derive(Parser, Debug)]
#[command(name = "excitation-solve", version, about = "ExcitationSolve optimisers on molecular fixtures")]
struct Cli {
    /// Directory holding `<name>.ham` / `<name>.json` fixture pairs.
    #[arg(long, global = true)]
    fixtures_dir: Option<PathBuf>,
    /// Directory for trace and landscape files (created if missing).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print recorded and recomputed HF/FCI energies.
    Diagonalize { fixture: String },
    /// Fixed UCCSD ansatz optimisation.
    Vqe(VqeArgs),
    /// ADAPT-VQE.
    Adapt(AdaptArgs),
    /// Sample one parameter's landscape and fit it.
    Reconstruct {
        fixture: String,
        #[arg(long)]
        param: usize,
        /// Number of equidistant samples (5 is exact interpolation; more uses least squares).
        #[arg(long, default_value_t = 5)]
        points: usize,
        #[command(flatten)]
        ansatz: AnsatzArgs,
    },
    /// Sample the 5x5 grid of two parameters and fit the 2-D series.
    Landscape2d {
        fixture: String,
        #[arg(long, value_parser = parse_pair)]
        params: (usize, usize),
        #[command(flatten)]
        ansatz: AnsatzArgs,
    },
    /// Run `vqe` over every geometry of a molecule's dissociation set.
    Sweep {
        molecule: String,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        ansatz: AnsatzArgs,
    },
}

#[derive(Args, Debug, Clone)]
struct AnsatzArgs {
    #[arg(long, value_enum, default_value_t = AnsatzKind::Uccsd)]
    ansatz: AnsatzKind,
    /// Put single excitations before doubles.
    #[arg(long)]
    singles_first: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum AnsatzKind {
    /// Fermionic (Jordan-Wigner) singles and doubles.
    Uccsd,
    /// Qubit excitations without parity strings.
    Qubit,
    /// Every Pauli word of the UCCSD generators as its own rotation.
    Pauli,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum OptimizerKind {
    Excitationsolve,
    Gd,
    Rotosolve,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum OrderKind {
    Fixed,
    Shuffled,
}

#[derive(Args, Debug, Clone, Serialize)]
struct RunArgs {
    #[arg(long, value_enum, default_value_t = OptimizerKind::Excitationsolve)]
    optimizer: OptimizerKind,
    #[arg(long, value_enum, default_value_t = OrderKind::Fixed)]
    order: OrderKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `auto` or `i,j`: one joint 2-D step before the sweeps.
    #[arg(long)]
    two_d: Option<String>,
    /// `off` or `shots=T`.
    #[arg(long, default_value = "off")]
    noise: String,
    /// Energy threshold per sweep (defaults per molecule).
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 100)]
    max_sweeps: usize,
    /// Gradient-descent step (defaults per molecule).
    #[arg(long)]
    step: Option<f64>,
    /// Relative instead of absolute energy threshold.
    #[arg(long)]
    relative: bool,
    /// Re-measure the current energy before every coordinate step.
    #[arg(long)]
    no_reuse: bool,
    /// Stop when a sweep ends above both previous sweeps.
    #[arg(long)]
    noisy_stop: bool,
}

#[derive(Args, Debug, Clone)]
struct VqeArgs {
    fixture: String,
    #[command(flatten)]
    run: RunArgs,
    #[command(flatten)]
    ansatz: AnsatzArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum CriterionArg {
    Energy,
    Gradient,
}

#[derive(Args, Debug, Clone)]
struct AdaptArgs {
    fixture: String,
    #[arg(long, value_enum, default_value_t = CriterionArg::Energy)]
    criterion: CriterionArg,
    #[arg(long)]
    top2: bool,
    #[arg(long)]
    eps_sel: Option<f64>,
    #[arg(long)]
    eps_vqe: Option<f64>,
    #[arg(long, default_value_t = 200)]
    max_operators: usize,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long, default_value = "off")]
    noise: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    singles_first: bool,
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected i,j, got '{s}'"))?;
    let a = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b = b.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((a, b))
}

/// Parses `args` (program name first), runs the command and returns the exit code:
/// 0 on success, 1 for usage errors, 2 for runtime failures.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::UnknownFixture(_) | Error::Config(_) => {
                    let _ = writeln!(err, "run with --help for usage");
                    1
                }
                _ => 2,
            }
        }
    }
}

struct Context {
    dir: PathBuf,
    out: Option<PathBuf>,
}

impl Context {
    fn load(&self, name: &str) -> Result<Fixture> {
        Fixture::load_from(&self.dir, name)
    }

    fn write(&self, file: &str, contents: &str) -> Result<()> {
        if let Some(dir) = &self.out {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(file), contents)?;
        }
        Ok(())
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let ctx = Context { dir: cli.fixtures_dir.clone().unwrap_or_else(default_dir), out: cli.out.clone() };
    match &cli.command {
        Command::Diagonalize { fixture } => diagonalize(&ctx, fixture, out),
        Command::Vqe(a) => {
            let fx = ctx.load(&a.fixture)?;
            let report = vqe(&fx, &a.run, &a.ansatz)?;
            ctx.write("trace.csv", &report.csv)?;
            ctx.write("trace.json", &report.json)?;
            report.print(out)
        }
        Command::Adapt(a) => adapt(&ctx, a, out),
        Command::Reconstruct { fixture, param, points, ansatz } => reconstruct(&ctx, fixture, *param, *points, ansatz, out),
        Command::Landscape2d { fixture, params, ansatz } => landscape2d(&ctx, fixture, *params, ansatz, out),
        Command::Sweep { molecule, run, ansatz } => sweep(&ctx, molecule, run, ansatz, out),
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e)
}

fn diagonalize(ctx: &Context, name: &str, out: &mut dyn Write) -> Result<()> {
    let fx = ctx.load(name)?;
    let hf = hartree_fock_state(fx.n_qubits, fx.n_electrons)?;
    let e_hf = crate::state::expectation(&fx.hamiltonian, &hf)?;
    let spec = if fx.n_qubits <= DENSE_QUBIT_LIMIT {
        ground_energy_dense_sector(&fx.hamiltonian, Some(fx.sector))?
    } else {
        ground_energy_iterative(&fx.hamiltonian, Some(fx.sector))?
    };
    writeln!(out, "fixture {}", fx.name).map_err(io)?;
    writeln!(out, "n_qubits {}", fx.n_qubits).map_err(io)?;
    writeln!(out, "n_electrons {}", fx.n_electrons).map_err(io)?;
    writeln!(out, "sector {}", fx.sector).map_err(io)?;
    writeln!(out, "hf_energy {:.12}", e_hf).map_err(io)?;
    writeln!(out, "hf_energy_recorded {:.12}", fx.hf_energy).map_err(io)?;
    writeln!(out, "fci_energy {:.12}", spec.energy).map_err(io)?;
    if let Some(f) = fx.fci_energy {
        writeln!(out, "fci_energy_recorded {:.12}", f).map_err(io)?;
    }
    writeln!(out, "solver {}", serde_json::to_string(&spec.solver)?.trim_matches('"')).map_err(io)?;
    writeln!(out, "residual {:.3e}", spec.residual).map_err(io)?;
    Ok(())
}

fn pool_generators(fx: &Fixture, args: &AnsatzArgs) -> Result<Vec<Arc<ExcitationGenerator>>> {
    let order = if args.singles_first { PoolOrder::SinglesFirst } else { PoolOrder::DoublesFirst };
    let kind = match args.ansatz {
        AnsatzKind::Qubit => ExcitationKind::Qubit,
        _ => ExcitationKind::Fermionic,
    };
    let specs = build_uccsd_pool_ordered(fx.n_qubits, fx.n_electrons, kind, order)?;
    let gens = specs.iter().map(|s| generator(s, fx.n_qubits)).collect::<Result<Vec<_>>>()?;
    Ok(match args.ansatz {
        AnsatzKind::Pauli => gens
            .iter()
            .flat_map(|g| g.terms().iter().map(|&(_, w)| Arc::new(ExcitationGenerator::pauli_rotation(w))))
            .collect(),
        _ => gens.into_iter().map(Arc::new).collect(),
    })
}

fn build_ansatz(fx: &Fixture, args: &AnsatzArgs) -> Result<AnsatzCircuit> {
    let mut c = AnsatzCircuit::new(fx.n_qubits);
    for g in pool_generators(fx, args)? {
        if args.ansatz == AnsatzKind::Pauli {
            let p = c.n_parameters();
            c.push_rotation(g, p)?;
        } else {
            c.push_new(g)?;
        }
    }
    Ok(c)
}

fn evaluator(fx: &Fixture, ansatz: AnsatzCircuit, noise: NoiseModel) -> Result<EnergyEvaluator> {
    let hf = hartree_fock_state(fx.n_qubits, fx.n_electrons)?;
    EnergyEvaluator::new(Arc::new(fx.hamiltonian.clone()), hf, ansatz, noise)
}

fn thresholds(fx: &Fixture) -> Thresholds {
    default_thresholds(molecule_of(&fx.name)).unwrap_or(Thresholds {
        excitation_solve: 1e-6,
        gradient_vqe: 1e-8,
        gradient_selection: 1e-8,
    })
}

/// Outcome of one `vqe` run.
struct VqeReport {
    fixture: String,
    geometry: String,
    optimizer: OptimizerKind,
    energy: f64,
    exact_energy: f64,
    fci_error: Option<f64>,
    evaluations: u64,
    iterations: usize,
    converged: bool,
    csv: String,
    json: String,
}

impl VqeReport {
    fn print(&self, out: &mut dyn Write) -> Result<()> {
        let name = serde_json::to_string(&self.optimizer)?;
        writeln!(out, "fixture {}", self.fixture).map_err(io)?;
        writeln!(out, "optimizer {}", name.trim_matches('"')).map_err(io)?;
        writeln!(out, "energy {:.12}", self.energy).map_err(io)?;
        writeln!(out, "exact_energy {:.12}", self.exact_energy).map_err(io)?;
        if let Some(e) = self.fci_error {
            writeln!(out, "fci_error {:.3e}", e).map_err(io)?;
        }
        writeln!(out, "evaluations {}", self.evaluations).map_err(io)?;
        writeln!(out, "iterations {}", self.iterations).map_err(io)?;
        writeln!(out, "converged {}", self.converged).map_err(io)?;
        Ok(())
    }
}

fn vqe(fx: &Fixture, run: &RunArgs, ansatz_args: &AnsatzArgs) -> Result<VqeReport> {
    let noise = NoiseModel::parse(&run.noise, run.seed)?;
    let ansatz = build_ansatz(fx, ansatz_args)?;
    let mut ev = evaluator(fx, ansatz, noise)?;
    let th = thresholds(fx);
    let eps = run.eps.unwrap_or(match run.optimizer {
        OptimizerKind::Gd => th.gradient_vqe,
        _ => th.excitation_solve,
    });
    let config = ConvergenceConfig {
        eps,
        max_sweeps: run.max_sweeps,
        order: match run.order {
            OrderKind::Fixed => SweepOrder::Fixed,
            OrderKind::Shuffled => SweepOrder::Shuffled(run.seed),
        },
        mode: if run.relative { ConvergenceMode::Relative } else { ConvergenceMode::Absolute },
        reuse_energy: !run.no_reuse,
        noisy_stop: run.noisy_stop,
    };
    config.validate()?;
    let n = ev.n_parameters();
    let theta0 = vec![0.0; n];
    let (theta, energy, iterations, converged) = match run.optimizer {
        OptimizerKind::Excitationsolve => {
            let mut theta = theta0;
            let mut e = ev.energy(&theta)?;
            if let Some(spec) = &run.two_d {
                let step = if spec == "auto" {
                    let scores = score_parameters(&mut ev, &theta, e)?;
                    let (pair, known) = auto_pair(&scores, e)?;
                    excitation_solve_2d_with(&mut ev, &theta, pair, e, &known)?
                } else {
                    let pair = parse_pair(spec).map_err(Error::Config)?;
                    if pair.0 >= n || pair.1 >= n {
                        return Err(Error::Config(format!("--two-d {spec}: only {n} parameters")));
                    }
                    excitation_solve_2d(&mut ev, &theta, pair, e)?
                };
                theta = step.theta;
                e = step.energy;
            }
            let o = excitation_solve_from(&mut ev, &theta, e, &config)?;
            (o.theta, o.energy, o.sweeps, o.converged)
        }
        OptimizerKind::Gd => {
            let step = run
                .step
                .or_else(|| default_gd_step(molecule_of(&fx.name)))
                .ok_or_else(|| Error::Config("no default step size for this fixture; pass --step".into()))?;
            let o = gradient_descent(&mut ev, &theta0, step, &config)?;
            (o.theta, o.energy, o.iterations, o.converged)
        }
        OptimizerKind::Rotosolve => {
            let o = rotosolve(&mut ev, &theta0, &config)?;
            (o.theta, o.energy, o.iterations, o.converged)
        }
    };
    let exact_energy = ev.exact_energy(&theta)?;
    let metadata = RunMetadata {
        fixture: fx.name.clone(),
        optimizer: serde_json::to_string(&run.optimizer)?.trim_matches('"').to_string(),
        config: serde_json::json!({
            "run": run,
            "ansatz": ansatz_args.ansatz,
            "singles_first": ansatz_args.singles_first,
            "convergence": config,
            "noise": noise,
        }),
        seed: Some(run.seed),
    };
    Ok(VqeReport {
        fixture: fx.name.clone(),
        geometry: fx.geometry.clone(),
        optimizer: run.optimizer,
        energy,
        exact_energy,
        fci_error: fx.fci_energy.map(|f| (exact_energy - f).abs()),
        evaluations: ev.counter(),
        iterations,
        converged,
        csv: ev.trace().to_csv(),
        json: ev.trace().to_json(&metadata),
    })
}

fn adapt(ctx: &Context, a: &AdaptArgs, out: &mut dyn Write) -> Result<()> {
    let fx = ctx.load(&a.fixture)?;
    let noise = NoiseModel::parse(&a.noise, a.seed)?;
    let order = if a.singles_first { PoolOrder::SinglesFirst } else { PoolOrder::DoublesFirst };
    let specs = build_uccsd_pool_ordered(fx.n_qubits, fx.n_electrons, ExcitationKind::Fermionic, order)?;
    let mut pool = OperatorPool::from_specs(&specs, fx.n_qubits)?;
    let mut ev = evaluator(&fx, AnsatzCircuit::new(fx.n_qubits), noise)?;
    let th = thresholds(&fx);
    let criterion = match a.criterion {
        CriterionArg::Energy => Criterion::Energy,
        CriterionArg::Gradient => Criterion::Gradient,
    };
    let (sel, vqe) = match criterion {
        Criterion::Energy => (th.excitation_solve, th.excitation_solve),
        Criterion::Gradient => (th.gradient_selection, th.gradient_vqe),
    };
    let mut config = AdaptConfig::new(criterion, a.eps_sel.unwrap_or(sel), a.eps_vqe.unwrap_or(vqe));
    config.max_operators = a.max_operators;
    config.top2 = a.top2;
    if let Some(s) = a.step.or_else(|| default_gd_step(molecule_of(&fx.name))) {
        config.gd_step = s;
    }
    let outcome = adapt_vqe(&mut ev, &mut pool, &config)?;
    let st = &outcome.state;
    let exact = ev.exact_energy(&st.theta)?;
    let metadata = RunMetadata {
        fixture: fx.name.clone(),
        optimizer: format!("adapt-{}", serde_json::to_string(&criterion)?.trim_matches('"')),
        config: serde_json::json!({ "adapt": config, "noise": noise, "singles_first": a.singles_first }),
        seed: Some(a.seed),
    };
    ctx.write("trace.csv", &ev.trace().to_csv())?;
    ctx.write("trace.json", &ev.trace().to_json(&metadata))?;
    let rankings: Vec<_> = ev.trace().of_kind(EventKind::PoolSelection).collect();
    ctx.write("rankings.json", &serde_json::to_string_pretty(&rankings)?)?;
    writeln!(out, "fixture {}", fx.name).map_err(io)?;
    writeln!(out, "criterion {}", serde_json::to_string(&criterion)?.trim_matches('"')).map_err(io)?;
    writeln!(out, "operators {}", st.appended.len()).map_err(io)?;
    for &k in &st.appended {
        writeln!(out, "  {}", pool.label(k)).map_err(io)?;
    }
    writeln!(out, "energy {:.12}", st.energy).map_err(io)?;
    writeln!(out, "exact_energy {:.12}", exact).map_err(io)?;
    if let Some(f) = fx.fci_energy {
        writeln!(out, "fci_error {:.3e}", (exact - f).abs()).map_err(io)?;
    }
    writeln!(out, "evaluations {}", ev.counter()).map_err(io)?;
    writeln!(out, "converged {}", outcome.converged).map_err(io)?;
    Ok(())
}

#[derive(Serialize)]
struct CurvePoint {
    theta: f64,
    exact: f64,
    fitted: f64,
}

#[derive(Serialize)]
struct Reconstruction {
    fixture: String,
    param: usize,
    samples: SampleSet,
    series: FourierSeries1D,
    minimum: (f64, f64),
    evaluations: u64,
    curve: Vec<CurvePoint>,
}

fn reconstruct(ctx: &Context, name: &str, j: usize, points: usize, args: &AnsatzArgs, out: &mut dyn Write) -> Result<()> {
    let fx = ctx.load(name)?;
    let ansatz = build_ansatz(&fx, args)?;
    let order = crate::optimizers::parameter_order(&ansatz, j)?;
    if points < 2 * order + 1 {
        return Err(Error::Config(format!("--points must be at least {}", 2 * order + 1)));
    }
    let mut ev = evaluator(&fx, ansatz, NoiseModel::Off)?;
    let mut theta = vec![0.0; ev.n_parameters()];
    let grid = equidistant_grid(0.0, points);
    let mut energies = Vec::new();
    for &t in &grid {
        theta[j] = t;
        energies.push(ev.energy_focus(&theta, Some(j))?);
    }
    let mut samples = SampleSet::one_d(&grid, &energies)?;
    samples.equidistant = true;
    let series = if points == 2 * order + 1 { fit_1d_interpolate(&samples, order)? } else { fit_1d_lstsq(&samples, order)? };
    let minimum = global_min_1d_near(&series, 0.0);
    let evaluations = ev.counter();
    let mut curve = Vec::new();
    for k in 0..=200 {
        let t = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * k as f64 / 200.0;
        theta[j] = t;
        curve.push(CurvePoint { theta: t, exact: ev.exact_energy(&theta)?, fitted: series.evaluate(t) });
    }
    let doc = Reconstruction { fixture: fx.name, param: j, samples, series, minimum, evaluations, curve };
    let text = serde_json::to_string_pretty(&doc)?;
    ctx.write("reconstruct.json", &text)?;
    writeln!(out, "{text}").map_err(io)?;
    Ok(())
}

fn landscape2d(ctx: &Context, name: &str, pair: (usize, usize), args: &AnsatzArgs, out: &mut dyn Write) -> Result<()> {
    let fx = ctx.load(name)?;
    let mut ev = evaluator(&fx, build_ansatz(&fx, args)?, NoiseModel::Off)?;
    let n = ev.n_parameters();
    if pair.0 >= n || pair.1 >= n {
        return Err(Error::Config(format!("--params: only {n} parameters")));
    }
    let theta = vec![0.0; n];
    let e = ev.energy(&theta)?;
    let step = excitation_solve_2d(&mut ev, &theta, pair, e)?;
    let doc = serde_json::json!({
        "fixture": fx.name,
        "params": [pair.0, pair.1],
        "samples": step.samples,
        "series": step.series,
        "minimum": { "theta": [step.theta[pair.0], step.theta[pair.1]], "energy": step.energy },
        "evaluations": ev.counter(),
    });
    let text = serde_json::to_string_pretty(&doc)?;
    ctx.write("landscape2d.json", &text)?;
    writeln!(out, "{text}").map_err(io)?;
    Ok(())
}

fn sweep(ctx: &Context, molecule: &str, run: &RunArgs, args: &AnsatzArgs, out: &mut dyn Write) -> Result<()> {
    let names = Fixture::geometry_set(&ctx.dir, molecule)?;
    if names.is_empty() {
        return Err(Error::UnknownFixture(format!("{molecule}_d*")));
    }
    writeln!(out, "fixture,geometry,energy,fci_error,evaluations,iterations,converged").map_err(io)?;
    for name in names {
        let fx = ctx.load(&name)?;
        let r = vqe(&fx, run, args)?;
        let sub = ctx.out.as_ref().map(|d| d.join(&name));
        if let Some(dir) = sub {
            write_file(&dir, "trace.csv", &r.csv)?;
        }
        writeln!(
            out,
            "{},{},{:.12},{},{},{},{}",
            r.fixture,
            r.geometry,
            r.exact_energy,
            r.fci_error.map(|e| format!("{e:.3e}")).unwrap_or_default(),
            r.evaluations,
            r.iterations,
            r.converged
        )
        .map_err(io)?;
    }
    Ok(())
}

fn write_file(dir: &Path, file: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(file), contents)?;
    Ok(())
}
