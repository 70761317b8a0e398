//! ExcitationSolve: exact coordinate (and pairwise) minimisation from reconstructed landscapes.

use crate::ansatz::AnsatzCircuit;
use crate::error::{Error, Result};
use crate::fourier::{
    circular_distance, equidistant_grid, fit_1d_interpolate, fit_nd, tensor_grid, FourierSeries1D, FourierSeriesND,
    SampleSet,
};
use crate::trig_min::{global_min_1d_near, global_min_nd};

use super::config::ConvergenceConfig;
use super::evaluator::EnergyEvaluator;
use super::trace::EventKind;

/// Fourier order of the landscape in parameter `j`: 2 per excitation slot at unit
/// scale, 1 per self-inverse rotation at half scale.
pub fn parameter_order(ansatz: &AnsatzCircuit, j: usize) -> Result<usize> {
    if j >= ansatz.n_parameters() {
        return Err(Error::ParameterOutOfRange { index: j, n_parameters: ansatz.n_parameters() });
    }
    let mut order = 0;
    for slot in ansatz.slots().iter().filter(|s| s.param == j) {
        if slot.scale == 1.0 {
            order += 2;
        } else if slot.scale == 0.5 && slot.generator.is_self_inverse() {
            order += 1;
        } else {
            return Err(Error::Config(format!(
                "parameter {j}: angle scale {} gives a landscape that is not 2pi-periodic",
                slot.scale
            )));
        }
    }
    Ok(order)
}

/// Outcome of one coordinate update.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub param: usize,
    pub theta: Vec<f64>,
    pub energy: f64,
    pub series: FourierSeries1D,
    pub samples: SampleSet,
}

/// Samples `theta_j + 2 pi l / (2K + 1)` for `l >= 1`, reuses `e_current` at `l = 0`,
/// fits the order-`K` landscape and jumps to its global minimum.
pub fn excitation_solve_step(ev: &mut EnergyEvaluator, theta: &[f64], j: usize, e_current: f64) -> Result<StepResult> {
    ev.ansatz().check_parameters(theta)?;
    let order = parameter_order(ev.ansatz(), j)?;
    let grid = equidistant_grid(theta[j], 2 * order + 1);
    let mut energies = vec![e_current];
    let mut probe = theta.to_vec();
    for &t in &grid[1..] {
        probe[j] = t;
        energies.push(ev.energy_focus(&probe, Some(j))?);
    }
    let mut samples = SampleSet::one_d(&grid, &energies)?;
    samples.equidistant = true;
    samples.origin = vec![theta[j]];
    let series = fit_1d_interpolate(&samples, order)?;
    let (t, f) = global_min_1d_near(&series, theta[j]);
    let mut out = theta.to_vec();
    let energy = if f <= e_current {
        out[j] = t;
        f
    } else {
        e_current
    };
    Ok(StepResult { param: j, theta: out, energy, series, samples })
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub theta: Vec<f64>,
    pub energy: f64,
    pub sweeps: usize,
    pub converged: bool,
    /// Energy before the first sweep followed by the energy after each sweep.
    pub sweep_energies: Vec<f64>,
}

/// Coordinate sweeps until the per-sweep energy change drops to the threshold.
pub fn excitation_solve(ev: &mut EnergyEvaluator, theta0: &[f64], config: &ConvergenceConfig) -> Result<SolveOutcome> {
    config.validate()?;
    ev.ansatz().check_parameters(theta0)?;
    let e0 = ev.energy(theta0)?;
    excitation_solve_from(ev, theta0, e0, config)
}

/// As [`excitation_solve`], starting from an energy already measured at `theta0`.
pub fn excitation_solve_from(
    ev: &mut EnergyEvaluator,
    theta0: &[f64],
    e0: f64,
    config: &ConvergenceConfig,
) -> Result<SolveOutcome> {
    config.validate()?;
    config.require_energy_mode()?;
    ev.ansatz().check_parameters(theta0)?;
    let n = ev.n_parameters();
    let mut theta = theta0.to_vec();
    let mut e = e0;
    let mut history = vec![e];
    let mut orderer = config.orderer();
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < config.max_sweeps {
        sweeps += 1;
        for j in orderer.next(n) {
            if !config.reuse_energy {
                e = ev.energy(&theta)?;
            }
            let step = excitation_solve_step(ev, &theta, j, e)?;
            theta = step.theta;
            e = step.energy;
            ev.record(EventKind::ParameterUpdate, Some(j), Some(theta[j]), Some(e));
        }
        ev.record(EventKind::SweepBoundary, None, None, Some(e));
        let previous = *history.last().expect("history starts non-empty");
        history.push(e);
        if config.converged(previous, e) {
            converged = true;
            break;
        }
        if config.noisy_halt(&history) {
            break;
        }
    }
    Ok(SolveOutcome { theta, energy: e, sweeps, converged, sweep_energies: history })
}

/// Outcome of a joint two-parameter update.
#[derive(Debug, Clone)]
pub struct Step2D {
    pub params: (usize, usize),
    pub theta: Vec<f64>,
    pub energy: f64,
    pub series: FourierSeriesND,
    pub samples: SampleSet,
    pub new_evaluations: u64,
}

/// Joint update of `(i, j)` from the full tensor grid around `theta`, reusing only
/// the unshifted energy.
pub fn excitation_solve_2d(ev: &mut EnergyEvaluator, theta: &[f64], pair: (usize, usize), e_current: f64) -> Result<Step2D> {
    let centre = vec![theta[pair.0], theta[pair.1]];
    excitation_solve_2d_with(ev, theta, pair, e_current, &[(centre, e_current)])
}

/// Joint update where `known` grid energies (as `([theta_i, theta_j], E)`) are
/// reused instead of re-measured. `e_current` is the energy at `theta`.
pub fn excitation_solve_2d_with(
    ev: &mut EnergyEvaluator,
    theta: &[f64],
    pair: (usize, usize),
    e_current: f64,
    known: &[(Vec<f64>, f64)],
) -> Result<Step2D> {
    ev.ansatz().check_parameters(theta)?;
    let (i, j) = pair;
    if i == j {
        return Err(Error::Config(format!("2-D step needs two distinct parameters, got ({i}, {j})")));
    }
    let orders = [parameter_order(ev.ansatz(), i)?, parameter_order(ev.ansatz(), j)?];
    let points = tensor_grid(&[theta[i], theta[j]], &orders);
    let before = ev.counter();
    let mut energies = Vec::with_capacity(points.len());
    let mut probe = theta.to_vec();
    for p in &points {
        let reuse = known
            .iter()
            .find(|(q, _)| circular_distance(q[0], p[0]) < 1e-12 && circular_distance(q[1], p[1]) < 1e-12);
        let e = match reuse {
            Some(&(_, e)) => e,
            None => {
                probe[i] = p[0];
                probe[j] = p[1];
                ev.energy(&probe)?
            }
        };
        energies.push(e);
    }
    let mut samples = SampleSet::new(points, energies)?;
    samples.equidistant = true;
    samples.origin = vec![theta[i], theta[j]];
    let series = fit_nd(&samples, &orders)?;
    let (best, f) = global_min_nd(&series)?;
    let mut out = theta.to_vec();
    let energy = if f <= e_current {
        out[i] = best[0];
        out[j] = best[1];
        f
    } else {
        e_current
    };
    ev.record(EventKind::ParameterUpdate, Some(i), Some(out[i]), Some(energy));
    ev.record(EventKind::ParameterUpdate, Some(j), Some(out[j]), Some(energy));
    Ok(Step2D { params: pair, theta: out, energy, series, samples, new_evaluations: ev.counter() - before })
}

/// Runs one coordinate step per parameter from the same `theta` without moving it,
/// returning the steps (each carrying its attainable energy) in parameter order.
pub fn score_parameters(ev: &mut EnergyEvaluator, theta: &[f64], e_current: f64) -> Result<Vec<StepResult>> {
    (0..ev.n_parameters()).map(|j| excitation_solve_step(ev, theta, j, e_current)).collect()
}

/// The two parameters with the largest single-step improvement (ties to the lower
/// index), plus the axis samples of both that lie on their joint grid.
pub fn auto_pair(scores: &[StepResult], e_current: f64) -> Result<((usize, usize), Vec<(Vec<f64>, f64)>)> {
    if scores.len() < 2 {
        return Err(Error::Config("automatic pair selection needs at least two parameters".into()));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].energy.total_cmp(&scores[b].energy).then(a.cmp(&b)));
    let (a, b) = (idx[0].min(idx[1]), idx[0].max(idx[1]));
    let (sa, sb) = (&scores[a], &scores[b]);
    let (ta, tb) = (sa.samples.origin[0], sb.samples.origin[0]);
    let mut known = vec![(vec![ta, tb], e_current)];
    for (p, &e) in sa.samples.points.iter().zip(&sa.samples.energies).skip(1) {
        known.push((vec![p[0], tb], e));
    }
    for (p, &e) in sb.samples.points.iter().zip(&sb.samples.energies).skip(1) {
        known.push((vec![ta, p[0]], e));
    }
    Ok(((a, b), known))
}
