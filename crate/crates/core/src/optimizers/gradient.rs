//! Baselines: four-term parameter-shift gradient descent and Rotosolve.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use crate::error::{Error, Result};
use crate::fourier::{equidistant_grid, fit_1d_interpolate, SampleSet};
use crate::trig_min::global_min_1d_near;

use super::config::ConvergenceConfig;
use super::evaluator::EnergyEvaluator;
use super::solve::StepResult;
use super::trace::EventKind;

const D1: f64 = 0.5;
const D2: f64 = (SQRT_2 - 1.0) / 4.0;
const ALPHA: f64 = FRAC_PI_2;
const BETA: f64 = PI;

/// Exact partial derivative from four shifted energies.
///
/// The constants `d1 = 1/2`, `d2 = (sqrt 2 - 1)/4` with shifts `pi/2`, `pi` hold for
/// `exp(-i phi G / 2)`; a slot `exp(-i s theta G)` has `phi = 2 s theta`, so the shifts
/// shrink by `2s` and the result is scaled by `2s`.
pub fn ps_gradient(ev: &mut EnergyEvaluator, theta: &[f64], j: usize) -> Result<f64> {
    ev.ansatz().check_parameters(theta)?;
    let slots: Vec<f64> = ev.ansatz().slots().iter().filter(|s| s.param == j).map(|s| s.scale).collect();
    let scale = match slots.as_slice() {
        [s] => *s,
        [] => return Err(Error::ParameterOutOfRange { index: j, n_parameters: ev.n_parameters() }),
        _ => return Err(Error::SharedParameter(j)),
    };
    let k = 2.0 * scale;
    let mut probe = theta.to_vec();
    let mut f = |shift: f64| -> Result<f64> {
        probe[j] = theta[j] + shift / k;
        ev.energy_focus(&probe, Some(j))
    };
    let (ap, am) = (f(ALPHA)?, f(-ALPHA)?);
    let (bp, bm) = (f(BETA)?, f(-BETA)?);
    Ok(k * (D1 * (ap - am) - D2 * (bp - bm)))
}

/// All partial derivatives, each charged as the four shifted evaluations of
/// [`ps_gradient`]. Without noise the shifted energies are not needed and the
/// gradient is computed in one reverse pass.
fn full_gradient(ev: &mut EnergyEvaluator, theta: &[f64]) -> Result<Vec<f64>> {
    let n = ev.n_parameters();
    if !ev.noise().is_off() {
        return (0..n).map(|j| ps_gradient(ev, theta, j)).collect();
    }
    ev.ansatz().check_parameters(theta)?;
    let mut scales = vec![None; n];
    for slot in ev.ansatz().slots() {
        if scales[slot.param].replace(slot.scale).is_some() {
            return Err(Error::SharedParameter(slot.param));
        }
    }
    let grad = ev.exact_gradient(theta)?;
    for (j, scale) in scales.into_iter().enumerate() {
        let k = 2.0 * scale.ok_or(Error::ParameterOutOfRange { index: j, n_parameters: n })?;
        for shift in [ALPHA, -ALPHA, BETA, -BETA] {
            ev.charge(Some(j), Some(theta[j] + shift / k));
        }
    }
    Ok(grad)
}

#[derive(Debug, Clone)]
pub struct GradientOutcome {
    pub theta: Vec<f64>,
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Energy at the start followed by the energy after each iteration.
    pub energies: Vec<f64>,
}

/// Full-gradient descent in the angles `phi_j = 2 s_j theta_j`, i.e.
/// `theta_j <- theta_j - step * (df/dtheta_j) / (2 s_j)^2`; one energy evaluation per
/// iteration monitors convergence on top of the `4N` shift evaluations. In gradient
/// mode the run stops, before stepping, once every partial is within `eps`.
pub fn gradient_descent(
    ev: &mut EnergyEvaluator,
    theta0: &[f64],
    step: f64,
    config: &ConvergenceConfig,
) -> Result<GradientOutcome> {
    config.validate()?;
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Config(format!("step size must be positive, got {step}")));
    }
    ev.ansatz().check_parameters(theta0)?;
    let e0 = ev.energy(theta0)?;
    gradient_descent_from(ev, theta0, e0, step, config)
}

pub(crate) fn gradient_descent_from(
    ev: &mut EnergyEvaluator,
    theta0: &[f64],
    e0: f64,
    step: f64,
    config: &ConvergenceConfig,
) -> Result<GradientOutcome> {
    // the step is taken in phi = 2 s theta, where the four-term rule's constants live
    let metric: Vec<f64> = (0..ev.n_parameters())
        .map(|j| {
            let s = ev.ansatz().slots().iter().find(|s| s.param == j).map_or(0.5, |s| s.scale);
            1.0 / (4.0 * s * s)
        })
        .collect();
    let mut theta = theta0.to_vec();
    let mut energies = vec![e0];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_sweeps {
        iterations += 1;
        let grad = full_gradient(ev, &theta)?;
        if config.gradient_converged(&grad) {
            converged = true;
            break;
        }
        for ((t, g), m) in theta.iter_mut().zip(&grad).zip(&metric) {
            *t -= step * m * g;
        }
        let e = ev.energy(&theta)?;
        for (j, &t) in theta.iter().enumerate() {
            ev.record(EventKind::ParameterUpdate, Some(j), Some(t), Some(e));
        }
        ev.record(EventKind::SweepBoundary, None, None, Some(e));
        let previous = *energies.last().expect("non-empty");
        energies.push(e);
        if config.converged(previous, e) {
            converged = true;
            break;
        }
        if config.noisy_halt(&energies) {
            break;
        }
    }
    let energy = *energies.last().expect("non-empty");
    Ok(GradientOutcome { theta, energy, iterations, converged, energies })
}

/// Rotosolve coordinate step for a self-inverse slot `exp(-i s theta P)`: the landscape
/// is `A cos(w theta - phi) + c` with `w = 2s`, fixed by the current energy plus two
/// new samples a third of a period away. The returned series is in `u = w theta`.
pub fn rotosolve_step(ev: &mut EnergyEvaluator, theta: &[f64], j: usize, e_current: f64) -> Result<StepResult> {
    ev.ansatz().check_parameters(theta)?;
    let slots: Vec<_> = ev.ansatz().slots().iter().filter(|s| s.param == j).cloned().collect();
    let slot = match slots.as_slice() {
        [s] => s,
        [] => return Err(Error::ParameterOutOfRange { index: j, n_parameters: ev.n_parameters() }),
        _ => return Err(Error::SharedParameter(j)),
    };
    if !slot.generator.is_self_inverse() {
        return Err(Error::NotSelfInverse);
    }
    let w = 2.0 * slot.scale;
    let u0 = w * theta[j];
    let us = equidistant_grid(u0, 3);
    let mut energies = vec![e_current];
    let mut probe = theta.to_vec();
    for &u in &us[1..] {
        probe[j] = u / w;
        energies.push(ev.energy_focus(&probe, Some(j))?);
    }
    let mut samples = SampleSet::one_d(&us, &energies)?;
    samples.equidistant = true;
    samples.origin = vec![u0];
    let series = fit_1d_interpolate(&samples, 1)?;
    let (u, f) = global_min_1d_near(&series, u0);
    let mut out = theta.to_vec();
    let energy = if f <= e_current {
        out[j] = u / w;
        f
    } else {
        e_current
    };
    Ok(StepResult { param: j, theta: out, energy, series, samples })
}

/// Rotosolve sweeps; every parameter must drive exactly one self-inverse generator.
pub fn rotosolve(ev: &mut EnergyEvaluator, theta0: &[f64], config: &ConvergenceConfig) -> Result<GradientOutcome> {
    config.validate()?;
    config.require_energy_mode()?;
    ev.ansatz().check_parameters(theta0)?;
    for slot in ev.ansatz().slots() {
        if !slot.generator.is_self_inverse() {
            return Err(Error::NotSelfInverse);
        }
    }
    let n = ev.n_parameters();
    let mut theta = theta0.to_vec();
    let mut e = ev.energy(theta0)?;
    let mut energies = vec![e];
    let mut orderer = config.orderer();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_sweeps {
        iterations += 1;
        for j in orderer.next(n) {
            let step = rotosolve_step(ev, &theta, j, e)?;
            theta = step.theta;
            e = step.energy;
            ev.record(EventKind::ParameterUpdate, Some(j), Some(theta[j]), Some(e));
        }
        ev.record(EventKind::SweepBoundary, None, None, Some(e));
        let previous = *energies.last().expect("non-empty");
        energies.push(e);
        if config.converged(previous, e) {
            converged = true;
            break;
        }
    }
    Ok(GradientOutcome { theta, energy: e, iterations, converged, energies })
}
