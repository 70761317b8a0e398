//! Global minimisation of finite Fourier series.
//!
//! One dimension: the zeros of the derivative are the unit-circle eigenvalues
//! of a companion matrix. Several dimensions: gradient descent with step `1/L`
//! seeded from every point of a Nyquist lattice.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{circular_distance, equidistant_grid, FourierSeries1D, FourierSeriesND, MAX_DIMS};

const TWO_PI: f64 = 2.0 * PI;
const UNIT_CIRCLE_TOL: f64 = 1e-7;
const ROOT_TOL: f64 = 1e-8;
const LEADING_TOL: f64 = 1e-12;
/// Candidate minima closer than this in value are treated as tied.
const TIE_TOL: f64 = 1e-10;
const GRAD_TOL: f64 = 1e-10;
const MAX_DESCENT_ITERS: usize = 100_000;

/// Maps an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TWO_PI);
    if t > PI {
        t - TWO_PI
    } else {
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stationary {
    Min,
    Max,
    Saddle,
}

/// Stationary points sorted by value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarySet {
    pub points: Vec<(f64, f64, Stationary)>,
}

/// Drops vanishing leading harmonics. Returns `None` for an identically zero series.
fn reduced(series: &FourierSeries1D) -> Option<FourierSeries1D> {
    let mut k = series.order();
    while k > 0 && series.a[k - 1].hypot(series.b[k - 1]) < LEADING_TOL {
        k -= 1;
    }
    if k == 0 {
        return None;
    }
    Some(FourierSeries1D::new(series.a[..k].to_vec(), series.b[..k].to_vec(), series.c))
}

fn polish(f: &FourierSeries1D, df: &FourierSeries1D, mut t: f64) -> f64 {
    for _ in 0..8 {
        let d = df.evaluate(t);
        if d == 0.0 {
            break;
        }
        let step = f.evaluate(t) / d;
        if !step.is_finite() || step.abs() > 0.1 {
            break;
        }
        t -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    t
}

fn dedup_sorted(mut roots: Vec<f64>) -> Vec<f64> {
    roots.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(roots.len());
    for r in roots {
        if out.iter().all(|&u| circular_distance(u, r) > 1e-9) {
            out.push(r);
        }
    }
    out
}

/// Eigenvalues through a complex Schur form. Plain shifted QR can stall on
/// matrices whose spectrum is symmetric on the unit circle, so on failure the
/// spectrum is translated by a small complex offset and the decomposition retried.
fn eigenvalues(m: &DMatrix<Complex64>) -> Option<Vec<Complex64>> {
    let n = m.nrows();
    for offset in [Complex64::new(0.0, 0.0), Complex64::new(0.137, 0.071), Complex64::new(-0.093, 0.211)] {
        let shifted = m - DMatrix::<Complex64>::identity(n, n) * offset;
        if let Some(schur) = Schur::try_new(shifted, f64::EPSILON, 1000) {
            let (_, t) = schur.unpack();
            return Some((0..n).map(|i| t[(i, i)] + offset).collect());
        }
    }
    None
}

/// Real zeros in `(-pi, pi]` of a Fourier series, constant term included.
///
/// With `z = e^{i theta}`, `2 z^K f(theta)` is a degree-`2K` polynomial with
/// coefficients `h_s`; its companion matrix has ones on the superdiagonal and
/// last row `-h_t / h_{2K}`. Eigenvalues on the unit circle give the zeros.
pub fn companion_roots(series: &FourierSeries1D) -> Result<Vec<f64>> {
    let f = reduced(series).ok_or(Error::IdenticallyZero)?;
    let k = f.order();
    let n = 2 * k;
    let mut h = vec![Complex64::new(0.0, 0.0); n + 1];
    for s in 0..k {
        h[s] = Complex64::new(f.a[k - s - 1], f.b[k - s - 1]);
    }
    h[k] = Complex64::new(2.0 * f.c, 0.0);
    for s in k + 1..=n {
        h[s] = Complex64::new(f.a[s - k - 1], -f.b[s - k - 1]);
    }
    let lead = h[n];
    let mut b = DMatrix::<Complex64>::zeros(n, n);
    for s in 0..n - 1 {
        b[(s, s + 1)] = Complex64::new(1.0, 0.0);
    }
    for t in 0..n {
        b[(n - 1, t)] = -h[t] / lead;
    }
    let scale = f.amplitude().max(f.c.abs()).max(1.0);
    let df = f.derivative();
    let mut roots = Vec::new();
    if let Some(eigs) = eigenvalues(&b) {
        for z in eigs.iter() {
            if (z.norm() - 1.0).abs() < UNIT_CIRCLE_TOL {
                let t = wrap_angle(polish(&f, &df, z.arg()));
                if f.evaluate(t).abs() < ROOT_TOL * scale {
                    roots.push(t);
                }
            }
        }
    }
    Ok(dedup_sorted(roots))
}

/// Sign-change scan plus bisection, used when eigenvalue extraction yields nothing.
fn bracketed_roots(f: &FourierSeries1D, n: usize) -> Vec<f64> {
    let grid: Vec<f64> = (0..=n).map(|i| -PI + TWO_PI * i as f64 / n as f64).collect();
    let mut roots = Vec::new();
    for w in grid.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (f.evaluate(lo), f.evaluate(hi));
        if flo == 0.0 {
            roots.push(lo);
            continue;
        }
        if flo.signum() == fhi.signum() {
            continue;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f.evaluate(mid).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(wrap_angle(0.5 * (lo + hi)));
    }
    dedup_sorted(roots)
}

fn classify(f: &FourierSeries1D, t: f64) -> Stationary {
    let c = f.derivative().derivative().evaluate(t);
    let scale = f.amplitude().max(1.0);
    if c > 1e-9 * scale {
        Stationary::Min
    } else if c < -1e-9 * scale {
        Stationary::Max
    } else {
        Stationary::Saddle
    }
}

/// All stationary points of `f`, with values and classification.
pub fn stationary_points(series: &FourierSeries1D) -> Result<StationarySet> {
    let df = series.derivative();
    let mut roots = companion_roots(&df)?;
    if roots.is_empty() {
        roots = bracketed_roots(&df, 4096);
    }
    let mut points: Vec<(f64, f64, Stationary)> =
        roots.into_iter().map(|t| (t, series.evaluate(t), classify(series, t))).collect();
    points.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(StationarySet { points })
}

/// Global minimum of `series`, preferring among ties the candidate nearest `current`,
/// then the smallest angle. A constant series returns `(current, c)`.
pub fn global_min_1d_near(series: &FourierSeries1D, current: f64) -> (f64, f64) {
    let df = series.derivative();
    if df.amplitude() < LEADING_TOL * series.c.abs().max(1.0) {
        return (current, series.evaluate(current));
    }
    let set = match stationary_points(series) {
        Ok(s) => s,
        Err(_) => return (current, series.evaluate(current)),
    };
    let mut cands = set.points;
    // keep the current point in play so that flat landscapes do not move it
    cands.push((wrap_angle(current), series.evaluate(current), Stationary::Saddle));
    let best = cands.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let tol = TIE_TOL * best.abs().max(1.0);
    let (t, v, _) = cands
        .into_iter()
        .filter(|c| c.1 <= best + tol)
        .min_by(|a, b| {
            circular_distance(a.0, current)
                .total_cmp(&circular_distance(b.0, current))
                .then(a.0.total_cmp(&b.0))
        })
        .expect("at least one candidate");
    (t, v)
}

/// Global minimum with ties resolved towards `theta = 0`.
pub fn global_min_1d(series: &FourierSeries1D) -> (f64, f64) {
    global_min_1d_near(series, 0.0)
}

/// Value and gradient of an ND series in one pass over the coefficient tensor.
fn value_and_gradient(series: &FourierSeriesND, point: &[f64]) -> (f64, Vec<f64>) {
    let d = series.dims();
    let shape = series.shape();
    let rows: Vec<Vec<f64>> = series
        .orders
        .iter()
        .zip(point)
        .map(|(&k, &t)| {
            let mut r: Vec<f64> = (1..=k).map(|j| (j as f64 * t).cos()).collect();
            r.extend((1..=k).map(|j| (j as f64 * t).sin()));
            r.push(1.0);
            r
        })
        .collect();
    let drows: Vec<Vec<f64>> = series
        .orders
        .iter()
        .zip(point)
        .map(|(&k, &t)| {
            let mut r: Vec<f64> = (1..=k).map(|j| -(j as f64) * (j as f64 * t).sin()).collect();
            r.extend((1..=k).map(|j| j as f64 * (j as f64 * t).cos()));
            r.push(0.0);
            r
        })
        .collect();
    let mut idx = vec![0usize; d];
    let mut value = 0.0;
    let mut grad = vec![0.0; d];
    for &c in &series.coeffs {
        if c != 0.0 {
            let mut prod = c;
            for a in 0..d {
                prod *= rows[a][idx[a]];
            }
            value += prod;
            for (g, gd) in grad.iter_mut().enumerate() {
                let mut p = c;
                for a in 0..d {
                    p *= if a == g { drows[a][idx[a]] } else { rows[a][idx[a]] };
                }
                *gd += p;
            }
        }
        for a in (0..d).rev() {
            idx[a] += 1;
            if idx[a] < shape[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    (value, grad)
}

/// Seeds of the Nyquist lattice: `2 K_i + 1` equidistant points per axis.
pub fn nyquist_seeds(orders: &[usize]) -> Vec<Vec<f64>> {
    let mut seeds = vec![Vec::new()];
    for &k in orders {
        let axis = equidistant_grid(-PI, 2 * k + 1);
        seeds = seeds
            .into_iter()
            .flat_map(|s| {
                axis.iter().map(move |&t| {
                    let mut q = s.clone();
                    q.push(t);
                    q
                })
            })
            .collect();
    }
    seeds
}

/// Outcome of one descent run.
#[derive(Debug, Clone)]
pub struct DescentRun {
    pub point: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn descend(series: &FourierSeriesND, seed: &[f64], step: f64) -> DescentRun {
    let mut x = seed.to_vec();
    let mut it = 0;
    loop {
        let (v, g) = value_and_gradient(series, &x);
        let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gn < GRAD_TOL || it >= MAX_DESCENT_ITERS {
            return DescentRun { point: x, value: v, grad_norm: gn, iterations: it, converged: gn < GRAD_TOL };
        }
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= step * gi;
        }
        it += 1;
    }
}

/// Best converged point over all lattice seeds.
pub fn global_min_nd(series: &FourierSeriesND) -> Result<(Vec<f64>, f64)> {
    let d = series.dims();
    if d == 0 {
        return Err(Error::InvalidSamples("zero-dimensional series".into()));
    }
    if d > MAX_DIMS {
        return Err(Error::TooManyDimensions(d, MAX_DIMS));
    }
    let l = series.lipschitz_bound();
    if l == 0.0 {
        return Ok((vec![0.0; d], series.evaluate(&vec![0.0; d])));
    }
    let step = 1.0 / l;
    let mut best: Option<DescentRun> = None;
    let mut best_residual = f64::INFINITY;
    for seed in nyquist_seeds(&series.orders) {
        let run = descend(series, &seed, step);
        best_residual = best_residual.min(run.grad_norm);
        if !run.converged {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => run.value < b.value - TIE_TOL * b.value.abs().max(1.0),
        };
        if better {
            best = Some(run);
        }
    }
    let run = best.ok_or(Error::NoConvergence(best_residual))?;
    Ok((run.point.iter().map(|&t| wrap_angle(t)).collect(), run.value))
}
