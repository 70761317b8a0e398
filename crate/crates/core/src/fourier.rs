//! Finite Fourier series and their reconstruction from sampled energies.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;
const CONDITION_LIMIT: f64 = 1e10;
/// Points closer than this (circularly) are treated as coincident.
const COINCIDENCE: f64 = 1e-12;
/// Largest dimension accepted by the tensor-product fit.
pub const MAX_DIMS: usize = 4;

/// `c + sum_k a_k cos(k theta) + b_k sin(k theta)`, `k = 1..=order`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSeries1D {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: f64,
}

impl FourierSeries1D {
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: f64) -> Self {
        assert_eq!(a.len(), b.len(), "cosine and sine coefficient counts differ");
        Self { a, b, c }
    }

    pub fn zero(order: usize) -> Self {
        Self::new(vec![0.0; order], vec![0.0; order], 0.0)
    }

    pub fn order(&self) -> usize {
        self.a.len()
    }

    /// Coefficients as `(a_1..a_K, b_1..b_K, c)`.
    pub fn to_vector(&self) -> Vec<f64> {
        self.a.iter().chain(&self.b).copied().chain([self.c]).collect()
    }

    pub fn from_vector(order: usize, v: &[f64]) -> Self {
        assert_eq!(v.len(), 2 * order + 1);
        Self::new(v[..order].to_vec(), v[order..2 * order].to_vec(), v[2 * order])
    }

    pub fn evaluate(&self, theta: f64) -> f64 {
        let mut acc = self.c;
        for k in 0..self.order() {
            let (s, c) = ((k + 1) as f64 * theta).sin_cos();
            acc += self.a[k] * c + self.b[k] * s;
        }
        acc
    }

    pub fn derivative(&self) -> FourierSeries1D {
        let k = |i: usize| (i + 1) as f64;
        FourierSeries1D::new(
            self.b.iter().enumerate().map(|(i, b)| k(i) * b).collect(),
            self.a.iter().enumerate().map(|(i, a)| -k(i) * a).collect(),
            0.0,
        )
    }

    /// `f(theta - s)`.
    pub fn shifted(&self, s: f64) -> FourierSeries1D {
        let mut out = self.clone();
        for k in 0..self.order() {
            let (sn, cs) = ((k + 1) as f64 * s).sin_cos();
            // a cos(k(t-s)) + b sin(k(t-s)) in the cos/sin basis of t
            out.a[k] = self.a[k] * cs - self.b[k] * sn;
            out.b[k] = self.a[k] * sn + self.b[k] * cs;
        }
        out
    }

    /// Largest coefficient magnitude, excluding the constant.
    pub fn amplitude(&self) -> f64 {
        self.a.iter().chain(&self.b).fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Energies sampled at parameter points, plus how the points were laid out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub points: Vec<Vec<f64>>,
    pub energies: Vec<f64>,
    pub equidistant: bool,
    pub origin: Vec<f64>,
}

impl SampleSet {
    pub fn new(points: Vec<Vec<f64>>, energies: Vec<f64>) -> Result<Self> {
        if points.len() != energies.len() {
            return Err(Error::InvalidSamples(format!(
                "{} points but {} energies",
                points.len(),
                energies.len()
            )));
        }
        let dim = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidSamples("points of differing dimension".into()));
        }
        Ok(Self { origin: vec![0.0; dim], points, energies, equidistant: false })
    }

    pub fn one_d(thetas: &[f64], energies: &[f64]) -> Result<Self> {
        Self::new(thetas.iter().map(|&t| vec![t]).collect(), energies.to_vec())
    }

    /// Samples at `origin + 2 pi l / n`, `l = 0..n`, with `f` supplying the energies.
    pub fn equidistant_1d(origin: f64, n: usize, mut f: impl FnMut(f64) -> f64) -> Self {
        let thetas = equidistant_grid(origin, n);
        let energies = thetas.iter().map(|&t| f(t)).collect();
        Self { points: thetas.into_iter().map(|t| vec![t]).collect(), energies, equidistant: true, origin: vec![origin] }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.origin.len()
    }

    fn thetas_1d(&self) -> Result<Vec<f64>> {
        if self.dims() != 1 {
            return Err(Error::InvalidSamples(format!("expected 1-D points, got {}-D", self.dims())));
        }
        Ok(self.points.iter().map(|p| p[0]).collect())
    }
}

/// `origin + 2 pi l / n` for `l = 0..n`.
pub fn equidistant_grid(origin: f64, n: usize) -> Vec<f64> {
    (0..n).map(|l| origin + TWO_PI * l as f64 / n as f64).collect()
}

/// Distance between two angles on the circle, in `[0, pi]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TWO_PI);
    d.min(TWO_PI - d)
}

fn basis_row(order: usize, theta: f64) -> Vec<f64> {
    let mut row = Vec::with_capacity(2 * order + 1);
    row.extend((1..=order).map(|k| (k as f64 * theta).cos()));
    row.extend((1..=order).map(|k| (k as f64 * theta).sin()));
    row.push(1.0);
    row
}

fn design_matrix(order: usize, thetas: &[f64]) -> DMatrix<f64> {
    let cols = 2 * order + 1;
    let mut m = DMatrix::zeros(thetas.len(), cols);
    for (i, &t) in thetas.iter().enumerate() {
        for (j, v) in basis_row(order, t).into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    m
}

fn check_distinct(thetas: &[f64]) -> Result<()> {
    for i in 0..thetas.len() {
        for j in i + 1..thetas.len() {
            if circular_distance(thetas[i], thetas[j]) < COINCIDENCE {
                return Err(Error::CoincidentSamples(i, j));
            }
        }
    }
    Ok(())
}

fn condition(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    let min = sv.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Square interpolation system, solved by LU with partial pivoting.
fn solve_square(m: DMatrix<f64>, rhs: &[f64]) -> Result<Vec<f64>> {
    let cond = condition(&m);
    if !(cond <= CONDITION_LIMIT) {
        return Err(Error::SingularSystem(cond));
    }
    let x = m
        .lu()
        .solve(&DVector::from_column_slice(rhs))
        .ok_or(Error::SingularSystem(f64::INFINITY))?;
    Ok(x.iter().copied().collect())
}

/// Interpolating series of the given order through exactly `2 order + 1` samples.
pub fn fit_1d_interpolate(samples: &SampleSet, order: usize) -> Result<FourierSeries1D> {
    let thetas = samples.thetas_1d()?;
    if thetas.len() != 2 * order + 1 {
        return Err(Error::InvalidSamples(format!(
            "an order-{order} interpolation needs {} samples, got {}",
            2 * order + 1,
            thetas.len()
        )));
    }
    check_distinct(&thetas)?;
    let x = solve_square(design_matrix(order, &thetas), &samples.energies)?;
    Ok(FourierSeries1D::from_vector(order, &x))
}

/// Second-order series through five samples.
pub fn fit_1d_exact(samples: &SampleSet) -> Result<FourierSeries1D> {
    fit_1d_interpolate(samples, 2)
}

/// Least-squares series of the given order from `N >= 2 order + 1` samples.
pub fn fit_1d_lstsq(samples: &SampleSet, order: usize) -> Result<FourierSeries1D> {
    let thetas = samples.thetas_1d()?;
    let cols = 2 * order + 1;
    if thetas.len() < cols {
        return Err(Error::InvalidSamples(format!(
            "an order-{order} fit needs at least {cols} samples, got {}",
            thetas.len()
        )));
    }
    check_distinct(&thetas)?;
    let m = design_matrix(order, &thetas);
    let cond = condition(&m);
    if !(cond <= CONDITION_LIMIT) {
        return Err(Error::SingularSystem(cond));
    }
    let x = m
        .svd(true, true)
        .solve(&DVector::from_column_slice(&samples.energies), 1e-14)
        .map_err(|e| Error::InvalidSamples(e.to_string()))?;
    Ok(FourierSeries1D::from_vector(order, x.as_slice()))
}

/// Tensor-product series; each axis uses the basis `(cos k t, .., sin k t, .., 1)`.
/// Coefficients are stored row-major with axis 0 slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSeriesND {
    pub orders: Vec<usize>,
    pub coeffs: Vec<f64>,
}

fn basis_derivative_row(order: usize, theta: f64) -> Vec<f64> {
    let mut row = Vec::with_capacity(2 * order + 1);
    row.extend((1..=order).map(|k| -(k as f64) * (k as f64 * theta).sin()));
    row.extend((1..=order).map(|k| k as f64 * (k as f64 * theta).cos()));
    row.push(0.0);
    row
}

/// Frequency of basis function `j` on an axis of the given order.
fn frequency(order: usize, j: usize) -> usize {
    if j < order {
        j + 1
    } else if j < 2 * order {
        j - order + 1
    } else {
        0
    }
}

impl FourierSeriesND {
    pub fn new(orders: Vec<usize>, coeffs: Vec<f64>) -> Result<Self> {
        let size: usize = orders.iter().map(|k| 2 * k + 1).product();
        if coeffs.len() != size {
            return Err(Error::InvalidSamples(format!("coefficient tensor has {} entries, expected {size}", coeffs.len())));
        }
        Ok(Self { orders, coeffs })
    }

    pub fn dims(&self) -> usize {
        self.orders.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.orders.iter().map(|k| 2 * k + 1).collect()
    }

    /// Outer product of one-dimensional series.
    pub fn outer(series: &[FourierSeries1D]) -> Self {
        let mut coeffs = vec![1.0];
        for s in series {
            let v = s.to_vector();
            coeffs = coeffs.iter().flat_map(|&c| v.iter().map(move |&x| c * x)).collect();
        }
        Self { orders: series.iter().map(FourierSeries1D::order).collect(), coeffs }
    }

    fn contract(&self, rows: &[Vec<f64>]) -> f64 {
        // successive contraction from the last axis
        let mut data = self.coeffs.clone();
        for row in rows.iter().rev() {
            let n = row.len();
            data = data.chunks(n).map(|chunk| chunk.iter().zip(row).map(|(c, r)| c * r).sum()).collect();
        }
        data[0]
    }

    pub fn evaluate(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.dims(), "point dimension mismatch");
        let rows: Vec<Vec<f64>> = self.orders.iter().zip(point).map(|(&k, &t)| basis_row(k, t)).collect();
        self.contract(&rows)
    }

    pub fn gradient(&self, point: &[f64]) -> Vec<f64> {
        assert_eq!(point.len(), self.dims(), "point dimension mismatch");
        let rows: Vec<Vec<f64>> = self.orders.iter().zip(point).map(|(&k, &t)| basis_row(k, t)).collect();
        (0..self.dims())
            .map(|d| {
                let mut r = rows.clone();
                r[d] = basis_derivative_row(self.orders[d], point[d]);
                self.contract(&r)
            })
            .collect()
    }

    /// Partial derivative along `axis`, as a series of the same orders.
    pub fn derivative(&self, axis: usize) -> FourierSeriesND {
        let shape = self.shape();
        let k = self.orders[axis];
        let inner: usize = shape[axis + 1..].iter().product();
        let n = shape[axis];
        let mut out = vec![0.0; self.coeffs.len()];
        for (idx, &c) in self.coeffs.iter().enumerate() {
            let j = idx / inner % n;
            let base = idx - j * inner;
            if j < k {
                // cos -> -k sin
                out[base + (j + k) * inner] -= (j + 1) as f64 * c;
            } else if j < 2 * k {
                // sin -> k cos
                out[base + (j - k) * inner] += (j - k + 1) as f64 * c;
            }
        }
        FourierSeriesND { orders: self.orders.clone(), coeffs: out }
    }

    /// Upper bound on the spectral norm of the Hessian anywhere.
    pub fn lipschitz_bound(&self) -> f64 {
        let shape = self.shape();
        let mut total = 0.0;
        for (idx, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let mut rem = idx;
            let mut k2 = 0.0;
            for d in (0..self.dims()).rev() {
                let j = rem % shape[d];
                rem /= shape[d];
                k2 += (frequency(self.orders[d], j) as f64).powi(2);
            }
            total += c.abs() * k2;
        }
        total
    }

    /// Reduces a one-dimensional series to [`FourierSeries1D`].
    pub fn to_1d(&self) -> Option<FourierSeries1D> {
        (self.dims() == 1).then(|| FourierSeries1D::from_vector(self.orders[0], &self.coeffs))
    }
}

/// Full tensor grid of `2 K_i + 1` equidistant points per axis, row-major values.
pub fn tensor_grid(origins: &[f64], orders: &[usize]) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = origins
        .iter()
        .zip(orders)
        .map(|(&o, &k)| equidistant_grid(o, 2 * k + 1))
        .collect();
    let mut points = vec![Vec::new()];
    for axis in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&t| {
                    let mut q = p.clone();
                    q.push(t);
                    q
                })
            })
            .collect();
    }
    points
}

/// Tensor-product interpolation on a full grid with `2 K_i + 1` distinct values per axis.
pub fn fit_nd(samples: &SampleSet, orders: &[usize]) -> Result<FourierSeriesND> {
    let d = orders.len();
    if d == 0 {
        return Err(Error::InvalidSamples("no dimensions".into()));
    }
    if d > MAX_DIMS {
        return Err(Error::TooManyDimensions(d, MAX_DIMS));
    }
    if samples.dims() != d {
        return Err(Error::InvalidSamples(format!("samples are {}-D, orders given for {d}", samples.dims())));
    }
    let shape: Vec<usize> = orders.iter().map(|k| 2 * k + 1).collect();
    let total: usize = shape.iter().product();
    if samples.len() != total {
        return Err(Error::InvalidSamples(format!("incomplete grid: {} of {total} points", samples.len())));
    }
    // distinct coordinates per axis, in order of first appearance
    let mut axes: Vec<Vec<f64>> = vec![Vec::new(); d];
    for p in &samples.points {
        for (axis, &t) in axes.iter_mut().zip(p) {
            if !axis.iter().any(|&u| circular_distance(u, t) < COINCIDENCE) {
                axis.push(t);
            }
        }
    }
    for (i, axis) in axes.iter().enumerate() {
        if axis.len() != shape[i] {
            return Err(Error::InvalidSamples(format!(
                "axis {i} has {} distinct values, expected {}",
                axis.len(),
                shape[i]
            )));
        }
    }
    let mut values = vec![f64::NAN; total];
    for (p, &e) in samples.points.iter().zip(&samples.energies) {
        let mut idx = 0;
        for (i, (axis, &t)) in axes.iter().zip(p).enumerate() {
            let j = axis.iter().position(|&u| circular_distance(u, t) < COINCIDENCE).expect("axis value recorded");
            idx = idx * shape[i] + j;
        }
        if !values[idx].is_nan() {
            return Err(Error::InvalidSamples("grid point sampled twice".into()));
        }
        values[idx] = e;
    }
    // invert the per-axis design matrix along each axis in turn
    for (i, axis) in axes.iter().enumerate() {
        let m = design_matrix(orders[i], axis);
        let cond = condition(&m);
        if !(cond <= CONDITION_LIMIT) {
            return Err(Error::SingularSystem(cond));
        }
        let lu = m.lu();
        let n = shape[i];
        let inner: usize = shape[i + 1..].iter().product();
        let outer = total / (n * inner);
        for o in 0..outer {
            for r in 0..inner {
                let base = o * n * inner + r;
                let rhs = DVector::from_iterator(n, (0..n).map(|j| values[base + j * inner]));
                let x = lu.solve(&rhs).ok_or(Error::SingularSystem(f64::INFINITY))?;
                for j in 0..n {
                    values[base + j * inner] = x[j];
                }
            }
        }
    }
    FourierSeriesND::new(orders.to_vec(), values)
}
