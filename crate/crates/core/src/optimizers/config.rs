//! Stopping rules and sweep ordering shared by the fixed-ansatz optimisers.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOrder {
    Fixed,
    /// A fresh permutation every sweep, drawn from one stream seeded here.
    Shuffled(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceMode {
    Absolute,
    Relative,
    /// Largest partial derivative magnitude; gradient descent only.
    Gradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceConfig {
    /// Energy threshold per full sweep (Hartree, or a fraction in relative mode).
    pub eps: f64,
    pub max_sweeps: usize,
    pub order: SweepOrder,
    pub mode: ConvergenceMode,
    /// Use the energy left by the previous step as the unshifted sample instead of re-measuring it.
    pub reuse_energy: bool,
    /// Stop once a sweep ends above both of the two preceding sweeps (for noisy runs).
    pub noisy_stop: bool,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            eps: 1e-6,
            max_sweeps: 100,
            order: SweepOrder::Fixed,
            mode: ConvergenceMode::Absolute,
            reuse_energy: true,
            noisy_stop: false,
        }
    }
}

impl ConvergenceConfig {
    pub fn with_eps(eps: f64) -> Self {
        Self { eps, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(Error::Config(format!("eps must be positive, got {}", self.eps)));
        }
        if self.max_sweeps == 0 {
            return Err(Error::Config("max_sweeps must be at least 1".into()));
        }
        Ok(())
    }

    /// Whether the change from `previous` to `current` is within the threshold.
    pub fn converged(&self, previous: f64, current: f64) -> bool {
        let delta = (previous - current).abs();
        match self.mode {
            ConvergenceMode::Absolute => delta <= self.eps,
            ConvergenceMode::Relative => delta <= self.eps * previous.abs(),
            ConvergenceMode::Gradient => false,
        }
    }

    /// Gradient-mode test on the partial derivatives at the current point.
    pub fn gradient_converged(&self, gradient: &[f64]) -> bool {
        self.mode == ConvergenceMode::Gradient && gradient.iter().all(|g| g.abs() <= self.eps)
    }

    pub(crate) fn require_energy_mode(&self) -> Result<()> {
        if self.mode == ConvergenceMode::Gradient {
            return Err(Error::Config("gradient-based stopping is only available for gradient descent".into()));
        }
        Ok(())
    }

    /// The noisy stopping rule over the per-sweep energy history (initial energy first).
    pub fn noisy_halt(&self, history: &[f64]) -> bool {
        match history {
            [.., a, b, c] if self.noisy_stop => c > a && c > b,
            _ => false,
        }
    }

    pub(crate) fn orderer(&self) -> Orderer {
        match self.order {
            SweepOrder::Fixed => Orderer(None),
            SweepOrder::Shuffled(seed) => Orderer(Some(ChaCha8Rng::seed_from_u64(seed))),
        }
    }
}

pub(crate) struct Orderer(Option<ChaCha8Rng>);

impl Orderer {
    pub(crate) fn next(&mut self, n: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        if let Some(rng) = &mut self.0 {
            idx.shuffle(rng);
        }
        idx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_and_modes() {
        assert!(ConvergenceConfig::with_eps(0.0).validate().is_err());
        assert!(ConvergenceConfig::with_eps(-1.0).validate().is_err());
        assert!(ConvergenceConfig::default().validate().is_ok());
        let c = ConvergenceConfig::with_eps(1e-3);
        assert!(c.converged(-1.0, -1.0005));
        assert!(!c.converged(-1.0, -1.002));
        let r = ConvergenceConfig { mode: ConvergenceMode::Relative, ..ConvergenceConfig::with_eps(1e-3) };
        assert!(r.converged(-10.0, -10.005));
        assert!(!r.converged(-1.0, -1.005));
    }

    #[test]
    fn shuffled_orders_are_permutations_and_reproducible() {
        let c = ConvergenceConfig { order: SweepOrder::Shuffled(3), ..Default::default() };
        let (mut a, mut b) = (c.orderer(), c.orderer());
        for _ in 0..5 {
            let p = a.next(7);
            assert_eq!(p, b.next(7));
            let mut s = p.clone();
            s.sort();
            assert_eq!(s, (0..7).collect::<Vec<_>>());
        }
        assert_eq!(ConvergenceConfig::default().orderer().next(4), vec![0, 1, 2, 3]);
    }

    #[test]
    fn noisy_rule() {
        let c = ConvergenceConfig { noisy_stop: true, ..Default::default() };
        assert!(!c.noisy_halt(&[-1.0, -1.1, -1.05]));
        assert!(c.noisy_halt(&[-1.2, -1.1, -1.0]));
        assert!(!ConvergenceConfig::default().noisy_halt(&[-1.2, -1.1, -1.0]));
    }
}
