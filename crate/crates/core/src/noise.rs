//! Gaussian surrogate for finite-shot energy estimates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::state::{observable_variance, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum NoiseModel {
    Off,
    GaussianShots { shots: f64, seed: u64 },
}

impl NoiseModel {
    pub fn is_off(&self) -> bool {
        matches!(self, NoiseModel::Off)
    }

    /// Parses `off` or `shots=T[,seed=S]`.
    pub fn parse(text: &str, default_seed: u64) -> Result<Self> {
        let text = text.trim();
        if text == "off" {
            return Ok(NoiseModel::Off);
        }
        let mut shots = None;
        let mut seed = default_seed;
        for part in text.split(',') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("bad noise spec '{text}'")))?;
            match k.trim() {
                "shots" => {
                    shots = Some(v.trim().parse::<f64>().map_err(|e| Error::Config(format!("shots: {e}")))?)
                }
                "seed" => seed = v.trim().parse().map_err(|e| Error::Config(format!("seed: {e}")))?,
                other => return Err(Error::Config(format!("unknown noise key '{other}'"))),
            }
        }
        let shots = shots.ok_or_else(|| Error::Config("noise spec needs shots=T".into()))?;
        check_shots(shots)?;
        Ok(NoiseModel::GaussianShots { shots, seed })
    }
}

fn check_shots(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Config(format!("shot count must be positive, got {t}")));
    }
    Ok(())
}

/// Stateful sampler: successive draws continue one seeded stream.
#[derive(Debug, Clone)]
pub struct NoiseSource {
    model: NoiseModel,
    rng: ChaCha8Rng,
}

impl NoiseSource {
    pub fn new(model: NoiseModel) -> Result<Self> {
        let seed = match model {
            NoiseModel::Off => 0,
            NoiseModel::GaussianShots { shots, seed } => {
                check_shots(shots)?;
                seed
            }
        };
        Ok(Self { model, rng: ChaCha8Rng::seed_from_u64(seed) })
    }

    pub fn model(&self) -> NoiseModel {
        self.model
    }

    /// `exact + g * dH / sqrt(t)` with `g ~ N(0, 1)`; the identity when noise is off.
    pub fn noisy_energy(&mut self, exact: f64, h: &Hamiltonian, state: &StateVector) -> Result<f64> {
        match self.model {
            NoiseModel::Off => Ok(exact),
            NoiseModel::GaussianShots { shots, .. } => {
                let var = observable_variance(h, state)?;
                Ok(self.perturb(exact, var, shots))
            }
        }
    }

    /// Same draw as [`noisy_energy`](Self::noisy_energy) with the variance supplied.
    pub fn perturb(&mut self, exact: f64, variance: f64, shots: f64) -> f64 {
        let g: f64 = StandardNormal.sample(&mut self.rng);
        exact + g * (variance / shots).sqrt()
    }
}

/// One-shot form of [`NoiseSource::noisy_energy`].
pub fn noisy_energy(exact: f64, h: &Hamiltonian, state: &StateVector, model: NoiseModel) -> Result<f64> {
    if model.is_off() {
        return Err(Error::Config("noisy_energy needs a gaussian_shots model".into()));
    }
    NoiseSource::new(model)?.noisy_energy(exact, h, state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::parse_word;
    use crate::state::expectation;

    fn x0() -> Hamiltonian {
        Hamiltonian::new(1, vec![(1.0, parse_word("X0", 1).unwrap())]).unwrap()
    }

    #[test]
    fn vanishing_noise_limit() {
        let h = x0();
        let psi = StateVector::zero_state(1);
        let e = expectation(&h, &psi).unwrap();
        let m = NoiseModel::GaussianShots { shots: 1e12, seed: 3 };
        let mut src = NoiseSource::new(m).unwrap();
        for _ in 0..100 {
            assert!((src.noisy_energy(e, &h, &psi).unwrap() - e).abs() < 1e-4);
        }
    }

    #[test]
    fn eigenstate_is_exact() {
        let h = Hamiltonian::new(1, vec![(0.7, parse_word("Z0", 1).unwrap())]).unwrap();
        let psi = StateVector::zero_state(1);
        let m = NoiseModel::GaussianShots { shots: 1.0, seed: 9 };
        assert_eq!(noisy_energy(0.7, &h, &psi, m).unwrap(), 0.7);
    }

    #[test]
    fn sample_variance_matches_model() {
        let h = x0();
        let psi = StateVector::zero_state(1);
        let t = 1e3;
        let mut src = NoiseSource::new(NoiseModel::GaussianShots { shots: t, seed: 17 }).unwrap();
        let draws: Vec<f64> = (0..10_000).map(|_| src.noisy_energy(0.0, &h, &psi).unwrap()).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (draws.len() - 1) as f64;
        let want = 1.0 / t;
        assert!((var - want).abs() < 0.05 * want, "{var} vs {want}");
        assert!(mean.abs() < 4.0 * (want / draws.len() as f64).sqrt());
    }

    #[test]
    fn determinism_and_errors() {
        let h = x0();
        let psi = StateVector::zero_state(1);
        let m = NoiseModel::GaussianShots { shots: 10.0, seed: 5 };
        let a = noisy_energy(0.0, &h, &psi, m).unwrap();
        let b = noisy_energy(0.0, &h, &psi, m).unwrap();
        assert_eq!(a, b);
        assert!(NoiseSource::new(NoiseModel::GaussianShots { shots: 0.0, seed: 1 }).is_err());
        assert!(NoiseSource::new(NoiseModel::GaussianShots { shots: -3.0, seed: 1 }).is_err());
        assert!(noisy_energy(0.0, &h, &psi, NoiseModel::Off).is_err());
        assert_eq!(NoiseModel::parse("shots=1e7", 4).unwrap(), NoiseModel::GaussianShots { shots: 1e7, seed: 4 });
        assert_eq!(
            NoiseModel::parse("shots=100,seed=2", 4).unwrap(),
            NoiseModel::GaussianShots { shots: 100.0, seed: 2 }
        );
        assert!(NoiseModel::parse("shots=0", 4).is_err());
        assert!(NoiseModel::parse("bogus", 4).is_err());
    }
}
