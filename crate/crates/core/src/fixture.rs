//! Molecular Hamiltonian fixtures shipped as `<name>.ham` plus `<name>.json`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;

/// Metadata stored next to each Hamiltonian file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureMeta {
    pub name: String,
    pub n_qubits: usize,
    pub n_electrons: usize,
    pub hf_energy: f64,
    pub fci_energy: Option<f64>,
    pub sector: usize,
    pub geometry: String,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub path: PathBuf,
    pub n_qubits: usize,
    pub n_electrons: usize,
    pub hf_energy: f64,
    pub fci_energy: Option<f64>,
    pub sector: usize,
    pub geometry: String,
    pub hamiltonian: Hamiltonian,
}

/// `fixtures/` at the workspace root.
pub fn default_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

impl Fixture {
    pub fn load(name: &str) -> Result<Self> {
        Self::load_from(&default_dir(), name)
    }

    pub fn load_from(dir: &Path, name: &str) -> Result<Self> {
        let ham_path = dir.join(format!("{name}.ham"));
        let meta_path = dir.join(format!("{name}.json"));
        if !ham_path.is_file() || !meta_path.is_file() {
            return Err(Error::UnknownFixture(name.to_string()));
        }
        let meta: FixtureMeta = serde_json::from_str(&std::fs::read_to_string(&meta_path)?)?;
        let (hamiltonian, header) = Hamiltonian::from_file(&ham_path)?;
        if header.n_qubits != meta.n_qubits || header.n_electrons != meta.n_electrons {
            return Err(Error::Config(format!(
                "fixture `{name}`: header ({}, {}) disagrees with metadata ({}, {})",
                header.n_qubits, header.n_electrons, meta.n_qubits, meta.n_electrons
            )));
        }
        Ok(Self {
            name: meta.name,
            path: ham_path,
            n_qubits: meta.n_qubits,
            n_electrons: meta.n_electrons,
            hf_energy: meta.hf_energy,
            fci_energy: meta.fci_energy,
            sector: meta.sector,
            geometry: meta.geometry,
            hamiltonian,
        })
    }

    pub fn fci(&self) -> Result<f64> {
        self.fci_energy.ok_or_else(|| Error::MissingReference(self.name.clone()))
    }

    /// Fixture names in `dir`, sorted.
    pub fn list(dir: &Path) -> Result<Vec<String>> {
        let mut names: Vec<String> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let p = e.path();
                (p.extension()? == "ham").then(|| p.file_stem()?.to_str().map(String::from))?
            })
            .filter(|n| dir.join(format!("{n}.json")).is_file())
            .collect();
        names.sort();
        Ok(names)
    }

    /// Fixtures of the dissociation set for `molecule`, i.e. `<molecule>_d<r>`, ordered by name.
    pub fn geometry_set(dir: &Path, molecule: &str) -> Result<Vec<String>> {
        let prefix = format!("{molecule}_d");
        Ok(Self::list(dir)?.into_iter().filter(|n| n.starts_with(&prefix)).collect())
    }
}
