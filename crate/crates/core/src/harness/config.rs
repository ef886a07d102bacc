use std::path::{Path, PathBuf};

use crate::counts::NoiseModel;
use crate::error::{Error, Result};
use crate::linalg::c;
use crate::optics::{Convention, DEFAULT_SCAN_POINTS};
use crate::qstate::{density_from_pure, DensityMatrix, PureState, StateRecord};

use super::reference::reference;

pub const PRESET_NAMES: [&str; 4] = ["phi1", "phi2", "phi3", "phi4"];
/// Name of the maximally mixed preset.
pub const MIXED: &str = "mixed";
pub const DEFAULT_BOOTSTRAP: usize = 200;

/// One of the four prepared states, with the amplitudes exactly as printed.
pub fn preset(name: &str) -> Option<PureState> {
    let a = reference().state(name)?.amplitudes;
    Some(PureState::new(c(a[0][0], a[0][1]), c(a[1][0], a[1][1])).expect("presets are normalised"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedState {
    pub name: String,
    pub rho: DensityMatrix,
}

impl NamedState {
    pub fn new(name: impl Into<String>, rho: DensityMatrix) -> Self {
        NamedState { name: name.into(), rho }
    }

    pub fn preset(name: &str) -> Result<Self> {
        if name == MIXED {
            return Ok(Self::new(MIXED, DensityMatrix::maximally_mixed()));
        }
        preset(name)
            .map(|p| Self::new(name, density_from_pure(&p)))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown preset {name}")))
    }

    /// A preset name or the path of a state file.
    pub fn resolve(arg: &str) -> Result<Self> {
        if arg == MIXED || PRESET_NAMES.contains(&arg) {
            return Self::preset(arg);
        }
        let path = Path::new(arg);
        let rho = StateRecord::load(path)?.to_density()?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| arg.to_string());
        Ok(Self::new(name, rho))
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub states: Vec<NamedState>,
    pub convention: Convention,
    pub noise: NoiseModel,
    pub analytic_only: bool,
    pub output_dir: Option<PathBuf>,
    pub e_joules: f64,
    pub scan_points: usize,
    pub bootstrap: usize,
}

impl ExperimentConfig {
    /// The four presets at the experiment's count statistics.
    pub fn presets(seed: u64) -> Self {
        ExperimentConfig {
            states: PRESET_NAMES
                .iter()
                .map(|n| NamedState::preset(n).expect("bundled preset"))
                .collect(),
            convention: Convention::Appendix,
            noise: NoiseModel::experimental_scale(seed),
            analytic_only: false,
            output_dir: None,
            e_joules: reference().e_joules.value,
            scan_points: DEFAULT_SCAN_POINTS,
            bootstrap: DEFAULT_BOOTSTRAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.states.is_empty() {
            return Err(Error::InvalidArgument("at least one state is required".into()));
        }
        if !(self.e_joules.is_finite() && self.e_joules > 0.0) {
            return Err(Error::InvalidArgument(format!("E = {} J must be positive", self.e_joules)));
        }
        if !self.analytic_only {
            self.noise.validate()?;
        }
        if let Some(dir) = &self.output_dir {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            let probe = dir.join(".write-probe");
            std::fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
            let _ = std::fs::remove_file(&probe);
        }
        Ok(())
    }

    /// Noise model of the `index`-th state; every state gets its own seed.
    pub fn noise_for(&self, index: usize) -> NoiseModel {
        NoiseModel {
            seed: self.noise.seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15),
            ..self.noise
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::to_stokes;
    use approx::assert_abs_diff_eq;

    #[test]
    fn presets_resolve() {
        let s = to_stokes(&NamedState::resolve("phi1").unwrap().rho);
        assert_abs_diff_eq!(s.s3, 0.46994, epsilon = 1e-4);
        let m = NamedState::resolve("mixed").unwrap();
        assert_eq!(m.rho, DensityMatrix::maximally_mixed());
        assert!(NamedState::resolve("phi9").is_err());
    }

    #[test]
    fn state_file_resolves() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tilted.json");
        std::fs::write(&path, r#"{"stokes": [0.0, 0.0, 0.5]}"#).unwrap();
        let st = NamedState::resolve(path.to_str().unwrap()).unwrap();
        assert_eq!(st.name, "tilted");
        assert_abs_diff_eq!(to_stokes(&st.rho).s3, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig::presets(1);
        assert!(cfg.validate().is_ok());
        cfg.states.clear();
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::presets(1);
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, b"x").unwrap();
        cfg.output_dir = Some(blocker.join("sub"));
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn per_state_seeds_differ() {
        let cfg = ExperimentConfig::presets(7);
        assert_ne!(cfg.noise_for(0).seed, cfg.noise_for(1).seed);
        assert_eq!(cfg.noise_for(2), cfg.noise_for(2));
    }
}
