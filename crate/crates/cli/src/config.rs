use std::path::Path;

use serde::{Deserialize, Serialize};

use fqc_core::measures::{ATOM_TOL, SUPPORT_TOL};
use fqc_core::{ConstructionConfig, StaircaseSequences, TestFunction};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SetsConfig {
    /// Set names: `lambda`, `q`, `s`, `z`, `z_N`, `x_N`.
    pub kinds: Vec<String>,
    pub window: f64,
    /// Window for `Q`, which is very dense under fast staircases.
    pub q_window: f64,
    /// Cap on `|p_2|` for `S`, whose strips are unbounded at a finite stage.
    pub transverse_cap: f64,
    pub plot_strips: usize,
}

impl Default for SetsConfig {
    fn default() -> Self {
        Self {
            kinds: ["lambda", "q", "s", "z"].map(String::from).to_vec(),
            window: 16.0,
            q_window: 3.0,
            transverse_cap: 50.0,
            plot_strips: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasuresConfig {
    pub mu_window: f64,
    pub mu_hat_window: f64,
    pub atom_tol: f64,
    pub support_tol: f64,
    pub psf_tol: f64,
    pub tests: Vec<TestFunction>,
}

impl Default for MeasuresConfig {
    fn default() -> Self {
        let tests = TestFunction::family(10);
        Self { mu_window: 64.0, mu_hat_window: 16.0, atom_tol: ATOM_TOL, support_tol: SUPPORT_TOL, psf_tol: 1e-3, tests }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub interval: [f64; 2],
    /// `mes(Ω)` as multiples of the density `|I| / |det Γ|`.
    pub ratios: Vec<f64>,
    pub windows: Vec<f64>,
    /// Above threshold: max/min condition over the windows stays below this.
    pub stable_factor: f64,
    /// Below threshold: each doubling multiplies the condition by at least this.
    pub growth_factor: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            interval: [-0.5, 0.5],
            ratios: vec![1.5, 0.5],
            windows: vec![3.0, 6.0, 12.0],
            stable_factor: 10.0,
            growth_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApConfig {
    pub samples: usize,
    /// Rational progressions use numerators and denominators up to this.
    pub rational_max: i64,
    /// Lattice-aligned progressions use coefficients up to this.
    pub lattice_max: i64,
    pub radii: Vec<f64>,
    pub triples_window: f64,
    pub cover_k: usize,
    pub cover_windows: Vec<f64>,
    pub tau: f64,
    /// Growth rule for the negative control.
    pub control: StaircaseSequences,
}

impl Default for ApConfig {
    fn default() -> Self {
        Self {
            samples: 100,
            rational_max: 12,
            lattice_max: 3,
            radii: vec![16.0, 64.0, 256.0],
            triples_window: 64.0,
            cover_k: 5,
            cover_windows: vec![16.0, 64.0, 256.0],
            tau: 1e-9,
            control: StaircaseSequences {
                a: fqc_core::regions::SequenceRule::Linear { slope: 1.0 },
                h: fqc_core::regions::SequenceRule::Linear { slope: 1.0 },
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecomposeConfig {
    /// `h_N` for `N = 1, 2, ...`; they split the atoms of `μ` by `|p_2(γ)|`.
    pub thresholds: Vec<f64>,
    pub window: f64,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        Self { thresholds: vec![0.3, 0.6, 0.9], window: 64.0 }
    }
}

/// The single JSON configuration document.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub construction: ConstructionConfig,
    pub sets: SetsConfig,
    pub measures: MeasuresConfig,
    pub probe: ProbeConfig,
    pub ap: ApConfig,
    pub decompose: DecomposeConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            field: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = Some(e.path().to_string()).filter(|p| p != ".");
            CliError::Config { field, message: e.inner().to_string() }
        })?;
        cfg.construction.validate().map_err(|e| CliError::Config { field: Some("construction".into()), message: e.to_string() })?;
        Ok(cfg)
    }

    /// Applies a `--tolerance KEY=VAL` override.
    pub fn set_tolerance(&mut self, kv: &str) -> Result<(), CliError> {
        let bad = |m: String| CliError::Config { field: Some("--tolerance".into()), message: m };
        let (k, v) = kv.split_once('=').ok_or_else(|| bad(format!("expected KEY=VAL, got {kv}")))?;
        let v: f64 = v.trim().parse().map_err(|_| bad(format!("not a number: {v}")))?;
        if !(v > 0.0) {
            return Err(bad(format!("{k} must be positive")));
        }
        let c = &mut self.construction;
        match k.trim() {
            "node_residual" => c.node_residual_tol = v,
            "vanish" => c.vanish_tol = v,
            "normalization" => c.normalization_tol = v,
            "truncation" => c.truncation_tau = v,
            "seminorm_step" => c.seminorm_step = v,
            "cond_cap" => c.cond_cap = v,
            "atom" => self.measures.atom_tol = v,
            "support" => self.measures.support_tol = v,
            "psf" => self.measures.psf_tol = v,
            "ap_tau" => self.ap.tau = v,
            other => return Err(bad(format!("unknown tolerance key {other}"))),
        }
        Ok(())
    }
}
