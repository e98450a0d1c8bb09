//! Inductive construction of `φ_n = φ_{n-1} - f_n`: at each stage `φ_n`
//! keeps `φ_n(0) = 1` and `spec(φ_n) ⊂ Ω_n ⊂ ℝ∖Q` while vanishing on the
//! stage set `Z_n`.

mod expr;
mod stage;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{Lattice2D, LatticeError};
use crate::measures::{build_mu, build_mu_hat, AtomicMeasure, Enumeration, MeasureError};
use crate::paley_wiener::{InterpolantData, PwError, SchwartzInterpolant, TimeFunction};
use crate::regions::{generate_set, GeneratedSet, IntervalUnion, RegionError, SequenceRule, SetKind, SetRequest, StaircaseSequences};

pub use expr::FunctionExpr;
pub use stage::{choose_hstar, choose_omega, hstar_schedule, model_nodes, truncation_radius, HstarChoice, OmegaChoice};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructionError {
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error(transparent)]
    Pw(#[from] PwError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("Q window reached {window} without room for Ω of measure {needed:.4}")]
    WindowExhausted { window: f64, needed: f64 },
    #[error("J has measure {measure:.4}, needs more than {needed:.4}")]
    SpectrumTooSmall { measure: f64, needed: f64 },
    #[error("no h* candidate passed; best max seminorm {best:.3e} against {bound:.3e}")]
    ScheduleExhausted { best: f64, bound: f64 },
    #[error("condition ({item}) violated, measured {value:.3e}")]
    ConditionViolated { item: char, value: f64 },
    #[error("stage {stage}: {source}")]
    AtStage { stage: usize, source: Box<ConstructionError> },
    #[error("malformed state: {0}")]
    MalformedState(String),
}

impl ConstructionError {
    /// The error with any stage wrapper removed.
    pub fn root(&self) -> &ConstructionError {
        match self {
            ConstructionError::AtStage { source, .. } => source.root(),
            e => e,
        }
    }
}

/// How the envelope width `ε_n` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum EpsPolicy {
    Fixed { eps: f64 },
    /// `ε_n = δ_n / 2` with `δ_n` the distance from `Ω_n` to `Q`.
    HalfMargin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstructionConfig {
    pub lattice: Lattice2D,
    pub primal: StaircaseSequences,
    pub dual_a: SequenceRule,
    pub eps: EpsPolicy,
    /// `mes(Ω_n) > slack · 2a*_n / det Γ*`.
    pub omega_slack: f64,
    /// Minimum distance from `Ω_n` to `Q`.
    pub q_margin: f64,
    pub q_window: f64,
    pub q_window_max: f64,
    pub normalization_tol: f64,
    pub node_residual_tol: f64,
    pub vanish_tol: f64,
    /// `R_n` is where `|φ_{n-1}(x)|(1+|x|)^n` drops below this for good.
    pub truncation_tau: f64,
    /// Explicit `R_n`, overriding `truncation_tau`.
    pub windows: Option<Vec<f64>>,
    pub seminorm_step: f64,
    /// Grid step for trial seminorms before the final check.
    pub trial_step: f64,
    pub cond_cap: f64,
    pub hstar_start: f64,
    pub hstar_ratio: f64,
}

impl Default for ConstructionConfig {
    fn default() -> Self {
        Self {
            lattice: Lattice2D::default_lattice(),
            primal: StaircaseSequences::default_primal(),
            dual_a: SequenceRule::Linear { slope: 0.08 },
            eps: EpsPolicy::Fixed { eps: 0.6 },
            omega_slack: 1.2,
            q_margin: 0.05,
            q_window: 3.0,
            q_window_max: 8.0,
            normalization_tol: 1e-8,
            node_residual_tol: 1e-8,
            vanish_tol: 1e-6,
            truncation_tau: 1e-12,
            windows: None,
            seminorm_step: 0.01,
            trial_step: 0.05,
            cond_cap: 1e10,
            hstar_start: 1.0,
            hstar_ratio: 2.0,
        }
    }
}

impl ConstructionConfig {
    pub fn validate(&self) -> Result<(), ConstructionError> {
        let bad = |s: &str| Err(ConstructionError::BadConfig(s.to_string()));
        let positive = [
            ("q_margin", self.q_margin),
            ("q_window", self.q_window),
            ("normalization_tol", self.normalization_tol),
            ("node_residual_tol", self.node_residual_tol),
            ("vanish_tol", self.vanish_tol),
            ("truncation_tau", self.truncation_tau),
            ("seminorm_step", self.seminorm_step),
            ("trial_step", self.trial_step),
            ("cond_cap", self.cond_cap),
            ("hstar_start", self.hstar_start),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return bad(&format!("{name} must be positive and finite"));
            }
        }
        if !(self.omega_slack > 1.0) {
            return bad("omega_slack must exceed 1");
        }
        if !(self.hstar_ratio > 1.0) {
            return bad("hstar_ratio must exceed 1");
        }
        if self.q_window_max < self.q_window {
            return bad("q_window_max must be at least q_window");
        }
        if let EpsPolicy::Fixed { eps } = self.eps {
            if !(eps > 0.0) {
                return bad("eps must be positive");
            }
        }
        if let Some(w) = &self.windows {
            if w.iter().any(|r| !(*r > 0.0)) {
                return bad("windows must be positive");
            }
        }
        StaircaseSequences::new(self.primal.a.clone(), self.primal.h.clone())?;
        StaircaseSequences::new(self.dual_a.clone(), SequenceRule::Linear { slope: 1.0 })?;
        Ok(())
    }

    /// `a*_n`, with `a*_0 = 0`.
    pub fn a_star(&self, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.dual_a.term(n).unwrap_or(f64::INFINITY)
        }
    }

    /// `2a*_n / det Γ*`, the measure `Ω_n` and `J` must exceed.
    pub fn required_measure(&self, n: usize) -> f64 {
        2.0 * self.a_star(n) * self.lattice.covolume()
    }
}

/// One candidate `h` tried by [`choose_hstar`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HstarTrial {
    pub h: f64,
    /// `sup_{λ∈X, |λ|>h} |φ_{n-1}(λ)|(1+|λ|)^n`.
    pub tail: f64,
    pub c_hat: f64,
    /// Largest measured `‖f‖_{m,k}`, if a trial interpolation was run.
    pub max_seminorm: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageChecks {
    pub a: bool,
    pub b: bool,
    pub c: bool,
    pub d: bool,
}

impl StageChecks {
    pub fn all(&self) -> bool {
        self.a && self.b && self.c && self.d
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: usize,
    pub phi_at_zero: f64,
    pub z_count: usize,
    /// `max |φ_n|` over `Z_n ∩ [-R_n, R_n]`.
    pub z_max: f64,
    /// `seminorms[m][k] = ‖φ_n - φ_{n-1}‖_{m,k}`.
    pub seminorms: Vec<Vec<f64>>,
    pub seminorm_bound: f64,
    pub node_residual: f64,
    pub condition: f64,
    pub hstar: f64,
    pub j: IntervalUnion,
    pub eps: f64,
    pub omega: IntervalUnion,
    pub margin: f64,
    pub q_window: f64,
    pub window: f64,
    pub nodes: usize,
    pub active_nodes: usize,
    pub c_hat: f64,
    pub trials: Vec<HstarTrial>,
    pub checks: StageChecks,
}

/// `φ_n` together with everything chosen on the way.
#[derive(Debug, Clone)]
pub struct ConstructionState {
    pub config: ConstructionConfig,
    pub phi: FunctionExpr,
    /// `Ω_0, ..., Ω_n`.
    pub omegas: Vec<IntervalUnion>,
    pub margins: Vec<f64>,
    pub hstar: Vec<f64>,
    pub reports: Vec<StageReport>,
    /// `X_n ∩ [-R_n, R_n]` of the last stage.
    pub x_nodes: Vec<f64>,
    /// `Z_n ∩ [-R_n, R_n]` of the last stage.
    pub z_points: Vec<f64>,
}

impl ConstructionState {
    /// Stage 0: `φ_0` with `φ̂_0` a bump filling the central gap of `Q`.
    pub fn initial(config: ConstructionConfig) -> Result<Self, ConstructionError> {
        config.validate()?;
        let choice = choose_omega(&config, 0, None)?;
        let (lo, hi) = choice.omega.central_component().ok_or(ConstructionError::WindowExhausted {
            window: choice.q_window,
            needed: 0.0,
        })?;
        let r0 = hi.min(-lo);
        Ok(Self {
            phi: FunctionExpr::bump(r0),
            omegas: vec![IntervalUnion::symmetric(r0)],
            margins: vec![choice.margin],
            hstar: Vec::new(),
            reports: Vec::new(),
            x_nodes: Vec::new(),
            z_points: Vec::new(),
            config,
        })
    }

    pub fn stage(&self) -> usize {
        self.phi.stage()
    }

    pub fn omega(&self) -> &IntervalUnion {
        self.omegas.last().expect("Ω_0 always present")
    }

    /// Dual staircase `(a*, h*)` with the `h*` chosen so far.
    pub fn dual_sequences(&self) -> StaircaseSequences {
        StaircaseSequences { a: self.config.dual_a.clone(), h: SequenceRule::Explicit { terms: self.hstar.clone() } }
    }

    /// One of the sets of the current stage: primal sets use the configured
    /// staircase, dual ones the chosen `h*`.
    pub fn set(&self, kind: SetKind, window: f64, transverse_cap: Option<f64>) -> Result<GeneratedSet, ConstructionError> {
        let dual;
        let dual_seqs;
        let (lattice, seqs) = if kind.is_dual() {
            dual = self.config.lattice.dual()?;
            dual_seqs = self.dual_sequences();
            (&dual, &dual_seqs)
        } else {
            (&self.config.lattice, &self.config.primal)
        };
        Ok(generate_set(&SetRequest { kind, lattice, seqs, window, transverse_cap })?)
    }

    /// `μ` built from `φ̂_n`.
    pub fn mu(&self, enumeration: Enumeration, atom_tol: f64) -> Result<AtomicMeasure, ConstructionError> {
        Ok(build_mu(&self.config.lattice, |t| self.phi.fourier(t), enumeration, atom_tol)?)
    }

    /// `μ̂` built from `φ_n`.
    pub fn mu_hat(&self, enumeration: Enumeration, atom_tol: f64) -> Result<AtomicMeasure, ConstructionError> {
        let dual = self.config.lattice.dual()?;
        Ok(build_mu_hat(&dual, |v| self.phi.value(v), self.config.lattice.covolume(), enumeration, atom_tol)?)
    }

    pub fn to_data(&self) -> StateData {
        StateData {
            config: self.config.clone(),
            stage: self.stage(),
            base_radius: self.phi.base_radius(),
            omegas: self.omegas.clone(),
            margins: self.margins.clone(),
            hstar: self.hstar.clone(),
            terms: self.phi.terms().iter().map(|f| f.to_data()).collect(),
            reports: self.reports.clone(),
            x_nodes: self.x_nodes.clone(),
            z_points: self.z_points.clone(),
        }
    }

    pub fn from_data(d: StateData) -> Result<Self, ConstructionError> {
        let n = d.terms.len();
        if d.stage != n || d.omegas.len() != n + 1 || d.hstar.len() != n || d.reports.len() != n {
            return Err(ConstructionError::MalformedState("stage counts disagree".into()));
        }
        let mut phi = FunctionExpr::bump(d.base_radius);
        for t in d.terms {
            phi.push(SchwartzInterpolant::from_data(t)?);
        }
        Ok(Self {
            config: d.config,
            phi,
            omegas: d.omegas,
            margins: d.margins,
            hstar: d.hstar,
            reports: d.reports,
            x_nodes: d.x_nodes,
            z_points: d.z_points,
        })
    }
}

/// JSON form of [`ConstructionState`]; enough to evaluate `φ_N` without solving.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateData {
    pub config: ConstructionConfig,
    pub stage: usize,
    pub base_radius: f64,
    pub omegas: Vec<IntervalUnion>,
    pub margins: Vec<f64>,
    pub hstar: Vec<f64>,
    pub terms: Vec<InterpolantData>,
    pub reports: Vec<StageReport>,
    pub x_nodes: Vec<f64>,
    pub z_points: Vec<f64>,
}

/// Advances `state` by one stage.
pub fn construction_step(state: &ConstructionState) -> Result<ConstructionState, ConstructionError> {
    stage::step(state)
}

/// Runs `steps` stages from `φ_0`.
pub fn run_construction(config: &ConstructionConfig, steps: usize) -> Result<ConstructionState, ConstructionError> {
    let mut state = ConstructionState::initial(config.clone())?;
    for n in 1..=steps {
        state = construction_step(&state).map_err(|e| ConstructionError::AtStage { stage: n, source: Box::new(e) })?;
    }
    Ok(state)
}
