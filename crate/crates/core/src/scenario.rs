//! Scenario files and the multi-route evolution pipeline (`f64`).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ermakov::{ermakov_invariant, integrate_ermakov_with_centroid};
use crate::error::Error;
use crate::integrate::IntegratorConfig;
use crate::model::{
    ermakov_from_riccati, ermakov_from_uncertainties, riccati_from_ermakov, uncertainties_from_ermakov, Centroid,
    ErmakovState, LambdaState, RiccatiState, SystemSpec, UncertaintyTriple,
};
use crate::newton::integrate_lambda;
use crate::profile::FrequencyProfile;
use crate::propagator::{kernel_lambda_trajectory, verify_kernel_satisfies_tdse, InitialGaussian};
use crate::riccati::{default_blowup_bound, integrate_riccati_bounded};
use crate::uncertainty::{
    correlation_coefficient, free_motion_uncertainties, ho_uncertainty_closed_form, integrate_uncertainty_system,
};
use crate::wigner::{GridSpec, PhaseState};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid scenario: {0}")]
    Invalid(Error),
    #[error("numerical failure: {0}")]
    Numerical(Error),
}

impl ScenarioError {
    /// 1 for unreadable input, 2 for validation, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Io { .. } | ScenarioError::Parse(_) => 1,
            ScenarioError::Invalid(_) => 2,
            ScenarioError::Numerical(_) => 3,
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    pub omega: FrequencyProfile<f64>,
}

/// `⟨x⟩`, `⟨p⟩` at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CentroidConfig {
    #[serde(default)]
    pub x: f64,
    #[serde(default)]
    pub p: f64,
}

/// Exactly one of `moments`, `ermakov`, `riccati` must be present.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default)]
    pub centroid: CentroidConfig,
    pub moments: Option<UncertaintyTriple<f64>>,
    pub ermakov: Option<ErmakovState<f64>>,
    pub riccati: Option<RiccatiState<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_end: f64,
    pub n_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerConfig {
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default)]
    pub grid: Option<GridSpec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Artifact {
    TimeSeries,
    Summary,
    Traces,
    Correlation,
}

fn default_outputs() -> Vec<Artifact> {
    vec![Artifact::TimeSeries, Artifact::Summary, Artifact::Traces, Artifact::Correlation]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub system: SystemConfig,
    pub initial: InitialConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub integrator: IntegratorConfig<f64>,
    #[serde(default)]
    pub wigner: WignerConfig,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<Artifact>,
}

/// Initial state in every representation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InitialState {
    pub centroid: Centroid<f64>,
    pub ermakov: ErmakovState<f64>,
    pub moments: UncertaintyTriple<f64>,
    pub riccati: RiccatiState<f64>,
}

/// Relative Schrödinger–Robertson tolerance for user-supplied moments.
pub const MOMENT_INPUT_TOL: f64 = 1e-9;

impl Scenario {
    /// Reads TOML, or JSON when the extension is `.json`.
    pub fn from_path(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
        let mut sc = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::from_json_str(&text)?
        } else {
            Self::from_toml_str(&text)?
        };
        if sc.name.is_empty() {
            sc.name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        }
        Ok(sc)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string().trim_end().replace('\n', " ")))
    }

    pub fn from_json_str(text: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))
    }

    pub fn system(&self) -> Result<SystemSpec<f64>, ScenarioError> {
        SystemSpec::new(self.system.mass, self.system.hbar, self.system.omega.clone()).map_err(ScenarioError::Invalid)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let invalid = |m: &str| Err(ScenarioError::Invalid(Error::InvalidConfig(m.into())));
        self.system()?;
        if !(self.time.t_end > 0.0) || !self.time.t_end.is_finite() {
            return invalid("time.t_end must be positive");
        }
        if self.time.n_steps < 1 {
            return invalid("time.n_steps must be at least 1");
        }
        self.integrator.validate().map_err(ScenarioError::Invalid)?;
        if let Some(g) = &self.wigner.grid {
            g.validate().map_err(ScenarioError::Invalid)?;
        }
        if !self.initial.centroid.x.is_finite() || !self.initial.centroid.p.is_finite() {
            return invalid("initial.centroid must be finite");
        }
        self.initial_state().map(|_| ())
    }

    pub fn initial_state(&self) -> Result<InitialState, ScenarioError> {
        let s = self.system()?;
        let i = &self.initial;
        let given = [i.moments.is_some(), i.ermakov.is_some(), i.riccati.is_some()];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(ScenarioError::Invalid(Error::InvalidConfig(
                "initial needs exactly one of moments, ermakov, riccati".into(),
            )));
        }
        let ermakov = if let Some(u) = i.moments {
            u.validate(s.hbar, MOMENT_INPUT_TOL).map_err(ScenarioError::Invalid)?;
            ermakov_from_uncertainties(&s, u)
        } else if let Some(e) = i.ermakov {
            riccati_from_ermakov(e).map(|_| e)
        } else {
            ermakov_from_riccati(i.riccati.unwrap_or_default())
        }
        .map_err(ScenarioError::Invalid)?;
        let moments = uncertainties_from_ermakov(&s, ermakov).map_err(ScenarioError::Invalid)?;
        let riccati = riccati_from_ermakov(ermakov).map_err(ScenarioError::Invalid)?;
        Ok(InitialState {
            centroid: Centroid::from_means(i.centroid.x, i.centroid.p, s.mass),
            ermakov,
            moments,
            riccati,
        })
    }

    /// `t_i = t_end · i / n_steps`, `i = 0..=n_steps`.
    pub fn time_grid(&self) -> Vec<f64> {
        let n = self.time.n_steps;
        (0..=n).map(|i| self.time.t_end * i as f64 / n as f64).collect()
    }

    /// Centroid and moments at the given non-decreasing, non-negative times.
    pub fn states_at(&self, times: &[f64]) -> Result<Vec<PhaseState<f64>>, ScenarioError> {
        self.validate()?;
        if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) || times.windows(2).any(|w| w[1] < w[0]) {
            return Err(ScenarioError::Invalid(Error::InvalidConfig("times must be non-negative and sorted".into())));
        }
        let s = self.system()?;
        let init = self.initial_state()?;
        // Strictly increasing grid from 0 carrying every requested time.
        let mut grid = vec![0.0];
        for &t in times {
            if t > *grid.last().unwrap() {
                grid.push(t);
            }
        }
        if grid.len() == 1 {
            return Ok(times.iter().map(|_| (init.centroid, init.moments)).collect());
        }
        let traj = integrate_ermakov_with_centroid(&s, init.centroid, init.ermakov, &grid, &self.integrator)
            .map_err(ScenarioError::Numerical)?;
        times
            .iter()
            .map(|t| {
                let k = grid.iter().position(|g| g == t).unwrap_or(0);
                let (c, e) = traj[k];
                Ok((c, uncertainties_from_ermakov(&s, e).map_err(ScenarioError::Numerical)?))
            })
            .collect()
    }
}

/// One CSV line of an evolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Row {
    pub t: f64,
    pub eta: f64,
    pub eta_dot: f64,
    pub alpha: f64,
    pub alpha_dot: f64,
    pub c_r: f64,
    pub c_i: f64,
    pub sigma_xx: f64,
    pub sigma_pp: f64,
    pub sigma_xp: f64,
    pub cor: f64,
    pub i_ermakov: f64,
    pub sr_defect: f64,
    pub wronskian_defect: f64,
}

pub const CSV_HEADER: &str =
    "t,eta,eta_dot,alpha,alpha_dot,C_R,C_I,sigma_xx,sigma_pp,sigma_xp,Cor,I_ermakov,SR_defect,wronskian_defect";

impl Row {
    pub fn fields(&self) -> [f64; 14] {
        [
            self.t,
            self.eta,
            self.eta_dot,
            self.alpha,
            self.alpha_dot,
            self.c_r,
            self.c_i,
            self.sigma_xx,
            self.sigma_pp,
            self.sigma_xp,
            self.cor,
            self.i_ermakov,
            self.sr_defect,
            self.wronskian_defect,
        ]
    }

    pub fn to_csv_line(&self) -> String {
        self.fields().iter().map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(",")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    fn of(values: impl Iterator<Item = f64>) -> Range {
        values.fold(Range { min: f64::INFINITY, max: f64::NEG_INFINITY }, |r, v| Range {
            min: r.min.min(v),
            max: r.max.max(v),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub t_end: f64,
    pub n_steps: usize,
    /// `max |σ_x²σ_p² − σ_xp² − ℏ²/4| / (ℏ²/4)` along the moment system.
    pub max_sr_violation: f64,
    pub invariant_initial: f64,
    /// Relative to the initial value, absolute when that is zero.
    pub invariant_drift: f64,
    pub wronskian_drift: f64,
    /// Largest pairwise `σ_x²` disagreement among the four integrated routes.
    pub route_max_diff: f64,
    /// `σ_x²` deviation from the closed form, for constant profiles.
    pub closed_form_max_diff: Option<f64>,
    pub sigma_xx: Range,
    pub sigma_pp: Range,
    pub sigma_xp: Range,
    pub alpha: Range,
    pub cor: Range,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub rows: Vec<Row>,
    pub summary: Summary,
}

/// Runs all four formulations over the scenario's time grid.
pub fn evolve(sc: &Scenario) -> Result<Evolution, ScenarioError> {
    sc.validate()?;
    let s = sc.system()?;
    let init = sc.initial_state()?;
    let grid = sc.time_grid();
    let cfg = &sc.integrator;
    let num = ScenarioError::Numerical;

    let ((joint, moments), (lambda, riccati)) = rayon::join(
        || {
            rayon::join(
                || integrate_ermakov_with_centroid(&s, init.centroid, init.ermakov, &grid, cfg),
                || integrate_uncertainty_system(&s, init.moments, &grid, cfg),
            )
        },
        || {
            rayon::join(
                || integrate_lambda(&s, LambdaState::from_ermakov(init.ermakov)?, &grid, cfg),
                || integrate_riccati_bounded(&s, init.riccati, &grid, cfg, default_blowup_bound(&s)),
            )
        },
    );
    let (joint, moments, lambda, riccati) =
        (joint.map_err(num)?, moments.map_err(num)?, lambda.map_err(num)?, riccati.map_err(num)?);

    let quarter_hb2 = s.hbar * s.hbar / 4.0;
    let i0 = ermakov_invariant(&s, init.centroid, init.ermakov);
    let closed = |t: f64| match s.omega.as_constant() {
        Some(w) if w > 0.0 => ho_uncertainty_closed_form(&s, init.moments, w, t).ok(),
        Some(_) => Some(free_motion_uncertainties(&s, init.moments, t)),
        None => None,
    };

    let mut rows = Vec::with_capacity(grid.len());
    let mut route_max_diff = 0f64;
    let mut closed_form_max_diff: Option<f64> = None;
    let mut max_sr = 0f64;
    let mut inv_drift = 0f64;
    let mut w_drift = 0f64;
    for (k, &t) in grid.iter().enumerate() {
        let (c, e) = joint[k];
        let u = uncertainties_from_ermakov(&s, e).map_err(num)?;
        let cr = riccati[k];
        let l = lambda[k];
        let sx_routes = [
            u.sigma_xx,
            moments[k].sigma_xx,
            s.hbar / (2.0 * s.mass * cr.c_i),
            s.hbar / (2.0 * s.mass * l.riccati().c_i),
        ];
        for a in 0..4 {
            for b in a + 1..4 {
                route_max_diff = route_max_diff.max((sx_routes[a] - sx_routes[b]).abs());
            }
        }
        if let Some(uc) = closed(t) {
            let d = sx_routes.iter().map(|v| (v - uc.sigma_xx).abs()).fold(0.0, f64::max);
            closed_form_max_diff = Some(closed_form_max_diff.unwrap_or(0.0).max(d));
        }
        let sr_defect = moments[k].sr_defect(s.hbar);
        max_sr = max_sr.max(sr_defect.abs() / quarter_hb2);
        let inv = ermakov_invariant(&s, c, e);
        inv_drift = inv_drift.max(if i0 > 0.0 { (inv - i0).abs() / i0 } else { inv.abs() });
        let wd = l.wronskian() - 1.0;
        w_drift = w_drift.max(wd.abs());
        rows.push(Row {
            t,
            eta: c.eta,
            eta_dot: c.eta_dot,
            alpha: e.alpha,
            alpha_dot: e.alpha_dot,
            c_r: cr.c_r,
            c_i: cr.c_i,
            sigma_xx: u.sigma_xx,
            sigma_pp: u.sigma_pp,
            sigma_xp: u.sigma_xp,
            cor: correlation_coefficient(u).map_err(num)?,
            i_ermakov: inv,
            sr_defect,
            wronskian_defect: wd,
        });
    }
    let summary = Summary {
        name: sc.name.clone(),
        t_end: sc.time.t_end,
        n_steps: sc.time.n_steps,
        max_sr_violation: max_sr,
        invariant_initial: i0,
        invariant_drift: inv_drift,
        wronskian_drift: w_drift,
        route_max_diff,
        closed_form_max_diff,
        sigma_xx: Range::of(rows.iter().map(|r| r.sigma_xx)),
        sigma_pp: Range::of(rows.iter().map(|r| r.sigma_pp)),
        sigma_xp: Range::of(rows.iter().map(|r| r.sigma_xp)),
        alpha: Range::of(rows.iter().map(|r| r.alpha)),
        cor: Range::of(rows.iter().map(|r| r.cor)),
    };
    Ok(Evolution { rows, summary })
}

/// Pass/fail thresholds applied by [`check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub sr: f64,
    pub invariant: f64,
    pub wronskian: f64,
    pub routes: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { sr: 1e-9, invariant: 1e-8, wronskian: 1e-9, routes: 1e-7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

pub fn check(summary: &Summary, th: &Thresholds) -> Vec<CheckResult> {
    let mut items = vec![
        ("schrodinger_robertson", summary.max_sr_violation, th.sr),
        ("ermakov_invariant", summary.invariant_drift, th.invariant),
        ("wronskian", summary.wronskian_drift, th.wronskian),
        ("route_agreement", summary.route_max_diff, th.routes),
    ];
    if let Some(d) = summary.closed_form_max_diff {
        items.push(("closed_form", d, th.routes));
    }
    items
        .into_iter()
        .map(|(name, value, threshold)| CheckResult { name: name.into(), value, threshold, pass: value < threshold })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationReport {
    pub samples: usize,
    pub skipped_focal: usize,
    /// `max |C_kernel − C_direct|`.
    pub max_c_diff: f64,
    /// `max |η_kernel − η_direct|`.
    pub max_eta_diff: f64,
    pub max_norm_error: f64,
    /// Kernel TDSE residual on `t ∈ [0.5, 1]`, `x, x′ ∈ [−2, 2]`; absent when
    /// the window contains a focal point or exceeds the scenario.
    pub tdse_residual: Option<f64>,
}

/// Compares kernel-propagated packets with the directly integrated ones.
pub fn propagate(sc: &Scenario) -> Result<PropagationReport, ScenarioError> {
    sc.validate()?;
    let s = sc.system()?;
    let init = sc.initial_state()?;
    let grid = sc.time_grid();
    let cfg = &sc.integrator;
    let num = ScenarioError::Numerical;
    let alpha0 = init.ermakov.alpha;
    let kernel = kernel_lambda_trajectory(&s, alpha0, &grid, cfg).map_err(num)?;
    let riccati = integrate_riccati_bounded(&s, init.riccati, &grid, cfg, default_blowup_bound(&s)).map_err(num)?;
    let centroid = crate::newton::integrate_centroid(&s, init.centroid, &grid, cfg).map_err(num)?;
    let g0 = InitialGaussian::from_state(&s, init.centroid, init.ermakov);

    let mut report = PropagationReport {
        samples: 0,
        skipped_focal: 0,
        max_c_diff: 0.0,
        max_eta_diff: 0.0,
        max_norm_error: 0.0,
        tdse_residual: None,
    };
    for k in 1..grid.len() {
        match crate::propagator::apply_kernel(&s, &g0, kernel[k]) {
            Err(Error::FocalPoint { .. }) => report.skipped_focal += 1,
            Err(e) => return Err(num(e)),
            Ok(form) => {
                let pk = form.to_packet(&s).map_err(num)?;
                report.samples += 1;
                report.max_c_diff = report.max_c_diff.max((pk.riccati.to_complex() - riccati[k].to_complex()).norm());
                report.max_eta_diff = report.max_eta_diff.max((pk.centroid.eta - centroid[k].eta).abs());
                report.max_norm_error = report.max_norm_error.max((form.norm().map_err(num)? - 1.0).abs());
            }
        }
    }

    if sc.time.t_end >= 1.0 {
        let times = crate::model::linspace(0.5, 1.0, 501);
        let traj = kernel_lambda_trajectory(&s, alpha0, &[&[0.0][..], &times[..]].concat(), cfg).map_err(num)?;
        let xs = crate::model::linspace(-2.0, 2.0, 21);
        let xps = crate::model::linspace(-2.0, 2.0, 5);
        report.tdse_residual = verify_kernel_satisfies_tdse(&s, alpha0, &times, &traj[1..], &xs, &xps).ok();
    }
    Ok(report)
}
