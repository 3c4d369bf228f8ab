//! Experiment configuration files.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use rlgames_core::analysis::{DEFAULT_DEDUP_RADIUS, DEFAULT_FIT_CEILING, DEFAULT_WINDOW_FRACTION};
use rlgames_core::builtin;
use rlgames_core::faces::{minimal_clubs, Face, DEFAULT_FACE_BUDGET};
use rlgames_core::game::Game;
use rlgames_core::learning::{FeedbackKind, Schedule};
use rlgames_core::regularizer::Kernel;
use rlgames_core::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Built-in game name or path to a game JSON file.
    pub game: String,
    pub kernel: Kernel,
    pub feedback: FeedbackSpec,
    pub step: Schedule,
    /// Exploration schedule; required for bandit feedback and rejected otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exploration: Option<Schedule>,
    pub horizon: usize,
    #[serde(default)]
    pub seed: u64,
    pub init: InitSpec,
    #[serde(default)]
    pub tracked_faces: TrackedFaces,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub analysis: AnalysisParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FeedbackSpec {
    Full,
    Optimistic,
    MirrorProx,
    Clairvoyant {
        #[serde(default = "default_tol")]
        tol: f64,
        #[serde(default = "default_max_iters")]
        max_iters: usize,
    },
    Bandit,
}

fn default_tol() -> f64 {
    1e-10
}

fn default_max_iters() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    /// Explicit initial scores, one vector per player.
    Scores(Vec<Vec<f64>>),
    Grid(GridSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_grid_values")]
    pub values: Vec<f64>,
    /// `(player, action)` score coordinates set from the grid; by default every
    /// action but the last of each player.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<(usize, usize)>>,
    /// Radius of the uniform perturbation added to every score coordinate.
    #[serde(default)]
    pub perturbation: f64,
}

fn default_grid_values() -> Vec<f64> {
    vec![-1.0, 0.0, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TrackedFaces {
    /// `"auto:minimal_clubs"`.
    Auto(String),
    Explicit(Vec<Face>),
}

impl Default for TrackedFaces {
    fn default() -> Self {
        Self::Auto(AUTO_MINIMAL_CLUBS.into())
    }
}

pub const AUTO_MINIMAL_CLUBS: &str = "auto:minimal_clubs";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_trajectory")]
    pub trajectory: String,
    #[serde(default = "default_report")]
    pub report: String,
    /// Whether `batch` writes one trajectory CSV per grid point.
    #[serde(default)]
    pub batch_trajectories: bool,
}

fn default_trajectory() -> String {
    "trajectory.csv".into()
}

fn default_report() -> String {
    "report.json".into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { trajectory: default_trajectory(), report: default_report(), batch_trajectories: false }
    }
}

/// Thresholds used by the post-run diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisParams {
    pub window_fraction: f64,
    pub dedup_radius: f64,
    pub resilience_tol: f64,
    pub rate_atol: f64,
    pub rate_ceiling: f64,
    pub convergence_threshold: f64,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        Self {
            window_fraction: DEFAULT_WINDOW_FRACTION,
            dedup_radius: DEFAULT_DEDUP_RADIUS,
            resilience_tol: 0.02,
            rate_atol: 1e-12,
            rate_ceiling: DEFAULT_FIT_CEILING,
            convergence_threshold: 0.05,
        }
    }
}

/// A configuration resolved against its game.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub game: Game,
    pub feedback: FeedbackKind,
    pub faces: Vec<Face>,
    pub inits: Vec<Vec<Vec<f64>>>,
}

impl Experiment {
    /// Seed of grid point `index`.
    pub fn run_seed(&self, index: usize) -> u64 {
        rng::derive_seed(self.config.seed, index as u64)
    }
}

pub fn load_game(spec: &str, base: Option<&Path>) -> Result<Game> {
    if let Some(g) = builtin::by_name(spec) {
        return Ok(g);
    }
    let path = match base {
        Some(b) if Path::new(spec).is_relative() => b.join(spec),
        _ => PathBuf::from(spec),
    };
    if !path.exists() {
        bail!("unknown game {spec:?}: not a built-in ({}) and no such file", builtin::NAMES.join(", "));
    }
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading game file {}", path.display()))?;
    Ok(Game::from_json(&text)?)
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("parsing experiment config")
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn feedback_kind(&self) -> Result<FeedbackKind> {
        let kind = match (self.feedback, self.exploration) {
            (FeedbackSpec::Bandit, Some(exploration)) => FeedbackKind::Bandit { exploration },
            (FeedbackSpec::Bandit, None) => bail!("bandit feedback requires an exploration schedule"),
            (_, Some(_)) => bail!("an exploration schedule is only valid with bandit feedback"),
            (FeedbackSpec::Full, None) => FeedbackKind::Full,
            (FeedbackSpec::Optimistic, None) => FeedbackKind::Optimistic,
            (FeedbackSpec::MirrorProx, None) => FeedbackKind::MirrorProx,
            (FeedbackSpec::Clairvoyant { tol, max_iters }, None) => FeedbackKind::Clairvoyant { tol, max_iters },
        };
        Ok(kind)
    }

    /// Checks every invariant and resolves the game, faces and initial scores.
    pub fn resolve(&self, base: Option<&Path>) -> Result<Experiment> {
        if self.horizon == 0 {
            bail!("horizon must be at least 1");
        }
        check_schedule("step", &self.step)?;
        if let Some(e) = &self.exploration {
            check_schedule("exploration", e)?;
            if e.base > 1.0 {
                bail!("exploration base must not exceed 1, got {}", e.base);
            }
        }
        let feedback = self.feedback_kind()?;
        if let FeedbackKind::Clairvoyant { tol, max_iters } = feedback {
            if !(tol > 0.0) {
                bail!("clairvoyant tolerance must be positive, got {tol}");
            }
            if max_iters == 0 {
                bail!("clairvoyant iteration cap must be positive");
            }
        }
        let game = load_game(&self.game, base)?;
        let faces = match &self.tracked_faces {
            TrackedFaces::Auto(s) if s == AUTO_MINIMAL_CLUBS => minimal_clubs(&game, DEFAULT_FACE_BUDGET)?,
            TrackedFaces::Auto(s) => bail!("unknown tracked-face keyword {s:?}; expected {AUTO_MINIMAL_CLUBS:?}"),
            TrackedFaces::Explicit(f) => {
                for face in f {
                    face.validate_for(&game).context("tracked face")?;
                }
                f.clone()
            }
        };
        let a = &self.analysis;
        if !(a.window_fraction > 0.0 && a.window_fraction <= 1.0) {
            bail!("analysis window fraction must lie in (0,1], got {}", a.window_fraction);
        }
        if !(a.dedup_radius > 0.0) {
            bail!("analysis dedup radius must be positive, got {}", a.dedup_radius);
        }
        if !(a.resilience_tol >= 0.0) {
            bail!("analysis resilience tolerance must be nonnegative, got {}", a.resilience_tol);
        }
        if !(a.rate_atol > 0.0 && a.rate_ceiling > a.rate_atol) {
            bail!("analysis rate window needs 0 < rate_atol < rate_ceiling");
        }
        if !(a.convergence_threshold > 0.0) {
            bail!("analysis convergence threshold must be positive, got {}", a.convergence_threshold);
        }
        let inits = self.initial_scores(&game)?;
        Ok(Experiment { config: self.clone(), game, feedback, faces, inits })
    }

    fn initial_scores(&self, game: &Game) -> Result<Vec<Vec<Vec<f64>>>> {
        match &self.init {
            InitSpec::Scores(y) => {
                if y.len() != game.n_players() {
                    bail!("initial scores list {} players, game has {}", y.len(), game.n_players());
                }
                for (k, (s, &m)) in y.iter().zip(game.n_actions()).enumerate() {
                    if s.len() != m {
                        bail!("initial scores of player {k} have {} entries, expected {m}", s.len());
                    }
                    if s.iter().any(|v| !v.is_finite()) {
                        bail!("initial scores of player {k} must be finite");
                    }
                }
                Ok(vec![y.clone()])
            }
            InitSpec::Grid(g) => grid_points(g, game, self.seed),
        }
    }
}

fn check_schedule(name: &str, s: &Schedule) -> Result<()> {
    if !(s.base > 0.0 && s.base.is_finite()) {
        bail!("{name} schedule base must be positive and finite, got {}", s.base);
    }
    if !(0.0..=1.0).contains(&s.exponent) {
        bail!("{name} schedule exponent must lie in [0,1], got {}", s.exponent);
    }
    Ok(())
}

/// Initial scores of every grid point, in row-major order over the coordinates.
pub fn grid_points(spec: &GridSpec, game: &Game, seed: u64) -> Result<Vec<Vec<Vec<f64>>>> {
    if spec.values.is_empty() {
        bail!("grid values must not be empty");
    }
    if spec.values.iter().any(|v| !v.is_finite()) {
        bail!("grid values must be finite");
    }
    if !(spec.perturbation >= 0.0 && spec.perturbation.is_finite()) {
        bail!("grid perturbation radius must be nonnegative and finite, got {}", spec.perturbation);
    }
    let coords: Vec<(usize, usize)> = match &spec.coords {
        Some(c) => {
            if c.is_empty() {
                bail!("grid coordinates must not be empty");
            }
            for &(i, a) in c {
                if i >= game.n_players() || a >= game.n_actions()[i] {
                    bail!("grid coordinate ({i}, {a}) is outside the game");
                }
            }
            c.clone()
        }
        None => game
            .n_actions()
            .iter()
            .enumerate()
            .flat_map(|(i, &m)| (0..m - 1).map(move |a| (i, a)))
            .collect(),
    };
    let count = spec.values.len().checked_pow(coords.len() as u32).filter(|&c| c <= 1_000_000);
    let Some(count) = count else { bail!("grid has too many points") };
    let offsets: Vec<usize> = game.n_actions().iter().scan(0, |acc, &m| {
        let o = *acc;
        *acc += m;
        Some(o)
    }).collect();
    let total = game.total_actions();
    let mut out = Vec::with_capacity(count);
    for idx in 0..count {
        let mut flat = vec![0.0; total];
        let mut rem = idx;
        for &(i, a) in coords.iter().rev() {
            flat[offsets[i] + a] = spec.values[rem % spec.values.len()];
            rem /= spec.values.len();
        }
        if spec.perturbation > 0.0 {
            for (j, f) in flat.iter_mut().enumerate() {
                let u = rng::uniform(seed, rng::PERTURBATION_STREAM + idx as u64, j as u64);
                *f += spec.perturbation * (2.0 * u - 1.0);
            }
        }
        out.push(game.n_actions().iter().zip(&offsets).map(|(&m, &o)| flat[o..o + m].to_vec()).collect());
    }
    Ok(out)
}
