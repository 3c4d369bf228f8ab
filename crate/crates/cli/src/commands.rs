//! `analyze`, `run` and `batch`.

use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use rlgames_core::analysis::{
    check_limit_resilience, final_distance, fit_rate, regret, LimitSetEstimate, RateFit, RegretMode,
};
use rlgames_core::faces::{club_margin, enumerate_clubs, is_club, minimal_clubs, Face, ResilienceReport, DEFAULT_FACE_BUDGET};
use rlgames_core::game::Game;
use rlgames_core::learning::{lipschitz_estimate, run as run_dynamics, FeedbackKind, Trajectory};

use crate::config::{AnalysisParams, Experiment};
use crate::output::trajectory_csv;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClubEntry {
    pub face: Face,
    /// Smallest slack of the club condition; `null` when nothing lies outside.
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameReport {
    pub players: usize,
    pub actions: Vec<usize>,
    pub payoff_bound: f64,
    pub lipschitz: f64,
    pub pure_nash: Vec<Vec<usize>>,
    pub strict_nash: Vec<Vec<usize>>,
    pub dominated: Vec<Vec<usize>>,
    pub clubs: Vec<ClubEntry>,
    pub minimal_clubs: Vec<ClubEntry>,
}

fn club_entry(game: &Game, face: Face) -> Result<ClubEntry> {
    let m = club_margin(game, &face)?;
    Ok(ClubEntry { face, margin: m.is_finite().then_some(m) })
}

pub fn analyze(game: &Game) -> Result<GameReport> {
    let clubs = enumerate_clubs(game, DEFAULT_FACE_BUDGET)?;
    let minimal = minimal_clubs(game, DEFAULT_FACE_BUDGET)?;
    Ok(GameReport {
        players: game.n_players(),
        actions: game.n_actions().to_vec(),
        payoff_bound: game.payoff_bound(),
        lipschitz: lipschitz_estimate(game),
        pure_nash: game.pure_nash(false, 0.0),
        strict_nash: game.pure_nash(true, 0.0),
        dominated: (0..game.n_players()).map(|i| game.strictly_dominated_pure(i)).collect::<Result<_, _>>()?,
        clubs: clubs.into_iter().map(|f| club_entry(game, f)).collect::<Result<_>>()?,
        minimal_clubs: minimal.into_iter().map(|f| club_entry(game, f)).collect::<Result<_>>()?,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FaceReport {
    pub face: Face,
    pub is_club: bool,
    pub final_distance: f64,
    pub rate_fit: Option<RateFit>,
    /// Why no rate fit is available, if so.
    pub rate_fit_error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub index: usize,
    pub seed: u64,
    pub game: String,
    pub kernel: String,
    pub feedback: FeedbackKind,
    pub horizon: usize,
    pub initial_scores: Vec<Vec<f64>>,
    /// Expected-mode cumulative regret per player after the last step.
    pub regret_final: Vec<f64>,
    /// Realized-mode regret for bandit runs.
    pub regret_final_realized: Option<Vec<f64>>,
    pub tracked_faces: Vec<FaceReport>,
    /// Index of the tracked face closest to the final profile.
    pub nearest_face: Option<usize>,
    pub min_final_distance: Option<f64>,
    /// Rate fit against the nearest tracked face.
    pub rate_fit: Option<RateFit>,
    pub limit_set: LimitSetEstimate,
    pub resilience: ResilienceReport,
    pub analysis: AnalysisParams,
}

/// Runs grid point `index` and computes its diagnostics.
pub fn execute(exp: &Experiment, index: usize) -> Result<(Trajectory, RunReport)> {
    let cfg = &exp.config;
    let params = &cfg.analysis;
    let y0 = exp.inits.get(index).with_context(|| format!("no initial point {index}"))?;
    let seed = exp.run_seed(index);
    let traj = run_dynamics(&exp.game, cfg.kernel, &exp.feedback, &cfg.step, cfg.horizon, y0, seed)?;
    let game = &exp.game;
    let regret_final = (0..game.n_players())
        .map(|i| Ok(*regret(&traj, game, i, RegretMode::Expected)?.last().expect("nonempty")))
        .collect::<Result<Vec<f64>>>()?;
    let regret_final_realized = if traj.is_bandit() {
        Some(
            (0..game.n_players())
                .map(|i| Ok(*regret(&traj, game, i, RegretMode::Realized)?.last().expect("nonempty")))
                .collect::<Result<Vec<f64>>>()?,
        )
    } else {
        None
    };
    let mut faces = Vec::with_capacity(exp.faces.len());
    for face in &exp.faces {
        let (rate_fit, rate_fit_error) = match fit_rate(&traj, face, cfg.kernel, params.rate_atol, params.rate_ceiling) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        };
        faces.push(FaceReport {
            face: face.clone(),
            is_club: is_club(game, face)?,
            final_distance: final_distance(&traj, face)?,
            rate_fit,
            rate_fit_error,
        });
    }
    let nearest_face = faces
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.final_distance.total_cmp(&b.1.final_distance))
        .map(|(k, _)| k);
    let lr = check_limit_resilience(&traj, game, params.window_fraction, params.dedup_radius, params.resilience_tol)?;
    let report = RunReport {
        index,
        seed,
        game: cfg.game.clone(),
        kernel: cfg.kernel.name(),
        feedback: exp.feedback,
        horizon: cfg.horizon,
        initial_scores: y0.clone(),
        regret_final,
        regret_final_realized,
        nearest_face,
        min_final_distance: nearest_face.map(|k| faces[k].final_distance),
        rate_fit: nearest_face.and_then(|k| faces[k].rate_fit.clone()),
        tracked_faces: faces,
        limit_set: lr.limit_set,
        resilience: lr.report,
        analysis: *params,
    };
    Ok((traj, report))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Single run; writes the trajectory CSV and the JSON report into `out_dir`.
pub fn run(exp: &Experiment, out_dir: &Path) -> Result<RunReport> {
    if exp.inits.len() != 1 {
        bail!("run needs a single initial point, the config defines {}; use batch for grids", exp.inits.len());
    }
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let (traj, report) = execute(exp, 0)?;
    write(&out_dir.join(&exp.config.output.trajectory), &trajectory_csv(&traj, &exp.game, &exp.faces)?)?;
    write(&out_dir.join(&exp.config.output.report), &to_json(&report)?)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub index: usize,
    pub seed: u64,
    pub initial_scores: Vec<Vec<f64>>,
    pub final_distances: Vec<f64>,
    pub nearest_face: Option<usize>,
    pub min_final_distance: Option<f64>,
    pub converged: bool,
    pub resilient: bool,
    pub worst_resilience_gap: f64,
    pub limit_points: usize,
    pub regret_final: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FaceFraction {
    pub face: Face,
    pub fraction: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchReport {
    pub game: String,
    pub kernel: String,
    pub feedback: FeedbackKind,
    pub horizon: usize,
    pub master_seed: u64,
    pub runs: Vec<RunSummary>,
    /// Fraction of runs ending within the threshold of each tracked face.
    pub face_fractions: Vec<FaceFraction>,
    /// Fraction of runs ending within the threshold of some tracked face.
    pub family_fraction: f64,
    pub resilient_fraction: f64,
    pub analysis: AnalysisParams,
}

/// Thread count from `RLGAMES_THREADS`, if set to a positive integer.
pub fn env_threads() -> Option<usize> {
    std::env::var("RLGAMES_THREADS").ok()?.trim().parse().ok().filter(|&n: &usize| n > 0)
}

/// Runs every grid point. Per-run CSVs go to `out_dir` when it is given and the
/// config asks for them; `summary.json` is written whenever `out_dir` is given.
pub fn batch(exp: &Experiment, out_dir: Option<&Path>, threads: Option<usize>) -> Result<BatchReport> {
    let params = &exp.config.analysis;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads.or_else(env_threads) {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().context("building the worker pool")?;
    let width = exp.inits.len().saturating_sub(1).to_string().len().max(3);
    let summaries: Vec<RunSummary> = pool.install(|| {
        (0..exp.inits.len())
            .into_par_iter()
            .map(|index| {
                let (traj, report) = execute(exp, index)?;
                if let (Some(dir), true) = (out_dir, exp.config.output.batch_trajectories) {
                    let name = format!("run_{index:0width$}.csv");
                    write(&dir.join(name), &trajectory_csv(&traj, &exp.game, &exp.faces)?)?;
                }
                Ok(RunSummary {
                    index,
                    seed: report.seed,
                    initial_scores: report.initial_scores,
                    final_distances: report.tracked_faces.iter().map(|f| f.final_distance).collect(),
                    nearest_face: report.nearest_face,
                    min_final_distance: report.min_final_distance,
                    converged: report.min_final_distance.is_some_and(|d| d < params.convergence_threshold),
                    resilient: report.resilience.resilient,
                    worst_resilience_gap: report.resilience.worst_gap(),
                    limit_points: report.limit_set.points.len(),
                    regret_final: report.regret_final,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let n = summaries.len() as f64;
    let face_fractions = exp
        .faces
        .iter()
        .enumerate()
        .map(|(k, face)| FaceFraction {
            face: face.clone(),
            fraction: summaries.iter().filter(|s| s.final_distances[k] < params.convergence_threshold).count() as f64 / n,
        })
        .collect();
    let report = BatchReport {
        game: exp.config.game.clone(),
        kernel: exp.config.kernel.name(),
        feedback: exp.feedback,
        horizon: exp.config.horizon,
        master_seed: exp.config.seed,
        family_fraction: summaries.iter().filter(|s| s.converged).count() as f64 / n,
        resilient_fraction: summaries.iter().filter(|s| s.resilient).count() as f64 / n,
        runs: summaries,
        face_fractions,
        analysis: *params,
    };
    if let Some(dir) = out_dir {
        write(&dir.join("summary.json"), &to_json(&report)?)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rlgames_core::builtin;

    #[test]
    fn analyze_examples() {
        let vz = analyze(&builtin::vz4x4()).unwrap();
        let faces: Vec<Vec<Vec<usize>>> = vz.minimal_clubs.iter().map(|c| c.face.supports().to_vec()).collect();
        assert_eq!(faces, vec![vec![vec![0], vec![0]], vec![vec![2], vec![2]]]);
        assert_eq!(vz.dominated, vec![vec![1, 3], vec![1, 3]]);
        let parity = analyze(&builtin::parity()).unwrap();
        assert_eq!(parity.minimal_clubs.len(), 4);
        assert!(parity.minimal_clubs.iter().all(|c| c.face.is_singleton()));
        let constant = analyze(&builtin::constant(vec![2, 2], 0.0)).unwrap();
        assert_eq!(constant.minimal_clubs.len(), 1);
        assert_eq!(constant.minimal_clubs[0].margin, None);
    }
}
