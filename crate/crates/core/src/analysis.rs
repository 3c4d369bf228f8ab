//! Diagnostics over recorded trajectories: regret, energies, distances to
//! faces, limit-set proxies and convergence-rate fits.

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::faces::{distance_raw, is_resilient, DeviationVector, Face, ResilienceReport};
use crate::game::{CorrelatedDistribution, Game, MixedProfile};
use crate::learning::Trajectory;
use crate::regularizer::{rate_function, Kernel};

pub const DEFAULT_WINDOW_FRACTION: f64 = 0.1;
pub const DEFAULT_DEDUP_RADIUS: f64 = 0.02;
/// Distances above this are treated as transient by the rate fits.
pub const DEFAULT_FIT_CEILING: f64 = 0.5;
pub const MIN_FIT_POINTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegretMode {
    /// Against the product distribution of the mixed profile played.
    Expected,
    /// Against the realized pure profile of a bandit run.
    Realized,
}

/// Running external regret `max_a sum_k [u_i(a; pi_-i,k) - u_i(pi_k)]`.
pub fn regret(traj: &Trajectory, game: &Game, player: usize, mode: RegretMode) -> Result<Vec<f64>> {
    check_trajectory(traj, game)?;
    if player >= game.n_players() {
        return input(format!("player {player} out of range"));
    }
    if mode == RegretMode::Realized && !traj.is_bandit() {
        return input("realized regret needs a bandit trajectory");
    }
    let m = game.n_actions()[player];
    let off = traj.offset(player);
    let mut dev = vec![0.0; m];
    let mut base = 0.0;
    let mut out = Vec::with_capacity(traj.len());
    for k in 0..traj.len() {
        match mode {
            RegretMode::Expected => {
                let x = traj.mixed_profile(k);
                let v = game.payoff_vectors_raw(&x.as_slices()).swap_remove(player);
                let xi = &traj.profile(k)[off..off + m];
                base += v.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>();
                dev.iter_mut().zip(&v).for_each(|(d, u)| *d += u);
            }
            RegretMode::Realized => {
                let mut p: Vec<usize> = traj.realized(k).iter().map(|&a| a as usize).collect();
                base += game.payoff_pure(player, &p)?;
                for (a, d) in dev.iter_mut().enumerate() {
                    p[player] = a;
                    *d += game.payoff_pure(player, &p)?;
                }
            }
        }
        out.push(dev.iter().copied().fold(f64::NEG_INFINITY, f64::max) - base);
    }
    Ok(out)
}

/// Running regret against an externally supplied sequence of joint distributions.
pub fn regret_replay(game: &Game, player: usize, dists: &[CorrelatedDistribution]) -> Result<Vec<f64>> {
    if player >= game.n_players() {
        return input(format!("player {player} out of range"));
    }
    let m = game.n_actions()[player];
    let stride = game.stride(player);
    let table = game.payoff_table(player);
    let mut dev = vec![0.0; m];
    let mut base = 0.0;
    let mut out = Vec::with_capacity(dists.len());
    for d in dists {
        if d.weights().len() != game.n_profiles() {
            return input("distribution does not match the game");
        }
        for (idx, profile) in game.profiles().enumerate() {
            let w = d.weights()[idx];
            if w == 0.0 {
                continue;
            }
            base += w * table[idx];
            let own = profile[player];
            for (a, s) in dev.iter_mut().enumerate() {
                *s += w * table[idx + a * stride - own * stride];
            }
        }
        out.push(dev.iter().copied().fold(f64::NEG_INFINITY, f64::max) - base);
    }
    Ok(out)
}

/// Per-player `max_a v_ia(x) - u_i(x)`.
pub fn instantaneous_regret(game: &Game, x: &MixedProfile) -> Result<Vec<f64>> {
    let v = game.payoff_vectors(x)?;
    Ok(v.iter().zip(x.strategies()).map(|(vi, xi)| vi.max() - vi.dot(xi)).collect())
}

/// `E_zeta(y_n) = y_i,outside,n - y_i,inside,n`.
pub fn energy_series(traj: &Trajectory, dev: &DeviationVector) -> Result<Vec<f64>> {
    let m = *traj.n_actions().get(dev.player).ok_or_else(|| Error::Input("deviation player out of range".into()))?;
    if dev.inside >= m || dev.outside >= m || dev.inside == dev.outside {
        return input("deviation actions out of range or equal");
    }
    let off = traj.offset(dev.player);
    Ok((0..traj.len())
        .map(|k| {
            let y = traj.scores(k);
            y[off + dev.outside] - y[off + dev.inside]
        })
        .collect())
}

pub fn distance_series(traj: &Trajectory, face: &Face) -> Result<Vec<f64>> {
    check_face(traj, face)?;
    Ok((0..traj.len()).map(|k| flat_distance(traj, traj.profile(k), face)).collect())
}

/// Distance of the profile after the last update.
pub fn final_distance(traj: &Trajectory, face: &Face) -> Result<f64> {
    check_face(traj, face)?;
    Ok(flat_distance(traj, &traj.final_profile().flatten(), face))
}

fn flat_distance(traj: &Trajectory, x: &[f64], face: &Face) -> f64 {
    (0..traj.n_players())
        .map(|i| {
            let off = traj.offset(i);
            distance_raw(&x[off..off + traj.n_actions()[i]], face.support(i))
        })
        .sum()
}

/// Upper bound on the distance to `face` read off the scores alone:
/// `x_b <= phi(theta'(1) + y_b - y_a)` for every inside `a` and outside `b`.
pub fn score_distance_bound(kernel: Kernel, n_actions: &[usize], y: &[f64], face: &Face) -> f64 {
    let t1 = kernel.theta_prime_at_one();
    let mut off = 0;
    let mut total = 0.0;
    for (i, &m) in n_actions.iter().enumerate() {
        let yi = &y[off..off + m];
        let top_inside = face.support(i).iter().map(|&a| yi[a]).fold(f64::NEG_INFINITY, f64::max);
        for b in (0..m).filter(|&b| !face.contains_action(i, b)) {
            total += rate_function(kernel, t1 + yi[b] - top_inside);
        }
        off += m;
    }
    total
}

fn check_trajectory(traj: &Trajectory, game: &Game) -> Result<()> {
    if traj.n_actions() != game.n_actions() {
        return input("trajectory and game have different shapes");
    }
    if traj.is_empty() {
        return input("trajectory is empty");
    }
    Ok(())
}

fn check_face(traj: &Trajectory, face: &Face) -> Result<()> {
    if face.supports().len() != traj.n_players() {
        return input("face and trajectory have different player counts");
    }
    for (i, &m) in traj.n_actions().iter().enumerate() {
        if face.support(i).iter().any(|&a| a >= m) {
            return input(format!("face action of player {i} out of range"));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSetEstimate {
    pub points: Vec<MixedProfile>,
    pub window_fraction: f64,
    pub epsilon: f64,
    /// Number of trailing records scanned.
    pub window_len: usize,
}

/// Greedy `epsilon`-dedup (first seen kept, L1 distance) of the trailing window.
pub fn estimate_limit_set(traj: &Trajectory, window_fraction: f64, epsilon: f64) -> Result<LimitSetEstimate> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return input(format!("window fraction must lie in (0,1], got {window_fraction}"));
    }
    if !(epsilon > 0.0) {
        return input(format!("dedup radius must be positive, got {epsilon}"));
    }
    if traj.is_empty() {
        return input("trajectory is empty");
    }
    let window_len = ((traj.len() as f64 * window_fraction).ceil() as usize).clamp(1, traj.len());
    let mut kept: Vec<&[f64]> = Vec::new();
    for k in traj.len() - window_len..traj.len() {
        let x = traj.profile(k);
        let far = kept.iter().all(|p| p.iter().zip(x).map(|(a, b)| (a - b).abs()).sum::<f64>() >= epsilon);
        if far {
            kept.push(x);
        }
    }
    let n_actions = traj.n_actions();
    let points = kept
        .into_iter()
        .map(|x| {
            let mut at = 0;
            let vecs = n_actions
                .iter()
                .map(|&m| {
                    let v = x[at..at + m].to_vec();
                    at += m;
                    v
                })
                .collect();
            MixedProfile::from_vecs_unchecked(vecs)
        })
        .collect();
    Ok(LimitSetEstimate { points, window_fraction, epsilon, window_len })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitResilience {
    pub limit_set: LimitSetEstimate,
    pub report: ResilienceReport,
}

/// Resilience of the limit-set proxy.
pub fn check_limit_resilience(
    traj: &Trajectory,
    game: &Game,
    window_fraction: f64,
    epsilon: f64,
    tol: f64,
) -> Result<LimitResilience> {
    check_trajectory(traj, game)?;
    let limit_set = estimate_limit_set(traj, window_fraction, epsilon)?;
    let report = is_resilient(game, &limit_set.points, tol)?;
    Ok(LimitResilience { limit_set, report })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateModel {
    /// Distance reaches the face in finitely many steps.
    FiniteHit,
    /// `log dist` linear in `tau`.
    Geometric,
    /// `log dist` linear in `log(c + tau)`.
    InverseSquare,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub model: RateModel,
    /// First step `n` with distance at most `atol`.
    pub hit_index: Option<u64>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// Fitted time offset `c` of the power-law model.
    pub offset: Option<f64>,
    pub r_squared: Option<f64>,
    /// Slope predicted by the kernel for the power-law model.
    pub expected_slope: Option<f64>,
    /// Step indices `n` of the first and last fitted points.
    pub window: Option<(u64, u64)>,
    pub n_points: usize,
}

impl RateFit {
    fn hit(hit_index: Option<u64>) -> Self {
        Self {
            model: RateModel::FiniteHit,
            hit_index,
            slope: None,
            intercept: None,
            offset: None,
            r_squared: None,
            expected_slope: None,
            window: None,
            n_points: 0,
        }
    }
}

pub fn rate_model(kernel: Kernel) -> RateModel {
    match kernel {
        Kernel::Entropic => RateModel::Geometric,
        k if k.is_steep() => RateModel::InverseSquare,
        _ => RateModel::FiniteHit,
    }
}

/// Fits the kernel's rate law to the distance from `traj` to `face`.
pub fn fit_rate(traj: &Trajectory, face: &Face, kernel: Kernel, atol: f64, ceiling: f64) -> Result<RateFit> {
    let dist = distance_series(traj, face)?;
    fit_rate_series(&dist, traj.taus(), kernel, atol, ceiling)
}

/// Rate fit on a raw series: `dist[k]` and `tau[k]` belong to step `n = k + 1`.
pub fn fit_rate_series(dist: &[f64], tau: &[f64], kernel: Kernel, atol: f64, ceiling: f64) -> Result<RateFit> {
    if dist.len() != tau.len() {
        return input("distance and time series differ in length");
    }
    if !(atol > 0.0) || !(ceiling > atol) {
        return input("need 0 < atol < ceiling");
    }
    let model = rate_model(kernel);
    if model == RateModel::FiniteHit {
        return Ok(RateFit::hit(dist.iter().position(|&d| d <= atol).map(|k| k as u64 + 1)));
    }
    let idx: Vec<usize> = (0..dist.len()).filter(|&k| dist[k] > atol && dist[k] < ceiling).collect();
    if idx.len() < MIN_FIT_POINTS {
        return Err(Error::Diagnostic(format!(
            "{} points inside the fit window, at least {MIN_FIT_POINTS} required",
            idx.len()
        )));
    }
    let ys: Vec<f64> = idx.iter().map(|&k| dist[k].ln()).collect();
    let ts: Vec<f64> = idx.iter().map(|&k| tau[k]).collect();
    let window = Some((idx[0] as u64 + 1, *idx.last().unwrap() as u64 + 1));
    let hit_index = dist.iter().position(|&d| d <= atol).map(|k| k as u64 + 1);
    match model {
        RateModel::Geometric => {
            let (slope, intercept, r2) = ols(&ts, &ys);
            Ok(RateFit {
                model,
                hit_index,
                slope: Some(slope),
                intercept: Some(intercept),
                offset: None,
                r_squared: Some(r2),
                expected_slope: None,
                window,
                n_points: idx.len(),
            })
        }
        RateModel::InverseSquare => {
            let Kernel::Power(rho) = kernel else { unreachable!("steep non-entropic kernels are power kernels") };
            let c = fit_offset(&ts, &ys);
            let xs: Vec<f64> = ts.iter().map(|t| (c + t).ln()).collect();
            let (slope, intercept, r2) = ols(&xs, &ys);
            Ok(RateFit {
                model,
                hit_index,
                slope: Some(slope),
                intercept: Some(intercept),
                offset: Some(c),
                r_squared: Some(r2),
                expected_slope: Some(-1.0 / (1.0 - rho)),
                window,
                n_points: idx.len(),
            })
        }
        RateModel::FiniteHit => unreachable!(),
    }
}

/// Least squares `y = a x + b`; returns `(a, b, R^2)`.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, intercept, r2)
}

/// Offset `c` maximizing the R^2 of `log dist` against `log(c + tau)`;
/// coarse log-spaced scan followed by golden-section refinement.
fn fit_offset(ts: &[f64], ys: &[f64]) -> f64 {
    let t_min = ts.iter().copied().fold(f64::INFINITY, f64::min);
    let t_max = ts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = t_max.abs().max(1.0);
    // c = s - t_min with s > 0 keeps every log argument positive.
    let score = |ls: f64| {
        let c = ls.exp() - t_min;
        let xs: Vec<f64> = ts.iter().map(|t| (c + t).ln()).collect();
        ols(&xs, ys).2
    };
    let (lo, hi) = ((scale * 1e-8).ln(), (scale * 1e6).ln());
    let grid = 400;
    let step = (hi - lo) / grid as f64;
    let mut best = (lo, f64::NEG_INFINITY);
    for k in 0..=grid {
        let ls = lo + step * k as f64;
        let s = score(ls);
        if s > best.1 {
            best = (ls, s);
        }
    }
    let (mut a, mut b) = (best.0 - step, best.0 + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let c1 = b - g * (b - a);
        let c2 = a + g * (b - a);
        if score(c1) >= score(c2) {
            b = c2;
        } else {
            a = c1;
        }
    }
    (0.5 * (a + b)).exp() - t_min
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;
    use crate::game::MixedStrategy;
    use crate::learning::{run, FeedbackKind, Schedule};

    fn synthetic(taus: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
        taus.iter().map(|&t| f(t)).collect()
    }

    #[test]
    fn geometric_fit_recovers_rate() {
        let taus: Vec<f64> = (1..=200).map(|n| 0.1 * n as f64).collect();
        let d = synthetic(&taus, |t| (-0.3 * t).exp());
        let fit = fit_rate_series(&d, &taus, Kernel::Entropic, 1e-12, 0.5).unwrap();
        assert_eq!(fit.model, RateModel::Geometric);
        assert!((fit.slope.unwrap() + 0.3).abs() < 1e-6);
        assert!(fit.r_squared.unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn power_law_fit_recovers_exponent() {
        let taus: Vec<f64> = (1..=2000).map(|n| 0.05 * n as f64).collect();
        let d = synthetic(&taus, |t| 1.0 / ((2.0 + t) * (2.0 + t)));
        let fit = fit_rate_series(&d, &taus, Kernel::tsallis(), 1e-12, 0.5).unwrap();
        assert_eq!(fit.model, RateModel::InverseSquare);
        assert!((fit.slope.unwrap() + 2.0).abs() < 1e-3, "{fit:?}");
        assert!((fit.offset.unwrap() - 2.0).abs() < 1e-2, "{fit:?}");
        assert_eq!(fit.expected_slope, Some(-2.0));
    }

    #[test]
    fn finite_hit_and_too_few_points() {
        let taus = [1.0, 2.0, 3.0, 4.0];
        let fit = fit_rate_series(&[0.3, 0.1, 0.0, 0.0], &taus, Kernel::Quadratic, 1e-12, 0.5).unwrap();
        assert_eq!(fit.hit_index, Some(3));
        let fit = fit_rate_series(&[0.3, 0.1, 0.1, 0.1], &taus, Kernel::Quadratic, 1e-12, 0.5).unwrap();
        assert_eq!(fit.hit_index, None);
        assert!(matches!(
            fit_rate_series(&[0.3, 0.1, 0.05, 0.01], &taus, Kernel::Entropic, 1e-12, 0.5),
            Err(Error::Diagnostic(_))
        ));
    }

    #[test]
    fn regret_examples() {
        let g = builtin::constant(vec![2, 3], 0.4);
        let t = run(&g, Kernel::Entropic, &FeedbackKind::Full, &Schedule::constant(0.1).unwrap(), 20, &[vec![0.3, 0.0], vec![0.0; 3]], 0).unwrap();
        assert!(regret(&t, &g, 0, RegretMode::Expected).unwrap().iter().all(|r| r.abs() < 1e-12));
        assert!(regret(&t, &g, 0, RegretMode::Realized).is_err());

        let vz = builtin::vz4x4();
        let t = run(&vz, Kernel::Entropic, &FeedbackKind::Full, &Schedule::constant(0.1).unwrap(), 1, &[vec![0.3, 0.0, 0.1, 0.0], vec![0.0; 4]], 0)
            .unwrap();
        let r = regret(&t, &vz, 0, RegretMode::Expected).unwrap();
        let inst = instantaneous_regret(&vz, &t.mixed_profile(0)).unwrap();
        assert!((r[0] - inst[0]).abs() < 1e-15 && r[0] >= 0.0);
    }

    #[test]
    fn replay_of_correlated_twins() {
        let vz = builtin::vz4x4();
        let d = CorrelatedDistribution::from_atoms(&vz, &[(vec![1, 1], 0.5), (vec![3, 3], 0.5)]).unwrap();
        let r = regret_replay(&vz, 0, &vec![d; 30]).unwrap();
        for (n, v) in r.iter().enumerate() {
            assert!((v + (n + 1) as f64 / 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_and_distance_examples() {
        let g = builtin::constant(vec![2, 2], 1.0);
        let t = run(&g, Kernel::Entropic, &FeedbackKind::Full, &Schedule::constant(0.5).unwrap(), 5, &[vec![0.0; 2], vec![0.0; 2]], 0).unwrap();
        let e = energy_series(&t, &DeviationVector { player: 0, inside: 0, outside: 1 }).unwrap();
        assert_eq!(e[0], 0.0);
        assert!(e.windows(2).all(|w| w[0] == w[1]));
        let full = Face::full(&g);
        assert!(distance_series(&t, &full).unwrap().iter().all(|&d| d == 0.0));
        let corner = Face::new(vec![vec![0], vec![0]]).unwrap();
        assert!(distance_series(&t, &corner).unwrap().iter().all(|&d| (d - 1.0).abs() < 1e-15));
        assert!(energy_series(&t, &DeviationVector { player: 2, inside: 0, outside: 1 }).is_err());
        assert!(distance_series(&t, &Face::new(vec![vec![0]]).unwrap()).is_err());
    }

    #[test]
    fn limit_set_examples() {
        let x = MixedProfile::from_vecs(vec![vec![1.0, 0.0]]).unwrap();
        let t = Trajectory::frozen(&x, Kernel::Entropic, 0.1, 50);
        let est = estimate_limit_set(&t, 0.1, 0.02).unwrap();
        assert_eq!(est.points, vec![x]);
        assert_eq!(est.window_len, 5);

        // Alternating between two points 2 eps apart keeps both.
        let a = MixedProfile::from_vecs(vec![vec![0.5, 0.5]]).unwrap();
        let b = MixedProfile::from_vecs(vec![vec![0.52, 0.48]]).unwrap();
        let mut t = Trajectory::new(vec![2], Kernel::Entropic, false);
        for n in 1..=10u64 {
            let p = if n % 2 == 0 { &a } else { &b };
            t.push(crate::learning::StepRecord {
                n,
                gamma: 1.0,
                tau: n as f64,
                scores: vec![vec![0.0; 2]],
                profile: vec![p.strategy(0).probs().to_vec()],
                realized: None,
                signal: vec![vec![0.0; 2]],
                bias: vec![vec![0.0; 2]],
                noise: vec![vec![0.0; 2]],
            });
        }
        assert_eq!(estimate_limit_set(&t, 1.0, 0.02).unwrap().points.len(), 2);
        assert!(estimate_limit_set(&t, 0.0, 0.02).is_err());
        assert!(estimate_limit_set(&t, 0.5, 0.0).is_err());
    }

    #[test]
    fn frozen_nash_is_resilient() {
        let vz = builtin::vz4x4();
        for p in vz.pure_nash(false, 0.0) {
            let t = Trajectory::frozen(&MixedProfile::pure(&vz, &p).unwrap(), Kernel::Entropic, 0.1, 20);
            let r = check_limit_resilience(&t, &vz, 0.1, 0.02, 0.0).unwrap();
            assert!(r.report.resilient);
        }
        let twin = MixedProfile::new(vec![MixedStrategy::pure(4, 1), MixedStrategy::pure(4, 1)]);
        let t = Trajectory::frozen(&twin, Kernel::Entropic, 0.1, 20);
        let r = check_limit_resilience(&t, &vz, 0.1, 0.02, 0.0).unwrap();
        assert!(!r.report.resilient && r.report.worst_gap() < 0.0);
    }

    #[test]
    fn score_bound_dominates_distance() {
        let g = builtin::parity();
        let face = Face::new(vec![vec![0], vec![0], vec![0]]).unwrap();
        for kernel in [Kernel::Quadratic, Kernel::Entropic, Kernel::tsallis()] {
            let t = run(&g, kernel, &FeedbackKind::Full, &Schedule::constant(0.2).unwrap(), 200, &vec![vec![0.8, 0.0]; 3], 0).unwrap();
            let d = distance_series(&t, &face).unwrap();
            for (k, dk) in d.iter().enumerate() {
                let bound = score_distance_bound(kernel, t.n_actions(), t.scores(k), &face);
                assert!(*dk <= bound + 1e-12, "{kernel} step {k}: {dk} > {bound}");
            }
        }
    }
}
