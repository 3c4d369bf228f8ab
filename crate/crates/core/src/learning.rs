//! Regularized learning: scores accumulate surrogate payoff signals,
//! `y_{n+1} = y_n + gamma_n vhat_n`, and play follows `x_n = Q(y_n)`.

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::game::{Game, MixedProfile, MixedStrategy, PayoffVector};
use crate::regularizer::{choice_map_into, Kernel};
use crate::rng;

/// Damping of the clairvoyant fixed-point iteration.
pub const CLAIRVOYANT_DAMPING: f64 = 0.5;

/// `base / n^exponent` for `n = 1, 2, ...`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub base: f64,
    pub exponent: f64,
}

impl Schedule {
    pub fn new(base: f64, exponent: f64) -> Result<Self> {
        let s = Self { base, exponent };
        s.validate()?;
        Ok(s)
    }

    pub fn constant(base: f64) -> Result<Self> {
        Self::new(base, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base > 0.0 && self.base.is_finite()) {
            return input(format!("schedule base must be positive and finite, got {}", self.base));
        }
        if !(0.0..=1.0).contains(&self.exponent) {
            return input(format!("schedule exponent must lie in [0,1], got {}", self.exponent));
        }
        Ok(())
    }

    pub fn value(&self, n: u64) -> f64 {
        if self.exponent == 0.0 {
            self.base
        } else {
            self.base / (n.max(1) as f64).powf(self.exponent)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeedbackKind {
    Full,
    Optimistic,
    MirrorProx,
    Clairvoyant {
        #[serde(default = "default_tol")]
        tol: f64,
        #[serde(default = "default_max_iters")]
        max_iters: usize,
    },
    Bandit {
        exploration: Schedule,
    },
}

fn default_tol() -> f64 {
    1e-10
}

fn default_max_iters() -> usize {
    1000
}

impl FeedbackKind {
    pub fn clairvoyant() -> Self {
        Self::Clairvoyant { tol: default_tol(), max_iters: default_max_iters() }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Full => "full",
            Self::Optimistic => "optimistic",
            Self::MirrorProx => "mirror_prox",
            Self::Clairvoyant { .. } => "clairvoyant",
            Self::Bandit { .. } => "bandit",
        }
    }

    pub fn is_bandit(&self) -> bool {
        matches!(self, Self::Bandit { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Clairvoyant { tol, max_iters } => {
                if !(*tol > 0.0) || *max_iters == 0 {
                    return input("clairvoyant tolerance and iteration cap must be positive");
                }
            }
            Self::Bandit { exploration } => {
                exploration.validate()?;
                if exploration.base > 1.0 {
                    return input(format!("exploration must stay within (0,1], base is {}", exploration.base));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Scores, the profile they induce, and the bookkeeping needed by the feedback models.
#[derive(Debug, Clone)]
pub struct LearnerState {
    scores: Vec<Vec<f64>>,
    current: Vec<Vec<f64>>,
    previous_payoffs: Option<Vec<Vec<f64>>>,
    step_index: u64,
    seed: u64,
    tau: f64,
    tau_carry: f64,
}

/// Everything observed at step `n`, taken before the update.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub n: u64,
    pub gamma: f64,
    pub tau: f64,
    pub scores: Vec<Vec<f64>>,
    pub profile: Vec<Vec<f64>>,
    pub realized: Option<Vec<usize>>,
    pub signal: Vec<Vec<f64>>,
    pub bias: Vec<Vec<f64>>,
    pub noise: Vec<Vec<f64>>,
}

impl LearnerState {
    pub fn new(game: &Game, kernel: Kernel, y0: &[Vec<f64>], seed: u64) -> Result<Self> {
        if y0.len() != game.n_players() {
            return input(format!("initial scores for {} players, game has {}", y0.len(), game.n_players()));
        }
        for (k, (y, &m)) in y0.iter().zip(game.n_actions()).enumerate() {
            if y.len() != m {
                return input(format!("initial scores of player {k} have {} entries, expected {m}", y.len()));
            }
        }
        let mut current: Vec<Vec<f64>> = game.n_actions().iter().map(|&m| vec![0.0; m]).collect();
        for (y, x) in y0.iter().zip(current.iter_mut()) {
            choice_map_into(kernel, y, x)?;
        }
        Ok(Self {
            scores: y0.to_vec(),
            current,
            previous_payoffs: None,
            step_index: 1,
            seed,
            tau: 0.0,
            tau_carry: 0.0,
        })
    }

    pub fn scores(&self) -> &[Vec<f64>] {
        &self.scores
    }

    pub fn current_profile(&self) -> MixedProfile {
        MixedProfile::from_vecs_unchecked(self.current.clone())
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    /// `tau_{n-1}`, the effective time elapsed before the current step.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    fn add_tau(&mut self, gamma: f64) {
        // Kahan summation.
        let y = gamma - self.tau_carry;
        let t = self.tau + y;
        self.tau_carry = (t - self.tau) - y;
        self.tau = t;
    }

    pub fn step(&mut self, game: &Game, kernel: Kernel, feedback: &FeedbackKind, schedule: &Schedule) -> Result<StepRecord> {
        let n = self.step_index;
        let gamma = schedule.value(n);
        let v_now = game.payoff_vectors_raw(&self.current);
        let zeros: Vec<Vec<f64>> = v_now.iter().map(|v| vec![0.0; v.len()]).collect();
        let mut realized = None;
        let (signal, bias, noise) = match feedback {
            FeedbackKind::Full => (v_now.clone(), zeros.clone(), zeros),
            FeedbackKind::Optimistic => {
                let prev = self.previous_payoffs.take().unwrap_or_else(|| v_now.clone());
                let signal = combine(&v_now, &prev, 2.0, -1.0);
                let bias = combine(&v_now, &prev, 1.0, -1.0);
                (signal, bias, zeros)
            }
            FeedbackKind::MirrorProx => {
                let lead: Vec<Vec<f64>> = combine(&self.scores, &v_now, 1.0, gamma);
                let x_lead = map_all(kernel, &lead)?;
                let signal = game.payoff_vectors_raw(&x_lead);
                let bias = combine(&signal, &v_now, 1.0, -1.0);
                (signal, bias, zeros)
            }
            FeedbackKind::Clairvoyant { tol, max_iters } => {
                let x_fix = self.clairvoyant_point(game, kernel, gamma, *tol, *max_iters)?;
                let signal = game.payoff_vectors_raw(&x_fix);
                let bias = combine(&signal, &v_now, 1.0, -1.0);
                (signal, bias, zeros)
            }
            FeedbackKind::Bandit { exploration } => {
                let delta = exploration.value(n);
                let x_hat: Vec<Vec<f64>> = self.current.iter().map(|x| explore(x, delta)).collect();
                let profile: Vec<usize> =
                    x_hat.iter().enumerate().map(|(k, x)| sample(x, rng::uniform(self.seed, k as u64, n))).collect();
                let signal = iwe_raw(game, &x_hat, &profile)?;
                let mean = game.payoff_vectors_raw(&x_hat);
                let bias = combine(&mean, &v_now, 1.0, -1.0);
                let noise = combine(&signal, &mean, 1.0, -1.0);
                realized = Some(profile);
                (signal, bias, noise)
            }
        };
        self.add_tau(gamma);
        let record = StepRecord {
            n,
            gamma,
            tau: self.tau,
            scores: self.scores.clone(),
            profile: self.current.clone(),
            realized,
            signal,
            bias,
            noise,
        };
        for (y, s) in self.scores.iter_mut().zip(&record.signal) {
            for (a, b) in y.iter_mut().zip(s) {
                *a += gamma * b;
            }
        }
        for (y, x) in self.scores.iter().zip(self.current.iter_mut()) {
            choice_map_into(kernel, y, x)?;
        }
        if matches!(feedback, FeedbackKind::Optimistic) {
            self.previous_payoffs = Some(v_now);
        }
        self.step_index += 1;
        Ok(record)
    }

    /// Solves `x = Q(y_n + gamma v(x))` by damped fixed-point iteration.
    fn clairvoyant_point(&self, game: &Game, kernel: Kernel, gamma: f64, tol: f64, max_iters: usize) -> Result<Vec<Vec<f64>>> {
        let mut x = self.current.clone();
        let mut residual = f64::INFINITY;
        for _ in 0..max_iters {
            let v = game.payoff_vectors_raw(&x);
            let target = map_all(kernel, &combine(&self.scores, &v, 1.0, gamma))?;
            residual = x
                .iter()
                .flatten()
                .zip(target.iter().flatten())
                .fold(0.0, |m, (a, b)| m.max((a - b).abs()));
            if residual <= tol {
                return Ok(target);
            }
            for (xs, ts) in x.iter_mut().zip(&target) {
                for (a, b) in xs.iter_mut().zip(ts) {
                    *a = (1.0 - CLAIRVOYANT_DAMPING) * *a + CLAIRVOYANT_DAMPING * b;
                }
            }
        }
        Err(Error::Numeric { message: format!("clairvoyant fixed point not reached in {max_iters} iterations"), residual })
    }
}

fn combine(a: &[Vec<f64>], b: &[Vec<f64>], ca: f64, cb: f64) -> Vec<Vec<f64>> {
    a.iter().zip(b).map(|(u, v)| u.iter().zip(v).map(|(p, q)| ca * p + cb * q).collect()).collect()
}

fn map_all(kernel: Kernel, y: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    y.iter()
        .map(|s| {
            let mut out = vec![0.0; s.len()];
            choice_map_into(kernel, s, &mut out)?;
            Ok(out)
        })
        .collect()
}

fn explore(x: &[f64], delta: f64) -> Vec<f64> {
    let u = delta / x.len() as f64;
    x.iter().map(|p| (1.0 - delta) * p + u).collect()
}

/// Inverse-CDF draw; never returns a zero-probability action.
fn sample(x: &[f64], u: f64) -> usize {
    let mut cum = 0.0;
    let mut last = 0;
    for (a, &p) in x.iter().enumerate() {
        if p > 0.0 {
            cum += p;
            last = a;
            if u < cum {
                return a;
            }
        }
    }
    last
}

fn iwe_raw(game: &Game, x_hat: &[Vec<f64>], realized: &[usize]) -> Result<Vec<Vec<f64>>> {
    let idx = game.profile_index(realized)?;
    let mut out: Vec<Vec<f64>> = game.n_actions().iter().map(|&m| vec![0.0; m]).collect();
    for (k, (&a, x)) in realized.iter().zip(x_hat).enumerate() {
        if !(x[a] > 0.0) {
            return input(format!("player {k} realized action {a} with zero sampling probability"));
        }
        out[k][a] = game.payoff_table(k)[idx] / x[a];
    }
    Ok(out)
}

/// Importance-weighted payoff estimate from one realized pure profile.
pub fn iwe(game: &Game, x_hat: &MixedProfile, realized: &[usize]) -> Result<Vec<PayoffVector>> {
    if x_hat.n_players() != game.n_players() || x_hat.strategies().iter().zip(game.n_actions()).any(|(s, &m)| s.len() != m) {
        return input("sampling profile does not match the game");
    }
    let x: Vec<Vec<f64>> = x_hat.strategies().iter().map(|s| s.probs().to_vec()).collect();
    Ok(iwe_raw(game, &x, realized)?.into_iter().map(PayoffVector).collect())
}

/// `(1 - delta) x_i + delta * uniform` for every player.
pub fn explored_profile(x: &MixedProfile, delta: f64) -> Result<MixedProfile> {
    if !(0.0..=1.0).contains(&delta) {
        return input(format!("exploration parameter must lie in [0,1], got {delta}"));
    }
    Ok(MixedProfile::new(
        x.strategies().iter().map(|s| MixedStrategy::new_unchecked(explore(s.probs(), delta))).collect(),
    ))
}

/// Bound `L` with `||v(x) - v(x')||_inf <= L sum_j ||x_j - x'_j||_1`: half the
/// largest swing of any payoff entry when a single opponent changes action.
pub fn lipschitz_estimate(game: &Game) -> f64 {
    let n = game.n_players();
    let mut best: f64 = 0.0;
    for i in 0..n {
        let table = game.payoff_table(i);
        for j in (0..n).filter(|&j| j != i) {
            let stride = game.stride(j);
            let m = game.n_actions()[j];
            for (idx, profile) in game.profiles().enumerate() {
                if profile[j] != 0 {
                    continue;
                }
                let (lo, hi) = (0..m)
                    .map(|b| table[idx + b * stride])
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), u| (lo.min(u), hi.max(u)));
                best = best.max(0.5 * (hi - lo));
            }
        }
    }
    best
}

/// A recorded run: record `k` holds the state of step `n = k + 1` before its update.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    n_actions: Vec<usize>,
    kernel: Kernel,
    bandit: bool,
    gamma: Vec<f64>,
    tau: Vec<f64>,
    scores: Vec<f64>,
    profiles: Vec<f64>,
    realized: Vec<i64>,
    signals: Vec<f64>,
    bias: Vec<f64>,
    noise: Vec<f64>,
    final_scores: Vec<f64>,
    final_profile: Vec<f64>,
}

impl Trajectory {
    pub fn new(n_actions: Vec<usize>, kernel: Kernel, bandit: bool) -> Self {
        Self {
            n_actions,
            kernel,
            bandit,
            gamma: Vec::new(),
            tau: Vec::new(),
            scores: Vec::new(),
            profiles: Vec::new(),
            realized: Vec::new(),
            signals: Vec::new(),
            bias: Vec::new(),
            noise: Vec::new(),
            final_scores: Vec::new(),
            final_profile: Vec::new(),
        }
    }

    /// A trajectory that plays `profile` at every step with zero signals.
    pub fn frozen(profile: &MixedProfile, kernel: Kernel, gamma: f64, horizon: usize) -> Self {
        let n_actions: Vec<usize> = profile.strategies().iter().map(MixedStrategy::len).collect();
        let x: Vec<Vec<f64>> = profile.strategies().iter().map(|s| s.probs().to_vec()).collect();
        let zeros: Vec<Vec<f64>> = n_actions.iter().map(|&m| vec![0.0; m]).collect();
        let mut t = Self::new(n_actions, kernel, false);
        for n in 1..=horizon as u64 {
            t.push(StepRecord {
                n,
                gamma,
                tau: gamma * n as f64,
                scores: zeros.clone(),
                profile: x.clone(),
                realized: None,
                signal: zeros.clone(),
                bias: zeros.clone(),
                noise: zeros.clone(),
            });
        }
        t.final_profile = profile.flatten();
        t.final_scores = vec![0.0; t.total_actions()];
        t
    }

    pub fn push(&mut self, r: StepRecord) {
        self.gamma.push(r.gamma);
        self.tau.push(r.tau);
        self.scores.extend(r.scores.iter().flatten());
        self.profiles.extend(r.profile.iter().flatten());
        match &r.realized {
            Some(p) => self.realized.extend(p.iter().map(|&a| a as i64)),
            None => self.realized.extend(std::iter::repeat_n(-1, self.n_actions.len())),
        }
        self.signals.extend(r.signal.iter().flatten());
        self.bias.extend(r.bias.iter().flatten());
        self.noise.extend(r.noise.iter().flatten());
    }

    fn set_final(&mut self, state: &LearnerState) {
        self.final_scores = state.scores.iter().flatten().copied().collect();
        self.final_profile = state.current.iter().flatten().copied().collect();
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn n_actions(&self) -> &[usize] {
        &self.n_actions
    }

    pub fn n_players(&self) -> usize {
        self.n_actions.len()
    }

    pub fn total_actions(&self) -> usize {
        self.n_actions.iter().sum()
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn is_bandit(&self) -> bool {
        self.bandit
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gamma
    }

    pub fn taus(&self) -> &[f64] {
        &self.tau
    }

    fn row<'a>(&self, data: &'a [f64], k: usize) -> &'a [f64] {
        let w = self.total_actions();
        &data[k * w..(k + 1) * w]
    }

    /// Flattened `y_n` at record `k`.
    pub fn scores(&self, k: usize) -> &[f64] {
        self.row(&self.scores, k)
    }

    /// Flattened `x_n` at record `k`.
    pub fn profile(&self, k: usize) -> &[f64] {
        self.row(&self.profiles, k)
    }

    pub fn mixed_profile(&self, k: usize) -> MixedProfile {
        split(&self.n_actions, self.profile(k))
    }

    pub fn signal(&self, k: usize) -> &[f64] {
        self.row(&self.signals, k)
    }

    pub fn bias(&self, k: usize) -> &[f64] {
        self.row(&self.bias, k)
    }

    pub fn noise(&self, k: usize) -> &[f64] {
        self.row(&self.noise, k)
    }

    /// Realized pure profile; `-1` entries for non-bandit runs.
    pub fn realized(&self, k: usize) -> &[i64] {
        let n = self.n_players();
        &self.realized[k * n..(k + 1) * n]
    }

    /// Scores after the last update.
    pub fn final_scores(&self) -> &[f64] {
        &self.final_scores
    }

    pub fn final_profile(&self) -> MixedProfile {
        split(&self.n_actions, &self.final_profile)
    }

    /// Offset of player `i`'s block in flattened rows.
    pub fn offset(&self, player: usize) -> usize {
        self.n_actions[..player].iter().sum()
    }
}

fn split(n_actions: &[usize], flat: &[f64]) -> MixedProfile {
    let mut out = Vec::with_capacity(n_actions.len());
    let mut at = 0;
    for &m in n_actions {
        out.push(flat[at..at + m].to_vec());
        at += m;
    }
    MixedProfile::from_vecs_unchecked(out)
}

/// Runs `horizon` steps from scores `y0`.
pub fn run(
    game: &Game,
    kernel: Kernel,
    feedback: &FeedbackKind,
    schedule: &Schedule,
    horizon: usize,
    y0: &[Vec<f64>],
    seed: u64,
) -> Result<Trajectory> {
    if horizon == 0 {
        return input("horizon must be at least 1");
    }
    schedule.validate()?;
    feedback.validate()?;
    let mut state = LearnerState::new(game, kernel, y0, seed)?;
    let mut traj = Trajectory::new(game.n_actions().to_vec(), kernel, feedback.is_bandit());
    for _ in 0..horizon {
        let r = state.step(game, kernel, feedback, schedule)?;
        traj.push(r);
    }
    traj.set_final(&state);
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;
    use crate::regularizer::choice_map;

    fn one_player(payoffs: Vec<f64>) -> Game {
        let m = payoffs.len();
        Game::new(vec![m], vec![payoffs]).unwrap()
    }

    #[test]
    fn schedule_values() {
        let s = Schedule::new(0.2, 0.5).unwrap();
        assert_eq!(s.value(1), 0.2);
        assert!((s.value(4) - 0.1).abs() < 1e-15);
        assert_eq!(Schedule::constant(0.3).unwrap().value(1000), 0.3);
        assert!(Schedule::new(0.0, 0.5).is_err());
        assert!(Schedule::new(1.0, 1.5).is_err());
        assert!(FeedbackKind::Bandit { exploration: Schedule::new(1.5, 0.1).unwrap() }.validate().is_err());
    }

    #[test]
    fn feedback_json_shape() {
        let f: FeedbackKind = serde_json::from_str(r#"{"kind":"bandit","exploration":{"base":0.1,"exponent":0.15}}"#).unwrap();
        assert!(f.is_bandit());
        let c: FeedbackKind = serde_json::from_str(r#"{"kind":"clairvoyant"}"#).unwrap();
        assert_eq!(c, FeedbackKind::clairvoyant());
        assert_eq!(serde_json::to_string(&FeedbackKind::MirrorProx).unwrap(), r#"{"kind":"mirror_prox"}"#);
    }

    #[test]
    fn one_step_logit() {
        let g = one_player(vec![1.0, 0.0]);
        let t = run(&g, Kernel::Entropic, &FeedbackKind::Full, &Schedule::constant(1.0).unwrap(), 1, &[vec![0.0, 0.0]], 0)
            .unwrap();
        assert_eq!(t.final_scores(), &[1.0, 0.0]);
        let e = std::f64::consts::E;
        let x = t.final_profile();
        assert!((x.strategy(0).probs()[0] - e / (1.0 + e)).abs() < 1e-15);
        assert_eq!(t.taus(), &[1.0]);
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn optimistic_first_step_is_full() {
        let g = builtin::vz4x4();
        let y0 = vec![vec![0.1, 0.0, -0.2, 0.3], vec![0.0; 4]];
        let s = Schedule::constant(0.1).unwrap();
        let full = run(&g, Kernel::Entropic, &FeedbackKind::Full, &s, 1, &y0, 0).unwrap();
        let opt = run(&g, Kernel::Entropic, &FeedbackKind::Optimistic, &s, 1, &y0, 0).unwrap();
        assert_eq!(full.final_scores(), opt.final_scores());
        assert!(opt.bias(0).iter().all(|&b| b == 0.0));
    }

    #[test]
    fn explored_profile_examples() {
        let x = MixedProfile::from_vecs(vec![vec![1.0, 0.0]]).unwrap();
        assert_eq!(explored_profile(&x, 0.0).unwrap(), x);
        let y = explored_profile(&x, 0.2).unwrap();
        assert!((y.strategy(0).probs()[0] - 0.9).abs() < 1e-15 && (y.strategy(0).probs()[1] - 0.1).abs() < 1e-15);
        assert_eq!(explored_profile(&x, 1.0).unwrap().strategy(0).probs(), &[0.5, 0.5]);
        assert!(explored_profile(&x, 1.5).is_err());
    }

    #[test]
    fn iwe_examples() {
        let g = one_player(vec![0.7, 0.0]);
        let half = MixedProfile::from_vecs(vec![vec![0.5, 0.5]]).unwrap();
        assert_eq!(iwe(&g, &half, &[0]).unwrap()[0].values(), &[1.4, 0.0]);
        let pure = MixedProfile::from_vecs(vec![vec![1.0, 0.0]]).unwrap();
        assert_eq!(iwe(&g, &pure, &[0]).unwrap()[0].values(), &[0.7, 0.0]);
        assert!(iwe(&g, &pure, &[1]).is_err());
    }

    #[test]
    fn iwe_is_unbiased_by_enumeration() {
        let g = builtin::matching_pennies_2p();
        let x = MixedProfile::from_vecs(vec![vec![0.3, 0.7], vec![0.6, 0.4]]).unwrap();
        let mut mean = vec![vec![0.0; 2]; 2];
        for p in g.profiles() {
            let w = x.strategy(0).probs()[p[0]] * x.strategy(1).probs()[p[1]];
            for (k, v) in iwe(&g, &x, &p).unwrap().iter().enumerate() {
                for a in 0..2 {
                    mean[k][a] += w * v.values()[a];
                }
            }
        }
        let v = g.payoff_vectors(&x).unwrap();
        for k in 0..2 {
            for a in 0..2 {
                assert!((mean[k][a] - v[k].values()[a]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn lipschitz_examples() {
        assert_eq!(lipschitz_estimate(&builtin::constant(vec![3, 2], 0.0)), 0.0);
        let vz = builtin::vz4x4();
        assert!(lipschitz_estimate(&vz) <= 2.0 * vz.payoff_bound());
        // Matching pennies: u swings between -1 and 1 when the opponent switches.
        assert_eq!(lipschitz_estimate(&builtin::matching_pennies_2p()), 1.0);
    }

    #[test]
    fn records_hold_pre_update_state() {
        let g = builtin::parity();
        let y0 = vec![vec![0.5, 0.0]; 3];
        let s = Schedule::new(0.2, 0.5).unwrap();
        let t = run(&g, Kernel::Entropic, &FeedbackKind::Full, &s, 5, &y0, 0).unwrap();
        assert_eq!(t.scores(0), &[0.5, 0.0, 0.5, 0.0, 0.5, 0.0]);
        for k in 0..5 {
            let y = t.scores(k);
            let x = t.profile(k);
            for i in 0..3 {
                let q = choice_map(Kernel::Entropic, &y[2 * i..2 * i + 2]).unwrap();
                assert!((q.probs()[0] - x[2 * i]).abs() < 1e-15);
            }
            if k + 1 < 5 {
                for j in 0..6 {
                    let expect = y[j] + t.gammas()[k] * t.signal(k)[j];
                    assert!((t.scores(k + 1)[j] - expect).abs() < 1e-15);
                }
            }
        }
        assert!(t.taus().windows(2).all(|w| w[1] > w[0]));
        assert!(t.realized(0).iter().all(|&a| a == -1));
    }

    #[test]
    fn bandit_runs_are_reproducible() {
        let g = builtin::parity();
        let f = FeedbackKind::Bandit { exploration: Schedule::new(0.1, 0.15).unwrap() };
        let s = Schedule::new(0.2, 0.5).unwrap();
        let y0 = vec![vec![0.0; 2]; 3];
        let a = run(&g, Kernel::Entropic, &f, &s, 200, &y0, 42).unwrap();
        let b = run(&g, Kernel::Entropic, &f, &s, 200, &y0, 42).unwrap();
        let c = run(&g, Kernel::Entropic, &f, &s, 200, &y0, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.realized(10).iter().all(|&r| r == 0 || r == 1));
    }

    #[test]
    fn clairvoyant_reports_nonconvergence() {
        let g = builtin::matching_pennies_2p();
        let f = FeedbackKind::Clairvoyant { tol: 1e-14, max_iters: 2 };
        let err = run(&g, Kernel::Entropic, &f, &Schedule::constant(5.0).unwrap(), 3, &[vec![1.0, 0.0], vec![0.0, 0.5]], 0)
            .unwrap_err();
        assert!(matches!(err, Error::Numeric { residual, .. } if residual > 0.0));
    }

    #[test]
    fn rejects_bad_runs() {
        let g = builtin::parity();
        let s = Schedule::constant(0.1).unwrap();
        assert!(run(&g, Kernel::Entropic, &FeedbackKind::Full, &s, 0, &vec![vec![0.0; 2]; 3], 0).is_err());
        assert!(run(&g, Kernel::Entropic, &FeedbackKind::Full, &s, 1, &vec![vec![0.0; 2]; 2], 0).is_err());
        assert!(run(&g, Kernel::Entropic, &FeedbackKind::Full, &s, 1, &[vec![0.0; 3], vec![0.0; 2], vec![0.0; 2]], 0).is_err());
    }
}
