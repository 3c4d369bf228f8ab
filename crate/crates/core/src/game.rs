//! Finite normal-form games and exact payoff arithmetic.
//!
//! Payoff tensors are stored dense and flattened row-major, player 0's action
//! index varying slowest. A pure profile is a slice of action indices, one per
//! player.

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};

/// Default tie tolerance for best replies and weak Nash tests.
pub const DEFAULT_TIE_TOL: f64 = 1e-9;

/// Tolerance on the unit-sum constraint of probability vectors.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// An immutable finite game in normal form.
#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    n_actions: Vec<usize>,
    strides: Vec<usize>,
    payoffs: Vec<Vec<f64>>,
}

/// On-disk representation: `{"players": N, "actions": [..], "payoffs": [[..], ..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameFile {
    pub players: usize,
    pub actions: Vec<usize>,
    pub payoffs: Vec<Vec<f64>>,
}

impl Game {
    pub fn new(n_actions: Vec<usize>, payoffs: Vec<Vec<f64>>) -> Result<Self> {
        if n_actions.is_empty() {
            return input("a game needs at least one player");
        }
        if let Some(k) = n_actions.iter().position(|&m| m == 0) {
            return input(format!("player {k} has no actions"));
        }
        if payoffs.len() != n_actions.len() {
            return input(format!(
                "expected {} payoff tensors, got {}",
                n_actions.len(),
                payoffs.len()
            ));
        }
        let size = n_actions
            .iter()
            .try_fold(1usize, |acc, &m| acc.checked_mul(m))
            .ok_or_else(|| Error::Input("action space too large".into()))?;
        for (k, table) in payoffs.iter().enumerate() {
            if table.len() != size {
                return input(format!(
                    "payoff tensor of player {k} has {} entries, expected {size}",
                    table.len()
                ));
            }
            if let Some(j) = table.iter().position(|u| !u.is_finite()) {
                return input(format!("payoff tensor of player {k} has a non-finite entry at {j}"));
            }
        }
        let mut strides = vec![1usize; n_actions.len()];
        for k in (0..n_actions.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * n_actions[k + 1];
        }
        Ok(Self { n_actions, strides, payoffs })
    }

    /// Builds a game whose payoff for every player is given by `f(player, profile)`.
    pub fn from_fn(n_actions: Vec<usize>, mut f: impl FnMut(usize, &[usize]) -> f64) -> Result<Self> {
        let n = n_actions.len();
        let mut payoffs = vec![Vec::new(); n];
        for profile in ProfileIter::new(&n_actions) {
            for (k, table) in payoffs.iter_mut().enumerate() {
                table.push(f(k, &profile));
            }
        }
        Self::new(n_actions, payoffs)
    }

    pub fn from_file(file: GameFile) -> Result<Self> {
        if file.players != file.actions.len() {
            return input(format!(
                "\"players\" is {} but \"actions\" lists {} players",
                file.players,
                file.actions.len()
            ));
        }
        Self::new(file.actions, file.payoffs)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GameFile =
            serde_json::from_str(text).map_err(|e| Error::Input(format!("game JSON: {e}")))?;
        Self::from_file(file)
    }

    pub fn to_file(&self) -> GameFile {
        GameFile {
            players: self.n_players(),
            actions: self.n_actions.clone(),
            payoffs: self.payoffs.clone(),
        }
    }

    pub fn n_players(&self) -> usize {
        self.n_actions.len()
    }

    pub fn n_actions(&self) -> &[usize] {
        &self.n_actions
    }

    pub fn n_profiles(&self) -> usize {
        self.payoffs[0].len()
    }

    /// Total number of pure actions over all players.
    pub fn total_actions(&self) -> usize {
        self.n_actions.iter().sum()
    }

    pub fn payoff_table(&self, player: usize) -> &[f64] {
        &self.payoffs[player]
    }

    pub fn profiles(&self) -> ProfileIter {
        ProfileIter::new(&self.n_actions)
    }

    pub(crate) fn stride(&self, player: usize) -> usize {
        self.strides[player]
    }

    pub fn profile_index(&self, profile: &[usize]) -> Result<usize> {
        if profile.len() != self.n_players() {
            return input(format!(
                "profile has {} entries, game has {} players",
                profile.len(),
                self.n_players()
            ));
        }
        for (k, (&a, &m)) in profile.iter().zip(&self.n_actions).enumerate() {
            if a >= m {
                return input(format!("action {a} of player {k} out of range (0..{m})"));
            }
        }
        Ok(self.index_unchecked(profile))
    }

    pub(crate) fn index_unchecked(&self, profile: &[usize]) -> usize {
        profile.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    /// Inverse of the row-major flattening.
    pub fn profile_at(&self, mut index: usize) -> Vec<usize> {
        let mut profile = vec![0; self.n_players()];
        for (p, &s) in profile.iter_mut().zip(&self.strides) {
            *p = index / s;
            index %= s;
        }
        profile
    }

    fn check_player(&self, player: usize) -> Result<()> {
        if player >= self.n_players() {
            return input(format!("player {player} out of range (0..{})", self.n_players()));
        }
        Ok(())
    }

    fn check_profile(&self, x: &MixedProfile) -> Result<()> {
        if x.n_players() != self.n_players() {
            return input(format!(
                "mixed profile has {} strategies, game has {} players",
                x.n_players(),
                self.n_players()
            ));
        }
        for (k, (s, &m)) in x.strategies().iter().zip(&self.n_actions).enumerate() {
            if s.len() != m {
                return input(format!("strategy of player {k} has {} entries, expected {m}", s.len()));
            }
        }
        Ok(())
    }

    /// `u_player(profile)`.
    pub fn payoff_pure(&self, player: usize, profile: &[usize]) -> Result<f64> {
        self.check_player(player)?;
        Ok(self.payoffs[player][self.profile_index(profile)?])
    }

    /// Multilinear expectation of `u_player` under the product distribution of `x`.
    pub fn payoff_mixed(&self, player: usize, x: &MixedProfile) -> Result<f64> {
        self.check_player(player)?;
        self.check_profile(x)?;
        let table = &self.payoffs[player];
        let mut total = 0.0;
        for (idx, profile) in self.profiles().enumerate() {
            let w: f64 = profile
                .iter()
                .zip(x.strategies())
                .map(|(&a, s)| s.probs()[a])
                .product();
            total += w * table[idx];
        }
        Ok(total)
    }

    /// Payoff vector `v_player(x)`: entry `a` is `u_player(a; x_-player)`.
    pub fn payoff_vector(&self, player: usize, x: &MixedProfile) -> Result<PayoffVector> {
        self.check_player(player)?;
        self.check_profile(x)?;
        let mut out = vec![0.0; self.n_actions[player]];
        self.accumulate_payoff_vector(player, &x.as_slices(), &mut out);
        Ok(PayoffVector(out))
    }

    /// All players' payoff vectors at once.
    pub fn payoff_vectors(&self, x: &MixedProfile) -> Result<Vec<PayoffVector>> {
        self.check_profile(x)?;
        Ok(self
            .payoff_vectors_raw(&x.as_slices())
            .into_iter()
            .map(PayoffVector)
            .collect())
    }

    /// Unchecked variant used by the learning loop; `x[k]` must have `n_actions[k]` entries.
    pub(crate) fn payoff_vectors_raw<S: AsRef<[f64]>>(&self, x: &[S]) -> Vec<Vec<f64>> {
        let n = self.n_players();
        let mut out: Vec<Vec<f64>> = self.n_actions.iter().map(|&m| vec![0.0; m]).collect();
        let mut prefix = vec![1.0; n + 1];
        let mut suffix = vec![1.0; n + 1];
        for (idx, profile) in self.profiles().enumerate() {
            for k in 0..n {
                prefix[k + 1] = prefix[k] * x[k].as_ref()[profile[k]];
            }
            for k in (0..n).rev() {
                suffix[k] = suffix[k + 1] * x[k].as_ref()[profile[k]];
            }
            for k in 0..n {
                let w = prefix[k] * suffix[k + 1];
                if w != 0.0 {
                    out[k][profile[k]] += w * self.payoffs[k][idx];
                }
            }
        }
        out
    }

    fn accumulate_payoff_vector<S: AsRef<[f64]>>(&self, player: usize, x: &[S], out: &mut [f64]) {
        let table = &self.payoffs[player];
        for (idx, profile) in self.profiles().enumerate() {
            let w: f64 = profile
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != player)
                .map(|(k, &a)| x[k].as_ref()[a])
                .product();
            if w != 0.0 {
                out[profile[player]] += w * table[idx];
            }
        }
    }

    /// `max_a [u_i(a; dist_-i) - u_i(dist)]` for a joint distribution over pure profiles.
    pub fn deviation_gap(&self, player: usize, dist: &CorrelatedDistribution) -> Result<f64> {
        self.check_player(player)?;
        if dist.weights().len() != self.n_profiles() {
            return input(format!(
                "distribution has {} weights, game has {} profiles",
                dist.weights().len(),
                self.n_profiles()
            ));
        }
        let table = &self.payoffs[player];
        let stride = self.strides[player];
        let mut dev = vec![0.0; self.n_actions[player]];
        let mut base = 0.0;
        for (idx, profile) in self.profiles().enumerate() {
            let w = dist.weights()[idx];
            if w == 0.0 {
                continue;
            }
            base += w * table[idx];
            let own = profile[player];
            for (a, d) in dev.iter_mut().enumerate() {
                let j = idx + a * stride - own * stride;
                *d += w * table[j];
            }
        }
        Ok(dev.into_iter().fold(f64::NEG_INFINITY, f64::max) - base)
    }

    /// Pure actions whose payoff against `x` is within `tol` of the best.
    pub fn best_replies(&self, player: usize, x: &MixedProfile, tol: f64) -> Result<Vec<usize>> {
        if !(tol >= 0.0) {
            return input("tie tolerance must be nonnegative");
        }
        let v = self.payoff_vector(player, x)?;
        let best = v.max();
        Ok((0..v.len()).filter(|&a| v.0[a] >= best - tol).collect())
    }

    /// Exhaustive scan for pure Nash equilibria.
    ///
    /// In strict mode every unilateral pure deviation must lose by more than `tol`;
    /// otherwise no deviation may gain more than `tol`.
    pub fn pure_nash(&self, strict_only: bool, tol: f64) -> Vec<Vec<usize>> {
        let mut found = Vec::new();
        'profiles: for (idx, profile) in self.profiles().enumerate() {
            for k in 0..self.n_players() {
                let table = &self.payoffs[k];
                let here = table[idx];
                let stride = self.strides[k];
                for b in 0..self.n_actions[k] {
                    if b == profile[k] {
                        continue;
                    }
                    let there = table[idx + b * stride - profile[k] * stride];
                    let rejected = if strict_only { there >= here - tol } else { there > here + tol };
                    if rejected {
                        continue 'profiles;
                    }
                }
            }
            found.push(profile);
        }
        found
    }

    /// Actions strictly dominated by some other pure action against every opposing pure profile.
    pub fn strictly_dominated_pure(&self, player: usize) -> Result<Vec<usize>> {
        self.check_player(player)?;
        let m = self.n_actions[player];
        let stride = self.strides[player];
        let table = &self.payoffs[player];
        let bases: Vec<usize> = self
            .profiles()
            .enumerate()
            .filter(|(_, p)| p[player] == 0)
            .map(|(idx, _)| idx)
            .collect();
        let dominated = (0..m)
            .filter(|&a| {
                (0..m).any(|b| {
                    b != a && bases.iter().all(|&base| table[base + b * stride] > table[base + a * stride])
                })
            })
            .collect();
        Ok(dominated)
    }

    /// `V = max_i max_a |u_i(a)|`.
    pub fn payoff_bound(&self) -> f64 {
        self.payoffs
            .iter()
            .flat_map(|t| t.iter())
            .fold(0.0f64, |acc, u| acc.max(u.abs()))
    }

    /// Applies `u_i -> scale[i] * u_i + shift[i]` per player.
    pub fn affine_transform(&self, scale: &[f64], shift: &[f64]) -> Result<Self> {
        if scale.len() != self.n_players() || shift.len() != self.n_players() {
            return input("one scale and one shift per player required");
        }
        let payoffs = self
            .payoffs
            .iter()
            .enumerate()
            .map(|(k, t)| t.iter().map(|u| scale[k] * u + shift[k]).collect())
            .collect();
        Self::new(self.n_actions.clone(), payoffs)
    }
}

/// Odometer over pure profiles in row-major order.
#[derive(Debug, Clone)]
pub struct ProfileIter {
    sizes: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl ProfileIter {
    pub fn new(sizes: &[usize]) -> Self {
        let next = if sizes.iter().all(|&m| m > 0) { Some(vec![0; sizes.len()]) } else { None };
        Self { sizes: sizes.to_vec(), next }
    }
}

impl Iterator for ProfileIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut k = succ.len();
        loop {
            if k == 0 {
                break;
            }
            k -= 1;
            succ[k] += 1;
            if succ[k] < self.sizes[k] {
                self.next = Some(succ);
                break;
            }
            succ[k] = 0;
        }
        Some(current)
    }
}

/// A probability vector over one player's actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MixedStrategy(Vec<f64>);

impl MixedStrategy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return input("empty mixed strategy");
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return input("mixed strategy entries must be finite and nonnegative");
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return input(format!("mixed strategy sums to {total}, not 1"));
        }
        Ok(Self(probs))
    }

    /// Skips validation; for outputs of choice maps that are simplex points by construction.
    pub(crate) fn new_unchecked(probs: Vec<f64>) -> Self {
        Self(probs)
    }

    pub fn uniform(m: usize) -> Self {
        Self(vec![1.0 / m as f64; m])
    }

    pub fn pure(m: usize, action: usize) -> Self {
        let mut p = vec![0.0; m];
        p[action] = 1.0;
        Self(p)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for MixedStrategy {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<MixedStrategy> for Vec<f64> {
    fn from(s: MixedStrategy) -> Self {
        s.0
    }
}

/// One mixed strategy per player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MixedProfile {
    strategies: Vec<MixedStrategy>,
}

impl MixedProfile {
    pub fn new(strategies: Vec<MixedStrategy>) -> Self {
        Self { strategies }
    }

    pub fn from_vecs(probs: Vec<Vec<f64>>) -> Result<Self> {
        Ok(Self::new(probs.into_iter().map(MixedStrategy::new).collect::<Result<_>>()?))
    }

    pub(crate) fn from_vecs_unchecked(probs: Vec<Vec<f64>>) -> Self {
        Self::new(probs.into_iter().map(MixedStrategy::new_unchecked).collect())
    }

    /// Splits a player-major flat vector according to `n_actions`.
    pub fn from_flat(n_actions: &[usize], flat: &[f64]) -> Result<Self> {
        if flat.len() != n_actions.iter().sum::<usize>() {
            return input("flat profile length does not match the action counts");
        }
        let mut out = Vec::with_capacity(n_actions.len());
        let mut at = 0;
        for &m in n_actions {
            out.push(MixedStrategy::new(flat[at..at + m].to_vec())?);
            at += m;
        }
        Ok(Self::new(out))
    }

    pub fn uniform(game: &Game) -> Self {
        Self::new(game.n_actions().iter().map(|&m| MixedStrategy::uniform(m)).collect())
    }

    pub fn pure(game: &Game, profile: &[usize]) -> Result<Self> {
        game.profile_index(profile)?;
        Ok(Self::new(
            game.n_actions()
                .iter()
                .zip(profile)
                .map(|(&m, &a)| MixedStrategy::pure(m, a))
                .collect(),
        ))
    }

    pub fn n_players(&self) -> usize {
        self.strategies.len()
    }

    pub fn strategies(&self) -> &[MixedStrategy] {
        &self.strategies
    }

    pub fn strategy(&self, player: usize) -> &MixedStrategy {
        &self.strategies[player]
    }

    pub fn as_slices(&self) -> Vec<&[f64]> {
        self.strategies.iter().map(|s| s.probs()).collect()
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.strategies.iter().flat_map(|s| s.probs().iter().copied()).collect()
    }

    /// Replaces one player's strategy.
    pub fn with_strategy(&self, player: usize, s: MixedStrategy) -> Self {
        let mut out = self.clone();
        out.strategies[player] = s;
        out
    }

    /// Total L1 distance, summed over players.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        self.strategies
            .iter()
            .zip(&other.strategies)
            .flat_map(|(a, b)| a.probs().iter().zip(b.probs()).map(|(p, q)| (p - q).abs()))
            .sum()
    }
}

/// A joint distribution over full pure profiles (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatedDistribution {
    weights: Vec<f64>,
}

impl CorrelatedDistribution {
    pub fn new(game: &Game, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != game.n_profiles() {
            return input(format!(
                "distribution has {} weights, game has {} profiles",
                weights.len(),
                game.n_profiles()
            ));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return input("distribution weights must be finite and nonnegative");
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return input(format!("distribution weights sum to {total}, not 1"));
        }
        Ok(Self { weights })
    }

    /// Finite mixture of point masses.
    pub fn from_atoms(game: &Game, atoms: &[(Vec<usize>, f64)]) -> Result<Self> {
        let mut weights = vec![0.0; game.n_profiles()];
        for (profile, w) in atoms {
            weights[game.profile_index(profile)?] += w;
        }
        Self::new(game, weights)
    }

    pub fn point_mass(game: &Game, profile: &[usize]) -> Result<Self> {
        Self::from_atoms(game, &[(profile.to_vec(), 1.0)])
    }

    /// Product distribution of a mixed profile.
    pub fn product(game: &Game, x: &MixedProfile) -> Result<Self> {
        game.check_profile(x)?;
        let weights = game
            .profiles()
            .map(|p| p.iter().zip(x.strategies()).map(|(&a, s)| s.probs()[a]).product())
            .collect();
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Per-action expected payoffs of one player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PayoffVector(pub Vec<f64>);

impl PayoffVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn dot(&self, x: &MixedStrategy) -> f64 {
        self.0.iter().zip(x.probs()).map(|(v, p)| v * p).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;

    const A: usize = 0;
    const B: usize = 1;
    const C: usize = 2;
    const D: usize = 3;

    fn zero_2x2() -> Game {
        Game::new(vec![2, 2], vec![vec![0.0; 4], vec![0.0; 4]]).unwrap()
    }

    #[test]
    fn rejects_bad_games() {
        assert!(Game::new(vec![], vec![]).is_err());
        assert!(Game::new(vec![2, 0], vec![vec![], vec![]]).is_err());
        assert!(Game::new(vec![2, 2], vec![vec![0.0; 4]]).is_err());
        assert!(Game::new(vec![2, 2], vec![vec![0.0; 4], vec![0.0; 3]]).is_err());
        assert!(Game::new(vec![2], vec![vec![0.0, f64::NAN]]).is_err());
        assert!(Game::new(vec![2], vec![vec![0.0, f64::INFINITY]]).is_err());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let g = builtin::vz4x4();
        let text = serde_json::to_string(&g.to_file()).unwrap();
        assert_eq!(Game::from_json(&text).unwrap(), g);
        assert!(Game::from_json(r#"{"players": 2, "actions": [2], "payoffs": [[0,0]]}"#).is_err());
        assert!(Game::from_json(r#"{"players": 1, "actions": [2], "payoffs": [[0]]}"#).is_err());
    }

    #[test]
    fn flattening_is_row_major_player_zero_slowest() {
        let g = Game::from_fn(vec![2, 3], |_, p| (p[0] * 10 + p[1]) as f64).unwrap();
        assert_eq!(g.payoff_table(0), &[0.0, 1.0, 2.0, 10.0, 11.0, 12.0]);
        assert_eq!(g.profile_at(4), vec![1, 1]);
        assert_eq!(g.profile_index(&[1, 2]).unwrap(), 5);
    }

    #[test]
    fn payoff_pure_examples() {
        let g = builtin::vz4x4();
        assert_eq!(g.payoff_pure(0, &[A, A]).unwrap(), 1.0);
        assert_eq!(g.payoff_pure(1, &[B, D]).unwrap(), -1.0 / 3.0);
        assert_eq!(zero_2x2().payoff_pure(1, &[1, 0]).unwrap(), 0.0);
        assert!(g.payoff_pure(0, &[4, 0]).is_err());
        assert!(g.payoff_pure(2, &[0, 0]).is_err());
    }

    #[test]
    fn payoff_mixed_examples() {
        let g = builtin::vz4x4();
        let pure = MixedProfile::pure(&g, &[A, A]).unwrap();
        assert_eq!(g.payoff_mixed(0, &pure).unwrap(), 1.0);
        let x = MixedProfile::from_vecs(vec![vec![0.5, 0.5, 0.0, 0.0], vec![1.0, 0.0, 0.0, 0.0]]).unwrap();
        assert!((g.payoff_mixed(0, &x).unwrap() - 5.0 / 6.0).abs() < 1e-15);
        let wrong = MixedProfile::from_vecs(vec![vec![1.0], vec![1.0]]).unwrap();
        assert!(g.payoff_mixed(0, &wrong).is_err());
    }

    #[test]
    fn payoff_vector_examples() {
        let g = builtin::vz4x4();
        let x = MixedProfile::from_vecs(vec![vec![0.25; 4], vec![0.0, 0.5, 0.0, 0.5]]).unwrap();
        let v = g.payoff_vector(0, &x).unwrap();
        let expected = [0.5, 1.0 / 6.0, 0.5, 1.0 / 6.0];
        for (a, e) in v.values().iter().zip(expected) {
            assert!((a - e).abs() < 1e-15);
        }
        let z = zero_2x2();
        let v = z.payoff_vector(1, &MixedProfile::uniform(&z)).unwrap();
        assert_eq!(v.values(), &[0.0, 0.0]);
    }

    #[test]
    fn deviation_gap_examples() {
        let g = builtin::vz4x4();
        let dist = CorrelatedDistribution::from_atoms(&g, &[(vec![B, B], 0.5), (vec![D, D], 0.5)]).unwrap();
        for k in 0..2 {
            assert!((g.deviation_gap(k, &dist).unwrap() + 1.0 / 6.0).abs() < 1e-12);
        }
        let nash = CorrelatedDistribution::point_mass(&g, &[C, C]).unwrap();
        assert_eq!(g.deviation_gap(0, &nash).unwrap(), 0.0);
        let z = zero_2x2();
        let u = CorrelatedDistribution::product(&z, &MixedProfile::uniform(&z)).unwrap();
        assert_eq!(z.deviation_gap(0, &u).unwrap(), 0.0);
    }

    #[test]
    fn best_reply_examples() {
        let g = builtin::vz4x4();
        let x = MixedProfile::pure(&g, &[B, A]).unwrap();
        assert_eq!(g.best_replies(0, &x, 0.0).unwrap(), vec![A]);
        let c = Game::new(vec![3, 2], vec![vec![2.0; 6], vec![2.0; 6]]).unwrap();
        assert_eq!(c.best_replies(0, &MixedProfile::uniform(&c), 0.0).unwrap(), vec![0, 1, 2]);
        let p = builtin::parity();
        let x = MixedProfile::pure(&p, &[1, 0, 0]).unwrap();
        assert_eq!(p.best_replies(0, &x, 0.0).unwrap(), vec![0]);
        assert!(g.best_replies(0, &x, -1.0).is_err());
    }

    #[test]
    fn strict_nash_examples() {
        assert_eq!(builtin::vz4x4().pure_nash(true, 0.0), vec![vec![A, A], vec![C, C]]);
        assert_eq!(
            builtin::parity().pure_nash(true, 0.0),
            vec![vec![0, 0, 0], vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]
        );
        assert!(builtin::spectator().pure_nash(true, DEFAULT_TIE_TOL).is_empty());
        // Weak equilibria of the spectator game: I and II coordinate, III arbitrary.
        assert_eq!(builtin::spectator().pure_nash(false, DEFAULT_TIE_TOL).len(), 4);
    }

    #[test]
    fn dominance_examples() {
        let g = builtin::vz4x4();
        assert_eq!(g.strictly_dominated_pure(0).unwrap(), vec![B, D]);
        assert_eq!(g.strictly_dominated_pure(1).unwrap(), vec![B, D]);
        let c = Game::new(vec![2, 2], vec![vec![1.0; 4], vec![1.0; 4]]).unwrap();
        assert!(c.strictly_dominated_pure(0).unwrap().is_empty());
    }

    #[test]
    fn payoff_bound_examples() {
        assert_eq!(builtin::vz4x4().payoff_bound(), 1.0);
        assert_eq!(zero_2x2().payoff_bound(), 0.0);
        assert_eq!(builtin::outside_mp().payoff_bound(), 1.0);
    }

    #[test]
    fn mixed_strategy_validation() {
        assert!(MixedStrategy::new(vec![0.5, 0.5]).is_ok());
        assert!(MixedStrategy::new(vec![0.5, 0.6]).is_err());
        assert!(MixedStrategy::new(vec![1.5, -0.5]).is_err());
        assert!(MixedStrategy::new(vec![]).is_err());
        assert!(CorrelatedDistribution::new(&zero_2x2(), vec![0.25; 3]).is_err());
    }
}
