//! Product faces of the strategy space and setwise stability checks.
//!
//! A face is a product of nonempty pure-action subsets. It is a *club* when
//! every pure deviation leaving the face is strictly worse than every action
//! inside it, against every pure opposing profile of the face. The payoff
//! difference between two pure actions is multilinear in the opponents'
//! strategies, so strict negativity at the vertices of the opposing face
//! carries over to its whole span and the vertex check is exact.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::game::{Game, MixedProfile, MixedStrategy, ProfileIter};
use crate::lp::{solve_minimax_lp, AffinePiece};

/// Default cap on the number of faces scanned by [`enumerate_clubs`].
pub const DEFAULT_FACE_BUDGET: u128 = 1_000_000;

/// One nonempty, sorted, duplicate-free action subset per player.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct Face {
    supports: Vec<Vec<usize>>,
}

impl Face {
    pub fn new(supports: Vec<Vec<usize>>) -> Result<Self> {
        if supports.is_empty() {
            return input("a face needs one support per player");
        }
        let mut canon = Vec::with_capacity(supports.len());
        for (k, mut s) in supports.into_iter().enumerate() {
            s.sort_unstable();
            s.dedup();
            if s.is_empty() {
                return input(format!("support of player {k} is empty"));
            }
            canon.push(s);
        }
        Ok(Self { supports: canon })
    }

    pub fn full(game: &Game) -> Self {
        Self { supports: game.n_actions().iter().map(|&m| (0..m).collect()).collect() }
    }

    pub fn vertex(game: &Game, profile: &[usize]) -> Result<Self> {
        game.profile_index(profile)?;
        Ok(Self { supports: profile.iter().map(|&a| vec![a]).collect() })
    }

    pub fn supports(&self) -> &[Vec<usize>] {
        &self.supports
    }

    pub fn support(&self, player: usize) -> &[usize] {
        &self.supports[player]
    }

    pub fn contains_action(&self, player: usize, action: usize) -> bool {
        self.supports[player].binary_search(&action).is_ok()
    }

    /// Sum of support sizes.
    pub fn size(&self) -> usize {
        self.supports.iter().map(Vec::len).sum()
    }

    pub fn is_singleton(&self) -> bool {
        self.supports.iter().all(|s| s.len() == 1)
    }

    /// Componentwise support inclusion.
    pub fn is_subface_of(&self, other: &Self) -> bool {
        self.supports.len() == other.supports.len()
            && self
                .supports
                .iter()
                .zip(&other.supports)
                .all(|(s, o)| s.iter().all(|a| o.binary_search(a).is_ok()))
    }

    pub fn validate_for(&self, game: &Game) -> Result<()> {
        if self.supports.len() != game.n_players() {
            return input(format!(
                "face has {} supports, game has {} players",
                self.supports.len(),
                game.n_players()
            ));
        }
        for (k, (s, &m)) in self.supports.iter().zip(game.n_actions()).enumerate() {
            if let Some(&a) = s.iter().find(|&&a| a >= m) {
                return input(format!("face action {a} of player {k} out of range (0..{m})"));
            }
        }
        Ok(())
    }

    fn outside(&self, player: usize, m: usize) -> Vec<usize> {
        (0..m).filter(|&a| !self.contains_action(player, a)).collect()
    }

    /// Canonical order: total support size, then lexicographic.
    fn sort_key(&self) -> (usize, &Vec<Vec<usize>>) {
        (self.size(), &self.supports)
    }
}

impl TryFrom<Vec<Vec<usize>>> for Face {
    type Error = Error;

    fn try_from(v: Vec<Vec<usize>>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Face> for Vec<Vec<usize>> {
    fn from(f: Face) -> Self {
        f.supports
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, s) in self.supports.iter().enumerate() {
            if k > 0 {
                f.write_str("x")?;
            }
            let items: Vec<String> = s.iter().map(ToString::to_string).collect();
            write!(f, "{{{}}}", items.join(","))?;
        }
        Ok(())
    }
}

/// A pure deviation `e_outside - e_inside` of one player away from a face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeviationVector {
    pub player: usize,
    pub inside: usize,
    pub outside: usize,
}

/// Total probability mass outside the face's supports.
pub fn distance_to_face(x: &MixedProfile, face: &Face) -> Result<f64> {
    if x.n_players() != face.supports.len() {
        return input("profile and face have different player counts");
    }
    let mut d = 0.0;
    for (k, s) in x.strategies().iter().enumerate() {
        if let Some(&a) = face.supports[k].last() {
            if a >= s.len() {
                return input(format!("face action {a} of player {k} out of range"));
            }
        }
        d += distance_raw(s.probs(), &face.supports[k]);
    }
    Ok(d)
}

/// Mass of `x` outside the sorted support `inside`.
pub(crate) fn distance_raw(x: &[f64], inside: &[usize]) -> f64 {
    x.iter()
        .enumerate()
        .filter(|(a, _)| inside.binary_search(a).is_err())
        .map(|(_, p)| p)
        .sum()
}

pub fn deviation_vectors(game: &Game, face: &Face) -> Result<Vec<DeviationVector>> {
    face.validate_for(game)?;
    let mut out = Vec::new();
    for (player, &m) in game.n_actions().iter().enumerate() {
        let outside = face.outside(player, m);
        for &inside in face.support(player) {
            for &o in &outside {
                out.push(DeviationVector { player, inside, outside: o });
            }
        }
    }
    Ok(out)
}

/// Pure opposing profiles of `face` with `player`'s slot pinned to 0.
fn opposing_vertices(game: &Game, face: &Face, player: usize) -> Vec<usize> {
    let sizes: Vec<usize> = face
        .supports
        .iter()
        .enumerate()
        .map(|(k, s)| if k == player { 1 } else { s.len() })
        .collect();
    ProfileIter::new(&sizes)
        .map(|pick| {
            let profile: Vec<usize> = pick
                .iter()
                .enumerate()
                .map(|(k, &j)| if k == player { 0 } else { face.supports[k][j] })
                .collect();
            game.index_unchecked(&profile)
        })
        .collect()
}

/// Smallest slack `u_i(a; a_-i) - u_i(b; a_-i)` over inside `a`, outside `b` and
/// opposing vertices `a_-i` of the face. `+inf` when nothing lies outside.
pub fn club_margin(game: &Game, face: &Face) -> Result<f64> {
    face.validate_for(game)?;
    let mut margin = f64::INFINITY;
    for (player, &m) in game.n_actions().iter().enumerate() {
        let outside = face.outside(player, m);
        if outside.is_empty() {
            continue;
        }
        let table = game.payoff_table(player);
        let stride = game.stride(player);
        for base in opposing_vertices(game, face, player) {
            let worst_inside = face
                .support(player)
                .iter()
                .map(|&a| table[base + a * stride])
                .fold(f64::INFINITY, f64::min);
            let best_outside = outside
                .iter()
                .map(|&b| table[base + b * stride])
                .fold(f64::NEG_INFINITY, f64::max);
            margin = margin.min(worst_inside - best_outside);
        }
    }
    Ok(margin)
}

/// Exact club test; strict inequality with no tolerance.
pub fn is_club(game: &Game, face: &Face) -> Result<bool> {
    Ok(club_margin(game, face)? > 0.0)
}

/// Lattice points `k / resolution` of the simplex over `support` (embedded in `m` coordinates).
fn simplex_grid(m: usize, support: &[usize], resolution: usize) -> Vec<MixedStrategy> {
    fn compositions(parts: usize, total: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=total {
            prefix.push(k);
            compositions(parts - 1, total - k, prefix, out);
            prefix.pop();
        }
    }
    let mut comps = Vec::new();
    compositions(support.len(), resolution, &mut Vec::new(), &mut comps);
    comps
        .into_iter()
        .map(|c| {
            let mut p = vec![0.0; m];
            for (&a, &k) in support.iter().zip(&c) {
                p[a] = k as f64 / resolution as f64;
            }
            MixedStrategy::new_unchecked(p)
        })
        .collect()
}

/// Grid approximation of closedness under best replies: at every lattice point of
/// the opposing span, the best outside action must lose strictly to the best
/// inside action. Exact only on the lattice.
pub fn is_curb(game: &Game, face: &Face, grid_resolution: usize) -> Result<bool> {
    face.validate_for(game)?;
    if grid_resolution < 2 {
        return input("grid resolution must be at least 2");
    }
    let grids: Vec<Vec<MixedStrategy>> = game
        .n_actions()
        .iter()
        .enumerate()
        .map(|(k, &m)| simplex_grid(m, face.support(k), grid_resolution))
        .collect();
    for (player, &m) in game.n_actions().iter().enumerate() {
        let outside = face.outside(player, m);
        if outside.is_empty() {
            continue;
        }
        let sizes: Vec<usize> =
            grids.iter().enumerate().map(|(k, g)| if k == player { 1 } else { g.len() }).collect();
        for pick in ProfileIter::new(&sizes) {
            let x = MixedProfile::new(
                pick.iter()
                    .enumerate()
                    .map(|(k, &j)| if k == player { MixedStrategy::uniform(m) } else { grids[k][j].clone() })
                    .collect(),
            );
            let v = game.payoff_vector(player, &x)?;
            let best_in = face.support(player).iter().map(|&a| v.0[a]).fold(f64::NEG_INFINITY, f64::max);
            let best_out = outside.iter().map(|&b| v.0[b]).fold(f64::NEG_INFINITY, f64::max);
            if best_out >= best_in {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn face_count(game: &Game) -> u128 {
    game.n_actions()
        .iter()
        .map(|&m| if m >= 127 { u128::MAX } else { (1u128 << m) - 1 })
        .fold(1u128, |acc, c| acc.saturating_mul(c))
}

/// Every club face, sorted by total support size then lexicographically.
pub fn enumerate_clubs(game: &Game, max_faces: u128) -> Result<Vec<Face>> {
    let required = face_count(game);
    if required > max_faces {
        return Err(Error::Budget { required, budget: max_faces });
    }
    let masks: Vec<u64> = game.n_actions().iter().map(|&m| (1u64 << m) - 1).collect();
    let sizes: Vec<usize> = masks.iter().map(|&m| m as usize).collect();
    let faces: Vec<Face> = ProfileIter::new(&sizes)
        .map(|pick| Face {
            supports: pick
                .iter()
                .map(|&j| {
                    let bits = j as u64 + 1;
                    (0..64).filter(|b| bits >> b & 1 == 1).collect()
                })
                .collect(),
        })
        .collect();
    let mut clubs: Vec<Face> = faces
        .into_par_iter()
        .filter(|f| matches!(is_club(game, f), Ok(true)))
        .collect();
    clubs.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(clubs)
}

/// Clubs admitting no proper club subface.
pub fn minimal_clubs(game: &Game, max_faces: u128) -> Result<Vec<Face>> {
    let clubs = enumerate_clubs(game, max_faces)?;
    Ok(minimal_elements(&clubs))
}

pub(crate) fn minimal_elements(clubs: &[Face]) -> Vec<Face> {
    clubs
        .iter()
        .filter(|c| !clubs.iter().any(|o| o != *c && o.is_subface_of(c)))
        .cloned()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Solved,
    Failed,
}

/// Outcome of the worst-case deviation program for one player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerResilience {
    /// `min_z max_x [u_i(x) - u_i(z; x_-i)]`; NaN when the LP failed.
    pub gap: f64,
    /// Minimizing deviation `z`.
    pub witness: Vec<f64>,
    pub status: LpStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResilienceReport {
    pub players: Vec<PlayerResilience>,
    pub tol: f64,
    pub resilient: bool,
    pub n_points: usize,
}

impl ResilienceReport {
    pub fn worst_gap(&self) -> f64 {
        self.players.iter().map(|p| p.gap).fold(f64::INFINITY, f64::min)
    }
}

/// Resilience of a finite point set: every deviation `z` of every player must be
/// weakly deterred by some point of the set, up to `tol`.
pub fn is_resilient(game: &Game, points: &[MixedProfile], tol: f64) -> Result<ResilienceReport> {
    if points.is_empty() {
        return input("resilience needs at least one point");
    }
    let mut players = Vec::with_capacity(game.n_players());
    let vectors: Vec<_> = points.iter().map(|x| game.payoff_vectors(x)).collect::<Result<_>>()?;
    for (player, &m) in game.n_actions().iter().enumerate() {
        let pieces: Vec<AffinePiece> = points
            .iter()
            .zip(&vectors)
            .map(|(x, v)| {
                let vi = &v[player];
                AffinePiece::new(vi.dot(x.strategy(player)), vi.0.clone())
            })
            .collect();
        players.push(match solve_minimax_lp(&pieces, m) {
            Ok(sol) => PlayerResilience { gap: sol.value, witness: sol.minimizer, status: LpStatus::Solved },
            Err(Error::Solver(_)) => {
                PlayerResilience { gap: f64::NAN, witness: vec![f64::NAN; m], status: LpStatus::Failed }
            }
            Err(e) => return Err(e),
        });
    }
    let resilient = players.iter().all(|p| p.status == LpStatus::Solved && p.gap >= -tol);
    Ok(ResilienceReport { players, tol, resilient, n_points: points.len() })
}

/// Vertices of a face as pure profiles, optionally refined by a lattice of the
/// given resolution over the face's span.
pub fn face_points(game: &Game, face: &Face, grid_resolution: Option<usize>) -> Result<Vec<MixedProfile>> {
    face.validate_for(game)?;
    let grids: Vec<Vec<MixedStrategy>> = game
        .n_actions()
        .iter()
        .enumerate()
        .map(|(k, &m)| match grid_resolution {
            Some(r) => simplex_grid(m, face.support(k), r.max(1)),
            None => face.support(k).iter().map(|&a| MixedStrategy::pure(m, a)).collect(),
        })
        .collect();
    let sizes: Vec<usize> = grids.iter().map(Vec::len).collect();
    Ok(ProfileIter::new(&sizes)
        .map(|pick| MixedProfile::new(pick.iter().enumerate().map(|(k, &j)| grids[k][j].clone()).collect()))
        .collect())
}
