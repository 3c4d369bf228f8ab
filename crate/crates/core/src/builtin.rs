//! Built-in games: the 4x4 dominated-twins game and four 2x2x2 tableaus.
//!
//! Three-player tableaus list payoffs in row-major profile order
//! `(0,0,0), (0,0,1), ..., (1,1,1)`.

use crate::game::Game;

pub const NAMES: [&str; 6] = ["vz4x4", "parity", "spectator", "twisted_mp", "outside_mp", "matching_pennies_2p"];

pub fn by_name(name: &str) -> Option<Game> {
    match name {
        "vz4x4" => Some(vz4x4()),
        "parity" => Some(parity()),
        "spectator" => Some(spectator()),
        "twisted_mp" => Some(twisted_mp()),
        "outside_mp" => Some(outside_mp()),
        "matching_pennies_2p" => Some(matching_pennies_2p()),
        _ => None,
    }
}

/// Action labels for display; `A`..`D` for the 4x4 game, digits otherwise.
pub fn action_label(game_name: &str, action: usize) -> String {
    if game_name == "vz4x4" {
        ["A", "B", "C", "D"][action].to_string()
    } else {
        action.to_string()
    }
}

/// Symmetric 4x4 game where `B` and `D` are strictly dominated by `A` and `C`,
/// yet the correlated mix of `(B,B)` and `(D,D)` carries negative regret.
pub fn vz4x4() -> Game {
    const T: f64 = 1.0 / 3.0;
    // Row player's payoffs; the column player's matrix is the transpose.
    let row = [
        [1.0, 1.0, 0.0, 0.0],
        [2.0 * T, 2.0 * T, -T, -T],
        [0.0, 0.0, 1.0, 1.0],
        [-T, -T, 2.0 * T, 2.0 * T],
    ];
    Game::from_fn(vec![4, 4], |k, p| if k == 0 { row[p[0]][p[1]] } else { row[p[1]][p[0]] })
        .expect("static tableau")
}

fn three_player(tables: [[f64; 8]; 3]) -> Game {
    Game::new(vec![2, 2, 2], tables.iter().map(|t| t.to_vec()).collect()).expect("static tableau")
}

/// Common-interest game paying 1 to everybody on even-parity profiles.
pub fn parity() -> Game {
    let t = [1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0];
    three_player([t, t, t])
}

/// Players I and II coordinate; player III is a payoff-indifferent spectator.
pub fn spectator() -> Game {
    let t = [1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0];
    three_player([t, t, [0.0; 8]])
}

pub fn twisted_mp() -> Game {
    three_player([
        [0.0, 0.0, 0.0, 0.0, 0.1, 0.1, 0.1, 0.1],
        [1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0],
        [0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0],
    ])
}

pub fn outside_mp() -> Game {
    three_player([
        [-1.0, 1.0, -1.0, 1.0, 1.0, -1.0, 1.0, -1.0],
        [1.0, 1.0, -1.0, -1.0, -1.0, 1.0, 1.0, -1.0],
        [1.0, -1.0, -1.0, 1.0, -1.0, 1.0, 1.0, -1.0],
    ])
}

pub fn matching_pennies_2p() -> Game {
    Game::new(vec![2, 2], vec![vec![1.0, -1.0, -1.0, 1.0], vec![-1.0, 1.0, 1.0, -1.0]]).expect("static tableau")
}

/// Every payoff equal to `value`.
pub fn constant(n_actions: Vec<usize>, value: f64) -> Game {
    Game::from_fn(n_actions, |_, _| value).expect("constant game")
}
