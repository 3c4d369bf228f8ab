use rlgames_core::builtin;
use rlgames_core::faces::{is_club, minimal_clubs, Face, DEFAULT_FACE_BUDGET};
use rlgames_core::game::Game;

fn fixture(name: &str) -> Game {
    let path = format!("{}/tests/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"));
    Game::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn generators_match_the_transcribed_tableaus() {
    for name in ["vz4x4", "parity", "spectator", "twisted_mp", "outside_mp"] {
        let g = builtin::by_name(name).unwrap();
        let f = fixture(name);
        assert_eq!(g.n_actions(), f.n_actions(), "{name}");
        for i in 0..g.n_players() {
            assert_eq!(g.payoff_table(i), f.payoff_table(i), "{name} player {i}");
        }
    }
}

#[test]
fn builtin_names_resolve() {
    for name in builtin::NAMES {
        assert!(builtin::by_name(name).is_some());
    }
    assert!(builtin::by_name("nope").is_none());
    assert_eq!(builtin::action_label("vz4x4", 2), "C");
    assert_eq!(builtin::action_label("parity", 1), "1");
}

#[test]
fn payoff_ranges() {
    for name in builtin::NAMES {
        let b = builtin::by_name(name).unwrap().payoff_bound();
        assert!(b > 0.0 && b <= 1.0, "{name}: {b}");
    }
}

#[test]
fn minimal_clubs_of_the_three_player_games() {
    let faces = |name: &str| -> Vec<Vec<Vec<usize>>> {
        minimal_clubs(&builtin::by_name(name).unwrap(), DEFAULT_FACE_BUDGET)
            .unwrap()
            .iter()
            .map(|f| f.supports().to_vec())
            .collect()
    };
    let parity = faces("parity");
    assert_eq!(parity, vec![
        vec![vec![0], vec![0], vec![0]],
        vec![vec![0], vec![1], vec![1]],
        vec![vec![1], vec![0], vec![1]],
        vec![vec![1], vec![1], vec![0]],
    ]);
    assert_eq!(faces("spectator"), vec![vec![vec![0], vec![0], vec![0, 1]], vec![vec![1], vec![1], vec![0, 1]]]);
    // Matching pennies has no proper club: the only club is the whole space.
    let mp = builtin::matching_pennies_2p();
    assert_eq!(minimal_clubs(&mp, DEFAULT_FACE_BUDGET).unwrap(), vec![Face::full(&mp)]);
}

#[test]
fn spectator_vertices_are_not_clubs() {
    let g = builtin::spectator();
    // Player III is indifferent, so no pure profile is strict.
    for p in g.profiles() {
        assert!(!is_club(&g, &Face::vertex(&g, &p).unwrap()).unwrap());
    }
    assert!(g.pure_nash(true, 0.0).is_empty());
    assert_eq!(g.pure_nash(false, 0.0).len(), 4);
}
