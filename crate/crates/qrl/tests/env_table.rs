use qbench_qrl::{env_step, run_policy, Action, FrozenLakeEnv, Tile};

const T: bool = true;
const F: bool = false;

/// (next, reward, done) for Left, Down, Right, Up on
///
/// ```text
/// S F F F
/// F H F H
/// F F F H
/// H F F G
/// ```
///
/// Leaving the grid keeps the index and ends the episode.
#[rustfmt::skip]
const TABLE: [[(usize, f64, bool); 4]; 16] = [
    /*  0 S */ [(0, 0.0, T),  (4, 0.0, F),  (1, 0.0, F),  (0, 0.0, T)],
    /*  1 F */ [(0, 0.0, F),  (5, 0.0, T),  (2, 0.0, F),  (1, 0.0, T)],
    /*  2 F */ [(1, 0.0, F),  (6, 0.0, F),  (3, 0.0, F),  (2, 0.0, T)],
    /*  3 F */ [(2, 0.0, F),  (7, 0.0, T),  (3, 0.0, T),  (3, 0.0, T)],
    /*  4 F */ [(4, 0.0, T),  (8, 0.0, F),  (5, 0.0, T),  (0, 0.0, F)],
    /*  5 H */ [(4, 0.0, F),  (9, 0.0, F),  (6, 0.0, F),  (1, 0.0, F)],
    /*  6 F */ [(5, 0.0, T),  (10, 0.0, F), (7, 0.0, T),  (2, 0.0, F)],
    /*  7 H */ [(6, 0.0, F),  (11, 0.0, T), (7, 0.0, T),  (3, 0.0, F)],
    /*  8 F */ [(8, 0.0, T),  (12, 0.0, T), (9, 0.0, F),  (4, 0.0, F)],
    /*  9 F */ [(8, 0.0, F),  (13, 0.0, F), (10, 0.0, F), (5, 0.0, T)],
    /* 10 F */ [(9, 0.0, F),  (14, 0.0, F), (11, 0.0, T), (6, 0.0, F)],
    /* 11 H */ [(10, 0.0, F), (15, 1.0, T), (11, 0.0, T), (7, 0.0, T)],
    /* 12 H */ [(12, 0.0, T), (12, 0.0, T), (13, 0.0, F), (8, 0.0, F)],
    /* 13 F */ [(12, 0.0, T), (13, 0.0, T), (14, 0.0, F), (9, 0.0, F)],
    /* 14 F */ [(13, 0.0, F), (14, 0.0, T), (15, 1.0, T), (10, 0.0, F)],
    /* 15 G */ [(14, 0.0, F), (15, 0.0, T), (15, 0.0, T), (11, 0.0, T)],
];

#[test]
fn transition_table_matches_hand_enumeration() {
    let env = FrozenLakeEnv::new(4).unwrap();
    for (s, row) in TABLE.iter().enumerate() {
        for (a, &(next, reward, done)) in row.iter().enumerate() {
            let t = env.transition(s, Action::from_index(a).unwrap());
            assert_eq!((t.next_state, t.reward, t.done), (next, reward, done), "state {s} action {a}");
            assert_eq!(t.reward == 1.0, env.tile(t.next_state) == Tile::Goal && next != s);
        }
    }
}

#[test]
fn env_step_follows_the_table_along_a_walk() {
    let mut env = FrozenLakeEnv::new(4).unwrap();
    let walk = [Action::Right, Action::Right, Action::Down, Action::Down, Action::Left, Action::Down];
    let mut s = env.reset();
    for a in walk {
        let t = env_step(&mut env, a).unwrap();
        let (next, reward, done) = TABLE[s][a.index()];
        assert_eq!((t.next_state, t.reward, t.done), (next, reward, done));
        s = t.next_state;
    }
    assert_eq!(env.state(), 13);
    assert_eq!(env.steps, 6);
}

#[test]
fn optimal_policy_always_succeeds() {
    let mut env = FrozenLakeEnv::new(4).unwrap();
    // down, down, right, down, right, right
    let policy = |s: usize| {
        Ok(match s {
            0 | 4 | 9 => Action::Down,
            8 | 13 | 14 => Action::Right,
            _ => Action::Up,
        })
    };
    assert_eq!(run_policy(&mut env, policy, 20, 100).unwrap(), 1.0);
    assert_eq!(env.successes, 20);
    // always left from the start falls off the grid
    assert_eq!(run_policy(&mut env, |_| Ok(Action::Left), 5, 100).unwrap(), 0.0);
}

#[test]
fn eight_by_eight_map_is_reachable() {
    let mut env = FrozenLakeEnv::new(8).unwrap();
    // along the top row, then straight down the last column
    let policy = |s: usize| Ok(if s % 8 < 7 { Action::Right } else { Action::Down });
    assert_eq!(run_policy(&mut env, policy, 1, 100).unwrap(), 1.0);
}
