use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EnvError {
    #[error("episode already terminated; call reset")]
    Terminated,
    #[error("bad map: {0}")]
    BadMap(String),
    #[error("unknown action {0}")]
    BadAction(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tile {
    Start,
    Frozen,
    Hole,
    Goal,
}

impl Tile {
    fn from_char(c: char) -> Option<Tile> {
        Some(match c {
            'S' => Tile::Start,
            'F' => Tile::Frozen,
            'H' => Tile::Hole,
            'G' => Tile::Goal,
            _ => return None,
        })
    }

    fn as_char(self) -> char {
        match self {
            Tile::Start => 'S',
            Tile::Frozen => 'F',
            Tile::Hole => 'H',
            Tile::Goal => 'G',
        }
    }
}

/// Numbered as in Gymnasium's FrozenLake.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Left = 0,
    Down = 1,
    Right = 2,
    Up = 3,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Left, Action::Down, Action::Right, Action::Up];

    pub fn from_index(i: usize) -> Result<Action, EnvError> {
        Action::ALL.get(i).copied().ok_or(EnvError::BadAction(i))
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: usize,
    pub action: Action,
    pub reward: f64,
    /// For a move off the grid the agent is gone; this repeats `state`.
    pub next_state: usize,
    pub done: bool,
}

pub const MAP_4X4: [&str; 4] = ["SFFF", "FHFH", "FFFH", "HFFG"];
pub const MAP_8X8: [&str; 8] =
    ["SFFFFFFF", "FFFFFFFF", "FFFHFFFF", "FFFFFHFF", "FFFHFFFF", "FHHFFFHF", "FHFFHFHF", "FFFHFFFG"];

/// Deterministic FrozenLake. Leaving the grid or stepping into a hole ends
/// the episode with reward 0; reaching the goal ends it with reward 1.
#[derive(Clone, Debug, PartialEq)]
pub struct FrozenLakeEnv {
    size: usize,
    tiles: Vec<Tile>,
    start: usize,
    position: usize,
    done: bool,
    /// Steps taken in the current episode.
    pub steps: u64,
    /// Goal arrivals since construction.
    pub successes: u64,
}

impl FrozenLakeEnv {
    /// Canonical map of side 4 or 8.
    pub fn new(size: usize) -> Result<Self, EnvError> {
        match size {
            4 => Self::from_rows(&MAP_4X4),
            8 => Self::from_rows(&MAP_8X8),
            _ => Err(EnvError::BadMap(format!("no canonical map of side {size}"))),
        }
    }

    pub fn from_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self, EnvError> {
        let size = rows.len();
        let mut tiles = Vec::with_capacity(size * size);
        for row in rows {
            let row = row.as_ref();
            if row.chars().count() != size {
                return Err(EnvError::BadMap(format!("row `{row}` is not {size} wide")));
            }
            for c in row.chars() {
                tiles.push(Tile::from_char(c).ok_or_else(|| EnvError::BadMap(format!("tile `{c}`")))?);
            }
        }
        let count = |t: Tile| tiles.iter().filter(|&&x| x == t).count();
        if count(Tile::Start) != 1 || count(Tile::Goal) != 1 {
            return Err(EnvError::BadMap("need exactly one S and one G".into()));
        }
        let start = tiles.iter().position(|&t| t == Tile::Start).expect("counted");
        Ok(Self { size, tiles, start, position: start, done: false, steps: 0, successes: 0 })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn num_states(&self) -> usize {
        self.tiles.len()
    }

    pub fn tile(&self, state: usize) -> Tile {
        self.tiles[state]
    }

    pub fn state(&self) -> usize {
        self.position
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn reset(&mut self) -> usize {
        self.position = self.start;
        self.done = false;
        self.steps = 0;
        self.start
    }

    /// The transition rule itself, without touching the episode.
    pub fn transition(&self, state: usize, action: Action) -> Transition {
        let (r, c) = (state / self.size, state % self.size);
        let target = match action {
            Action::Left => c.checked_sub(1).map(|c| (r, c)),
            Action::Right => (c + 1 < self.size).then_some((r, c + 1)),
            Action::Up => r.checked_sub(1).map(|r| (r, c)),
            Action::Down => (r + 1 < self.size).then_some((r + 1, c)),
        };
        let Some((r, c)) = target else {
            return Transition { state, action, reward: 0.0, next_state: state, done: true };
        };
        let next = r * self.size + c;
        let (reward, done) = match self.tiles[next] {
            Tile::Goal => (1.0, true),
            Tile::Hole => (0.0, true),
            Tile::Start | Tile::Frozen => (0.0, false),
        };
        Transition { state, action, reward, next_state: next, done }
    }
}

impl fmt::Display for FrozenLakeEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.tiles.chunks(self.size) {
            writeln!(f, "{}", row.iter().map(|t| t.as_char()).collect::<String>())?;
        }
        Ok(())
    }
}

pub fn env_step(env: &mut FrozenLakeEnv, action: Action) -> Result<Transition, EnvError> {
    if env.done {
        return Err(EnvError::Terminated);
    }
    let t = env.transition(env.position, action);
    env.position = t.next_state;
    env.done = t.done;
    env.steps += 1;
    if t.reward > 0.0 {
        env.successes += 1;
    }
    Ok(t)
}

/// Qubits needed to encode every state index and to read one value per
/// action: `(width, measured)`.
pub fn ansatz_width(num_states: usize, num_actions: usize) -> (usize, usize) {
    let bits = (usize::BITS - (num_states.max(2) - 1).leading_zeros()) as usize;
    (bits.max(num_actions), num_actions)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn start_left_leaves_grid() {
        let mut env = FrozenLakeEnv::new(4).unwrap();
        let t = env_step(&mut env, Action::Left).unwrap();
        assert!(t.done && t.reward == 0.0);
        assert_eq!(env_step(&mut env, Action::Down), Err(EnvError::Terminated));
        env.reset();
        assert_eq!(env.state(), 0);
    }

    #[test]
    fn goal_from_its_left_neighbour() {
        let env = FrozenLakeEnv::new(4).unwrap();
        let t = env.transition(14, Action::Right);
        assert_eq!((t.next_state, t.reward, t.done), (15, 1.0, true));
    }

    #[test]
    fn widths() {
        assert_eq!(ansatz_width(16, 4), (4, 4));
        assert_eq!(ansatz_width(64, 4), (6, 4));
        assert_eq!(FrozenLakeEnv::new(8).unwrap().to_string().lines().count(), 8);
    }

    #[test]
    fn maps_are_validated() {
        assert!(FrozenLakeEnv::from_rows(&["SF", "FF"]).is_err());
        assert!(FrozenLakeEnv::from_rows(&["SG", "F"]).is_err());
        assert!(FrozenLakeEnv::from_rows(&["SX", "FG"]).is_err());
        assert!(FrozenLakeEnv::new(5).is_err());
    }
}
