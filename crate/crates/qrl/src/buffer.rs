use std::collections::VecDeque;

use rand::seq::index;
use rand::Rng;

use crate::env::Transition;

/// Bounded FIFO of transitions; the oldest entry is evicted when full.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    items: VecDeque<Transition>,
    capacity: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay buffer needs room for one transition");
        Self { items: VecDeque::with_capacity(capacity), capacity }
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// `n` distinct entries, or `None` if fewer are stored.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Option<Vec<Transition>> {
        if n > self.items.len() {
            return None;
        }
        Some(index::sample(rng, self.items.len(), n).into_iter().map(|i| self.items[i]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Action;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t(state: usize) -> Transition {
        Transition { state, action: Action::Up, reward: 0.0, next_state: state, done: false }
    }

    #[test]
    fn evicts_oldest_and_samples_distinct() {
        let mut b = ReplayBuffer::new(5);
        for s in 0..8 {
            b.push(t(s));
        }
        assert_eq!(b.len(), 5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut got: Vec<usize> = b.sample(5, &mut rng).unwrap().iter().map(|t| t.state).collect();
        got.sort();
        assert_eq!(got, vec![3, 4, 5, 6, 7]);
        assert!(b.sample(6, &mut rng).is_none());
    }
}
