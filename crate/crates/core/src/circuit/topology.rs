use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

/// Physical connectivity used by the router.
pub trait Coupling {
    fn num_nodes(&self) -> usize;
    fn neighbors(&self, node: usize) -> Vec<usize>;

    fn adjacent(&self, a: usize, b: usize) -> bool {
        self.neighbors(a).contains(&b)
    }

    /// Shortest node path from `a` to `b`, both ends included. Ties are
    /// broken by neighbor order, so the result is deterministic.
    fn shortest_path(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        let n = self.num_nodes();
        if a >= n || b >= n {
            return None;
        }
        let mut prev = vec![usize::MAX; n];
        let mut queue = VecDeque::from([a]);
        prev[a] = a;
        while let Some(u) = queue.pop_front() {
            if u == b {
                break;
            }
            for v in self.neighbors(u) {
                if prev[v] == usize::MAX {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[b] == usize::MAX {
            return None;
        }
        let mut path = vec![b];
        let mut cur = b;
        while cur != a {
            cur = prev[cur];
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }
}

/// `rows x cols` nearest-neighbour grid; node `r * cols + c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridTopology {
    pub rows: usize,
    pub cols: usize,
}

impl GridTopology {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols }
    }

    pub fn square(side: usize) -> Self {
        Self::new(side, side)
    }

    pub fn coords(&self, node: usize) -> (usize, usize) {
        (node / self.cols, node % self.cols)
    }

    pub fn node(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    pub fn distance(&self, a: usize, b: usize) -> usize {
        let (ra, ca) = self.coords(a);
        let (rb, cb) = self.coords(b);
        ra.abs_diff(rb) + ca.abs_diff(cb)
    }
}

impl Coupling for GridTopology {
    fn num_nodes(&self) -> usize {
        self.rows * self.cols
    }

    fn neighbors(&self, node: usize) -> Vec<usize> {
        let (r, c) = self.coords(node);
        let mut out = Vec::with_capacity(4);
        if r > 0 {
            out.push(self.node(r - 1, c));
        }
        if c > 0 {
            out.push(self.node(r, c - 1));
        }
        if c + 1 < self.cols {
            out.push(self.node(r, c + 1));
        }
        if r + 1 < self.rows {
            out.push(self.node(r + 1, c));
        }
        out
    }

    fn adjacent(&self, a: usize, b: usize) -> bool {
        a < self.num_nodes() && b < self.num_nodes() && self.distance(a, b) == 1
    }
}

/// Every pair of nodes is connected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AllToAll(pub usize);

impl Coupling for AllToAll {
    fn num_nodes(&self) -> usize {
        self.0
    }

    fn neighbors(&self, node: usize) -> Vec<usize> {
        (0..self.0).filter(|&v| v != node).collect()
    }

    fn adjacent(&self, a: usize, b: usize) -> bool {
        a != b && a < self.0 && b < self.0
    }
}
