//! Exact discrete optimal transport by the primal transportation simplex
//! (network simplex on the complete bipartite graph).
//!
//! The basis is a spanning tree over the `n + m` row/column nodes holding
//! exactly `n + m - 1` cells, some of which may carry zero flow. Each pivot
//! prices all non-basic cells against the dual potentials `u_i + v_j = c_ij`
//! of the tree, pushes flow around the unique cycle closed by the entering
//! cell and drops the blocking cell. Dantzig pricing is used until a run of
//! degenerate pivots appears; from then on Bland's smallest-index rule is used
//! for both the entering and the leaving cell, which rules out cycling.

use std::collections::VecDeque;

use ndarray::{Array2, ArrayView1};

use super::{check_problem, frobenius, CostMatrix, TransportPlan};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct Cell {
    row: usize,
    col: usize,
    flow: f64,
}

/// Minimizes `<T, M>_F` over couplings `T >= 0` with row sums `a` and column
/// sums `b`. The returned plan is a vertex of the transportation polytope and
/// has at most `n + m - 1` nonzero entries.
pub fn solve_exact(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>, m: &CostMatrix) -> Result<TransportPlan> {
    check_problem(a, b, m)?;
    let cost = &m.entries;
    let (n, k) = cost.dim();

    let mut basis = northwest_corner(a, b);
    let scale = m.max_entry().max(1.0);
    let tol = 1e-12 * scale;
    let max_pivots = 50 * (n + k) * n.max(k) + 1000;

    let mut u = vec![0.0; n];
    let mut v = vec![0.0; k];
    let mut degenerate_run = 0usize;
    let mut pivots = 0usize;

    loop {
        let tree = Tree::new(n, k, &basis);
        tree.potentials(cost, &basis, &mut u, &mut v);

        let bland = degenerate_run > n + k;
        let entering = price(cost, &u, &v, tol, bland, &tree);
        let Some((ei, ej)) = entering else { break };

        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::Solver(format!("transportation simplex exceeded {max_pivots} pivots")));
        }

        // Path in the tree from row node `ei` to column node `ej`; its cells
        // alternate -, +, -, ... starting next to the entering cell's row.
        let path = tree.path(ei, n + ej, &basis);
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for &c in path.iter().step_by(2) {
            let f = basis[c].flow;
            let better = f < theta
                || (f == theta && bland && cell_index(&basis[c], k) < cell_index(&basis[leave], k));
            if better {
                theta = f;
                leave = c;
            }
        }
        for (pos, &c) in path.iter().enumerate() {
            let cell = &mut basis[c];
            if pos % 2 == 0 {
                cell.flow = (cell.flow - theta).max(0.0);
            } else {
                cell.flow += theta;
            }
        }
        basis[leave] = Cell {
            row: ei,
            col: ej,
            flow: theta,
        };
        degenerate_run = if theta == 0.0 { degenerate_run + 1 } else { 0 };
    }

    let mut coupling = Array2::zeros((n, k));
    for c in &basis {
        coupling[[c.row, c.col]] = c.flow;
    }
    let objective = frobenius(&coupling, cost);
    Ok(TransportPlan {
        coupling,
        objective,
        converged: true,
        iterations: pivots,
        log_domain: false,
    })
}

fn cell_index(c: &Cell, k: usize) -> usize {
    c.row * k + c.col
}

/// Initial basic feasible solution; always yields `n + m - 1` cells forming a
/// staircase spanning tree.
fn northwest_corner(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> Vec<Cell> {
    let (n, k) = (a.len(), b.len());
    let mut ra = a.to_vec();
    let mut rb = b.to_vec();
    let mut cells = Vec::with_capacity(n + k - 1);
    let (mut i, mut j) = (0, 0);
    loop {
        let flow = ra[i].min(rb[j]).max(0.0);
        ra[i] -= flow;
        rb[j] -= flow;
        cells.push(Cell { row: i, col: j, flow });
        if i == n - 1 && j == k - 1 {
            break;
        }
        if i == n - 1 {
            j += 1;
        } else if j == k - 1 || ra[i] <= rb[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    cells
}

/// Returns the entering cell with negative reduced cost, if any.
fn price(cost: &Array2<f64>, u: &[f64], v: &[f64], tol: f64, bland: bool, tree: &Tree) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    let mut best_rc = -tol;
    for (i, &ui) in u.iter().enumerate() {
        for (j, &vj) in v.iter().enumerate() {
            let rc = cost[[i, j]] - ui - vj;
            if rc < best_rc && !tree.is_basic(i, j) {
                if bland {
                    return Some((i, j));
                }
                best_rc = rc;
                best = Some((i, j));
            }
        }
    }
    best
}

/// Adjacency view of the basis tree. Nodes `0..n` are rows, `n..n+m` columns.
struct Tree {
    n: usize,
    k: usize,
    adj: Vec<Vec<usize>>,
    basic: Vec<bool>,
}

impl Tree {
    fn new(n: usize, k: usize, basis: &[Cell]) -> Self {
        let mut adj = vec![Vec::with_capacity(4); n + k];
        let mut basic = vec![false; n * k];
        for (idx, c) in basis.iter().enumerate() {
            adj[c.row].push(idx);
            adj[n + c.col].push(idx);
            basic[c.row * k + c.col] = true;
        }
        Tree { n, k, adj, basic }
    }

    fn is_basic(&self, i: usize, j: usize) -> bool {
        self.basic[i * self.k + j]
    }

    fn other_end(&self, c: &Cell, node: usize) -> usize {
        if node < self.n {
            self.n + c.col
        } else {
            c.row
        }
    }

    /// Dual potentials with `u_0 = 0`.
    fn potentials(&self, cost: &Array2<f64>, basis: &[Cell], u: &mut [f64], v: &mut [f64]) {
        let mut seen = vec![false; self.n + self.k];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        u[0] = 0.0;
        while let Some(node) = queue.pop_front() {
            for &idx in &self.adj[node] {
                let c = &basis[idx];
                let next = self.other_end(c, node);
                if seen[next] {
                    continue;
                }
                seen[next] = true;
                let cij = cost[[c.row, c.col]];
                if next < self.n {
                    u[next] = cij - v[c.col];
                } else {
                    v[c.col] = cij - u[c.row];
                }
                queue.push_back(next);
            }
        }
    }

    /// Basis cell indices along the tree path from `from` to `to`, ordered
    /// starting at `from`.
    fn path(&self, from: usize, to: usize, basis: &[Cell]) -> Vec<usize> {
        let mut parent: Vec<Option<usize>> = vec![None; self.n + self.k];
        let mut seen = vec![false; self.n + self.k];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(node) = queue.pop_front() {
            if node == to {
                break;
            }
            for &idx in &self.adj[node] {
                let next = self.other_end(&basis[idx], node);
                if !seen[next] {
                    seen[next] = true;
                    parent[next] = Some(idx);
                    queue.push_back(next);
                }
            }
        }
        let mut cells = Vec::new();
        let mut node = to;
        while node != from {
            let idx = parent[node].expect("basis is a spanning tree");
            cells.push(idx);
            node = self.other_end(&basis[idx], node);
        }
        cells.reverse();
        cells
    }
}
