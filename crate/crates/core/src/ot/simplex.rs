//! Transportation simplex on a dense bipartite graph.
//!
//! Sources `0..m` carry supplies, sinks `0..n` carry demands (both summing to
//! one). The basis is a spanning tree over the `m + n` nodes, initialized by
//! the northwest-corner rule. Pricing uses a block search with a rotating
//! cursor; after a run of degenerate pivots the entering rule falls back to
//! Bland's first-negative order, which breaks cycles.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct BasicArc {
    src: usize,
    snk: usize,
    flow: f64,
}

pub(crate) struct SimplexOutcome {
    /// Basic arcs with positive flow, as `(source, sink, flow)`.
    pub flows: Vec<(usize, usize, f64)>,
    pub cost: f64,
    pub iterations: usize,
    pub basis_size: usize,
    pub source_potentials: Vec<f64>,
    pub sink_potentials: Vec<f64>,
}

pub(crate) fn solve<F>(
    supplies: &[f64],
    demands: &[f64],
    cost: F,
    max_pivots: usize,
) -> Result<SimplexOutcome>
where
    F: Fn(usize, usize) -> f64,
{
    let m = supplies.len();
    let n = demands.len();
    assert!(m > 0 && n > 0);

    let mut state = State::northwest(supplies, demands);
    let mut pricing = Pricing::new(m, n);
    let mut iterations = 0usize;
    let mut degenerate_run = 0usize;

    loop {
        state.refresh_potentials(&cost);
        let bland = degenerate_run > m + n;
        let Some((ei, ej)) = pricing.entering(&mut state, &cost, bland) else {
            break;
        };
        let theta = state.pivot(ei, ej, &cost);
        iterations += 1;
        if theta > 0.0 {
            degenerate_run = 0;
        } else {
            degenerate_run += 1;
        }
        if iterations > max_pivots {
            return Err(Error::BudgetExceeded(format!(
                "transport simplex exceeded {max_pivots} pivots on a {m} x {n} instance"
            )));
        }
    }

    let mut total = 0.0;
    let mut flows = Vec::new();
    for arc in &state.basis {
        total += arc.flow * cost(arc.src, arc.snk);
        if arc.flow > 1e-16 {
            flows.push((arc.src, arc.snk, arc.flow));
        }
    }
    Ok(SimplexOutcome {
        flows,
        cost: total,
        iterations,
        basis_size: state.basis.len(),
        source_potentials: state.potentials[..m].to_vec(),
        sink_potentials: state.potentials[m..].to_vec(),
    })
}

struct State {
    m: usize,
    n: usize,
    basis: Vec<BasicArc>,
    /// Arc indices incident to each node (sources first, then sinks).
    adjacency: Vec<Vec<usize>>,
    /// Dual variables: `potentials[i] + potentials[m + j] = c(i, j)` on basis arcs.
    potentials: Vec<f64>,
    cost_scale: f64,
}

impl State {
    /// Northwest-corner initial basis: exactly `m + n - 1` arcs forming a
    /// staircase spanning tree with nonnegative flows.
    fn northwest(supplies: &[f64], demands: &[f64]) -> Self {
        let m = supplies.len();
        let n = demands.len();
        let mut rem_a = supplies.to_vec();
        let mut rem_b = demands.to_vec();
        let mut basis = Vec::with_capacity(m + n - 1);
        let (mut i, mut j) = (0usize, 0usize);
        loop {
            let f = rem_a[i].min(rem_b[j]).max(0.0);
            basis.push(BasicArc { src: i, snk: j, flow: f });
            rem_a[i] -= f;
            rem_b[j] -= f;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if (rem_a[i] <= rem_b[j] && i < m - 1) || j == n - 1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        debug_assert_eq!(basis.len(), m + n - 1);
        let mut state = Self {
            m,
            n,
            basis,
            adjacency: vec![Vec::new(); m + n],
            potentials: vec![0.0; m + n],
            cost_scale: 1.0,
        };
        state.rebuild_adjacency();
        state
    }

    fn rebuild_adjacency(&mut self) {
        for list in &mut self.adjacency {
            list.clear();
        }
        for (idx, arc) in self.basis.iter().enumerate() {
            self.adjacency[arc.src].push(idx);
            self.adjacency[self.m + arc.snk].push(idx);
        }
    }

    /// Recompute duals by walking the spanning tree from source 0.
    fn refresh_potentials<F: Fn(usize, usize) -> f64>(&mut self, cost: &F) {
        let total = self.m + self.n;
        let mut seen = vec![false; total];
        let mut stack = Vec::with_capacity(total);
        self.potentials[0] = 0.0;
        seen[0] = true;
        stack.push(0usize);
        while let Some(node) = stack.pop() {
            for &aidx in &self.adjacency[node] {
                let arc = self.basis[aidx];
                let (a, b) = (arc.src, self.m + arc.snk);
                let other = if node == a { b } else { a };
                if !seen[other] {
                    seen[other] = true;
                    self.potentials[other] = cost(arc.src, arc.snk) - self.potentials[node];
                    stack.push(other);
                }
            }
        }
        debug_assert!(seen.iter().all(|&s| s), "basis must span all nodes");
    }

    fn reduced<F: Fn(usize, usize) -> f64>(&mut self, i: usize, j: usize, cost: &F) -> f64 {
        let c = cost(i, j);
        if c.abs() > self.cost_scale {
            self.cost_scale = c.abs();
        }
        c - self.potentials[i] - self.potentials[self.m + j]
    }

    fn entering_tol(&self) -> f64 {
        1e-11 * self.cost_scale
    }

    /// Bring arc `(ei, ej)` into the basis; returns the flow shifted around
    /// the induced cycle.
    fn pivot<F: Fn(usize, usize) -> f64>(&mut self, ei: usize, ej: usize, _cost: &F) -> f64 {
        // tree path from source ei to sink ej
        let total = self.m + self.n;
        let target = self.m + ej;
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; total]; // (node, arc idx)
        let mut seen = vec![false; total];
        let mut stack = vec![ei];
        seen[ei] = true;
        while let Some(node) = stack.pop() {
            if node == target {
                break;
            }
            for &aidx in &self.adjacency[node] {
                let arc = self.basis[aidx];
                let (a, b) = (arc.src, self.m + arc.snk);
                let other = if node == a { b } else { a };
                if !seen[other] {
                    seen[other] = true;
                    parent[other] = Some((node, aidx));
                    stack.push(other);
                }
            }
        }
        // walk back from the sink; arcs alternate -theta, +theta
        let mut path = Vec::new();
        let mut node = target;
        while node != ei {
            let (prev, aidx) = parent[node].expect("path must reach the entering source");
            path.push(aidx);
            node = prev;
        }
        let mut theta = f64::INFINITY;
        let mut leaving: Option<usize> = None;
        for (t, &aidx) in path.iter().enumerate() {
            if t % 2 == 0 {
                let f = self.basis[aidx].flow;
                // deterministic tie break: smallest basis index
                if f < theta - 1e-18 || (f <= theta + 1e-18 && leaving.is_none_or(|l| aidx < l))
                {
                    theta = f;
                    leaving = Some(aidx);
                }
            }
        }
        let theta = theta.max(0.0);
        for (t, &aidx) in path.iter().enumerate() {
            if t % 2 == 0 {
                self.basis[aidx].flow = (self.basis[aidx].flow - theta).max(0.0);
            } else {
                self.basis[aidx].flow += theta;
            }
        }
        let leaving = leaving.expect("cycle must contain a leaving arc");
        self.basis[leaving] = BasicArc { src: ei, snk: ej, flow: theta };
        self.rebuild_adjacency();
        theta
    }
}

/// Rotating block search over the dense arc set.
struct Pricing {
    m: usize,
    n: usize,
    cursor: usize,
    block: usize,
}

impl Pricing {
    fn new(m: usize, n: usize) -> Self {
        let arcs = m * n;
        let block = ((arcs as f64).sqrt() as usize).clamp(64, 8192).min(arcs);
        Self { m, n, cursor: 0, block }
    }

    fn entering<F: Fn(usize, usize) -> f64>(
        &mut self,
        state: &mut State,
        cost: &F,
        bland: bool,
    ) -> Option<(usize, usize)> {
        let arcs = self.m * self.n;
        let tol = state.entering_tol();
        if bland {
            // first negative reduced cost in fixed order
            for a in 0..arcs {
                let (i, j) = (a / self.n, a % self.n);
                if state.reduced(i, j, cost) < -tol {
                    return Some((i, j));
                }
            }
            return None;
        }
        let mut scanned = 0usize;
        while scanned < arcs {
            let mut best: Option<(usize, usize, f64)> = None;
            let upto = self.block.min(arcs - scanned);
            for k in 0..upto {
                let a = (self.cursor + k) % arcs;
                let (i, j) = (a / self.n, a % self.n);
                let r = state.reduced(i, j, cost);
                if r < -tol && best.is_none_or(|(_, _, br)| r < br) {
                    best = Some((i, j, r));
                }
            }
            self.cursor = (self.cursor + upto) % arcs;
            scanned += upto;
            if let Some((i, j, _)) = best {
                return Some((i, j));
            }
        }
        None
    }
}
