//! Dinic's max-flow on small integer networks. Arcs are scanned in
//! insertion order, so results are deterministic.

use std::collections::VecDeque;

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: u64,
}

#[derive(Debug, Clone)]
pub(crate) struct FlowNetwork {
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            arcs: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    /// Adds `from → to` and returns its id; the residual twin is `id ^ 1`.
    pub fn add_arc(&mut self, from: usize, to: usize, cap: u64) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { to, cap });
        self.adj[from].push(id);
        self.arcs.push(Arc { to: from, cap: 0 });
        self.adj[to].push(id + 1);
        id
    }

    /// Flow currently routed through arc `id`.
    pub fn flow(&self, id: usize) -> u64 {
        self.arcs[id ^ 1].cap
    }

    pub fn max_flow(&mut self, source: usize, sink: usize) -> u64 {
        let mut total = 0;
        loop {
            let level = self.levels(source);
            if level[sink] == usize::MAX {
                return total;
            }
            let mut next = vec![0usize; self.adj.len()];
            loop {
                let pushed = self.augment(source, sink, u64::MAX, &level, &mut next);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
    }

    fn levels(&self, source: usize) -> Vec<usize> {
        let mut level = vec![usize::MAX; self.adj.len()];
        level[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(x) = queue.pop_front() {
            for &a in &self.adj[x] {
                let arc = &self.arcs[a];
                if arc.cap > 0 && level[arc.to] == usize::MAX {
                    level[arc.to] = level[x] + 1;
                    queue.push_back(arc.to);
                }
            }
        }
        level
    }

    fn augment(&mut self, x: usize, sink: usize, limit: u64, level: &[usize], next: &mut [usize]) -> u64 {
        if x == sink {
            return limit;
        }
        while next[x] < self.adj[x].len() {
            let a = self.adj[x][next[x]];
            let (to, cap) = (self.arcs[a].to, self.arcs[a].cap);
            if cap > 0 && level[to] == level[x] + 1 {
                let pushed = self.augment(to, sink, limit.min(cap), level, next);
                if pushed > 0 {
                    self.arcs[a].cap -= pushed;
                    self.arcs[a ^ 1].cap += pushed;
                    return pushed;
                }
            }
            next[x] += 1;
        }
        0
    }
}

/// A maximum-cardinality matching of a bipartite multigraph, as edge indices
/// in increasing order.
pub(crate) fn maximum_matching(left: usize, right: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let source = left + right;
    let sink = source + 1;
    let mut net = FlowNetwork::new(left + right + 2);
    for v in 0..left {
        net.add_arc(source, v, 1);
    }
    let ids: Vec<usize> = edges
        .iter()
        .map(|&(v, u)| net.add_arc(v, left + u, 1))
        .collect();
    for u in 0..right {
        net.add_arc(left + u, sink, 1);
    }
    net.max_flow(source, sink);
    ids.iter()
        .enumerate()
        .filter(|(_, &id)| net.flow(id) > 0)
        .map(|(e, _)| e)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_sizes() {
        // path a0-b0-a1-b1: maximum matching has two edges
        let m = maximum_matching(2, 2, &[(0, 0), (1, 0), (1, 1)]);
        assert_eq!(m, vec![0, 2]);
        // star: one edge
        assert_eq!(maximum_matching(1, 3, &[(0, 0), (0, 1), (0, 2)]).len(), 1);
        assert!(maximum_matching(2, 2, &[]).is_empty());
    }

    #[test]
    fn capacities_respected() {
        let mut net = FlowNetwork::new(4);
        net.add_arc(0, 1, 3);
        net.add_arc(0, 2, 2);
        net.add_arc(1, 3, 2);
        net.add_arc(2, 3, 3);
        net.add_arc(1, 2, 5);
        assert_eq!(net.max_flow(0, 3), 5);
    }
}
