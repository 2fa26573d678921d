//! Hardware connectivity checks.

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::gates::{Circuit, GateInstance};

/// Undirected connectivity graph plus a logical-to-physical placement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingMap {
    pub nodes: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
    /// `logical_map[q]` is the physical node hosting circuit qubit `q`.
    pub logical_map: Vec<usize>,
}

/// A two-qubit interaction between physical nodes that share no edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub gate_index: usize,
    pub qubits: (usize, usize),
}

impl CouplingMap {
    pub fn new(
        nodes: Vec<usize>,
        edges: Vec<(usize, usize)>,
        logical_map: Vec<usize>,
    ) -> Result<Self> {
        let known: BTreeSet<usize> = nodes.iter().copied().collect();
        for &(a, b) in &edges {
            if !known.contains(&a) || !known.contains(&b) || a == b {
                return Err(Error::InvalidArgument(format!("bad edge ({a}, {b})")));
            }
        }
        let mut seen = BTreeSet::new();
        for &p in &logical_map {
            if !known.contains(&p) {
                return Err(Error::InvalidArgument(format!("node {p} not in map")));
            }
            if !seen.insert(p) {
                return Err(Error::InvalidArgument(format!("node {p} assigned twice")));
            }
        }
        Ok(CouplingMap {
            nodes,
            edges,
            logical_map,
        })
    }

    /// Seven nodes: system pairs (0,1) and (2,3) hang off work qubits 4 and
    /// 5, and both work qubits touch the flag 6. There is no 4–5 edge.
    pub fn seven_qubit_tree() -> Self {
        CouplingMap {
            nodes: (0..7).collect(),
            edges: vec![(0, 4), (1, 4), (2, 5), (3, 5), (4, 6), (5, 6)],
            logical_map: (0..7).collect(),
        }
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.edges
            .iter()
            .any(|&(x, y)| (x, y) == (a, b) || (y, x) == (a, b))
    }

    pub fn physical(&self, q: usize) -> Result<usize> {
        self.logical_map.get(q).copied().ok_or(Error::UnmappedQubit(q))
    }

    fn logical(&self, node: usize) -> Option<usize> {
        self.logical_map.iter().position(|&p| p == node)
    }

    /// Shortest node path from `a` to `b`, both ends included.
    pub fn path(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        let mut prev = std::collections::BTreeMap::new();
        let mut queue = VecDeque::from([a]);
        prev.insert(a, a);
        while let Some(x) = queue.pop_front() {
            if x == b {
                let mut p = vec![b];
                let mut cur = b;
                while cur != a {
                    cur = prev[&cur];
                    p.push(cur);
                }
                p.reverse();
                return Some(p);
            }
            for &(u, v) in &self.edges {
                let next = if u == x {
                    v
                } else if v == x {
                    u
                } else {
                    continue;
                };
                if let std::collections::btree_map::Entry::Vacant(e) = prev.entry(next) {
                    e.insert(x);
                    queue.push_back(next);
                }
            }
        }
        None
    }
}

/// Every qubit pair inside a multi-qubit gate whose nodes are not adjacent.
pub fn check_coupling(circuit: &Circuit, map: &CouplingMap) -> Result<Vec<Violation>> {
    let mut out = Vec::new();
    for (i, g) in circuit.gates().iter().enumerate() {
        let qs: Vec<usize> = g.qubits().collect();
        for (x, &a) in qs.iter().enumerate() {
            for &b in &qs[x + 1..] {
                if !map.adjacent(map.physical(a)?, map.physical(b)?) {
                    out.push(Violation {
                        gate_index: i,
                        qubits: (a.min(b), a.max(b)),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Naive router for circuits of 1- and 2-qubit gates: a non-adjacent gate is
/// bracketed by SWAP chains along a shortest path, each SWAP as three CNOTs.
/// Placement is restored after every gate.
pub fn route_with_swaps(circuit: &Circuit, map: &CouplingMap) -> Result<Circuit> {
    let mut out = Vec::with_capacity(circuit.len());
    for g in circuit.gates() {
        let qs: Vec<usize> = g.qubits().collect();
        if qs.len() > 2 {
            return Err(Error::UnsupportedGate(format!(
                "{}-qubit {} in routing",
                qs.len(),
                g.kind.name()
            )));
        }
        if qs.len() < 2 {
            out.push(g.clone());
            continue;
        }
        let (a, b) = (map.physical(qs[0])?, map.physical(qs[1])?);
        if map.adjacent(a, b) {
            out.push(g.clone());
            continue;
        }
        let path = map
            .path(a, b)
            .ok_or_else(|| Error::InvalidArgument(format!("nodes {a} and {b} are disconnected")))?;
        let hop: Vec<usize> = path
            .iter()
            .map(|&p| map.logical(p).ok_or(Error::UnmappedQubit(p)))
            .collect::<Result<_>>()?;
        let mut chain = Vec::new();
        for w in hop[..hop.len() - 1].windows(2) {
            chain.extend(swap_as_cx(w[0], w[1]));
        }
        let moved = hop[hop.len() - 2];
        let relabel = |q: usize| if q == qs[0] { moved } else { q };
        let mut moved_gate: GateInstance = g.clone();
        moved_gate.targets.iter_mut().for_each(|t| *t = relabel(*t));
        moved_gate
            .controls
            .iter_mut()
            .for_each(|c| c.qubit = relabel(c.qubit));
        out.extend(chain.iter().cloned());
        out.push(moved_gate);
        out.extend(chain.into_iter().rev());
    }
    Ok(circuit.with_gates(out))
}

fn swap_as_cx(a: usize, b: usize) -> [GateInstance; 3] {
    [GateInstance::cx(a, b), GateInstance::cx(b, a), GateInstance::cx(a, b)]
}
