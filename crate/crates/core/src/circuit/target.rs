use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::gate::GateName;
use crate::error::{Error, Result};

/// Device constraints: a coupling graph and a native gate set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Target {
    /// Undirected coupled pairs stored as `(min, max)`. Empty means all-to-all.
    pub coupling: BTreeSet<(usize, usize)>,
    pub native_gates: BTreeSet<GateName>,
}

impl Target {
    pub fn new(
        coupling: impl IntoIterator<Item = (usize, usize)>,
        native_gates: impl IntoIterator<Item = GateName>,
    ) -> Result<Target> {
        let mut edges = BTreeSet::new();
        for (a, b) in coupling {
            if a == b {
                return Err(Error::invalid(format!("self-loop ({a}, {b}) in coupling map")));
            }
            edges.insert((a.min(b), a.max(b)));
        }
        let t = Target {
            coupling: edges,
            native_gates: native_gates.into_iter().collect(),
        };
        if !t.is_connected() {
            return Err(Error::invalid("coupling graph is not connected"));
        }
        Ok(t)
    }

    pub fn all_to_all(native_gates: impl IntoIterator<Item = GateName>) -> Target {
        Target {
            coupling: BTreeSet::new(),
            native_gates: native_gates.into_iter().collect(),
        }
    }

    /// `{CX, Rz, SX, X}`.
    pub fn ibm_native() -> BTreeSet<GateName> {
        [GateName::CX, GateName::Rz, GateName::SX, GateName::X]
            .into_iter()
            .collect()
    }

    /// Seven-qubit heavy-hex fragment used by the lagos/casablanca devices.
    pub fn lagos() -> Target {
        Target::new(
            [(0, 1), (1, 2), (1, 3), (3, 5), (4, 5), (5, 6)],
            Self::ibm_native(),
        )
        .expect("static coupling map is connected")
    }

    pub fn is_all_to_all(&self) -> bool {
        self.coupling.is_empty()
    }

    pub fn is_native(&self, g: GateName) -> bool {
        self.native_gates.contains(&g)
    }

    /// Physical qubits present in the coupling map.
    pub fn vertices(&self) -> BTreeSet<usize> {
        self.coupling.iter().flat_map(|&(a, b)| [a, b]).collect()
    }

    pub fn adjacency(&self) -> BTreeMap<usize, BTreeSet<usize>> {
        let mut adj: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for &(a, b) in &self.coupling {
            adj.entry(a).or_default().insert(b);
            adj.entry(b).or_default().insert(a);
        }
        adj
    }

    fn is_connected(&self) -> bool {
        let verts = self.vertices();
        let Some(&start) = verts.iter().next() else {
            return true;
        };
        let adj = self.adjacency();
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[&v] {
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        seen.len() == verts.len()
    }
}
