//! Connectivity class and periodicity of the influence network.
//!
//! The network has an edge `i -> j` iff `w_ij > 0`. Periods are computed
//! structurally: for a strongly connected component, BFS levels `l` from
//! any root give the period as `gcd(l(u) + 1 - l(v))` over the component's
//! edges `u -> v`.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use petgraph::algo::{connected_components, tarjan_scc};
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;

use crate::matrix::InfluenceMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Connectivity {
    /// One strongly connected component.
    Strong,
    /// Not strong, but the condensation is a single directed path.
    Unilateral,
    /// Connected as an undirected graph only.
    Weak,
    Disconnected,
}

/// A strongly connected component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Component {
    /// Sorted node indices.
    pub nodes: Vec<usize>,
    /// No edge leaves the component (a closed class of `W`).
    pub terminal: bool,
    /// gcd of cycle lengths; 0 for a single node without a self-loop.
    pub period: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructureClass {
    pub connectivity: Connectivity,
    /// Every terminal component has period 1. For a strong structure this is
    /// ordinary aperiodicity of `W`.
    pub aperiodic: bool,
    pub has_positive_diagonal: bool,
    /// Components in topological order (sources first).
    pub components: Vec<Component>,
}

impl StructureClass {
    pub fn is_strong(&self) -> bool {
        self.connectivity == Connectivity::Strong
    }

    /// Irreducible and aperiodic: the Perron-Frobenius case.
    pub fn is_primitive(&self) -> bool {
        self.is_strong() && self.aperiodic
    }

    pub fn terminal_components(&self) -> impl Iterator<Item = &Component> {
        self.components.iter().filter(|c| c.terminal)
    }

    /// Human-readable summary, e.g. `"strong, aperiodic"` or
    /// `"unilateral, terminal periods [2]"`.
    pub fn describe(&self) -> String {
        let conn = match self.connectivity {
            Connectivity::Strong => "strong",
            Connectivity::Unilateral => "unilateral",
            Connectivity::Weak => "weak",
            Connectivity::Disconnected => "disconnected",
        };
        let periods: Vec<usize> = self.terminal_components().map(|c| c.period).collect();
        if self.is_strong() {
            if self.aperiodic {
                format!("{conn}, aperiodic")
            } else {
                format!("{conn}, period {}", periods[0])
            }
        } else {
            format!("{conn}, terminal periods {periods:?}")
        }
    }
}

pub fn structure_class(w: &InfluenceMatrix) -> StructureClass {
    analyze(w.as_matrix())
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Structural analysis of the digraph with an edge `i -> j` iff `m[(i, j)] > 0`.
pub(crate) fn analyze(m: &DMatrix<f64>) -> StructureClass {
    let n = m.nrows();
    let mut graph = DiGraph::<(), ()>::with_capacity(n, n);
    let idx: Vec<NodeIndex> = (0..n).map(|_| graph.add_node(())).collect();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if m[(i, j)] > 0.0 {
                graph.add_edge(idx[i], idx[j], ());
                succ[i].push(j);
            }
        }
    }

    // tarjan_scc yields components in reverse topological order.
    let mut sccs = tarjan_scc(&graph);
    sccs.reverse();
    let mut comp_of = vec![0usize; n];
    for (c, nodes) in sccs.iter().enumerate() {
        for v in nodes {
            comp_of[v.index()] = c;
        }
    }

    let components: Vec<Component> = sccs
        .iter()
        .enumerate()
        .map(|(c, members)| {
            let mut nodes: Vec<usize> = members.iter().map(|v| v.index()).collect();
            nodes.sort_unstable();
            let terminal = nodes
                .iter()
                .all(|&u| succ[u].iter().all(|&v| comp_of[v] == c));
            let period = component_period(&nodes, &succ, &comp_of, c);
            Component {
                nodes,
                terminal,
                period,
            }
        })
        .collect();

    let connectivity = if components.len() <= 1 {
        Connectivity::Strong
    } else if condensation_is_path(&components, &succ, &comp_of) {
        Connectivity::Unilateral
    } else if connected_components(&graph) == 1 {
        Connectivity::Weak
    } else {
        Connectivity::Disconnected
    };

    let aperiodic = components
        .iter()
        .filter(|c| c.terminal)
        .all(|c| c.period == 1);
    let has_positive_diagonal = (0..n).any(|i| m[(i, i)] > 0.0);

    StructureClass {
        connectivity,
        aperiodic,
        has_positive_diagonal,
        components,
    }
}

fn component_period(nodes: &[usize], succ: &[Vec<usize>], comp_of: &[usize], c: usize) -> usize {
    let root = nodes[0];
    let mut level = vec![usize::MAX; succ.len()];
    level[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut g = 0usize;
    while let Some(u) = queue.pop_front() {
        let lu = level[u];
        for &v in &succ[u] {
            if comp_of[v] != c {
                continue;
            }
            if level[v] == usize::MAX {
                level[v] = lu + 1;
                queue.push_back(v);
            } else {
                g = gcd(g, (lu + 1).abs_diff(level[v]));
            }
        }
    }
    g
}

/// With components in topological order, the condensation is a single path
/// iff each component has an edge into the next one.
fn condensation_is_path(components: &[Component], succ: &[Vec<usize>], comp_of: &[usize]) -> bool {
    components.windows(2).enumerate().all(|(c, pair)| {
        pair[0]
            .nodes
            .iter()
            .any(|&u| succ[u].iter().any(|&v| comp_of[v] == c + 1))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(rows: &[&[f64]]) -> InfluenceMatrix {
        InfluenceMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn two_cycle_is_strong_with_period_two() {
        let s = structure_class(&w(&[&[0.0, 1.0], &[1.0, 0.0]]));
        assert_eq!(s.connectivity, Connectivity::Strong);
        assert!(!s.aperiodic);
        assert!(!s.has_positive_diagonal);
        assert_eq!(s.components[0].period, 2);
        assert_eq!(s.describe(), "strong, period 2");
    }

    #[test]
    fn self_loop_makes_strong_structure_aperiodic() {
        let s = structure_class(&w(&[&[0.5, 0.5], &[1.0, 0.0]]));
        assert_eq!(s.connectivity, Connectivity::Strong);
        assert!(s.aperiodic);
        assert!(s.has_positive_diagonal);
        assert!(s.is_primitive());
    }

    #[test]
    fn one_way_reachability_is_unilateral() {
        let s = structure_class(&w(&[&[1.0, 0.0], &[0.5, 0.5]]));
        assert_eq!(s.connectivity, Connectivity::Unilateral);
        // node 2 (index 1) is transient, node 1 is the closed class
        assert_eq!(s.components.len(), 2);
        assert_eq!(s.components[0].nodes, vec![1]);
        assert!(!s.components[0].terminal);
        assert_eq!(s.components[1].nodes, vec![0]);
        assert!(s.components[1].terminal);
        assert!(s.aperiodic);
    }

    #[test]
    fn two_sources_into_one_sink_is_weak() {
        let s = structure_class(&w(&[&[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]]));
        assert_eq!(s.connectivity, Connectivity::Weak);
    }

    #[test]
    fn identity_is_disconnected() {
        let s = structure_class(&InfluenceMatrix::identity(3));
        assert_eq!(s.connectivity, Connectivity::Disconnected);
        assert!(s.aperiodic);
        assert_eq!(s.components.len(), 3);
    }

    #[test]
    fn three_cycle_with_chord_has_period_one() {
        // cycles of length 3 and 2 -> gcd 1
        let s = structure_class(&w(&[&[0.0, 1.0, 0.0], &[0.5, 0.0, 0.5], &[1.0, 0.0, 0.0]]));
        assert!(s.is_primitive());
    }

    #[test]
    fn single_node() {
        let s = structure_class(&InfluenceMatrix::identity(1));
        assert!(s.is_primitive());
    }
}
