use ndarray::Array2;

use super::{DirectedRoadGraph, GraphError};

/// The five three-node motifs built only from unidirectional edges.
///
/// Templates are written on abstract nodes `0, 1, 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MotifClass {
    /// `0 -> 1 -> 2 -> 0`
    Cycle,
    /// `0 -> 1`, `0 -> 2`, `1 -> 2`
    FeedForward,
    /// `0 -> 1`, `0 -> 2`
    OutFan,
    /// `1 -> 0`, `2 -> 0`
    InFan,
    /// `0 -> 1 -> 2`
    Path,
}

impl MotifClass {
    pub const ALL: [MotifClass; 5] = [
        MotifClass::Cycle,
        MotifClass::FeedForward,
        MotifClass::OutFan,
        MotifClass::InFan,
        MotifClass::Path,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            MotifClass::Cycle => "cycle",
            MotifClass::FeedForward => "feed_forward",
            MotifClass::OutFan => "out_fan",
            MotifClass::InFan => "in_fan",
            MotifClass::Path => "path",
        }
    }

    pub fn edge_pattern(self) -> &'static [(usize, usize)] {
        match self {
            MotifClass::Cycle => &[(0, 1), (1, 2), (2, 0)],
            MotifClass::FeedForward => &[(0, 1), (0, 2), (1, 2)],
            MotifClass::OutFan => &[(0, 1), (0, 2)],
            MotifClass::InFan => &[(1, 0), (2, 0)],
            MotifClass::Path => &[(0, 1), (1, 2)],
        }
    }

    /// Classifies the induced subgraph on three distinct nodes. Returns `None`
    /// when the triple is disconnected, has a single edge, or contains a
    /// reciprocal pair.
    pub fn classify(graph: &DirectedRoadGraph, nodes: [usize; 3]) -> Option<MotifClass> {
        let mut out_deg = [0u8; 3];
        let mut in_deg = [0u8; 3];
        let mut edges = 0;
        for a in 0..3 {
            for b in (a + 1)..3 {
                let ab = graph.has_edge(nodes[a], nodes[b]);
                let ba = graph.has_edge(nodes[b], nodes[a]);
                match (ab, ba) {
                    (true, true) => return None,
                    (true, false) => {
                        out_deg[a] += 1;
                        in_deg[b] += 1;
                        edges += 1;
                    }
                    (false, true) => {
                        out_deg[b] += 1;
                        in_deg[a] += 1;
                        edges += 1;
                    }
                    (false, false) => {}
                }
            }
        }
        match edges {
            3 if out_deg.iter().all(|&d| d == 1) => Some(MotifClass::Cycle),
            3 => Some(MotifClass::FeedForward),
            2 if out_deg.contains(&2) => Some(MotifClass::OutFan),
            2 if in_deg.contains(&2) => Some(MotifClass::InFan),
            2 => Some(MotifClass::Path),
            _ => None,
        }
    }
}

/// Per-motif edge participation counts and their sum `W_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct MotifAdjacency {
    per_motif: Vec<Array2<u32>>,
    weights: Array2<u32>,
}

impl MotifAdjacency {
    pub fn node_count(&self) -> usize {
        self.weights.nrows()
    }

    /// `W_M`, generally asymmetric.
    pub fn weights(&self) -> &Array2<u32> {
        &self.weights
    }

    pub fn per_motif(&self, class: MotifClass) -> &Array2<u32> {
        &self.per_motif[class.index()]
    }

    pub fn weights_f64(&self) -> Array2<f64> {
        self.weights.mapv(f64::from)
    }

    /// CSV with one row per node and one integer column per node.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.weights.rows() {
            let line: Vec<String> = row.iter().map(|w| w.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Counts, for every directed edge, how many motif instances of each class it
/// belongs to, and sums the classes into `W_M`.
///
/// A node triple is an instance of a class when its induced subgraph is
/// isomorphic to that class's template; every edge of the triple then gains
/// one count. Triples are enumerated from a center node and pairs of its
/// neighbors, so the cost is proportional to the sum of squared degrees.
pub fn count_motif_participation(
    graph: &DirectedRoadGraph,
) -> Result<MotifAdjacency, GraphError> {
    let n = graph.node_count();
    if n < 2 {
        return Err(GraphError::TooFewNodes {
            required: 2,
            got: n,
        });
    }
    let mut per_motif = vec![Array2::<u32>::zeros((n, n)); MotifClass::ALL.len()];
    let neighbors: Vec<Vec<usize>> = (0..n).map(|v| graph.undirected_neighbors(v)).collect();
    let connected = |a: usize, b: usize| graph.has_edge(a, b) || graph.has_edge(b, a);

    for (center, nb) in neighbors.iter().enumerate() {
        for (ia, &a) in nb.iter().enumerate() {
            for &b in &nb[ia + 1..] {
                // A triangle is reachable from all three centers; keep only the
                // smallest one.
                if connected(a, b) && center > a.min(b) {
                    continue;
                }
                let nodes = [center, a, b];
                let Some(class) = MotifClass::classify(graph, nodes) else {
                    continue;
                };
                let counts = &mut per_motif[class.index()];
                for &x in &nodes {
                    for &y in &nodes {
                        if x != y && graph.has_edge(x, y) {
                            counts[[x, y]] += 1;
                        }
                    }
                }
            }
        }
    }

    let mut weights = Array2::<u32>::zeros((n, n));
    for counts in &per_motif {
        weights += counts;
    }
    Ok(MotifAdjacency { per_motif, weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(adj: &MotifAdjacency, class: MotifClass, s: usize, t: usize) -> u32 {
        adj.per_motif(class)[[s, t]]
    }

    #[test]
    fn path_of_two_edges() {
        let g = DirectedRoadGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let adj = count_motif_participation(&g).unwrap();
        for class in [
            MotifClass::Cycle,
            MotifClass::FeedForward,
            MotifClass::OutFan,
            MotifClass::InFan,
        ] {
            assert_eq!(adj.per_motif(class).sum(), 0, "{class:?}");
        }
        assert_eq!(counts(&adj, MotifClass::Path, 0, 1), 1);
        assert_eq!(counts(&adj, MotifClass::Path, 1, 2), 1);
        assert_eq!(adj.weights()[[0, 1]], 1);
        assert_eq!(adj.weights()[[1, 2]], 1);
        assert_eq!(adj.weights().sum(), 2);
    }

    #[test]
    fn three_cycle_is_a_single_induced_cycle() {
        let g = DirectedRoadGraph::from_edges(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        let adj = count_motif_participation(&g).unwrap();
        for (s, t) in g.edges() {
            assert_eq!(counts(&adj, MotifClass::Cycle, s, t), 1);
            assert_eq!(counts(&adj, MotifClass::Path, s, t), 0);
            assert_eq!(adj.weights()[[s, t]], 1);
        }
    }

    #[test]
    fn fans_and_feed_forward() {
        let out_fan = DirectedRoadGraph::from_edges(3, [(0, 1), (0, 2)]).unwrap();
        let adj = count_motif_participation(&out_fan).unwrap();
        assert_eq!(adj.per_motif(MotifClass::OutFan).sum(), 2);

        let in_fan = DirectedRoadGraph::from_edges(3, [(1, 0), (2, 0)]).unwrap();
        let adj = count_motif_participation(&in_fan).unwrap();
        assert_eq!(adj.per_motif(MotifClass::InFan).sum(), 2);

        let ff = DirectedRoadGraph::from_edges(3, [(0, 1), (0, 2), (1, 2)]).unwrap();
        let adj = count_motif_participation(&ff).unwrap();
        assert_eq!(adj.per_motif(MotifClass::FeedForward).sum(), 3);
        assert_eq!(adj.weights().sum(), 3);
    }

    #[test]
    fn reciprocal_pairs_match_no_template() {
        let g = DirectedRoadGraph::from_edges(3, [(0, 1), (1, 0), (1, 2)]).unwrap();
        let adj = count_motif_participation(&g).unwrap();
        assert_eq!(adj.weights().sum(), 0);
    }

    #[test]
    fn edgeless_graph_gives_zero_matrix() {
        let g = DirectedRoadGraph::new(5);
        let adj = count_motif_participation(&g).unwrap();
        assert_eq!(adj.weights(), &Array2::<u32>::zeros((5, 5)));
    }

    #[test]
    fn rejects_tiny_graphs() {
        assert!(count_motif_participation(&DirectedRoadGraph::new(1)).is_err());
    }

    #[test]
    fn templates_classify_as_themselves() {
        for class in MotifClass::ALL {
            let g = DirectedRoadGraph::from_edges(3, class.edge_pattern().iter().copied()).unwrap();
            assert_eq!(MotifClass::classify(&g, [0, 1, 2]), Some(class));
            assert_eq!(MotifClass::classify(&g, [2, 0, 1]), Some(class));
        }
    }

    #[test]
    fn csv_export_shape() {
        let g = DirectedRoadGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let csv = count_motif_participation(&g).unwrap().to_csv();
        assert_eq!(csv, "0,1,0\n0,0,1\n0,0,0\n");
    }
}
