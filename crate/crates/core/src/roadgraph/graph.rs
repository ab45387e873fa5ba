use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;

use super::GraphError;

/// Unweighted directed graph over road segments.
///
/// Node `i` is a unidirectional road segment; an edge `(i, j)` means traffic
/// leaving segment `i` can enter segment `j`. Self-loops are rejected, so the
/// adjacency diagonal is always zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedRoadGraph {
    node_count: usize,
    edges: BTreeSet<(usize, usize)>,
    out_neighbors: Vec<Vec<usize>>,
    in_neighbors: Vec<Vec<usize>>,
}

impl DirectedRoadGraph {
    pub fn new(node_count: usize) -> Self {
        Self {
            node_count,
            edges: BTreeSet::new(),
            out_neighbors: vec![Vec::new(); node_count],
            in_neighbors: vec![Vec::new(); node_count],
        }
    }

    /// Builds a graph from `(source, target)` pairs. Duplicate pairs collapse
    /// into a single edge.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut graph = Self::new(node_count);
        for (s, t) in edges {
            graph.add_edge(s, t)?;
        }
        Ok(graph)
    }

    pub fn add_edge(&mut self, source: usize, target: usize) -> Result<(), GraphError> {
        if source >= self.node_count || target >= self.node_count {
            return Err(GraphError::NodeOutOfRange {
                source_id: source,
                target,
                node_count: self.node_count,
            });
        }
        if source == target {
            return Err(GraphError::SelfLoop(source));
        }
        if self.edges.insert((source, target)) {
            insert_sorted(&mut self.out_neighbors[source], target);
            insert_sorted(&mut self.in_neighbors[target], source);
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, source: usize, target: usize) -> bool {
        self.edges.contains(&(source, target))
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn out_neighbors(&self, node: usize) -> &[usize] {
        &self.out_neighbors[node]
    }

    pub fn in_neighbors(&self, node: usize) -> &[usize] {
        &self.in_neighbors[node]
    }

    /// Nodes joined to `node` by an edge in either direction, sorted.
    pub fn undirected_neighbors(&self, node: usize) -> Vec<usize> {
        let mut all: Vec<usize> = self.out_neighbors[node]
            .iter()
            .chain(self.in_neighbors[node].iter())
            .copied()
            .collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    /// Binary adjacency matrix `A` with `A[i, j] = 1` iff `(i, j)` is an edge.
    pub fn adjacency(&self) -> Array2<u8> {
        let mut a = Array2::zeros((self.node_count, self.node_count));
        for &(s, t) in &self.edges {
            a[[s, t]] = 1;
        }
        a
    }

    /// Relabels nodes so that old node `i` becomes `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self, GraphError> {
        if perm.len() != self.node_count {
            return Err(GraphError::BadPermutation {
                expected: self.node_count,
                got: perm.len(),
            });
        }
        let mut seen = vec![false; self.node_count];
        for &p in perm {
            if p >= self.node_count || seen[p] {
                return Err(GraphError::BadPermutation {
                    expected: self.node_count,
                    got: perm.len(),
                });
            }
            seen[p] = true;
        }
        Self::from_edges(
            self.node_count,
            self.edges.iter().map(|&(s, t)| (perm[s], perm[t])),
        )
    }

    /// Parses the `source_id,target_id` edge-list format. Blank lines and
    /// `#` comments are skipped. When `node_count` is `None` it is inferred
    /// as one past the largest id.
    pub fn parse_edge_list(text: &str, node_count: Option<usize>) -> Result<Self, GraphError> {
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',').map(str::trim);
            let parse = |f: Option<&str>| -> Result<usize, GraphError> {
                let f = f.ok_or_else(|| GraphError::Parse {
                    line: line_no,
                    message: "expected `source_id,target_id`".into(),
                })?;
                f.parse::<usize>().map_err(|e| GraphError::Parse {
                    line: line_no,
                    message: format!("bad node id {f:?}: {e}"),
                })
            };
            let s = parse(fields.next())?;
            let t = parse(fields.next())?;
            if fields.next().is_some() {
                return Err(GraphError::Parse {
                    line: line_no,
                    message: "too many fields".into(),
                });
            }
            pairs.push((s, t));
        }
        let inferred = pairs.iter().map(|&(s, t)| s.max(t) + 1).max().unwrap_or(0);
        let n = node_count.unwrap_or(inferred);
        Self::from_edges(n, pairs)
    }

    pub fn read_edge_list(path: &Path, node_count: Option<usize>) -> Result<Self, GraphError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_edge_list(&text, node_count)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# {} nodes\n", self.node_count);
        for (s, t) in self.edges() {
            let _ = writeln!(out, "{s},{t}");
        }
        out
    }
}

fn insert_sorted(v: &mut Vec<usize>, x: usize) {
    if let Err(pos) = v.binary_search(&x) {
        v.insert(pos, x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_self_loops_and_out_of_range() {
        assert!(matches!(
            DirectedRoadGraph::from_edges(3, [(1, 1)]),
            Err(GraphError::SelfLoop(1))
        ));
        assert!(matches!(
            DirectedRoadGraph::from_edges(3, [(0, 3)]),
            Err(GraphError::NodeOutOfRange { .. })
        ));
    }

    #[test]
    fn adjacency_matches_edges() {
        let g = DirectedRoadGraph::from_edges(3, [(0, 1), (1, 2), (0, 1)]).unwrap();
        assert_eq!(g.edge_count(), 2);
        let a = g.adjacency();
        for i in 0..3 {
            assert_eq!(a[[i, i]], 0);
            for j in 0..3 {
                assert_eq!(a[[i, j]] == 1, g.has_edge(i, j));
            }
        }
    }

    #[test]
    fn edge_list_round_trip_and_comments() {
        let text = "# road graph\n0,1\n\n1, 2  # trailing comment\n2,0\n";
        let g = DirectedRoadGraph::parse_edge_list(text, None).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2), (2, 0)]);
        let back = DirectedRoadGraph::parse_edge_list(&g.to_edge_list(), Some(3)).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn edge_list_errors_carry_line_numbers() {
        let err = DirectedRoadGraph::parse_edge_list("0,1\n1;2\n", None).unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn relabel_rejects_non_permutations() {
        let g = DirectedRoadGraph::from_edges(3, [(0, 1)]).unwrap();
        assert!(g.relabel(&[0, 0, 1]).is_err());
        let r = g.relabel(&[2, 0, 1]).unwrap();
        assert!(r.has_edge(2, 0));
    }
}
