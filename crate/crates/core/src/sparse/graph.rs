use crate::algebra::SubsetMask;
use crate::model::{support, Model, ObservationSeq};
use crate::scalar::Scalar;

/// Undirected graph on observation positions; `i` and `j` are adjacent when
/// some cause can emit both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InteractionGraph {
    adjacency: Vec<SubsetMask>,
}

impl InteractionGraph {
    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        assert!(n <= crate::algebra::MAX_POSITIONS);
        InteractionGraph {
            adjacency: vec![SubsetMask::EMPTY; n],
        }
    }

    pub fn from_edges<I: IntoIterator<Item = (usize, usize)>>(n: usize, edges: I) -> Self {
        let mut g = Self::empty(n);
        for (i, j) in edges {
            g.add_edge(i, j);
        }
        g
    }

    /// Ignores self-loops.
    pub fn add_edge(&mut self, i: usize, j: usize) {
        assert!(i < self.n() && j < self.n(), "edge endpoint out of range");
        if i != j {
            self.adjacency[i] = self.adjacency[i] | SubsetMask::singleton(j);
            self.adjacency[j] = self.adjacency[j] | SubsetMask::singleton(i);
        }
    }

    /// Connects every pair inside `clique`.
    pub fn add_clique(&mut self, clique: SubsetMask) {
        for i in clique.iter() {
            self.adjacency[i] = self.adjacency[i] | (clique - SubsetMask::singleton(i));
        }
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, i: usize) -> SubsetMask {
        self.adjacency[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].contains(j)
    }

    /// Edges `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, adj)| adj.iter().filter(move |&j| j > i).map(move |j| (i, j)))
            .collect()
    }

    /// Connected components as masks, ordered by their lowest position.
    pub fn components(&self) -> Vec<SubsetMask> {
        let mut seen = SubsetMask::EMPTY;
        let mut out = Vec::new();
        for start in 0..self.n() {
            if seen.contains(start) {
                continue;
            }
            let mut comp = SubsetMask::singleton(start);
            let mut frontier = comp;
            while !frontier.is_empty() {
                let next = frontier
                    .iter()
                    .fold(SubsetMask::EMPTY, |acc, i| acc | self.adjacency[i]);
                frontier = next - comp;
                comp = comp | next;
            }
            seen = seen | comp;
            out.push(comp);
        }
        out
    }
}

/// Interaction graph at emission threshold `eps`: the union of the cliques
/// formed by each cause's support.
pub fn interaction_graph<T: Scalar>(model: &Model<T>, obs: &ObservationSeq, eps: T) -> InteractionGraph {
    let mut g = InteractionGraph::empty(obs.len());
    for z in 0..model.num_causes() {
        let s = support(model, obs, z, eps);
        if s.len() > 1 {
            g.add_clique(s);
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_graph_is_complete() {
        let m = Model::new(
            vec![1.0; 3],
            vec![vec![0.09, 0.05, 0.02], vec![0.02, 0.05, 0.08]],
        )
        .unwrap();
        let obs = ObservationSeq::for_model(vec![0, 1], &m).unwrap();
        let g = interaction_graph(&m, &obs, 0.0);
        assert_eq!(g.edges(), vec![(0, 1)]);
    }

    #[test]
    fn block_diagonal_splits() {
        // vocab 0,1 belong to cause 0; vocab 2,3 to cause 1
        let m = Model::new(
            vec![1.0, 1.0],
            vec![vec![0.2, 0.0], vec![0.3, 0.0], vec![0.0, 0.4], vec![0.0, 0.1]],
        )
        .unwrap();
        let obs = ObservationSeq::for_model(vec![0, 2, 1, 3], &m).unwrap();
        let g = interaction_graph(&m, &obs, 0.0);
        assert_eq!(g.edges(), vec![(0, 2), (1, 3)]);
        assert_eq!(
            g.components(),
            vec![SubsetMask::from_positions([0, 2]), SubsetMask::from_positions([1, 3])]
        );
    }

    #[test]
    fn singleton_support_adds_nothing() {
        let m = Model::new(vec![1.0, 1.0], vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let obs = ObservationSeq::for_model(vec![0, 1], &m).unwrap();
        assert!(interaction_graph(&m, &obs, 0.0).edges().is_empty());
    }

    #[test]
    fn threshold_drops_small_links() {
        let m = Model::new(vec![1.0], vec![vec![0.5], vec![1e-9]]).unwrap();
        let obs = ObservationSeq::for_model(vec![0, 1], &m).unwrap();
        assert_eq!(interaction_graph(&m, &obs, 0.0).edges().len(), 1);
        assert!(interaction_graph(&m, &obs, 1e-6).edges().is_empty());
    }
}
