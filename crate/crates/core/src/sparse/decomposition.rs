use std::fmt;

use crate::algebra::SubsetMask;
use crate::error::{Error, Result};

use super::graph::InteractionGraph;

/// Rooted tree of bags over the observation positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDecomposition {
    bags: Vec<SubsetMask>,
    parent: Vec<Option<usize>>,
    root: usize,
}

impl TreeDecomposition {
    /// Assembles a decomposition from raw parts. Only the shape of the tree
    /// is checked here; graph-related conditions are reported by
    /// [`validate_decomposition`].
    pub fn new(bags: Vec<SubsetMask>, parent: Vec<Option<usize>>, root: usize) -> Result<Self> {
        if bags.is_empty() || bags.len() != parent.len() || root >= bags.len() {
            return Err(Error::Domain("malformed tree decomposition".into()));
        }
        let td = TreeDecomposition { bags, parent, root };
        if let Some(problem) = td.shape_problem() {
            return Err(Error::Domain(problem));
        }
        Ok(td)
    }

    fn shape_problem(&self) -> Option<String> {
        if self.parent[self.root].is_some() {
            return Some(format!("root bag {} has a parent", self.root));
        }
        for (t, p) in self.parent.iter().enumerate() {
            match p {
                None if t != self.root => return Some(format!("bag {t} has no parent")),
                Some(p) if *p >= self.bags.len() => {
                    return Some(format!("bag {t} points at missing bag {p}"))
                }
                _ => {}
            }
        }
        // every walk must reach the root within |bags| steps
        for start in 0..self.bags.len() {
            let mut t = start;
            let mut steps = 0;
            while let Some(p) = self.parent[t] {
                t = p;
                steps += 1;
                if steps > self.bags.len() {
                    return Some(format!("cycle through bag {start}"));
                }
            }
        }
        None
    }

    pub fn bags(&self) -> &[SubsetMask] {
        &self.bags
    }

    pub fn bag(&self, t: usize) -> SubsetMask {
        self.bags[t]
    }

    pub fn parent(&self, t: usize) -> Option<usize> {
        self.parent[t]
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    /// `max |V_t| - 1`, or 0 for a decomposition of the empty graph.
    pub fn width(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(0).saturating_sub(1)
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.bags.len()];
        for (t, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                out[*p].push(t);
            }
        }
        out
    }

    /// Post-order from the root: every bag appears after all of its children.
    pub fn elimination_order(&self) -> Vec<usize> {
        let children = self.children();
        let mut order = Vec::with_capacity(self.bags.len());
        let mut stack = vec![(self.root, false)];
        while let Some((t, expanded)) = stack.pop() {
            if expanded {
                order.push(t);
            } else {
                stack.push((t, true));
                for &c in children[t].iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        order
    }

    /// True when `order` lists every bag once with children before parents.
    pub fn is_valid_order(&self, order: &[usize]) -> bool {
        if order.len() != self.bags.len() {
            return false;
        }
        let mut pos = vec![usize::MAX; self.bags.len()];
        for (k, &t) in order.iter().enumerate() {
            if t >= self.bags.len() || pos[t] != usize::MAX {
                return false;
            }
            pos[t] = k;
        }
        self.parent
            .iter()
            .enumerate()
            .all(|(t, p)| p.is_none_or(|p| pos[t] < pos[p]))
    }

    /// Same bags and tree, rooted at `new_root`.
    pub fn rerooted(&self, new_root: usize) -> Result<Self> {
        if new_root >= self.bags.len() {
            return Err(Error::Domain(format!("bag {new_root} does not exist")));
        }
        let mut parent = self.parent.clone();
        let mut prev = None;
        let mut cur = Some(new_root);
        while let Some(t) = cur {
            let next = self.parent[t];
            parent[t] = prev;
            prev = Some(t);
            cur = next;
        }
        Ok(TreeDecomposition {
            bags: self.bags.clone(),
            parent,
            root: new_root,
        })
    }
}

impl fmt::Display for TreeDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "width {}", self.width())?;
        writeln!(f, "root {}", self.root)?;
        for (t, bag) in self.bags.iter().enumerate() {
            match self.parent[t] {
                Some(p) => writeln!(f, "bag {t} {bag} -> {p}")?,
                None => writeln!(f, "bag {t} {bag}")?,
            }
        }
        Ok(())
    }
}

/// Greedy min-fill elimination, ties broken by the lowest position.
///
/// Each eliminated position contributes the bag of itself and its remaining
/// neighbours; the bag hangs below the bag of the earliest-eliminated
/// neighbour. Components are joined under the final bag, which becomes the
/// root. Bags contained in an adjacent bag are then merged away. The empty
/// graph gets a single empty bag.
pub fn tree_decompose(graph: &InteractionGraph) -> TreeDecomposition {
    let n = graph.n();
    if n == 0 {
        return TreeDecomposition {
            bags: vec![SubsetMask::EMPTY],
            parent: vec![None],
            root: 0,
        };
    }

    let mut adj: Vec<SubsetMask> = (0..n).map(|i| graph.neighbors(i)).collect();
    let mut alive = SubsetMask::full(n);
    let mut position = vec![0usize; n];
    let mut bags = Vec::with_capacity(n);
    let mut eliminated = Vec::with_capacity(n);

    for step in 0..n {
        let v = alive
            .iter()
            .min_by_key(|&v| (fill_in(&adj, adj[v] & alive), v))
            .expect("alive set is nonempty");
        let nb = adj[v] & alive;
        for u in nb.iter() {
            adj[u] = adj[u] | (nb - SubsetMask::singleton(u));
        }
        alive = alive - SubsetMask::singleton(v);
        position[v] = step;
        bags.push(nb | SubsetMask::singleton(v));
        eliminated.push(v);
    }

    let last = n - 1;
    let mut parent: Vec<Option<usize>> = (0..n)
        .map(|k| {
            let nb = bags[k] - SubsetMask::singleton(eliminated[k]);
            nb.iter().map(|u| position[u]).min()
        })
        .collect();
    for (k, p) in parent.iter_mut().enumerate() {
        if p.is_none() && k != last {
            *p = Some(last);
        }
    }

    contract(TreeDecomposition {
        bags,
        parent,
        root: last,
    })
}

fn fill_in(adj: &[SubsetMask], nb: SubsetMask) -> usize {
    let missing: usize = nb
        .iter()
        .map(|u| (nb - adj[u] - SubsetMask::singleton(u)).len())
        .sum();
    missing / 2
}

/// Merges every bag into its parent when one of the two contains the other.
fn contract(mut td: TreeDecomposition) -> TreeDecomposition {
    let len = td.bags.len();
    let mut removed = vec![false; len];
    loop {
        let mut changed = false;
        for c in 0..len {
            if removed[c] {
                continue;
            }
            let Some(p) = td.parent[c] else { continue };
            let (bc, bp) = (td.bags[c], td.bags[p]);
            if bc.is_subset_of(bp) || bp.is_subset_of(bc) {
                td.bags[p] = bc | bp;
                for t in 0..len {
                    if td.parent[t] == Some(c) {
                        td.parent[t] = Some(p);
                    }
                }
                td.parent[c] = None;
                removed[c] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut new_index = vec![usize::MAX; len];
    let mut next = 0;
    for t in 0..len {
        if !removed[t] {
            new_index[t] = next;
            next += 1;
        }
    }
    let bags = (0..len).filter(|&t| !removed[t]).map(|t| td.bags[t]).collect();
    let parent = (0..len)
        .filter(|&t| !removed[t])
        .map(|t| td.parent[t].map(|p| new_index[p]))
        .collect();
    TreeDecomposition {
        bags,
        parent,
        root: new_index[td.root],
    }
}

/// A broken decomposition condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// The bags do not form a tree rooted at the declared root.
    Shape(String),
    /// A bag mentions a position the graph does not have.
    OutOfRange { bag: usize, position: usize },
    /// The position lies in no bag.
    UncoveredPosition(usize),
    /// No bag holds both endpoints of the edge.
    UncoveredEdge(usize, usize),
    /// The bags holding this position do not form a connected subtree.
    RunningIntersection { position: usize, bags: Vec<usize> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape(s) => write!(f, "tree shape: {s}"),
            Violation::OutOfRange { bag, position } => {
                write!(f, "bag {bag} holds position {position} outside the graph")
            }
            Violation::UncoveredPosition(i) => write!(f, "position {i} lies in no bag"),
            Violation::UncoveredEdge(i, j) => write!(f, "edge ({i}, {j}) lies in no bag"),
            Violation::RunningIntersection { position, bags } => write!(
                f,
                "bags {bags:?} holding position {position} are not connected"
            ),
        }
    }
}

/// Validation outcome; empty means valid.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks coverage, edge coverage and the running-intersection property.
pub fn validate_decomposition(graph: &InteractionGraph, td: &TreeDecomposition) -> ValidationReport {
    let mut violations = Vec::new();
    if let Some(problem) = td.shape_problem() {
        violations.push(Violation::Shape(problem));
    }
    let n = graph.n();
    for (t, bag) in td.bags.iter().enumerate() {
        for i in bag.iter().filter(|&i| i >= n) {
            violations.push(Violation::OutOfRange { bag: t, position: i });
        }
    }
    for i in 0..n {
        let holders: Vec<usize> = (0..td.len()).filter(|&t| td.bags[t].contains(i)).collect();
        if holders.is_empty() {
            violations.push(Violation::UncoveredPosition(i));
            continue;
        }
        let linked = holders
            .iter()
            .filter(|&&t| td.parent[t].is_some_and(|p| td.bags[p].contains(i)))
            .count();
        if holders.len() - linked != 1 {
            violations.push(Violation::RunningIntersection {
                position: i,
                bags: holders,
            });
        }
    }
    for (i, j) in graph.edges() {
        let pair = SubsetMask::singleton(i) | SubsetMask::singleton(j);
        if !td.bags.iter().any(|b| pair.is_subset_of(*b)) {
            violations.push(Violation::UncoveredEdge(i, j));
        }
    }
    ValidationReport { violations }
}
