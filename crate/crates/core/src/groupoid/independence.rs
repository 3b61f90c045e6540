//! Free independence of subgroupoids, the bipartite structure graph of two
//! equivalence relations, and exact mass transport bookkeeping.

use std::collections::{HashMap, HashSet, VecDeque};

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{FiniteGroupoid, GroupoidError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Independence {
    /// No alternating unit word of length at most `max_len`.
    Independent { max_len: usize },
    /// `(subgroupoid index, morphism)` pairs whose product is a unit.
    Witness { word: Vec<(usize, usize)> },
}

impl Independence {
    pub fn is_independent(&self) -> bool {
        matches!(self, Independence::Independent { .. })
    }
}

/// True when `members` contains the units at the endpoints of its elements
/// and is closed under inverses and composition.
pub fn is_subgroupoid(g: &FiniteGroupoid, members: &[usize]) -> bool {
    let mut inside = vec![false; g.num_morphisms()];
    for &m in members {
        if m >= g.num_morphisms() {
            return false;
        }
        inside[m] = true;
    }
    members.iter().all(|&a| {
        inside[g.inverse(a)]
            && inside[g.unit(g.source(a))]
            && members
                .iter()
                .all(|&b| g.compose(a, b).is_none_or(|ab| inside[ab]))
    })
}

/// Searches alternating products `h₀⋯h_{n−1}` of non-unit elements, with
/// consecutive factors from different subgroupoids, for one that lands in
/// the unit space. Breadth-first, so a returned witness is shortest.
pub fn freely_independent(
    g: &FiniteGroupoid,
    subgroupoids: &[Vec<usize>],
    max_len: usize,
) -> Independence {
    // non-units of each subgroupoid grouped by range, so h can follow p when s(p) = r(h)
    let by_range: Vec<Vec<Vec<usize>>> = subgroupoids
        .iter()
        .map(|sub| {
            let mut v = vec![Vec::new(); g.num_objects()];
            for &h in sub {
                if !g.is_unit(h) {
                    v[g.range(h)].push(h);
                }
            }
            v
        })
        .collect();
    // (product, last index) states; a state reached again later adds nothing new
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut frontier = Vec::new();
    for (i, sub) in subgroupoids.iter().enumerate() {
        for &h in sub {
            if !g.is_unit(h) && seen.insert((h, i)) {
                frontier.push((h, i));
            }
        }
    }
    let mut last_factor: HashMap<(usize, usize), ((usize, usize), usize)> = HashMap::new();
    let mut len = 1;
    while len < max_len && !frontier.is_empty() {
        len += 1;
        let mut next = Vec::new();
        for &(p, i) in &frontier {
            for (j, by) in by_range.iter().enumerate() {
                if j == i {
                    continue;
                }
                for &h in &by[g.source(p)] {
                    let q = g.compose(p, h).expect("composable");
                    if g.is_unit(q) {
                        let mut word = vec![(j, h)];
                        let mut state = (p, i);
                        while let Some(&(prev, factor)) = last_factor.get(&state) {
                            word.push((state.1, factor));
                            state = prev;
                        }
                        word.push((state.1, state.0));
                        word.reverse();
                        return Independence::Witness { word };
                    }
                    if seen.insert((q, j)) {
                        last_factor.insert((q, j), ((p, i), h));
                        next.push((q, j));
                    }
                }
            }
        }
        frontier = next;
    }
    Independence::Independent { max_len }
}

/// Morphisms of `FiniteGroupoid::full_relation` on `classes.len()` points
/// lying in the equivalence relation with the given class labels.
pub fn relation_subgroupoid(classes: &[usize]) -> Vec<usize> {
    let n = classes.len();
    (0..n * n)
        .filter(|&m| classes[m / n] == classes[m % n])
        .collect()
}

/// The bipartite graph with vertices `X ⊔ X/R₀ ⊔ X/R₁` and an edge from
/// each point to each of its two classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructureGraph {
    pub points: usize,
    pub classes0: usize,
    pub classes1: usize,
    pub edges: Vec<(usize, usize)>,
}

fn normalize(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut seen = HashMap::new();
    let out = labels
        .iter()
        .map(|&l| {
            let k = seen.len();
            *seen.entry(l).or_insert(k)
        })
        .collect();
    (out, seen.len())
}

impl StructureGraph {
    /// `r0[x]` and `r1[x]` are class labels of the point `x`.
    pub fn new(r0: &[usize], r1: &[usize]) -> Result<Self, GroupoidError> {
        if r0.len() != r1.len() {
            return Err(GroupoidError::Invalid("relations on different point sets".into()));
        }
        let n = r0.len();
        let (c0, k0) = normalize(r0);
        let (c1, k1) = normalize(r1);
        let mut edges = Vec::with_capacity(2 * n);
        for x in 0..n {
            edges.push((x, n + c0[x]));
            edges.push((x, n + k0 + c1[x]));
        }
        Ok(StructureGraph {
            points: n,
            classes0: k0,
            classes1: k1,
            edges,
        })
    }

    pub fn vertices(&self) -> usize {
        self.points + self.classes0 + self.classes1
    }

    /// Vertex of the `R₀`-class of `x`.
    pub fn class0_vertex(&self, x: usize) -> usize {
        self.edges[2 * x].1
    }

    /// Union–find over the edges; a cycle closes when an edge joins two
    /// vertices that are already connected.
    pub fn is_acyclic(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.vertices()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return false;
            }
            parent[ra] = rb;
        }
        true
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MassTransport {
    /// `Σ_x w(x)·out(x)`.
    pub out_mass: String,
    /// `Σ_y w(y)·in(y)`.
    pub in_mass: String,
    pub balanced: bool,
    pub out_by_point: Vec<String>,
    pub in_by_point: Vec<String>,
}

/// Exact comparison of weighted out-mass and in-mass for a transport given
/// as `(from, to, mass)` edges.
pub fn mass_transport_check(
    weights: &[BigRational],
    transport: &[(usize, usize, BigRational)],
) -> Result<MassTransport, GroupoidError> {
    let n = weights.len();
    let mut out = vec![BigRational::zero(); n];
    let mut inn = vec![BigRational::zero(); n];
    for (a, b, m) in transport {
        if *a >= n || *b >= n {
            return Err(GroupoidError::Invalid("transport edge leaves the point set".into()));
        }
        out[*a] += m;
        inn[*b] += m;
    }
    let weigh = |v: &[BigRational]| -> BigRational { v.iter().zip(weights).map(|(a, w)| a * w).sum() };
    let (o, i) = (weigh(&out), weigh(&inn));
    Ok(MassTransport {
        out_mass: o.to_string(),
        in_mass: i.to_string(),
        balanced: o == i,
        out_by_point: out.iter().map(|v| v.to_string()).collect(),
        in_by_point: inn.iter().map(|v| v.to_string()).collect(),
    })
}

/// For each point `x` in the saturation of `D`, sends mass 1 to the last
/// point on the geodesic in the structure graph from `x` to the `R₀`-class
/// that `D` meets in the orbit of `x`. `D` must be a union of `R₀`-classes
/// meeting each orbit in at most one of them, and the graph must be acyclic.
pub fn pi_transport(
    r0: &[usize],
    r1: &[usize],
    d: &[usize],
) -> Result<Vec<(usize, usize, BigRational)>, GroupoidError> {
    let graph = StructureGraph::new(r0, r1)?;
    if !graph.is_acyclic() {
        return Err(GroupoidError::Invalid("structure graph has a cycle".into()));
    }
    let n = graph.points;
    let mut in_d = vec![false; n];
    for &x in d {
        if x >= n {
            return Err(GroupoidError::Invalid("point outside the set".into()));
        }
        in_d[x] = true;
    }
    if (0..n).any(|x| (0..n).any(|y| r0[x] == r0[y] && in_d[x] != in_d[y])) {
        return Err(GroupoidError::Invalid("D is not a union of R₀-classes".into()));
    }
    let adj = graph.adjacency();
    let mut target = vec![usize::MAX; n];
    let mut claimed = vec![false; graph.vertices()];
    let mut transport = Vec::new();
    for &start in d {
        let root = graph.class0_vertex(start);
        if claimed[root] {
            continue;
        }
        // BFS from the class vertex; each point remembers the first point on its branch
        let mut first = vec![usize::MAX; graph.vertices()];
        let mut queue = VecDeque::from([root]);
        claimed[root] = true;
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if claimed[u] {
                    continue;
                }
                if u < n && in_d[u] && r0[u] != r0[start] {
                    return Err(GroupoidError::Invalid(
                        "D meets an orbit in more than one R₀-class".into(),
                    ));
                }
                claimed[u] = true;
                first[u] = if v == root { u } else { first[v] };
                queue.push_back(u);
            }
        }
        for x in 0..n {
            if first[x] != usize::MAX && target[x] == usize::MAX {
                target[x] = first[x];
                transport.push((x, first[x], BigRational::one()));
            }
        }
    }
    transport.sort_by_key(|&(a, _, _)| a);
    Ok(transport)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{ratio, uniform_weights};

    #[test]
    fn four_cycle_is_not_acyclic() {
        // points 1..4 as 0..3: R₀ {1,2},{3,4}; R₁ {2,3},{1,4}
        let g = StructureGraph::new(&[0, 0, 1, 1], &[0, 1, 1, 0]).unwrap();
        assert_eq!(g.edges.len(), 8);
        assert_eq!(g.vertices(), 8);
        assert!(!g.is_acyclic());
        let full = FiniteGroupoid::full_relation(uniform_weights(4));
        let subs = [relation_subgroupoid(&[0, 0, 1, 1]), relation_subgroupoid(&[0, 1, 1, 0])];
        let v = freely_independent(&full, &subs, 8);
        let Independence::Witness { word } = v else { panic!("{v:?}") };
        let product = word
            .iter()
            .map(|&(_, h)| h)
            .reduce(|a, b| full.compose(a, b).unwrap())
            .unwrap();
        assert!(full.is_unit(product));
        assert_eq!(word.len(), 4);
        assert!(word.windows(2).all(|w| w[0].0 != w[1].0));
    }

    #[test]
    fn trivial_second_relation_gives_forest() {
        assert!(StructureGraph::new(&[0, 0, 1, 1], &[0, 1, 2, 3]).unwrap().is_acyclic());
    }

    #[test]
    fn transposition_relations_are_independent() {
        let full = FiniteGroupoid::full_relation(uniform_weights(3));
        let subs = [relation_subgroupoid(&[0, 0, 1]), relation_subgroupoid(&[0, 1, 1])];
        assert!(freely_independent(&full, &subs, 6).is_independent());
        assert!(StructureGraph::new(&[0, 0, 1], &[0, 1, 1]).unwrap().is_acyclic());
    }

    #[test]
    fn repeated_subgroupoid_has_length_two_witness() {
        let full = FiniteGroupoid::full_relation(uniform_weights(2));
        let s = relation_subgroupoid(&[0, 0]);
        assert!(freely_independent(&full, std::slice::from_ref(&s), 10).is_independent());
        let v = freely_independent(&full, &[s.clone(), s], 10);
        assert_eq!(v, Independence::Witness { word: vec![(0, 1), (1, 2)] });
    }

    #[test]
    fn disjoint_supports_never_compose() {
        let g = FiniteGroupoid::equivalence_relation(&[0, 0, 1, 1], uniform_weights(4)).unwrap();
        let a: Vec<usize> = (0..g.num_morphisms()).filter(|&m| g.range(m) < 2).collect();
        let b: Vec<usize> = (0..g.num_morphisms()).filter(|&m| g.range(m) >= 2).collect();
        assert!(is_subgroupoid(&g, &a) && is_subgroupoid(&g, &b));
        assert!(freely_independent(&g, &[a, b], 50).is_independent());
    }

    #[test]
    fn mass_transport_examples() {
        let w = vec![ratio(1, 2), ratio(1, 2)];
        let identity = [(0, 0, ratio(1, 1)), (1, 1, ratio(1, 1))];
        assert!(mass_transport_check(&w, &identity).unwrap().balanced);
        let skew = vec![ratio(1, 3), ratio(2, 3)];
        let r = mass_transport_check(&skew, &[(0, 1, ratio(1, 1))]).unwrap();
        assert!(!r.balanced);
        assert_eq!((r.out_mass.as_str(), r.in_mass.as_str()), ("1/3", "2/3"));
    }

    #[test]
    fn pi_transport_concentrates_on_d() {
        // path 0 -R₀- 1 -R₁- 2 -R₀- 3 -R₁- 4, D = {0, 1}
        let r0 = [0, 0, 1, 1, 2];
        let r1 = [5, 6, 6, 7, 7];
        let t = pi_transport(&r0, &r1, &[0, 1]).unwrap();
        let targets: Vec<usize> = t.iter().map(|&(_, b, _)| b).collect();
        assert_eq!(targets, vec![0, 1, 1, 1, 1]);
        let r = mass_transport_check(&uniform_weights(5), &t).unwrap();
        assert!(r.balanced);
        assert_eq!(r.out_by_point, vec!["1"; 5]);
        assert_eq!(r.in_by_point, vec!["1", "4", "0", "0", "0"]);
        assert!(pi_transport(&r0, &r1, &[0]).is_err());
    }
}
