//! Finite discrete measured groupoids with exact rational unit measures.
//!
//! Composition follows the usual convention: `gh` is defined when
//! `s(g) = r(h)`, and then `s(gh) = s(h)`, `r(gh) = r(g)`. A groupoid is
//! stored with dense indices for objects and morphisms; the composition
//! table is kept per object so that only composable pairs take space.

mod construct;
mod fiber;
mod independence;
mod iso;
mod json;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::group::FiniteGroup;

pub use construct::{
    action_groupoid, direct_sum, semidirect, wreath, wreath_action_groupoid, wreath_default,
    FiberedSpace, GroupoidBundle, SemidirectProduct,
};
pub use fiber::{
    groupoid_coset_reps, restriction_claim_iso, wreath_iso_from_fiber_maps, Bisection, CosetReps,
    RestrictionReport, Side, WreathIsoReport,
};
pub use independence::{
    freely_independent, is_subgroupoid, mass_transport_check, pi_transport, relation_subgroupoid,
    Independence, MassTransport, StructureGraph,
};
pub use iso::{iso_search, verify_isomorphism, GroupoidIso, IsoOutcome, DEFAULT_NODE_CAP};
pub use json::{GroupoidJson, GroupoidSpec, ObjectJson};

/// Largest number of morphisms a construction may produce.
pub const SIZE_CAP: usize = 1 << 20;
/// Largest number of composable pairs a groupoid may store.
const PAIR_CAP: usize = 1 << 27;
const UNDEFINED: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroupoidError {
    #[error("malformed groupoid: {0}")]
    Malformed(String),
    #[error("reduction to an object set of zero measure")]
    EmptyReduction,
    #[error("construction needs {needed} morphisms, over the cap of {cap}")]
    SizeCap { needed: usize, cap: usize },
    #[error("invalid bundle action: {0}")]
    ActionInvalid(String),
    #[error("not a homomorphism: image of {left}·{right} = {product} differs ({detail})")]
    NotHomomorphism {
        left: usize,
        right: usize,
        product: usize,
        detail: String,
    },
    #[error("no transport for base morphism {base} and fiber morphism {fiber}")]
    NoTransport { base: usize, fiber: usize },
    #[error("subgroupoids are not freely independent; witness {0:?}")]
    NotFreelyIndependent(Vec<(usize, usize)>),
    #[error("bad partition: {0}")]
    BadPartition(String),
    #[error("bad bisection: {0}")]
    BadBisection(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

/// `p/q` as an exact rational.
pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

/// `n` copies of `1/n`.
pub fn uniform_weights(n: usize) -> Vec<BigRational> {
    vec![ratio(1, n as i64); n]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroupoid {
    objects: Vec<String>,
    weights: Vec<BigRational>,
    labels: Vec<String>,
    src: Vec<usize>,
    rng: Vec<usize>,
    by_src: Vec<Vec<usize>>,
    by_rng: Vec<Vec<usize>>,
    src_pos: Vec<usize>,
    rng_pos: Vec<usize>,
    // table[x][src_pos[g] * by_rng[x].len() + rng_pos[h]] = gh for s(g) = r(h) = x
    table: Vec<Vec<u32>>,
    units: Vec<usize>,
    inverses: Vec<usize>,
}

impl FiniteGroupoid {
    /// Builds a groupoid from an explicit composition list of `(g, h, gh)`
    /// triples. Every composable pair must appear exactly once; units and
    /// inverses are derived and must exist.
    pub fn new(
        objects: Vec<(String, BigRational)>,
        morphisms: Vec<(String, usize, usize)>,
        composition: &[(usize, usize, usize)],
    ) -> Result<Self, GroupoidError> {
        let n = objects.len();
        let m = morphisms.len();
        if let Some((l, _, _)) = morphisms.iter().find(|(_, s, r)| *s >= n || *r >= n) {
            return Err(GroupoidError::Malformed(format!("morphism {l} has an unknown endpoint")));
        }
        let mut g = Self::skeleton(objects, morphisms)?;
        for &(a, b, c) in composition {
            if a >= m || b >= m || c >= m {
                return Err(GroupoidError::Malformed(format!("triple ({a},{b},{c}) out of range")));
            }
            if g.src[a] != g.rng[b] {
                return Err(GroupoidError::Malformed(format!(
                    "{} and {} are not composable",
                    g.labels[a], g.labels[b]
                )));
            }
            let slot = g.slot(a, b);
            let cell = &mut g.table[g.src[a]][slot];
            if *cell != UNDEFINED && *cell != c as u32 {
                return Err(GroupoidError::Malformed(format!(
                    "conflicting products for ({}, {})",
                    g.labels[a], g.labels[b]
                )));
            }
            *cell = c as u32;
        }
        g.finish()
    }

    /// Builds a groupoid whose composition is given by `compose(g, h)` on
    /// composable pairs.
    pub(crate) fn from_fn(
        objects: Vec<(String, BigRational)>,
        morphisms: Vec<(String, usize, usize)>,
        compose: impl Fn(usize, usize) -> usize,
    ) -> Result<Self, GroupoidError> {
        let mut g = Self::skeleton(objects, morphisms)?;
        for x in 0..g.objects.len() {
            let cols = g.by_rng[x].len();
            for (i, &a) in g.by_src[x].iter().enumerate() {
                for (j, &b) in g.by_rng[x].iter().enumerate() {
                    g.table[x][i * cols + j] = compose(a, b) as u32;
                }
            }
        }
        g.finish()
    }

    fn skeleton(
        objects: Vec<(String, BigRational)>,
        morphisms: Vec<(String, usize, usize)>,
    ) -> Result<Self, GroupoidError> {
        let n = objects.len();
        let m = morphisms.len();
        if m > SIZE_CAP {
            return Err(GroupoidError::SizeCap {
                needed: m,
                cap: SIZE_CAP,
            });
        }
        let (names, weights): (Vec<_>, Vec<_>) = objects.into_iter().unzip();
        let mut by_src = vec![Vec::new(); n];
        let mut by_rng = vec![Vec::new(); n];
        let mut src_pos = vec![0; m];
        let mut rng_pos = vec![0; m];
        let mut labels = Vec::with_capacity(m);
        let mut src = Vec::with_capacity(m);
        let mut rng = Vec::with_capacity(m);
        for (i, (l, s, r)) in morphisms.into_iter().enumerate() {
            src_pos[i] = by_src[s].len();
            by_src[s].push(i);
            rng_pos[i] = by_rng[r].len();
            by_rng[r].push(i);
            labels.push(l);
            src.push(s);
            rng.push(r);
        }
        let pairs: usize = (0..n).map(|x| by_src[x].len() * by_rng[x].len()).sum();
        if pairs > PAIR_CAP {
            return Err(GroupoidError::SizeCap {
                needed: m,
                cap: SIZE_CAP,
            });
        }
        let table = (0..n)
            .map(|x| vec![UNDEFINED; by_src[x].len() * by_rng[x].len()])
            .collect();
        Ok(FiniteGroupoid {
            objects: names,
            weights,
            labels,
            src,
            rng,
            by_src,
            by_rng,
            src_pos,
            rng_pos,
            table,
            units: Vec::new(),
            inverses: Vec::new(),
        })
    }

    fn slot(&self, g: usize, h: usize) -> usize {
        self.src_pos[g] * self.by_rng[self.src[g]].len() + self.rng_pos[h]
    }

    fn finish(mut self) -> Result<Self, GroupoidError> {
        let m = self.labels.len();
        for x in 0..self.objects.len() {
            if let Some(pos) = self.table[x].iter().position(|&c| c == UNDEFINED || c as usize >= m) {
                let cols = self.by_rng[x].len();
                let (a, b) = (self.by_src[x][pos / cols], self.by_rng[x][pos % cols]);
                return Err(GroupoidError::Malformed(format!(
                    "product of {} and {} is missing",
                    self.labels[a], self.labels[b]
                )));
            }
        }
        let mut units = Vec::with_capacity(self.objects.len());
        for x in 0..self.objects.len() {
            let u = self.by_src[x]
                .iter()
                .copied()
                .find(|&u| self.rng[u] == x && self.compose(u, u) == Some(u))
                .ok_or_else(|| {
                    GroupoidError::Malformed(format!("object {} has no unit", self.objects[x]))
                })?;
            units.push(u);
        }
        self.units = units;
        let mut inverses = Vec::with_capacity(m);
        for g in 0..m {
            let (s, r) = (self.src[g], self.rng[g]);
            let inv = self.by_src[r]
                .iter()
                .copied()
                .find(|&h| {
                    self.rng[h] == s
                        && self.compose(g, h) == Some(self.units[r])
                        && self.compose(h, g) == Some(self.units[s])
                })
                .ok_or_else(|| {
                    GroupoidError::Malformed(format!("{} has no inverse", self.labels[g]))
                })?;
            inverses.push(inv);
        }
        self.inverses = inverses;
        Ok(self)
    }

    /// The groupoid with one object and one morphism.
    pub fn point() -> Self {
        Self::unit_groupoid(vec![BigRational::one()])
    }

    /// Only identity morphisms, one object per weight.
    pub fn unit_groupoid(weights: Vec<BigRational>) -> Self {
        let n = weights.len();
        let objects = numbered(weights);
        let morphisms = (0..n).map(|x| (format!("e{x}"), x, x)).collect();
        Self::from_fn(objects, morphisms, |g, _| g).expect("unit groupoid")
    }

    /// The full relation `X × X`; the morphism `(x, y)` has range `x`,
    /// source `y` and index `x·n + y`.
    pub fn full_relation(weights: Vec<BigRational>) -> Self {
        let n = weights.len();
        Self::equivalence_relation(&vec![0; n], weights).expect("full relation")
    }

    /// The equivalence relation whose classes are the level sets of `classes`.
    /// Morphisms are the related pairs `(x, y)` in lexicographic order.
    pub fn equivalence_relation(
        classes: &[usize],
        weights: Vec<BigRational>,
    ) -> Result<Self, GroupoidError> {
        if classes.len() != weights.len() {
            return Err(GroupoidError::Invalid("one class label per object".into()));
        }
        let n = classes.len();
        let mut index = vec![usize::MAX; n * n];
        let mut morphisms = Vec::new();
        for x in 0..n {
            for y in 0..n {
                if classes[x] == classes[y] {
                    index[x * n + y] = morphisms.len();
                    morphisms.push((format!("({x},{y})"), y, x));
                }
            }
        }
        let pairs: Vec<(usize, usize)> = morphisms.iter().map(|&(_, s, r)| (r, s)).collect();
        Self::from_fn(numbered(weights), morphisms, |g, h| {
            index[pairs[g].0 * n + pairs[h].1]
        })
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn num_morphisms(&self) -> usize {
        self.labels.len()
    }

    pub fn object_name(&self, x: usize) -> &str {
        &self.objects[x]
    }

    pub fn object_names(&self) -> &[String] {
        &self.objects
    }

    pub fn label(&self, g: usize) -> &str {
        &self.labels[g]
    }

    pub fn weight(&self, x: usize) -> &BigRational {
        &self.weights[x]
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn source(&self, g: usize) -> usize {
        self.src[g]
    }

    pub fn range(&self, g: usize) -> usize {
        self.rng[g]
    }

    pub fn unit(&self, x: usize) -> usize {
        self.units[x]
    }

    pub fn is_unit(&self, g: usize) -> bool {
        self.units[self.src[g]] == g
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inverses[g]
    }

    /// `gh`, defined when `s(g) = r(h)`.
    pub fn compose(&self, g: usize, h: usize) -> Option<usize> {
        if self.src[g] != self.rng[h] {
            return None;
        }
        Some(self.table[self.src[g]][self.slot(g, h)] as usize)
    }

    /// Morphisms with source `x`.
    pub fn s_fiber(&self, x: usize) -> &[usize] {
        &self.by_src[x]
    }

    /// Morphisms with range `x`, the r-fiber `xG`.
    pub fn r_fiber(&self, x: usize) -> &[usize] {
        &self.by_rng[x]
    }

    /// Morphisms from `s` to `r`.
    pub fn between(&self, r: usize, s: usize) -> impl Iterator<Item = usize> + '_ {
        self.by_src[s].iter().copied().filter(move |&g| self.rng[g] == r)
    }

    /// Every composable pair `(g, h)` with its product.
    pub fn composable_pairs(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.num_objects()).flat_map(move |x| {
            let cols = self.by_rng[x].len();
            self.by_src[x].iter().enumerate().flat_map(move |(i, &g)| {
                self.by_rng[x]
                    .iter()
                    .enumerate()
                    .map(move |(j, &h)| (g, h, self.table[x][i * cols + j] as usize))
            })
        })
    }

    /// The isotropy group at `x` together with the morphism each index stands for.
    pub fn isotropy_group(&self, x: usize) -> (FiniteGroup, Vec<usize>) {
        let elems: Vec<usize> = self.between(x, x).collect();
        let pos = |g: usize| elems.iter().position(|&e| e == g).expect("closed isotropy");
        let table = elems
            .iter()
            .map(|&a| elems.iter().map(|&b| pos(self.compose(a, b).unwrap())).collect())
            .collect();
        let names = elems.iter().map(|&g| self.labels[g].clone()).collect();
        let group = FiniteGroup::from_table(table, names).expect("isotropy of a valid groupoid");
        (group, elems)
    }

    /// Orbit class of each object under `R_G`, labelled by its least member.
    pub fn orbit_classes(&self) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.num_objects()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        for g in 0..self.num_morphisms() {
            let (a, b) = (find(&mut parent, self.src[g]), find(&mut parent, self.rng[g]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        (0..self.num_objects()).map(|x| find(&mut parent, x)).collect()
    }

    /// The orbit relation `R_G = {(r(g), s(g))}`.
    pub fn orbit_relation(&self) -> std::collections::BTreeSet<(usize, usize)> {
        (0..self.num_morphisms()).map(|g| (self.rng[g], self.src[g])).collect()
    }

    pub fn is_principal(&self) -> bool {
        self.orbit_relation().len() == self.num_morphisms()
    }

    /// Checks every axiom exhaustively and collects all violations.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for (g, h, gh) in self.composable_pairs() {
            if self.src[gh] != self.src[h] || self.rng[gh] != self.rng[g] {
                violations.push(Violation::Endpoints {
                    left: g,
                    right: h,
                    product: gh,
                });
            }
        }
        for (f, g, fg) in self.composable_pairs() {
            for &h in &self.by_rng[self.src[g]] {
                let left = self.compose(fg, h);
                let right = self.compose(g, h).and_then(|gh| self.compose(f, gh));
                if left != right {
                    violations.push(Violation::Associativity { f, g, h });
                }
            }
        }
        for g in 0..self.num_morphisms() {
            let (s, r) = (self.src[g], self.rng[g]);
            if self.compose(self.units[r], g) != Some(g) || self.compose(g, self.units[s]) != Some(g)
            {
                violations.push(Violation::UnitNotNeutral { morphism: g });
            }
        }
        let mut total = BigRational::zero();
        for (x, w) in self.weights.iter().enumerate() {
            if w.is_negative() {
                violations.push(Violation::NegativeWeight { object: x });
            }
            total += w;
        }
        if !total.is_one() {
            violations.push(Violation::NotProbability {
                total: total.to_string(),
            });
        }
        for g in 0..self.num_morphisms() {
            let (s, r) = (self.src[g], self.rng[g]);
            if self.weights[s] != self.weights[r] {
                violations.push(Violation::NotMeasurePreserving {
                    morphism: g,
                    source_weight: self.weights[s].to_string(),
                    range_weight: self.weights[r].to_string(),
                });
            }
        }
        let classes = self.orbit_classes();
        let mut support = (0..self.num_objects())
            .filter(|&x| self.weights[x].is_positive())
            .map(|x| classes[x]);
        let first = support.next();
        ValidationReport {
            objects: self.num_objects(),
            morphisms: self.num_morphisms(),
            principal: self.is_principal(),
            min_r_fiber: self.by_rng.iter().map(Vec::len).min().unwrap_or(0),
            ergodic: first.is_some() && support.all(|c| Some(c) == first),
            violations,
        }
    }

    /// The reduction `DGD`, with the measure renormalized to `D`.
    pub fn restrict(&self, d: &[usize]) -> Result<FiniteGroupoid, GroupoidError> {
        let mut keep = vec![usize::MAX; self.num_objects()];
        let mut members: Vec<usize> = d.to_vec();
        members.sort_unstable();
        members.dedup();
        if members.iter().any(|&x| x >= self.num_objects()) {
            return Err(GroupoidError::Invalid("object outside the groupoid".into()));
        }
        let total: BigRational = members.iter().map(|&x| self.weights[x].clone()).sum();
        if members.is_empty() || !total.is_positive() {
            return Err(GroupoidError::EmptyReduction);
        }
        for (i, &x) in members.iter().enumerate() {
            keep[x] = i;
        }
        let objects = members
            .iter()
            .map(|&x| (self.objects[x].clone(), &self.weights[x] / &total))
            .collect();
        let old: Vec<usize> = (0..self.num_morphisms())
            .filter(|&g| keep[self.src[g]] != usize::MAX && keep[self.rng[g]] != usize::MAX)
            .collect();
        let mut new_index = vec![usize::MAX; self.num_morphisms()];
        for (i, &g) in old.iter().enumerate() {
            new_index[g] = i;
        }
        let morphisms = old
            .iter()
            .map(|&g| (self.labels[g].clone(), keep[self.src[g]], keep[self.rng[g]]))
            .collect();
        Self::from_fn(objects, morphisms, |a, b| {
            new_index[self.compose(old[a], old[b]).expect("composable")]
        })
    }
}

fn numbered(weights: Vec<BigRational>) -> Vec<(String, BigRational)> {
    weights.into_iter().enumerate().map(|(i, w)| (i.to_string(), w)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    Endpoints {
        left: usize,
        right: usize,
        product: usize,
    },
    Associativity {
        f: usize,
        g: usize,
        h: usize,
    },
    UnitNotNeutral {
        morphism: usize,
    },
    NegativeWeight {
        object: usize,
    },
    NotProbability {
        total: String,
    },
    NotMeasurePreserving {
        morphism: usize,
        source_weight: String,
        range_weight: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub objects: usize,
    pub morphisms: usize,
    pub violations: Vec<Violation>,
    pub principal: bool,
    /// Smallest r-fiber; aperiodicity is only ever claimed as "every r-fiber has at least k elements".
    pub min_r_fiber: usize,
    /// A single orbit class on the support of the measure.
    pub ergodic: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn r_fibers_at_least(&self, k: usize) -> bool {
        self.min_r_fiber >= k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_relation_on_three_points_is_valid() {
        let g = FiniteGroupoid::full_relation(uniform_weights(3));
        let r = g.validate();
        assert!(r.is_valid(), "{r:?}");
        assert!(r.principal && r.ergodic);
        assert_eq!(r.min_r_fiber, 3);
        assert_eq!(g.num_morphisms(), 9);
        assert_eq!(g.range(1), 0);
        assert_eq!(g.source(1), 1);
        assert_eq!(g.inverse(1), 3);
    }

    #[test]
    fn unequal_weights_break_measure_preservation() {
        let g = FiniteGroupoid::full_relation(vec![ratio(1, 2), ratio(1, 4), ratio(1, 4)]);
        let r = g.validate();
        let bad: Vec<usize> = r
            .violations
            .iter()
            .filter_map(|v| match v {
                Violation::NotMeasurePreserving { morphism, .. } => Some(*morphism),
                _ => None,
            })
            .collect();
        // (0,1), (0,2), (1,0), (2,0)
        assert_eq!(bad, vec![1, 2, 3, 6]);
        assert_eq!(r.violations.len(), 4);
    }

    #[test]
    fn weights_must_sum_to_one() {
        let g = FiniteGroupoid::unit_groupoid(vec![ratio(1, 2), ratio(1, 3)]);
        assert!(matches!(g.validate().violations[..], [Violation::NotProbability { .. }]));
    }

    #[test]
    fn explicit_table_round_trip() {
        let g = FiniteGroupoid::full_relation(uniform_weights(2));
        let triples: Vec<_> = g.composable_pairs().collect();
        let objects = (0..2).map(|x| (x.to_string(), ratio(1, 2))).collect();
        let morphisms = (0..4)
            .map(|m| (g.label(m).to_string(), g.source(m), g.range(m)))
            .collect();
        let h = FiniteGroupoid::new(objects, morphisms, &triples).unwrap();
        assert_eq!(g, h);
        let missing = FiniteGroupoid::new(
            vec![("a".into(), ratio(1, 1))],
            vec![("e".into(), 0, 0)],
            &[],
        );
        assert!(matches!(missing, Err(GroupoidError::Malformed(_))));
    }

    #[test]
    fn restriction_renormalizes() {
        let g = FiniteGroupoid::full_relation(uniform_weights(4));
        let d = g.restrict(&[1, 3]).unwrap();
        assert_eq!(d.num_morphisms(), 4);
        assert_eq!(d.weights(), &[ratio(1, 2), ratio(1, 2)]);
        assert!(d.validate().is_valid());
        assert_eq!(d.object_names(), &["1".to_string(), "3".to_string()]);
        assert_eq!(g.restrict(&[0, 1, 2, 3]).unwrap(), g);
        let twice = g.restrict(&[0, 1, 3]).unwrap().restrict(&[1, 2]).unwrap();
        assert_eq!(twice, g.restrict(&[1, 3]).unwrap());
        let zero = FiniteGroupoid::unit_groupoid(vec![ratio(1, 1), ratio(0, 1)]);
        assert_eq!(zero.restrict(&[1]), Err(GroupoidError::EmptyReduction));
        assert_eq!(g.restrict(&[]), Err(GroupoidError::EmptyReduction));
    }

    #[test]
    fn isotropy_and_classes() {
        let g = FiniteGroupoid::equivalence_relation(&[0, 1, 0], uniform_weights(3)).unwrap();
        assert_eq!(g.orbit_classes(), vec![0, 1, 0]);
        assert!(!g.validate().ergodic);
        let (iso, elems) = g.isotropy_group(2);
        assert_eq!(iso.order(), 1);
        assert_eq!(elems, vec![g.unit(2)]);
    }
}
