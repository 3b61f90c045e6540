//! Cocycles into finite groups: the identity
//! `c(γ₁γ₀, x) = c(γ₁, γ₀.x)c(γ₀, x)`, coboundaries, cohomology search,
//! index cocycles of choice functions, and tree cocycles.
//!
//! A cocycle over an action `Γ ↷ X` is stored on the action groupoid,
//! whose arrow `(γ, x)` has index `γ·|X| + x`, source `x` and range `γ.x`.
//! The identity then reads `c(gh) = c(g)c(h)` for composable arrows, so the
//! same code serves actions and general finite groupoids.

mod index;
mod metric;
mod solve;
mod tree;

use rayon::prelude::*;
use serde::Serialize;

use crate::group::{FiniteGroup, GroupError};
use crate::groupoid::{action_groupoid, uniform_weights, FiniteGroupoid, GroupoidError};
use crate::shift::ShiftError;

pub use index::{
    choice_functions, coset_choice_system, index_cocycle, index_cocycle_over_action,
    ChoiceSystem, CosetChoice,
};
pub use metric::{
    coordinate_functional, tilde_distance, tilde_distance_sampled, FiniteGroupL, Functional,
    MonteCarloEstimate,
};
pub use solve::{cohomologous_search, cohomologous_to_hom_search, HomSearch, DEFAULT_SEARCH_CAP};
pub use tree::{
    edge_flip_sensitivity, tree_cocycle, tree_cocycle_with, verify_tree_cocycle, FlipReport,
    Labeling, Orientation, TreeAction,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CocycleError {
    #[error("invalid metric: {0}")]
    Metric(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("the R-class of {point} contains {found} S-classes, another contains {expected}")]
    IndexMismatch {
        point: usize,
        found: usize,
        expected: usize,
    },
    #[error("{0} leaves the truncated tree")]
    TruncationExceeded(String),
    #[error("edge {0} is not on the geodesic")]
    EdgeNotOnGeodesic(usize),
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Shift(#[from] ShiftError),
}

/// A finite group acting on `0..n` by permutations, `perms[γ][x] = γ.x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAction {
    group: FiniteGroup,
    perms: Vec<Vec<usize>>,
    groupoid: FiniteGroupoid,
}

impl GroupAction {
    pub fn new(group: FiniteGroup, perms: Vec<Vec<usize>>) -> Result<Self, CocycleError> {
        let n = perms.first().map_or(0, Vec::len);
        let groupoid = action_groupoid(&group, &perms, uniform_weights(n))?;
        Ok(GroupAction {
            group,
            perms,
            groupoid,
        })
    }

    /// Left multiplication of a group on itself.
    pub fn regular(group: FiniteGroup) -> Self {
        let perms = group
            .elements()
            .map(|g| group.elements().map(|x| group.mul(g, x)).collect())
            .collect();
        Self::new(group, perms).expect("left multiplication is an action")
    }

    /// `Γ` acting trivially on `n` points.
    pub fn trivial(group: FiniteGroup, n: usize) -> Self {
        let perms = vec![(0..n).collect(); group.order()];
        Self::new(group, perms).expect("the trivial action is an action")
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    pub fn num_points(&self) -> usize {
        self.groupoid.num_objects()
    }

    pub fn act(&self, gamma: usize, x: usize) -> usize {
        self.perms[gamma][x]
    }

    pub fn arrow(&self, gamma: usize, x: usize) -> usize {
        gamma * self.num_points() + x
    }

    pub fn groupoid(&self) -> &FiniteGroupoid {
        &self.groupoid
    }

    /// Orbits, each sorted, listed by least member.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let classes = self.groupoid.orbit_classes();
        let mut slot = vec![usize::MAX; classes.len()];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for (x, &c) in classes.iter().enumerate() {
            if slot[c] == usize::MAX {
                slot[c] = out.len();
                out.push(Vec::new());
            }
            out[slot[c]].push(x);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Domain {
    Action(GroupAction),
    Groupoid(FiniteGroupoid),
}

impl Domain {
    pub fn groupoid(&self) -> &FiniteGroupoid {
        match self {
            Domain::Action(a) => a.groupoid(),
            Domain::Groupoid(g) => g,
        }
    }

    pub fn action(&self) -> Option<&GroupAction> {
        match self {
            Domain::Action(a) => Some(a),
            Domain::Groupoid(_) => None,
        }
    }
}

/// An `L`-valued function on the arrows of a finite domain. Construction
/// does not check the cocycle identity; [`verify_cocycle`] does.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cocycle {
    domain: Domain,
    target: FiniteGroupL,
    values: Vec<usize>,
}

impl Cocycle {
    pub fn new(domain: Domain, target: FiniteGroupL, values: Vec<usize>) -> Result<Self, CocycleError> {
        let m = domain.groupoid().num_morphisms();
        if values.len() != m {
            return Err(CocycleError::Invalid(format!("expected {m} values, got {}", values.len())));
        }
        if let Some(v) = values.iter().find(|&&v| v >= target.order()) {
            return Err(CocycleError::Invalid(format!("value {v} is not in L")));
        }
        Ok(Cocycle {
            domain,
            target,
            values,
        })
    }

    /// `(γ, x) ↦ f(γ, x)` over an action.
    pub fn on_action(
        action: GroupAction,
        target: FiniteGroupL,
        f: impl Fn(usize, usize) -> usize,
    ) -> Result<Self, CocycleError> {
        let n = action.num_points();
        let values = (0..action.group().order() * n).map(|a| f(a / n, a % n)).collect();
        Self::new(Domain::Action(action), target, values)
    }

    pub fn identity(domain: Domain, target: FiniteGroupL) -> Self {
        let values = vec![target.group().identity(); domain.groupoid().num_morphisms()];
        Cocycle {
            domain,
            target,
            values,
        }
    }

    /// `c(γ, x) = ρ(γ)` for a homomorphism `ρ: Γ → L`.
    pub fn from_homomorphism(
        action: GroupAction,
        target: FiniteGroupL,
        rho: &[usize],
    ) -> Result<Self, CocycleError> {
        let (g, l) = (action.group(), target.group());
        let is_hom = rho.len() == g.order()
            && g.elements().all(|a| g.elements().all(|b| rho[g.mul(a, b)] == l.mul(rho[a], rho[b])));
        if !is_hom {
            return Err(CocycleError::Invalid("ρ is not a homomorphism".into()));
        }
        Self::on_action(action, target, |gamma, _| rho[gamma])
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn target(&self) -> &FiniteGroupL {
        &self.target
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn value(&self, arrow: usize) -> usize {
        self.values[arrow]
    }

    /// `c(γ, x)` when the domain is an action.
    pub fn at(&self, gamma: usize, x: usize) -> Option<usize> {
        let a = self.domain.action()?;
        Some(self.values[a.arrow(gamma, x)])
    }
}

/// Cap on violations listed in a report; the total is always counted.
pub const VIOLATION_LIMIT: usize = 100;

/// A failure of `c(γ₁γ₀, x) = c(γ₁, γ₀.x)c(γ₀, x)`. Over an action `outer`
/// and `inner` are `γ₁`, `γ₀` and `point` is `x`; over a groupoid they are
/// the composable arrows `g`, `h`. Values are indices into `L`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CocycleViolation {
    pub outer: usize,
    pub inner: usize,
    pub point: Option<usize>,
    pub composite: usize,
    pub product: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CocycleReport {
    pub checked: u64,
    pub total_violations: u64,
    pub violations: Vec<CocycleViolation>,
}

impl CocycleReport {
    pub fn holds(&self) -> bool {
        self.total_violations == 0
    }

    pub(crate) fn from_parts(checked: u64, all: impl IntoIterator<Item = CocycleViolation>) -> Self {
        let mut total = 0u64;
        let mut violations = Vec::new();
        for v in all {
            total += 1;
            if violations.len() < VIOLATION_LIMIT {
                violations.push(v);
            }
        }
        CocycleReport {
            checked,
            total_violations: total,
            violations,
        }
    }
}

/// Exhaustive check of the cocycle identity over every composable pair.
pub fn verify_cocycle(c: &Cocycle) -> CocycleReport {
    let g = c.domain.groupoid();
    let l = c.target.group();
    let per_outer: Vec<(u64, Vec<CocycleViolation>)> = (0..g.num_morphisms())
        .into_par_iter()
        .map(|a| {
            let mut bad = Vec::new();
            let inner = g.r_fiber(g.source(a));
            for &b in inner {
                let ab = g.compose(a, b).expect("composable");
                let product = l.mul(c.values[a], c.values[b]);
                if product != c.values[ab] {
                    bad.push(violation(c, a, b, c.values[ab], product));
                }
            }
            (inner.len() as u64, bad)
        })
        .collect();
    let checked = per_outer.iter().map(|(k, _)| k).sum();
    CocycleReport::from_parts(checked, per_outer.into_iter().flat_map(|(_, v)| v))
}

fn violation(c: &Cocycle, a: usize, b: usize, composite: usize, product: usize) -> CocycleViolation {
    match &c.domain {
        Domain::Action(act) => {
            let n = act.num_points();
            CocycleViolation {
                outer: a / n,
                inner: b / n,
                point: Some(b % n),
                composite,
                product,
            }
        }
        Domain::Groupoid(_) => CocycleViolation {
            outer: a,
            inner: b,
            point: None,
            composite,
            product,
        },
    }
}

pub(crate) fn ratio_string<S: serde::Serializer>(r: &num_rational::BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// `c₁(γ, x) = f(γ.x)c₀(γ, x)f(x)⁻¹`.
pub fn coboundary(f: &[usize], c0: &Cocycle) -> Result<Cocycle, CocycleError> {
    let g = c0.domain.groupoid();
    let l = c0.target.group();
    if f.len() != g.num_objects() || f.iter().any(|&v| v >= l.order()) {
        return Err(CocycleError::Invalid("f must map every point into L".into()));
    }
    let values = (0..g.num_morphisms())
        .map(|a| l.mul(l.mul(f[g.range(a)], c0.values[a]), l.inv(f[g.source(a)])))
        .collect();
    Ok(Cocycle {
        domain: c0.domain.clone(),
        target: c0.target.clone(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::hash::{mix64, split_seed};

    fn c3_on_3() -> GroupAction {
        let g = FiniteGroup::cyclic(3);
        let perms = g.elements().map(|a| (0..3).map(|x| (x + a) % 3).collect()).collect();
        GroupAction::new(g, perms).unwrap()
    }

    fn s3() -> FiniteGroupL {
        FiniteGroupL::discrete(FiniteGroup::symmetric(3).0)
    }

    #[test]
    fn identity_and_homomorphisms_are_cocycles() {
        let act = c3_on_3();
        assert!(verify_cocycle(&Cocycle::identity(Domain::Action(act.clone()), s3())).holds());
        let l = s3();
        for rho in act.group().homomorphisms_to(l.group()) {
            let c = Cocycle::from_homomorphism(act.clone(), l.clone(), &rho).unwrap();
            let r = verify_cocycle(&c);
            assert!(r.holds());
            assert_eq!(r.checked, 27);
        }
        assert!(Cocycle::from_homomorphism(act, l, &[0, 1, 1]).is_err());
    }

    #[test]
    fn random_tables_fail_with_witness() {
        let act = c3_on_3();
        let mut failures = 0;
        for seed in 0..20u64 {
            let c = Cocycle::on_action(act.clone(), s3(), |g, x| {
                (mix64(split_seed(seed, (g * 3 + x) as u64)) % 6) as usize
            })
            .unwrap();
            let r = verify_cocycle(&c);
            if let Some(v) = r.violations.first() {
                failures += 1;
                let l = c.target().group();
                let (g1, g0, x) = (v.outer, v.inner, v.point.unwrap());
                let lhs = c.at(act.group().mul(g1, g0), x).unwrap();
                let rhs = l.mul(c.at(g1, act.act(g0, x)).unwrap(), c.at(g0, x).unwrap());
                assert_ne!(lhs, rhs);
            }
        }
        assert!(failures >= 19);
    }

    #[test]
    fn groupoid_domain_violations_name_arrows() {
        let g = FiniteGroupoid::full_relation(uniform_weights(2));
        let l = FiniteGroupL::discrete(FiniteGroup::cyclic(2));
        // (0,1) ↦ 1, everything else ↦ 0 breaks (0,1)(1,0) = (0,0)
        let c = Cocycle::new(Domain::Groupoid(g), l, vec![0, 1, 0, 0]).unwrap();
        let r = verify_cocycle(&c);
        assert!(!r.holds());
        assert!(r.violations.iter().any(|v| v.outer == 1 && v.inner == 2 && v.point.is_none()));
    }

    #[test]
    fn coboundaries() {
        let act = c3_on_3();
        let l = s3();
        let rho = &act.group().homomorphisms_to(l.group())[1];
        let c0 = Cocycle::from_homomorphism(act.clone(), l.clone(), rho).unwrap();
        assert_eq!(coboundary(&[0, 0, 0], &c0).unwrap(), c0);
        let lg = l.group();
        for k in lg.elements() {
            let c1 = coboundary(&[k; 3], &c0).unwrap();
            for a in 0..9 {
                assert_eq!(c1.value(a), lg.mul(lg.mul(k, c0.value(a)), lg.inv(k)));
            }
        }
        let f = [1, 4, 5];
        let finv: Vec<usize> = f.iter().map(|&v| lg.inv(v)).collect();
        let c1 = coboundary(&f, &c0).unwrap();
        assert!(verify_cocycle(&c1).holds());
        assert_eq!(coboundary(&f, &coboundary(&finv, &c1).unwrap()).unwrap(), c1);
        assert!(coboundary(&[0, 0], &c0).is_err());
    }

    #[test]
    fn orbits_of_actions() {
        let g = FiniteGroup::cyclic(2);
        let act = GroupAction::new(g, vec![vec![0, 1, 2, 3], vec![2, 3, 0, 1]]).unwrap();
        assert_eq!(act.orbits(), vec![vec![0, 2], vec![1, 3]]);
        assert_eq!(c3_on_3().orbits(), vec![vec![0, 1, 2]]);
    }
}
