//! Cohomology by gauge fixing: `f` is free only at one point per orbit and
//! is propagated along a breadth-first spanning tree from the least point.

use serde::Serialize;

use super::{Cocycle, CocycleError};
use crate::groupoid::FiniteGroupoid;

/// Default bound on `(ρ, orbit, root value)` candidates.
pub const DEFAULT_SEARCH_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum HomSearch {
    /// `c(γ, x) = f(γ.x)ρ(γ)f(x)⁻¹` for all `γ, x`.
    Found { rho: Vec<usize>, f: Vec<usize> },
    None { candidates: u64 },
    Cap { candidates: u64 },
}

/// Spanning-tree edges of one orbit as `(arrow, from, to)`, breadth first
/// from the least object, using arrows out of each visited object in
/// index order.
fn spanning_tree(g: &FiniteGroupoid, root: usize, allowed: impl Fn(usize) -> bool) -> Vec<(usize, usize, usize)> {
    let mut seen = vec![false; g.num_objects()];
    seen[root] = true;
    let mut queue = std::collections::VecDeque::from([root]);
    let mut edges = Vec::new();
    while let Some(x) = queue.pop_front() {
        for &a in g.s_fiber(x) {
            let y = g.range(a);
            if !seen[y] && allowed(a) {
                seen[y] = true;
                edges.push((a, x, y));
                queue.push_back(y);
            }
        }
    }
    edges
}

fn orbits(g: &FiniteGroupoid) -> Vec<Vec<usize>> {
    let classes = g.orbit_classes();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); g.num_objects()];
    for (x, &c) in classes.iter().enumerate() {
        out[c].push(x);
    }
    out.retain(|o| !o.is_empty());
    out
}

/// Searches for a homomorphism `ρ: Γ → L` and `f: X → L` with
/// `c(γ, x) = f(γ.x)ρ(γ)f(x)⁻¹`.
///
/// A cocycle that already is a homomorphism is returned with `f ≡ e`.
/// Otherwise conjugating `ρ` lets `f` be the identity at the least point of the
/// first orbit. For fixed `ρ` and a root value, the tree edges along
/// generators determine `f` on the orbit, and orbits are solved
/// independently. Homomorphisms are tried in the order of
/// [`FiniteGroup::homomorphisms_to`](crate::group::FiniteGroup::homomorphisms_to).
/// A returned pair has been checked on every arrow.
pub fn cohomologous_to_hom_search(c: &Cocycle, cap: u64) -> Result<HomSearch, CocycleError> {
    let act = c
        .domain()
        .action()
        .ok_or_else(|| CocycleError::Invalid("cohomology to a homomorphism needs an action".into()))?;
    let (gamma, l) = (act.group(), c.target().group());
    let g = act.groupoid();
    let n = act.num_points();
    let gens = gamma.generating_set();
    let on_generator = |a: usize| gens.contains(&(a / n));
    let orbit_list = orbits(g);
    let trees: Vec<_> = orbit_list
        .iter()
        .map(|o| spanning_tree(g, o[0], on_generator))
        .collect();
    if n > 0 {
        let rho: Vec<usize> = gamma.elements().map(|s| c.value(act.arrow(s, 0))).collect();
        let constant = gamma.elements().all(|s| (0..n).all(|x| c.value(act.arrow(s, x)) == rho[s]));
        let is_hom = gamma
            .elements()
            .all(|a| gamma.elements().all(|b| rho[gamma.mul(a, b)] == l.mul(rho[a], rho[b])));
        if constant && is_hom {
            return Ok(HomSearch::Found { rho, f: vec![l.identity(); n] });
        }
    }
    let mut candidates = 0u64;
    'rho: for rho in gamma.homomorphisms_to(l) {
        let mut f = vec![usize::MAX; n];
        for (k, (orbit, tree)) in orbit_list.iter().zip(&trees).enumerate() {
            let roots: Vec<usize> = if k == 0 { vec![l.identity()] } else { l.elements().collect() };
            let mut solved = false;
            for root in roots {
                candidates += 1;
                if candidates > cap {
                    return Ok(HomSearch::Cap { candidates: cap });
                }
                f[orbit[0]] = root;
                for &(a, x, y) in tree {
                    let s = a / n;
                    f[y] = l.mul(l.mul(c.value(a), f[x]), l.inv(rho[s]));
                }
                let holds = orbit.iter().all(|&x| {
                    gamma.elements().all(|s| {
                        let a = act.arrow(s, x);
                        c.value(a) == l.mul(l.mul(f[act.act(s, x)], rho[s]), l.inv(f[x]))
                    })
                });
                if holds {
                    solved = true;
                    break;
                }
            }
            if !solved {
                continue 'rho;
            }
        }
        return Ok(HomSearch::Found { rho, f });
    }
    Ok(HomSearch::None { candidates })
}

/// Searches for `f: X → L` with `c₁(g) = f(r(g))c₀(g)f(s(g))⁻¹` on every
/// arrow of the common domain.
pub fn cohomologous_search(c0: &Cocycle, c1: &Cocycle) -> Result<Option<Vec<usize>>, CocycleError> {
    if c0.domain() != c1.domain() || c0.target().group() != c1.target().group() {
        return Err(CocycleError::Invalid("cocycles must share domain and target".into()));
    }
    let g = c0.domain().groupoid();
    let l = c0.target().group();
    let mut f = vec![usize::MAX; g.num_objects()];
    for orbit in orbits(g) {
        let tree = spanning_tree(g, orbit[0], |_| true);
        let solved = l.elements().any(|root| {
            f[orbit[0]] = root;
            for &(a, x, y) in &tree {
                f[y] = l.mul(l.mul(c1.value(a), f[x]), l.inv(c0.value(a)));
            }
            orbit.iter().all(|&x| {
                g.s_fiber(x).iter().all(|&a| {
                    c1.value(a) == l.mul(l.mul(f[g.range(a)], c0.value(a)), l.inv(f[x]))
                })
            })
        });
        if !solved {
            return Ok(None);
        }
    }
    Ok(Some(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{coboundary, verify_cocycle, Domain, FiniteGroupL, GroupAction};
    use crate::group::FiniteGroup;

    fn check(c: &Cocycle, rho: &[usize], f: &[usize]) -> bool {
        let act = c.domain().action().unwrap();
        let l = c.target().group();
        act.group().elements().all(|s| {
            (0..act.num_points()).all(|x| {
                c.at(s, x).unwrap() == l.mul(l.mul(f[act.act(s, x)], rho[s]), l.inv(f[x]))
            })
        })
    }

    #[test]
    fn homomorphism_is_recovered_with_trivial_gauge() {
        let act = GroupAction::regular(FiniteGroup::cyclic(4));
        let l = FiniteGroupL::discrete(FiniteGroup::cyclic(2));
        let c = Cocycle::from_homomorphism(act, l, &[0, 1, 0, 1]).unwrap();
        let HomSearch::Found { rho, f } = cohomologous_to_hom_search(&c, DEFAULT_SEARCH_CAP).unwrap() else {
            panic!()
        };
        assert_eq!(rho, vec![0, 1, 0, 1]);
        assert_eq!(f, vec![0; 4]);
    }

    #[test]
    fn planted_coboundary_is_recovered() {
        let g = FiniteGroup::cyclic(2);
        // two orbits: a swapped pair and a fixed point
        let act = GroupAction::new(g, vec![vec![0, 1, 2], vec![1, 0, 2]]).unwrap();
        let (s3, _) = FiniteGroup::symmetric(3);
        let l = FiniteGroupL::discrete(s3);
        let rho = act.group().homomorphisms_to(l.group()).pop().unwrap();
        let c0 = Cocycle::from_homomorphism(act, l, &rho).unwrap();
        let c = coboundary(&[3, 5, 1], &c0).unwrap();
        let HomSearch::Found { rho, f } = cohomologous_to_hom_search(&c, DEFAULT_SEARCH_CAP).unwrap() else {
            panic!()
        };
        assert!(check(&c, &rho, &f));
        assert_eq!(f[0], 0);
    }

    #[test]
    fn holonomy_obstruction_gives_none() {
        let act = GroupAction::trivial(FiniteGroup::cyclic(2), 2);
        let l = FiniteGroupL::discrete(FiniteGroup::cyclic(2));
        // the generator acts by 0 at one point and by 1 at the other
        let c = Cocycle::on_action(act, l, |g, x| g * x).unwrap();
        assert!(verify_cocycle(&c).holds());
        assert!(matches!(
            cohomologous_to_hom_search(&c, DEFAULT_SEARCH_CAP).unwrap(),
            HomSearch::None { .. }
        ));
        assert!(matches!(cohomologous_to_hom_search(&c, 2).unwrap(), HomSearch::Cap { .. }));
    }

    #[test]
    fn groupoid_cocycles_are_compared_up_to_coboundary() {
        let act = GroupAction::regular(FiniteGroup::cyclic(3));
        let (s3, _) = FiniteGroup::symmetric(3);
        let l = FiniteGroupL::discrete(s3);
        let c0 = Cocycle::identity(Domain::Action(act), l);
        let c1 = coboundary(&[2, 4, 1], &c0).unwrap();
        let f = cohomologous_search(&c0, &c1).unwrap().unwrap();
        assert_eq!(coboundary(&f, &c0).unwrap(), c1);
        // over a free transitive action every cocycle is a coboundary
        let hom = Cocycle::from_homomorphism(
            c0.domain().action().unwrap().clone(),
            c0.target().clone(),
            &[0, 3, 4],
        )
        .unwrap();
        assert!(cohomologous_search(&c0, &hom).unwrap().is_some());
        let fixed = GroupAction::trivial(FiniteGroup::cyclic(3), 2);
        let e = Cocycle::identity(Domain::Action(fixed.clone()), c0.target().clone());
        let hom = Cocycle::from_homomorphism(fixed, c0.target().clone(), &[0, 3, 4]).unwrap();
        assert!(verify_cocycle(&hom).holds());
        assert_eq!(cohomologous_search(&e, &hom).unwrap(), None);
    }
}
