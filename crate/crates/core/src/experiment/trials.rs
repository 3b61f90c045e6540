//! Seeded trials shared by the runner and the acceptance suite. Instance
//! `i` of a trial draws from its own stream `split_seed(seed, i)`, so
//! results do not depend on scheduling.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cocycle::{
    coboundary, cohomologous_to_hom_search, edge_flip_sensitivity, verify_tree_cocycle, Cocycle,
    CocycleError, CocycleReport, FiniteGroupL, FlipReport, GroupAction, HomSearch, Labeling,
    Orientation, TreeAction,
};
use crate::group::{Element, FiniteGroup, Group, GroupSpec};
use crate::groupoid::{freely_independent, relation_subgroupoid, uniform_weights, FiniteGroupoid, GroupoidError, StructureGraph};
use crate::lift::{verify_cofinite_equivariance, FinitaryMap, LiftError};
use crate::shift::hash::split_seed;
use crate::shift::{empirical_entropy, shannon_entropy, Alphabet, Configuration, ShiftError};

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(split_seed(seed, stream))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LiftCase {
    pub delta: String,
    pub seed: u64,
    pub disagreements: Vec<String>,
    pub predicted: Option<Vec<String>>,
    #[serde(rename = "match")]
    pub matches: Option<bool>,
    pub eval_failures: usize,
    pub stabilized: bool,
}

/// Compares `φ(δ.y)` with `δ.φ(y)` on the ball for every `δ` and `seeds`
/// seeded points `y`.
pub fn lift_cases(
    map: &dyn FinitaryMap,
    deltas: &[Element],
    radius: usize,
    seed: u64,
    seeds: u64,
) -> Result<Vec<LiftCase>, LiftError> {
    let g = map.group();
    let fmt = |v: &[Element]| v.iter().map(|c| g.format(c)).collect::<Vec<_>>();
    let mut out = Vec::new();
    for k in 0..seeds {
        let s = split_seed(seed, k);
        let y = Configuration::seeded(g, map.source(), s);
        for delta in deltas {
            let r = verify_cofinite_equivariance(map, delta, &y, radius)?;
            out.push(LiftCase {
                delta: g.format(delta),
                seed: s,
                disagreements: fmt(&r.disagreements),
                predicted: r.predicted.as_deref().map(fmt),
                matches: r.matches,
                eval_failures: r.eval_failures.len(),
                stabilized: r.stabilized,
            });
        }
    }
    Ok(out)
}

/// Labels renumbered by first appearance.
pub fn normalize_labels(labels: &[usize]) -> Vec<usize> {
    let mut seen: Vec<usize> = Vec::new();
    labels
        .iter()
        .map(|l| match seen.iter().position(|s| s == l) {
            Some(i) => i,
            None => {
                seen.push(*l);
                seen.len() - 1
            }
        })
        .collect()
}

pub fn random_partition(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let k = rng.gen_range(1..=n);
    let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
    normalize_labels(&labels)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionPair {
    pub r0: Vec<usize>,
    pub r1: Vec<usize>,
    pub word_search: bool,
    pub acyclic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Crossval {
    pub instances: usize,
    pub agreements: usize,
    pub independent: usize,
    pub mismatches: Vec<PartitionPair>,
}

/// Word search for alternating unit products (to length `2|X|`) against
/// acyclicity of the structure graph, on random pairs of partitions of
/// `|X| ≤ max_points` points inside the full relation.
pub fn indep_crossval(seed: u64, instances: usize, max_points: usize) -> Result<Crossval, GroupoidError> {
    if max_points < 2 {
        return Err(GroupoidError::Invalid("need at least two points".into()));
    }
    let cases = (0..instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng(seed, i as u64);
            let n = rng.gen_range(2..=max_points);
            let (r0, r1) = (random_partition(&mut rng, n), random_partition(&mut rng, n));
            let full = FiniteGroupoid::full_relation(uniform_weights(n));
            let subs = [relation_subgroupoid(&r0), relation_subgroupoid(&r1)];
            let word_search = freely_independent(&full, &subs, 2 * n).is_independent();
            let acyclic = StructureGraph::new(&r0, &r1)?.is_acyclic();
            Ok(PartitionPair {
                r0,
                r1,
                word_search,
                acyclic,
            })
        })
        .collect::<Result<Vec<_>, GroupoidError>>()?;
    Ok(Crossval {
        instances,
        agreements: cases.iter().filter(|c| c.word_search == c.acyclic).count(),
        independent: cases.iter().filter(|c| c.word_search).count(),
        mismatches: cases.into_iter().filter(|c| c.word_search != c.acyclic).collect(),
    })
}

/// The Klein four-group as `C₂ × C₂` with `(a, b) ↦ 2a + b`.
pub fn klein_four() -> FiniteGroup {
    let table = (0..4).map(|a| (0..4).map(|b| a ^ b).collect()).collect();
    FiniteGroup::from_table(table, ["e", "b", "a", "ab"].map(String::from).to_vec()).expect("group table")
}

/// Small groups used as acting and target groups, all of order at most 6.
pub fn small_groups() -> Vec<(&'static str, FiniteGroup)> {
    vec![
        ("C2", FiniteGroup::cyclic(2)),
        ("C3", FiniteGroup::cyclic(3)),
        ("C4", FiniteGroup::cyclic(4)),
        ("V4", klein_four()),
        ("C5", FiniteGroup::cyclic(5)),
        ("C6", FiniteGroup::cyclic(6)),
        ("S3", FiniteGroup::symmetric(3).0),
    ]
}

/// Every subgroup, by brute force over subsets.
pub fn subgroups(g: &FiniteGroup) -> Vec<Vec<usize>> {
    let n = g.order();
    assert!(n <= 12, "subset enumeration is for small groups");
    (0u32..1 << n)
        .filter(|mask| mask & (1 << g.identity()) != 0)
        .map(|mask| (0..n).filter(|&a| mask & (1 << a) != 0).collect::<Vec<_>>())
        .filter(|h| h.iter().all(|&a| h.iter().all(|&b| h.contains(&g.mul(a, b)))))
        .collect()
}

/// `Γ ↷ Γ/H` by left multiplication, cosets numbered by least element.
pub fn coset_action(g: &FiniteGroup, h: &[usize]) -> Vec<Vec<usize>> {
    let mut coset_of = vec![usize::MAX; g.order()];
    let mut reps = Vec::new();
    for a in g.elements() {
        if coset_of[a] == usize::MAX {
            for &m in h {
                coset_of[g.mul(a, m)] = reps.len();
            }
            reps.push(a);
        }
    }
    g.elements()
        .map(|s| reps.iter().map(|&r| coset_of[g.mul(s, r)]).collect())
        .collect()
}

/// A disjoint union of coset spaces with at most `max_points` points.
pub fn random_action(rng: &mut impl Rng, g: &FiniteGroup, max_points: usize) -> GroupAction {
    let subs = subgroups(g);
    let mut perms: Vec<Vec<usize>> = vec![Vec::new(); g.order()];
    let mut size = 0;
    loop {
        let fits: Vec<&Vec<usize>> = subs.iter().filter(|h| size + g.order() / h.len() <= max_points).collect();
        let Some(h) = fits.choose(rng) else { break };
        for (p, q) in perms.iter_mut().zip(coset_action(g, h)) {
            p.extend(q.into_iter().map(|y| y + size));
        }
        size += g.order() / h.len();
        if !rng.gen_bool(0.5) {
            break;
        }
    }
    GroupAction::new(g.clone(), perms).expect("disjoint union of coset actions")
}

/// True when `c(γ, x) = f(γ.x)ρ(γ)f(x)⁻¹` everywhere and `ρ` is a homomorphism.
pub fn is_hom_pair(c: &Cocycle, rho: &[usize], f: &[usize]) -> bool {
    let Some(act) = c.domain().action() else { return false };
    let (g, l) = (act.group(), c.target().group());
    if rho.len() != g.order() || f.len() != act.num_points() {
        return false;
    }
    let hom = g.elements().all(|a| g.elements().all(|b| rho[g.mul(a, b)] == l.mul(rho[a], rho[b])));
    hom && g.elements().all(|s| {
        (0..act.num_points()).all(|x| c.at(s, x) == Some(l.mul(l.mul(f[act.act(s, x)], rho[s]), l.inv(f[x]))))
    })
}

/// Exhaustive search over every `f: X → L`; `ρ` is then forced by one point.
pub fn brute_force_hom(c: &Cocycle) -> bool {
    let act = c.domain().action().expect("cocycle over an action");
    let (g, l) = (act.group(), c.target().group());
    let n = act.num_points();
    let q = l.order();
    let total = (q as u64).pow(n as u32);
    (0..total).any(|code| {
        let mut f = vec![0; n];
        let mut rest = code;
        for v in f.iter_mut() {
            *v = (rest % q as u64) as usize;
            rest /= q as u64;
        }
        let rho: Vec<usize> = g
            .elements()
            .map(|s| l.mul(l.mul(l.inv(f[act.act(s, 0)]), c.at(s, 0).expect("point 0")), f[0]))
            .collect();
        is_hom_pair(c, &rho, &f)
    })
}

/// Largest `|X|·|L|` handed to [`brute_force_hom`].
pub const BRUTE_FORCE_LIMIT: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolverCase {
    pub acting: String,
    pub target: String,
    pub points: usize,
    pub planted: bool,
    pub outcome: String,
    pub sound: bool,
    pub brute_force: Option<bool>,
}

impl SolverCase {
    pub fn agrees(&self) -> bool {
        let found = self.outcome == "found";
        self.sound && self.brute_force.is_none_or(|b| b == found) && (!self.planted || found)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolverSummary {
    pub instances: usize,
    pub planted_recovered: usize,
    pub mixed_found: usize,
    pub brute_force_compared: usize,
    pub brute_force_agreements: usize,
    pub failures: Vec<SolverCase>,
}

fn solve_case(c: &Cocycle, acting: &str, target: &str, planted: bool, cap: u64) -> Result<SolverCase, CocycleError> {
    let act = c.domain().action().expect("cocycle over an action");
    let (outcome, sound) = match cohomologous_to_hom_search(c, cap)? {
        HomSearch::Found { rho, f } => ("found", is_hom_pair(c, &rho, &f)),
        HomSearch::None { .. } => ("none", true),
        HomSearch::Cap { .. } => ("cap", true),
    };
    let small = act.num_points() * c.target().order() <= BRUTE_FORCE_LIMIT;
    Ok(SolverCase {
        acting: acting.into(),
        target: target.into(),
        points: act.num_points(),
        planted,
        outcome: outcome.into(),
        sound,
        brute_force: small.then(|| brute_force_hom(c)),
    })
}

/// Instance `i` draws an acting group, a target and an action on at most
/// `max_points` points. The planted cocycle is a coboundary of one
/// homomorphism; the mixed one uses an independent homomorphism per orbit.
pub fn solver_trials(seed: u64, instances: usize, max_points: usize, cap: u64) -> Result<SolverSummary, CocycleError> {
    let groups = small_groups();
    let acting: Vec<&(&str, FiniteGroup)> = groups.iter().filter(|(_, g)| g.order() <= 6).collect();
    let cases = (0..instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng(seed, i as u64);
            let (gname, g) = acting.choose(&mut rng).expect("groups");
            let (lname, l) = groups.choose(&mut rng).expect("groups");
            let act = random_action(&mut rng, g, max_points);
            let n = act.num_points();
            let homs = g.homomorphisms_to(l);
            let target = FiniteGroupL::discrete(l.clone());
            let f: Vec<usize> = (0..n).map(|_| rng.gen_range(0..l.order())).collect();
            let rho = homs.choose(&mut rng).expect("trivial homomorphism");
            let hom = Cocycle::from_homomorphism(act.clone(), target.clone(), rho)?;
            let planted = coboundary(&f, &hom)?;
            let orbit_of = {
                let mut o = vec![0; n];
                for (k, orbit) in act.orbits().iter().enumerate() {
                    for &x in orbit {
                        o[x] = k;
                    }
                }
                o
            };
            let per_orbit: Vec<&Vec<usize>> = act
                .orbits()
                .iter()
                .map(|_| homs.choose(&mut rng).expect("trivial homomorphism"))
                .collect();
            let mixed = Cocycle::on_action(act.clone(), target, |s, x| {
                let y = act.act(s, x);
                l.mul(l.mul(f[y], per_orbit[orbit_of[x]][s]), l.inv(f[x]))
            })?;
            Ok((
                solve_case(&planted, gname, lname, true, cap)?,
                solve_case(&mixed, gname, lname, false, cap)?,
            ))
        })
        .collect::<Result<Vec<_>, CocycleError>>()?;
    let all: Vec<&SolverCase> = cases.iter().flat_map(|(a, b)| [a, b]).collect();
    Ok(SolverSummary {
        instances,
        planted_recovered: cases.iter().filter(|(p, _)| p.outcome == "found" && p.sound).count(),
        mixed_found: cases.iter().filter(|(_, m)| m.outcome == "found").count(),
        brute_force_compared: all.iter().filter(|c| c.brute_force.is_some()).count(),
        brute_force_agreements: all
            .iter()
            .filter(|c| c.brute_force.is_some_and(|b| b == (c.outcome == "found")))
            .count(),
        failures: all.into_iter().filter(|c| !c.agrees()).cloned().collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeTrial {
    pub target: String,
    pub labelings: usize,
    pub max_len: usize,
    pub orientation: Orientation,
    pub identity: CocycleReport,
    pub flips_checked: usize,
    pub flips_failed: usize,
    pub first_flip_failure: Option<FlipReport>,
}

/// The cocycle identity on `labelings` seeded labelings, then every
/// on-geodesic flip for every `γ` with `|γ| ≤ max_len` on as many labelings
/// drawn from `pair`.
pub fn tree_trial(
    ta: &TreeAction,
    l: &FiniteGroupL,
    name: &str,
    labelings: usize,
    max_len: usize,
    orientation: Orientation,
    pair: (usize, usize),
    seed: u64,
) -> Result<TreeTrial, CocycleError> {
    let xs: Vec<Labeling> = (0..labelings)
        .map(|k| Labeling::seeded(ta, l, split_seed(split_seed(seed, 0), k as u64)))
        .collect();
    let identity = verify_tree_cocycle(ta, l, &xs, max_len, orientation)?;
    let elems: Vec<usize> = (0..ta.num_elements()).filter(|&g| ta.element_length(g) <= max_len).collect();
    let flips = (0..labelings)
        .into_par_iter()
        .map(|k| {
            let x = Labeling::seeded_pair(ta, pair, split_seed(split_seed(seed, 1), k as u64));
            let mut reports = Vec::new();
            for &g in &elems {
                let end = ta
                    .act(ta.inv(g), ta.base())
                    .ok_or_else(|| CocycleError::TruncationExceeded(ta.element_name(g)))?;
                for e in ta.geodesic_edges(ta.base(), end) {
                    reports.push(edge_flip_sensitivity(ta, l, &x, g, e, pair, true)?);
                }
            }
            Ok(reports)
        })
        .collect::<Result<Vec<_>, CocycleError>>()?;
    let flips: Vec<FlipReport> = flips.into_iter().flatten().collect();
    Ok(TreeTrial {
        target: name.into(),
        labelings,
        max_len,
        orientation,
        identity,
        flips_checked: flips.len(),
        flips_failed: flips.iter().filter(|f| !f.holds()).count(),
        first_flip_failure: flips.into_iter().find(|f| !f.holds()),
    })
}

/// `S₃` in lexicographic order with transpositions at distance 1/2 from
/// `e` and 3-cycles at distance 1.
pub fn s3_class_metric() -> FiniteGroupL {
    let (s3, perms) = FiniteGroup::symmetric(3);
    let w = perms
        .iter()
        .map(|p| match p.iter().enumerate().filter(|(i, &j)| *i == j).count() {
            3 => crate::groupoid::ratio(0, 1),
            1 => crate::groupoid::ratio(1, 2),
            _ => crate::groupoid::ratio(1, 1),
        })
        .collect();
    FiniteGroupL::with_class_metric(s3, w).expect("conjugation-invariant weights")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyTrial {
    pub symbols: usize,
    pub exact: f64,
    pub empirical: f64,
    pub samples: usize,
    pub deviation: f64,
}

/// Shannon entropy of `alphabet` and the plug-in entropy of the symbols at
/// `a^0, …, a^{samples−1}` of one seeded point over `Z`.
pub fn entropy_trial(alphabet: &Arc<Alphabet>, samples: usize, seed: u64) -> Result<EntropyTrial, ShiftError> {
    let z = Group::new(GroupSpec::integers("a"))?;
    let a = z.parse("a")?;
    let y = Configuration::seeded(&z, alphabet, seed);
    let draws = (0..samples)
        .into_par_iter()
        .map(|i| y.eval(&z.pow(&a, i as i64)))
        .collect::<Result<Vec<usize>, ShiftError>>()?;
    let exact = shannon_entropy(alphabet);
    let empirical = empirical_entropy(&draws).unwrap_or(f64::NAN);
    Ok(EntropyTrial {
        symbols: alphabet.len(),
        exact,
        empirical,
        samples,
        deviation: (empirical - exact).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subgroup_counts() {
        let counts: Vec<usize> = small_groups().iter().map(|(_, g)| subgroups(g).len()).collect();
        assert_eq!(counts, vec![2, 2, 3, 5, 2, 4, 6]);
    }

    #[test]
    fn coset_actions_are_transitive() {
        let (s3, _) = FiniteGroup::symmetric(3);
        for h in subgroups(&s3) {
            let act = GroupAction::new(s3.clone(), coset_action(&s3, &h)).unwrap();
            assert_eq!(act.orbits().len(), 1);
            assert_eq!(act.num_points(), 6 / h.len());
        }
    }

    #[test]
    fn random_actions_fit() {
        let mut r = rng(3, 0);
        for _ in 0..50 {
            let act = random_action(&mut r, &klein_four(), 6);
            assert!((1..=6).contains(&act.num_points()));
        }
    }

    #[test]
    fn brute_force_sees_the_holonomy_obstruction() {
        let act = GroupAction::trivial(FiniteGroup::cyclic(2), 2);
        let l = FiniteGroupL::discrete(FiniteGroup::cyclic(2));
        let c = Cocycle::on_action(act.clone(), l.clone(), |g, x| g * x).unwrap();
        assert!(!brute_force_hom(&c));
        let c = Cocycle::on_action(act, l, |g, _| g).unwrap();
        assert!(brute_force_hom(&c));
    }

    #[test]
    fn small_crossval_agrees() {
        let r = indep_crossval(1, 40, 5).unwrap();
        assert_eq!(r.agreements, 40);
        assert!(r.independent > 0 && r.independent < 40);
    }

    #[test]
    fn small_solver_run() {
        let s = solver_trials(2, 20, 4, crate::cocycle::DEFAULT_SEARCH_CAP).unwrap();
        assert_eq!(s.planted_recovered, 20);
        assert!(s.failures.is_empty(), "{:?}", s.failures);
    }

    #[test]
    fn labels_normalize_by_first_appearance() {
        assert_eq!(normalize_labels(&[5, 2, 5, 7]), vec![0, 1, 0, 2]);
    }
}
