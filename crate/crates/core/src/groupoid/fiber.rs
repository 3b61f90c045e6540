//! Fiberwise maps between wreath products, coset representatives for free
//! factors, and the equivariant collapse map onto a reduction.

use std::collections::BTreeSet;

use num_rational::BigRational;
use serde::Serialize;

use super::construct::{digits, direct_sum, undigits, wreath, FiberedSpace, SemidirectProduct};
use super::independence::freely_independent;
use super::{FiniteGroupoid, GroupoidError, Independence};

/// A set of morphisms on which both `r` and `s` are injective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bisection(Vec<usize>);

impl Bisection {
    pub fn new(g: &FiniteGroupoid, members: Vec<usize>) -> Result<Self, GroupoidError> {
        let mut rs = BTreeSet::new();
        let mut ss = BTreeSet::new();
        for &m in &members {
            if m >= g.num_morphisms() {
                return Err(GroupoidError::BadBisection(format!("unknown morphism {m}")));
            }
            if !rs.insert(g.range(m)) || !ss.insert(g.source(m)) {
                return Err(GroupoidError::BadBisection(format!(
                    "{} repeats a range or source",
                    g.label(m)
                )));
            }
        }
        Ok(Bisection(members))
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn ranges(&self, g: &FiniteGroupoid) -> BTreeSet<usize> {
        self.0.iter().map(|&m| g.range(m)).collect()
    }

    pub fn sources(&self, g: &FiniteGroupoid) -> BTreeSet<usize> {
        self.0.iter().map(|&m| g.source(m)).collect()
    }

    /// The member with range `x`.
    pub fn at_range(&self, g: &FiniteGroupoid, x: usize) -> Option<usize> {
        self.0.iter().copied().find(|&m| g.range(m) == x)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WreathIsoReport {
    /// `Φ` on morphism indices of the source wreath product.
    pub morphism_map: Vec<usize>,
    pub checked_pairs: usize,
    pub bijective: bool,
}

/// Transport supplied by the caller: `(g, b) ↦ φ_g(b)` on fiber morphisms.
pub type Transport<'a> = &'a dyn Fn(usize, usize) -> usize;

/// Builds `Φ(g, b) = (g, φ_g(b))` between two semidirect products over the
/// same base and checks `Φ((g,a)(h,b)) = Φ(g,a)Φ(h,b)` on every composable
/// pair. `phi[x]` maps objects of the source fiber over `x` to objects of
/// the target fiber. Without an explicit transport, `φ_g(b)` is the unique
/// target morphism from `φ(s(b))` to `g⁻¹.φ(g.r(b))`, which exists when the
/// target fibers are principal and `φ` respects their orbits.
pub fn wreath_iso_from_fiber_maps(
    source: &SemidirectProduct,
    target: &SemidirectProduct,
    phi: &[Vec<usize>],
    transport: Option<Transport<'_>>,
) -> Result<WreathIsoReport, GroupoidError> {
    let base = source.base();
    if base != target.base() {
        return Err(GroupoidError::Invalid("wreath products over different bases".into()));
    }
    if phi.len() != base.num_objects() {
        return Err(GroupoidError::Invalid("one fiber map per base object".into()));
    }
    for (x, map) in phi.iter().enumerate() {
        let (from, to) = (source.bundle().fiber(x), target.bundle().fiber(x));
        let mut hit = vec![false; to.num_objects()];
        if map.len() != from.num_objects()
            || map.iter().any(|&y| y >= to.num_objects() || std::mem::replace(&mut hit[y], true))
        {
            return Err(GroupoidError::Invalid(format!("fiber map over {x} is not a bijection")));
        }
        if (0..from.num_objects()).any(|y| from.weight(y) != to.weight(map[y])) {
            return Err(GroupoidError::Invalid(format!("fiber map over {x} changes the measure")));
        }
    }
    let (sb, tb) = (source.bundle(), target.bundle());
    let phi_g = |g: usize, b: usize| -> Result<usize, GroupoidError> {
        if let Some(t) = transport {
            return Ok(t(g, b));
        }
        let (s, r) = (base.source(g), base.range(g));
        let fb = sb.fiber(s);
        let want_s = phi[s][fb.source(b)];
        let moved = phi[r][sb.act_object(g, fb.range(b))];
        let want_r = tb.act_object(base.inverse(g), moved);
        let mut candidates = tb.fiber(s).between(want_r, want_s);
        match (candidates.next(), candidates.next()) {
            (Some(c), None) => Ok(c),
            _ => Err(GroupoidError::NoTransport { base: g, fiber: b }),
        }
    };
    let src = source.groupoid();
    let mut morphism_map = Vec::with_capacity(src.num_morphisms());
    for m in 0..src.num_morphisms() {
        let (g, b) = source.pair(m);
        let c = phi_g(g, b)?;
        if c >= tb.fiber(base.source(g)).num_morphisms() {
            return Err(GroupoidError::NoTransport { base: g, fiber: b });
        }
        morphism_map.push(target.morphism(g, c));
    }
    let tgt = target.groupoid();
    let mut checked_pairs = 0;
    for (a, b, ab) in src.composable_pairs() {
        checked_pairs += 1;
        if tgt.compose(morphism_map[a], morphism_map[b]) != Some(morphism_map[ab]) {
            return Err(GroupoidError::NotHomomorphism {
                left: a,
                right: b,
                product: ab,
                detail: format!("{} · {}", src.label(a), src.label(b)),
            });
        }
    }
    let mut hit = vec![false; tgt.num_morphisms()];
    let bijective = src.num_morphisms() == tgt.num_morphisms()
        && morphism_map.iter().all(|&v| !std::mem::replace(&mut hit[v], true));
    Ok(WreathIsoReport {
        morphism_map,
        checked_pairs,
        bijective,
    })
}

/// Which free factor a normal-form letter comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    H,
    K,
}

/// Units together with the morphisms whose alternating normal form ends in `K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetReps {
    sigma: Vec<bool>,
    normal_forms: Vec<Vec<(Side, usize)>>,
}

impl CosetReps {
    pub fn contains(&self, g: usize) -> bool {
        self.sigma[g]
    }

    pub fn members(&self) -> Vec<usize> {
        (0..self.sigma.len()).filter(|&g| self.sigma[g]).collect()
    }

    /// Alternating normal form of `g`; empty for units.
    pub fn normal_form(&self, g: usize) -> &[(Side, usize)] {
        &self.normal_forms[g]
    }

    /// `g(s(g)Σ) △ r(g)Σ`.
    pub fn defect(&self, groupoid: &FiniteGroupoid, g: usize) -> BTreeSet<usize> {
        let moved: BTreeSet<usize> = groupoid
            .r_fiber(groupoid.source(g))
            .iter()
            .filter(|&&s| self.sigma[s])
            .map(|&s| groupoid.compose(g, s).expect("composable"))
            .collect();
        let here: BTreeSet<usize> = groupoid
            .r_fiber(groupoid.range(g))
            .iter()
            .copied()
            .filter(|&s| self.sigma[s])
            .collect();
        moved.symmetric_difference(&here).copied().collect()
    }

    /// Each left coset `gH` meets `Σ` exactly once.
    pub fn is_transversal(&self, groupoid: &FiniteGroupoid, h: &[usize]) -> bool {
        let mut in_h = vec![false; groupoid.num_morphisms()];
        for &m in h {
            in_h[m] = true;
        }
        (0..groupoid.num_morphisms()).all(|g| {
            let hits = groupoid
                .r_fiber(groupoid.source(g))
                .iter()
                .filter(|&&k| in_h[k])
                .filter(|&&k| self.sigma[groupoid.compose(g, k).expect("composable")])
                .count();
            hits == 1
        })
    }
}

/// Coset representatives for the free factor `H` in `G = H ∗ K`, where `H`
/// contains every unit. Normal forms are enumerated up to `max_len` letters.
pub fn groupoid_coset_reps(
    g: &FiniteGroupoid,
    h: &[usize],
    k: &[usize],
    max_len: usize,
) -> Result<CosetReps, GroupoidError> {
    let mut in_h = vec![false; g.num_morphisms()];
    for &m in h.iter().chain(k) {
        if m >= g.num_morphisms() {
            return Err(GroupoidError::Invalid(format!("unknown morphism {m}")));
        }
    }
    for &m in h {
        in_h[m] = true;
    }
    if (0..g.num_objects()).any(|x| !in_h[g.unit(x)]) {
        return Err(GroupoidError::Invalid("H must contain every unit".into()));
    }
    let subs = [h.to_vec(), k.to_vec()];
    if let Independence::Witness { word } = freely_independent(g, &subs, usize::MAX) {
        return Err(GroupoidError::NotFreelyIndependent(word));
    }
    let letters = |side: Side| {
        let set = if side == Side::H { h } else { k };
        set.iter().copied().filter(|&m| !g.is_unit(m)).collect::<Vec<_>>()
    };
    let (lh, lk) = (letters(Side::H), letters(Side::K));
    let mut normal_forms: Vec<Option<Vec<(Side, usize)>>> = vec![None; g.num_morphisms()];
    for x in 0..g.num_objects() {
        normal_forms[g.unit(x)] = Some(Vec::new());
    }
    let mut frontier: Vec<Vec<(Side, usize)>> = Vec::new();
    for (side, ls) in [(Side::H, &lh), (Side::K, &lk)] {
        for &m in ls {
            if normal_forms[m].is_none() {
                normal_forms[m] = Some(vec![(side, m)]);
                frontier.push(vec![(side, m)]);
            }
        }
    }
    let product = |w: &[(Side, usize)]| {
        w.iter()
            .map(|&(_, m)| m)
            .reduce(|a, b| g.compose(a, b).expect("composable word"))
            .expect("nonempty word")
    };
    let mut len = 1;
    while len < max_len && !frontier.is_empty() {
        len += 1;
        let mut next = Vec::new();
        for w in &frontier {
            let p = product(w);
            let (last, _) = *w.last().unwrap();
            let (side, ls) = if last == Side::H { (Side::K, &lk) } else { (Side::H, &lh) };
            for &m in ls {
                if g.source(p) != g.range(m) {
                    continue;
                }
                let q = g.compose(p, m).unwrap();
                if normal_forms[q].is_none() {
                    let mut longer = w.clone();
                    longer.push((side, m));
                    normal_forms[q] = Some(longer.clone());
                    next.push(longer);
                }
            }
        }
        frontier = next;
    }
    let normal_forms = normal_forms
        .into_iter()
        .enumerate()
        .map(|(m, nf)| {
            nf.ok_or_else(|| {
                GroupoidError::Invalid(format!("{} has no normal form within {max_len} letters", g.label(m)))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let sigma = normal_forms
        .iter()
        .map(|nf| nf.last().is_none_or(|&(side, _)| side == Side::K))
        .collect();
    Ok(CosetReps {
        sigma,
        normal_forms,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RestrictionReport {
    pub n: usize,
    /// `θ` over each base object, on fiber morphism indices.
    pub theta: Vec<Vec<usize>>,
    pub checked: usize,
    pub equivariant: bool,
    /// First `(g, k)` with `θ(g.k) ≠ g.θ(k)`.
    pub first_failure: Option<(usize, usize)>,
    pub bijective: bool,
}

/// `θ(k)_h = ψ(k_{hσ₀}, …, k_{hσ_{n−1}})` from `⊕_G K` to `⊕_{GD} K'`, with
/// `ψ : ⊕ⁿK → K'` given on morphism indices of `direct_sum` of `n` copies
/// of `K`. Equivariance `θ(g.k) = g.θ(k)` is checked for every base
/// morphism and every fiber morphism.
pub fn restriction_claim_iso(
    k: &FiniteGroupoid,
    g: &FiniteGroupoid,
    d: &[usize],
    psi_target: &FiniteGroupoid,
    psi: &[usize],
    sigmas: &[Bisection],
) -> Result<RestrictionReport, GroupoidError> {
    let n = sigmas.len();
    if n == 0 {
        return Err(GroupoidError::BadPartition("no bisections".into()));
    }
    let d_set: BTreeSet<usize> = d.iter().copied().collect();
    let share = BigRational::new(1.into(), (n as i64).into());
    let measure = |set: &BTreeSet<usize>| -> BigRational { set.iter().map(|&x| g.weight(x).clone()).sum() };
    if measure(&d_set) != share {
        return Err(GroupoidError::BadPartition(format!("D does not have measure 1/{n}")));
    }
    let mut covered = BTreeSet::new();
    for (j, s) in sigmas.iter().enumerate() {
        let fresh = Bisection::new(g, s.members().to_vec())?;
        if fresh.ranges(g) != d_set {
            return Err(GroupoidError::BadBisection(format!("σ{j} does not have range D")));
        }
        let e = fresh.sources(g);
        if measure(&e) != share {
            return Err(GroupoidError::BadPartition(format!("E{j} does not have measure 1/{n}")));
        }
        if !covered.is_disjoint(&e) {
            return Err(GroupoidError::BadPartition(format!("E{j} overlaps an earlier piece")));
        }
        covered.extend(e);
    }
    if covered.len() != g.num_objects() {
        return Err(GroupoidError::BadPartition("pieces do not cover the objects".into()));
    }
    let power = direct_sum(std::iter::repeat_n(k, n))?;
    if psi.len() != power.num_morphisms() || psi.iter().any(|&v| v >= psi_target.num_morphisms()) {
        return Err(GroupoidError::Invalid("ψ has the wrong shape".into()));
    }
    for (a, b, ab) in power.composable_pairs() {
        if psi_target.compose(psi[a], psi[b]) != Some(psi[ab]) {
            return Err(GroupoidError::NotHomomorphism {
                left: a,
                right: b,
                product: ab,
                detail: "ψ".into(),
            });
        }
    }
    let w_all = FiberedSpace::left_translation(g);
    let w_d = FiberedSpace::left_translation_onto(g, d);
    // points of GD are numbered in morphism order
    let gd: Vec<usize> = (0..g.num_morphisms()).filter(|&h| d_set.contains(&g.source(h))).collect();
    let source = wreath(k, g, &w_all)?;
    let target = wreath(psi_target, g, &w_d)?;
    let (km, tm) = (k.num_morphisms(), psi_target.num_morphisms());
    let mut theta = Vec::with_capacity(g.num_objects());
    for x in 0..g.num_objects() {
        let from = w_all.fiber(x);
        let to = w_d.fiber(x);
        // for each h in xGD, the coordinates hσ_j read from k
        let reads: Vec<Vec<usize>> = to
            .iter()
            .map(|&p| {
                let h = gd[p];
                sigmas
                    .iter()
                    .map(|s| {
                        let sj = s.at_range(g, g.source(h)).expect("σ covers D");
                        w_all.position(g.compose(h, sj).expect("composable"))
                    })
                    .collect()
            })
            .collect();
        let fiber_size = source.bundle().fiber(x).num_morphisms();
        let map = (0..fiber_size)
            .map(|m| {
                let coords = digits(m, km, from.len());
                let out: Vec<usize> = reads
                    .iter()
                    .map(|r| {
                        let parts: Vec<usize> = r.iter().map(|&j| coords[j]).collect();
                        psi[undigits(&parts, km)]
                    })
                    .collect();
                undigits(&out, tm)
            })
            .collect::<Vec<usize>>();
        theta.push(map);
    }
    let mut checked = 0;
    let mut first_failure = None;
    for a in 0..g.num_morphisms() {
        let (s, r) = (g.source(a), g.range(a));
        for m in 0..source.bundle().fiber(s).num_morphisms() {
            checked += 1;
            let lhs = theta[r][source.bundle().act(a, m)];
            let rhs = target.bundle().act(a, theta[s][m]);
            if lhs != rhs && first_failure.is_none() {
                first_failure = Some((a, m));
            }
        }
    }
    let bijective = theta.iter().enumerate().all(|(x, map)| {
        let size = target.bundle().fiber(x).num_morphisms();
        let mut hit = vec![false; size];
        map.len() == size && map.iter().all(|&v| !std::mem::replace(&mut hit[v], true))
    });
    Ok(RestrictionReport {
        n,
        theta,
        checked,
        equivariant: first_failure.is_none(),
        first_failure,
        bijective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{relation_subgroupoid, uniform_weights, wreath_default};

    fn full(n: usize) -> FiniteGroupoid {
        FiniteGroupoid::full_relation(uniform_weights(n))
    }

    #[test]
    fn identity_fiber_map_gives_identity() {
        let w = wreath_default(&full(2), &full(2)).unwrap();
        let phi: Vec<Vec<usize>> = (0..2).map(|x| (0..w.bundle().fiber(x).num_objects()).collect()).collect();
        let r = wreath_iso_from_fiber_maps(&w, &w, &phi, None).unwrap();
        assert_eq!(r.morphism_map, (0..64).collect::<Vec<_>>());
        assert!(r.bijective);
        assert_eq!(r.checked_pairs, 512);
    }

    #[test]
    fn alphabet_relabeling_is_a_homomorphism() {
        let w = wreath_default(&full(2), &full(2)).unwrap();
        // swap the two lamp states in every coordinate: object (a,b) ↦ (1-a, 1-b)
        let phi: Vec<Vec<usize>> = (0..2).map(|_| vec![3, 2, 1, 0]).collect();
        let r = wreath_iso_from_fiber_maps(&w, &w, &phi, None).unwrap();
        assert!(r.bijective);
        assert_ne!(r.morphism_map, (0..64).collect::<Vec<_>>());
    }

    #[test]
    fn broken_transport_is_caught() {
        let w = wreath_default(&full(2), &full(2)).unwrap();
        let phi: Vec<Vec<usize>> = (0..2).map(|_| (0..4).collect()).collect();
        // identity transport except one fiber morphism over the base morphism (0,1)
        let bad = |g: usize, b: usize| if g == 1 && b == 5 { 6 } else { b };
        let err = wreath_iso_from_fiber_maps(&w, &w, &phi, Some(&bad)).unwrap_err();
        assert!(matches!(err, GroupoidError::NotHomomorphism { .. }), "{err:?}");
    }

    #[test]
    fn coset_reps_of_a_free_factor() {
        let g = full(3);
        let h = relation_subgroupoid(&[0, 0, 1]);
        let k = relation_subgroupoid(&[0, 1, 1]);
        let reps = groupoid_coset_reps(&g, &h, &k, 8).unwrap();
        assert!(reps.is_transversal(&g, &h));
        // units plus (1,2), (2,1), (0,2)
        assert_eq!(reps.members(), vec![0, 2, 4, 5, 7, 8]);
        for &m in &k {
            assert!(reps.defect(&g, m).is_empty(), "{}", g.label(m));
        }
        for &m in h.iter().filter(|&&m| !g.is_unit(m)) {
            let expected: BTreeSet<usize> = [m, g.unit(g.range(m))].into();
            assert_eq!(reps.defect(&g, m), expected);
        }
        assert_eq!(reps.normal_form(2), &[(Side::H, 1), (Side::K, 5)]);
    }

    #[test]
    fn dependent_factors_are_rejected() {
        let g = full(4);
        let h = relation_subgroupoid(&[0, 0, 1, 1]);
        let k = relation_subgroupoid(&[0, 1, 1, 0]);
        assert!(matches!(
            groupoid_coset_reps(&g, &h, &k, 8),
            Err(GroupoidError::NotFreelyIndependent(_))
        ));
    }

    fn pairing_setup() -> (FiniteGroupoid, FiniteGroupoid, FiniteGroupoid, Vec<usize>) {
        let g = full(2);
        let k = FiniteGroupoid::unit_groupoid(uniform_weights(2));
        let k4 = FiniteGroupoid::unit_groupoid(uniform_weights(4));
        let psi = (0..4).collect();
        (g, k, k4, psi)
    }

    #[test]
    fn pairing_collapse_is_equivariant() {
        let (g, k, k4, psi) = pairing_setup();
        // σ₀ = unit at 0, σ₁ = the arrow 1 → 0
        let sigmas = [Bisection::new(&g, vec![0]).unwrap(), Bisection::new(&g, vec![1]).unwrap()];
        let r = restriction_claim_iso(&k, &g, &[0], &k4, &psi, &sigmas).unwrap();
        assert_eq!(r.checked, 16);
        assert!(r.equivariant && r.bijective);
    }

    #[test]
    fn single_piece_is_identity() {
        let g = full(2);
        let k = full(2);
        let units = Bisection::new(&g, vec![0, 3]).unwrap();
        let psi: Vec<usize> = (0..4).collect();
        let r = restriction_claim_iso(&k, &g, &[0, 1], &k, &psi, &[units]).unwrap();
        assert!(r.equivariant && r.bijective);
        assert!(r.theta.iter().all(|m| m.iter().enumerate().all(|(i, &v)| i == v)));
    }

    #[test]
    fn wrong_range_is_a_bad_bisection() {
        let (g, k, k4, psi) = pairing_setup();
        let sigmas = [Bisection::new(&g, vec![0]).unwrap(), Bisection::new(&g, vec![2]).unwrap()];
        assert!(matches!(
            restriction_claim_iso(&k, &g, &[0], &k4, &psi, &sigmas),
            Err(GroupoidError::BadBisection(_))
        ));
        assert!(matches!(Bisection::new(&g, vec![0, 1]), Err(GroupoidError::BadBisection(_))));
        let overlap = [Bisection::new(&g, vec![0]).unwrap(), Bisection::new(&g, vec![0]).unwrap()];
        assert!(matches!(
            restriction_claim_iso(&k, &g, &[0], &k4, &psi, &overlap),
            Err(GroupoidError::BadPartition(_))
        ));
    }
}
