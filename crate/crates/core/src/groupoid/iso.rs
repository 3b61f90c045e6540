//! Isomorphism search between finite measured groupoids.
//!
//! Objects are matched by backtracking in index order, pruned by weight,
//! r-fiber size and isotropy order, with whole orbit classes mapped to
//! orbit classes. A complete object bijection extends to morphisms
//! through connecting arrows and an isomorphism of isotropy groups at one
//! base object per class.

use serde::Serialize;

use super::FiniteGroupoid;
use crate::group::FiniteGroup;

/// Default bound on backtracking nodes.
pub const DEFAULT_NODE_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupoidIso {
    pub objects: Vec<usize>,
    pub morphisms: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum IsoOutcome {
    Isomorphic(GroupoidIso),
    None,
    Cap { nodes: u64 },
}

struct Shape {
    classes: Vec<usize>,
    members: Vec<Vec<usize>>,
    isotropy: Vec<usize>,
}

impl Shape {
    fn of(g: &FiniteGroupoid) -> Self {
        let classes = g.orbit_classes();
        let mut members = vec![Vec::new(); g.num_objects()];
        for (x, &c) in classes.iter().enumerate() {
            members[c].push(x);
        }
        let isotropy = (0..g.num_objects()).map(|x| g.between(x, x).count()).collect();
        Shape {
            classes,
            members,
            isotropy,
        }
    }
}

/// Searches for a measure-preserving isomorphism `g1 → g2`. The object map
/// returned is the lexicographically least admissible one, and every
/// returned isomorphism has passed [`verify_isomorphism`].
pub fn iso_search(g1: &FiniteGroupoid, g2: &FiniteGroupoid, node_cap: u64) -> IsoOutcome {
    if g1.num_objects() != g2.num_objects() || g1.num_morphisms() != g2.num_morphisms() {
        return IsoOutcome::None;
    }
    let (s1, s2) = (Shape::of(g1), Shape::of(g2));
    let key = |g: &FiniteGroupoid, s: &Shape, x: usize| {
        (
            g.weight(x).clone(),
            g.r_fiber(x).len(),
            s.isotropy[x],
            s.members[s.classes[x]].len(),
        )
    };
    let mut k1: Vec<_> = (0..g1.num_objects()).map(|x| key(g1, &s1, x)).collect();
    let mut k2: Vec<_> = (0..g2.num_objects()).map(|x| key(g2, &s2, x)).collect();
    let keys1 = k1.clone();
    let keys2 = k2.clone();
    k1.sort();
    k2.sort();
    if k1 != k2 {
        return IsoOutcome::None;
    }
    let mut search = Search {
        g1,
        g2,
        s1: &s1,
        s2: &s2,
        keys1: &keys1,
        keys2: &keys2,
        objects: vec![usize::MAX; g1.num_objects()],
        used: vec![false; g2.num_objects()],
        class_map: vec![usize::MAX; g1.num_objects()],
        class_used: vec![false; g2.num_objects()],
        nodes: 0,
        cap: node_cap,
    };
    match search.run(0) {
        Step::Found(iso) => IsoOutcome::Isomorphic(iso),
        Step::Cap => IsoOutcome::Cap { nodes: search.nodes },
        Step::Exhausted => IsoOutcome::None,
    }
}

enum Step {
    Found(GroupoidIso),
    Cap,
    Exhausted,
}

type Key = (num_rational::BigRational, usize, usize, usize);

struct Search<'a> {
    g1: &'a FiniteGroupoid,
    g2: &'a FiniteGroupoid,
    s1: &'a Shape,
    s2: &'a Shape,
    keys1: &'a [Key],
    keys2: &'a [Key],
    objects: Vec<usize>,
    used: Vec<bool>,
    class_map: Vec<usize>,
    class_used: Vec<bool>,
    nodes: u64,
    cap: u64,
}

impl Search<'_> {
    fn run(&mut self, x: usize) -> Step {
        if x == self.objects.len() {
            return match self.extend() {
                Some(iso) => Step::Found(iso),
                None => Step::Exhausted,
            };
        }
        let c1 = self.s1.classes[x];
        for y in 0..self.g2.num_objects() {
            if self.used[y] || self.keys1[x] != self.keys2[y] {
                continue;
            }
            let c2 = self.s2.classes[y];
            let fresh = self.class_map[c1] == usize::MAX;
            if fresh && self.class_used[c2] || !fresh && self.class_map[c1] != c2 {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.cap {
                return Step::Cap;
            }
            self.objects[x] = y;
            self.used[y] = true;
            if fresh {
                self.class_map[c1] = c2;
                self.class_used[c2] = true;
            }
            match self.run(x + 1) {
                Step::Exhausted => {}
                done => return done,
            }
            self.used[y] = false;
            if fresh {
                self.class_map[c1] = usize::MAX;
                self.class_used[c2] = false;
            }
        }
        Step::Exhausted
    }

    /// Extends the object bijection class by class.
    fn extend(&self) -> Option<GroupoidIso> {
        let (g1, g2) = (self.g1, self.g2);
        let mut morphisms = vec![usize::MAX; g1.num_morphisms()];
        for (c, members) in self.s1.members.iter().enumerate() {
            if members.is_empty() || members[0] != c {
                continue;
            }
            let b1 = c;
            let b2 = self.objects[b1];
            let (iso1, e1) = g1.isotropy_group(b1);
            let (iso2, e2) = g2.isotropy_group(b2);
            let theta = first_isomorphism(&iso1, &iso2)?;
            // connecting arrows from the base object
            let t1: Vec<usize> = members.iter().map(|&y| g1.between(y, b1).next().unwrap()).collect();
            let t2: Vec<usize> = members
                .iter()
                .map(|&y| g2.between(self.objects[y], b2).next().unwrap())
                .collect();
            let slot = |y: usize| members.binary_search(&y).unwrap();
            for &y in members {
                for &g in g1.s_fiber(y) {
                    let z = g1.range(g);
                    let (ty, tz) = (t1[slot(y)], t1[slot(z)]);
                    let core = g1.compose(g1.compose(g1.inverse(tz), g)?, ty)?;
                    let k = e1.iter().position(|&e| e == core)?;
                    let image = e2[theta[k]];
                    let (uy, uz) = (t2[slot(y)], t2[slot(z)]);
                    morphisms[g] = g2.compose(g2.compose(uz, image)?, g2.inverse(uy))?;
                }
            }
        }
        let iso = GroupoidIso {
            objects: self.objects.clone(),
            morphisms,
        };
        verify_isomorphism(g1, g2, &iso).ok().map(|_| iso)
    }
}

fn first_isomorphism(a: &FiniteGroup, b: &FiniteGroup) -> Option<Vec<usize>> {
    if a.order() != b.order() {
        return None;
    }
    let gens = a.generating_set();
    let mut images = vec![0usize; gens.len()];
    loop {
        if let Some(m) = a.extend_hom(&gens, &images, b) {
            if a.is_isomorphism(&m, b) {
                return Some(m);
            }
        }
        let mut k = 0;
        loop {
            if k == images.len() {
                return None;
            }
            images[k] += 1;
            if images[k] < b.order() {
                break;
            }
            images[k] = 0;
            k += 1;
        }
    }
}

/// Exhaustive check that `iso` is a measure-preserving isomorphism of
/// groupoids; on failure names the first broken condition.
pub fn verify_isomorphism(
    g1: &FiniteGroupoid,
    g2: &FiniteGroupoid,
    iso: &GroupoidIso,
) -> Result<(), String> {
    let bijective = |map: &[usize], n: usize| {
        let mut hit = vec![false; n];
        map.len() == n && map.iter().all(|&v| v < n && !std::mem::replace(&mut hit[v], true))
    };
    if !bijective(&iso.objects, g2.num_objects()) || g1.num_objects() != g2.num_objects() {
        return Err("object map is not a bijection".into());
    }
    if !bijective(&iso.morphisms, g2.num_morphisms()) || g1.num_morphisms() != g2.num_morphisms() {
        return Err("morphism map is not a bijection".into());
    }
    for x in 0..g1.num_objects() {
        if g1.weight(x) != g2.weight(iso.objects[x]) {
            return Err(format!("weight differs at object {x}"));
        }
    }
    for g in 0..g1.num_morphisms() {
        let h = iso.morphisms[g];
        if g2.source(h) != iso.objects[g1.source(g)] || g2.range(h) != iso.objects[g1.range(g)] {
            return Err(format!("endpoints of morphism {g} are not respected"));
        }
    }
    for (a, b, ab) in g1.composable_pairs() {
        if g2.compose(iso.morphisms[a], iso.morphisms[b]) != Some(iso.morphisms[ab]) {
            return Err(format!("composition of {a} and {b} is not respected"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{action_groupoid, ratio, uniform_weights};

    #[test]
    fn self_isomorphism_is_identity() {
        let g = FiniteGroupoid::equivalence_relation(&[0, 1, 0, 1], uniform_weights(4)).unwrap();
        let IsoOutcome::Isomorphic(iso) = iso_search(&g, &g, DEFAULT_NODE_CAP) else { panic!() };
        assert_eq!(iso.objects, vec![0, 1, 2, 3]);
        assert_eq!(iso.morphisms, (0..g.num_morphisms()).collect::<Vec<_>>());
    }

    #[test]
    fn full_relation_matches_free_transitive_action() {
        let full = FiniteGroupoid::full_relation(uniform_weights(2));
        let swap = action_groupoid(
            &FiniteGroup::cyclic(2),
            &[vec![0, 1], vec![1, 0]],
            uniform_weights(2),
        )
        .unwrap();
        let IsoOutcome::Isomorphic(iso) = iso_search(&full, &swap, DEFAULT_NODE_CAP) else {
            panic!()
        };
        assert!(verify_isomorphism(&full, &swap, &iso).is_ok());
    }

    #[test]
    fn size_and_structure_mismatches() {
        let full = FiniteGroupoid::full_relation(uniform_weights(2));
        let units = FiniteGroupoid::unit_groupoid(uniform_weights(2));
        assert_eq!(iso_search(&full, &units, DEFAULT_NODE_CAP), IsoOutcome::None);
        // C₂ acting trivially on 2 points vs the full relation: same counts, different isotropy
        let trivial = action_groupoid(
            &FiniteGroup::cyclic(2),
            &[vec![0, 1], vec![0, 1]],
            uniform_weights(2),
        )
        .unwrap();
        assert_eq!(iso_search(&full, &trivial, DEFAULT_NODE_CAP), IsoOutcome::None);
        let skew = FiniteGroupoid::unit_groupoid(vec![ratio(1, 3), ratio(2, 3)]);
        assert_eq!(iso_search(&units, &skew, DEFAULT_NODE_CAP), IsoOutcome::None);
    }

    #[test]
    fn cap_is_reported() {
        let g = FiniteGroupoid::unit_groupoid(uniform_weights(6));
        assert!(matches!(iso_search(&g, &g, 3), IsoOutcome::Cap { .. }));
    }

    #[test]
    fn nonabelian_isotropy() {
        let (s3, perms) = FiniteGroup::symmetric(3);
        let on_points = action_groupoid(&s3, &perms, uniform_weights(3)).unwrap();
        let IsoOutcome::Isomorphic(iso) = iso_search(&on_points, &on_points, DEFAULT_NODE_CAP)
        else {
            panic!()
        };
        assert!(verify_isomorphism(&on_points, &on_points, &iso).is_ok());
    }
}
