//! Choice functions for a subrelation and the associated index cocycle
//! `σ(y, x)(i) = j` iff `[φ_i(x)]_S = [φ_j(y)]_S`.

use std::collections::BTreeMap;

use super::{Cocycle, CocycleError, Domain, FiniteGroupL, GroupAction};
use crate::group::FiniteGroup;
use crate::groupoid::{uniform_weights, FiniteGroupoid};

/// Largest index for which `Sym(I)` is tabulated.
pub const MAX_INDEX: usize = 6;

fn normalize(labels: &[usize]) -> Vec<usize> {
    let mut first = BTreeMap::new();
    labels
        .iter()
        .enumerate()
        .map(|(x, l)| *first.entry(*l).or_insert(x))
        .collect()
}

/// Choice functions `(φ_i)_{i∈I}` for `S ⊆ R` on `0..n`, with `R` and `S`
/// given by a class label per point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoiceSystem {
    r: Vec<usize>,
    s: Vec<usize>,
    phi: Vec<Vec<usize>>,
}

impl ChoiceSystem {
    /// Checks that `phi[i][x]` lies in `[x]_R` and that for each `x` the
    /// points `phi[·][x]` meet each S-class inside `[x]_R` exactly once.
    pub fn new(r_classes: &[usize], s_classes: &[usize], phi: Vec<Vec<usize>>) -> Result<Self, CocycleError> {
        let n = r_classes.len();
        let bad = |m: String| Err(CocycleError::Invalid(m));
        if s_classes.len() != n {
            return bad("R and S need a label per point".into());
        }
        let (r, s) = (normalize(r_classes), normalize(s_classes));
        for x in 0..n {
            if r[s[x]] != r[x] {
                return bad(format!("S is not contained in R at point {x}"));
            }
        }
        let counts = class_counts(&r, &s);
        for (i, row) in phi.iter().enumerate() {
            if row.len() != n || row.iter().any(|&p| p >= n) {
                return bad(format!("φ_{i} must map every point into 0..{n}"));
            }
        }
        for x in 0..n {
            let mut hit: Vec<usize> = phi.iter().map(|row| row[x]).collect();
            if hit.iter().any(|&p| r[p] != r[x]) {
                return bad(format!("some φ_i({x}) leaves the R-class of {x}"));
            }
            hit.iter_mut().for_each(|p| *p = s[*p]);
            hit.sort_unstable();
            hit.dedup();
            if hit.len() != phi.len() || hit.len() != counts[r[x]] {
                return bad(format!("the φ_i({x}) do not meet each S-class in [{x}]_R once"));
            }
        }
        Ok(ChoiceSystem { r, s, phi })
    }

    pub fn index(&self) -> usize {
        self.phi.len()
    }

    pub fn num_points(&self) -> usize {
        self.r.len()
    }

    /// Class labels, normalized to the least member of each class.
    pub fn r_classes(&self) -> &[usize] {
        &self.r
    }

    pub fn s_classes(&self) -> &[usize] {
        &self.s
    }

    pub fn phi(&self, i: usize, x: usize) -> usize {
        self.phi[i][x]
    }

    /// `σ(y, x)` as a permutation of `I`, or `None` unless `x R y`.
    pub fn sigma(&self, y: usize, x: usize) -> Option<Vec<usize>> {
        if self.r[x] != self.r[y] {
            return None;
        }
        let at_y: BTreeMap<usize, usize> =
            (0..self.index()).map(|j| (self.s[self.phi[j][y]], j)).collect();
        Some((0..self.index()).map(|i| at_y[&self.s[self.phi[i][x]]]).collect())
    }
}

fn class_counts(r: &[usize], s: &[usize]) -> Vec<usize> {
    let mut counts = vec![0; r.len()];
    for x in 0..r.len() {
        if s[x] == x {
            counts[r[x]] += 1;
        }
    }
    counts
}

/// Lexicographic choice: `φ_0(x)` is the least point of `[x]_S`, and
/// `φ_1(x), φ_2(x), …` are the least points of the other S-classes in
/// `[x]_R`, in increasing order.
pub fn choice_functions(r_classes: &[usize], s_classes: &[usize]) -> Result<ChoiceSystem, CocycleError> {
    let n = r_classes.len();
    if s_classes.len() != n {
        return Err(CocycleError::Invalid("R and S need a label per point".into()));
    }
    let (r, s) = (normalize(r_classes), normalize(s_classes));
    if let Some(x) = (0..n).find(|&x| r[s[x]] != r[x]) {
        return Err(CocycleError::Invalid(format!("S is not contained in R at point {x}")));
    }
    let counts = class_counts(&r, &s);
    let index = if n == 0 { 0 } else { counts[r[0]] };
    if let Some(x) = (0..n).find(|&x| counts[r[x]] != index) {
        return Err(CocycleError::IndexMismatch {
            point: x,
            found: counts[r[x]],
            expected: index,
        });
    }
    let mut phi = vec![vec![0; n]; index];
    for x in 0..n {
        let mut reps: Vec<usize> = (0..n).filter(|&p| s[p] == p && r[p] == r[x] && p != s[x]).collect();
        reps.insert(0, s[x]);
        for (i, p) in reps.into_iter().enumerate() {
            phi[i][x] = p;
        }
    }
    ChoiceSystem::new(&r, &s, phi)
}

fn symmetric_group(index: usize) -> Result<(FiniteGroupL, BTreeMap<Vec<usize>, usize>), CocycleError> {
    if index > MAX_INDEX {
        return Err(CocycleError::Invalid(format!("index {index} exceeds {MAX_INDEX}")));
    }
    let (sym, perms) = FiniteGroup::symmetric(index);
    let lookup = perms.into_iter().enumerate().map(|(k, p)| (p, k)).collect();
    Ok((FiniteGroupL::discrete(sym), lookup))
}

/// `σ` on the groupoid of `R`, valued in `Sym(I)` as tabulated by
/// [`FiniteGroup::symmetric`]; the arrow with range `y` and source `x`
/// carries `σ(y, x)`.
pub fn index_cocycle(cs: &ChoiceSystem) -> Result<Cocycle, CocycleError> {
    let (l, lookup) = symmetric_group(cs.index())?;
    let g = FiniteGroupoid::equivalence_relation(&cs.r, uniform_weights(cs.num_points()))?;
    let values = (0..g.num_morphisms())
        .map(|a| lookup[&cs.sigma(g.range(a), g.source(a)).expect("arrows lie in R")])
        .collect();
    Cocycle::new(Domain::Groupoid(g), l, values)
}

/// `σ(γ.x, x)` over an action whose orbit relation is `R`.
pub fn index_cocycle_over_action(cs: &ChoiceSystem, action: &GroupAction) -> Result<Cocycle, CocycleError> {
    if action.num_points() != cs.num_points() {
        return Err(CocycleError::Invalid("action and choice system differ in size".into()));
    }
    let (l, lookup) = symmetric_group(cs.index())?;
    let mut values = Vec::new();
    for g in action.group().elements() {
        for x in 0..cs.num_points() {
            let sigma = cs
                .sigma(action.act(g, x), x)
                .ok_or_else(|| CocycleError::Invalid("the action leaves an R-class".into()))?;
            values.push(lookup[&sigma]);
        }
    }
    Cocycle::new(Domain::Action(action.clone()), l, values)
}

/// The choice system of a normal subgroup `M` of `Γ`, with `Γ` acting on
/// itself by left multiplication, `S` the `M`-orbits, index set `Γ/M`
/// ordered by least element, section `s(δM) = min δM`, and
/// `φ_{δM}(x) = s(δM)x`.
#[derive(Debug, Clone)]
pub struct CosetChoice {
    pub action: GroupAction,
    pub system: ChoiceSystem,
    pub cosets: Vec<Vec<usize>>,
    coset_of: Vec<usize>,
}

impl CosetChoice {
    /// `ρ(γM)(δM) = δγ⁻¹M` as a permutation of coset indices.
    pub fn right_regular(&self, gamma: usize) -> Vec<usize> {
        let g = self.action.group();
        self.cosets
            .iter()
            .map(|c| self.coset_of[g.mul(c[0], g.inv(gamma))])
            .collect()
    }
}

pub fn coset_choice_system(group: FiniteGroup, normal: &[usize]) -> Result<CosetChoice, CocycleError> {
    let n = group.order();
    let mut in_m = vec![false; n];
    for &m in normal {
        if m >= n {
            return Err(CocycleError::Invalid(format!("{m} is not an element")));
        }
        in_m[m] = true;
    }
    let closed = in_m[group.identity()]
        && (0..n).all(|a| !in_m[a] || (0..n).all(|b| !in_m[b] || in_m[group.mul(a, b)]));
    let conj = (0..n).all(|g| (0..n).all(|m| !in_m[m] || in_m[group.mul(group.mul(g, m), group.inv(g))]));
    if !closed || !conj {
        return Err(CocycleError::Invalid("not a normal subgroup".into()));
    }
    let mut coset_of = vec![usize::MAX; n];
    let mut cosets: Vec<Vec<usize>> = Vec::new();
    for d in 0..n {
        if coset_of[d] == usize::MAX {
            let c: Vec<usize> = {
                let mut c: Vec<usize> = (0..n).filter(|&m| in_m[m]).map(|m| group.mul(d, m)).collect();
                c.sort_unstable();
                c
            };
            for &e in &c {
                coset_of[e] = cosets.len();
            }
            cosets.push(c);
        }
    }
    let r = vec![0; n];
    let s: Vec<usize> = (0..n).map(|x| cosets[coset_of[x]][0]).collect();
    let phi = cosets
        .iter()
        .map(|c| (0..n).map(|x| group.mul(c[0], x)).collect())
        .collect();
    let system = ChoiceSystem::new(&r, &s, phi)?;
    Ok(CosetChoice {
        action: GroupAction::regular(group),
        system,
        cosets,
        coset_of,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{cohomologous_search, verify_cocycle};

    #[test]
    fn full_subrelation_has_trivial_index_cocycle() {
        let cs = choice_functions(&[0, 0, 0], &[0, 0, 0]).unwrap();
        assert_eq!(cs.index(), 1);
        let c = index_cocycle(&cs).unwrap();
        assert!(c.values().iter().all(|&v| v == 0));
        assert!(verify_cocycle(&c).holds());
    }

    #[test]
    fn four_points_two_classes() {
        // points 1..4 of the worked example are 0..3 here
        let cs = choice_functions(&[0, 0, 0, 0], &[0, 0, 1, 1]).unwrap();
        assert_eq!((cs.phi(0, 0), cs.phi(1, 0)), (0, 2));
        assert_eq!((cs.phi(0, 2), cs.phi(1, 2)), (2, 0));
        assert_eq!(cs.sigma(2, 0).unwrap(), vec![1, 0]);
        assert_eq!(cs.sigma(1, 0).unwrap(), vec![0, 1]);
        let c = index_cocycle(&cs).unwrap();
        let r = verify_cocycle(&c);
        assert!(r.holds());
        assert_eq!(r.checked, 64);
    }

    #[test]
    fn mismatched_index_is_rejected() {
        let err = choice_functions(&[0, 0, 1, 1], &[0, 1, 2, 2]).unwrap_err();
        assert_eq!(
            err,
            CocycleError::IndexMismatch {
                point: 2,
                found: 1,
                expected: 2
            }
        );
        assert!(choice_functions(&[0, 0, 1], &[0, 1, 1]).is_err());
    }

    #[test]
    fn cyclic_quotient_gives_right_regular_representation() {
        let cc = coset_choice_system(FiniteGroup::cyclic(4), &[0, 2]).unwrap();
        assert_eq!(cc.cosets, vec![vec![0, 2], vec![1, 3]]);
        let c = index_cocycle_over_action(&cc.system, &cc.action).unwrap();
        assert!(verify_cocycle(&c).holds());
        let g = cc.action.group();
        for gamma in g.elements() {
            for x in g.elements() {
                assert_eq!(
                    cc.system.sigma(cc.action.act(gamma, x), x).unwrap(),
                    cc.right_regular(gamma)
                );
            }
        }
        assert_eq!(cc.right_regular(1), vec![1, 0]);
        assert!(coset_choice_system(FiniteGroup::symmetric(3).0, &[0, 1]).is_err());
    }

    #[test]
    fn permuted_choices_give_cohomologous_cocycles() {
        let r = [0, 0, 0, 0, 0, 0];
        let s = [0, 1, 2, 0, 1, 2];
        let cs = choice_functions(&r, &s).unwrap();
        // relabel I at each point by a point-dependent rotation and move
        // each choice within its S-class
        let phi = (0..3)
            .map(|i| (0..6).map(|x| (cs.phi((i + x) % 3, x) + 3) % 6).collect())
            .collect();
        let moved = ChoiceSystem::new(&r, &s, phi).unwrap();
        let (c0, c1) = (index_cocycle(&cs).unwrap(), index_cocycle(&moved).unwrap());
        assert!(verify_cocycle(&c1).holds());
        assert_ne!(c0, c1);
        let f = cohomologous_search(&c0, &c1).unwrap().unwrap();
        assert_eq!(crate::cocycle::coboundary(&f, &c0).unwrap(), c1);
    }
}
