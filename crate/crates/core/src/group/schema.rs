//! Left coset representatives for a subgroup `Λ ≤ Γ`.
//!
//! A schema fixes a representative set `S` (containing `e`), the map
//! `σ: Γ → S` with `σ(γ) ∈ γΛ`, and the cocycle
//! `ρ(γ, αΛ) = σ(γα)⁻¹ γ σ(α) ∈ Λ`.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::{Element, Group, GroupError};

pub trait CosetSchema: Send + Sync + fmt::Debug {
    /// The ambient group `Γ`.
    fn ambient(&self) -> &Group;

    /// The subgroup `Λ`, as a group in its own right.
    fn subgroup(&self) -> &Group;

    /// `σ(γ)`.
    fn rep(&self, gamma: &Element) -> Element;

    /// The inclusion `Λ → Γ`.
    fn embed(&self, lambda: &Element) -> Element;

    /// The preimage of `γ` under [`CosetSchema::embed`], if `γ ∈ Λ`.
    fn restrict(&self, gamma: &Element) -> Option<Element>;

    /// `S ∖ δS`, when the schema can list it.
    fn outside_translate(&self, _delta: &Element) -> Option<Vec<Element>> {
        None
    }

    fn is_rep(&self, gamma: &Element) -> bool {
        self.rep(gamma) == *gamma
    }

    /// `ρ(γ, αΛ)` as an element of `Λ`.
    fn cocycle(&self, gamma: &Element, alpha: &Element) -> Result<Element, GroupError> {
        let g = self.ambient();
        let value = g.mul(
            &g.mul(&g.inv(&self.rep(&g.mul(gamma, alpha))), gamma),
            &self.rep(alpha),
        );
        self.restrict(&value)
            .ok_or_else(|| GroupError::SubgroupViolation(g.format(&value)))
    }
}

/// Checked `σ(γ)`.
pub fn coset_rep(schema: &dyn CosetSchema, gamma: &Element) -> Result<Element, GroupError> {
    if !schema.ambient().contains(gamma) {
        return Err(GroupError::MixedGroups);
    }
    Ok(schema.rep(gamma))
}

/// Checked `ρ(γ, αΛ)`.
pub fn coset_cocycle(
    schema: &dyn CosetSchema,
    gamma: &Element,
    alpha: &Element,
) -> Result<Element, GroupError> {
    let g = schema.ambient();
    if !g.contains(gamma) || !g.contains(alpha) {
        return Err(GroupError::MixedGroups);
    }
    schema.cocycle(gamma, alpha)
}

/// `(γS △ S) ∩ Ball(radius)`.
pub fn coset_defect(
    schema: &dyn CosetSchema,
    gamma: &Element,
    radius: usize,
) -> Result<BTreeSet<Element>, GroupError> {
    let g = schema.ambient();
    if !g.contains(gamma) {
        return Err(GroupError::MixedGroups);
    }
    let ginv = g.inv(gamma);
    Ok(g.ball(radius)?
        .into_iter()
        .filter(|x| schema.is_rep(&g.mul(&ginv, x)) != schema.is_rep(x))
        .collect())
}

/// Counters from [`check_schema`]; a valid schema has every failure count at zero.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SchemaCheck {
    pub pairs_checked: usize,
    pub rep_failures: usize,
    pub membership_failures: usize,
    pub cocycle_failures: usize,
}

impl SchemaCheck {
    pub fn ok(&self) -> bool {
        self.rep_failures == 0 && self.membership_failures == 0 && self.cocycle_failures == 0
    }
}

/// Exhaustively checks the schema invariants on `Ball(radius)`: `σ(γ) ∈ γΛ`,
/// idempotence, `ρ ∈ Λ` and the cocycle identity for all triples.
pub fn check_schema(schema: &dyn CosetSchema, radius: usize) -> Result<SchemaCheck, GroupError> {
    let g = schema.ambient();
    let ball = g.ball(radius)?;
    let mut out = SchemaCheck::default();
    for x in &ball {
        let s = schema.rep(x);
        if schema.rep(&s) != s || schema.restrict(&g.mul(&g.inv(&s), x)).is_none() {
            out.rep_failures += 1;
        }
    }
    let lam = schema.subgroup();
    for g1 in &ball {
        for a in &ball {
            out.pairs_checked += 1;
            if schema.cocycle(g1, a).is_err() {
                out.membership_failures += 1;
                continue;
            }
            for g2 in &ball {
                let (Ok(r12), Ok(r2), Ok(r1b)) = (
                    schema.cocycle(&g.mul(g1, g2), a),
                    schema.cocycle(g2, a),
                    schema.cocycle(g1, &g.mul(g2, a)),
                ) else {
                    out.membership_failures += 1;
                    continue;
                };
                if r12 != lam.mul(&r1b, &r2) {
                    out.cocycle_failures += 1;
                }
            }
        }
    }
    Ok(out)
}

/// `Γ = Λ ∗ H` with `Λ` one free factor; `S` is `e` together with every
/// word whose last syllable lies outside `Λ`.
#[derive(Debug, Clone)]
pub struct FreeFactorSchema {
    ambient: Group,
    factor: u32,
    subgroup: Group,
}

impl FreeFactorSchema {
    pub fn new(ambient: &Group, factor: usize) -> Result<Self, GroupError> {
        let factors = ambient.factors().ok_or_else(|| {
            GroupError::InvalidSpec("free-factor schema needs a free product".into())
        })?;
        let subgroup = factors
            .get(factor)
            .ok_or_else(|| GroupError::InvalidSpec(format!("no factor {factor}")))?
            .clone();
        Ok(FreeFactorSchema {
            ambient: ambient.clone(),
            factor: factor as u32,
            subgroup,
        })
    }

    pub fn factor(&self) -> usize {
        self.factor as usize
    }
}

impl CosetSchema for FreeFactorSchema {
    fn ambient(&self) -> &Group {
        &self.ambient
    }

    fn subgroup(&self) -> &Group {
        &self.subgroup
    }

    fn rep(&self, gamma: &Element) -> Element {
        let syl = gamma.syllables();
        match syl.last() {
            Some((f, _)) if *f == self.factor => Element::Product(syl[..syl.len() - 1].to_vec()),
            _ => gamma.clone(),
        }
    }

    fn embed(&self, lambda: &Element) -> Element {
        if self.subgroup.is_identity(lambda) {
            Element::Product(vec![])
        } else {
            Element::Product(vec![(self.factor, lambda.clone())])
        }
    }

    fn restrict(&self, gamma: &Element) -> Option<Element> {
        match gamma.syllables() {
            [] => Some(self.subgroup.identity()),
            [(f, x)] if *f == self.factor => Some(x.clone()),
            _ => None,
        }
    }

    fn is_rep(&self, gamma: &Element) -> bool {
        gamma.syllables().last().is_none_or(|(f, _)| *f != self.factor)
    }

    /// For `δ = d₁⋯d_k` in normal form, `S ∖ δS` consists of the prefixes
    /// `d₁⋯d_j` (`j < k`) followed in `δ` by a `Λ`-syllable.
    fn outside_translate(&self, delta: &Element) -> Option<Vec<Element>> {
        let syl = delta.syllables();
        Some(
            (0..syl.len())
                .filter(|&j| syl[j].0 == self.factor)
                .map(|j| Element::Product(syl[..j].to_vec()))
                .collect(),
        )
    }
}

/// A finite-index subgroup described by an explicit coset table.
///
/// Cosets are numbered `0..m` with `S[0] = e`. For every generator `g` of
/// `Γ` the table gives the permutation `i ↦ g·i` of cosets and the values
/// `ρ(g, S[i]Λ) ∈ Λ`. The subgroup is a group in its own right together
/// with the images of its generators in `Γ`.
#[derive(Debug, Clone)]
pub struct FiniteIndexSchema {
    ambient: Group,
    subgroup: Group,
    images: Vec<Element>,
    reps: Vec<Element>,
    perms: Vec<Vec<usize>>,
    inverse_perms: Vec<Vec<usize>>,
    values: Vec<Vec<Element>>,
}

impl FiniteIndexSchema {
    pub fn new(
        ambient: &Group,
        subgroup: &Group,
        images: Vec<Element>,
        reps: Vec<Element>,
        perms: Vec<Vec<usize>>,
        values: Vec<Vec<Element>>,
    ) -> Result<Self, GroupError> {
        let bad = |m: &str| Err(GroupError::InvalidSpec(format!("coset table: {m}")));
        let m = reps.len();
        let ngen = ambient.generators().len();
        if m == 0 || !ambient.is_identity(&reps[0]) {
            return bad("the first representative must be the identity");
        }
        if images.len() != subgroup.generators().len()
            || images.iter().any(|x| !ambient.contains(x))
        {
            return bad("one ambient image per subgroup generator required");
        }
        if perms.len() != ngen || values.len() != ngen {
            return bad("one permutation and one value row per ambient generator required");
        }
        let mut inverse_perms = Vec::with_capacity(ngen);
        for p in &perms {
            if p.len() != m {
                return bad("permutation has wrong length");
            }
            let mut inv = vec![usize::MAX; m];
            for (i, &j) in p.iter().enumerate() {
                if j >= m || inv[j] != usize::MAX {
                    return bad("not a permutation");
                }
                inv[j] = i;
            }
            inverse_perms.push(inv);
        }
        let schema = FiniteIndexSchema {
            ambient: ambient.clone(),
            subgroup: subgroup.clone(),
            images,
            reps,
            perms,
            inverse_perms,
            values,
        };
        for (gi, row) in schema.values.iter().enumerate() {
            if row.len() != m || row.iter().any(|v| !subgroup.contains(v)) {
                return bad("value row has wrong length or leaves the subgroup");
            }
            let gen = &ambient.generators()[gi].element;
            for (i, v) in row.iter().enumerate() {
                let j = schema.perms[gi][i];
                let expected = ambient.mul(&ambient.mul(&ambient.inv(&schema.reps[j]), gen), &schema.reps[i]);
                if schema.embed(v) != expected {
                    return Err(GroupError::SubgroupMismatch(format!(
                        "generator {} on coset {i}: table value {} but S[{j}]⁻¹gS[{i}] = {}",
                        ambient.generators()[gi].label,
                        ambient.format(&schema.embed(v)),
                        ambient.format(&expected)
                    )));
                }
            }
        }
        for (i, s) in schema.reps.iter().enumerate() {
            if schema.coset_index(s) != i {
                return bad("representative lies in the wrong coset");
            }
        }
        Ok(schema)
    }

    pub fn index(&self) -> usize {
        self.reps.len()
    }

    pub fn representatives(&self) -> &[Element] {
        &self.reps
    }

    fn step(&self, gi: usize, power: i64, mut i: usize) -> usize {
        let table = if power > 0 {
            &self.perms[gi]
        } else {
            &self.inverse_perms[gi]
        };
        for _ in 0..power.unsigned_abs() {
            i = table[i];
        }
        i
    }

    /// The `i` with `γΛ = S[i]Λ`.
    pub fn coset_index(&self, gamma: &Element) -> usize {
        self.ambient
            .word_of(gamma)
            .iter()
            .rev()
            .fold(0, |i, (gi, p)| self.step(*gi, *p, i))
    }

    /// `ρ(γ, S[i]Λ)` read off the table along a word for `γ`.
    pub fn cocycle_at(&self, gamma: &Element, coset: usize) -> Element {
        let lam = &self.subgroup;
        let mut i = coset;
        let mut acc = lam.identity();
        for (gi, p) in self.ambient.word_of(gamma).iter().rev() {
            for _ in 0..p.unsigned_abs() {
                let v = if *p > 0 {
                    let v = self.values[*gi][i].clone();
                    i = self.perms[*gi][i];
                    v
                } else {
                    let j = self.inverse_perms[*gi][i];
                    let v = lam.inv(&self.values[*gi][j]);
                    i = j;
                    v
                };
                acc = lam.mul(&v, &acc);
            }
        }
        acc
    }
}

impl CosetSchema for FiniteIndexSchema {
    fn ambient(&self) -> &Group {
        &self.ambient
    }

    fn subgroup(&self) -> &Group {
        &self.subgroup
    }

    fn rep(&self, gamma: &Element) -> Element {
        self.reps[self.coset_index(gamma)].clone()
    }

    fn embed(&self, lambda: &Element) -> Element {
        let g = &self.ambient;
        self.subgroup
            .word_of(lambda)
            .iter()
            .fold(g.identity(), |acc, (gi, p)| g.mul(&acc, &g.pow(&self.images[*gi], *p)))
    }

    fn restrict(&self, gamma: &Element) -> Option<Element> {
        (self.coset_index(gamma) == 0).then(|| self.cocycle_at(gamma, 0))
    }

    fn outside_translate(&self, delta: &Element) -> Option<Vec<Element>> {
        let g = &self.ambient;
        let dinv = g.inv(delta);
        Some(
            self.reps
                .iter()
                .filter(|s| !self.is_rep(&g.mul(&dinv, s)))
                .cloned()
                .collect(),
        )
    }

    fn cocycle(&self, gamma: &Element, alpha: &Element) -> Result<Element, GroupError> {
        Ok(self.cocycle_at(gamma, self.coset_index(alpha)))
    }
}

/// Composite schema for a tower `Λ ≤ Γ₁ ≤ Γ₂`, built from a schema for
/// `Γ₁ ≤ Γ₂` (outer) and one for `Λ ≤ Γ₁` (inner).
#[derive(Debug, Clone)]
pub struct CompositeSchema {
    outer: Arc<dyn CosetSchema>,
    inner: Arc<dyn CosetSchema>,
}

impl CompositeSchema {
    pub fn new(outer: Arc<dyn CosetSchema>, inner: Arc<dyn CosetSchema>) -> Result<Self, GroupError> {
        if outer.subgroup() != inner.ambient() {
            return Err(GroupError::SubgroupMismatch(
                "outer subgroup differs from inner ambient group".into(),
            ));
        }
        Ok(CompositeSchema { outer, inner })
    }

    /// Nests a sequence of schemas listed from the outermost inwards.
    pub fn tower(schemas: &[Arc<dyn CosetSchema>]) -> Result<Arc<dyn CosetSchema>, GroupError> {
        let (last, rest) = schemas
            .split_last()
            .ok_or_else(|| GroupError::InvalidSpec("empty tower".into()))?;
        rest.iter().rev().try_fold(last.clone(), |inner, outer| {
            Ok(Arc::new(CompositeSchema::new(outer.clone(), inner)?) as Arc<dyn CosetSchema>)
        })
    }
}

impl CosetSchema for CompositeSchema {
    fn ambient(&self) -> &Group {
        self.outer.ambient()
    }

    fn subgroup(&self) -> &Group {
        self.inner.subgroup()
    }

    fn rep(&self, gamma: &Element) -> Element {
        let g = self.ambient();
        let s2 = self.outer.rep(gamma);
        let mid = self
            .outer
            .restrict(&g.mul(&g.inv(&s2), gamma))
            .expect("outer schema representative out of coset");
        g.mul(&s2, &self.outer.embed(&self.inner.rep(&mid)))
    }

    fn embed(&self, lambda: &Element) -> Element {
        self.outer.embed(&self.inner.embed(lambda))
    }

    fn restrict(&self, gamma: &Element) -> Option<Element> {
        self.inner.restrict(&self.outer.restrict(gamma)?)
    }

    fn is_rep(&self, gamma: &Element) -> bool {
        let g = self.ambient();
        let s2 = self.outer.rep(gamma);
        match self.outer.restrict(&g.mul(&g.inv(&s2), gamma)) {
            Some(mid) => self.inner.is_rep(&mid),
            None => false,
        }
    }

    fn outside_translate(&self, delta: &Element) -> Option<Vec<Element>> {
        let g = self.ambient();
        let mid_group = self.outer.subgroup();
        let dinv = g.inv(delta);
        let mut out = Vec::new();
        for s2 in self.outer.outside_translate(delta)? {
            let mu = self.outer.cocycle(&dinv, &s2).ok()?;
            for s1 in self.inner.outside_translate(&mid_group.inv(&mu))? {
                out.push(g.mul(&s2, &self.outer.embed(&s1)));
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;

    fn f2_schema() -> FreeFactorSchema {
        let g = Group::new(GroupSpec::free_product_of_integers(&["a", "b"])).unwrap();
        FreeFactorSchema::new(&g, 0).unwrap()
    }

    fn even_schema() -> FiniteIndexSchema {
        let z = Group::new(GroupSpec::integers("t")).unwrap();
        let lam = Group::new(GroupSpec::integers("u")).unwrap();
        let t = z.parse("t").unwrap();
        let u = lam.parse("u").unwrap();
        FiniteIndexSchema::new(
            &z,
            &lam,
            vec![z.pow(&t, 2)],
            vec![z.identity(), t],
            vec![vec![1, 0]],
            vec![vec![lam.identity(), u]],
        )
        .unwrap()
    }

    #[test]
    fn free_factor_rep_examples() {
        let s = f2_schema();
        let g = s.ambient().clone();
        let x = g.parse("a^2ba^3").unwrap();
        assert_eq!(g.format(&coset_rep(&s, &x).unwrap()), "a^2b");
        assert_eq!(coset_rep(&s, &g.parse("a^5").unwrap()).unwrap(), g.identity());
    }

    #[test]
    fn free_factor_cocycle_examples() {
        let s = f2_schema();
        let g = s.ambient().clone();
        let lam = s.subgroup().clone();
        let p = |w: &str| g.parse(w).unwrap();
        assert_eq!(lam.format(&coset_cocycle(&s, &p("a"), &p("e")).unwrap()), "a");
        assert_eq!(lam.format(&coset_cocycle(&s, &p("b"), &p("e")).unwrap()), "e");
        assert_eq!(lam.format(&coset_cocycle(&s, &p("ba^2"), &p("a^3")).unwrap()), "a^2");
    }

    #[test]
    fn free_factor_defects() {
        let s = f2_schema();
        let g = s.ambient().clone();
        let a2 = g.parse("a^2").unwrap();
        let d: Vec<String> = coset_defect(&s, &a2, 4).unwrap().iter().map(|x| g.format(x)).collect();
        let mut expect = vec!["a^2".to_string(), "e".to_string()];
        expect.sort();
        let mut d_sorted = d.clone();
        d_sorted.sort();
        assert_eq!(d_sorted, expect);
        assert!(coset_defect(&s, &g.parse("b^-2").unwrap(), 5).unwrap().is_empty());
    }

    #[test]
    fn outside_translate_matches_definition() {
        let s = f2_schema();
        let g = s.ambient().clone();
        for delta in g.ball(3).unwrap() {
            let listed: BTreeSet<Element> =
                s.outside_translate(&delta).unwrap().into_iter().collect();
            let dinv = g.inv(&delta);
            // Members of S∖δS have length at most |δ|, so Ball(3) suffices.
            let brute: BTreeSet<Element> = g
                .ball(3)
                .unwrap()
                .into_iter()
                .filter(|x| s.is_rep(x) && !s.is_rep(&g.mul(&dinv, x)))
                .collect();
            assert_eq!(listed, brute, "delta = {}", g.format(&delta));
        }
    }

    #[test]
    fn schemas_pass_invariant_check() {
        assert!(check_schema(&f2_schema(), 2).unwrap().ok());
        assert!(check_schema(&even_schema(), 4).unwrap().ok());
    }

    #[test]
    fn finite_index_examples() {
        let s = even_schema();
        let z = s.ambient().clone();
        assert_eq!(z.format(&s.rep(&z.parse("t^3").unwrap())), "t");
        assert_eq!(z.format(&s.rep(&z.parse("t^-4").unwrap())), "e");
        let lam = s.subgroup().clone();
        assert_eq!(lam.format(&s.restrict(&z.parse("t^-4").unwrap()).unwrap()), "u^-2");
        assert_eq!(s.outside_translate(&z.parse("t").unwrap()).unwrap().len(), 1);
    }

    #[test]
    fn finite_index_rejects_inconsistent_table() {
        let z = Group::new(GroupSpec::integers("t")).unwrap();
        let lam = Group::new(GroupSpec::integers("u")).unwrap();
        let t = z.parse("t").unwrap();
        let res = FiniteIndexSchema::new(
            &z,
            &lam,
            vec![z.pow(&t, 2)],
            vec![z.identity(), t],
            vec![vec![1, 0]],
            vec![vec![lam.identity(), lam.identity()]],
        );
        assert!(matches!(res, Err(GroupError::SubgroupMismatch(_))));
    }

    #[test]
    fn composite_tower_schema() {
        let f3 = Group::new(GroupSpec::free_product(vec![
            GroupSpec::integers("a"),
            GroupSpec::free_product_of_integers(&["b", "c"]),
        ]))
        .unwrap();
        let outer: Arc<dyn CosetSchema> = Arc::new(FreeFactorSchema::new(&f3, 1).unwrap());
        let mid = outer.subgroup().clone();
        let inner: Arc<dyn CosetSchema> = Arc::new(FreeFactorSchema::new(&mid, 0).unwrap());
        let comp = CompositeSchema::new(outer, inner).unwrap();
        assert!(check_schema(&comp, 2).unwrap().ok());
        for delta in f3.ball(2).unwrap() {
            let listed: BTreeSet<Element> =
                comp.outside_translate(&delta).unwrap().into_iter().collect();
            let dinv = f3.inv(&delta);
            let brute: BTreeSet<Element> = f3
                .ball(4)
                .unwrap()
                .into_iter()
                .filter(|x| comp.is_rep(x) && !comp.is_rep(&f3.mul(&dinv, x)))
                .collect();
            assert_eq!(listed, brute, "delta = {}", f3.format(&delta));
        }
    }
}
