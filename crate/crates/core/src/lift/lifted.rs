use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::Arc;

use rayon::prelude::*;

use super::{FinitaryMap, LiftError, MapKind, MeasureCertificate};
use crate::group::{CosetSchema, Element, Group};
use crate::shift::{shift_act, Alphabet, Configuration, ShiftError};

/// The coset-by-coset lift of a map over `Λ` to a map over `Γ`:
/// `φ(y)_γ = φ_Λ((σ(γ)⁻¹.y)|_Λ)_{σ(γ)⁻¹γ}`.
#[derive(Debug, Clone)]
pub struct LiftedMap {
    schema: Arc<dyn CosetSchema>,
    inner: Arc<dyn FinitaryMap>,
}

pub fn lift(
    schema: Arc<dyn CosetSchema>,
    inner: Arc<dyn FinitaryMap>,
) -> Result<Arc<LiftedMap>, LiftError> {
    if inner.group() != schema.subgroup() {
        return Err(LiftError::GroupMismatch(
            "the inner map must act over the schema's subgroup".into(),
        ));
    }
    Ok(Arc::new(LiftedMap { schema, inner }))
}

/// Lifts `inner` through a tower of schemas listed from the outermost
/// (`Γ₁ ≤ Γ₂`) inwards (`Λ ≤ Γ₁`).
pub fn tower_lift(
    schemas: &[Arc<dyn CosetSchema>],
    inner: Arc<dyn FinitaryMap>,
) -> Result<Arc<dyn FinitaryMap>, LiftError> {
    for pair in schemas.windows(2) {
        if pair[0].subgroup() != pair[1].ambient() {
            return Err(LiftError::ChainMismatch("tower schemas do not nest".into()));
        }
    }
    schemas.iter().rev().try_fold(inner, |m, s| {
        lift(s.clone(), m)
            .map(|l| l as Arc<dyn FinitaryMap>)
            .map_err(|e| match e {
                LiftError::GroupMismatch(msg) => LiftError::ChainMismatch(msg),
                other => other,
            })
    })
}

impl LiftedMap {
    pub fn schema(&self) -> &Arc<dyn CosetSchema> {
        &self.schema
    }

    pub fn inner(&self) -> &Arc<dyn FinitaryMap> {
        &self.inner
    }
}

impl FinitaryMap for LiftedMap {
    fn group(&self) -> &Group {
        self.schema.ambient()
    }

    fn source(&self) -> &Arc<Alphabet> {
        self.inner.source()
    }

    fn target(&self) -> &Arc<Alphabet> {
        self.inner.target()
    }

    fn eval(&self, y: &Configuration, gamma: &Element) -> Result<usize, ShiftError> {
        let g = self.group();
        let s = self.schema.rep(gamma);
        let lambda = self
            .schema
            .restrict(&g.mul(&g.inv(&s), gamma))
            .expect("σ(γ)⁻¹γ lies in the subgroup for a valid schema");
        let restricted = Configuration::pullback(y, self.schema.clone(), &s);
        self.inner.eval(&restricted, &lambda)
    }

    fn inverse(&self) -> Arc<dyn FinitaryMap> {
        Arc::new(LiftedMap {
            schema: self.schema.clone(),
            inner: self.inner.inverse(),
        })
    }

    fn certificate(&self) -> MeasureCertificate {
        self.inner.certificate()
    }

    fn describe(&self) -> String {
        format!("lift({})", self.inner.describe())
    }

    fn window_cap(&self) -> usize {
        self.inner.window_cap()
    }

    fn kind(&self) -> MapKind {
        match self.inner.kind() {
            MapKind::Coordinatewise => MapKind::Coordinatewise,
            _ => MapKind::Lifted,
        }
    }

    fn coset_schema(&self) -> Option<&Arc<dyn CosetSchema>> {
        Some(&self.schema)
    }

    fn defect(&self, delta: &Element, y: &Configuration) -> Result<BTreeSet<Element>, LiftError> {
        predicted_defect(self, delta, y)
    }
}

/// The exact set where `φ(δ.y)` and `δ.φ(y)` differ. Cosets with
/// representative in `S ∩ δS` contribute nothing; each `s ∈ S ∖ δS`
/// contributes `s·ρ⁻¹·D_Λ(ρ, (s⁻¹δ.y)|_Λ)` with `ρ = ρ(δ⁻¹, sΛ)`.
pub fn predicted_defect(
    map: &LiftedMap,
    delta: &Element,
    y: &Configuration,
) -> Result<BTreeSet<Element>, LiftError> {
    if map.inner.kind() == MapKind::Coordinatewise {
        return Ok(BTreeSet::new());
    }
    let schema = &map.schema;
    let g = schema.ambient();
    let lam = schema.subgroup();
    let outside = schema
        .outside_translate(delta)
        .ok_or_else(|| LiftError::DefectUnsupported("schema cannot list S ∖ δS".into()))?;
    let dinv = g.inv(delta);
    let mut out = BTreeSet::new();
    for s in outside {
        let rho = schema.cocycle(&dinv, &s)?;
        let restricted = Configuration::pullback(y, schema.clone(), &g.mul(&dinv, &s));
        let rho_inv = lam.inv(&rho);
        for d in map.inner.defect(&rho, &restricted)? {
            out.insert(g.mul(&s, &schema.embed(&lam.mul(&rho_inv, &d))));
        }
    }
    Ok(out)
}

/// Outcome of comparing `φ(δ.y)` with `δ.φ(y)` on a ball.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivarianceReport {
    pub delta: Element,
    pub radius: usize,
    pub checked: usize,
    /// Coordinates in the ball where the two sides differ, sorted.
    pub disagreements: Vec<Element>,
    /// Disagreements grouped by coset representative, for lifted maps.
    pub by_coset: BTreeMap<Element, Vec<Element>>,
    /// Coordinates where either side could not be evaluated.
    pub eval_failures: Vec<Element>,
    /// True when no disagreement lies on the outer sphere of the ball.
    pub stabilized: bool,
    /// Exact defect prediction, when the map supports it.
    pub predicted: Option<Vec<Element>>,
    /// Whether the prediction restricted to the ball equals the observation.
    pub matches: Option<bool>,
}

pub fn verify_cofinite_equivariance(
    map: &dyn FinitaryMap,
    delta: &Element,
    y: &Configuration,
    radius: usize,
) -> Result<EquivarianceReport, LiftError> {
    let g = map.group();
    if !g.contains(delta) {
        return Err(crate::group::GroupError::MixedGroups.into());
    }
    let ball = g.ball_with_lengths(radius, crate::group::DEFAULT_BALL_CAP)?;
    let dy = shift_act(delta, y);
    let dinv = g.inv(delta);
    let results: Vec<(Element, usize, Option<bool>)> = ball
        .par_iter()
        .map(|(c, len)| {
            let lhs = map.eval(&dy, c);
            let rhs = map.eval(y, &g.mul(&dinv, c));
            let verdict = match (lhs, rhs) {
                (Ok(a), Ok(b)) => Some(a != b),
                _ => None,
            };
            (c.clone(), *len, verdict)
        })
        .collect();
    let mut disagreements = Vec::new();
    let mut eval_failures = Vec::new();
    let mut stabilized = true;
    for (c, len, verdict) in results {
        match verdict {
            Some(true) => {
                if len == radius && radius > 0 {
                    stabilized = false;
                }
                disagreements.push(c);
            }
            Some(false) => {}
            None => eval_failures.push(c),
        }
    }
    disagreements.sort();
    let mut by_coset: BTreeMap<Element, Vec<Element>> = BTreeMap::new();
    if let Some(schema) = map.coset_schema() {
        for c in &disagreements {
            by_coset.entry(schema.rep(c)).or_default().push(c.clone());
        }
    }
    let (predicted, matches) = match map.defect(delta, y) {
        Ok(p) => {
            let in_ball: HashSet<&Element> = ball.iter().map(|(c, _)| c).collect();
            let within: Vec<Element> = p.iter().filter(|c| in_ball.contains(c)).cloned().collect();
            let ok = within == disagreements;
            (Some(p.into_iter().collect()), Some(ok))
        }
        Err(LiftError::DefectUnsupported(_)) => (None, None),
        Err(LiftError::Shift(ShiftError::NonFinitaryAtPoint { .. })) => (None, None),
        Err(e) => return Err(e),
    };
    Ok(EquivarianceReport {
        delta: delta.clone(),
        radius,
        checked: ball.len(),
        disagreements,
        by_coset,
        eval_failures,
        stabilized,
        predicted,
        matches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{coset_defect, FreeFactorSchema, GroupSpec};
    use crate::lift::{compose, coordinatewise_lift, identity_map, odometer_map};

    fn setup() -> (Group, Arc<dyn CosetSchema>, Arc<Alphabet>) {
        let g = Group::new(GroupSpec::free_product_of_integers(&["a", "b"])).unwrap();
        let schema: Arc<dyn CosetSchema> = Arc::new(FreeFactorSchema::new(&g, 0).unwrap());
        (g, schema, Arc::new(Alphabet::uniform(2)))
    }

    fn lifted_odometer() -> (Group, Arc<LiftedMap>, Arc<Alphabet>) {
        let (g, schema, alpha) = setup();
        let odo = odometer_map(schema.subgroup(), &alpha, "a", 64).unwrap();
        (g, lift(schema, odo).unwrap(), alpha)
    }

    #[test]
    fn lifted_identity_is_identity() {
        let (g, schema, alpha) = setup();
        let id = lift(schema.clone(), identity_map(schema.subgroup(), &alpha)).unwrap();
        let y = Configuration::seeded(&g, &alpha, 4);
        for c in g.ball(4).unwrap() {
            assert_eq!(id.eval(&y, &c).unwrap(), y.eval(&c).unwrap());
        }
        let r = verify_cofinite_equivariance(id.as_ref(), &g.parse("ab").unwrap(), &y, 4).unwrap();
        assert!(r.disagreements.is_empty());
        assert_eq!(r.predicted, Some(vec![]));
    }

    #[test]
    fn defect_in_complementary_factor_is_empty() {
        let (g, lifted, alpha) = lifted_odometer();
        for seed in 0..10 {
            let y = Configuration::seeded(&g, &alpha, seed);
            let r = verify_cofinite_equivariance(lifted.as_ref(), &g.parse("b").unwrap(), &y, 5).unwrap();
            assert!(r.disagreements.is_empty());
            assert_eq!(r.predicted, Some(vec![]));
        }
    }

    #[test]
    fn a_inverse_defect_lives_on_identity_coset() {
        let (g, lifted, alpha) = lifted_odometer();
        let d = g.parse("a^-1").unwrap();
        for seed in 0..20 {
            let y = Configuration::seeded(&g, &alpha, seed);
            let r = verify_cofinite_equivariance(lifted.as_ref(), &d, &y, 5).unwrap();
            assert_eq!(r.matches, Some(true));
            assert!(r.by_coset.keys().all(|k| g.is_identity(k)));
            assert!(!r.disagreements.is_empty());
        }
    }

    #[test]
    fn ab_defect_cosets_lie_outside_translate() {
        let (g, lifted, alpha) = lifted_odometer();
        let d = g.parse("ab").unwrap();
        let schema = lifted.schema().clone();
        let outside: BTreeSet<Element> = schema.outside_translate(&d).unwrap().into_iter().collect();
        let defect_reps = coset_defect(schema.as_ref(), &d, 6).unwrap();
        for seed in 0..10 {
            let y = Configuration::seeded(&g, &alpha, seed);
            let r = verify_cofinite_equivariance(lifted.as_ref(), &d, &y, 6).unwrap();
            assert_eq!(r.matches, Some(true));
            for rep in r.by_coset.keys() {
                assert!(outside.contains(rep));
                assert!(defect_reps.contains(rep) || schema.is_rep(rep));
            }
        }
    }

    #[test]
    fn lifted_bijection_composes_without_extra_defect() {
        let (g, schema, alpha) = setup();
        let lam = schema.subgroup().clone();
        let swap = lift(schema.clone(), coordinatewise_lift(&lam, &alpha, &alpha, &[1, 0]).unwrap()).unwrap();
        let odo = lift(schema.clone(), odometer_map(&lam, &alpha, "a", 64).unwrap()).unwrap();
        let both = compose(swap, odo.clone()).unwrap();
        let d = g.parse("ba^-1").unwrap();
        for seed in 0..10 {
            let y = Configuration::seeded(&g, &alpha, seed);
            assert_eq!(both.defect(&d, &y).unwrap(), odo.defect(&d, &y).unwrap());
        }
    }

    #[test]
    fn inverse_round_trip_on_ball() {
        let (g, lifted, alpha) = lifted_odometer();
        let inv = lifted.inverse();
        for seed in 0..10 {
            let y = Configuration::seeded(&g, &alpha, seed);
            let fy = Configuration::mapped(lifted.clone(), &y).unwrap();
            for c in g.ball(5).unwrap() {
                assert_eq!(inv.eval(&fy, &c).unwrap(), y.eval(&c).unwrap());
            }
        }
    }

    #[test]
    fn tower_requires_nesting() {
        let (_, schema, alpha) = setup();
        let odo = odometer_map(schema.subgroup(), &alpha, "a", 64).unwrap();
        let res = tower_lift(&[schema.clone(), schema.clone()], odo);
        assert!(matches!(res, Err(LiftError::ChainMismatch(_))));
    }
}
