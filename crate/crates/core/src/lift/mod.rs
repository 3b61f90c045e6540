//! Finitary maps between shift spaces and their lifts along coset schemas.
//!
//! A [`FinitaryMap`] computes each output coordinate from finitely many
//! input coordinates, requested adaptively and capped at a window size.
//! Its defect under a translation `δ` is the set of `g` where
//! `φ(δ.x)_g ≠ (δ.φ(x))_g`.

mod lifted;
mod maps;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::group::{CosetSchema, Element, Group, GroupError};
use crate::shift::{shift_act, Alphabet, Configuration, ShiftError};

pub use lifted::{
    lift, predicted_defect, tower_lift, verify_cofinite_equivariance, EquivarianceReport,
    LiftedMap,
};
pub use maps::{
    block_scramble_map, coordinatewise_lift, identity_map, odometer_map, BlockScramble,
    Coordinatewise, Odometer, ScrambleSpec,
};

/// Default cap on the number of input coordinates one evaluation may request.
pub const DEFAULT_WINDOW_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LiftError {
    #[error("group mismatch: {0}")]
    GroupMismatch(String),
    #[error("map does not preserve the measure: {0}")]
    NotMeasurePreserving(String),
    #[error("exact defect prediction is not supported for {0}")]
    DefectUnsupported(String),
    #[error("maps do not chain: {0}")]
    ChainMismatch(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error(transparent)]
    Shift(#[from] ShiftError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// How a map certifies that it pushes the source measure to the target measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureCertificate {
    /// A measure-preserving bijection of symbols applied coordinatewise.
    Bijection,
    /// Permutes equal-measure patterns on finite blocks.
    BlockPermutation,
    /// Asserted by the author of the map, not checked.
    DeclaredOnly,
}

/// Structural class of a map, used to derive exact defects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    /// `φ(x)_γ = ι(x_γ)`; equivariant, so every defect is empty.
    Coordinatewise,
    /// Changes `x` only on the finite set [`FinitaryMap::modified_support`].
    FiniteModification,
    /// A coset-by-coset lift; defects come from the schema.
    Lifted,
    /// No structural information.
    Opaque,
}

pub trait FinitaryMap: Send + Sync + fmt::Debug {
    fn group(&self) -> &Group;

    fn source(&self) -> &Arc<Alphabet>;

    fn target(&self) -> &Arc<Alphabet>;

    /// `φ(x)_γ`.
    fn eval(&self, x: &Configuration, gamma: &Element) -> Result<usize, ShiftError>;

    fn inverse(&self) -> Arc<dyn FinitaryMap>;

    fn certificate(&self) -> MeasureCertificate;

    fn describe(&self) -> String;

    fn window_cap(&self) -> usize {
        DEFAULT_WINDOW_CAP
    }

    fn kind(&self) -> MapKind {
        MapKind::Opaque
    }

    /// A finite superset of the coordinates where `φ(x)` differs from `x`.
    fn modified_support(&self, _x: &Configuration) -> Result<BTreeSet<Element>, LiftError> {
        Err(LiftError::DefectUnsupported(self.describe()))
    }

    /// The schema a lifted map was built from.
    fn coset_schema(&self) -> Option<&Arc<dyn CosetSchema>> {
        None
    }

    /// The exact defect set `{g : φ(δ.x)_g ≠ φ(x)_{δ⁻¹g}}`.
    fn defect(&self, delta: &Element, x: &Configuration) -> Result<BTreeSet<Element>, LiftError> {
        match self.kind() {
            MapKind::Coordinatewise => Ok(BTreeSet::new()),
            MapKind::FiniteModification => finite_modification_defect(self, delta, x),
            _ => Err(LiftError::DefectUnsupported(self.describe())),
        }
    }
}

/// Defect of a map that only modifies finitely many coordinates: outside
/// `M(δ.x) ∪ δ.M(x)` both sides equal `x_{δ⁻¹g}`, so it suffices to compare
/// on those candidates.
pub fn finite_modification_defect<M: FinitaryMap + ?Sized>(
    map: &M,
    delta: &Element,
    x: &Configuration,
) -> Result<BTreeSet<Element>, LiftError> {
    let g = map.group();
    let dx = shift_act(delta, x);
    let mut candidates = map.modified_support(&dx)?;
    candidates.extend(map.modified_support(x)?.iter().map(|m| g.mul(delta, m)));
    let dinv = g.inv(delta);
    let mut out = BTreeSet::new();
    for c in candidates {
        if map.eval(&dx, &c)? != map.eval(x, &g.mul(&dinv, &c))? {
            out.insert(c);
        }
    }
    Ok(out)
}

/// Brute-force defect on `Ball(radius)`.
pub fn observed_defect(
    map: &dyn FinitaryMap,
    delta: &Element,
    x: &Configuration,
    radius: usize,
) -> Result<BTreeSet<Element>, LiftError> {
    let g = map.group();
    let dx = shift_act(delta, x);
    let dinv = g.inv(delta);
    let mut out = BTreeSet::new();
    for c in g.ball(radius)? {
        if map.eval(&dx, &c)? != map.eval(x, &g.mul(&dinv, &c))? {
            out.insert(c);
        }
    }
    Ok(out)
}

/// `φ₁ ∘ φ₂`, evaluated right to left.
#[derive(Debug, Clone)]
pub struct Composite {
    outer: Arc<dyn FinitaryMap>,
    inner: Arc<dyn FinitaryMap>,
}

/// `φ₁ ∘ φ₂`.
pub fn compose(
    outer: Arc<dyn FinitaryMap>,
    inner: Arc<dyn FinitaryMap>,
) -> Result<Arc<dyn FinitaryMap>, LiftError> {
    if outer.group() != inner.group() {
        return Err(LiftError::ChainMismatch("maps act over different groups".into()));
    }
    if outer.source() != inner.target() {
        return Err(LiftError::ChainMismatch(
            "inner target alphabet differs from outer source alphabet".into(),
        ));
    }
    Ok(Arc::new(Composite { outer, inner }))
}

impl FinitaryMap for Composite {
    fn group(&self) -> &Group {
        self.inner.group()
    }

    fn source(&self) -> &Arc<Alphabet> {
        self.inner.source()
    }

    fn target(&self) -> &Arc<Alphabet> {
        self.outer.target()
    }

    fn eval(&self, x: &Configuration, gamma: &Element) -> Result<usize, ShiftError> {
        let mid = Configuration::mapped(self.inner.clone(), x)?;
        self.outer.eval(&mid, gamma)
    }

    fn inverse(&self) -> Arc<dyn FinitaryMap> {
        Arc::new(Composite {
            outer: self.inner.inverse(),
            inner: self.outer.inverse(),
        })
    }

    fn certificate(&self) -> MeasureCertificate {
        self.outer.certificate().max(self.inner.certificate())
    }

    fn describe(&self) -> String {
        format!("{} ∘ {}", self.outer.describe(), self.inner.describe())
    }

    fn window_cap(&self) -> usize {
        self.outer.window_cap().saturating_mul(self.inner.window_cap())
    }

    fn kind(&self) -> MapKind {
        use MapKind::*;
        match (self.outer.kind(), self.inner.kind()) {
            (Coordinatewise, Coordinatewise) => Coordinatewise,
            (FiniteModification, FiniteModification) => FiniteModification,
            _ => Opaque,
        }
    }

    fn modified_support(&self, x: &Configuration) -> Result<BTreeSet<Element>, LiftError> {
        let mut m = self.inner.modified_support(x)?;
        let mid = Configuration::mapped(self.inner.clone(), x)?;
        m.extend(self.outer.modified_support(&mid)?);
        Ok(m)
    }

    fn defect(&self, delta: &Element, x: &Configuration) -> Result<BTreeSet<Element>, LiftError> {
        if self.outer.kind() == MapKind::Coordinatewise {
            return self.inner.defect(delta, x);
        }
        if self.inner.kind() == MapKind::Coordinatewise {
            let mid = Configuration::mapped(self.inner.clone(), x)?;
            return self.outer.defect(delta, &mid);
        }
        if self.kind() == MapKind::FiniteModification {
            return finite_modification_defect(self, delta, x);
        }
        Err(LiftError::DefectUnsupported(self.describe()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;

    #[test]
    fn compose_with_inverse_is_identity() {
        let z = Group::new(GroupSpec::integers("a")).unwrap();
        let alpha = Arc::new(Alphabet::uniform(2));
        let odo = odometer_map(&z, &alpha, "a", DEFAULT_WINDOW_CAP).unwrap();
        let round = compose(odo.inverse(), odo.clone()).unwrap();
        for seed in 0..20 {
            let x = Configuration::seeded(&z, &alpha, seed);
            for c in z.ball(8).unwrap() {
                assert_eq!(round.eval(&x, &c).unwrap(), x.eval(&c).unwrap());
            }
        }
        assert_eq!(round.kind(), MapKind::FiniteModification);
    }

    #[test]
    fn compose_rejects_mismatched_alphabets() {
        let z = Group::new(GroupSpec::integers("a")).unwrap();
        let two = Arc::new(Alphabet::uniform(2));
        let three = Arc::new(Alphabet::uniform(3));
        let f = identity_map(&z, &two);
        let g = identity_map(&z, &three);
        assert!(matches!(compose(f, g), Err(LiftError::ChainMismatch(_))));
    }
}
