//! Lazy points of `Y^Γ`, the shift action `(γ.y)_δ = y_{γ⁻¹δ}`, the lamp
//! action `(b.z)_δ = b_δ.z_δ`, cofinite differences, sampling and entropy.

mod alphabet;
pub mod hash;
mod stats;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::group::{CosetSchema, Element, FinSuppMap, Group, GroupError};
use crate::lift::FinitaryMap;

pub use alphabet::{Alphabet, AlphabetSpec, LampActionSpec};
pub use stats::{
    cylinder_frequency, empirical_entropy, shannon_entropy, CylinderCell, CylinderReport,
    DEFAULT_FAILURE_FRACTION,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ShiftError {
    #[error("no window of at most {cap} coordinates determines the output at {coordinate}")]
    NonFinitaryAtPoint { coordinate: String, cap: usize },
    #[error("the alphabet declares no lamp action")]
    NoLampAction,
    #[error("configurations are not exactly comparable")]
    IncomparableBackends,
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("symbol {0} is outside the alphabet")]
    BadSymbol(usize),
    #[error("configurations live over different groups or alphabets")]
    Mismatch,
    #[error("{failures} of {samples} samples hit non-finitary points")]
    TooManyFailures { failures: u64, samples: u64 },
    #[error(transparent)]
    Group(#[from] GroupError),
}

#[derive(Clone)]
enum Backend {
    Constant(usize),
    SeededIid(u64),
    Patched {
        background: Configuration,
        patch: BTreeMap<Element, usize>,
    },
    Translated {
        source: Configuration,
        delta: Element,
    },
    Pullback {
        source: Configuration,
        schema: Arc<dyn CosetSchema>,
        offset: Element,
    },
    Mapped {
        map: Arc<dyn FinitaryMap>,
        source: Configuration,
    },
}

struct ConfigInner {
    group: Group,
    alphabet: Arc<Alphabet>,
    backend: Backend,
}

/// A point of `Y^Γ`, evaluated lazily coordinate by coordinate.
/// Cheap to clone; immutable.
#[derive(Clone)]
pub struct Configuration(Arc<ConfigInner>);

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = &self.0.group;
        match &self.0.backend {
            Backend::Constant(c) => write!(f, "Constant({c})"),
            Backend::SeededIid(s) => write!(f, "SeededIid({s})"),
            Backend::Patched { background, patch } => {
                let entries: Vec<String> =
                    patch.iter().map(|(k, v)| format!("{}:{v}", g.format(k))).collect();
                write!(f, "Patched({background:?}, {{{}}})", entries.join(", "))
            }
            Backend::Translated { source, delta } => {
                write!(f, "Translated({}, {source:?})", g.format(delta))
            }
            Backend::Pullback { source, offset, .. } => {
                write!(f, "Pullback({}, {source:?})", source.group().format(offset))
            }
            Backend::Mapped { map, source } => write!(f, "Mapped({}, {source:?})", map.describe()),
        }
    }
}

/// Serializable description of the non-derived backends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ConfigurationSpec {
    Constant {
        symbol: usize,
    },
    SeededIid {
        seed: u64,
    },
    Patched {
        background: Box<ConfigurationSpec>,
        /// Coordinate word to symbol index.
        patch: BTreeMap<String, usize>,
    },
    Translated {
        delta: String,
        source: Box<ConfigurationSpec>,
    },
}

impl Configuration {
    fn build(group: Group, alphabet: Arc<Alphabet>, backend: Backend) -> Self {
        Configuration(Arc::new(ConfigInner {
            group,
            alphabet,
            backend,
        }))
    }

    pub fn constant(group: &Group, alphabet: &Arc<Alphabet>, symbol: usize) -> Result<Self, ShiftError> {
        if symbol >= alphabet.len() {
            return Err(ShiftError::BadSymbol(symbol));
        }
        Ok(Self::build(group.clone(), alphabet.clone(), Backend::Constant(symbol)))
    }

    /// Independent coordinates distributed according to the alphabet weights.
    pub fn seeded(group: &Group, alphabet: &Arc<Alphabet>, seed: u64) -> Self {
        Self::build(group.clone(), alphabet.clone(), Backend::SeededIid(seed))
    }

    /// `background` overwritten on finitely many coordinates. Entries equal
    /// to the background value are dropped, and patches of patches are
    /// flattened onto the innermost background.
    pub fn patched(
        background: &Configuration,
        patch: impl IntoIterator<Item = (Element, usize)>,
    ) -> Result<Self, ShiftError> {
        let (base, mut merged) = match &background.0.backend {
            Backend::Patched { background, patch } => (background.clone(), patch.clone()),
            _ => (background.clone(), BTreeMap::new()),
        };
        for (k, v) in patch {
            if !background.group().contains(&k) {
                return Err(GroupError::MixedGroups.into());
            }
            if v >= background.alphabet().len() {
                return Err(ShiftError::BadSymbol(v));
            }
            merged.insert(k, v);
        }
        let mut normalized = BTreeMap::new();
        for (k, v) in merged {
            if base.eval(&k)? != v {
                normalized.insert(k, v);
            }
        }
        if normalized.is_empty() {
            return Ok(base);
        }
        Ok(Self::build(
            base.0.group.clone(),
            base.0.alphabet.clone(),
            Backend::Patched {
                background: base,
                patch: normalized,
            },
        ))
    }

    /// `φ(source)` for a finitary map `φ`.
    pub fn mapped(map: Arc<dyn FinitaryMap>, source: &Configuration) -> Result<Self, ShiftError> {
        if map.group() != source.group() || **map.source() != **source.alphabet() {
            return Err(ShiftError::Mismatch);
        }
        Ok(Self::build(
            source.0.group.clone(),
            map.target().clone(),
            Backend::Mapped {
                map,
                source: source.clone(),
            },
        ))
    }

    /// The point `λ ↦ source_{offset·λ}` of `Y^Λ`, for `Λ` the schema's subgroup.
    pub fn pullback(
        source: &Configuration,
        schema: Arc<dyn CosetSchema>,
        offset: &Element,
    ) -> Self {
        Self::build(
            schema.subgroup().clone(),
            source.0.alphabet.clone(),
            Backend::Pullback {
                source: source.clone(),
                schema,
                offset: offset.clone(),
            },
        )
    }

    pub fn from_spec(
        group: &Group,
        alphabet: &Arc<Alphabet>,
        spec: &ConfigurationSpec,
    ) -> Result<Self, ShiftError> {
        match spec {
            ConfigurationSpec::Constant { symbol } => Self::constant(group, alphabet, *symbol),
            ConfigurationSpec::SeededIid { seed } => Ok(Self::seeded(group, alphabet, *seed)),
            ConfigurationSpec::Patched { background, patch } => {
                let bg = Self::from_spec(group, alphabet, background)?;
                let entries = patch
                    .iter()
                    .map(|(w, v)| Ok((group.parse(w)?, *v)))
                    .collect::<Result<Vec<_>, GroupError>>()?;
                Self::patched(&bg, entries)
            }
            ConfigurationSpec::Translated { delta, source } => {
                let src = Self::from_spec(group, alphabet, source)?;
                Ok(shift_act(&group.parse(delta)?, &src))
            }
        }
    }

    /// JSON-ready description, unavailable for derived (mapped, pulled back) points.
    pub fn to_spec(&self) -> Option<ConfigurationSpec> {
        let g = &self.0.group;
        Some(match &self.0.backend {
            Backend::Constant(c) => ConfigurationSpec::Constant { symbol: *c },
            Backend::SeededIid(s) => ConfigurationSpec::SeededIid { seed: *s },
            Backend::Patched { background, patch } => ConfigurationSpec::Patched {
                background: Box::new(background.to_spec()?),
                patch: patch.iter().map(|(k, v)| (g.format(k), *v)).collect(),
            },
            Backend::Translated { source, delta } => ConfigurationSpec::Translated {
                delta: g.format(delta),
                source: Box::new(source.to_spec()?),
            },
            Backend::Pullback { .. } | Backend::Mapped { .. } => return None,
        })
    }

    pub fn group(&self) -> &Group {
        &self.0.group
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.0.alphabet
    }

    /// The symbol at coordinate `γ`.
    pub fn eval(&self, gamma: &Element) -> Result<usize, ShiftError> {
        match &self.0.backend {
            Backend::Constant(c) => Ok(*c),
            Backend::SeededIid(seed) => Ok(self
                .0
                .alphabet
                .sample(hash::coordinate_hash(*seed, &gamma.canonical_bytes()))),
            Backend::Patched { background, patch } => match patch.get(gamma) {
                Some(v) => Ok(*v),
                None => background.eval(gamma),
            },
            Backend::Translated { source, delta } => {
                let g = &self.0.group;
                source.eval(&g.mul(&g.inv(delta), gamma))
            }
            Backend::Pullback {
                source,
                schema,
                offset,
            } => source.eval(&source.group().mul(offset, &schema.embed(gamma))),
            Backend::Mapped { map, source } => map.eval(source, gamma),
        }
    }

    /// Checked [`Configuration::eval`].
    pub fn eval_checked(&self, gamma: &Element) -> Result<usize, ShiftError> {
        if !self.0.group.contains(gamma) {
            return Err(GroupError::MixedGroups.into());
        }
        self.eval(gamma)
    }

    /// The patch of a patched point, empty otherwise.
    pub fn patch(&self) -> BTreeMap<Element, usize> {
        match &self.0.backend {
            Backend::Patched { patch, .. } => patch.clone(),
            _ => BTreeMap::new(),
        }
    }

    /// Innermost non-patched configuration and the overlay on top of it.
    fn decompose(&self) -> (&Configuration, Option<&BTreeMap<Element, usize>>) {
        match &self.0.backend {
            Backend::Patched { background, patch } => (background, Some(patch)),
            _ => (self, None),
        }
    }

    fn same_root(&self, other: &Configuration) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.0.group != other.0.group || self.0.alphabet != other.0.alphabet {
            return false;
        }
        match (&self.0.backend, &other.0.backend) {
            (Backend::Constant(a), Backend::Constant(b)) => a == b,
            (Backend::SeededIid(a), Backend::SeededIid(b)) => a == b,
            (
                Backend::Translated { source: s1, delta: d1 },
                Backend::Translated { source: s2, delta: d2 },
            ) => d1 == d2 && s1.same_root(s2),
            _ => false,
        }
    }
}

/// `δ.y`, with `(δ.y)_g = y_{δ⁻¹g}`.
pub fn shift_act(delta: &Element, y: &Configuration) -> Configuration {
    let g = y.group();
    if g.is_identity(delta) {
        return y.clone();
    }
    match &y.0.backend {
        Backend::Constant(_) => y.clone(),
        Backend::Patched { background, patch } => Configuration::build(
            g.clone(),
            y.0.alphabet.clone(),
            Backend::Patched {
                background: shift_act(delta, background),
                patch: patch.iter().map(|(k, v)| (g.mul(delta, k), *v)).collect(),
            },
        ),
        Backend::Translated { source, delta: inner } => {
            shift_act(&g.mul(delta, inner), source)
        }
        _ => Configuration::build(
            g.clone(),
            y.0.alphabet.clone(),
            Backend::Translated {
                source: y.clone(),
                delta: delta.clone(),
            },
        ),
    }
}

/// `b.y`, with `(b.y)_δ = b_δ.y_δ`.
pub fn lamp_act(b: &FinSuppMap, y: &Configuration) -> Result<Configuration, ShiftError> {
    let alphabet = y.alphabet();
    if alphabet.lamp_group().is_none() {
        return Err(ShiftError::NoLampAction);
    }
    let mut patch = Vec::with_capacity(b.len());
    for (k, v) in b.iter() {
        if !y.group().contains(k) {
            return Err(GroupError::MixedGroups.into());
        }
        patch.push((k.clone(), alphabet.act(v, y.eval(k)?)?));
    }
    Configuration::patched(y, patch)
}

/// Action of the wreath element `bγ` of `B ≀ Γ` on `Y^Γ`: `b.(γ.y)`.
pub fn wreath_act(wreath: &Group, w: &Element, y: &Configuration) -> Result<Configuration, ShiftError> {
    match (wreath.wreath_parts(), w) {
        (Some((_, top)), Element::Lamp(b, gamma)) if top == y.group() && wreath.contains(w) => {
            lamp_act(b, &shift_act(gamma, y))
        }
        _ => Err(GroupError::MixedGroups.into()),
    }
}

/// A finite set of coordinates where two points differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffSet {
    /// Differing coordinates, each with the lamp `λ` such that
    /// `λ.x_γ = y_γ` when the alphabet has a lamp action.
    pub coordinates: BTreeMap<Element, Option<Element>>,
    /// True when the set is provably the whole difference; false when it
    /// only covers `Ball(radius)`.
    pub exact: bool,
    pub radius: Option<usize>,
}

impl DiffSet {
    pub fn set(&self) -> BTreeSet<Element> {
        self.coordinates.keys().cloned().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.coordinates.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coordinates.len()
    }
}

fn witness_diff(
    x: &Configuration,
    y: &Configuration,
    coords: impl IntoIterator<Item = Element>,
) -> Result<BTreeMap<Element, Option<Element>>, ShiftError> {
    let mut out = BTreeMap::new();
    for g in coords {
        let (a, b) = (x.eval(&g)?, y.eval(&g)?);
        if a != b {
            out.insert(g, x.alphabet().lamp_witness(a, b));
        }
    }
    Ok(out)
}

/// The exact difference set, available when both points are patches of a
/// common background.
pub fn exact_diff(x: &Configuration, y: &Configuration) -> Result<DiffSet, ShiftError> {
    if x.group() != y.group() || x.alphabet() != y.alphabet() {
        return Err(ShiftError::Mismatch);
    }
    let (rx, px) = x.decompose();
    let (ry, py) = y.decompose();
    if !rx.same_root(ry) {
        return Err(ShiftError::IncomparableBackends);
    }
    let candidates: BTreeSet<Element> = px
        .into_iter()
        .chain(py)
        .flat_map(|p| p.keys().cloned())
        .collect();
    Ok(DiffSet {
        coordinates: witness_diff(x, y, candidates)?,
        exact: true,
        radius: None,
    })
}

/// The exact difference when available, otherwise the difference on
/// `Ball(radius)` flagged as inexact.
pub fn cofinite_diff(
    x: &Configuration,
    y: &Configuration,
    radius: usize,
) -> Result<DiffSet, ShiftError> {
    match exact_diff(x, y) {
        Err(ShiftError::IncomparableBackends) => Ok(DiffSet {
            coordinates: witness_diff(x, y, x.group().ball(radius)?)?,
            exact: false,
            radius: Some(radius),
        }),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;

    fn f2() -> Group {
        Group::new(GroupSpec::free_product_of_integers(&["a", "b"])).unwrap()
    }

    fn binary() -> Arc<Alphabet> {
        Arc::new(Alphabet::binary_swap())
    }

    #[test]
    fn patched_examples() {
        let g = f2();
        let zero = Configuration::constant(&g, &binary(), 0).unwrap();
        let a = g.parse("a").unwrap();
        let y = Configuration::patched(&zero, [(a.clone(), 1)]).unwrap();
        assert_eq!(y.eval(&a).unwrap(), 1);
        assert_eq!(y.eval(&g.parse("b").unwrap()).unwrap(), 0);
        // No-op entries are normalized away.
        let z = Configuration::patched(&zero, [(a, 0)]).unwrap();
        assert!(z.patch().is_empty());
    }

    #[test]
    fn shift_transports_patches() {
        let g = f2();
        let zero = Configuration::constant(&g, &binary(), 0).unwrap();
        let y = Configuration::patched(&zero, [(g.identity(), 1)]).unwrap();
        let a = g.parse("a").unwrap();
        let shifted = shift_act(&a, &y);
        assert_eq!(shifted.patch().into_iter().collect::<Vec<_>>(), vec![(a, 1)]);
    }

    #[test]
    fn shift_is_a_left_action() {
        let g = f2();
        let y = Configuration::seeded(&g, &binary(), 3);
        let ball = g.ball(2).unwrap();
        for d1 in &ball {
            for d2 in &ball {
                let lhs = shift_act(d1, &shift_act(d2, &y));
                let rhs = shift_act(&g.mul(d1, d2), &y);
                for x in &ball {
                    assert_eq!(lhs.eval(x).unwrap(), rhs.eval(x).unwrap());
                    assert_eq!(lhs.eval(x).unwrap(), y.eval(&g.mul(&g.inv(&g.mul(d1, d2)), x)).unwrap());
                }
            }
        }
    }

    #[test]
    fn lamp_flip_and_witness() {
        let g = f2();
        let alpha = binary();
        let y = Configuration::seeded(&g, &alpha, 11);
        let lamp_group = alpha.lamp_group().unwrap().clone();
        let s = lamp_group.parse("s").unwrap();
        let b = FinSuppMap::from_entries(&lamp_group, [(g.identity(), s.clone())]);
        let flipped = lamp_act(&b, &y).unwrap();
        for x in g.ball(3).unwrap() {
            let expect = if g.is_identity(&x) { 1 - y.eval(&x).unwrap() } else { y.eval(&x).unwrap() };
            assert_eq!(flipped.eval(&x).unwrap(), expect);
        }
        let d = cofinite_diff(&flipped, &y, 0).unwrap();
        assert!(d.exact);
        assert_eq!(d.coordinates.into_iter().collect::<Vec<_>>(), vec![(g.identity(), Some(s))]);
        assert!(lamp_act(&FinSuppMap::new(), &y).unwrap().patch().is_empty());
    }

    #[test]
    fn lamp_requires_action() {
        let g = f2();
        let plain = Arc::new(Alphabet::uniform(2));
        let y = Configuration::seeded(&g, &plain, 1);
        assert_eq!(lamp_act(&FinSuppMap::new(), &y).unwrap_err(), ShiftError::NoLampAction);
    }

    #[test]
    fn diff_of_patches() {
        let g = f2();
        let zero = Configuration::constant(&g, &binary(), 0).unwrap();
        let a = g.parse("a").unwrap();
        let b = g.parse("b").unwrap();
        let y0 = Configuration::patched(&zero, [(a.clone(), 1)]).unwrap();
        let y1 = Configuration::patched(&zero, [(a, 1), (b.clone(), 1)]).unwrap();
        assert_eq!(exact_diff(&y0, &y1).unwrap().set(), BTreeSet::from([b]));
        assert!(exact_diff(&y0, &y0).unwrap().is_empty());
        let other = Configuration::seeded(&g, &binary(), 1);
        assert_eq!(exact_diff(&y0, &other).unwrap_err(), ShiftError::IncomparableBackends);
        let approx = cofinite_diff(&y0, &other, 2).unwrap();
        assert!(!approx.exact);
    }

    #[test]
    fn wreath_action_is_an_action() {
        let top = GroupSpec::integers("t");
        let w = Group::new(GroupSpec::wreath(GroupSpec::cyclic(2, "s"), top.clone())).unwrap();
        let z = Group::new(top).unwrap();
        let y = Configuration::seeded(&z, &binary(), 5);
        let ball = w.ball(3).unwrap();
        let coords = z.ball(6).unwrap();
        for w1 in ball.iter().step_by(7) {
            for w2 in ball.iter().step_by(5) {
                let lhs = wreath_act(&w, &w.mul(w1, w2), &y).unwrap();
                let rhs = wreath_act(&w, w1, &wreath_act(&w, w2, &y).unwrap()).unwrap();
                for c in &coords {
                    assert_eq!(lhs.eval(c).unwrap(), rhs.eval(c).unwrap());
                }
            }
        }
    }

    #[test]
    fn spec_round_trip() {
        let g = f2();
        let alpha = binary();
        let spec: ConfigurationSpec = serde_json::from_str(
            r#"{"backend":"patched","background":{"backend":"seeded-iid","seed":9},"patch":{"ab":1,"e":0}}"#,
        )
        .unwrap();
        let y = Configuration::from_spec(&g, &alpha, &spec).unwrap();
        let again = Configuration::from_spec(&g, &alpha, &y.to_spec().unwrap()).unwrap();
        for x in g.ball(3).unwrap() {
            assert_eq!(y.eval(&x).unwrap(), again.eval(&x).unwrap());
        }
        assert_eq!(y.eval(&g.parse("ab").unwrap()).unwrap(), 1);
    }
}
