//! Symbolic algebra for the countable groups used throughout the toolkit:
//! finite groups given by a table, cyclic groups, free groups, free products,
//! restricted direct sums and restricted wreath products.
//!
//! Every element is stored in a canonical normal form ([`Element`]), so two
//! elements are equal exactly when their normal forms coincide. The
//! canonical byte encoding of a normal form ([`Element::canonical_bytes`])
//! is injective and is what the shift-space sampler hashes.

mod finite;
mod schema;
mod word;

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use finite::FiniteGroup;
pub use schema::{
    check_schema, coset_cocycle, coset_defect, coset_rep, CompositeSchema, CosetSchema,
    FiniteIndexSchema, FreeFactorSchema, SchemaCheck,
};

/// Default cap on the number of elements [`Group::ball`] may return.
pub const DEFAULT_BALL_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroupError {
    #[error("invalid group specification: {0}")]
    InvalidSpec(String),
    #[error("element does not belong to this group")]
    MixedGroups,
    #[error("ball exceeds the configured cap of {cap} elements")]
    BallTooLarge { cap: usize },
    #[error("cannot parse word {input:?} at byte {pos}: {msg}")]
    Parse {
        input: String,
        pos: usize,
        msg: String,
    },
    #[error("group is not finite")]
    NotFinite,
    #[error("group has no finite generating set")]
    NotFinitelyGenerated,
    #[error("coset cocycle value {0} is not in the subgroup")]
    SubgroupViolation(String),
    #[error("subgroup mismatch: {0}")]
    SubgroupMismatch(String),
}

/// Declarative description of a group, loadable from JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GroupSpec {
    /// Finite group given by its multiplication table `table[a][b] = ab`.
    FiniteTable {
        table: Vec<Vec<u32>>,
        #[serde(default)]
        names: Vec<String>,
        /// Indices of the declared generators; all non-identity elements when empty.
        #[serde(default)]
        generators: Vec<u32>,
    },
    /// Cyclic group of order `n`.
    Cyclic {
        n: u32,
        #[serde(default = "default_cyclic_label")]
        label: String,
    },
    /// Free group of the given rank; rank 1 is the integers.
    Free {
        rank: u32,
        #[serde(default)]
        labels: Vec<String>,
    },
    FreeProduct { factors: Vec<GroupSpec> },
    /// `⊕_index base`.
    DirectSum {
        base: Box<GroupSpec>,
        index: Box<GroupSpec>,
    },
    /// Restricted wreath product `base ≀ top`.
    Wreath {
        base: Box<GroupSpec>,
        top: Box<GroupSpec>,
    },
}

fn default_cyclic_label() -> String {
    "s".to_string()
}

impl GroupSpec {
    pub fn cyclic(n: u32, label: &str) -> Self {
        GroupSpec::Cyclic {
            n,
            label: label.to_string(),
        }
    }

    /// The infinite cyclic group on one labelled generator.
    pub fn integers(label: &str) -> Self {
        GroupSpec::Free {
            rank: 1,
            labels: vec![label.to_string()],
        }
    }

    pub fn free(labels: &[&str]) -> Self {
        GroupSpec::Free {
            rank: labels.len() as u32,
            labels: labels.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn free_product(factors: Vec<GroupSpec>) -> Self {
        GroupSpec::FreeProduct { factors }
    }

    pub fn wreath(base: GroupSpec, top: GroupSpec) -> Self {
        GroupSpec::Wreath {
            base: Box::new(base),
            top: Box::new(top),
        }
    }

    pub fn direct_sum(base: GroupSpec, index: GroupSpec) -> Self {
        GroupSpec::DirectSum {
            base: Box::new(base),
            index: Box::new(index),
        }
    }

    /// `⟨a⟩∗⟨b⟩∗…`, one infinite cyclic factor per label.
    pub fn free_product_of_integers(labels: &[&str]) -> Self {
        GroupSpec::free_product(labels.iter().map(|l| GroupSpec::integers(l)).collect())
    }
}

/// Finitely supported map `Γ → B` with no identity values; the lamp part
/// of a wreath product element and the elements of a direct sum.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FinSuppMap(BTreeMap<Element, Element>);

impl FinSuppMap {
    pub fn new() -> Self {
        FinSuppMap(BTreeMap::new())
    }

    pub fn get(&self, key: &Element) -> Option<&Element> {
        self.0.get(key)
    }

    pub fn support(&self) -> impl Iterator<Item = &Element> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Element, &Element)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Builds a map, dropping entries whose value is the base identity.
    pub fn from_entries(
        base: &Group,
        entries: impl IntoIterator<Item = (Element, Element)>,
    ) -> Self {
        let mut map = BTreeMap::new();
        for (k, v) in entries {
            if !base.is_identity(&v) {
                map.insert(k, v);
            }
        }
        FinSuppMap(map)
    }
}

/// Canonical normal form of a group element.
///
/// * `Finite(i)`: table index, or residue for cyclic groups.
/// * `Word`: reduced free-group word as `(generator, nonzero exponent)`
///   syllables with adjacent generators distinct.
/// * `Product`: free-product syllables `(factor, non-identity element)`
///   with adjacent factors distinct.
/// * `Lamp(b, γ)`: wreath element `bγ`.
/// * `Sum(b)`: direct-sum element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Finite(u32),
    Word(Vec<(u32, i64)>),
    Product(Vec<(u32, Element)>),
    Lamp(FinSuppMap, Box<Element>),
    Sum(FinSuppMap),
}

impl Element {
    /// Injective little-endian encoding; every variable-length part is
    /// length-prefixed with a `u32`.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16);
        self.write_bytes(&mut out);
        out
    }

    fn write_bytes(&self, out: &mut Vec<u8>) {
        match self {
            Element::Finite(i) => {
                out.push(0x01);
                out.extend_from_slice(&i.to_le_bytes());
            }
            Element::Word(syl) => {
                out.push(0x02);
                out.extend_from_slice(&(syl.len() as u32).to_le_bytes());
                for (g, e) in syl {
                    out.extend_from_slice(&g.to_le_bytes());
                    out.extend_from_slice(&e.to_le_bytes());
                }
            }
            Element::Product(syl) => {
                out.push(0x03);
                out.extend_from_slice(&(syl.len() as u32).to_le_bytes());
                for (f, x) in syl {
                    out.extend_from_slice(&f.to_le_bytes());
                    write_prefixed(x, out);
                }
            }
            Element::Lamp(map, top) => {
                out.push(0x04);
                write_map(map, out);
                write_prefixed(top, out);
            }
            Element::Sum(map) => {
                out.push(0x05);
                write_map(map, out);
            }
        }
    }

    /// Free-product syllables, empty for other kinds.
    pub fn syllables(&self) -> &[(u32, Element)] {
        match self {
            Element::Product(s) => s,
            _ => &[],
        }
    }
}

fn write_prefixed(x: &Element, out: &mut Vec<u8>) {
    let bytes = x.canonical_bytes();
    out.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
    out.extend_from_slice(&bytes);
}

fn write_map(map: &FinSuppMap, out: &mut Vec<u8>) {
    out.extend_from_slice(&(map.len() as u32).to_le_bytes());
    for (k, v) in map.iter() {
        write_prefixed(k, out);
        write_prefixed(v, out);
    }
}

/// A declared generator. Balls and words use each generator and its inverse.
#[derive(Debug, Clone)]
pub struct Generator {
    pub label: String,
    pub element: Element,
}

#[derive(Debug)]
enum Compiled {
    Table {
        table: Vec<Vec<u32>>,
        identity: u32,
        inverse: Vec<u32>,
        names: Vec<String>,
        /// Geodesic word (generator index, ±1) for every element.
        words: Vec<Vec<(usize, i64)>>,
        lengths: Vec<u64>,
    },
    Cyclic {
        n: u32,
    },
    Free {
        rank: u32,
    },
    FreeProduct {
        factors: Vec<Group>,
        /// Offset of each factor's generators in the product's generator list.
        offsets: Vec<usize>,
    },
    DirectSum {
        base: Group,
        index: Group,
        index_elements: Option<Vec<Element>>,
    },
    Wreath {
        base: Group,
        top: Group,
    },
}

#[derive(Debug)]
struct GroupInner {
    spec: GroupSpec,
    compiled: Compiled,
    generators: Vec<Generator>,
    labels: HashMap<String, usize>,
    single_char_labels: bool,
}

/// A validated group. Cheap to clone and safe to share across threads.
#[derive(Clone)]
pub struct Group(Arc<GroupInner>);

impl fmt::Debug for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Group({:?})", self.0.spec)
    }
}

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.spec == other.0.spec
    }
}

impl Eq for Group {}

fn is_label(s: &str) -> bool {
    !s.is_empty()
        && s != "e"
        && !s.contains(|c: char| c.is_whitespace() || c == '^' || c == '.' || c == '*')
        && !s.starts_with(|c: char| c.is_ascii_digit() || c == '-')
}

impl Group {
    pub fn new(spec: GroupSpec) -> Result<Self, GroupError> {
        let (compiled, generators) = match &spec {
            GroupSpec::FiniteTable {
                table,
                names,
                generators,
            } => compile_table(table, names, generators)?,
            GroupSpec::Cyclic { n, label } => {
                if *n == 0 {
                    return Err(GroupError::InvalidSpec(
                        "cyclic order must be positive; use free rank 1 for Z".into(),
                    ));
                }
                let gens = if *n > 1 {
                    vec![Generator {
                        label: label.clone(),
                        element: Element::Finite(1),
                    }]
                } else {
                    vec![]
                };
                (Compiled::Cyclic { n: *n }, gens)
            }
            GroupSpec::Free { rank, labels } => {
                let labels: Vec<String> = if labels.is_empty() {
                    default_free_labels(*rank)?
                } else {
                    labels.clone()
                };
                if labels.len() != *rank as usize {
                    return Err(GroupError::InvalidSpec(format!(
                        "free group of rank {rank} needs {rank} labels, got {}",
                        labels.len()
                    )));
                }
                let gens = labels
                    .iter()
                    .enumerate()
                    .map(|(i, l)| Generator {
                        label: l.clone(),
                        element: Element::Word(vec![(i as u32, 1)]),
                    })
                    .collect();
                (Compiled::Free { rank: *rank }, gens)
            }
            GroupSpec::FreeProduct { factors } => {
                if factors.len() < 2 {
                    return Err(GroupError::InvalidSpec(
                        "a free product needs at least two factors".into(),
                    ));
                }
                let groups = factors
                    .iter()
                    .map(|f| Group::new(f.clone()))
                    .collect::<Result<Vec<_>, _>>()?;
                let mut gens = Vec::new();
                let mut offsets = Vec::new();
                for (i, g) in groups.iter().enumerate() {
                    offsets.push(gens.len());
                    for gen in g.generators() {
                        gens.push(Generator {
                            label: gen.label.clone(),
                            element: Element::Product(vec![(i as u32, gen.element.clone())]),
                        });
                    }
                }
                (
                    Compiled::FreeProduct {
                        factors: groups,
                        offsets,
                    },
                    gens,
                )
            }
            GroupSpec::DirectSum { base, index } => {
                let base = Group::new((**base).clone())?;
                let index = Group::new((**index).clone())?;
                let index_elements = index.elements().ok();
                let mut gens = Vec::new();
                if let Some(elems) = &index_elements {
                    for k in elems {
                        for b in base.generators() {
                            let mut map = BTreeMap::new();
                            map.insert(k.clone(), b.element.clone());
                            gens.push(Generator {
                                label: format!("{}[{}]", b.label, index.format(k)),
                                element: Element::Sum(FinSuppMap(map)),
                            });
                        }
                    }
                }
                (
                    Compiled::DirectSum {
                        base,
                        index,
                        index_elements,
                    },
                    gens,
                )
            }
            GroupSpec::Wreath { base, top } => {
                let base = Group::new((**base).clone())?;
                let top = Group::new((**top).clone())?;
                let mut gens = Vec::new();
                for t in top.generators() {
                    gens.push(Generator {
                        label: t.label.clone(),
                        element: Element::Lamp(FinSuppMap::new(), Box::new(t.element.clone())),
                    });
                }
                for b in base.generators() {
                    let mut map = BTreeMap::new();
                    map.insert(top.identity(), b.element.clone());
                    gens.push(Generator {
                        label: b.label.clone(),
                        element: Element::Lamp(FinSuppMap(map), Box::new(top.identity())),
                    });
                }
                (Compiled::Wreath { base, top }, gens)
            }
        };
        let mut labels = HashMap::new();
        for (i, g) in generators.iter().enumerate() {
            if !matches!(spec, GroupSpec::DirectSum { .. }) && !is_label(&g.label) {
                return Err(GroupError::InvalidSpec(format!(
                    "invalid generator label {:?}",
                    g.label
                )));
            }
            if labels.insert(g.label.clone(), i).is_some() {
                return Err(GroupError::InvalidSpec(format!(
                    "duplicate generator label {:?}",
                    g.label
                )));
            }
        }
        let single_char_labels = generators.iter().all(|g| g.label.chars().count() == 1);
        Ok(Group(Arc::new(GroupInner {
            spec,
            compiled,
            generators,
            labels,
            single_char_labels,
        })))
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.0.spec
    }

    pub fn generators(&self) -> &[Generator] {
        &self.0.generators
    }

    /// Factor groups of a free product.
    pub fn factors(&self) -> Option<&[Group]> {
        match &self.0.compiled {
            Compiled::FreeProduct { factors, .. } => Some(factors),
            _ => None,
        }
    }

    /// `(base, top)` of a wreath product.
    pub fn wreath_parts(&self) -> Option<(&Group, &Group)> {
        match &self.0.compiled {
            Compiled::Wreath { base, top } => Some((base, top)),
            _ => None,
        }
    }

    pub fn identity(&self) -> Element {
        match &self.0.compiled {
            Compiled::Table { identity, .. } => Element::Finite(*identity),
            Compiled::Cyclic { .. } => Element::Finite(0),
            Compiled::Free { .. } => Element::Word(Vec::new()),
            Compiled::FreeProduct { .. } => Element::Product(Vec::new()),
            Compiled::DirectSum { .. } => Element::Sum(FinSuppMap::new()),
            Compiled::Wreath { top, .. } => {
                Element::Lamp(FinSuppMap::new(), Box::new(top.identity()))
            }
        }
    }

    pub fn is_identity(&self, g: &Element) -> bool {
        match (&self.0.compiled, g) {
            (Compiled::Table { identity, .. }, Element::Finite(i)) => i == identity,
            (Compiled::Cyclic { .. }, Element::Finite(i)) => *i == 0,
            (_, Element::Word(s)) => s.is_empty(),
            (_, Element::Product(s)) => s.is_empty(),
            (_, Element::Sum(m)) => m.is_empty(),
            (Compiled::Wreath { top, .. }, Element::Lamp(m, t)) => m.is_empty() && top.is_identity(t),
            _ => false,
        }
    }

    /// Structural membership test: `g` is a well-formed normal form of this group.
    pub fn contains(&self, g: &Element) -> bool {
        match (&self.0.compiled, g) {
            (Compiled::Table { table, .. }, Element::Finite(i)) => (*i as usize) < table.len(),
            (Compiled::Cyclic { n }, Element::Finite(i)) => i < n,
            (Compiled::Free { rank }, Element::Word(s)) => {
                s.iter().all(|(gen, e)| gen < rank && *e != 0)
                    && s.windows(2).all(|w| w[0].0 != w[1].0)
            }
            (Compiled::FreeProduct { factors, .. }, Element::Product(s)) => {
                s.iter().all(|(f, x)| {
                    factors
                        .get(*f as usize)
                        .is_some_and(|fg| fg.contains(x) && !fg.is_identity(x))
                }) && s.windows(2).all(|w| w[0].0 != w[1].0)
            }
            (Compiled::DirectSum { base, index, .. }, Element::Sum(m)) => {
                map_ok(base, index, m)
            }
            (Compiled::Wreath { base, top }, Element::Lamp(m, t)) => {
                map_ok(base, top, m) && top.contains(t)
            }
            _ => false,
        }
    }

    /// Checked multiplication.
    pub fn multiply(&self, a: &Element, b: &Element) -> Result<Element, GroupError> {
        if !self.contains(a) || !self.contains(b) {
            return Err(GroupError::MixedGroups);
        }
        Ok(self.mul(a, b))
    }

    /// Unchecked multiplication of two elements of this group.
    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        match (&self.0.compiled, a, b) {
            (Compiled::Table { table, .. }, Element::Finite(x), Element::Finite(y)) => {
                Element::Finite(table[*x as usize][*y as usize])
            }
            (Compiled::Cyclic { n }, Element::Finite(x), Element::Finite(y)) => {
                Element::Finite(((*x as u64 + *y as u64) % *n as u64) as u32)
            }
            (Compiled::Free { .. }, Element::Word(x), Element::Word(y)) => {
                Element::Word(mul_words(x, y))
            }
            (Compiled::FreeProduct { factors, .. }, Element::Product(x), Element::Product(y)) => {
                Element::Product(mul_syllables(factors, x, y))
            }
            (Compiled::DirectSum { base, .. }, Element::Sum(x), Element::Sum(y)) => {
                Element::Sum(pointwise(base, x, y))
            }
            (
                Compiled::Wreath { base, top },
                Element::Lamp(b1, g1),
                Element::Lamp(b2, g2),
            ) => {
                let shifted = translate_map(top, g1, b2);
                Element::Lamp(pointwise(base, b1, &shifted), Box::new(top.mul(g1, g2)))
            }
            _ => panic!("mul: operands are not elements of {:?}", self.0.spec),
        }
    }

    pub fn inv(&self, a: &Element) -> Element {
        match (&self.0.compiled, a) {
            (Compiled::Table { inverse, .. }, Element::Finite(x)) => {
                Element::Finite(inverse[*x as usize])
            }
            (Compiled::Cyclic { n }, Element::Finite(x)) => Element::Finite((n - x) % n),
            (Compiled::Free { .. }, Element::Word(x)) => {
                Element::Word(x.iter().rev().map(|(g, e)| (*g, -e)).collect())
            }
            (Compiled::FreeProduct { factors, .. }, Element::Product(x)) => Element::Product(
                x.iter()
                    .rev()
                    .map(|(f, y)| (*f, factors[*f as usize].inv(y)))
                    .collect(),
            ),
            (Compiled::DirectSum { base, .. }, Element::Sum(m)) => Element::Sum(FinSuppMap(
                m.iter().map(|(k, v)| (k.clone(), base.inv(v))).collect(),
            )),
            (Compiled::Wreath { base, top }, Element::Lamp(m, g)) => {
                let ginv = top.inv(g);
                let minv = FinSuppMap(m.iter().map(|(k, v)| (k.clone(), base.inv(v))).collect());
                Element::Lamp(translate_map(top, &ginv, &minv), Box::new(ginv))
            }
            _ => panic!("inv: operand is not an element of {:?}", self.0.spec),
        }
    }

    /// `g^k` for any integer `k`.
    pub fn pow(&self, g: &Element, k: i64) -> Element {
        let base = if k < 0 { self.inv(g) } else { g.clone() };
        let mut acc = self.identity();
        let mut sq = base;
        let mut e = k.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &sq);
            }
            e >>= 1;
            if e > 0 {
                sq = self.mul(&sq, &sq);
            }
        }
        acc
    }

    /// Left action of the top group on finitely supported maps: `(γ.b)(δ) = b(γ⁻¹δ)`.
    pub fn shift_lamps(&self, gamma: &Element, b: &FinSuppMap) -> Option<FinSuppMap> {
        match &self.0.compiled {
            Compiled::Wreath { top, .. } => Some(translate_map(top, gamma, b)),
            Compiled::DirectSum { index, .. } => Some(translate_map(index, gamma, b)),
            _ => None,
        }
    }

    /// Word length with respect to the declared generators, when it can be
    /// computed without search (free, cyclic, table and free-product kinds).
    pub fn word_length(&self, g: &Element) -> Option<u64> {
        match (&self.0.compiled, g) {
            (Compiled::Table { lengths, .. }, Element::Finite(i)) => Some(lengths[*i as usize]),
            (Compiled::Cyclic { n }, Element::Finite(i)) => {
                if *n == 2 {
                    Some(*i as u64)
                } else {
                    Some((*i).min(n - i) as u64)
                }
            }
            (Compiled::Free { .. }, Element::Word(s)) => {
                Some(s.iter().map(|(_, e)| e.unsigned_abs()).sum())
            }
            (Compiled::FreeProduct { factors, .. }, Element::Product(s)) => s
                .iter()
                .map(|(f, x)| factors[*f as usize].word_length(x))
                .sum(),
            _ => None,
        }
    }

    /// All elements of word length at most `radius`, each once, ordered by
    /// length and then by normal form.
    pub fn ball(&self, radius: usize) -> Result<Vec<Element>, GroupError> {
        self.ball_with_cap(radius, DEFAULT_BALL_CAP)
    }

    pub fn ball_with_cap(&self, radius: usize, cap: usize) -> Result<Vec<Element>, GroupError> {
        Ok(self
            .ball_with_lengths(radius, cap)?
            .into_iter()
            .map(|(g, _)| g)
            .collect())
    }

    /// Breadth-first enumeration returning `(element, word length)` pairs.
    pub fn ball_with_lengths(
        &self,
        radius: usize,
        cap: usize,
    ) -> Result<Vec<(Element, usize)>, GroupError> {
        if let Compiled::DirectSum {
            index_elements: None,
            ..
        } = &self.0.compiled
        {
            return Err(GroupError::NotFinitelyGenerated);
        }
        let mut steps: Vec<Element> = Vec::new();
        for g in self.generators() {
            steps.push(g.element.clone());
            let inv = self.inv(&g.element);
            if inv != g.element {
                steps.push(inv);
            }
        }
        let id = self.identity();
        let mut seen: HashSet<Element> = HashSet::new();
        seen.insert(id.clone());
        let mut out = vec![(id.clone(), 0usize)];
        let mut frontier = vec![id];
        for dist in 1..=radius {
            let mut next = Vec::new();
            for x in &frontier {
                for s in &steps {
                    let y = self.mul(x, s);
                    if seen.insert(y.clone()) {
                        if seen.len() > cap {
                            return Err(GroupError::BallTooLarge { cap });
                        }
                        next.push(y);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            next.sort();
            out.extend(next.iter().cloned().map(|g| (g, dist)));
            frontier = next;
        }
        Ok(out)
    }

    /// All elements of a finite group (identity first).
    pub fn elements(&self) -> Result<Vec<Element>, GroupError> {
        match &self.0.compiled {
            Compiled::Table { table, .. } => {
                let mut v: Vec<Element> = (0..table.len() as u32).map(Element::Finite).collect();
                let id = self.identity();
                v.retain(|x| *x != id);
                v.insert(0, id);
                Ok(v)
            }
            Compiled::Cyclic { n } => Ok((0..*n).map(Element::Finite).collect()),
            Compiled::Free { rank } if *rank == 0 => Ok(vec![self.identity()]),
            Compiled::Free { .. } | Compiled::FreeProduct { .. } => Err(GroupError::NotFinite),
            Compiled::DirectSum { base, index, .. } | Compiled::Wreath { base, top: index } => {
                base.elements()?;
                index.elements()?;
                let mut seen = HashSet::new();
                let id = self.identity();
                seen.insert(id.clone());
                let mut order = vec![id.clone()];
                let mut queue = VecDeque::from([id]);
                while let Some(x) = queue.pop_front() {
                    for g in self.generators() {
                        let y = self.mul(&x, &g.element);
                        if seen.insert(y.clone()) {
                            order.push(y.clone());
                            queue.push_back(y);
                        }
                        if seen.len() > DEFAULT_BALL_CAP {
                            return Err(GroupError::BallTooLarge {
                                cap: DEFAULT_BALL_CAP,
                            });
                        }
                    }
                }
                Ok(order)
            }
        }
    }

    /// Writes `g` as a product of generator powers, `[(generator index, power)]`,
    /// read left to right.
    pub fn word_of(&self, g: &Element) -> Vec<(usize, i64)> {
        match (&self.0.compiled, g) {
            (Compiled::Table { words, .. }, Element::Finite(i)) => words[*i as usize].clone(),
            (Compiled::Cyclic { .. }, Element::Finite(i)) => {
                if *i == 0 {
                    vec![]
                } else {
                    vec![(0, *i as i64)]
                }
            }
            (Compiled::Free { .. }, Element::Word(s)) => {
                s.iter().map(|(gen, e)| (*gen as usize, *e)).collect()
            }
            (Compiled::FreeProduct { factors, offsets }, Element::Product(s)) => {
                let mut out = Vec::new();
                for (f, x) in s {
                    let off = offsets[*f as usize];
                    out.extend(
                        factors[*f as usize]
                            .word_of(x)
                            .into_iter()
                            .map(|(gi, p)| (gi + off, p)),
                    );
                }
                out
            }
            (Compiled::Wreath { base, top }, Element::Lamp(m, t)) => {
                let off = top.generators().len();
                let mut out = Vec::new();
                for (k, v) in m.iter() {
                    let kw = top.word_of(k);
                    out.extend(kw.iter().cloned());
                    out.extend(base.word_of(v).into_iter().map(|(gi, p)| (gi + off, p)));
                    out.extend(kw.iter().rev().map(|(gi, p)| (*gi, -p)));
                }
                out.extend(top.word_of(t));
                out
            }
            (
                Compiled::DirectSum {
                    base,
                    index_elements: Some(elems),
                    ..
                },
                Element::Sum(m),
            ) => {
                let nb = base.generators().len();
                let mut out = Vec::new();
                for (k, v) in m.iter() {
                    let pos = elems.iter().position(|x| x == k).unwrap_or(0);
                    out.extend(
                        base.word_of(v)
                            .into_iter()
                            .map(|(gi, p)| (pos * nb + gi, p)),
                    );
                }
                out
            }
            _ => panic!("word_of: element not in {:?}", self.0.spec),
        }
    }

    /// Multiplies out a generator word produced by [`Group::word_of`].
    pub fn eval_word(&self, word: &[(usize, i64)]) -> Element {
        word.iter().fold(self.identity(), |acc, (gi, p)| {
            let g = self.pow(&self.0.generators[*gi].element, *p);
            self.mul(&acc, &g)
        })
    }

    pub fn parse(&self, s: &str) -> Result<Element, GroupError> {
        word::parse(self, s)
    }

    pub fn format(&self, g: &Element) -> String {
        word::format(self, g)
    }

    fn label_index(&self, label: &str) -> Option<usize> {
        self.0.labels.get(label).copied()
    }

    /// Number of elements of a finite group.
    pub fn order(&self) -> Result<usize, GroupError> {
        Ok(self.elements()?.len())
    }
}

fn default_free_labels(rank: u32) -> Result<Vec<String>, GroupError> {
    let alphabet: Vec<char> = "abcdfghijklmnopqrstuvwxyz".chars().collect();
    if rank as usize > alphabet.len() {
        return Err(GroupError::InvalidSpec(
            "free groups of rank > 25 need explicit labels".into(),
        ));
    }
    Ok(alphabet[..rank as usize].iter().map(|c| c.to_string()).collect())
}

fn map_ok(base: &Group, index: &Group, m: &FinSuppMap) -> bool {
    m.iter()
        .all(|(k, v)| index.contains(k) && base.contains(v) && !base.is_identity(v))
}

fn mul_words(x: &[(u32, i64)], y: &[(u32, i64)]) -> Vec<(u32, i64)> {
    let mut left = x.to_vec();
    let mut i = 0;
    while i < y.len() {
        match left.last_mut() {
            Some((g, e)) if *g == y[i].0 => {
                let sum = *e + y[i].1;
                i += 1;
                if sum != 0 {
                    *e = sum;
                    break;
                }
                left.pop();
            }
            _ => break,
        }
    }
    left.extend_from_slice(&y[i..]);
    left
}

fn mul_syllables(
    factors: &[Group],
    x: &[(u32, Element)],
    y: &[(u32, Element)],
) -> Vec<(u32, Element)> {
    let mut left = x.to_vec();
    let mut i = 0;
    while i < y.len() {
        match left.last_mut() {
            Some((f, a)) if *f == y[i].0 => {
                let fg = &factors[*f as usize];
                let prod = fg.mul(a, &y[i].1);
                i += 1;
                if !fg.is_identity(&prod) {
                    *a = prod;
                    break;
                }
                left.pop();
            }
            _ => break,
        }
    }
    left.extend_from_slice(&y[i..]);
    left
}

fn pointwise(base: &Group, x: &FinSuppMap, y: &FinSuppMap) -> FinSuppMap {
    let mut out = x.0.clone();
    for (k, v) in y.iter() {
        match out.get(k) {
            Some(a) => {
                let p = base.mul(a, v);
                if base.is_identity(&p) {
                    out.remove(k);
                } else {
                    out.insert(k.clone(), p);
                }
            }
            None => {
                out.insert(k.clone(), v.clone());
            }
        }
    }
    FinSuppMap(out)
}

fn translate_map(index: &Group, gamma: &Element, b: &FinSuppMap) -> FinSuppMap {
    FinSuppMap(
        b.iter()
            .map(|(k, v)| (index.mul(gamma, k), v.clone()))
            .collect(),
    )
}

type TableParts = (Compiled, Vec<Generator>);

fn compile_table(
    table: &[Vec<u32>],
    names: &[String],
    generators: &[u32],
) -> Result<TableParts, GroupError> {
    let n = table.len();
    if n == 0 {
        return Err(GroupError::InvalidSpec("empty multiplication table".into()));
    }
    if table.iter().any(|row| row.len() != n || row.iter().any(|&x| x as usize >= n)) {
        return Err(GroupError::InvalidSpec("table is not closed".into()));
    }
    let identity = (0..n)
        .find(|&e| (0..n).all(|x| table[e][x] as usize == x && table[x][e] as usize == x))
        .ok_or_else(|| GroupError::InvalidSpec("table has no identity".into()))?
        as u32;
    let mut inverse = vec![0u32; n];
    for x in 0..n {
        let inv = (0..n)
            .find(|&y| table[x][y] == identity && table[y][x] == identity)
            .ok_or_else(|| GroupError::InvalidSpec(format!("element {x} has no inverse")))?;
        inverse[x] = inv as u32;
    }
    for a in 0..n {
        for b in 0..n {
            let ab = table[a][b] as usize;
            for c in 0..n {
                if table[ab][c] != table[a][table[b][c] as usize] {
                    return Err(GroupError::InvalidSpec(format!(
                        "table is not associative at ({a}, {b}, {c})"
                    )));
                }
            }
        }
    }
    let names: Vec<String> = if names.is_empty() {
        (0..n)
            .map(|i| if i as u32 == identity { "e".to_string() } else { format!("g{i}") })
            .collect()
    } else {
        names.to_vec()
    };
    if names.len() != n {
        return Err(GroupError::InvalidSpec("one name per element required".into()));
    }
    let gen_idx: Vec<u32> = if generators.is_empty() {
        (0..n as u32).filter(|&i| i != identity).collect()
    } else {
        generators.to_vec()
    };
    if gen_idx.iter().any(|&g| g as usize >= n || g == identity) {
        return Err(GroupError::InvalidSpec("bad generator index".into()));
    }
    // Breadth-first geodesic words over the generators and their inverses.
    let mut words: Vec<Option<Vec<(usize, i64)>>> = vec![None; n];
    words[identity as usize] = Some(vec![]);
    let mut queue = VecDeque::from([identity as usize]);
    while let Some(x) = queue.pop_front() {
        for (gi, &g) in gen_idx.iter().enumerate() {
            for (step, pow) in [(g, 1i64), (inverse[g as usize], -1i64)] {
                let y = table[x][step as usize] as usize;
                if words[y].is_none() {
                    let mut w = words[x].clone().unwrap_or_default();
                    w.push((gi, pow));
                    words[y] = Some(w);
                    queue.push_back(y);
                }
            }
        }
    }
    let words: Vec<Vec<(usize, i64)>> = words
        .into_iter()
        .map(|w| w.ok_or_else(|| GroupError::InvalidSpec("generators do not generate".into())))
        .collect::<Result<_, _>>()?;
    let lengths = words.iter().map(|w| w.len() as u64).collect();
    let gens = gen_idx
        .iter()
        .map(|&g| Generator {
            label: names[g as usize].clone(),
            element: Element::Finite(g),
        })
        .collect();
    Ok((
        Compiled::Table {
            table: table.to_vec(),
            identity,
            inverse,
            names,
            words,
            lengths,
        },
        gens,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> Group {
        Group::new(GroupSpec::free_product_of_integers(&["a", "b"])).unwrap()
    }

    #[test]
    fn free_reduction_example() {
        let g = f2();
        let x = g.parse("ab").unwrap();
        let y = g.parse("b^-1a").unwrap();
        assert_eq!(g.format(&g.mul(&x, &y)), "a^2");
    }

    #[test]
    fn lamplighter_product_example() {
        let g = Group::new(GroupSpec::wreath(
            GroupSpec::cyclic(2, "s"),
            GroupSpec::integers("t"),
        ))
        .unwrap();
        let x = g.parse("st").unwrap();
        let sq = g.mul(&x, &x);
        // (δ₀ + δ₁, t²)
        let (_, top) = g.wreath_parts().unwrap();
        let t = top.parse("t").unwrap();
        let expected_lamps = FinSuppMap::from_entries(
            &Group::new(GroupSpec::cyclic(2, "s")).unwrap(),
            [
                (top.identity(), Element::Finite(1)),
                (t.clone(), Element::Finite(1)),
            ],
        );
        assert_eq!(
            sq,
            Element::Lamp(expected_lamps, Box::new(top.pow(&t, 2)))
        );
    }

    #[test]
    fn ball_sizes() {
        assert_eq!(f2().ball(1).unwrap().len(), 5);
        assert_eq!(f2().ball(3).unwrap().len(), 53);
        let c2 = Group::new(GroupSpec::cyclic(2, "s")).unwrap();
        assert_eq!(c2.ball(2).unwrap().len(), 2);
        let rank2 = Group::new(GroupSpec::free(&["x", "y"])).unwrap();
        assert_eq!(rank2.ball(3).unwrap().len(), 53);
    }

    #[test]
    fn ball_cap_is_an_error() {
        assert_eq!(
            f2().ball_with_cap(6, 100),
            Err(GroupError::BallTooLarge { cap: 100 })
        );
    }

    #[test]
    fn mixed_groups_rejected() {
        let g = f2();
        let c3 = Group::new(GroupSpec::cyclic(3, "s")).unwrap();
        let x = c3.parse("s").unwrap();
        assert_eq!(g.multiply(&x, &g.identity()), Err(GroupError::MixedGroups));
    }

    #[test]
    fn invalid_specs() {
        assert!(Group::new(GroupSpec::free_product(vec![GroupSpec::integers("a")])).is_err());
        let bad = GroupSpec::FiniteTable {
            table: vec![vec![0, 1], vec![1, 1]],
            names: vec![],
            generators: vec![],
        };
        assert!(Group::new(bad).is_err());
        let dup = GroupSpec::free_product_of_integers(&["a", "a"]);
        assert!(Group::new(dup).is_err());
    }

    #[test]
    fn json_spec_round_trip() {
        let json = r#"{"kind":"free-product","factors":[
            {"kind":"free","rank":1,"labels":["a"]},
            {"kind":"cyclic","n":3,"label":"c"}]}"#;
        let spec: GroupSpec = serde_json::from_str(json).unwrap();
        let g = Group::new(spec.clone()).unwrap();
        let x = g.parse("a^2c^2a^-1").unwrap();
        assert_eq!(g.format(&x), "a^2c^2a^-1");
        let back: GroupSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
        let unknown = r#"{"kind":"cyclic","n":3,"bogus":1}"#;
        assert!(serde_json::from_str::<GroupSpec>(unknown).is_err());
    }

    #[test]
    fn canonical_bytes_are_little_endian_and_prefixed() {
        let g = f2();
        let x = g.parse("a^2").unwrap();
        let inner_a2 = [0x02, 1, 0, 0, 0, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0];
        let mut expected = vec![0x03, 1, 0, 0, 0, 0, 0, 0, 0];
        expected.extend_from_slice(&(inner_a2.len() as u32).to_le_bytes());
        expected.extend_from_slice(&inner_a2);
        assert_eq!(x.canonical_bytes(), expected);
    }

    #[test]
    fn word_of_round_trips_for_wreath() {
        let g = Group::new(GroupSpec::wreath(
            GroupSpec::cyclic(3, "s"),
            GroupSpec::integers("t"),
        ))
        .unwrap();
        for x in g.ball(4).unwrap() {
            assert_eq!(g.eval_word(&g.word_of(&x)), x);
            assert_eq!(g.parse(&g.format(&x)).unwrap(), x);
        }
    }

    #[test]
    fn finite_wreath_order() {
        let g = Group::new(GroupSpec::wreath(
            GroupSpec::cyclic(2, "s"),
            GroupSpec::cyclic(2, "t"),
        ))
        .unwrap();
        assert_eq!(g.order().unwrap(), 8);
    }
}
