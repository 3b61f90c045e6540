use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::{FinitaryMap, LiftError, MapKind, MeasureCertificate};
use crate::group::{Element, Group, GroupSpec};
use crate::shift::{Alphabet, Configuration, ShiftError};

/// `φ(x)_γ = ι(x_γ)` for a measure-preserving symbol bijection `ι`.
#[derive(Debug, Clone)]
pub struct Coordinatewise {
    group: Group,
    source: Arc<Alphabet>,
    target: Arc<Alphabet>,
    table: Vec<usize>,
}

/// Coordinatewise application of the symbol bijection `table`.
pub fn coordinatewise_lift(
    group: &Group,
    source: &Arc<Alphabet>,
    target: &Arc<Alphabet>,
    table: &[usize],
) -> Result<Arc<dyn FinitaryMap>, LiftError> {
    let n = source.len();
    let mut hit = vec![false; target.len()];
    if table.len() != n || target.len() != n {
        return Err(LiftError::InvalidMap("symbol map must be a bijection".into()));
    }
    for (i, &j) in table.iter().enumerate() {
        if j >= n || std::mem::replace(&mut hit[j], true) {
            return Err(LiftError::InvalidMap("symbol map must be a bijection".into()));
        }
        if source.weight(i) != target.weight(j) {
            return Err(LiftError::NotMeasurePreserving(format!(
                "symbol {} has weight {} but its image {} has weight {}",
                source.symbols()[i],
                source.weight(i),
                target.symbols()[j],
                target.weight(j)
            )));
        }
    }
    Ok(Arc::new(Coordinatewise {
        group: group.clone(),
        source: source.clone(),
        target: target.clone(),
        table: table.to_vec(),
    }))
}

pub fn identity_map(group: &Group, alphabet: &Arc<Alphabet>) -> Arc<dyn FinitaryMap> {
    let table: Vec<usize> = (0..alphabet.len()).collect();
    coordinatewise_lift(group, alphabet, alphabet, &table).expect("identity is a bijection")
}

impl FinitaryMap for Coordinatewise {
    fn group(&self) -> &Group {
        &self.group
    }

    fn source(&self) -> &Arc<Alphabet> {
        &self.source
    }

    fn target(&self) -> &Arc<Alphabet> {
        &self.target
    }

    fn eval(&self, x: &Configuration, gamma: &Element) -> Result<usize, ShiftError> {
        Ok(self.table[x.eval(gamma)?])
    }

    fn inverse(&self) -> Arc<dyn FinitaryMap> {
        let mut inv = vec![0; self.table.len()];
        for (i, &j) in self.table.iter().enumerate() {
            inv[j] = i;
        }
        Arc::new(Coordinatewise {
            group: self.group.clone(),
            source: self.target.clone(),
            target: self.source.clone(),
            table: inv,
        })
    }

    fn certificate(&self) -> MeasureCertificate {
        MeasureCertificate::Bijection
    }

    fn describe(&self) -> String {
        if self.table.iter().enumerate().all(|(i, &j)| i == j) && self.source == self.target {
            "identity".into()
        } else {
            format!("bijection{:?}", self.table)
        }
    }

    fn window_cap(&self) -> usize {
        1
    }

    fn kind(&self) -> MapKind {
        MapKind::Coordinatewise
    }
}

/// Binary adding machine on `Z = ⟨a⟩` along a chosen direction `a^{±1}`.
///
/// Coordinates `a^0, a^1, …` hold the binary digits of a 2-adic integer,
/// least significant first; the map adds one (or subtracts one for the
/// inverse) and leaves negative powers alone. Every evaluation first
/// locates the end `z` of the carry run among `a^0, …, a^{W−2}` and fails
/// with `NonFinitaryAtPoint` when there is none, so `φ(x)` is either fully
/// defined or undefined at every coordinate.
#[derive(Debug, Clone)]
pub struct Odometer {
    group: Group,
    alphabet: Arc<Alphabet>,
    direction: i64,
    cap: usize,
    subtract: bool,
}

/// The adding machine on uniform `{0, 1}` over `Z`, carrying toward
/// increasing powers of `direction` (`"a"` or `"a^-1"`).
pub fn odometer_map(
    group: &Group,
    alphabet: &Arc<Alphabet>,
    direction: &str,
    cap: usize,
) -> Result<Arc<dyn FinitaryMap>, LiftError> {
    if !matches!(group.spec(), GroupSpec::Free { rank: 1, .. }) {
        return Err(LiftError::GroupMismatch("the odometer needs Z = free group of rank 1".into()));
    }
    if alphabet.len() != 2 || !alphabet.is_uniform() {
        return Err(LiftError::InvalidMap("the odometer needs the uniform alphabet {0, 1}".into()));
    }
    if cap < 2 {
        return Err(LiftError::InvalidMap("window cap must be at least 2".into()));
    }
    let dir = match group.parse(direction)? {
        Element::Word(s) if s.len() == 1 && s[0].1.abs() == 1 => s[0].1,
        _ => {
            return Err(LiftError::InvalidMap(format!(
                "direction {direction:?} is not a generator or its inverse"
            )))
        }
    };
    Ok(Arc::new(Odometer {
        group: group.clone(),
        alphabet: alphabet.clone(),
        direction: dir,
        cap,
        subtract: false,
    }))
}

impl Odometer {
    fn exponent(&self, gamma: &Element) -> i64 {
        match gamma {
            Element::Word(s) if s.is_empty() => 0,
            Element::Word(s) => s[0].1 * self.direction,
            _ => unreachable!("odometer coordinates are powers of one generator"),
        }
    }

    fn coordinate(&self, k: i64) -> Element {
        if k == 0 {
            Element::Word(vec![])
        } else {
            Element::Word(vec![(0, k * self.direction)])
        }
    }

    /// Index of the last digit that flips.
    fn carry_end(&self, x: &Configuration, gamma: &Element) -> Result<i64, ShiftError> {
        let stop = if self.subtract { 1 } else { 0 };
        for j in 0..(self.cap - 1) as i64 {
            if x.eval(&self.coordinate(j))? == stop {
                return Ok(j);
            }
        }
        Err(ShiftError::NonFinitaryAtPoint {
            coordinate: self.group.format(gamma),
            cap: self.cap,
        })
    }
}

impl FinitaryMap for Odometer {
    fn group(&self) -> &Group {
        &self.group
    }

    fn source(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    fn target(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    fn eval(&self, x: &Configuration, gamma: &Element) -> Result<usize, ShiftError> {
        let k = self.exponent(gamma);
        if k < 0 {
            return x.eval(gamma);
        }
        let z = self.carry_end(x, gamma)?;
        let v = x.eval(gamma)?;
        Ok(if k <= z { 1 - v } else { v })
    }

    fn inverse(&self) -> Arc<dyn FinitaryMap> {
        Arc::new(Odometer {
            subtract: !self.subtract,
            ..self.clone()
        })
    }

    fn certificate(&self) -> MeasureCertificate {
        MeasureCertificate::BlockPermutation
    }

    fn describe(&self) -> String {
        let gen = &self.group.generators()[0].label;
        let dir = if self.direction > 0 { gen.clone() } else { format!("{gen}^-1") };
        if self.subtract {
            format!("odometer⁻¹({dir})")
        } else {
            format!("odometer({dir})")
        }
    }

    fn window_cap(&self) -> usize {
        self.cap
    }

    fn kind(&self) -> MapKind {
        MapKind::FiniteModification
    }

    fn modified_support(&self, x: &Configuration) -> Result<BTreeSet<Element>, LiftError> {
        let z = self.carry_end(x, &self.group.identity())?;
        Ok((0..=z).map(|j| self.coordinate(j)).collect())
    }
}

/// Applies a permutation of patterns on one finite window and is the
/// identity elsewhere.
#[derive(Debug, Clone)]
pub struct BlockScramble {
    group: Group,
    alphabet: Arc<Alphabet>,
    window: Vec<Element>,
    position: HashMap<Element, usize>,
    /// Patterns are indexed in mixed radix with `window[0]` most significant.
    perm: Vec<usize>,
    inverse: Vec<usize>,
    cap: usize,
}

/// JSON form of a block scramble: a window of words and either a full
/// permutation of pattern indices or a list of pattern transpositions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScrambleSpec {
    pub window: Vec<String>,
    #[serde(default)]
    pub permutation: Vec<usize>,
    #[serde(default)]
    pub swaps: Vec<(Vec<usize>, Vec<usize>)>,
}

impl ScrambleSpec {
    pub fn build(
        &self,
        group: &Group,
        alphabet: &Arc<Alphabet>,
    ) -> Result<Arc<dyn FinitaryMap>, LiftError> {
        let window = self
            .window
            .iter()
            .map(|w| group.parse(w))
            .collect::<Result<Vec<_>, _>>()?;
        let q = alphabet.len();
        let total = q.pow(window.len() as u32);
        let perm = if !self.permutation.is_empty() {
            self.permutation.clone()
        } else {
            let mut p: Vec<usize> = (0..total).collect();
            for (a, b) in &self.swaps {
                let ia = pattern_index(a, q)?;
                let ib = pattern_index(b, q)?;
                if ia >= total || ib >= total || a.len() != window.len() || b.len() != window.len() {
                    return Err(LiftError::InvalidMap("swap pattern does not fit the window".into()));
                }
                p.swap(ia, ib);
            }
            p
        };
        block_scramble_map(group, alphabet, &window, &perm)
    }
}

fn pattern_index(pattern: &[usize], q: usize) -> Result<usize, LiftError> {
    pattern.iter().try_fold(0usize, |acc, &s| {
        if s >= q {
            Err(LiftError::InvalidMap(format!("symbol {s} out of range")))
        } else {
            Ok(acc * q + s)
        }
    })
}

fn pattern_of(mut index: usize, q: usize, len: usize) -> Vec<usize> {
    let mut p = vec![0; len];
    for slot in p.iter_mut().rev() {
        *slot = index % q;
        index /= q;
    }
    p
}

pub fn block_scramble_map(
    group: &Group,
    alphabet: &Arc<Alphabet>,
    window: &[Element],
    perm: &[usize],
) -> Result<Arc<dyn FinitaryMap>, LiftError> {
    let q = alphabet.len();
    let n = window.len();
    if n == 0 || n > super::DEFAULT_WINDOW_CAP {
        return Err(LiftError::InvalidMap("window size must be between 1 and the cap".into()));
    }
    let total = q
        .checked_pow(n as u32)
        .filter(|&t| t <= 1 << 20)
        .ok_or_else(|| LiftError::InvalidMap("too many window patterns".into()))?;
    let mut position = HashMap::new();
    for (i, w) in window.iter().enumerate() {
        if !group.contains(w) || position.insert(w.clone(), i).is_some() {
            return Err(LiftError::InvalidMap("window must list distinct group elements".into()));
        }
    }
    if perm.len() != total {
        return Err(LiftError::InvalidMap(format!(
            "permutation must act on all {total} patterns"
        )));
    }
    let mut inverse = vec![usize::MAX; total];
    for (i, &j) in perm.iter().enumerate() {
        if j >= total || inverse[j] != usize::MAX {
            return Err(LiftError::InvalidMap("not a permutation of patterns".into()));
        }
        inverse[j] = i;
    }
    if !alphabet.is_uniform() {
        let measure = |idx: usize| -> BigRational {
            pattern_of(idx, q, n)
                .iter()
                .fold(BigRational::one(), |acc, &s| acc * alphabet.weight(s))
        };
        if let Some(i) = (0..total).find(|&i| measure(i) != measure(perm[i])) {
            return Err(LiftError::NotMeasurePreserving(format!(
                "pattern {} and its image {} have different measure",
                alphabet.pattern_label(&pattern_of(i, q, n)),
                alphabet.pattern_label(&pattern_of(perm[i], q, n))
            )));
        }
    }
    Ok(Arc::new(BlockScramble {
        group: group.clone(),
        alphabet: alphabet.clone(),
        window: window.to_vec(),
        position,
        perm: perm.to_vec(),
        inverse,
        cap: n.max(1),
    }))
}

impl FinitaryMap for BlockScramble {
    fn group(&self) -> &Group {
        &self.group
    }

    fn source(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    fn target(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    fn eval(&self, x: &Configuration, gamma: &Element) -> Result<usize, ShiftError> {
        let Some(&pos) = self.position.get(gamma) else {
            return x.eval(gamma);
        };
        let q = self.alphabet.len();
        let mut idx = 0;
        for w in &self.window {
            idx = idx * q + x.eval(w)?;
        }
        Ok(pattern_of(self.perm[idx], q, self.window.len())[pos])
    }

    fn inverse(&self) -> Arc<dyn FinitaryMap> {
        Arc::new(BlockScramble {
            perm: self.inverse.clone(),
            inverse: self.perm.clone(),
            ..self.clone()
        })
    }

    fn certificate(&self) -> MeasureCertificate {
        MeasureCertificate::BlockPermutation
    }

    fn describe(&self) -> String {
        let w: Vec<String> = self.window.iter().map(|x| self.group.format(x)).collect();
        format!("scramble[{}]", w.join(","))
    }

    fn window_cap(&self) -> usize {
        self.cap
    }

    fn kind(&self) -> MapKind {
        MapKind::FiniteModification
    }

    fn modified_support(&self, _x: &Configuration) -> Result<BTreeSet<Element>, LiftError> {
        Ok(self.window.iter().cloned().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lift::observed_defect;
    use crate::shift::shift_act;

    fn z() -> Group {
        Group::new(GroupSpec::integers("a")).unwrap()
    }

    fn bits() -> Arc<Alphabet> {
        Arc::new(Alphabet::uniform(2))
    }

    fn from_bits(g: &Group, nonneg: &[usize]) -> Configuration {
        let zero = Configuration::constant(g, &bits(), 0).unwrap();
        let a = g.parse("a").unwrap();
        Configuration::patched(
            &zero,
            nonneg.iter().enumerate().map(|(k, &v)| (g.pow(&a, k as i64), v)),
        )
        .unwrap()
    }

    fn output(map: &Arc<dyn FinitaryMap>, x: &Configuration, len: i64) -> Vec<usize> {
        let g = map.group();
        let a = g.parse("a").unwrap();
        (0..len).map(|k| map.eval(x, &g.pow(&a, k)).unwrap()).collect()
    }

    #[test]
    fn odometer_examples() {
        let g = z();
        let odo = odometer_map(&g, &bits(), "a", 64).unwrap();
        assert_eq!(output(&odo, &from_bits(&g, &[0, 1, 1]), 4), vec![1, 1, 1, 0]);
        assert_eq!(output(&odo, &from_bits(&g, &[1, 1, 0, 1]), 4), vec![0, 0, 1, 1]);
        let ones = Configuration::constant(&g, &bits(), 1).unwrap();
        assert!(matches!(
            odo.eval(&ones, &g.identity()),
            Err(ShiftError::NonFinitaryAtPoint { .. })
        ));
        // negative powers are untouched
        let x = from_bits(&g, &[1, 1]);
        assert_eq!(odo.eval(&x, &g.parse("a^-1").unwrap()).unwrap(), 0);
    }

    #[test]
    fn odometer_direction_reverses_coordinates() {
        let g = z();
        let odo = odometer_map(&g, &bits(), "a^-1", 64).unwrap();
        let zero = Configuration::constant(&g, &bits(), 0).unwrap();
        assert_eq!(odo.eval(&zero, &g.identity()).unwrap(), 1);
        let one_back = Configuration::patched(&zero, [(g.identity(), 1)]).unwrap();
        assert_eq!(odo.eval(&one_back, &g.parse("a^-1").unwrap()).unwrap(), 1);
        assert_eq!(odo.eval(&one_back, &g.parse("a").unwrap()).unwrap(), 0);
    }

    #[test]
    fn odometer_inverse_round_trip() {
        let g = z();
        let odo = odometer_map(&g, &bits(), "a", 64).unwrap();
        let inv = odo.inverse();
        for seed in 0..50 {
            let x = Configuration::seeded(&g, &bits(), seed);
            let y = Configuration::mapped(odo.clone(), &x).unwrap();
            for c in g.ball(10).unwrap() {
                assert_eq!(inv.eval(&y, &c).unwrap(), x.eval(&c).unwrap());
            }
        }
    }

    /// Interval oracle: the defect under `a^m` is `[0, z₁] △ [m, m + z₀]`
    /// in exponents, with `z₁` the carry end of `δ.x` and `z₀` that of `x`.
    #[test]
    fn odometer_defect_matches_interval_oracle() {
        let g = z();
        let odo = odometer_map(&g, &bits(), "a", 64).unwrap();
        let a = g.parse("a").unwrap();
        let carry = |x: &Configuration| (0..).find(|&j| x.eval(&g.pow(&a, j)).unwrap() == 0).unwrap();
        for seed in 0..40 {
            let x = Configuration::seeded(&g, &bits(), seed);
            for m in -3i64..=3 {
                let delta = g.pow(&a, m);
                let z0 = carry(&x);
                let z1 = carry(&shift_act(&delta, &x));
                let first: BTreeSet<i64> = (0..=z1).collect();
                let second: BTreeSet<i64> = (m..=m + z0).collect();
                let expect: BTreeSet<Element> = first
                    .symmetric_difference(&second)
                    .map(|&k| g.pow(&a, k))
                    .collect();
                assert_eq!(odo.defect(&delta, &x).unwrap(), expect);
                assert_eq!(observed_defect(odo.as_ref(), &delta, &x, 20).unwrap(), expect);
            }
        }
    }

    #[test]
    fn coordinatewise_validation() {
        let g = z();
        let two = bits();
        assert!(coordinatewise_lift(&g, &two, &two, &[1, 0]).is_ok());
        let skew = Arc::new(Alphabet::with_weights(&[(1, 4), (3, 4)]).unwrap());
        assert!(matches!(
            coordinatewise_lift(&g, &two, &skew, &[0, 1]),
            Err(LiftError::NotMeasurePreserving(_))
        ));
        let c4 = Arc::new(
            Alphabet::new(
                ["e", "s", "s^2", "s^3"].iter().map(|s| s.to_string()).collect(),
                vec![BigRational::new(1.into(), 4.into()); 4],
            )
            .unwrap(),
        );
        assert!(coordinatewise_lift(&g, &Arc::new(Alphabet::uniform(4)), &c4, &[0, 1, 2, 3]).is_ok());
        let swap = coordinatewise_lift(&g, &two, &two, &[1, 0]).unwrap();
        let x = Configuration::seeded(&g, &two, 3);
        assert!(swap.defect(&g.parse("a^5").unwrap(), &x).unwrap().is_empty());
    }

    #[test]
    fn scramble_examples() {
        let g = z();
        let alpha = bits();
        let window = vec![g.identity(), g.parse("a").unwrap()];
        let ident = block_scramble_map(&g, &alpha, &window, &[0, 1, 2, 3]).unwrap();
        let x = Configuration::seeded(&g, &alpha, 8);
        for c in g.ball(4).unwrap() {
            assert_eq!(ident.eval(&x, &c).unwrap(), x.eval(&c).unwrap());
        }
        // swap 01 <-> 10
        let swap = block_scramble_map(&g, &alpha, &window, &[0, 2, 1, 3]).unwrap();
        for (pattern, expect) in [([0, 0], [0, 0]), ([0, 1], [1, 0]), ([1, 0], [0, 1]), ([1, 1], [1, 1])] {
            let y = from_bits(&g, &pattern);
            assert_eq!(output(&swap, &y, 2), expect.to_vec());
        }
        for seed in 0..20 {
            let x = Configuration::seeded(&g, &alpha, seed);
            for d in g.ball(3).unwrap() {
                assert_eq!(
                    swap.defect(&d, &x).unwrap(),
                    observed_defect(swap.as_ref(), &d, &x, 4).unwrap()
                );
            }
        }
        let skew = Arc::new(Alphabet::with_weights(&[(1, 4), (3, 4)]).unwrap());
        assert!(matches!(
            block_scramble_map(&g, &skew, &window, &[1, 0, 2, 3]),
            Err(LiftError::NotMeasurePreserving(_))
        ));
        assert!(block_scramble_map(&g, &skew, &window, &[0, 2, 1, 3]).is_ok());
    }
}
