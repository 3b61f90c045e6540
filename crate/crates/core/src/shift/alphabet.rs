use std::collections::HashMap;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::ShiftError;
use crate::group::{Element, Group, GroupSpec};

/// A finite probability space of symbols, optionally with a free
/// measure-preserving action of a finite lamp group.
#[derive(Debug, Clone)]
pub struct Alphabet {
    symbols: Vec<String>,
    weights: Vec<BigRational>,
    /// Inverse-CDF cut points: a 64-bit draw `u` maps to the first `i`
    /// with `u < cuts[i]`, or to the last symbol.
    cuts: Vec<u64>,
    lamp: Option<LampAction>,
}

#[derive(Debug, Clone)]
struct LampAction {
    group: Group,
    perms: HashMap<Element, Vec<usize>>,
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols
            && self.weights == other.weights
            && match (&self.lamp, &other.lamp) {
                (None, None) => true,
                (Some(a), Some(b)) => a.group == b.group && a.perms == b.perms,
                _ => false,
            }
    }
}

impl Eq for Alphabet {}

/// JSON form of an alphabet. Weights are decimal rationals such as `"1/4"`;
/// uniform when omitted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphabetSpec {
    pub symbols: Vec<String>,
    #[serde(default)]
    pub weights: Vec<String>,
    #[serde(default)]
    pub lamp: Option<LampActionSpec>,
}

/// A finite group acting on symbol indices; one permutation per generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LampActionSpec {
    pub group: GroupSpec,
    pub generators: Vec<Vec<usize>>,
}

fn invalid(msg: impl Into<String>) -> ShiftError {
    ShiftError::InvalidAlphabet(msg.into())
}

impl Alphabet {
    pub fn new(symbols: Vec<String>, weights: Vec<BigRational>) -> Result<Self, ShiftError> {
        if symbols.is_empty() || symbols.len() != weights.len() {
            return Err(invalid("need one weight per symbol and at least one symbol"));
        }
        if weights.iter().any(|w| !w.is_positive()) {
            return Err(invalid("weights must be positive"));
        }
        let total: BigRational = weights.iter().sum();
        if !total.is_one() {
            return Err(invalid(format!("weights sum to {total}, not 1")));
        }
        let scale = BigRational::from_integer(BigInt::one() << 64);
        let mut cuts = Vec::with_capacity(weights.len() - 1);
        let mut cumulative = BigRational::zero();
        for w in &weights[..weights.len() - 1] {
            cumulative += w;
            let cut = (&cumulative * &scale).floor().to_integer();
            cuts.push(cut.to_u64().expect("cumulative weight below one"));
        }
        Ok(Alphabet {
            symbols,
            weights,
            cuts,
            lamp: None,
        })
    }

    /// Uniform alphabet on `0..n` named by decimal digits.
    pub fn uniform(n: usize) -> Self {
        let symbols = (0..n).map(|i| i.to_string()).collect();
        Self::new(symbols, vec![BigRational::new(1.into(), (n as i64).into()); n])
            .expect("uniform weights")
    }

    pub fn with_weights(weights: &[(i64, i64)]) -> Result<Self, ShiftError> {
        let symbols = (0..weights.len()).map(|i| i.to_string()).collect();
        let w = weights
            .iter()
            .map(|&(p, q)| {
                if q == 0 {
                    Err(invalid("zero denominator"))
                } else {
                    Ok(BigRational::new(p.into(), q.into()))
                }
            })
            .collect::<Result<_, _>>()?;
        Self::new(symbols, w)
    }

    /// Uniform `{0, 1}` with `C₂ = ⟨s⟩` acting by swapping the symbols.
    pub fn binary_swap() -> Self {
        let c2 = Group::new(GroupSpec::cyclic(2, "s")).expect("C2");
        Self::uniform(2)
            .with_lamp_action(&c2, &[vec![1, 0]])
            .expect("swap is free")
    }

    /// The regular action of `Z/n = ⟨s⟩` on uniform `{0, …, n−1}` by `+1`.
    pub fn cyclic_regular(n: usize) -> Self {
        let cn = Group::new(GroupSpec::cyclic(n as u32, "s")).expect("cyclic");
        let step: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        Self::uniform(n)
            .with_lamp_action(&cn, &[step])
            .expect("regular action is free")
    }

    /// Declares the action of a finite group given by one symbol
    /// permutation per generator. The action must be well defined, free
    /// and measure preserving.
    pub fn with_lamp_action(
        mut self,
        group: &Group,
        generator_perms: &[Vec<usize>],
    ) -> Result<Self, ShiftError> {
        let n = self.len();
        if generator_perms.len() != group.generators().len() {
            return Err(invalid("one permutation per lamp generator required"));
        }
        for p in generator_perms {
            let mut seen = vec![false; n];
            if p.len() != n || p.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true)) {
                return Err(invalid("lamp generator is not a permutation of the symbols"));
            }
            if p.iter().enumerate().any(|(i, &j)| self.weights[i] != self.weights[j]) {
                return Err(invalid("lamp action does not preserve the weights"));
            }
        }
        let elements = group.elements().map_err(|_| invalid("lamp group must be finite"))?;
        let compose = |p: &[usize], q: &[usize]| -> Vec<usize> { q.iter().map(|&i| p[i]).collect() };
        let invert = |p: &[usize]| -> Vec<usize> {
            let mut inv = vec![0; p.len()];
            for (i, &j) in p.iter().enumerate() {
                inv[j] = i;
            }
            inv
        };
        let identity: Vec<usize> = (0..n).collect();
        let mut perms = HashMap::new();
        for g in &elements {
            let mut p = identity.clone();
            for (gi, pow) in group.word_of(g) {
                let step = if pow > 0 {
                    generator_perms[gi].clone()
                } else {
                    invert(&generator_perms[gi])
                };
                for _ in 0..pow.unsigned_abs() {
                    p = compose(&p, &step);
                }
            }
            perms.insert(g.clone(), p);
        }
        for g in &elements {
            for h in &elements {
                if perms[&group.mul(g, h)] != compose(&perms[g], &perms[h]) {
                    return Err(invalid("generator permutations do not define an action"));
                }
            }
            if !group.is_identity(g) && perms[g].iter().enumerate().any(|(i, &j)| i == j) {
                return Err(invalid(format!(
                    "lamp action is not free: {} fixes a symbol",
                    group.format(g)
                )));
            }
        }
        self.lamp = Some(LampAction {
            group: group.clone(),
            perms,
        });
        Ok(self)
    }

    pub fn from_spec(spec: &AlphabetSpec) -> Result<Self, ShiftError> {
        let n = spec.symbols.len();
        let weights = if spec.weights.is_empty() {
            vec![BigRational::new(1.into(), (n.max(1) as i64).into()); n]
        } else {
            spec.weights
                .iter()
                .map(|w| BigRational::from_str(w.trim()).map_err(|_| invalid(format!("bad weight {w:?}"))))
                .collect::<Result<_, _>>()?
        };
        let alpha = Self::new(spec.symbols.clone(), weights)?;
        match &spec.lamp {
            None => Ok(alpha),
            Some(l) => {
                let g = Group::new(l.group.clone())?;
                alpha.with_lamp_action(&g, &l.generators)
            }
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> &BigRational {
        &self.weights[i]
    }

    pub fn is_uniform(&self) -> bool {
        self.weights.iter().all(|w| *w == self.weights[0])
    }

    /// Maps a uniform 64-bit draw to a symbol by the inverse CDF.
    pub fn sample(&self, u: u64) -> usize {
        self.cuts.partition_point(|&c| c <= u)
    }

    pub fn lamp_group(&self) -> Option<&Group> {
        self.lamp.as_ref().map(|l| &l.group)
    }

    /// `b.z`.
    pub fn act(&self, b: &Element, z: usize) -> Result<usize, ShiftError> {
        let lamp = self.lamp.as_ref().ok_or(ShiftError::NoLampAction)?;
        let p = lamp
            .perms
            .get(b)
            .ok_or(ShiftError::Group(crate::group::GroupError::MixedGroups))?;
        p.get(z).copied().ok_or(ShiftError::BadSymbol(z))
    }

    /// The unique lamp `λ` with `λ.from = to`, if any.
    pub fn lamp_witness(&self, from: usize, to: usize) -> Option<Element> {
        let lamp = self.lamp.as_ref()?;
        let mut hits: Vec<&Element> = lamp
            .perms
            .iter()
            .filter(|(_, p)| p.get(from) == Some(&to))
            .map(|(g, _)| g)
            .collect();
        hits.sort();
        hits.first().map(|g| (*g).clone())
    }

    /// Product-measure probability of a pattern, as a float.
    pub fn pattern_probability(&self, pattern: &[usize]) -> f64 {
        pattern
            .iter()
            .map(|&i| self.weights[i].to_f64().unwrap_or(0.0))
            .product()
    }

    /// Symbol names joined into a pattern label.
    pub fn pattern_label(&self, pattern: &[usize]) -> String {
        let names: Vec<&str> = pattern.iter().map(|&i| self.symbols[i].as_str()).collect();
        if self.symbols.iter().all(|s| s.chars().count() == 1) {
            names.concat()
        } else {
            names.join(",")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cut_points_are_exact() {
        let a = Alphabet::with_weights(&[(1, 4), (3, 4)]).unwrap();
        assert_eq!(a.cuts, vec![1u64 << 62]);
        assert_eq!(a.sample((1 << 62) - 1), 0);
        assert_eq!(a.sample(1 << 62), 1);
        assert_eq!(a.sample(u64::MAX), 1);
        let u = Alphabet::uniform(3);
        assert_eq!(u.sample(0), 0);
        assert_eq!(u.sample(u64::MAX), 2);
    }

    #[test]
    fn weight_validation() {
        assert!(Alphabet::with_weights(&[(1, 2), (1, 3)]).is_err());
        assert!(Alphabet::with_weights(&[(1, 1), (0, 1)]).is_err());
        let spec: AlphabetSpec =
            serde_json::from_str(r#"{"symbols":["x","y"],"weights":["1/4","3/4"]}"#).unwrap();
        let a = Alphabet::from_spec(&spec).unwrap();
        assert_eq!(a.weight(1), &BigRational::new(3.into(), 4.into()));
    }

    #[test]
    fn lamp_action_checks() {
        let c2 = Group::new(GroupSpec::cyclic(2, "s")).unwrap();
        // identity permutation is not free
        assert!(Alphabet::uniform(2).with_lamp_action(&c2, &[vec![0, 1]]).is_err());
        // swap of unequal weights is not measure preserving
        let skew = Alphabet::with_weights(&[(1, 4), (3, 4)]).unwrap();
        assert!(skew.with_lamp_action(&c2, &[vec![1, 0]]).is_err());
        // a 3-cycle does not define a C2 action
        let c2b = Group::new(GroupSpec::cyclic(2, "s")).unwrap();
        assert!(Alphabet::uniform(3).with_lamp_action(&c2b, &[vec![1, 2, 0]]).is_err());
        let c4 = Alphabet::cyclic_regular(4);
        let g = c4.lamp_group().unwrap().clone();
        let s = g.parse("s^3").unwrap();
        assert_eq!(c4.act(&s, 2).unwrap(), 1);
        assert_eq!(c4.lamp_witness(1, 0), Some(s));
    }
}
