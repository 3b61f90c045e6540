//! JSON forms of groupoids: an explicit table and a small construction language.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::construct::{action_groupoid, direct_sum, semidirect, wreath_default, GroupoidBundle};
use super::{uniform_weights, FiniteGroupoid, GroupoidError};
use crate::group::FiniteGroup;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectJson {
    pub name: String,
    /// `"p/q"` or an integer.
    pub weight: String,
}

/// Objects with weights, morphisms as `(id, src, rng)` with object indices,
/// and composition as `(g, h, gh)` triples over every composable pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupoidJson {
    pub objects: Vec<ObjectJson>,
    pub morphisms: Vec<(String, usize, usize)>,
    pub composition: Vec<(usize, usize, usize)>,
}

pub(crate) fn parse_weight(s: &str) -> Result<BigRational, GroupoidError> {
    s.trim()
        .parse::<BigRational>()
        .map_err(|_| GroupoidError::Malformed(format!("bad weight {s:?}")))
}

fn parse_weights(ws: &[String]) -> Result<Vec<BigRational>, GroupoidError> {
    ws.iter().map(|w| parse_weight(w)).collect()
}

impl FiniteGroupoid {
    pub fn to_json(&self) -> GroupoidJson {
        GroupoidJson {
            objects: (0..self.num_objects())
                .map(|x| ObjectJson {
                    name: self.object_name(x).to_string(),
                    weight: self.weight(x).to_string(),
                })
                .collect(),
            morphisms: (0..self.num_morphisms())
                .map(|g| (self.label(g).to_string(), self.source(g), self.range(g)))
                .collect(),
            composition: self.composable_pairs().collect(),
        }
    }

    pub fn from_json(j: &GroupoidJson) -> Result<Self, GroupoidError> {
        let objects = j
            .objects
            .iter()
            .map(|o| Ok((o.name.clone(), parse_weight(&o.weight)?)))
            .collect::<Result<Vec<_>, GroupoidError>>()?;
        FiniteGroupoid::new(objects, j.morphisms.clone(), &j.composition)
    }
}

/// A groupoid described either explicitly or by a construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GroupoidSpec {
    Explicit(GroupoidJson),
    /// Full relation on `n` points, uniform unless `weights` is given.
    FullRelation {
        n: usize,
        #[serde(default)]
        weights: Option<Vec<String>>,
    },
    Units {
        n: usize,
        #[serde(default)]
        weights: Option<Vec<String>>,
    },
    /// Equivalence relation with the given class label per point.
    Relation {
        classes: Vec<usize>,
        #[serde(default)]
        weights: Option<Vec<String>>,
    },
    /// `Z/order` acting through the powers of one permutation.
    CyclicAction {
        order: usize,
        generator: Vec<usize>,
        #[serde(default)]
        weights: Option<Vec<String>>,
    },
    Sum {
        factors: Vec<GroupoidSpec>,
    },
    /// `lamp ≀ base` over the range fibration of `base`.
    Wreath {
        lamp: Box<GroupoidSpec>,
        base: Box<GroupoidSpec>,
    },
    /// `base ⋉ fiber` with the same fiber over every object and identity
    /// transport.
    Semidirect {
        base: Box<GroupoidSpec>,
        fiber: Box<GroupoidSpec>,
    },
    Restrict {
        source: Box<GroupoidSpec>,
        objects: Vec<usize>,
    },
}

impl GroupoidSpec {
    pub fn build(&self) -> Result<FiniteGroupoid, GroupoidError> {
        let weights = |n: usize, w: &Option<Vec<String>>| -> Result<Vec<BigRational>, GroupoidError> {
            match w {
                None => Ok(uniform_weights(n)),
                Some(ws) if ws.len() == n => parse_weights(ws),
                Some(_) => Err(GroupoidError::Invalid("one weight per point".into())),
            }
        };
        match self {
            GroupoidSpec::Explicit(j) => FiniteGroupoid::from_json(j),
            GroupoidSpec::FullRelation { n, weights: w } => {
                Ok(FiniteGroupoid::full_relation(weights(*n, w)?))
            }
            GroupoidSpec::Units { n, weights: w } => {
                Ok(FiniteGroupoid::unit_groupoid(weights(*n, w)?))
            }
            GroupoidSpec::Relation { classes, weights: w } => {
                FiniteGroupoid::equivalence_relation(classes, weights(classes.len(), w)?)
            }
            GroupoidSpec::CyclicAction {
                order,
                generator,
                weights: w,
            } => {
                if *order == 0 {
                    return Err(GroupoidError::Invalid("order must be positive".into()));
                }
                let n = generator.len();
                let mut perms = vec![(0..n).collect::<Vec<usize>>()];
                for k in 1..*order {
                    let prev: &Vec<usize> = &perms[k - 1];
                    let next = prev
                        .iter()
                        .map(|&x| generator.get(x).copied().unwrap_or(usize::MAX))
                        .collect();
                    perms.push(next);
                }
                action_groupoid(&FiniteGroup::cyclic(*order), &perms, weights(n, w)?)
            }
            GroupoidSpec::Sum { factors } => {
                let built = factors.iter().map(|f| f.build()).collect::<Result<Vec<_>, _>>()?;
                direct_sum(built.iter())
            }
            GroupoidSpec::Wreath { lamp, base } => {
                Ok(wreath_default(&lamp.build()?, &base.build()?)?.into_groupoid())
            }
            GroupoidSpec::Semidirect { base, fiber } => {
                let base = base.build()?;
                let bundle = GroupoidBundle::constant(&base, &fiber.build()?);
                Ok(semidirect(&base, bundle)?.into_groupoid())
            }
            GroupoidSpec::Restrict { source, objects } => source.build()?.restrict(objects),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let g = FiniteGroupoid::equivalence_relation(&[0, 0, 1], uniform_weights(3)).unwrap();
        let text = serde_json::to_string(&g.to_json()).unwrap();
        let back: GroupoidJson = serde_json::from_str(&text).unwrap();
        assert_eq!(FiniteGroupoid::from_json(&back).unwrap(), g);
    }

    #[test]
    fn spec_constructions() {
        let spec: GroupoidSpec = serde_json::from_str(
            r#"{"kind":"wreath","lamp":{"kind":"full-relation","n":2},"base":{"kind":"full-relation","n":2}}"#,
        )
        .unwrap();
        assert_eq!(spec.build().unwrap().num_morphisms(), 64);
        let swap: GroupoidSpec =
            serde_json::from_str(r#"{"kind":"cyclic-action","order":2,"generator":[1,0]}"#).unwrap();
        let g = swap.build().unwrap();
        assert!(g.validate().is_valid() && g.is_principal());
        let skew: GroupoidSpec = serde_json::from_str(
            r#"{"kind":"full-relation","n":3,"weights":["1/2","1/4","1/4"]}"#,
        )
        .unwrap();
        assert!(!skew.build().unwrap().validate().is_valid());
        let bad: GroupoidSpec =
            serde_json::from_str(r#"{"kind":"cyclic-action","order":3,"generator":[1,0]}"#).unwrap();
        assert!(bad.build().is_err());
    }
}
