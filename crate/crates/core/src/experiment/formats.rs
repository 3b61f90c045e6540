//! JSON documents read by the runner and the command line.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::cocycle::{Cocycle, Domain, FiniteGroupL, GroupAction, Labeling, TreeAction};
use crate::group::{FiniteGroup, Group, GroupSpec};
use crate::groupoid::GroupoidSpec;
use crate::lift::{coordinatewise_lift, identity_map, odometer_map, FinitaryMap, ScrambleSpec};
use crate::shift::Alphabet;

fn invalid(e: impl std::fmt::Display) -> ExperimentError {
    ExperimentError::ConfigInvalid(e.to_string())
}

/// The map over the subgroup that gets lifted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "map", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InnerSpec {
    #[default]
    Identity,
    /// Apply a symbol permutation at every coordinate.
    Bijection { table: Vec<usize> },
    /// Binary adding machine along the subgroup generator.
    Odometer {
        #[serde(default = "default_odometer_cap")]
        cap: usize,
    },
    /// Pattern permutation on one window of subgroup words.
    Scramble {
        window: Vec<String>,
        #[serde(default)]
        permutation: Vec<usize>,
        #[serde(default)]
        swaps: Vec<(Vec<usize>, Vec<usize>)>,
    },
}

fn default_odometer_cap() -> usize {
    crate::lift::DEFAULT_WINDOW_CAP
}

impl InnerSpec {
    /// Parses `identity`, `bijection:1,0`, `odometer`, `odometer:<cap>` or
    /// `scramble:<file>`.
    pub fn parse(s: &str) -> Result<Self, ExperimentError> {
        let (head, arg) = s.split_once(':').map_or((s, None), |(h, a)| (h, Some(a)));
        match (head, arg) {
            ("identity", None) => Ok(InnerSpec::Identity),
            ("bijection", Some(a)) => Ok(InnerSpec::Bijection {
                table: parse_list(a)?,
            }),
            ("odometer", None) => Ok(InnerSpec::Odometer {
                cap: default_odometer_cap(),
            }),
            ("odometer", Some(a)) => Ok(InnerSpec::Odometer {
                cap: a.trim().parse().map_err(invalid)?,
            }),
            ("scramble", Some(path)) => {
                let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{path}: {e}")))?;
                let spec: ScrambleSpec = serde_json::from_str(&text).map_err(invalid)?;
                Ok(InnerSpec::Scramble {
                    window: spec.window,
                    permutation: spec.permutation,
                    swaps: spec.swaps,
                })
            }
            _ => Err(invalid(format!("unknown inner map {s:?}"))),
        }
    }

    pub fn build(&self, group: &Group, alphabet: &Arc<Alphabet>) -> Result<Arc<dyn FinitaryMap>, ExperimentError> {
        match self {
            InnerSpec::Identity => Ok(identity_map(group, alphabet)),
            InnerSpec::Bijection { table } => coordinatewise_lift(group, alphabet, alphabet, table).map_err(invalid),
            InnerSpec::Odometer { cap } => {
                let label = group
                    .generators()
                    .first()
                    .map(|g| g.label.clone())
                    .ok_or_else(|| invalid("the odometer needs a generator"))?;
                odometer_map(group, alphabet, &label, *cap).map_err(invalid)
            }
            InnerSpec::Scramble {
                window,
                permutation,
                swaps,
            } => ScrambleSpec {
                window: window.clone(),
                permutation: permutation.clone(),
                swaps: swaps.clone(),
            }
            .build(group, alphabet)
            .map_err(invalid),
        }
    }
}

/// Comma separated unsigned integers.
pub fn parse_list(s: &str) -> Result<Vec<usize>, ExperimentError> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse().map_err(|_| invalid(format!("bad number {t:?}"))))
        .collect()
}

/// A finite group given by name or by table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FiniteGroupJson {
    Cyclic { n: usize },
    /// Permutations of `0..n` in lexicographic order, composed right to left.
    Symmetric { n: usize },
    Table {
        table: Vec<Vec<usize>>,
        #[serde(default)]
        names: Vec<String>,
    },
    /// Any finite group specification, enumerated in canonical order.
    Spec { spec: GroupSpec },
}

impl FiniteGroupJson {
    pub fn build(&self) -> Result<FiniteGroup, ExperimentError> {
        match self {
            FiniteGroupJson::Cyclic { n } if *n > 0 => Ok(FiniteGroup::cyclic(*n)),
            FiniteGroupJson::Symmetric { n } if (1..=6).contains(n) => Ok(FiniteGroup::symmetric(*n).0),
            FiniteGroupJson::Table { table, names } => {
                let names = if names.is_empty() {
                    (0..table.len()).map(|i| i.to_string()).collect()
                } else {
                    names.clone()
                };
                FiniteGroup::from_table(table.clone(), names).map_err(invalid)
            }
            FiniteGroupJson::Spec { spec } => {
                let g = Group::new(spec.clone()).map_err(invalid)?;
                Ok(FiniteGroup::from_group(&g).map_err(invalid)?.0)
            }
            other => Err(invalid(format!("unsupported group {other:?}"))),
        }
    }
}

/// A target group with an optional class-function metric `w(g) = d(e, g)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetJson {
    pub group: FiniteGroupJson,
    #[serde(default)]
    pub metric: Option<Vec<String>>,
}

impl TargetJson {
    pub fn discrete(group: FiniteGroupJson) -> Self {
        TargetJson { group, metric: None }
    }

    pub fn build(&self) -> Result<FiniteGroupL, ExperimentError> {
        let g = self.group.build()?;
        match &self.metric {
            None => Ok(FiniteGroupL::discrete(g)),
            Some(w) => {
                let w = w
                    .iter()
                    .map(|s| s.trim().parse::<num_rational::BigRational>().map_err(|_| invalid(format!("bad weight {s:?}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                FiniteGroupL::with_class_metric(g, w).map_err(invalid)
            }
        }
    }
}

/// A finite action by one permutation per group element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionJson {
    pub group: FiniteGroupJson,
    pub perms: Vec<Vec<usize>>,
}

impl ActionJson {
    pub fn build(&self) -> Result<GroupAction, ExperimentError> {
        GroupAction::new(self.group.build()?, self.perms.clone()).map_err(invalid)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainJson {
    Action(ActionJson),
    Groupoid(GroupoidSpec),
}

/// A cocycle table. Over an action the value of `(γ, x)` sits at index
/// `γ·|X| + x`; over a groupoid values are indexed by morphism.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleJson {
    pub domain: DomainJson,
    pub target: TargetJson,
    pub values: Vec<usize>,
}

impl CocycleJson {
    pub fn build(&self) -> Result<Cocycle, ExperimentError> {
        let domain = match &self.domain {
            DomainJson::Action(a) => Domain::Action(a.build()?),
            DomainJson::Groupoid(g) => Domain::Groupoid(g.build().map_err(invalid)?),
        };
        Cocycle::new(domain, self.target.build()?, self.values.clone()).map_err(invalid)
    }

    /// The document for `c`, with the given domain and target descriptions.
    pub fn of(c: &Cocycle, domain: DomainJson, target: TargetJson) -> Self {
        CocycleJson {
            domain,
            target,
            values: c.values().to_vec(),
        }
    }
}

/// A tree with a group acting on it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum TreeJson {
    /// The Cayley tree of a free group, truncated at `depth`.
    Cayley {
        #[serde(default = "default_free")]
        group: GroupSpec,
        depth: usize,
    },
    /// A finite tree as a parent array, with `E⁺` orientation flags, a base
    /// vertex and generating automorphisms as vertex permutations.
    Parents {
        parent: Vec<Option<usize>>,
        down: Vec<bool>,
        base: usize,
        generators: Vec<Vec<usize>>,
    },
}

pub(crate) fn default_free() -> GroupSpec {
    GroupSpec::free(&["a", "b"])
}

impl TreeJson {
    pub fn build(&self) -> Result<TreeAction, ExperimentError> {
        match self {
            TreeJson::Cayley { group, depth } => {
                let g = Group::new(group.clone()).map_err(invalid)?;
                TreeAction::cayley(&g, *depth).map_err(invalid)
            }
            TreeJson::Parents {
                parent,
                down,
                base,
                generators,
            } => TreeAction::from_parents(parent.clone(), down.clone(), *base, generators).map_err(invalid),
        }
    }
}

/// Edge labels: explicit (indexed by child vertex, root slot ignored) or
/// seeded; seeded labels are drawn from `pair` when it is given.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum LabelingJson {
    Explicit(Vec<usize>),
    Seeded {
        seed: u64,
        #[serde(default)]
        pair: Option<(usize, usize)>,
    },
}

impl LabelingJson {
    pub fn build(&self, ta: &TreeAction, l: &FiniteGroupL) -> Result<Labeling, ExperimentError> {
        match self {
            LabelingJson::Explicit(v) => {
                if v.len() != ta.num_vertices() || v.iter().any(|&s| s >= l.order()) {
                    return Err(invalid("one label in L per vertex"));
                }
                Ok(Labeling::new(v.clone()))
            }
            LabelingJson::Seeded { seed, pair: None } => Ok(Labeling::seeded(ta, l, *seed)),
            LabelingJson::Seeded { seed, pair: Some(p) } => {
                if p.0 >= l.order() || p.1 >= l.order() {
                    return Err(invalid("label pair outside L"));
                }
                Ok(Labeling::seeded_pair(ta, *p, *seed))
            }
        }
    }
}

/// Input of the tree verbs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeCocycleJson {
    pub tree: TreeJson,
    pub target: TargetJson,
    pub labelings: Vec<LabelingJson>,
    /// Elements to evaluate, as words (Cayley trees) or indices.
    #[serde(default)]
    pub gammas: Vec<String>,
    #[serde(default = "default_max_len")]
    pub max_len: usize,
    #[serde(default)]
    pub orientation: crate::cocycle::Orientation,
}

fn default_max_len() -> usize {
    4
}

impl TreeCocycleJson {
    /// Resolves a word, or a decimal index into the acting group.
    pub fn element(ta: &TreeAction, s: &str) -> Result<usize, ExperimentError> {
        match s.parse::<usize>() {
            Ok(i) if i < ta.num_elements() => Ok(i),
            Ok(i) => Err(invalid(format!("element {i} out of range"))),
            Err(_) => ta.parse_element(s).map_err(invalid),
        }
    }
}

/// Input of the index verb: either two partitions, or a normal subgroup of
/// a group acting on itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum IndexJson {
    Relations {
        r: Vec<usize>,
        s: Vec<usize>,
        #[serde(default)]
        phi: Option<Vec<Vec<usize>>>,
    },
    Quotient {
        group: FiniteGroupJson,
        normal: Vec<usize>,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inner_strings() {
        assert_eq!(InnerSpec::parse("identity").unwrap(), InnerSpec::Identity);
        assert_eq!(
            InnerSpec::parse("bijection:1,0").unwrap(),
            InnerSpec::Bijection { table: vec![1, 0] }
        );
        assert_eq!(InnerSpec::parse("odometer:8").unwrap(), InnerSpec::Odometer { cap: 8 });
        assert!(InnerSpec::parse("rotate").is_err());
    }

    #[test]
    fn cocycle_document_round_trip() {
        let text = r#"{
            "domain": {"action": {"group": {"kind": "cyclic", "n": 2}, "perms": [[0, 1], [1, 0]]}},
            "target": {"group": {"kind": "cyclic", "n": 2}},
            "values": [0, 0, 1, 1]
        }"#;
        let doc: CocycleJson = serde_json::from_str(text).unwrap();
        let c = doc.build().unwrap();
        assert_eq!(c.at(1, 0), Some(1));
        let back = serde_json::to_string(&doc).unwrap();
        assert_eq!(serde_json::from_str::<CocycleJson>(&back).unwrap(), doc);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"group": {"kind": "cyclic", "n": 2, "extra": 1}}"#;
        assert!(serde_json::from_str::<TargetJson>(text).is_err());
    }

    #[test]
    fn s3_metric_from_strings() {
        let t = TargetJson {
            group: FiniteGroupJson::Symmetric { n: 3 },
            metric: Some(["0", "1/2", "1/2", "1", "1", "1/2"].map(String::from).to_vec()),
        };
        // lexicographic S₃: e, three transpositions at 1, 2, 5, 3-cycles at 3, 4
        let l = t.build().unwrap();
        assert_eq!(l.distance(1, 2).to_string(), "1");
        assert_eq!(l.distance(0, 5).to_string(), "1/2");
    }
}
