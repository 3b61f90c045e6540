//! Configured experiments. A JSON configuration names one kind of run with
//! its parameters; every run returns a [`RunReport`] whose results and
//! verdicts depend only on the configuration.

pub mod acceptance;
mod formats;
pub mod trials;

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cocycle::{CocycleError, Orientation, TreeAction, DEFAULT_SEARCH_CAP};
use crate::group::{FreeFactorSchema, Group, GroupError, GroupSpec};
use crate::groupoid::{iso_search, GroupoidError, GroupoidSpec, IsoOutcome, DEFAULT_NODE_CAP};
use crate::lift::{lift, FinitaryMap, LiftError};
use crate::shift::{cylinder_frequency, Alphabet, AlphabetSpec, ShiftError, DEFAULT_FAILURE_FRACTION};

pub use formats::{
    parse_list, ActionJson, CocycleJson, DomainJson, FiniteGroupJson, IndexJson, InnerSpec,
    LabelingJson, TargetJson, TreeCocycleJson, TreeJson,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VERDICT_FAILED: i32 = 1;
pub const EXIT_CONFIG_INVALID: i32 = 2;
pub const EXIT_COMPUTE_ERROR: i32 = 3;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("computation failed: {0}")]
    Compute(String),
}

impl ExperimentError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::ConfigInvalid(_) => EXIT_CONFIG_INVALID,
            ExperimentError::Compute(_) => EXIT_COMPUTE_ERROR,
        }
    }
}

macro_rules! compute_error {
    ($($t:ty),*) => {$(
        impl From<$t> for ExperimentError {
            fn from(e: $t) -> Self {
                ExperimentError::Compute(e.to_string())
            }
        }
    )*};
}
compute_error!(LiftError, GroupoidError, CocycleError, ShiftError, GroupError, std::io::Error);

pub fn invalid(e: impl std::fmt::Display) -> ExperimentError {
    ExperimentError::ConfigInvalid(e.to_string())
}

fn default_lift_group() -> GroupSpec {
    GroupSpec::free_product_of_integers(&["a", "b"])
}

fn default_deltas() -> Vec<String> {
    vec!["a".into(), "b".into()]
}

fn default_window() -> Vec<String> {
    vec!["e".into(), "a".into()]
}

fn default_pair() -> (usize, usize) {
    (0, 1)
}

fn default_tree_target() -> TargetJson {
    TargetJson::discrete(FiniteGroupJson::Symmetric { n: 3 })
}

fn seven() -> usize {
    7
}

fn six() -> usize {
    6
}

fn five() -> usize {
    5
}

fn default_cap() -> u64 {
    DEFAULT_SEARCH_CAP
}

fn default_tolerance() -> f64 {
    0.005
}

/// One kind of run with its own parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    /// Lift `inner` along a free factor and compare `φ(δ.y)` with `δ.φ(y)`
    /// on `Ball(radius)` for `samples` seeded points.
    LiftVerify {
        #[serde(default = "default_lift_group")]
        group: GroupSpec,
        #[serde(default)]
        subgroup_factor: usize,
        #[serde(default)]
        inner: InnerSpec,
        #[serde(default = "default_deltas")]
        deltas: Vec<String>,
        #[serde(default)]
        alphabet: Option<AlphabetSpec>,
    },
    /// Pattern frequencies on a window, through the lifted map when `inner`
    /// is given.
    Cylinder {
        #[serde(default = "default_lift_group")]
        group: GroupSpec,
        #[serde(default)]
        subgroup_factor: usize,
        #[serde(default)]
        inner: Option<InnerSpec>,
        #[serde(default = "default_window")]
        window: Vec<String>,
        #[serde(default)]
        alphabet: Option<AlphabetSpec>,
    },
    /// Build and validate a groupoid, optionally searching for an
    /// isomorphism to a second one.
    GroupoidBuild {
        groupoid: GroupoidSpec,
        #[serde(default)]
        compare: Option<GroupoidSpec>,
    },
    /// Word search against structure-graph acyclicity on `samples` random
    /// pairs of partitions.
    IndepCrossval {
        #[serde(default = "seven")]
        max_points: usize,
    },
    /// Plant-and-recover cohomology instances, checked against brute force
    /// where small.
    CocycleSolve {
        #[serde(default = "six")]
        max_points: usize,
        #[serde(default = "default_cap")]
        cap: u64,
    },
    /// The tree cocycle identity and edge flips on a truncated Cayley tree;
    /// `radius` bounds `|γ₁| + |γ₀|`.
    TreeCocycle {
        #[serde(default = "formats::default_free")]
        group: GroupSpec,
        #[serde(default = "five")]
        depth: usize,
        #[serde(default = "default_tree_target")]
        target: TargetJson,
        #[serde(default = "default_pair")]
        pair: (usize, usize),
        #[serde(default)]
        orientation: Orientation,
    },
    /// Exact and sampled entropy of an alphabet.
    Entropy {
        #[serde(default)]
        alphabet: Option<AlphabetSpec>,
        #[serde(default = "default_tolerance")]
        tolerance: f64,
    },
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::LiftVerify { .. } => "lift-verify",
            Experiment::Cylinder { .. } => "cylinder",
            Experiment::GroupoidBuild { .. } => "groupoid-build",
            Experiment::IndepCrossval { .. } => "indep-crossval",
            Experiment::CocycleSolve { .. } => "cocycle-solve",
            Experiment::TreeCocycle { .. } => "tree-cocycle",
            Experiment::Entropy { .. } => "entropy",
        }
    }

    fn default_radius(&self) -> usize {
        match self {
            Experiment::TreeCocycle { .. } => 4,
            _ => 5,
        }
    }

    fn default_samples(&self) -> u64 {
        match self {
            Experiment::LiftVerify { .. } => 10,
            Experiment::Cylinder { .. } => 20_000,
            Experiment::GroupoidBuild { .. } => 1,
            Experiment::IndepCrossval { .. } => 500,
            Experiment::CocycleSolve { .. } => 200,
            Experiment::TreeCocycle { .. } => 50,
            Experiment::Entropy { .. } => 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            seed: 0,
            radius: None,
            samples: None,
            out: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        serde_json::from_str(text).map_err(invalid)
    }

    pub fn radius(&self) -> usize {
        self.radius.unwrap_or_else(|| self.experiment.default_radius())
    }

    pub fn samples(&self) -> u64 {
        self.samples.unwrap_or_else(|| self.experiment.default_samples())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

impl Verdict {
    pub fn new(name: &str, pass: bool, witness: impl FnOnce() -> Value) -> Self {
        Verdict {
            name: name.into(),
            pass,
            witness: (!pass).then(witness),
        }
    }
}

/// Outcome of one run. Everything except `wall_time_ms` is a function of
/// the configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub config: Value,
    pub version: String,
    pub wall_time_ms: u64,
    pub results: Value,
    pub verdicts: Vec<Verdict>,
    pub pass: bool,
}

impl RunReport {
    pub fn new(config: Value, results: Value, verdicts: Vec<Verdict>, started: Instant) -> Self {
        RunReport {
            config,
            version: env!("CARGO_PKG_VERSION").into(),
            wall_time_ms: started.elapsed().as_millis() as u64,
            pass: verdicts.iter().all(|v| v.pass),
            results,
            verdicts,
        }
    }

    /// The reproducible part: results and verdicts.
    pub fn payload(&self) -> Value {
        json!({ "results": self.results, "verdicts": self.verdicts, "pass": self.pass })
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass {
            EXIT_PASS
        } else {
            EXIT_VERDICT_FAILED
        }
    }
}

fn alphabet_of(spec: &Option<AlphabetSpec>) -> Result<Arc<Alphabet>, ExperimentError> {
    match spec {
        None => Ok(Arc::new(Alphabet::uniform(2))),
        Some(s) => Ok(Arc::new(Alphabet::from_spec(s).map_err(invalid)?)),
    }
}

fn lifted_map(
    group: &GroupSpec,
    factor: usize,
    inner: &InnerSpec,
    alphabet: &Arc<Alphabet>,
) -> Result<(Group, Arc<dyn FinitaryMap>), ExperimentError> {
    let g = Group::new(group.clone()).map_err(invalid)?;
    let schema = Arc::new(FreeFactorSchema::new(&g, factor).map_err(invalid)?);
    let inner = inner.build(crate::group::CosetSchema::subgroup(schema.as_ref()), alphabet)?;
    let map = lift(schema, inner).map_err(invalid)?;
    Ok((g, map))
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

/// Validates the parameters, runs the experiment and collects verdicts.
pub fn run(config: &ExperimentConfig) -> Result<RunReport, ExperimentError> {
    let started = Instant::now();
    let (results, verdicts) = execute(config)?;
    Ok(RunReport::new(to_value(config), results, verdicts, started))
}

fn execute(config: &ExperimentConfig) -> Result<(Value, Vec<Verdict>), ExperimentError> {
    let (seed, radius, samples) = (config.seed, config.radius(), config.samples());
    match &config.experiment {
        Experiment::LiftVerify {
            group,
            subgroup_factor,
            inner,
            deltas,
            alphabet,
        } => {
            let alphabet = alphabet_of(alphabet)?;
            let (g, map) = lifted_map(group, *subgroup_factor, inner, &alphabet)?;
            let deltas = deltas
                .iter()
                .map(|d| g.parse(d).map_err(invalid))
                .collect::<Result<Vec<_>, _>>()?;
            let cases = trials::lift_cases(map.as_ref(), &deltas, radius, seed, samples)?;
            let mismatch = cases.iter().find(|c| c.matches == Some(false));
            let failure = cases.iter().find(|c| c.eval_failures > 0);
            let verdicts = vec![
                Verdict::new("defect-prediction", mismatch.is_none(), || to_value(mismatch)),
                Verdict::new("evaluation", failure.is_none(), || to_value(failure)),
            ];
            Ok((json!({ "map": map.describe(), "radius": radius, "cases": cases }), verdicts))
        }
        Experiment::Cylinder {
            group,
            subgroup_factor,
            inner,
            window,
            alphabet,
        } => {
            let alphabet = alphabet_of(alphabet)?;
            let (g, map) = match inner {
                Some(inner) => {
                    let (g, m) = lifted_map(group, *subgroup_factor, inner, &alphabet)?;
                    (g, Some(m))
                }
                None => (Group::new(group.clone()).map_err(invalid)?, None),
            };
            let window = window
                .iter()
                .map(|w| g.parse(w).map_err(invalid))
                .collect::<Result<Vec<_>, _>>()?;
            let report = cylinder_frequency(&g, &alphabet, map.as_ref(), &window, samples, seed, DEFAULT_FAILURE_FRACTION)?;
            let worst = report
                .cells
                .iter()
                .max_by(|a, b| {
                    let z = |c: &crate::shift::CylinderCell| (c.frequency - c.expected).abs() / c.sigma.max(f64::MIN_POSITIVE);
                    z(a).total_cmp(&z(b))
                })
                .cloned();
            let verdicts = vec![Verdict::new("within-5-sigma", report.all_within_5_sigma, || to_value(worst))];
            Ok((to_value(report), verdicts))
        }
        Experiment::GroupoidBuild { groupoid, compare } => {
            let g = groupoid.build().map_err(invalid)?;
            let report = g.validate();
            let mut results = json!({
                "objects": g.num_objects(),
                "morphisms": g.num_morphisms(),
                "principal": g.is_principal(),
                "orbits": g.orbit_classes().iter().collect::<std::collections::BTreeSet<_>>().len(),
                "validation": report,
                "groupoid": g.to_json(),
            });
            let mut verdicts = vec![Verdict::new("valid", report.is_valid(), || to_value(&report))];
            if let Some(other) = compare {
                let h = other.build().map_err(invalid)?;
                let outcome = iso_search(&g, &h, DEFAULT_NODE_CAP);
                verdicts.push(Verdict::new(
                    "isomorphic",
                    matches!(outcome, IsoOutcome::Isomorphic(_)),
                    || to_value(&outcome),
                ));
                results["isomorphism"] = to_value(outcome);
            }
            Ok((results, verdicts))
        }
        Experiment::IndepCrossval { max_points } => {
            if *max_points < 2 {
                return Err(invalid("max_points must be at least 2"));
            }
            let r = trials::indep_crossval(seed, samples as usize, *max_points)?;
            let verdicts = vec![Verdict::new("full-agreement", r.agreements == r.instances, || {
                to_value(r.mismatches.first())
            })];
            Ok((to_value(r), verdicts))
        }
        Experiment::CocycleSolve { max_points, cap } => {
            if *max_points == 0 {
                return Err(invalid("max_points must be positive"));
            }
            let s = trials::solver_trials(seed, samples as usize, *max_points, *cap)?;
            let verdicts = vec![
                Verdict::new("planted-recovered", s.planted_recovered == s.instances, || {
                    to_value(s.failures.iter().find(|c| c.planted))
                }),
                Verdict::new(
                    "brute-force-agreement",
                    s.brute_force_agreements == s.brute_force_compared,
                    || to_value(s.failures.first()),
                ),
            ];
            Ok((to_value(s), verdicts))
        }
        Experiment::TreeCocycle {
            group,
            depth,
            target,
            pair,
            orientation,
        } => {
            let g = Group::new(group.clone()).map_err(invalid)?;
            let ta = TreeAction::cayley(&g, *depth).map_err(invalid)?;
            let l = target.build()?;
            if pair.0 >= l.order() || pair.1 >= l.order() {
                return Err(invalid("label pair outside L"));
            }
            if radius > *depth {
                return Err(invalid("radius must stay below the tree depth"));
            }
            let name = format!("{:?}", target.group);
            let t = trials::tree_trial(&ta, &l, &name, samples as usize, radius, *orientation, *pair, seed)?;
            let verdicts = vec![
                Verdict::new("cocycle-identity", t.identity.holds(), || to_value(t.identity.violations.first())),
                Verdict::new("edge-flip", t.flips_failed == 0, || to_value(&t.first_flip_failure)),
            ];
            Ok((to_value(t), verdicts))
        }
        Experiment::Entropy { alphabet, tolerance } => {
            let alphabet = alphabet_of(alphabet)?;
            let t = trials::entropy_trial(&alphabet, samples as usize, seed)?;
            let verdicts = vec![Verdict::new("empirical-within-tolerance", t.deviation <= *tolerance, || {
                json!({ "deviation": t.deviation, "tolerance": tolerance })
            })];
            Ok((to_value(t), verdicts))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_fields_and_kinds_are_rejected() {
        let ok = r#"{"experiment": {"kind": "indep-crossval", "max_points": 4}, "seed": 3, "samples": 5}"#;
        assert!(ExperimentConfig::from_json(ok).is_ok());
        for bad in [
            r#"{"experiment": {"kind": "indep-crossval", "points": 4}}"#,
            r#"{"experiment": {"kind": "teleport"}}"#,
            r#"{"experiment": {"kind": "entropy"}, "colour": 1}"#,
        ] {
            assert_eq!(ExperimentConfig::from_json(bad).unwrap_err().exit_code(), EXIT_CONFIG_INVALID);
        }
    }

    #[test]
    fn identity_lift_passes() {
        let mut cfg = ExperimentConfig::new(Experiment::LiftVerify {
            group: default_lift_group(),
            subgroup_factor: 0,
            inner: InnerSpec::Identity,
            deltas: default_deltas(),
            alphabet: None,
        });
        cfg.samples = Some(2);
        cfg.radius = Some(3);
        let r = run(&cfg).unwrap();
        assert!(r.pass);
        assert_eq!(r.exit_code(), 0);
        assert_eq!(r.results["cases"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn odometer_lift_matches_prediction() {
        let text = r#"{"experiment": {"kind": "lift-verify", "inner": {"map": "odometer"}, "deltas": ["a", "ab"]},
                       "seed": 9, "radius": 4, "samples": 3}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let r = run(&cfg).unwrap();
        assert!(r.pass, "{:?}", r.verdicts);
        let again = run(&cfg).unwrap();
        assert_eq!(r.payload(), again.payload());
    }

    #[test]
    fn bad_parameters_are_config_errors() {
        let text = r#"{"experiment": {"kind": "lift-verify", "deltas": ["q"]}}"#;
        let err = run(&ExperimentConfig::from_json(text).unwrap()).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_CONFIG_INVALID);
    }

    #[test]
    fn groupoid_build_with_comparison() {
        let text = r#"{"experiment": {"kind": "groupoid-build",
            "groupoid": {"kind": "full-relation", "n": 2},
            "compare": {"kind": "cyclic-action", "order": 2, "generator": [1, 0]}}}"#;
        let r = run(&ExperimentConfig::from_json(text).unwrap()).unwrap();
        assert!(r.pass, "{:?}", r.verdicts);
        assert_eq!(r.results["morphisms"], 4);
    }

    #[test]
    fn failing_verdict_sets_exit_code() {
        let text = r#"{"experiment": {"kind": "tree-cocycle", "depth": 3, "orientation": "forward",
            "target": {"group": {"kind": "symmetric", "n": 3}}}, "radius": 2, "samples": 5, "seed": 1}"#;
        let r = run(&ExperimentConfig::from_json(text).unwrap()).unwrap();
        assert!(!r.pass);
        assert_eq!(r.exit_code(), EXIT_VERDICT_FAILED);
        assert!(r.verdicts[0].witness.is_some());
    }
}
