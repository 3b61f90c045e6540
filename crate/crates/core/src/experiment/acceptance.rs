//! The acceptance suite: eleven criteria, each checked against an oracle
//! written here rather than reused from the code under test.
//!
//! Criteria are grouped by area (`lift`, `groupoid`, `cocycle`, `entropy`,
//! `determinism`); a filter selects by id or area. Mutation mode plants
//! faults in the index and tree cocycle criteria so that they must fail
//! with a witness.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::trials;
use crate::cocycle::{
    choice_functions, coset_choice_system, index_cocycle, index_cocycle_over_action, tree_cocycle,
    verify_cocycle, Cocycle, FiniteGroupL, Labeling, Orientation, TreeAction, DEFAULT_SEARCH_CAP,
};
use crate::group::{coset_defect, Element, FiniteGroup, FreeFactorSchema, Group, GroupSpec};
use crate::groupoid::{
    action_groupoid, direct_sum, iso_search, semidirect, uniform_weights, wreath_action_groupoid, wreath_default,
    wreath_iso_from_fiber_maps, FiniteGroupoid, GroupoidBundle, IsoOutcome, SemidirectProduct, DEFAULT_NODE_CAP,
};
use crate::lift::{lift, predicted_defect, FinitaryMap, LiftedMap, ScrambleSpec};
use crate::shift::hash::split_seed;
use crate::shift::{cylinder_frequency, shannon_entropy, shift_act, Alphabet, Configuration, DEFAULT_FAILURE_FRACTION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub area: &'static str,
}

pub const CRITERIA: [Criterion; 11] = [
    Criterion { id: 1, name: "lift-formula", area: "lift" },
    Criterion { id: 2, name: "defect-exactness", area: "lift" },
    Criterion { id: 3, name: "coset-defect", area: "lift" },
    Criterion { id: 4, name: "bijectivity-and-measure", area: "lift" },
    Criterion { id: 5, name: "groupoid-engine", area: "groupoid" },
    Criterion { id: 6, name: "independence-crossval", area: "groupoid" },
    Criterion { id: 7, name: "index-cocycle", area: "cocycle" },
    Criterion { id: 8, name: "tree-cocycle", area: "cocycle" },
    Criterion { id: 9, name: "cohomology-solver", area: "cocycle" },
    Criterion { id: 10, name: "entropy", area: "entropy" },
    Criterion { id: 11, name: "determinism", area: "determinism" },
];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AcceptanceOptions {
    /// A criterion id or an area; everything when `None`.
    pub filter: Option<String>,
    /// Plant faults in criteria 7 and 8.
    pub mutate: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub area: &'static str,
    pub pass: bool,
    pub checked: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    pub details: Value,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CriterionResult {
    /// One summary line: `[PASS] 3 coset-defect (lift): 96 checks in 0.01 s`.
    pub fn line(&self) -> String {
        let mut s = format!(
            "[{}] {:>2} {} ({}): {} checks in {:.2} s",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.area,
            self.checked,
            self.elapsed.as_secs_f64()
        );
        if let Some(w) = &self.witness {
            let _ = write!(s, "; witness {w}");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcceptanceReport {
    pub criteria: Vec<CriterionResult>,
    pub pass: bool,
}

impl AcceptanceReport {
    pub fn table(&self) -> String {
        self.criteria.iter().map(|c| c.line() + "\n").collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }
}

pub fn selected(filter: Option<&str>) -> Vec<Criterion> {
    CRITERIA
        .iter()
        .filter(|c| filter.is_none_or(|f| f == c.area || f == c.name || f.parse() == Ok(c.id)))
        .copied()
        .collect()
}

/// Partial outcome of a check: `(checks, first failure)`.
struct Tally {
    checked: u64,
    witness: Option<Value>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            checked: 0,
            witness: None,
        }
    }

    fn check(&mut self, ok: bool, witness: impl FnOnce() -> Value) {
        self.checked += 1;
        if !ok && self.witness.is_none() {
            self.witness = Some(witness());
        }
    }

    fn absorb(&mut self, other: Tally) {
        self.checked += other.checked;
        if self.witness.is_none() {
            self.witness = other.witness;
        }
    }
}

type Outcome = Result<(Tally, Value), String>;

pub fn run_criterion(id: u8, opts: &AcceptanceOptions) -> CriterionResult {
    let c = CRITERIA[(id - 1) as usize];
    let started = Instant::now();
    let outcome: Outcome = match id {
        1 => lift_formula(opts.seed),
        2 => defect_exactness(opts.seed),
        3 => coset_defect_check(),
        4 => bijectivity_and_measure(opts.seed),
        5 => groupoid_engine(),
        6 => independence_crossval(opts.seed),
        7 => index_cocycle_check(opts.mutate),
        8 => tree_cocycle_check(opts.seed, opts.mutate),
        9 => solver_check(opts.seed),
        10 => entropy_check(opts.seed),
        11 => determinism(opts, None),
        _ => unreachable!("criterion ids run from 1 to 11"),
    };
    finish(c, outcome, started)
}

fn finish(c: Criterion, outcome: Outcome, started: Instant) -> CriterionResult {
    let (pass, checked, witness, details) = match outcome {
        Ok((t, details)) => (t.witness.is_none() && t.checked > 0, t.checked, t.witness, details),
        Err(e) => (false, 0, Some(json!({ "error": e })), Value::Null),
    };
    CriterionResult {
        id: c.id,
        name: c.name,
        area: c.area,
        pass,
        checked,
        witness,
        details,
        elapsed: started.elapsed(),
    }
}

/// Runs the selected criteria in order. Determinism, when selected, reruns
/// criteria 1–10 on one and on eight threads and compares the JSON with
/// this run's when the whole suite was selected.
pub fn run(opts: &AcceptanceOptions) -> AcceptanceReport {
    let chosen = selected(opts.filter.as_deref());
    let mut results: Vec<CriterionResult> = chosen
        .iter()
        .filter(|c| c.id != 11)
        .map(|c| run_criterion(c.id, opts))
        .collect();
    if chosen.iter().any(|c| c.id == 11) {
        let reference = (results.len() == 10).then(|| suite_json(&results));
        let started = Instant::now();
        results.push(finish(CRITERIA[10], determinism(opts, reference.as_deref()), started));
    }
    let pass = !results.is_empty() && results.iter().all(|r| r.pass);
    AcceptanceReport { criteria: results, pass }
}

fn suite_json(results: &[CriterionResult]) -> String {
    serde_json::to_string(results).expect("reports serialize")
}

fn stream(seed: u64, criterion: u64, k: u64) -> u64 {
    split_seed(split_seed(seed, criterion), k)
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

const SEEDS: u64 = 100;
const DEFECT_DELTAS: [&str; 6] = ["a", "a^-1", "b", "b^-1", "ab", "ba^-1"];
const SCRAMBLE_WINDOW: [i64; 3] = [-1, 0, 1];
const SCRAMBLE_PERM: [usize; 8] = [3, 6, 0, 7, 1, 4, 2, 5];
const ODOMETER_CAP: usize = 64;

struct Setting {
    g: Group,
    schema: Arc<FreeFactorSchema>,
    alphabet: Arc<Alphabet>,
}

fn setting() -> Result<Setting, String> {
    let g = Group::new(GroupSpec::free_product_of_integers(&["a", "b"])).map_err(err)?;
    let schema = Arc::new(FreeFactorSchema::new(&g, 0).map_err(err)?);
    Ok(Setting {
        g,
        schema,
        alphabet: Arc::new(Alphabet::uniform(2)),
    })
}

/// Inner maps over `⟨a⟩` written directly on the row `z(j) = y_{σ a^j}`.
#[derive(Debug, Clone)]
enum Formula {
    Identity,
    Table(Vec<usize>),
    Odometer(usize),
    Scramble(Vec<i64>, Vec<usize>),
}

impl Formula {
    fn eval(&self, z: &dyn Fn(i64) -> usize, k: i64) -> Option<usize> {
        match self {
            Formula::Identity => Some(z(k)),
            Formula::Table(t) => Some(t[z(k)]),
            Formula::Odometer(cap) => {
                if k < 0 {
                    return Some(z(k));
                }
                let end = (0..*cap as i64 - 1).find(|&j| z(j) == 0)?;
                Some(if k <= end { 1 - z(k) } else { z(k) })
            }
            Formula::Scramble(window, perm) => {
                let Some(pos) = window.iter().position(|&w| w == k) else {
                    return Some(z(k));
                };
                let idx = window.iter().fold(0, |acc, &w| 2 * acc + z(w));
                Some((perm[idx] >> (window.len() - 1 - pos)) & 1)
            }
        }
    }

    fn build(&self, s: &Setting) -> Result<Arc<LiftedMap>, String> {
        use crate::group::CosetSchema;
        use crate::lift::{coordinatewise_lift, identity_map, odometer_map};
        let lam = s.schema.subgroup();
        let inner = match self {
            Formula::Identity => identity_map(lam, &s.alphabet),
            Formula::Table(t) => coordinatewise_lift(lam, &s.alphabet, &s.alphabet, t).map_err(err)?,
            Formula::Odometer(cap) => odometer_map(lam, &s.alphabet, "a", *cap).map_err(err)?,
            Formula::Scramble(window, perm) => ScrambleSpec {
                window: window.iter().map(|k| format!("a^{k}")).collect(),
                permutation: perm.clone(),
                swaps: vec![],
            }
            .build(lam, &s.alphabet)
            .map_err(err)?,
        };
        lift(s.schema.clone(), inner).map_err(err)
    }
}

fn formulas() -> Vec<Formula> {
    vec![
        Formula::Identity,
        Formula::Table(vec![1, 0]),
        Formula::Odometer(ODOMETER_CAP),
        Formula::Scramble(SCRAMBLE_WINDOW.to_vec(), SCRAMBLE_PERM.to_vec()),
    ]
}

/// `φ(y)_γ` from the lift formula: split `γ = σ a^k` at its last syllable
/// and read the inner map on the row of `y` through `σ`.
fn lift_oracle(g: &Group, f: &Formula, y: &Configuration, gamma: &Element) -> Option<usize> {
    let word = g.word_of(gamma);
    let (prefix, k) = match word.last() {
        Some(&(0, k)) => (&word[..word.len() - 1], k),
        _ => (&word[..], 0),
    };
    let z = |j: i64| {
        let mut w = prefix.to_vec();
        if j != 0 {
            w.push((0, j));
        }
        y.eval(&g.eval_word(&w)).expect("seeded points are total")
    };
    f.eval(&z, k)
}

fn lift_formula(seed: u64) -> Outcome {
    let s = setting()?;
    let ball = s.g.ball(5).map_err(err)?;
    let maps = formulas()
        .into_iter()
        .map(|f| Ok((f.build(&s)?, f)))
        .collect::<Result<Vec<_>, String>>()?;
    let tallies: Vec<Tally> = (0..SEEDS)
        .into_par_iter()
        .map(|k| {
            let y = Configuration::seeded(&s.g, &s.alphabet, stream(seed, 1, k));
            let mut t = Tally::new();
            for (map, f) in &maps {
                for c in &ball {
                    let got = map.eval(&y, c).ok();
                    let want = lift_oracle(&s.g, f, &y, c);
                    t.check(got == want, || {
                        json!({ "map": map.describe(), "seed": k, "coordinate": s.g.format(c), "lifted": got, "oracle": want })
                    });
                }
            }
            t
        })
        .collect();
    let mut total = Tally::new();
    tallies.into_iter().for_each(|t| total.absorb(t));
    Ok((total, json!({ "maps": maps.len(), "seeds": SEEDS, "ball": ball.len() })))
}

fn defect_exactness(seed: u64) -> Outcome {
    let s = setting()?;
    let map = Formula::Odometer(ODOMETER_CAP).build(&s)?;
    let ball = s.g.ball(6).map_err(err)?;
    let in_ball: BTreeSet<&Element> = ball.iter().collect();
    let deltas = DEFECT_DELTAS
        .iter()
        .map(|d| s.g.parse(d).map_err(err))
        .collect::<Result<Vec<_>, _>>()?;
    let per_seed = (0..SEEDS)
        .into_par_iter()
        .map(|k| {
            let y = Configuration::seeded(&s.g, &s.alphabet, stream(seed, 2, k));
            let mut t = Tally::new();
            let mut nonempty = 0u64;
            for delta in &deltas {
                let dy = shift_act(delta, &y);
                let dinv = s.g.inv(delta);
                let mut observed = BTreeSet::new();
                for c in &ball {
                    let lhs = map.eval(&dy, c).map_err(err)?;
                    let rhs = map.eval(&y, &s.g.mul(&dinv, c)).map_err(err)?;
                    if lhs != rhs {
                        observed.insert(c.clone());
                    }
                }
                let predicted: BTreeSet<Element> = predicted_defect(&map, delta, &y)
                    .map_err(err)?
                    .into_iter()
                    .filter(|c| in_ball.contains(c))
                    .collect();
                nonempty += u64::from(!observed.is_empty());
                t.check(observed == predicted, || {
                    let fmt = |v: Vec<&Element>| v.into_iter().map(|c| s.g.format(c)).collect::<Vec<_>>();
                    json!({
                        "delta": s.g.format(delta),
                        "seed": k,
                        "unpredicted": fmt(observed.difference(&predicted).collect()),
                        "missing": fmt(predicted.difference(&observed).collect()),
                    })
                });
            }
            Ok((t, nonempty))
        })
        .collect::<Result<Vec<_>, String>>()?;
    let mut total = Tally::new();
    let mut nonempty = 0;
    for (t, n) in per_seed {
        total.absorb(t);
        nonempty += n;
    }
    Ok((
        total,
        json!({ "deltas": DEFECT_DELTAS, "seeds": SEEDS, "ball": ball.len(), "nonempty_defects": nonempty }),
    ))
}

fn coset_defect_check() -> Outcome {
    let s = setting()?;
    let g = &s.g;
    let (a, b) = (g.parse("a").map_err(err)?, g.parse("b").map_err(err)?);
    // S: the identity and words not ending in a power of a
    let in_s = |x: &Element| g.word_of(x).last().is_none_or(|&(gen, _)| gen != 0);
    let mut t = Tally::new();
    for r in 0..=6usize {
        let ball = g.ball(r).map_err(err)?;
        let brute = |gamma: &Element| -> BTreeSet<Element> {
            let ginv = g.inv(gamma);
            ball.iter().filter(|x| in_s(&g.mul(&ginv, x)) != in_s(x)).cloned().collect()
        };
        for k in (-5i64..=5).filter(|&k| k != 0) {
            let lambda = g.pow(&a, k);
            let mut expected = BTreeSet::from([g.identity()]);
            if k.unsigned_abs() as usize <= r {
                expected.insert(lambda.clone());
            }
            let got = coset_defect(s.schema.as_ref(), &lambda, r).map_err(err)?;
            let oracle = brute(&lambda);
            t.check(got == expected && oracle == expected, || {
                json!({ "lambda": g.format(&lambda), "radius": r, "got": got.iter().map(|x| g.format(x)).collect::<Vec<_>>() })
            });
        }
        for k in -6i64..=6 {
            let h = g.pow(&b, k);
            let got = coset_defect(s.schema.as_ref(), &h, r).map_err(err)?;
            t.check(got.is_empty() && brute(&h).is_empty(), || {
                json!({ "h": g.format(&h), "radius": r, "got": got.iter().map(|x| g.format(x)).collect::<Vec<_>>() })
            });
        }
    }
    Ok((t, json!({ "radii": 7, "lambdas": 10, "b_powers": 13 })))
}

const CYLINDER_WINDOWS: [&[&str]; 4] = [&["e"], &["e", "a"], &["e", "a", "a^2"], &["a^-1", "e", "b"]];
const CYLINDER_SAMPLES: u64 = 200_000;

fn bijectivity_and_measure(seed: u64) -> Outcome {
    let s = setting()?;
    let ball = s.g.ball(5).map_err(err)?;
    let maps = formulas()
        .into_iter()
        .skip(1)
        .map(|f| f.build(&s))
        .collect::<Result<Vec<_>, String>>()?;
    let tallies = (0..SEEDS)
        .into_par_iter()
        .map(|k| {
            let y = Configuration::seeded(&s.g, &s.alphabet, stream(seed, 4, k));
            let mut t = Tally::new();
            for map in &maps {
                let phi: Arc<dyn FinitaryMap> = map.clone();
                let image = Configuration::mapped(phi.clone(), &y).map_err(err)?;
                let back = Configuration::mapped(phi.inverse(), &image).map_err(err)?;
                for c in &ball {
                    let (u, v) = (back.eval(c).map_err(err)?, y.eval(c).map_err(err)?);
                    t.check(u == v, || json!({ "map": map.describe(), "seed": k, "coordinate": s.g.format(c) }));
                }
            }
            Ok(t)
        })
        .collect::<Result<Vec<_>, String>>()?;
    let mut total = Tally::new();
    tallies.into_iter().for_each(|t| total.absorb(t));
    let odometer: Arc<dyn FinitaryMap> = Formula::Odometer(ODOMETER_CAP).build(&s)?;
    let mut worst = 0.0f64;
    for (i, window) in CYLINDER_WINDOWS.iter().enumerate() {
        let w = window.iter().map(|x| s.g.parse(x).map_err(err)).collect::<Result<Vec<_>, _>>()?;
        let report = cylinder_frequency(
            &s.g,
            &s.alphabet,
            Some(&odometer),
            &w,
            CYLINDER_SAMPLES,
            stream(seed, 4, 1_000 + i as u64),
            DEFAULT_FAILURE_FRACTION,
        )
        .map_err(err)?;
        let n = (report.samples - report.failures) as f64;
        let p = 0.5f64.powi(w.len() as i32);
        let sigma = (p * (1.0 - p) / n).sqrt();
        total.check(report.cells.len() == 1 << w.len(), || json!({ "window": window, "cells": report.cells.len() }));
        for cell in &report.cells {
            let z = (cell.count as f64 / n - p).abs() / sigma;
            worst = worst.max(z);
            total.check(z <= 5.0, || json!({ "window": window, "pattern": cell.pattern, "z": z }));
        }
    }
    Ok((
        total,
        json!({ "maps": maps.len(), "seeds": SEEDS, "ball": ball.len(), "cylinder_samples": CYLINDER_SAMPLES, "max_z": format!("{worst:.3}") }),
    ))
}

fn full(n: usize) -> FiniteGroupoid {
    FiniteGroupoid::full_relation(uniform_weights(n))
}

fn swap() -> Result<FiniteGroupoid, String> {
    action_groupoid(&FiniteGroup::cyclic(2), &[vec![0, 1], vec![1, 0]], uniform_weights(2)).map_err(err)
}

/// Objects and morphisms of `K ≀ G` counted from fibre sizes: one copy of
/// `K^{W_x}` per object `x` and of `K^{W_{s(g)}}` per morphism `g`, with
/// `W_x` the arrows ending at `x`.
fn wreath_counts(k: &FiniteGroupoid, g: &FiniteGroupoid) -> (usize, usize) {
    let w = |x: usize| g.r_fiber(x).len() as u32;
    let objects = (0..g.num_objects()).map(|x| k.num_objects().pow(w(x))).sum();
    let morphisms = (0..g.num_morphisms()).map(|m| k.num_morphisms().pow(w(g.source(m)))).sum();
    (objects, morphisms)
}

/// Exhaustive check that the maps form a measure-preserving isomorphism.
fn isomorphism_failure(g1: &FiniteGroupoid, g2: &FiniteGroupoid, objects: &[usize], morphisms: &[usize]) -> Option<String> {
    let bijective = |m: &[usize], n: usize| m.len() == n && m.iter().collect::<BTreeSet<_>>().len() == n && m.iter().all(|&v| v < n);
    if !bijective(objects, g2.num_objects()) || !bijective(morphisms, g2.num_morphisms()) {
        return Some("not bijective".into());
    }
    if let Some(x) = (0..g1.num_objects()).find(|&x| g1.weight(x) != g2.weight(objects[x])) {
        return Some(format!("weight at object {x}"));
    }
    for m in 0..g1.num_morphisms() {
        let n = morphisms[m];
        if g2.source(n) != objects[g1.source(m)] || g2.range(n) != objects[g1.range(m)] {
            return Some(format!("endpoints of morphism {m}"));
        }
    }
    for a in 0..g1.num_morphisms() {
        for b in 0..g1.num_morphisms() {
            if g1.compose(a, b).map(|c| morphisms[c]) != g2.compose(morphisms[a], morphisms[b]) {
                return Some(format!("composition of {a} and {b}"));
            }
        }
    }
    None
}

fn groupoid_engine() -> Outcome {
    let mut t = Tally::new();
    let (full2, full3, swap) = (full(2), full(3), swap()?);
    let c2 = FiniteGroup::cyclic(2);
    let perms = [vec![0, 1], vec![1, 0]];
    let w_full: SemidirectProduct = wreath_default(&full2, &full2).map_err(err)?;
    let w_swap = wreath_default(&swap, &swap).map_err(err)?;
    let w_action = wreath_action_groupoid(&c2, &perms, &uniform_weights(2), &c2, &perms, &uniform_weights(2)).map_err(err)?;
    let constructions: Vec<(&str, FiniteGroupoid)> = vec![
        ("full-3", full3.clone()),
        ("relation", FiniteGroupoid::equivalence_relation(&[0, 0, 1], uniform_weights(3)).map_err(err)?),
        ("restrict", full3.restrict(&[0, 1]).map_err(err)?),
        ("sum", direct_sum([&full2, &swap]).map_err(err)?),
        (
            "semidirect",
            semidirect(&full2, GroupoidBundle::constant(&full2, &swap)).map_err(err)?.into_groupoid(),
        ),
        ("wreath-full", w_full.groupoid().clone()),
        ("wreath-swap", w_swap.groupoid().clone()),
        ("wreath-action", w_action.clone()),
    ];
    for (name, g) in &constructions {
        let report = g.validate();
        t.check(report.is_valid(), || json!({ "construction": name, "report": report }));
    }
    let sizes = (w_full.groupoid().num_objects(), w_full.groupoid().num_morphisms());
    t.check(sizes == (8, 64) && sizes == wreath_counts(&full2, &full2), || {
        json!({ "objects": sizes.0, "morphisms": sizes.1 })
    });
    let found = match iso_search(w_swap.groupoid(), &w_action, DEFAULT_NODE_CAP) {
        IsoOutcome::Isomorphic(iso) => isomorphism_failure(w_swap.groupoid(), &w_action, &iso.objects, &iso.morphisms),
        other => Some(format!("{other:?}")),
    };
    t.check(found.is_none(), || json!({ "action-wreath": found }));
    // swap the two lamp states over every base point
    let phi: Vec<Vec<usize>> = vec![vec![3, 2, 1, 0]; 2];
    let report = wreath_iso_from_fiber_maps(&w_full, &w_full, &phi, None).map_err(err)?;
    let wg = w_full.groupoid();
    let map = &report.morphism_map;
    let mut pairs = 0;
    let mut broken = None;
    for a in 0..wg.num_morphisms() {
        for b in 0..wg.num_morphisms() {
            if let Some(ab) = wg.compose(a, b) {
                pairs += 1;
                if wg.compose(map[a], map[b]) != Some(map[ab]) && broken.is_none() {
                    broken = Some((a, b));
                }
            }
        }
    }
    let bijective = map.iter().collect::<BTreeSet<_>>().len() == wg.num_morphisms();
    t.check(broken.is_none() && bijective && pairs == 512 && report.checked_pairs == 512, || {
        json!({ "broken_pair": broken, "pairs": pairs, "bijective": bijective })
    });
    Ok((t, json!({ "constructions": constructions.len(), "wreath_objects": sizes.0, "wreath_morphisms": sizes.1, "composable_pairs": pairs })))
}

fn independence_crossval(seed: u64) -> Outcome {
    let r = trials::indep_crossval(stream(seed, 6, 0), 500, 7).map_err(err)?;
    let mut t = Tally::new();
    t.checked = r.instances as u64;
    if let Some(m) = r.mismatches.first() {
        t.witness = Some(json!(m));
    }
    Ok((t, json!({ "instances": r.instances, "agreements": r.agreements, "independent": r.independent })))
}

/// `σ(y, x)` straight from `σ(y,x)(i) = j ⟺ [φ_i(x)]_S = [φ_j(y)]_S`.
fn sigma_oracle(phi: &dyn Fn(usize, usize) -> usize, s: &[usize], index: usize, y: usize, x: usize) -> Vec<usize> {
    (0..index)
        .map(|i| (0..index).find(|&j| s[phi(i, x)] == s[phi(j, y)]).expect("classes meet once"))
        .collect()
}

fn perm_of(c: &Cocycle, value: usize) -> Vec<usize> {
    let n = c.target().order();
    let degree = (1..=6).find(|&d| (1..=d).product::<usize>() == n).expect("symmetric target");
    FiniteGroup::symmetric(degree).1[value].clone()
}

fn index_cocycle_check(mutate: bool) -> Outcome {
    let mut t = Tally::new();
    let s_classes = [0, 0, 1, 1];
    let cs = choice_functions(&[0, 0, 0, 0], &s_classes).map_err(err)?;
    let mut c = index_cocycle(&cs).map_err(err)?;
    let g = c.domain().groupoid().clone();
    if mutate {
        // σ(2, 0) replaced by the identity
        let a = g.between(2, 0).next().ok_or("no arrow from 0 to 2")?;
        let mut values = c.values().to_vec();
        values[a] = c.target().group().identity();
        c = Cocycle::new(c.domain().clone(), c.target().clone(), values).map_err(err)?;
    }
    let report = verify_cocycle(&c);
    t.check(report.holds() && report.checked == 64, || json!({ "violation": report.violations.first(), "checked": report.checked }));
    let phi = |i: usize, x: usize| cs.phi(i, x);
    for a in 0..g.num_morphisms() {
        let (y, x) = (g.range(a), g.source(a));
        let want = sigma_oracle(&phi, &s_classes, cs.index(), y, x);
        let got = perm_of(&c, c.value(a));
        t.check(got == want, || json!({ "y": y, "x": x, "cocycle": got, "oracle": want }));
    }
    t.check(perm_of(&c, c.value(g.between(2, 0).next().ok_or("no arrow")?)) == vec![1, 0], || {
        json!({ "sigma(2,0)": "not the transposition" })
    });
    let cc = coset_choice_system(FiniteGroup::cyclic(4), &[0, 2]).map_err(err)?;
    let q = index_cocycle_over_action(&cc.system, &cc.action).map_err(err)?;
    let qr = verify_cocycle(&q);
    t.check(qr.holds(), || json!({ "quotient_violation": qr.violations.first() }));
    for gamma in 0..4usize {
        // ρ(γM)(δM) = δγ⁻¹M with cosets {0, 2} and {1, 3}
        let rho: Vec<usize> = (0..2).map(|d| (d + 4 - gamma) % 2).collect();
        for x in 0..4 {
            let got = perm_of(&q, q.at(gamma, x).ok_or("arrow")?);
            t.check(got == rho && cc.right_regular(gamma) == rho, || {
                json!({ "gamma": gamma, "x": x, "cocycle": got, "right_regular": rho })
            });
        }
    }
    Ok((t, json!({ "four_point_checks": report.checked, "quotient_checks": qr.checked })))
}

/// Vertices from `u` to `w` by climbing parents to the common ancestor.
fn tree_path(ta: &TreeAction, u: usize, w: usize) -> Vec<usize> {
    let (mut a, mut b) = (u, w);
    let (mut up, mut down) = (vec![a], vec![b]);
    let parent = |v: usize| ta.parent(v).expect("not the root");
    while ta.depth(a) > ta.depth(b) {
        a = parent(a);
        up.push(a);
    }
    while ta.depth(b) > ta.depth(a) {
        b = parent(b);
        down.push(b);
    }
    while a != b {
        a = parent(a);
        up.push(a);
        b = parent(b);
        down.push(b);
    }
    down.pop();
    up.extend(down.into_iter().rev());
    up
}

/// `x(e_n)⋯x(e_1)` along the path from the base to `γ⁻¹.v`, inverting
/// labels of edges crossed against `E⁺`.
fn tree_oracle(ta: &TreeAction, l: &FiniteGroupL, x: &Labeling, gamma: usize) -> Option<usize> {
    let g = l.group();
    let end = ta.act(ta.inv(gamma), ta.base())?;
    let mut acc = g.identity();
    for step in tree_path(ta, ta.base(), end).windows(2) {
        let edge = if ta.parent(step[1]) == Some(step[0]) { step[1] } else { step[0] };
        let (_, positive) = ta.edge_between(step[0], step[1])?;
        let label = x.get(edge)?;
        acc = g.mul(if positive { label } else { g.inv(label) }, acc);
    }
    Some(acc)
}

fn tree_cocycle_check(seed: u64, mutate: bool) -> Outcome {
    let f2 = Group::new(GroupSpec::free(&["a", "b"])).map_err(err)?;
    let ta = TreeAction::cayley(&f2, 5).map_err(err)?;
    let orientation = if mutate { Orientation::Forward } else { Orientation::Inverse };
    let targets = [("C2", FiniteGroupL::discrete(FiniteGroup::cyclic(2))), ("S3", trials::s3_class_metric())];
    let mut t = Tally::new();
    let mut details = Vec::new();
    for (k, (name, l)) in targets.iter().enumerate() {
        let trial = trials::tree_trial(&ta, l, name, 50, 4, orientation, (0, 1), stream(seed, 8, k as u64)).map_err(err)?;
        t.check(trial.identity.holds(), || json!({ "target": name, "violation": trial.identity.violations.first() }));
        t.checked += trial.identity.checked;
        t.check(trial.flips_failed == 0 && trial.flips_checked > 0, || json!({ "target": name, "flip": trial.first_flip_failure }));
        t.checked += trial.flips_checked as u64;
        for j in 0..5 {
            let x = Labeling::seeded(&ta, l, stream(seed, 8, 100 + j));
            for gamma in (0..ta.num_elements()).filter(|&g| ta.element_length(g) <= 4) {
                let got = tree_cocycle(&ta, l, &x, gamma).ok();
                let want = tree_oracle(&ta, l, &x, gamma);
                t.check(got.is_some() && got == want, || json!({ "target": name, "gamma": ta.element_name(gamma), "got": got, "oracle": want }));
            }
        }
        details.push(json!({
            "target": name,
            "identity_checks": trial.identity.checked,
            "flips": trial.flips_checked,
        }));
    }
    Ok((t, json!({ "orientation": orientation, "depth": 5, "max_len": 4, "labelings": 50, "targets": details })))
}

fn solver_check(seed: u64) -> Outcome {
    let s = trials::solver_trials(stream(seed, 9, 0), 200, 6, DEFAULT_SEARCH_CAP).map_err(err)?;
    let mut t = Tally::new();
    t.checked = (2 * s.instances + s.brute_force_compared) as u64;
    if let Some(f) = s.failures.first() {
        t.witness = Some(json!(f));
    } else if s.planted_recovered != s.instances || s.brute_force_agreements != s.brute_force_compared {
        t.witness = Some(json!({ "recovered": s.planted_recovered, "agreements": s.brute_force_agreements }));
    }
    Ok((
        t,
        json!({
            "instances": s.instances,
            "planted_recovered": s.planted_recovered,
            "mixed_found": s.mixed_found,
            "brute_force_compared": s.brute_force_compared,
            "brute_force_agreements": s.brute_force_agreements,
        }),
    ))
}

fn entropy_check(seed: u64) -> Outcome {
    let alphabet = Arc::new(Alphabet::uniform(2));
    let mut t = Tally::new();
    let exact = shannon_entropy(&alphabet);
    t.check(exact == std::f64::consts::LN_2, || json!({ "exact": exact }));
    let trial = trials::entropy_trial(&alphabet, 1_000_000, stream(seed, 10, 0)).map_err(err)?;
    t.check(trial.deviation <= 0.005, || json!({ "empirical": trial.empirical, "deviation": trial.deviation }));
    Ok((t, json!({ "exact": exact, "empirical": format!("{:.6}", trial.empirical), "samples": trial.samples })))
}

fn determinism(opts: &AcceptanceOptions, reference: Option<&str>) -> Outcome {
    let on_threads = |n: usize| -> Result<String, String> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(err)?;
        Ok(pool.install(|| suite_json(&(1..=10).map(|id| run_criterion(id, opts)).collect::<Vec<_>>())))
    };
    let (one, eight) = (on_threads(1)?, on_threads(8)?);
    let first_difference = |a: &str, b: &str| {
        let at = a.bytes().zip(b.bytes()).position(|(x, y)| x != y).unwrap_or(a.len().min(b.len()));
        json!({ "byte": at, "left": &a[at.saturating_sub(40).min(a.len())..(at + 40).min(a.len())] })
    };
    let mut t = Tally::new();
    t.check(one == eight, || first_difference(&one, &eight));
    if let Some(r) = reference {
        t.check(r == one, || first_difference(r, &one));
    }
    Ok((t, json!({ "bytes": one.len(), "runs": 2 + usize::from(reference.is_some()), "threads": [1, 8] })))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filters_select_by_area_name_and_id() {
        let ids = |f: &str| selected(Some(f)).iter().map(|c| c.id).collect::<Vec<_>>();
        assert_eq!(ids("groupoid"), vec![5, 6]);
        assert_eq!(ids("cocycle"), vec![7, 8, 9]);
        assert_eq!(ids("3"), vec![3]);
        assert_eq!(ids("entropy"), vec![10]);
        assert_eq!(selected(None).len(), 11);
        assert!(selected(Some("nothing")).is_empty());
    }

    #[test]
    fn odometer_formula_carries() {
        let f = Formula::Odometer(8);
        let bits = [1, 1, 0, 1];
        let z = |j: i64| if (0..4).contains(&j) { bits[j as usize] } else { 0 };
        let out: Vec<usize> = (0..4).map(|k| f.eval(&z, k).unwrap()).collect();
        assert_eq!(out, vec![0, 0, 1, 1]);
        let ones = |_: i64| 1;
        assert_eq!(f.eval(&ones, 0), None);
        assert_eq!(f.eval(&ones, -1), Some(1));
    }

    #[test]
    fn tree_path_goes_through_the_common_ancestor() {
        let f2 = Group::new(GroupSpec::free(&["a", "b"])).unwrap();
        let ta = TreeAction::cayley(&f2, 2).unwrap();
        let (a, b) = (ta.parse_element("a").unwrap(), ta.parse_element("b").unwrap());
        let (va, vb) = (ta.act(a, ta.base()).unwrap(), ta.act(b, ta.base()).unwrap());
        assert_eq!(tree_path(&ta, va, vb), vec![va, ta.base(), vb]);
        assert_eq!(tree_path(&ta, va, va), vec![va]);
    }

    #[test]
    fn quick_criteria_pass() {
        let opts = AcceptanceOptions::default();
        for id in [3, 5, 7] {
            let r = run_criterion(id, &opts);
            assert!(r.pass, "{}", r.line());
        }
    }

    #[test]
    fn mutation_is_caught() {
        let opts = AcceptanceOptions {
            mutate: true,
            ..Default::default()
        };
        let r = run_criterion(7, &opts);
        assert!(!r.pass);
        assert!(r.witness.is_some());
    }
}
