//! The `mgtkit` command line. Every subcommand prints one JSON report, to
//! `--out` when given and to stdout otherwise.
//!
//! Exit codes: 0 when every verdict passes, 1 when one fails, 2 for an
//! invalid configuration and 3 for a computation error.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::cocycle::{
    choice_functions, coboundary, cohomologous_to_hom_search, coset_choice_system, edge_flip_sensitivity,
    index_cocycle, index_cocycle_over_action, tree_cocycle_with, verify_cocycle, verify_tree_cocycle,
    ChoiceSystem, Cocycle, HomSearch, Orientation, DEFAULT_SEARCH_CAP,
};
use crate::experiment::acceptance::{self, AcceptanceOptions};
use crate::experiment::{
    invalid, parse_list, run, CocycleJson, DomainJson, Experiment, ExperimentConfig, ExperimentError,
    FiniteGroupJson, IndexJson, InnerSpec, RunReport, TargetJson, TreeCocycleJson, Verdict, EXIT_PASS,
    EXIT_VERDICT_FAILED,
};
use crate::group::GroupSpec;
use crate::groupoid::{freely_independent, relation_subgroupoid, FiniteGroupoid, GroupoidSpec, StructureGraph};
use crate::shift::AlphabetSpec;

#[derive(Debug, Parser)]
#[command(name = "mgtkit", version, about = "Cofinitely equivariant lifts, finite measured groupoids and cocycles")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Experiment configuration (JSON); its kind must suit the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    radius: Option<usize>,
    #[arg(long, global = true)]
    samples: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lift a map over a free factor and check its defect prediction, or
    /// sample cylinder frequencies with `--window`.
    Lift(LiftArgs),
    /// Build, validate and compare finite groupoids.
    Groupoid(GroupoidArgs),
    /// Cocycle identities, coboundaries, cohomology search, index and tree cocycles.
    Cocycle(CocycleArgs),
    /// Exact and sampled Shannon entropy of a base measure.
    Entropy(EntropyArgs),
    /// Run the acceptance suite.
    Accept(AcceptArgs),
}

#[derive(Debug, Args)]
struct LiftArgs {
    /// `Z*Z`, `Z2*Z3`, `F2`, inline JSON or a JSON file.
    #[arg(long)]
    group: Option<String>,
    #[arg(long, default_value_t = 0)]
    subgroup_factor: usize,
    /// identity | bijection:<table> | odometer[:cap] | scramble:<file>
    #[arg(long, default_value = "identity")]
    inner: String,
    #[arg(long = "delta")]
    deltas: Vec<String>,
    /// Number of seeded configurations per shift.
    #[arg(long)]
    seeds: Option<u64>,
    /// Cylinder window as comma separated words.
    #[arg(long)]
    window: Option<String>,
    /// Symbol weights such as `1/3,2/3`.
    #[arg(long)]
    weights: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GroupoidVerb {
    Validate,
    Restrict,
    Sum,
    Semidirect,
    Wreath,
    Indep,
    Iso,
}

#[derive(Debug, Args)]
struct GroupoidArgs {
    /// Optional with `--config`.
    verb: Option<GroupoidVerb>,
    /// Groupoid specifications (inline JSON or files), in verb order.
    #[arg(long = "input")]
    inputs: Vec<String>,
    #[arg(long)]
    objects: Option<String>,
    /// Class labels of one subrelation; give twice for `indep`.
    #[arg(long = "classes")]
    classes: Vec<String>,
    #[arg(long)]
    max_len: Option<usize>,
    /// Largest point count of random `indep` instances.
    #[arg(long, default_value_t = 7)]
    max_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CocycleVerb {
    Verify,
    Coboundary,
    Solve,
    Index,
    Tree,
    Flip,
}

#[derive(Debug, Args)]
struct CocycleArgs {
    /// Optional with `--config`.
    verb: Option<CocycleVerb>,
    #[arg(long)]
    input: Option<String>,
    /// Gauge `f`, one element of L per point.
    #[arg(long)]
    f: Option<String>,
    #[arg(long, default_value_t = DEFAULT_SEARCH_CAP)]
    cap: u64,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    edge: Option<usize>,
    #[arg(long)]
    strict: bool,
    /// Labels swapped by `flip`.
    #[arg(long, default_value = "0,1")]
    pair: String,
    /// Largest point count of random `solve` instances.
    #[arg(long, default_value_t = 6)]
    max_points: usize,
}

#[derive(Debug, Args)]
struct EntropyArgs {
    #[arg(long, default_value = "0,1")]
    symbols: String,
    #[arg(long)]
    weights: Option<String>,
    #[arg(long, default_value_t = 0.005)]
    tolerance: f64,
}

#[derive(Debug, Args)]
struct AcceptArgs {
    /// Area, name or id of the criteria to run.
    #[arg(long)]
    filter: Option<String>,
    /// Corrupt the built-in examples; failures are expected.
    #[arg(long)]
    mutate: bool,
    /// Also write the summary table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Runs the command line and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { crate::experiment::EXIT_CONFIG_INVALID } else { EXIT_PASS };
        }
    };
    if let Some(n) = std::env::var("MGTKIT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mgtkit: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32, ExperimentError> {
    if let Command::Accept(a) = &cli.command {
        if cli.global.config.is_some() {
            return Err(invalid("accept takes no configuration"));
        }
        return accept(&cli.global, a);
    }
    let report = match &cli.global.config {
        Some(path) => {
            let mut config = ExperimentConfig::from_json(&read(path)?)?;
            check_kind(&cli.command, &config.experiment)?;
            let g = &cli.global;
            config.seed = g.seed.unwrap_or(config.seed);
            config.radius = g.radius.or(config.radius);
            config.samples = g.samples.or(config.samples);
            config.out = g.out.clone().or(config.out);
            let report = run(&config)?;
            return emit(&report, config.out.as_deref());
        }
        None => match &cli.command {
            Command::Lift(a) => run(&lift_config(&cli.global, a)?)?,
            Command::Groupoid(a) => groupoid(&cli.global, a)?,
            Command::Cocycle(a) => cocycle(&cli.global, a)?,
            Command::Entropy(a) => run(&entropy_config(&cli.global, a)?)?,
            Command::Accept(_) => unreachable!("handled above"),
        },
    };
    emit(&report, cli.global.out.as_deref())
}

fn check_kind(command: &Command, e: &Experiment) -> Result<(), ExperimentError> {
    let ok = match command {
        Command::Lift(_) => matches!(e, Experiment::LiftVerify { .. } | Experiment::Cylinder { .. }),
        Command::Groupoid(_) => matches!(e, Experiment::GroupoidBuild { .. } | Experiment::IndepCrossval { .. }),
        Command::Cocycle(_) => matches!(e, Experiment::CocycleSolve { .. } | Experiment::TreeCocycle { .. }),
        Command::Entropy(_) => matches!(e, Experiment::Entropy { .. }),
        Command::Accept(_) => false,
    };
    if ok {
        Ok(())
    } else {
        Err(invalid(format!("a {} configuration does not fit this subcommand", e.kind())))
    }
}

fn emit(report: &RunReport, out: Option<&Path>) -> Result<i32, ExperimentError> {
    write_json(report, out)?;
    Ok(report.exit_code())
}

fn write_json(value: &impl Serialize, out: Option<&Path>) -> Result<(), ExperimentError> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    match out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn read(path: &Path) -> Result<String, ExperimentError> {
    std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

/// Inline JSON when the argument starts with `{`, otherwise a file.
fn document<T: serde::de::DeserializeOwned>(arg: &str) -> Result<T, ExperimentError> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        read(Path::new(arg))?
    };
    serde_json::from_str(&text).map_err(|e| invalid(format!("{arg}: {e}")))
}

/// Group shorthand: free products of `Z`, `Zn` and `Fn` factors, labelled
/// `a`, `b`, … in order.
fn parse_group(s: &str) -> Result<GroupSpec, ExperimentError> {
    let t = s.trim();
    if t.starts_with('{') || Path::new(t).is_file() {
        return document(t);
    }
    let mut labels = (b'a'..=b'z').map(|c| (c as char).to_string());
    let mut factors = Vec::new();
    for f in t.split('*').map(str::trim) {
        let mut next = || labels.next().ok_or_else(|| invalid("too many generators"));
        let spec = match f.as_bytes().first() {
            Some(b'Z') if f.len() == 1 => GroupSpec::integers(&next()?),
            Some(b'Z') => GroupSpec::cyclic(f[1..].parse().map_err(|_| invalid(format!("bad factor {f:?}")))?, &next()?),
            Some(b'F') => {
                let rank: usize = f[1..].parse().map_err(|_| invalid(format!("bad factor {f:?}")))?;
                let ls = (0..rank).map(|_| next()).collect::<Result<Vec<_>, _>>()?;
                GroupSpec::free(&ls.iter().map(String::as_str).collect::<Vec<_>>())
            }
            _ => return Err(invalid(format!("bad factor {f:?}"))),
        };
        factors.push(spec);
    }
    Ok(if factors.len() == 1 { factors.pop().expect("one factor") } else { GroupSpec::free_product(factors) })
}

fn alphabet_spec(symbols: &[String], weights: Option<&str>) -> AlphabetSpec {
    AlphabetSpec {
        symbols: symbols.to_vec(),
        weights: weights.map_or_else(Vec::new, |w| w.split(',').map(|s| s.trim().to_string()).collect()),
        lamp: None,
    }
}

fn config_with(global: &Global, experiment: Experiment) -> ExperimentConfig {
    ExperimentConfig {
        experiment,
        seed: global.seed.unwrap_or(0),
        radius: global.radius,
        samples: global.samples,
        out: None,
    }
}

fn lift_config(global: &Global, a: &LiftArgs) -> Result<ExperimentConfig, ExperimentError> {
    let group = match &a.group {
        Some(s) => parse_group(s)?,
        None => GroupSpec::free_product_of_integers(&["a", "b"]),
    };
    let inner = InnerSpec::parse(&a.inner)?;
    let alphabet = match &a.weights {
        Some(w) => {
            let n = w.split(',').count();
            Some(alphabet_spec(&(0..n).map(|i| i.to_string()).collect::<Vec<_>>(), Some(w)))
        }
        None => None,
    };
    let experiment = match &a.window {
        Some(w) => Experiment::Cylinder {
            group,
            subgroup_factor: a.subgroup_factor,
            inner: Some(inner),
            window: w.split(',').map(|s| s.trim().to_string()).collect(),
            alphabet,
        },
        None => Experiment::LiftVerify {
            group,
            subgroup_factor: a.subgroup_factor,
            inner,
            deltas: if a.deltas.is_empty() { vec!["a".into(), "b".into()] } else { a.deltas.clone() },
            alphabet,
        },
    };
    let mut config = config_with(global, experiment);
    if a.window.is_none() {
        config.samples = a.seeds.or(global.samples);
    }
    Ok(config)
}

fn entropy_config(global: &Global, a: &EntropyArgs) -> Result<ExperimentConfig, ExperimentError> {
    let symbols: Vec<String> = a.symbols.split(',').map(|s| s.trim().to_string()).collect();
    Ok(config_with(
        global,
        Experiment::Entropy {
            alphabet: Some(alphabet_spec(&symbols, a.weights.as_deref())),
            tolerance: a.tolerance,
        },
    ))
}

fn inputs(a: &GroupoidArgs, n: usize) -> Result<Vec<GroupoidSpec>, ExperimentError> {
    if a.inputs.len() != n {
        return Err(invalid(format!("this verb takes {n} --input groupoid(s)")));
    }
    a.inputs.iter().map(|s| document(s)).collect()
}

fn groupoid(global: &Global, a: &GroupoidArgs) -> Result<RunReport, ExperimentError> {
    let build = |groupoid: GroupoidSpec, compare: Option<GroupoidSpec>| {
        run(&config_with(global, Experiment::GroupoidBuild { groupoid, compare }))
    };
    match a.verb.ok_or_else(|| invalid("groupoid needs a verb"))? {
        GroupoidVerb::Validate => build(inputs(a, 1)?.remove(0), None),
        GroupoidVerb::Restrict => {
            let objects = parse_list(a.objects.as_deref().ok_or_else(|| invalid("restrict needs --objects"))?)?;
            let source = Box::new(inputs(a, 1)?.remove(0));
            build(GroupoidSpec::Restrict { source, objects }, None)
        }
        GroupoidVerb::Sum => {
            if a.inputs.is_empty() {
                return Err(invalid("sum needs at least one --input"));
            }
            build(GroupoidSpec::Sum { factors: inputs(a, a.inputs.len())? }, None)
        }
        GroupoidVerb::Semidirect => {
            let mut v = inputs(a, 2)?;
            let (fiber, base) = (Box::new(v.pop().expect("two")), Box::new(v.pop().expect("two")));
            build(GroupoidSpec::Semidirect { base, fiber }, None)
        }
        GroupoidVerb::Wreath => {
            let mut v = inputs(a, 2)?;
            let (base, lamp) = (Box::new(v.pop().expect("two")), Box::new(v.pop().expect("two")));
            build(GroupoidSpec::Wreath { lamp, base }, None)
        }
        GroupoidVerb::Iso => {
            let mut v = inputs(a, 2)?;
            let other = v.pop().expect("two");
            build(v.pop().expect("two"), Some(other))
        }
        GroupoidVerb::Indep if a.classes.is_empty() => run(&config_with(
            global,
            Experiment::IndepCrossval { max_points: a.max_points },
        )),
        GroupoidVerb::Indep => independence(global, a),
    }
}

/// Two subrelations of the full relation, judged by word search and by
/// the structure graph.
fn independence(global: &Global, a: &GroupoidArgs) -> Result<RunReport, ExperimentError> {
    let started = Instant::now();
    if a.classes.len() != 2 {
        return Err(invalid("indep takes --classes twice"));
    }
    let (r0, r1) = (parse_list(&a.classes[0])?, parse_list(&a.classes[1])?);
    if r0.len() != r1.len() || r0.is_empty() {
        return Err(invalid("both relations must label the same nonempty point set"));
    }
    let n = r0.len();
    let max_len = a.max_len.unwrap_or(2 * n);
    let g = FiniteGroupoid::full_relation(crate::groupoid::uniform_weights(n));
    let search = freely_independent(&g, &[relation_subgroupoid(&r0), relation_subgroupoid(&r1)], max_len);
    let graph = StructureGraph::new(&r0, &r1)?;
    let acyclic = graph.is_acyclic();
    let verdicts = vec![Verdict::new("criteria-agree", search.is_independent() == acyclic, || {
        json!({ "search": search, "acyclic": acyclic })
    })];
    let config = json!({ "command": "groupoid indep", "classes": [r0, r1], "max_len": max_len, "seed": global.seed });
    let results = json!({ "search": search, "structure_graph": { "vertices": graph.vertices(), "edges": graph.edges, "acyclic": acyclic } });
    Ok(RunReport::new(config, results, verdicts, started))
}

fn cocycle_doc(a: &CocycleArgs) -> Result<CocycleJson, ExperimentError> {
    document(a.input.as_deref().ok_or_else(|| invalid("this verb needs --input"))?)
}

fn perms_of(c: &Cocycle, cs: &ChoiceSystem) -> Vec<Vec<usize>> {
    let perms = crate::group::FiniteGroup::symmetric(cs.index()).1;
    c.values().iter().map(|&v| perms[v].clone()).collect()
}

fn index_report(c: &Cocycle, cs: &ChoiceSystem) -> CocycleJson {
    let domain = match c.domain().action() {
        Some(act) => DomainJson::Action(crate::experiment::ActionJson {
            group: FiniteGroupJson::Table {
                table: (0..act.group().order())
                    .map(|a| (0..act.group().order()).map(|b| act.group().mul(a, b)).collect())
                    .collect(),
                names: vec![],
            },
            perms: act.perms().to_vec(),
        }),
        None => DomainJson::Groupoid(GroupoidSpec::Explicit(c.domain().groupoid().to_json())),
    };
    CocycleJson::of(c, domain, TargetJson::discrete(FiniteGroupJson::Symmetric { n: cs.index() }))
}

fn cocycle(global: &Global, a: &CocycleArgs) -> Result<RunReport, ExperimentError> {
    let started = Instant::now();
    let verb = a.verb.ok_or_else(|| invalid("cocycle needs a verb"))?;
    let echo = |doc: Value| json!({ "command": format!("cocycle {verb:?}").to_lowercase(), "input": doc, "seed": global.seed });
    let (config, results, verdicts) = match verb {
        CocycleVerb::Verify => {
            let doc = cocycle_doc(a)?;
            let report = verify_cocycle(&doc.build()?);
            let verdicts = vec![Verdict::new("cocycle-identity", report.holds(), || json!(report.violations.first()))];
            (echo(json!(doc)), json!(report), verdicts)
        }
        CocycleVerb::Coboundary => {
            let doc = cocycle_doc(a)?;
            let f = parse_list(a.f.as_deref().ok_or_else(|| invalid("coboundary needs --f"))?)?;
            let c1 = coboundary(&f, &doc.build()?).map_err(invalid)?;
            let report = verify_cocycle(&c1);
            let out = CocycleJson::of(&c1, doc.domain.clone(), doc.target.clone());
            let verdicts = vec![Verdict::new("cocycle-identity", report.holds(), || json!(report.violations.first()))];
            (echo(json!({ "cocycle": doc, "f": f })), json!({ "cocycle": out, "check": report }), verdicts)
        }
        CocycleVerb::Solve if a.input.is_none() => {
            let experiment = Experiment::CocycleSolve { max_points: a.max_points, cap: a.cap };
            return run(&config_with(global, experiment));
        }
        CocycleVerb::Solve => {
            let doc = cocycle_doc(a)?;
            let c = doc.build()?;
            let identity = verify_cocycle(&c);
            if !identity.holds() {
                return Err(invalid("the input is not a cocycle"));
            }
            let outcome = cohomologous_to_hom_search(&c, a.cap)?;
            let verdicts = vec![Verdict::new("search-complete", !matches!(outcome, HomSearch::Cap { .. }), || json!(outcome))];
            (echo(json!({ "cocycle": doc, "cap": a.cap })), json!(outcome), verdicts)
        }
        CocycleVerb::Index => {
            let doc: IndexJson = document(a.input.as_deref().ok_or_else(|| invalid("index needs --input"))?)?;
            let (c, cs, regular) = match &doc {
                IndexJson::Relations { r, s, phi } => {
                    let cs = match phi {
                        Some(phi) => ChoiceSystem::new(r, s, phi.clone()),
                        None => choice_functions(r, s),
                    }
                    .map_err(invalid)?;
                    (index_cocycle(&cs)?, cs, None)
                }
                IndexJson::Quotient { group, normal } => {
                    let cc = coset_choice_system(group.build()?, normal).map_err(invalid)?;
                    let c = index_cocycle_over_action(&cc.system, &cc.action)?;
                    let act = cc.action.clone();
                    let regular: Vec<bool> = (0..act.group().order())
                        .flat_map(|g| (0..act.num_points()).map(move |x| (g, x)))
                        .map(|(g, x)| {
                            let perms = crate::group::FiniteGroup::symmetric(cc.system.index()).1;
                            c.at(g, x).map(|v| perms[v].clone()) == Some(cc.right_regular(g))
                        })
                        .collect();
                    (c, cc.system, Some(regular.iter().all(|&b| b)))
                }
            };
            let report = verify_cocycle(&c);
            let mut verdicts = vec![Verdict::new("cocycle-identity", report.holds(), || json!(report.violations.first()))];
            if let Some(ok) = regular {
                verdicts.push(Verdict::new("right-regular", ok, || json!("σ(γ.x, x) differs from ρ(γM)")));
            }
            let results = json!({
                "index": cs.index(),
                "cocycle": index_report(&c, &cs),
                "permutations": perms_of(&c, &cs),
                "check": report,
            });
            (echo(json!(doc)), results, verdicts)
        }
        CocycleVerb::Tree if a.input.is_none() => {
            let experiment = Experiment::TreeCocycle {
                group: GroupSpec::free(&["a", "b"]),
                depth: 5,
                target: TargetJson::discrete(FiniteGroupJson::Symmetric { n: 3 }),
                pair: (0, 1),
                orientation: Default::default(),
            };
            return run(&config_with(global, experiment));
        }
        CocycleVerb::Tree | CocycleVerb::Flip => {
            let doc: TreeCocycleJson = document(a.input.as_deref().expect("checked"))?;
            let ta = doc.tree.build()?;
            let l = doc.target.build()?;
            let labelings = doc.labelings.iter().map(|x| x.build(&ta, &l)).collect::<Result<Vec<_>, _>>()?;
            let mut gammas = doc.gammas.iter().map(|s| TreeCocycleJson::element(&ta, s)).collect::<Result<Vec<_>, _>>()?;
            if verb == CocycleVerb::Tree {
                let report = verify_tree_cocycle(&ta, &l, &labelings, doc.max_len, doc.orientation)?;
                let values = gammas
                    .iter()
                    .map(|&g| {
                        let vals = labelings
                            .iter()
                            .map(|x| tree_cocycle_with(&ta, &l, x, g, doc.orientation).map(|v| l.group().name(v).to_string()))
                            .collect::<Result<Vec<_>, _>>()?;
                        Ok(json!({ "gamma": ta.element_name(g), "values": vals }))
                    })
                    .collect::<Result<Vec<_>, crate::cocycle::CocycleError>>()?;
                let verdicts = vec![Verdict::new("cocycle-identity", report.holds(), || json!(report.violations.first()))];
                (echo(json!(doc)), json!({ "check": report, "values": values }), verdicts)
            } else {
                if let Some(g) = &a.gamma {
                    gammas = vec![TreeCocycleJson::element(&ta, g)?];
                }
                let pair = parse_list(&a.pair)?;
                if pair.len() != 2 {
                    return Err(invalid("--pair takes two labels"));
                }
                let mut flips = Vec::new();
                for &g in &gammas {
                    // without --edge, every edge on the geodesic
                    let edges = match a.edge {
                        Some(e) => vec![e],
                        None => ta.geodesic_edges(ta.base(), ta.endpoint(g, Orientation::Inverse)?),
                    };
                    for x in &labelings {
                        for &e in &edges {
                            flips.push(edge_flip_sensitivity(&ta, &l, x, g, e, (pair[0], pair[1]), a.strict)?);
                        }
                    }
                }
                let failed = flips.iter().find(|f| !f.holds());
                let verdicts = vec![Verdict::new("edge-flip", failed.is_none(), || json!(failed))];
                let config = json!({ "input": doc, "gammas": gammas.iter().map(|&g| ta.element_name(g)).collect::<Vec<_>>(), "edge": a.edge, "pair": pair, "strict": a.strict });
                (echo(config), json!({ "flips": flips }), verdicts)
            }
        }
    };
    Ok(RunReport::new(config, results, verdicts, started))
}

fn accept(global: &Global, a: &AcceptArgs) -> Result<i32, ExperimentError> {
    let opts = AcceptanceOptions {
        filter: a.filter.clone(),
        mutate: a.mutate,
        seed: global.seed.unwrap_or(0),
    };
    let report = acceptance::run(&opts);
    eprint!("{}", report.table());
    if let Some(path) = &a.csv {
        let mut csv = String::from("id,name,area,pass,checked\n");
        for c in &report.criteria {
            csv.push_str(&format!("{},{},{},{},{}\n", c.id, c.name, c.area, c.pass, c.checked));
        }
        std::fs::write(path, csv)?;
    }
    write_json(&report, global.out.as_deref())?;
    Ok(if report.pass { EXIT_PASS } else { EXIT_VERDICT_FAILED })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_shorthand() {
        assert_eq!(parse_group("Z*Z").unwrap(), GroupSpec::free_product_of_integers(&["a", "b"]));
        assert_eq!(parse_group("F2").unwrap(), GroupSpec::free(&["a", "b"]));
        assert_eq!(
            parse_group("Z2*Z3").unwrap(),
            GroupSpec::free_product(vec![GroupSpec::cyclic(2, "a"), GroupSpec::cyclic(3, "b")])
        );
        assert!(parse_group("Q8").is_err());
    }

    #[test]
    fn kinds_must_fit_the_subcommand() {
        let cli = Cli::try_parse_from(["mgtkit", "entropy"]).unwrap();
        assert!(check_kind(&cli.command, &Experiment::Entropy { alphabet: None, tolerance: 0.01 }).is_ok());
        assert!(check_kind(&cli.command, &Experiment::IndepCrossval { max_points: 3 }).is_err());
    }

    #[test]
    fn lift_flags_become_a_configuration() {
        let cli = Cli::try_parse_from(["mgtkit", "lift", "--inner", "odometer:16", "--delta", "b", "--seeds", "3", "--seed", "9"]).unwrap();
        let Command::Lift(a) = &cli.command else { panic!() };
        let config = lift_config(&cli.global, a).unwrap();
        assert_eq!(config.seed, 9);
        assert_eq!(config.samples(), 3);
        assert_eq!(config.experiment.kind(), "lift-verify");
    }

    #[test]
    fn bad_arguments_exit_2() {
        assert_eq!(main_with(["mgtkit", "lift", "--inner", "rotate"]), 2);
        assert_eq!(main_with(["mgtkit", "groupoid", "nonsense"]), 2);
    }
}
