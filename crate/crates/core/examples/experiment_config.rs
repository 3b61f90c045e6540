// Runs a configured experiment twice and compares the reproducible part
// of the reports.

use mgtkit::experiment::{run, ExperimentConfig};

const CONFIG: &str = r#"{
  "experiment": {
    "kind": "lift-verify",
    "inner": { "map": "odometer" },
    "deltas": ["a", "b", "ab"]
  },
  "seed": 11,
  "radius": 4,
  "samples": 3
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = ExperimentConfig::from_json(CONFIG)?;
    let first = run(&config)?;
    let second = run(&config)?;
    for v in &first.verdicts {
        println!("{}: {}", v.name, if v.pass { "pass" } else { "fail" });
    }
    println!("payload identical across runs: {}", first.payload() == second.payload());
    println!("{}", serde_json::to_string_pretty(&first.results["cases"][0])?);
    Ok(())
}
