use mgtkit::experiment::acceptance::{run, AcceptanceOptions};

fn main() {
    let report = run(&AcceptanceOptions::default());
    for c in &report.criteria {
        println!("{}", c.line());
    }
    let failed: Vec<_> = report.criteria.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    println!(
        "acceptance: {}/{} criteria passed",
        report.criteria.len() - failed.len(),
        report.criteria.len()
    );
    if report.criteria.len() != 11 || !failed.is_empty() {
        eprintln!("failed: {failed:?}");
        std::process::exit(1);
    }
}
