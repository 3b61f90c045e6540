use mgtkit::experiment::acceptance::{run, AcceptanceOptions};

fn main() -> Result<(), String> {
    let report = run(&AcceptanceOptions {
        filter: Some("groupoid".into()),
        ..Default::default()
    });
    print!("{}", report.table());
    if report.pass {
        Ok(())
    } else {
        Err("groupoid criteria failed".into())
    }
}
