use std::sync::Arc;

use mgtkit::group::{CosetSchema, FreeFactorSchema, Group, GroupSpec};
use mgtkit::lift::{lift, odometer_map, FinitaryMap};
use mgtkit::shift::{cylinder_frequency, Alphabet, DEFAULT_FAILURE_FRACTION};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = Group::new(GroupSpec::free_product_of_integers(&["a", "b"]))?;
    let schema = Arc::new(FreeFactorSchema::new(&g, 0)?);
    let alphabet = Arc::new(Alphabet::uniform(2));
    let inner = odometer_map(schema.subgroup(), &alphabet, "a", 64)?;
    let phi: Arc<dyn FinitaryMap> = lift(schema, inner)?;

    let window = [g.parse("e")?, g.parse("a")?, g.parse("b")?];
    let report = cylinder_frequency(&g, &alphabet, Some(&phi), &window, 50_000, 1, DEFAULT_FAILURE_FRACTION)?;
    println!("pattern  count  frequency  expected");
    for cell in &report.cells {
        println!("{:>7} {:>6}  {:.4}     {:.4}", cell.pattern, cell.count, cell.frequency, cell.expected);
    }
    println!("all within 5σ: {}", report.all_within_5_sigma);
    Ok(())
}
