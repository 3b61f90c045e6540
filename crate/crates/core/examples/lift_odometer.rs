// Lifts the binary odometer on ⟨a⟩ to Z*Z and looks at what shifting by
// `b` and by `a` does to the image.

use std::sync::Arc;

use mgtkit::group::{FreeFactorSchema, Group, GroupSpec};
use mgtkit::lift::{lift, odometer_map, predicted_defect, FinitaryMap};
use mgtkit::shift::{shift_act, Alphabet, Configuration};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = Group::new(GroupSpec::free_product_of_integers(&["a", "b"]))?;
    let schema = Arc::new(FreeFactorSchema::new(&g, 0)?);
    let alphabet = Arc::new(Alphabet::uniform(2));
    let inner = odometer_map(mgtkit::group::CosetSchema::subgroup(schema.as_ref()), &alphabet, "a", 64)?;
    let phi = lift(schema, inner)?;
    println!("{}", phi.describe());

    let y = Configuration::seeded(&g, &alphabet, 7);
    let row: Vec<String> = (-3..=3)
        .map(|k| {
            let c = g.pow(&g.parse("a")?, k);
            Ok(format!("{}{}", y.eval(&c)?, phi.eval(&y, &c)?))
        })
        .collect::<Result<_, Box<dyn std::error::Error>>>()?;
    println!("row a^-3..a^3 as (input, output): {}", row.join(" "));

    for delta in ["b", "a"] {
        let d = g.parse(delta)?;
        let defect = predicted_defect(&phi, &d, &y)?;
        let words: Vec<String> = defect.iter().map(|c| g.format(c)).collect();
        println!("φ(δ.y) vs δ.φ(y) for δ = {delta}: {} coordinates {:?}", words.len(), words);
        // spot check one coordinate outside the defect
        let c = g.parse("ba")?;
        if !defect.contains(&c) {
            let lhs = phi.eval(&shift_act(&d, &y), &c)?;
            let rhs = phi.eval(&y, &g.mul(&g.inv(&d), &c))?;
            assert_eq!(lhs, rhs);
        }
    }
    Ok(())
}
