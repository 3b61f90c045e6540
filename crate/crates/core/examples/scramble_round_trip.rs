// A block scramble on the window {a⁻¹, e, a}, lifted and then undone by
// the lift of its inverse.

use std::sync::Arc;

use mgtkit::group::{CosetSchema, FreeFactorSchema, Group, GroupSpec};
use mgtkit::lift::{lift, FinitaryMap, ScrambleSpec};
use mgtkit::shift::{Alphabet, Configuration};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = Group::new(GroupSpec::free_product_of_integers(&["a", "b"]))?;
    let schema = Arc::new(FreeFactorSchema::new(&g, 0)?);
    let alphabet = Arc::new(Alphabet::uniform(2));
    let spec = ScrambleSpec {
        window: vec!["a^-1".into(), "e".into(), "a".into()],
        permutation: vec![3, 6, 0, 7, 1, 4, 2, 5],
        swaps: vec![],
    };
    let phi: Arc<dyn FinitaryMap> = lift(schema.clone(), spec.build(schema.subgroup(), &alphabet)?)?;

    let y = Configuration::seeded(&g, &alphabet, 42);
    let image = Configuration::mapped(phi.clone(), &y)?;
    let back = Configuration::mapped(phi.inverse(), &image)?;
    let ball = g.ball(4)?;
    let moved = ball.iter().filter(|c| image.eval(c).ok() != y.eval(c).ok()).count();
    let restored = ball.iter().all(|c| back.eval(c).ok() == y.eval(c).ok());
    println!("{} coordinates in Ball(4), {moved} changed, inverse restores all: {restored}", ball.len());
    Ok(())
}
