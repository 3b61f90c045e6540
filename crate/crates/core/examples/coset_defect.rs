use mgtkit::group::{coset_defect, FreeFactorSchema, Group, GroupSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = Group::new(GroupSpec::free_product_of_integers(&["a", "b"]))?;
    let schema = FreeFactorSchema::new(&g, 0)?;
    for word in ["a", "a^3", "a^-2", "b", "b^2", "ab"] {
        let gamma = g.parse(word)?;
        let defect = coset_defect(&schema, &gamma, 4)?;
        let shown: Vec<String> = defect.iter().map(|x| g.format(x)).collect();
        println!("{word:>5}: γS △ S within radius 4 = {shown:?}");
    }
    Ok(())
}
