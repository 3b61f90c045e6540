// Tree cocycles on the Cayley tree of F2 with S3 labels.

use mgtkit::cocycle::{
    edge_flip_sensitivity, tree_cocycle, verify_tree_cocycle, FiniteGroupL, Labeling, Orientation, TreeAction,
};
use mgtkit::group::{FiniteGroup, Group, GroupSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f2 = Group::new(GroupSpec::free(&["a", "b"]))?;
    let ta = TreeAction::cayley(&f2, 4)?;
    let (s3, _) = FiniteGroup::symmetric(3);
    let l = FiniteGroupL::discrete(s3);
    let labelings: Vec<Labeling> = (0..5).map(|k| Labeling::seeded(&ta, &l, k)).collect();

    for word in ["a", "ab", "b^-1a"] {
        let gamma = ta.parse_element(word)?;
        println!("c({word}, x0) = {}", l.group().name(tree_cocycle(&ta, &l, &labelings[0], gamma)?));
    }
    for orientation in [Orientation::Inverse, Orientation::Forward] {
        let report = verify_tree_cocycle(&ta, &l, &labelings, 3, orientation)?;
        println!("{orientation:?}: {} checks, {} violations", report.checked, report.total_violations);
    }

    let x = Labeling::seeded_pair(&ta, (0, 1), 3);
    let gamma = ta.parse_element("ab")?;
    let end = ta.act(ta.inv(gamma), ta.base()).expect("inside the tree");
    for edge in ta.geodesic_edges(ta.base(), end) {
        let flip = edge_flip_sensitivity(&ta, &l, &x, gamma, edge, (0, 1), true)?;
        println!("flip edge {edge}: d = {}, expected {}", flip.distance, flip.expected);
    }
    Ok(())
}
