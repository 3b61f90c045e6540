use mgtkit::groupoid::{freely_independent, relation_subgroupoid, uniform_weights, FiniteGroupoid, StructureGraph};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cases: [(&str, [usize; 4], [usize; 4]); 2] = [
        ("square", [0, 0, 1, 1], [0, 1, 1, 0]),
        ("path", [0, 0, 1, 2], [0, 1, 1, 2]),
    ];
    let g = FiniteGroupoid::full_relation(uniform_weights(4));
    for (name, r0, r1) in cases {
        let graph = StructureGraph::new(&r0, &r1)?;
        let search = freely_independent(&g, &[relation_subgroupoid(&r0), relation_subgroupoid(&r1)], 8);
        println!(
            "{name}: {} vertices, {} edges, acyclic {}, word search {:?}",
            graph.vertices(),
            graph.edges.len(),
            graph.is_acyclic(),
            search
        );
    }
    Ok(())
}
