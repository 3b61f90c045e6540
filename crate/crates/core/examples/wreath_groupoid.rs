// The lamplighter groupoid full(2) ≀ full(2), its action-groupoid twin and
// a lamp-swapping automorphism.

use mgtkit::group::FiniteGroup;
use mgtkit::groupoid::{
    iso_search, uniform_weights, wreath_action_groupoid, wreath_default, wreath_iso_from_fiber_maps,
    FiniteGroupoid, IsoOutcome, DEFAULT_NODE_CAP,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let full = FiniteGroupoid::full_relation(uniform_weights(2));
    let w = wreath_default(&full, &full)?;
    let wg = w.groupoid();
    println!("full(2) ≀ full(2): {} objects, {} morphisms, valid: {}", wg.num_objects(), wg.num_morphisms(), wg.validate().is_valid());

    let c2 = FiniteGroup::cyclic(2);
    let perms = [vec![0, 1], vec![1, 0]];
    let action = wreath_action_groupoid(&c2, &perms, &uniform_weights(2), &c2, &perms, &uniform_weights(2))?;
    let swap = mgtkit::groupoid::action_groupoid(&c2, &perms, uniform_weights(2))?;
    let lamps = wreath_default(&swap, &swap)?;
    match iso_search(lamps.groupoid(), &action, DEFAULT_NODE_CAP) {
        IsoOutcome::Isomorphic(iso) => println!("C2 ≀ C2 action groupoid matches: object map {:?}", iso.objects),
        other => println!("no match: {other:?}"),
    }

    let report = wreath_iso_from_fiber_maps(&w, &w, &[vec![3, 2, 1, 0], vec![3, 2, 1, 0]], None)?;
    println!("lamp swap: bijective {}, {} composable pairs checked", report.bijective, report.checked_pairs);
    Ok(())
}
