use mgtkit::cocycle::{
    coboundary, cohomologous_to_hom_search, Cocycle, FiniteGroupL, GroupAction, HomSearch, DEFAULT_SEARCH_CAP,
};
use mgtkit::group::FiniteGroup;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (s3, _) = FiniteGroup::symmetric(3);
    let l = FiniteGroupL::discrete(s3);

    // C2 swapping two points and fixing a third, twisted by a gauge
    let act = GroupAction::new(FiniteGroup::cyclic(2), vec![vec![0, 1, 2], vec![1, 0, 2]])?;
    let rho = act.group().homomorphisms_to(l.group()).pop().expect("the trivial one at least");
    let hom = Cocycle::from_homomorphism(act, l.clone(), &rho)?;
    let planted = coboundary(&[3, 5, 1], &hom)?;
    println!("planted ρ = {rho:?}");
    match cohomologous_to_hom_search(&planted, DEFAULT_SEARCH_CAP)? {
        HomSearch::Found { rho, f } => println!("planted: ρ = {rho:?}, f = {f:?}"),
        other => println!("planted: {other:?}"),
    }

    // C2 fixing two points, acting by different elements at each
    let fixed = GroupAction::trivial(FiniteGroup::cyclic(2), 2);
    let c = Cocycle::on_action(fixed, FiniteGroupL::discrete(FiniteGroup::cyclic(2)), |g, x| g * x)?;
    println!("holonomy: {:?}", cohomologous_to_hom_search(&c, DEFAULT_SEARCH_CAP)?);
    Ok(())
}
