// Index cocycles: one from a pair of nested partitions, one from a
// normal subgroup of C4.

use mgtkit::cocycle::{choice_functions, coset_choice_system, index_cocycle, index_cocycle_over_action, verify_cocycle};
use mgtkit::group::FiniteGroup;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cs = choice_functions(&[0, 0, 0, 0], &[0, 0, 1, 1])?;
    println!("index {}", cs.index());
    for (y, x) in [(1, 0), (2, 0), (3, 1)] {
        println!("σ({y}, {x}) = {:?}", cs.sigma(y, x).expect("same R-class"));
    }
    let c = index_cocycle(&cs)?;
    println!("cocycle identity: {:?}", verify_cocycle(&c).holds());

    let cc = coset_choice_system(FiniteGroup::cyclic(4), &[0, 2])?;
    let q = index_cocycle_over_action(&cc.system, &cc.action)?;
    let (_, perms) = FiniteGroup::symmetric(2);
    for gamma in 0..4 {
        let at_zero = perms[q.at(gamma, 0).expect("arrow")].clone();
        println!("γ = {gamma}: σ(γ.0, 0) = {at_zero:?}, ρ(γM) = {:?}", cc.right_regular(gamma));
    }
    Ok(())
}
