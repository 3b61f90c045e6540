use std::sync::Arc;

use mgtkit::experiment::trials::entropy_trial;
use mgtkit::shift::{shannon_entropy, Alphabet, AlphabetSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let biased = Alphabet::from_spec(&AlphabetSpec {
        symbols: vec!["0".into(), "1".into(), "2".into()],
        weights: vec!["1/2".into(), "1/4".into(), "1/4".into()],
        lamp: None,
    })?;
    for (name, alphabet) in [("fair coin", Arc::new(Alphabet::uniform(2))), ("1/2,1/4,1/4", Arc::new(biased))] {
        let t = entropy_trial(&alphabet, 200_000, 5)?;
        println!("{name}: exact {:.6}, sampled {:.6}", shannon_entropy(&alphabet), t.empirical);
    }
    Ok(())
}
