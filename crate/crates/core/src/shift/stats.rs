use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use super::{hash, Alphabet, Configuration, ShiftError};
use crate::group::{Element, Group};
use crate::lift::FinitaryMap;

/// Largest tolerated fraction of samples hitting a non-finitary point.
pub const DEFAULT_FAILURE_FRACTION: f64 = 1e-4;

fn ln_big(x: &num_bigint::BigInt) -> f64 {
    // ln of a big integer without overflowing f64.
    let bits = x.bits();
    if bits < 1000 {
        x.to_f64().unwrap_or(f64::NAN).ln()
    } else {
        let shift = bits - 900;
        (x >> shift).to_f64().unwrap_or(f64::NAN).ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// `−Σ μ(z) ln μ(z)` in nats, evaluated as `Σ (p/q)(ln q − ln p)`.
pub fn shannon_entropy(alphabet: &Alphabet) -> f64 {
    alphabet
        .weights()
        .iter()
        .map(|w| w.to_f64().unwrap_or(0.0) * (ln_big(w.denom()) - ln_big(w.numer())))
        .sum()
}

/// Plug-in entropy of the observed symbol frequencies; `None` for an empty sample.
pub fn empirical_entropy(samples: &[usize]) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    for &s in samples {
        *counts.entry(s).or_default() += 1;
    }
    Some(entropy_from_counts(counts.values().copied(), samples.len() as u64))
}

pub(crate) fn entropy_from_counts(counts: impl Iterator<Item = u64>, n: u64) -> f64 {
    let ln_n = (n as f64).ln();
    counts
        .filter(|&c| c > 0)
        .map(|c| (c as f64 / n as f64) * (ln_n - (c as f64).ln()))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CylinderCell {
    pub pattern: String,
    pub count: u64,
    pub frequency: f64,
    pub expected: f64,
    pub sigma: f64,
    pub within_5_sigma: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CylinderReport {
    pub window: Vec<String>,
    pub samples: u64,
    pub failures: u64,
    pub cells: Vec<CylinderCell>,
    pub all_within_5_sigma: bool,
}

/// Draws `samples` i.i.d. points from independent seed streams, applies
/// `map` (or nothing), and tabulates the pattern seen on `window`.
/// Samples hitting a non-finitary point are counted and skipped; more than
/// `max_failure_fraction` of them is an error.
pub fn cylinder_frequency(
    group: &Group,
    alphabet: &Arc<Alphabet>,
    map: Option<&Arc<dyn FinitaryMap>>,
    window: &[Element],
    samples: u64,
    seed: u64,
    max_failure_fraction: f64,
) -> Result<CylinderReport, ShiftError> {
    if window.is_empty() || samples == 0 {
        return Err(ShiftError::InvalidAlphabet("window and sample count must be nonempty".into()));
    }
    let target = map.map(|m| m.target().clone()).unwrap_or_else(|| alphabet.clone());
    let (counts, failures) = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<Option<Vec<usize>>, ShiftError> {
            let x = Configuration::seeded(group, alphabet, hash::split_seed(seed, i));
            let y = match map {
                Some(m) => Configuration::mapped(m.clone(), &x)?,
                None => x,
            };
            let mut pattern = Vec::with_capacity(window.len());
            for w in window {
                match y.eval(w) {
                    Ok(s) => pattern.push(s),
                    Err(ShiftError::NonFinitaryAtPoint { .. }) => return Ok(None),
                    Err(e) => return Err(e),
                }
            }
            Ok(Some(pattern))
        })
        .try_fold(
            || (BTreeMap::<Vec<usize>, u64>::new(), 0u64),
            |(mut counts, mut fails), r| {
                match r? {
                    Some(p) => *counts.entry(p).or_default() += 1,
                    None => fails += 1,
                }
                Ok::<_, ShiftError>((counts, fails))
            },
        )
        .try_reduce(
            || (BTreeMap::new(), 0),
            |(mut a, fa), (b, fb)| {
                for (k, v) in b {
                    *a.entry(k).or_default() += v;
                }
                Ok((a, fa + fb))
            },
        )?;
    if failures as f64 > max_failure_fraction * samples as f64 {
        return Err(ShiftError::TooManyFailures { failures, samples });
    }
    let n = samples - failures;
    let mut cells = Vec::new();
    let q = target.len();
    let total = q.checked_pow(window.len() as u32).unwrap_or(usize::MAX);
    for idx in 0..total {
        let mut pattern = vec![0; window.len()];
        let mut r = idx;
        for slot in pattern.iter_mut().rev() {
            *slot = r % q;
            r /= q;
        }
        let count = counts.get(&pattern).copied().unwrap_or(0);
        let expected = target.pattern_probability(&pattern);
        let sigma = (expected * (1.0 - expected) / n as f64).sqrt();
        let frequency = count as f64 / n as f64;
        cells.push(CylinderCell {
            pattern: target.pattern_label(&pattern),
            count,
            frequency,
            expected,
            sigma,
            within_5_sigma: (frequency - expected).abs() <= 5.0 * sigma,
        });
    }
    Ok(CylinderReport {
        window: window.iter().map(|w| group.format(w)).collect(),
        samples,
        failures,
        all_within_5_sigma: cells.iter().all(|c| c.within_5_sigma),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;

    #[test]
    fn entropy_examples() {
        assert_eq!(shannon_entropy(&Alphabet::uniform(2)), std::f64::consts::LN_2);
        assert_eq!(shannon_entropy(&Alphabet::uniform(1)), 0.0);
        let skew = Alphabet::with_weights(&[(1, 4), (3, 4)]).unwrap();
        let direct = 0.25 * 4f64.ln() + 0.75 * (4.0f64 / 3.0).ln();
        assert!((shannon_entropy(&skew) - direct).abs() < 1e-15);
        assert_eq!(empirical_entropy(&[]), None);
        assert_eq!(empirical_entropy(&[3, 3, 3]), Some(0.0));
        assert!((empirical_entropy(&[0, 1, 0, 1]).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn identity_cylinder_is_balanced() {
        let g = Group::new(GroupSpec::free_product_of_integers(&["a", "b"])).unwrap();
        let alpha = Arc::new(Alphabet::uniform(2));
        let r = cylinder_frequency(&g, &alpha, None, &[g.identity()], 20_000, 1, 0.0).unwrap();
        assert_eq!(r.cells.len(), 2);
        assert!(r.all_within_5_sigma, "{r:?}");
        assert_eq!(r.cells.iter().map(|c| c.count).sum::<u64>(), 20_000);
    }
}
