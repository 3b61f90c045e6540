//! Target groups with a bi-invariant metric, and integrated distances.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::CocycleError;
use crate::group::{Element, FiniteGroup, Group};
use crate::shift::hash::split_seed;
use crate::shift::{Alphabet, Configuration, ShiftError};

/// A finite group `L` with a bi-invariant metric bounded by 1.
///
/// The default metric is discrete. A class-function metric is given by a
/// weight `w` with `d(a, b) = w(a⁻¹b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroupL {
    group: FiniteGroup,
    weight: Option<Vec<BigRational>>,
}

impl FiniteGroupL {
    pub fn discrete(group: FiniteGroup) -> Self {
        FiniteGroupL {
            group,
            weight: None,
        }
    }

    /// Accepts `w` only after checking exhaustively that `d(a, b) = w(a⁻¹b)`
    /// is a metric bounded by 1 and that `d(gah, gbh) = d(a, b)`.
    pub fn with_class_metric(group: FiniteGroup, w: Vec<BigRational>) -> Result<Self, CocycleError> {
        let n = group.order();
        let bad = |m: String| Err(CocycleError::Metric(m));
        if w.len() != n {
            return bad(format!("expected {n} weights, got {}", w.len()));
        }
        for a in group.elements() {
            let positive = w[a].is_positive();
            if (a == group.identity()) == positive || w[a] > BigRational::one() || w[a].is_negative() {
                return bad(format!("weight of {} must be in (0, 1], and 0 only at e", group.name(a)));
            }
            if w[a] != w[group.inv(a)] {
                return bad(format!("weight is not symmetric at {}", group.name(a)));
            }
        }
        let l = FiniteGroupL {
            group,
            weight: Some(w),
        };
        if let Some((a, b, c)) = l.triangle_failure() {
            return bad(format!("triangle inequality fails at ({a}, {b}, {c})"));
        }
        if let Some((a, b, g, h)) = l.bi_invariance_failure() {
            return bad(format!("d(gah, gbh) ≠ d(a, b) at a={a}, b={b}, g={g}, h={h}"));
        }
        Ok(l)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }

    pub fn is_discrete(&self) -> bool {
        self.weight.is_none()
    }

    pub fn distance(&self, a: usize, b: usize) -> BigRational {
        match &self.weight {
            None if a == b => BigRational::zero(),
            None => BigRational::one(),
            Some(w) => w[self.group.mul(self.group.inv(a), b)].clone(),
        }
    }

    /// First `(a, b, g, h)` with `d(gah, gbh) ≠ d(a, b)`, over all quadruples.
    pub fn bi_invariance_failure(&self) -> Option<(usize, usize, usize, usize)> {
        let g = &self.group;
        let n = g.order();
        (0..n * n).into_par_iter().find_map_first(|ab| {
            let (a, b) = (ab / n, ab % n);
            let d = self.distance(a, b);
            for x in g.elements() {
                for y in g.elements() {
                    if self.distance(g.mul(g.mul(x, a), y), g.mul(g.mul(x, b), y)) != d {
                        return Some((a, b, x, y));
                    }
                }
            }
            None
        })
    }

    fn triangle_failure(&self) -> Option<(usize, usize, usize)> {
        let n = self.order();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if self.distance(a, c) > self.distance(a, b) + self.distance(b, c) {
                        return Some((a, b, c));
                    }
                }
            }
        }
        None
    }
}

/// `∫ d(φ₀(x), φ₁(x)) dμ(x)` over a finite space, exactly.
pub fn tilde_distance(
    l: &FiniteGroupL,
    phi0: &[usize],
    phi1: &[usize],
    weights: &[BigRational],
) -> Result<BigRational, CocycleError> {
    if phi0.len() != weights.len() || phi1.len() != weights.len() {
        return Err(CocycleError::Invalid("maps and measure need a common domain".into()));
    }
    Ok(phi0
        .iter()
        .zip(phi1)
        .zip(weights)
        .map(|((&a, &b), w)| l.distance(a, b) * w)
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

pub type Functional<'a> = &'a (dyn Fn(&Configuration) -> Result<usize, ShiftError> + Sync);

/// Monte Carlo `d̃(φ₀, φ₁)` for functionals on the i.i.d. shift space over
/// `group`; sample `i` is the configuration seeded by `split_seed(seed, i)`.
pub fn tilde_distance_sampled(
    l: &FiniteGroupL,
    group: &Group,
    alphabet: &Arc<Alphabet>,
    seed: u64,
    samples: usize,
    phi0: Functional<'_>,
    phi1: Functional<'_>,
) -> Result<MonteCarloEstimate, CocycleError> {
    if samples < 2 {
        return Err(CocycleError::Invalid("need at least two samples".into()));
    }
    let values = (0..samples)
        .into_par_iter()
        .map(|i| {
            let y = Configuration::seeded(group, alphabet, split_seed(seed, i as u64));
            let d = l.distance(phi0(&y)?, phi1(&y)?);
            Ok(d.to_f64().unwrap_or(f64::NAN))
        })
        .collect::<Result<Vec<f64>, ShiftError>>()?;
    let n = samples as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(MonteCarloEstimate {
        mean,
        std_error: (var / n).sqrt(),
        samples,
    })
}

/// Coordinate functional `y ↦ y_γ`, read as an element of `L` by index.
pub fn coordinate_functional(gamma: Element) -> impl Fn(&Configuration) -> Result<usize, ShiftError> + Sync {
    move |y| y.eval(&gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;
    use crate::groupoid::{ratio, uniform_weights};

    fn s3_word_metric() -> FiniteGroupL {
        let (s3, perms) = FiniteGroup::symmetric(3);
        let w = perms
            .iter()
            .map(|p| {
                let fixed = p.iter().enumerate().filter(|(i, &j)| *i == j).count();
                match fixed {
                    3 => ratio(0, 1),
                    1 => ratio(1, 2),
                    _ => ratio(1, 1),
                }
            })
            .collect();
        FiniteGroupL::with_class_metric(s3, w).unwrap()
    }

    #[test]
    fn discrete_and_class_metrics_are_bi_invariant() {
        let (s3, _) = FiniteGroup::symmetric(3);
        assert_eq!(FiniteGroupL::discrete(s3).bi_invariance_failure(), None);
        let l = s3_word_metric();
        assert_eq!(l.distance(0, 1), ratio(1, 2));
        assert_eq!(l.bi_invariance_failure(), None);
    }

    #[test]
    fn non_class_function_is_rejected() {
        let (s3, perms) = FiniteGroup::symmetric(3);
        // favour one transposition over the others
        let w = perms
            .iter()
            .enumerate()
            .map(|(i, p)| {
                if p == &vec![0, 1, 2] {
                    ratio(0, 1)
                } else if i == 1 {
                    ratio(1, 2)
                } else {
                    ratio(1, 1)
                }
            })
            .collect();
        assert!(matches!(
            FiniteGroupL::with_class_metric(s3, w),
            Err(CocycleError::Metric(_))
        ));
    }

    #[test]
    fn half_differing_maps() {
        let l = FiniteGroupL::discrete(FiniteGroup::cyclic(2));
        let w = uniform_weights(4);
        assert_eq!(tilde_distance(&l, &[0, 1, 0, 1], &[0, 1, 0, 1], &w).unwrap(), ratio(0, 1));
        assert_eq!(tilde_distance(&l, &[0, 0, 0, 0], &[0, 1, 0, 1], &w).unwrap(), ratio(1, 2));
    }

    #[test]
    fn sampled_distance_of_independent_coordinates() {
        let g = Group::new(GroupSpec::free(&["a", "b"])).unwrap();
        let alphabet = Arc::new(Alphabet::uniform(2));
        let l = FiniteGroupL::discrete(FiniteGroup::cyclic(2));
        let gens: Vec<Element> = g.generators().iter().map(|s| s.element.clone()).collect();
        let phi0 = coordinate_functional(g.identity());
        let phi1 = coordinate_functional(gens[0].clone());
        let est = tilde_distance_sampled(&l, &g, &alphabet, 7, 20_000, &phi0, &phi1).unwrap();
        assert!((est.mean - 0.5).abs() < 5.0 * est.std_error, "{est:?}");
        let same = tilde_distance_sampled(&l, &g, &alphabet, 7, 100, &phi0, &phi0).unwrap();
        assert_eq!(same.mean, 0.0);
    }
}
