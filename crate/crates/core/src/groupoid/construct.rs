//! Direct sums, semidirect products, wreath products and action groupoids.

use num_rational::BigRational;
use num_traits::One;

use super::{FiniteGroupoid, GroupoidError, SIZE_CAP};
use crate::group::FiniteGroup;

pub(super) fn digits(mut i: usize, radix: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for d in out.iter_mut().rev() {
        *d = i % radix;
        i /= radix;
    }
    out
}

pub(super) fn undigits(ds: &[usize], radix: usize) -> usize {
    ds.iter().fold(0, |acc, &d| acc * radix + d)
}

fn checked_product(sizes: impl IntoIterator<Item = usize>) -> Result<usize, GroupoidError> {
    let mut total = 1usize;
    for s in sizes {
        total = total.checked_mul(s).filter(|&t| t <= SIZE_CAP).ok_or(GroupoidError::SizeCap {
            needed: usize::MAX,
            cap: SIZE_CAP,
        })?;
    }
    Ok(total)
}

/// Mixed-radix tuple codec, first factor most significant.
struct Radix(Vec<usize>);

impl Radix {
    fn decode(&self, mut i: usize) -> Vec<usize> {
        let mut out = vec![0; self.0.len()];
        for (d, &r) in out.iter_mut().zip(&self.0).rev() {
            *d = i % r;
            i /= r;
        }
        out
    }

    fn encode(&self, ds: &[usize]) -> usize {
        ds.iter().zip(&self.0).fold(0, |acc, (&d, &r)| acc * r + d)
    }
}

/// The direct sum of finitely many groupoids: product objects with the
/// product measure, tuple morphisms, coordinatewise composition. The empty
/// sum is the one-point groupoid.
pub fn direct_sum<'a>(
    factors: impl IntoIterator<Item = &'a FiniteGroupoid>,
) -> Result<FiniteGroupoid, GroupoidError> {
    let factors: Vec<&FiniteGroupoid> = factors.into_iter().collect();
    if factors.is_empty() {
        return Ok(FiniteGroupoid::point());
    }
    let m = checked_product(factors.iter().map(|f| f.num_morphisms()))?;
    let n = checked_product(factors.iter().map(|f| f.num_objects()))?;
    let mr = Radix(factors.iter().map(|f| f.num_morphisms()).collect());
    let or = Radix(factors.iter().map(|f| f.num_objects()).collect());
    let join = |parts: Vec<&str>| {
        if parts.len() == 1 {
            parts[0].to_string()
        } else {
            format!("({})", parts.join(","))
        }
    };
    let objects = (0..n)
        .map(|o| {
            let t = or.decode(o);
            let w = t
                .iter()
                .zip(&factors)
                .fold(BigRational::one(), |acc, (&x, f)| acc * f.weight(x));
            (join(t.iter().zip(&factors).map(|(&x, f)| f.object_name(x)).collect()), w)
        })
        .collect();
    let morphisms = (0..m)
        .map(|g| {
            let t = mr.decode(g);
            let s: Vec<usize> = t.iter().zip(&factors).map(|(&k, f)| f.source(k)).collect();
            let r: Vec<usize> = t.iter().zip(&factors).map(|(&k, f)| f.range(k)).collect();
            let label = join(t.iter().zip(&factors).map(|(&k, f)| f.label(k)).collect());
            (label, or.encode(&s), or.encode(&r))
        })
        .collect();
    FiniteGroupoid::from_fn(objects, morphisms, |a, b| {
        let (ta, tb) = (mr.decode(a), mr.decode(b));
        let prod: Vec<usize> = factors
            .iter()
            .enumerate()
            .map(|(i, f)| f.compose(ta[i], tb[i]).expect("coordinatewise composable"))
            .collect();
        mr.encode(&prod)
    })
}

/// A bundle of groupoids over the objects of a base groupoid `G`, with
/// `α_g : fiber(s(g)) → fiber(r(g))` given on morphisms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupoidBundle {
    fibers: Vec<FiniteGroupoid>,
    alpha: Vec<Vec<usize>>,
    // object maps induced by alpha
    alpha_obj: Vec<Vec<usize>>,
}

impl GroupoidBundle {
    /// Checks every `α_g` is a measure-preserving isomorphism and that
    /// `α` respects units and composition in `base`.
    pub fn new(
        base: &FiniteGroupoid,
        fibers: Vec<FiniteGroupoid>,
        alpha: Vec<Vec<usize>>,
    ) -> Result<Self, GroupoidError> {
        let bundle = Self::unchecked(base, fibers, alpha)?;
        bundle.check(base)?;
        Ok(bundle)
    }

    fn unchecked(
        base: &FiniteGroupoid,
        fibers: Vec<FiniteGroupoid>,
        alpha: Vec<Vec<usize>>,
    ) -> Result<Self, GroupoidError> {
        let bad = |m: String| Err(GroupoidError::ActionInvalid(m));
        if fibers.len() != base.num_objects() || alpha.len() != base.num_morphisms() {
            return bad("one fiber per object and one map per morphism".into());
        }
        let mut alpha_obj = Vec::with_capacity(alpha.len());
        for (g, a) in alpha.iter().enumerate() {
            let (from, to) = (&fibers[base.source(g)], &fibers[base.range(g)]);
            if a.len() != from.num_morphisms() || a.iter().any(|&h| h >= to.num_morphisms()) {
                return bad(format!("map for {} has the wrong shape", base.label(g)));
            }
            let mut om = Vec::with_capacity(from.num_objects());
            for y in 0..from.num_objects() {
                let img = a[from.unit(y)];
                if !to.is_unit(img) {
                    return bad(format!("{} sends a unit to a non-unit", base.label(g)));
                }
                om.push(to.source(img));
            }
            alpha_obj.push(om);
        }
        Ok(GroupoidBundle {
            fibers,
            alpha,
            alpha_obj,
        })
    }

    fn check(&self, base: &FiniteGroupoid) -> Result<(), GroupoidError> {
        let bad = |m: String| Err(GroupoidError::ActionInvalid(m));
        for g in 0..base.num_morphisms() {
            let (from, to) = (&self.fibers[base.source(g)], &self.fibers[base.range(g)]);
            let a = &self.alpha[g];
            let name = base.label(g);
            if from.num_morphisms() != to.num_morphisms() {
                return bad(format!("{name} joins fibers of different sizes"));
            }
            let mut hit = vec![false; to.num_morphisms()];
            for &h in a {
                if std::mem::replace(&mut hit[h], true) {
                    return bad(format!("{name} is not injective"));
                }
            }
            for h in 0..from.num_morphisms() {
                if to.source(a[h]) != self.alpha_obj[g][from.source(h)]
                    || to.range(a[h]) != self.alpha_obj[g][from.range(h)]
                {
                    return bad(format!("{name} does not respect endpoints"));
                }
            }
            for (h, k, hk) in from.composable_pairs() {
                if to.compose(a[h], a[k]) != Some(a[hk]) {
                    return bad(format!("{name} does not respect composition"));
                }
            }
            for y in 0..from.num_objects() {
                if from.weight(y) != to.weight(self.alpha_obj[g][y]) {
                    return bad(format!("{name} does not preserve the measure"));
                }
            }
        }
        for x in 0..base.num_objects() {
            let u = base.unit(x);
            if self.alpha[u].iter().enumerate().any(|(i, &j)| i != j) {
                return bad(format!("the unit at {} acts nontrivially", base.object_name(x)));
            }
        }
        for (g1, g0, g) in base.composable_pairs() {
            if (0..self.alpha[g0].len()).any(|h| self.alpha[g1][self.alpha[g0][h]] != self.alpha[g][h]) {
                return bad(format!(
                    "α({}·{}) ≠ α({})∘α({})",
                    base.label(g1),
                    base.label(g0),
                    base.label(g1),
                    base.label(g0)
                ));
            }
        }
        Ok(())
    }

    /// The same fiber everywhere, transported by identities.
    pub fn constant(base: &FiniteGroupoid, fiber: &FiniteGroupoid) -> Self {
        let fibers = vec![fiber.clone(); base.num_objects()];
        let alpha = vec![(0..fiber.num_morphisms()).collect(); base.num_morphisms()];
        Self::unchecked(base, fibers, alpha).expect("identity transport")
    }

    /// One-point fibers.
    pub fn trivial(base: &FiniteGroupoid) -> Self {
        Self::constant(base, &FiniteGroupoid::point())
    }

    pub fn fiber(&self, x: usize) -> &FiniteGroupoid {
        &self.fibers[x]
    }

    /// `α_g(h)` for `h` a morphism of `fiber(s(g))`.
    pub fn act(&self, g: usize, h: usize) -> usize {
        self.alpha[g][h]
    }

    /// `α_g` on objects of `fiber(s(g))`.
    pub fn act_object(&self, g: usize, y: usize) -> usize {
        self.alpha_obj[g][y]
    }
}

/// `G ⋉ H` together with the coordinates of its objects and morphisms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemidirectProduct {
    groupoid: FiniteGroupoid,
    base: FiniteGroupoid,
    bundle: GroupoidBundle,
    morphism_offset: Vec<usize>,
    object_offset: Vec<usize>,
}

impl SemidirectProduct {
    pub fn groupoid(&self) -> &FiniteGroupoid {
        &self.groupoid
    }

    pub fn into_groupoid(self) -> FiniteGroupoid {
        self.groupoid
    }

    pub fn base(&self) -> &FiniteGroupoid {
        &self.base
    }

    pub fn bundle(&self) -> &GroupoidBundle {
        &self.bundle
    }

    /// Index of `(g, h)` with `h` in `fiber(s(g))`.
    pub fn morphism(&self, g: usize, h: usize) -> usize {
        self.morphism_offset[g] + h
    }

    /// `(g, h)` for a morphism index.
    pub fn pair(&self, m: usize) -> (usize, usize) {
        let g = self.morphism_offset.partition_point(|&o| o <= m) - 1;
        (g, m - self.morphism_offset[g])
    }

    /// Index of the object `(x, y)` with `y` in `fiber(x)`.
    pub fn object(&self, x: usize, y: usize) -> usize {
        self.object_offset[x] + y
    }

    pub fn object_pair(&self, o: usize) -> (usize, usize) {
        let x = self.object_offset.partition_point(|&v| v <= o) - 1;
        (x, o - self.object_offset[x])
    }
}

/// `G ⋉ H` with `(g₁,h₁)(g₀,h₀) = (g₁g₀, α_{g₀}⁻¹(h₁)h₀)`,
/// `s(g,h) = (s(g), s(h))` and `r(g,h) = (r(g), α_g(r(h)))`.
pub fn semidirect(
    base: &FiniteGroupoid,
    bundle: GroupoidBundle,
) -> Result<SemidirectProduct, GroupoidError> {
    if bundle.fibers.len() != base.num_objects() || bundle.alpha.len() != base.num_morphisms() {
        return Err(GroupoidError::ActionInvalid("bundle is over a different groupoid".into()));
    }
    bundle.check(base)?;
    semidirect_unchecked(base, bundle)
}

fn semidirect_unchecked(
    base: &FiniteGroupoid,
    bundle: GroupoidBundle,
) -> Result<SemidirectProduct, GroupoidError> {
    let mut object_offset = Vec::with_capacity(base.num_objects());
    let mut objects = Vec::new();
    for x in 0..base.num_objects() {
        object_offset.push(objects.len());
        let f = &bundle.fibers[x];
        for y in 0..f.num_objects() {
            objects.push((
                format!("({},{})", base.object_name(x), f.object_name(y)),
                base.weight(x) * f.weight(y),
            ));
        }
    }
    let mut morphism_offset = Vec::with_capacity(base.num_morphisms());
    let mut total = 0usize;
    for g in 0..base.num_morphisms() {
        morphism_offset.push(total);
        total = total
            .checked_add(bundle.fibers[base.source(g)].num_morphisms())
            .filter(|&t| t <= SIZE_CAP)
            .ok_or(GroupoidError::SizeCap {
                needed: usize::MAX,
                cap: SIZE_CAP,
            })?;
    }
    let mut morphisms = Vec::with_capacity(total);
    for g in 0..base.num_morphisms() {
        let (s, r) = (base.source(g), base.range(g));
        let f = &bundle.fibers[s];
        for h in 0..f.num_morphisms() {
            morphisms.push((
                format!("({},{})", base.label(g), f.label(h)),
                object_offset[s] + f.source(h),
                object_offset[r] + bundle.alpha_obj[g][f.range(h)],
            ));
        }
    }
    let pair = |m: usize| {
        let g = morphism_offset.partition_point(|&o| o <= m) - 1;
        (g, m - morphism_offset[g])
    };
    let groupoid = FiniteGroupoid::from_fn(objects, morphisms, |a, b| {
        let ((g1, h1), (g0, h0)) = (pair(a), pair(b));
        let g = base.compose(g1, g0).expect("composable base");
        let pulled = bundle.alpha[base.inverse(g0)][h1];
        let h = bundle.fibers[base.source(g0)]
            .compose(pulled, h0)
            .expect("composable fiber");
        morphism_offset[g] + h
    })?;
    Ok(SemidirectProduct {
        groupoid,
        base: base.clone(),
        bundle,
        morphism_offset,
        object_offset,
    })
}

/// A space fibered over the objects of `G` with a left action of `G`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberedSpace {
    labels: Vec<String>,
    fibers: Vec<Vec<usize>>,
    position: Vec<usize>,
    // action[g][j] = g.(fibers[s(g)][j])
    action: Vec<Vec<usize>>,
}

impl FiberedSpace {
    /// `base_point[w]` is the object `w` lies over; `action[g][w]` is `g.w`
    /// for `w` over `s(g)` and ignored elsewhere.
    pub fn new(
        g: &FiniteGroupoid,
        labels: Vec<String>,
        base_point: Vec<usize>,
        action: Vec<Vec<usize>>,
    ) -> Result<Self, GroupoidError> {
        let bad = |m: &str| Err(GroupoidError::ActionInvalid(m.into()));
        if labels.len() != base_point.len() || action.len() != g.num_morphisms() {
            return bad("shape mismatch");
        }
        if base_point.iter().any(|&x| x >= g.num_objects()) {
            return bad("point over an unknown object");
        }
        let mut fibers = vec![Vec::new(); g.num_objects()];
        let mut position = vec![0; labels.len()];
        for (w, &x) in base_point.iter().enumerate() {
            position[w] = fibers[x].len();
            fibers[x].push(w);
        }
        let mut dense = Vec::with_capacity(action.len());
        for (m, row) in action.iter().enumerate() {
            let mut out = Vec::new();
            for &w in &fibers[g.source(m)] {
                let v = *row.get(w).ok_or(GroupoidError::ActionInvalid("short action row".into()))?;
                if v >= labels.len() || base_point[v] != g.range(m) {
                    return bad("action leaves the target fiber");
                }
                out.push(v);
            }
            dense.push(out);
        }
        let space = FiberedSpace {
            labels,
            fibers,
            position,
            action: dense,
        };
        for x in 0..g.num_objects() {
            if space.fibers[x].iter().any(|&w| space.act(g.unit(x), w) != w) {
                return bad("units do not act trivially");
            }
        }
        for (a, b, ab) in g.composable_pairs() {
            if space.fibers[g.source(b)]
                .iter()
                .any(|&w| space.act(a, space.act(b, w)) != space.act(ab, w))
            {
                return bad("action is not compatible with composition");
            }
        }
        Ok(space)
    }

    /// `G` fibered by the range map, acted on by left translation.
    pub fn left_translation(g: &FiniteGroupoid) -> Self {
        Self::left_translation_onto(g, &(0..g.num_objects()).collect::<Vec<_>>())
    }

    /// `GD = {h : s(h) ∈ D}` fibered by the range map, acted on by left translation.
    pub fn left_translation_onto(g: &FiniteGroupoid, d: &[usize]) -> Self {
        let points: Vec<usize> = (0..g.num_morphisms())
            .filter(|&h| d.contains(&g.source(h)))
            .collect();
        let mut index = vec![usize::MAX; g.num_morphisms()];
        for (i, &h) in points.iter().enumerate() {
            index[h] = i;
        }
        let labels = points.iter().map(|&h| g.label(h).to_string()).collect();
        let base_point = points.iter().map(|&h| g.range(h)).collect();
        let action = (0..g.num_morphisms())
            .map(|a| {
                points
                    .iter()
                    .map(|&h| g.compose(a, h).map_or(0, |ah| index[ah]))
                    .collect()
            })
            .collect();
        Self::new(g, labels, base_point, action).expect("left translation")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, w: usize) -> &str {
        &self.labels[w]
    }

    /// Points over `x`, in the order used for direct-sum coordinates.
    pub fn fiber(&self, x: usize) -> &[usize] {
        &self.fibers[x]
    }

    /// Position of `w` within its fiber.
    pub fn position(&self, w: usize) -> usize {
        self.position[w]
    }

    /// `g.w` for `w` over `s(g)`.
    pub fn act(&self, g: usize, w: usize) -> usize {
        self.action[g][self.position[w]]
    }
}

/// `K ≀_W G = G ⋉ (⊕_W K)` with the shift action `(g.k)_w = k_{g⁻¹.w}`.
pub fn wreath(
    k: &FiniteGroupoid,
    g: &FiniteGroupoid,
    w: &FiberedSpace,
) -> Result<SemidirectProduct, GroupoidError> {
    if w.fibers.len() != g.num_objects() || w.action.len() != g.num_morphisms() {
        return Err(GroupoidError::ActionInvalid("space is fibered over another groupoid".into()));
    }
    let km = k.num_morphisms();
    let mut size = 0usize;
    for m in 0..g.num_morphisms() {
        let f = checked_product(std::iter::repeat_n(km, w.fibers[g.source(m)].len()))?;
        size = size.checked_add(f).filter(|&t| t <= SIZE_CAP).ok_or(GroupoidError::SizeCap {
            needed: usize::MAX,
            cap: SIZE_CAP,
        })?;
    }
    let fibers = (0..g.num_objects())
        .map(|x| direct_sum(std::iter::repeat_n(k, w.fibers[x].len())))
        .collect::<Result<Vec<_>, _>>()?;
    let alpha = (0..g.num_morphisms())
        .map(|m| {
            let (s, r) = (g.source(m), g.range(m));
            let (ws, wr) = (&w.fibers[s], &w.fibers[r]);
            let inv = g.inverse(m);
            // coordinate j' of the image reads coordinate pos(g⁻¹.w') of the input
            let read: Vec<usize> = wr.iter().map(|&v| w.position(w.act(inv, v))).collect();
            (0..fibers[s].num_morphisms())
                .map(|h| {
                    let t = digits(h, km, ws.len());
                    let img: Vec<usize> = read.iter().map(|&j| t[j]).collect();
                    undigits(&img, km)
                })
                .collect()
        })
        .collect();
    let bundle = GroupoidBundle::unchecked(g, fibers, alpha)?;
    semidirect_unchecked(g, bundle)
}

/// `K ≀ G`, with `W = G` fibered by the range map.
pub fn wreath_default(
    k: &FiniteGroupoid,
    g: &FiniteGroupoid,
) -> Result<SemidirectProduct, GroupoidError> {
    wreath(k, g, &FiberedSpace::left_translation(g))
}

/// `Γ ⋉ X` for a finite group acting by the permutations `perms[γ]`; the
/// morphism `(γ, x)` has source `x`, range `γ.x` and index `γ·|X| + x`.
pub fn action_groupoid(
    group: &FiniteGroup,
    perms: &[Vec<usize>],
    weights: Vec<BigRational>,
) -> Result<FiniteGroupoid, GroupoidError> {
    let n = weights.len();
    let bad = |m: &str| Err(GroupoidError::ActionInvalid(m.into()));
    if perms.len() != group.order() {
        return bad("one permutation per group element");
    }
    for p in perms {
        let mut seen = vec![false; n];
        if p.len() != n || p.iter().any(|&x| x >= n || std::mem::replace(&mut seen[x], true)) {
            return bad("not a permutation of the points");
        }
    }
    if perms[group.identity()].iter().enumerate().any(|(i, &j)| i != j) {
        return bad("identity acts nontrivially");
    }
    for a in group.elements() {
        for b in group.elements() {
            let ab = group.mul(a, b);
            if (0..n).any(|x| perms[ab][x] != perms[a][perms[b][x]]) {
                return bad("not an action");
            }
        }
    }
    let objects = weights.into_iter().enumerate().map(|(i, w)| (i.to_string(), w)).collect();
    let morphisms = (0..group.order() * n)
        .map(|m| {
            let (gamma, x) = (m / n, m % n);
            (format!("({},{x})", group.name(gamma)), x, perms[gamma][x])
        })
        .collect();
    FiniteGroupoid::from_fn(objects, morphisms, |a, b| {
        group.mul(a / n, b / n) * n + b % n
    })
}

/// `(B ≀ Γ) ⋉ (X × Y^Γ)` for finite actions `B ↷ Y` and `Γ ↷ X`: the lamp
/// configuration `f : Γ → B` acts by `(f.y)_δ = f(δ).y_δ`, `Γ` shifts
/// `(γ.y)_δ = y_{γ⁻¹δ}` and moves the `X` coordinate.
pub fn wreath_action_groupoid(
    b: &FiniteGroup,
    b_perms: &[Vec<usize>],
    nu: &[BigRational],
    gamma: &FiniteGroup,
    gamma_perms: &[Vec<usize>],
    mu: &[BigRational],
) -> Result<FiniteGroupoid, GroupoidError> {
    let (nb, ng, ny, nx) = (b.order(), gamma.order(), nu.len(), mu.len());
    let lamps = checked_product(std::iter::repeat_n(nb, ng))?;
    let order = checked_product([lamps, ng])?;
    let ys = checked_product(std::iter::repeat_n(ny, ng))?;
    checked_product([order, nx, ys])?;
    if b_perms.len() != nb || gamma_perms.len() != ng {
        return Err(GroupoidError::ActionInvalid("one permutation per group element".into()));
    }
    let shift = |gm: usize, f: &[usize]| -> Vec<usize> {
        let gi = gamma.inv(gm);
        (0..ng).map(|d| f[gamma.mul(gi, d)]).collect()
    };
    let table: Vec<Vec<usize>> = (0..order)
        .map(|a| {
            let (f1, g1) = (digits(a / ng, nb, ng), a % ng);
            (0..order)
                .map(|c| {
                    let (f2, g2) = (digits(c / ng, nb, ng), c % ng);
                    let moved = shift(g1, &f2);
                    let f: Vec<usize> = (0..ng).map(|d| b.mul(f1[d], moved[d])).collect();
                    undigits(&f, nb) * ng + gamma.mul(g1, g2)
                })
                .collect()
        })
        .collect();
    let names = (0..order)
        .map(|a| {
            let f = digits(a / ng, nb, ng);
            let lamp: Vec<&str> = f.iter().map(|&v| b.name(v)).collect();
            format!("[{}]{}", lamp.join(" "), gamma.name(a % ng))
        })
        .collect();
    let group = FiniteGroup::from_table(table, names)
        .map_err(|e| GroupoidError::ActionInvalid(e.to_string()))?;
    let perms: Vec<Vec<usize>> = (0..order)
        .map(|a| {
            let (f, gm) = (digits(a / ng, nb, ng), a % ng);
            (0..nx * ys)
                .map(|p| {
                    let (x, y) = (p / ys, digits(p % ys, ny, ng));
                    let moved = shift(gm, &y);
                    let out: Vec<usize> = (0..ng).map(|d| b_perms[f[d]][moved[d]]).collect();
                    gamma_perms[gm][x] * ys + undigits(&out, ny)
                })
                .collect()
        })
        .collect();
    let weights = (0..nx * ys)
        .map(|p| {
            let (x, y) = (p / ys, digits(p % ys, ny, ng));
            y.iter().fold(mu[x].clone(), |acc, &v| acc * &nu[v])
        })
        .collect();
    action_groupoid(&group, &perms, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{iso_search, uniform_weights, IsoOutcome, DEFAULT_NODE_CAP};

    fn full(n: usize) -> FiniteGroupoid {
        FiniteGroupoid::full_relation(uniform_weights(n))
    }

    fn swap() -> FiniteGroupoid {
        action_groupoid(&FiniteGroup::cyclic(2), &[vec![0, 1], vec![1, 0]], uniform_weights(2))
            .unwrap()
    }

    #[test]
    fn direct_sum_counts() {
        let s = direct_sum([&full(2), &full(2)]).unwrap();
        assert_eq!((s.num_objects(), s.num_morphisms()), (4, 16));
        assert!(s.validate().is_valid());
        assert!(s.is_principal());
        assert_eq!(direct_sum([&full(3)]).unwrap(), full(3));
        assert_eq!(direct_sum([]).unwrap(), FiniteGroupoid::point());
    }

    #[test]
    fn semidirect_examples() {
        let g = full(2);
        let trivial = semidirect(&g, GroupoidBundle::trivial(&g)).unwrap();
        assert_eq!(trivial.groupoid().num_morphisms(), 4);
        let k = full(3);
        let point = FiniteGroupoid::point();
        let copy = semidirect(&point, GroupoidBundle::constant(&point, &k)).unwrap();
        assert_eq!(copy.groupoid().num_morphisms(), 9);
        let p = semidirect(&g, GroupoidBundle::constant(&g, &full(2))).unwrap();
        assert_eq!(p.groupoid().num_morphisms(), 16);
        assert!(p.groupoid().validate().is_valid());
        for m in 0..16 {
            let (a, b) = p.pair(m);
            assert_eq!(p.morphism(a, b), m);
        }
    }

    #[test]
    fn bundle_rejects_bad_transport() {
        let g = full(2);
        let k = full(2);
        // only one of the two non-unit base morphisms swaps the fiber
        let mut alpha = vec![(0..4).collect::<Vec<_>>(); 4];
        alpha[1] = vec![3, 2, 1, 0];
        let err = GroupoidBundle::new(&g, vec![k.clone(), k], alpha).unwrap_err();
        assert!(matches!(err, GroupoidError::ActionInvalid(_)));
    }

    #[test]
    fn wreath_counts() {
        let w = wreath_default(&full(2), &full(2)).unwrap();
        let g = w.groupoid();
        assert_eq!((g.num_morphisms(), g.num_objects()), (64, 8));
        assert!(g.validate().is_valid());
        let u = wreath_default(&FiniteGroupoid::point(), &full(3)).unwrap();
        assert_eq!(u.groupoid().num_morphisms(), 9);
    }

    #[test]
    fn wreath_of_actions_matches_action_of_wreath() {
        let c2 = FiniteGroup::cyclic(2);
        let perms = [vec![0, 1], vec![1, 0]];
        let w = wreath_default(&swap(), &swap()).unwrap();
        let a = wreath_action_groupoid(
            &c2,
            &perms,
            &uniform_weights(2),
            &c2,
            &perms,
            &uniform_weights(2),
        )
        .unwrap();
        assert_eq!(a.num_morphisms(), 64);
        assert!(a.validate().is_valid());
        assert!(matches!(iso_search(w.groupoid(), &a, DEFAULT_NODE_CAP), IsoOutcome::Isomorphic(_)));
    }

    #[test]
    fn restricted_relation_is_restriction_of_relation() {
        let g = FiniteGroupoid::equivalence_relation(&[0, 0, 1, 1, 0], uniform_weights(5)).unwrap();
        let d = [0, 2, 4];
        let r = g.restrict(&d).unwrap().orbit_relation();
        let expected: std::collections::BTreeSet<_> = g
            .orbit_relation()
            .into_iter()
            .filter(|(a, b)| d.contains(a) && d.contains(b))
            .map(|(a, b)| (d.iter().position(|&v| v == a).unwrap(), d.iter().position(|&v| v == b).unwrap()))
            .collect();
        assert_eq!(r, expected);
    }
}
