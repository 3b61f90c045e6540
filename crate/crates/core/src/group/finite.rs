//! Dense finite groups indexed by `0..n`.

use std::collections::{HashMap, VecDeque};

use super::{Element, Group, GroupError};

/// A finite group with elements `0..order()` and a dense multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
    names: Vec<String>,
}

impl FiniteGroup {
    pub fn from_table(table: Vec<Vec<usize>>, names: Vec<String>) -> Result<Self, GroupError> {
        let n = table.len();
        if n == 0 || table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(GroupError::InvalidSpec("table is not a closed square".into()));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| GroupError::InvalidSpec("no identity".into()))?;
        let mut inverse = vec![0; n];
        for x in 0..n {
            inverse[x] = (0..n)
                .find(|&y| table[x][y] == identity)
                .ok_or_else(|| GroupError::InvalidSpec(format!("{x} has no inverse")))?;
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(GroupError::InvalidSpec("not associative".into()));
                    }
                }
            }
        }
        let names = if names.len() == n {
            names
        } else {
            (0..n).map(|i| i.to_string()).collect()
        };
        Ok(FiniteGroup {
            table,
            identity,
            inverse,
            names,
        })
    }

    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    /// `Z/n` with element `k` the residue `k`.
    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        FiniteGroup {
            table,
            identity: 0,
            inverse: (0..n).map(|a| (n - a) % n).collect(),
            names: (0..n).map(|i| i.to_string()).collect(),
        }
    }

    /// The symmetric group on `0..n` together with the permutation each
    /// element index stands for. Permutations are listed lexicographically
    /// and compose as functions: `(στ)(i) = σ(τ(i))`.
    pub fn symmetric(n: usize) -> (Self, Vec<Vec<usize>>) {
        let mut perms = Vec::new();
        permutations(&mut (0..n).collect(), 0, &mut perms);
        perms.sort();
        let index: HashMap<Vec<usize>, usize> =
            perms.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        let table = perms
            .iter()
            .map(|s| {
                perms
                    .iter()
                    .map(|t| index[&t.iter().map(|&i| s[i]).collect::<Vec<_>>()])
                    .collect()
            })
            .collect();
        let names = perms
            .iter()
            .map(|p| p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(""))
            .collect();
        let g = Self::from_table(table, names).expect("symmetric group table");
        (g, perms)
    }

    /// Dense copy of a finite [`Group`], with the element each index stands for.
    pub fn from_group(group: &Group) -> Result<(Self, Vec<Element>), GroupError> {
        let elems = group.elements()?;
        let index: HashMap<&Element, usize> =
            elems.iter().enumerate().map(|(i, g)| (g, i)).collect();
        let table = elems
            .iter()
            .map(|a| elems.iter().map(|b| index[&group.mul(a, b)]).collect())
            .collect();
        let names = elems.iter().map(|g| group.format(g)).collect();
        Ok((Self::from_table(table, names)?, elems))
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn name(&self, a: usize) -> &str {
        &self.names[a]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order()
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order()).all(|a| (0..a).all(|b| self.table[a][b] == self.table[b][a]))
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// A small generating set found greedily.
    pub fn generating_set(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut span = vec![false; self.order()];
        span[self.identity] = true;
        for g in 0..self.order() {
            if !span[g] {
                gens.push(g);
                span = self.closure(&gens);
            }
        }
        gens
    }

    fn closure(&self, gens: &[usize]) -> Vec<bool> {
        let mut span = vec![false; self.order()];
        span[self.identity] = true;
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if !span[y] {
                    span[y] = true;
                    queue.push_back(y);
                }
            }
        }
        span
    }

    /// Extends generator images to a homomorphism `self → target`, if one exists.
    pub fn extend_hom(
        &self,
        gens: &[usize],
        images: &[usize],
        target: &FiniteGroup,
    ) -> Option<Vec<usize>> {
        let mut map = vec![usize::MAX; self.order()];
        map[self.identity] = target.identity;
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for (&g, &img) in gens.iter().zip(images) {
                let y = self.mul(x, g);
                let fy = target.mul(map[x], img);
                if map[y] == usize::MAX {
                    map[y] = fy;
                    queue.push_back(y);
                } else if map[y] != fy {
                    return None;
                }
            }
        }
        map.iter().all(|&v| v != usize::MAX).then_some(map)
    }

    /// Every homomorphism `self → target`, as index maps, in lexicographic
    /// order of generator images.
    pub fn homomorphisms_to(&self, target: &FiniteGroup) -> Vec<Vec<usize>> {
        let gens = self.generating_set();
        let mut out = Vec::new();
        let mut images = vec![0usize; gens.len()];
        loop {
            let ok = gens
                .iter()
                .zip(&images)
                .all(|(&g, &i)| self.element_order(g).is_multiple_of(target.element_order(i)));
            if ok {
                if let Some(m) = self.extend_hom(&gens, &images, target) {
                    out.push(m);
                }
            }
            let mut k = 0;
            loop {
                if k == images.len() {
                    return out;
                }
                images[k] += 1;
                if images[k] < target.order() {
                    break;
                }
                images[k] = 0;
                k += 1;
            }
        }
    }

    /// Checks `map` is a bijective homomorphism `self → target`.
    pub fn is_isomorphism(&self, map: &[usize], target: &FiniteGroup) -> bool {
        if map.len() != self.order() || self.order() != target.order() {
            return false;
        }
        let mut hit = vec![false; target.order()];
        for &m in map {
            if m >= target.order() || std::mem::replace(&mut hit[m], true) {
                return false;
            }
        }
        self.elements().all(|a| {
            self.elements()
                .all(|b| map[self.mul(a, b)] == target.mul(map[a], map[b]))
        })
    }

    /// Every isomorphism `self → target`.
    pub fn isomorphisms_to(&self, target: &FiniteGroup) -> Vec<Vec<usize>> {
        if self.order() != target.order() {
            return Vec::new();
        }
        self.homomorphisms_to(target)
            .into_iter()
            .filter(|m| self.is_isomorphism(m, target))
            .collect()
    }
}

fn permutations(cur: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == cur.len() {
        out.push(cur.clone());
        return;
    }
    for i in k..cur.len() {
        cur.swap(k, i);
        permutations(cur, k + 1, out);
        cur.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;

    #[test]
    fn symmetric_three() {
        let (s3, perms) = FiniteGroup::symmetric(3);
        assert_eq!(s3.order(), 6);
        assert!(!s3.is_abelian());
        assert_eq!(perms[s3.identity()], vec![0, 1, 2]);
        assert_eq!(s3.isomorphisms_to(&s3).len(), 6);
    }

    #[test]
    fn homomorphism_counts() {
        // |Hom(Z/4, Z/2)| = 2, |Hom(Z/2 x Z/2, Z/2)| = 4
        assert_eq!(FiniteGroup::cyclic(4).homomorphisms_to(&FiniteGroup::cyclic(2)).len(), 2);
        let v4 = FiniteGroup::from_table(
            vec![vec![0, 1, 2, 3], vec![1, 0, 3, 2], vec![2, 3, 0, 1], vec![3, 2, 1, 0]],
            vec![],
        )
        .unwrap();
        assert_eq!(v4.homomorphisms_to(&FiniteGroup::cyclic(2)).len(), 4);
        assert!(FiniteGroup::cyclic(4).isomorphisms_to(&v4).is_empty());
    }

    #[test]
    fn from_group_matches_structure() {
        let g = Group::new(GroupSpec::wreath(GroupSpec::cyclic(2, "s"), GroupSpec::cyclic(2, "t")))
            .unwrap();
        let (d, _) = FiniteGroup::from_group(&g).unwrap();
        assert_eq!(d.order(), 8);
        assert!(!d.is_abelian());
    }
}
