//! Perfect matchings of `2ℓ` vertices and the restricted subsets that
//! survive into photon-number cumulants.
//!
//! Four families are generated here:
//!
//! * PMP: loop-free perfect matchings, `(m − 1)!!` of them;
//! * SPM: matchings that may also cover vertices with loops, counted by the
//!   telephone numbers `T(m)`;
//! * RPMP: loop-free matchings whose union with `Y = {(k, k + ℓ)}` is a single
//!   alternating cycle, `(2ℓ − 2)!!` of them;
//! * RSPM: RPMP plus every RPMP element with one edge broken into two loops,
//!   `(ℓ + 1)(2ℓ − 2)!!` of them.
//!
//! All vertex indices are 0-based; use [`PairMatching::from_one_based`] to
//! read matchings written in the usual 1-based notation.

use std::collections::HashSet;

use crate::error::{guard, Error, Result};

/// Largest vertex count accepted by [`gen_pmp`].
pub const MAX_PMP_VERTICES: usize = 16;
/// Largest vertex count accepted by [`gen_spm`].
pub const MAX_SPM_VERTICES: usize = 14;
/// Largest mode count accepted by [`gen_rpmp`] and [`gen_rspm`].
pub const MAX_RESTRICTED_MODES: usize = 9;

/// A set of disjoint vertex pairs plus loops.
///
/// Always stored in canonical form: each pair has `i < j`, pairs are sorted
/// lexicographically and loops are sorted, so two matchings covering the
/// same edges compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairMatching {
    pairs: Vec<(usize, usize)>,
    loops: Vec<usize>,
}

impl PairMatching {
    /// Builds a matching and brings it into canonical form.
    ///
    /// Fails when a pair joins a vertex to itself or a vertex is used twice.
    pub fn new(pairs: Vec<(usize, usize)>, loops: Vec<usize>) -> Result<Self> {
        let mut seen = HashSet::new();
        for &(i, j) in &pairs {
            if i == j {
                return Err(Error::Domain(format!("pair ({i}, {j}) joins a vertex to itself")));
            }
            if !seen.insert(i) || !seen.insert(j) {
                return Err(Error::Domain(format!("vertex used twice in pair ({i}, {j})")));
            }
        }
        for &v in &loops {
            if !seen.insert(v) {
                return Err(Error::Domain(format!("vertex {v} used twice")));
            }
        }
        Ok(Self::canonical(pairs, loops))
    }

    /// Same as [`PairMatching::new`] with 1-based vertex labels.
    pub fn from_one_based(pairs: &[(usize, usize)], loops: &[usize]) -> Result<Self> {
        let shift = |v: usize| {
            v.checked_sub(1)
                .ok_or_else(|| Error::Domain("1-based vertex labels start at 1".into()))
        };
        let pairs = pairs
            .iter()
            .map(|&(i, j)| Ok((shift(i)?, shift(j)?)))
            .collect::<Result<Vec<_>>>()?;
        let loops = loops.iter().map(|&v| shift(v)).collect::<Result<Vec<_>>>()?;
        Self::new(pairs, loops)
    }

    fn canonical(mut pairs: Vec<(usize, usize)>, mut loops: Vec<usize>) -> Self {
        for p in pairs.iter_mut() {
            if p.0 > p.1 {
                *p = (p.1, p.0);
            }
        }
        pairs.sort_unstable();
        loops.sort_unstable();
        Self { pairs, loops }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn loops(&self) -> &[usize] {
        &self.loops
    }

    /// Number of vertices touched by the matching.
    pub fn vertex_count(&self) -> usize {
        2 * self.pairs.len() + self.loops.len()
    }

    /// True when every vertex in `0..n` is covered exactly once.
    pub fn is_perfect_cover(&self, n: usize) -> bool {
        let mut hit = vec![false; n];
        let mut mark = |v: usize| {
            if v >= n || hit[v] {
                false
            } else {
                hit[v] = true;
                true
            }
        };
        for &(i, j) in &self.pairs {
            if !mark(i) || !mark(j) {
                return false;
            }
        }
        for &v in &self.loops {
            if !mark(v) {
                return false;
            }
        }
        hit.into_iter().all(|h| h)
    }

    /// Partner of every vertex in `0..n`; a looped vertex is its own partner.
    /// Assumes a perfect cover.
    pub(crate) fn partner_table(&self, n: usize) -> Vec<usize> {
        let mut partner = vec![usize::MAX; n];
        for &(i, j) in &self.pairs {
            partner[i] = j;
            partner[j] = i;
        }
        for &v in &self.loops {
            partner[v] = v;
        }
        partner
    }
}

/// The reference matching `Y = {(0, ℓ), (1, ℓ + 1), …, (ℓ − 1, 2ℓ − 1)}` that
/// pairs the two vertices of every mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WalkBase {
    ell: usize,
}

impl WalkBase {
    pub fn new(ell: usize) -> Self {
        Self { ell }
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn y_edges(&self) -> Vec<(usize, usize)> {
        (0..self.ell).map(|k| (k, k + self.ell)).collect()
    }

    /// The vertex joined to `v` by `Y`.
    pub fn y_partner(&self, v: usize) -> usize {
        if v < self.ell {
            v + self.ell
        } else {
            v - self.ell
        }
    }
}

fn check_even_vertices(m: usize, max: usize) -> Result<()> {
    if m == 0 || m % 2 != 0 {
        return Err(Error::Domain(format!("vertex count must be even and positive, got {m}")));
    }
    guard(m, max, "vertex count")
}

/// All loop-free perfect matchings of `m` vertices, in lexicographic order.
pub fn gen_pmp(m: usize) -> Result<Vec<PairMatching>> {
    check_even_vertices(m, MAX_PMP_VERTICES)?;
    let mut out = Vec::new();
    let mut used = vec![false; m];
    let mut pairs = Vec::with_capacity(m / 2);
    extend_matchings(&mut used, &mut pairs, &mut Vec::new(), false, &mut out);
    Ok(out)
}

/// All matchings of `m` vertices where each vertex is either paired or
/// carries a loop (the involutions of `m` elements).
pub fn gen_spm(m: usize) -> Result<Vec<PairMatching>> {
    check_even_vertices(m, MAX_SPM_VERTICES)?;
    let mut out = Vec::new();
    let mut used = vec![false; m];
    extend_matchings(&mut used, &mut Vec::new(), &mut Vec::new(), true, &mut out);
    Ok(out)
}

fn extend_matchings(
    used: &mut [bool],
    pairs: &mut Vec<(usize, usize)>,
    loops: &mut Vec<usize>,
    allow_loops: bool,
    out: &mut Vec<PairMatching>,
) {
    let Some(first) = used.iter().position(|&u| !u) else {
        out.push(PairMatching::canonical(pairs.clone(), loops.clone()));
        return;
    };
    used[first] = true;
    if allow_loops {
        loops.push(first);
        extend_matchings(used, pairs, loops, allow_loops, out);
        loops.pop();
    }
    for partner in first + 1..used.len() {
        if used[partner] {
            continue;
        }
        used[partner] = true;
        pairs.push((first, partner));
        extend_matchings(used, pairs, loops, allow_loops, out);
        pairs.pop();
        used[partner] = false;
    }
    used[first] = false;
}

/// Every permutation of `0..n`, in lexicographic order.
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for idx in 0..rest.len() {
            let v = rest.remove(idx);
            prefix.push(v);
            rec(prefix, rest, out);
            prefix.pop();
            rest.insert(idx, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut (0..n).collect(), &mut out);
    out
}

/// The fiducial restricted matching `{(k, ℓ + k + 1) : k < ℓ − 1} ∪ {(ℓ − 1, ℓ)}`.
pub fn fiducial_matching(ell: usize) -> Result<PairMatching> {
    if ell == 0 {
        return Err(Error::Domain("mode count must be positive".into()));
    }
    let mut pairs: Vec<(usize, usize)> = (0..ell - 1).map(|k| (k, ell + k + 1)).collect();
    pairs.push((ell - 1, ell));
    Ok(PairMatching::canonical(pairs, Vec::new()))
}

/// Loop-free matchings that close into a single `Y`-alternating cycle.
///
/// Built from [`fiducial_matching`] by the `2^(ℓ−1)` products of swaps
/// `k ↔ k + ℓ` over modes `1..ℓ` and the `(ℓ − 1)!` joint relabellings of
/// those modes; mode 0 stays fixed, which makes every image distinct.
pub fn gen_rpmp(ell: usize) -> Result<Vec<PairMatching>> {
    if ell == 0 {
        return Err(Error::Domain("mode count must be positive".into()));
    }
    guard(ell, MAX_RESTRICTED_MODES, "mode count")?;
    let fid = fiducial_matching(ell)?;
    let free = ell - 1;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for perm in permutations(free) {
        // mode relabelling fixing mode 0
        let relabel = |k: usize| if k == 0 { 0 } else { perm[k - 1] + 1 };
        for mask in 0..(1usize << free) {
            let image = |v: usize| {
                let (mode, half) = (v % ell, v / ell);
                let mode = relabel(mode);
                let flipped = mode > 0 && (mask >> (mode - 1)) & 1 == 1;
                mode + ell * (half ^ usize::from(flipped))
            };
            let pairs = fid.pairs.iter().map(|&(i, j)| (image(i), image(j))).collect();
            let x = PairMatching::canonical(pairs, Vec::new());
            if seen.insert(x.clone()) {
                out.push(x);
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// [`gen_rpmp`] plus, for every element and every one of its edges, the
/// matching with that edge replaced by two loops.
pub fn gen_rspm(ell: usize) -> Result<Vec<PairMatching>> {
    let base = gen_rpmp(ell)?;
    let mut seen: HashSet<PairMatching> = base.iter().cloned().collect();
    let mut out = base.clone();
    for x in &base {
        for broken in 0..x.pairs.len() {
            let (i, j) = x.pairs[broken];
            let mut pairs = x.pairs.clone();
            pairs.remove(broken);
            let y = PairMatching::canonical(pairs, vec![i, j]);
            if seen.insert(y.clone()) {
                out.push(y);
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Whether `x ∪ Y` is a single alternating walk visiting all `2ℓ` vertices.
///
/// Without loops the walk must be a closed cycle; with loops there must be
/// exactly two, sitting at the two ends of an open walk that starts and
/// finishes with a `Y` edge. Returns `false` for anything that is not a
/// perfect cover of `2ℓ` vertices.
pub fn is_y_alternating(x: &PairMatching, ell: usize) -> bool {
    let n = 2 * ell;
    if ell == 0 || !x.is_perfect_cover(n) {
        return false;
    }
    let base = WalkBase::new(ell);
    let partner = x.partner_table(n);
    let mut visited = 0usize;
    match x.loops.len() {
        0 => {
            // 0 -x-> a -Y-> b -x-> ... back to 0
            let mut v = 0;
            loop {
                let across = partner[v];
                visited += 2;
                v = base.y_partner(across);
                if v == 0 {
                    break;
                }
                if visited >= n {
                    return false;
                }
            }
            visited == n
        }
        2 => {
            // loop at start -Y-> u -x-> w -Y-> ... -> loop at end
            let start = x.loops[0];
            let mut v = start;
            loop {
                let u = base.y_partner(v);
                visited += 2;
                if partner[u] == u {
                    return visited == n && u == x.loops[1];
                }
                if visited >= n {
                    return false;
                }
                v = partner[u];
            }
        }
        _ => false,
    }
}

/// `(2k − 1)!!` for `m = 2k`; 1 for `m = 0`.
pub fn double_factorial_odd(m: usize) -> u128 {
    (1..m).step_by(2).map(|v| v as u128).product()
}

/// Telephone number `T(n)`: the number of involutions of `n` elements.
pub fn telephone(n: usize) -> u128 {
    let (mut prev, mut cur) = (1u128, 1u128);
    for k in 1..n {
        let next = cur + k as u128 * prev;
        prev = cur;
        cur = next;
    }
    if n == 0 {
        1
    } else {
        cur
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Involutions of `0..n` by testing every permutation.
    fn involutions_by_brute_force(n: usize) -> usize {
        permutations(n)
            .into_iter()
            .filter(|p| (0..n).all(|i| p[p[i]] == i))
            .count()
    }

    #[test]
    fn pmp_small_lists() {
        assert_eq!(gen_pmp(2).unwrap(), vec![PairMatching::new(vec![(0, 1)], vec![]).unwrap()]);
        let four: HashSet<_> = gen_pmp(4).unwrap().into_iter().collect();
        let expected: HashSet<_> = [
            PairMatching::from_one_based(&[(1, 3), (2, 4)], &[]).unwrap(),
            PairMatching::from_one_based(&[(1, 2), (3, 4)], &[]).unwrap(),
            PairMatching::from_one_based(&[(1, 4), (2, 3)], &[]).unwrap(),
        ]
        .into_iter()
        .collect();
        assert_eq!(four, expected);
        assert_eq!(gen_pmp(6).unwrap().len(), 15);
    }

    #[test]
    fn pmp_rejects_bad_sizes() {
        assert!(matches!(gen_pmp(3), Err(Error::Domain(_))));
        assert!(matches!(gen_pmp(0), Err(Error::Domain(_))));
        assert!(matches!(gen_pmp(18), Err(Error::Resource(_))));
        assert!(matches!(gen_spm(16), Err(Error::Resource(_))));
        assert!(matches!(gen_rpmp(10), Err(Error::Resource(_))));
        assert!(matches!(gen_rspm(0), Err(Error::Domain(_))));
    }

    #[test]
    fn spm_small_lists() {
        let two = gen_spm(2).unwrap();
        assert_eq!(two.len(), 2);
        assert!(two.contains(&PairMatching::new(vec![(0, 1)], vec![]).unwrap()));
        assert!(two.contains(&PairMatching::new(vec![], vec![0, 1]).unwrap()));
        assert_eq!(gen_spm(4).unwrap().len(), 10);
        assert_eq!(gen_spm(6).unwrap().len(), involutions_by_brute_force(6));
        assert_eq!(involutions_by_brute_force(6), 76);
    }

    #[test]
    fn counts_against_involution_enumeration() {
        for m in (2..=10).step_by(2) {
            assert_eq!(gen_pmp(m).unwrap().len() as u128, double_factorial_odd(m));
            let spm = gen_spm(m).unwrap();
            assert_eq!(spm.len(), involutions_by_brute_force(m));
            assert_eq!(spm.len() as u128, telephone(m));
            let distinct: HashSet<_> = spm.iter().collect();
            assert_eq!(distinct.len(), spm.len());
        }
    }

    #[test]
    fn restricted_small_cases() {
        assert_eq!(gen_rpmp(1).unwrap(), vec![PairMatching::new(vec![(0, 1)], vec![]).unwrap()]);
        assert_eq!(gen_rpmp(2).unwrap().len(), 2);
        assert_eq!(gen_rpmp(4).unwrap().len(), 48);
        let rspm1 = gen_rspm(1).unwrap();
        assert_eq!(rspm1.len(), 2);
        let spm2: HashSet<_> = gen_spm(2).unwrap().into_iter().collect();
        assert_eq!(rspm1.into_iter().collect::<HashSet<_>>(), spm2);
        assert_eq!(gen_rspm(2).unwrap().len(), 6);
        assert_eq!(gen_rspm(3).unwrap().len(), 32);
    }

    #[test]
    fn y_alternating_examples() {
        for ell in 1..=7 {
            assert!(is_y_alternating(&fiducial_matching(ell).unwrap(), ell));
        }
        let y = PairMatching::new(WalkBase::new(2).y_edges(), vec![]).unwrap();
        assert!(!is_y_alternating(&y, 2));
        let x = PairMatching::new(vec![(0, 2), (1, 3)], vec![]).unwrap();
        assert!(!is_y_alternating(&x, 2), "(0,2)(1,3) is Y itself for ell = 2");
        let x = PairMatching::new(vec![(0, 3), (1, 2)], vec![]).unwrap();
        assert!(is_y_alternating(&x, 2));
        let x = PairMatching::new(vec![(0, 1), (2, 3)], vec![]).unwrap();
        assert!(is_y_alternating(&x, 2));
        // open walk with loops at both ends: 0 -Y- 2, 2 -x- 1, 1 -Y- 3
        let x = PairMatching::new(vec![(1, 2)], vec![0, 3]).unwrap();
        assert!(is_y_alternating(&x, 2));
        // loops on the two vertices of one mode leave the other mode isolated
        let x = PairMatching::new(vec![(1, 3)], vec![0, 2]).unwrap();
        assert!(!is_y_alternating(&x, 2));
        let x = PairMatching::new(vec![], vec![0, 1, 2, 3]).unwrap();
        assert!(!is_y_alternating(&x, 2));
        let partial = PairMatching::new(vec![(0, 1)], vec![]).unwrap();
        assert!(!is_y_alternating(&partial, 2));
    }

    #[test]
    fn restricted_sets_have_expected_shape() {
        for ell in 1..=5 {
            let rpmp = gen_rpmp(ell).unwrap();
            assert!(rpmp.iter().all(|x| x.loops().is_empty() && is_y_alternating(x, ell)));
            let rspm = gen_rspm(ell).unwrap();
            let rpmp_set: HashSet<_> = rpmp.iter().collect();
            for x in rspm.iter().filter(|x| !rpmp_set.contains(x)) {
                assert_eq!(x.loops().len(), 2);
                assert!(is_y_alternating(x, ell));
            }
        }
    }

    #[test]
    fn canonical_form_compares_by_value() {
        let a = PairMatching::new(vec![(3, 1), (0, 2)], vec![]).unwrap();
        let b = PairMatching::new(vec![(0, 2), (1, 3)], vec![]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.pairs(), &[(0, 2), (1, 3)]);
        assert!(PairMatching::new(vec![(0, 0)], vec![]).is_err());
        assert!(PairMatching::new(vec![(0, 1)], vec![1]).is_err());
        assert!(PairMatching::from_one_based(&[(0, 1)], &[]).is_err());
    }

    #[test]
    fn telephone_numbers() {
        let known = [1u128, 1, 2, 4, 10, 26, 76, 232, 764, 2620, 9496];
        for (n, &t) in known.iter().enumerate() {
            assert_eq!(telephone(n), t);
        }
    }
}
