//! Photon-number moments and cumulants.
//!
//! Moments expand powers of the number operator into normal-ordered products
//! with Stirling weights and evaluate each product as a loop Hafnian:
//!
//! ```text
//! ⟨n_1^p_1 … n_ℓ^p_ℓ⟩ = Σ_j Π_i S(p_i, j_i) · lhaf fdiag(A_{j⊕j}, ζ̄*_{j⊕j})
//! ```
//!
//! Cumulants come either from the Möbius sum over set partitions of the
//! corresponding moments or directly as the loop Montrealer of the restricted
//! adjacency matrix. The moment-generating function and a finite-difference
//! differentiator of it serve as an independent oracle.

use std::collections::HashMap;

use nalgebra::SymmetricEigen;
use rayon::prelude::*;

use crate::error::{guard, Error, Result};
use crate::gaussian::{GaussianState, SOrder};
use crate::matfunc::{
    loop_hafnian, loop_montrealer_fast, loop_montrealer_ref, montrealer_fast, montrealer_ref, reduction,
    reduction_vec,
};
use crate::reduce::ordered_sum;
use crate::{CMatrix, CVector, C64};

/// Largest argument accepted by [`stirling2`].
pub const MAX_STIRLING: u32 = 20;
/// Largest dimension of the loop Hafnians a [`ModePattern`] may expand into.
pub const MAX_EXPANDED_DIM: usize = 24;
/// Largest total order accepted by [`moment_via_fd`].
pub const MAX_FD_ORDER: usize = 4;
/// Largest multiset size accepted by [`cumulant_via_partitions`].
pub const MAX_PARTITION_ORDER: usize = 10;

const IMAG_TOL: f64 = 1e-8;

/// Stirling number of the second kind `{m n}`, the number of ways to split
/// `m` labelled items into `n` non-empty blocks, from
/// `{m n} = Σ_k (−1)^(n−k) C(n, k) k^m / n!`.
pub fn stirling2(m: u32, n: u32) -> Result<u64> {
    if n < 1 || n > m || m > MAX_STIRLING {
        return Err(Error::Domain(format!("stirling2 needs 1 <= n <= m <= {MAX_STIRLING}, got ({m}, {n})")));
    }
    let overflow = || Error::Numerical(format!("integer overflow in stirling2({m}, {n})"));
    let mut total: i128 = 0;
    let mut binom: i128 = 1;
    for k in 0..=n {
        if k > 0 {
            binom = binom * i128::from(n - k + 1) / i128::from(k);
        }
        let power = i128::from(k).checked_pow(m).ok_or_else(overflow)?;
        let term = binom.checked_mul(power).ok_or_else(overflow)?;
        total = if (n - k) % 2 == 0 { total.checked_add(term) } else { total.checked_sub(term) }.ok_or_else(overflow)?;
    }
    let factorial: i128 = (1..=i128::from(n)).product();
    u64::try_from(total / factorial).map_err(|_| overflow())
}

/// Exponents `p_i` of `⟨n_1^p_1 … n_ℓ^p_ℓ⟩`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModePattern {
    p: Vec<usize>,
}

impl ModePattern {
    /// At least one exponent must be positive, and `2 Σ p_i` (the size of
    /// the largest loop Hafnian in the expansion) may not exceed
    /// [`MAX_EXPANDED_DIM`].
    pub fn new(p: Vec<usize>) -> Result<Self> {
        if p.iter().all(|&x| x == 0) {
            return Err(Error::Domain("mode pattern needs at least one positive exponent".into()));
        }
        let total: usize = p.iter().sum();
        guard(2 * total, MAX_EXPANDED_DIM, "expanded loop hafnian dimension")?;
        Ok(Self { p })
    }

    /// Pattern counting how often each of `ell` modes occurs in `modes`.
    pub fn from_modes(modes: &[usize], ell: usize) -> Result<Self> {
        let mut p = vec![0; ell];
        for &k in modes {
            if k >= ell {
                return Err(Error::Domain(format!("mode {k} out of range for {ell} modes")));
            }
            p[k] += 1;
        }
        Self::new(p)
    }

    pub fn exponents(&self) -> &[usize] {
        &self.p
    }

    pub fn order(&self) -> usize {
        self.p.iter().sum()
    }

    fn check_fits(&self, ell: usize) -> Result<()> {
        if self.p.len() > ell {
            return Err(Error::Domain(format!("pattern has {} exponents for {ell} modes", self.p.len())));
        }
        Ok(())
    }
}

fn real_part(v: C64, what: &str) -> Result<f64> {
    if v.im.abs() > IMAG_TOL * (1.0 + v.norm()) {
        return Err(Error::Numerical(format!("{what} has imaginary part {:e} (value {v})", v.im)));
    }
    Ok(v.re)
}

/// All `j` with `1 ≤ j_i ≤ p_i` where `p_i > 0` and `j_i = 0` elsewhere.
fn j_vectors(p: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0; p.len()]];
    for (i, &pi) in p.iter().enumerate() {
        if pi == 0 {
            continue;
        }
        out = out
            .into_iter()
            .flat_map(|j| {
                (1..=pi).map(move |ji| {
                    let mut next = j.clone();
                    next[i] = ji;
                    next
                })
            })
            .collect();
    }
    out
}

/// `⟨n_1^p_1 … n_ℓ^p_ℓ⟩`. A pattern shorter than the mode count leaves the
/// trailing modes out.
pub fn photon_moment(state: &GaussianState, pattern: &ModePattern) -> Result<f64> {
    let ell = state.ell();
    pattern.check_fits(ell)?;
    let mut p = pattern.exponents().to_vec();
    p.resize(ell, 0);
    let a = state.adjacency(SOrder::Normal);
    let zc = state.zeta_conj();
    let mut total = C64::new(0.0, 0.0);
    for j in j_vectors(&p) {
        let mut weight = 1u64;
        for (&pi, &ji) in p.iter().zip(&j) {
            if pi > 0 {
                weight *= stirling2(pi as u32, ji as u32)?;
            }
        }
        let jj: Vec<usize> = j.iter().chain(&j).copied().collect();
        let mut q = reduction(a.matrix(), &jj)?;
        q.set_diagonal(&reduction_vec(&zc, &jj)?);
        total += loop_hafnian(&q)? * weight as f64;
    }
    real_part(total, "photon moment")
}

fn check_t(state: &GaussianState, t: &[f64]) -> Result<()> {
    if t.len() != state.ell() {
        return Err(Error::Domain(format!("t has length {} for {} modes", t.len(), state.ell())));
    }
    if t.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("t must be finite".into()));
    }
    Ok(())
}

/// Quadratic form and log-determinant making up `log M(t)`.
fn generating_parts(state: &GaussianState, t: &[f64]) -> Result<(f64, f64)> {
    check_t(state, t)?;
    let ell = state.ell();
    let g: Vec<f64> = (0..2 * ell).map(|i| t[i % ell].exp_m1()).collect();
    let sigma = state.sigma(SOrder::Normal);
    // E[exp(n·t)] ≤ E[exp(n·t₊)], which is finite exactly when
    // I − √G₊ Σ √G₊ is positive definite.
    let root: Vec<f64> = g.iter().map(|&x| x.max(0.0).sqrt()).collect();
    let h = CMatrix::from_fn(2 * ell, 2 * ell, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        C64::new(delta, 0.0) - sigma[(i, j)] * (root[i] * root[j])
    });
    let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    if ell > 0 && SymmetricEigen::new(h).eigenvalues.min() <= 0.0 {
        return Err(Error::Domain(format!("divergent generating function at t = {t:?}")));
    }
    let gm = CMatrix::from_diagonal(&CVector::from_iterator(2 * ell, g.iter().map(|&x| C64::new(x, 0.0))));
    // det(I − GΣ) = det(I − ΣG); the quadratic form needs (I − ΣG)⁻¹
    let kernel = CMatrix::identity(2 * ell, 2 * ell) - &sigma * &gm;
    let lu = kernel.clone().lu();
    let det = real_part(lu.determinant(), "generating function determinant")?;
    if det <= 0.0 {
        return Err(Error::Domain(format!("divergent generating function at t = {t:?}")));
    }
    let zeta = state.zeta();
    let quad = if state.is_displaced() {
        let solved = lu
            .solve(&zeta)
            .ok_or_else(|| Error::Domain(format!("divergent generating function at t = {t:?}")))?;
        let v = zeta.adjoint() * gm * solved;
        0.5 * real_part(v[(0, 0)], "generating function exponent")?
    } else {
        0.0
    };
    Ok((quad, det.ln()))
}

/// Moment-generating function `M(t) = ⟨exp(n·t)⟩`.
pub fn mgf(state: &GaussianState, t: &[f64]) -> Result<f64> {
    let (quad, log_det) = generating_parts(state, t)?;
    Ok((quad - 0.5 * log_det).exp())
}

/// Cumulant-generating function `K(t) = log M(t)`, evaluated from the
/// quadratic form and log-determinant without forming `M`.
pub fn cgf(state: &GaussianState, t: &[f64]) -> Result<f64> {
    let (quad, log_det) = generating_parts(state, t)?;
    Ok(quad - 0.5 * log_det)
}

/// Second-order central stencils `(offset, weight)` for the `k`-th
/// derivative, in units of the step.
fn stencil(k: usize) -> &'static [(i32, f64)] {
    match k {
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        _ => unreachable!("derivative order checked by the caller"),
    }
}

fn mixed_difference(state: &GaussianState, p: &[usize], h: f64) -> Result<f64> {
    let active: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0).collect();
    let mut points: Vec<(Vec<f64>, f64)> = vec![(vec![0.0; state.ell()], 1.0)];
    for &i in &active {
        points = points
            .into_iter()
            .flat_map(|(t, w)| {
                stencil(p[i]).iter().map(move |&(off, c)| {
                    let mut next = t.clone();
                    next[i] = f64::from(off) * h;
                    (next, w * c)
                })
            })
            .collect();
    }
    let mut acc = 0.0;
    for (t, w) in &points {
        acc += w * mgf(state, t)?;
    }
    Ok(acc / h.powi(p.iter().sum::<usize>() as i32))
}

/// `⟨n_1^p_1 … n_ℓ^p_ℓ⟩` by differentiating [`mgf`] numerically: mixed
/// central differences at steps `h` and `2h` combined by one Richardson
/// step. The step grows with the total order `k` as `ε^(1/(k+4))` to balance
/// truncation against rounding.
pub fn moment_via_fd(state: &GaussianState, pattern: &ModePattern) -> Result<f64> {
    let ell = state.ell();
    pattern.check_fits(ell)?;
    let order = pattern.order();
    guard(order, MAX_FD_ORDER, "finite-difference order")?;
    let mut p = pattern.exponents().to_vec();
    p.resize(ell, 0);
    let h = 0.5 * f64::EPSILON.powf(1.0 / (order as f64 + 4.0));
    let fine = mixed_difference(state, &p, h)?;
    let coarse = mixed_difference(state, &p, 2.0 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// A partition of the positions `0..n` into disjoint non-empty blocks, each
/// block sorted and the blocks ordered by their smallest element.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SetPartition {
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// All set partitions of `0..n`, enumerated as restricted growth strings
/// `a_0 = 0, a_i ≤ 1 + max(a_0 … a_{i−1})`.
pub fn set_partitions(n: usize) -> Result<Vec<SetPartition>> {
    guard(n, MAX_PARTITION_ORDER, "set size")?;
    if n == 0 {
        return Ok(vec![SetPartition { blocks: Vec::new() }]);
    }
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    fn extend(rgs: &mut Vec<usize>, pos: usize, max: usize, out: &mut Vec<SetPartition>) {
        if pos == rgs.len() {
            let mut blocks = vec![Vec::new(); max + 1];
            for (i, &b) in rgs.iter().enumerate() {
                blocks[b].push(i);
            }
            out.push(SetPartition { blocks });
            return;
        }
        for b in 0..=max + 1 {
            rgs[pos] = b;
            extend(rgs, pos + 1, max.max(b), out);
        }
    }
    extend(&mut rgs, 1, 0, &mut out);
    Ok(out)
}

/// Joint cumulant `⟨⟨n_γ1 … n_γm⟩⟩` of a multiset of modes, from
/// `Σ_π (|π| − 1)! (−1)^(|π|−1) Π_β ⟨Π_{i∈β} n_i⟩`.
pub fn cumulant_via_partitions(state: &GaussianState, gamma: &[usize]) -> Result<f64> {
    if gamma.is_empty() {
        return Err(Error::Domain("cumulant needs at least one mode".into()));
    }
    guard(gamma.len(), MAX_PARTITION_ORDER, "cumulant order")?;
    let ell = state.ell();
    ModePattern::from_modes(gamma, ell)?;
    let partitions = set_partitions(gamma.len())?;
    let pattern_of = |block: &[usize]| {
        let modes: Vec<usize> = block.iter().map(|&i| gamma[i]).collect();
        ModePattern::from_modes(&modes, ell)
    };
    let mut distinct: Vec<ModePattern> = Vec::new();
    let mut index: HashMap<ModePattern, usize> = HashMap::new();
    let mut keyed: Vec<Vec<usize>> = Vec::with_capacity(partitions.len());
    for part in &partitions {
        let mut keys = Vec::with_capacity(part.len());
        for block in part.blocks() {
            let pat = pattern_of(block)?;
            let next = distinct.len();
            let k = *index.entry(pat.clone()).or_insert_with(|| {
                distinct.push(pat);
                next
            });
            keys.push(k);
        }
        keyed.push(keys);
    }
    let moments: Vec<f64> =
        distinct.par_iter().map(|pat| photon_moment(state, pat)).collect::<Result<Vec<_>>>()?;
    let total = ordered_sum(keyed.len(), |i| {
        let keys = &keyed[i];
        let parts = keys.len();
        let factorial: f64 = (1..parts).map(|x| x as f64).product();
        let sign = if parts % 2 == 1 { 1.0 } else { -1.0 };
        sign * factorial * keys.iter().map(|&k| moments[k]).product::<f64>()
    });
    Ok(total)
}

/// Algorithm used by [`cumulant_via_montrealer_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MontrealerPath {
    /// Power-trace subset sum.
    #[default]
    Fast,
    /// Explicit sum over restricted matchings.
    Reference,
}

/// Joint cumulant of distinct modes as the loop Montrealer of the marginal
/// state's adjacency matrix.
pub fn cumulant_via_montrealer(state: &GaussianState, modes: &[usize]) -> Result<f64> {
    cumulant_via_montrealer_with(state, modes, MontrealerPath::Fast)
}

pub fn cumulant_via_montrealer_with(state: &GaussianState, modes: &[usize], path: MontrealerPath) -> Result<f64> {
    if modes.is_empty() {
        return Err(Error::Domain("cumulant needs at least one mode".into()));
    }
    let mut seen = modes.to_vec();
    seen.sort_unstable();
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Domain(
            "repeated modes are not supported by the Montrealer path; use cumulant_via_partitions".into(),
        ));
    }
    let marginal = state.restrict(modes)?;
    let a = marginal.adjacency(SOrder::Normal);
    let value = match (path, marginal.is_displaced()) {
        (MontrealerPath::Fast, true) => loop_montrealer_fast(&a, &marginal.zeta_conj())?,
        (MontrealerPath::Fast, false) => montrealer_fast(&a)?,
        (MontrealerPath::Reference, true) => loop_montrealer_ref(&a, &marginal.zeta_conj())?,
        (MontrealerPath::Reference, false) => montrealer_ref(&a)?,
    };
    real_part(value, "cumulant")
}
