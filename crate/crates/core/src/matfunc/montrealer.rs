use super::{fdiag, BlockAdjacency};
use crate::error::{guard, Error, Result};
use crate::matchings::{gen_rpmp, gen_rspm, PairMatching};
use crate::reduce::ordered_sum;
use crate::{CMatrix, CVector, C64};

/// Largest mode count accepted by [`montrealer_ref`].
pub const MAX_REF_MODES: usize = 8;
/// Largest mode count accepted by [`loop_montrealer_ref`].
pub const MAX_REF_LOOP_MODES: usize = 7;
/// Largest mode count accepted by [`montrealer_fast`].
pub const MAX_FAST_MODES: usize = 18;
/// Largest mode count accepted by [`loop_montrealer_fast`].
pub const MAX_FAST_LOOP_MODES: usize = 16;

fn matching_weight(a: &CMatrix, x: &PairMatching) -> C64 {
    let pairs: C64 = x.pairs().iter().map(|&(i, j)| a[(i, j)]).product();
    let loops: C64 = x.loops().iter().map(|&v| a[(v, v)]).product();
    pairs * loops
}

/// Montrealer as the explicit sum over restricted perfect matchings.
pub fn montrealer_ref(a: &BlockAdjacency) -> Result<C64> {
    guard(a.ell(), MAX_REF_MODES, "mode count")?;
    let list = gen_rpmp(a.ell())?;
    Ok(ordered_sum(list.len(), |i| matching_weight(a.matrix(), &list[i])))
}

/// Loop Montrealer as the explicit sum over restricted single-pair
/// matchings; loop weights are read from `zeta_conj` (for a Gaussian state,
/// the conjugated mean vector `(ᾱ*, ᾱ)`).
pub fn loop_montrealer_ref(a: &BlockAdjacency, zeta_conj: &CVector) -> Result<C64> {
    guard(a.ell(), MAX_REF_LOOP_MODES, "mode count")?;
    let weighted = fdiag(a.matrix(), zeta_conj)?;
    let list = gen_rspm(a.ell())?;
    Ok(ordered_sum(list.len(), |i| matching_weight(&weighted, &list[i])))
}

fn mat_pow(p: &CMatrix, mut e: usize) -> CMatrix {
    let n = p.nrows();
    let mut result: Option<CMatrix> = None;
    let mut base = p.clone();
    while e > 0 {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => &r * &base,
            });
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result.unwrap_or_else(|| CMatrix::identity(n, n))
}

/// `tr(p^k)` as `Σ_ij (p^a)_ij (p^b)_ji` with `a + b = k`.
fn trace_power(p: &CMatrix, k: usize) -> C64 {
    let lo = k / 2;
    let hi = k - lo;
    let p_hi = mat_pow(p, hi);
    let p_lo = if lo == hi { p_hi.clone() } else { mat_pow(p, lo) };
    let n = p.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += p_hi[(i, j)] * p_lo[(j, i)];
        }
    }
    acc
}

/// Row/column indices kept for the mode subset `mask`: the chosen modes in
/// the first half followed by the same modes in the second half.
fn subset_indices(mask: usize, ell: usize) -> Vec<usize> {
    let modes: Vec<usize> = (0..ell).filter(|k| mask >> k & 1 == 1).collect();
    modes.iter().copied().chain(modes.iter().map(|k| k + ell)).collect()
}

fn submatrix(full: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(idx.len(), idx.len(), |r, c| full[(idx[r], idx[c])])
}

fn subset_sign(mask: usize, ell: usize) -> f64 {
    if (ell - mask.count_ones() as usize) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Montrealer by inclusion–exclusion over mode subsets:
///
/// `mtl A = (1/2ℓ) Σ_{S ⊆ [ℓ]} (−1)^{ℓ−|S|} tr[(XA)[S]^ℓ]`,
///
/// where `(XA)[S]` keeps the rows and columns of both copies of the modes in
/// `S`. Costs `2^ℓ` traces of `ℓ`-th powers of matrices of size at most `2ℓ`.
pub fn montrealer_fast(a: &BlockAdjacency) -> Result<C64> {
    let ell = a.ell();
    guard(ell, MAX_FAST_MODES, "mode count")?;
    let sigma = a.swapped_rows();
    // the empty subset contributes tr of a 0x0 power, i.e. nothing
    let total = ordered_sum((1usize << ell) - 1, |i| {
        let mask = i + 1;
        let sub = submatrix(&sigma, &subset_indices(mask, ell));
        trace_power(&sub, ell) * subset_sign(mask, ell)
    });
    Ok(total / (2 * ell) as f64)
}

/// Loop Montrealer by inclusion–exclusion over mode subsets.
///
/// Adds to the trace term of [`montrealer_fast`] the open-walk term
/// `½ zᵀ (XA)[S]^{ℓ−1} (Xz)` restricted to `S`, the only degree-ℓ part of the
/// displacement series of the cumulant-generating function. For a physical
/// `z = (ᾱ*, ᾱ)` the vector `Xz` is the mean vector `(ᾱ, ᾱ*)`.
pub fn loop_montrealer_fast(a: &BlockAdjacency, zeta_conj: &CVector) -> Result<C64> {
    let ell = a.ell();
    guard(ell, MAX_FAST_LOOP_MODES, "mode count")?;
    if zeta_conj.len() != 2 * ell {
        return Err(Error::Domain(format!(
            "loop weights have length {} but the matrix has dimension {}",
            zeta_conj.len(),
            2 * ell
        )));
    }
    let sigma = a.swapped_rows();
    let swapped_z = CVector::from_fn(2 * ell, |i, _| zeta_conj[(i + ell) % (2 * ell)]);
    let total = ordered_sum((1usize << ell) - 1, |i| {
        let mask = i + 1;
        let idx = subset_indices(mask, ell);
        let sub = submatrix(&sigma, &idx);
        let closed = trace_power(&sub, ell) / (2 * ell) as f64;
        let mut walk = CVector::from_iterator(idx.len(), idx.iter().map(|&k| swapped_z[k]));
        for _ in 1..ell {
            walk = &sub * walk;
        }
        let open: C64 = idx.iter().zip(walk.iter()).map(|(&k, w)| zeta_conj[k] * w).sum();
        (closed + open * 0.5) * subset_sign(mask, ell)
    });
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matfunc::{c, hamiltonian_cycle_poly};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_c(rng: &mut ChaCha8Rng) -> C64 {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }

    fn random_block(ell: usize, rng: &mut ChaCha8Rng) -> BlockAdjacency {
        let mut a = CMatrix::zeros(2 * ell, 2 * ell);
        for i in 0..2 * ell {
            for j in i..2 * ell {
                let z = rand_c(rng);
                a[(i, j)] = z;
                a[(j, i)] = z;
            }
        }
        BlockAdjacency::new(a).unwrap()
    }

    fn rel_close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1e-300) || (a - b).norm() <= 1e-14
    }

    #[test]
    fn two_mode_reference_values() {
        // N = [[n1, c], [c*, n2]], M = 0
        let cpl = c(0.3, -0.4);
        let n = CMatrix::from_row_slice(2, 2, &[c(1.2, 0.0), cpl, cpl.conj(), c(0.7, 0.0)]);
        let a = BlockAdjacency::from_blocks(&CMatrix::zeros(2, 2), &n, &CMatrix::zeros(2, 2)).unwrap();
        let v = montrealer_ref(&a).unwrap();
        assert!((v - c(cpl.norm_sqr(), 0.0)).norm() < 1e-15);
        let ones = BlockAdjacency::new(CMatrix::from_element(4, 4, c(1.0, 0.0))).unwrap();
        assert_eq!(montrealer_ref(&ones).unwrap(), c(2.0, 0.0));
        assert!((montrealer_fast(&ones).unwrap() - c(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn block_diagonal_split_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let full = random_block(3, &mut rng).into_matrix();
        // cut every coupling between mode 2 and modes {0, 1}
        let mut a = full.clone();
        for i in 0..6 {
            for j in 0..6 {
                if (i % 3 == 2) != (j % 3 == 2) {
                    a[(i, j)] = c(0.0, 0.0);
                }
            }
        }
        let a = BlockAdjacency::new(a).unwrap();
        assert_eq!(montrealer_ref(&a).unwrap(), c(0.0, 0.0));
        assert!(montrealer_fast(&a).unwrap().norm() < 1e-12);
    }

    #[test]
    fn fast_matches_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for ell in 1..=6 {
            for _ in 0..20 {
                let a = random_block(ell, &mut rng);
                let slow = montrealer_ref(&a).unwrap();
                let fast = montrealer_fast(&a).unwrap();
                assert!(rel_close(fast, slow, 1e-9), "ell={ell}: {fast} vs {slow}");
                let z = CVector::from_fn(2 * ell, |_, _| rand_c(&mut rng));
                let slow = loop_montrealer_ref(&a, &z).unwrap();
                let fast = loop_montrealer_fast(&a, &z).unwrap();
                assert!(rel_close(fast, slow, 1e-9), "loop ell={ell}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn zero_loop_weights_reduce_to_montrealer() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for ell in 1..=5 {
            let a = random_block(ell, &mut rng);
            let z = CVector::zeros(2 * ell);
            assert!(rel_close(loop_montrealer_ref(&a, &z).unwrap(), montrealer_ref(&a).unwrap(), 1e-12));
            assert!(rel_close(loop_montrealer_fast(&a, &z).unwrap(), montrealer_fast(&a).unwrap(), 1e-12));
        }
    }

    #[test]
    fn single_mode_loop_montrealer() {
        // N11 = 0.8, alpha = 0.3 + 0.5i: cumulant N11 + |alpha|^2
        let alpha = c(0.3, 0.5);
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 1)] = c(0.8, 0.0);
        a[(1, 0)] = c(0.8, 0.0);
        a[(0, 0)] = c(0.2, 0.1);
        a[(1, 1)] = c(0.2, -0.1);
        let a = BlockAdjacency::new(a).unwrap();
        let z = CVector::from_vec(vec![alpha.conj(), alpha]);
        let want = 0.8 + alpha.norm_sqr();
        assert!((loop_montrealer_ref(&a, &z).unwrap() - c(want, 0.0)).norm() < 1e-15);
        assert!((loop_montrealer_fast(&a, &z).unwrap() - c(want, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hamiltonian_embedding() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in [5, 6] {
            let b = CMatrix::from_fn(n, n, |_, _| rand_c(&mut rng));
            let zero = CMatrix::zeros(n, n);
            let a = BlockAdjacency::from_blocks(&zero, &b, &zero).unwrap();
            let ham = hamiltonian_cycle_poly(&b).unwrap();
            assert!(rel_close(montrealer_ref(&a).unwrap(), ham, 1e-12));
            assert!(rel_close(montrealer_fast(&a).unwrap(), ham, 1e-9));
        }
    }

    #[test]
    fn guards() {
        let big = BlockAdjacency::new(CMatrix::zeros(18, 18)).unwrap();
        assert!(matches!(montrealer_ref(&big), Err(Error::Resource(_))));
        assert!(matches!(loop_montrealer_ref(&big, &CVector::zeros(18)), Err(Error::Resource(_))));
        let huge = BlockAdjacency::new(CMatrix::zeros(38, 38)).unwrap();
        assert!(matches!(montrealer_fast(&huge), Err(Error::Resource(_))));
        let small = BlockAdjacency::new(CMatrix::zeros(4, 4)).unwrap();
        assert!(matches!(loop_montrealer_fast(&small, &CVector::zeros(3)), Err(Error::Domain(_))));
    }

    #[test]
    fn power_helpers() {
        let p = CMatrix::from_fn(3, 3, |i, j| c(i as f64 + 0.5, j as f64 - 0.25));
        for k in 1..7 {
            let mut direct = CMatrix::identity(3, 3);
            for _ in 0..k {
                direct = &direct * &p;
            }
            assert!((trace_power(&p, k) - direct.trace()).norm() < 1e-9 * direct.trace().norm().max(1.0));
        }
    }
}
