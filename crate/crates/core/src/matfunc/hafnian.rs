use super::{check_square_finite, check_symmetric};
use crate::error::{guard, Error, Result};
use crate::{CMatrix, C64};

/// Largest dimension accepted by [`hafnian`] and [`loop_hafnian`].
pub const MAX_HAFNIAN_DIM: usize = 24;
/// Largest dimension accepted by [`permanent`].
pub const MAX_PERMANENT_DIM: usize = 20;
/// Largest dimension accepted by [`hamiltonian_cycle_poly`].
pub const MAX_HAM_DIM: usize = 11;

fn check_hafnian_input(q: &CMatrix) -> Result<()> {
    check_square_finite(q, "hafnian argument")?;
    if q.nrows() % 2 != 0 {
        return Err(Error::Domain(format!("hafnian needs an even dimension, got {}", q.nrows())));
    }
    check_symmetric(q, "hafnian argument")?;
    guard(q.nrows(), MAX_HAFNIAN_DIM, "hafnian dimension")
}

/// Sum over matchings of the vertex set, expanded on the lowest free vertex
/// and memoised on the set of vertices still to be matched.
///
/// `table[mask]` holds the matching sum restricted to the vertices in `mask`;
/// the lowest vertex `v` of `mask` is either looped (weight `q_vv`) or paired
/// with a larger vertex `u` (weight `q_vu`).
fn matching_sum(q: &CMatrix, with_loops: bool) -> C64 {
    let n = q.nrows();
    if n == 0 {
        return C64::new(1.0, 0.0);
    }
    let full = (1usize << n) - 1;
    let mut table = vec![C64::new(0.0, 0.0); full + 1];
    table[0] = C64::new(1.0, 0.0);
    for mask in 1..=full {
        if !with_loops && mask.count_ones() % 2 == 1 {
            continue;
        }
        let v = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << v);
        let mut acc = if with_loops { q[(v, v)] * table[rest] } else { C64::new(0.0, 0.0) };
        let mut others = rest;
        while others != 0 {
            let u = others.trailing_zeros() as usize;
            others &= others - 1;
            acc += q[(v, u)] * table[rest & !(1 << u)];
        }
        table[mask] = acc;
    }
    table[full]
}

/// Hafnian: the sum over loop-free perfect matchings of the products of the
/// matched entries. The diagonal is ignored.
pub fn hafnian(q: &CMatrix) -> Result<C64> {
    check_hafnian_input(q)?;
    Ok(matching_sum(q, false))
}

/// Loop Hafnian: like [`hafnian`] but a vertex may also be covered by a loop,
/// weighted by its diagonal entry.
pub fn loop_hafnian(q: &CMatrix) -> Result<C64> {
    check_hafnian_input(q)?;
    Ok(matching_sum(q, true))
}

/// Permanent by Ryser's inclusion–exclusion formula, visiting column subsets
/// in Gray-code order so each step updates the row sums with one column.
pub fn permanent(b: &CMatrix) -> Result<C64> {
    check_square_finite(b, "permanent argument")?;
    let n = b.nrows();
    guard(n, MAX_PERMANENT_DIM, "permanent dimension")?;
    if n == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let mut row_sums = vec![C64::new(0.0, 0.0); n];
    let mut total = C64::new(0.0, 0.0);
    let mut gray = 0usize;
    for step in 1..(1usize << n) {
        let flip = step.trailing_zeros() as usize;
        gray ^= 1 << flip;
        let adding = gray & (1 << flip) != 0;
        for (i, s) in row_sums.iter_mut().enumerate() {
            if adding {
                *s += b[(i, flip)];
            } else {
                *s -= b[(i, flip)];
            }
        }
        let prod: C64 = row_sums.iter().product();
        if (n - gray.count_ones() as usize) % 2 == 0 {
            total += prod;
        } else {
            total -= prod;
        }
    }
    Ok(total)
}

/// Hamiltonian cycle polynomial: the sum over the `(n − 1)!` cyclic
/// permutations `σ` of `∏ b[i, σ(i)]`.
pub fn hamiltonian_cycle_poly(b: &CMatrix) -> Result<C64> {
    check_square_finite(b, "hamiltonian cycle argument")?;
    let n = b.nrows();
    if n == 0 {
        return Err(Error::Domain("hamiltonian cycle polynomial needs n >= 1".into()));
    }
    guard(n, MAX_HAM_DIM, "hamiltonian cycle dimension")?;
    fn walk(b: &CMatrix, at: usize, visited: usize, remaining: usize, weight: C64) -> C64 {
        if remaining == 0 {
            return weight * b[(at, 0)];
        }
        let mut acc = C64::new(0.0, 0.0);
        for next in 1..b.nrows() {
            if visited & (1 << next) == 0 {
                acc += walk(b, next, visited | (1 << next), remaining - 1, weight * b[(at, next)]);
            }
        }
        acc
    }
    Ok(walk(b, 0, 1, n - 1, C64::new(1.0, 0.0)))
}
