use std::ops::Add;

use rayon::prelude::*;

const CHUNK: usize = 256;
const PAR_MIN_TERMS: usize = 2048;

/// Sums `term(0) + … + term(n - 1)` with an association order fixed by `n`
/// alone: terms are folded left-to-right inside fixed-size chunks and the
/// chunk partials are combined pairwise. Parallel and serial execution give
/// bit-identical results for any thread count.
pub(crate) fn ordered_sum<T, F>(n: usize, term: F) -> T
where
    T: Copy + Default + Send + Add<Output = T>,
    F: Fn(usize) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let chunk_sum = |c: usize| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(n);
        (lo..hi).fold(T::default(), |acc, i| acc + term(i))
    };
    let partials: Vec<T> = if n >= PAR_MIN_TERMS {
        (0..chunks).into_par_iter().map(chunk_sum).collect()
    } else {
        (0..chunks).map(chunk_sum).collect()
    };
    pairwise_sum(partials)
}

pub(crate) fn pairwise_sum<T>(mut values: Vec<T>) -> T
where
    T: Copy + Default + Add<Output = T>,
{
    if values.is_empty() {
        return T::default();
    }
    while values.len() > 1 {
        values = values
            .chunks(2)
            .map(|p| if p.len() == 2 { p[0] + p[1] } else { p[0] })
            .collect();
    }
    values[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_plain_sum_on_integers() {
        let n = 10_000usize;
        let s: f64 = ordered_sum(n, |i| i as f64);
        assert_eq!(s, (n * (n - 1) / 2) as f64);
        let empty: f64 = ordered_sum(0, |_| 1.0);
        assert_eq!(empty, 0.0);
    }

    #[test]
    fn independent_of_thread_count() {
        let term = |i: usize| ((i as f64) * 0.37).sin() * 1e-3 + 1.0 / (1.0 + i as f64);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a: f64 = one.install(|| ordered_sum(50_000, term));
        let b: f64 = four.install(|| ordered_sum(50_000, term));
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
