//! Reproducible floating-point reductions.
//!
//! Sums are formed over fixed-size chunks, each reduced pairwise, and the
//! chunk results are combined pairwise again. The chunk boundaries do not
//! depend on the thread count, so parallel and serial runs agree bit for bit.

use rayon::prelude::*;

const CHUNK: usize = 4096;
const LEAF: usize = 16;

/// Pairwise (tree) sum of a slice.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Maps every element through `f` and returns the deterministic sums of the
/// `N` components, computed in parallel.
pub fn par_sum_map<T, F, const N: usize>(items: &[T], f: F) -> [f64; N]
where
    T: Sync,
    F: Fn(&T) -> [f64; N] + Sync,
{
    let partials: Vec<[f64; N]> = items
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut cols = vec![Vec::with_capacity(chunk.len()); N];
            for item in chunk {
                for (col, v) in cols.iter_mut().zip(f(item)) {
                    col.push(v);
                }
            }
            let mut out = [0.0; N];
            for (o, col) in out.iter_mut().zip(&cols) {
                *o = pairwise_sum(col);
            }
            out
        })
        .collect();
    let mut out = [0.0; N];
    for (i, o) in out.iter_mut().enumerate() {
        let col: Vec<f64> = partials.iter().map(|p| p[i]).collect();
        *o = pairwise_sum(&col);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_exact_integer_sum() {
        let xs: Vec<f64> = (1..=100_000).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&xs), 5_000_050_000.0);
        let [s] = par_sum_map(&xs, |&x| [x]);
        assert_eq!(s, 5_000_050_000.0);
    }

    #[test]
    fn independent_of_thread_count() {
        let xs: Vec<f64> = (0..50_000)
            .map(|k| ((k as f64) * 0.37).sin() / (1.0 + k as f64))
            .collect();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| par_sum_map(&xs, |&x| [x, x * x]));
        let b = four.install(|| par_sum_map(&xs, |&x| [x, x * x]));
        assert_eq!(a[0].to_bits(), b[0].to_bits());
        assert_eq!(a[1].to_bits(), b[1].to_bits());
    }

    #[test]
    fn empty_is_zero() {
        let [s] = par_sum_map(&[] as &[f64], |&x| [x]);
        assert_eq!(s, 0.0);
    }
}
