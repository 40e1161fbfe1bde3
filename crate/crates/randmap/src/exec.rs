//! Seed fan-out for the embarrassingly parallel parts: Monte Carlo samplers
//! and trace batches. With the `parallel` feature (on by default) the fan-out
//! runs on rayon; without it the same call runs sequentially. Results come
//! back in seed order either way, so outputs are identical across both modes.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Apply `f` to the seeds `start, start+1, ..., start+count-1` and collect
/// the results in seed order.
pub fn map_seeds<T, F>(start: u64, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..count as u64)
            .into_par_iter()
            .map(|i| f(start + i))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count as u64).map(|i| f(start + i)).collect()
    }
}

/// Always-sequential variant; the benchmark suite compares against this.
pub fn map_seeds_sequential<T, F>(start: u64, count: usize, f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    (0..count as u64).map(|i| f(start + i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree_in_order() {
        let par = map_seeds(10, 100, |s| s * s);
        let seq = map_seeds_sequential(10, 100, |s| s * s);
        assert_eq!(par, seq);
        assert_eq!(par[0], 100);
        assert_eq!(par[99], 109 * 109);
    }
}
