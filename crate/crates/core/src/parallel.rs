//! Thread fan-out helpers. Parallelism is opt-in through `HULLKIT_THREADS`.

use std::thread;

pub const THREADS_ENV: &str = "HULLKIT_THREADS";

/// Worker count from `HULLKIT_THREADS`; absent or invalid means 1.
pub fn configured_threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or(1)
}

/// Splits `items` round-robin over `threads` workers and runs `f` on each
/// share. Results come back in worker order, so output is deterministic for a
/// fixed thread count.
pub fn map_interleaved<T, R, F>(items: &[T], threads: usize, f: F) -> Vec<R>
where
    T: Copy + Send + Sync,
    R: Send,
    F: Fn(Vec<T>) -> R + Sync,
{
    let threads = threads.clamp(1, items.len().max(1));
    let shares: Vec<Vec<T>> = (0..threads)
        .map(|t| items.iter().skip(t).step_by(threads).copied().collect())
        .collect();
    if threads == 1 {
        return shares.into_iter().map(&f).collect();
    }
    thread::scope(|scope| {
        let handles: Vec<_> = shares
            .into_iter()
            .map(|share| scope.spawn(|| f(share)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interleaves_and_keeps_order() {
        let items: Vec<usize> = (0..10).collect();
        let out = map_interleaved(&items, 3, |share| share);
        assert_eq!(out, vec![vec![0, 3, 6, 9], vec![1, 4, 7], vec![2, 5, 8]]);
        assert_eq!(map_interleaved(&items, 1, |s| s.len()), vec![10]);
        assert_eq!(map_interleaved::<usize, _, _>(&[], 4, |s| s.len()), vec![0]);
    }
}
