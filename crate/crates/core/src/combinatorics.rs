//! Lexicographic enumeration of k-subsets, used by every brute-force oracle.

use crate::error::{Error, Result};
use rayon::prelude::*;

/// Default cap on the number of candidate supports an exhaustive search may visit.
pub const DEFAULT_ENUMERATION_CAP: u64 = 2_000_000;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Returns `C(n, k)` as a `u64`, or an infeasibility error when it exceeds `cap`.
pub fn checked_count(n: usize, k: usize, cap: u64) -> Result<u64> {
    let count = binomial(n, k);
    if count > cap as u128 {
        return Err(Error::InfeasibleBruteforce {
            candidates: count,
            cap,
        });
    }
    Ok(count as u64)
}

/// Advances `combo` (sorted, values in `[0, n)`) to its lexicographic successor.
pub fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// The combination with lexicographic rank `rank` among all k-subsets of `[0, n)`.
pub fn unrank(n: usize, k: usize, mut rank: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    for slot in 0..k {
        let remaining = k - slot - 1;
        let mut candidate = start;
        loop {
            let block = binomial(n - candidate - 1, remaining) as u64;
            if rank < block {
                break;
            }
            rank -= block;
            candidate += 1;
        }
        out.push(candidate);
        start = candidate + 1;
    }
    out
}

/// Calls `f` on every k-subset of `[0, n)` in lexicographic order.
pub fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        f(&combo);
        if !next_combination(&mut combo, n) {
            break;
        }
    }
}

/// Map-reduce over all k-subsets, partitioning the rank space into contiguous
/// chunks processed in parallel. `reduce` sees partial results in rank order,
/// so a left-biased reduction yields the lexicographically first optimum.
pub fn par_map_reduce<T, M, R>(n: usize, k: usize, cap: u64, map: M, reduce: R) -> Result<Option<T>>
where
    T: Send,
    M: Fn(&[usize]) -> T + Sync,
    R: Fn(T, T) -> T + Sync,
{
    let total = checked_count(n, k, cap)?;
    if total == 0 {
        return Ok(None);
    }
    let chunks = (rayon::current_num_threads() as u64 * 4).clamp(1, total);
    let chunk_len = total.div_ceil(chunks);
    let result = (0..chunks)
        .into_par_iter()
        .filter_map(|c| {
            let begin = c * chunk_len;
            if begin >= total {
                return None;
            }
            let end = (begin + chunk_len).min(total);
            let mut combo = unrank(n, k, begin);
            let mut acc = map(&combo);
            for _ in begin + 1..end {
                next_combination(&mut combo, n);
                acc = reduce(acc, map(&combo));
            }
            Some(acc)
        })
        .reduce_with(&reduce);
    Ok(result)
}
