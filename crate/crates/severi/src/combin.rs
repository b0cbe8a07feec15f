//! Combination indexing shared by the minor and Plücker machinery: binomial
//! coefficients, lexicographic rank/unrank of strictly increasing column
//! tuples, and an odometer-style iterator over combinations.

use std::sync::OnceLock;

const MAX_N: usize = 64;

fn table() -> &'static Vec<Vec<u64>> {
    static TABLE: OnceLock<Vec<Vec<u64>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        // safe in u64 for n <= 64: C(64, 32) < 2^63
        let mut t = vec![vec![0u64; MAX_N + 1]; MAX_N + 1];
        for n in 0..=MAX_N {
            t[n][0] = 1;
            for k in 1..=n {
                t[n][k] = t[n - 1][k - 1] + t[n - 1][k];
            }
        }
        t
    })
}

/// C(n, k); zero outside the triangle. Panics for n > 64.
pub fn binom(n: usize, k: usize) -> u64 {
    assert!(n <= MAX_N, "binomial table capped at n = {MAX_N}");
    if k > n {
        0
    } else {
        table()[n][k]
    }
}

/// Colexicographic rank of a sorted tuple: sum of C(c_j, j + 1).
pub fn colex_rank(tuple: &[usize]) -> usize {
    tuple
        .iter()
        .enumerate()
        .map(|(j, &c)| binom(c, j + 1) as usize)
        .sum()
}

/// Lexicographic rank of a sorted k-tuple drawn from 0..n.
pub fn lex_rank(n: usize, tuple: &[usize]) -> usize {
    let k = tuple.len();
    let mut rank = 0u64;
    let mut prev: isize = -1;
    for (j, &c) in tuple.iter().enumerate() {
        for v in (prev + 1) as usize..c {
            rank += binom(n - 1 - v, k - 1 - j);
        }
        prev = c as isize;
    }
    rank as usize
}

/// Inverse of [`lex_rank`].
pub fn lex_unrank(n: usize, k: usize, mut rank: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut v = 0usize;
    for j in 0..k {
        loop {
            let block = binom(n - 1 - v, k - 1 - j) as usize;
            if rank < block {
                out.push(v);
                v += 1;
                break;
            }
            rank -= block;
            v += 1;
        }
    }
    out
}

/// Visits every strictly increasing k-tuple from 0..n exactly once, in
/// lexicographic order.
pub fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    if k == 0 {
        f(&[]);
        return;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        f(&cur);
        // advance odometer
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if cur[i] < n - (k - i) {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}
