//! Lexicographic subset enumeration and small bitset kernels shared by the
//! certifiers.

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        // acc * (n - j) / (j + 1) stays integral at every step
        acc = match acc.checked_mul((n - j) as u128) {
            Some(v) => v / (j as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Smallest `c` with `2^c >= x`; `ceil_log2(1) == 0`.
pub fn ceil_log2(x: usize) -> u32 {
    assert!(x > 0, "ceil_log2 of zero");
    usize::BITS - (x - 1).leading_zeros()
}

/// Size-`k` subsets of `0..n` in lexicographic order.
///
/// This is a lending iterator: call [`Combinations::next`] and borrow the
/// current subset until the following call.
pub struct Combinations {
    n: usize,
    idx: Vec<usize>,
    started: bool,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            idx: (0..k).collect(),
            started: false,
            done: k > n,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn next(&mut self) -> Option<&[usize]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.idx);
        }
        let k = self.idx.len();
        let mut pos = k;
        while pos > 0 {
            pos -= 1;
            if self.idx[pos] < self.n - k + pos {
                self.idx[pos] += 1;
                for j in pos + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                return Some(&self.idx);
            }
        }
        self.done = true;
        None
    }
}

/// All subsets of `0..n` with size in `lo..=hi`, ordered by size and then
/// lexicographically.
pub fn subsets_by_size(n: usize, lo: usize, hi: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for k in lo..=hi.min(n) {
        let mut it = Combinations::new(n, k);
        while let Some(s) = it.next() {
            out.push(s.to_vec());
        }
    }
    out
}

/// Fixed-width bitset over right vertices.
pub(crate) fn right_bits(n_right: usize, members: &[usize]) -> Vec<u64> {
    let mut bits = vec![0u64; n_right.div_ceil(64)];
    for &r in members {
        bits[r / 64] |= 1 << (r % 64);
    }
    bits
}

pub(crate) fn or_into(acc: &mut [u64], other: &[u64]) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a |= b;
    }
}

pub(crate) fn count_ones(bits: &[u64]) -> usize {
    bits.iter().map(|w| w.count_ones() as usize).sum()
}

/// `|a \ b|`
pub(crate) fn count_difference(a: &[u64], b: &[u64]) -> usize {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x & !y).count_ones() as usize)
        .sum()
}

pub(crate) fn count_xor(a: &[u64], b: &[u64]) -> usize {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x ^ y).count_ones() as usize)
        .sum()
}

pub(crate) fn left_mask(members: &[usize]) -> u128 {
    members.iter().fold(0u128, |m, &v| m | (1u128 << v))
}

pub(crate) fn mask_members(mask: u128) -> Vec<usize> {
    (0..128).filter(|&v| mask >> v & 1 == 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(32, 2), 496);
        assert_eq!(binomial(64, 2), 2016);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(0, 0), 1);
        assert_eq!(binomial(1000, 500), u128::MAX);
    }

    #[test]
    fn log2_ceiling() {
        let expect = [(1, 0), (2, 1), (3, 2), (4, 2), (5, 3), (8, 3), (9, 4)];
        for (x, c) in expect {
            assert_eq!(ceil_log2(x), c, "x={x}");
        }
    }

    #[test]
    fn combinations_lex_order() {
        let mut it = Combinations::new(4, 2);
        let mut all = Vec::new();
        while let Some(s) = it.next() {
            all.push(s.to_vec());
        }
        assert_eq!(
            all,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        let mut empty = Combinations::new(3, 0);
        assert_eq!(empty.next(), Some(&[][..]));
        assert_eq!(empty.next(), None);
        assert_eq!(Combinations::new(2, 3).next(), None);
    }

    #[test]
    fn combination_counts_match_binomial() {
        for n in 0..9 {
            for k in 0..=n + 1 {
                let mut it = Combinations::new(n, k);
                let mut c = 0u128;
                while it.next().is_some() {
                    c += 1;
                }
                assert_eq!(c, binomial(n, k), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn bit_kernels() {
        let a = right_bits(70, &[0, 3, 65]);
        let b = right_bits(70, &[3, 69]);
        assert_eq!(count_ones(&a), 3);
        assert_eq!(count_difference(&a, &b), 2);
        assert_eq!(count_xor(&a, &b), 3);
        let mut u = a.clone();
        or_into(&mut u, &b);
        assert_eq!(count_ones(&u), 4);
        assert_eq!(mask_members(left_mask(&[1, 5, 127])), vec![1, 5, 127]);
    }
}
