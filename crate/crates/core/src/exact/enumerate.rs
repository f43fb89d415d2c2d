//! Exhaustive enumeration of group assignments.

use crate::error::{Error, Result};

/// Binomial coefficient `C(n, k)`; saturates at `u128::MAX`.
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

pub(crate) fn check_cap(required: u128, cap: u64) -> Result<u64> {
    if required > cap as u128 {
        Err(Error::EnumerationCap { required, cap })
    } else {
        Ok(required as u64)
    }
}

/// Calls `visit` once for every `k`-subset of `0..n`, each given as a
/// strictly increasing index slice, in lexicographic order.
pub fn for_each_combination<F: FnMut(&[usize])>(n: usize, k: usize, mut visit: F) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        // rightmost index that can still move
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(8, 4), 70);
        assert_eq!(binomial(10, 5), 252);
        assert_eq!(binomial(15, 7), 6435);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(0, 0), 1);
    }

    #[test]
    fn visits_every_subset_once() {
        for (n, k) in [(5, 2), (8, 4), (6, 0), (6, 6), (1, 1)] {
            let mut seen = Vec::new();
            for_each_combination(n, k, |c| {
                assert_eq!(c.len(), k);
                assert!(c.windows(2).all(|w| w[0] < w[1]));
                seen.push(c.to_vec());
            });
            assert_eq!(seen.len() as u128, binomial(n, k));
            let mut dedup = seen.clone();
            dedup.sort();
            dedup.dedup();
            assert_eq!(dedup.len(), seen.len());
        }
    }
}
