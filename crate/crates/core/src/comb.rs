//! Binomials and multinomials that vanish outside their support.

pub(crate) fn binom(a: i64, b: i64) -> i128 {
    if a < 0 || b < 0 || b > a {
        return 0;
    }
    let b = b.min(a - b);
    let mut acc: i128 = 1;
    for k in 0..b {
        acc = acc * (a - k) as i128 / (k + 1) as i128;
    }
    acc
}

/// `n! / (k_1! ... k_r! (n - Σk)!)`, zero if any part is negative.
pub(crate) fn multinomial(n: i64, parts: &[i64]) -> i128 {
    let mut rest = n;
    let mut acc: i128 = 1;
    for &k in parts {
        if k < 0 || k > rest {
            return 0;
        }
        acc *= binom(rest, k);
        rest -= k;
    }
    acc
}
