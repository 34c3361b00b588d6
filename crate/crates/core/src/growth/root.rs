//! Exact integer roots.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// `base^exp <= bound`, treating overflow as "greater".
fn pow_le(base: u128, exp: u32, bound: u128) -> bool {
    base.checked_pow(exp).is_some_and(|v| v <= bound)
}

/// Largest `r` with `r^q <= k`.
pub fn floor_root_u128(k: u128, q: u32) -> u128 {
    assert!(q >= 1, "root degree must be positive");
    if q == 1 || k < 2 {
        return k;
    }
    let mut r = (k as f64).powf(1.0 / q as f64) as u128;
    while r > 0 && !pow_le(r, q, k) {
        r -= 1;
    }
    while pow_le(r + 1, q, k) {
        r += 1;
    }
    r
}

/// Smallest `r` with `r^q >= k`.
pub fn ceil_root_u128(k: u128, q: u32) -> u128 {
    let r = floor_root_u128(k, q);
    if r.checked_pow(q) == Some(k) {
        r
    } else {
        r + 1
    }
}

/// Smallest `r` with `r^q >= k`.
pub fn ceil_root_big(k: &BigUint, q: u32) -> BigUint {
    assert!(q >= 1, "root degree must be positive");
    if k.is_zero() {
        return BigUint::zero();
    }
    let r = k.nth_root(q);
    if &r.pow(q) == k {
        r
    } else {
        r + BigUint::one()
    }
}

/// `ceil(num / den)` for big integers.
pub fn ceil_div_big(num: &BigUint, den: &BigUint) -> BigUint {
    let (q, r) = (num / den, num % den);
    if r.is_zero() {
        q
    } else {
        q + BigUint::one()
    }
}

/// Smallest `m` with `m^q * den >= num`, i.e. `ceil((num/den)^(1/q))`.
/// Returns `None` if the answer does not fit in a `u64`.
pub fn ceil_rational_root(num: &BigUint, den: &BigUint, q: u32) -> Option<u64> {
    ceil_root_big(&ceil_div_big(num, den), q).to_u64()
}

/// Integer cube root rounded up.
pub fn ceil_cbrt(k: u128) -> u128 {
    ceil_root_u128(k, 3)
}
