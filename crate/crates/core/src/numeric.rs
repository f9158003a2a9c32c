//! Integer conventions shared by every module.
//!
//! All values are exact signed integers. The helpers here fix the few
//! conventions that the rest of the crate depends on: binary length,
//! the sign tests and the two branch-on-zero conditionals.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// The universal value type.
pub type Int = BigInt;

/// Binary length of `|x|`, with `length(0) = 0`.
pub fn length(x: &Int) -> u64 {
    x.bits()
}

/// Binary length as an [`Int`].
pub fn length_int(x: &Int) -> Int {
    Int::from(length(x))
}

/// `1` if `x > 0`, `0` otherwise.
pub fn sg(x: &Int) -> Int {
    if x.is_positive() {
        Int::one()
    } else {
        Int::zero()
    }
}

/// `1` if `x == 0`, `0` otherwise.
pub fn cosg(x: &Int) -> Int {
    if x.is_zero() {
        Int::one()
    } else {
        Int::zero()
    }
}

/// Branch on zero: `y` when `c == 0`, `z` otherwise.
pub fn ifz(c: &Int, y: &Int, z: &Int) -> Int {
    if c.is_zero() {
        y.clone()
    } else {
        z.clone()
    }
}

/// Branch on non-zero: `y` when `c != 0`, `z` otherwise.
pub fn ifnz(c: &Int, y: &Int, z: &Int) -> Int {
    ifz(c, z, y)
}

/// `floor(2^n)`: `2^n` for `n >= 0` and `0` for negative `n`.
///
/// Exponents beyond `u32::MAX` are rejected by returning `None`.
pub fn pow2(n: &Int) -> Option<Int> {
    if n.is_negative() {
        return Some(Int::zero());
    }
    let shift = n.to_u32()?;
    Some(Int::one() << shift)
}

/// `2^k - 1`, the integer whose binary expansion is `k` ones.
pub fn all_ones(k: u64) -> Int {
    (Int::one() << k) - 1
}

/// Sign/magnitude pair `(s, n)` encoding `(-1)^s * n`.
///
/// Zero maps to `(0, 0)`; `(1, 0)` is accepted back as zero as well.
pub fn to_signpair(x: &Int) -> (u8, BigUint) {
    let s = if x.sign() == Sign::Minus { 1 } else { 0 };
    (s, x.magnitude().clone())
}

pub fn from_signpair(s: u8, n: &BigUint) -> Int {
    let v = Int::from(n.clone());
    if s == 1 {
        -v
    } else {
        v
    }
}

/// Parse a signed decimal literal.
pub fn parse_int(text: &str) -> Option<Int> {
    text.trim().parse::<Int>().ok()
}
