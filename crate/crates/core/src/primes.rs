//! Primality and square roots modulo a prime.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{domain, Result};

/// Bases that make Miller–Rabin deterministic below [`PRIME_LIMIT`].
const WITNESSES: [u32; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// 3 317 044 064 679 887 385 961 981: the smallest strong pseudoprime to all of
/// [`WITNESSES`].
pub const PRIME_LIMIT: &str = "3317044064679887385961981";

fn prime_limit() -> BigInt {
    PRIME_LIMIT.parse().expect("valid literal")
}

/// Deterministic primality test for `n < PRIME_LIMIT`; larger inputs are an
/// error rather than a probabilistic answer.
pub fn is_prime(n: &BigInt) -> Result<bool> {
    if n >= &prime_limit() {
        return domain(format!("{n} is beyond the deterministic primality bound"));
    }
    if n < &BigInt::from(2u32) {
        return Ok(false);
    }
    for w in WITNESSES {
        let w = BigInt::from(w);
        if n == &w {
            return Ok(true);
        }
        if n.is_multiple_of(&w) {
            return Ok(false);
        }
    }
    let n_minus_1: BigInt = n - 1u32;
    let mut odd = n_minus_1.clone();
    let mut twos = 0u32;
    while odd.is_even() {
        odd >>= 1;
        twos += 1;
    }
    'witness: for w in WITNESSES {
        let mut x = BigInt::from(w).modpow(&odd, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..twos {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return Ok(false);
    }
    Ok(true)
}

pub(crate) fn require_prime(p: &BigInt) -> Result<()> {
    if is_prime(p)? {
        Ok(())
    } else {
        domain(format!("{p} is not prime"))
    }
}

/// Legendre symbol `(a / p)` for an odd prime `p`.
pub fn legendre(a: &BigInt, p: &BigInt) -> i8 {
    let a = a.mod_floor(p);
    if a.is_zero() {
        return 0;
    }
    let e: BigInt = (p - 1u32) >> 1;
    if a.modpow(&e, p).is_one() {
        1
    } else {
        -1
    }
}

/// A square root of the quadratic residue `a` modulo the odd prime `p`
/// (Tonelli–Shanks). Returns `None` when `a` is a non-residue.
pub fn sqrt_mod_prime(a: &BigInt, p: &BigInt) -> Option<BigInt> {
    let a = a.mod_floor(p);
    if a.is_zero() {
        return Some(BigInt::zero());
    }
    if legendre(&a, p) != 1 {
        return None;
    }
    let p_minus_1: BigInt = p - 1u32;
    if (p % 4u32) == BigInt::from(3u32) {
        let e: BigInt = (p + 1u32) >> 2;
        return Some(a.modpow(&e, p));
    }
    let mut q = p_minus_1.clone();
    let mut s = 0u32;
    while q.is_even() {
        q >>= 1;
        s += 1;
    }
    let mut z = BigInt::from(2u32);
    while legendre(&z, p) != -1 {
        z += 1u32;
    }
    let mut m = s;
    let mut c = z.modpow(&q, p);
    let mut t = a.modpow(&q, p);
    let mut r = a.modpow(&((&q + 1u32) >> 1), p);
    while !t.is_one() {
        let mut i = 0u32;
        let mut t2 = t.clone();
        while !t2.is_one() {
            t2 = (&t2 * &t2) % p;
            i += 1;
        }
        let b = c.modpow(&(BigInt::one() << (m - i - 1)), p);
        r = (&r * &b) % p;
        c = (&b * &b) % p;
        t = (&t * &c) % p;
        m = i;
    }
    Some(r)
}

/// Distinct prime factors of `n ≥ 1` with multiplicity, by trial division.
pub(crate) fn factorize(n: &BigInt) -> Vec<(BigInt, u64)> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut q = BigInt::from(2u32);
    while &q * &q <= n {
        if n.is_multiple_of(&q) {
            let mut e = 0;
            while n.is_multiple_of(&q) {
                n /= &q;
                e += 1;
            }
            out.push((q.clone(), e));
        }
        q += 1u32;
    }
    if n > BigInt::one() {
        out.push((n, 1));
    }
    out
}
