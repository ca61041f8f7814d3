//! p-adic valuations on `Q` and their extensions to `Q(√d)`.
//!
//! A rational prime `p` behaves in one of three ways in `Q(√d)`, decided by
//! the field discriminant `D = d` if `d ≡ 1 (mod 4)` and `D = 4d` otherwise:
//!
//! | case                         | odd `p`               | `p = 2`        |
//! |------------------------------|-----------------------|----------------|
//! | ramified (`p ∣ D`)           | `p ∣ d`               | `d ≢ 1 (mod 4)`|
//! | split (two extensions)       | `(d / p) = 1`         | `d ≡ 1 (mod 8)`|
//! | inert (one extension)        | `(d / p) = −1`        | `d ≡ 5 (mod 8)`|
//!
//! Values live in `Q ∪ {∞}`. Every extension is normalised to restrict to
//! `v_p` on `Q`, so ramified values are half-integers.

use std::fmt;
use std::ops::Add;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{add_q, cmp_q, format_compact, int_valuation, mul_q, ExactRational, Field, FieldElem, QuadElem, Radicand};
use crate::error::{domain, Error, Result};
use crate::primes::{legendre, require_prime, sqrt_mod_prime};

/// An element of `Q ∪ {∞}`. `Finite(_) < Infinity`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Finite(ExactRational),
    Infinity,
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        match (self, other) {
            (Value::Finite(x), Value::Finite(y)) => cmp_q(x, y),
            (Value::Finite(_), Value::Infinity) => Less,
            (Value::Infinity, Value::Finite(_)) => Greater,
            (Value::Infinity, Value::Infinity) => Equal,
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Value {
    pub fn int(n: i64) -> Self {
        Value::Finite(ExactRational::from_integer(BigInt::from(n)))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Value::Infinity)
    }

    pub fn finite(&self) -> Option<&ExactRational> {
        match self {
            Value::Finite(q) => Some(q),
            Value::Infinity => None,
        }
    }

    /// `c · self` for `c > 0`.
    pub fn scale(&self, c: &ExactRational) -> Self {
        debug_assert!(c.is_positive());
        match self {
            Value::Finite(q) => Value::Finite(q * c),
            Value::Infinity => Value::Infinity,
        }
    }

    pub fn ge_rational(&self, m: &ExactRational) -> bool {
        match self {
            Value::Finite(q) => q >= m,
            Value::Infinity => true,
        }
    }

    pub fn gt_rational(&self, m: &ExactRational) -> bool {
        match self {
            Value::Finite(q) => q > m,
            Value::Infinity => true,
        }
    }

    /// `num/den` or `inf`, the machine-readable form.
    pub fn to_fraction_string(&self) -> String {
        match self {
            Value::Finite(q) => crate::arith::format_fraction(q),
            Value::Infinity => "inf".to_owned(),
        }
    }
}

impl Add for &Value {
    type Output = Value;

    fn add(self, rhs: &Value) -> Value {
        match (self, rhs) {
            (Value::Finite(x), Value::Finite(y)) => Value::Finite(add_q(x, y)),
            _ => Value::Infinity,
        }
    }
}

impl Add for Value {
    type Output = Value;

    fn add(self, rhs: Value) -> Value {
        &self + &rhs
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Finite(q) => f.write_str(&format_compact(q)),
            Value::Infinity => f.write_str("inf"),
        }
    }
}

/// `v_p(x)`: exponent of `p` in the numerator minus that in the denominator.
pub fn v_p(p: &BigInt, x: &ExactRational) -> Value {
    if x.is_zero() {
        return Value::Infinity;
    }
    Value::int(int_valuation_signed(p, x))
}

/// `v_p(x)` for `x ≠ 0`.
pub(crate) fn int_valuation_signed(p: &BigInt, x: &ExactRational) -> i64 {
    int_valuation(p, x.numer()) as i64 - int_valuation(p, x.denom()) as i64
}

fn v_p_int(p: &BigInt, x: &ExactRational) -> Option<i64> {
    (!x.is_zero()).then(|| int_valuation_signed(p, x))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PAdicValuation {
    p: BigInt,
}

impl PAdicValuation {
    pub fn new(p: BigInt) -> Result<Self> {
        require_prime(&p)?;
        Ok(Self { p })
    }

    pub fn from_u64(p: u64) -> Result<Self> {
        Self::new(BigInt::from(p))
    }

    pub fn prime(&self) -> &BigInt {
        &self.p
    }

    pub fn eval_rational(&self, x: &ExactRational) -> Value {
        v_p(&self.p, x)
    }

    pub fn eval(&self, x: &FieldElem) -> Result<Value> {
        match x.to_rational() {
            Some(q) => Ok(self.eval_rational(&q)),
            None => domain(format!("v_{} is defined on Q, got {x}", self.p)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Splitting {
    Inert,
    Ramified,
    Split,
}

/// How `p` decomposes in `Q(√d)`; see the module table.
pub fn classify(p: &BigInt, d: &Radicand) -> Result<Splitting> {
    require_prime(p)?;
    let d = d.value();
    if p == &BigInt::from(2u32) {
        let r8 = d.mod_floor(&BigInt::from(8u32)).to_u32().expect("small residue");
        return Ok(match r8 {
            1 => Splitting::Split,
            5 => Splitting::Inert,
            _ => Splitting::Ramified,
        });
    }
    Ok(match legendre(d, p) {
        0 => Splitting::Ramified,
        1 => Splitting::Split,
        _ => Splitting::Inert,
    })
}

/// Selects one of the two `p`-adic square roots of `d` when `p` splits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    First,
    Second,
}

impl Branch {
    pub fn index(self) -> u8 {
        match self {
            Branch::First => 1,
            Branch::Second => 2,
        }
    }

    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Branch::First),
            2 => Ok(Branch::Second),
            _ => domain(format!("split branch must be 1 or 2, got {i}")),
        }
    }

    pub fn other(self) -> Self {
        match self {
            Branch::First => Branch::Second,
            Branch::Second => Branch::First,
        }
    }
}

/// Residue that pins down a branch: the root mod `p` for odd `p` (branch 1 takes
/// the smaller representative), the root mod 4 for `p = 2` (branch 1 is `1`).
pub fn split_seed(p: &BigInt, d: &Radicand, branch: Branch) -> Result<BigInt> {
    if classify(p, d)? != Splitting::Split {
        return domain(format!("{p} does not split in Q(sqrt({d}))"));
    }
    if p == &BigInt::from(2u32) {
        return Ok(BigInt::from(match branch {
            Branch::First => 1u32,
            Branch::Second => 3u32,
        }));
    }
    let r = sqrt_mod_prime(d.value(), p).expect("split implies residue");
    let other = p - &r;
    let small = r.clone().min(other.clone());
    Ok(match branch {
        Branch::First => small,
        Branch::Second => p - small,
    })
}

/// `s` with `s ≡ σ (mod p^k)`, where `σ ∈ Z_p` is the square root of `d`
/// selected by `branch`. In particular `s² ≡ d (mod p^k)` and `s` reduces to
/// [`split_seed`].
pub fn hensel_sqrt(p: &BigInt, d: &Radicand, k: u32, branch: Branch) -> Result<BigInt> {
    if k == 0 {
        return domain("hensel precision must be at least 1");
    }
    let seed = split_seed(p, d, branch)?;
    let d = d.value();
    if p == &BigInt::from(2u32) {
        return Ok(lift_two_adic(d, seed, k));
    }
    let mut s = seed;
    let mut prec = 1u32;
    while prec < k {
        prec = (2 * prec).min(k);
        let modulus = p.pow(prec);
        let f = (&s * &s - d).mod_floor(&modulus);
        let deriv = (BigInt::from(2u32) * &s).mod_floor(&modulus);
        let inv = deriv.modinv(&modulus).expect("2s is a unit for odd split p");
        s = (&s - f * inv).mod_floor(&modulus);
    }
    Ok(s.mod_floor(&p.pow(k)))
}

// Root of x² = d (d ≡ 1 mod 8) correct to 2^k. A root modulo 2^(j+1) is only
// determined modulo 2^j, so lift one bit past the requested precision.
fn lift_two_adic(d: &BigInt, seed: BigInt, k: u32) -> BigInt {
    let mut s = seed;
    let mut j = 3u32;
    while j < k + 1 {
        let next = BigInt::one() << (j + 1);
        if !(&s * &s - d).mod_floor(&next).is_zero() {
            s += BigInt::one() << (j - 1);
        }
        j += 1;
    }
    s.mod_floor(&(BigInt::one() << k))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExtensionKind {
    Inert,
    Ramified,
    Split(Branch),
}

pub const DEFAULT_PRECISION_CAP: u32 = 1 << 16;
const INITIAL_PRECISION: u32 = 8;
const CACHED_PRECISION: u32 = 64;

/// A valuation on `Q(√d)` extending `v_p`.
#[derive(Clone, Debug)]
pub struct ExtendedValuation {
    p: BigInt,
    d: Radicand,
    kind: ExtensionKind,
    precision_cap: u32,
    // Split only: the branch root mod p^k for k = 8, 16, 32, 64.
    roots: Vec<(u32, BigInt)>,
}

impl PartialEq for ExtendedValuation {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.d == other.d && self.kind == other.kind
    }
}

impl Eq for ExtendedValuation {}

impl ExtendedValuation {
    /// The extension of the given kind; fails unless `p` actually behaves that
    /// way in `Q(√d)`.
    pub fn new(p: BigInt, d: Radicand, kind: ExtensionKind) -> Result<Self> {
        let actual = classify(&p, &d)?;
        let ok = matches!(
            (actual, kind),
            (Splitting::Inert, ExtensionKind::Inert)
                | (Splitting::Ramified, ExtensionKind::Ramified)
                | (Splitting::Split, ExtensionKind::Split(_))
        );
        if !ok {
            return domain(format!(
                "{p} is {actual:?} in Q(sqrt({d})), not {kind:?}"
            ));
        }
        let roots = match kind {
            ExtensionKind::Split(branch) => {
                let r = hensel_sqrt(&p, &d, CACHED_PRECISION, branch)?;
                let mut k = INITIAL_PRECISION;
                let mut roots = Vec::new();
                while k <= CACHED_PRECISION {
                    roots.push((k, r.mod_floor(&p.pow(k))));
                    k *= 2;
                }
                roots
            }
            _ => Vec::new(),
        };
        Ok(Self {
            p,
            d,
            kind,
            precision_cap: DEFAULT_PRECISION_CAP,
            roots,
        })
    }

    /// Every extension of `v_p` to `Q(√d)`: one, or two branches when `p` splits.
    pub fn all_extensions(p: &BigInt, d: &Radicand) -> Result<Vec<Self>> {
        let kinds = match classify(p, d)? {
            Splitting::Inert => vec![ExtensionKind::Inert],
            Splitting::Ramified => vec![ExtensionKind::Ramified],
            Splitting::Split => vec![
                ExtensionKind::Split(Branch::First),
                ExtensionKind::Split(Branch::Second),
            ],
        };
        kinds
            .into_iter()
            .map(|k| Self::new(p.clone(), d.clone(), k))
            .collect()
    }

    pub fn with_precision_cap(mut self, cap: u32) -> Self {
        self.precision_cap = cap.max(1);
        self
    }

    pub fn prime(&self) -> &BigInt {
        &self.p
    }

    pub fn radicand(&self) -> &Radicand {
        &self.d
    }

    pub fn kind(&self) -> ExtensionKind {
        self.kind
    }

    pub fn precision_cap(&self) -> u32 {
        self.precision_cap
    }

    /// The other split branch.
    pub fn conjugate_branch(&self) -> Option<Self> {
        match self.kind {
            ExtensionKind::Split(b) => Some(
                Self::new(self.p.clone(), self.d.clone(), ExtensionKind::Split(b.other()))
                    .expect("same splitting type")
                    .with_precision_cap(self.precision_cap),
            ),
            _ => None,
        }
    }

    fn root_at(&self, k: u32) -> Result<BigInt> {
        let branch = match self.kind {
            ExtensionKind::Split(b) => b,
            _ => unreachable!("root requested for a non-split extension"),
        };
        match self.roots.iter().find(|(j, _)| *j == k) {
            Some((_, r)) => Ok(r.clone()),
            None => hensel_sqrt(&self.p, &self.d, k, branch),
        }
    }

    /// Split case at a fixed Hensel precision. `None` when precision `k` is not
    /// enough to certify the value.
    ///
    /// With `s ≡ σ (mod p^k)`, `a + bσ = (a + bs) + b(σ − s)` and the error term
    /// has valuation at least `v_p(b) + k`, so `v_p(a + bs)` is exact once it is
    /// strictly below that bound.
    pub fn eval_split_at(&self, x: &QuadElem, k: u32) -> Result<Option<Value>> {
        if x.b().is_zero() {
            return Ok(Some(v_p(&self.p, x.a())));
        }
        let vb = v_p_int(&self.p, x.b()).expect("b is nonzero");
        let s = ExactRational::from_integer(self.root_at(k)?);
        let approx = add_q(x.a(), &mul_q(x.b(), &s));
        Ok(match v_p_int(&self.p, &approx) {
            Some(v) if v < vb + k as i64 => Some(Value::int(v)),
            _ => None,
        })
    }

    fn eval_quadratic(&self, x: &QuadElem) -> Result<Value> {
        if x.is_zero() {
            return Ok(Value::Infinity);
        }
        match self.kind {
            ExtensionKind::Inert | ExtensionKind::Ramified => {
                // Unique extension: u = v_p ∘ N / 2.
                let v = int_valuation_signed(&self.p, &x.norm());
                Ok(Value::Finite(ExactRational::new_raw(
                    BigInt::from(if v % 2 == 0 { v / 2 } else { v }),
                    BigInt::from(if v % 2 == 0 { 1 } else { 2 }),
                )))
            }
            ExtensionKind::Split(_) => {
                let mut k = INITIAL_PRECISION.min(self.precision_cap);
                loop {
                    if let Some(v) = self.eval_split_at(x, k)? {
                        return Ok(v);
                    }
                    if k >= self.precision_cap {
                        return Err(Error::PrecisionCap {
                            cap: self.precision_cap,
                            what: format!("{self} at {x}"),
                        });
                    }
                    k = (k.saturating_mul(2)).min(self.precision_cap);
                }
            }
        }
    }

    pub fn eval(&self, x: &FieldElem) -> Result<Value> {
        match x {
            FieldElem::Quadratic(q) if q.radicand() == &self.d => self.eval_quadratic(q),
            _ => self.eval_quadratic(&x.to_quadratic(&self.d)?),
        }
    }
}

impl fmt::Display for ExtendedValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.kind {
            ExtensionKind::Inert => "inert".to_owned(),
            ExtensionKind::Ramified => "ram".to_owned(),
            ExtensionKind::Split(b) => format!("split{}", b.index()),
        };
        write!(f, "{tag}:{},d={}", self.p, self.d)
    }
}

/// A rank-one discrete valuation on `Q` or on `Q(√d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Valuation {
    PAdic(PAdicValuation),
    Extended(ExtendedValuation),
}

impl Valuation {
    pub fn prime(&self) -> &BigInt {
        match self {
            Valuation::PAdic(v) => v.prime(),
            Valuation::Extended(u) => u.prime(),
        }
    }

    pub fn field(&self) -> Field {
        match self {
            Valuation::PAdic(_) => Field::Rationals,
            Valuation::Extended(u) => Field::Quadratic(u.radicand().clone()),
        }
    }

    pub fn eval(&self, x: &FieldElem) -> Result<Value> {
        match self {
            Valuation::PAdic(v) => v.eval(x),
            Valuation::Extended(u) => u.eval(x),
        }
    }

    pub(crate) fn set_precision_cap(self, cap: u32) -> Self {
        match self {
            Valuation::Extended(u) => Valuation::Extended(u.with_precision_cap(cap)),
            v => v,
        }
    }
}

impl From<PAdicValuation> for Valuation {
    fn from(v: PAdicValuation) -> Self {
        Valuation::PAdic(v)
    }
}

impl From<ExtendedValuation> for Valuation {
    fn from(u: ExtendedValuation) -> Self {
        Valuation::Extended(u)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::PAdic(v) => write!(f, "vp:{}", v.prime()),
            Valuation::Extended(u) => u.fmt(f),
        }
    }
}
