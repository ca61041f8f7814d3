//! Exact arithmetic in `Q` and in quadratic fields `Q(√d)`.
//!
//! Rationals are [`num_rational::BigRational`], which is always kept in lowest
//! terms with a positive denominator, so structural equality is numeric
//! equality. Quadratic elements carry their radicand and refuse to combine with
//! elements of a different field.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{domain, Error, Result};

/// An element of the base field `Q`.
pub type ExactRational = num_rational::BigRational;

pub fn rational(num: i64, den: i64) -> ExactRational {
    ExactRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn integer(n: i64) -> ExactRational {
    ExactRational::from_integer(BigInt::from(n))
}

/// Formats a rational as `num/den`, always with an explicit denominator.
pub fn format_fraction(q: &ExactRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Formats a rational as `num` when it is an integer, `num/den` otherwise.
pub fn format_compact(q: &ExactRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format_fraction(q)
    }
}

/// Parses `n` or `n/d` (surrounding whitespace allowed).
pub fn parse_fraction(text: &str) -> Result<ExactRational> {
    let text = text.trim();
    let bad = |pos: usize| Error::Parse {
        pos,
        message: format!("expected a rational of the form num/den, got {text:?}"),
    };
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad(0))?;
    let den: BigInt = den.parse().map_err(|_| bad(text.find('/').unwrap_or(0) + 1))?;
    if den.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(ExactRational::new(num, den))
}

/// A rational with machine-word parts. Arithmetic returns `None` instead of
/// overflowing, and callers then fall back to [`ExactRational`]. Sampling runs
/// spend nearly all their time on such small coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct SmallQ {
    n: i128,
    d: i128,
}

impl SmallQ {
    pub(crate) fn of(q: &ExactRational) -> Option<Self> {
        Some(Self {
            n: q.numer().to_i64()? as i128,
            d: q.denom().to_i64()? as i128,
        })
    }

    pub(crate) fn int(n: i128) -> Self {
        Self { n, d: 1 }
    }

    fn reduced(n: i128, d: i128) -> Option<Self> {
        if n == i128::MIN {
            return None;
        }
        let g = gcd_small(n, d);
        if g == 1 {
            return Some(Self { n, d });
        }
        Some(Self { n: div_small(n, g), d: div_small(d, g) })
    }

    pub(crate) fn add(self, o: Self) -> Option<Self> {
        if self.d == o.d {
            return Self::reduced(self.n.checked_add(o.n)?, self.d);
        }
        let n = self.n.checked_mul(o.d)?.checked_add(o.n.checked_mul(self.d)?)?;
        Self::reduced(n, self.d.checked_mul(o.d)?)
    }

    pub(crate) fn neg(self) -> Self {
        Self { n: -self.n, d: self.d }
    }

    pub(crate) fn sub(self, o: Self) -> Option<Self> {
        self.add(o.neg())
    }

    pub(crate) fn mul(self, o: Self) -> Option<Self> {
        if self.n == 0 || o.n == 0 {
            return Some(Self::int(0));
        }
        let (g1, g2) = (gcd_small(self.n, o.d), gcd_small(o.n, self.d));
        Some(Self {
            n: div_small(self.n, g1).checked_mul(div_small(o.n, g2))?,
            d: div_small(self.d, g2).checked_mul(div_small(o.d, g1))?,
        })
    }

    pub(crate) fn to_big(self) -> ExactRational {
        ExactRational::new_raw(self.n.into(), self.d.into())
    }
}

// 128-bit division is a library call; most operands fit in 64 bits.
fn gcd_small(a: i128, b: i128) -> i128 {
    if b == 1 || a == 1 {
        return 1;
    }
    match (i64::try_from(a), i64::try_from(b)) {
        (Ok(a), Ok(b)) => (a.unsigned_abs().gcd(&b.unsigned_abs())) as i128,
        _ => a.gcd(&b),
    }
}

fn div_small(a: i128, b: i128) -> i128 {
    if b == 1 {
        return a;
    }
    match (i64::try_from(a), i64::try_from(b)) {
        (Ok(a), Ok(b)) if b != -1 => (a / b) as i128,
        _ => a / b,
    }
}

/// `f` on small parts when every input and the result fit, else `slow`.
fn fast_or<const N: usize>(
    xs: [&ExactRational; N],
    f: impl FnOnce([SmallQ; N]) -> Option<SmallQ>,
    slow: impl FnOnce() -> ExactRational,
) -> ExactRational {
    let mut small = [SmallQ::int(0); N];
    for (slot, x) in small.iter_mut().zip(xs) {
        match SmallQ::of(x) {
            Some(q) => *slot = q,
            None => return slow(),
        }
    }
    f(small).map(SmallQ::to_big).unwrap_or_else(slow)
}

pub(crate) fn add_q(x: &ExactRational, y: &ExactRational) -> ExactRational {
    fast_or([x, y], |[a, b]| a.add(b), || x + y)
}

pub(crate) fn sub_q(x: &ExactRational, y: &ExactRational) -> ExactRational {
    fast_or([x, y], |[a, b]| a.sub(b), || x - y)
}

pub(crate) fn cmp_q(x: &ExactRational, y: &ExactRational) -> std::cmp::Ordering {
    match (SmallQ::of(x), SmallQ::of(y)) {
        (Some(a), Some(b)) => (a.n * b.d).cmp(&(b.n * a.d)),
        _ => x.cmp(y),
    }
}

pub(crate) fn mul_q(x: &ExactRational, y: &ExactRational) -> ExactRational {
    fast_or([x, y], |[a, b]| a.mul(b), || x * y)
}

/// Exponent of `p` in the nonzero integer `n`.
pub(crate) fn int_valuation(p: &BigInt, n: &BigInt) -> u64 {
    debug_assert!(!n.is_zero());
    if let (Some(p), Some(n)) = (p.to_u64(), n.magnitude().to_u64()) {
        let mut n = n;
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        return e;
    }
    let mut n = n.clone();
    let mut e = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return e;
        }
        n = q;
        e += 1;
    }
}

/// Splits `n ≠ 0` as `n = s² · f` with `f` squarefree (sign kept on `f`).
///
/// Trial division runs up to `∛|n|`; the cofactor left over has at most two
/// prime factors, so it is either squarefree or the square of a prime.
pub fn square_decomposition(n: &BigInt) -> (BigInt, BigInt) {
    assert!(!n.is_zero(), "square_decomposition of zero");
    let sign = if n.is_negative() { -BigInt::one() } else { BigInt::one() };
    let mut rest = n.abs();
    let mut square = BigInt::one();
    let mut free = BigInt::one();
    let limit = rest.cbrt() + 1u32;
    let mut q = BigInt::from(2u32);
    while q <= limit && q.clone() * &q <= rest {
        if rest.is_multiple_of(&q) {
            let mut e = 0u32;
            while rest.is_multiple_of(&q) {
                rest /= &q;
                e += 1;
            }
            square *= q.pow(e / 2);
            if e % 2 == 1 {
                free *= &q;
            }
        }
        q += if q == BigInt::from(2u32) { 1u32 } else { 2u32 };
    }
    let root = rest.sqrt();
    if rest > BigInt::one() && &root * &root == rest {
        square *= root;
    } else {
        free *= rest;
    }
    (square, sign * free)
}

/// A squarefree integer `d ∉ {0, 1}`: the parameter of the field `Q(√d)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Radicand(std::sync::Arc<BigInt>);

impl Radicand {
    pub fn new(d: BigInt) -> Result<Self> {
        if d.is_zero() || d.is_one() {
            return domain(format!("radicand d = {d} gives a trivial extension"));
        }
        let (square, _) = square_decomposition(&d);
        if !square.is_one() {
            return domain(format!("radicand d = {d} is not squarefree"));
        }
        Ok(Self(std::sync::Arc::new(d)))
    }

    pub fn from_i64(d: i64) -> Result<Self> {
        Self::new(BigInt::from(d))
    }

    pub fn value(&self) -> &BigInt {
        &self.0
    }
}

impl fmt::Display for Radicand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// The field an element lives in.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    Rationals,
    Quadratic(Radicand),
}

impl Field {
    pub fn radicand(&self) -> Option<&Radicand> {
        match self {
            Field::Rationals => None,
            Field::Quadratic(d) => Some(d),
        }
    }

    /// `[E : Q]`.
    pub fn degree(&self) -> usize {
        match self {
            Field::Rationals => 1,
            Field::Quadratic(_) => 2,
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rationals => f.write_str("Q"),
            Field::Quadratic(d) => write!(f, "Q(sqrt({d}))"),
        }
    }
}

/// `a + b√d` with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadElem {
    a: ExactRational,
    b: ExactRational,
    d: Radicand,
}

impl QuadElem {
    pub fn new(a: ExactRational, b: ExactRational, d: Radicand) -> Self {
        Self { a, b, d }
    }

    pub fn from_rational(a: ExactRational, d: Radicand) -> Self {
        Self::new(a, ExactRational::zero(), d)
    }

    /// `√d` itself.
    pub fn sqrt(d: Radicand) -> Self {
        Self::new(ExactRational::zero(), ExactRational::one(), d)
    }

    pub fn zero(d: Radicand) -> Self {
        Self::from_rational(ExactRational::zero(), d)
    }

    pub fn one(d: Radicand) -> Self {
        Self::from_rational(ExactRational::one(), d)
    }

    pub fn a(&self) -> &ExactRational {
        &self.a
    }

    pub fn b(&self) -> &ExactRational {
        &self.b
    }

    pub fn radicand(&self) -> &Radicand {
        &self.d
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    fn same_field(&self, other: &Self) -> Result<()> {
        if self.d == other.d {
            Ok(())
        } else {
            domain(format!(
                "cannot combine elements of Q(sqrt({})) and Q(sqrt({}))",
                self.d, other.d
            ))
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(Self::new(add_q(&self.a, &other.a), add_q(&self.b, &other.b), self.d.clone()))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(Self::new(sub_q(&self.a, &other.a), sub_q(&self.b, &other.b), self.d.clone()))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        let (x, y) = (self, other);
        let small = || -> Option<(SmallQ, SmallQ)> {
            let (a1, b1, a2, b2) = (SmallQ::of(&x.a)?, SmallQ::of(&x.b)?, SmallQ::of(&y.a)?, SmallQ::of(&y.b)?);
            let d = SmallQ::int(x.d.0.to_i64()? as i128);
            let a = a1.mul(a2)?.add(b1.mul(b2)?.mul(d)?)?;
            let b = a1.mul(b2)?.add(a2.mul(b1)?)?;
            Some((a, b))
        };
        let (a, b) = match small() {
            Some((a, b)) => (a.to_big(), b.to_big()),
            None => {
                let d = ExactRational::from_integer((*x.d.0).clone());
                (&x.a * &y.a + &x.b * &y.b * &d, &x.a * &y.b + &y.a * &x.b)
            }
        };
        Ok(Self::new(a, b, self.d.clone()))
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        self.try_mul(&other.inverse()?)
    }

    pub fn neg(&self) -> Self {
        Self::new(-&self.a, -&self.b, self.d.clone())
    }

    pub fn conjugate(&self) -> Self {
        Self::new(self.a.clone(), -&self.b, self.d.clone())
    }

    /// The field norm `a² − b²d`.
    pub fn norm(&self) -> ExactRational {
        let d = ExactRational::from_integer((*self.d.0).clone());
        fast_or(
            [&self.a, &self.b, &d],
            |[a, b, d]| a.mul(a)?.sub(b.mul(b)?.mul(d)?),
            || &self.a * &self.a - &self.b * &self.b * &d,
        )
    }

    pub fn scale(&self, c: &ExactRational) -> Self {
        Self::new(&self.a * c, &self.b * c, self.d.clone())
    }

    /// `conjugate(x) / norm(x)`.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.norm();
        if n.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.conjugate().scale(&n.recip()))
    }
}

impl fmt::Display for QuadElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = &self.d;
        let coeff = |q: &ExactRational| -> String {
            if q.is_one() {
                String::new()
            } else {
                format!("{}*", format_compact(q))
            }
        };
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => f.write_str(&format_compact(&self.a)),
            (true, false) if self.b.is_negative() => {
                write!(f, "-{}sqrt({d})", coeff(&-&self.b))
            }
            (true, false) => write!(f, "{}sqrt({d})", coeff(&self.b)),
            (false, false) => {
                let sign = if self.b.is_negative() { '-' } else { '+' };
                write!(
                    f,
                    "{} {sign} {}sqrt({d})",
                    format_compact(&self.a),
                    coeff(&self.b.abs())
                )
            }
        }
    }
}

/// An element of `Q` or of some `Q(√d)`.
///
/// Arithmetic embeds `Q` into `Q(√d)` as needed. Equality is numeric: a
/// rational equals a quadratic element with the same rational part and zero
/// `√d` coefficient.
#[derive(Clone, Debug)]
pub enum FieldElem {
    Rational(ExactRational),
    Quadratic(QuadElem),
}

impl PartialEq for FieldElem {
    fn eq(&self, other: &Self) -> bool {
        use FieldElem::*;
        match (self, other) {
            (Rational(x), Rational(y)) => x == y,
            (Quadratic(x), Quadratic(y)) => {
                x.a == y.a && x.b == y.b && (x.d == y.d || x.b.is_zero())
            }
            (Rational(x), Quadratic(y)) | (Quadratic(y), Rational(x)) => {
                y.b.is_zero() && &y.a == x
            }
        }
    }
}

impl Eq for FieldElem {}

impl From<ExactRational> for FieldElem {
    fn from(q: ExactRational) -> Self {
        FieldElem::Rational(q)
    }
}

impl From<QuadElem> for FieldElem {
    fn from(x: QuadElem) -> Self {
        FieldElem::Quadratic(x)
    }
}

impl From<i64> for FieldElem {
    fn from(n: i64) -> Self {
        FieldElem::Rational(integer(n))
    }
}

impl FieldElem {
    pub fn zero() -> Self {
        FieldElem::Rational(ExactRational::zero())
    }

    pub fn one() -> Self {
        FieldElem::Rational(ExactRational::one())
    }

    pub fn field(&self) -> Field {
        match self {
            FieldElem::Rational(_) => Field::Rationals,
            FieldElem::Quadratic(x) => Field::Quadratic(x.d.clone()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FieldElem::Rational(q) => q.is_zero(),
            FieldElem::Quadratic(x) => x.is_zero(),
        }
    }

    /// The rational value, if the element lies in `Q`.
    pub fn to_rational(&self) -> Option<ExactRational> {
        match self {
            FieldElem::Rational(q) => Some(q.clone()),
            FieldElem::Quadratic(x) if x.b.is_zero() => Some(x.a.clone()),
            FieldElem::Quadratic(_) => None,
        }
    }

    /// Coefficients `(a, b)` with respect to `{1, √d}`.
    pub fn coefficients(&self) -> (ExactRational, ExactRational) {
        match self {
            FieldElem::Rational(q) => (q.clone(), ExactRational::zero()),
            FieldElem::Quadratic(x) => (x.a.clone(), x.b.clone()),
        }
    }

    /// The element viewed in `Q(√d)`.
    pub fn to_quadratic(&self, d: &Radicand) -> Result<QuadElem> {
        match self {
            FieldElem::Rational(q) => Ok(QuadElem::from_rational(q.clone(), d.clone())),
            FieldElem::Quadratic(x) if &x.d == d => Ok(x.clone()),
            FieldElem::Quadratic(x) if x.b.is_zero() => {
                Ok(QuadElem::from_rational(x.a.clone(), d.clone()))
            }
            FieldElem::Quadratic(x) => domain(format!(
                "element of Q(sqrt({})) used in Q(sqrt({d}))",
                x.d
            )),
        }
    }

    /// Moves the element into `field` (embedding `Q ⊂ Q(√d)`), or fails if it
    /// does not belong there.
    pub fn in_field(&self, field: &Field) -> Result<FieldElem> {
        match field {
            Field::Quadratic(d) => self.to_quadratic(d).map(FieldElem::Quadratic),
            Field::Rationals => match self.to_rational() {
                Some(q) => Ok(FieldElem::Rational(q)),
                None => domain(format!("{self} does not lie in Q")),
            },
        }
    }

    fn binary(
        &self,
        other: &Self,
        rat: impl Fn(&ExactRational, &ExactRational) -> Result<ExactRational>,
        quad: impl Fn(&QuadElem, &QuadElem) -> Result<QuadElem>,
    ) -> Result<Self> {
        use FieldElem::*;
        match (self, other) {
            (Rational(x), Rational(y)) => rat(x, y).map(Rational),
            (Quadratic(x), Quadratic(y)) => quad(x, y).map(Quadratic),
            (Rational(x), Quadratic(y)) => {
                quad(&QuadElem::from_rational(x.clone(), y.d.clone()), y).map(Quadratic)
            }
            (Quadratic(x), Rational(y)) => {
                quad(x, &QuadElem::from_rational(y.clone(), x.d.clone())).map(Quadratic)
            }
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.binary(other, |x, y| Ok(add_q(x, y)), QuadElem::try_add)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.binary(other, |x, y| Ok(sub_q(x, y)), QuadElem::try_sub)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.binary(other, |x, y| Ok(mul_q(x, y)), QuadElem::try_mul)
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.binary(
            other,
            |x, y| {
                if y.is_zero() {
                    Err(Error::DivisionByZero)
                } else {
                    Ok(x / y)
                }
            },
            QuadElem::try_div,
        )
    }

    pub fn neg(&self) -> Self {
        match self {
            FieldElem::Rational(q) => FieldElem::Rational(-q),
            FieldElem::Quadratic(x) => FieldElem::Quadratic(x.neg()),
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        match self {
            FieldElem::Rational(q) if q.is_zero() => Err(Error::DivisionByZero),
            FieldElem::Rational(q) => Ok(FieldElem::Rational(q.recip())),
            FieldElem::Quadratic(x) => x.inverse().map(FieldElem::Quadratic),
        }
    }

    pub fn norm(&self) -> ExactRational {
        match self {
            FieldElem::Rational(q) => q * q,
            FieldElem::Quadratic(x) => x.norm(),
        }
    }

    pub fn conjugate(&self) -> Self {
        match self {
            FieldElem::Rational(_) => self.clone(),
            FieldElem::Quadratic(x) => FieldElem::Quadratic(x.conjugate()),
        }
    }

    pub fn scale(&self, c: &ExactRational) -> Self {
        match self {
            FieldElem::Rational(q) => FieldElem::Rational(q * c),
            FieldElem::Quadratic(x) => FieldElem::Quadratic(x.scale(c)),
        }
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldElem::Rational(q) => f.write_str(&format_compact(q)),
            FieldElem::Quadratic(x) => x.fmt(f),
        }
    }
}
