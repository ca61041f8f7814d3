//! Quasi-valuations: maps `w` into `Q ∪ {∞}` with `w(0) = ∞`,
//! `w(xy) ≥ w(x) + w(y)` and `w(x + y) ≥ min(w(x), w(y))`.
//!
//! Three constructors are provided. A finite minimum of valuations, the
//! `n`-adic quasi-valuation on `Q`, and a positive rescaling of either.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{ExactRational, Field, FieldElem, Radicand};
use crate::error::{domain, Result};
use crate::primes::factorize;
use crate::report::{Failure, Report};
use crate::valuation::{int_valuation_signed, ExtendedValuation, PAdicValuation, Valuation, Value};

/// Anything that assigns a value to field elements. The axiom harness accepts
/// any implementor so that it can be pointed at deliberately broken maps.
pub trait Evaluate {
    fn evaluate(&self, x: &FieldElem) -> Result<Value>;
}

/// Adapts a closure to [`Evaluate`].
pub struct FnEval<F>(pub F);

impl<F: Fn(&FieldElem) -> Result<Value>> Evaluate for FnEval<F> {
    fn evaluate(&self, x: &FieldElem) -> Result<Value> {
        (self.0)(x)
    }
}

impl Evaluate for Valuation {
    fn evaluate(&self, x: &FieldElem) -> Result<Value> {
        self.eval(x)
    }
}

#[derive(Clone, Debug)]
pub struct QuasiValuation {
    repr: Repr,
    field: Field,
}

#[derive(Clone, Debug)]
enum Repr {
    MinOf(Vec<Valuation>),
    NAdic {
        n: BigInt,
        factors: Vec<(BigInt, u64)>,
    },
    Scaled {
        inner: Box<QuasiValuation>,
        factor: ExactRational,
    },
}

/// Read-only view of how a quasi-valuation was built.
#[derive(Clone, Copy, Debug)]
pub enum Construction<'a> {
    MinOf(&'a [Valuation]),
    NAdic(&'a BigInt),
    Scaled(&'a QuasiValuation, &'a ExactRational),
}

impl QuasiValuation {
    /// Pointwise minimum of valuations on a common field.
    pub fn min_of(members: Vec<Valuation>) -> Result<Self> {
        let Some(first) = members.first() else {
            return domain("a minimum of valuations needs at least one member");
        };
        let field = first.field();
        if let Some(v) = members.iter().find(|v| v.field() != field) {
            return domain(format!("{v} is not defined on {field}"));
        }
        Ok(Self {
            repr: Repr::MinOf(members),
            field,
        })
    }

    pub fn from_valuation(v: impl Into<Valuation>) -> Self {
        Self::min_of(vec![v.into()]).expect("single member")
    }

    pub fn p_adic(p: u64) -> Result<Self> {
        Ok(Self::from_valuation(PAdicValuation::from_u64(p)?))
    }

    /// The minimum over every extension of `v_p` to `Q(√d)`, or `v_p` itself
    /// when `d` is `None`.
    pub fn extensions_of(p: &BigInt, d: Option<&Radicand>) -> Result<Self> {
        match d {
            None => Ok(Self::from_valuation(PAdicValuation::new(p.clone())?)),
            Some(d) => Self::min_of(
                ExtendedValuation::all_extensions(p, d)?
                    .into_iter()
                    .map(Valuation::from)
                    .collect(),
            ),
        }
    }

    /// The `n`-adic quasi-valuation on `Q`, `n ≥ 2` (not necessarily squarefree).
    pub fn n_adic(n: BigInt) -> Result<Self> {
        if n < BigInt::from(2u32) {
            return domain(format!("n-adic quasi-valuation needs n >= 2, got {n}"));
        }
        let factors = factorize(&n);
        Ok(Self {
            repr: Repr::NAdic { n, factors },
            field: Field::Rationals,
        })
    }

    /// `factor · inner` for a positive rational factor.
    pub fn scaled(inner: QuasiValuation, factor: ExactRational) -> Result<Self> {
        if !factor.is_positive() {
            return domain(format!("scale factor must be positive, got {factor}"));
        }
        let field = inner.field.clone();
        Ok(Self {
            repr: Repr::Scaled {
                inner: Box::new(inner),
                factor,
            },
            field,
        })
    }

    pub fn with_precision_cap(self, cap: u32) -> Self {
        let repr = match self.repr {
            Repr::MinOf(vs) => Repr::MinOf(vs.into_iter().map(|v| v.set_precision_cap(cap)).collect()),
            Repr::Scaled { inner, factor } => Repr::Scaled {
                inner: Box::new(inner.with_precision_cap(cap)),
                factor,
            },
            r => r,
        };
        Self { repr, field: self.field }
    }

    pub fn construction(&self) -> Construction<'_> {
        match &self.repr {
            Repr::MinOf(vs) => Construction::MinOf(vs),
            Repr::NAdic { n, .. } => Construction::NAdic(n),
            Repr::Scaled { inner, factor } => Construction::Scaled(inner, factor),
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn eval(&self, x: &FieldElem) -> Result<Value> {
        let native = match (x, &self.field) {
            (FieldElem::Rational(_), Field::Rationals) => true,
            (FieldElem::Quadratic(q), Field::Quadratic(d)) => q.radicand() == d,
            _ => false,
        };
        if native {
            self.eval_in_field(x)
        } else {
            self.eval_in_field(&x.in_field(&self.field)?)
        }
    }

    fn eval_in_field(&self, x: &FieldElem) -> Result<Value> {
        match &self.repr {
            Repr::MinOf(vs) => {
                let mut best = Value::Infinity;
                for v in vs {
                    best = best.min(v.eval(x)?);
                }
                Ok(best)
            }
            Repr::NAdic { factors, .. } => Ok(n_adic_from_factors(
                factors,
                &x.to_rational().expect("n-adic lives on Q"),
            )),
            Repr::Scaled { inner, factor } => Ok(inner.eval_in_field(x)?.scale(factor)),
        }
    }

    /// The prime `p` such that `w` restricts to `v_p` on `Q`, if there is one.
    pub fn base_prime(&self) -> Option<BigInt> {
        match &self.repr {
            Repr::MinOf(vs) => {
                let p = vs[0].prime();
                vs.iter().all(|v| v.prime() == p).then(|| p.clone())
            }
            Repr::NAdic { n, factors } => {
                (factors.len() == 1 && factors[0].1 == 1).then(|| n.clone())
            }
            Repr::Scaled { inner, factor } if factor.is_one() => inner.base_prime(),
            Repr::Scaled { .. } => None,
        }
    }

    pub fn extends_base(&self) -> bool {
        self.base_prime().is_some()
    }

    /// A minimum over valuations for different primes, e.g. `min(v_2, v_3)`.
    pub fn is_mixed_base(&self) -> bool {
        match &self.repr {
            Repr::MinOf(_) => self.base_prime().is_none(),
            Repr::NAdic { .. } => false,
            Repr::Scaled { inner, .. } => inner.is_mixed_base(),
        }
    }

    /// Every rational prime that `w` looks at.
    pub fn primes(&self) -> Vec<BigInt> {
        let mut ps: Vec<BigInt> = match &self.repr {
            Repr::MinOf(vs) => vs.iter().map(|v| v.prime().clone()).collect(),
            Repr::NAdic { factors, .. } => factors.iter().map(|(p, _)| p.clone()).collect(),
            Repr::Scaled { inner, .. } => inner.primes(),
        };
        ps.sort();
        ps.dedup();
        ps
    }

    /// `(g, s)` with `w(g^c · t) = s·c + w(t)` for every integer `c` and every
    /// `t`. `g` is a positive integer, hence stable.
    pub fn unit_generator(&self) -> (BigInt, ExactRational) {
        match &self.repr {
            Repr::MinOf(_) => (self.primes().iter().product(), ExactRational::one()),
            Repr::NAdic { n, .. } => (n.clone(), ExactRational::one()),
            Repr::Scaled { inner, factor } => {
                let (g, s) = inner.unit_generator();
                (g, s * factor)
            }
        }
    }

    pub fn ring(&self) -> QVRing {
        QVRing { qv: self.clone() }
    }
}

impl Evaluate for QuasiValuation {
    fn evaluate(&self, x: &FieldElem) -> Result<Value> {
        self.eval(x)
    }
}

impl fmt::Display for QuasiValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::MinOf(vs) if vs.len() == 1 => vs[0].fmt(f),
            Repr::MinOf(vs) => {
                f.write_str("min[")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("|")?;
                    }
                    v.fmt(f)?;
                }
                f.write_str("]")
            }
            Repr::NAdic { n, .. } => write!(f, "nadic:{n}"),
            Repr::Scaled { inner, factor } => {
                write!(f, "scaled:{},{inner}", crate::arith::format_compact(factor))
            }
        }
    }
}

fn n_adic_from_factors(factors: &[(BigInt, u64)], x: &ExactRational) -> Value {
    if x.is_zero() {
        return Value::Infinity;
    }
    let e = factors
        .iter()
        .map(|(p, k)| Integer::div_floor(&int_valuation_signed(p, x), &(*k as i64)))
        .min()
        .expect("n >= 2 has a prime factor");
    Value::int(e)
}

/// `w_n(x)`: the unique `e` with `x = nᵉ·a/b`, `n ∤ a`, `gcd(n, b) = 1`,
/// `gcd(a, b) = 1`; `w_n(0) = ∞`.
///
/// Computed as `min over p | n of ⌊v_p(x) / v_p(n)⌋`: `x/nᵉ` has
/// denominator prime to `n` iff `e ≤ v_p(x)/v_p(n)` for every `p | n`, and
/// `n` divides the numerator iff `e + 1` also satisfies that bound.
pub fn n_adic(n: &BigInt, x: &ExactRational) -> Result<Value> {
    if n < &BigInt::from(2u32) {
        return domain(format!("n-adic quasi-valuation needs n >= 2, got {n}"));
    }
    Ok(n_adic_from_factors(&factorize(n), x))
}

/// Checks `w(0) = ∞`, `w(−x) = w(x)` for every sample, and for every pair of
/// samples (B2), (B3) and `w(x + y) = min` when `w(x) ≠ w(y)`.
pub fn check_axioms<W: Evaluate + ?Sized>(w: &W, samples: &[FieldElem]) -> Report {
    let mut report = Report::new("axioms", None);
    let eval = |x: &FieldElem| w.evaluate(x).map_err(|e| e.to_string());

    let zero = eval(&FieldElem::zero());
    report.check(match &zero {
        Ok(Value::Infinity) => None,
        Ok(v) => Some(Failure::new([("x", "0")], "B1: w(0) = inf", v.to_string())),
        Err(e) => Some(Failure::new([("x", "0")], "B1: w(0) = inf", e.clone())),
    });

    let values: Vec<std::result::Result<Value, String>> = samples.iter().map(eval).collect();

    for (x, wx) in samples.iter().zip(&values) {
        report.begin_instance();
        let wx = match wx {
            Ok(v) => v,
            Err(e) => {
                report.fail(Failure::new([("x", x)], "a value", e.clone()));
                continue;
            }
        };
        let wneg = eval(&x.neg());
        report.check(match wneg {
            Ok(ref v) if v == wx => None,
            other => Some(Failure::new(
                [("x", x.to_string())],
                format!("w(-x) = w(x) = {wx}"),
                show(&other),
            )),
        });
    }

    for i in 0..samples.len() {
        let Ok(wx) = &values[i] else { continue };
        for j in i..samples.len() {
            let Ok(wy) = &values[j] else { continue };
            let (x, y) = (&samples[i], &samples[j]);
            let pair = || [("x", x.to_string()), ("y", y.to_string())];

            let prod = x.try_mul(y).map_err(|e| e.to_string()).and_then(|xy| eval(&xy));
            let lower = wx + wy;
            report.check(match prod {
                Ok(ref v) if *v >= lower => None,
                other => Some(Failure::new(pair(), format!("B2: w(xy) >= {lower}"), show(&other))),
            });

            let sum = x.try_add(y).map_err(|e| e.to_string()).and_then(|s| eval(&s));
            let floor = wx.clone().min(wy.clone());
            report.check(match sum {
                Ok(ref v) if *v >= floor => None,
                ref other => Some(Failure::new(
                    pair(),
                    format!("B3: w(x+y) >= {floor}"),
                    show(other),
                )),
            });
            if wx != wy {
                report.check(match sum {
                    Ok(ref v) if *v == floor => None,
                    ref other => Some(Failure::new(
                        pair(),
                        format!("w(x+y) = min = {floor} when w(x) != w(y)"),
                        show(other),
                    )),
                });
            }
        }
    }
    report
}

fn show(r: &std::result::Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => e.clone(),
    }
}

/// First sample `x` with `w(cx) ≠ w(c) + w(x)`, if any.
pub fn stability_witness<W: Evaluate + ?Sized>(
    w: &W,
    c: &FieldElem,
    samples: &[FieldElem],
) -> Result<Option<FieldElem>> {
    let wc = w.evaluate(c)?;
    for x in samples {
        let lhs = w.evaluate(&c.try_mul(x)?)?;
        if lhs != &wc + &w.evaluate(x)? {
            return Ok(Some(x.clone()));
        }
    }
    Ok(None)
}

/// `w(cx) = w(c) + w(x)` for every sample `x`.
pub fn is_stable<W: Evaluate + ?Sized>(w: &W, c: &FieldElem, samples: &[FieldElem]) -> Result<bool> {
    Ok(stability_witness(w, c, samples)?.is_none())
}

/// `α ∈ Z` with `w(x) < α`, namely `⌊w(x)⌋ + 1`.
pub fn value_bound<W: Evaluate + ?Sized>(w: &W, x: &FieldElem) -> Result<BigInt> {
    match w.evaluate(x)? {
        Value::Infinity => domain(format!("w({x}) = inf has no bound")),
        Value::Finite(q) => Ok(q.floor().to_integer() + 1),
    }
}

/// A nonzero `y` with `w(y) ≥ m`: `g^c` for the generator of
/// [`QuasiValuation::unit_generator`] and `c = ⌈m / s⌉`.
pub fn mg_witness(w: &QuasiValuation, m: &ExactRational) -> FieldElem {
    let (g, s) = w.unit_generator();
    let c = (m / s).ceil().to_integer();
    FieldElem::Rational(int_power(&g, &c))
}

pub(crate) fn int_power(g: &BigInt, c: &BigInt) -> ExactRational {
    let e: u32 = c.abs().try_into().expect("exponent fits in u32");
    let base = ExactRational::from_integer(g.pow(e));
    if c.is_negative() {
        base.recip()
    } else {
        base
    }
}

/// `O_w = { x : w(x) ≥ 0 }`.
#[derive(Clone, Debug)]
pub struct QVRing {
    qv: QuasiValuation,
}

impl QVRing {
    pub fn quasi_valuation(&self) -> &QuasiValuation {
        &self.qv
    }

    pub fn contains(&self, x: &FieldElem) -> Result<bool> {
        Ok(self.qv.eval(x)? >= Value::int(0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{integer, rational, QuadElem};
    use crate::valuation::{Branch, ExtensionKind};

    fn min23() -> QuasiValuation {
        QuasiValuation::min_of(vec![
            PAdicValuation::from_u64(2).unwrap().into(),
            PAdicValuation::from_u64(3).unwrap().into(),
        ])
        .unwrap()
    }

    fn r(n: i64, d: i64) -> FieldElem {
        rational(n, d).into()
    }

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn eval_examples() {
        let w = min23();
        assert_eq!(w.eval(&r(6, 1)).unwrap(), Value::int(1));
        assert_eq!(w.eval(&r(2, 1)).unwrap(), Value::int(0));
        assert_eq!(w.eval(&r(0, 1)).unwrap(), Value::Infinity);
        // Strictly superadditive on 2·3.
        let sum = &w.eval(&r(2, 1)).unwrap() + &w.eval(&r(3, 1)).unwrap();
        assert!(w.eval(&r(6, 1)).unwrap() > sum);
    }

    #[test]
    fn n_adic_examples() {
        assert_eq!(n_adic(&big(4), &integer(2)).unwrap(), Value::int(0));
        assert_eq!(n_adic(&big(12), &rational(144, 5)).unwrap(), Value::int(2));
        assert_eq!(n_adic(&big(7), &integer(0)).unwrap(), Value::Infinity);
        assert_eq!(n_adic(&big(4), &rational(1, 16)).unwrap(), Value::int(-2));
        assert_eq!(n_adic(&big(6), &rational(1, 2)).unwrap(), Value::int(-1));
        assert!(n_adic(&big(1), &integer(3)).is_err());
        assert!(QuasiValuation::n_adic(big(1)).is_err());
    }

    #[test]
    fn axioms_pass_on_small_exhaustive_set() {
        let samples: Vec<FieldElem> = [(0, 1), (1, 1), (-1, 1), (2, 1), (-2, 1), (3, 1), (6, 1), (1, 6), (5, 4)]
            .iter()
            .map(|&(n, d)| r(n, d))
            .collect();
        let report = check_axioms(&min23(), &samples);
        assert!(report.passed(), "{}", report.to_json());
        assert_eq!(report.instances, samples.len());
        assert!(report.checks > samples.len() * samples.len() / 2);
    }

    #[test]
    fn corrupted_function_is_caught() {
        let v2 = PAdicValuation::from_u64(2).unwrap();
        let broken = FnEval(|x: &FieldElem| {
            let q = x.to_rational().unwrap();
            let v = v2.eval_rational(&q);
            Ok(if q == integer(4) {
                Value::int(-2)
            } else {
                v
            })
        });
        let samples: Vec<FieldElem> = (-6..=6).map(|n| r(n, 1)).collect();
        let report = check_axioms(&broken, &samples);
        assert!(!report.passed());
        let f = &report.failures[0];
        assert!(f.inputs.values().any(|v| v == "4" || v == "-4"), "{f:?}");
    }

    #[test]
    fn stability() {
        let d = Radicand::from_i64(2).unwrap();
        let w = QuasiValuation::extensions_of(&big(7), Some(&d)).unwrap();
        let samples: Vec<FieldElem> = (-5..5)
            .flat_map(|a| (-3..3).map(move |b| (a, b)))
            .map(|(a, b)| QuadElem::new(integer(a), integer(b), d.clone()).into())
            .collect();
        assert!(is_stable(&w, &r(3, 7), &samples).unwrap());
        assert!(is_stable(&w, &FieldElem::zero(), &samples).unwrap());
        // min(u1, u2) is a quasi-valuation but 3 + √2 is not stable:
        // w(3+√2) = 0, while w((3+√2)(3−√2)) = w(7) = 1.
        let c: FieldElem = QuadElem::new(integer(3), integer(1), d.clone()).into();
        let witness = stability_witness(&w, &c, &samples).unwrap().unwrap();
        let lhs = w.eval(&c.try_mul(&witness).unwrap()).unwrap();
        assert!(lhs > &w.eval(&c).unwrap() + &w.eval(&witness).unwrap());
    }

    #[test]
    fn ring_membership() {
        let ring = min23().ring();
        assert!(ring.contains(&r(1, 5)).unwrap());
        assert!(!ring.contains(&r(1, 2)).unwrap());
        assert!(ring.contains(&FieldElem::zero()).unwrap());
    }

    #[test]
    fn scaled_ring_matches_inner_ring() {
        let w = min23();
        let w2 = QuasiValuation::scaled(w.clone(), rational(5, 2)).unwrap();
        for n in -20..20 {
            for d in 1..15 {
                let x = r(n, d);
                assert_eq!(w.ring().contains(&x).unwrap(), w2.ring().contains(&x).unwrap());
            }
        }
        assert!(QuasiValuation::scaled(w, integer(0)).is_err());
    }

    #[test]
    fn bounds_and_witnesses() {
        assert_eq!(value_bound(&min23(), &r(6, 1)).unwrap(), big(2));
        let n4 = QuasiValuation::n_adic(big(4)).unwrap();
        assert_eq!(value_bound(&n4, &r(1, 16)).unwrap(), big(-1));
        assert!(value_bound(&n4, &FieldElem::zero()).is_err());

        assert_eq!(mg_witness(&min23(), &integer(5)), r(7776, 1));
        assert_eq!(mg_witness(&min23(), &integer(0)), r(1, 1));
        let n12 = QuasiValuation::n_adic(big(12)).unwrap();
        let y = mg_witness(&n12, &integer(3));
        assert_eq!(y, r(1728, 1));
        assert_eq!(n12.eval(&y).unwrap(), Value::int(3));
        let scaled = QuasiValuation::scaled(n12, rational(1, 2)).unwrap();
        let y = mg_witness(&scaled, &rational(3, 2));
        assert!(scaled.eval(&y).unwrap() >= Value::Finite(rational(3, 2)));
    }

    #[test]
    fn base_prime_detection() {
        let d = Radicand::from_i64(2).unwrap();
        let split = QuasiValuation::extensions_of(&big(7), Some(&d)).unwrap();
        assert_eq!(split.base_prime(), Some(big(7)));
        assert!(min23().is_mixed_base());
        assert_eq!(min23().base_prime(), None);
        assert_eq!(QuasiValuation::n_adic(big(5)).unwrap().base_prime(), Some(big(5)));
        assert_eq!(QuasiValuation::n_adic(big(4)).unwrap().base_prime(), None);
        let twice = QuasiValuation::scaled(split.clone(), integer(2)).unwrap();
        assert_eq!(twice.base_prime(), None);
        let once = QuasiValuation::scaled(split, integer(1)).unwrap();
        assert_eq!(once.base_prime(), Some(big(7)));
    }

    #[test]
    fn min_of_rejects_mixed_fields() {
        let d = Radicand::from_i64(2).unwrap();
        let u = ExtendedValuation::new(big(7), d, ExtensionKind::Split(Branch::First)).unwrap();
        assert!(QuasiValuation::min_of(vec![PAdicValuation::from_u64(7).unwrap().into(), u.into()]).is_err());
        assert!(QuasiValuation::min_of(vec![]).is_err());
    }

    #[test]
    fn field_mismatch() {
        let x: FieldElem = QuadElem::sqrt(Radicand::from_i64(2).unwrap()).into();
        assert!(min23().eval(&x).is_err());
    }

    #[test]
    fn display_round_trips_through_spec_grammar() {
        assert_eq!(min23().to_string(), "min[vp:2|vp:3]");
        let d = Radicand::from_i64(2).unwrap();
        let split = QuasiValuation::extensions_of(&big(7), Some(&d)).unwrap();
        assert_eq!(split.to_string(), "min[split1:7,d=2|split2:7,d=2]");
        let s = QuasiValuation::scaled(split, rational(1, 2)).unwrap();
        assert_eq!(s.to_string(), "scaled:1/2,min[split1:7,d=2|split2:7,d=2]");
    }
}
