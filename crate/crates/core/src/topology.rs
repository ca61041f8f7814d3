//! Balls of the topology induced by a quasi-valuation `w`.
//!
//! `U_m(x) = { y : w(y − x) > m }` (open, `strict`) and
//! `Ũ_m(x) = { y : w(y − x) ≥ m }` (closed). Balls are membership predicates;
//! set-level statements are checked by sampling members, see [`crate::lemmas`].

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::Rng;

use crate::arith::{ExactRational, FieldElem};
use crate::error::{domain, Error, Result};
use crate::quasival::{int_power, QuasiValuation};
use crate::report::{Failure, Report};
use crate::sample::ElemSampler;
use crate::valuation::{v_p, Value};

#[derive(Clone, Debug)]
pub struct Ball {
    center: FieldElem,
    bound: ExactRational,
    strict: bool,
    qv: QuasiValuation,
}

impl Ball {
    pub fn new(qv: QuasiValuation, center: FieldElem, bound: ExactRational, strict: bool) -> Result<Self> {
        let center = center.in_field(qv.field())?;
        Ok(Self {
            center,
            bound,
            strict,
            qv,
        })
    }

    /// `U_m(x)`.
    pub fn open(qv: QuasiValuation, center: FieldElem, bound: ExactRational) -> Result<Self> {
        Self::new(qv, center, bound, true)
    }

    /// `Ũ_m(x)`.
    pub fn closed(qv: QuasiValuation, center: FieldElem, bound: ExactRational) -> Result<Self> {
        Self::new(qv, center, bound, false)
    }

    pub fn center(&self) -> &FieldElem {
        &self.center
    }

    pub fn bound(&self) -> &ExactRational {
        &self.bound
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub fn qv(&self) -> &QuasiValuation {
        &self.qv
    }

    /// The same kind of ball around another point, or with another bound.
    pub fn with_center(&self, center: FieldElem) -> Result<Self> {
        Self::new(self.qv.clone(), center, self.bound.clone(), self.strict)
    }

    pub fn with_bound(&self, bound: ExactRational, strict: bool) -> Self {
        Self {
            bound,
            strict,
            ..self.clone()
        }
    }

    pub fn distance_value(&self, y: &FieldElem) -> Result<Value> {
        self.qv.eval(&y.try_sub(&self.center)?)
    }

    pub fn contains(&self, y: &FieldElem) -> Result<bool> {
        let v = self.distance_value(y)?;
        Ok(if self.strict {
            v.gt_rational(&self.bound)
        } else {
            v.ge_rational(&self.bound)
        })
    }

    /// A random member `x + g^c · t`, with `t` integral and `g^c` a stable
    /// power whose value clears the bound (see
    /// [`QuasiValuation::unit_generator`]).
    pub fn sample_member<R: Rng + ?Sized>(&self, sampler: &ElemSampler, rng: &mut R) -> FieldElem {
        let (g, s) = self.qv.unit_generator();
        let ratio = &self.bound / &s;
        let c = if self.strict {
            ratio.floor().to_integer() + 1
        } else {
            ratio.ceil().to_integer()
        };
        let shift = sampler.integral(rng).scale(&int_power(&g, &c));
        self.center.try_add(&shift).expect("same field")
    }
}

/// Given `y ∈ U_{m₁}(x₁) ∩ U_{m₂}(x₂)`, the ball `U_{max(m₁, m₂)}(y)`, which
/// lies in both.
pub fn recenter(b1: &Ball, b2: &Ball, y: &FieldElem) -> Result<Ball> {
    if !b1.strict || !b2.strict {
        return domain("recenter expects open balls");
    }
    if !b1.contains(y)? || !b2.contains(y)? {
        return domain(format!("{y} does not lie in both balls"));
    }
    let tighter = if b1.bound <= b2.bound { b2 } else { b1 };
    tighter.with_center(y.clone())
}

/// Disjoint open balls around two distinct points.
#[derive(Clone, Debug)]
pub struct Separation {
    pub m: ExactRational,
    pub around_x: Ball,
    pub around_y: Ball,
}

/// `m = w(y − x)` and the balls `U_m(x)`, `U_m(y)`, which cannot meet: a
/// common point `z` would force `w(y − x) ≥ min(w(y − z), w(z − x)) > m`.
pub fn separation_witness(w: &QuasiValuation, x: &FieldElem, y: &FieldElem) -> Result<Separation> {
    let diff = y.try_sub(x)?;
    if diff.is_zero() {
        return domain("separation needs two distinct points");
    }
    let m = match w.eval(&diff)? {
        Value::Finite(m) => m,
        Value::Infinity => return Err(Error::Internal(format!("{w} is infinite at {diff} != 0"))),
    };
    Ok(Separation {
        around_x: Ball::open(w.clone(), x.clone(), m.clone())?,
        around_y: Ball::open(w.clone(), y.clone(), m.clone())?,
        m,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `Ũ_m(y) ⊆ Ũ_m(x)`.
    Inside,
    /// `Ũ_m(y)` misses `Ũ_m(x)`.
    Outside,
}

#[derive(Clone, Debug)]
pub struct Dichotomy {
    pub side: Side,
    /// `Ũ_m(y)`.
    pub ball: Ball,
}

impl Dichotomy {
    /// For `z ∈ Ũ_m(y)`, whether `z` lands on the certified side of `outer`.
    pub fn verify(&self, outer: &Ball, z: &FieldElem) -> Result<bool> {
        if !self.ball.contains(z)? {
            return domain(format!("{z} is not in the classified ball"));
        }
        Ok(outer.contains(z)? == (self.side == Side::Inside))
    }
}

/// Classifies the closed ball `Ũ_m(y)` relative to the closed ball `b = Ũ_m(x)`.
pub fn dichotomy(b: &Ball, y: &FieldElem) -> Result<Dichotomy> {
    if b.strict {
        return domain("dichotomy expects a closed ball");
    }
    let side = if b.contains(y)? {
        Side::Inside
    } else {
        Side::Outside
    };
    Ok(Dichotomy {
        side,
        ball: b.with_center(y.clone())?,
    })
}

/// `U_m(x)` as a union of closed balls `Ũ_α(y)`, `y ∈ U_m(x)`, with `α ∈ Z`.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub outer: Ball,
    pub alpha: BigInt,
}

impl Refinement {
    pub fn cover_ball(&self, y: &FieldElem) -> Result<Ball> {
        Ball::closed(
            self.outer.qv.clone(),
            y.clone(),
            ExactRational::from_integer(self.alpha.clone()),
        )
    }

    /// For `y ∈ U_m(x)` and `z ∈ Ũ_α(y)`: is `z ∈ U_m(x)`?
    pub fn verify(&self, y: &FieldElem, z: &FieldElem) -> Result<bool> {
        if !self.outer.contains(y)? {
            return domain(format!("{y} is not in the refined ball"));
        }
        if !self.cover_ball(y)?.contains(z)? {
            return domain(format!("{z} is not in the cover ball around {y}"));
        }
        self.outer.contains(z)
    }
}

/// `α = ⌊m⌋ + 1`, the least integer above the bound of an open ball.
pub fn refine_to_gamma(b: &Ball) -> Result<Refinement> {
    if !b.strict {
        return domain("refinement expects an open ball");
    }
    Ok(Refinement {
        outer: b.clone(),
        alpha: b.bound.floor().to_integer() + 1,
    })
}

/// For `w` extending `v = v_p` and rational `a ≠ 0`, evaluates
/// (a) `w(x) ≥ v(a)`, (b) `w(x) − v(a) ≥ 0`, (c) `w(x a⁻¹) ≥ 0` and
/// (d) `x a⁻¹ ∈ O_w`, and returns their common truth value.
pub fn ring_membership_chain(w: &QuasiValuation, x: &FieldElem, a: &ExactRational) -> Result<bool> {
    if a.is_zero() {
        return domain("the scalar a must be nonzero");
    }
    let Some(p) = w.base_prime() else {
        return Err(Error::Precondition(format!("{w} does not extend a p-adic valuation")));
    };
    let va = v_p(&p, a).finite().cloned().expect("a != 0");
    let wx = w.eval(x)?;
    let cond_a = wx.ge_rational(&va);
    let cond_b = match &wx {
        Value::Finite(q) => !(q - &va).is_negative(),
        Value::Infinity => true,
    };
    let scaled = x.scale(&a.recip());
    let cond_c = w.eval(&scaled)?.ge_rational(&ExactRational::zero());
    let cond_d = w.ring().contains(&scaled)?;
    if cond_a == cond_b && cond_b == cond_c && cond_c == cond_d {
        Ok(cond_a)
    } else {
        Err(Error::Internal(format!(
            "conditions disagree for {w}, x = {x}, a = {a}: {cond_a} {cond_b} {cond_c} {cond_d}"
        )))
    }
}

/// Checks that `w₁(x) ≥ α ⟺ w₂(x) ≥ α` for every sample `x` and every `α` in
/// the grid, and that the closed balls `Ũ_α^{w₁}(x)`, `Ũ_α^{w₂}(x)` agree on
/// consecutive sample pairs.
///
/// Both quasi-valuations must extend the same `v_p` and have the same ring on
/// the samples; otherwise the result is [`Error::Precondition`].
pub fn ring_value_equivalence(
    w1: &QuasiValuation,
    w2: &QuasiValuation,
    samples: &[FieldElem],
    alphas: &[BigInt],
) -> Result<Report> {
    match (w1.base_prime(), w2.base_prime()) {
        (Some(p1), Some(p2)) if p1 == p2 && w1.field() == w2.field() => {}
        _ => {
            return Err(Error::Precondition(format!(
                "{w1} and {w2} do not extend the same valuation"
            )))
        }
    }
    for x in samples {
        if w1.ring().contains(x)? != w2.ring().contains(x)? {
            return Err(Error::Precondition(format!(
                "{w1} and {w2} have different rings (witness {x})"
            )));
        }
    }
    let mut report = Report::new("ring-equivalence", None);
    for (i, x) in samples.iter().enumerate() {
        report.begin_instance();
        let (v1, v2) = (w1.eval(x)?, w2.eval(x)?);
        let next = &samples[(i + 1) % samples.len()];
        for alpha in alphas {
            let alpha_q = ExactRational::from_integer(alpha.clone());
            let (a1, a2) = (v1.ge_rational(&alpha_q), v2.ge_rational(&alpha_q));
            report.check((a1 != a2).then(|| {
                Failure::new(
                    [("x", x.to_string()), ("alpha", alpha.to_string())],
                    format!("w1 = {v1}, w2 = {v2} on the same side of alpha"),
                    format!("{a1} vs {a2}"),
                )
            }));
            let c1 = Ball::closed(w1.clone(), x.clone(), alpha_q.clone())?.contains(next)?;
            let c2 = Ball::closed(w2.clone(), x.clone(), alpha_q)?.contains(next)?;
            report.check((c1 != c2).then(|| {
                Failure::new(
                    [("center", x.to_string()), ("y", next.to_string()), ("alpha", alpha.to_string())],
                    "equal membership in both closed balls",
                    format!("{c1} vs {c2}"),
                )
            }));
        }
    }
    Ok(report)
}
