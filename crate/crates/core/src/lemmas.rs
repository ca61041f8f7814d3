//! Sampling checks of the ball topology.
//!
//! Each check draws random instances (a quasi-valuation from the family, centres
//! and bounds) and, per instance, a fixed number of sampled points. Members of
//! a ball are drawn with [`Ball::sample_member`]; arbitrary points near a
//! centre as `centre + ElemSampler::element`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use rand::Rng;

use crate::arith::{ExactRational, FieldElem, Radicand};
use crate::error::{Error, Result};
use crate::quasival::{Construction, QuasiValuation};
use crate::report::{Failure, Report};
use crate::sample::{seeded_rng, ElemSampler, SampleRng};
use crate::topology::{
    dichotomy, recenter, refine_to_gamma, ring_membership_chain, ring_value_equivalence,
    separation_witness, Ball, Side,
};
use crate::valuation::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Check {
    /// A point of two open balls has an open ball around it inside both.
    Recenter,
    /// A common point of `U_m(x)` and `U_m(y)` forces `w(y − x) > m`.
    Intersection,
    /// `U_m(x)` and `U_m(y)` with `m = w(y − x)` are disjoint.
    Hausdorff,
    /// The complement of an open ball is open.
    Clopen,
    /// Any two points are split by an open ball and its complement.
    Disconnected,
    /// A closed ball around `y` is inside or outside a closed ball around `x`.
    Dichotomy,
    /// `U_m(x)` is a union of closed balls with integer radius above `m`.
    Refinement,
    /// `m₁ ≤ m₂` gives `U_{m₂}(x) ⊆ U_{m₁}(x)`.
    Nesting,
    /// `y ∈ U_m(x)` iff `y − x ∈ U_m(0)`.
    Translation,
    /// `w(x) ≥ v(a)` iff `x a⁻¹` lies in the ring, four ways.
    RingChain,
    /// Same-ring quasi-valuations agree on `w(x) ≥ α`, `α ∈ Z`.
    RingEquivalence,
}

impl Check {
    pub const ALL: [Check; 11] = [
        Check::Recenter,
        Check::Intersection,
        Check::Hausdorff,
        Check::Clopen,
        Check::Disconnected,
        Check::Dichotomy,
        Check::Refinement,
        Check::Nesting,
        Check::Translation,
        Check::RingChain,
        Check::RingEquivalence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Recenter => "recenter",
            Check::Intersection => "intersection",
            Check::Hausdorff => "hausdorff",
            Check::Clopen => "clopen",
            Check::Disconnected => "disconnected",
            Check::Dichotomy => "dichotomy",
            Check::Refinement => "refinement",
            Check::Nesting => "nesting",
            Check::Translation => "translation",
            Check::RingChain => "ring-chain",
            Check::RingEquivalence => "ring-equivalence",
        }
    }

    /// Numeric identifiers accepted on the command line.
    pub fn numeric_id(self) -> Option<&'static str> {
        match self {
            Check::Recenter => Some("2.2"),
            Check::Intersection => Some("2.10"),
            Check::Hausdorff => Some("2.11"),
            Check::Clopen => Some("2.12"),
            Check::Disconnected => Some("2.13"),
            Check::Dichotomy => Some("2.14"),
            Check::Refinement => Some("2.15"),
            Check::RingChain => Some("2.17"),
            Check::RingEquivalence => Some("2.18"),
            Check::Nesting | Check::Translation => None,
        }
    }

    /// Only quasi-valuations restricting to some `v_p` take part.
    pub fn needs_base(self) -> bool {
        matches!(self, Check::RingChain | Check::RingEquivalence)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let alias = match s {
            "2.16" => Some(Check::Refinement),
            "2.19" => Some(Check::RingEquivalence),
            _ => None,
        };
        alias
            .or_else(|| {
                Check::ALL
                    .into_iter()
                    .find(|c| c.name() == s || c.numeric_id() == Some(s))
            })
            .ok_or_else(|| Error::Domain(format!("unknown check {s:?}")))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SuiteConfig {
    /// Instances per quasi-valuation in the family.
    pub instances: usize,
    /// Sampled points per instance.
    pub samples: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            instances: 20,
            samples: 100,
            seed: 0,
        }
    }
}

/// Quasi-valuations covering every constructor: `v_p` on `Q`, inert, ramified
/// and split extensions, minima over split branches, minima over mixed primes,
/// `n`-adic, and rescalings.
pub fn standard_family() -> Vec<QuasiValuation> {
    let mut family = Vec::new();
    let big = BigInt::from;
    let rad = |d: i64| Radicand::from_i64(d).expect("squarefree");
    for p in [2, 3, 5] {
        family.push(QuasiValuation::p_adic(p).expect("prime"));
    }
    for (p, d) in [(5, 2), (2, 2), (7, 2), (2, -1), (2, -7), (3, 5), (5, 5), (11, 5), (2, 5), (3, -7)] {
        family.push(QuasiValuation::extensions_of(&big(p), Some(&rad(d))).expect("valid extension"));
    }
    let split = QuasiValuation::extensions_of(&big(7), Some(&rad(2))).expect("split");
    if let Construction::MinOf(members) = split.construction() {
        family.push(QuasiValuation::from_valuation(members[0].clone()));
    }
    family.push(crate::qvspec::parse_qv("min[vp:2|vp:3]").expect("valid spec"));
    family.push(QuasiValuation::n_adic(big(12)).expect("n >= 2"));
    family.push(QuasiValuation::n_adic(big(4)).expect("n >= 2"));
    family.push(QuasiValuation::scaled(split, ExactRational::new(big(1), big(2))).expect("positive"));
    family
}

fn random_bound<R: Rng + ?Sized>(rng: &mut R) -> ExactRational {
    ExactRational::new(BigInt::from(rng.random_range(-6..=8)), BigInt::from(2))
}

fn near<R: Rng + ?Sized>(x: &FieldElem, sampler: &ElemSampler, rng: &mut R) -> FieldElem {
    x.try_add(&sampler.element(rng)).expect("same field")
}

struct Ctx<'a> {
    w: &'a QuasiValuation,
    sampler: ElemSampler,
    samples: usize,
}

type Outcome = Result<Option<Failure>>;

fn ok_if(cond: bool, failure: impl FnOnce() -> Failure) -> Outcome {
    Ok((!cond).then(failure))
}

fn inputs(ctx: &Ctx<'_>, extra: &[(&str, String)]) -> Vec<(String, String)> {
    let mut v = vec![("w".to_owned(), ctx.w.to_string())];
    v.extend(extra.iter().map(|(k, s)| ((*k).to_owned(), s.clone())));
    v
}

fn fail(ctx: &Ctx<'_>, extra: &[(&str, String)], expected: &str, got: impl fmt::Display) -> Failure {
    Failure::new(inputs(ctx, extra), expected, got.to_string())
}

/// Runs one check against every member of `family` the check applies to.
pub fn run_check(check: Check, family: &[QuasiValuation], cfg: &SuiteConfig) -> Report {
    let mut report = Report::new(check.name(), Some(cfg.seed));
    let mut rng = seeded_rng(cfg.seed);
    for w in family {
        if check.needs_base() && !w.extends_base() {
            continue;
        }
        let ctx = Ctx {
            w,
            sampler: ElemSampler::for_qv(w),
            samples: cfg.samples,
        };
        for _ in 0..cfg.instances {
            report.begin_instance();
            if let Err(e) = run_instance(check, &ctx, &mut rng, &mut report) {
                report.fail(fail(&ctx, &[], "instance to run", e));
            }
        }
    }
    report
}

fn run_instance(check: Check, ctx: &Ctx<'_>, rng: &mut SampleRng, report: &mut Report) -> Result<()> {
    let mut record = |o: Outcome| -> Result<()> {
        report.check(o?);
        Ok(())
    };
    let w = ctx.w;
    let s = &ctx.sampler;
    let x = s.element(rng);
    let m = random_bound(rng);
    let open = |c: &FieldElem, m: &ExactRational| Ball::open(w.clone(), c.clone(), m.clone());

    match check {
        Check::Recenter => {
            let (mut m1, mut m2) = (m, random_bound(rng));
            if m1 > m2 {
                std::mem::swap(&mut m1, &mut m2);
            }
            let y = x;
            let zero = s.zero();
            let x1 = y.try_sub(&open(&zero, &m1)?.sample_member(s, rng))?;
            let x2 = y.try_sub(&open(&zero, &m2)?.sample_member(s, rng))?;
            let (b1, b2) = (open(&x1, &m1)?, open(&x2, &m2)?);
            let nb = if rng.random_bool(0.5) {
                recenter(&b1, &b2, &y)?
            } else {
                recenter(&b2, &b1, &y)?
            };
            let here = || {
                vec![
                    ("x1", x1.to_string()),
                    ("m1", m1.to_string()),
                    ("x2", x2.to_string()),
                    ("m2", m2.to_string()),
                    ("y", y.to_string()),
                ]
            };
            record(ok_if(nb.bound() == &m2 && nb.center() == &y, || {
                fail(ctx, &here(), "U_{m2}(y)", format!("U_{}({})", nb.bound(), nb.center()))
            }))?;
            for _ in 0..ctx.samples {
                let z = if rng.random_bool(0.8) {
                    nb.sample_member(s, rng)
                } else {
                    near(&y, s, rng)
                };
                let outcome = if nb.contains(&z)? {
                    let both = b1.contains(&z)? && b2.contains(&z)?;
                    ok_if(both, || {
                        let mut inp = here();
                        inp.push(("z", z.to_string()));
                        fail(ctx, &inp, "z in both balls", "z outside one of them")
                    })
                } else {
                    Ok(None)
                };
                record(outcome)?;
            }
        }
        Check::Intersection => {
            let zero = s.zero();
            let around_zero = open(&zero, &m)?;
            for _ in 0..ctx.samples {
                let z = s.element(rng);
                let a = z.try_add(&around_zero.sample_member(s, rng))?;
                let b = z.try_add(&around_zero.sample_member(s, rng))?;
                let in_both = open(&a, &m)?.contains(&z)? && open(&b, &m)?.contains(&z)?;
                let value = w.eval(&b.try_sub(&a)?)?;
                record(ok_if(!in_both || value.gt_rational(&m), || {
                    fail(
                        ctx,
                        &[("x", a.to_string()), ("y", b.to_string()), ("z", z.to_string()), ("m", m.to_string())],
                        "w(y - x) > m",
                        &value,
                    )
                }))?;
            }
        }
        Check::Hausdorff => {
            let y = x.try_add(&s.nonzero_element(rng))?;
            let sep = separation_witness(w, &x, &y)?;
            let swapped = separation_witness(w, &y, &x)?;
            let here = || vec![("x", x.to_string()), ("y", y.to_string()), ("m", sep.m.to_string())];
            record(ok_if(swapped.m == sep.m, || fail(ctx, &here(), "symmetric m", &swapped.m)))?;
            for _ in 0..ctx.samples {
                let (src, other) = if rng.random_bool(0.5) {
                    (&sep.around_x, &sep.around_y)
                } else {
                    (&sep.around_y, &sep.around_x)
                };
                let z = src.sample_member(s, rng);
                record(ok_if(!other.contains(&z)?, || {
                    let mut inp = here();
                    inp.push(("z", z.to_string()));
                    fail(ctx, &inp, "z in exactly one ball", "z in both")
                }))?;
            }
        }
        Check::Clopen => {
            let ball = open(&x, &m)?;
            let y = match (0..10).map(|_| near(&x, s, rng)).find(|y| !ball.contains(y).unwrap_or(true)) {
                Some(y) => y,
                None => {
                    // g^c with s·c ≤ m has value exactly s·c, so x + g^c is outside.
                    let (g, step) = w.unit_generator();
                    let c = (&m / &step).floor().to_integer();
                    x.try_add(&FieldElem::Rational(crate::quasival::int_power(&g, &c)))?
                }
            };
            record(ok_if(!ball.contains(&y)?, || {
                fail(ctx, &[("x", x.to_string()), ("m", m.to_string()), ("y", y.to_string())], "y outside U_m(x)", "inside")
            }))?;
            let around_y = open(&y, &m)?;
            for _ in 0..ctx.samples {
                let z = around_y.sample_member(s, rng);
                record(ok_if(!ball.contains(&z)?, || {
                    fail(
                        ctx,
                        &[("x", x.to_string()), ("m", m.to_string()), ("y", y.to_string()), ("z", z.to_string())],
                        "U_m(y) disjoint from U_m(x)",
                        "z in both",
                    )
                }))?;
            }
        }
        Check::Disconnected => {
            let y = near(&x, s, rng);
            if y == x {
                return Ok(());
            }
            let dist = match w.eval(&x.try_sub(&y)?)? {
                Value::Finite(q) => q,
                Value::Infinity => return Err(Error::Internal(format!("w infinite at {x} - {y}"))),
            };
            let u1 = open(&x, &dist)?;
            let here = || vec![("x", x.to_string()), ("y", y.to_string()), ("m", dist.to_string())];
            record(ok_if(u1.contains(&x)? && !u1.contains(&y)?, || {
                fail(ctx, &here(), "x in U_1, y in its complement", "not separated")
            }))?;
            let around_y = open(&y, &dist)?;
            for _ in 0..ctx.samples {
                let z = around_y.sample_member(s, rng);
                record(ok_if(!u1.contains(&z)?, || {
                    let mut inp = here();
                    inp.push(("z", z.to_string()));
                    fail(ctx, &inp, "U_m(y) inside the complement", "z in U_1")
                }))?;
            }
        }
        Check::Dichotomy => {
            let b = Ball::closed(w.clone(), x.clone(), m.clone())?;
            let y = match rng.random_range(0..5) {
                0 => x.clone(),
                1 | 2 => b.sample_member(s, rng),
                _ => near(&x, s, rng),
            };
            let d = dichotomy(&b, &y)?;
            let inside = b.contains(&y)?;
            let here = || vec![("x", x.to_string()), ("m", m.to_string()), ("y", y.to_string())];
            record(ok_if(inside == (d.side == Side::Inside), || {
                fail(ctx, &here(), "exactly one side", format!("{:?}", d.side))
            }))?;
            for _ in 0..ctx.samples {
                let z = d.ball.sample_member(s, rng);
                record(ok_if(d.verify(&b, &z)?, || {
                    let mut inp = here();
                    inp.push(("z", z.to_string()));
                    fail(ctx, &inp, &format!("z on the {:?} side", d.side), "z on the other side")
                }))?;
            }
        }
        Check::Refinement => {
            let outer = open(&x, &m)?;
            let r = refine_to_gamma(&outer)?;
            let alpha = ExactRational::from_integer(r.alpha.clone());
            record(ok_if(alpha > m && alpha <= &m + ExactRational::from_integer(1.into()), || {
                fail(ctx, &[("m", m.to_string())], "least integer above m", &r.alpha)
            }))?;
            for _ in 0..ctx.samples {
                let y = outer.sample_member(s, rng);
                let z = r.cover_ball(&y)?.sample_member(s, rng);
                record(ok_if(r.verify(&y, &z)?, || {
                    fail(
                        ctx,
                        &[("x", x.to_string()), ("m", m.to_string()), ("y", y.to_string()), ("z", z.to_string())],
                        "cover ball inside U_m(x)",
                        "z outside",
                    )
                }))?;
            }
        }
        Check::Nesting => {
            let (mut m1, mut m2) = (m, random_bound(rng));
            if m1 > m2 {
                std::mem::swap(&mut m1, &mut m2);
            }
            let (big_ball, small_ball) = (open(&x, &m1)?, open(&x, &m2)?);
            for _ in 0..ctx.samples {
                let z = small_ball.sample_member(s, rng);
                record(ok_if(big_ball.contains(&z)?, || {
                    fail(
                        ctx,
                        &[("x", x.to_string()), ("m1", m1.to_string()), ("m2", m2.to_string()), ("z", z.to_string())],
                        "U_m2(x) inside U_m1(x)",
                        "z outside U_m1(x)",
                    )
                }))?;
            }
        }
        Check::Translation => {
            let ball = open(&x, &m)?;
            let at_zero = open(&s.zero(), &m)?;
            for _ in 0..ctx.samples {
                let y = if rng.random_bool(0.5) {
                    ball.sample_member(s, rng)
                } else {
                    near(&x, s, rng)
                };
                let lhs = ball.contains(&y)?;
                let rhs = at_zero.contains(&y.try_sub(&x)?)?;
                record(ok_if(lhs == rhs, || {
                    fail(ctx, &[("x", x.to_string()), ("m", m.to_string()), ("y", y.to_string())], "same membership", format!("{lhs} vs {rhs}"))
                }))?;
            }
        }
        Check::RingChain => {
            for _ in 0..ctx.samples {
                let y = s.element(rng);
                let a = loop {
                    let a = s.rational(rng);
                    if a != ExactRational::from_integer(0.into()) {
                        break a;
                    }
                };
                let outcome = match ring_membership_chain(w, &y, &a) {
                    Ok(_) => None,
                    Err(e) => Some(fail(ctx, &[("x", y.to_string()), ("a", a.to_string())], "four equivalent conditions", e)),
                };
                record(Ok(outcome))?;
            }
        }
        Check::RingEquivalence => {
            let points = s.elements(rng, ctx.samples);
            let alphas: Vec<BigInt> = (-5..=5).map(BigInt::from).collect();
            let mut partners = vec![w.clone()];
            if let Some(rev) = reordered(w) {
                partners.push(rev);
            }
            for partner in &partners {
                let sub = ring_value_equivalence(w, partner, &points, &alphas)?;
                for f in &sub.failures {
                    record(Ok(Some(f.clone())))?;
                }
                record(ok_if(sub.passed(), || fail(ctx, &[("w2", partner.to_string())], "equivalent", "mismatch")))?;
            }
            let rescaled = QuasiValuation::scaled(w.clone(), ExactRational::from_integer(2.into()))?;
            let rejected = matches!(
                ring_value_equivalence(w, &rescaled, &points, &alphas),
                Err(Error::Precondition(_))
            );
            record(ok_if(rejected, || {
                fail(ctx, &[("w2", rescaled.to_string())], "rejected: does not extend v", "accepted")
            }))?;
        }
    }
    Ok(())
}

/// `min[u_k, …, u_1]` for `min[u_1, …, u_k]` with `k > 1`.
pub fn reordered(w: &QuasiValuation) -> Option<QuasiValuation> {
    match w.construction() {
        Construction::MinOf(members) if members.len() > 1 => {
            let mut rev = members.to_vec();
            rev.reverse();
            QuasiValuation::min_of(rev).ok()
        }
        _ => None,
    }
}
