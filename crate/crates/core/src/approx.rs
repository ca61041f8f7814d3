//! Simultaneous approximation at finitely many distinct primes.
//!
//! [`rational_approx`] finds `x ∈ Q` with `v_{p_i}(x − x_i) ≥ α_i` for all `i`:
//!
//! 1. `e_i = max(0, −v_{p_i}(x_i))` and `D = ∏ p_i^{e_i}`, so every `D·x_i`
//!    is `p_i`-integral.
//! 2. `β_i = max(α_i + e_i, 0)` and `c_i = D·x_i mod p_i^{β_i}`, reading the
//!    denominator of `D·x_i` as a unit mod `p_i^{β_i}`.
//! 3. `y` is the least non-negative solution of `y ≡ c_i (mod p_i^{β_i})`,
//!    built one congruence at a time.
//! 4. `x = y / D`. Then `v_{p_i}(x − x_i) = v_{p_i}(y − D·x_i) − e_i ≥ β_i − e_i ≥ α_i`.
//!
//! [`weak_approx`] lifts this to `Q(√d)`: with a basis `{1, r}` of `Q(√d)`
//! inside every ring `O_{w_i}` it approximates each coordinate separately with
//! `α_i = ⌊m_i⌋ + 1`. Since `w_i` agrees with `v_{p_i}` on `Q` and rationals
//! are stable, `w_i(x − x_i) ≥ min_j v_{p_i}(d_j − c_{ij}) + w_i(r_j) ≥ α_i > m_i`.
//! Every returned solution is re-evaluated before it is handed out.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{format_fraction, parse_fraction, ExactRational, Field, FieldElem, QuadElem, Radicand};
use crate::error::{domain, Error, Result};
use crate::primes::require_prime;
use crate::quasival::QuasiValuation;
use crate::valuation::{int_valuation_signed, Value};

/// `(p, x, α)`: approximate `x` to `p`-adic order `α`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalTarget {
    pub p: BigInt,
    pub x: ExactRational,
    pub alpha: BigInt,
}

impl RationalTarget {
    pub fn new(p: impl Into<BigInt>, x: ExactRational, alpha: impl Into<BigInt>) -> Self {
        Self {
            p: p.into(),
            x,
            alpha: alpha.into(),
        }
    }
}

fn check_distinct<'a>(primes: impl IntoIterator<Item = &'a BigInt>) -> Result<()> {
    let mut seen = BTreeSet::new();
    for p in primes {
        if !seen.insert(p) {
            return domain(format!("prime {p} appears twice"));
        }
    }
    Ok(())
}

/// `g^k` for an exponent that must fit in memory anyway.
fn pow(g: &BigInt, k: &BigInt) -> Result<BigInt> {
    let k: u32 = k
        .try_into()
        .map_err(|_| Error::Domain(format!("exponent {k} too large")))?;
    Ok(num_traits::pow(g.clone(), k as usize))
}

/// `a⁻¹ mod m` for `gcd(a, m) = 1`.
fn inverse_mod(a: &BigInt, m: &BigInt) -> Result<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if !e.gcd.is_one() {
        return Err(Error::Internal(format!("{a} is not invertible mod {m}")));
    }
    Ok(e.x.mod_floor(m))
}

/// Combines `y ≡ r (mod m)` with `y ≡ c (mod n)` for coprime `m, n`.
fn crt_step(r: &BigInt, m: &BigInt, c: &BigInt, n: &BigInt) -> Result<(BigInt, BigInt)> {
    let t = ((c - r) * inverse_mod(m, n)?).mod_floor(n);
    let mn = m * n;
    Ok(((r + m * t).mod_floor(&mn), mn))
}

/// Some `x ∈ Q` with `v_{p_i}(x − x_i) ≥ α_i` for every target; a single
/// target returns its own `x_i`.
pub fn rational_approx(targets: &[RationalTarget]) -> Result<ExactRational> {
    for t in targets {
        require_prime(&t.p)?;
    }
    check_distinct(targets.iter().map(|t| &t.p))?;
    match targets {
        [] => return Ok(ExactRational::zero()),
        [t] => return Ok(t.x.clone()),
        _ => {}
    }
    let exps: Vec<i64> = targets
        .iter()
        .map(|t| {
            if t.x.is_zero() {
                0
            } else {
                (-int_valuation_signed(&t.p, &t.x)).max(0)
            }
        })
        .collect();
    let mut denom = BigInt::one();
    for (t, &e) in targets.iter().zip(&exps) {
        denom *= pow(&t.p, &BigInt::from(e))?;
    }
    let denom_q = ExactRational::from_integer(denom.clone());
    let (mut y, mut modulus) = (BigInt::zero(), BigInt::one());
    for (t, &e) in targets.iter().zip(&exps) {
        let beta = (&t.alpha + e).max(BigInt::zero());
        if beta.is_zero() {
            continue;
        }
        let pk = pow(&t.p, &beta)?;
        let cleared = &t.x * &denom_q;
        let c = (cleared.numer() * inverse_mod(cleared.denom(), &pk)?).mod_floor(&pk);
        (y, modulus) = crt_step(&y, &modulus, &c, &pk)?;
    }
    Ok(ExactRational::new(y, denom))
}

/// One place of a problem over `Q(√d)`: get within `m` of `x` for `w`.
#[derive(Clone, Debug)]
pub struct ApproxTarget {
    pub qv: QuasiValuation,
    pub x: QuadElem,
    pub m: ExactRational,
}

#[derive(Clone, Debug)]
pub struct ApproxProblem {
    pub d: Radicand,
    pub targets: Vec<ApproxTarget>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub p: BigInt,
    /// `w_i(x − x_i)`.
    pub achieved: Value,
    /// `m_i`.
    pub required: ExactRational,
    /// `⌊m_i⌋ + 1`; the construction guarantees `achieved ≥ alpha`.
    pub alpha: BigInt,
}

#[derive(Clone, Debug)]
pub struct ApproxSolution {
    pub x: QuadElem,
    /// `{1, r}` with `r` a rational multiple of `√d`.
    pub basis: QuadElem,
    pub certificates: Vec<Certificate>,
}

impl ApproxSolution {
    /// Re-checks `achieved ≥ m_i` for every certificate.
    pub fn verify(&self, problem: &ApproxProblem) -> Result<bool> {
        for (t, c) in problem.targets.iter().zip(&self.certificates) {
            let achieved = t.qv.eval(&FieldElem::Quadratic(self.x.try_sub(&t.x)?))?;
            if achieved != c.achieved || !achieved.ge_rational(&t.m) {
                return Ok(false);
            }
        }
        Ok(self.certificates.len() == problem.targets.len())
    }
}

fn base_prime(w: &QuasiValuation) -> Result<BigInt> {
    w.base_prime()
        .ok_or_else(|| Error::Precondition(format!("{w} does not restrict to a p-adic valuation on Q")))
}

/// `r = c·√d` with `c` a product of the problem's primes, chosen so that
/// `w(1) ≥ 0` and `w(r) ≥ 0` for every `w`. Each `w` must restrict to a
/// `p`-adic valuation, so multiplying by `p` raises `w(r)` by one.
pub fn intersection_basis(d: &Radicand, qvs: &[QuasiValuation]) -> Result<QuadElem> {
    let field = Field::Quadratic(d.clone());
    let one = FieldElem::Quadratic(QuadElem::one(d.clone()));
    let mut r = QuadElem::sqrt(d.clone());
    for w in qvs {
        if w.field() != &field {
            return domain(format!("{w} is not defined on {field}"));
        }
        let p = ExactRational::from_integer(base_prime(w)?);
        if !w.eval(&one)?.ge_rational(&ExactRational::zero()) {
            return Err(Error::Precondition(format!("1 is not in the ring of {w}")));
        }
        while !w.eval(&FieldElem::Quadratic(r.clone()))?.ge_rational(&ExactRational::zero()) {
            r = r.scale(&p);
        }
    }
    Ok(r)
}

/// An `x ∈ Q(√d)` with `w_i(x − x_i) ≥ ⌊m_i⌋ + 1` for every target, with
/// certificates.
pub fn weak_approx(problem: &ApproxProblem) -> Result<ApproxSolution> {
    let primes: Vec<BigInt> = problem
        .targets
        .iter()
        .map(|t| base_prime(&t.qv))
        .collect::<Result<_>>()?;
    check_distinct(&primes)?;
    let d = &problem.d;
    for t in &problem.targets {
        if t.x.radicand() != d {
            return domain(format!("target {} is not in Q(sqrt({d}))", t.x));
        }
    }
    let qvs: Vec<QuasiValuation> = problem.targets.iter().map(|t| t.qv.clone()).collect();
    let r = intersection_basis(d, &qvs)?;
    let r_coeff = r.b().clone();
    let alphas: Vec<BigInt> = problem.targets.iter().map(|t| t.m.floor().to_integer() + 1).collect();

    let coordinate = |pick: &dyn Fn(&QuadElem) -> ExactRational| -> Result<ExactRational> {
        let targets: Vec<RationalTarget> = problem
            .targets
            .iter()
            .zip(&primes)
            .zip(&alphas)
            .map(|((t, p), a)| RationalTarget::new(p.clone(), pick(&t.x), a.clone()))
            .collect();
        rational_approx(&targets)
    };
    let d1 = coordinate(&|x| x.a().clone())?;
    let d2 = coordinate(&|x| x.b() / &r_coeff)?;
    let x = QuadElem::from_rational(d1, d.clone()).try_add(&r.scale(&d2))?;

    let mut certificates = Vec::with_capacity(problem.targets.len());
    for ((t, p), alpha) in problem.targets.iter().zip(primes).zip(alphas) {
        let achieved = t.qv.eval(&FieldElem::Quadratic(x.try_sub(&t.x)?))?;
        if !achieved.ge_rational(&ExactRational::from_integer(alpha.clone())) {
            return Err(Error::Internal(format!(
                "{} gives {achieved} at {x} - ({}), below {alpha}",
                t.qv, t.x
            )));
        }
        certificates.push(Certificate {
            p,
            achieved,
            required: t.m.clone(),
            alpha,
        });
    }
    Ok(ApproxSolution {
        x,
        basis: r,
        certificates,
    })
}

/// A rational given as `"num/den"` or as a bare JSON integer.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonRational {
    Int(i64),
    Text(String),
}

impl JsonRational {
    fn value(&self) -> Result<ExactRational> {
        match self {
            JsonRational::Int(n) => Ok(ExactRational::from_integer((*n).into())),
            JsonRational::Text(s) => parse_fraction(s),
        }
    }
}

impl From<&ExactRational> for JsonRational {
    fn from(q: &ExactRational) -> Self {
        JsonRational::Text(format_fraction(q))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JsonElem {
    pub a: JsonRational,
    #[serde(default = "json_zero")]
    pub b: JsonRational,
}

fn json_zero() -> JsonRational {
    JsonRational::Int(0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JsonTarget {
    pub p: u64,
    pub x: JsonElem,
    pub m: JsonRational,
    /// Quasi-valuation spec; all extensions of `v_p` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qv: Option<String>,
}

/// `{d, targets: [{p, x: {a, b}, m, qv?}]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JsonProblem {
    pub d: i64,
    pub targets: Vec<JsonTarget>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JsonCertificate {
    pub p: String,
    pub achieved: String,
    pub required: String,
}

/// `{x: {a, b}, certificates: [{p, achieved, required}]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JsonSolution {
    pub x: JsonElem,
    pub certificates: Vec<JsonCertificate>,
}

impl JsonProblem {
    pub fn to_problem(&self, precision_cap: Option<u32>) -> Result<ApproxProblem> {
        let d = Radicand::from_i64(self.d)?;
        let targets = self
            .targets
            .iter()
            .map(|t| {
                let p = BigInt::from(t.p);
                let qv = match &t.qv {
                    Some(spec) => crate::qvspec::parse_qv(spec)?,
                    None => QuasiValuation::extensions_of(&p, Some(&d))?,
                };
                let qv = match precision_cap {
                    Some(cap) => qv.with_precision_cap(cap),
                    None => qv,
                };
                if qv.base_prime().as_ref() != Some(&p) {
                    return Err(Error::Precondition(format!("{qv} does not extend v_{p}")));
                }
                Ok(ApproxTarget {
                    qv,
                    x: QuadElem::new(t.x.a.value()?, t.x.b.value()?, d.clone()),
                    m: t.m.value()?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(ApproxProblem { d, targets })
    }
}

impl From<&ApproxSolution> for JsonSolution {
    fn from(s: &ApproxSolution) -> Self {
        JsonSolution {
            x: JsonElem {
                a: s.x.a().into(),
                b: s.x.b().into(),
            },
            certificates: s
                .certificates
                .iter()
                .map(|c| JsonCertificate {
                    p: c.p.to_string(),
                    achieved: c.achieved.to_fraction_string(),
                    required: format_fraction(&c.required),
                })
                .collect(),
        }
    }
}

/// Parses a problem file, solves it and returns the solution JSON.
pub fn solve_json(problem: &str, precision_cap: Option<u32>) -> Result<String> {
    let parsed: JsonProblem = serde_json::from_str(problem).map_err(|e| Error::Parse {
        pos: e.column(),
        message: e.to_string(),
    })?;
    let solution = weak_approx(&parsed.to_problem(precision_cap)?)?;
    Ok(serde_json::to_string_pretty(&JsonSolution::from(&solution)).expect("solution serializes"))
}
