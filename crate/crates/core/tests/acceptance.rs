//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each, and
//! exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use qval::approx::{rational_approx, weak_approx, ApproxProblem, ApproxTarget, RationalTarget};
use qval::lemmas::{run_check, standard_family, Check, SuiteConfig};
use qval::quasival::{check_axioms, is_stable, n_adic, QuasiValuation};
use qval::sample::{seeded_rng, ElemSampler};
use qval::topology::ring_value_equivalence;
use qval::{
    hensel_sqrt, Branch, ExactRational, ExtendedValuation, ExtensionKind, FieldElem, QuadElem,
    Radicand, Valuation, Value,
};

type Outcome = Result<String, String>;

fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

fn rat(n: i64, d: i64) -> ExactRational {
    ExactRational::new(big(n), big(d))
}

fn rad(d: i64) -> Radicand {
    Radicand::from_i64(d).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

/// Exponent of `p` in a nonzero integer by repeated division.
fn naive_vp(p: &BigInt, n: &BigInt) -> i64 {
    let mut n = n.abs();
    let mut k = 0;
    while (&n % p).is_zero() {
        n /= p;
        k += 1;
    }
    k
}

fn naive_vp_rational(p: &BigInt, q: &ExactRational) -> Value {
    if q.is_zero() {
        return Value::Infinity;
    }
    Value::int(naive_vp(p, q.numer()) - naive_vp(p, q.denom()))
}

/// `v_p` for small `p`; for each `d`, one inert, one ramified and one split
/// prime (both branches and their minimum); `n`-adic for composite and prime `n`.
fn axiom_configurations() -> Vec<QuasiValuation> {
    let mut out = Vec::new();
    for p in [2, 3, 5, 7] {
        out.push(QuasiValuation::p_adic(p).unwrap());
    }
    // (inert, ramified, split) primes in Q(√d).
    for (d, primes) in [(-1, [3, 2, 5]), (2, [3, 2, 7]), (5, [2, 5, 11]), (-7, [3, 7, 2])] {
        for p in primes {
            let all = QuasiValuation::extensions_of(&big(p), Some(&rad(d))).unwrap();
            let members = match all.construction() {
                qval::quasival::Construction::MinOf(m) => m.to_vec(),
                _ => unreachable!(),
            };
            if members.len() == 2 {
                out.push(all.clone());
            }
            out.extend(members.into_iter().map(QuasiValuation::from_valuation));
        }
    }
    for n in [2, 3, 4, 6, 12] {
        out.push(QuasiValuation::n_adic(big(n)).unwrap());
    }
    out
}

fn axioms() -> Outcome {
    let configs = axiom_configurations();
    let kinds: std::collections::BTreeSet<&str> = configs
        .iter()
        .map(|w| {
            let s = w.to_string();
            ["inert", "ram", "split", "min", "nadic", "vp"]
                .into_iter()
                .find(|k| s.starts_with(k))
                .unwrap()
        })
        .collect();
    ensure(kinds.len() == 6, || format!("constructions covered: {kinds:?}"))?;
    let start = Instant::now();
    let mut checks = 0;
    for (i, w) in configs.iter().enumerate() {
        let sampler = ElemSampler::for_qv(w);
        let samples = sampler.elements(&mut seeded_rng(1000 + i as u64), 500);
        let report = check_axioms(w, &samples);
        ensure(report.passed(), || format!("{w}: {}", report.to_json()))?;
        checks += report.checks;
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!(
        "{} quasi-valuations x 500 elements, {checks} exact checks, {:.2?}",
        configs.len(),
        start.elapsed()
    ))
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The `e` with `c/d = nᵉ·a/b`, `n ∤ a`, `gcd(n, b) = 1`, `gcd(a, b) = 1`,
/// found by trying `e = 0, 1, −1, 2, −2, …` against those conditions.
fn decomposition_oracle(n: i64, c: i64, d: i64) -> i64 {
    // |c|, |d| <= 500 < 2^9 bounds |e| well below 13.
    for k in 0..13i64 {
        for e in [k, -k] {
            let (mut a, mut b) = (c as i128, d as i128);
            let np = (n as i128).pow(e.unsigned_abs() as u32);
            if e >= 0 {
                b *= np;
            } else {
                a *= np;
            }
            let g = gcd(a, b);
            let (a, b) = (a / g, b / g);
            if a % n as i128 != 0 && gcd(n as i128, b) == 1 {
                return e;
            }
            if k == 0 {
                break;
            }
        }
    }
    panic!("no decomposition for {c}/{d} at n = {n}");
}

fn n_adic_grid() -> Outcome {
    let mut compared = 0u64;
    for n in [2i64, 3, 4, 6, 12] {
        let nb = big(n);
        for c in (-500i64..=500).filter(|&c| c != 0) {
            for d in (-500i64..=500).filter(|&d| d != 0) {
                let expected = decomposition_oracle(n, c, d);
                let got = n_adic(&nb, &rat(c, d)).map_err(|e| e.to_string())?;
                ensure(got == Value::int(expected), || {
                    format!("w_{n}({c}/{d}): closed form {got}, oracle {expected}")
                })?;
                compared += 1;
            }
        }
    }
    Ok(format!("{compared} grid points, 0 mismatches"))
}

fn strict_superadditivity() -> Outcome {
    let w = QuasiValuation::min_of(vec![
        Valuation::from(qval::PAdicValuation::from_u64(2).unwrap()),
        Valuation::from(qval::PAdicValuation::from_u64(3).unwrap()),
    ])
    .unwrap();
    let ev = |n: i64| w.eval(&FieldElem::Rational(rat(n, 1))).unwrap();
    let (w6, w2, w3) = (ev(6), ev(2), ev(3));
    ensure(w6 == Value::int(1) && w2 == Value::int(0) && w3 == Value::int(0), || {
        format!("w(6) = {w6}, w(2) = {w2}, w(3) = {w3}")
    })?;
    ensure(w6 > &w2 + &w3, || "w(6) not above w(2) + w(3)".into())?;
    Ok(format!("{w}: w(6) = {w6} > {} = w(2) + w(3)", &w2 + &w3))
}

fn extension_consistency() -> Outcome {
    let configs: Vec<(i64, i64)> = [-1, 2, 5, -7, 3, -5]
        .into_iter()
        .flat_map(|d| [2, 3, 5, 7, 11, 13].into_iter().map(move |p| (p, d)))
        .collect();
    let mut rng = seeded_rng(4);
    let mut checked = 0;
    for &(p, d) in &configs {
        let (pb, dr) = (big(p), rad(d));
        let exts = ExtendedValuation::all_extensions(&pb, &dr).unwrap();
        let sampler = ElemSampler::new(qval::Field::Quadratic(dr.clone()), vec![pb.clone()]);
        for _ in 0..1000 {
            let x = sampler.nonzero_element(&mut rng);
            let q = x.to_quadratic(&dr).unwrap();
            let vnorm = naive_vp_rational(&pb, &q.norm());
            let conj = FieldElem::Quadratic(q.conjugate());
            let vals: Vec<Value> = exts.iter().map(|u| u.eval(&x).unwrap()).collect();
            let conj_vals: Vec<Value> = exts.iter().map(|u| u.eval(&conj).unwrap()).collect();
            match exts[0].kind() {
                ExtensionKind::Split(_) => {
                    ensure(&vals[0] + &vals[1] == vnorm, || {
                        format!("split ({p},{d}) at {x}: {} + {} vs v_p(N) = {vnorm}", vals[0], vals[1])
                    })?;
                    ensure(conj_vals[0] == vals[1] && conj_vals[1] == vals[0], || {
                        format!("conjugation does not swap branches at ({p},{d}), {x}")
                    })?;
                }
                _ => {
                    ensure(&vals[0] + &vals[0] == vnorm, || {
                        format!("{} at {x}: 2*{} vs v_p(N) = {vnorm}", exts[0], vals[0])
                    })?;
                    ensure(conj_vals[0] == vals[0], || format!("{} not conjugation invariant", exts[0]))?;
                }
            }
            checked += 1;
        }
        if matches!(exts[0].kind(), ExtensionKind::Split(_)) {
            for branch in [Branch::First, Branch::Second] {
                for k in [1u32, 2, 3, 8, 20, 64] {
                    let lo = hensel_sqrt(&pb, &dr, k, branch).unwrap();
                    let hi = hensel_sqrt(&pb, &dr, k + 5, branch).unwrap();
                    let pk = pb.pow(k);
                    ensure(hi.mod_floor(&pk) == lo, || {
                        format!("hensel ({p},{d},{branch:?}) k={k}: {lo} vs {hi} mod p^k")
                    })?;
                    ensure((&lo * &lo - dr.value()).mod_floor(&pk).is_zero(), || {
                        format!("hensel ({p},{d}) k={k}: {lo}^2 != d")
                    })?;
                }
            }
        }
    }
    Ok(format!("{} (p, d) configurations, {checked} elements", configs.len()))
}

fn topology_suite() -> Outcome {
    let family = standard_family();
    let cfg = SuiteConfig {
        instances: 20,
        samples: 100,
        seed: 2024,
    };
    let mut summary = Vec::new();
    for check in [
        Check::Recenter,
        Check::Intersection,
        Check::Clopen,
        Check::Dichotomy,
        Check::Refinement,
        Check::RingChain,
        Check::Hausdorff,
    ] {
        let report = run_check(check, &family, &cfg);
        ensure(report.passed(), || report.to_json())?;
        ensure(report.instances >= 20, || format!("{check}: only {} instances", report.instances))?;
        summary.push(format!("{check} {}/{}", report.instances, report.checks));
    }
    Ok(summary.join(", "))
}

fn ring_equivalence_boundary() -> Outcome {
    let family = standard_family();
    let cfg = SuiteConfig {
        instances: 20,
        samples: 100,
        seed: 2025,
    };
    let report = run_check(Check::RingEquivalence, &family, &cfg);
    ensure(report.passed(), || report.to_json())?;

    let d = rad(2);
    let split = QuasiValuation::extensions_of(&big(7), Some(&d)).unwrap();
    let reordered = qval::lemmas::reordered(&split).unwrap();
    let samples = ElemSampler::for_qv(&split).elements(&mut seeded_rng(6), 200);
    let alphas: Vec<BigInt> = (-4..=4).map(big).collect();
    let r = ring_value_equivalence(&split, &reordered, &samples, &alphas).map_err(|e| e.to_string())?;
    ensure(r.passed(), || r.to_json())?;
    for factor in [rat(2, 1), rat(1, 2)] {
        let scaled = QuasiValuation::scaled(split.clone(), factor.clone()).unwrap();
        ensure(
            matches!(
                ring_value_equivalence(&split, &scaled, &samples, &alphas),
                Err(qval::Error::Precondition(_))
            ),
            || format!("scaled by {factor} was not rejected"),
        )?;
    }
    Ok(format!("{} instances, {} checks; scaled variants rejected", report.instances, report.checks))
}

fn weak_approximation() -> Outcome {
    let start = Instant::now();
    let mut rng = seeded_rng(7);
    let mut certs = 0;
    for i in 0..100 {
        let d = rad(if i % 2 == 0 { 2 } else { 5 });
        let k = rng.random_range(2..=4);
        let mut primes = vec![2i64, 3, 5, 7, 11];
        let mut chosen = Vec::new();
        for _ in 0..k {
            chosen.push(primes.remove(rng.random_range(0..primes.len())));
        }
        let coeff = |rng: &mut qval::sample::SampleRng| rat(rng.random_range(-20..=20), rng.random_range(1..=12));
        let targets: Vec<ApproxTarget> = chosen
            .iter()
            .map(|&p| ApproxTarget {
                qv: QuasiValuation::extensions_of(&big(p), Some(&d)).unwrap(),
                x: QuadElem::new(coeff(&mut rng), coeff(&mut rng), d.clone()),
                m: rat(rng.random_range(-2..=4), 1),
            })
            .collect();
        let problem = ApproxProblem {
            d: d.clone(),
            targets,
        };
        let sol = weak_approx(&problem).map_err(|e| format!("instance {i}: {e}"))?;
        let probe = ElemSampler::new(qval::Field::Quadratic(d.clone()), chosen.iter().map(|&p| big(p)).collect())
            .elements(&mut rng, 20);
        for t in &problem.targets {
            let diff = sol.x.try_sub(&t.x).unwrap();
            let achieved = t.qv.eval(&FieldElem::Quadratic(diff.clone())).unwrap();
            let alpha = t.m.floor() + ExactRational::one();
            ensure(achieved.ge_rational(&alpha) && achieved.gt_rational(&t.m), || {
                format!("instance {i}, {}: w(x - x_i) = {achieved}, m = {}", t.qv, t.m)
            })?;
            for c in [diff.a().clone(), diff.b() / sol.basis.b()] {
                let c = FieldElem::Quadratic(QuadElem::from_rational(c, d.clone()));
                ensure(is_stable(&t.qv, &c, &probe).unwrap(), || format!("{c} not stable for {}", t.qv))?;
            }
            certs += 1;
        }
    }
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("100 instances, {certs} certificates above m_i, {:.2?}", start.elapsed()))
}

fn rational_approx_oracle() -> Outcome {
    let mut instances = 0;
    for x2 in -10i64..=10 {
        for x3 in -10i64..=10 {
            for a2 in 0u32..=3 {
                for a3 in 0u32..=3 {
                    let (m2, m3) = (2i64.pow(a2), 3i64.pow(a3));
                    let brute = (0..m2 * m3)
                        .find(|y| (y - x2).rem_euclid(m2) == 0 && (y - x3).rem_euclid(m3) == 0)
                        .ok_or_else(|| format!("brute force found nothing for {x2}, {x3}"))?;
                    let x = rational_approx(&[
                        RationalTarget::new(2, rat(x2, 1), a2),
                        RationalTarget::new(3, rat(x3, 1), a3),
                    ])
                    .map_err(|e| e.to_string())?;
                    for (p, xi, a) in [(2, x2, a2), (3, x3, a3)] {
                        let v = naive_vp_rational(&big(p), &(&x - rat(xi, 1)));
                        ensure(v >= Value::int(a as i64), || {
                            format!("v_{p}({x} - {xi}) = {v} < {a}")
                        })?;
                    }
                    ensure(x.is_integer() && x.to_integer().to_i64() == Some(brute), || {
                        format!("solver {x}, least brute-force solution {brute}")
                    })?;
                    instances += 1;
                }
            }
        }
    }
    Ok(format!("{instances} instances agree with exhaustive search"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("axiom suite", axioms),
        ("n-adic closed form vs decomposition", n_adic_grid),
        ("strict superadditivity witness", strict_superadditivity),
        ("extension consistency", extension_consistency),
        ("topology checks", topology_suite),
        ("same-ring equivalence boundary", ring_equivalence_boundary),
        ("weak approximation end-to-end", weak_approximation),
        ("rational approximation vs brute force", rational_approx_oracle),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS [{}] {name} ({t:.2?}): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name} ({t:.2?}): {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
