//! Python module `qval`: exact field elements, quasi-valuations, property
//! checks and weak approximation. Values come back as `fractions.Fraction`
//! (or `math.inf` at zero); reports and solutions as plain dicts.

use num_bigint::BigInt;
use pyo3::exceptions::{PyRuntimeError, PyValueError, PyZeroDivisionError};
use pyo3::prelude::*;
use pyo3::types::PyFloat;

use qval::lemmas::{run_check, standard_family, Check, SuiteConfig};
use qval::quasival::{check_axioms as core_check_axioms, QuasiValuation as CoreQv};
use qval::sample::{seeded_rng, ElemSampler};
use qval::topology::Ball;
use qval::{Branch, Error, ExactRational, FieldElem, Radicand, Value};

pyo3::create_exception!(qval, PrecisionCapError, PyValueError, "Hensel lifting reached the precision cap.");

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::DivisionByZero => PyZeroDivisionError::new_err(e.to_string()),
        Error::PrecisionCap { .. } => PrecisionCapError::new_err(e.to_string()),
        Error::Internal(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> OrPy<T> for qval::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py_err)
    }
}

fn fraction<'py>(py: Python<'py>, q: &ExactRational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((q.numer().clone(), q.denom().clone()))
}

fn value<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    match v.finite() {
        Some(q) => fraction(py, q),
        None => Ok(PyFloat::new(py, f64::INFINITY).into_any()),
    }
}

/// Reads an int, a `Fraction` or a `"num/den"` string.
fn rational(obj: &Bound<'_, PyAny>) -> PyResult<ExactRational> {
    if let Ok(s) = obj.extract::<String>() {
        return qval::arith::parse_fraction(&s).py_err();
    }
    if let Ok(n) = obj.extract::<BigInt>() {
        return Ok(ExactRational::from_integer(n));
    }
    let num: BigInt = obj.getattr("numerator")?.extract()?;
    let den: BigInt = obj.getattr("denominator")?.extract()?;
    if den == BigInt::from(0) {
        return Err(PyZeroDivisionError::new_err("zero denominator"));
    }
    Ok(ExactRational::new(num, den))
}

/// Reads an `Elem`, an int, a `Fraction` or an expression string.
fn elem(obj: &Bound<'_, PyAny>) -> PyResult<FieldElem> {
    if let Ok(e) = obj.extract::<PyRef<'_, Elem>>() {
        return Ok(e.0.clone());
    }
    if let Ok(s) = obj.extract::<String>() {
        return qval::expr::parse_elem(&s).py_err();
    }
    rational(obj).map(FieldElem::from)
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.getattr("loads")?.call1((text,))
}

/// An element of Q or of Q(sqrt d).
#[pyclass(frozen, name = "Elem", module = "qval")]
struct Elem(FieldElem);

#[pymethods]
impl Elem {
    /// `Elem("1/2 + 3*sqrt(5)")`, `Elem(7)` or `Elem(Fraction(1, 3))`.
    #[new]
    fn new(x: &Bound<'_, PyAny>) -> PyResult<Self> {
        elem(x).map(Elem)
    }

    /// `a + b*sqrt(d)`; `d` must be squarefree and not 1.
    #[staticmethod]
    fn from_parts(a: &Bound<'_, PyAny>, b: &Bound<'_, PyAny>, d: BigInt) -> PyResult<Self> {
        let d = Radicand::new(d).py_err()?;
        Ok(Elem(qval::QuadElem::new(rational(a)?, rational(b)?, d).into()))
    }

    /// The radicand, or None for a rational element.
    #[getter]
    fn d(&self) -> Option<BigInt> {
        self.0.field().radicand().map(|d| d.value().clone())
    }

    /// `(a, b)` with the element equal to `a + b*sqrt(d)`.
    fn coefficients<'py>(&self, py: Python<'py>) -> PyResult<(Bound<'py, PyAny>, Bound<'py, PyAny>)> {
        let (a, b) = self.0.coefficients();
        Ok((fraction(py, &a)?, fraction(py, &b)?))
    }

    fn norm<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.0.norm())
    }

    fn conjugate(&self) -> Self {
        Elem(self.0.conjugate())
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn __add__(&self, other: &Bound<'_, PyAny>) -> PyResult<Self> {
        self.0.try_add(&elem(other)?).py_err().map(Elem)
    }

    fn __radd__(&self, other: &Bound<'_, PyAny>) -> PyResult<Self> {
        elem(other)?.try_add(&self.0).py_err().map(Elem)
    }

    fn __sub__(&self, other: &Bound<'_, PyAny>) -> PyResult<Self> {
        self.0.try_sub(&elem(other)?).py_err().map(Elem)
    }

    fn __rsub__(&self, other: &Bound<'_, PyAny>) -> PyResult<Self> {
        elem(other)?.try_sub(&self.0).py_err().map(Elem)
    }

    fn __mul__(&self, other: &Bound<'_, PyAny>) -> PyResult<Self> {
        self.0.try_mul(&elem(other)?).py_err().map(Elem)
    }

    fn __rmul__(&self, other: &Bound<'_, PyAny>) -> PyResult<Self> {
        elem(other)?.try_mul(&self.0).py_err().map(Elem)
    }

    fn __truediv__(&self, other: &Bound<'_, PyAny>) -> PyResult<Self> {
        self.0.try_div(&elem(other)?).py_err().map(Elem)
    }

    fn __rtruediv__(&self, other: &Bound<'_, PyAny>) -> PyResult<Self> {
        elem(other)?.try_div(&self.0).py_err().map(Elem)
    }

    fn __neg__(&self) -> Self {
        Elem(self.0.neg())
    }

    fn __eq__(&self, other: &Bound<'_, PyAny>) -> bool {
        elem(other).is_ok_and(|o| o == self.0)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Elem({:?})", self.0.to_string())
    }
}

/// A quasi-valuation given by its text form, e.g. `"min[vp:2|vp:3]"`,
/// `"nadic:12"`, `"ext:7,d=2"` or `"scaled:1/2,split1:7,d=2"`.
#[pyclass(frozen, name = "QuasiValuation", module = "qval")]
struct QuasiValuation(CoreQv);

impl QuasiValuation {
    fn native(&self, x: &Bound<'_, PyAny>) -> PyResult<FieldElem> {
        elem(x)?.in_field(self.0.field()).py_err()
    }
}

#[pymethods]
impl QuasiValuation {
    #[new]
    #[pyo3(signature = (spec, precision_cap = None))]
    fn new(spec: &str, precision_cap: Option<u32>) -> PyResult<Self> {
        let w = qval::qvspec::parse_qv(spec).py_err()?;
        Ok(QuasiValuation(match precision_cap {
            Some(cap) => w.with_precision_cap(cap),
            None => w,
        }))
    }

    /// Radicand of the field the quasi-valuation lives on, None over Q.
    #[getter]
    fn d(&self) -> Option<BigInt> {
        self.0.field().radicand().map(|d| d.value().clone())
    }

    /// The prime p when every member extends v_p.
    #[getter]
    fn base_prime(&self) -> Option<BigInt> {
        self.0.base_prime()
    }

    #[getter]
    fn primes(&self) -> Vec<BigInt> {
        self.0.primes()
    }

    /// `(g, s)` with `w(g**c) = s*c` for every integer c.
    fn unit_generator<'py>(&self, py: Python<'py>) -> PyResult<(BigInt, Bound<'py, PyAny>)> {
        let (g, s) = self.0.unit_generator();
        Ok((g, fraction(py, &s)?))
    }

    fn eval<'py>(&self, py: Python<'py>, x: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        let v = self.0.eval(&self.native(x)?).py_err()?;
        value(py, &v)
    }

    fn __call__<'py>(&self, py: Python<'py>, x: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        self.eval(py, x)
    }

    /// Whether `x` lies in the ring `{x : w(x) >= 0}`.
    fn in_ring(&self, x: &Bound<'_, PyAny>) -> PyResult<bool> {
        self.0.ring().contains(&self.native(x)?).py_err()
    }

    /// Membership of `y` in `{z : w(z - center) > bound}` (`>=` when closed).
    #[pyo3(signature = (center, bound, y, closed = false))]
    fn in_ball(
        &self,
        center: &Bound<'_, PyAny>,
        bound: &Bound<'_, PyAny>,
        y: &Bound<'_, PyAny>,
        closed: bool,
    ) -> PyResult<bool> {
        let ball = Ball::new(self.0.clone(), self.native(center)?, rational(bound)?, !closed).py_err()?;
        ball.contains(&self.native(y)?).py_err()
    }

    /// Random check of the axioms on `samples` seeded elements; returns the report.
    #[pyo3(signature = (samples = 200, seed = 0))]
    fn check_axioms<'py>(&self, py: Python<'py>, samples: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let xs = ElemSampler::for_qv(&self.0).elements(&mut seeded_rng(seed), samples);
        let mut report = py.detach(|| core_check_axioms(&self.0, &xs));
        report.seed = Some(seed);
        json_to_py(py, &report.to_json())
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("QuasiValuation({:?})", self.0.to_string())
    }
}

/// p-adic valuation of a rational; `math.inf` at zero.
#[pyfunction]
fn v_p<'py>(py: Python<'py>, p: BigInt, x: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    if !qval::primes::is_prime(&p).py_err()? {
        return Err(PyValueError::new_err(format!("{p} is not prime")));
    }
    value(py, &qval::v_p(&p, &rational(x)?))
}

/// n-adic quasi-valuation of a rational.
#[pyfunction]
fn n_adic<'py>(py: Python<'py>, n: BigInt, x: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let v = qval::quasival::n_adic(&n, &rational(x)?).py_err()?;
    value(py, &v)
}

/// `"inert"`, `"ramified"` or `"split"` for the prime p in Q(sqrt d).
#[pyfunction]
fn classify(p: BigInt, d: BigInt) -> PyResult<&'static str> {
    let d = Radicand::new(d).py_err()?;
    Ok(match qval::classify(&p, &d).py_err()? {
        qval::Splitting::Inert => "inert",
        qval::Splitting::Ramified => "ramified",
        qval::Splitting::Split => "split",
    })
}

/// Square root of d modulo p**k on the given branch (1 or 2).
#[pyfunction]
#[pyo3(signature = (p, d, k, branch = 1))]
fn hensel_sqrt(p: BigInt, d: BigInt, k: u32, branch: u8) -> PyResult<BigInt> {
    let d = Radicand::new(d).py_err()?;
    qval::hensel_sqrt(&p, &d, k, Branch::from_index(branch).py_err()?).py_err()
}

/// Sampling check of one topological property (name or numeric id) or of
/// all of them (`"all"`); returns a list of reports.
#[pyfunction]
#[pyo3(signature = (id, samples = 100, instances = 20, seed = 0))]
fn run_lemma<'py>(
    py: Python<'py>,
    id: &str,
    samples: usize,
    instances: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let checks = if id == "all" {
        Check::ALL.to_vec()
    } else {
        vec![id.parse::<Check>().py_err()?]
    };
    let cfg = SuiteConfig {
        instances,
        samples,
        seed,
    };
    let reports: Vec<_> = py.detach(|| {
        let family = standard_family();
        checks.into_iter().map(|c| run_check(c, &family, &cfg)).collect()
    });
    let text = serde_json::to_string(&reports).expect("reports serialize");
    json_to_py(py, &text)
}

/// Smallest non-negative rational x with `v_p(x - x_p) >= alpha_p` for every
/// `(p, x_p, alpha_p)`.
#[pyfunction]
fn rational_approx<'py>(
    py: Python<'py>,
    targets: Vec<(BigInt, Bound<'py, PyAny>, BigInt)>,
) -> PyResult<Bound<'py, PyAny>> {
    let targets = targets
        .into_iter()
        .map(|(p, x, alpha)| Ok(qval::approx::RationalTarget::new(p, rational(&x)?, alpha)))
        .collect::<PyResult<Vec<_>>>()?;
    fraction(py, &qval::approx::rational_approx(&targets).py_err()?)
}

/// Solves `{d, targets: [{p, x: {a, b}, m, qv?}]}` (a dict or JSON text)
/// and returns `{x: {a, b}, certificates: [{p, achieved, required}]}`.
#[pyfunction]
#[pyo3(signature = (problem, precision_cap = None))]
fn weak_approx<'py>(
    py: Python<'py>,
    problem: &Bound<'py, PyAny>,
    precision_cap: Option<u32>,
) -> PyResult<Bound<'py, PyAny>> {
    let text: String = match problem.extract::<String>() {
        Ok(s) => s,
        Err(_) => py.import("json")?.getattr("dumps")?.call1((problem,))?.extract()?,
    };
    let solution = py.detach(|| qval::approx::solve_json(&text, precision_cap)).py_err()?;
    json_to_py(py, &solution)
}

#[pymodule]
#[pyo3(name = "qval")]
fn qval_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Elem>()?;
    m.add_class::<QuasiValuation>()?;
    m.add("PrecisionCapError", m.py().get_type::<PrecisionCapError>())?;
    m.add_function(wrap_pyfunction!(v_p, m)?)?;
    m.add_function(wrap_pyfunction!(n_adic, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(hensel_sqrt, m)?)?;
    m.add_function(wrap_pyfunction!(run_lemma, m)?)?;
    m.add_function(wrap_pyfunction!(rational_approx, m)?)?;
    m.add_function(wrap_pyfunction!(weak_approx, m)?)?;
    Ok(())
}
