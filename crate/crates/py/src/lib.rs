//! Python bindings over the floating-point backend.

use chainstore::acquisition::{action_probabilities, AcquisitionProblem};
use chainstore::equilibrium::{region_sweep, Axis, EquilibriumOutcome, SolveOptions};
use chainstore::multimarket::{EntryMode, IncumbentPolicy, Schedule, SimulationConfig};
use chainstore::sweep::{SweepAxis, SweepBase};
use chainstore::verifier::{assessment_with_fight_probability, DeviationReport};
use chainstore::{Comparator, NoiseSpec, Protocol, Regime, VerifyOptions};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(chainstore_py, ChainstoreError, PyValueError);
create_exception!(chainstore_py, NoEquilibriumError, ChainstoreError);
create_exception!(chainstore_py, NoPureAcquisitionEquilibriumError, ChainstoreError);

fn to_py(e: chainstore::Error) -> PyErr {
    let msg = e.to_string();
    match e {
        chainstore::Error::NoEquilibrium(_) => NoEquilibriumError::new_err(msg),
        chainstore::Error::NoPureAcquisitionEquilibrium { .. } => {
            NoPureAcquisitionEquilibriumError::new_err(msg)
        }
        _ => ChainstoreError::new_err(msg),
    }
}

fn parse<T: std::str::FromStr>(text: &str, what: &str) -> PyResult<T> {
    text.parse()
        .map_err(|_| ChainstoreError::new_err(format!("unknown {what} `{text}`")))
}

/// Stage payoffs; defaults are the standard calibration.
#[pyclass(name = "Payoffs", module = "chainstore_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyPayoffs {
    inner: chainstore::Payoffs<f64>,
}

#[pymethods]
impl PyPayoffs {
    #[new]
    #[pyo3(signature = (m = 1.0, a = 0.3, c = 0.2, d = 1.0, v = 1.0))]
    fn new(m: f64, a: f64, c: f64, d: f64, v: f64) -> PyResult<Self> {
        Ok(Self {
            inner: chainstore::Payoffs::new(m, a, c, d, v).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn calibration() -> Self {
        Self {
            inner: chainstore::Payoffs::calibration(),
        }
    }

    /// Entry cutoff `v / (v + d)`.
    #[getter]
    fn phi(&self) -> f64 {
        *self.inner.thresholds().phi.value()
    }

    /// Deterrence threshold `(a + c) / (M - a)`.
    #[getter]
    fn delta(&self) -> f64 {
        self.inner.thresholds().delta
    }

    #[getter]
    fn m(&self) -> f64 {
        self.inner.m
    }
    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }
    #[getter]
    fn c(&self) -> f64 {
        self.inner.c
    }
    #[getter]
    fn d(&self) -> f64 {
        self.inner.d
    }
    #[getter]
    fn v(&self) -> f64 {
        self.inner.v
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!("Payoffs(m={}, a={}, c={}, d={}, v={})", p.m, p.a, p.c, p.d, p.v)
    }
}

fn payoffs_or_default(p: Option<PyPayoffs>) -> chainstore::Payoffs<f64> {
    p.map(|p| p.inner).unwrap_or_else(chainstore::Payoffs::calibration)
}

/// Result of an equilibrium check.
#[pyclass(name = "Verification", module = "chainstore_py", frozen)]
struct PyVerification {
    #[pyo3(get)]
    passed: bool,
    #[pyo3(get)]
    candidate_payoff: f64,
    #[pyo3(get)]
    max_incumbent_gain: f64,
    #[pyo3(get)]
    best_deviation: (f64, f64),
    #[pyo3(get)]
    max_entrant_gain: f64,
    #[pyo3(get)]
    bayes_violations: usize,
    #[pyo3(get)]
    off_path_notes: Vec<String>,
}

impl From<DeviationReport<f64>> for PyVerification {
    fn from(r: DeviationReport<f64>) -> Self {
        Self {
            passed: r.passed,
            candidate_payoff: r.candidate_payoff,
            max_incumbent_gain: r.max_incumbent_gain,
            best_deviation: r.best_deviation,
            max_entrant_gain: r.max_entrant_gain,
            bayes_violations: r.bayes_violations.len(),
            off_path_notes: r
                .off_path
                .iter()
                .map(|n| format!("{}: {}", n.observation.label(), n.convention))
                .collect(),
        }
    }
}

#[pymethods]
impl PyVerification {
    fn __repr__(&self) -> String {
        format!(
            "Verification(passed={}, max_incumbent_gain={}, max_entrant_gain={})",
            if self.passed { "True" } else { "False" },
            self.max_incumbent_gain,
            self.max_entrant_gain
        )
    }
}

/// An equilibrium assessment with its summary statistics.
#[pyclass(name = "Outcome", module = "chainstore_py", frozen)]
struct PyOutcome {
    inner: EquilibriumOutcome<f64>,
}

#[pymethods]
impl PyOutcome {
    #[getter]
    fn regime(&self) -> &'static str {
        self.inner.regime.label()
    }
    #[getter]
    fn protocol(&self) -> &'static str {
        match self.inner.protocol {
            Protocol::Sequential => "sequential",
            Protocol::Simultaneous => "simultaneous",
        }
    }
    #[getter]
    fn p0(&self) -> f64 {
        self.inner.p0
    }
    #[getter]
    fn pi(&self) -> f64 {
        self.inner.pi
    }
    #[getter]
    fn q_a(&self) -> f64 {
        self.inner.q_a.selected
    }
    /// `(lo, hi)` of the mixing interval on the indifference boundary.
    #[getter]
    fn q_a_interval(&self) -> Option<(f64, f64)> {
        self.inner.q_a.interval
    }
    #[getter]
    fn fight_probability(&self) -> f64 {
        self.inner.fight_probability()
    }
    #[getter]
    fn lambda_a(&self) -> f64 {
        self.inner.lambda_a
    }
    #[getter]
    fn lambda_f(&self) -> f64 {
        self.inner.lambda_f
    }
    #[getter]
    fn delta_lambda(&self) -> f64 {
        self.inner.delta_lambda
    }
    #[getter]
    fn payoff_gap(&self) -> f64 {
        self.inner.payoff_gap
    }
    #[getter]
    fn ex_ante_entry_b(&self) -> f64 {
        self.inner.ex_ante_entry_b
    }
    #[getter]
    fn strategic_payoff(&self) -> f64 {
        self.inner.strategic_payoff
    }
    #[getter]
    fn tough_payoff(&self) -> f64 {
        self.inner.tough_payoff
    }
    #[getter]
    fn entrant_a_enters(&self) -> bool {
        self.inner.entrant_a_enters
    }

    /// Posterior of the later entrant by observation label.
    #[getter]
    fn beliefs<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (obs, v) in self.inner.beliefs_b.iter() {
            d.set_item(obs.label(), *v)?;
        }
        Ok(d)
    }

    /// Entry probability of the later entrant by observation label.
    #[getter]
    fn responses<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (obs, v) in self.inner.response_b.iter() {
            d.set_item(obs.label(), *v)?;
        }
        Ok(d)
    }

    #[pyo3(signature = (tolerance = 1e-9, grid_points = 1001))]
    fn verify(&self, tolerance: f64, grid_points: usize) -> PyVerification {
        chainstore::verify_pbe(
            &self.inner,
            &VerifyOptions {
                tolerance,
                grid_points,
            },
        )
        .into()
    }

    /// Another point of the boundary mixing interval.
    fn with_selection(&self, q: f64) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.with_selection(q).map_err(to_py)?,
        })
    }

    /// The Bayes-consistent assessment at fight probability `q`, for
    /// checking candidates a solver would not produce.
    fn with_fight_probability(&self, q: f64) -> PyResult<Self> {
        let regime = if q == 1.0 {
            Regime::HighFight
        } else if q == 0.0 {
            Regime::LowAccommodate
        } else {
            Regime::InteriorMix
        };
        Ok(Self {
            inner: assessment_with_fight_probability(&self.inner, q, regime).map_err(to_py)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Outcome(regime={}, q_a={}, ex_ante_entry_b={})",
            self.regime(),
            self.inner.q_a.selected,
            self.inner.ex_ante_entry_b
        )
    }
}

fn options(mix_selection: f64, tolerance: f64) -> SolveOptions {
    SolveOptions {
        cmp: Comparator::new(tolerance),
        mix_selection,
    }
}

/// Solves one parameter point. Passing either error rate selects the noisy
/// sequential game.
#[pyfunction]
#[pyo3(signature = (p0, pi = 0.0, payoffs = None, protocol = "sequential", eps_f = None, eps_a = None, mix_selection = 0.5, tolerance = 1e-12))]
#[allow(clippy::too_many_arguments)]
fn solve(
    p0: f64,
    pi: f64,
    payoffs: Option<PyPayoffs>,
    protocol: &str,
    eps_f: Option<f64>,
    eps_a: Option<f64>,
    mix_selection: f64,
    tolerance: f64,
) -> PyResult<PyOutcome> {
    let payoffs = payoffs_or_default(payoffs);
    let protocol: Protocol = parse(protocol, "protocol")?;
    let opts = options(mix_selection, tolerance);
    let inner = if eps_f.is_some() || eps_a.is_some() {
        if protocol != Protocol::Sequential {
            return Err(ChainstoreError::new_err(
                "noise applies to the sequential protocol only",
            ));
        }
        let noise = NoiseSpec::new(eps_f.unwrap_or(0.0), eps_a.unwrap_or(0.0)).map_err(to_py)?;
        chainstore::solve_sequential_noisy(&p0, &pi, &payoffs, &noise, &opts)
    } else {
        chainstore::equilibrium::solve(protocol, &p0, &pi, &payoffs, &opts)
    }
    .map_err(to_py)?;
    Ok(PyOutcome { inner })
}

/// Regime map: `(p0, pi, regime, q_a, ex_ante_entry_b, fight_probability)`
/// rows over `p0 in [0.01, 0.99]` and `pi in [0, 1]`.
#[pyfunction]
#[pyo3(signature = (n_p0 = 101, n_pi = 101, payoffs = None))]
fn regions(
    n_p0: usize,
    n_pi: usize,
    payoffs: Option<PyPayoffs>,
) -> PyResult<Vec<(f64, f64, &'static str, f64, f64, f64)>> {
    let rows = region_sweep(
        &Axis::prior(n_p0).map_err(to_py)?,
        &Axis::unit(n_pi).map_err(to_py)?,
        &payoffs_or_default(payoffs),
        &SolveOptions::default(),
    )
    .map_err(to_py)?;
    Ok(rows
        .into_iter()
        .map(|r| {
            (
                r.p0,
                r.pi,
                r.regime.label(),
                r.q_a,
                r.ex_ante_entry_b,
                r.fight_probability,
            )
        })
        .collect())
}

/// One-dimensional sweep. Returns `{"axis", "rows", "monotonicity"}` where
/// each row is a dict and missing equilibria are `None`.
#[pyfunction]
#[pyo3(signature = (axis, p0 = 0.6, pi = 0.8, points = 101, lo = None, hi = None, eps_f = 0.0, eps_a = 0.0, k = 0.0, payoffs = None))]
#[allow(clippy::too_many_arguments)]
fn sweep<'py>(
    py: Python<'py>,
    axis: &str,
    p0: f64,
    pi: f64,
    points: usize,
    lo: Option<f64>,
    hi: Option<f64>,
    eps_f: f64,
    eps_a: f64,
    k: f64,
    payoffs: Option<PyPayoffs>,
) -> PyResult<Bound<'py, PyDict>> {
    let axis: SweepAxis = axis.parse().map_err(to_py)?;
    let default = axis.default_axis::<f64>(points).map_err(to_py)?;
    let values = Axis::new(lo.unwrap_or(default.lo), hi.unwrap_or(default.hi), points)
        .map_err(to_py)?;
    let base = SweepBase {
        p0,
        pi,
        eps_f,
        eps_a,
        k,
        payoffs: payoffs_or_default(payoffs),
    };
    let result =
        chainstore::sweep::sweep(axis, &values, &base, &SolveOptions::default()).map_err(to_py)?;
    let rows = result
        .rows
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item(axis.name(), r.x)?;
            d.set_item("regime", r.regime.map(|g| g.label()))?;
            d.set_item("q_a", r.q_a)?;
            d.set_item("fight_probability", r.fight_probability)?;
            d.set_item("lambda_a", r.lambda_a)?;
            d.set_item("lambda_f", r.lambda_f)?;
            d.set_item("delta_lambda", r.delta_lambda)?;
            d.set_item("ex_ante_entry_b", r.ex_ante_entry_b)?;
            d.set_item("k_star", r.k_star)?;
            d.set_item("acquires", r.acquires)?;
            d.set_item("acquisition_equilibria", r.acquisition_equilibria)?;
            Ok(d)
        })
        .collect::<PyResult<Vec<_>>>()?;
    let mono = PyDict::new(py);
    for (col, m) in &result.monotonicity {
        mono.set_item(*col, m.label())?;
    }
    let out = PyDict::new(py);
    out.set_item("axis", axis.name())?;
    out.set_item("rows", rows)?;
    out.set_item("monotonicity", mono)?;
    Ok(out)
}

/// Value to the later entrant of observing the early market for sure.
#[pyfunction]
#[pyo3(signature = (p0, q_a, pi, payoffs = None))]
fn value_of_information(p0: f64, q_a: f64, pi: f64, payoffs: Option<PyPayoffs>) -> PyResult<f64> {
    let problem = AcquisitionProblem::new(0.0, p0, q_a, pi, payoffs_or_default(payoffs))
        .map_err(to_py)?;
    Ok(chainstore::value_of_information(&problem))
}

/// `(pi_F, pi_A)`.
#[pyfunction]
fn action_probs(p0: f64, q_a: f64) -> PyResult<(f64, f64)> {
    let p0 = chainstore::Probability::named("p0", p0).map_err(to_py)?;
    let q = chainstore::Probability::named("q_a", q_a).map_err(to_py)?;
    let (f, a) = action_probabilities(&p0, &q);
    Ok((f.into_inner(), a.into_inner()))
}

/// Every self-consistent acquisition choice, as
/// `(acquires, pi_eff, value_of_information, Outcome)` tuples.
#[pyfunction]
#[pyo3(signature = (p0, pi, k, payoffs = None))]
fn solve_with_acquisition(
    p0: f64,
    pi: f64,
    k: f64,
    payoffs: Option<PyPayoffs>,
) -> PyResult<Vec<(bool, f64, f64, PyOutcome)>> {
    let report = chainstore::solve_with_acquisition(
        &p0,
        &pi,
        &k,
        &payoffs_or_default(payoffs),
        &SolveOptions::default(),
    )
    .map_err(to_py)?;
    Ok(report
        .equilibria
        .into_iter()
        .map(|e| {
            (
                e.acquires,
                e.pi_eff,
                e.value_of_information,
                PyOutcome { inner: e.outcome },
            )
        })
        .collect())
}

/// Monte Carlo over `n_markets` markets and `t_periods` periods. Returns the
/// statistics as nested dicts and lists.
#[pyfunction]
#[pyo3(signature = (n_markets, t_periods, p0, pi, policy = "threshold", replications = 10000, seed = 0, entry_mode = "forced_first", shuffled = false, eps_f = 0.0, eps_a = 0.0, payoffs = None))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    n_markets: usize,
    t_periods: usize,
    p0: f64,
    pi: f64,
    policy: &str,
    replications: usize,
    seed: u64,
    entry_mode: &str,
    shuffled: bool,
    eps_f: f64,
    eps_a: f64,
    payoffs: Option<PyPayoffs>,
) -> PyResult<Bound<'py, PyAny>> {
    let policy: IncumbentPolicy = policy.parse().map_err(to_py)?;
    let mut cfg = SimulationConfig::new(
        n_markets,
        t_periods,
        p0,
        pi,
        payoffs_or_default(payoffs),
        policy,
    );
    cfg.replications = replications;
    cfg.seed = seed;
    cfg.entry_mode = match entry_mode {
        "forced_first" => EntryMode::ForcedFirst,
        "cutoff" => EntryMode::Cutoff,
        "always" => EntryMode::Always,
        other => return Err(ChainstoreError::new_err(format!("unknown entry mode `{other}`"))),
    };
    cfg.schedule = if shuffled {
        Schedule::Shuffled
    } else {
        Schedule::InOrder
    };
    if eps_f != 0.0 || eps_a != 0.0 {
        cfg.noise = Some(NoiseSpec::new(eps_f, eps_a).map_err(to_py)?);
    }
    let stats = py
        .detach(|| chainstore::simulate(&cfg))
        .map_err(to_py)?;
    let text = serde_json::to_string(&stats).map_err(|e| ChainstoreError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pymodule]
fn chainstore_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPayoffs>()?;
    m.add_class::<PyOutcome>()?;
    m.add_class::<PyVerification>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(regions, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(value_of_information, m)?)?;
    m.add_function(wrap_pyfunction!(action_probs, m)?)?;
    m.add_function(wrap_pyfunction!(solve_with_acquisition, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add("ChainstoreError", m.py().get_type::<ChainstoreError>())?;
    m.add("NoEquilibriumError", m.py().get_type::<NoEquilibriumError>())?;
    m.add(
        "NoPureAcquisitionEquilibriumError",
        m.py().get_type::<NoPureAcquisitionEquilibriumError>(),
    )?;
    Ok(())
}
