//! One-dimensional comparative statics.

use serde::{Deserialize, Serialize};

use crate::acquisition::{acquisition_cutoff, solve_with_acquisition, AcquisitionProblem};
use crate::equilibrium::{solve_sequential, Axis, Regime, SolveOptions};
use crate::error::{Error, Result};
use crate::model::Payoffs;
use crate::noisy::{solve_sequential_noisy, NoiseSpec};
use crate::scalar::{Comparator, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Pi,
    P0,
    EpsF,
    EpsA,
    K,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Pi => "pi",
            SweepAxis::P0 => "p0",
            SweepAxis::EpsF => "epsF",
            SweepAxis::EpsA => "epsA",
            SweepAxis::K => "k",
        }
    }

    /// Default range for the axis.
    pub fn default_axis<S: Scalar>(&self, n: usize) -> Result<Axis<S>> {
        match self {
            SweepAxis::P0 => Axis::prior(n),
            SweepAxis::EpsF | SweepAxis::EpsA => Axis::new(S::zero(), S::ratio(1, 2), n),
            SweepAxis::K => Axis::new(S::zero(), S::ratio(1, 2), n),
            SweepAxis::Pi => Axis::unit(n),
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "pi" => Ok(SweepAxis::Pi),
            "p0" => Ok(SweepAxis::P0),
            "epsf" => Ok(SweepAxis::EpsF),
            "epsa" => Ok(SweepAxis::EpsA),
            "k" => Ok(SweepAxis::K),
            _ => Err(Error::InvalidArgument(format!(
                "unknown sweep axis `{s}` (expected pi, p0, epsF, epsA or k)"
            ))),
        }
    }
}

/// The point around which one coordinate is varied.
#[derive(Debug, Clone)]
pub struct SweepBase<S> {
    pub p0: S,
    pub pi: S,
    pub eps_f: S,
    pub eps_a: S,
    pub k: S,
    pub payoffs: Payoffs<S>,
}

#[derive(Debug, Clone)]
pub struct SweepRow<S> {
    pub x: S,
    /// `None` when no equilibrium of the requested kind exists at `x`.
    pub regime: Option<Regime>,
    pub q_a: Option<S>,
    pub lambda_a: Option<S>,
    pub lambda_f: Option<S>,
    pub delta_lambda: Option<S>,
    pub ex_ante_entry_b: Option<S>,
    pub fight_probability: Option<S>,
    /// Value of information at the baseline fight probability.
    pub k_star: Option<S>,
    /// `k <= k*` against the baseline fight probability.
    pub acquires: Option<bool>,
    /// Number of self-consistent acquisition assessments (k axis only).
    pub acquisition_equilibria: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Constant,
    Increasing,
    Decreasing,
    NonMonotone,
}

impl Monotonicity {
    pub fn label(&self) -> &'static str {
        match self {
            Monotonicity::Constant => "constant",
            Monotonicity::Increasing => "weakly_increasing",
            Monotonicity::Decreasing => "weakly_decreasing",
            Monotonicity::NonMonotone => "non_monotone",
        }
    }
}

/// Direction of a sequence, ignoring missing entries.
pub fn monotonicity<S: Scalar>(values: &[Option<S>], cmp: &Comparator) -> Monotonicity {
    let xs: Vec<&S> = values.iter().flatten().collect();
    let up = xs.windows(2).any(|w| cmp.gt(w[1], w[0]));
    let down = xs.windows(2).any(|w| cmp.lt(w[1], w[0]));
    match (up, down) {
        (false, false) => Monotonicity::Constant,
        (true, false) => Monotonicity::Increasing,
        (false, true) => Monotonicity::Decreasing,
        (true, true) => Monotonicity::NonMonotone,
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult<S> {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow<S>>,
    /// `(column, direction)` for every numeric column.
    pub monotonicity: Vec<(&'static str, Monotonicity)>,
}

fn empty_row<S: Scalar>(x: S) -> SweepRow<S> {
    SweepRow {
        x,
        regime: None,
        q_a: None,
        lambda_a: None,
        lambda_f: None,
        delta_lambda: None,
        ex_ante_entry_b: None,
        fight_probability: None,
        k_star: None,
        acquires: None,
        acquisition_equilibria: None,
    }
}

fn sweep_point<S: Scalar>(
    axis: SweepAxis,
    x: &S,
    base: &SweepBase<S>,
    opts: &SolveOptions,
) -> Result<SweepRow<S>> {
    let mut b = base.clone();
    match axis {
        SweepAxis::Pi => b.pi = x.clone(),
        SweepAxis::P0 => b.p0 = x.clone(),
        SweepAxis::EpsF => b.eps_f = x.clone(),
        SweepAxis::EpsA => b.eps_a = x.clone(),
        SweepAxis::K => b.k = x.clone(),
    }
    let noise = NoiseSpec::new(b.eps_f.clone(), b.eps_a.clone())?;
    let solved = if noise.is_noiseless() {
        solve_sequential(&b.p0, &b.pi, &b.payoffs, opts)
    } else {
        solve_sequential_noisy(&b.p0, &b.pi, &b.payoffs, &noise, opts)
    };
    let mut row = empty_row(x.clone());
    match solved {
        Ok(out) => {
            row.regime = Some(out.regime);
            row.q_a = Some(out.q_a.selected.clone());
            row.fight_probability = Some(out.fight_probability());
            row.lambda_a = Some(out.lambda_a.clone());
            row.lambda_f = Some(out.lambda_f.clone());
            row.delta_lambda = Some(out.delta_lambda.clone());
            row.ex_ante_entry_b = Some(out.ex_ante_entry_b.clone());
            let problem = AcquisitionProblem::new(
                b.k.clone(),
                b.p0.clone(),
                out.q_a.selected.clone(),
                b.pi.clone(),
                b.payoffs.clone(),
            )?;
            let k_star = acquisition_cutoff(&problem);
            row.acquires = Some(opts.cmp.le(&b.k, &k_star));
            row.k_star = Some(k_star);
        }
        Err(Error::NoEquilibrium(_)) => {}
        Err(e) => return Err(e),
    }
    if axis == SweepAxis::K {
        match solve_with_acquisition(&b.p0, &b.pi, &b.k, &b.payoffs, opts) {
            Ok(r) => row.acquisition_equilibria = Some(r.equilibria.len()),
            Err(Error::NoPureAcquisitionEquilibrium { .. }) => row.acquisition_equilibria = Some(0),
            Err(e) => return Err(e),
        }
    }
    Ok(row)
}

/// Solves at every point of `values` along `axis`.
pub fn sweep<S: Scalar>(
    axis: SweepAxis,
    values: &Axis<S>,
    base: &SweepBase<S>,
    opts: &SolveOptions,
) -> Result<SweepResult<S>> {
    let rows = values
        .points()
        .iter()
        .map(|x| sweep_point(axis, x, base, opts))
        .collect::<Result<Vec<_>>>()?;
    let col = |f: fn(&SweepRow<S>) -> Option<S>| -> Vec<Option<S>> { rows.iter().map(f).collect() };
    let cmp = &opts.cmp;
    let monotonicity = vec![
        ("qA", monotonicity(&col(|r| r.q_a.clone()), cmp)),
        ("fightProb", monotonicity(&col(|r| r.fight_probability.clone()), cmp)),
        ("lambdaA", monotonicity(&col(|r| r.lambda_a.clone()), cmp)),
        ("lambdaF", monotonicity(&col(|r| r.lambda_f.clone()), cmp)),
        ("deltaLambda", monotonicity(&col(|r| r.delta_lambda.clone()), cmp)),
        ("exAnteEntryB", monotonicity(&col(|r| r.ex_ante_entry_b.clone()), cmp)),
        ("kStar", monotonicity(&col(|r| r.k_star.clone()), cmp)),
    ];
    Ok(SweepResult {
        axis,
        rows,
        monotonicity,
    })
}
