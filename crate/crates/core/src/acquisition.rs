//! Costly observation: the later entrant may pay `k` to see the period-1
//! action for sure, which raises observability from `pi` to
//! `pi + (1 - pi) sigma_k`.

use crate::equilibrium::{solve_sequential, EquilibriumOutcome, SolveOptions};
use crate::error::{Error, Result};
use crate::model::{posterior_after_fight, Payoffs, Probability};
use crate::scalar::{Comparator, Scalar};

/// Later entrant's acquisition decision problem.
#[derive(Debug, Clone)]
pub struct AcquisitionProblem<S> {
    pub k: S,
    pub p0: Probability<S>,
    pub q_a: Probability<S>,
    pub pi: Probability<S>,
    pub payoffs: Payoffs<S>,
}

impl<S: Scalar> AcquisitionProblem<S> {
    pub fn new(k: S, p0: S, q_a: S, pi: S, payoffs: Payoffs<S>) -> Result<Self> {
        if !k.is_finite() || k < S::zero() {
            return Err(Error::InvalidArgument(format!(
                "observation cost must be >= 0, got {k}"
            )));
        }
        Ok(Self {
            k,
            p0: Probability::named("p0", p0)?,
            q_a: Probability::named("q_a", q_a)?,
            pi: Probability::named("pi", pi)?,
            payoffs,
        })
    }
}

/// `(pi_F, pi_A)`: probabilities that the period-1 action is a fight or an
/// accommodation.
pub fn action_probabilities<S: Scalar>(
    p0: &Probability<S>,
    q_a: &Probability<S>,
) -> (Probability<S>, Probability<S>) {
    let one = S::one();
    let p = p0.value().clone();
    let q = q_a.value().clone();
    let pi_f = p.clone() + (one.clone() - p.clone()) * q.clone();
    let pi_a = (one.clone() - p) * (one - q);
    (
        Probability::new(pi_f).expect("mixture of probabilities"),
        Probability::new(pi_a).expect("product of probabilities"),
    )
}

/// `(1 - pi) [pi_A v + pi_F (v - (v + d) p(F))_+ - (v - (v + d) p0)_+]`.
pub fn value_of_information<S: Scalar>(problem: &AcquisitionProblem<S>) -> S {
    let AcquisitionProblem {
        p0, q_a, pi, payoffs, ..
    } = problem;
    let (pi_f, pi_a) = action_probabilities(p0, q_a);
    let v = payoffs.v.clone();
    let loss = payoffs.v.clone() + payoffs.d.clone();
    let post_f = posterior_after_fight(p0, q_a);
    let informed = pi_a.into_inner() * v.clone()
        + pi_f.into_inner() * (v.clone() - loss.clone() * post_f.value().clone()).positive_part();
    let uninformed = (v - loss * p0.value().clone()).positive_part();
    // Nonnegative in exact arithmetic; clamp rounding noise in floating point.
    ((S::one() - pi.value().clone()) * (informed - uninformed)).positive_part()
}

/// `k*`: the largest cost at which the entrant still acquires.
pub fn acquisition_cutoff<S: Scalar>(problem: &AcquisitionProblem<S>) -> S {
    value_of_information(problem)
}

/// Acquire iff `k <= k*`.
pub fn acquires<S: Scalar>(problem: &AcquisitionProblem<S>, cmp: &Comparator) -> bool {
    cmp.le(&problem.k, &acquisition_cutoff(problem))
}

/// `pi + (1 - pi) sigma_k`.
pub fn effective_observability<S: Scalar>(pi: &Probability<S>, acquires: bool) -> Probability<S> {
    if acquires {
        Probability::one()
    } else {
        pi.clone()
    }
}

#[derive(Debug, Clone)]
pub struct AcquisitionEquilibrium<S> {
    pub acquires: bool,
    pub pi_eff: S,
    /// Value of information at the equilibrium fight probability and the
    /// exogenous `pi`.
    pub value_of_information: S,
    pub outcome: EquilibriumOutcome<S>,
}

#[derive(Debug, Clone)]
pub struct AcquisitionReport<S> {
    pub k: S,
    /// Every self-consistent `(sigma_k, assessment)` pair, not acquiring first.
    pub equilibria: Vec<AcquisitionEquilibrium<S>>,
}

impl<S: Scalar> AcquisitionReport<S> {
    pub fn is_unique(&self) -> bool {
        self.equilibria.len() == 1
    }
}

/// Tries both acquisition decisions. For each, the incumbent plays the
/// equilibrium at `pi_eff`, and the decision is kept if it is the entrant's
/// best response to the resulting fight probability.
pub fn solve_with_acquisition<S: Scalar>(
    p0: &S,
    pi: &S,
    k: &S,
    payoffs: &Payoffs<S>,
    opts: &SolveOptions,
) -> Result<AcquisitionReport<S>> {
    let pip = Probability::named("pi", pi.clone())?;
    let mut equilibria = Vec::new();
    for sigma in [false, true] {
        let pi_eff = effective_observability(&pip, sigma).into_inner();
        let outcome = solve_sequential(p0, &pi_eff, payoffs, opts)?;
        let problem = AcquisitionProblem::new(
            k.clone(),
            p0.clone(),
            outcome.q_a.selected.clone(),
            pi.clone(),
            payoffs.clone(),
        )?;
        let voi = value_of_information(&problem);
        if acquires(&problem, &opts.cmp) == sigma {
            equilibria.push(AcquisitionEquilibrium {
                acquires: sigma,
                pi_eff,
                value_of_information: voi,
                outcome,
            });
        }
    }
    if equilibria.is_empty() {
        return Err(Error::NoPureAcquisitionEquilibrium { k: k.to_f64() });
    }
    Ok(AcquisitionReport {
        k: k.clone(),
        equilibria,
    })
}
