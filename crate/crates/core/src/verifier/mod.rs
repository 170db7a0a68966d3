//! Brute-force certification of candidate equilibria.
//!
//! [`verify_pbe`] holds the entrants' strategies fixed and evaluates the
//! strategic incumbent's payoff at a grid of fight probabilities in both
//! markets, checks every entrant information set against the cutoff rule,
//! and compares the candidate's posteriors with beliefs obtained by summing
//! the outcome tree.

pub mod enumerate;

use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::{EquilibriumOutcome, FightChoice, Protocol, Regime};
use crate::error::Result;
use crate::model::{entrant_value, Observation, Probability};
use crate::scalar::Scalar;
use enumerate::{
    bayes_beliefs, enumerate_outcomes, Belief, IncumbentType, ObservationMap, StrategyProfile,
};

/// Default absolute tolerance for floating-point certification.
pub const DEFAULT_VERIFY_TOLERANCE: f64 = 1e-9;

/// Default number of evenly spaced deviation points in `[0, 1]`.
pub const DEFAULT_GRID_POINTS: usize = 1001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyOptions {
    pub tolerance: f64,
    pub grid_points: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_VERIFY_TOLERANCE,
            grid_points: DEFAULT_GRID_POINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BayesViolation {
    pub observation: Observation,
    pub claimed: f64,
    pub bayes: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffPathNote {
    pub observation: Observation,
    pub belief: f64,
    pub convention: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntrantCheck {
    /// `"E_A"` or `"E_B"`.
    pub entrant: &'static str,
    pub observation: Option<Observation>,
    pub fight_belief: f64,
    pub entry_probability: f64,
    pub gain: f64,
}

#[derive(Debug, Clone)]
pub struct DeviationReport<S> {
    pub candidate: EquilibriumOutcome<S>,
    pub grid_points: usize,
    pub candidate_payoff: S,
    pub max_incumbent_gain: S,
    /// `(q_a, q_b)` attaining the largest incumbent payoff.
    pub best_deviation: (S, S),
    pub max_entrant_gain: S,
    pub entrant_checks: Vec<EntrantCheck>,
    pub bayes_violations: Vec<BayesViolation>,
    pub off_path: Vec<OffPathNote>,
    pub tolerance: f64,
    pub passed: bool,
}

fn within<S: Scalar>(gain: &S, tolerance: f64) -> bool {
    if S::is_exact() {
        *gain <= S::zero()
    } else {
        gain.to_f64() <= tolerance
    }
}

/// Expected total payoff of the strategic type, given that `E_A` entered,
/// when it fights with probabilities `(q_a, q_b)` and everyone else follows
/// the candidate.
pub fn incumbent_payoff<S: Scalar>(candidate: &EquilibriumOutcome<S>, q_a: &S, q_b: &S) -> S {
    let mut profile = candidate.profile_given_entry();
    profile.q_a = q_a.clone();
    profile.q_b = q_b.clone();
    enumerate_outcomes(&candidate.game_spec(), &profile)
        .expected_incumbent_payoff(IncumbentType::Strategic)
        .unwrap_or_else(S::zero)
}

fn deviation_grid<S: Scalar>(candidate: &S, n: usize) -> Vec<S> {
    let mut pts: Vec<S> = (0..n)
        .map(|i| S::ratio(i as i64, (n.max(2) - 1) as i64))
        .collect();
    pts.push(candidate.clone());
    pts.push(S::zero());
    pts.push(S::one());
    pts
}

/// Certifies `candidate` as a perfect Bayesian equilibrium up to `tolerance`.
pub fn verify_pbe<S: Scalar>(
    candidate: &EquilibriumOutcome<S>,
    opts: &VerifyOptions,
) -> DeviationReport<S> {
    let spec = candidate.game_spec();
    let payoffs = &candidate.payoffs;

    // Incumbent: grid over q_a, corners plus the candidate over q_b (payoff
    // is linear in q_b once q_a is fixed).
    let base = incumbent_payoff(candidate, &candidate.q_a.selected, &candidate.q_b);
    let qa_grid = deviation_grid(&candidate.q_a.selected, opts.grid_points);
    let qb_grid = vec![S::zero(), S::one(), candidate.q_b.clone()];
    let (best_payoff, best_dev) = qa_grid
        .par_iter()
        .map(|qa| {
            qb_grid
                .iter()
                .map(|qb| (incumbent_payoff(candidate, qa, qb), (qa.clone(), qb.clone())))
                .fold(None, |acc: Option<(S, (S, S))>, x| match acc {
                    Some(a) if a.0 >= x.0 => Some(a),
                    _ => Some(x),
                })
                .expect("nonempty grid")
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(None, |acc: Option<(S, (S, S))>, x| match acc {
            Some(a) if a.0 >= x.0 => Some(a),
            _ => Some(x),
        })
        .expect("nonempty grid");
    let incumbent_gain = (best_payoff - base.clone()).max_of(S::zero());

    // Entrants.
    let mut checks = Vec::new();
    let mut max_entrant_gain = S::zero();
    let mut check = |entrant: &'static str, obs: Option<Observation>, alpha: S, entry: S| {
        let value = entrant_value(
            &Probability::new(alpha.clone()).expect("fight belief in [0, 1]"),
            payoffs,
        );
        let best = value.clone().positive_part();
        let gain = best - entry.clone() * value;
        checks.push(EntrantCheck {
            entrant,
            observation: obs,
            fight_belief: alpha.to_f64(),
            entry_probability: entry.to_f64(),
            gain: gain.to_f64(),
        });
        if gain > max_entrant_gain {
            max_entrant_gain = gain;
        }
    };

    let one = S::one();
    let p0 = candidate.p0.clone();
    let profile = candidate.profile();
    let alpha_a = p0.clone() + (one.clone() - p0.clone()) * candidate.q_a.selected.clone();
    check("E_A", None, alpha_a, profile.entry_a.clone());

    let oracle = bayes_beliefs(&spec, &candidate.q_a.selected);
    let mut violations = Vec::new();
    let mut off_path = Vec::new();
    let tol_cmp = if S::is_exact() { 0.0 } else { opts.tolerance };
    for (obs, belief) in oracle.iter() {
        let claimed = candidate.beliefs_b.get(obs).cloned();
        let used = match belief {
            Belief::Bayes(b) => {
                if let Some(c) = &claimed {
                    let diff = (c.clone() - b.clone()).abs_val();
                    let bad = if S::is_exact() {
                        diff > S::zero()
                    } else {
                        diff.to_f64() > tol_cmp
                    };
                    if bad {
                        violations.push(BayesViolation {
                            observation: obs,
                            claimed: c.to_f64(),
                            bayes: b.to_f64(),
                        });
                    }
                }
                b.clone()
            }
            Belief::OffPath { value, convention } => {
                let v = claimed.unwrap_or_else(|| value.clone());
                off_path.push(OffPathNote {
                    observation: obs,
                    belief: v.to_f64(),
                    convention,
                });
                v
            }
        };
        let entry = profile.entry_b.get(obs).cloned().unwrap_or_else(S::zero);
        let alpha = used.clone() + (one.clone() - used) * candidate.q_b.clone();
        check("E_B", Some(obs), alpha, entry);
    }

    let passed = within(&incumbent_gain, opts.tolerance)
        && within(&max_entrant_gain, opts.tolerance)
        && violations.is_empty();

    DeviationReport {
        candidate: candidate.clone(),
        grid_points: qa_grid.len() * qb_grid.len(),
        candidate_payoff: base,
        max_incumbent_gain: incumbent_gain,
        best_deviation: best_dev,
        max_entrant_gain,
        entrant_checks: checks,
        bayes_violations: violations,
        off_path,
        tolerance: opts.tolerance,
        passed,
    }
}

/// Builds the assessment in which the strategic type fights in market A
/// with probability `q_a`, beliefs follow Bayes' rule (conventions off
/// path), and the later entrant uses the cutoff rule at those beliefs. Used
/// to construct candidates that a solver would not produce.
pub fn assessment_with_fight_probability<S: Scalar>(
    template: &EquilibriumOutcome<S>,
    q_a: S,
    regime: Regime,
) -> Result<EquilibriumOutcome<S>> {
    Probability::named("q_a", q_a.clone())?;
    let mut out = template.clone();
    out.regime = regime;
    out.q_a = FightChoice::point(q_a.clone());
    let spec = out.game_spec();
    let beliefs = bayes_beliefs(&spec, &q_a);
    let thr = &out.thresholds;
    out.beliefs_b = ObservationMap::default();
    out.response_b = ObservationMap::default();
    for (obs, b) in beliefs.iter() {
        let belief = if spec.protocol == Protocol::Simultaneous {
            // Entrant B faces the same strategic fight rule as A.
            b.value().clone() + (S::one() - b.value().clone()) * out.q_b.clone()
        } else {
            b.value().clone()
        };
        out.beliefs_b.insert(obs, b.value().clone());
        out.response_b.insert(obs, thr.entry_indicator(&belief));
    }
    let alpha = out.p0.clone() + (S::one() - out.p0.clone()) * q_a;
    out.entrant_a_enters = thr.enters(&alpha);

    let dist = enumerate_outcomes(&spec, &out.profile_given_entry());
    if let Some(lf) = dist.entry_b_given_action(enumerate::Action::Fight) {
        out.lambda_f = lf;
    }
    let la = accommodation_continuation(&out);
    out.lambda_a = la;
    out.delta_lambda = out.lambda_a.clone() - out.lambda_f.clone();
    out.payoff_gap = crate::equilibrium::incumbent_payoff_gap(&out.delta_lambda, &out.payoffs);
    out.refresh_enumerated();
    Ok(out)
}

/// `P(E_B enters | strategic accommodation in market A)`, by enumeration
/// with a profile in which accommodation has positive probability.
fn accommodation_continuation<S: Scalar>(out: &EquilibriumOutcome<S>) -> S {
    let mut profile: StrategyProfile<S> = out.profile_given_entry();
    profile.q_a = S::zero();
    enumerate_outcomes(&out.game_spec(), &profile)
        .entry_b_given_action(enumerate::Action::Accommodate)
        .unwrap_or_else(S::zero)
}

/// Later entrant's expected payoff with and without acquiring the signal,
/// given that `E_A` entered and the strategic type fights with `q_a`: in
/// each case she best-responds to the Bayes beliefs of the tree. Their
/// difference is the value of information.
pub fn information_values<S: Scalar>(
    p0: &S,
    q_a: &S,
    pi: &S,
    payoffs: &crate::model::Payoffs<S>,
) -> (S, S) {
    let value = |arrival: S| -> S {
        let spec = enumerate::GameSpec {
            protocol: Protocol::Sequential,
            p0: p0.clone(),
            pi: arrival,
            noise: None,
            payoffs: payoffs.clone(),
        };
        let beliefs = bayes_beliefs(&spec, q_a);
        let entry_b = ObservationMap::from_fn(&spec.observations(), |o| {
            let b = beliefs.get(o).map(|b| b.value().clone()).unwrap_or_else(S::zero);
            let worth = entrant_value(&Probability::new(b).expect("belief in [0, 1]"), payoffs);
            if worth > S::zero() {
                S::one()
            } else {
                S::zero()
            }
        });
        let profile = StrategyProfile {
            q_a: q_a.clone(),
            q_b: S::zero(),
            entry_a: S::one(),
            entry_b,
        };
        let dist = enumerate_outcomes(&spec, &profile);
        dist.expectation_given(|o| o.entrant_b_payoff.clone(), |_| true)
            .unwrap_or_else(S::zero)
    };
    (value(S::one()), value(pi.clone()))
}
