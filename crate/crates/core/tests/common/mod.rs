#![allow(dead_code)]

use chainstore::equilibrium::EquilibriumOutcome;
use chainstore::model::Payoffs;
use chainstore::scalar::{Comparator, Scalar};
use chainstore::verifier::enumerate::{
    bayes_beliefs, cutoff_entry, enumerate_outcomes, Action, GameSpec, ObservationMap,
    StrategyProfile,
};

/// `(lambda_A, lambda_F)` from the tree, with the candidate's entrant
/// responses and a fight probability at which both actions occur.
pub fn oracle_lambdas<S: Scalar>(out: &EquilibriumOutcome<S>) -> (S, S) {
    let mut profile = out.profile_given_entry();
    profile.q_a = S::ratio(1, 2);
    let dist = enumerate_outcomes(&out.game_spec(), &profile);
    (
        dist.entry_b_given_action(Action::Accommodate).unwrap(),
        dist.entry_b_given_action(Action::Fight).unwrap(),
    )
}

/// Later-entrant responses given by the cutoff rule (entering at the knife
/// edge) at the tree's own beliefs under `q_a`.
pub fn cutoff_profile<S: Scalar>(spec: &GameSpec<S>, q_a: &S) -> StrategyProfile<S> {
    let beliefs = bayes_beliefs(spec, q_a);
    let cmp = Comparator::default();
    let entry_b = ObservationMap::from_fn(&spec.observations(), |o| {
        cutoff_entry(&spec.payoffs, beliefs.get(o).unwrap().value(), &S::one(), &cmp)
    });
    StrategyProfile {
        q_a: q_a.clone(),
        q_b: S::zero(),
        entry_a: S::one(),
        entry_b,
    }
}

/// `(lambda_A, lambda_F)` from the tree under cutoff responses at `q_a`.
pub fn oracle_cutoff_lambdas<S: Scalar>(spec: &GameSpec<S>, q_a: &S) -> (S, S) {
    let resp = cutoff_profile(spec, q_a);
    let mut probe = resp.clone();
    probe.q_a = S::ratio(1, 2);
    let dist = enumerate_outcomes(spec, &probe);
    (
        dist.entry_b_given_action(Action::Accommodate).unwrap(),
        dist.entry_b_given_action(Action::Fight).unwrap(),
    )
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

pub fn calibration() -> Payoffs<f64> {
    Payoffs::calibration()
}

pub const GRID_P0: [f64; 3] = [0.2, 0.5, 0.8];

pub fn grid_pi() -> [f64; 3] {
    [0.1, 5.0 / 7.0, 0.95]
}
