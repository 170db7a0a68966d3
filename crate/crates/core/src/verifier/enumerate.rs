//! Exact expansion of the two-market game tree.
//!
//! Nothing here calls the closed-form posteriors or continuation
//! probabilities: beliefs are obtained by summing branch probabilities, so
//! the statistics can be used to check the closed forms.

use serde::{Deserialize, Serialize};

use crate::equilibrium::Protocol;
use crate::model::{Observation, Payoffs};
use crate::noisy::NoiseSpec;
use crate::scalar::{Comparator, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IncumbentType {
    Tough,
    Strategic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Fight,
    Accommodate,
}

/// Primitives of one two-market game.
#[derive(Debug, Clone)]
pub struct GameSpec<S> {
    pub protocol: Protocol,
    pub p0: S,
    pub pi: S,
    pub noise: Option<NoiseSpec<S>>,
    pub payoffs: Payoffs<S>,
}

impl<S: Scalar> GameSpec<S> {
    /// Observations available to the later entrant, in a fixed order.
    pub fn observations(&self) -> Vec<Observation> {
        match (self.protocol, &self.noise) {
            (Protocol::Simultaneous, _) => vec![Observation::NoSignal],
            (Protocol::Sequential, None) => vec![
                Observation::FightSignal,
                Observation::AccommodateSignal,
                Observation::NoSignal,
            ],
            (Protocol::Sequential, Some(_)) => vec![
                Observation::NoisyFightReport,
                Observation::NoisyAccommodateReport,
                Observation::NoSignal,
            ],
        }
    }

    /// Distribution over what `E_B` sees given the period-1 action, for an
    /// arrived signal.
    fn reports(&self, action: Action) -> Vec<(Observation, S)> {
        let one = S::one();
        match (&self.noise, action) {
            (None, Action::Fight) => vec![(Observation::FightSignal, one)],
            (None, Action::Accommodate) => vec![(Observation::AccommodateSignal, one)],
            (Some(n), Action::Fight) => vec![
                (Observation::NoisyFightReport, one - n.eps_f.clone()),
                (Observation::NoisyAccommodateReport, n.eps_f.clone()),
            ],
            (Some(n), Action::Accommodate) => vec![
                (Observation::NoisyFightReport, n.eps_a.clone()),
                (Observation::NoisyAccommodateReport, one - n.eps_a.clone()),
            ],
        }
    }

    /// True when the tough type can never produce `obs`.
    fn tough_cannot_generate(&self, obs: Observation) -> bool {
        match obs {
            Observation::AccommodateSignal => true,
            Observation::NoisyAccommodateReport => self
                .noise
                .as_ref()
                .map(|n| n.eps_f == S::zero())
                .unwrap_or(true),
            _ => false,
        }
    }
}

/// Small map from observation to a value.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationMap<S> {
    entries: Vec<(Observation, S)>,
}

impl<S: Clone> ObservationMap<S> {
    pub fn new() -> Self {
        Self {
            entries: Vec::new(),
        }
    }

    pub fn from_fn(obs: &[Observation], mut f: impl FnMut(Observation) -> S) -> Self {
        Self {
            entries: obs.iter().map(|&o| (o, f(o))).collect(),
        }
    }

    pub fn get(&self, obs: Observation) -> Option<&S> {
        self.entries.iter().find(|(o, _)| *o == obs).map(|(_, v)| v)
    }

    pub fn insert(&mut self, obs: Observation, value: S) {
        match self.entries.iter_mut().find(|(o, _)| *o == obs) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((obs, value)),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Observation, &S)> {
        self.entries.iter().map(|(o, v)| (*o, v))
    }
}

impl<S: Clone> Default for ObservationMap<S> {
    fn default() -> Self {
        Self::new()
    }
}

/// A complete behavioral profile for the incumbent's strategic type and both
/// entrants.
#[derive(Debug, Clone)]
pub struct StrategyProfile<S> {
    /// Strategic fight probability in market A (period 1, or either market
    /// under simultaneous entry).
    pub q_a: S,
    /// Strategic fight probability in market B.
    pub q_b: S,
    /// Entry probability of `E_A`.
    pub entry_a: S,
    /// Entry probability of `E_B` after each observation.
    pub entry_b: ObservationMap<S>,
}

#[derive(Debug, Clone)]
pub struct TerminalOutcome<S> {
    pub probability: S,
    pub incumbent: IncumbentType,
    pub entry_a: bool,
    pub action_a: Option<Action>,
    pub observation: Observation,
    pub entry_b: bool,
    pub action_b: Option<Action>,
    pub incumbent_payoff: S,
    pub entrant_a_payoff: S,
    pub entrant_b_payoff: S,
}

#[derive(Debug, Clone)]
pub struct OutcomeDistribution<S> {
    pub outcomes: Vec<TerminalOutcome<S>>,
}

impl<S: Scalar> OutcomeDistribution<S> {
    pub fn total_mass(&self) -> S {
        self.sum(|_| true, |_| S::one())
    }

    fn sum(
        &self,
        pred: impl Fn(&TerminalOutcome<S>) -> bool,
        value: impl Fn(&TerminalOutcome<S>) -> S,
    ) -> S {
        self.outcomes
            .iter()
            .filter(|o| pred(o))
            .fold(S::zero(), |acc, o| acc + o.probability.clone() * value(o))
    }

    pub fn probability(&self, pred: impl Fn(&TerminalOutcome<S>) -> bool) -> S {
        self.sum(pred, |_| S::one())
    }

    /// `P(event | given)`, `None` when `given` has zero mass.
    pub fn conditional(
        &self,
        event: impl Fn(&TerminalOutcome<S>) -> bool,
        given: impl Fn(&TerminalOutcome<S>) -> bool,
    ) -> Option<S> {
        let denom = self.probability(&given);
        if denom == S::zero() {
            return None;
        }
        Some(self.probability(|o| given(o) && event(o)) / denom)
    }

    pub fn expectation_given(
        &self,
        value: impl Fn(&TerminalOutcome<S>) -> S,
        given: impl Fn(&TerminalOutcome<S>) -> bool,
    ) -> Option<S> {
        let denom = self.probability(&given);
        if denom == S::zero() {
            return None;
        }
        Some(self.sum(&given, value) / denom)
    }

    pub fn ex_ante_entry_b(&self) -> S {
        self.probability(|o| o.entry_b)
    }

    /// Continuation entry probability `P(E_B enters | period-1 action)`.
    pub fn entry_b_given_action(&self, action: Action) -> Option<S> {
        self.conditional(|o| o.entry_b, |o| o.action_a == Some(action))
    }

    /// Posterior that the incumbent is tough after `obs`.
    pub fn posterior_tough(&self, obs: Observation) -> Option<S> {
        self.conditional(
            |o| o.incumbent == IncumbentType::Tough,
            |o| o.observation == obs,
        )
    }

    pub fn expected_incumbent_payoff(&self, ty: IncumbentType) -> Option<S> {
        self.expectation_given(|o| o.incumbent_payoff.clone(), |o| o.incumbent == ty)
    }

    pub fn probability_action_a(&self, action: Action) -> S {
        self.probability(|o| o.action_a == Some(action))
    }
}

fn stage_payoffs<S: Scalar>(
    payoffs: &Payoffs<S>,
    entered: bool,
    action: Option<Action>,
) -> (S, S) {
    match (entered, action) {
        (false, _) | (true, None) => (payoffs.m.clone(), S::zero()),
        (true, Some(Action::Fight)) => (-payoffs.c.clone(), -payoffs.d.clone()),
        (true, Some(Action::Accommodate)) => (payoffs.a.clone(), payoffs.v.clone()),
    }
}

fn type_branches<S: Scalar>(p0: &S) -> [(IncumbentType, S); 2] {
    [
        (IncumbentType::Tough, p0.clone()),
        (IncumbentType::Strategic, S::one() - p0.clone()),
    ]
}

fn action_branches<S: Scalar>(ty: IncumbentType, q: &S) -> Vec<(Action, S)> {
    match ty {
        IncumbentType::Tough => vec![(Action::Fight, S::one())],
        IncumbentType::Strategic => vec![
            (Action::Fight, q.clone()),
            (Action::Accommodate, S::one() - q.clone()),
        ],
    }
}

fn bool_branches<S: Scalar>(p: &S) -> [(bool, S); 2] {
    [(true, p.clone()), (false, S::one() - p.clone())]
}

/// Expands every terminal history with its probability and payoffs. Zero
/// probability branches are kept so that the tree shape does not depend on
/// the strategy.
pub fn enumerate_outcomes<S: Scalar>(
    spec: &GameSpec<S>,
    profile: &StrategyProfile<S>,
) -> OutcomeDistribution<S> {
    match spec.protocol {
        Protocol::Sequential => enumerate_sequential(spec, profile),
        Protocol::Simultaneous => enumerate_simultaneous(spec, profile),
    }
}

fn enumerate_sequential<S: Scalar>(
    spec: &GameSpec<S>,
    profile: &StrategyProfile<S>,
) -> OutcomeDistribution<S> {
    let mut outcomes = Vec::new();
    for (ty, p_ty) in type_branches(&spec.p0) {
        for (entry_a, p_ea) in bool_branches(&profile.entry_a) {
            let first: Vec<(Option<Action>, S)> = if entry_a {
                action_branches(ty, &profile.q_a)
                    .into_iter()
                    .map(|(a, p)| (Some(a), p))
                    .collect()
            } else {
                vec![(None, S::one())]
            };
            for (action_a, p_act) in first {
                // Only a contested period generates an action signal.
                let mut seen: Vec<(Observation, S)> = Vec::new();
                match action_a {
                    Some(act) => {
                        for (obs, p_rep) in spec.reports(act) {
                            seen.push((obs, spec.pi.clone() * p_rep));
                        }
                        seen.push((Observation::NoSignal, S::one() - spec.pi.clone()));
                    }
                    None => seen.push((Observation::NoSignal, S::one())),
                }
                for (obs, p_obs) in seen {
                    let e_b = profile
                        .entry_b
                        .get(obs)
                        .cloned()
                        .unwrap_or_else(S::zero);
                    for (entry_b, p_eb) in bool_branches(&e_b) {
                        let second: Vec<(Option<Action>, S)> = if entry_b {
                            action_branches(ty, &profile.q_b)
                                .into_iter()
                                .map(|(a, p)| (Some(a), p))
                                .collect()
                        } else {
                            vec![(None, S::one())]
                        };
                        for (action_b, p_act_b) in second {
                            let (inc_a, ent_a) = stage_payoffs(&spec.payoffs, entry_a, action_a);
                            let (inc_b, ent_b) = stage_payoffs(&spec.payoffs, entry_b, action_b);
                            outcomes.push(TerminalOutcome {
                                probability: p_ty.clone()
                                    * p_ea.clone()
                                    * p_act.clone()
                                    * p_obs.clone()
                                    * p_eb.clone()
                                    * p_act_b,
                                incumbent: ty,
                                entry_a,
                                action_a,
                                observation: obs,
                                entry_b,
                                action_b,
                                incumbent_payoff: inc_a + inc_b,
                                entrant_a_payoff: ent_a,
                                entrant_b_payoff: ent_b,
                            });
                        }
                    }
                }
            }
        }
    }
    OutcomeDistribution { outcomes }
}

fn enumerate_simultaneous<S: Scalar>(
    spec: &GameSpec<S>,
    profile: &StrategyProfile<S>,
) -> OutcomeDistribution<S> {
    let mut outcomes = Vec::new();
    let e_b = profile
        .entry_b
        .get(Observation::NoSignal)
        .cloned()
        .unwrap_or_else(S::zero);
    for (ty, p_ty) in type_branches(&spec.p0) {
        for (entry_a, p_ea) in bool_branches(&profile.entry_a) {
            for (entry_b, p_eb) in bool_branches(&e_b) {
                let acts = |entered: bool, q: &S| -> Vec<(Option<Action>, S)> {
                    if entered {
                        action_branches(ty, q)
                            .into_iter()
                            .map(|(a, p)| (Some(a), p))
                            .collect()
                    } else {
                        vec![(None, S::one())]
                    }
                };
                for (action_a, p_a) in acts(entry_a, &profile.q_a) {
                    for (action_b, p_b) in acts(entry_b, &profile.q_b) {
                        let (inc_a, ent_a) = stage_payoffs(&spec.payoffs, entry_a, action_a);
                        let (inc_b, ent_b) = stage_payoffs(&spec.payoffs, entry_b, action_b);
                        outcomes.push(TerminalOutcome {
                            probability: p_ty.clone()
                                * p_ea.clone()
                                * p_eb.clone()
                                * p_a.clone()
                                * p_b,
                            incumbent: ty,
                            entry_a,
                            action_a,
                            observation: Observation::NoSignal,
                            entry_b,
                            action_b,
                            incumbent_payoff: inc_a + inc_b,
                            entrant_a_payoff: ent_a,
                            entrant_b_payoff: ent_b,
                        });
                    }
                }
            }
        }
    }
    OutcomeDistribution { outcomes }
}

/// A belief held by the later entrant, with the convention used when the
/// observation is off the equilibrium path.
#[derive(Debug, Clone, PartialEq)]
pub enum Belief<S> {
    Bayes(S),
    OffPath { value: S, convention: &'static str },
}

impl<S: Scalar> Belief<S> {
    pub fn value(&self) -> &S {
        match self {
            Belief::Bayes(v) => v,
            Belief::OffPath { value, .. } => value,
        }
    }
}

/// Posteriors of `E_B` under the strategic fight probability `q_a`,
/// obtained by summing a tree in which `E_A` enters and every signal
/// arrives. Entry and arrival are type-independent, so conditioning on them
/// leaves the posteriors unchanged.
pub fn bayes_beliefs<S: Scalar>(spec: &GameSpec<S>, q_a: &S) -> ObservationMap<Belief<S>> {
    let obs = spec.observations();
    if spec.protocol == Protocol::Simultaneous {
        return ObservationMap::from_fn(&obs, |_| Belief::Bayes(spec.p0.clone()));
    }
    let belief_spec = GameSpec {
        pi: S::one(),
        ..spec.clone()
    };
    let profile = StrategyProfile {
        q_a: q_a.clone(),
        q_b: S::zero(),
        entry_a: S::one(),
        entry_b: ObservationMap::from_fn(&obs, |_| S::zero()),
    };
    let tree = enumerate_sequential(&belief_spec, &profile);
    ObservationMap::from_fn(&obs, |o| {
        if o == Observation::NoSignal {
            return Belief::Bayes(spec.p0.clone());
        }
        match tree.posterior_tough(o) {
            Some(p) => Belief::Bayes(p),
            None if spec.tough_cannot_generate(o) => Belief::OffPath {
                value: S::zero(),
                convention: "only the strategic type can produce this observation",
            },
            None => Belief::OffPath {
                value: spec.p0.clone(),
                convention: "unreached observation treated as uninformative",
            },
        }
    })
}

/// Best response of an entrant with fight belief `alpha`: 1 if entering is
/// strictly profitable, 0 if strictly unprofitable, `knife_edge` otherwise.
pub fn cutoff_entry<S: Scalar>(
    payoffs: &Payoffs<S>,
    alpha: &S,
    knife_edge: &S,
    cmp: &Comparator,
) -> S {
    let value = payoffs.v.clone() - (payoffs.v.clone() + payoffs.d.clone()) * alpha.clone();
    match cmp.cmp(&value, &S::zero()) {
        std::cmp::Ordering::Greater => S::one(),
        std::cmp::Ordering::Less => S::zero(),
        std::cmp::Ordering::Equal => knife_edge.clone(),
    }
}
