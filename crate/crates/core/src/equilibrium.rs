//! Continuation entry probabilities and equilibrium assessments of the
//! two-market game.
//!
//! Under sequential entry the later entrant `E_B` sees the period-1 action
//! with probability `pi`. Fighting instead of accommodating lowers her entry
//! probability by `delta_lambda`, and the strategic incumbent fights iff
//! `(M - a) * delta_lambda >= a + c`. Regimes:
//!
//! | region                    | strategic play                      |
//! |---------------------------|-------------------------------------|
//! | `p0 > phi`, `pi >= Delta` | fight (`q_a = 1`)                   |
//! | `pi < Delta`              | accommodate (`q_a = 0`)             |
//! | `p0 <= phi`, `pi = Delta` | any `q_a` in `[0, q_bar)`           |
//! | `p0 <= phi`, `pi > Delta` | `q_a = q_bar`, `E_B` mixes after `F` |
//!
//! where `q_bar` solves `p(F; q_bar) = phi`. In the last row the later
//! entrant is indifferent after a fight signal and enters with probability
//! `1 - Delta / pi`, which is what makes the strategic type indifferent.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    entry_cutoff, posterior_after_accommodate, posterior_after_fight, Observation, Payoffs,
    Probability, Thresholds,
};
use crate::noisy::NoiseSpec;
use crate::scalar::{Comparator, Scalar};
use crate::verifier::enumerate::{
    enumerate_outcomes, GameSpec, IncumbentType, ObservationMap, OutcomeDistribution,
    StrategyProfile,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Sequential,
    Simultaneous,
}

impl std::str::FromStr for Protocol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sequential" | "seq" => Ok(Protocol::Sequential),
            "simultaneous" | "sim" => Ok(Protocol::Simultaneous),
            other => Err(Error::InvalidArgument(format!("unknown protocol `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    /// Strategic type fights the early entrant for sure.
    HighFight,
    /// Strategic type accommodates the early entrant.
    LowAccommodate,
    /// Indifference on `pi = Delta`: a continuum of fight probabilities.
    BoundaryMix,
    /// Strategic type mixes at the point where a fight signal leaves the
    /// later entrant indifferent; she mixes in turn.
    InteriorMix,
    /// Both entrants arrive together.
    Simultaneous,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::HighFight => "HIGH_FIGHT",
            Regime::LowAccommodate => "LOW_ACCOMMODATE",
            Regime::BoundaryMix => "BOUNDARY_MIX",
            Regime::InteriorMix => "INTERIOR_MIX",
            Regime::Simultaneous => "SIMULTANEOUS",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Equilibrium fight probability of the strategic type in market A: a point
/// or, on the indifference boundary, the interval `[lo, hi)` together with
/// the representative used for statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct FightChoice<S> {
    pub selected: S,
    pub interval: Option<(S, S)>,
}

impl<S: Scalar> FightChoice<S> {
    pub fn point(q: S) -> Self {
        Self {
            selected: q,
            interval: None,
        }
    }
}

/// Numerical and selection settings shared by the solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub cmp: Comparator,
    /// Position inside a boundary-mixing interval `[lo, hi)` used as the
    /// representative, as a fraction in `[0, 1)`.
    pub mix_selection: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            cmp: Comparator::default(),
            mix_selection: 0.5,
        }
    }
}

impl SolveOptions {
    pub fn with_selection(mut self, fraction: f64) -> Self {
        self.mix_selection = fraction;
        self
    }

    pub(crate) fn select<S: Scalar>(&self, lo: &S, hi: &S) -> S {
        let frac = S::from_f64(self.mix_selection).unwrap_or_else(|| S::ratio(1, 2));
        lo.clone() + (hi.clone() - lo.clone()) * frac
    }
}

#[derive(Debug, Clone)]
pub struct EquilibriumOutcome<S> {
    pub protocol: Protocol,
    pub regime: Regime,
    pub p0: S,
    pub pi: S,
    pub noise: Option<NoiseSpec<S>>,
    pub q_a: FightChoice<S>,
    /// Strategic fight probability in the last market; always zero.
    pub q_b: S,
    /// `E_B` posteriors after each observation, as used by the assessment.
    pub beliefs_b: ObservationMap<S>,
    /// `E_B` entry probability after each observation.
    pub response_b: ObservationMap<S>,
    pub lambda_a: S,
    pub lambda_f: S,
    pub delta_lambda: S,
    pub payoff_gap: S,
    /// `P(E_B enters)`, given that `E_A` entered (by enumeration).
    pub ex_ante_entry_b: S,
    /// Expected two-market payoffs given that `E_A` entered (by enumeration).
    pub strategic_payoff: S,
    pub tough_payoff: S,
    pub entrant_a_enters: bool,
    pub thresholds: Thresholds<S>,
    pub payoffs: Payoffs<S>,
}

impl<S: Scalar> EquilibriumOutcome<S> {
    /// Ex-ante probability that the incumbent fights the early entrant.
    pub fn fight_probability(&self) -> S {
        self.p0.clone() + (S::one() - self.p0.clone()) * self.q_a.selected.clone()
    }

    pub fn game_spec(&self) -> GameSpec<S> {
        GameSpec {
            protocol: self.protocol,
            p0: self.p0.clone(),
            pi: self.pi.clone(),
            noise: self.noise.clone(),
            payoffs: self.payoffs.clone(),
        }
    }

    /// Strategy profile with the early entrant's decision as reported.
    pub fn profile(&self) -> StrategyProfile<S> {
        StrategyProfile {
            q_a: self.q_a.selected.clone(),
            q_b: self.q_b.clone(),
            entry_a: if self.entrant_a_enters {
                S::one()
            } else {
                S::zero()
            },
            entry_b: self.response_b.clone(),
        }
    }

    /// Same profile, with the early entrant forced in (the information set
    /// where the incumbent acts in period 1).
    pub fn profile_given_entry(&self) -> StrategyProfile<S> {
        let mut p = self.profile();
        p.entry_a = S::one();
        if self.protocol == Protocol::Simultaneous {
            p.entry_b = self.response_b.clone();
        }
        p
    }

    /// Replaces the selected fight probability inside a boundary-mixing
    /// interval and recomputes the statistics.
    pub fn with_selection(&self, q: S) -> Result<Self> {
        let Some((lo, hi)) = &self.q_a.interval else {
            return Err(Error::InvalidArgument(
                "only boundary-mixing outcomes have a selectable fight probability".into(),
            ));
        };
        if q < *lo || q >= *hi {
            return Err(Error::InvalidArgument(format!(
                "selection {q} outside [{lo}, {hi})"
            )));
        }
        let mut out = self.clone();
        out.q_a.selected = q;
        let p0 = Probability::new(out.p0.clone())?;
        let post = posterior_after_fight(&p0, &Probability::new(out.q_a.selected.clone())?);
        out.beliefs_b.insert(Observation::FightSignal, post.value().clone());
        out.entrant_a_enters = out.thresholds.enters(&out.fight_probability());
        out.refresh_enumerated();
        Ok(out)
    }

    pub(crate) fn refresh_enumerated(&mut self) {
        let dist = enumerate_outcomes(&self.game_spec(), &self.profile_given_entry());
        self.ex_ante_entry_b = dist.ex_ante_entry_b();
        self.strategic_payoff = dist
            .expected_incumbent_payoff(IncumbentType::Strategic)
            .unwrap_or_else(S::zero);
        self.tough_payoff = dist
            .expected_incumbent_payoff(IncumbentType::Tough)
            .unwrap_or_else(S::zero);
    }

    /// Exact outcome tree under the reported assessment, with `E_A` forced in.
    pub fn enumerate(&self) -> OutcomeDistribution<S> {
        enumerate_outcomes(&self.game_spec(), &self.profile_given_entry())
    }
}

/// `lambda_A = pi + (1 - pi) 1{p0 <= phi}`.
pub fn lambda_accommodate<S: Scalar>(
    p0: &Probability<S>,
    pi: &Probability<S>,
    thresholds: &Thresholds<S>,
) -> Probability<S> {
    let pi = pi.value().clone();
    let revealed = thresholds.entry_indicator(posterior_after_accommodate::<S>().value());
    let v = pi.clone() * revealed + (S::one() - pi) * thresholds.entry_indicator(p0.value());
    Probability::new(v).expect("convex combination of indicators")
}

/// `lambda_F = (1 - pi) 1{p0 <= phi} + pi 1{p(F; q_a) <= phi}`.
pub fn lambda_fight<S: Scalar>(
    p0: &Probability<S>,
    pi: &Probability<S>,
    q_a: &Probability<S>,
    thresholds: &Thresholds<S>,
) -> Probability<S> {
    lambda_fight_with_response(p0, pi, q_a, thresholds, &S::one())
}

/// `lambda_F` where `E_B` enters with probability `knife_edge` when the fight
/// posterior sits exactly on the cutoff.
pub fn lambda_fight_with_response<S: Scalar>(
    p0: &Probability<S>,
    pi: &Probability<S>,
    q_a: &Probability<S>,
    thresholds: &Thresholds<S>,
    knife_edge: &S,
) -> Probability<S> {
    let post = posterior_after_fight(p0, q_a);
    let after_fight = response_to(thresholds, post.value(), knife_edge);
    let pi = pi.value().clone();
    let v = (S::one() - pi.clone()) * thresholds.entry_indicator(p0.value()) + pi * after_fight;
    Probability::new(v).expect("convex combination of entry probabilities")
}

/// `Delta lambda = lambda_A - lambda_F`.
pub fn delta_lambda<S: Scalar>(
    p0: &Probability<S>,
    pi: &Probability<S>,
    q_a: &Probability<S>,
    thresholds: &Thresholds<S>,
) -> Probability<S> {
    let la = lambda_accommodate(p0, pi, thresholds).into_inner();
    let lf = lambda_fight(p0, pi, q_a, thresholds).into_inner();
    Probability::new(la - lf).expect("fighting never raises later entry")
}

/// Closed form `pi * (1 - 1{p(F) <= phi})`.
pub fn delta_lambda_closed_form<S: Scalar>(
    p0: &Probability<S>,
    pi: &Probability<S>,
    q_a: &Probability<S>,
    thresholds: &Thresholds<S>,
) -> S {
    let post = posterior_after_fight(p0, q_a);
    pi.value().clone() * (S::one() - thresholds.entry_indicator(post.value()))
}

/// `(M - a) * delta_lambda - (a + c)`: positive means fighting is strictly
/// preferred.
pub fn incumbent_payoff_gap<S: Scalar>(delta_lambda: &S, payoffs: &Payoffs<S>) -> S {
    (payoffs.m.clone() - payoffs.a.clone()) * delta_lambda.clone()
        - (payoffs.a.clone() + payoffs.c.clone())
}

/// Entry probability of an entrant holding `belief` about a type that
/// accommodates for sure in her market.
pub(crate) fn response_to<S: Scalar>(thresholds: &Thresholds<S>, belief: &S, knife_edge: &S) -> S {
    if thresholds.at_cutoff(belief) {
        knife_edge.clone()
    } else {
        thresholds.entry_indicator(belief)
    }
}

/// Ex-ante `P(E_B enters)` as `pi_F lambda_F + pi_A lambda_A`.
pub fn closed_form_ex_ante_entry_b<S: Scalar>(outcome: &EquilibriumOutcome<S>) -> S {
    let pi_f = outcome.fight_probability();
    let pi_a = S::one() - pi_f.clone();
    pi_f * outcome.lambda_f.clone() + pi_a * outcome.lambda_a.clone()
}

/// Closed-form expected payoffs `(strategic, tough)` given that `E_A`
/// entered, from the continuation probabilities of a sequential outcome.
pub fn closed_form_payoffs<S: Scalar>(outcome: &EquilibriumOutcome<S>) -> (S, S) {
    let p = &outcome.payoffs;
    let stage = |lambda: &S, own_fight: &S| -> S {
        // Later market: out w.p. 1 - lambda (M); in w.p. lambda, where the
        // strategic type accommodates (a) and the tough type fights (-c).
        (S::one() - lambda.clone()) * p.m.clone()
            + lambda.clone()
                * (own_fight.clone() * (-p.c.clone())
                    + (S::one() - own_fight.clone()) * p.a.clone())
    };
    let zero = S::zero();
    let one = S::one();
    let q = outcome.q_a.selected.clone();
    let fight = -p.c.clone() + stage(&outcome.lambda_f, &zero);
    let accommodate = p.a.clone() + stage(&outcome.lambda_a, &zero);
    let strategic = q.clone() * fight + (one.clone() - q) * accommodate;
    let tough = -p.c.clone() + stage(&outcome.lambda_f, &one);
    (strategic, tough)
}

/// Equilibrium of the sequential protocol against a single early entrant.
pub fn solve_sequential<S: Scalar>(
    p0: &S,
    pi: &S,
    payoffs: &Payoffs<S>,
    opts: &SolveOptions,
) -> Result<EquilibriumOutcome<S>> {
    let p0p = Probability::interior_prior(p0.clone())?;
    let pip = Probability::named("pi", pi.clone())?;
    let thr = payoffs.thresholds().with_comparator(opts.cmp);
    let cmp = thr.cmp;
    let low_prior = thr.enters(p0);

    let (regime, q_a, knife_edge) = if !low_prior && cmp.ge(pi, &thr.delta) {
        (Regime::HighFight, FightChoice::point(S::one()), S::one())
    } else if cmp.lt(pi, &thr.delta) {
        (Regime::LowAccommodate, FightChoice::point(S::zero()), S::one())
    } else {
        let q_bar = crate::model::pooling_bound(&p0p, &thr.phi).min_of(S::one());
        if cmp.eq(pi, &thr.delta) {
            let selected = opts.select(&S::zero(), &q_bar);
            let choice = FightChoice {
                selected,
                interval: Some((S::zero(), q_bar)),
            };
            (Regime::BoundaryMix, choice, S::one())
        } else {
            let beta = S::one() - thr.delta.clone() / pi.clone();
            (Regime::InteriorMix, FightChoice::point(q_bar), beta)
        }
    };

    let q_ap = Probability::named("q_a", q_a.selected.clone())?;
    let post_f = posterior_after_fight(&p0p, &q_ap);
    let post_a = posterior_after_accommodate::<S>();
    let la = lambda_accommodate(&p0p, &pip, &thr).into_inner();
    let lf = lambda_fight_with_response(&p0p, &pip, &q_ap, &thr, &knife_edge).into_inner();
    let dl = la.clone() - lf.clone();

    let obs = [
        Observation::FightSignal,
        Observation::AccommodateSignal,
        Observation::NoSignal,
    ];
    let beliefs_b = ObservationMap::from_fn(&obs, |o| match o {
        Observation::FightSignal => post_f.value().clone(),
        Observation::AccommodateSignal => post_a.value().clone(),
        _ => p0.clone(),
    });
    let response_b = ObservationMap::from_fn(&obs, |o| match o {
        Observation::FightSignal => response_to(&thr, post_f.value(), &knife_edge),
        Observation::AccommodateSignal => response_to(&thr, post_a.value(), &S::one()),
        _ => thr.entry_indicator(p0),
    });

    let alpha_a = p0.clone() + (S::one() - p0.clone()) * q_a.selected.clone();
    let mut out = EquilibriumOutcome {
        protocol: Protocol::Sequential,
        regime,
        p0: p0.clone(),
        pi: pi.clone(),
        noise: None,
        q_a,
        q_b: S::zero(),
        beliefs_b,
        response_b,
        lambda_a: la,
        lambda_f: lf,
        payoff_gap: incumbent_payoff_gap(&dl, payoffs),
        delta_lambda: dl,
        ex_ante_entry_b: S::zero(),
        strategic_payoff: S::zero(),
        tough_payoff: S::zero(),
        entrant_a_enters: thr.enters(&alpha_a),
        thresholds: thr,
        payoffs: payoffs.clone(),
    };
    out.refresh_enumerated();
    Ok(out)
}

/// Equilibrium when both entrants arrive together: no pre-entry signal, so
/// the strategic type accommodates and each entrant compares `p0` with the
/// cutoff.
pub fn solve_simultaneous<S: Scalar>(
    p0: &S,
    payoffs: &Payoffs<S>,
    opts: &SolveOptions,
) -> Result<EquilibriumOutcome<S>> {
    Probability::interior_prior(p0.clone())?;
    let thr = payoffs.thresholds().with_comparator(opts.cmp);
    let enter = thr.entry_indicator(p0);
    let obs = [Observation::NoSignal];
    let mut out = EquilibriumOutcome {
        protocol: Protocol::Simultaneous,
        regime: Regime::Simultaneous,
        p0: p0.clone(),
        pi: S::zero(),
        noise: None,
        q_a: FightChoice::point(S::zero()),
        q_b: S::zero(),
        beliefs_b: ObservationMap::from_fn(&obs, |_| p0.clone()),
        response_b: ObservationMap::from_fn(&obs, |_| enter.clone()),
        lambda_a: enter.clone(),
        lambda_f: enter.clone(),
        delta_lambda: S::zero(),
        payoff_gap: incumbent_payoff_gap(&S::zero(), payoffs),
        ex_ante_entry_b: enter.clone(),
        strategic_payoff: S::zero(),
        tough_payoff: S::zero(),
        entrant_a_enters: thr.enters(p0),
        thresholds: thr,
        payoffs: payoffs.clone(),
    };
    // Payoffs aggregate over the entrants' actual decisions.
    let dist = enumerate_outcomes(&out.game_spec(), &out.profile());
    out.ex_ante_entry_b = dist.ex_ante_entry_b();
    out.strategic_payoff = dist
        .expected_incumbent_payoff(IncumbentType::Strategic)
        .unwrap_or_else(S::zero);
    out.tough_payoff = dist
        .expected_incumbent_payoff(IncumbentType::Tough)
        .unwrap_or_else(S::zero);
    Ok(out)
}

pub fn solve<S: Scalar>(
    protocol: Protocol,
    p0: &S,
    pi: &S,
    payoffs: &Payoffs<S>,
    opts: &SolveOptions,
) -> Result<EquilibriumOutcome<S>> {
    match protocol {
        Protocol::Sequential => solve_sequential(p0, pi, payoffs, opts),
        Protocol::Simultaneous => solve_simultaneous(p0, payoffs, opts),
    }
}

/// Evenly spaced points from `lo` to `hi` inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis<S> {
    pub lo: S,
    pub hi: S,
    pub n: usize,
}

impl<S: Scalar> Axis<S> {
    pub fn new(lo: S, hi: S, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "axis resolution must be at least 2, got {n}"
            )));
        }
        if lo > hi {
            return Err(Error::InvalidArgument(format!("axis bounds reversed: {lo} > {hi}")));
        }
        Ok(Self { lo, hi, n })
    }

    /// Prior axis avoiding the degenerate endpoints: `[0.01, 0.99]`.
    pub fn prior(n: usize) -> Result<Self> {
        Self::new(S::ratio(1, 100), S::ratio(99, 100), n)
    }

    /// Unit interval `[0, 1]`.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(S::zero(), S::one(), n)
    }

    pub fn point(&self, i: usize) -> S {
        let span = self.hi.clone() - self.lo.clone();
        self.lo.clone() + span * S::ratio(i as i64, (self.n - 1) as i64)
    }

    pub fn points(&self) -> Vec<S> {
        (0..self.n).map(|i| self.point(i)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct RegionRow<S> {
    pub p0: S,
    pub pi: S,
    pub regime: Regime,
    pub q_a: S,
    pub ex_ante_entry_b: S,
    pub fight_probability: S,
}

/// Solves the sequential game on every `(p0, pi)` grid point. Rows are in
/// lexicographic `(p0, pi)` order regardless of evaluation order.
pub fn region_sweep<S: Scalar>(
    p0_axis: &Axis<S>,
    pi_axis: &Axis<S>,
    payoffs: &Payoffs<S>,
    opts: &SolveOptions,
) -> Result<Vec<RegionRow<S>>> {
    let cells: Vec<(S, S)> = p0_axis
        .points()
        .into_iter()
        .flat_map(|p0| pi_axis.points().into_iter().map(move |pi| (p0.clone(), pi)))
        .collect();
    cells
        .par_iter()
        .map(|(p0, pi)| {
            let out = solve_sequential(p0, pi, payoffs, opts)?;
            Ok(RegionRow {
                p0: p0.clone(),
                pi: pi.clone(),
                regime: out.regime,
                q_a: out.q_a.selected.clone(),
                ex_ante_entry_b: out.ex_ante_entry_b.clone(),
                fight_probability: out.fight_probability(),
            })
        })
        .collect()
}

/// The `(p0, pi)` set on which the strategic type fights for sure:
/// `p0 > phi` and `pi >= Delta`.
pub fn in_high_fight_region<S: Scalar>(p0: &S, pi: &S, payoffs: &Payoffs<S>) -> bool {
    let phi = entry_cutoff(payoffs);
    let delta = crate::model::deterrence_threshold(payoffs);
    *p0 > *phi.value() && *pi >= delta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn prob(x: f64) -> Probability<f64> {
        Probability::new(x).unwrap()
    }

    fn thr() -> Thresholds<f64> {
        Payoffs::<f64>::calibration().thresholds()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn lambda_accommodate_examples() {
        let t = thr();
        assert!(close(*lambda_accommodate(&prob(0.6), &prob(0.8), &t).value(), 0.8));
        assert!(close(*lambda_accommodate(&prob(0.3), &prob(0.5), &t).value(), 1.0));
        assert!(close(*lambda_accommodate(&prob(0.3), &prob(0.0), &t).value(), 1.0));
    }

    #[test]
    fn lambda_fight_examples() {
        let t = thr();
        assert!(close(*lambda_fight(&prob(0.6), &prob(0.8), &prob(1.0), &t).value(), 0.0));
        assert!(close(*lambda_fight(&prob(0.3), &prob(0.5), &prob(0.0), &t).value(), 0.5));
        assert!(close(*lambda_fight(&prob(0.3), &prob(0.0), &prob(0.9), &t).value(), 1.0));
    }

    #[test]
    fn delta_lambda_examples() {
        let t = thr();
        assert!(close(*delta_lambda(&prob(0.6), &prob(0.8), &prob(1.0), &t).value(), 0.8));
        // p(F) = 0.3 / (0.3 + 0.7) <= phi: fighting does not move entry.
        assert!(close(*delta_lambda(&prob(0.3), &prob(0.8), &prob(1.0), &t).value(), 0.0));
        for (p0, q) in [(0.2, 0.0), (0.7, 0.4), (0.5, 1.0)] {
            assert_eq!(*delta_lambda(&prob(p0), &prob(0.0), &prob(q), &t).value(), 0.0);
        }
    }

    #[test]
    fn payoff_gap_examples() {
        let p = Payoffs::<f64>::calibration();
        assert!(close(incumbent_payoff_gap(&0.8, &p), 0.06));
        let exact = Payoffs::<Rational>::calibration();
        let delta = crate::model::deterrence_threshold(&exact);
        assert_eq!(incumbent_payoff_gap(&delta, &exact), Rational::ratio(0, 1));
        assert!(close(incumbent_payoff_gap(&0.0, &p), -0.5));
    }

    fn solve_f(p0: f64, pi: f64) -> EquilibriumOutcome<f64> {
        solve_sequential(&p0, &pi, &Payoffs::calibration(), &SolveOptions::default()).unwrap()
    }

    #[test]
    fn high_prior_high_spillover_fights() {
        let out = solve_f(0.6, 0.8);
        assert_eq!(out.regime, Regime::HighFight);
        assert_eq!(out.q_a.selected, 1.0);
        assert!(close(out.ex_ante_entry_b, 0.0));
        assert_eq!(out.q_b, 0.0);
    }

    #[test]
    fn low_spillover_accommodates() {
        let out = solve_f(0.6, 0.5);
        assert_eq!(out.regime, Regime::LowAccommodate);
        assert!(close(out.ex_ante_entry_b, 0.2));
        let out = solve_f(0.3, 0.5);
        assert_eq!(out.regime, Regime::LowAccommodate);
        assert!(close(out.ex_ante_entry_b, 0.85));
    }

    #[test]
    fn boundary_mix_reports_interval() {
        let p = Payoffs::<Rational>::calibration();
        let out = solve_sequential(
            &Rational::ratio(3, 10),
            &Rational::ratio(5, 7),
            &p,
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(out.regime, Regime::BoundaryMix);
        let (lo, hi) = out.q_a.interval.clone().unwrap();
        assert_eq!(lo, Rational::ratio(0, 1));
        assert_eq!(hi, Rational::ratio(3, 7));
        assert_eq!(out.q_a.selected, Rational::ratio(3, 14));
    }

    #[test]
    fn low_prior_high_spillover_mixes_on_both_sides() {
        let p = Payoffs::<Rational>::calibration();
        let pi = Rational::ratio(19, 20);
        let out =
            solve_sequential(&Rational::ratio(3, 10), &pi, &p, &SolveOptions::default()).unwrap();
        assert_eq!(out.regime, Regime::InteriorMix);
        assert_eq!(out.q_a.selected, Rational::ratio(3, 7));
        // E_B enters after a fight with probability 1 - Delta / pi.
        let beta = Rational::ratio(1, 1) - Rational::ratio(5, 7) / pi;
        assert_eq!(
            out.response_b.get(Observation::FightSignal).unwrap().clone(),
            beta
        );
        assert_eq!(out.payoff_gap, Rational::ratio(0, 1));
    }

    #[test]
    fn degenerate_prior_is_rejected() {
        let p = Payoffs::<f64>::calibration();
        let o = SolveOptions::default();
        assert!(matches!(
            solve_sequential(&0.0, &0.5, &p, &o),
            Err(Error::DegeneratePrior(_))
        ));
        assert!(solve_sequential(&1.0, &0.5, &p, &o).is_err());
        assert!(solve_simultaneous(&1.0, &p, &o).is_err());
        assert!(solve_sequential(&0.5, &1.5, &p, &o).is_err());
    }

    #[test]
    fn simultaneous_examples() {
        let p = Payoffs::<f64>::calibration();
        let o = SolveOptions::default();
        let low = solve_simultaneous(&0.3, &p, &o).unwrap();
        assert!(low.entrant_a_enters);
        assert!(close(low.ex_ante_entry_b, 1.0));
        assert!(close(low.strategic_payoff, 0.6));
        assert!(close(low.tough_payoff, -0.4));
        let high = solve_simultaneous(&0.6, &p, &o).unwrap();
        assert!(!high.entrant_a_enters);
        assert!(close(high.strategic_payoff, 2.0));
        assert!(close(high.tough_payoff, 2.0));
        let edge = solve_simultaneous(&0.5, &p, &o).unwrap();
        assert!(edge.entrant_a_enters);
        assert!(close(edge.ex_ante_entry_b, 1.0));
    }

    #[test]
    fn corner_grid_has_one_high_fight_cell() {
        let p = Payoffs::<f64>::calibration();
        let rows = region_sweep(
            &Axis::new(0.25, 0.75, 2).unwrap(),
            &Axis::new(0.25, 0.9, 2).unwrap(),
            &p,
            &SolveOptions::default(),
        )
        .unwrap();
        let hits: Vec<_> = rows
            .iter()
            .filter(|r| r.regime == Regime::HighFight)
            .map(|r| (r.p0, r.pi))
            .collect();
        assert_eq!(hits, vec![(0.75, 0.9)]);
    }

    #[test]
    fn expensive_fighting_empties_high_region() {
        // Delta = (0.5 + 0.6) / (1 - 0.5) = 2.2
        let p = Payoffs::new(1.0, 0.5, 0.6, 1.0, 1.0).unwrap();
        let rows = region_sweep(
            &Axis::prior(11).unwrap(),
            &Axis::unit(11).unwrap(),
            &p,
            &SolveOptions::default(),
        )
        .unwrap();
        assert!(rows.iter().all(|r| r.regime != Regime::HighFight));
    }

    #[test]
    fn axis_rejects_single_point() {
        assert!(Axis::<f64>::unit(1).is_err());
    }
}
