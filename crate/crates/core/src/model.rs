//! Stage-game primitives, cutoffs, fight beliefs and Bayesian posteriors.
//!
//! The incumbent is tough (always fights) with prior probability `p0` and
//! strategic otherwise. An entrant facing fight belief `alpha` earns
//! `v - (v + d) * alpha` from entering, so she enters iff `alpha <= phi` with
//! `phi = v / (v + d)`. The strategic incumbent gains `M - a` per deterred
//! later entrant and pays `a + c` for fighting today, which gives the
//! deterrence threshold `Delta = (a + c) / (M - a)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Comparator, Scalar};

/// The five stage-game parameters. `c` and `d` are stored positive; the
/// corresponding payoffs are `-c` and `-d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Payoffs<S> {
    /// Monopoly payoff per market-period.
    pub m: S,
    /// Incumbent payoff when accommodating.
    pub a: S,
    /// Incumbent cost of fighting.
    pub c: S,
    /// Entrant loss when fought.
    pub d: S,
    /// Entrant gain when accommodated.
    pub v: S,
}

impl<S: Scalar> Payoffs<S> {
    pub fn new(m: S, a: S, c: S, d: S, v: S) -> Result<Self> {
        let zero = S::zero();
        for (name, x) in [("M", &m), ("a", &a), ("c", &c), ("d", &d), ("v", &v)] {
            if !x.is_finite() {
                return Err(Error::InvalidPayoffs(format!("{name} is not finite")));
            }
        }
        if !(m > a && a > zero) {
            return Err(Error::InvalidPayoffs(format!(
                "need M > a > 0, got M = {m}, a = {a}"
            )));
        }
        for (name, x) in [("c", &c), ("d", &d), ("v", &v)] {
            if *x <= zero {
                return Err(Error::InvalidPayoffs(format!("{name} must be > 0, got {x}")));
            }
        }
        Ok(Self { m, a, c, d, v })
    }

    /// M = 1, a = 0.30, c = 0.20, v = 1, d = 1.
    pub fn calibration() -> Self {
        Self::new(
            S::one(),
            S::ratio(3, 10),
            S::ratio(2, 10),
            S::one(),
            S::one(),
        )
        .expect("calibration payoffs are valid")
    }

    pub fn thresholds(&self) -> Thresholds<S> {
        Thresholds::new(self)
    }
}

/// A value validated to lie in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, PartialOrd)]
pub struct Probability<S>(S);

impl<S: Scalar> Probability<S> {
    pub fn new(value: S) -> Result<Self> {
        Self::named("probability", value)
    }

    /// Validates with a field name for the error message.
    pub fn named(name: &'static str, value: S) -> Result<Self> {
        if value.is_finite() && value >= S::zero() && value <= S::one() {
            Ok(Self(value))
        } else {
            Err(Error::InvalidProbability {
                name,
                value: value.to_f64(),
            })
        }
    }

    pub fn zero() -> Self {
        Self(S::zero())
    }

    pub fn one() -> Self {
        Self(S::one())
    }

    pub fn value(&self) -> &S {
        &self.0
    }

    pub fn into_inner(self) -> S {
        self.0
    }

    pub fn complement(&self) -> Self {
        Self(S::one() - self.0.clone())
    }

    /// Rejects the degenerate priors 0 and 1.
    pub fn interior_prior(value: S) -> Result<Self> {
        let p = Self::named("p0", value)?;
        if p.0 == S::zero() || p.0 == S::one() {
            return Err(Error::DegeneratePrior(p.0.to_f64()));
        }
        Ok(p)
    }
}

impl<S: Scalar> std::fmt::Display for Probability<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Display::fmt(&self.0, f)
    }
}

/// Entry cutoff and deterrence threshold, plus the comparator used to test
/// values against them.
#[derive(Debug, Clone, PartialEq)]
pub struct Thresholds<S> {
    pub phi: Probability<S>,
    /// May exceed one, in which case no spillover level makes fighting pay.
    pub delta: S,
    pub cmp: Comparator,
}

impl<S: Scalar> Thresholds<S> {
    pub fn new(payoffs: &Payoffs<S>) -> Self {
        Self {
            phi: entry_cutoff(payoffs),
            delta: deterrence_threshold(payoffs),
            cmp: Comparator::default(),
        }
    }

    pub fn with_comparator(mut self, cmp: Comparator) -> Self {
        self.cmp = cmp;
        self
    }

    /// Cutoff rule: enter iff `belief <= phi` (weak at the knife edge).
    pub fn enters(&self, belief: &S) -> bool {
        self.cmp.le(belief, self.phi.value())
    }

    pub fn at_cutoff(&self, belief: &S) -> bool {
        self.cmp.eq(belief, self.phi.value())
    }

    /// `1{belief <= phi}` as a scalar.
    pub fn entry_indicator(&self, belief: &S) -> S {
        if self.enters(belief) {
            S::one()
        } else {
            S::zero()
        }
    }

    /// Whether an entry reduction meets the deterrence threshold.
    pub fn deters(&self, delta_lambda: &S) -> bool {
        self.cmp.ge(delta_lambda, &self.delta)
    }
}

/// What the later entrant observed before forming her posterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observation {
    FightSignal,
    AccommodateSignal,
    NoSignal,
    NoisyFightReport,
    NoisyAccommodateReport,
}

impl Observation {
    pub fn label(&self) -> &'static str {
        match self {
            Observation::FightSignal => "fight-signal",
            Observation::AccommodateSignal => "accommodate-signal",
            Observation::NoSignal => "no-signal",
            Observation::NoisyFightReport => "noisy-fight-report",
            Observation::NoisyAccommodateReport => "noisy-accommodate-report",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Posterior<S> {
    pub value: Probability<S>,
    pub conditioning: Observation,
}

impl<S: Scalar> Posterior<S> {
    pub fn value(&self) -> &S {
        self.value.value()
    }
}

/// `phi = v / (v + d)`.
pub fn entry_cutoff<S: Scalar>(payoffs: &Payoffs<S>) -> Probability<S> {
    let v = payoffs.v.clone();
    Probability(v.clone() / (v + payoffs.d.clone()))
}

/// `Delta = (a + c) / (M - a)`.
pub fn deterrence_threshold<S: Scalar>(payoffs: &Payoffs<S>) -> S {
    (payoffs.a.clone() + payoffs.c.clone()) / (payoffs.m.clone() - payoffs.a.clone())
}

/// Entrant's expected payoff from entering under fight belief `alpha`.
pub fn entrant_value<S: Scalar>(alpha: &Probability<S>, payoffs: &Payoffs<S>) -> S {
    payoffs.v.clone() - (payoffs.v.clone() + payoffs.d.clone()) * alpha.value().clone()
}

/// `alpha = p + (1 - p) q`.
pub fn fight_belief<S: Scalar>(p: &Probability<S>, q: &Probability<S>) -> Probability<S> {
    let p = p.value().clone();
    Probability(p.clone() + (S::one() - p) * q.value().clone())
}

/// Reputation after a fight is seen, given the strategic type fights with
/// probability `q_a`. Pooling (`q_a = 1`) leaves the prior unchanged and
/// `q_a = 0` makes a fight fully revealing.
pub fn posterior_after_fight<S: Scalar>(p0: &Probability<S>, q_a: &Probability<S>) -> Posterior<S> {
    let p = p0.value().clone();
    let q = q_a.value().clone();
    let value = if q == S::one() {
        p
    } else if q == S::zero() {
        if p == S::zero() {
            S::zero()
        } else {
            S::one()
        }
    } else {
        p.clone() / (p.clone() + (S::one() - p) * q)
    };
    Posterior {
        value: Probability(value),
        conditioning: Observation::FightSignal,
    }
}

/// The tough type never accommodates, so an accommodation reveals the
/// strategic type.
pub fn posterior_after_accommodate<S: Scalar>() -> Posterior<S> {
    Posterior {
        value: Probability::zero(),
        conditioning: Observation::AccommodateSignal,
    }
}

pub fn posterior_no_signal<S: Scalar>(p0: &Probability<S>) -> Posterior<S> {
    Posterior {
        value: p0.clone(),
        conditioning: Observation::NoSignal,
    }
}

/// Smallest strategic fight probability at which a fight signal stops
/// keeping the posterior above the cutoff: solves `p(F; q) = phi`, i.e.
/// `q = p0 (1 - phi) / ((1 - p0) phi)`. Values above one mean the posterior
/// never falls to the cutoff.
pub fn pooling_bound<S: Scalar>(p0: &Probability<S>, phi: &Probability<S>) -> S {
    let p = p0.value().clone();
    let f = phi.value().clone();
    p.clone() * (S::one() - f.clone()) / ((S::one() - p) * f)
}
