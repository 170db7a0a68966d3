//! N markets entered one per period over T periods.
//!
//! Each contested period's action is delivered independently, with
//! probability `pi`, to every market whose entrant has not yet arrived.
//! Markets keep their own posterior because deliveries differ across them.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{Regime, SolveOptions};
use crate::error::{Error, Result};
use crate::model::{Payoffs, Probability, Thresholds};
use crate::noisy::{solve_fixed_point, GainScaling, NoiseSpec};
use crate::scalar::{Comparator, Scalar};
use crate::verifier::enumerate::Action;

/// A delivered action report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Report {
    Fight,
    Accommodate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryEvent {
    pub period: usize,
    pub market: usize,
    pub entered: bool,
    pub action: Option<Action>,
    /// `(market, report)` for every delivery of this period's action.
    pub deliveries: Vec<(usize, Report)>,
}

/// Information state of the N-market system at the start of a period.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarketSystemState {
    /// Next period to be played, starting at 1.
    pub t: usize,
    pub inactive_markets: BTreeSet<usize>,
    pub active_markets: BTreeSet<usize>,
    /// Posterior that the incumbent is tough, per market.
    pub posteriors: Vec<f64>,
    /// Entry probability of a market's entrant when her posterior sits on
    /// the cutoff, set by the policy that generated her latest report.
    pub knife_edge_entry: Vec<f64>,
    pub public_accommodation_seen: bool,
    pub history: Vec<HistoryEvent>,
}

impl MarketSystemState {
    pub fn new(n_markets: usize, p0: f64) -> Self {
        Self {
            t: 1,
            inactive_markets: (0..n_markets).collect(),
            active_markets: BTreeSet::new(),
            posteriors: vec![p0; n_markets],
            knife_edge_entry: vec![1.0; n_markets],
            public_accommodation_seen: false,
            history: Vec::new(),
        }
    }

    /// Moves `market` to the active set.
    pub fn activate(&mut self, market: usize) {
        self.inactive_markets.remove(&market);
        self.active_markets.insert(market);
    }
}

/// Strategic-type behavior in the N-market game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "r")]
pub enum IncumbentPolicy {
    /// Fight iff the scaled expected deterrence gain over the remaining
    /// inactive markets covers today's cost, mixing at indifference.
    Threshold,
    /// Accommodate with probability `r` each contested period.
    Constant(f64),
}

impl std::str::FromStr for IncumbentPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        if lower == "threshold" {
            return Ok(IncumbentPolicy::Threshold);
        }
        let inner = lower
            .strip_prefix("constant(")
            .and_then(|x| x.strip_suffix(')'))
            .or_else(|| lower.strip_prefix("constant:"));
        match inner.map(|x| x.trim().parse::<f64>()) {
            Some(Ok(r)) if (0.0..=1.0).contains(&r) => Ok(IncumbentPolicy::Constant(r)),
            _ => Err(Error::InvalidArgument(format!(
                "unknown policy `{s}` (expected `threshold` or `constant(r)` with r in [0, 1])"
            ))),
        }
    }
}

/// Policy output for one period.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyDecision {
    pub fight_probability: f64,
    /// Entry probability, after each report type, for later entrants whose
    /// updated posterior lands on the cutoff.
    pub knife_edge_after_fight: f64,
    pub knife_edge_after_accommodate: f64,
    pub regime: Option<Regime>,
}

impl IncumbentPolicy {
    /// Strategic fight probability for the period about to be played, given
    /// the markets that will still be inactive afterwards.
    pub fn decide(
        &self,
        state: &MarketSystemState,
        pi: f64,
        payoffs: &Payoffs<f64>,
        noise: &NoiseSpec<f64>,
        scaling: GainScaling,
        cmp: Comparator,
    ) -> Result<PolicyDecision> {
        match *self {
            IncumbentPolicy::Constant(r) => Ok(PolicyDecision {
                fight_probability: 1.0 - r,
                knife_edge_after_fight: 1.0,
                knife_edge_after_accommodate: 1.0,
                regime: None,
            }),
            IncumbentPolicy::Threshold => {
                if state.inactive_markets.is_empty() {
                    return Ok(PolicyDecision {
                        fight_probability: 0.0,
                        knife_edge_after_fight: 1.0,
                        knife_edge_after_accommodate: 1.0,
                        regime: Some(Regime::LowAccommodate),
                    });
                }
                let priors = state
                    .inactive_markets
                    .iter()
                    .map(|&m| Probability::new(state.posteriors[m].clamp(0.0, 1.0)))
                    .collect::<Result<Vec<_>>>()?;
                let thr = payoffs.thresholds().with_comparator(cmp);
                let fp = solve_fixed_point(
                    &priors,
                    &pi,
                    noise,
                    payoffs,
                    &thr,
                    scaling,
                    &SolveOptions {
                        cmp,
                        ..SolveOptions::default()
                    },
                )?;
                // Mixing entrants share one probability per report type.
                let pick = |f: fn(&crate::noisy::ReportResponse<f64>) -> f64| {
                    fp.responses
                        .iter()
                        .map(f)
                        .find(|x| *x > 0.0 && *x < 1.0)
                        .unwrap_or(1.0)
                };
                Ok(PolicyDecision {
                    fight_probability: fp.q_a.selected,
                    knife_edge_after_fight: pick(|r| r.after_fight_report),
                    knife_edge_after_accommodate: pick(|r| r.after_accommodate_report),
                    regime: Some(fp.regime),
                })
            }
        }
    }
}

/// `sum over inactive markets of pi * g_m`.
pub fn expected_deterrence_gain<S: Scalar>(
    state: &MarketSystemState,
    pi: &S,
    per_market_gains: &[S],
) -> Result<S> {
    if per_market_gains.len() != state.inactive_markets.len() {
        return Err(Error::InvalidArgument(format!(
            "expected {} per-market gains, got {}",
            state.inactive_markets.len(),
            per_market_gains.len()
        )));
    }
    Ok(per_market_gains
        .iter()
        .fold(S::zero(), |acc, g| acc + pi.clone() * g.clone()))
}

/// `(prod_{s <= t} (1 - pi r_s)^{|A_s|}, 1 - that)`: an upper bound on the
/// probability that no accommodation has been publicly observed by `t`, and
/// the matching lower bound on at least one.
pub fn hazard_bounds<S: Scalar>(
    accommodation_probs: &[S],
    active_counts: &[usize],
    pi: &S,
    t: usize,
) -> Result<(S, S)> {
    if accommodation_probs.len() < t || active_counts.len() < t {
        return Err(Error::InvalidArgument(format!(
            "need at least {t} periods of accommodation probabilities and active counts"
        )));
    }
    let mut upper = S::one();
    for s in 0..t {
        let factor = S::one() - pi.clone() * accommodation_probs[s].clone();
        upper = upper * factor.powi(active_counts[s] as u32);
    }
    let lower = S::one() - upper.clone();
    Ok((upper, lower))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "t")]
pub enum FrontloadIndex {
    /// `G_1 < 0`: fighting never pays.
    Never,
    /// Fighting pays in periods `1..=t` only.
    Through(usize),
    /// `G_t >= 0` in every period.
    Always(usize),
}

/// Last period at which the fight incentive `G_t` is nonnegative.
/// `gains[t - 1]` is the expected entry reduction `E[Delta Lambda_t]`.
pub fn frontload_index<S: Scalar>(
    gains: &[S],
    payoffs: &Payoffs<S>,
    scaling: GainScaling,
    cmp: &Comparator,
) -> Result<FrontloadIndex> {
    if gains.windows(2).any(|w| cmp.gt(&w[1], &w[0])) {
        return Err(Error::InvalidArgument(
            "per-period gains must be weakly decreasing".into(),
        ));
    }
    let scale = match scaling {
        GainScaling::Payoff => payoffs.m.clone() - payoffs.a.clone(),
        GainScaling::Raw => S::one(),
    };
    let cost = payoffs.a.clone() + payoffs.c.clone();
    let last = gains
        .iter()
        .take_while(|g| cmp.ge(&(scale.clone() * (*g).clone()), &cost))
        .count();
    Ok(match last {
        0 => FrontloadIndex::Never,
        n if n == gains.len() => FrontloadIndex::Always(n),
        n => FrontloadIndex::Through(n),
    })
}

/// Fight incentives `G_t = scale * gain - (a + c)`.
pub fn fight_incentives<S: Scalar>(
    gains: &[S],
    payoffs: &Payoffs<S>,
    scaling: GainScaling,
) -> Vec<S> {
    let scale = match scaling {
        GainScaling::Payoff => payoffs.m.clone() - payoffs.a.clone(),
        GainScaling::Raw => S::one(),
    };
    gains
        .iter()
        .map(|g| scale.clone() * g.clone() - payoffs.a.clone() - payoffs.c.clone())
        .collect()
}

/// How entrants decide whether to enter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryMode {
    /// The first entrant enters; later ones use the cutoff rule.
    #[default]
    ForcedFirst,
    /// Every entrant uses the cutoff rule.
    Cutoff,
    /// Every entrant enters.
    Always,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Market `t - 1` is entered in period `t`.
    #[default]
    InOrder,
    /// A seeded random permutation per replication.
    Shuffled,
}

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub n_markets: usize,
    pub t_periods: usize,
    pub p0: f64,
    pub pi: f64,
    pub payoffs: Payoffs<f64>,
    pub policy: IncumbentPolicy,
    pub noise: Option<NoiseSpec<f64>>,
    pub replications: usize,
    pub seed: u64,
    pub entry_mode: EntryMode,
    pub schedule: Schedule,
    pub scaling: GainScaling,
    pub cmp: Comparator,
}

impl SimulationConfig {
    pub fn new(
        n_markets: usize,
        t_periods: usize,
        p0: f64,
        pi: f64,
        payoffs: Payoffs<f64>,
        policy: IncumbentPolicy,
    ) -> Self {
        Self {
            n_markets,
            t_periods,
            p0,
            pi,
            payoffs,
            policy,
            noise: None,
            replications: 10_000,
            seed: 0,
            entry_mode: EntryMode::default(),
            schedule: Schedule::default(),
            scaling: GainScaling::default(),
            cmp: Comparator::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_markets < 2 || self.t_periods < 2 {
            return Err(Error::InvalidArgument(format!(
                "need N >= 2 and T >= 2, got N = {}, T = {}",
                self.n_markets, self.t_periods
            )));
        }
        if self.t_periods > self.n_markets {
            return Err(Error::InvalidArgument(format!(
                "schedule assigns {} periods to distinct markets but only {} exist",
                self.t_periods, self.n_markets
            )));
        }
        if self.replications == 0 {
            return Err(Error::InvalidArgument("replications must be >= 1".into()));
        }
        Probability::interior_prior(self.p0)?;
        Probability::named("pi", self.pi)?;
        if let IncumbentPolicy::Constant(r) = self.policy {
            Probability::named("r", r)?;
        }
        Ok(())
    }
}

/// Mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
}

impl Estimate {
    fn from_samples(xs: impl Iterator<Item = f64>) -> Self {
        // Welford accumulation in a fixed order.
        let (mut n, mut mean, mut m2) = (0usize, 0.0f64, 0.0f64);
        for x in xs {
            n += 1;
            let d = x - mean;
            mean += d / n as f64;
            m2 += d * (x - mean);
        }
        let std_error = if n > 1 {
            (m2 / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean: if n == 0 { f64::NAN } else { mean },
            std_error,
            count: n,
        }
    }

    /// Normal-approximation 95% interval.
    pub fn interval(&self) -> (f64, f64) {
        let h = 1.96 * self.std_error;
        (self.mean - h, self.mean + h)
    }

    /// Whether `value` lies within `k` standard errors of the mean; exact
    /// agreement is required when the sample has no spread.
    pub fn covers(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error + 1e-12
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PeriodStats {
    pub period: usize,
    /// Entry frequency of this period's entrant.
    pub entry: Estimate,
    /// Fight frequency among contested periods (both types).
    pub fight: Estimate,
    /// Fight frequency of the strategic type among contested periods.
    pub strategic_fight: Estimate,
    /// Mean policy fight probability of the strategic type.
    pub strategic_fight_probability: Estimate,
    /// Strategic replications with no public accommodation by the end of
    /// this period.
    pub no_public_accommodation: Estimate,
    /// Upper bound on the same probability from the policy's accommodation
    /// rate, when it is constant.
    pub hazard_upper_bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationStats {
    pub replications: usize,
    pub seed: u64,
    pub periods: Vec<PeriodStats>,
    pub incumbent_payoff: Estimate,
    pub strategic_payoff: Estimate,
    /// Strategic replications whose first public accommodation happened,
    /// by period (index 0 is period 1).
    pub first_public_accommodation: Vec<usize>,
    /// Replications in which the policy's fight probability rose before the
    /// first public accommodation.
    pub frontloading_violations: usize,
}

#[derive(Debug, Clone)]
struct Replication {
    tough: bool,
    entered: Vec<bool>,
    fought: Vec<Option<bool>>,
    policy_q: Vec<f64>,
    public_by: Vec<bool>,
    payoff: f64,
    first_public: Option<usize>,
    frontload_ok: bool,
}

fn update_belief(prior: f64, p_tough: f64, p_strategic: f64) -> f64 {
    let num = prior * p_tough;
    let den = num + (1.0 - prior) * p_strategic;
    if den <= 0.0 {
        prior
    } else {
        num / den
    }
}

fn run_replication(
    cfg: &SimulationConfig,
    noise: &NoiseSpec<f64>,
    thr: &Thresholds<f64>,
    rep: usize,
) -> Result<Replication> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(rep as u64);
    let tough = rng.random::<f64>() < cfg.p0;
    let mut order: Vec<usize> = (0..cfg.n_markets).collect();
    if cfg.schedule == Schedule::Shuffled {
        order.shuffle(&mut rng);
    }
    let mut state = MarketSystemState::new(cfg.n_markets, cfg.p0);
    let mut out = Replication {
        tough,
        entered: Vec::with_capacity(cfg.t_periods),
        fought: Vec::with_capacity(cfg.t_periods),
        policy_q: Vec::with_capacity(cfg.t_periods),
        public_by: Vec::with_capacity(cfg.t_periods),
        payoff: 0.0,
        first_public: None,
        frontload_ok: true,
    };
    let p = &cfg.payoffs;
    for t in 1..=cfg.t_periods {
        let market = order[t - 1];
        state.t = t;
        state.activate(market);
        let decision =
            cfg.policy
                .decide(&state, cfg.pi, p, noise, cfg.scaling, cfg.cmp)?;
        let q = decision.fight_probability;
        if !state.public_accommodation_seen {
            if let Some(prev) = out.policy_q.last() {
                if q > prev + 1e-12 {
                    out.frontload_ok = false;
                }
            }
        }
        out.policy_q.push(q);

        let rho = state.posteriors[market];
        let enters = match cfg.entry_mode {
            EntryMode::Always => true,
            EntryMode::ForcedFirst if t == 1 => true,
            _ => {
                let alpha = rho + (1.0 - rho) * q;
                if thr.at_cutoff(&alpha) {
                    rng.random::<f64>() < state.knife_edge_entry[market]
                } else {
                    thr.enters(&alpha)
                }
            }
        };
        out.entered.push(enters);
        let mut event = HistoryEvent {
            period: t,
            market,
            entered: enters,
            action: None,
            deliveries: Vec::new(),
        };
        if !enters {
            out.fought.push(None);
            out.payoff += p.m;
        } else {
            let fight = tough || rng.random::<f64>() < q;
            out.fought.push(Some(fight));
            out.payoff += if fight { -p.c } else { p.a };
            event.action = Some(if fight { Action::Fight } else { Action::Accommodate });
            let audience: Vec<usize> = state.inactive_markets.iter().copied().collect();
            for m in audience {
                if rng.random::<f64>() >= cfg.pi {
                    continue;
                }
                let flip = if fight { noise.eps_f } else { noise.eps_a };
                let report = match (fight, rng.random::<f64>() < flip) {
                    (true, false) | (false, true) => Report::Fight,
                    _ => Report::Accommodate,
                };
                let (pt, ps, knife) = match report {
                    Report::Fight => (
                        1.0 - noise.eps_f,
                        q * (1.0 - noise.eps_f) + (1.0 - q) * noise.eps_a,
                        decision.knife_edge_after_fight,
                    ),
                    Report::Accommodate => (
                        noise.eps_f,
                        q * noise.eps_f + (1.0 - q) * (1.0 - noise.eps_a),
                        decision.knife_edge_after_accommodate,
                    ),
                };
                state.posteriors[m] = update_belief(state.posteriors[m], pt, ps);
                state.knife_edge_entry[m] = knife;
                event.deliveries.push((m, report));
            }
            if !fight && !event.deliveries.is_empty() && !state.public_accommodation_seen {
                state.public_accommodation_seen = true;
                out.first_public = Some(t);
            }
        }
        out.public_by.push(state.public_accommodation_seen);
        state.history.push(event);
    }
    Ok(out)
}

/// Monte Carlo over `replications` independent games. Replication `i` uses
/// ChaCha8 seeded with `seed` on stream `i`, so results do not depend on
/// thread scheduling.
pub fn simulate(cfg: &SimulationConfig) -> Result<SimulationStats> {
    cfg.validate()?;
    let noise = cfg.noise.clone().unwrap_or_else(NoiseSpec::noiseless);
    let thr = cfg.payoffs.thresholds().with_comparator(cfg.cmp);
    let reps: Vec<Replication> = (0..cfg.replications)
        .into_par_iter()
        .map(|i| run_replication(cfg, &noise, &thr, i))
        .collect::<Result<_>>()?;

    let t_max = cfg.t_periods;
    let hazard_rate = match cfg.policy {
        IncumbentPolicy::Constant(r) => Some(r),
        IncumbentPolicy::Threshold => None,
    };
    let periods = (0..t_max)
        .map(|s| {
            let contested = || reps.iter().filter_map(|r| r.fought[s].map(|f| (r, f)));
            let strategic = || reps.iter().filter(|r| !r.tough);
            let bound = hazard_rate.map(|r| {
                // One contested market per period; a period only counts if
                // some market can still receive its signal.
                let counts: Vec<usize> = (0..=s)
                    .map(|u| usize::from(cfg.n_markets > u + 1))
                    .collect();
                let rs = vec![r; s + 1];
                hazard_bounds(&rs, &counts, &cfg.pi, s + 1)
                    .expect("lengths match")
                    .0
            });
            PeriodStats {
                period: s + 1,
                entry: Estimate::from_samples(reps.iter().map(|r| f64::from(r.entered[s] as u8))),
                fight: Estimate::from_samples(contested().map(|(_, f)| f64::from(f as u8))),
                strategic_fight: Estimate::from_samples(
                    contested()
                        .filter(|(r, _)| !r.tough)
                        .map(|(_, f)| f64::from(f as u8)),
                ),
                strategic_fight_probability: Estimate::from_samples(
                    strategic().map(|r| r.policy_q[s]),
                ),
                no_public_accommodation: Estimate::from_samples(
                    strategic().map(|r| f64::from(!r.public_by[s] as u8)),
                ),
                hazard_upper_bound: bound,
            }
        })
        .collect();

    let mut first = vec![0usize; t_max];
    for r in reps.iter().filter(|r| !r.tough) {
        if let Some(t) = r.first_public {
            first[t - 1] += 1;
        }
    }
    Ok(SimulationStats {
        replications: cfg.replications,
        seed: cfg.seed,
        periods,
        incumbent_payoff: Estimate::from_samples(reps.iter().map(|r| r.payoff)),
        strategic_payoff: Estimate::from_samples(
            reps.iter().filter(|r| !r.tough).map(|r| r.payoff),
        ),
        first_public_accommodation: first,
        frontloading_violations: reps.iter().filter(|r| !r.frontload_ok).count(),
    })
}
