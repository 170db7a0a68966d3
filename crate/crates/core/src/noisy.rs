//! Noisy cross-market reports.
//!
//! When the period-1 action reaches the later market, it arrives as a
//! report `F^` or `A^`. A fight is misreported as `A^` with probability
//! `eps_f` and an accommodation as `F^` with probability `eps_a`. The later
//! entrant updates on the report, so her response after each report depends
//! on the strategic fight probability `q_a` through the two posteriors.
//!
//! Continuation probabilities are computed by conditioning on the true
//! action and summing over reports:
//!
//! ```text
//! lambda_A = (1 - pi) e(p0) + pi [(1 - eps_a) e(p(A^)) + eps_a e(p(F^))]
//! lambda_F = (1 - pi) e(p0) + pi [(1 - eps_f) e(p(F^)) + eps_f e(p(A^))]
//! ```
//!
//! with `e(p)` the later entrant's entry probability at posterior `p`.

use serde::{Deserialize, Serialize};

use crate::equilibrium::{
    incumbent_payoff_gap, response_to, EquilibriumOutcome, FightChoice, Protocol, Regime,
    SolveOptions,
};
use crate::error::{Error, Result};
use crate::model::{Observation, Payoffs, Posterior, Probability, Thresholds};
use crate::scalar::Scalar;
use crate::verifier::enumerate::ObservationMap;

/// Report error rates; both must lie in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec<S> {
    /// `P(report A^ | action F, arrival)`.
    pub eps_f: S,
    /// `P(report F^ | action A, arrival)`.
    pub eps_a: S,
}

impl<S: Scalar> NoiseSpec<S> {
    pub fn new(eps_f: S, eps_a: S) -> Result<Self> {
        for (name, x) in [("eps_f", &eps_f), ("eps_a", &eps_a)] {
            if !x.is_finite() || *x < S::zero() || *x >= S::one() {
                return Err(Error::InvalidErrorRate {
                    name,
                    value: x.to_f64(),
                });
            }
        }
        Ok(Self { eps_f, eps_a })
    }

    pub fn noiseless() -> Self {
        Self {
            eps_f: S::zero(),
            eps_a: S::zero(),
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.eps_f == S::zero() && self.eps_a == S::zero()
    }

    /// `1 - eps_f - eps_a`: how much more likely `F^` is after a fight than
    /// after an accommodation.
    pub fn informativeness(&self) -> S {
        S::one() - self.eps_f.clone() - self.eps_a.clone()
    }
}

/// Report probabilities (given arrival) and the posteriors they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyPosteriors<S> {
    pub prob_fight_report: S,
    pub prob_accommodate_report: S,
    pub after_fight_report: Posterior<S>,
    /// `None` when `A^` has zero probability (`eps_f = 0` and `q_a = 1`).
    pub after_accommodate_report: Option<Posterior<S>>,
}

impl<S: Scalar> NoisyPosteriors<S> {
    /// Posterior after `A^`, using 0 when the report cannot occur (only the
    /// strategic type could ever send it).
    pub fn accommodate_or_convention(&self) -> S {
        self.after_accommodate_report
            .as_ref()
            .map(|p| p.value().clone())
            .unwrap_or_else(S::zero)
    }
}

fn make_posterior<S: Scalar>(value: S, obs: Observation) -> Posterior<S> {
    Posterior {
        value: Probability::new(value).expect("Bayes ratio lies in [0, 1]"),
        conditioning: obs,
    }
}

/// Report distribution and posteriors for fight probability `q_a`.
pub fn report_posteriors<S: Scalar>(
    p0: &Probability<S>,
    q_a: &Probability<S>,
    noise: &NoiseSpec<S>,
) -> NoisyPosteriors<S> {
    let one = S::one();
    let p = p0.value().clone();
    let q = q_a.value().clone();
    let (ef, ea) = (noise.eps_f.clone(), noise.eps_a.clone());
    let strat = one.clone() - p.clone();

    let tough_f = p.clone() * (one.clone() - ef.clone());
    let strat_f = strat.clone()
        * (q.clone() * (one.clone() - ef.clone()) + (one.clone() - q.clone()) * ea.clone());
    let tough_a = p.clone() * ef.clone();
    let strat_a =
        strat * (q.clone() * ef + (one.clone() - q) * (one.clone() - ea));

    let prob_f = tough_f.clone() + strat_f;
    let prob_a = tough_a.clone() + strat_a;
    // A fight report is impossible only when the tough type has no mass.
    let after_f = if prob_f == S::zero() {
        make_posterior(p, Observation::NoisyFightReport)
    } else {
        make_posterior(tough_f / prob_f.clone(), Observation::NoisyFightReport)
    };
    let after_a = if prob_a == S::zero() {
        None
    } else {
        Some(make_posterior(
            tough_a / prob_a.clone(),
            Observation::NoisyAccommodateReport,
        ))
    };
    NoisyPosteriors {
        prob_fight_report: prob_f,
        prob_accommodate_report: prob_a,
        after_fight_report: after_f,
        after_accommodate_report: after_a,
    }
}

/// `(p(F^), p(A^))`. Fails with `UndefinedPosterior` when a report has zero
/// probability.
pub fn noisy_posteriors<S: Scalar>(
    p0: &Probability<S>,
    q_a: &Probability<S>,
    noise: &NoiseSpec<S>,
) -> Result<(Posterior<S>, Posterior<S>)> {
    let r = report_posteriors(p0, q_a, noise);
    match r.after_accommodate_report {
        Some(a) => Ok((r.after_fight_report, a)),
        None => Err(Error::UndefinedPosterior("noisy accommodate")),
    }
}

/// Later entrant's behavior after each report.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ReportResponse<S> {
    pub after_fight_report: S,
    pub after_accommodate_report: S,
    pub no_signal: S,
}

fn default_response<S: Scalar>(
    thresholds: &Thresholds<S>,
    p0: &S,
    post: &NoisyPosteriors<S>,
) -> ReportResponse<S> {
    let one = S::one();
    ReportResponse {
        after_fight_report: response_to(thresholds, post.after_fight_report.value(), &one),
        after_accommodate_report: response_to(thresholds, &post.accommodate_or_convention(), &one),
        no_signal: thresholds.entry_indicator(p0),
    }
}

fn lambdas_from_response<S: Scalar>(
    pi: &S,
    noise: &NoiseSpec<S>,
    r: &ReportResponse<S>,
) -> (S, S) {
    let one = S::one();
    let base = (one.clone() - pi.clone()) * r.no_signal.clone();
    let la = base.clone()
        + pi.clone()
            * ((one.clone() - noise.eps_a.clone()) * r.after_accommodate_report.clone()
                + noise.eps_a.clone() * r.after_fight_report.clone());
    let lf = base
        + pi.clone()
            * ((one - noise.eps_f.clone()) * r.after_fight_report.clone()
                + noise.eps_f.clone() * r.after_accommodate_report.clone());
    (la, lf)
}

/// `(lambda_A, lambda_F)` under noisy reports, entering at the knife edge.
pub fn noisy_lambdas<S: Scalar>(
    p0: &Probability<S>,
    pi: &Probability<S>,
    q_a: &Probability<S>,
    noise: &NoiseSpec<S>,
    thresholds: &Thresholds<S>,
) -> (Probability<S>, Probability<S>) {
    let post = report_posteriors(p0, q_a, noise);
    let r = default_response(thresholds, p0.value(), &post);
    let (la, lf) = lambdas_from_response(pi.value(), noise, &r);
    (
        Probability::new(la).expect("mixture of entry probabilities"),
        Probability::new(lf).expect("mixture of entry probabilities"),
    )
}

/// `lambda_A - lambda_F = pi (1 - eps_f - eps_a) (e(p(A^)) - e(p(F^)))`.
pub fn noisy_delta_lambda<S: Scalar>(
    p0: &Probability<S>,
    pi: &Probability<S>,
    q_a: &Probability<S>,
    noise: &NoiseSpec<S>,
    thresholds: &Thresholds<S>,
) -> S {
    let (la, lf) = noisy_lambdas(p0, pi, q_a, noise, thresholds);
    la.into_inner() - lf.into_inner()
}

/// Fight probabilities in `[0, 1]` at which a report posterior equals the
/// entry cutoff, sorted and deduplicated. Between consecutive points the
/// entrant's responses are constant.
pub fn report_breakpoints<S: Scalar>(
    p0: &Probability<S>,
    noise: &NoiseSpec<S>,
    thresholds: &Thresholds<S>,
) -> Vec<(S, Observation)> {
    let kappa = noise.informativeness();
    if kappa == S::zero() {
        return Vec::new();
    }
    let one = S::one();
    let p = p0.value().clone();
    let phi = thresholds.phi.value().clone();
    let k = p.clone() * (one.clone() - phi.clone()) / (phi * (one.clone() - p));
    let mut out = Vec::new();
    let qf = (k.clone() * (one.clone() - noise.eps_f.clone()) - noise.eps_a.clone()) / kappa.clone();
    out.push((qf, Observation::NoisyFightReport));
    if noise.eps_f != S::zero() {
        let qa = (one.clone() - noise.eps_a.clone() - k * noise.eps_f.clone()) / kappa;
        out.push((qa, Observation::NoisyAccommodateReport));
    }
    let cmp = thresholds.cmp;
    let mut kept: Vec<(S, Observation)> = out
        .into_iter()
        .filter(|(q, _)| cmp.ge(q, &S::zero()) && cmp.le(q, &one))
        .map(|(q, o)| (q.max_of(S::zero()).min_of(S::one()), o))
        .collect();
    kept.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    kept
}

/// How the entry reduction is converted into a fight incentive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainScaling {
    /// `(M - a) * gain - (a + c)`, in payoff units.
    #[default]
    Payoff,
    /// `gain - (a + c)`, mixing an entry probability with a payoff.
    Raw,
}

/// Outcome of the fixed-point search over the strategic type's current
/// fight probability, with one response per inactive market.
#[derive(Debug, Clone)]
pub(crate) struct FixedPoint<S> {
    pub regime: Regime,
    pub q_a: FightChoice<S>,
    pub responses: Vec<ReportResponse<S>>,
}

/// `(1 - eps_f - eps_a) (e(p(A^)) - e(p(F^)))` for one market, with its
/// default responses.
fn market_gain<S: Scalar>(
    prior: &Probability<S>,
    q: &S,
    noise: &NoiseSpec<S>,
    thresholds: &Thresholds<S>,
) -> (S, ReportResponse<S>, NoisyPosteriors<S>) {
    let qp = Probability::new(q.clone()).expect("fight probability in [0, 1]");
    let post = report_posteriors(prior, &qp, noise);
    let r = default_response(thresholds, prior.value(), &post);
    let g = noise.informativeness()
        * (r.after_accommodate_report.clone() - r.after_fight_report.clone());
    (g, r, post)
}

struct GapContext<'a, S> {
    priors: &'a [Probability<S>],
    pi: &'a S,
    noise: &'a NoiseSpec<S>,
    payoffs: &'a Payoffs<S>,
    thresholds: &'a Thresholds<S>,
    scaling: GainScaling,
}

impl<S: Scalar> GapContext<'_, S> {
    fn scale(&self) -> S {
        match self.scaling {
            GainScaling::Payoff => self.payoffs.m.clone() - self.payoffs.a.clone(),
            GainScaling::Raw => S::one(),
        }
    }

    fn cost(&self) -> S {
        self.payoffs.a.clone() + self.payoffs.c.clone()
    }

    fn gap(&self, q: &S) -> (S, Vec<ReportResponse<S>>) {
        let mut total = S::zero();
        let mut rs = Vec::with_capacity(self.priors.len());
        for prior in self.priors {
            let (g, r, _) = market_gain(prior, q, self.noise, self.thresholds);
            total = total + g;
            rs.push(r);
        }
        (
            self.scale() * self.pi.clone() * total - self.cost(),
            rs,
        )
    }
}

/// Searches the strategic type's fight probability for a sequentially
/// rational, Bayes-consistent assessment, in this order:
///
/// 1. fight for sure;
/// 2. a whole interval between breakpoints on which the type is indifferent;
/// 3. accommodate for sure;
/// 4. a breakpoint at which the entrants whose posterior sits on the cutoff
///    mix so as to make the type indifferent.
pub(crate) fn solve_fixed_point<S: Scalar>(
    priors: &[Probability<S>],
    pi: &S,
    noise: &NoiseSpec<S>,
    payoffs: &Payoffs<S>,
    thresholds: &Thresholds<S>,
    scaling: GainScaling,
    opts: &SolveOptions,
) -> Result<FixedPoint<S>> {
    let ctx = GapContext {
        priors,
        pi,
        noise,
        payoffs,
        thresholds,
        scaling,
    };
    let cmp = thresholds.cmp;
    let zero = S::zero();
    let one = S::one();

    let (g1, r1) = ctx.gap(&one);
    if cmp.ge(&g1, &zero) {
        return Ok(FixedPoint {
            regime: Regime::HighFight,
            q_a: FightChoice::point(one),
            responses: r1,
        });
    }

    let mut breaks: Vec<(S, Observation)> = priors
        .iter()
        .flat_map(|p| report_breakpoints(p, noise, thresholds))
        .collect();
    breaks.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut knots = vec![zero.clone()];
    knots.extend(breaks.iter().map(|(q, _)| q.clone()));
    knots.push(one.clone());
    for w in knots.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        if !cmp.lt(lo, hi) {
            continue;
        }
        let mid = (lo.clone() + hi.clone()) / S::ratio(2, 1);
        let (g, _) = ctx.gap(&mid);
        if cmp.eq(&g, &zero) {
            let selected = opts.select(lo, hi);
            let (_, rs) = ctx.gap(&selected);
            return Ok(FixedPoint {
                regime: Regime::BoundaryMix,
                q_a: FightChoice {
                    selected,
                    interval: Some((lo.clone(), hi.clone())),
                },
                responses: rs,
            });
        }
    }

    let (g0, r0) = ctx.gap(&zero);
    if cmp.le(&g0, &zero) {
        return Ok(FixedPoint {
            regime: Regime::LowAccommodate,
            q_a: FightChoice::point(zero),
            responses: r0,
        });
    }

    let unit = ctx.scale() * pi.clone() * noise.informativeness();
    if unit != zero {
        let need = ctx.cost() / unit;
        for (q, obs) in &breaks {
            let mut rs = Vec::with_capacity(priors.len());
            let mut on_cutoff = Vec::new();
            let mut fixed = zero.clone();
            let mut anchor = zero.clone();
            for (i, prior) in priors.iter().enumerate() {
                let (_, r, post) = market_gain(prior, q, noise, thresholds);
                let posterior = match obs {
                    Observation::NoisyFightReport => post.after_fight_report.value().clone(),
                    _ => post.accommodate_or_convention(),
                };
                if thresholds.at_cutoff(&posterior) {
                    on_cutoff.push(i);
                    anchor = anchor
                        + match obs {
                            Observation::NoisyFightReport => r.after_accommodate_report.clone(),
                            _ => r.after_fight_report.clone(),
                        };
                } else {
                    fixed = fixed
                        + (r.after_accommodate_report.clone() - r.after_fight_report.clone());
                }
                rs.push(r);
            }
            if on_cutoff.is_empty() {
                continue;
            }
            let n = S::ratio(on_cutoff.len() as i64, 1);
            // Fight report: each mixing market contributes e_A - beta.
            // Accommodate report: each contributes beta - e_F.
            let beta = match obs {
                Observation::NoisyFightReport => (anchor + fixed - need.clone()) / n,
                _ => (need.clone() - fixed + anchor) / n,
            };
            if !(cmp.ge(&beta, &zero) && cmp.le(&beta, &one)) {
                continue;
            }
            let beta = beta.max_of(zero.clone()).min_of(one.clone());
            for i in on_cutoff {
                match obs {
                    Observation::NoisyFightReport => rs[i].after_fight_report = beta.clone(),
                    _ => rs[i].after_accommodate_report = beta.clone(),
                }
            }
            return Ok(FixedPoint {
                regime: Regime::InteriorMix,
                q_a: FightChoice::point(q.clone()),
                responses: rs,
            });
        }
    }

    let shown: Vec<String> = priors.iter().map(|p| p.value().to_string()).collect();
    Err(Error::NoEquilibrium(format!(
        "priors = [{}], pi = {pi}, eps_f = {}, eps_a = {}",
        shown.join(", "),
        noise.eps_f,
        noise.eps_a
    )))
}

/// Sequential-protocol equilibrium with noisy reports.
pub fn solve_sequential_noisy<S: Scalar>(
    p0: &S,
    pi: &S,
    payoffs: &Payoffs<S>,
    noise: &NoiseSpec<S>,
    opts: &SolveOptions,
) -> Result<EquilibriumOutcome<S>> {
    let p0p = Probability::interior_prior(p0.clone())?;
    Probability::named("pi", pi.clone())?;
    let thr = payoffs.thresholds().with_comparator(opts.cmp);
    let fp = solve_fixed_point(
        std::slice::from_ref(&p0p),
        pi,
        noise,
        payoffs,
        &thr,
        GainScaling::Payoff,
        opts,
    )?;
    let response = fp.responses.into_iter().next().expect("one market");

    let qp = Probability::new(fp.q_a.selected.clone())?;
    let post = report_posteriors(&p0p, &qp, noise);
    let (la, lf) = lambdas_from_response(pi, noise, &response);
    let dl = la.clone() - lf.clone();

    let obs = [
        Observation::NoisyFightReport,
        Observation::NoisyAccommodateReport,
        Observation::NoSignal,
    ];
    let beliefs_b = ObservationMap::from_fn(&obs, |o| match o {
        Observation::NoisyFightReport => post.after_fight_report.value().clone(),
        Observation::NoisyAccommodateReport => post.accommodate_or_convention(),
        _ => p0.clone(),
    });
    let response_b = ObservationMap::from_fn(&obs, |o| match o {
        Observation::NoisyFightReport => response.after_fight_report.clone(),
        Observation::NoisyAccommodateReport => response.after_accommodate_report.clone(),
        _ => response.no_signal.clone(),
    });
    let alpha_a = p0.clone() + (S::one() - p0.clone()) * fp.q_a.selected.clone();

    let mut out = EquilibriumOutcome {
        protocol: Protocol::Sequential,
        regime: fp.regime,
        p0: p0.clone(),
        pi: pi.clone(),
        noise: Some(noise.clone()),
        q_a: fp.q_a,
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::solve_sequential;
    use crate::scalar::Rational;

    fn prob(x: f64) -> Probability<f64> {
        Probability::new(x).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn rejects_error_rate_of_one() {
        assert!(NoiseSpec::new(1.0, 0.0).is_err());
        assert!(NoiseSpec::new(0.0, -0.1).is_err());
        assert!(NoiseSpec::new(0.99, 0.5).is_ok());
    }

    #[test]
    fn posterior_examples() {
        let n = NoiseSpec::new(0.1, 0.2).unwrap();
        let (f, a) = noisy_posteriors(&prob(0.5), &prob(0.0), &n).unwrap();
        assert!(close(*f.value(), 0.45 / 0.55));
        assert!(close(*a.value(), 0.05 / 0.45));
        let r = report_posteriors(&prob(0.5), &prob(0.0), &n);
        let total = r.prob_fight_report * f.value() + r.prob_accommodate_report * a.value();
        assert!(close(total, 0.5));
    }

    #[test]
    fn noiseless_posteriors_match_baseline() {
        let n = NoiseSpec::noiseless();
        let (f, a) = noisy_posteriors(&prob(0.3), &prob(0.5), &n).unwrap();
        assert!(close(*f.value(), 0.3 / 0.65));
        assert_eq!(*a.value(), 0.0);
    }

    #[test]
    fn accommodate_report_can_be_impossible() {
        let n = NoiseSpec::new(0.0, 0.3).unwrap();
        assert_eq!(
            noisy_posteriors(&prob(0.4), &prob(1.0), &n),
            Err(Error::UndefinedPosterior("noisy accommodate"))
        );
    }

    #[test]
    fn lambda_examples() {
        let t = Payoffs::<f64>::calibration().thresholds();
        let n = NoiseSpec::new(0.4, 0.0).unwrap();
        let (_, lf) = noisy_lambdas(&prob(0.6), &prob(0.8), &prob(1.0), &n, &t);
        assert!(close(*lf.value(), 0.0));
        let n = NoiseSpec::new(0.1, 0.2).unwrap();
        let dl = noisy_delta_lambda(&prob(0.5), &prob(0.5), &prob(0.0), &n, &t);
        // pi (1 - eps_f - eps_a) (e(A^) - e(F^)) = 0.5 * 0.7 * 1
        assert!(close(dl, 0.35));
    }

    #[test]
    fn breakpoints_hit_the_cutoff() {
        let p = Payoffs::<Rational>::calibration();
        let t = p.thresholds();
        let p0 = Probability::new(Rational::ratio(3, 10)).unwrap();
        let n = NoiseSpec::new(Rational::ratio(1, 10), Rational::ratio(1, 20)).unwrap();
        let b = report_breakpoints(&p0, &n, &t);
        assert!(!b.is_empty());
        for (q, obs) in b {
            let r = report_posteriors(&p0, &Probability::new(q).unwrap(), &n);
            let post = match obs {
                Observation::NoisyFightReport => r.after_fight_report.value().clone(),
                _ => r.accommodate_or_convention(),
            };
            assert_eq!(post, Rational::ratio(1, 2));
        }
    }

    #[test]
    fn noiseless_solver_reduces_to_baseline() {
        let p = Payoffs::<Rational>::calibration();
        let o = SolveOptions::default();
        let n = NoiseSpec::noiseless();
        for (a, b) in [(3, 10), (6, 10), (1, 2), (8, 10)] {
            for pi in [
                Rational::ratio(1, 10),
                Rational::ratio(5, 7),
                Rational::ratio(19, 20),
                Rational::ratio(1, 1),
            ] {
                let p0 = Rational::ratio(a, b);
                let base = solve_sequential(&p0, &pi, &p, &o).unwrap();
                let noisy = solve_sequential_noisy(&p0, &pi, &p, &n, &o).unwrap();
                assert_eq!(base.regime, noisy.regime, "p0={p0} pi={pi}");
                assert_eq!(base.q_a, noisy.q_a);
                assert_eq!(base.lambda_a, noisy.lambda_a);
                assert_eq!(base.lambda_f, noisy.lambda_f);
                assert_eq!(base.ex_ante_entry_b, noisy.ex_ante_entry_b);
                assert_eq!(base.strategic_payoff, noisy.strategic_payoff);
            }
        }
    }

    #[test]
    fn heavy_noise_removes_deterrence() {
        let p = Payoffs::<f64>::calibration();
        let n = NoiseSpec::new(0.45, 0.45).unwrap();
        let out = solve_sequential_noisy(&0.6, &0.8, &p, &n, &SolveOptions::default()).unwrap();
        assert_eq!(out.regime, Regime::LowAccommodate);
    }
}
