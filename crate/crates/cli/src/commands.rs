//! One function per subcommand. Each returns the rendered output together
//! with an optional failure to report after the output has been written.

use std::collections::BTreeMap;

use chainstore::acquisition::{
    acquisition_cutoff, acquires, action_probabilities, AcquisitionProblem,
};
use chainstore::equilibrium::{region_sweep, solve, Axis, EquilibriumOutcome, Regime, SolveOptions};
use chainstore::multimarket::{simulate, SimulationConfig, SimulationStats};
use chainstore::scalar::{Comparator, Rational, Scalar};
use chainstore::sweep::{sweep, SweepBase};
use chainstore::verifier::{assessment_with_fight_probability, verify_pbe, DeviationReport};
use chainstore::{solve_sequential_noisy, solve_with_acquisition, Protocol, VerifyOptions};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{render, Cell, Table};

pub struct CommandOutput {
    pub text: String,
    /// Lines for standard error (summaries that do not belong in a CSV).
    pub notes: Vec<String>,
    /// Failure to report once the output is written.
    pub failure: Option<CliError>,
}

impl CommandOutput {
    fn ok(text: String) -> Self {
        Self {
            text,
            notes: Vec::new(),
            failure: None,
        }
    }
}

fn solve_options(cfg: &RunConfig, exact: bool) -> Result<SolveOptions, CliError> {
    let n = &cfg.numerics;
    if !(0.0..=1.0).contains(&n.mix_selection) || n.mix_selection == 1.0 {
        return Err(CliError::Config(format!(
            "numerics.mix_selection must lie in [0, 1), got {}",
            n.mix_selection
        )));
    }
    if !(n.tolerance >= 0.0) {
        return Err(CliError::Config("numerics.tolerance must be >= 0".into()));
    }
    Ok(SolveOptions {
        cmp: if exact {
            Comparator::exact()
        } else {
            Comparator::new(n.tolerance)
        },
        mix_selection: n.mix_selection,
    })
}

fn verify_options(cfg: &RunConfig) -> VerifyOptions {
    VerifyOptions {
        tolerance: cfg.numerics.verify_tolerance,
        grid_points: cfg.numerics.verify_grid,
    }
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OutcomeView {
    pub protocol: Protocol,
    pub regime: Regime,
    pub p0: f64,
    pub pi: f64,
    pub eps_f: Option<f64>,
    pub eps_a: Option<f64>,
    pub q_a: f64,
    pub q_a_interval: Option<[f64; 2]>,
    pub q_b: f64,
    pub fight_prob: f64,
    pub lambda_a: f64,
    pub lambda_f: f64,
    pub delta_lambda: f64,
    pub payoff_gap: f64,
    pub ex_ante_entry_b: f64,
    pub strategic_payoff: f64,
    pub tough_payoff: f64,
    pub entrant_a_enters: bool,
    pub phi: f64,
    pub delta: f64,
    pub beliefs_b: BTreeMap<&'static str, f64>,
    pub response_b: BTreeMap<&'static str, f64>,
}

impl OutcomeView {
    pub fn new<S: Scalar>(o: &EquilibriumOutcome<S>) -> Self {
        let f = |x: &S| x.to_f64();
        Self {
            protocol: o.protocol,
            regime: o.regime,
            p0: f(&o.p0),
            pi: f(&o.pi),
            eps_f: o.noise.as_ref().map(|n| f(&n.eps_f)),
            eps_a: o.noise.as_ref().map(|n| f(&n.eps_a)),
            q_a: f(&o.q_a.selected),
            q_a_interval: o.q_a.interval.as_ref().map(|(lo, hi)| [f(lo), f(hi)]),
            q_b: f(&o.q_b),
            fight_prob: f(&o.fight_probability()),
            lambda_a: f(&o.lambda_a),
            lambda_f: f(&o.lambda_f),
            delta_lambda: f(&o.delta_lambda),
            payoff_gap: f(&o.payoff_gap),
            ex_ante_entry_b: f(&o.ex_ante_entry_b),
            strategic_payoff: f(&o.strategic_payoff),
            tough_payoff: f(&o.tough_payoff),
            entrant_a_enters: o.entrant_a_enters,
            phi: f(o.thresholds.phi.value()),
            delta: f(&o.thresholds.delta),
            beliefs_b: o.beliefs_b.iter().map(|(k, v)| (k.label(), f(v))).collect(),
            response_b: o.response_b.iter().map(|(k, v)| (k.label(), f(v))).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationView {
    pub passed: bool,
    pub tolerance: f64,
    pub grid_points: usize,
    pub candidate_payoff: f64,
    pub max_incumbent_gain: f64,
    pub best_deviation: [f64; 2],
    pub max_entrant_gain: f64,
    pub entrant_checks: Vec<chainstore::verifier::EntrantCheck>,
    pub bayes_violations: Vec<chainstore::verifier::BayesViolation>,
    pub off_path: Vec<chainstore::verifier::OffPathNote>,
}

impl VerificationView {
    pub fn new<S: Scalar>(r: &DeviationReport<S>) -> Self {
        Self {
            passed: r.passed,
            tolerance: r.tolerance,
            grid_points: r.grid_points,
            candidate_payoff: r.candidate_payoff.to_f64(),
            max_incumbent_gain: r.max_incumbent_gain.to_f64(),
            best_deviation: [r.best_deviation.0.to_f64(), r.best_deviation.1.to_f64()],
            max_entrant_gain: r.max_entrant_gain.to_f64(),
            entrant_checks: r.entrant_checks.clone(),
            bayes_violations: r.bayes_violations.clone(),
            off_path: r.off_path.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AcquisitionView {
    pub k: f64,
    pub acquires: bool,
    pub pi_eff: f64,
    pub value_of_information: f64,
}

#[derive(Debug, Serialize)]
pub struct SolveRecord {
    #[serde(flatten)]
    pub outcome: OutcomeView,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acquisition: Option<AcquisitionView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationView>,
}

const SOLVE_HEADER: [&str; 24] = [
    "protocol",
    "regime",
    "p0",
    "pi",
    "epsF",
    "epsA",
    "qA",
    "qALo",
    "qAHi",
    "fightProb",
    "lambdaA",
    "lambdaF",
    "deltaLambda",
    "payoffGap",
    "exAnteEntryB",
    "strategicPayoff",
    "toughPayoff",
    "entrantAEnters",
    "k",
    "acquires",
    "piEff",
    "voi",
    "verified",
    "maxIncumbentGain",
];

fn solve_row(r: &SolveRecord) -> Vec<Cell> {
    let o = &r.outcome;
    let protocol = match o.protocol {
        Protocol::Sequential => "sequential",
        Protocol::Simultaneous => "simultaneous",
    };
    let a = r.acquisition.as_ref();
    let v = r.verification.as_ref();
    vec![
        protocol.into(),
        o.regime.label().into(),
        o.p0.into(),
        o.pi.into(),
        o.eps_f.into(),
        o.eps_a.into(),
        o.q_a.into(),
        o.q_a_interval.map(|i| i[0]).into(),
        o.q_a_interval.map(|i| i[1]).into(),
        o.fight_prob.into(),
        o.lambda_a.into(),
        o.lambda_f.into(),
        o.delta_lambda.into(),
        o.payoff_gap.into(),
        o.ex_ante_entry_b.into(),
        o.strategic_payoff.into(),
        o.tough_payoff.into(),
        o.entrant_a_enters.into(),
        a.map(|a| a.k).into(),
        a.map(|a| Cell::Bool(a.acquires)).unwrap_or(Cell::Empty),
        a.map(|a| a.pi_eff).into(),
        a.map(|a| a.value_of_information).into(),
        v.map(|v| Cell::Bool(v.passed)).unwrap_or(Cell::Empty),
        v.map(|v| v.max_incumbent_gain).into(),
    ]
}

/// The equilibria requested by the model, noise and acquisition blocks.
fn solve_candidates<S: Scalar>(
    cfg: &RunConfig,
    opts: &SolveOptions,
) -> Result<Vec<(EquilibriumOutcome<S>, Option<AcquisitionView>)>, CliError> {
    let payoffs = cfg.payoffs.build::<S>()?;
    let p0: S = cfg.model.p0.get("model.p0")?;
    let pi: S = cfg.model.pi.get("model.pi")?;
    let protocol = cfg.model.protocol;
    if let Some(acq) = &cfg.acquisition {
        if protocol != Protocol::Sequential || cfg.noise.is_some() {
            return Err(CliError::Config(
                "acquisition applies to the noiseless sequential protocol only".into(),
            ));
        }
        let k: S = acq.k.get("acquisition.k")?;
        let report = solve_with_acquisition(&p0, &pi, &k, &payoffs, opts)?;
        return Ok(report
            .equilibria
            .into_iter()
            .map(|e| {
                let view = AcquisitionView {
                    k: k.to_f64(),
                    acquires: e.acquires,
                    pi_eff: e.pi_eff.to_f64(),
                    value_of_information: e.value_of_information.to_f64(),
                };
                (e.outcome, Some(view))
            })
            .collect());
    }
    let outcome = match (&cfg.noise, protocol) {
        (Some(n), Protocol::Sequential) => {
            solve_sequential_noisy(&p0, &pi, &payoffs, &n.build::<S>()?, opts)?
        }
        (Some(_), Protocol::Simultaneous) => {
            return Err(CliError::Config(
                "noise applies to the sequential protocol only".into(),
            ))
        }
        (None, protocol) => solve(protocol, &p0, &pi, &payoffs, opts)?,
    };
    Ok(vec![(outcome, None)])
}

fn run_solve<S: Scalar>(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let opts = solve_options(cfg, S::is_exact())?;
    let mut records = Vec::new();
    let mut failed = Vec::new();
    for (outcome, acquisition) in solve_candidates::<S>(cfg, &opts)? {
        let verification = if cfg.verify {
            let report = verify_pbe(&outcome, &verify_options(cfg));
            if !report.passed {
                failed.push(format!(
                    "{} candidate at qA = {}: incumbent gain {}, entrant gain {}",
                    outcome.regime,
                    outcome.q_a.selected,
                    report.max_incumbent_gain,
                    report.max_entrant_gain
                ));
            }
            Some(VerificationView::new(&report))
        } else {
            None
        };
        records.push(SolveRecord {
            outcome: OutcomeView::new(&outcome),
            acquisition,
            verification,
        });
    }
    let mut table = Table::new(SOLVE_HEADER.to_vec());
    for r in &records {
        table.push(solve_row(r));
    }
    let mut out = CommandOutput::ok(render(cfg.output.format, &table, &records)?);
    if !failed.is_empty() {
        out.failure = Some(CliError::Verification(failed.join("; ")));
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct RegionView {
    p0: f64,
    pi: f64,
    regime: Regime,
    q_a: f64,
    ex_ante_entry_b: f64,
    fight_prob: f64,
}

fn run_regions<S: Scalar>(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let opts = solve_options(cfg, S::is_exact())?;
    let payoffs = cfg.payoffs.build::<S>()?;
    let (np, npi) = cfg.sweep.grid()?;
    let rows = region_sweep(&Axis::<S>::prior(np)?, &Axis::<S>::unit(npi)?, &payoffs, &opts)?;
    let views: Vec<RegionView> = rows
        .iter()
        .map(|r| RegionView {
            p0: r.p0.to_f64(),
            pi: r.pi.to_f64(),
            regime: r.regime,
            q_a: r.q_a.to_f64(),
            ex_ante_entry_b: r.ex_ante_entry_b.to_f64(),
            fight_prob: r.fight_probability.to_f64(),
        })
        .collect();
    let mut table = Table::new(vec!["p0", "pi", "regime", "qA", "exAnteEntryB", "fightProb"]);
    for v in &views {
        table.push(vec![
            v.p0.into(),
            v.pi.into(),
            v.regime.label().into(),
            v.q_a.into(),
            v.ex_ante_entry_b.into(),
            v.fight_prob.into(),
        ]);
    }
    let high = views.iter().filter(|v| v.regime == Regime::HighFight).count();
    let mut out = CommandOutput::ok(render(cfg.output.format, &table, &views)?);
    out.notes
        .push(format!("{} cells, {high} HIGH_FIGHT", views.len()));
    Ok(out)
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct SweepRowView {
    x: f64,
    regime: Option<Regime>,
    q_a: Option<f64>,
    fight_prob: Option<f64>,
    lambda_a: Option<f64>,
    lambda_f: Option<f64>,
    delta_lambda: Option<f64>,
    ex_ante_entry_b: Option<f64>,
    k_star: Option<f64>,
    acquires: Option<bool>,
    acquisition_equilibria: Option<usize>,
}

#[derive(Debug, Serialize)]
struct SweepView {
    axis: &'static str,
    rows: Vec<SweepRowView>,
    monotonicity: BTreeMap<&'static str, &'static str>,
}

fn run_sweep<S: Scalar>(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let opts = solve_options(cfg, S::is_exact())?;
    let axis = cfg.sweep.axis()?;
    let default = axis.default_axis::<S>(cfg.sweep.points)?;
    let lo = match &cfg.sweep.lo {
        Some(x) => x.get("sweep.lo")?,
        None => default.lo.clone(),
    };
    let hi = match &cfg.sweep.hi {
        Some(x) => x.get("sweep.hi")?,
        None => default.hi.clone(),
    };
    let values = Axis::new(lo, hi, cfg.sweep.points)?;
    let (eps_f, eps_a) = match &cfg.noise {
        Some(n) => (n.eps_f.get("noise.eps_f")?, n.eps_a.get("noise.eps_a")?),
        None => (S::zero(), S::zero()),
    };
    let base = SweepBase {
        p0: cfg.model.p0.get("model.p0")?,
        pi: cfg.model.pi.get("model.pi")?,
        eps_f,
        eps_a,
        k: match &cfg.acquisition {
            Some(a) => a.k.get("acquisition.k")?,
            None => S::zero(),
        },
        payoffs: cfg.payoffs.build()?,
    };
    let result = sweep(axis, &values, &base, &opts)?;
    let f = |x: &Option<S>| x.as_ref().map(Scalar::to_f64);
    let view = SweepView {
        axis: axis.name(),
        rows: result
            .rows
            .iter()
            .map(|r| SweepRowView {
                x: r.x.to_f64(),
                regime: r.regime,
                q_a: f(&r.q_a),
                fight_prob: f(&r.fight_probability),
                lambda_a: f(&r.lambda_a),
                lambda_f: f(&r.lambda_f),
                delta_lambda: f(&r.delta_lambda),
                ex_ante_entry_b: f(&r.ex_ante_entry_b),
                k_star: f(&r.k_star),
                acquires: r.acquires,
                acquisition_equilibria: r.acquisition_equilibria,
            })
            .collect(),
        monotonicity: result
            .monotonicity
            .iter()
            .map(|(c, m)| (*c, m.label()))
            .collect(),
    };
    let mut table = Table::new(vec![
        axis.name(),
        "regime",
        "qA",
        "fightProb",
        "lambdaA",
        "lambdaF",
        "deltaLambda",
        "exAnteEntryB",
        "kStar",
        "acquires",
        "acquisitionEquilibria",
    ]);
    for r in &view.rows {
        table.push(vec![
            r.x.into(),
            r.regime.map(|g| Cell::from(g.label())).unwrap_or(Cell::Empty),
            r.q_a.into(),
            r.fight_prob.into(),
            r.lambda_a.into(),
            r.lambda_f.into(),
            r.delta_lambda.into(),
            r.ex_ante_entry_b.into(),
            r.k_star.into(),
            r.acquires.map(Cell::Bool).unwrap_or(Cell::Empty),
            r.acquisition_equilibria.map(Cell::from).unwrap_or(Cell::Empty),
        ]);
    }
    let mut out = CommandOutput::ok(render(cfg.output.format, &table, &view)?);
    out.notes = result
        .monotonicity
        .iter()
        .map(|(c, m)| format!("monotonicity {c}: {}", m.label()))
        .collect();
    Ok(out)
}

fn run_simulate(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let s = &cfg.simulate;
    let mut sim = SimulationConfig::new(
        s.n_markets,
        s.t_periods,
        cfg.model.p0.get("model.p0")?,
        cfg.model.pi.get("model.pi")?,
        cfg.payoffs.build()?,
        s.policy,
    );
    sim.replications = s.replications;
    sim.seed = s.seed;
    sim.entry_mode = s.entry_mode;
    sim.schedule = s.schedule;
    sim.scaling = s.gain_scaling;
    sim.cmp = Comparator::new(cfg.numerics.tolerance);
    sim.noise = cfg.noise.as_ref().map(|n| n.build()).transpose()?;
    let stats: SimulationStats = simulate(&sim)?;
    let mut table = Table::new(vec![
        "period",
        "entry",
        "entrySE",
        "fight",
        "fightSE",
        "strategicFight",
        "strategicFightSE",
        "strategicFightProb",
        "noPublicAccommodation",
        "noPublicAccommodationSE",
        "hazardUpperBound",
    ]);
    let num = |x: f64| if x.is_nan() { Cell::Empty } else { Cell::Num(x) };
    let se = |e: &chainstore::multimarket::Estimate| {
        if e.count == 0 {
            Cell::Empty
        } else {
            Cell::Num(e.std_error)
        }
    };
    for p in &stats.periods {
        table.push(vec![
            p.period.into(),
            num(p.entry.mean),
            se(&p.entry),
            num(p.fight.mean),
            se(&p.fight),
            num(p.strategic_fight.mean),
            se(&p.strategic_fight),
            num(p.strategic_fight_probability.mean),
            num(p.no_public_accommodation.mean),
            se(&p.no_public_accommodation),
            p.hazard_upper_bound.into(),
        ]);
    }
    let mut out = CommandOutput::ok(render(cfg.output.format, &table, &stats)?);
    out.notes.push(format!(
        "incumbent payoff {:.6} (se {:.6}); front-loading violations {} of {}",
        stats.incumbent_payoff.mean,
        stats.incumbent_payoff.std_error,
        stats.frontloading_violations,
        stats.replications
    ));
    Ok(out)
}

fn run_verify<S: Scalar>(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let opts = solve_options(cfg, S::is_exact())?;
    let mut reports = Vec::new();
    let mut failed = Vec::new();
    for (outcome, _) in solve_candidates::<S>(cfg, &opts)? {
        let candidate = match &cfg.candidate_q {
            Some(q) => {
                let q: S = q.get("candidate_q")?;
                let regime = if q == S::one() {
                    Regime::HighFight
                } else if q == S::zero() {
                    Regime::LowAccommodate
                } else {
                    Regime::InteriorMix
                };
                assessment_with_fight_probability(&outcome, q, regime)?
            }
            None => outcome,
        };
        let report = verify_pbe(&candidate, &verify_options(cfg));
        if !report.passed {
            failed.push(format!(
                "incumbent gain {} at (qA, qB) = ({}, {}), entrant gain {}",
                report.max_incumbent_gain,
                report.best_deviation.0,
                report.best_deviation.1,
                report.max_entrant_gain
            ));
        }
        reports.push(SolveRecord {
            outcome: OutcomeView::new(&candidate),
            acquisition: None,
            verification: Some(VerificationView::new(&report)),
        });
    }
    let mut table = Table::new(vec![
        "regime",
        "qA",
        "passed",
        "candidatePayoff",
        "maxIncumbentGain",
        "bestDeviationQA",
        "bestDeviationQB",
        "maxEntrantGain",
        "bayesViolations",
        "offPathNotes",
    ]);
    for r in &reports {
        let v = r.verification.as_ref().expect("verification present");
        table.push(vec![
            r.outcome.regime.label().into(),
            r.outcome.q_a.into(),
            v.passed.into(),
            v.candidate_payoff.into(),
            v.max_incumbent_gain.into(),
            v.best_deviation[0].into(),
            v.best_deviation[1].into(),
            v.max_entrant_gain.into(),
            v.bayes_violations.len().into(),
            v.off_path.len().into(),
        ]);
    }
    let mut out = CommandOutput::ok(render(cfg.output.format, &table, &reports)?);
    if !failed.is_empty() {
        out.failure = Some(CliError::Verification(failed.join("; ")));
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct VoiView {
    k: f64,
    p0: f64,
    pi: f64,
    q_a: f64,
    pi_f: f64,
    pi_a: f64,
    voi: f64,
    k_star: f64,
    acquires: bool,
    acquisition_equilibria: usize,
}

fn run_voi<S: Scalar>(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let opts = solve_options(cfg, S::is_exact())?;
    let payoffs = cfg.payoffs.build::<S>()?;
    let p0: S = cfg.model.p0.get("model.p0")?;
    let pi: S = cfg.model.pi.get("model.pi")?;
    let (k, q_a): (S, S) = match &cfg.acquisition {
        Some(a) => (
            a.k.get("acquisition.k")?,
            match &a.q_a {
                Some(q) => q.get("acquisition.q_a")?,
                None => chainstore::solve_sequential(&p0, &pi, &payoffs, &opts)?
                    .q_a
                    .selected,
            },
        ),
        None => (
            S::zero(),
            chainstore::solve_sequential(&p0, &pi, &payoffs, &opts)?
                .q_a
                .selected,
        ),
    };
    let problem = AcquisitionProblem::new(k.clone(), p0.clone(), q_a.clone(), pi.clone(), payoffs.clone())?;
    let (pi_f, pi_a) = action_probabilities(&problem.p0, &problem.q_a);
    let k_star = acquisition_cutoff(&problem);
    let equilibria = match solve_with_acquisition(&p0, &pi, &k, &payoffs, &opts) {
        Ok(r) => r.equilibria.len(),
        Err(chainstore::Error::NoPureAcquisitionEquilibrium { .. }) => 0,
        Err(e) => return Err(e.into()),
    };
    let view = VoiView {
        k: k.to_f64(),
        p0: p0.to_f64(),
        pi: pi.to_f64(),
        q_a: q_a.to_f64(),
        pi_f: pi_f.value().to_f64(),
        pi_a: pi_a.value().to_f64(),
        voi: k_star.to_f64(),
        k_star: k_star.to_f64(),
        acquires: acquires(&problem, &opts.cmp),
        acquisition_equilibria: equilibria,
    };
    let mut table = Table::new(vec![
        "k",
        "p0",
        "pi",
        "qA",
        "piF",
        "piA",
        "voi",
        "kStar",
        "acquires",
        "acquisitionEquilibria",
    ]);
    table.push(vec![
        view.k.into(),
        view.p0.into(),
        view.pi.into(),
        view.q_a.into(),
        view.pi_f.into(),
        view.pi_a.into(),
        view.voi.into(),
        view.k_star.into(),
        view.acquires.into(),
        view.acquisition_equilibria.into(),
    ]);
    Ok(CommandOutput::ok(render(cfg.output.format, &table, &view)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Regions,
    Sweep,
    Simulate,
    Verify,
    Voi,
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    macro_rules! dispatch {
        ($f:ident) => {
            if cfg.numerics.rational {
                $f::<Rational>(cfg)
            } else {
                $f::<f64>(cfg)
            }
        };
    }
    match command {
        Command::Solve => dispatch!(run_solve),
        Command::Regions => dispatch!(run_regions),
        Command::Sweep => dispatch!(run_sweep),
        Command::Verify => dispatch!(run_verify),
        Command::Voi => dispatch!(run_voi),
        Command::Simulate => {
            if cfg.numerics.rational {
                return Err(CliError::Config(
                    "simulation runs in floating point; drop --rational".into(),
                ));
            }
            run_simulate(cfg)
        }
    }
}
