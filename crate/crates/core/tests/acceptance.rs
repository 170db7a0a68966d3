//! Acceptance criteria, one PASS/FAIL line each. Run with
//! `cargo test -p chainstore-core --test acceptance`.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use chainstore::acquisition::{value_of_information, AcquisitionProblem};
use chainstore::equilibrium::{
    closed_form_ex_ante_entry_b, closed_form_payoffs, in_high_fight_region, region_sweep, Axis,
    Regime, SolveOptions,
};
use chainstore::model::{entry_cutoff, deterrence_threshold, posterior_after_fight, Payoffs};
use chainstore::multimarket::{simulate, EntryMode, IncumbentPolicy, SimulationConfig};
use chainstore::noisy::{noisy_lambdas, report_posteriors, NoiseSpec};
use chainstore::scalar::{Rational, Scalar};
use chainstore::sweep::{sweep, SweepAxis, SweepBase};
use chainstore::verifier::enumerate::GameSpec;
use chainstore::verifier::{assessment_with_fight_probability, information_values, verify_pbe};
use chainstore::{solve_sequential, solve_sequential_noisy, solve_simultaneous, Probability};
use chainstore::{Protocol, VerifyOptions};

use common::{close, grid_pi, oracle_cutoff_lambdas, oracle_lambdas, GRID_P0};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn rat(n: i64, d: i64) -> Rational {
    Rational::ratio(n, d)
}

fn opts() -> SolveOptions {
    SolveOptions::default()
}

fn thresholds() -> Outcome {
    let pr = Payoffs::<Rational>::calibration();
    let phi = entry_cutoff(&pr).into_inner();
    let delta = deterrence_threshold(&pr);
    ensure(phi == rat(1, 2), format!("phi = {phi}"))?;
    ensure(delta == rat(5, 7), format!("Delta = {delta}"))?;
    let pf = Payoffs::<f64>::calibration();
    let phi_f = *entry_cutoff(&pf).value();
    let delta_f = deterrence_threshold(&pf);
    ensure(close(phi_f, 0.5, 1e-12), format!("float phi = {phi_f}"))?;
    ensure(close(delta_f, 5.0 / 7.0, 1e-12), format!("float Delta = {delta_f}"))?;
    Ok(format!("phi = {phi}, Delta = {delta}"))
}

fn high_fight_region() -> Outcome {
    let p = Payoffs::<Rational>::calibration();
    let rows = region_sweep(
        &Axis::<Rational>::prior(101).map_err(|e| e.to_string())?,
        &Axis::<Rational>::unit(101).map_err(|e| e.to_string())?,
        &p,
        &SolveOptions {
            cmp: chainstore::Comparator::exact(),
            ..opts()
        },
    )
    .map_err(|e| e.to_string())?;
    let mut mismatches = 0;
    let mut high = 0;
    for r in &rows {
        let is_high = r.regime == Regime::HighFight;
        high += is_high as usize;
        if is_high != in_high_fight_region(&r.p0, &r.pi, &p) {
            mismatches += 1;
        }
    }
    ensure(
        mismatches == 0,
        format!("{mismatches} of {} cells disagree", rows.len()),
    )?;
    Ok(format!("{} cells, {high} HIGH_FIGHT, 0 mismatches", rows.len()))
}

fn oracle_grid() -> Outcome {
    let p = Payoffs::<f64>::calibration();
    let tol = 1e-12;
    let mut checked = 0;
    let mut worst = 0.0f64;
    let mut track = |what: &str, a: f64, b: f64, at: (f64, f64)| -> Result<(), String> {
        worst = worst.max((a - b).abs());
        checked += 1;
        ensure(close(a, b, tol), format!("{what} at {at:?}: {a} vs {b}"))
    };
    let noise = NoiseSpec::new(0.1, 0.2).map_err(|e| e.to_string())?;
    for &p0 in &GRID_P0 {
        for pi in grid_pi() {
            let out = solve_sequential(&p0, &pi, &p, &opts()).map_err(|e| e.to_string())?;
            let (la, lf) = oracle_lambdas(&out);
            track("lambda_A", out.lambda_a, la, (p0, pi))?;
            track("lambda_F", out.lambda_f, lf, (p0, pi))?;
            track("delta_lambda", out.delta_lambda, la - lf, (p0, pi))?;
            track(
                "exAnteEntryB",
                out.ex_ante_entry_b,
                closed_form_ex_ante_entry_b(&out),
                (p0, pi),
            )?;
            let (s, t) = closed_form_payoffs(&out);
            track("strategic payoff", out.strategic_payoff, s, (p0, pi))?;
            track("tough payoff", out.tough_payoff, t, (p0, pi))?;
            let q = out.q_a.selected;
            let voi = value_of_information(
                &AcquisitionProblem::new(0.0, p0, q, pi, p.clone()).map_err(|e| e.to_string())?,
            );
            let (with, without) = information_values(&p0, &q, &pi, &p);
            track("VOI", voi, with - without, (p0, pi))?;

            let noisy = solve_sequential_noisy(&p0, &pi, &p, &noise, &opts())
                .map_err(|e| e.to_string())?;
            let (na, nf) = oracle_lambdas(&noisy);
            track("noisy lambda_A", noisy.lambda_a, na, (p0, pi))?;
            track("noisy lambda_F", noisy.lambda_f, nf, (p0, pi))?;

            // Closed-form noisy lambdas against cutoff responses in the tree,
            // at a few fight probabilities whose beliefs avoid the cutoff.
            let thr = p.thresholds();
            for qa in [0.0, 0.25, 0.9] {
                let post = report_posteriors(
                    &Probability::new(p0).unwrap(),
                    &Probability::new(qa).unwrap(),
                    &noise,
                );
                let at_edge = thr.at_cutoff(post.after_fight_report.value())
                    || thr.at_cutoff(&post.accommodate_or_convention())
                    || thr.at_cutoff(&p0);
                if at_edge {
                    continue;
                }
                let (ca, cf) = noisy_lambdas(
                    &Probability::new(p0).unwrap(),
                    &Probability::new(pi).unwrap(),
                    &Probability::new(qa).unwrap(),
                    &noise,
                    &thr,
                );
                let spec = GameSpec {
                    protocol: Protocol::Sequential,
                    p0,
                    pi,
                    noise: Some(noise.clone()),
                    payoffs: p.clone(),
                };
                let (oa, of) = oracle_cutoff_lambdas(&spec, &qa);
                track("closed-form noisy lambda_A", ca.into_inner(), oa, (p0, qa))?;
                track("closed-form noisy lambda_F", cf.into_inner(), of, (p0, qa))?;
            }
        }
    }
    Ok(format!("{checked} comparisons, max abs error {worst:.2e}"))
}

fn verification() -> Outcome {
    let p = Payoffs::<f64>::calibration();
    let vo = VerifyOptions::default();
    let mut certified = Vec::new();
    for (p0, pi) in [(0.6, 0.8), (0.6, 0.5), (0.3, 0.5), (0.3, 0.9)] {
        let out = solve_sequential(&p0, &pi, &p, &opts()).map_err(|e| e.to_string())?;
        let r = verify_pbe(&out, &vo);
        ensure(
            r.passed,
            format!("sequential ({p0}, {pi}) gain {}", r.max_incumbent_gain),
        )?;
        certified.push(out.regime.label());
    }
    for p0 in [0.3, 0.7] {
        let out = solve_simultaneous(&p0, &p, &opts()).map_err(|e| e.to_string())?;
        ensure(verify_pbe(&out, &vo).passed, format!("simultaneous p0 = {p0}"))?;
    }
    let noise = NoiseSpec::new(0.1, 0.2).map_err(|e| e.to_string())?;
    for (p0, pi) in [(0.6, 0.8), (0.6, 0.5), (0.3, 0.9)] {
        let out =
            solve_sequential_noisy(&p0, &pi, &p, &noise, &opts()).map_err(|e| e.to_string())?;
        let r = verify_pbe(&out, &vo);
        ensure(
            r.passed,
            format!("noisy ({p0}, {pi}) gain {}", r.max_incumbent_gain),
        )?;
    }
    let boundary =
        solve_sequential(&0.3, &(5.0 / 7.0), &p, &opts()).map_err(|e| e.to_string())?;
    ensure(
        boundary.regime == Regime::BoundaryMix,
        format!("expected BOUNDARY_MIX, got {}", boundary.regime),
    )?;
    let (lo, hi) = boundary.q_a.interval.ok_or("boundary outcome without interval")?;
    for frac in [0.0, 0.5, 0.9] {
        let rep = boundary
            .with_selection(lo + frac * (hi - lo))
            .map_err(|e| e.to_string())?;
        let r = verify_pbe(&rep, &vo);
        ensure(
            r.passed,
            format!("boundary q = {} gain {}", rep.q_a.selected, r.max_incumbent_gain),
        )?;
    }
    let base = solve_sequential(&0.6, &0.5, &p, &opts()).map_err(|e| e.to_string())?;
    let planted = assessment_with_fight_probability(&base, 1.0, Regime::HighFight)
        .map_err(|e| e.to_string())?;
    let r = verify_pbe(&planted, &vo);
    ensure(!r.passed, "planted candidate was certified")?;
    ensure(
        close(r.max_incumbent_gain, 0.15, 1e-12),
        format!("planted gain {}", r.max_incumbent_gain),
    )?;
    Ok(format!(
        "certified {} sequential, 2 simultaneous, 3 noisy, 3 boundary; planted gain {:.3}",
        certified.len(),
        r.max_incumbent_gain
    ))
}

fn noise_monotonicity() -> Outcome {
    let one = Probability::<Rational>::one();
    let thr = Payoffs::<Rational>::calibration().thresholds();
    let eps: Vec<Rational> = (0..10).map(|i| rat(i, 25)).collect();
    let mut checks = 0;
    for p0 in [rat(1, 5), rat(1, 2), rat(4, 5)] {
        let p0p = Probability::new(p0.clone()).unwrap();
        for qa in [rat(0, 1), rat(1, 3), rat(1, 1)] {
            let qp = Probability::new(qa.clone()).unwrap();
            for fixed in &eps {
                let mut prev: Option<(Rational, Rational, Rational)> = None;
                for e in &eps {
                    let n = NoiseSpec::new(e.clone(), fixed.clone()).unwrap();
                    let post = report_posteriors(&p0p, &qp, &n);
                    let dl = {
                        let (a, f) = noisy_lambdas(&p0p, &one, &qp, &n, &thr);
                        a.into_inner() - f.into_inner()
                    };
                    let pf = post.after_fight_report.value().clone();
                    let pa = post.accommodate_or_convention();
                    // Martingale: the reports average back to the prior.
                    let avg = post.prob_fight_report.clone() * pf.clone()
                        + post.prob_accommodate_report.clone() * pa.clone();
                    if post.after_accommodate_report.is_some() {
                        ensure(avg == p0, format!("martingale fails at eps_f = {e}"))?;
                    }
                    if let Some((ppf, ppa, pdl)) = &prev {
                        ensure(pf <= *ppf, format!("p(F^) rose in eps_f at {e}"))?;
                        ensure(pa >= *ppa || qa == rat(1, 1), format!("p(A^) fell in eps_f at {e}"))?;
                        ensure(dl <= *pdl, format!("delta lambda rose in eps_f at {e}"))?;
                    }
                    checks += 1;
                    prev = Some((pf, pa, dl));
                }
            }
            // eps_A direction.
            for fixed in &eps {
                let mut prev: Option<(Rational, Rational)> = None;
                for e in &eps {
                    let n = NoiseSpec::new(fixed.clone(), e.clone()).unwrap();
                    let post = report_posteriors(&p0p, &qp, &n);
                    let (a, f) = noisy_lambdas(&p0p, &one, &qp, &n, &thr);
                    let dl = a.into_inner() - f.into_inner();
                    let pf = post.after_fight_report.value().clone();
                    if let Some((ppf, pdl)) = &prev {
                        ensure(pf <= *ppf, format!("p(F^) rose in eps_a at {e}"))?;
                        ensure(dl <= *pdl, format!("delta lambda rose in eps_a at {e}"))?;
                    }
                    checks += 1;
                    prev = Some((pf, dl));
                }
            }
        }
        // Noiseless martingale.
        for qa in [rat(0, 1), rat(1, 4), rat(1, 1)] {
            let qp = Probability::new(qa.clone()).unwrap();
            let pf = posterior_after_fight(&p0p, &qp).value().clone();
            let pi_f = p0.clone() + (rat(1, 1) - p0.clone()) * qa;
            ensure(pi_f * pf == p0, "noiseless martingale fails")?;
            checks += 1;
        }
    }
    Ok(format!("{checks} exact checks"))
}

fn noise_vanishing() -> Outcome {
    let p = Payoffs::<f64>::calibration();
    let delta = deterrence_threshold(&p);
    let star = |eps: f64| -> Result<f64, String> {
        let noise = NoiseSpec::new(eps, eps).map_err(|e| e.to_string())?;
        let deters = |pi: f64| -> Result<bool, String> {
            match solve_sequential_noisy(&0.8, &pi, &p, &noise, &opts()) {
                Ok(o) => Ok(o.regime != Regime::LowAccommodate),
                Err(chainstore::Error::NoEquilibrium(_)) => Ok(true),
                Err(e) => Err(e.to_string()),
            }
        };
        if !deters(1.0)? {
            return Ok(1.0);
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        while hi - lo > 1e-6 {
            let mid = 0.5 * (lo + hi);
            if deters(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    };
    let mut gaps = Vec::new();
    for j in 1..=12 {
        let eps = 2f64.powi(-j);
        gaps.push((eps, (star(eps)? - delta).abs()));
    }
    for w in gaps.windows(2) {
        ensure(
            w[1].1 <= w[0].1 + 1e-6,
            format!("gap rose from {:.3e} to {:.3e}", w[0].1, w[1].1),
        )?;
    }
    let (eps, gap) = *gaps.last().unwrap();
    ensure(gap <= 4.0 * eps, format!("final gap {gap:.3e} > 4 eps"))?;
    Ok(format!(
        "|Pi* - Delta| from {:.3e} (eps = 1/2) to {gap:.3e} (eps = {eps:.2e})",
        gaps[0].1
    ))
}

fn simulation() -> Outcome {
    let p = Payoffs::<f64>::calibration();
    let mut worst: f64 = 0.0;
    for &p0 in &GRID_P0 {
        for pi in grid_pi() {
            let out = solve_sequential(&p0, &pi, &p, &opts()).map_err(|e| e.to_string())?;
            let mut cfg = SimulationConfig::new(2, 2, p0, pi, p.clone(), IncumbentPolicy::Threshold);
            cfg.replications = 100_000;
            cfg.seed = 20_240_601;
            let stats = simulate(&cfg).map_err(|e| e.to_string())?;
            let fight = stats.periods[0].fight;
            let entry = stats.periods[1].entry;
            for (what, est, target) in [
                ("period-1 fight", fight, out.fight_probability()),
                ("period-2 entry", entry, out.ex_ante_entry_b),
            ] {
                let z = if est.std_error > 0.0 {
                    (est.mean - target).abs() / est.std_error
                } else {
                    0.0
                };
                worst = worst.max(z);
                ensure(
                    est.covers(target, 3.0),
                    format!(
                        "{what} at ({p0}, {pi:.4}): {:.5} +- {:.5} vs {target:.5}",
                        est.mean, est.std_error
                    ),
                )?;
            }
        }
    }
    let mut cfg = SimulationConfig::new(5, 5, 0.3, 0.6, p, IncumbentPolicy::Constant(0.5));
    cfg.replications = 100_000;
    cfg.seed = 7;
    cfg.entry_mode = EntryMode::Always;
    let stats = simulate(&cfg).map_err(|e| e.to_string())?;
    for s in &stats.periods {
        let bound = s.hazard_upper_bound.ok_or("missing hazard bound")?;
        let est = s.no_public_accommodation;
        ensure(
            est.mean <= bound + 3.0 * est.std_error + 1e-12,
            format!("period {}: {:.5} > bound {bound:.5}", s.period, est.mean),
        )?;
    }
    Ok(format!("18 moments within 3 SE (max |z| = {worst:.2}); hazard bound holds"))
}

fn information_value() -> Outcome {
    let p = Payoffs::<f64>::calibration();
    let voi = value_of_information(
        &AcquisitionProblem::new(0.1, 0.3, 0.0, 0.5, p.clone()).map_err(|e| e.to_string())?,
    );
    let (with, without) = information_values(&0.3, &0.0, &0.5, &p);
    ensure(close(voi, 0.15, 1e-12), format!("VOI = {voi}"))?;
    ensure(
        close(voi, with - without, 1e-12),
        format!("VOI {voi} vs oracle {}", with - without),
    )?;
    let pr = Payoffs::<Rational>::calibration();
    let exact = value_of_information(
        &AcquisitionProblem::new(rat(1, 10), rat(3, 10), rat(0, 1), rat(1, 2), pr)
            .map_err(|e| e.to_string())?,
    );
    ensure(exact == rat(3, 20), format!("exact VOI = {exact}"))?;
    Ok(format!("VOI = {exact}, oracle difference {:.12}", with - without))
}

fn low_prior_sweep() -> Outcome {
    let p = Payoffs::<Rational>::calibration();
    let delta = deterrence_threshold(&p);
    let base = SweepBase {
        p0: rat(3, 10),
        pi: rat(0, 1),
        eps_f: rat(0, 1),
        eps_a: rat(0, 1),
        k: rat(0, 1),
        payoffs: p,
    };
    let axis = Axis::<Rational>::unit(101).map_err(|e| e.to_string())?;
    let so = SolveOptions {
        cmp: chainstore::Comparator::exact(),
        ..opts()
    };
    let res = sweep(SweepAxis::Pi, &axis, &base, &so).map_err(|e| e.to_string())?;
    let mut below = Vec::new();
    let mut all = Vec::new();
    for r in &res.rows {
        let e = r.ex_ante_entry_b.clone().ok_or("missing equilibrium")?;
        if r.x < delta {
            let expect = rat(1, 1) - rat(3, 10) * r.x.clone();
            ensure(e == expect, format!("exAnteEntryB({}) = {e}, expected {expect}", r.x))?;
            below.push(e.clone());
        }
        all.push(e);
    }
    ensure(
        below.windows(2).all(|w| w[1] < w[0]),
        "not strictly decreasing below Delta",
    )?;
    ensure(
        all.windows(2).all(|w| w[1] <= w[0]),
        "not weakly decreasing over the sweep",
    )?;
    Ok(format!(
        "strictly decreasing on {} points below Delta, weakly decreasing on all {}",
        below.len(),
        all.len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("thresholds", thresholds),
        ("high-fight region (rational grid)", high_fight_region),
        ("closed forms vs enumeration", oracle_grid),
        ("equilibrium verification", verification),
        ("noise monotonicity and martingales", noise_monotonicity),
        ("vanishing-noise boundary", noise_vanishing),
        ("simulation moments and hazard bound", simulation),
        ("value of information", information_value),
        ("low-prior observability sweep", low_prior_sweep),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("[PASS] {} {name} ({secs:.2}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {} {name} ({secs:.2}s): {detail}", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
