use allpay_core::bounds_kernel::{hat_cdf, prop1_min_search, r_lower_bound, r_value};
use allpay_core::mc::estimate;
use allpay_core::multi_unit_psam::{psam_efficiency, psam_max_regret, psam_pure_nash};
use allpay_core::nash_verify::{atom_diagnostic, certify, CertifyConfig, Game, Verdict};
use allpay_core::simultaneous::{
    combined_poa_bound, mc_expected_welfare, product_bkv_profile, validate_inequality_one, validate_inequality_two,
};
use allpay_core::single_item::{
    bkv_unit_equilibrium, bkv_worst_equilibrium, equilibrium_welfare, first_price_worst_case, max_bid_lower_bound_check,
    q_mechanism_equilibrium, revenue_closed_form, welfare_t, PrizeVector, SingleItemInstance,
};
use allpay_core::strategies::DEFAULT_GRID_POINTS;
use allpay_core::valuations::XosValuation;
use allpay_core::{Estimate, Integrand, McConfig, MixedProfile};
use serde::Serialize;
use serde_json::{json, Value};

use crate::scenario::{at, required, Mechanism, Scenario};
use crate::Failure;

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

#[derive(Debug, Serialize)]
pub struct Envelope {
    pub command: &'static str,
    pub version: &'static str,
    pub scenario_hash: String,
    pub seed: Option<u64>,
    pub workers: usize,
    pub result: Value,
    pub checks: Vec<Check>,
    pub passed: bool,
}

pub struct Output {
    pub envelope: Envelope,
    pub csv: Option<String>,
    /// Print the CSV to stdout when no `--csv` path is given.
    pub csv_default_stdout: bool,
}

fn output(command: &'static str, s: &Scenario, result: impl Serialize, checks: Vec<Check>, csv: Option<String>) -> Output {
    let passed = checks.iter().all(|c| c.passed);
    Output {
        envelope: Envelope {
            command,
            version: env!("CARGO_PKG_VERSION"),
            scenario_hash: s.hash(),
            seed: s.seed,
            workers: workers(s),
            result: serde_json::to_value(result).expect("results serialize"),
            checks,
            passed,
        },
        csv,
        csv_default_stdout: false,
    }
}

fn workers(s: &Scenario) -> usize {
    s.workers.unwrap_or(1)
}

/// Monte Carlo settings; any stochastic run needs an explicit seed.
fn mc(s: &Scenario) -> Result<McConfig, Failure> {
    let samples = required(s.samples, "/samples")?;
    let seed = s.seed.ok_or_else(|| Failure::Input("scenario /seed: required for Monte Carlo runs".into()))?;
    if workers(s) == 0 || samples == 0 {
        return Err(Failure::Input("scenario /samples and /workers must be positive".into()));
    }
    Ok(McConfig::new(samples, seed).with_workers(workers(s)))
}

fn instance(s: &Scenario) -> Result<SingleItemInstance, Failure> {
    match &s.values {
        Some(values) => SingleItemInstance::new(values.clone()).map_err(|e| at("/values", e)),
        None => {
            let v = required(s.v, "/v")?;
            SingleItemInstance::top_and_rest(s.n.unwrap_or(2), 1.0, v).map_err(|e| at("/v", e))
        }
    }
}

fn single_item_xos(inst: &SingleItemInstance) -> Vec<XosValuation> {
    inst.values().iter().map(|&x| XosValuation::additive(vec![x]).expect("validated values")).collect()
}

fn grid_size(s: &Scenario) -> usize {
    s.grid_size.unwrap_or(DEFAULT_GRID_POINTS)
}

/// Values strictly inside `(0, 1)`: `k / (steps + 1)`.
fn open_unit_grid(steps: usize) -> impl Iterator<Item = f64> {
    (1..=steps).map(move |k| k as f64 / (steps + 1) as f64)
}

fn mc_agreement(name: &'static str, est: &Estimate, exact: f64, tol: f64) -> Check {
    let diff = (est.mean - exact).abs();
    check(
        name,
        diff <= 4.0 * est.std_error || diff <= tol,
        format!("estimate {} +- {} vs {exact}", est.mean, est.std_error),
    )
}

pub fn single_item_poa(s: &Scenario) -> Result<Output, Failure> {
    let inst = instance(s)?;
    let profile = bkv_worst_equilibrium(&inst, grid_size(s))?;
    let report = equilibrium_welfare(&profile, &inst)?;
    let ratio = inst.v2() / inst.v1();
    let t = if ratio > 0.0 && ratio < 1.0 { Some(welfare_t(ratio)?) } else { None };
    let mut checks = Vec::new();
    let uniform_rest = inst.values()[1..].iter().all(|&x| x == inst.v2());
    if let (Some(t), true) = (t, uniform_rest) {
        let w = report.welfare / inst.v1();
        checks.push(check("welfare at least T(v2/v1)", w >= t - 1e-6, format!("{w} vs {t}")));
    }
    let mut mc_welfare = None;
    if s.samples.is_some() {
        let est = mc_expected_welfare(&profile, &single_item_xos(&inst), &mc(s)?)?;
        checks.push(mc_agreement("monte carlo welfare matches quadrature", &est, report.welfare, s.tol.unwrap_or(0.0)));
        mc_welfare = Some(est);
    }
    let csv = s.csv.as_ref().map(|_| {
        let mut out = String::from("v,T,poa_limit\n");
        for v in open_unit_grid(s.steps.unwrap_or(100)) {
            let t = welfare_t(v).expect("interior v");
            out.push_str(&format!("{v},{t},{}\n", 1.0 / t));
        }
        out
    });
    let result = json!({
        "values": inst.values(),
        "welfare": report,
        "mc_welfare": mc_welfare,
        "mc_price_of_anarchy": mc_welfare.map(|e| report.optimum / e.mean),
        "t": t,
        "poa_limit": t.map(|t| 1.0 / t),
    });
    Ok(output("single-item poa", s, result, checks, csv))
}

fn mc_revenue(profile: &MixedProfile, cfg: &McConfig) -> Result<Estimate, Failure> {
    let n = profile.n_players();
    Ok(estimate(cfg, |rng| {
        let mut bids = vec![0.0; n];
        profile.sample_bids(rng, &mut bids);
        bids.iter().sum()
    })?)
}

pub fn single_item_revenue(s: &Scenario) -> Result<Output, Failure> {
    let v = required(s.v, "/v")?;
    let revenue = revenue_closed_form(v).map_err(|e| at("/v", e))?;
    let mut checks = Vec::new();
    let mut mc_rev = None;
    let n = s.n.unwrap_or(2);
    let profile = bkv_unit_equilibrium(n, v).map_err(|e| at("/n", e))?;
    let exact = profile
        .cdfs()
        .iter()
        .map(|g| g.integrate(0.0, g.support_end(), Integrand::Survival))
        .sum::<Result<f64, _>>()?;
    if s.samples.is_some() {
        let est = mc_revenue(&profile, &mc(s)?)?;
        checks.push(mc_agreement("monte carlo revenue matches quadrature", &est, exact, s.tol.unwrap_or(0.0)));
        mc_rev = Some(est);
    }
    let max_bid = match s.k {
        Some(k) => {
            let inst = SingleItemInstance::top_and_rest(k, 1.0, v).map_err(|e| at("/k", e))?;
            let c = max_bid_lower_bound_check(&inst, k).map_err(|e| at("/k", e))?;
            checks.push(check(
                "expected max bid at least v2/2",
                c.holds,
                format!("{} vs {}", c.expected_max_bid, c.bound),
            ));
            Some(c)
        }
        None => None,
    };
    let prize = match &s.q {
        Some(q) => {
            let q = PrizeVector::new(q.clone()).map_err(|e| at("/q", e))?;
            let eq = q_mechanism_equilibrium(v, &q).map_err(|e| at("/v", e))?;
            checks.push(check(
                "prize-vector revenue below v2/2",
                eq.revenue < v / 2.0,
                format!("{} vs {}", eq.revenue, v / 2.0),
            ));
            let est = match s.samples {
                Some(_) => {
                    let est = mc_revenue(&eq.profile, &mc(s)?)?;
                    checks.push(mc_agreement("monte carlo prize-vector revenue", &est, eq.revenue, s.tol.unwrap_or(0.0)));
                    Some(est)
                }
                None => None,
            };
            Some(json!({
                "q": q,
                "revenue": eq.revenue,
                "expected_max_bid": eq.expected_max_bid,
                "utilities": eq.utilities,
                "mc_revenue": est,
            }))
        }
        None => None,
    };
    let csv = s.csv.as_ref().map(|_| {
        let mut out = String::from("v,revenue,ratio\n");
        for v in open_unit_grid(s.steps.unwrap_or(100)) {
            let r = revenue_closed_form(v).expect("interior v");
            out.push_str(&format!("{v},{r},{}\n", r / v));
        }
        out
    });
    let result = json!({
        "v": v,
        "n": n,
        "revenue": exact,
        "mc_revenue": mc_rev,
        "limit_revenue": revenue,
        "limit_ratio": revenue / v,
        "max_bid": max_bid,
        "prize_vector": prize,
    });
    Ok(output("single-item revenue", s, result, checks, csv))
}

pub fn psam_solve(s: &Scenario) -> Result<Output, Failure> {
    let fs = s.multiunit()?;
    let m = required(s.m, "/m")?;
    let eff = psam_efficiency(&fs, m)?;
    let regret = psam_max_regret(&fs, m, &eff.bids)?;
    let worst = regret.iter().copied().fold(0.0, f64::max);
    let tol = s.tol.unwrap_or(1e-8);
    let checks = vec![
        check("efficiency at least 3/4", eff.meets_bound, format!("ratio {}", eff.ratio)),
        check("bids are a pure equilibrium", worst <= tol, format!("max regret {worst}")),
    ];
    let result = json!({ "efficiency": eff, "regret": regret });
    Ok(output("psam solve", s, result, checks, None))
}

pub fn simul_validate(s: &Scenario) -> Result<Output, Failure> {
    let vals = s.xos()?;
    let profile = product_bkv_profile(&vals, grid_size(s)).map_err(|e| at("/valuations", e))?;
    let cfg = mc(s)?;
    let one = validate_inequality_one(&profile, &vals, &cfg)?;
    let two = validate_inequality_two(&profile, &vals, &cfg)?;
    let checks = vec![
        check("survival inequality", one.holds, format!("slack {} (sigma {})", one.slack, one.lhs.std_error)),
        check("square-root inequality", two.holds, format!("slack {} (sigma {})", two.slack, two.lhs.std_error)),
    ];
    Ok(output("simul validate", s, json!({ "survival": one, "sqrt": two }), checks, None))
}

pub fn bounds_prop1(s: &Scenario) -> Result<Output, Failure> {
    let n = s.n.unwrap_or(10);
    let target = s.target.unwrap_or(0.25);
    let seed = s.seed.ok_or_else(|| Failure::Input("scenario /seed: required for random restarts".into()))?;
    let search = prop1_min_search(n, target, s.starts.unwrap_or(64), seed)?;
    let checks = vec![check(
        "minimum at least sqrt of the product",
        search.min >= search.sqrt_target - 1e-9,
        format!("{} vs {}", search.min, search.sqrt_target),
    )];
    Ok(output("bounds prop1", s, search, checks, None))
}

pub fn bounds_rfv(s: &Scenario) -> Result<Output, Failure> {
    let v = s.v.unwrap_or(1.0);
    let lambda = s.lambda.unwrap_or(0.56);
    let steps = s.steps.unwrap_or(50).max(1);
    let bound = r_lower_bound(lambda).map_err(|e| at("/lambda", e))?;
    if v.is_nan() || v <= 0.0 {
        return Err(at("/v", format!("must be positive, got {v}")));
    }
    let t = lambda * lambda * v;
    let mut rows = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let a = t * i as f64 / steps as f64;
        let x0 = (t - a).max(0.0);
        let r = r_value(&hat_cdf(v, a, x0)?, v, lambda)?;
        rows.push((a, x0, r.r / v));
    }
    let worst = rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    let gap = rows.iter().map(|r| (r.2 - bound).abs()).fold(0.0, f64::max);
    let checks = vec![check("R(F, v) / v at least the bound", worst >= bound - 1e-9, format!("{worst} vs {bound}"))];
    let csv = s.csv.as_ref().map(|_| {
        let mut out = String::from("a,x0,r_over_v,bound\n");
        for (a, x0, r) in &rows {
            out.push_str(&format!("{a},{x0},{r},{bound}\n"));
        }
        out
    });
    let result = json!({ "v": v, "lambda": lambda, "bound": bound, "min_ratio": worst, "max_gap": gap });
    Ok(output("bounds rfv", s, result, checks, csv))
}

pub fn bounds_lambda(s: &Scenario) -> Result<Output, Failure> {
    let lo = s.lambda_min.unwrap_or(0.01);
    let hi = s.lambda_max.unwrap_or(1.0);
    let steps = s.steps.unwrap_or(200);
    if !(0.0..=1.0).contains(&lo) || !(lo..=1.0).contains(&hi) || steps == 0 {
        return Err(Failure::Input(format!("lambda grid [{lo}, {hi}] with {steps} steps")));
    }
    let points = (0..=steps)
        .map(|k| {
            let l = lo + (hi - lo) * k as f64 / steps as f64;
            combined_poa_bound(l).map(|b| (l, b))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let &(argmin, min) = points.iter().min_by(|a, b| a.1.total_cmp(&b.1)).expect("nonempty");
    let checks = vec![check(
        "bound finite and at least 1",
        points.iter().all(|p| p.1.is_finite() && p.1 >= 1.0),
        format!("min {min} at {argmin}"),
    )];
    let mut csv = String::from("lambda,poa_bound\n");
    for (l, b) in &points {
        csv.push_str(&format!("{l},{b}\n"));
    }
    let mut out = output("bounds lambda", s, json!({ "argmin": argmin, "min": min, "points": points.len() }), checks, Some(csv));
    out.csv_default_stdout = true;
    Ok(out)
}

pub fn verify(s: &Scenario) -> Result<Output, Failure> {
    let mechanism = required(s.mechanism, "/mechanism")?;
    let game = match mechanism {
        Mechanism::SingleItem => {
            let inst = instance(s)?;
            let profile = bkv_worst_equilibrium(&inst, grid_size(s))?;
            Game::SingleAllPay { values: inst.values().to_vec(), prizes: None, profile }
        }
        Mechanism::PrizeVector => {
            let q = PrizeVector::new(required(s.q.clone(), "/q")?).map_err(|e| at("/q", e))?;
            let eq = q_mechanism_equilibrium(required(s.v, "/v")?, &q).map_err(|e| at("/v", e))?;
            Game::SingleAllPay { values: eq.values, prizes: Some(q), profile: eq.profile }
        }
        Mechanism::FirstPrice => {
            let inst = instance(s)?;
            let bids = match &s.bids {
                Some(b) => b.clone(),
                None => first_price_worst_case(&inst)?.bids,
            };
            Game::FirstPrice { values: inst.values().to_vec(), bids }
        }
        Mechanism::Simultaneous => {
            let valuations = s.xos()?;
            let profile = product_bkv_profile(&valuations, grid_size(s)).map_err(|e| at("/valuations", e))?;
            Game::SimultaneousAllPay { valuations, profile }
        }
        Mechanism::Psam => {
            let valuations = s.multiunit()?;
            let units = required(s.m, "/m")?;
            let bids = match &s.bids {
                Some(b) => b.clone(),
                None => psam_pure_nash(&valuations, units)?,
            };
            Game::Psam { valuations, units, bids }
        }
        Mechanism::Bounds => return Err(at("/mechanism", "bounds scenarios have no equilibrium to certify")),
    };
    let mc_cfg = match game {
        Game::FirstPrice { .. } | Game::Psam { .. } => McConfig::new(1, s.seed.unwrap_or(0)),
        _ => mc(s)?,
    };
    let mut cfg = CertifyConfig::for_game(&game, mc_cfg);
    if let Some(g) = s.grid_size {
        cfg.grid_size = g;
    }
    if let Some(eps) = s.tol {
        cfg.eps = eps;
    }
    let cert = certify(&game, &cfg)?;
    let mut checks = vec![check(
        "no profitable deviation in the family",
        cert.verdict == Verdict::Certified,
        format!("{:?}", cert.verdict),
    )];
    let atoms = match &game {
        Game::SingleAllPay { profile, .. } | Game::SimultaneousAllPay { profile, .. } => {
            let r = atom_diagnostic(profile);
            checks.push(check("no atoms at positive bids", r.clean, format!("{} flagged", r.flagged.len())));
            Some(r)
        }
        _ => None,
    };
    Ok(output("verify", s, json!({ "certificate": cert, "atoms": atoms }), checks, None))
}
