//! Randomized proportional-share all-pay mechanism for `m` identical units.
//!
//! Bidder `i` receives `x_i = m b_i / sum(b)` units in expectation and pays
//! its bid. The fractional vector is rounded by systematic (circular)
//! rounding, which keeps every `X_i` within `{floor(x_i), ceil(x_i)}` and
//! matches the marginals exactly. Expected utility is then
//! `g_i(b_i / sum(b)) - b_i` for the concave interpolant `g_i` of `f_i`,
//! which makes the mechanism a Kelly game.

use serde::Serialize;

use crate::valuations::{optimal_multiunit, ConcavePl, MultiUnitValuation, NonSubmodular};
use crate::{Error, Result};

/// Tolerance used when validating probabilities and marginals.
pub const ROUNDING_TOL: f64 = 1e-12;

fn check_bids(bids: &[f64]) -> Result<()> {
    if bids.is_empty() {
        return Err(Error::Empty("bid vector"));
    }
    match bids.iter().find(|b| !b.is_finite() || **b < 0.0) {
        Some(&value) => Err(Error::Negative { what: "bid", value }),
        None => Ok(()),
    }
}

/// Proportional shares `m b_i / sum(b)`; all zeros when nobody bids.
pub fn psam_fractional(bids: &[f64], m: usize) -> Result<Vec<f64>> {
    check_bids(bids)?;
    let total: f64 = bids.iter().sum();
    if total == 0.0 {
        return Ok(vec![0.0; bids.len()]);
    }
    Ok(bids.iter().map(|b| m as f64 * b / total).collect())
}

/// A lottery over integral allocations together with its marginals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomAllocation {
    pub fractional: Vec<f64>,
    pub support: Vec<(Vec<usize>, f64)>,
}

impl RandomAllocation {
    /// Builds and validates a lottery.
    pub fn new(fractional: Vec<f64>, support: Vec<(Vec<usize>, f64)>) -> Result<Self> {
        let out = Self { fractional, support };
        out.validate()?;
        Ok(out)
    }

    /// Checks probabilities, per-outcome totals, floor/ceiling entries,
    /// exact marginals, and the support size.
    pub fn validate(&self) -> Result<()> {
        let n = self.fractional.len();
        let total: f64 = self.fractional.iter().sum();
        let m = total.round();
        if self.support.len() > n + 1 {
            return Err(Error::Dimension(format!("support of {} outcomes for {n} players", self.support.len())));
        }
        let mut mass = 0.0;
        let mut marginals = vec![0.0; n];
        for (alloc, p) in &self.support {
            if alloc.len() != n {
                return Err(Error::Dimension(format!("outcome has {} entries, expected {n}", alloc.len())));
            }
            if !(*p >= 0.0) {
                return Err(Error::Negative { what: "probability", value: *p });
            }
            if alloc.iter().sum::<usize>() as f64 != m {
                return Err(Error::InvalidValuation(format!("outcome {alloc:?} does not allocate {m} units")));
            }
            for (i, (&a, &x)) in alloc.iter().zip(&self.fractional).enumerate() {
                let a = a as f64;
                if a < x.floor() - ROUNDING_TOL || a > x.ceil() + ROUNDING_TOL {
                    return Err(Error::OutOfRange { what: "rounded entry", value: a });
                }
                marginals[i] += p * a;
            }
            mass += p;
        }
        if (mass - 1.0).abs() > ROUNDING_TOL {
            return Err(Error::InvalidCdf(format!("probabilities sum to {mass}")));
        }
        for (&got, &want) in marginals.iter().zip(&self.fractional) {
            if (got - want).abs() > ROUNDING_TOL * (1.0 + want.abs()) {
                return Err(Error::InvalidCdf(format!("marginal {got} differs from {want}")));
            }
        }
        Ok(())
    }

    /// Expected value of `h(player, units)` under the lottery.
    pub fn expectation(&self, mut h: impl FnMut(usize, usize) -> f64, player: usize) -> f64 {
        self.support.iter().map(|(alloc, p)| p * h(player, alloc[player])).sum()
    }
}

struct Arcs {
    floors: Vec<usize>,
    /// Cumulative fractional parts; player `i` owns `[ends[i-1], ends[i])`.
    ends: Vec<f64>,
    circumference: usize,
}

impl Arcs {
    fn new(x: &[f64]) -> Result<Self> {
        check_bids(x)?;
        let total: f64 = x.iter().sum();
        if (total - total.round()).abs() > 1e-9 {
            return Err(Error::NonIntegralTotal(total));
        }
        let floors: Vec<usize> = x.iter().map(|v| v.floor() as usize).collect();
        let mut ends = Vec::with_capacity(x.len());
        let mut acc = 0.0;
        for (v, &f) in x.iter().zip(&floors) {
            acc += v - f as f64;
            ends.push(acc);
        }
        let circumference = (total.round() as usize) - floors.iter().sum::<usize>();
        if let Some(last) = ends.last_mut() {
            *last = circumference as f64;
        }
        Ok(Self { floors, ends, circumference })
    }

    /// Outcome for the grid `{u, u + 1, ..., u + k - 1}`.
    fn select(&self, u: f64) -> Vec<usize> {
        let mut out = self.floors.clone();
        let mut start = 0.0;
        for (i, &end) in self.ends.iter().enumerate() {
            // first grid point at or after `start`
            let j = (start - u).ceil().max(0.0);
            if j < self.circumference as f64 && u + j < end {
                out[i] += 1;
            }
            start = end;
        }
        out
    }
}

/// Systematic rounding of `x` (with integral sum): the fractional parts are
/// laid end to end on a circle of circumference `k = sum(frac(x))` and an
/// offset `u ~ U[0, 1)` selects the `k` players whose arcs contain one of
/// `u, u + 1, ..., u + k - 1`. The support enumerates the offset cells.
pub fn dependent_round(x: &[f64]) -> Result<RandomAllocation> {
    let arcs = Arcs::new(x)?;
    let mut cuts: Vec<f64> = arcs.ends.iter().map(|e| e - e.floor()).collect();
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);

    let mut support: Vec<(Vec<usize>, f64)> = Vec::new();
    for w in cuts.windows(2) {
        let width = w[1] - w[0];
        if width <= 0.0 {
            continue;
        }
        let alloc = arcs.select(0.5 * (w[0] + w[1]));
        match support.iter_mut().find(|(a, _)| *a == alloc) {
            Some(entry) => entry.1 += width,
            None => support.push((alloc, width)),
        }
    }
    Ok(RandomAllocation { fractional: x.to_vec(), support })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsamOutcome {
    pub allocation: Vec<usize>,
    pub payments: Vec<f64>,
}

/// Runs the mechanism with rounding offset `u` in `[0, 1)`.
pub fn psam_outcome(bids: &[f64], m: usize, u: f64) -> Result<PsamOutcome> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::OutOfRange { what: "rounding offset", value: u });
    }
    let x = psam_fractional(bids, m)?;
    let allocation = if bids.iter().all(|&b| b == 0.0) { vec![0; bids.len()] } else { Arcs::new(&x)?.select(u) };
    Ok(PsamOutcome { allocation, payments: bids.to_vec() })
}

fn share(bids: &[f64], player: usize) -> f64 {
    let total: f64 = bids.iter().sum();
    if total == 0.0 {
        0.0
    } else {
        bids[player] / total
    }
}

fn concave(f: &MultiUnitValuation, m: usize, player: usize) -> Result<ConcavePl> {
    if !f.is_submodular() {
        return Err(Error::NotSubmodular { player });
    }
    f.to_concave(m)
}

/// Exact expected utility `g(b_i / sum(b)) - b_i`.
pub fn psam_expected_utility(f: &MultiUnitValuation, bids: &[f64], player: usize, m: usize) -> Result<f64> {
    check_bids(bids)?;
    if player >= bids.len() {
        return Err(Error::Dimension(format!("player {player} of {}", bids.len())));
    }
    let g = concave(f, m, player)?;
    Ok(g.eval(share(bids, player)) - bids[player])
}

/// Expected utility computed from the explicit rounding lottery.
pub fn psam_utility_by_rounding(f: &MultiUnitValuation, bids: &[f64], player: usize, m: usize) -> Result<f64> {
    let x = psam_fractional(bids, m)?;
    if player >= bids.len() {
        return Err(Error::Dimension(format!("player {player} of {}", bids.len())));
    }
    if f.units() != m {
        return Err(Error::Dimension(format!("valuation over {} units, expected {m}", f.units())));
    }
    let lottery = dependent_round(&x)?;
    Ok(lottery.expectation(|_, units| f.value(units), player) - bids[player])
}

/// Utility of bidding `b` against opponents bidding `others_total` in
/// aggregate.
pub fn kelly_utility(g: &ConcavePl, b: f64, others_total: f64) -> f64 {
    let total = b + others_total;
    let theta = if total > 0.0 { b / total } else { 0.0 };
    g.eval(theta) - b
}

/// Best bid against aggregate opposing bid `others_total > 0`. On the
/// segment of `g` with slope `c` the utility is `c b / (b + B) - b` plus a
/// constant, maximized at `sqrt(c B) - B`; the best clipped stationary
/// point over all segments wins, with ties going to the smaller bid.
pub fn kelly_best_response(g: &ConcavePl, others_total: f64) -> Result<f64> {
    if !(others_total > 0.0) || !others_total.is_finite() {
        return Err(Error::Degenerate(format!("no best response against total bid {others_total}")));
    }
    let m = g.segments() as f64;
    let bid_at = |theta: f64| if theta >= 1.0 { f64::INFINITY } else { others_total * theta / (1.0 - theta) };
    let mut best = (0.0, kelly_utility(g, 0.0, others_total));
    for k in 0..g.segments() {
        let lo = bid_at(k as f64 / m);
        let hi = bid_at((k + 1) as f64 / m);
        let c = g.slope(k);
        let b = ((c * others_total).sqrt() - others_total).clamp(lo, hi);
        let u = kelly_utility(g, b, others_total);
        if u > best.1 + 1e-15 * (1.0 + best.1.abs()) {
            best = (b, u);
        }
    }
    Ok(best.0)
}

/// Share a player chooses when the aggregate bid (its own included) is `total`.
fn conditional_share(g: &ConcavePl, total: f64) -> f64 {
    let m = g.segments();
    for k in 0..m {
        let c = g.slope(k);
        let lo = k as f64 / m as f64;
        let hi = (k + 1) as f64 / m as f64;
        if total >= c * (1.0 - lo) {
            return lo;
        }
        if total > c * (1.0 - hi) {
            return 1.0 - total / c;
        }
    }
    1.0
}

fn demand(gs: &[ConcavePl], total: f64) -> f64 {
    gs.iter().map(|g| conditional_share(g, total)).sum()
}

fn concave_all(fs: &[MultiUnitValuation], m: usize) -> Result<Vec<ConcavePl>> {
    if fs.is_empty() {
        return Err(Error::Empty("valuation list"));
    }
    fs.iter().enumerate().map(|(i, f)| concave(f, m, i)).collect()
}

/// Pure equilibrium bids. See [`psam_pure_nash_from`].
pub fn psam_pure_nash(fs: &[MultiUnitValuation], m: usize) -> Result<Vec<f64>> {
    psam_pure_nash_from(fs, m, None)
}

/// Pure equilibrium by bisection on the aggregate bid `B`: given `B`, each
/// player's optimal share is `1 - B / c` on the segment where that is
/// feasible (or a breakpoint), and the equilibrium aggregate is the largest
/// `B` at which the shares still cover the whole supply. `bracket` seeds
/// the search and is widened until it brackets the root.
pub fn psam_pure_nash_from(fs: &[MultiUnitValuation], m: usize, bracket: Option<(f64, f64)>) -> Result<Vec<f64>> {
    let gs = concave_all(fs, m)?;
    let active = gs.iter().filter(|g| g.slope(0) > 0.0).count();
    if active < 2 {
        return Err(Error::Degenerate(format!("{active} bidder(s) with positive value; need two")));
    }
    if demand(&gs, 0.0) < 1.0 - 1e-12 {
        return Err(Error::Degenerate("bidders value fewer units than are supplied".into()));
    }
    let top = gs.iter().map(|g| g.slope(0)).fold(0.0, f64::max);
    let (mut lo, mut hi) = bracket.unwrap_or((0.0, top));
    lo = lo.max(0.0);
    while lo > 0.0 && demand(&gs, lo) < 1.0 {
        lo = if lo < 1e-300 { 0.0 } else { lo / 2.0 };
    }
    hi = hi.max(lo);
    while demand(&gs, hi) >= 1.0 {
        hi = if hi == 0.0 { top.max(1e-300) } else { hi * 2.0 };
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if demand(&gs, mid) >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let total = 0.5 * (lo + hi);
    let shares: Vec<f64> = gs.iter().map(|g| conditional_share(g, total)).collect();
    let sum: f64 = shares.iter().sum();
    Ok(shares.iter().map(|s| total * s / sum).collect())
}

/// Largest gain any player can obtain by a unilateral deviation.
pub fn psam_max_regret(fs: &[MultiUnitValuation], m: usize, bids: &[f64]) -> Result<Vec<f64>> {
    check_bids(bids)?;
    let gs = concave_all(fs, m)?;
    if gs.len() != bids.len() {
        return Err(Error::Dimension("one bid per valuation".into()));
    }
    let total: f64 = bids.iter().sum();
    gs.iter()
        .zip(bids)
        .map(|(g, &b)| {
            let rest = total - b;
            let br = kelly_best_response(g, rest)?;
            Ok((kelly_utility(g, br, rest) - kelly_utility(g, b, rest)).max(0.0))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsamEfficiency {
    pub bids: Vec<f64>,
    pub shares: Vec<f64>,
    pub ne_welfare: f64,
    pub opt_welfare: f64,
    pub ratio: f64,
    /// `ratio >= 3/4 - 1e-6`.
    pub meets_bound: bool,
}

/// Welfare of the pure equilibrium against the optimum. Equilibrium welfare
/// is `sum g_i(share_i)`, equal to the expected welfare after rounding.
pub fn psam_efficiency(fs: &[MultiUnitValuation], m: usize) -> Result<PsamEfficiency> {
    let bids = psam_pure_nash(fs, m)?;
    let gs = concave_all(fs, m)?;
    let total: f64 = bids.iter().sum();
    let shares: Vec<f64> = bids.iter().map(|b| m as f64 * b / total).collect();
    let ne_welfare: f64 = gs.iter().zip(&shares).map(|(g, s)| g.eval(s / m as f64)).sum();
    let opt_welfare = optimal_multiunit(fs, m, NonSubmodular::Reject)?.welfare;
    let ratio = ne_welfare / opt_welfare;
    Ok(PsamEfficiency { bids, shares, ne_welfare, opt_welfare, ratio, meets_bound: ratio >= 0.75 - 1e-6 })
}
