//! Simultaneous all-pay item bidding with XOS bidders.
//!
//! Every item goes to its highest bidder and every bidder pays all of its
//! bids. The welfare inequalities are evaluated on product-form mixed
//! profiles: the left side by Monte Carlo, the right side analytically
//! from the tabulated CDFs.

use rand::Rng;
use serde::Serialize;

use crate::mc::{estimate, estimate_many, Estimate, McConfig, SimRng};
use crate::single_item::{bkv_worst_equilibrium, outranks, SingleItemInstance};
use crate::strategies::{Integrand, MixedProfile, PiecewiseCdf};
use crate::valuations::{optimal_combinatorial, CombinatorialOptimum, ItemSet, XosValuation};
use crate::{Error, Result};

/// How ties for the highest bid are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum TieRule {
    #[default]
    LowestIndex,
    /// Uniformly among the tied bidders.
    UniformRandom,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuctionOutcome {
    /// Winner of each item.
    pub allocation: Vec<usize>,
    pub payments: Vec<f64>,
}

/// Runs the auction on an `n x m` bid matrix with lowest-index ties.
pub fn run_auction(bids: &[Vec<f64>]) -> Result<AuctionOutcome> {
    let n = bids.len();
    if n == 0 {
        return Err(Error::Empty("bid matrix"));
    }
    let m = bids[0].len();
    if m == 0 || bids.iter().any(|row| row.len() != m) {
        return Err(Error::Dimension("bid matrix rows must share a positive length".into()));
    }
    if let Some(&value) = bids.iter().flatten().find(|b| !b.is_finite() || **b < 0.0) {
        return Err(Error::Negative { what: "bid", value });
    }
    let flat: Vec<f64> = bids.iter().flatten().copied().collect();
    let mut allocation = vec![0; m];
    winners(&flat, n, m, TieRule::LowestIndex, None, &mut allocation);
    let payments = bids.iter().map(|row| row.iter().sum()).collect();
    Ok(AuctionOutcome { allocation, payments })
}

/// Winner per item for a row-major bid matrix.
fn winners(bids: &[f64], n: usize, m: usize, tie: TieRule, mut rng: Option<&mut SimRng>, out: &mut [usize]) {
    for (j, slot) in out.iter_mut().enumerate().take(m) {
        let mut best = 0;
        let mut tied = 1u32;
        for i in 1..n {
            let (b, top) = (bids[i * m + j], bids[best * m + j]);
            if b > top {
                best = i;
                tied = 1;
            } else if b == top && tie == TieRule::UniformRandom {
                // reservoir choice among equal bids
                tied += 1;
                if let Some(r) = rng.as_deref_mut() {
                    if r.gen_range(0..tied) == 0 {
                        best = i;
                    }
                }
            }
        }
        *slot = best;
    }
}

fn check_instance(profile: &MixedProfile, valuations: &[XosValuation]) -> Result<()> {
    if valuations.len() != profile.n_players() {
        return Err(Error::Dimension(format!(
            "{} valuations for {} players",
            valuations.len(),
            profile.n_players()
        )));
    }
    if let Some(v) = valuations.iter().find(|v| v.n_items() != profile.n_items()) {
        return Err(Error::Dimension(format!("valuation over {} items, profile has {}", v.n_items(), profile.n_items())));
    }
    Ok(())
}

/// Monte Carlo estimate of expected welfare with lowest-index ties.
pub fn mc_expected_welfare(profile: &MixedProfile, valuations: &[XosValuation], cfg: &McConfig) -> Result<Estimate> {
    mc_expected_welfare_with(profile, valuations, cfg, TieRule::LowestIndex)
}

pub fn mc_expected_welfare_with(
    profile: &MixedProfile,
    valuations: &[XosValuation],
    cfg: &McConfig,
    tie: TieRule,
) -> Result<Estimate> {
    check_instance(profile, valuations)?;
    let (n, m) = (profile.n_players(), profile.n_items());
    estimate(cfg, |rng| {
        let mut bids = vec![0.0; n * m];
        let mut won = vec![0; m];
        profile.sample_bids(rng, &mut bids);
        winners(&bids, n, m, tie, Some(rng), &mut won);
        let mut bundles = vec![ItemSet::EMPTY; n];
        for (j, &i) in won.iter().enumerate() {
            bundles[i] = bundles[i].with(j);
        }
        bundles.iter().zip(valuations).map(|(&s, v)| v.value_unchecked(s)).sum()
    })
}

/// Product of independent single-item equilibria, one per item, for
/// additive bidders. Item `j` uses the worst-case equilibrium of the values
/// `v_ij` sorted in decreasing order (ties keep player order).
pub fn product_bkv_profile(valuations: &[XosValuation], grid_points: usize) -> Result<MixedProfile> {
    let n = valuations.len();
    if n < 2 {
        return Err(Error::Degenerate("product profile needs two bidders".into()));
    }
    if let Some(i) = valuations.iter().position(|v| !v.is_additive()) {
        return Err(Error::InvalidValuation(format!("bidder {i} is not additive")));
    }
    let m = valuations[0].n_items();
    if valuations.iter().any(|v| v.n_items() != m) {
        return Err(Error::Dimension("valuations over different item counts".into()));
    }
    let mut cdfs = vec![PiecewiseCdf::zero_bid(); n * m];
    for j in 0..m {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| valuations[b].clauses()[0][j].total_cmp(&valuations[a].clauses()[0][j]));
        let sorted: Vec<f64> = order.iter().map(|&i| valuations[i].clauses()[0][j]).collect();
        if sorted[1] <= 0.0 {
            return Err(Error::Degenerate(format!("item {j} has fewer than two bidders with positive value")));
        }
        let column = bkv_worst_equilibrium(&SingleItemInstance::new(sorted)?, grid_points)?;
        for (pos, &i) in order.iter().enumerate() {
            cdfs[i * m + j] = column.cdf(pos, 0).clone();
        }
    }
    MixedProfile::new(n, m, cdfs)
}

/// `max_x F(x) o - x` and its smallest maximizer. `F` is linear between
/// knots, so the knots and `0` are the only candidates.
pub fn compute_aj(f: &PiecewiseCdf, o: f64) -> Result<(f64, f64)> {
    if !(o >= 0.0) {
        return Err(Error::Negative { what: "item contribution", value: o });
    }
    let mut best = (f.at(0.0) * o, 0.0);
    for &x in f.grid() {
        let val = f.at(x) * o - x;
        if val > best.0 {
            best = (val, x);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItemTerm {
    pub item: usize,
    /// Bidder receiving the item in the optimum.
    pub owner: usize,
    pub o: f64,
    pub a: f64,
    pub a_argmax: f64,
    /// Upper integration limit `max(o - A, 0)`.
    pub limit: f64,
    pub term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub lhs: Estimate,
    pub rhs: f64,
    pub slack: f64,
    /// `slack >= -3 std_error`.
    pub holds: bool,
    pub terms: Vec<ItemTerm>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Copy)]
enum Inequality {
    Survival,
    Sqrt,
}

fn validate(
    profile: &MixedProfile,
    valuations: &[XosValuation],
    cfg: &McConfig,
    which: Inequality,
) -> Result<InequalityReport> {
    check_instance(profile, valuations)?;
    let opt = optimal_combinatorial(valuations)?;
    let mut terms = Vec::new();
    let mut warnings = Vec::new();
    for j in 0..profile.n_items() {
        let (owner, o) = (opt.assignment[j], opt.item_contribution[j]);
        if o <= 0.0 {
            continue;
        }
        let (a, a_argmax) = compute_aj(&profile.others_max_cdf(owner, j)?, o)?;
        let mut limit = o - a;
        if limit < 0.0 {
            warnings.push(format!("item {j}: o - A = {limit:e} clipped to 0"));
            limit = 0.0;
        }
        let fj = profile.max_bid_cdf(j)?;
        let term = match which {
            Inequality::Survival => a + fj.integrate(0.0, limit, Integrand::Survival)?,
            Inequality::Sqrt => fj.integrate(0.0, limit, Integrand::Sqrt)?,
        };
        terms.push(ItemTerm { item: j, owner, o, a, a_argmax, limit, term });
    }
    let rhs = terms.iter().map(|t| t.term).sum();
    let lhs = mc_expected_welfare(profile, valuations, cfg)?;
    let slack = lhs.mean - rhs;
    Ok(InequalityReport { lhs, rhs, slack, holds: slack >= -3.0 * lhs.std_error, terms, warnings })
}

/// `SW >= sum_j (A_j + int_0^{o_j - A_j} (1 - F_j))`.
pub fn validate_inequality_one(
    profile: &MixedProfile,
    valuations: &[XosValuation],
    cfg: &McConfig,
) -> Result<InequalityReport> {
    validate(profile, valuations, cfg, Inequality::Survival)
}

/// `SW >= sum_j int_0^{o_j - A_j} sqrt(F_j)`.
pub fn validate_inequality_two(
    profile: &MixedProfile,
    valuations: &[XosValuation],
    cfg: &McConfig,
) -> Result<InequalityReport> {
    validate(profile, valuations, cfg, Inequality::Sqrt)
}

/// Upper bound `(6 lambda + 6) / (3 + 4 lambda - lambda^4)` on the price of
/// anarchy obtained by mixing the two inequalities with weight `lambda`.
pub fn combined_poa_bound(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::OutOfRange { what: "lambda", value: lambda });
    }
    let den = 3.0 + 4.0 * lambda - lambda.powi(4);
    if den <= 0.0 {
        return Err(Error::Degenerate(format!("denominator {den} at lambda = {lambda}")));
    }
    Ok((6.0 * lambda + 6.0) / den)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaScan {
    pub points: Vec<(f64, f64)>,
    pub argmin: f64,
    pub min: f64,
}

/// Evaluates [`combined_poa_bound`] on `points` evenly spaced values in
/// `(lo, hi]`.
pub fn lambda_scan(lo: f64, hi: f64, points: usize) -> Result<LambdaScan> {
    if !(hi > lo) || lo < 0.0 || points == 0 {
        return Err(Error::ReversedBounds { a: lo, b: hi });
    }
    let step = (hi - lo) / points as f64;
    let points = (1..=points)
        .map(|k| {
            let l = lo + step * k as f64;
            combined_poa_bound(l).map(|b| (l, b))
        })
        .collect::<Result<Vec<_>>>()?;
    let &(argmin, min) = points.iter().min_by(|a, b| a.1.total_cmp(&b.1)).expect("nonempty");
    Ok(LambdaScan { points, argmin, min })
}

/// Deviations tried by [`best_response_regret`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DeviationFamily {
    /// Every bid vector on a `points`-level grid per item, from 0 to the
    /// highest opposing bid on that item.
    PerItemGrid { points: usize },
    /// On each item of the bidder's optimal bundle, the bid maximizing
    /// `F_ij(x) o_j - x`; nothing elsewhere.
    OptimalBundle,
}

/// Largest number of deviation vectors evaluated at once.
pub const MAX_DEVIATIONS: usize = 4096;

const PHI_LEVELS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretReport {
    pub player: usize,
    /// Gain of the best deviation over the profile's own bids, estimated
    /// with common random numbers.
    pub regret: Estimate,
    pub best_deviation: Vec<f64>,
    pub baseline_utility: Estimate,
    pub deviations: usize,
    /// Per item, the largest gap between the empirical winning frequency of
    /// a fixed bid and `F_ij` at that bid; `None` when `F_ij` has no table.
    pub phi_divergence: Vec<Option<f64>>,
}

fn deviation_set(
    profile: &MixedProfile,
    player: usize,
    family: DeviationFamily,
    opt: &CombinatorialOptimum,
) -> Result<Vec<Vec<f64>>> {
    let m = profile.n_items();
    match family {
        DeviationFamily::PerItemGrid { points } => {
            let points = points.max(2);
            let total = (points as f64).powi(m as i32);
            if total > MAX_DEVIATIONS as f64 {
                return Err(Error::TooLarge { size: total, limit: MAX_DEVIATIONS as f64 });
            }
            let levels: Vec<Vec<f64>> = (0..m)
                .map(|j| {
                    let h = opposing_top(profile, player, j);
                    (0..points).map(|k| h * k as f64 / (points - 1) as f64).collect()
                })
                .collect();
            let mut out = Vec::with_capacity(total as usize);
            let mut idx = vec![0usize; m];
            loop {
                out.push(idx.iter().enumerate().map(|(j, &k)| levels[j][k]).collect());
                let mut j = m;
                loop {
                    if j == 0 {
                        return Ok(out);
                    }
                    j -= 1;
                    idx[j] += 1;
                    if idx[j] < points {
                        break;
                    }
                    idx[j] = 0;
                }
            }
        }
        DeviationFamily::OptimalBundle => {
            let mut bids = vec![0.0; m];
            for j in opt.bundles[player].iter() {
                let o = opt.item_contribution[j];
                bids[j] = compute_aj(&profile.others_max_cdf(player, j)?, o)?.1;
            }
            Ok(vec![bids])
        }
    }
}

/// Highest bid any opponent can place on `item` (a tiny positive bid when
/// they all bid 0, so that winning outright stays reachable).
fn opposing_top(profile: &MixedProfile, player: usize, item: usize) -> f64 {
    let h = (0..profile.n_players())
        .filter(|&k| k != player)
        .map(|k| profile.cdf(k, item).support_end())
        .fold(0.0, f64::max);
    if h > 0.0 {
        h
    } else {
        1e-9
    }
}

/// Estimated gain of the best deviation in `family` for `player`. The
/// certificate is relative to the family: bid vectors outside it are not
/// examined.
pub fn best_response_regret(
    profile: &MixedProfile,
    valuations: &[XosValuation],
    player: usize,
    family: DeviationFamily,
    cfg: &McConfig,
) -> Result<RegretReport> {
    check_instance(profile, valuations)?;
    let (n, m) = (profile.n_players(), profile.n_items());
    if player >= n {
        return Err(Error::Dimension(format!("player {player} of {n}")));
    }
    let opt = optimal_combinatorial(valuations)?;
    let deviations = deviation_set(profile, player, family, &opt)?;
    let phi_levels: Vec<Vec<f64>> = (0..m)
        .map(|j| {
            let h = opposing_top(profile, player, j);
            (1..=PHI_LEVELS).map(|k| h * k as f64 / PHI_LEVELS as f64).collect()
        })
        .collect();
    let v = &valuations[player];
    let k = deviations.len();
    let dims = 1 + k + m * PHI_LEVELS;
    let est = estimate_many(cfg, dims, |rng, out| {
        let mut bids = vec![0.0; n * m];
        profile.sample_bids(rng, &mut bids);
        // highest opposing bid per item and its owner
        let top: Vec<(f64, usize)> = (0..m)
            .map(|j| {
                let mut best = (f64::NEG_INFINITY, usize::MAX);
                for i in (0..n).filter(|&i| i != player) {
                    if best.1 == usize::MAX || outranks(bids[i * m + j], i, best.0, best.1) {
                        best = (bids[i * m + j], i);
                    }
                }
                best
            })
            .collect();
        let utility = |own: &[f64]| {
            let mut won = ItemSet::EMPTY;
            for (j, &(h, owner)) in top.iter().enumerate() {
                if owner == usize::MAX || outranks(own[j], player, h, owner) {
                    won = won.with(j);
                }
            }
            v.value_unchecked(won) - own.iter().sum::<f64>()
        };
        let base = utility(&bids[player * m..(player + 1) * m]);
        out[0] = base;
        for (slot, d) in out[1..=k].iter_mut().zip(&deviations) {
            *slot = utility(d) - base;
        }
        let phi = &mut out[1 + k..];
        for (j, levels) in phi_levels.iter().enumerate() {
            let (h, owner) = top[j];
            for (l, &x) in levels.iter().enumerate() {
                let wins = owner == usize::MAX || outranks(x, player, h, owner);
                phi[j * PHI_LEVELS + l] = f64::from(u8::from(wins));
            }
        }
    })?;
    let (best, regret) = est[1..=k]
        .iter()
        .enumerate()
        .fold((0, est[1]), |acc, (d, e)| if e.mean > acc.1.mean { (d, *e) } else { acc });
    let phi_divergence = (0..m)
        .map(|j| {
            profile.others_max_cdf(player, j).ok().map(|f| {
                phi_levels[j]
                    .iter()
                    .enumerate()
                    .map(|(l, &x)| (est[1 + k + j * PHI_LEVELS + l].mean - f.at(x)).abs())
                    .fold(0.0, f64::max)
            })
        })
        .collect();
    Ok(RegretReport {
        player,
        regret,
        best_deviation: deviations[best].clone(),
        baseline_utility: est[0],
        deviations: k,
        phi_divergence,
    })
}
