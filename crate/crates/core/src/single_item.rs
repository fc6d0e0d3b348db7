//! Single-item all-pay auctions.
//!
//! Constructors work with the top value normalized to 1 and rescale bids
//! by the actual top value. Ties are won by the lowest player index.

use serde::{Deserialize, Serialize};

use crate::strategies::{expected_max_bid, Integrand, MixedProfile, PiecewiseCdf, DEFAULT_GRID_POINTS};
use crate::{Error, Result};

/// Values sorted from highest to lowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleItemInstance {
    values: Vec<f64>,
}

impl SingleItemInstance {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("single-item values"));
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Negative { what: "value", value: bad });
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidValuation("values must be sorted nonincreasing".into()));
        }
        Ok(Self { values })
    }

    /// `n` players: one with value `top`, the rest with value `rest`.
    pub fn top_and_rest(n: usize, top: f64, rest: f64) -> Result<Self> {
        let mut values = vec![rest; n];
        if let Some(first) = values.first_mut() {
            *first = top;
        }
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_players(&self) -> usize {
        self.values.len()
    }

    pub fn v1(&self) -> f64 {
        self.values[0]
    }

    pub fn v2(&self) -> f64 {
        self.values.get(1).copied().unwrap_or(0.0)
    }

    /// Players sharing the second-highest value (indices `1..k`).
    fn participants(&self) -> usize {
        let v2 = self.v2();
        1 + self.values[1..].iter().take_while(|&&v| (v - v2).abs() <= 1e-12 * self.v1()).count()
    }
}

/// Worst-case equilibrium in which player 1 faces `k - 1` symmetric
/// opponents of value `v2` (everyone below `v2` bids 0):
///
/// `G_1(x) = x / (v (1 - v + x)^((k-2)/(k-1)))`,
/// `G_i(x) = (1 - v + x)^(1/(k-1))` on `[0, v]`, with `v = v2 / v1`.
pub fn bkv_worst_equilibrium(inst: &SingleItemInstance, grid_points: usize) -> Result<MixedProfile> {
    let n = inst.n_players();
    if n < 2 {
        return Err(Error::Degenerate("single-item equilibrium needs two players".into()));
    }
    let scale = inst.v1();
    let v = inst.v2() / scale;
    if !(v > 0.0 && v <= 1.0) {
        return Err(Error::OutOfRange { what: "second value ratio v2/v1", value: v });
    }
    let k = inst.participants();
    let others = (k - 1) as f64;
    let top_exp = (k as f64 - 2.0) / others;
    let top = PiecewiseCdf::tabulate(
        |x| {
            let x = x / scale;
            if x == 0.0 {
                0.0
            } else {
                x / (v * (1.0 - v + x).powf(top_exp))
            }
        },
        v * scale,
        grid_points,
    )?
    .tagged(format!("bkv-top(k={k},v={v})"));
    let rest = PiecewiseCdf::tabulate(|x| (1.0 - v + x / scale).powf(1.0 / others), v * scale, grid_points)?
        .tagged(format!("bkv-symmetric(k={k},v={v})"));
    let mut cdfs = Vec::with_capacity(n);
    cdfs.push(top);
    cdfs.extend(std::iter::repeat_n(rest, k - 1));
    cdfs.extend(std::iter::repeat_n(PiecewiseCdf::zero_bid(), n - k));
    MixedProfile::single_item(cdfs)
}

/// [`bkv_worst_equilibrium`] for `v1 = 1` and `n - 1` opponents of value `v`.
pub fn bkv_unit_equilibrium(n: usize, v: f64) -> Result<MixedProfile> {
    if !(v > 0.0 && v <= 1.0) {
        return Err(Error::OutOfRange { what: "v", value: v });
    }
    bkv_worst_equilibrium(&SingleItemInstance::top_and_rest(n, 1.0, v)?, DEFAULT_GRID_POINTS)
}

/// Limit welfare `T(v) = (1-v)^2/v * ln(1/(1-v)) + v` of the worst-case
/// equilibrium as the number of players grows (optimum normalized to 1).
pub fn welfare_t(v: f64) -> Result<f64> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::OutOfRange { what: "v", value: v });
    }
    Ok((1.0 - v).powi(2) / v * (1.0 / (1.0 - v)).ln() + v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WelfareReport {
    /// Probability that the top-valued player wins.
    pub top_win_probability: f64,
    pub welfare: f64,
    pub optimum: f64,
    pub price_of_anarchy: f64,
}

/// Welfare of a profile built by [`bkv_worst_equilibrium`]:
/// `v1 P1 + v2 (1 - P1)` with `P1 = int H dG_1`, where `H` is the CDF of
/// the highest opposing bid. The Stieltjes integral is a trapezoid rule on
/// `G_1`'s table, refined by halving until it moves less than `1e-6`.
pub fn equilibrium_welfare(profile: &MixedProfile, inst: &SingleItemInstance) -> Result<WelfareReport> {
    if profile.n_items() != 1 || profile.n_players() != inst.n_players() {
        return Err(Error::Dimension("profile does not match instance".into()));
    }
    let g1 = profile.cdf(0, 0);
    let others: Vec<&PiecewiseCdf> = (1..profile.n_players()).map(|i| profile.cdf(i, 0)).collect();
    let h = |x: f64| others.iter().map(|c| c.at(x)).product::<f64>();

    let stieltjes = |level: u32| -> f64 {
        let parts = 1usize << level;
        // ties at zero go to player 1
        let mut p = g1.atom_at_zero() * h(0.0);
        let grid = g1.grid();
        let values = g1.values();
        if grid[0] > 0.0 {
            p += (values[0] - g1.atom_at_zero()) * h(grid[0]);
        }
        for k in 1..grid.len() {
            let (x0, x1) = (grid[k - 1], grid[k]);
            let dg = (values[k] - values[k - 1]) / parts as f64;
            if dg == 0.0 {
                continue;
            }
            let dx = (x1 - x0) / parts as f64;
            let mut h_prev = h(x0);
            for s in 1..=parts {
                let h_next = h(if s == parts { x1 } else { x0 + dx * s as f64 });
                p += dg * 0.5 * (h_prev + h_next);
                h_prev = h_next;
            }
        }
        p
    };

    let mut level = 0;
    let mut p1 = stieltjes(level);
    loop {
        level += 1;
        let next = stieltjes(level);
        let done = (next - p1).abs() < 1e-6 || level >= 8;
        p1 = next;
        if done {
            break;
        }
    }
    let welfare = inst.v1() * p1 + inst.v2() * (1.0 - p1);
    Ok(WelfareReport {
        top_win_probability: p1,
        welfare,
        optimum: inst.v1(),
        price_of_anarchy: inst.v1() / welfare,
    })
}

/// Revenue of the worst-case equilibrium with `v1 = 1`, `v2 = v`, as the
/// number of symmetric opponents grows:
/// `v - (1 - v)(1 + (1 - v)/v * ln(1 - v))`.
pub fn revenue_closed_form(v: f64) -> Result<f64> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::OutOfRange { what: "v", value: v });
    }
    Ok(v - (1.0 - v) * (1.0 + (1.0 - v) / v * (1.0 - v).ln()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxBidCheck {
    pub expected_max_bid: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Expected highest bid when `k` players (player 1 plus `k - 1` symmetric
/// opponents at `v2`) are active:
/// `F(x) = (x / v2) ((v1 - v2 + x) / v1)^(1/(k-1))` on `[0, v2]`.
/// Checks it against `v2 / 2`.
pub fn max_bid_lower_bound_check(inst: &SingleItemInstance, k: usize) -> Result<MaxBidCheck> {
    if k < 2 {
        return Err(Error::OutOfRange { what: "symmetric player count", value: k as f64 });
    }
    let (v1, v2) = (inst.v1(), inst.v2());
    if v2 <= 0.0 {
        return Err(Error::Degenerate("second value must be positive".into()));
    }
    let exponent = 1.0 / (k as f64 - 1.0);
    let f = PiecewiseCdf::tabulate(|x| x / v2 * ((v1 - v2 + x) / v1).powf(exponent), v2, DEFAULT_GRID_POINTS)?;
    let expected = f.integrate(0.0, v2, Integrand::Survival)?;
    let bound = v2 / 2.0;
    Ok(MaxBidCheck { expected_max_bid: expected, bound, holds: expected >= bound - 1e-9 })
}

/// Allocation probabilities by rank: `q[r]` goes to the `r`-th highest bid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PrizeVector {
    q: Vec<f64>,
}

impl TryFrom<Vec<f64>> for PrizeVector {
    type Error = Error;

    fn try_from(q: Vec<f64>) -> Result<Self> {
        Self::new(q)
    }
}

impl From<PrizeVector> for Vec<f64> {
    fn from(p: PrizeVector) -> Self {
        p.q
    }
}

impl PrizeVector {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if q.len() < 2 {
            return Err(Error::InvalidPrizes("need at least two ranks".into()));
        }
        if q.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidPrizes("probabilities must lie in [0, 1]".into()));
        }
        let total: f64 = q.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidPrizes(format!("probabilities sum to {total}")));
        }
        if q[1] >= q[0] {
            return Err(Error::InvalidPrizes(format!("q2 = {} must be below q1 = {}", q[1], q[0])));
        }
        Ok(Self { q })
    }

    pub fn winner_take_all(n: usize) -> Self {
        let mut q = vec![0.0; n.max(2)];
        q[0] = 1.0;
        Self { q }
    }

    pub fn ranks(&self) -> usize {
        self.q.len()
    }

    pub fn q1(&self) -> f64 {
        self.q[0]
    }

    pub fn q2(&self) -> f64 {
        self.q[1]
    }

    /// Probability of receiving the item at `rank` (0 = highest bid).
    pub fn prize(&self, rank: usize) -> f64 {
        self.q.get(rank).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QEquilibrium {
    pub values: Vec<f64>,
    pub profile: MixedProfile,
    pub revenue: f64,
    pub expected_max_bid: f64,
    /// Equilibrium utilities of the two active players.
    pub utilities: [f64; 2],
}

/// Equilibrium of the prize-vector all-pay mechanism with values
/// `(1, v, 0, ..., 0)`: players 1 and 2 mix on `[0, v (q1 - q2)]` with
/// `G_1(x) = x / (v (q1 - q2))` and `G_2(x) = x / (q1 - q2) + 1 - v`;
/// everyone else bids 0.
pub fn q_mechanism_equilibrium(v: f64, q: &PrizeVector) -> Result<QEquilibrium> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::OutOfRange { what: "v", value: v });
    }
    let gap = q.q1() - q.q2();
    let end = v * gap;
    let g1 = PiecewiseCdf::from_points(&[(0.0, 0.0), (end, 1.0)])?.tagged("prize-top");
    let g2 = PiecewiseCdf::from_points(&[(0.0, 1.0 - v), (end, 1.0)])?.tagged("prize-second");
    let n = q.ranks();
    let mut cdfs = vec![g1, g2];
    cdfs.extend(std::iter::repeat_n(PiecewiseCdf::zero_bid(), n - 2));
    let profile = MixedProfile::single_item(cdfs)?;
    let mut values = vec![0.0; n];
    values[0] = 1.0;
    values[1] = v;
    Ok(QEquilibrium {
        expected_max_bid: expected_max_bid(&profile, 0)?,
        revenue: end / 2.0 + v * v * gap / 2.0,
        utilities: [q.q1() - v * gap, q.q2() * v],
        values,
        profile,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstPriceOutcome {
    pub bids: Vec<f64>,
    pub winner: usize,
    pub revenue: f64,
    pub max_bid: f64,
}

/// The pure profile in which every player bids `v2`; with ties resolved in
/// favour of player 1 it is an equilibrium of the first-price auction.
pub fn first_price_worst_case(inst: &SingleItemInstance) -> Result<FirstPriceOutcome> {
    if inst.n_players() < 2 {
        return Err(Error::Degenerate("first-price comparison needs two players".into()));
    }
    let v2 = inst.v2();
    let bids = vec![v2; inst.n_players()];
    let winner = highest_bidder(&bids);
    Ok(FirstPriceOutcome { revenue: bids[winner], max_bid: v2, winner, bids })
}

/// True when bid `a` by player `i` outranks bid `b` by player `k`.
#[inline]
pub(crate) fn outranks(a: f64, i: usize, b: f64, k: usize) -> bool {
    a > b || (a == b && i < k)
}

/// Winner under the lowest-index tie rule.
pub fn highest_bidder(bids: &[f64]) -> usize {
    (1..bids.len()).fold(0, |best, k| if outranks(bids[k], k, bids[best], best) { k } else { best })
}

/// Rank (0 = highest) of player `i` if it bids `x` against `bids`.
pub(crate) fn rank_with_bid(bids: &[f64], i: usize, x: f64) -> usize {
    bids.iter().enumerate().filter(|&(k, &b)| k != i && outranks(b, k, x, i)).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::{estimate, McConfig};
    use crate::numeric::adaptive_simpson;

    #[test]
    fn two_player_equilibrium_matches_closed_form() {
        let p = bkv_unit_equilibrium(2, 0.5).unwrap();
        let (g1, g2) = (p.cdf(0, 0), p.cdf(1, 0));
        for x in [0.0, 0.1, 0.25, 0.4, 0.5] {
            assert!((g1.at(x) - 2.0 * x).abs() < 1e-12);
            assert!((g2.at(x) - (x + 0.5)).abs() < 1e-12);
        }
        assert_eq!(g2.atom_at_zero(), 0.5);
    }

    #[test]
    fn three_player_values() {
        let p = bkv_unit_equilibrium(3, 0.5).unwrap();
        // plug x = 1/4 into the closed forms
        let g1 = 0.25 / (0.5 * 0.75f64.sqrt());
        let g2 = 0.75f64.sqrt();
        assert!((p.cdf(0, 0).at(0.25) - g1).abs() < 1e-6);
        assert!((p.cdf(1, 0).at(0.25) - g2).abs() < 1e-6);
        for n in [2, 3, 7] {
            let p = bkv_unit_equilibrium(n, 0.3).unwrap();
            assert!(p.column(0).all(|c| c.at(0.3) == 1.0));
        }
    }

    #[test]
    fn invalid_v_rejected() {
        assert!(bkv_unit_equilibrium(2, 0.0).is_err());
        assert!(bkv_unit_equilibrium(2, 1.2).is_err());
        assert!(bkv_unit_equilibrium(1, 0.5).is_err());
    }

    #[test]
    fn welfare_limit_values() {
        assert!((welfare_t(0.5).unwrap() - (0.5 * 2f64.ln() + 0.5)).abs() < 1e-15);
        assert!((welfare_t(0.5).unwrap() - 0.84657).abs() < 1e-5);
        assert!((welfare_t(0.5694).unwrap() - 0.8438).abs() < 1e-4);
        assert!((1.0 / welfare_t(0.5694).unwrap() - 1.185).abs() < 1e-3);
        assert!((welfare_t(1.0 - 1e-9).unwrap() - 1.0).abs() < 1e-6);
        assert!(welfare_t(1.0).is_err());
        assert!(welfare_t(0.0).is_err());
    }

    #[test]
    fn two_player_welfare() {
        for v in [0.2, 0.5, 0.9] {
            let inst = SingleItemInstance::top_and_rest(2, 1.0, v).unwrap();
            let p = bkv_worst_equilibrium(&inst, DEFAULT_GRID_POINTS).unwrap();
            let w = equilibrium_welfare(&p, &inst).unwrap();
            assert!((w.welfare - (1.0 - v / 2.0 + v * v / 2.0)).abs() < 1e-9, "v={v}: {w:?}");
        }
        let inst = SingleItemInstance::top_and_rest(2, 1.0, 0.5).unwrap();
        let w = equilibrium_welfare(&bkv_worst_equilibrium(&inst, DEFAULT_GRID_POINTS).unwrap(), &inst).unwrap();
        assert!((w.welfare - 0.875).abs() < 1e-9);
        assert!((w.price_of_anarchy - 8.0 / 7.0).abs() < 1e-9);
    }

    #[test]
    fn welfare_scales_with_top_value() {
        let inst = SingleItemInstance::top_and_rest(3, 4.0, 2.0).unwrap();
        let p = bkv_worst_equilibrium(&inst, DEFAULT_GRID_POINTS).unwrap();
        let scaled = equilibrium_welfare(&p, &inst).unwrap();
        let unit = equilibrium_welfare(&bkv_unit_equilibrium(3, 0.5).unwrap(), &SingleItemInstance::top_and_rest(3, 1.0, 0.5).unwrap()).unwrap();
        assert!((scaled.welfare - 4.0 * unit.welfare).abs() < 1e-9);
    }

    /// Independent route: P1 = int_0^v (1 - v + x) g_1(x) dx with the
    /// density of G_1 differentiated by hand.
    fn welfare_by_quadrature(n: usize, v: f64) -> f64 {
        let a = (n as f64 - 2.0) / (n as f64 - 1.0);
        let density = |x: f64| {
            1.0 / (v * (1.0 - v + x).powf(a)) - a * x / (v * (1.0 - v + x).powf(a + 1.0))
        };
        let p1 = adaptive_simpson(&|x: f64| (1.0 - v + x) * density(x), 0.0, v, 1e-12);
        v + (1.0 - v) * p1
    }

    #[test]
    fn welfare_decreases_towards_limit() {
        let v = 0.5694;
        let limit = welfare_t(v).unwrap();
        let mut prev = f64::INFINITY;
        for e in 1..=8 {
            let n = 1usize << e;
            let inst = SingleItemInstance::top_and_rest(n, 1.0, v).unwrap();
            let w = equilibrium_welfare(&bkv_worst_equilibrium(&inst, DEFAULT_GRID_POINTS).unwrap(), &inst).unwrap().welfare;
            assert!((w - welfare_by_quadrature(n, v)).abs() < 1e-5, "n={n}");
            assert!(w <= prev + 1e-9);
            prev = w;
        }
        assert!(prev - limit < 0.01 && prev >= limit);
    }

    #[test]
    fn revenue_limit_values() {
        let r = revenue_closed_form(0.01).unwrap();
        assert!((r / 0.01 - 0.5033417).abs() < 1e-6);
        assert!((revenue_closed_form(0.5).unwrap() - 0.346574).abs() < 1e-6);
        assert!((revenue_closed_form(1.0 - 1e-9).unwrap() - 1.0).abs() < 1e-6);
        assert!(revenue_closed_form(0.0).is_err());
    }

    #[test]
    fn max_bid_examples() {
        let same = SingleItemInstance::new(vec![1.0, 1.0]).unwrap();
        let c = max_bid_lower_bound_check(&same, 2).unwrap();
        assert!((c.expected_max_bid - 2.0 / 3.0).abs() < 1e-7);
        assert!(c.holds);

        let inst = SingleItemInstance::new(vec![1.0, 0.5]).unwrap();
        let c = max_bid_lower_bound_check(&inst, 200).unwrap();
        let oracle = adaptive_simpson(&|x: f64| 1.0 - 2.0 * x * (0.5 + x).powf(1.0 / 199.0), 0.0, 0.5, 1e-13);
        assert!((c.expected_max_bid - oracle).abs() < 1e-7);
        assert!((0.25..=0.255).contains(&c.expected_max_bid));
        assert!(c.holds);
    }

    #[test]
    fn max_bid_bound_holds_on_grid() {
        for &v2 in &[0.05, 0.3, 0.7, 1.0] {
            for &k in &[2usize, 3, 10, 100, 1000] {
                let inst = SingleItemInstance::new(vec![1.0, v2]).unwrap();
                assert!(max_bid_lower_bound_check(&inst, k).unwrap().holds, "v2={v2} k={k}");
            }
        }
    }

    #[test]
    fn prize_vector_example() {
        let q = PrizeVector::new(vec![0.8, 0.2]).unwrap();
        let eq = q_mechanism_equilibrium(0.1, &q).unwrap();
        assert!((eq.revenue - 0.033).abs() < 1e-12);
        assert!(eq.revenue < 0.05);
        // revenue equals the sum of expected bids
        let bids: f64 = eq.profile.column(0).map(|c| c.integrate(0.0, 1.0, Integrand::Survival).unwrap()).sum();
        assert!((bids - eq.revenue).abs() < 1e-12);
        assert!(eq.expected_max_bid <= eq.revenue);
    }

    #[test]
    fn prize_vector_reduces_to_standard_auction() {
        let eq = q_mechanism_equilibrium(0.5, &PrizeVector::winner_take_all(2)).unwrap();
        let std = bkv_unit_equilibrium(2, 0.5).unwrap();
        for x in [0.0, 0.1, 0.3, 0.5] {
            assert!((eq.profile.cdf(0, 0).at(x) - std.cdf(0, 0).at(x)).abs() < 1e-12);
            assert!((eq.profile.cdf(1, 0).at(x) - std.cdf(1, 0).at(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn prize_vector_utilities_constant_on_support() {
        let q = PrizeVector::new(vec![0.7, 0.2, 0.1]).unwrap();
        let v = 0.4;
        let eq = q_mechanism_equilibrium(v, &q).unwrap();
        let end = v * (q.q1() - q.q2());
        let (g1, g2) = (eq.profile.cdf(0, 0), eq.profile.cdf(1, 0));
        for s in 0..=400 {
            let x = end * s as f64 / 400.0;
            let u1 = g2.at(x) * q.q1() + (1.0 - g2.at(x)) * q.q2() - x;
            let u2 = (g1.at(x) * q.q1() + (1.0 - g1.at(x)) * q.q2()) * v - x;
            assert!((u1 - eq.utilities[0]).abs() < 1e-12);
            assert!((u2 - eq.utilities[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_prizes_rejected() {
        assert!(PrizeVector::new(vec![0.5, 0.5]).is_err());
        assert!(PrizeVector::new(vec![0.9, 0.2]).is_err());
        assert!(PrizeVector::new(vec![1.0]).is_err());
    }

    #[test]
    fn prize_revenue_matches_monte_carlo() {
        let q = PrizeVector::new(vec![0.8, 0.2]).unwrap();
        let eq = q_mechanism_equilibrium(0.1, &q).unwrap();
        let est = estimate(&McConfig::new(1_000_000, 21), |rng| {
            let mut b = [0.0; 2];
            eq.profile.sample_bids(rng, &mut b);
            b[0] + b[1]
        })
        .unwrap();
        assert!(est.agrees_with(eq.revenue, 3.0), "{est:?}");
    }

    #[test]
    fn utility_constant_on_support_and_no_gain_above() {
        for (n, v) in [(2, 0.5), (3, 0.5), (5, 0.8)] {
            let p = bkv_unit_equilibrium(n, v).unwrap();
            for i in 0..n {
                let value = if i == 0 { 1.0 } else { v };
                let others = p.others_max_cdf(i, 0).unwrap();
                let u = |x: f64| others.at(x) * value - x;
                let base = u(v / 2.0);
                for s in 1..=400 {
                    let x = v * s as f64 / 400.0;
                    assert!((u(x) - base).abs() < 1e-3, "n={n} i={i} x={x}");
                }
                for s in 1..=20 {
                    assert!(u(v + 0.05 * s as f64) <= base + 1e-3);
                }
            }
        }
    }

    #[test]
    fn players_below_second_value_bid_zero() {
        let inst = SingleItemInstance::new(vec![1.0, 0.6, 0.6, 0.3, 0.1]).unwrap();
        let p = bkv_worst_equilibrium(&inst, 513).unwrap();
        assert_eq!(p.cdf(3, 0), &PiecewiseCdf::zero_bid());
        assert_eq!(p.cdf(4, 0), &PiecewiseCdf::zero_bid());
        assert!(p.cdf(2, 0).support_end() > 0.0);
        assert!(expected_max_bid(&p, 0).unwrap() >= inst.v2() / 2.0 - 1e-9);
    }

    #[test]
    fn first_price_examples() {
        let out = first_price_worst_case(&SingleItemInstance::new(vec![1.0, 0.5]).unwrap()).unwrap();
        assert_eq!(out.bids, vec![0.5, 0.5]);
        assert_eq!(out.winner, 0);
        assert_eq!(out.revenue, 0.5);
        let out = first_price_worst_case(&SingleItemInstance::new(vec![1.0, 1.0]).unwrap()).unwrap();
        assert_eq!((out.revenue, out.max_bid), (1.0, 1.0));
    }

    #[test]
    fn tie_rule() {
        assert_eq!(highest_bidder(&[1.0, 1.0]), 0);
        assert_eq!(highest_bidder(&[0.3, 0.7, 0.7]), 1);
        assert_eq!(rank_with_bid(&[0.0, 0.5, 0.0], 2, 0.0), 2);
        assert_eq!(rank_with_bid(&[0.0, 0.5, 0.0], 0, 0.0), 1);
    }
}
