//! Epsilon-Nash certification against explicit deviation families.
//!
//! Auction profiles are checked by Monte Carlo with common random numbers:
//! every deviation in the family is evaluated on the same opponent draws
//! as the profile's own bid. PSAM and first-price profiles are pure and
//! their utilities are exact, so their certificates carry no sampling error.

use serde::Serialize;

use crate::mc::{estimate, estimate_many, Estimate, McConfig};
use crate::multi_unit_psam::{kelly_best_response, kelly_utility};
use crate::numeric::golden_section_max;
use crate::single_item::{outranks, rank_with_bid, PrizeVector};
use crate::strategies::MixedProfile;
use crate::valuations::{ItemSet, MultiUnitValuation, XosValuation};
use crate::{Error, Result};

/// A mechanism together with the profile to certify.
#[derive(Debug, Clone, PartialEq)]
pub enum Game {
    /// Single-item all-pay; `prizes` switches to the rank-based prize
    /// mechanism (winner takes all when absent).
    SingleAllPay { values: Vec<f64>, prizes: Option<PrizeVector>, profile: MixedProfile },
    /// Pure profile of the first-price auction.
    FirstPrice { values: Vec<f64>, bids: Vec<f64> },
    SimultaneousAllPay { valuations: Vec<XosValuation>, profile: MixedProfile },
    /// Pure bids in the proportional-share mechanism.
    Psam { valuations: Vec<MultiUnitValuation>, units: usize, bids: Vec<f64> },
}

impl Game {
    pub fn mechanism(&self) -> &'static str {
        match self {
            Game::SingleAllPay { prizes: None, .. } => "single-allpay",
            Game::SingleAllPay { prizes: Some(_), .. } => "prize-vector-allpay",
            Game::FirstPrice { .. } => "first-price",
            Game::SimultaneousAllPay { .. } => "simultaneous-allpay",
            Game::Psam { .. } => "psam",
        }
    }

    /// Largest value any player attaches to anything.
    pub fn top_value(&self) -> f64 {
        match self {
            Game::SingleAllPay { values, .. } | Game::FirstPrice { values, .. } => values.iter().copied().fold(0.0, f64::max),
            Game::SimultaneousAllPay { valuations, .. } => valuations
                .iter()
                .map(|v| v.clauses().iter().map(|c| c.iter().sum::<f64>()).fold(0.0, f64::max))
                .fold(0.0, f64::max),
            Game::Psam { valuations, .. } => {
                valuations.iter().map(|f| f.values().last().copied().unwrap_or(0.0)).fold(0.0, f64::max)
            }
        }
    }

    fn is_exact(&self) -> bool {
        matches!(self, Game::FirstPrice { .. } | Game::Psam { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertifyConfig {
    pub eps: f64,
    /// Deviation levels per item.
    pub grid_size: usize,
    pub mc: McConfig,
}

pub const DEFAULT_DEVIATION_GRID: usize = 400;

impl CertifyConfig {
    /// `1e-8` for exact mechanisms, `1e-3` times the top value otherwise.
    pub fn for_game(game: &Game, mc: McConfig) -> Self {
        let eps = if game.is_exact() { 1e-8 } else { 1e-3 * game.top_value() };
        Self { eps, grid_size: DEFAULT_DEVIATION_GRID, mc }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// No deviation in the family gains more than `eps + 3 sigma`.
    Certified,
    Refuted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlayerRegret {
    pub player: usize,
    pub regret: f64,
    pub std_error: f64,
    /// Best deviation found (one bid per item, or the single bid).
    pub best_deviation: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumCertificate {
    pub mechanism: &'static str,
    pub family: String,
    pub eps: f64,
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
    pub players: Vec<PlayerRegret>,
    pub verdict: Verdict,
}

fn grid(upper: f64, points: usize) -> Vec<f64> {
    let points = points.max(2);
    (0..points).map(|k| upper * k as f64 / (points - 1) as f64).collect()
}

/// Certifies `game` against its deviation family:
/// a uniform grid on `[0, 1.05 top]` per item for auctions, one item at a
/// time for multi-item profiles; golden-section search (plus the closed
/// form best response) for PSAM.
pub fn certify(game: &Game, cfg: &CertifyConfig) -> Result<EquilibriumCertificate> {
    let (family, players) = match game {
        Game::SingleAllPay { values, prizes, profile } => {
            let prizes = prizes.clone().unwrap_or_else(|| PrizeVector::winner_take_all(values.len()));
            (format!("uniform grid of {} bids on [0, 1.05 top value]", cfg.grid_size), single_item(values, &prizes, profile, cfg)?)
        }
        Game::FirstPrice { values, bids } => {
            (format!("uniform grid of {} bids plus opposing bids", cfg.grid_size), first_price(values, bids, cfg)?)
        }
        Game::SimultaneousAllPay { valuations, profile } => (
            format!("per-item uniform grid of {} bids, other items at own draws", cfg.grid_size),
            simultaneous(valuations, profile, cfg)?,
        ),
        Game::Psam { valuations, units, bids } => {
            ("golden-section search over own bid".to_string(), psam(valuations, *units, bids)?)
        }
    };
    let refuted = players.iter().any(|p| p.regret > cfg.eps + 3.0 * p.std_error);
    Ok(EquilibriumCertificate {
        mechanism: game.mechanism(),
        family,
        eps: cfg.eps,
        samples: if game.is_exact() { 0 } else { cfg.mc.samples },
        seed: cfg.mc.seed,
        workers: cfg.mc.workers,
        players,
        verdict: if refuted { Verdict::Refuted } else { Verdict::Certified },
    })
}

/// Picks the best estimated gain; keeping one's own strategy (gain 0) is
/// always available.
fn best_of(player: usize, est: &[Estimate], deviations: impl Fn(usize) -> Vec<f64>) -> PlayerRegret {
    let mut best = PlayerRegret { player, regret: 0.0, std_error: 0.0, best_deviation: Vec::new() };
    for (k, e) in est.iter().enumerate() {
        if e.mean > best.regret {
            best.regret = e.mean;
            best.std_error = e.std_error;
            best.best_deviation = deviations(k);
        }
    }
    best
}

fn single_item(values: &[f64], prizes: &PrizeVector, profile: &MixedProfile, cfg: &CertifyConfig) -> Result<Vec<PlayerRegret>> {
    let n = values.len();
    if profile.n_items() != 1 || profile.n_players() != n {
        return Err(Error::IncompatibleProfile(format!(
            "single-item game with {n} players, profile is {}x{}",
            profile.n_players(),
            profile.n_items()
        )));
    }
    let levels = grid(1.05 * values.iter().copied().fold(0.0, f64::max), cfg.grid_size);
    (0..n)
        .map(|i| {
            let est = estimate_many(&cfg.mc, levels.len(), |rng, out| {
                let mut bids = vec![0.0; n];
                profile.sample_bids(rng, &mut bids);
                let u = |x: f64| values[i] * prizes.prize(rank_with_bid(&bids, i, x)) - x;
                let base = u(bids[i]);
                for (slot, &x) in out.iter_mut().zip(&levels) {
                    *slot = u(x) - base;
                }
            })?;
            Ok(best_of(i, &est, |k| vec![levels[k]]))
        })
        .collect()
}

fn first_price(values: &[f64], bids: &[f64], cfg: &CertifyConfig) -> Result<Vec<PlayerRegret>> {
    if values.len() != bids.len() || values.len() < 2 {
        return Err(Error::IncompatibleProfile("one bid per player, at least two players".into()));
    }
    if let Some(&value) = bids.iter().find(|b| !(**b >= 0.0)) {
        return Err(Error::Negative { what: "bid", value });
    }
    let mut levels = grid(1.05 * values.iter().copied().fold(0.0, f64::max), cfg.grid_size);
    levels.extend_from_slice(bids);
    Ok((0..values.len())
        .map(|i| {
            let u = |x: f64| {
                let wins = bids.iter().enumerate().all(|(k, &b)| k == i || outranks(x, i, b, k));
                if wins {
                    values[i] - x
                } else {
                    0.0
                }
            };
            let base = u(bids[i]);
            let gains: Vec<Estimate> = levels.iter().map(|&x| Estimate::exact(u(x) - base)).collect();
            best_of(i, &gains, |k| vec![levels[k]])
        })
        .collect())
}

fn simultaneous(valuations: &[XosValuation], profile: &MixedProfile, cfg: &CertifyConfig) -> Result<Vec<PlayerRegret>> {
    let (n, m) = (profile.n_players(), profile.n_items());
    if valuations.len() != n || valuations.iter().any(|v| v.n_items() != m) {
        return Err(Error::IncompatibleProfile(format!("{} valuations for a {n}x{m} profile", valuations.len())));
    }
    let levels: Vec<Vec<f64>> = (0..m)
        .map(|j| grid(1.05 * valuations.iter().map(|v| v.item_cap(j)).fold(0.0, f64::max), cfg.grid_size))
        .collect();
    let per_item = levels[0].len();
    (0..n)
        .map(|i| {
            let v = &valuations[i];
            let est = estimate_many(&cfg.mc, m * per_item, |rng, out| {
                let mut bids = vec![0.0; n * m];
                profile.sample_bids(rng, &mut bids);
                let own = &bids[i * m..(i + 1) * m];
                let wins = |j: usize, x: f64| (0..n).all(|k| k == i || outranks(x, i, bids[k * m + j], k));
                let mut won = ItemSet::EMPTY;
                for (j, &b) in own.iter().enumerate() {
                    if wins(j, b) {
                        won = won.with(j);
                    }
                }
                let paid: f64 = own.iter().sum();
                let base = v.value_unchecked(won) - paid;
                for j in 0..m {
                    let others = won.without(j);
                    let keep = v.value_unchecked(others) - (paid - own[j]);
                    let with = v.value_unchecked(others.with(j)) - (paid - own[j]);
                    for (k, &x) in levels[j].iter().enumerate() {
                        let u = if wins(j, x) { with } else { keep } - x;
                        out[j * per_item + k] = u - base;
                    }
                }
            })?;
            Ok(best_of(i, &est, |idx| {
                let (j, k) = (idx / per_item, idx % per_item);
                let mut d = vec![f64::NAN; m];
                d[j] = levels[j][k];
                d
            }))
        })
        .collect()
}

fn psam(valuations: &[MultiUnitValuation], units: usize, bids: &[f64]) -> Result<Vec<PlayerRegret>> {
    if valuations.len() != bids.len() {
        return Err(Error::IncompatibleProfile("one bid per valuation".into()));
    }
    let total: f64 = bids.iter().sum();
    valuations
        .iter()
        .enumerate()
        .map(|(i, f)| {
            if !f.is_submodular() {
                return Err(Error::NotSubmodular { player: i });
            }
            let g = f.to_concave(units)?;
            let rest = total - bids[i];
            let base = kelly_utility(&g, bids[i], rest);
            let cap = g.eval(1.0).max(bids[i]);
            let (x, u) = golden_section_max(|b| kelly_utility(&g, b, rest), 0.0, cap, 1e-13);
            let mut best = (x, u);
            if rest > 0.0 {
                let b = kelly_best_response(&g, rest)?;
                let ub = kelly_utility(&g, b, rest);
                if ub > best.1 {
                    best = (b, ub);
                }
            }
            let gain = best.1 - base;
            Ok(PlayerRegret {
                player: i,
                regret: gain.max(0.0),
                std_error: 0.0,
                best_deviation: if gain > 0.0 { vec![best.0] } else { Vec::new() },
            })
        })
        .collect()
}

/// Monte Carlo probability that bidding `x` on `item` wins it against the
/// profile's other bidders (ties to the lowest index).
pub fn win_probability(profile: &MixedProfile, player: usize, item: usize, x: f64, cfg: &McConfig) -> Result<Estimate> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::Negative { what: "bid", value: x });
    }
    if player >= profile.n_players() || item >= profile.n_items() {
        return Err(Error::Dimension(format!("player {player}, item {item} outside the profile")));
    }
    let n = profile.n_players();
    estimate(cfg, |rng| {
        let mut won = true;
        // draw every opponent so the stream layout matches the profile
        for k in (0..n).filter(|&k| k != player) {
            let b = profile.cdf(k, item).draw(rng);
            won &= outranks(x, player, b, k);
        }
        f64::from(u8::from(won))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomFlag {
    pub player: usize,
    pub item: usize,
    pub at: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomReport {
    pub clean: bool,
    pub flagged: Vec<AtomFlag>,
}

/// Flags probability mass above `1e-6` concentrated at a positive bid:
/// a leading step, or a rise across a segment narrower than `1e-12`.
pub fn atom_diagnostic(profile: &MixedProfile) -> AtomReport {
    const MASS: f64 = 1e-6;
    let mut flagged = Vec::new();
    for i in 0..profile.n_players() {
        for j in 0..profile.n_items() {
            let c = profile.cdf(i, j);
            if c.leading_step() > MASS {
                flagged.push(AtomFlag { player: i, item: j, at: c.grid()[0], mass: c.leading_step() });
            }
            for (x, v) in c.grid().windows(2).zip(c.values().windows(2)) {
                if x[1] - x[0] <= 1e-12 && v[1] - v[0] > MASS && x[0] > 0.0 {
                    flagged.push(AtomFlag { player: i, item: j, at: x[0], mass: v[1] - v[0] });
                }
            }
        }
    }
    AtomReport { clean: flagged.is_empty(), flagged }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multi_unit_psam::psam_pure_nash;
    use crate::simultaneous::product_bkv_profile;
    use crate::single_item::{bkv_unit_equilibrium, first_price_worst_case, q_mechanism_equilibrium, SingleItemInstance};
    use crate::strategies::PiecewiseCdf;

    fn cfg(game: &Game, samples: u64, grid_size: usize) -> CertifyConfig {
        CertifyConfig { grid_size, ..CertifyConfig::for_game(game, McConfig::new(samples, 77).with_workers(4)) }
    }

    #[test]
    fn first_price_profile_has_zero_regret() {
        for values in [vec![1.0, 0.5], vec![1.0, 1.0], vec![0.9, 0.4, 0.1]] {
            let out = first_price_worst_case(&SingleItemInstance::new(values.clone()).unwrap()).unwrap();
            let game = Game::FirstPrice { values, bids: out.bids };
            let cert = certify(&game, &cfg(&game, 1, 200)).unwrap();
            assert_eq!(cert.verdict, Verdict::Certified);
            assert!(cert.players.iter().all(|p| p.regret == 0.0));
        }
        // player 2 breaking the tie rule by winning at a higher bid is not an equilibrium
        let game = Game::FirstPrice { values: vec![1.0, 0.5], bids: vec![0.2, 0.1] };
        assert_eq!(certify(&game, &cfg(&game, 1, 200)).unwrap().verdict, Verdict::Refuted);
    }

    #[test]
    fn two_player_equilibrium_certified() {
        let game = Game::SingleAllPay {
            values: vec![1.0, 0.5],
            prizes: None,
            profile: bkv_unit_equilibrium(2, 0.5).unwrap(),
        };
        let cert = certify(&game, &cfg(&game, 200_000, 400)).unwrap();
        assert_eq!(cert.verdict, Verdict::Certified, "{cert:?}");
        assert!(cert.players.iter().all(|p| p.regret <= 1e-3 + 3.0 * p.std_error));
    }

    #[test]
    fn overbidding_refuted() {
        let profile = MixedProfile::single_item(vec![
            PiecewiseCdf::point_mass(1.5).unwrap(),
            PiecewiseCdf::uniform(0.5).unwrap(),
        ])
        .unwrap();
        let game = Game::SingleAllPay { values: vec![1.0, 0.5], prizes: None, profile };
        let cert = certify(&game, &cfg(&game, 20_000, 100)).unwrap();
        assert_eq!(cert.verdict, Verdict::Refuted);
        assert!(cert.players[0].regret >= 0.5 - 1e-9);
    }

    #[test]
    fn prize_mechanism_certified() {
        let q = PrizeVector::new(vec![0.8, 0.2]).unwrap();
        let eq = q_mechanism_equilibrium(0.1, &q).unwrap();
        let game = Game::SingleAllPay { values: eq.values.clone(), prizes: Some(q), profile: eq.profile };
        let cert = certify(&game, &cfg(&game, 100_000, 400)).unwrap();
        assert_eq!(cert.verdict, Verdict::Certified, "{cert:?}");
    }

    #[test]
    fn larger_single_item_equilibria_certified() {
        for (n, v) in [(3, 0.5), (5, 0.8)] {
            let game = Game::SingleAllPay {
                values: SingleItemInstance::top_and_rest(n, 1.0, v).unwrap().values().to_vec(),
                prizes: None,
                profile: bkv_unit_equilibrium(n, v).unwrap(),
            };
            let cert = certify(&game, &cfg(&game, 50_000, 200)).unwrap();
            assert_eq!(cert.verdict, Verdict::Certified, "{cert:?}");
        }
    }

    #[test]
    fn finer_grid_does_not_lower_regret() {
        let game = Game::SingleAllPay {
            values: vec![1.0, 0.6],
            prizes: None,
            profile: MixedProfile::single_item(vec![
                PiecewiseCdf::uniform(0.8).unwrap(),
                PiecewiseCdf::uniform(0.3).unwrap(),
            ])
            .unwrap(),
        };
        let coarse = certify(&game, &cfg(&game, 50_000, 50)).unwrap();
        let fine = certify(&game, &cfg(&game, 50_000, 400)).unwrap();
        for (c, f) in coarse.players.iter().zip(&fine.players) {
            assert!(f.regret >= c.regret - 3.0 * c.std_error.max(f.std_error), "{c:?} {f:?}");
        }
    }

    #[test]
    fn simultaneous_product_certified() {
        let valuations = vec![
            XosValuation::additive(vec![1.0, 0.5]).unwrap(),
            XosValuation::additive(vec![0.5, 0.8]).unwrap(),
        ];
        let profile = product_bkv_profile(&valuations, 2049).unwrap();
        let game = Game::SimultaneousAllPay { valuations, profile };
        let cert = certify(&game, &cfg(&game, 50_000, 100)).unwrap();
        assert_eq!(cert.verdict, Verdict::Certified, "{cert:?}");
    }

    #[test]
    fn psam_equilibrium_certified_exactly() {
        let valuations = vec![
            MultiUnitValuation::new(vec![0.0, 2.0, 3.0, 3.5]).unwrap(),
            MultiUnitValuation::new(vec![0.0, 1.0, 2.0, 3.0]).unwrap(),
            MultiUnitValuation::new(vec![0.0, 1.5, 1.6, 1.7]).unwrap(),
        ];
        let bids = psam_pure_nash(&valuations, 3).unwrap();
        let game = Game::Psam { valuations: valuations.clone(), units: 3, bids };
        let cert = certify(&game, &CertifyConfig::for_game(&game, McConfig::new(1, 0))).unwrap();
        assert_eq!(cert.eps, 1e-8);
        assert_eq!(cert.verdict, Verdict::Certified, "{cert:?}");
        let off = Game::Psam { valuations, units: 3, bids: vec![0.1, 0.1, 0.1] };
        let cert = certify(&off, &CertifyConfig::for_game(&off, McConfig::new(1, 0))).unwrap();
        assert_eq!(cert.verdict, Verdict::Refuted);
    }

    #[test]
    fn incompatible_profiles_rejected() {
        let game = Game::SingleAllPay {
            values: vec![1.0, 0.5, 0.2],
            prizes: None,
            profile: bkv_unit_equilibrium(2, 0.5).unwrap(),
        };
        assert!(matches!(certify(&game, &cfg(&game, 10, 10)), Err(Error::IncompatibleProfile(_))));
    }

    #[test]
    fn win_probability_examples() {
        let zeros = MixedProfile::single_item(vec![PiecewiseCdf::zero_bid(); 3]).unwrap();
        let c = McConfig::new(10_000, 1);
        assert_eq!(win_probability(&zeros, 1, 0, 0.1, &c).unwrap().mean, 1.0);
        // the lowest index wins ties at 0
        let q = 0.3;
        let mixed = MixedProfile::single_item(vec![
            PiecewiseCdf::zero_bid(),
            PiecewiseCdf::new(q, vec![0.0, 1.0], vec![q, 1.0]).unwrap(),
        ])
        .unwrap();
        let e = win_probability(&mixed, 0, 0, 0.0, &McConfig::new(200_000, 3)).unwrap();
        assert!(e.agrees_with(q, 3.0), "{e:?}");

        let p = bkv_unit_equilibrium(2, 0.5).unwrap();
        let e = win_probability(&p, 1, 0, 0.25, &McConfig::new(200_000, 4)).unwrap();
        assert!(e.agrees_with(0.5, 3.0), "{e:?}");
        for x in [0.05, 0.2, 0.4] {
            for i in 0..2 {
                let e = win_probability(&p, i, 0, x, &McConfig::new(100_000, 9)).unwrap();
                let f = p.others_max_cdf(i, 0).unwrap().at(x);
                assert!(e.agrees_with(f, 3.5), "{i} {x} {e:?} {f}");
            }
        }
    }

    #[test]
    fn atom_examples() {
        assert!(atom_diagnostic(&bkv_unit_equilibrium(4, 0.7).unwrap()).clean);
        let with_zero_atom = MixedProfile::single_item(vec![
            PiecewiseCdf::new(0.4, vec![0.0, 1.0], vec![0.4, 1.0]).unwrap(),
        ])
        .unwrap();
        assert!(atom_diagnostic(&with_zero_atom).clean);
        let interior = MixedProfile::single_item(vec![
            PiecewiseCdf::with_leading_step(0.0, vec![0.3, 1.0], vec![0.3, 1.0]).unwrap(),
        ])
        .unwrap();
        let r = atom_diagnostic(&interior);
        assert!(!r.clean);
        assert_eq!(r.flagged[0].at, 0.3);
        assert!((r.flagged[0].mass - 0.3).abs() < 1e-15);
    }
}
