//! Tabulated bid distributions and mixed strategy profiles.
//!
//! A [`PiecewiseCdf`] is a right-continuous CDF on `[0, ∞)` stored as a
//! table: it equals `atom_at_zero` on `[0, grid[0])`, interpolates linearly
//! between grid points, and is 1 from the last grid point on. Equilibrium
//! strategies never carry mass at a positive bid, so the ordinary
//! constructors reject tables that would imply one. The only exception is
//! [`PiecewiseCdf::with_leading_step`], used for extremal witnesses of the
//! welfare lemmas, which may jump at `grid[0]`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::mc::SimRng;
use crate::numeric::clustered_grid;
use crate::{Error, Result};

/// Default number of tabulation points for closed-form CDFs.
pub const DEFAULT_GRID_POINTS: usize = 4097;

const VALUE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCdf")]
pub struct PiecewiseCdf {
    atom_at_zero: f64,
    grid: Vec<f64>,
    values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exact_tag: Option<String>,
}

#[derive(Deserialize)]
struct RawCdf {
    atom_at_zero: f64,
    grid: Vec<f64>,
    values: Vec<f64>,
    #[serde(default)]
    exact_tag: Option<String>,
}

impl TryFrom<RawCdf> for PiecewiseCdf {
    type Error = Error;

    fn try_from(raw: RawCdf) -> Result<Self> {
        let cdf = PiecewiseCdf::new(raw.atom_at_zero, raw.grid, raw.values)?;
        Ok(match raw.exact_tag {
            Some(tag) => cdf.tagged(tag),
            None => cdf,
        })
    }
}

/// Function of the CDF value integrated by [`PiecewiseCdf::integrate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrand {
    /// `1 - F(x)`
    Survival,
    /// `sqrt(F(x))`
    Sqrt,
    /// `F(x)`
    Cdf,
}

impl PiecewiseCdf {
    /// Builds a table without interior atoms.
    pub fn new(atom_at_zero: f64, grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let cdf = Self::with_leading_step(atom_at_zero, grid, values)?;
        let step = cdf.leading_step();
        if step > VALUE_TOL {
            return Err(Error::InteriorAtom { at: cdf.grid[0], mass: step });
        }
        Ok(cdf)
    }

    /// Like [`PiecewiseCdf::new`] but allows a jump at `grid[0] > 0`.
    pub fn with_leading_step(atom_at_zero: f64, grid: Vec<f64>, mut values: Vec<f64>) -> Result<Self> {
        if grid.is_empty() || grid.len() != values.len() {
            return Err(Error::InvalidCdf(format!(
                "grid has {} points and values {}",
                grid.len(),
                values.len()
            )));
        }
        if !(0.0..=1.0).contains(&atom_at_zero) {
            return Err(Error::InvalidCdf(format!("atom_at_zero {atom_at_zero} outside [0, 1]")));
        }
        if grid.iter().any(|x| !x.is_finite()) || grid[0] < 0.0 {
            return Err(Error::InvalidCdf("grid must be finite and nonnegative".into()));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidCdf("grid must be strictly increasing".into()));
        }
        if values.iter().any(|v| !(-VALUE_TOL..=1.0 + VALUE_TOL).contains(v)) {
            return Err(Error::InvalidCdf("values must lie in [0, 1]".into()));
        }
        if values.windows(2).any(|w| w[1] < w[0] - VALUE_TOL) {
            return Err(Error::InvalidCdf("values must be nondecreasing".into()));
        }
        let last = *values.last().unwrap();
        if (last - 1.0).abs() > VALUE_TOL {
            return Err(Error::InvalidCdf(format!("terminal value {last} is not 1")));
        }
        if values[0] < atom_at_zero - VALUE_TOL {
            return Err(Error::InvalidCdf("first value below atom_at_zero".into()));
        }
        if grid[0] == 0.0 && (values[0] - atom_at_zero).abs() > VALUE_TOL {
            return Err(Error::InvalidCdf("value at 0 must equal atom_at_zero".into()));
        }
        // absorb rounding noise so the stored table is exactly monotone
        let mut running = atom_at_zero;
        for v in values.iter_mut() {
            running = running.max(v.clamp(0.0, 1.0));
            *v = running;
        }
        *values.last_mut().unwrap() = 1.0;
        Ok(Self { atom_at_zero, grid, values, exact_tag: None })
    }

    /// Tabulates the closed form `f` on `[0, support_end]` using a grid
    /// clustered near both ends. `f(0)` becomes the atom at zero.
    pub fn tabulate<F: Fn(f64) -> f64>(f: F, support_end: f64, points: usize) -> Result<Self> {
        if !(support_end > 0.0) || !support_end.is_finite() {
            return Err(Error::OutOfRange { what: "support end", value: support_end });
        }
        let grid = clustered_grid(0.0, support_end, points.max(2));
        let mut values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
        let last = values.last_mut().unwrap();
        if (*last - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidCdf(format!("closed form ends at {last}, not 1")));
        }
        *last = 1.0;
        if values.windows(2).any(|w| w[1] < w[0] - 1e-9) {
            return Err(Error::InvalidCdf("closed form is not monotone".into()));
        }
        let atom = values[0].clamp(0.0, 1.0);
        values[0] = atom;
        Self::new(atom, grid, values)
    }

    /// Table through the given `(bid, F)` knots.
    pub fn from_points(points: &[(f64, f64)]) -> Result<Self> {
        let (grid, values): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
        let atom = if grid.first() == Some(&0.0) { values[0] } else { 0.0 };
        Self::new(atom, grid, values)
    }

    /// Uniform distribution on `[0, hi]`.
    pub fn uniform(hi: f64) -> Result<Self> {
        Self::from_points(&[(0.0, 0.0), (hi, 1.0)])
    }

    /// The pure strategy "always bid 0".
    pub fn zero_bid() -> Self {
        Self { atom_at_zero: 1.0, grid: vec![0.0], values: vec![1.0], exact_tag: None }
    }

    /// The pure strategy "always bid `b`".
    pub fn point_mass(b: f64) -> Result<Self> {
        if b == 0.0 {
            return Ok(Self::zero_bid());
        }
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::Negative { what: "bid", value: b });
        }
        Self::with_leading_step(0.0, vec![b], vec![1.0])
    }

    pub fn tagged(mut self, tag: impl Into<String>) -> Self {
        self.exact_tag = Some(tag.into());
        self
    }

    pub fn atom_at_zero(&self) -> f64 {
        self.atom_at_zero
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn exact_tag(&self) -> Option<&str> {
        self.exact_tag.as_deref()
    }

    /// Smallest bid at which the CDF reaches 1.
    pub fn support_end(&self) -> f64 {
        let idx = self.values.iter().position(|&v| v >= 1.0).unwrap_or(self.values.len() - 1);
        if idx == 0 && self.atom_at_zero >= 1.0 {
            0.0
        } else {
            self.grid[idx]
        }
    }

    /// Size of the jump at `grid[0]` (zero for atom-free tables).
    pub fn leading_step(&self) -> f64 {
        if self.grid[0] > 0.0 {
            self.values[0] - self.atom_at_zero
        } else {
            0.0
        }
    }

    /// `F(x)`; negative bids are rejected.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if x < 0.0 || x.is_nan() {
            return Err(Error::Negative { what: "bid", value: x });
        }
        Ok(self.at(x))
    }

    /// `F(x)` for `x >= 0` (negative input is treated as 0).
    pub fn at(&self, x: f64) -> f64 {
        let grid = &self.grid;
        if x < grid[0] {
            return if x < 0.0 { 0.0 } else { self.atom_at_zero };
        }
        let last = grid.len() - 1;
        if x >= grid[last] {
            return 1.0;
        }
        let k = grid.partition_point(|&g| g <= x);
        let (x0, x1) = (grid[k - 1], grid[k]);
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        v0 + (v1 - v0) * (x - x0) / (x1 - x0)
    }

    /// Left limit `F(x-)`.
    pub fn left_limit(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x == self.grid[0] {
            self.atom_at_zero
        } else {
            self.at(x)
        }
    }

    /// Inverse-transform sample for a uniform variate `u` in `[0, 1)`.
    pub fn sample(&self, u: f64) -> f64 {
        if u < self.atom_at_zero {
            return 0.0;
        }
        let k = self.values.partition_point(|&v| v <= u);
        if k == 0 {
            return self.grid[0];
        }
        if k == self.values.len() {
            return *self.grid.last().unwrap();
        }
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        let (x0, x1) = (self.grid[k - 1], self.grid[k]);
        x0 + (u - v0) / (v1 - v0) * (x1 - x0)
    }

    pub fn draw(&self, rng: &mut SimRng) -> f64 {
        self.sample(rng.gen::<f64>())
    }

    /// Exact integral of `integrand(F)` over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, integrand: Integrand) -> Result<f64> {
        if a < 0.0 {
            return Err(Error::Negative { what: "lower integration bound", value: a });
        }
        if b < a {
            return Err(Error::ReversedBounds { a, b });
        }
        let piece = |f0: f64, f1: f64, len: f64| -> f64 {
            match integrand {
                Integrand::Survival => len * (1.0 - 0.5 * (f0 + f1)),
                Integrand::Cdf => len * 0.5 * (f0 + f1),
                Integrand::Sqrt => {
                    let (s0, s1) = (f0.sqrt(), f1.sqrt());
                    if s0 + s1 == 0.0 {
                        0.0
                    } else {
                        len * (2.0 / 3.0) * (f0 + s0 * s1 + f1) / (s0 + s1)
                    }
                }
            }
        };
        let mut total = 0.0;
        let g0 = self.grid[0];
        if a < g0 {
            let hi = b.min(g0);
            total += piece(self.atom_at_zero, self.atom_at_zero, hi - a);
        }
        for k in 1..self.grid.len() {
            let (x0, x1) = (self.grid[k - 1], self.grid[k]);
            let lo = a.max(x0);
            let hi = b.min(x1);
            if hi <= lo {
                continue;
            }
            total += piece(self.at_segment(k, lo), self.at_segment(k, hi), hi - lo);
        }
        let last = *self.grid.last().unwrap();
        if b > last {
            total += piece(1.0, 1.0, b - a.max(last));
        }
        Ok(total)
    }

    fn at_segment(&self, k: usize, x: f64) -> f64 {
        let (x0, x1) = (self.grid[k - 1], self.grid[k]);
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        v0 + (v1 - v0) * (x - x0) / (x1 - x0)
    }

    /// Pointwise product on the merged grid: the CDF of the maximum of
    /// independent bids.
    pub fn product<'a, I>(cdfs: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a PiecewiseCdf>,
    {
        let cdfs: Vec<&PiecewiseCdf> = cdfs.into_iter().collect();
        match cdfs.as_slice() {
            [] => return Err(Error::Empty("CDF product")),
            [only] => return Ok((*only).clone()),
            _ => {}
        }
        // A factor with no mass below its first knot zeroes the product
        // there, so the result starts with a step at the largest such knot.
        let floor = cdfs
            .iter()
            .filter(|c| c.grid[0] > 0.0 && c.atom_at_zero == 0.0)
            .map(|c| c.grid[0])
            .fold(0.0, f64::max);
        for c in &cdfs {
            let step = c.leading_step();
            if step > VALUE_TOL && c.grid[0] > floor {
                return Err(Error::InteriorAtom { at: c.grid[0], mass: step });
            }
        }
        let mut grid: Vec<f64> = cdfs.iter().flat_map(|c| c.grid.iter().copied()).filter(|&x| x >= floor).collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let values: Vec<f64> = grid.iter().map(|&x| cdfs.iter().map(|c| c.at(x)).product()).collect();
        if floor > 0.0 {
            return Self::with_leading_step(0.0, grid, values);
        }
        let atom = cdfs.iter().map(|c| c.atom_at_zero).product();
        Self::new(atom, grid, values)
    }
}

/// Per-player, per-item bid CDFs of a product-form mixed profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedProfile {
    n_players: usize,
    n_items: usize,
    /// Row-major: player `i`, item `j` at `i * n_items + j`.
    cdfs: Vec<PiecewiseCdf>,
}

impl MixedProfile {
    pub fn new(n_players: usize, n_items: usize, cdfs: Vec<PiecewiseCdf>) -> Result<Self> {
        if n_players == 0 || n_items == 0 {
            return Err(Error::Empty("profile dimensions"));
        }
        if cdfs.len() != n_players * n_items {
            return Err(Error::Dimension(format!(
                "{} CDFs for {n_players} players x {n_items} items",
                cdfs.len()
            )));
        }
        Ok(Self { n_players, n_items, cdfs })
    }

    /// Single-item profile from one CDF per player.
    pub fn single_item(cdfs: Vec<PiecewiseCdf>) -> Result<Self> {
        Self::new(cdfs.len(), 1, cdfs)
    }

    pub fn n_players(&self) -> usize {
        self.n_players
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn cdf(&self, player: usize, item: usize) -> &PiecewiseCdf {
        &self.cdfs[player * self.n_items + item]
    }

    pub fn cdfs(&self) -> &[PiecewiseCdf] {
        &self.cdfs
    }

    pub fn column(&self, item: usize) -> impl Iterator<Item = &PiecewiseCdf> + '_ {
        (0..self.n_players).map(move |i| self.cdf(i, item))
    }

    /// CDF of the highest bid on `item`.
    pub fn max_bid_cdf(&self, item: usize) -> Result<PiecewiseCdf> {
        PiecewiseCdf::product(self.column(item))
    }

    /// CDF of the highest bid on `item` among everyone but `player`
    /// (identically 1 when there is nobody else).
    pub fn others_max_cdf(&self, player: usize, item: usize) -> Result<PiecewiseCdf> {
        if self.n_players == 1 {
            return Ok(PiecewiseCdf::zero_bid());
        }
        PiecewiseCdf::product(
            (0..self.n_players).filter(|&k| k != player).map(|k| self.cdf(k, item)),
        )
    }

    /// Largest bid any strategy in the profile can place.
    pub fn max_support(&self) -> f64 {
        self.cdfs.iter().map(PiecewiseCdf::support_end).fold(0.0, f64::max)
    }

    /// Draws one bid matrix (row-major, same layout as the CDFs).
    pub fn sample_bids(&self, rng: &mut SimRng, out: &mut [f64]) {
        for (slot, cdf) in out.iter_mut().zip(&self.cdfs) {
            *slot = cdf.draw(rng);
        }
    }
}

/// Expected highest bid on `item`: the integral of `1 - F_j`.
pub fn expected_max_bid(profile: &MixedProfile, item: usize) -> Result<f64> {
    let f = profile.max_bid_cdf(item)?;
    f.integrate(0.0, f.support_end(), Integrand::Survival)
}

/// Kolmogorov-Smirnov distance between the empirical CDF of `samples` and `cdf`.
pub fn ks_distance(samples: &[f64], cdf: &PiecewiseCdf) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("KS samples"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        d = d.max(j as f64 / n - cdf.at(x)).max(cdf.left_limit(x) - i as f64 / n);
        i = j;
    }
    Ok(d)
}
