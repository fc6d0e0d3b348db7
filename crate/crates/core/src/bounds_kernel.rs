//! Numeric checks of the analytic inequalities behind the combinatorial
//! bound: `H >= sqrt(prod G)`, the `L` function, `R(F, v)` and its
//! extremal CDF family.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::simultaneous::compute_aj;
use crate::strategies::{Integrand, PiecewiseCdf};
use crate::{Error, Result};

/// Box for `g` in the minimum search.
pub const G_MIN: f64 = 1e-8;
pub const G_MAX: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropInput {
    #[serde(rename = "G")]
    pub big_g: Vec<f64>,
    pub g: Vec<f64>,
}

impl PropInput {
    pub fn new(big_g: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        let p = Self { big_g, g };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<()> {
        if self.big_g.len() != self.g.len() {
            return Err(Error::Dimension(format!("{} values of G and {} of g", self.big_g.len(), self.g.len())));
        }
        if self.g.len() < 2 {
            return Err(Error::OutOfRange { what: "n", value: self.g.len() as f64 });
        }
        if let Some(&value) = self.big_g.iter().find(|x| !(**x > 0.0 && **x <= 1.0)) {
            return Err(Error::OutOfRange { what: "G_i", value });
        }
        if let Some(&value) = self.g.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
            return Err(Error::OutOfRange { what: "g_i", value });
        }
        Ok(())
    }
}

fn h_unchecked(big_g: &[f64], g: &[f64]) -> f64 {
    (0..g.len())
        .map(|i| {
            let den: f64 = (0..g.len()).filter(|&t| t != i).map(|t| g[t] / big_g[t]).sum();
            g[i] / den
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prop1Value {
    pub h: f64,
    pub sqrt_product: f64,
    pub holds: bool,
}

/// `H = sum_i g_i / sum_{t != i} g_t / G_t` against `sqrt(prod G)`.
pub fn prop1_value(p: &PropInput) -> Result<Prop1Value> {
    p.check()?;
    let h = h_unchecked(&p.big_g, &p.g);
    let sqrt_product = p.big_g.iter().product::<f64>().sqrt();
    Ok(Prop1Value { h, sqrt_product, holds: h >= sqrt_product - 1e-12 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop1Search {
    pub n: usize,
    pub target_product: f64,
    pub min: f64,
    pub argmin: PropInput,
    pub starts: usize,
    /// Coordinates of the minimizer sitting on the `g` box.
    pub boundary_hits: usize,
    pub sqrt_target: f64,
    /// `min >= sqrt(target) - 1e-9`.
    pub holds: bool,
}

/// Multi-start compass search for the minimum of `H` with `prod G` fixed.
/// Works in `(ln g, ln G)`: single-coordinate moves on `ln g` within
/// `[ln G_MIN, ln G_MAX]` and pairwise transfers of `ln G` that keep the
/// product and every `G_i <= 1`. Step sizes halve when a sweep stalls.
pub fn prop1_min_search(n: usize, target_product: f64, starts: usize, seed: u64) -> Result<Prop1Search> {
    if n < 2 {
        return Err(Error::OutOfRange { what: "n", value: n as f64 });
    }
    if !(target_product > 0.0 && target_product <= 1.0) {
        return Err(Error::OutOfRange { what: "target product", value: target_product });
    }
    let starts = starts.max(32);
    let total = target_product.ln();
    let (lo, hi) = (G_MIN.ln(), G_MAX.ln());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;

    for _ in 0..starts {
        let mut lg: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let weights: Vec<f64> = (0..n).map(|_| -rng.gen::<f64>().max(1e-12).ln()).collect();
        let wsum: f64 = weights.iter().sum();
        let mut lbg: Vec<f64> = weights.iter().map(|w| total * w / wsum).collect();
        let eval = |lg: &[f64], lbg: &[f64]| {
            let g: Vec<f64> = lg.iter().map(|x| x.exp()).collect();
            let big: Vec<f64> = lbg.iter().map(|x| x.exp()).collect();
            h_unchecked(&big, &g)
        };
        let mut cur = eval(&lg, &lbg);
        let mut step = 1.0;
        let mut sweeps = 0;
        while step > 1e-10 && sweeps < 20_000 {
            sweeps += 1;
            let mut improved = false;
            for i in 0..n {
                for dir in [1.0, -1.0] {
                    let old = lg[i];
                    lg[i] = (old + dir * step).clamp(lo, hi);
                    let val = eval(&lg, &lbg);
                    if val < cur {
                        cur = val;
                        improved = true;
                    } else {
                        lg[i] = old;
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    // raise G_i, lower G_j by the same factor
                    let d = step.min(-lbg[i]);
                    if d <= 0.0 {
                        continue;
                    }
                    lbg[i] += d;
                    lbg[j] -= d;
                    let val = eval(&lg, &lbg);
                    if val < cur {
                        cur = val;
                        improved = true;
                    } else {
                        lbg[i] -= d;
                        lbg[j] += d;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if best.as_ref().is_none_or(|b| cur < b.0) {
            best = Some((cur, lg, lbg));
        }
    }

    let (min, lg, lbg) = best.expect("at least one start");
    let boundary_hits = lg.iter().filter(|&&x| x <= lo + 1e-9 || x >= hi - 1e-9).count();
    let argmin = PropInput {
        big_g: lbg.iter().map(|x| x.exp().min(1.0)).collect(),
        g: lg.iter().map(|x| x.exp()).collect(),
    };
    let sqrt_target = target_product.sqrt();
    Ok(Prop1Search {
        n,
        target_product,
        min,
        argmin,
        starts,
        boundary_hits,
        sqrt_target,
        holds: min >= sqrt_target - 1e-9,
    })
}

/// `L = k g / ((k-1) g / a + n - k) + (n - k) / (k g / a + n - k - 1)`.
pub fn l_value(n: usize, k: usize, a: f64, g: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::OutOfRange { what: "n", value: n as f64 });
    }
    if k < 1 || k > n {
        return Err(Error::OutOfRange { what: "k", value: k as f64 });
    }
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::OutOfRange { what: "a", value: a });
    }
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::OutOfRange { what: "g", value: g });
    }
    let (nf, kf) = (n as f64, k as f64);
    let first = kf * g / ((kf - 1.0) * g / a + nf - kf);
    let second = if k == n { 0.0 } else { (nf - kf) / (kf * g / a + nf - kf - 1.0) };
    Ok(first + second)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RValue {
    pub a: f64,
    pub a_argmax: f64,
    pub survival: f64,
    pub sqrt: f64,
    pub r: f64,
}

/// `R(F, v) = A + int_0^{v-A} (1 - F) + lambda int_0^{v-A} sqrt(F)` with
/// `A = max_x F(x) v - x`.
pub fn r_value(f: &PiecewiseCdf, v: f64, lambda: f64) -> Result<RValue> {
    if !(v > 0.0) {
        return Err(Error::OutOfRange { what: "v", value: v });
    }
    if !(lambda >= 0.0) {
        return Err(Error::Negative { what: "lambda", value: lambda });
    }
    let (a, a_argmax) = compute_aj(f, v)?;
    let upper = (v - a).max(0.0);
    let survival = f.integrate(0.0, upper, Integrand::Survival)?;
    let sqrt = f.integrate(0.0, upper, Integrand::Sqrt)?;
    Ok(RValue { a, a_argmax, survival, sqrt, r: a + survival + lambda * sqrt })
}

/// The extremal CDF: 0 on `[0, x0)`, `(x + a) / v` on `[x0, v - a]`.
/// With `x0 = 0` the mass `a / v` sits at zero.
pub fn hat_cdf(v: f64, a: f64, x0: f64) -> Result<PiecewiseCdf> {
    if !(v > 0.0) {
        return Err(Error::OutOfRange { what: "v", value: v });
    }
    if !(0.0..=v).contains(&a) {
        return Err(Error::OutOfRange { what: "A", value: a });
    }
    let upper = v - a;
    if !(0.0..=upper).contains(&x0) {
        return Err(Error::OutOfRange { what: "x0", value: x0 });
    }
    if upper == 0.0 {
        return Ok(PiecewiseCdf::zero_bid());
    }
    if x0 == upper {
        return PiecewiseCdf::point_mass(x0);
    }
    if x0 == 0.0 {
        return PiecewiseCdf::new(a / v, vec![0.0, upper], vec![a / v, 1.0]);
    }
    PiecewiseCdf::with_leading_step(0.0, vec![x0, upper], vec![(x0 + a) / v, 1.0])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HatConstruction {
    pub cdf: PiecewiseCdf,
    pub a: f64,
    pub x0: f64,
}

/// Replaces `F` by the member of the [`hat_cdf`] family with the same `A`
/// and the same `int_0^{v-A} (1 - F)`. Matching areas gives
/// `x0 = sqrt(v^2 - 2 v (v - A - I)) - A`.
pub fn hat_cdf_construct(f: &PiecewiseCdf, v: f64) -> Result<HatConstruction> {
    if !(v > 0.0) {
        return Err(Error::OutOfRange { what: "v", value: v });
    }
    let (a, _) = compute_aj(f, v)?;
    let a = a.min(v);
    let upper = v - a;
    let area = f.integrate(0.0, upper, Integrand::Survival)?;
    let x0 = ((v * v - 2.0 * v * (upper - area)).max(0.0).sqrt() - a).clamp(0.0, upper);
    Ok(HatConstruction { cdf: hat_cdf(v, a, x0)?, a, x0 })
}

/// `(3 + 4 lambda - lambda^4) / 6`, the minimum of `R(F, v) / v`.
pub fn r_lower_bound(lambda: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::OutOfRange { what: "lambda", value: lambda });
    }
    Ok((3.0 + 4.0 * lambda - lambda.powi(4)) / 6.0)
}
