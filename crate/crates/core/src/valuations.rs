//! Valuation oracles and optimal welfare.
//!
//! Combinatorial bidders hold XOS valuations (a maximum over additive
//! clauses). Multi-unit bidders hold a value for each number of identical
//! units; with nonincreasing marginals they are submodular and map onto a
//! concave piecewise-linear function of the fractional share.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Welfare comparisons treat values closer than this as equal.
pub const WELFARE_TOL: f64 = 1e-9;

/// Exhaustive combinatorial search refuses instances with more
/// assignments than this.
pub const MAX_ASSIGNMENTS: f64 = 1e7;

/// A set of items, stored as a bitmask (at most 64 items).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ItemSet(u64);

impl ItemSet {
    pub const EMPTY: ItemSet = ItemSet(0);

    pub fn full(n_items: usize) -> Self {
        assert!(n_items <= 64, "at most 64 items");
        if n_items == 64 {
            ItemSet(u64::MAX)
        } else {
            ItemSet((1u64 << n_items) - 1)
        }
    }

    pub fn from_items(items: &[usize]) -> Self {
        items.iter().fold(Self::EMPTY, |s, &j| s.with(j))
    }

    pub fn from_bits(bits: u64) -> Self {
        ItemSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, item: usize) -> bool {
        item < 64 && self.0 >> item & 1 == 1
    }

    pub fn with(self, item: usize) -> Self {
        ItemSet(self.0 | 1 << item)
    }

    pub fn without(self, item: usize) -> Self {
        ItemSet(self.0 & !(1 << item))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&j| self.contains(j))
    }

    fn highest_item(self) -> Option<usize> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as usize)
    }
}

/// `v(S) = max_k xi_k(S)` over nonnegative additive clauses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct XosValuation {
    clauses: Vec<Vec<f64>>,
}

impl TryFrom<Vec<Vec<f64>>> for XosValuation {
    type Error = Error;

    fn try_from(clauses: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(clauses)
    }
}

impl From<XosValuation> for Vec<Vec<f64>> {
    fn from(v: XosValuation) -> Self {
        v.clauses
    }
}

/// Outcome of the XOS marginal inequality `v(S) >= sum_j (v(S) - v(S \ j))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginalCheck {
    pub holds: bool,
    pub slack: f64,
}

impl XosValuation {
    pub fn new(clauses: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = clauses.first() else {
            return Err(Error::InvalidValuation("XOS valuation needs at least one clause".into()));
        };
        let m = first.len();
        if m == 0 || m > 64 {
            return Err(Error::InvalidValuation(format!("{m} items (need 1..=64)")));
        }
        for (k, c) in clauses.iter().enumerate() {
            if c.len() != m {
                return Err(Error::InvalidValuation(format!("clause {k} has {} items, expected {m}", c.len())));
            }
            if let Some(bad) = c.iter().find(|x| !x.is_finite() || **x < 0.0) {
                return Err(Error::InvalidValuation(format!("clause {k} has entry {bad}")));
            }
        }
        Ok(Self { clauses })
    }

    /// Single-clause (additive) valuation.
    pub fn additive(values: Vec<f64>) -> Result<Self> {
        Self::new(vec![values])
    }

    pub fn n_items(&self) -> usize {
        self.clauses[0].len()
    }

    pub fn clauses(&self) -> &[Vec<f64>] {
        &self.clauses
    }

    pub fn is_additive(&self) -> bool {
        self.clauses.len() == 1
    }

    fn check(&self, set: ItemSet) -> Result<()> {
        match set.highest_item() {
            Some(j) if j >= self.n_items() => Err(Error::ItemOutOfRange { item: j, n_items: self.n_items() }),
            _ => Ok(()),
        }
    }

    fn clause_value(clause: &[f64], set: ItemSet) -> f64 {
        set.iter().map(|j| clause[j]).sum()
    }

    pub fn value(&self, set: ItemSet) -> Result<f64> {
        self.check(set)?;
        Ok(self.value_unchecked(set))
    }

    pub(crate) fn value_unchecked(&self, set: ItemSet) -> f64 {
        self.clauses.iter().map(|c| Self::clause_value(c, set)).fold(0.0, f64::max)
    }

    /// Value of the highest single-item entry for `item`.
    pub fn item_cap(&self, item: usize) -> f64 {
        self.clauses.iter().map(|c| c[item]).fold(0.0, f64::max)
    }

    /// Index of a clause attaining `v(S)`; ties go to the lowest index.
    pub fn maximizing_clause(&self, set: ItemSet) -> Result<usize> {
        self.check(set)?;
        if set.is_empty() {
            return Err(Error::Empty("item set for maximizing clause"));
        }
        let mut best = (0, f64::NEG_INFINITY);
        for (k, c) in self.clauses.iter().enumerate() {
            let v = Self::clause_value(c, set);
            if v > best.1 {
                best = (k, v);
            }
        }
        Ok(best.0)
    }

    pub fn marginal_check(&self, set: ItemSet) -> Result<MarginalCheck> {
        let total = self.value(set)?;
        let marginals: f64 = set.iter().map(|j| total - self.value_unchecked(set.without(j))).sum();
        let slack = total - marginals;
        Ok(MarginalCheck { holds: slack >= -1e-12, slack })
    }
}

/// Welfare-maximizing partition of the items among XOS bidders.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombinatorialOptimum {
    /// Winner of each item.
    pub assignment: Vec<usize>,
    pub bundles: Vec<ItemSet>,
    pub welfare: f64,
    /// `o_j`: the winner's maximizing clause evaluated at item `j`.
    pub item_contribution: Vec<f64>,
}

/// Exhaustive search over all `n^m` assignments. Ties are broken in favour
/// of the lexicographically smallest assignment vector.
pub fn optimal_combinatorial(valuations: &[XosValuation]) -> Result<CombinatorialOptimum> {
    let n = valuations.len();
    if n == 0 {
        return Err(Error::Empty("valuation list"));
    }
    let m = valuations[0].n_items();
    if let Some(v) = valuations.iter().find(|v| v.n_items() != m) {
        return Err(Error::Dimension(format!("valuations over {} and {m} items", v.n_items())));
    }
    let size = (n as f64).powi(m as i32);
    if size > MAX_ASSIGNMENTS {
        return Err(Error::TooLarge { size, limit: MAX_ASSIGNMENTS });
    }

    // value tables per bundle when they fit
    let tables: Option<Vec<Vec<f64>>> = (m <= 20).then(|| {
        valuations
            .iter()
            .map(|v| (0..1u64 << m).map(|b| v.value_unchecked(ItemSet(b))).collect())
            .collect()
    });
    let value = |i: usize, s: ItemSet| match &tables {
        Some(t) => t[i][s.0 as usize],
        None => valuations[i].value_unchecked(s),
    };

    let mut assignment = vec![0usize; m];
    let mut best_assignment = assignment.clone();
    let mut best_welfare = f64::NEG_INFINITY;
    let mut bundles = vec![ItemSet::EMPTY; n];
    loop {
        bundles.iter_mut().for_each(|b| *b = ItemSet::EMPTY);
        for (j, &i) in assignment.iter().enumerate() {
            bundles[i] = bundles[i].with(j);
        }
        let welfare: f64 = bundles.iter().enumerate().map(|(i, &s)| value(i, s)).sum();
        if welfare > best_welfare + WELFARE_TOL {
            best_welfare = welfare;
            best_assignment.clone_from(&assignment);
        }
        // odometer, item 0 most significant
        let mut j = m;
        loop {
            if j == 0 {
                return Ok(finish(valuations, best_assignment, best_welfare));
            }
            j -= 1;
            assignment[j] += 1;
            if assignment[j] < n {
                break;
            }
            assignment[j] = 0;
        }
    }
}

fn finish(valuations: &[XosValuation], assignment: Vec<usize>, welfare: f64) -> CombinatorialOptimum {
    let mut bundles = vec![ItemSet::EMPTY; valuations.len()];
    for (j, &i) in assignment.iter().enumerate() {
        bundles[i] = bundles[i].with(j);
    }
    let mut item_contribution = vec![0.0; assignment.len()];
    for (i, &bundle) in bundles.iter().enumerate() {
        if bundle.is_empty() {
            continue;
        }
        let k = valuations[i].maximizing_clause(bundle).expect("bundle within range");
        for j in bundle.iter() {
            item_contribution[j] = valuations[i].clauses[k][j];
        }
    }
    CombinatorialOptimum { assignment, bundles, welfare, item_contribution }
}

/// Value for each number of identical units, `f(0..=m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MultiUnitValuation {
    values: Vec<f64>,
}

impl TryFrom<Vec<f64>> for MultiUnitValuation {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<MultiUnitValuation> for Vec<f64> {
    fn from(v: MultiUnitValuation) -> Self {
        v.values
    }
}

impl MultiUnitValuation {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidValuation("multi-unit valuation needs f(0) and f(1)".into()));
        }
        if values[0] != 0.0 {
            return Err(Error::InvalidValuation(format!("f(0) = {} must be 0", values[0])));
        }
        if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidValuation("values must be finite and nondecreasing".into()));
        }
        Ok(Self { values })
    }

    /// Builds `f` from its marginal values.
    pub fn from_marginals(marginals: &[f64]) -> Result<Self> {
        let mut values = vec![0.0];
        for &d in marginals {
            values.push(values.last().unwrap() + d);
        }
        Self::new(values)
    }

    pub fn units(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, units: usize) -> f64 {
        self.values[units]
    }

    pub fn marginal(&self, held: usize) -> f64 {
        self.values[held + 1] - self.values[held]
    }

    pub fn is_submodular(&self) -> bool {
        self.values.windows(3).all(|w| w[2] - w[1] <= w[1] - w[0] + 1e-12)
    }

    /// The piecewise-linear interpolant `g(k/m) = f(k)` on `[0, 1]`.
    pub fn to_concave(&self, m: usize) -> Result<ConcavePl> {
        if self.units() != m {
            return Err(Error::Dimension(format!("valuation over {} units, expected {m}", self.units())));
        }
        Ok(ConcavePl { values: self.values.clone() })
    }
}

/// Piecewise-linear function of the share `theta` in `[0, 1]` with
/// breakpoints at `k/m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcavePl {
    values: Vec<f64>,
}

impl ConcavePl {
    pub fn segments(&self) -> usize {
        self.values.len() - 1
    }

    pub fn breakpoint_values(&self) -> &[f64] {
        &self.values
    }

    /// `g(theta)`, with `theta` clamped to `[0, 1]`.
    pub fn eval(&self, theta: f64) -> f64 {
        let m = self.segments();
        let x = theta.clamp(0.0, 1.0) * m as f64;
        let k = (x.floor() as usize).min(m - 1);
        self.values[k] + (x - k as f64) * (self.values[k + 1] - self.values[k])
    }

    /// Slope of segment `k` with respect to the share.
    pub fn slope(&self, k: usize) -> f64 {
        self.segments() as f64 * (self.values[k + 1] - self.values[k])
    }

    pub fn is_concave(&self) -> bool {
        (1..self.segments()).all(|k| self.slope(k) <= self.slope(k - 1) + 1e-9)
    }
}

/// What to do with multi-unit inputs that are not submodular.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NonSubmodular {
    #[default]
    Reject,
    BruteForce,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiUnitOptimum {
    pub allocation: Vec<usize>,
    pub welfare: f64,
}

fn check_units(fs: &[MultiUnitValuation], m: usize) -> Result<()> {
    if fs.is_empty() {
        return Err(Error::Empty("valuation list"));
    }
    if m == 0 {
        return Err(Error::OutOfRange { what: "unit count", value: 0.0 });
    }
    match fs.iter().find(|f| f.units() != m) {
        Some(f) => Err(Error::Dimension(format!("valuation over {} units, expected {m}", f.units()))),
        None => Ok(()),
    }
}

/// Optimal integral allocation of `m` identical units: greedy on marginal
/// values (ties to the lowest player index), exact for submodular bidders.
pub fn optimal_multiunit(fs: &[MultiUnitValuation], m: usize, policy: NonSubmodular) -> Result<MultiUnitOptimum> {
    check_units(fs, m)?;
    if let Some(player) = fs.iter().position(|f| !f.is_submodular()) {
        return match policy {
            NonSubmodular::Reject => Err(Error::NotSubmodular { player }),
            NonSubmodular::BruteForce => optimal_multiunit_exhaustive(fs, m),
        };
    }
    let mut allocation = vec![0usize; fs.len()];
    for _ in 0..m {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, f) in fs.iter().enumerate() {
            let d = f.marginal(allocation[i]);
            if d > best.1 {
                best = (i, d);
            }
        }
        allocation[best.0] += 1;
    }
    let welfare = fs.iter().zip(&allocation).map(|(f, &c)| f.value(c)).sum();
    Ok(MultiUnitOptimum { allocation, welfare })
}

/// Optimal allocation by enumerating every split of `m` units.
pub fn optimal_multiunit_exhaustive(fs: &[MultiUnitValuation], m: usize) -> Result<MultiUnitOptimum> {
    check_units(fs, m)?;
    fn recurse(fs: &[MultiUnitValuation], left: usize, cur: &mut Vec<usize>, best: &mut MultiUnitOptimum) {
        let i = cur.len();
        if i + 1 == fs.len() {
            cur.push(left);
            let w: f64 = fs.iter().zip(cur.iter()).map(|(f, &c)| f.value(c)).sum();
            if w > best.welfare + WELFARE_TOL {
                best.welfare = w;
                best.allocation.clone_from(cur);
            }
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            recurse(fs, left - c, cur, best);
            cur.pop();
        }
    }
    let mut best = MultiUnitOptimum { allocation: vec![], welfare: f64::NEG_INFINITY };
    recurse(fs, m, &mut Vec::with_capacity(fs.len()), &mut best);
    Ok(best)
}

/// Maximum of `sum_i g_i(theta_i)` over the simplex, by filling the
/// steepest segments of the concave interpolants first.
pub fn continuous_optimum(gs: &[ConcavePl]) -> Result<f64> {
    if gs.is_empty() {
        return Err(Error::Empty("valuation list"));
    }
    if let Some(player) = gs.iter().position(|g| !g.is_concave()) {
        return Err(Error::NotSubmodular { player });
    }
    let mut segments: Vec<(f64, f64)> = gs
        .iter()
        .flat_map(|g| {
            let width = 1.0 / g.segments() as f64;
            (0..g.segments()).map(move |k| (g.slope(k), width))
        })
        .collect();
    segments.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut left = 1.0;
    let mut welfare: f64 = gs.iter().map(|g| g.eval(0.0)).sum();
    for (slope, width) in segments {
        if left <= 0.0 {
            break;
        }
        let take = width.min(left);
        welfare += slope * take;
        left -= take;
    }
    Ok(welfare)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_clause() -> XosValuation {
        XosValuation::new(vec![vec![3.0, 0.0], vec![0.0, 2.0]]).unwrap()
    }

    #[test]
    fn xos_value_examples() {
        let v = two_clause();
        assert_eq!(v.value(ItemSet::EMPTY).unwrap(), 0.0);
        assert_eq!(v.value(ItemSet::from_items(&[0, 1])).unwrap(), 3.0);
        let add = XosValuation::additive(vec![1.0, 1.0]).unwrap();
        assert_eq!(add.value(ItemSet::from_items(&[0])).unwrap(), 1.0);
        assert!(matches!(v.value(ItemSet::from_items(&[2])), Err(Error::ItemOutOfRange { item: 2, .. })));
    }

    #[test]
    fn maximizing_clause_examples() {
        assert_eq!(two_clause().maximizing_clause(ItemSet::full(2)).unwrap(), 0);
        let add = XosValuation::additive(vec![1.0, 1.0]).unwrap();
        assert_eq!(add.maximizing_clause(ItemSet::from_items(&[1])).unwrap(), 0);
        let tie = XosValuation::new(vec![vec![2.0, 0.0], vec![2.0, 0.0]]).unwrap();
        assert_eq!(tie.maximizing_clause(ItemSet::from_items(&[0])).unwrap(), 0);
        assert!(tie.maximizing_clause(ItemSet::EMPTY).is_err());
    }

    #[test]
    fn marginal_check_examples() {
        let add = XosValuation::additive(vec![1.0, 2.0, 0.5]).unwrap();
        let c = add.marginal_check(ItemSet::from_items(&[0, 2])).unwrap();
        assert!(c.holds);
        assert_eq!(c.slack, 0.0);
        let c = two_clause().marginal_check(ItemSet::full(2)).unwrap();
        assert!(c.holds);
        assert_eq!(c.slack, 2.0);
        let c = two_clause().marginal_check(ItemSet::EMPTY).unwrap();
        assert_eq!(c, MarginalCheck { holds: true, slack: 0.0 });
    }

    #[test]
    fn invalid_xos_rejected() {
        assert!(XosValuation::new(vec![]).is_err());
        assert!(XosValuation::new(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(XosValuation::new(vec![vec![-1.0]]).is_err());
    }

    #[test]
    fn optimal_combinatorial_examples() {
        let one = optimal_combinatorial(&[XosValuation::additive(vec![1.0, 1.0]).unwrap()]).unwrap();
        assert_eq!(one.assignment, vec![0, 0]);
        assert_eq!(one.welfare, 2.0);
        assert_eq!(one.item_contribution, vec![1.0, 1.0]);

        let two = optimal_combinatorial(&[
            XosValuation::additive(vec![3.0, 0.0]).unwrap(),
            XosValuation::additive(vec![0.0, 2.0]).unwrap(),
        ])
        .unwrap();
        assert_eq!(two.welfare, 5.0);
        assert_eq!(two.item_contribution, vec![3.0, 2.0]);
        assert_eq!(two.assignment, vec![0, 1]);

        let same = XosValuation::additive(vec![1.0, 1.0]).unwrap();
        let tie = optimal_combinatorial(&[same.clone(), same]).unwrap();
        assert_eq!(tie.welfare, 2.0);
        assert_eq!(tie.assignment, vec![0, 0]);
    }

    #[test]
    fn optimal_combinatorial_guards_size() {
        let v = XosValuation::additive(vec![1.0; 24]).unwrap();
        let err = optimal_combinatorial(&[v.clone(), v.clone(), v]).unwrap_err();
        assert!(matches!(err, Error::TooLarge { .. }));
    }

    #[test]
    fn concave_examples() {
        let f = MultiUnitValuation::new(vec![0.0, 2.0, 3.0, 3.5]).unwrap();
        let g = f.to_concave(3).unwrap();
        assert!((g.eval(0.5) - 2.5).abs() < 1e-12);
        assert!((g.eval(2.0 / 3.0) - 3.0).abs() < 1e-12);
        let line = MultiUnitValuation::new(vec![0.0, 1.0]).unwrap().to_concave(1).unwrap();
        assert_eq!(line.eval(0.3), 0.3);
        assert!(f.to_concave(2).is_err());
    }

    #[test]
    fn optimal_multiunit_examples() {
        let fs = [
            MultiUnitValuation::from_marginals(&[2.0, 1.0, 0.5]).unwrap(),
            MultiUnitValuation::from_marginals(&[1.8, 0.2, 0.1]).unwrap(),
        ];
        let opt = optimal_multiunit(&fs, 3, NonSubmodular::Reject).unwrap();
        assert_eq!(opt.allocation, vec![2, 1]);
        assert!((opt.welfare - 4.8).abs() < 1e-12);

        let solo = [MultiUnitValuation::new(vec![0.0, 1.0, 1.5]).unwrap()];
        let opt = optimal_multiunit(&solo, 2, NonSubmodular::Reject).unwrap();
        assert_eq!(opt.allocation, vec![2]);
        assert_eq!(opt.welfare, 1.5);

        let f = MultiUnitValuation::from_marginals(&[3.0, 2.0, 1.0, 0.5]).unwrap();
        let opt = optimal_multiunit(&[f.clone(), f], 4, NonSubmodular::Reject).unwrap();
        assert_eq!(opt.allocation, vec![2, 2]);
    }

    #[test]
    fn non_submodular_rejected_unless_brute_force() {
        let fs = [
            MultiUnitValuation::new(vec![0.0, 0.1, 2.0]).unwrap(),
            MultiUnitValuation::new(vec![0.0, 1.0, 1.0]).unwrap(),
        ];
        assert_eq!(optimal_multiunit(&fs, 2, NonSubmodular::Reject), Err(Error::NotSubmodular { player: 0 }));
        let opt = optimal_multiunit(&fs, 2, NonSubmodular::BruteForce).unwrap();
        assert_eq!(opt.allocation, vec![2, 0]);
    }

    fn submodular(m: usize) -> impl Strategy<Value = MultiUnitValuation> {
        prop::collection::vec(0.0f64..1.0, m).prop_map(|mut d| {
            d.sort_by(|a, b| b.total_cmp(a));
            MultiUnitValuation::from_marginals(&d).unwrap()
        })
    }

    fn instance() -> impl Strategy<Value = (Vec<MultiUnitValuation>, usize)> {
        (1usize..=8).prop_flat_map(|m| (prop::collection::vec(submodular(m), 1..=4), Just(m)))
    }

    fn random_xos() -> impl Strategy<Value = (XosValuation, u64)> {
        (1usize..=6).prop_flat_map(|m| {
            (
                prop::collection::vec(prop::collection::vec(0.0f64..1.0, m), 1..=4),
                0u64..(1 << m),
            )
                .prop_map(|(c, s)| (XosValuation::new(c).unwrap(), s))
        })
    }

    proptest! {
        #[test]
        fn greedy_matches_exhaustive((fs, m) in instance()) {
            let greedy = optimal_multiunit(&fs, m, NonSubmodular::Reject).unwrap();
            let brute = optimal_multiunit_exhaustive(&fs, m).unwrap();
            prop_assert!((greedy.welfare - brute.welfare).abs() <= 1e-9);
        }

        #[test]
        fn discrete_and_continuous_optima_agree((fs, m) in instance()) {
            let discrete = optimal_multiunit(&fs, m, NonSubmodular::Reject).unwrap().welfare;
            let gs: Vec<_> = fs.iter().map(|f| f.to_concave(m).unwrap()).collect();
            prop_assert!((continuous_optimum(&gs).unwrap() - discrete).abs() <= 1e-9);
        }

        #[test]
        fn concave_interpolant_reproduces_formula(f in submodular(5), x in 0.0f64..5.0) {
            let g = f.to_concave(5).unwrap();
            prop_assert!(g.is_concave());
            let k = x.floor() as usize;
            let expect = f.value(k) + (x - k as f64) * (f.value((k + 1).min(5)) - f.value(k));
            prop_assert!((g.eval(x / 5.0) - expect).abs() <= 1e-12);
        }

        #[test]
        fn xos_marginal_lemma((v, bits) in random_xos()) {
            let c = v.marginal_check(ItemSet::from_bits(bits)).unwrap();
            prop_assert!(c.holds, "slack {}", c.slack);
        }
    }
}
