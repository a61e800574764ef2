//! Oracles that check the bounds against actual distributions.
//!
//! Two kinds of evidence are produced. Exhaustive enumeration of a family's
//! seed space gives exact moments and tail probabilities in rational
//! arithmetic. Monte Carlo runs give tail frequencies with a standard error,
//! and a row counts as a violation when `empirical - 3 stderr` still exceeds
//! a valid bound.
//!
//! The remaining checks evaluate the calculus identities the moment bound is
//! built from (tail-integral formula for expectations, Gamma integral,
//! Stirling bound, change of variables) numerically.

mod quadrature;
mod report;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::bounds::{
    bernoulli_tail_bound, chernoff_tail, combined_tail_bound, markov_tail_from_moment,
    moment_bound_twise, refined_moment_bound, BernoulliQuery, BoundResult, ColorClassSizes, Side,
    TailQuery,
};
use crate::graph::{greedy_coloring, GreedyOrder};
use crate::sampler::{trial_seed, DependentEnsemble, TwiseFamily};
use crate::{Error, Result};

pub use quadrature::{adaptive_simpson, integrate_to_infinity};
pub use report::{ExperimentReport, TailRow, CSV_HEADER};

/// Something whose sum can be evaluated for every seed of a [`TwiseFamily`].
///
/// Deviations are exchanged as integers: `scaled_deviation` returns
/// `scale() * (X - E[X])`, which is exact because every value is a multiple
/// of `1 / prime`.
pub trait SeededSum: Sync {
    fn seed_family(&self) -> &TwiseFamily;
    fn scale(&self) -> u64;
    fn scaled_deviation(&self, seed: &TwiseFamily) -> i64;
    /// The t-wise moment bound, when every summand set is t-wise independent.
    fn lemma_bound(&self, t: u32) -> Option<BoundResult>;
    /// The class-size moment bound, when the summands t-agree with a graph.
    fn refined_bound(&self, t: u32) -> Option<BoundResult>;
}

/// `Y = sum_i poly(i) / prime` over all `m` indices of the family.
impl SeededSum for TwiseFamily {
    fn seed_family(&self) -> &TwiseFamily {
        self
    }

    fn scale(&self) -> u64 {
        2 * self.prime()
    }

    fn scaled_deviation(&self, seed: &TwiseFamily) -> i64 {
        let total: u64 = (0..self.m()).map(|i| seed.field_value(i).expect("i < m")).sum();
        2 * total as i64 - (self.m() as i64) * (self.prime() as i64 - 1)
    }

    fn lemma_bound(&self, t: u32) -> Option<BoundResult> {
        applicable(t, self.t()).then(|| moment_bound_twise(self.m() as u64, t).ok())?
    }

    fn refined_bound(&self, t: u32) -> Option<BoundResult> {
        let single = ColorClassSizes::new(vec![self.m() as u64]).ok()?;
        applicable(t, self.t()).then(|| refined_moment_bound(&single, t).ok())?
    }
}

impl SeededSum for DependentEnsemble {
    fn seed_family(&self) -> &TwiseFamily {
        self.family()
    }

    fn scale(&self) -> u64 {
        self.family().prime()
    }

    fn scaled_deviation(&self, seed: &TwiseFamily) -> i64 {
        (self.scale() * self.sum_with(seed)) as i64 - self.mean_numerator() as i64
    }

    fn lemma_bound(&self, _t: u32) -> Option<BoundResult> {
        None
    }

    fn refined_bound(&self, t: u32) -> Option<BoundResult> {
        let classes = greedy_coloring(self.graph(), GreedyOrder::Natural).class_sizes().ok()?;
        applicable(t, self.family().t()).then(|| refined_moment_bound(&classes, t).ok())?
    }
}

fn applicable(moment_order: u32, independence: usize) -> bool {
    moment_order >= 2 && moment_order % 2 == 0 && moment_order as usize <= independence
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMethod {
    Exhaustive,
    MonteCarlo,
}

/// Central t-th moment of a seeded sum next to the bounds that apply.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub t: u32,
    /// Exact value; present iff `method` is exhaustive.
    pub exact: Option<BigRational>,
    pub moment: f64,
    /// Standard error of a Monte Carlo estimate.
    pub stderr: Option<f64>,
    pub lemma_bound: Option<BoundResult>,
    pub refined_bound: Option<BoundResult>,
    pub method: MomentMethod,
}

impl MomentReport {
    /// The moment lies strictly below every bound present.
    pub fn dominated(&self) -> bool {
        [self.lemma_bound, self.refined_bound]
            .into_iter()
            .flatten()
            .all(|b| self.moment < b.value)
    }
}

/// `E[(X - mu)^t]` by enumerating every seed, in exact rational arithmetic.
pub fn exact_moment<S: SeededSum + ?Sized>(source: &S, t: u32, budget: u128) -> Result<MomentReport> {
    Ok(exact_moments(source, &[t], budget)?.remove(0))
}

/// [`exact_moment`] for several orders from one pass over the seeds.
pub fn exact_moments<S: SeededSum + ?Sized>(
    source: &S,
    orders: &[u32],
    budget: u128,
) -> Result<Vec<MomentReport>> {
    if orders.is_empty() || orders.contains(&0) {
        return Err(Error::InvalidArgument("moment orders must be positive".into()));
    }
    let histogram = deviation_histogram(source, budget)?;
    let seeds: u64 = histogram.values().sum();
    Ok(orders
        .iter()
        .map(|&t| {
            let numerator = histogram.iter().fold(BigInt::zero(), |acc, (&d, &count)| {
                acc + num_traits::pow(BigInt::from(d), t as usize) * BigInt::from(count)
            });
            let denominator =
                BigInt::from(seeds) * num_traits::pow(BigInt::from(source.scale()), t as usize);
            let exact = BigRational::new(numerator, denominator);
            MomentReport {
                t,
                moment: exact.to_f64().unwrap_or(f64::INFINITY),
                exact: Some(exact),
                stderr: None,
                lemma_bound: source.lemma_bound(t),
                refined_bound: source.refined_bound(t),
                method: MomentMethod::Exhaustive,
            }
        })
        .collect())
}

/// Monte Carlo estimate of `E[(X - mu)^t]` with `trials` fresh seeds.
pub fn estimate_moment<S: SeededSum + ?Sized>(
    source: &S,
    t: u32,
    trials: u64,
    master_seed: u64,
) -> Result<MomentReport> {
    if trials < 2 || t == 0 {
        return Err(Error::InvalidArgument(
            "need at least 2 trials and a positive moment order".into(),
        ));
    }
    let scale = source.scale() as f64;
    let (sum, sum_sq) = (0..trials)
        .into_par_iter()
        .map(|i| {
            let seed = source.seed_family().reseeded(trial_seed(master_seed, i));
            let x = (source.scaled_deviation(&seed) as f64 / scale).powi(t as i32);
            (x, x * x)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = trials as f64;
    let mean = sum / n;
    let var = ((sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
    Ok(MomentReport {
        t,
        exact: None,
        moment: mean,
        stderr: Some((var / n).sqrt()),
        lemma_bound: source.lemma_bound(t),
        refined_bound: source.refined_bound(t),
        method: MomentMethod::MonteCarlo,
    })
}

/// Exact `Pr[|X - mu| >= a]` by seed enumeration.
pub fn exact_tail_probability<S: SeededSum + ?Sized>(source: &S, a: f64, budget: u128) -> Result<f64> {
    let histogram = deviation_histogram(source, budget)?;
    let threshold = a * source.scale() as f64;
    let total: u64 = histogram.values().sum();
    let hits: u64 = histogram
        .iter()
        .filter(|(&d, _)| d.unsigned_abs() as f64 >= threshold)
        .map(|(_, &c)| c)
        .sum();
    Ok(hits as f64 / total as f64)
}

fn deviation_histogram<S: SeededSum + ?Sized>(source: &S, budget: u128) -> Result<BTreeMap<i64, u64>> {
    let mut histogram = BTreeMap::new();
    source.seed_family().for_each_seed(budget, |seed| {
        *histogram.entry(source.scaled_deviation(seed)).or_insert(0) += 1;
    })?;
    Ok(histogram)
}

/// Counts, for each threshold, the trials with `|deviation| >= threshold`.
///
/// `deviation` receives the per-trial seed derived from `master_seed` and
/// the trial index, so the counts do not depend on how rayon schedules the
/// work.
pub fn monte_carlo_counts<F>(trials: u64, master_seed: u64, thresholds: &[f64], deviation: F) -> Vec<u64>
where
    F: Fn(u64) -> i64 + Sync,
{
    (0..trials)
        .into_par_iter()
        .fold(
            || vec![0u64; thresholds.len()],
            |mut acc, i| {
                let d = deviation(trial_seed(master_seed, i)).unsigned_abs() as f64;
                for (slot, &th) in acc.iter_mut().zip(thresholds) {
                    *slot += u64::from(d >= th);
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; thresholds.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

/// Everything needed to attach bounds to a tail experiment on `n` summands.
#[derive(Debug, Clone)]
pub struct TailSetup {
    pub n: u64,
    /// Even independence order used in every bound.
    pub t: u32,
    /// Upper bound on the chromatic number of the dependency graph.
    pub chi: u64,
    /// Class sizes of the coloring behind `chi`.
    pub classes: ColorClassSizes,
    /// `(max degree, p)` when all summands are `Be(p)`.
    pub corollary: Option<(u64, f64)>,
}

impl TailSetup {
    /// Builds one report row. `a = 0` gets infinite (trivially valid) bounds.
    pub fn row(&self, a: f64, hits: u64, trials: u64) -> Result<TailRow> {
        let empirical = hits as f64 / trials as f64;
        let stderr = (empirical * (1.0 - empirical) / trials as f64).sqrt();
        let trivial = BoundResult::from_log(f64::INFINITY);
        let (theorem, refined, corollary) = if a > 0.0 {
            let theorem = combined_tail_bound(&TailQuery::new(self.n, self.t, a, self.chi)?)?;
            let refined = markov_tail_from_moment(&refined_moment_bound(&self.classes, self.t)?, self.t, a)?;
            let corollary = match self.corollary {
                Some((d, p)) if p > 0.0 && p < 1.0 => {
                    let relative = a / (p * self.n as f64);
                    Some(bernoulli_tail_bound(
                        &BernoulliQuery::new(self.n, d, self.t, p, relative)?,
                        Side::Upper,
                    )?)
                }
                _ => None,
            };
            (theorem, refined, corollary)
        } else {
            (trivial, trivial, self.corollary.map(|_| trivial))
        };
        let mut row = TailRow {
            a,
            empirical,
            stderr,
            bound_theorem: theorem,
            bound_refined: Some(refined),
            bound_corollary: corollary,
            bound_chernoff: chernoff_tail(self.n, a)?,
            vacuous: theorem.vacuous,
            violation: false,
        };
        row.violation = empirical - 3.0 * stderr > row.tightest_valid_bound();
        Ok(row)
    }
}

/// Sorted copy of the grid; rejects negative or non-finite points.
pub fn normalize_grid(a_grid: &[f64]) -> Result<Vec<f64>> {
    if a_grid.is_empty() {
        return Err(Error::InvalidArgument("a-grid is empty".into()));
    }
    if let Some(&a) = a_grid.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
        return Err(Error::InvalidArgument(format!("grid point {a} must be finite and >= 0")));
    }
    let mut grid = a_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    Ok(grid)
}

/// Runs a Monte Carlo tail experiment: `deviation` returns `scale * (X - mu)`
/// for a trial seed.
pub fn run_tail_experiment<F>(
    setup: &TailSetup,
    a_grid: &[f64],
    trials: u64,
    master_seed: u64,
    scale: f64,
    deviation: F,
) -> Result<ExperimentReport>
where
    F: Fn(u64) -> i64 + Sync,
{
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let grid = normalize_grid(a_grid)?;
    let thresholds: Vec<f64> = grid.iter().map(|a| a * scale).collect();
    let counts = monte_carlo_counts(trials, master_seed, &thresholds, deviation);
    let rows = grid
        .iter()
        .zip(counts)
        .map(|(&a, hits)| setup.row(a, hits, trials))
        .collect::<Result<Vec<_>>>()?;
    let config = vec![
        ("n".to_string(), setup.n.to_string()),
        ("t".to_string(), setup.t.to_string()),
        ("chi".to_string(), setup.chi.to_string()),
        ("trials".to_string(), trials.to_string()),
        ("master_seed".to_string(), master_seed.to_string()),
        ("a_grid".to_string(), join_grid(&grid)),
    ];
    Ok(ExperimentReport { config, trials, rows })
}

pub fn join_grid(grid: &[f64]) -> String {
    grid.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

/// Largest even number `<= t`.
pub(crate) fn even_floor(t: u32) -> u32 {
    t - t % 2
}

/// Tail experiment on a dependent ensemble: frequencies of `|X - mu| >= a`
/// with `mu = E[X]` computed exactly, next to the theorem bound (greedy
/// chromatic number), the refined class-size bound, the Bernoulli bound
/// when every vertex is an unflipped `Be(p)`, and the Chernoff reference.
pub fn estimate_tail(
    e: &DependentEnsemble,
    a_grid: &[f64],
    trials: u64,
    master_seed: u64,
) -> Result<ExperimentReport> {
    let t = even_floor(e.family().t() as u32);
    if t < 2 {
        return Err(Error::OddOrder(e.family().t() as u32));
    }
    let coloring = greedy_coloring(e.graph(), GreedyOrder::Natural);
    let prime = e.family().prime();
    let setup = TailSetup {
        n: e.n() as u64,
        t,
        chi: coloring.k() as u64,
        classes: coloring.class_sizes()?,
        corollary: (!e.has_flips())
            .then(|| (e.graph().max_degree() as u64, e.p_num() as f64 / prime as f64)),
    };
    run_tail_experiment(&setup, a_grid, trials, master_seed, e.scale() as f64, |seed| {
        e.scaled_deviation(&e.family().reseeded(seed))
    })
}

/// Checks `E[Z] = int_0^inf Pr[Z >= x] dx` for a finite distribution given
/// as `(value, probability)` pairs. The right side is integrated piecewise
/// over the sorted support. Agreement is to `1e-12`, relative to `max(1, E[Z])`.
pub fn integral_identity_check(distribution: &[(f64, f64)]) -> Result<bool> {
    if distribution.is_empty() {
        return Err(Error::InvalidArgument("distribution is empty".into()));
    }
    for &(v, p) in distribution {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InvalidArgument(format!("support point {v} must be finite and >= 0")));
        }
        if !(p.is_finite() && p >= 0.0) {
            return Err(Error::InvalidArgument(format!("probability {p} must be >= 0")));
        }
    }
    let mass: f64 = distribution.iter().map(|&(_, p)| p).sum();
    if (mass - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("probabilities sum to {mass}, not 1")));
    }
    let expectation: f64 = distribution.iter().map(|&(v, p)| v * p).sum();

    let mut sorted = distribution.to_vec();
    sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
    // Pr[Z >= x] is constant on (v_{j-1}, v_j] and equals the mass at or above v_j.
    let mut tail = mass;
    let mut prev = 0.0;
    let mut integral = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i].0;
        integral += (v - prev) * tail;
        while i < sorted.len() && sorted[i].0 == v {
            tail -= sorted[i].1;
            i += 1;
        }
        prev = v;
    }
    Ok((expectation - integral).abs() <= 1e-12 * expectation.max(1.0))
}

fn ln_factorial(k: u32) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// `int_0^inf x^k e^-x dx` by quadrature.
pub fn gamma_integral(k: u32) -> f64 {
    integrate_to_infinity(|x: f64| x.powi(k as i32) * (-x).exp(), 1e-12)
}

/// For each even `t`: `(t/2)! <= e^(1/(6t)) sqrt(pi t) (t/(2e))^(t/2)`, and
/// the quadrature of `int_0^inf x^(t/2-1) e^-x dx` matches `(t/2-1)!` to
/// relative error `1e-8`.
pub fn stirling_gamma_check(t_grid: &[u32]) -> Result<bool> {
    for &t in t_grid {
        if t < 2 || t % 2 != 0 {
            return Err(Error::OddOrder(t));
        }
        let tf = t as f64;
        let half = t / 2;
        let stirling = 1.0 / (6.0 * tf) + 0.5 * (std::f64::consts::PI * tf).ln()
            + 0.5 * tf * (tf / (2.0 * std::f64::consts::E)).ln();
        if ln_factorial(half) > stirling {
            return Ok(false);
        }
        let exact = ln_factorial(half - 1).exp();
        if ((gamma_integral(half - 1) - exact) / exact).abs() > 1e-8 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Both sides of the change of variables in the t-wise moment bound:
/// `2 int_0^inf exp(-x^(2/t) / (2m)) dx` and
/// `2 (t/2) (2m)^(t/2) int_0^inf x^(t/2-1) e^-x dx`, each by quadrature.
pub fn chernoff_integral_sides(m: u64, t: u32) -> (f64, f64) {
    let mf = m as f64;
    let exponent = 2.0 / t as f64;
    let lhs = 2.0 * integrate_to_infinity(|x: f64| (-x.powf(exponent) / (2.0 * mf)).exp(), 1e-11);
    let half = t as f64 / 2.0;
    let rhs = 2.0 * half * (2.0 * mf).powf(half) * gamma_integral(t / 2 - 1);
    (lhs, rhs)
}

/// Checks [`chernoff_integral_sides`] agree to relative error `1e-6` for
/// every `(m, t)` pair of the grids.
pub fn chernoff_consistency_check(m_grid: &[u64], t_grid: &[u32]) -> Result<bool> {
    for &t in t_grid {
        if t < 2 || t % 2 != 0 {
            return Err(Error::OddOrder(t));
        }
        for &m in m_grid {
            if m == 0 {
                return Err(Error::InvalidArgument("m must be positive".into()));
            }
            let (lhs, rhs) = chernoff_integral_sides(m, t);
            if ((lhs - rhs) / rhs).abs() > 1e-6 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{make_clique_ensemble, new_family, Flips, EXHAUSTIVE_BUDGET};
    use num_traits::One;

    #[test]
    fn family_second_moment_is_dominated() {
        let f = new_family(5, 2, 0).unwrap();
        let r = exact_moment(&f, 2, EXHAUSTIVE_BUDGET).unwrap();
        assert_eq!(r.method, MomentMethod::Exhaustive);
        // Each value is uniform on {0,...,4}/5 with variance (25-1)/(12*25);
        // pairwise independence makes the variances add.
        let expected = BigRational::new(BigInt::from(5 * 24), BigInt::from(12 * 25));
        assert_eq!(r.exact.clone().unwrap(), expected);
        assert!(r.dominated());
        assert!((r.lemma_bound.unwrap().value - 20.045_488_983_644_533).abs() < 1e-9);
    }

    #[test]
    fn second_moment_matches_covariance_formula() {
        let e = make_clique_ensemble(3, 2, 2, 2, 0, Flips::Alternating).unwrap();
        let r = exact_moment(&e, 2, EXHAUSTIVE_BUDGET).unwrap();
        // Var(X) = sum_{u,v} Cov(X_u, X_v), each term by enumeration.
        let n = e.n();
        let mut seeds = Vec::new();
        e.family().for_each_seed(EXHAUSTIVE_BUDGET, |s| seeds.push(s.clone())).unwrap();
        let count = BigInt::from(seeds.len());
        let mean = |v: usize| {
            BigRational::new(seeds.iter().map(|s| BigInt::from(e.vertex_value(s, v))).sum(), count.clone())
        };
        let mut var = BigRational::zero();
        for u in 0..n {
            for v in 0..n {
                let joint = BigRational::new(
                    seeds
                        .iter()
                        .map(|s| BigInt::from(e.vertex_value(s, u) * e.vertex_value(s, v)))
                        .sum(),
                    count.clone(),
                );
                var += joint - mean(u) * mean(v);
            }
        }
        assert_eq!(r.exact.unwrap(), var);
    }

    #[test]
    fn constant_ensemble_has_zero_moment() {
        let e = make_clique_ensemble(3, 2, 2, 5, 0, Flips::None).unwrap();
        let r = exact_moment(&e, 2, EXHAUSTIVE_BUDGET).unwrap();
        assert!(r.exact.unwrap().is_zero());
        assert!(r.lemma_bound.is_none());
        assert!(r.refined_bound.unwrap().value > 0.0);
    }

    #[test]
    fn moment_budget_is_enforced() {
        let f = TwiseFamily::with_prime(5, 6, 101, 0).unwrap();
        assert!(matches!(exact_moment(&f, 2, 1000), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn monte_carlo_moment_brackets_exact() {
        let e = make_clique_ensemble(5, 3, 4, 5, 0, Flips::None).unwrap();
        let exact = exact_moment(&e, 4, EXHAUSTIVE_BUDGET).unwrap();
        let mc = estimate_moment(&e, 4, 20_000, 9).unwrap();
        assert_eq!(mc.method, MomentMethod::MonteCarlo);
        assert!((mc.moment - exact.moment).abs() < 5.0 * mc.stderr.unwrap());
    }

    #[test]
    fn tail_edges() {
        let e = make_clique_ensemble(10, 2, 2, 5, 1, Flips::None).unwrap();
        let r = estimate_tail(&e, &[0.0, 21.0], 500, 3).unwrap();
        assert_eq!(r.rows[0].empirical, 1.0);
        assert_eq!(r.rows[1].empirical, 0.0);
        assert!(r.violations().is_empty());
        assert!(estimate_tail(&e, &[1.0], 0, 3).is_err());
    }

    #[test]
    fn tail_rows_sorted_and_csv_shaped() {
        let e = make_clique_ensemble(6, 2, 2, 3, 1, Flips::None).unwrap();
        let r = estimate_tail(&e, &[4.0, 1.0, 2.0], 1000, 3).unwrap();
        let a: Vec<f64> = r.rows.iter().map(|r| r.a).collect();
        assert_eq!(a, vec![1.0, 2.0, 4.0]);
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 4);
        assert!(lines[1..].iter().all(|l| l.split(',').count() == 9));
        for row in &r.rows {
            assert!((row.stderr - (row.empirical * (1.0 - row.empirical) / 1000.0).sqrt()).abs() < 1e-15);
            assert!(row.bound_refined.unwrap().value <= row.bound_theorem.value * (1.0 + 1e-12));
        }
    }

    #[test]
    fn exhaustive_tail_agrees_with_monte_carlo() {
        let e = make_clique_ensemble(7, 2, 2, 3, 1, Flips::None).unwrap();
        let trials = 40_000;
        let r = estimate_tail(&e, &[1.0, 3.0, 5.0], trials, 11).unwrap();
        for row in &r.rows {
            let exact = exact_tail_probability(&e, row.a, EXHAUSTIVE_BUDGET).unwrap();
            let se = (exact * (1.0 - exact) / trials as f64).sqrt().max(1e-12);
            assert!((row.empirical - exact).abs() <= 4.0 * se, "a={} {} vs {}", row.a, row.empirical, exact);
        }
    }

    #[test]
    fn deterministic_counts_across_thread_counts() {
        let e = make_clique_ensemble(10, 3, 4, 6, 5, Flips::None).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate_tail(&e, &[3.0, 6.0, 9.0], 5000, 77).unwrap().to_csv())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn integral_identity_examples() {
        let third = 1.0 / 3.0;
        assert!(integral_identity_check(&[(0.0, third), (1.0, third), (2.0, third)]).unwrap());
        assert!(integral_identity_check(&[(4.5, 1.0)]).unwrap());
        assert!(integral_identity_check(&[(2.0, 0.25), (0.5, 0.5), (2.0, 0.25)]).unwrap());
        assert!(integral_identity_check(&[(-1.0, 1.0)]).is_err());
        assert!(integral_identity_check(&[(1.0, 0.5)]).is_err());
    }

    #[test]
    fn integral_identity_on_moment_distribution() {
        // Z = |Y - mu|^4 for the pairwise family m = 5, prime = 5.
        let f = new_family(5, 2, 0).unwrap();
        let histogram = deviation_histogram(&f, EXHAUSTIVE_BUDGET).unwrap();
        let total: u64 = histogram.values().sum();
        let scale = f.scale() as f64;
        let dist: Vec<(f64, f64)> = histogram
            .iter()
            .map(|(&d, &c)| ((d as f64 / scale).powi(4), c as f64 / total as f64))
            .collect();
        assert!(integral_identity_check(&dist).unwrap());
        let moment = exact_moment(&f, 4, EXHAUSTIVE_BUDGET).unwrap();
        let mean: f64 = dist.iter().map(|(v, p)| v * p).sum();
        assert!((mean - moment.moment).abs() < 1e-12);
    }

    #[test]
    fn stirling_examples() {
        assert!(stirling_gamma_check(&[2]).unwrap());
        assert!(stirling_gamma_check(&[4]).unwrap());
        assert!((gamma_integral(1) - 1.0).abs() < 1e-10);
        assert!(stirling_gamma_check(&[3]).is_err());
    }

    #[test]
    fn chernoff_integral_examples() {
        let (lhs, rhs) = chernoff_integral_sides(1, 2);
        assert!((lhs - 4.0).abs() < 1e-8);
        assert!((rhs - 4.0).abs() < 1e-8);
        let (lhs, rhs) = chernoff_integral_sides(3, 4);
        assert!(((lhs - rhs) / rhs).abs() < 1e-6);
        // Closed form at t = 2 is 4m for every m.
        for m in [2u64, 5, 11] {
            let (lhs, _) = chernoff_integral_sides(m, 2);
            assert!((lhs / (4.0 * m as f64) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn rational_moment_is_normalized() {
        let f = new_family(3, 2, 0).unwrap();
        let r = exact_moment(&f, 2, EXHAUSTIVE_BUDGET).unwrap();
        let exact = r.exact.unwrap();
        assert!(exact < BigRational::one());
        assert!((exact.to_f64().unwrap() - r.moment).abs() < 1e-15);
    }
}
