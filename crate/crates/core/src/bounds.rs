//! Closed-form tail and moment bounds.
//!
//! Every bound is evaluated as a natural logarithm first. Expressions like
//! `(n t chi)^(t/2)` leave the range of `f64` quickly, so the linear value is
//! only materialized at the end and may be `inf` for absurd inputs while the
//! log stays exact.
//!
//! The headline tail bound for `X = sum X_i` with `X_i in [0,1]` that t-agree
//! with a graph of chromatic number `chi` is
//!
//! ```text
//! Pr[|X - mu| >= a] < 2 sqrt(pi t) * (sqrt(n t chi) / a)^t
//! ```
//!
//! It comes from splitting `X` along a proper coloring, bounding the t-th
//! central moment of each color class (t-wise independent moment bound),
//! recombining with Jensen-optimal weights, and applying Markov. The
//! intermediate [`refined_moment_bound`] keeps the actual class sizes and the
//! constants the headline form drops, so it is never looser.

use std::f64::consts::{LN_2, PI};

use crate::{Error, Result};

/// A bound carried in log space together with its linear view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundResult {
    /// Natural log of the bound.
    pub log_value: f64,
    /// `exp(log_value)`; may exceed 1.
    pub value: f64,
    /// `min(value, 1)`.
    pub clamped: f64,
    /// `value >= 1`: the bound is valid but says nothing.
    pub vacuous: bool,
}

impl BoundResult {
    pub fn from_log(log_value: f64) -> Self {
        let value = log_value.exp();
        Self {
            log_value,
            value,
            clamped: value.min(1.0),
            vacuous: value >= 1.0,
        }
    }
}

/// Parameters of the headline tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailQuery {
    /// Number of variables.
    pub n: u64,
    /// Independence order; positive and even.
    pub t: u32,
    /// Absolute deviation.
    pub a: f64,
    /// Chromatic number of the dependency graph, or any upper bound on it.
    pub chi: u64,
}

impl TailQuery {
    pub fn new(n: u64, t: u32, a: f64, chi: u64) -> Result<Self> {
        let q = Self { n, t, a, chi };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        check_even(self.t)?;
        check_positive("a", self.a)?;
        check_count("n", self.n)?;
        check_count("chi", self.chi)?;
        if self.chi > self.n {
            return Err(Error::InvalidArgument(format!(
                "chi = {} exceeds n = {}",
                self.chi, self.n
            )));
        }
        Ok(())
    }
}

/// Parameters of the Bernoulli / bounded-degree tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernoulliQuery {
    pub n: u64,
    /// Maximum degree of the dependency graph.
    pub d: u64,
    pub t: u32,
    /// Success probability of every `X_i`.
    pub p: f64,
    /// Relative deviation: the events are `X >= (1+a) p n` and `X <= (1-a) p n`.
    pub a: f64,
}

impl BernoulliQuery {
    pub fn new(n: u64, d: u64, t: u32, p: f64, a: f64) -> Result<Self> {
        let q = Self { n, d, t, p, a };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        check_even(self.t)?;
        check_count("n", self.n)?;
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::ProbabilityOutOfRange(self.p));
        }
        check_positive("a", self.a)
    }
}

/// Which side of the mean a Bernoulli tail event sits on. The bound is the
/// same for both; the side only labels the event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Upper,
    Lower,
}

/// Sizes of the color classes of a proper coloring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorClassSizes(Vec<u64>);

impl ColorClassSizes {
    pub fn new(sizes: Vec<u64>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::EmptyClasses);
        }
        if sizes.contains(&0) {
            return Err(Error::EmptyClass);
        }
        Ok(Self(sizes))
    }

    pub fn sizes(&self) -> &[u64] {
        &self.0
    }

    /// Number of classes.
    pub fn k(&self) -> usize {
        self.0.len()
    }

    /// Total number of vertices.
    pub fn n(&self) -> u64 {
        self.0.iter().sum()
    }
}

fn check_even(t: u32) -> Result<()> {
    if t == 0 || t % 2 != 0 {
        return Err(Error::OddOrder(t));
    }
    Ok(())
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::NonPositive { name, value });
    }
    Ok(())
}

fn check_count(name: &'static str, value: u64) -> Result<()> {
    if value == 0 {
        return Err(Error::NonPositive { name, value: 0.0 });
    }
    Ok(())
}

/// `ln(2 sqrt(pi t))`, shared by every t-th moment bound.
fn log_moment_prefactor(t: u32) -> f64 {
    LN_2 + 0.5 * (PI * t as f64).ln()
}

/// Log of the t-wise moment constant `2 e^(1/(6t)) sqrt(pi t) (m t / e)^(t/2)`.
fn log_twise_moment(m: f64, t: u32) -> f64 {
    let tf = t as f64;
    log_moment_prefactor(t) + 1.0 / (6.0 * tf) + 0.5 * tf * (m.ln() + tf.ln() - 1.0)
}

/// Upper bound on `E[(Y - mu)^t]` for `Y` a sum of `m` t-wise independent
/// `[0,1]` variables: `2 e^(1/(6t)) sqrt(pi t) (m t / e)^(t/2)`.
pub fn moment_bound_twise(m: u64, t: u32) -> Result<BoundResult> {
    check_even(t)?;
    check_count("m", m)?;
    Ok(BoundResult::from_log(log_twise_moment(m as f64, t)))
}

/// Chernoff tail for `m` fully independent `[0,1]` variables:
/// `Pr[|Y - mu| > a] < 2 e^(-a^2 / (2m))`.
pub fn chernoff_tail(m: u64, a: f64) -> Result<BoundResult> {
    check_count("m", m)?;
    if !(a >= 0.0) {
        return Err(Error::InvalidArgument(format!("a must be nonnegative, got {a}")));
    }
    Ok(BoundResult::from_log(LN_2 - a * a / (2.0 * m as f64)))
}

/// Headline tail bound `2 sqrt(pi t) (sqrt(n t chi) / a)^t`.
pub fn combined_tail_bound(q: &TailQuery) -> Result<BoundResult> {
    q.validate()?;
    let tf = q.t as f64;
    let log_ratio = 0.5 * (q.n as f64 * tf * q.chi as f64).ln() - q.a.ln();
    Ok(BoundResult::from_log(log_moment_prefactor(q.t) + tf * log_ratio))
}

/// Bernoulli tail bound `2 sqrt(pi t) (sqrt((d+1) t) / (a p sqrt(n)))^t`,
/// valid for either side.
pub fn bernoulli_tail_bound(q: &BernoulliQuery, _side: Side) -> Result<BoundResult> {
    q.validate()?;
    let tf = q.t as f64;
    let log_ratio = 0.5 * ((q.d + 1) as f64 * tf).ln()
        - q.a.ln()
        - q.p.ln()
        - 0.5 * (q.n as f64).ln();
    Ok(BoundResult::from_log(log_moment_prefactor(q.t) + tf * log_ratio))
}

/// Headline moment bound `2 sqrt(pi t) (k n t)^(t/2)` for `n` variables
/// split into `k` classes.
pub fn headline_moment_bound(k: u64, n: u64, t: u32) -> Result<BoundResult> {
    check_even(t)?;
    check_count("k", k)?;
    check_count("n", n)?;
    let tf = t as f64;
    Ok(BoundResult::from_log(
        log_moment_prefactor(t) + 0.5 * tf * (k as f64 * n as f64 * tf).ln(),
    ))
}

/// Moment bound `(sum_j q_j)^t` with `q_j^t` the t-wise moment bound of class
/// `j`. This is the value reached with the Jensen-optimal class weights
/// `p_j = q_j / sum q`.
pub fn refined_moment_bound(classes: &ColorClassSizes, t: u32) -> Result<BoundResult> {
    check_even(t)?;
    let tf = t as f64;
    let log_q: Vec<f64> = classes
        .sizes()
        .iter()
        .map(|&size| log_twise_moment(size as f64, t) / tf)
        .collect();
    Ok(BoundResult::from_log(tf * log_sum_exp(&log_q)))
}

/// Markov step: `Pr[|X - mu| >= a] <= E[(X - mu)^t] / a^t`.
pub fn markov_tail_from_moment(moment: &BoundResult, t: u32, a: f64) -> Result<BoundResult> {
    check_even(t)?;
    check_positive("a", a)?;
    Ok(BoundResult::from_log(moment.log_value - t as f64 * a.ln()))
}

/// Scans `t in {2, 4, ..., t_max}` and returns the order giving the smallest
/// bound. Ties go to the smaller `t`.
///
/// With `refinement` the scanned bound is the Markov tail of
/// [`refined_moment_bound`] for those class sizes; otherwise it is
/// [`combined_tail_bound`].
pub fn optimize_t(
    n: u64,
    chi: u64,
    a: f64,
    t_max: u32,
    refinement: Option<&ColorClassSizes>,
) -> Result<(u32, BoundResult)> {
    if t_max < 2 {
        return Err(Error::InvalidArgument(format!("t_max must be at least 2, got {t_max}")));
    }
    let mut best: Option<(u32, BoundResult)> = None;
    for t in (2..=t_max).step_by(2) {
        let bound = match refinement {
            Some(classes) => markov_tail_from_moment(&refined_moment_bound(classes, t)?, t, a)?,
            None => combined_tail_bound(&TailQuery::new(n, t, a, chi)?)?,
        };
        if best.map_or(true, |(_, b)| bound.log_value < b.log_value) {
            best = Some((t, bound));
        }
    }
    Ok(best.expect("t_max >= 2 yields at least one candidate"))
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn moment_bound_values() {
        // 2 e^(1/12) sqrt(2 pi) (20/e), evaluated at 40 digits.
        let b = moment_bound_twise(10, 2).unwrap();
        assert_relative_eq!(b.value, 40.090_977_967_289_07, max_relative = 1e-12);
        let b = moment_bound_twise(1, 2).unwrap();
        assert_relative_eq!(b.value, 4.009_097_796_728_907, max_relative = 1e-12);
        // Ten fair coins have variance 2.5; one [0,1] variable at most 1/4.
        assert!(2.5 < moment_bound_twise(10, 2).unwrap().value);
        assert!(0.25 < moment_bound_twise(1, 2).unwrap().value);
    }

    #[test]
    fn moment_bound_rejects_bad_input() {
        assert_eq!(moment_bound_twise(10, 3), Err(Error::OddOrder(3)));
        assert_eq!(moment_bound_twise(10, 0), Err(Error::OddOrder(0)));
        assert!(moment_bound_twise(0, 2).is_err());
    }

    #[test]
    fn chernoff_values() {
        let b = chernoff_tail(2, 2.0).unwrap();
        assert_relative_eq!(b.value, 0.735_758_882_342_884_6, max_relative = 1e-12);
        let zero = chernoff_tail(7, 0.0).unwrap();
        assert_eq!(zero.value, 2.0);
        assert!(zero.vacuous);
        let mut prev = f64::INFINITY;
        for a in [0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
            let v = chernoff_tail(1, a).unwrap().value;
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 1e-50);
        assert!(chernoff_tail(1, -1.0).is_err());
    }

    #[test]
    fn combined_values() {
        let b = combined_tail_bound(&TailQuery::new(100, 4, 200.0, 5).unwrap()).unwrap();
        assert_relative_eq!(b.value, 0.017_724_538_509_055_16, max_relative = 1e-12);
        assert!(!b.vacuous);
        let b = combined_tail_bound(&TailQuery::new(1, 2, 10.0, 1).unwrap()).unwrap();
        assert_relative_eq!(b.value, 0.100_265_130_985_240_02, max_relative = 1e-12);
    }

    #[test]
    fn combined_collapses_when_a_squared_is_ntchi() {
        for (n, t, chi) in [(10u64, 2u32, 2u64), (50, 4, 3), (7, 6, 1)] {
            let a = ((n * t as u64 * chi) as f64).sqrt();
            let b = combined_tail_bound(&TailQuery { n, t, a, chi }).unwrap();
            assert_relative_eq!(b.value, 2.0 * (PI * t as f64).sqrt(), max_relative = 1e-12);
            assert!(b.vacuous);
        }
    }

    #[test]
    fn combined_rejects_bad_input() {
        assert_eq!(TailQuery::new(10, 3, 1.0, 1), Err(Error::OddOrder(3)));
        assert!(TailQuery::new(10, 2, 0.0, 1).is_err());
        assert!(TailQuery::new(10, 2, -1.0, 1).is_err());
        assert!(TailQuery::new(10, 2, 1.0, 0).is_err());
        assert!(TailQuery::new(10, 2, 1.0, 11).is_err());
    }

    #[test]
    fn bernoulli_values() {
        let q = BernoulliQuery::new(10_000, 4, 4, 0.5, 0.2).unwrap();
        let up = bernoulli_tail_bound(&q, Side::Upper).unwrap();
        let down = bernoulli_tail_bound(&q, Side::Lower).unwrap();
        assert_relative_eq!(up.value, 0.283_592_616_144_882_56, max_relative = 1e-12);
        assert_eq!(up, down);

        let q = BernoulliQuery::new(100, 4, 4, 0.5, 0.9).unwrap();
        let b = bernoulli_tail_bound(&q, Side::Upper).unwrap();
        assert_relative_eq!(b.value, 6.915_838_832_979_913, max_relative = 1e-12);
        assert!(b.vacuous);
        assert_eq!(b.clamped, 1.0);
    }

    #[test]
    fn bernoulli_rejects_bad_input() {
        assert_eq!(
            BernoulliQuery::new(10, 1, 2, 1.0, 0.1),
            Err(Error::ProbabilityOutOfRange(1.0))
        );
        assert!(BernoulliQuery::new(10, 1, 2, 0.0, 0.1).is_err());
        assert_eq!(BernoulliQuery::new(10, 1, 5, 0.5, 0.1), Err(Error::OddOrder(5)));
    }

    #[test]
    fn refined_values() {
        let classes = ColorClassSizes::new(vec![3, 3, 4]).unwrap();
        let refined = refined_moment_bound(&classes, 2).unwrap();
        assert_relative_eq!(refined.value, 119.697_253_359_237_78, max_relative = 1e-12);
        let headline = headline_moment_bound(3, 10, 2).unwrap();
        assert_relative_eq!(headline.value, 300.795_392_955_720_06, max_relative = 1e-12);
        assert!(refined.value < headline.value);
    }

    #[test]
    fn refined_single_class_is_twise_bound() {
        for (m, t) in [(1u64, 2u32), (7, 4), (100, 10)] {
            let single = ColorClassSizes::new(vec![m]).unwrap();
            let r = refined_moment_bound(&single, t).unwrap();
            let l = moment_bound_twise(m, t).unwrap();
            assert_relative_eq!(r.log_value, l.log_value, max_relative = 1e-14);
        }
    }

    #[test]
    fn refined_unit_classes() {
        let n = 9u64;
        let t = 4u32;
        let classes = ColorClassSizes::new(vec![1; n as usize]).unwrap();
        let r = refined_moment_bound(&classes, t).unwrap();
        let tf = t as f64;
        let expected = 2.0
            * (1.0 / (6.0 * tf)).exp()
            * (PI * tf).sqrt()
            * (tf / std::f64::consts::E).powf(tf / 2.0)
            * (n as f64).powi(t as i32);
        assert_relative_eq!(r.value, expected, max_relative = 1e-12);
    }

    #[test]
    fn class_sizes_validation() {
        assert_eq!(ColorClassSizes::new(vec![]), Err(Error::EmptyClasses));
        assert_eq!(ColorClassSizes::new(vec![1, 0]), Err(Error::EmptyClass));
        let c = ColorClassSizes::new(vec![2, 5]).unwrap();
        assert_eq!((c.k(), c.n()), (2, 7));
    }

    #[test]
    fn markov_values() {
        let m = BoundResult::from_log(3.0f64.ln());
        assert_relative_eq!(markov_tail_from_moment(&m, 2, 1.0).unwrap().value, 3.0);
        let classes = ColorClassSizes::new(vec![3, 3, 4]).unwrap();
        let refined = refined_moment_bound(&classes, 2).unwrap();
        let tail = markov_tail_from_moment(&refined, 2, 200.0).unwrap();
        assert_relative_eq!(tail.value, 0.002_992_431_333_980_944_5, max_relative = 1e-12);
        let headline = combined_tail_bound(&TailQuery::new(10, 2, 200.0, 3).unwrap()).unwrap();
        assert_relative_eq!(headline.value, 0.007_519_884_823_893_001, max_relative = 1e-12);
        assert!(tail.value <= headline.value);

        let half = markov_tail_from_moment(&refined, 2, 100.0).unwrap();
        assert_relative_eq!(half.value / tail.value, 4.0, max_relative = 1e-12);
        assert!(markov_tail_from_moment(&refined, 2, 0.0).is_err());
    }

    #[test]
    fn optimize_t_brute_force() {
        // 2 sqrt(pi t) (sqrt(500 t) / 600)^t over t in {2,4,6,8}, at 40 digits.
        let candidates = [
            (2, 0.013_925_712_636_838_89),
            (4, 0.000_218_821_463_074_755_07),
            (6, 5.025_008_712_210_192e-6),
            (8, 1.528_198_917_622_923_6e-7),
        ];
        let (t_best, bound) = optimize_t(100, 5, 600.0, 8, None).unwrap();
        let (t_exp, v_exp) = candidates
            .iter()
            .copied()
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        assert_eq!(t_best, t_exp);
        assert_relative_eq!(bound.value, v_exp, max_relative = 1e-12);
    }

    #[test]
    fn optimize_t_never_fails_on_vacuous() {
        let (t, b) = optimize_t(1000, 10, 1.0, 10, None).unwrap();
        assert_eq!(t, 2);
        assert!(b.vacuous);
        let (t, _) = optimize_t(100, 5, 600.0, 2, None).unwrap();
        assert_eq!(t, 2);
        assert!(optimize_t(100, 5, 600.0, 1, None).is_err());
    }

    #[test]
    fn optimize_t_with_refinement_beats_headline() {
        let classes = ColorClassSizes::new(vec![20; 5]).unwrap();
        let (_, plain) = optimize_t(100, 5, 60.0, 12, None).unwrap();
        let (_, refined) = optimize_t(100, 5, 60.0, 12, Some(&classes)).unwrap();
        assert!(refined.log_value <= plain.log_value);
    }

    #[test]
    fn log_sum_exp_matches_direct() {
        let xs = [0.1f64, -2.0, 3.5];
        let direct = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert_relative_eq!(log_sum_exp(&xs), direct, max_relative = 1e-14);
    }

    #[test]
    fn large_t_stays_finite_in_log_space() {
        let b = combined_tail_bound(&TailQuery::new(1_000_000, 400, 10.0, 50).unwrap()).unwrap();
        assert!(b.log_value.is_finite());
        assert!(b.value.is_infinite());
        assert!(b.vacuous);
    }
}
