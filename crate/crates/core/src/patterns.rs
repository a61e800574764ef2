//! Pattern occurrences in random strings.
//!
//! Letters are drawn from a t-wise independent family (or from clique blocks
//! of one), and the statistic is the number of positions where a fixed word
//! occurs contiguously. Window indicators that share no underlying family
//! value are independent, so the indicators t'-agree with the "shares a
//! value" graph, where `t' = t / (values read per window)`. That graph is
//! colored greedily and the headline bound is applied with its color count.
//!
//! The subsequence statistic (all increasing index tuples) is counted but not
//! bounded: its dependency structure is far denser.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::bounds::{combined_tail_bound, BoundResult, ColorClassSizes, TailQuery};
use crate::graph::{greedy_coloring, make_window_overlap_graph, DependencyGraph, GreedyOrder};
use crate::sampler::{is_prime, next_prime_at_least, trial_seed, TwiseFamily};
use crate::verify::{even_floor, run_tail_experiment, ExperimentReport, TailSetup};
use crate::{Error, Result};

/// Letters are written `a`, `b`, ... so at most 26 are supported.
pub const MAX_ALPHABET: usize = 26;

/// Parses a word over the first `alphabet` lowercase letters into letter ids.
pub fn parse_letters(text: &str, alphabet: usize) -> Result<Vec<u8>> {
    if !(2..=MAX_ALPHABET).contains(&alphabet) {
        return Err(Error::InvalidArgument(format!(
            "alphabet size must be in 2..={MAX_ALPHABET}, got {alphabet}"
        )));
    }
    text.bytes()
        .map(|b| {
            let id = b.wrapping_sub(b'a');
            if (id as usize) < alphabet {
                Ok(id)
            } else {
                Err(Error::InvalidArgument(format!(
                    "letter '{}' is outside the alphabet a..{}",
                    b as char,
                    (b'a' + alphabet as u8 - 1) as char
                )))
            }
        })
        .collect()
}

/// Inverse of [`parse_letters`].
pub fn render_letters(letters: &[u8]) -> String {
    letters.iter().map(|&l| (b'a' + l) as char).collect()
}

/// Number of positions `i` with `s[i..i + |w|] == w`; overlapping matches
/// all count.
pub fn count_window_occurrences<T: PartialEq>(s: &[T], w: &[T]) -> u64 {
    if w.is_empty() || w.len() > s.len() {
        return 0;
    }
    s.windows(w.len()).filter(|win| *win == w).count() as u64
}

/// Number of index tuples `i_1 < ... < i_d` with `s[i_1] ... s[i_d] == w`,
/// by the usual `O(|s| |w|)` prefix-count dynamic program. The empty word
/// occurs once.
pub fn count_subsequence_occurrences<T: PartialEq>(s: &[T], w: &[T]) -> u128 {
    // ways[j]: tuples matching w[..j] within the prefix read so far.
    let mut ways = vec![0u128; w.len() + 1];
    ways[0] = 1;
    for c in s {
        for j in (1..=w.len()).rev() {
            if w[j - 1] == *c {
                ways[j] += ways[j - 1];
            }
        }
    }
    ways[w.len()]
}

/// How letters are generated from the underlying family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LetterSource {
    /// Position `i` reads family index `i`: letters are t-wise independent.
    Independent,
    /// Runs of `block_size` consecutive positions share one family index, so
    /// letters inside a run are equal.
    CliqueBlocks { block_size: usize },
}

/// A random string model together with the word being counted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternInstance {
    alphabet: usize,
    word: Vec<u8>,
    n: usize,
    source: LetterSource,
}

impl PatternInstance {
    pub fn new(alphabet: usize, word: Vec<u8>, n: usize, source: LetterSource) -> Result<Self> {
        if !(2..=MAX_ALPHABET).contains(&alphabet) {
            return Err(Error::InvalidArgument(format!(
                "alphabet size must be in 2..={MAX_ALPHABET}, got {alphabet}"
            )));
        }
        if word.is_empty() || word.len() > n {
            return Err(Error::InvalidArgument(format!(
                "word length {} must be between 1 and n = {n}",
                word.len()
            )));
        }
        if let Some(&l) = word.iter().find(|&&l| l as usize >= alphabet) {
            return Err(Error::InvalidArgument(format!("letter id {l} outside the alphabet")));
        }
        if let LetterSource::CliqueBlocks { block_size: 0 } = source {
            return Err(Error::InvalidArgument("block_size must be at least 1".into()));
        }
        Ok(Self { alphabet, word, n, source })
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn word(&self) -> &[u8] {
        &self.word
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn source(&self) -> LetterSource {
        self.source
    }

    pub fn d(&self) -> usize {
        self.word.len()
    }

    pub fn windows(&self) -> usize {
        self.n - self.d() + 1
    }

    /// Number of family indices the string reads.
    pub fn family_size(&self) -> usize {
        match self.source {
            LetterSource::Independent => self.n,
            LetterSource::CliqueBlocks { block_size } => self.n.div_ceil(block_size),
        }
    }

    fn family_index(&self, pos: usize) -> usize {
        match self.source {
            LetterSource::Independent => pos,
            LetterSource::CliqueBlocks { block_size } => pos / block_size,
        }
    }

    /// Distinct family indices read by window `i`, ascending.
    fn window_indices(&self, i: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (i..i + self.d()).map(|p| self.family_index(p)).collect();
        idx.dedup();
        idx
    }

    /// Largest number of distinct family values a single window reads.
    pub fn values_per_window(&self) -> usize {
        (0..self.windows()).map(|i| self.window_indices(i).len()).max().unwrap_or(0)
    }

    /// Windows are adjacent iff they read a common family value.
    pub fn window_graph(&self) -> Result<DependencyGraph> {
        match self.source {
            LetterSource::Independent => make_window_overlap_graph(self.n, self.d()),
            LetterSource::CliqueBlocks { .. } => {
                let reads: Vec<Vec<usize>> = (0..self.windows()).map(|i| self.window_indices(i)).collect();
                let mut edges = Vec::new();
                for i in 0..reads.len() {
                    for j in i + 1..reads.len() {
                        // Indices grow with position: once j starts past i's
                        // last value, later windows do too.
                        if reads[j][0] > *reads[i].last().expect("nonempty") {
                            break;
                        }
                        if reads[j].iter().any(|x| reads[i].binary_search(x).is_ok()) {
                            edges.push((i, j));
                        }
                    }
                }
                DependencyGraph::from_edges(reads.len(), &edges)
            }
        }
    }

    /// Field size used for letters: smallest prime `>= max(family size, 2t,
    /// alphabet)`.
    pub fn default_prime(&self, t: usize) -> u64 {
        next_prime_at_least(self.family_size().max(2 * t).max(self.alphabet) as u64)
    }

    /// Letter family, optionally over an explicit prime (which must be at
    /// least the alphabet size so every letter has positive probability).
    pub fn letter_family(&self, t: usize, prime: Option<u64>, rng_seed: u64) -> Result<TwiseFamily> {
        let prime = prime.unwrap_or_else(|| self.default_prime(t));
        if !is_prime(prime) {
            return Err(Error::NotPrime(prime));
        }
        if prime < self.alphabet as u64 {
            return Err(Error::InvalidArgument(format!(
                "prime {prime} is smaller than the alphabet size {}",
                self.alphabet
            )));
        }
        TwiseFamily::with_prime(self.family_size(), t, prime, rng_seed)
    }

    /// Letter encoded by field value `v`: `floor(v * alphabet / prime)`.
    fn letter(&self, v: u64, prime: u64) -> u8 {
        (v * self.alphabet as u64 / prime) as u8
    }

    /// The string produced by one family seed.
    pub fn sample_string(&self, family: &TwiseFamily) -> Vec<u8> {
        let values: Vec<u64> = (0..self.family_size())
            .map(|i| family.field_value(i).expect("index < family size"))
            .collect();
        (0..self.n)
            .map(|p| self.letter(values[self.family_index(p)], family.prime()))
            .collect()
    }

    /// Exact `Pr[window i matches]` when letters come from a family over
    /// `prime` with independence order `t`.
    pub fn match_probability(&self, i: usize, prime: u64, t: usize) -> Result<BigRational> {
        let indices = self.window_indices(i);
        if indices.len() > t {
            return Err(Error::InvalidArgument(format!(
                "window {i} reads {} values, more than the independence order {t}",
                indices.len()
            )));
        }
        // Values at distinct indices are independent and uniform; count, per
        // index, the field values consistent with every letter it produces.
        let mut num = BigInt::from(1u8);
        for &idx in &indices {
            let wanted: Vec<u8> = (i..i + self.d())
                .filter(|&p| self.family_index(p) == idx)
                .map(|p| self.word[p - i])
                .collect();
            let hits = (0..prime)
                .filter(|&v| wanted.iter().all(|&w| self.letter(v, prime) == w))
                .count();
            num *= BigInt::from(hits);
        }
        let den = num_traits::pow(BigInt::from(prime), indices.len());
        Ok(BigRational::new(num, den))
    }

    /// Exact expected number of window occurrences.
    pub fn expected_window_count(&self, prime: u64, t: usize) -> Result<BigRational> {
        (0..self.windows()).try_fold(BigRational::zero(), |acc, i| {
            Ok(acc + self.match_probability(i, prime, t)?)
        })
    }
}

/// Parameters the window bound is evaluated with.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowBoundParams {
    /// Number of window indicators.
    pub windows: u64,
    /// Even independence order of the indicators.
    pub indicator_t: u32,
    /// Colors used on the window graph.
    pub chi: u64,
    pub classes: ColorClassSizes,
    pub max_degree: u64,
}

/// Works out the window graph, its coloring and the indicator independence
/// order for letters that are `t`-wise independent.
pub fn window_bound_params(p: &PatternInstance, t: u32) -> Result<WindowBoundParams> {
    let per_window = p.values_per_window();
    let order = t / per_window as u32;
    let indicator_t = even_floor(order);
    if indicator_t < 2 {
        return Err(Error::InsufficientIndependence { t, per_window, order });
    }
    let graph = p.window_graph()?;
    let coloring = greedy_coloring(&graph, GreedyOrder::Natural);
    Ok(WindowBoundParams {
        windows: graph.n() as u64,
        indicator_t,
        chi: coloring.k() as u64,
        classes: coloring.class_sizes()?,
        max_degree: graph.max_degree() as u64,
    })
}

/// Tail bound on `|count - E[count]| >= a` for window occurrences.
pub fn window_count_bound(p: &PatternInstance, a: f64, t: u32) -> Result<BoundResult> {
    let params = window_bound_params(p, t)?;
    combined_tail_bound(&TailQuery::new(params.windows, params.indicator_t, a, params.chi)?)
}

/// Window-occurrence count for every trial seed, in trial order.
pub fn window_counts(
    p: &PatternInstance,
    t: usize,
    prime: Option<u64>,
    trials: u64,
    master_seed: u64,
) -> Result<Vec<u64>> {
    let family = p.letter_family(t, prime, master_seed)?;
    Ok((0..trials)
        .into_par_iter()
        .map(|i| {
            let s = p.sample_string(&family.reseeded(trial_seed(master_seed, i)));
            count_window_occurrences(&s, p.word())
        })
        .collect())
}

/// Subsequence-occurrence count for every trial seed, in trial order.
pub fn subsequence_counts(
    p: &PatternInstance,
    t: usize,
    prime: Option<u64>,
    trials: u64,
    master_seed: u64,
) -> Result<Vec<u128>> {
    let family = p.letter_family(t, prime, master_seed)?;
    Ok((0..trials)
        .into_par_iter()
        .map(|i| {
            let s = p.sample_string(&family.reseeded(trial_seed(master_seed, i)));
            count_subsequence_occurrences(&s, p.word())
        })
        .collect())
}

/// Monte Carlo tail of the window count against the window bound. Uses the
/// same trial seeds as [`window_counts`].
pub fn window_tail_experiment(
    p: &PatternInstance,
    t: u32,
    prime: Option<u64>,
    a_grid: &[f64],
    trials: u64,
    master_seed: u64,
) -> Result<ExperimentReport> {
    let params = window_bound_params(p, t)?;
    let family = p.letter_family(t as usize, prime, master_seed)?;
    let prime = family.prime();
    let probs: Vec<BigRational> = (0..p.windows())
        .map(|i| p.match_probability(i, prime, t as usize))
        .collect::<Result<_>>()?;
    let mean: BigRational = probs.iter().fold(BigRational::zero(), |acc, x| acc + x);
    // Common denominator prime^r for every window probability.
    let r = p.values_per_window();
    let scale_big = num_traits::pow(BigInt::from(prime), r);
    let mean_scaled = mean.clone() * BigRational::from_integer(scale_big.clone());
    if !mean_scaled.is_integer() {
        return Err(Error::InvalidArgument("window probabilities do not share a denominator".into()));
    }
    let (Some(scale), Some(mean_num)) = (scale_big.to_i64(), mean_scaled.to_integer().to_i64()) else {
        return Err(Error::InvalidArgument("field too large for exact window means".into()));
    };
    let uniform_p = probs
        .windows(2)
        .all(|w| w[0] == w[1])
        .then(|| probs[0].to_f64())
        .flatten();
    let setup = TailSetup {
        n: params.windows,
        t: params.indicator_t,
        chi: params.chi,
        classes: params.classes,
        corollary: uniform_p.map(|p| (params.max_degree, p)),
    };
    let report = run_tail_experiment(&setup, a_grid, trials, master_seed, scale as f64, |seed| {
        let s = p.sample_string(&family.reseeded(seed));
        count_window_occurrences(&s, p.word()) as i64 * scale - mean_num
    })?;
    let mut config = vec![
        ("mode".to_string(), "window".to_string()),
        ("letters_n".to_string(), p.n().to_string()),
        ("alphabet".to_string(), p.alphabet().to_string()),
        ("word".to_string(), render_letters(p.word())),
        ("letter_t".to_string(), t.to_string()),
        ("prime".to_string(), prime.to_string()),
        ("mean".to_string(), mean.to_f64().unwrap_or(f64::NAN).to_string()),
    ];
    config.extend(report.config.iter().cloned());
    Ok(report.with_config(config))
}
