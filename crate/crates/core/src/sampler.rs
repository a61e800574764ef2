//! Exactly t-wise independent families and dependent ensembles.
//!
//! A [`TwiseFamily`] is a uniformly random polynomial of degree `t - 1` over
//! `GF(prime)`, evaluated at the points `0, 1, ..., m - 1`. Any `t` distinct
//! evaluations are uniform and mutually independent because a degree-`(t-1)`
//! polynomial is determined by its values at `t` points. The seed space is the
//! set of coefficient vectors, `prime^t` elements, which is small enough to
//! enumerate for toy parameters; that enumeration is the exact oracle used
//! throughout [`crate::verify`].
//!
//! A [`DependentEnsemble`] maps graph vertices onto family indices. Vertices
//! of one clique share an index, so they are fully correlated, while an
//! independent set touches every clique at most once and therefore reads
//! distinct, t-wise independent evaluations.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{make_clique_blocks, DependencyGraph};
use crate::{Error, Result};

/// Default cap on `prime^t` for exhaustive seed enumeration.
pub const EXHAUSTIVE_BUDGET: u128 = 10_000_000;

pub fn is_prime(x: u64) -> bool {
    if x < 2 {
        return false;
    }
    if x % 2 == 0 {
        return x == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= x {
        if x % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub fn next_prime_at_least(x: u64) -> u64 {
    (x.max(2)..).find(|&p| is_prime(p)).expect("primes are unbounded")
}

/// Smallest prime `>= max(m, 2t)`.
pub fn default_prime(m: usize, t: usize) -> u64 {
    next_prime_at_least(m.max(2 * t) as u64)
}

/// Per-trial seed derived from a master seed. A pure function of its inputs,
/// so parallel runs do not depend on scheduling.
pub fn trial_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(index.wrapping_add(0x632b_e59b_d9b4_e019)))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Closest threshold `p_num` to `p * prime` and the rounding error
/// `p_num / prime - p`.
pub fn closest_p_num(p: f64, prime: u64) -> Result<(u64, f64)> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p must lie in [0,1], got {p}")));
    }
    let p_num = (p * prime as f64).round() as u64;
    Ok((p_num, p_num as f64 / prime as f64 - p))
}

/// Random polynomial of degree `t - 1` over `GF(prime)`; index `i` reads the
/// evaluation at the field point `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwiseFamily {
    prime: u64,
    m: usize,
    coeffs: Vec<u64>,
}

impl TwiseFamily {
    /// Family of `m` variables, `t`-wise independent, over [`default_prime`].
    pub fn new(m: usize, t: usize, rng_seed: u64) -> Result<Self> {
        Self::with_prime(m, t, default_prime(m, t), rng_seed)
    }

    /// Family over an explicit prime. Needs `prime >= m` (distinct points)
    /// and `prime >= t`.
    pub fn with_prime(m: usize, t: usize, prime: u64, rng_seed: u64) -> Result<Self> {
        Self::check_shape(m, t, prime)?;
        Ok(Self {
            prime,
            m,
            coeffs: random_coefficients(t, prime, rng_seed),
        })
    }

    /// Family with fixed coefficients `c_0, ..., c_{t-1}`.
    pub fn from_coefficients(m: usize, prime: u64, coeffs: Vec<u64>) -> Result<Self> {
        Self::check_shape(m, coeffs.len(), prime)?;
        if let Some(&c) = coeffs.iter().find(|&&c| c >= prime) {
            return Err(Error::InvalidArgument(format!(
                "coefficient {c} is not reduced modulo {prime}"
            )));
        }
        Ok(Self { prime, m, coeffs })
    }

    fn check_shape(m: usize, t: usize, prime: u64) -> Result<()> {
        if m == 0 || t == 0 {
            return Err(Error::InvalidArgument("m and t must be at least 1".into()));
        }
        if !is_prime(prime) {
            return Err(Error::NotPrime(prime));
        }
        if prime < m as u64 || prime < t as u64 {
            return Err(Error::InvalidArgument(format!(
                "prime {prime} must be at least m = {m} and t = {t}"
            )));
        }
        Ok(())
    }

    /// Same shape, fresh coefficients.
    pub fn reseeded(&self, rng_seed: u64) -> Self {
        Self {
            prime: self.prime,
            m: self.m,
            coeffs: random_coefficients(self.t(), self.prime, rng_seed),
        }
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn t(&self) -> usize {
        self.coeffs.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.coeffs
    }

    /// `prime^t`, saturating.
    pub fn seed_space_size(&self) -> u128 {
        (0..self.t()).fold(1u128, |acc, _| acc.saturating_mul(self.prime as u128))
    }

    /// Field value `poly(i)` in `0..prime`.
    pub fn field_value(&self, i: usize) -> Result<u64> {
        if i >= self.m {
            return Err(Error::IndexOutOfRange { index: i, m: self.m });
        }
        Ok(self.eval(i as u64))
    }

    fn eval(&self, x: u64) -> u64 {
        let p = self.prime as u128;
        let x = x as u128;
        self.coeffs
            .iter()
            .rev()
            .fold(0u128, |acc, &c| (acc * x + c as u128) % p) as u64
    }

    /// `poly(i) / prime`, uniform on the grid `{0, 1/prime, ..., (prime-1)/prime}`.
    pub fn sample_uniform(&self, i: usize) -> Result<f64> {
        Ok(self.field_value(i)? as f64 / self.prime as f64)
    }

    /// `1` iff `poly(i) < p_num`, so `Pr[1] = p_num / prime` exactly.
    pub fn sample_bernoulli(&self, i: usize, p_num: u64) -> Result<u8> {
        if p_num > self.prime {
            return Err(Error::ThresholdOutOfRange { p_num, prime: self.prime });
        }
        Ok(u8::from(self.field_value(i)? < p_num))
    }

    /// Calls `f` once for every coefficient vector, in lexicographic order.
    pub fn for_each_seed<F: FnMut(&TwiseFamily)>(&self, budget: u128, mut f: F) -> Result<()> {
        let size = self.seed_space_size();
        if size > budget {
            return Err(Error::BudgetExceeded { size, budget });
        }
        let mut current = Self {
            prime: self.prime,
            m: self.m,
            coeffs: vec![0; self.t()],
        };
        loop {
            f(&current);
            let mut pos = 0;
            loop {
                if pos == current.coeffs.len() {
                    return Ok(());
                }
                current.coeffs[pos] += 1;
                if current.coeffs[pos] < self.prime {
                    break;
                }
                current.coeffs[pos] = 0;
                pos += 1;
            }
        }
    }
}

fn random_coefficients(t: usize, prime: u64, rng_seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    (0..t).map(|_| rng.random_range(0..prime)).collect()
}

/// Same as [`TwiseFamily::new`].
pub fn new_family(m: usize, t: usize, rng_seed: u64) -> Result<TwiseFamily> {
    TwiseFamily::new(m, t, rng_seed)
}

/// Per-vertex post-processing of a Bernoulli value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Identity,
    /// `1 - value`.
    Flip,
}

/// Flip pattern inside each clique block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Flips {
    #[default]
    None,
    /// Flip odd positions within each block.
    Alternating,
}

impl fmt::Display for Flips {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flips::None => "none",
            Flips::Alternating => "alternating",
        })
    }
}

impl FromStr for Flips {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Flips::None),
            "alternating" => Ok(Flips::Alternating),
            other => Err(Error::InvalidArgument(format!(
                "flips must be none or alternating, got {other}"
            ))),
        }
    }
}

/// Where a vertex reads its value from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VertexSource {
    pub index: usize,
    pub transform: Transform,
}

/// Bernoulli variables on the vertices of a graph, each a function of one
/// evaluation of a shared t-wise independent family.
#[derive(Debug, Clone)]
pub struct DependentEnsemble {
    graph: DependencyGraph,
    family: TwiseFamily,
    sources: Vec<VertexSource>,
    p_num: u64,
}

impl DependentEnsemble {
    /// General constructor. Nothing here checks that the result t-agrees
    /// with `graph`; use [`DependentEnsemble::verify_t_agreement`].
    pub fn new(
        graph: DependencyGraph,
        family: TwiseFamily,
        sources: Vec<VertexSource>,
        p_num: u64,
    ) -> Result<Self> {
        if sources.len() != graph.n() {
            return Err(Error::InvalidArgument(format!(
                "{} vertex sources for a graph on {} vertices",
                sources.len(),
                graph.n()
            )));
        }
        if let Some(s) = sources.iter().find(|s| s.index >= family.m()) {
            return Err(Error::IndexOutOfRange { index: s.index, m: family.m() });
        }
        if p_num > family.prime() {
            return Err(Error::ThresholdOutOfRange { p_num, prime: family.prime() });
        }
        Ok(Self { graph, family, sources, p_num })
    }

    pub fn graph(&self) -> &DependencyGraph {
        &self.graph
    }

    pub fn family(&self) -> &TwiseFamily {
        &self.family
    }

    pub fn sources(&self) -> &[VertexSource] {
        &self.sources
    }

    pub fn p_num(&self) -> u64 {
        self.p_num
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn has_flips(&self) -> bool {
        self.sources.iter().any(|s| s.transform == Transform::Flip)
    }

    /// Value of vertex `v` when the family has the coefficients of `seed`.
    pub fn vertex_value(&self, seed: &TwiseFamily, v: usize) -> u8 {
        let src = self.sources[v];
        let bit = u8::from(seed.eval(src.index as u64) < self.p_num);
        match src.transform {
            Transform::Identity => bit,
            Transform::Flip => 1 - bit,
        }
    }

    /// `X = sum of vertex values` under the coefficients of `seed`.
    pub fn sum_with(&self, seed: &TwiseFamily) -> u64 {
        (0..self.n()).map(|v| self.vertex_value(seed, v) as u64).sum()
    }

    /// `X` under a fresh family seed.
    pub fn draw_sum(&self, rng_seed: u64) -> u64 {
        self.sum_with(&self.family.reseeded(rng_seed))
    }

    /// `prime * E[X]`, an integer.
    pub fn mean_numerator(&self) -> u64 {
        let prime = self.family.prime();
        self.sources
            .iter()
            .map(|s| match s.transform {
                Transform::Identity => self.p_num,
                Transform::Flip => prime - self.p_num,
            })
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.mean_numerator() as f64 / self.family.prime() as f64
    }

    /// Checks by exhaustive seed enumeration that every independent set of
    /// at most `min(t, max_check_size)` vertices has a joint distribution
    /// equal to the product of its marginals.
    ///
    /// Returns [`Error::BudgetExceeded`] when `prime^t > budget`; that is
    /// "not checkable", not a failed check.
    pub fn verify_t_agreement(&self, max_check_size: usize, budget: u128) -> Result<bool> {
        let size = self.family.seed_space_size();
        if size > budget {
            return Err(Error::BudgetExceeded { size, budget });
        }
        let limit = max_check_size.min(self.family.t());
        let sets = independent_sets_up_to(&self.graph, limit);
        let mut joint: Vec<Vec<u64>> = sets.iter().map(|s| vec![0; 1 << s.len()]).collect();
        let mut ones = vec![0u64; self.n()];
        let mut bits = vec![0u8; self.n()];
        let mut seeds = 0u64;
        self.family.for_each_seed(budget, |seed| {
            seeds += 1;
            for (v, b) in bits.iter_mut().enumerate() {
                *b = self.vertex_value(seed, v);
                ones[v] += *b as u64;
            }
            for (set, counts) in sets.iter().zip(joint.iter_mut()) {
                let pattern = set
                    .iter()
                    .enumerate()
                    .fold(0usize, |acc, (j, &v)| acc | ((bits[v] as usize) << j));
                counts[pattern] += 1;
            }
        })?;
        let total = BigUint::from(seeds);
        for (set, counts) in sets.iter().zip(&joint) {
            let scale = num_traits::pow(total.clone(), set.len() - 1);
            for (pattern, &count) in counts.iter().enumerate() {
                let product = set.iter().enumerate().fold(BigUint::from(1u8), |acc, (j, &v)| {
                    let marginal = if pattern >> j & 1 == 1 { ones[v] } else { seeds - ones[v] };
                    acc * marginal
                });
                if BigUint::from(count) * &scale != product {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// All independent sets with `2..=max_size` vertices, each sorted, in
/// lexicographic order. Singletons factorize trivially and are skipped.
pub fn independent_sets_up_to(g: &DependencyGraph, max_size: usize) -> Vec<Vec<usize>> {
    fn extend(
        g: &DependencyGraph,
        max_size: usize,
        current: &mut Vec<usize>,
        next: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() >= 2 {
            out.push(current.clone());
        }
        if current.len() == max_size {
            return;
        }
        for v in next..g.n() {
            if current.iter().all(|&u| !g.has_edge(u, v)) {
                current.push(v);
                extend(g, max_size, current, v + 1, out);
                current.pop();
            }
        }
    }
    let mut out = Vec::new();
    extend(g, max_size, &mut Vec::new(), 0, &mut out);
    out
}

/// Parameters that fully determine a clique-block ensemble.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnsembleDescriptor {
    pub blocks: usize,
    pub block_size: usize,
    pub t: usize,
    pub prime: u64,
    pub p_num: u64,
    pub flips: Flips,
    pub master_seed: u64,
}

impl EnsembleDescriptor {
    pub fn build(&self) -> Result<DependentEnsemble> {
        let graph = make_clique_blocks(self.blocks, self.block_size)?;
        let family = TwiseFamily::with_prime(self.blocks, self.t, self.prime, self.master_seed)?;
        let sources = (0..self.blocks * self.block_size)
            .map(|v| {
                let pos = v % self.block_size;
                let transform = match self.flips {
                    Flips::Alternating if pos % 2 == 1 => Transform::Flip,
                    _ => Transform::Identity,
                };
                VertexSource { index: v / self.block_size, transform }
            })
            .collect();
        DependentEnsemble::new(graph, family, sources, self.p_num)
    }

    /// `key=value` pairs in a fixed order.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("blocks", self.blocks.to_string()),
            ("block_size", self.block_size.to_string()),
            ("t", self.t.to_string()),
            ("prime", self.prime.to_string()),
            ("p_num", self.p_num.to_string()),
            ("flips", self.flips.to_string()),
            ("master_seed", self.master_seed.to_string()),
        ]
    }

    pub fn to_text(&self) -> String {
        self.pairs().iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// Parses `key=value` lines. Lines may carry a leading `#`; unknown keys
    /// are ignored so a CSV config echo can be fed back in.
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_map(&parse_key_values(text)?)
    }

    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        fn get<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<T> {
            let raw = map
                .get(key)
                .ok_or_else(|| Error::InvalidArgument(format!("missing key {key}")))?;
            raw.parse()
                .map_err(|_| Error::InvalidArgument(format!("bad value for {key}: {raw}")))
        }
        Ok(Self {
            blocks: get(map, "blocks")?,
            block_size: get(map, "block_size")?,
            t: get(map, "t")?,
            prime: get(map, "prime")?,
            p_num: get(map, "p_num")?,
            flips: map.get("flips").map_or(Ok(Flips::None), |s| s.parse())?,
            master_seed: get(map, "master_seed")?,
        })
    }
}

/// Reads `key=value` lines, tolerating a leading `#`, surrounding spaces and
/// blank lines. Lines without `=` are skipped (CSV data rows, headers).
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for line in text.lines() {
        let line = line.trim().trim_start_matches('#').trim();
        let Some((k, v)) = line.split_once('=') else {
            continue;
        };
        let key = k.trim().to_string();
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(Error::InvalidArgument(format!("duplicate key {key}")));
        }
    }
    Ok(map)
}

/// Clique-block ensemble: `num_blocks` disjoint cliques of `block_size`
/// vertices, block `b` reading family index `b`, over [`default_prime`].
pub fn make_clique_ensemble(
    num_blocks: usize,
    block_size: usize,
    t: usize,
    p_num: u64,
    rng_seed: u64,
    flips: Flips,
) -> Result<DependentEnsemble> {
    EnsembleDescriptor {
        blocks: num_blocks,
        block_size,
        t,
        prime: default_prime(num_blocks, t),
        p_num,
        flips,
        master_seed: rng_seed,
    }
    .build()
}
