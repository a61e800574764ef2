use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use tagree_core::bounds::{
    bernoulli_tail_bound, combined_tail_bound, headline_moment_bound, markov_tail_from_moment,
    optimize_t, refined_moment_bound, BernoulliQuery, BoundResult, ColorClassSizes, Side, TailQuery,
};
use tagree_core::graph::{
    exact_chromatic_number, greedy_clique, greedy_coloring, DependencyGraph, GreedyOrder,
};
use tagree_core::patterns::{
    count_subsequence_occurrences, count_window_occurrences, parse_letters, render_letters,
    subsequence_counts, window_counts, window_tail_experiment, LetterSource, PatternInstance,
};
use tagree_core::sampler::{closest_p_num, default_prime, parse_key_values, EnsembleDescriptor, Flips};
use tagree_core::verify::{estimate_tail, join_grid, normalize_grid};

use crate::{BoundArgs, ColorArgs, Failure, FlipsArg, OrderArg, PatternArgs, PatternMode, VerifyArgs};

fn format_bound(label: &str, b: &BoundResult) -> String {
    format!(
        "{label} value={} log_value={} clamped={} vacuous={}\n",
        b.value, b.log_value, b.clamped, b.vacuous
    )
}

fn parse_grid(text: &str) -> anyhow::Result<Vec<f64>> {
    let grid = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad grid point {s:?}")))
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(normalize_grid(&grid)?)
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

pub fn bound(args: &BoundArgs) -> Result<(), Failure> {
    let mut out = String::new();
    let bernoulli = match (args.d, args.p) {
        (Some(d), Some(p)) => Some((d, p)),
        _ => None,
    };
    if bernoulli.is_none() && args.chi.is_none() {
        return Err(anyhow!("either --chi or both --d and --p are required").into());
    }
    if args.t.is_none() && !args.optimize_t {
        return Err(anyhow!("--t is required unless --optimize-t is given").into());
    }
    let classes = args
        .classes
        .as_deref()
        .map(|text| -> anyhow::Result<ColorClassSizes> {
            let sizes = text
                .split(',')
                .map(|s| s.trim().parse::<u64>().with_context(|| format!("bad class size {s:?}")))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let classes = ColorClassSizes::new(sizes)?;
            if classes.n() != args.n {
                bail!("class sizes sum to {} but --n is {}", classes.n(), args.n);
            }
            Ok(classes)
        })
        .transpose()?;

    match bernoulli {
        Some((d, p)) => {
            let eval = |t: u32| -> tagree_core::Result<BoundResult> {
                bernoulli_tail_bound(&BernoulliQuery::new(args.n, d, t, p, args.a)?, Side::Upper)
            };
            let t = if args.optimize_t {
                if args.t_max < 2 {
                    return Err(anyhow!("t_max must be at least 2").into());
                }
                let mut best: Option<(u32, BoundResult)> = None;
                for t in (2..=args.t_max).step_by(2) {
                    let b = eval(t)?;
                    if best.map_or(true, |(_, prev)| b.log_value < prev.log_value) {
                        best = Some((t, b));
                    }
                }
                best.expect("t_max >= 2").0
            } else {
                args.t.expect("checked above")
            };
            let q = BernoulliQuery::new(args.n, d, t, p, args.a)?;
            let _ = writeln!(out, "mode=bernoulli n={} d={d} t={t} p={p} a={}", args.n, args.a);
            out += &format_bound("corollary_upper", &bernoulli_tail_bound(&q, Side::Upper)?);
            out += &format_bound("corollary_lower", &bernoulli_tail_bound(&q, Side::Lower)?);
        }
        None => {
            let chi = args.chi.expect("checked above");
            let (t, theorem) = if args.optimize_t {
                optimize_t(args.n, chi, args.a, args.t_max, None)?
            } else {
                let t = args.t.expect("checked above");
                (t, combined_tail_bound(&TailQuery::new(args.n, t, args.a, chi)?)?)
            };
            let _ = writeln!(out, "mode=theorem n={} t={t} chi={chi} a={}", args.n, args.a);
            out += &format_bound("theorem", &theorem);
            if let Some(classes) = &classes {
                let t_refined = if args.optimize_t {
                    optimize_t(args.n, chi, args.a, args.t_max, Some(classes))?.0
                } else {
                    t
                };
                let moment = refined_moment_bound(classes, t_refined)?;
                let headline = headline_moment_bound(classes.k() as u64, classes.n(), t_refined)?;
                let _ = writeln!(out, "refined_t={t_refined}");
                out += &format_bound("refined_moment", &moment);
                out += &format_bound("headline_moment", &headline);
                out += &format_bound("refined_tail", &markov_tail_from_moment(&moment, t_refined, args.a)?);
            }
        }
    }
    emit(None, &out)?;
    Ok(())
}

/// Resolved verify configuration, in echo order.
struct VerifyConfig {
    descriptor: EnsembleDescriptor,
    trials: u64,
    a_grid: Vec<f64>,
    p_requested: Option<f64>,
}

impl VerifyConfig {
    fn resolve(args: &VerifyArgs) -> anyhow::Result<Self> {
        let file = match &args.config {
            Some(path) => parse_key_values(
                &fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
            )?,
            None => Default::default(),
        };
        fn from_file<T: std::str::FromStr>(
            file: &std::collections::BTreeMap<String, String>,
            key: &str,
        ) -> anyhow::Result<Option<T>> {
            file.get(key)
                .map(|v| v.parse::<T>().map_err(|_| anyhow!("bad value for {key} in config: {v}")))
                .transpose()
        }
        let blocks = args.blocks.or(from_file(&file, "blocks")?).unwrap_or(20);
        let block_size = args.block_size.or(from_file(&file, "block_size")?).unwrap_or(5);
        let t = args.t.or(from_file(&file, "t")?).unwrap_or(4);
        let prime = args.prime.or(from_file(&file, "prime")?).unwrap_or_else(|| default_prime(blocks, t));
        let flips = match args.flips {
            Some(FlipsArg::None) => Flips::None,
            Some(FlipsArg::Alternating) => Flips::Alternating,
            None => from_file(&file, "flips")?.unwrap_or_default(),
        };
        // An explicit threshold wins; otherwise a probability is rounded onto
        // the field, defaulting to 1/2.
        let p_requested = match (args.p_num, args.p) {
            (Some(_), _) => None,
            (None, Some(p)) => Some(p),
            (None, None) => match from_file::<f64>(&file, "p_requested")? {
                Some(p) => Some(p),
                None if file.contains_key("p_num") => None,
                None => Some(0.5),
            },
        };
        let p_num = match (args.p_num, p_requested) {
            (Some(p_num), _) => p_num,
            (None, Some(p)) => closest_p_num(p, prime)?.0,
            (None, None) => from_file(&file, "p_num")?.expect("p_num present"),
        };
        let trials = args.trials.or(from_file(&file, "trials")?).unwrap_or(100_000);
        if trials == 0 {
            bail!("trials must be at least 1");
        }
        let grid_text = match &args.a_grid {
            Some(g) => g.clone(),
            None => file.get("a_grid").cloned().unwrap_or_else(|| "30,40,50,60,70,80".into()),
        };
        let master_seed = args.seed.or(from_file(&file, "master_seed")?).unwrap_or(0);
        Ok(Self {
            descriptor: EnsembleDescriptor { blocks, block_size, t, prime, p_num, flips, master_seed },
            trials,
            a_grid: parse_grid(&grid_text)?,
            p_requested,
        })
    }

    fn echo(&self) -> Vec<(String, String)> {
        let mut pairs: Vec<(String, String)> = self
            .descriptor
            .pairs()
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        if let Some(p) = self.p_requested {
            pairs.push(("p_requested".into(), p.to_string()));
            let achieved = self.descriptor.p_num as f64 / self.descriptor.prime as f64;
            pairs.push(("p_rounding".into(), (achieved - p).to_string()));
        }
        pairs.push(("trials".into(), self.trials.to_string()));
        pairs.push(("a_grid".into(), join_grid(&self.a_grid)));
        pairs
    }
}

pub fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    let config = VerifyConfig::resolve(args)?;
    let ensemble = config.descriptor.build()?;
    let report = estimate_tail(&ensemble, &config.a_grid, config.trials, config.descriptor.master_seed)?
        .with_config(config.echo());
    emit(args.out.as_deref(), &report.to_csv())?;
    let violations = report.violations().len();
    let summary = format!("rows={} violations={violations}", report.rows.len());
    if args.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    if violations > 0 {
        return Err(Failure::Violations(violations));
    }
    Ok(())
}

pub fn pattern(args: &PatternArgs) -> Result<(), Failure> {
    let word = parse_letters(&args.word, args.alphabet)?;
    if let Some(text) = &args.text {
        let s = parse_letters(text, args.alphabet)?;
        let count = match args.mode {
            PatternMode::Window => count_window_occurrences(&s, &word) as u128,
            PatternMode::Subsequence => count_subsequence_occurrences(&s, &word),
        };
        println!("count={count}");
        return Ok(());
    }
    if args.trials == 0 {
        return Err(anyhow!("trials must be at least 1").into());
    }
    let source = match args.block_size {
        Some(block_size) => LetterSource::CliqueBlocks { block_size },
        None => LetterSource::Independent,
    };
    let instance = PatternInstance::new(args.alphabet, word, args.n, source)?;
    let t = args.t as usize;
    let prime = args.prime.unwrap_or_else(|| instance.default_prime(t));

    let mode = match args.mode {
        PatternMode::Window => "window",
        PatternMode::Subsequence => "subsequence",
    };
    let mut echo = vec![
        ("mode", mode.to_string()),
        ("n", args.n.to_string()),
        ("alphabet", args.alphabet.to_string()),
        ("word", render_letters(instance.word())),
        ("t", args.t.to_string()),
        ("prime", prime.to_string()),
        ("block_size", args.block_size.map_or("none".into(), |b| b.to_string())),
        ("trials", args.trials.to_string()),
        ("seed", args.seed.to_string()),
    ];

    // The window bound needs enough independence; fail before sampling.
    let report = if args.mode == PatternMode::Window {
        let grid = parse_grid(&args.a_grid)?;
        echo.push(("a_grid", join_grid(&grid)));
        Some(window_tail_experiment(&instance, args.t, Some(prime), &grid, args.trials, args.seed)?)
    } else {
        None
    };

    let mut counts_csv = String::new();
    for (k, v) in &echo {
        let _ = writeln!(counts_csv, "# {k}={v}");
    }
    counts_csv.push_str("trial,count\n");
    let counts: Vec<u128> = match args.mode {
        PatternMode::Window => window_counts(&instance, t, Some(prime), args.trials, args.seed)?
            .into_iter()
            .map(u128::from)
            .collect(),
        PatternMode::Subsequence => subsequence_counts(&instance, t, Some(prime), args.trials, args.seed)?,
    };
    for (i, c) in counts.iter().enumerate() {
        let _ = writeln!(counts_csv, "{i},{c}");
    }
    emit(args.out.as_deref(), &counts_csv)?;

    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / counts.len() as f64;
    let mut summary = format!("trials={} mean_count={mean}", args.trials);
    let mut violations = 0;
    if let Some(report) = report {
        let report = report.with_config(echo.iter().map(|(k, v)| (k.to_string(), v.clone())).collect());
        violations = report.violations().len();
        let _ = write!(summary, " rows={} violations={violations}", report.rows.len());
        if let Some(path) = &args.report {
            emit(Some(path), &report.to_csv())?;
        }
    }
    if args.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    if violations > 0 {
        return Err(Failure::Violations(violations));
    }
    Ok(())
}

pub fn color(args: &ColorArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.graph).with_context(|| format!("reading {}", args.graph.display()))?;
    let g = DependencyGraph::parse(&text)?;
    let order = match args.order {
        OrderArg::Natural => GreedyOrder::Natural,
        OrderArg::Degree => GreedyOrder::DegreeDescending,
    };
    let coloring = greedy_coloring(&g, order);
    let mut out = String::new();
    let _ = writeln!(out, "n={} m={} max_degree={}", g.n(), g.edge_count(), g.max_degree());
    let sizes: Vec<String> = coloring.classes().iter().map(|c| c.len().to_string()).collect();
    let _ = writeln!(
        out,
        "greedy_order={} greedy_colors={} class_sizes={}",
        match args.order {
            OrderArg::Natural => "natural",
            OrderArg::Degree => "degree",
        },
        coloring.k(),
        sizes.join(",")
    );
    let _ = writeln!(out, "clique_lower_bound={}", greedy_clique(&g).len());
    match exact_chromatic_number(&g, args.vertex_limit) {
        Ok(chi) => {
            let _ = writeln!(out, "exact_chromatic_number={chi}");
        }
        Err(e) => {
            let _ = writeln!(out, "exact_chromatic_number=skipped ({e})");
        }
    }
    let assignment: Vec<String> = coloring.assignment().iter().map(usize::to_string).collect();
    let _ = writeln!(out, "assignment={}", assignment.join(","));
    emit(args.out.as_deref(), &out)?;
    Ok(())
}
