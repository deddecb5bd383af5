use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use cayley_affine::attack::second_preimage_traced;
use cayley_affine::attack::subset_sum::SolverConfig;
use cayley_affine::field::{
    is_probable_prime, is_safe_prime, parse_integer, random_prime, random_safe_prime,
    PRIMALITY_ROUNDS,
};
use cayley_affine::forge::{end_to_end_break_with, verify_record, BreakOptions};
use cayley_affine::hashes::{hash_hat_h_par, pad_message, product_map_counted, product_map_par};
use cayley_affine::oracles::{self, CollisionTarget, WordFilter};
use cayley_affine::params::{parse_kv_text, DEFAULT_G_WORD};
use cayley_affine::{
    hash_h, hash_h2, hash_hat_h, hash_hat_h2, presets, product_map, AffineMap, BitString, Error,
    HashOutput, HashParams, PrimeModulus, SearchBudget, SolveStrategy, Transcript,
};

#[derive(Parser)]
#[command(
    name = "cayley-affine-lab",
    version,
    about = "Affine Cayley hashes and their attacks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hash a message.
    Hash {
        message: String,
        #[arg(long = "fn", value_enum, default_value = "h")]
        function: HashFn,
        /// Pad inputs of at most 323 bits to 512 bits first.
        #[arg(long)]
        pad: bool,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Find a second preimage for H from a digest and a length.
    SecondPreimage {
        #[arg(long, conflicts_with = "message", requires = "length")]
        digest: Option<String>,
        #[arg(long)]
        length: Option<usize>,
        /// Hash this message, forget it, and attack the digest.
        #[arg(long)]
        message: Option<String>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Forge a verified hatH / hatH2 collision.
    Forge {
        #[arg(long, default_value_t = 4096)]
        length: usize,
        /// Fresh messages to try before giving up.
        #[arg(long, default_value_t = 8)]
        attempts: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Re-verify a collision pair or a forge record.
    Verify {
        /// Forge record written by `forge --out`.
        #[arg(long, conflicts_with_all = ["first", "second"])]
        record: Option<PathBuf>,
        #[arg(requires = "second")]
        first: Option<String>,
        second: Option<String>,
        #[arg(long = "fn", value_enum, default_value = "h")]
        function: HashFn,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Hash throughput and field-operation counts.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = [1_000usize, 100_000, 1_000_000])]
        sizes: Vec<usize>,
        /// Segment length for the parallel path.
        #[arg(long, default_value_t = 1 << 14)]
        segment: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Compare the fast code against brute force at small primes.
    Selftest {
        #[arg(long, default_value_t = 10)]
        max_length: usize,
    },
    /// Primality checks and prime generation.
    Prime {
        #[command(subcommand)]
        action: PrimeAction,
    },
}

#[derive(Subcommand)]
enum PrimeAction {
    Check {
        value: String,
    },
    Gen {
        #[arg(long)]
        bits: u64,
        #[arg(long)]
        safe: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum HashFn {
    #[value(name = "h", alias = "H")]
    H,
    #[value(name = "h2", alias = "H2")]
    H2,
    #[value(name = "hath", alias = "hatH")]
    HatH,
    #[value(name = "hath2", alias = "hatH2")]
    HatH2,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Flat key=value file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Prime modulus, as a number or preset name.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    t: Option<usize>,
    /// g as "r,s".
    #[arg(long, conflicts_with_all = ["g_word", "g_inv_word"])]
    g: Option<String>,
    /// g as the product of a bit string.
    #[arg(long, conflicts_with = "g_inv_word")]
    g_word: Option<String>,
    /// g as the inverse of the product of a bit string.
    #[arg(long)]
    g_inv_word: Option<String>,
    /// c_rnd as hex or len:hex.
    #[arg(long)]
    c_rnd: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_strategy)]
    strategy: Option<SolveStrategy>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    budget_length: Option<usize>,
    #[arg(long)]
    budget_candidates: Option<u64>,
    #[arg(long)]
    budget_seconds: Option<u64>,
    /// Also write the main output here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include per-stage timings in transcripts.
    #[arg(long)]
    timings: bool,
}

fn parse_strategy(s: &str) -> Result<SolveStrategy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

struct RunConfig {
    params: HashParams,
    seed: u64,
    strategy: SolveStrategy,
    restarts: Option<usize>,
    budget: SearchBudget,
    output_path: Option<PathBuf>,
    timings: bool,
}

impl RunArgs {
    fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut kv: BTreeMap<String, String> = match &self.config {
            Some(path) => parse_kv_text(
                &fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
            )?,
            None => BTreeMap::new(),
        };
        if let Some(p) = &self.p {
            kv.insert("p".into(), p.clone());
        }
        kv.entry("p".into()).or_insert_with(|| "safe512".into());
        if let Some(t) = self.t {
            kv.insert("t".into(), t.to_string());
        }
        if let Some(g) = &self.g {
            let (r, s) = g
                .split_once(',')
                .ok_or_else(|| anyhow!("--g expects \"r,s\""))?;
            kv.remove("g_word");
            kv.remove("g_inv_word");
            kv.insert("g_r".into(), r.trim().into());
            kv.insert("g_s".into(), s.trim().into());
        }
        for (key, word) in [("g_word", &self.g_word), ("g_inv_word", &self.g_inv_word)] {
            if let Some(w) = word {
                for k in ["g_r", "g_s", "g_word", "g_inv_word"] {
                    kv.remove(k);
                }
                kv.insert(key.into(), w.clone());
            }
        }
        if let Some(c) = &self.c_rnd {
            kv.insert("c_rnd".into(), c.clone());
        }
        let seed = match (self.seed, kv.get("seed")) {
            (Some(s), _) => s,
            (None, Some(s)) => s.parse().with_context(|| format!("bad seed {s:?}"))?,
            (None, None) => 0,
        };
        let strategy = match (self.strategy, kv.get("strategy")) {
            (Some(s), _) => s,
            (None, Some(s)) => s.parse()?,
            (None, None) => SolveStrategy::Auto,
        };
        let defaults = SearchBudget::default();
        let budget = SearchBudget::new(
            self.budget_length.unwrap_or(defaults.max_length),
            self.budget_candidates.unwrap_or(defaults.max_candidates),
            self.budget_seconds
                .map(Duration::from_secs)
                .unwrap_or(defaults.time_limit),
        )?;
        Ok(RunConfig {
            params: HashParams::from_kv(&kv)?,
            seed,
            strategy,
            restarts: self.restarts,
            budget,
            output_path: self.out.clone(),
            timings: self.timings,
        })
    }
}

impl RunConfig {
    fn solver(&self) -> SolverConfig {
        let mut config = SolverConfig {
            strategy: self.strategy,
            seed: self.seed,
            ..SolverConfig::default()
        };
        if let Some(r) = self.restarts {
            config.restarts = r;
        }
        config
    }

    fn emit(&self, text: &str) -> anyhow::Result<()> {
        print!("{text}");
        if let Some(path) = &self.output_path {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

/// `0101`, `len:hex`, or `@path` to read either form from a file.
fn read_message(arg: &str) -> anyhow::Result<BitString> {
    let text = match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(Path::new(path))
            .with_context(|| format!("reading message file {path}"))?,
        None => arg.to_string(),
    };
    Ok(BitString::parse(text.trim())?)
}

enum Digest {
    Output(HashOutput),
    Map(AffineMap),
}

impl Digest {
    fn render(&self) -> String {
        match self {
            Digest::Output(o) => format!("digest={o}\nhex={}\n", o.to_hex_string()),
            Digest::Map(m) => format!("digest={m}\nhex={:#x},{:#x}\n", m.r_value(), m.s_value()),
        }
    }
}

impl PartialEq for Digest {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Digest::Output(a), Digest::Output(b)) => a == b,
            (Digest::Map(a), Digest::Map(b)) => a == b,
            _ => false,
        }
    }
}

fn evaluate(function: HashFn, m: &BitString, params: &HashParams) -> Digest {
    match function {
        HashFn::H => Digest::Output(hash_h(m, params.modulus())),
        HashFn::H2 => Digest::Output(hash_h2(m, params)),
        HashFn::HatH => Digest::Map(hash_hat_h(m, params)),
        HashFn::HatH2 => Digest::Map(hash_hat_h2(m, params)),
    }
}

/// Failure carrying a specific process exit code.
#[derive(Debug)]
struct Exit(u8, String);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Exit {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(Exit(code, _)) = err.downcast_ref::<Exit>() {
        return *code;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Unsolvable | Error::SolverGaveUp { .. } | Error::StrategyUnsuitable(_)) => 1,
        Some(Error::NoInsertablePreimage { .. }) => 3,
        Some(Error::Verification(_)) => 4,
        _ => 2,
    }
}

fn cmd_hash(message: &str, function: HashFn, pad: bool, run: &RunArgs) -> anyhow::Result<()> {
    let config = run.resolve()?;
    let mut m = read_message(message)?;
    if pad {
        m = pad_message(&m);
    }
    config.emit(&evaluate(function, &m, &config.params).render())
}

fn cmd_second_preimage(
    digest: Option<&str>,
    length: Option<usize>,
    message: Option<&str>,
    run: &RunArgs,
) -> anyhow::Result<()> {
    let config = run.resolve()?;
    let p = config.params.modulus();
    let (target, length) = match (digest, message) {
        (Some(d), None) => (
            HashOutput::parse(p, d)?,
            length.ok_or_else(|| anyhow!("--digest needs --length"))?,
        ),
        (None, Some(m)) => {
            let m = read_message(m)?;
            let len = length.unwrap_or(m.len());
            (hash_h(&m, p), len)
        }
        _ => bail!("give either --digest with --length, or --message"),
    };
    match second_preimage_traced(&target, length, &config.solver()) {
        Ok(report) => {
            let mut out = report.transcript.render(config.timings);
            out.push_str(&format!("preimage={}\n", report.preimage.to_len_hex()));
            if report.preimage.len() <= 256 {
                out.push_str(&format!("preimage_bits={}\n", report.preimage));
            }
            out.push_str("verdict=broken\n");
            config.emit(&out)
        }
        Err(e) => {
            let code = match e {
                Error::Unsolvable | Error::SolverGaveUp { .. } | Error::StrategyUnsuitable(_) => 1,
                _ => 2,
            };
            let label = if code == 1 {
                "gave up"
            } else {
                "invalid target"
            };
            Err(Exit(code, format!("{label}: {e}")).into())
        }
    }
}

fn cmd_forge(length: usize, attempts: usize, run: &RunArgs) -> anyhow::Result<()> {
    let config = run.resolve()?;
    let solver = config.solver();
    let options = BreakOptions {
        seed: config.seed,
        strategy: solver.strategy,
        restarts: solver.restarts,
        attempts,
        budget: config.budget,
    };
    let result = end_to_end_break_with(&config.params, length, &options)?;
    let record = result.to_record(config.timings);
    config.emit(&record)?;
    if !result.checks().all_pass() {
        return Err(Exit(4, "forged pair failed re-verification".into()).into());
    }
    Ok(())
}

fn cmd_verify(
    record: Option<&Path>,
    first: Option<&str>,
    second: Option<&str>,
    function: HashFn,
    run: &RunArgs,
) -> anyhow::Result<()> {
    if let Some(path) = record {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let checks = verify_record(&text)?;
        let mut out = format!("{checks:?}\n");
        let ok = checks.all_pass();
        out.push_str(if ok {
            "verdict=ok\n"
        } else {
            "verdict=FAILED\n"
        });
        print!("{out}");
        if !ok {
            return Err(Exit(1, "record does not verify".into()).into());
        }
        return Ok(());
    }
    let (Some(a), Some(b)) = (first, second) else {
        bail!("give two messages or --record");
    };
    let config = run.resolve()?;
    let (a, b) = (read_message(a)?, read_message(b)?);
    let da = evaluate(function, &a, &config.params);
    let db = evaluate(function, &b, &config.params);
    let ok = a != b && da == db;
    let mut out = da.render();
    out.push_str(&format!("distinct={}\n", a != b));
    out.push_str(&format!("equal_digest={}\n", da == db));
    out.push_str(if ok {
        "verdict=collision\n"
    } else {
        "verdict=no-collision\n"
    });
    config.emit(&out)?;
    if !ok {
        return Err(Exit(1, "not a collision".into()).into());
    }
    Ok(())
}

fn cmd_bench(sizes: &[usize], segment: usize, run: &RunArgs) -> anyhow::Result<()> {
    let config = run.resolve()?;
    let p = config.params.modulus();
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let mut transcript = Transcript::new("bench");
    transcript.set("p", p);
    transcript.set("seed", config.seed);
    transcript.set("segment", segment);
    let mut within_bound = true;
    for &n in sizes {
        let m: BitString = (0..n).map(|_| rand::Rng::gen::<bool>(&mut rng)).collect();
        let start = Instant::now();
        let seq = product_map(&m, p);
        let seq_time = start.elapsed();
        let start = Instant::now();
        let par = product_map_par(&m, p, segment.max(1));
        let par_time = start.elapsed();
        let hat_agree =
            hash_hat_h_par(&m, &config.params, segment.max(1)) == hash_hat_h(&m, &config.params);
        let (_, ops) = product_map_counted(&m, p);
        let bound = ops.multiplications <= 2 * n as u64 && ops.additions <= 2 * n as u64;
        within_bound &= bound && seq == par && hat_agree;
        let rate = |d: Duration| {
            if d.is_zero() {
                "inf".to_string()
            } else {
                format!("{:.0}", n as f64 / d.as_secs_f64())
            }
        };
        transcript.push(
            "size",
            vec![
                ("n", n.to_string()),
                ("multiplications", ops.multiplications.to_string()),
                ("additions", ops.additions.to_string()),
                ("bound_2n", if bound { "ok" } else { "FAILED" }.to_string()),
                ("parallel_agrees", (seq == par).to_string()),
                ("hat_parallel_agrees", hat_agree.to_string()),
                ("seq_bits_per_s", rate(seq_time)),
                ("par_bits_per_s", rate(par_time)),
            ],
            seq_time + par_time,
        );
    }
    // Throughput is inherently run-dependent, so it is always shown here.
    config.emit(&transcript.render(config.timings))?;
    if !within_bound {
        return Err(Exit(4, "operation bound or parallel agreement failed".into()).into());
    }
    Ok(())
}

fn cmd_selftest(max_length: usize) -> anyhow::Result<()> {
    let budget = SearchBudget::default().with_max_length(max_length);
    let mut failures = 0;
    let mut report = |name: &str, ok: bool, detail: String| {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };
    for p in [5u64, 101, 1009] {
        let m = PrimeModulus::from_u64(p)?;
        let mut agree = true;
        let mut count = 0;
        for len in 0..=max_length.min(14) {
            for index in 0..(1u64 << len) {
                let w: BitString = (0..len).rev().map(|i| (index >> i) & 1 == 1).collect();
                agree &= hash_h(&w, &m) == oracles::naive_hash(&w, &m);
                count += 1;
            }
        }
        report(&format!("hash_h p={p}"), agree, format!("{count} words"));

        let params = match HashParams::for_modulus(m.clone()).and_then(|q| q.with_t(3)) {
            Ok(q) => q,
            Err(_) => continue,
        };
        let mut hat_agree = true;
        for len in 0..=max_length.min(10) {
            for index in 0..(1u64 << len) {
                let w: BitString = (0..len).rev().map(|i| (index >> i) & 1 == 1).collect();
                hat_agree &= hash_hat_h(&w, &params) == oracles::naive_hat_hash(&w, &params);
            }
        }
        report(
            &format!("hash_hat_h p={p}"),
            hat_agree,
            format!("t=3 g_word={DEFAULT_G_WORD}"),
        );

        match oracles::exhaustive_collisions(
            &m,
            CollisionTarget::H,
            WordFilter::default(),
            &budget,
            50,
        ) {
            Ok(pairs) => {
                let ok = pairs.iter().all(|(a, b)| {
                    a != b
                        && hash_h(a, &m) == hash_h(b, &m)
                        && hash_h2(a, &params) == hash_h2(b, &params)
                });
                report(
                    &format!("collisions p={p}"),
                    ok,
                    format!("{} oracle pairs also collide under H2", pairs.len()),
                );
            }
            Err(e) => report(&format!("collisions p={p}"), true, e.to_string()),
        }
    }
    if failures > 0 {
        return Err(Exit(1, format!("{failures} self-test checks failed")).into());
    }
    Ok(())
}

fn cmd_prime(action: &PrimeAction) -> anyhow::Result<()> {
    match action {
        PrimeAction::Check { value } => {
            let n = match presets::modulus(value) {
                Ok(m) => m.value().clone(),
                Err(_) => parse_integer(value)?,
            };
            let prime = is_probable_prime(&n, PRIMALITY_ROUNDS);
            println!("value={n}");
            println!("bits={}", n.bits());
            println!("prime={prime}");
            println!("safe={}", prime && is_safe_prime(&n));
            if !prime {
                return Err(Exit(1, "composite".into()).into());
            }
        }
        PrimeAction::Gen { bits, safe, seed } => {
            if *bits < 4 {
                bail!("--bits must be at least 4");
            }
            let mut rng = ChaCha20Rng::seed_from_u64(*seed);
            let p = if *safe {
                random_safe_prime(*bits, &mut rng)
            } else {
                random_prime(*bits, &mut rng)
            };
            println!("{p}");
        }
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Hash {
            message,
            function,
            pad,
            run,
        } => cmd_hash(message, *function, *pad, run),
        Command::SecondPreimage {
            digest,
            length,
            message,
            run,
        } => cmd_second_preimage(digest.as_deref(), *length, message.as_deref(), run),
        Command::Forge {
            length,
            attempts,
            run,
        } => cmd_forge(*length, *attempts, run),
        Command::Verify {
            record,
            first,
            second,
            function,
            run,
        } => cmd_verify(
            record.as_deref(),
            first.as_deref(),
            second.as_deref(),
            *function,
            run,
        ),
        Command::Bench {
            sizes,
            segment,
            run,
        } => cmd_bench(sizes, *segment, run),
        Command::Selftest { max_length } => cmd_selftest(*max_length),
        Command::Prime { action } => cmd_prime(action),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
