//! `spt2`: tables, congruence checks and identity fixtures for spt2.
//!
//! Exit codes: 0 everything passed, 1 a check failed, 2 the run itself
//! failed (bad input, corrupt cache, table too small).

mod output;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use spt2_core::cache::{write_csv, TableCache};
use spt2_core::dissect::{dissect, DissectionSpec};
use spt2_core::fixture::{
    builtin_fixtures, find_fixture, negative_controls, parse_fixtures, parse_side, run_all,
    table_bound, Fixture, DEFAULT_ORDER,
};
use spt2_core::series::{CoeffRing, Series};
use spt2_core::spt::{Spt2Table, DEFAULT_ENUMERATION_LIMIT};
use spt2_core::verify::{
    doubling_families, prior_claims, scan, single_progression_claims, verify_claim,
    verify_doubling_step, verify_family, verify_induction_step, verify_prime_family,
    CongruenceClaim, PrimeFamilyClaim, VerifyError, DEFAULT_MIN_WITNESSES,
};

use output::{write_aligned, Format, Records};

#[derive(Parser)]
#[command(name = "spt2", version)]
#[command(about = "Verify and search for congruences of spt2(n)")]
struct Cli {
    /// Output format; `table` defaults to csv, everything else to json
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Cap on worker threads
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Table cache directory (default: $SPT2_CACHE_DIR, else .spt2-cache)
    #[arg(long, global = true)]
    cache: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print spt2(0..=N) as `n,spt2(n)` rows
    Table {
        n: usize,
        /// Compare against direct enumeration where it is feasible
        #[arg(long)]
        cross_check: bool,
    },
    /// Check spt2(a n + b) = 0 (mod M) for 0 <= n <= n-max
    Verify {
        #[arg(long)]
        a: usize,
        #[arg(long)]
        b: usize,
        #[arg(long = "modulus", short = 'M')]
        modulus: u64,
        #[arg(long)]
        n_max: usize,
    },
    /// Run a built-in suite of congruences
    VerifyTheorem(TheoremArgs),
    /// Check identity fixtures by name, from a file, or all built-ins
    Identity(IdentityArgs),
    /// Expand a series and extract the exponents r (mod m)
    Dissect {
        /// Eta-quotient expression, `spt2(a n + b)`, or a pipeline with `| dissect m r`
        series: String,
        m: usize,
        r: usize,
        /// Coefficients expanded before dissecting
        #[arg(long, default_value_t = DEFAULT_ORDER)]
        order: usize,
        /// Reduce coefficients mod M (0 keeps them exact)
        #[arg(long = "modulus", short = 'M', default_value_t = 0)]
        modulus: u64,
    },
    /// Search for progressions with spt2(a n + b) = 0 (mod M)
    Scan {
        #[arg(long = "modulus", short = 'M', default_value_t = 4)]
        modulus: u64,
        #[arg(long, default_value_t = 80)]
        a_max: usize,
        /// Minimum number of table entries a progression must cover
        #[arg(long, default_value_t = DEFAULT_MIN_WITNESSES)]
        n_min: usize,
        /// Table bound
        #[arg(long, default_value_t = 10_000)]
        n: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Theorem {
    /// mod 3, mod 5 and mod 4 congruences known beforehand
    Prior,
    /// Six single mod-4 progressions
    #[value(name = "1")]
    Single,
    /// Six families indexed by powers of two
    #[value(name = "2")]
    Families,
    /// Families indexed by primes p = 5, 7 (mod 8)
    #[value(name = "3")]
    Primes,
}

#[derive(Args)]
struct TheoremArgs {
    which: Theorem,
    /// Largest argument for `prior`
    #[arg(long, default_value_t = 3000)]
    bound: usize,
    /// Largest n (default 50 for `1`, 10 for `2`)
    #[arg(long)]
    n_max: Option<usize>,
    /// Largest j for `2`
    #[arg(long, default_value_t = 3)]
    j_max: u32,
    /// Also replay the 16u+10 induction step for `2`
    #[arg(long)]
    induction: bool,
    /// Primes for `3`
    #[arg(long = "p", default_values_t = [5u64, 7, 13])]
    primes: Vec<u64>,
    #[arg(long, default_value_t = 0)]
    k_max: u32,
    #[arg(long, default_value_t = 10)]
    m_max: u64,
}

#[derive(Args)]
struct IdentityArgs {
    /// Fixture name
    name: Option<String>,
    /// Run every built-in fixture
    #[arg(long, conflicts_with = "name")]
    all: bool,
    /// Run the negative controls, which are expected to fail
    #[arg(long, conflicts_with_all = ["name", "all"])]
    negative: bool,
    /// Read fixtures from a file instead of the built-in set
    #[arg(long)]
    file: Option<PathBuf>,
    /// Source order for every fixture, overriding each fixture's own
    #[arg(long)]
    order: Option<usize>,
}

#[derive(Serialize)]
struct Tagged<'a, T> {
    check: &'a str,
    #[serde(flatten)]
    report: T,
}

#[derive(Serialize)]
struct StepFailure {
    family: String,
    j: u32,
    status: &'static str,
    error: String,
}

#[derive(Serialize)]
struct DissectRecord {
    series: String,
    m: usize,
    r: usize,
    #[serde(rename = "M")]
    modulus: u64,
    coeffs: Vec<String>,
}

fn cache(cli: &Cli) -> TableCache {
    match &cli.cache {
        Some(dir) => TableCache::new(dir),
        None => TableCache::from_env(),
    }
}

fn load_table(cli: &Cli, n: usize) -> anyhow::Result<Spt2Table> {
    let cache = cache(cli);
    cache
        .load_or_build(n)
        .with_context(|| format!("loading spt2 table to {n} from {}", cache.dir().display()))
}

fn cmd_table(cli: &Cli, n: usize, cross_check: bool) -> anyhow::Result<bool> {
    let table = load_table(cli, n)?;
    let mut agrees = true;
    if cross_check {
        let limit = n.min(DEFAULT_ENUMERATION_LIMIT);
        let enumerated = Spt2Table::by_enumeration(limit)?;
        for (k, (e, g)) in enumerated.values().iter().zip(table.values()).enumerate() {
            if e != g {
                eprintln!("cross-check: spt2({k}) enumerates to {e}, table has {g}");
                agrees = false;
            }
        }
        if agrees {
            eprintln!("cross-check: enumeration agrees for n <= {limit}");
        }
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => write_csv(&mut out, &table)?,
        Format::Json => {
            for (k, v) in table.values().iter().enumerate() {
                writeln!(out, r#"{{"n":{k},"spt2":"{v}"}}"#)?;
            }
        }
        Format::Text => {
            let rows: Vec<Vec<String>> = table
                .values()
                .iter()
                .enumerate()
                .map(|(k, v)| vec![k.to_string(), v.to_string()])
                .collect();
            write_aligned(&mut out, &["n".into(), "spt2(n)".into()], &rows)?;
        }
    }
    Ok(agrees)
}

fn claims_records(cli: &Cli, claims: &[CongruenceClaim]) -> anyhow::Result<Records> {
    let bound = claims.iter().map(|c| c.largest_argument()).max().unwrap_or(0);
    let table = load_table(cli, bound)?;
    let mut records = Records::default();
    for c in claims {
        records.push(&verify_claim(c, &table)?)?;
    }
    Ok(records)
}

fn cmd_verify_theorem(cli: &Cli, args: &TheoremArgs) -> anyhow::Result<Records> {
    match args.which {
        Theorem::Prior => claims_records(cli, &prior_claims(args.bound)),
        Theorem::Single => claims_records(cli, &single_progression_claims(args.n_max.unwrap_or(50))),
        Theorem::Families => {
            let families = doubling_families(args.j_max, args.n_max.unwrap_or(10));
            let bound = families.iter().map(|f| f.largest_argument()).max().unwrap_or(0);
            let table = load_table(cli, bound)?;
            let mut records = Records::default();
            for f in &families {
                records.push(&Tagged {
                    check: "family",
                    report: verify_family(f, &table)?,
                })?;
                for j in 0..args.j_max {
                    records.push(&Tagged {
                        check: "doubling",
                        report: verify_doubling_step(f, j, &table)?,
                    })?;
                    if !args.induction {
                        continue;
                    }
                    match verify_induction_step(f, j, &table) {
                        Ok(report) => records.push(&Tagged {
                            check: "induction",
                            report,
                        })?,
                        Err(err @ VerifyError::NonIntegralShift { .. }) => {
                            records.push(&Tagged {
                                check: "induction",
                                report: StepFailure {
                                    family: f.name.clone(),
                                    j,
                                    status: "fail",
                                    error: err.to_string(),
                                },
                            })?
                        }
                        Err(err) => return Err(err.into()),
                    }
                }
            }
            Ok(records)
        }
        Theorem::Primes => {
            let claims = args
                .primes
                .iter()
                .map(|&p| PrimeFamilyClaim::new(p, args.k_max, args.m_max))
                .collect::<Result<Vec<_>, _>>()?;
            let mut bound = 0u64;
            for c in &claims {
                for (k, m) in c.instances() {
                    let a = c.argument(k, m).context("argument overflows u64")?;
                    bound = bound.max(a);
                }
            }
            let table = load_table(cli, usize::try_from(bound)?)?;
            let mut records = Records::default();
            for c in &claims {
                records.push(&verify_prime_family(c, &table)?)?;
            }
            Ok(records)
        }
    }
}

fn cmd_identity(cli: &Cli, args: &IdentityArgs) -> anyhow::Result<Records> {
    let fixtures: Vec<Fixture> = match (&args.file, &args.name) {
        (Some(path), name) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let all = parse_fixtures(&text).with_context(|| path.display().to_string())?;
            match name {
                Some(n) => match all.into_iter().find(|f| &f.name == n) {
                    Some(f) => vec![f],
                    None => bail!("unknown fixture {n:?} in {}", path.display()),
                },
                None => all,
            }
        }
        (None, Some(name)) => vec![find_fixture(name)?],
        (None, None) if args.all => builtin_fixtures(),
        (None, None) if args.negative => negative_controls(),
        (None, None) => bail!("give a fixture name, --all, --negative or --file"),
    };
    if let Some(0) = args.order {
        bail!("--order must be positive");
    }
    let table = match table_bound(&fixtures, args.order) {
        Some(n) => Some(load_table(cli, n)?),
        None => None,
    };
    let mut records = Records::default();
    for r in run_all(&fixtures, args.order, table.as_ref())? {
        records.push(&r)?;
    }
    Ok(records)
}

fn dissected<C: spt2_core::Coefficient>(
    cli: &Cli,
    text: &str,
    spec: DissectionSpec,
    ring: CoeffRing,
    order: usize,
) -> anyhow::Result<Series<C>> {
    let side = parse_side(1, text)?;
    let table = match side.table_bound(order) {
        Some(n) => Some(load_table(cli, n)?),
        None => None,
    };
    let s: Series<C> = side.evaluate(ring, order, table.as_ref(), "dissect")?;
    Ok(dissect(&s, spec))
}

fn cmd_dissect(
    cli: &Cli,
    text: &str,
    m: usize,
    r: usize,
    order: usize,
    modulus: u64,
) -> anyhow::Result<()> {
    let spec = DissectionSpec::new(m, r)?;
    let ring = CoeffRing::new(modulus)?;
    let (display, coeffs) = if ring.is_exact() {
        let s = dissected::<num_bigint::BigInt>(cli, text, spec, ring, order)?;
        (s.to_string(), s.coeffs().iter().map(|c| c.to_string()).collect())
    } else {
        let s = dissected::<u64>(cli, text, spec, ring, order)?;
        (s.to_string(), s.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>())
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.format.unwrap_or(Format::Json) {
        Format::Text => writeln!(out, "{display}")?,
        Format::Csv => {
            for (n, c) in coeffs.iter().enumerate() {
                writeln!(out, "{n},{c}")?;
            }
        }
        Format::Json => {
            let record = DissectRecord {
                series: text.trim().to_string(),
                m,
                r,
                modulus,
                coeffs,
            };
            writeln!(out, "{}", serde_json::to_string(&record)?)?;
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring thread pool")?;
    }
    let records = match &cli.command {
        Command::Table { n, cross_check } => return cmd_table(cli, *n, *cross_check),
        Command::Dissect {
            series,
            m,
            r,
            order,
            modulus,
        } => {
            cmd_dissect(cli, series, *m, *r, *order, *modulus)?;
            return Ok(true);
        }
        Command::Verify { a, b, modulus, n_max } => {
            let claim = CongruenceClaim::new(*a, *b, *modulus, *n_max)?;
            claims_records(cli, &[claim])?
        }
        Command::VerifyTheorem(args) => cmd_verify_theorem(cli, args)?,
        Command::Identity(args) => cmd_identity(cli, args)?,
        Command::Scan {
            modulus,
            a_max,
            n_min,
            n,
        } => {
            let table = load_table(cli, *n)?;
            let mut records = Records::default();
            for hit in scan(*modulus, *a_max, *n_min, &table)? {
                records.push(&hit)?;
            }
            records
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    records.render(cli.format.unwrap_or(Format::Json), &mut out)?;
    out.flush()?;
    Ok(records.all_passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
