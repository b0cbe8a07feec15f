//! `severi`: exact computations around linear systems of nodal plane curves,
//! their Grassmannian/flag images, degeneration limits, and certified curve
//! synthesis. All randomness flows from one 64-bit seed; identical
//! invocations produce byte-identical output, independent of `--jobs`.

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use severi::degeneration::{limit_flag, limit_gamma, FamilyConfig};
use severi::forms::{Form, ProjPoint};
use severi::grassmann::{flag, gamma};
use severi::linsys::{
    critical_degree, default_strata, expected_dims, linear_system, monotone_independence_check,
    stratum_sample, PointConfig, StratumKind, StratumSpec,
};
use severi::nodal::{certify_member, synth_nodal, CertifyError, CertifyOptions};
use severi::rng::derive_seed;
use severi::scalar::{check_modulus, FieldKind, DEFAULT_MODULUS};

/// Environment variable overriding the default prime-field modulus.
const MODULUS_ENV: &str = "SEVERI_MODULUS";

#[derive(Parser)]
#[command(
    name = "severi",
    version,
    about = "Exact linear systems of nodal plane curves, Plücker images, limits, and certified synthesis"
)]
struct Cli {
    /// Coefficient field: "rational", "fp" (default modulus), or "fp:<p>"
    #[arg(long, global = true, default_value = "rational")]
    field: String,
    /// Master seed for all pseudo-random draws
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads (output is identical for any value)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Cmd {
    /// Dimension and basis of the system of degree-s curves doubled at the
    /// given points
    Dim {
        #[arg(long)]
        s: u32,
        /// JSON file: { "points": [["x","y","z"], ...], "ordered": bool }
        #[arg(long)]
        points: String,
    },
    /// Projective-dimension grid over the generic stratum
    Table {
        #[arg(long, default_value_t = 6)]
        s_max: u32,
        #[arg(long, default_value_t = 5)]
        d_max: usize,
        #[arg(long, default_value_t = 3)]
        samples: u32,
        #[arg(long, default_value_t = 50)]
        bound: u64,
    },
    /// Critical-degree scan: smallest s with independent conditions on all
    /// tested strata
    Kd {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 8)]
        s_max: u32,
        #[arg(long, default_value_t = 5)]
        samples: u32,
        #[arg(long, default_value_t = 30)]
        bound: u64,
        /// Also verify independence monotonically up to this degree
        #[arg(long)]
        r_max: Option<u32>,
    },
    /// Grassmannian image (dual Plücker coordinates) of a configuration
    Plucker {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        points: String,
    },
    /// Flag image of an ordered configuration
    Flag {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        points: String,
    },
    /// Limit of the Grassmannian (or flag) image along a one-parameter
    /// family
    Limit {
        #[arg(long)]
        k: u32,
        /// JSON file: { "paths": [[[c0,c1,..],[..],[..]], ...], "t_star": "0" }
        #[arg(long)]
        family: String,
        /// Compute the flag limit (per-prefix) instead of the plain limit
        #[arg(long, default_value_t = false)]
        flag: bool,
    },
    /// Synthesize a certified degree-n curve with d nodes
    Synth {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 50)]
        attempts: u32,
    },
    /// Certify that a curve has exactly the claimed nodes
    Certify {
        #[arg(long)]
        curve: String,
        #[arg(long)]
        nodes: String,
    },
    /// Run the built-in invariant battery
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        // ignore failure: the global pool may already exist under test
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    match run(&cli) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

enum CliError {
    /// Bad flags or malformed input files: exit 2.
    Usage(String),
    /// Well-formed request that failed (degenerate input, internal error):
    /// exit 1.
    Failure(String),
}

impl From<severi::Error> for CliError {
    fn from(e: severi::Error) -> CliError {
        CliError::Failure(e.to_string())
    }
}

fn parse_field(cli: &Cli) -> Result<FieldKind, CliError> {
    let spec = cli.field.as_str();
    if spec == "rational" {
        return Ok(FieldKind::Rational);
    }
    if spec == "fp" {
        let p = match std::env::var(MODULUS_ENV) {
            Ok(v) => v
                .parse::<u64>()
                .map_err(|_| CliError::Usage(format!("bad {MODULUS_ENV} value {v:?}")))?,
            Err(_) => DEFAULT_MODULUS,
        };
        check_modulus(p).map_err(|e| CliError::Usage(e.to_string()))?;
        return Ok(FieldKind::Fp(p));
    }
    FieldKind::parse(spec).map_err(|e| CliError::Usage(e.to_string()))
}

fn repro_header(cli: &Cli, bounds: &str) {
    let sub = match &cli.cmd {
        Cmd::Dim { .. } => "dim",
        Cmd::Table { .. } => "table",
        Cmd::Kd { .. } => "kd",
        Cmd::Plucker { .. } => "plucker",
        Cmd::Flag { .. } => "flag",
        Cmd::Limit { .. } => "limit",
        Cmd::Synth { .. } => "synth",
        Cmd::Certify { .. } => "certify",
        Cmd::Selftest => "selftest",
    };
    eprintln!(
        "# severi {} | cmd={} seed={} field={} jobs={} {}",
        env!("CARGO_PKG_VERSION"),
        sub,
        cli.seed,
        cli.field,
        cli.jobs.map_or("auto".to_string(), |j| j.to_string()),
        bounds
    );
}

fn read_json<T: serde::de::DeserializeOwned>(path: &str) -> Result<T, CliError> {
    let data = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {path}: {e}")))?;
    serde_json::from_str(&data).map_err(|e| {
        CliError::Usage(format!(
            "parse error in {path} at line {}, column {}: {e}",
            e.line(),
            e.column()
        ))
    })
}

/// Points file wire format; coordinates are parsed in the active field.
#[derive(serde::Deserialize)]
struct PointsFile {
    points: Vec<[String; 3]>,
    #[serde(default)]
    ordered: bool,
}

fn load_points(path: &str, kind: FieldKind) -> Result<PointConfig, CliError> {
    let wire: PointsFile = read_json(path)?;
    let ordered = wire.ordered;
    build_config(path, wire, kind, ordered)
}

fn load_points_ordered(path: &str, kind: FieldKind) -> Result<PointConfig, CliError> {
    let wire: PointsFile = read_json(path)?;
    build_config(path, wire, kind, true)
}

fn build_config(
    path: &str,
    wire: PointsFile,
    kind: FieldKind,
    ordered: bool,
) -> Result<PointConfig, CliError> {
    let points = wire
        .points
        .iter()
        .map(|w| ProjPoint::from_wire(w, kind))
        .collect::<severi::Result<Vec<_>>>()
        .map_err(|e| CliError::Usage(format!("bad point in {path}: {e}")))?;
    PointConfig::new(points, ordered)
        .map_err(|e| CliError::Usage(format!("bad configuration in {path}: {e}")))
}

fn emit<T: Serialize>(value: &T) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Failure(format!("serialization failed: {e}")))?;
    println!("{json}");
    Ok(())
}

fn require_rational(kind: FieldKind, what: &str) -> Result<(), CliError> {
    if kind != FieldKind::Rational {
        return Err(CliError::Usage(format!(
            "{what} runs over the rationals; drop --field"
        )));
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    let kind = parse_field(cli)?;
    match &cli.cmd {
        Cmd::Dim { s, points } => {
            repro_header(cli, &format!("s={s} points={points}"));
            let cfg = load_points(points, kind)?;
            let res = linear_system(*s, &cfg)?;
            match cli.format {
                Format::Json => emit(&res)?,
                Format::Text => {
                    println!(
                        "degree {} with {} double points: rank {}, proj_dim {}, expected {}, superabundance {}",
                        res.degree,
                        res.config.len(),
                        res.rank,
                        res.proj_dim,
                        res.expected_proj_dim,
                        res.superabundance
                    );
                    for (i, f) in res.basis.iter().enumerate() {
                        let coeffs: Vec<String> = f.coeffs().iter().map(|c| c.to_wire()).collect();
                        println!("basis[{i}] = [{}]", coeffs.join(", "));
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Table {
            s_max,
            d_max,
            samples,
            bound,
        } => {
            repro_header(
                cli,
                &format!("s_max={s_max} d_max={d_max} samples={samples} bound={bound}"),
            );
            require_rational(kind, "table")?;
            let report = dimension_table(*s_max, *d_max, *samples, *bound, cli.seed)?;
            match cli.format {
                Format::Json => emit(&report)?,
                Format::Text => {
                    print!("{:>4}", "s\\d");
                    for d in 1..=*d_max {
                        print!("{d:>6}");
                    }
                    println!();
                    for s in 1..=*s_max {
                        print!("{s:>4}");
                        for d in 1..=*d_max {
                            let row = report
                                .rows
                                .iter()
                                .find(|r| r.s == s && r.d == d)
                                .expect("complete grid");
                            print!("{:>6}", row.proj_dim);
                        }
                        println!();
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Kd {
            d,
            s_max,
            samples,
            bound,
            r_max,
        } => {
            repro_header(
                cli,
                &format!("d={d} s_max={s_max} samples={samples} bound={bound}"),
            );
            require_rational(kind, "kd")?;
            let strata = default_strata(*d, cli.seed, *bound);
            let report = critical_degree(*d, *s_max, &strata, *samples)?;
            let monotone = match (report.k_hat, r_max) {
                (Some(k), Some(r)) => {
                    Some(monotone_independence_check(*d, k, *r, &strata, *samples)?)
                }
                _ => None,
            };
            match cli.format {
                Format::Json => {
                    #[derive(Serialize)]
                    struct KdOutput<'a> {
                        #[serde(flatten)]
                        report: &'a severi::linsys::CriticalDegreeReport,
                        monotone: &'a Option<severi::linsys::MonotoneReport>,
                    }
                    emit(&KdOutput {
                        report: &report,
                        monotone: &monotone,
                    })?;
                }
                Format::Text => {
                    println!(
                        "d = {}: k_hat = {} (rank reading), alternative reading {}",
                        report.d,
                        report
                            .k_hat
                            .map_or("not found".to_string(), |k| k.to_string()),
                        report
                            .k_hat_alt
                            .map_or("not found".to_string(), |k| k.to_string()),
                    );
                    for w in &report.witnesses {
                        println!(
                            "  witness below k_hat: s={} {} sample {} rank {} proj_dim {} (expected {})",
                            w.s, w.stratum, w.sample, w.rank, w.proj_dim, w.expected_proj_dim
                        );
                    }
                    if let Some(m) = &monotone {
                        println!(
                            "  monotone independence through r = {}: {}",
                            m.to, m.all_independent
                        );
                    }
                }
            }
            Ok(if report.k_hat.is_some() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Cmd::Plucker { k, points } => {
            repro_header(cli, &format!("k={k} points={points}"));
            let cfg = load_points(points, kind)?;
            let pp = gamma(&cfg, *k)?;
            match cli.format {
                Format::Json => emit(&pp)?,
                Format::Text => {
                    println!(
                        "gamma image: k={} d={} with {} nonzero coordinates",
                        pp.k(),
                        pp.d(),
                        pp.coords().len()
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Flag { k, points } => {
            repro_header(cli, &format!("k={k} points={points}"));
            // the flag is order-sensitive: take the points in file order
            let cfg = load_points_ordered(points, kind)?;
            let fp = flag(&cfg, *k)?;
            match cli.format {
                Format::Json => emit(&fp)?,
                Format::Text => {
                    for (i, pp) in fp.chain.iter().enumerate() {
                        println!(
                            "chain[{i}]: codimension {} with {} nonzero coordinates",
                            pp.tuple_len(),
                            pp.coords().len()
                        );
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Limit {
            k,
            family,
            flag: flag_mode,
        } => {
            repro_header(cli, &format!("k={k} family={family} flag={flag_mode}"));
            require_rational(kind, "limit")?;
            let fam: FamilyConfig = read_json(family)?;
            if *flag_mode {
                let rep = limit_flag(&fam, *k)?;
                match cli.format {
                    Format::Json => emit(&rep)?,
                    Format::Text => {
                        println!(
                            "flag limit at t* = {}: nesting holds = {}",
                            severi::scalar::format_rational(fam.t_star()),
                            rep.nesting_holds
                        );
                    }
                }
            } else {
                let rep = limit_gamma(&fam, *k)?;
                match cli.format {
                    Format::Json => emit(&rep)?,
                    Format::Text => {
                        println!(
                            "limit at t* = {}: vanishing order {}, decomposable {}, {} collisions",
                            severi::scalar::format_rational(fam.t_star()),
                            rep.vanishing_order,
                            rep.decomposable,
                            rep.collisions.len()
                        );
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Synth { n, d, attempts } => {
            repro_header(cli, &format!("n={n} d={d} attempts={attempts}"));
            require_rational(kind, "synth")?;
            match synth_nodal(
                *n,
                *d,
                derive_seed(cli.seed, &[*n as u64, *d as u64]),
                *attempts,
            ) {
                Ok(sp) => {
                    match cli.format {
                        Format::Json => emit(&sp)?,
                        Format::Text => {
                            println!(
                                "certified degree-{} curve with {} nodes (irreducibility: {:?})",
                                sp.curve.degree(),
                                sp.nodes.len(),
                                sp.certificate.irreducibility
                            );
                        }
                    }
                    Ok(ExitCode::SUCCESS)
                }
                Err(failure) => {
                    emit(&*failure)?;
                    Ok(ExitCode::from(1))
                }
            }
        }
        Cmd::Certify { curve, nodes } => {
            repro_header(cli, &format!("curve={curve} nodes={nodes}"));
            require_rational(kind, "certify")?;
            let f: Form = read_json(curve)?;
            let cfg = load_points(nodes, FieldKind::Rational)?;
            match certify_member(&f, &cfg, &CertifyOptions::default()) {
                Ok(cert) => {
                    match cli.format {
                        Format::Json => emit(&cert)?,
                        Format::Text => {
                            println!(
                                "certified: {} nodes, {} clean scans, squarefree={}, irreducibility={:?}",
                                cert.witnesses.len(),
                                cert.scans.len(),
                                cert.squarefree,
                                cert.irreducibility
                            );
                        }
                    }
                    Ok(ExitCode::SUCCESS)
                }
                Err(CertifyError::Refuted(r)) => {
                    #[derive(Serialize)]
                    struct RefutationOut<'a> {
                        refuted: &'a severi::nodal::Refutation,
                    }
                    emit(&RefutationOut { refuted: &r })?;
                    Ok(ExitCode::from(1))
                }
                Err(CertifyError::InconclusiveCompleteness { tried_primes }) => {
                    Err(CliError::Failure(format!(
                        "inconclusive: no two usable verification primes among {tried_primes:?}"
                    )))
                }
                Err(CertifyError::Other(e)) => Err(e.into()),
            }
        }
        Cmd::Selftest => {
            repro_header(cli, "");
            let report = severi::selftest::run(cli.seed)?;
            match cli.format {
                Format::Json => emit(&report)?,
                Format::Text => {
                    for s in &report.suites {
                        println!(
                            "{:<28} passed {:>3} failed {:>3}",
                            s.name, s.passed, s.failed
                        );
                    }
                    println!(
                        "total: {} passed, {} failed",
                        report.total_passed, report.total_failed
                    );
                }
            }
            Ok(if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

#[derive(Serialize)]
struct TableRow {
    s: u32,
    d: usize,
    ambient_proj_dim: i64,
    expected_proj_dim: i64,
    proj_dim: i64,
    superabundance: usize,
    agreed_across_samples: bool,
}

#[derive(Serialize)]
struct TableReport {
    seed: u64,
    samples: u32,
    bound: u64,
    rows: Vec<TableRow>,
}

fn dimension_table(
    s_max: u32,
    d_max: usize,
    samples: u32,
    bound: u64,
    seed: u64,
) -> Result<TableReport, CliError> {
    use rayon::prelude::*;
    let mut configs = Vec::new();
    for d in 1..=d_max {
        for i in 0..samples {
            let spec = StratumSpec::new(
                StratumKind::Generic,
                derive_seed(seed, &[d as u64, i as u64]),
            )
            .with_bound(bound);
            configs.push((d, stratum_sample(d, &spec)?));
        }
    }
    let tasks: Vec<(u32, usize)> = (1..=s_max)
        .flat_map(|s| (0..configs.len()).map(move |i| (s, i)))
        .collect();
    let results: Vec<(usize, i64)> = tasks
        .par_iter()
        .map(|&(s, i)| {
            let res = linear_system(s, &configs[i].1)?;
            Ok((res.rank, res.proj_dim))
        })
        .collect::<severi::Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for s in 1..=s_max {
        for d in 1..=d_max {
            let vals: Vec<&(usize, i64)> = tasks
                .iter()
                .zip(&results)
                .filter(|(&(ts, ti), _)| ts == s && configs[ti].0 == d)
                .map(|(_, r)| r)
                .collect();
            let (n, expected, _) = expected_dims(s, d);
            let proj_dim = vals[0].1;
            let agreed = vals.iter().all(|v| v.1 == proj_dim);
            rows.push(TableRow {
                s,
                d,
                ambient_proj_dim: n,
                expected_proj_dim: expected,
                proj_dim,
                superabundance: 3 * d - vals[0].0,
                agreed_across_samples: agreed,
            });
        }
    }
    Ok(TableReport {
        seed,
        samples,
        bound,
        rows,
    })
}
