//! Command-line front end for the BoxQP relaxation library.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use boxqp_core::bench::{
    builtin_bl, generate, parse_instance, run_t1, run_t2, run_t3, run_t4, run_t56,
    serialize_instance, DiagMode, GenSpec, ParseError, SearchConfig, SuiteConfig, Table,
};
use boxqp_core::conic::ConicError;
use boxqp_core::cuts::{export_table, CutCatalog};
use boxqp_core::driver::{extract_rank_one, run, DriverConfig, DriverError, ModelState};
use boxqp_core::exact::{solve_exact_qpb3, ExactError};
use boxqp_core::oracle::{solve_global, OracleError};
use boxqp_core::par::Execution;
use boxqp_core::{BoxQpInstance, ClarabelBackend, Family, RelaxationLevel};
use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

#[derive(Parser)]
#[command(name = "boxqp", version, about = "Conic relaxations for box-constrained QP")]
struct Cli {
    /// Run independent solves on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args, Clone)]
struct DriverArgs {
    /// Relaxation preset: psd+diag, psd+rlt, psd+rlt+tri, etri1, etri123, soc.
    #[arg(long, default_value = "soc")]
    level: String,
    #[arg(long, default_value_t = 20)]
    rounds: usize,
    /// Cuts added per round.
    #[arg(long, default_value_t = 10)]
    cap: usize,
    /// Normalised violation threshold.
    #[arg(long, default_value_t = 1e-5)]
    threshold: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the cutting-plane driver on an instance file (`@bl` for the built-in).
    Solve {
        file: String,
        #[command(flatten)]
        driver: DriverArgs,
        /// Print every round.
        #[arg(long)]
        log: bool,
    },
    /// Exact value of a three-variable instance via the disjunctive formulation.
    Exact3 { file: String },
    /// Global optimum by active-set enumeration.
    Oracle { file: String },
    /// Maximum cut violations over the base relaxations.
    Maxviol {
        #[arg(long, value_parser = ["1", "2"])]
        table: String,
        #[arg(long)]
        csv: bool,
    },
    /// Experiment tables.
    Tables {
        #[arg(long, value_enum)]
        which: WhichTable,
        /// Instances in the regenerated suite.
        #[arg(long, default_value_t = 50)]
        count: usize,
        /// Objective evaluations per searched level; 0 skips the search.
        #[arg(long, default_value_t = 4000)]
        budget: usize,
        #[arg(long, default_value_t = 2020)]
        seed: u64,
        #[arg(long)]
        csv: bool,
    },
    /// Generate a random instance.
    Gen {
        #[arg(long)]
        n: usize,
        /// Density in percent.
        #[arg(long)]
        d: u32,
        #[arg(long, default_value_t = 1)]
        num: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Diagonal entries: same (drawn like the rest) or zero.
        #[arg(long, default_value = "same")]
        diag: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Regenerate the cut catalog from the switching algebra and compare it
    /// with the published rows.
    VerifyCatalog {
        /// Also print the generated rows of this family.
        #[arg(long)]
        print: Option<String>,
    },
    /// Solve, then re-solve with the bound pinned and a random objective to
    /// recover a rank-one point.
    Extract {
        file: String,
        #[arg(long)]
        pin: Option<f64>,
        #[command(flatten)]
        driver: DriverArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum WhichTable {
    T1,
    T2,
    T3,
    T4,
    T5,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Driver(#[from] DriverError),
    #[error(transparent)]
    Conic(#[from] ConicError),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::Parse { .. } => 1,
            CliError::Oracle(_) => 1,
            CliError::Exact(ExactError::WrongDimension(_)) => 1,
            CliError::Driver(DriverError::Config(_)) => 1,
            CliError::Conic(ConicError::IndexOutOfRange { .. })
            | CliError::Conic(ConicError::InconsistentLevel(_)) => 1,
            _ => 2,
        }
    }
}

fn load(file: &str) -> Result<BoxQpInstance, CliError> {
    if file.eq_ignore_ascii_case("@bl") {
        return Ok(builtin_bl());
    }
    let text = fs::read_to_string(Path::new(file)).map_err(|source| CliError::Io {
        path: file.into(),
        source,
    })?;
    parse_instance(&text).map_err(|source| CliError::Parse {
        path: file.into(),
        source,
    })
}

fn driver_config(args: &DriverArgs, exec: Execution) -> Result<(RelaxationLevel, DriverConfig), CliError> {
    let level = RelaxationLevel::parse(&args.level)
        .ok_or_else(|| CliError::Usage(format!("unknown level `{}`", args.level)))?;
    let config = DriverConfig {
        max_rounds: args.rounds,
        per_round_cap: args.cap,
        norm_threshold: args.threshold,
        seed: args.seed,
        exec,
        ..Default::default()
    };
    config.validate()?;
    Ok((level, config))
}

fn show(table: &Table, csv: bool) {
    if csv {
        print!("{}", table.to_csv());
    } else {
        print!("{}", table.render_text());
    }
}

fn fmt_x(x: &[f64]) -> String {
    let parts: Vec<String> = x.iter().map(|v| format!("{v:.5}")).collect();
    format!("[{}]", parts.join(", "))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let backend = ClarabelBackend::default();
    match cli.cmd {
        Cmd::Solve { file, driver, log } => {
            let inst = load(&file)?;
            let (level, config) = driver_config(&driver, exec)?;
            let r = run(&inst, &level, &config, &backend)?;
            if log {
                for l in &r.log {
                    let added: Vec<String> = l
                        .added_by_family()
                        .iter()
                        .map(|(f, k)| format!("{}={k}", f.name()))
                        .collect();
                    println!(
                        "round {:>2} {:?}: value {:.5}, added [{}], blocks {}, caps {}",
                        l.round,
                        l.phase,
                        l.value,
                        added.join(" "),
                        l.blocks_added,
                        l.caps_added
                    );
                }
            }
            println!("level      {}", level.name());
            println!("value      {:.5}", r.value);
            println!("feasible   {:.5}", r.feasible_value);
            println!("rounds     {}", r.log.len());
            println!("etri cuts  {}", r.etri_count);
            println!("soc blocks {} ({} caps)", r.soc_blocks, r.soc_caps);
            println!("rank ratio {:.5}", r.rank_ratio);
            println!("converged  {}", r.converged);
            println!("x          {}", fmt_x(r.point.x.as_slice()));
        }
        Cmd::Exact3 { file } => {
            let inst = load(&file)?;
            println!("{:.5}", solve_exact_qpb3(&inst, &backend)?);
        }
        Cmd::Oracle { file } => {
            let inst = load(&file)?;
            let sol = solve_global(&inst)?;
            println!("value      {:.5}", sol.value);
            println!("x          {}", fmt_x(sol.x.as_slice()));
            println!("pattern    {}", sol.pattern);
            println!("candidates {}", sol.candidates);
        }
        Cmd::Maxviol { table, csv } => {
            let t = if table == "1" {
                run_t1(&backend, exec)
            } else {
                run_t2(&backend, exec)
            };
            show(&t, csv);
        }
        Cmd::Tables {
            which,
            count,
            budget,
            seed,
            csv,
        } => match which {
            WhichTable::T1 => show(&run_t1(&backend, exec), csv),
            WhichTable::T2 => show(&run_t2(&backend, exec), csv),
            WhichTable::T3 => show(
                &run_t3(
                    &backend,
                    &DriverConfig {
                        exec,
                        ..Default::default()
                    },
                ),
                csv,
            ),
            WhichTable::T4 => {
                let search = SearchConfig {
                    budget,
                    exec,
                    ..Default::default()
                };
                let (t, _) = run_t4(&backend, (budget > 0).then_some(&search));
                show(&t, csv);
            }
            WhichTable::T5 => {
                let cfg = SuiteConfig {
                    count,
                    seed,
                    exec,
                    ..Default::default()
                };
                let (rows, values, gaps) = run_t56(&cfg, &backend);
                show(&values, csv);
                show(&gaps, csv);
                for r in rows.iter().filter(|r| !r.errors.is_empty()) {
                    eprintln!("{}: {}", r.label, r.errors.join("; "));
                }
            }
        },
        Cmd::Gen {
            n,
            d,
            num,
            seed,
            diag,
            output,
        } => {
            if n == 0 || d > 100 {
                return Err(CliError::Usage("need n >= 1 and d <= 100".into()));
            }
            let diag = DiagMode::parse(&diag)
                .ok_or_else(|| CliError::Usage(format!("unknown diagonal mode `{diag}`")))?;
            let spec = GenSpec {
                diag,
                ..GenSpec::new(n, d, num, seed)
            };
            let text = serialize_instance(&generate(&spec));
            match output {
                Some(path) => fs::write(&path, text).map_err(|source| CliError::Io {
                    path: path.display().to_string(),
                    source,
                })?,
                None => print!("{text}"),
            }
        }
        Cmd::VerifyCatalog { print } => {
            let catalog = CutCatalog::generate();
            let mut ok = true;
            for fam in [
                Family::Rlt,
                Family::Tri,
                Family::Etri1,
                Family::Etri2,
                Family::Etri3,
            ] {
                let matches = catalog.matches_golden(fam);
                ok &= matches;
                println!(
                    "{:<6} rows {:>3}  min norm^2 {:>7.5}  {}",
                    fam.name(),
                    catalog.get(fam).len(),
                    catalog.min_norm(fam).powi(2),
                    if matches { "matches" } else { "MISMATCH" }
                );
            }
            if let Some(name) = print {
                let fam = Family::parse(&name)
                    .ok_or_else(|| CliError::Usage(format!("unknown family `{name}`")))?;
                print!("{}", export_table(catalog.get(fam)));
            }
            if !ok {
                return Err(CliError::Numerical("catalog mismatch".into()));
            }
        }
        Cmd::Extract { file, pin, driver } => {
            let inst = load(&file)?;
            let (level, config) = driver_config(&driver, exec)?;
            let r = run(&inst, &level, &config, &backend)?;
            let pinned = pin.unwrap_or(r.value);
            let state: &ModelState = &r.state;
            match extract_rank_one(&inst, pinned, state, &backend, config.seed, config.rank_tol)? {
                Some(x) => {
                    let v = inst
                        .feasible_value(&x)
                        .map_err(|e| CliError::Numerical(e.to_string()))?;
                    println!("bound      {:.5}", pinned);
                    println!("value      {v:.5}");
                    println!("x          {}", fmt_x(x.as_slice()));
                }
                None => {
                    return Err(CliError::Numerical(format!(
                        "no rank-one point found at bound {pinned:.5}"
                    )))
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
