use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use springer_core::exactlinalg::{jordan_block, jordan_form, Matrix, PrimeField};
use springer_core::harness::{run_campaign, CampaignConfig, Status};
use springer_core::partitions::{induced_partition_oracle, mu_sigma, LeviDatum, Partition};
use springer_core::springer::{
    build_representative, enumerate_fibre, FibreOptions, DEFAULT_FLAG_CEILING,
};
use springer_core::tableaux::{enumerate_standard, stack, StandardTableau};

#[derive(Parser)]
#[command(
    name = "springer",
    version,
    about = "Stack standard tableaux and enumerate Springer fibres over F_p"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Stack one tableau per block into a tableau of the induced shape.
    Stack {
        /// Block partitions, e.g. "3,3;2,2,1;1,1,1,1".
        #[arg(long)]
        levi: String,
        /// Levi composition, e.g. "6,5,4"; defaults to the block weights.
        #[arg(long)]
        lambda: Option<String>,
        /// JSON file holding a list of tableaux (lists of rows); "-" reads stdin.
        #[arg(long)]
        tableaux: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// The induced partition of a Levi datum, cross-checked by an independent route.
    Induce {
        #[arg(long)]
        levi: String,
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// All standard tableaux of a shape, in ascending order.
    Enumerate {
        #[arg(long)]
        shape: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Enumerate the Springer fibre of a nilpotent matrix over F_p and split it by tableau.
    EnumerateFibre {
        /// zero, regular, jordan (needs --shape), rep (needs --levi) or a path to a matrix JSON file.
        #[arg(long)]
        e: String,
        /// Dimension for --e zero|regular.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long)]
        shape: Option<String>,
        #[arg(long)]
        levi: Option<String>,
        #[arg(long)]
        lambda: Option<String>,
        /// Maximum number of flags to visit.
        #[arg(long, env = "SPRINGER_FLAG_CEILING", default_value_t = DEFAULT_FLAG_CEILING)]
        ceiling: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Validate and display one tableau.
    Render {
        /// Rows separated by ";", entries by ",", e.g. "1,3,5;2,4".
        #[arg(long, conflicts_with = "file")]
        rows: Option<String>,
        /// JSON file with a tableau (list of rows, or an object with a "tableau" field).
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run a verification campaign and write a JSON report.
    Verify {
        #[arg(long, default_value_t = 5)]
        max_n: usize,
        /// Comma-separated primes.
        #[arg(long, default_value = "2")]
        p: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated claim ids; all claims when omitted.
        #[arg(long)]
        claims: Option<String>,
        #[arg(long, default_value_t = 1000)]
        random_cases: usize,
        #[arg(long, env = "SPRINGER_FLAG_CEILING", default_value_t = DEFAULT_FLAG_CEILING)]
        ceiling: u64,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Stack {
            levi,
            lambda,
            tableaux,
            format,
        } => {
            let d = parse_levi(&levi, lambda.as_deref())?;
            let value = read_json(&tableaux)?;
            let list = value
                .as_array()
                .ok_or_else(|| anyhow!("expected a JSON list of tableaux"))?;
            let tuple = list
                .iter()
                .enumerate()
                .map(|(i, t)| tableau_from_value(t).with_context(|| format!("tableau {}", i + 1)))
                .collect::<Result<Vec<_>>>()?;
            let out = stack(&d, &tuple)?;
            match format {
                Format::Json => print_json(&json!({ "levi": levi_json(&d), "tableau": out })),
                Format::Text => println!("{}", out.render()),
            }
        }
        Command::Induce {
            levi,
            lambda,
            format,
        } => {
            let d = parse_levi(&levi, lambda.as_deref())?;
            let induced = mu_sigma(&d);
            let oracle = induced_partition_oracle(&d);
            let agree = induced == oracle;
            match format {
                Format::Json => print_json(&json!({
                    "levi": levi_json(&d),
                    "mu_sigma": induced,
                    "oracle": oracle,
                    "oracle_agrees": agree,
                })),
                Format::Text => {
                    println!("mu_sigma = {induced}");
                    println!(
                        "oracle = {}",
                        if agree {
                            "agree".to_string()
                        } else {
                            format!("DISAGREE {oracle}")
                        }
                    );
                }
            }
            if !agree {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Enumerate { shape, format } => {
            let shape = Partition::parse(&shape)?;
            let all = enumerate_standard(&shape)?;
            match format {
                Format::Json => {
                    print_json(&json!({ "shape": shape, "count": all.len(), "tableaux": all }))
                }
                Format::Text => {
                    let blocks: Vec<String> = all
                        .iter()
                        .enumerate()
                        .map(|(i, t)| format!("#{}\n{}", i + 1, t.render()))
                        .collect();
                    println!("{}", blocks.join("\n\n"));
                }
            }
        }
        Command::EnumerateFibre {
            e,
            n,
            p,
            shape,
            levi,
            lambda,
            ceiling,
            format,
        } => {
            let field = PrimeField::new(p)?;
            let matrix = nilpotent_argument(
                &e,
                n,
                field,
                shape.as_deref(),
                levi.as_deref(),
                lambda.as_deref(),
            )?;
            let opts = FibreOptions {
                ceiling,
                ..Default::default()
            };
            let fibre = enumerate_fibre(&matrix, &opts)?;
            match format {
                Format::Json => print_json(&serde_json::to_value(&fibre)?),
                Format::Text => {
                    println!(
                        "shape {} over F_{}: {} flags",
                        fibre.shape, fibre.p, fibre.total_flags
                    );
                    for class in &fibre.classes {
                        println!("{}\t{}", class.count, inline_rows(&class.tableau));
                    }
                }
            }
        }
        Command::Render { rows, file, format } => {
            let tableau = match (rows, file) {
                (Some(rows), _) => StandardTableau::new(parse_rows(&rows)?)?,
                (None, Some(file)) => tableau_from_value(&read_json(&file)?)?,
                (None, None) => bail!("give --rows or --file"),
            };
            match format {
                Format::Json => print_json(&json!({
                    "shape": tableau.shape(),
                    "tableau": tableau,
                    "column_word": tableau.column_word(),
                })),
                Format::Text => println!("{}", tableau.render()),
            }
        }
        Command::Verify {
            max_n,
            p,
            seed,
            claims,
            random_cases,
            ceiling,
            out,
            format,
        } => {
            let primes = p
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<u32>()
                        .with_context(|| format!("bad prime {s:?}"))
                })
                .collect::<Result<Vec<_>>>()?;
            let claims = claims
                .map(|c| c.split(',').map(|s| s.trim().to_string()).collect())
                .unwrap_or_default();
            let cfg = CampaignConfig {
                max_n,
                primes,
                seed,
                claims,
                random_cases,
                ceiling,
                ..Default::default()
            };
            let report = run_campaign(&cfg)?;
            let text = serde_json::to_string_pretty(&report)?;
            if let Some(path) = &out {
                fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
            }
            match format {
                Format::Json if out.is_none() => println!("{text}"),
                _ => {
                    for c in &report.claims {
                        let status = serde_json::to_value(c.status)?;
                        println!(
                            "{}\t{}\t{} instances\t{} aborted",
                            c.id,
                            status.as_str().unwrap_or_default(),
                            c.instances,
                            c.aborted
                        );
                    }
                    println!(
                        "{} passed, {} failed, {} out of scope",
                        report.passed, report.failed, report.out_of_scope
                    );
                }
            }
            if report.claims.iter().any(|c| c.status == Status::Fail) {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_levi(levi: &str, lambda: Option<&str>) -> Result<LeviDatum> {
    LeviDatum::parse(levi, lambda).with_context(|| format!("invalid Levi datum {levi:?}"))
}

fn levi_json(d: &LeviDatum) -> Value {
    json!({ "lambda": d.levi_shape().parts(), "blocks": d.blocks() })
}

fn parse_rows(rows: &str) -> Result<Vec<Vec<usize>>> {
    rows.split(';')
        .map(|row| {
            row.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<usize>()
                        .with_context(|| format!("bad entry {x:?}"))
                })
                .collect()
        })
        .collect()
}

fn inline_rows(t: &StandardTableau) -> String {
    t.rows()
        .iter()
        .map(|r| r.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join(";")
}

fn read_json(path: &Path) -> Result<Value> {
    let text = if path == Path::new("-") {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        buf
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    };
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Accepts a bare list of rows or an object carrying one under "tableau".
fn tableau_from_value(value: &Value) -> Result<StandardTableau> {
    let rows = value.get("tableau").unwrap_or(value);
    let rows: Vec<Vec<usize>> =
        serde_json::from_value(rows.clone()).context("expected a list of rows")?;
    Ok(StandardTableau::new(rows)?)
}

fn nilpotent_argument(
    e: &str,
    n: Option<usize>,
    field: PrimeField,
    shape: Option<&str>,
    levi: Option<&str>,
    lambda: Option<&str>,
) -> Result<Matrix> {
    let need_n = || n.ok_or_else(|| anyhow!("--e {e} needs --n"));
    Ok(match e {
        "zero" => Matrix::zeros(field, need_n()?, need_n()?),
        "regular" => jordan_block(field, need_n()?),
        "jordan" => {
            let shape = shape.ok_or_else(|| anyhow!("--e jordan needs --shape"))?;
            jordan_form(field, &Partition::parse(shape)?)
        }
        "rep" => {
            let levi = levi.ok_or_else(|| anyhow!("--e rep needs --levi"))?;
            build_representative(&parse_levi(levi, lambda)?, field)
                .e()
                .clone()
        }
        path => {
            let m: Matrix = serde_json::from_value(read_json(Path::new(path))?)
                .with_context(|| format!("{path} is not a matrix"))?;
            if m.field() != field {
                bail!(
                    "matrix is over F_{}, but --p is {}",
                    m.field().characteristic(),
                    field.characteristic()
                );
            }
            m
        }
    })
}

fn print_json(value: &Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("serializable")
    );
}
