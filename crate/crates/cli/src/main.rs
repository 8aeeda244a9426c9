mod input;

use std::io::Write;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use tilecert_core::classify::verify_range;
use tilecert_core::interp::{degree_for_size, diagram_degree_specialty, specialty_test};
use tilecert_core::render;
use tilecert_core::rng::GENERATOR;
use tilecert_core::stability::{enumerate_stable, DEFAULT_BOX};
use tilecert_core::tiler::{check_certificate, find_certified_tiling};
use tilecert_core::tiling::{extendable, uniqueness_bruteforce, StabilityCache, ORACLE_MAX_CELLS};
use tilecert_core::{
    is_stable, Axis, Diagram, EvalConfig, Mode, PrimeField, SearchOutcome, SystemSpec,
    TilingProblem,
};

use input::{parse_box, parse_mults, read_diagram, read_tiling, TargetKind};

#[derive(Parser, Debug)]
#[command(
    name = "tilecert",
    version,
    about = "Specialty of linear systems on P1xP1 and unique-tiling certificates"
)]
struct Cli {
    /// Prime modulus for randomized rank tests.
    #[arg(long, global = true, default_value_t = 2_147_483_647)]
    prime: u64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Independent random evaluations per rank test.
    #[arg(long, global = true, default_value_t = 3)]
    trials: u32,
    #[arg(long, global = true, value_enum, default_value_t = Output::Json)]
    output: Output,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Single search attempt in canonical placement order.
    #[arg(long, global = true)]
    canonical: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Diagram measurements.
    #[command(subcommand)]
    Diagram(DiagramCmd),
    /// Linear systems L_D(m_1, ..., m_r).
    #[command(subcommand)]
    System(SystemCmd),
    /// Stable diagrams.
    #[command(subcommand)]
    Stable(StableCmd),
    /// Tilings and certificates.
    #[command(subcommand)]
    Tiling(TilingCmd),
    /// The classification predicate against rank tests.
    #[command(subcommand)]
    Classify(ClassifyCmd),
    /// Draws a tiling or diagram.
    Render {
        /// Tiling JSON, certificate or search output, ASCII tiling, or diagram file.
        file: String,
        #[arg(long, value_enum, default_value_t = Format::Ascii)]
        format: Format,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Ascii,
    Svg,
}

#[derive(Subcommand, Debug)]
enum DiagramCmd {
    /// Center of mass, inertia, boundary distributions and canonical form.
    Stats {
        /// Diagram file, or `RECT WxH` for a W by H block of cells.
        diagram: String,
    },
}

/// Diagram of a system: a file, or `--rect dxe` for bidegree (d, e).
#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct SystemDiagram {
    /// Diagram file, or `RECT dxe` for bidegree (d, e).
    #[arg(long)]
    diagram: Option<String>,
    /// Bidegree `dxe`: the (d+1) x (e+1) block of monomials.
    #[arg(long)]
    rect: Option<String>,
}

impl SystemDiagram {
    fn read(&self) -> Result<Diagram> {
        match (&self.diagram, &self.rect) {
            (Some(d), _) => read_diagram(d, TargetKind::Bidegree),
            (_, Some(r)) => {
                let (d, e) = parse_box(r)?;
                Ok(Diagram::bidegree(d, e))
            }
            _ => unreachable!("clap requires one"),
        }
    }
}

#[derive(Subcommand, Debug)]
enum SystemCmd {
    /// Expected projective dimension.
    Edim {
        #[command(flatten)]
        diagram: SystemDiagram,
        /// Comma-separated multiplicities.
        #[arg(long)]
        mults: String,
    },
    /// Randomized rank test.
    Check {
        #[command(flatten)]
        diagram: SystemDiagram,
        #[arg(long)]
        mults: String,
    },
}

#[derive(Subcommand, Debug)]
enum StableCmd {
    /// Every stable diagram of a size in a box, up to isometry.
    Enum {
        #[arg(long)]
        size: usize,
        /// Search box `WxH` (default 6x6).
        #[arg(long = "box")]
        bbox: Option<String>,
    },
    Check {
        /// Diagram file.
        #[arg(long)]
        diagram: String,
    },
}

#[derive(Subcommand, Debug)]
enum TilingCmd {
    /// Stability, order extendability and uniqueness of a tiling.
    Verify {
        /// Tiling JSON, certificate or search output, or ASCII tiling.
        file: String,
        /// Also run the brute-force uniqueness oracle (unions of at most 16 cells).
        #[arg(long)]
        oracle: bool,
    },
    /// Searches for a certificate of non-specialty.
    Find {
        /// Target file, or `RECT WxH` for a W by H block of cells.
        #[arg(long)]
        target: String,
        #[arg(long)]
        mults: String,
        /// exact, subset, superset, or auto (chosen from the cell counts).
        #[arg(long, default_value = "auto")]
        mode: String,
        #[arg(long, default_value_t = tilecert_core::tiler::DEFAULT_BUDGET)]
        budget: u64,
    },
}

#[derive(Subcommand, Debug)]
enum ClassifyCmd {
    /// Compares the predicate with rank verdicts on every case in range.
    Verify {
        #[arg(long)]
        max_e: u32,
        #[arg(long, default_value_t = 6)]
        slack: u32,
    },
}

#[derive(Serialize)]
struct Meta {
    version: &'static str,
    prime: u64,
    seed: u64,
    trials: u32,
    generator: &'static str,
}

/// What a command produced: JSON body, text rendering and exit status.
struct Report {
    body: Value,
    text: String,
    status: u8,
}

impl Report {
    fn ok(body: impl Serialize, text: String) -> Result<Report> {
        Ok(Report {
            body: serde_json::to_value(body)?,
            text,
            status: 0,
        })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(status) => ExitCode::from(status),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    if let Some(n) = cli.workers {
        if n == 0 {
            bail!("--workers must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("starting worker pool")?;
    }
    let field = PrimeField::new(cli.prime).map_err(|e| anyhow::anyhow!("--prime: {e}"))?;
    if cli.trials == 0 {
        bail!("--trials must be positive");
    }
    let config = EvalConfig {
        field,
        seed: cli.seed,
        trials: cli.trials,
    };
    if let Command::Render { file, format } = &cli.command {
        let text = render_file(file, *format)?;
        std::io::stdout().write_all(text.as_bytes())?;
        return Ok(0);
    }
    let report = dispatch(cli, &config)?;
    let mut out = std::io::stdout().lock();
    match cli.output {
        Output::Json => {
            let meta = Meta {
                version: env!("CARGO_PKG_VERSION"),
                prime: cli.prime,
                seed: cli.seed,
                trials: cli.trials,
                generator: GENERATOR,
            };
            let mut doc = serde_json::to_value(meta)?;
            match report.body {
                Value::Object(fields) => doc.as_object_mut().unwrap().extend(fields),
                other => {
                    doc["result"] = other;
                }
            }
            writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
        Output::Text => write!(out, "{}", report.text)?,
    }
    Ok(report.status)
}

fn dispatch(cli: &Cli, config: &EvalConfig) -> Result<Report> {
    match &cli.command {
        Command::Diagram(DiagramCmd::Stats { diagram }) => {
            diagram_stats(&read_diagram(diagram, TargetKind::Cells)?)
        }
        Command::System(SystemCmd::Edim { diagram, mults }) => {
            let spec = SystemSpec::new(diagram.read()?, parse_mults(mults)?);
            let edim = spec.expected_dimension();
            Report::ok(
                json!({"edim": edim, "rows": spec.row_count(), "cols": spec.col_count()}),
                format!("{edim}\n"),
            )
        }
        Command::System(SystemCmd::Check { diagram, mults }) => {
            let spec = SystemSpec::new(diagram.read()?, parse_mults(mults)?);
            let v = specialty_test(&spec, config)?;
            let text = format!(
                "{:?}: rank {} of {}x{}, edim {}{}\n",
                v.kind,
                v.rank,
                v.rows,
                v.cols,
                v.edim,
                v.confidence
                    .map(|c| format!(", error bound {c:.1e}"))
                    .unwrap_or_default()
            );
            Report::ok(v, text)
        }
        Command::Stable(StableCmd::Enum { size, bbox }) => {
            let bbox = match bbox {
                Some(b) => parse_box(b)?,
                None => DEFAULT_BOX,
            };
            let catalog = enumerate_stable(*size, bbox)?;
            let pictures: Vec<String> = catalog.members.iter().map(render::diagram_ascii).collect();
            let text = format!(
                "{} stable diagrams of size {}\n\n{}",
                catalog.members.len(),
                size,
                pictures.join("\n")
            );
            let mut body = serde_json::to_value(&catalog)?;
            body["ascii"] = json!(pictures);
            Report::ok(body, text)
        }
        Command::Stable(StableCmd::Check { diagram }) => {
            let report = is_stable(&read_diagram(diagram, TargetKind::Cells)?)?;
            let text = match (&report.failure, &report.witness) {
                (None, _) => "stable\n".to_string(),
                (Some(f), Some(w)) => format!("not stable ({f:?}), witness {w}\n"),
                (Some(f), None) => format!("not stable ({f:?})\n"),
            };
            Report::ok(report, text)
        }
        Command::Tiling(TilingCmd::Verify { file, oracle }) => tiling_verify(file, *oracle),
        Command::Tiling(TilingCmd::Find {
            target,
            mults,
            mode,
            budget,
        }) => {
            let target = read_diagram(target, TargetKind::Cells)?;
            let mults = parse_mults(mults)?;
            let mut problem = if mode == "auto" {
                TilingProblem::auto(target, mults)?
            } else {
                let mode: Mode = mode.parse().map_err(anyhow::Error::msg)?;
                TilingProblem::new(target, mults, mode)?
            };
            problem.budget = *budget;
            problem.seed = cli.seed;
            if cli.canonical {
                problem.restart_nodes = 0;
            }
            let outcome = find_certified_tiling(&problem)?;
            let (text, status) = match &outcome {
                SearchOutcome::Found {
                    certificate,
                    explored,
                } => (
                    format!(
                        "found ({} mode, {explored} nodes)\n{}",
                        certificate.mode,
                        render::tiling_ascii(&certificate.tiling)?
                    ),
                    0,
                ),
                SearchOutcome::NotFound {
                    explored,
                    exhausted,
                } => (
                    format!(
                        "not found after {explored} nodes ({})\n",
                        if *exhausted {
                            "search exhausted"
                        } else {
                            "budget reached"
                        }
                    ),
                    1,
                ),
            };
            let mut report = Report::ok(&outcome, text)?;
            report.status = status;
            Ok(report)
        }
        Command::Classify(ClassifyCmd::Verify { max_e, slack }) => {
            let report = verify_range(*max_e, *slack, config.seed, config.trials, config.field)?;
            let mut text = format!(
                "{} cases, {} special, {} discrepancies, worst error bound {:.1e}\n",
                report.cases_checked,
                report.special_agreed.len(),
                report.discrepancies.len(),
                report.worst_special_error_bound
            );
            for d in &report.discrepancies {
                text += &format!(
                    "  {} predicted special {} observed special {} (rank {} of {}x{}, seed {})\n",
                    d.case,
                    d.predicted_special,
                    d.observed_special,
                    d.rank,
                    d.rows,
                    d.cols,
                    d.case_seed
                );
            }
            let status = u8::from(!report.discrepancies.is_empty());
            let mut out = Report::ok(&report, text)?;
            out.status = status;
            Ok(out)
        }
        Command::Render { .. } => unreachable!("handled before dispatch"),
    }
}

fn diagram_stats(d: &Diagram) -> Result<Report> {
    let (cx, cy) = d.center_of_mass();
    let degree = degree_for_size(d.len());
    let special = match degree {
        Some(m) => Some(diagram_degree_specialty(d, m)?),
        None => None,
    };
    let body = json!({
        "points": d.len(),
        "center_of_mass": [cx.to_string(), cy.to_string()],
        "inertia": d.inertia().to_string(),
        "boundary_distribution": {
            "x": d.boundary_distribution(Axis::X),
            "y": d.boundary_distribution(Axis::Y),
        },
        "sections_are_segments": d.sections_are_segments(),
        "column_projection_is_segment": d.column_projection_is_segment(),
        "canonical_form": d.canonical_form(),
        "degree": degree,
        "special": special,
    });
    let mut text = format!(
        "points {}\ncenter of mass ({cx}, {cy})\ninertia {}\n",
        d.len(),
        d.inertia()
    );
    if let (Some(m), Some(s)) = (degree, special) {
        text += &format!(
            "degree {m}, {}\n",
            if s { "special" } else { "non-special" }
        );
    }
    text += &render::diagram_ascii(d);
    Report::ok(body, text)
}

fn tiling_verify(file: &str, oracle: bool) -> Result<Report> {
    let (tiling, certificate) = read_tiling(file)?;
    let mut cache = StabilityCache::new();
    let stable = tiling
        .tiles()
        .iter()
        .map(|t| cache.is_stable(t))
        .collect::<Result<Vec<_>, _>>()?;
    let order = extendable(&tiling)?;
    let sufficient = stable.iter().all(|&s| s) && order;
    let brute = if oracle {
        if tiling.cell_count() > ORACLE_MAX_CELLS {
            bail!(
                "the oracle handles at most {ORACLE_MAX_CELLS} cells, this tiling covers {}",
                tiling.cell_count()
            );
        }
        Some(uniqueness_bruteforce(&tiling)?)
    } else {
        None
    };
    let checks = match &certificate {
        Some(c) => Some(check_certificate(
            &c.target,
            &c.multiplicities,
            c.mode,
            &tiling,
            &mut cache,
        )?),
        None => None,
    };
    let unique = brute.unwrap_or(sufficient);
    let ok = unique && checks.is_none_or(|c| c.all());
    let mut text = format!(
        "{}unique: {unique} ({})\nstable tiles: {}/{}\norder extendable: {order}\n",
        render::tiling_ascii(&tiling)?,
        if brute.is_some() {
            "oracle"
        } else {
            "sufficiency"
        },
        stable.iter().filter(|&&s| s).count(),
        stable.len()
    );
    if let Some(c) = &checks {
        text += &format!(
            "certificate checks: {}\n",
            if c.all() { "pass" } else { "fail" }
        );
    }
    let mut report = Report::ok(
        json!({
            "tiling": tiling,
            "unique": unique,
            "method": if brute.is_some() { "oracle" } else { "sufficiency" },
            "sufficient": sufficient,
            "oracle": brute,
            "stable": stable,
            "order_extendable": order,
            "certificate_checks": checks,
        }),
        text,
    )?;
    report.status = u8::from(!ok);
    Ok(report)
}

fn render_file(file: &str, format: Format) -> Result<String> {
    let tiling = read_tiling(file).map(|(t, _)| t);
    Ok(match (tiling, format) {
        (Ok(t), Format::Ascii) => render::tiling_ascii(&t)?,
        (Ok(t), Format::Svg) => render::tiling_svg(&t),
        (Err(tiling_err), format) => {
            let d = read_diagram(file, TargetKind::Cells)
                .map_err(|_| tiling_err.context("not a tiling or a diagram"))?;
            match format {
                Format::Ascii => render::diagram_ascii(&d),
                Format::Svg => render::diagram_svg(&d),
            }
        }
    })
}
