use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gdfif::pipeline::{cmd_eval, cmd_render, cmd_run, cmd_validate, Overrides, EXIT_OK, EXIT_STRUCTURAL};
use gdfif_core::WidthCheckMode;

/// Environment variable naming the output directory. A `--out-dir` flag
/// takes precedence; the config value is the fallback.
const OUT_DIR_ENV: &str = "GDFIF_OUT_DIR";

#[derive(Parser)]
#[command(name = "gdfif", version, about = "Graph-directed fractal interpolation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the data sets and wiring without solving anything.
    Validate(Common),
    /// Solve, iterate the attractor and write every configured output.
    Run(Common),
    /// Evaluate one interpolant at one abscissa by recursion.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Vertex number, starting at 1.
        #[arg(long)]
        vertex: usize,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, default_value_t = 30)]
        depth: usize,
    },
    /// Write only the SVG and PGM plots.
    Render(Common),
}

#[derive(Args)]
struct Common {
    config: PathBuf,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    dedup: Option<f64>,
    #[arg(long)]
    chaos_points: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// `all-pairs` or `used-edges`.
    #[arg(long, value_parser = parse_mode)]
    width_check: Option<WidthCheckMode>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<WidthCheckMode, String> {
    WidthCheckMode::parse(s).ok_or_else(|| format!("expected `all-pairs` or `used-edges`, got {s:?}"))
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            resolution: self.resolution,
            tol: self.tol,
            max_iters: self.max_iters,
            generations: self.generations,
            dedup: self.dedup,
            chaos_points: self.chaos_points,
            burn_in: self.burn_in,
            seed: self.seed,
            width_check: self.width_check,
            out_dir: self
                .out_dir
                .clone()
                .or_else(|| std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_STRUCTURAL } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let out = match &cli.command {
        Command::Validate(c) => cmd_validate(&c.config, &c.overrides()),
        Command::Run(c) => cmd_run(&c.config, &c.overrides()),
        Command::Render(c) => cmd_render(&c.config, &c.overrides()),
        Command::Eval { common, vertex, x, depth } => cmd_eval(&common.config, &common.overrides(), *vertex, *x, *depth),
    };
    let text = serde_json::to_string_pretty(&out.json).expect("JSON output serializes");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    if let Some(msg) = out.json.get("message").and_then(|m| m.as_str()) {
        eprintln!("error: {msg}");
    }
    ExitCode::from(out.code as u8)
}
