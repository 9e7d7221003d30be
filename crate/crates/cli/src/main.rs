use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use packrig::AnalysisTolerances;

mod commands;

#[derive(Parser, Debug)]
#[command(name = "packrig", version, about = "Rigidity analysis of circle packings with sign-constrained radii")]
struct Cli {
    /// Relative singular value cutoff for numerical rank.
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    /// Threshold for linear program margins and infeasibility.
    #[arg(long, global = true)]
    tol_lp: Option<f64>,
    /// Threshold for strict sign decisions on flexes.
    #[arg(long, global = true)]
    tol_strict: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check that a packing file is well formed and tangent.
    Validate { file: PathBuf },
    /// First-order rigidity verdict and flex-space dimensions.
    Analyze { file: PathBuf },
    /// Proper flex cone, extendability and blocking stresses.
    SecondOrder { file: PathBuf },
    /// Minimum-cost maximal independent radius set.
    Matroid {
        file: PathBuf,
        /// Lines `<id> <cost>`; vertices not listed cost 1.
        #[arg(long)]
        cost: Option<PathBuf>,
    },
    /// Packing of a triangulated disk from its boundary radii.
    Layout {
        graph: PathBuf,
        /// `id:r,id:r,...` for every boundary vertex, or one radius for all.
        #[arg(long)]
        boundary: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Writes a built-in instance as a packing file.
    Case {
        name: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Draws the packing as SVG.
    ExportSvg {
        file: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Stress to label on the edges.
        #[arg(long, value_enum, default_value_t = StressChoice::None)]
        stress: StressChoice,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum StressChoice {
    None,
    /// The stress certifying first-order rigidity, if any.
    FirstOrder,
    /// The stress blocking the first analyzed flex direction, if any.
    Blocking,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let mut tol = AnalysisTolerances::default();
    if let Some(x) = cli.tol_rank {
        tol.rank = x;
    }
    if let Some(x) = cli.tol_lp {
        tol.lp = x;
    }
    if let Some(x) = cli.tol_strict {
        tol.strict = x;
    }
    let result = match &cli.command {
        Command::Validate { file } => commands::validate(file, &tol),
        Command::Analyze { file } => commands::analyze(file, &tol),
        Command::SecondOrder { file } => commands::second_order(file, &tol),
        Command::Matroid { file, cost } => commands::matroid(file, cost.as_deref(), &tol),
        Command::Layout { graph, boundary, output } => {
            commands::layout(graph, boundary, output.as_deref())
        }
        Command::Case { name, output } => commands::case(name, output.as_deref()),
        Command::ExportSvg { file, output, stress } => {
            commands::export_svg(file, output, *stress, &tol)
        }
    };
    match result {
        Ok(outcome) => {
            print!("{}", outcome.report);
            ExitCode::from(outcome.code)
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
