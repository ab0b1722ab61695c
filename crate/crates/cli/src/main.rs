use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;
use wgtransport_core::study::run_study;
use wgtransport_core::{MeshFamily, StudyConfig, WgError};

#[derive(Parser)]
#[command(name = "wgtransport", version, about = "Weak Galerkin transport-reaction solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study (problems 1-3) or the circular-flow study (problem 4).
    Study(StudyArgs),
}

#[derive(clap::Args)]
struct StudyArgs {
    /// Built-in problem id, 1 to 4.
    #[arg(long)]
    problem: usize,
    /// Comma-separated polynomial degrees.
    #[arg(long, default_value = "1,2,3", value_parser = parse_list)]
    degrees: Usizes,
    /// Mesh levels as an inclusive range `a..b` or a list `a,b,c`; level L uses n = 2^L.
    #[arg(long, default_value = "2..5", value_parser = parse_levels)]
    levels: Usizes,
    /// Mesh family: tri, poly or slit. Defaults to tri for problem 1, poly
    /// for problems 2-3 and slit for problem 4.
    #[arg(long)]
    mesh: Option<MeshFamily>,
    /// Seed of the non-compatible mesh generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Quadrature degree; defaults to 2k + 3.
    #[arg(long)]
    quad_degree: Option<usize>,
    /// Also report |||Q_h^+ u - u_h|||.
    #[arg(long)]
    with_plus: bool,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write assembled matrices in MatrixMarket format.
    #[arg(long)]
    dump_matrix: Option<PathBuf>,
    /// Sample u_h on an N x N grid into `<out stem>_field.csv`.
    #[arg(long)]
    sample_grid: Option<usize>,
}

// `Vec<usize>` fields would otherwise be parsed element-wise by clap.
type Usizes = Vec<usize>;

fn parse_list(s: &str) -> Result<Usizes, String> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("'{t}': {e}")))
        .collect()
}

fn parse_levels(s: &str) -> Result<Usizes, String> {
    match s.split_once("..") {
        Some((a, b)) => {
            let a: usize = a.trim().parse().map_err(|e| format!("'{a}': {e}"))?;
            let b: usize = b.trim().parse().map_err(|e| format!("'{b}': {e}"))?;
            if a > b {
                return Err(format!("empty level range {s}"));
            }
            Ok((a..=b).collect())
        }
        None => parse_list(s),
    }
}

fn default_mesh(problem: usize) -> MeshFamily {
    match problem {
        1 => MeshFamily::Tri,
        4 => MeshFamily::Slit,
        _ => MeshFamily::Poly,
    }
}

fn exit_code(e: &WgError) -> u8 {
    let mut inner = e;
    while let WgError::Context { source, .. } = inner {
        inner = source;
    }
    if e.is_solver_failure() {
        3
    } else if matches!(inner, WgError::Io(_)) {
        1
    } else {
        2
    }
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("WGTRANSPORT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("WGTRANSPORT_THREADS must be a positive integer, got '{v}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn study(args: StudyArgs) -> Result<(), WgError> {
    let mut config = StudyConfig::new(
        args.problem,
        args.degrees,
        args.levels,
        args.mesh.unwrap_or_else(|| default_mesh(args.problem)),
    );
    config.seed = args.seed;
    config.quad_degree = args.quad_degree;
    config.with_plus = args.with_plus;
    config.out = args.out;
    config.dump_matrix = args.dump_matrix;
    config.sample_grid = args.sample_grid;
    let output = run_study(&config)?;
    print!("{}", output.table);
    if let Some(out) = &config.out {
        println!("wrote {}", out.display());
    }
    if let Some(p) = &output.field_path {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        error!("{e}");
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::Study(args) => study(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_syntax() {
        assert_eq!(parse_levels("3..6").unwrap(), vec![3, 4, 5, 6]);
        assert_eq!(parse_levels("2,4").unwrap(), vec![2, 4]);
        assert_eq!(parse_levels("5").unwrap(), vec![5]);
        assert!(parse_levels("6..3").is_err());
        assert!(parse_levels("a..3").is_err());
    }

    #[test]
    fn exit_codes_by_error_kind() {
        let solver = WgError::SingularMatrix("zero pivot".into()).context("degree 1, level 2");
        assert_eq!(exit_code(&solver), 3);
        assert_eq!(exit_code(&WgError::InvalidConfig("x".into())), 2);
        assert_eq!(exit_code(&WgError::InvalidMesh("x".into()).context("c")), 2);
        let io = WgError::Io(std::io::Error::other("disk"));
        assert_eq!(exit_code(&io), 1);
    }
}
