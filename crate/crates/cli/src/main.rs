//! `fvlim`: benchmark CLI for the slope-limited finite volume solvers.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fvlim_cli::{
    resolve_out_dir, write_convergence_csv, write_run_outputs, write_stability_csv,
    write_timing_csv, write_violation_csv, CliError, ConfigDoc, Result, RunManifest,
};
use fvlim_core::bench::{
    run_convergence_table, run_problem, run_timing, run_violation_table, ExperimentPlan, Problem,
};
use fvlim_core::mesh::Dim;
use fvlim_core::solver::SchemeName;
use fvlim_core::stencil::{
    gauss_legendre_rule, gauss_lobatto_rule, left_face_stencil, midpoint_stencil,
    transverse_integral_stencil, Stencil,
};
use fvlim_core::timestepping::ButcherTableau;

#[derive(Parser)]
#[command(
    name = "fvlim",
    version,
    about = "High-order finite volume advection benchmarks with a priori and a posteriori slope limiters"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory (default: $FVLIM_OUT_DIR or ./out)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for experiment batches
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Advance a single configured scheme and write report + snapshots.
    Run {
        /// Key=value configuration file
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated times at which to store field snapshots
        #[arg(long, value_name = "T1,T2,...")]
        snapshot_times: Option<String>,
    },
    /// Smooth-sine convergence table (both flux reconstructions).
    Convergence {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Maximum-principle violation table for the scheme matrix.
    Violations {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Throughput table of the timing harness.
    Timing {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Eigenvalue tracks and stability-function samples as CSV.
    Stability {
        /// Samples over k in [0, pi]
        #[arg(long, default_value_t = 512)]
        samples: usize,
    },
    /// Print reconstruction stencils as exact fractions.
    DumpStencils {
        /// Degrees to dump (default 0..=7)
        #[arg(long, value_name = "P1,P2,...")]
        p: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("fvlim: could not configure {threads} threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    let out_dir = resolve_out_dir(cli.out.clone());
    match dispatch(cli.command, out_dir) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fvlim: {e}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(path: Option<&PathBuf>) -> Result<Option<ConfigDoc>> {
    match path {
        None => Ok(None),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            Ok(Some(ConfigDoc::parse(&text)?))
        }
    }
}

fn dispatch(command: Command, out_dir: PathBuf) -> Result<()> {
    std::fs::create_dir_all(&out_dir)?;
    match command {
        Command::Run {
            config,
            snapshot_times,
        } => cmd_run(&config, snapshot_times, &out_dir),
        Command::Convergence { config } => cmd_convergence(load_config(config.as_ref())?, &out_dir),
        Command::Violations { config } => cmd_violations(load_config(config.as_ref())?, &out_dir),
        Command::Timing { config } => cmd_timing(load_config(config.as_ref())?, &out_dir),
        Command::Stability { samples } => cmd_stability(samples, &out_dir),
        Command::DumpStencils { p } => cmd_dump_stencils(p),
    }
}

fn parse_times(spec: Option<String>) -> Result<Vec<f64>> {
    let Some(spec) = spec else {
        return Ok(Vec::new());
    };
    spec.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("bad snapshot time `{t}`")))
        })
        .collect()
}

fn cmd_run(config: &PathBuf, snapshot_times: Option<String>, out_dir: &PathBuf) -> Result<()> {
    let text = std::fs::read_to_string(config)?;
    let doc = ConfigDoc::parse(&text)?;
    doc.validate_schemes()?;
    if !doc.is_single_run() {
        return Err(CliError::Config(
            "`run` expects a single-valued configuration; use the table subcommands for sweeps"
                .into(),
        ));
    }
    let problem = doc
        .problem
        .ok_or_else(|| CliError::Config("missing required key: problem".into()))?;
    let n = *doc
        .resolutions
        .first()
        .ok_or_else(|| CliError::Config("missing required key: N".into()))?;
    let t_end = doc
        .t_end
        .ok_or_else(|| CliError::Config("missing required key: t_end".into()))?;
    let tableau = doc
        .tableaus()?
        .into_iter()
        .next()
        .ok_or_else(|| CliError::Config("missing required key: integrator".into()))?;
    let cfg = doc.scheme_config(doc.schemes[0], doc.degrees[0], &tableau)?;
    for w in cfg.warnings() {
        eprintln!("fvlim: warning: {w}");
    }
    let snapshot_times = parse_times(snapshot_times)?;

    let mut manifest = RunManifest::new(doc.render());
    let (report, snapshots, final_state) =
        run_problem(problem, cfg, n, t_end, snapshot_times)?;
    let tag = format!(
        "{}_{}_p{}_{}_N{}",
        problem.name(),
        report.scheme,
        report.p,
        report.integrator,
        n
    );
    for path in write_run_outputs(out_dir, &tag, &report, &snapshots, &final_state)? {
        manifest.record(&path);
    }
    println!(
        "{tag}: steps={} retries={} delta={:.3e} mass drift={:.3e}{}",
        report.steps,
        report.retries,
        report.delta,
        (report.mass_final - report.mass_initial).abs(),
        report
            .e1
            .map(|e| format!(" E1={e:.4e}"))
            .unwrap_or_default()
    );
    manifest.write(out_dir)?;
    Ok(())
}

fn cmd_convergence(doc: Option<ConfigDoc>, out_dir: &PathBuf) -> Result<()> {
    let doc = doc.unwrap_or_default();
    let plan = ExperimentPlan {
        problem: doc.problem.unwrap_or(Problem::Sine2d),
        schemes: vec![],
        degrees: if doc.degrees.is_empty() {
            (0..=4).collect()
        } else {
            doc.degrees.clone()
        },
        integrators: vec![],
        resolutions: if doc.resolutions.is_empty() {
            vec![32, 64, 128]
        } else {
            doc.resolutions.clone()
        },
        t_end: doc.t_end.unwrap_or(1.0),
    };
    let mut manifest = RunManifest::new(doc.render());
    let rows = run_convergence_table(&plan)?;
    println!("p  integrator  N    C      E1(GL)      EOC     E1(T)       EOC");
    for r in &rows {
        println!(
            "{:<2} {:<10} {:<4} {:<6.2} {:<11.3e} {:<7} {:<11.3e} {:<7}",
            r.p,
            r.integrator,
            r.n,
            r.cfl,
            r.e1_gauss_legendre,
            r.eoc_gauss_legendre
                .map(|e| format!("{e:.3}"))
                .unwrap_or_else(|| "---".into()),
            r.e1_transverse,
            r.eoc_transverse
                .map(|e| format!("{e:.3}"))
                .unwrap_or_else(|| "---".into()),
        );
    }
    let path = out_dir.join("convergence.csv");
    write_convergence_csv(&rows, &path)?;
    manifest.record(&path);
    manifest.write(out_dir)?;
    Ok(())
}

fn default_violation_schemes(dim: Dim) -> Vec<SchemeName> {
    match dim {
        Dim::One => vec![
            SchemeName::APrioriMpp,
            SchemeName::APosteriori,
            SchemeName::APosterioriB,
        ],
        Dim::Two => vec![
            SchemeName::APrioriMpp,
            SchemeName::APrioriT,
            SchemeName::APosteriori,
            SchemeName::APosterioriB,
        ],
    }
}

fn cmd_violations(doc: Option<ConfigDoc>, out_dir: &PathBuf) -> Result<()> {
    let doc = doc.unwrap_or_default();
    let problem = doc.problem.unwrap_or(Problem::Composite1d);
    let schemes = if doc.schemes.is_empty() {
        default_violation_schemes(problem.dim())
    } else {
        doc.schemes.clone()
    };
    let n = doc.resolutions.first().copied().unwrap_or(match problem.dim() {
        Dim::One => 256,
        Dim::Two => 64,
    });
    let mut manifest = RunManifest::new(doc.render());
    let mut all_rows = Vec::new();
    for scheme in schemes {
        let plan = ExperimentPlan {
            problem,
            schemes: vec![scheme],
            degrees: if doc.degrees.is_empty() {
                (1..=7).collect()
            } else {
                doc.degrees.clone()
            },
            integrators: doc.integrators.clone(),
            resolutions: vec![n],
            t_end: doc.t_end.unwrap_or(problem.period()),
        };
        all_rows.extend(run_violation_table(&plan)?);
    }
    all_rows.sort_by_key(|r| (r.p, r.integrator, r.scheme));
    println!("problem: {} at N = {n}", problem.name());
    println!("p  integrator  scheme         delta        approximately MPP");
    for r in &all_rows {
        println!(
            "{:<2} {:<10} {:<14} {:<12.3e} {}",
            r.p,
            r.integrator,
            r.scheme,
            r.report.delta,
            if r.passes_mpp() { "yes" } else { "no" }
        );
    }
    let path = out_dir.join(format!("violations_{}.csv", problem.name()));
    write_violation_csv(&all_rows, &path)?;
    manifest.record(&path);
    manifest.write(out_dir)?;
    Ok(())
}

fn cmd_timing(doc: Option<ConfigDoc>, out_dir: &PathBuf) -> Result<()> {
    let doc = doc.unwrap_or_default();
    let plan = ExperimentPlan {
        problem: doc.problem.unwrap_or(Problem::Square2d),
        schemes: doc.schemes.clone(),
        degrees: if doc.degrees.is_empty() {
            vec![3, 7]
        } else {
            doc.degrees.clone()
        },
        integrators: vec![],
        resolutions: if doc.resolutions.is_empty() {
            vec![64, 256]
        } else {
            doc.resolutions.clone()
        },
        t_end: 0.0,
    };
    let mut manifest = RunManifest::new(doc.render());
    let rows = run_timing(&plan)?;
    println!("scheme         p  N     integrator  cell-stages/s");
    for r in &rows {
        println!(
            "{:<14} {:<2} {:<5} {:<10} {:.3e}",
            r.scheme, r.p, r.n, r.integrator, r.cells_per_stage_per_second
        );
    }
    let path = out_dir.join("timing.csv");
    write_timing_csv(&rows, &path)?;
    manifest.record(&path);
    manifest.write(out_dir)?;
    Ok(())
}

fn cmd_stability(samples: usize, out_dir: &PathBuf) -> Result<()> {
    let dir = out_dir.join("stability");
    std::fs::create_dir_all(&dir)?;
    let mut manifest = RunManifest::new(format!("stability samples={samples}\n"));
    for tableau in ButcherTableau::all() {
        for p in 0..=7 {
            let path = dir.join(format!("{}_L{p}.csv", tableau.name.to_lowercase()));
            write_stability_csv(&tableau, p, samples, &path)?;
            manifest.record(&path);
        }
    }
    println!("wrote eigenvalue tracks for 5 methods x 8 degrees to {}", dir.display());
    manifest.write(out_dir)?;
    Ok(())
}

fn print_stencil(label: &str, s: &Stencil) {
    let terms: Vec<String> = s
        .offsets()
        .iter()
        .zip(s.coefficients().iter())
        .map(|(o, c)| format!("{c} @ {o:+}"))
        .collect();
    println!("  {label}: {}", terms.join(", "));
}

fn cmd_dump_stencils(p_spec: Option<String>) -> Result<()> {
    let degrees: Vec<usize> = match p_spec {
        None => (0..=7).collect(),
        Some(s) => s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Config(format!("bad degree `{t}`")))
            })
            .collect::<Result<_>>()?,
    };
    for p in degrees {
        println!("p = {p}");
        print_stencil("left face node ", &left_face_stencil(p));
        print_stencil("right face node", &left_face_stencil(p).reversed());
        print_stencil("cell midpoint  ", &midpoint_stencil(p));
        print_stencil("face integral  ", &transverse_integral_stencil(p));
        let gl = gauss_legendre_rule(p);
        println!(
            "  gauss-legendre : {} points {:?}, weights {:?}",
            gl.points.len(),
            gl.points,
            gl.weights
        );
        let (lob, c_mpp) = gauss_lobatto_rule(p);
        println!(
            "  gauss-lobatto  : {} points {:?}, C_MPP = {c_mpp}",
            lob.points.len(),
            lob.points
        );
    }
    Ok(())
}
