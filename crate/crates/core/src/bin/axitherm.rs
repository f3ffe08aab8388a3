use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use axitherm::io::{csv::TimeSeriesWriter, output_directory, vtk::write_state_vtk};
use axitherm::mesh::{EmTag, MeridionalMesh, ThermalTag};
use axitherm::{load_config, verify, Error, Formulation, Simulation};

#[derive(Parser)]
#[command(version, about = "Axisymmetric thermo-electromagnetic simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a TOML file.
    Run {
        config: PathBuf,
        /// Overrides `output.directory` and AXITHERM_OUTPUT_DIR.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Compare the solver with the analytic references.
    Verify {
        /// One of skin, dc, power, adiabatic; all when omitted.
        set: Option<String>,
        #[arg(long, default_value_t = 32)]
        nr: usize,
        #[arg(long, default_value_t = 64)]
        nz: usize,
    },
    /// Summarise a mesh file.
    MeshInfo { mesh: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if matches!(cli.command, Command::Run { .. }) { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    axitherm::sparse::set_single_threaded();
    let result = match cli.command {
        Command::Run { config, output_dir } => run(&config, output_dir),
        Command::Verify { set, nr, nz } => run_verify(set.as_deref(), nr, nz),
        Command::MeshInfo { mesh } => mesh_info(&mesh),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(match e {
                Error::Config(_) => 2,
                ref e if e.is_non_convergence() => 3,
                _ => 1,
            })
        }
    }
}

fn run(config_path: &Path, output_dir: Option<PathBuf>) -> axitherm::Result<ExitCode> {
    let cfg = load_config(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let (problem, solver) = cfg.build(base)?;
    let dir = output_dir.unwrap_or_else(|| output_directory(&cfg.output.directory));
    std::fs::create_dir_all(&dir)?;
    let ks: Vec<usize> = problem.ports.ports.iter().map(|p| p.k).collect();
    let sim = Simulation::new(problem, solver)?;
    let mut csv = if cfg.output.csv {
        Some(TimeSeriesWriter::new(BufWriter::new(File::create(dir.join("timeseries.csv"))?), &ks)?)
    } else {
        None
    };
    let every = cfg.output.vtk_every_n_steps;
    let mut step = 0usize;
    let last = sim.run_with(|state| {
        if let Some(w) = csv.as_mut() {
            w.write(state)?;
        }
        if every > 0 && (step.is_multiple_of(every) || step == sim.config.n_steps()) {
            let pushed = match sim.config.mode {
                Formulation::Lagrangian => Some(sim.geometry(state.t)?.current_nodes),
                Formulation::Eulerian => None,
            };
            let mesh = match sim.config.mode {
                Formulation::Lagrangian => sim.problem.mesh.clone(),
                Formulation::Eulerian => sim.problem.mesh.push_forward(&sim.problem.motion, state.t)?,
            };
            write_state_vtk(&dir, &format!("state_{step:05}"), &mesh, state, pushed.as_deref())?;
        }
        step += 1;
        Ok(())
    })?;
    println!(
        "finished at t = {} s: theta in [{:.3}, {:.3}] C, P_diss = {:.6e} W; output in {}",
        last.t,
        last.theta_min(),
        last.theta_max(),
        last.diagnostics.p_diss,
        dir.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn run_verify(set: Option<&str>, nr: usize, nz: usize) -> axitherm::Result<ExitCode> {
    let sets: Vec<&str> = match set {
        Some(s) => vec![s],
        None => verify::SETS.to_vec(),
    };
    let mut all = true;
    for s in sets {
        println!("[{s}] mesh {nr}x{nz}");
        println!("{:<58} {:>16} {:>16} {:>11} {:>9}  ", "quantity", "solver", "reference", "error", "tol");
        for row in verify::comparisons(s, nr, nz)? {
            all &= row.passed();
            println!(
                "{:<58} {:>16.9e} {:>16.9e} {:>11.3e} {:>9}  {}",
                row.quantity,
                row.solver,
                row.reference,
                row.error,
                row.tolerance.map_or("-".to_string(), |t| format!("{t:.1e}")),
                match row.tolerance {
                    None => "",
                    Some(_) if row.passed() => "ok",
                    Some(_) => "FAIL",
                }
            );
        }
        println!();
    }
    Ok(if all { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn mesh_info(path: &Path) -> axitherm::Result<ExitCode> {
    let mesh = MeridionalMesh::from_text(&std::fs::read_to_string(path)?)?;
    let (mut rmin, mut rmax, mut zmin, mut zmax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in mesh.nodes() {
        rmin = rmin.min(p[0]);
        rmax = rmax.max(p[0]);
        zmin = zmin.min(p[1]);
        zmax = zmax.max(p[1]);
    }
    println!("nodes      {}", mesh.n_nodes());
    println!("triangles  {}", mesh.n_triangles());
    println!("r range    [{rmin}, {rmax}]");
    println!("z range    [{zmin}, {zmax}]");
    println!("area       {:.9e}", mesh.total_area());
    for (tag, n) in mesh.em_tag_counts() {
        let name = match tag {
            EmTag::Axis => "axis".to_string(),
            EmTag::PortJ(k) => format!("portJ:{k}"),
            EmTag::PortE => "portE".into(),
            EmTag::Insulated => "insulated".into(),
        };
        println!("edges {name:<12} {n}");
    }
    for (tag, n) in mesh.thermal_tag_counts() {
        let name = match tag {
            ThermalTag::Dirichlet => "dirichlet",
            ThermalTag::ConvRad => "convrad",
            ThermalTag::None => "none",
        };
        println!("edges {name:<12} {n}");
    }
    Ok(ExitCode::SUCCESS)
}
