use cgks::error::Error;
use cgks::evolution::FluxMode;
use cgks::harness::cases::{self, ErrorReport};
use cgks::harness::config::{CaseConfig, CaseName, MeshGenerator};
use cgks::harness::output;
use cgks::mesh::{build_hybrid_cube, build_structured_hex, io::write_mesh_ascii};
use cgks::recon::ReconMode;
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cgks", version, about = "Compact third-order gas-kinetic scheme solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone, Default)]
struct Overrides {
    /// CFL number override
    #[arg(long)]
    cfl: Option<f64>,
    /// Gradient compression factor: on|off
    #[arg(long)]
    cf: Option<String>,
    /// Reconstruction: linear|weno
    #[arg(long)]
    recon: Option<String>,
    /// Flux solver: full|smooth
    #[arg(long)]
    flux: Option<String>,
    /// Worker threads (0 = all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory override
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one case configuration
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a refinement family of configs and print the convergence table
    Convergence {
        /// Config files or simple '*' glob patterns
        patterns: Vec<String>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Generate a built-in mesh, e.g. hex:n=8 or
    /// hybrid:n=10:domain=0,0,0,2,2,2:periodic=1,1,1
    MeshGen {
        spec: String,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn apply_overrides(cfg: &mut CaseConfig, ov: &Overrides) -> Result<(), Error> {
    if let Some(cfl) = ov.cfl {
        cfg.cfl = cfl;
    }
    if let Some(cf) = &ov.cf {
        cfg.cf_enabled = match cf.as_str() {
            "on" => true,
            "off" => false,
            other => return Err(Error::Config(format!("--cf must be on|off, got '{other}'"))),
        };
    }
    if let Some(r) = &ov.recon {
        cfg.recon = match r.as_str() {
            "linear" => ReconMode::Linear,
            "weno" => ReconMode::Weno,
            other => {
                return Err(Error::Config(format!(
                    "--recon must be linear|weno, got '{other}'"
                )))
            }
        };
    }
    if let Some(f) = &ov.flux {
        cfg.flux = match f.as_str() {
            "full" => FluxMode::Full,
            "smooth" => FluxMode::Smooth,
            other => {
                return Err(Error::Config(format!(
                    "--flux must be full|smooth, got '{other}'"
                )))
            }
        };
    }
    if let Some(t) = ov.threads {
        cfg.threads = t;
    }
    if let Some(d) = &ov.output_dir {
        cfg.output_dir = d.display().to_string();
    }
    Ok(())
}

fn in_thread_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    if threads == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool");
    pool.install(f)
}

fn mesh_label(cfg: &CaseConfig) -> String {
    match cfg.name {
        CaseName::Sinwave | CaseName::Uniform => match cfg.generator {
            MeshGenerator::Hex => format!("{}^3", cfg.n),
            MeshGenerator::Hybrid => format!("1.6x{}^3", cfg.n),
        },
        _ => format!("{}x2x2", cfg.nx),
    }
}

fn run_one(path: &Path, ov: &Overrides) -> Result<cases::CaseOutput, Error> {
    let mut cfg = CaseConfig::load(path)?;
    apply_overrides(&mut cfg, ov)?;
    let t0 = std::time::Instant::now();
    let out = in_thread_pool(cfg.threads, || cases::run_case(&cfg))?;
    println!(
        "{}: {} cells, {} steps, t = {:.6}, {:.2}s wall, {} fallback points",
        path.display(),
        out.solver.mesh.n_cells,
        out.field.step,
        out.field.time,
        t0.elapsed().as_secs_f64(),
        out.field.fallback_points
    );
    if let Some(n) = &out.norms {
        println!(
            "  density errors: L1 = {:.6e}, L2 = {:.6e}, Linf = {:.6e}",
            n.l1, n.l2, n.linf
        );
    }
    let dir = PathBuf::from(&cfg.output_dir);
    if cfg.write_vtk || cfg.write_csv {
        std::fs::create_dir_all(&dir)
            .map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    }
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "case".to_string());
    if cfg.write_vtk {
        let p = dir.join(format!("{stem}.vtk"));
        output::write_vtk(&out.solver, &out.field, &p)?;
        println!("  wrote {}", p.display());
    }
    if cfg.write_csv {
        let line = cases::centerline(&out.solver, &out.field);
        let p = dir.join(format!("{stem}.csv"));
        output::write_csv_line(&line, &p)?;
        println!("  wrote {}", p.display());
    }
    Ok(out)
}

/// Minimal '*' glob over the file-name component against the directory
/// listing.
fn expand_pattern(pattern: &str) -> Result<Vec<PathBuf>, Error> {
    if !pattern.contains('*') {
        return Ok(vec![PathBuf::from(pattern)]);
    }
    let p = Path::new(pattern);
    let dir = p
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = p
        .file_name()
        .ok_or_else(|| Error::Config(format!("bad pattern '{pattern}'")))?
        .to_string_lossy()
        .to_string();
    let parts: Vec<&str> = name.split('*').collect();
    let matches_name = |s: &str| -> bool {
        let mut rest = s;
        if !rest.starts_with(parts[0]) {
            return false;
        }
        rest = &rest[parts[0].len()..];
        for part in &parts[1..parts.len() - 1] {
            match rest.find(part) {
                Some(pos) => rest = &rest[pos + part.len()..],
                None => return false,
            }
        }
        rest.ends_with(parts[parts.len() - 1])
    };
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(format!("listing {}", dir.display()), e))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.file_name()
                .map(|n| matches_name(&n.to_string_lossy()))
                .unwrap_or(false)
        })
        .collect();
    out.sort();
    Ok(out)
}

fn cmd_convergence(patterns: &[String], ov: &Overrides) -> Result<(), Error> {
    let mut paths = Vec::new();
    for p in patterns {
        paths.extend(expand_pattern(p)?);
    }
    if paths.is_empty() {
        return Err(Error::Config("no configs matched".into()));
    }
    let mut reports = Vec::new();
    for path in &paths {
        let mut cfg = CaseConfig::load(path)?;
        apply_overrides(&mut cfg, ov)?;
        let out = run_one(path, ov)?;
        let norms = out.norms.ok_or_else(|| {
            Error::Config(format!(
                "{} has no analytic reference for a convergence table",
                path.display()
            ))
        })?;
        reports.push(ErrorReport {
            label: mesh_label(&cfg),
            norms,
        });
    }
    print!("{}", output::format_convergence_table(&reports));
    Ok(())
}

fn cmd_mesh_gen(spec: &str, out_path: &Path) -> Result<(), Error> {
    let mut kind = None;
    let mut n = 0usize;
    let mut lo = [0.0; 3];
    let mut hi = [1.0, 1.0, 1.0];
    let mut periodic = [false; 3];
    for (i, tok) in spec.split(':').enumerate() {
        if i == 0 {
            kind = Some(tok.to_string());
            continue;
        }
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("bad mesh spec token '{tok}'")))?;
        match key {
            "n" => {
                n = value
                    .parse()
                    .map_err(|_| Error::Config(format!("bad n '{value}'")))?
            }
            "domain" => {
                let v: Vec<f64> = value
                    .split(',')
                    .map(|s| s.parse().map_err(|_| Error::Config("bad domain".into())))
                    .collect::<Result<_, _>>()?;
                if v.len() != 6 {
                    return Err(Error::Config("domain needs 6 numbers".into()));
                }
                lo = [v[0], v[1], v[2]];
                hi = [v[3], v[4], v[5]];
            }
            "periodic" => {
                let v: Vec<&str> = value.split(',').collect();
                if v.len() != 3 {
                    return Err(Error::Config("periodic needs 3 flags".into()));
                }
                for d in 0..3 {
                    periodic[d] = v[d] == "1" || v[d] == "true";
                }
            }
            other => return Err(Error::Config(format!("unknown mesh spec key '{other}'"))),
        }
    }
    if n == 0 {
        return Err(Error::Config("mesh spec needs n=<cells>".into()));
    }
    let mesh = match kind.as_deref() {
        Some("hex") => build_structured_hex([n; 3], lo, hi, periodic)?,
        Some("hybrid") => build_hybrid_cube(n, lo, hi, periodic)?,
        other => {
            return Err(Error::Config(format!(
                "mesh kind must be hex or hybrid, got {other:?}"
            )))
        }
    };
    write_mesh_ascii(&mesh, out_path)?;
    println!(
        "wrote {} ({} cells, {} faces)",
        out_path.display(),
        mesh.n_cells,
        mesh.faces.len()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, overrides } => run_one(config, overrides).map(|_| ()),
        Command::Convergence {
            patterns,
            overrides,
        } => cmd_convergence(patterns, overrides),
        Command::MeshGen { spec, output } => cmd_mesh_gen(spec, output),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::SolverAbort { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
