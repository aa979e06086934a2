use clap::{Args, Parser, Subcommand};
use qeom_core::config::RunConfig;
use qeom_core::hamiltonian::parse_fcidump;
use qeom_core::pipeline::{self, load_system, run_ground, write_coverage_csv};
use qeom_core::qeom::Variant;
use qeom_core::{Error, Result};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

/// Excited states by qEOM and QSE on an ADAPT-VQE reference, emulated exactly.
#[derive(Parser)]
#[command(name = "qeom", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// ADAPT-VQE ground state, with the exact energy when feasible.
    Ground(RunArgs),
    /// Excitation energies for the configured method and variants.
    Excite(RunArgs),
    /// Repeat `excite` over the `scan` parameter list.
    Scan(RunArgs),
    /// Ranked triples indicators and the coverage curve.
    Screen {
        #[command(flatten)]
        run: RunArgs,
        /// Also re-solve the block after each ranked prefix.
        #[arg(long)]
        re_diagonalize_curve: bool,
    },
    /// Summarize an FCIDUMP file.
    FcidumpInfo {
        path: PathBuf,
        #[arg(long)]
        point_group: Option<String>,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    /// key = value configuration file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override one configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    fcidump: Option<String>,
    #[arg(long)]
    builtin: Option<String>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    h8_layout: Option<String>,
    #[arg(long)]
    point_group: Option<String>,
    #[arg(long)]
    frozen: Option<String>,
    #[arg(long)]
    active: Option<String>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    target_irrep: Option<String>,
    #[arg(long)]
    target_root: Option<String>,
    #[arg(long)]
    target_spin: Option<String>,
    #[arg(long)]
    root_tracking: Option<String>,
    #[arg(long)]
    screening_mode: Option<String>,
    #[arg(long)]
    screening_f: Option<String>,
    #[arg(long)]
    screening_eps: Option<String>,
    #[arg(long)]
    screening_k: Option<String>,
    #[arg(long)]
    indicator: Option<String>,
    #[arg(long)]
    adapt_eps: Option<String>,
    #[arg(long)]
    adapt_max_iters: Option<String>,
    #[arg(long)]
    adapt_gtol: Option<String>,
    #[arg(long)]
    pool: Option<String>,
    #[arg(long)]
    lindep: Option<String>,
    #[arg(long)]
    oracle: Option<String>,
    #[arg(long)]
    output_dir: Option<String>,
    #[arg(long)]
    scan: Option<String>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let text = match &self.config {
            Some(p) => std::fs::read_to_string(p)?,
            None => String::new(),
        };
        let named = [
            ("fcidump", &self.fcidump),
            ("builtin", &self.builtin),
            ("b", &self.b),
            ("r", &self.r),
            ("h8_layout", &self.h8_layout),
            ("point_group", &self.point_group),
            ("frozen", &self.frozen),
            ("active", &self.active),
            ("method", &self.method),
            ("variant", &self.variant),
            ("target_irrep", &self.target_irrep),
            ("target_root", &self.target_root),
            ("target_spin", &self.target_spin),
            ("root_tracking", &self.root_tracking),
            ("screening_mode", &self.screening_mode),
            ("screening_f", &self.screening_f),
            ("screening_eps", &self.screening_eps),
            ("screening_k", &self.screening_k),
            ("indicator", &self.indicator),
            ("adapt_eps", &self.adapt_eps),
            ("adapt_max_iters", &self.adapt_max_iters),
            ("adapt_gtol", &self.adapt_gtol),
            ("pool", &self.pool),
            ("lindep", &self.lindep),
            ("oracle", &self.oracle),
            ("output_dir", &self.output_dir),
            ("scan", &self.scan),
        ];
        let mut overrides: Vec<(String, String)> =
            named.iter().filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))).collect();
        for s in &self.set {
            let (k, v) = s.split_once('=').ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{s}'")))?;
            overrides.push((k.trim().to_string(), v.trim().to_string()));
        }
        RunConfig::parse(&text, &overrides)
    }
}

fn print(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn ground(args: &RunArgs) -> Result<()> {
    let c = args.config()?;
    let sys = load_system(&c)?;
    let g = run_ground(&sys.mh, &c.adapt)?;
    let exact = if c.oracle {
        let irrep = sys.mh.determinant_irrep(sys.mh.hf_bits());
        Some(qeom_core::fci::fci_roots(&sys.mh, sys.mh.n_electrons / 2, sys.mh.n_electrons / 2, Some(irrep), 1)?.roots[0].energy)
    } else {
        None
    };
    let out = json!({
        "schema_version": pipeline::SCHEMA_VERSION,
        "system": sys.description,
        "e_hf": g.e_hf,
        "e_vqe": g.e_vqe,
        "e_fci": exact,
        "error_ha": exact.map(|e| g.e_vqe - e),
        "operators": g.ansatz.operators.iter().map(|o| o.label.clone()).collect::<Vec<_>>(),
        "parameters": g.ansatz.parameters,
        "adapt": g.report,
    });
    if let Some(dir) = &c.output_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("ground.json"), serde_json::to_string_pretty(&out)? + "\n")?;
    }
    print(&out);
    Ok(())
}

fn excite(args: &RunArgs) -> Result<()> {
    let c = args.config()?;
    let record = pipeline::run_single(&c)?;
    print(&serde_json::to_value(&record)?);
    Ok(())
}

fn scan(args: &RunArgs) -> Result<()> {
    let c = args.config()?;
    let points = pipeline::run_scan(&c)?;
    if c.output_dir.is_none() {
        print!("{}", pipeline::scan_csv(&points, &c.variants));
    } else {
        let failed = points.iter().filter(|p| p.error.is_some()).count();
        print(&json!({ "points": points.len(), "failed": failed }));
    }
    Ok(())
}

fn screen(args: &RunArgs, curve: bool) -> Result<()> {
    let mut c = args.config()?;
    if !c.needs_triples() {
        c.variants.push(Variant::Sdt);
    }
    let (record, file) = pipeline::run_detailed(&c, curve)?;
    let file = file.ok_or_else(|| Error::Config("no triples in the target block".into()))?;
    if let Some(dir) = &c.output_dir {
        write_coverage_csv(&dir.join(format!("coverage_{}.csv", record.method)), &file)?;
    }
    print(&serde_json::to_value(&file)?);
    Ok(())
}

fn fcidump_info(path: &PathBuf, point_group: Option<&str>) -> Result<()> {
    let pg = point_group.map(|s| s.parse()).transpose().map_err(Error::Config)?;
    let ints = parse_fcidump(&std::fs::read_to_string(path)?, pg)?;
    let names: Vec<String> = ints.orbital_irreps.iter().map(|l| ints.point_group.name(*l)).collect();
    let mut counts = std::collections::BTreeMap::new();
    for n in &names {
        *counts.entry(n.clone()).or_insert(0usize) += 1;
    }
    print(&json!({
        "n_orbitals": ints.n_orbitals,
        "n_electrons": ints.n_electrons,
        "ms2": ints.ms2,
        "e_nuclear": ints.e_nuclear,
        "point_group": ints.point_group.to_string(),
        "orbital_irreps": names,
        "irrep_counts": counts,
        "closed_shell_energy": ints.closed_shell_energy(),
        "n_qubits": 2 * ints.n_orbitals,
    }));
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Ground(a) => ground(a),
        Command::Excite(a) => excite(a),
        Command::Scan(a) => scan(a),
        Command::Screen { run, re_diagonalize_curve } => screen(run, *re_diagonalize_curve),
        Command::FcidumpInfo { path, point_group } => fcidump_info(path, point_group.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
