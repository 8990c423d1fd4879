use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wgm::checks::{run_suite, SUITES};
use wgm::config::{RunConfig, DEFAULT_SWEEP_DELTA};
use wgm::linear_spectrum::{onset, verify_range, WgmReport};
use wgm::ls_solver::LsProblem;
use wgm::report::{csv_string, svg_string};
use wgm::specfun::{bessel_j_eval, zeros, Order};
use wgm::Error;

#[derive(Parser)]
#[command(name = "wgm", version, about = "Whispering-gallery modes of semilinear eigenvalue problems")]
struct Cli {
    /// Worker threads for parallel drivers (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print J_nu(x) and J_nu'(x).
    Bessel {
        #[arg(long, allow_negative_numbers = true)]
        nu: f64,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
    },
    /// Print the first COUNT positive zeros of J_nu.
    Zeros {
        #[arg(long, allow_negative_numbers = true)]
        nu: f64,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Interior-smallness checks for linear eigenmodes over an order range.
    LinearVerify {
        #[arg(long)]
        config: PathBuf,
        /// CSV destination (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the nonlinear problem near one eigenvalue.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Directory receiving solution.txt, w.txt and phi.txt.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Sub-disk energy ratios over a list of degrees.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// CSV destination (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run an oracle suite and print pass counts.
    Oracle {
        #[arg(long, value_parser = SUITES)]
        suite: String,
    },
}

enum Failure {
    Usage(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::InvalidPotential(_)
            | Error::Parse(_)
            | Error::Domain(_)
            | Error::ArgumentTooLarge { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Compute(format!("cannot write {}: {e}", path.display()))
}

/// Shortest round-trip decimal, in exponent form outside `[1e-5, 1e16)`;
/// `-0` prints as `0`.
fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 {
        "0".to_string()
    } else if (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_failure(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_bessel(nu: f64, x: f64) -> Result<bool, Failure> {
    let order = Order::from_f64(nu)?;
    let ev = bessel_j_eval(order, x)?;
    println!("{} {}", num(ev.j), num(ev.jp));
    Ok(true)
}

fn cmd_zeros(nu: f64, count: usize) -> Result<bool, Failure> {
    let order = Order::from_f64(nu)?;
    for z in zeros(order, count)? {
        println!("{}", num(z.value));
    }
    Ok(true)
}

fn linear_csv(reports: &[WgmReport], p_list: &[f64]) -> String {
    let mut s = String::from("d,n,nu,lambda,tau,zeta,grad_inner,grad_bound,grad_margin_log2");
    for p in p_list {
        let _ = write!(s, ",lp{p}_inner,lp{p}_bound,lp{p}_margin_log2");
    }
    s.push_str(",pass\n");
    for r in reports {
        let _ = write!(
            s,
            "{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.d,
            r.n,
            r.nu.nu(),
            r.lam,
            r.tau,
            r.zeta,
            r.grad_energy_inner,
            r.grad_bound,
            r.grad_margin_log2()
        );
        for e in &r.lp_entries {
            let _ = write!(
                s,
                ",{:.16e},{:.16e},{:.16e}",
                e.mass_inner,
                e.bound,
                wgm::linear_spectrum::margin_log2(e.mass_inner, e.bound)
            );
        }
        let _ = writeln!(s, ",{}", r.pass());
    }
    s
}

fn cmd_linear_verify(config: &Path, out: Option<&Path>) -> Result<bool, Failure> {
    let cfg = RunConfig::load(config)?;
    let lin = cfg.linear()?;
    let reports = match lin.degrees() {
        Some((lo, hi)) => verify_range(lin.d, lo, hi, &lin.p_list)?,
        None => Vec::new(),
    };
    write_or_print(out, &linear_csv(&reports, &lin.p_list))?;
    let checked: Vec<&WgmReport> = reports.iter().filter(|r| r.nu.nu() >= 100.0).collect();
    let failed = checked.iter().filter(|r| !r.pass()).count();
    let onset = onset(&reports).map_or("none".to_string(), |n| n.to_string());
    eprintln!(
        "rows {} checked(nu>=100) {} failed {} onset_n {}",
        reports.len(),
        checked.len(),
        failed,
        onset
    );
    Ok(failed == 0)
}

fn cmd_solve(config: &Path, out: &Path) -> Result<bool, Failure> {
    let cfg = RunConfig::load(config)?;
    let problem = LsProblem::new(cfg.ls_config()?)?;
    let sol = problem.assemble_solution()?;
    fs::create_dir_all(out).map_err(|e| io_failure(out, e))?;
    for (name, text) in [
        ("solution.txt", sol.to_text()),
        ("w.txt", sol.w.to_text()),
        ("phi.txt", sol.phi.to_text()),
    ] {
        let path = out.join(name);
        fs::write(&path, text).map_err(|e| io_failure(&path, e))?;
    }
    let d = &sol.diagnostics;
    println!("n {}", sol.n);
    println!("lambda_lin {:.16e}", sol.lam_lin);
    println!("lambda {:.16e}", sol.lam);
    println!("delta {:.16e}", sol.delta);
    println!("M {:.16e}", sol.big_m);
    println!("eta {:.16e}", sol.eta);
    println!("residual {:.16e}", d.residual_l2);
    println!("ortho_h1 {:.16e}", d.ortho_h1);
    println!("ortho_l2 {:.16e}", d.ortho_l2);
    println!("fixed_point_iterations {}", d.fixed_point_iterations);
    let rates: Vec<String> = d.contraction_rates.iter().map(|r| format!("{r:.6e}")).collect();
    println!("contraction_rates {}", rates.join(" "));
    println!("j_tilde {:.16e}", d.j_tilde_value);
    println!("t_min {:.16e}", d.t_min);
    println!("w_l2 {:.16e}", d.w_l2);
    println!("phi_vnorm {:.16e}", d.phi_vnorm);
    println!("split_residuals {:.16e} {:.16e}", d.split_residuals.0, d.split_residuals.1);
    println!("m_doublings {}", d.m_doublings);
    println!("gap_guard {:.16e}", d.gap_guard);
    println!("c_lambda {:.16e}", d.c_lambda);
    println!("u_l2 {:.16e}", sol.u.l2_norm());
    Ok(true)
}

fn cmd_sweep(config: &Path, out: Option<&Path>, svg: Option<&Path>) -> Result<bool, Failure> {
    let cfg = RunConfig::load(config)?;
    let spec = cfg.potential_spec()?;
    let sweep = cfg.sweep()?;
    let delta = sweep.delta.unwrap_or(DEFAULT_SWEEP_DELTA);
    let res = wgm::report::ratio_sweep(&sweep.n_list, |_| delta, &spec, &sweep.tau_list, None);
    write_or_print(out, &csv_string(&res.rows))?;
    if let Some(p) = svg {
        fs::write(p, svg_string(&res.rows)).map_err(|e| io_failure(p, e))?;
    }
    for (n, e) in &res.failures {
        eprintln!("n = {n}: {e}");
    }
    Ok(res.failures.is_empty())
}

fn cmd_oracle(suite: &str) -> Result<bool, Failure> {
    let results = run_suite(suite)
        .ok_or_else(|| Failure::Usage(format!("unknown suite {suite:?}")))??;
    let passed = results.iter().filter(|c| c.pass()).count();
    for c in &results {
        println!(
            "{} {} value {:.16e} reference {:.16e} rel_error {:.3e} tol {:.0e}",
            if c.pass() { "PASS" } else { "FAIL" },
            c.label,
            c.value,
            c.reference,
            c.rel_error,
            c.tol
        );
    }
    println!("{suite}: {passed}/{} passed", results.len());
    Ok(passed == results.len())
}

fn run(cli: Cli) -> Result<bool, Failure> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Failure::Usage("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Bessel { nu, x } => cmd_bessel(nu, x),
        Command::Zeros { nu, count } => cmd_zeros(nu, count),
        Command::LinearVerify { config, out } => cmd_linear_verify(&config, out.as_deref()),
        Command::Solve { config, out } => cmd_solve(&config, &out),
        Command::Sweep { config, out, svg } => cmd_sweep(&config, out.as_deref(), svg.as_deref()),
        Command::Oracle { suite } => cmd_oracle(&suite),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
