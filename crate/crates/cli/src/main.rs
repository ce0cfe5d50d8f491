use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crproj::corpus;
use crproj::pipeline::{self, Analysis, Config, Fault};
use crproj::report;
use crproj::surface_io::{hyperquadric, load_surface, parse_surface, SurfaceGerm};
use crproj::{Error, ErrorKind};

#[derive(Parser)]
#[command(name = "crproj", version, about = "Projective invariants of CR-hypersurface germs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// h table, P/L, adapted third-order coefficients and identity residuals
    Invariants(Common),
    /// Levi-form classification and strong C-linear convexity
    Convexity(Common),
    /// Dual second- and third-order data
    Dual(Common),
    /// Self-duality checks at orders two and three
    Selfdual(Common),
    /// Structural identity suite; exit code 0 iff all pass
    Verify(Common),
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["expr", "file", "quadric", "random"]))]
struct Common {
    /// Graphing function f(x1, y1, ..., xm) as a polynomial expression
    #[arg(long, allow_hyphen_values = true)]
    expr: Option<String>,
    /// Surface file (JSON)
    #[arg(long)]
    file: Option<PathBuf>,
    /// The hyperquadric
    #[arg(long)]
    quadric: bool,
    /// A seeded random perturbation of the hyperquadric (uses --seed)
    #[arg(long)]
    random: bool,
    /// Complex dimension of the ambient affine chart
    #[arg(long)]
    m: Option<usize>,
    /// Jet truncation order N
    #[arg(long)]
    order: Option<u32>,
    /// Highest invariant order
    #[arg(long, default_value_t = 4)]
    pmax: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    tol_structural: f64,
    /// Emit JSON
    #[arg(long)]
    json: bool,
    /// Perturb the pulled-back form: j,k,eps adds eps dx_0 to omega^j_k
    #[arg(long, hide = true, value_parser = parse_fault)]
    inject_fault: Option<Fault>,
}

const DEFAULT_ORDER: u32 = 6;

fn parse_fault(s: &str) -> Result<Fault, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err("expected j,k,eps".into());
    }
    let j = parts[0].parse().map_err(|e| format!("{e}"))?;
    let k = parts[1].parse().map_err(|e| format!("{e}"))?;
    let eps = parts[2].parse().map_err(|e| format!("{e}"))?;
    Ok(Fault { j, k, eps })
}

impl Common {
    fn config(&self, order: u32) -> Config {
        Config { order, pmax: self.pmax, tol_structural: self.tol_structural, seed: self.seed, ..Config::default() }
    }

    fn require_m(&self) -> Result<usize, Error> {
        let m = self.m.ok_or_else(|| Error::Config("--m is required for this surface source".into()))?;
        if m < 2 {
            return Err(Error::Config(format!("--m must be at least 2, got {m}")));
        }
        Ok(m)
    }

    fn germ_and_config(&self) -> Result<(SurfaceGerm, Config), Error> {
        if let Some(path) = &self.file {
            if let Some(order) = self.order {
                self.config(order).validate()?;
            }
            let germ = load_surface(path)?;
            if let Some(m) = self.m {
                if m != germ.m() {
                    return Err(Error::Config(format!("--m {m} disagrees with the file (m = {})", germ.m())));
                }
            }
            let order = self.order.unwrap_or(germ.order());
            let config = self.config(order);
            config.validate()?;
            if order > germ.order() {
                return Err(Error::Config(format!("--order {order} exceeds the file's order {}", germ.order())));
            }
            let germ = SurfaceGerm::new(germ.m(), germ.f().truncate(order))?;
            return Ok((germ, config));
        }
        let order = self.order.unwrap_or(DEFAULT_ORDER);
        let config = self.config(order);
        config.validate()?;
        let m = self.require_m()?;
        let germ = if let Some(e) = &self.expr {
            parse_surface(e, m, order)?
        } else if self.quadric {
            hyperquadric(m, order)?
        } else {
            corpus::random_perturbed_quadric(m, order, 0.3, &mut corpus::rng(self.seed))?
        };
        Ok((germ, config))
    }

    fn analysis(&self) -> Result<Analysis, Error> {
        let (germ, config) = self.germ_and_config()?;
        pipeline::analyze_with_fault(&germ, &config, self.inject_fault)
    }
}

fn write_out(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn emit(value: &Value, json_out: bool) {
    if json_out {
        write_out(&(serde_json::to_string_pretty(value).expect("serializable report") + "\n"));
    } else {
        write_out(&report::to_text(value));
    }
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Domain => 1,
        ErrorKind::Usage => 2,
        ErrorKind::Consistency => 3,
    }
}

fn run(cmd: &Command) -> Result<u8, Error> {
    match cmd {
        Command::Invariants(c) => {
            let a = c.analysis()?;
            emit(&report::invariants(&a), c.json);
        }
        Command::Convexity(c) => {
            let a = c.analysis()?;
            emit(&report::convexity(&pipeline::convexity(&a)), c.json);
        }
        Command::Dual(c) => {
            let a = c.analysis()?;
            emit(&report::dual(&pipeline::dual(&a)?), c.json);
        }
        Command::Selfdual(c) => {
            let a = c.analysis()?;
            emit(&report::selfdual(&pipeline::selfdual(&a)?), c.json);
        }
        Command::Verify(c) => {
            let a = c.analysis()?;
            let checks = pipeline::verification_checks(&a);
            if c.json {
                emit(&report::verify(&checks), true);
            } else {
                write_out(&report::verify_text(&checks));
            }
            if !checks.iter().all(|k| k.passed()) {
                return Ok(3);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json_out = match &cli.command {
        Command::Invariants(c)
        | Command::Convexity(c)
        | Command::Dual(c)
        | Command::Selfdual(c)
        | Command::Verify(c) => c.json,
    };
    match run(&cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let code = exit_code(e.kind());
            if json_out {
                emit(&json!({ "error": e.to_string(), "exit_code": code }), true);
            }
            eprintln!("error: {e}");
            ExitCode::from(code)
        }
    }
}
