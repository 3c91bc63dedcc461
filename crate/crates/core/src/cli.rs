//! Command-line front end.
//!
//! Exit codes: 0 success; 1 failed verification; 2 bad input (parse, config,
//! indices); 3 non-terminating star product; 4 numeric failure; 5 singular
//! time; 6 I/O.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde::Deserialize;

use crate::dynamics::{evolve_classical, evolve_damped_ansatz, evolve_eigenexpansion, AnsatzEntry, ExpansionCoeffs};
use crate::error::Error;
use crate::numerics::{export, render, rk4_evolve, sample, Format, GridRhs, PhaseGrid};
use crate::oscillator::{
    damped_eigenstate, damped_offdiagonal_candidate, energy, hamiltonian, sho_offdiagonal, sho_wigner_eigenstate,
    DampedEigenvalue,
};
use crate::star::{star_product, BilinearStar};
use crate::symbols::{approx_equal, parse, GridSpec, Params, Symbol};
use crate::verify;

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Parser, Debug)]
#[command(name = "starkit", version, about = "Phase-space quantum mechanics of the damped harmonic oscillator")]
pub struct Cli {
    #[command(flatten)]
    pub globals: Globals,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Globals {
    #[arg(long, global = true, default_value_t = 1.0)]
    pub m: f64,
    #[arg(long, global = true, default_value_t = 1.0)]
    pub omega: f64,
    #[arg(long, global = true, default_value_t = 1.0)]
    pub hbar: f64,
    #[arg(long, global = true, default_value_t = 0.0)]
    pub gamma: f64,
    /// Residual tolerance; defaults to $STARKIT_TOL or 1e-10.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Star product of two expressions.
    Star {
        #[arg(allow_hyphen_values = true)]
        lhs: String,
        #[arg(allow_hyphen_values = true)]
        rhs: String,
        #[arg(long, value_enum, default_value_t = Product::Moyal)]
        product: Product,
        /// Husimi squeeze parameter.
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        /// Sample the result on "q_min,q_max,p_min,p_max,nq,np" instead of printing it.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a JSON scenario and export the requested snapshots.
    Evolve { scenario: PathBuf },
    /// Print an eigenfunction (n) or off-diagonal element (n, n').
    Eigen { n: usize, n2: Option<usize> },
    /// Run verification suites ("all" or a suite name).
    Verify {
        #[arg(default_value = "all")]
        suite: String,
    },
    /// Sample an expression on a grid and export it.
    Grid {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        #[arg(long, default_value = "-6,6,-6,6,201,201", allow_hyphen_values = true)]
        spec: String,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Product {
    Moyal,
    Damped,
    Standard,
    Husimi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }

    fn config(message: impl Into<String>) -> Self {
        Failure::new(2, message)
    }
}

/// Exit code for an engine error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Syntax { .. } | Error::Degree { .. } | Error::Power { .. } => 2,
        Error::DegreeGuard(_) | Error::InvalidArgument(_) | Error::InvalidGrid(_) | Error::Positivity(_) => 2,
        Error::Format(_) | Error::GridMismatch => 2,
        Error::NonTerminating(_) => 3,
        Error::SingularTime(_) => 5,
        Error::Io(_) => 6,
        _ => 4,
    }
}

fn fail(context: &str, e: Error) -> Failure {
    Failure::new(exit_code(&e), format!("{context}: {e}"))
}

type Outcome = std::result::Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Entry point used by the binary.
pub fn main_from_env() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn tolerance(g: &Globals) -> std::result::Result<f64, Failure> {
    if let Some(t) = g.tol {
        return Ok(t);
    }
    match std::env::var("STARKIT_TOL") {
        Ok(v) => v.trim().parse().map_err(|_| Failure::config(format!("STARKIT_TOL is not a number: '{v}'"))),
        Err(_) => Ok(DEFAULT_TOL),
    }
}

fn params(g: &Globals) -> std::result::Result<Params, Failure> {
    Params::new(g.m, g.omega, g.hbar, g.gamma).map_err(|e| fail("parameters", e))
}

fn io(e: std::io::Error) -> Failure {
    Failure::new(6, format!("output: {e}"))
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Outcome {
    let p = params(&cli.globals)?;
    let tol = tolerance(&cli.globals)?;
    match &cli.command {
        Command::Star { lhs, rhs, product, s, grid, format, out: path } => {
            let f = parse(lhs).map_err(|e| fail("lhs", e))?;
            let g = parse(rhs).map_err(|e| fail("rhs", e))?;
            let star = match product {
                Product::Moyal => BilinearStar::moyal(p),
                Product::Damped => BilinearStar::damped(p.gamma, p),
                Product::Standard => BilinearStar::standard(p),
                Product::Husimi => BilinearStar::husimi(*s, p),
            };
            let result = star_product(&f, &g, &star).map_err(|e| fail(&format!("'{lhs}' * '{rhs}'"), e))?;
            match grid {
                Some(spec) => emit_grid(&result, &parse_spec(spec)?, (*format).into(), path.as_ref(), out)?,
                None => writeln!(out, "{result}").map_err(io)?,
            }
            Ok(0)
        }
        Command::Grid { expr, spec, format, out: path } => {
            let f = parse(expr).map_err(|e| fail("expression", e))?;
            emit_grid(&f, &parse_spec(spec)?, (*format).into(), path.as_ref(), out)?;
            Ok(0)
        }
        Command::Eigen { n, n2 } => eigen(*n, *n2, &p, tol, out),
        Command::Verify { suite } => run_verify(suite, out),
        Command::Evolve { scenario } => evolve(scenario, out),
    }
}

/// Parses "q_min,q_max,p_min,p_max,nq,np".
pub fn parse_spec(text: &str) -> std::result::Result<GridSpec, Failure> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || Failure::config(format!("grid spec must be q_min,q_max,p_min,p_max,nq,np; got '{text}'"));
    if parts.len() != 6 {
        return Err(bad());
    }
    let f = |i: usize| parts[i].parse::<f64>().map_err(|_| bad());
    let u = |i: usize| parts[i].parse::<usize>().map_err(|_| bad());
    GridSpec::new(f(0)?, f(1)?, f(2)?, f(3)?, u(4)?, u(5)?).map_err(|e| fail("grid", e))
}

fn emit_grid(f: &Symbol, spec: &GridSpec, format: Format, path: Option<&PathBuf>, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    let grid = sample(f, spec).map_err(|e| fail("sampling", e))?;
    match path {
        Some(path) => export(&grid, format, path).map_err(|e| fail(&path.display().to_string(), e)),
        None => {
            let text = render(&grid, format).map_err(|e| fail("export", e))?;
            out.write_all(text.as_bytes()).map_err(io)?;
            if format == Format::Json {
                writeln!(out).map_err(io)?;
            }
            Ok(())
        }
    }
}

/// `a + bi` with the shortest round-tripping decimal parts.
pub fn format_complex(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im < 0.0 {
        format!("{} - {}i", z.re, -z.im)
    } else {
        format!("{} + {}i", z.re, z.im)
    }
}

fn residual_line(out: &mut dyn Write, name: &str, value: f64, tol: f64) -> std::result::Result<bool, Failure> {
    let ok = value <= tol;
    writeln!(out, "{name} residual = {value:.3e} ({})", if ok { "ok" } else { "above tolerance" }).map_err(io)?;
    Ok(ok)
}

fn eigen(n: usize, n2: Option<usize>, p: &Params, tol: f64, out: &mut dyn Write) -> Outcome {
    let h = hamiltonian(p);
    let rel = |a: &Symbol, b: &Symbol| approx_equal(a, b, 1.0).map(|c| c.relative()).map_err(|e| fail("residual", e));
    let star_err = |e| fail("star product", e);
    match (n2, p.gamma != 0.0) {
        (None, false) => {
            let rho = sho_wigner_eigenstate(n, p);
            let e = energy(n, p);
            writeln!(out, "rho = {rho}").map_err(io)?;
            writeln!(out, "E = {e}").map_err(io)?;
            let left = star_product(&h, &rho, &BilinearStar::moyal(*p)).map_err(star_err)?;
            residual_line(out, "H * rho - E rho", rel(&left, &rho.scale(e))?, tol)?;
        }
        (None, true) => {
            let (rho, e) = damped_eigenstate(n, p).map_err(|e| fail("eigenstate", e))?;
            writeln!(out, "rho = {rho}").map_err(io)?;
            writeln!(out, "E = {}", format_complex(e.value)).map_err(io)?;
            let left = star_product(&h, &rho, &BilinearStar::damped(p.gamma, *p)).map_err(star_err)?;
            residual_line(out, "H *_gamma rho - E rho", rel(&left, &rho.scale(e.value))?, tol)?;
        }
        (Some(n2), false) => {
            let rho = sho_offdiagonal(n, n2, p).map_err(|e| fail("indices", e))?;
            let (e, e2) = (energy(n, p), energy(n2, p));
            writeln!(out, "rho = {rho}").map_err(io)?;
            writeln!(out, "E = {e}").map_err(io)?;
            writeln!(out, "E' = {e2}").map_err(io)?;
            let star = BilinearStar::moyal(*p);
            let left = star_product(&h, &rho, &star).map_err(star_err)?;
            let right = star_product(&rho, &h, &star).map_err(star_err)?;
            residual_line(out, "H * rho - E rho", rel(&left, &rho.scale(e))?, tol)?;
            residual_line(out, "rho * H - E' rho", rel(&right, &rho.scale(e2))?, tol)?;
        }
        (Some(n2), true) => {
            let c = damped_offdiagonal_candidate(n, n2, p).map_err(|e| fail("indices", e))?;
            writeln!(out, "rho = {}", c.symbol).map_err(io)?;
            writeln!(out, "E = {}", format_complex(DampedEigenvalue::new(n, p).value)).map_err(io)?;
            writeln!(out, "E' = {}", format_complex(c.right_eigenvalue)).map_err(io)?;
            residual_line(out, "rho *_gamma H - E' rho", c.right_residual, tol)?;
            writeln!(
                out,
                "H *_-gamma rho - conj(E) rho residual = {:.3e} (diagnostic)",
                c.left_residual
            )
            .map_err(io)?;
        }
    }
    Ok(0)
}

fn run_verify(suite: &str, out: &mut dyn Write) -> Outcome {
    let ids: Vec<usize> = if suite == "all" {
        (1..=verify::SUITES.len()).collect()
    } else {
        match verify::SUITES.iter().position(|s| s.0 == suite) {
            Some(i) => vec![i + 1],
            None => {
                return Err(Failure::config(format!(
                    "unknown suite '{suite}'; expected one of: all, {}",
                    verify::suite_names().join(", ")
                )))
            }
        }
    };
    let mut all = true;
    for id in ids {
        let s = verify::run(id);
        let status = if s.passed() { "PASS" } else { "FAIL" };
        writeln!(out, "{status} {} ({:.2}s)", s.name, s.seconds).map_err(io)?;
        for c in &s.checks {
            writeln!(out, "    {c}").map_err(io)?;
        }
        all &= s.passed();
    }
    Ok(if all { 0 } else { 1 })
}

/// Evolution methods available to scenarios.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evolution {
    Classical,
    Rk4,
    Eigenexpansion,
    DampedAnsatz,
    Naive,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub time: f64,
    pub format: Format,
    pub path: PathBuf,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficient {
    pub n: usize,
    pub n2: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryConfig {
    pub amplitude: [f64; 2],
    pub left: [f64; 2],
    pub right: [f64; 2],
    pub symbol: String,
}

/// A JSON scenario file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub initial: Option<String>,
    pub evolution: Evolution,
    pub times: Vec<f64>,
    pub grid: GridSpec,
    #[serde(default)]
    pub outputs: Vec<Output>,
    #[serde(default)]
    pub coefficients: Vec<Coefficient>,
    #[serde(default)]
    pub entries: Vec<EntryConfig>,
    #[serde(default = "default_dt")]
    pub rk4_dt: f64,
}

fn default_dt() -> f64 {
    1e-3
}

impl Scenario {
    pub fn validate(&self) -> std::result::Result<(), Failure> {
        self.params.validate().map_err(|e| fail("params", e))?;
        self.grid.validate().map_err(|e| fail("grid", e))?;
        if self.times.is_empty() {
            return Err(Failure::config("times must not be empty"));
        }
        if self.times.windows(2).any(|w| w[1] < w[0]) || self.times.iter().any(|t| !t.is_finite()) {
            return Err(Failure::config("times must be finite and non-decreasing"));
        }
        let needs_initial = matches!(self.evolution, Evolution::Classical | Evolution::Rk4 | Evolution::Naive);
        if needs_initial && self.initial.is_none() {
            return Err(Failure::config("this evolution needs an 'initial' expression"));
        }
        if self.evolution == Evolution::Eigenexpansion && self.coefficients.is_empty() {
            return Err(Failure::config("eigenexpansion needs 'coefficients'"));
        }
        if self.evolution == Evolution::DampedAnsatz && self.entries.is_empty() {
            return Err(Failure::config("damped_ansatz needs 'entries'"));
        }
        for o in &self.outputs {
            if !self.times.iter().any(|t| (t - o.time).abs() <= 1e-12) {
                return Err(Failure::config(format!("output time {} is not in 'times'", o.time)));
            }
        }
        Ok(())
    }
}

/// Computes the snapshot grids of a scenario, in the order of `times`.
pub fn simulate(sc: &Scenario) -> std::result::Result<Vec<PhaseGrid>, Failure> {
    sc.validate()?;
    let p = sc.params;
    let c = |z: [f64; 2]| C64::new(z[0], z[1]);
    let initial = match &sc.initial {
        Some(text) => Some(parse(text).map_err(|e| fail("initial", e))?),
        None => None,
    };
    let grid_of = |s: &Symbol| sample(s, &sc.grid).map_err(|e| fail("sampling", e));
    let mut snapshots = Vec::with_capacity(sc.times.len());
    match sc.evolution {
        Evolution::Classical => {
            let rho0 = initial.as_ref().expect("validated");
            for &t in &sc.times {
                snapshots.push(grid_of(&evolve_classical(rho0, t, &p))?);
            }
        }
        Evolution::Rk4 | Evolution::Naive => {
            let rhs = if sc.evolution == Evolution::Rk4 { GridRhs::Damped } else { GridRhs::Naive };
            let mut state = grid_of(initial.as_ref().expect("validated"))?;
            let mut now = 0.0;
            for &t in &sc.times {
                if t != now {
                    state = rk4_evolve(&state, rhs, t - now, sc.rk4_dt, &p).map_err(|e| fail("rk4", e))?;
                    now = t;
                }
                snapshots.push(state.clone());
            }
        }
        Evolution::Eigenexpansion => {
            let mut coeffs = ExpansionCoeffs::new();
            for k in &sc.coefficients {
                coeffs.insert(k.n, k.n2, C64::new(k.re, k.im));
            }
            for &t in &sc.times {
                let s = evolve_eigenexpansion(&coeffs, t, &p).map_err(|e| fail("coefficients", e))?;
                snapshots.push(grid_of(&s)?);
            }
        }
        Evolution::DampedAnsatz => {
            let entries: Vec<AnsatzEntry> = sc
                .entries
                .iter()
                .map(|e| {
                    Ok(AnsatzEntry {
                        amplitude: c(e.amplitude),
                        left: c(e.left),
                        right: c(e.right),
                        symbol: parse(&e.symbol).map_err(|err| fail("entry symbol", err))?,
                    })
                })
                .collect::<std::result::Result<_, Failure>>()?;
            for &t in &sc.times {
                let s = evolve_damped_ansatz(&entries, t, &p).map_err(|e| fail("entries", e))?;
                snapshots.push(grid_of(&s)?);
            }
        }
    }
    Ok(snapshots)
}

fn evolve(path: &PathBuf, out: &mut dyn Write) -> Outcome {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    let sc: Scenario = serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    let snapshots = simulate(&sc)?;
    for (t, grid) in sc.times.iter().zip(&snapshots) {
        writeln!(out, "t = {t} reality_defect = {:.3e}", grid.imaginary_sup()).map_err(io)?;
        for o in sc.outputs.iter().filter(|o| (o.time - t).abs() <= 1e-12) {
            export(grid, o.format, &o.path).map_err(|e| fail(&o.path.display().to_string(), e))?;
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("starkit").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn star_prints_grammar() {
        assert_eq!(call(&["star", "q", "p", "--product", "moyal"]), (0, "q*p + 0.5*i\n".into(), String::new()));
        let (code, out, _) = call(&["star", "p", "p", "--product", "damped", "--gamma", "0.1"]);
        assert_eq!((code, out.as_str()), (0, "p^2 - 0.1*i\n"));
    }

    #[test]
    fn star_exit_codes() {
        let (code, _, err) = call(&["star", "q*", "p"]);
        assert_eq!(code, 2);
        assert!(err.contains("lhs"));
        let (code, _, err) = call(&["star", "q*exp(-q^2)", "p*exp(-p^2)", "--product", "damped", "--gamma", "0.1"]);
        assert_eq!(code, 3);
        assert!(err.contains("non-terminating"));
        let (code, _, _) = call(&["star", "exp(p^2)", "exp(p^2)", "--product", "husimi"]);
        assert_eq!(code, 4);
    }

    #[test]
    fn eigen_outputs() {
        let (code, out, _) = call(&["eigen", "0"]);
        assert_eq!(code, 0);
        assert!(out.contains("E = 0.5\n"), "{out}");
        let (_, out, _) = call(&["eigen", "0", "--gamma", "0.1"]);
        assert!(out.contains("E = 0.5 + 0.05i"), "{out}");
        let (_, out, _) = call(&["eigen", "1", "0"]);
        assert!(out.contains("E = 1.5\n") && out.contains("E' = 0.5\n"), "{out}");
        assert_eq!(call(&["eigen", "7", "9"]).0, 2);
    }

    #[test]
    fn eigen_output_reparses() {
        let (_, out, _) = call(&["eigen", "2"]);
        let line = out.lines().next().unwrap().trim_start_matches("rho = ");
        let s = parse(line).unwrap();
        let want = sho_wigner_eigenstate(2, &Params::default());
        assert!(approx_equal(&want, &s, 1e-10).unwrap().equal);
    }

    #[test]
    fn grid_spec_parsing() {
        assert_eq!(parse_spec("-1,1,-2,2,3,4").unwrap(), GridSpec::new(-1.0, 1.0, -2.0, 2.0, 3, 4).unwrap());
        assert_eq!(parse_spec("1,2,3").unwrap_err().code, 2);
        assert_eq!(parse_spec("1,0,0,1,3,3").unwrap_err().code, 2);
    }

    #[test]
    fn unknown_suite_is_a_usage_error() {
        assert_eq!(call(&["verify", "nope"]).0, 2);
        let (code, out, _) = call(&["verify", "brackets"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("PASS brackets"));
    }

    #[test]
    fn complex_formatting() {
        assert_eq!(format_complex(C64::new(0.5, 0.05)), "0.5 + 0.05i");
        assert_eq!(format_complex(C64::new(0.5, -0.05)), "0.5 - 0.05i");
        assert_eq!(format_complex(C64::new(1.5, 0.0)), "1.5");
    }
}
