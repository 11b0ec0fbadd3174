//! Command-line surface over the qgraph library.
//!
//! Exit codes: 0 success / Accept / Feasible, 1 Reject / Infeasible,
//! 2 Indeterminate, 64 usage errors, 65 unreadable or unparsable input.

use clap::{Parser, Subcommand, ValueEnum};
use num::{BigRational, One, Signed, ToPrimitive, Zero};
use qgraph::{
    orthant_zero_check, param_density_n_quantum, param_density_quantum, polya_test,
    preorder_search, sos_search_multi, sos_search_simple, t_density, t_inj_density, t_quantum,
    verify_preorder, verify_sos, CertFile, Certificate, Error, LabeledMultigraph, Mode,
    MultiSearchOutcome, PerturbSpec, Poly, PolyaOutcome, PreorderOutcome, QuantumGraph,
    SearchOptions, SimpleSearchOutcome, SosCert, VerifyOutcome,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

const EXIT_REJECT: u8 = 1;
const EXIT_INDETERMINATE: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_PARSE: u8 = 65;

#[derive(Parser)]
#[command(name = "qgraph", version, about = "Exact densities and nonnegativity certificates for labeled multigraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Homomorphism density of one multigraph in another.
    Density {
        /// Graph file to map from.
        #[arg(long)]
        of: PathBuf,
        /// Graph file to map into.
        #[arg(long)]
        target: PathBuf,
        /// Use injective maps only.
        #[arg(long)]
        inj: bool,
    },
    /// Density of a quantum graph in a multigraph.
    T {
        #[arg(long)]
        quantum: PathBuf,
        #[arg(long)]
        target: PathBuf,
    },
    /// Parametrized density as a polynomial (optionally specialized).
    ParamDensity {
        #[arg(long)]
        quantum: PathBuf,
        /// Concrete target graph fixing the parameter count.
        #[arg(long)]
        target: Option<PathBuf>,
        /// Parameter count without a concrete target.
        #[arg(long)]
        n: Option<usize>,
        /// Substitute the uniform vertex weights 1/n.
        #[arg(long)]
        uniform: bool,
        /// Also zero out the diagonal pair weights.
        #[arg(long, requires = "uniform")]
        zero_diag: bool,
        /// Print the numerator polynomial only.
        #[arg(long)]
        clear_denominators: bool,
    },
    /// Scan for a Pólya multiplier making all coefficients nonnegative.
    Polya {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long, default_value_t = 30)]
        max_n: u32,
    },
    /// Check a claimed interior-orthant zero, the obstruction to any
    /// Pólya multiplier.
    Obstruct {
        #[arg(long)]
        poly: PathBuf,
        /// Comma-separated positive rational coordinates.
        #[arg(long)]
        zero: String,
    },
    /// Search for a nonnegativity certificate and write it to a file.
    Prove {
        #[arg(long)]
        quantum: PathBuf,
        #[arg(long, value_parser = parse_mode)]
        mode: Mode,
        /// Label count of the certificate algebra.
        #[arg(long)]
        k: usize,
        /// Degree bound for the square search (multigraph setting).
        #[arg(long, default_value_t = 1)]
        degree: usize,
        /// Additive error; required in the simple setting, 0 allowed.
        #[arg(long, value_parser = parse_rational)]
        epsilon: Option<BigRational>,
        /// Scale bound for preorder certificates.
        #[arg(long, value_parser = parse_rational)]
        d: Option<BigRational>,
        /// Structured perturbation `slow:<order>` or `bounded:<order>`;
        /// takes its eps from --epsilon and its bound from --d.
        #[arg(long)]
        perturb: Option<String>,
        /// Search the edge-bound preorder instead of plain squares.
        #[arg(long)]
        preorder: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Verify a certificate file against a target quantum graph.
    Check {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        quantum: PathBuf,
    },
    /// Write built-in example files into the working directory.
    Examples {
        #[arg(value_enum)]
        name: ExampleName,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExampleName {
    Goodman,
    Robinson,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|_| "expected `simple` or `multi`".to_string())
}

fn parse_rational(s: &str) -> Result<BigRational, String> {
    BigRational::from_str(s).map_err(|_| format!("{s:?} is not a rational p/q"))
}

/// Failures carry the exit code they should terminate with.
struct Failure {
    code: u8,
    message: String,
}

type RunResult = Result<u8, Failure>;

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::Parse { .. } | Error::Io(_) => EXIT_PARSE,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_PARSE,
        message: format!("{}: {e}", path.display()),
    })
}

/// Strips comments and joins the remaining lines, for one-expression files.
fn read_bare(path: &Path) -> Result<String, Failure> {
    let text = read_text(path)?;
    let body: Vec<&str> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .collect();
    Ok(body.join(" "))
}

// any failure to turn a file into a value is a parse failure (exit 65)
fn parse_failure(path: &Path, e: Error) -> Failure {
    Failure { code: EXIT_PARSE, message: format!("{}: {e}", path.display()) }
}

fn read_graph(path: &Path) -> Result<LabeledMultigraph, Failure> {
    LabeledMultigraph::parse(&read_bare(path)?).map_err(|e| parse_failure(path, e))
}

fn read_quantum(path: &Path) -> Result<QuantumGraph, Failure> {
    QuantumGraph::parse(&read_text(path)?).map_err(|e| parse_failure(path, e))
}

fn read_poly(path: &Path) -> Result<Poly, Failure> {
    Poly::parse(&read_bare(path)?).map_err(|e| parse_failure(path, e))
}

/// `p/q (~0.666667)`: the exact value and six significant digits.
fn show_rational(r: &BigRational) -> String {
    format!("{r} (~{})", sig6(r.to_f64().unwrap_or(f64::NAN)))
}

fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0.00000".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn search_options() -> Result<SearchOptions, Failure> {
    let mut opts = SearchOptions::default();
    if let Ok(raw) = std::env::var("QGRAPH_MAX_DIM") {
        opts.dim_cap = raw
            .parse()
            .map_err(|_| usage(format!("QGRAPH_MAX_DIM={raw:?} is not a dimension")))?;
    }
    Ok(opts)
}

fn run(command: Command) -> RunResult {
    match command {
        Command::Density { of, target, inj } => {
            let f = read_graph(&of)?;
            let g = read_graph(&target)?;
            if inj {
                println!("t_inj = {}", show_rational(&t_inj_density(&f, &g)?));
            } else {
                println!("t = {}", show_rational(&t_density(&f, &g)?));
            }
            Ok(0)
        }
        Command::T { quantum, target } => {
            let a = read_quantum(&quantum)?;
            let g = read_graph(&target)?;
            println!("t = {}", show_rational(&t_quantum(&a, &g)?));
            Ok(0)
        }
        Command::ParamDensity { quantum, target, n, uniform, zero_diag, clear_denominators } => {
            let a = read_quantum(&quantum)?;
            let rf = match (&target, n) {
                (Some(path), None) => param_density_quantum(&a, &read_graph(path)?)?,
                (None, Some(n)) => param_density_n_quantum(&a, n)?,
                _ => return Err(usage("pass exactly one of --target and --n")),
            };
            if uniform {
                let poly = rf.specialize_uniform(rf.target_size(), zero_diag)?;
                println!("{poly}");
            } else if clear_denominators || rf.denom_power() == 0 {
                println!("{}", rf.numerator());
            } else {
                println!(
                    "({}) / ({})^{}",
                    rf.numerator(),
                    rf.denominator_base(),
                    rf.denom_power()
                );
            }
            Ok(0)
        }
        Command::Polya { poly, max_n } => {
            let p = read_poly(&poly)?;
            match polya_test(&p, max_n)? {
                PolyaOutcome::Success { n, .. } => {
                    println!("success N={n}");
                    Ok(0)
                }
                PolyaOutcome::Failure { witnesses } => {
                    println!("failure: a negative coefficient survives every N <= {max_n}");
                    for w in witnesses {
                        println!("  N={}: {} * {}", w.n, w.coeff, w.monomial);
                    }
                    Ok(EXIT_REJECT)
                }
            }
        }
        Command::Obstruct { poly, zero } => {
            let p = read_poly(&poly)?;
            let point: Result<Vec<BigRational>, Failure> = zero
                .split(',')
                .map(|t| {
                    BigRational::from_str(t.trim())
                        .map_err(|_| usage(format!("bad coordinate {:?}", t.trim())))
                })
                .collect();
            if orthant_zero_check(&p, &point?)? {
                println!("zero confirmed: no multiplier can clear the negative coefficients");
                Ok(0)
            } else {
                println!("not a zero of the polynomial");
                Ok(EXIT_REJECT)
            }
        }
        Command::Prove { quantum, mode, k, degree, epsilon, d, perturb, preorder, out } => {
            let a = read_quantum(&quantum)?;
            let opts = search_options()?;
            match mode {
                Mode::Simple => {
                    if preorder || perturb.is_some() || d.is_some() {
                        return Err(usage(
                            "--preorder, --perturb, and --d apply to the multigraph setting",
                        ));
                    }
                    let eps =
                        epsilon.ok_or_else(|| usage("--epsilon is required in simple mode"))?;
                    match sos_search_simple(&a, k, &eps)? {
                        SimpleSearchOutcome::Certificate(cert) => {
                            let spec = if eps.is_positive() {
                                PerturbSpec::PlainEps(eps)
                            } else {
                                PerturbSpec::None
                            };
                            write_cert(&out, Certificate::Sos(cert), spec)
                        }
                        SimpleSearchOutcome::Infeasible { min_value, witness } => {
                            let point: Vec<String> = witness
                                .iter()
                                .map(|(&(i, j), &on)| format!("{i}-{j}={}", u8::from(on)))
                                .collect();
                            println!(
                                "Infeasible: symmetrized minimum {} at {}",
                                show_rational(&min_value),
                                point.join(" ")
                            );
                            Ok(EXIT_REJECT)
                        }
                    }
                }
                Mode::Multi if preorder => {
                    if perturb.is_some() {
                        return Err(usage("--perturb does not combine with --preorder"));
                    }
                    let d = d.unwrap_or_else(BigRational::one);
                    let eps = epsilon.unwrap_or_else(BigRational::zero);
                    match preorder_search(&a, k, degree, &d, &eps, &opts)? {
                        PreorderOutcome::Certificate(cert) => {
                            let spec = if eps.is_positive() {
                                PerturbSpec::PlainEps(eps)
                            } else {
                                PerturbSpec::None
                            };
                            write_cert(&out, Certificate::Preorder(cert), spec)
                        }
                        PreorderOutcome::Indeterminate { detail } => {
                            println!("Indeterminate: {detail}");
                            Ok(EXIT_INDETERMINATE)
                        }
                    }
                }
                Mode::Multi => {
                    let spec = build_perturb(&perturb, &epsilon, &d)?;
                    match sos_search_multi(&a, k, degree, &spec, &opts)? {
                        MultiSearchOutcome::Certificate(cert) => {
                            write_cert(&out, Certificate::Sos(cert), spec)
                        }
                        MultiSearchOutcome::Infeasible { refutation } => {
                            println!("Infeasible: exact refutation over {} classes", refutation.len());
                            for (g, c) in refutation {
                                println!("  {c} | {g}");
                            }
                            Ok(EXIT_REJECT)
                        }
                        MultiSearchOutcome::Indeterminate { detail } => {
                            println!("Indeterminate: {detail}");
                            Ok(EXIT_INDETERMINATE)
                        }
                    }
                }
            }
        }
        Command::Check { cert, quantum } => {
            let file = CertFile::load(&cert).map_err(|e| parse_failure(&cert, e))?;
            let a = read_quantum(&quantum)?;
            let outcome = match &file.certificate {
                Certificate::Sos(c) => verify_sos(c, &a, &file.perturb)?,
                Certificate::Preorder(c) => verify_preorder(c, &a, &file.perturb)?,
            };
            match outcome {
                VerifyOutcome::Accept => {
                    println!("Accept");
                    Ok(0)
                }
                VerifyOutcome::Reject(diff) => {
                    println!("Reject");
                    println!("difference (certificate minus target):");
                    print!("{diff}");
                    Ok(EXIT_REJECT)
                }
            }
        }
        Command::Examples { name } => write_examples(name),
    }
}

fn build_perturb(
    perturb: &Option<String>,
    epsilon: &Option<BigRational>,
    d: &Option<BigRational>,
) -> Result<PerturbSpec, Failure> {
    let Some(text) = perturb else {
        return Ok(match epsilon {
            Some(e) if !e.is_zero() => PerturbSpec::PlainEps(e.clone()),
            _ => PerturbSpec::None,
        });
    };
    let (kind, order) = text
        .split_once(':')
        .ok_or_else(|| usage("--perturb takes `slow:<order>` or `bounded:<order>`"))?;
    let order: u32 = order
        .parse()
        .map_err(|_| usage(format!("bad perturbation order {order:?}")))?;
    let eps = epsilon
        .clone()
        .ok_or_else(|| usage("--perturb requires --epsilon"))?;
    match kind {
        "slow" => Ok(PerturbSpec::Slow { eps, order }),
        "bounded" => {
            let bound = d.clone().ok_or_else(|| usage("--perturb bounded:<order> requires --d"))?;
            Ok(PerturbSpec::Bounded { eps, bound, order })
        }
        _ => Err(usage(format!("unknown perturbation kind {kind:?}"))),
    }
}

fn write_cert(out: &Path, certificate: Certificate, perturb: PerturbSpec) -> RunResult {
    let size = match &certificate {
        Certificate::Sos(c) => format!("{} summands", c.summands.len()),
        Certificate::Preorder(c) => format!("{} blocks", c.blocks.len()),
    };
    CertFile { certificate, perturb }.save(out)?;
    println!("Feasible: certificate with {size} written to {}", out.display());
    Ok(0)
}

fn write_examples(name: ExampleName) -> RunResult {
    let write = |path: &str, body: String| -> Result<(), Failure> {
        std::fs::write(path, body).map_err(|e| Failure {
            code: EXIT_PARSE,
            message: format!("{path}: {e}"),
        })?;
        println!("wrote {path}");
        Ok(())
    };
    let mg = |text: &str| LabeledMultigraph::parse(text).expect("built-in graph");
    let rational = |text: &str| BigRational::from_str(text).expect("built-in rational");
    match name {
        ExampleName::Goodman => {
            // cherry minus perfect matching; nonnegative as the square of
            // a difference of two partially labeled edges
            let a = QuantumGraph::from_terms(
                0,
                Mode::Simple,
                [
                    (mg("MG 3 0 : 1-3, 2-3"), rational("1")),
                    (mg("MG 4 0 : 1-4, 2-3"), rational("-1")),
                ],
            )?;
            write("goodman_a.qg", a.to_string())?;
            let u = QuantumGraph::from_terms(
                1,
                Mode::Simple,
                [(mg("MG 2 1 : 1-2"), rational("1"))],
            )?;
            let v = QuantumGraph::from_terms(
                1,
                Mode::Simple,
                [(mg("MG 3 1 : 2-3"), rational("1"))],
            )?;
            let cert = SosCert::new(1, Mode::Simple, vec![(rational("1"), u.sub(&v)?)])?;
            let file =
                CertFile { certificate: Certificate::Sos(cert), perturb: PerturbSpec::None };
            write("goodman_a.cert", file.to_string())?;
            // triangle density bounded below by edge densities
            let c = QuantumGraph::from_terms(
                0,
                Mode::Simple,
                [
                    (mg("MG 3 0 : 1-2, 1-3, 2-3"), rational("1")),
                    (mg("MG 4 0 : 1-4, 2-3"), rational("-2")),
                    (mg("MG 2 0 : 1-2"), rational("1")),
                ],
            )?;
            write("goodman_c.qg", c.to_string())?;
        }
        ExampleName::Robinson => {
            // a nonnegative quantum multigraph that is not a sum of squares
            let b = QuantumGraph::from_terms(
                0,
                Mode::Multi,
                [
                    (mg("MG 2 0 : 1-2*6"), rational("1")),
                    (mg("MG 3 0 : 1-2*2, 1-3*2, 2-3*2"), rational("1")),
                    (mg("MG 3 0 : 1-2*4, 2-3*2"), rational("-2")),
                ],
            )?;
            write("robinson.qg", b.to_string())?;
        }
    }
    Ok(0)
}
