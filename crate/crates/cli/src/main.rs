use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use lie_star::lie::{describe, validate};
use lie_star::orbit::{Orbit, SymPoly};
use lie_star::poly::{parse_poly, Multi, PolyG};
use lie_star::scalar::{GaussianRational, Ring, Scalar};
use lie_star::star::{star_mul_upto, Bch, Moyal, StarProduct};
use lie_star::universal::{AxbLaw, TSign};
use lie_star::{Error, Result};
use lie_star_cli::config::{parse_order, parse_r2, parse_suite_file, AlgebraSource, Format, StarSelector};
use lie_star_cli::{default_suite, run_suites, Report, SuiteConfig};

#[derive(Parser)]
#[command(name = "lie-star", version, about = "Exact star products on duals of Lie algebras")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct Common {
    /// Catalog name (su2, sl2, heisenberg3, aff1, abelian(n), direct_sum(..)) or a JSON/TOML file.
    #[arg(long, global = true, default_value = "su2")]
    algebra: String,
    /// λ-order, or `exact`.
    #[arg(long, global = true)]
    order: Option<String>,
    #[arg(long, global = true)]
    degree: Option<u32>,
    /// r² as a positive rational, or `symbolic`.
    #[arg(long, global = true)]
    r2: Option<String>,
    /// Comma-separated identities, a TOML suite file, or `default`.
    #[arg(long, global = true)]
    suite: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[arg(long, global = true, default_value = "text")]
    format: String,
    /// Include wall times in reports.
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Structure constants.
    Algebra {
        #[command(subcommand)]
        cmd: AlgebraCmd,
    },
    /// The BCH product (or Moyal with `--moyal N`).
    Star {
        #[command(subcommand)]
        cmd: StarCmd,
    },
    /// Reduction to a coadjoint orbit of su(2).
    Orbit {
        #[command(subcommand)]
        cmd: OrbitCmd,
    },
    /// GNS representation of the orbit trace.
    Gns {
        #[command(subcommand)]
        cmd: VerifyOnly,
    },
    /// Universal deformations from group actions.
    Universal {
        #[command(subcommand)]
        cmd: UniversalCmd,
    },
    /// Runs a suite file, or the full default suite.
    Run,
}

#[derive(Subcommand)]
enum AlgebraCmd {
    Validate,
    Info,
}

#[derive(Subcommand)]
enum StarCmd {
    /// f ⋆ g for polynomials written in the basis labels or x1..xn.
    Mul {
        f: String,
        g: String,
        /// Use the Moyal product on N canonical pairs (labels q1.., p1..).
        #[arg(long)]
        moyal: Option<usize>,
    },
    /// Products of basis monomials up to the degree bound.
    Table,
    Verify {
        #[arg(long)]
        moyal: Option<usize>,
    },
}

#[derive(Subcommand)]
enum OrbitCmd {
    /// Restriction, deformed restriction and prolongation of f.
    Reduce { f: String },
    /// τ_O(f).
    Trace { f: String },
    Verify,
}

#[derive(Subcommand)]
enum VerifyOnly {
    Verify,
}

#[derive(Subcommand)]
enum UniversalCmd {
    Verify {
        /// `translations` or `axb`.
        #[arg(long, default_value = "axb")]
        instance: String,
        #[arg(long, default_value_t = 1)]
        pairs: usize,
        #[arg(long, default_value_t = 1)]
        spectators: usize,
        #[arg(long, value_parser = parse_law, default_value = "squared")]
        law: AxbLaw,
        #[arg(long, value_parser = parse_sign, default_value = "kernel")]
        sign: TSign,
    },
}

fn parse_law(s: &str) -> std::result::Result<AxbLaw, String> {
    match s {
        "squared" => Ok(AxbLaw::Squared),
        "linear" => Ok(AxbLaw::Linear),
        _ => Err(format!("unknown law `{s}` (squared or linear)")),
    }
}

fn parse_sign(s: &str) -> std::result::Result<TSign, String> {
    match s {
        "kernel" => Ok(TSign::Kernel),
        "compact" => Ok(TSign::Compact),
        _ => Err(format!("unknown sign `{s}` (kernel or compact)")),
    }
}

enum Outcome {
    Pass,
    Fail,
}

fn code(r: &Result<Outcome>) -> u8 {
    match r {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::Fail) => 1,
        Err(_) => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = dispatch(&cli);
    if let Err(e) = &r {
        eprintln!("error: {e}");
    }
    ExitCode::from(code(&r))
}

fn format_of(c: &Common) -> Result<Format> {
    Format::parse(&c.format)
}

/// Builds a suite entry from the common flags.
fn config(c: &Common, star: StarSelector) -> Result<SuiteConfig> {
    let mut cfg = SuiteConfig::new(&c.algebra, star);
    if let Some(o) = &c.order {
        cfg.order = parse_order(o)?;
    }
    if let Some(d) = c.degree {
        cfg.degree = d;
    }
    if let Some(r) = &c.r2 {
        cfg.r2 = parse_r2(r)?;
    }
    if let Some(s) = c.samples {
        cfg.samples = s;
    }
    if let Some(s) = &c.suite {
        cfg.identities = s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect();
    }
    cfg.seed = c.seed;
    cfg.cache_dir = c.cache_dir.clone();
    cfg.format = format_of(c)?;
    cfg.timings = c.timings;
    cfg.validate()?;
    Ok(cfg)
}

fn emit(report: &Report, format: Format) -> Outcome {
    match format {
        Format::Json => print!("{}", report.to_json()),
        Format::Text => print!("{}", report.to_text()),
    }
    if report.passed {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn verify(c: &Common, cfg: SuiteConfig) -> Result<Outcome> {
    Ok(emit(&run_suites(&[cfg])?, format_of(c)?))
}

fn algebra(c: &Common) -> Result<lie_star::lie::LieAlgebra> {
    AlgebraSource::parse(&c.algebra).load()
}

fn show<S: Scalar>(p: &PolyG<S>, labels: &[String], format: Format) -> String {
    match format {
        Format::Text => p.display_with(labels),
        Format::Json => serde_json::to_string(&p.display_with(labels)).expect("string serializes"),
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    let c = &cli.common;
    match &cli.cmd {
        Cmd::Algebra { cmd } => {
            // Structural errors must survive loading so they can be listed.
            let src = AlgebraSource::parse(&c.algebra);
            let raw = match &src {
                AlgebraSource::Catalog(_) => src.load()?.to_file().to_raw()?,
                AlgebraSource::File(p) => {
                    let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                    lie_star::lie::AlgebraFile::parse(&text)?.to_raw()?
                }
            };
            match (cmd, validate(&raw)) {
                (AlgebraCmd::Validate, Ok(_)) => {
                    println!("{}: antisymmetry and Jacobi identity hold", src.label());
                    Ok(Outcome::Pass)
                }
                (_, Err(v)) => {
                    for x in v {
                        println!("{x}");
                    }
                    Ok(Outcome::Fail)
                }
                (AlgebraCmd::Info, Ok(alg)) => {
                    match format_of(c)? {
                        Format::Text => print!("{}", describe(&alg)),
                        Format::Json => {
                            let (uni, w) = alg.unimodular();
                            let v = serde_json::json!({
                                "algebra": alg.to_file(),
                                "unimodular": uni,
                                "witness": w.map(|(j, q)| (alg.labels()[j - 1].clone(), lie_star::scalar::fmt_rational(&q))),
                            });
                            println!("{}", serde_json::to_string_pretty(&v).expect("json"));
                        }
                    }
                    Ok(Outcome::Pass)
                }
            }
        }
        Cmd::Star { cmd } => match cmd {
            StarCmd::Mul { f, g, moyal } => {
                let order = match &c.order {
                    Some(o) => parse_order(o)?,
                    None => None,
                };
                let (star, labels): (Box<dyn StarProduct>, Vec<String>) = match moyal {
                    Some(k) => {
                        let k = *k;
                        let l = (1..=k).map(|i| format!("q{i}")).chain((1..=k).map(|i| format!("p{i}"))).collect();
                        (Box::new(Moyal::new(k)), l)
                    }
                    None => {
                        let alg = algebra(c)?;
                        let l = alg.labels().to_vec();
                        (Box::new(Bch::new(Arc::new(alg))), l)
                    }
                };
                let f = parse_poly(f, &labels)?;
                let g = parse_poly(g, &labels)?;
                println!("{}", show(&star_mul_upto(&*star, &f, &g, order), &labels, format_of(c)?));
                Ok(Outcome::Pass)
            }
            StarCmd::Table => {
                let alg = algebra(c)?;
                let n = alg.dim();
                let labels = alg.labels().to_vec();
                let bch = Bch::new(Arc::new(alg));
                let deg = c.degree.unwrap_or(2);
                if deg > lie_star_cli::config::MAX_DEGREE {
                    return Err(Error::Config(format!("degree must be at most {}", lie_star_cli::config::MAX_DEGREE)));
                }
                let ms = Multi::all_up_to_degree(n, deg);
                let mut rows = Vec::new();
                for a in &ms {
                    for b in &ms {
                        if a.degree() + b.degree() > deg || a.degree() == 0 || b.degree() == 0 {
                            continue;
                        }
                        let one = lie_star::scalar::LambdaPoly::<GaussianRational>::one();
                        let (fa, fb) = (PolyG::monomial(n, *a, one.clone()), PolyG::monomial(n, *b, one));
                        let p = star_mul_upto(&bch, &fa, &fb, None);
                        rows.push((fa.display_with(&labels), fb.display_with(&labels), p.display_with(&labels)));
                    }
                }
                match format_of(c)? {
                    Format::Text => {
                        for (a, b, p) in rows {
                            println!("{a} ⋆ {b} = {p}");
                        }
                    }
                    Format::Json => println!("{}", serde_json::to_string_pretty(&rows).expect("json")),
                }
                Ok(Outcome::Pass)
            }
            StarCmd::Verify { moyal } => {
                if let Some(cfgs) = suite_file(c)? {
                    return Ok(emit(&run_suites(&cfgs)?, format_of(c)?));
                }
                let mut cfg = config(c, if moyal.is_some() { StarSelector::Moyal } else { StarSelector::Bch })?;
                if let Some(k) = moyal {
                    cfg.pairs = *k;
                    cfg.validate()?;
                }
                verify(c, cfg)
            }
        },
        Cmd::Orbit { cmd } => {
            let order = match &c.order {
                Some(o) => parse_order(o)?.ok_or_else(|| Error::Config("orbit needs a finite order".into()))?,
                None => 4,
            };
            let r2 = match &c.r2 {
                Some(r) => parse_r2(r)?,
                None => lie_star::poisson::Radius2::Symbolic,
            };
            match cmd {
                OrbitCmd::Verify => verify(c, config(c, StarSelector::Orbit)?),
                OrbitCmd::Reduce { f } | OrbitCmd::Trace { f } => {
                    if c.algebra != "su2" {
                        return Err(Error::Config("orbit reduction is defined for su2 only".into()));
                    }
                    let o = Orbit::su2(r2, order);
                    let labels = o.algebra().labels().to_vec();
                    let f: SymPoly = parse_poly(f, &labels)?.to_sym();
                    let fmt = format_of(c)?;
                    if let OrbitCmd::Trace { .. } = cmd {
                        let t = o.positive_trace(&f)?;
                        match fmt {
                            Format::Text => println!("{t}"),
                            Format::Json => println!("{}", serde_json::to_string(&t.to_string()).expect("json")),
                        }
                        return Ok(Outcome::Pass);
                    }
                    let restricted = o.restrict(&f);
                    let deformed = o.deformed_restrict(&f);
                    let rows = [
                        ("restrict", show(&restricted.rep, &labels, Format::Text)),
                        ("deformed_restrict", show(&deformed.rep, &labels, Format::Text)),
                        ("h0", show(&o.h0(&f), &labels, Format::Text)),
                    ];
                    match fmt {
                        Format::Text => {
                            for (k, v) in rows {
                                println!("{k}: {v}");
                            }
                        }
                        Format::Json => {
                            let m: serde_json::Map<String, serde_json::Value> =
                                rows.into_iter().map(|(k, v)| (k.to_string(), v.into())).collect();
                            println!("{}", serde_json::to_string_pretty(&m).expect("json"));
                        }
                    }
                    Ok(Outcome::Pass)
                }
            }
        }
        Cmd::Gns { cmd: VerifyOnly::Verify } => verify(c, config(c, StarSelector::Gns)?),
        Cmd::Universal { cmd: UniversalCmd::Verify { instance, pairs, spectators, law, sign } } => {
            let star = match instance.as_str() {
                "translations" => StarSelector::Translations,
                "axb" | "axb2d" => StarSelector::Axb,
                other => return Err(Error::Config(format!("unknown instance `{other}`"))),
            };
            let mut cfg = config(c, star)?;
            cfg.pairs = *pairs;
            cfg.spectators = *spectators;
            cfg.law = *law;
            cfg.sign = *sign;
            cfg.validate()?;
            verify(c, cfg)
        }
        Cmd::Run => {
            let mut cfgs = suite_file(c)?.unwrap_or_else(default_suite);
            for cfg in &mut cfgs {
                cfg.seed = c.seed;
                cfg.cache_dir = c.cache_dir.clone();
                cfg.timings = c.timings;
            }
            Ok(emit(&run_suites(&cfgs)?, format_of(c)?))
        }
    }
}

/// `--suite` naming a TOML file; `default` selects the built-in suite.
fn suite_file(c: &Common) -> Result<Option<Vec<SuiteConfig>>> {
    match c.suite.as_deref() {
        Some("default") => Ok(Some(default_suite())),
        Some(s) if std::path::Path::new(s).is_file() => {
            let text = std::fs::read_to_string(s).map_err(|e| Error::Config(format!("{s}: {e}")))?;
            parse_suite_file(&text).map(Some)
        }
        _ => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> u8 {
        // clap itself exits with 2 on malformed arguments.
        match Cli::try_parse_from(std::iter::once("lie-star").chain(args.iter().copied())) {
            Ok(cli) => code(&dispatch(&cli)),
            Err(_) => 2,
        }
    }

    #[test]
    fn passing_suite_exits_zero() {
        assert_eq!(run(&["--algebra", "heisenberg3", "--degree", "3", "--suite", "assoc,closedness", "star", "verify"]), 0);
        assert_eq!(run(&["--algebra", "su2", "star", "mul", "e1", "e2"]), 0);
        assert_eq!(run(&["--algebra", "aff1", "algebra", "info"]), 0);
    }

    #[test]
    fn violated_identity_exits_one() {
        assert_eq!(run(&["--algebra", "aff1", "--degree", "3", "--suite", "closedness", "star", "verify"]), 1);
        assert_eq!(run(&["--algebra", "su2", "--degree", "3", "--suite", "trace-evaluation", "star", "verify"]), 1);
    }

    #[test]
    fn configuration_errors_exit_two() {
        for args in [
            &["--degree", "99", "star", "verify"][..],
            &["--algebra", "nonesuch", "algebra", "info"][..],
            &["--suite", "no-such-identity", "star", "verify"][..],
            &["--algebra", "heisenberg3", "orbit", "verify"][..],
            &["--order", "-1", "star", "verify"][..],
            &["--format", "yaml", "star", "verify"][..],
            &["star", "mul", "e1 +* e2", "e1"][..],
        ] {
            assert_eq!(run(args), 2, "{args:?}");
        }
    }

    #[test]
    fn invalid_algebra_file_fails() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(
            &path,
            r#"{"name":"bad","dim":3,"brackets":[{"i":1,"j":2,"k":2,"value":"1"},{"i":2,"j":3,"k":1,"value":"1"}]}"#,
        )
        .unwrap();
        assert_eq!(run(&["--algebra", path.to_str().unwrap(), "algebra", "validate"]), 1);
        let raw = lie_star::lie::AlgebraFile::parse(&std::fs::read_to_string(&path).unwrap()).unwrap().to_raw().unwrap();
        let v = validate(&raw).unwrap_err();
        assert!(v.iter().any(|x| x.to_string().to_lowercase().contains("jacobi")), "{v:?}");
    }
}
