//! Command-line dispatch. Exit codes: 0 verified, 1 refuted or failed,
//! 2 usage or internal error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rigidity_forge_core::engine::{check_derivation, verify_justifications, Derivation, Engine, EngineError, Verdict};
use rigidity_forge_core::gadgets::{
    build_division, build_division_with_radius, build_kempe, build_parallel, build_perp_transfer, build_rhombus_chain,
    build_scale, build_translation_bridge, point, Gadget, TPoint,
};
use rigidity_forge_core::models::verify_preservation;
use rigidity_forge_core::poly::identities::kempe_identities;
use rigidity_forge_core::Rational;

use crate::codec::{self, Document, File};
use crate::descriptor::parse_model;
use crate::suite;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "rigidity-forge", version, about = "Exact rigidity gadgets, proof replay and model checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Division,
    RhombusChain,
    Bridge,
    Scale,
    Kempe,
    Perp,
    Parallel,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a gadget and write it as JSON.
    Gadget {
        kind: Kind,
        /// First point, as `x,y` with rational coordinates.
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<String>,
        /// Defaults to the translate (or scaled translate) of `c` where that
        /// is implied by the kind.
        #[arg(long, allow_hyphen_values = true)]
        d: Option<String>,
        /// Division ratio or linkage parameter.
        #[arg(long, allow_hyphen_values = true)]
        t: Option<String>,
        /// Division radius override.
        #[arg(long)]
        r: Option<String>,
        /// Scale factor for `scale`.
        #[arg(long, allow_hyphen_values = true)]
        ratio: Option<String>,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = suite::DEFAULT_SEED)]
        seed: u64,
    },
    /// Re-check a gadget or derivation file against its own coordinates.
    Verify { file: PathBuf },
    /// Replay the proof behind a gadget.
    Replay {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Expand and check the four linkage determinant identities.
    Identities,
    /// Evaluate a derivation (or a gadget's replay) under a concrete model.
    ModelCheck {
        file: PathBuf,
        #[arg(long)]
        model: String,
    },
    /// Run every acceptance criterion.
    Suite {
        #[arg(long, default_value_t = suite::DEFAULT_SEED)]
        seed: u64,
    },
}

/// Failure with its exit code.
#[derive(Debug)]
struct Exit(i32, String);

fn usage(msg: impl Into<String>) -> Exit {
    Exit(EXIT_USAGE, msg.into())
}

fn failed(msg: impl Into<String>) -> Exit {
    Exit(EXIT_FAILED, msg.into())
}

pub fn main_with_args(args: impl IntoIterator<Item = impl Into<OsString> + Clone>) -> i32 {
    run(args, &mut std::io::stdout(), &mut std::io::stderr())
}

pub fn run(args: impl IntoIterator<Item = impl Into<OsString> + Clone>, out: &mut impl Write, err: &mut impl Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(Exit(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

fn dispatch(cmd: Command, out: &mut impl Write) -> Result<(), Exit> {
    let mut say = |s: String| writeln!(out, "{s}").map_err(|e| usage(e.to_string()));
    match cmd {
        Command::Gadget { kind, a, b, c, d, t, r, ratio, output, seed } => {
            let g = build(kind, Params { a, b, c, d, t, r, ratio })?;
            write_file(&output, &File { seed: Some(seed), document: Document::Gadget(g.clone()) })?;
            say(format!(
                "wrote {} gadget to {}: {} points, {} certified pairs",
                g.construction.kind(),
                output.display(),
                g.points.len(),
                g.certificate.len()
            ))
        }
        Command::Verify { file } => {
            let f = read_file(&file)?;
            let msg = verify_document(&f).map_err(failed)?;
            say(msg)
        }
        Command::Replay { file, output } => {
            let f = read_file(&file)?;
            let Document::Gadget(g) = f.document else {
                return Err(usage(format!("{} is a {} file; replay needs a gadget", file.display(), f.kind())));
            };
            g.verify().map_err(|e| failed(format!("gadget does not verify: {e}")))?;
            let engine = Engine::new();
            let d = engine.replay(&g).map_err(engine_failure)?;
            verify_justifications(&d, engine.identities()).map_err(|e| failed(e.to_string()))?;
            say(format!("replayed {} gadget: {} steps", g.construction.kind(), d.steps.len()))?;
            for s in d.conclusions() {
                say(format!("concludes {:?} by {}", s.fact, s.justification.rule.tag()))?;
            }
            if let Some(o) = output {
                write_file(&o, &File { seed: f.seed, document: Document::Derivation(d) })?;
                say(format!("wrote derivation to {}", o.display()))?;
            }
            Ok(())
        }
        Command::Identities => {
            let mut all = true;
            for id in kempe_identities() {
                let ok = id.holds();
                all &= ok;
                let pts: String = id.points.iter().collect();
                say(format!("{} [{pts}] {}: {}", if ok { "ok  " } else { "FAIL" }, id.name, id.claimed))?;
            }
            if all {
                Ok(())
            } else {
                Err(failed("an identity did not match its expansion"))
            }
        }
        Command::ModelCheck { file, model } => {
            let m = parse_model(&model).map_err(|e| usage(e.to_string()))?;
            let f = read_file(&file)?;
            let d = match f.document {
                Document::Derivation(d) => d,
                Document::Gadget(g) => Engine::new().replay(&g).map_err(engine_failure)?,
                Document::Model(_) => return Err(usage("model-check needs a gadget or derivation file")),
            };
            model_check(&d, &m, &mut say)
        }
        Command::Suite { seed } => {
            let report = suite::run(seed);
            say(format!("seed {}", report.seed))?;
            for o in &report.outcomes {
                say(o.to_string())?;
            }
            let passed = report.outcomes.iter().filter(|o| o.passed).count();
            say(format!("{passed}/{} criteria passed", report.outcomes.len()))?;
            if report.passed() {
                Ok(())
            } else {
                Err(failed("acceptance suite failed"))
            }
        }
    }
}

fn engine_failure(e: EngineError) -> Exit {
    failed(format!("replay failed: {e}"))
}

fn model_check(
    d: &Derivation,
    m: &rigidity_forge_core::models::ModelMap,
    say: &mut impl FnMut(String) -> Result<(), Exit>,
) -> Result<(), Exit> {
    match check_derivation(d, m).map_err(|e| usage(e.to_string()))? {
        Verdict::AllTrue => say(format!("all {} facts hold under the model", d.steps.len()))?,
        Verdict::Violated { index, fact } => return Err(failed(format!("fact {index} fails under the model: {fact:?}"))),
    }
    let g = &d.gadget;
    let pairs: Vec<(TPoint, TPoint)> = g
        .certificate
        .iter()
        .map(|c| match (g.point(&c.p), g.point(&c.q)) {
            (Some(p), Some(q)) => Ok((p.clone(), q.clone())),
            _ => Err(failed(format!("certificate names unknown point in {}{}", c.p, c.q))),
        })
        .collect::<Result<_, _>>()?;
    let rep = verify_preservation(m, &pairs).map_err(|e| usage(e.to_string()))?;
    if !rep.passed() {
        return Err(failed(format!("certificate pairs {:?} are not preserved", rep.failures)));
    }
    say(format!("{} certificate pairs preserved", rep.checked))
}

/// Self-consistency of a decoded file.
pub fn verify_document(f: &File) -> Result<String, String> {
    match &f.document {
        Document::Gadget(g) => {
            g.verify().map_err(|e| e.to_string())?;
            Ok(format!("{} gadget verified: {} points, {} certified pairs", g.construction.kind(), g.points.len(), g.certificate.len()))
        }
        Document::Derivation(d) => {
            d.gadget.verify().map_err(|e| e.to_string())?;
            let engine = Engine::new();
            verify_justifications(d, engine.identities()).map_err(|e| e.to_string())?;
            Ok(format!("derivation verified: {} justified steps", d.steps.len()))
        }
        Document::Model(_) => Ok("model frame is orthonormal".into()),
    }
}

fn read_file(path: &Path) -> Result<File, Exit> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    codec::from_text(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, f: &File) -> Result<(), Exit> {
    std::fs::write(path, codec::to_text(f)).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

struct Params {
    a: Option<String>,
    b: Option<String>,
    c: Option<String>,
    d: Option<String>,
    t: Option<String>,
    r: Option<String>,
    ratio: Option<String>,
}

fn parse_rational(flag: &str, s: &str) -> Result<Rational, Exit> {
    s.parse().map_err(|_| usage(format!("--{flag} {s:?} is not an exact rational p/q")))
}

fn parse_point(flag: &str, s: &str) -> Result<TPoint, Exit> {
    let (x, y) = s.split_once(',').ok_or_else(|| usage(format!("--{flag} expects x,y")))?;
    Ok(point(parse_rational(flag, x.trim())?, parse_rational(flag, y.trim())?))
}

fn build(kind: Kind, p: Params) -> Result<Gadget, Exit> {
    let pt = |flag: &str, v: &Option<String>, default: Option<&str>| -> Result<TPoint, Exit> {
        match (v.as_deref(), default) {
            (Some(s), _) | (None, Some(s)) => parse_point(flag, s),
            (None, None) => Err(usage(format!("{kind:?} needs --{flag}"))),
        }
    };
    let rat = |flag: &str, v: &Option<String>, default: Option<&str>| -> Result<Rational, Exit> {
        match (v.as_deref(), default) {
            (Some(s), _) | (None, Some(s)) => parse_rational(flag, s),
            (None, None) => Err(usage(format!("{kind:?} needs --{flag}"))),
        }
    };
    let four = |default_d: &dyn Fn(&TPoint, &TPoint, &TPoint) -> TPoint| -> Result<[TPoint; 4], Exit> {
        let (a, b, c) = (pt("a", &p.a, None)?, pt("b", &p.b, None)?, pt("c", &p.c, None)?);
        let d = match &p.d {
            Some(s) => parse_point("d", s)?,
            None => default_d(&a, &b, &c),
        };
        Ok([a, b, c, d])
    };
    let translate = |a: &TPoint, b: &TPoint, c: &TPoint| c.add(&b.sub(a));
    let built = match kind {
        Kind::Division => {
            let (a, b) = (pt("a", &p.a, Some("0,0"))?, pt("b", &p.b, Some("1,0"))?);
            let t = rat("t", &p.t, Some("1/2"))?;
            match &p.r {
                Some(r) => build_division_with_radius(&a, &b, &t, &parse_rational("r", r)?),
                None => build_division(&a, &b, &t),
            }
        }
        Kind::RhombusChain => {
            let [a, b, c, d] = four(&translate)?;
            build_rhombus_chain(&a, &b, &c, &d)
        }
        Kind::Bridge => {
            let [a, b, c, d] = four(&translate)?;
            build_translation_bridge(&a, &b, &c, &d)
        }
        Kind::Scale => {
            let ratio = rat("ratio", &p.ratio, None)?;
            let [a, b, c, d] = four(&|a: &TPoint, b: &TPoint, c: &TPoint| c.add(&b.sub(a).scale_rational(&ratio)))?;
            build_scale(&a, &b, &c, &d, &ratio)
        }
        Kind::Kempe => build_kempe(&rat("t", &p.t, Some("1"))?),
        Kind::Perp | Kind::Parallel => {
            let [a, b, c, d] = four(&|_: &TPoint, _: &TPoint, _: &TPoint| TPoint::origin())?;
            if p.d.is_none() {
                return Err(usage(format!("{kind:?} needs --d")));
            }
            if kind == Kind::Perp {
                build_perp_transfer(&a, &b, &c, &d)
            } else {
                build_parallel(&a, &b, &c, &d)
            }
        }
    };
    built.map_err(|e| failed(format!("cannot build {kind:?} gadget: {e}")))
}
