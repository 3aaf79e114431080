use clap::{Parser, Subcommand};
use newton_dual::acceptance;
use newton_dual::convex_core::conjugate;
use newton_dual::corpus::Corpus;
use newton_dual::error::{Error, Result};
use newton_dual::heel_front::{self, SupportFn};
use newton_dual::maxwell_stratum as mx;
use newton_dual::newton_radial;
use newton_dual::resistance::{dual_resistance_of, primal_resistance, tilde_transform};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "newton-dual", version, about = "Dual-side experiments for Newton's minimal-resistance problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Calibrated radial optimum through u(x0) = M; CSV columns v, x, u.
    #[command(allow_negative_numbers = true)]
    NewtonRadial {
        #[arg(long, default_value_t = 1.0)]
        x0: f64,
        #[arg(long = "M", default_value_t = 1.0)]
        m: f64,
        #[arg(long, default_value_t = newton_radial::DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value = "profile.csv")]
        emit: PathBuf,
    },
    /// Best regular front per M; CSV columns M, m, R*, J*, then an M_crit row.
    #[command(allow_negative_numbers = true)]
    HeelSweep {
        /// start:stop:step
        #[arg(long = "M", default_value = "0.5:3.0:0.05")]
        m_range: String,
        #[arg(long, default_value_t = heel_front::MAX_SIDES)]
        m_max: usize,
        #[arg(long, default_value = "sweep.csv")]
        emit: PathBuf,
    },
    /// Random perturbations of the optimal regular m-gon at height M.
    #[command(allow_negative_numbers = true)]
    HeelAudit {
        #[arg(long = "m")]
        sides: usize,
        #[arg(long = "M")]
        m: f64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = acceptance::SEED)]
        seed: u64,
        #[arg(long, default_value = "audit.json")]
        emit: PathBuf,
    },
    /// Symmetric Euler-Lagrange extremal from v(0) = M, v'(0+) = v0p; CSV columns p1, v, dv.
    #[command(allow_negative_numbers = true)]
    MaxwellSolve {
        #[arg(long = "M", default_value_t = 2.0)]
        m: f64,
        #[arg(long, default_value_t = 0.0)]
        v0p: f64,
        #[arg(long, default_value_t = mx::DEFAULT_STEP)]
        step: f64,
        #[arg(long, default_value = "curve.csv")]
        emit: PathBuf,
    },
    /// Primal body over the disk from the extremal's stratum; JSON body file.
    #[command(allow_negative_numbers = true)]
    MaxwellBody {
        #[arg(long = "M", default_value_t = 2.0)]
        m: f64,
        #[arg(long, default_value_t = 0.8)]
        v0p: f64,
        #[arg(long, default_value_t = mx::DEFAULT_STEP)]
        step: f64,
        #[arg(long, default_value_t = 720)]
        rim: usize,
        #[arg(long, default_value = "body.json")]
        emit: PathBuf,
    },
    /// Primal vs dual resistance over a seeded corpus.
    #[command(allow_negative_numbers = true)]
    DualityCheck {
        #[arg(long, default_value_t = 100)]
        bodies: usize,
        #[arg(long, default_value_t = acceptance::SEED)]
        seed: u64,
        #[arg(long, default_value = "duality.csv")]
        emit: PathBuf,
    },
    /// Dual resistance before and after the gradient-modulus transform over a seeded corpus.
    #[command(allow_negative_numbers = true)]
    TildeCheck {
        #[arg(long, default_value_t = 100)]
        bodies: usize,
        #[arg(long, default_value_t = acceptance::SEED)]
        seed: u64,
        #[arg(long, default_value = "tilde.csv")]
        emit: PathBuf,
    },
    /// Run acceptance criteria (all by default).
    #[command(allow_negative_numbers = true)]
    Accept {
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<usize>,
        #[arg(long, default_value = "accept.json")]
        emit: PathBuf,
    },
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn write_sidecar(out: &Path, command: &str, parameters: Value, seed: Option<u64>, tolerances: Value, results: Value) -> Result<()> {
    let meta = json!({
        "versions": { "newton-dual": env!("CARGO_PKG_VERSION"), "format": 1 },
        "command": command,
        "parameters": parameters,
        "seed": seed,
        "tolerances": tolerances,
        "output": out.file_name().map(|s| s.to_string_lossy().into_owned()),
        "results": results,
    });
    std::fs::write(sidecar_path(out), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(())
}

fn write_csv(out: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(out)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Invalid(format!("bad number {t:?} in range {s:?}"))))
        .collect::<Result<_>>()?;
    let [a, b, h] = parts[..] else {
        return Err(Error::Invalid(format!("range must be start:stop:step, got {s:?}")));
    };
    if !(h > 0.0) || !(b >= a) || !(a > 0.0) {
        return Err(Error::Invalid(format!("need 0 < start <= stop and step > 0, got {s:?}")));
    }
    let n = ((b - a) / h + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| a + h * k as f64).collect())
}

fn run(cmd: Command) -> Result<Value> {
    match cmd {
        Command::NewtonRadial { x0, m, samples, emit } => {
            let p = newton_radial::calibrate_with(x0, m, samples)?;
            let rows: Vec<Vec<String>> = (0..p.v.len()).map(|k| vec![num(p.v[k]), num(p.x[k]), num(p.u[k])]).collect();
            write_csv(&emit, &["v", "x", "u"], &rows)?;
            let j = newton_radial::radial_resistance(&p);
            let results = json!({ "p0": p.p0, "v_max": p.v_max, "x_front": p.x_front, "resistance": j });
            write_sidecar(&emit, "newton-radial", json!({ "x0": x0, "M": m, "samples": samples }), None, json!({ "calibration": 1e-10, "quadrature": 1e-14 }), results.clone())?;
            Ok(results)
        }
        Command::HeelSweep { m_range, m_max, emit } => {
            let ms = parse_range(&m_range)?;
            if m_max < 2 {
                return Err(Error::Invalid(format!("--m-max must be at least 2, got {m_max}")));
            }
            let mut rows = Vec::new();
            for &m in &ms {
                let best = heel_front::best_regular(m, m_max)?;
                rows.push(vec![num(m), best.sides.to_string(), num(best.r_star), num(best.j_star)]);
            }
            let (lo, hi) = (ms[0], ms[ms.len() - 1]);
            let transition = heel_front::sweep_transition_with((lo, hi), m_max, heel_front::DEFAULT_N, heel_front::TRANSITION_TOL).ok();
            if let Some(t) = &transition {
                let seg = heel_front::optimize_regular(2, t.m_crit)?;
                rows.push(vec![num(t.m_crit), "M_crit".into(), num(seg.r_star), num(seg.j_star)]);
            }
            write_csv(&emit, &["M", "m", "R*", "J*"], &rows)?;
            let results = json!({ "rows": ms.len(), "transition": transition });
            write_sidecar(
                &emit,
                "heel-sweep",
                json!({ "M": m_range, "m_max": m_max, "panels": heel_front::DEFAULT_N }),
                None,
                json!({ "golden": heel_front::GOLDEN_TOL, "transition": heel_front::TRANSITION_TOL }),
                results.clone(),
            )?;
            Ok(results)
        }
        Command::HeelAudit { sides, m, trials, seed, emit } => {
            let opt = heel_front::optimize_regular(sides, m)?;
            let base = SupportFn::regular(sides, opt.r_star, heel_front::DEFAULT_N)?;
            let audit = heel_front::perturbation_audit(&base, m, trials, seed)?;
            let results = json!({ "base": opt, "audit": audit });
            std::fs::write(&emit, serde_json::to_string_pretty(&results)? + "\n")?;
            write_sidecar(&emit, "heel-audit", json!({ "m": sides, "M": m, "trials": trials }), Some(seed), json!({ "improvement": heel_front::AUDIT_TOL }), Value::Null)?;
            Ok(results)
        }
        Command::MaxwellSolve { m, v0p, step, emit } => {
            let c = mx::symmetric_extremal(m, v0p, step)?;
            let rows: Vec<Vec<String>> = (0..c.p.len()).map(|k| vec![num(c.p[k]), num(c.v[k]), num(c.dv[k])]).collect();
            write_csv(&emit, &["p1", "v", "dv"], &rows)?;
            let results = json!({
                "nodes": c.p.len(),
                "range": c.range(),
                "ends": [c.left, c.right],
                "convex": c.is_convex(1e-12),
                "el_residual": mx::el_residual(&c),
                "resistance": mx::maxwell_resistance(&c)?,
            });
            write_sidecar(&emit, "maxwell-solve", json!({ "M": m, "v0p": v0p, "step": step }), None, json!({ "halving": mx::HALVING_TOL, "singular": mx::SINGULAR_TOL }), results.clone())?;
            Ok(results)
        }
        Command::MaxwellBody { m, v0p, step, rim, emit } => {
            let c = mx::symmetric_extremal(m, v0p, step)?;
            let body = mx::assemble_body(&mx::stratum_from_dual(&c)?, m, rim)?;
            newton_dual::io::write_body(&emit, &body)?;
            let results = json!({ "dual": mx::maxwell_resistance(&c)?, "primal": primal_resistance(&body)? });
            write_sidecar(&emit, "maxwell-body", json!({ "M": m, "v0p": v0p, "step": step, "rim": rim }), None, json!({ "halving": mx::HALVING_TOL }), results.clone())?;
            Ok(results)
        }
        Command::DualityCheck { bodies, seed, emit } => {
            let corpus = Corpus::generate(seed, bodies)?;
            let mut rows = Vec::new();
            let mut worst = 0.0f64;
            for (i, u) in corpus.bodies.iter().enumerate() {
                let jp = primal_resistance(u)?.value;
                let jd = dual_resistance_of(&conjugate(u)?)?.value;
                let gap = (jp - jd).abs() / jp;
                worst = worst.max(gap);
                rows.push(vec![i.to_string(), num(jp), num(jd), num(gap)]);
            }
            write_csv(&emit, &["body", "J", "J*", "rel_gap"], &rows)?;
            let results = json!({ "bodies": bodies, "max_rel_gap": worst, "pass": worst <= 1e-12 });
            write_sidecar(&emit, "duality-check", json!({ "bodies": bodies }), Some(seed), json!({ "rel_gap": 1e-12 }), results.clone())?;
            Ok(results)
        }
        Command::TildeCheck { bodies, seed, emit } => {
            let corpus = Corpus::generate(seed, bodies)?;
            let mut rows = Vec::new();
            let mut worst = f64::NEG_INFINITY;
            for (i, u) in corpus.bodies.iter().enumerate() {
                let m = u.height_cap().unwrap_or(1.0);
                let w = conjugate(u)?;
                let before = dual_resistance_of(&w)?.value;
                let after = dual_resistance_of(&tilde_transform(&w, u.domain(), m)?)?.value;
                worst = worst.max(after - before);
                rows.push(vec![i.to_string(), num(m), num(before), num(after), num(after - before)]);
            }
            write_csv(&emit, &["body", "M", "J*", "J*_tilde", "delta"], &rows)?;
            let results = json!({ "bodies": bodies, "max_delta": worst, "pass": worst <= 1e-12 });
            write_sidecar(&emit, "tilde-check", json!({ "bodies": bodies }), Some(seed), json!({ "increase": 1e-12 }), results.clone())?;
            Ok(results)
        }
        Command::Accept { criteria, emit } => {
            let ids = if criteria.is_empty() { (1..=12).collect() } else { criteria };
            if let Some(bad) = ids.iter().find(|&&i| !(1..=12).contains(&i)) {
                return Err(Error::Invalid(format!("no criterion {bad}")));
            }
            let mut all = Vec::new();
            for id in ids {
                let c = acceptance::run(id);
                eprintln!("{}", c.line());
                all.push(c);
            }
            let unexpected: Vec<usize> = all.iter().filter(|c| !c.pass && !c.known_red).map(|c| c.id).collect();
            std::fs::write(&emit, serde_json::to_string_pretty(&all)? + "\n")?;
            write_sidecar(&emit, "accept", Value::Null, Some(acceptance::SEED), Value::Null, json!({ "unexpected_failures": unexpected }))?;
            if !unexpected.is_empty() {
                return Err(Error::IllPosed(format!("unexpected acceptance failures: {unexpected:?}")));
            }
            Ok(json!({ "criteria": all.len(), "unexpected_failures": unexpected }))
        }
    }
}

fn fail(code: &str, context: impl Into<Value>) -> ExitCode {
    eprintln!("{}", json!({ "error": code, "context": context.into() }));
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", e.to_string().trim().to_string()),
    };
    match run(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => fail(e.code(), e.to_string()),
    }
}
