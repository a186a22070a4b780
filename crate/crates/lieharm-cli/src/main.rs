//! `lieharm` — analyze and solve systems of left-invariant operators on
//! `T^r x (S^3)^s` from the command line.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lieharm_core::analysis::{
    classify, dc_scan_with, dc_witness_search_with, zset_scan_with, ClassifyOptions, Status,
    Verdict, WitnessStrategy,
};
use lieharm_core::coeffs::{
    apply, decay_fit_with, field_to_jsonl, read_field, synth, write_field,
    CoeffField, SynthProfile, DEFAULT_PROBE_ORDER,
};
use lieharm_core::oracle::numeric_generator_action;
use lieharm_core::opalg::GenKind;
use lieharm_core::solve::{
    compat_check, counterexample_kernel, counterexample_smooth_rhs, counterexample_unsolvable,
    solve_diagonal, solve_triangular, SolveMode, TriangularDiag, RESIDUAL_TOL,
};
use lieharm_core::symbols::generator_symbol;
use lieharm_core::{parse_system, GroupSpec, SystemDef};
use serde_json::json;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "lieharm",
    about = "Symbol calculus, hypoellipticity/solvability analysis, and spectral solvers on T^r x (S^3)^s",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct AnalysisArgs {
    /// Path to the operator-system definition file.
    #[arg(long)]
    system: PathBuf,
    /// Weight truncation of the dual (denominator bound for the
    /// continued-fraction witness strategy).
    #[arg(long, default_value_t = 30.0)]
    cap: f64,
    /// Require exact arithmetic for zero tests and certificates.
    #[arg(long)]
    exact: bool,
    /// Zero tolerance for float-mode tests.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Emit the machine-readable JSON report.
    #[arg(long)]
    json: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Expected verdicts, e.g. --expect gh=holds --expect gs=fails;
    /// exit code 1 when unmet.
    #[arg(long)]
    expect: Vec<String>,
    /// Witness escalation targets (chain length).
    #[arg(long, default_value_t = 3)]
    witness_targets: usize,
    /// Slack in the witness gate: e_n >= n - slack.
    #[arg(long, default_value_t = 0.05)]
    witness_slack: f64,
    /// Assert the bounded-dimension constant d_G (triangular verdicts).
    #[arg(long)]
    bd_bound: Option<usize>,
    /// Assert a uniform bound on strictly-lower symbol entries.
    #[arg(long)]
    nilpotent_bound: Option<f64>,
}

impl AnalysisArgs {
    fn options(&self) -> ClassifyOptions {
        ClassifyOptions {
            require_exact: self.exact,
            witness_targets: self.witness_targets,
            witness_slack: self.witness_slack,
            bd_bound: self.bd_bound,
            nilpotent_bound: self.nilpotent_bound,
            zero_tol: self.tol,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Shell,
    Cf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Distributional,
    Smooth,
}

#[derive(Clone, Copy, ValueEnum)]
enum CexKind {
    Kernel,
    Unsolvable,
    SmoothRhs,
}

#[derive(Subcommand)]
enum Command {
    /// Full verdict: structure, kernel set, Diophantine condition, witnesses.
    Classify(AnalysisArgs),
    /// Kernel-set scan with structural certificate.
    Zset(AnalysisArgs),
    /// Shell minima of the largest diagonal entry, fitted floor, certificate.
    Dcscan(AnalysisArgs),
    /// Witness search for Diophantine-condition failure.
    Witness {
        #[command(flatten)]
        common: AnalysisArgs,
        #[arg(long, value_enum, default_value_t = StrategyArg::Shell)]
        strategy: StrategyArg,
    },
    /// Solve P u = f frequency by frequency.
    Solve {
        #[arg(long)]
        system: PathBuf,
        /// One coefficient file per operator, in order.
        #[arg(long, required = true, num_args = 1..)]
        rhs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Distributional)]
        mode: ModeArg,
        /// Use triangular back-substitution with these scanned constants.
        #[arg(long)]
        triangular: bool,
        #[arg(long, default_value_t = 1e6)]
        c_sigma: f64,
        #[arg(long, default_value_t = 4.0)]
        n_sigma: f64,
        #[arg(long, default_value_t = 64)]
        d_bound: usize,
        #[arg(long)]
        json: bool,
    },
    /// Apply the system to a coefficient field: writes one file per operator.
    Apply {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, name = "in")]
        input: PathBuf,
        /// Output path; for multi-operator systems `.N` is inserted before
        /// the extension.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a deterministic synthetic coefficient field.
    Synth {
        /// Group spec text, e.g. T^2xS3^1.
        #[arg(long)]
        group: String,
        /// Profile: exp-decay:RATE, poly-decay:N, or poly-growth:N.
        #[arg(long)]
        profile: String,
        #[arg(long, default_value_t = 10.0)]
        cap: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also run the decay fit on the result.
        #[arg(long)]
        fit: bool,
        #[arg(long, default_value_t = DEFAULT_PROBE_ORDER)]
        probe: u32,
        #[arg(long)]
        json: bool,
    },
    /// Check the compatibility relations of right-hand sides.
    Compat {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, required = true, num_args = 1..)]
        rhs: Vec<PathBuf>,
        #[arg(long, default_value_t = RESIDUAL_TOL)]
        tol: f64,
        #[arg(long)]
        json: bool,
    },
    /// Conformance table: ladder symbols vs finite-difference oracle.
    Oracle {
        /// Largest representation parameter l (table covers l = 0..=ell-max).
        #[arg(long, default_value_t = 3.0)]
        ell_max: f64,
        #[arg(long, default_value_t = 1e-5)]
        step: f64,
        #[arg(long)]
        json: bool,
    },
    /// Counterexample constructions from the proofs.
    Counterexample {
        #[arg(value_enum)]
        kind: CexKind,
        #[command(flatten)]
        common: AnalysisArgs,
        /// Number of kernel hits to place (kernel kind).
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, value_enum, default_value_t = StrategyArg::Cf)]
        strategy: StrategyArg,
    },
}

fn load_system(path: &Path) -> Result<SystemDef> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read system file {}", path.display()))?;
    Ok(parse_system(&text)?)
}

fn emit(report: &serde_json::Value, text: String, json: bool, out: &Option<PathBuf>) -> Result<()> {
    let body = if json {
        let mut s = serde_json::to_string(report)?;
        s.push('\n');
        s
    } else {
        text
    };
    match out {
        Some(path) => std::fs::write(path, body)?,
        None => print!("{body}"),
    }
    Ok(())
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Holds => "holds",
        Status::Fails => "fails",
        Status::ConsistentUpToCap => "consistent-up-to-cap",
        Status::Unknown => "unknown",
    }
}

fn check_expectations(expect: &[String], verdict: &Verdict) -> Result<bool> {
    let mut ok = true;
    for e in expect {
        let (key, want) = e
            .split_once('=')
            .ok_or_else(|| anyhow!("bad --expect `{e}` (use gh=holds etc.)"))?;
        let got = match key {
            "gh" => verdict.gh,
            "gs" => verdict.gs,
            other => bail!("unknown --expect key `{other}`"),
        };
        if status_name(got) != want.to_lowercase() {
            eprintln!("expectation unmet: {key}={want}, got {}", status_name(got));
            ok = false;
        }
    }
    Ok(ok)
}

fn render_verdict(v: &Verdict) -> String {
    let mut s = String::new();
    s.push_str(&format!("structure: {:?}\n", v.structure));
    s.push_str(&format!("GH: {}\n", status_name(v.gh)));
    s.push_str(&format!("GS: {}\n", status_name(v.gs)));
    s.push_str(&format!(
        "Z-set: {} scanned hit(s), structural {:?}\n",
        v.zset.hits.len(),
        variant_name(&v.zset.structural)
    ));
    s.push_str(&format!(
        "DC: global min {:.6e}, fitted floor {:.4e} * w^({:.3})\n",
        v.dc.global_min, v.dc.fitted_c, -v.dc.fitted_m
    ));
    if let Some(c) = &v.dc.certificate {
        s.push_str(&format!(
            "certificate: {:?}, C = {:.6e}, exponent {}\n",
            c.kind, c.floor_constant, c.exponent
        ));
    }
    if let Some(w) = &v.dc.violations {
        s.push_str(&format!(
            "witnesses: {} entries, exponents {:?}\n",
            w.entries.len(),
            w.entries.iter().map(|e| (e.exponent * 1e4).round() / 1e4).collect::<Vec<_>>()
        ));
    }
    for n in &v.notes {
        s.push_str(&format!("note: {n}\n"));
    }
    s
}

fn variant_name(z: &lieharm_core::analysis::ZsetStructural) -> &'static str {
    use lieharm_core::analysis::ZsetStructural::*;
    match z {
        EmptyCertified => "EmptyCertified",
        FiniteCertified { .. } => "FiniteCertified",
        InfiniteCertified { .. } => "InfiniteCertified",
        TruncationOnly => "TruncationOnly",
    }
}

fn parse_profile(text: &str) -> Result<SynthProfile> {
    let (kind, val) = text
        .split_once(':')
        .ok_or_else(|| anyhow!("profile must be kind:value, e.g. poly-decay:6"))?;
    let v: f64 = val.parse().context("profile value")?;
    Ok(match kind {
        "exp-decay" => SynthProfile::ExpDecay { rate: v },
        "poly-decay" => SynthProfile::PolyDecay { order: v },
        "poly-growth" => SynthProfile::PolyGrowth { order: v },
        other => bail!("unknown profile kind `{other}`"),
    })
}

fn numbered_out(path: &Path, index: usize, total: usize) -> PathBuf {
    if total == 1 {
        return path.to_path_buf();
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("jsonl");
    path.with_file_name(format!("{stem}.{}.{ext}", index + 1))
}

fn run() -> Result<i32> {
    if let Ok(threads) = std::env::var("LIEHARM_THREADS") {
        let n: usize = threads.parse().unwrap_or(0);
        if n > 0 {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
        }
    }
    let cli = Cli::parse();
    match cli.command {
        Command::Classify(args) => {
            let sys = load_system(&args.system)?;
            let verdict = classify(&sys, args.cap, &args.options())?;
            let report = json!({
                "kind": "classify-report",
                "group": sys.group.text(),
                "cap": args.cap,
                "verdict": verdict,
            });
            emit(&report, render_verdict(&verdict), args.json, &args.out)?;
            if !check_expectations(&args.expect, &verdict)? {
                return Ok(1);
            }
            Ok(0)
        }
        Command::Zset(args) => {
            let sys = load_system(&args.system)?;
            let rep = zset_scan_with(&sys, args.cap, &args.options())?;
            let text = format!(
                "{} hit(s) within cap {}, structural {}\n{}",
                rep.hits.len(),
                args.cap,
                variant_name(&rep.structural),
                rep.hits
                    .iter()
                    .map(|h| format!("  {} slot {:?}\n", h.freq, h.slot.sphere2n))
                    .collect::<String>()
            );
            let report = json!({"kind": "zset-report", "group": sys.group.text(), "report": rep});
            emit(&report, text, args.json, &args.out)?;
            Ok(0)
        }
        Command::Dcscan(args) => {
            let sys = load_system(&args.system)?;
            let rep = dc_scan_with(&sys, args.cap, &args.options())?;
            let mut text = format!(
                "global min {:.6e}; fitted floor {:.4e} * w^({:.3})\n",
                rep.global_min, rep.fitted_c, -rep.fitted_m
            );
            for s in &rep.shells {
                text.push_str(&format!(
                    "  shell 2^{}..2^{}: {} slots, min {:.6e} at {} (w = {:.3})\n",
                    s.shell,
                    s.shell + 1,
                    s.count,
                    s.min,
                    s.min_freq,
                    s.min_weight
                ));
            }
            if let Some(c) = &rep.certificate {
                text.push_str(&format!(
                    "certificate {:?}: C = {:.6e}, exponent {}\n",
                    c.kind, c.floor_constant, c.exponent
                ));
            }
            let report = json!({"kind": "dc-report", "group": sys.group.text(), "report": rep});
            emit(&report, text, args.json, &args.out)?;
            Ok(0)
        }
        Command::Witness { common: args, strategy } => {
            let sys = load_system(&args.system)?;
            let strat = match strategy {
                StrategyArg::Shell => WitnessStrategy::ShellScan,
                StrategyArg::Cf => WitnessStrategy::ContinuedFraction,
            };
            let found = dc_witness_search_with(&sys, args.cap, strat, &args.options())?;
            let text = match &found {
                Some(seq) => format!(
                    "witness chain of {} entries; exponents {:?}\n",
                    seq.entries.len(),
                    seq.entries.iter().map(|w| w.exponent).collect::<Vec<_>>()
                ),
                None => "no witness chain within the configured targets\n".into(),
            };
            let report =
                json!({"kind": "witness-report", "group": sys.group.text(), "witness": found});
            emit(&report, text, args.json, &args.out)?;
            for e in &args.expect {
                match e.as_str() {
                    "found" if report["witness"].is_null() => return Ok(1),
                    "none" if !report["witness"].is_null() => return Ok(1),
                    _ => {}
                }
            }
            Ok(0)
        }
        Command::Solve { system, rhs, out, mode, triangular, c_sigma, n_sigma, d_bound, json } => {
            let sys = load_system(&system)?;
            let fields: Vec<CoeffField> =
                rhs.iter().map(read_field).collect::<Result<_, _>>()?;
            let (u, extra) = if triangular {
                let diag = TriangularDiag::new(c_sigma, n_sigma, d_bound)?;
                let outp = solve_triangular(&sys, &fields, &diag)?;
                (outp.u, json!({"max_amplification_ratio": outp.max_amplification_ratio}))
            } else {
                let m = match mode {
                    ModeArg::Distributional => SolveMode::Distributional,
                    ModeArg::Smooth => SolveMode::Smooth,
                };
                let outp = solve_diagonal(&sys, &fields, m)?;
                (outp.u, json!({"decay": outp.decay}))
            };
            write_field(&u, &out)?;
            if json {
                println!(
                    "{}",
                    json!({"kind": "solve-report", "out": out.display().to_string(), "info": extra})
                );
            } else {
                println!("solution written to {}", out.display());
            }
            Ok(0)
        }
        Command::Apply { system, input, out } => {
            let sys = load_system(&system)?;
            let u = read_field(&input)?;
            let fields = apply(&sys, &u)?;
            let total = fields.len();
            for (j, f) in fields.iter().enumerate() {
                let path = numbered_out(&out, j, total);
                write_field(f, &path)?;
                println!("wrote {}", path.display());
            }
            Ok(0)
        }
        Command::Synth { group, profile, cap, seed, out, fit, probe, json } => {
            let g = GroupSpec::parse(&group)?;
            let prof = parse_profile(&profile)?;
            let field = synth(&g, prof, cap, seed)?;
            let est = if fit { Some(decay_fit_with(&field, cap, probe)?) } else { None };
            match &out {
                Some(path) => write_field(&field, path)?,
                None => print!("{}", field_to_jsonl(&field)),
            }
            if let Some(est) = est {
                if json {
                    println!("{}", json!({"kind": "decay-report", "estimate": est}));
                } else {
                    eprintln!(
                        "decay fit: order {:.3}, {} shells, class {:?}",
                        est.fitted_order, est.shells_used, est.classification
                    );
                }
            }
            Ok(0)
        }
        Command::Compat { system, rhs, tol, json } => {
            let sys = load_system(&system)?;
            let fields: Vec<CoeffField> =
                rhs.iter().map(read_field).collect::<Result<_, _>>()?;
            let rep = compat_check(&sys, &fields, tol)?;
            if json {
                println!("{}", json!({"kind": "compat-report", "report": rep}));
            } else if rep.ok {
                println!("compatible: all relations hold within tol {tol:e}");
            } else {
                println!("{} violation(s):", rep.violations.len());
                for v in &rep.violations {
                    println!("  {} {:?} magnitude {:.3e}", v.freq, v.relation, v.magnitude);
                }
            }
            Ok(if rep.ok { 0 } else { 1 })
        }
        Command::Oracle { ell_max, step, json } => {
            let group = GroupSpec::new(0, 1)?;
            let kinds =
                [GenKind::D0, GenKind::Dplus, GenKind::Dminus, GenKind::D1, GenKind::D2, GenKind::D3];
            let mut rows = Vec::new();
            let mut overall = 0.0f64;
            let max2l = (2.0 * ell_max).round() as i64;
            for two_ell in 0..=max2l {
                for kind in kinds {
                    let num = numeric_generator_action(kind, two_ell, step)?;
                    let sym = match kind {
                        GenKind::D0 | GenKind::Dplus | GenKind::Dminus => {
                            generator_symbol(
                                &group,
                                lieharm_core::opalg::Generator { kind, factor: 1 },
                                &lieharm_core::Frequency::new(vec![], vec![two_ell]),
                            )?
                            .entries
                        }
                        // real fields through their ladder definitions
                        _ => {
                            let sys_text = match kind {
                                GenKind::D1 => "group S3^1\nP1 = D1_1\n",
                                GenKind::D2 => "group S3^1\nP1 = D2_1\n",
                                _ => "group S3^1\nP1 = D3_1\n",
                            };
                            let sys = parse_system(sys_text)?;
                            lieharm_core::symbols::symbol(
                                &group,
                                &sys.ops[0].1,
                                &lieharm_core::Frequency::new(vec![], vec![two_ell]),
                            )?
                            .entries
                        }
                    };
                    let resid =
                        (num - sym).iter().map(|z| z.norm()).fold(0.0, f64::max);
                    overall = overall.max(resid);
                    rows.push((kind, two_ell, resid));
                }
            }
            if json {
                let table: Vec<serde_json::Value> = rows
                    .iter()
                    .map(|(k, l, r)| json!({"generator": k.name(), "two_ell": l, "residual": r}))
                    .collect();
                println!(
                    "{}",
                    json!({"kind": "oracle-report", "step": step, "max_residual": overall, "table": table})
                );
            } else {
                println!("generator   2l   max residual");
                for (k, l, r) in &rows {
                    println!("{:<10} {:>3}   {:.3e}", k.name(), l, r);
                }
                println!("overall max residual: {overall:.3e}");
            }
            Ok(0)
        }
        Command::Counterexample { kind, common: args, count, strategy } => {
            let sys = load_system(&args.system)?;
            let out = args.out.clone().unwrap_or_else(|| PathBuf::from("counterexample.jsonl"));
            match kind {
                CexKind::Kernel => {
                    let z = zset_scan_with(&sys, args.cap, &args.options())?;
                    let u = counterexample_kernel(&sys, &z, count)?;
                    write_field(&u, &out)?;
                    println!("kernel distribution with {count} hit(s) written to {}", out.display());
                }
                CexKind::Unsolvable | CexKind::SmoothRhs => {
                    let strat = match strategy {
                        StrategyArg::Shell => WitnessStrategy::ShellScan,
                        StrategyArg::Cf => WitnessStrategy::ContinuedFraction,
                    };
                    let w = dc_witness_search_with(&sys, args.cap, strat, &args.options())?
                        .ok_or_else(|| anyhow!("no witness chain found up to cap {}", args.cap))?;
                    let (fields, forced) = match kind {
                        CexKind::Unsolvable => {
                            let c = counterexample_unsolvable(&sys, &w)?;
                            (c.rhs, c.forced)
                        }
                        _ => {
                            let c = counterexample_smooth_rhs(&sys, &w)?;
                            (c.rhs, c.forced)
                        }
                    };
                    let total = fields.len();
                    for (j, f) in fields.iter().enumerate() {
                        let path = numbered_out(&out, j, total);
                        write_field(f, &path)?;
                        println!("wrote {}", path.display());
                    }
                    println!(
                        "forced solution values: {:?}",
                        forced.iter().map(|f| f.value).collect::<Vec<_>>()
                    );
                }
            }
            Ok(0)
        }
    }
}

fn main() {
    match run() {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}
