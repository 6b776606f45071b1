use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use canard::config::{ModelKind, OwnedModel, RunConfig, SweepSpec};
use canard::cycles::{self, CycleReport, LienardPhiSystem, SweepFamily};
use canard::lienard::{find_sdi_zeros, SdiProfile};
use canard::report::{float17, json_document, write_text, Csv, Plot};
use canard::transition::validate_transition;
use canard::{verify, Error, Result};

/// Palette for orbit overlays, cycled by index.
const ORBIT_COLORS: [&str; 5] = ["#d73030", "#3050d0", "#2a9d50", "#b06020", "#7040c0"];

#[derive(Parser)]
#[command(
    name = "canard",
    version,
    about = "Planar slow-fast models with prescribed transition functions: \
             construction, divergence-integral analysis, and limit cycle detection"
)]
struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory (overrides the config file and CANARD_OUT_DIR).
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the model, validate its transition function, and emit
    /// coefficients, samples, and a plot.
    Construct {
        /// Model family, hopf or jump.
        #[arg(long)]
        kind: Option<ModelKind>,
    },
    /// Sample the slow divergence integral and certify its zeros.
    Sdi {
        #[arg(long)]
        kind: Option<ModelKind>,
        /// Exit nonzero unless exactly one zero is found per seed.
        #[arg(long)]
        expect_seeds: bool,
    },
    /// Sweep the breaking parameter and report hyperbolic limit cycles.
    Cycles {
        #[arg(long)]
        kind: Option<ModelKind>,
        /// Epsilon values (comma separated) overriding the config list.
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
        /// Sweep range lo:hi:n; a leading name= prefix is accepted.
        #[arg(long)]
        sweep: Option<SweepSpec>,
        /// Report format; json is the only supported value.
        #[arg(long, default_value = "json")]
        out: String,
        /// Also dump each detected orbit as a table; csv is the only
        /// supported value.
        #[arg(long, value_name = "FORMAT")]
        emit_orbits: Option<String>,
        /// Compare detected cycles against divergence-integral predictions.
        #[arg(long = "match")]
        match_zeros: bool,
    },
    /// Run the built-in invariant suite and report each check.
    Verify {
        /// Include the slow cycle-pair detection check.
        #[arg(long)]
        full: bool,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match &e {
                Error::Config(_) | Error::InvalidParameter { .. } => 2,
                _ => 1,
            };
            std::process::exit(code);
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Ok(dir) = std::env::var("CANARD_OUT_DIR") {
        if !dir.is_empty() {
            cfg.out_dir = PathBuf::from(dir);
        }
    }
    if let Some(dir) = &cli.out_dir {
        cfg.out_dir = dir.clone();
    }

    match cli.cmd {
        Cmd::Construct { kind } => {
            if let Some(k) = kind {
                cfg.kind = k;
            }
            cfg.validate()?;
            cmd_construct(&cfg)
        }
        Cmd::Sdi { kind, expect_seeds } => {
            if let Some(k) = kind {
                cfg.kind = k;
            }
            cfg.validate()?;
            cmd_sdi(&cfg, expect_seeds)
        }
        Cmd::Cycles {
            kind,
            eps,
            sweep,
            out,
            emit_orbits,
            match_zeros,
        } => {
            if let Some(k) = kind {
                cfg.kind = k;
            }
            if !eps.is_empty() {
                cfg.eps = eps;
            }
            if let Some(s) = sweep {
                cfg.sweep = s;
            }
            if out != "json" {
                return Err(Error::Config(format!(
                    "unsupported report format {out:?}, only json"
                )));
            }
            let orbit_csv = match emit_orbits.as_deref() {
                None => false,
                Some("csv") => true,
                Some(other) => {
                    return Err(Error::Config(format!(
                        "unsupported orbit format {other:?}, only csv"
                    )))
                }
            };
            cfg.validate()?;
            cmd_cycles(&cfg, orbit_csv, match_zeros)
        }
        Cmd::Verify { full } => {
            cfg.validate()?;
            cmd_verify(&cfg, full)
        }
    }
}

fn out_path(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.out_dir.join(name)
}

fn model_coefficients(model: &OwnedModel, cfg: &RunConfig) -> serde_json::Value {
    match model {
        OwnedModel::Hopf(m) => json!({
            "kind": "hopf",
            "delta": m.delta(),
            "seeds": m.seeds(),
            "c_plus": m.c_plus(),
            "c_minus": m.c_minus(),
            "rho": m.rho(),
            "critical_curve": m.f_poly().coeffs(),
            "odd_part": m.f_odd_poly().coeffs(),
            "core": m.core_poly().coeffs(),
        }),
        OwnedModel::Jump(m) => json!({
            "kind": "jump",
            "eta": m.eta(),
            "b": cfg.b,
            "delta": m.delta(),
            "seeds": m.seeds(),
            "c_plus": m.c_plus(),
            "c_minus": m.c_minus(),
            "rho": m.rho(),
            "even_part": m.p_e_poly().coeffs(),
            "odd_tilde": m.p_tilde_poly().coeffs(),
        }),
    }
}

fn cmd_construct(cfg: &RunConfig) -> Result<i32> {
    let model = cfg.model()?;
    let spec = model.transition()?;
    let report = validate_transition(&spec);
    let kind = model.kind();

    let doc = json!({
        "model": model_coefficients(&model, cfg),
        "validation": report,
    });
    let json_path = out_path(cfg, &format!("model_{kind}.json"));
    write_text(&json_path, &json_document("model/1", &doc)?)?;

    let mut table = Csv::new(&["x", "phi", "dphi", "d2phi"]);
    let n = 480;
    for j in 0..=n {
        let x = -1.2 + 2.4 * j as f64 / n as f64;
        let (p, d1, d2) = spec.eval012(x);
        table.row(&[x, p, d1, d2]);
    }
    let csv_path = out_path(cfg, &format!("transition_{kind}.csv"));
    write_text(&csv_path, &table.finish())?;

    let mut plot = Plot::new(&format!("transition function, {kind} family"));
    let pts: Vec<[f64; 2]> = (0..=n)
        .map(|j| {
            let x = -1.2 + 2.4 * j as f64 / n as f64;
            [x, spec.eval(x)]
        })
        .collect();
    plot.line(&pts, "#3050d0");
    plot.mark(-1.0, -1.0, "#222222");
    plot.mark(1.0, 1.0, "#222222");
    for &c in &spec.critical_points {
        plot.mark(c, spec.eval(c), "#d73030");
    }
    let svg_path = out_path(cfg, &format!("transition_{kind}.svg"));
    write_text(&svg_path, &plot.render())?;

    println!(
        "construct: kind={kind} critical_points={} boundary_exact={} monotonic={} pass={}",
        report.interior_critical_count, report.boundary_exact, report.monotonic, report.pass
    );
    println!("  wrote {}", json_path.display());
    println!("  wrote {}", csv_path.display());
    println!("  wrote {}", svg_path.display());

    if !report.pass {
        eprintln!("construct: transition validation failed");
        return Ok(1);
    }
    Ok(0)
}

fn sdi_outputs(cfg: &RunConfig, profile: &SdiProfile, kind: ModelKind) -> Result<()> {
    let mut table = Csv::new(&["x", "value"]);
    for s in &profile.samples {
        table.row(&[s.x, s.value]);
    }
    write_text(&out_path(cfg, &format!("sdi_{kind}.csv")), &table.finish())?;

    let mut zeros = Csv::new(&["x", "slope", "simple"]);
    for z in &profile.zeros {
        zeros.raw_row(&[
            float17(z.x),
            float17(z.slope),
            if z.simple { "true" } else { "false" }.to_string(),
        ]);
    }
    write_text(
        &out_path(cfg, &format!("sdi_zeros_{kind}.csv")),
        &zeros.finish(),
    )?;

    let mut plot = Plot::new(&format!("slow divergence integral, {kind} family"));
    let pts: Vec<[f64; 2]> = profile.samples.iter().map(|s| [s.x, s.value]).collect();
    plot.line(&pts, "#2a9d50");
    for z in &profile.zeros {
        plot.mark(z.x, 0.0, "#d73030");
    }
    write_text(&out_path(cfg, &format!("sdi_{kind}.svg")), &plot.render())?;
    Ok(())
}

fn cmd_sdi(cfg: &RunConfig, expect_seeds: bool) -> Result<i32> {
    let model = cfg.model()?;
    let profile = find_sdi_zeros(model.as_ref(), cfg.interval, cfg.n_grid)?;
    let kind = model.kind();
    sdi_outputs(cfg, &profile, kind)?;

    println!(
        "sdi: kind={kind} domain=[{:.6}, {:.6}] max|I|={:.6e} zeros={}",
        profile.domain.0,
        profile.domain.1,
        profile.max_abs,
        profile.zeros.len()
    );
    for z in &profile.zeros {
        println!(
            "  zero at x={:.12} slope={:.6e} simple={}",
            z.x, z.slope, z.simple
        );
    }

    if expect_seeds {
        let want = cfg.effective_seeds().len();
        let got = profile.zeros.len();
        if got != want {
            eprintln!("sdi: expected {want} zeros (one per seed), found {got}");
            return Ok(1);
        }
    }
    Ok(0)
}

fn orbit_plot(cfg: &RunConfig, model: &OwnedModel, rep: &CycleReport, eps: f64) -> Result<PathBuf> {
    let kind = model.kind();
    let sys = match model {
        OwnedModel::Hopf(m) => LienardPhiSystem::hopf(m, rep.breaking, eps)?,
        OwnedModel::Jump(m) => LienardPhiSystem::jump(m, rep.breaking, eps)?,
    };
    let mut plot = Plot::new(&format!("orbits over the critical curve, {kind} eps={eps}"));
    let n = 420;
    let curve: Vec<[f64; 2]> = (0..=n)
        .map(|j| {
            let x = -1.05 + 2.1 * j as f64 / n as f64;
            [x, sys.f_eff(x)]
        })
        .collect();
    plot.line_width(&curve, "#888888", 1.0);
    for (i, fp) in rep.fixed_points.iter().enumerate() {
        plot.line(&fp.orbit, ORBIT_COLORS[i % ORBIT_COLORS.len()]);
        plot.mark(0.0, fp.y, ORBIT_COLORS[i % ORBIT_COLORS.len()]);
    }
    let path = out_path(cfg, &format!("orbits_{kind}_eps{eps}.svg"));
    write_text(&path, &plot.render())?;
    Ok(path)
}

fn cmd_cycles(cfg: &RunConfig, orbit_csv: bool, match_zeros: bool) -> Result<i32> {
    let model = cfg.model()?;
    let kind = model.kind();
    let family = match &model {
        OwnedModel::Hopf(m) => SweepFamily::Hopf(m),
        OwnedModel::Jump(m) => SweepFamily::Jump(m),
    };
    let profile = if match_zeros {
        Some(find_sdi_zeros(model.as_ref(), cfg.interval, cfg.n_grid)?)
    } else {
        None
    };

    for &eps in &cfg.eps {
        let rep = cycles::sweep_breaking(
            family,
            eps,
            (cfg.sweep.lo, cfg.sweep.hi),
            cfg.sweep.n,
            &cfg.integrator,
        )?;

        let json_path = out_path(cfg, &format!("cycles_{kind}_eps{eps}.json"));
        write_text(&json_path, &json_document("cycle-report/1", &rep)?)?;
        let svg_path = orbit_plot(cfg, &model, &rep, eps)?;

        println!(
            "cycles: kind={kind} eps={eps} breaking={:.9e} fixed_points={} hyperbolic={}",
            rep.breaking,
            rep.fixed_points.len(),
            rep.hyperbolic_count()
        );
        for fp in &rep.fixed_points {
            println!(
                "  y={:.12} multiplier={:.6} residual={:.3e} hyperbolic={} in_stripe={}",
                fp.y, fp.multiplier, fp.residual, fp.hyperbolic, fp.in_stripe
            );
        }
        println!("  wrote {}", json_path.display());
        println!("  wrote {}", svg_path.display());

        if orbit_csv {
            for (i, fp) in rep.fixed_points.iter().enumerate() {
                let mut table = Csv::new(&["x", "y"]);
                for p in &fp.orbit {
                    table.row(&[p[0], p[1]]);
                }
                let path = out_path(cfg, &format!("orbit_{kind}_eps{eps}_{i}.csv"));
                write_text(&path, &table.finish())?;
                println!("  wrote {}", path.display());
            }
        }

        if let Some(profile) = &profile {
            let table = cycles::match_predictions(&rep, profile, model.as_ref());
            let path = out_path(cfg, &format!("match_{kind}_eps{eps}.json"));
            write_text(&path, &json_document("match-table/1", &table)?)?;
            println!(
                "  match: rows={} zero_count={} count_consistent={}",
                table.rows.len(),
                table.zero_count,
                table.count_consistent
            );
            for r in &table.rows {
                println!(
                    "    y={:.9} predicted_height={:.9} rel_gap={:.4} hyperbolic={}",
                    r.y_star, r.predicted_height, r.rel_gap, r.hyperbolic
                );
            }
            println!("  wrote {}", path.display());
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct VerifyDoc {
    passed: usize,
    failed: usize,
    checks: Vec<verify::CheckResult>,
}

fn cmd_verify(cfg: &RunConfig, full: bool) -> Result<i32> {
    let checks = if full {
        verify::run_full()?
    } else {
        verify::run_quick()?
    };
    let failed = checks.iter().filter(|c| !c.passed).count();
    for c in &checks {
        println!(
            "[{}] {}: measured={:.6e} bound={:.6e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.bound
        );
        if !c.detail.is_empty() {
            println!("       {}", c.detail);
        }
    }
    let doc = VerifyDoc {
        passed: checks.len() - failed,
        failed,
        checks,
    };
    let path = out_path(cfg, "verify.json");
    write_text(&path, &json_document("verify-report/1", &doc)?)?;
    println!(
        "verify: {} checks, {} failed, wrote {}",
        doc.passed + doc.failed,
        doc.failed,
        path.display()
    );
    Ok(if failed > 0 { 1 } else { 0 })
}
