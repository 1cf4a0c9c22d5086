//! Command-line front end for `vdp-core`: builds bundles, integrates, verifies
//! and writes JSON/CSV artifacts.
//!
//! Exit codes: 0 success, 1 usage, 2 parse or evaluation error, 3 a
//! verification threshold was exceeded (artifacts are still written).

pub mod args;
pub mod formats;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use vdp_core::catalog::{case1, case2, case3, CatalogError, ClosedFormSolution, KSign};
use vdp_core::colehopf::{
    audit_grid, example1_audit, seeded_construction, solve_chain, verify_annihilation, verify_printed_coeffs,
    AnnihilationReport, Branch, TransformBundle, ANNIHILATION_TOL,
};
use vdp_core::expr::{parse, EvalError, Expr, ParamEnv, ParseError};
use vdp_core::ledger::DiscrepancyLedger;
use vdp_core::lienard::{build_lienard, riccati_u};
use vdp_core::odesolve::{
    cole_hopf_map, linearize, residual, Grid, IntegratorConfig, OdeError, ResidualReport, SolveOptions, Trajectory,
};
use vdp_core::params::{VdpParams, ALPHA, BETA, MU};

use args::{Command, Common, Format, LienardArgs, RunConfig, Sign};
use formats::{
    ledger_docs, trajectory_csv, AnnihilationDoc, BundleDoc, CheckDoc, LienardDoc, ReportDoc, ResidualDoc,
    TrajectoryDoc,
};

/// Largest accepted residual of the nonlinear equation along a solution.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Largest accepted `|phi'' - U phi| / max(1, |phi|)` for a closed-form basis,
/// and largest accepted `|b0|` under `--riccati`.
pub const BASIS_RESIDUAL_TOL: f64 = 1e-9;
/// Largest sample spacing used for residuals. The five-point stencil error
/// grows like `h^4`; at this spacing it stays well below [`RESIDUAL_TOL`]
/// for moderately varying solutions.
pub const RESIDUAL_SPACING: f64 = 1e-3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) | CliError::Io { .. } => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<CatalogError> for CliError {
    fn from(e: CatalogError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<OdeError> for CliError {
    fn from(e: OdeError) -> Self {
        match e {
            OdeError::InvalidGrid(_) | OdeError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            OdeError::SegmentTooShort | OdeError::DisjointSegments => CliError::Verification(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code. Diagnostics go to stderr, a short summary to stdout.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(argv) {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cfg) {
        Ok(summary) => {
            print!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("vdp {}: {e}", cfg.command.name());
            e.exit_code()
        }
    }
}

/// Runs one configuration. On success returns the stdout summary.
pub fn execute(cfg: &RunConfig) -> Result<String, CliError> {
    let c = &cfg.common;
    let opts = solve_options(c)?;
    let params = VdpParams::new(c.mu, c.beta, c.alpha);
    let run = match &cfg.command {
        Command::Case1 { k_sign } => {
            let k = match k_sign {
                Sign::Plus => KSign::Plus,
                Sign::Minus => KSign::Minus,
            };
            catalog_run(case1(params, k)?, c, &opts)?
        }
        Command::Case2 => catalog_run(case2(params)?, c, &opts)?,
        Command::Case3 => catalog_run(case3(params, c.c)?, c, &opts)?,
        Command::Custom { p } => {
            let p = user_expr("P", p, c)?;
            numeric(solve_chain(&p, params), &opts)?
        }
        Command::Seeded { s, branch } => {
            let seed = user_expr("s", s, c)?;
            let branch = match branch {
                Sign::Plus => Branch::Plus,
                Sign::Minus => Branch::Minus,
            };
            let mut bundle = seeded_construction(&seed, params, branch);
            if branch == Branch::Plus && parse(s).ok() == parse("a*x").ok() {
                bundle.ledger.extend(example1_audit(&bundle, c.a, &audit_grid()));
            }
            numeric(bundle, &opts)?
        }
        Command::Lienard(l) => lienard_run(l, c, &opts)?,
        Command::Verify { bundle } => {
            let text = fs::read_to_string(bundle).map_err(|source| CliError::Io { path: bundle.clone(), source })?;
            let doc: BundleDoc =
                serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", bundle.display())))?;
            let b = doc.to_bundle().map_err(|(field, e)| CliError::Input(format!("field {field}: {e}")))?;
            check_bound(&b)?;
            let mut run = numeric(b, &opts)?;
            run.doc = Doc::None;
            run
        }
    };
    finish(cfg, params, &opts, run)
}

fn solve_options(c: &Common) -> Result<SolveOptions, CliError> {
    let grid = Grid::new(c.x0, c.x1, c.n)?;
    for (name, v) in [("rtol", c.rtol), ("atol", c.atol), ("pole-tol", c.pole_tol), ("guard-tol", c.guard_tol)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Usage(format!("--{name} must be positive, got {v}")));
        }
    }
    for (name, v) in [("phi0", c.phi0), ("dphi0", c.dphi0)] {
        if !v.is_finite() {
            return Err(CliError::Usage(format!("--{name} must be finite")));
        }
    }
    let integrator = IntegratorConfig::default().with_tolerances(c.rtol, c.atol);
    integrator.validate()?;
    Ok(SolveOptions { grid, phi0: c.phi0, dphi0: c.dphi0, integrator, pole_tol: c.pole_tol, guard_tol: c.guard_tol })
}

/// The output grid refined by an integer factor until its spacing is at most
/// [`RESIDUAL_SPACING`], so every output point is also a residual point.
pub fn residual_grid(grid: &Grid) -> Result<Grid, CliError> {
    let k = (grid.spacing() / RESIDUAL_SPACING).ceil().max(1.0) as usize;
    Ok(Grid::new(grid.x0, grid.x1, (grid.n - 1) * k + 1)?)
}

fn refined(opts: &SolveOptions) -> Result<SolveOptions, CliError> {
    Ok(SolveOptions { grid: residual_grid(&opts.grid)?, ..*opts })
}

/// The user constants that may appear in expression flags.
fn constants(c: &Common) -> ParamEnv {
    ParamEnv::new().with("a", c.a).with("c", c.c).with("C1", c.c1).with("C2", c.c2).with("C3", c.c3).with("C4", c.c4)
}

/// Parses an expression flag and fixes the user constants in it. Only `mu`,
/// `beta` and `alpha` may remain free.
fn user_expr(flag: &str, text: &str, c: &Common) -> Result<Expr, CliError> {
    let e = parse(text).map_err(|e: ParseError| CliError::Input(format!("--{flag}: {e}")))?;
    let e = e.substitute(&constants(c)).simplify();
    if let Some(name) = e.params().into_iter().find(|n| ![MU, BETA, ALPHA].contains(&n.as_str())) {
        return Err(CliError::Input(format!("--{flag}: unknown parameter {name:?}")));
    }
    Ok(e)
}

/// A stored bundle may only refer to `mu`, `beta` and `alpha`.
fn check_bound(b: &TransformBundle) -> Result<(), CliError> {
    for (name, e) in [("P", &b.p), ("U", &b.u), ("g", &b.g), ("h", &b.h), ("v", &b.v), ("f", &b.f)] {
        if let Some(p) = e.params().into_iter().find(|n| ![MU, BETA, ALPHA].contains(&n.as_str())) {
            return Err(CliError::Input(format!("bundle field {name}: unknown parameter {p:?}")));
        }
    }
    Ok(())
}

enum Doc {
    None,
    Bundle(BundleDoc),
    Lienard(LienardDoc),
}

struct Run {
    doc: Doc,
    phi: Trajectory,
    psi: Trajectory,
    residual_grid: Grid,
    /// `closed-form` or `numerical`.
    phi_source: &'static str,
    annihilation: AnnihilationReport,
    residual: ResidualReport,
    checks: Vec<CheckDoc>,
    ledger: DiscrepancyLedger,
}

/// Annihilation, numerical `phi`, Cole-Hopf map and residual for a bundle.
fn numeric(mut bundle: TransformBundle, opts: &SolveOptions) -> Result<Run, CliError> {
    bundle.ledger.extend(verify_printed_coeffs(&bundle, &audit_grid()));
    let annihilation = verify_annihilation(&bundle, &opts.grid)?;
    let (phi, psi) = linearize(&bundle.p, &bundle.u, &bundle.env(), opts)?;
    let fine = refined(opts)?;
    let (_, fine_psi) = linearize(&bundle.p, &bundle.u, &bundle.env(), &fine)?;
    let residual = residual(&bundle, &fine_psi, opts.guard_tol)?;
    Ok(Run {
        residual_grid: fine.grid,
        doc: Doc::Bundle(BundleDoc::from(&bundle)),
        phi,
        psi,
        phi_source: "numerical",
        annihilation,
        residual,
        checks: Vec::new(),
        ledger: bundle.ledger,
    })
}

/// Catalog cases use the closed-form basis when it solves the linear
/// equation, and integrate otherwise; the mismatch is already in the ledger.
fn catalog_run(sol: ClosedFormSolution, c: &Common, opts: &SolveOptions) -> Result<Run, CliError> {
    let basis_residual = sol.basis_residual(&opts.grid)?;
    if basis_residual > BASIS_RESIDUAL_TOL {
        return numeric(sol.bundle, opts);
    }
    let mut bundle = sol.bundle.clone();
    bundle.ledger.extend(verify_printed_coeffs(&bundle, &audit_grid()));
    let env = bundle.env();
    let annihilation = verify_annihilation(&bundle, &opts.grid)?;
    let phi_expr = sol.phi_with(c.c3, c.c4);
    let phi = Trajectory::from_expr(&phi_expr, &opts.grid, &env)?;
    let psi = cole_hopf_map(&bundle.p, &bundle.u, &phi, &env, opts.pole_tol)?;
    let fine = residual_grid(&opts.grid)?;
    let fine_phi = Trajectory::from_expr(&phi_expr, &fine, &env)?;
    let fine_psi = cole_hopf_map(&bundle.p, &bundle.u, &fine_phi, &env, opts.pole_tol)?;
    let residual = residual(&bundle, &fine_psi, opts.guard_tol)?;
    Ok(Run {
        residual_grid: fine,
        doc: Doc::Bundle(BundleDoc::from(&bundle)),
        phi,
        psi,
        phi_source: "closed-form",
        annihilation,
        residual,
        checks: vec![CheckDoc::new("basis_residual", basis_residual, BASIS_RESIDUAL_TOL)],
        ledger: bundle.ledger,
    })
}

fn lienard_run(l: &LienardArgs, c: &Common, opts: &SolveOptions) -> Result<Run, CliError> {
    let damping = [user_expr("c0", &l.c0, c)?, user_expr("c1", &l.c1, c)?, user_expr("c2", &l.c2, c)?];
    let p = user_expr("P", &l.p, c)?;
    let u = match &l.u {
        Some(u) if !l.riccati => user_expr("U", u, c)?,
        _ => riccati_u(&p),
    };
    let env = VdpParams::new(c.mu, c.beta, c.alpha).env();
    let fine = refined(opts)?;
    let lr = build_lienard(&damping, &p, &u, &env, &fine)?;
    let (phi, psi) = linearize(&p, &u, &env, opts)?;

    let xs = opts.grid.points();
    let mut max_abs = [0.0f64; 5];
    let mut worst_x = [opts.grid.x0; 5];
    for (i, a) in lr.spec.coefficients().iter().enumerate() {
        let a = a.compile(&env);
        for &x in &xs {
            let v = a.eval(x)?.abs();
            if v > max_abs[i] {
                max_abs[i] = v;
                worst_x[i] = x;
            }
        }
    }
    let annihilation = AnnihilationReport { max_abs, worst_x, points: xs.len() };

    let mut checks = Vec::new();
    if l.riccati {
        let b0 = lr.spec.b[0].compile(&env);
        let mut worst = 0.0f64;
        for &x in &xs {
            worst = worst.max(b0.eval(x)?.abs());
        }
        checks.push(CheckDoc::new("b0", worst, BASIS_RESIDUAL_TOL));
    }
    let ledger = lr.spec.ledger.clone();
    Ok(Run {
        doc: Doc::Lienard(LienardDoc::from(&lr.spec)),
        phi,
        psi,
        residual_grid: fine.grid,
        phi_source: "numerical",
        annihilation,
        residual: lr.residual,
        checks,
        ledger,
    })
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Io { path, source })
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

fn finish(cfg: &RunConfig, params: VdpParams, opts: &SolveOptions, run: Run) -> Result<String, CliError> {
    let c = &cfg.common;
    let dir = &c.out;
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;

    match &run.doc {
        Doc::None => {}
        Doc::Bundle(b) => write(dir, "bundle.json", &json(b))?,
        Doc::Lienard(l) => write(dir, "lienard.json", &json(l))?,
    }
    for (name, t) in [("phi", &run.phi), ("psi", &run.psi)] {
        match c.format {
            Format::Csv => write(dir, &format!("{name}.csv"), &trajectory_csv(t))?,
            Format::Json => write(dir, &format!("{name}.json"), &json(&TrajectoryDoc::from(t)))?,
        }
    }
    write(dir, "ledger.json", &json(&ledger_docs(&run.ledger)))?;

    let annihilation = AnnihilationDoc::new(&run.annihilation, ANNIHILATION_TOL);
    let residual = ResidualDoc::new(&run.residual, run.residual_grid, RESIDUAL_TOL);
    let passes = annihilation.passes && residual.passes && run.checks.iter().all(|k| k.passes);
    let disagreements = run.ledger.disagreements().count();
    let report = ReportDoc {
        command: cfg.command.name().to_string(),
        params: params.into(),
        grid: opts.grid.into(),
        phi: run.phi_source.to_string(),
        annihilation,
        residual,
        checks: run.checks,
        poles: run.psi.poles.iter().map(|p| [p.lo, p.hi]).collect(),
        ledger_entries: run.ledger.len(),
        ledger_disagreements: disagreements,
        passes,
    };
    write(dir, "report.json", &json(&report))?;

    let summary = format!(
        "{}: annihilation {:.3e}, residual {:.3e} on {} points, {} pole(s), ledger {}/{} disagree\n",
        report.command,
        run.annihilation.max(),
        run.residual.max_abs,
        run.residual.points,
        report.poles.len(),
        disagreements,
        run.ledger.len(),
    );
    if passes {
        Ok(summary)
    } else {
        print!("{summary}");
        let mut failed: Vec<String> = Vec::new();
        if !report.annihilation.passes {
            failed.push(format!("annihilation {:.3e} > {:e}", run.annihilation.max(), ANNIHILATION_TOL));
        }
        if !report.residual.passes {
            failed.push(format!("residual {:.3e} > {:e}", run.residual.max_abs, RESIDUAL_TOL));
        }
        for k in report.checks.iter().filter(|k| !k.passes) {
            failed.push(format!("{} {:.3e} > {:e}", k.name, k.value, k.tol));
        }
        Err(CliError::Verification(failed.join(", ")))
    }
}
