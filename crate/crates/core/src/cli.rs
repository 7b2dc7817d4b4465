//! Command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input or parameters outside the domain,
//! 3 solver failure (non-convergence, fold, truncated branch).

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::config::{parse_config, RunConfig};
use crate::error::{Error, Result};
use crate::output::{csv_string, fmt_f64, num, opt_num, read_csv, render_json, write_atomic};
use crate::region::{
    branch_flow_force, build_region_with, contains_exact, flow_force_wave, BranchFlowForce, Position,
};
use crate::spectral::spectral_point;
use crate::stream::{bernoulli_of_lambda, critical_data, depth, CriticalData};
use crate::vorticity::VorticityFn;
use crate::wave::{
    check_invariants, check_targets, continue_branch_from, newton_solve, solitary_approx, Constraint, SolitaryResult, WaveGrid,
    WaveKind, WaveSetup,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "cuspwave", version, about = "Steady rotational water waves near critical flow")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads for independent tasks.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Depth and Bernoulli constant of the streams on a λ grid.
    Stream {
        #[command(flatten)]
        common: Common,
        /// `a:b:n`, n equally spaced values from a to b.
        #[arg(long = "lambda-grid")]
        lambda_grid: String,
    },
    /// λ₀, λ_c, r_c, d_c, d₀, r₀ and the vorticity class.
    Critical {
        #[command(flatten)]
        common: Common,
    },
    /// μ₀, μ₁, k* at one λ, and φ₀ on the p-grid.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
    },
    /// A branch of Stokes waves at the given crest heights.
    Stokes {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        r: f64,
        #[arg(long = "t-list", value_delimiter = ',', required = true)]
        t_list: Vec<f64>,
        /// Reuse wave files already present in the output directory.
        #[arg(long)]
        resume: bool,
    },
    /// Long-period approximation of the solitary wave.
    Solitary {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        r: f64,
        #[arg(long = "tail-tol", default_value_t = 1e-3)]
        tail_tol: f64,
    },
    /// Boundary curves s₋(r), s₊(r) of the flow-force region.
    Region {
        #[command(flatten)]
        common: Common,
        #[arg(long = "r-max")]
        r_max: f64,
        #[arg(long, default_value_t = 64)]
        n: usize,
    },
    /// Branch, solitary approximation and flow-force verdict at one r.
    VerifyBl {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        r: f64,
        #[arg(long = "t-list", value_delimiter = ',', required = true)]
        t_list: Vec<f64>,
        #[arg(long = "tail-tol", default_value_t = 1e-3)]
        tail_tol: f64,
    },
}

/// Failure of a command: the error plus whether it is a solver failure.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_solver_failure() {
        EXIT_SOLVER
    } else {
        EXIT_INPUT
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn run(cmd: &Command) -> std::result::Result<(), Failure> {
    match cmd {
        Command::Stream { common, lambda_grid } => cmd_stream(common, lambda_grid),
        Command::Critical { common } => cmd_critical(common),
        Command::Spectrum { common, lambda } => cmd_spectrum(common, *lambda),
        Command::Stokes {
            common,
            r,
            t_list,
            resume,
        } => cmd_stokes(common, *r, t_list, *resume),
        Command::Solitary { common, r, tail_tol } => cmd_solitary(common, *r, *tail_tol),
        Command::Region { common, r_max, n } => cmd_region(common, *r_max, *n),
        Command::VerifyBl {
            common,
            r,
            t_list,
            tail_tol,
        } => cmd_verify(common, *r, t_list, *tail_tol),
    }
}

struct Context {
    cfg: RunConfig,
    v: VorticityFn,
    out: PathBuf,
}

fn load(common: &Common) -> Result<Context> {
    if common.jobs == 0 {
        return Err(Error::validation("jobs", "must be at least 1"));
    }
    let cfg = parse_config(&common.config)?;
    let v = cfg.vorticity_fn()?;
    Ok(Context {
        cfg,
        v,
        out: common.out.clone(),
    })
}

fn emit_json(path: &Path, value: &Value) -> Result<()> {
    let text = render_json(value) + "\n";
    write_atomic(path, &text)?;
    print!("{text}");
    Ok(())
}

fn parse_lambda_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::validation("lambda-grid", format!("expected a:b:n, got `{s}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() || (n == 1 && a != b) {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|k| a + (b - a) * (k as f64 / (n - 1) as f64)).collect())
}

fn cmd_stream(common: &Common, grid: &str) -> std::result::Result<(), Failure> {
    let ctx = load(common)?;
    let lambdas = parse_lambda_grid(grid)?;
    let mut rows = Vec::with_capacity(lambdas.len());
    for l in lambdas {
        rows.push(vec![l, depth(&ctx.v, l)?, bernoulli_of_lambda(&ctx.v, l)?]);
    }
    let path = ctx.out.join("stream.csv");
    write_atomic(&path, &csv_string(&["lambda", "depth", "bernoulli"], rows))?;
    println!("{}", path.display());
    Ok(())
}

fn critical_json(v: &VorticityFn, cd: &CriticalData) -> Value {
    json!({
        "lambda0": num(cd.lambda0),
        "lambdaC": num(cd.lambda_c),
        "rC": num(cd.r_c),
        "dC": num(cd.d_c),
        "d0": num(cd.d0),
        "r0": num(cd.r0),
        "class": format!("{:?}", cd.class),
        "tie": v.tie,
    })
}

fn cmd_critical(common: &Common) -> std::result::Result<(), Failure> {
    let ctx = load(common)?;
    let cd = critical_data(&ctx.v)?;
    emit_json(&ctx.out.join("critical.json"), &critical_json(&ctx.v, &cd))?;
    Ok(())
}

fn cmd_spectrum(common: &Common, lambda: f64) -> std::result::Result<(), Failure> {
    let ctx = load(common)?;
    let sp = spectral_point(&ctx.v, lambda, ctx.cfg.grid.np)?;
    let rows = sp.p.iter().zip(&sp.phi0).map(|(&p, &f)| vec![p, f]);
    write_atomic(&ctx.out.join("phi0.csv"), &csv_string(&["p", "phi0"], rows))?;
    let value = json!({
        "lambda": num(sp.lambda),
        "mu0": num(sp.mu0),
        "mu1": num(sp.mu1),
        "kStar": opt_num(sp.k_star),
        "frakm": num(sp.frakm),
        "frakM": num(sp.frak_m),
    });
    emit_json(&ctx.out.join("spectrum.json"), &value)?;
    Ok(())
}

/// Setup at r, rejecting r outside (r_c, r₀) as an input error.
fn wave_setup(ctx: &Context, cd: &CriticalData, r: f64) -> Result<Arc<WaveSetup>> {
    if !r.is_finite() {
        return Err(Error::Domain(format!("r = {r} must be finite")));
    }
    if r <= cd.r_c {
        return Err(Error::SubcriticalParameter { r, r_c: cd.r_c });
    }
    if r >= cd.r0 {
        return Err(Error::BeyondR0 { r, r0: cd.r0 });
    }
    WaveSetup::with_critical(&ctx.v, cd, r, ctx.cfg.grid.np)
}

const WAVE_HEADER: [&str; 3] = ["q", "p", "h"];
const SUMMARY_HEADER: [&str; 7] = ["t", "Lambda", "minEta", "maxEta", "flowForce", "maxSlope", "minPsiY"];

fn wave_csv(g: &WaveGrid) -> String {
    csv_string(&WAVE_HEADER, g.long_format().into_iter().map(|(q, p, h)| vec![q, p, h]))
}

fn summary_row(g: &WaveGrid, slope_bound: f64) -> Vec<f64> {
    let rep = check_invariants(g, slope_bound);
    vec![
        g.crest_height(),
        g.half_period(),
        rep.min_eta,
        rep.max_eta,
        flow_force_wave(g),
        rep.max_slope,
        rep.min_psi_y,
    ]
}

fn wave_path(out: &Path, k: usize) -> PathBuf {
    out.join(format!("wave_{k:03}.csv"))
}

/// Wave file `k` if present and a converged solution with crest height `t`.
fn reload(ctx: &Context, setup: &Arc<WaveSetup>, k: usize, t: f64) -> Result<Option<WaveGrid>> {
    let path = wave_path(&ctx.out, k);
    if !path.exists() {
        return Ok(None);
    }
    let rows: Vec<(f64, f64, f64)> = read_csv(&path, &WAVE_HEADER)?
        .into_iter()
        .map(|r| (r[0], r[1], r[2]))
        .collect();
    let g = WaveGrid::from_long_format(setup, &rows, WaveKind::Stokes)?;
    if g.crest_height() != t {
        return Ok(None);
    }
    let out = newton_solve(&g, Constraint::CrestHeight(t), &ctx.cfg.newton_options())?;
    Ok((out.iterations == 0).then_some(g))
}

fn cmd_stokes(common: &Common, r: f64, targets: &[f64], resume: bool) -> std::result::Result<(), Failure> {
    let ctx = load(common)?;
    let cd = critical_data(&ctx.v)?;
    let setup = wave_setup(&ctx, &cd, r)?;
    let mut waves = Vec::new();
    if resume {
        for (k, &t) in targets.iter().enumerate() {
            match reload(&ctx, &setup, k, t)? {
                Some(g) => waves.push(g),
                None => break,
            }
        }
    }
    let opts = ctx.cfg.branch_options();
    let rest = &targets[waves.len()..];
    let truncated = if rest.is_empty() {
        None
    } else {
        let keep = waves.len().saturating_sub(2);
        let br = continue_branch_from(&setup, &waves[keep..], rest, &opts)?;
        waves.extend(br.waves);
        br.truncated
    };
    let mut summary = Vec::with_capacity(waves.len());
    for (k, g) in waves.iter().enumerate() {
        write_atomic(&wave_path(&ctx.out, k), &wave_csv(g))?;
        summary.push(summary_row(g, opts.slope_bound));
    }
    write_atomic(&ctx.out.join("stokes_summary.csv"), &csv_string(&SUMMARY_HEADER, summary))?;
    println!("{} waves written to {}", waves.len(), ctx.out.display());
    match truncated {
        None => Ok(()),
        Some(tr) => Err(Failure {
            code: EXIT_SOLVER,
            message: format!(
                "branch truncated after t = {}: {} ({} of {} waves written)",
                fmt_f64(tr.last_good_t),
                tr.reason,
                waves.len(),
                targets.len()
            ),
        }),
    }
}

fn solitary_json(s: &SolitaryResult) -> Value {
    json!({
        "t": num(s.wave.crest_height()),
        "Lambda": num(s.wave.half_period()),
        "nq": s.wave.nq(),
        "tailError": num(s.tail_error),
        "converged": s.converged,
        "steps": s.steps,
    })
}

fn cmd_solitary(common: &Common, r: f64, tail_tol: f64) -> std::result::Result<(), Failure> {
    let ctx = load(common)?;
    let cd = critical_data(&ctx.v)?;
    let setup = wave_setup(&ctx, &cd, r)?;
    let opts = ctx.cfg.branch_options();
    let sol = solitary_approx(&setup, tail_tol, &opts)?;
    write_atomic(&ctx.out.join("solitary.csv"), &wave_csv(&sol.wave))?;
    let row = summary_row(&sol.wave, opts.slope_bound);
    write_atomic(&ctx.out.join("solitary_summary.csv"), &csv_string(&SUMMARY_HEADER, [row]))?;
    emit_json(&ctx.out.join("solitary.json"), &solitary_json(&sol))?;
    if sol.converged {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_SOLVER,
            message: format!(
                "tail error {} above {} when the budget ran out",
                fmt_f64(sol.tail_error),
                fmt_f64(tail_tol)
            ),
        })
    }
}

fn cmd_region(common: &Common, r_max: f64, n: usize) -> std::result::Result<(), Failure> {
    let ctx = load(common)?;
    let cd = critical_data(&ctx.v)?;
    let region = build_region_with(&ctx.v, &cd, r_max, n)?;
    let rows = (0..region.r_grid.len()).map(|k| vec![region.r_grid[k], region.s_minus[k], region.s_plus[k]]);
    let path = ctx.out.join("region.csv");
    write_atomic(&path, &csv_string(&["r", "sMinus", "sPlus"], rows))?;
    println!("{}", path.display());
    Ok(())
}

/// Outcome of the full pipeline at one r.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub r: f64,
    pub points: Vec<(WaveKind, f64, f64, Position)>,
    pub flow_force: BranchFlowForce,
    pub invariants_pass: bool,
    pub truncated: Option<String>,
    /// Stokes waves at the reached targets.
    pub branch: Vec<WaveGrid>,
    pub solitary: Option<SolitaryResult>,
}

impl Verdict {
    pub fn membership_pass(&self) -> bool {
        self.points
            .iter()
            .all(|p| matches!(p.3, Position::Inside | Position::LowerBoundary))
    }

    pub fn to_json(&self) -> Value {
        let points: Vec<Value> = self
            .points
            .iter()
            .map(|(kind, t, s, pos)| {
                json!({
                    "kind": kind.as_str(),
                    "t": num(*t),
                    "s": num(*s),
                    "position": serde_json::to_value(pos).expect("position serialises"),
                })
            })
            .collect();
        json!({
            "r": num(self.r),
            "membership": { "allPass": self.membership_pass(), "points": points },
            "monotonic": self.flow_force.monotonic,
            "vacuous": self.flow_force.vacuous,
            "endpoints": {
                "sPlusGap": opt_num(self.flow_force.s_plus_gap),
                "sMinusGap": opt_num(self.flow_force.s_minus_gap),
            },
            "invariantsPass": self.invariants_pass,
            "truncated": self.truncated.clone().map(Value::String).unwrap_or(Value::Null),
            "solitary": self.solitary.as_ref().map(solitary_json).unwrap_or(Value::Null),
        })
    }
}

/// Branch at `targets`, solitary approximation, membership and monotonicity.
pub fn verify_bl(
    cfg: &RunConfig,
    v: &VorticityFn,
    cd: &CriticalData,
    setup: &Arc<WaveSetup>,
    targets: &[f64],
    tail_tol: f64,
) -> Result<Verdict> {
    check_targets(setup, targets)?;
    let opts = cfg.branch_options();
    let (branch, solitary) = rayon::join(
        || continue_branch_from(setup, &[], targets, &opts),
        || solitary_approx(setup, tail_tol, &opts),
    );
    let branch = branch?;
    let solitary = match solitary {
        Ok(s) => Some(s),
        Err(e) if e.is_solver_failure() => None,
        Err(e) => return Err(e),
    };
    let mut truncated = branch.truncated.map(|t| t.reason);
    if solitary.is_none() {
        truncated.get_or_insert_with(|| "solitary approximation failed".into());
    }
    let r = setup.r;
    let mut points = Vec::new();
    let mut invariants_pass = true;
    let sol_wave = solitary.as_ref().map(|s| &s.wave);
    for g in branch.waves.iter().chain(sol_wave) {
        let s = flow_force_wave(g);
        let p = contains_exact(v, cd, r, s)?;
        points.push((g.kind, g.crest_height(), s, p.position));
        invariants_pass &= check_invariants(g, opts.slope_bound).all_pass();
    }
    let flow_force = branch_flow_force(&branch.waves, sol_wave, v, cd)?;
    Ok(Verdict {
        r,
        points,
        flow_force,
        invariants_pass,
        truncated,
        branch: branch.waves,
        solitary,
    })
}

fn cmd_verify(common: &Common, r: f64, targets: &[f64], tail_tol: f64) -> std::result::Result<(), Failure> {
    let ctx = load(common)?;
    let cd = critical_data(&ctx.v)?;
    let setup = wave_setup(&ctx, &cd, r)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.jobs)
        .build()
        .map_err(|e| Error::Numerical(e.to_string()))?;
    let verdict = pool.install(|| verify_bl(&ctx.cfg, &ctx.v, &cd, &setup, targets, tail_tol))?;
    emit_json(&ctx.out.join("verify_bl.json"), &verdict.to_json())?;
    match &verdict.truncated {
        None => Ok(()),
        Some(reason) => Err(Failure {
            code: EXIT_SOLVER,
            message: reason.clone(),
        }),
    }
}
