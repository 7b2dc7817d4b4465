//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs with its own `main` so the lines are printed even when everything passes.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use cuspwave::cli::verify_bl;
use cuspwave::config::RunConfig;
use cuspwave::region::{
    build_region, flow_force_stream, flow_force_variation, nu_curve_shape_check, StreamBranch,
};
use cuspwave::spectral::{hp_bounds, mu0, mu1, shoot, sigma, spectral_point};
use cuspwave::stream::{bernoulli_derivative, bernoulli_of_lambda, critical_data, depth, stream_profile};
use cuspwave::vorticity::{make_vorticity, OmegaClass, VorticityFn, VorticitySpec};
use cuspwave::wave::{
    assemble_jacobian, assemble_residual, check_invariants, continue_branch, fd_jacobian, newton_solve, seed_stokes, BranchOptions,
    Constraint, NewtonOptions, WaveGrid, WaveKind, WaveSetup,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn zero() -> VorticityFn {
    make_vorticity(VorticitySpec::Zero).unwrap()
}

fn constant() -> VorticityFn {
    make_vorticity(VorticitySpec::Constant { b: 0.5 }).unwrap()
}

fn affine() -> VorticityFn {
    make_vorticity(VorticitySpec::Affine { a: 1.0, b: -2.0 }).unwrap()
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn c1_irrotational() -> Outcome {
    let v = zero();
    let mut err = 0.0f64;
    for l in linspace(0.5, 3.0, 101) {
        err = err.max((depth(&v, l).unwrap() - 1.0 / l).abs());
        err = err.max((bernoulli_of_lambda(&v, l).unwrap() - (l.powi(3) + 2.0) / (3.0 * l)).abs());
    }
    let cd = critical_data(&v).unwrap();
    for x in [cd.lambda_c, cd.r_c, cd.d_c] {
        err = err.max((x - 1.0).abs());
    }
    outcome(err <= 1e-10, format!("max abs error {err:.2e}"))
}

fn c2_constant() -> Outcome {
    let v = constant();
    let mut err = 0.0f64;
    for l in linspace(1.001, 3.0, 60) {
        let exact = (l - (l * l - 1.0).sqrt()) / 0.5;
        err = err.max((depth(&v, l).unwrap() - exact).abs());
    }
    let lc = bisect(|l| 1.0 / (l * l - 1.0).sqrt() - 1.0 / l - 0.5, 1.0 + 1e-9, 3.0);
    let cd = critical_data(&v).unwrap();
    let lc_err = (cd.lambda_c - lc).abs();
    outcome(
        err <= 1e-8 && lc_err <= 1e-8,
        format!("depth error {err:.2e}, lambda_c = {:.10} (error {lc_err:.2e})", cd.lambda_c),
    )
}

fn c3_dispersion() -> Outcome {
    let mut rel = 0.0f64;
    let mut v_err = 0.0f64;
    for v in [zero(), constant(), affine()] {
        let cd = critical_data(&v).unwrap();
        let lo = v.lambda0 + 0.05 * (cd.lambda_c - v.lambda0) + 1e-3;
        let lambdas = linspace(lo, cd.lambda_c + 1.5, 20);
        for &l in &lambdas {
            let s = sigma(&v, l, 0.0).unwrap();
            let rhs = 1.5 * l * l * bernoulli_derivative(&v, l).unwrap();
            rel = rel.max((s - rhs).abs() / rhs.abs().max(1e-300));
        }
        for &l in &[lambdas[3], lambdas[10], lambdas[17]] {
            let np = 32;
            let sh = shoot(&v, l, 0.0, np).unwrap();
            let h = 1e-3 * (l - v.lambda0);
            let hl = |x: f64| stream_profile(&v, x, np).unwrap().h;
            let (a, b, c, d) = (hl(l + h), hl(l - h), hl(l + 0.5 * h), hl(l - 0.5 * h));
            for j in 0..=np {
                let d1 = (a[j] - b[j]) / (2.0 * h);
                let d2 = (c[j] - d[j]) / h;
                let dl = (4.0 * d2 - d1) / 3.0;
                v_err = v_err.max((sh.v[j] + l * l * dl).abs());
            }
        }
    }
    let v = zero();
    let mut irr = 0.0f64;
    for l in linspace(0.6, 2.5, 20) {
        irr = irr.max((sigma(&v, l, 0.0).unwrap() - (l.powi(3) - 1.0)).abs());
    }
    outcome(
        rel <= 1e-6 && v_err <= 1e-6 && irr <= 1e-10,
        format!("sigma vs R' rel {rel:.2e}, V vs -lambda^2 dH/dlambda {v_err:.2e}, irrotational sigma {irr:.2e}"),
    )
}

/// μ₀ for ω ≡ 0 from tanh θ/θ = λ³ (λ < 1) or tan θ/θ = λ³ (λ > 1).
fn mu0_irrotational(l: f64) -> f64 {
    let c = l.powi(3);
    if l < 1.0 {
        let th = bisect(|t| t.tanh() / t - c, 1e-9, 50.0 / c);
        -l * l * th * th
    } else {
        let th = bisect(|t| t.tan() / t - c, 1e-9, PI / 2.0 - 1e-12);
        l * l * th * th
    }
}

fn c4_eigen() -> Outcome {
    let v = zero();
    let mut err = 0.0f64;
    for l in [0.6, 0.75, 0.823610, 0.9, 0.97, 1.03, 1.1, 1.3, 1.6] {
        err = err.max((mu0(&v, l, 8).unwrap().0 - mu0_irrotational(l)).abs());
    }
    let mut at_c = 0.0f64;
    let mut signs = true;
    let mut bound = true;
    for v in [zero(), constant(), affine()] {
        let cd = critical_data(&v).unwrap();
        at_c = at_c.max(mu0(&v, cd.lambda_c, 8).unwrap().0.abs());
        for k in 1..=5 {
            let d = 0.02 * k as f64 * (cd.lambda_c - v.lambda0);
            for (l, sgn) in [(cd.lambda_c - d, -1.0), (cd.lambda_c + d, 1.0)] {
                let m = mu0(&v, l, 8).unwrap().0;
                signs &= m.signum() == sgn;
                let (m_lo, m_hi) = hp_bounds(&v, l);
                bound &= mu1(&v, l).unwrap() >= PI * PI * m_lo / m_hi.powi(3) - 1e-10;
            }
        }
    }
    outcome(
        err <= 1e-8 && at_c <= 1e-8 && signs && bound,
        format!("mu0 oracle error {err:.2e}, |mu0(lambda_c)| {at_c:.2e}, sign test {signs}, mu1 bound {bound}"),
    )
}

fn c5_random() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let mut failures = Vec::new();
    for case in 0..50 {
        let n = rng.gen_range(3..9);
        let p = linspace(0.0, 1.0, n);
        let omega: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v = make_vorticity(VorticitySpec::Samples { p, omega }).unwrap();
        let cd = critical_data(&v).unwrap();
        let gap_ok = cd.lambda_c.powi(2) - v.lambda0.powi(2) <= 1.0 + 1e-12;
        let lo = v.lambda0 + 1e-3 * (cd.lambda_c - v.lambda0);
        let grid = linspace(lo, cd.lambda_c + 2.0, 200);
        let d: Vec<f64> = grid.iter().map(|&l| depth(&v, l).unwrap()).collect();
        let dec = d.windows(2).all(|w| w[1] < w[0]);
        let r: Vec<f64> = grid.iter().map(|&l| bernoulli_of_lambda(&v, l).unwrap()).collect();
        let minima: Vec<usize> = (1..r.len() - 1).filter(|&k| r[k] <= r[k - 1] && r[k] <= r[k + 1]).collect();
        let single = minima.len() == 1 && r[0] > r[minima[0]] && r[r.len() - 1] > r[minima[0]];
        if !(gap_ok && dec && single) {
            failures.push(format!("case {case}: gap {gap_ok} decreasing {dec} single minimum {single}"));
        }
    }
    outcome(failures.is_empty(), format!("50 samples, failures: {failures:?}"))
}

fn c6_stream() -> Outcome {
    let mut worst = 0.0f64;
    let mut unchanged = true;
    for v in [zero(), constant(), affine()] {
        let cd = critical_data(&v).unwrap();
        let st = WaveSetup::with_critical(&v, &cd, cd.r_c + 0.01, 64).unwrap();
        let g = WaveGrid::stream(&st, 256, st.linear_half_period().unwrap()).unwrap();
        let f = assemble_residual(&g).unwrap();
        worst = worst.max(f.iter().fold(0.0, |m: f64, x| m.max(x.abs())));
        let out = newton_solve(&g, Constraint::FixedHalfPeriod, &NewtonOptions::default()).unwrap();
        unchanged &= out.iterations == 0 && out.grid.values() == g.values();
    }
    outcome(worst <= 1e-12 && unchanged, format!("residual {worst:.2e}, Newton leaves it unchanged: {unchanged}"))
}

/// Λ at crest offset `off` for ω ≡ 0, r = R(1.2).
fn half_period_at(np: usize, nq: usize, off: f64) -> f64 {
    let v = zero();
    let r = (1.2f64.powi(3) + 2.0) / 3.6;
    let st = WaveSetup::new(&v, r, np).unwrap();
    let t = st.pair.d_plus + off;
    let g = seed_stokes(&st, nq, off, 1e3).unwrap();
    newton_solve(&g, Constraint::CrestHeight(t), &NewtonOptions::default())
        .unwrap()
        .grid
        .half_period()
}

fn c7_bifurcation() -> Outcome {
    let v = zero();
    let r = (1.2f64.powi(3) + 2.0) / 3.6;
    let lp = bisect(|l| l.powi(3) - 3.0 * r * l + 2.0, 0.5, 1.0);
    let sp = spectral_point(&v, lp, 64).unwrap();
    let lam_star = PI / sp.k_star.unwrap();
    // frozen from an independent solve of tanh(kd)/(kd) = lambda^3 at the supercritical stream
    let frozen = 2.2887425888;
    let offsets = [2e-3, 1e-3];
    let runs: Vec<(f64, f64)> = offsets
        .par_iter()
        .map(|&off| (half_period_at(64, 256, off), half_period_at(128, 512, off)))
        .collect();
    let within = (runs[1].0 / lam_star - 1.0).abs();
    // Richardson in the grid removes the O(h^2) offset of the discrete dispersion relation.
    let gaps: Vec<f64> = runs
        .iter()
        .map(|&(c, f)| ((4.0 * f - c) / 3.0 / lam_star - 1.0).abs())
        .collect();
    let ratio = gaps[0] / gaps[1];
    outcome(
        within <= 0.02 && ratio >= 2.0 && (lam_star - frozen).abs() <= 1e-8,
        format!(
            "Lambda*={lam_star:.10}, relative gap at t=d++1e-3 {within:.2e}; extrapolated gaps {:.2e} -> {:.2e}, ratio {ratio:.2} on halving",
            gaps[0], gaps[1]
        ),
    )
}

struct BlRun {
    label: String,
    waves: Vec<WaveGrid>,
    membership: bool,
    monotonic: bool,
    s_plus_gap: Option<f64>,
    s_minus_gap: Option<f64>,
    truncated: Option<String>,
}

fn bl_runs() -> Vec<BlRun> {
    let cases: Vec<(&str, VorticitySpec, f64)> = [("zero", VorticitySpec::Zero), ("constant 0.5", VorticitySpec::Constant { b: 0.5 })]
        .into_iter()
        .flat_map(|(name, spec)| [0.002, 0.005, 0.01].map(move |dr| (name, spec.clone(), dr)))
        .collect();
    cases
        .into_par_iter()
        .map(|(name, spec, dr)| {
            let cfg = RunConfig::new(spec.clone());
            let v = make_vorticity(spec).unwrap();
            let cd = critical_data(&v).unwrap();
            let r = cd.r_c + dr;
            let st: Arc<WaveSetup> = WaveSetup::with_critical(&v, &cd, r, cfg.grid.np).unwrap();
            let span = st.pair.d_plus - st.pair.d_minus;
            let targets: Vec<f64> = [0.05, 0.1, 0.2, 0.4].iter().map(|f| st.pair.d_plus + f * span).collect();
            let verdict = verify_bl(&cfg, &v, &cd, &st, &targets, 1e-3).unwrap();
            let mut waves = verdict.branch.clone();
            if let Some(s) = &verdict.solitary {
                waves.push(s.wave.clone());
            }
            BlRun {
                label: format!("{name} r=r_c+{dr}"),
                waves,
                membership: verdict.membership_pass(),
                monotonic: verdict.flow_force.monotonic && !verdict.flow_force.vacuous,
                s_plus_gap: verdict.flow_force.s_plus_gap,
                s_minus_gap: verdict.flow_force.s_minus_gap,
                truncated: verdict.truncated,
            }
        })
        .collect()
}

fn c8_invariants(runs: &[BlRun]) -> Outcome {
    let mut count = 0;
    let mut bad = Vec::new();
    for run in runs {
        for w in &run.waves {
            count += 1;
            let rep = check_invariants(w, 1.0);
            let concave = w.kind != WaveKind::Stokes || rep.crest_concave;
            if !(rep.all_pass() && concave && rep.min_psi_y > 0.0) {
                bad.push(format!("{} t={:.6}: {:?}", run.label, w.crest_height(), rep.failures()));
            }
        }
    }
    outcome(bad.is_empty() && count > 0, format!("{count} waves checked, violations: {bad:?}"))
}

fn c9_flow_force(runs: &[BlRun]) -> Outcome {
    let worst = runs
        .iter()
        .flat_map(|r| r.waves.iter())
        .map(flow_force_variation)
        .fold(0.0, f64::max);
    let ratios: Vec<f64> = [VorticitySpec::Zero, VorticitySpec::Constant { b: 0.5 }]
        .into_par_iter()
        .flat_map(|spec| {
            let v = make_vorticity(spec).unwrap();
            let cd = critical_data(&v).unwrap();
            let vars: Vec<f64> = [(32, 128), (64, 256), (128, 512)]
                .iter()
                .map(|&(np, nq)| {
                    let st = WaveSetup::with_critical(&v, &cd, cd.r_c + 0.01, np).unwrap();
                    let span = st.pair.d_plus - st.pair.d_minus;
                    let targets = [st.pair.d_plus + 0.04 * span, st.pair.d_plus + 0.4 * span];
                    let opts = BranchOptions { nq, ..Default::default() };
                    let br = continue_branch(&st, &targets, &opts).unwrap();
                    assert!(br.truncated.is_none());
                    flow_force_variation(br.waves.last().unwrap())
                })
                .collect();
            vec![vars[0] / vars[1], vars[1] / vars[2]]
        })
        .collect();
    let shrink = ratios.iter().all(|&q| (3.0..=5.0).contains(&q));
    outcome(
        worst <= 1e-5 && shrink,
        format!("max variation {worst:.2e} at default grid; doubling ratios {ratios:.2?}"),
    )
}

fn c10_region_membership(runs: &[BlRun]) -> Outcome {
    let mut bad = Vec::new();
    let mut max_plus = 0.0f64;
    let mut max_minus = 0.0f64;
    for run in runs {
        let plus = run.s_plus_gap.unwrap_or(f64::INFINITY);
        let minus = run.s_minus_gap.unwrap_or(f64::INFINITY);
        max_plus = max_plus.max(plus);
        max_minus = max_minus.max(minus);
        if !(run.membership && run.monotonic && plus <= 1e-3 && minus <= 1e-2 && run.truncated.is_none()) {
            bad.push(format!(
                "{}: membership {} monotonic {} s+ gap {plus:.2e} s- gap {minus:.2e} truncated {:?}",
                run.label, run.membership, run.monotonic, run.truncated
            ));
        }
    }
    outcome(
        bad.is_empty(),
        format!("{} cases, max s+ gap {max_plus:.2e}, max s- gap {max_minus:.2e}, failures: {bad:?}", runs.len()),
    )
}

fn c11_region() -> Outcome {
    let v = zero();
    let region = build_region(&v, 1.2, 64).unwrap();
    let shape = nu_curve_shape_check(&region).unwrap();
    let ordered = region.s_plus[1..].iter().zip(&region.s_minus[1..]).all(|(p, m)| p > m);
    let cusp = (region.r_grid[0] - 1.0).abs() <= 1e-8
        && (region.s_minus[0] - 1.0).abs() <= 1e-8
        && (region.s_plus[0] - 1.0).abs() <= 1e-8;
    let w = constant();
    let cd = critical_data(&w).unwrap();
    let reg3 = build_region(&w, 5.0, 48).unwrap();
    let r0_err = (reg3.r0 - cd.r0).abs().max((*reg3.r_grid.last().unwrap() - cd.r0).abs());
    let closed_form = (cd.r0 - 4.0 / 3.0).abs();
    let beyond = flow_force_stream(&w, &cd, cd.r0 + 1e-3, StreamBranch::Plus).is_err();
    let pass = cusp
        && ordered
        && shape.cusp_matches
        && shape.ordering_matches
        && shape.monotone
        && reg3.class == OmegaClass::III
        && reg3.r0.is_finite()
        && r0_err <= 1e-8
        && beyond;
    outcome(
        pass,
        format!(
            "cusp {cusp}, s+ > s- {ordered}, shape {shape:?}; class {:?} r0={:.12} (vs stream r0 {r0_err:.1e}, vs 4/3 {closed_form:.1e})",
            reg3.class, reg3.r0
        ),
    )
}

fn c12_jacobian() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let v = constant();
    let cd = critical_data(&v).unwrap();
    let st = WaveSetup::with_critical(&v, &cd, cd.r_c + 0.005, 64).unwrap();
    let g = seed_stokes(&st, 256, 5e-3, 1e3).unwrap();
    let h: Vec<f64> = g
        .values()
        .iter()
        .map(|x| if *x == 0.0 { 0.0 } else { x + 1e-4 * rng.gen_range(-1.0..1.0) })
        .collect();
    let g = WaveGrid::from_values(&st, 256, g.half_period() * 1.02, h, WaveKind::Stokes).unwrap();
    let a = assemble_jacobian(&g).unwrap();
    let f = fd_jacobian(&g, 1e-4).unwrap();
    let n = a.residual.len();
    let band = st.np + 1;
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i.saturating_sub(band)..(i + band + 1).min(n) {
            dev = dev.max((a.dh.get(i, j) - f.dh.get(i, j)).abs());
        }
        dev = dev.max((a.dlambda[i] - f.dlambda[i]).abs());
    }
    outcome(dev <= 1e-6, format!("{n} unknowns, max entry deviation {dev:.2e}"))
}

fn main() {
    let start = Instant::now();
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("1 irrotational oracles", c1_irrotational()));
    results.push(("2 constant-vorticity oracles", c2_constant()));
    results.push(("3 dispersion identities", c3_dispersion()));
    results.push(("4 eigenvalue oracles", c4_eigen()));
    results.push(("5 random vorticity properties", c5_random()));
    results.push(("6 stream exactness", c6_stream()));
    results.push(("7 linear bifurcation", c7_bifurcation()));
    let runs = bl_runs();
    results.push(("8 wave invariants", c8_invariants(&runs)));
    results.push(("9 flow-force invariance", c9_flow_force(&runs)));
    results.push(("10 flow-force region membership", c10_region_membership(&runs)));
    results.push(("11 region geometry", c11_region()));
    results.push(("12 Jacobian verification", c12_jacobian()));
    let mut failed = 0;
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance finished in {:.1} s", start.elapsed().as_secs_f64());
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
