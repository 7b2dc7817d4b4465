use super::*;
use crate::vorticity::{make_vorticity, VorticitySpec};

#[test]
fn stream_is_discrete_solution() {
    for spec in [
        VorticitySpec::Zero,
        VorticitySpec::Constant { b: 0.5 },
        VorticitySpec::Affine { a: 1.0, b: -2.0 },
    ] {
        let v = make_vorticity(spec).unwrap();
        let cd = crate::stream::critical_data(&v).unwrap();
        let st = WaveSetup::with_critical(&v, &cd, cd.r_c + 0.01, 32).unwrap();
        let g = WaveGrid::stream(&st, 40, 3.0).unwrap();
        let f = assemble_residual(&g).unwrap();
        let m = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(m <= 1e-12, "{m}");
        let out = newton_solve(&g, Constraint::FixedHalfPeriod, &NewtonOptions::default()).unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(out.grid.values(), g.values());

        let h = (0..=40).flat_map(|_| st.supercritical.h.iter().copied()).collect();
        let gm = WaveGrid::from_values(&st, 40, 3.0, h, WaveKind::Stream).unwrap();
        let f = assemble_residual(&gm).unwrap();
        let m = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(m <= 1e-12, "supercritical {m}");

        let sp = crate::stream::flow_force_of_lambda(&v, st.pair.lambda_plus).unwrap();
        let sm = crate::stream::flow_force_of_lambda(&v, st.pair.lambda_minus).unwrap();
        assert!((crate::region::flow_force_column(&g, 7) - sp).abs() < 1e-12);
        assert!((crate::region::flow_force_column(&gm, 7) - sm).abs() < 1e-12);
    }
}

fn setup(spec: VorticitySpec, dr: f64, np: usize) -> Arc<WaveSetup> {
    let v = make_vorticity(spec).unwrap();
    let cd = crate::stream::critical_data(&v).unwrap();
    WaveSetup::with_critical(&v, &cd, cd.r_c + dr, np).unwrap()
}

fn jacobian_gap(a: &Jacobian, b: &Jacobian) -> f64 {
    let n = a.residual.len();
    let mut m = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if a.dh.in_band(i, j) {
                m = m.max((a.dh.get(i, j) - b.dh.get(i, j)).abs());
            }
        }
        m = m.max((a.dlambda[i] - b.dlambda[i]).abs());
    }
    m
}

#[test]
fn jacobian_matches_finite_differences() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for spec in [VorticitySpec::Zero, VorticitySpec::Constant { b: 0.5 }] {
        let st = setup(spec, 0.01, 16);
        let g = seed_stokes(&st, 24, 1e-2, 1e3).unwrap();
        let x: Vec<f64> = g.unknowns().iter().map(|x| x + 1e-3 * rng.gen_range(-1.0..1.0)).collect();
        let g = g.with_unknowns(&x, g.half_period() * 1.01);
        let exact = assemble_jacobian(&g).unwrap();
        let fd = fd_jacobian(&g, 1e-4).unwrap();
        let rgap = exact.residual.iter().zip(&fd.residual).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(rgap < 1e-13);
        let gap = jacobian_gap(&exact, &fd);
        assert!(gap <= 1e-6, "{gap:e}");
    }
}

#[test]
fn newton_with_fd_jacobian_agrees() {
    let st = setup(VorticitySpec::Zero, 0.01, 16);
    let g = seed_stokes(&st, 24, 2e-3, 1e3).unwrap();
    let t = st.pair.d_plus + 2e-3;
    let exact = newton_solve(&g, Constraint::CrestHeight(t), &NewtonOptions::default()).unwrap();
    let opts = NewtonOptions {
        fd_jacobian: true,
        ..Default::default()
    };
    let fd = newton_solve(&g, Constraint::CrestHeight(t), &opts).unwrap();
    assert!((exact.grid.half_period() - fd.grid.half_period()).abs() < 1e-9);
}

#[test]
fn fixed_period_solve_recovers_crest_constrained_wave() {
    let st = setup(VorticitySpec::Constant { b: 0.5 }, 0.01, 16);
    let t = st.pair.d_plus + 0.05 * (st.pair.d_plus - st.pair.d_minus);
    let g = seed_stokes(&st, 32, 5e-3, 1e3).unwrap();
    let wave = newton_solve(&g, Constraint::CrestHeight(t), &NewtonOptions::default()).unwrap().grid;
    // perturb the shape but keep Λ; the fixed-Λ problem has the same wave as a solution
    let x: Vec<f64> = wave
        .unknowns()
        .iter()
        .enumerate()
        .map(|(k, x)| x + 1e-5 * ((k % 7) as f64 - 3.0))
        .collect();
    let guess = wave.with_unknowns(&x, wave.half_period());
    let out = newton_solve(&guess, Constraint::FixedHalfPeriod, &NewtonOptions::default()).unwrap();
    assert!((out.grid.crest_height() - t).abs() < 1e-8, "{}", out.grid.crest_height() - t);
}

#[test]
fn small_branch_satisfies_invariants_and_decreasing_flow_force() {
    for spec in [VorticitySpec::Zero, VorticitySpec::Constant { b: 0.5 }] {
        let st = setup(spec, 0.01, 16);
        let span = st.pair.d_plus - st.pair.d_minus;
        let ts: Vec<f64> = [0.05, 0.15, 0.3].iter().map(|f| st.pair.d_plus + f * span).collect();
        let opts = BranchOptions {
            nq: 48,
            ..Default::default()
        };
        let br = continue_branch(&st, &ts, &opts).unwrap();
        assert!(br.truncated.is_none());
        assert_eq!(br.waves.len(), 3);
        let mut last = f64::INFINITY;
        for w in &br.waves {
            let rep = check_invariants(w, 1.0);
            assert!(rep.all_pass(), "{rep:?}");
            let s = crate::region::flow_force_wave(w);
            assert!(s < last);
            last = s;
            assert!(crate::region::flow_force_variation(w) < 1e-5);
            let eta = w.eta();
            assert!(eta.windows(2).all(|p| p[1] < p[0]), "crest-to-trough profile is monotone");
        }
        // Λ grows with amplitude
        assert!(br.waves.windows(2).all(|p| p[1].half_period() > p[0].half_period()));
    }
}

#[test]
fn crest_height_solution_converges_at_second_order() {
    let st = |np| setup(VorticitySpec::Constant { b: 0.5 }, 0.01, np);
    let solve = |np: usize, nq: usize| {
        let s = st(np);
        let t = s.pair.d_plus + 0.1 * (s.pair.d_plus - s.pair.d_minus);
        let g = seed_stokes(&s, nq, 1e-2, 1e3).unwrap();
        newton_solve(&g, Constraint::CrestHeight(t), &NewtonOptions::default())
            .unwrap()
            .grid
            .half_period()
    };
    let l1 = solve(12, 24);
    let l2 = solve(24, 48);
    let l3 = solve(48, 96);
    let ratio = (l1 - l2) / (l2 - l3);
    assert!((3.0..5.5).contains(&ratio), "{ratio}");
}

#[test]
fn seed_split_is_dominated_by_fundamental_mode() {
    let st = setup(VorticitySpec::Affine { a: 1.0, b: -2.0 }, 0.005, 32);
    for eps in [1e-3, 1e-4] {
        let g = seed_stokes(&st, 64, eps, 1e3).unwrap();
        let d = spectral_split(&g, &st.spectral);
        assert!(d.remainder_norm <= 1e-6 * (eps / 1e-4), "{eps}: {:e}", d.remainder_norm);
        assert!(d.orthogonality_defect <= 1e-13);
        // the φ₀-coordinate of w is ε cos(πq/Λ)
        for (i, w) in d.w0.iter().enumerate() {
            let c = (std::f64::consts::PI * i as f64 / 64.0).cos();
            assert!((w / d.norm - eps * c).abs() <= 1e-14, "{i}");
        }
    }
}

#[test]
fn resampling_keeps_endpoints_and_stretching_extends_flat() {
    let st = setup(VorticitySpec::Zero, 0.01, 16);
    let g = seed_stokes(&st, 24, 1e-2, 1e3).unwrap();
    let r = g.resampled(48).unwrap();
    assert_eq!(r.crest_height(), g.crest_height());
    assert!((r.eta()[48] - g.eta()[24]).abs() < 1e-15);
    let s = g.stretched(48, 2.0 * g.half_period()).unwrap();
    assert!((s.eta()[48] - g.eta()[24]).abs() < 1e-15);
    assert!((s.eta()[24] - g.eta()[24]).abs() < 1e-15);
}
