//! Seeding from the linear mode, crest-height continuation and the long-wave
//! approximation of the solitary wave.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use super::newton::{newton_solve, Constraint, NewtonOptions};
use super::physical::check_invariants;
use super::{WaveGrid, WaveKind, WaveSetup};
use crate::error::{Error, Result};
use crate::spectral::mu0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchOptions {
    pub nq: usize,
    pub newton: NewtonOptions,
    /// Newton solves allowed per call, including failed attempts.
    pub max_steps: usize,
    /// Largest admissible half-period of a seed.
    pub lambda_cap: f64,
    /// Slope bound M, reported only.
    pub slope_bound: f64,
}

impl Default for BranchOptions {
    fn default() -> Self {
        Self {
            nq: 256,
            newton: NewtonOptions::default(),
            max_steps: 200,
            lambda_cap: 1e3,
            slope_bound: 1.0,
        }
    }
}

/// `H + ε φ₀(p) cos(π q̂)` at the linear half-period π/k*.
pub fn seed_stokes(setup: &Arc<WaveSetup>, nq: usize, epsilon: f64, lambda_cap: f64) -> Result<WaveGrid> {
    let half_period = setup.linear_half_period()?;
    if !(half_period <= lambda_cap) {
        return Err(Error::SeedRejected {
            half_period,
            cap: lambda_cap,
        });
    }
    let np = setup.np;
    let href = &setup.reference.h;
    let phi = &setup.spectral.phi0;
    let mut h = vec![0.0; (nq + 1) * (np + 1)];
    for i in 0..=nq {
        let c = (PI * i as f64 / nq as f64).cos();
        for j in 0..=np {
            h[i * (np + 1) + j] = href[j] + epsilon * phi[j] * c;
        }
    }
    let kind = if epsilon == 0.0 { WaveKind::Stream } else { WaveKind::Stokes };
    WaveGrid::from_values(setup, nq, half_period, h, kind)
}

/// Why a branch stopped short of its last target.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Truncation {
    /// Crest height of the last converged wave (d₊ if none converged).
    pub last_good_t: f64,
    pub reason: String,
    #[serde(skip)]
    pub error: Error,
}

#[derive(Debug, Clone)]
pub struct BranchResult {
    /// One wave per reached target, in order.
    pub waves: Vec<WaveGrid>,
    pub truncated: Option<Truncation>,
    /// Newton solves used, including intermediate and failed ones.
    pub steps: usize,
}

/// Tracks the last converged waves for warm starts.
struct Tracker {
    setup: Arc<WaveSetup>,
    nq: usize,
    lambda_cap: f64,
    history: Vec<WaveGrid>,
}

impl Tracker {
    fn last_t(&self) -> f64 {
        self.history
            .last()
            .map(|g| g.crest_height())
            .unwrap_or(self.setup.pair.d_plus)
    }

    fn predict(&self, t: f64) -> Result<WaveGrid> {
        let st = &self.setup;
        let np = st.np;
        match self.history.as_slice() {
            [] => {
                let eps = (t - st.reference.h[np]) / st.spectral.phi0[np];
                seed_stokes(st, self.nq, eps, self.lambda_cap)
            }
            [.., a, b] if a.nq() == b.nq() => {
                let (ta, tb) = (a.crest_height(), b.crest_height());
                let s = (t - tb) / (tb - ta);
                let h: Vec<f64> = a.values().iter().zip(b.values()).map(|(x, y)| y + s * (y - x)).collect();
                let lam = b.half_period() + s * (b.half_period() - a.half_period());
                WaveGrid::from_values(st, b.nq(), lam.max(0.5 * b.half_period()), h, WaveKind::Stokes)
            }
            [.., b] => {
                // scale the deviation from the stream
                let s = (t - st.reference.h[np]) / (b.crest_height() - st.reference.h[np]);
                let href = &st.reference.h;
                let h: Vec<f64> = b
                    .values()
                    .iter()
                    .enumerate()
                    .map(|(k, y)| href[k % (np + 1)] + s * (y - href[k % (np + 1)]))
                    .collect();
                WaveGrid::from_values(st, b.nq(), b.half_period(), h, WaveKind::Stokes)
            }
        }
    }

    fn push(&mut self, g: WaveGrid) {
        self.history.push(g);
        if self.history.len() > 2 {
            self.history.remove(0);
        }
    }
}

/// Crest heights must exceed d₊ and increase strictly.
pub fn check_targets(setup: &WaveSetup, targets: &[f64]) -> Result<()> {
    let dp = setup.pair.d_plus;
    for (k, &t) in targets.iter().enumerate() {
        if !t.is_finite() || t <= dp {
            return Err(Error::validation(
                format!("t[{k}]"),
                format!("crest height {t} must exceed the subcritical depth d+ = {dp}"),
            ));
        }
        if k > 0 && t <= targets[k - 1] {
            return Err(Error::validation(format!("t[{k}]"), "crest heights must be increasing"));
        }
    }
    Ok(())
}

/// Stokes waves with crest heights `targets`, each solved with Λ free and
/// warm-started from its predecessor; failed steps are retried at the midpoint.
pub fn continue_branch(setup: &Arc<WaveSetup>, targets: &[f64], opts: &BranchOptions) -> Result<BranchResult> {
    continue_branch_from(setup, &[], targets, opts)
}

/// As [`continue_branch`], with the predictor primed by already converged
/// waves of lower crest height (e.g. reloaded from disk).
pub fn continue_branch_from(
    setup: &Arc<WaveSetup>,
    previous: &[WaveGrid],
    targets: &[f64],
    opts: &BranchOptions,
) -> Result<BranchResult> {
    check_targets(setup, targets)?;
    let mut tr = Tracker {
        setup: setup.clone(),
        nq: opts.nq,
        lambda_cap: opts.lambda_cap,
        history: Vec::new(),
    };
    for g in previous {
        if !Arc::ptr_eq(g.setup(), setup) {
            return Err(Error::validation("previous", "waves must share the branch setup"));
        }
        if let Some(&t0) = targets.first() {
            if g.crest_height() >= t0 {
                return Err(Error::validation("previous", "waves must lie below the first target"));
            }
        }
        tr.push(g.clone());
    }
    let mut waves = Vec::new();
    let mut steps = 0;
    for &target in targets {
        let mut goal = target;
        loop {
            if steps >= opts.max_steps {
                return Ok(BranchResult {
                    truncated: Some(Truncation {
                        last_good_t: tr.last_t(),
                        reason: format!("continuation budget of {} solves exhausted", opts.max_steps),
                        error: Error::NoConvergence {
                            iterations: steps,
                            residual: f64::NAN,
                        },
                    }),
                    waves,
                    steps,
                });
            }
            steps += 1;
            let attempt = tr
                .predict(goal)
                .and_then(|g| newton_solve(&g, Constraint::CrestHeight(goal), &opts.newton));
            match attempt {
                Ok(out) => {
                    let mut g = out.grid;
                    g.kind = WaveKind::Stokes;
                    let rep = check_invariants(&g, opts.slope_bound);
                    if !rep.all_pass() {
                        return Ok(BranchResult {
                            truncated: Some(Truncation {
                                last_good_t: tr.last_t(),
                                reason: format!("wave at t = {goal} violates the wave bounds: {}", rep.failures().join(", ")),
                                error: Error::Inconsistent(format!("invariants failed at t = {goal}")),
                            }),
                            waves,
                            steps,
                        });
                    }
                    tr.push(g.clone());
                    if goal == target {
                        waves.push(g);
                        break;
                    }
                    goal = target;
                }
                Err(e) if e.is_solver_failure() => {
                    let last = tr.last_t();
                    let next = last + 0.5 * (goal - last);
                    if matches!(e, Error::TurningPoint { .. }) || next - last < 1e-12 * (1.0 + last) {
                        return Ok(BranchResult {
                            truncated: Some(Truncation {
                                last_good_t: last,
                                reason: e.to_string(),
                                error: e,
                            }),
                            waves,
                            steps,
                        });
                    }
                    goal = next;
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(BranchResult {
        waves,
        truncated: None,
        steps,
    })
}

#[derive(Debug, Clone)]
pub struct SolitaryResult {
    pub wave: WaveGrid,
    /// max(|η(Λ) − d₋|, max |η′| on [0.9Λ, Λ]).
    pub tail_error: f64,
    pub converged: bool,
    pub steps: usize,
    /// Crest heights and half-periods of the intermediate waves.
    pub path: Vec<(f64, f64)>,
}

/// max(|η(Λ) − d₋|, max |η′| over the last tenth of the half-period).
pub fn tail_error(grid: &WaveGrid) -> f64 {
    let eta = grid.eta();
    let nq = grid.nq();
    let dq = grid.dq();
    let dev = (eta[nq] - grid.setup().pair.d_minus).abs();
    let start = ((0.9 * nq as f64).floor() as usize).max(1);
    let slope = (start..nq)
        .map(|i| ((eta[i + 1] - eta[i - 1]) / (2.0 * dq)).abs())
        .fold(0.0, f64::max);
    dev.max(slope)
}

/// Long-wave stand-in for the solitary wave: continue the Stokes branch in
/// crest height until Λ has grown past the linear value, then lengthen the
/// half-period at fixed Λ steps aimed at the exponential tail decay.
pub fn solitary_approx(setup: &Arc<WaveSetup>, tail_tol: f64, opts: &BranchOptions) -> Result<SolitaryResult> {
    if !(tail_tol > 0.0) {
        return Err(Error::validation("tailTol", format!("must be positive (got {tail_tol})")));
    }
    let st = setup;
    let np = st.np;
    let d_plus = st.reference.h[np];
    let lam_star = st.linear_half_period()?;
    let dq_max = lam_star / opts.nq as f64;
    let span = st.pair.d_plus - st.pair.d_minus;
    let mut tr = Tracker {
        setup: st.clone(),
        nq: opts.nq,
        lambda_cap: opts.lambda_cap,
        history: Vec::new(),
    };
    let mut path = Vec::new();
    let mut steps = 0;
    let mut dt = 0.05 * span;
    let mut t = d_plus + dt;
    let mut current: Option<WaveGrid> = None;
    let finish = |g: WaveGrid, steps: usize, path: Vec<(f64, f64)>, converged: bool| {
        let mut g = g;
        g.kind = WaveKind::SolitaryApprox;
        let te = tail_error(&g);
        SolitaryResult {
            wave: g,
            tail_error: te,
            converged,
            steps,
            path,
        }
    };

    // Crest-height continuation until Λ ≥ 1.3 Λ*.
    while steps < opts.max_steps {
        steps += 1;
        let attempt = tr
            .predict(t)
            .and_then(|g| newton_solve(&g, Constraint::CrestHeight(t), &opts.newton));
        match attempt {
            Ok(out) => {
                let mut g = out.grid;
                g.kind = WaveKind::Stokes;
                path.push((g.crest_height(), g.half_period()));
                tr.push(g.clone());
                if tail_error(&g) <= tail_tol {
                    return Ok(finish(g, steps, path, true));
                }
                let long = g.half_period() >= 1.3 * lam_star;
                current = Some(g);
                if long {
                    break;
                }
                if out.iterations <= 4 {
                    dt *= 1.5;
                }
                t += dt;
            }
            Err(e) if e.is_solver_failure() => {
                dt *= 0.5;
                if current.is_some() && dt < 1e-9 * span {
                    break;
                }
                if current.is_none() && dt < 1e-9 * span {
                    return Err(e);
                }
                t = tr.last_t() + dt;
            }
            Err(e) => return Err(e),
        }
    }
    let mut g = match current {
        Some(g) => g,
        None => {
            return Err(Error::NoConvergence {
                iterations: steps,
                residual: f64::NAN,
            })
        }
    };

    // Fixed-Λ lengthening aimed at the tail decay rate √μ₀(λ₋).
    let (mu_minus, _) = mu0(&st.v, st.pair.lambda_minus, 2)?;
    if !(mu_minus > 0.0) {
        return Err(Error::Inconsistent(format!(
            "mu0 = {mu_minus:e} <= 0 at the supercritical stream"
        )));
    }
    let kappa = mu_minus.sqrt();
    let mut err = tail_error(&g);
    let mut shrink = 1.0;
    while err > tail_tol && steps < opts.max_steps {
        let lam = g.half_period();
        let ideal = (err / (0.5 * tail_tol)).ln().max(0.5) / kappa;
        let step = (ideal.min(0.5 * lam) * shrink).max(1e-6 * lam);
        let new_lam = lam + step;
        if new_lam > opts.lambda_cap {
            break;
        }
        let nq = ((new_lam / dq_max).ceil() as usize).max(opts.nq);
        steps += 1;
        let guess = g.stretched(nq, new_lam)?;
        match newton_solve(&guess, Constraint::FixedHalfPeriod, &opts.newton) {
            Ok(out) => {
                let w = out.grid;
                let rep = check_invariants(&w, opts.slope_bound);
                // a collapse onto the stream is not progress
                if rep.max_eta - d_plus < 0.5 * (g.crest_height() - d_plus) || !rep.unidirectional {
                    shrink *= 0.5;
                    continue;
                }
                g = w;
                err = tail_error(&g);
                path.push((g.crest_height(), g.half_period()));
                shrink = (shrink * 2.0).min(1.0);
            }
            Err(e) if e.is_solver_failure() => {
                shrink *= 0.5;
                if shrink < 1e-4 {
                    break;
                }
            }
            Err(e) => return Err(e),
        }
    }
    let ok = err <= tail_tol;
    Ok(finish(g, steps, path, ok))
}
