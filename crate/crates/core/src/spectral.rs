//! The auxiliary Sturm–Liouville problem
//!
//! ```text
//! -(H_p^{-3} V_p)_p = μ H_p^{-1} V,   V(0) = 0,   H_p^{-3}(1) V_p(1) = V(1)
//! ```
//!
//! solved by shooting in the variables `(V, W = H_p^{-3} V_p)` with a Prüfer
//! angle carried alongside to count oscillations.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::ode::{integrate_to, OdeOptions};
use crate::numeric::roots::{bisect, brent, RootOptions};
use crate::stream::{bernoulli_of_lambda, conjugate_streams};
use crate::vorticity::VorticityFn;

/// Shooting solution of the initial value problem for fixed (λ, μ).
#[derive(Debug, Clone, PartialEq)]
pub struct ShootResult {
    pub lambda: f64,
    pub mu: f64,
    pub p: Vec<f64>,
    pub v: Vec<f64>,
    pub vp: Vec<f64>,
    /// H_p^{-3} V_p
    pub w: Vec<f64>,
    /// σ(λ, μ) = W(1) − V(1)
    pub sigma: f64,
    /// Prüfer angle atan(V/W) at p = 1, unwrapped from 0 at p = 0.
    pub theta: f64,
}

fn uniform(np: usize) -> Vec<f64> {
    (0..=np).map(|j| j as f64 / np as f64).collect()
}

fn hp_fn(v: &VorticityFn, lambda: f64) -> impl Fn(f64) -> f64 + '_ {
    let excess = (lambda - v.lambda0) * (lambda + v.lambda0);
    move |p: f64| 1.0 / (excess + 2.0 * v.gap(p)).sqrt()
}

fn check_lambda(v: &VorticityFn, lambda: f64) -> Result<()> {
    if !(lambda > v.lambda0) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "lambda = {lambda} must exceed lambda0 = {}",
            v.lambda0
        )));
    }
    Ok(())
}

/// Integrate the shooting problem and sample it on `grid` (increasing, from 0 to 1).
pub fn shoot_on(v: &VorticityFn, lambda: f64, mu: f64, grid: &[f64]) -> Result<ShootResult> {
    check_lambda(v, lambda)?;
    if grid.is_empty() || grid[0] != 0.0 || *grid.last().unwrap() != 1.0 {
        return Err(Error::validation("grid", "must run from 0 to 1"));
    }
    let hp = hp_fn(v, lambda);
    let rhs = |p: f64, y: &[f64; 3]| {
        let h = hp(p);
        let h3 = h * h * h;
        let (s, c) = y[2].sin_cos();
        [h3 * y[1], -mu * y[0] / h, h3 * c * c + mu * s * s / h]
    };
    let h0 = hp(0.0);
    let y0 = [0.0, 1.0 / (h0 * h0 * h0), 0.0];
    let opts = OdeOptions {
        rtol: 1e-12,
        atol: 1e-13,
        h_init: 1e-3,
        ..OdeOptions::default()
    };
    let ys = integrate_to(rhs, 0.0, y0, &grid[1..], opts, |_, _| {})?;
    let mut vv = vec![0.0];
    let mut ww = vec![y0[1]];
    let mut vp = vec![1.0];
    for (&p, y) in grid[1..].iter().zip(&ys) {
        vv.push(y[0]);
        ww.push(y[1]);
        vp.push(hp(p).powi(3) * y[1]);
    }
    let last = ys.last().copied().unwrap_or(y0);
    Ok(ShootResult {
        lambda,
        mu,
        p: grid.to_vec(),
        sigma: last[1] - last[0],
        theta: last[2],
        v: vv,
        vp,
        w: ww,
    })
}

pub fn shoot(v: &VorticityFn, lambda: f64, mu: f64, np: usize) -> Result<ShootResult> {
    shoot_on(v, lambda, mu, &uniform(np))
}

/// σ(λ, μ).
pub fn sigma(v: &VorticityFn, lambda: f64, mu: f64) -> Result<f64> {
    Ok(shoot_on(v, lambda, mu, &[0.0, 1.0])?.sigma)
}

fn theta_end(v: &VorticityFn, lambda: f64, mu: f64) -> Result<f64> {
    Ok(shoot_on(v, lambda, mu, &[0.0, 1.0])?.theta)
}

/// (min H_p, max H_p) on [0, 1].
pub fn hp_bounds(v: &VorticityFn, lambda: f64) -> (f64, f64) {
    let m = 1.0 / (lambda * lambda - 2.0 * v.min_capital_omega()).sqrt();
    let big_m = 1.0 / ((lambda - v.lambda0) * (lambda + v.lambda0)).sqrt();
    (m, big_m)
}

/// |σ(λ, 0) − (3λ²/2) R′(λ)| with R′ from Richardson-extrapolated central
/// differences of R.
pub fn dispersion_identity_check(v: &VorticityFn, lambda: f64) -> Result<f64> {
    check_lambda(v, lambda)?;
    let s0 = sigma(v, lambda, 0.0)?;
    let h = 1e-2 * (lambda - v.lambda0).min(0.1 * lambda.max(1e-3));
    let d = |h: f64| -> Result<f64> {
        Ok((bernoulli_of_lambda(v, lambda + h)? - bernoulli_of_lambda(v, lambda - h)?) / (2.0 * h))
    };
    let (d1, d2) = (d(h)?, d(0.5 * h)?);
    let rp = (4.0 * d2 - d1) / 3.0;
    Ok((s0 - 1.5 * lambda * lambda * rp).abs())
}

/// Eigen-data of the Sturm–Liouville problem at one λ.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SpectralPoint {
    pub lambda: f64,
    pub mu0: f64,
    pub mu1: f64,
    /// min H_p
    pub frakm: f64,
    /// max H_p
    pub frak_m: f64,
    /// sqrt(−μ₀) when μ₀ < 0
    pub k_star: Option<f64>,
    #[serde(skip)]
    pub p: Vec<f64>,
    /// Fundamental eigenfunction, normalised by φ₀′(0) = 1.
    #[serde(skip)]
    pub phi0: Vec<f64>,
    #[serde(skip)]
    pub phi0_p: Vec<f64>,
}

fn root_opts() -> RootOptions {
    RootOptions {
        abs_tol: 1e-12,
        rel_tol: 1e-13,
        max_iter: 200,
    }
}

/// Smallest κ ≥ 0 with tanh κ / κ = c (c ∈ (0, 1)).
fn tanh_ratio_root(c: f64) -> f64 {
    if c >= 1.0 {
        return 0.0;
    }
    // tanh κ/κ decreases from 1 to 0; κ ≤ 1/c.
    bisect(
        |k: f64| Ok(if k == 0.0 { 1.0 - c } else { k.tanh() / k - c }),
        0.0,
        1.0 / c + 1.0,
        RootOptions {
            abs_tol: 1e-14,
            rel_tol: 1e-14,
            max_iter: 200,
        },
    )
    .unwrap_or(0.0)
}

/// μ with θ(1; μ) = target, by expansion from a bracket estimate and Brent.
fn eigen_by_angle(v: &VorticityFn, lambda: f64, target: f64, mut lo: f64, step0: f64) -> Result<f64> {
    let g = |mu: f64| theta_end(v, lambda, mu).map(|t| t - target);
    let mut glo = g(lo)?;
    let mut step = step0.abs().max(1.0);
    let mut k = 0;
    while glo >= 0.0 {
        lo -= step;
        step *= 2.0;
        glo = g(lo)?;
        k += 1;
        if k > 60 {
            return Err(Error::Numerical(format!("no lower mu bracket at lambda = {lambda}")));
        }
    }
    let mut hi = lo + step0.abs().max(1.0);
    let mut ghi = g(hi)?;
    let mut step = step0.abs().max(1.0);
    k = 0;
    while ghi <= 0.0 {
        lo = hi;
        glo = ghi;
        step *= 2.0;
        hi += step;
        ghi = g(hi)?;
        k += 1;
        if k > 60 {
            return Err(Error::Numerical(format!("no upper mu bracket at lambda = {lambda}")));
        }
    }
    crate::numeric::roots::brent_with_values(g, lo, glo, hi, ghi, root_opts())
}

/// Fundamental eigenvalue μ₀(λ) and eigenfunction φ₀ on `p_j = j/np`.
pub fn mu0(v: &VorticityFn, lambda: f64, np: usize) -> Result<(f64, ShootResult)> {
    check_lambda(v, lambda)?;
    let (_, big_m) = hp_bounds(v, lambda);
    let kappa = tanh_ratio_root(big_m.powi(-3));
    let lo = -kappa * kappa / (big_m * big_m);
    let margin = 0.1 * lo.abs() + 1e-3;
    let m0 = eigen_by_angle(v, lambda, FRAC_PI_4, lo - margin, lo.abs() + 1.0)?;
    // Polish on σ itself inside a tight bracket.
    let m0 = polish_sigma(v, lambda, m0).unwrap_or(m0);
    let sh = shoot(v, lambda, m0, np)?;
    Ok((m0, sh))
}

fn polish_sigma(v: &VorticityFn, lambda: f64, mu: f64) -> Result<f64> {
    let d = 1e-9 * (1.0 + mu.abs());
    let (a, b) = (mu - d, mu + d);
    brent(|m| sigma(v, lambda, m), a, b, root_opts())
}

/// Second eigenvalue μ₁(λ).
pub fn mu1(v: &VorticityFn, lambda: f64) -> Result<f64> {
    check_lambda(v, lambda)?;
    let (m, big_m) = hp_bounds(v, lambda);
    let (m0, _) = mu0(v, lambda, 2)?;
    let step = PI * PI * m / big_m.powi(3);
    let m1 = eigen_by_angle(v, lambda, 5.0 * FRAC_PI_4, m0, step)?;
    Ok(polish_sigma(v, lambda, m1).unwrap_or(m1))
}

pub fn spectral_point(v: &VorticityFn, lambda: f64, np: usize) -> Result<SpectralPoint> {
    let (m0, sh) = mu0(v, lambda, np)?;
    let (m, big_m) = hp_bounds(v, lambda);
    let step = PI * PI * m / big_m.powi(3);
    let m1 = eigen_by_angle(v, lambda, 5.0 * FRAC_PI_4, m0, step)?;
    let m1 = polish_sigma(v, lambda, m1).unwrap_or(m1);
    Ok(SpectralPoint {
        lambda,
        mu0: m0,
        mu1: m1,
        frakm: m,
        frak_m: big_m,
        k_star: (m0 < 0.0).then(|| (-m0).sqrt()),
        p: sh.p,
        phi0: sh.v,
        phi0_p: sh.vp,
    })
}

/// q-wavenumber of the linear Stokes mode bifurcating from the subcritical
/// stream with Bernoulli constant r.
pub fn bifurcation_wavenumber(v: &VorticityFn, r: f64) -> Result<f64> {
    let pair = conjugate_streams(v, r)?;
    let (m0, _) = mu0(v, pair.lambda_plus, 2)?;
    if m0 >= 0.0 {
        return Err(Error::Inconsistent(format!(
            "mu0 = {m0:e} >= 0 at the subcritical stream lambda+ = {}",
            pair.lambda_plus
        )));
    }
    Ok((-m0).sqrt())
}
