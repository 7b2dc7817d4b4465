//! Unidirectional shear-flow (stream) solutions and their critical data.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::quad::integrate;
use crate::numeric::roots::brent_with_values;
use crate::vorticity::{Argmax, OmegaClass, VorticityFn};

/// `∫_a^b g(τ, λ² − 2Ω(τ)) dτ`, with the substitution that removes the
/// square-root endpoint behaviour when max Ω sits at an endpoint.
pub(crate) fn integrate_weighted<G>(v: &VorticityFn, lambda: f64, a: f64, b: f64, g: G) -> Result<f64>
where
    G: Fn(f64, f64) -> f64,
{
    if b <= a {
        return Ok(0.0);
    }
    let excess = (lambda - v.lambda0) * (lambda + v.lambda0);
    let big_a = |tau: f64| excess + 2.0 * v.gap(tau);
    let opts = v.quad_opts();
    match v.argmax() {
        Argmax::End => {
            let (ua, ub) = ((1.0 - b).sqrt(), (1.0 - a).sqrt());
            let f = |u: f64| {
                let s = u * u;
                2.0 * u * g(1.0 - s, excess + 2.0 * v.gap_from_end(s))
            };
            Ok(integrate(f, ua, ub, opts)?.value)
        }
        Argmax::Start => {
            let f = |u: f64| {
                let tau = u * u;
                2.0 * u * g(tau, big_a(tau))
            };
            Ok(integrate(f, a.sqrt(), b.sqrt(), opts)?.value)
        }
        Argmax::Interior(x) => {
            let f = |tau: f64| g(tau, big_a(tau));
            if x > a && x < b {
                Ok(integrate(f, a, x, opts)?.value + integrate(f, x, b, opts)?.value)
            } else {
                Ok(integrate(f, a, b, opts)?.value)
            }
        }
    }
}

fn check_lambda(v: &VorticityFn, lambda: f64) -> Result<()> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::Domain(format!("lambda = {lambda} must be finite and nonnegative")));
    }
    if lambda < v.lambda0 {
        return Err(Error::Domain(format!(
            "lambda = {lambda} is below lambda0 = {}; the flow would not be unidirectional",
            v.lambda0
        )));
    }
    if lambda == v.lambda0 && !v.class.has_finite_limit() {
        return Err(Error::Divergent(format!(
            "the depth integral diverges at lambda = lambda0 = {} for class I vorticity",
            v.lambda0
        )));
    }
    Ok(())
}

/// d(λ) = ∫₀¹ (λ² − 2Ω)^{-1/2}.
pub fn depth(v: &VorticityFn, lambda: f64) -> Result<f64> {
    check_lambda(v, lambda)?;
    integrate_weighted(v, lambda, 0.0, 1.0, |_, a| 1.0 / a.sqrt())
}

/// R(λ) = (λ² − 2Ω(1) + 2d(λ)) / 3.
pub fn bernoulli_of_lambda(v: &VorticityFn, lambda: f64) -> Result<f64> {
    let d = depth(v, lambda)?;
    Ok(bernoulli_from_depth(v, lambda, d))
}

fn bernoulli_from_depth(v: &VorticityFn, lambda: f64, d: f64) -> f64 {
    (lambda * lambda - 2.0 * v.big_omega(1.0) + 2.0 * d) / 3.0
}

/// ∫₀¹ (λ² − 2Ω)^{-3/2}; equals 1 exactly at the critical λ.
pub fn criticality_integral(v: &VorticityFn, lambda: f64) -> Result<f64> {
    check_lambda(v, lambda)?;
    if lambda == v.lambda0 {
        return Ok(f64::INFINITY);
    }
    integrate_weighted(v, lambda, 0.0, 1.0, |_, a| 1.0 / (a * a.sqrt()))
}

/// R′(λ) = (2λ/3)(1 − ∫(λ² − 2Ω)^{-3/2}).
pub fn bernoulli_derivative(v: &VorticityFn, lambda: f64) -> Result<f64> {
    Ok(2.0 * lambda / 3.0 * (1.0 - criticality_integral(v, lambda)?))
}

/// ∫₀¹ (λ² − 4Ω)(λ² − 2Ω)^{-1/2}, the momentum integral of the flow force.
pub fn momentum_integral(v: &VorticityFn, lambda: f64) -> Result<f64> {
    check_lambda(v, lambda)?;
    let l2 = lambda * lambda;
    integrate_weighted(v, lambda, 0.0, 1.0, |tau, a| (l2 - 4.0 * v.big_omega(tau)) / a.sqrt())
}

/// Flow force of the stream with parameter λ (its Bernoulli constant is R(λ)).
pub fn flow_force_of_lambda(v: &VorticityFn, lambda: f64) -> Result<f64> {
    let d = depth(v, lambda)?;
    let r = bernoulli_from_depth(v, lambda, d);
    let j = momentum_integral(v, lambda)?;
    Ok((r + 2.0 / 3.0 * v.big_omega(1.0)) * d - (d * d - j) / 3.0)
}

/// One stream solution sampled on a p-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamProfile {
    pub lambda: f64,
    pub depth: f64,
    pub bernoulli: f64,
    pub p: Vec<f64>,
    /// H(p, λ)
    pub h: Vec<f64>,
    /// H_p = (λ² − 2Ω(p))^{-1/2}; infinite where λ = λ₀ meets the maximiser.
    pub hp: Vec<f64>,
    /// Set for the limiting stream λ = λ₀, whose H_p may be unbounded.
    pub experimental: bool,
}

/// Stream profile on the uniform grid `p_j = j/np`.
pub fn stream_profile(v: &VorticityFn, lambda: f64, np: usize) -> Result<StreamProfile> {
    let grid: Vec<f64> = (0..=np).map(|j| j as f64 / np as f64).collect();
    stream_profile_on(v, lambda, &grid)
}

/// Stream profile on an arbitrary increasing grid from 0 to 1.
pub fn stream_profile_on(v: &VorticityFn, lambda: f64, grid: &[f64]) -> Result<StreamProfile> {
    check_lambda(v, lambda)?;
    if grid.len() < 2 || grid[0] != 0.0 || grid[grid.len() - 1] != 1.0 {
        return Err(Error::validation("grid", "must run from 0 to 1 with at least two points"));
    }
    let mut h = Vec::with_capacity(grid.len());
    h.push(0.0);
    for w in grid.windows(2) {
        let seg = integrate_weighted(v, lambda, w[0], w[1], |_, a| 1.0 / a.sqrt())?;
        h.push(h.last().unwrap() + seg);
    }
    let excess = (lambda - v.lambda0) * (lambda + v.lambda0);
    let hp: Vec<f64> = grid
        .iter()
        .map(|&p| 1.0 / (excess + 2.0 * v.gap(p)).sqrt())
        .collect();
    let depth = *h.last().unwrap();
    Ok(StreamProfile {
        lambda,
        depth,
        bernoulli: bernoulli_from_depth(v, lambda, depth),
        p: grid.to_vec(),
        h,
        hp,
        experimental: lambda == v.lambda0,
    })
}

/// Critical and limiting values of the stream family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CriticalData {
    pub lambda0: f64,
    pub lambda_c: f64,
    pub r_c: f64,
    pub d_c: f64,
    /// d(λ₀); infinite for class I.
    pub d0: f64,
    /// R(λ₀); infinite for class I.
    pub r0: f64,
    pub class: OmegaClass,
}

pub fn critical_data(v: &VorticityFn) -> Result<CriticalData> {
    let l0 = v.lambda0;
    let mut lo = l0 + 1e-8 * (1.0 + l0);
    let hi = (l0 * l0 + 1.0).sqrt();
    let f = |l: f64| criticality_integral(v, l).map(|i| i - 1.0);
    let mut flo = f(lo)?;
    let mut tries = 0;
    while flo <= 0.0 {
        // the critical point lies extremely close to λ₀
        lo = l0 + 0.5 * (lo - l0);
        flo = f(lo)?;
        tries += 1;
        if tries > 60 {
            return Err(Error::Numerical("could not bracket the critical lambda".into()));
        }
    }
    let fhi = f(hi)?;
    let lambda_c = if fhi == 0.0 {
        hi
    } else {
        let mut opts = v.root_opts();
        opts.abs_tol = opts.abs_tol.min(1e-12);
        brent_with_values(f, lo, flo, hi, fhi, opts)?
    };
    let d_c = depth(v, lambda_c)?;
    let r_c = bernoulli_from_depth(v, lambda_c, d_c);
    let (d0, r0) = if v.class.has_finite_limit() {
        let d0 = depth(v, l0)?;
        (d0, bernoulli_from_depth(v, l0, d0))
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    Ok(CriticalData {
        lambda0: l0,
        lambda_c,
        r_c,
        d_c,
        d0,
        r0,
        class: v.class,
    })
}

/// The sub- (+) and supercritical (−) streams with Bernoulli constant r.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConjugatePair {
    pub r: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub d_plus: f64,
    pub d_minus: f64,
    /// The two roots are closer than 1e-7: r is within rounding of r_c.
    pub near_critical: bool,
}

pub fn conjugate_streams(v: &VorticityFn, r: f64) -> Result<ConjugatePair> {
    let cd = critical_data(v)?;
    conjugate_streams_with(v, &cd, r)
}

/// As [`conjugate_streams`] with precomputed critical data.
pub fn conjugate_streams_with(v: &VorticityFn, cd: &CriticalData, r: f64) -> Result<ConjugatePair> {
    if !r.is_finite() {
        return Err(Error::Domain(format!("r = {r} must be finite")));
    }
    if r <= cd.r_c {
        return Err(Error::SubcriticalParameter { r, r_c: cd.r_c });
    }
    if r >= cd.r0 {
        return Err(Error::BeyondR0 { r, r0: cd.r0 });
    }
    let g = |l: f64| bernoulli_of_lambda(v, l).map(|x| x - r);
    let opts = v.root_opts();

    // subcritical root on (λ₀, λ_c)
    let (lo, glo) = if v.class.has_finite_limit() {
        (cd.lambda0, cd.r0 - r)
    } else {
        let mut k = 1;
        loop {
            let l = cd.lambda0 + (cd.lambda_c - cd.lambda0) * 0.5f64.powi(k);
            let gl = g(l)?;
            if gl > 0.0 {
                break (l, gl);
            }
            k += 1;
            if k > 200 || l == cd.lambda0 {
                return Err(Error::Numerical(format!(
                    "cannot bracket the subcritical stream for r = {r}"
                )));
            }
        }
    };
    let gc = cd.r_c - r;
    let lambda_plus = brent_with_values(g, lo, glo, cd.lambda_c, gc, opts)?;

    // supercritical root on (λ_c, ∞)
    let mut hi = cd.lambda_c + 1.0;
    let mut ghi = g(hi)?;
    let mut k = 0;
    while ghi <= 0.0 {
        hi = cd.lambda_c + 2.0 * (hi - cd.lambda_c);
        ghi = g(hi)?;
        k += 1;
        if k > 60 {
            return Err(Error::Numerical(format!(
                "cannot bracket the supercritical stream for r = {r}"
            )));
        }
    }
    let lambda_minus = brent_with_values(g, cd.lambda_c, gc, hi, ghi, opts)?;
    let d_plus = depth(v, lambda_plus)?;
    let d_minus = depth(v, lambda_minus)?;
    Ok(ConjugatePair {
        r,
        lambda_plus,
        lambda_minus,
        d_plus,
        d_minus,
        near_critical: (lambda_minus - lambda_plus).abs() < 1e-7,
    })
}

/// Root of R(λ) = r on the given side of λ_c, by bracketed root finding.
pub fn lambda_of_bernoulli(v: &VorticityFn, cd: &CriticalData, r: f64, subcritical: bool) -> Result<f64> {
    let pair = conjugate_streams_with(v, cd, r)?;
    Ok(if subcritical {
        pair.lambda_plus
    } else {
        pair.lambda_minus
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vorticity::{make_vorticity, VorticitySpec};

    fn zero() -> VorticityFn {
        make_vorticity(VorticitySpec::Zero).unwrap()
    }
    fn half() -> VorticityFn {
        make_vorticity(VorticitySpec::Constant { b: 0.5 }).unwrap()
    }

    #[test]
    fn irrotational_depth_and_bernoulli() {
        let v = zero();
        assert!((depth(&v, 2.0).unwrap() - 0.5).abs() < 1e-14);
        assert!((bernoulli_of_lambda(&v, 1.0).unwrap() - 1.0).abs() < 1e-14);
        let r12 = (1.2f64.powi(3) + 2.0) / 3.6;
        assert!((bernoulli_of_lambda(&v, 1.2).unwrap() - r12).abs() < 1e-14);
        let mut prev = f64::INFINITY;
        for k in 1..40 {
            let d = depth(&v, 0.25 * k as f64).unwrap();
            assert!(d < prev);
            prev = d;
        }
    }

    #[test]
    fn constant_vorticity_depth() {
        let v = half();
        let want = (2.0 - 3f64.sqrt()) / 0.5;
        assert!((depth(&v, 2.0).unwrap() - want).abs() < 1e-12);
        let sp = stream_profile(&v, 2.0, 64).unwrap();
        assert!((sp.h[64] - want).abs() < 1e-10);
        assert_eq!(sp.h[0], 0.0);
    }

    #[test]
    fn irrotational_profile_is_linear() {
        let sp = stream_profile(&zero(), 2.0, 16).unwrap();
        for (p, h) in sp.p.iter().zip(&sp.h) {
            assert!((h - p / 2.0).abs() < 1e-15);
        }
        assert!(sp.hp.iter().all(|&x| (x - 0.5).abs() < 1e-15));
    }

    #[test]
    fn domain_errors() {
        let v = half();
        assert!(matches!(depth(&v, 0.5), Err(Error::Domain(_))));
        assert!(matches!(depth(&zero(), 0.0), Err(Error::Divergent(_))));
        // class III: finite at λ₀
        let d0 = depth(&v, 1.0).unwrap();
        // d(λ₀) = (1 - sqrt(1 - 1))/0.5 = 2
        assert!((d0 - 2.0).abs() < 1e-10, "{d0}");
    }

    #[test]
    fn critical_data_oracles() {
        let cd = critical_data(&zero()).unwrap();
        assert!((cd.lambda_c - 1.0).abs() < 1e-10);
        assert!((cd.r_c - 1.0).abs() < 1e-10);
        assert!((cd.d_c - 1.0).abs() < 1e-10);
        assert!(cd.d0.is_infinite() && cd.r0.is_infinite());

        let v = half();
        let cd = critical_data(&v).unwrap();
        // 1/sqrt(λ²-1) - 1/λ = 0.5 at λ_c
        let l = cd.lambda_c;
        assert!((1.0 / (l * l - 1.0).sqrt() - 1.0 / l - 0.5).abs() < 1e-9);
        assert!(cd.r0.is_finite() && cd.r0 > cd.r_c);
        assert!((cd.d0 - 2.0).abs() < 1e-10);
    }

    #[test]
    fn conjugate_irrotational() {
        let v = zero();
        let r = (1.2f64.powi(3) + 2.0) / 3.6;
        let c = conjugate_streams(&v, r).unwrap();
        let lp = (-1.2 + (1.44f64 + 20.0 / 3.0).sqrt()) / 2.0;
        assert!((c.lambda_minus - 1.2).abs() < 1e-10);
        assert!((c.lambda_plus - lp).abs() < 1e-10);
        assert!((c.d_minus - 1.0 / 1.2).abs() < 1e-10);
        assert!((c.d_plus - 1.0 / lp).abs() < 1e-10);
        assert!(matches!(conjugate_streams(&v, 0.99), Err(Error::SubcriticalParameter { .. })));
    }

    #[test]
    fn conjugate_class_three() {
        let v = half();
        let cd = critical_data(&v).unwrap();
        let c = conjugate_streams_with(&v, &cd, cd.r_c + 1e-4).unwrap();
        assert!(c.lambda_plus < cd.lambda_c && cd.lambda_c < c.lambda_minus);
        for l in [c.lambda_plus, c.lambda_minus] {
            assert!((bernoulli_of_lambda(&v, l).unwrap() - c.r).abs() < 1e-10);
        }
        assert!(c.d_minus < cd.d_c && cd.d_c < c.d_plus);
        assert!(matches!(
            conjugate_streams_with(&v, &cd, cd.r0 + 1e-3),
            Err(Error::BeyondR0 { .. })
        ));
    }

    #[test]
    fn flow_force_irrotational() {
        let v = zero();
        for l in [0.8, 1.0, 1.2, 2.0] {
            let s = flow_force_of_lambda(&v, l).unwrap();
            let want = (2.0 * l * l * l + 1.0) / (3.0 * l * l);
            assert!((s - want).abs() < 1e-13);
        }
    }

    #[test]
    fn trapezoid_consistency() {
        let v = half();
        let n = 4096;
        let sp = stream_profile(&v, 1.6, n).unwrap();
        let trap: f64 = sp.hp.windows(2).map(|w| 0.5 * (w[0] + w[1]) / n as f64).sum();
        assert!((trap - sp.depth).abs() < 1e-8);
    }
}
