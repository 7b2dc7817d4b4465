//! Steady waves in hodograph variables.
//!
//! The unknown is the height function `h(q, p)` on the half-period strip
//! `0 ≤ q ≤ Λ`, `0 ≤ p ≤ 1`, crest at `q = 0`, trough at `q = Λ`. The grid is
//! uniform in `q̂ = q/Λ` and `p`; `Λ` enters the difference quotients.

mod branch;
mod newton;
mod physical;
mod residual;
mod split;

use std::sync::Arc;

use serde::Serialize;

pub use branch::{
    check_targets, continue_branch, continue_branch_from, seed_stokes, solitary_approx, tail_error, BranchOptions, BranchResult,
    SolitaryResult, Truncation,
};
pub use newton::{newton_solve, Constraint, NewtonOptions, NewtonOutcome};
pub use physical::{check_invariants, reconstruct_physical, InvariantReport, PhysicalWave};
pub use residual::{assemble_jacobian, assemble_residual, fd_jacobian, Jacobian};
pub use split::{spectral_split, SplitDiagnostics};

use crate::error::{Error, Result};
use crate::spectral::{spectral_point, SpectralPoint};
use crate::stream::{
    conjugate_streams_with, critical_data, integrate_weighted, stream_profile, ConjugatePair,
    CriticalData, StreamProfile,
};
use crate::vorticity::VorticityFn;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveKind {
    Stream,
    Stokes,
    SolitaryApprox,
}

impl WaveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WaveKind::Stream => "stream",
            WaveKind::Stokes => "stokes",
            WaveKind::SolitaryApprox => "solitary-approx",
        }
    }
}

/// Energy density of one p-cell as a function of the cell slope S:
/// `f(S) = −1/(2S) + Ω(p_mid) S + c(S − x0)`. The correction c is the cubic
/// through the two conjugate streams' values and slopes, so both streams are
/// exact discrete solutions with exact flow force; outside the fitted interval
/// it continues by its quadratic Taylor polynomial, which keeps f twice
/// continuously differentiable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct CellLaw {
    pub omega: f64,
    pub x0: f64,
    /// Fitted interval in u = S − x0.
    pub u_lo: f64,
    pub u_hi: f64,
    pub c: [f64; 4],
}

impl CellLaw {
    /// Cubic Hermite fit of the correction through (x0, y0, m0) and (x1, y1, m1).
    fn fit(omega: f64, pts: &[(f64, f64, f64)]) -> Self {
        let base = |s: f64| -0.5 / s + omega * s;
        let dbase = |s: f64| 0.5 / (s * s) + omega;
        let (x0, f0, g0) = pts[0];
        let (y0, m0) = (f0 - base(x0), g0 - dbase(x0));
        let mut c = [y0, m0, 0.0, 0.0];
        let mut h = 0.0;
        if let Some(&(x1, f1, g1)) = pts.get(1) {
            h = x1 - x0;
            let (y1, m1) = (f1 - base(x1), g1 - dbase(x1));
            let q = (y1 - y0) / h;
            c[2] = (3.0 * q - 2.0 * m0 - m1) / h;
            c[3] = (m0 + m1 - 2.0 * q) / (h * h);
        }
        CellLaw {
            omega,
            x0,
            u_lo: h.min(0.0),
            u_hi: h.max(0.0),
            c,
        }
    }

    #[inline]
    fn corr<S: residual::Scalar>(&self, u: S) -> S {
        ((u * self.c[3] + self.c[2]) * u + self.c[1]) * u + self.c[0]
    }

    #[inline]
    fn dcorr<S: residual::Scalar>(&self, u: S) -> S {
        (u * (3.0 * self.c[3]) + 2.0 * self.c[2]) * u + self.c[1]
    }

    #[inline]
    fn d2corr(&self, u: f64) -> f64 {
        6.0 * self.c[3] * u + 2.0 * self.c[2]
    }

    #[inline]
    pub fn energy<S: residual::Scalar>(&self, s: S) -> S {
        let u = s - self.x0;
        let uv = u.value();
        let corr = if uv < self.u_lo || uv > self.u_hi {
            let ev = uv.clamp(self.u_lo, self.u_hi);
            let (e, du) = (S::cst(ev), u - ev);
            self.corr(e) + self.dcorr(e) * du + du * du * (0.5 * self.d2corr(ev))
        } else {
            self.corr(u)
        };
        S::cst(-0.5) / s + s * self.omega + corr
    }

    /// f′(S)
    #[inline]
    pub fn force<S: residual::Scalar>(&self, s: S) -> S {
        let u = s - self.x0;
        let uv = u.value();
        let corr = if uv < self.u_lo || uv > self.u_hi {
            let ev = uv.clamp(self.u_lo, self.u_hi);
            self.dcorr(S::cst(ev)) + (u - ev) * self.d2corr(ev)
        } else {
            self.dcorr(u)
        };
        S::cst(0.5) / (s * s) + self.omega + corr
    }
}

/// Everything shared by the waves at one Bernoulli constant and p-resolution.
///
/// The discrete equations are the Euler–Lagrange equations of a lattice
/// Lagrangian whose cell energies are calibrated on the two conjugate
/// streams, so both are exact discrete solutions.
#[derive(Debug)]
pub struct WaveSetup {
    pub v: VorticityFn,
    pub r: f64,
    pub np: usize,
    pub critical: CriticalData,
    pub pair: ConjugatePair,
    /// H(·, λ₊) on `p_j = j/np`.
    pub reference: StreamProfile,
    /// H(·, λ₋) on the same grid.
    pub supercritical: StreamProfile,
    /// Eigen-data at λ₊ on the same p-grid.
    pub spectral: SpectralPoint,
    pub(crate) cells: Vec<CellLaw>,
    pub(crate) omega_top: f64,
}

impl WaveSetup {
    pub fn new(v: &VorticityFn, r: f64, np: usize) -> Result<Arc<Self>> {
        let cd = critical_data(v)?;
        Self::with_critical(v, &cd, r, np)
    }

    pub fn with_critical(v: &VorticityFn, cd: &CriticalData, r: f64, np: usize) -> Result<Arc<Self>> {
        if np < 8 {
            return Err(Error::validation("grid.np", format!("must be at least 8 (got {np})")));
        }
        let pair = conjugate_streams_with(v, cd, r)?;
        let reference = stream_profile(v, pair.lambda_plus, np)?;
        if reference.experimental {
            return Err(Error::Domain(format!(
                "the subcritical stream at r = {r} is the limiting stream lambda = lambda0"
            )));
        }
        let supercritical = stream_profile(v, pair.lambda_minus, np)?;
        let spectral = spectral_point(v, pair.lambda_plus, np)?;
        let dp = 1.0 / np as f64;
        // (S, cell energy, λ²/2) of each stream in each cell
        let cell_data = |prof: &StreamProfile| -> Result<Vec<(f64, f64, f64)>> {
            let l = prof.lambda;
            (0..np)
                .map(|j| {
                    let s = (prof.h[j + 1] - prof.h[j]) / dp;
                    let root = integrate_weighted(v, l, prof.p[j], prof.p[j + 1], |_, a| a.sqrt())?;
                    Ok((s, 0.5 * l * l * s - root / dp, 0.5 * l * l))
                })
                .collect()
        };
        let plus = cell_data(&reference)?;
        let minus = cell_data(&supercritical)?;
        let cells = (0..np)
            .map(|j| {
                let omega = v.big_omega((j as f64 + 0.5) * dp);
                let (xp, xm) = (plus[j].0, minus[j].0);
                if (xm - xp).abs() > 1e-4 * xp {
                    CellLaw::fit(omega, &[plus[j], minus[j]])
                } else {
                    CellLaw::fit(omega, &[plus[j]])
                }
            })
            .collect();
        Ok(Arc::new(WaveSetup {
            v: v.clone(),
            r,
            np,
            critical: *cd,
            pair,
            reference,
            supercritical,
            spectral,
            cells,
            omega_top: v.big_omega(1.0),
        }))
    }

    pub fn dp(&self) -> f64 {
        1.0 / self.np as f64
    }

    /// Half-period of the linear Stokes mode, π/k*.
    pub fn linear_half_period(&self) -> Result<f64> {
        match self.spectral.k_star {
            Some(k) => Ok(std::f64::consts::PI / k),
            None => Err(Error::Inconsistent(format!(
                "mu0 = {:e} >= 0 at the subcritical stream",
                self.spectral.mu0
            ))),
        }
    }
}

/// Discrete height function on the half-period strip.
#[derive(Debug, Clone)]
pub struct WaveGrid {
    setup: Arc<WaveSetup>,
    half_period: f64,
    nq: usize,
    /// `h[i * (np + 1) + j] = h(q_i, p_j)`.
    h: Vec<f64>,
    pub kind: WaveKind,
}

impl WaveGrid {
    /// The reference stream replicated in q.
    pub fn stream(setup: &Arc<WaveSetup>, nq: usize, half_period: f64) -> Result<Self> {
        let col = setup.reference.h.clone();
        let h = (0..=nq).flat_map(|_| col.iter().copied()).collect();
        Self::from_values(setup, nq, half_period, h, WaveKind::Stream)
    }

    pub fn from_values(
        setup: &Arc<WaveSetup>,
        nq: usize,
        half_period: f64,
        h: Vec<f64>,
        kind: WaveKind,
    ) -> Result<Self> {
        if nq < 8 {
            return Err(Error::validation("grid.nq", format!("must be at least 8 (got {nq})")));
        }
        if !(half_period > 0.0) || !half_period.is_finite() {
            return Err(Error::validation("Lambda", format!("must be positive (got {half_period})")));
        }
        let np = setup.np;
        if h.len() != (nq + 1) * (np + 1) {
            return Err(Error::validation(
                "h",
                format!("expected {} values, got {}", (nq + 1) * (np + 1), h.len()),
            ));
        }
        let mut g = WaveGrid {
            setup: setup.clone(),
            half_period,
            nq,
            h,
            kind,
        };
        for i in 0..=nq {
            g.h[i * (np + 1)] = 0.0;
        }
        Ok(g)
    }

    pub fn setup(&self) -> &Arc<WaveSetup> {
        &self.setup
    }

    pub fn r(&self) -> f64 {
        self.setup.r
    }

    pub fn np(&self) -> usize {
        self.setup.np
    }

    pub fn nq(&self) -> usize {
        self.nq
    }

    pub fn half_period(&self) -> f64 {
        self.half_period
    }

    pub fn dq(&self) -> f64 {
        self.half_period / self.nq as f64
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.h[i * (self.setup.np + 1) + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.h
    }

    pub fn q(&self, i: usize) -> f64 {
        self.half_period * (i as f64 / self.nq as f64)
    }

    pub fn p(&self, j: usize) -> f64 {
        j as f64 / self.setup.np as f64
    }

    /// t = h(0, 1).
    pub fn crest_height(&self) -> f64 {
        self.at(0, self.setup.np)
    }

    /// Surface profile η(q_i) = h(q_i, 1).
    pub fn eta(&self) -> Vec<f64> {
        (0..=self.nq).map(|i| self.at(i, self.setup.np)).collect()
    }

    pub(crate) fn unknowns(&self) -> Vec<f64> {
        let np = self.setup.np;
        let mut x = Vec::with_capacity((self.nq + 1) * np);
        for i in 0..=self.nq {
            x.extend_from_slice(&self.h[i * (np + 1) + 1..(i + 1) * (np + 1)]);
        }
        x
    }

    pub(crate) fn with_unknowns(&self, x: &[f64], half_period: f64) -> Self {
        let np = self.setup.np;
        let mut h = vec![0.0; self.h.len()];
        for i in 0..=self.nq {
            h[i * (np + 1) + 1..(i + 1) * (np + 1)].copy_from_slice(&x[i * np..(i + 1) * np]);
        }
        WaveGrid {
            setup: self.setup.clone(),
            half_period,
            nq: self.nq,
            h,
            kind: self.kind,
        }
    }

    /// Smallest discrete increment h(i, j+1) − h(i, j).
    pub fn min_increment(&self) -> f64 {
        let np = self.setup.np;
        let mut m = f64::INFINITY;
        for i in 0..=self.nq {
            for j in 0..np {
                m = m.min(self.at(i, j + 1) - self.at(i, j));
            }
        }
        m
    }

    /// Resample onto `nq` intervals of a longer half-period, continuing the
    /// trough column flat beyond the old half-period.
    pub fn stretched(&self, nq: usize, half_period: f64) -> Result<Self> {
        let np = self.setup.np;
        let old_dq = self.dq();
        let mut h = vec![0.0; (nq + 1) * (np + 1)];
        for i in 0..=nq {
            let q = (i as f64 * half_period / nq as f64).min(self.half_period);
            let s = q / old_dq;
            let k = (s.floor() as usize).min(self.nq - 1);
            let w = (s - k as f64).clamp(0.0, 1.0);
            for j in 0..=np {
                h[i * (np + 1) + j] = (1.0 - w) * self.at(k, j) + w * self.at(k + 1, j);
            }
        }
        Self::from_values(&self.setup, nq, half_period, h, self.kind)
    }

    /// Resample onto `nq` intervals of the same half-period (linear in q).
    pub fn resampled(&self, nq: usize) -> Result<Self> {
        self.stretched(nq, self.half_period)
    }

    /// Inverse of [`long_format`](Self::long_format); Λ is read from the last q.
    pub fn from_long_format(setup: &Arc<WaveSetup>, rows: &[(f64, f64, f64)], kind: WaveKind) -> Result<Self> {
        let np = setup.np;
        if rows.is_empty() || rows.len() % (np + 1) != 0 {
            return Err(Error::validation(
                "wave",
                format!("{} rows do not form columns of {} points", rows.len(), np + 1),
            ));
        }
        let nq = rows.len() / (np + 1) - 1;
        let half_period = rows[rows.len() - 1].0;
        if rows.iter().step_by(np + 1).any(|r| r.2 != 0.0) {
            return Err(Error::validation("wave", "h must vanish on p = 0"));
        }
        let h = rows.iter().map(|r| r.2).collect();
        let g = Self::from_values(setup, nq, half_period, h, kind)?;
        for (k, &(q, p, _)) in rows.iter().enumerate() {
            let (i, j) = (k / (np + 1), k % (np + 1));
            if q != g.q(i) || (p - g.p(j)).abs() > 1e-15 {
                return Err(Error::validation(
                    format!("wave row {k}"),
                    format!("(q, p) = ({q}, {p}) is not node ({i}, {j}) of a {nq} x {np} grid"),
                ));
            }
        }
        Ok(g)
    }

    /// Row-major `(q, p, h)` triples.
    pub fn long_format(&self) -> Vec<(f64, f64, f64)> {
        let np = self.setup.np;
        let mut out = Vec::with_capacity(self.h.len());
        for i in 0..=self.nq {
            for j in 0..=np {
                out.push((self.q(i), self.p(j), self.at(i, j)));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests;
