//! Flow force of streams and waves, and the cuspidal region bounded by the
//! stream curves s₋(r) ≤ s < s₊(r).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::pchip::Pchip;
use crate::numeric::roots::brent_with_values;
use crate::stream::{bernoulli_of_lambda, critical_data, flow_force_of_lambda, CriticalData};
use crate::vorticity::{OmegaClass, VorticityFn};
use crate::wave::WaveGrid;

/// Half-width of the band attributed to the boundary curves.
pub const BOUNDARY_BAND: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StreamBranch {
    Plus,
    Minus,
}

/// λ on the requested side of λ_c with R(λ) = r, allowing r = r_c and, for
/// the subcritical side, r = r₀.
fn stream_lambda(v: &VorticityFn, cd: &CriticalData, r: f64, branch: StreamBranch) -> Result<f64> {
    if !r.is_finite() || r < cd.r_c {
        return Err(Error::Domain(format!("r = {r} lies below r_c = {}", cd.r_c)));
    }
    if r == cd.r_c {
        return Ok(cd.lambda_c);
    }
    let g = |l: f64| bernoulli_of_lambda(v, l).map(|x| x - r);
    let opts = v.root_opts();
    match branch {
        StreamBranch::Plus => {
            if r > cd.r0 {
                return Err(Error::BeyondR0 { r, r0: cd.r0 });
            }
            if r == cd.r0 {
                return Ok(cd.lambda0);
            }
            let (lo, glo) = if cd.class.has_finite_limit() {
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
                    if k > 200 {
                        return Err(Error::Numerical(format!("cannot bracket lambda+ for r = {r}")));
                    }
                }
            };
            brent_with_values(g, lo, glo, cd.lambda_c, cd.r_c - r, opts)
        }
        StreamBranch::Minus => {
            let mut hi = cd.lambda_c + 1.0;
            let mut ghi = g(hi)?;
            let mut k = 0;
            while ghi <= 0.0 {
                hi = cd.lambda_c + 2.0 * (hi - cd.lambda_c);
                ghi = g(hi)?;
                k += 1;
                if k > 60 {
                    return Err(Error::Numerical(format!("cannot bracket lambda- for r = {r}")));
                }
            }
            brent_with_values(g, cd.lambda_c, cd.r_c - r, hi, ghi, opts)
        }
    }
}

/// s₊(r) or s₋(r).
pub fn flow_force_stream(v: &VorticityFn, cd: &CriticalData, r: f64, branch: StreamBranch) -> Result<f64> {
    let l = stream_lambda(v, cd, r, branch)?;
    flow_force_of_lambda(v, l)
}

/// Flow force on column `q_index` of a wave,
/// `[r + ⅔Ω(1)] η − ⅓{η² + 2 Σ_k dp [f_k(S) + Q²/(2S)]}`, where `f_k` are the
/// cell energies of the discrete scheme and `Q` is the central q-difference
/// averaged over the cell. Exact on both conjugate streams.
pub fn flow_force_column(grid: &WaveGrid, q_index: usize) -> f64 {
    let st = grid.setup();
    let np = grid.np();
    let nq = grid.nq();
    assert!(q_index <= nq, "column {q_index} outside 0..={nq}");
    let dp = 1.0 / np as f64;
    let dq = grid.dq();
    let i = q_index;
    let hq = |j: usize| {
        if i == 0 || i == nq {
            0.0
        } else {
            (grid.at(i + 1, j) - grid.at(i - 1, j)) / (2.0 * dq)
        }
    };
    let mut sum = 0.0;
    let mut q_lo = hq(0);
    for (j, cell) in st.cells.iter().enumerate() {
        let q_hi = hq(j + 1);
        let qm = 0.5 * (q_lo + q_hi);
        let s = (grid.at(i, j + 1) - grid.at(i, j)) / dp;
        sum += dp * (cell.energy(s) + 0.5 * qm * qm / s);
        q_lo = q_hi;
    }
    let eta = grid.at(i, np);
    (st.r + 2.0 / 3.0 * st.omega_top) * eta - (eta * eta + 2.0 * sum) / 3.0
}

/// Flow force on every column.
pub fn flow_force_profile(grid: &WaveGrid) -> Vec<f64> {
    (0..=grid.nq()).map(|i| flow_force_column(grid, i)).collect()
}

/// Flow force of a wave: the mean of the column values.
pub fn flow_force_wave(grid: &WaveGrid) -> f64 {
    let s = flow_force_profile(grid);
    s.iter().sum::<f64>() / s.len() as f64
}

/// (max − min)/|mean| of the flow force over the columns.
pub fn flow_force_variation(grid: &WaveGrid) -> f64 {
    let s = flow_force_profile(grid);
    let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = s.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    (max - min) / mean.abs()
}

#[derive(Debug, Clone)]
pub struct CuspRegion {
    pub r_grid: Vec<f64>,
    pub s_minus: Vec<f64>,
    pub s_plus: Vec<f64>,
    /// +∞ for class I.
    pub r0: f64,
    pub class: OmegaClass,
    lower: Option<Pchip>,
    upper: Option<Pchip>,
}

/// Samples s±(r) on `n` points clustered towards r_c, up to `r_max` or r₀.
pub fn build_region(v: &VorticityFn, r_max: f64, n: usize) -> Result<CuspRegion> {
    let cd = critical_data(v)?;
    build_region_with(v, &cd, r_max, n)
}

pub fn build_region_with(v: &VorticityFn, cd: &CriticalData, r_max: f64, n: usize) -> Result<CuspRegion> {
    if !(r_max > cd.r_c) {
        return Err(Error::validation("rMax", format!("must exceed r_c = {}", cd.r_c)));
    }
    if n < 2 {
        return Err(Error::validation("n", "need at least two points"));
    }
    let top = r_max.min(cd.r0);
    let span = top - cd.r_c;
    let mut r_grid: Vec<f64> = (0..n)
        .map(|k| {
            let x = k as f64 / (n - 1) as f64;
            cd.r_c + span * (1.0 - (0.5 * std::f64::consts::PI * x).cos())
        })
        .collect();
    r_grid[0] = cd.r_c;
    r_grid[n - 1] = top;
    let mut s_minus = Vec::with_capacity(n);
    let mut s_plus = Vec::with_capacity(n);
    for &r in &r_grid {
        s_minus.push(flow_force_stream(v, cd, r, StreamBranch::Minus)?);
        s_plus.push(flow_force_stream(v, cd, r, StreamBranch::Plus)?);
    }
    let strictly_increasing = r_grid.windows(2).all(|w| w[1] > w[0]);
    let (lower, upper) = if strictly_increasing {
        (Some(Pchip::new(&r_grid, &s_minus)?), Some(Pchip::new(&r_grid, &s_plus)?))
    } else {
        (None, None)
    };
    Ok(CuspRegion {
        r_grid,
        s_minus,
        s_plus,
        r0: cd.r0,
        class: cd.class,
        lower,
        upper,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Position {
    Inside,
    LowerBoundary,
    UpperBoundary,
    TruncationEdge,
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionPoint {
    pub r: f64,
    pub s: f64,
    pub position: Position,
}

impl RegionPoint {
    /// The region contains its lower curve but not its upper curve.
    pub fn is_member(&self) -> bool {
        matches!(self.position, Position::Inside | Position::LowerBoundary)
    }
}

impl CuspRegion {
    /// (s₋(r), s₊(r)) by monotone cubic interpolation of the samples.
    pub fn bounds_at(&self, r: f64) -> Result<(f64, f64)> {
        let lo = self.r_grid[0];
        let hi = *self.r_grid.last().unwrap();
        if !(r >= lo && r <= hi) {
            return Err(Error::Domain(format!(
                "r = {r} lies outside the sampled range [{lo}, {hi}]"
            )));
        }
        match (&self.lower, &self.upper) {
            (Some(l), Some(u)) => Ok((l.eval(r), u.eval(r))),
            _ => Ok((self.s_minus[0], self.s_plus[0])),
        }
    }
}

fn classify(r: f64, s: f64, lo: f64, hi: f64, r0: f64) -> RegionPoint {
    let band = BOUNDARY_BAND;
    let position = if (s - lo).abs() <= band {
        Position::LowerBoundary
    } else if (s - hi).abs() <= band {
        Position::UpperBoundary
    } else if s < lo || s > hi {
        Position::Outside
    } else if r0.is_finite() && (r - r0).abs() <= band {
        Position::TruncationEdge
    } else {
        Position::Inside
    };
    RegionPoint { r, s, position }
}

/// Membership against the interpolated boundary curves.
pub fn contains(region: &CuspRegion, r: f64, s: f64) -> Result<RegionPoint> {
    let (lo, hi) = region.bounds_at(r)?;
    Ok(classify(r, s, lo, hi, region.r0))
}

/// Membership against s±(r) evaluated directly from the streams at r.
pub fn contains_exact(v: &VorticityFn, cd: &CriticalData, r: f64, s: f64) -> Result<RegionPoint> {
    let lo = flow_force_stream(v, cd, r, StreamBranch::Minus)?;
    let hi = flow_force_stream(v, cd, r, StreamBranch::Plus)?;
    Ok(classify(r, s, lo, hi, cd.r0))
}

/// s(t) along a branch and the monotonicity and endpoint verdicts.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BranchFlowForce {
    pub t: Vec<f64>,
    pub s: Vec<f64>,
    /// Every consecutive difference is negative (vacuously true for fewer than two waves).
    pub monotonic: bool,
    pub vacuous: bool,
    /// |s(first wave) − s₊(r)|
    pub s_plus_gap: Option<f64>,
    /// |s(solitary approximation) − s₋(r)|
    pub s_minus_gap: Option<f64>,
}

/// Flow force of each wave along a branch (crest heights increasing).
pub fn branch_flow_force(
    branch: &[WaveGrid],
    solitary: Option<&WaveGrid>,
    v: &VorticityFn,
    cd: &CriticalData,
) -> Result<BranchFlowForce> {
    let t: Vec<f64> = branch.iter().map(|g| g.crest_height()).collect();
    let s: Vec<f64> = branch.iter().map(|g| flow_force_wave(g)).collect();
    let monotonic = s.windows(2).all(|w| w[1] < w[0]);
    let r = branch
        .first()
        .or(solitary)
        .map(|g| g.r());
    let s_plus_gap = match (r, s.first()) {
        (Some(r), Some(&s0)) => Some((s0 - flow_force_stream(v, cd, r, StreamBranch::Plus)?).abs()),
        _ => None,
    };
    let s_minus_gap = match (r, solitary) {
        (Some(r), Some(g)) => {
            Some((flow_force_wave(g) - flow_force_stream(v, cd, r, StreamBranch::Minus)?).abs())
        }
        _ => None,
    };
    Ok(BranchFlowForce {
        vacuous: branch.len() < 2,
        t,
        s,
        monotonic,
        s_plus_gap,
        s_minus_gap,
    })
}

/// Qualitative comparison with the ν-parametrised irrotational curves
/// `r = (1 + 2ν)/(3ν^{2/3})`, `s = (2 + ν)/(3ν^{1/3})`: both parametrisations
/// must have their cusp at (1, 1), one ν-branch must lie below the other at
/// every r while the sampled s₊ lies above s₋, and all four curves must
/// increase in r. Values are not compared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ShapeCheck {
    pub cusp_matches: bool,
    pub ordering_matches: bool,
    pub monotone: bool,
}

pub fn nu_curve_shape_check(region: &CuspRegion) -> Result<ShapeCheck> {
    let r_nu = |nu: f64| (1.0 + 2.0 * nu) / (3.0 * nu.powf(2.0 / 3.0));
    let s_nu = |nu: f64| (2.0 + nu) / (3.0 * nu.powf(1.0 / 3.0));
    let cusp_matches = (r_nu(1.0) - 1.0).abs() < 1e-15
        && (s_nu(1.0) - 1.0).abs() < 1e-15
        && (region.r_grid[0] - 1.0).abs() < 1e-8
        && (region.s_minus[0] - 1.0).abs() < 1e-8
        && (region.s_plus[0] - 1.0).abs() < 1e-8;
    let mut signs = Vec::with_capacity(20);
    let mut monotone = true;
    let mut prev: Option<(f64, f64, f64)> = None;
    for k in 1..=20 {
        let r = 1.0 + 0.005 * k as f64;
        let inv = |lo: f64, hi: f64| -> Result<f64> {
            let g = |nu: f64| Ok(r_nu(nu) - r);
            crate::numeric::roots::bisect(g, lo, hi, Default::default())
        };
        let (nu_sub, nu_super) = (inv(1e-6, 1.0)?, inv(1.0, 1e6)?);
        let (a, b) = (s_nu(nu_sub), s_nu(nu_super));
        signs.push((a - b).signum());
        if let Some((pr, pa, pb)) = prev {
            monotone &= r > pr && a > pa && b > pb;
        }
        prev = Some((r, a, b));
    }
    let ordering_matches = signs.iter().all(|&x| x != 0.0 && x == signs[0])
        && region.s_plus[1..]
            .iter()
            .zip(&region.s_minus[1..])
            .all(|(p, m)| p > m);
    monotone &= region.s_plus.windows(2).all(|w| w[1] > w[0])
        && region.s_minus.windows(2).all(|w| w[1] > w[0]);
    Ok(ShapeCheck {
        cusp_matches,
        ordering_matches,
        monotone,
    })
}
