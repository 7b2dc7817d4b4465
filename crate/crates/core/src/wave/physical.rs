//! Velocity field, surface profile and the a posteriori checks on a wave.

use serde::Serialize;

use super::residual::{assemble_residual, unknown_index};
use super::{WaveGrid, WaveKind};

/// Physical quantities recovered from h: ψ_x = −h_q/h_p, ψ_y = 1/h_p.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalWave {
    /// x = q at the grid columns.
    pub x: Vec<f64>,
    pub eta: Vec<f64>,
    /// Node values, row-major `[i * (np + 1) + j]`; the node sits at (x_i, h(q_i, p_j)).
    pub psi_x: Vec<f64>,
    pub psi_y: Vec<f64>,
    pub max_slope: f64,
    pub min_psi_y: f64,
    /// Sup-norm of the discrete surface row scaled to `(1 + h_q²)/h_p² + 2h − 3r`.
    pub bernoulli_residual: f64,
}

/// Second-order h_q and h_p at every node.
pub(crate) fn node_derivatives(grid: &WaveGrid) -> (Vec<f64>, Vec<f64>) {
    let np = grid.np();
    let nq = grid.nq();
    let dq = grid.dq();
    let dp = 1.0 / np as f64;
    let mut hq = vec![0.0; (nq + 1) * (np + 1)];
    let mut hp = vec![0.0; (nq + 1) * (np + 1)];
    for i in 0..=nq {
        for j in 0..=np {
            let k = i * (np + 1) + j;
            if i > 0 && i < nq {
                hq[k] = (grid.at(i + 1, j) - grid.at(i - 1, j)) / (2.0 * dq);
            }
            hp[k] = if j == 0 {
                (-3.0 * grid.at(i, 0) + 4.0 * grid.at(i, 1) - grid.at(i, 2)) / (2.0 * dp)
            } else if j == np {
                (3.0 * grid.at(i, np) - 4.0 * grid.at(i, np - 1) + grid.at(i, np - 2)) / (2.0 * dp)
            } else {
                (grid.at(i, j + 1) - grid.at(i, j - 1)) / (2.0 * dp)
            };
        }
    }
    (hq, hp)
}

pub fn reconstruct_physical(grid: &WaveGrid) -> PhysicalWave {
    let np = grid.np();
    let nq = grid.nq();
    let (hq, hp) = node_derivatives(grid);
    let psi_x: Vec<f64> = hq.iter().zip(&hp).map(|(a, b)| -a / b).collect();
    let psi_y: Vec<f64> = hp.iter().map(|b| 1.0 / b).collect();
    let eta = grid.eta();
    let max_slope = (0..=nq).map(|i| hq[i * (np + 1) + np].abs()).fold(0.0, f64::max);
    let min_psi_y = psi_y.iter().copied().fold(f64::INFINITY, f64::min);
    let bernoulli_residual = match assemble_residual(grid) {
        Ok(f) => (0..=nq)
            .map(|i| 2.0 * f[unknown_index(np, i, np)].abs())
            .fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    };
    PhysicalWave {
        x: (0..=nq).map(|i| grid.q(i)).collect(),
        eta,
        psi_x,
        psi_y,
        max_slope,
        min_psi_y,
        bernoulli_residual,
    }
}

/// Bounds that every non-stream wave at Bernoulli constant r must satisfy.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct InvariantReport {
    pub min_eta: f64,
    pub max_eta: f64,
    pub d_minus: f64,
    pub d_plus: f64,
    /// min{(6r)^{-1/2}, (2ω₀)^{-1/2}}
    pub depth_floor: f64,
    pub min_psi_y: f64,
    pub max_slope: f64,
    /// max over interior p of the discrete h_qq(0, p).
    pub crest_hqq_max: f64,
    pub above_supercritical: bool,
    pub trough_below_subcritical: bool,
    pub crest_above_subcritical: bool,
    pub below_three_halves_r: bool,
    pub above_depth_floor: bool,
    pub unidirectional: bool,
    pub crest_concave: bool,
    /// max |η′| ≤ M, reported only.
    pub within_slope_bound: bool,
}

impl InvariantReport {
    /// All asserted bounds (the slope bound is reported, not asserted).
    pub fn all_pass(&self) -> bool {
        self.above_supercritical
            && self.trough_below_subcritical
            && self.crest_above_subcritical
            && self.below_three_halves_r
            && self.above_depth_floor
            && self.unidirectional
            && self.crest_concave
    }

    /// Names of the asserted bounds that fail.
    pub fn failures(&self) -> Vec<&'static str> {
        [
            (self.above_supercritical, "min eta > d-"),
            (self.trough_below_subcritical, "min eta < d+"),
            (self.crest_above_subcritical, "max eta >= d+"),
            (self.below_three_halves_r, "max eta < 3r/2"),
            (self.above_depth_floor, "depth floor"),
            (self.unidirectional, "psi_y > 0"),
            (self.crest_concave, "h_qq(0, p) < 0"),
        ]
        .into_iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, name)| name)
        .collect()
    }
}

pub fn check_invariants(grid: &WaveGrid, slope_bound: f64) -> InvariantReport {
    let st = grid.setup();
    let np = grid.np();
    let phys = reconstruct_physical(grid);
    let min_eta = phys.eta.iter().copied().fold(f64::INFINITY, f64::min);
    let max_eta = phys.eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let r = st.r;
    let w0 = st.v.omega0;
    let floor = (6.0 * r).powf(-0.5).min(if w0 > 0.0 { (2.0 * w0).powf(-0.5) } else { f64::INFINITY });
    let dq = grid.dq();
    let crest_hqq_max = (1..np)
        .map(|j| 2.0 * (grid.at(1, j) - grid.at(0, j)) / (dq * dq))
        .fold(f64::NEG_INFINITY, f64::max);
    let is_wave = grid.kind != WaveKind::Stream;
    InvariantReport {
        min_eta,
        max_eta,
        d_minus: st.pair.d_minus,
        d_plus: st.pair.d_plus,
        depth_floor: floor,
        min_psi_y: phys.min_psi_y,
        max_slope: phys.max_slope,
        crest_hqq_max,
        above_supercritical: st.pair.d_minus < min_eta,
        trough_below_subcritical: min_eta < st.pair.d_plus,
        crest_above_subcritical: st.pair.d_plus <= max_eta,
        below_three_halves_r: max_eta < 1.5 * r,
        above_depth_floor: min_eta >= floor,
        unidirectional: phys.min_psi_y > 0.0,
        crest_concave: !is_wave || crest_hqq_max < 0.0,
        within_slope_bound: phys.max_slope <= slope_bound,
    }
}
