//! Splitting of a wave's deviation from the subcritical stream into its
//! φ₀-component and the remainder.
//!
//! With `w = h − H` and `f = h_q/h_p`, and `N = ∫ φ₀² H_p⁻¹ dp`,
//! `P₁w = φ₀ ∫ w φ₀ H_p⁻¹ / N` and `P₂f = φ₀ H_p⁻¹ ∫ f φ₀ / N`.

use serde::Serialize;

use super::physical::node_derivatives;
use super::WaveGrid;
use crate::spectral::SpectralPoint;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SplitDiagnostics {
    /// ∫ w φ₀ H_p⁻¹ dp per column.
    pub w0: Vec<f64>,
    /// ∫ f φ₀ dp per column.
    pub f0: Vec<f64>,
    /// ∫ φ₀² H_p⁻¹ dp.
    pub norm: f64,
    /// sup_q of the L²(0,1) norm of the remainder pair.
    pub remainder_norm: f64,
    /// Sup-norms of w, its first and second differences, f and its first differences.
    pub smallness: f64,
    /// sup_q |∫ w̃ φ₀ H_p⁻¹ dp|.
    pub orthogonality_defect: f64,
}

fn trapezoid(dp: f64, y: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = y.collect();
    let n = v.len() - 1;
    dp * (v[1..n].iter().sum::<f64>() + 0.5 * (v[0] + v[n]))
}

/// Uses φ₀ and H_p sampled on the grid's p-nodes; `sp` must share the grid's Np.
pub fn spectral_split(grid: &WaveGrid, sp: &SpectralPoint) -> SplitDiagnostics {
    let st = grid.setup();
    let np = grid.np();
    let nq = grid.nq();
    assert_eq!(sp.phi0.len(), np + 1, "spectral point must be sampled on the wave's p-grid");
    let dp = 1.0 / np as f64;
    let dq = grid.dq();
    let href = &st.reference.h;
    let hp_ref = &st.reference.hp;
    let phi = &sp.phi0;
    let (hq, hp) = node_derivatives(grid);
    let idx = |i: usize, j: usize| i * (np + 1) + j;
    let w: Vec<f64> = (0..=nq)
        .flat_map(|i| (0..=np).map(move |j| (i, j)))
        .map(|(i, j)| grid.at(i, j) - href[j])
        .collect();
    let f: Vec<f64> = hq.iter().zip(&hp).map(|(a, b)| a / b).collect();
    let norm = trapezoid(dp, (0..=np).map(|j| phi[j] * phi[j] / hp_ref[j]));

    let mut w0 = Vec::with_capacity(nq + 1);
    let mut f0 = Vec::with_capacity(nq + 1);
    let mut remainder_norm = 0.0f64;
    let mut orthogonality_defect = 0.0f64;
    for i in 0..=nq {
        let a = trapezoid(dp, (0..=np).map(|j| w[idx(i, j)] * phi[j] / hp_ref[j]));
        let b = trapezoid(dp, (0..=np).map(|j| f[idx(i, j)] * phi[j]));
        let wt: Vec<f64> = (0..=np).map(|j| w[idx(i, j)] - phi[j] * a / norm).collect();
        let ft: Vec<f64> = (0..=np).map(|j| f[idx(i, j)] - phi[j] / hp_ref[j] * b / norm).collect();
        let l2 = trapezoid(dp, (0..=np).map(|j| wt[j] * wt[j] + ft[j] * ft[j])).sqrt();
        remainder_norm = remainder_norm.max(l2);
        let orth = trapezoid(dp, (0..=np).map(|j| wt[j] * phi[j] / hp_ref[j]));
        orthogonality_defect = orthogonality_defect.max(orth.abs());
        w0.push(a);
        f0.push(b);
    }

    let sup = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0f64, |m, x| m.max(x.abs()));
    let w_sup = sup(&mut w.iter().copied());
    let f_sup = sup(&mut f.iter().copied());
    let mut dw = 0.0f64;
    let mut d2w = 0.0f64;
    let mut df = 0.0f64;
    for i in 0..=nq {
        for j in 0..=np {
            if i < nq {
                dw = dw.max(((w[idx(i + 1, j)] - w[idx(i, j)]) / dq).abs());
                df = df.max(((f[idx(i + 1, j)] - f[idx(i, j)]) / dq).abs());
            }
            if j < np {
                dw = dw.max(((w[idx(i, j + 1)] - w[idx(i, j)]) / dp).abs());
                df = df.max(((f[idx(i, j + 1)] - f[idx(i, j)]) / dp).abs());
            }
            if i > 0 && i < nq {
                let d = (w[idx(i + 1, j)] - 2.0 * w[idx(i, j)] + w[idx(i - 1, j)]) / (dq * dq);
                d2w = d2w.max(d.abs());
            }
            if j > 0 && j < np {
                let d = (w[idx(i, j + 1)] - 2.0 * w[idx(i, j)] + w[idx(i, j - 1)]) / (dp * dp);
                d2w = d2w.max(d.abs());
            }
            if i < nq && j < np {
                let d = (w[idx(i + 1, j + 1)] - w[idx(i + 1, j)] - w[idx(i, j + 1)] + w[idx(i, j)]) / (dq * dp);
                d2w = d2w.max(d.abs());
            }
        }
    }
    SplitDiagnostics {
        w0,
        f0,
        norm,
        remainder_norm,
        smallness: w_sup + dw + d2w + f_sup + df,
        orthogonality_defect,
    }
}
