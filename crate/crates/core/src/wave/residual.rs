//! Discrete residual of the hodograph problem and its Jacobian.
//!
//! The rows are the derivatives of a lattice Lagrangian built from per-cell
//! energies `f_k(S) − Q²/(2S)` with `S = Δ_p h` and `Q` the p-averaged `Δ_q h`,
//! plus the surface term `h²/2 − (3r/2 + Ω(1)) h`. Interior rows approximate
//! `(h_q/h_p)_q − ½((1 + h_q²)/h_p²)_p − ω`; the top row approximates
//! `½(1 + h_q²)/h_p² + h − 3r/2`. Ghost columns mirror i = 1 and i = Nq − 1.

use std::ops::{Add, Div, Mul, Neg, Sub};

use super::{CellLaw, WaveGrid};
use crate::error::{Error, Result};
use crate::numeric::band::BandMatrix;

pub(crate) trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(x: f64) -> Self;
    fn value(&self) -> f64;
}

impl Scalar for f64 {
    #[inline]
    fn cst(x: f64) -> Self {
        x
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
}

/// Slots of the local 3×3 stencil plus Λ.
const NG: usize = 10;

/// Forward-mode dual number over the local stencil.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Dual {
    v: f64,
    g: [f64; NG],
}

impl Dual {
    fn var(v: f64, k: usize) -> Self {
        let mut g = [0.0; NG];
        g[k] = 1.0;
        Dual { v, g }
    }
}

impl Scalar for Dual {
    #[inline]
    fn cst(x: f64) -> Self {
        Dual { v: x, g: [0.0; NG] }
    }
    #[inline]
    fn value(&self) -> f64 {
        self.v
    }
}

impl Add for Dual {
    type Output = Dual;
    #[inline]
    fn add(mut self, o: Dual) -> Dual {
        self.v += o.v;
        for k in 0..NG {
            self.g[k] += o.g[k];
        }
        self
    }
}

impl Sub for Dual {
    type Output = Dual;
    #[inline]
    fn sub(mut self, o: Dual) -> Dual {
        self.v -= o.v;
        for k in 0..NG {
            self.g[k] -= o.g[k];
        }
        self
    }
}

impl Mul for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, o: Dual) -> Dual {
        let mut g = [0.0; NG];
        for (k, gk) in g.iter_mut().enumerate() {
            *gk = self.g[k] * o.v + self.v * o.g[k];
        }
        Dual { v: self.v * o.v, g }
    }
}

impl Div for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, o: Dual) -> Dual {
        let inv = 1.0 / o.v;
        let v = self.v * inv;
        let mut g = [0.0; NG];
        for (k, gk) in g.iter_mut().enumerate() {
            *gk = (self.g[k] - v * o.g[k]) * inv;
        }
        Dual { v, g }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        self * -1.0
    }
}

impl Add<f64> for Dual {
    type Output = Dual;
    #[inline]
    fn add(mut self, o: f64) -> Dual {
        self.v += o;
        self
    }
}

impl Sub<f64> for Dual {
    type Output = Dual;
    #[inline]
    fn sub(mut self, o: f64) -> Dual {
        self.v -= o;
        self
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    #[inline]
    fn mul(mut self, o: f64) -> Dual {
        self.v *= o;
        for g in self.g.iter_mut() {
            *g *= o;
        }
        self
    }
}

impl Div<f64> for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, o: f64) -> Dual {
        self * (1.0 / o)
    }
}

/// ∂φ/∂S and ∂φ/∂Q of `φ(S, Q) = f(S) − Q²/(2S)`.
#[inline]
fn phi_s<S: Scalar>(cell: &CellLaw, s: S, q: S) -> S {
    cell.force(s) + q * q / (s * s) * 0.5
}

#[inline]
fn phi_q<S: Scalar>(s: S, q: S) -> S {
    S::cst(0.0) - q / s
}

/// Interior row; `x[a][b] = h(i + a − 1, j + b − 1)`, cells `lo = j − ½`, `hi = j + ½`.
#[inline]
fn interior<S: Scalar>(x: &[[S; 3]; 3], lam: S, nq: f64, dp: f64, lo: &CellLaw, hi: &CellLaw) -> S {
    let d = lam / nq;
    let sl = |a: usize| (x[a][1] - x[a][0]) / dp;
    let sh = |a: usize| (x[a][2] - x[a][1]) / dp;
    // v on the q-cells left (a = 0..1) and right (a = 1..2) of the node, per p-node b
    let v = |c: usize, b: usize| (x[c + 1][b] - x[c][b]) / d;
    let ql = |c: usize| (v(c, 0) + v(c, 1)) * 0.5;
    let qh = |c: usize| (v(c, 1) + v(c, 2)) * 0.5;
    let mut r = S::cst(0.0);
    for c in 0..2 {
        r = r + (phi_s(lo, sl(1), ql(c)) - phi_s(hi, sh(1), qh(c))) * (0.5 / dp);
    }
    // ½[φ_Q at the cell's two columns]
    let flux = |c: usize, k: &dyn Fn(usize) -> S, q: S| (phi_q(k(c), q) + phi_q(k(c + 1), q)) * 0.5;
    let lo_flux = flux(0, &sl, ql(0)) - flux(1, &sl, ql(1));
    let hi_flux = flux(0, &sh, qh(0)) - flux(1, &sh, qh(1));
    r + (lo_flux + hi_flux) / (d * 2.0)
}

/// Top row; `x[a][b] = h(i + a − 1, Np + b − 2)`, only b = 1, 2 are used.
#[inline]
fn surface<S: Scalar>(x: &[[S; 3]; 3], lam: S, nq: f64, dp: f64, cell: &CellLaw, c: &SurfaceConst) -> S {
    let d = lam / nq;
    let sk = |a: usize| (x[a][2] - x[a][1]) / dp;
    let v = |cc: usize, b: usize| (x[cc + 1][b] - x[cc][b]) / d;
    let q = |cc: usize| (v(cc, 1) + v(cc, 2)) * 0.5;
    let mut r = x[1][2] - c.shift;
    for cc in 0..2 {
        r = r + phi_s(cell, sk(1), q(cc)) * 0.5;
    }
    let flux = |cc: usize| (phi_q(sk(cc), q(cc)) + phi_q(sk(cc + 1), q(cc))) * 0.5;
    r + (flux(0) - flux(1)) * dp / (d * 2.0)
}

struct SurfaceConst {
    /// 3r/2 + Ω(1)
    shift: f64,
}

#[inline]
fn reflect(i: isize, nq: usize) -> usize {
    if i < 0 {
        (-i) as usize
    } else if i as usize > nq {
        2 * nq - i as usize
    } else {
        i as usize
    }
}

/// Unknown index of node (i, j), j ≥ 1.
#[inline]
pub(crate) fn unknown_index(np: usize, i: usize, j: usize) -> usize {
    i * np + j - 1
}

/// Row j of the stencil in slot b, for interior or surface rows.
#[inline]
fn slot_row(np: usize, j: usize, b: usize) -> usize {
    if j == np {
        np + b - 2
    } else {
        j + b - 1
    }
}

fn check_monotone(grid: &WaveGrid) -> Result<()> {
    let np = grid.np();
    for i in 0..=grid.nq() {
        for j in 0..np {
            let s = grid.at(i, j + 1) - grid.at(i, j);
            if !(s > 0.0) {
                return Err(Error::Stagnation { i, j: j + 1 });
            }
        }
    }
    Ok(())
}

fn surface_const(grid: &WaveGrid) -> SurfaceConst {
    let st = grid.setup();
    SurfaceConst {
        shift: 1.5 * st.r + st.omega_top,
    }
}

/// Residual vector in unknown ordering `i·Np + j − 1`.
pub fn assemble_residual(grid: &WaveGrid) -> Result<Vec<f64>> {
    check_monotone(grid)?;
    Ok(residual_unchecked(grid))
}

fn residual_unchecked(grid: &WaveGrid) -> Vec<f64> {
    let np = grid.np();
    let nq = grid.nq();
    let dp = 1.0 / np as f64;
    let nqf = nq as f64;
    let lam = grid.half_period();
    let sc = surface_const(grid);
    let cells = &grid.setup().cells;
    let mut out = vec![0.0; (nq + 1) * np];
    for i in 0..=nq {
        for j in 1..=np {
            let mut x = [[0.0; 3]; 3];
            for (a, row) in x.iter_mut().enumerate() {
                let ii = reflect(i as isize + a as isize - 1, nq);
                for (b, xv) in row.iter_mut().enumerate() {
                    *xv = grid.at(ii, slot_row(np, j, b));
                }
            }
            out[unknown_index(np, i, j)] = if j == np {
                surface(&x, lam, nqf, dp, &cells[np - 1], &sc)
            } else {
                interior(&x, lam, nqf, dp, &cells[j - 1], &cells[j])
            };
        }
    }
    out
}

/// Jacobian of the residual: the banded part in h and the dense column in Λ.
#[derive(Debug, Clone)]
pub struct Jacobian {
    pub residual: Vec<f64>,
    pub dh: BandMatrix,
    pub dlambda: Vec<f64>,
}

/// Residual and exact Jacobian by forward differentiation of each stencil.
pub fn assemble_jacobian(grid: &WaveGrid) -> Result<Jacobian> {
    check_monotone(grid)?;
    let np = grid.np();
    let nq = grid.nq();
    let n = (nq + 1) * np;
    let dp = 1.0 / np as f64;
    let nqf = nq as f64;
    let lam = Dual::var(grid.half_period(), NG - 1);
    let sc = surface_const(grid);
    let cells = &grid.setup().cells;
    let mut dh = BandMatrix::zeros(n, np + 1, np + 1);
    let mut dlambda = vec![0.0; n];
    let mut residual = vec![0.0; n];
    for i in 0..=nq {
        for j in 1..=np {
            let mut x = [[Dual::cst(0.0); 3]; 3];
            let mut cols = [[usize::MAX; 3]; 3];
            for a in 0..3 {
                let ii = reflect(i as isize + a as isize - 1, nq);
                for b in 0..3 {
                    let jj = slot_row(np, j, b);
                    if jj == 0 {
                        continue;
                    }
                    x[a][b] = Dual::var(grid.at(ii, jj), 3 * a + b);
                    cols[a][b] = unknown_index(np, ii, jj);
                }
            }
            let f = if j == np {
                surface(&x, lam, nqf, dp, &cells[np - 1], &sc)
            } else {
                interior(&x, lam, nqf, dp, &cells[j - 1], &cells[j])
            };
            let row = unknown_index(np, i, j);
            residual[row] = f.v;
            dlambda[row] = f.g[NG - 1];
            for a in 0..3 {
                for b in 0..3 {
                    let g = f.g[3 * a + b];
                    if cols[a][b] != usize::MAX && g != 0.0 {
                        dh.add(row, cols[a][b], g);
                    }
                }
            }
        }
    }
    Ok(Jacobian {
        residual,
        dh,
        dlambda,
    })
}

/// Fourth-order central-difference Jacobian, using a nine-colour partition of
/// the unknowns so each sweep perturbs many columns.
///
/// `step` is relative: h moves by `step` times the smallest cell increment and
/// Λ by `step·Λ`. It must stay below 1/2 so the perturbed grid remains monotone.
pub fn fd_jacobian(grid: &WaveGrid, step: f64) -> Result<Jacobian> {
    check_monotone(grid)?;
    if !(step > 0.0 && step < 0.5) {
        return Err(Error::validation("step", format!("must lie in (0, 0.5) (got {step})")));
    }
    let np = grid.np();
    let nq = grid.nq();
    let n = (nq + 1) * np;
    let residual = residual_unchecked(grid);
    let mut dh = BandMatrix::zeros(n, np + 1, np + 1);
    let base = grid.unknowns();
    let lam = grid.half_period();
    let hstep = step * grid.min_increment();
    let five_point = |eval: &dyn Fn(f64) -> Vec<f64>, h: f64| -> Vec<f64> {
        let (p1, m1, p2, m2) = (eval(h), eval(-h), eval(2.0 * h), eval(-2.0 * h));
        (0..n)
            .map(|k| (8.0 * (p1[k] - m1[k]) - (p2[k] - m2[k])) / (12.0 * h))
            .collect()
    };
    for ci in 0..3 {
        for cj in 0..3 {
            let coloured = |i: usize, j: usize| i % 3 == ci && j % 3 == cj;
            let shifted = |d: f64| {
                let mut x = base.clone();
                for i in (ci..=nq).step_by(3) {
                    for j in (1..=np).filter(|&j| j % 3 == cj) {
                        x[unknown_index(np, i, j)] += d;
                    }
                }
                residual_unchecked(&grid.with_unknowns(&x, lam))
            };
            let deriv = five_point(&shifted, hstep);
            for i in 0..=nq {
                for j in 1..=np {
                    let row = unknown_index(np, i, j);
                    let mut done = [usize::MAX; 9];
                    let mut nd = 0;
                    for a in 0..3 {
                        let ii = reflect(i as isize + a as isize - 1, nq);
                        for b in 0..3 {
                            let jj = slot_row(np, j, b);
                            if jj == 0 || !coloured(ii, jj) {
                                continue;
                            }
                            let col = unknown_index(np, ii, jj);
                            if done[..nd].contains(&col) {
                                continue;
                            }
                            done[nd] = col;
                            nd += 1;
                            if deriv[row] != 0.0 {
                                dh.add(row, col, deriv[row]);
                            }
                        }
                    }
                }
            }
        }
    }
    let by_lambda = |d: f64| residual_unchecked(&grid.with_unknowns(&base, lam + d));
    let dlambda = five_point(&by_lambda, step * lam);
    Ok(Jacobian {
        residual,
        dh,
        dlambda,
    })
}
