//! Banded LU factorisation with partial pivoting (LAPACK `gbtf2`/`gbtrs`
//! layout) and a bordered solver for one extra row and column.

use crate::error::{Error, Result};

/// Square banded matrix in LAPACK band storage with room for pivoting fill-in.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            ldab,
            ab: vec![0.0; ldab * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i + self.ku >= j && i <= j + self.kl, "({i},{j}) outside band");
        j * self.ldab + self.kl + self.ku + i - j
    }

    #[inline]
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i + self.ku >= j && i <= j + self.kl
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.ab[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.ab[self.idx(i, j)]
        } else {
            0.0
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for (i, yi) in y.iter_mut().enumerate().take(hi + 1).skip(lo) {
                *yi += self.ab[self.idx(i, j)] * x[j];
            }
        }
        y
    }

    /// Factorise in place. Fails on an exactly zero pivot.
    pub fn factor(mut self) -> Result<BandLu> {
        let (n, kl, ku, ldab) = (self.n, self.kl, self.ku, self.ldab);
        let kv = kl + ku;
        let ab = &mut self.ab;
        let mut ipiv = vec![0usize; n];
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let base = j * ldab + kv;
            let mut jp = 0;
            let mut best = ab[base].abs();
            for r in 1..=km {
                let v = ab[base + r].abs();
                if v > best {
                    best = v;
                    jp = r;
                }
            }
            ipiv[j] = j + jp;
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Numerical(format!(
                    "singular banded matrix: zero pivot in column {j}"
                )));
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for k in 0..=(ju - j) {
                    ab.swap((j + k) * ldab + kv + jp - k, (j + k) * ldab + kv - k);
                }
            }
            if km > 0 {
                let inv = 1.0 / ab[base];
                for r in 1..=km {
                    ab[base + r] *= inv;
                }
                for kk in 0..(ju - j) {
                    let col = (j + 1 + kk) * ldab;
                    let y = ab[col + kv - 1 - kk];
                    if y != 0.0 {
                        for ii in 0..km {
                            let x = ab[base + 1 + ii];
                            ab[col + kv + ii - kk] -= x * y;
                        }
                    }
                }
            }
        }
        let mut dmin = f64::INFINITY;
        let mut dmax = 0.0f64;
        for j in 0..n {
            let u = ab[j * ldab + kv].abs();
            dmin = dmin.min(u);
            dmax = dmax.max(u);
        }
        Ok(BandLu {
            m: self,
            ipiv,
            diag_ratio: dmax / dmin,
        })
    }
}

/// LU factors of a [`BandMatrix`].
#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    ipiv: Vec<usize>,
    diag_ratio: f64,
}

impl BandLu {
    /// `max |U_jj| / min |U_jj|`, a cheap lower bound on the condition number.
    pub fn condition_estimate(&self) -> f64 {
        self.diag_ratio
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let BandMatrix { n, kl, ku, ldab, ref ab } = self.m;
        let kv = kl + ku;
        for j in 0..n.saturating_sub(1) {
            let lm = kl.min(n - 1 - j);
            let l = self.ipiv[j];
            if l != j {
                b.swap(l, j);
            }
            let bj = b[j];
            if bj != 0.0 {
                for ii in 0..lm {
                    b[j + 1 + ii] -= ab[j * ldab + kv + 1 + ii] * bj;
                }
            }
        }
        for j in (0..n).rev() {
            b[j] /= ab[j * ldab + kv];
            let t = b[j];
            if t != 0.0 {
                for i in j.saturating_sub(kv)..j {
                    b[i] -= t * ab[j * ldab + kv + i - j];
                }
            }
        }
    }

    /// Solve `Aᵀ x = b`.
    pub fn solve_transpose_in_place(&self, b: &mut [f64]) {
        let BandMatrix { n, kl, ku, ldab, ref ab } = self.m;
        let kv = kl + ku;
        for j in 0..n {
            let mut t = b[j];
            for i in j.saturating_sub(kv)..j {
                t -= ab[j * ldab + kv + i - j] * b[i];
            }
            b[j] = t / ab[j * ldab + kv];
        }
        for j in (0..n.saturating_sub(1)).rev() {
            let lm = kl.min(n - 1 - j);
            let mut s = 0.0;
            for ii in 0..lm {
                s += ab[j * ldab + kv + 1 + ii] * b[j + 1 + ii];
            }
            b[j] -= s;
            let l = self.ipiv[j];
            if l != j {
                b.swap(l, j);
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solver for the bordered system `[A b; cᵀ d] [x; y] = [f; g]` using
/// mixed block elimination, which stays accurate when `A` is nearly
/// singular but the bordered matrix is not.
#[derive(Debug, Clone)]
pub struct BorderedLu {
    lu: BandLu,
    b: Vec<f64>,
    c: Vec<f64>,
    d: f64,
    v: Vec<f64>,
    w: Vec<f64>,
    delta_star: f64,
    delta: f64,
}

impl BorderedLu {
    pub fn new(lu: BandLu, b: Vec<f64>, c: Vec<f64>, d: f64) -> Result<Self> {
        let mut v = c.clone();
        lu.solve_transpose_in_place(&mut v);
        let delta_star = d - dot(&b, &v);
        let mut w = b.clone();
        lu.solve_in_place(&mut w);
        let delta = d - dot(&c, &w);
        if delta == 0.0 || delta_star == 0.0 || !delta.is_finite() || !delta_star.is_finite() {
            return Err(Error::Numerical("singular bordered system".into()));
        }
        Ok(Self {
            lu,
            b,
            c,
            d,
            v,
            w,
            delta_star,
            delta,
        })
    }

    pub fn band(&self) -> &BandLu {
        &self.lu
    }

    /// Growth of the Schur-complement step; blows up as the bordered matrix
    /// approaches singularity.
    pub fn condition_estimate(&self) -> f64 {
        let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let scale = 1.0f64.max(self.d.abs()).max(sup(&self.b)).max(sup(&self.c));
        let growth = 1.0f64.max(sup(&self.w)).max(sup(&self.v));
        scale * growth / self.delta.abs().min(self.delta_star.abs())
    }

    pub fn solve(&self, f: &[f64], g: f64) -> (Vec<f64>, f64) {
        let y1 = (g - dot(&self.v, f)) / self.delta_star;
        let mut xi: Vec<f64> = f.iter().zip(&self.b).map(|(fi, bi)| fi - bi * y1).collect();
        let g1 = g - self.d * y1;
        self.lu.solve_in_place(&mut xi);
        let y2 = (g1 - dot(&self.c, &xi)) / self.delta;
        for (x, wi) in xi.iter_mut().zip(&self.w) {
            *x -= wi * y2;
        }
        (xi, y1 + y2)
    }
}
