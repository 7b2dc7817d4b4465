//! Monotone piecewise cubic Hermite interpolation (Fritsch–Carlson slopes).

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
    /// `cum[k] = ∫_{x_0}^{x_k}` of the interpolant.
    cum: Vec<f64>,
}

fn end_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() || m0 == 0.0 {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

impl Pchip {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::validation(
                "samples",
                format!("need matching arrays of length >= 2 (got {} and {})", n, y.len()),
            ));
        }
        for k in 0..n - 1 {
            if !(x[k + 1] > x[k]) {
                return Err(Error::validation(
                    format!("p[{}]", k + 1),
                    "abscissae must be strictly increasing",
                ));
            }
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("omega", "values must be finite"));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let m: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = m[0];
            d[1] = m[0];
        } else {
            for k in 1..n - 1 {
                if m[k - 1] * m[k] > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / m[k - 1] + w2 / m[k]);
                }
            }
            d[0] = end_slope(h[0], h[1], m[0], m[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
        }
        let mut p = Pchip {
            x: x.to_vec(),
            y: y.to_vec(),
            d,
            cum: vec![0.0; n],
        };
        for k in 0..n - 1 {
            p.cum[k + 1] = p.cum[k] + p.segment_integral(k, p.x[k + 1] - p.x[k]);
        }
        Ok(p)
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    fn locate(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.partition_point(|&xk| xk <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        }
    }

    fn coeffs(&self, k: usize) -> (f64, f64, f64) {
        let h = self.x[k + 1] - self.x[k];
        let m = (self.y[k + 1] - self.y[k]) / h;
        let c2 = (3.0 * m - 2.0 * self.d[k] - self.d[k + 1]) / h;
        let c3 = (self.d[k] + self.d[k + 1] - 2.0 * m) / (h * h);
        (h, c2, c3)
    }

    /// `∫_{x_k}^{x_k + s}` on segment `k`.
    fn segment_integral(&self, k: usize, s: f64) -> f64 {
        let (_, c2, c3) = self.coeffs(k);
        s * (self.y[k] + s * (self.d[k] / 2.0 + s * (c2 / 3.0 + s * c3 / 4.0)))
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = self.locate(t);
        let (_, c2, c3) = self.coeffs(k);
        let s = t - self.x[k];
        self.y[k] + s * (self.d[k] + s * (c2 + s * c3))
    }

    pub fn deriv(&self, t: f64) -> f64 {
        let k = self.locate(t);
        let (_, c2, c3) = self.coeffs(k);
        let s = t - self.x[k];
        self.d[k] + s * (2.0 * c2 + 3.0 * s * c3)
    }

    /// `∫_{x_0}^t` of the interpolant (exact).
    pub fn integral_to(&self, t: f64) -> f64 {
        let k = self.locate(t);
        self.cum[k] + self.segment_integral(k, t - self.x[k])
    }

    /// `∫_t^{x_last}` of the interpolant, accumulated from the right so that
    /// it keeps full relative accuracy as `t` approaches the last knot.
    pub fn integral_from(&self, t: f64) -> f64 {
        let k = self.locate(t);
        self.integral_from_segment(k, self.x[k + 1] - t)
    }

    /// `∫_a^b` of the interpolant, expanded about `a` so that it keeps full
    /// relative accuracy when `b` is close to `a`.
    pub fn integral_between(&self, a: f64, b: f64) -> f64 {
        if b < a {
            return -self.integral_between(b, a);
        }
        let (ka, kb) = (self.locate(a), self.locate(b));
        if ka == kb {
            return self.local_integral(ka, a, b - a);
        }
        let mut total = self.local_integral(ka, a, self.x[ka + 1] - a);
        for j in ka + 1..kb {
            total += self.cum[j + 1] - self.cum[j];
        }
        total + self.segment_integral(kb, b - self.x[kb])
    }

    /// `∫_t^{t + s}` on segment `k`, from the Taylor expansion at `t`.
    fn local_integral(&self, k: usize, t: f64, s: f64) -> f64 {
        let (_, c2, c3) = self.coeffs(k);
        let u = t - self.x[k];
        let p0 = self.y[k] + u * (self.d[k] + u * (c2 + u * c3));
        let p1 = self.d[k] + u * (2.0 * c2 + 3.0 * u * c3);
        let p2 = c2 + 3.0 * u * c3;
        s * (p0 + s * (p1 / 2.0 + s * (p2 / 3.0 + s * c3 / 4.0)))
    }

    /// `∫_{x_last - s}^{x_last}`, with the distance `s` supplied exactly.
    pub fn integral_last(&self, s: f64) -> f64 {
        let n = self.x.len();
        let last = self.x[n - 1];
        let k = self.locate(last - s);
        let u = if k == n - 2 { s } else { s - (last - self.x[k + 1]) };
        self.integral_from_segment(k, u)
    }

    fn integral_from_segment(&self, k: usize, u: f64) -> f64 {
        let n = self.x.len();
        let (h, c2, c3) = self.coeffs(k);
        // Re-expand the segment about its right end: p = y1 - d1 u + e2 u^2 + e3 u^3.
        let e2 = c2 + 3.0 * c3 * h;
        let e3 = -c3;
        let part = u * (self.y[k + 1] + u * (-self.d[k + 1] / 2.0 + u * (e2 / 3.0 + u * e3 / 4.0)));
        let mut rest = 0.0;
        for j in (k + 1..n - 1).rev() {
            rest += self.cum[j + 1] - self.cum[j];
        }
        part + rest
    }
}
