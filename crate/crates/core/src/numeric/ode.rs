//! Dormand–Prince 5(4) integrator with adaptive step control.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-12,
            h_init: 1e-3,
            h_min: 1e-14,
            max_steps: 200_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])], h: f64) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrate `y' = f(x, y)` from `x0` through every point of `stops`
/// (strictly increasing, all `> x0`). The state at each stop is returned.
/// `observe` sees every accepted step end `(x, y)`, including the stops.
pub fn integrate_to<const N: usize, F, O>(
    f: F,
    x0: f64,
    y0: [f64; N],
    stops: &[f64],
    opts: OdeOptions,
    mut observe: O,
) -> Result<Vec<[f64; N]>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    O: FnMut(f64, &[f64; N]),
{
    let mut out = Vec::with_capacity(stops.len());
    let mut x = x0;
    let mut y = y0;
    let mut h = opts.h_init;
    let mut k1 = f(x, &y);
    let mut steps = 0usize;
    let mut err_prev = 1e-4f64;
    for &target in stops {
        if target < x {
            return Err(Error::Numerical(format!(
                "integration stops must increase (got {target} after {x})"
            )));
        }
        while x < target {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::Numerical(format!(
                    "ODE step budget exhausted at x = {x}"
                )));
            }
            let mut last = false;
            if x + h >= target {
                h = target - x;
                last = true;
            }
            let k2 = f(x + C2 * h, &axpy(&y, &[(A21, &k1)], h));
            let k3 = f(x + C3 * h, &axpy(&y, &[(A31, &k1), (A32, &k2)], h));
            let k4 = f(x + C4 * h, &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
            let k5 = f(
                x + C5 * h,
                &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
            );
            let k6 = f(
                x + h,
                &axpy(
                    &y,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                    h,
                ),
            );
            let y_new = axpy(
                &y,
                &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
                h,
            );
            let k7 = f(x + h, &y_new);
            let mut err = 0.0f64;
            for i in 0..N {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() {
                return Err(Error::Numerical(format!("non-finite ODE state near x = {x}")));
            }
            if err <= 1.0 {
                x = if last { target } else { x + h };
                y = y_new;
                k1 = k7;
                observe(x, &y);
                // PI step-size controller
                let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
                err_prev = err.max(1e-4);
                if !last {
                    h *= fac.clamp(0.2, 5.0);
                } else {
                    h = h.max(opts.h_init.min(1e-2));
                }
            } else {
                h *= (0.9 * err.powf(-0.2)).max(0.2);
                if h < opts.h_min {
                    return Err(Error::Numerical(format!(
                        "ODE step underflow at x = {x} (h = {h:e})"
                    )));
                }
            }
        }
        out.push(y);
    }
    Ok(out)
}
