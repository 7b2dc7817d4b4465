//! Vorticity distributions ω(p) on [0, 1], their integral Ω and class.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::pchip::Pchip;
use crate::numeric::quad::QuadOptions;
use crate::numeric::roots::{golden_max, RootOptions};

/// Tolerances for the quadratures and scalar root solves built on a
/// [`VorticityFn`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumTol {
    pub quadrature: f64,
    pub root: f64,
}

impl Default for NumTol {
    fn default() -> Self {
        Self {
            quadrature: 1e-12,
            root: 1e-12,
        }
    }
}

/// Input description of a vorticity distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum VorticitySpec {
    Zero,
    Constant { b: f64 },
    /// ω(p) = a + b·p
    Affine { a: f64, b: f64 },
    /// Monotone cubic interpolation of `(p, omega)`.
    Samples { p: Vec<f64>, omega: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OmegaClass {
    I,
    II,
    III,
}

impl OmegaClass {
    /// Whether the depth at `lambda0` (and hence `r0`) is finite.
    pub fn has_finite_limit(self) -> bool {
        !matches!(self, OmegaClass::I)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OmegaClass::I => "I",
            OmegaClass::II => "II",
            OmegaClass::III => "III",
        }
    }
}

/// Where max Ω is attained; selects the cancellation-free form of `M - Ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Argmax {
    Start,
    End,
    Interior(f64),
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Affine { a: f64, b: f64 },
    Interp(Pchip),
}

const SCAN_POINTS: usize = 1025;

/// A validated vorticity distribution with its derived constants.
#[derive(Debug, Clone, PartialEq)]
pub struct VorticityFn {
    pub spec: VorticitySpec,
    /// max |ω|
    pub omega0: f64,
    /// ω₀ + sup |ω′|
    pub omega1: f64,
    /// sqrt(2 max Ω)
    pub lambda0: f64,
    pub class: OmegaClass,
    /// The maximum of Ω is attained both at an endpoint and in the interior
    /// (to within tolerance); the class was resolved to I.
    pub tie: bool,
    pub tol: NumTol,
    max_omega_int: f64,
    min_omega_int: f64,
    argmax: Argmax,
    repr: Repr,
}

fn local_extrema(f: &dyn Fn(f64) -> f64, sign: f64) -> Option<(f64, f64)> {
    let n = SCAN_POINTS - 1;
    let vals: Vec<f64> = (0..=n).map(|i| sign * f(i as f64 / n as f64)).collect();
    let mut best: Option<(f64, f64)> = None;
    for i in 1..n {
        if vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1] {
            let (x, v) = golden_max(
                |t| sign * f(t),
                (i - 1) as f64 / n as f64,
                (i + 1) as f64 / n as f64,
                1e-12,
            );
            if best.is_none_or(|(_, bv)| v > bv) {
                best = Some((x, v));
            }
        }
    }
    best.map(|(x, v)| (x, sign * v))
}

impl VorticityFn {
    pub fn new(spec: VorticitySpec) -> Result<Self> {
        let (repr, omega0, omega1) = match &spec {
            VorticitySpec::Zero => (Repr::Affine { a: 0.0, b: 0.0 }, 0.0, 0.0),
            VorticitySpec::Constant { b } => {
                if !b.is_finite() {
                    return Err(Error::validation("vorticity.b", "must be finite"));
                }
                (Repr::Affine { a: *b, b: 0.0 }, b.abs(), b.abs())
            }
            VorticitySpec::Affine { a, b } => {
                if !a.is_finite() {
                    return Err(Error::validation("vorticity.a", "must be finite"));
                }
                if !b.is_finite() {
                    return Err(Error::validation("vorticity.b", "must be finite"));
                }
                let w0 = a.abs().max((a + b).abs());
                (Repr::Affine { a: *a, b: *b }, w0, w0 + b.abs())
            }
            VorticitySpec::Samples { p, omega } => {
                if p.len() != omega.len() {
                    return Err(Error::validation(
                        "vorticity.omega",
                        format!("length {} differs from length of p ({})", omega.len(), p.len()),
                    ));
                }
                if p.len() < 2 {
                    return Err(Error::validation("vorticity.p", "need at least two samples"));
                }
                if p[0] != 0.0 {
                    return Err(Error::validation("vorticity.p[0]", "must equal 0"));
                }
                if p[p.len() - 1] != 1.0 {
                    return Err(Error::validation(
                        format!("vorticity.p[{}]", p.len() - 1),
                        "must equal 1",
                    ));
                }
                for k in 1..p.len() {
                    if !(p[k] > p[k - 1]) {
                        return Err(Error::validation(
                            format!("vorticity.p[{k}]"),
                            "must be strictly increasing",
                        ));
                    }
                }
                if let Some(k) = omega.iter().position(|v| !v.is_finite()) {
                    return Err(Error::validation(format!("vorticity.omega[{k}]"), "must be finite"));
                }
                let interp = Pchip::new(p, omega)?;
                let w0 = omega.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let n = 4096;
                let mut lip = 0.0f64;
                let mut prev = interp.eval(0.0);
                for i in 1..=n {
                    let cur = interp.eval(i as f64 / n as f64);
                    lip = lip.max((cur - prev).abs() * n as f64);
                    prev = cur;
                }
                (Repr::Interp(interp), w0, w0 + lip)
            }
        };
        let mut v = VorticityFn {
            spec,
            omega0,
            omega1,
            lambda0: 0.0,
            class: OmegaClass::I,
            tie: false,
            tol: NumTol::default(),
            max_omega_int: 0.0,
            min_omega_int: 0.0,
            argmax: Argmax::Start,
            repr,
        };
        v.analyse();
        Ok(v)
    }

    fn analyse(&mut self) {
        let om1 = self.big_omega(1.0);
        let (int_max, int_min) = match self.repr {
            Repr::Affine { a, b } => {
                let crit = if b != 0.0 { -a / b } else { f64::NAN };
                let inside = crit > 0.0 && crit < 1.0;
                let val = -a * a / (2.0 * b);
                (
                    (inside && b < 0.0).then_some((crit, val)),
                    (inside && b > 0.0).then_some((crit, val)),
                )
            }
            Repr::Interp(_) => (
                local_extrema(&|t| self.big_omega(t), 1.0),
                local_extrema(&|t| self.big_omega(t), -1.0),
            ),
        };
        let w_start = self.omega(0.0);
        let w_end = self.omega(1.0);
        let tol = 1e-12 * self.omega0.max(1.0);
        let imax = int_max.map_or(f64::NEG_INFINITY, |(_, v)| v);

        let max_val = 0f64.max(om1).max(imax);
        self.max_omega_int = max_val;
        self.min_omega_int = 0f64.min(om1).min(int_min.map_or(f64::INFINITY, |(_, v)| v));

        let end_ok = w_end > 0.0 && om1 >= -tol && (om1 > tol || w_start < 0.0);
        let start_ok = w_start < 0.0 && om1 < -tol;
        let (class, tie) = if end_ok {
            if imax < om1 - tol {
                (OmegaClass::III, false)
            } else {
                (OmegaClass::I, true)
            }
        } else if start_ok {
            if imax < -tol {
                (OmegaClass::II, false)
            } else {
                (OmegaClass::I, true)
            }
        } else {
            (OmegaClass::I, false)
        };
        self.class = class;
        self.tie = tie;
        self.argmax = match class {
            OmegaClass::II => Argmax::Start,
            OmegaClass::III => Argmax::End,
            OmegaClass::I => match int_max {
                Some((x, v)) if v >= max_val - tol => Argmax::Interior(x),
                _ if om1 > 0.0 && om1 >= max_val - tol => Argmax::End,
                _ => Argmax::Start,
            },
        };
        self.lambda0 = (2.0 * max_val).sqrt();
    }

    pub fn with_tolerances(mut self, tol: NumTol) -> Self {
        self.tol = tol;
        self
    }

    pub(crate) fn quad_opts(&self) -> QuadOptions {
        QuadOptions {
            abs_tol: 1e-2 * self.tol.quadrature,
            rel_tol: self.tol.quadrature,
            max_intervals: 8000,
        }
    }

    pub(crate) fn root_opts(&self) -> RootOptions {
        RootOptions {
            abs_tol: self.tol.root,
            rel_tol: self.tol.root,
            max_iter: 200,
        }
    }

    /// ω(p); `p` is clamped to [0, 1].
    pub fn omega(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match &self.repr {
            Repr::Affine { a, b } => a + b * p,
            Repr::Interp(s) => s.eval(p),
        }
    }

    /// Ω(τ) without range checks; `tau` is clamped to [0, 1].
    pub fn big_omega(&self, tau: f64) -> f64 {
        let t = tau.clamp(0.0, 1.0);
        match &self.repr {
            Repr::Affine { a, b } => t * (a + 0.5 * b * t),
            Repr::Interp(s) => s.integral_to(t),
        }
    }

    /// Ω(τ) = ∫₀^τ ω.
    pub fn capital_omega(&self, tau: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::Domain(format!("tau = {tau} lies outside [0, 1]")));
        }
        Ok(self.big_omega(tau))
    }

    /// ∫_τ^1 ω, accurate relative to its own size as τ → 1.
    pub fn tail(&self, tau: f64) -> f64 {
        let t = tau.clamp(0.0, 1.0);
        match &self.repr {
            Repr::Affine { a, b } => (1.0 - t) * (a + 0.5 * b * (1.0 + t)),
            Repr::Interp(s) => s.integral_from(t),
        }
    }

    /// ∫_{1−s}^1 ω for an exactly known distance `s` from the top.
    pub fn tail_len(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        match &self.repr {
            Repr::Affine { a, b } => s * (a + 0.5 * b * (2.0 - s)),
            Repr::Interp(p) => p.integral_last(s),
        }
    }

    /// max Ω − Ω(1 − s), for use when the maximum sits at τ = 1.
    pub(crate) fn gap_from_end(&self, s: f64) -> f64 {
        (self.tail_len(s) + (self.max_omega_int - self.big_omega(1.0))).max(0.0)
    }

    /// max Ω − Ω(τ) ≥ 0, evaluated without cancellation at the maximiser.
    pub fn gap(&self, tau: f64) -> f64 {
        let g = match self.argmax {
            Argmax::Start => -self.big_omega(tau),
            Argmax::End => self.tail(tau) + (self.max_omega_int - self.big_omega(1.0)),
            Argmax::Interior(x) => match self.repr {
                Repr::Affine { b, .. } => -0.5 * b * (tau - x) * (tau - x),
                Repr::Interp(ref s) => -s.integral_between(x, tau),
            },
        };
        g.max(0.0)
    }

    pub fn argmax(&self) -> Argmax {
        self.argmax
    }

    pub fn max_capital_omega(&self) -> f64 {
        self.max_omega_int
    }

    pub fn min_capital_omega(&self) -> f64 {
        self.min_omega_int
    }

    pub fn classify(&self) -> OmegaClass {
        self.class
    }
}

/// Builds a [`VorticityFn`]; identical input gives identical output.
pub fn make_vorticity(spec: VorticitySpec) -> Result<VorticityFn> {
    VorticityFn::new(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mk(s: VorticitySpec) -> VorticityFn {
        make_vorticity(s).unwrap()
    }

    #[test]
    fn zero_distribution() {
        let v = mk(VorticitySpec::Zero);
        assert_eq!((v.omega0, v.omega1, v.lambda0), (0.0, 0.0, 0.0));
        assert_eq!(v.capital_omega(0.7).unwrap(), 0.0);
        assert_eq!(v.classify(), OmegaClass::I);
    }

    #[test]
    fn constant_distributions() {
        let v = mk(VorticitySpec::Constant { b: 0.5 });
        assert_eq!(v.omega0, 0.5);
        assert!((v.lambda0 - 1.0).abs() < 1e-15);
        assert!((v.capital_omega(0.5).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(v.classify(), OmegaClass::III);

        let v = mk(VorticitySpec::Constant { b: -1.0 });
        assert_eq!(v.lambda0, 0.0);
        assert_eq!(v.classify(), OmegaClass::II);
    }

    #[test]
    fn affine_integral_and_interior_maximum() {
        let v = mk(VorticitySpec::Affine { a: 1.0, b: -2.0 });
        assert!(v.capital_omega(1.0).unwrap().abs() < 1e-15);
        assert_eq!(v.classify(), OmegaClass::I);
        assert!((v.lambda0 - (0.5f64).sqrt()).abs() < 1e-15);
        assert_eq!(v.argmax(), Argmax::Interior(0.5));
        assert!((v.gap(0.2) - (0.25 - (0.2 - 0.04))).abs() < 1e-15);
    }

    #[test]
    fn endpoint_tie_goes_to_class_three() {
        // Ω = τ² - τ: max 0 at both ends, ω(0) < 0 < ω(1).
        let v = mk(VorticitySpec::Affine { a: -1.0, b: 2.0 });
        assert_eq!(v.classify(), OmegaClass::III);
        assert!(!v.tie);
    }

    #[test]
    fn interior_maxima() {
        let p: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
        let w: Vec<f64> = p.iter().map(|&t| (3.0 * std::f64::consts::PI * t).cos()).collect();
        let v = mk(VorticitySpec::Samples { p, omega: w });
        // Ω(τ) = sin(3πτ)/(3π): maxima at 1/6 and 5/6, Ω(1) = 0; ω(1) = -1.
        assert_eq!(v.classify(), OmegaClass::I);
        assert!(matches!(v.argmax(), Argmax::Interior(_)));
    }

    #[test]
    fn samples_validation_names_field() {
        let e = make_vorticity(VorticitySpec::Samples {
            p: vec![0.0, 0.6, 0.5, 1.0],
            omega: vec![0.0; 4],
        })
        .unwrap_err();
        assert!(matches!(e, Error::Validation { ref field, .. } if field == "vorticity.p[2]"));
        let e = make_vorticity(VorticitySpec::Samples {
            p: vec![0.1, 1.0],
            omega: vec![0.0; 2],
        })
        .unwrap_err();
        assert!(matches!(e, Error::Validation { ref field, .. } if field == "vorticity.p[0]"));
        let e = make_vorticity(VorticitySpec::Samples {
            p: vec![0.0, 0.9],
            omega: vec![0.0; 2],
        })
        .unwrap_err();
        assert!(matches!(e, Error::Validation { ref field, .. } if field == "vorticity.p[1]"));
        assert!(make_vorticity(VorticitySpec::Samples { p: vec![0.0, 1.0], omega: vec![1.0] }).is_err());
    }

    #[test]
    fn capital_omega_domain() {
        let v = mk(VorticitySpec::Zero);
        assert!(matches!(v.capital_omega(1.5), Err(Error::Domain(_))));
        assert!(v.capital_omega(-0.1).is_err());
    }

    #[test]
    fn tail_is_accurate_near_one() {
        let p: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let w: Vec<f64> = p.iter().map(|t| 0.3 + t * t).collect();
        let v = mk(VorticitySpec::Samples { p, omega: w });
        let tau = 1.0 - 1e-12;
        let t = v.tail(tau);
        assert!((t / (1.0 - tau) - 1.3).abs() < 1e-9, "{}", t / (1.0 - tau));
    }

    fn lipschitz_samples() -> impl Strategy<Value = VorticitySpec> {
        (2usize..12).prop_flat_map(|n| {
            prop::collection::vec(-1.0f64..1.0, n + 1).prop_map(move |w| VorticitySpec::Samples {
                p: (0..=n).map(|i| i as f64 / n as f64).collect(),
                omega: w,
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn omega_is_lipschitz_antiderivative(spec in lipschitz_samples()) {
            let v = make_vorticity(spec).unwrap();
            prop_assert_eq!(v.big_omega(0.0), 0.0);
            prop_assert!(v.omega1 >= v.omega0 && v.omega0 >= 0.0);
            let n = 400;
            for i in 0..n {
                let (a, b) = (i as f64 / n as f64, (i + 1) as f64 / n as f64);
                let d = (v.big_omega(b) - v.big_omega(a)).abs();
                prop_assert!(d <= v.omega0 * (b - a) + 1e-15);
            }
        }

        #[test]
        fn lambda0_matches_grid_maximum(spec in lipschitz_samples()) {
            let v = make_vorticity(spec).unwrap();
            let n = 20000;
            let grid_max = (0..=n).map(|i| v.big_omega(i as f64 / n as f64)).fold(0.0f64, f64::max);
            prop_assert!(v.lambda0 * v.lambda0 / 2.0 >= grid_max - 1e-13);
            prop_assert!(v.lambda0 * v.lambda0 / 2.0 - grid_max <= v.omega0 / n as f64 + 1e-13);
        }

        #[test]
        fn gap_is_consistent(spec in lipschitz_samples(), tau in 0.0f64..1.0) {
            let v = make_vorticity(spec).unwrap();
            let g = v.gap(tau);
            prop_assert!(g >= 0.0);
            prop_assert!((g - (v.max_capital_omega() - v.big_omega(tau))).abs() < 1e-12);
        }

        #[test]
        fn class_stable_under_resampling(a in -1.0f64..1.0, b in -1.0f64..1.0) {
            prop_assume!((a.abs() > 1e-3) && ((a + b).abs() > 1e-3) && ((a + b / 2.0).abs() > 1e-3));
            let coarse = make_vorticity(VorticitySpec::Affine { a, b }).unwrap();
            let p: Vec<f64> = (0..=64).map(|i| i as f64 / 64.0).collect();
            let w: Vec<f64> = p.iter().map(|t| a + b * t).collect();
            let fine = make_vorticity(VorticitySpec::Samples { p, omega: w }).unwrap();
            prop_assert_eq!(coarse.classify(), fine.classify());
        }
    }
}
