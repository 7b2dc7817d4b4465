//! Damped Newton iteration for the discrete wave problem.

use super::residual::{assemble_jacobian, assemble_residual, fd_jacobian, unknown_index};
use super::WaveGrid;
use crate::error::{Error, Result};
use crate::numeric::band::BorderedLu;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    /// Λ fixed at the grid's value.
    FixedHalfPeriod,
    /// Λ unknown, closed by h(0, 1) = t.
    CrestHeight(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    pub condition_limit: f64,
    /// Use the coloured finite-difference Jacobian instead of the exact one.
    pub fd_jacobian: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            max_halvings: 30,
            condition_limit: 1e14,
            fd_jacobian: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub grid: WaveGrid,
    pub iterations: usize,
    pub residual: f64,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn merit(grid: &WaveGrid, c: Constraint) -> Result<f64> {
    let f = assemble_residual(grid)?;
    let g = match c {
        Constraint::FixedHalfPeriod => 0.0,
        Constraint::CrestHeight(t) => grid.crest_height() - t,
    };
    Ok(sup(&f).max(g.abs()))
}

pub fn newton_solve(grid0: &WaveGrid, constraint: Constraint, opts: &NewtonOptions) -> Result<NewtonOutcome> {
    let np = grid0.np();
    let crest = unknown_index(np, 0, np);
    let mut grid = grid0.clone();
    let mut norm = merit(&grid, constraint)?;
    if !norm.is_finite() {
        return Err(Error::Numerical("non-finite initial residual".into()));
    }
    for it in 0..opts.max_iter {
        if norm <= opts.tol {
            return Ok(NewtonOutcome {
                grid,
                iterations: it,
                residual: norm,
            });
        }
        let jac = if opts.fd_jacobian {
            fd_jacobian(&grid, 1e-4)?
        } else {
            assemble_jacobian(&grid)?
        };
        let n = jac.residual.len();
        let lu = jac.dh.factor()?;
        let (dx, dl) = match constraint {
            Constraint::FixedHalfPeriod => {
                if lu.condition_estimate() > opts.condition_limit {
                    return Err(Error::TurningPoint {
                        condition: lu.condition_estimate(),
                    });
                }
                let mut rhs: Vec<f64> = jac.residual.iter().map(|x| -x).collect();
                lu.solve_in_place(&mut rhs);
                (rhs, 0.0)
            }
            Constraint::CrestHeight(t) => {
                let mut c = vec![0.0; n];
                c[crest] = 1.0;
                let bl = BorderedLu::new(lu, jac.dlambda.clone(), c, 0.0)?;
                if bl.condition_estimate() > opts.condition_limit {
                    return Err(Error::TurningPoint {
                        condition: bl.condition_estimate(),
                    });
                }
                let rhs: Vec<f64> = jac.residual.iter().map(|x| -x).collect();
                bl.solve(&rhs, t - grid.crest_height())
            }
        };
        if dx.iter().any(|x| !x.is_finite()) || !dl.is_finite() {
            return Err(Error::Numerical("non-finite Newton step".into()));
        }
        let x0 = grid.unknowns();
        let lam0 = grid.half_period();
        let floor = 0.1 * grid.min_increment();
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let x: Vec<f64> = x0.iter().zip(&dx).map(|(a, d)| a + alpha * d).collect();
            let lam = lam0 + alpha * dl;
            if lam > 0.0 {
                let trial = grid.with_unknowns(&x, lam);
                if trial.min_increment() >= floor {
                    if let Ok(m) = merit(&trial, constraint) {
                        if m.is_finite() && m <= (1.0 - 1e-4 * alpha) * norm {
                            accepted = Some((trial, m));
                            break;
                        }
                    }
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((g, m)) => {
                grid = g;
                norm = m;
            }
            None => {
                return Err(Error::NoConvergence {
                    iterations: it + 1,
                    residual: norm,
                })
            }
        }
    }
    if norm <= opts.tol {
        return Ok(NewtonOutcome {
            grid,
            iterations: opts.max_iter,
            residual: norm,
        });
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual: norm,
    })
}
