use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::circuit::ParamVector;
use crate::error::{Error, Result};
use crate::mps::maybe_par_map;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BfgsConfig {
    /// Central-difference step.
    pub fd_step: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
    /// Stop once `||grad||_inf` drops below this.
    pub gtol: f64,
    pub max_iters: usize,
}

impl Default for BfgsConfig {
    fn default() -> Self {
        BfgsConfig {
            fd_step: 1e-6,
            armijo: 1e-4,
            backtrack: 0.5,
            max_backtracks: 40,
            gtol: 1e-5,
            max_iters: 500,
        }
    }
}

impl BfgsConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v < 1.0;
        if !(self.fd_step > 0.0 && unit(self.armijo) && unit(self.backtrack) && self.gtol > 0.0) {
            return Err(Error::invalid(
                "BFGS needs fd_step > 0, gtol > 0 and line-search constants in (0, 1)",
            ));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BfgsStatus {
    Converged,
    IterationCap,
    LineSearchFailure,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BfgsStep {
    pub cost: f64,
    pub step: f64,
    pub dir_norm: f64,
    pub grad_norm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BfgsResult {
    pub params: ParamVector,
    pub cost: f64,
    /// Entry 0 is the starting point; one entry per accepted step after that.
    pub trace: Vec<BfgsStep>,
    pub status: BfgsStatus,
}

impl BfgsResult {
    pub fn iterations(&self) -> usize {
        self.trace.len().saturating_sub(1)
    }
}

fn gradient<F>(cost: &F, x: &ParamVector, h: f64, parallel: bool) -> Result<DVector<f64>>
where
    F: Fn(&ParamVector) -> Result<f64> + Sync,
{
    let entries = maybe_par_map(parallel, x.len(), |i| -> Result<f64> {
        let up = cost(&x.with_entry(i, x[i] + h))?;
        let down = cost(&x.with_entry(i, x[i] - h))?;
        Ok((up - down) / (2.0 * h))
    });
    Ok(DVector::from_vec(
        entries.into_iter().collect::<Result<Vec<_>>>()?,
    ))
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NumericalFailure {
            message: format!("non-finite {what}"),
            condition_estimate: None,
        })
    }
}

/// Quasi-Newton minimization with an inverse-Hessian update, backtracking
/// Armijo line search and central-difference gradients.
pub fn bfgs_minimize<F>(
    cost: F,
    theta0: &ParamVector,
    config: &BfgsConfig,
    parallel: bool,
) -> Result<BfgsResult>
where
    F: Fn(&ParamVector) -> Result<f64> + Sync,
{
    config.validate()?;
    let n = theta0.len();
    let mut x = theta0.clone();
    let mut f = finite(cost(&x)?, "initial cost")?;
    let mut g = gradient(&cost, &x, config.fd_step, parallel)?;
    let mut hinv = DMatrix::<f64>::identity(n, n);
    let mut first = true;
    let mut trace = vec![BfgsStep {
        cost: f,
        step: 0.0,
        dir_norm: 0.0,
        grad_norm: g.amax(),
    }];
    let mut status = BfgsStatus::IterationCap;

    for _ in 0..config.max_iters {
        if g.amax() < config.gtol {
            status = BfgsStatus::Converged;
            break;
        }
        let mut d = -(&hinv * &g);
        let mut slope = g.dot(&d);
        if !(slope < 0.0) {
            hinv = DMatrix::identity(n, n);
            d = -g.clone();
            slope = -g.norm_squared();
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=config.max_backtracks {
            let trial = x.displaced(d.as_slice(), alpha);
            let ft = cost(&trial)?;
            if ft.is_finite() && ft <= f + config.armijo * alpha * slope {
                accepted = Some((trial, ft));
                break;
            }
            alpha *= config.backtrack;
        }
        let Some((x_new, f_new)) = accepted else {
            status = BfgsStatus::LineSearchFailure;
            break;
        };
        let g_new = gradient(&cost, &x_new, config.fd_step, parallel)?;
        let s = DVector::from_iterator(
            n,
            x_new
                .as_slice()
                .iter()
                .zip(x.as_slice())
                .map(|(a, b)| a - b),
        );
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 {
            if first {
                hinv *= sy / y.norm_squared();
                first = false;
            }
            let rho = 1.0 / sy;
            let hy = &hinv * &y;
            let yhy = y.dot(&hy);
            // H' = H - rho (H y s^T + s y^T H) + (rho^2 y^T H y + rho) s s^T
            hinv -= (&hy * s.transpose() + &s * hy.transpose()) * rho;
            hinv += (&s * s.transpose()) * (rho * rho * yhy + rho);
        }
        trace.push(BfgsStep {
            cost: f_new,
            step: alpha,
            dir_norm: d.norm(),
            grad_norm: g_new.amax(),
        });
        x = x_new;
        f = f_new;
        g = g_new;
    }
    if status == BfgsStatus::IterationCap && g.amax() < config.gtol {
        status = BfgsStatus::Converged;
    }
    Ok(BfgsResult {
        params: x,
        cost: f,
        trace,
        status,
    })
}
