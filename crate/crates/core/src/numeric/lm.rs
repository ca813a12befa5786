use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A nonlinear least-squares problem `min |r(x)|^2`.
pub trait LeastSquaresProblem {
    fn param_count(&self) -> usize;
    fn residual_count(&self) -> usize;
    fn residuals(&self, params: &DVector<f64>) -> DVector<f64>;
}

/// Adapter turning a closure into a [`LeastSquaresProblem`].
pub struct FnProblem<F> {
    params: usize,
    residuals: usize,
    f: F,
}

impl<F> FnProblem<F>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    pub fn new(params: usize, residuals: usize, f: F) -> Self {
        FnProblem {
            params,
            residuals,
            f,
        }
    }
}

impl<F> LeastSquaresProblem for FnProblem<F>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    fn param_count(&self) -> usize {
        self.params
    }

    fn residual_count(&self) -> usize {
        self.residuals
    }

    fn residuals(&self, params: &DVector<f64>) -> DVector<f64> {
        (self.f)(params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LmSettings {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub step_tolerance: f64,
    pub initial_damping: f64,
}

impl Default for LmSettings {
    fn default() -> Self {
        LmSettings {
            max_iterations: 100,
            gradient_tolerance: 1e-10,
            step_tolerance: 1e-12,
            initial_damping: 1e-3,
        }
    }
}

impl LmSettings {
    pub fn validate(&self) -> Result<()> {
        let ok = self.max_iterations > 0
            && self.gradient_tolerance > 0.0
            && self.step_tolerance > 0.0
            && self.initial_damping > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Domain("LM settings must all be strictly positive".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Termination {
    GradientSmall,
    StepSmall,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmOutcome {
    pub solution: DVector<f64>,
    pub final_cost: f64,
    pub iterations: usize,
    pub termination: Termination,
    /// Cost at the start and after every accepted step.
    pub cost_history: Vec<f64>,
}

fn finite_step(x: f64) -> f64 {
    1e-7 * (1.0 + x.abs())
}

fn evaluate<P: LeastSquaresProblem + ?Sized>(
    problem: &P,
    x: &DVector<f64>,
) -> Result<DVector<f64>> {
    let r = problem.residuals(x);
    if r.len() != problem.residual_count() {
        return Err(Error::Domain(format!(
            "residual function returned {} values, expected {}",
            r.len(),
            problem.residual_count()
        )));
    }
    if r.iter().all(|v| v.is_finite()) {
        Ok(r)
    } else {
        Err(Error::NonFiniteResidual)
    }
}

fn jacobian_with_base<P: LeastSquaresProblem + ?Sized>(
    problem: &P,
    x: &DVector<f64>,
    r0: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let n = x.len();
    let mut jac = DMatrix::zeros(r0.len(), n);
    let mut xp = x.clone();
    for j in 0..n {
        let h = finite_step(x[j]);
        xp[j] = x[j] + h;
        let rp = evaluate(problem, &xp)?;
        // Divide by the step actually taken after rounding.
        let taken = xp[j] - x[j];
        jac.set_column(j, &((rp - r0) / taken));
        xp[j] = x[j];
    }
    Ok(jac)
}

/// `|r|^2 - |r_new|^2` summed as `(r - r_new) . (r + r_new)`, which resolves
/// decreases far below the rounding of either cost.
fn cost_decrease(r: &DVector<f64>, r_new: &DVector<f64>) -> f64 {
    r.iter().zip(r_new.iter()).map(|(a, b)| (a - b) * (a + b)).sum()
}

/// Forward-difference Jacobian with step `1e-7 (1 + |x_j|)`.
pub fn finite_difference_jacobian<P: LeastSquaresProblem + ?Sized>(
    problem: &P,
    x: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let r0 = evaluate(problem, x)?;
    jacobian_with_base(problem, x, &r0)
}

/// Levenberg–Marquardt with forward-difference Jacobians.
///
/// Each step solves the damped system `[J; sqrt(lambda) D] dx = [-r; 0]`
/// by SVD, with `D` the Jacobian column norms. Steps are accepted only when
/// they strictly reduce the cost; damping is divided by 10 on acceptance
/// and multiplied by 10 on rejection. A non-finite residual during the
/// iteration stops it and returns the best point with `MaxIterations`.
pub fn lm_minimize<P: LeastSquaresProblem + ?Sized>(
    problem: &P,
    x0: &DVector<f64>,
    settings: &LmSettings,
) -> Result<LmOutcome> {
    settings.validate()?;
    let n = problem.param_count();
    let m = problem.residual_count();
    if x0.len() != n {
        return Err(Error::LengthMismatch {
            left: x0.len(),
            right: n,
        });
    }
    if m < n {
        return Err(Error::Domain(format!(
            "need at least as many residuals ({m}) as parameters ({n})"
        )));
    }

    let mut x = x0.clone();
    let mut r = evaluate(problem, &x)?;
    let mut cost = r.norm_squared();
    let mut history = vec![cost];
    let mut lambda = settings.initial_damping;
    let mut iterations = 0;

    let outcome = |x: DVector<f64>, cost, iterations, termination, history| LmOutcome {
        solution: x,
        final_cost: cost,
        iterations,
        termination,
        cost_history: history,
    };

    let mut jac = match jacobian_with_base(problem, &x, &r) {
        Ok(j) => j,
        Err(Error::NonFiniteResidual) => {
            return Ok(outcome(x, cost, 0, Termination::MaxIterations, history))
        }
        Err(e) => return Err(e),
    };

    loop {
        let gradient = jac.transpose() * &r;
        if gradient.amax() < settings.gradient_tolerance {
            return Ok(outcome(x, cost, iterations, Termination::GradientSmall, history));
        }
        if iterations >= settings.max_iterations {
            return Ok(outcome(x, cost, iterations, Termination::MaxIterations, history));
        }
        iterations += 1;

        let col_norms: Vec<f64> = jac.column_iter().map(|c| c.norm()).collect();
        let floor = col_norms.iter().fold(0.0f64, |a, &b| a.max(b)) * 1e-12 + f64::MIN_POSITIVE;
        let mut augmented = DMatrix::zeros(m + n, n);
        augmented.view_mut((0, 0), (m, n)).copy_from(&jac);
        let sqrt_lambda = lambda.sqrt();
        for j in 0..n {
            augmented[(m + j, j)] = sqrt_lambda * col_norms[j].max(floor);
        }
        let mut rhs = DVector::zeros(m + n);
        rhs.rows_mut(0, m).copy_from(&(-&r));
        let step = match augmented.svd(true, true).solve(&rhs, 1e-15) {
            Ok(s) => s,
            Err(_) => return Ok(outcome(x, cost, iterations, Termination::MaxIterations, history)),
        };

        if step.norm() <= settings.step_tolerance * (x.norm() + settings.step_tolerance) {
            return Ok(outcome(x, cost, iterations, Termination::StepSmall, history));
        }

        let candidate = &x + &step;
        let r_new = match evaluate(problem, &candidate) {
            Ok(r) => r,
            Err(Error::NonFiniteResidual) => {
                return Ok(outcome(x, cost, iterations, Termination::MaxIterations, history))
            }
            Err(e) => return Err(e),
        };
        if cost_decrease(&r, &r_new) > 0.0 {
            // The summed cost can round above its predecessor when the
            // decrease is below its resolution.
            cost = r_new.norm_squared().min(cost);
            x = candidate;
            r = r_new;
            history.push(cost);
            lambda = (lambda / 10.0).max(1e-300);
            jac = match jacobian_with_base(problem, &x, &r) {
                Ok(j) => j,
                Err(Error::NonFiniteResidual) => {
                    return Ok(outcome(x, cost, iterations, Termination::MaxIterations, history))
                }
                Err(e) => return Err(e),
            };
        } else {
            lambda = (lambda * 10.0).min(1e300);
        }
    }
}
