//! Graph-regularized deep matrix factorization solved by hybrid proximal
//! alternating linearized minimization.
//!
//! Each iteration updates, in order: the completed matrix `X` (gradient step on the
//! data term, then a closed-form prox with nonnegativity cropping), `U1`, every
//! inner factor left to right, and `V`. The factor updates are exact proximal
//! steps, each reduced to a symmetric Sylvester equation.

mod factors;
mod params;
mod updates;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use factors::{init_factors, FactorSet};
pub use params::{HyperParams, Scheme, PROX_WEIGHT};
pub use updates::{
    merit, objective, regularizer_eigen, update_middle, update_u1, update_v, update_x,
    MiddleUpdate, Problem,
};

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SymEigen};

/// Per-fit diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveTrace {
    /// Objective after each iteration; entry 0 is the initial value.
    pub loss: Vec<f64>,
    /// Number of inner-factor updates whose Gram matrix needed eigenvalue flooring.
    pub floor_events: usize,
    pub wall_time: f64,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    /// Completed matrix, entrywise nonnegative.
    pub x: DenseMatrix,
    pub factors: FactorSet,
    pub trace: SolveTrace,
}

/// Which variable a block update touched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    X,
    U1,
    /// Inner factor, 0-based from the left.
    Middle(usize),
    V,
}

/// Objective before and after one block update, emitted to observers.
#[derive(Debug, Clone, Copy)]
pub struct BlockEvent {
    pub iteration: usize,
    pub block: Block,
    pub loss_before: f64,
    pub loss_after: f64,
    /// `‖new − prev‖_F²` for the updated block.
    pub step_sq: f64,
}

/// Iteration state of the solver.
pub struct Hypalm<'a> {
    problem: Problem<'a>,
    hp: HyperParams,
    reg_rows: SymEigen,
    reg_cols: SymEigen,
    x: DenseMatrix,
    factors: FactorSet,
    iteration: usize,
    loss: Vec<f64>,
    floor_events: usize,
    started: Instant,
}

impl<'a> Hypalm<'a> {
    /// Starts from `X = Y` and the SVD initialization of `Y`.
    pub fn new(problem: Problem<'a>, hp: &HyperParams) -> Result<Self> {
        hp.validate()?;
        let factors = init_factors(problem.y, &hp.dims)?;
        Self::with_start(problem, hp, problem.y.clone(), factors)
    }

    /// Starts from explicit iterates.
    pub fn with_start(
        problem: Problem<'a>,
        hp: &HyperParams,
        x: DenseMatrix,
        factors: FactorSet,
    ) -> Result<Self> {
        let started = Instant::now();
        hp.validate()?;
        if factors.output_shape() != problem.shape() {
            return Err(Error::DimensionMismatch {
                op: "initial factors",
                expected: problem.shape(),
                got: factors.output_shape(),
            });
        }
        let reg_rows = regularizer_eigen(problem.l_rows, hp.mu)?;
        let reg_cols = regularizer_eigen(problem.l_cols, hp.mu)?;
        let initial = objective(&problem, &x, &factors, hp.mu, hp.theta)?;
        Ok(Self {
            problem,
            hp: hp.clone(),
            reg_rows,
            reg_cols,
            x,
            factors,
            iteration: 0,
            loss: vec![initial],
            floor_events: 0,
            started,
        })
    }

    pub fn x(&self) -> &DenseMatrix {
        &self.x
    }

    pub fn factors(&self) -> &FactorSet {
        &self.factors
    }

    pub fn loss(&self) -> &[f64] {
        &self.loss
    }

    fn current_loss(&self) -> Result<f64> {
        objective(
            &self.problem,
            &self.x,
            &self.factors,
            self.hp.mu,
            self.hp.theta,
        )
    }

    /// Runs one full iteration and returns the new objective value.
    pub fn step(&mut self) -> Result<f64> {
        self.step_observed(None)
    }

    /// Like [`Hypalm::step`], reporting every block update to `observer`.
    ///
    /// The objective is only evaluated between blocks when an observer is attached.
    pub fn step_observed(
        &mut self,
        mut observer: Option<&mut dyn FnMut(BlockEvent)>,
    ) -> Result<f64> {
        self.iteration += 1;
        let iteration = self.iteration;
        let theta = self.hp.theta;
        let n_factors = self.factors.len();
        let last = n_factors - 1;

        let mut before = match observer {
            Some(_) => self.current_loss()?,
            None => 0.0,
        };
        let mut emit = |this: &Self, block: Block, step_sq: f64, before: &mut f64| -> Result<()> {
            if let Some(obs) = observer.as_deref_mut() {
                let after = this.current_loss()?;
                obs(BlockEvent {
                    iteration,
                    block,
                    loss_before: *before,
                    loss_after: after,
                    step_sq,
                });
                *before = after;
            }
            Ok(())
        };

        let product = self.factors.product();
        let x_new = update_x(
            &self.x,
            &product,
            self.problem.y,
            self.problem.mask,
            self.hp.alpha,
            theta,
        )?;
        let step = x_new.sub(&self.x)?.frobenius_sq();
        self.x = x_new;
        emit(self, Block::X, step, &mut before)?;

        let tail = self
            .factors
            .partial_product(1, n_factors)
            .expect("non-empty");
        let u1 = updates::update_u1_with(&self.reg_rows, &self.x, &self.factors.u1, &tail, theta)?;
        let step = u1.sub(&self.factors.u1)?.frobenius_sq();
        self.factors.u1 = u1;
        emit(self, Block::U1, step, &mut before)?;

        for idx in 1..last {
            let left = self.factors.partial_product(0, idx).expect("non-empty");
            let right = self
                .factors
                .partial_product(idx + 1, n_factors)
                .expect("non-empty");
            let prev = &self.factors.middles[idx - 1];
            let upd = update_middle(&self.x, prev, &left, &right, theta)?;
            if upd.floored {
                self.floor_events += 1;
            }
            let step = upd.factor.sub(prev)?.frobenius_sq();
            self.factors.middles[idx - 1] = upd.factor;
            emit(self, Block::Middle(idx - 1), step, &mut before)?;
        }

        let head = self.factors.partial_product(0, last).expect("non-empty");
        let v = updates::update_v_with(&self.reg_cols, &self.x, &self.factors.v, &head, theta)?;
        let step = v.sub(&self.factors.v)?.frobenius_sq();
        self.factors.v = v;
        emit(self, Block::V, step, &mut before)?;

        let loss = self.current_loss()?;
        self.loss.push(loss);
        Ok(loss)
    }

    pub fn finish(self) -> FitResult {
        FitResult {
            x: self.x,
            factors: self.factors,
            trace: SolveTrace {
                loss: self.loss,
                floor_events: self.floor_events,
                wall_time: self.started.elapsed().as_secs_f64(),
            },
        }
    }
}

fn run(mut solver: Hypalm<'_>, iters: usize) -> Result<FitResult> {
    for k in 1..=iters {
        solver.step().map_err(|e| Error::Iteration {
            iteration: k,
            source: Box::new(e),
        })?;
    }
    Ok(solver.finish())
}

/// SVD initialization followed by exactly `hp.iters` iterations.
pub fn fit(problem: Problem<'_>, hp: &HyperParams) -> Result<FitResult> {
    run(Hypalm::new(problem, hp)?, hp.iters)
}

/// Runs `hp.iters` iterations from explicit starting iterates.
pub fn fit_from(
    problem: Problem<'_>,
    hp: &HyperParams,
    x0: DenseMatrix,
    factors: FactorSet,
) -> Result<FitResult> {
    run(Hypalm::with_start(problem, hp, x0, factors)?, hp.iters)
}
