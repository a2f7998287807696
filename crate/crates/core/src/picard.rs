//! Picard iteration with geometric a-priori bounds and a residual stop.
//!
//! The solver stops at the first iterate `x` whose residual
//! `ln G(x, Fx, Fx)` is at most `ln(1 + epsilon)`. The a-priori bound is the
//! smallest `j` with `rate^j * ln G(x0, x1, x1) / (1 - rate) <= ln(1 + epsilon)`,
//! where `rate` is `eta` for the root contraction and `eta / (1 - eta)` for
//! the implicit one.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::contraction::{seed_condition, validate_eta, Condition, ContractionParams, SelfMap};
use crate::error::{Error, Result};
use crate::json;
use crate::metric::{ball_contains, ClosedBall, GMetric, LogDistance, Point};

type LeqFn = dyn Fn(f64, f64) -> bool + Send + Sync;

/// Partial order on the carrier, used to watch that the orbit descends.
#[derive(Clone)]
pub struct OrderRelation {
    leq: Arc<LeqFn>,
    description: String,
}

impl OrderRelation {
    pub fn new<F>(description: impl Into<String>, leq: F) -> Self
    where
        F: Fn(f64, f64) -> bool + Send + Sync + 'static,
    {
        OrderRelation {
            leq: Arc::new(leq),
            description: description.into(),
        }
    }

    /// The usual `<=` on reals.
    pub fn numeric() -> Self {
        OrderRelation::new("<=", |a, b| a <= b)
    }

    pub fn leq(&self, a: Point, b: Point) -> bool {
        (self.leq)(a.value(), b.value())
    }

    pub fn comparable(&self, a: Point, b: Point) -> bool {
        self.leq(a, b) || self.leq(b, a)
    }

    pub fn description(&self) -> &str {
        &self.description
    }
}

impl fmt::Debug for OrderRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OrderRelation")
            .field("description", &self.description)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardTrace {
    pub iterates: Vec<Point>,
    /// `ln G(x_j, x_{j+1}, x_{j+1})`, one per step.
    pub step_logs: Vec<LogDistance>,
    /// Ball membership of each iterate.
    pub in_ball: Vec<bool>,
    /// `x_{j+1} <= x_j` held at every step.
    pub monotone: bool,
}

impl PicardTrace {
    fn start(x0: Point, g: &GMetric, ball: &ClosedBall) -> Self {
        PicardTrace {
            iterates: vec![x0],
            step_logs: Vec::new(),
            in_ball: vec![ball_contains(g, ball, x0)],
            monotone: true,
        }
    }

    fn push(&mut self, next: Point, g: &GMetric, ball: &ClosedBall, order: &OrderRelation) -> Result<()> {
        let prev = *self.iterates.last().expect("trace always holds the seed");
        self.step_logs.push(g.distance(prev, next, next)?);
        self.in_ball.push(ball_contains(g, ball, next));
        self.monotone &= order.leq(next, prev);
        self.iterates.push(next);
        Ok(())
    }

    pub fn last(&self) -> Point {
        *self.iterates.last().expect("trace always holds the seed")
    }

    pub fn steps(&self) -> usize {
        self.step_logs.len()
    }

    pub fn left_ball(&self) -> bool {
        self.in_ball.iter().any(|b| !b)
    }

    /// CSV with columns `index,value,step_log,in_ball`; the last iterate has
    /// an empty `step_log`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "value", "step_log", "in_ball"])?;
        for (j, x) in self.iterates.iter().enumerate() {
            let step = self
                .step_logs
                .get(j)
                .map(|s| json::fmt_g17(s.log()))
                .unwrap_or_default();
            w.write_record([
                j.to_string(),
                json::fmt_g17(x.value()),
                step,
                self.in_ball[j].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Iterates `F` from `x0` for `steps` steps, recording step logs, ball
/// membership and order monotonicity.
pub fn picard_trace(
    f: &SelfMap,
    x0: Point,
    steps: usize,
    g: &GMetric,
    ball: &ClosedBall,
    order: &OrderRelation,
) -> Result<PicardTrace> {
    let mut trace = PicardTrace::start(x0, g, ball);
    for j in 0..steps {
        let next = step(f, trace.last(), j)?;
        trace.push(next, g, ball, order)?;
    }
    Ok(trace)
}

fn step(f: &SelfMap, x: Point, index: usize) -> Result<Point> {
    f.eval(x).map_err(|_| Error::DomainExit {
        index,
        value: x.value(),
    })
}

/// `eta^j * log_g01`: the per-step bound on `ln G(x_j, x_{j+1}, x_{j+1})`.
pub fn step_bound(log_g01: LogDistance, eta: f64, j: u32) -> Result<LogDistance> {
    validate_eta(eta)?;
    let factor = if j == 0 { 1.0 } else { eta.powi(j as i32) };
    Ok(LogDistance::new(factor * log_g01.log()).unwrap_or(LogDistance::ZERO))
}

/// Smallest `j >= 0` with `rate^j * log_g01 / (1 - rate) <= ln(1 + epsilon)`.
pub fn a_priori_iterations(log_g01: LogDistance, rate: f64, epsilon: f64) -> Result<u64> {
    if !(rate.is_finite() && rate < 1.0) {
        return Err(Error::RateOutOfRange { rate });
    }
    if rate < 0.0 {
        return Err(Error::InvalidParameter {
            name: "rate",
            value: rate,
            reason: "must be nonnegative",
        });
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            value: epsilon,
            reason: "must be positive",
        });
    }
    let tol = epsilon.ln_1p();
    let tail = |j: u64| rate.powi(j as i32) * log_g01.log() / (1.0 - rate);
    if tail(0) <= tol {
        return Ok(0);
    }
    if rate == 0.0 {
        return Ok(1);
    }
    // closed form, then nudged so the result is exactly the first j that passes
    let estimate = ((tail(0) / tol).ln() / (1.0 / rate).ln()).ceil().max(1.0) as u64;
    let mut j = estimate;
    while j > 1 && tail(j - 1) <= tol {
        j -= 1;
    }
    while tail(j) > tol {
        j += 1;
    }
    Ok(j)
}

/// Which side of 1 (and of 1/2) the implicit rate falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateClass {
    /// `mu < 1/2`
    BelowHalf,
    /// `1/2 <= mu < 1`: still a geometric rate
    Geometric,
    /// `mu >= 1`: no geometric bound
    Uncertified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuInfo {
    #[serde(serialize_with = "json::g17")]
    pub mu: f64,
    pub class: RateClass,
}

impl MuInfo {
    pub fn certifiable(&self) -> bool {
        self.class != RateClass::Uncertified
    }
}

/// `mu = eta / (1 - eta)`, the per-step rate of the implicit contraction.
pub fn mu_of(eta: f64) -> Result<MuInfo> {
    validate_eta(eta)?;
    let mu = eta / (1.0 - eta);
    let class = if mu < 0.5 {
        RateClass::BelowHalf
    } else if mu < 1.0 {
        RateClass::Geometric
    } else {
        RateClass::Uncertified
    };
    Ok(MuInfo { mu, class })
}

/// `G(x, p, p) <= 1 + epsilon`.
pub fn converged(g: &GMetric, x: Point, p: Point, epsilon: f64) -> bool {
    g.log(x, p, p) <= epsilon.ln_1p()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub epsilon: f64,
    pub max_iter: usize,
    /// Run even when the rate cannot be certified (`mu >= 1` in implicit
    /// mode); the result then carries no a-priori bound.
    pub allow_uncertified: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            epsilon: 1e-6,
            max_iter: 10_000,
            allow_uncertified: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointResult {
    pub point: Point,
    /// `ln G(x*, Fx*, Fx*)`
    pub residual_log: LogDistance,
    pub iterations_used: usize,
    /// A-priori iteration count; absent when the rate is uncertified.
    pub certified_bound: Option<u64>,
    pub mode: Condition,
    #[serde(serialize_with = "json::g17")]
    pub rate: f64,
    pub mu: Option<MuInfo>,
    /// Some iterate fell outside the closed ball around the seed.
    pub left_ball: bool,
    /// The orbit descended in the order at every step.
    pub order_certified: bool,
    pub trace: PicardTrace,
}

/// Picard iteration from `params.seed_point` until the residual drops below
/// `ln(1 + epsilon)`.
pub fn solve_fixed_point(
    g: &GMetric,
    f: &SelfMap,
    order: &OrderRelation,
    params: &ContractionParams,
    mode: Condition,
    opts: &SolveOptions,
) -> Result<FixedPointResult> {
    if !(opts.epsilon.is_finite() && opts.epsilon > 0.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            value: opts.epsilon,
            reason: "must be positive",
        });
    }
    let seed = seed_condition(g, f, params)?;
    if !seed.holds {
        return Err(Error::SeedConditionViolated {
            lhs_log: seed.lhs_log,
            rhs_log: seed.rhs_log,
        });
    }

    let (rate, mu) = match mode {
        Condition::Root => (params.eta, None),
        Condition::Implicit => {
            let info = mu_of(params.eta)?;
            (info.mu, Some(info))
        }
    };
    let certifiable = rate < 1.0;
    if !certifiable && !opts.allow_uncertified {
        return Err(Error::RateOutOfRange { rate });
    }

    let tol = opts.epsilon.ln_1p();
    let ball = params.ball();
    let mut trace = PicardTrace::start(params.seed_point, g, &ball);
    let mut certified_bound = None;

    loop {
        let j = trace.steps();
        let x = trace.last();
        let fx = step(f, x, j)?;
        let residual = g.distance(x, fx, fx)?;
        if j == 0 && certifiable {
            certified_bound = Some(a_priori_iterations(residual, rate, opts.epsilon)?);
        }
        if residual.log() <= tol {
            return Ok(FixedPointResult {
                point: x,
                residual_log: residual,
                iterations_used: j,
                certified_bound,
                mode,
                rate,
                mu,
                left_ball: trace.left_ball(),
                order_certified: trace.monotone,
                trace,
            });
        }
        if j >= opts.max_iter {
            return Err(Error::MaxIterationsExceeded {
                iterations: j,
                residual_log: residual.log(),
                last: x.value(),
            });
        }
        trace.push(fx, g, &ball, order)?;
    }
}
