//! Points, multiplicative metrics, multiplicative G-metrics and closed balls.
//!
//! Every distance lives in the log domain: a multiplicative distance `D >= 1`
//! is stored as `ln D >= 0`. Products of distances become sums, `D -> 1`
//! becomes `ln D -> 0`, and exponentiation happens only when a value is shown
//! to a user.

use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::json;

/// Absolute tolerance used for every log-domain inequality check.
pub const LOG_SLACK: f64 = 1e-12;

/// Element of the carrier set: a finite nonnegative real.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Point(f64);

impl Point {
    pub const ZERO: Point = Point(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value >= 0.0 {
            // normalizes -0.0
            Ok(Point(value + 0.0))
        } else {
            Err(Error::InvalidPoint(value))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Point {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Point::new(value)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        json::g17(&self.0, s)
    }
}

/// Natural log of a multiplicative distance; always `>= 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogDistance(f64);

impl LogDistance {
    pub const ZERO: LogDistance = LogDistance(0.0);

    pub fn new(logval: f64) -> Option<Self> {
        (logval.is_finite() && logval >= 0.0).then_some(LogDistance(logval + 0.0))
    }

    /// Accepts a value from a metric, reporting which metric misbehaved.
    pub(crate) fn from_metric(logval: f64, metric: &str) -> Result<Self> {
        LogDistance::new(logval).ok_or_else(|| Error::InvalidMetricValue {
            metric: metric.to_string(),
            value: logval,
        })
    }

    /// Log of a multiplicative scale such as a ball radius. `None` when `scale < 1`.
    pub fn of_scale(scale: f64) -> Option<Self> {
        LogDistance::new(scale.ln())
    }

    #[inline]
    pub fn log(self) -> f64 {
        self.0
    }

    /// The multiplicative distance `e^logval`, always `>= 1`.
    pub fn exp(self) -> f64 {
        self.0.exp()
    }

    pub fn is_unit(self) -> bool {
        self.0 == 0.0
    }
}

impl Serialize for LogDistance {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        json::g17(&self.0, s)
    }
}

/// A real interval with independently open or closed ends. `hi` may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    #[serde(serialize_with = "json::g17")]
    pub lo: f64,
    #[serde(serialize_with = "json::g17")]
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Result<Self> {
        let hi_ok = hi.is_finite() || hi == f64::INFINITY;
        if !lo.is_finite() || !hi_ok || lo > hi {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Interval {
            lo,
            hi,
            lo_closed,
            hi_closed: hi_closed && hi.is_finite(),
        })
    }

    /// `[lo, hi]`
    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        Interval::new(lo, hi, true, true)
    }

    /// `[lo, hi)`
    pub fn closed_open(lo: f64, hi: f64) -> Result<Self> {
        Interval::new(lo, hi, true, false)
    }

    /// `(lo, hi)`
    pub fn open(lo: f64, hi: f64) -> Result<Self> {
        Interval::new(lo, hi, false, false)
    }

    /// `[0, inf)`, the whole carrier.
    pub fn nonnegative() -> Self {
        Interval {
            lo: 0.0,
            hi: f64::INFINITY,
            lo_closed: true,
            hi_closed: false,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn is_bounded(&self) -> bool {
        self.hi.is_finite()
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Nonempty as a set of reals.
    pub fn is_nonempty(&self) -> bool {
        self.lo < self.hi || (self.lo == self.hi && self.lo_closed && self.hi_closed)
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let (lo, lo_closed) = if self.lo > other.lo {
            (self.lo, self.lo_closed)
        } else if other.lo > self.lo {
            (other.lo, other.lo_closed)
        } else {
            (self.lo, self.lo_closed && other.lo_closed)
        };
        let (hi, hi_closed) = if self.hi < other.hi {
            (self.hi, self.hi_closed)
        } else if other.hi < self.hi {
            (other.hi, other.hi_closed)
        } else {
            (self.hi, self.hi_closed && other.hi_closed)
        };
        if lo > hi {
            return None;
        }
        let out = Interval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        };
        out.is_nonempty().then_some(out)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        if self.hi.is_finite() {
            write!(f, "{l}{}, {}{r}", self.lo, self.hi)
        } else {
            write!(f, "{l}{}, inf{r}", self.lo)
        }
    }
}

type BinaryLog = dyn Fn(f64, f64) -> f64 + Send + Sync;
type TernaryLog = dyn Fn(f64, f64, f64) -> f64 + Send + Sync;

/// Binary multiplicative distance, held as its logarithm.
///
/// The wrapped function is not trusted: it may violate any axiom, which is
/// what [`crate::axioms::check_mult_axioms`] is for. Use [`MultMetric::log`]
/// for raw values and [`MultMetric::distance`] when a validated distance is
/// required.
#[derive(Clone)]
pub struct MultMetric {
    log_fn: Arc<BinaryLog>,
    description: String,
}

impl MultMetric {
    pub fn new<F>(description: impl Into<String>, log_fn: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        MultMetric {
            log_fn: Arc::new(log_fn),
            description: description.into(),
        }
    }

    /// `d(x, y) = e^{dist(x, y)}` for an ordinary metric `dist`.
    pub fn exp_of<F>(description: impl Into<String>, metric: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        MultMetric::new(description, metric)
    }

    #[inline]
    pub fn log(&self, x: Point, y: Point) -> f64 {
        (self.log_fn)(x.value(), y.value())
    }

    pub fn distance(&self, x: Point, y: Point) -> Result<LogDistance> {
        LogDistance::from_metric(self.log(x, y), &self.description)
    }

    pub fn description(&self) -> &str {
        &self.description
    }
}

impl fmt::Debug for MultMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultMetric")
            .field("description", &self.description)
            .finish_non_exhaustive()
    }
}

/// Ternary multiplicative distance `G(x, y, z)`, held as its logarithm.
#[derive(Clone)]
pub struct GMetric {
    log_fn: Arc<TernaryLog>,
    description: String,
}

impl GMetric {
    pub fn new<F>(description: impl Into<String>, log_fn: F) -> Self
    where
        F: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    {
        GMetric {
            log_fn: Arc::new(log_fn),
            description: description.into(),
        }
    }

    /// Raw log value; may be anything if the metric is broken.
    #[inline]
    pub fn log(&self, x: Point, y: Point, z: Point) -> f64 {
        (self.log_fn)(x.value(), y.value(), z.value())
    }

    pub fn distance(&self, x: Point, y: Point, z: Point) -> Result<LogDistance> {
        LogDistance::from_metric(self.log(x, y, z), &self.description)
    }

    /// `G(x, y, z)` on the multiplicative scale.
    pub fn value(&self, x: Point, y: Point, z: Point) -> f64 {
        self.log(x, y, z).exp()
    }

    pub fn description(&self) -> &str {
        &self.description
    }
}

impl fmt::Debug for GMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GMetric")
            .field("description", &self.description)
            .finish_non_exhaustive()
    }
}

/// `G(x, y, z) = d(x, y) * d(y, z) * d(z, x)`, a sum of logs.
pub fn gm_from_product(d: &MultMetric) -> GMetric {
    let inner = Arc::clone(&d.log_fn);
    GMetric::new(format!("product of {}", d.description), move |x, y, z| {
        sum3(inner(x, y), inner(y, z), inner(z, x))
    })
}

/// `G(x, y, z) = e^{d(x, y) + d(y, z) + d(z, x)}` for an ordinary metric `d`.
pub fn gm_from_exp<F>(description: impl Into<String>, d: F) -> GMetric
where
    F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
{
    GMetric::new(format!("exp-sum of {}", description.into()), move |x, y, z| {
        sum3(d(x, y), d(y, z), d(z, x))
    })
}

// Summed in sorted order so every argument permutation yields the same bits.
#[inline]
fn sum3(a: f64, b: f64, c: f64) -> f64 {
    let mut t = [a, b, c];
    t.sort_by(f64::total_cmp);
    t[0] + t[1] + t[2]
}

/// Closed ball `{ rho : G(center, rho, rho) <= radius }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedBall {
    pub center: Point,
    #[serde(serialize_with = "json::g17")]
    pub radius: f64,
}

impl ClosedBall {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                value: radius,
                reason: "ball radius must be positive and finite",
            });
        }
        Ok(ClosedBall { center, radius })
    }

    /// `G(center, center, center) = 1`, so a radius below 1 holds nothing.
    pub fn is_empty_by_radius(&self) -> bool {
        self.radius < 1.0
    }

    /// Smallest interval of the carrier containing the ball, assuming the
    /// ball is connected. Found by doubling outward from the center and
    /// bisecting each boundary. `None` when the center is not in the ball.
    pub fn envelope(&self, g: &GMetric) -> Option<Interval> {
        if !ball_contains(g, self, self.center) {
            return None;
        }
        let c = self.center.value();
        let inside = |x: f64| Point::new(x).map(|p| ball_contains(g, self, p)).unwrap_or(false);

        let mut step = 1.0;
        while inside(c + step) && step < 1e12 {
            step *= 2.0;
        }
        let hi = bisect(c, c + step, &inside);

        let lo = if inside(0.0) { 0.0 } else { bisect(c, 0.0, &inside) };
        Interval::closed(lo, hi).ok()
    }
}

// Boundary between an inside point and an outside point, kept on the inside.
fn bisect(mut inside_pt: f64, mut outside_pt: f64, inside: &dyn Fn(f64) -> bool) -> f64 {
    if inside(outside_pt) {
        return outside_pt;
    }
    for _ in 0..200 {
        let mid = 0.5 * (inside_pt + outside_pt);
        if mid == inside_pt || mid == outside_pt {
            break;
        }
        if inside(mid) {
            inside_pt = mid;
        } else {
            outside_pt = mid;
        }
    }
    inside_pt
}

/// `G(center, rho, rho) <= radius`, compared as logs.
pub fn ball_contains(g: &GMetric, ball: &ClosedBall, rho: Point) -> bool {
    g.log(ball.center, rho, rho) <= ball.radius.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64) -> Point {
        Point::new(x).unwrap()
    }

    fn usual() -> GMetric {
        gm_from_exp("usual", |x, y| (x - y).abs())
    }

    #[test]
    fn point_rejects_negative_and_nonfinite() {
        assert!(Point::new(-1e-300).is_err());
        assert!(Point::new(f64::NAN).is_err());
        assert!(Point::new(f64::INFINITY).is_err());
        assert_eq!(Point::new(-0.0).unwrap().value().to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn log_distance_floor() {
        assert!(LogDistance::new(-1e-15).is_none());
        assert!(LogDistance::new(0.0).unwrap().is_unit());
        assert!(LogDistance::of_scale(0.5).is_none());
        assert_eq!(LogDistance::new(0.0).unwrap().exp(), 1.0);
    }

    #[test]
    fn product_construction_sums_pairwise_logs() {
        let d = MultMetric::exp_of("e^|x-y|", |x, y| (x - y).abs());
        let g = gm_from_product(&d);
        assert_eq!(g.log(p(0.0), p(1.0), p(2.0)), 4.0);
        assert_eq!(g.log(p(3.0), p(3.0), p(3.0)), 0.0);
        let a = g.log(p(0.0), p(1.0), p(2.0));
        assert_eq!(a, g.log(p(2.0), p(0.0), p(1.0)));
        assert_eq!(a, g.log(p(1.0), p(2.0), p(0.0)));
    }

    #[test]
    fn exp_construction_reference_values() {
        let g = usual();
        let v = g.value(p(1.0 / 3.0), p(0.0), p(0.0));
        assert!((v - 1.9477).abs() < 1e-4);
        let v = g.value(p(1.0 / 3.0), p(1.0 / 6.0), p(1.0 / 6.0));
        assert!((v - 1.3956).abs() < 1e-4);
        assert_eq!(g.log(p(0.7), p(0.7), p(0.7)), 0.0);
    }

    #[test]
    fn ball_membership() {
        let g = usual();
        let ball = ClosedBall::new(p(1.0 / 3.0), 5.5).unwrap();
        assert!(ball_contains(&g, &ball, p(1.0 / 3.0)));
        // e^{4/3} ~ 3.794 <= 5.5
        assert!(ball_contains(&g, &ball, p(1.0)));
        // e^{10/3} ~ 28.03 > 5.5
        assert!(!ball_contains(&g, &ball, p(2.0)));
    }

    #[test]
    fn ball_radius_below_one_is_empty() {
        let g = usual();
        let ball = ClosedBall::new(p(1.0), 0.999).unwrap();
        assert!(ball.is_empty_by_radius());
        assert!(!ball_contains(&g, &ball, p(1.0)));
        assert!(ball.envelope(&g).is_none());
        assert!(ClosedBall::new(p(1.0), 0.0).is_err());
    }

    #[test]
    fn ball_envelope_matches_closed_form() {
        // 2|rho - 1/3| <= ln 5.5
        let g = usual();
        let ball = ClosedBall::new(p(1.0 / 3.0), 5.5).unwrap();
        let env = ball.envelope(&g).unwrap();
        assert_eq!(env.lo, 0.0);
        let expected_hi = 1.0 / 3.0 + 5.5f64.ln() / 2.0;
        assert!((env.hi - expected_hi).abs() < 1e-12, "{} vs {}", env.hi, expected_hi);
        assert!(ball_contains(&g, &ball, p(env.hi)));
    }

    #[test]
    fn interval_semantics() {
        let i = Interval::closed_open(0.0, 1.0 / 3.0).unwrap();
        assert!(i.contains(0.0));
        assert!(!i.contains(1.0 / 3.0));
        let o = Interval::open(0.0, 0.5).unwrap();
        assert!(!o.contains(0.0));
        assert!(Interval::closed(2.0, 1.0).is_err());
        let both = i.intersect(&o).unwrap();
        assert!(!both.lo_closed && !both.hi_closed);
        assert_eq!(both.hi, 1.0 / 3.0);
        assert!(Interval::closed(0.0, 1.0)
            .unwrap()
            .intersect(&Interval::closed(2.0, 3.0).unwrap())
            .is_none());
        assert_eq!(Interval::nonnegative().to_string(), "[0, inf)");
    }
}
