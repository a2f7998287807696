//! Contractive conditions for self-maps on a G-metric space.
//!
//! All conditions are evaluated in the log domain. The `m`-th root of a
//! multiplicative distance is division of its log by `m`, and raising to the
//! power `eta` is multiplication by `eta`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::json;
use crate::metric::{ball_contains, ClosedBall, GMetric, Interval, LogDistance, Point, LOG_SLACK};
use crate::sampling::{endpoints, Sampler};

/// Witnesses kept in a [`CertificateReport`]; the total count is still reported.
pub const MAX_WITNESSES: usize = 32;

type MapFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A map from a declared domain into the carrier.
#[derive(Clone)]
pub struct SelfMap {
    apply: Arc<MapFn>,
    domain: Interval,
    description: String,
}

impl SelfMap {
    pub fn new<F>(description: impl Into<String>, domain: Interval, apply: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        SelfMap {
            apply: Arc::new(apply),
            domain,
            description: description.into(),
        }
    }

    /// `F(x)`; fails when `x` is outside the domain or the image is not a
    /// valid carrier point.
    pub fn eval(&self, x: Point) -> Result<Point> {
        if !self.domain.contains(x.value()) {
            return Err(Error::OutsideDomain(x.value()));
        }
        let y = (self.apply)(x.value());
        Point::new(y).map_err(|_| Error::OutsideDomain(x.value()))
    }

    pub fn domain(&self) -> &Interval {
        &self.domain
    }

    pub fn description(&self) -> &str {
        &self.description
    }
}

impl fmt::Debug for SelfMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SelfMap")
            .field("description", &self.description)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

/// Contraction constant, root index, ball radius and seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionParams {
    #[serde(serialize_with = "json::g17")]
    pub eta: f64,
    pub m: u32,
    #[serde(serialize_with = "json::g17")]
    pub gamma: f64,
    pub seed_point: Point,
}

impl ContractionParams {
    pub fn new(eta: f64, m: u32, gamma: f64, seed_point: Point) -> Result<Self> {
        validate_eta(eta)?;
        validate_m(m)?;
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                value: gamma,
                reason: "must be positive and finite",
            });
        }
        Ok(ContractionParams {
            eta,
            m,
            gamma,
            seed_point,
        })
    }

    pub fn ball(&self) -> ClosedBall {
        ClosedBall {
            center: self.seed_point,
            radius: self.gamma,
        }
    }

    /// `(1 - eta) * gamma`, the seed-condition threshold on the multiplicative scale.
    pub fn seed_threshold(&self) -> f64 {
        (1.0 - self.eta) * self.gamma
    }
}

pub(crate) fn validate_eta(eta: f64) -> Result<()> {
    if (0.0..1.0).contains(&eta) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "eta",
            value: eta,
            reason: "must lie in [0, 1)",
        })
    }
}

fn validate_m(m: u32) -> Result<()> {
    if m >= 1 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "m",
            value: 0.0,
            reason: "root index must be at least 1",
        })
    }
}

/// Both sides of a contractive inequality, already `m`-th-rooted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionCheck {
    #[serde(serialize_with = "json::g17")]
    pub lhs: f64,
    #[serde(serialize_with = "json::g17")]
    pub rhs: f64,
    pub holds: bool,
}

// lhs_raw / m <= (rhs_raw + slack) / m
fn rooted_check(lhs_raw: f64, rhs_raw: f64, m: u32) -> ConditionCheck {
    let m = m as f64;
    let lhs = lhs_raw / m;
    let rhs = rhs_raw / m;
    ConditionCheck {
        lhs,
        rhs,
        holds: lhs <= (rhs_raw + LOG_SLACK) / m,
    }
}

/// `G(Fx, Fy, Fz)^(1/m) <= (G(x, y, z)^(1/m))^eta`.
pub fn root_contraction(
    g: &GMetric,
    f: &SelfMap,
    eta: f64,
    m: u32,
    x: Point,
    y: Point,
    z: Point,
) -> Result<ConditionCheck> {
    validate_eta(eta)?;
    validate_m(m)?;
    let (fx, fy, fz) = (f.eval(x)?, f.eval(y)?, f.eval(z)?);
    Ok(rooted_check(g.log(fx, fy, fz), eta * g.log(x, y, z), m))
}

pub fn root_contraction_holds(
    g: &GMetric,
    f: &SelfMap,
    eta: f64,
    m: u32,
    x: Point,
    y: Point,
    z: Point,
) -> Result<bool> {
    root_contraction(g, f, eta, m, x, y, z).map(|c| c.holds)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeedCheck {
    /// `ln G(x0, Fx0, Fx0)`
    #[serde(serialize_with = "json::g17")]
    pub lhs_log: f64,
    /// `ln((1 - eta) * gamma)`; may be negative, in which case the check fails.
    #[serde(serialize_with = "json::g17")]
    pub rhs_log: f64,
    pub holds: bool,
}

/// `G(x0, Fx0, Fx0) <= (1 - eta) * gamma`.
pub fn seed_condition(g: &GMetric, f: &SelfMap, params: &ContractionParams) -> Result<SeedCheck> {
    let x0 = params.seed_point;
    let fx0 = f.eval(x0)?;
    let threshold = params.seed_threshold();
    let lhs_log = g.log(x0, fx0, fx0);
    let rhs_log = threshold.ln();
    Ok(SeedCheck {
        lhs_log,
        rhs_log,
        holds: threshold >= 1.0 && lhs_log <= rhs_log + LOG_SLACK,
    })
}

pub fn seed_condition_holds(g: &GMetric, f: &SelfMap, params: &ContractionParams) -> Result<bool> {
    seed_condition(g, f, params).map(|s| s.holds)
}

/// The five terms of the implicit max-bound and the resulting bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImplicitBound {
    /// Unrooted logs: `G(x,y,z)`, `G(x,Fx,Fx)`, `G(y,Fy,Fy)`, `G(x,Fy,Fy)`,
    /// `min{G(z,Fx,Fx), G(x,z,z)}`.
    #[serde(serialize_with = "json::g17_vec")]
    pub terms: [f64; 5],
    /// Index of the first maximal term.
    pub argmax: usize,
    /// 0 when `G(z,Fx,Fx)` was the minimum (ties included), 1 for `G(x,z,z)`.
    pub min_pick: usize,
    pub bound: LogDistance,
}

/// `eta * (1/m) * max{ G(x,y,z), G(x,Fx,Fx), G(y,Fy,Fy), G(x,Fy,Fy), min{G(z,Fx,Fx), G(x,z,z)} }`
/// in the log domain.
pub fn implicit_bound(
    g: &GMetric,
    f: &SelfMap,
    eta: f64,
    m: u32,
    x: Point,
    y: Point,
    z: Point,
) -> Result<ImplicitBound> {
    validate_eta(eta)?;
    validate_m(m)?;
    let (fx, fy) = (f.eval(x)?, f.eval(y)?);
    let min_a = g.log(z, fx, fx);
    let min_b = g.log(x, z, z);
    let (min_val, min_pick) = if min_b < min_a { (min_b, 1) } else { (min_a, 0) };
    let terms = [
        g.log(x, y, z),
        g.log(x, fx, fx),
        g.log(y, fy, fy),
        g.log(x, fy, fy),
        min_val,
    ];
    let mut argmax = 0;
    for (i, t) in terms.iter().enumerate().skip(1) {
        if *t > terms[argmax] {
            argmax = i;
        }
    }
    let bound = LogDistance::from_metric(eta * terms[argmax] / m as f64, g.description())?;
    Ok(ImplicitBound {
        terms,
        argmax,
        min_pick,
        bound,
    })
}

/// `G(Fx, Fy, Fz)^(1/m) <= M` with `M` from [`implicit_bound`].
pub fn implicit_contraction(
    g: &GMetric,
    f: &SelfMap,
    eta: f64,
    m: u32,
    x: Point,
    y: Point,
    z: Point,
) -> Result<ConditionCheck> {
    let b = implicit_bound(g, f, eta, m, x, y, z)?;
    let fz = f.eval(z)?;
    let (fx, fy) = (f.eval(x)?, f.eval(y)?);
    Ok(rooted_check(g.log(fx, fy, fz), eta * b.terms[b.argmax], m))
}

pub fn implicit_contraction_holds(
    g: &GMetric,
    f: &SelfMap,
    eta: f64,
    m: u32,
    x: Point,
    y: Point,
    z: Point,
) -> Result<bool> {
    implicit_contraction(g, f, eta, m, x, y, z).map(|c| c.holds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    /// plain `m`-th-root contraction
    Root,
    /// implicit max-contraction
    Implicit,
}

impl Condition {
    pub fn check(self, g: &GMetric, f: &SelfMap, eta: f64, m: u32, [x, y, z]: [Point; 3]) -> Result<ConditionCheck> {
        match self {
            Condition::Root => root_contraction(g, f, eta, m, x, y, z),
            Condition::Implicit => implicit_contraction(g, f, eta, m, x, y, z),
        }
    }
}

/// Where [`certify_region`] draws its triples from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    /// The closed ball around the seed point with radius `gamma`.
    Ball,
    Interval(Interval),
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Ball => f.write_str("ball"),
            Region::Interval(i) => write!(f, "{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    HoldsOnSample,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionWitness {
    pub index: usize,
    pub points: [Point; 3],
    #[serde(serialize_with = "json::g17")]
    pub lhs: f64,
    #[serde(serialize_with = "json::g17")]
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub condition: Condition,
    pub region: String,
    /// Interval actually sampled (the ball's envelope in ball mode).
    pub sampled_interval: Interval,
    pub params: ContractionParams,
    pub sample_count: usize,
    pub seed: u64,
    pub verdict: Verdict,
    pub violation_count: usize,
    pub witnesses: Vec<ConditionWitness>,
    pub seed_condition: SeedCheck,
}

impl CertificateReport {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::HoldsOnSample && self.seed_condition.holds
    }

    /// Recomputes every witness from scratch; true when each is still a violation.
    pub fn recheck(&self, g: &GMetric, f: &SelfMap) -> bool {
        self.witnesses.iter().all(|w| {
            self.condition
                .check(g, f, self.params.eta, self.params.m, w.points)
                .map(|c| c.lhs > c.rhs + LOG_SLACK / self.params.m as f64)
                .unwrap_or(false)
        })
    }
}

/// Evaluates `condition` on forced corner triples plus `n` stratified
/// random triples from `region`, and the seed condition once.
///
/// Forced triples are built from the region's closed endpoints and the seed
/// point (when inside the region), in every degenerate shape `(a,a,a)`,
/// `(a,a,b)` and `(a,b,b)`, followed by the same shapes on the first random
/// triple. Witnesses are listed in sample order.
pub fn certify_region(
    g: &GMetric,
    f: &SelfMap,
    params: &ContractionParams,
    condition: Condition,
    region: Region,
    n: usize,
    seed: u64,
) -> Result<CertificateReport> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: 0.0,
            reason: "sample count must be at least 1",
        });
    }
    let ball = params.ball();
    let empty = || Error::EmptyRegion(region.to_string());

    let (sampled, in_region): (Interval, Box<dyn Fn(Point) -> bool + '_>) = match region {
        Region::Ball => {
            let envelope = ball.envelope(g).ok_or_else(empty)?;
            let sampled = envelope.intersect(f.domain()).ok_or_else(empty)?;
            let keep = move |p: Point| sampled.contains(p.value()) && ball_contains(g, &ball, p);
            (sampled, Box::new(keep))
        }
        Region::Interval(i) => {
            if !i.is_bounded() {
                return Err(Error::InvalidInterval { lo: i.lo, hi: i.hi });
            }
            let sampled = i.intersect(f.domain()).ok_or_else(empty)?;
            (sampled, Box::new(move |p: Point| sampled.contains(p.value())))
        }
    };

    let mut sampler = Sampler::new(seed);
    let random = sampler.tuples_where::<3>(&sampled, n, &in_region);

    let mut specials: Vec<Point> = endpoints(&sampled).into_iter().filter(|p| in_region(*p)).collect();
    if in_region(params.seed_point) && !specials.contains(&params.seed_point) {
        specials.push(params.seed_point);
    }
    let mut triples = degenerate_triples(&specials);
    if let Some(first) = random.first() {
        triples.extend(degenerate_triples(&first[..2]));
        triples.push([first[1], first[2], first[2]]);
    }
    triples.extend(random.iter().copied());
    if triples.is_empty() {
        return Err(empty());
    }

    let mut violation_count = 0;
    let mut witnesses = Vec::new();
    for (index, t) in triples.iter().enumerate() {
        let c = condition.check(g, f, params.eta, params.m, *t)?;
        if !c.holds {
            violation_count += 1;
            if witnesses.len() < MAX_WITNESSES {
                witnesses.push(ConditionWitness {
                    index,
                    points: *t,
                    lhs: c.lhs,
                    rhs: c.rhs,
                });
            }
        }
    }

    Ok(CertificateReport {
        condition,
        region: region.to_string(),
        sampled_interval: sampled,
        params: *params,
        sample_count: triples.len(),
        seed,
        verdict: if violation_count == 0 {
            Verdict::HoldsOnSample
        } else {
            Verdict::Violated
        },
        violation_count,
        witnesses,
        seed_condition: seed_condition(g, f, params)?,
    })
}

fn degenerate_triples(pts: &[Point]) -> Vec<[Point; 3]> {
    let mut out = Vec::new();
    for &a in pts {
        out.push([a, a, a]);
        for &b in pts {
            if a != b {
                out.push([a, a, b]);
                out.push([a, b, b]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{exp_usual, half_shift_map, quarter_shift_map};

    fn p(x: f64) -> Point {
        Point::new(x).unwrap()
    }

    fn params(eta: f64, gamma: f64) -> ContractionParams {
        ContractionParams::new(eta, 1, gamma, p(1.0 / 3.0)).unwrap()
    }

    #[test]
    fn root_condition_on_quarter_branch() {
        let (g, f) = (exp_usual(), quarter_shift_map());
        let c = root_contraction(&g, &f, 0.625, 1, p(0.1), p(0.2), p(0.3)).unwrap();
        assert!((c.lhs - 0.1).abs() < 1e-15);
        assert!((c.rhs - 0.25).abs() < 1e-15);
        assert!(c.holds);
    }

    #[test]
    fn root_condition_fails_on_translation_branch() {
        let (g, f) = (exp_usual(), quarter_shift_map());
        let c = root_contraction(&g, &f, 0.625, 1, p(1.0), p(2.0), p(1.0)).unwrap();
        assert!((c.lhs - 2.0).abs() < 1e-12);
        assert!((c.rhs - 1.25).abs() < 1e-12);
        assert!(!c.holds);
        assert!(root_contraction_holds(&g, &f, 0.625, 1, p(2.0), p(2.0), p(2.0)).unwrap());
    }

    #[test]
    fn implicit_bound_terms() {
        let (g, f) = (exp_usual(), half_shift_map());
        let b = implicit_bound(&g, &f, 0.625, 1, p(0.1), p(0.2), p(0.3)).unwrap();
        let expected = [0.4, 0.1, 0.2, 0.0, 0.4];
        for (t, e) in b.terms.iter().zip(expected) {
            assert!((t - e).abs() < 1e-12, "{:?}", b.terms);
        }
        assert_eq!(b.argmax, 0);
        // G(x,z,z) = 0.4 < G(z,Fx,Fx) = 0.5
        assert_eq!(b.min_pick, 1);
        assert!((b.bound.log() - 0.25).abs() < 1e-12);

        let b = implicit_bound(&g, &f, 0.625, 1, p(1.0), p(2.0), p(1.0)).unwrap();
        let expected = [2.0, 0.5, 0.5, 1.5, 0.0];
        for (t, e) in b.terms.iter().zip(expected) {
            assert!((t - e).abs() < 1e-12, "{:?}", b.terms);
        }
        assert!((b.bound.log() - 1.25).abs() < 1e-12);
    }

    #[test]
    fn implicit_bound_at_fixed_point_is_zero() {
        let (g, f) = (exp_usual(), half_shift_map());
        let b = implicit_bound(&g, &f, 0.625, 1, p(0.0), p(0.0), p(0.0)).unwrap();
        assert!(b.bound.is_unit());
        assert!(implicit_contraction_holds(&g, &f, 0.625, 1, p(0.0), p(0.0), p(0.0)).unwrap());
    }

    #[test]
    fn implicit_ties_pick_first_term() {
        // x = y = z with F(x) = x: every term is 0.
        let (g, f) = (exp_usual(), half_shift_map());
        let b = implicit_bound(&g, &f, 0.5, 2, p(0.0), p(0.0), p(0.0)).unwrap();
        assert_eq!((b.argmax, b.min_pick), (0, 0));
    }

    #[test]
    fn implicit_condition_examples() {
        let (g, f) = (exp_usual(), half_shift_map());
        let c = implicit_contraction(&g, &f, 0.625, 1, p(0.1), p(0.2), p(0.3)).unwrap();
        assert!((c.lhs - 0.2).abs() < 1e-12 && c.holds);
        let c = implicit_contraction(&g, &f, 0.625, 1, p(1.0), p(2.0), p(1.0)).unwrap();
        assert!((c.lhs - 2.0).abs() < 1e-12 && (c.rhs - 1.25).abs() < 1e-12 && !c.holds);
    }

    #[test]
    fn seed_condition_cases() {
        let g = exp_usual();
        assert!(seed_condition_holds(&g, &quarter_shift_map(), &params(0.625, 5.5)).unwrap());
        assert!(seed_condition_holds(&g, &half_shift_map(), &params(0.625, 5.5)).unwrap());
        let s = seed_condition(&g, &quarter_shift_map(), &params(0.99, 1.0)).unwrap();
        assert!(!s.holds && s.rhs_log < 0.0);
    }

    #[test]
    fn params_validation() {
        assert!(ContractionParams::new(1.0, 1, 1.0, Point::ZERO).is_err());
        assert!(ContractionParams::new(-0.1, 1, 1.0, Point::ZERO).is_err());
        assert!(ContractionParams::new(0.5, 0, 1.0, Point::ZERO).is_err());
        assert!(ContractionParams::new(0.5, 1, 0.0, Point::ZERO).is_err());
        assert!(ContractionParams::new(0.0, 3, 0.5, Point::ZERO).is_ok());
    }

    #[test]
    fn outside_domain_is_an_error() {
        let g = exp_usual();
        let f = SelfMap::new("id on [0,1]", Interval::closed(0.0, 1.0).unwrap(), |x| x);
        assert_eq!(
            root_contraction_holds(&g, &f, 0.5, 1, p(0.5), p(2.0), p(0.5)),
            Err(Error::OutsideDomain(2.0))
        );
        let neg = SelfMap::new("x - 1", Interval::nonnegative(), |x| x - 1.0);
        assert!(neg.eval(p(0.5)).is_err());
    }

    #[test]
    fn certify_branch_regions() {
        let (g, f) = (exp_usual(), quarter_shift_map());
        let pr = params(0.625, 5.5);
        let inner = Region::Interval(Interval::closed_open(0.0, 1.0 / 3.0).unwrap());
        let r = certify_region(&g, &f, &pr, Condition::Root, inner, 2000, 11).unwrap();
        assert_eq!(r.verdict, Verdict::HoldsOnSample);
        assert!(r.holds());

        let outer = Region::Interval(Interval::closed(1.0 / 3.0, 5.5).unwrap());
        let r = certify_region(&g, &f, &pr, Condition::Root, outer, 2000, 11).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        assert!(!r.witnesses.is_empty() && r.witnesses.len() <= MAX_WITNESSES);
        assert!(r.recheck(&g, &f));
    }

    #[test]
    fn certify_ball_region() {
        let (g, f) = (exp_usual(), quarter_shift_map());
        let r = certify_region(&g, &f, &params(0.625, 5.5), Condition::Root, Region::Ball, 500, 1).unwrap();
        let ball = params(0.625, 5.5).ball();
        assert!(r
            .witnesses
            .iter()
            .all(|w| w.points.iter().all(|q| ball_contains(&g, &ball, *q))));
        assert!(r.sampled_interval.hi < 1.2);

        let err = certify_region(&g, &f, &params(0.625, 0.5), Condition::Root, Region::Ball, 500, 1);
        assert!(matches!(err, Err(Error::EmptyRegion(_))));
    }

    #[test]
    fn certify_region_outside_map_domain_is_empty() {
        let g = exp_usual();
        let f = SelfMap::new("half on [0,1]", Interval::closed(0.0, 1.0).unwrap(), |x| x / 2.0);
        let pr = ContractionParams::new(0.5, 1, 5.0, p(0.5)).unwrap();
        let region = Region::Interval(Interval::closed(2.0, 3.0).unwrap());
        let err = certify_region(&g, &f, &pr, Condition::Root, region, 10, 0);
        assert!(matches!(err, Err(Error::EmptyRegion(_))));
    }
}
