//! Sampling-based axiom checks for multiplicative metrics and G-metrics.
//!
//! Each check evaluates the axiom on seeded stratified tuples drawn from a
//! bounded interval plus a fixed grid of corner tuples (closed endpoints and
//! the entries of one random triple, in every combination, which covers the
//! equal-argument cases). Failures are data: each carries witnesses that can
//! be re-evaluated from scratch with [`AxiomReport::recheck`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::json;
use crate::metric::{GMetric, Interval, MultMetric, Point, LOG_SLACK};
use crate::sampling::{endpoints, Sampler};

/// Witnesses kept per axiom; the total count is still reported.
pub const MAX_WITNESSES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
}

impl Relation {
    /// Whether `lhs REL rhs` fails, with [`LOG_SLACK`] on the non-strict relations.
    pub fn violated(self, lhs: f64, rhs: f64) -> bool {
        let holds = match self {
            Relation::Le => lhs <= rhs + LOG_SLACK,
            Relation::Lt => lhs < rhs,
            Relation::Eq => (lhs - rhs).abs() <= LOG_SLACK,
            Relation::Ne => (lhs - rhs).abs() > 0.0,
        };
        !holds
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axiom {
    /// `d(x, y) >= 1`
    #[serde(rename = "zeta1")]
    Zeta1,
    /// `d(x, y) = 1` iff `x = y`
    #[serde(rename = "zeta2")]
    Zeta2,
    /// symmetry
    #[serde(rename = "zeta3")]
    Zeta3,
    /// multiplicative triangle inequality
    #[serde(rename = "zeta4")]
    Zeta4,
    /// `G(x, x, x) = 1`
    #[serde(rename = "G_M1")]
    G1,
    /// `G(x, x, y) > 1` for `x != y`
    #[serde(rename = "G_M2")]
    G2,
    /// `G(x, x, y) <= G(x, y, z)` for `y != z`
    #[serde(rename = "G_M3")]
    G3,
    /// invariance under argument permutations
    #[serde(rename = "G_M4")]
    G4,
    /// rectangle inequality `G(x, y, z) <= G(x, t, t) G(t, y, z)`
    #[serde(rename = "G_M5")]
    G5,
    /// `G(x, y, z) = 1` when `x = y = z`
    #[serde(rename = "derived1")]
    Derived1,
    /// `G(x, y, z) <= G(x, t, t) G(y, t, t) G(z, t, t)`
    #[serde(rename = "derived2")]
    Derived2,
    /// `G(x, y, z) <= G(x, x, y) G(x, x, z)`
    #[serde(rename = "derived3")]
    Derived3,
    /// `G(x, y, y) <= G(y, x, x)^2`
    #[serde(rename = "derived4")]
    Derived4,
}

pub const MULT_AXIOMS: [Axiom; 4] = [Axiom::Zeta1, Axiom::Zeta2, Axiom::Zeta3, Axiom::Zeta4];
pub const GM_AXIOMS: [Axiom; 5] = [Axiom::G1, Axiom::G2, Axiom::G3, Axiom::G4, Axiom::G5];
pub const DERIVED_PROPERTIES: [Axiom; 4] = [Axiom::Derived1, Axiom::Derived2, Axiom::Derived3, Axiom::Derived4];

impl Axiom {
    pub fn arity(self) -> usize {
        match self {
            Axiom::G1 | Axiom::Derived1 => 1,
            Axiom::Zeta1 | Axiom::Zeta2 | Axiom::Zeta3 | Axiom::G2 | Axiom::Derived4 => 2,
            Axiom::Zeta4 | Axiom::G3 | Axiom::G4 | Axiom::Derived3 => 3,
            Axiom::G5 | Axiom::Derived2 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axiom::Zeta1 => "zeta1",
            Axiom::Zeta2 => "zeta2",
            Axiom::Zeta3 => "zeta3",
            Axiom::Zeta4 => "zeta4",
            Axiom::G1 => "G_M1",
            Axiom::G2 => "G_M2",
            Axiom::G3 => "G_M3",
            Axiom::G4 => "G_M4",
            Axiom::G5 => "G_M5",
            Axiom::Derived1 => "derived1",
            Axiom::Derived2 => "derived2",
            Axiom::Derived3 => "derived3",
            Axiom::Derived4 => "derived4",
        }
    }

    fn is_binary_metric_axiom(self) -> bool {
        MULT_AXIOMS.contains(&self)
    }
}

/// The metric an axiom is evaluated on.
#[derive(Debug, Clone, Copy)]
pub enum Subject<'a> {
    Mult(&'a MultMetric),
    G(&'a GMetric),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
}

impl Comparison {
    fn new(lhs: f64, rhs: f64, relation: Relation) -> Self {
        Comparison { lhs, rhs, relation }
    }

    pub fn violated(&self) -> bool {
        self.relation.violated(self.lhs, self.rhs)
    }
}

/// Both sides of `axiom` at `pts`, or `None` when the axiom's hypothesis
/// (e.g. `x != y`) does not apply or the subject is of the wrong kind.
pub fn evaluate(axiom: Axiom, subject: Subject<'_>, pts: &[Point]) -> Option<Comparison> {
    if pts.len() < axiom.arity() {
        return None;
    }
    use Relation::*;
    match subject {
        Subject::Mult(d) => {
            if !axiom.is_binary_metric_axiom() {
                return None;
            }
            let (x, y) = (pts[0], pts[1]);
            Some(match axiom {
                Axiom::Zeta1 => Comparison::new(0.0, d.log(x, y), Le),
                Axiom::Zeta2 if x == y => Comparison::new(d.log(x, y), 0.0, Eq),
                Axiom::Zeta2 => Comparison::new(d.log(x, y), 0.0, Ne),
                Axiom::Zeta3 => Comparison::new(d.log(x, y), d.log(y, x), Eq),
                Axiom::Zeta4 => {
                    let z = pts[2];
                    Comparison::new(d.log(x, y), d.log(x, z) + d.log(z, y), Le)
                }
                _ => unreachable!(),
            })
        }
        Subject::G(g) => {
            if axiom.is_binary_metric_axiom() {
                return None;
            }
            let x = pts[0];
            match axiom {
                Axiom::G1 | Axiom::Derived1 => Some(Comparison::new(g.log(x, x, x), 0.0, Eq)),
                Axiom::G2 => {
                    let y = pts[1];
                    (x != y).then(|| Comparison::new(0.0, g.log(x, x, y), Lt))
                }
                Axiom::G3 => {
                    let (y, z) = (pts[1], pts[2]);
                    (y != z).then(|| Comparison::new(g.log(x, x, y), g.log(x, y, z), Le))
                }
                Axiom::G4 => {
                    let (y, z) = (pts[1], pts[2]);
                    let base = g.log(x, y, z);
                    let perms = [
                        g.log(x, z, y),
                        g.log(y, x, z),
                        g.log(y, z, x),
                        g.log(z, x, y),
                        g.log(z, y, x),
                    ];
                    // report the permutation furthest from the base value
                    let worst =
                        perms.into_iter().fold(
                            base,
                            |acc, v| if (v - base).abs() > (acc - base).abs() { v } else { acc },
                        );
                    Some(Comparison::new(base, worst, Eq))
                }
                Axiom::G5 => {
                    let (y, z, t) = (pts[1], pts[2], pts[3]);
                    Some(Comparison::new(g.log(x, y, z), g.log(x, t, t) + g.log(t, y, z), Le))
                }
                Axiom::Derived2 => {
                    let (y, z, t) = (pts[1], pts[2], pts[3]);
                    Some(Comparison::new(
                        g.log(x, y, z),
                        g.log(x, t, t) + g.log(y, t, t) + g.log(z, t, t),
                        Le,
                    ))
                }
                Axiom::Derived3 => {
                    let (y, z) = (pts[1], pts[2]);
                    Some(Comparison::new(g.log(x, y, z), g.log(x, x, y) + g.log(x, x, z), Le))
                }
                Axiom::Derived4 => {
                    let y = pts[1];
                    Some(Comparison::new(g.log(x, y, y), 2.0 * g.log(y, x, x), Le))
                }
                _ => unreachable!(),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub points: Vec<Point>,
    #[serde(serialize_with = "json::g17")]
    pub lhs: f64,
    #[serde(serialize_with = "json::g17")]
    pub rhs: f64,
    pub relation: Relation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomResult {
    pub axiom: Axiom,
    pub status: Status,
    /// Tuples where the axiom's hypothesis applied.
    pub checks: usize,
    pub violations: usize,
    pub witnesses: Vec<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub suite: &'static str,
    pub metric: String,
    pub domain: Interval,
    pub sample_count: usize,
    pub corner_count: usize,
    pub seed: u64,
    pub passed: bool,
    pub results: Vec<AxiomResult>,
}

impl AxiomReport {
    pub fn result(&self, axiom: Axiom) -> Option<&AxiomResult> {
        self.results.iter().find(|r| r.axiom == axiom)
    }

    pub fn failed_axioms(&self) -> Vec<Axiom> {
        self.results
            .iter()
            .filter(|r| r.status == Status::Fail)
            .map(|r| r.axiom)
            .collect()
    }

    /// Re-evaluates every witness against `subject`; true when each one is
    /// still a violation.
    pub fn recheck(&self, subject: Subject<'_>) -> bool {
        self.results.iter().all(|r| {
            r.witnesses.iter().all(|w| {
                evaluate(r.axiom, subject, &w.points)
                    .map(|c| c.violated())
                    .unwrap_or(false)
            })
        })
    }
}

/// Checks `zeta1`-`zeta4` on `n` sampled tuples plus corners.
pub fn check_mult_axioms(d: &MultMetric, domain: &Interval, n: usize, seed: u64) -> Result<AxiomReport> {
    run_suite(
        "multiplicative-metric",
        Subject::Mult(d),
        d.description(),
        &MULT_AXIOMS,
        domain,
        n,
        seed,
    )
}

/// Checks `G_M1`-`G_M5` on `n` sampled tuples plus corners.
pub fn check_gm_axioms(g: &GMetric, domain: &Interval, n: usize, seed: u64) -> Result<AxiomReport> {
    run_suite("g-metric", Subject::G(g), g.description(), &GM_AXIOMS, domain, n, seed)
}

/// Checks the four consequences every G-metric must satisfy:
/// identity on the diagonal, the star bound through an arbitrary `t`, the
/// two-point bound, and `G(x, y, y) <= G(y, x, x)^2`.
pub fn check_derived_properties(g: &GMetric, domain: &Interval, n: usize, seed: u64) -> Result<AxiomReport> {
    run_suite(
        "g-metric-derived",
        Subject::G(g),
        g.description(),
        &DERIVED_PROPERTIES,
        domain,
        n,
        seed,
    )
}

fn run_suite(
    suite: &'static str,
    subject: Subject<'_>,
    metric: &str,
    axioms: &[Axiom],
    domain: &Interval,
    n: usize,
    seed: u64,
) -> Result<AxiomReport> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: 0.0,
            reason: "sample count must be at least 1",
        });
    }
    if !domain.is_bounded() || !domain.is_nonempty() || domain.lo < 0.0 {
        return Err(Error::InvalidInterval {
            lo: domain.lo,
            hi: domain.hi,
        });
    }

    let mut sampler = Sampler::new(seed);
    let random: Vec<[Point; 4]> = sampler.tuples::<4>(domain, n);
    let corners = corner_tuples(domain, &mut sampler);

    let results = axioms
        .iter()
        .map(|&axiom| {
            let mut checks = 0;
            let mut violations = 0;
            let mut witnesses = Vec::new();
            for pts in corners.iter().chain(random.iter()) {
                let Some(c) = evaluate(axiom, subject, pts) else {
                    continue;
                };
                checks += 1;
                if c.violated() {
                    violations += 1;
                    if witnesses.len() < MAX_WITNESSES {
                        witnesses.push(Witness {
                            points: pts[..axiom.arity()].to_vec(),
                            lhs: c.lhs,
                            rhs: c.rhs,
                            relation: c.relation,
                        });
                    }
                }
            }
            AxiomResult {
                axiom,
                status: if violations == 0 { Status::Pass } else { Status::Fail },
                checks,
                violations,
                witnesses,
            }
        })
        .collect::<Vec<_>>();

    Ok(AxiomReport {
        suite,
        metric: metric.to_string(),
        domain: *domain,
        sample_count: random.len(),
        corner_count: corners.len(),
        seed,
        passed: results.iter().all(|r| r.status == Status::Pass),
        results,
    })
}

// Every 4-tuple over {closed endpoints} + {entries of one random triple}.
fn corner_tuples(domain: &Interval, sampler: &mut Sampler) -> Vec<[Point; 4]> {
    let mut base = endpoints(domain);
    for _ in 0..3 {
        if let Some(p) = sampler.uniform(domain) {
            base.push(p);
        }
    }
    let k = base.len();
    let mut out = Vec::with_capacity(k.pow(4));
    for a in 0..k {
        for b in 0..k {
            for c in 0..k {
                for d in 0..k {
                    out.push([base[a], base[b], base[c], base[d]]);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{gm_from_exp, gm_from_product};

    fn p(x: f64) -> Point {
        Point::new(x).unwrap()
    }

    fn domain() -> Interval {
        Interval::closed(0.0, 10.0).unwrap()
    }

    #[test]
    fn exp_abs_is_a_multiplicative_metric() {
        let d = MultMetric::exp_of("e^|x-y|", |x, y| (x - y).abs());
        let r = check_mult_axioms(&d, &domain(), 1000, 7).unwrap();
        assert!(r.passed, "{:?}", r.failed_axioms());
        assert_eq!(r.sample_count, 1000);
        assert!(r.results.iter().all(|a| a.witnesses.is_empty()));
    }

    #[test]
    fn signed_exponent_breaks_floor_and_symmetry() {
        let d = MultMetric::new("e^(x-y)", |x, y| x - y);
        let r = check_mult_axioms(&d, &domain(), 1000, 7).unwrap();
        let failed = r.failed_axioms();
        assert!(failed.contains(&Axiom::Zeta1));
        assert!(failed.contains(&Axiom::Zeta3));
        assert!(!failed.contains(&Axiom::Zeta2));
        assert!(!failed.contains(&Axiom::Zeta4));
        assert!(r.recheck(Subject::Mult(&d)));
    }

    #[test]
    fn constant_one_cannot_separate_points() {
        let d = MultMetric::new("1", |_, _| 0.0);
        let r = check_mult_axioms(&d, &domain(), 100, 1).unwrap();
        assert_eq!(r.failed_axioms(), vec![Axiom::Zeta2]);
        let w = &r.result(Axiom::Zeta2).unwrap().witnesses[0];
        assert_ne!(w.points[0], w.points[1]);
    }

    #[test]
    fn exp_usual_is_a_g_metric() {
        let g = gm_from_exp("usual", |x, y| (x - y).abs());
        let r = check_gm_axioms(&g, &domain(), 1000, 3).unwrap();
        assert!(r.passed, "{:?}", r.failed_axioms());
        let r = check_derived_properties(&g, &domain(), 1000, 3).unwrap();
        assert!(r.passed, "{:?}", r.failed_axioms());
    }

    #[test]
    fn ignoring_third_argument_breaks_g2() {
        let g = GMetric::new("|x-y|", |x, y, _| (x - y).abs());
        let r = check_gm_axioms(&g, &domain(), 1000, 3).unwrap();
        assert_eq!(r.result(Axiom::G2).unwrap().status, Status::Fail);
        let w = &r.result(Axiom::G2).unwrap().witnesses[0];
        assert_ne!(w.points[0], w.points[1]);
        assert_eq!(g.log(w.points[0], w.points[0], w.points[1]), 0.0);
        assert!(r.recheck(Subject::G(&g)));
    }

    #[test]
    fn zero_metric_breaks_g2() {
        let g = GMetric::new("0", |_, _, _| 0.0);
        let r = check_gm_axioms(&g, &domain(), 50, 3).unwrap();
        assert_eq!(r.failed_axioms(), vec![Axiom::G2]);
    }

    #[test]
    fn derived_asymmetry_bound_at_unit_pair() {
        let g = gm_from_exp("usual", |x, y| (x - y).abs());
        let c = evaluate(Axiom::Derived4, Subject::G(&g), &[p(0.0), p(1.0)]).unwrap();
        assert_eq!((c.lhs, c.rhs), (2.0, 4.0));
        assert!(!c.violated());
    }

    #[test]
    fn diagonal_holds_with_equality() {
        let d = MultMetric::exp_of("e^|x-y|", |x, y| (x - y).abs());
        let g = gm_from_product(&d);
        for ax in DERIVED_PROPERTIES {
            let c = evaluate(ax, Subject::G(&g), &[p(2.5); 4]).unwrap();
            assert_eq!((c.lhs, c.rhs), (0.0, 0.0));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = GMetric::new("0", |_, _, _| 0.0);
        assert!(check_gm_axioms(&g, &domain(), 0, 0).is_err());
        assert!(check_gm_axioms(&g, &Interval::nonnegative(), 10, 0).is_err());
    }
}
