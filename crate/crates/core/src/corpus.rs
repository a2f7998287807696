//! Built-in spaces and maps, plus user fixtures loaded from JSON.
//!
//! Fixture ids (`exp-usual`, `product-exp`, `ex33`, `ex37`) are stable and
//! used by the CLI's `--fixture` flag.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::contraction::{ContractionParams, SelfMap};
use crate::error::{Error, Result};
use crate::json;
use crate::metric::{gm_from_exp, gm_from_product, GMetric, Interval, MultMetric, Point};

/// `|x - y|`
pub fn usual_metric(x: Point, y: Point) -> f64 {
    (x.value() - y.value()).abs()
}

/// `G(x, y, z) = e^{|x-y| + |y-z| + |z-x|}`
pub fn exp_usual() -> GMetric {
    gm_from_exp("|x-y|", |x, y| (x - y).abs())
}

/// `d(x, y) = e^{|x-y|}`
pub fn exp_abs_metric() -> MultMetric {
    MultMetric::exp_of("e^|x-y|", |x, y| (x - y).abs())
}

/// `x / 4` on `[0, 1/3)`, `x - 1/3` on `[1/3, inf)`.
pub fn quarter_shift(x: Point) -> Point {
    Point::new(quarter_shift_raw(x.value())).expect("maps [0, inf) into itself")
}

fn quarter_shift_raw(x: f64) -> f64 {
    if x < 1.0 / 3.0 {
        x / 4.0
    } else {
        x - 1.0 / 3.0
    }
}

pub fn quarter_shift_map() -> SelfMap {
    SelfMap::new(
        "x/4 on [0,1/3), x-1/3 on [1/3,inf)",
        Interval::nonnegative(),
        quarter_shift_raw,
    )
}

/// `x / 2` on `(0, 1/2)`, `x - 1/4` on `[1/2, inf)`, and `0 -> 0`.
pub fn half_shift(x: Point) -> Point {
    Point::new(half_shift_raw(x.value())).expect("maps [0, inf) into itself")
}

fn half_shift_raw(x: f64) -> f64 {
    if x < 0.5 {
        // also covers x = 0, the continuous extension of x/2
        x / 2.0
    } else {
        x - 0.25
    }
}

pub fn half_shift_map() -> SelfMap {
    SelfMap::new(
        "x/2 on [0,1/2), x-1/4 on [1/2,inf)",
        Interval::nonnegative(),
        half_shift_raw,
    )
}

/// Behaviour of a piecewise map at its branch boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchAudit {
    pub boundary: f64,
    pub left_limit: f64,
    pub value: f64,
    pub continuous: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    ExpUsual,
    ProductExp,
}

impl SpaceKind {
    pub fn id(self) -> &'static str {
        match self {
            SpaceKind::ExpUsual => "exp-usual",
            SpaceKind::ProductExp => "product-exp",
        }
    }
}

#[derive(Debug, Clone)]
pub struct NamedFixture {
    pub id: String,
    pub kind: SpaceKind,
    pub g: GMetric,
    /// The binary multiplicative metric the G-metric is built from (or the
    /// exponential of the ordinary metric, for `exp-usual`).
    pub mult: MultMetric,
    pub map: Option<SelfMap>,
    pub params: Option<ContractionParams>,
    pub branch: Option<BranchAudit>,
}

fn reference_params() -> ContractionParams {
    let x0 = Point::new(1.0 / 3.0).expect("1/3 is a valid point");
    ContractionParams::new(5.0 / 8.0, 1, 11.0 / 2.0, x0).expect("fixture params are valid")
}

pub fn registry() -> Vec<NamedFixture> {
    let product = exp_abs_metric();
    vec![
        NamedFixture {
            id: "exp-usual".into(),
            kind: SpaceKind::ExpUsual,
            g: exp_usual(),
            mult: exp_abs_metric(),
            map: None,
            params: None,
            branch: None,
        },
        NamedFixture {
            id: "product-exp".into(),
            kind: SpaceKind::ProductExp,
            g: gm_from_product(&product),
            mult: product,
            map: None,
            params: None,
            branch: None,
        },
        NamedFixture {
            id: "ex33".into(),
            kind: SpaceKind::ExpUsual,
            g: exp_usual(),
            mult: exp_abs_metric(),
            map: Some(quarter_shift_map()),
            params: Some(reference_params()),
            branch: Some(BranchAudit {
                boundary: 1.0 / 3.0,
                left_limit: 1.0 / 12.0,
                value: 0.0,
                continuous: false,
            }),
        },
        NamedFixture {
            id: "ex37".into(),
            kind: SpaceKind::ExpUsual,
            g: exp_usual(),
            mult: exp_abs_metric(),
            map: Some(half_shift_map()),
            params: Some(reference_params()),
            branch: Some(BranchAudit {
                boundary: 0.5,
                left_limit: 0.25,
                value: 0.25,
                continuous: true,
            }),
        },
    ]
}

pub fn lookup(id: &str) -> Option<NamedFixture> {
    registry().into_iter().find(|f| f.id == id)
}

/// A printed reference number next to the value this crate computes for it.
#[derive(Debug, Clone, Serialize)]
pub struct ReferenceValue {
    pub quantity: &'static str,
    #[serde(serialize_with = "json::g17")]
    pub computed: f64,
    #[serde(serialize_with = "json::g17")]
    pub printed: f64,
    #[serde(serialize_with = "json::g17")]
    pub abs_diff: f64,
}

/// Seed threshold `(1 - eta) * gamma` and the two seed distances
/// `G(x0, Fx0, Fx0)` of the `ex33` and `ex37` fixtures, against their
/// published 4-5 digit values.
pub fn reference_values() -> Vec<ReferenceValue> {
    let row = |quantity, computed: f64, printed: f64| ReferenceValue {
        quantity,
        computed,
        printed,
        abs_diff: (computed - printed).abs(),
    };
    let seed_distance = |id: &str| {
        let fx = lookup(id).expect("built-in fixture");
        let x0 = fx.params.expect("fixture has params").seed_point;
        let f = fx.map.expect("fixture has a map");
        let fx0 = f.eval(x0).expect("seed lies in the map's domain");
        fx.g.value(x0, fx0, fx0)
    };
    let threshold = reference_params().seed_threshold();
    vec![
        row("(1-eta)*gamma", threshold, 2.0625),
        row("G(x0,Fx0,Fx0) [ex33] = e^(2/3)", seed_distance("ex33"), 1.9477),
        row("G(x0,Fx0,Fx0) [ex37] = e^(1/3)", seed_distance("ex37"), 1.3956),
    ]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct FixtureConfig {
    #[serde(default = "default_id")]
    id: String,
    space: String,
    #[serde(default)]
    base: BaseMetric,
    #[serde(default)]
    map: Option<Vec<MapRow>>,
    #[serde(default)]
    params: Option<ParamsConfig>,
}

fn default_id() -> String {
    "config".to_string()
}

/// `log d(x, y) = abs * |x - y| + signed * (x - y)`. A nonzero `signed`
/// part makes the metric asymmetric.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct BaseMetric {
    #[serde(default = "one")]
    abs: f64,
    #[serde(default)]
    signed: f64,
}

impl Default for BaseMetric {
    fn default() -> Self {
        BaseMetric { abs: 1.0, signed: 0.0 }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapRow {
    lo: f64,
    /// `null` means unbounded above
    hi: Option<f64>,
    #[serde(default = "yes")]
    lo_closed: bool,
    #[serde(default)]
    hi_closed: bool,
    slope: f64,
    offset: f64,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsConfig {
    eta: f64,
    gamma: f64,
    x0: f64,
    #[serde(default = "one_u32")]
    m: u32,
}

fn one_u32() -> u32 {
    1
}

/// Parses a fixture from JSON text.
///
/// ```json
/// {
///   "id": "halving",
///   "space": "exp-usual",
///   "base": { "abs": 1.0, "signed": 0.0 },
///   "map": [
///     { "lo": 0, "hi": 0.5, "slope": 0.5, "offset": 0 },
///     { "lo": 0.5, "hi": null, "slope": 1, "offset": -0.25 }
///   ],
///   "params": { "eta": 0.625, "gamma": 5.5, "x0": 0.3333333333333333 }
/// }
/// ```
pub fn parse_fixture_config(text: &str) -> Result<NamedFixture> {
    let cfg: FixtureConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let BaseMetric { abs, signed } = cfg.base;
    if !abs.is_finite() || !signed.is_finite() {
        return Err(Error::Config("base metric coefficients must be finite".into()));
    }
    let base_desc = if signed == 0.0 {
        format!("{abs}*|x-y|")
    } else {
        format!("{abs}*|x-y| + {signed}*(x-y)")
    };
    let base = move |x: f64, y: f64| abs * (x - y).abs() + signed * (x - y);
    let mult = MultMetric::new(format!("e^({base_desc})"), base);

    let (kind, g) = match cfg.space.as_str() {
        "exp-usual" => (SpaceKind::ExpUsual, gm_from_exp(base_desc, base)),
        "product-exp" => (SpaceKind::ProductExp, gm_from_product(&mult)),
        other => return Err(Error::Config(format!("unknown space kind `{other}`"))),
    };

    let map = cfg.map.map(|rows| piecewise_map(&rows)).transpose()?;
    let params = cfg
        .params
        .map(|p| {
            let x0 = Point::new(p.x0)?;
            ContractionParams::new(p.eta, p.m, p.gamma, x0)
        })
        .transpose()
        .map_err(|e| Error::Config(e.to_string()))?;

    Ok(NamedFixture {
        id: cfg.id,
        kind,
        g,
        mult,
        map,
        params,
        branch: None,
    })
}

pub fn load_fixture_config(path: &Path) -> Result<NamedFixture> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_fixture_config(&text)
}

fn piecewise_map(rows: &[MapRow]) -> Result<SelfMap> {
    if rows.is_empty() {
        return Err(Error::Config("map needs at least one row".into()));
    }
    let mut pieces = Vec::with_capacity(rows.len());
    for r in rows {
        let hi = r.hi.unwrap_or(f64::INFINITY);
        let interval = Interval::new(r.lo, hi, r.lo_closed, r.hi_closed).map_err(|e| Error::Config(e.to_string()))?;
        if r.lo < 0.0 || !r.slope.is_finite() || !r.offset.is_finite() {
            return Err(Error::Config(format!("invalid map row on {interval}")));
        }
        pieces.push((interval, r.slope, r.offset));
    }
    let lo = pieces.iter().map(|p| p.0.lo).fold(f64::INFINITY, f64::min);
    let hi = pieces.iter().map(|p| p.0.hi).fold(f64::NEG_INFINITY, f64::max);
    let lo_closed = pieces.iter().any(|p| p.0.lo == lo && p.0.lo_closed);
    let hi_closed = pieces.iter().any(|p| p.0.hi == hi && p.0.hi_closed);
    let hull = Interval::new(lo, hi, lo_closed, hi_closed)?;
    let desc = pieces
        .iter()
        .map(|(i, s, o)| format!("{s}x{o:+} on {i}"))
        .collect::<Vec<_>>()
        .join(", ");
    Ok(SelfMap::new(desc, hull, move |x| {
        pieces
            .iter()
            .find(|(i, _, _)| i.contains(x))
            .map(|(_, s, o)| s * x + o)
            .unwrap_or(f64::NAN)
    }))
}
