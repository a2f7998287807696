use gm_fixpoint::contraction::{
    certify_region, implicit_contraction_holds, root_contraction_holds, seed_condition_holds, Condition,
    ContractionParams, Region,
};
use gm_fixpoint::corpus::{exp_abs_metric, exp_usual, half_shift_map, lookup, quarter_shift_map};
use gm_fixpoint::metric::{ball_contains, gm_from_product, ClosedBall, Interval, Point};
use gm_fixpoint::picard::{picard_trace, OrderRelation};
use gm_fixpoint::sampling::permutations;
use proptest::prelude::*;

fn point(hi: f64) -> impl Strategy<Value = Point> {
    (0.0..hi).prop_map(|v| Point::new(v).unwrap())
}

proptest! {
    #[test]
    fn g_is_permutation_invariant_bitwise(x in point(10.0), y in point(10.0), z in point(10.0)) {
        for g in [exp_usual(), gm_from_product(&exp_abs_metric())] {
            let base = g.log(x, y, z).to_bits();
            for [a, b, c] in permutations([x, y, z]) {
                prop_assert_eq!(g.log(a, b, c).to_bits(), base);
            }
            prop_assert!(g.log(x, y, z) >= 0.0);
            prop_assert!(g.value(x, y, z) >= 1.0);
        }
    }

    #[test]
    fn root_contraction_implies_implicit(
        x in point(6.0), y in point(6.0), z in point(6.0), eta in 0.0..0.99f64, m in 1u32..4,
    ) {
        let g = exp_usual();
        for f in [quarter_shift_map(), half_shift_map()] {
            if root_contraction_holds(&g, &f, eta, m, x, y, z).unwrap() {
                prop_assert!(implicit_contraction_holds(&g, &f, eta, m, x, y, z).unwrap());
            }
        }
    }

    #[test]
    fn seed_condition_is_monotone_in_gamma(
        x0 in point(6.0), eta in 0.0..0.99f64, gamma in 0.01..20.0f64, bump in 0.0..10.0f64,
    ) {
        let g = exp_usual();
        for f in [quarter_shift_map(), half_shift_map()] {
            let small = ContractionParams::new(eta, 1, gamma, x0).unwrap();
            let large = ContractionParams::new(eta, 1, gamma + bump, x0).unwrap();
            if seed_condition_holds(&g, &f, &small).unwrap() {
                prop_assert!(seed_condition_holds(&g, &f, &large).unwrap());
            }
        }
    }

    #[test]
    fn ball_contains_center_iff_radius_at_least_one(c in point(10.0), gamma in 0.01..5.0f64) {
        let ball = ClosedBall::new(c, gamma).unwrap();
        prop_assert_eq!(ball_contains(&exp_usual(), &ball, c), gamma >= 1.0);
    }

    #[test]
    fn corpus_orbits_descend(x0 in point(6.0)) {
        let g = exp_usual();
        let ball = ClosedBall::new(x0, 5.5).unwrap();
        for f in [quarter_shift_map(), half_shift_map()] {
            let t = picard_trace(&f, x0, 60, &g, &ball, &OrderRelation::numeric()).unwrap();
            prop_assert!(t.monotone);
            prop_assert!(t.iterates.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn certificate_witnesses_recheck(lo in 0.0..5.0f64, width in 0.01..3.0f64, seed in any::<u64>()) {
        let fx = lookup("ex37").unwrap();
        let map = fx.map.as_ref().unwrap();
        let region = Region::Interval(Interval::closed(lo, lo + width).unwrap());
        for cond in [Condition::Root, Condition::Implicit] {
            let r = certify_region(&fx.g, map, &fx.params.unwrap(), cond, region, 200, seed).unwrap();
            prop_assert!(r.recheck(&fx.g, map));
            prop_assert_eq!(r.holds(), r.violation_count == 0);
            prop_assert!(r.witnesses.len() <= r.violation_count);
        }
    }

    #[test]
    fn numeric_order_is_reflexive_and_transitive(a in point(10.0), b in point(10.0), c in point(10.0)) {
        let o = OrderRelation::numeric();
        prop_assert!(o.leq(a, a));
        if o.leq(a, b) && o.leq(b, c) {
            prop_assert!(o.leq(a, c));
        }
        prop_assert!(o.comparable(a, b));
    }
}

#[test]
fn corpus_maps_are_total_with_unique_fixed_point_zero() {
    let g = exp_usual();
    for f in [quarter_shift_map(), half_shift_map()] {
        let mut fixed = Vec::new();
        for i in 0..=10_000 {
            let x = Point::new(6.0 * i as f64 / 10_000.0).unwrap();
            let fx = f
                .eval(x)
                .unwrap_or_else(|e| panic!("{} undefined at {x}: {e}", f.description()));
            if g.log(x, fx, fx) == 0.0 {
                fixed.push(x);
            }
        }
        assert_eq!(fixed, vec![Point::ZERO], "{}", f.description());
    }
}
