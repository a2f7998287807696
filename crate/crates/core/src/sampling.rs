//! Seeded, stratified sampling of point tuples from an interval.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::metric::{Interval, Point};

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// One uniform draw from `interval` (which must be bounded and nonempty).
    pub fn uniform(&mut self, interval: &Interval) -> Option<Point> {
        for _ in 0..64 {
            let u: f64 = self.rng.gen();
            let x = interval.lo + u * interval.width();
            if interval.contains(x) {
                return Point::new(x).ok();
            }
        }
        None
    }

    /// `n` stratified draws: the i-th lands in the i-th of `n` equal
    /// sub-intervals. Draws that fall outside `interval` (open ends) are
    /// retried a few times and then skipped.
    pub fn stratified(&mut self, interval: &Interval, n: usize) -> Vec<Point> {
        let mut out = Vec::with_capacity(n);
        if n == 0 || !interval.is_bounded() {
            return out;
        }
        let width = interval.width();
        for i in 0..n {
            for _ in 0..8 {
                let u: f64 = self.rng.gen();
                let x = interval.lo + (i as f64 + u) / n as f64 * width;
                if interval.contains(x) {
                    if let Ok(p) = Point::new(x) {
                        out.push(p);
                    }
                    break;
                }
            }
        }
        out
    }

    /// `n` tuples in Latin-hypercube layout: every coordinate is stratified
    /// and the strata are shuffled independently per coordinate.
    pub fn tuples<const K: usize>(&mut self, interval: &Interval, n: usize) -> Vec<[Point; K]> {
        let mut columns: Vec<Vec<Point>> = (0..K).map(|_| self.stratified(interval, n)).collect();
        for col in &mut columns {
            col.shuffle(&mut self.rng);
        }
        let len = columns.iter().map(Vec::len).min().unwrap_or(0);
        (0..len).map(|i| std::array::from_fn(|k| columns[k][i])).collect()
    }

    /// Filters candidate draws through `keep`, drawing up to `n` kept tuples.
    pub fn tuples_where<const K: usize>(
        &mut self,
        interval: &Interval,
        n: usize,
        keep: impl Fn(Point) -> bool,
    ) -> Vec<[Point; K]> {
        let mut columns: Vec<Vec<Point>> = (0..K)
            .map(|_| self.stratified(interval, n).into_iter().filter(|p| keep(*p)).collect())
            .collect();
        let len = columns.iter().map(Vec::len).min().unwrap_or(0);
        for col in &mut columns {
            col.truncate(len);
            col.shuffle(&mut self.rng);
        }
        (0..len).map(|i| std::array::from_fn(|k| columns[k][i])).collect()
    }
}

/// Closed endpoints of the interval; the deterministic corner points for a sweep.
pub fn endpoints(interval: &Interval) -> Vec<Point> {
    let mut out = Vec::new();
    if interval.lo_closed {
        out.extend(Point::new(interval.lo).ok());
    }
    if interval.hi_closed && interval.hi != interval.lo {
        out.extend(Point::new(interval.hi).ok());
    }
    out
}

/// All 6 orderings of a triple.
pub fn permutations(t: [Point; 3]) -> [[Point; 3]; 6] {
    let [a, b, c] = t;
    [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_draws() {
        let i = Interval::closed(0.0, 10.0).unwrap();
        let a = Sampler::new(7).tuples::<3>(&i, 100);
        let b = Sampler::new(7).tuples::<3>(&i, 100);
        assert_eq!(a, b);
        let c = Sampler::new(8).tuples::<3>(&i, 100);
        assert_ne!(a, c);
    }

    #[test]
    fn stratified_covers_each_stratum_once() {
        let i = Interval::closed(0.0, 1.0).unwrap();
        let pts = Sampler::new(1).stratified(&i, 50);
        assert_eq!(pts.len(), 50);
        for (k, p) in pts.iter().enumerate() {
            let cell = (p.value() * 50.0).floor() as usize;
            assert_eq!(cell.min(49), k);
        }
    }

    #[test]
    fn open_ends_are_respected() {
        let i = Interval::open(0.0, 0.5).unwrap();
        for t in Sampler::new(3).tuples::<3>(&i, 1000) {
            assert!(t.iter().all(|p| i.contains(p.value())));
        }
        assert!(endpoints(&i).is_empty());
        assert_eq!(endpoints(&Interval::closed(1.0, 2.0).unwrap()).len(), 2);
    }
}
