//! One-dimensional maximization used to locate optimal damping rates.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Grid scan over `[lo, hi]` with `points` samples, refined by golden
/// section around the best sample.
pub fn argmax(f: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> (f64, f64) {
    assert!(points >= 3 && hi > lo);
    let step = (hi - lo) / (points - 1) as f64;
    let best = (0..points)
        .map(|k| (k, f(lo + k as f64 * step)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty grid")
        .0;
    let a = lo + best.saturating_sub(1) as f64 * step;
    let b = lo + (best + 1).min(points - 1) as f64 * step;
    golden_section_max(f, a, b, 1e-12)
}
