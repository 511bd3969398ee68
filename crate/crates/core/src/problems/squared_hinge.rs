use super::Loss;

/// L2-loss SVM: `ℓ(m) = max(0, 1 − m)²`.
///
/// Once differentiable. [`Loss::curvature`] returns the generalized second
/// derivative with the active set taken as `m < 1` (strict).
#[derive(Clone, Copy, Debug, Default)]
pub struct SquaredHinge;

impl Loss for SquaredHinge {
    #[inline]
    fn value(&self, m: f64) -> f64 {
        let t = (1.0 - m).max(0.0);
        t * t
    }

    #[inline]
    fn derivative(&self, m: f64) -> f64 {
        -2.0 * (1.0 - m).max(0.0)
    }

    #[inline]
    fn curvature(&self, m: f64) -> f64 {
        if m < 1.0 {
            2.0
        } else {
            0.0
        }
    }

    #[inline]
    fn decrease(&self, m: f64, delta: f64) -> f64 {
        let a = (1.0 - m).max(0.0);
        let b = (1.0 - m - delta).max(0.0);
        if a > 0.0 && b > 0.0 {
            // a − b = δ exactly on the active branch
            delta * (a + b)
        } else {
            a * a - b * b
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pieces() {
        let l = SquaredHinge;
        assert_eq!(l.value(0.0), 1.0);
        assert_eq!(l.value(2.0), 0.0);
        assert_eq!(l.derivative(0.0), -2.0);
        assert_eq!(l.derivative(1.0), 0.0);
        assert_eq!(l.curvature(1.0), 0.0);
        assert_eq!(l.curvature(0.999), 2.0);
    }

    #[test]
    fn decrease_matches_direct_difference() {
        let l = SquaredHinge;
        for &m in &[-3.0, 0.0, 0.9, 1.0, 1.5] {
            for &d in &[-2.0, -0.05, 0.0, 0.05, 0.2, 3.0] {
                let direct = l.value(m) - l.value(m + d);
                assert!((l.decrease(m, d) - direct).abs() < 1e-12, "m={m} d={d}");
            }
        }
    }
}
