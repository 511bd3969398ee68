use super::Loss;

/// `ℓ(m) = log(1 + e^{−m})`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Logistic;

/// Numerically stable logistic sigmoid.
#[inline]
pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

impl Loss for Logistic {
    #[inline]
    fn value(&self, m: f64) -> f64 {
        if m < -30.0 {
            -m + m.exp().ln_1p()
        } else {
            (-m).exp().ln_1p()
        }
    }

    #[inline]
    fn derivative(&self, m: f64) -> f64 {
        -sigmoid(-m)
    }

    #[inline]
    fn curvature(&self, m: f64) -> f64 {
        let e = (-m.abs()).exp();
        e / ((1.0 + e) * (1.0 + e))
    }

    /// `softplus(a) − softplus(b) = log1p(σ(b)·expm1(a − b))` with
    /// `a = −m`, `b = −m − δ`.
    #[inline]
    fn decrease(&self, m: f64, delta: f64) -> f64 {
        if delta.abs() > 30.0 {
            return self.value(m) - self.value(m + delta);
        }
        (sigmoid(-m - delta) * delta.exp_m1()).ln_1p()
    }
}
