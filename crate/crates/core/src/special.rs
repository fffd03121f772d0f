//! Cancellation-free elementary functions shared by the closed forms.
//!
//! Every helper here is continuous through its small-argument branch so
//! that degenerate parameters (zero mean reversion, zero risk aversion)
//! reduce to their analytic limits instead of `0/0`.

/// `(1 - e^{-z}) / z`, equal to 1 at `z = 0`.
pub fn decay_average(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 - 0.5 * z
    } else {
        -(-z).exp_m1() / z
    }
}

/// `∫_0^t e^{-gamma s} ds`.
pub fn exp_integral(gamma: f64, t: f64) -> f64 {
    t * decay_average(gamma * t)
}

/// `∫_0^t ∫_0^u e^{-gamma s} ds du = (t - exp_integral(gamma, t)) / gamma`.
pub fn exp_double_integral(gamma: f64, t: f64) -> f64 {
    let z = gamma * t;
    let ratio = if z.abs() < 1.0 {
        // (z - 1 + e^{-z}) / z^2 = sum_{n>=2} (-z)^{n-2} / n!
        let mut term = 0.5;
        let mut sum = 0.0;
        for n in 2..40 {
            sum += term;
            term *= -z / (n as f64 + 1.0);
            if term.abs() < 1e-18 {
                break;
            }
        }
        sum
    } else {
        (z + (-z).exp_m1()) / (z * z)
    };
    t * t * ratio
}

/// `sinh(z) / z`.
pub fn sinhc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 + z * z / 6.0
    } else {
        z.sinh() / z
    }
}

/// `tanh(z) / z`.
pub fn tanhc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 - z * z / 3.0
    } else {
        z.tanh() / z
    }
}

/// `z coth(z)`, equal to 1 at `z = 0`.
pub fn zcoth(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 + z * z / 3.0
    } else {
        z / z.tanh()
    }
}

/// `sinh(beta * a) / sinh(beta * b)` for `0 <= a <= b`, `b > 0`, stable as `beta -> 0`.
pub fn sinh_ratio(beta: f64, a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    (a * sinhc(beta * a)) / (b * sinhc(beta * b))
}

/// Pairwise summation; deterministic for a given slice order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 16 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}
