use crate::error::{Error, Result};

/// Cap on the number of live subintervals in one integration.
pub const MAX_INTERVALS: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadTolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for QuadTolerance {
    fn default() -> Self {
        QuadTolerance { abs: 1e-10, rel: 1e-9 }
    }
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// `∫_a^b f` to absolute tolerance `tol`.
pub fn quadrature<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::param("tol", format!("must be > 0, got {tol}")));
    }
    integrate(f, a, b, QuadTolerance { abs: tol, rel: 0.0 })
}

/// Adaptive Simpson with Richardson correction.
///
/// A panel is accepted once `|S(left) + S(right) - S(whole)| <= 15 eps`,
/// where `eps` is halved at each split from
/// `max(abs, rel * |coarse estimate|)`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: QuadTolerance) -> Result<f64> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::param("a", format!("integration bounds must be finite, got [{a}, {b}]")));
    }
    if a > b {
        return Err(Error::param("a", format!("lower bound {a} exceeds upper bound {b}")));
    }
    if a == b {
        return Ok(0.0);
    }

    const INITIAL: usize = 4;
    let h = (b - a) / INITIAL as f64;
    let mut stack = Vec::with_capacity(64);
    let mut coarse = 0.0;
    let mut fa = f(a);
    for k in 0..INITIAL {
        let pa = a + k as f64 * h;
        let pb = if k + 1 == INITIAL { b } else { a + (k + 1) as f64 * h };
        let fm = f(0.5 * (pa + pb));
        let fb = f(pb);
        let whole = simpson(pa, pb, fa, fm, fb);
        coarse += whole;
        stack.push(Panel { a: pa, b: pb, fa, fm, fb, whole, eps: 0.0, depth: 0 });
        fa = fb;
    }
    let total_eps = tol.abs.max(tol.rel * coarse.abs());
    for p in stack.iter_mut() {
        p.eps = total_eps / INITIAL as f64;
    }

    let mut sum = 0.0;
    let mut accepted = 0usize;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let flm = f(0.5 * (p.a + m));
        let frm = f(0.5 * (m + p.b));
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let delta = left + right - p.whole;
        if !delta.is_finite() {
            return Err(Error::QuadratureDiverged { a, b, intervals: accepted + stack.len() });
        }
        if (p.depth >= 2 && delta.abs() <= 15.0 * p.eps) || m <= p.a || m >= p.b {
            sum += left + right + delta / 15.0;
            accepted += 1;
            continue;
        }
        if accepted + stack.len() + 2 > MAX_INTERVALS {
            return Err(Error::QuadratureDiverged { a, b, intervals: MAX_INTERVALS });
        }
        let eps = 0.5 * p.eps;
        let depth = p.depth + 1;
        stack.push(Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right, eps, depth });
        stack.push(Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left, eps, depth });
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_transcendental() {
        let v = quadrature(|t| t * t, 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
        let v = integrate(f64::exp, 0.0, 2.0, QuadTolerance::default()).unwrap();
        assert!((v - (2f64.exp() - 1.0)).abs() < 1e-9);
        let v = integrate(|t| (10.0 * t).sin(), 0.0, std::f64::consts::PI, QuadTolerance::default()).unwrap();
        assert!(v.abs() < 1e-9);
    }

    #[test]
    fn degenerate_and_invalid_bounds() {
        assert_eq!(quadrature(|t| t, 1.0, 1.0, 1e-9).unwrap(), 0.0);
        assert!(quadrature(|t| t, 2.0, 1.0, 1e-9).is_err());
        assert!(quadrature(|t| t, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn singular_integrand_hits_cap() {
        let r = integrate(|t: f64| 1.0 / t.abs().max(1e-300), 0.0, 1.0, QuadTolerance { abs: 1e-14, rel: 0.0 });
        assert!(matches!(r, Err(Error::QuadratureDiverged { .. })));
    }
}
