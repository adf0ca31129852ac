//! Small quadrature and polynomial helpers shared by the modules.

/// Dense polynomial with coefficients in ascending order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut c = coeffs;
        while c.last() == Some(&0.0) {
            c.pop();
        }
        Poly(c)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * u + c)
    }

    /// Value and the first three derivatives at `u`.
    pub fn eval_derivs(&self, u: f64) -> [f64; 4] {
        let mut d = [0.0; 4];
        for &c in self.0.iter().rev() {
            d[3] = d[3] * u + 3.0 * d[2];
            d[2] = d[2] * u + 2.0 * d[1];
            d[1] = d[1] * u + d[0];
            d[0] = d[0] * u + c;
        }
        d
    }
}

/// Adaptive Simpson integration to a relative tolerance.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    // seed with a composite rule so narrow peaks cannot be missed
    const SEED: usize = 64;
    let h = (b - a) / SEED as f64;
    let coarse: f64 = (0..SEED)
        .map(|i| {
            let (l, r) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            simpson(f, l, r)
        })
        .sum();
    let abs_tol = (rel_tol * coarse.abs()).max(f64::MIN_POSITIVE);
    (0..SEED)
        .map(|i| {
            let (l, r) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let m = 0.5 * (l + r);
            let (fl, fm, fr) = (f(l), f(m), f(r));
            let whole = (r - l) / 6.0 * (fl + 4.0 * fm + fr);
            simpson_rec(f, l, r, fl, fm, fr, whole, abs_tol / SEED as f64, 40)
        })
        .sum()
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Trapezoidal rule over uniformly spaced samples.
pub fn trapezoid(values: impl ExactSizeIterator<Item = f64>, step: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mut sum = 0.0;
    for (i, v) in values.enumerate() {
        sum += if i == 0 || i == n - 1 { 0.5 * v } else { v };
    }
    sum * step
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_derivatives_match_hand_values() {
        // 1 + 2u + 3u^2 + 4u^3 at u = 2
        let p = Poly::new(vec![1.0, 2.0, 3.0, 4.0]);
        let d = p.eval_derivs(2.0);
        assert_eq!(d[0], 49.0);
        assert_eq!(d[1], 2.0 + 12.0 + 48.0);
        assert_eq!(d[2], 6.0 + 48.0);
        assert_eq!(d[3], 24.0);
    }

    #[test]
    fn trailing_zeros_are_trimmed() {
        assert!(Poly::new(vec![0.0, 0.0]).is_zero());
        assert_eq!(Poly::new(vec![1.0, 0.0, 2.0, 0.0]).degree(), 2);
    }

    #[test]
    fn simpson_gaussian_integral() {
        let v = adaptive_simpson(&|x: f64| (-x * x).exp(), -12.0, 12.0, 1e-13);
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }
}
