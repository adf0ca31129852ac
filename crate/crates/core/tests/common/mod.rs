//! Test-only oracles shared by the integration suites.
#![allow(dead_code)]

use num_complex::Complex64;
use pskit::quartic::FockState;
use pskit::PhysConfig;

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

/// Unevaluated sum `hi + lo` with |lo| <= ulp(hi)/2.
#[derive(Debug, Clone, Copy)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub fn new(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = two_sum(s, e);
        Dd { hi, lo }
    }

    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn mul_f(self, f: f64) -> Dd {
        self.mul(Dd::new(f))
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// `ψ(x)` for a Fock state, with the Hermite polynomial sum carried in
/// double-double so that tail values keep full relative precision.
///
/// Independent of the library path: uses `φ_n = h_n(x̃) φ_0(x̃)` with the
/// polynomial parts `h_n` from their own recurrence.
pub fn psi_dd(state: &FockState, cfg: &PhysConfig, x: f64) -> Complex64 {
    let k = (cfg.mass * cfg.omega / cfg.hbar).sqrt();
    let xs = Dd::new(k).mul(Dd::new(x));
    let mut re = Dd::new(0.0);
    let mut im = Dd::new(0.0);
    let mut prev = Dd::new(0.0);
    let mut cur = Dd::new(1.0);
    for (n, c) in state.coeffs.iter().enumerate() {
        re = re.add(cur.mul_f(c.re));
        im = im.add(cur.mul_f(c.im));
        let nf = n as f64;
        let a = (2.0 / (nf + 1.0)).sqrt();
        let b = (nf / (nf + 1.0)).sqrt();
        let next = xs.mul(cur).mul_f(a).sub(prev.mul_f(b));
        prev = cur;
        cur = next;
    }
    let x2 = xs.to_f64();
    let envelope = std::f64::consts::PI.powf(-0.25) * (-0.5 * x2 * x2).exp() * k.sqrt();
    Complex64::new(re.to_f64(), im.to_f64()) * envelope
}
