//! Analytic wave packets `R(x) e^{iS(x)/ħ}` built from a Gaussian envelope,
//! a polynomial amplitude modulation and a polynomial phase.
//!
//! Both polynomials are expressed in the scaled coordinate `u = (x - x0) / δ`.
//! The amplitude is `R(x) = C G(x) [1 + P(u)]` and the phase is
//! `S(x) = p0 x + ħ θ(u)`, so `θ` is dimensionless.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{adaptive_simpson, Poly};

/// Highest polynomial degree accepted for either modulation polynomial.
pub const MAX_POLY_DEGREE: usize = 16;

/// `R < NODE_THRESHOLD * max R` marks a node.
pub const NODE_THRESHOLD: f64 = 1e-12;

/// Norm leakage above which a sampled grid is flagged as truncated.
pub const LEAKAGE_WARNING: f64 = 1e-8;

/// Half-width, in units of δ, of the normalization window.
const NORM_HALF_WIDTH: f64 = 12.0;

/// Physical constants. All strictly positive; the defaults are unit values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysConfig {
    pub hbar: f64,
    pub mass: f64,
    pub omega: f64,
}

impl Default for PhysConfig {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0, omega: 1.0 }
    }
}

impl PhysConfig {
    pub fn new(hbar: f64, mass: f64, omega: f64) -> Result<Self> {
        let cfg = Self { hbar, mass, omega };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("hbar", self.hbar), ("mass", self.mass), ("omega", self.omega)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Oscillator length `sqrt(ħ / mω)`.
    pub fn oscillator_length(&self) -> f64 {
        (self.hbar / (self.mass * self.omega)).sqrt()
    }
}

/// Amplitude, its first two derivatives and the phase gradient at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarData {
    pub r: f64,
    pub dr: f64,
    pub d2r: f64,
    /// `dS/dx`, in momentum units.
    pub ds: f64,
    /// False where the amplitude falls below the node threshold.
    pub valid: bool,
}

impl PolarData {
    pub fn masked() -> Self {
        Self { r: 0.0, dr: 0.0, d2r: 0.0, ds: f64::NAN, valid: false }
    }

    /// `R''/R`, or NaN at a node.
    pub fn curvature(&self) -> f64 {
        if self.valid {
            self.d2r / self.r
        } else {
            f64::NAN
        }
    }
}

/// Closed-form wave packet: Gaussian envelope × `(1 + P(u))` × `exp(i S / ħ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticPacket {
    x0: f64,
    p0: f64,
    delta: f64,
    amp_poly: Poly,
    phase_poly: Poly,
    norm: f64,
    r_max: f64,
}

/// Normalized Gaussian packet centered at `(x0, p0)` with width `delta`.
pub fn make_gaussian(x0: f64, p0: f64, delta: f64) -> Result<AnalyticPacket> {
    AnalyticPacket::new(x0, p0, delta, Vec::new(), Vec::new())
}

impl AnalyticPacket {
    /// Builds a packet, checking `delta > 0`, the degree cap and `1 + P >= 0`.
    /// `amp_poly` and `phase_poly` hold ascending coefficients in `u`.
    pub fn new(
        x0: f64,
        p0: f64,
        delta: f64,
        amp_poly: Vec<f64>,
        phase_poly: Vec<f64>,
    ) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidPacket(format!("delta must be positive, got {delta}")));
        }
        if !(x0.is_finite() && p0.is_finite()) {
            return Err(Error::InvalidPacket("packet center must be finite".into()));
        }
        if amp_poly.iter().chain(&phase_poly).any(|c| !c.is_finite()) {
            return Err(Error::InvalidPacket("polynomial coefficients must be finite".into()));
        }
        let amp_poly = Poly::new(amp_poly);
        let phase_poly = Poly::new(phase_poly);
        for (name, p) in [("amplitude", &amp_poly), ("phase", &phase_poly)] {
            if p.degree() > MAX_POLY_DEGREE {
                return Err(Error::InvalidPacket(format!(
                    "{name} polynomial degree {} exceeds {MAX_POLY_DEGREE}",
                    p.degree()
                )));
            }
        }
        check_nonnegative_modulation(&amp_poly)?;

        let mut packet = Self { x0, p0, delta, amp_poly, phase_poly, norm: 1.0, r_max: 0.0 };
        if !packet.amp_poly.is_zero() {
            let (a, b) = packet.norm_window();
            let mass = adaptive_simpson(&|x| packet.raw_amplitude(x).powi(2), a, b, 1e-12);
            if !(mass.is_finite() && mass > 0.0) {
                return Err(Error::InvalidPacket("amplitude has zero norm".into()));
            }
            packet.norm = mass.sqrt().recip();
        }
        packet.r_max = packet.scan_max_amplitude();
        Ok(packet)
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn amp_poly(&self) -> &[f64] {
        &self.amp_poly.0
    }

    pub fn phase_poly(&self) -> &[f64] {
        &self.phase_poly.0
    }

    pub fn is_gaussian_envelope(&self) -> bool {
        self.amp_poly.is_zero()
    }

    /// Largest amplitude found on a dense scan of the normalization window.
    pub fn max_amplitude(&self) -> f64 {
        self.r_max
    }

    pub fn scaled(&self, x: f64) -> f64 {
        (x - self.x0) / self.delta
    }

    fn norm_window(&self) -> (f64, f64) {
        (
            self.x0 - NORM_HALF_WIDTH * self.delta,
            self.x0 + NORM_HALF_WIDTH * self.delta,
        )
    }

    fn envelope(&self, u: f64) -> f64 {
        (-0.5 * u * u).exp() / (PI.sqrt() * self.delta).sqrt()
    }

    fn raw_amplitude(&self, x: f64) -> f64 {
        let u = self.scaled(x);
        self.envelope(u) * (1.0 + self.amp_poly.eval(u))
    }

    fn scan_max_amplitude(&self) -> f64 {
        let (a, b) = self.norm_window();
        let n = 4801;
        let h = (b - a) / (n - 1) as f64;
        (0..n)
            .map(|i| self.amplitude(a + i as f64 * h))
            .fold(0.0, f64::max)
    }

    pub fn amplitude(&self, x: f64) -> f64 {
        self.norm * self.raw_amplitude(x)
    }

    /// Phase `S(x)` in action units.
    pub fn phase(&self, cfg: &PhysConfig, x: f64) -> f64 {
        self.p0 * x + cfg.hbar * self.phase_poly.eval(self.scaled(x))
    }

    pub fn psi(&self, cfg: &PhysConfig, x: f64) -> Complex64 {
        Complex64::from_polar(self.amplitude(x), self.phase(cfg, x) / cfg.hbar)
    }

    /// Exact `R, R', R'', S'` at `x` from the product rule on `G (1 + P)`.
    pub fn eval_polar(&self, cfg: &PhysConfig, x: f64) -> PolarData {
        let u = self.scaled(x);
        let d = self.delta;
        let [q, dq, d2q, _] = self.amp_poly.eval_derivs(u);
        let q = 1.0 + q;
        let g = self.norm * self.envelope(u);
        let r = g * q;
        let dr = g * (dq - u * q) / d;
        let d2r = g * ((u * u - 1.0) * q - 2.0 * u * dq + d2q) / (d * d);
        let dtheta = self.phase_poly.eval_derivs(u)[1];
        let ds = self.p0 + cfg.hbar / d * dtheta;
        let valid = r >= NODE_THRESHOLD * self.r_max && r > 0.0;
        PolarData { r, dr, d2r, ds, valid }
    }

    /// `S''(x)`.
    pub fn phase_curvature(&self, cfg: &PhysConfig, x: f64) -> f64 {
        let u = self.scaled(x);
        cfg.hbar / (self.delta * self.delta) * self.phase_poly.eval_derivs(u)[2]
    }

    /// Samples `ψ` on a uniform grid and renormalizes on that grid.
    pub fn sample(
        &self,
        cfg: &PhysConfig,
        x_min: f64,
        dx: f64,
        n: usize,
        with_derivatives: bool,
    ) -> Result<SampledWavefunction> {
        check_grid(x_min, dx, n)?;
        let hbar = cfg.hbar;
        let mut psi = Vec::with_capacity(n);
        let mut dpsi = Vec::with_capacity(if with_derivatives { n } else { 0 });
        let mut d2psi = Vec::with_capacity(if with_derivatives { n } else { 0 });
        for k in 0..n {
            let x = x_min + k as f64 * dx;
            let carrier = Complex64::from_polar(1.0, self.phase(cfg, x) / hbar);
            let pd = self.eval_polar(cfg, x);
            psi.push(carrier * pd.r);
            if with_derivatives {
                let k1 = pd.ds / hbar;
                let k2 = self.phase_curvature(cfg, x) / hbar;
                dpsi.push(carrier * Complex64::new(pd.dr, pd.r * k1));
                d2psi.push(
                    carrier
                        * Complex64::new(pd.d2r - pd.r * k1 * k1, 2.0 * pd.dr * k1 + pd.r * k2),
                );
            }
        }

        let x_max = x_min + (n - 1) as f64 * dx;
        let inside = adaptive_simpson(&|x| self.amplitude(x).powi(2), x_min, x_max, 1e-12);
        let truncated = 1.0 - inside > LEAKAGE_WARNING;

        let mut wf = SampledWavefunction {
            x_min,
            dx,
            psi,
            dpsi: with_derivatives.then_some(dpsi),
            d2psi: with_derivatives.then_some(d2psi),
            truncated,
        };
        wf.normalize();
        Ok(wf)
    }
}

fn check_nonnegative_modulation(p: &Poly) -> Result<()> {
    if p.is_zero() {
        return Ok(());
    }
    let lead = *p.0.last().unwrap();
    if p.degree() % 2 == 1 || lead < 0.0 {
        return Err(Error::InvalidPacket(
            "1 + P(u) must stay non-negative: leading term has odd degree or negative sign".into(),
        ));
    }
    let n = 16001;
    let (a, b) = (-40.0, 40.0);
    let h = (b - a) / (n - 1) as f64;
    for i in 0..n {
        let u = a + i as f64 * h;
        let v = 1.0 + p.eval(u);
        // scale-aware slack for double roots touching zero
        let scale = 1.0 + p.0.iter().enumerate().map(|(k, c)| (c * u.powi(k as i32)).abs()).sum::<f64>();
        if v < -1e-12 * scale {
            return Err(Error::InvalidPacket(format!(
                "1 + P(u) is negative ({v:.3e}) at u = {u:.4}"
            )));
        }
    }
    Ok(())
}

pub(crate) fn check_grid(x_min: f64, dx: f64, n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidGrid(format!("need at least 2 samples, got {n}")));
    }
    if !(dx.is_finite() && dx > 0.0) || !x_min.is_finite() {
        return Err(Error::InvalidGrid(format!("bad spacing dx = {dx} or origin {x_min}")));
    }
    Ok(())
}

/// Complex amplitudes on a uniform position grid, with optional analytic
/// first and second derivative channels.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWavefunction {
    pub x_min: f64,
    pub dx: f64,
    pub psi: Vec<Complex64>,
    pub dpsi: Option<Vec<Complex64>>,
    pub d2psi: Option<Vec<Complex64>>,
    /// Set when more than 1e-8 of the norm lies outside the grid.
    pub truncated: bool,
}

impl SampledWavefunction {
    pub fn new(x_min: f64, dx: f64, psi: Vec<Complex64>) -> Result<Self> {
        check_grid(x_min, dx, psi.len())?;
        Ok(Self { x_min, dx, psi, dpsi: None, d2psi: None, truncated: false })
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x_min + k as f64 * self.dx
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.len() - 1)
    }

    /// `Σ |ψ_k|² dx`.
    pub fn norm_sqr(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dx
    }

    pub fn normalize(&mut self) {
        let s = self.norm_sqr().sqrt();
        if s > 0.0 {
            let inv = s.recip();
            for ch in [Some(&mut self.psi), self.dpsi.as_mut(), self.d2psi.as_mut()]
                .into_iter()
                .flatten()
            {
                ch.iter_mut().for_each(|z| *z *= inv);
            }
        }
    }

    /// `⟨self|other⟩` on a shared grid.
    pub fn overlap(&self, other: &SampledWavefunction) -> Result<Complex64> {
        if self.len() != other.len()
            || (self.dx - other.dx).abs() > 1e-12 * self.dx
            || (self.x_min - other.x_min).abs() > 1e-12 * self.dx.max(1.0)
        {
            return Err(Error::InvalidGrid("overlap needs identical grids".into()));
        }
        let s: Complex64 = self.psi.iter().zip(&other.psi).map(|(a, b)| a.conj() * b).sum();
        Ok(s * self.dx)
    }

    /// `|⟨self|other⟩|` for normalized states.
    pub fn fidelity(&self, other: &SampledWavefunction) -> Result<f64> {
        Ok(self.overlap(other)?.norm())
    }
}
