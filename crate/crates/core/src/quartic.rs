//! Quartic (Kerr) oscillator `H = ħω a†a + ħ²λ (a†)² a²` in a truncated Fock
//! basis, with position-space evaluation through Hermite-function recurrences.
//!
//! Ladder operators follow `[a, a†] = 1`, so a coherent amplitude `α` is
//! centered at scaled phase-space point `(x̃, p̃) = √2 (Re α, Im α)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fermi::PolarEvaluator;
use crate::packets::{check_grid, PhysConfig, PolarData, SampledWavefunction, NODE_THRESHOLD};

/// Allowed Fock-space tail weight.
pub const TRUNCATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticParams {
    pub cfg: PhysConfig,
    /// The product `ħλ` (a frequency).
    pub lambda_hbar: f64,
    pub alpha: Complex64,
    pub n_max: usize,
}

/// `⌈|α|² + 10|α| + 20⌉`.
pub fn default_n_max(alpha: Complex64) -> usize {
    let m = alpha.norm_sqr();
    (m + 10.0 * m.sqrt() + 20.0).ceil() as usize
}

impl QuarticParams {
    pub fn new(cfg: PhysConfig, lambda_hbar: f64, alpha: Complex64, n_max: Option<usize>) -> Result<Self> {
        cfg.validate()?;
        if !lambda_hbar.is_finite() || lambda_hbar < 0.0 {
            return Err(Error::InvalidConfig(format!("lambda must be finite and >= 0, got {lambda_hbar}")));
        }
        if !(alpha.re.is_finite() && alpha.im.is_finite()) {
            return Err(Error::InvalidConfig("alpha must be finite".into()));
        }
        let n_max = n_max.unwrap_or_else(|| default_n_max(alpha));
        // surfaces the truncation error at construction
        coherent_coefficients(alpha, n_max)?;
        Ok(Self { cfg, lambda_hbar, alpha, n_max })
    }

    /// Parameters of the reference run: `ħλ/ω = 0.01`, start at `(3, 0)`.
    pub fn reference(cfg: PhysConfig) -> Result<Self> {
        Self::new(cfg, 0.01 * cfg.omega, Complex64::new(3.0 / 2f64.sqrt(), 0.0), None)
    }

    pub fn period(&self) -> f64 {
        TAU / self.cfg.omega
    }

    pub fn initial_state(&self) -> FockState {
        coherent_coefficients(self.alpha, self.n_max).expect("checked at construction")
    }
}

/// Coefficients `c_n` in the oscillator eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    pub coeffs: Vec<Complex64>,
}

impl FockState {
    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &FockState) -> Complex64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn fidelity(&self, other: &FockState) -> f64 {
        self.inner(other).norm()
    }

    pub fn mean_number(&self) -> f64 {
        self.coeffs.iter().enumerate().map(|(n, c)| n as f64 * c.norm_sqr()).sum()
    }

    /// `⟨H⟩ = Σ |c_n|² E_n`.
    pub fn energy(&self, params: &QuarticParams) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c.norm_sqr() * eigenenergy(n, params))
            .sum()
    }

    /// Smallest index whose cumulative weight reaches `1 - 1e-12`.
    pub fn effective_size(&self) -> usize {
        let mut acc = 0.0;
        for (n, c) in self.coeffs.iter().enumerate() {
            acc += c.norm_sqr();
            if acc >= 1.0 - TRUNCATION_TOL {
                return n;
            }
        }
        self.coeffs.len().saturating_sub(1)
    }
}

/// `c_n = e^{-|α|²/2} α^n / √(n!)` for `n = 0..=n_max`, by the recurrence
/// `c_{n+1} = c_n α / √(n+1)`.
pub fn coherent_coefficients(alpha: Complex64, n_max: usize) -> Result<FockState> {
    let mut coeffs = Vec::with_capacity(n_max + 1);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..=n_max {
        coeffs.push(c);
        c = c * alpha / ((n + 1) as f64).sqrt();
    }
    let state = FockState { coeffs };
    let tail = (1.0 - state.norm_sqr()).max(0.0);
    if tail > TRUNCATION_TOL {
        let mut suggested = n_max + 1;
        while suggested < default_n_max(alpha).max(n_max + 1) * 4 {
            if poisson_tail(alpha.norm_sqr(), suggested) <= TRUNCATION_TOL {
                break;
            }
            suggested += 1;
        }
        return Err(Error::Truncation { tail, suggested });
    }
    Ok(state)
}

fn poisson_tail(mean: f64, n_max: usize) -> f64 {
    let mut p = (-mean).exp();
    let mut acc = 0.0;
    for n in 0..=n_max {
        acc += p;
        p *= mean / (n + 1) as f64;
    }
    (1.0 - acc).max(0.0)
}

/// `E_n = ħω n + ħ (ħλ) n (n - 1)`.
pub fn eigenenergy(n: usize, params: &QuarticParams) -> f64 {
    let n = n as f64;
    let h = params.cfg.hbar;
    h * params.cfg.omega * n + h * params.lambda_hbar * n * (n - 1.0)
}

/// `c_n e^{-i E_n t / ħ}`.
pub fn evolve(state: &FockState, params: &QuarticParams, t: f64) -> FockState {
    // the two frequencies are reduced separately to keep the phases exact
    let a = (params.cfg.omega * t).rem_euclid(TAU);
    let b = (params.lambda_hbar * t).rem_euclid(TAU);
    let coeffs = state
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| {
            let nf = n as f64;
            let phase = (a * nf).rem_euclid(TAU) + b * nf * (nf - 1.0);
            c * Complex64::from_polar(1.0, -phase)
        })
        .collect();
    FockState { coeffs }
}

/// Normalized Hermite functions `φ_0..=φ_{n_max}` and their derivatives at
/// scaled position `x`, via the overflow-free three-term recurrence.
pub fn hermite_phi(n_max: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let mut phi = Vec::with_capacity(n_max + 1);
    phi.push(PI.powf(-0.25) * (-0.5 * x * x).exp());
    if n_max >= 1 {
        phi.push(2f64.sqrt() * x * phi[0]);
    }
    for n in 1..n_max {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * phi[n] - (nf / (nf + 1.0)).sqrt() * phi[n - 1];
        phi.push(next);
    }
    let dphi = (0..=n_max)
        .map(|n| {
            let lower = if n > 0 { (2.0 * n as f64).sqrt() * phi[n - 1] } else { 0.0 };
            lower - x * phi[n]
        })
        .collect();
    (phi, dphi)
}

/// `ψ, ψ', ψ''` at physical position `x`.
pub fn psi_with_derivatives(
    state: &FockState,
    cfg: &PhysConfig,
    x: f64,
) -> (Complex64, Complex64, Complex64) {
    let n_max = state.coeffs.len() - 1;
    let k = (cfg.mass * cfg.omega / cfg.hbar).sqrt();
    let xs = k * x;
    let (phi, dphi) = hermite_phi(n_max, xs);
    let mut s0 = Complex64::new(0.0, 0.0);
    let mut s1 = s0;
    let mut s2 = s0;
    for (n, c) in state.coeffs.iter().enumerate() {
        // φ_n'' from differentiating φ_n' = √(2n) φ_{n-1} - x φ_n once more
        let d2 = if n > 0 { (2.0 * n as f64).sqrt() * dphi[n - 1] } else { 0.0 } - phi[n] - xs * dphi[n];
        s0 += c * phi[n];
        s1 += c * dphi[n];
        s2 += c * d2;
    }
    let root = k.sqrt();
    (s0 * root, s1 * root * k, s2 * root * k * k)
}

/// `ψ = Σ c_n φ_n(x)` on a uniform grid with analytic derivative channels.
pub fn fock_to_position(
    state: &FockState,
    cfg: &PhysConfig,
    x_min: f64,
    dx: f64,
    n: usize,
) -> Result<SampledWavefunction> {
    check_grid(x_min, dx, n)?;
    let n_eff = state.effective_size().max(1) as f64;
    let required = PI * cfg.oscillator_length() / (2.0 * n_eff).sqrt();
    if dx >= required {
        return Err(Error::UnderResolved { dx, required });
    }
    let mut psi = Vec::with_capacity(n);
    let mut dpsi = Vec::with_capacity(n);
    let mut d2psi = Vec::with_capacity(n);
    for k in 0..n {
        let (a, b, c) = psi_with_derivatives(state, cfg, x_min + k as f64 * dx);
        psi.push(a);
        dpsi.push(b);
        d2psi.push(c);
    }
    let mut wf = SampledWavefunction::new(x_min, dx, psi)?;
    wf.dpsi = Some(dpsi);
    wf.d2psi = Some(d2psi);
    Ok(wf)
}

/// Polar data from `ψ = ψ_R + iψ_I` and its first two derivatives:
///
/// `S' = ħ (ψ_R ψ_I' - ψ_R' ψ_I) / |ψ|²`,
/// `R''/R = [ψ_R'² + ψ_I'² + ψ_R ψ_R'' + ψ_I ψ_I''] / |ψ|² - (ψ_R ψ_R' + ψ_I ψ_I')² / |ψ|⁴`.
///
/// Amplitudes below `r_floor` are masked.
pub fn polar_from_complex(
    psi: Complex64,
    dpsi: Complex64,
    d2psi: Complex64,
    cfg: &PhysConfig,
    r_floor: f64,
) -> PolarData {
    let rho = psi.norm_sqr();
    let r = rho.sqrt();
    if !(r > 0.0 && r >= r_floor) {
        return PolarData::masked();
    }
    let (a, b) = (psi.re, psi.im);
    let (da, db) = (dpsi.re, dpsi.im);
    let (d2a, d2b) = (d2psi.re, d2psi.im);
    let cross = a * da + b * db;
    let curvature = (da * da + db * db + a * d2a + b * d2b) / rho - cross * cross / (rho * rho);
    PolarData {
        r,
        dr: cross / r,
        d2r: curvature * r,
        ds: cfg.hbar * (a * db - da * b) / rho,
        valid: true,
    }
}

/// Point evaluator for an evolved state; masks amplitudes below
/// `1e-12 · max R`.
#[derive(Debug, Clone)]
pub struct QuarticEvaluator {
    pub state: FockState,
    pub cfg: PhysConfig,
    r_floor: f64,
}

impl QuarticEvaluator {
    pub fn new(state: FockState, cfg: PhysConfig) -> Self {
        let n = state.coeffs.len() as f64;
        // every component lives inside the classical turning point √(2n+1)
        let half = ((2.0 * n + 1.0).sqrt() + 6.0) * cfg.oscillator_length();
        let samples = 4001;
        let r_max = (0..samples)
            .map(|k| {
                let x = -half + 2.0 * half * k as f64 / (samples - 1) as f64;
                psi_with_derivatives(&state, &cfg, x).0.norm()
            })
            .fold(0.0, f64::max);
        Self { state, cfg, r_floor: NODE_THRESHOLD * r_max }
    }

    pub fn psi(&self, x: f64) -> (Complex64, Complex64, Complex64) {
        psi_with_derivatives(&self.state, &self.cfg, x)
    }
}

impl PolarEvaluator for QuarticEvaluator {
    fn polar_at(&self, x: f64) -> PolarData {
        let (a, b, c) = self.psi(x);
        polar_from_complex(a, b, c, &self.cfg, self.r_floor)
    }
}
