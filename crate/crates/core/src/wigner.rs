//! Wigner quasiprobability on a phase-space grid.
//!
//! The transform works on the kernel `K(x, s) = ψ(x + s) ψ*(x - s)` sampled at
//! `s = k dx / 2`, i.e. `y = 2s` steps of `dx`. Half-node values come from
//! band-limited (Fourier) interpolation of the zero-padded samples, and each
//! requested momentum is evaluated by direct phase summation, so grid momenta
//! never have to coincide with Fourier bins.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::packets::{AnalyticPacket, PhysConfig, SampledWavefunction};

/// Zero-padding factor applied before the interpolation transform.
pub const PAD_FACTOR: usize = 4;

/// Rectangular `(x, p)` grid, inclusive of both end points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

impl PhaseSpaceGrid {
    pub fn new(x_min: f64, x_max: f64, p_min: f64, p_max: f64, nx: usize, np: usize) -> Result<Self> {
        let g = Self { x_min, x_max, p_min, p_max, nx, np };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.p_min, self.p_max].iter().all(|v| v.is_finite());
        if !finite || self.x_max <= self.x_min || self.p_max <= self.p_min {
            return Err(Error::InvalidGrid(format!(
                "empty window x=[{}, {}], p=[{}, {}]",
                self.x_min, self.x_max, self.p_min, self.p_max
            )));
        }
        if self.nx < 2 || self.np < 2 {
            return Err(Error::InvalidGrid(format!("need nx, np >= 2, got {}x{}", self.nx, self.np)));
        }
        Ok(())
    }

    /// Symmetric window `[-half, half]²` around `(xc, pc)`.
    pub fn centered(xc: f64, x_half: f64, pc: f64, p_half: f64, nx: usize, np: usize) -> Result<Self> {
        Self::new(xc - x_half, xc + x_half, pc - p_half, pc + p_half, nx, np)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.np - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.dp()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ps(&self) -> Vec<f64> {
        (0..self.np).map(|j| self.p(j)).collect()
    }

    /// Larger of the two cell sides.
    pub fn cell(&self) -> f64 {
        self.dx().max(self.dp())
    }

    /// Smaller of the two cell sides.
    pub fn finest_cell(&self) -> f64 {
        self.dx().min(self.dp())
    }
}

/// Real values on a [`PhaseSpaceGrid`], stored x-major: `values[i * np + j]`.
///
/// NaN marks masked entries (used for Fermi fields at amplitude nodes).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: PhaseSpaceGrid,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn from_fn(grid: PhaseSpaceGrid, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        let values = (0..grid.nx)
            .into_par_iter()
            .flat_map_iter(|i| {
                let x = grid.x(i);
                let f = &f;
                (0..grid.np).map(move |j| f(x, grid.p(j)))
            })
            .collect();
        Self { grid, values }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.np + j]
    }

    pub fn is_masked(&self, i: usize, j: usize) -> bool {
        self.get(i, j).is_nan()
    }

    /// Largest unmasked value.
    pub fn max(&self) -> f64 {
        self.values.iter().copied().filter(|v| !v.is_nan()).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest unmasked value.
    pub fn min(&self) -> f64 {
        self.values.iter().copied().filter(|v| !v.is_nan()).fold(f64::INFINITY, f64::min)
    }

    /// Grid indices of the largest value.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, f64::NEG_INFINITY);
        for (k, &v) in self.values.iter().enumerate() {
            if v > best.1 {
                best = (k, v);
            }
        }
        (best.0 / self.grid.np, best.0 % self.grid.np)
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Bilinear interpolation; `None` outside the window or next to a masked node.
    pub fn bilinear(&self, x: f64, p: f64) -> Option<f64> {
        let g = &self.grid;
        let tx = (x - g.x_min) / g.dx();
        let tp = (p - g.p_min) / g.dp();
        let eps = 1e-9;
        if !(tx >= -eps && tp >= -eps && tx <= (g.nx - 1) as f64 + eps && tp <= (g.np - 1) as f64 + eps) {
            return None;
        }
        let i = (tx.floor().max(0.0) as usize).min(g.nx - 2);
        let j = (tp.floor().max(0.0) as usize).min(g.np - 2);
        let (fx, fp) = (tx - i as f64, tp - j as f64);
        let v = (1.0 - fx) * (1.0 - fp) * self.get(i, j)
            + fx * (1.0 - fp) * self.get(i + 1, j)
            + (1.0 - fx) * fp * self.get(i, j + 1)
            + fx * fp * self.get(i + 1, j + 1);
        (!v.is_nan()).then_some(v)
    }
}

/// Output of [`wigner_transform`].
#[derive(Debug, Clone)]
pub struct WignerTransform {
    pub field: ScalarField,
    /// Largest `|Im W|` seen before discarding the imaginary part.
    pub max_imag_residue: f64,
}

/// Largest `|p|` the sampling of `psi` can represent.
pub fn nyquist_momentum(psi: &SampledWavefunction, cfg: &PhysConfig) -> f64 {
    PI * cfg.hbar / psi.dx
}

/// `W(x,p) = (1/2πħ) ∫ dy e^{-ipy/ħ} ψ(x+y/2) ψ*(x-y/2)` on `grid`.
pub fn wigner_transform(
    psi: &SampledWavefunction,
    grid: &PhaseSpaceGrid,
    cfg: &PhysConfig,
) -> Result<WignerTransform> {
    grid.validate()?;
    cfg.validate()?;
    let limit = nyquist_momentum(psi, cfg);
    let requested = grid.p_min.abs().max(grid.p_max.abs());
    if requested > limit {
        return Err(Error::NyquistExceeded { max_p: limit, requested });
    }

    let n = psi.len();
    let interp = BandLimited::new(psi);
    let half = 0.5 * psi.dx;
    // s = k * half, and x ± s must stay inside the sampled interval
    let k_max = n;

    // cos/sin of 2 p k half / ħ for every requested p
    let ps = grid.ps();
    let table: Vec<(Vec<f64>, Vec<f64>)> = ps
        .iter()
        .map(|&p| {
            (0..=k_max)
                .map(|k| (2.0 * p * k as f64 * half / cfg.hbar).sin_cos())
                .map(|(s, c)| (c, s))
                .unzip()
        })
        .collect();

    let prefactor = half / (PI * cfg.hbar);
    let columns: Vec<(Vec<f64>, f64)> = (0..grid.nx)
        .into_par_iter()
        .map(|i| {
            let x = grid.x(i);
            let kernel = interp.kernel(x);
            let mut col = Vec::with_capacity(grid.np);
            let mut resid: f64 = 0.0;
            for (cos, sin) in &table {
                let mut re = 0.0;
                let mut im = 0.0;
                for (k, kv) in kernel.iter().enumerate() {
                    // K_{-k} = conj(K_k); e^{-iφ} for +k and e^{+iφ} for -k
                    let (c, s) = (cos[k], sin[k]);
                    let plus = *kv * Complex64::new(c, -s);
                    if k == 0 {
                        re += plus.re;
                        im += plus.im;
                    } else {
                        let minus = kv.conj() * Complex64::new(c, s);
                        re += plus.re + minus.re;
                        im += plus.im + minus.im;
                    }
                }
                col.push(prefactor * re);
                resid = resid.max((prefactor * im).abs());
            }
            (col, resid)
        })
        .collect();

    let mut values = Vec::with_capacity(grid.nx * grid.np);
    let mut max_imag_residue: f64 = 0.0;
    for (col, r) in columns {
        values.extend(col);
        max_imag_residue = max_imag_residue.max(r);
    }
    Ok(WignerTransform { field: ScalarField { grid: *grid, values }, max_imag_residue })
}

/// Band-limited evaluation of samples at uniformly shifted points.
struct BandLimited<'a> {
    psi: &'a SampledWavefunction,
    spectrum: Vec<Complex64>,
    inverse: Arc<dyn Fft<f64>>,
}

impl<'a> BandLimited<'a> {
    fn new(psi: &'a SampledWavefunction) -> Self {
        let len = PAD_FACTOR * psi.len();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let mut spectrum = vec![Complex64::new(0.0, 0.0); len];
        spectrum[..psi.len()].copy_from_slice(&psi.psi);
        forward.process(&mut spectrum);
        Self { psi, spectrum, inverse }
    }

    /// Values `ψ(x_m + tau)` for every native node `m`.
    fn shifted(&self, tau: f64) -> Vec<Complex64> {
        if tau == 0.0 {
            return self.psi.psi.clone();
        }
        let len = self.spectrum.len();
        let dk = 2.0 * PI / (len as f64 * self.psi.dx);
        let mut buf: Vec<Complex64> = self
            .spectrum
            .iter()
            .enumerate()
            .map(|(q, z)| {
                if 2 * q == len {
                    // Nyquist bin: keep the real, symmetric part
                    z * (dk * q as f64 * tau).cos()
                } else {
                    let qs = if 2 * q < len { q as f64 } else { q as f64 - len as f64 };
                    z * Complex64::from_polar(1.0, dk * qs * tau)
                }
            })
            .collect();
        self.inverse.process(&mut buf);
        let scale = 1.0 / len as f64;
        buf.truncate(self.psi.len());
        buf.iter_mut().for_each(|z| *z *= scale);
        buf
    }

    /// `K_k = ψ(x + k dx/2) ψ*(x - k dx/2)` for `k = 0, 1, ...` while both
    /// arguments stay on the sampled interval.
    fn kernel(&self, x: f64) -> Vec<Complex64> {
        let psi = self.psi;
        let n = psi.len();
        let dx = psi.dx;
        let t = (x - psi.x_min) / dx;
        let tol = 1e-9;
        if t < -tol || t > (n - 1) as f64 + tol {
            return Vec::new();
        }
        let mut j = t.floor();
        let mut f = t - j;
        if f > 1.0 - tol {
            j += 1.0;
            f = 0.0;
        } else if f < tol {
            f = 0.0;
        }
        let j = j as i64;
        let on_nodes = self.shifted(f * dx);
        let off_nodes = self.shifted((f + 0.5) * dx);
        let n = n as i64;
        // positions are j + f ± k/2 in node units; both must lie in [0, n-1]
        let inside = |pos: f64| pos >= -tol && pos <= (n - 1) as f64 + tol;
        let at = |k: i64| -> Option<Complex64> {
            // ψ(x + k dx/2) for signed k
            let m = k.div_euclid(2);
            let (arr, idx) = if k.rem_euclid(2) == 0 {
                (&on_nodes, j + m)
            } else {
                (&off_nodes, j + m)
            };
            let pos = j as f64 + f + 0.5 * k as f64;
            (inside(pos) && idx >= 0 && idx < n).then(|| arr[idx as usize])
        };
        let mut out = Vec::new();
        for k in 0.. {
            match (at(k), at(-k)) {
                (Some(a), Some(b)) => out.push(a * b.conj()),
                _ => break,
            }
        }
        out
    }
}

/// Closed-form Wigner function of the Gaussian packet centered at `(x0, p0)`.
pub fn wigner_gaussian_closed(
    x0: f64,
    p0: f64,
    delta: f64,
    cfg: &PhysConfig,
    grid: &PhaseSpaceGrid,
) -> Result<ScalarField> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidPacket(format!("delta must be positive, got {delta}")));
    }
    grid.validate()?;
    let hbar = cfg.hbar;
    Ok(ScalarField::from_fn(*grid, |x, p| gaussian_wigner_value(x - x0, p - p0, delta, hbar)))
}

fn gaussian_wigner_value(dx: f64, dp: f64, delta: f64, hbar: f64) -> f64 {
    let a = dx / delta;
    let b = delta * dp / hbar;
    (-(a * a) - b * b).exp() / (PI * hbar)
}

/// Gaussian Wigner function sheared along `p` by the local phase gradient,
/// `W_G[x, p - S'(x)]`. Only defined for packets with a pure Gaussian envelope.
pub fn wigner_shift_approx(
    packet: &AnalyticPacket,
    cfg: &PhysConfig,
    grid: &PhaseSpaceGrid,
) -> Result<ScalarField> {
    if !packet.is_gaussian_envelope() {
        return Err(Error::Contract(
            "shift approximation needs a pure Gaussian envelope (empty amplitude polynomial)".into(),
        ));
    }
    grid.validate()?;
    let (x0, delta, hbar) = (packet.x0(), packet.delta(), cfg.hbar);
    Ok(ScalarField::from_fn(*grid, |x, p| {
        let sp = packet.eval_polar(cfg, x).ds;
        gaussian_wigner_value(x - x0, p - sp, delta, hbar)
    }))
}

/// `∫ dp W(x, p)` for every grid column (trapezoidal).
pub fn marginal_position(field: &ScalarField) -> Vec<f64> {
    let g = &field.grid;
    (0..g.nx)
        .map(|i| crate::numerics::trapezoid((0..g.np).map(|j| field.get(i, j)), g.dp()))
        .collect()
}

/// `∫ dx W(x, p)` for every grid row (trapezoidal).
pub fn marginal_momentum(field: &ScalarField) -> Vec<f64> {
    let g = &field.grid;
    (0..g.np)
        .map(|j| crate::numerics::trapezoid((0..g.nx).map(|i| field.get(i, j)), g.dx()))
        .collect()
}

pub fn total_integral(field: &ScalarField) -> f64 {
    crate::numerics::trapezoid(marginal_position(field).into_iter(), field.grid.dx())
}
