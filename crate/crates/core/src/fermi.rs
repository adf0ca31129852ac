//! Fermi function `g_F(x,p) = [p - S'(x)]² + ħ² R''(x)/R(x)`, its zero
//! curve `p±(x)` and the inverse map from branch data back to the state.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::contour::Polyline;
use crate::error::{Error, Result};
use crate::packets::{AnalyticPacket, PhysConfig, PolarData, SampledWavefunction};
use crate::wigner::{PhaseSpaceGrid, ScalarField};

/// Anything that can report polar data at an arbitrary position.
pub trait PolarEvaluator: Sync {
    fn polar_at(&self, x: f64) -> PolarData;
}

impl<F: Fn(f64) -> PolarData + Sync> PolarEvaluator for F {
    fn polar_at(&self, x: f64) -> PolarData {
        self(x)
    }
}

/// Borrowing evaluator for an analytic packet.
pub struct PacketEvaluator<'a> {
    pub packet: &'a AnalyticPacket,
    pub cfg: PhysConfig,
}

impl PolarEvaluator for PacketEvaluator<'_> {
    fn polar_at(&self, x: f64) -> PolarData {
        self.packet.eval_polar(&self.cfg, x)
    }
}

impl AnalyticPacket {
    pub fn evaluator(&self, cfg: PhysConfig) -> PacketEvaluator<'_> {
        PacketEvaluator { packet: self, cfg }
    }
}

/// `g_F` on a grid. Columns at amplitude nodes are NaN.
pub fn fermi_field(eval: &impl PolarEvaluator, grid: &PhaseSpaceGrid, cfg: &PhysConfig) -> ScalarField {
    let hbar2 = cfg.hbar * cfg.hbar;
    let values = (0..grid.nx)
        .into_par_iter()
        .flat_map_iter(|i| {
            let pd = eval.polar_at(grid.x(i));
            let quantum = hbar2 * pd.curvature();
            (0..grid.np).map(move |j| {
                if pd.valid {
                    let d = grid.p(j) - pd.ds;
                    d * d + quantum
                } else {
                    f64::NAN
                }
            })
        })
        .collect();
    ScalarField { grid: *grid, values }
}

/// Closed-form `g_F` of the Gaussian packet.
pub fn fermi_gaussian_closed(
    x0: f64,
    p0: f64,
    delta: f64,
    cfg: &PhysConfig,
    grid: &PhaseSpaceGrid,
) -> ScalarField {
    let h2 = cfg.hbar * cfg.hbar;
    let d2 = delta * delta;
    ScalarField::from_fn(*grid, |x, p| {
        h2 * (x - x0).powi(2) / (d2 * d2) + (p - p0).powi(2) - h2 / d2
    })
}

/// Zero-curve momenta `p±(x) = S' ± sqrt(-ħ² R''/R)` per sample.
///
/// Where `R'' > 0` the pair is complex conjugate with `p_plus` carrying the
/// `+i` root. Masked samples hold NaN in both branches.
#[derive(Debug, Clone, PartialEq)]
pub struct FermiCurve {
    pub x: Vec<f64>,
    pub p_plus: Vec<Complex64>,
    pub p_minus: Vec<Complex64>,
    /// True iff `R'' <= 0` and the amplitude is above the node threshold.
    pub real_branch: Vec<bool>,
    pub valid: Vec<bool>,
    pub hbar: f64,
}

impl FermiCurve {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// `((p+ - p-)/2)²`, i.e. `-ħ² R''/R`; negative on complex branches.
    fn half_gap_sqr(&self, k: usize) -> f64 {
        (0.5 * (self.p_plus[k] - self.p_minus[k])).powi(2).re
    }

    fn center(&self, k: usize) -> f64 {
        (0.5 * (self.p_plus[k] + self.p_minus[k])).re
    }

    /// Index ranges of maximal runs of real-branch samples.
    pub fn real_segments(&self) -> Vec<std::ops::Range<usize>> {
        runs(&self.real_branch)
    }
}

fn runs(flags: &[bool]) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = None;
    for (k, &f) in flags.iter().enumerate() {
        match (f, start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                out.push(s..k);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(s..flags.len());
    }
    out
}

pub fn fermi_branches(eval: &impl PolarEvaluator, xs: &[f64], cfg: &PhysConfig) -> FermiCurve {
    let hbar2 = cfg.hbar * cfg.hbar;
    let polar: Vec<PolarData> = xs.par_iter().map(|&x| eval.polar_at(x)).collect();
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let mut curve = FermiCurve {
        x: xs.to_vec(),
        p_plus: Vec::with_capacity(xs.len()),
        p_minus: Vec::with_capacity(xs.len()),
        real_branch: Vec::with_capacity(xs.len()),
        valid: Vec::with_capacity(xs.len()),
        hbar: cfg.hbar,
    };
    for pd in polar {
        if !pd.valid {
            curve.p_plus.push(nan);
            curve.p_minus.push(nan);
            curve.real_branch.push(false);
            curve.valid.push(false);
            continue;
        }
        let disc = -hbar2 * pd.curvature();
        let (plus, minus, real) = if disc >= 0.0 {
            let r = disc.sqrt();
            (Complex64::new(pd.ds + r, 0.0), Complex64::new(pd.ds - r, 0.0), true)
        } else {
            let r = (-disc).sqrt();
            (Complex64::new(pd.ds, r), Complex64::new(pd.ds, -r), false)
        };
        curve.p_plus.push(plus);
        curve.p_minus.push(minus);
        curve.real_branch.push(real);
        curve.valid.push(true);
    }
    curve
}

/// One closed polyline per run of at least three real-branch samples:
/// `p_plus` left to right, then `p_minus` right to left. Where a run borders a
/// complex sample, the branch point is located by linear interpolation of
/// `((p+ - p-)/2)²` and inserted as the turning vertex.
pub fn branch_closure(curve: &FermiCurve) -> Vec<Polyline> {
    let n = curve.len();
    let mut out = Vec::new();
    for seg in curve.real_segments() {
        if seg.len() < 3 {
            continue;
        }
        let branch_point = |inner: usize, outer: usize| -> Option<(f64, f64)> {
            if !curve.valid[outer] {
                return None;
            }
            let (di, d_o) = (curve.half_gap_sqr(inner), curve.half_gap_sqr(outer));
            if !(di >= 0.0 && d_o < 0.0) {
                return None;
            }
            let t = di / (di - d_o);
            let x = curve.x[inner] + t * (curve.x[outer] - curve.x[inner]);
            let p = curve.center(inner) + t * (curve.center(outer) - curve.center(inner));
            Some((x, p))
        };
        let left = (seg.start > 0).then(|| branch_point(seg.start, seg.start - 1)).flatten();
        let right = (seg.end < n).then(|| branch_point(seg.end - 1, seg.end)).flatten();

        let mut pts = Vec::with_capacity(2 * seg.len() + 2);
        pts.extend(left);
        pts.extend(seg.clone().map(|k| (curve.x[k], curve.p_plus[k].re)));
        pts.extend(right);
        pts.extend(seg.clone().rev().map(|k| (curve.x[k], curve.p_minus[k].re)));
        let poly = Polyline::new(pts, true);
        if poly.len() >= 3 {
            out.push(poly);
        }
    }
    out
}

/// `S'` and `R''/R` recovered from branch data. Masked samples are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarReconstruction {
    pub x: Vec<f64>,
    pub sprime: Vec<f64>,
    pub curvature: Vec<f64>,
    /// Largest imaginary part discarded from either quantity.
    pub max_imag_residue: f64,
}

pub fn reconstruct_polar(curve: &FermiCurve) -> PolarReconstruction {
    let h2 = curve.hbar * curve.hbar;
    let mut sprime = Vec::with_capacity(curve.len());
    let mut curvature = Vec::with_capacity(curve.len());
    let mut resid: f64 = 0.0;
    for k in 0..curve.len() {
        if !curve.valid[k] {
            sprime.push(f64::NAN);
            curvature.push(f64::NAN);
            continue;
        }
        let (a, b) = (curve.p_plus[k], curve.p_minus[k]);
        let s = 0.5 * (a + b);
        let c = -(0.5 * (a - b)).powi(2) / h2;
        resid = resid.max(s.im.abs()).max(c.im.abs());
        sprime.push(s.re);
        curvature.push(c.re);
    }
    PolarReconstruction { x: curve.x.clone(), sprime, curvature, max_imag_residue: resid }
}

/// Fixes the constants of the inversion: position, amplitude and phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    pub x: f64,
    pub r: f64,
    pub s: f64,
}

/// Rebuilds `ψ = R e^{iS/ħ}` on the uniform sample grid from `S'` and `R''/R`.
///
/// `S` is the running integral of `S'`. `R` solves `R'' = (R''/R) R` by two
/// Numerov sweeps marched inward from both interval ends, which selects the
/// solution decaying at both ends; the two halves are matched at the anchor.
/// Without an anchor the amplitude maximum is used, with `S = 0` there.
pub fn reconstruct_wavefunction(
    xs: &[f64],
    sprime: &[f64],
    curvature: &[f64],
    anchor: Option<Anchor>,
    hbar: f64,
) -> Result<SampledWavefunction> {
    let n = xs.len();
    if n < 3 || sprime.len() != n || curvature.len() != n {
        return Err(Error::InvalidGrid(format!(
            "need >= 3 matching samples, got {n}, {}, {}",
            sprime.len(),
            curvature.len()
        )));
    }
    let h = (xs[n - 1] - xs[0]) / (n - 1) as f64;
    if h.is_nan() || h <= 0.0 || xs.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0)) {
        return Err(Error::InvalidGrid("reconstruction needs uniformly spaced samples".into()));
    }
    let masked: Vec<bool> = sprime.iter().zip(curvature).map(|(a, b)| !(a.is_finite() && b.is_finite())).collect();
    if let Some(r) = runs(&masked).first() {
        return Err(Error::NodeInInterval { start: xs[r.start], end: xs[r.end - 1] });
    }

    let phase = cumulative_integral(sprime, h);
    let (k_a, r_a, s_a) = match anchor {
        Some(a) => {
            if a.x < xs[0] || a.x > xs[n - 1] {
                return Err(Error::Contract(format!(
                    "anchor x = {} lies outside [{}, {}]",
                    a.x, xs[0], xs[n - 1]
                )));
            }
            (((a.x - xs[0]) / h).round() as usize, a.r, a.s)
        }
        None => {
            let trial = numerov_inward(curvature, h, n / 2, 1.0);
            let k = trial
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |b, (k, &v)| if v > b.1 { (k, v) } else { b })
                .0;
            (k, 1.0, 0.0)
        }
    };
    let amp = numerov_inward(curvature, h, k_a, r_a.abs().max(f64::MIN_POSITIVE));
    let offset = s_a - phase[k_a];
    let psi = amp
        .iter()
        .zip(&phase)
        .map(|(&r, &s)| Complex64::from_polar(r, (s + offset) / hbar))
        .collect();
    let mut wf = SampledWavefunction::new(xs[0], h, psi)?;
    wf.normalize();
    Ok(wf)
}

/// Running integral with fourth-order endpoint-derivative correction.
fn cumulative_integral(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let deriv = |k: usize| -> f64 {
        if k == 0 {
            (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
        } else if k == n - 1 {
            (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h)
        } else {
            (f[k + 1] - f[k - 1]) / (2.0 * h)
        }
    };
    let mut out = vec![0.0; n];
    for k in 1..n {
        out[k] = out[k - 1] + 0.5 * h * (f[k - 1] + f[k]) - h * h / 12.0 * (deriv(k) - deriv(k - 1));
    }
    out
}

/// Solution of `y'' = v y` from Numerov sweeps started at both ends with
/// `y = 0` and marched toward `k_a`, each scaled to `y(k_a) = y_a`.
fn numerov_inward(v: &[f64], h: f64, k_a: usize, y_a: f64) -> Vec<f64> {
    let n = v.len();
    let w = |k: usize| 1.0 - h * h * v[k] / 12.0;
    let step = |prev: f64, cur: f64, kp: usize, kc: usize, kn: usize| -> f64 {
        (2.0 * cur * (1.0 + 5.0 * h * h * v[kc] / 12.0) - prev * w(kp)) / w(kn)
    };
    let mut y = vec![0.0; n];

    // left sweep over 0..=k_a
    if k_a >= 1 {
        y[0] = 0.0;
        y[1] = 1e-30;
        for k in 1..k_a {
            y[k + 1] = step(y[k - 1], y[k], k - 1, k, k + 1);
            if y[k + 1].abs() > 1e150 {
                y[..=k + 1].iter_mut().for_each(|z| *z *= 1e-150);
            }
        }
        let s = y_a / y[k_a];
        y[..=k_a].iter_mut().for_each(|z| *z *= s);
    }
    // right sweep over k_a..n
    let mut r = vec![0.0; n];
    if k_a + 1 < n {
        r[n - 1] = 0.0;
        r[n - 2] = 1e-30;
        for k in (k_a + 1..n - 1).rev() {
            r[k - 1] = step(r[k + 1], r[k], k + 1, k, k - 1);
            if r[k - 1].abs() > 1e150 {
                r[k - 1..].iter_mut().for_each(|z| *z *= 1e-150);
            }
        }
        let s = y_a / r[k_a];
        for k in k_a..n {
            y[k] = r[k] * s;
        }
    }
    y[k_a] = y_a;
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::enclosed_area;
    use crate::packets::make_gaussian;
    use std::f64::consts::PI;

    fn unit() -> PhysConfig {
        PhysConfig::default()
    }

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn gaussian_field_at_center() {
        let g = make_gaussian(0.5, -1.0, 2.0).unwrap();
        let grid = PhaseSpaceGrid::new(0.5, 1.5, -1.0, 0.0, 2, 2).unwrap();
        let f = fermi_field(&g.evaluator(unit()), &grid, &unit());
        assert!((f.get(0, 0) + 0.25).abs() < 1e-15);
    }

    #[test]
    fn gaussian_branches_closed_form() {
        let g = make_gaussian(0.0, 0.0, 1.0).unwrap();
        let xs = linspace(-3.0, 3.0, 61);
        let c = fermi_branches(&g.evaluator(unit()), &xs, &unit());
        for (k, &x) in xs.iter().enumerate() {
            if x.abs() < 1.0 - 1e-12 {
                assert!(c.real_branch[k]);
                assert!((c.p_plus[k].re - (1.0 - x * x).sqrt()).abs() < 1e-14);
                assert!((c.p_minus[k].re + (1.0 - x * x).sqrt()).abs() < 1e-14);
            } else if x.abs() > 1.0 + 1e-12 {
                assert!(!c.real_branch[k]);
                assert!((c.p_plus[k].im - (x * x - 1.0).sqrt()).abs() < 1e-13);
                assert_eq!(c.p_plus[k].conj(), c.p_minus[k]);
            }
        }
    }

    #[test]
    fn branch_point_is_double_root() {
        let g = make_gaussian(0.0, 0.7, 1.0).unwrap();
        let c = fermi_branches(&g.evaluator(unit()), &[1.0, -1.0], &unit());
        for k in 0..2 {
            assert!(c.real_branch[k]);
            assert_eq!(c.p_plus[k], c.p_minus[k]);
            assert_eq!(c.p_plus[k].re, 0.7);
        }
        let rec = reconstruct_polar(&c);
        assert_eq!(rec.curvature, vec![0.0, 0.0]);
    }

    #[test]
    fn ellipse_area_is_pi_hbar() {
        let cfg = PhysConfig::new(0.5, 1.0, 1.0).unwrap();
        let g = make_gaussian(1.0, 2.0, 0.8).unwrap();
        let xs = linspace(-5.0, 7.0, 1024);
        let polys = branch_closure(&fermi_branches(&g.evaluator(cfg), &xs, &cfg));
        assert_eq!(polys.len(), 1);
        let a = enclosed_area(&polys[0]).unwrap();
        assert!((a / (PI * 0.5) - 1.0).abs() < 1e-3, "{a}");
    }

    #[test]
    fn all_complex_curve_has_no_closure() {
        let g = make_gaussian(0.0, 0.0, 1.0).unwrap();
        let xs = linspace(2.0, 4.0, 50);
        let c = fermi_branches(&g.evaluator(unit()), &xs, &unit());
        assert!(branch_closure(&c).is_empty());
    }

    #[test]
    fn node_samples_are_masked() {
        let p = AnalyticPacket::new(0.0, 0.0, 1.0, vec![-1.0, 0.0, 1.0], vec![]).unwrap();
        let c = fermi_branches(&p.evaluator(unit()), &[-0.5, 0.0, 0.5], &unit());
        assert_eq!(c.valid, vec![true, false, true]);
        assert!(c.p_plus[1].re.is_nan());
        let rec = reconstruct_polar(&c);
        assert!(rec.sprime[1].is_nan());
        let err = reconstruct_wavefunction(&rec.x, &rec.sprime, &rec.curvature, None, 1.0);
        assert!(matches!(err, Err(Error::NodeInInterval { .. })));
    }

    #[test]
    fn gaussian_round_trip_fidelity() {
        let cfg = unit();
        let g = make_gaussian(0.3, 1.1, 1.0).unwrap();
        let xs = linspace(-6.7, 7.3, 1401);
        let rec = reconstruct_polar(&fermi_branches(&g.evaluator(cfg), &xs, &cfg));
        for (k, &x) in xs.iter().enumerate() {
            assert!((rec.sprime[k] - 1.1).abs() < 1e-12);
            let u = x - 0.3;
            assert!((rec.curvature[k] - (u * u - 1.0)).abs() < 1e-10);
        }
        let wf = reconstruct_wavefunction(&xs, &rec.sprime, &rec.curvature, None, 1.0).unwrap();
        let reference = g.sample(&cfg, xs[0], xs[1] - xs[0], xs.len(), false).unwrap();
        let fid = wf.fidelity(&reference).unwrap();
        assert!(fid > 1.0 - 1e-6, "{fid}");
    }

    #[test]
    fn constant_sprime_gives_linear_phase() {
        let xs = linspace(-5.0, 5.0, 501);
        let sp = vec![0.8; xs.len()];
        let curv: Vec<f64> = xs.iter().map(|x| x * x - 1.0).collect();
        let anchor = Anchor { x: 0.0, r: 1.0, s: 0.0 };
        let wf = reconstruct_wavefunction(&xs, &sp, &curv, Some(anchor), 1.0).unwrap();
        for (z, x) in wf.psi.iter().zip(&xs) {
            let rel = z * Complex64::from_polar(1.0, -0.8 * x);
            assert!(rel.arg().abs() < 1e-12);
        }
    }
}
