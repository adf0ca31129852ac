//! The figure and pipeline commands. Each `study_*` function returns the
//! computed objects; `execute` turns them into named output files.

use std::f64::consts::PI;

use super::io::{read_curve, write_curve, write_field, write_wavefunction, Format, Metrics};
use super::{CliError, CommandName, RunConfig};
use crate::contour::{enclosed_area, extract_level_set, hausdorff_sets, write_polylines, Polyline};
use crate::error::{Error, Result};
use crate::fermi::{
    branch_closure, fermi_branches, fermi_field, reconstruct_polar, reconstruct_wavefunction,
    FermiCurve, PolarEvaluator,
};
use crate::packets::{AnalyticPacket, PhysConfig, SampledWavefunction};
use crate::quartic::{evolve, fock_to_position, FockState, QuarticEvaluator, QuarticParams};
use crate::wigner::{wigner_transform, PhaseSpaceGrid, ScalarField};

/// Phase polynomials of the four Fig. 1 rows: x̃², x̃³, x̃² − x̃³/3, −x̃⁴/2.
pub fn fig1_phase(row: usize) -> Option<Vec<f64>> {
    match row {
        1 => Some(vec![0.0, 0.0, 1.0]),
        2 => Some(vec![0.0, 0.0, 0.0, 1.0]),
        3 => Some(vec![0.0, 0.0, 1.0, -1.0 / 3.0]),
        4 => Some(vec![0.0, 0.0, 0.0, 0.0, -0.5]),
        _ => None,
    }
}

/// Affine map between physical and scaled phase-space coordinates:
/// `x = x_shift + x_scale x̃`, `p = p_shift + p_scale p̃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaling {
    pub x_shift: f64,
    pub x_scale: f64,
    pub p_shift: f64,
    pub p_scale: f64,
}

impl Scaling {
    /// `x̃ = (x - x0)/δ`, `p̃ = δ (p - p0)/ħ`.
    pub fn packet(x0: f64, p0: f64, delta: f64, cfg: &PhysConfig) -> Self {
        Self { x_shift: x0, x_scale: delta, p_shift: p0, p_scale: cfg.hbar / delta }
    }

    /// `x̃ = √(mω/ħ) x`, `p̃ = p / √(ħmω)`.
    pub fn oscillator(cfg: &PhysConfig) -> Self {
        let l = cfg.oscillator_length();
        Self { x_shift: 0.0, x_scale: l, p_shift: 0.0, p_scale: cfg.hbar / l }
    }

    pub fn to_scaled(&self, (x, p): (f64, f64)) -> (f64, f64) {
        ((x - self.x_shift) / self.x_scale, (p - self.p_shift) / self.p_scale)
    }

    pub fn physical_grid(&self, w: [f64; 4], nx: usize, np: usize) -> Result<PhaseSpaceGrid> {
        PhaseSpaceGrid::new(
            self.x_shift + self.x_scale * w[0],
            self.x_shift + self.x_scale * w[1],
            self.p_shift + self.p_scale * w[2],
            self.p_shift + self.p_scale * w[3],
            nx,
            np,
        )
    }

    /// Same values, relabelled on the scaled window.
    pub fn scaled_field(&self, f: &ScalarField) -> ScalarField {
        let g = f.grid;
        let (x_min, p_min) = self.to_scaled((g.x_min, g.p_min));
        let (x_max, p_max) = self.to_scaled((g.x_max, g.p_max));
        ScalarField {
            grid: PhaseSpaceGrid { x_min, x_max, p_min, p_max, nx: g.nx, np: g.np },
            values: f.values.clone(),
        }
    }

    pub fn scaled_polylines(&self, ps: &[Polyline]) -> Vec<Polyline> {
        ps.iter().map(|p| p.map(|q| self.to_scaled(q))).collect()
    }
}

/// Everything computed for one state on one window, in scaled coordinates.
#[derive(Debug, Clone)]
pub struct PhaseSpaceStudy {
    pub wigner: ScalarField,
    pub imag_residue: f64,
    pub fermi: ScalarField,
    /// Physical-unit branch data.
    pub curve: FermiCurve,
    pub fermi_zero: Vec<Polyline>,
    pub contours: Vec<Polyline>,
    pub w_max: f64,
    pub level: f64,
    pub hausdorff: f64,
    /// Larger side of a scaled grid cell.
    pub cell: f64,
}

impl PhaseSpaceStudy {
    pub fn hausdorff_cells(&self) -> f64 {
        self.hausdorff / self.cell
    }

    pub fn fermi_area(&self) -> f64 {
        self.fermi_zero.iter().filter_map(|p| enclosed_area(p).ok()).sum()
    }

    pub fn contour_area(&self) -> f64 {
        self.contours.iter().filter(|p| p.closed).filter_map(|p| enclosed_area(p).ok()).sum()
    }

    fn metrics(&self, m: &mut Metrics) {
        m.num("w_max", self.w_max)
            .num("w_min", self.wigner.min())
            .num("contour_level", self.level)
            .num("wigner_imag_residue", self.imag_residue)
            .num("wigner_total_integral", crate::wigner::total_integral(&self.wigner))
            .text("fermi_zero_polylines", self.fermi_zero.len())
            .text("contour_polylines", self.contours.len())
            .text("real_segments", self.curve.real_segments().len())
            .num("fermi_zero_area", self.fermi_area())
            .num("contour_area", self.contour_area())
            .num("grid_cell", self.cell)
            .num("hausdorff", self.hausdorff)
            .num("hausdorff_cells", self.hausdorff_cells());
    }

    fn files(&self, prefix: &str, format: Format) -> Vec<(String, String)> {
        vec![
            (format!("{prefix}_wigner.dat"), write_field(&self.wigner, format)),
            (format!("{prefix}_fermi.dat"), write_field(&self.fermi, format)),
            (format!("{prefix}_fermi_zero.txt"), write_polylines(&self.fermi_zero, 0.0)),
            (format!("{prefix}_wigner_contour.txt"), write_polylines(&self.contours, self.level)),
            (format!("{prefix}_branches.txt"), write_curve(&self.curve)),
        ]
    }
}

/// Shared pipeline: Wigner transform, Fermi field and branches, W contour at
/// `level_fraction · W_max`, Hausdorff distance in scaled units.
#[allow(clippy::too_many_arguments)]
fn study(
    psi: &SampledWavefunction,
    eval: &impl PolarEvaluator,
    cfg: &PhysConfig,
    scaling: Scaling,
    window: [f64; 4],
    grid: (usize, usize),
    samples: usize,
    level_fraction: f64,
) -> Result<PhaseSpaceStudy> {
    let phys_grid = scaling.physical_grid(window, grid.0, grid.1)?;
    let wt = wigner_transform(psi, &phys_grid, cfg)?;
    let fermi = fermi_field(eval, &phys_grid, cfg);
    let xs: Vec<f64> = (0..samples)
        .map(|k| phys_grid.x_min + (phys_grid.x_max - phys_grid.x_min) * k as f64 / (samples - 1) as f64)
        .collect();
    let curve = fermi_branches(eval, &xs, cfg);

    let wigner = scaling.scaled_field(&wt.field);
    let w_max = wigner.max();
    let level = level_fraction * w_max;
    let contours = extract_level_set(&wigner, level);
    let fermi_zero = scaling.scaled_polylines(&branch_closure(&curve));
    let cell = wigner.grid.cell();
    let hausdorff = hausdorff_sets(&fermi_zero, &contours, 0.5 * wigner.grid.finest_cell());
    Ok(PhaseSpaceStudy {
        fermi: scaling.scaled_field(&fermi),
        wigner,
        imag_residue: wt.max_imag_residue,
        curve,
        fermi_zero,
        contours,
        w_max,
        level,
        hausdorff,
        cell,
    })
}

/// Native sampling of an analytic packet wide enough for its support and
/// fine enough for its local momenta `p0 + ħθ'(u)/δ` over `|u| <= 5.5`.
pub fn packet_samples(
    packet: &AnalyticPacket,
    cfg: &PhysConfig,
    window: [f64; 4],
    psi_points: Option<usize>,
) -> Result<SampledWavefunction> {
    let half = 9f64.max(window[0].abs().max(window[1].abs()) + 3.0);
    let theta = crate::numerics::Poly::new(packet.phase_poly().to_vec());
    let slope = (0..=1100)
        .map(|k| theta.eval_derivs(-5.5 + 0.01 * k as f64)[1].abs())
        .fold(0.0, f64::max);
    let carrier = packet.p0().abs() * packet.delta() / cfg.hbar;
    let p_needed = carrier + (window[2].abs().max(window[3].abs())).max(slope + 8.0);
    let n = psi_points.unwrap_or_else(|| (2.0 * half * 1.5 * p_needed / PI).ceil() as usize + 1);
    let dx = 2.0 * half * packet.delta() / (n - 1) as f64;
    packet.sample(cfg, packet.x0() - half * packet.delta(), dx, n, false)
}

pub fn study_packet(
    packet: &AnalyticPacket,
    cfg: &PhysConfig,
    window: [f64; 4],
    grid: (usize, usize),
    samples: usize,
    level_fraction: f64,
    psi_points: Option<usize>,
) -> Result<PhaseSpaceStudy> {
    let psi = packet_samples(packet, cfg, window, psi_points)?;
    let scaling = Scaling::packet(packet.x0(), packet.p0(), packet.delta(), cfg);
    study(&psi, &packet.evaluator(*cfg), cfg, scaling, window, grid, samples, level_fraction)
}

fn packet_from(rc: &RunConfig, amp: Vec<f64>, phase: Vec<f64>) -> Result<AnalyticPacket> {
    AnalyticPacket::new(rc.x0, rc.p0, rc.delta, amp, phase)
}

pub fn study_fig1(rc: &RunConfig) -> Result<PhaseSpaceStudy> {
    let row = rc.row.unwrap_or(1);
    let phase = fig1_phase(row).ok_or_else(|| Error::Contract(format!("row {row} out of range")))?;
    let packet = packet_from(rc, Vec::new(), phase)?;
    let window = rc.window.unwrap_or([-6.0, 6.0, -6.0, 6.0]);
    study_packet(&packet, &rc.phys, window, rc.grid, rc.samples, (-1.0f64).exp(), rc.psi_points)
}

/// Fig. 2 results: the shared study plus wave-function maxima.
#[derive(Debug, Clone)]
pub struct Fig2Study {
    pub study: PhaseSpaceStudy,
    /// Scaled positions of the local maxima of `R`.
    pub maxima: Vec<f64>,
}

pub fn fig2_packet(rc: &RunConfig) -> Result<AnalyticPacket> {
    let a = rc.a.unwrap_or(1.0);
    packet_from(rc, vec![0.0, 0.0, a], rc.phase.clone())
}

pub fn study_fig2(rc: &RunConfig) -> Result<Fig2Study> {
    let packet = fig2_packet(rc)?;
    let window = rc.window.unwrap_or([-4.0, 4.0, -4.0, 4.0]);
    let study = study_packet(&packet, &rc.phys, window, rc.grid, rc.samples, (-1.0f64).exp(), rc.psi_points)?;
    let maxima = amplitude_maxima(&packet, window[0], window[1]);
    Ok(Fig2Study { study, maxima })
}

/// Local maxima of `R(x̃)` on the scaled interval, refined by a parabola
/// through the three samples around each discrete maximum.
pub fn amplitude_maxima(packet: &AnalyticPacket, lo: f64, hi: f64) -> Vec<f64> {
    let n = 8001;
    let h = (hi - lo) / (n - 1) as f64;
    let r: Vec<f64> = (0..n)
        .map(|k| packet.amplitude(packet.x0() + packet.delta() * (lo + k as f64 * h)))
        .collect();
    let top = r.iter().copied().fold(0.0, f64::max);
    let mut out = Vec::new();
    for k in 1..n - 1 {
        if r[k] > r[k - 1] && r[k] >= r[k + 1] && r[k] > 1e-3 * top {
            let denom = r[k - 1] - 2.0 * r[k] + r[k + 1];
            let shift = if denom != 0.0 { 0.5 * (r[k - 1] - r[k + 1]) / denom } else { 0.0 };
            out.push(lo + (k as f64 + shift) * h);
        }
    }
    out
}

/// One Fig. 3 snapshot.
#[derive(Debug, Clone)]
pub struct Fig3Snapshot {
    pub t_over_period: f64,
    pub state: FockState,
    pub norm: f64,
    pub energy: f64,
    pub study: PhaseSpaceStudy,
}

pub fn quartic_params(rc: &RunConfig) -> Result<QuarticParams> {
    QuarticParams::new(rc.phys, rc.lambda_ratio * rc.phys.omega, rc.alpha(), None)
}

/// Native position grid for a Fock-space state, in physical units.
pub fn quartic_samples(state: &FockState, params: &QuarticParams, window: [f64; 4], psi_points: Option<usize>) -> Result<SampledWavefunction> {
    let cfg = &params.cfg;
    let l = cfg.oscillator_length();
    let reach = (2.0 * params.n_max as f64 + 1.0).sqrt();
    let half = (2f64.sqrt() * params.alpha.norm() + 10.0).max(window[0].abs().max(window[1].abs()) + 2.0);
    let p_needed = window[2].abs().max(window[3].abs()).max(reach);
    let dxs = (PI / (1.5 * p_needed)).min(0.05);
    let n = psi_points.unwrap_or_else(|| (2.0 * half / dxs).ceil() as usize + 1);
    let dx = 2.0 * half * l / (n - 1) as f64;
    fock_to_position(state, cfg, -half * l, dx, n)
}

pub fn study_fig3(rc: &RunConfig) -> Result<Vec<Fig3Snapshot>> {
    let params = quartic_params(rc)?;
    let window = rc.window.unwrap_or([-10.0, 10.0, -10.0, 10.0]);
    let scaling = Scaling::oscillator(&rc.phys);
    let initial = params.initial_state();
    rc.times
        .iter()
        .map(|&tt| {
            let state = evolve(&initial, &params, tt * params.period());
            let psi = quartic_samples(&state, &params, window, rc.psi_points)?;
            let eval = QuarticEvaluator::new(state.clone(), rc.phys);
            let study = study(&psi, &eval, &rc.phys, scaling, window, rc.grid, rc.samples, (-1.0f64).exp())?;
            Ok(Fig3Snapshot {
                t_over_period: tt,
                norm: state.norm_sqr(),
                energy: state.energy(&params),
                state,
                study,
            })
        })
        .collect()
}

pub fn study_compare(rc: &RunConfig) -> Result<PhaseSpaceStudy> {
    let packet = packet_from(rc, rc.amp.clone(), rc.phase.clone())?;
    let window = rc.window.unwrap_or([-6.0, 6.0, -6.0, 6.0]);
    study_packet(&packet, &rc.phys, window, rc.grid, rc.samples, rc.level, rc.psi_points)
}

/// Reconstruction from a branch file, with optional reference fidelity.
#[derive(Debug, Clone)]
pub struct ReconstructStudy {
    pub psi: SampledWavefunction,
    pub imag_residue: f64,
    pub fidelity: Option<f64>,
}

pub fn study_reconstruct(rc: &RunConfig, curve_text: &str) -> Result<ReconstructStudy> {
    let curve = read_curve(curve_text)?;
    let rec = reconstruct_polar(&curve);
    let psi = reconstruct_wavefunction(&rec.x, &rec.sprime, &rec.curvature, None, curve.hbar)?;
    let fidelity = if rc.reference {
        let packet = packet_from(rc, rc.amp.clone(), rc.phase.clone())?;
        let cfg = PhysConfig { hbar: curve.hbar, ..rc.phys };
        let reference = packet.sample(&cfg, psi.x_min, psi.dx, psi.len(), false)?;
        Some(psi.fidelity(&reference)?)
    } else {
        None
    };
    Ok(ReconstructStudy { psi, imag_residue: rec.max_imag_residue, fidelity })
}

/// Named output files of one command.
#[derive(Debug, Clone, Default)]
pub struct Output {
    pub files: Vec<(String, String)>,
}

pub fn execute(rc: &RunConfig) -> std::result::Result<Output, CliError> {
    let mut files = Vec::new();
    match rc.command {
        CommandName::Fig1 => {
            let row = rc.row.unwrap_or(1);
            let s = study_fig1(rc)?;
            let prefix = format!("fig1_row{row}");
            let mut m = Metrics::default();
            m.text("command", "fig1").text("row", row).list("phase_poly", &fig1_phase(row).unwrap_or_default());
            s.metrics(&mut m);
            files.extend(s.files(&prefix, rc.format));
            files.push((format!("{prefix}_metrics.txt"), m.render()));
        }
        CommandName::Fig2 => {
            let a = rc.a.unwrap_or(1.0);
            let s = study_fig2(rc)?;
            let prefix = format!("fig2_a{a}");
            let mut m = Metrics::default();
            m.text("command", "fig2").num("a", a);
            s.study.metrics(&mut m);
            m.text("maxima_count", s.maxima.len()).list("maxima", &s.maxima);
            if a > 0.5 {
                m.num("maxima_expected_abs", (2.0 - 1.0 / a).sqrt());
            }
            files.extend(s.study.files(&prefix, rc.format));
            files.push((format!("{prefix}_metrics.txt"), m.render()));
        }
        CommandName::Fig3 => {
            let snaps = study_fig3(rc)?;
            let params = quartic_params(rc)?;
            let mut summary = Metrics::default();
            summary.text("command", "fig3").num("lambda_over_omega", rc.lambda_ratio).num("alpha_re", params.alpha.re).num("alpha_im", params.alpha.im).text("n_max", params.n_max);
            let norms: Vec<f64> = snaps.iter().map(|s| s.norm).collect();
            let energies: Vec<f64> = snaps.iter().map(|s| s.energy).collect();
            summary.list("times", &rc.times).list("norms", &norms).list("energies", &energies);
            summary.num("norm_drift", drift(&norms)).num("energy_drift", drift(&energies));
            for s in &snaps {
                let prefix = format!("fig3_t{}", s.t_over_period);
                let mut m = Metrics::default();
                m.text("command", "fig3").num("t_over_period", s.t_over_period).num("norm", s.norm).num("energy", s.energy);
                s.study.metrics(&mut m);
                let segs: Vec<f64> = s
                    .study
                    .curve
                    .real_segments()
                    .iter()
                    .flat_map(|r| [s.study.curve.x[r.start], s.study.curve.x[r.end - 1]])
                    .collect();
                m.list("real_segment_bounds", &segs);
                files.extend(s.study.files(&prefix, rc.format));
                files.push((format!("{prefix}_metrics.txt"), m.render()));
            }
            files.push(("fig3_conservation.txt".to_string(), summary.render()));
        }
        CommandName::Compare => {
            let s = study_compare(rc)?;
            let mut m = Metrics::default();
            m.text("command", "compare").list("amp_poly", &rc.amp).list("phase_poly", &rc.phase).num("level_fraction", rc.level);
            s.metrics(&mut m);
            files.extend(s.files("compare", rc.format));
            files.push(("compare_metrics.txt".to_string(), m.render()));
        }
        CommandName::Reconstruct => {
            let path = rc.input.as_ref().expect("validated");
            let text = std::fs::read_to_string(path).map_err(Error::from)?;
            let s = study_reconstruct(rc, &text)?;
            let mut m = Metrics::default();
            m.text("command", "reconstruct").text("samples", s.psi.len()).num("imag_residue", s.imag_residue).num("norm", s.psi.norm_sqr());
            if let Some(f) = s.fidelity {
                m.num("fidelity", f);
            }
            files.push(("reconstruct_psi.txt".to_string(), write_wavefunction(&s.psi)));
            files.push(("reconstruct_metrics.txt".to_string(), m.render()));
        }
    }
    Ok(Output { files })
}

fn drift(vs: &[f64]) -> f64 {
    let first = vs.first().copied().unwrap_or(0.0);
    vs.iter().map(|v| (v - first).abs()).fold(0.0, f64::max)
}

