//! File formats for states, operators, phase vectors, pulse programs,
//! tabular data, plots, and run manifests.
//!
//! Conventions:
//! * State JSON: `{"dim": N, "re": [...], "im": [...]}` (Fock amplitudes).
//! * Density JSON: same keys with row-major matrix entries.
//! * Phase vectors: a bare JSON array of radians.
//! * Pulse programs: widths in ns, Rabi rates as (Omega / 2 pi) in MHz,
//!   axes in degrees — the units hardware control stacks expect.
//! * CSV: first line is the header; numbers use shortest-roundtrip format.
//! * SVG plots are self-contained, no external assets.
//! * Manifests carry no timestamps so identical runs produce identical bytes.

use std::io::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::analysis::wigner::WignerGrid;
use crate::error::{Result, SimError};
use crate::fock::{CavityState, DensityMatrix, C64};
use crate::pulse::SnapPulseProgram;
use crate::snap::PhaseVector;

#[derive(Serialize, Deserialize)]
struct ComplexBlob {
    dim: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| SimError::Config(format!("serialize {}: {e}", path.display())))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| SimError::Config(format!("parse {}: {e}", path.display())))
}

/// Save a cavity state's Fock amplitudes.
pub fn save_state_json(path: &Path, state: &CavityState) -> Result<()> {
    let blob = ComplexBlob {
        dim: state.dim(),
        re: state.amplitudes().iter().map(|c| c.re).collect(),
        im: state.amplitudes().iter().map(|c| c.im).collect(),
    };
    write_json(path, &blob)
}

/// Load a cavity state; the amplitudes must be normalized to within the
/// usual guard.
pub fn load_state_json(path: &Path) -> Result<CavityState> {
    let blob: ComplexBlob = read_json(path)?;
    if blob.re.len() != blob.dim || blob.im.len() != blob.dim {
        return Err(SimError::DimensionMismatch {
            left: blob.dim,
            right: blob.re.len().max(blob.im.len()),
        });
    }
    let amp: Vec<C64> = blob
        .re
        .iter()
        .zip(&blob.im)
        .map(|(&r, &i)| C64::new(r, i))
        .collect();
    CavityState::from_amplitudes(amp)
}

/// Save a density matrix row-major.
pub fn save_density_json(path: &Path, rho: &DensityMatrix) -> Result<()> {
    let dim = rho.dim();
    let mut re = Vec::with_capacity(dim * dim);
    let mut im = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let c = rho.matrix()[(i, j)];
            re.push(c.re);
            im.push(c.im);
        }
    }
    write_json(path, &ComplexBlob { dim, re, im })
}

/// Load a density matrix (validated on construction).
pub fn load_density_json(path: &Path) -> Result<DensityMatrix> {
    let blob: ComplexBlob = read_json(path)?;
    let n = blob.dim;
    if blob.re.len() != n * n || blob.im.len() != n * n {
        return Err(SimError::DimensionMismatch {
            left: n * n,
            right: blob.re.len().max(blob.im.len()),
        });
    }
    let mat = DMatrix::<C64>::from_fn(n, n, |i, j| {
        C64::new(blob.re[i * n + j], blob.im[i * n + j])
    });
    DensityMatrix::new(mat)
}

/// Save a phase vector as a bare JSON array of radians.
pub fn save_phases_json(path: &Path, phases: &PhaseVector) -> Result<()> {
    write_json(path, &phases.as_slice().to_vec())
}

/// Load a phase vector (values are canonically wrapped on construction).
pub fn load_phases_json(path: &Path) -> Result<PhaseVector> {
    let raw: Vec<f64> = read_json(path)?;
    Ok(PhaseVector::new(raw))
}

#[derive(Serialize, Deserialize)]
struct ToneJson {
    n_target: usize,
    axis_deg: f64,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
struct PulseJson {
    start_ns: f64,
    sigma_ns: f64,
    duration_ns: f64,
    omega_over_2pi_mhz: f64,
    tones: Vec<ToneJson>,
}

#[derive(Serialize, Deserialize)]
struct ProgramJson {
    total_duration_ns: f64,
    warnings: Vec<String>,
    pulses: Vec<PulseJson>,
}

/// Save a pulse program in hardware-facing units.
pub fn save_pulse_program_json(path: &Path, program: &SnapPulseProgram) -> Result<()> {
    let pulses = program
        .pulses
        .iter()
        .map(|p| PulseJson {
            start_ns: p.start * 1e9,
            sigma_ns: p.sigma * 1e9,
            duration_ns: p.duration() * 1e9,
            omega_over_2pi_mhz: p.omega / (2.0 * std::f64::consts::PI) / 1e6,
            tones: p
                .tones
                .iter()
                .map(|t| ToneJson {
                    n_target: t.n_target,
                    axis_deg: t.axis.to_degrees(),
                    weight: t.weight,
                })
                .collect(),
        })
        .collect();
    write_json(
        path,
        &ProgramJson {
            total_duration_ns: program.total_duration() * 1e9,
            warnings: program.warnings.clone(),
            pulses,
        },
    )
}

/// Write a CSV table; `rows` entries must match the header length.
pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        if row.len() != header.len() {
            return Err(SimError::DimensionMismatch {
                left: header.len(),
                right: row.len(),
            });
        }
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// One labelled line of a plot.
pub struct Series<'a> {
    pub label: &'a str,
    pub points: &'a [(f64, f64)],
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];
const PLOT_W: f64 = 640.0;
const PLOT_H: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;

fn nice_num(v: f64) -> String {
    format!("{v:.4}")
        .trim_end_matches('0')
        .trim_end_matches('.')
        .to_string()
}

/// Minimal self-contained SVG line plot.
pub fn svg_line_plot(
    path: &Path,
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
) -> Result<()> {
    if series.iter().all(|s| s.points.is_empty()) {
        return Err(SimError::Domain("nothing to plot".into()));
    }
    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 - x0 < 1e-300 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-300 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pad_y = 0.05 * (y1 - y0);
    y0 -= pad_y;
    y1 += pad_y;
    let px = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * (PLOT_W - MARGIN_L - MARGIN_R);
    let py = |y: f64| PLOT_H - MARGIN_B - (y - y0) / (y1 - y0) * (PLOT_H - MARGIN_T - MARGIN_B);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{PLOT_W}\" height=\"{PLOT_H}\" \
         viewBox=\"0 0 {PLOT_W} {PLOT_H}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{PLOT_W}\" height=\"{PLOT_H}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        PLOT_W / 2.0,
        title
    ));
    // axes
    svg.push_str(&format!(
        "<line x1=\"{l}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{l}\" y1=\"{t}\" x2=\"{l}\" y2=\"{b}\" stroke=\"black\"/>\n",
        l = MARGIN_L,
        r = PLOT_W - MARGIN_R,
        t = MARGIN_T,
        b = PLOT_H - MARGIN_B
    ));
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            px(fx),
            PLOT_H - MARGIN_B + 18.0,
            nice_num(fx)
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            MARGIN_L - 6.0,
            py(fy) + 4.0,
            nice_num(fy)
        ));
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{}\" x2=\"{:.1}\" y2=\"{}\" stroke=\"#cccccc\"/>\n",
            px(fx),
            MARGIN_T,
            px(fx),
            PLOT_H - MARGIN_B
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        (MARGIN_L + PLOT_W - MARGIN_R) / 2.0,
        PLOT_H - 12.0,
        x_label
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        (MARGIN_T + PLOT_H - MARGIN_B) / 2.0,
        (MARGIN_T + PLOT_H - MARGIN_B) / 2.0,
        y_label
    ));
    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            color,
            pts.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n",
            PLOT_W - MARGIN_R - 150.0,
            MARGIN_T + 16.0 * idx as f64 + 4.0,
            color,
            s.label
        ));
    }
    svg.push_str("</svg>\n");
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, svg)?;
    Ok(())
}

fn diverging_color(w: f64, vmax: f64) -> String {
    let t = (w / vmax).clamp(-1.0, 1.0);
    let (r, g, b) = if t >= 0.0 {
        // white -> red
        (
            255.0 - t * (255.0 - 178.0),
            255.0 - t * (255.0 - 24.0),
            255.0 - t * (255.0 - 43.0),
        )
    } else {
        // white -> blue
        (
            255.0 + t * (255.0 - 33.0),
            255.0 + t * (255.0 - 102.0),
            255.0 + t * (255.0 - 172.0),
        )
    };
    format!("rgb({},{},{})", r as u8, g as u8, b as u8)
}

/// Minimal SVG heatmap of a Wigner map (diverging palette, symmetric about
/// zero; red positive, blue negative).
pub fn svg_heatmap(path: &Path, title: &str, grid: &WignerGrid) -> Result<()> {
    let n_x = grid.spec.n_x();
    let n_p = grid.spec.n_p();
    let vmax = grid.values.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    if vmax <= 0.0 {
        return Err(SimError::Domain("heatmap of an all-zero grid".into()));
    }
    let cell_w = (PLOT_W - MARGIN_L - MARGIN_R) / n_x as f64;
    let cell_h = (PLOT_H - MARGIN_T - MARGIN_B) / n_p as f64;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{PLOT_W}\" height=\"{PLOT_H}\" \
         viewBox=\"0 0 {PLOT_W} {PLOT_H}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{PLOT_W}\" height=\"{PLOT_H}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        PLOT_W / 2.0,
        title
    ));
    for ip in 0..n_p {
        for ix in 0..n_x {
            let w = grid.value(ix, ip);
            let x = MARGIN_L + ix as f64 * cell_w;
            // momentum increases upward
            let y = PLOT_H - MARGIN_B - (ip + 1) as f64 * cell_h;
            svg.push_str(&format!(
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>\n",
                cell_w + 0.5,
                cell_h + 0.5,
                diverging_color(w, vmax)
            ));
        }
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">Re(alpha): {} to {}</text>\n",
        PLOT_W / 2.0,
        PLOT_H - 12.0,
        nice_num(grid.spec.x_min),
        nice_num(grid.spec.x_max)
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{y}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {y})\">Im(alpha): {} to {}</text>\n",
        nice_num(grid.spec.p_min),
        nice_num(grid.spec.p_max),
        y = PLOT_H / 2.0,
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\">peak |W| = {}</text>\n",
        MARGIN_L,
        MARGIN_T - 6.0,
        nice_num(vmax)
    ));
    svg.push_str("</svg>\n");
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, svg)?;
    Ok(())
}

/// Run manifest written next to every command's artifacts. Contains no
/// timestamps or machine identifiers: reruns with the same inputs produce
/// byte-identical manifests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub label: String,
    pub mode: String,
    pub execution: String,
    pub dim: usize,
    pub seed: Option<u64>,
    pub artifacts: Vec<String>,
    pub results: serde_json::Value,
    pub warnings: Vec<String>,
}

impl Manifest {
    /// Write `manifest.json` inside `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join("manifest.json"), self)
    }
}

/// Convenience: a state vector from a possibly-unnormalized amplitude list
/// (used by tests and presets).
pub fn state_from_components(re_im: &[(f64, f64)]) -> Result<CavityState> {
    let amp: Vec<C64> = re_im.iter().map(|&(r, i)| C64::new(r, i)).collect();
    CavityState::from_unnormalized(DVector::from_vec(amp))
}
