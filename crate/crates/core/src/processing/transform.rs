use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use super::{Fid2D, Quadrature, Spectrum2D};
use crate::error::{Error, Result};
use crate::par::{self, Exec};

/// How the final real spectrum is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Output {
    /// Real–real quadrant of the hypercomplex spectrum (phase sensitive).
    #[default]
    Real,
    /// Root of the summed squares of all four quadrants.
    Magnitude,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformParams {
    pub zf1: usize,
    pub zf2: usize,
    /// Phases in degrees; first order is per full spectral width.
    pub phase0_1: f64,
    pub phase1_1: f64,
    pub phase0_2: f64,
    pub phase1_2: f64,
    /// Scale applied to the first point along each time axis.
    pub first_point: f64,
    pub output: Output,
    pub exec: Exec,
}

impl Default for TransformParams {
    fn default() -> Self {
        TransformParams {
            zf1: 256,
            zf2: 1024,
            phase0_1: 0.0,
            phase1_1: 0.0,
            phase0_2: 0.0,
            phase1_2: 0.0,
            first_point: 0.5,
            output: Output::Real,
            exec: Exec::Parallel,
        }
    }
}

/// Frequency of each point after an fftshift: −sw/2, …, sw/2 − sw/n.
pub fn axis(sw_hz: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| -sw_hz / 2.0 + i as f64 * sw_hz / n as f64).collect()
}

/// Hz per point.
pub fn digital_resolution(sw_hz: f64, zf: usize) -> f64 {
    sw_hz / zf as f64
}

/// Linewidth limit set by truncation, 1/(2·aq).
pub fn natural_resolution(aq_s: f64) -> f64 {
    1.0 / (2.0 * aq_s)
}

fn phase_factors(ph0_deg: f64, ph1_deg: f64, sw_hz: f64, n: usize) -> Vec<C64> {
    axis(sw_hz, n).into_iter().map(|f| C64::from_polar(1.0, (ph0_deg + ph1_deg * f / sw_hz).to_radians())).collect()
}

/// Unitary forward DFT of `input` zero-filled to `n`, with the zero
/// frequency moved to index n/2.
fn fft_shifted(fft: &Arc<dyn Fft<f64>>, input: impl Iterator<Item = C64>, n: usize) -> Vec<C64> {
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for (dst, v) in buf.iter_mut().zip(input) {
        *dst = v;
    }
    fft.process(&mut buf);
    let norm = 1.0 / (n as f64).sqrt();
    buf.rotate_right(n / 2);
    buf.iter_mut().for_each(|v| *v *= norm);
    buf
}

/// Unitary 2D DFT with both axes shifted, no zero-filling or scaling.
pub fn fft2(data: &Array2<C64>) -> Array2<C64> {
    let (n1, n2) = data.dim();
    let mut planner = FftPlanner::new();
    let f1 = planner.plan_fft_forward(n1);
    let f2 = planner.plan_fft_forward(n2);
    let mut out = Array2::zeros((n1, n2));
    for (i, row) in data.outer_iter().enumerate() {
        for (j, v) in fft_shifted(&f2, row.iter().copied(), n2).into_iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    for j in 0..n2 {
        let col = fft_shifted(&f1, out.column(j).to_vec().into_iter(), n1);
        for (i, v) in col.into_iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    out
}

/// F2 spectra of both components for every t₁ increment, phased in F2.
fn f2_stage(fid: &Fid2D, p: &TransformParams) -> Vec<[Vec<C64>; 2]> {
    let fft = FftPlanner::new().plan_fft_forward(p.zf2);
    let ph = phase_factors(p.phase0_2, p.phase1_2, fid.sw2_hz, p.zf2);
    par::map_indexed(p.exec, fid.n_t1(), |k| {
        let one = |c: usize| {
            let row = fid.data.slice(ndarray::s![k, c, ..]);
            let scaled = row.iter().enumerate().map(|(j, v)| if j == 0 { v * p.first_point } else { *v });
            let mut s = fft_shifted(&fft, scaled, p.zf2);
            s.iter_mut().zip(&ph).for_each(|(v, f)| *v *= f);
            s
        };
        [one(0), one(1)]
    })
}

/// Interferograms along t₁ whose F1 transform gives the real (index 0) and
/// imaginary (index 1) F2 halves of the hypercomplex spectrum.
fn t1_interferograms(fid: &Fid2D, rows: &[[Vec<C64>; 2]], zf2: usize) -> [Array2<C64>; 2] {
    let n1 = fid.n_t1();
    let mut z = [Array2::zeros((n1, zf2)), Array2::zeros((n1, zf2))];
    let i = C64::new(0.0, 1.0);
    for (k, [a, b]) in rows.iter().enumerate() {
        for j in 0..zf2 {
            // cosine- and sine-modulated complex F2 spectra
            let (c, s) = match fid.quadrature {
                Quadrature::States => (a[j], b[j]),
                Quadrature::EchoAntiecho => (a[j] + b[j], -i * (a[j] - b[j])),
            };
            z[0][(k, j)] = C64::new(c.re, s.re);
            z[1][(k, j)] = C64::new(c.im, s.im);
        }
    }
    z
}

fn f1_stage(z: &Array2<C64>, p: &TransformParams, sw1: f64) -> Array2<C64> {
    let (n1, n2) = z.dim();
    let fft = FftPlanner::new().plan_fft_forward(p.zf1);
    let ph = phase_factors(p.phase0_1, p.phase1_1, sw1, p.zf1);
    let cols = par::map_indexed(p.exec, n2, |j| {
        let col = (0..n1).map(|k| if k == 0 { z[(k, j)] * p.first_point } else { z[(k, j)] });
        let mut s = fft_shifted(&fft, col, p.zf1);
        s.iter_mut().zip(&ph).for_each(|(v, f)| *v *= f);
        s
    });
    let mut out = Array2::zeros((p.zf1, n2));
    for (j, col) in cols.into_iter().enumerate() {
        for (i, v) in col.into_iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    out
}

fn check(fid: &Fid2D, p: &TransformParams) -> Result<()> {
    for (zf, n, name) in [(p.zf1, fid.n_t1(), "zf1"), (p.zf2, fid.n_t2(), "zf2")] {
        if !zf.is_power_of_two() || zf < n {
            return Err(Error::validation(format!(
                "{name} = {zf} must be a power of two no smaller than {n} acquired points"
            )));
        }
    }
    Ok(())
}

/// Zero-fills, Fourier transforms and phases a 2D data set.
pub fn transform(fid: &Fid2D, p: &TransformParams) -> Result<Spectrum2D> {
    check(fid, p)?;
    let rows = f2_stage(fid, p);
    let [z_re, z_im] = t1_interferograms(fid, &rows, p.zf2);
    let rr = f1_stage(&z_re, p, fid.sw1_hz);
    let data = match p.output {
        Output::Real => rr.mapv(|v| v.re),
        Output::Magnitude => {
            let ri = f1_stage(&z_im, p, fid.sw1_hz);
            ndarray::Zip::from(&rr).and(&ri).map_collect(|a, b| (a.norm_sqr() + b.norm_sqr()).sqrt())
        }
    };
    let mut spec = Spectrum2D::new(data, fid.sw1_hz, fid.sw2_hz);
    spec.provenance = vec![
        ("quadrature".into(), fid.quadrature.name().into()),
        ("zf1".into(), p.zf1.to_string()),
        ("zf2".into(), p.zf2.to_string()),
        ("phase0_1".into(), p.phase0_1.to_string()),
        ("phase1_1".into(), p.phase1_1.to_string()),
        ("phase0_2".into(), p.phase0_2.to_string()),
        ("phase1_2".into(), p.phase1_2.to_string()),
        ("first_point".into(), p.first_point.to_string()),
        (
            "output".into(),
            match p.output {
                Output::Real => "real".into(),
                Output::Magnitude => "magnitude".into(),
            },
        ),
    ];
    Ok(spec)
}

/// Sharpness score: absorptive lines maximise Σ v⁴ over their real parts.
fn sharpness<'a>(values: impl Iterator<Item = &'a C64>, phase_deg: f64) -> f64 {
    let f = C64::from_polar(1.0, phase_deg.to_radians());
    values.map(|v| (v * f).re.powi(4)).sum()
}

fn best_phase(score: impl Fn(f64) -> f64) -> f64 {
    let mut best = (0.0, f64::NEG_INFINITY);
    for step in 0..180 {
        let ph = step as f64;
        let s = score(ph);
        if s > best.1 {
            best = (ph, s);
        }
    }
    let (mut lo, mut hi) = (best.0 - 1.0, best.0 + 1.0);
    // golden-section refinement within one degree
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..40 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if score(a) > score(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    (lo + hi) / 2.0
}

/// Zero-order phases (F1, F2) in degrees that make lines absorptive.
/// Determined only up to 180°, so the overall sign is arbitrary.
pub fn auto_phase0(fid: &Fid2D, p: &TransformParams) -> Result<(f64, f64)> {
    check(fid, p)?;
    let base = TransformParams { phase0_1: 0.0, phase0_2: 0.0, ..*p };
    let rows = f2_stage(fid, &base);
    let ph2 = best_phase(|ph| rows.iter().map(|[a, b]| sharpness(a.iter().chain(b.iter()), ph)).sum());
    let f = C64::from_polar(1.0, ph2.to_radians());
    let phased: Vec<[Vec<C64>; 2]> = rows
        .into_iter()
        .map(|[a, b]| [a.into_iter().map(|v| v * f).collect(), b.into_iter().map(|v| v * f).collect()])
        .collect();
    let [z_re, _] = t1_interferograms(fid, &phased, p.zf2);
    let rr = f1_stage(&z_re, &base, fid.sw1_hz);
    let ph1 = best_phase(|ph| sharpness(rr.iter(), ph));
    Ok((ph1, ph2))
}
