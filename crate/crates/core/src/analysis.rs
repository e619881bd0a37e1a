//! Peak picking, multiplet lineshape classification and diagonal
//! suppression reports.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::processing::Spectrum2D;

/// Homonuclear coupling assumed when none is declared.
pub const DEFAULT_J_HH_HZ: f64 = 7.0;

/// Multiplet grouping window as a multiple of the declared J_HH.
pub const GROUP_WINDOW_FACTOR: f64 = 1.5;

/// Relative amplitude floor used when a diagonal vanishes entirely.
pub const AMPLITUDE_FLOOR: f64 = 1e-12;

/// Components weaker than this fraction of a multiplet's strongest one
/// (truncation and window side lobes) are kept in the peak but ignored when
/// reading its sign pattern.
pub const MAJOR_COMPONENT_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeakKind {
    Diagonal,
    Cross,
}

impl PeakKind {
    pub fn name(self) -> &'static str {
        match self {
            PeakKind::Diagonal => "diagonal",
            PeakKind::Cross => "cross",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lineshape {
    InphaseAbsorptive,
    AntiphaseAbsorptive,
    Dispersive,
    Mixed,
}

impl Lineshape {
    pub fn name(self) -> &'static str {
        match self {
            Lineshape::InphaseAbsorptive => "inphase_absorptive",
            Lineshape::AntiphaseAbsorptive => "antiphase_absorptive",
            Lineshape::Dispersive => "dispersive",
            Lineshape::Mixed => "mixed",
        }
    }
}

impl FromStr for Lineshape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Lineshape::InphaseAbsorptive, Lineshape::AntiphaseAbsorptive, Lineshape::Dispersive, Lineshape::Mixed]
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::validation(format!("unknown lineshape `{s}`")))
    }
}

/// One local extremum of |amplitude| belonging to a multiplet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub i: usize,
    pub j: usize,
    pub f1_hz: f64,
    pub f2_hz: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Peak {
    /// |amplitude|-weighted centre of the components.
    pub f1_hz: f64,
    pub f2_hz: f64,
    /// Signed value of the strongest component.
    pub amplitude: f64,
    /// Size of the multiplet box in points along F₁ and F₂.
    pub extent: (usize, usize),
    pub kind: PeakKind,
    pub components: Vec<Component>,
    pub lineshape: Lineshape,
    /// Why the lineshape came out as `mixed`, if it did.
    pub diagnostic: Option<String>,
}

impl Peak {
    /// Signs of the components in (F₁, F₂) order.
    pub fn multiplet_signs(&self) -> Vec<i8> {
        self.components.iter().map(|c| if c.amplitude < 0.0 { -1 } else { 1 }).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PickParams {
    /// Fraction of the spectrum's max |amplitude|, in (0, 1).
    pub threshold: f64,
    /// Half-width of the diagonal band; `None` picks
    /// [`default_diag_tol`].
    pub diag_tol_hz: Option<f64>,
    /// Declared homonuclear coupling.
    pub j_hh_hz: f64,
    /// Linking distance for multiplet components; `None` means
    /// [`GROUP_WINDOW_FACTOR`]·J.
    pub group_window_hz: Option<f64>,
}

impl Default for PickParams {
    fn default() -> Self {
        PickParams { threshold: 0.05, diag_tol_hz: None, j_hh_hz: DEFAULT_J_HH_HZ, group_window_hz: None }
    }
}

impl PickParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::validation(format!("threshold must lie in (0, 1), got {}", self.threshold)));
        }
        if let Some(t) = self.diag_tol_hz {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::validation("diagonal tolerance must be finite and non-negative"));
            }
        }
        if !(self.j_hh_hz.is_finite() && self.j_hh_hz > 0.0) {
            return Err(Error::validation("J_HH must be positive"));
        }
        if !(self.window_hz().is_finite() && self.window_hz() > 0.0) {
            return Err(Error::validation("grouping window must be positive"));
        }
        Ok(())
    }

    pub fn window_hz(&self) -> f64 {
        self.group_window_hz.unwrap_or(GROUP_WINDOW_FACTOR * self.j_hh_hz)
    }
}

/// Grouping window that still links the lobes of an antiphase doublet whose
/// splitting is below the natural linewidth 1/aq of either dimension.
pub fn group_window_for(j_hh_hz: f64, aq1_s: f64, aq2_s: f64) -> f64 {
    GROUP_WINDOW_FACTOR * j_hh_hz.max(1.0 / aq1_s).max(1.0 / aq2_s)
}

/// Twice the coarser digital resolution of the two axes.
pub fn default_diag_tol(s: &Spectrum2D) -> f64 {
    2.0 * s.f1_step.abs().max(s.f2_step.abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakTable {
    pub peaks: Vec<Peak>,
    pub diag_tol_hz: f64,
}

impl PeakTable {
    pub fn count(&self, kind: PeakKind) -> usize {
        self.peaks.iter().filter(|p| p.kind == kind).count()
    }

    /// Tab-separated rendering with a header line.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("f1_hz\tf2_hz\tamplitude\tkind\tlineshape\n");
        for p in &self.peaks {
            let _ = writeln!(
                out,
                "{:.4}\t{:.4}\t{:.6e}\t{}\t{}",
                p.f1_hz,
                p.f2_hz,
                p.amplitude,
                p.kind.name(),
                p.lineshape.name()
            );
        }
        out
    }
}

/// Picks multiplets: local maxima of |amplitude| above the threshold are
/// linked when both frequency differences fall inside the grouping window.
/// Peaks are ordered by decreasing |amplitude|.
pub fn pick_peaks(s: &Spectrum2D, params: &PickParams) -> Result<PeakTable> {
    params.validate()?;
    let (n1, n2) = s.dim();
    if n1 == 0 || n2 == 0 {
        return Err(Error::validation("spectrum is empty"));
    }
    let diag_tol_hz = params.diag_tol_hz.unwrap_or_else(|| default_diag_tol(s));
    let max = s.max_abs();
    if max == 0.0 {
        return Ok(PeakTable { peaks: Vec::new(), diag_tol_hz });
    }
    let extrema = local_extrema(s, params.threshold * max);
    let w = params.window_hz();
    let mut peaks: Vec<Peak> = group(&extrema, w)
        .into_iter()
        .map(|mut comps| {
            comps.sort_by_key(|c| (c.i, c.j));
            let weight: f64 = comps.iter().map(|c| c.amplitude.abs()).sum();
            let f1 = comps.iter().map(|c| c.f1_hz * c.amplitude.abs()).sum::<f64>() / weight;
            let f2 = comps.iter().map(|c| c.f2_hz * c.amplitude.abs()).sum::<f64>() / weight;
            let strongest =
                comps.iter().fold(comps[0], |m, c| if c.amplitude.abs() > m.amplitude.abs() { *c } else { m });
            let kind = if (f1 - f2).abs() <= diag_tol_hz { PeakKind::Diagonal } else { PeakKind::Cross };
            let mut peak = Peak {
                f1_hz: f1,
                f2_hz: f2,
                amplitude: strongest.amplitude,
                extent: (0, 0),
                kind,
                components: comps,
                lineshape: Lineshape::Mixed,
                diagnostic: None,
            };
            let c = classify_lineshape(&peak, s, params.j_hh_hz, w);
            let b = multiplet_box(&peak, s, params.j_hh_hz);
            peak.extent = (b.1 - b.0 + 1, b.3 - b.2 + 1);
            peak.lineshape = c.lineshape;
            peak.diagnostic = c.diagnostic;
            peak
        })
        .collect();
    peaks.sort_by(|a, b| {
        b.amplitude
            .abs()
            .total_cmp(&a.amplitude.abs())
            .then(a.f1_hz.total_cmp(&b.f1_hz))
            .then(a.f2_hz.total_cmp(&b.f2_hz))
    });
    Ok(PeakTable { peaks, diag_tol_hz })
}

/// Points whose |value| reaches `floor` and is not exceeded by any of the
/// eight neighbours. Plateaus keep their first point in row-major order.
fn local_extrema(s: &Spectrum2D, floor: f64) -> Vec<Component> {
    let (n1, n2) = s.dim();
    let mut out = Vec::new();
    for i in 0..n1 {
        for j in 0..n2 {
            let v = s.data[(i, j)].abs();
            if v < floor || v == 0.0 {
                continue;
            }
            let mut is_max = true;
            'nb: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if ii < 0 || jj < 0 || ii >= n1 as i64 || jj >= n2 as i64 {
                        continue;
                    }
                    let u = s.data[(ii as usize, jj as usize)].abs();
                    let earlier = (di, dj) < (0, 0);
                    if u > v || (u == v && earlier) {
                        is_max = false;
                        break 'nb;
                    }
                }
            }
            if is_max {
                out.push(Component { i, j, f1_hz: s.f1(i), f2_hz: s.f2(j), amplitude: s.data[(i, j)] });
            }
        }
    }
    out
}

/// Single-linkage clusters under the Chebyshev distance in Hz.
fn group(points: &[Component], window_hz: f64) -> Vec<Vec<Component>> {
    let n = points.len();
    let mut label = vec![usize::MAX; n];
    let mut groups = Vec::new();
    for seed in 0..n {
        if label[seed] != usize::MAX {
            continue;
        }
        let id = groups.len();
        label[seed] = id;
        let mut members = vec![seed];
        let mut cursor = 0;
        while cursor < members.len() {
            let a = points[members[cursor]];
            cursor += 1;
            for b in 0..n {
                if label[b] == usize::MAX
                    && (points[b].f1_hz - a.f1_hz).abs() <= window_hz
                    && (points[b].f2_hz - a.f2_hz).abs() <= window_hz
                {
                    label[b] = id;
                    members.push(b);
                }
            }
        }
        groups.push(members.into_iter().map(|k| points[k]).collect());
    }
    groups
}

/// Outcome of [`classify_lineshape`].
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub lineshape: Lineshape,
    /// |Σ amplitude| / Σ |amplitude| over the multiplet box.
    pub net_integral_ratio: f64,
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AxisPattern {
    Single,
    Inphase,
    Antiphase,
    /// Opposite-sign lobes closer than half a coupling.
    Dispersive,
    Irregular,
}

/// Sign pattern of the components projected onto one axis. Components
/// within J/4 (or one point) of each other are merged, keeping the strongest.
fn axis_pattern(positions: &[(f64, f64)], step: f64, j_hz: f64, window_hz: f64) -> AxisPattern {
    let mut sorted = positions.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let tol = (1.01 * step).max(0.25 * j_hz);
    let mut merged: Vec<(f64, f64)> = Vec::new();
    let mut anchor = f64::NEG_INFINITY;
    for (f, a) in sorted {
        match merged.last_mut() {
            Some(last) if f - anchor <= tol => {
                if a.abs() > last.1.abs() {
                    *last = (f, a);
                }
            }
            _ => {
                anchor = f;
                merged.push((f, a));
            }
        }
    }
    if merged.len() == 1 {
        return AxisPattern::Single;
    }
    let alternating = merged.windows(2).all(|w| w[0].1.signum() != w[1].1.signum());
    let same = merged.windows(2).all(|w| w[0].1.signum() == w[1].1.signum());
    if same {
        return AxisPattern::Inphase;
    }
    if !alternating {
        return AxisPattern::Irregular;
    }
    let gaps: Vec<f64> = merged.windows(2).map(|w| w[1].0 - w[0].0).collect();
    if gaps.iter().all(|g| *g >= 0.5 * j_hz && *g <= window_hz.max(1.5 * j_hz)) {
        AxisPattern::Antiphase
    } else if gaps.iter().all(|g| *g < 0.5 * j_hz) {
        AxisPattern::Dispersive
    } else {
        AxisPattern::Irregular
    }
}

/// Index bounds (i_lo, i_hi, j_lo, j_hi) of the components widened by J/2.
fn multiplet_box(peak: &Peak, s: &Spectrum2D, j_hz: f64) -> (usize, usize, usize, usize) {
    let (n1, n2) = s.dim();
    let m1 = (0.5 * j_hz / s.f1_step.abs()).ceil() as usize;
    let m2 = (0.5 * j_hz / s.f2_step.abs()).ceil() as usize;
    let i_lo = peak.components.iter().map(|c| c.i).min().unwrap_or(0);
    let i_hi = peak.components.iter().map(|c| c.i).max().unwrap_or(0);
    let j_lo = peak.components.iter().map(|c| c.j).min().unwrap_or(0);
    let j_hi = peak.components.iter().map(|c| c.j).max().unwrap_or(0);
    (i_lo.saturating_sub(m1), (i_hi + m1).min(n1 - 1), j_lo.saturating_sub(m2), (j_hi + m2).min(n2 - 1))
}

/// Classifies a picked multiplet from the sign pattern of its major
/// components along each axis and its net integral.
///
/// Antiphase absorptive needs alternating signs on both axes, spaced by at
/// least J/2 and at most the grouping window (or 1.5 J if larger), and a net
/// integral below 5 % of the absolute integral. Opposite-sign lobes closer
/// than J/2 are read as dispersion. Anything else, including a multiplet
/// whose splitting is not resolved on an axis where the other axis is
/// antiphase, is `mixed` with a diagnostic.
pub fn classify_lineshape(peak: &Peak, s: &Spectrum2D, j_hz: f64, window_hz: f64) -> Classification {
    let (i0, i1, j0, j1) = multiplet_box(peak, s, j_hz);
    let region = s.data.slice(ndarray::s![i0..=i1, j0..=j1]);
    let total: f64 = region.iter().map(|v| v.abs()).sum();
    let net = region.iter().sum::<f64>().abs();
    let ratio = if total > 0.0 { net / total } else { 0.0 };

    let strongest = peak.components.iter().fold(0.0f64, |m, c| m.max(c.amplitude.abs()));
    let major: Vec<&Component> =
        peak.components.iter().filter(|c| c.amplitude.abs() >= MAJOR_COMPONENT_FRACTION * strongest).collect();
    let along_f1: Vec<(f64, f64)> = major.iter().map(|c| (c.f1_hz, c.amplitude)).collect();
    let along_f2: Vec<(f64, f64)> = major.iter().map(|c| (c.f2_hz, c.amplitude)).collect();
    let p1 = axis_pattern(&along_f1, s.f1_step.abs(), j_hz, window_hz);
    let p2 = axis_pattern(&along_f2, s.f2_step.abs(), j_hz, window_hz);

    use AxisPattern::*;
    let (lineshape, diagnostic) = match (p1, p2) {
        (Antiphase, Antiphase) if ratio < 0.05 => (Lineshape::AntiphaseAbsorptive, None),
        (Antiphase, Antiphase) => (
            Lineshape::Mixed,
            Some(format!("antiphase pattern but net integral is {:.1}% of the absolute", 100.0 * ratio)),
        ),
        (Dispersive, Dispersive | Single | Inphase) | (Single | Inphase, Dispersive) => (Lineshape::Dispersive, None),
        (Single | Inphase, Single | Inphase) => (Lineshape::InphaseAbsorptive, None),
        (a, b) => (Lineshape::Mixed, Some(format!("unresolved or irregular multiplet: F1 {a:?}, F2 {b:?}"))),
    };
    Classification { lineshape, net_integral_ratio: ratio, diagnostic }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuppressionReport {
    pub diag_tol_hz: f64,
    pub max_diag_amp_ref: f64,
    pub max_cross_amp_ref: f64,
    pub max_diag_amp_df: f64,
    pub max_cross_amp_df: f64,
    pub suppression_db: f64,
    /// Largest diagonal-band amplitude over the largest off-band amplitude of
    /// the test spectrum.
    pub residual_fraction: f64,
}

impl fmt::Display for SuppressionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "diag_tol_hz = {:.6}", self.diag_tol_hz)?;
        writeln!(f, "max_diag_amp_ref = {:.9e}", self.max_diag_amp_ref)?;
        writeln!(f, "max_cross_amp_ref = {:.9e}", self.max_cross_amp_ref)?;
        writeln!(f, "max_diag_amp_df = {:.9e}", self.max_diag_amp_df)?;
        writeln!(f, "max_cross_amp_df = {:.9e}", self.max_cross_amp_df)?;
        writeln!(f, "suppression_db = {:.6}", self.suppression_db)?;
        writeln!(f, "residual_fraction = {:.9e}", self.residual_fraction)
    }
}

/// Largest |amplitude| inside and outside the band |f₁ − f₂| ≤ `tol`.
pub fn band_maxima(s: &Spectrum2D, tol: f64) -> (f64, f64) {
    let mut diag = 0.0f64;
    let mut cross = 0.0f64;
    for ((i, j), v) in s.data.indexed_iter() {
        if (s.f1(i) - s.f2(j)).abs() <= tol {
            diag = diag.max(v.abs());
        } else {
            cross = cross.max(v.abs());
        }
    }
    (diag, cross)
}

/// Compares the diagonal band of a reference (conventional) spectrum with
/// that of a test (diagonal-free) spectrum on the same grid.
pub fn compare(reference: &Spectrum2D, test: &Spectrum2D, diag_tol_hz: Option<f64>) -> Result<SuppressionReport> {
    if !reference.same_grid(test) {
        return Err(Error::validation("spectra are on different frequency grids"));
    }
    let tol = diag_tol_hz.unwrap_or_else(|| default_diag_tol(reference));
    let (max_diag_amp_ref, max_cross_amp_ref) = band_maxima(reference, tol);
    let (max_diag_amp_df, max_cross_amp_df) = band_maxima(test, tol);
    let floor = AMPLITUDE_FLOOR * reference.max_abs().max(test.max_abs());
    let suppression_db = if max_diag_amp_ref == max_diag_amp_df {
        0.0
    } else {
        20.0 * (max_diag_amp_ref.max(floor) / max_diag_amp_df.max(floor)).log10()
    };
    let residual_fraction = if max_cross_amp_df > 0.0 { max_diag_amp_df / max_cross_amp_df } else { f64::INFINITY };
    Ok(SuppressionReport {
        diag_tol_hz: tol,
        max_diag_amp_ref,
        max_cross_amp_ref,
        max_diag_amp_df,
        max_cross_amp_df,
        suppression_db,
        residual_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    const SW: f64 = 700.0;

    fn lorentz(x: f64, w: f64) -> (f64, f64) {
        let d = 1.0 + (x / w).powi(2);
        (1.0 / d, (x / w) / d)
    }

    /// Sum of absorptive (or, with `disp`, F₂-dispersive) Lorentzians
    /// `(f1, f2, amplitude)` of half-width `w` on a 256×512 grid.
    fn synth(lines: &[(f64, f64, f64)], w: f64, disp: bool) -> Spectrum2D {
        let mut s = Spectrum2D::new(Array2::zeros((256, 512)), SW, SW);
        for i in 0..256 {
            for j in 0..512 {
                let (f1, f2) = (s.f1(i), s.f2(j));
                s.data[(i, j)] = lines
                    .iter()
                    .map(|(a, b, amp)| {
                        let (a1, _) = lorentz(f1 - a, w);
                        let (a2, d2) = lorentz(f2 - b, w);
                        amp * a1 * if disp { d2 } else { a2 }
                    })
                    .sum();
            }
        }
        s
    }

    fn antiphase(f1: f64, f2: f64, j: f64, amp: f64) -> Vec<(f64, f64, f64)> {
        let h = j / 2.0;
        vec![(f1 - h, f2 - h, amp), (f1 - h, f2 + h, -amp), (f1 + h, f2 - h, -amp), (f1 + h, f2 + h, amp)]
    }

    #[test]
    fn window_widens_for_short_acquisitions() {
        assert_eq!(group_window_for(7.0, 1.0, 1.0), 10.5);
        assert!((group_window_for(7.0, 0.09, 0.25) - 1.5 / 0.09).abs() < 1e-12);
    }

    #[test]
    fn zero_spectrum_has_no_peaks() {
        let s = Spectrum2D::new(Array2::zeros((16, 16)), SW, SW);
        assert!(pick_peaks(&s, &PickParams::default()).unwrap().peaks.is_empty());
        let empty = Spectrum2D::new(Array2::zeros((0, 4)), SW, SW);
        assert!(pick_peaks(&empty, &PickParams::default()).is_err());
    }

    #[test]
    fn threshold_range() {
        let s = Spectrum2D::new(Array2::zeros((4, 4)), SW, SW);
        for t in [0.0, 1.0, 1.1, -0.2, f64::NAN] {
            assert!(pick_peaks(&s, &PickParams { threshold: t, ..Default::default() }).is_err());
        }
    }

    #[test]
    fn antiphase_multiplets_group_and_classify() {
        let j = 14.0;
        let mut lines = antiphase(150.0, -60.0, j, 1.0);
        lines.extend(antiphase(-60.0, 150.0, j, 0.8));
        let s = synth(&lines, 1.5, false);
        let t = pick_peaks(&s, &PickParams { j_hh_hz: j, ..Default::default() }).unwrap();
        assert_eq!(t.peaks.len(), 2);
        assert_eq!(t.count(PeakKind::Cross), 2);
        for p in &t.peaks {
            assert_eq!(p.components.len(), 4);
            assert_eq!(p.lineshape, Lineshape::AntiphaseAbsorptive, "{:?}", p.diagnostic);
            assert_eq!(p.multiplet_signs(), vec![1, -1, -1, 1]);
        }
        assert!((t.peaks[0].f1_hz - 150.0).abs() <= s.f1_step);
        assert!((t.peaks[0].f2_hz + 60.0).abs() <= s.f2_step);
    }

    #[test]
    fn singlets() {
        let s = synth(&[(100.0, 100.0, 2.0), (100.0, -200.0, 1.0)], 2.0, false);
        let t = pick_peaks(&s, &PickParams::default()).unwrap();
        assert_eq!((t.count(PeakKind::Diagonal), t.count(PeakKind::Cross)), (1, 1));
        assert!(t.peaks.iter().all(|p| p.lineshape == Lineshape::InphaseAbsorptive));
        assert_eq!(t.peaks[0].kind, PeakKind::Diagonal);
    }

    #[test]
    fn quadrature_swapped_singlet_is_dispersive() {
        let s = synth(&[(80.0, -120.0, 1.0)], 2.0, true);
        let t = pick_peaks(&s, &PickParams { j_hh_hz: 14.0, ..Default::default() }).unwrap();
        assert_eq!(t.peaks.len(), 1);
        assert_eq!(t.peaks[0].lineshape, Lineshape::Dispersive);
    }

    #[test]
    fn unresolved_multiplet_is_mixed() {
        // antiphase in F2 only, unresolved in F1
        let lines = vec![(50.0, 0.0, 1.0), (50.0, 12.0, -1.0), (50.0, 24.0, 1.0), (50.0, 36.0, 0.3)];
        let s = synth(&lines, 1.5, false);
        let t = pick_peaks(&s, &PickParams { j_hh_hz: 12.0, ..Default::default() }).unwrap();
        assert_eq!(t.peaks.len(), 1);
        assert_eq!(t.peaks[0].lineshape, Lineshape::Mixed);
        assert!(t.peaks[0].diagnostic.is_some());
    }

    #[test]
    fn tsv_layout() {
        let s = synth(&[(100.0, 100.0, 1.0)], 2.0, false);
        let tsv = pick_peaks(&s, &PickParams::default()).unwrap().to_tsv();
        let mut lines = tsv.lines();
        assert_eq!(lines.next(), Some("f1_hz\tf2_hz\tamplitude\tkind\tlineshape"));
        let row: Vec<&str> = lines.next().unwrap().split('\t').collect();
        assert_eq!(row.len(), 5);
        assert_eq!(row[3], "diagonal");
        assert_eq!(row[4], "inphase_absorptive");
    }

    #[test]
    fn compare_self_and_grids() {
        let s = synth(&[(100.0, 100.0, 1.0), (100.0, -50.0, 0.5)], 2.0, false);
        let r = compare(&s, &s, None).unwrap();
        assert_eq!(r.suppression_db, 0.0);
        // off-grid sampling lowers both maxima a little
        assert!((r.residual_fraction - 2.0).abs() < 0.2, "{}", r.residual_fraction);
        let other = Spectrum2D::new(Array2::zeros((256, 512)), SW, 600.0);
        assert!(compare(&s, &other, None).is_err());
    }

    #[test]
    fn compare_vanishing_diagonal_hits_floor() {
        let reference = synth(&[(100.0, 100.0, 1.0), (100.0, -50.0, 0.5)], 2.0, false);
        let test = synth(&[(100.0, -50.0, 0.5)], 2.0, false);
        let r = compare(&reference, &test, Some(0.0)).unwrap();
        assert!(r.max_diag_amp_df < 1e-3);
        let zero = Spectrum2D::new(Array2::zeros((256, 512)), SW, SW);
        let r = compare(&reference, &zero, None).unwrap();
        assert!((r.suppression_db - 240.0).abs() < 1e-9);
    }

    #[test]
    fn report_is_key_value() {
        let s = synth(&[(10.0, 10.0, 1.0)], 2.0, false);
        let text = compare(&s, &s, None).unwrap().to_string();
        assert!(text.lines().all(|l| l.split(" = ").count() == 2));
        assert!(text.contains("suppression_db = 0.000000"));
    }
}
