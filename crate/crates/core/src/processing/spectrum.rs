use ndarray::Array2;

/// A real 2D spectrum indexed `[f1][f2]` with ascending frequency axes.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum2D {
    pub data: Array2<f64>,
    pub f1_first: f64,
    pub f1_step: f64,
    pub f2_first: f64,
    pub f2_step: f64,
    /// Processing record as ordered key/value pairs.
    pub provenance: Vec<(String, String)>,
}

impl Spectrum2D {
    /// Wraps data whose axes span [−sw/2, sw/2) in each dimension.
    pub fn new(data: Array2<f64>, sw1_hz: f64, sw2_hz: f64) -> Self {
        let (n1, n2) = data.dim();
        Spectrum2D {
            data,
            f1_first: -sw1_hz / 2.0,
            f1_step: sw1_hz / n1 as f64,
            f2_first: -sw2_hz / 2.0,
            f2_step: sw2_hz / n2 as f64,
            provenance: Vec::new(),
        }
    }

    pub fn dim(&self) -> (usize, usize) {
        self.data.dim()
    }

    pub fn f1_axis(&self) -> Vec<f64> {
        (0..self.dim().0).map(|i| self.f1(i)).collect()
    }

    pub fn f2_axis(&self) -> Vec<f64> {
        (0..self.dim().1).map(|j| self.f2(j)).collect()
    }

    pub fn f1(&self, i: usize) -> f64 {
        self.f1_first + i as f64 * self.f1_step
    }

    pub fn f2(&self, j: usize) -> f64 {
        self.f2_first + j as f64 * self.f2_step
    }

    /// Nearest grid index to a frequency, clamped to the grid.
    pub fn index_f1(&self, hz: f64) -> usize {
        nearest(hz, self.f1_first, self.f1_step, self.dim().0)
    }

    pub fn index_f2(&self, hz: f64) -> usize {
        nearest(hz, self.f2_first, self.f2_step, self.dim().1)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// True when both spectra share the same grid.
    pub fn same_grid(&self, other: &Spectrum2D) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0);
        self.dim() == other.dim()
            && close(self.f1_first, other.f1_first)
            && close(self.f1_step, other.f1_step)
            && close(self.f2_first, other.f2_first)
            && close(self.f2_step, other.f2_step)
    }

    pub fn provenance_value(&self, key: &str) -> Option<&str> {
        self.provenance.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

fn nearest(hz: f64, first: f64, step: f64, n: usize) -> usize {
    let i = ((hz - first) / step).round();
    i.clamp(0.0, (n - 1) as f64) as usize
}
