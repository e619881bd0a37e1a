use std::f64::consts::PI;

use super::Fid2D;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowKind {
    #[default]
    None,
    /// sin(π·t/T_aq) over the acquired points; zero at t = 0.
    SineUnshifted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowAxis {
    F1,
    F2,
    #[default]
    Both,
}

impl WindowAxis {
    fn f1(self) -> bool {
        matches!(self, WindowAxis::F1 | WindowAxis::Both)
    }

    fn f2(self) -> bool {
        matches!(self, WindowAxis::F2 | WindowAxis::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WindowSpec {
    pub kind: WindowKind,
    pub axis: WindowAxis,
    /// Extra exponential line broadening in Hz on the same axes (0 = off).
    pub lb_hz: f64,
}

impl WindowSpec {
    pub fn sine() -> Self {
        WindowSpec { kind: WindowKind::SineUnshifted, ..Default::default() }
    }

    pub fn describe(&self) -> String {
        let kind = match self.kind {
            WindowKind::None => "none",
            WindowKind::SineUnshifted => "sine",
        };
        let axis = match self.axis {
            WindowAxis::F1 => "f1",
            WindowAxis::F2 => "f2",
            WindowAxis::Both => "both",
        };
        format!("{kind}/{axis}/lb={}", self.lb_hz)
    }
}

/// Weights for `n` acquired points at spacing `dwell`.
pub fn window_weights(spec: &WindowSpec, n: usize, dwell: f64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let shape = match spec.kind {
                WindowKind::None => 1.0,
                WindowKind::SineUnshifted => (PI * k as f64 / n as f64).sin(),
            };
            shape * (-PI * spec.lb_hz * k as f64 * dwell).exp()
        })
        .collect()
}

/// Multiplies the data pointwise by the window along the chosen axes.
pub fn apodize(fid: &Fid2D, spec: &WindowSpec) -> Fid2D {
    let mut out = fid.clone();
    let ones1 = vec![1.0; fid.n_t1()];
    let ones2 = vec![1.0; fid.n_t2()];
    let w1 = if spec.axis.f1() { window_weights(spec, fid.n_t1(), fid.dwell1()) } else { ones1 };
    let w2 = if spec.axis.f2() { window_weights(spec, fid.n_t2(), fid.dwell2()) } else { ones2 };
    for ((k, _, j), v) in out.data.indexed_iter_mut() {
        *v *= w1[k] * w2[j];
    }
    out
}
