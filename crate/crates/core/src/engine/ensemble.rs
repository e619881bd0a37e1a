use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use super::basis::{Basis, Operator};

/// Default number of gradient slices.
pub const DEFAULT_SLICES: usize = 64;

/// Dephasing per unit relative gradient area and unit (γ_H-weighted)
/// coherence order at the sample edge. With π rad, any proton pathway whose
/// net integer area is nonzero (and not a multiple of the slice count)
/// averages to exactly zero over midpoint slices.
pub const DEFAULT_PHASE_PER_UNIT: f64 = std::f64::consts::PI;

/// How pulsed field gradients act on the spin ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GradientMode {
    /// Infinite-slice limit: each density component is tagged with its
    /// accumulated wavenumber and only the zero-wavenumber part is observable.
    Ideal,
    /// Explicit ensemble of `n` slices at the midpoints of [−1, 1].
    Slices { n: usize, max_phase_per_unit: f64 },
    /// Gradients are ignored (the spin at the gradient isocenter).
    Off,
}

impl GradientMode {
    pub fn slices(n: usize) -> Self {
        GradientMode::Slices { n, max_phase_per_unit: DEFAULT_PHASE_PER_UNIT }
    }

    /// Slice positions z_j = −1 + (2j + 1)/n.
    pub fn positions(n: usize) -> Vec<f64> {
        (0..n).map(|j| -1.0 + (2 * j + 1) as f64 / n as f64).collect()
    }
}

impl Default for GradientMode {
    fn default() -> Self {
        GradientMode::slices(DEFAULT_SLICES)
    }
}

// Wavenumber keys are area·Δ(γ-weighted m) quantized to 1e-9.
const KEY_SCALE: f64 = 1e9;

#[derive(Debug, Clone)]
enum Parts {
    Single(Operator),
    /// Wavenumber buckets plus the gradient-free trajectory.
    Ideal {
        buckets: BTreeMap<i64, Operator>,
        shadow: Operator,
    },
    Slices {
        z: Vec<f64>,
        phase_per_unit: f64,
        rho: Vec<Operator>,
    },
}

/// A density operator split over gradient slices or wavenumber components.
#[derive(Debug, Clone)]
pub struct Ensemble {
    parts: Parts,
}

impl Ensemble {
    pub fn new(rho: Operator, mode: GradientMode) -> Self {
        let parts = match mode {
            GradientMode::Off => Parts::Single(rho),
            GradientMode::Ideal => Parts::Ideal { buckets: BTreeMap::from([(0, rho.clone())]), shadow: rho },
            GradientMode::Slices { n, max_phase_per_unit } => {
                assert!(n >= 1, "at least one slice");
                Parts::Slices { z: GradientMode::positions(n), phase_per_unit: max_phase_per_unit, rho: vec![rho; n] }
            }
        };
        Ensemble { parts }
    }

    /// Resets every component to `rho` (wavenumber history discarded).
    pub fn reset(&mut self, rho: Operator) {
        match &mut self.parts {
            Parts::Single(r) => *r = rho,
            Parts::Ideal { buckets, shadow } => {
                *buckets = BTreeMap::from([(0, rho.clone())]);
                *shadow = rho;
            }
            Parts::Slices { rho: rs, .. } => rs.iter_mut().for_each(|r| *r = rho.clone()),
        }
    }

    pub fn for_each_mut(&mut self, mut f: impl FnMut(&mut Operator)) {
        match &mut self.parts {
            Parts::Single(r) => f(r),
            Parts::Ideal { buckets, shadow } => {
                buckets.values_mut().for_each(&mut f);
                f(shadow);
            }
            Parts::Slices { rho, .. } => rho.iter_mut().for_each(f),
        }
    }

    pub fn n_components(&self) -> usize {
        match &self.parts {
            Parts::Single(_) => 1,
            Parts::Ideal { buckets, .. } => buckets.len(),
            Parts::Slices { rho, .. } => rho.len(),
        }
    }

    /// Applies a z-gradient of the given relative area: each slice at
    /// position z rotates spin k by area·c·z·γ_k/γ_H about z.
    pub fn gradient(&mut self, basis: &Basis, area: f64) {
        if area == 0.0 {
            return;
        }
        let dim = basis.dim();
        match &mut self.parts {
            Parts::Single(_) => {}
            Parts::Slices { z, phase_per_unit, rho } => {
                for (zj, r) in z.iter().zip(rho.iter_mut()) {
                    let k = area * *phase_per_unit * zj;
                    for b in 0..dim {
                        for a in 0..dim {
                            let dm = basis.zeeman(a) - basis.zeeman(b);
                            if dm != 0.0 {
                                r[(a, b)] *= C64::from_polar(1.0, -k * dm);
                            }
                        }
                    }
                }
            }
            Parts::Ideal { buckets: map, .. } => {
                let mut next: BTreeMap<i64, Operator> = BTreeMap::new();
                for (key, r) in std::mem::take(map) {
                    for b in 0..dim {
                        for a in 0..dim {
                            let v = r[(a, b)];
                            if v == C64::new(0.0, 0.0) {
                                continue;
                            }
                            let dk = (area * (basis.zeeman(a) - basis.zeeman(b)) * KEY_SCALE).round() as i64;
                            next.entry(key + dk).or_insert_with(|| Operator::zeros(dim, dim))[(a, b)] = v;
                        }
                    }
                }
                *map = next;
            }
        }
    }

    /// The spatially averaged density operator, i.e. what a receiver sees.
    pub fn observable(&self) -> Operator {
        match &self.parts {
            Parts::Single(r) => r.clone(),
            Parts::Ideal { buckets, shadow } => {
                let dim = shadow.nrows();
                buckets.get(&0).cloned().unwrap_or_else(|| Operator::zeros(dim, dim))
            }
            Parts::Slices { rho, .. } => {
                let mut acc = rho[0].clone();
                for r in &rho[1..] {
                    acc += r;
                }
                acc / C64::new(rho.len() as f64, 0.0)
            }
        }
    }

    /// The state of a spin at z = 0, where gradients have no effect.
    /// Only defined for ideal and gradient-free ensembles.
    pub fn isocenter(&self) -> Option<Operator> {
        match &self.parts {
            Parts::Single(r) => Some(r.clone()),
            Parts::Ideal { shadow, .. } => Some(shadow.clone()),
            Parts::Slices { .. } => None,
        }
    }

    /// Drops wavenumber components that later gradients can no longer bring
    /// back to zero. `reach` bounds the total |area·Δ(γ-weighted m)| of all
    /// remaining gradients. Only affects the ideal mode.
    pub fn prune(&mut self, reach: f64) {
        if let Parts::Ideal { buckets, .. } = &mut self.parts {
            let limit = (reach * KEY_SCALE).round() as i64 + 1;
            buckets.retain(|k, _| k.abs() <= limit);
        }
    }
}
