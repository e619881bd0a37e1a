//! Liouville–von Neumann propagation of a spin-1/2 density operator.
//!
//! Conventions, fixed for the whole crate:
//!
//! - A pulse of flip θ and phase φ is U = exp(−iθ Σ_k (cos φ·I_kx + sin φ·I_ky)),
//!   so a 90° x pulse takes I_z to −I_y.
//! - Free precession is exp(−iHt) with H = Σ 2πν·I_z + Σ 2πJ·I_zI_z, so I_x
//!   precesses towards +I_y for positive offsets.
//! - The receiver measures Tr(ρ·Σ_H I_+) normalized by Tr(I_x²), so ρ = I_x at
//!   offset ν gives exp(+i2πνt).
//!
//! Pulses are instantaneous and ideal; there is no relaxation.

mod basis;
mod ensemble;
mod hamiltonian;

pub use basis::{Axis, Basis, Operator, ProductOp};
pub use ensemble::{Ensemble, GradientMode, DEFAULT_PHASE_PER_UNIT, DEFAULT_SLICES};
pub use hamiltonian::{CouplingTerms, Hamiltonian};

use num_complex::Complex64 as C64;
use std::f64::consts::FRAC_PI_2;

use crate::spinsys::{Channel, Isotopomer};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub gradients: GradientMode,
    /// Whether homonuclear couplings act during fixed `delay` events. Turning
    /// this off reproduces the hand product-operator algebra, which neglects
    /// J_HH over the short 1/(2·¹J_CH) intervals.
    pub homonuclear_in_delays: bool,
    pub isotropic_homonuclear: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { gradients: GradientMode::default(), homonuclear_in_delays: true, isotropic_homonuclear: false }
    }
}

impl EngineConfig {
    pub fn ideal() -> Self {
        EngineConfig { gradients: GradientMode::Ideal, ..Default::default() }
    }

    /// Ideal gradients and no J_HH during fixed delays.
    pub fn algebraic() -> Self {
        EngineConfig { gradients: GradientMode::Ideal, homonuclear_in_delays: false, isotropic_homonuclear: false }
    }
}

/// Propagation machinery for one isotopomer.
#[derive(Debug, Clone)]
pub struct Engine {
    basis: Basis,
    free: Hamiltonian,
    delay: Hamiltonian,
    acq: Hamiltonian,
    acq_decoupled: Hamiltonian,
    config: EngineConfig,
}

impl Engine {
    pub fn new(iso: &Isotopomer, config: EngineConfig) -> Self {
        let basis = Basis::for_isotopomer(iso);
        let all = CouplingTerms { isotropic_homonuclear: config.isotropic_homonuclear, ..CouplingTerms::ALL };
        let free = Hamiltonian::build(iso, &basis, all);
        let delay = if config.homonuclear_in_delays {
            free.clone()
        } else {
            Hamiltonian::build(iso, &basis, CouplingTerms { homonuclear: false, ..all })
        };
        let acq_decoupled = Hamiltonian::build(iso, &basis, CouplingTerms { heteronuclear: false, ..all });
        Engine { basis, acq: free.clone(), free, delay, acq_decoupled, config }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.free
    }

    /// Thermal deviation density Σ_H I_z, plus (γ_C/γ_H)·Σ_C S_z unless
    /// `protons_only`.
    pub fn equilibrium(&self, protons_only: bool) -> Operator {
        let b = &self.basis;
        let mut rho = Operator::zeros(b.dim(), b.dim());
        for k in 0..b.n_spins() {
            let w = match b.channel(k) {
                Channel::H1 => 1.0,
                Channel::C13 if protons_only => continue,
                Channel::C13 => Channel::C13.gamma_rel(),
            };
            for a in 0..b.dim() {
                rho[(a, a)] += C64::new(w * b.m(k, a), 0.0);
            }
        }
        rho
    }

    /// Ideal pulse on every spin of `channel`, phase in radians.
    pub fn pulse(&self, rho: &mut Operator, channel: Channel, flip_deg: f64, phase_rad: f64) {
        let half = flip_deg.to_radians() / 2.0;
        let (c, s) = (half.cos(), half.sin());
        let mi = C64::new(0.0, -1.0);
        let u = [
            [C64::new(c, 0.0), mi * s * C64::from_polar(1.0, -phase_rad)],
            [mi * s * C64::from_polar(1.0, phase_rad), C64::new(c, 0.0)],
        ];
        for k in self.basis.spins_on(channel) {
            apply_local(rho, self.basis.bit(k), &u);
        }
    }

    /// Pulse with the phase given as a quadrant 0..3 ↔ x, y, −x, −y.
    pub fn pulse_quadrant(&self, rho: &mut Operator, channel: Channel, flip_deg: f64, quadrant: i32) {
        self.pulse(rho, channel, flip_deg, quadrant.rem_euclid(4) as f64 * FRAC_PI_2);
    }

    /// Free evolution under the full Hamiltonian.
    pub fn evolve(&self, rho: &mut Operator, t: f64) {
        self.free.evolve(rho, t);
    }

    /// Fixed-delay evolution (honours [`EngineConfig::homonuclear_in_delays`]).
    pub fn evolve_delay(&self, rho: &mut Operator, t: f64) {
        self.delay.evolve(rho, t);
    }

    /// Receiver signal sampled at k·dwell for k in 0..n.
    pub fn acquire(
        &self,
        rho: &Operator,
        n: usize,
        dwell: f64,
        decouple_c13: bool,
        receiver_quadrant: i32,
    ) -> Vec<C64> {
        let protons: Vec<usize> = self.basis.spins_on(Channel::H1).collect();
        self.acquire_spins(rho, &protons, n, dwell, decouple_c13, receiver_quadrant)
    }

    /// As [`Engine::acquire`] with the detector restricted to `spins`.
    pub fn acquire_spins(
        &self,
        rho: &Operator,
        spins: &[usize],
        n: usize,
        dwell: f64,
        decouple_c13: bool,
        receiver_quadrant: i32,
    ) -> Vec<C64> {
        let h = if decouple_c13 { &self.acq_decoupled } else { &self.acq };
        let b = &self.basis;
        let dim = b.dim();
        let mut det = Operator::zeros(dim, dim);
        for &k in spins {
            det += b.raising(k);
        }
        let (energies, vectors) = h.spectral();
        let (rho_e, det_e) = match vectors {
            Some(v) => (v.adjoint() * rho * &v, v.adjoint() * det * &v),
            None => (rho.clone(), det),
        };
        let norm = dim as f64 / 4.0;
        let rx = C64::from_polar(1.0 / norm, -(receiver_quadrant.rem_euclid(4) as f64) * FRAC_PI_2);
        let mut terms = Vec::new();
        for a in 0..dim {
            for bb in 0..dim {
                let c = rho_e[(a, bb)] * det_e[(bb, a)];
                if c != C64::new(0.0, 0.0) {
                    terms.push((c * rx, energies[a] - energies[bb]));
                }
            }
        }
        (0..n)
            .map(|i| {
                let t = i as f64 * dwell;
                terms.iter().map(|(c, w)| c * C64::from_polar(1.0, -w * t)).sum()
            })
            .collect()
    }
}

/// ρ ← U·ρ·U† where U acts as the 2×2 `u` on the spin addressed by `bit`.
fn apply_local(rho: &mut Operator, bit: usize, u: &[[C64; 2]; 2]) {
    let dim = rho.nrows();
    for a0 in (0..dim).filter(|a| a & bit == 0) {
        let a1 = a0 | bit;
        for c in 0..dim {
            let (r0, r1) = (rho[(a0, c)], rho[(a1, c)]);
            rho[(a0, c)] = u[0][0] * r0 + u[0][1] * r1;
            rho[(a1, c)] = u[1][0] * r0 + u[1][1] * r1;
        }
    }
    for c0 in (0..dim).filter(|c| c & bit == 0) {
        let c1 = c0 | bit;
        for r in 0..dim {
            let (x0, x1) = (rho[(r, c0)], rho[(r, c1)]);
            rho[(r, c0)] = x0 * u[0][0].conj() + x1 * u[0][1].conj();
            rho[(r, c1)] = x0 * u[1][0].conj() + x1 * u[1][1].conj();
        }
    }
}
