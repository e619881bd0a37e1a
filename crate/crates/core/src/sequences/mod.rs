//! Built-in pulse sequences and the scan driver that runs them.

mod driver;

pub use driver::{
    run_experiment, run_transient, CaptureKey, CheckpointCapture, Detect, Experiment, RunOptions, Transient,
    TransientSpec, ACQ_MARK,
};

use crate::error::{Error, Result};
use crate::processing::{Fid2D, Quadrature};
use crate::pulseprog::{DelayExpr, Event, EventList, GradientDef, PhaseTable, StatesStep};
use crate::spinsys::Channel;

/// Relative gradient areas G1..G9 of the diagonal-free sequence.
pub const DIAGONAL_FREE_GRADIENTS: [f64; 9] = [77.0, 67.0, 80.0, 51.0, 51.0, 53.0, 53.0, 15.0, 15.0];

/// Standard receiver cycle of the diagonal-free sequence. Its first two
/// steps select the pathway; see [`PATHWAY_RECEIVER`] for all eight.
pub const DIAGONAL_FREE_RECEIVER: [u8; 8] = [0, 2, 2, 0, 2, 0, 0, 2];

/// Receiver cycle that follows the phase of the selected pathway, which
/// depends on Φ3 alone. Use it when running all eight steps of the cycle.
pub const PATHWAY_RECEIVER: [u8; 8] = [0, 2, 0, 2, 0, 2, 0, 2];

/// Checkpoint labels of the diagonal-free sequence, in time order.
pub const DIAGONAL_FREE_MARKS: [&str; 10] = ["c", "d", "e", "f", "h", "i", "j", "k", "lm", "o"];

/// One-bond coupling the delays are tuned to when a spin system has no carbons.
pub const DEFAULT_J1CH_HZ: f64 = 160.0;

/// Half of the INEPT delay for a one-bond coupling: 2τ = 1/(2J).
pub fn tau_for(j1ch_hz: f64) -> f64 {
    1.0 / (4.0 * j1ch_hz)
}

struct Builder {
    list: EventList,
}

impl Builder {
    fn new() -> Self {
        Builder { list: EventList::default() }
    }

    fn define(mut self, name: &str, v: f64) -> Self {
        self.list.symbols.push((name.into(), v));
        self
    }

    fn phase(mut self, name: &str, entries: &[u8], states: Option<StatesStep>) -> Self {
        self.list.phase_tables.push(PhaseTable { name: name.into(), entries: entries.to_vec(), states });
        self
    }

    fn gradient(mut self, name: &str, area: f64, alternate: bool) -> Self {
        self.list.gradients.push(GradientDef { name: name.into(), area, alternate });
        self
    }

    fn echo(mut self, a: &str, b: &str) -> Self {
        self.list.echo_pairs.push((a.into(), b.into()));
        self
    }

    fn ev(mut self, e: Event) -> Self {
        self.list.events.push(e);
        self
    }

    fn pulse(self, channels: &[Channel], angle_deg: f64, phase: &str) -> Self {
        self.ev(Event::Pulse { channels: channels.to_vec(), angle_deg, phase: phase.into() })
    }

    fn delay(self, sym: &str) -> Self {
        self.ev(Event::Delay(DelayExpr::Symbol { name: sym.into(), factor: 1.0 }))
    }

    fn grad(self, name: &str) -> Self {
        self.ev(Event::Gradient(name.into()))
    }

    fn mark(self, label: &str) -> Self {
        self.ev(Event::Mark(label.into()))
    }

    fn finish(self) -> EventList {
        self.list.validate().expect("built-in sequence is valid");
        self.list
    }
}

const H: Channel = Channel::H1;
const C: Channel = Channel::C13;

/// The ¹³C-edited diagonal-free COSY.
pub fn build_diagonal_free_cosy(tau_s: f64) -> EventList {
    build_diagonal_free_cosy_filtered(tau_s, tau_s)
}

/// Diagonal-free COSY whose final o→p filter interval uses its own half
/// delay `tauf` (zero disables the filter).
pub fn build_diagonal_free_cosy_filtered(tau_s: f64, tau_filter_s: f64) -> EventList {
    let mut b = Builder::new()
        .define("tau", tau_s)
        .define("tauf", tau_filter_s)
        .phase("ph0", &[0], None)
        .phase("ph1", &[0], None)
        .phase("ph2", &[1], None)
        .phase("ph3", &[0, 2], None)
        .phase("ph4", &[1, 1, 1, 1, 3, 3, 3, 3], None)
        .phase("ph5", &[0], Some(StatesStep::plus90(H)))
        .phase("ph6", &[0], None)
        .phase("ph7", &[0, 0, 2, 2], None)
        .phase("ph8", &[0], None)
        .phase("phr", &DIAGONAL_FREE_RECEIVER, None);
    for (i, area) in DIAGONAL_FREE_GRADIENTS.iter().enumerate() {
        b = b.gradient(&format!("G{}", i + 1), *area, i == 8);
    }
    b.echo("G4", "G5")
        .echo("G6", "G7")
        .ev(Event::Purge)
        .mark("c")
        .pulse(&[H], 90.0, "ph1")
        .delay("tau")
        .pulse(&[H, C], 180.0, "ph0")
        .delay("tau")
        .mark("d")
        .pulse(&[H], 90.0, "ph2")
        .mark("e")
        .grad("G3")
        .pulse(&[C], 90.0, "ph3")
        .mark("f")
        .grad("G4")
        .pulse(&[C], 180.0, "ph4")
        .grad("G5")
        .mark("h")
        .pulse(&[H, C], 90.0, "ph5")
        .mark("i")
        .delay("tau")
        .pulse(&[H, C], 180.0, "ph0")
        .delay("tau")
        .mark("j")
        .ev(Event::T1Half)
        .pulse(&[C], 180.0, "ph8")
        .ev(Event::T1Half)
        .mark("k")
        .grad("G8")
        .grad("G6")
        .pulse(&[H], 180.0, "ph0")
        .grad("G7")
        .mark("lm")
        .pulse(&[H], 90.0, "ph6")
        .pulse(&[C], 90.0, "ph0")
        .mark("o")
        .delay("tauf")
        .pulse(&[H, C], 180.0, "ph0")
        .delay("tauf")
        .grad("G9")
        .mark("p")
        .pulse(&[C], 90.0, "ph7")
        .ev(Event::Acquire { decouple: Some(C), phase: "phr".into() })
        .finish()
}

/// Gradient-selected COSY-90. With no refocusing pulse after t₁ the States
/// increment runs backwards (−90°) so that F₁ keeps the sense of F₂.
pub fn build_conventional_cosy() -> EventList {
    Builder::new()
        .phase("ph1", &[0], Some(StatesStep::minus90(H)))
        .phase("ph2", &[0], None)
        .phase("phr", &[0], None)
        .gradient("G1", 10.0, false)
        .gradient("G2", 10.0, true)
        .pulse(&[H], 90.0, "ph1")
        .mark("t1")
        .ev(Event::T1Half)
        .ev(Event::T1Half)
        .grad("G1")
        .pulse(&[H], 90.0, "ph2")
        .mark("mix")
        .grad("G2")
        .ev(Event::Acquire { decouple: None, phase: "phr".into() })
        .finish()
}

/// INEPT transfer I_z → 2I_zS_z on its own; the receiver sees nothing.
pub fn build_inept(tau_s: f64) -> EventList {
    Builder::new()
        .define("tau", tau_s)
        .phase("ph0", &[0], None)
        .phase("ph1", &[0], None)
        .phase("ph2", &[1], None)
        .phase("phr", &[0], None)
        .ev(Event::Purge)
        .mark("c")
        .pulse(&[H], 90.0, "ph1")
        .delay("tau")
        .pulse(&[H, C], 180.0, "ph0")
        .delay("tau")
        .mark("d")
        .pulse(&[H], 90.0, "ph2")
        .mark("e")
        .ev(Event::Acquire { decouple: None, phase: "phr".into() })
        .finish()
}

/// Swaps in a different receiver table, e.g. [`PATHWAY_RECEIVER`].
pub fn with_receiver(mut list: EventList, entries: &[u8]) -> EventList {
    if let Some(Event::Acquire { phase, .. }) = list.events.last() {
        let name = phase.clone();
        if let Some(t) = list.phase_table_mut(&name) {
            t.entries = entries.to_vec();
        }
    }
    list
}

/// Acquisition parameters as an operator would enter them.
#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionParams {
    pub sw1_hz: f64,
    pub sw2_hz: f64,
    pub aq1_s: f64,
    pub aq2_s: f64,
    pub scans: usize,
    pub quadrature: Quadrature,
    /// Accepted for completeness; steady state is assumed, so they have no effect.
    pub dummy_scans: usize,
    /// Accepted for completeness; full relaxation between scans is assumed.
    pub recovery_s: f64,
}

impl Default for AcquisitionParams {
    fn default() -> Self {
        AcquisitionParams {
            sw1_hz: 700.0,
            sw2_hz: 700.0,
            aq1_s: 0.09,
            aq2_s: 0.25,
            scans: 2,
            quadrature: Quadrature::States,
            dummy_scans: 8,
            recovery_s: 1.8,
        }
    }
}

/// Everything the driver needs to run one 2D experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub program: EventList,
    pub n_t1: usize,
    pub n_t2: usize,
    pub sw1_hz: f64,
    pub sw2_hz: f64,
    pub scans: usize,
    pub quadrature: Quadrature,
    /// Half INEPT delay; 2τ = 1/(2·¹J_CH) when tuned.
    pub tau_s: f64,
    pub dummy_scans: usize,
    pub recovery_s: f64,
}

impl ExperimentPlan {
    /// Builds a plan, overriding the program's `tau` (and `tauf`) symbols when
    /// `tau_s` is given.
    pub fn new(mut program: EventList, tau_s: Option<f64>, p: &AcquisitionParams) -> Result<Self> {
        if let Some(t) = tau_s {
            program.set_symbol("tau", t);
            if program.symbol("tauf").is_some() {
                program.set_symbol("tauf", t);
            }
        }
        let tau_s = program.symbol("tau").unwrap_or(0.0);
        let plan = ExperimentPlan {
            program,
            n_t1: Fid2D::points_for(p.aq1_s, p.sw1_hz),
            n_t2: Fid2D::points_for(p.aq2_s, p.sw2_hz),
            sw1_hz: p.sw1_hz,
            sw2_hz: p.sw2_hz,
            scans: p.scans,
            quadrature: p.quadrature,
            tau_s,
            dummy_scans: p.dummy_scans,
            recovery_s: p.recovery_s,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.sw1_hz) || !positive(self.sw2_hz) {
            return Err(Error::validation("spectral widths must be positive"));
        }
        if self.n_t1 == 0 || self.n_t2 == 0 {
            return Err(Error::validation("acquisition needs at least one point per dimension"));
        }
        if self.scans == 0 {
            return Err(Error::validation("scans must be at least 1"));
        }
        if !(self.tau_s.is_finite() && self.tau_s >= 0.0) {
            return Err(Error::validation("tau must be finite and non-negative"));
        }
        self.program.validate()
    }

    pub fn dwell1(&self) -> f64 {
        1.0 / self.sw1_hz
    }

    pub fn dwell2(&self) -> f64 {
        1.0 / self.sw2_hz
    }

    /// t₁ of increment k.
    pub fn t1(&self, k: usize) -> f64 {
        k as f64 * self.dwell1()
    }
}

#[cfg(test)]
mod checkpoints;
#[cfg(test)]
mod tests;
