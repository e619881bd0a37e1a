use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use super::ExperimentPlan;
use crate::engine::{Basis, Engine, EngineConfig, Ensemble, Operator};
use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::processing::{Fid2D, Quadrature};
use crate::pulseprog::{Event, EventList};
use crate::spinsys::{Channel, Isotopomer};

/// Label of the implicit checkpoint taken at the start of acquisition.
pub const ACQ_MARK: &str = "acq";

/// One transient: which t₁, which scan of the cycle, and which quadrature
/// variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransientSpec {
    pub t1_s: f64,
    pub scan: usize,
    /// Adds 90° to pulses whose table is flagged for States on their channel.
    pub states_shift: bool,
    /// Multiplies the area of gradients flagged `alternate`.
    pub g_sign: f64,
}

impl Default for TransientSpec {
    fn default() -> Self {
        TransientSpec { t1_s: 0.0, scan: 0, states_shift: false, g_sign: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct Transient {
    /// State at each `mark`, taken at the gradient isocenter so that every
    /// coherence pathway is still present, followed by the receiver-visible
    /// state under [`ACQ_MARK`].
    pub checkpoints: Vec<(String, Operator)>,
    /// Ensemble-averaged density operator at the start of acquisition.
    pub observable: Operator,
    pub receiver: u8,
    pub decouple: bool,
}

impl Transient {
    pub fn checkpoint(&self, label: &str) -> Option<&Operator> {
        self.checkpoints.iter().find(|(l, _)| l == label).map(|(_, r)| r)
    }
}

fn snapshot(ens: &Ensemble) -> Operator {
    ens.isocenter().unwrap_or_else(|| ens.observable())
}

/// Propagates one transient of `program` through `engine`.
pub fn run_transient(engine: &Engine, program: &EventList, spec: &TransientSpec, capture: bool) -> Result<Transient> {
    let basis = engine.basis();
    let mut ens = Ensemble::new(engine.equilibrium(false), engine.config().gradients);
    let mut checkpoints = Vec::new();
    // largest wavenumber change any single gradient can still impose, summed over the rest
    let weight: f64 = (0..basis.n_spins()).map(|k| basis.channel(k).gamma_rel()).sum();
    let mut reach: f64 = program
        .events
        .iter()
        .filter_map(|e| match e {
            Event::Gradient(g) => program.gradient(g).map(|d| d.area.abs() * weight),
            _ => None,
        })
        .sum();
    for event in &program.events {
        match event {
            Event::Purge => ens.reset(engine.equilibrium(true)),
            Event::Pulse { channels, angle_deg, phase } => {
                let table = program
                    .phase_table(phase)
                    .ok_or_else(|| Error::validation(format!("undefined phase table `{phase}`")))?;
                for &ch in channels {
                    let shift = match table.states {
                        Some(st) if spec.states_shift && st.channel == ch => i32::from(st.quadrants),
                        _ => 0,
                    };
                    let q = i32::from(table.at(spec.scan)) + shift;
                    ens.for_each_mut(|r| engine.pulse_quadrant(r, ch, *angle_deg, q));
                }
            }
            Event::Delay(d) => {
                let t = program.delay_seconds(d)?;
                ens.for_each_mut(|r| engine.evolve_delay(r, t));
            }
            Event::Gradient(name) => {
                let g =
                    program.gradient(name).ok_or_else(|| Error::validation(format!("undefined gradient `{name}`")))?;
                let area = if g.alternate { g.area * spec.g_sign } else { g.area };
                ens.gradient(basis, area);
                reach -= g.area.abs() * weight;
                ens.prune(reach.max(0.0));
            }
            Event::T1Half => {
                let t = spec.t1_s / 2.0;
                ens.for_each_mut(|r| engine.evolve(r, t));
            }
            Event::Mark(label) => {
                if capture {
                    checkpoints.push((label.clone(), snapshot(&ens)));
                }
            }
            Event::Acquire { decouple, phase } => {
                let observable = ens.observable();
                if capture {
                    checkpoints.push((ACQ_MARK.to_string(), observable.clone()));
                }
                return Ok(Transient {
                    checkpoints,
                    observable,
                    receiver: program.phase(phase, spec.scan)?,
                    decouple: *decouple == Some(Channel::C13),
                });
            }
        }
    }
    Err(Error::validation("missing acquire"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CaptureKey {
    pub increment: usize,
    pub component: usize,
    pub scan: usize,
    pub isotopomer: usize,
}

/// Checkpoint states of every captured transient.
#[derive(Debug, Clone, Default)]
pub struct CheckpointCapture {
    bases: Vec<Basis>,
    snapshots: BTreeMap<CaptureKey, (u8, Vec<(String, Operator)>)>,
}

impl CheckpointCapture {
    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &CaptureKey> {
        self.snapshots.keys()
    }

    pub fn basis(&self, isotopomer: usize) -> Option<&Basis> {
        self.bases.get(isotopomer)
    }

    /// Labels in time order, as recorded for the first transient.
    pub fn labels(&self) -> Vec<&str> {
        self.snapshots.values().next().map(|(_, v)| v.iter().map(|(l, _)| l.as_str()).collect()).unwrap_or_default()
    }

    pub fn get(&self, key: &CaptureKey, label: &str) -> Option<&Operator> {
        self.snapshots.get(key)?.1.iter().find(|(l, _)| l == label).map(|(_, r)| r)
    }

    /// Coefficient of the product operator written as `op` (e.g. `2*H1z*H2y`).
    pub fn project(&self, key: &CaptureKey, label: &str, op: &str) -> Result<f64> {
        let basis =
            self.basis(key.isotopomer).ok_or_else(|| Error::validation(format!("no isotopomer {}", key.isotopomer)))?;
        let rho =
            self.get(key, label).ok_or_else(|| Error::validation(format!("no checkpoint `{label}` for {key:?}")))?;
        Ok(basis.project(rho, &basis.parse_op(op)?))
    }

    /// Receiver-weighted mean over scans of one increment/component, which
    /// is the state the phase cycle effectively keeps.
    pub fn averaged(&self, increment: usize, component: usize, isotopomer: usize, label: &str) -> Option<Operator> {
        let mut acc: Option<Operator> = None;
        let mut n = 0.0;
        for (k, (q, snaps)) in &self.snapshots {
            if k.increment != increment || k.component != component || k.isotopomer != isotopomer {
                continue;
            }
            let rho = snaps.iter().find(|(l, _)| l == label)?.1.clone() * receiver_factor(*q);
            acc = Some(match acc {
                Some(a) => a + rho,
                None => rho,
            });
            n += 1.0;
        }
        acc.map(|a| a / C64::new(n, 0.0))
    }
}

fn receiver_factor(q: u8) -> C64 {
    C64::new(0.0, -1.0).powi(i32::from(q))
}

/// Which protons the receiver listens to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Detect {
    #[default]
    All,
    /// Only protons bonded to the ¹³C of each isotopomer.
    Labeled,
    /// Every proton except those bonded to the ¹³C.
    Unlabeled,
}

impl Detect {
    fn spins(self, iso: &Isotopomer) -> Vec<usize> {
        let labeled = iso.labeled_protons();
        (0..iso.n_spins())
            .filter(|&k| iso.spins[k].channel == Channel::H1)
            .filter(|k| match self {
                Detect::All => true,
                Detect::Labeled => labeled.contains(k),
                Detect::Unlabeled => !labeled.contains(k),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    pub exec: Exec,
    /// Record checkpoint states for every transient.
    pub capture: bool,
    pub detect: Detect,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub fid: Fid2D,
    pub checkpoints: CheckpointCapture,
}

type Captured = Vec<(CaptureKey, u8, Vec<(String, Operator)>)>;

/// Runs every t₁ increment, quadrature component, scan and isotopomer of
/// `plan` and sums the weighted, receiver-phased signals.
///
/// For States data each component is the sum of both gradient-selected
/// pathways (echo plus antiecho), which yields pure-phase lineshapes. For
/// echo-antiecho data component 0 holds the `+` selection and component 1
/// the `−` selection.
pub fn run_experiment(
    plan: &ExperimentPlan,
    isotopomers: &[Isotopomer],
    config: EngineConfig,
    opts: RunOptions,
) -> Result<Experiment> {
    plan.validate()?;
    if isotopomers.is_empty() {
        return Err(Error::validation("no isotopomers to simulate"));
    }
    for iso in isotopomers {
        iso.validate()?;
    }
    let engines: Vec<Engine> = isotopomers.iter().map(|iso| Engine::new(iso, config)).collect();

    let detectors: Vec<Vec<usize>> = isotopomers.iter().map(|iso| opts.detect.spins(iso)).collect();
    let rows = par::try_map_indexed(opts.exec, plan.n_t1, |k| {
        run_increment(plan, isotopomers, &engines, &detectors, k, opts.capture)
    })?;

    let mut fid = Fid2D::zeros(plan.n_t1, plan.n_t2, plan.sw1_hz, plan.sw2_hz, plan.quadrature);
    let mut checkpoints =
        CheckpointCapture { bases: engines.iter().map(|e| e.basis().clone()).collect(), snapshots: BTreeMap::new() };
    for (k, (comps, captured)) in rows.into_iter().enumerate() {
        for (c, row) in comps.into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                fid.data[(k, c, j)] = v;
            }
        }
        for (key, q, snaps) in captured {
            checkpoints.snapshots.insert(key, (q, snaps));
        }
    }
    Ok(Experiment { fid, checkpoints })
}

fn run_increment(
    plan: &ExperimentPlan,
    isotopomers: &[Isotopomer],
    engines: &[Engine],
    detectors: &[Vec<usize>],
    k: usize,
    capture: bool,
) -> Result<([Vec<C64>; 2], Captured)> {
    let t1_s = plan.t1(k);
    let mut comps = [vec![C64::new(0.0, 0.0); plan.n_t2], vec![C64::new(0.0, 0.0); plan.n_t2]];
    let mut captured = Vec::new();
    for (c, comp) in comps.iter_mut().enumerate() {
        let (states_shift, signs): (bool, &[f64]) = match plan.quadrature {
            Quadrature::States => (c == 1, &[1.0, -1.0]),
            Quadrature::EchoAntiecho if c == 0 => (false, &[1.0]),
            Quadrature::EchoAntiecho => (false, &[-1.0]),
        };
        for (i, (iso, engine)) in isotopomers.iter().zip(engines).enumerate() {
            let dim = engine.basis().dim();
            let mut acc = Operator::zeros(dim, dim);
            let mut decouple = false;
            for (gi, &g_sign) in signs.iter().enumerate() {
                for scan in 0..plan.scans {
                    let spec = TransientSpec { t1_s, scan, states_shift, g_sign };
                    let want = capture && gi == 0;
                    let tr = run_transient(engine, &plan.program, &spec, want).map_err(|e| Error::Propagation {
                        increment: k,
                        scan,
                        source: Box::new(e),
                    })?;
                    acc += &tr.observable * receiver_factor(tr.receiver);
                    decouple = tr.decouple;
                    if want {
                        let key = CaptureKey { increment: k, component: c, scan, isotopomer: i };
                        captured.push((key, tr.receiver, tr.checkpoints));
                    }
                }
            }
            let sig = engine.acquire_spins(&acc, &detectors[i], plan.n_t2, plan.dwell2(), decouple, 0);
            for (dst, v) in comp.iter_mut().zip(sig) {
                *dst += v * iso.weight;
            }
        }
    }
    Ok((comps, captured))
}
