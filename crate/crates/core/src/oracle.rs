//! Closed-form product-operator states of the diagonal-free COSY.
//!
//! Everything here is trigonometry on labelled terms. No matrices are built,
//! so these results can be used to check the density-matrix engine without
//! sharing any of its code.
//!
//! Labels use `I1`, `I2` for the two protons and `S` for the ¹³C, with the
//! usual normalization prefactor: `I1y`, `2I1xI2z`, `2I1ySz`, `4I1zI2xSz`.

use std::f64::consts::PI;
use std::fmt;

/// One labelled term of a product-operator expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorTerm {
    pub label: String,
    pub coefficient: f64,
}

impl OperatorTerm {
    fn new(label: &str, coefficient: f64) -> Self {
        OperatorTerm { label: label.to_string(), coefficient }
    }
}

/// The four trigonometric products that appear in every closed-form state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trig {
    /// cos(Ω₁t₁)·cos(πJt₁)
    pub cc: f64,
    /// sin(Ω₁t₁)·cos(πJt₁)
    pub sc: f64,
    /// cos(Ω₁t₁)·sin(πJt₁)
    pub cs: f64,
    /// sin(Ω₁t₁)·sin(πJt₁)
    pub ss: f64,
}

impl Trig {
    pub fn new(omega1_rad_s: f64, j_h_hz: f64, t1_s: f64) -> Self {
        let (so, co) = (omega1_rad_s * t1_s).sin_cos();
        let (sj, cj) = (PI * j_h_hz * t1_s).sin_cos();
        Trig { cc: co * cj, sc: so * cj, cs: co * sj, ss: so * sj }
    }
}

/// State just before the proton mixing pulse.
pub fn before_mixing(omega1_rad_s: f64, j_h_hz: f64, t1_s: f64) -> Vec<OperatorTerm> {
    let t = Trig::new(omega1_rad_s, j_h_hz, t1_s);
    vec![
        OperatorTerm::new("I1y", -t.cc),
        OperatorTerm::new("I1x", t.sc),
        OperatorTerm::new("2I1xI2z", -t.cs),
        OperatorTerm::new("2I1yI2z", t.ss),
    ]
}

/// State just after the proton 90°x mixing pulse.
pub fn after_mixing(omega1_rad_s: f64, j_h_hz: f64, t1_s: f64) -> Vec<OperatorTerm> {
    let t = Trig::new(omega1_rad_s, j_h_hz, t1_s);
    vec![
        OperatorTerm::new("I1z", -t.cc),
        OperatorTerm::new("I1x", t.sc),
        OperatorTerm::new("2I1xI2y", t.cs),
        OperatorTerm::new("2I1zI2y", t.ss),
    ]
}

/// State just before the final ¹³C 90° pulse, for I₂ on a ¹²C.
pub fn before_filter_pulse(omega1_rad_s: f64, j_h_hz: f64, t1_s: f64) -> Vec<OperatorTerm> {
    let t = Trig::new(omega1_rad_s, j_h_hz, t1_s);
    vec![OperatorTerm::new("2I1ySz", t.sc), OperatorTerm::new("2I1zI2y", t.ss)]
}

/// State just before the final ¹³C 90° pulse when I₁ and I₂ share the ¹³C.
pub fn geminal_before_filter_pulse(omega1_rad_s: f64, j_h_hz: f64, t1_s: f64) -> Vec<OperatorTerm> {
    let t = Trig::new(omega1_rad_s, j_h_hz, t1_s);
    vec![OperatorTerm::new("2I1ySz", t.sc), OperatorTerm::new("4I1zI2xSz", t.ss)]
}

/// Surviving inphase fraction after an o→p interval tuned to `j_tuned_hz`
/// when the actual one-bond coupling is `j_true_hz`.
pub fn residual_inphase(j_true_hz: f64, j_tuned_hz: f64) -> f64 {
    (PI * j_true_hz / (2.0 * j_tuned_hz)).cos()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Nucleus {
    I1,
    I2,
    S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Dir {
    X,
    Y,
    Z,
}

/// A parsed label: sorted factors, each nucleus at most once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Label(pub Vec<(Nucleus, Dir)>);

impl Label {
    pub fn parse(text: &str) -> Option<Self> {
        let mut rest = text.trim_start_matches(|c: char| c.is_ascii_digit());
        let mut factors = Vec::new();
        while !rest.is_empty() {
            let (n, tail) = if let Some(t) = rest.strip_prefix("I1") {
                (Nucleus::I1, t)
            } else if let Some(t) = rest.strip_prefix("I2") {
                (Nucleus::I2, t)
            } else {
                (Nucleus::S, rest.strip_prefix('S')?)
            };
            let d = match tail.chars().next()?.to_ascii_lowercase() {
                'x' => Dir::X,
                'y' => Dir::Y,
                'z' => Dir::Z,
                _ => return None,
            };
            if factors.iter().any(|(m, _)| *m == n) {
                return None;
            }
            factors.push((n, d));
            rest = &tail[1..];
        }
        if factors.is_empty() {
            return None;
        }
        factors.sort();
        let label = Label(factors);
        // the numeric prefix, if present, must be the normalization 2^(k-1)
        let prefix = &text[..text.len() - text.trim_start_matches(|c: char| c.is_ascii_digit()).len()];
        match prefix {
            "" => Some(label),
            p if p == label.prefix() => Some(label),
            _ => None,
        }
    }

    fn prefix(&self) -> String {
        match self.0.len() {
            1 => String::new(),
            k => (1u32 << (k - 1)).to_string(),
        }
    }

    /// Number of transverse proton factors and whether the ¹³C is transverse.
    fn transverse(&self) -> (usize, bool) {
        let h = self.0.iter().filter(|(n, d)| *n != Nucleus::S && *d != Dir::Z).count();
        let s = self.0.iter().any(|(n, d)| *n == Nucleus::S && *d != Dir::Z);
        (h, s)
    }

    /// Detectable as proton signal under ¹³C decoupling: exactly one
    /// transverse proton and no ¹³C factor at all.
    pub fn observable(&self) -> bool {
        self.transverse().0 == 1 && !self.0.iter().any(|(n, _)| *n == Nucleus::S)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.prefix())?;
        for (n, d) in &self.0 {
            let n = match n {
                Nucleus::I1 => "I1",
                Nucleus::I2 => "I2",
                Nucleus::S => "S",
            };
            let d = match d {
                Dir::X => 'x',
                Dir::Y => 'y',
                Dir::Z => 'z',
            };
            write!(f, "{n}{d}")?;
        }
        Ok(())
    }
}

/// Applies a 90°x pulse to the listed nuclei using the textbook rules
/// I_y → I_z, I_z → −I_y (I_x unchanged).
pub fn rotate_x90(terms: &[OperatorTerm], nuclei: &[Nucleus]) -> Vec<OperatorTerm> {
    terms
        .iter()
        .map(|t| {
            let label = Label::parse(&t.label).unwrap_or_else(|| panic!("bad label {}", t.label));
            let mut sign = 1.0;
            let factors = label
                .0
                .into_iter()
                .map(|(n, d)| {
                    if !nuclei.contains(&n) {
                        return (n, d);
                    }
                    match d {
                        Dir::X => (n, Dir::X),
                        Dir::Y => (n, Dir::Z),
                        Dir::Z => {
                            sign = -sign;
                            (n, Dir::Y)
                        }
                    }
                })
                .collect();
            OperatorTerm { label: Label(factors).to_string(), coefficient: sign * t.coefficient }
        })
        .collect()
}

/// Terms still detectable after the final ¹³C 90° pulse.
pub fn survivors_after_p(terms: &[OperatorTerm]) -> Vec<OperatorTerm> {
    rotate_x90(terms, &[Nucleus::S])
        .into_iter()
        .filter(|t| Label::parse(&t.label).is_some_and(|l| l.observable()))
        .collect()
}

/// The closed-form states, by position in the sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// End of t₁, before the proton mixing pulse.
    BeforeMixing,
    /// Just after the mixing pulse.
    AfterMixing,
    /// Before the final ¹³C 90° pulse, I₂ on a ¹²C.
    BeforeFilterPulse,
    /// Before the final ¹³C 90° pulse, I₁ and I₂ on the same ¹³C.
    GeminalBeforeFilterPulse,
}

impl Stage {
    pub fn state(self, omega1_rad_s: f64, j_h_hz: f64, t1_s: f64) -> Vec<OperatorTerm> {
        let f = match self {
            Stage::BeforeMixing => before_mixing,
            Stage::AfterMixing => after_mixing,
            Stage::BeforeFilterPulse => before_filter_pulse,
            Stage::GeminalBeforeFilterPulse => geminal_before_filter_pulse,
        };
        f(omega1_rad_s, j_h_hz, t1_s)
    }

    /// Mark in the built-in sequence where the state holds.
    pub fn checkpoint(self) -> &'static str {
        match self {
            Stage::BeforeMixing => "lm",
            Stage::AfterMixing => "o",
            Stage::BeforeFilterPulse | Stage::GeminalBeforeFilterPulse => "p",
        }
    }

    /// Sign relating each closed-form term to the engine's projection on the
    /// same label, for the sine (Φ5 = y) States component of the built-in
    /// sequence.
    ///
    /// | stage                    | terms in order          | signs   |
    /// |--------------------------|-------------------------|---------|
    /// | BeforeMixing             | I1y I1x 2I1xI2z 2I1yI2z | + − − − |
    /// | AfterMixing              | I1z I1x 2I1xI2y 2I1zI2y | + − − + |
    /// | BeforeFilterPulse        | 2I1ySz 2I1zI2y          | − +     |
    /// | GeminalBeforeFilterPulse | 2I1ySz 4I1zI2xSz        | − −     |
    ///
    /// The labels coincide once I1, I2, S are mapped onto the engine's spins.
    /// The signs absorb the 180° proton pulse between l and m, which the
    /// closed forms leave out, and two terms whose sign is opposite to plain
    /// J evolution: 2I1xI2z before mixing and 4I1zI2xSz in the geminal state
    /// (J evolution takes 2I1zI2y to −4I1zI2xSz).
    pub fn engine_signs(self) -> &'static [f64] {
        match self {
            Stage::BeforeMixing => &[1.0, -1.0, -1.0, -1.0],
            Stage::AfterMixing => &[1.0, -1.0, -1.0, 1.0],
            Stage::BeforeFilterPulse => &[-1.0, 1.0],
            Stage::GeminalBeforeFilterPulse => &[-1.0, -1.0],
        }
    }
}

/// Rewrites an oracle label in the engine's operator syntax, e.g.
/// `2I1zI2y` → `2*H1z*H2y` with `names = ["H1", "H2", "C1"]`.
pub fn engine_label(label: &str, names: [&str; 3]) -> Option<String> {
    let l = Label::parse(label)?;
    let mut parts = Vec::new();
    if l.0.len() > 1 {
        parts.push(l.prefix());
    }
    for (n, d) in &l.0 {
        let name = match n {
            Nucleus::I1 => names[0],
            Nucleus::I2 => names[1],
            Nucleus::S => names[2],
        };
        let d = match d {
            Dir::X => 'x',
            Dir::Y => 'y',
            Dir::Z => 'z',
        };
        parts.push(format!("{name}{d}"));
    }
    Some(parts.join("*"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn coef(terms: &[OperatorTerm], label: &str) -> f64 {
        terms.iter().filter(|t| t.label == label).map(|t| t.coefficient).sum()
    }

    #[test]
    fn before_mixing_special_points() {
        let t = before_mixing(0.0, 7.0, 0.0);
        assert_eq!(coef(&t, "I1y"), -1.0);
        assert!(t.iter().filter(|t| t.label != "I1y").all(|t| t.coefficient.abs() < 1e-15));

        // Ω₁t₁ = π/2 and πJt₁ = π/2 with t₁ = 0.05 s
        let t1 = 0.05;
        let t = before_mixing(PI / 2.0 / t1, 0.5 / t1, t1);
        assert!((coef(&t, "2I1yI2z") - 1.0).abs() < 1e-12);
        assert!(t.iter().filter(|t| t.label != "2I1yI2z").all(|t| t.coefficient.abs() < 1e-12));

        let t = before_mixing(PI / t1, 0.0, t1);
        assert!((coef(&t, "I1y") - 1.0).abs() < 1e-12);
    }

    #[test]
    fn after_mixing_at_zero_is_longitudinal() {
        let t = after_mixing(1.0, 7.0, 0.0);
        assert_eq!(coef(&t, "I1z"), -1.0);
        assert!(survivors_after_p(&t).iter().all(|t| t.coefficient == 0.0));
    }

    #[test]
    fn only_cross_survives_the_filter() {
        let t1 = 0.05;
        let t = before_filter_pulse(PI / 2.0 / t1, 0.5 / t1, t1);
        let s = survivors_after_p(&t);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].label, "2I1zI2y");
        assert!((s[0].coefficient - 1.0).abs() < 1e-12);
    }

    #[test]
    fn geminal_nothing_survives() {
        for t1 in [0.0, 0.01, 0.037, 0.09] {
            assert!(survivors_after_p(&geminal_before_filter_pulse(700.0, 9.0, t1)).is_empty());
        }
    }

    #[test]
    fn residual_law() {
        assert!(residual_inphase(160.0, 160.0).abs() < 1e-15);
        assert!((residual_inphase(176.0, 160.0) + 0.156434).abs() < 1e-6);
        assert!((residual_inphase(144.0, 160.0) - 0.156434).abs() < 1e-6);
    }

    #[test]
    fn mixing_rotation_matches_after_mixing_except_cross_sign() {
        let (w, j, t1) = (2.0 * PI * 37.0, 7.3, 0.021);
        let rotated = rotate_x90(&before_mixing(w, j, t1), &[Nucleus::I1, Nucleus::I2]);
        let closed = after_mixing(w, j, t1);
        for (k, (r, e)) in rotated.iter().zip(&closed).enumerate() {
            assert_eq!(r.label, e.label);
            // the closed form's 2I1zI2y term carries the opposite sign
            let expected = if k == 3 { -e.coefficient } else { e.coefficient };
            assert!((r.coefficient - expected).abs() < 1e-15, "term {k}");
        }
    }

    #[test]
    fn labels_round_trip() {
        for l in ["I1y", "2I1xI2z", "2I1ySz", "4I1zI2xSz", "Sz"] {
            assert_eq!(Label::parse(l).unwrap().to_string(), l);
        }
        assert!(Label::parse("3I1xI2z").is_none());
        assert!(Label::parse("I1xI1y").is_none());
        assert!(Label::parse("I3x").is_none());
        assert_eq!(engine_label("2I1zI2y", ["H1", "H2", "C1"]).unwrap(), "2*H1z*H2y");
        assert_eq!(engine_label("I1x", ["H1", "H2", "C1"]).unwrap(), "H1x");
    }

    proptest! {
        #[test]
        fn before_mixing_norm_is_one(w in -2000.0f64..2000.0, j in 0.0f64..20.0, t1 in 0.0f64..0.1) {
            let n: f64 = before_mixing(w, j, t1).iter().map(|t| t.coefficient.powi(2)).sum();
            prop_assert!((n - 1.0).abs() < 1e-12);
        }

        #[test]
        fn rotation_preserves_norm(w in -2000.0f64..2000.0, j in 0.0f64..20.0, t1 in 0.0f64..0.1) {
            let e1 = before_mixing(w, j, t1);
            let r = rotate_x90(&e1, &[Nucleus::I1, Nucleus::I2]);
            let n0: f64 = e1.iter().map(|t| t.coefficient.powi(2)).sum();
            let n1: f64 = r.iter().map(|t| t.coefficient.powi(2)).sum();
            prop_assert!((n0 - n1).abs() < 1e-12);
        }
    }
}
