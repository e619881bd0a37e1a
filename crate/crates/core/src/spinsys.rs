//! Spin systems, the text format they are read from, and natural-abundance
//! isotopomer enumeration.
//!
//! A [`SpinSystemSpec`] describes a molecule fragment: protons with their
//! offsets, carbon sites with the protons directly bonded to them, and the
//! homonuclear couplings. Since ¹²C is spin-0, only molecules with a ¹³C at a
//! given site carry that carbon into the Hilbert space; see
//! [`enumerate_isotopomers`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Natural abundance of ¹³C.
pub const DEFAULT_ABUNDANCE: f64 = 0.011;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    H1,
    C13,
}

impl Channel {
    /// Gyromagnetic ratio relative to ¹H.
    pub fn gamma_rel(self) -> f64 {
        match self {
            Channel::H1 => 1.0,
            Channel::C13 => GAMMA_C_OVER_H,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Channel::H1 => "H",
            Channel::C13 => "C",
        }
    }

    pub fn from_symbol(s: &str) -> Result<Self> {
        match s {
            "H" | "1H" | "H1" => Ok(Channel::H1),
            "C" | "13C" | "C13" => Ok(Channel::C13),
            _ => Err(Error::UnknownChannel(s.to_string())),
        }
    }
}

/// γ(¹³C)/γ(¹H).
pub const GAMMA_C_OVER_H: f64 = 0.25144;

/// A spin in an isotopomer. `id` is its position in the Kronecker ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct Spin {
    pub id: usize,
    pub channel: Channel,
    /// Rotating-frame offset in Hz.
    pub shift_hz: f64,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingKind {
    Homonuclear,
    OneBondCH,
    LongRangeCH,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub spin_a: usize,
    pub spin_b: usize,
    pub j_hz: f64,
    pub kind: CouplingKind,
}

/// One isotopic variant of the molecule with its population weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Isotopomer {
    pub spins: Vec<Spin>,
    pub couplings: Vec<Coupling>,
    pub weight: f64,
    /// Carbon site id carrying the ¹³C label, `None` for the all-¹²C molecule.
    pub labeled_site: Option<u32>,
}

impl Isotopomer {
    pub fn n_spins(&self) -> usize {
        self.spins.len()
    }

    pub fn spin_by_label(&self, label: &str) -> Option<usize> {
        self.spins.iter().position(|s| s.label == label)
    }

    /// Indices of protons carrying a one-bond coupling to the ¹³C label.
    pub fn labeled_protons(&self) -> Vec<usize> {
        (0..self.spins.len())
            .filter(|&k| {
                self.spins[k].channel == Channel::H1
                    && self
                        .couplings
                        .iter()
                        .any(|c| c.kind == CouplingKind::OneBondCH && (c.spin_a == k || c.spin_b == k))
            })
            .collect()
    }

    /// Checks the channel/kind consistency of every coupling.
    pub fn validate(&self) -> Result<()> {
        if self.weight.is_nan() || self.weight <= 0.0 {
            return Err(Error::validation("isotopomer weight must be positive"));
        }
        for c in &self.couplings {
            let (a, b) = match (self.spins.get(c.spin_a), self.spins.get(c.spin_b)) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(Error::validation("coupling references a missing spin")),
            };
            if c.spin_a == c.spin_b {
                return Err(Error::validation("coupling of a spin to itself"));
            }
            let homo = a.channel == Channel::H1 && b.channel == Channel::H1;
            let mixed = a.channel != b.channel;
            let ok = match c.kind {
                CouplingKind::Homonuclear => homo,
                CouplingKind::OneBondCH | CouplingKind::LongRangeCH => mixed,
            };
            if !ok {
                return Err(Error::validation(format!(
                    "coupling {}-{} kind {:?} inconsistent with channels",
                    a.label, b.label, c.kind
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtonDef {
    pub id: u32,
    pub shift_hz: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CarbonSite {
    pub id: u32,
    pub shift_hz: f64,
    pub attached: Vec<u32>,
    pub j1ch_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomoCoupling {
    pub a: u32,
    pub b: u32,
    pub j_hz: f64,
}

/// Long-range ¹³C–¹H coupling; unlisted pairs are 0 Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct LongRangeCoupling {
    pub carbon: u32,
    pub proton: u32,
    pub j_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystemSpec {
    pub protons: Vec<ProtonDef>,
    pub carbons: Vec<CarbonSite>,
    pub homo_couplings: Vec<HomoCoupling>,
    pub long_range: Vec<LongRangeCoupling>,
    pub abundance: f64,
}

impl SpinSystemSpec {
    pub fn proton(&self, id: u32) -> Option<&ProtonDef> {
        self.protons.iter().find(|p| p.id == id)
    }

    /// Mean one-bond coupling over all carbon sites.
    pub fn mean_j1ch(&self) -> Option<f64> {
        if self.carbons.is_empty() {
            return None;
        }
        Some(self.carbons.iter().map(|c| c.j1ch_hz).sum::<f64>() / self.carbons.len() as f64)
    }

    /// Returns a copy with every proton offset moved by `delta_hz`.
    pub fn shifted(&self, delta_hz: f64) -> Self {
        let mut out = self.clone();
        for p in &mut out.protons {
            p.shift_hz += delta_hz;
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.protons.is_empty() {
            return Err(Error::validation("no spins"));
        }
        if !(self.abundance > 0.0 && self.abundance < 1.0) {
            return Err(Error::validation(format!("abundance {} outside (0, 1)", self.abundance)));
        }
        let mut ids = BTreeSet::new();
        for p in &self.protons {
            if !ids.insert(p.id) {
                return Err(Error::validation(format!("duplicate proton id {}", p.id)));
            }
        }
        let mut cids = BTreeSet::new();
        let mut owner: BTreeMap<u32, u32> = BTreeMap::new();
        for c in &self.carbons {
            if !cids.insert(c.id) {
                return Err(Error::validation(format!("duplicate carbon id {}", c.id)));
            }
            for &h in &c.attached {
                if !ids.contains(&h) {
                    return Err(Error::validation(format!("carbon {} attached to unknown proton {h}", c.id)));
                }
                if let Some(prev) = owner.insert(h, c.id) {
                    return Err(Error::validation(format!("proton {h} attached to carbons {prev} and {}", c.id)));
                }
            }
        }
        for j in &self.homo_couplings {
            for id in [j.a, j.b] {
                if !ids.contains(&id) {
                    return Err(Error::validation(format!("coupling to unknown spin {id}")));
                }
            }
            if j.a == j.b {
                return Err(Error::validation(format!("proton {} coupled to itself", j.a)));
            }
        }
        for j in &self.long_range {
            if !cids.contains(&j.carbon) || !ids.contains(&j.proton) {
                return Err(Error::validation(format!(
                    "coupling to unknown spin (carbon {}, proton {})",
                    j.carbon, j.proton
                )));
            }
        }
        Ok(())
    }

    /// Writes the spec in the same text format [`parse_spin_system`] reads.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "abundance = {}", self.abundance);
        for p in &self.protons {
            let _ = writeln!(out, "\n[proton {}]\nshift_hz = {}\nlabel = {}", p.id, p.shift_hz, p.label);
        }
        for c in &self.carbons {
            let attached: Vec<String> = c.attached.iter().map(|a| a.to_string()).collect();
            let _ = writeln!(
                out,
                "\n[carbon {}]\nshift_hz = {}\nattached = {}\nj1ch_hz = {}",
                c.id,
                c.shift_hz,
                attached.join(" "),
                c.j1ch_hz
            );
        }
        if !self.homo_couplings.is_empty() {
            out.push_str("\n[jhh]\n");
            for j in &self.homo_couplings {
                let _ = writeln!(out, "{} {} {}", j.a, j.b, j.j_hz);
            }
        }
        if !self.long_range.is_empty() {
            out.push_str("\n[jch]\n");
            for j in &self.long_range {
                let _ = writeln!(out, "{} {} {}", j.carbon, j.proton, j.j_hz);
            }
        }
        out
    }
}

enum Section {
    Top,
    Proton(usize),
    Carbon(usize),
    Jhh,
    Jch,
}

fn parse_f64(s: &str, line: usize, col: usize) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| Error::syntax(line, col, format!("expected a number, found `{s}`")))?;
    if !v.is_finite() {
        return Err(Error::syntax(line, col, "number must be finite"));
    }
    Ok(v)
}

fn parse_id(s: &str, line: usize, col: usize) -> Result<u32> {
    s.parse().map_err(|_| Error::syntax(line, col, format!("expected an integer id, found `{s}`")))
}

/// Parses a spin-system document.
///
/// ```text
/// abundance = 0.011        # optional
/// [proton 1]
/// shift_hz = 120
/// label = H1
/// [carbon 1]
/// attached = 1
/// j1ch_hz = 160
/// [jhh]
/// 1 2 7.5
/// [jch]                    # optional long-range, carbon proton j
/// 1 2 0.0
/// ```
pub fn parse_spin_system(text: &str) -> Result<SpinSystemSpec> {
    let mut spec = SpinSystemSpec {
        protons: Vec::new(),
        carbons: Vec::new(),
        homo_couplings: Vec::new(),
        long_range: Vec::new(),
        abundance: DEFAULT_ABUNDANCE,
    };
    let mut section = Section::Top;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let content = raw.split('#').next().unwrap_or("");
        let col = content.len() - content.trim_start().len() + 1;
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        if let Some(inner) = content.strip_prefix('[') {
            let inner =
                inner.strip_suffix(']').ok_or_else(|| Error::syntax(line_no, col, "unterminated section header"))?;
            let mut words = inner.split_whitespace();
            section = match (words.next(), words.next(), words.next()) {
                (Some("proton"), Some(id), None) => {
                    let id = parse_id(id, line_no, col)?;
                    spec.protons.push(ProtonDef { id, shift_hz: 0.0, label: format!("H{id}") });
                    Section::Proton(spec.protons.len() - 1)
                }
                (Some("carbon"), Some(id), None) => {
                    let id = parse_id(id, line_no, col)?;
                    spec.carbons.push(CarbonSite { id, shift_hz: 0.0, attached: Vec::new(), j1ch_hz: 0.0 });
                    Section::Carbon(spec.carbons.len() - 1)
                }
                (Some("jhh"), None, None) => Section::Jhh,
                (Some("jch"), None, None) => Section::Jch,
                _ => return Err(Error::syntax(line_no, col, format!("unknown section `[{inner}]`"))),
            };
            continue;
        }
        match section {
            Section::Jhh | Section::Jch => {
                let f: Vec<&str> = content.split_whitespace().collect();
                if f.len() != 3 {
                    return Err(Error::syntax(line_no, col, "expected `a b j_hz`"));
                }
                let a = parse_id(f[0], line_no, col)?;
                let b = parse_id(f[1], line_no, col)?;
                let j = parse_f64(f[2], line_no, col)?;
                if matches!(section, Section::Jhh) {
                    spec.homo_couplings.push(HomoCoupling { a, b, j_hz: j });
                } else {
                    spec.long_range.push(LongRangeCoupling { carbon: a, proton: b, j_hz: j });
                }
            }
            _ => {
                let (key, value) =
                    content.split_once('=').ok_or_else(|| Error::syntax(line_no, col, "expected `key = value`"))?;
                let (key, value) = (key.trim(), value.trim());
                match (&section, key) {
                    (Section::Top, "abundance") => {
                        let a = parse_f64(value, line_no, col)?;
                        if a < 0.0 {
                            return Err(Error::validation(format!("negative abundance {a}")));
                        }
                        spec.abundance = a;
                    }
                    (Section::Proton(i), "shift_hz") => spec.protons[*i].shift_hz = parse_f64(value, line_no, col)?,
                    (Section::Proton(i), "label") => {
                        if value.is_empty() || value.contains(char::is_whitespace) {
                            return Err(Error::syntax(line_no, col, "label must be a single word"));
                        }
                        spec.protons[*i].label = value.to_string();
                    }
                    (Section::Carbon(i), "shift_hz") => spec.carbons[*i].shift_hz = parse_f64(value, line_no, col)?,
                    (Section::Carbon(i), "j1ch_hz") => spec.carbons[*i].j1ch_hz = parse_f64(value, line_no, col)?,
                    (Section::Carbon(i), "attached") => {
                        spec.carbons[*i].attached = value
                            .split(|c: char| c == ',' || c.is_whitespace())
                            .filter(|s| !s.is_empty())
                            .map(|s| parse_id(s, line_no, col))
                            .collect::<Result<_>>()?;
                    }
                    _ => return Err(Error::syntax(line_no, col, format!("unexpected key `{key}`"))),
                }
            }
        }
    }
    spec.validate()?;
    Ok(spec)
}

/// Enumerates the all-¹²C molecule plus one singly-labeled isotopomer per
/// carbon site. Multiply-labeled molecules (weight O(a²)) are dropped.
///
/// Spins are ordered protons first (in document order), then the labeled
/// carbon.
pub fn enumerate_isotopomers(spec: &SpinSystemSpec) -> Vec<Isotopomer> {
    let a = spec.abundance;
    let k = spec.carbons.len() as i32;
    let protons: Vec<Spin> = spec
        .protons
        .iter()
        .enumerate()
        .map(|(i, p)| Spin { id: i, channel: Channel::H1, shift_hz: p.shift_hz, label: p.label.clone() })
        .collect();
    let index_of = |pid: u32| spec.protons.iter().position(|p| p.id == pid).expect("validated proton id");
    let homo: Vec<Coupling> = spec
        .homo_couplings
        .iter()
        .map(|j| Coupling {
            spin_a: index_of(j.a),
            spin_b: index_of(j.b),
            j_hz: j.j_hz,
            kind: CouplingKind::Homonuclear,
        })
        .collect();

    let mut out = vec![Isotopomer {
        spins: protons.clone(),
        couplings: homo.clone(),
        weight: (1.0 - a).powi(k),
        labeled_site: None,
    }];
    for site in &spec.carbons {
        let c_idx = protons.len();
        let mut spins = protons.clone();
        spins.push(Spin { id: c_idx, channel: Channel::C13, shift_hz: site.shift_hz, label: format!("C{}", site.id) });
        let mut couplings = homo.clone();
        for &h in &site.attached {
            couplings.push(Coupling {
                spin_a: index_of(h),
                spin_b: c_idx,
                j_hz: site.j1ch_hz,
                kind: CouplingKind::OneBondCH,
            });
        }
        for lr in spec.long_range.iter().filter(|lr| lr.carbon == site.id) {
            if site.attached.contains(&lr.proton) {
                continue;
            }
            couplings.push(Coupling {
                spin_a: index_of(lr.proton),
                spin_b: c_idx,
                j_hz: lr.j_hz,
                kind: CouplingKind::LongRangeCH,
            });
        }
        out.push(Isotopomer { spins, couplings, weight: a * (1.0 - a).powi(k - 1), labeled_site: Some(site.id) });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_PROTON: &str = "\
# synthetic two-proton fragment
[proton 1]
shift_hz = 120
label = H1
[proton 2]
shift_hz = -80
label = H2
[carbon 1]
attached = 1
j1ch_hz = 160
[jhh]
1 2 7
";

    #[test]
    fn parses_two_proton_fixture() {
        let spec = parse_spin_system(TWO_PROTON).unwrap();
        assert_eq!(spec.protons.len(), 2);
        assert_eq!(spec.carbons.len(), 1);
        assert_eq!(spec.carbons[0].j1ch_hz, 160.0);
        assert_eq!(spec.homo_couplings[0].j_hz, 7.0);
        assert_eq!(spec.abundance, DEFAULT_ABUNDANCE);
        let again = parse_spin_system(&spec.to_text()).unwrap();
        assert_eq!(again, spec);
        assert_eq!(again.to_text(), spec.to_text());
    }

    #[test]
    fn crlf_accepted() {
        let crlf = TWO_PROTON.replace('\n', "\r\n");
        assert_eq!(parse_spin_system(&crlf).unwrap(), parse_spin_system(TWO_PROTON).unwrap());
    }

    #[test]
    fn empty_proton_list_rejected() {
        let err = parse_spin_system("abundance = 0.02\n").unwrap_err();
        assert!(err.to_string().contains("no spins"), "{err}");
    }

    #[test]
    fn errors() {
        let dup = "[proton 1]\n[proton 1]\n";
        assert!(parse_spin_system(dup).unwrap_err().to_string().contains("duplicate"));
        let unknown = "[proton 1]\n[jhh]\n1 3 7\n";
        assert!(parse_spin_system(unknown).unwrap_err().to_string().contains("unknown spin"));
        let neg = "abundance = -0.1\n[proton 1]\n";
        assert!(parse_spin_system(neg).unwrap_err().to_string().contains("negative"));
        let twice = "[proton 1]\n[carbon 1]\nattached = 1\n[carbon 2]\nattached = 1\n";
        assert!(parse_spin_system(twice).is_err());
        match parse_spin_system("[proton 1]\nshift_hz = abc\n") {
            Err(Error::Syntax { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn one_site_weights() {
        let spec = parse_spin_system(TWO_PROTON).unwrap();
        let iso = enumerate_isotopomers(&spec);
        assert_eq!(iso.len(), 2);
        assert!((iso[0].weight - 0.989).abs() < 1e-15);
        assert!((iso[1].weight - 0.011).abs() < 1e-15);
        assert_eq!(iso[1].n_spins(), 3);
        assert_eq!(iso[1].couplings.iter().filter(|c| c.kind == CouplingKind::OneBondCH).count(), 1);
        for i in &iso {
            i.validate().unwrap();
        }
    }

    #[test]
    fn no_carbon_sites() {
        let spec = parse_spin_system("[proton 1]\nshift_hz = 10\n").unwrap();
        let iso = enumerate_isotopomers(&spec);
        assert_eq!(iso.len(), 1);
        assert_eq!(iso[0].weight, 1.0);
    }

    /// Direct binomial expansion over all 2^k labelings, keeping those with at
    /// most one ¹³C.
    fn binomial_single_label(a: f64, k: usize) -> f64 {
        (0..1u32 << k)
            .filter(|m| m.count_ones() <= 1)
            .map(|m| (0..k).map(|i| if m >> i & 1 == 1 { a } else { 1.0 - a }).product::<f64>())
            .sum()
    }

    #[test]
    fn two_sites_sum_to_one_minus_a_squared() {
        let text = "[proton 1]\n[proton 2]\n[carbon 1]\nattached = 1\nj1ch_hz = 160\n[carbon 2]\nattached = 2\nj1ch_hz = 160\n";
        let spec = parse_spin_system(text).unwrap();
        let iso = enumerate_isotopomers(&spec);
        assert_eq!(iso.len(), 3);
        let total: f64 = iso.iter().map(|i| i.weight).sum();
        let a = spec.abundance;
        assert!((total - binomial_single_label(a, 2)).abs() < 1e-15);
        assert!((total - (1.0 - a * a)).abs() < 1e-15);
        assert!((1.0 - total).abs() < 1.3e-4);
    }

    #[test]
    fn geminal_site_carries_both_protons() {
        let text = "[proton 1]\n[proton 2]\n[carbon 7]\nattached = 1, 2\nj1ch_hz = 140\n[jhh]\n1 2 -12\n";
        let spec = parse_spin_system(text).unwrap();
        let iso = enumerate_isotopomers(&spec);
        assert_eq!(iso[1].couplings.iter().filter(|c| c.kind == CouplingKind::OneBondCH).count(), 2);
        assert_eq!(iso[1].labeled_site, Some(7));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn spec_strategy() -> impl Strategy<Value = SpinSystemSpec> {
            (1usize..5, 0usize..4, 0.001f64..0.2).prop_flat_map(|(np, nc, a)| {
                (
                    proptest::collection::vec(-350.0f64..350.0, np),
                    proptest::collection::vec((100.0f64..220.0, 0usize..np), nc),
                    proptest::collection::vec((0usize..np, 0usize..np, -20.0f64..20.0), 0..4),
                    Just(a),
                )
                    .prop_map(move |(shifts, sites, js, a)| {
                        let protons = shifts
                            .iter()
                            .enumerate()
                            .map(|(i, s)| ProtonDef { id: i as u32 + 1, shift_hz: *s, label: format!("H{}", i + 1) })
                            .collect::<Vec<_>>();
                        let mut used = BTreeSet::new();
                        let carbons = sites
                            .iter()
                            .enumerate()
                            .filter(|(_, (_, h))| used.insert(*h))
                            .map(|(i, (j, h))| CarbonSite {
                                id: i as u32 + 1,
                                shift_hz: 0.0,
                                attached: vec![*h as u32 + 1],
                                j1ch_hz: *j,
                            })
                            .collect();
                        let homo_couplings = js
                            .iter()
                            .filter(|(a, b, _)| a != b)
                            .map(|(a, b, j)| HomoCoupling { a: *a as u32 + 1, b: *b as u32 + 1, j_hz: *j })
                            .collect();
                        SpinSystemSpec { protons, carbons, homo_couplings, long_range: vec![], abundance: a }
                    })
            })
        }

        proptest! {
            #[test]
            fn text_round_trip(spec in spec_strategy()) {
                let back = parse_spin_system(&spec.to_text()).unwrap();
                prop_assert_eq!(back, spec);
            }

            #[test]
            fn weight_sum_bound(spec in spec_strategy()) {
                let iso = enumerate_isotopomers(&spec);
                let k = spec.carbons.len() as f64;
                let a = spec.abundance;
                let total: f64 = iso.iter().map(|i| i.weight).sum();
                let expected = (1.0 - a).powf(k) + k * a * (1.0 - a).powf(k - 1.0);
                prop_assert!((total - expected).abs() < 1e-12);
                prop_assert!((1.0 - total).abs() <= 2.0 * k * k * a * a + 1e-15);
                for i in &iso {
                    prop_assert!(i.validate().is_ok());
                }
            }
        }
    }
}
