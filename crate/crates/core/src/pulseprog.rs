//! A small line-oriented pulse-program language.
//!
//! ```text
//! # declarations
//! define tau = 0.0015625
//! phase ph1 = 0 2
//! phase ph5 = 0 states H        # States increments this table on H only
//! phase ph6 = 0 states H 3      # ... by three quadrants (−90°) instead of one
//! gradient G9 = 15 alternate    # sign flips for the antiecho component
//! echo G4 G5                    # declared refocusing pair, areas must match
//!
//! # events
//! purge
//! pulse H 90 ph1
//! delay tau
//! pulse H,C 180 ph0
//! grad G3
//! t1half
//! mark o
//! acquire decouple C phr
//! ```
//!
//! Every statement fits on one line and is decided by its first word, so the
//! grammar is LL(1) and parsing is a single pass over the lines.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::spinsys::Channel;

#[derive(Debug, Clone, PartialEq)]
pub enum DelayExpr {
    Seconds(f64),
    /// `factor`·symbol, resolved at run time so that `tau` can be overridden.
    Symbol {
        name: String,
        factor: f64,
    },
}

impl fmt::Display for DelayExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DelayExpr::Seconds(s) => write!(f, "{s}"),
            DelayExpr::Symbol { name, factor } if *factor == 1.0 => write!(f, "{name}"),
            DelayExpr::Symbol { name, factor } => write!(f, "{factor}*{name}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    /// Reset to proton-only equilibrium (models the initial crusher gradients).
    Purge,
    Pulse {
        channels: Vec<Channel>,
        angle_deg: f64,
        phase: String,
    },
    Delay(DelayExpr),
    Gradient(String),
    /// Half of the incremented t₁ period.
    T1Half,
    Acquire {
        decouple: Option<Channel>,
        phase: String,
    },
    Mark(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTable {
    pub name: String,
    pub entries: Vec<u8>,
    /// Increment applied to this table's pulses for the second States component.
    pub states: Option<StatesStep>,
}

/// Pulses on `channel` advance by `quadrants`·90° in the second States component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StatesStep {
    pub channel: Channel,
    pub quadrants: u8,
}

impl StatesStep {
    pub fn plus90(channel: Channel) -> Self {
        StatesStep { channel, quadrants: 1 }
    }

    pub fn minus90(channel: Channel) -> Self {
        StatesStep { channel, quadrants: 3 }
    }
}

impl PhaseTable {
    /// Quadrant used on scan `scan` (tables cycle).
    pub fn at(&self, scan: usize) -> u8 {
        self.entries[scan % self.entries.len()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientDef {
    pub name: String,
    pub area: f64,
    /// Negated for the antiecho component.
    pub alternate: bool,
}

/// A parsed, name-resolved pulse program.
#[derive(Debug, Clone, Default)]
pub struct EventList {
    pub symbols: Vec<(String, f64)>,
    pub phase_tables: Vec<PhaseTable>,
    pub gradients: Vec<GradientDef>,
    pub echo_pairs: Vec<(String, String)>,
    pub events: Vec<Event>,
    /// Source line of each declaration/event, keyed by kind and index.
    lines: BTreeMap<(u8, usize), usize>,
}

// Source positions are bookkeeping only and do not take part in equality.
impl PartialEq for EventList {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols
            && self.phase_tables == other.phase_tables
            && self.gradients == other.gradients
            && self.echo_pairs == other.echo_pairs
            && self.events == other.events
    }
}

const L_SYMBOL: u8 = 0;
const L_PHASE: u8 = 1;
const L_GRAD: u8 = 2;
const L_ECHO: u8 = 3;
const L_EVENT: u8 = 4;

impl EventList {
    pub fn symbol(&self, name: &str) -> Option<f64> {
        self.symbols.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn set_symbol(&mut self, name: &str, value: f64) {
        match self.symbols.iter_mut().find(|(n, _)| n == name) {
            Some(entry) => entry.1 = value,
            None => self.symbols.push((name.to_string(), value)),
        }
    }

    pub fn phase_table(&self, name: &str) -> Option<&PhaseTable> {
        self.phase_tables.iter().find(|t| t.name == name)
    }

    pub fn phase_table_mut(&mut self, name: &str) -> Option<&mut PhaseTable> {
        self.phase_tables.iter_mut().find(|t| t.name == name)
    }

    pub fn gradient(&self, name: &str) -> Option<&GradientDef> {
        self.gradients.iter().find(|g| g.name == name)
    }

    /// Quadrant of table `name` on scan `scan`.
    pub fn phase(&self, name: &str, scan: usize) -> Result<u8> {
        self.phase_table(name)
            .map(|t| t.at(scan))
            .ok_or_else(|| Error::validation(format!("undefined phase table `{name}`")))
    }

    /// Seconds for a delay expression.
    pub fn delay_seconds(&self, d: &DelayExpr) -> Result<f64> {
        match d {
            DelayExpr::Seconds(s) => Ok(*s),
            DelayExpr::Symbol { name, factor } => self
                .symbol(name)
                .map(|v| v * factor)
                .ok_or_else(|| Error::validation(format!("undefined symbol `{name}`"))),
        }
    }

    pub fn marks(&self) -> impl Iterator<Item = &str> {
        self.events.iter().filter_map(|e| match e {
            Event::Mark(m) => Some(m.as_str()),
            _ => None,
        })
    }

    /// Gradient areas in order of first use.
    pub fn gradient_ratio(&self) -> Vec<f64> {
        self.gradients.iter().map(|g| g.area).collect()
    }

    /// Number of cycle steps needed to run every phase table through once.
    pub fn full_cycle(&self) -> usize {
        self.phase_tables.iter().map(|t| t.entries.len()).fold(1, lcm)
    }

    fn line_of(&self, kind: u8, idx: usize) -> usize {
        self.lines.get(&(kind, idx)).copied().unwrap_or(0)
    }

    /// Checks that every reference resolves and that `acquire` is last.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for t in &self.phase_tables {
            if !seen.insert(t.name.as_str()) {
                return Err(Error::validation(format!("duplicate phase table `{}`", t.name)));
            }
            if t.entries.is_empty() {
                return Err(Error::validation(format!("phase table `{}` is empty", t.name)));
            }
            if t.entries.iter().any(|&q| q > 3) {
                return Err(Error::validation(format!("phase table `{}` has a quadrant outside 0..3", t.name)));
            }
        }
        let mut seen = BTreeSet::new();
        for g in &self.gradients {
            if !seen.insert(g.name.as_str()) {
                return Err(Error::validation(format!("duplicate gradient `{}`", g.name)));
            }
        }
        let mut seen = BTreeSet::new();
        for (n, _) in &self.symbols {
            if !seen.insert(n.as_str()) {
                return Err(Error::validation(format!("duplicate symbol `{n}`")));
            }
        }
        for (a, b) in &self.echo_pairs {
            for g in [a, b] {
                if self.gradient(g).is_none() {
                    return Err(Error::validation(format!("undefined gradient `{g}`")));
                }
            }
        }
        let n_acq = self.events.iter().filter(|e| matches!(e, Event::Acquire { .. })).count();
        if n_acq == 0 {
            return Err(Error::validation("missing acquire"));
        }
        if n_acq > 1 || !matches!(self.events.last(), Some(Event::Acquire { .. })) {
            return Err(Error::validation("acquire must appear exactly once, as the last event"));
        }
        for e in &self.events {
            match e {
                Event::Pulse { phase, .. } | Event::Acquire { phase, .. } => {
                    if self.phase_table(phase).is_none() {
                        return Err(Error::validation(format!("undefined phase table `{phase}`")));
                    }
                }
                Event::Gradient(g) if self.gradient(g).is_none() => {
                    return Err(Error::validation(format!("undefined gradient `{g}`")));
                }
                Event::Delay(d) => {
                    self.delay_seconds(d)?;
                }
                _ => {}
            }
        }
        Ok(())
    }
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

struct Tokens<'a> {
    line: usize,
    items: Vec<(usize, &'a str)>,
    pos: usize,
    end_col: usize,
}

impl<'a> Tokens<'a> {
    fn new(line: usize, text: &'a str) -> Self {
        let mut items = Vec::new();
        // (byte offset, 1-based char column) of the token being read
        let mut start = None;
        let mut col = 0;
        for (i, ch) in text.char_indices() {
            col += 1;
            let sep = ch.is_whitespace() || ch == '=';
            match (sep, start) {
                (true, Some((s, c))) => {
                    items.push((c, &text[s..i]));
                    start = None;
                }
                (false, None) => start = Some((i, col)),
                _ => {}
            }
            if ch == '=' {
                items.push((col, "="));
            }
        }
        if let Some((s, c)) = start {
            items.push((c, &text[s..]));
        }
        Tokens { line, items, pos: 0, end_col: col + 1 }
    }

    fn err(&self, col: usize, msg: impl Into<String>) -> Error {
        Error::syntax(self.line, col, msg)
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let t = self.items.get(self.pos).copied().ok_or_else(|| self.err(self.end_col, format!("expected {what}")))?;
        self.pos += 1;
        Ok(t)
    }

    fn peek(&self) -> Option<&'a str> {
        self.items.get(self.pos).map(|t| t.1)
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        let (col, t) = self.next(what)?;
        let mut chars = t.chars();
        let ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '/');
        if !ok {
            return Err(self.err(col, format!("expected {what}, found `{t}`")));
        }
        Ok(t.to_string())
    }

    fn number(&mut self, what: &str) -> Result<f64> {
        let (col, t) = self.next(what)?;
        match t.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.err(col, format!("expected {what}, found `{t}`"))),
        }
    }

    fn expect(&mut self, word: &str) -> Result<()> {
        let (col, t) = self.next(&format!("`{word}`"))?;
        if t != word {
            return Err(self.err(col, format!("expected `{word}`, found `{t}`")));
        }
        Ok(())
    }

    fn channel(&mut self) -> Result<Channel> {
        let (col, t) = self.next("a channel")?;
        Channel::from_symbol(t).map_err(|_| self.err(col, format!("unknown channel `{t}`")))
    }

    fn done(&self) -> Result<()> {
        match self.items.get(self.pos) {
            None => Ok(()),
            Some((col, t)) => Err(self.err(*col, format!("unexpected `{t}`"))),
        }
    }
}

fn parse_delay(toks: &mut Tokens<'_>) -> Result<DelayExpr> {
    let (col, t) = toks.next("a delay expression")?;
    if let Ok(v) = t.parse::<f64>() {
        if !v.is_finite() || v < 0.0 {
            return Err(toks.err(col, "delay must be a finite non-negative number"));
        }
        return Ok(DelayExpr::Seconds(v));
    }
    let (factor, name) = match t.split_once('*') {
        Some((f, n)) => {
            let f: f64 = f.parse().map_err(|_| toks.err(col, format!("bad factor in `{t}`")))?;
            if !f.is_finite() || f < 0.0 {
                return Err(toks.err(col, "delay factor must be finite and non-negative"));
            }
            (f, n)
        }
        None => (1.0, t),
    };
    let ok = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if !ok {
        return Err(toks.err(col, format!("bad delay expression `{t}`")));
    }
    Ok(DelayExpr::Symbol { name: name.to_string(), factor })
}

/// Parses program text into a validated [`EventList`].
pub fn parse(text: &str) -> Result<EventList> {
    let mut list = EventList::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("");
        let mut toks = Tokens::new(line, body);
        let Some(head) = toks.peek() else { continue };
        let head_col = toks.items[0].0;
        toks.pos = 1;
        match head {
            "define" => {
                let name = toks.ident("a symbol name")?;
                toks.expect("=")?;
                let v = toks.number("a number")?;
                list.lines.insert((L_SYMBOL, list.symbols.len()), line);
                list.symbols.push((name, v));
            }
            "phase" => {
                let name = toks.ident("a phase table name")?;
                toks.expect("=")?;
                let mut entries = Vec::new();
                let mut states = None;
                while let Some(t) = toks.peek() {
                    if t == "states" {
                        toks.pos += 1;
                        let channel = toks.channel()?;
                        let mut quadrants = 1;
                        if toks.peek().is_some() {
                            let (col, t) = toks.next("a quadrant step")?;
                            quadrants = match t {
                                "1" => 1,
                                "3" => 3,
                                _ => return Err(toks.err(col, format!("States step must be 1 or 3, found `{t}`"))),
                            };
                        }
                        states = Some(StatesStep { channel, quadrants });
                        break;
                    }
                    let (col, t) = toks.next("a quadrant")?;
                    // accept both `0 2 2 0` and compact `0220`
                    for ch in t.chars() {
                        match ch.to_digit(10) {
                            Some(q @ 0..=3) => entries.push(q as u8),
                            _ => return Err(toks.err(col, format!("phase quadrant must be 0..3, found `{t}`"))),
                        }
                    }
                }
                if entries.is_empty() {
                    return Err(toks.err(head_col, format!("phase table `{name}` is empty")));
                }
                list.lines.insert((L_PHASE, list.phase_tables.len()), line);
                list.phase_tables.push(PhaseTable { name, entries, states });
            }
            "gradient" => {
                let name = toks.ident("a gradient name")?;
                toks.expect("=")?;
                let area = toks.number("a relative area")?;
                let alternate = if toks.peek() == Some("alternate") {
                    toks.pos += 1;
                    true
                } else {
                    false
                };
                list.lines.insert((L_GRAD, list.gradients.len()), line);
                list.gradients.push(GradientDef { name, area, alternate });
            }
            "echo" => {
                let a = toks.ident("a gradient name")?;
                let b = toks.ident("a gradient name")?;
                list.lines.insert((L_ECHO, list.echo_pairs.len()), line);
                list.echo_pairs.push((a, b));
            }
            _ => {
                let event = match head {
                    "purge" => Event::Purge,
                    "pulse" => {
                        let (col, chans) = toks.next("a channel list")?;
                        let channels = chans
                            .split(',')
                            .map(Channel::from_symbol)
                            .collect::<Result<Vec<_>>>()
                            .map_err(|_| toks.err(col, format!("unknown channel list `{chans}`")))?;
                        let mut uniq = channels.clone();
                        uniq.sort();
                        uniq.dedup();
                        if uniq.len() != channels.len() {
                            return Err(toks.err(col, "channel repeated in pulse"));
                        }
                        let angle_deg = toks.number("a flip angle")?;
                        let phase = toks.ident("a phase table name")?;
                        Event::Pulse { channels, angle_deg, phase }
                    }
                    "delay" => Event::Delay(parse_delay(&mut toks)?),
                    "grad" => Event::Gradient(toks.ident("a gradient name")?),
                    "t1half" => Event::T1Half,
                    "mark" => Event::Mark(toks.ident("a checkpoint label")?),
                    "acquire" => {
                        let decouple = if toks.peek() == Some("decouple") {
                            toks.pos += 1;
                            Some(toks.channel()?)
                        } else {
                            None
                        };
                        let phase = toks.ident("a receiver phase table name")?;
                        Event::Acquire { decouple, phase }
                    }
                    other => return Err(toks.err(head_col, format!("unknown statement `{other}`"))),
                };
                list.lines.insert((L_EVENT, list.events.len()), line);
                list.events.push(event);
            }
        }
        toks.done()?;
    }
    list.validate()?;
    Ok(list)
}

/// Canonical text form; `parse(&serialize(x)) == x`.
pub fn serialize(list: &EventList) -> String {
    let mut out = String::new();
    for (n, v) in &list.symbols {
        let _ = writeln!(out, "define {n} = {v}");
    }
    for t in &list.phase_tables {
        let entries: Vec<String> = t.entries.iter().map(|q| q.to_string()).collect();
        let _ = write!(out, "phase {} = {}", t.name, entries.join(" "));
        if let Some(st) = t.states {
            let _ = write!(out, " states {}", st.channel.symbol());
            if st.quadrants != 1 {
                let _ = write!(out, " {}", st.quadrants);
            }
        }
        out.push('\n');
    }
    for g in &list.gradients {
        let _ = writeln!(out, "gradient {} = {}{}", g.name, g.area, if g.alternate { " alternate" } else { "" });
    }
    for (a, b) in &list.echo_pairs {
        let _ = writeln!(out, "echo {a} {b}");
    }
    out.push('\n');
    for e in &list.events {
        match e {
            Event::Purge => out.push_str("purge"),
            Event::Pulse { channels, angle_deg, phase } => {
                let ch: Vec<&str> = channels.iter().map(|c| c.symbol()).collect();
                let _ = write!(out, "pulse {} {} {}", ch.join(","), angle_deg, phase);
            }
            Event::Delay(d) => {
                let _ = write!(out, "delay {d}");
            }
            Event::Gradient(g) => {
                let _ = write!(out, "grad {g}");
            }
            Event::T1Half => out.push_str("t1half"),
            Event::Mark(m) => {
                let _ = write!(out, "mark {m}");
            }
            Event::Acquire { decouple, phase } => {
                out.push_str("acquire ");
                if let Some(c) = decouple {
                    let _ = write!(out, "decouple {} ", c.symbol());
                }
                out.push_str(phase);
            }
        }
        out.push('\n');
    }
    out
}

/// Context the linter needs beyond the program itself.
#[derive(Debug, Clone, Default)]
pub struct LintContext {
    /// One-bond couplings of the target spin system.
    pub j1ch_hz: Vec<f64>,
    pub scans: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub code: &'static str,
    pub message: String,
}

impl Diagnostic {
    /// `file:line:col: code message`
    pub fn render(&self, file: &str) -> String {
        format!("{file}:{}:{}: {} {}", self.line, self.col, self.code, self.message)
    }
}

/// Relative tolerance on the 2τ = 1/(2·¹J_CH) tuning rule.
pub const TUNING_TOLERANCE: f64 = 0.05;

/// Static checks; returns warnings sorted by line, then code.
pub fn lint(list: &EventList, ctx: &LintContext) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if let Some(idx) = list.symbols.iter().position(|(n, _)| n == "tau") {
        let two_tau = 2.0 * list.symbols[idx].1;
        for &j in &ctx.j1ch_hz {
            let target = 1.0 / (2.0 * j);
            if ((two_tau - target) / target).abs() > TUNING_TOLERANCE {
                out.push(Diagnostic {
                    line: list.line_of(L_SYMBOL, idx),
                    col: 1,
                    code: "W001",
                    message: format!(
                        "2*tau = {:.4} ms but 1/(2*J) = {:.4} ms for J = {j} Hz; inphase magnetization will leak",
                        two_tau * 1e3,
                        target * 1e3
                    ),
                });
            }
        }
    }
    for (i, (a, b)) in list.echo_pairs.iter().enumerate() {
        if let (Some(ga), Some(gb)) = (list.gradient(a), list.gradient(b)) {
            if (ga.area - gb.area).abs() > 1e-12 * ga.area.abs().max(gb.area.abs()) {
                out.push(Diagnostic {
                    line: list.line_of(L_ECHO, i),
                    col: 1,
                    code: "W002",
                    message: format!("echo pair {a}/{b} has unbalanced areas {} and {}", ga.area, gb.area),
                });
            }
        }
    }
    if let Some(scans) = ctx.scans {
        for (i, t) in list.phase_tables.iter().enumerate() {
            if scans % t.entries.len() != 0 {
                out.push(Diagnostic {
                    line: list.line_of(L_PHASE, i),
                    col: 1,
                    code: "W003",
                    message: format!(
                        "phase table {} has {} entries, which does not divide {scans} scans",
                        t.name,
                        t.entries.len()
                    ),
                });
            }
        }
    }
    for (i, e) in list.events.iter().enumerate() {
        if let Event::Pulse { angle_deg, .. } = e {
            if !(0.0..=360.0).contains(angle_deg) {
                out.push(Diagnostic {
                    line: list.line_of(L_EVENT, i),
                    col: 1,
                    code: "W004",
                    message: format!("unusual flip angle {angle_deg}"),
                });
            }
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "\
define tau = 0.0015625
phase ph0 = 0
phase ph7 = 0 0 2 2
phase phr = 0 2
gradient G4 = 51
gradient G5 = 51
echo G4 G5

purge
pulse H 90 ph0
delay tau
pulse H,C 180 ph0
delay 2*tau
grad G4
pulse C 180 ph7
grad G5
mark o
acquire decouple C phr
";

    #[test]
    fn parses_small_program() {
        let list = parse(SMALL).unwrap();
        assert_eq!(list.events.len(), 10);
        assert_eq!(list.symbol("tau"), Some(0.0015625));
        assert_eq!(list.phase("ph7", 5).unwrap(), 0);
        assert_eq!(list.phase("ph7", 2).unwrap(), 2);
        assert_eq!(list.delay_seconds(&DelayExpr::Symbol { name: "tau".into(), factor: 2.0 }).unwrap(), 0.003125);
        assert_eq!(list.marks().collect::<Vec<_>>(), vec!["o"]);
        assert_eq!(list.full_cycle(), 4);
    }

    #[test]
    fn missing_acquire() {
        let err = parse("phase ph1 = 0\npulse H 90 ph1\n").unwrap_err();
        assert!(err.to_string().contains("missing acquire"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse("phase ph1 = 0\npulse X 90 ph1\n") {
            Err(Error::Syntax { line: 2, col: 7, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse("phase ph1 = 0 5\n") {
            Err(Error::Syntax { line: 1, col: 15, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse("  frobnicate\n") {
            Err(Error::Syntax { line: 1, col: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("pulse H 90\n"), Err(Error::Syntax { line: 1, .. })));
        assert!(matches!(parse("phase ph1 =\n"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn unresolved_names() {
        let err = parse("pulse H 90 ph1\nphase phr = 0\nacquire phr\n").unwrap_err();
        assert!(err.to_string().contains("undefined phase table"));
        let err = parse("grad G1\nphase phr = 0\nacquire phr\n").unwrap_err();
        assert!(err.to_string().contains("undefined gradient"));
        let err = parse("delay foo\nphase phr = 0\nacquire phr\n").unwrap_err();
        assert!(err.to_string().contains("undefined symbol"));
        let err = parse("phase phr = 0\nacquire phr\nmark x\n").unwrap_err();
        assert!(err.to_string().contains("last"));
    }

    #[test]
    fn round_trip_and_idempotence() {
        let list = parse(SMALL).unwrap();
        let text = serialize(&list);
        assert_eq!(parse(&text).unwrap(), list);
        assert_eq!(serialize(&parse(&text).unwrap()), text);
    }

    #[test]
    fn lint_checks() {
        let list = parse(SMALL).unwrap();
        let ok = lint(&list, &LintContext { j1ch_hz: vec![160.0], scans: Some(4) });
        assert!(ok.is_empty(), "{ok:?}");
        let d = lint(&list, &LintContext { j1ch_hz: vec![145.0], scans: None });
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, "W001");
        assert_eq!(d[0].line, 1);

        let unbalanced = SMALL.replace("gradient G5 = 51", "gradient G5 = 50");
        let d = lint(&parse(&unbalanced).unwrap(), &LintContext::default());
        assert_eq!(d.iter().map(|d| d.code).collect::<Vec<_>>(), vec!["W002"]);

        let eight = "phase ph1 = 1 1 1 1 3 3 3 3\nacquire ph1\n";
        let d = lint(&parse(eight).unwrap(), &LintContext { j1ch_hz: vec![], scans: Some(2) });
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, "W003");
        assert_eq!(d[0].render("x.pp"), format!("x.pp:1:1: W003 {}", d[0].message));
    }

    #[test]
    fn diagnostics_are_sorted() {
        let text = "define tau = 0.002\nphase ph1 = 0 0 0\ngradient A = 1\ngradient B = 2\necho A B\nacquire ph1\n";
        let d = lint(&parse(text).unwrap(), &LintContext { j1ch_hz: vec![160.0], scans: Some(2) });
        let keys: Vec<(usize, &str)> = d.iter().map(|d| (d.line, d.code)).collect();
        assert_eq!(keys, vec![(1, "W001"), (2, "W003"), (5, "W002")]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn event() -> impl Strategy<Value = Event> {
            prop_oneof![
                Just(Event::Purge),
                (0usize..3, 0.0f64..360.0).prop_map(|(c, a)| Event::Pulse {
                    channels: [vec![Channel::H1], vec![Channel::C13], vec![Channel::H1, Channel::C13]][c].clone(),
                    angle_deg: a,
                    phase: "ph1".into(),
                }),
                (0.0f64..1.0).prop_map(|s| Event::Delay(DelayExpr::Seconds(s))),
                (0.0f64..4.0).prop_map(|f| Event::Delay(DelayExpr::Symbol { name: "tau".into(), factor: f })),
                Just(Event::Gradient("G1".into())),
                Just(Event::T1Half),
                "[a-z][a-z0-9]{0,3}".prop_map(Event::Mark),
            ]
        }

        fn program() -> impl Strategy<Value = EventList> {
            (
                proptest::collection::vec(0u8..4, 1..9),
                -100.0f64..100.0,
                any::<bool>(),
                proptest::collection::vec(event(), 0..20),
                proptest::option::of(prop_oneof![Just(Channel::H1), Just(Channel::C13)]),
                any::<bool>(),
            )
                .prop_map(|(entries, area, alt, mut events, dec, minus)| {
                    events.push(Event::Acquire { decouple: dec, phase: "ph1".into() });
                    EventList {
                        symbols: vec![("tau".into(), 0.0015625)],
                        phase_tables: vec![PhaseTable {
                            name: "ph1".into(),
                            entries,
                            states: dec.map(|c| if minus { StatesStep::minus90(c) } else { StatesStep::plus90(c) }),
                        }],
                        gradients: vec![GradientDef { name: "G1".into(), area, alternate: alt }],
                        echo_pairs: vec![("G1".into(), "G1".into())],
                        events,
                        lines: BTreeMap::new(),
                    }
                })
        }

        proptest! {
            #[test]
            fn serialize_parse_identity(list in program()) {
                let text = serialize(&list);
                let back = parse(&text).unwrap();
                prop_assert_eq!(&back, &list);
                prop_assert_eq!(serialize(&back), text);
            }

            #[test]
            fn parser_never_panics(text in "\\PC{0,400}") {
                let _ = parse(&text);
            }
        }
    }
}
