use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::spinsys::{Channel, Isotopomer};

/// Dense complex operator on the 2^n Zeeman product space.
pub type Operator = DMatrix<C64>;

/// Cartesian spin-1/2 component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn letter(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }

    /// Matrix element ⟨s|I_axis|t⟩ with s, t ∈ {0 = α, 1 = β}.
    #[inline]
    fn element(self, s: usize, t: usize) -> C64 {
        match (self, s, t) {
            (Axis::X, 0, 1) | (Axis::X, 1, 0) => C64::new(0.5, 0.0),
            (Axis::Y, 0, 1) => C64::new(0.0, -0.5),
            (Axis::Y, 1, 0) => C64::new(0.0, 0.5),
            (Axis::Z, 0, 0) => C64::new(0.5, 0.0),
            (Axis::Z, 1, 1) => C64::new(-0.5, 0.0),
            _ => C64::new(0.0, 0.0),
        }
    }
}

/// A normalized Cartesian product operator 2^(m-1)·Π I_kα over m distinct spins.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductOp {
    factors: Vec<(usize, Axis)>,
}

impl ProductOp {
    pub fn new(mut factors: Vec<(usize, Axis)>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::ZeroNorm);
        }
        factors.sort();
        if factors.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::validation("product operator repeats a spin"));
        }
        Ok(ProductOp { factors })
    }

    pub fn single(spin: usize, axis: Axis) -> Self {
        ProductOp { factors: vec![(spin, axis)] }
    }

    pub fn pair(a: (usize, Axis), b: (usize, Axis)) -> Self {
        ProductOp::new(vec![a, b]).expect("distinct spins")
    }

    pub fn factors(&self) -> &[(usize, Axis)] {
        &self.factors
    }

    pub fn scale(&self) -> f64 {
        (1u64 << (self.factors.len() - 1)) as f64
    }

    /// Human-readable label such as `2*H1z*H2y`, using the basis spin labels.
    pub fn label(&self, basis: &Basis) -> String {
        let body: Vec<String> =
            self.factors.iter().map(|(k, a)| format!("{}{}", basis.labels[*k], a.letter())).collect();
        if self.factors.len() == 1 {
            body[0].clone()
        } else {
            format!("{}*{}", self.scale() as u64, body.join("*"))
        }
    }
}

/// Spin labels, channels and the index arithmetic of the product space.
///
/// Spin 0 is the most significant bit of a basis index; bit value 0 is α
/// (m = +1/2).
#[derive(Debug, Clone)]
pub struct Basis {
    channels: Vec<Channel>,
    labels: Vec<String>,
    dim: usize,
    /// Σ_k γ_k m_k per basis state, in units of γ_H.
    zeeman: Vec<f64>,
}

impl Basis {
    pub fn new(channels: Vec<Channel>, labels: Vec<String>) -> Self {
        assert_eq!(channels.len(), labels.len());
        assert!(channels.len() <= 12, "Hilbert space too large");
        let n = channels.len();
        let dim = 1usize << n;
        let mut b = Basis { channels, labels, dim, zeeman: Vec::new() };
        b.zeeman = (0..dim).map(|a| (0..n).map(|k| b.channels[k].gamma_rel() * b.m(k, a)).sum()).collect();
        b
    }

    pub fn for_isotopomer(iso: &Isotopomer) -> Self {
        Basis::new(iso.spins.iter().map(|s| s.channel).collect(), iso.spins.iter().map(|s| s.label.clone()).collect())
    }

    pub fn n_spins(&self) -> usize {
        self.channels.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn channel(&self, k: usize) -> Channel {
        self.channels[k]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn spins_on(&self, channel: Channel) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_spins()).filter(move |&k| self.channels[k] == channel)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    #[inline]
    pub(crate) fn bit(&self, k: usize) -> usize {
        1 << (self.n_spins() - 1 - k)
    }

    /// Magnetic quantum number of spin `k` in basis state `a`.
    #[inline]
    pub fn m(&self, k: usize, a: usize) -> f64 {
        if a & self.bit(k) == 0 {
            0.5
        } else {
            -0.5
        }
    }

    #[inline]
    pub(crate) fn zeeman(&self, a: usize) -> f64 {
        self.zeeman[a]
    }

    /// Dense single-spin operator, Kronecker-embedded.
    pub fn op(&self, k: usize, axis: Axis) -> Operator {
        self.product(&ProductOp::single(k, axis)) * C64::new(1.0, 0.0)
    }

    /// Raising operator I_k+ = |α⟩⟨β| on spin `k`.
    pub fn raising(&self, k: usize) -> Operator {
        let bit = self.bit(k);
        let mut m = Operator::zeros(self.dim, self.dim);
        for b in 0..self.dim {
            if b & bit != 0 {
                m[(b & !bit, b)] = C64::new(1.0, 0.0);
            }
        }
        m
    }

    pub fn lowering(&self, k: usize) -> Operator {
        self.raising(k).adjoint()
    }

    pub fn identity(&self) -> Operator {
        Operator::identity(self.dim, self.dim)
    }

    /// For basis row `a`, the unique column where `op` is nonzero and its value.
    #[inline]
    fn row_entry(&self, op: &ProductOp, a: usize) -> (usize, C64) {
        let mut b = a;
        for &(k, axis) in &op.factors {
            if axis != Axis::Z {
                b ^= self.bit(k);
            }
        }
        let mut v = C64::new(op.scale(), 0.0);
        for &(k, axis) in &op.factors {
            let bit = self.bit(k);
            let s = usize::from(a & bit != 0);
            let t = usize::from(b & bit != 0);
            v *= axis.element(s, t);
        }
        (b, v)
    }

    pub fn product(&self, op: &ProductOp) -> Operator {
        let mut m = Operator::zeros(self.dim, self.dim);
        for a in 0..self.dim {
            let (b, v) = self.row_entry(op, a);
            m[(a, b)] = v;
        }
        m
    }

    /// Normalized coefficient Tr(ρ·O†)/Tr(O·O†) of `op` in `rho`, real part.
    pub fn project(&self, rho: &Operator, op: &ProductOp) -> f64 {
        self.project_complex(rho, op).re
    }

    pub fn project_complex(&self, rho: &Operator, op: &ProductOp) -> C64 {
        // Tr(ρ O†) = Σ_a,b ρ_ab conj(O_ab); every product operator has one entry per row.
        let mut acc = C64::new(0.0, 0.0);
        let mut norm = 0.0;
        for a in 0..self.dim {
            let (b, v) = self.row_entry(op, a);
            acc += rho[(a, b)] * v.conj();
            norm += v.norm_sqr();
        }
        acc / norm
    }

    /// Parses `H1x`, `2*H1z*H2y` or `4*H1x*H2z*C1z` against this basis.
    pub fn parse_op(&self, text: &str) -> Result<ProductOp> {
        let mut parts: Vec<&str> = text.split('*').map(str::trim).collect();
        let mut declared = None;
        if parts.first().is_some_and(|p| p.parse::<f64>().is_ok()) {
            declared = Some(parts.remove(0).parse::<f64>().unwrap());
        }
        let mut factors = Vec::new();
        for p in parts {
            let (label, axis) = p.split_at(p.len().saturating_sub(1));
            let axis = match axis {
                "x" => Axis::X,
                "y" => Axis::Y,
                "z" => Axis::Z,
                _ => return Err(Error::validation(format!("bad operator factor `{p}`"))),
            };
            let k =
                self.index_of(label).ok_or_else(|| Error::validation(format!("unknown spin `{label}` in `{text}`")))?;
            factors.push((k, axis));
        }
        let op = ProductOp::new(factors)?;
        if let Some(d) = declared {
            if d != op.scale() {
                return Err(Error::validation(format!("`{text}`: prefactor must be {}", op.scale())));
            }
        }
        Ok(op)
    }

    /// Every Cartesian product operator on this basis (identity excluded).
    pub fn all_product_ops(&self) -> Vec<ProductOp> {
        let n = self.n_spins();
        let mut out = Vec::new();
        for code in 1..4usize.pow(n as u32) {
            let mut c = code;
            let mut factors = Vec::new();
            for k in 0..n {
                match c % 4 {
                    1 => factors.push((k, Axis::X)),
                    2 => factors.push((k, Axis::Y)),
                    3 => factors.push((k, Axis::Z)),
                    _ => {}
                }
                c /= 4;
            }
            out.push(ProductOp { factors });
        }
        out.sort_by(|a, b| a.factors.len().cmp(&b.factors.len()).then(a.cmp(b)));
        out
    }

    /// Expansion of `rho` in the product-operator basis, dropping terms below `tol`.
    pub fn expand(&self, rho: &Operator, tol: f64) -> Vec<(ProductOp, f64)> {
        self.all_product_ops()
            .into_iter()
            .map(|op| {
                let c = self.project(rho, &op);
                (op, c)
            })
            .filter(|(_, c)| c.abs() > tol)
            .collect()
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.labels.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three() -> Basis {
        Basis::new(vec![Channel::H1, Channel::H1, Channel::C13], vec!["H1".into(), "H2".into(), "C1".into()])
    }

    fn commutator(a: &Operator, b: &Operator) -> Operator {
        a * b - b * a
    }

    #[test]
    fn spin_algebra() {
        let b = three();
        let i = C64::new(0.0, 1.0);
        for k in 0..3 {
            let (x, y, z) = (b.op(k, Axis::X), b.op(k, Axis::Y), b.op(k, Axis::Z));
            assert!((commutator(&x, &y) - &z * i).norm() < 1e-14);
            assert!((commutator(&y, &z) - &x * i).norm() < 1e-14);
            assert!((commutator(&z, &x) - &y * i).norm() < 1e-14);
            for op in [&x, &y, &z] {
                assert!(op.trace().norm() < 1e-15);
            }
            let plus = b.raising(k);
            assert!((&plus - (&x + &y * i)).norm() < 1e-14);
            assert!((b.lowering(k) - (&x - &y * i)).norm() < 1e-14);
        }
    }

    #[test]
    fn randomized_cross_spin_commutation() {
        // deterministic pseudo-random spot check over spin/axis pairs
        let b = Basis::new(vec![Channel::H1; 4], (1..=4).map(|i| format!("H{i}")).collect());
        let axes = [Axis::X, Axis::Y, Axis::Z];
        let mut s = 12345u64;
        for _ in 0..50 {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let (i, j) = ((s >> 33) as usize % 4, (s >> 40) as usize % 4);
            let (ai, aj) = (axes[(s >> 20) as usize % 3], axes[(s >> 50) as usize % 3]);
            let c = commutator(&b.op(i, ai), &b.op(j, aj));
            if i != j {
                assert!(c.norm() < 1e-15);
            }
        }
    }

    #[test]
    fn projection_normalization() {
        let b = three();
        let x = b.op(0, Axis::X);
        assert!((b.project(&x, &ProductOp::single(0, Axis::X)) - 1.0).abs() < 1e-15);
        assert!(b.project(&x, &ProductOp::single(0, Axis::Y)).abs() < 1e-15);
        let op = ProductOp::pair((0, Axis::Z), (1, Axis::Y));
        let m = b.product(&op);
        let expected = b.op(0, Axis::Z) * b.op(1, Axis::Y) * C64::new(2.0, 0.0);
        assert!((&m - &expected).norm() < 1e-15);
        assert!((b.project(&(m * C64::new(0.3, 0.0)), &op) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn parse_and_label() {
        let b = three();
        let op = b.parse_op("2*H1z*H2y").unwrap();
        assert_eq!(op.label(&b), "2*H1z*H2y");
        assert_eq!(b.parse_op("H2y*H1z").unwrap(), op);
        assert!(b.parse_op("3*H1z*H2y").is_err());
        assert!(b.parse_op("H9x").is_err());
        assert_eq!(b.all_product_ops().len(), 63);
    }

    #[test]
    fn expansion_reconstructs() {
        let b = three();
        let rho = b.op(0, Axis::X) * C64::new(0.7, 0.0)
            + b.product(&ProductOp::pair((0, Axis::Y), (2, Axis::Z))) * C64::new(-0.2, 0.0);
        let terms = b.expand(&rho, 1e-12);
        assert_eq!(terms.len(), 2);
        let mut back = Operator::zeros(8, 8);
        for (op, c) in terms {
            back += b.product(&op) * C64::new(c, 0.0);
        }
        assert!((back - rho).norm() < 1e-14);
    }
}
