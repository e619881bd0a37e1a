use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use std::f64::consts::TAU;

use super::basis::{Basis, Operator};
use crate::spinsys::{CouplingKind, Isotopomer};

/// Which couplings enter a Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CouplingTerms {
    pub homonuclear: bool,
    pub heteronuclear: bool,
    /// Full I·I homonuclear coupling instead of the secular I_zI_z form.
    pub isotropic_homonuclear: bool,
}

impl CouplingTerms {
    pub const ALL: CouplingTerms =
        CouplingTerms { homonuclear: true, heteronuclear: true, isotropic_homonuclear: false };
}

#[derive(Debug, Clone)]
enum Form {
    /// Diagonal in the Zeeman product basis.
    Diagonal(Vec<f64>),
    /// Real symmetric matrix stored through its eigen-decomposition.
    Eigen { values: Vec<f64>, vectors: DMatrix<f64> },
}

/// Rotating-frame Hamiltonian in rad/s.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    form: Form,
}

impl Hamiltonian {
    /// Σ 2π·ν_i·I_iz + Σ 2π·J_ij·I_iz·I_jz (plus flip-flop terms when isotropic).
    pub fn build(iso: &Isotopomer, basis: &Basis, terms: CouplingTerms) -> Self {
        let dim = basis.dim();
        let mut diag = vec![0.0; dim];
        for (a, d) in diag.iter_mut().enumerate() {
            for (k, s) in iso.spins.iter().enumerate() {
                *d += TAU * s.shift_hz * basis.m(k, a);
            }
        }
        let mut flip_flop = Vec::new();
        for c in &iso.couplings {
            let keep = match c.kind {
                CouplingKind::Homonuclear => terms.homonuclear,
                CouplingKind::OneBondCH | CouplingKind::LongRangeCH => terms.heteronuclear,
            };
            if !keep || c.j_hz == 0.0 {
                continue;
            }
            for (a, d) in diag.iter_mut().enumerate() {
                *d += TAU * c.j_hz * basis.m(c.spin_a, a) * basis.m(c.spin_b, a);
            }
            if terms.isotropic_homonuclear && c.kind == CouplingKind::Homonuclear {
                flip_flop.push((c.spin_a, c.spin_b, c.j_hz));
            }
        }
        if flip_flop.is_empty() {
            return Hamiltonian { form: Form::Diagonal(diag) };
        }
        let mut h = DMatrix::<f64>::from_diagonal(&nalgebra::DVector::from_vec(diag));
        for (i, j, jhz) in flip_flop {
            let (bi, bj) = (basis.bit(i), basis.bit(j));
            for a in 0..dim {
                // |αβ⟩ ↔ |βα⟩ with matrix element J/2 (I_xI_x + I_yI_y)
                if (a & bi == 0) != (a & bj == 0) {
                    h[(a, a ^ bi ^ bj)] += TAU * jhz * 0.5;
                }
            }
        }
        let eig = SymmetricEigen::new(h);
        Hamiltonian {
            form: Form::Eigen { values: eig.eigenvalues.iter().copied().collect(), vectors: eig.eigenvectors },
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.form, Form::Diagonal(_))
    }

    /// Dense matrix form, mainly for tests.
    pub fn matrix(&self) -> Operator {
        match &self.form {
            Form::Diagonal(d) => {
                Operator::from_fn(
                    d.len(),
                    d.len(),
                    |a, b| {
                        if a == b {
                            C64::new(d[a], 0.0)
                        } else {
                            C64::new(0.0, 0.0)
                        }
                    },
                )
            }
            Form::Eigen { values, vectors } => {
                let n = values.len();
                let d = DMatrix::<f64>::from_diagonal(&nalgebra::DVector::from_vec(values.clone()));
                let h = vectors * d * vectors.transpose();
                Operator::from_fn(n, n, |a, b| C64::new(h[(a, b)], 0.0))
            }
        }
    }

    /// ρ ← exp(−iHt)·ρ·exp(+iHt).
    pub fn evolve(&self, rho: &mut Operator, t: f64) {
        match &self.form {
            Form::Diagonal(e) => apply_phases(rho, e, t),
            Form::Eigen { values, vectors } => {
                let v = to_complex(vectors);
                let mut r = v.adjoint() * &*rho * &v;
                apply_phases(&mut r, values, t);
                *rho = &v * r * v.adjoint();
            }
        }
    }

    /// Eigen-frequencies and the basis change into the eigenbasis (if any).
    pub(crate) fn spectral(&self) -> (&[f64], Option<Operator>) {
        match &self.form {
            Form::Diagonal(e) => (e, None),
            Form::Eigen { values, vectors } => (values, Some(to_complex(vectors))),
        }
    }
}

fn to_complex(m: &DMatrix<f64>) -> Operator {
    m.map(|x| C64::new(x, 0.0))
}

fn apply_phases(rho: &mut Operator, e: &[f64], t: f64) {
    let n = e.len();
    for b in 0..n {
        for a in 0..n {
            let w = (e[a] - e[b]) * t;
            if w != 0.0 {
                rho[(a, b)] *= C64::from_polar(1.0, -w);
            }
        }
    }
}
