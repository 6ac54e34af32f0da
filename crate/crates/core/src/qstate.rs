//! Two-qubit states.
//!
//! Basis order is `{|00⟩, |01⟩, |10⟩, |11⟩}` with qubit A as the left tensor
//! factor, so index `i = 2a + b`.

use nalgebra::{DMatrix, Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::domain;
use crate::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
/// Eigenvalues down to this value count as zero.
pub const POSITIVITY_TOL: f64 = 1e-10;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `|φ⁺⟩ = (|00⟩ + |11⟩)/√2`
pub fn phi_plus() -> Vector4<Complex64> {
    Vector4::new(c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2))
}

/// `|ψ⁺⟩ = (|01⟩ + |10⟩)/√2`
pub fn psi_plus() -> Vector4<Complex64> {
    Vector4::new(c(0.0), c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2), c(0.0))
}

pub fn pauli_x() -> Matrix2<Complex64> {
    Matrix2::new(c(0.0), c(1.0), c(1.0), c(0.0))
}

pub fn pauli_y() -> Matrix2<Complex64> {
    let i = Complex64::i();
    Matrix2::new(c(0.0), -i, i, c(0.0))
}

pub fn pauli_z() -> Matrix2<Complex64> {
    Matrix2::new(c(1.0), c(0.0), c(0.0), c(-1.0))
}

/// `a ⊗ b` for single-qubit operators.
pub fn kron(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Matrix4<Complex64> {
    Matrix4::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

/// Validated two-qubit density matrix: Hermitian, unit trace, positive.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitDensityMatrix {
    elements: Matrix4<Complex64>,
}

impl TwoQubitDensityMatrix {
    pub fn new(elements: Matrix4<Complex64>) -> Result<Self> {
        for i in 0..4 {
            for j in i..4 {
                let d = (elements[(i, j)] - elements[(j, i)].conj()).norm();
                if d > HERMITIAN_TOL {
                    return Err(Error::InvalidState(format!(
                        "not Hermitian: |ρ[{i},{j}] - conj(ρ[{j},{i}])| = {d:e}"
                    )));
                }
            }
        }
        let tr = elements.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min = hermitian_eigenvalues(&elements)[0];
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(Self { elements })
    }

    /// Projector onto a normalised pure state.
    pub fn pure(psi: &Vector4<Complex64>) -> Result<Self> {
        Self::new(psi * psi.adjoint())
    }

    pub fn maximally_mixed() -> Self {
        Self {
            elements: Matrix4::identity() * c(0.25),
        }
    }

    pub fn product(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Result<Self> {
        Self::new(kron(a, b))
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.elements
    }

    pub fn element(&self, i: usize, j: usize) -> Complex64 {
        self.elements[(i, j)]
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        hermitian_eigenvalues(&self.elements)
    }

    pub fn reduced_a(&self) -> Matrix2<Complex64> {
        Matrix2::from_fn(|a, ap| self.elements[(2 * a, 2 * ap)] + self.elements[(2 * a + 1, 2 * ap + 1)])
    }

    pub fn reduced_b(&self) -> Matrix2<Complex64> {
        Matrix2::from_fn(|b, bp| self.elements[(b, bp)] + self.elements[(2 + b, 2 + bp)])
    }

    /// `(c1, c2, c3)` with `c_j = Tr[ρ σ_j ⊗ σ_j]`.
    pub fn correlation_vector(&self) -> [f64; 3] {
        [pauli_x(), pauli_y(), pauli_z()].map(|s| (self.elements * kron(&s, &s)).trace().re)
    }

    /// Conjugate by a unitary `u ρ u†`. The result is revalidated.
    pub fn conjugate(&self, u: &Matrix4<Complex64>) -> Result<Self> {
        let m = u * self.elements * u.adjoint();
        // re-hermitise roundoff from the two products
        Self::new((m + m.adjoint()) * c(0.5))
    }

    pub fn entropy(&self) -> Result<f64> {
        entropy_of_spectrum(&self.eigenvalues())
    }

    /// Swap the roles of qubits A and B.
    pub fn swapped(&self) -> Self {
        let swap = [0usize, 2, 1, 3];
        Self {
            elements: Matrix4::from_fn(|i, j| self.elements[(swap[i], swap[j])]),
        }
    }
}

/// `½[(1+x)|φ⁺⟩⟨φ⁺| + (1−x)|ψ⁺⟩⟨ψ⁺|]`, the family every evolved state belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellMixture {
    coeff: f64,
}

impl BellMixture {
    pub fn new(coeff: f64) -> Result<Self> {
        if !(coeff.abs() <= 1.0) {
            return Err(domain("Bell mixture coefficient", coeff, "[-1, 1]"));
        }
        Ok(Self { coeff })
    }

    pub fn coeff(&self) -> f64 {
        self.coeff
    }

    /// Bloch correlation vector `(1, −x, x)`.
    pub fn correlation_vector(&self) -> [f64; 3] {
        [1.0, -self.coeff, self.coeff]
    }

    pub fn to_matrix(&self) -> TwoQubitDensityMatrix {
        bell_mixture_to_matrix(*self)
    }
}

pub fn bell_mixture_to_matrix(state: BellMixture) -> TwoQubitDensityMatrix {
    let p = c(0.25 * (1.0 + state.coeff));
    let q = c(0.25 * (1.0 - state.coeff));
    let mut m = Matrix4::zeros();
    for (i, j) in [(0, 0), (3, 3), (0, 3), (3, 0)] {
        m[(i, j)] = p;
    }
    for (i, j) in [(1, 1), (2, 2), (1, 2), (2, 1)] {
        m[(i, j)] = q;
    }
    TwoQubitDensityMatrix { elements: m }
}

/// Partial transpose of any 4×4 operator on the chosen qubit.
pub fn partial_transpose_matrix(m: &Matrix4<Complex64>, subsystem: Subsystem) -> Matrix4<Complex64> {
    Matrix4::from_fn(|i, j| {
        let (a, b) = (i / 2, i % 2);
        let (ap, bp) = (j / 2, j % 2);
        match subsystem {
            Subsystem::A => m[(2 * ap + b, 2 * a + bp)],
            Subsystem::B => m[(2 * a + bp, 2 * ap + b)],
        }
    })
}

pub fn partial_transpose(rho: &TwoQubitDensityMatrix, subsystem: Subsystem) -> Matrix4<Complex64> {
    partial_transpose_matrix(&rho.elements, subsystem)
}

/// Eigenvalues of a Hermitian 4×4 matrix, ascending.
pub fn hermitian_eigenvalues(m: &Matrix4<Complex64>) -> [f64; 4] {
    let mut ev: [f64; 4] = m.symmetric_eigenvalues().into();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `−Σ λ log₂ λ` with `0 log 0 = 0`; eigenvalues in `[−1e-10, 0)` are clamped.
pub fn entropy_of_spectrum(eigenvalues: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &l in eigenvalues {
        if l < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {l:e}")));
        }
        if l > 0.0 {
            s -= l * l.log2();
        }
    }
    Ok(s.max(0.0))
}

/// Von Neumann entropy in bits of a square density matrix of any dimension.
pub fn von_neumann_entropy(rho: &DMatrix<Complex64>) -> Result<f64> {
    if !rho.is_square() {
        return Err(Error::InvalidState(format!(
            "density matrix is {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let ev = rho.clone().symmetric_eigenvalues();
    entropy_of_spectrum(ev.as_slice())
}

/// Entropy of a single-qubit density matrix.
pub fn qubit_entropy(rho: &Matrix2<Complex64>) -> Result<f64> {
    let ev = rho.symmetric_eigenvalues();
    entropy_of_spectrum(ev.as_slice())
}
