//! Pairs of mutually unbiased bases, stored through their Hadamard
//! transition matrix `H[x][y] = ⟨φ_x|ψ_y⟩`.
//!
//! The first basis is always the standard basis `φ_x = e_x`; the second
//! basis vector `ψ_y` is column `y` of `H`. Everything downstream (observables,
//! the Haagerup matrix) only depends on `H`.

mod io;
pub mod table1;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::finite_group::AbelianGroup;
use crate::numerics::{ComplexMatrix, ComplexVector, Tolerances};
use crate::report::ValidationReport;

pub use io::{hadamard_from_json, hadamard_to_json, load_hadamard, save_hadamard, HadamardFile};
pub use table1::{
    family_f4, table1_entry, table1_matrix, ReferenceCluster, Sign, Table1Entry, Table1Id,
};

#[derive(Debug, Clone, PartialEq)]
pub struct MubPair {
    h: ComplexMatrix,
    label: String,
}

impl MubPair {
    pub fn d(&self) -> usize {
        self.h.nrows()
    }

    pub fn hadamard(&self) -> &ComplexMatrix {
        &self.h
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `φ_x`, the standard basis vector `e_x`.
    pub fn phi(&self, x: usize) -> ComplexVector {
        let mut v = ComplexVector::zeros(self.d());
        v[x] = Complex64::new(1.0, 0.0);
        v
    }

    /// `ψ_y`, column `y` of the Hadamard matrix.
    pub fn psi(&self, y: usize) -> ComplexVector {
        self.h.column(y).into_owned()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Relabels outcomes: `φ'_x = φ_{perm_phi[x]}` and `ψ'_y = ψ_{perm_psi[y]}`.
    pub fn relabeled(&self, perm_phi: &[usize], perm_psi: &[usize]) -> Result<Self> {
        let d = self.d();
        check_permutation(perm_phi, d)?;
        check_permutation(perm_psi, d)?;
        Ok(Self {
            h: DMatrix::from_fn(d, d, |x, y| self.h[(perm_phi[x], perm_psi[y])]),
            label: format!("{}[relabeled]", self.label),
        })
    }

    /// Multiplies each `ψ_y` by `exp(i·phases[y])`.
    pub fn rephased(&self, phases: &[f64]) -> Result<Self> {
        if phases.len() != self.d() {
            return Err(Error::InvalidArgument(format!(
                "expected {} phases, got {}",
                self.d(),
                phases.len()
            )));
        }
        let mut h = self.h.clone();
        for (y, &theta) in phases.iter().enumerate() {
            let z = Complex64::from_polar(1.0, theta);
            h.column_mut(y).iter_mut().for_each(|e| *e *= z);
        }
        Ok(Self {
            h,
            label: format!("{}[rephased]", self.label),
        })
    }

    /// Exchanges the roles of the two bases (`H ↦ H†`).
    pub fn swapped(&self) -> Self {
        Self {
            h: self.h.adjoint(),
            label: format!("{}[swapped]", self.label),
        }
    }
}

fn check_permutation(p: &[usize], d: usize) -> Result<()> {
    let mut seen = vec![false; d];
    if p.len() != d {
        return Err(Error::InvalidArgument(format!(
            "permutation has length {}, expected {d}",
            p.len()
        )));
    }
    for &i in p {
        if i >= d || std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidArgument(format!("{p:?} is not a permutation")));
        }
    }
    Ok(())
}

/// The Fourier-conjugate pair `H[x][y] = ⟨x, y⟩/√d` of a finite abelian group.
pub fn fourier_mub(g: &AbelianGroup) -> MubPair {
    let d = g.order();
    let scale = 1.0 / (d as f64).sqrt();
    let table = g.pairing_table();
    MubPair {
        h: DMatrix::from_fn(d, d, |x, y| table[x][y] * scale),
        label: format!("fourier-{g}"),
    }
}

/// Wraps a Hadamard matrix as a MUB pair after validating it.
pub fn hadamard_to_mub(h: ComplexMatrix, label: impl Into<String>, tol: &Tolerances) -> Result<MubPair> {
    if !h.is_square() || h.nrows() == 0 {
        let mut report = ValidationReport::new();
        report.push_verdict(
            "square",
            false,
            Some(format!("{}x{}", h.nrows(), h.ncols())),
        );
        return Err(Error::InvalidMatrix {
            summary: format!("Hadamard matrix must be square, got {}x{}", h.nrows(), h.ncols()),
            report: Box::new(report),
        });
    }
    let report = validate_hadamard(&h, tol);
    if !report.passed() {
        return Err(Error::InvalidMatrix {
            summary: report
                .failures()
                .map(|c| {
                    format!(
                        "{} deviation {:.3e}{}",
                        c.name,
                        c.max_deviation,
                        c.detail.as_ref().map(|d| format!(" at {d}")).unwrap_or_default()
                    )
                })
                .collect::<Vec<_>>()
                .join("; "),
            report: Box::new(report),
        });
    }
    Ok(MubPair {
        h,
        label: label.into(),
    })
}

/// Reports the largest deviation of `|H[x][y]|` from `1/√d` and of `H†H`
/// from the identity.
pub fn validate_hadamard(h: &ComplexMatrix, tol: &Tolerances) -> ValidationReport {
    let mut report = ValidationReport::new();
    if !h.is_square() {
        report.push_verdict("square", false, Some(format!("{}x{}", h.nrows(), h.ncols())));
        return report;
    }
    let d = h.nrows();
    let target = 1.0 / (d as f64).sqrt();

    let mut worst = (0.0f64, None);
    for x in 0..d {
        for y in 0..d {
            let dev = (h[(x, y)].norm() - target).abs();
            if dev > worst.0 {
                worst = (dev, Some(format!("entry ({x},{y}) has modulus {:.17}", h[(x, y)].norm())));
            }
        }
    }
    report.push("unbiasedness", worst.0, tol.matching, worst.1);

    let gram = h.adjoint() * h;
    let mut worst = (0.0f64, None);
    for i in 0..d {
        for j in 0..d {
            let expected = if i == j { 1.0 } else { 0.0 };
            let dev = (gram[(i, j)] - Complex64::new(expected, 0.0)).norm();
            if dev > worst.0 {
                worst = (dev, Some(format!("(H†H)[{i}][{j}]")));
            }
        }
    }
    report.push("unitarity", worst.0, tol.matching, worst.1);
    report
}

pub fn validate_mub(pair: &MubPair, tol: &Tolerances) -> ValidationReport {
    validate_hadamard(&pair.h, tol)
}
