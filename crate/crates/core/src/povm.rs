//! Observables (POVMs) built from a MUB pair: the sharp basis observables,
//! their uniformly noisy versions, and explicit joint observables.
//!
//! Noise mixes an observable with the uniform one,
//! `X_ν(x) = ν X(x) + (1 − ν) I/d`, for `ν ∈ [1/(1−d), 1]`.
//!
//! Three families of joint observables are constructed:
//!
//! * Lüders joint observables for points of the elliptical arc (`d ≥ 3`),
//!   built from the smearing coefficients `u_ν`, `v_ν`;
//! * the vertex joint observable for `λ = μ = 1/(1−d)`;
//! * the qubit joint observable `¼(I + xλ a·σ + yμ b·σ)`.
//!
//! Every Lüders and vertex effect has the form
//! `a A(x) + b B(y) + c (A(x)B(y) + B(y)A(x)) + e I`; those four coefficients
//! determine the matrix `K` that expresses the effects in terms of the
//! Jordan products `E(z,t) = ½(A(z)B(t) + B(t)A(z))`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mub_catalog::MubPair;
use crate::numerics::{
    eig_sym, eigvals_hermitian, hermiticity_defect, numerical_rank, ComplexMatrix,
    RealSymmetricMatrix, Tolerances,
};
use crate::report::ValidationReport;

/// Radicands this far below zero are treated as zero.
const RADICAND_SLACK: f64 = 1e-14;

/// Threshold below which a noise parameter or a `K` eigenvalue counts as zero.
pub const ZERO_THRESHOLD: f64 = 1e-12;

fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Outcome-indexed family of effects.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    d: usize,
    effects: Vec<ComplexMatrix>,
}

impl Observable {
    /// Wraps effects after checking their shapes. Positivity and
    /// normalization are reported by [`Observable::validate`].
    pub fn from_effects(effects: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = effects.first() else {
            return Err(Error::InvalidArgument("observable needs at least one effect".into()));
        };
        let d = first.nrows();
        if let Some(i) = effects.iter().position(|e| e.shape() != (d, d)) {
            return Err(Error::InvalidArgument(format!(
                "effect {i} has shape {:?}, expected ({d}, {d})",
                effects[i].shape()
            )));
        }
        Ok(Self { d, effects })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn effect(&self, x: usize) -> &ComplexMatrix {
        &self.effects[x]
    }

    /// Hermiticity, positivity and normalization checks.
    pub fn validate(&self, tol: &Tolerances) -> Result<ValidationReport> {
        validate_effects(&self.effects, self.d, tol)
    }

    /// Largest entrywise difference to another observable with the same
    /// outcome count.
    pub fn max_deviation(&self, other: &Observable) -> f64 {
        if self.outcomes() != other.outcomes() || self.d != other.d {
            return f64::INFINITY;
        }
        self.effects
            .iter()
            .zip(&other.effects)
            .map(|(a, b)| crate::numerics::max_abs_diff(a, b))
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "d": self.d,
            "outcomes": self.outcomes(),
            "effects": self.effects.iter().map(matrix_to_json).collect::<Vec<_>>(),
        })
    }
}

fn validate_effects(effects: &[ComplexMatrix], d: usize, tol: &Tolerances) -> Result<ValidationReport> {
    let mut report = ValidationReport::new();
    let mut herm = (0.0f64, None);
    let mut neg = (0.0f64, None);
    let mut sum = ComplexMatrix::zeros(d, d);
    for (i, e) in effects.iter().enumerate() {
        let h = hermiticity_defect(e);
        if h > herm.0 {
            herm = (h, Some(format!("effect {i}")));
        }
        // Non-Hermitian effects are reported above; positivity is judged on
        // the Hermitian part.
        let part = (e + e.adjoint()) * real(0.5);
        let min = eigvals_hermitian(&part, tol)?[0];
        if -min > neg.0 {
            neg = (-min, Some(format!("effect {i} has eigenvalue {min:.3e}")));
        }
        sum += e;
    }
    let norm = crate::numerics::max_abs_diff(&sum, &identity(d));
    report.push("hermiticity", herm.0, tol.matching, herm.1);
    report.push("positivity", neg.0, tol.psd, neg.1);
    report.push("normalization", norm, tol.matching, None);
    Ok(report)
}

/// Which formula produced a joint observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum JointKind {
    /// Lüders form parametrized by `λ`, margins `(A_λ, B_{γ_λ})`.
    LudersA,
    /// Lüders form parametrized by `μ`, margins `(A_{γ_μ}, B_μ)`.
    LudersB,
    Vertex,
    Qubit,
    Custom,
}

/// Branch of the elliptical arc: `A` is `ν ↦ (ν, γ_ν)`, `B` is `ν ↦ (γ_ν, ν)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    A,
    B,
}

impl std::str::FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Branch::A),
            "B" | "b" => Ok(Branch::B),
            _ => Err(Error::InvalidArgument(format!("branch must be A or B, got {s:?}"))),
        }
    }
}

/// Coefficients of `C(x,y) = a A(x) + b B(y) + c (A(x)B(y) + B(y)A(x)) + e I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub e: f64,
}

/// Effects indexed by `(x, y)`, stored at `x·m₂ + y`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointObservable {
    d: usize,
    outcomes: (usize, usize),
    effects: Vec<ComplexMatrix>,
    kind: JointKind,
    coefficients: Option<KCoefficients>,
}

impl JointObservable {
    pub fn from_effects(
        outcomes: (usize, usize),
        effects: Vec<ComplexMatrix>,
        kind: JointKind,
    ) -> Result<Self> {
        if effects.len() != outcomes.0 * outcomes.1 {
            return Err(Error::InvalidArgument(format!(
                "expected {} effects, got {}",
                outcomes.0 * outcomes.1,
                effects.len()
            )));
        }
        let d = Observable::from_effects(effects.clone())?.d();
        Ok(Self {
            d,
            outcomes,
            effects,
            kind,
            coefficients: None,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn outcomes(&self) -> (usize, usize) {
        self.outcomes
    }

    pub fn kind(&self) -> JointKind {
        self.kind
    }

    /// The `a, b, c, e` coefficients for Lüders and vertex observables.
    pub fn coefficients(&self) -> Option<KCoefficients> {
        self.coefficients
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn effect(&self, x: usize, y: usize) -> &ComplexMatrix {
        &self.effects[x * self.outcomes.1 + y]
    }

    /// `(Σ_y C(x,y), Σ_x C(x,y))`.
    pub fn margins(&self) -> (Observable, Observable) {
        let (m1, m2) = self.outcomes;
        let first = (0..m1)
            .map(|x| (0..m2).fold(ComplexMatrix::zeros(self.d, self.d), |acc, y| acc + self.effect(x, y)))
            .collect();
        let second = (0..m2)
            .map(|y| (0..m1).fold(ComplexMatrix::zeros(self.d, self.d), |acc, x| acc + self.effect(x, y)))
            .collect();
        (
            Observable { d: self.d, effects: first },
            Observable { d: self.d, effects: second },
        )
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<ValidationReport> {
        validate_effects(&self.effects, self.d, tol)
    }

    /// Rank of every effect, counting eigenvalues above `tol.rank` times the
    /// largest eigenvalue of that effect.
    pub fn effect_ranks(&self, tol: &Tolerances) -> Result<Vec<usize>> {
        self.effects
            .iter()
            .map(|e| Ok(numerical_rank(&eigvals_hermitian(e, tol)?, tol)))
            .collect()
    }

    pub fn max_effect_rank(&self, tol: &Tolerances) -> Result<usize> {
        Ok(self.effect_ranks(tol)?.into_iter().max().unwrap_or(0))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (m1, m2) = self.outcomes;
        let effects: Vec<_> = (0..m1)
            .map(|x| (0..m2).map(|y| matrix_to_json(self.effect(x, y))).collect::<Vec<_>>())
            .collect();
        serde_json::json!({
            "d": self.d,
            "kind": self.kind,
            "outcomes": [m1, m2],
            "coefficients": self.coefficients,
            "effects": effects,
        })
    }
}

/// Nested `[re, im]` arrays, row by row.
pub fn matrix_to_json(m: &ComplexMatrix) -> serde_json::Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    serde_json::json!(rows)
}

/// A noise pair `(λ, μ)` in dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseParams {
    pub lambda: f64,
    pub mu: f64,
    pub d: usize,
}

impl NoiseParams {
    pub fn new(d: usize, lambda: f64, mu: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::Unsupported(format!("dimension {d} < 2")));
        }
        check_noise("lambda", lambda, d)?;
        check_noise("mu", mu, d)?;
        Ok(Self { lambda, mu, d })
    }

    /// True when either parameter is negative. Such pairs are still uniformly
    /// noisy in the formal sense but mix in more than the full uniform part.
    pub fn has_negative(&self) -> bool {
        self.lambda < 0.0 || self.mu < 0.0
    }
}

/// Lower end `1/(1−d)` of the noise interval.
pub fn noise_lower_bound(d: usize) -> f64 {
    1.0 / (1.0 - d as f64)
}

fn check_noise(name: &'static str, nu: f64, d: usize) -> Result<()> {
    let lo = noise_lower_bound(d);
    let radicand = 1.0 + (d as f64 - 1.0) * nu;
    if !nu.is_finite() || radicand < -RADICAND_SLACK || nu > 1.0 + RADICAND_SLACK {
        return Err(Error::OutOfRange {
            name,
            value: nu,
            lo,
            hi: 1.0,
        });
    }
    Ok(())
}

/// `u_ν`, `v_ν` and `γ_ν = 1 − u_ν²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmearingCoefficients {
    pub u: f64,
    pub v: f64,
    pub gamma: f64,
}

pub fn smearing(nu: f64, d: usize) -> Result<SmearingCoefficients> {
    if d < 3 {
        return Err(Error::Unsupported(format!(
            "smearing coefficients need d >= 3, got {d}"
        )));
    }
    check_noise("nu", nu, d)?;
    let df = d as f64;
    let p = (1.0 + (df - 1.0) * nu).max(0.0).sqrt();
    let q = (1.0 - nu).max(0.0).sqrt();
    Ok(SmearingCoefficients {
        u: (p - q) / df.sqrt(),
        v: q,
        gamma: ((df - 2.0) * (1.0 - nu) + 2.0 * q * p) / df,
    })
}

/// `γ_ν` alone.
pub fn gamma(nu: f64, d: usize) -> Result<f64> {
    Ok(smearing(nu, d)?.gamma)
}

/// `A(x) = |φ_x⟩⟨φ_x|` and `B(y) = |ψ_y⟩⟨ψ_y|`.
pub fn sharp_observables(pair: &MubPair) -> (Observable, Observable) {
    let d = pair.d();
    let a = (0..d)
        .map(|x| {
            let mut m = ComplexMatrix::zeros(d, d);
            m[(x, x)] = real(1.0);
            m
        })
        .collect();
    let b = (0..d)
        .map(|y| {
            let psi = pair.psi(y);
            &psi * psi.adjoint()
        })
        .collect();
    (Observable { d, effects: a }, Observable { d, effects: b })
}

/// `m` effects all equal to `I/m`.
pub fn uniform_observable(d: usize, m: usize) -> Result<Observable> {
    if d == 0 || m == 0 {
        return Err(Error::InvalidArgument(format!(
            "dimension and outcome count must be positive, got d={d}, m={m}"
        )));
    }
    Ok(Observable {
        d,
        effects: vec![identity(d) * real(1.0 / m as f64); m],
    })
}

/// `ν X + (1 − ν) U`, with `ν ∈ [1/(1−d), 1]`.
pub fn noisy(x: &Observable, nu: f64) -> Result<Observable> {
    if x.d >= 2 {
        check_noise("nu", nu, x.d)?;
    }
    let u = identity(x.d) * real((1.0 - nu) / x.outcomes() as f64);
    Ok(Observable {
        d: x.d,
        effects: x.effects.iter().map(|e| e * real(nu) + &u).collect(),
    })
}

/// `(A_λ, B_μ)` for a MUB pair.
pub fn noisy_pair(pair: &MubPair, p: &NoiseParams) -> Result<(Observable, Observable)> {
    let (a, b) = sharp_observables(pair);
    Ok((noisy(&a, p.lambda)?, noisy(&b, p.mu)?))
}

fn assemble(
    pair: &MubPair,
    k: KCoefficients,
    kind: JointKind,
) -> JointObservable {
    let d = pair.d();
    let (a, b) = sharp_observables(pair);
    let mut effects = Vec::with_capacity(d * d);
    for x in 0..d {
        for y in 0..d {
            let ax = a.effect(x);
            let by = b.effect(y);
            let jordan = ax * by + by * ax;
            let mut c = ax * real(k.a) + by * real(k.b) + jordan * real(k.c);
            if k.e != 0.0 {
                c += identity(d) * real(k.e);
            }
            effects.push(c);
        }
    }
    JointObservable {
        d,
        outcomes: (d, d),
        effects,
        kind,
        coefficients: Some(k),
    }
}

/// Coefficients of the Lüders joint observable on the given branch, with `ν`
/// the parameter of that branch (`λ` for `A`, `μ` for `B`).
pub fn luders_coefficients(nu: f64, d: usize, branch: Branch) -> Result<KCoefficients> {
    let s = smearing(nu, d)?;
    let df = d as f64;
    let (wa, wb) = match branch {
        Branch::A => (s.u * s.u, s.v * s.v),
        Branch::B => (s.v * s.v, s.u * s.u),
    };
    Ok(KCoefficients {
        a: wa / df,
        b: wb / df,
        c: s.u * s.v / df.sqrt(),
        e: 0.0,
    })
}

/// Lüders joint observable on an explicit branch, parametrized by `nu`.
/// Branch `A` has margins `(A_ν, B_{γ_ν})`, branch `B` has `(A_{γ_ν}, B_ν)`.
pub fn luders_joint_branch(pair: &MubPair, nu: f64, branch: Branch) -> Result<JointObservable> {
    let d = pair.d();
    if d < 3 {
        return Err(Error::Unsupported(
            "Lüders joint observables on the arc need d >= 3; use qubit_joint for d = 2".into(),
        ));
    }
    let k = luders_coefficients(nu, d, branch)?;
    let kind = match branch {
        Branch::A => JointKind::LudersA,
        Branch::B => JointKind::LudersB,
    };
    Ok(assemble(pair, k, kind))
}

/// Lüders joint observable of `(A_λ, B_μ)` for a point of the elliptical arc.
///
/// Uses branch `A` when `μ ≥ 0` and branch `B` otherwise. In debug builds the
/// two branches are compared where both apply.
pub fn luders_joint(pair: &MubPair, p: &NoiseParams) -> Result<JointObservable> {
    let d = pair.d();
    if d < 3 {
        return Err(Error::Unsupported(
            "Lüders joint observables on the arc need d >= 3; use qubit_joint for d = 2".into(),
        ));
    }
    if p.d != d {
        return Err(Error::InvalidArgument(format!(
            "noise parameters are for d = {}, pair has d = {d}",
            p.d
        )));
    }
    if p.lambda < 0.0 && p.mu < 0.0 {
        return Err(Error::Unsupported(format!(
            "no arc point has both parameters negative: ({}, {})",
            p.lambda, p.mu
        )));
    }
    crate::extremality::require_on_gamma(d, p.lambda, p.mu)?;
    let joint = if p.mu >= 0.0 {
        luders_joint_branch(pair, p.lambda, Branch::A)?
    } else {
        luders_joint_branch(pair, p.mu, Branch::B)?
    };
    #[cfg(debug_assertions)]
    if p.lambda >= 0.0 && p.mu >= 0.0 {
        let other = luders_joint_branch(pair, p.mu, Branch::B)?;
        let dev = joint
            .effects
            .iter()
            .zip(&other.effects)
            .map(|(a, b)| crate::numerics::max_abs_diff(a, b))
            .fold(0.0, f64::max);
        debug_assert!(dev < 1e-8, "Lüders branches disagree by {dev:e}");
    }
    Ok(joint)
}

/// Coefficients of the vertex joint observable.
pub fn vertex_coefficients(d: usize) -> KCoefficients {
    let df = d as f64;
    let c = 1.0 / ((df - 2.0) * (df - 1.0));
    KCoefficients {
        a: -c,
        b: -c,
        c,
        e: 1.0 / (df * (df - 2.0)),
    }
}

/// Joint observable of `A_{1/(1−d)}` and `B_{1/(1−d)}`:
/// `C(x,y) = (I − Π(x,y)) / (d(d−2))`.
pub fn vertex_joint(pair: &MubPair) -> Result<JointObservable> {
    let d = pair.d();
    if d < 3 {
        return Err(Error::Unsupported(format!(
            "the vertex joint observable needs d >= 3, got {d}"
        )));
    }
    Ok(assemble(pair, vertex_coefficients(d), JointKind::Vertex))
}

/// Orthogonal projection onto `span{φ_x, ψ_y}`:
/// `Π(x,y) = d/(d−1) · [A(x) + B(y) − A(x)B(y) − B(y)A(x)]`.
pub fn span_projection(pair: &MubPair, x: usize, y: usize) -> ComplexMatrix {
    let d = pair.d();
    let phi = pair.phi(x);
    let psi = pair.psi(y);
    let a = &phi * phi.adjoint();
    let b = &psi * psi.adjoint();
    let s = d as f64 / (d as f64 - 1.0);
    (&a + &b - &a * &b - &b * &a) * real(s)
}

pub const PAULI_X: [[Complex64; 2]; 2] = [
    [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
];

pub const PAULI_Y: [[Complex64; 2]; 2] = [
    [Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0)],
    [Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)],
];

pub const PAULI_Z: [[Complex64; 2]; 2] = [
    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
    [Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0)],
];

/// Bloch vectors matching the standard basis (`+z`) and the Fourier basis of
/// `Z_2` (`+x`). Outcome index 0 corresponds to the `+` eigenvector.
pub const DEFAULT_QUBIT_AXES: ([f64; 3], [f64; 3]) = ([0.0, 0.0, 1.0], [1.0, 0.0, 0.0]);

/// `r·σ`.
pub fn sigma_dot(r: [f64; 3]) -> ComplexMatrix {
    DMatrix::from_fn(2, 2, |i, j| {
        PAULI_X[i][j] * r[0] + PAULI_Y[i][j] * r[1] + PAULI_Z[i][j] * r[2]
    })
}

/// Two-outcome qubit observable `½(I ± r·σ)`, outcome 0 being `+`.
pub fn bloch_observable(r: [f64; 3]) -> Observable {
    let s = sigma_dot(r);
    let i = identity(2);
    Observable {
        d: 2,
        effects: vec![(&i + &s) * real(0.5), (&i - &s) * real(0.5)],
    }
}

pub fn norm3(r: [f64; 3]) -> f64 {
    (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt()
}

pub fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn check_qubit_axes(a: [f64; 3], b: [f64; 3], tol: &Tolerances) -> Result<()> {
    for (name, v) in [("a", a), ("b", b)] {
        if (norm3(v) - 1.0).abs() > tol.matching {
            return Err(Error::InvalidArgument(format!(
                "Bloch vector {name} = {v:?} is not a unit vector"
            )));
        }
    }
    let ab = dot3(a, b);
    if ab.abs() > tol.matching {
        return Err(Error::InvalidArgument(format!(
            "Bloch vectors must be orthogonal, a·b = {ab:e}"
        )));
    }
    Ok(())
}

/// `C(x,y) = ¼(I + xλ a·σ + yμ b·σ)` for `x, y ∈ {+1, −1}`.
pub fn qubit_joint(a: [f64; 3], b: [f64; 3], p: &NoiseParams, tol: &Tolerances) -> Result<JointObservable> {
    if p.d != 2 {
        return Err(Error::InvalidArgument(format!(
            "qubit joint observable needs d = 2, got {}",
            p.d
        )));
    }
    check_qubit_axes(a, b, tol)?;
    let r2 = p.lambda * p.lambda + p.mu * p.mu;
    if r2 > 1.0 + tol.psd {
        return Err(Error::Incompatible(format!(
            "λ² + μ² = {r2} > 1: a qubit pair is compatible only inside the unit disk"
        )));
    }
    let sa = sigma_dot(a);
    let sb = sigma_dot(b);
    let i = identity(2);
    let mut effects = Vec::with_capacity(4);
    for x in [1.0, -1.0] {
        for y in [1.0, -1.0] {
            effects.push((&i + &sa * real(x * p.lambda) + &sb * real(y * p.mu)) * real(0.25));
        }
    }
    Ok(JointObservable {
        d: 2,
        outcomes: (2, 2),
        effects,
        kind: JointKind::Qubit,
        coefficients: None,
    })
}

/// `E(z,t) = ½(A(z)B(t) + B(t)A(z))`, stored at `z·d + t`.
pub fn e_operators(pair: &MubPair) -> Vec<ComplexMatrix> {
    let d = pair.d();
    let (a, b) = sharp_observables(pair);
    let mut out = Vec::with_capacity(d * d);
    for z in 0..d {
        for t in 0..d {
            let (az, bt) = (a.effect(z), b.effect(t));
            out.push((az * bt + bt * az) * real(0.5));
        }
    }
    out
}

/// One of the four eigenvalues of `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KSpectralValue {
    pub expr: &'static str,
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMatrix {
    pub matrix: RealSymmetricMatrix,
    pub spectral: [KSpectralValue; 4],
    /// All four spectral values exceed [`ZERO_THRESHOLD`] in modulus.
    pub invertible: bool,
}

/// `K_{(x,y),(z,t)} = a δ_{xz} + b δ_{yt} + 2c δ_{xz} δ_{yt} + e` with its
/// closed-form spectrum.
pub fn k_matrix(k: KCoefficients, d: usize) -> Result<KMatrix> {
    if d < 2 {
        return Err(Error::Unsupported(format!("dimension {d} < 2")));
    }
    let df = d as f64;
    let matrix = RealSymmetricMatrix::from_upper_fn(d * d, |i, j| {
        let (x, y, z, t) = (i / d, i % d, j / d, j % d);
        let dx = if x == z { 1.0 } else { 0.0 };
        let dy = if y == t { 1.0 } else { 0.0 };
        k.a * dx + k.b * dy + 2.0 * k.c * dx * dy + k.e
    });
    let spectral = [
        KSpectralValue {
            expr: "2c",
            value: 2.0 * k.c,
            multiplicity: (d - 1) * (d - 1),
        },
        KSpectralValue {
            expr: "da+2c",
            value: df * k.a + 2.0 * k.c,
            multiplicity: d - 1,
        },
        KSpectralValue {
            expr: "db+2c",
            value: df * k.b + 2.0 * k.c,
            multiplicity: d - 1,
        },
        KSpectralValue {
            expr: "da+db+2c+d²e",
            value: df * k.a + df * k.b + 2.0 * k.c + df * df * k.e,
            multiplicity: 1,
        },
    ];
    let invertible = spectral.iter().all(|s| s.value.abs() > ZERO_THRESHOLD);
    Ok(KMatrix {
        matrix,
        spectral,
        invertible,
    })
}

impl KMatrix {
    /// Largest difference between the numeric spectrum of `K` and the
    /// closed-form values repeated with their multiplicities.
    pub fn spectral_deviation(&self, tol: &Tolerances) -> Result<f64> {
        let numeric = eig_sym(&self.matrix, false, tol)?.values;
        let mut expected: Vec<f64> = self
            .spectral
            .iter()
            .flat_map(|s| std::iter::repeat_n(s.value, s.multiplicity))
            .collect();
        expected.sort_by(f64::total_cmp);
        Ok(numeric
            .iter()
            .zip(&expected)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_group::make_group;
    use crate::mub_catalog::{fourier_mub, hadamard_to_mub, table1_matrix};
    use crate::numerics::{max_abs_diff, min_eig_hermitian};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn fourier(n: i64) -> MubPair {
        fourier_mub(&make_group(&[n]).unwrap())
    }

    #[test]
    fn sharp_observables_of_z2() {
        let (a, b) = sharp_observables(&fourier(2));
        assert_eq!(a.effect(0)[(0, 0)], real(1.0));
        assert_eq!(a.effect(0)[(1, 1)], real(0.0));
        assert!(b.validate(&tol()).unwrap().passed());
    }

    #[test]
    fn sharp_overlaps_are_one_over_d() {
        let pair = hadamard_to_mub(table1_matrix("d6-m3", &[]).unwrap(), "m3", &tol()).unwrap();
        let (a, b) = sharp_observables(&pair);
        for x in 0..6 {
            for y in 0..6 {
                let tr = (a.effect(x) * b.effect(y)).trace();
                assert!((tr - real(1.0 / 6.0)).norm() < 1e-13);
                let aba = a.effect(x) * b.effect(y) * a.effect(x);
                assert!(max_abs_diff(&aba, &(a.effect(x) * real(1.0 / 6.0))) < 1e-12);
            }
        }
    }

    #[test]
    fn uniform_and_noisy() {
        let u = uniform_observable(3, 3).unwrap();
        assert!(max_abs_diff(u.effect(1), &(identity(3) * real(1.0 / 3.0))) < 1e-15);
        let (a, _) = sharp_observables(&fourier(3));
        assert!(noisy(&a, 1.0).unwrap().max_deviation(&a) < 1e-15);
        assert!(noisy(&a, 0.0).unwrap().max_deviation(&u) < 1e-15);
        let low = noisy(&a, -0.5).unwrap();
        let eig = eigvals_hermitian(low.effect(0), &tol()).unwrap();
        assert!((eig[0] - 0.0).abs() < 1e-15 && (eig[2] - 0.5).abs() < 1e-15);
        assert!(matches!(noisy(&a, -0.6), Err(Error::OutOfRange { .. })));
        assert!(matches!(noisy(&a, 1.1), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn smearing_endpoints() {
        let s = smearing(1.0, 5).unwrap();
        assert_eq!((s.u, s.v, s.gamma), (1.0, 0.0, 0.0));
        let s = smearing(0.0, 5).unwrap();
        assert_eq!((s.u, s.v, s.gamma), (0.0, 1.0, 1.0));
        for d in 3..10 {
            let s = smearing(noise_lower_bound(d), d).unwrap();
            let df = d as f64;
            assert!((s.gamma - (df - 2.0) / (df - 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn smearing_identities() {
        for d in [3usize, 4, 7] {
            let lo = noise_lower_bound(d);
            for k in 0..=40 {
                let nu = lo + (1.0 - lo) * k as f64 / 40.0;
                let s = smearing(nu, d).unwrap();
                let sd = (d as f64).sqrt();
                assert!((s.u * s.u + s.v * s.v + 2.0 * s.u * s.v / sd - 1.0).abs() < 1e-12);
                assert!((s.gamma - (1.0 - s.u * s.u)).abs() < 1e-12);
                assert!(s.v >= 0.0);
                assert_eq!(s.u >= 0.0, nu >= 0.0, "nu = {nu}");
            }
        }
    }

    #[test]
    fn luders_at_lambda_one() {
        let pair = fourier(3);
        let p = NoiseParams::new(3, 1.0, 0.0).unwrap();
        let c = luders_joint(&pair, &p).unwrap();
        let (a, _) = sharp_observables(&pair);
        for x in 0..3 {
            for y in 0..3 {
                assert!(max_abs_diff(c.effect(x, y), &(a.effect(x) * real(1.0 / 3.0))) < 1e-15);
            }
        }
        let (m1, m2) = c.margins();
        assert!(m1.max_deviation(&a) < 1e-14);
        assert!(m2.max_deviation(&uniform_observable(3, 3).unwrap()) < 1e-14);
    }

    #[test]
    fn luders_at_symmetric_point() {
        let pair = fourier(5);
        let l = (3.0 + 5f64.sqrt()) / 8.0;
        let p = NoiseParams::new(5, l, l).unwrap();
        let c = luders_joint(&pair, &p).unwrap();
        let (na, nb) = noisy_pair(&pair, &p).unwrap();
        let (m1, m2) = c.margins();
        assert!(m1.max_deviation(&na) < 1e-12);
        assert!(m2.max_deviation(&nb) < 1e-12);
        assert!(c.effect_ranks(&tol()).unwrap().iter().all(|&r| r == 1));
    }

    #[test]
    fn luders_rejects_qubits_and_off_arc_points() {
        let p = NoiseParams::new(2, 0.6, 0.8).unwrap();
        assert!(matches!(luders_joint(&fourier(2), &p), Err(Error::Unsupported(_))));
        let p = NoiseParams::new(5, 0.5, 0.5).unwrap();
        assert!(matches!(luders_joint(&fourier(5), &p), Err(Error::OffCurve { .. })));
        let p = NoiseParams::new(5, -0.1, -0.1).unwrap();
        assert!(matches!(luders_joint(&fourier(5), &p), Err(Error::Unsupported(_))));
    }

    #[test]
    fn vertex_joint_basics() {
        for d in [3i64, 4, 6] {
            let pair = fourier(d);
            let c = vertex_joint(&pair).unwrap();
            let du = d as usize;
            for e in c.effects() {
                assert!((e.trace() - real(1.0 / d as f64)).norm() < 1e-12);
            }
            let ranks = c.effect_ranks(&tol()).unwrap();
            assert!(ranks.iter().all(|&r| r == du - 2), "{ranks:?}");
            let nu = noise_lower_bound(du);
            let p = NoiseParams::new(du, nu, nu).unwrap();
            let (na, nb) = noisy_pair(&pair, &p).unwrap();
            let (m1, m2) = c.margins();
            assert!(m1.max_deviation(&na) < 1e-12);
            assert!(m2.max_deviation(&nb) < 1e-12);
            assert!(c.validate(&tol()).unwrap().passed());
        }
        assert!(vertex_joint(&fourier(2)).is_err());
    }

    #[test]
    fn span_projection_is_a_projection() {
        let pair = fourier(5);
        let (a, b) = sharp_observables(&pair);
        for (x, y) in [(0, 0), (1, 3), (4, 2)] {
            let p = span_projection(&pair, x, y);
            assert!(max_abs_diff(&(&p * &p), &p) < 1e-11);
            assert!(max_abs_diff(&(&p * a.effect(x)), &(a.effect(x) * &p)) < 1e-11);
            assert!(max_abs_diff(&(&p * b.effect(y)), &(b.effect(y) * &p)) < 1e-11);
            assert!((p.trace() - real(2.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn qubit_joint_examples() {
        let (a, b) = DEFAULT_QUBIT_AXES;
        let p = NoiseParams::new(2, 1.0, 0.0).unwrap();
        let c = qubit_joint(a, b, &p, &tol()).unwrap();
        let (m1, m2) = c.margins();
        assert!(m1.max_deviation(&bloch_observable(a)) < 1e-15);
        assert!(m2.max_deviation(&uniform_observable(2, 2).unwrap()) < 1e-15);

        let s = 0.5f64.sqrt();
        let p = NoiseParams::new(2, s, s).unwrap();
        let c = qubit_joint(a, b, &p, &tol()).unwrap();
        let eig = eigvals_hermitian(c.effect(0, 0), &tol()).unwrap();
        assert!(eig[0].abs() < 1e-15 && (eig[1] - 0.5).abs() < 1e-15);

        let p = NoiseParams::new(2, 0.9, 0.9).unwrap();
        assert!(matches!(qubit_joint(a, b, &p, &tol()), Err(Error::Incompatible(_))));
        assert!(matches!(
            qubit_joint(a, [0.0, 0.6, 0.8], &NoiseParams::new(2, 0.5, 0.5).unwrap(), &tol()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn default_axes_match_fourier_z2() {
        let (a, b) = sharp_observables(&fourier(2));
        let (za, xb) = DEFAULT_QUBIT_AXES;
        assert!(a.max_deviation(&bloch_observable(za)) < 1e-15);
        assert!(b.max_deviation(&bloch_observable(xb)) < 1e-15);
    }

    #[test]
    fn e_operator_gram_identity() {
        let pair = fourier(3);
        let e = e_operators(&pair);
        let l = crate::haagerup::haagerup_matrix(&pair);
        let d = 3.0;
        for i in 0..9 {
            for j in 0..9 {
                let g = crate::numerics::hs_inner(&e[j], &e[i]);
                let delta = if i == j { 1.0 } else { 0.0 };
                assert!((g - real((delta + l.get(i, j)) / (2.0 * d))).norm() < 1e-11);
            }
        }
        assert_eq!(crate::numerics::gram_rank(&e, &tol()).unwrap(), 9);
    }

    #[test]
    fn k_matrix_examples() {
        let id = k_matrix(KCoefficients { a: 0.0, b: 0.0, c: 0.5, e: 0.0 }, 3).unwrap();
        assert!(id.invertible);
        for i in 0..9 {
            for j in 0..9 {
                assert_eq!(id.matrix.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
        for d in [3usize, 5, 7] {
            let nu = 0.3;
            let s = smearing(nu, d).unwrap();
            let k = k_matrix(luders_coefficients(nu, d, Branch::A).unwrap(), d).unwrap();
            let values: Vec<f64> = k.spectral.iter().map(|v| v.value).collect();
            let expected = [2.0 * s.u * s.v / (d as f64).sqrt(), 1.0 - s.v * s.v, 1.0 - s.u * s.u, 1.0];
            for (v, e) in values.iter().zip(expected) {
                assert!((v - e).abs() < 1e-12);
            }
            assert!(k.spectral_deviation(&tol()).unwrap() < 1e-10);
            let kv = k_matrix(vertex_coefficients(d), d).unwrap();
            assert!(kv.invertible);
            assert!(kv.spectral_deviation(&tol()).unwrap() < 1e-10);
        }
        let kv3 = k_matrix(vertex_coefficients(3), 3).unwrap();
        assert!((kv3.spectral[0].value - 1.0).abs() < 1e-15);
        assert!((kv3.spectral[1].value + 0.5).abs() < 1e-15);
    }

    #[test]
    fn vertex_effects_expand_through_k() {
        let pair = fourier(4);
        let c = vertex_joint(&pair).unwrap();
        let e = e_operators(&pair);
        let k = k_matrix(c.coefficients().unwrap(), 4).unwrap();
        for i in 0..16 {
            let mut sum = ComplexMatrix::zeros(4, 4);
            for j in 0..16 {
                sum += &e[j] * real(k.matrix.get(i, j));
            }
            assert!(max_abs_diff(&sum, &c.effects()[i]) < 1e-13);
        }
        assert!(min_eig_hermitian(&c.effects()[5], &tol()).unwrap() > -1e-12);
    }
}
