//! Geometry of the compatibility region and extremality certificates.
//!
//! For `d ≥ 3` the noisy pair `(A_λ, B_μ)` is compatible iff `(λ, μ)` lies in
//! the convex region spanned by the elliptical arc
//!
//! ```text
//! Q(λ, μ) = d(λ² + μ²) + 2(d−2)λμ − 2(d−2)(λ + μ) = 4 − d,   (d−1)(λ + μ) ≥ d − 3
//! ```
//!
//! and the vertex `(1/(1−d), 1/(1−d))`. For `d = 2` the region is the unit
//! disk. A point of the arc is extremal among all compatible pairs iff
//! `λ ≠ 0`, `μ ≠ 0` and `−1` is not an eigenvalue of the Haagerup matrix.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::finite_group::AbelianGroup;
use crate::haagerup::{fourier_spectrum_closed_form, has_minus_one, spectrum};
use crate::mub_catalog::{fourier_mub, MubPair};
use crate::numerics::{columns, gram_rank, subspace_intersection_dim, Tolerances};
use crate::povm::{
    bloch_observable, check_qubit_axes, k_matrix, luders_joint, norm3, qubit_joint, vertex_joint,
    JointObservable, NoiseParams, Observable, DEFAULT_QUBIT_AXES, ZERO_THRESHOLD,
};

/// Slack for all region and arc membership tests.
pub const GEOMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Interior,
    OnGammaArc,
    Vertex,
    BoundarySegment,
    OutsideRegion,
    OutsideBox,
}

impl Classification {
    pub fn is_inside(self) -> bool {
        !matches!(self, Classification::OutsideRegion | Classification::OutsideBox)
    }

    /// Extreme points of the region: the arc (or circle) and the vertex.
    pub fn is_extreme(self) -> bool {
        matches!(self, Classification::OnGammaArc | Classification::Vertex)
    }

    pub fn is_boundary(self) -> bool {
        matches!(
            self,
            Classification::OnGammaArc | Classification::Vertex | Classification::BoundarySegment
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Interior => "interior",
            Classification::OnGammaArc => "on_gamma_arc",
            Classification::Vertex => "vertex",
            Classification::BoundarySegment => "boundary_segment",
            Classification::OutsideRegion => "outside_region",
            Classification::OutsideBox => "outside_box",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionPoint {
    pub d: usize,
    pub lambda: f64,
    pub mu: f64,
    pub classification: Classification,
}

/// `Q(λ, μ)`; the arc is `Q = 4 − d`.
pub fn quadratic_form(d: usize, lambda: f64, mu: f64) -> f64 {
    let df = d as f64;
    df * (lambda * lambda + mu * mu) + 2.0 * (df - 2.0) * lambda * mu
        - 2.0 * (df - 2.0) * (lambda + mu)
}

/// `Q(λ, μ) − (4 − d)`, zero on the arc.
pub fn gamma_residual(d: usize, lambda: f64, mu: f64) -> f64 {
    quadratic_form(d, lambda, mu) - (4.0 - d as f64)
}

/// `(d−1)(λ+μ) − (d−3)`, non-negative on the arc side of the chord.
pub fn chord_value(d: usize, lambda: f64, mu: f64) -> f64 {
    let df = d as f64;
    (df - 1.0) * (lambda + mu) - (df - 3.0)
}

/// Whether `(λ, μ)` is on the elliptical arc (`d ≥ 3`) or the unit circle
/// (`d = 2`) within [`GEOMETRY_TOL`].
pub fn on_gamma(d: usize, lambda: f64, mu: f64) -> bool {
    matches!(
        region_contains(d, lambda, mu).map(|p| p.classification),
        Ok(Classification::OnGammaArc)
    )
}

/// [`on_gamma`] as a checked precondition.
pub fn require_on_gamma(d: usize, lambda: f64, mu: f64) -> Result<()> {
    let p = region_contains(d, lambda, mu)?;
    if p.classification == Classification::OnGammaArc {
        return Ok(());
    }
    Err(Error::OffCurve {
        lambda,
        mu,
        detail: geometry_detail(d, lambda, mu, p.classification),
    })
}

fn geometry_detail(d: usize, lambda: f64, mu: f64, c: Classification) -> String {
    if d == 2 {
        format!(
            "classified {}, λ²+μ² − 1 = {:.3e}",
            c.as_str(),
            lambda * lambda + mu * mu - 1.0
        )
    } else {
        format!(
            "classified {}, arc residual Q − (4−d) = {:.3e}, chord value (d−1)(λ+μ) − (d−3) = {:.3e}",
            c.as_str(),
            gamma_residual(d, lambda, mu),
            chord_value(d, lambda, mu)
        )
    }
}

/// Locates `(λ, μ)` relative to the compatibility region.
///
/// For `d ≥ 3` the region is the box `[1/(1−d), 1]²` intersected with the
/// union of the ellipse `Q ≤ 4 − d` and the half-plane
/// `(d−1)(λ+μ) ≤ d − 3`. The straight boundary pieces lie on the box edges
/// between the vertex and the arc endpoints.
pub fn region_contains(d: usize, lambda: f64, mu: f64) -> Result<RegionPoint> {
    if d < 2 {
        return Err(Error::Unsupported(format!("dimension {d} < 2")));
    }
    if !lambda.is_finite() || !mu.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite point ({lambda}, {mu})")));
    }
    let t = GEOMETRY_TOL;
    let lo = crate::povm::noise_lower_bound(d);
    let in_box = |v: f64| v >= lo - t && v <= 1.0 + t;
    let classification = if !in_box(lambda) || !in_box(mu) {
        Classification::OutsideBox
    } else if d == 2 {
        let r = lambda * lambda + mu * mu - 1.0;
        if r > t {
            Classification::OutsideRegion
        } else if r >= -t {
            Classification::OnGammaArc
        } else {
            Classification::Interior
        }
    } else {
        let res = gamma_residual(d, lambda, mu);
        let chord = chord_value(d, lambda, mu);
        if res > t && chord > t {
            Classification::OutsideRegion
        } else if (lambda - lo).abs() <= t && (mu - lo).abs() <= t {
            Classification::Vertex
        } else if res.abs() <= t && chord >= -t {
            Classification::OnGammaArc
        } else if (lambda - lo).abs() <= t || (mu - lo).abs() <= t {
            Classification::BoundarySegment
        } else {
            Classification::Interior
        }
    };
    Ok(RegionPoint {
        d,
        lambda,
        mu,
        classification,
    })
}

/// Point of the arc on the given branch: `A` gives `(ν, γ_ν)`, `B` gives
/// `(γ_ν, ν)`.
pub fn gamma_parametrize(d: usize, nu: f64, branch: crate::povm::Branch) -> Result<(f64, f64)> {
    let g = crate::povm::gamma(nu, d)?;
    Ok(match branch {
        crate::povm::Branch::A => (nu, g),
        crate::povm::Branch::B => (g, nu),
    })
}

/// The arc point with `λ = μ`, namely `(d − 2 + √d) / (2(d − 1))`; this is
/// `1/√2` for `d = 2`.
pub fn symmetric_arc_point(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::Unsupported(format!("dimension {d} < 2")));
    }
    let df = d as f64;
    Ok((df - 2.0 + df.sqrt()) / (2.0 * (df - 1.0)))
}

/// The two endpoints of the arc, `(1/(1−d), (d−2)/(d−1))` and its mirror.
pub fn arc_endpoints(d: usize) -> [(f64, f64); 2] {
    let df = d as f64;
    let lo = crate::povm::noise_lower_bound(d);
    let hi = (df - 2.0) / (df - 1.0);
    [(lo, hi), (hi, lo)]
}

/// Ordered polyline along the arc (`d ≥ 3`) or circle (`d = 2`) with about
/// `n` points per branch.
pub fn gamma_polyline(d: usize, n: usize) -> Result<Vec<(f64, f64)>> {
    if d < 2 {
        return Err(Error::Unsupported(format!("dimension {d} < 2")));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 points, got {n}")));
    }
    if d == 2 {
        return Ok((0..n)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / (n - 1) as f64;
                (th.cos(), th.sin())
            })
            .collect());
    }
    let lo = crate::povm::noise_lower_bound(d);
    let mut out = Vec::with_capacity(2 * n);
    // Branch A covers the endpoint on the μ axis side through (0,1) to (1,0);
    // branch B continues from (1,0) (ν = 0) to the other endpoint.
    for k in 0..n {
        let nu = lo + (1.0 - lo) * k as f64 / (n - 1) as f64;
        out.push(gamma_parametrize(d, nu, crate::povm::Branch::A)?);
    }
    for k in 1..n {
        let nu = lo * k as f64 / (n - 1) as f64;
        out.push(gamma_parametrize(d, nu, crate::povm::Branch::B)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Extremal,
    NotExtremal,
    NotCompatible,
    NotApplicable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Extremal => "extremal",
            Verdict::NotExtremal => "not_extremal",
            Verdict::NotCompatible => "not_compatible",
            Verdict::NotApplicable => "not_applicable",
        }
    }
}

/// Machine-checkable evidence attached to a certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    /// Both noise parameters nonzero.
    NonzeroParameters {
        lambda: f64,
        mu: f64,
        threshold: f64,
        satisfied: bool,
    },
    MinusOneDistance {
        distance: f64,
        tolerance: f64,
        present: bool,
        multiplicity: usize,
    },
    /// Invertibility of `K` for the constructed joint observable.
    KSpectrum {
        values: [f64; 4],
        invertible: bool,
    },
    GramRank {
        rank: usize,
        full: usize,
        deficit: usize,
        /// `d² − mult(−1)` when `K` is invertible.
        predicted: Option<usize>,
    },
    EffectRanks {
        max: usize,
        min: usize,
    },
    RangeIntersection {
        x: usize,
        y1: usize,
        y2: usize,
        dim: usize,
    },
    Parity {
        order: usize,
        odd: bool,
    },
    ClosedFormDistance {
        distance: f64,
        consistent: bool,
    },
    Decomposition {
        plus: [[f64; 3]; 2],
        minus: [[f64; 3]; 2],
        norm_sums: [f64; 2],
        average_deviation: f64,
    },
    Geometry {
        classification: Classification,
        detail: String,
    },
    NegativeNoise {
        lambda: f64,
        mu: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub pair_label: String,
    pub d: usize,
    pub lambda: f64,
    pub mu: f64,
    pub verdict: Verdict,
    pub reasons: Vec<Evidence>,
    pub minus_one_distance: Option<f64>,
    pub gram_rank: Option<usize>,
    /// `None` when no oracle ran.
    pub oracle_agreement: Option<bool>,
}

impl Certificate {
    fn new(pair_label: &str, d: usize, lambda: f64, mu: f64, verdict: Verdict) -> Self {
        Self {
            pair_label: pair_label.to_string(),
            d,
            lambda,
            mu,
            verdict,
            reasons: Vec::new(),
            minus_one_distance: None,
            gram_rank: None,
            oracle_agreement: None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("certificate serializes")
    }

    pub fn find(&self, pred: impl Fn(&Evidence) -> bool) -> Option<&Evidence> {
        self.reasons.iter().find(|e| pred(e))
    }

    fn flag_negative(&mut self) {
        if self.lambda < 0.0 || self.mu < 0.0 {
            self.reasons.push(Evidence::NegativeNoise {
                lambda: self.lambda,
                mu: self.mu,
            });
        }
    }
}

/// Linear independence of the effects of a joint observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IndependenceReport {
    pub rank: usize,
    pub effects: usize,
    pub independent: bool,
    pub max_effect_rank: usize,
}

pub fn independence_oracle(c: &JointObservable, tol: &Tolerances) -> Result<IndependenceReport> {
    let rank = gram_rank(c.effects(), tol)?;
    let effects = c.effects().len();
    Ok(IndependenceReport {
        rank,
        effects,
        independent: rank == effects,
        max_effect_rank: c.max_effect_rank(tol)?,
    })
}

/// Certifies a point of the elliptical arc for a MUB pair.
///
/// Qubit pairs are delegated to [`certify_qubit`] with the default Bloch
/// axes. Points off the arc yield `not_compatible` (outside the region) or
/// `not_applicable` (inside) with geometric diagnostics.
///
/// With `oracle` set, the Lüders joint observable is built and the rank of
/// its effects is compared with the verdict: the point is extremal iff the
/// `d²` rank-one effects are linearly independent. A disagreement downgrades
/// the verdict to `not_applicable`.
pub fn certify_gamma_point(
    pair: &MubPair,
    lambda: f64,
    mu: f64,
    oracle: bool,
    tol: &Tolerances,
) -> Result<Certificate> {
    let d = pair.d();
    if d == 2 {
        let (a, b) = DEFAULT_QUBIT_AXES;
        let mut cert = certify_qubit(a, b, lambda, mu, tol)?;
        cert.pair_label = pair.label().to_string();
        return Ok(cert);
    }
    let point = region_contains(d, lambda, mu)?;
    if point.classification != Classification::OnGammaArc {
        let verdict = if point.classification.is_inside() {
            Verdict::NotApplicable
        } else {
            Verdict::NotCompatible
        };
        let mut cert = Certificate::new(pair.label(), d, lambda, mu, verdict);
        cert.reasons.push(Evidence::Geometry {
            classification: point.classification,
            detail: geometry_detail(d, lambda, mu, point.classification),
        });
        return Ok(cert);
    }

    let nonzero = lambda.abs() > ZERO_THRESHOLD && mu.abs() > ZERO_THRESHOLD;
    let spec = spectrum(pair, tol)?;
    let (present, distance) = has_minus_one(&spec, tol);
    let multiplicity = spec.minus_one_multiplicity(tol);
    let verdict = if nonzero && !present {
        Verdict::Extremal
    } else {
        Verdict::NotExtremal
    };

    let mut cert = Certificate::new(pair.label(), d, lambda, mu, verdict);
    cert.minus_one_distance = Some(distance);
    cert.reasons.push(Evidence::NonzeroParameters {
        lambda,
        mu,
        threshold: ZERO_THRESHOLD,
        satisfied: nonzero,
    });
    cert.reasons.push(Evidence::MinusOneDistance {
        distance,
        tolerance: tol.cluster,
        present,
        multiplicity,
    });
    cert.flag_negative();

    if oracle {
        let joint = luders_joint(pair, &NoiseParams::new(d, lambda, mu)?)?;
        let report = independence_oracle(&joint, tol)?;
        let k = k_matrix(joint.coefficients().expect("Lüders coefficients"), d)?;
        let predicted = k.invertible.then(|| d * d - multiplicity);
        cert.reasons.push(Evidence::KSpectrum {
            values: k.spectral.map(|s| s.value),
            invertible: k.invertible,
        });
        cert.reasons.push(Evidence::GramRank {
            rank: report.rank,
            full: d * d,
            deficit: d * d - report.rank,
            predicted,
        });
        let ranks = joint.effect_ranks(tol)?;
        cert.reasons.push(Evidence::EffectRanks {
            max: ranks.iter().copied().max().unwrap_or(0),
            min: ranks.iter().copied().min().unwrap_or(0),
        });
        cert.gram_rank = Some(report.rank);
        let oracle_extremal = report.independent && report.max_effect_rank == 1;
        let agree = oracle_extremal == (verdict == Verdict::Extremal)
            && predicted.is_none_or(|p| p == report.rank);
        cert.oracle_agreement = Some(agree);
        if !agree {
            cert.verdict = Verdict::NotApplicable;
        }
    }
    Ok(cert)
}

/// Range intersection of two vertex effects `C(x,y1)` and `C(x,y2)`.
pub fn vertex_range_intersection(
    joint: &JointObservable,
    x: usize,
    y1: usize,
    y2: usize,
    tol: &Tolerances,
) -> Result<usize> {
    subspace_intersection_dim(
        &columns(joint.effect(x, y1)),
        &columns(joint.effect(x, y2)),
        tol,
    )
}

/// Certifies the vertex `(1/(1−d), 1/(1−d))`.
///
/// In `d = 3` the vertex effects are rank one and linearly independent, so
/// the vertex pair is extremal. For `d ≥ 4` the ranges of `C(0,0)` and
/// `C(0,1)` intersect nontrivially, which rules out extremality.
pub fn certify_vertex(pair: &MubPair, tol: &Tolerances) -> Result<Certificate> {
    let d = pair.d();
    let nu = crate::povm::noise_lower_bound(d.max(2));
    if d < 3 {
        let mut cert = Certificate::new(pair.label(), d, nu, nu, Verdict::NotApplicable);
        cert.reasons.push(Evidence::Geometry {
            classification: region_contains(d.max(2), nu, nu)?.classification,
            detail: format!("the vertex exists only for d >= 3, got d = {d}"),
        });
        return Ok(cert);
    }
    let joint = vertex_joint(pair)?;
    let ranks = joint.effect_ranks(tol)?;
    let (max, min) = (
        ranks.iter().copied().max().unwrap_or(0),
        ranks.iter().copied().min().unwrap_or(0),
    );
    let spec = spectrum(pair, tol)?;
    let (present, distance) = has_minus_one(&spec, tol);

    let mut cert = Certificate::new(pair.label(), d, nu, nu, Verdict::NotExtremal);
    cert.minus_one_distance = Some(distance);
    cert.reasons.push(Evidence::EffectRanks { max, min });
    cert.flag_negative();

    if d == 3 {
        let report = independence_oracle(&joint, tol)?;
        let k = k_matrix(joint.coefficients().expect("vertex coefficients"), d)?;
        let multiplicity = spec.minus_one_multiplicity(tol);
        let predicted = k.invertible.then(|| d * d - multiplicity);
        cert.reasons.push(Evidence::KSpectrum {
            values: k.spectral.map(|s| s.value),
            invertible: k.invertible,
        });
        cert.reasons.push(Evidence::MinusOneDistance {
            distance,
            tolerance: tol.cluster,
            present,
            multiplicity,
        });
        cert.reasons.push(Evidence::GramRank {
            rank: report.rank,
            full: d * d,
            deficit: d * d - report.rank,
            predicted,
        });
        cert.gram_rank = Some(report.rank);
        let extremal = max == 1 && report.independent;
        cert.verdict = if extremal {
            Verdict::Extremal
        } else {
            Verdict::NotExtremal
        };
        cert.oracle_agreement = Some(predicted == Some(report.rank));
    } else {
        let dim = vertex_range_intersection(&joint, 0, 0, 1, tol)?;
        cert.reasons.push(Evidence::RangeIntersection {
            x: 0,
            y1: 0,
            y2: 1,
            dim,
        });
        cert.verdict = if dim >= 1 {
            Verdict::NotExtremal
        } else {
            Verdict::NotApplicable
        };
        cert.oracle_agreement = Some(dim == d - 3);
    }
    Ok(cert)
}

/// Certifies an arc point for the Fourier pair of `g`, where the verdict is
/// decided by the parity of the group order. The parity verdict is checked
/// against the closed-form spectrum and the numeric certificate; on any
/// disagreement the numeric verdict is reported and `oracle_agreement` is
/// false.
pub fn certify_fourier(
    g: &AbelianGroup,
    lambda: f64,
    mu: f64,
    oracle: bool,
    tol: &Tolerances,
) -> Result<Certificate> {
    let pair = fourier_mub(g);
    let mut cert = certify_gamma_point(&pair, lambda, mu, oracle, tol)?;
    let d = g.order();
    let applies = d >= 3
        && cert.verdict != Verdict::NotCompatible
        && region_contains(d, lambda, mu)?.classification == Classification::OnGammaArc
        && lambda.abs() > ZERO_THRESHOLD
        && mu.abs() > ZERO_THRESHOLD;
    if !applies {
        return Ok(cert);
    }
    let odd = d % 2 == 1;
    let closed = fourier_spectrum_closed_form(g, tol);
    let (present, distance) = has_minus_one(&closed, tol);
    let consistent = present != odd;
    cert.reasons.push(Evidence::Parity { order: d, odd });
    cert.reasons.push(Evidence::ClosedFormDistance {
        distance,
        consistent,
    });
    let parity_verdict = if odd {
        Verdict::Extremal
    } else {
        Verdict::NotExtremal
    };
    let agree = consistent && cert.verdict == parity_verdict && cert.oracle_agreement != Some(false);
    cert.oracle_agreement = Some(agree);
    if agree {
        cert.verdict = parity_verdict;
    }
    Ok(cert)
}

/// Two compatible qubit pairs averaging to `(A_λ, B_μ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitWitness {
    pub plus: (Observable, Observable),
    pub minus: (Observable, Observable),
    /// Bloch vectors `[A±, B±]`: `λa ± μb` and `μb ± λa`.
    pub plus_bloch: [[f64; 3]; 2],
    pub minus_bloch: [[f64; 3]; 2],
    /// `½‖α+β‖ + ½‖α−β‖` for each half; at most 1 means compatible.
    pub norm_sums: [f64; 2],
    /// Largest entrywise deviation of the average from `(A_λ, B_μ)`.
    pub average_deviation: f64,
}

fn axpy(s: f64, a: [f64; 3], t: f64, b: [f64; 3]) -> [f64; 3] {
    [s * a[0] + t * b[0], s * a[1] + t * b[1], s * a[2] + t * b[2]]
}

/// Compatibility measure `½‖α+β‖ + ½‖α−β‖` of two unbiased qubit
/// observables with Bloch vectors `α`, `β`.
pub fn qubit_norm_sum(alpha: [f64; 3], beta: [f64; 3]) -> f64 {
    0.5 * norm3(axpy(1.0, alpha, 1.0, beta)) + 0.5 * norm3(axpy(1.0, alpha, -1.0, beta))
}

fn average(x: &Observable, y: &Observable) -> Observable {
    Observable::from_effects(
        x.effects()
            .iter()
            .zip(y.effects())
            .map(|(a, b)| (a + b) * num_complex::Complex64::new(0.5, 0.0))
            .collect(),
    )
    .expect("same shapes")
}

pub fn qubit_nonextremal_witness(
    a: [f64; 3],
    b: [f64; 3],
    lambda: f64,
    mu: f64,
    tol: &Tolerances,
) -> Result<QubitWitness> {
    check_qubit_axes(a, b, tol)?;
    let r2 = lambda * lambda + mu * mu;
    if r2 > 1.0 + tol.psd {
        return Err(Error::Incompatible(format!(
            "λ² + μ² = {r2} > 1: a qubit pair is compatible only inside the unit disk"
        )));
    }
    if lambda == 0.0 && mu == 0.0 {
        return Err(Error::InvalidArgument(
            "degenerate point (0, 0): both halves of the decomposition coincide".into(),
        ));
    }
    let plus_bloch = [axpy(lambda, a, mu, b), axpy(mu, b, lambda, a)];
    let minus_bloch = [axpy(lambda, a, -mu, b), axpy(mu, b, -lambda, a)];
    let plus = (bloch_observable(plus_bloch[0]), bloch_observable(plus_bloch[1]));
    let minus = (bloch_observable(minus_bloch[0]), bloch_observable(minus_bloch[1]));
    let target_a = bloch_observable(axpy(lambda, a, 0.0, b));
    let target_b = bloch_observable(axpy(0.0, a, mu, b));
    let average_deviation = average(&plus.0, &minus.0)
        .max_deviation(&target_a)
        .max(average(&plus.1, &minus.1).max_deviation(&target_b));
    Ok(QubitWitness {
        norm_sums: [
            qubit_norm_sum(plus_bloch[0], plus_bloch[1]),
            qubit_norm_sum(minus_bloch[0], minus_bloch[1]),
        ],
        plus,
        minus,
        plus_bloch,
        minus_bloch,
        average_deviation,
    })
}

/// Certificate for a qubit pair with Bloch axes `a ⟂ b`. No point of the
/// disk is extremal; points off the origin carry an explicit decomposition.
pub fn certify_qubit(a: [f64; 3], b: [f64; 3], lambda: f64, mu: f64, tol: &Tolerances) -> Result<Certificate> {
    let label = "qubit";
    let point = region_contains(2, lambda, mu)?;
    if !point.classification.is_inside() {
        let mut cert = Certificate::new(label, 2, lambda, mu, Verdict::NotCompatible);
        cert.reasons.push(Evidence::Geometry {
            classification: point.classification,
            detail: geometry_detail(2, lambda, mu, point.classification),
        });
        return Ok(cert);
    }
    let mut cert = Certificate::new(label, 2, lambda, mu, Verdict::NotExtremal);
    cert.reasons.push(Evidence::Geometry {
        classification: point.classification,
        detail: geometry_detail(2, lambda, mu, point.classification),
    });
    cert.flag_negative();
    // Points barely outside the closed disk are pulled onto it for the joint
    // observable and the witness.
    let r = (lambda * lambda + mu * mu).sqrt();
    let (l, m) = if r > 1.0 { (lambda / r, mu / r) } else { (lambda, mu) };
    if l == 0.0 && m == 0.0 {
        cert.reasons.push(Evidence::Geometry {
            classification: point.classification,
            detail: "(U, U) is the midpoint of (A_1, U) and (A_-1, U)".into(),
        });
    } else {
        let w = qubit_nonextremal_witness(a, b, l, m, tol)?;
        cert.reasons.push(Evidence::Decomposition {
            plus: w.plus_bloch,
            minus: w.minus_bloch,
            norm_sums: w.norm_sums,
            average_deviation: w.average_deviation,
        });
    }
    let joint = qubit_joint(a, b, &NoiseParams::new(2, l, m)?, tol)?;
    let report = independence_oracle(&joint, tol)?;
    cert.gram_rank = Some(report.rank);
    cert.reasons.push(Evidence::GramRank {
        rank: report.rank,
        full: 4,
        deficit: 4 - report.rank,
        predicted: None,
    });
    cert.oracle_agreement = Some(!report.independent);
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_group::make_group;
    use crate::mub_catalog::{hadamard_to_mub, table1_matrix};
    use crate::povm::Branch;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn class(d: usize, l: f64, m: f64) -> Classification {
        region_contains(d, l, m).unwrap().classification
    }

    #[test]
    fn region_examples() {
        assert_eq!(class(5, 1.0, 0.0), Classification::OnGammaArc);
        assert_eq!(class(5, -0.25, -0.25), Classification::Vertex);
        assert_eq!(class(5, 1.0, 1.0), Classification::OutsideRegion);
        assert_eq!(class(2, 0.6, 0.8), Classification::OnGammaArc);
        assert_eq!(class(5, 0.0, 0.0), Classification::Interior);
        assert_eq!(class(5, -0.25, 0.1), Classification::BoundarySegment);
        assert_eq!(class(5, -0.3, 0.1), Classification::OutsideBox);
        assert_eq!(class(5, -0.25, 0.75), Classification::OnGammaArc);
        assert!(matches!(region_contains(1, 0.0, 0.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn parametrization_examples() {
        assert_eq!(gamma_parametrize(5, 1.0, Branch::A).unwrap(), (1.0, 0.0));
        let (l, m) = gamma_parametrize(5, -0.25, Branch::A).unwrap();
        assert!((l + 0.25).abs() < 1e-15 && (m - 0.75).abs() < 1e-15);
        let s = symmetric_arc_point(9).unwrap();
        assert!((s - 0.625).abs() < 1e-15);
        let (l, m) = gamma_parametrize(9, s, Branch::A).unwrap();
        assert!((l - m).abs() < 1e-12);
        assert!((symmetric_arc_point(2).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(gamma_parametrize(5, -0.3, Branch::B).is_err());
    }

    #[test]
    fn polyline_lies_on_arc() {
        for d in [3, 5, 8] {
            let line = gamma_polyline(d, 21).unwrap();
            let ends = arc_endpoints(d);
            assert!((line[0].0 - ends[0].0).abs() < 1e-14);
            assert!((line.last().unwrap().1 - ends[1].1).abs() < 1e-14);
            for &(l, m) in &line {
                assert!(gamma_residual(d, l, m).abs() < 1e-11);
                assert_eq!(class(d, l, m), Classification::OnGammaArc);
            }
        }
    }

    #[test]
    fn fourier_arc_certificates() {
        let s = symmetric_arc_point(5).unwrap();
        let c = certify_fourier(&make_group(&[5]).unwrap(), s, s, true, &tol()).unwrap();
        assert_eq!(c.verdict, Verdict::Extremal);
        assert_eq!(c.oracle_agreement, Some(true));
        assert_eq!(c.gram_rank, Some(25));

        let s = symmetric_arc_point(4).unwrap();
        let c = certify_fourier(&make_group(&[4]).unwrap(), s, s, true, &tol()).unwrap();
        assert_eq!(c.verdict, Verdict::NotExtremal);
        assert_eq!(c.oracle_agreement, Some(true));
    }

    #[test]
    fn condition_i_failure() {
        let pair = fourier_mub(&make_group(&[5]).unwrap());
        let c = certify_gamma_point(&pair, 1.0, 0.0, true, &tol()).unwrap();
        assert_eq!(c.verdict, Verdict::NotExtremal);
        assert!(c.gram_rank.unwrap() < 25);
        assert_eq!(c.oracle_agreement, Some(true));
    }

    #[test]
    fn off_arc_points() {
        let pair = fourier_mub(&make_group(&[5]).unwrap());
        let c = certify_gamma_point(&pair, 0.1, 0.1, false, &tol()).unwrap();
        assert_eq!(c.verdict, Verdict::NotApplicable);
        let c = certify_gamma_point(&pair, 0.9, 0.9, false, &tol()).unwrap();
        assert_eq!(c.verdict, Verdict::NotCompatible);
    }

    #[test]
    fn d7_m2_symmetric_point_is_extremal() {
        let pair = hadamard_to_mub(table1_matrix("d7-m2", &[]).unwrap(), "d7-m2", &tol()).unwrap();
        let s = symmetric_arc_point(7).unwrap();
        let c = certify_gamma_point(&pair, s, s, true, &tol()).unwrap();
        assert_eq!(c.verdict, Verdict::Extremal);
        assert_eq!(c.gram_rank, Some(49));
    }

    #[test]
    fn vertex_certificates() {
        let c = certify_vertex(&fourier_mub(&make_group(&[3]).unwrap()), &tol()).unwrap();
        assert_eq!(c.verdict, Verdict::Extremal);
        assert_eq!(c.gram_rank, Some(9));
        for (n, dim) in [(4, 1), (5, 2)] {
            let c = certify_vertex(&fourier_mub(&make_group(&[n]).unwrap()), &tol()).unwrap();
            assert_eq!(c.verdict, Verdict::NotExtremal);
            assert!(c.reasons.contains(&Evidence::RangeIntersection { x: 0, y1: 0, y2: 1, dim }));
        }
        let c = certify_vertex(&fourier_mub(&make_group(&[2]).unwrap()), &tol()).unwrap();
        assert_eq!(c.verdict, Verdict::NotApplicable);
    }

    #[test]
    fn qubit_witness_examples() {
        let (a, b) = DEFAULT_QUBIT_AXES;
        let w = qubit_nonextremal_witness(a, b, 1.0, 0.0, &tol()).unwrap();
        assert!((norm3(w.plus_bloch[0]) - 1.0).abs() < 1e-15);
        assert_ne!(w.plus, w.minus);
        let s = 0.5f64.sqrt();
        let w = qubit_nonextremal_witness(a, b, s, s, &tol()).unwrap();
        for v in w.plus_bloch.iter().chain(&w.minus_bloch) {
            assert!((norm3(*v) - 1.0).abs() < 1e-15);
        }
        assert!((w.norm_sums[0] - 1.0).abs() < 1e-15);
        assert!(w.average_deviation < 1e-15);
        assert!(qubit_nonextremal_witness(a, b, 0.0, 0.0, &tol()).is_err());
    }

    #[test]
    fn qubit_certificate_and_oracle() {
        let (a, b) = DEFAULT_QUBIT_AXES;
        let c = certify_qubit(a, b, 0.6, 0.8, &tol()).unwrap();
        assert_eq!(c.verdict, Verdict::NotExtremal);
        assert_eq!(c.gram_rank, Some(3));
        let c = certify_qubit(a, b, 0.9, 0.9, &tol()).unwrap();
        assert_eq!(c.verdict, Verdict::NotCompatible);
    }

    #[test]
    fn certificate_json_has_contract_fields() {
        let c = certify_vertex(&fourier_mub(&make_group(&[4]).unwrap()), &tol()).unwrap();
        let v = c.to_json();
        for key in ["pair_label", "d", "lambda", "mu", "verdict", "reasons", "minus_one_distance", "gram_rank", "oracle_agreement"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["verdict"], "not_extremal");
        assert_eq!(v["reasons"][2]["kind"], "range_intersection");
    }
}
