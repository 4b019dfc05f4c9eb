//! The Haagerup matrix of a MUB pair and its spectrum.
//!
//! `Λ_{(x,y),(z,t)} = d·Re(conj(H[z][y])·H[z][t]·conj(H[x][t])·H[x][y])`, with
//! the pair `(x,y)` flattened to `x·d + y`. Whether `−1` is an eigenvalue of
//! `Λ` decides extremality of the noisy pair on the elliptical arc.

use serde::Serialize;

use crate::error::Result;
use crate::finite_group::{root_of_unity, AbelianGroup};
use crate::mub_catalog::{ReferenceCluster, Table1Entry};
use crate::mub_catalog::table1::eval_poly;
use crate::mub_catalog::MubPair;
use crate::numerics::{cluster_sorted, eig_sym, Cluster, RealSymmetricMatrix, Tolerances};

pub fn haagerup_matrix(pair: &MubPair) -> RealSymmetricMatrix {
    let d = pair.d();
    let h = pair.hadamard();
    let scale = d as f64;
    RealSymmetricMatrix::from_upper_fn(d * d, |i, j| {
        let (x, y) = (i / d, i % d);
        let (z, t) = (j / d, j % d);
        scale * (h[(z, y)].conj() * h[(z, t)] * h[(x, t)].conj() * h[(x, y)]).re
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HaagerupSpectrum {
    pub label: String,
    pub d: usize,
    /// Ascending, length `d²`.
    pub eigenvalues: Vec<f64>,
    pub clusters: Vec<Cluster>,
    /// `min_i |λ_i + 1|`.
    pub nearest_to_minus_one: f64,
}

impl HaagerupSpectrum {
    /// Builds a spectrum from an unordered eigenvalue list.
    pub fn from_values(label: impl Into<String>, d: usize, mut values: Vec<f64>, tol: &Tolerances) -> Self {
        values.sort_by(f64::total_cmp);
        let nearest = values
            .iter()
            .map(|v| (v + 1.0).abs())
            .fold(f64::INFINITY, f64::min);
        Self {
            label: label.into(),
            d,
            clusters: cluster_sorted(&values, tol.cluster),
            eigenvalues: values,
            nearest_to_minus_one: nearest,
        }
    }

    /// Number of eigenvalues within `tol.cluster` of `−1`.
    pub fn minus_one_multiplicity(&self, tol: &Tolerances) -> usize {
        self.eigenvalues
            .iter()
            .filter(|v| (*v + 1.0).abs() <= tol.cluster)
            .count()
    }

    pub fn to_json(&self, tol: &Tolerances) -> serde_json::Value {
        let (has, dist) = has_minus_one(self, tol);
        serde_json::json!({
            "label": self.label,
            "d": self.d,
            "eigenvalues": self.eigenvalues,
            "clusters": self.clusters,
            "has_minus_one": has,
            "distance_to_minus_one": dist,
        })
    }
}

pub fn spectrum(pair: &MubPair, tol: &Tolerances) -> Result<HaagerupSpectrum> {
    let eig = eig_sym(&haagerup_matrix(pair), false, tol)?;
    Ok(HaagerupSpectrum::from_values(pair.label(), pair.d(), eig.values, tol))
}

/// Whether `−1` lies within `tol.cluster` of the spectrum, and the distance.
pub fn has_minus_one(spec: &HaagerupSpectrum, tol: &Tolerances) -> (bool, f64) {
    let dist = spec.nearest_to_minus_one;
    (dist <= tol.cluster, dist)
}

/// Spectrum of `Λ` for the Fourier pair of `g`, read off as the multiset
/// `{Re⟨r,s⟩ : r, s ∈ G}` without building the matrix.
pub fn fourier_spectrum_closed_form(g: &AbelianGroup, tol: &Tolerances) -> HaagerupSpectrum {
    let mut values = Vec::with_capacity(g.order() * g.order());
    for r in g.elements() {
        for s in g.elements() {
            let k = g.pairing_phase(&r, &s).expect("elements of the same group");
            values.push(root_of_unity(k, g.phase_denominator()).re);
        }
    }
    HaagerupSpectrum::from_values(format!("fourier-{g}[closed form]"), g.order(), values, tol)
}

/// Largest value deviation between two cluster lists with identical
/// multiplicity patterns, or `None` when the patterns differ.
pub fn compare_clusters(a: &[Cluster], b: &[Cluster]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut worst = 0.0f64;
    for (p, q) in a.iter().zip(b) {
        if p.multiplicity != q.multiplicity {
            return None;
        }
        worst = worst.max((p.value - q.value).abs());
    }
    Some(worst)
}

/// One expected line of a reference spectrum and what was found for it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceRow {
    pub expr: String,
    pub expected_value: Option<f64>,
    pub expected_multiplicity: usize,
    pub computed_value: Option<f64>,
    pub computed_multiplicity: usize,
    /// `|computed − expected|`, or the polynomial residual for implicit roots.
    pub deviation: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceComparison {
    pub label: String,
    pub rows: Vec<ReferenceRow>,
    /// Computed clusters not claimed by any expected row.
    pub unmatched: Vec<Cluster>,
    pub max_deviation: f64,
    pub passed: bool,
}

/// Compares a computed spectrum against a catalog entry's reference values.
///
/// Expected values closer than `tol.cluster` are merged first, so that
/// parameter values where two families of eigenvalues collide (for example
/// `a = 0` in `d4-f4`) are compared against the merged cluster. Implicitly
/// defined eigenvalues are accepted when the polynomial residual is below
/// `poly_tol`.
pub fn compare_reference(
    spec: &HaagerupSpectrum,
    entry: &Table1Entry,
    value_tol: f64,
    poly_tol: f64,
    tol: &Tolerances,
) -> ReferenceComparison {
    let reference = entry.reference_spectrum();
    let mut explicit: Vec<(String, f64, usize)> = reference
        .iter()
        .filter_map(|c| match *c {
            ReferenceCluster::Value { expr, value, multiplicity } => {
                Some((expr.to_string(), value, multiplicity))
            }
            _ => None,
        })
        .collect();
    explicit.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut merged: Vec<(String, f64, usize)> = Vec::new();
    for (expr, value, m) in explicit {
        match merged.last_mut() {
            Some(last) if (value - last.1).abs() <= tol.cluster => {
                last.0 = format!("{} & {expr}", last.0);
                last.2 += m;
            }
            _ => merged.push((expr, value, m)),
        }
    }

    let mut claimed = vec![false; spec.clusters.len()];
    let mut rows = Vec::new();
    for (expr, value, m) in merged {
        let best = spec
            .clusters
            .iter()
            .enumerate()
            .filter(|(i, _)| !claimed[*i])
            .min_by(|a, b| (a.1.value - value).abs().total_cmp(&(b.1.value - value).abs()));
        let row = match best {
            Some((i, c)) => {
                let dev = (c.value - value).abs();
                let passed = dev <= value_tol && c.multiplicity == m;
                if passed {
                    claimed[i] = true;
                }
                ReferenceRow {
                    expr,
                    expected_value: Some(value),
                    expected_multiplicity: m,
                    computed_value: Some(c.value),
                    computed_multiplicity: c.multiplicity,
                    deviation: dev,
                    passed,
                }
            }
            None => ReferenceRow {
                expr,
                expected_value: Some(value),
                expected_multiplicity: m,
                computed_value: None,
                computed_multiplicity: 0,
                deviation: f64::INFINITY,
                passed: false,
            },
        };
        rows.push(row);
    }

    for c in &reference {
        if let ReferenceCluster::PolynomialRoots {
            expr,
            coefficients,
            roots,
            multiplicity,
        } = *c
        {
            let mut found = 0;
            for (i, cl) in spec.clusters.iter().enumerate() {
                if claimed[i] || cl.multiplicity != multiplicity {
                    continue;
                }
                let residual = eval_poly(&coefficients, cl.value).abs();
                if residual < poly_tol {
                    claimed[i] = true;
                    found += 1;
                    rows.push(ReferenceRow {
                        expr: format!("root {found} of {expr}"),
                        expected_value: None,
                        expected_multiplicity: multiplicity,
                        computed_value: Some(cl.value),
                        computed_multiplicity: cl.multiplicity,
                        deviation: residual,
                        passed: true,
                    });
                }
            }
            for k in found..roots {
                rows.push(ReferenceRow {
                    expr: format!("root {} of {expr}", k + 1),
                    expected_value: None,
                    expected_multiplicity: multiplicity,
                    computed_value: None,
                    computed_multiplicity: 0,
                    deviation: f64::INFINITY,
                    passed: false,
                });
            }
        }
    }

    let unmatched: Vec<Cluster> = spec
        .clusters
        .iter()
        .zip(&claimed)
        .filter(|(_, &c)| !c)
        .map(|(c, _)| *c)
        .collect();
    let max_deviation = rows
        .iter()
        .filter(|r| r.expected_value.is_some())
        .map(|r| r.deviation)
        .fold(0.0, f64::max);
    let passed = unmatched.is_empty() && rows.iter().all(|r| r.passed);
    ReferenceComparison {
        label: entry.label(),
        rows,
        unmatched,
        max_deviation,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_group::make_group;
    use crate::mub_catalog::{family_f4, fourier_mub, hadamard_to_mub, table1_entry};
    use std::f64::consts::PI;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn catalog(id: &str, params: &[f64]) -> (Table1Entry, MubPair) {
        let e = table1_entry(id, params).unwrap();
        let pair = hadamard_to_mub(e.matrix(), e.label(), &tol()).unwrap();
        (e, pair)
    }

    fn pattern(spec: &HaagerupSpectrum) -> Vec<(f64, usize)> {
        spec.clusters.iter().map(|c| (c.value, c.multiplicity)).collect()
    }

    fn assert_pattern(spec: &HaagerupSpectrum, expected: &[(f64, usize)]) {
        let got = pattern(spec);
        assert_eq!(got.len(), expected.len(), "{got:?}");
        for ((v, m), (ev, em)) in got.iter().zip(expected) {
            assert!((v - ev).abs() < 1e-9, "{got:?}");
            assert_eq!(m, em, "{got:?}");
        }
    }

    #[test]
    fn diagonal_and_row_sums() {
        let pair = hadamard_to_mub(family_f4(0.8), "f4", &tol()).unwrap();
        let l = haagerup_matrix(&pair);
        for i in 0..16 {
            assert!((l.get(i, i) - 0.25).abs() < 1e-12);
            let row: f64 = (0..16).map(|j| l.get(i, j)).sum();
            assert!((row - 1.0).abs() < 1e-10);
        }
        assert_eq!(l.asymmetry(), 0.0);
    }

    #[test]
    fn fourier_z2() {
        let spec = spectrum(&fourier_mub(&make_group(&[2]).unwrap()), &tol()).unwrap();
        assert_pattern(&spec, &[(-1.0, 1), (1.0, 3)]);
    }

    #[test]
    fn closed_form_examples() {
        let t = tol();
        let z2 = fourier_spectrum_closed_form(&make_group(&[2]).unwrap(), &t);
        assert_pattern(&z2, &[(-1.0, 1), (1.0, 3)]);
        let k4 = fourier_spectrum_closed_form(&make_group(&[2, 2]).unwrap(), &t);
        assert_pattern(&k4, &[(-1.0, 6), (1.0, 10)]);
        let z3 = fourier_spectrum_closed_form(&make_group(&[3]).unwrap(), &t);
        assert_pattern(&z3, &[(-0.5, 4), (1.0, 5)]);
    }

    #[test]
    fn z3_has_no_minus_one() {
        let spec = spectrum(&fourier_mub(&make_group(&[3]).unwrap()), &tol()).unwrap();
        let (has, dist) = has_minus_one(&spec, &tol());
        assert!(!has);
        assert!((dist - 0.5).abs() < 1e-12);
    }

    #[test]
    fn f4_at_pi_over_three() {
        let (_, pair) = catalog("d4-f4", &[PI / 3.0]);
        let s = (PI / 3.0).sin();
        let spec = spectrum(&pair, &tol()).unwrap();
        assert_pattern(&spec, &[(-1.0, 4), (-s, 2), (s, 2), (1.0, 8)]);
    }

    #[test]
    fn d6_m3_and_d7_m2() {
        let (_, pair) = catalog("d6-m3", &[]);
        let spec = spectrum(&pair, &tol()).unwrap();
        assert_pattern(&spec, &[(-1.0, 9), (0.25, 16), (1.0, 11)]);

        let (_, pair) = catalog("d7-m2", &[]);
        let spec = spectrum(&pair, &tol()).unwrap();
        let (a, b) = (57f64.sqrt() / 8.0, 2f64.sqrt() / 4.0);
        assert_pattern(&spec, &[(-a, 8), (-0.75, 8), (-b, 6), (b, 6), (a, 8), (1.0, 13)]);
        let (has, dist) = has_minus_one(&spec, &tol());
        assert!(!has);
        assert!((dist - (1.0 - a)).abs() < 1e-10);
    }

    #[test]
    fn d7_m1_contains_minus_one() {
        let (_, pair) = catalog("d7-m1", &[]);
        let spec = spectrum(&pair, &tol()).unwrap();
        assert!(has_minus_one(&spec, &tol()).0);
        assert_eq!(spec.minus_one_multiplicity(&tol()), 1);
    }

    #[test]
    fn reference_comparison_handles_merged_clusters() {
        let (e, pair) = catalog("d4-f4", &[0.0]);
        let spec = spectrum(&pair, &tol()).unwrap();
        assert_pattern(&spec, &[(-1.0, 4), (0.0, 4), (1.0, 8)]);
        let cmp = compare_reference(&spec, &e, 1e-8, 1e-6, &tol());
        assert!(cmp.passed, "{cmp:?}");
    }

    #[test]
    fn reference_comparison_detects_wrong_entry() {
        let (_, pair) = catalog("d6-m3", &[]);
        let spec = spectrum(&pair, &tol()).unwrap();
        let wrong = table1_entry("d6-m1", &[0.5]).unwrap();
        assert!(!compare_reference(&spec, &wrong, 1e-8, 1e-6, &tol()).passed);
    }

    #[test]
    fn spectrum_json_fields() {
        let spec = spectrum(&fourier_mub(&make_group(&[2]).unwrap()), &tol()).unwrap();
        let v = spec.to_json(&tol());
        assert_eq!(v["d"], 2);
        assert_eq!(v["has_minus_one"], true);
        assert_eq!(v["clusters"][1]["multiplicity"], 3);
    }
}
