//! Complex Hadamard matrices in dimensions 4, 6 and 7 whose Haagerup spectra
//! are known in closed form, together with those reference spectra.
//!
//! Matrices are written out as exact expressions (roots of unity, surds) and
//! evaluated in floating point on construction. All include the `1/√d`
//! prefactor.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Table1Id {
    #[serde(rename = "d4-f4")]
    D4F4,
    #[serde(rename = "d6-m1")]
    D6M1,
    #[serde(rename = "d6-m2")]
    D6M2,
    #[serde(rename = "d6-m3")]
    D6M3,
    #[serde(rename = "d7-m1")]
    D7M1,
    #[serde(rename = "d7-m2")]
    D7M2,
}

impl Table1Id {
    pub const ALL: [Table1Id; 6] = [
        Table1Id::D4F4,
        Table1Id::D6M1,
        Table1Id::D6M2,
        Table1Id::D6M3,
        Table1Id::D7M1,
        Table1Id::D7M2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Table1Id::D4F4 => "d4-f4",
            Table1Id::D6M1 => "d6-m1",
            Table1Id::D6M2 => "d6-m2",
            Table1Id::D6M3 => "d6-m3",
            Table1Id::D7M1 => "d7-m1",
            Table1Id::D7M2 => "d7-m2",
        }
    }

    pub fn dimension(self) -> usize {
        match self {
            Table1Id::D4F4 => 4,
            Table1Id::D6M1 | Table1Id::D6M2 | Table1Id::D6M3 => 6,
            Table1Id::D7M1 | Table1Id::D7M2 => 7,
        }
    }

    pub fn is_parametric(self) -> bool {
        matches!(self, Table1Id::D4F4 | Table1Id::D6M1)
    }

    pub fn has_sign_branch(self) -> bool {
        matches!(self, Table1Id::D6M2 | Table1Id::D7M2)
    }
}

impl fmt::Display for Table1Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Table1Id {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Table1Id::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| {
                Error::NotFound(format!(
                    "unknown catalog id {s:?}; known ids: {}",
                    Table1Id::ALL.map(|i| i.as_str()).join(", ")
                ))
            })
    }
}

/// Branch of the `±` in the definition of `ω` for `d6-m2` and `d7-m2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
pub enum Sign {
    #[default]
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+" | "plus" | "+1" | "1" => Ok(Sign::Plus),
            "-" | "−" | "minus" | "-1" => Ok(Sign::Minus),
            other => Err(Error::InvalidArgument(format!("bad sign {other:?}, expected + or -"))),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// A fully specified catalog matrix: id plus parameter or sign branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Table1Entry {
    pub id: Table1Id,
    /// Phase parameter, already reduced into the family's domain.
    pub a: Option<f64>,
    pub sign: Sign,
}

impl Table1Entry {
    pub fn new(id: Table1Id, a: Option<f64>, sign: Sign) -> Result<Self> {
        let a = match (id, a) {
            (Table1Id::D4F4, Some(a)) => Some(reduce(a, PI)?),
            (Table1Id::D6M1, Some(a)) => Some(reduce(a, 2.0 * PI)?),
            (Table1Id::D4F4 | Table1Id::D6M1, None) => {
                return Err(Error::InvalidArgument(format!("{id} requires the parameter a")))
            }
            (_, Some(_)) => {
                return Err(Error::InvalidArgument(format!("{id} takes no parameter a")))
            }
            (_, None) => None,
        };
        if sign == Sign::Minus && !id.has_sign_branch() {
            return Err(Error::InvalidArgument(format!("{id} has no sign branch")));
        }
        Ok(Self { id, a, sign })
    }

    pub fn label(&self) -> String {
        match (self.a, self.id.has_sign_branch()) {
            (Some(a), _) => format!("{}(a={a})", self.id),
            (None, true) => format!("{}({})", self.id, self.sign),
            (None, false) => self.id.to_string(),
        }
    }

    pub fn matrix(&self) -> ComplexMatrix {
        match self.id {
            Table1Id::D4F4 => family_f4(self.a.expect("checked on construction")),
            Table1Id::D6M1 => d6_m1(self.a.expect("checked on construction")),
            Table1Id::D6M2 => d6_m2(self.sign),
            Table1Id::D6M3 => d6_m3(),
            Table1Id::D7M1 => d7_m1(),
            Table1Id::D7M2 => d7_m2(self.sign),
        }
    }

    /// Reference clusters of the Haagerup spectrum for this matrix.
    pub fn reference_spectrum(&self) -> Vec<ReferenceCluster> {
        use ReferenceCluster::Value as V;
        let s3 = 3f64.sqrt();
        match self.id {
            Table1Id::D4F4 => {
                let s = self.a.expect("checked on construction").sin().abs();
                vec![
                    V { expr: "-1", value: -1.0, multiplicity: 4 },
                    V { expr: "-|sin a|", value: -s, multiplicity: 2 },
                    V { expr: "|sin a|", value: s, multiplicity: 2 },
                    V { expr: "1", value: 1.0, multiplicity: 8 },
                ]
            }
            Table1Id::D6M1 => vec![
                V { expr: "-1", value: -1.0, multiplicity: 5 },
                V { expr: "-2/3", value: -2.0 / 3.0, multiplicity: 6 },
                V { expr: "0", value: 0.0, multiplicity: 10 },
                V { expr: "1", value: 1.0, multiplicity: 15 },
            ],
            Table1Id::D6M2 => {
                let r = (7.0 * (7.0 - 4.0 * s3)).sqrt();
                vec![
                    V { expr: "-1", value: -1.0, multiplicity: 5 },
                    V { expr: "-(sqrt3-1)", value: -(s3 - 1.0), multiplicity: 2 },
                    V {
                        expr: "-[sqrt(7(7-4sqrt3))+2sqrt3-3]/2",
                        value: -(r + 2.0 * s3 - 3.0) / 2.0,
                        multiplicity: 4,
                    },
                    V { expr: "-(2-sqrt3)", value: -(2.0 - s3), multiplicity: 4 },
                    V {
                        expr: "[sqrt(7(7-4sqrt3))-2sqrt3+3]/2",
                        value: (r - 2.0 * s3 + 3.0) / 2.0,
                        multiplicity: 4,
                    },
                    V { expr: "3sqrt3-5", value: 3.0 * s3 - 5.0, multiplicity: 2 },
                    V { expr: "1", value: 1.0, multiplicity: 15 },
                ]
            }
            Table1Id::D6M3 => vec![
                V { expr: "-1", value: -1.0, multiplicity: 9 },
                V { expr: "1/4", value: 0.25, multiplicity: 16 },
                V { expr: "1", value: 1.0, multiplicity: 11 },
            ],
            Table1Id::D7M1 => {
                let s22 = 22f64.sqrt();
                let s65 = 65f64.sqrt();
                let s2 = 2f64.sqrt();
                vec![
                    V { expr: "-1", value: -1.0, multiplicity: 1 },
                    V { expr: "-(9+sqrt22)/14", value: -(9.0 + s22) / 14.0, multiplicity: 2 },
                    V { expr: "-(3sqrt65+1)/28", value: -(3.0 * s65 + 1.0) / 28.0, multiplicity: 1 },
                    V { expr: "-11/14", value: -11.0 / 14.0, multiplicity: 1 },
                    V { expr: "-(5+3sqrt2)/14", value: -(5.0 + 3.0 * s2) / 14.0, multiplicity: 5 },
                    V { expr: "-1/2", value: -0.5, multiplicity: 1 },
                    // Conjugate partner of −(9+√22)/14.
                    V { expr: "-(9-sqrt22)/14", value: -(9.0 - s22) / 14.0, multiplicity: 2 },
                    V { expr: "-(5-3sqrt2)/14", value: -(5.0 - 3.0 * s2) / 14.0, multiplicity: 5 },
                    V { expr: "(3sqrt65-1)/28", value: (3.0 * s65 - 1.0) / 28.0, multiplicity: 1 },
                    V { expr: "13/14", value: 13.0 / 14.0, multiplicity: 2 },
                    V { expr: "1", value: 1.0, multiplicity: 16 },
                    ReferenceCluster::PolynomialRoots {
                        expr: "19208x^4+15092x^3-12642x^2-6167x+3031",
                        coefficients: D7_M1_QUARTIC,
                        roots: 4,
                        multiplicity: 3,
                    },
                ]
            }
            Table1Id::D7M2 => {
                let s57 = 57f64.sqrt();
                let s2 = 2f64.sqrt();
                vec![
                    V { expr: "-sqrt57/8", value: -s57 / 8.0, multiplicity: 8 },
                    V { expr: "-3/4", value: -0.75, multiplicity: 8 },
                    V { expr: "-sqrt2/4", value: -s2 / 4.0, multiplicity: 6 },
                    V { expr: "sqrt2/4", value: s2 / 4.0, multiplicity: 6 },
                    V { expr: "sqrt57/8", value: s57 / 8.0, multiplicity: 8 },
                    V { expr: "1", value: 1.0, multiplicity: 13 },
                ]
            }
        }
    }
}

/// Coefficients (highest degree first) of the quartic whose roots are the
/// four threefold eigenvalues of the `d7-m1` Haagerup matrix.
pub const D7_M1_QUARTIC: [f64; 5] = [19208.0, 15092.0, -12642.0, -6167.0, 3031.0];

/// Horner evaluation, coefficients highest degree first.
pub fn eval_poly(coefficients: &[f64], x: f64) -> f64 {
    coefficients.iter().fold(0.0, |acc, &c| acc * x + c)
}

/// One line of a reference spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceCluster {
    Value {
        expr: &'static str,
        value: f64,
        multiplicity: usize,
    },
    /// `roots` distinct eigenvalues, each of the given multiplicity, that are
    /// roots of a polynomial known only implicitly.
    PolynomialRoots {
        expr: &'static str,
        coefficients: [f64; 5],
        roots: usize,
        multiplicity: usize,
    },
}

impl ReferenceCluster {
    pub fn total_multiplicity(&self) -> usize {
        match *self {
            ReferenceCluster::Value { multiplicity, .. } => multiplicity,
            ReferenceCluster::PolynomialRoots {
                roots, multiplicity, ..
            } => roots * multiplicity,
        }
    }
}

fn reduce(a: f64, period: f64) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::InvalidArgument(format!("parameter a must be finite, got {a}")));
    }
    let r = a.rem_euclid(period);
    // rem_euclid can round up to the period itself.
    Ok(if r >= period { 0.0 } else { r })
}

fn scaled(rows: Vec<Vec<Complex64>>) -> ComplexMatrix {
    let d = rows.len();
    let s = 1.0 / (d as f64).sqrt();
    DMatrix::from_fn(d, d, |x, y| rows[x][y] * s)
}

/// The one-parameter family of `4×4` complex Hadamard matrices, `a ∈ [0, π)`.
/// Any real `a` is accepted and reduced modulo `π`.
pub fn family_f4(a: f64) -> ComplexMatrix {
    let a = a.rem_euclid(PI);
    let p = I * Complex64::from_polar(1.0, a);
    scaled(vec![
        vec![ONE, ONE, ONE, ONE],
        vec![ONE, p, -ONE, -p],
        vec![ONE, -ONE, ONE, -ONE],
        vec![ONE, -p, -ONE, p],
    ])
}

fn d6_m1(a: f64) -> ComplexMatrix {
    let p = I * Complex64::from_polar(1.0, a);
    let q = I * Complex64::from_polar(1.0, -a);
    scaled(vec![
        vec![ONE, ONE, ONE, ONE, ONE, ONE],
        vec![ONE, -ONE, I, -I, -I, I],
        vec![ONE, I, -ONE, p, -p, -I],
        vec![ONE, -I, q, -ONE, I, -q],
        vec![ONE, -I, -q, I, -ONE, q],
        vec![ONE, I, -I, -p, p, -ONE],
    ])
}

fn d6_m2(sign: Sign) -> ComplexMatrix {
    let w = Complex64::new(
        (1.0 - 3f64.sqrt()) / 2.0,
        sign.factor() * 12f64.powf(0.25) / 2.0,
    );
    let wb = w.conj();
    let (w2, w3) = (w * w, w * w * w);
    let (wb2, wb3) = (wb * wb, wb * wb * wb);
    scaled(vec![
        vec![ONE, ONE, ONE, ONE, ONE, ONE],
        vec![ONE, -ONE, -w, -w2, w2, w],
        vec![ONE, -wb, ONE, w2, -w3, w2],
        vec![ONE, -wb2, wb2, -ONE, w2, -w2],
        vec![ONE, wb2, -wb3, wb2, ONE, -w],
        vec![ONE, wb, wb2, -wb2, -wb, -ONE],
    ])
}

fn d6_m3() -> ComplexMatrix {
    let w = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
    let w2 = w.conj();
    scaled(vec![
        vec![ONE, ONE, ONE, ONE, ONE, ONE],
        vec![ONE, ONE, w, w, w2, w2],
        vec![ONE, w, ONE, w2, w2, w],
        vec![ONE, w, w2, ONE, w, w2],
        vec![ONE, w2, w2, w, ONE, w],
        vec![ONE, w2, w, w2, w, ONE],
    ])
}

fn d7_m1() -> ComplexMatrix {
    // Powers of ω = exp(iπ/3).
    const EXPONENTS: [[usize; 7]; 7] = [
        [0, 0, 0, 0, 0, 0, 0],
        [0, 1, 4, 5, 3, 3, 1],
        [0, 4, 1, 3, 5, 3, 1],
        [0, 5, 3, 1, 4, 1, 3],
        [0, 3, 5, 4, 1, 1, 3],
        [0, 3, 3, 1, 1, 4, 5],
        [0, 1, 1, 3, 3, 5, 4],
    ];
    let h = 3f64.sqrt() / 2.0;
    let powers = [
        c(1.0),
        Complex64::new(0.5, h),
        Complex64::new(-0.5, h),
        c(-1.0),
        Complex64::new(-0.5, -h),
        Complex64::new(0.5, -h),
    ];
    scaled(
        EXPONENTS
            .iter()
            .map(|row| row.iter().map(|&k| powers[k]).collect())
            .collect(),
    )
}

fn d7_m2(sign: Sign) -> ComplexMatrix {
    let w = Complex64::new(-0.75, sign.factor() * 7f64.sqrt() / 4.0);
    let wb = w.conj();
    let w2 = w * w;
    scaled(vec![
        vec![ONE, ONE, ONE, ONE, ONE, ONE, ONE],
        vec![ONE, w, ONE, wb, w, wb, ONE],
        vec![ONE, w, w, wb, ONE, ONE, wb],
        vec![ONE, w2, w2, w, w, ONE, w],
        vec![ONE, ONE, w, ONE, w, wb, wb],
        vec![ONE, w2, w, w, w2, w, ONE],
        vec![ONE, w, w2, ONE, w2, w, w],
    ])
}

/// Catalog matrix by textual id. `params` holds `a` for the parametric
/// families and an optional sign (`+1` or `−1`, default `+1`) for `d6-m2`
/// and `d7-m2`.
pub fn table1_matrix(id: &str, params: &[f64]) -> Result<ComplexMatrix> {
    Ok(table1_entry(id, params)?.matrix())
}

/// Parses an id and parameter list into a [`Table1Entry`].
pub fn table1_entry(id: &str, params: &[f64]) -> Result<Table1Entry> {
    let id: Table1Id = id.parse()?;
    let too_many = |n: usize| {
        Error::InvalidArgument(format!("{id} takes at most {n} parameter(s), got {}", params.len()))
    };
    if id.is_parametric() {
        match params {
            [a] => Table1Entry::new(id, Some(*a), Sign::Plus),
            [] => Err(Error::InvalidArgument(format!("{id} requires the parameter a"))),
            _ => Err(too_many(1)),
        }
    } else if id.has_sign_branch() {
        let sign = match params {
            [] => Sign::Plus,
            [s] if *s == 1.0 => Sign::Plus,
            [s] if *s == -1.0 => Sign::Minus,
            [s] => {
                return Err(Error::InvalidArgument(format!(
                    "sign parameter must be +1 or -1, got {s}"
                )))
            }
            _ => return Err(too_many(1)),
        };
        Table1Entry::new(id, None, sign)
    } else if params.is_empty() {
        Table1Entry::new(id, None, Sign::Plus)
    } else {
        Err(too_many(0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mub_catalog::validate_hadamard;
    use crate::numerics::Tolerances;

    #[test]
    fn f4_entries() {
        let h = family_f4(0.0);
        assert!((h[(1, 1)] * 2.0 - I).norm() < 1e-15);
        let h = family_f4(PI / 2.0);
        assert!((h[(1, 1)] * 2.0 + ONE).norm() < 1e-15);
    }

    #[test]
    fn f4_constant_rows() {
        let h0 = family_f4(0.3);
        let h1 = family_f4(2.9);
        for y in 0..4 {
            assert_eq!(h0[(0, y)], h1[(0, y)]);
            assert_eq!(h0[(2, y)], h1[(2, y)]);
        }
    }

    #[test]
    fn f4_parameter_reduction() {
        let h = family_f4(0.4);
        let h2 = family_f4(0.4 + PI);
        assert!(crate::numerics::max_abs_diff(&h, &h2) < 1e-14);
        let e = Table1Entry::new(Table1Id::D4F4, Some(-0.5), Sign::Plus).unwrap();
        assert!((e.a.unwrap() - (PI - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn every_catalog_matrix_is_hadamard() {
        let tol = Tolerances::default();
        let mut cases = vec![];
        for a in [0.0, 0.5, 1.0, 2.5, 3.1] {
            cases.push(table1_matrix("d4-f4", &[a]).unwrap());
        }
        for a in [0.0, 0.7, 2.0, 4.5, 6.2] {
            cases.push(table1_matrix("d6-m1", &[a]).unwrap());
        }
        for s in [1.0, -1.0] {
            cases.push(table1_matrix("d6-m2", &[s]).unwrap());
            cases.push(table1_matrix("d7-m2", &[s]).unwrap());
        }
        cases.push(table1_matrix("d6-m3", &[]).unwrap());
        cases.push(table1_matrix("d7-m1", &[]).unwrap());
        for h in &cases {
            let r = validate_hadamard(h, &tol);
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn omega_has_unit_modulus() {
        // d7-m2: (9 + 7)/16 = 1; d6-m2: (4 − 2√3 + 2√3)/4 = 1.
        let w7 = Complex64::new(-0.75, 7f64.sqrt() / 4.0);
        assert!((w7.norm_sqr() - 1.0).abs() < 1e-15);
        let w6 = Complex64::new((1.0 - 3f64.sqrt()) / 2.0, 12f64.powf(0.25) / 2.0);
        assert!((w6.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn d6_m3_entries_are_cube_roots() {
        let h = table1_matrix("d6-m3", &[]).unwrap();
        for z in h.iter() {
            let u = z * 6f64.sqrt();
            assert!(((u * u * u) - ONE).norm() < 1e-14);
        }
    }

    #[test]
    fn id_and_parameter_errors() {
        assert!(matches!(table1_matrix("d5-x", &[]), Err(Error::NotFound(_))));
        assert!(matches!(table1_matrix("d4-f4", &[]), Err(Error::InvalidArgument(_))));
        assert!(matches!(table1_matrix("d6-m3", &[1.0]), Err(Error::InvalidArgument(_))));
        assert!(matches!(table1_matrix("d7-m2", &[0.5]), Err(Error::InvalidArgument(_))));
        assert!(table1_matrix("d6-m2", &[]).is_ok());
    }

    #[test]
    fn reference_multiplicities_fill_the_spectrum() {
        for id in Table1Id::ALL {
            let a = id.is_parametric().then_some(1.0);
            let e = Table1Entry::new(id, a, Sign::Plus).unwrap();
            let total: usize = e.reference_spectrum().iter().map(|c| c.total_multiplicity()).sum();
            assert_eq!(total, id.dimension().pow(2), "{id}");
        }
    }
}
