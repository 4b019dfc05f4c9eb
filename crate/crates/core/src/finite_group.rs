//! Finite abelian groups `Z_{n_1} × … × Z_{n_k}` and their canonical
//! non-degenerate symmetric bicharacter
//! `⟨x, y⟩ = exp(2πi Σ_j x_j y_j / n_j)`.
//!
//! Elements are enumerated lexicographically over coordinate tuples, last
//! coordinate fastest: in `Z_2 × Z_2` the order is `(0,0), (0,1), (1,0), (1,1)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_integer::Integer;

use crate::error::{Error, Result};
use crate::report::ValidationReport;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AbelianGroup {
    factors: Vec<usize>,
    order: usize,
    /// lcm of the factors; phases are multiples of `2π / phase_denominator`.
    phase_denominator: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    coords: Vec<usize>,
}

impl GroupElement {
    pub fn coords(&self) -> &[usize] {
        &self.coords
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Builds `Z_{n_1} × … × Z_{n_k}`.
pub fn make_group(factors: &[i64]) -> Result<AbelianGroup> {
    if factors.is_empty() {
        return Err(Error::InvalidArgument("group needs at least one factor".into()));
    }
    let mut fs = Vec::with_capacity(factors.len());
    for &n in factors {
        if n <= 0 {
            return Err(Error::InvalidArgument(format!(
                "cyclic factor orders must be positive, got {n}"
            )));
        }
        fs.push(n as usize);
    }
    let order = fs.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n));
    let Some(order) = order else {
        return Err(Error::InvalidArgument("group order overflows".into()));
    };
    let phase_denominator = fs.iter().fold(1usize, |acc, &n| acc.lcm(&n));
    Ok(AbelianGroup {
        factors: fs,
        order,
        phase_denominator,
    })
}

impl FromStr for AbelianGroup {
    type Err = Error;

    /// Parses a comma-separated factor list such as `"2,4"`.
    fn from_str(s: &str) -> Result<Self> {
        let factors = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<i64>()
                    .map_err(|e| Error::Parse(format!("bad group factor {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        make_group(&factors)
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, "x")?;
            }
            write!(f, "Z{n}")?;
        }
        Ok(())
    }
}

impl AbelianGroup {
    pub fn cyclic(n: usize) -> Result<Self> {
        make_group(&[n as i64])
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    /// lcm of the factors.
    pub fn phase_denominator(&self) -> usize {
        self.phase_denominator
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            coords: vec![0; self.factors.len()],
        }
    }

    /// Element with the given coordinates, reduced modulo each factor.
    pub fn element(&self, coords: &[i64]) -> Result<GroupElement> {
        if coords.len() != self.factors.len() {
            return Err(Error::InvalidArgument(format!(
                "element has {} coordinates, group has {} factors",
                coords.len(),
                self.factors.len()
            )));
        }
        Ok(GroupElement {
            coords: coords
                .iter()
                .zip(&self.factors)
                .map(|(&c, &n)| c.rem_euclid(n as i64) as usize)
                .collect(),
        })
    }

    /// Element at position `index` of the lexicographic enumeration.
    pub fn element_at(&self, mut index: usize) -> GroupElement {
        assert!(index < self.order, "element index {index} out of range");
        let mut coords = vec![0; self.factors.len()];
        for (c, &n) in coords.iter_mut().zip(&self.factors).rev() {
            *c = index % n;
            index /= n;
        }
        GroupElement { coords }
    }

    /// Position of `x` in the lexicographic enumeration.
    pub fn index_of(&self, x: &GroupElement) -> usize {
        x.coords
            .iter()
            .zip(&self.factors)
            .fold(0, |acc, (&c, &n)| acc * n + c)
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order).map(|i| self.element_at(i))
    }

    fn check(&self, x: &GroupElement) -> Result<()> {
        if x.coords.len() != self.factors.len() {
            return Err(Error::InvalidArgument(format!(
                "element {x} has arity {}, group {self} has {}",
                x.coords.len(),
                self.factors.len()
            )));
        }
        if let Some((c, n)) = x.coords.iter().zip(&self.factors).find(|(c, n)| c >= n) {
            return Err(Error::InvalidArgument(format!(
                "coordinate {c} not reduced modulo {n}"
            )));
        }
        Ok(())
    }

    pub fn add(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
        self.check(x)?;
        self.check(y)?;
        Ok(GroupElement {
            coords: x
                .coords
                .iter()
                .zip(&y.coords)
                .zip(&self.factors)
                .map(|((a, b), n)| (a + b) % n)
                .collect(),
        })
    }

    pub fn neg(&self, x: &GroupElement) -> Result<GroupElement> {
        self.check(x)?;
        Ok(GroupElement {
            coords: x
                .coords
                .iter()
                .zip(&self.factors)
                .map(|(a, n)| (n - a) % n)
                .collect(),
        })
    }

    pub fn sub(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
        self.add(x, &self.neg(y)?)
    }

    /// Exact phase numerator `k` with `⟨x, y⟩ = exp(2πi k / L)`, `L` the lcm
    /// of the factors.
    pub fn pairing_phase(&self, x: &GroupElement, y: &GroupElement) -> Result<usize> {
        self.check(x)?;
        self.check(y)?;
        let l = self.phase_denominator;
        let mut k = 0usize;
        for ((&a, &b), &n) in x.coords.iter().zip(&y.coords).zip(&self.factors) {
            k = (k + (a * b % n) * (l / n)) % l;
        }
        Ok(k)
    }

    /// The canonical bicharacter `⟨x, y⟩`.
    pub fn pairing(&self, x: &GroupElement, y: &GroupElement) -> Result<Complex64> {
        let k = self.pairing_phase(x, y)?;
        Ok(root_of_unity(k, self.phase_denominator))
    }

    /// Full `d×d` table of the canonical pairing, in enumeration order.
    pub fn pairing_table(&self) -> Vec<Vec<Complex64>> {
        let elems: Vec<_> = self.elements().collect();
        elems
            .iter()
            .map(|x| {
                elems
                    .iter()
                    .map(|y| self.pairing(x, y).expect("enumerated elements are valid"))
                    .collect()
            })
            .collect()
    }
}

/// `exp(2πi k / n)` with one trigonometric evaluation on the reduced angle.
/// Quarter turns are returned exactly.
pub fn root_of_unity(k: usize, n: usize) -> Complex64 {
    let k = k % n;
    if (4 * k).is_multiple_of(n) {
        return match 4 * k / n {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    // Signed representative in (−n/2, n/2] keeps the angle in [−π, π].
    let signed = if 2 * k > n { k as f64 - n as f64 } else { k as f64 };
    Complex64::from_polar(1.0, 2.0 * PI * signed / n as f64)
}

/// Checks symmetry, biadditivity and non-degeneracy of the canonical
/// pairing by exhaustive enumeration.
pub fn verify_bicharacter(g: &AbelianGroup, tol: f64) -> ValidationReport {
    verify_bicharacter_with(g, |x, y| g.pairing(x, y).expect("valid elements"), tol)
}

/// Same as [`verify_bicharacter`] for an arbitrary map `Ω × Ω → ℂ`.
pub fn verify_bicharacter_with(
    g: &AbelianGroup,
    pairing: impl Fn(&GroupElement, &GroupElement) -> Complex64,
    tol: f64,
) -> ValidationReport {
    let elems: Vec<_> = g.elements().collect();
    let d = elems.len();
    let table: Vec<Vec<Complex64>> = elems
        .iter()
        .map(|x| elems.iter().map(|y| pairing(x, y)).collect())
        .collect();
    let mut report = ValidationReport::new();

    let mut worst = (0.0f64, None);
    for i in 0..d {
        let dev = table[i]
            .iter()
            .map(|z| (z.norm() - 1.0).abs())
            .fold(0.0, f64::max);
        if dev > worst.0 {
            worst = (dev, Some(elems[i].to_string()));
        }
    }
    report.push("unit modulus", worst.0, tol, worst.1);

    let mut worst = (0.0f64, None);
    for i in 0..d {
        for j in 0..d {
            let dev = (table[i][j] - table[j][i]).norm();
            if dev > worst.0 {
                worst = (dev, Some(format!("x={}, y={}", elems[i], elems[j])));
            }
        }
    }
    report.push("symmetry", worst.0, tol, worst.1);

    let mut worst = (0.0f64, None);
    for i1 in 0..d {
        for i2 in 0..d {
            let sum = g.add(&elems[i1], &elems[i2]).expect("valid elements");
            let s = g.index_of(&sum);
            for j in 0..d {
                let dev = (table[s][j] - table[i1][j] * table[i2][j]).norm();
                if dev > worst.0 {
                    worst = (
                        dev,
                        Some(format!("x1={}, x2={}, y={}", elems[i1], elems[i2], elems[j])),
                    );
                }
            }
        }
    }
    report.push("biadditivity", worst.0, tol, worst.1);

    // x ↦ ⟨x,·⟩ injective: distinct rows of the table must differ somewhere.
    let mut collision = None;
    'outer: for i in 0..d {
        for k in i + 1..d {
            let differ = (0..d).any(|j| (table[i][j] - table[k][j]).norm() > tol);
            if !differ {
                collision = Some(format!("x={} and x={} give the same character", elems[i], elems[k]));
                break 'outer;
            }
        }
    }
    report.push_verdict("non-degeneracy", collision.is_none(), collision);
    report
}

/// Verifies `Σ_z ⟨x − y, z⟩ = d·δ_{x,y}` for all `x, y`.
pub fn orthogonality_check(g: &AbelianGroup, tol: f64) -> ValidationReport {
    let elems: Vec<_> = g.elements().collect();
    let d = g.order() as f64;
    let mut worst = (0.0f64, None);
    for x in &elems {
        for y in &elems {
            let w = g.sub(x, y).expect("valid elements");
            let s: Complex64 = elems
                .iter()
                .map(|z| g.pairing(&w, z).expect("valid elements"))
                .sum();
            let expected = if x == y { d } else { 0.0 };
            let dev = (s - Complex64::new(expected, 0.0)).norm();
            if dev > worst.0 {
                worst = (dev, Some(format!("x={x}, y={y}")));
            }
        }
    }
    let mut report = ValidationReport::new();
    report.push("orthogonality", worst.0, tol, worst.1);
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn construction() {
        assert_eq!(make_group(&[5]).unwrap().order(), 5);
        assert_eq!(make_group(&[2, 4]).unwrap().order(), 8);
        let g = make_group(&[2, 2]).unwrap();
        let elems: Vec<Vec<usize>> = g.elements().map(|e| e.coords().to_vec()).collect();
        assert_eq!(elems, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(make_group(&[]), Err(Error::InvalidArgument(_))));
        assert!(matches!(make_group(&[2, 0]), Err(Error::InvalidArgument(_))));
        assert!(matches!(make_group(&[-3]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn parse_group_spec() {
        let g: AbelianGroup = "2, 4".parse().unwrap();
        assert_eq!(g.factors(), &[2, 4]);
        assert!("2,x".parse::<AbelianGroup>().is_err());
        assert!("".parse::<AbelianGroup>().is_err());
    }

    #[test]
    fn addition() {
        let z5 = make_group(&[5]).unwrap();
        let s = z5.add(&z5.element(&[3]).unwrap(), &z5.element(&[4]).unwrap()).unwrap();
        assert_eq!(s.coords(), &[2]);

        let k4 = make_group(&[2, 2]).unwrap();
        let s = k4
            .add(&k4.element(&[1, 0]).unwrap(), &k4.element(&[1, 1]).unwrap())
            .unwrap();
        assert_eq!(s.coords(), &[0, 1]);

        let x = k4.element(&[1, 1]).unwrap();
        assert_eq!(k4.add(&x, &k4.identity()).unwrap(), x);
    }

    #[test]
    fn addition_arity_mismatch() {
        let g = make_group(&[2, 2]).unwrap();
        let bad = GroupElement { coords: vec![1] };
        assert!(g.add(&bad, &g.identity()).is_err());
    }

    #[test]
    fn pairing_examples() {
        let z3 = make_group(&[3]).unwrap();
        let one = z3.element(&[1]).unwrap();
        let p = z3.pairing(&one, &one).unwrap();
        let expected = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        assert_abs_diff_eq!((p - expected).norm(), 0.0, epsilon = 1e-15);

        let z2 = make_group(&[2]).unwrap();
        let one = z2.element(&[1]).unwrap();
        assert_eq!(z2.pairing(&one, &one).unwrap(), Complex64::new(-1.0, 0.0));

        let g = make_group(&[2, 4]).unwrap();
        for y in g.elements() {
            assert_eq!(g.pairing(&g.identity(), &y).unwrap(), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn canonical_pairing_is_a_bicharacter() {
        let r = verify_bicharacter(&make_group(&[5]).unwrap(), 1e-12);
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn klein_group_pairing_takes_signs_only() {
        let g = make_group(&[2, 2]).unwrap();
        assert!(verify_bicharacter(&g, 1e-12).passed());
        for row in g.pairing_table() {
            for z in row {
                assert_eq!(z.im, 0.0);
                assert!(z.re == 1.0 || z.re == -1.0);
            }
        }
    }

    #[test]
    fn constant_pairing_is_degenerate() {
        let g = make_group(&[2]).unwrap();
        let r = verify_bicharacter_with(&g, |_, _| Complex64::new(1.0, 0.0), 1e-12);
        assert!(!r.passed());
        assert!(!r.get("non-degeneracy").unwrap().passed);
        assert!(r.get("symmetry").unwrap().passed);
        assert!(r.get("biadditivity").unwrap().passed);
    }

    #[test]
    fn orthogonality_examples() {
        let z3 = make_group(&[3]).unwrap();
        let one = z3.element(&[1]).unwrap();
        let diag: Complex64 = z3.elements().map(|z| z3.pairing(&z3.identity(), &z).unwrap()).sum();
        assert_eq!(diag, Complex64::new(3.0, 0.0));
        let off: Complex64 = z3.elements().map(|z| z3.pairing(&one, &z).unwrap()).sum();
        assert!(off.norm() < 1e-12);

        assert!(orthogonality_check(&z3, 1e-12).passed());
        assert!(orthogonality_check(&make_group(&[2, 4]).unwrap(), 1e-12).passed());
    }

    #[test]
    fn enumeration_round_trip() {
        let g = make_group(&[2, 3, 4]).unwrap();
        for (i, x) in g.elements().enumerate() {
            assert_eq!(g.index_of(&x), i);
        }
    }

    fn small_group() -> impl Strategy<Value = AbelianGroup> {
        prop::collection::vec(1i64..=4, 1..=3)
            .prop_filter("order at most 16", |f| f.iter().product::<i64>() <= 16)
            .prop_map(|f| make_group(&f).unwrap())
    }

    proptest! {
        #[test]
        fn pairing_invariants(g in small_group()) {
            let elems: Vec<_> = g.elements().collect();
            let d = elems.len() as f64;
            for x in &elems {
                let mut sum = Complex64::new(0.0, 0.0);
                for y in &elems {
                    let p = g.pairing(x, y).unwrap();
                    prop_assert!((p.norm() - 1.0).abs() <= 1e-14);
                    prop_assert!((p - g.pairing(y, x).unwrap()).norm() <= 1e-14);
                    sum += p;
                    for x2 in &elems {
                        let lhs = g.pairing(&g.add(x, x2).unwrap(), y).unwrap();
                        let rhs = p * g.pairing(x2, y).unwrap();
                        prop_assert!((lhs - rhs).norm() <= 1e-12);
                    }
                }
                if *x == g.identity() {
                    prop_assert!((sum - Complex64::new(d, 0.0)).norm() <= 1e-12);
                } else {
                    prop_assert!(sum.norm() <= 1e-10 * d);
                }
            }
        }
    }
}
