//! Relation matrices, Smith normal form and abelian invariants.
//!
//! Elimination first runs in checked `i64` arithmetic; on overflow it restarts
//! in `BigInt`. Every result is re-verified by multiplying `U·A·V`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::presentation::Presentation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SnfError {
    #[error("integer overflow during elimination")]
    Overflow,
}

/// Exact ring operations used by the elimination. `None` signals overflow.
pub trait Scalar: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn abs_lt(&self, other: &Self) -> bool;
    fn checked_neg(&self) -> Option<Self>;
    fn checked_add(&self, other: &Self) -> Option<Self>;
    fn checked_mul(&self, other: &Self) -> Option<Self>;
    /// Truncating quotient.
    fn checked_quot(&self, other: &Self) -> Option<Self>;
    fn divides(&self, other: &Self) -> bool;
    fn to_big(&self) -> BigInt;

    fn checked_sub_mul(&self, q: &Self, b: &Self) -> Option<Self> {
        self.checked_add(&q.checked_mul(b)?.checked_neg()?)
    }
}

impl Scalar for i64 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_negative(&self) -> bool {
        *self < 0
    }
    fn abs_lt(&self, other: &Self) -> bool {
        self.unsigned_abs() < other.unsigned_abs()
    }
    fn checked_neg(&self) -> Option<Self> {
        i64::checked_neg(*self)
    }
    fn checked_add(&self, other: &Self) -> Option<Self> {
        i64::checked_add(*self, *other)
    }
    fn checked_mul(&self, other: &Self) -> Option<Self> {
        i64::checked_mul(*self, *other)
    }
    fn checked_quot(&self, other: &Self) -> Option<Self> {
        i64::checked_div(*self, *other)
    }
    fn divides(&self, other: &Self) -> bool {
        if *self == 0 {
            *other == 0
        } else {
            other.checked_rem(*self).is_none_or(|r| r == 0)
        }
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Scalar for BigInt {
    fn zero() -> Self {
        BigInt::ZERO
    }
    fn one() -> Self {
        BigInt::from(1)
    }
    fn is_zero(&self) -> bool {
        self.sign() == num_bigint::Sign::NoSign
    }
    fn is_negative(&self) -> bool {
        self.sign() == num_bigint::Sign::Minus
    }
    fn abs_lt(&self, other: &Self) -> bool {
        self.magnitude() < other.magnitude()
    }
    fn checked_neg(&self) -> Option<Self> {
        Some(-self)
    }
    fn checked_add(&self, other: &Self) -> Option<Self> {
        Some(self + other)
    }
    fn checked_mul(&self, other: &Self) -> Option<Self> {
        Some(self * other)
    }
    fn checked_quot(&self, other: &Self) -> Option<Self> {
        Some(self / other)
    }
    fn divides(&self, other: &Self) -> bool {
        if Scalar::is_zero(self) {
            Scalar::is_zero(other)
        } else {
            Scalar::is_zero(&(other % self))
        }
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type IntMatrix = Matrix<i64>;
pub type BigMatrix = Matrix<BigInt>;

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>, cols: usize) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        let count = rows.len();
        for row in rows {
            assert_eq!(row.len(), cols, "ragged matrix row");
            data.extend(row);
        }
        Self {
            rows: count,
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: T) {
        self.data[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_big(&self) -> BigMatrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(Scalar::to_big).collect(),
        }
    }

    pub fn checked_mul(&self, other: &Self) -> Option<Self> {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let sum = out.get(i, j).checked_add(&a.checked_mul(b)?)?;
                    out.set(i, j, sum);
                }
            }
        }
        Some(out)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    /// row[target] -= q * row[source]
    fn row_sub(&mut self, target: usize, source: usize, q: &T) -> Option<()> {
        for c in 0..self.cols {
            let s = self.get(source, c).clone();
            if s.is_zero() {
                continue;
            }
            let v = self.get(target, c).checked_sub_mul(q, &s)?;
            self.set(target, c, v);
        }
        Some(())
    }

    /// col[target] -= q * col[source]
    fn col_sub(&mut self, target: usize, source: usize, q: &T) -> Option<()> {
        for r in 0..self.rows {
            let s = self.get(r, source).clone();
            if s.is_zero() {
                continue;
            }
            let v = self.get(r, target).checked_sub_mul(q, &s)?;
            self.set(r, target, v);
        }
        Some(())
    }

    fn negate_row(&mut self, r: usize) -> Option<()> {
        for c in 0..self.cols {
            let v = self.get(r, c).checked_neg()?;
            self.set(r, c, v);
        }
        Some(())
    }
}

impl BigMatrix {
    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return <BigInt as Scalar>::one();
        }
        let mut m = self.clone();
        let mut sign = <BigInt as Scalar>::one();
        let mut prev = <BigInt as Scalar>::one();
        for k in 0..n {
            if let Some(p) = (k..n).find(|&r| !m.get(r, k).is_zero()) {
                if p != k {
                    m.swap_rows(p, k);
                    sign = -sign;
                }
            } else {
                return <BigInt as Scalar>::zero();
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (m.get(i, j) * m.get(k, k) - m.get(i, k) * m.get(k, j)) / &prev;
                    m.set(i, j, v);
                }
            }
            prev = m.get(k, k).clone();
        }
        sign * m.get(n - 1, n - 1)
    }
}

/// `U·A·V = D` with `U`, `V` unimodular and `D` diagonal with `d1 | d2 | ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub u: BigMatrix,
    pub d: BigMatrix,
    pub v: BigMatrix,
    pub rank: usize,
    /// True when machine integers overflowed and the computation was redone in
    /// arbitrary precision.
    pub escalated: bool,
}

impl SmithForm {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows.min(self.d.cols))
            .map(|i| self.d.get(i, i).clone())
            .collect()
    }

    /// Re-check the defining identities against the input matrix.
    pub fn verify(&self, a: &BigMatrix) -> bool {
        let Some(uav) = self.u.checked_mul(a).and_then(|ua| ua.checked_mul(&self.v)) else {
            return false;
        };
        if uav != self.d {
            return false;
        }
        let diag = self.diagonal();
        for r in 0..self.d.rows {
            for c in 0..self.d.cols {
                if r != c && !self.d.get(r, c).is_zero() {
                    return false;
                }
            }
        }
        let nonzero = diag.iter().take_while(|d| !d.is_zero()).count();
        if nonzero != self.rank || diag[nonzero..].iter().any(|d| !d.is_zero()) {
            return false;
        }
        if diag[..nonzero].iter().any(|d| d.is_negative()) {
            return false;
        }
        diag[..nonzero].windows(2).all(|w| w[0].divides(&w[1]))
    }

    /// Whether basis vector `col` of the column space dies in `Z^cols / rowspace(A)`.
    pub fn kills_column(&self, col: usize) -> bool {
        let row = self.v.row(col);
        row.iter().enumerate().all(|(j, x)| {
            if j < self.rank {
                self.d.get(j, j).divides(x)
            } else {
                x.is_zero()
            }
        })
    }
}

/// `(U, D, V, rank)`.
type Snf<T> = (Matrix<T>, Matrix<T>, Matrix<T>, usize);

fn snf_in<T: Scalar>(a: &Matrix<T>) -> Option<Snf<T>> {
    let (m, n) = (a.rows, a.cols);
    let mut d = a.clone();
    let mut u = Matrix::<T>::identity(m);
    let mut v = Matrix::<T>::identity(n);
    let mut rank = 0;
    for t in 0..m.min(n) {
        loop {
            let mut pivot: Option<(usize, usize)> = None;
            for r in t..m {
                for c in t..n {
                    let x = d.get(r, c);
                    if x.is_zero() {
                        continue;
                    }
                    if pivot.is_none_or(|(pr, pc)| x.abs_lt(d.get(pr, pc))) {
                        pivot = Some((r, c));
                    }
                }
            }
            let Some((pr, pc)) = pivot else {
                return Some((u, d, v, rank));
            };
            d.swap_rows(t, pr);
            u.swap_rows(t, pr);
            d.swap_cols(t, pc);
            v.swap_cols(t, pc);
            let p = d.get(t, t).clone();
            let mut clean = true;
            for r in t + 1..m {
                if d.get(r, t).is_zero() {
                    continue;
                }
                let q = d.get(r, t).checked_quot(&p)?;
                d.row_sub(r, t, &q)?;
                u.row_sub(r, t, &q)?;
                clean &= d.get(r, t).is_zero();
            }
            for c in t + 1..n {
                if d.get(t, c).is_zero() {
                    continue;
                }
                let q = d.get(t, c).checked_quot(&p)?;
                d.col_sub(c, t, &q)?;
                v.col_sub(c, t, &q)?;
                clean &= d.get(t, c).is_zero();
            }
            if !clean {
                continue;
            }
            // Enforce the divisibility chain: fold an offending row into row t.
            let offending = (t + 1..m).find(|&r| (t + 1..n).any(|c| !p.divides(d.get(r, c))));
            if let Some(r) = offending {
                let minus_one = T::one().checked_neg()?;
                d.row_sub(t, r, &minus_one)?;
                u.row_sub(t, r, &minus_one)?;
                continue;
            }
            break;
        }
        if d.get(t, t).is_negative() {
            d.negate_row(t)?;
            u.negate_row(t)?;
        }
        rank += 1;
    }
    Some((u, d, v, rank))
}

/// Smith normal form in checked machine arithmetic only.
pub fn try_smith_normal_form(a: &IntMatrix) -> Result<SmithForm, SnfError> {
    let (u, d, v, rank) = snf_in(a).ok_or(SnfError::Overflow)?;
    let product = u.checked_mul(a).and_then(|ua| ua.checked_mul(&v));
    if product.as_ref() != Some(&d) {
        return Err(SnfError::Overflow);
    }
    Ok(SmithForm {
        u: u.to_big(),
        d: d.to_big(),
        v: v.to_big(),
        rank,
        escalated: false,
    })
}

pub fn smith_normal_form(a: &IntMatrix) -> SmithForm {
    match try_smith_normal_form(a) {
        Ok(form) => {
            debug_assert!(form.verify(&a.to_big()));
            form
        }
        Err(SnfError::Overflow) => smith_normal_form_big(&a.to_big()),
    }
}

pub fn smith_normal_form_big(a: &BigMatrix) -> SmithForm {
    let (u, d, v, rank) = snf_in(a).expect("arbitrary precision cannot overflow");
    let form = SmithForm {
        u,
        d,
        v,
        rank,
        escalated: true,
    };
    assert!(form.verify(a), "Smith normal form failed verification");
    form
}

/// Free rank plus torsion coefficients `d1 | d2 | ...`, each at least 2.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbelianInvariants {
    pub free_rank: usize,
    pub torsion: Vec<BigInt>,
}

impl AbelianInvariants {
    pub fn new(free_rank: usize, torsion: &[i64]) -> Self {
        Self {
            free_rank,
            torsion: torsion.iter().map(|&t| BigInt::from(t)).collect(),
        }
    }

    pub fn trivial() -> Self {
        Self::new(0, &[])
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    pub fn from_smith(form: &SmithForm, columns: usize) -> Self {
        let torsion = form
            .diagonal()
            .into_iter()
            .take(form.rank)
            .filter(|d| *d != BigInt::from(1))
            .collect();
        Self {
            free_rank: columns - form.rank,
            torsion,
        }
    }

    pub fn torsion_u64(&self) -> Vec<u64> {
        self.torsion.iter().map(|t| t.to_u64().unwrap_or(u64::MAX)).collect()
    }
}

impl fmt::Display for AbelianInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z^{}", self.free_rank)?;
        for t in &self.torsion {
            write!(f, " x Z/{t}")?;
        }
        Ok(())
    }
}

/// One row per relator, one column per generator, entries are exponent sums.
pub fn relation_matrix(p: &Presentation) -> IntMatrix {
    let gens = p.generators();
    let rows = p
        .relator_words()
        .map(|w| gens.iter().map(|&g| w.exponent_sum(g)).collect())
        .collect();
    Matrix::from_rows(rows, gens.len())
}

/// The abelianization of a presentation together with its Smith form, so
/// individual generator images can be queried.
#[derive(Debug, Clone)]
pub struct Abelianization {
    pub invariants: AbelianInvariants,
    pub smith: SmithForm,
}

impl Abelianization {
    pub fn of(p: &Presentation) -> Self {
        let matrix = relation_matrix(p);
        let smith = smith_normal_form(&matrix);
        let invariants = AbelianInvariants::from_smith(&smith, matrix.cols());
        Self { invariants, smith }
    }

    /// Whether generator number `index` maps to zero in the abelianization.
    pub fn kills_generator(&self, index: usize) -> bool {
        self.smith.kills_column(index)
    }
}

pub fn abelian_invariants(p: &Presentation) -> AbelianInvariants {
    Abelianization::of(p).invariants
}

pub fn is_perfect(p: &Presentation) -> bool {
    abelian_invariants(p).is_trivial()
}

fn big_gcd(mut a: BigInt, mut b: BigInt) -> BigInt {
    while b != BigInt::ZERO {
        let r = &a % &b;
        a = b;
        b = r;
    }
    if a < BigInt::ZERO {
        -a
    } else {
        a
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Invariants from determinantal divisors: `d_k` is the gcd of all `k x k`
/// minors and the invariant factors are `d_k / d_(k-1)`. Independent of the
/// elimination code but exponential in the matrix size; meant as a
/// cross-check on small matrices.
pub fn invariants_by_minors(a: &IntMatrix) -> AbelianInvariants {
    let big = a.to_big();
    let mut divisors = vec![BigInt::from(1)];
    for k in 1..=a.rows().min(a.cols()) {
        let mut d = BigInt::ZERO;
        for rows in subsets(a.rows(), k) {
            for cols in subsets(a.cols(), k) {
                let minor = Matrix::from_rows(
                    rows.iter()
                        .map(|&r| cols.iter().map(|&c| big.get(r, c).clone()).collect())
                        .collect(),
                    k,
                );
                d = big_gcd(d, minor.determinant());
            }
        }
        if d == BigInt::ZERO {
            break;
        }
        divisors.push(d);
    }
    let rank = divisors.len() - 1;
    let torsion = divisors
        .windows(2)
        .map(|w| &w[1] / &w[0])
        .filter(|f| *f != BigInt::from(1))
        .collect();
    AbelianInvariants {
        free_rank: a.cols() - rank,
        torsion,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::{catalog, Family, FamilySpec};

    fn diag(rows: Vec<Vec<i64>>) -> Vec<i64> {
        let cols = rows.first().map_or(0, Vec::len);
        let form = smith_normal_form(&Matrix::from_rows(rows, cols));
        form.diagonal().iter().map(|d| d.to_i64().unwrap()).collect()
    }

    #[test]
    fn small_smith_forms() {
        assert_eq!(diag(vec![vec![2, 0], vec![0, 0]]), [2, 0]);
        assert_eq!(diag(vec![vec![1, 1], vec![1, -1]]), [1, 2]);
        assert_eq!(diag(vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]), [1, 1, 1]);
        assert_eq!(diag(vec![vec![2, 0], vec![0, 3]]), [1, 6]);
    }

    #[test]
    fn overflow_escalates_to_big_integers() {
        let big = i64::MAX / 2;
        let a = Matrix::from_rows(vec![vec![big, big - 1], vec![big - 1, big - 3]], 2);
        assert_eq!(try_smith_normal_form(&a), Err(SnfError::Overflow));
        let form = smith_normal_form(&a);
        assert!(form.escalated);
        assert!(form.verify(&a.to_big()));
    }

    #[test]
    fn invariant_strings() {
        assert_eq!(AbelianInvariants::new(1, &[2]).to_string(), "Z^1 x Z/2");
        assert_eq!(AbelianInvariants::trivial().to_string(), "Z^0");
        assert_eq!(AbelianInvariants::new(1, &[3, 3]).to_string(), "Z^1 x Z/3 x Z/3");
    }

    #[test]
    fn catalog_abelianizations() {
        for n in 2..=6 {
            let wb = catalog(FamilySpec::new(Family::WeldedBraid, n)).unwrap();
            assert_eq!(abelian_invariants(&wb), AbelianInvariants::new(1, &[2]));
        }
        let fvb3 = catalog(FamilySpec::new(Family::Fvb3Commutator, 3)).unwrap();
        assert_eq!(abelian_invariants(&fvb3), AbelianInvariants::new(1, &[3, 3]));
        let fwb3 = catalog(FamilySpec::new(Family::Fwb3Commutator, 3)).unwrap();
        assert_eq!(abelian_invariants(&fwb3), AbelianInvariants::new(1, &[3]));
    }

    #[test]
    fn relation_matrix_shapes() {
        let p = Presentation::parse("gens: a\nrels: a^3").unwrap();
        assert_eq!(relation_matrix(&p), Matrix::from_rows(vec![vec![3]], 1));
        let empty = Presentation::parse("gens: a b").unwrap();
        let m = relation_matrix(&empty);
        assert_eq!((m.rows(), m.cols()), (0, 2));
        assert_eq!(abelian_invariants(&empty), AbelianInvariants::new(2, &[]));
        assert!(is_perfect(&Presentation::trivial()));
    }

    #[test]
    fn killed_generators() {
        let p = Presentation::parse("gens: a b c\nrels: a, b^2").unwrap();
        let ab = Abelianization::of(&p);
        assert!(ab.kills_generator(0));
        assert!(!ab.kills_generator(1));
        assert!(!ab.kills_generator(2));
    }

    #[test]
    fn minors_oracle_agrees_on_explicit_presentations() {
        for (fam, expected) in [
            (Family::Fvb3Commutator, AbelianInvariants::new(1, &[3, 3])),
            (Family::Fwb3Commutator, AbelianInvariants::new(1, &[3])),
        ] {
            let p = catalog(FamilySpec::new(fam, 3)).unwrap();
            assert_eq!(invariants_by_minors(&relation_matrix(&p)), expected);
        }
        let m = Matrix::from_rows(vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]], 3);
        assert_eq!(invariants_by_minors(&m), AbelianInvariants::new(0, &[2, 6, 12]));
        assert_eq!(
            AbelianInvariants::from_smith(&smith_normal_form(&m), 3),
            invariants_by_minors(&m)
        );
    }
}
