//! Dense exact matrices and the three operations everything else is built
//! on: rank, right-kernel bases, and the full vector of maximal minors.
//!
//! Elimination is fraction-free (single-step Bareiss) with partial pivoting
//! by first nonzero entry, so results are deterministic and exact over the
//! rationals, prime fields, and polynomial entries alike. Maximal minors are
//! computed by progressive expansion along rows with all subminors shared,
//! never as independent determinant calls; over the rationals an i128 fast
//! path is used whenever a Hadamard bound certifies that no intermediate can
//! overflow.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::combin::{binom, for_each_combination};
use crate::error::{Error, Result};
use crate::qpoly::QPoly;
use crate::scalar::{inv_mod, mul_mod, FieldKind, FpElem, Scalar};

/// Hard cap on the number of simultaneously stored subminors; keeps the
/// progressive expansion within desk-scale memory.
const MAX_LEVEL_ENTRIES: u64 = 6_000_000;

// ---------------------------------------------------------------------------
// ring abstraction for the generic elimination / expansion engines
// ---------------------------------------------------------------------------

trait Ring {
    type Elem: Clone + std::fmt::Debug;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// Division known to be exact (Bareiss invariant); panics otherwise.
    fn exact_div(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
}

/// Fields additionally support true division, used by the RREF kernel path.
trait FieldRing: Ring {
    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
}

struct ZRing;

impl Ring for ZRing {
    type Elem = BigInt;
    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::one()
    }
    fn is_zero(&self, a: &BigInt) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn sub(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a - b
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn neg(&self, a: &BigInt) -> BigInt {
        -a
    }
    fn exact_div(&self, a: &BigInt, b: &BigInt) -> BigInt {
        use num_integer::Integer;
        let (q, r) = a.div_rem(b);
        assert!(r.is_zero(), "fraction-free elimination: inexact division");
        q
    }
}

struct I128Ring;

impl Ring for I128Ring {
    type Elem = i128;
    fn zero(&self) -> i128 {
        0
    }
    fn one(&self) -> i128 {
        1
    }
    fn is_zero(&self, a: &i128) -> bool {
        *a == 0
    }
    fn add(&self, a: &i128, b: &i128) -> i128 {
        a.checked_add(*b).expect("i128 wedge overflow")
    }
    fn sub(&self, a: &i128, b: &i128) -> i128 {
        a.checked_sub(*b).expect("i128 wedge overflow")
    }
    fn mul(&self, a: &i128, b: &i128) -> i128 {
        a.checked_mul(*b).expect("i128 wedge overflow")
    }
    fn neg(&self, a: &i128) -> i128 {
        -a
    }
    fn exact_div(&self, a: &i128, b: &i128) -> i128 {
        assert!(a % b == 0, "fraction-free elimination: inexact division");
        a / b
    }
}

struct FpRing {
    p: u64,
}

impl Ring for FpRing {
    type Elem = u64;
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        (a + b) % self.p
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        (self.p + a - b) % self.p
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        mul_mod(*a, *b, self.p)
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn exact_div(&self, a: &u64, b: &u64) -> u64 {
        mul_mod(
            *a,
            inv_mod(*b, self.p).expect("division by zero mod p"),
            self.p,
        )
    }
}

impl FieldRing for FpRing {
    fn div(&self, a: &u64, b: &u64) -> u64 {
        self.exact_div(a, b)
    }
}

struct QRing;

impl Ring for QRing {
    type Elem = BigRational;
    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn exact_div(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a / b
    }
}

impl FieldRing for QRing {
    fn div(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a / b
    }
}

struct QPolyRing;

impl Ring for QPolyRing {
    type Elem = QPoly;
    fn zero(&self) -> QPoly {
        QPoly::zero()
    }
    fn one(&self) -> QPoly {
        QPoly::constant(BigRational::one())
    }
    fn is_zero(&self, a: &QPoly) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &QPoly, b: &QPoly) -> QPoly {
        a.add(b)
    }
    fn sub(&self, a: &QPoly, b: &QPoly) -> QPoly {
        a.sub(b)
    }
    fn mul(&self, a: &QPoly, b: &QPoly) -> QPoly {
        a.mul(b)
    }
    fn neg(&self, a: &QPoly) -> QPoly {
        a.neg()
    }
    fn exact_div(&self, a: &QPoly, b: &QPoly) -> QPoly {
        a.exact_div(b)
            .expect("fraction-free elimination: inexact division")
    }
}

// ---------------------------------------------------------------------------
// generic engines
// ---------------------------------------------------------------------------

struct Echelon<E> {
    rows: Vec<Vec<E>>,
    rank: usize,
    pivot_cols: Vec<usize>,
    swap_parity_odd: bool,
}

/// Single-step fraction-free (Bareiss) forward elimination. Pivots are chosen
/// as the first row with a nonzero entry in the current column.
#[allow(clippy::needless_range_loop)]
fn bareiss_echelon<R: Ring>(ring: &R, mut rows: Vec<Vec<R::Elem>>) -> Echelon<R::Elem> {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    let mut pivot_cols = Vec::new();
    let mut prev_pivot = ring.one();
    let mut swap_parity_odd = false;
    let mut pr = 0usize; // current pivot row
    for pc in 0..n {
        if pr >= m {
            break;
        }
        let Some(found) = (pr..m).find(|&i| !ring.is_zero(&rows[i][pc])) else {
            continue;
        };
        if found != pr {
            rows.swap(found, pr);
            swap_parity_odd = !swap_parity_odd;
        }
        let pivot = rows[pr][pc].clone();
        for i in pr + 1..m {
            if ring.is_zero(&rows[i][pc]) {
                // still must rescale the row to keep the Bareiss invariant
                for j in pc + 1..n {
                    if !ring.is_zero(&rows[i][j]) {
                        let num = ring.mul(&pivot, &rows[i][j]);
                        rows[i][j] = ring.exact_div(&num, &prev_pivot);
                    }
                }
                continue;
            }
            let factor = rows[i][pc].clone();
            for j in pc + 1..n {
                let a = ring.mul(&pivot, &rows[i][j]);
                let b = ring.mul(&factor, &rows[pr][j]);
                let num = ring.sub(&a, &b);
                rows[i][j] = if ring.is_zero(&num) {
                    ring.zero()
                } else {
                    ring.exact_div(&num, &prev_pivot)
                };
            }
            rows[i][pc] = ring.zero();
        }
        prev_pivot = pivot;
        pivot_cols.push(pc);
        pr += 1;
    }
    Echelon {
        rows,
        rank: pivot_cols.len(),
        pivot_cols,
        swap_parity_odd,
    }
}

fn bareiss_rank<R: Ring>(ring: &R, rows: Vec<Vec<R::Elem>>) -> usize {
    bareiss_echelon(ring, rows).rank
}

/// Determinant of a square matrix: sign times the last Bareiss pivot.
fn bareiss_det<R: Ring>(ring: &R, rows: Vec<Vec<R::Elem>>) -> R::Elem {
    let n = rows.len();
    if n == 0 {
        return ring.one();
    }
    let ech = bareiss_echelon(ring, rows);
    if ech.rank < n {
        return ring.zero();
    }
    let last = ech.rows[n - 1][ech.pivot_cols[n - 1]].clone();
    if ech.swap_parity_odd {
        ring.neg(&last)
    } else {
        last
    }
}

/// Reduced row echelon form over a field; returns pivot columns and the
/// canonical kernel basis (one vector per free column, in column order, with
/// entry 1 at the free coordinate).
#[allow(clippy::needless_range_loop)]
fn rref_kernel<F: FieldRing>(
    field: &F,
    mut rows: Vec<Vec<F::Elem>>,
    n: usize,
) -> (Vec<usize>, Vec<Vec<F::Elem>>) {
    let m = rows.len();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut pr = 0usize;
    for pc in 0..n {
        if pr >= m {
            break;
        }
        let Some(found) = (pr..m).find(|&i| !field.is_zero(&rows[i][pc])) else {
            continue;
        };
        rows.swap(found, pr);
        let inv_pivot = field.div(&field.one(), &rows[pr][pc]);
        for j in pc..n {
            rows[pr][j] = field.mul(&rows[pr][j], &inv_pivot);
        }
        for i in 0..m {
            if i == pr || field.is_zero(&rows[i][pc]) {
                continue;
            }
            let factor = rows[i][pc].clone();
            for j in pc..n {
                let s = field.mul(&factor, &rows[pr][j]);
                rows[i][j] = field.sub(&rows[i][j], &s);
            }
        }
        pivot_cols.push(pc);
        pr += 1;
    }
    let pivot_set: Vec<bool> = {
        let mut v = vec![false; n];
        for &c in &pivot_cols {
            v[c] = true;
        }
        v
    };
    let mut kernel = Vec::new();
    for f in 0..n {
        if pivot_set[f] {
            continue;
        }
        let mut v = vec![field.zero(); n];
        v[f] = field.one();
        for (row, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = field.neg(&rows[row][f]);
        }
        kernel.push(v);
    }
    (pivot_cols, kernel)
}

/// All maximal minors of an r x n matrix (r <= n), in lexicographic order of
/// the column tuples. Progressive expansion along rows: level i holds every
/// i x i minor of the first i rows, indexed by colex rank, so each subminor
/// is computed exactly once.
#[allow(clippy::needless_range_loop)]
fn wedge_maximal_minors<R: Ring>(
    ring: &R,
    rows: &[Vec<R::Elem>],
    n: usize,
) -> Result<Vec<R::Elem>> {
    let r = rows.len();
    for i in 0..=r {
        if binom(n, i) > MAX_LEVEL_ENTRIES {
            return Err(Error::Shape(format!(
                "minor expansion too large: C({n},{i}) exceeds {MAX_LEVEL_ENTRIES}"
            )));
        }
    }
    debug_assert!(r <= n);
    // local binomial table: bt[c][j] = C(c, j); avoids the shared-table
    // lookup in the inner loop
    let bt: Vec<Vec<usize>> = (0..=n)
        .map(|c| (0..=r + 1).map(|j| binom(c, j) as usize).collect())
        .collect();
    let mut level: Vec<R::Elem> = vec![ring.one()];
    for s in 0..r {
        let k = s + 1;
        let mut next: Vec<R::Elem> = vec![ring.zero(); binom(n, k) as usize];
        let row = &rows[s];
        // Combination odometer fused with incremental colex bookkeeping:
        //   sp[j] = sum_{l<j} C(t_l, l+1)   (elements at their own position)
        //   rp[j] = sum_{l<j} C(t_l, l)     (elements shifted down one slot)
        // so the subminor with element m removed sits at colex rank
        // sp[m] + (rp[k] - rp[m+1]), and t itself at sp[k].
        let mut t: Vec<usize> = (0..k).collect();
        let mut sp = vec![0usize; k + 1];
        let mut rp = vec![0usize; k + 1];
        let recompute = |t: &[usize], sp: &mut [usize], rp: &mut [usize], from: usize| {
            for j in from..k {
                sp[j + 1] = sp[j] + bt[t[j]][j + 1];
                rp[j + 1] = rp[j] + bt[t[j]][j];
            }
        };
        recompute(&t, &mut sp, &mut rp, 0);
        loop {
            let rt = rp[k];
            let mut acc = ring.zero();
            for (m, &c) in t.iter().enumerate() {
                if !ring.is_zero(&row[c]) {
                    let sub = &level[sp[m] + rt - rp[m + 1]];
                    if !ring.is_zero(sub) {
                        let term = ring.mul(&row[c], sub);
                        // cofactor sign (-1)^(s + m) for expansion along row s
                        if (s + m) % 2 == 0 {
                            acc = ring.add(&acc, &term);
                        } else {
                            acc = ring.sub(&acc, &term);
                        }
                    }
                }
            }
            next[sp[k]] = acc;
            // advance the odometer; usually only the last slot moves
            let mut advanced = None;
            let mut i = k;
            while i > 0 {
                i -= 1;
                if t[i] < n - (k - i) {
                    t[i] += 1;
                    for j in i + 1..k {
                        t[j] = t[j - 1] + 1;
                    }
                    advanced = Some(i);
                    break;
                }
            }
            match advanced {
                Some(from) => recompute(&t, &mut sp, &mut rp, from),
                None => break,
            }
        }
        level = next;
    }
    // reorder from colex storage to lexicographic output
    let mut out = Vec::with_capacity(binom(n, r) as usize);
    for_each_combination(n, r, |t| {
        let mut rank = 0usize;
        for (j, &c) in t.iter().enumerate() {
            rank += bt[c][j + 1];
        }
        out.push(level[rank].clone());
    });
    Ok(out)
}

// ---------------------------------------------------------------------------
// public matrix type
// ---------------------------------------------------------------------------

/// Dense matrix over one of the exact coefficient domains. Entries are
/// validated to be field-homogeneous at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    kind: FieldKind,
    entries: Vec<Scalar>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Scalar>) -> Result<Matrix> {
        if entries.len() != rows * cols {
            return Err(Error::MalformedMatrix {
                rows,
                cols,
                entries: entries.len(),
            });
        }
        let kind = entries.first().map_or(FieldKind::Rational, Scalar::kind);
        for e in &entries {
            if e.kind() != kind {
                return Err(Error::MixedField(kind, e.kind()));
            }
        }
        Ok(Matrix {
            rows,
            cols,
            kind,
            entries,
        })
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Matrix> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Matrix::new(m, n, rows.into_iter().flatten().collect())
    }

    pub fn zero(rows: usize, cols: usize, kind: FieldKind) -> Matrix {
        Matrix {
            rows,
            cols,
            kind,
            entries: vec![Scalar::zero(kind); rows * cols],
        }
    }

    pub fn identity(n: usize, kind: FieldKind) -> Matrix {
        let mut m = Matrix::zero(n, n, kind);
        for i in 0..n {
            m.entries[i * n + i] = Scalar::one(kind);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn entry(&self, r: usize, c: usize) -> &Scalar {
        &self.entries[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Scalar] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    /// Vertical concatenation; kinds and widths must agree.
    pub fn stack(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(Error::Shape(format!(
                "stack width mismatch: {} vs {}",
                self.cols, other.cols
            )));
        }
        if self.kind != other.kind {
            return Err(Error::MixedField(self.kind, other.kind));
        }
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        Matrix::new(self.rows + other.rows, self.cols, entries)
    }

    pub fn permute_cols(&self, perm: &[usize]) -> Result<Matrix> {
        if perm.len() != self.cols {
            return Err(Error::Shape("permutation length mismatch".into()));
        }
        let mut entries = Vec::with_capacity(self.entries.len());
        for r in 0..self.rows {
            for &c in perm {
                entries.push(self.entry(r, c).clone());
            }
        }
        Matrix::new(self.rows, self.cols, entries)
    }

    /// Exact matrix-vector product.
    pub fn mul_vec(&self, v: &[Scalar]) -> Result<Vec<Scalar>> {
        if v.len() != self.cols {
            return Err(Error::Shape("vector length mismatch".into()));
        }
        let mut out = Vec::with_capacity(self.rows);
        for r in 0..self.rows {
            let mut acc = Scalar::zero(self.kind);
            for (c, x) in v.iter().enumerate() {
                acc = acc.add(&self.entry(r, c).mul(x)?)?;
            }
            out.push(acc);
        }
        Ok(out)
    }

    fn rat_rows(&self) -> Result<Vec<Vec<BigRational>>> {
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .map(|e| Ok(e.as_rat()?.clone()))
                    .collect()
            })
            .collect()
    }

    fn fp_rows(&self) -> Result<(u64, Vec<Vec<u64>>)> {
        let FieldKind::Fp(p) = self.kind else {
            return Err(Error::NotPrimeField);
        };
        let rows = (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .map(|e| Ok(e.as_fp()?.value))
                    .collect::<Result<Vec<u64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((p, rows))
    }

    fn poly_rows(&self) -> Result<Vec<Vec<QPoly>>> {
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .map(|e| Ok(e.as_poly()?.clone()))
                    .collect()
            })
            .collect()
    }

    /// Clears denominators row by row; returns integer rows plus the scaling
    /// factor applied to each row.
    fn scaled_int_rows(&self) -> Result<(Vec<Vec<BigInt>>, Vec<BigInt>)> {
        use num_integer::Integer;
        let mut int_rows = Vec::with_capacity(self.rows);
        let mut scales = Vec::with_capacity(self.rows);
        for r in 0..self.rows {
            let mut lcm = BigInt::one();
            for e in self.row(r) {
                lcm = lcm.lcm(e.as_rat()?.denom());
            }
            let row: Vec<BigInt> = self
                .row(r)
                .iter()
                .map(|e| {
                    let q = e.as_rat().expect("validated");
                    q.numer() * (&lcm / q.denom())
                })
                .collect();
            int_rows.push(row);
            scales.push(lcm);
        }
        Ok((int_rows, scales))
    }

    /// Rank over the entry field (for polynomial entries: rank over the
    /// fraction field of rational functions in t).
    pub fn rank(&self) -> Result<usize> {
        if self.rows == 0 || self.cols == 0 {
            return Ok(0);
        }
        match self.kind {
            FieldKind::Rational => {
                let (rows, _) = self.scaled_int_rows()?;
                Ok(bareiss_rank(&ZRing, rows))
            }
            FieldKind::Fp(p) => {
                let (_, rows) = self.fp_rows()?;
                Ok(bareiss_rank(&FpRing { p }, rows))
            }
            FieldKind::PolyRational => Ok(bareiss_rank(&QPolyRing, self.poly_rows()?)),
        }
    }

    /// Canonical right-kernel basis: one vector per pivot-free column, in
    /// column order, the free coordinate set to 1. `rank + basis.len()` always
    /// equals the column count.
    pub fn kernel_basis(&self) -> Result<Vec<Vec<Scalar>>> {
        match self.kind {
            FieldKind::Rational => {
                let rows = self.rat_rows()?;
                let (_, kernel) = rref_kernel(&QRing, rows, self.cols);
                Ok(kernel
                    .into_iter()
                    .map(|v| v.into_iter().map(Scalar::Rat).collect())
                    .collect())
            }
            FieldKind::Fp(p) => {
                let (_, rows) = self.fp_rows()?;
                let (_, kernel) = rref_kernel(&FpRing { p }, rows, self.cols);
                Ok(kernel
                    .into_iter()
                    .map(|v| {
                        v.into_iter()
                            .map(|value| Scalar::Fp(FpElem { value, modulus: p }))
                            .collect()
                    })
                    .collect())
            }
            FieldKind::PolyRational => Err(Error::UnsupportedField(FieldKind::PolyRational)),
        }
    }

    /// Determinant of a square matrix.
    pub fn det(&self) -> Result<Scalar> {
        if self.rows != self.cols {
            return Err(Error::Shape(format!(
                "determinant of non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        match self.kind {
            FieldKind::Rational => {
                let (rows, scales) = self.scaled_int_rows()?;
                let d = bareiss_det(&ZRing, rows);
                let mut scale = BigInt::one();
                for s in &scales {
                    scale *= s;
                }
                Ok(Scalar::Rat(BigRational::new(d, scale)))
            }
            FieldKind::Fp(p) => {
                let (_, rows) = self.fp_rows()?;
                Ok(Scalar::Fp(FpElem {
                    value: bareiss_det(&FpRing { p }, rows),
                    modulus: p,
                }))
            }
            FieldKind::PolyRational => Ok(Scalar::Poly(bareiss_det(&QPolyRing, self.poly_rows()?))),
        }
    }

    /// All `C(cols, rows)` maximal minors, indexed by strictly increasing
    /// column tuples in lexicographic order (see [`crate::combin`]).
    ///
    /// Errors when `rows > cols` and when the matrix is not of full row rank
    /// (so an all-zero minor vector is reported, never returned silently).
    pub fn maximal_minors(&self) -> Result<Vec<Scalar>> {
        if self.rows > self.cols {
            return Err(Error::Shape(format!(
                "maximal minors need rows <= cols, got {}x{}",
                self.rows, self.cols
            )));
        }
        let rank = self.rank()?;
        if rank < self.rows {
            return Err(Error::RankDeficient {
                rank,
                rows: self.rows,
            });
        }
        match self.kind {
            FieldKind::Rational => {
                let (rows, scales) = self.scaled_int_rows()?;
                let minors = int_maximal_minors(&rows, self.cols)?;
                let mut scale = BigInt::one();
                for s in &scales {
                    scale *= s;
                }
                Ok(minors
                    .into_iter()
                    .map(|m| Scalar::Rat(BigRational::new(m, scale.clone())))
                    .collect())
            }
            FieldKind::Fp(p) => {
                let (_, rows) = self.fp_rows()?;
                let minors = wedge_maximal_minors(&FpRing { p }, &rows, self.cols)?;
                Ok(minors
                    .into_iter()
                    .map(|value| Scalar::Fp(FpElem { value, modulus: p }))
                    .collect())
            }
            FieldKind::PolyRational => {
                let rows = self.poly_rows()?;
                let minors = wedge_maximal_minors(&QPolyRing, &rows, self.cols)?;
                Ok(minors.into_iter().map(Scalar::Poly).collect())
            }
        }
    }
}

impl Matrix {
    /// Maximal minors of a rational matrix as raw integers: the minors of
    /// the row-scaled integer matrix, together with the common scale by
    /// which they all exceed the true rational minors. Callers that only
    /// need the projective class (Plücker coordinates) can ignore the scale
    /// and skip per-minor rational bookkeeping.
    pub fn int_minors_with_scale(&self) -> Result<(Vec<BigInt>, BigInt)> {
        if self.kind != FieldKind::Rational {
            return Err(Error::FieldMismatch(FieldKind::Rational, self.kind));
        }
        if self.rows > self.cols {
            return Err(Error::Shape(format!(
                "maximal minors need rows <= cols, got {}x{}",
                self.rows, self.cols
            )));
        }
        let rank = self.rank()?;
        if rank < self.rows {
            return Err(Error::RankDeficient {
                rank,
                rows: self.rows,
            });
        }
        let (rows, scales) = self.scaled_int_rows()?;
        let minors = int_maximal_minors(&rows, self.cols)?;
        let mut scale = BigInt::one();
        for s in &scales {
            scale *= s;
        }
        Ok((minors, scale))
    }

    /// Nonzero maximal minors of a rational matrix, as (lexicographic rank,
    /// integer value) pairs up to one overall positive scale. The workhorse
    /// behind Plücker coordinates, where zero minors and the scale are
    /// irrelevant.
    pub(crate) fn int_minors_nonzero(&self) -> Result<Vec<(u32, BigInt)>> {
        if self.kind != FieldKind::Rational {
            return Err(Error::FieldMismatch(FieldKind::Rational, self.kind));
        }
        if self.rows > self.cols {
            return Err(Error::Shape(format!(
                "maximal minors need rows <= cols, got {}x{}",
                self.rows, self.cols
            )));
        }
        let rank = self.rank()?;
        if rank < self.rows {
            return Err(Error::RankDeficient {
                rank,
                rows: self.rows,
            });
        }
        let (rows, _) = self.scaled_int_rows()?;
        match int_minors_impl(&rows, self.cols)? {
            IntMinors::Small(v) => Ok(v
                .iter()
                .enumerate()
                .filter(|(_, &x)| x != 0)
                .map(|(i, &x)| (i as u32, BigInt::from(x)))
                .collect()),
            IntMinors::Big(v) => Ok(v
                .into_iter()
                .enumerate()
                .filter(|(_, x)| !x.is_zero())
                .map(|(i, x)| (i as u32, x))
                .collect()),
        }
    }
}

enum IntMinors {
    Small(Vec<i128>),
    Big(Vec<BigInt>),
}

/// Integer maximal minors with an i128 fast path: when the Hadamard bound of
/// the full matrix stays below 2^122 every intermediate fits i128 with room
/// for the row-length sum fanout, so the whole expansion runs on machine
/// words.
fn int_maximal_minors(rows: &[Vec<BigInt>], n: usize) -> Result<Vec<BigInt>> {
    match int_minors_impl(rows, n)? {
        IntMinors::Small(v) => Ok(v.into_iter().map(BigInt::from).collect()),
        IntMinors::Big(v) => Ok(v),
    }
}

fn int_minors_impl(rows: &[Vec<BigInt>], n: usize) -> Result<IntMinors> {
    let fits = rows.len() <= 24 && {
        let mut bound_sq = BigInt::one();
        for row in rows {
            let norm_sq: BigInt = row.iter().map(|e| e * e).sum();
            bound_sq *= if norm_sq.is_zero() {
                BigInt::one()
            } else {
                norm_sq
            };
        }
        // bound < 2^122 leaves room for a <= 25-term accumulation in i128
        bound_sq < (BigInt::one() << 244u32)
    };
    if fits {
        let small: Vec<Vec<i128>> = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| e.to_i128().expect("bounded by Hadamard check"))
                    .collect()
            })
            .collect();
        Ok(IntMinors::Small(wedge_maximal_minors(
            &I128Ring, &small, n,
        )?))
    } else {
        Ok(IntMinors::Big(wedge_maximal_minors(&ZRing, rows, n)?))
    }
}
