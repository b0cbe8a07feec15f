//! Grassmannian and flag images of point configurations in dual Plücker
//! coordinates: the annihilator row space of a configuration's condition
//! matrix is encoded by its vector of maximal minors, normalized to coprime
//! integers. Subspaces can be reconstructed from the coordinates, which
//! doubles as a decomposability certificate.

use std::collections::BTreeMap;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize};

use crate::combin::{binom, lex_rank, lex_unrank};
use crate::error::{Error, Result};
use crate::forms::{monomial_count, Form};
use crate::linsys::{condition_matrix, PointConfig};
use crate::matrix::Matrix;
use crate::scalar::{FieldKind, Scalar};

/// Point of the Grassmannian of codimension-3d subspaces of the degree-k
/// coefficient space, stored as the sparse normalized vector of maximal
/// minors of a 3d-row annihilator matrix (dual Plücker coordinates).
#[derive(Clone, Debug, PartialEq)]
pub struct PluckerPoint {
    k: u32,
    d: u32,
    kind: FieldKind,
    /// (lexicographic rank of the column tuple, value), nonzero entries only,
    /// sorted by rank. Over the rationals the values are coprime integers
    /// with the first nonzero positive; over a prime field the first nonzero
    /// is 1.
    coords: Vec<(u32, Scalar)>,
}

impl PluckerPoint {
    /// Number of columns of the underlying condition matrix, N_k + 1.
    pub fn ambient_cols(&self) -> usize {
        monomial_count(self.k)
    }

    pub fn tuple_len(&self) -> usize {
        3 * self.d as usize
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn coords(&self) -> &[(u32, Scalar)] {
        &self.coords
    }

    /// Builds a point from the dense lexicographic minor vector, normalizing
    /// projectively. Errors when every coordinate vanishes.
    pub fn from_dense(k: u32, d: u32, dense: &[Scalar]) -> Result<PluckerPoint> {
        let n = monomial_count(k);
        let r = 3 * d as usize;
        if dense.len() != binom(n, r) as usize {
            return Err(Error::Shape(format!(
                "plucker vector needs C({n},{r}) = {} coordinates, got {}",
                binom(n, r),
                dense.len()
            )));
        }
        let kind = dense.first().map_or(FieldKind::Rational, Scalar::kind);
        let mut sparse: Vec<(u32, Scalar)> = Vec::new();
        match kind {
            FieldKind::Rational => {
                let nonzero: Vec<(usize, &Scalar)> = dense
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .collect();
                if nonzero.is_empty() {
                    return Err(Error::Shape("zero plucker vector".into()));
                }
                let rats: Vec<num_rational::BigRational> = nonzero
                    .iter()
                    .map(|(_, v)| Ok(v.as_rat()?.clone()))
                    .collect::<Result<Vec<_>>>()?;
                let ints = crate::scalar::primitive_integer_vector(&rats)
                    .expect("nonzero entries present");
                for ((idx, _), int) in nonzero.iter().zip(ints) {
                    sparse.push((
                        *idx as u32,
                        Scalar::Rat(num_rational::BigRational::from(int)),
                    ));
                }
            }
            FieldKind::Fp(_) => {
                let first = dense
                    .iter()
                    .find(|v| !v.is_zero())
                    .ok_or_else(|| Error::Shape("zero plucker vector".into()))?;
                for (idx, v) in dense.iter().enumerate() {
                    if !v.is_zero() {
                        sparse.push((idx as u32, v.div(first)?));
                    }
                }
            }
            FieldKind::PolyRational => {
                return Err(Error::UnsupportedField(kind));
            }
        }
        Ok(PluckerPoint {
            k,
            d,
            kind,
            coords: sparse,
        })
    }

    /// Fast constructor from the nonzero integer minors (any common positive
    /// scale is projectively irrelevant and dropped). Pairs must be sorted
    /// by rank, as produced by the minor expansion.
    #[doc(hidden)]
    pub fn from_sparse_ints(
        k: u32,
        d: u32,
        mut nonzero: Vec<(u32, num_bigint::BigInt)>,
    ) -> Result<PluckerPoint> {
        use num_integer::Integer;
        use num_traits::{One, Signed, Zero};
        let n = monomial_count(k);
        let r = 3 * d as usize;
        let total = binom(n, r);
        if nonzero.is_empty() {
            return Err(Error::Shape("zero plucker vector".into()));
        }
        if nonzero.iter().any(|(i, _)| *i as u64 >= total) {
            return Err(Error::Shape("plucker coordinate index out of range".into()));
        }
        let mut gcd = num_bigint::BigInt::zero();
        for (_, v) in &nonzero {
            gcd = gcd.gcd(v);
            if gcd.is_one() {
                break;
            }
        }
        if nonzero[0].1.is_negative() {
            gcd = -gcd;
        }
        if !gcd.is_one() {
            for (_, v) in &mut nonzero {
                *v /= &gcd;
            }
        }
        Ok(PluckerPoint {
            k,
            d,
            kind: FieldKind::Rational,
            coords: nonzero
                .into_iter()
                .map(|(i, v)| (i, Scalar::Rat(num_rational::BigRational::from(v))))
                .collect(),
        })
    }

    /// Coordinate at a lexicographic tuple rank (zero when absent).
    pub fn coord_at(&self, rank: u32) -> Scalar {
        match self.coords.binary_search_by_key(&rank, |(r, _)| *r) {
            Ok(i) => self.coords[i].1.clone(),
            Err(_) => Scalar::zero(self.kind),
        }
    }

    /// The column tuple of the first (lexicographically smallest) nonzero
    /// coordinate.
    pub fn pivot_tuple(&self) -> Vec<usize> {
        lex_unrank(
            self.ambient_cols(),
            self.tuple_len(),
            self.coords[0].0 as usize,
        )
    }

    /// Signed coordinate lookup for an arbitrary (possibly unsorted) tuple;
    /// zero on repeated entries.
    pub fn signed_coord(&self, tuple: &[usize]) -> Scalar {
        let mut sorted = tuple.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Scalar::zero(self.kind);
        }
        // parity of the permutation sorting `tuple`
        let mut parity = false;
        for i in 0..tuple.len() {
            for j in i + 1..tuple.len() {
                if tuple[i] > tuple[j] {
                    parity = !parity;
                }
            }
        }
        let v = self.coord_at(lex_rank(self.ambient_cols(), &sorted) as u32);
        if parity {
            v.neg()
        } else {
            v
        }
    }
}

impl Serialize for PluckerPoint {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = BTreeMap::new();
        for (rank, v) in &self.coords {
            let tuple = lex_unrank(self.ambient_cols(), self.tuple_len(), *rank as usize);
            let key = tuple
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",");
            map.insert(key, v.to_wire());
        }
        let mut st = ser.serialize_struct("PluckerPoint", 3)?;
        st.serialize_field("k", &self.k)?;
        st.serialize_field("d", &self.d)?;
        st.serialize_field("coords", &map)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for PluckerPoint {
    fn deserialize<D: serde::Deserializer<'de>>(
        de: D,
    ) -> std::result::Result<PluckerPoint, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        struct Wire {
            k: u32,
            d: u32,
            coords: BTreeMap<String, String>,
        }
        let w = Wire::deserialize(de)?;
        let n = monomial_count(w.k);
        let r = 3 * w.d as usize;
        if r > n || binom(n, r) > 10_000_000 {
            return Err(D::Error::custom(format!(
                "plucker point with k = {}, d = {} is out of supported range",
                w.k, w.d
            )));
        }
        let mut dense = vec![Scalar::zero(FieldKind::Rational); binom(n, r) as usize];
        for (key, value) in &w.coords {
            let tuple: Vec<usize> = key
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| D::Error::custom(format!("bad tuple key {key:?}")))?;
            if tuple.len() != r || tuple.windows(2).any(|t| t[0] >= t[1]) {
                return Err(D::Error::custom(format!(
                    "tuple key {key:?} is not strictly increasing of length {r}"
                )));
            }
            if tuple.iter().any(|&c| c >= n) {
                return Err(D::Error::custom(format!("tuple key {key:?} out of range")));
            }
            dense[lex_rank(n, &tuple)] =
                Scalar::parse_wire(value, FieldKind::Rational).map_err(D::Error::custom)?;
        }
        PluckerPoint::from_dense(w.k, w.d, &dense).map_err(D::Error::custom)
    }
}

/// Flag of nested subspaces: the i-th entry is the image of the first i
/// points, of codimension 3i. Serializes as a bare array of Plücker points.
#[derive(Clone, Debug, PartialEq)]
pub struct FlagPoint {
    pub k: u32,
    pub chain: Vec<PluckerPoint>,
}

impl Serialize for FlagPoint {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        self.chain.serialize(ser)
    }
}

/// Image of a configuration in the Grassmannian: normalized maximal-minor
/// vector of the degree-k condition matrix. Independent of the point order
/// and of representative scalings.
pub fn gamma(cfg: &PointConfig, k: u32) -> Result<PluckerPoint> {
    let d = cfg.len();
    let m = condition_matrix(k, cfg)?;
    let rank = m.rank()?;
    if rank != 3 * d {
        return Err(Error::DegenerateConfiguration {
            rank,
            expected: 3 * d,
        });
    }
    if cfg.kind() == FieldKind::Rational {
        PluckerPoint::from_sparse_ints(k, d as u32, m.int_minors_nonzero()?)
    } else {
        let minors = m.maximal_minors()?;
        PluckerPoint::from_dense(k, d as u32, &minors)
    }
}

/// Flag of gamma values of the prefixes of an ordered configuration, with
/// the nesting containments verified before returning.
pub fn flag(cfg: &PointConfig, k: u32) -> Result<FlagPoint> {
    if !cfg.is_ordered() {
        return Err(Error::Shape(
            "flag requires an ordered configuration".into(),
        ));
    }
    let d = cfg.len();
    let mut chain = Vec::with_capacity(d);
    for i in 1..=d {
        let prefix = cfg.prefix(i);
        let pp = gamma(&prefix, k).map_err(|e| match e {
            Error::DegenerateConfiguration { rank, expected } => Error::DegeneratePrefix {
                len: i,
                rank,
                expected,
            },
            other => other,
        })?;
        chain.push(pp);
    }
    // verify nesting: the annihilator of a shorter prefix sits inside that
    // of the longer one
    for w in chain.windows(2) {
        let small = reconstruct_rows(&w[0])?;
        let large = reconstruct_rows(&w[1])?;
        if !rowspace_contained(&small, &large)? {
            return Err(Error::Shape(
                "flag nesting containment failed (non-nested annihilators)".into(),
            ));
        }
    }
    Ok(FlagPoint { k, chain })
}

/// True iff two lists of forms of equal degree and cardinality span the same
/// subspace of the coefficient space.
pub fn subspace_equal(a: &[Form], b: &[Form]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::Shape(
            "subspace bases of different cardinality".into(),
        ));
    }
    if a.is_empty() {
        return Ok(true);
    }
    let deg = a[0].degree();
    if a.iter().chain(b).any(|f| f.degree() != deg) {
        return Err(Error::Shape("subspace bases of mixed degree".into()));
    }
    let rows_a: Vec<Vec<Scalar>> = a.iter().map(|f| f.coeffs().to_vec()).collect();
    let rows_b: Vec<Vec<Scalar>> = b.iter().map(|f| f.coeffs().to_vec()).collect();
    let ma = Matrix::from_rows(rows_a)?;
    let mb = Matrix::from_rows(rows_b)?;
    let ra = ma.rank()?;
    let rb = mb.rank()?;
    let stacked = ma.stack(&mb)?.rank()?;
    Ok(ra == rb && stacked == ra)
}

/// rowspace(sub) contained in rowspace(sup), by a stacked-rank test.
pub fn rowspace_contained(sub: &Matrix, sup: &Matrix) -> Result<bool> {
    let r_sup = sup.rank()?;
    let stacked = sup.stack(sub)?.rank()?;
    Ok(stacked == r_sup)
}

/// Cramer-style contraction: from the pivot tuple T of `pp`, the row for
/// each t in T has, at column c, the signed coordinate of T with t replaced
/// by c. For a decomposable vector these rows span the encoded subspace.
pub fn reconstruct_rows(pp: &PluckerPoint) -> Result<Matrix> {
    if pp.coords().is_empty() {
        return Err(Error::Shape("empty plucker vector".into()));
    }
    let n = pp.ambient_cols();
    let pivot = pp.pivot_tuple();
    let r = pivot.len();
    let mut rows = Vec::with_capacity(r);
    let mut work = pivot.clone();
    for m in 0..r {
        let mut row = Vec::with_capacity(n);
        for c in 0..n {
            let saved = work[m];
            work[m] = c;
            row.push(pp.signed_coord(&work));
            work[m] = saved;
        }
        rows.push(row);
    }
    Matrix::from_rows(rows)
}

/// Decomposability verdict for a reconstruction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decomposability {
    Decomposable,
    NotDecomposable,
}

/// Reconstructs an annihilator basis from the coordinates and verifies that
/// its maximal minors reproduce `pp`; failure of reproduction is returned as
/// a not-decomposable verdict, not an error.
pub fn reconstruct_subspace(pp: &PluckerPoint) -> Result<(Matrix, Decomposability)> {
    let rows = reconstruct_rows(pp)?;
    let verdict = match rows.maximal_minors() {
        Ok(minors) => match PluckerPoint::from_dense(pp.k, pp.d, &minors) {
            Ok(rebuilt) if rebuilt == *pp => Decomposability::Decomposable,
            _ => Decomposability::NotDecomposable,
        },
        Err(Error::RankDeficient { .. }) => Decomposability::NotDecomposable,
        Err(e) => return Err(e),
    };
    Ok((rows, verdict))
}
