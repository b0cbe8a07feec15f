//! Homogeneous ternary forms, projective plane points, and the singularity
//! analysis used to certify nodes: exact partial derivatives, point
//! classification through the local quadratic part, exhaustive singular-locus
//! scans over small prime fields, and a squarefreeness test via true
//! bivariate gcds over the rationals.
//!
//! The monomial order is fixed once for the whole crate (and all file
//! formats): graded lexicographic with x > y > z, so position 0 is x^s and
//! the last position is z^s.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::de::Error as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qpoly::QPoly;
use crate::scalar::{rational_mod_p, FieldKind, FpElem, Scalar};

/// Number of degree-`s` monomials in three variables.
pub fn monomial_count(s: u32) -> usize {
    ((s as usize + 1) * (s as usize + 2)) / 2
}

/// Position of x^a y^b z^c in the fixed monomial order of degree `s`.
pub fn monomial_index(s: u32, a: u32, b: u32) -> usize {
    debug_assert!(a + b <= s);
    let d = (s - a) as usize;
    d * (d + 1) / 2 + (d - b as usize)
}

/// All exponent triples (a, b, c) of degree `s`, in monomial order.
pub fn monomials(s: u32) -> Vec<(u32, u32, u32)> {
    let mut out = Vec::with_capacity(monomial_count(s));
    for a in (0..=s).rev() {
        for b in (0..=s - a).rev() {
            out.push((a, b, s - a - b));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// forms
// ---------------------------------------------------------------------------

/// Dense homogeneous ternary form of fixed degree.
#[derive(Clone, Debug, PartialEq)]
pub struct Form {
    degree: u32,
    coeffs: Vec<Scalar>,
}

impl Form {
    pub fn new(degree: u32, coeffs: Vec<Scalar>) -> Result<Form> {
        if coeffs.len() != monomial_count(degree) {
            return Err(Error::Shape(format!(
                "degree {degree} form needs {} coefficients, got {}",
                monomial_count(degree),
                coeffs.len()
            )));
        }
        let kind = coeffs.first().map_or(FieldKind::Rational, Scalar::kind);
        for c in &coeffs {
            if c.kind() != kind {
                return Err(Error::MixedField(kind, c.kind()));
            }
        }
        Ok(Form { degree, coeffs })
    }

    pub fn zero(degree: u32, kind: FieldKind) -> Form {
        Form {
            degree,
            coeffs: vec![Scalar::zero(kind); monomial_count(degree)],
        }
    }

    /// Builds a form from sparse integer terms; convenient for fixed cases.
    pub fn from_terms(degree: u32, terms: &[(u32, u32, u32, i64)], kind: FieldKind) -> Form {
        let mut f = Form::zero(degree, kind);
        for &(a, b, c, v) in terms {
            assert_eq!(a + b + c, degree, "term degree mismatch");
            f.coeffs[monomial_index(degree, a, b)] = Scalar::from_int(v, kind);
        }
        f
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn kind(&self) -> FieldKind {
        self.coeffs
            .first()
            .map_or(FieldKind::Rational, Scalar::kind)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }

    /// Projective dimension N_s = s(s+3)/2 of the full degree-s system.
    pub fn ambient_dim(&self) -> usize {
        monomial_count(self.degree) - 1
    }

    pub fn coeff(&self, a: u32, b: u32) -> &Scalar {
        &self.coeffs[monomial_index(self.degree, a, b)]
    }

    /// The three partial derivatives, each of degree s - 1.
    pub fn partials(&self) -> Result<(Form, Form, Form)> {
        let s = self.degree;
        if s == 0 {
            return Err(Error::DegreeTooSmall(0));
        }
        let kind = self.kind();
        let mut dx = Form::zero(s - 1, kind);
        let mut dy = Form::zero(s - 1, kind);
        let mut dz = Form::zero(s - 1, kind);
        for (i, &(a, b, c)) in monomials(s).iter().enumerate() {
            let coeff = &self.coeffs[i];
            if coeff.is_zero() {
                continue;
            }
            if a > 0 {
                let idx = monomial_index(s - 1, a - 1, b);
                dx.coeffs[idx] =
                    dx.coeffs[idx].add(&coeff.mul(&Scalar::from_int(a as i64, kind))?)?;
            }
            if b > 0 {
                let idx = monomial_index(s - 1, a, b - 1);
                dy.coeffs[idx] =
                    dy.coeffs[idx].add(&coeff.mul(&Scalar::from_int(b as i64, kind))?)?;
            }
            if c > 0 {
                let idx = monomial_index(s - 1, a, b);
                dz.coeffs[idx] =
                    dz.coeffs[idx].add(&coeff.mul(&Scalar::from_int(c as i64, kind))?)?;
            }
        }
        Ok((dx, dy, dz))
    }

    /// Value at the stored representative of `P`; zero-ness is independent of
    /// the representative.
    pub fn evaluate(&self, p: &ProjPoint) -> Result<Scalar> {
        let kind = self.kind();
        if p.kind() != kind {
            return Err(Error::FieldMismatch(kind, p.kind()));
        }
        let s = self.degree as usize;
        let pow = |base: &Scalar| -> Result<Vec<Scalar>> {
            let mut v = Vec::with_capacity(s + 1);
            v.push(Scalar::one(kind));
            for i in 0..s {
                let last = v[i].clone();
                v.push(last.mul(base)?);
            }
            Ok(v)
        };
        let px = pow(&p.coords[0])?;
        let py = pow(&p.coords[1])?;
        let pz = pow(&p.coords[2])?;
        let mut acc = Scalar::zero(kind);
        for (i, &(a, b, c)) in monomials(self.degree).iter().enumerate() {
            let coeff = &self.coeffs[i];
            if coeff.is_zero() {
                continue;
            }
            let term = coeff
                .mul(&px[a as usize])?
                .mul(&py[b as usize])?
                .mul(&pz[c as usize])?;
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    pub fn scale(&self, by: &Scalar) -> Result<Form> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.mul(by))
            .collect::<Result<Vec<_>>>()?;
        Form::new(self.degree, coeffs)
    }

    pub fn add(&self, other: &Form) -> Result<Form> {
        if self.degree != other.degree {
            return Err(Error::Shape("degree mismatch in form addition".into()));
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Form::new(self.degree, coeffs)
    }

    pub fn mul(&self, other: &Form) -> Result<Form> {
        let s = self.degree + other.degree;
        let kind = self.kind();
        let mut out = Form::zero(s, kind);
        for (i, &(a1, b1, _)) in monomials(self.degree).iter().enumerate() {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for (j, &(a2, b2, _)) in monomials(other.degree).iter().enumerate() {
                if other.coeffs[j].is_zero() {
                    continue;
                }
                let idx = monomial_index(s, a1 + a2, b1 + b2);
                out.coeffs[idx] = out.coeffs[idx].add(&self.coeffs[i].mul(&other.coeffs[j])?)?;
            }
        }
        Ok(out)
    }

    /// Applies a variable permutation: the result G satisfies
    /// G(x0, x1, x2) = F(x_{perm[0]}, x_{perm[1]}, x_{perm[2]}).
    pub fn permute_vars(&self, perm: [usize; 3]) -> Form {
        let mut out = Form::zero(self.degree, self.kind());
        for (i, &(a, b, c)) in monomials(self.degree).iter().enumerate() {
            if self.coeffs[i].is_zero() {
                continue;
            }
            let e = [a, b, c];
            let mut g = [0u32; 3];
            for (j, &pj) in perm.iter().enumerate() {
                g[pj] = e[j];
            }
            out.coeffs[monomial_index(self.degree, g[0], g[1])] = self.coeffs[i].clone();
        }
        out
    }

    /// Rescales a rational form to coprime integer coefficients (a projective
    /// normalization) and reduces mod p.
    pub fn reduce_mod_p(&self, p: u64) -> Result<Form> {
        let rats: Vec<BigRational> = self
            .coeffs
            .iter()
            .map(|c| Ok(c.as_rat()?.clone()))
            .collect::<Result<Vec<_>>>()?;
        let ints = crate::scalar::primitive_integer_vector(&rats)
            .ok_or_else(|| Error::Shape("cannot reduce the zero form".into()))?;
        let coeffs = ints
            .into_iter()
            .map(|v| {
                let e = rational_mod_p(&BigRational::from(v), p)?;
                Ok(Scalar::Fp(e))
            })
            .collect::<Result<Vec<_>>>()?;
        Form::new(self.degree, coeffs)
    }
}

impl Serialize for Form {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = ser.serialize_struct("Form", 3)?;
        st.serialize_field("degree", &self.degree)?;
        st.serialize_field("field", &self.kind().to_string())?;
        let coeffs: Vec<String> = self.coeffs.iter().map(Scalar::to_wire).collect();
        st.serialize_field("coeffs", &coeffs)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Form {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Form, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            degree: u32,
            field: String,
            coeffs: Vec<String>,
        }
        let w = Wire::deserialize(de)?;
        let kind = FieldKind::parse(&w.field).map_err(D::Error::custom)?;
        let coeffs = w
            .coeffs
            .iter()
            .map(|s| Scalar::parse_wire(s, kind))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        Form::new(w.degree, coeffs).map_err(D::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// projective points
// ---------------------------------------------------------------------------

/// Point of the projective plane, stored in the canonical normalization with
/// last nonzero coordinate equal to 1; equality is equality of normalized
/// triples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjPoint {
    coords: [Scalar; 3],
}

impl ProjPoint {
    pub fn new(coords: [Scalar; 3]) -> Result<ProjPoint> {
        let kind = coords[0].kind();
        for c in &coords {
            if c.kind() != kind {
                return Err(Error::FieldMismatch(kind, c.kind()));
            }
        }
        if matches!(kind, FieldKind::PolyRational) {
            return Err(Error::UnsupportedField(kind));
        }
        let last = coords
            .iter()
            .rposition(|c| !c.is_zero())
            .ok_or_else(|| Error::Shape("projective point with all coordinates zero".into()))?;
        let inv = coords[last].clone();
        let normalized: Vec<Scalar> = coords.iter().map(|c| c.div(&inv).unwrap()).collect();
        Ok(ProjPoint {
            coords: [
                normalized[0].clone(),
                normalized[1].clone(),
                normalized[2].clone(),
            ],
        })
    }

    pub fn from_ints(x: i64, y: i64, z: i64, kind: FieldKind) -> Result<ProjPoint> {
        ProjPoint::new([
            Scalar::from_int(x, kind),
            Scalar::from_int(y, kind),
            Scalar::from_int(z, kind),
        ])
    }

    pub fn from_rationals(x: BigRational, y: BigRational, z: BigRational) -> Result<ProjPoint> {
        ProjPoint::new([Scalar::Rat(x), Scalar::Rat(y), Scalar::Rat(z)])
    }

    pub fn coords(&self) -> &[Scalar; 3] {
        &self.coords
    }

    pub fn kind(&self) -> FieldKind {
        self.coords[0].kind()
    }

    /// Index of the canonical affine chart (the last nonzero coordinate,
    /// which is 1 in the stored representative).
    pub fn chart(&self) -> usize {
        self.coords.iter().rposition(|c| !c.is_zero()).unwrap()
    }

    /// Scatters coordinates by the same permutation convention as
    /// [`Form::permute_vars`], so evaluation is preserved pairwise.
    pub fn permute(&self, perm: [usize; 3]) -> ProjPoint {
        let mut q = [
            Scalar::zero(self.kind()),
            Scalar::zero(self.kind()),
            Scalar::zero(self.kind()),
        ];
        for (j, &pj) in perm.iter().enumerate() {
            q[pj] = self.coords[j].clone();
        }
        ProjPoint::new(q).expect("permutation of a valid point")
    }

    pub fn reduce_mod_p(&self, p: u64) -> Result<ProjPoint> {
        let coords = self
            .coords
            .iter()
            .map(|c| Ok(Scalar::Fp(rational_mod_p(c.as_rat()?, p)?)))
            .collect::<Result<Vec<_>>>()?;
        ProjPoint::new([coords[0].clone(), coords[1].clone(), coords[2].clone()])
    }

    /// Image under an integer projective change of coordinates; the matrix
    /// must be invertible.
    pub fn transform(&self, m: &[[i64; 3]; 3]) -> Result<ProjPoint> {
        let kind = self.kind();
        let mut out = [Scalar::zero(kind), Scalar::zero(kind), Scalar::zero(kind)];
        for (r, row) in m.iter().enumerate() {
            for (c, entry) in row.iter().enumerate() {
                let term = Scalar::from_int(*entry, kind).mul(&self.coords[c])?;
                out[r] = out[r].add(&term)?;
            }
        }
        ProjPoint::new(out)
    }

    /// Total order on canonical representatives; used to sort unordered
    /// configurations and scan output deterministically.
    pub fn canonical_cmp(&self, other: &ProjPoint) -> std::cmp::Ordering {
        for (a, b) in self.coords.iter().zip(&other.coords) {
            let ord = scalar_cmp(a, b);
            if ord != std::cmp::Ordering::Equal {
                return ord;
            }
        }
        std::cmp::Ordering::Equal
    }

    pub fn to_wire(&self) -> [String; 3] {
        [
            self.coords[0].to_wire(),
            self.coords[1].to_wire(),
            self.coords[2].to_wire(),
        ]
    }

    pub fn from_wire(wire: &[String], kind: FieldKind) -> Result<ProjPoint> {
        if wire.len() != 3 {
            return Err(Error::Parse("projective point needs 3 coordinates".into()));
        }
        let coords = wire
            .iter()
            .map(|s| Scalar::parse_wire(s, kind))
            .collect::<Result<Vec<_>>>()?;
        ProjPoint::new([coords[0].clone(), coords[1].clone(), coords[2].clone()])
    }
}

fn scalar_cmp(a: &Scalar, b: &Scalar) -> std::cmp::Ordering {
    match (a, b) {
        (Scalar::Rat(x), Scalar::Rat(y)) => x.cmp(y),
        (Scalar::Fp(x), Scalar::Fp(y)) => (x.modulus, x.value).cmp(&(y.modulus, y.value)),
        _ => format!("{a:?}").cmp(&format!("{b:?}")),
    }
}

impl Serialize for ProjPoint {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_wire().serialize(ser)
    }
}

impl<'de> Deserialize<'de> for ProjPoint {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<ProjPoint, D::Error> {
        let wire = <[String; 3]>::deserialize(de)?;
        ProjPoint::from_wire(&wire, FieldKind::Rational).map_err(D::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// singularity classification
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingularityKind {
    NotOnCurve,
    SmoothPoint,
    Node,
    DegenerateSingularity,
}

/// Re-checkable verdict: the gradient triple and, for singular points, the
/// discriminant B^2 - 4AC of the local quadratic part A u^2 + B uv + C v^2.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularityVerdict {
    pub kind: SingularityKind,
    pub gradient: [Scalar; 3],
    pub discriminant: Option<Scalar>,
    pub chart: Option<usize>,
}

fn check_characteristic(kind: FieldKind, s: u32) -> Result<()> {
    if let FieldKind::Fp(p) = kind {
        if p == 2 || (s as u64).is_multiple_of(p) {
            return Err(Error::UnsupportedCharacteristic { p, s });
        }
    }
    Ok(())
}

/// Classifies `P` on the curve `F = 0`: not-on-curve, smooth, node, or
/// degenerate singularity, by exact gradient and local quadratic part.
pub fn classify_point(f: &Form, p: &ProjPoint) -> Result<SingularityVerdict> {
    classify_in_chart(f, p, p.chart())
}

/// Same verdict computed in a prescribed affine chart; `P` must have a
/// nonzero coordinate there. Used to check chart independence.
pub fn classify_in_chart(f: &Form, p: &ProjPoint, chart: usize) -> Result<SingularityVerdict> {
    check_characteristic(f.kind(), f.degree())?;
    if f.degree() == 0 {
        return Err(Error::DegreeTooSmall(0));
    }
    if p.coords()[chart].is_zero() {
        return Err(Error::Shape(format!("point has zero coordinate {chart}")));
    }
    // normalize the representative so the chart coordinate is 1
    let inv = p.coords()[chart].clone();
    let rep: Vec<Scalar> = p.coords().iter().map(|c| c.div(&inv).unwrap()).collect();
    let q = ProjPoint {
        coords: [rep[0].clone(), rep[1].clone(), rep[2].clone()],
    };

    let (dx, dy, dz) = f.partials()?;
    let gradient = [dx.evaluate(&q)?, dy.evaluate(&q)?, dz.evaluate(&q)?];
    let value = f.evaluate(&q)?;
    if !value.is_zero() {
        return Ok(SingularityVerdict {
            kind: SingularityKind::NotOnCurve,
            gradient,
            discriminant: None,
            chart: None,
        });
    }
    if gradient.iter().any(|g| !g.is_zero()) {
        return Ok(SingularityVerdict {
            kind: SingularityKind::SmoothPoint,
            gradient,
            discriminant: None,
            chart: None,
        });
    }
    // Local quadratic part in the chart: with the chart coordinate frozen at
    // 1, the Taylor coefficients at q are the homogeneous second partials in
    // the two affine variables, and B^2 - 4AC = f_uv^2 - f_uu f_vv.
    let (u, v) = match chart {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let part = |idx: usize| -> Result<Form> {
        let parts = f.partials()?;
        Ok(match idx {
            0 => parts.0,
            1 => parts.1,
            _ => parts.2,
        })
    };
    let fu = part(u)?;
    let (fuu, fuv) = {
        let parts = fu.partials()?;
        let fuu = match u {
            0 => parts.0.clone(),
            1 => parts.1.clone(),
            _ => parts.2.clone(),
        };
        let fuv = match v {
            0 => parts.0,
            1 => parts.1,
            _ => parts.2,
        };
        (fuu, fuv)
    };
    let fv = part(v)?;
    let fvv = {
        let parts = fv.partials()?;
        match v {
            0 => parts.0,
            1 => parts.1,
            _ => parts.2,
        }
    };
    let a = fuu.evaluate(&q)?;
    let b = fuv.evaluate(&q)?;
    let c = fvv.evaluate(&q)?;
    let disc = b.mul(&b)?.sub(&a.mul(&c)?)?;
    let kind = if disc.is_zero() {
        SingularityKind::DegenerateSingularity
    } else {
        SingularityKind::Node
    };
    Ok(SingularityVerdict {
        kind,
        gradient,
        discriminant: Some(disc),
        chart: Some(chart),
    })
}

// ---------------------------------------------------------------------------
// exhaustive prime-field scan
// ---------------------------------------------------------------------------

/// All points of P^2(F_p) where F and its three partials vanish, canonically
/// sorted. Exhaustive over the p^2 + p + 1 rational points.
pub fn singular_scan_fp(f: &Form) -> Result<Vec<ProjPoint>> {
    let FieldKind::Fp(p) = f.kind() else {
        return Err(Error::NotPrimeField);
    };
    if p > 1 << 16 {
        return Err(Error::BadModulus(p));
    }
    let (dx, dy, dz) = f.partials()?;
    let compiled: Vec<CompiledFp> = [f, &dx, &dy, &dz]
        .iter()
        .map(|g| CompiledFp::new(g))
        .collect();
    let s = f.degree() as usize;
    let mut out = Vec::new();
    let mut pow_x = vec![1u64; s + 1];
    let mut pow_y = vec![1u64; s + 1];
    let mut check = |x: u64, y: u64, z: u64, out: &mut Vec<ProjPoint>| {
        for i in 1..=s {
            pow_x[i] = pow_x[i - 1] * x % p;
            pow_y[i] = pow_y[i - 1] * y % p;
        }
        // z is 0 or 1 in all enumerated representatives
        let all_zero = compiled.iter().all(|g| g.eval(&pow_x, &pow_y, z, p) == 0);
        if all_zero {
            out.push(
                ProjPoint::new([
                    Scalar::Fp(FpElem {
                        value: x,
                        modulus: p,
                    }),
                    Scalar::Fp(FpElem {
                        value: y,
                        modulus: p,
                    }),
                    Scalar::Fp(FpElem {
                        value: z,
                        modulus: p,
                    }),
                ])
                .expect("nonzero representative"),
            );
        }
    };
    for x in 0..p {
        for y in 0..p {
            check(x, y, 1, &mut out);
        }
    }
    for x in 0..p {
        check(x, 1, 0, &mut out);
    }
    check(1, 0, 0, &mut out);
    out.sort_by(|a, b| a.canonical_cmp(b));
    Ok(out)
}

/// Sparse compiled view of an Fp form for the scan inner loop.
struct CompiledFp {
    terms: Vec<(usize, usize, u32, u64)>, // (a, b, c, coeff)
}

impl CompiledFp {
    fn new(f: &Form) -> CompiledFp {
        let mut terms = Vec::new();
        for (i, &(a, b, c)) in monomials(f.degree()).iter().enumerate() {
            let coeff = f.coeffs()[i].as_fp().expect("fp form").value;
            if coeff != 0 {
                terms.push((a as usize, b as usize, c, coeff));
            }
        }
        CompiledFp { terms }
    }

    fn eval(&self, pow_x: &[u64], pow_y: &[u64], z: u64, p: u64) -> u64 {
        let mut acc = 0u64;
        for &(a, b, c, coeff) in &self.terms {
            if z == 0 && c > 0 {
                continue;
            }
            // p < 2^16 so products of two residues fit u64 comfortably
            acc = (acc + coeff * (pow_x[a] * pow_y[b] % p)) % p;
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// squarefreeness via bivariate gcd
// ---------------------------------------------------------------------------

/// True iff the rational form has no repeated factor. Decided by bivariate
/// content/primitive-part gcds of two dehomogenizations with their partials.
pub fn is_squarefree(f: &Form) -> Result<bool> {
    if f.degree() == 0 {
        return Err(Error::DegreeTooSmall(0));
    }
    if f.kind() != FieldKind::Rational {
        return Err(Error::UnsupportedField(f.kind()));
    }
    if f.is_zero() {
        return Ok(false);
    }
    // chart z = 1 misses only factors equal to z itself; chart x = 1 covers
    // those, so a repeated factor is visible in at least one chart.
    for chart in [2usize, 0usize] {
        let g = bipoly::dehomogenize(f, chart);
        if !bipoly::is_squarefree_bivariate(&g) {
            return Ok(false);
        }
    }
    Ok(true)
}

mod bipoly {
    //! Polynomials in Q[u][v] with exact content / primitive-part gcds.

    use super::*;

    /// coeffs[j] is the coefficient of v^j, a polynomial in u.
    #[derive(Clone, Debug, PartialEq)]
    pub struct BiPoly {
        coeffs: Vec<QPoly>,
    }

    impl BiPoly {
        pub fn new(mut coeffs: Vec<QPoly>) -> BiPoly {
            while coeffs.last().is_some_and(QPoly::is_zero) {
                coeffs.pop();
            }
            BiPoly { coeffs }
        }

        pub fn is_zero(&self) -> bool {
            self.coeffs.is_empty()
        }

        pub fn deg_v(&self) -> Option<usize> {
            self.coeffs.len().checked_sub(1)
        }

        fn lead(&self) -> &QPoly {
            self.coeffs.last().expect("nonzero")
        }

        pub fn is_constant(&self) -> bool {
            match self.coeffs.len() {
                0 => true,
                1 => self.coeffs[0].is_constant(),
                _ => false,
            }
        }

        fn scale_qpoly(&self, q: &QPoly) -> BiPoly {
            BiPoly::new(self.coeffs.iter().map(|c| c.mul(q)).collect())
        }

        fn sub(&self, other: &BiPoly) -> BiPoly {
            let n = self.coeffs.len().max(other.coeffs.len());
            let mut out = vec![QPoly::zero(); n];
            for (i, c) in self.coeffs.iter().enumerate() {
                out[i] = out[i].add(c);
            }
            for (i, c) in other.coeffs.iter().enumerate() {
                out[i] = out[i].sub(c);
            }
            BiPoly::new(out)
        }

        fn shift_v(&self, k: usize) -> BiPoly {
            if self.is_zero() {
                return self.clone();
            }
            let mut out = vec![QPoly::zero(); k];
            out.extend(self.coeffs.iter().cloned());
            BiPoly::new(out)
        }

        /// gcd of the u-coefficients (monic).
        pub fn content(&self) -> QPoly {
            let mut g = QPoly::zero();
            for c in &self.coeffs {
                g = g.gcd(c);
                if g.is_constant() && !g.is_zero() {
                    break;
                }
            }
            g
        }

        pub fn primitive_part(&self) -> BiPoly {
            if self.is_zero() {
                return self.clone();
            }
            let c = self.content();
            BiPoly::new(
                self.coeffs
                    .iter()
                    .map(|q| q.exact_div(&c).expect("content divides"))
                    .collect(),
            )
        }

        pub fn derivative_v(&self) -> BiPoly {
            if self.coeffs.len() <= 1 {
                return BiPoly::new(Vec::new());
            }
            BiPoly::new(
                self.coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(i, c)| c.scale(&BigRational::from(BigInt::from(i))))
                    .collect(),
            )
        }

        pub fn derivative_u(&self) -> BiPoly {
            BiPoly::new(self.coeffs.iter().map(QPoly::derivative).collect())
        }
    }

    /// Pseudo-remainder of f by g (g nonzero), degrees taken in v.
    fn pseudo_rem(f: &BiPoly, g: &BiPoly) -> BiPoly {
        let dg = g.deg_v().expect("nonzero divisor");
        let mut r = f.clone();
        while let Some(dr) = r.deg_v() {
            if dr < dg {
                break;
            }
            let shifted = g.scale_qpoly(r.lead()).shift_v(dr - dg);
            r = r.scale_qpoly(g.lead()).sub(&shifted);
            debug_assert!(r.deg_v().is_none_or(|d| d < dr));
        }
        r
    }

    /// Primitive-PRS bivariate gcd, including content.
    pub fn gcd(f: &BiPoly, g: &BiPoly) -> BiPoly {
        if f.is_zero() {
            return g.clone();
        }
        if g.is_zero() {
            return f.clone();
        }
        let content = f.content().gcd(&g.content());
        let mut a = f.primitive_part();
        let mut b = g.primitive_part();
        if a.deg_v() < b.deg_v() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = pseudo_rem(&a, &b);
            a = b;
            b = if r.is_zero() { r } else { r.primitive_part() };
        }
        a.primitive_part().scale_qpoly(&content)
    }

    /// Bivariate squarefreeness over Q: gcd(f, f_u, f_v) is constant.
    pub fn is_squarefree_bivariate(f: &BiPoly) -> bool {
        if f.is_zero() {
            return false;
        }
        if f.is_constant() {
            return true;
        }
        let g = gcd(&gcd(f, &f.derivative_u()), &f.derivative_v());
        g.is_constant()
    }

    /// Dehomogenization: chart 2 sets z = 1 giving a polynomial in (u, v) =
    /// (x, y); chart 0 sets x = 1 giving (u, v) = (y, z).
    pub fn dehomogenize(f: &Form, chart: usize) -> BiPoly {
        let s = f.degree();
        let mut by_v: Vec<Vec<BigRational>> =
            vec![vec![BigRational::zero(); s as usize + 1]; s as usize + 1];
        for (i, &(a, b, c)) in monomials(s).iter().enumerate() {
            let coeff = f.coeffs()[i].as_rat().expect("rational form").clone();
            if coeff.is_zero() {
                continue;
            }
            let (u, v) = match chart {
                2 => (a, b),
                0 => (b, c),
                _ => unreachable!("charts used: z and x"),
            };
            by_v[v as usize][u as usize] += coeff;
        }
        BiPoly::new(by_v.into_iter().map(QPoly::new).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn q(kind: FieldKind) -> FieldKind {
        kind
    }

    fn pt(x: i64, y: i64, z: i64) -> ProjPoint {
        ProjPoint::from_ints(x, y, z, FieldKind::Rational).unwrap()
    }

    /// y^2 z - x^3 - x^2 z: nodal cubic with its only node at (0:0:1).
    fn nodal_cubic(kind: FieldKind) -> Form {
        Form::from_terms(3, &[(0, 2, 1, 1), (3, 0, 0, -1), (2, 0, 1, -1)], kind)
    }

    /// y^2 z - x^3: cuspidal cubic.
    fn cuspidal_cubic(kind: FieldKind) -> Form {
        Form::from_terms(3, &[(0, 2, 1, 1), (3, 0, 0, -1)], kind)
    }

    #[test]
    fn monomial_order_is_graded_lex() {
        assert_eq!(
            monomials(2),
            vec![
                (2, 0, 0),
                (1, 1, 0),
                (1, 0, 1),
                (0, 2, 0),
                (0, 1, 1),
                (0, 0, 2)
            ]
        );
        for (i, &(a, b, _)) in monomials(5).iter().enumerate() {
            assert_eq!(monomial_index(5, a, b), i);
        }
    }

    #[test]
    fn partials_of_simple_forms() {
        let f = Form::from_terms(2, &[(2, 0, 0, 1)], FieldKind::Rational); // x^2
        let (dx, dy, dz) = f.partials().unwrap();
        assert_eq!(
            dx,
            Form::from_terms(1, &[(1, 0, 0, 2)], FieldKind::Rational)
        );
        assert!(dy.is_zero() && dz.is_zero());

        let f = Form::from_terms(3, &[(1, 1, 1, 1)], FieldKind::Rational); // xyz
        let (dx, dy, dz) = f.partials().unwrap();
        assert_eq!(
            dx,
            Form::from_terms(2, &[(0, 1, 1, 1)], FieldKind::Rational)
        );
        assert_eq!(
            dy,
            Form::from_terms(2, &[(1, 0, 1, 1)], FieldKind::Rational)
        );
        assert_eq!(
            dz,
            Form::from_terms(2, &[(1, 1, 0, 1)], FieldKind::Rational)
        );

        assert!(matches!(
            Form::from_terms(0, &[(0, 0, 0, 5)], FieldKind::Rational).partials(),
            Err(Error::DegreeTooSmall(0))
        ));
    }

    fn euler_combination(f: &Form) -> Form {
        // x f_x + y f_y + z f_z as a form of the same degree
        let (dx, dy, dz) = f.partials().unwrap();
        let x = Form::from_terms(1, &[(1, 0, 0, 1)], f.kind());
        let y = Form::from_terms(1, &[(0, 1, 0, 1)], f.kind());
        let z = Form::from_terms(1, &[(0, 0, 1, 1)], f.kind());
        x.mul(&dx)
            .unwrap()
            .add(&y.mul(&dy).unwrap())
            .unwrap()
            .add(&z.mul(&dz).unwrap())
            .unwrap()
    }

    #[test]
    fn euler_relation_spot_check() {
        // F = x^3 + y^2 z: x F_x + y F_y + z F_z = 3 F
        let f = Form::from_terms(3, &[(3, 0, 0, 1), (0, 2, 1, 1)], FieldKind::Rational);
        let lhs = euler_combination(&f);
        let rhs = f.scale(&Scalar::from_int(3, FieldKind::Rational)).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn euler_relation_randomized() {
        let mut rng = SplitMix64::new(321);
        for _ in 0..60 {
            let s = 1 + (rng.next_below(8) as u32);
            let coeffs: Vec<Scalar> = (0..monomial_count(s))
                .map(|_| Scalar::from_int(rng.next_in_box(9), FieldKind::Rational))
                .collect();
            let f = Form::new(s, coeffs).unwrap();
            let lhs = euler_combination(&f);
            let rhs = f
                .scale(&Scalar::from_int(s as i64, FieldKind::Rational))
                .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn evaluation_examples() {
        let f = Form::from_terms(2, &[(0, 0, 2, 1)], FieldKind::Rational); // z^2
        assert_eq!(
            f.evaluate(&pt(0, 0, 1)).unwrap(),
            Scalar::from_int(1, FieldKind::Rational)
        );
        let circle = Form::from_terms(
            2,
            &[(2, 0, 0, 1), (0, 2, 0, 1), (0, 0, 2, -1)],
            FieldKind::Rational,
        );
        assert!(circle.evaluate(&pt(1, 0, 1)).unwrap().is_zero());
        let cusp_like = Form::from_terms(3, &[(3, 0, 0, 1), (0, 2, 1, -1)], FieldKind::Rational);
        assert!(cusp_like.evaluate(&pt(1, 1, 1)).unwrap().is_zero());
    }

    #[test]
    fn classify_node_cusp_and_off_curve() {
        let node = classify_point(&nodal_cubic(FieldKind::Rational), &pt(0, 0, 1)).unwrap();
        assert_eq!(node.kind, SingularityKind::Node);
        assert_eq!(
            node.discriminant,
            Some(Scalar::from_int(4, FieldKind::Rational))
        );

        let cusp = classify_point(&cuspidal_cubic(FieldKind::Rational), &pt(0, 0, 1)).unwrap();
        assert_eq!(cusp.kind, SingularityKind::DegenerateSingularity);
        assert_eq!(
            cusp.discriminant,
            Some(Scalar::from_int(0, FieldKind::Rational))
        );

        let sphere = Form::from_terms(
            2,
            &[(2, 0, 0, 1), (0, 2, 0, 1), (0, 0, 2, 1)],
            FieldKind::Rational,
        );
        let off = classify_point(&sphere, &pt(1, 0, 0)).unwrap();
        assert_eq!(off.kind, SingularityKind::NotOnCurve);
    }

    #[test]
    fn classify_is_chart_and_scaling_invariant() {
        // smooth point with two usable charts
        let circle = Form::from_terms(
            2,
            &[(2, 0, 0, 1), (0, 2, 0, 1), (0, 0, 2, -1)],
            FieldKind::Rational,
        );
        let p = pt(1, 0, 1);
        let v0 = classify_in_chart(&circle, &p, 0).unwrap();
        let v2 = classify_in_chart(&circle, &p, 2).unwrap();
        assert_eq!(v0.kind, v2.kind);

        // node with all three charts usable: the triangle of lines
        // (x - y)(y - z)(x + y - z) has an ordinary double point at the
        // vertex (1:1:1)
        let l1 = Form::from_terms(1, &[(1, 0, 0, 1), (0, 1, 0, -1)], FieldKind::Rational);
        let l2 = Form::from_terms(1, &[(0, 1, 0, 1), (0, 0, 1, -1)], FieldKind::Rational);
        let l3 = Form::from_terms(
            1,
            &[(1, 0, 0, 1), (0, 1, 0, 1), (0, 0, 1, -1)],
            FieldKind::Rational,
        );
        let triangle = l1.mul(&l2).unwrap().mul(&l3).unwrap();
        let vertex = pt(1, 1, 1);
        for chart in 0..3 {
            let v = classify_in_chart(&triangle, &vertex, chart).unwrap();
            assert_eq!(v.kind, SingularityKind::Node, "chart {chart}");
        }

        // scaling the representative and the form leaves the verdict fixed
        let f = nodal_cubic(FieldKind::Rational);
        let fs = f.scale(&Scalar::from_int(-7, FieldKind::Rational)).unwrap();
        let p = ProjPoint::new([
            Scalar::from_int(0, FieldKind::Rational),
            Scalar::from_int(0, FieldKind::Rational),
            Scalar::from_int(11, FieldKind::Rational),
        ])
        .unwrap();
        let v = classify_point(&fs, &p).unwrap();
        assert_eq!(v.kind, SingularityKind::Node);
    }

    #[test]
    fn classify_node_stable_under_coordinate_permutations() {
        let f = nodal_cubic(FieldKind::Rational);
        let p = pt(0, 0, 1);
        let perms = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        for perm in perms {
            let g = f.permute_vars(perm);
            let q = p.permute(perm);
            let v = classify_point(&g, &q).unwrap();
            assert_eq!(v.kind, SingularityKind::Node, "perm {perm:?}");
        }
    }

    #[test]
    fn classify_rejects_bad_characteristic() {
        let f = nodal_cubic(FieldKind::Fp(3)); // p = 3 divides s = 3
        assert!(matches!(
            classify_point(
                &f,
                &ProjPoint::from_ints(0, 0, 1, FieldKind::Fp(3)).unwrap()
            ),
            Err(Error::UnsupportedCharacteristic { .. })
        ));
    }

    #[test]
    fn scan_double_line_over_f5() {
        let f = Form::from_terms(2, &[(2, 0, 0, 1)], FieldKind::Fp(5)); // x^2
        let sing = singular_scan_fp(&f).unwrap();
        assert_eq!(sing.len(), 6); // the line x = 0 in P^2(F_5)
        for p in &sing {
            assert!(p.coords()[0].is_zero());
        }
    }

    #[test]
    fn scan_nodal_cubic_over_f101() {
        let f = nodal_cubic(FieldKind::Fp(101));
        let sing = singular_scan_fp(&f).unwrap();
        assert_eq!(sing.len(), 1);
        assert_eq!(
            sing[0],
            ProjPoint::from_ints(0, 0, 1, FieldKind::Fp(101)).unwrap()
        );
    }

    #[test]
    fn scan_smooth_conic_over_f7() {
        let f = Form::from_terms(
            2,
            &[(2, 0, 0, 1), (0, 2, 0, 1), (0, 0, 2, 1)],
            FieldKind::Fp(7),
        );
        assert!(singular_scan_fp(&f).unwrap().is_empty());
    }

    #[test]
    fn scan_requires_prime_field() {
        let f = Form::from_terms(2, &[(2, 0, 0, 1)], FieldKind::Rational);
        assert!(matches!(singular_scan_fp(&f), Err(Error::NotPrimeField)));
        // moduli above 2^16 are rejected for exhaustive scans
        let big = Form::from_terms(2, &[(2, 0, 0, 1)], FieldKind::Fp(65537));
        assert!(matches!(singular_scan_fp(&big), Err(Error::BadModulus(_))));
    }

    #[test]
    fn euler_implies_scan_membership_small_primes() {
        // vanishing of the three partials forces F(P) = 0 when p does not
        // divide s; verified exhaustively for small primes
        let mut rng = SplitMix64::new(9);
        for p in [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
            for _ in 0..3 {
                let s = loop {
                    let s = 1 + (rng.next_below(4) as u32);
                    if !(s as u64).is_multiple_of(p) {
                        break s;
                    }
                };
                let kind = FieldKind::Fp(p);
                let coeffs: Vec<Scalar> = (0..monomial_count(s))
                    .map(|_| Scalar::from_int(rng.next_in_box(20), kind))
                    .collect();
                let f = Form::new(s, coeffs).unwrap();
                if f.is_zero() {
                    continue;
                }
                let (dx, dy, dz) = f.partials().unwrap();
                for q in all_points_fp(p) {
                    let grads_vanish = dx.evaluate(&q).unwrap().is_zero()
                        && dy.evaluate(&q).unwrap().is_zero()
                        && dz.evaluate(&q).unwrap().is_zero();
                    if grads_vanish {
                        assert!(f.evaluate(&q).unwrap().is_zero());
                    }
                }
            }
        }
    }

    fn all_points_fp(p: u64) -> Vec<ProjPoint> {
        let kind = FieldKind::Fp(p);
        let mut pts = Vec::new();
        for x in 0..p as i64 {
            for y in 0..p as i64 {
                pts.push(ProjPoint::from_ints(x, y, 1, kind).unwrap());
            }
        }
        for x in 0..p as i64 {
            pts.push(ProjPoint::from_ints(x, 1, 0, kind).unwrap());
        }
        pts.push(ProjPoint::from_ints(1, 0, 0, kind).unwrap());
        pts
    }

    #[test]
    fn squarefree_detection() {
        let k = q(FieldKind::Rational);
        let x2y = Form::from_terms(3, &[(2, 1, 0, 1)], k);
        assert!(!is_squarefree(&x2y).unwrap());
        let xyz = Form::from_terms(3, &[(1, 1, 1, 1)], k);
        assert!(is_squarefree(&xyz).unwrap());
        assert!(is_squarefree(&nodal_cubic(k)).unwrap());
        // z^2 * x: repeated factor visible only in the x-chart
        let z2x = Form::from_terms(3, &[(1, 0, 2, 1)], k);
        assert!(!is_squarefree(&z2x).unwrap());
    }

    #[test]
    fn point_normalization_and_order() {
        let p = ProjPoint::from_ints(2, 4, 2, FieldKind::Rational).unwrap();
        assert_eq!(p, pt(1, 2, 1));
        let wire = p.to_wire();
        assert_eq!(wire, ["1".to_string(), "2".to_string(), "1".to_string()]);
        assert!(ProjPoint::from_ints(0, 0, 0, FieldKind::Rational).is_err());
        // last nonzero coordinate normalized to 1
        let q = ProjPoint::from_ints(3, 6, 0, FieldKind::Rational).unwrap();
        assert_eq!(
            q.to_wire(),
            ["1/2".to_string(), "1".to_string(), "0".to_string()]
        );
    }

    #[test]
    fn form_json_round_trip() {
        let f = nodal_cubic(FieldKind::Rational);
        let json = serde_json::to_string(&f).unwrap();
        let back: Form = serde_json::from_str(&json).unwrap();
        assert_eq!(f, back);
        let fp = nodal_cubic(FieldKind::Fp(101));
        let json = serde_json::to_string(&fp).unwrap();
        assert!(json.contains("fp:101"));
        let back: Form = serde_json::from_str(&json).unwrap();
        assert_eq!(fp, back);
    }
}
