//! Limits of Grassmannian and flag images along one-parameter families of
//! configurations. The minors of the moving condition matrix are exact
//! polynomials in the parameter t; dividing the whole vector by the smallest
//! power of (t - t*) and evaluating at t* produces the limit point, an
//! explicit boundary (or interior) point of the compactified image.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::de::Error as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{monomials, ProjPoint};
use crate::grassmann::{
    gamma, reconstruct_rows, reconstruct_subspace, rowspace_contained, Decomposability,
    PluckerPoint,
};
use crate::linsys::{condition_matrix, PointConfig};
use crate::matrix::Matrix;
use crate::qpoly::QPoly;
use crate::scalar::Scalar;

/// A moving configuration: d point paths with polynomial coordinates in t,
/// plus the parameter value where the limit is taken. Paths are stored with
/// their polynomial content removed, so every path has a well-defined
/// projective value at every parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyConfig {
    paths: Vec<[QPoly; 3]>,
    t_star: BigRational,
}

impl FamilyConfig {
    pub fn new(paths: Vec<[QPoly; 3]>, t_star: BigRational) -> Result<FamilyConfig> {
        if paths.is_empty() {
            return Err(Error::Shape("family needs at least one path".into()));
        }
        let mut cleaned = Vec::with_capacity(paths.len());
        for (i, path) in paths.into_iter().enumerate() {
            if path.iter().all(QPoly::is_zero) {
                return Err(Error::ZeroPath(i));
            }
            // remove the polynomial gcd of the triple: afterwards the three
            // coordinates share no root, so the path never hits (0,0,0)
            let g = path[0].gcd(&path[1]).gcd(&path[2]);
            let reduced: Vec<QPoly> = path
                .iter()
                .map(|p| p.exact_div(&g).expect("gcd divides"))
                .collect();
            // scalar content normalization: the coefficients of the whole
            // triple become coprime integers
            let rats: Vec<BigRational> = reduced
                .iter()
                .flat_map(|p| p.coeffs().iter().cloned())
                .collect();
            let ints = crate::scalar::primitive_integer_vector(&rats).expect("nonzero path");
            let idx = rats
                .iter()
                .position(|c| !c.is_zero())
                .expect("nonzero path");
            let mult = BigRational::from(ints[idx].clone()) / &rats[idx];
            let normalized: Vec<QPoly> = reduced.iter().map(|p| p.scale(&mult)).collect();
            cleaned.push([
                normalized[0].clone(),
                normalized[1].clone(),
                normalized[2].clone(),
            ]);
        }
        let fam = FamilyConfig {
            paths: cleaned,
            t_star,
        };
        // generic distinctness: pairwise distinct at some tested rational t
        let probes = [
            BigRational::new(BigInt::from(17), BigInt::from(13)),
            BigRational::from_integer(101.into()),
            BigRational::new(BigInt::from(-7), BigInt::from(3)),
        ];
        if !probes.iter().any(|t| fam.specialize(t).is_ok()) {
            return Err(Error::FamilyNotGenericallyDistinct);
        }
        Ok(fam)
    }

    /// Constant family at a static configuration.
    pub fn constant(cfg: &PointConfig) -> Result<FamilyConfig> {
        let paths = cfg
            .points()
            .iter()
            .map(|p| {
                let c = |i: usize| -> Result<QPoly> {
                    Ok(QPoly::constant(p.coords()[i].as_rat()?.clone()))
                };
                Ok([c(0)?, c(1)?, c(2)?])
            })
            .collect::<Result<Vec<_>>>()?;
        FamilyConfig::new(paths, BigRational::zero())
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn paths(&self) -> &[[QPoly; 3]] {
        &self.paths
    }

    pub fn t_star(&self) -> &BigRational {
        &self.t_star
    }

    pub fn with_t_star(mut self, t_star: BigRational) -> FamilyConfig {
        self.t_star = t_star;
        self
    }

    /// Family of the first `len` paths.
    pub fn prefix(&self, len: usize) -> FamilyConfig {
        FamilyConfig {
            paths: self.paths[..len].to_vec(),
            t_star: self.t_star.clone(),
        }
    }

    /// Reorders the paths (the flag side is order-sensitive).
    pub fn permuted(&self, perm: &[usize]) -> Result<FamilyConfig> {
        if perm.len() != self.paths.len() {
            return Err(Error::Shape("permutation length mismatch".into()));
        }
        Ok(FamilyConfig {
            paths: perm.iter().map(|&i| self.paths[i].clone()).collect(),
            t_star: self.t_star.clone(),
        })
    }

    /// Substitutes t -> inner(t) in every path (reparameterization).
    pub fn reparameterize(&self, inner: &QPoly) -> Result<FamilyConfig> {
        let paths = self
            .paths
            .iter()
            .map(|p| {
                [
                    p[0].compose(inner),
                    p[1].compose(inner),
                    p[2].compose(inner),
                ]
            })
            .collect();
        FamilyConfig::new(paths, self.t_star.clone())
    }

    /// The static configuration at a parameter value; errors if two points
    /// collide there (the family leaves the configuration space).
    pub fn specialize(&self, t: &BigRational) -> Result<PointConfig> {
        let points = self
            .paths
            .iter()
            .map(|p| ProjPoint::from_rationals(p[0].eval(t), p[1].eval(t), p[2].eval(t)))
            .collect::<Result<Vec<_>>>()?;
        PointConfig::ordered(points)
    }
}

impl Serialize for FamilyConfig {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let paths: Vec<[Vec<String>; 3]> = self
            .paths
            .iter()
            .map(|p| {
                let enc = |q: &QPoly| -> Vec<String> {
                    q.coeffs()
                        .iter()
                        .map(crate::scalar::format_rational)
                        .collect()
                };
                [enc(&p[0]), enc(&p[1]), enc(&p[2])]
            })
            .collect();
        let mut st = ser.serialize_struct("FamilyConfig", 2)?;
        st.serialize_field("paths", &paths)?;
        st.serialize_field("t_star", &crate::scalar::format_rational(&self.t_star))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for FamilyConfig {
    fn deserialize<D: serde::Deserializer<'de>>(
        de: D,
    ) -> std::result::Result<FamilyConfig, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            paths: Vec<[Vec<String>; 3]>,
            #[serde(default)]
            t_star: Option<String>,
        }
        let w = Wire::deserialize(de)?;
        let dec = |v: &[String]| -> Result<QPoly> {
            Ok(QPoly::new(
                v.iter()
                    .map(|s| crate::scalar::parse_rational(s))
                    .collect::<Result<Vec<_>>>()?,
            ))
        };
        let paths = w
            .paths
            .iter()
            .map(|p| Ok([dec(&p[0])?, dec(&p[1])?, dec(&p[2])?]))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        let t_star = match &w.t_star {
            Some(s) => crate::scalar::parse_rational(s).map_err(D::Error::custom)?,
            None => BigRational::zero(),
        };
        FamilyConfig::new(paths, t_star).map_err(D::Error::custom)
    }
}

/// Condition matrix of the moving configuration, with entries in Q[t].
/// Specializing t commutes with building the static condition matrix.
pub fn condition_matrix_t(s: u32, fam: &FamilyConfig) -> Result<Matrix> {
    if s == 0 {
        return Err(Error::DegreeTooSmall(0));
    }
    let mons = monomials(s);
    let mut rows: Vec<Vec<Scalar>> = Vec::with_capacity(3 * fam.len());
    for path in fam.paths() {
        // powers of the three coordinate polynomials
        let pow = |q: &QPoly| -> Vec<QPoly> {
            let mut v = Vec::with_capacity(s as usize + 1);
            v.push(QPoly::constant(BigRational::from_integer(1.into())));
            for i in 0..s as usize {
                let next = v[i].mul(q);
                v.push(next);
            }
            v
        };
        let px = pow(&path[0]);
        let py = pow(&path[1]);
        let pz = pow(&path[2]);
        for axis in 0..3usize {
            let mut row = Vec::with_capacity(mons.len());
            for &(a, b, c) in &mons {
                let (e, ea, eb, ec) = match axis {
                    0 => (a, a.wrapping_sub(1), b, c),
                    1 => (b, a, b.wrapping_sub(1), c),
                    _ => (c, a, b, c.wrapping_sub(1)),
                };
                if e == 0 {
                    row.push(Scalar::Poly(QPoly::zero()));
                    continue;
                }
                let v = px[ea as usize]
                    .mul(&py[eb as usize])
                    .mul(&pz[ec as usize])
                    .scale(&BigRational::from_integer((e as i64).into()));
                row.push(Scalar::Poly(v));
            }
            rows.push(row);
        }
    }
    Matrix::from_rows(rows)
}

/// Which collision constraints a limit satisfies: for each point where two
/// or more paths meet at t*, whether every member of the limit system is
/// singular there.
#[derive(Clone, Debug, Serialize)]
pub struct CollisionDiagnostic {
    pub point: ProjPoint,
    pub colliding_paths: Vec<usize>,
    pub limit_singular_at_point: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitGammaReport {
    pub limit: PluckerPoint,
    /// Minimal (t - t*)-adic valuation among the nonzero raw minors.
    pub vanishing_order: usize,
    pub decomposable: bool,
    /// Equality with the static gamma when the specialized points stay
    /// distinct at t*; `None` when the family genuinely collides.
    pub interior_consistent: Option<bool>,
    pub collisions: Vec<CollisionDiagnostic>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitFlagReport {
    pub k: u32,
    pub chain: Vec<LimitGammaReport>,
    pub nesting_holds: bool,
}

/// Limit of the gamma image along the family: compute all maximal minors of
/// the moving condition matrix as polynomials, strip the common power of
/// (t - t*), evaluate, and normalize.
pub fn limit_gamma(fam: &FamilyConfig, k: u32) -> Result<LimitGammaReport> {
    let d = fam.len();
    let m = condition_matrix_t(k, fam)?;
    let rank = m.rank()?;
    if rank != 3 * d {
        return Err(Error::DegenerateFamily {
            rank,
            expected: 3 * d,
        });
    }
    let minors = m.maximal_minors()?;
    let t_star = fam.t_star();
    let mut v_min: Option<usize> = None;
    let mut polys: Vec<QPoly> = Vec::with_capacity(minors.len());
    for sc in &minors {
        let p = sc.as_poly()?.clone();
        if let Some(v) = p.valuation_at(t_star) {
            v_min = Some(v_min.map_or(v, |cur| cur.min(v)));
        }
        polys.push(p);
    }
    let v = v_min.expect("full-rank matrix has a nonzero minor");
    let shift = QPoly::new(vec![-t_star.clone(), BigRational::from_integer(1.into())]);
    let mut divisor = QPoly::constant(BigRational::from_integer(1.into()));
    for _ in 0..v {
        divisor = divisor.mul(&shift);
    }
    let dense: Vec<Scalar> = polys
        .iter()
        .map(|p| {
            if p.is_zero() {
                return Ok(Scalar::Rat(BigRational::zero()));
            }
            let reduced = p.exact_div(&divisor)?;
            Ok(Scalar::Rat(reduced.eval(t_star)))
        })
        .collect::<Result<Vec<_>>>()?;
    let limit = PluckerPoint::from_dense(k, d as u32, &dense)?;
    let (_, verdict) = reconstruct_subspace(&limit)?;

    // interior consistency and collision diagnostics
    let interior_consistent = match fam.specialize(t_star) {
        Ok(cfg) => Some(gamma(&cfg, k)? == limit),
        Err(_) => None,
    };
    let collisions = collision_diagnostics(fam, k, &limit)?;
    Ok(LimitGammaReport {
        limit,
        vanishing_order: v,
        decomposable: verdict == Decomposability::Decomposable,
        interior_consistent,
        collisions,
    })
}

fn collision_diagnostics(
    fam: &FamilyConfig,
    k: u32,
    limit: &PluckerPoint,
) -> Result<Vec<CollisionDiagnostic>> {
    let t_star = fam.t_star();
    let points: Vec<ProjPoint> = fam
        .paths()
        .iter()
        .map(|p| ProjPoint::from_rationals(p[0].eval(t_star), p[1].eval(t_star), p[2].eval(t_star)))
        .collect::<Result<Vec<_>>>()?;
    let mut groups: Vec<(ProjPoint, Vec<usize>)> = Vec::new();
    for (i, pt) in points.iter().enumerate() {
        match groups.iter_mut().find(|(q, _)| q == pt) {
            Some((_, idxs)) => idxs.push(i),
            None => groups.push((pt.clone(), vec![i])),
        }
    }
    let rows = reconstruct_rows(limit)?;
    let mut out = Vec::new();
    for (pt, idxs) in groups.into_iter().filter(|(_, idxs)| idxs.len() >= 2) {
        let static_cfg = PointConfig::unordered(vec![pt.clone()])?;
        let conds = condition_matrix(k, &static_cfg)?;
        // members of the limit system are singular at the collision point
        // iff the 3 static condition rows lie inside the annihilator
        let contained = rowspace_contained(&conds, &rows)?;
        out.push(CollisionDiagnostic {
            point: pt,
            colliding_paths: idxs,
            limit_singular_at_point: contained,
        });
    }
    Ok(out)
}

/// Limit of the flag image: the limit of every prefix, plus a check that the
/// limit annihilators still nest.
pub fn limit_flag(fam: &FamilyConfig, k: u32) -> Result<LimitFlagReport> {
    let d = fam.len();
    let mut chain = Vec::with_capacity(d);
    for i in 1..=d {
        let report = limit_gamma(&fam.prefix(i), k).map_err(|e| match e {
            Error::DegenerateFamily { rank, expected } => Error::DegeneratePrefix {
                len: i,
                rank,
                expected,
            },
            other => other,
        })?;
        chain.push(report);
    }
    let mut nesting_holds = true;
    for w in chain.windows(2) {
        let small = reconstruct_rows(&w[0].limit)?;
        let large = reconstruct_rows(&w[1].limit)?;
        nesting_holds &= rowspace_contained(&small, &large)?;
    }
    Ok(LimitFlagReport {
        k,
        chain,
        nesting_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linsys::{stratum_sample, StratumKind, StratumSpec};
    use crate::scalar::FieldKind;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn poly(coeffs: &[i64]) -> QPoly {
        QPoly::from_ints(coeffs)
    }

    fn pt(x: i64, y: i64, z: i64) -> ProjPoint {
        ProjPoint::from_ints(x, y, z, FieldKind::Rational).unwrap()
    }

    /// P1 = (0:0:1) fixed, P2 = (t:0:1) colliding into it at t = 0.
    fn collision_family() -> FamilyConfig {
        FamilyConfig::new(
            vec![
                [poly(&[0]), poly(&[0]), poly(&[1])],
                [poly(&[0, 1]), poly(&[0]), poly(&[1])],
            ],
            q(0),
        )
        .unwrap()
    }

    #[test]
    fn specialization_commutes_with_condition_matrix() {
        let fam = FamilyConfig::new(vec![[poly(&[0, 1]), poly(&[0]), poly(&[1])]], q(0)).unwrap();
        let mt = condition_matrix_t(2, &fam).unwrap();
        let at_one = fam.specialize(&q(1)).unwrap();
        let m1 = condition_matrix(2, &at_one).unwrap();
        for r in 0..mt.rows() {
            for c in 0..mt.cols() {
                let spec = mt.entry(r, c).as_poly().unwrap().eval(&q(1));
                assert_eq!(&Scalar::Rat(spec), m1.entry(r, c));
            }
        }
    }

    #[test]
    fn constant_family_matches_static_matrix() {
        let cfg = PointConfig::ordered(vec![pt(2, -1, 1), pt(0, 3, 1)]).unwrap();
        let fam = FamilyConfig::constant(&cfg).unwrap();
        let mt = condition_matrix_t(3, &fam).unwrap();
        let m = condition_matrix(3, &cfg).unwrap();
        for r in 0..mt.rows() {
            for c in 0..mt.cols() {
                let p = mt.entry(r, c).as_poly().unwrap();
                assert!(p.is_constant());
                let v = p
                    .coeffs()
                    .first()
                    .cloned()
                    .unwrap_or_else(BigRational::zero);
                assert_eq!(&Scalar::Rat(v), m.entry(r, c));
            }
        }
    }

    #[test]
    fn moving_pair_has_full_generic_rank() {
        let fam = FamilyConfig::new(
            vec![
                [poly(&[0]), poly(&[0]), poly(&[1])],
                [poly(&[0, 1]), poly(&[0]), poly(&[1])],
            ],
            q(0),
        )
        .unwrap();
        let m = condition_matrix_t(3, &fam).unwrap();
        assert_eq!((m.rows(), m.cols()), (6, 10));
        assert_eq!(m.rank().unwrap(), 6);
    }

    #[test]
    fn interior_limit_equals_static_gamma() {
        // the path never collides with anything: the limit at t* = 0 is the
        // plain gamma of the specialized point
        let fam = FamilyConfig::new(vec![[poly(&[0, 1]), poly(&[0]), poly(&[1])]], q(0)).unwrap();
        let rep = limit_gamma(&fam, 2).unwrap();
        assert_eq!(rep.interior_consistent, Some(true));
        assert!(rep.decomposable);
        let static_gamma = gamma(&PointConfig::unordered(vec![pt(0, 0, 1)]).unwrap(), 2).unwrap();
        assert_eq!(rep.limit, static_gamma);
    }

    #[test]
    fn collision_limit_is_decomposable_and_contains_double_point_conditions() {
        let fam = collision_family();
        let rep = limit_gamma(&fam, 3).unwrap();
        assert!(rep.decomposable);
        assert_eq!(rep.interior_consistent, None); // genuine collision
        assert_eq!(rep.collisions.len(), 1);
        assert!(rep.collisions[0].limit_singular_at_point);
        assert_eq!(rep.collisions[0].colliding_paths, vec![0, 1]);
        // the limit subspace has the generic corank: kernel dimension 4
        let rows = reconstruct_rows(&rep.limit).unwrap();
        assert_eq!(rows.kernel_basis().unwrap().len(), 4);
    }

    #[test]
    fn collision_limit_matches_hand_derived_system() {
        // Expanding the three condition functionals of the moving point
        // (t : 0 : 1) in t (with the static conditions at (0:0:1) already
        // imposed) kills, in the limit, exactly the coefficients of
        // z^3, xz^2, yz^2, x^2 z, xyz, x^3: the limit system is
        // span{y^2 z, x^2 y, x y^2, y^3}. The mirrored family approaching
        // along the y-axis gives the x-mirrored span, so the boundary point
        // remembers the direction of approach.
        let rep = limit_gamma(&collision_family(), 3).unwrap();
        let rows = reconstruct_rows(&rep.limit).unwrap();
        let kernel: Vec<crate::forms::Form> = rows
            .kernel_basis()
            .unwrap()
            .into_iter()
            .map(|v| crate::forms::Form::new(3, v).unwrap())
            .collect();
        let expected: Vec<crate::forms::Form> =
            [(0u32, 2u32, 1u32), (2, 1, 0), (1, 2, 0), (0, 3, 0)]
                .iter()
                .map(|&(a, b, c)| {
                    crate::forms::Form::from_terms(3, &[(a, b, c, 1)], FieldKind::Rational)
                })
                .collect();
        assert!(crate::grassmann::subspace_equal(&kernel, &expected).unwrap());

        let vertical = FamilyConfig::new(
            vec![
                [poly(&[0]), poly(&[0]), poly(&[1])],
                [poly(&[0]), poly(&[0, 1]), poly(&[1])],
            ],
            q(0),
        )
        .unwrap();
        let rep_v = limit_gamma(&vertical, 3).unwrap();
        assert_ne!(rep_v.limit, rep.limit, "direction of approach matters");
        let rows_v = reconstruct_rows(&rep_v.limit).unwrap();
        let kernel_v: Vec<crate::forms::Form> = rows_v
            .kernel_basis()
            .unwrap()
            .into_iter()
            .map(|v| crate::forms::Form::new(3, v).unwrap())
            .collect();
        let expected_v: Vec<crate::forms::Form> =
            [(2u32, 0u32, 1u32), (2, 1, 0), (1, 2, 0), (3, 0, 0)]
                .iter()
                .map(|&(a, b, c)| {
                    crate::forms::Form::from_terms(3, &[(a, b, c, 1)], FieldKind::Rational)
                })
                .collect();
        assert!(crate::grassmann::subspace_equal(&kernel_v, &expected_v).unwrap());
    }

    #[test]
    fn collision_limit_invariant_under_path_order_and_reparameterization() {
        let fam = collision_family();
        let base = limit_gamma(&fam, 3).unwrap();
        let swapped = fam.permuted(&[1, 0]).unwrap();
        assert_eq!(limit_gamma(&swapped, 3).unwrap().limit, base.limit);
        // t -> t^2 doubles all valuations uniformly
        let squared = fam.reparameterize(&poly(&[0, 0, 1])).unwrap();
        let rep2 = limit_gamma(&squared, 3).unwrap();
        assert_eq!(rep2.limit, base.limit);
        assert_eq!(rep2.vanishing_order, 2 * base.vanishing_order);
        // t -> 5t rescales without changing the limit
        let scaled = fam.reparameterize(&poly(&[0, 5])).unwrap();
        assert_eq!(limit_gamma(&scaled, 3).unwrap().limit, base.limit);
    }

    #[test]
    fn specialization_consistency_at_interior_values() {
        let fam = FamilyConfig::new(
            vec![
                [poly(&[1, 1]), poly(&[0, -1]), poly(&[1])],
                [poly(&[-2, 0, 1]), poly(&[3]), poly(&[1])],
            ],
            q(0),
        )
        .unwrap();
        for t0 in [q(1), q(2), q(-3)] {
            let moved = fam.clone().with_t_star(t0.clone());
            let rep = limit_gamma(&moved, 3).unwrap();
            let cfg = fam.specialize(&t0).unwrap();
            assert_eq!(rep.limit, gamma(&cfg, 3).unwrap());
            assert_eq!(rep.interior_consistent, Some(true));
            assert_eq!(rep.vanishing_order, 0);
        }
    }

    #[test]
    fn limit_flag_of_collision_family() {
        let fam = collision_family();
        let rep = limit_flag(&fam, 3).unwrap();
        assert!(rep.nesting_holds);
        assert_eq!(rep.chain.len(), 2);
        // chain[0] is the static gamma of the constant first path
        let g0 = gamma(&PointConfig::unordered(vec![pt(0, 0, 1)]).unwrap(), 3).unwrap();
        assert_eq!(rep.chain[0].limit, g0);
        // permuting the paths leaves chain[1] fixed; at this boundary point
        // chain[0] coincides too, because the moving prefix (t:0:1) limits
        // onto the very point the constant prefix sits at (the symmetric
        // group fixes this boundary flag)
        let swapped = fam.permuted(&[1, 0]).unwrap();
        let rep_swapped = limit_flag(&swapped, 3).unwrap();
        assert_eq!(rep_swapped.chain[0].limit, rep.chain[0].limit);
        assert_eq!(rep_swapped.chain[1].limit, rep.chain[1].limit);
        assert!(rep_swapped.nesting_holds);
    }

    #[test]
    fn interior_flag_limits_are_order_sensitive() {
        // away from collisions the flag side genuinely depends on the order:
        // a constant family of two distinct points
        let cfg = PointConfig::ordered(vec![pt(1, 0, 1), pt(0, 1, 1)]).unwrap();
        let fam = FamilyConfig::constant(&cfg).unwrap();
        let rep = limit_flag(&fam, 3).unwrap();
        let swapped = fam.permuted(&[1, 0]).unwrap();
        let rep_swapped = limit_flag(&swapped, 3).unwrap();
        assert_ne!(rep_swapped.chain[0].limit, rep.chain[0].limit);
        assert_eq!(rep_swapped.chain[1].limit, rep.chain[1].limit);
    }

    #[test]
    fn constant_family_flag_is_static_flag() {
        let cfg = PointConfig::ordered(vec![pt(1, 0, 1), pt(0, 1, 1)]).unwrap();
        let fam = FamilyConfig::constant(&cfg).unwrap();
        let rep = limit_flag(&fam, 3).unwrap();
        let static_flag = crate::grassmann::flag(&cfg, 3).unwrap();
        assert!(rep.nesting_holds);
        for (lim, st) in rep.chain.iter().zip(&static_flag.chain) {
            assert_eq!(&lim.limit, st);
        }
    }

    #[test]
    fn three_point_collision_flag_limit() {
        // two of three points collide; the flag limit at the critical degree
        // keeps its nesting, decomposability, and constant corank
        let fam = FamilyConfig::new(
            vec![
                [poly(&[0]), poly(&[0]), poly(&[1])],
                [poly(&[0, 1]), poly(&[0, 2]), poly(&[1])],
                [poly(&[3]), poly(&[-2]), poly(&[1])],
            ],
            q(0),
        )
        .unwrap();
        let rep = limit_flag(&fam, 5).unwrap();
        assert!(rep.nesting_holds);
        for (i, r) in rep.chain.iter().enumerate() {
            assert!(r.decomposable, "chain[{i}]");
            let rows = reconstruct_rows(&r.limit).unwrap();
            assert_eq!(rows.kernel_basis().unwrap().len(), 21 - 3 * (i + 1));
        }
        // the collision point constrains every prefix containing both paths
        assert!(rep.chain[1].collisions[0].limit_singular_at_point);
        assert!(rep.chain[2].collisions[0].limit_singular_at_point);
    }

    #[test]
    fn degenerate_family_rejected() {
        // both paths identical: rank over Q(t) stays 3 < 6
        let fam = FamilyConfig::new(
            vec![
                [poly(&[0, 1]), poly(&[0]), poly(&[1])],
                [poly(&[0, 1]), poly(&[0]), poly(&[1])],
            ],
            q(0),
        );
        // construction already rejects never-distinct families
        assert!(matches!(fam, Err(Error::FamilyNotGenericallyDistinct)));
    }

    #[test]
    fn path_content_is_removed() {
        // path (t^2, 0, t) reduces to (t, 0, 1): no common root survives
        let fam =
            FamilyConfig::new(vec![[poly(&[0, 0, 1]), poly(&[0]), poly(&[0, 1])]], q(0)).unwrap();
        assert_eq!(fam.paths()[0][0], poly(&[0, 1]));
        assert_eq!(fam.paths()[0][2], poly(&[1]));
        let rep = limit_gamma(&fam, 2).unwrap();
        let expected = gamma(&PointConfig::unordered(vec![pt(0, 0, 1)]).unwrap(), 2).unwrap();
        assert_eq!(rep.limit, expected);
    }

    #[test]
    fn random_two_point_families_have_semicontinuous_limits() {
        // collide a moving point into a random static one along a line
        for seed in 0..3u64 {
            let spec = StratumSpec::new(StratumKind::Generic, 600 + seed).with_bound(8);
            let base = stratum_sample(2, &spec).unwrap();
            let p0 = &base.points()[0];
            let p1 = &base.points()[1];
            let x0 = p0.coords()[0].as_rat().unwrap().clone();
            let y0 = p0.coords()[1].as_rat().unwrap().clone();
            let x1 = p1.coords()[0].as_rat().unwrap().clone();
            let y1 = p1.coords()[1].as_rat().unwrap().clone();
            // P2(t) = P0 + t (P1 - P0)
            let fam = FamilyConfig::new(
                vec![
                    [
                        QPoly::constant(x0.clone()),
                        QPoly::constant(y0.clone()),
                        QPoly::constant(q(1).clone()),
                    ],
                    [
                        QPoly::new(vec![x0.clone(), &x1 - &x0]),
                        QPoly::new(vec![y0.clone(), &y1 - &y0]),
                        QPoly::constant(q(1)),
                    ],
                ],
                q(0),
            )
            .unwrap();
            let rep = limit_gamma(&fam, 3).unwrap();
            assert!(rep.decomposable);
            // generic corank is preserved at the limit
            let rows = reconstruct_rows(&rep.limit).unwrap();
            assert_eq!(rows.kernel_basis().unwrap().len(), 10 - 6);
            assert!(rep.collisions[0].limit_singular_at_point);
        }
    }
}
