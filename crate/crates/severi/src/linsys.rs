//! Linear systems of plane curves with assigned double points: condition
//! matrices, dimensions and superabundance, stratified configuration
//! sampling, and the critical-degree scan locating the smallest degree at
//! which the 3d double-point conditions become independent on every tested
//! stratum.

use num_rational::BigRational;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{monomial_count, monomials, Form, ProjPoint};
use crate::matrix::Matrix;
use crate::rng::{derive_seed, SplitMix64};
use crate::scalar::{FieldKind, Scalar, DEFAULT_MODULUS};

/// A configuration of d pairwise-distinct plane points. Ordered
/// configurations are tuples (points of the configuration space); unordered
/// ones are multisets stored sorted by the canonical point order.
#[derive(Clone, Debug, PartialEq)]
pub struct PointConfig {
    points: Vec<ProjPoint>,
    ordered: bool,
}

impl PointConfig {
    pub fn new(mut points: Vec<ProjPoint>, ordered: bool) -> Result<PointConfig> {
        if points.is_empty() {
            return Err(Error::Shape(
                "configuration needs at least one point".into(),
            ));
        }
        let kind = points[0].kind();
        for p in &points {
            if p.kind() != kind {
                return Err(Error::FieldMismatch(kind, p.kind()));
            }
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[i] == points[j] {
                    return Err(Error::DuplicatePoints(j, i));
                }
            }
        }
        if !ordered {
            points.sort_by(|a, b| a.canonical_cmp(b));
        }
        Ok(PointConfig { points, ordered })
    }

    pub fn ordered(points: Vec<ProjPoint>) -> Result<PointConfig> {
        PointConfig::new(points, true)
    }

    pub fn unordered(points: Vec<ProjPoint>) -> Result<PointConfig> {
        PointConfig::new(points, false)
    }

    pub fn points(&self) -> &[ProjPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_ordered(&self) -> bool {
        self.ordered
    }

    pub fn kind(&self) -> FieldKind {
        self.points[0].kind()
    }

    /// Forgets the ordering (sorts canonically).
    pub fn to_unordered(&self) -> PointConfig {
        PointConfig::new(self.points.clone(), false).expect("already valid")
    }

    pub fn to_ordered(&self) -> PointConfig {
        PointConfig::new(self.points.clone(), true).expect("already valid")
    }

    /// Ordered configuration of the first `len` points.
    pub fn prefix(&self, len: usize) -> PointConfig {
        PointConfig::new(self.points[..len].to_vec(), true).expect("prefix of valid config")
    }

    /// Applies a permutation to an ordered configuration: position i of the
    /// result holds point `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<PointConfig> {
        if perm.len() != self.points.len() {
            return Err(Error::Shape("permutation length mismatch".into()));
        }
        let points = perm.iter().map(|&i| self.points[i].clone()).collect();
        PointConfig::new(points, true)
    }

    pub fn reduce_mod_p(&self, p: u64) -> Result<PointConfig> {
        let points = self
            .points
            .iter()
            .map(|pt| pt.reduce_mod_p(p))
            .collect::<Result<Vec<_>>>()?;
        PointConfig::new(points, self.ordered)
    }
}

impl Serialize for PointConfig {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = ser.serialize_struct("PointConfig", 2)?;
        st.serialize_field("points", &self.points)?;
        st.serialize_field("ordered", &self.ordered)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for PointConfig {
    fn deserialize<D: serde::Deserializer<'de>>(
        de: D,
    ) -> std::result::Result<PointConfig, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            points: Vec<ProjPoint>,
            #[serde(default)]
            ordered: bool,
        }
        let w = Wire::deserialize(de)?;
        PointConfig::new(w.points, w.ordered).map_err(serde::de::Error::custom)
    }
}

/// N_s = s(s+3)/2, the projective dimension of the full degree-s system.
pub fn ambient_proj_dim(s: u32) -> i64 {
    monomial_count(s) as i64 - 1
}

/// (N_s, expected projective dimension clamped at -1, affine bundle rank
/// N_s + 1 - 3d which may be negative).
pub fn expected_dims(s: u32, d: usize) -> (i64, i64, i64) {
    let n = ambient_proj_dim(s);
    let expected = (n - 3 * d as i64).max(-1);
    (n, expected, n + 1 - 3 * d as i64)
}

/// The 3d x (N_s + 1) condition matrix: row 3i + c is the linear functional
/// sending a degree-s form to the value of its c-th partial at point i.
pub fn condition_matrix(s: u32, cfg: &PointConfig) -> Result<Matrix> {
    if s == 0 {
        return Err(Error::DegreeTooSmall(0));
    }
    let kind = cfg.kind();
    if let FieldKind::Fp(p) = kind {
        if (s as u64).is_multiple_of(p) {
            return Err(Error::UnsupportedCharacteristic { p, s });
        }
    }
    let mons = monomials(s);
    let cols = mons.len();
    let mut rows: Vec<Vec<Scalar>> = Vec::with_capacity(3 * cfg.len());
    for pt in cfg.points() {
        let pow = |v: &Scalar| -> Result<Vec<Scalar>> {
            let mut out = Vec::with_capacity(s as usize + 1);
            out.push(Scalar::one(kind));
            for i in 0..s as usize {
                let next = out[i].mul(v)?;
                out.push(next);
            }
            Ok(out)
        };
        let px = pow(&pt.coords()[0])?;
        let py = pow(&pt.coords()[1])?;
        let pz = pow(&pt.coords()[2])?;
        for axis in 0..3usize {
            let mut row = Vec::with_capacity(cols);
            for &(a, b, c) in &mons {
                let (e, ea, eb, ec) = match axis {
                    0 => (a, a.wrapping_sub(1), b, c),
                    1 => (b, a, b.wrapping_sub(1), c),
                    _ => (c, a, b, c.wrapping_sub(1)),
                };
                if e == 0 {
                    row.push(Scalar::zero(kind));
                    continue;
                }
                let v = Scalar::from_int(e as i64, kind)
                    .mul(&px[ea as usize])?
                    .mul(&py[eb as usize])?
                    .mul(&pz[ec as usize])?;
                row.push(v);
            }
            rows.push(row);
        }
    }
    Matrix::from_rows(rows)
}

/// Dimension data and canonical kernel basis of the system of degree-s
/// curves singular at every configuration point.
#[derive(Clone, Debug, Serialize)]
pub struct LinearSystemResult {
    pub degree: u32,
    pub config: PointConfig,
    pub rank: usize,
    pub proj_dim: i64,
    pub expected_proj_dim: i64,
    pub superabundance: usize,
    pub basis: Vec<Form>,
}

pub fn linear_system(s: u32, cfg: &PointConfig) -> Result<LinearSystemResult> {
    let m = condition_matrix(s, cfg)?;
    let rank = m.rank()?;
    let kernel = m.kernel_basis()?;
    let (n, expected, _) = expected_dims(s, cfg.len());
    let basis = kernel
        .into_iter()
        .map(|v| Form::new(s, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(LinearSystemResult {
        degree: s,
        config: cfg.clone(),
        rank,
        proj_dim: n - rank as i64,
        expected_proj_dim: expected,
        superabundance: 3 * cfg.len() - rank,
        basis,
    })
}

// ---------------------------------------------------------------------------
// strata
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub enum StratumKind {
    Generic,
    AllCollinear,
    JCollinear(usize),
    OnConic,
    CustomPoints(Vec<ProjPoint>),
}

impl StratumKind {
    pub fn label(&self) -> String {
        match self {
            StratumKind::Generic => "generic".into(),
            StratumKind::AllCollinear => "all-collinear".into(),
            StratumKind::JCollinear(j) => format!("{j}-collinear"),
            StratumKind::OnConic => "on-conic".into(),
            StratumKind::CustomPoints(_) => "custom-points".into(),
        }
    }

    fn tag(&self) -> u64 {
        match self {
            StratumKind::Generic => 1,
            StratumKind::AllCollinear => 2,
            StratumKind::JCollinear(j) => 100 + *j as u64,
            StratumKind::OnConic => 3,
            StratumKind::CustomPoints(_) => 4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct StratumSpec {
    pub kind: StratumKind,
    pub seed: u64,
    /// Random integer coordinates are drawn from [-coord_bound, coord_bound].
    pub coord_bound: u64,
}

impl StratumSpec {
    pub fn new(kind: StratumKind, seed: u64) -> StratumSpec {
        StratumSpec {
            kind,
            seed,
            coord_bound: 50,
        }
    }

    pub fn with_bound(mut self, bound: u64) -> StratumSpec {
        self.coord_bound = bound;
        self
    }

    fn validate(&self, d: usize) -> Result<()> {
        match &self.kind {
            StratumKind::JCollinear(j) => {
                if *j < 3 || *j > d {
                    return Err(Error::InvalidStratum(format!(
                        "j-collinear needs 3 <= j <= d, got j = {j}, d = {d}"
                    )));
                }
            }
            StratumKind::CustomPoints(pts) if pts.len() != d => {
                return Err(Error::InvalidStratum(format!(
                    "custom stratum has {} points, expected {d}",
                    pts.len()
                )));
            }
            _ => {}
        }
        if self.coord_bound == 0 {
            return Err(Error::InvalidStratum("empty coordinate box".into()));
        }
        Ok(())
    }

    /// True when the stratum makes sense at this d (used to thin a shared
    /// strata list across several d values).
    pub fn applicable(&self, d: usize) -> bool {
        match &self.kind {
            StratumKind::JCollinear(j) => *j >= 3 && *j <= d,
            StratumKind::AllCollinear => d >= 2,
            StratumKind::CustomPoints(pts) => pts.len() == d,
            _ => true,
        }
    }
}

/// Default stratum battery for a given d: generic, all-collinear,
/// j-collinear for 3 <= j < d, and on-conic, thinned to the applicable ones.
pub fn default_strata(d: usize, seed: u64, bound: u64) -> Vec<StratumSpec> {
    let mut kinds = vec![StratumKind::Generic, StratumKind::AllCollinear];
    for j in 3..=d {
        kinds.push(StratumKind::JCollinear(j));
    }
    kinds.push(StratumKind::OnConic);
    kinds
        .into_iter()
        .filter(|k| {
            StratumSpec {
                kind: k.clone(),
                seed,
                coord_bound: bound,
            }
            .applicable(d)
        })
        .map(|k| StratumSpec::new(k, seed).with_bound(bound))
        .collect()
}

fn collinear(a: &ProjPoint, b: &ProjPoint, c: &ProjPoint) -> bool {
    let rows = vec![
        a.coords().to_vec(),
        b.coords().to_vec(),
        c.coords().to_vec(),
    ];
    let m = Matrix::from_rows(rows).expect("3x3 coordinate matrix");
    m.det().map(|d| d.is_zero()).unwrap_or(false)
}

fn six_on_conic(pts: &[&ProjPoint]) -> bool {
    debug_assert_eq!(pts.len(), 6);
    let rows: Vec<Vec<Scalar>> = pts
        .iter()
        .map(|p| {
            let kind = p.kind();
            monomials(2)
                .iter()
                .map(|&(a, b, c)| {
                    let mut v = Scalar::one(kind);
                    for _ in 0..a {
                        v = v.mul(&p.coords()[0]).unwrap();
                    }
                    for _ in 0..b {
                        v = v.mul(&p.coords()[1]).unwrap();
                    }
                    for _ in 0..c {
                        v = v.mul(&p.coords()[2]).unwrap();
                    }
                    v
                })
                .collect()
        })
        .collect();
    let m = Matrix::from_rows(rows).expect("6x6 conic incidence");
    m.det().map(|d| d.is_zero()).unwrap_or(false)
}

const SAMPLE_RETRIES: u32 = 4000;

/// Draws a configuration satisfying the stratum incidence exactly,
/// deterministically from the spec seed. Generic samples additionally avoid
/// the special strata (no three collinear, no six on a conic), so the
/// declared incidence is exact in all cases.
pub fn stratum_sample(d: usize, spec: &StratumSpec) -> Result<PointConfig> {
    spec.validate(d)?;
    let mut rng = SplitMix64::new(derive_seed(spec.seed, &[d as u64, spec.kind.tag()]));
    match &spec.kind {
        StratumKind::CustomPoints(pts) => PointConfig::unordered(pts.clone()),
        StratumKind::Generic => sample_generic(d, spec.coord_bound, &mut rng, &[]),
        StratumKind::AllCollinear => {
            let pts = sample_collinear(d, spec.coord_bound, &mut rng)?;
            PointConfig::unordered(pts)
        }
        StratumKind::JCollinear(j) => {
            let on_line = sample_collinear(*j, spec.coord_bound, &mut rng)?;
            let cfg = sample_generic(d - j, spec.coord_bound, &mut rng, &on_line)?;
            PointConfig::unordered(cfg.points.to_vec())
        }
        StratumKind::OnConic => {
            let pts = sample_on_conic(d, spec.coord_bound, &mut rng)?;
            PointConfig::unordered(pts)
        }
    }
}

fn affine_point(rng: &mut SplitMix64, bound: u64, kind: FieldKind) -> ProjPoint {
    ProjPoint::from_ints(rng.next_in_box(bound), rng.next_in_box(bound), 1, kind)
        .expect("affine point is nonzero")
}

/// Extends `fixed` with `extra` generic points; the full configuration must
/// have no collinear triple beyond those inside `fixed` and no six points on
/// a conic.
fn sample_generic(
    extra: usize,
    bound: u64,
    rng: &mut SplitMix64,
    fixed: &[ProjPoint],
) -> Result<PointConfig> {
    let mut pts: Vec<ProjPoint> = fixed.to_vec();
    let mut attempts = 0;
    while pts.len() < fixed.len() + extra {
        attempts += 1;
        if attempts > SAMPLE_RETRIES {
            return Err(Error::SampleExhausted {
                attempts,
                reason: "could not place a generic point in the box".into(),
            });
        }
        let cand = affine_point(rng, bound, FieldKind::Rational);
        if pts.contains(&cand) {
            continue;
        }
        let mut ok = true;
        'triple: for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                if collinear(&pts[i], &pts[j], &cand) {
                    ok = false;
                    break 'triple;
                }
            }
        }
        if ok && pts.len() >= 5 {
            // reject a candidate completing six points on a conic
            let idx: Vec<usize> = (0..pts.len()).collect();
            ok = !any_five_subset_conic(&idx, &pts, &cand);
        }
        if ok {
            pts.push(cand);
        }
    }
    PointConfig::unordered(pts)
}

fn any_five_subset_conic(idx: &[usize], pts: &[ProjPoint], cand: &ProjPoint) -> bool {
    // check every 5-subset of existing points together with the candidate
    let n = idx.len();
    let mut chosen = Vec::with_capacity(5);
    fn rec(
        start: usize,
        chosen: &mut Vec<usize>,
        idx: &[usize],
        pts: &[ProjPoint],
        cand: &ProjPoint,
    ) -> bool {
        if chosen.len() == 5 {
            let mut six: Vec<&ProjPoint> = chosen.iter().map(|&i| &pts[i]).collect();
            six.push(cand);
            return six_on_conic(&six);
        }
        for i in start..idx.len() {
            chosen.push(idx[i]);
            if rec(i + 1, chosen, idx, pts, cand) {
                chosen.pop();
                return true;
            }
            chosen.pop();
        }
        false
    }
    n >= 5 && rec(0, &mut chosen, idx, pts, cand)
}

fn sample_collinear(count: usize, bound: u64, rng: &mut SplitMix64) -> Result<Vec<ProjPoint>> {
    if count == 1 {
        return Ok(vec![affine_point(rng, bound, FieldKind::Rational)]);
    }
    for _ in 0..SAMPLE_RETRIES {
        let a = affine_point(rng, bound, FieldKind::Rational);
        let b = affine_point(rng, bound, FieldKind::Rational);
        if a == b {
            continue;
        }
        // points a + t (b - a) on the line through a and b
        let mut params: Vec<i64> = Vec::new();
        let mut tries = 0;
        while params.len() < count && tries < SAMPLE_RETRIES {
            tries += 1;
            let t = rng.next_in_box(bound);
            if !params.contains(&t) {
                params.push(t);
            }
        }
        if params.len() < count {
            continue;
        }
        let ax = a.coords()[0].as_rat().unwrap().clone();
        let ay = a.coords()[1].as_rat().unwrap().clone();
        let bx = b.coords()[0].as_rat().unwrap().clone();
        let by = b.coords()[1].as_rat().unwrap().clone();
        let pts: Vec<ProjPoint> = params
            .iter()
            .map(|&t| {
                let t = BigRational::from_integer(t.into());
                ProjPoint::from_rationals(
                    &ax + &t * (&bx - &ax),
                    &ay + &t * (&by - &ay),
                    BigRational::from_integer(1.into()),
                )
                .expect("affine point")
            })
            .collect();
        for w in pts.windows(3) {
            debug_assert!(collinear(&w[0], &w[1], &w[2]));
        }
        return Ok(pts);
    }
    Err(Error::SampleExhausted {
        attempts: SAMPLE_RETRIES,
        reason: "could not build a collinear sample".into(),
    })
}

fn sample_on_conic(d: usize, bound: u64, rng: &mut SplitMix64) -> Result<Vec<ProjPoint>> {
    // rational parameterization (1 : t : t^2) of the smooth conic y^2 = xz,
    // pushed through a random invertible integer change of coordinates
    let small = bound.min(9);
    for _ in 0..SAMPLE_RETRIES {
        let g: Vec<Vec<i64>> = (0..3)
            .map(|_| (0..3).map(|_| rng.next_in_box(small)).collect())
            .collect();
        let gm = Matrix::from_rows(
            g.iter()
                .map(|row| {
                    row.iter()
                        .map(|&v| Scalar::from_int(v, FieldKind::Rational))
                        .collect()
                })
                .collect(),
        )
        .expect("3x3");
        if gm.det().expect("square").is_zero() {
            continue;
        }
        let mut params: Vec<i64> = Vec::new();
        let mut tries = 0;
        while params.len() < d && tries < SAMPLE_RETRIES {
            tries += 1;
            let t = rng.next_in_box(bound);
            if !params.contains(&t) {
                params.push(t);
            }
        }
        if params.len() < d {
            continue;
        }
        let pts: Vec<ProjPoint> = params
            .iter()
            .map(|&t| {
                let t = BigRational::from_integer(t.into());
                let v = [BigRational::from_integer(1.into()), t.clone(), &t * &t];
                let coords: Vec<BigRational> = (0..3)
                    .map(|r| {
                        (0..3)
                            .map(|c| BigRational::from_integer(g[r][c].into()) * &v[c])
                            .sum()
                    })
                    .collect();
                ProjPoint::from_rationals(coords[0].clone(), coords[1].clone(), coords[2].clone())
                    .expect("image of a point under an invertible map")
            })
            .collect();
        return Ok(pts);
    }
    Err(Error::SampleExhausted {
        attempts: SAMPLE_RETRIES,
        reason: "could not build an on-conic sample".into(),
    })
}

// ---------------------------------------------------------------------------
// critical degree
// ---------------------------------------------------------------------------

/// One rank observation in a scan table.
#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub s: u32,
    pub stratum: String,
    pub sample: u32,
    pub rank: usize,
    pub proj_dim: i64,
    pub expected_proj_dim: i64,
}

/// A configuration whose conditions failed to be independent below the
/// critical degree.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub s: u32,
    pub stratum: String,
    pub sample: u32,
    pub rank: usize,
    pub proj_dim: i64,
    pub expected_proj_dim: i64,
    pub points: PointConfig,
}

/// Reproducibility block embedded in scan reports.
#[derive(Clone, Debug, Serialize)]
pub struct ReproBlock {
    pub seed: u64,
    pub coord_bound: u64,
    pub strata: Vec<String>,
    pub samples_per_stratum: u32,
    pub crosscheck_modulus: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalDegreeReport {
    pub d: usize,
    pub s_max: u32,
    /// Smallest s with rank 3d on every sample, stably through s_max
    /// (independence reading; the bundle-rank formula forces this one).
    pub k_hat: Option<u32>,
    /// Alternative reading: smallest s from which the projective dimension
    /// is constant across samples per degree and the system is nonempty.
    pub k_hat_alt: Option<u32>,
    pub table: Vec<ScanRow>,
    pub witnesses: Vec<Witness>,
    pub certified_strata: Vec<String>,
    /// Rank disagreements between the rational pipeline and the prime-field
    /// crosscheck (expected empty; surfaced, never hidden).
    pub crosscheck_failures: Vec<ScanRow>,
    pub repro: ReproBlock,
}

/// Rank of the degree-s condition matrix together with a prime-field
/// crosscheck at the default modulus, when the configuration reduces
/// cleanly.
fn rank_with_crosscheck(s: u32, cfg: &PointConfig) -> Result<(usize, Option<usize>)> {
    let rank = condition_matrix(s, cfg)?.rank()?;
    let cross = match cfg.reduce_mod_p(DEFAULT_MODULUS) {
        Ok(reduced) => condition_matrix(s, &reduced)
            .ok()
            .map(|m| m.rank())
            .transpose()?,
        Err(_) => None,
    };
    Ok((rank, cross))
}

pub fn critical_degree(
    d: usize,
    s_max: u32,
    strata: &[StratumSpec],
    samples_per_stratum: u32,
) -> Result<CriticalDegreeReport> {
    if d == 0 {
        return Err(Error::Shape("d must be at least 1".into()));
    }
    // fix the sample list sequentially, then rank in parallel
    let mut samples: Vec<(String, u32, PointConfig)> = Vec::new();
    for spec in strata {
        for i in 0..samples_per_stratum {
            let spec_i = StratumSpec {
                kind: spec.kind.clone(),
                seed: derive_seed(spec.seed, &[i as u64]),
                coord_bound: spec.coord_bound,
            };
            samples.push((spec.kind.label(), i, stratum_sample(d, &spec_i)?));
        }
    }
    let tasks: Vec<(u32, usize)> = (1..=s_max)
        .flat_map(|s| (0..samples.len()).map(move |i| (s, i)))
        .collect();
    let ranks: Vec<(usize, Option<usize>)> = tasks
        .par_iter()
        .map(|&(s, i)| rank_with_crosscheck(s, &samples[i].2))
        .collect::<Result<Vec<_>>>()?;

    let mut table = Vec::with_capacity(tasks.len());
    let mut crosscheck_failures = Vec::new();
    for (&(s, i), &(rank, cross)) in tasks.iter().zip(&ranks) {
        let (_, expected, _) = expected_dims(s, d);
        let row = ScanRow {
            s,
            stratum: samples[i].0.clone(),
            sample: samples[i].1,
            rank,
            proj_dim: ambient_proj_dim(s) - rank as i64,
            expected_proj_dim: expected,
        };
        if let Some(cr) = cross {
            if cr != rank {
                crosscheck_failures.push(row.clone());
            }
        }
        table.push(row);
    }

    // independence reading: all samples reach rank 3d at s and stay there
    let full = 3 * d;
    let independent_at =
        |s: u32| -> bool { table.iter().filter(|r| r.s == s).all(|r| r.rank == full) };
    let constant_dim_at = |s: u32| -> Option<i64> {
        let mut dims = table.iter().filter(|r| r.s == s).map(|r| r.proj_dim);
        let first = dims.next()?;
        dims.all(|v| v == first).then_some(first)
    };
    let mut k_hat = None;
    for s in (1..=s_max).rev() {
        if independent_at(s) {
            k_hat = Some(s);
        } else {
            break;
        }
    }
    let mut k_hat_alt = None;
    for s in (1..=s_max).rev() {
        match constant_dim_at(s) {
            Some(dim) => {
                if dim >= 0 {
                    k_hat_alt = Some(s);
                } else if k_hat_alt.is_some() {
                    // empty but constant below an already-found start: stop
                    break;
                }
            }
            None => break,
        }
    }

    let mut witnesses = Vec::new();
    if let Some(k) = k_hat {
        if k >= 2 {
            for row in table.iter().filter(|r| r.s == k - 1 && r.rank < full) {
                let cfg = &samples
                    .iter()
                    .find(|(label, idx, _)| *label == row.stratum && *idx == row.sample)
                    .expect("sample exists")
                    .2;
                witnesses.push(Witness {
                    s: row.s,
                    stratum: row.stratum.clone(),
                    sample: row.sample,
                    rank: row.rank,
                    proj_dim: row.proj_dim,
                    expected_proj_dim: row.expected_proj_dim,
                    points: cfg.clone(),
                });
            }
        }
    }

    Ok(CriticalDegreeReport {
        d,
        s_max,
        k_hat,
        k_hat_alt,
        table,
        witnesses,
        certified_strata: strata.iter().map(|s| s.kind.label()).collect(),
        crosscheck_failures,
        repro: ReproBlock {
            seed: strata.first().map_or(0, |s| s.seed),
            coord_bound: strata.first().map_or(0, |s| s.coord_bound),
            strata: strata.iter().map(|s| s.kind.label()).collect(),
            samples_per_stratum,
            crosscheck_modulus: DEFAULT_MODULUS,
        },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotoneReport {
    pub d: usize,
    pub from: u32,
    pub to: u32,
    pub all_independent: bool,
    pub table: Vec<ScanRow>,
}

/// Verifies rank 3d for every degree in [k_hat, r_max] across the strata
/// samples; failures are returned as data, not errors.
pub fn monotone_independence_check(
    d: usize,
    k_hat: u32,
    r_max: u32,
    strata: &[StratumSpec],
    samples_per_stratum: u32,
) -> Result<MonotoneReport> {
    let mut samples: Vec<(String, u32, PointConfig)> = Vec::new();
    for spec in strata {
        for i in 0..samples_per_stratum {
            let spec_i = StratumSpec {
                kind: spec.kind.clone(),
                seed: derive_seed(spec.seed, &[i as u64]),
                coord_bound: spec.coord_bound,
            };
            samples.push((spec.kind.label(), i, stratum_sample(d, &spec_i)?));
        }
    }
    let tasks: Vec<(u32, usize)> = (k_hat..=r_max)
        .flat_map(|s| (0..samples.len()).map(move |i| (s, i)))
        .collect();
    let ranks: Vec<usize> = tasks
        .par_iter()
        .map(|&(s, i)| condition_matrix(s, &samples[i].2)?.rank())
        .collect::<Result<Vec<_>>>()?;
    let full = 3 * d;
    let mut table = Vec::with_capacity(tasks.len());
    let mut all_independent = true;
    for (&(s, i), &rank) in tasks.iter().zip(&ranks) {
        let (_, expected, _) = expected_dims(s, d);
        all_independent &= rank == full;
        table.push(ScanRow {
            s,
            stratum: samples[i].0.clone(),
            sample: samples[i].1,
            rank,
            proj_dim: ambient_proj_dim(s) - rank as i64,
            expected_proj_dim: expected,
        });
    }
    Ok(MonotoneReport {
        d,
        from: k_hat,
        to: r_max,
        all_independent,
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{classify_point, SingularityKind};

    fn pt(x: i64, y: i64, z: i64) -> ProjPoint {
        ProjPoint::from_ints(x, y, z, FieldKind::Rational).unwrap()
    }

    #[test]
    fn condition_matrix_single_point_conics() {
        let cfg = PointConfig::unordered(vec![pt(0, 0, 1)]).unwrap();
        let m = condition_matrix(2, &cfg).unwrap();
        assert_eq!((m.rows(), m.cols()), (3, 6));
        // nonzero columns are exactly xz, yz, z^2 (positions 2, 4, 5)
        for c in 0..6 {
            let nonzero = (0..3).any(|r| !m.entry(r, c).is_zero());
            assert_eq!(nonzero, [2, 4, 5].contains(&c), "column {c}");
        }
        assert_eq!(m.rank().unwrap(), 3);
        // exactly one nonzero maximal minor, at the tuple (2, 4, 5),
        // with value 2 before projective normalization
        let minors = m.maximal_minors().unwrap();
        let target = crate::combin::lex_rank(6, &[2, 4, 5]);
        for (i, v) in minors.iter().enumerate() {
            if i == target {
                assert_eq!(v, &Scalar::from_int(2, FieldKind::Rational));
            } else {
                assert!(v.is_zero());
            }
        }
    }

    #[test]
    fn condition_matrix_lines_have_rank_three() {
        let cfg = PointConfig::unordered(vec![pt(0, 0, 1)]).unwrap();
        let m = condition_matrix(1, &cfg).unwrap();
        assert_eq!((m.rows(), m.cols()), (3, 3));
        assert_eq!(m.rank().unwrap(), 3);
    }

    #[test]
    fn condition_matrix_two_points_conics_rank_five() {
        let cfg = PointConfig::unordered(vec![pt(0, 0, 1), pt(0, 1, 0)]).unwrap();
        let m = condition_matrix(2, &cfg).unwrap();
        assert_eq!((m.rows(), m.cols()), (6, 6));
        assert_eq!(m.rank().unwrap(), 5);
    }

    #[test]
    fn duplicate_points_rejected() {
        assert!(matches!(
            PointConfig::unordered(vec![pt(1, 2, 1), pt(1, 2, 1)]),
            Err(Error::DuplicatePoints(_, _))
        ));
    }

    #[test]
    fn condition_matrix_rejects_bad_characteristic() {
        // p = 3 divides s = 3: the partial-derivative conditions degenerate
        let cfg = PointConfig::unordered(vec![
            ProjPoint::from_ints(0, 0, 1, FieldKind::Fp(3)).unwrap()
        ])
        .unwrap();
        assert!(matches!(
            condition_matrix(3, &cfg),
            Err(Error::UnsupportedCharacteristic { p: 3, s: 3 })
        ));
        assert!(matches!(
            condition_matrix(0, &cfg),
            Err(Error::DegreeTooSmall(0))
        ));
    }

    #[test]
    fn linear_system_one_double_point_conics() {
        let cfg = PointConfig::unordered(vec![pt(0, 0, 1)]).unwrap();
        let res = linear_system(2, &cfg).unwrap();
        assert_eq!(res.proj_dim, 2);
        assert_eq!(res.superabundance, 0);
        let expected: Vec<Form> = [(2, 0, 0), (1, 1, 0), (0, 2, 0)]
            .iter()
            .map(|&(a, b, c)| Form::from_terms(2, &[(a, b, c, 1)], FieldKind::Rational))
            .collect();
        assert_eq!(res.basis, expected); // {x^2, xy, y^2} in canonical order
    }

    #[test]
    fn linear_system_two_double_points_is_double_line() {
        let cfg = PointConfig::unordered(vec![pt(0, 0, 1), pt(0, 1, 0)]).unwrap();
        let res = linear_system(2, &cfg).unwrap();
        assert_eq!(res.proj_dim, 0);
        assert_eq!(res.superabundance, 1);
        assert_eq!(
            res.basis,
            vec![Form::from_terms(2, &[(2, 0, 0, 1)], FieldKind::Rational)] // x^2
        );
    }

    #[test]
    fn linear_system_five_double_points_is_double_conic() {
        let spec = StratumSpec::new(StratumKind::Generic, 41);
        let cfg = stratum_sample(5, &spec).unwrap();
        let res = linear_system(4, &cfg).unwrap();
        assert_eq!(res.rank, 14);
        assert_eq!(res.proj_dim, 0);
        assert_eq!(res.expected_proj_dim, -1);
        assert_eq!(res.superabundance, 1);
    }

    #[test]
    fn expected_dims_formulas() {
        assert_eq!(expected_dims(3, 1).0, 9); // N_3 = 9
        assert_eq!(expected_dims(2, 2).1, -1); // 5 - 6 clamps to -1
        let (_, _, bundle) = expected_dims(5, 2);
        assert_eq!(bundle, 5 * 8 / 2 + 1 - 6); // k(k+3)/2 + 1 - 3d
    }

    #[test]
    fn collinear_samples_are_collinear() {
        let spec = StratumSpec::new(StratumKind::AllCollinear, 1);
        let cfg = stratum_sample(3, &spec).unwrap();
        let p = cfg.points();
        assert!(collinear(&p[0], &p[1], &p[2]));
        assert_eq!(cfg.len(), 3);
    }

    #[test]
    fn on_conic_samples_satisfy_conic_incidence() {
        let spec = StratumSpec::new(StratumKind::OnConic, 7);
        let cfg = stratum_sample(5, &spec).unwrap();
        // five points plus one more conic evaluation row: rank of the 5x6
        // incidence matrix is at most 5 by construction; check via the
        // kernel being nonempty and its conic containing all five points
        let rows: Vec<Vec<Scalar>> = cfg
            .points()
            .iter()
            .map(|p| {
                monomials(2)
                    .iter()
                    .map(|&(a, b, c)| {
                        let pow = |s: &Scalar, e: u32| {
                            let mut v = Scalar::one(FieldKind::Rational);
                            for _ in 0..e {
                                v = v.mul(s).unwrap();
                            }
                            v
                        };
                        pow(&p.coords()[0], a)
                            .mul(&pow(&p.coords()[1], b))
                            .unwrap()
                            .mul(&pow(&p.coords()[2], c))
                            .unwrap()
                    })
                    .collect()
            })
            .collect();
        let m = Matrix::from_rows(rows).unwrap();
        assert!(m.rank().unwrap() <= 5);
        assert_eq!(m.kernel_basis().unwrap().len(), 6 - m.rank().unwrap());
    }

    #[test]
    fn j_collinear_has_exact_incidence() {
        let spec = StratumSpec::new(StratumKind::JCollinear(3), 11);
        let cfg = stratum_sample(5, &spec).unwrap();
        let pts = cfg.points();
        let mut collinear_triples = 0;
        for i in 0..5 {
            for j in i + 1..5 {
                for k in j + 1..5 {
                    if collinear(&pts[i], &pts[j], &pts[k]) {
                        collinear_triples += 1;
                    }
                }
            }
        }
        assert_eq!(collinear_triples, 1, "exactly the designated triple");
    }

    #[test]
    fn sampling_exhaustion_is_reported() {
        // nine affine points in the [-1, 1] box cannot host ten distinct ones
        let spec = StratumSpec::new(StratumKind::Generic, 1).with_bound(1);
        assert!(matches!(
            stratum_sample(10, &spec),
            Err(Error::SampleExhausted { .. })
        ));
    }

    #[test]
    fn generic_samples_avoid_collinearity() {
        for seed in 0..10 {
            let spec = StratumSpec::new(StratumKind::Generic, seed);
            let cfg = stratum_sample(4, &spec).unwrap();
            let pts = cfg.points();
            for i in 0..4 {
                for j in i + 1..4 {
                    for k in j + 1..4 {
                        assert!(!collinear(&pts[i], &pts[j], &pts[k]));
                    }
                }
            }
        }
    }

    #[test]
    fn critical_degree_d1_is_one() {
        let strata = default_strata(1, 5, 30);
        let report = critical_degree(1, 4, &strata, 3).unwrap();
        assert_eq!(report.k_hat, Some(1));
        assert_eq!(report.k_hat_alt, Some(2)); // first nonempty constant degree
        assert!(report.witnesses.is_empty());
        assert!(report.crosscheck_failures.is_empty());
    }

    #[test]
    fn critical_degree_d2_is_three() {
        let strata = default_strata(2, 17, 30);
        let report = critical_degree(2, 6, &strata, 4).unwrap();
        assert_eq!(report.k_hat, Some(3));
        // at s = 2 every pair gives rank 5: witnesses recorded
        assert!(!report.witnesses.is_empty());
        for w in &report.witnesses {
            assert_eq!(w.rank, 5);
        }
        assert!(report.crosscheck_failures.is_empty());
    }

    #[test]
    fn critical_degree_d3_is_five_with_collinear_witness() {
        let strata = default_strata(3, 23, 20);
        let report = critical_degree(3, 6, &strata, 3).unwrap();
        assert_eq!(report.k_hat, Some(5));
        let collinear_witness = report
            .witnesses
            .iter()
            .find(|w| w.stratum == "all-collinear" || w.stratum == "3-collinear")
            .expect("collinear witness at s = 4");
        assert_eq!(collinear_witness.rank, 8);
        assert_eq!(collinear_witness.proj_dim, 6);
        assert_eq!(collinear_witness.expected_proj_dim, 5);
    }

    #[test]
    fn monotone_check_d2() {
        let strata = default_strata(2, 29, 25);
        let rep = monotone_independence_check(2, 3, 8, &strata, 3).unwrap();
        assert!(rep.all_independent);
        // intentionally include the failing degree 4 for d = 3
        let strata3 = default_strata(3, 29, 20);
        let rep3 = monotone_independence_check(3, 4, 6, &strata3, 3).unwrap();
        assert!(!rep3.all_independent);
        assert!(rep3
            .table
            .iter()
            .any(|r| r.s == 4 && r.stratum.contains("collinear") && r.rank == 8));
    }

    #[test]
    fn basis_forms_are_singular_at_config_points() {
        let spec = StratumSpec::new(StratumKind::Generic, 3);
        let cfg = stratum_sample(2, &spec).unwrap();
        let res = linear_system(4, &cfg).unwrap();
        assert!(!res.basis.is_empty());
        for f in &res.basis {
            for p in cfg.points() {
                let verdict = classify_point(f, p).unwrap();
                assert_ne!(verdict.kind, SingularityKind::SmoothPoint);
                assert_ne!(verdict.kind, SingularityKind::NotOnCurve);
            }
        }
    }

    #[test]
    fn permutation_and_projective_invariance() {
        let spec = StratumSpec::new(StratumKind::Generic, 13);
        let cfg = stratum_sample(3, &spec).unwrap().to_ordered();
        let base = linear_system(4, &cfg).unwrap();
        let perm = cfg.permuted(&[2, 0, 1]).unwrap();
        let permuted = linear_system(4, &perm).unwrap();
        assert_eq!(base.proj_dim, permuted.proj_dim);
        // the kernels agree as subspaces, not just in dimension
        assert!(crate::grassmann::subspace_equal(&base.basis, &permuted.basis).unwrap());

        // integer projective change of coordinates with nonzero determinant
        let g = [[1, 2, 0], [0, 1, 1], [1, 0, 3]];
        let moved: Vec<ProjPoint> = cfg
            .points()
            .iter()
            .map(|p| p.transform(&g).unwrap())
            .collect();
        let moved_cfg = PointConfig::unordered(moved).unwrap();
        let moved_res = linear_system(4, &moved_cfg).unwrap();
        assert_eq!(base.proj_dim, moved_res.proj_dim);
    }

    #[test]
    fn semicontinuity_spot_check() {
        // special strata can only have larger systems than generic ones
        for seed in 0..10u64 {
            for s in 3..=6u32 {
                for d in 3..=5usize {
                    let gen = stratum_sample(
                        d,
                        &StratumSpec::new(StratumKind::Generic, seed).with_bound(30),
                    )
                    .unwrap();
                    let g = linear_system(s, &gen).unwrap().proj_dim;
                    for kind in [StratumKind::AllCollinear, StratumKind::OnConic] {
                        let special =
                            stratum_sample(d, &StratumSpec::new(kind.clone(), seed).with_bound(30))
                                .unwrap();
                        let c = linear_system(s, &special).unwrap().proj_dim;
                        assert!(c >= g, "s={s} d={d} {}: {c} < generic {g}", kind.label());
                    }
                }
            }
        }
    }

    #[test]
    fn collinear_systems_contain_the_line() {
        // for d collinear double points and s <= 2d - 1, every member
        // contains the line: check by evaluating basis forms at 2s + 1
        // points of the line
        for d in 2..=4usize {
            let spec = StratumSpec::new(StratumKind::AllCollinear, 77).with_bound(15);
            let cfg = stratum_sample(d, &spec).unwrap();
            let s = (2 * d - 1) as u32;
            let res = linear_system(s, &cfg).unwrap();
            // direction of the line through the first two points
            let p0 = cfg.points()[0].clone();
            let p1 = cfg.points()[1].clone();
            let x0 = p0.coords()[0].as_rat().unwrap().clone();
            let y0 = p0.coords()[1].as_rat().unwrap().clone();
            let x1 = p1.coords()[0].as_rat().unwrap().clone();
            let y1 = p1.coords()[1].as_rat().unwrap().clone();
            for f in &res.basis {
                for k in 0..(2 * s + 1) as i64 {
                    let t = BigRational::from_integer(k.into());
                    let q = ProjPoint::from_rationals(
                        &x0 + &t * (&x1 - &x0),
                        &y0 + &t * (&y1 - &y0),
                        BigRational::from_integer(1.into()),
                    )
                    .unwrap();
                    assert!(f.evaluate(&q).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn rank_bounded_by_rows_and_cols() {
        for seed in 0..5 {
            for d in 1..=4usize {
                for s in 1..=5u32 {
                    let cfg = stratum_sample(
                        d,
                        &StratumSpec::new(StratumKind::Generic, seed).with_bound(20),
                    )
                    .unwrap();
                    let res = linear_system(s, &cfg).unwrap();
                    assert!(res.rank <= (3 * d).min(monomial_count(s)));
                    assert_eq!(res.proj_dim, ambient_proj_dim(s) - res.rank as i64);
                    assert_eq!(res.basis.len() as i64, res.proj_dim + 1);
                }
            }
        }
    }
}
