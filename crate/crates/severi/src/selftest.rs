//! Built-in invariant battery behind the `selftest` CLI command: a condensed
//! deterministic run of the crate's cross-module invariants, reporting
//! pass/fail counts per suite. Output is byte-stable for a fixed seed
//! regardless of worker parallelism.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::forms::{classify_point, monomial_count, Form, SingularityKind};
use crate::grassmann::{gamma, reconstruct_subspace, rowspace_contained, Decomposability};
use crate::linsys::{
    condition_matrix, expected_dims, linear_system, stratum_sample, StratumKind, StratumSpec,
};
use crate::nodal::genus;
use crate::qpoly::QPoly;
use crate::rng::{derive_seed, SplitMix64};
use crate::scalar::{FieldKind, Scalar};

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: u32,
    pub failed: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
    pub total_passed: u32,
    pub total_failed: u32,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.total_failed == 0
    }
}

fn suite(name: &str, checks: Vec<bool>) -> SuiteResult {
    let passed = checks.iter().filter(|&&b| b).count() as u32;
    SuiteResult {
        name: name.into(),
        passed,
        failed: checks.len() as u32 - passed,
    }
}

/// Runs the battery. Work items are fixed up front from the seed; only the
/// evaluation is parallel, so the report does not depend on the schedule.
pub fn run(seed: u64) -> Result<SelftestReport> {
    let mut suites = Vec::new();

    // formula checks
    {
        let mut checks = Vec::new();
        for s in 1..=12u32 {
            checks.push(ambient_matches_enumeration(s));
        }
        for n in 1..=10u32 {
            let max = ((n as i64 - 1) * (n as i64 - 2)) / 2;
            for d in 0..=max.min(12) as usize {
                checks.push(genus(n, d).map(|g| g + d as i64 == max).unwrap_or(false));
            }
        }
        suites.push(suite("formulas", checks));
    }

    // Euler relation on random forms
    {
        let tasks: Vec<(u32, u64)> = (0..40u64)
            .map(|i| {
                let mut rng = SplitMix64::new(derive_seed(seed, &[1, i]));
                (
                    1 + (rng.next_below(8) as u32),
                    derive_seed(seed, &[1, i, 7]),
                )
            })
            .collect();
        let checks: Vec<bool> = tasks
            .par_iter()
            .map(|&(s, form_seed)| euler_holds(s, form_seed))
            .collect();
        suites.push(suite("euler-relation", checks));
    }

    // rank + kernel = cols on random matrices
    {
        let checks: Vec<bool> = (0..30u64)
            .into_par_iter()
            .map(|i| rank_kernel_consistent(derive_seed(seed, &[2, i])))
            .collect();
        suites.push(suite("rank-kernel", checks));
    }

    // dimension pipeline vs prime-field crosscheck
    {
        let tasks: Vec<(u32, usize, u64)> = (1..=5u32)
            .flat_map(|s| (1..=3usize).map(move |d| (s, d)))
            .enumerate()
            .map(|(i, (s, d))| (s, d, derive_seed(seed, &[3, i as u64])))
            .collect();
        let checks: Vec<bool> = tasks
            .par_iter()
            .map(|&(s, d, sub)| dim_crosscheck(s, d, sub))
            .collect();
        suites.push(suite("dimension-crosscheck", checks));
    }

    // gamma invariance and reconstruction
    {
        let tasks: Vec<u64> = (0..8u64).map(|i| derive_seed(seed, &[4, i])).collect();
        let checks: Vec<bool> = tasks.par_iter().map(|&s| gamma_invariance(s)).collect();
        suites.push(suite("gamma-invariance", checks));
    }

    // degeneration: specialization consistency
    {
        let tasks: Vec<u64> = (0..6u64).map(|i| derive_seed(seed, &[5, i])).collect();
        let checks: Vec<bool> = tasks
            .par_iter()
            .map(|&s| specialization_consistency(s))
            .collect();
        suites.push(suite("degeneration-specialization", checks));
    }

    // nodal synthesis smoke check
    {
        let checks = vec![synth_smoke(seed)];
        suites.push(suite("nodal-synthesis", checks));
    }

    let total_passed = suites.iter().map(|s| s.passed).sum();
    let total_failed = suites.iter().map(|s| s.failed).sum();
    Ok(SelftestReport {
        seed,
        suites,
        total_passed,
        total_failed,
    })
}

fn ambient_matches_enumeration(s: u32) -> bool {
    // count monomials directly and compare with s(s+3)/2 + 1
    let mut count = 0usize;
    for a in 0..=s {
        for b in 0..=s - a {
            let _c = s - a - b;
            count += 1;
        }
    }
    count == monomial_count(s) && (count as i64 - 1) == (s as i64 * (s as i64 + 3)) / 2
}

fn euler_holds(s: u32, form_seed: u64) -> bool {
    let mut rng = SplitMix64::new(form_seed);
    let coeffs: Vec<Scalar> = (0..monomial_count(s))
        .map(|_| Scalar::from_int(rng.next_in_box(9), FieldKind::Rational))
        .collect();
    let Ok(f) = Form::new(s, coeffs) else {
        return false;
    };
    let Ok((dx, dy, dz)) = f.partials() else {
        return false;
    };
    let x = Form::from_terms(1, &[(1, 0, 0, 1)], FieldKind::Rational);
    let y = Form::from_terms(1, &[(0, 1, 0, 1)], FieldKind::Rational);
    let z = Form::from_terms(1, &[(0, 0, 1, 1)], FieldKind::Rational);
    let lhs = x
        .mul(&dx)
        .and_then(|a| y.mul(&dy).and_then(|b| a.add(&b)))
        .and_then(|a| z.mul(&dz).and_then(|b| a.add(&b)));
    let rhs = f.scale(&Scalar::from_int(s as i64, FieldKind::Rational));
    matches!((lhs, rhs), (Ok(l), Ok(r)) if l == r)
}

fn rank_kernel_consistent(seed: u64) -> bool {
    let mut rng = SplitMix64::new(seed);
    let r = 1 + (rng.next_below(5) as usize);
    let c = 1 + (rng.next_below(7) as usize);
    let entries: Vec<Scalar> = (0..r * c)
        .map(|_| Scalar::from_int(rng.next_in_box(9), FieldKind::Rational))
        .collect();
    let Ok(m) = crate::matrix::Matrix::new(r, c, entries) else {
        return false;
    };
    let (Ok(rank), Ok(kernel)) = (m.rank(), m.kernel_basis()) else {
        return false;
    };
    if rank + kernel.len() != c {
        return false;
    }
    kernel.iter().all(|v| {
        m.mul_vec(v)
            .map(|p| p.iter().all(Scalar::is_zero))
            .unwrap_or(false)
    })
}

fn dim_crosscheck(s: u32, d: usize, seed: u64) -> bool {
    let spec = StratumSpec::new(StratumKind::Generic, seed).with_bound(30);
    let Ok(cfg) = stratum_sample(d, &spec) else {
        return false;
    };
    let Ok(res) = linear_system(s, &cfg) else {
        return false;
    };
    let (n, expected, _) = expected_dims(s, d);
    if res.proj_dim != n - res.rank as i64 || res.proj_dim < expected.min(res.proj_dim) {
        return false;
    }
    // prime-field crosscheck at two primes above 10^4
    for p in [10007u64, 65521] {
        let Ok(reduced) = cfg.reduce_mod_p(p) else {
            return false;
        };
        let Ok(m) = condition_matrix(s, &reduced) else {
            return false;
        };
        if m.rank().map(|r| r != res.rank).unwrap_or(true) {
            return false;
        }
    }
    // every basis form is singular at every configuration point
    res.basis.iter().all(|f| {
        cfg.points().iter().all(|p| {
            classify_point(f, p)
                .map(|v| {
                    !matches!(
                        v.kind,
                        SingularityKind::SmoothPoint | SingularityKind::NotOnCurve
                    )
                })
                .unwrap_or(false)
        })
    })
}

fn gamma_invariance(seed: u64) -> bool {
    let d = 2;
    let k = 3;
    let spec = StratumSpec::new(StratumKind::Generic, seed).with_bound(20);
    let Ok(cfg) = stratum_sample(d, &spec) else {
        return false;
    };
    let ordered = cfg.to_ordered();
    let (Ok(a), Ok(b)) = (
        gamma(&ordered, k),
        ordered.permuted(&[1, 0]).and_then(|c| gamma(&c, k)),
    ) else {
        return false;
    };
    if a != b {
        return false;
    }
    // reconstruction reproduces the condition row space
    let (Ok(m), Ok((rows, verdict))) = (condition_matrix(k, &cfg), reconstruct_subspace(&a)) else {
        return false;
    };
    verdict == Decomposability::Decomposable
        && rowspace_contained(&rows, &m).unwrap_or(false)
        && rowspace_contained(&m, &rows).unwrap_or(false)
}

fn specialization_consistency(seed: u64) -> bool {
    let mut rng = SplitMix64::new(seed);
    let lin = |rng: &mut SplitMix64| QPoly::from_ints(&[rng.next_in_box(5), rng.next_in_box(3)]);
    let Ok(fam) = crate::degeneration::FamilyConfig::new(
        vec![
            [lin(&mut rng), lin(&mut rng), QPoly::from_ints(&[1])],
            [lin(&mut rng), lin(&mut rng), QPoly::from_ints(&[1])],
        ],
        num_rational::BigRational::from_integer(0.into()),
    ) else {
        return true; // degenerate draw: nothing to check
    };
    for t0 in [1i64, 2, -3] {
        let t = num_rational::BigRational::from_integer(t0.into());
        let Ok(cfg) = fam.specialize(&t) else {
            continue;
        };
        let moved = fam.clone().with_t_star(t);
        let (Ok(rep), Ok(expected)) = (crate::degeneration::limit_gamma(&moved, 3), gamma(&cfg, 3))
        else {
            return false;
        };
        if rep.limit != expected || rep.interior_consistent != Some(true) {
            return false;
        }
    }
    true
}

fn synth_smoke(seed: u64) -> bool {
    match crate::nodal::synth_nodal(3, 1, derive_seed(seed, &[6]), 50) {
        Ok(sp) => {
            sp.certificate.scans.len() >= 2
                && sp.certificate.scans.iter().all(|s| s.matches_reduced_nodes)
        }
        Err(_) => false,
    }
}
