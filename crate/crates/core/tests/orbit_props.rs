//! Round trips through the orbit constructions and certificate checks.

use frameorbit::gen::{self, InstanceSpec};
use frameorbit::linalg::{op_norm, unitarity_residual};
use frameorbit::orbits::{
    align_isometry_families, block_svd, classify_diagonal_modulus, classify_orbits, construct_bi_unitary,
    construct_biorbit_intertwiners, construct_left_intertwiner, construct_left_unitary, optimality_check_with,
    polar_split_check, special_representatives, DEFAULT_GROUPING_TOL,
};
use frameorbit::{io, Certificate, Error, Execution, GaugePredicate, Mat, Operator, SymmetricGauge};
use proptest::prelude::*;

const G: SymmetricGauge = SymmetricGauge::FROBENIUS;

fn instance(rows: usize, cols: usize, rank: usize, seed: u64) -> Operator {
    gen::random_closed_range(&InstanceSpec { rows, cols, rank, seed, ..InstanceSpec::default() }).unwrap()
}

/// Unitary certificates must be unitary; all must reproduce their residual.
fn check_certificate(c: &Certificate, a: &Operator, b: &Operator) -> Result<(), TestCaseError> {
    prop_assert!(c.satisfied, "{c:?}");
    prop_assert!(c.residual <= 1e-8 * (1.0 + b.norm()));
    if c.kind.is_unitary() {
        prop_assert!(unitarity_residual(c.left.matrix()) <= 1e-10);
        if let Some(w) = &c.right {
            prop_assert!(unitarity_residual(w.matrix()) <= 1e-10);
        }
    }
    prop_assert_eq!(c.verify(a, b).unwrap(), c.residual);
    let back: Certificate = serde_json::from_str(&io::to_json(c).unwrap()).unwrap();
    prop_assert_eq!(&back, c);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn left_round_trip(rows in 1usize..8, cols in 1usize..8, seed in any::<u64>(), size in 0.0f64..0.5) {
        let rank = (seed as usize) % (rows.min(cols) + 1);
        let a = instance(rows, cols, rank, seed);
        let g0 = gen::near_identity_invertible(&mut gen::rng(seed ^ 9), rows, size);
        let b = a.like(&g0 * a.matrix());
        let c = construct_left_intertwiner(&a, &b, G).unwrap();
        check_certificate(&c, &a, &b)?;
    }

    #[test]
    fn left_refuses_other_kernels(dim in 2usize..8, seed in any::<u64>()) {
        let rank = 1 + (seed as usize) % (dim - 1);
        let a = instance(dim, dim, rank, seed);
        let b = instance(dim, dim, rank, seed ^ 1);
        let refused = matches!(construct_left_intertwiner(&a, &b, G), Err(Error::NullSpaceMismatch { .. }));
        prop_assert!(refused);
    }

    #[test]
    fn bi_round_trip(rows in 1usize..8, cols in 1usize..8, seed in any::<u64>()) {
        let rank = (seed as usize) % (rows.min(cols) + 1);
        let a = instance(rows, cols, rank, seed);
        let mut rng = gen::rng(seed ^ 5);
        let g0 = gen::near_identity_invertible(&mut rng, rows, 0.4);
        let w0 = gen::haar_unitary(&mut rng, cols);
        let b = a.like(&g0 * a.matrix() * w0.adjoint());
        let c = construct_biorbit_intertwiners(&a, &b, G).unwrap();
        check_certificate(&c, &a, &b)?;
    }

    #[test]
    fn bi_refuses_rank_change(dim in 2usize..8, seed in any::<u64>()) {
        let rank = 1 + (seed as usize) % (dim - 1);
        let a = instance(dim, dim, rank, seed);
        let b = instance(dim, dim, rank - 1, seed ^ 1);
        let refused = matches!(construct_biorbit_intertwiners(&a, &b, G), Err(Error::IndexMismatch { index } ) if index != 0);
        prop_assert!(refused);
    }

    #[test]
    fn left_unitary_round_trip(rows in 1usize..8, cols in 1usize..8, seed in any::<u64>()) {
        let rank = (seed as usize) % (rows.min(cols) + 1);
        let a = instance(rows, cols, rank, seed);
        let u0 = gen::haar_unitary(&mut gen::rng(seed ^ 3), rows);
        let b = a.like(&u0 * a.matrix());
        let (ma, mb) = (a.polar().unwrap().modulus, b.polar().unwrap().modulus);
        prop_assert!(op_norm(&(ma.matrix() - mb.matrix())) <= 1e-9);
        let c = construct_left_unitary(&a, &b, G).unwrap();
        check_certificate(&c, &a, &b)?;
    }

    #[test]
    fn bi_unitary_derived_identities(rows in 1usize..8, cols in 1usize..8, seed in any::<u64>(), split in any::<bool>()) {
        let rank = (seed as usize) % (rows.min(cols) + 1);
        let mut s = gen::spectrum(&mut gen::rng(seed), rank, 0.5, 2.0);
        if split && rank > 1 {
            // repeated values exercise the block grouping
            s[1] = s[0];
        }
        let a = gen::random_closed_range(&InstanceSpec { rows, cols, rank, seed, spectrum: Some(s), null_space: None }).unwrap();
        let mut rng = gen::rng(seed ^ 11);
        let (u0, w0) = (gen::haar_unitary(&mut rng, rows), gen::haar_unitary(&mut rng, cols));
        let b = a.like(&u0 * a.matrix() * w0.adjoint());
        let c = construct_bi_unitary(&a, &b, G, DEFAULT_GROUPING_TOL).unwrap();
        check_certificate(&c, &a, &b)?;
        let (u, w) = (c.left.matrix(), c.right.as_ref().unwrap().matrix());
        let (pa, pb) = (a.polar().unwrap(), b.polar().unwrap());
        prop_assert!(op_norm(&(w * pa.modulus.matrix() * w.adjoint() - pb.modulus.matrix())) <= 1e-8);
        prop_assert!(op_norm(&(u * pa.partial_isometry.matrix() * w.adjoint() - pb.partial_isometry.matrix())) <= 1e-8);
    }

    #[test]
    fn block_svd_properties(dim in 2usize..9, seed in any::<u64>(), clusters in 1usize..4) {
        let rank = dim.min(2 * clusters);
        let s: Vec<f64> = (0..rank).map(|i| 3.0 - (i / 2) as f64).collect();
        let a = gen::random_closed_range(&InstanceSpec::square(dim, rank, seed).with_spectrum(s)).unwrap();
        let bs = block_svd(&a, DEFAULT_GROUPING_TOL).unwrap();
        prop_assert_eq!(bs.blocks.len(), rank.div_ceil(2));
        let r = bs.residuals(&a).unwrap();
        for x in [r.reconstruction, r.initial_overlap, r.final_overlap, r.initial_sum, r.final_sum] {
            prop_assert!(x <= 1e-9, "{r:?}");
        }
    }

    #[test]
    fn family_alignment(dim in 2usize..8, seed in any::<u64>()) {
        let k = 1 + (seed as usize) % dim;
        let mut rng = gen::rng(seed);
        let q = gen::isometry(&mut rng, dim, dim);
        let r = gen::isometry(&mut rng, dim, dim);
        let u0 = gen::haar_unitary(&mut rng, dim);
        // V_j = e_j-style rank-one pieces, W_j = U0 V_j
        let vs: Vec<Operator> = (0..k)
            .map(|j| Operator::new(q.column(j) * r.column(j).adjoint()).unwrap())
            .collect();
        let ws: Vec<Operator> = vs.iter().map(|v| v.like(&u0 * v.matrix())).collect();
        let fam = align_isometry_families(&vs, &ws, G).unwrap();
        prop_assert!(fam.certificate.satisfied);
        for (v, w) in vs.iter().zip(&ws) {
            prop_assert!(op_norm(&(fam.certificate.left.matrix() * v.matrix() - w.matrix())) <= 1e-9);
        }
    }

    #[test]
    fn diagonal_modulus_reproduces(dim in 2usize..8, seed in any::<u64>()) {
        let rank = 1 + (seed as usize) % dim;
        let a = instance(dim, dim, rank, seed);
        let u0 = gen::random_unitary_near_identity(dim, 0.05, seed ^ 2).unwrap();
        let w0 = gen::random_unitary_near_identity(dim, 0.05, seed ^ 4).unwrap();
        let b = a.like(u0.matrix() * a.matrix() * w0.matrix().adjoint());
        let j = GaugePredicate::new(G, 1.0).unwrap();
        let r = classify_diagonal_modulus(&a, &b, &j, DEFAULT_GROUPING_TOL).unwrap();
        prop_assert!(r.spectra_match);
        let c = r.bi_unitary.certificate.as_ref().expect("bi-unitary witness");
        check_certificate(c, &a, &b)?;
    }

    #[test]
    fn representatives_hit_targets(dim in 1usize..8, cols in 1usize..8, seed in any::<u64>()) {
        let rank = 1 + (seed as usize) % dim.min(cols);
        let s = gen::spectrum(&mut gen::rng(seed), rank, 0.8, 1.2);
        let a = gen::random_closed_range(&InstanceSpec { rows: dim, cols, rank, seed, spectrum: Some(s), null_space: None }).unwrap();
        let j = GaugePredicate::new(G, 1.0).unwrap();
        let r = special_representatives(&a, &j).unwrap();
        let p = a.polar().unwrap().partial_isometry;
        let dual = a.pinv().unwrap().adjoint();
        prop_assert!(op_norm(&(r.isometry_witness.left.matrix() * a.matrix() - p.matrix())) <= 1e-9);
        prop_assert!(op_norm(&(r.dual_witness.left.matrix() * a.matrix() - dual.matrix())) <= 1e-9);
        if let Some(proj) = r.projection {
            prop_assert!(proj.route_gap <= 1e-9);
        }
    }

    #[test]
    fn polar_split_identity(dim in 1usize..7, seed in any::<u64>()) {
        let a = instance(dim, dim, dim, seed);
        let b = instance(dim, dim, dim, seed ^ 1);
        let r = polar_split_check(&a, &b, &GaugePredicate::new(G, 0.5).unwrap()).unwrap();
        prop_assert!(r.identity_residual <= 1e-10 * (1.0 + a.norm() + b.norm()));
        prop_assert!(r.distance <= r.split_bound * (1.0 + 1e-12) + 1e-14);
    }

    #[test]
    fn optimality_every_gauge(dim in 2usize..6, cols in 2usize..6, seed in any::<u64>()) {
        let rank = 1 + (seed as usize) % dim.min(cols);
        let a = instance(dim, cols, rank, seed);
        for g in [SymmetricGauge::TRACE, G, SymmetricGauge::Schatten(4.0), SymmetricGauge::Operator, SymmetricGauge::KyFan(2)] {
            let r = optimality_check_with(&a, g, 24, seed, Execution::Sequential).unwrap();
            prop_assert!(r.isometry.violations == 0 && r.dual.violations == 0, "{g}: {r:?}");
            if g.is_strictly_schur_convex() {
                prop_assert!(r.ok, "{g}: {r:?}");
            }
        }
    }
}

#[test]
fn classify_reports_both_branches() {
    let a = instance(4, 4, 2, 1);
    let j = GaugePredicate::new(G, 0.5).unwrap();
    let same = classify_orbits(&a, &a, &j).unwrap();
    assert!(same.left.member && same.bi.member && same.left_unitary.member && same.unitary.member);
    let far = classify_orbits(&a, &instance(4, 4, 3, 2), &j).unwrap();
    assert!(!far.left.member && !far.bi.member && !far.left_unitary.member && !far.unitary.member);
    assert_eq!(far.kernel_index, Some(1));
}

#[test]
fn identity_pair_gives_identity_witness() {
    let a = instance(3, 4, 2, 8);
    let c = construct_left_intertwiner(&a, &a, G).unwrap();
    assert!(op_norm(&(c.left.matrix() - Mat::identity(3, 3))) <= 1e-10);
}
