use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rog::constructions::{build, cross_ratio_cone, ChordalGraph, ConeExpr, GlueSpec};
use rog::isomorph::{
    cones_isomorphic, cross_ratio, maps_span_onto, rank1_complete, rank1_complete_signs, reconstruct_isomorphism,
    same_s4_orbit, Completion, IsoOutcome, PartialMatrix,
};
use rog::symlin::SymMatrix;

fn v(xs: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(xs)
}

fn random_invertible(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    loop {
        let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let sv = a.clone().svd(false, false).singular_values;
        if sv.min() > 0.2 * sv.max() {
            return a;
        }
    }
}

fn same_outer(x: &DVector<f64>, y: &DVector<f64>, s: &DMatrix<f64>, tol: f64) -> bool {
    let sx = s * x;
    (y * y.transpose() - &sx * sx.transpose()).norm() <= tol
}

#[test]
fn reconstruct_spec_examples() {
    let xs = vec![v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[1.0, 1.0])];
    let w = reconstruct_isomorphism(&xs, &xs).unwrap();
    assert!((w.matrix() - DMatrix::identity(2, 2)).norm() < 1e-12);
    assert!(w.sigma.iter().all(|&s| s == 1.0));

    let ys: Vec<DVector<f64>> = xs.iter().map(|x| x * -2.0).collect();
    let w = reconstruct_isomorphism(&xs, &ys).unwrap();
    assert!((w.matrix().abs() - DMatrix::identity(2, 2) * 2.0).norm() < 1e-12);
    assert!(w.pair_error(&xs, &ys) < 1e-12);

    let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
    let signs = [1.0, -1.0, -1.0];
    let ys: Vec<DVector<f64>> = xs.iter().zip(signs).map(|(x, s)| &a * x * s).collect();
    let w = reconstruct_isomorphism(&xs, &ys).unwrap();
    for (x, y) in xs.iter().zip(&ys) {
        assert!(same_outer(x, y, w.matrix(), 1e-8));
    }
}

#[test]
fn reconstruct_rejects_incompatible_scaling() {
    let xs = vec![v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[1.0, 1.0])];
    let ys = vec![v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[2.0, 1.0])];
    assert!(matches!(reconstruct_isomorphism(&xs, &ys), Err(rog::error::Error::Incompatible { .. })));
}

#[test]
fn reconstruct_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 2..=6 {
        for _ in 0..20 {
            let a = random_invertible(n, &mut rng);
            let m = n + rng.gen_range(1..=n + 2);
            let xs: Vec<DVector<f64>> = (0..m).map(|_| DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))).collect();
            let ys: Vec<DVector<f64>> =
                xs.iter().map(|x| &a * x * if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
            let w = reconstruct_isomorphism(&xs, &ys).unwrap();
            assert!(w.matrix().determinant().abs() > 1e-10);
            for (x, y) in xs.iter().zip(&ys) {
                assert!(same_outer(x, y, w.matrix(), 1e-7));
            }
        }
    }
}

#[test]
fn completion_round_trip_on_erased_rank_one_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..2000 {
        let n = rng.gen_range(1..6);
        let m = rng.gen_range(1..6);
        let e: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let f: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..m {
                if rng.gen_bool(0.6) {
                    entries.push((i, j, e[i] * f[j]));
                }
            }
        }
        let a = PartialMatrix::new(n, m, entries.clone()).unwrap();
        match rank1_complete(&a) {
            Completion::Feasible { e: ce, f: cf } => {
                for (i, j, val) in entries {
                    assert!((ce[i] * cf[j] - val).abs() <= 1e-9 * val.abs());
                }
            }
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn sign_completion_agrees_with_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..300 {
        let n = rng.gen_range(1..=6);
        let m = rng.gen_range(1..=(12 - n).min(6));
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..m {
                if rng.gen_bool(0.5) {
                    entries.push((i, j, if rng.gen_bool(0.5) { 1.0 } else { -1.0 }));
                }
            }
        }
        let a = PartialMatrix::new(n, m, entries.clone()).unwrap();
        let brute = (0u32..(1 << (n + m))).any(|mask| {
            let s = |b: usize| if mask >> b & 1 == 1 { -1.0 } else { 1.0 };
            entries.iter().all(|&(i, j, val)| s(i) * s(n + j) == val)
        });
        let got = rank1_complete_signs(&a).unwrap();
        assert_eq!(got.is_feasible(), brute);
        if let Completion::Feasible { e, f } = got {
            assert!(e.iter().chain(&f).all(|x| x.abs() == 1.0));
        }
    }
}

fn witness_of(out: IsoOutcome) -> rog::isomorph::IsoWitness {
    match out {
        IsoOutcome::Isomorphic { witness } => witness,
        other => panic!("expected a witness, got {other:?}"),
    }
}

#[test]
fn hankel_three_is_isomorphic_to_itself() {
    let k = build(&ConeExpr::Hankel { n: 3, m: 1 }).unwrap();
    let w = witness_of(cones_isomorphic(&k, &k).unwrap());
    assert!(maps_span_onto(w.matrix(), &k, &k));
}

#[test]
fn hankel_three_and_tridiagonal_three_differ() {
    let h = build(&ConeExpr::Hankel { n: 3, m: 1 }).unwrap();
    let t = build(&ConeExpr::Tridiag { n: 3 }).unwrap();
    match cones_isomorphic(&h, &t).unwrap() {
        IsoOutcome::NotIsomorphic { reason } => assert!(reason.contains("(++−)") && reason.contains("(+−0)"), "{reason}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn congruent_copies_are_recognised() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let exprs = vec![
        ConeExpr::FullPsd { n: 4 },
        ConeExpr::Diagonal { n: 5 },
        ConeExpr::Hankel { n: 4, m: 1 },
        ConeExpr::Hankel { n: 3, m: 2 },
        ConeExpr::Tridiag { n: 6 },
        ConeExpr::Chordal { graph: ChordalGraph::new(5, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4)]).unwrap() },
        ConeExpr::Codim1 { q: SymMatrix::from_diagonal(&[1.0, -1.0, 2.0, -0.5]) },
        ConeExpr::CrossRatio { angles: [0.2, 0.9, 1.6, 2.5] },
        ConeExpr::FullExtension { child: Box::new(ConeExpr::Diagonal { n: 2 }), n: 4 },
        ConeExpr::Intertwining {
            first: Box::new(ConeExpr::Hankel { n: 3, m: 1 }),
            second: Box::new(ConeExpr::FullPsd { n: 2 }),
            glue: GlueSpec::coordinate(3, 2, 2, 0),
        },
    ];
    for e in exprs {
        let k = build(&e).unwrap();
        let a = random_invertible(k.n(), &mut rng);
        let k2 = k.congruence(&a).unwrap();
        let w = witness_of(cones_isomorphic(&k, &k2).unwrap());
        assert!(maps_span_onto(w.matrix(), &k, &k2), "{}", e.kind_name());
        assert!(!w.pairs.is_empty());
        assert!(w.ray_error(k.generators(), k2.generators()) <= 1e-7, "{}", e.kind_name());
    }
}

#[test]
fn cross_ratio_cones() {
    let acot = |c: f64| std::f64::consts::FRAC_PI_2 - c.atan();
    let base = [0.0, 1.0, 2.0, 3.0].map(acot);
    let permuted = [base[1], base[0], base[2], base[3]];
    // cot values 0, 1, 2, 3 moved by the Möbius map c ↦ 2c + 1
    let moved = [1.0, 3.0, 5.0, 7.0].map(acot);
    let k = cross_ratio_cone(&base).unwrap();
    for other in [permuted, moved] {
        assert!(same_s4_orbit(cross_ratio(base).unwrap(), cross_ratio(other).unwrap()));
        let k2 = cross_ratio_cone(&other).unwrap();
        let w = witness_of(cones_isomorphic(&k, &k2).unwrap());
        assert!(maps_span_onto(w.matrix(), &k, &k2));
    }
    // λ = 5/2 from cot values 0, 1, 2, −4 is outside the orbit of 4/3
    let far = [0.0, 1.0, 2.0, -4.0].map(acot);
    assert!((cross_ratio(far).unwrap() - 2.5).abs() < 1e-12);
    match cones_isomorphic(&k, &cross_ratio_cone(&far).unwrap()).unwrap() {
        IsoOutcome::NotIsomorphic { reason } => assert!(reason.contains("cross-ratio")),
        other => panic!("{other:?}"),
    }
}
