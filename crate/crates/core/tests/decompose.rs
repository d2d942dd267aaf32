use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rog::cone_model::{membership, FaceHandle};
use rog::constructions::{
    build, random_member, toeplitz_atom, ChordalGraph, ConeExpr, GlueSpec,
};
use rog::decompose::{
    carath_decompose, decompose_block_toeplitz, decompose_by_tree, decompose_full_extension, decompose_hankel,
    decompose_intertwining, extreme_ray_oracle,
};
use rog::symlin::{numeric_rank, HermMatrix, SymMatrix};

fn v(xs: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(xs)
}

fn parallel(a: &DVector<f64>, b: &DVector<f64>) -> bool {
    (a.dot(b).abs() - a.norm() * b.norm()).abs() < 1e-7
}

fn families() -> Vec<ConeExpr> {
    vec![
        ConeExpr::FullPsd { n: 4 },
        ConeExpr::Diagonal { n: 4 },
        ConeExpr::Hankel { n: 4, m: 1 },
        ConeExpr::Hankel { n: 3, m: 2 },
        ConeExpr::Tridiag { n: 5 },
        ConeExpr::Chordal { graph: ChordalGraph::new(5, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4)]).unwrap() },
        ConeExpr::Codim1 { q: SymMatrix::from_diagonal(&[1.0, -1.0, 2.0, 0.0]) },
        ConeExpr::TernaryQuartic,
        ConeExpr::CrossRatio { angles: [0.2, 0.9, 1.6, 2.5] },
        ConeExpr::FullExtension { child: Box::new(ConeExpr::Hankel { n: 3, m: 1 }), n: 5 },
        ConeExpr::Intertwining {
            first: Box::new(ConeExpr::Hankel { n: 3, m: 1 }),
            second: Box::new(ConeExpr::FullPsd { n: 2 }),
            glue: GlueSpec::coordinate(3, 2, 2, 0),
        },
    ]
}

#[test]
fn identity_in_full_psd_splits_into_three_atoms() {
    let k = build(&ConeExpr::FullPsd { n: 3 }).unwrap();
    let d = carath_decompose(&k, &SymMatrix::identity(3)).unwrap();
    assert_eq!(d.len(), 3);
    assert!(d.residual < 1e-10);
    let vs = d.vectors(3);
    assert!((vs.transpose() * &vs - DMatrix::identity(3, 3)).norm() < 1e-8);
}

#[test]
fn hankel_with_nodes_plus_minus_one() {
    let k = build(&ConeExpr::Hankel { n: 3, m: 1 }).unwrap();
    let x = SymMatrix::from_rows(&[vec![2.0, 0.0, 2.0], vec![0.0, 2.0, 0.0], vec![2.0, 0.0, 2.0]]).unwrap();
    for d in [carath_decompose(&k, &x).unwrap(), decompose_hankel(&x, 3, 1).unwrap()] {
        assert_eq!(d.len(), 2);
        assert!(d.residual < 1e-8);
        for target in [v(&[1.0, 1.0, 1.0]), v(&[1.0, -1.0, 1.0])] {
            let atom = d.atoms.iter().find(|a| parallel(&a.vector, &target)).expect("node atom");
            // unit-vector weight of v(±1)v(±1)ᵀ is ‖v‖² = 3
            assert!((atom.weight - 3.0).abs() < 1e-7);
        }
    }
}

#[test]
fn codim1_identity_splits_along_the_null_cone() {
    let k = build(&ConeExpr::Codim1 { q: SymMatrix::from_diagonal(&[1.0, -1.0]) }).unwrap();
    let d = carath_decompose(&k, &SymMatrix::identity(2)).unwrap();
    assert_eq!(d.len(), 2);
    for a in &d.atoms {
        assert!((a.vector[0].abs() - a.vector[1].abs()).abs() < 1e-8);
        assert!((a.weight - 1.0).abs() < 1e-8);
    }
}

#[test]
fn hankel_node_examples() {
    let v0 = v(&[1.0, 0.0, 0.0]);
    let d = decompose_hankel(&SymMatrix::outer(&v0), 3, 1).unwrap();
    assert_eq!(d.len(), 1);
    assert!(parallel(&d.atoms[0].vector, &v0));
    let e3 = v(&[0.0, 0.0, 1.0]);
    let d = decompose_hankel(&SymMatrix::outer(&e3), 3, 1).unwrap();
    assert_eq!(d.len(), 1);
    assert!(parallel(&d.atoms[0].vector, &e3));
    assert!(decompose_hankel(&SymMatrix::identity(3), 3, 1).is_err());
}

#[test]
fn full_extension_examples() {
    let k = build(&ConeExpr::FullExtension { child: Box::new(ConeExpr::Diagonal { n: 2 }), n: 3 }).unwrap();
    let d = decompose_full_extension(&k, &SymMatrix::identity(3)).unwrap();
    assert_eq!(d.len(), 3);
    for i in 0..3 {
        let mut e = DVector::zeros(3);
        e[i] = 1.0;
        assert!(d.atoms.iter().any(|a| parallel(&a.vector, &e)));
    }
    let x = SymMatrix::from_diagonal(&[2.0, 1.0, 0.0]);
    let d = decompose_full_extension(&k, &x).unwrap();
    assert_eq!(d.len(), 2);
    assert!(d.atoms.iter().all(|a| a.vector[2].abs() < 1e-12));
}

#[test]
fn arrowhead_identity_in_intertwined_psd_cones() {
    let e = ConeExpr::Intertwining {
        first: Box::new(ConeExpr::FullPsd { n: 2 }),
        second: Box::new(ConeExpr::FullPsd { n: 2 }),
        glue: GlueSpec::coordinate(2, 1, 2, 0),
    };
    let k = build(&e).unwrap();
    let d = decompose_intertwining(&k, &SymMatrix::identity(3)).unwrap();
    assert_eq!(d.len(), 3);
    assert!(d.residual < 1e-10);
}

#[test]
fn oracle_examples() {
    let s3 = build(&ConeExpr::FullPsd { n: 3 }).unwrap();
    let x = extreme_ray_oracle(&s3, &FaceHandle::coordinates(3, &[0])).unwrap();
    assert!(parallel(&x, &v(&[1.0, 0.0, 0.0])));
    let c = build(&ConeExpr::Codim1 { q: SymMatrix::from_diagonal(&[1.0, -1.0, 0.0]) }).unwrap();
    let x = extreme_ray_oracle(&c, &FaceHandle::full(3)).unwrap();
    assert!((x[0] * x[0] - x[1] * x[1]).abs() < 1e-10);
    let d3 = build(&ConeExpr::Diagonal { n: 3 }).unwrap();
    let x = extreme_ray_oracle(&d3, &FaceHandle::coordinates(3, &[1, 2])).unwrap();
    assert!(parallel(&x, &v(&[0.0, 1.0, 0.0])));
    assert!(extreme_ray_oracle(&s3, &FaceHandle::from_vectors(3, &[])).is_err());
}

#[test]
fn random_members_split_into_rank_many_independent_atoms() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for e in families() {
        let k = build(&e).unwrap();
        let deg = rog::cone_model::degree(&k).unwrap();
        for trial in 0..15 {
            let r = rng.gen_range(1..=deg);
            let x = random_member(&k, r, &mut rng).unwrap();
            let d = carath_decompose(&k, &x).unwrap_or_else(|err| panic!("{} trial {trial}: {err}", e.kind_name()));
            assert_eq!(d.len(), numeric_rank(&x, 1e-8), "{}", e.kind_name());
            assert!(d.residual <= 1e-7 * (1.0 + x.norm()));
            let vs = d.vectors(k.n());
            assert_eq!(nalgebra::linalg::SVD::new(vs.clone(), false, false).rank(1e-9), d.len());
            for a in &d.atoms {
                assert!(membership(&k, &SymMatrix::outer(&a.vector), 1e-7).unwrap());
            }
            let t = decompose_by_tree(&k, &x).unwrap_or_else(|err| panic!("{} tree: {err}", e.kind_name()));
            assert_eq!(t.len(), d.len(), "{}", e.kind_name());
        }
    }
}

#[test]
fn toeplitz_examples() {
    let one = Complex64::new(1.0, 0.0);
    let h = toeplitz_atom(&DVector::from_element(1, one), Complex64::i(), 2);
    let d = decompose_block_toeplitz(&HermMatrix::outer(&h), 2, 1).unwrap();
    assert_eq!(d.atoms.len(), 1);
    assert!((d.atoms[0].q() - Complex64::i()).norm() < 1e-8);

    let id = HermMatrix::new(DMatrix::identity(6, 6)).unwrap();
    let d = decompose_block_toeplitz(&id, 3, 2).unwrap();
    assert_eq!(d.atoms.len(), 6);
    assert!(d.residual < 1e-8);
    for a in &d.atoms {
        assert!((a.q().norm() - 1.0).abs() < 1e-10);
    }
    let d = decompose_block_toeplitz(&HermMatrix::zeros(4), 2, 2).unwrap();
    assert!(d.atoms.is_empty());
    let mut bad = DMatrix::<Complex64>::identity(2, 2);
    bad[(1, 1)] = Complex64::new(2.0, 0.0);
    assert!(decompose_block_toeplitz(&HermMatrix::new(bad).unwrap(), 2, 1).is_err());
}
