use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rog::constructions::{build, ChordalGraph, ConeExpr, GlueSpec};
use rog::qcqp_relax::{
    certify_exactness, induced_cone, purify, solve_relaxation, CertifyOptions, ExactnessStatus, QcqpProblem, SdpStatus,
};
use rog::symlin::{eig_sym, SymMatrix};
use std::f64::consts::PI;

fn gaussian_sym(n: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
    SymMatrix::symmetrize(DMatrix::from_fn(n, n, |_, _| rng.sample(StandardNormal)))
}

fn random_pd(n: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    SymMatrix::symmetrize(&g * g.transpose() / n as f64 + DMatrix::identity(n, n))
}

fn pair_form(n: usize, i: usize, j: usize) -> SymMatrix {
    let mut m = DMatrix::zeros(n, n);
    m[(i, j)] = 1.0;
    m[(j, i)] = 1.0;
    SymMatrix::symmetrize(m)
}

fn rayleigh(s: &SymMatrix, b: &SymMatrix, x: &DVector<f64>) -> f64 {
    (x.transpose() * s.matrix() * x)[(0, 0)] / (x.transpose() * b.matrix() * x)[(0, 0)]
}

/// Points of the unit sphere in the coordinates `idx` of R^n, on a regular angle grid.
fn sphere_grid(n: usize, idx: &[usize], steps: usize) -> Vec<DVector<f64>> {
    let embed = |vals: &[f64]| {
        let mut x = DVector::zeros(n);
        for (k, &i) in idx.iter().enumerate() {
            x[i] = vals[k];
        }
        x
    };
    match idx.len() {
        1 => vec![embed(&[1.0])],
        2 => (0..steps).map(|a| {
            let t = PI * a as f64 / steps as f64;
            embed(&[t.cos(), t.sin()])
        }).collect(),
        3 => {
            let mut out = Vec::new();
            for a in 0..=steps / 2 {
                let th = PI * a as f64 / (steps / 2) as f64;
                for b in 0..steps {
                    let ph = 2.0 * PI * b as f64 / steps as f64;
                    out.push(embed(&[th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]));
                }
            }
            out
        }
        _ => unreachable!(),
    }
}

#[test]
fn solver_kkt_on_random_feasible_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for case in 0..100 {
        let n = 2 + case % 7;
        let x0 = random_pd(n, &mut rng);
        let k = rng.gen_range(0..=n);
        // constraint forms orthogonal to a positive definite matrix keep the problem strictly feasible
        let a: Vec<SymMatrix> = (0..k)
            .map(|_| {
                let g = gaussian_sym(n, &mut rng);
                g.sub(&x0.scale(g.dot(&x0) / x0.dot(&x0)))
            })
            .collect();
        let p = QcqpProblem::new(gaussian_sym(n, &mut rng), random_pd(n, &mut rng), a).unwrap();
        let sol = solve_relaxation(&p).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal, "case {case}");
        assert!(sol.kkt_residual <= 1e-6, "case {case}: kkt {:e}", sol.kkt_residual);
        let obj = sol.objective.unwrap();
        assert!(sol.duality_gap <= 1e-6 * (1.0 + obj.abs()));
        assert!(eig_sym(&sol.x).unwrap().values.min() >= -1e-7);
        for f in p.constraints() {
            assert!(f.dot(&sol.x).abs() <= 1e-7 * f.norm());
        }
        assert!((p.normalization().dot(&sol.x) - 1.0).abs() <= 1e-7);
    }
}

fn rog_exprs(rng: &mut ChaCha8Rng) -> Vec<ConeExpr> {
    let mut out = vec![
        ConeExpr::FullPsd { n: 3 },
        ConeExpr::Hankel { n: 3, m: 1 },
        ConeExpr::Hankel { n: 4, m: 1 },
        ConeExpr::Hankel { n: 5, m: 1 },
        ConeExpr::Hankel { n: 6, m: 1 },
        ConeExpr::Hankel { n: 3, m: 2 },
        ConeExpr::Tridiag { n: 4 },
        ConeExpr::Tridiag { n: 6 },
        ConeExpr::Diagonal { n: 3 },
        ConeExpr::Codim1 { q: SymMatrix::from_diagonal(&[1.0, 1.0, -1.0]) },
        ConeExpr::Codim1 { q: SymMatrix::from_diagonal(&[1.0, -2.0, 1.0, 0.0]) },
        ConeExpr::CrossRatio { angles: [0.1, 0.7, 1.5, 2.6] },
        ConeExpr::FullExtension { child: Box::new(ConeExpr::Hankel { n: 3, m: 1 }), n: 5 },
        ConeExpr::DirectSum { children: vec![ConeExpr::Hankel { n: 3, m: 1 }, ConeExpr::FullPsd { n: 2 }] },
        ConeExpr::Intertwining {
            first: Box::new(ConeExpr::Hankel { n: 3, m: 1 }),
            second: Box::new(ConeExpr::FullPsd { n: 2 }),
            glue: GlueSpec::coordinate(3, 2, 2, 0),
        },
    ];
    while out.len() < 25 {
        let n = rng.gen_range(3..=6);
        // random chordal graph: each new vertex joins a random clique prefix of a neighbour's closure
        let mut edges = Vec::new();
        for v in 1..n {
            let u = rng.gen_range(0..v);
            edges.push((u, v));
            for w in 0..v {
                if w != u && edges.contains(&(w.min(u), w.max(u))) && rng.gen_bool(0.5) {
                    edges.push((w, v));
                }
            }
        }
        if let Ok(g) = ChordalGraph::new(n, &edges) {
            out.push(ConeExpr::Chordal { graph: g });
        }
    }
    out
}

#[test]
fn rog_instances_are_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let exprs = rog_exprs(&mut rng);
    let mut count = 0;
    for (i, e) in exprs.iter().cycle().take(50).enumerate() {
        let k = build(e).unwrap();
        let n = k.n();
        let p = QcqpProblem::over_cone(&k, gaussian_sym(n, &mut rng), random_pd(n, &mut rng)).unwrap();
        let c = certify_exactness(&p, CertifyOptions { samples: 0 }, &mut rng).unwrap();
        assert_eq!(c.status, ExactnessStatus::ExactByRog, "instance {i} ({})", e.kind_name());
        let x = c.x_opt.as_ref().unwrap_or_else(|| panic!("instance {i}: purified rank {}", c.purified_rank));
        let ext = c.extracted_value.unwrap();
        assert!((ext - c.relaxed_value).abs() <= 1e-5 * c.relaxed_value.abs().max(1.0), "instance {i}");
        assert!(p.infeasibility(x) <= 1e-6, "instance {i}");
        count += 1;
    }
    assert_eq!(count, 50);
}

#[test]
fn small_instances_match_rank_one_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    type Param = Box<dyn Fn(usize) -> Vec<DVector<f64>>>;
    let cases: Vec<(ConeExpr, Param)> = vec![
        (ConeExpr::FullPsd { n: 2 }, Box::new(|s| sphere_grid(2, &[0, 1], s))),
        (ConeExpr::FullPsd { n: 3 }, Box::new(|s| sphere_grid(3, &[0, 1, 2], s))),
        (ConeExpr::Tridiag { n: 3 }, Box::new(|s| {
            let mut v = sphere_grid(3, &[0, 1], s);
            v.extend(sphere_grid(3, &[1, 2], s));
            v
        })),
        (ConeExpr::Diagonal { n: 3 }, Box::new(|_| (0..3).map(|i| DVector::from_fn(3, |j, _| if i == j { 1.0 } else { 0.0 })).collect())),
        (ConeExpr::Hankel { n: 3, m: 1 }, Box::new(|s| {
            (0..s * s).map(|a| {
                let t = PI * a as f64 / (s * s) as f64;
                DVector::from_vec(vec![t.cos() * t.cos(), t.cos() * t.sin(), t.sin() * t.sin()])
            }).collect()
        })),
        (ConeExpr::Codim1 { q: SymMatrix::from_diagonal(&[1.0, 2.0, -1.0]) }, Box::new(|s| {
            (0..s * s).map(|a| {
                let t = 2.0 * PI * a as f64 / (s * s) as f64;
                DVector::from_vec(vec![t.cos(), t.sin() / 2f64.sqrt(), 1.0])
            }).collect()
        })),
    ];
    for (e, param) in &cases {
        let k = build(e).unwrap();
        let n = k.n();
        for _ in 0..3 {
            let p = QcqpProblem::over_cone(&k, gaussian_sym(n, &mut rng), random_pd(n, &mut rng)).unwrap();
            let sol = solve_relaxation(&p).unwrap();
            let pts = param(600);
            for x in &pts {
                for f in p.constraints() {
                    assert!((x.transpose() * f.matrix() * x)[(0, 0)].abs() < 1e-9);
                }
            }
            let oracle = pts.iter().map(|x| rayleigh(p.cost(), p.normalization(), x)).fold(f64::INFINITY, f64::min);
            let relaxed = sol.objective.unwrap();
            assert!((oracle - relaxed).abs() <= 1e-3 * relaxed.abs().max(1.0), "{}: {oracle} vs {relaxed}", e.kind_name());
        }
    }
}

#[test]
fn purification_keeps_value_and_reaches_a_ray() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for e in [ConeExpr::Hankel { n: 4, m: 1 }, ConeExpr::Tridiag { n: 4 }, ConeExpr::FullPsd { n: 3 }] {
        let k = build(&e).unwrap();
        let n = k.n();
        let b = random_pd(n, &mut rng);
        // constant objective on the slice: the barrier returns its analytic centre
        let p = QcqpProblem::over_cone(&k, b.clone(), b).unwrap();
        let sol = solve_relaxation(&p).unwrap();
        let before = eig_sym(&sol.x).unwrap().image_rel(1e-6).ncols();
        assert!(before > 1);
        let pur = purify(&p, &induced_cone(&p).unwrap(), &sol.x).unwrap();
        assert_eq!(pur.rank, 1, "{}", e.kind_name());
        assert!(pur.rank <= before);
        assert!((p.cost().dot(&pur.x) - sol.objective.unwrap()).abs() <= 1e-7);
    }
}

#[test]
fn trichotomy() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let off = SymMatrix::from_rows(&[vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]]).unwrap();
    for case in 0..30 {
        let n = 3;
        let (p, expected) = match case % 3 {
            0 => (QcqpProblem::new(gaussian_sym(n, &mut rng), random_pd(n, &mut rng).scale(-1.0), vec![]).unwrap(), SdpStatus::Infeasible),
            1 => (
                QcqpProblem::new(off.scale(rng.gen_range(0.5..2.0)), SymMatrix::from_diagonal(&[1.0, 0.0, 0.0]), vec![]).unwrap(),
                SdpStatus::Unbounded,
            ),
            _ => (QcqpProblem::new(gaussian_sym(n, &mut rng), random_pd(n, &mut rng), vec![pair_form(n, 0, 2)]).unwrap(), SdpStatus::Optimal),
        };
        let sol = solve_relaxation(&p).unwrap();
        assert_eq!(sol.status, expected, "case {case}");
        match sol.status {
            SdpStatus::Infeasible => assert!(sol.objective.is_none()),
            _ => assert!(sol.objective.is_some()),
        }
    }
}

#[test]
fn four_cycle_pattern_is_never_exact_by_rog() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let n = 4;
    let a = vec![pair_form(n, 0, 2), pair_form(n, 1, 3)];
    let edges = [[0, 1], [1, 2], [2, 3], [3, 0]];
    let mut saw_gap = false;
    for _ in 0..40 {
        let p = QcqpProblem::new(gaussian_sym(n, &mut rng), SymMatrix::identity(n), a.clone()).unwrap();
        let c = certify_exactness(&p, CertifyOptions { samples: 2000 }, &mut rng).unwrap();
        assert_ne!(c.status, ExactnessStatus::ExactByRog);
        // rank-one feasible points live on the edges of the cycle: smallest eigenvalue of each 2×2 block
        let edge_min = edges
            .iter()
            .map(|&[i, j]| {
                let sub = SymMatrix::from_rows(&[
                    vec![p.cost().get(i, i), p.cost().get(i, j)],
                    vec![p.cost().get(j, i), p.cost().get(j, j)],
                ])
                .unwrap();
                eig_sym(&sub).unwrap().values.min()
            })
            .fold(f64::INFINITY, f64::min);
        match c.status {
            ExactnessStatus::ExactWithSolution => assert!((edge_min - c.relaxed_value).abs() < 1e-6),
            ExactnessStatus::GapDetected => {
                assert!(edge_min > c.relaxed_value + 1e-6);
                saw_gap = true;
            }
            _ => {}
        }
    }
    assert!(saw_gap, "expected at least one instance with a relaxation gap");
}
