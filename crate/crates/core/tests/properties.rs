mod common;

use common::*;
use iluk::{
    apply_preconditioner, block_iluk_factorize, build_preconditioner, coupled_iluk, fill_levels,
    gmres, poisson_3d, solve_unit_triangular, symbolic_phase, with_threads, BcsrMatrix, CsrMatrix,
    Exec, FillParams, IlukPreconditioner, LevelSchedule, PatternMatrix, SolverConfig, Triangle,
    TriangularOperand,
};
use proptest::prelude::*;
use rand::Rng;

fn arb_csr(max_n: usize) -> impl Strategy<Value = CsrMatrix> {
    (1..=max_n, 1..=max_n).prop_flat_map(|(r, c)| {
        prop::collection::vec((0..r, 0..c, -10.0f64..10.0), 0..(r * c).min(400))
            .prop_map(move |t| CsrMatrix::from_triplets(r, c, &t).unwrap())
    })
}

fn arb_pattern(max_n: usize) -> impl Strategy<Value = PatternMatrix> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec(prop::collection::vec(0..n, 0..5), n).prop_map(move |mut rows| {
            for (i, r) in rows.iter_mut().enumerate() {
                r.push(i);
            }
            PatternMatrix::from_rows(n, rows).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn block_round_trip(a in arb_csr(12), bs in 1usize..4) {
        let rows = a.num_rows() - a.num_rows() % bs;
        let cols = a.num_cols() - a.num_cols() % bs;
        prop_assume!(rows > 0 && cols > 0);
        let t: Vec<_> = (0..rows)
            .flat_map(|i| {
                let (c, v) = a.row(i);
                c.iter().zip(v).filter(|(&j, _)| j < cols).map(move |(&j, &v)| (i, j, v)).collect::<Vec<_>>()
            })
            .collect();
        let a = CsrMatrix::from_triplets(rows, cols, &t).unwrap();
        let back = BcsrMatrix::from_csr(&a, bs).unwrap().to_csr();
        let nonzero: Vec<_> = (0..rows)
            .flat_map(|i| {
                let (c, v) = a.row(i);
                c.iter().zip(v).filter(|(_, &v)| v != 0.0).map(move |(&j, &v)| (i, j, v)).collect::<Vec<_>>()
            })
            .collect();
        prop_assert_eq!(back, CsrMatrix::from_triplets(rows, cols, &nonzero).unwrap());
    }

    #[test]
    fn spmv_matches_dense(a in arb_csr(40), seed in any::<u64>()) {
        let mut r = rng(seed);
        let x: Vec<f64> = (0..a.num_cols()).map(|_| r.gen_range(-1.0..1.0)).collect();
        let d = a.to_dense();
        let oracle: Vec<f64> = (0..a.num_rows())
            .map(|i| (0..a.num_cols()).map(|j| d[i * a.num_cols() + j] * x[j]).sum())
            .collect();
        let y = a.spmv(&x).unwrap();
        let scale = max_abs(&oracle).max(1e-300);
        prop_assert!(max_abs_diff(&y, &oracle) / scale <= 1e-13);
        let mut yp = vec![0.0; a.num_rows()];
        with_threads(4, |e| a.spmv_into(&x, &mut yp, e)).unwrap();
        prop_assert_eq!(bits(&y), bits(&yp));
    }

    #[test]
    fn symbolic_monotone_and_fixed_point(p in arb_pattern(40), k in 0usize..4) {
        let pk = symbolic_phase(&p, FillParams::new(k)).unwrap();
        let pk1 = symbolic_phase(&p, FillParams::new(k + 1)).unwrap();
        prop_assert!(p.is_subset_of(&pk));
        prop_assert!(pk.is_subset_of(&pk1));
        // applying the phase to its own output only grows it
        prop_assert!(pk.is_subset_of(&symbolic_phase(&pk, FillParams::new(k)).unwrap()));
        let n = p.n();
        let full = symbolic_phase(&p, FillParams::new(n)).unwrap();
        prop_assert_eq!(&full, &symbolic_phase(&p, FillParams::new(n + 5)).unwrap());
        for row in fill_levels(&p, FillParams::new(k)).unwrap() {
            prop_assert!(row.iter().all(|&(_, l)| l <= k));
        }
    }

    #[test]
    fn symbolic_agrees_with_coupled_pattern(seed in any::<u64>(), k in 0usize..4) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=120);
        let a = random_dominant(&mut r, n, 5);
        let (_, oracle) = coupled_iluk(&a, FillParams::new(k)).unwrap();
        let p = PatternMatrix::from_csr(&a).unwrap();
        prop_assert_eq!(symbolic_phase(&p, FillParams::new(k)).unwrap(), oracle);
    }

    #[test]
    fn level_equals_longest_chain(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=500);
        let mut t = Vec::new();
        for i in 1..n {
            for _ in 0..r.gen_range(0..4) {
                t.push((i, r.gen_range(0..i), 1.0));
            }
        }
        let m = CsrMatrix::from_triplets(n, n, &t).unwrap();
        let deps: Vec<Vec<usize>> = (0..n).map(|i| m.row(i).0.to_vec()).collect();
        let depth = longest_chain(&deps, &(0..n).collect::<Vec<_>>());
        let s = LevelSchedule::build(&TriangularOperand::new(m, Triangle::Lower).unwrap());
        for i in 0..n {
            prop_assert_eq!(s.level_of_row(i), depth[i]);
            for &j in &deps[i] {
                prop_assert!(s.level_of_row(j) < s.level_of_row(i));
            }
        }
        let mut seen: Vec<usize> = s.groups().flatten().copied().collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn triangular_residual_small(seed in any::<u64>(), lower in any::<bool>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=200);
        let mut t = Vec::new();
        for i in 0..n {
            for _ in 0..3 {
                let j = r.gen_range(0..n);
                if (lower && j < i) || (!lower && j > i) {
                    t.push((i, j, r.gen_range(-0.3..0.3)));
                }
            }
        }
        let m = CsrMatrix::from_triplets(n, n, &t).unwrap();
        let tri = if lower { Triangle::Lower } else { Triangle::Upper };
        let op = TriangularOperand::new(m.clone(), tri).unwrap();
        let s = LevelSchedule::build(&op);
        let b: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let x = solve_unit_triangular(&op, &s, &b, Exec::Sequential).unwrap();
        let tx = m.spmv(&x).unwrap();
        let res = (0..n).map(|i| (x[i] + tx[i] - b[i]).abs()).fold(0.0, f64::max);
        prop_assert!(res <= 1e-12 * (max_abs(&b) + max_abs(&x)));
    }
}

/// Random block matrix with dominant diagonal blocks.
fn random_block_matrix(r: &mut impl Rng, nb: usize, bs: usize) -> BcsrMatrix {
    let n = nb * bs;
    let mut t = Vec::new();
    for bi in 0..nb {
        let mut neighbors = vec![bi];
        for _ in 0..2 {
            neighbors.push(r.gen_range(0..nb));
        }
        for &bj in &neighbors {
            for a in 0..bs {
                for b in 0..bs {
                    t.push((bi * bs + a, bj * bs + b, r.gen_range(-1.0..1.0)));
                }
            }
        }
    }
    let a = CsrMatrix::from_triplets(n, n, &t).unwrap();
    let mut d = Vec::new();
    for i in 0..n {
        let off: f64 = a.row(i).1.iter().map(|v| v.abs()).sum();
        d.push((i, i, off + 1.0));
    }
    let t: Vec<_> = (0..n)
        .flat_map(|i| {
            let (c, v) = a.row(i);
            c.iter().zip(v).map(move |(&j, &v)| (i, j, v)).collect::<Vec<_>>()
        })
        .chain(d)
        .collect();
    BcsrMatrix::from_csr(&CsrMatrix::from_triplets(n, n, &t).unwrap(), bs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn factors_are_exact_on_pattern(seed in any::<u64>(), bs in 1usize..4, k in 0usize..4) {
        let mut r = rng(seed);
        let nb = r.gen_range(2..=16);
        let a = random_block_matrix(&mut r, nb, bs);
        let f = build_preconditioner(&a, FillParams::new(k)).unwrap();
        let filled = symbolic_phase(&a.extract_point_pattern().unwrap(), FillParams::new(k)).unwrap();
        prop_assert_eq!(f.pattern(), filled.clone());

        // dense reconstruction of L D (I + U')
        let n = nb * bs;
        let dense = |m: &BcsrMatrix| m.to_csr().to_dense();
        let (mut l, dinv, mut u) = (dense(&f.lower), dense(&f.dinv), dense(&f.upper));
        for i in 0..n {
            l[i * n + i] += 1.0;
            u[i * n + i] += 1.0;
        }
        let mut d = vec![0.0; n * n];
        for bi in 0..nb {
            let blk: Vec<f64> = (0..bs * bs)
                .map(|q| dinv[(bi * bs + q / bs) * n + bi * bs + q % bs])
                .collect();
            let inv = iluk::DenseBlock::from_row_major(bs, &blk).inverse().unwrap();
            // D^-1 D = I within 1e-10
            let check = iluk::DenseBlock::from_row_major(bs, &blk).matmul(&inv);
            for p in 0..bs {
                for q in 0..bs {
                    let e = if p == q { 1.0 } else { 0.0 };
                    prop_assert!((check.get(p, q) - e).abs() <= 1e-10);
                    d[(bi * bs + p) * n + bi * bs + q] = inv.get(p, q);
                }
            }
        }
        let mul = |x: &[f64], y: &[f64]| {
            let mut z = vec![0.0; n * n];
            for i in 0..n {
                for m in 0..n {
                    let v = x[i * n + m];
                    if v != 0.0 {
                        for j in 0..n {
                            z[i * n + j] += v * y[m * n + j];
                        }
                    }
                }
            }
            z
        };
        let ldu = mul(&mul(&l, &d), &u);
        let ad = a.to_csr().to_dense();
        let scale = max_abs(&ad);
        for (bi, bj) in filled.entries() {
            for p in 0..bs {
                for q in 0..bs {
                    let idx = (bi * bs + p) * n + bj * bs + q;
                    prop_assert!((ad[idx] - ldu[idx]).abs() <= 1e-12 * scale,
                        "residual {} at ({}, {})", ad[idx] - ldu[idx], bi, bj);
                }
            }
        }
    }

    #[test]
    fn preconditioner_matches_block_substitution(seed in any::<u64>(), bs in 1usize..4, k in 0usize..3) {
        let mut r = rng(seed);
        let nb = r.gen_range(2..=40);
        let a = random_block_matrix(&mut r, nb, bs);
        let f = build_preconditioner(&a, FillParams::new(k)).unwrap();
        let b: Vec<f64> = (0..nb * bs).map(|_| r.gen_range(-1.0..1.0)).collect();
        let oracle = block_substitution(&f.lower, &f.dinv, &f.upper, &b);
        let m = IlukPreconditioner::new(f).unwrap();
        let x = apply_preconditioner(&m, &b, Exec::Sequential).unwrap();
        prop_assert!(max_abs_diff(&x, &oracle) <= 1e-12 * max_abs(&oracle).max(1.0));
    }

    #[test]
    fn bs_one_block_factors_match_coupled(seed in any::<u64>(), k in 0usize..4) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=120);
        let a = random_dominant(&mut r, n, 5);
        let (oracle, pattern) = coupled_iluk(&a, FillParams::new(k)).unwrap();
        let f = block_iluk_factorize(&BcsrMatrix::from_csr(&a, 1).unwrap(), FillParams::new(k)).unwrap();
        prop_assert_eq!(f.extract_point_pattern().unwrap(), pattern);
        prop_assert!(max_abs_diff(f.values(), oracle.values()) <= 1e-13 * max_abs(oracle.values()));
    }
}

#[test]
fn poisson_blocked_structure_matches_symbolic() {
    let a = BcsrMatrix::from_csr(&poisson_3d(8, 8, 8).unwrap(), 2).unwrap();
    let f = build_preconditioner(&a, FillParams::new(1)).unwrap();
    let expected = symbolic_phase(&a.extract_point_pattern().unwrap(), FillParams::new(1)).unwrap();
    assert_eq!(f.pattern(), expected);
    assert!(f.lower.col_idx().len() > 0);
    for i in 0..f.n() {
        let r = f.lower.row_ptr()[i]..f.lower.row_ptr()[i + 1];
        assert!(f.lower.col_idx()[r].iter().all(|&j| j < i));
        let r = f.upper.row_ptr()[i]..f.upper.row_ptr()[i + 1];
        assert!(f.upper.col_idx()[r].iter().all(|&j| j > i));
    }
}

#[test]
fn symbolic_is_independent_of_values() {
    let mut r = rng(5);
    let a = random_dominant(&mut r, 60, 5);
    let mut b = a.clone();
    for v in b.values_mut() {
        *v = r.gen_range(-3.0..3.0);
    }
    let pa = PatternMatrix::from_csr(&a).unwrap();
    let pb = PatternMatrix::from_csr(&b).unwrap();
    for k in 0..4 {
        assert_eq!(
            symbolic_phase(&pa, FillParams::new(k)).unwrap(),
            symbolic_phase(&pb, FillParams::new(k)).unwrap()
        );
    }
}

#[test]
fn dense_preconditioner_is_exact_solve() {
    let mut r = rng(21);
    let n = 30;
    let dense = random_dense_well_conditioned(&mut r, n);
    let a = CsrMatrix::from_dense(n, n, &dense);
    let m = IlukPreconditioner::new(
        build_preconditioner(&BcsrMatrix::from_csr(&a, 1).unwrap(), FillParams::new(0)).unwrap(),
    )
    .unwrap();
    let b: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
    let x = apply_preconditioner(&m, &b, Exec::Sequential).unwrap();
    let oracle = dense_solve(&dense, &b, n);
    assert!(max_abs_diff(&x, &oracle) <= 1e-10 * max_abs(&oracle));
}

#[test]
fn gmres_manufactured_solutions() {
    let tol = 1e-8;
    let cfg = SolverConfig {
        rel_tol: tol,
        ..SolverConfig::default()
    };
    let mut r = rng(77);
    let spd = poisson_3d(12, 12, 12).unwrap();
    let nonsym = random_dominant(&mut r, 900, 7);
    for (a, bs, k) in [(&spd, 1, 0), (&spd, 4, 2), (&nonsym, 1, 1), (&nonsym, 3, 0)] {
        let n = a.num_rows();
        let xs: Vec<f64> = (0..n).map(|i| 1.0 + (i % 5) as f64 * 0.25).collect();
        let b = a.spmv(&xs).unwrap();
        let m = IlukPreconditioner::new(
            build_preconditioner(&BcsrMatrix::from_csr(a, bs).unwrap(), FillParams::new(k)).unwrap(),
        )
        .unwrap();
        let (x, st) = gmres(a, &b, &m, &cfg, Exec::Sequential).unwrap();
        assert!(st.converged);
        assert!(st.final_relative_residual <= tol);
        let err = max_abs_diff(&x, &xs);
        assert!(err <= 100.0 * tol * max_abs(&xs), "error {err:e}");
        assert_eq!(st.preconditioner_applications, st.iterations + st.restarts + 1);
    }
}

#[test]
fn gmres_is_deterministic_across_workers() {
    let a = poisson_3d(24, 24, 24).unwrap();
    let b = a.spmv(&vec![1.0; a.num_rows()]).unwrap();
    let m = IlukPreconditioner::new(
        build_preconditioner(&BcsrMatrix::from_csr(&a, 2).unwrap(), FillParams::new(1)).unwrap(),
    )
    .unwrap();
    let cfg = SolverConfig::default();
    let (x1, s1) = gmres(&a, &b, &m, &cfg, Exec::Sequential).unwrap();
    for t in [2, 4, 8] {
        let (x, s) = with_threads(t, |e| gmres(&a, &b, &m, &cfg, e)).unwrap();
        assert_eq!(s.iterations, s1.iterations);
        assert_eq!(bits(&x), bits(&x1));
    }
}
