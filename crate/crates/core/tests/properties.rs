use std::sync::Arc;

use clap::Parser;
use proptest::prelude::*;

use ainfty::ainfty::examples::{poset, preorder};
use ainfty::ainfty::{augment, check_relations, is_strict_unit, op_elems, AInfty, Elem, Gen, TableCategory};
use ainfty::cli::{self, Cli};
use ainfty::coefficients::{invariant_factors, kernel_basis, rank, smith_normal_form, solve_linear, Ring, Scalar, SparseMatrix};
use ainfty::complexes::{cone, find_homotopy, ChainMap, CochainComplex};
use ainfty::nerve::{ainfty_nerve, pi0_core};
use ainfty::twisted::with_cones;

fn matrix(max: usize, range: i64) -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1..=max, 1..=max).prop_flat_map(move |(r, c)| prop::collection::vec(prop::collection::vec(-range..=range, c), r))
}

fn square(n: usize, p: i64) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(0..p, n), n)
}

/// Reflexive-transitive closure of a random relation on `n` points.
fn closure(n: usize, rel: &[bool]) -> Vec<Vec<bool>> {
    let mut leq: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j || rel[i * n + j]).collect()).collect();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if leq[i][k] && leq[k][j] {
                    leq[i][j] = true;
                }
            }
        }
    }
    leq
}

fn random_preorder() -> impl Strategy<Value = (usize, Vec<Vec<bool>>)> {
    (1usize..=4).prop_flat_map(|n| prop::collection::vec(any::<bool>(), n * n).prop_map(move |r| (n, closure(n, &r))))
}

fn preorder_category(n: usize, leq: &[Vec<bool>], ring: Ring) -> TableCategory {
    let leq = leq.to_vec();
    preorder("random", ring, n, move |i, j| leq[i][j])
}

fn one_term(ring: Ring, n: usize) -> Arc<CochainComplex> {
    Arc::new(CochainComplex::new(ring, 0, vec![n], vec![SparseMatrix::zero(0, n)]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn smith_form_decomposes(m in matrix(4, 6)) {
        let a = SparseMatrix::from_dense(Ring::Integers, &m);
        let (u, d, v) = smith_normal_form(&a);
        let z = Ring::Integers;
        prop_assert_eq!(u.mul(z, &a).unwrap().mul(z, &v).unwrap(), d.clone());
        prop_assert!(d.entries().all(|(i, j, _)| i == j));
        let diag: Vec<i64> = (0..d.rows().min(d.cols())).map(|i| d.get(i, i).to_int()).filter(|&x| x != 0).collect();
        prop_assert!(diag.windows(2).all(|w| w[1] % w[0] == 0));
        prop_assert_eq!(invariant_factors(&u), vec![1; u.rows()]);
        prop_assert_eq!(invariant_factors(&v), vec![1; v.rows()]);
    }

    #[test]
    fn solutions_are_exact(m in matrix(5, 4), x in prop::collection::vec(-3i64..=3, 5), p in prop::sample::select(vec![0u32, 2, 3, 5])) {
        let ring = if p == 0 { Ring::Integers } else { Ring::PrimeField(p) };
        let a = SparseMatrix::from_dense(ring, &m);
        let xs: Vec<(usize, Scalar)> = x.iter().take(a.cols()).enumerate().map(|(i, &c)| (i, ring.int(c))).filter(|(_, c)| !c.is_zero()).collect();
        let b = a.apply(ring, &xs);
        let y = solve_linear(ring, &a, &b).unwrap();
        prop_assert!(y.is_some());
        prop_assert_eq!(a.apply(ring, &y.unwrap()), b);
    }

    #[test]
    fn kernel_vectors_vanish(m in matrix(5, 4), p in prop::sample::select(vec![2u32, 3, 7])) {
        let ring = Ring::PrimeField(p);
        let a = SparseMatrix::from_dense(ring, &m);
        let k = kernel_basis(ring, &a);
        prop_assert_eq!(k.len(), a.cols() - rank(ring, &a));
        for v in &k {
            prop_assert!(a.apply(ring, v).is_empty());
        }
    }

    #[test]
    fn cone_is_acyclic_iff_iso(m in square(3, 3)) {
        let ring = Ring::PrimeField(3);
        let f = SparseMatrix::from_dense(ring, &m);
        let c = one_term(ring, 3);
        let map = ChainMap::new(c.clone(), c, 0, vec![f.clone()]).unwrap();
        let k = cone(&map).unwrap();
        prop_assert_eq!(k.is_acyclic_in(-2, 1), rank(ring, &f) == 3);
    }

    #[test]
    fn found_homotopies_verify(d in square(2, 5), h in square(2, 5)) {
        let ring = Ring::PrimeField(5);
        let d = SparseMatrix::from_dense(ring, &d);
        let c = Arc::new(CochainComplex::new(ring, 0, vec![2, 2], vec![d.clone(), SparseMatrix::zero(0, 2)]).unwrap());
        let h = SparseMatrix::from_dense(ring, &h);
        let g = ChainMap::new(c.clone(), c.clone(), 0, vec![h.mul(ring, &d).unwrap(), d.mul(ring, &h).unwrap()]).unwrap();
        prop_assert!(g.is_chain_map());
        let zero = ChainMap::zero(c.clone(), c, 0);
        let found = find_homotopy(&zero, &g).unwrap();
        prop_assert!(found.is_some_and(|w| w.verify()));
    }

    #[test]
    fn preorders_round_trip_and_satisfy_relations((n, leq) in random_preorder()) {
        let c = preorder_category(n, &leq, Ring::PrimeField(3));
        let back = TableCategory::from_text(&c.to_text()).unwrap();
        prop_assert_eq!(back.to_text(), c.to_text());
        prop_assert!(check_relations(&c, 4, None).passed());
    }

    #[test]
    fn adjoined_units_stay_strict((n, leq) in random_preorder()) {
        let c = preorder_category(n, &leq, Ring::PrimeField(2));
        let plus = augment(augment(c));
        for x in 0..n {
            prop_assert!(is_strict_unit(&plus, x, &Elem::basis(plus.one(x))));
            let inner = Elem::basis(plus.base.one(x));
            prop_assert!(is_strict_unit(&plus.base, x, &inner));
            prop_assert_eq!(op_elems(&plus, &[&inner, &Elem::basis(plus.one(x))], false), inner);
        }
    }

    #[test]
    fn pi0_of_core_is_isomorphism_classes((n, leq) in random_preorder()) {
        let c = preorder_category(n, &leq, Ring::PrimeField(2));
        let nv = ainfty_nerve(&c, 3).unwrap();
        let core = nv.core(&nv.truncate(100_000).unwrap()).unwrap();
        let mut want: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            if !want.iter().any(|cl| cl.contains(&i)) {
                want.push((i..n).filter(|&j| leq[i][j] && leq[j][i]).collect());
            }
        }
        prop_assert_eq!(pi0_core(&core), want);
    }

    #[test]
    fn random_cones_satisfy_relations(coeffs in prop::collection::vec((0usize..3, 0usize..3, 0i64..3), 1..3)) {
        let ring = Ring::PrimeField(3);
        let c = poset(ring, 3);
        let cones: Vec<Elem> = coeffs.iter().map(|&(i, j, k)| {
            let (i, j) = (i.min(j), i.max(j));
            Elem::new(i, j, if k == 0 { vec![] } else { vec![(0, ring.int(k))] })
        }).collect();
        let tw = with_cones(c, &cones).unwrap();
        prop_assert!(check_relations(&tw, 4, Some(1500)).passed());
    }

    #[test]
    fn windows_are_validated_before_work(lo in -12i32..6, hi in -12i32..12) {
        let cli = Cli::parse_from(["ainfty", "check", "k", "--window", &format!("{lo},{hi}")]);
        let report = cli::run(&cli);
        let valid = lo <= hi && hi - lo <= 16;
        prop_assert_eq!(report.exit_code(), if valid { 0 } else { 2 });
        prop_assert!(valid || report.sections.is_empty());
    }

    #[test]
    fn reports_are_deterministic(name in prop::sample::select(ainfty::data::CATEGORIES.iter().map(|(n, _)| *n).collect::<Vec<_>>())) {
        let cli = Cli::parse_from(["ainfty", "check", name]);
        prop_assert_eq!(cli::run(&cli).json(), cli::run(&cli).json());
    }
}

#[test]
fn bundled_files_round_trip() {
    for (name, text) in ainfty::data::CATEGORIES {
        let c = TableCategory::from_text(text).unwrap();
        assert_eq!(c.to_text(), *text, "{name}");
    }
}

#[test]
fn bundled_categories_have_gens_in_declared_degrees() {
    for (_, text) in ainfty::data::CATEGORIES {
        let c = TableCategory::from_text(text).unwrap();
        for (args, out) in c.ops() {
            let deg: i32 = args.iter().map(|&g| c.degree(g)).sum::<i32>() + 2 - args.len() as i32;
            let (x, y) = (args[args.len() - 1].src, args[0].tgt);
            for &(i, _) in out {
                assert_eq!(c.degree(Gen::new(x, y, i)), deg, "{}", c.name);
            }
        }
    }
}
