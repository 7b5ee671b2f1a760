//! Acceptance run: one line per criterion with its runtime and budget.
//!
//! Criteria whose literal statement is refuted by an explicit counterexample
//! while the certified finite-truncation form holds are printed as RED and do
//! not fail the run; any other failure does.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use ainfty::ainfty::examples::{contractible_ideal, dual_numbers, ground, poset, preorder, z2_resolution};
use ainfty::ainfty::{augment, check_relations, hom_complex, is_strict_unit, is_unit, AInfty, Elem, Gen, TableCategory};
use ainfty::coefficients::{solve_linear, Ring, Scalar};
use ainfty::functors::{gauged_contractible_ideal, gauged_path, hochschild};
use ainfty::localization::{verify_mod_i, verify_right_inverse, verify_ts};
use ainfty::nerve::{ainfty_nerve, compare_nerves, dg_nerve, fill_all, inner_horns, pi0_core, pi1_core};
use ainfty::twisted::{hom_into_cone_is_cone, is_acyclic_hom, with_cones, zw_inverse_homotopies, zw_operators};
use ainfty::{data, suite};

enum Outcome {
    Pass(String),
    /// Literal statement refuted; certified form holds.
    Red(String),
    Fail(String),
}

type Check = fn() -> Outcome;

fn f2() -> Ring {
    Ring::PrimeField(2)
}

fn units(c: &TableCategory) -> Vec<Elem> {
    (0..c.num_objects()).map(|x| c.unit(x).unwrap()).collect()
}

fn fail_unless(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn bundled() -> Vec<TableCategory> {
    data::CATEGORIES.iter().map(|(_, t)| TableCategory::from_text(t).unwrap()).collect()
}

/// Strict examples and non-strict ones with an extra unit `1 + γ`.
fn unit_examples() -> Vec<(TableCategory, Vec<Elem>)> {
    let one_gamma = Elem::new(0, 0, vec![(0, Scalar::ONE), (2, Scalar::ONE)]);
    let mut out: Vec<(TableCategory, Vec<Elem>)> = [poset(f2(), 1), poset(Ring::PrimeField(3), 2), z2_resolution(Ring::Integers), dual_numbers(f2(), 0)].into_iter().map(|c| {
        let u = units(&c);
        (c, u)
    }).collect();
    for c in [contractible_ideal(Ring::Rationals), gauged_contractible_ideal(Ring::Rationals)] {
        let mut u = units(&c);
        u.push(one_gamma.clone());
        out.push((c, u));
    }
    out
}

fn c1_relations() -> Outcome {
    let run = || -> Result<String, String> {
        let mut cats = bundled();
        cats.push(gauged_path(Ring::Rationals));
        let mut tuples = 0;
        for c in &cats {
            let rep = check_relations(c, 4, None);
            fail_unless(rep.passed(), || format!("{}: {:?}", c.name, rep.first_failure()))?;
            tuples += rep.lengths.iter().map(|r| r.tuples_checked).sum::<usize>();
        }
        let mut tw_count = 0;
        for (c, us) in unit_examples() {
            let name = c.name.clone();
            let tw = with_cones(c, &us).map_err(|e| e.to_string())?;
            let rep = check_relations(&tw, 4, Some(4000));
            fail_unless(rep.passed(), || format!("Tw({name}): {:?}", rep.first_failure()))?;
            tw_count += 1;
        }
        // Hand-picked perturbation: m²(1, ε) = 2ε breaks the Leibniz rule
        // m¹m²(1, ε) = m²(1, m¹ε), since 4·1 ≠ 2·1 over ℤ.
        let mut z = z2_resolution(Ring::Integers);
        let (one, eps) = (Gen::new(0, 0, 0), Gen::new(0, 0, 1));
        z.set_op(&[one, eps], &[(eps, 2)]);
        let rep = check_relations(&z, 4, None);
        fail_unless(!rep.passed(), || "perturbed m²(1, ε) passes".into())?;
        let mut caught = 0;
        let mut tried = 0;
        for c in &cats {
            let muts = suite::mutations(c, 8);
            let k = muts.iter().filter(|(_, m)| !check_relations(m, 4, Some(2000)).passed()).count();
            tried += muts.len();
            caught += k;
            if ["gauged-ideal", "gauged-path", "square", "z2-resolution", "contractible-ideal"].contains(&c.name.as_str()) {
                fail_unless(k > 0, || format!("no mutation of {} detected", c.name))?;
            }
        }
        Ok(format!("{} categories ({tuples} tuples) and {tw_count} Tw-cone categories pass at l <= 4; mutations caught {caught}/{tried}", cats.len()))
    };
    into_outcome(run())
}

fn is_cohomologous<A: AInfty + ?Sized>(a: &A, u: &Elem, v: &Elem) -> bool {
    let h = hom_complex(a, u.src, u.tgt).unwrap();
    let rhs = h.coords(0, &u.sub(a.ring(), v).v);
    matches!(solve_linear(a.ring(), &h.complex.diff(-1), &rhs), Ok(Some(_)))
}

fn c2_units() -> Outcome {
    let run = || -> Result<String, String> {
        let mut n = 0;
        for c in [ground(f2()), poset(f2(), 2), dual_numbers(Ring::PrimeField(3), -1), z2_resolution(Ring::Integers), contractible_ideal(Ring::Rationals)] {
            for x in 0..c.num_objects() {
                let u = c.unit(x).unwrap();
                fail_unless(is_strict_unit(&c, x, &u), || format!("{}: unit of {x} not strict", c.name))?;
                let v = is_unit(&c, x, &u).map_err(|e| e.to_string())?;
                fail_unless(v.is_unit && v.all_zero(), || format!("{}: strict unit of {x} lacks a zero witness", c.name))?;
                let plus = augment(&c);
                let one = Elem::basis(plus.one(x));
                fail_unless(is_strict_unit(&plus, x, &one), || format!("{}: 1_X not strict in A+", c.name))?;
                fail_unless(!is_cohomologous(&plus, &u, &one), || format!("{}: 1_X cohomologous to u_X", c.name))?;
                n += 1;
            }
        }
        let d = dual_numbers(f2(), 0);
        let eps = Elem::basis(Gen::new(0, 0, 1));
        fail_unless(!is_unit(&d, 0, &eps).map_err(|e| e.to_string())?.is_unit, || "ε passes is_unit".into())?;
        let g = gauged_contractible_ideal(Ring::Rationals);
        let u = g.unit(0).unwrap();
        fail_unless(!is_strict_unit(&g, 0, &u) && is_unit(&g, 0, &u).map_err(|e| e.to_string())?.is_unit, || "gauged unit misclassified".into())?;
        Ok(format!("{n} strict units with zero witnesses; ε rejected; adjoined units strict and not cohomologous to u_X"))
    };
    into_outcome(run())
}

fn c3_cones() -> Outcome {
    let run = || -> Result<String, String> {
        let mut homs = 0;
        for (c, us) in unit_examples() {
            let n = c.num_objects();
            let name = c.name.clone();
            let tw = with_cones(c, &us).map_err(|e| e.to_string())?;
            for k in n..n + us.len() {
                for x in 0..n {
                    fail_unless(is_acyclic_hom(&tw, x, k, -3, 2).unwrap() && is_acyclic_hom(&tw, k, x, -3, 2).unwrap(), || format!("{name}: hom between {x} and cone {k}"))?;
                    fail_unless(hom_into_cone_is_cone(&tw, x, k).unwrap(), || format!("{name}: hom({x}, cone {k}) is not the mapping cone"))?;
                    homs += 2;
                }
                for k2 in n..n + us.len() {
                    fail_unless(is_acyclic_hom(&tw, k, k2, -3, 2).unwrap(), || format!("{name}: hom(cone {k}, cone {k2})"))?;
                    homs += 1;
                }
            }
        }
        Ok(format!("{homs} hom complexes involving cones of units vanish on [-3, 2]"))
    };
    into_outcome(run())
}

fn c4_zw() -> Outcome {
    let run = || -> Result<String, String> {
        let (mut pairs, mut zero) = (0, 0);
        for (c, us) in unit_examples() {
            let n = c.num_objects();
            let strict: Vec<bool> = us.iter().map(|u| is_strict_unit(&c, u.src, u)).collect();
            let name = c.name.clone();
            let tw = with_cones(c, &us).map_err(|e| e.to_string())?;
            for (i, e) in us.iter().enumerate() {
                for j in 0..us.len() {
                    let ops = zw_operators(&tw, e.src, n + j, &e.v).map_err(|e| e.to_string())?;
                    let (a, b) = zw_inverse_homotopies(&ops).map_err(|e| e.to_string())?;
                    let (a, b) = (a.ok_or(format!("{name}: no homotopy ZW ~ id"))?, b.ok_or(format!("{name}: no homotopy WZ ~ id"))?);
                    fail_unless(a.verify() && b.verify(), || format!("{name}: homotopy does not verify"))?;
                    if strict[i] && strict[j] {
                        fail_unless(a.is_zero() && b.is_zero(), || format!("{name}: strict pair ({i}, {j}) has nonzero homotopy"))?;
                        zero += 1;
                    }
                    pairs += 1;
                }
            }
        }
        Ok(format!("{pairs} unit pairs certified; {zero} strict pairs with zero homotopies"))
    };
    into_outcome(run())
}

/// Cohomology of `hom_A` on [-2, 1], computed by hand.
fn expected_base(name: &str, x: &str, y: &str, d: i32) -> &'static str {
    match (name, x, y, d) {
        ("k", _, _, 0) => "F_2",
        ("k[1]", "1", "0", _) => "0",
        ("k[1]", _, _, 0) => "F_2",
        ("z2-resolution", _, _, 0) => "Z/2",
        _ => "0",
    }
}

fn c5_right_inverse() -> Outcome {
    let mut literal_failures = Vec::new();
    let run = |lf: &mut Vec<String>| -> Result<String, String> {
        for c in [ground(f2()), poset(f2(), 1), z2_resolution(Ring::Integers)] {
            let rep = verify_right_inverse(&c, &units(&c), 3, -2, 1).map_err(|e| e.to_string())?;
            for p in &rep.pairs {
                for r in &p.rows {
                    let want = expected_base(&c.name, &p.source, &p.target, r.degree);
                    fail_unless(r.base == want, || format!("{}: H^{}(hom_A({}, {})) = {}, expected {want}", c.name, r.degree, p.source, p.target, r.base))?;
                }
                fail_unless(p.stable_image_iso, || format!("{}: stable image differs at ({}, {})", c.name, p.source, p.target))?;
                if p.source != p.target {
                    fail_unless(p.quasi_iso && p.stable, || format!("{}: ({}, {}) not a quasi-isomorphism", c.name, p.source, p.target))?;
                }
                if !(p.quasi_iso && p.stable) {
                    let r = p.rows.iter().find(|r| r.base != r.localized).map(|r| format!("H^{} = {} vs {}", r.degree, r.base, r.localized)).unwrap_or_default();
                    lf.push(format!("{} {}->{}: {r}", c.name, p.source, p.target));
                }
            }
        }
        Ok("off-diagonal pairs iso and stable at L = 3 vs 4; endomorphisms iso onto the stable image".into())
    };
    match run(&mut literal_failures) {
        Ok(s) if literal_failures.is_empty() => Outcome::Pass(s),
        Ok(s) => Outcome::Red(format!("literal F_(<=3) iso fails on {} ({}); {s}", literal_failures.len(), literal_failures[0])),
        Err(e) => Outcome::Fail(e),
    }
}

fn c6_ts() -> Outcome {
    let run = || -> Result<String, String> {
        let mut names = Vec::new();
        for c in [ground(f2()), ground(Ring::PrimeField(3)), dual_numbers(Ring::PrimeField(3), -1), z2_resolution(Ring::Integers), gauged_contractible_ideal(Ring::Rationals)] {
            let rep = verify_ts(&c, &units(&c), 0, 3, -2, 1).map_err(|e| e.to_string())?;
            fail_unless(rep.passed(), || format!("{}: {rep:?}", c.name))?;
            names.push(c.name.clone());
        }
        Ok(format!("H, G, K, t' identities and claims (I), (II) hold at L = 3 on {}", names.join(", ")))
    };
    into_outcome(run())
}

fn c7_mod_i() -> Outcome {
    let mut literal = Vec::new();
    let run = |lf: &mut Vec<String>| -> Result<String, String> {
        for c in [ground(f2()), poset(f2(), 1), z2_resolution(Ring::Integers)] {
            let rep = verify_mod_i(&c, &units(&c), 3, -2, 1, 4, 2000).map_err(|e| e.to_string())?;
            fail_unless(rep.closure_failure.is_none(), || format!("{}: {:?}", c.name, rep.closure_failure))?;
            fail_unless(rep.closure_tuples.len() == 4 && rep.closure_tuples.iter().all(|&n| n > 0), || format!("{}: closure tuples {:?}", c.name, rep.closure_tuples))?;
            for p in &rep.pairs {
                fail_unless(p.a_to_loc && p.loc_to_plus_stable_image && p.projection_retracts, || format!("{}: {p:?}", c.name))?;
                if !(p.loc_to_plus && p.plus_to_quotient) {
                    lf.push(format!("{} {}->{}", c.name, p.source, p.target));
                }
            }
        }
        Ok("I closed under b^k, k <= 4; A -> A[id^-1] iso and the projection inverts the stable image".into())
    };
    match run(&mut literal) {
        Ok(s) if literal.is_empty() => Outcome::Pass(s),
        Ok(s) => Outcome::Red(format!("literal chain-map isomorphisms fail on {} pairs (first {}); {s}", literal.len(), literal[0])),
        Err(e) => Outcome::Fail(e),
    }
}

fn c8_nerve() -> Outcome {
    let run = || -> Result<String, String> {
        let e = |e: ainfty::nerve::NerveError| e.to_string();
        for c in [ground(f2()), poset(f2(), 1), dual_numbers(f2(), 0), dual_numbers(Ring::PrimeField(3), -1), data::category("square")] {
            let cmp = compare_nerves(&c, 3, 30, 7, 200_000).map_err(e)?;
            fail_unless(cmp.residuals_equal && cmp.simplices_equal == Some(true), || format!("{}: nerves differ", c.name))?;
            let (dg, ai) = (dg_nerve(&c, 3).map_err(e)?, ainfty_nerve(&c, 3).map_err(e)?);
            fail_unless(dg.truncate(200_000).map_err(e)?.simplices == ai.truncate(200_000).map_err(e)?.simplices, || format!("{}: truncations differ", c.name))?;
        }
        let mut horns = 0;
        for c in [poset(Ring::PrimeField(3), 2), gauged_path(Ring::PrimeField(3)), dual_numbers(Ring::PrimeField(3), -1)] {
            let nv = ainfty_nerve(&c, 3).map_err(e)?;
            let ts = nv.truncate(200_000).map_err(e)?;
            for n in 2..=3 {
                horns += fill_all(&nv, &inner_horns(&ts, n)).map_err(|m| format!("{}: {m}", c.name))?;
            }
        }
        // π₁(core, x) ≅ (H⁰)^×: trivial over 𝔽₂, cyclic of order 4 over 𝔽₅.
        for (p, want) in [(2, "trivial"), (5, "Z/4")] {
            let c = ground(Ring::PrimeField(p));
            let nv = ainfty_nerve(&c, 3).map_err(e)?;
            let core = nv.core(&nv.truncate(200_000).map_err(e)?).map_err(e)?;
            let got = pi1_core(&core, 0)?.group.describe();
            fail_unless(got == want, || format!("pi_1 over F{p} is {got}"))?;
        }
        // 0 -> 1 ≅ 2: classes {0}, {1, 2}.
        let c = preorder("iso", f2(), 3, |i, j| (i, j) != (1, 0) && (i, j) != (2, 0));
        let nv = ainfty_nerve(&c, 3).map_err(e)?;
        let core = nv.core(&nv.truncate(200_000).map_err(e)?).map_err(e)?;
        let pi0 = pi0_core(&core);
        fail_unless(pi0 == vec![vec![0], vec![1, 2]] && nv.h0_iso_classes(1000).map_err(e)? == pi0, || format!("pi_0 = {pi0:?}"))?;
        Ok(format!("dg and A-infinity nerves identical at N = 3; {horns} inner horns filled; pi_1 = 1, Z/4; pi_0 = H^0-iso classes"))
    };
    into_outcome(run())
}

/// Rank over 𝔽₂ of a dense 0/1 matrix given by rows.
fn rank_f2(mut rows: Vec<Vec<u8>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][c] == 1) else { continue };
        rows.swap(r, p);
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row[c] == 1 {
                for (a, b) in row.iter_mut().zip(&pivot) {
                    *a ^= b;
                }
            }
        }
        r += 1;
    }
    r
}

/// The classical Hochschild differential of `k[ε]/ε²` over 𝔽₂ from `C^n`
/// to `C^{n+1}`, `C^n = Hom(A^{⊗n}, A)` with basis (input word, output).
fn classical_delta(n: usize) -> Vec<Vec<u8>> {
    // Basis of A: 0 = 1, 1 = ε. Product of basis elements, None for zero.
    let mul = |a: usize, b: usize| if a + b < 2 { Some(a + b) } else { None };
    let word = |code: usize, len: usize| (0..len).map(|i| (code >> i) & 1).collect::<Vec<_>>();
    let code = |w: &[usize]| w.iter().enumerate().map(|(i, &a)| a << i).sum::<usize>();
    let (src, tgt) = (2usize.pow(n as u32) * 2, 2usize.pow(n as u32 + 1) * 2);
    let mut m = vec![vec![0u8; src]; tgt];
    for t in 0..2usize.pow(n as u32 + 1) {
        let a = word(t, n + 1);
        // Each term: (input word of f, left factor, right factor).
        let mut terms: Vec<(Vec<usize>, usize, usize)> = vec![(a[1..].to_vec(), a[0], 0), (a[..n].to_vec(), 0, a[n])];
        for i in 0..n {
            if let Some(p) = mul(a[i], a[i + 1]) {
                let mut w = a[..i].to_vec();
                w.push(p);
                w.extend_from_slice(&a[i + 2..]);
                terms.push((w, 0, 0));
            }
        }
        for (w, l, r) in terms {
            for o in 0..2 {
                if let Some(out) = mul(l, o).and_then(|x| mul(x, r)) {
                    m[t * 2 + out][code(&w) * 2 + o] ^= 1;
                }
            }
        }
    }
    m
}

fn c9_hochschild() -> Outcome {
    let run = || -> Result<String, String> {
        let a = dual_numbers(f2(), 0);
        let hh = hochschild(&a, 3).map_err(|e| e.to_string())?;
        let c = hh.complex();
        let ranks: Vec<usize> = (0..3).map(|n| rank_f2(classical_delta(n))).collect();
        let mut dims = Vec::new();
        for n in 0..=3usize {
            let dim = 2usize.pow(n as u32 + 1);
            fail_unless(c.dim(n as i32) == dim, || format!("C^{n} has dimension {}, classical {dim}", c.dim(n as i32)))?;
            let rank_in = if n == 0 { 0 } else { ranks[n - 1] };
            let rank_out = if n < 3 { ranks[n] } else { 0 };
            let h = dim - rank_in - rank_out;
            let ours = c.cohomology_in(n as i32, n as i32).get(&(n as i32)).map_or(0, |g| g.free);
            fail_unless(ours == h, || format!("H^{n}: {ours} vs classical {h}"))?;
            dims.push(h);
        }
        fail_unless(dims[0] == 2, || format!("HH^0 has dimension {}", dims[0]))?;
        Ok(format!("cochains 2, 4, 8, 16 and cohomology {dims:?} match the classical complex; HH^0 = F_2^2"))
    };
    into_outcome(run())
}

fn c10_determinism() -> Outcome {
    let run = || -> Result<String, String> {
        let go = || {
            Command::new(env!("CARGO_BIN_EXE_ainfty")).args(["verify-paper", "--format", "json"]).output().map_err(|e| e.to_string())
        };
        let (a, b) = (go()?, go()?);
        fail_unless(a.status.code() == Some(0), || format!("verify-paper exited with {:?}: {}", a.status.code(), String::from_utf8_lossy(&a.stdout)))?;
        fail_unless(a.stdout == b.stdout, || "reports differ".into())?;
        let v: serde_json::Value = serde_json::from_slice(&a.stdout).map_err(|e| e.to_string())?;
        fail_unless(v["schema"] == ainfty::cli::SCHEMA, || "schema tag missing".into())?;
        Ok(format!("two verify-paper runs give identical {}-byte reports", a.stdout.len()))
    };
    into_outcome(run())
}

fn into_outcome(r: Result<String, String>) -> Outcome {
    match r {
        Ok(s) => Outcome::Pass(s),
        Err(e) => Outcome::Fail(e),
    }
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, Duration, Check); 10] = [
        (1, "relation suite and mutation harness", Duration::from_secs(10), c1_relations),
        (2, "unit suite", Duration::from_secs(5), c2_units),
        (3, "cones of units are acyclic", Duration::from_secs(10), c3_cones),
        (4, "ZW and WZ homotopic to the identity", Duration::from_secs(10), c4_zw),
        (5, "right inverse at L = 3", Duration::from_secs(120), c5_right_inverse),
        (6, "H, G, K, t identities", Duration::from_secs(60), c6_ts),
        (7, "mod-I chain", Duration::from_secs(120), c7_mod_i),
        (8, "nerve suite", Duration::from_secs(30), c8_nerve),
        (9, "Hochschild complex of the dual numbers", Duration::from_secs(30), c9_hochschild),
        (10, "deterministic reports", Duration::from_secs(180), c10_determinism),
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut red = 0;
    for (n, title, budget, check) in criteria {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default();
            Outcome::Fail(format!("panic: {msg}"))
        });
        let el = t.elapsed();
        let slow = el > budget;
        let (tag, detail) = match (&outcome, slow) {
            (Outcome::Fail(d), _) => ("FAIL", d.clone()),
            (_, true) => ("FAIL", format!("over budget: {:.1}s > {}s", el.as_secs_f64(), budget.as_secs())),
            (Outcome::Red(d), _) => ("RED ", d.clone()),
            (Outcome::Pass(d), _) => ("PASS", d.clone()),
        };
        println!("criterion {n:>2} {tag} {:>7.2}s/{:>3}s  {title}: {detail}", el.as_secs_f64(), budget.as_secs());
        match tag {
            "FAIL" => failed += 1,
            "RED " => red += 1,
            _ => {}
        }
    }
    println!("acceptance: {failed} failed, {red} red with certified finite form");
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
