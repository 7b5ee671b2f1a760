//! The built-in verification suite behind `verify-paper`: one section per
//! lemma, each run on small bundled examples with fixed seeds so reports are
//! reproducible byte for byte.

use serde_json::json;

use crate::ainfty::examples::{dual_numbers, ground, poset, z2_resolution};
use crate::ainfty::{self, augment, check_relations, hom_complex, AInfty, Elem, Gen, TableCategory};
use crate::cli::{has_torsion, ok, right_inverse_section, Lemma, Section, Settings, RELATION_BUDGET};
use crate::coefficients::{solve_linear, Ring, Scalar};
use crate::localization::{self, Verdict};
use crate::nerve;
use crate::twisted::{self, with_cones};
use crate::{data, functors};

pub const LEMMAS: [Lemma; 11] = [
    Lemma::Relations,
    Lemma::Units,
    Lemma::Cones,
    Lemma::Zw,
    Lemma::RightInverse,
    Lemma::Ts,
    Lemma::ModI,
    Lemma::Cohomologous,
    Lemma::Nerve,
    Lemma::Hochschild,
    Lemma::Functors,
];

pub fn run(s: &Settings, only: Option<Lemma>) -> Vec<Section> {
    LEMMAS.iter().filter(|&&l| only.is_none_or(|o| o == l)).map(|&l| lemma(l, s)).collect()
}

fn lemma(l: Lemma, s: &Settings) -> Section {
    let mut sec = Section::new(l.name());
    let res = match l {
        Lemma::Relations => relations(s, &mut sec),
        Lemma::Units => units(s, &mut sec),
        Lemma::Cones => cones(s, &mut sec),
        Lemma::Zw => zw(s, &mut sec),
        Lemma::RightInverse => {
            for (name, c) in right_inverse_examples(s) {
                let us = all_units(&c);
                let sub = right_inverse_section(name, &c, &us, s);
                absorb(&mut sec, sub);
            }
            Ok(())
        }
        Lemma::Ts => ts(s, &mut sec),
        Lemma::ModI => mod_i(s, &mut sec),
        Lemma::Cohomologous => cohomologous(s, &mut sec),
        Lemma::Nerve => nerves(s, &mut sec),
        Lemma::Hochschild => hochschild(s, &mut sec),
        Lemma::Functors => functor_checks(s, &mut sec),
    };
    if let Err(e) = res {
        sec.fail(e);
    }
    sec
}

/// Folds a per-example section into the lemma section.
fn absorb(sec: &mut Section, sub: Section) {
    sec.line(format!("{}: {}", sub.name, if sub.status == crate::cli::Status::Pass { "ok" } else { "FAIL" }));
    for l in &sub.lines {
        sec.line(format!("  {l}"));
    }
    if let Some(c) = &sub.counterexample {
        sec.fail(format!("{}: {c}", sub.name));
    }
    sec.data[&sub.name] = sub.data;
}

fn all_units(c: &TableCategory) -> Vec<Elem> {
    (0..c.num_objects()).map(|x| c.unit(x).expect("bundled examples declare units")).collect()
}

pub fn right_inverse_examples(s: &Settings) -> Vec<(&'static str, TableCategory)> {
    vec![("k", ground(s.field())), ("k[1]", poset(s.field(), 1)), ("Z --2--> Z", z2_resolution(Ring::Integers))]
}

/// Single-constant perturbations of `c`, in table order: each nonzero
/// structure constant shifted by one, then each zero constant of the right
/// degree (on tuples of length at most 3) set to one.
pub fn mutations(c: &TableCategory, max: usize) -> Vec<(String, TableCategory)> {
    let ring = c.ring();
    let mut ops: Vec<(Vec<Gen>, Vec<(usize, Scalar)>)> = c.ops().map(|(a, v)| (a.clone(), v.clone())).collect();
    ops.sort_by(|p, q| (p.0.len(), &p.0).cmp(&(q.0.len(), &q.0)));
    let mut edits: Vec<(Vec<Gen>, Vec<(usize, Scalar)>, usize)> = Vec::new();
    for (args, v) in &ops {
        for (j, &(i, x)) in v.iter().enumerate() {
            let mut w = v.clone();
            w[j] = (i, ring.add(x, Scalar::ONE));
            w.retain(|e| !e.1.is_zero());
            edits.push((args.clone(), w, i));
        }
    }
    for l in 1..=3.min(c.max_arity()) {
        for args in ainfty::composable_tuples(c, l) {
            let (src, tgt) = (args[l - 1].src, args[0].tgt);
            let want = 2 - l as i32 + args.iter().map(|&g| c.degree(g)).sum::<i32>();
            let v = c.op(&args);
            for i in (0..c.hom_dim(src, tgt)).filter(|&i| c.degree(Gen::new(src, tgt, i)) == want && !v.iter().any(|e| e.0 == i)) {
                let mut w = v.clone();
                w.push((i, Scalar::ONE));
                w.sort_by_key(|e| e.0);
                edits.push((args.clone(), w, i));
            }
        }
    }
    edits
        .into_iter()
        .take(max)
        .map(|(args, w, i)| {
            let mut m = c.clone();
            m.set_op_vec(&args, w);
            let (src, tgt) = (args[args.len() - 1].src, args[0].tgt);
            (format!("{} at {} on {}", ainfty::show_tuple(c, &args), c.label(Gen::new(src, tgt, i)), c.name), m)
        })
        .collect()
}

fn relations(_s: &Settings, sec: &mut Section) -> Result<(), String> {
    let mut rows = Vec::new();
    for (name, text) in data::CATEGORIES {
        let c = TableCategory::from_text(text).map_err(|e| e.to_string())?;
        let rep = check_relations(&c, 4, Some(RELATION_BUDGET));
        let checked: usize = rep.lengths.iter().map(|r| r.tuples_checked).sum();
        let muts = mutations(&c, MUTATIONS);
        let caught = muts.iter().filter(|(_, m)| !check_relations(m, 4, Some(2000)).passed()).count();
        // With fewer than MUTATIONS perturbations the list is exhaustive; when
        // none is caught, every perturbation is itself A∞ (e.g. rescaling m² on k).
        let exhaustive = muts.len() < MUTATIONS;
        sec.line(format!(
            "{name}: {checked} tuples, relations {}, mutations caught {caught}/{}{}",
            ok(rep.passed()),
            muts.len(),
            if caught == 0 && exhaustive { " (every single-constant perturbation is again A-infinity)" } else { "" }
        ));
        sec.require(rep.passed(), || format!("{name}: {}", rep.first_failure().unwrap_or_default()));
        sec.require(caught > 0 || exhaustive, || format!("{name}: no perturbation of a structure constant is detected"));
        rows.push(json!({"category": name, "tuples": checked, "passed": rep.passed(), "mutations": muts.len(), "caught": caught}));
    }
    for (name, tw) in cone_categories()? {
        let rep = check_relations(&tw, 4, Some(3000));
        let checked: usize = rep.lengths.iter().map(|r| r.tuples_checked).sum();
        sec.line(format!("{name}: {checked} tuples, relations {}", ok(rep.passed())));
        sec.require(rep.passed(), || format!("{name}: {}", rep.first_failure().unwrap_or_default()));
        rows.push(json!({"category": name, "tuples": checked, "passed": rep.passed()}));
    }
    sec.set("categories", rows);
    Ok(())
}

/// Perturbations tried per category.
const MUTATIONS: usize = 8;

type Tw = twisted::TwCategory<TableCategory>;

/// Twisted-complex categories on cones of units, plus the cone of `×2` over ℤ.
fn cone_categories() -> Result<Vec<(String, Tw)>, String> {
    let mut out = Vec::new();
    for (name, c, extra) in unit_examples() {
        let mut cones = all_units(&c);
        cones.extend(extra);
        let tw = with_cones(c, &cones).map_err(|e| e.to_string())?;
        out.push((format!("Tw({name})"), tw));
    }
    let z = z2_resolution(Ring::Integers);
    let two = Elem::new(0, 0, vec![(0, Ring::Integers.int(2))]);
    out.push(("Tw(Z --2--> Z, cone of 2)".into(), with_cones(z, &[two]).map_err(|e| e.to_string())?));
    Ok(out)
}

/// Examples with their declared units and further (non-strict) units.
fn unit_examples() -> Vec<(&'static str, TableCategory, Vec<Elem>)> {
    let gauged = data::category("gauged-ideal");
    let one_gamma = Elem::new(0, 0, vec![(0, Scalar::ONE), (2, Scalar::ONE)]);
    vec![
        ("k1", data::category("k1"), vec![]),
        ("z2-resolution", data::category("z2-resolution"), vec![]),
        ("dual-numbers", data::category("dual-numbers"), vec![]),
        ("gauged-ideal", gauged, vec![one_gamma]),
    ]
}

/// Whether `u - v` is exact in `hom(x, x)`.
fn is_cohomologous<A: AInfty + ?Sized>(a: &A, u: &Elem, v: &Elem) -> Result<bool, String> {
    let h = hom_complex(a, u.src, u.tgt).map_err(|e| e.to_string())?;
    let diff = u.sub(a.ring(), v);
    let rhs = h.coords(0, &diff.v);
    Ok(matches!(solve_linear(a.ring(), &h.complex.diff(-1), &rhs), Ok(Some(_))))
}

fn units(_s: &Settings, sec: &mut Section) -> Result<(), String> {
    let mut rows = Vec::new();
    for (name, text) in data::CATEGORIES {
        let c = TableCategory::from_text(text).map_err(|e| e.to_string())?;
        if has_torsion(&c) {
            sec.line(format!("{name}: torsion homs, unit test not applicable"));
            continue;
        }
        for x in 0..c.num_objects() {
            let Some(u) = c.unit(x) else { continue };
            let strict = ainfty::is_strict_unit(&c, x, &u);
            let v = ainfty::is_unit(&c, x, &u).map_err(|e| e.to_string())?;
            let obj = c.object_name(x);
            sec.require(v.is_unit, || format!("{name}: declared unit of {obj} is not a unit"));
            if strict {
                sec.require(v.all_zero(), || format!("{name}: strict unit of {obj} has a nonzero witness"));
            }
            // 1_X in A⁺ is strict and is not cohomologous to u_X.
            let plus = augment(&c);
            let one = Elem::basis(plus.one(x));
            let one_strict = ainfty::is_strict_unit(&plus, x, &one);
            let apart = !is_cohomologous(&plus, &u, &one)?;
            sec.require(one_strict && apart, || format!("{name}: adjoined unit of {obj}: strict {one_strict}, distinct class {apart}"));
            rows.push(json!({"category": name, "object": obj, "strict": strict, "unit": v.is_unit, "zero_witness": v.all_zero(), "adjoined_strict": one_strict, "adjoined_distinct": apart}));
        }
    }
    sec.line(format!("{} declared units verified; adjoined units strict and distinct", rows.len()));
    // ε in k[ε]/ε² and 1 + γ.
    let d = data::category("dual-numbers");
    let eps = Elem::basis(Gen::new(0, 0, 1));
    let eps_unit = ainfty::is_unit(&d, 0, &eps).map_err(|e| e.to_string())?.is_unit;
    sec.line(format!("eps in dual-numbers: unit {}", ok(eps_unit)));
    sec.require(!eps_unit, || "eps passes as a unit".into());
    let c = data::category("contractible-ideal");
    let one_gamma = Elem::new(0, 0, vec![(0, Scalar::ONE), (2, Scalar::ONE)]);
    let (st, un) = (ainfty::is_strict_unit(&c, 0, &one_gamma), ainfty::is_unit(&c, 0, &one_gamma).map_err(|e| e.to_string())?.is_unit);
    sec.line(format!("1 + gamma in contractible-ideal: strict {}, unit {}", ok(st), ok(un)));
    sec.require(!st && un, || "1 + gamma should be a non-strict unit".into());
    sec.set("units", rows);
    Ok(())
}

fn cones(_s: &Settings, sec: &mut Section) -> Result<(), String> {
    let mut rows = Vec::new();
    for (name, c, extra) in unit_examples() {
        let n = c.num_objects();
        let mut us = all_units(&c);
        us.extend(extra);
        let k = us.len();
        let tw = with_cones(c, &us).map_err(|e| e.to_string())?;
        let mut checked = 0;
        for p in n..n + k {
            for q in 0..n + k {
                for (a, b) in [(p, q), (q, p)] {
                    let acyclic = twisted::is_acyclic_hom(&tw, a, b, -3, 2).map_err(|e| e.to_string())?;
                    checked += 1;
                    sec.require(acyclic, || format!("{name}: hom({}, {}) has cohomology in [-3, 2]", tw.object(a).name, tw.object(b).name));
                }
            }
        }
        sec.line(format!("{name}: {checked} hom complexes with a cone acyclic on [-3, 2]"));
        rows.push(json!({"category": name, "cones": k, "homs": checked}));
    }
    sec.set("examples", rows);
    Ok(())
}

fn zw(_s: &Settings, sec: &mut Section) -> Result<(), String> {
    let mut rows = Vec::new();
    for (name, c, extra) in unit_examples() {
        let n = c.num_objects();
        let mut us = all_units(&c);
        us.extend(extra);
        let strict: Vec<bool> = us.iter().map(|u| ainfty::is_strict_unit(&c, u.src, u)).collect();
        let tw = with_cones(c, &us).map_err(|e| e.to_string())?;
        let mut pairs = 0;
        let mut zero = 0;
        for (i, e) in us.iter().enumerate() {
            for j in 0..us.len() {
                let ops = twisted::zw_operators(&tw, e.src, n + j, &e.v).map_err(|e| e.to_string())?;
                let (a, b) = twisted::zw_inverse_homotopies(&ops).map_err(|e| e.to_string())?;
                let certified = matches!((&a, &b), (Some(a), Some(b)) if a.verify() && b.verify());
                let label = format!("{name}: W = hom({}, cone {j}) with unit {i}", tw.object(e.src).name);
                sec.require(ops.z.is_chain_map() && ops.w.is_chain_map() && certified, || format!("{label}: no homotopy inverse"));
                if certified && strict[i] && strict[j] {
                    let z = a.is_some_and(|h| h.is_zero()) && b.is_some_and(|h| h.is_zero());
                    sec.require(z, || format!("{label}: strict units need zero homotopies"));
                    zero += usize::from(z);
                }
                pairs += 1;
            }
        }
        sec.line(format!("{name}: {pairs} unit pairs certified, {zero} strict pairs with zero homotopies"));
        rows.push(json!({"category": name, "pairs": pairs, "strict_zero": zero}));
    }
    sec.set("examples", rows);
    Ok(())
}

fn ts(s: &Settings, sec: &mut Section) -> Result<(), String> {
    let examples = [("k", ground(s.field())), ("dual-numbers-shifted", data::category("dual-numbers-shifted")), ("z2-resolution", data::category("z2-resolution")), ("gauged-ideal", data::category("gauged-ideal"))];
    for (name, c) in examples {
        let rep = localization::verify_ts(&c, &all_units(&c), 0, s.l, s.window.0, s.window.1).map_err(|e| e.to_string())?;
        sec.line(format!(
            "{name}: H {} G {} K {} h {} t' {} claim I {} claim II {} (alpha = 0: {})",
            ok(rep.h_identity),
            ok(rep.g_identity),
            ok(rep.k_identity),
            ok(rep.homotopy_to_t_prime),
            ok(rep.t_prime_chain_map && rep.t_prime_lands_in_s),
            ok(rep.claim_one),
            ok(rep.claim_two),
            rep.alpha_is_zero
        ));
        sec.require(rep.passed(), || format!("{name}: {rep:?}"));
        sec.data[name] = serde_json::to_value(&rep).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn mod_i(s: &Settings, sec: &mut Section) -> Result<(), String> {
    for (name, c) in right_inverse_examples(s) {
        let rep = localization::verify_mod_i(&c, &all_units(&c), s.l, s.window.0, s.window.1, 4, 2000).map_err(|e| e.to_string())?;
        let certified = rep.pairs.iter().all(|p| p.a_to_loc && p.loc_to_plus_stable_image && p.projection_retracts);
        let literal = rep.pairs.iter().all(|p| p.loc_to_plus && p.plus_to_quotient);
        sec.line(format!(
            "{name}: closure tuples {:?} {}, graded {}, stable image {}, literal chain {}",
            rep.closure_tuples,
            ok(rep.closure_failure.is_none()),
            ok(rep.graded_match),
            ok(certified),
            ok(literal)
        ));
        sec.require(rep.closure_failure.is_none(), || format!("{name}: {}", rep.closure_failure.clone().unwrap_or_default()));
        sec.require(rep.verdict != Verdict::Fail && certified, || format!("{name}: {:?}", rep.pairs));
        sec.data[name] = serde_json::to_value(&rep).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn cohomologous(s: &Settings, sec: &mut Section) -> Result<(), String> {
    let c = data::category("contractible-ideal");
    let one = c.unit(0).expect("unit");
    let other = Elem::new(0, 0, vec![(0, Scalar::ONE), (2, Scalar::ONE)]);
    let rep = localization::verify_cohomologous_localizations(&c, std::slice::from_ref(&one), &[one.clone(), other], s.l.min(2), s.window.0, s.window.1).map_err(|e| e.to_string())?;
    sec.line(format!("contractible-ideal, W0 = {{1}}, W = {{1, 1 + gamma}}: {}", ok(rep.passed)));
    sec.require(rep.passed, || format!("{:?}", rep.pairs));
    sec.set("report", &rep);
    Ok(())
}

fn nerves(s: &Settings, sec: &mut Section) -> Result<(), String> {
    let e = |e: nerve::NerveError| e.to_string();
    for name in ["k", "k1", "dual-numbers", "square"] {
        let c = data::category(name);
        let cmp = nerve::compare_nerves(&c, s.dim, 20, 0, s.limit).map_err(e)?;
        sec.line(format!("{name}: dg and A-infinity nerves {} to dimension {} (counts {:?})", if cmp.identical() { "identical" } else { "DIFFER" }, s.dim, cmp.counts.clone().unwrap_or_default()));
        sec.require(cmp.identical(), || format!("{name}: nerves differ"));
    }
    for name in ["k1", "k2-f3", "gauged-path", "dual-numbers"] {
        let c = data::category(name);
        let nv = nerve::ainfty_nerve(&c, 3).map_err(e)?;
        let ts = nv.truncate(s.limit).map_err(e)?;
        let mut filled = Vec::new();
        for n in 2..=3 {
            let hs = nerve::inner_horns(&ts, n);
            let k = nerve::fill_all(&nv, &hs).map_err(|m| format!("{name}: {m}"))?;
            filled.push(k);
        }
        sec.line(format!("{name}: inner horns filled {filled:?}"));
        let core = nv.core(&ts).map_err(e)?;
        let pi0 = nerve::pi0_core(&core);
        let h0 = nv.h0_iso_classes(s.limit).map_err(e)?;
        sec.require(pi0 == h0, || format!("{name}: pi_0 {pi0:?} vs H^0 classes {h0:?}"));
    }
    for (name, want) in [("k", "trivial"), ("k-f5", "Z/4")] {
        let c = data::category(name);
        let nv = nerve::ainfty_nerve(&c, 3).map_err(e)?;
        let core = nv.core(&nv.truncate(s.limit).map_err(e)?).map_err(e)?;
        let loops = nerve::pi1_core(&core, 0)?;
        let same = nv.compare_pi1(&loops, 0, s.limit).map_err(e)?;
        let got = loops.group.describe();
        sec.line(format!("{name}: pi_1(core) = {got}, isomorphic to units of H^0 {}", ok(same)));
        sec.require(same && got == want, || format!("{name}: pi_1 = {got}, expected {want}"));
    }
    Ok(())
}

fn hochschild(_s: &Settings, sec: &mut Section) -> Result<(), String> {
    let a = dual_numbers(Ring::PrimeField(2), 0);
    let hh = functors::hochschild(&a, 3).map_err(|e| e.to_string())?;
    let dims = hh.dims_by_arity();
    let h0 = hh.complex().cohomology_in(0, 0).get(&0).map_or(0, |g| g.free);
    sec.line(format!("k[eps]/eps^2 over F2, arity 3: cochains by arity {dims:?}, HH^0 of dimension {h0}"));
    sec.require(dims == [2, 4, 8, 16] && h0 == 2, || format!("dims {dims:?}, HH^0 {h0}"));
    sec.set("dims_by_arity", dims);
    sec.set("hh0", h0);
    Ok(())
}

fn functor_checks(_s: &Settings, sec: &mut Section) -> Result<(), String> {
    for (name, ..) in data::FUNCTORS {
        let (a, b, f) = data::functor(name).map_err(|e| e.to_string())?;
        let rep = functors::check_functor(&a, &b, &f, 4);
        sec.line(format!("{name}: {} tuples, {}", rep.tuples_checked, ok(rep.passed)));
        sec.require(rep.passed, || format!("{name}: {}", rep.failure.clone().unwrap_or_default()));
    }
    let (a, b, f) = data::functor("gauge").map_err(|e| e.to_string())?;
    let one = a.unit(0).expect("unit");
    let la = localization::LocalizedCategory::new(&a, vec![one.clone()], 3).map_err(|e| e.to_string())?;
    let lb = localization::LocalizedCategory::new(&b, vec![one], 3).map_err(|e| e.to_string())?;
    let lf = localization::localize_functor(&la, &lb, &f).map_err(|e| e.to_string())?;
    let rep = localization::check_loc_functor(&lf, 3, 400);
    let natural = localization::naturality_holds(&lf, &&a, 3);
    sec.line(format!("gauge localized at L = 3: {} tuples, functor {}, natural {}", rep.tuples_checked, ok(rep.passed), ok(natural)));
    sec.require(rep.passed && natural, || rep.failure.clone().unwrap_or_else(|| "localized square does not commute".into()));
    Ok(())
}
