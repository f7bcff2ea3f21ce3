//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line to stdout
//! (bypassing the test harness capture) and then asserts.

mod common;

use std::collections::{BTreeSet, HashMap};
use std::io::Write;
use std::time::{Duration, Instant};

use common::{all_normal_forms, all_words, key, letters, move_closure_normal_form, square_graph_product};
use picturecalc_core::coeff::{gp_equal, gp_reduce, CoefficientSystem, GraphProductWord, GroupSpec};
use picturecalc_core::embed::{check_length_bounds, project_to_thompson, psi};
use picturecalc_core::picture::sample::{random_element, random_unreduced};
use picturecalc_core::picture::{enumerate_reduced, invert, multiply, Context, Diagram, Geometry};
use picturecalc_core::presentation::{builtin_from_spec, parse_presentation, Word};
use picturecalc_core::qmgraph::{
    ball, condition_plus_check, hyperplanes_report, medians, pins_report, verify_qm_axioms, BallGraph,
};
use picturecalc_core::thompson::{
    diagram_to_tree_pair, evaluate_map, random_tree_pair, tp_multiply, tree_pair_to_diagram, Membership, NAdic,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(n: usize, what: &str, pass: bool, detail: &str, elapsed: Duration, budget: Option<Duration>) {
    let in_time = budget.is_none_or(|b| elapsed <= b);
    let verdict = if pass && in_time { "PASS" } else { "FAIL" };
    let limit = budget.map(|b| format!(" / {}s", b.as_secs())).unwrap_or_default();
    let line = format!("criterion {n:>2} {verdict} {what}: {detail} [{:.1}s{limit}]\n", elapsed.as_secs_f64());
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
    assert!(pass, "{what}: {detail}");
    assert!(in_time, "{what}: over time");
}

fn setting(spec: &str, coeff: Option<(&str, GroupSpec)>) -> (Context, Word) {
    let (p, w) = builtin_from_spec(spec).unwrap();
    let coeffs = match coeff {
        Some((letter, g)) => CoefficientSystem::from_assignments(&p, &[(letter.to_string(), g)]).unwrap(),
        None => CoefficientSystem::trivial(&p),
    };
    (Context::new(p, coeffs), w)
}

fn quasi_auto_setting() -> (Context, Word) {
    let p = parse_presentation("<a,p | a=a.p>").unwrap();
    let coeffs = CoefficientSystem::from_assignments(&p, &[("a".into(), GroupSpec::Cyclic(2))]).unwrap();
    let w = p.parse_word("p.a").unwrap();
    (Context::new(p, coeffs), w)
}

/// The five ball configurations of the quasi-median suite.
fn configurations() -> Vec<(&'static str, Context, Word)> {
    let (abc, abc_w) = setting("commuting_abc", None);
    let (ap, ap_w) = quasi_auto_setting();
    let mut out = Vec::new();
    for (name, coeff) in [
        ("Q trivial", GroupSpec::Trivial),
        ("Q cyclic(2)", GroupSpec::Cyclic(2)),
        ("Q cyclic(3)", GroupSpec::Cyclic(3)),
    ] {
        let (ctx, w) = setting("thompson", Some(("x", coeff)));
        out.push((name, ctx, w));
    }
    out.push(("abc trivial", abc, abc_w));
    out.push(("<a,p|a=ap> cyclic(2) on a", ap, ap_w));
    out
}

fn radius_ball(ctx: &Context, w: &Word, radius: usize) -> BallGraph {
    ball(&ctx.eps_word(w).unwrap(), Geometry::Braided, radius).unwrap()
}

/// Builtins with trivial coefficients, as used by the embedding checks.
const PLAIN_BUILTINS: [&str; 5] = ["thompson", "higman:3,1", "quasi_auto:2,1,1", "houghton:2,1", "commuting_abc"];

fn reduce_in_random_order<R: Rng>(rng: &mut R, d: &Diagram) -> Diagram {
    let mut d = d.clone();
    loop {
        let dips = d.dipoles();
        let Some(&dip) = dips.choose(rng) else { return d };
        d = d.reduce_dipole(dip).unwrap();
    }
}

#[test]
fn c01_reduction_is_confluent() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let settings = [
        setting("thompson", None),
        setting("thompson", Some(("x", GroupSpec::Cyclic(3)))),
        setting("higman:3,1", None),
        setting("commuting_abc", None),
    ];
    let geoms = [Geometry::Braided, Geometry::Annular, Geometry::Planar];
    let (mut exhaustive, mut dipoles, mut failures) = (0, 0, 0);
    while exhaustive < 200 {
        let (ctx, w) = &settings[exhaustive % settings.len()];
        let geom = geoms[exhaustive % 3];
        let size = rng.gen_range(2..=6);
        let d = random_unreduced(&mut rng, ctx, w, geom, size, 0.3).unwrap();
        let k = d.dipoles().len();
        if k == 0 || k > 3 {
            continue;
        }
        dipoles += k;
        let mut forms = BTreeSet::new();
        all_normal_forms(&d, &mut forms);
        failures += (forms.len() != 1 || !forms.contains(&key(&d.reduce()))) as usize;
        exhaustive += 1;
    }
    let mut random = 0;
    for i in 0..500 {
        let (ctx, w) = &settings[i % settings.len()];
        let size = rng.gen_range(1..=6);
        let d = random_unreduced(&mut rng, ctx, w, geoms[i % 3], size, 0.3).unwrap();
        let a = reduce_in_random_order(&mut rng, &d);
        let b = reduce_in_random_order(&mut rng, &d);
        failures += (key(&a) != key(&b) || key(&a) != key(&d.reduce())) as usize;
        random += 1;
    }
    let detail = format!("{exhaustive} exhaustive ({dipoles} dipoles), {random} two-order, {failures} disagreements");
    report(1, "reduction order independence", failures == 0, &detail, t.elapsed(), Some(Duration::from_secs(60)));
}

#[test]
fn c02_group_axioms() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let settings = [
        setting("thompson", Some(("x", GroupSpec::Cyclic(2)))),
        setting("higman:3,1", None),
        setting("commuting_abc", None),
        setting("quasi_auto:2,1,1", Some(("a", GroupSpec::Free(vec!["g".into()])))),
    ];
    let (mut triples, mut failures) = (0, 0);
    for geom in [Geometry::Braided, Geometry::Annular, Geometry::Planar] {
        for (ctx, w) in &settings {
            let one = ctx.eps_word(w).unwrap();
            for _ in 0..200 {
                let [a, b, c] = [0; 3].map(|_| random_element(&mut rng, ctx, w, geom, 3, 0.3).unwrap());
                let ab_c = multiply(&multiply(&a, &b).unwrap(), &c).unwrap();
                let a_bc = multiply(&a, &multiply(&b, &c).unwrap()).unwrap();
                let ok = key(&ab_c) == key(&a_bc)
                    && key(&multiply(&a, &one).unwrap()) == key(&a)
                    && key(&multiply(&one, &a).unwrap()) == key(&a)
                    && key(&multiply(&a, &invert(&a)).unwrap()) == key(&one)
                    && key(&multiply(&invert(&a), &a).unwrap()) == key(&one)
                    && geom.admits(&ab_c);
                failures += !ok as usize;
                triples += 1;
            }
        }
    }
    let detail = format!("{triples} triples over 3 geometries x 4 presentations, {failures} failures");
    report(2, "group axioms", failures == 0, &detail, t.elapsed(), Some(Duration::from_secs(60)));
}

#[test]
fn c03_distance_formula() {
    let t = Instant::now();
    let mut parts = Vec::new();
    let mut mismatches = 0;
    for coeff in [GroupSpec::Trivial, GroupSpec::Cyclic(2)] {
        let (ctx, w) = setting("thompson", Some(("x", coeff.clone())));
        let g = radius_ball(&ctx, &w, 4);
        let formula = g.distances();
        let n = g.vertices.len();
        let mut bad = 0;
        for v in 0..n {
            let bfs = g.graph_distances(v);
            bad += (0..n).filter(|&u| bfs[u] != Some(formula[v][u] as usize)).count();
        }
        parts.push(format!("{coeff:?}: {n} vertices, {bad} mismatched pairs"));
        mismatches += bad;
    }
    report(3, "distance formula vs BFS, radius 4", mismatches == 0, &parts.join("; "), t.elapsed(), Some(Duration::from_secs(120)));
}

#[test]
fn c04_quasi_median_axioms() {
    let t = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, ctx, w) in configurations() {
        let g = radius_ball(&ctx, &w, 3);
        let r = verify_qm_axioms(&g);
        let trivial_ok = !ctx.coeffs().all_trivial() || r.triangle_free;
        pass &= r.passed() && trivial_ok;
        parts.push(format!(
            "{name}: {}v {}e, {} triangle + {} quadrangle premises, {} violations",
            r.vertices,
            r.edges,
            r.triangle.checked,
            r.quadrangle.checked,
            r.triangle.violations.len() + r.quadrangle.violations.len() + r.k4_minus.len() + r.k32.len()
        ));
    }
    report(4, "quasi-median axioms, radius 3", pass, &parts.join("; "), t.elapsed(), Some(Duration::from_secs(180)));
}

#[test]
fn c05_median_for_trivial_coefficients() {
    let t = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, ctx, w) in configurations().into_iter().filter(|(_, c, _)| c.coeffs().all_trivial()) {
        let g = radius_ball(&ctx, &w, 3);
        let tri = verify_qm_axioms(&g).triangle_free;
        let m = medians(&g);
        pass &= tri && m.violations.is_empty();
        parts.push(format!("{name}: triangle-free {tri}, {} triples, {} without unique median", m.triples_checked, m.violations.len()));
    }
    report(5, "median graph", pass, &parts.join("; "), t.elapsed(), None);
}

#[test]
fn c06_pins() {
    let t = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, ctx, w) in configurations().into_iter().filter(|(n, _, _)| n.contains("cyclic")) {
        let g = radius_ball(&ctx, &w, 3);
        let r = pins_report(&g);
        pass &= r.passed();
        parts.push(format!(
            "{name}: {} pins, {} triangles, {} violations",
            r.pins,
            r.triangles_checked,
            r.size_violations.len() + r.not_cliques.len() + r.intersection_violations.len() + r.triangles_outside_pins.len()
        ));
    }
    report(6, "pin lemmas", pass, &parts.join("; "), t.elapsed(), None);
}

#[test]
fn c07_hyperplanes() {
    let t = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, ctx, w) in configurations() {
        let g = radius_ball(&ctx, &w, 3);
        let r = hyperplanes_report(&g);
        pass &= r.passed();
        parts.push(format!(
            "{name}: {} interior of {}, {} violations, {} undecided at the boundary",
            r.interior,
            r.hyperplanes,
            r.sector_violations.len() + r.crossing_violations.len() + r.gate_violations.len() + r.linear_witness_violations.len(),
            r.boundary_inconclusive
        ));
    }
    report(7, "hyperplanes, sectors, gates", pass, &parts.join("; "), t.elapsed(), None);
}

#[test]
fn c08_embedding_homomorphism_and_lengths() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let mut parts = Vec::new();
    let mut pass = true;
    for spec in PLAIN_BUILTINS {
        let (ctx, w) = setting(spec, None);
        let (mut hom, mut bounds, mut short_constant) = (0, 0, 0);
        for _ in 0..200 {
            let a = random_element(&mut rng, &ctx, &w, Geometry::Braided, 3, 0.0).unwrap();
            let b = random_element(&mut rng, &ctx, &w, Geometry::Braided, 3, 0.0).unwrap();
            let lhs = psi(&multiply(&a, &b).unwrap()).unwrap();
            let rhs = multiply(&psi(&a).unwrap(), &psi(&b).unwrap()).unwrap();
            hom += (key(&lhs) != key(&rhs)) as usize;
            for d in [&a, &b] {
                let r = check_length_bounds(d).unwrap();
                bounds += !(r.lower_ok && r.upper_ok) as usize;
                short_constant += !r.side_plus_one_ok as usize;
            }
        }
        pass &= hom == 0 && bounds == 0;
        let k1 = if short_constant == 0 { "holds" } else { "fails" };
        parts.push(format!("{spec}: {hom} non-hom, {bounds} bound failures, max-side+1 constant {k1} ({short_constant})"));
    }
    report(8, "embedding homomorphism and length bounds", pass, &parts.join("; "), t.elapsed(), None);
}

#[test]
fn c09_injectivity() {
    let t = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for spec in PLAIN_BUILTINS {
        let (ctx, w) = setting(spec, None);
        let all = enumerate_reduced(&ctx, &w, 3, Geometry::Braided).unwrap();
        let images: BTreeSet<Vec<u8>> = all.iter().map(|d| key(&psi(d).unwrap())).collect();
        pass &= images.len() == all.len();
        parts.push(format!("{spec}: {}/{} images distinct", images.len(), all.len()));
    }
    let (ctx, w) = setting("higman:3,1", None);
    let all = enumerate_reduced(&ctx, &w, 3, Geometry::Braided).unwrap();
    let pairs: BTreeSet<String> =
        all.iter().map(|d| project_to_thompson(&psi(d).unwrap()).unwrap().0.to_string()).collect();
    pass &= pairs.len() == all.len();
    parts.push(format!("tree pairs over <x|x=x^3>: {}/{} distinct", pairs.len(), all.len()));
    report(9, "injectivity on short elements", pass, &parts.join("; "), t.elapsed(), Some(Duration::from_secs(180)));
}

#[test]
fn c10_thompson_bridge() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(110);
    let kinds = [Membership::F, Membership::TNotF, Membership::VNotT];
    let mut round_trip_failures = 0;
    for i in 0..300 {
        let tp = random_tree_pair(&mut rng, 2, 1, 5, kinds[i % 3]);
        let back = diagram_to_tree_pair(&tree_pair_to_diagram(&tp).unwrap()).unwrap();
        round_trip_failures += (back != tp) as usize;
    }
    let mut product_failures = 0;
    for i in 0..100 {
        let a = random_tree_pair(&mut rng, 2, 1, 5, kinds[i % 3]);
        let b = random_tree_pair(&mut rng, 2, 1, 5, kinds[(i / 3) % 3]);
        let ab = tp_multiply(&a, &b).unwrap();
        let via = multiply(&tree_pair_to_diagram(&a).unwrap(), &tree_pair_to_diagram(&b).unwrap()).unwrap();
        let mut ok = diagram_to_tree_pair(&via).unwrap() == ab;
        for k in 0..256 {
            let q = NAdic::new(2, k, 8);
            ok &= evaluate_map(&ab, &q).unwrap() == evaluate_map(&b, &evaluate_map(&a, &q).unwrap()).unwrap();
        }
        product_failures += !ok as usize;
    }
    let detail = format!("300 round trips ({round_trip_failures} failed), 100 products at all k/256 ({product_failures} failed)");
    report(10, "tree pair bridge", round_trip_failures + product_failures == 0, &detail, t.elapsed(), None);
}

#[test]
fn c11_conjugation_condition() {
    let t = Instant::now();
    let (ctx, w) = setting("thompson", Some(("x", GroupSpec::Cyclic(2))));
    let q = condition_plus_check(&ctx, &w, 4, 3).unwrap();
    let q_ok = q.holds && q.words.iter().all(|m| m.excluded == m.permutations && m.inconclusive.is_empty());
    let checked: usize = q.words.iter().map(|m| m.permutations).sum();
    let (ctx, w) = quasi_auto_setting();
    let ap = condition_plus_check(&ctx, &w, 4, 3).unwrap();
    let open: usize = ap.words.iter().map(|m| m.inconclusive.len()).sum();
    let detail = format!(
        "Q: {} words, {checked} permutations all excluded {q_ok}; <a,p|a=ap>: {open} inconclusive, holds {}",
        q.words.len(),
        ap.holds
    );
    report(11, "conjugation condition", q_ok && !ap.holds && open > 0, &detail, t.elapsed(), None);
}

#[test]
fn c12_graph_product_words() {
    let t = Instant::now();
    let gp = square_graph_product();
    let words = all_words(&letters(&gp), 6);
    let mut by_oracle: HashMap<GraphProductWord, GraphProductWord> = HashMap::new();
    let mut by_fast: HashMap<GraphProductWord, GraphProductWord> = HashMap::new();
    let mut mismatches = 0;
    for w in &words {
        let oracle = move_closure_normal_form(&gp, w);
        let fast = gp_reduce(&gp, w).unwrap();
        mismatches += (fast != oracle) as usize;
        mismatches += (*by_oracle.entry(oracle.clone()).or_insert_with(|| fast.clone()) != fast) as usize;
        mismatches += (*by_fast.entry(fast).or_insert_with(|| oracle.clone()) != oracle) as usize;
    }
    // Equality on random pairs; the class maps above already cover all pairs.
    let mut rng = ChaCha8Rng::seed_from_u64(112);
    for _ in 0..20_000 {
        let (a, b) = (words.choose(&mut rng).unwrap(), words.choose(&mut rng).unwrap());
        let same = move_closure_normal_form(&gp, a) == move_closure_normal_form(&gp, b);
        mismatches += (gp_equal(&gp, a, b).unwrap() != same) as usize;
    }
    let detail = format!("{} words, {} elements, {mismatches} mismatches", words.len(), by_oracle.len());
    report(12, "graph product normal forms", mismatches == 0, &detail, t.elapsed(), Some(Duration::from_secs(60)));
}
