//! One PASS/FAIL line per acceptance criterion. Time bounds are pinned below
//! and apply to unoptimized test builds as well.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use braidforge::abelian::{
    abelian_invariants, invariants_by_minors, is_perfect, relation_matrix, smith_normal_form, AbelianInvariants,
    Abelianization, Matrix,
};
use braidforge::autaction::{action_of_word, working_order, CompositionOrder, FreeBasis};
use braidforge::presentation::{catalog, sigma, Family, FamilySpec};
use braidforge::rewriting::derived_presentation;
use braidforge::tietze::{
    replay_script, ScriptContext, TietzeScript, TietzeState, GRADED_ALTERNATIVE, GRADED_ELIMINATION,
};
use braidforge::verify::{is_interior, run_all, Kernel, Settings};
use braidforge::words::{free_reduce, Word};
use common::{gen, random_tietze_sequences, stack_reduce};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WINDOW: i64 = 3;

struct Criterion {
    id: u8,
    name: &'static str,
    bound: Duration,
    run: fn() -> Result<String, String>,
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Run verification scenarios and require each to pass.
fn scenarios_pass(ids: &[&str]) -> Result<(), String> {
    let settings = Settings { window: WINDOW };
    for id in ids {
        let reports = run_all(Some(id), &settings);
        let report = reports
            .iter()
            .find(|r| r.id == *id)
            .ok_or(format!("scenario {id} missing"))?;
        if !report.passed {
            return Err(report.to_text(false));
        }
    }
    Ok(())
}

fn abelianization_identities() -> Result<String, String> {
    let mut count = 0;
    for n in 2..=6 {
        let p = catalog(FamilySpec::new(Family::WeldedBraid, n)).map_err(|e| e.to_string())?;
        let got = abelian_invariants(&p);
        ensure(got.to_string() == "Z^1 x Z/2", || format!("WB_{n}: {got}"))?;
        count += 1;
    }
    for family in [Family::FlatVirtualBraid, Family::FlatWeldedBraid] {
        for n in 3..=6 {
            let p = catalog(FamilySpec::new(family, n)).map_err(|e| e.to_string())?;
            let got = abelian_invariants(&p);
            ensure(got.to_string() == "Z^0 x Z/2 x Z/2", || {
                format!("{} n={n}: {got}", family.short_name())
            })?;
            count += 1;
        }
    }
    Ok(format!("{count} groups"))
}

fn oracle_relators() -> Result<String, String> {
    ensure(working_order().order == CompositionOrder::LeftToRight, || {
        "composition order changed".into()
    })?;
    let mut relators = 0;
    for n in 2..=6 {
        let basis = FreeBasis::new(n).map_err(|e| e.to_string())?;
        let p = catalog(FamilySpec::new(Family::WeldedBraid, n)).map_err(|e| e.to_string())?;
        for w in p.relator_words() {
            let a = action_of_word(w, basis).map_err(|e| e.to_string())?;
            ensure(a.is_identity(), || format!("WB_{n} relator {w} acts as {a}"))?;
            relators += 1;
        }
        for i in 1..n {
            let a = action_of_word(&Word::power(sigma(i), 2), basis).map_err(|e| e.to_string())?;
            ensure(!a.is_identity(), || format!("s{i}^2 acts trivially on F_{n}"))?;
        }
    }
    Ok(format!("{relators} relators trivial, every s_i^2 nontrivial"))
}

fn graded_relations() -> Result<String, String> {
    let mut checked = 0;
    for n in 3..=6 {
        let kernel = Kernel::new(Family::WeldedBraid, n, WINDOW);
        let rw = kernel.rewriter();
        let d = derived_presentation(&rw);
        let basis = FreeBasis::new(n).map_err(|e| e.to_string())?;
        for w in d.base.relator_words() {
            let expanded = rw.expand(w).map_err(|e| e.to_string())?;
            let a = action_of_word(&expanded, basis).map_err(|e| e.to_string())?;
            ensure(a.is_identity(), || {
                format!("n={n}: derived relator {w} is nontrivial in WB_{n}")
            })?;
            checked += 1;
        }
    }
    scenarios_pass(&["lemma-2.2-relations"])?;
    Ok(format!(
        "{checked} derived relators trivial; all graded families matched"
    ))
}

fn telescoping() -> Result<String, String> {
    let mut conjugates = 0;
    let cases = (3..=6)
        .map(|n| (Family::WeldedBraid, n))
        .chain((3..=6).flat_map(|n| [(Family::FlatVirtualBraid, n), (Family::FlatWeldedBraid, n)]));
    for (family, n) in cases {
        let kernel = Kernel::new(family, n, WINDOW);
        let rw = kernel.rewriter();
        let d = derived_presentation(&rw);
        let count = d
            .check_telescoping(&rw)
            .map_err(|f| format!("{} n={n}: {} failures, first {:?}", family.short_name(), f.len(), f[0]))?;
        conjugates += count;
    }
    Ok(format!("{conjugates} conjugates reproduced"))
}

fn flat_generators() -> Result<String, String> {
    for family in [Family::FlatVirtualBraid, Family::FlatWeldedBraid] {
        for n in 3..=6 {
            let kernel = Kernel::new(family, n, 0);
            let slots = kernel.rewriter().schreier_generators().len();
            ensure(slots == 8 * (n - 1), || {
                format!("{} n={n}: {slots} slots", family.short_name())
            })?;
        }
    }
    scenarios_pass(&["lemma-3.3-generators"])?;
    Ok("8(n-1) slots with matching expansions".into())
}

fn flat_dichotomy() -> Result<String, String> {
    let mut seen = Vec::new();
    for family in [Family::FlatVirtualBraid, Family::FlatWeldedBraid] {
        for n in 3..=6 {
            let kernel = Kernel::new(family, n, 0);
            let d = derived_presentation(&kernel.rewriter());
            let perfect = is_perfect(&d.base);
            ensure(perfect == (n >= 5), || {
                format!("{} n={n}: perfect={perfect}", family.short_name())
            })?;
            if n == 3 {
                let (expected, explicit) = match family {
                    Family::FlatVirtualBraid => (AbelianInvariants::new(1, &[3, 3]), Family::Fvb3Commutator),
                    _ => (AbelianInvariants::new(1, &[3]), Family::Fwb3Commutator),
                };
                let got = abelian_invariants(&d.base);
                ensure(got == expected, || {
                    format!("{} n=3 derived: {got}", family.short_name())
                })?;
                let p = catalog(FamilySpec::new(explicit, 3)).map_err(|e| e.to_string())?;
                let by_minors = invariants_by_minors(&relation_matrix(&p));
                ensure(by_minors == expected, || {
                    format!("{}: {by_minors}", explicit.short_name())
                })?;
                seen.push(format!("{}={got}", family.short_name()));
            }
        }
    }
    Ok(seen.join(", "))
}

fn windowed_perfectness() -> Result<String, String> {
    let mut summary = Vec::new();
    for n in 3..=6 {
        let kernel = Kernel::new(Family::WeldedBraid, n, WINDOW);
        let d = derived_presentation(&kernel.rewriter());
        let ab = Abelianization::of(&d.base);
        let alive: Vec<String> = d
            .base
            .generators()
            .iter()
            .enumerate()
            .filter(|&(i, &g)| is_interior(g, WINDOW) && !ab.kills_generator(i))
            .map(|(_, g)| g.to_string())
            .collect();
        if n >= 5 {
            ensure(alive.is_empty(), || format!("n={n}: interior survivors {alive:?}"))?;
        } else {
            ensure(!alive.is_empty(), || format!("n={n}: every interior generator died"))?;
        }
        summary.push(format!("n={n} alive={}", alive.len()));
    }
    Ok(format!("window-interior evidence at K={WINDOW}: {}", summary.join(" ")))
}

fn script_bounds() -> Result<String, String> {
    let mut counts = Vec::new();
    let runs = (3..=6)
        .map(|n| (n, GRADED_ELIMINATION, 4 + 2 * (n - 3)))
        .chain(std::iter::once((7, GRADED_ALTERNATIVE, 2 * (7 - 3) + 1)));
    for (n, text, bound) in runs {
        let kernel = Kernel::new(Family::WeldedBraid, n, WINDOW);
        let d = derived_presentation(&kernel.rewriter());
        let ctx = ScriptContext::for_window(n, WINDOW, d.radius.unwrap_or(0));
        let script = TietzeScript::parse(text, &ctx).map_err(|e| e.to_string())?;
        let replay = replay_script(TietzeState::from_derived(&d), &script, false).map_err(|e| format!("n={n}: {e}"))?;
        let p = replay.presentation();
        ensure(abelian_invariants(&p) == abelian_invariants(&d.base), || {
            format!("n={n}: invariants changed")
        })?;
        let interior = p.generators().iter().filter(|&&g| is_interior(g, WINDOW)).count();
        ensure(interior <= bound, || {
            format!("n={n}: {interior} interior generators > {bound}")
        })?;
        counts.push(format!("n={n}:{interior}<={bound}"));
    }
    scenarios_pass(&["lemma-2.3-script", "lemma-2.4-script"])?;
    Ok(counts.join(" "))
}

fn property_suites() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5bf);
    for case in 0..500 {
        let (r, c) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let rows: Vec<Vec<i64>> = (0..r)
            .map(|_| (0..c).map(|_| rng.gen_range(-12..=12)).collect())
            .collect();
        let a = Matrix::from_rows(rows, c);
        let form = smith_normal_form(&a);
        let unit = |d: BigInt| d == BigInt::from(1) || d == BigInt::from(-1);
        ensure(form.verify(&a.to_big()), || format!("SNF case {case}: U A V != D"))?;
        ensure(unit(form.u.determinant()) && unit(form.v.determinant()), || {
            format!("SNF case {case}: not unimodular")
        })?;
        ensure(
            AbelianInvariants::from_smith(&form, c) == invariants_by_minors(&a),
            || format!("SNF case {case}: minors disagree"),
        )?;
    }
    let moves = random_tietze_sequences(0x7e12e, 200)?;
    for case in 0..1000 {
        let raw: Vec<Vec<(usize, bool)>> = (0..2)
            .map(|_| {
                (0..rng.gen_range(0..24))
                    .map(|_| (rng.gen_range(0..4), rng.gen()))
                    .collect()
            })
            .collect();
        let words: Vec<Word> = raw
            .iter()
            .map(|r| free_reduce(r.iter().map(|&(g, inv)| (gen(g), if inv { -1 } else { 1 }))))
            .collect();
        let (u, v) = (&words[0], &words[1]);
        let expected: Vec<_> = stack_reduce(&raw[0])
            .into_iter()
            .map(|(g, inv)| (gen(g), if inv { -1 } else { 1 }))
            .collect();
        ensure(u.letters().collect::<Vec<_>>() == expected, || {
            format!("word case {case}: reduction differs")
        })?;
        ensure(u.mul(&u.inverse()).is_identity(), || {
            format!("word case {case}: u u^-1 != 1")
        })?;
        ensure(u.mul(v).inverse() == v.inverse().mul(&u.inverse()), || {
            format!("word case {case}: inverse law")
        })?;
    }
    Ok(format!("500 matrices, 200 sequences ({moves} moves), 1000 words"))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "abelianization identities",
            bound: Duration::from_secs(1),
            run: abelianization_identities,
        },
        Criterion {
            id: 2,
            name: "oracle relator validation",
            bound: Duration::from_secs(1),
            run: oracle_relators,
        },
        Criterion {
            id: 3,
            name: "graded relation families",
            bound: Duration::from_secs(30),
            run: graded_relations,
        },
        Criterion {
            id: 4,
            name: "telescoping",
            bound: Duration::from_secs(10),
            run: telescoping,
        },
        Criterion {
            id: 5,
            name: "flat Schreier generators",
            bound: Duration::from_secs(1),
            run: flat_generators,
        },
        Criterion {
            id: 6,
            name: "flat perfectness dichotomy",
            bound: Duration::from_secs(5),
            run: flat_dichotomy,
        },
        Criterion {
            id: 7,
            name: "windowed perfectness of WB_n'",
            bound: Duration::from_secs(30),
            run: windowed_perfectness,
        },
        Criterion {
            id: 8,
            name: "elimination script bounds",
            bound: Duration::from_secs(60),
            run: script_bounds,
        },
        Criterion {
            id: 9,
            name: "property suites",
            bound: Duration::from_secs(30),
            run: property_suites,
        },
    ];
    let mut failed = Vec::new();
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.bound;
        let ok = outcome.is_ok() && in_time;
        let detail = match &outcome {
            Ok(s) if in_time => s.clone(),
            Ok(s) => format!("{s}; too slow"),
            Err(e) => e.clone(),
        };
        println!(
            "{} criterion {}: {} ({} ms, bound {} ms): {}",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            elapsed.as_millis(),
            c.bound.as_millis(),
            detail
        );
        if !ok {
            failed.push(c.id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
