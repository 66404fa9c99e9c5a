//! Acceptance criteria, one PASS/FAIL line each; exits nonzero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{corpus_algebras, groupoid, hom_square, non_equivariant_map, twist_commutator, CORPUS};
use eqhp::forms::{build_forms, paramixed_report};
use eqhp::galgebra::{GAlgebra, Pairing};
use eqhp::gmodule::{comodule_to_module, equivariant_homs, module_to_comodule, random_matrix, GModule, UnitMap};
use eqhp::greenjulg::{discrete_decomposition, green_julg_verify};
use eqhp::groupoid::FiniteGroupoid;
use eqhp::homalg::homotopy::{cartan_homotopy_check, corner_homotopy, PolyHomotopy};
use eqhp::homalg::{hom_paracomplex, hp_level, hp_quasifree, x_complex};
use eqhp::stability::{cutoff_sums, equivariant_average, stability_check, Admissible};
use eqhp::tensoralg::{quasifree_certificate, ConnectionCertificate};
use eqhp::Q;

type Verdict = Result<(), String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Verdict {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn paramixed() -> Verdict {
    for name in CORPUS {
        let g = groupoid(name);
        for (an, a) in corpus_algebras(&g) {
            let fm = build_forms(&a, 6).map_err(|e| e.to_string())?;
            let r = paramixed_report(&fm);
            ensure(r.max_degree == 4, || format!("{name}/{an}: degree bound {}", r.max_degree))?;
            if let Some(f) = r.relations.iter().find(|r| !r.holds) {
                return Err(format!("{name}/{an}: `{}` fails at {:?}", f.relation, f.witness));
            }
        }
    }
    Ok(())
}

fn comodule() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for name in CORPUS {
        let g = groupoid(name);
        let mut modules = vec![GModule::regular(g.clone()), GModule::trivial(g.clone())];
        modules.extend((0..5).map(|_| GModule::random(g.clone(), &mut rng)));
        for (k, m) in modules.iter().enumerate() {
            let c = module_to_comodule(m);
            ensure(c.coaction_identity(), || format!("{name} module {k}: coaction identity"))?;
            let back = comodule_to_module(&c).map_err(|e| format!("{name} module {k}: {e}"))?;
            ensure(&back == m, || format!("{name} module {k}: module round trip"))?;
            ensure(module_to_comodule(&back) == c, || format!("{name} module {k}: comodule round trip"))?;
        }
    }
    Ok(())
}

fn x_trivial() -> Verdict {
    for (name, expected) in CORPUS.iter().zip([2, 2, 5, 2]) {
        let g = groupoid(name);
        ensure(g.loops().len() == expected, || format!("{name}: {} loops", g.loops().len()))?;
        let x = x_complex(&GAlgebra::trivial(g)).map_err(|e| e.to_string())?;
        let dims = x.complex.dims();
        ensure(dims == (expected, 0), || format!("{name}: X(trivial) ranks {dims:?}"))?;
    }
    Ok(())
}

fn orbit_count_law() -> Verdict {
    for (name, expected) in CORPUS.iter().zip([2, 1, 5, 1]) {
        let g = groupoid(name);
        let classes = g.adjoint_classes().len();
        ensure(classes == expected, || format!("{name}: {classes} adjoint orbits"))?;
        let t = GAlgebra::trivial(g);
        let r = hp_quasifree(&t, &t).map_err(|e| e.to_string())?;
        ensure((r.even, r.odd) == (classes, 0), || format!("{name}: hp ranks ({}, {})", r.even, r.odd))?;
    }
    Ok(())
}

fn square_dichotomy() -> Verdict {
    for name in CORPUS {
        let g = groupoid(name);
        let xs: Vec<_> = [GAlgebra::trivial(g.clone()), GAlgebra::k_g(g.clone())]
            .iter()
            .map(|a| x_complex(a).map(|x| x.complex))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for p in &xs {
            for q in &xs {
                ensure(hom_paracomplex(p, q).square_is_zero(), || format!("{name}: ∂² != 0 on a Hom complex"))?;
            }
        }
        let nontrivial_isotropy = (0..g.n_units()).any(|x| g.isotropy(x).len() > 1);
        if nontrivial_isotropy {
            let x = &xs[1];
            let phi = non_equivariant_map(x, x).ok_or_else(|| format!("{name}: no map fails to commute with T"))?;
            let sq = hom_square(x, x, &phi);
            ensure(sq == twist_commutator(x, x, &phi), || format!("{name}: ∂²φ != Tφ - φT"))?;
            ensure(sq.iter().any(|m| !m.is_zero()), || format!("{name}: ∂²φ vanishes"))?;
        }
    }
    Ok(())
}

fn homotopy_invariance() -> Verdict {
    let corner = cartan_homotopy_check(&corner_homotopy()).map_err(|e| e.to_string())?;
    ensure(corner.all_pass() && corner.classes_equal == Some(true), || format!("corner: {corner:?}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for name in ["z2", "pair2", "z2z3"] {
        let h = PolyHomotopy::random_conjugation(groupoid(name), &mut rng);
        let r = cartan_homotopy_check(&h).map_err(|e| e.to_string())?;
        ensure(r.all_pass() && r.classes_equal == Some(true), || format!("{name}: {r:?}"))?;
    }
    Ok(())
}

fn stability() -> Verdict {
    for name in CORPUS {
        let g = groupoid(name);
        let h = Pairing::regular(g.clone());
        let adm = Admissible::cutoff(&h).map_err(|e| e.to_string())?;
        for a in [GAlgebra::trivial(g.clone()), GAlgebra::k_g(g.clone())] {
            let r = stability_check(&a, &h, &adm).map_err(|e| e.to_string())?;
            ensure(r.twisted_trace_identity, || format!("{name}: twisted trace identity"))?;
            ensure(r.trace_after_iota, || format!("{name}: tr X(iota) != id"))?;
            ensure(r.hp_a == r.hp_stabilized, || format!("{name}: ranks {:?} vs {:?}", r.hp_a, r.hp_stabilized))?;
        }
    }
    Ok(())
}

fn decomposition() -> Verdict {
    for name in CORPUS {
        let g = groupoid(name);
        let t = GAlgebra::trivial(g.clone());
        for (an, b) in [("trivial", t.clone()), ("K_G", GAlgebra::k_g(g.clone()))] {
            let r = discrete_decomposition(&t, &b).map_err(|e| e.to_string())?;
            ensure(r.holds(), || format!("{name}/{an}: global {:?} vs orbit sums {:?}", r.global, r.sums()))?;
        }
    }
    let r = discrete_decomposition(&GAlgebra::trivial(groupoid("z2z3")), &GAlgebra::trivial(groupoid("z2z3"))).map_err(|e| e.to_string())?;
    let parts: Vec<usize> = r.orbits.iter().map(|(_, (e, _))| *e).collect();
    ensure(r.global == (5, 0) && parts == [2, 3], || format!("z2z3: {r:?}"))
}

fn green_julg() -> Verdict {
    for (name, expected) in CORPUS.iter().zip([(2, 0), (1, 0), (5, 0), (1, 0)]) {
        let g = groupoid(name);
        for (an, a) in [("trivial", GAlgebra::trivial(g.clone())), ("K_G", GAlgebra::k_g(g.clone()))] {
            let r = green_julg_verify(&a).map_err(|e| e.to_string())?;
            ensure(r.holds() && r.lhs == expected, || format!("{name}/{an}: {r:?}"))?;
        }
    }
    Ok(())
}

fn quasifreeness() -> Verdict {
    for name in CORPUS {
        let g = groupoid(name);
        let t = GAlgebra::trivial(g.clone());
        let cert = quasifree_certificate(&t).map_err(|e| e.to_string())?;
        ensure(cert.is_some_and(|c| c.verify()), || format!("{name}: no certificate for the trivial algebra"))?;
        let explicit = ConnectionCertificate::explicit_trivial(&t).map_err(|e| e.to_string())?;
        ensure(explicit.verify(), || format!("{name}: explicit connection fails"))?;
        for (an, a) in corpus_algebras(&g) {
            if quasifree_certificate(&a).map_err(|e| e.to_string())?.is_some() {
                let levels = hp_level(&a, &a, 2, 200_000).map_err(|e| e.to_string())?;
                ensure(levels.last().and_then(|r| r.stabilized) == Some(true), || format!("{name}/{an}: levels {levels:?}"))?;
            }
        }
    }
    for n in [2, 3] {
        let d = GAlgebra::group_algebra(Arc::new(FiniteGroupoid::cyclic(n)));
        let cert = quasifree_certificate(&d).map_err(|e| e.to_string())?;
        ensure(cert.is_some_and(|c| c.verify()), || format!("D(Z/{n}): no certificate"))?;
    }
    let dual = GAlgebra::dual_numbers(Arc::new(FiniteGroupoid::cyclic(1)));
    ensure(quasifree_certificate(&dual).map_err(|e| e.to_string())?.is_none(), || "dual numbers certified".into())
}

fn averaging() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for name in CORPUS {
        let g = groupoid(name);
        ensure(cutoff_sums(&g).iter().all(|s| *s == Q::int(1)), || format!("{name}: cut-off sums"))?;
        let (e, f) = (GModule::regular(g.clone()), GModule::random(g.clone(), &mut rng));
        for k in 0..10 {
            let phi: UnitMap = (0..g.n_units()).map(|x| random_matrix(f.dims[x], e.dims[x], &mut rng)).collect();
            let avg = equivariant_average(&e, &f, &phi);
            ensure(e.is_equivariant(&f, &avg), || format!("{name}: average {k} is not equivariant"))?;
        }
        for (k, phi) in equivariant_homs(&e, &f).iter().enumerate() {
            ensure(&equivariant_average(&e, &f, phi) == phi, || format!("{name}: average moves equivariant map {k}"))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("paramixed suite", paramixed),
        ("comodule equivalence", comodule),
        ("X(trivial) ranks", x_trivial),
        ("hp orbit-count law", orbit_count_law),
        ("∂² dichotomy", square_dichotomy),
        ("homotopy invariance", homotopy_invariance),
        ("stability", stability),
        ("discrete decomposition", decomposition),
        ("Green-Julg", green_julg),
        ("quasifreeness", quasifreeness),
        ("averaging", averaging),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let t = Instant::now();
        match check() {
            Ok(()) => println!("PASS {name} ({:.2?})", t.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
