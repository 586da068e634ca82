//! Acceptance suite: one test per exit criterion, each printing a pass/fail
//! line (visible with `--nocapture`). Every check is exact; the runtime
//! bounds are asserted as stated in release builds and with a 5x allowance
//! under debug profiles.

use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use charp_core::derham::{
    self, binomial, dims, dlog, random_closed_form, random_form, subspace_b, subspace_z, DiffForm,
};
use charp_core::duality::{
    self, ramified_case_diagram_check, certify, graded_piece, gram, joint_family_check, cartier_wedge_diagram_check,
    GradedCase, GramKind, LinearPairingSpec,
};
use charp_core::fields::PBasisField;
use charp_core::finab::{
    self, dual_topology_completion, exact_dualization_check, filtration_propagation_check,
    four_lemma_check_right, El, FgAb, FinAb, FinPairing, Subgroup, QZ,
};
use charp_core::suites::{self, GRID};

const SEED: u64 = 1;

fn slack() -> u32 {
    if cfg!(debug_assertions) {
        5
    } else {
        1
    }
}

fn report(criterion: &str, pass: bool, elapsed: Duration, detail: &str) {
    println!(
        "[{}] {criterion}: {detail} ({elapsed:.2?})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{criterion}: {detail}");
}

fn within(elapsed: Duration, stated: Duration) -> bool {
    elapsed <= stated * slack()
}

#[test]
fn criterion_01_dimension_identities() {
    let t0 = Instant::now();
    let mut ok = true;
    for (q, d) in GRID {
        let k = PBasisField::rational(q, d).unwrap();
        let table: Vec<_> = (0..=d + 1).map(|r| dims(&k, r).unwrap()).collect();
        for r in 0..=d {
            ok &= table[r].z - table[r].b == binomial(d, r);
            ok &= table[r].z + table[r + 1].b == table[r].dim_omega;
            ok &= table[r].z + table[d - r].b == table[r].dim_omega;
        }
        if (q, d) == (2, 2) {
            ok &= (table[0].z, table[1].z, table[2].z) == (1, 5, 4);
            ok &= (table[1].b, table[2].b) == (3, 3);
        }
    }
    let elapsed = t0.elapsed();
    ok &= within(elapsed, Duration::from_secs(5));
    report(
        "criterion 1 (dimension identities on the grid, < 5 s)",
        ok,
        elapsed,
        "z-b, z+b', z+b_rev exact for all (p,d,r)",
    );
}

#[test]
fn criterion_02_gram_perfectness() {
    let t0 = Instant::now();
    let mut ok = true;
    let mut count = 0;
    for (q, d) in GRID {
        let k = PBasisField::rational(q, d).unwrap();
        for r in 0..=d {
            for which in [GramKind::PiPhi1, GramKind::Phi2, GramKind::Phi3] {
                let g = gram(&k, which, r).unwrap();
                let cert = certify(&k, &g);
                ok &= cert.perfect && cert.rows == cert.cols;
                count += 1;
            }
        }
    }
    let elapsed = t0.elapsed();
    ok &= within(elapsed, Duration::from_secs(30));
    report(
        "criterion 2 (wedge pairings square and invertible, < 30 s)",
        ok,
        elapsed,
        &format!("{count} Gram matrices over the grid"),
    );
}

#[test]
fn criterion_03_cartier_roundtrips() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut ok = true;
    for (q, d) in [(2u64, 1usize), (3, 1), (2, 2)] {
        let k = PBasisField::rational(q, d).unwrap();
        let mut pass = 0;
        for i in 0..100 {
            let r = i % (d + 1);
            let b = subspace_b(&k, r).unwrap();
            let z = subspace_z(&k, r).unwrap();
            let w = random_form(&k, &mut rng, r, 2, 2);
            let ic = derham::inverse_cartier_with(&k, &b, &w);
            let back = derham::cartier_with(&k, &b, &ic.rep).unwrap();
            let rt1 =
                derham::form_class_with(&k, &b, &back) == derham::form_class_with(&k, &b, &w);
            let zf = random_closed_form(&k, &mut rng, &z, 2, 2);
            let c = derham::cartier_with(&k, &b, &zf).unwrap();
            let rt2 = derham::inverse_cartier_with(&k, &b, &c)
                == derham::form_class_with(&k, &b, &zf);
            if rt1 && rt2 {
                pass += 1;
            }
        }
        ok &= pass == 100;
    }
    report(
        "criterion 3 (Cartier round-trips, 100 seeded forms per configuration)",
        ok,
        t0.elapsed(),
        "C.C^{-1} = id mod B and C^{-1}.C = id on closed forms",
    );
}

#[test]
fn criterion_04_logarithmic_calculus() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let k = PBasisField::rational(2, 2).unwrap();
    let mut steinberg = 0;
    for _ in 0..200 {
        let x = k.random_nonzero(&mut rng, 2, 2);
        let omx = k.sub(&k.one(), &x);
        if omx.is_zero() || dlog(&k, &[x, omx]).unwrap().is_zero() {
            steinberg += 1;
        }
    }
    let mut logpass = 0;
    let configs = [(2u64, 1usize), (2, 2), (3, 1)];
    for i in 0..100 {
        let (q, d) = configs[i % configs.len()];
        let kk = PBasisField::rational(q, d).unwrap();
        let r = 1 + i % d;
        let entries: Vec<_> = (0..r).map(|_| kk.random_nonzero(&mut rng, 2, 2)).collect();
        if derham::is_logarithmic(&kk, &dlog(&kk, &entries).unwrap()) {
            logpass += 1;
        }
    }
    let k1 = PBasisField::rational(2, 1).unwrap();
    let dt = DiffForm::monomial_form(&k1, 1, k1.var(0));
    let planted = !derham::is_logarithmic(&k1, &dt);
    report(
        "criterion 4 (logarithmic calculus)",
        steinberg == 200 && logpass == 100 && planted,
        t0.elapsed(),
        &format!("Steinberg {steinberg}/200, logarithmic {logpass}/100, planted dt fails"),
    );
}

#[test]
fn criterion_05_cartier_diagram_identities() {
    let t0 = Instant::now();
    let mut ok = true;
    for (q, d) in [(2u64, 2usize), (3, 1)] {
        let k = PBasisField::rational(q, d).unwrap();
        for r in 0..=d {
            let rep = cartier_wedge_diagram_check(&k, r, 100, SEED ^ r as u64).unwrap();
            for c in &rep.checks {
                // the two wedge-compatibility identities must hold on all pairs
                if c.name.contains('^') {
                    ok &= c.pass == c.total;
                }
            }
            ok &= rep.all_pass();
        }
    }
    report(
        "criterion 5 (C^{-1}(x^C(y)) = C^{-1}(x)^y and pi(x^j(y)) = pi(x)^y, 100 pairs)",
        ok,
        t0.elapsed(),
        "(p,d) in {(2,2),(3,1)}",
    );
}

#[test]
fn criterion_06_joint_coordinate_criterion() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let fields = [
        PBasisField::rational(2, 1).unwrap(),
        PBasisField::rational(3, 1).unwrap(),
    ];
    let mut pass = 0;
    for i in 0..20 {
        let k = &fields[i % 2];
        let n = 1 + i % 4;
        let spec = loop {
            let m: Vec<Vec<_>> = (0..n)
                .map(|_| (0..n).map(|_| k.random_element(&mut rng, 2, 2)).collect())
                .collect();
            if duality::rank(k, &m) == n {
                break LinearPairingSpec { matrix: m };
            }
        };
        let r = joint_family_check(k, &spec);
        if r.joint_nondeg_left && r.joint_nondeg_right && r.left_kernels_match && r.right_kernels_match
        {
            pass += 1;
        }
    }
    let mut planted_ok = true;
    for i in 0..10 {
        let k = &fields[i % 2];
        let n = 2 + i % 3;
        let mut m: Vec<Vec<_>> = (0..n)
            .map(|_| (0..n).map(|_| k.random_element(&mut rng, 2, 2)).collect())
            .collect();
        for x in m[i % n].iter_mut() {
            *x = k.zero();
        }
        let r = joint_family_check(k, &LinearPairingSpec { matrix: m });
        planted_ok &= !r.joint_nondeg_left && r.left_kernels_match && r.right_kernels_match;
    }
    report(
        "criterion 6 (joint z_m family criterion, 20 specs + planted negatives)",
        pass == 20 && planted_ok,
        t0.elapsed(),
        &format!("{pass}/20 nondegenerate, kernels equal on both tests"),
    );
}

#[test]
fn criterion_07_bottom_case_pairing() {
    let t0 = Instant::now();
    let mut ok = true;
    for q in [2u64, 3, 4] {
        let k = PBasisField::rational(q, 0).unwrap();
        let gp = graded_piece(&k, GradedCase::A, 1, 1, None).unwrap();
        let bottom = gp.case_a_bottom().unwrap();
        ok &= bottom.quotient_order == k.p()
            && bottom.wp_image_size == q / k.p()
            && bottom.trace_surjective
            && bottom.pairing.analysis().perfect;
    }
    let elapsed = t0.elapsed();
    ok &= within(elapsed, Duration::from_secs(1));
    report(
        "criterion 7 (Z/p x F_q/wp perfect by enumeration, q in {2,3,4}, < 1 s)",
        ok,
        elapsed,
        "|F_q/wp| = p verified by full enumeration",
    );
}

#[test]
fn criterion_08_descent_symbol_identity() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut ok = true;
    for q in [2u64, 3] {
        let vf = charp_core::kmilnor::ValuedField::new(
            PBasisField::new(charp_core::fq::Fq::new(q).unwrap(), vec!["u".into(), "t".into()])
                .unwrap(),
        );
        let mut pass = 0;
        for i in 0..50 {
            let n = 2 + (i % 2) as i64;
            let held = loop {
                let a = vf.field.random_element(&mut rng, 2, 2);
                match charp_core::kmilnor::unit_descent_identity(&vf, &a, n) {
                    Ok(res) => break res,
                    Err(charp_core::kmilnor::KmilnorError::ZeroEntry) => continue,
                    Err(e) => panic!("unexpected failure: {e}"),
                }
            };
            if held {
                pass += 1;
            }
        }
        ok &= pass == 50;
    }
    report(
        "criterion 8 (unit-descent symbol identity, 50 instances per field)",
        ok,
        t0.elapsed(),
        "exact dlog equality over GF(2)(u)(t) and GF(3)(u)(t)",
    );
}

#[test]
fn criterion_09_tame_symbol() {
    let t0 = Instant::now();
    let rep = suites::suite_kmilnor(SEED);
    let get = |needle: &str| {
        rep.checks
            .iter()
            .find(|c| c.name.contains(needle))
            .unwrap_or_else(|| panic!("missing check {needle}"))
    };
    let defining = get("tame{t, w}");
    let additive = get("additive");
    let residue = get("differential residue");
    let ok = defining.pass && additive.pass && residue.pass;
    report(
        "criterion 9 (tame symbol: defining rule on 100 units, additivity, residue compatibility on 50)",
        ok,
        t0.elapsed(),
        &format!(
            "{}; {}; {}",
            defining.details, additive.details, residue.details
        ),
    );
}

#[test]
fn criterion_10_finab_harness() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x10);

    // 200 valid ladders, brute-force cross-checked
    let rep = suites::suite_finab(SEED);
    let ladders = rep
        .checks
        .iter()
        .find(|c| c.name.contains("four-lemma conclusions"))
        .expect("ladder check present");
    let planted = rep
        .checks
        .iter()
        .find(|c| c.name.contains("planted exactness"))
        .expect("planted check present");
    let filt = rep
        .checks
        .iter()
        .find(|c| c.name.contains("filtration propagation"))
        .expect("filtration check present");

    // 100 random exact sequences dualize (re-run here at criterion size)
    let mut seq_pass = 0;
    for _ in 0..100 {
        let b = random_small_group(&mut rng);
        let s = random_small_subgroup(&b, &mut rng);
        let (s_struct, s_gens) = s.structure(&b);
        let mut u1m = vec![vec![0i128; s_struct.rank()]; b.rank()];
        for (j, g) in s_gens.iter().enumerate() {
            for i in 0..b.rank() {
                u1m[i][j] = g.0[i];
            }
        }
        let u = finab::FinHom::new(s_struct, b.clone(), u1m).unwrap();
        let (_, v) = finab::quotient(&b, &s);
        if exact_dualization_check(&u, &v).unwrap_or(false) {
            seq_pass += 1;
        }
    }

    let elapsed = t0.elapsed();
    let ok = ladders.pass && planted.pass && filt.pass && seq_pass == 100
        && within(elapsed, Duration::from_secs(60));
    report(
        "criterion 10 (four-lemma ladders, dualization, filtration propagation, < 60 s)",
        ok,
        elapsed,
        &format!(
            "{}; exact sequences {seq_pass}/100; {}",
            ladders.details, filt.details
        ),
    );
}

fn random_small_group<R: Rng>(rng: &mut R) -> FinAb {
    let choices: [&[i128]; 6] = [&[4], &[6], &[8], &[2, 2], &[2, 4], &[12]];
    FinAb::new(choices[rng.gen_range(0..choices.len())].to_vec()).unwrap()
}

fn random_small_subgroup<R: Rng>(a: &FinAb, rng: &mut R) -> Subgroup {
    let gens = (0..rng.gen_range(0..=2))
        .map(|_| El(a.factors().iter().map(|&n| rng.gen_range(0..n)).collect()))
        .collect();
    Subgroup::from_gens(gens)
}

#[test]
fn criterion_11_complexes() {
    let t0 = Instant::now();
    let rep = suites::suite_complexes(SEED);
    let cones = rep
        .checks
        .iter()
        .find(|c| c.name.contains("cone pairings"))
        .expect("cone check");
    let cohom = rep
        .checks
        .iter()
        .find(|c| c.name.contains("match enumeration"))
        .expect("cohomology check");
    let ses = rep
        .checks
        .iter()
        .find(|c| c.name.contains("quasi-isomorphic"))
        .expect("ses check");
    let ok = cones.pass && cohom.pass && ses.pass;
    report(
        "criterion 11 (cone pairings on 100 morphisms; cohomology pairings vs enumeration)",
        ok,
        t0.elapsed(),
        &format!("{}; {}; {}", cones.details, cohom.details, ses.details),
    );
}

#[test]
fn criterion_12_gcoh() {
    let t0 = Instant::now();
    let rep = suites::suite_gcoh(SEED);
    let needed = [
        "cores . res",
        "Shapiro",
        "H^1(Z/n",
        "x u x != 0",
        "graded commutativity",
    ];
    let mut ok = true;
    let mut details = Vec::new();
    for needle in needed {
        let c = rep
            .checks
            .iter()
            .find(|c| c.name.contains(needle))
            .unwrap_or_else(|| panic!("missing check {needle}"));
        ok &= c.pass;
        details.push(format!("{}: {}", c.name, if c.pass { "ok" } else { "FAIL" }));
    }
    let elapsed = t0.elapsed();
    ok &= within(elapsed, Duration::from_secs(60));
    report(
        "criterion 12 (group cohomology battery, < 60 s)",
        ok,
        elapsed,
        &details.join("; "),
    );
}

#[test]
fn criterion_13_completion() {
    let t0 = Instant::now();
    let mut ok = true;
    for n in 2..=12i128 {
        let r = dual_topology_completion(&FgAb::free(1), &FinAb::cyclic(n), &[vec![QZ::new(1, n)]])
            .unwrap();
        ok &= r.completion.factors() == [n] && r.j_matrix == vec![vec![1]] && r.j_surjective;
    }
    // bijective-completion equivalence over 50 random finite pairings
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x13);
    let mut pass = 0;
    for _ in 0..50 {
        let a_fin = random_small_group(&mut rng);
        let b = random_small_group(&mut rng);
        let a = FgAb::from_finab(&a_fin);
        let vals: Vec<Vec<QZ>> = (0..a_fin.rank())
            .map(|i| {
                (0..b.rank())
                    .map(|j| {
                        let g = gcd(a_fin.factors()[i], b.factors()[j]);
                        QZ::new(rng.gen_range(0..g), g)
                    })
                    .collect()
            })
            .collect();
        if let Ok(r) = dual_topology_completion(&a, &b, &vals) {
            if r.completion_bijective == r.right_nondegenerate
                && r.j_surjective
                && r.ker_j_equals_left_kernel
            {
                pass += 1;
            }
        }
    }
    report(
        "criterion 13 (completion: Z x Z/n for n <= 12; bijective iff right-nondegenerate on 50)",
        ok && pass == 50,
        t0.elapsed(),
        &format!("completions exact, equivalence {pass}/50"),
    );
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

// Criterion 14 (the full `verify --suite all` runtime and determinism) is
// asserted against the installed binary in the CLI crate's acceptance tests;
// here we pin the library-level equivalent: every suite passes under the
// default seed.
#[test]
fn criterion_14_all_suites_pass() {
    let t0 = Instant::now();
    let reports = suites::run_all(SEED);
    let ok = reports.iter().all(|r| r.all_pass());
    let elapsed = t0.elapsed();
    let in_time = within(elapsed, Duration::from_secs(120));
    report(
        "criterion 14 (all verification suites pass, < 2 min)",
        ok && in_time,
        elapsed,
        &format!(
            "{} suites, {} checks",
            reports.len(),
            reports.iter().map(|r| r.checks.len()).sum::<usize>()
        ),
    );
}
