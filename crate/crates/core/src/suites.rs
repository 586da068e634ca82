//! Seeded verification suites behind `charp verify`. Each suite runs the
//! module's invariants at their contract sample sizes and reports one line
//! per check; everything is deterministic given the seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::derham::{
    self, binomial, dims, dlog, exterior_d, random_closed_form, random_form, subspace_b,
    subspace_z, wedge, DiffForm,
};
use crate::duality::{
    self, ramified_case_diagram_check, certify, graded_piece, gram, joint_family_check, cartier_wedge_diagram_check,
    GradedCase, GramKind, LinearPairingSpec,
};
use crate::fields::PBasisField;
use crate::finab::{
    self, dual_topology_completion, exact_dualization_check, filtration_propagation_check,
    four_lemma_check_right, lattice, El, FgAb, FinAb, FinHom, FinPairing, Ladder, Subgroup, QZ,
};
use crate::gcoh::{
    self, cohomology, cores_cochain, cores_classes, cup, default_budget, induced_module,
    induced_sequences, res_classes, shapiro_check, tensor, trace_pairing, Cochain, FinGroup,
    GChainPairing, GComplex, GModule, SubgroupG, TraceTheory,
};
use crate::kmilnor::{
    graded_unit_map, residue_compatibility_check, tame_symbol, unit_descent_identity,
    KmilnorError,
    unit_filtration_level, MilnorSymbol, SymbolSum, UnitLevel, ValuedField,
};
use crate::ratfn::RatFn;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub details: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: &str, seed: u64) -> SuiteReport {
        SuiteReport {
            suite: suite.into(),
            seed,
            checks: Vec::new(),
        }
    }

    fn push(&mut self, name: &str, pass: bool, details: String) {
        self.checks.push(Check {
            name: name.into(),
            pass,
            details,
        });
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub const SUITES: [&str; 7] = [
    "fields",
    "derham",
    "duality",
    "kmilnor",
    "finab",
    "complexes",
    "gcoh",
];

pub fn run_suite(name: &str, seed: u64) -> Option<SuiteReport> {
    match name {
        "fields" => Some(suite_fields(seed)),
        "derham" => Some(suite_derham(seed)),
        "duality" => Some(suite_duality(seed)),
        "kmilnor" => Some(suite_kmilnor(seed)),
        "finab" => Some(suite_finab(seed)),
        "complexes" => Some(suite_complexes(seed)),
        "gcoh" => Some(suite_gcoh(seed)),
        _ => None,
    }
}

pub fn run_all(seed: u64) -> Vec<SuiteReport> {
    SUITES
        .iter()
        .map(|s| run_suite(s, seed).expect("known suite"))
        .collect()
}

/// The dimension grid shared by the dimension and perfectness criteria.
pub const GRID: [(u64, usize); 6] = [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (5, 1)];

// --- fields ---

pub fn suite_fields(seed: u64) -> SuiteReport {
    let mut rep = SuiteReport::new("fields", seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xf1e1d5);

    // 500 random p-monomial reconstructions across the grid
    {
        let configs = [(2u64, 1usize), (2, 2), (3, 1), (4, 1), (3, 2), (5, 1)];
        let mut pass = 0;
        let total = 500;
        for i in 0..total {
            let (q, d) = configs[i % configs.len()];
            let k = PBasisField::rational(q, d).unwrap();
            let f = k.random_element(&mut rng, 3, 4);
            let dec = k.p_monomial_decompose(&f);
            if dec.reconstruct(&k) == f && k.p_monomial_decompose(&dec.reconstruct(&k)) == dec {
                pass += 1;
            }
        }
        rep.push(
            "p-monomial reconstruction identity",
            pass == total,
            format!("{pass}/{total} random elements"),
        );
    }

    // Frobenius is a field homomorphism
    {
        let k = PBasisField::rational(3, 2).unwrap();
        let mut pass = 0;
        let total = 50;
        for _ in 0..total {
            let x = k.random_element(&mut rng, 2, 3);
            let y = k.random_element(&mut rng, 2, 3);
            let ok = k.frobenius(&k.add(&x, &y)) == k.add(&k.frobenius(&x), &k.frobenius(&y))
                && k.frobenius(&k.mul(&x, &y)) == k.mul(&k.frobenius(&x), &k.frobenius(&y));
            if ok {
                pass += 1;
            }
        }
        rep.push(
            "Frobenius additivity and multiplicativity",
            pass == total,
            format!("{pass}/{total} random pairs over GF(3)(t1,t2)"),
        );
    }

    // pi_0 is k^p-linear
    {
        let k = PBasisField::rational(2, 2).unwrap();
        let mut pass = 0;
        let total = 50;
        for _ in 0..total {
            let lam = k.frobenius(&k.random_element(&mut rng, 2, 3));
            let f = k.random_element(&mut rng, 2, 3);
            if k.pi0(&k.mul(&lam, &f)) == k.mul(&lam, &k.pi0(&f)) {
                pass += 1;
            }
        }
        rep.push(
            "pi_0 k^p-linearity",
            pass == total,
            format!("{pass}/{total} random pairs"),
        );
    }

    // the Artin-Schreier image has index p
    {
        let mut ok = true;
        let mut details = Vec::new();
        for q in [2u64, 4, 8, 9, 25, 27] {
            let k = PBasisField::rational(q, 0).unwrap();
            let fq = k.fq();
            let kernel = fq.enumerate().filter(|x| fq.trace(x) == 0).count() as u64;
            let good = kernel == q / fq.p();
            ok &= good;
            details.push(format!("q={q}: |ker Tr|={kernel}"));
        }
        rep.push(
            "trace kernel has exactly q/p elements",
            ok,
            details.join(", "),
        );
    }

    rep
}

// --- derham ---

pub fn suite_derham(seed: u64) -> SuiteReport {
    let mut rep = SuiteReport::new("derham", seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xde84a3);

    // dimension identities on the full grid
    {
        let mut ok = true;
        let mut details = Vec::new();
        for (q, d) in GRID {
            let k = PBasisField::rational(q, d).unwrap();
            let table: Vec<derham::Dims> = (0..=d + 1).map(|r| dims(&k, r).unwrap()).collect();
            for r in 0..=d {
                let dm = table[r];
                let rec1 = dm.z - dm.b == binomial(d, r);
                let rec2 = dm.z + table[r + 1].b == dm.dim_omega;
                let rec3 = dm.z + table[d - r].b == dm.dim_omega;
                if !(rec1 && rec2 && rec3) {
                    ok = false;
                    details.push(format!("fail at (p,d,r)=({q},{d},{r})"));
                }
            }
        }
        if details.is_empty() {
            details.push(format!("all r on grid {GRID:?}"));
        }
        rep.push("rank recurrences z-b, z+b', z+b_rev", ok, details.join("; "));
    }

    // d^2 = 0 and Leibniz on 200 random forms/pairs
    {
        let configs = [(2u64, 2usize), (3, 2), (2, 3)];
        let (mut pass_d2, mut pass_leib) = (0, 0);
        let total = 200;
        for i in 0..total {
            let (q, d) = configs[i % configs.len()];
            let k = PBasisField::rational(q, d).unwrap();
            let r = i % d;
            let a = random_form(&k, &mut rng, r, 2, 2);
            if exterior_d(&k, &exterior_d(&k, &a)).is_zero() {
                pass_d2 += 1;
            }
            let b = random_form(&k, &mut rng, (i / 2) % d, 2, 2);
            let lhs = exterior_d(&k, &wedge(&k, &a, &b));
            let sign = if r % 2 == 0 { 1 } else { -1 };
            let da_b = wedge(&k, &exterior_d(&k, &a), &b);
            let a_db = wedge(&k, &a, &exterior_d(&k, &b)).scale(&k, &k.from_int(sign));
            if lhs == da_b.add(&k, &a_db) {
                pass_leib += 1;
            }
        }
        rep.push(
            "d . d = 0",
            pass_d2 == total,
            format!("{pass_d2}/{total} random forms"),
        );
        rep.push(
            "Leibniz rule",
            pass_leib == total,
            format!("{pass_leib}/{total} random pairs"),
        );
    }

    // B^r contained in Z^r on the grid
    {
        let mut ok = true;
        for (q, d) in GRID {
            let k = PBasisField::rational(q, d).unwrap();
            for r in 0..=d {
                let b = subspace_b(&k, r).unwrap();
                let z = subspace_z(&k, r).unwrap();
                ok &= b.subset_of(&k, &z);
            }
        }
        rep.push("B^r contained in Z^r", ok, "all grid configurations".into());
    }

    // Cartier round-trips: 100 seeded forms per configuration
    {
        let configs = [(2u64, 1usize), (3, 1), (2, 2)];
        let mut ok = true;
        let mut details = Vec::new();
        for (q, d) in configs {
            let k = PBasisField::rational(q, d).unwrap();
            let mut pass = 0;
            let total = 100;
            for i in 0..total {
                let r = i % (d + 1);
                let b = subspace_b(&k, r).unwrap();
                let z = subspace_z(&k, r).unwrap();
                let w = random_form(&k, &mut rng, r, 2, 2);
                let ic = derham::inverse_cartier_with(&k, &b, &w);
                let back = derham::cartier_with(&k, &b, &ic.rep).unwrap();
                let rt1 = derham::form_class_with(&k, &b, &back)
                    == derham::form_class_with(&k, &b, &w);
                let zf = random_closed_form(&k, &mut rng, &z, 2, 2);
                let c = derham::cartier_with(&k, &b, &zf).unwrap();
                let rt2 = derham::inverse_cartier_with(&k, &b, &c)
                    == derham::form_class_with(&k, &b, &zf);
                if rt1 && rt2 {
                    pass += 1;
                }
            }
            details.push(format!("({q},{d}): {pass}/{total}"));
            ok &= pass == 100;
        }
        rep.push("C . C^{-1} and C^{-1} . C round-trips", ok, details.join(", "));
    }

    // logarithmic calculus: Steinberg, dlog logarithmic, planted non-example
    {
        let k = PBasisField::rational(2, 2).unwrap();
        let mut steinberg = 0;
        let total_st = 200;
        for _ in 0..total_st {
            let x = k.random_nonzero(&mut rng, 2, 2);
            let omx = k.sub(&k.one(), &x);
            if omx.is_zero() {
                steinberg += 1; // vacuous, x = 1 excluded from the relation
                continue;
            }
            if dlog(&k, &[x, omx]).unwrap().is_zero() {
                steinberg += 1;
            }
        }
        rep.push(
            "Steinberg symbols have dlog = 0",
            steinberg == total_st,
            format!("{steinberg}/{total_st}"),
        );

        let mut logpass = 0;
        let total_log = 100;
        let configs = [(2u64, 1usize), (2, 2), (3, 1)];
        for i in 0..total_log {
            let (q, d) = configs[i % configs.len()];
            let k = PBasisField::rational(q, d).unwrap();
            let r = 1 + i % d;
            let b = subspace_b(&k, r).unwrap();
            let entries: Vec<RatFn> = (0..r).map(|_| k.random_nonzero(&mut rng, 2, 2)).collect();
            let form = dlog(&k, &entries).unwrap();
            if derham::is_logarithmic_with(&k, &b, &form) {
                logpass += 1;
            }
        }
        rep.push(
            "dlog images are logarithmic",
            logpass == total_log,
            format!("{logpass}/{total_log} random symbols"),
        );

        let k1 = PBasisField::rational(2, 1).unwrap();
        let dt = DiffForm::monomial_form(&k1, 1, k1.var(0));
        rep.push(
            "planted non-example: dt over GF(2)(t) is not logarithmic",
            !derham::is_logarithmic(&k1, &dt),
            "exact".into(),
        );
    }

    rep
}

// --- duality ---

pub fn suite_duality(seed: u64) -> SuiteReport {
    let mut rep = SuiteReport::new("duality", seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd0a117);

    // perfectness of all wedge Gram matrices over the grid
    {
        let mut ok = true;
        let mut count = 0;
        for (q, d) in GRID {
            let k = PBasisField::rational(q, d).unwrap();
            for r in 0..=d {
                for which in [GramKind::Phi1, GramKind::PiPhi1, GramKind::Phi2, GramKind::Phi3] {
                    let g = gram(&k, which, r).unwrap();
                    let cert = certify(&k, &g);
                    // expected sizes
                    let pd = (q as usize).pow(d as u32);
                    let expect = match which {
                        GramKind::Phi1 => binomial(d, r),
                        GramKind::PiPhi1 => pd * binomial(d, r),
                        GramKind::Phi2 => dims(&k, r).unwrap().z,
                        GramKind::Phi3 => dims(&k, d - r).unwrap().b,
                    };
                    ok &= cert.perfect && cert.rows == expect;
                    count += 1;
                }
            }
        }
        rep.push(
            "wedge Gram matrices square and invertible",
            ok,
            format!("{count} matrices over the grid"),
        );
    }

    // the joint-coordinate criterion: 20 random nondegenerate specs + planted
    {
        let fields = [
            PBasisField::rational(2, 1).unwrap(),
            PBasisField::rational(3, 1).unwrap(),
        ];
        let mut pass = 0;
        let total = 20;
        for i in 0..total {
            let k = &fields[i % 2];
            let n = 1 + i % 4;
            // random invertible matrix over k
            let spec = loop {
                let m: Vec<Vec<RatFn>> = (0..n)
                    .map(|_| (0..n).map(|_| k.random_element(&mut rng, 2, 2)).collect())
                    .collect();
                if duality::rank(k, &m) == n {
                    break LinearPairingSpec { matrix: m };
                }
            };
            let r = joint_family_check(k, &spec);
            if r.joint_nondeg_left
                && r.joint_nondeg_right
                && r.left_kernels_match
                && r.right_kernels_match
            {
                pass += 1;
            }
        }
        rep.push(
            "joint z_m family nondegenerate for nondegenerate specs",
            pass == total,
            format!("{pass}/{total} random specs"),
        );

        let mut planted_ok = true;
        for i in 0..10 {
            let k = &fields[i % 2];
            let n = 2 + i % 3;
            let mut m: Vec<Vec<RatFn>> = (0..n)
                .map(|_| (0..n).map(|_| k.random_element(&mut rng, 2, 2)).collect())
                .collect();
            let dead = i % n;
            for x in m[dead].iter_mut() {
                *x = k.zero();
            }
            let r = joint_family_check(k, &LinearPairingSpec { matrix: m });
            planted_ok &= !r.joint_nondeg_left
                && r.left_kernels_match
                && r.right_kernels_match
                && r.left_kernel_dim_k >= 1;
        }
        rep.push(
            "planted kernels detected with matching kernels",
            planted_ok,
            "10 planted zero-row specs".into(),
        );
    }

    // Cartier diagram identities on 100 seeded pairs for (2,2) and (3,1)
    {
        let mut ok = true;
        let mut details = Vec::new();
        for (q, d) in [(2u64, 2usize), (3, 1)] {
            let k = PBasisField::rational(q, d).unwrap();
            for r in 0..=d {
                let drep = cartier_wedge_diagram_check(&k, r, 100, seed ^ (r as u64)).unwrap();
                ok &= drep.all_pass();
                for c in &drep.checks {
                    if c.pass != c.total {
                        details.push(format!("({q},{d},r={r}) {}: {}/{}", c.name, c.pass, c.total));
                    }
                }
            }
        }
        if details.is_empty() {
            details.push("100 pairs per (p,d,r)".into());
        }
        rep.push("Cartier/pi wedge compatibility identities", ok, details.join("; "));
    }

    // bottom-of-tower case (a): Z/p x F_q/wp perfect, orders by enumeration
    {
        let mut ok = true;
        let mut details = Vec::new();
        for q in [2u64, 3, 4] {
            let k = PBasisField::rational(q, 0).unwrap();
            let gp = graded_piece(&k, GradedCase::A, 1, 1, None).unwrap();
            let bottom = gp.case_a_bottom().unwrap();
            let p = k.p();
            let good = bottom.quotient_order == p
                && bottom.wp_image_size == q / p
                && bottom.trace_surjective
                && bottom.pairing.analysis().perfect;
            ok &= good;
            details.push(format!("q={q}: |F_q/wp|={}", bottom.quotient_order));
        }
        rep.push(
            "case (a) bottom pairing Z/p x F_q/wp perfect",
            ok,
            details.join(", "),
        );
    }

    // ramified-case diagram identities
    {
        let k2 = PBasisField::rational(2, 1).unwrap();
        let r2 = ramified_case_diagram_check(&k2, 1, &k2.one(), 50, seed ^ 0xca5e).unwrap();
        let k3 = PBasisField::rational(3, 1).unwrap();
        let a = k3.var(0);
        let r3 = ramified_case_diagram_check(&k3, 0, &a, 50, seed ^ 0xca5f).unwrap();
        rep.push(
            "(C^{-1}+a)/(C+a) row compatibility",
            r2.all_pass() && r3.all_pass(),
            "50 samples over GF(2)(t) and GF(3)(t)".into(),
        );
    }

    // bilinearity transport used by case (d)
    {
        let k = PBasisField::rational(2, 2).unwrap();
        let b_top = subspace_b(&k, 2).unwrap();
        let mut pass = 0;
        let total = 50;
        for _ in 0..total {
            let a = k.random_element(&mut rng, 2, 2);
            let w = random_form(&k, &mut rng, 1, 2, 2);
            let v = random_form(&k, &mut rng, 1, 2, 2);
            let lhs = derham::form_class_with(&k, &b_top, &wedge(&k, &w.scale(&k, &a), &v));
            let rhs = derham::form_class_with(&k, &b_top, &wedge(&k, &w, &v.scale(&k, &a)));
            if lhs == rhs {
                pass += 1;
            }
        }
        rep.push(
            "lambda((a w) ^ v) = lambda(w ^ (a v)) at representative level",
            pass == total,
            format!("{pass}/{total}"),
        );
    }

    rep
}

// --- kmilnor ---

fn f2ut() -> ValuedField {
    ValuedField::new(
        PBasisField::new(crate::fq::Fq::new(2).unwrap(), vec!["u".into(), "t".into()]).unwrap(),
    )
}

fn f3ut() -> ValuedField {
    ValuedField::new(
        PBasisField::new(crate::fq::Fq::new(3).unwrap(), vec!["u".into(), "t".into()]).unwrap(),
    )
}

fn random_unit<R: Rng>(vf: &ValuedField, rng: &mut R) -> RatFn {
    let k = &vf.field;
    loop {
        let p = k.random_poly(rng, 2, 3);
        let cand = k.add(&k.one(), &RatFn::from_poly(k.fq(), p, k.d()));
        if !cand.is_zero() && vf.v(&cand) == Some(0) && vf.is_laurent_in_t(&cand) {
            return cand;
        }
    }
}

pub fn suite_kmilnor(seed: u64) -> SuiteReport {
    let mut rep = SuiteReport::new("kmilnor", seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x4a7f00);
    let vf = f2ut();
    let k = &vf.field;
    let kres = vf.residue_field();
    let t = vf.uniformizer();

    // defining rule on 100 random units
    {
        let mut pass = 0;
        let total = 100;
        for _ in 0..total {
            let w = random_unit(&vf, &mut rng);
            let s = MilnorSymbol::new(vec![t.clone(), w.clone()]).unwrap();
            let out = tame_symbol(&vf, &s).unwrap();
            let expect = SymbolSum::single(MilnorSymbol::new(vec![vf.residue(&w).unwrap()]).unwrap());
            if out.eq_mod_p(&kres, &expect).unwrap() {
                pass += 1;
            }
        }
        rep.push(
            "tame{t, w} = {residue w} on random units",
            pass == total,
            format!("{pass}/{total}"),
        );
    }

    // additivity and unit-symbol vanishing
    {
        let mut pass = 0;
        let total = 50;
        for _ in 0..total {
            let x = k.mul(&k.pow(&t, rng.gen_range(-2..3)).unwrap(), &random_unit(&vf, &mut rng));
            let y = k.mul(&k.pow(&t, rng.gen_range(-2..3)).unwrap(), &random_unit(&vf, &mut rng));
            let w = k.mul(&k.pow(&t, rng.gen_range(-2..3)).unwrap(), &random_unit(&vf, &mut rng));
            let lhs =
                tame_symbol(&vf, &MilnorSymbol::new(vec![k.mul(&x, &y), w.clone()]).unwrap())
                    .unwrap();
            let rhs = tame_symbol(&vf, &MilnorSymbol::new(vec![x.clone(), w.clone()]).unwrap())
                .unwrap()
                .add(&tame_symbol(&vf, &MilnorSymbol::new(vec![y.clone(), w.clone()]).unwrap()).unwrap());
            let additive = lhs.eq_mod_p(&kres, &rhs).unwrap();
            let u1 = random_unit(&vf, &mut rng);
            let u2 = random_unit(&vf, &mut rng);
            let units_die = tame_symbol(&vf, &MilnorSymbol::new(vec![u1, u2]).unwrap())
                .unwrap()
                .dlog_class(&kres)
                .unwrap()
                .is_zero();
            if additive && units_die {
                pass += 1;
            }
        }
        rep.push(
            "tame symbol additive; unit symbols die",
            pass == total,
            format!("{pass}/{total}"),
        );
    }

    // residue compatibility on 50 Laurent samples
    {
        let r = residue_compatibility_check(&vf, 50, seed ^ 0x4e5).unwrap();
        rep.push(
            "dlog(tame(s)) equals the differential residue of dlog(s)",
            r.pass == r.total,
            format!("{}/{} Laurent symbols", r.pass, r.total),
        );
    }

    // descent identity: 50 instances over each of GF(2)(u)(t), GF(3)(u)(t)
    {
        let mut ok = true;
        let mut details = Vec::new();
        for (name, vfx) in [("GF(2)(u)(t)", f2ut()), ("GF(3)(u)(t)", f3ut())] {
            let mut pass = 0;
            let total = 50;
            for i in 0..total {
                let n = 2 + (i % 2) as i64;
                // resample until u = 1 + a t^n and the rewritten entries are
                // nonzero (degenerate draws fall outside the identity)
                let held = loop {
                    let a = vfx.field.random_element(&mut rng, 2, 2);
                    match unit_descent_identity(&vfx, &a, n) {
                        Ok(ok) => break ok,
                        Err(KmilnorError::ZeroEntry) => continue,
                        Err(e) => panic!("unexpected failure: {e}"),
                    }
                };
                if held {
                    pass += 1;
                }
            }
            ok &= pass == total;
            details.push(format!("{name}: {pass}/{total}"));
        }
        rep.push("unit-filtration descent symbol identity", ok, details.join(", "));
    }

    // dlog multiplicativity / antisymmetry; filtration level laws
    {
        let mut pass = 0;
        let total = 50;
        for _ in 0..total {
            let x = k.random_nonzero(&mut rng, 2, 2);
            let y = k.random_nonzero(&mut rng, 2, 2);
            let z = k.random_nonzero(&mut rng, 2, 2);
            let mult = SymbolSum::single(MilnorSymbol::new(vec![k.mul(&x, &y), z.clone()]).unwrap())
                .eq_mod_p(
                    k,
                    &SymbolSum {
                        degree: 2,
                        terms: vec![
                            (1, MilnorSymbol::new(vec![x.clone(), z.clone()]).unwrap()),
                            (1, MilnorSymbol::new(vec![y.clone(), z.clone()]).unwrap()),
                        ],
                    },
                )
                .unwrap();
            let anti = SymbolSum {
                degree: 2,
                terms: vec![
                    (1, MilnorSymbol::new(vec![x.clone(), y.clone()]).unwrap()),
                    (1, MilnorSymbol::new(vec![y.clone(), x.clone()]).unwrap()),
                ],
            }
            .dlog_class(k)
            .unwrap()
            .is_zero();
            if mult && anti {
                pass += 1;
            }
        }
        rep.push(
            "dlog multiplicativity and antisymmetry",
            pass == total,
            format!("{pass}/{total} random triples"),
        );

        let mut pass = 0;
        let total = 50;
        for i in 0..total {
            let a = random_unit(&vf, &mut rng);
            let b = random_unit(&vf, &mut rng);
            let (na, nb) = (1 + (i % 3) as i64, 1 + ((i / 3) % 3) as i64);
            let x = k.add(&k.one(), &k.mul(&a, &k.pow(&t, na).unwrap()));
            let y = k.add(&k.one(), &k.mul(&b, &k.pow(&t, nb).unwrap()));
            let lx = unit_filtration_level(&vf, &x);
            let ly = unit_filtration_level(&vf, &y);
            let lxy = unit_filtration_level(&vf, &k.mul(&x, &y));
            let ok = match (lx, ly, lxy) {
                (UnitLevel::Finite(a), UnitLevel::Finite(b), UnitLevel::Finite(c)) => {
                    c >= a.min(b) && (a == b || c == a.min(b))
                }
                _ => true,
            };
            // graded additivity at equal exact levels
            let g_ok = if na == nb {
                let ga = graded_unit_map(&vf, &x, na).unwrap();
                let gb = graded_unit_map(&vf, &y, na).unwrap();
                let gab = graded_unit_map(&vf, &k.mul(&x, &y), na).unwrap();
                gab == kres.add(&ga, &gb)
            } else {
                true
            };
            if ok && g_ok {
                pass += 1;
            }
        }
        rep.push(
            "unit filtration level and graded-map laws",
            pass == total,
            format!("{pass}/{total}"),
        );
    }

    rep
}

// --- finab helpers (random instances) ---

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn random_finab<R: Rng>(rng: &mut R, max_order: i128) -> FinAb {
    // random invariant-factor chain with order bounded by max_order
    loop {
        let rank = rng.gen_range(1..=2);
        let mut factors = Vec::new();
        let mut order = 1i128;
        let mut prev = 1i128;
        for _ in 0..rank {
            let next = if prev == 1 {
                [2i128, 2, 3, 4][rng.gen_range(0..4)]
            } else {
                prev * [1i128, 2][rng.gen_range(0..2)]
            };
            if order * next > max_order {
                break;
            }
            factors.push(next);
            order *= next;
            prev = next;
        }
        if !factors.is_empty() {
            return FinAb::new(factors).unwrap();
        }
    }
}

fn random_el<R: Rng>(a: &FinAb, rng: &mut R) -> El {
    El(a.factors().iter().map(|&n| rng.gen_range(0..n)).collect())
}

fn random_subgroup<R: Rng>(a: &FinAb, rng: &mut R) -> Subgroup {
    let gens = (0..rng.gen_range(0..=2)).map(|_| random_el(a, rng)).collect();
    Subgroup::from_gens(gens)
}

/// A random valid four-lemma ladder built from an exact column and its dual,
/// with optional benign extensions that break the unconstrained
/// nondegeneracies.
fn random_ladder<R: Rng>(rng: &mut R) -> Ladder {
    let a2 = random_finab(rng, 16);
    let s = random_subgroup(&a2, rng);
    let (s_struct, s_gens) = s.structure(&a2);
    // u1 : S -> A2
    let mut u1m = lattice::zeros(a2.rank(), s_struct.rank());
    for (j, g) in s_gens.iter().enumerate() {
        for i in 0..a2.rank() {
            u1m[i][j] = g.0[i];
        }
    }
    let u1 = FinHom::new(s_struct.clone(), a2.clone(), u1m).unwrap();
    // u2 : A2 -> A2/S
    let (q, u2) = finab::quotient(&a2, &s);
    // u3 : A3 -> A3/im(u2) = 0 quotient (column exact at A3)
    let (a4, u3) = finab::quotient(&q, &u2.image());

    // duals with evaluation pairings
    let mut pairings = [
        FinPairing::standard(&s_struct),
        FinPairing::standard(&a2),
        FinPairing::standard(&q),
        FinPairing::standard(&a4),
    ];
    let mut down = [u1, u2, u3];
    let up = [down[0].dual(), down[1].dual(), down[2].dual()];

    // benign mutation A: extend A1 by a summand paired to zero
    if rng.gen_bool(0.4) {
        let extra = FinAb::cyclic([2i128, 3][rng.gen_range(0..2)]);
        let sum = crate::complexes::direct_sum(&s_struct, &extra);
        // new phi1: zero on the extra summand
        let b1 = pairings[0].b.clone();
        let mut vals = vec![vec![QZ::zero(); b1.rank()]; sum.group.rank()];
        for gi in 0..sum.group.rank() {
            let orig = sum.proj_a.apply(&sum.group.gen(gi));
            for hj in 0..b1.rank() {
                vals[gi][hj] = pairings[0].eval(&orig, &b1.gen(hj));
            }
        }
        pairings[0] = FinPairing::new(sum.group.clone(), b1, vals).unwrap();
        down[0] = down[0].compose(&sum.proj_a);
    }
    // benign mutation B: extend B4 by a zero-paired summand
    if rng.gen_bool(0.4) {
        let extra = FinAb::cyclic([2i128, 4][rng.gen_range(0..2)]);
        let b4 = pairings[3].b.clone();
        let sum = crate::complexes::direct_sum(&b4, &extra);
        let a4g = pairings[3].a.clone();
        let mut vals = vec![vec![QZ::zero(); sum.group.rank()]; a4g.rank()];
        for gi in 0..a4g.rank() {
            for hj in 0..sum.group.rank() {
                let orig = sum.proj_a.apply(&sum.group.gen(hj));
                vals[gi][hj] = pairings[3].eval(&a4g.gen(gi), &orig);
            }
        }
        pairings[3] = FinPairing::new(a4g, sum.group.clone(), vals).unwrap();
        // v3 : B4' -> B3 factors through the old B4
        let old_v3 = up[2].clone();
        let new_v3 = old_v3.compose(&sum.proj_a);
        return Ladder {
            pairings,
            down,
            up: [up[0].clone(), up[1].clone(), new_v3],
            signs: [1, 1, 1],
        };
    }

    Ladder {
        pairings,
        down,
        up,
        signs: [1, 1, 1],
    }
}

// --- finab suite ---

pub fn suite_finab(seed: u64) -> SuiteReport {
    let mut rep = SuiteReport::new("finab", seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xf1ab00);

    // SNF invariants under unimodular multiplication
    {
        let mut pass = 0;
        let total = 50;
        for _ in 0..total {
            let rows = rng.gen_range(1..4);
            let cols = rng.gen_range(1..4);
            let m: lattice::Mat = (0..rows)
                .map(|_| (0..cols).map(|_| rng.gen_range(-9..=9)).collect())
                .collect();
            let mut m2 = m.clone();
            for _ in 0..4 {
                let i = rng.gen_range(0..rows);
                let j = rng.gen_range(0..rows);
                if i != j {
                    let qq: i128 = rng.gen_range(-3..=3);
                    for c in 0..cols {
                        let x = m2[j][c];
                        m2[i][c] += qq * x;
                    }
                }
            }
            if lattice::snf(&m).diag() == lattice::snf(&m2).diag() {
                pass += 1;
            }
        }
        rep.push(
            "SNF invariant under unimodular row operations",
            pass == total,
            format!("{pass}/{total}"),
        );
    }

    // duals: |A*| = |A|, bidual identity
    {
        let mut ok = true;
        for _ in 0..20 {
            let a = random_finab(&mut rng, 16);
            ok &= a.dual().order() == a.order();
            let b = random_finab(&mut rng, 16);
            // random hom A -> B
            let m: lattice::Mat = (0..b.rank())
                .map(|i| {
                    (0..a.rank())
                        .map(|j| {
                            // multiples of b_i / gcd(a_j, b_i) are well defined
                            let g = {
                                let (mut x, mut y) = (a.factors()[j], b.factors()[i]);
                                while y != 0 {
                                    let t = x % y;
                                    x = y;
                                    y = t;
                                }
                                x
                            };
                            (b.factors()[i] / g) * rng.gen_range(0..3)
                        })
                        .collect()
                })
                .collect();
            let f = FinHom::new(a.clone(), b.clone(), m).unwrap();
            ok &= f.dual().dual().same_map(&f);
        }
        rep.push("|A*| = |A| and bidual identity", ok, "20 random pairs".into());
    }

    // perfect iff invertible value matrix, cross-checked by enumeration
    {
        let mut ok = true;
        for _ in 0..20 {
            let a = random_finab(&mut rng, 8);
            let phi = FinPairing::standard(&a);
            let an = phi.analysis();
            let (lk, rk) = phi.brute_force_kernels();
            ok &= an.perfect && lk.len() == 1 && rk.len() == 1;
            // a degenerate twist: scale one row by the factor
            if a.rank() >= 1 {
                let mut vals = phi.vals.clone();
                for v in vals[0].iter_mut() {
                    *v = v.scale(a.factors()[0]);
                }
                let phi2 = FinPairing::new(a.clone(), a.dual(), vals).unwrap();
                let an2 = phi2.analysis();
                let (lk2, _) = phi2.brute_force_kernels();
                ok &= !an2.perfect && (lk2.len() as i128) == an2.left_kernel.order();
            }
        }
        rep.push(
            "perfectness matches enumeration on small pairings",
            ok,
            "20 standard + 20 degenerate".into(),
        );
    }

    // 200 seeded valid four-lemma ladders (orders <= 16)
    {
        let mut pass = 0;
        let total = 200;
        for _ in 0..total {
            let ladder = random_ladder(&mut rng);
            match four_lemma_check_right(&ladder) {
                Ok(repo) => {
                    if repo.hypotheses_hold
                        && repo.conclusion
                        && repo.brute_force_agrees != Some(false)
                    {
                        pass += 1;
                    }
                }
                Err(_) => {}
            }
        }
        rep.push(
            "four-lemma conclusions hold on valid ladders",
            pass == total,
            format!("{pass}/{total} (brute-force cross-checked)"),
        );

        // mutated ladder: violate im(u1) = ker(u2) and expect a reported failure
        let mut detected = true;
        for _ in 0..20 {
            let mut ladder = random_ladder(&mut rng);
            // shrink u1 to the zero map; ker u2 stays whatever it was
            let a1 = ladder.down[0].dom.clone();
            let a2 = ladder.down[0].cod.clone();
            ladder.down[0] = FinHom::zero(&a1, &a2);
            ladder.up[0] = ladder.down[0].dual();
            if let Ok(repo) = four_lemma_check_right(&ladder) {
                let exactness_violated = repo
                    .hypotheses
                    .iter()
                    .any(|(name, ok)| name.contains("ker u2 equals im u1") && !ok);
                // only count instances where the mutation actually broke it
                if ladder.down[1].kernel().order(&a2) > 1 && !exactness_violated {
                    detected = false;
                }
            }
        }
        rep.push(
            "planted exactness violations are reported",
            detected,
            "20 mutated ladders".into(),
        );
    }

    // 100 random exact sequences dualize exactly
    {
        let mut pass = 0;
        let total = 100;
        for _ in 0..total {
            let b = random_finab(&mut rng, 16);
            let s = random_subgroup(&b, &mut rng);
            let (s_struct, s_gens) = s.structure(&b);
            let mut u1m = lattice::zeros(b.rank(), s_struct.rank());
            for (j, g) in s_gens.iter().enumerate() {
                for i in 0..b.rank() {
                    u1m[i][j] = g.0[i];
                }
            }
            let u = FinHom::new(s_struct, b.clone(), u1m).unwrap();
            let (_, v) = finab::quotient(&b, &s);
            if exact_dualization_check(&u, &v).unwrap_or(false) {
                pass += 1;
            }
        }
        rep.push(
            "dual sequences exact (finite dualization)",
            pass == total,
            format!("{pass}/{total} random exact sequences"),
        );
    }

    // filtration propagation of nondegeneracy, including planted failures
    {
        let mut ok = true;
        for p in [2i128, 3] {
            let a = FinAb::cyclic(p * p);
            let phi = FinPairing::standard(&a);
            let a_filt = vec![
                Subgroup::full(&a),
                Subgroup::from_gens(vec![El(vec![p])]),
                Subgroup::trivial(),
            ];
            let b_filt = vec![Subgroup::from_gens(vec![El(vec![p])]), Subgroup::full(&a)];
            let r = filtration_propagation_check(&phi, &a_filt, &b_filt).unwrap();
            ok &= r.all_graded_nondeg
                && r.direct_nondeg_left
                && r.direct_nondeg_right
                && r.lemma_conclusion_matches_direct
                && r.first_failing_level.is_none();

            // planted degenerate graded piece: scale the pairing by p
            let vals = phi
                .vals
                .iter()
                .map(|row| row.iter().map(|v| v.scale(p)).collect())
                .collect();
            let phi_bad = FinPairing::new(a.clone(), a.clone(), vals).unwrap();
            let r2 = filtration_propagation_check(&phi_bad, &a_filt, &b_filt);
            match r2 {
                Ok(r2) => {
                    ok &= !r2.all_graded_nondeg
                        && r2.first_failing_level.is_some()
                        && r2.lemma_conclusion_matches_direct;
                }
                Err(_) => {
                    // orthogonality may fail for the scaled pairing; accept
                }
            }
        }
        rep.push(
            "filtration propagation matches direct analysis",
            ok,
            "p-adic filtrations on Z/p^2, planted failures".into(),
        );
    }

    // dual topology and completion
    {
        let mut ok = true;
        for n in 2..=12i128 {
            let a = FgAb::free(1);
            let r = dual_topology_completion(&a, &FinAb::cyclic(n), &[vec![QZ::new(1, n)]]).unwrap();
            ok &= r.completion.factors() == [n]
                && r.j_matrix == vec![vec![1]]
                && r.j_surjective
                && r.ker_j_equals_left_kernel
                && r.b_to_dual_iso;
        }
        rep.push(
            "completion of (Z, Z/n multiplication) is Z/n with j = reduction",
            ok,
            "n = 2..12".into(),
        );

        let mut pass = 0;
        let total = 50;
        for _ in 0..total {
            let a_fin = random_finab(&mut rng, 12);
            let b = random_finab(&mut rng, 12);
            let a = FgAb::from_finab(&a_fin);
            // random compatible pairing: values with denominators dividing both
            let vals: Vec<Vec<QZ>> = (0..a_fin.rank())
                .map(|i| {
                    (0..b.rank())
                        .map(|j| {
                            let g = {
                                let (mut x, mut y) = (a_fin.factors()[i], b.factors()[j]);
                                while y != 0 {
                                    let t = x % y;
                                    x = y;
                                    y = t;
                                }
                                x
                            };
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
        rep.push(
            "completion bijective iff right-nondegenerate",
            pass == total,
            format!("{pass}/{total} random finite pairings"),
        );
    }

    // character generation
    {
        let mut ok = true;
        for _ in 0..20 {
            let a = random_finab(&mut rng, 16);
            let chars: Vec<El> = (0..a.rank()).map(|i| a.gen(i)).collect();
            let r = finab::char_generation_test(&a, &chars);
            ok &= r.generates && r.span_is_all && r.kernel_trivial == r.span_is_all;
            if a.rank() > 1 {
                let r2 = finab::char_generation_test(&a, &chars[..1]);
                ok &= !r2.generates && r2.kernel_trivial == r2.span_is_all;
            }
        }
        rep.push(
            "character generation: kernel route matches span route",
            ok,
            "20 random groups".into(),
        );
    }

    rep
}

// --- complexes suite ---

pub fn suite_complexes(seed: u64) -> SuiteReport {
    use crate::complexes::{
        cohomology_pairing, cone_pairing, direct_sum, representative_independence_check, BiMap,
        ChainMap, ChainPairing, FinComplex, PairingMorphism,
    };
    use std::collections::BTreeMap;

    let mut rep = SuiteReport::new("complexes", seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0e500);

    let mult_pairing = |n: i128| -> ChainPairing {
        let c = FinComplex::concentrated(0, FinAb::cyclic(n));
        let mut comps = BTreeMap::new();
        comps.insert(
            (0, 0),
            BiMap {
                values: vec![vec![El(vec![1])]],
            },
        );
        ChainPairing::new(c.clone(), c.clone(), c, comps).unwrap()
    };

    // 100 seeded morphisms of pairings: cone pairing chain identity + squares
    {
        let mut pass = 0;
        let total = 100;
        for _ in 0..total {
            let n: i128 = [2, 3, 4, 8][rng.gen_range(0..4)];
            let phi = mult_pairing(n);
            let c: i128 = rng.gen_range(0..n);
            let u = ChainMap::new(phi.m.clone(), phi.m.clone(), {
                let mut m = BTreeMap::new();
                m.insert(
                    0,
                    FinHom::new(FinAb::cyclic(n), FinAb::cyclic(n), vec![vec![c]]).unwrap(),
                );
                m
            })
            .unwrap();
            let uv = u.clone();
            // multiplication maps are self-adjoint for the multiplication pairing
            match PairingMorphism::new(phi.clone(), phi.clone(), u, uv) {
                Ok(pm) => match cone_pairing(&pm) {
                    Ok(cp) => {
                        // ChainPairing::new inside cone_pairing validated the
                        // chain identity; check the two squares
                        if cp.squares_commute(&pm) {
                            pass += 1;
                        }
                    }
                    Err(_) => {}
                },
                Err(_) => {}
            }
        }
        rep.push(
            "cone pairings: chain identity and structural squares",
            pass == total,
            format!("{pass}/{total} seeded morphisms"),
        );
    }

    // cohomology pairings match full enumeration on small instances
    {
        let mut pass = 0;
        let total = 30;
        for _ in 0..total {
            let n: i128 = [2, 3, 4][rng.gen_range(0..3)];
            let phi = mult_pairing(n);
            let c: i128 = rng.gen_range(0..n);
            let u = ChainMap::new(phi.m.clone(), phi.m.clone(), {
                let mut m = BTreeMap::new();
                m.insert(
                    0,
                    FinHom::new(FinAb::cyclic(n), FinAb::cyclic(n), vec![vec![c]]).unwrap(),
                );
                m
            })
            .unwrap();
            let pm = PairingMorphism::new(phi.clone(), phi.clone(), u.clone(), u).unwrap();
            let cp = cone_pairing(&pm).unwrap();
            let mut all_match = true;
            for deg in [-1, 0] {
                let gp = cohomology_pairing(&cp.pairing, deg, -deg);
                let hm = cp.pairing.m.cohomology(deg);
                let hn = cp.pairing.mv.cohomology(-deg);
                let ht = cp.pairing.eta.cohomology(0);
                // full enumeration over classes
                for x in hm.group.enumerate() {
                    for y in hn.group.enumerate() {
                        // lift classes through generators
                        let mut xc = cp.pairing.m.group(deg).zero();
                        for (i, &c1) in x.0.iter().enumerate() {
                            xc = cp.pairing.m.group(deg).add(
                                &xc,
                                &cp.pairing.m.group(deg).scale(c1, &hm.gens_in_ambient[i]),
                            );
                        }
                        let mut yc = cp.pairing.mv.group(-deg).zero();
                        for (j, &c2) in y.0.iter().enumerate() {
                            yc = cp.pairing.mv.group(-deg).add(
                                &yc,
                                &cp.pairing.mv.group(-deg).scale(c2, &hn.gens_in_ambient[j]),
                            );
                        }
                        let direct = ht.class_of(&cp.pairing.eval(deg, -deg, &xc, &yc));
                        if gp.eval(&x, &y) != direct {
                            all_match = false;
                        }
                    }
                }
                if !representative_independence_check(&cp.pairing, deg, -deg, 5, &mut rng) {
                    all_match = false;
                }
            }
            if all_match {
                pass += 1;
            }
        }
        rep.push(
            "cohomology pairings match enumeration and are representative-independent",
            pass == total,
            format!("{pass}/{total} cone instances"),
        );
    }

    // exact sequences of pairings: H(cone) matches H(M3) with pairings matched
    {
        let mut pass = 0;
        let total = 25;
        for _ in 0..total {
            if ses_cone_quasi_iso_check(&mut rng) {
                pass += 1;
            }
        }
        rep.push(
            "cone of a SES is quasi-isomorphic to the third pairing",
            pass == total,
            format!("{pass}/{total} random short exact instances"),
        );
    }

    // shift composition: literal on 2-torsion, up to (-1)^{ss'} in general
    {
        let phi2 = mult_pairing(2);
        let lit = phi2.shift(1).shift(1).same_pairing(&phi2.shift(2));
        let phi3 = mult_pairing(3);
        let twice = phi3.shift(1).shift(1);
        let direct = phi3.shift(2);
        let a2 = twice.m.group(-2);
        let v_twice = twice.eval(-2, 2, &a2.gen(0), &twice.mv.group(2).gen(0));
        let v_direct = direct.eval(-2, 2, &a2.gen(0), &direct.mv.group(2).gen(0));
        let koszul = v_twice == FinAb::cyclic(3).neg(&v_direct);
        rep.push(
            "shift sign rule composes (literal mod 2, Koszul sign in general)",
            lit && koszul,
            "double shift vs direct shift".into(),
        );
        let _ = direct_sum(&FinAb::cyclic(2), &FinAb::cyclic(4));
    }

    rep
}

/// Build a random SES of pairings `0 -> M1# -> M2# -> M3# -> 0`, take its
/// cone, and verify the identification of `H(C)` with `H(M3)`,
/// pairings matched via the structural maps.
fn ses_cone_quasi_iso_check<R: Rng>(rng: &mut R) -> bool {
    use crate::complexes::{cone_pairing, BiMap, ChainMap, ChainPairing, FinComplex, PairingMorphism};
    use std::collections::BTreeMap;

    // M2: single-degree Z/n with the multiplication pairing; S a subgroup
    let n: i128 = [4, 8, 9, 4][rng.gen_range(0..4)];
    let m2 = FinAb::cyclic(n);
    let divisors: Vec<i128> = (1..=n).filter(|d| n % d == 0).collect();
    let dsel = divisors[rng.gen_range(0..divisors.len())];
    // S = (n/d) Z / n Z of order d
    let s = Subgroup::from_gens(vec![El(vec![n / dsel])]);
    if dsel == 1 || dsel == n {
        return ses_cone_quasi_iso_check(rng); // want a proper subobject
    }

    let (s_struct, s_gens) = s.structure(&m2);
    let mut u_m = lattice::zeros(1, s_struct.rank());
    for (j, g) in s_gens.iter().enumerate() {
        u_m[0][j] = g.0[j.min(0)];
    }
    let u_hom = FinHom::new(s_struct.clone(), m2.clone(), u_m).unwrap();
    let (q, v_hom) = finab::quotient(&m2, &s);

    // pairings into eta = Z/n: phi2 = multiplication; phi1 on S x (M2v/Ann S);
    // phi3 on Q x Ann(S). With M2v = Z/n and Ann(S) = d Z/n of order n/d:
    let eta = FinComplex::concentrated(0, FinAb::cyclic(n));
    let phi2 = {
        let c = FinComplex::concentrated(0, m2.clone());
        let mut comps = BTreeMap::new();
        comps.insert(
            (0, 0),
            BiMap {
                values: vec![vec![El(vec![1])]],
            },
        );
        ChainPairing::new(c.clone(), c, eta.clone(), comps).unwrap()
    };
    // Ann(S) = {y : (n/d) y = 0 mod n} = d Z/n
    let ann = Subgroup::from_gens(vec![El(vec![dsel])]);
    let (ann_struct, ann_gens) = ann.structure(&m2);
    // phi3 : Q x Ann -> eta, (q-class, y) -> lift(q) * y
    let phi3 = {
        let cq = FinComplex::concentrated(0, q.clone());
        let cann = FinComplex::concentrated(0, ann_struct.clone());
        let mut values = vec![vec![El(vec![0]); ann_struct.rank()]; q.rank()];
        for qi in 0..q.rank() {
            let lift = v_hom.preimage(&q.gen(qi)).expect("quotient is onto");
            for (aj, ag) in ann_gens.iter().enumerate() {
                values[qi][aj] = FinAb::cyclic(n).reduce(&[lift.0[0] * ag.0[0]]);
            }
        }
        ChainPairing::new(cq, cann, eta.clone(), {
            let mut comps = BTreeMap::new();
            comps.insert((0, 0), BiMap { values });
            comps
        })
        .unwrap()
    };
    // phi1 : S x (M2v / Ann) -> eta
    let (qv, vq_hom) = finab::quotient(&m2, &ann);
    let phi1 = {
        let cs = FinComplex::concentrated(0, s_struct.clone());
        let cqv = FinComplex::concentrated(0, qv.clone());
        let mut values = vec![vec![El(vec![0]); qv.rank()]; s_struct.rank()];
        for (si, sg) in s_gens.iter().enumerate() {
            for qj in 0..qv.rank() {
                let lift = vq_hom.preimage(&qv.gen(qj)).expect("quotient onto");
                values[si][qj] = FinAb::cyclic(n).reduce(&[sg.0[0] * lift.0[0]]);
            }
        }
        ChainPairing::new(cs, cqv, eta.clone(), {
            let mut comps = BTreeMap::new();
            comps.insert((0, 0), BiMap { values });
            comps
        })
        .unwrap()
    };

    // morphism M1# => M2#: u = inclusion, uv = quotient M2v -> M2v/Ann
    let u_chain = ChainMap::new(phi1.m.clone(), phi2.m.clone(), {
        let mut m = BTreeMap::new();
        m.insert(0, u_hom.clone());
        m
    })
    .unwrap();
    let uv_chain = ChainMap::new(phi2.mv.clone(), phi1.mv.clone(), {
        let mut m = BTreeMap::new();
        m.insert(0, vq_hom.clone());
        m
    })
    .unwrap();
    let pm = match PairingMorphism::new(phi1.clone(), phi2.clone(), u_chain, uv_chain) {
        Ok(pm) => pm,
        Err(_) => return false,
    };
    let cp = match cone_pairing(&pm) {
        Ok(cp) => cp,
        Err(_) => return false,
    };
    if !cp.squares_commute(&pm) {
        return false;
    }

    // H(C) must match H(M3) = Q in degree 0 (and vanish elsewhere),
    // with pairings matched through v . pi2 and j2 . vv.
    let h0c = cp.pairing.m.cohomology(0);
    if h0c.group.factors() != q.factors() {
        return false;
    }
    let hm1 = cp.pairing.m.cohomology(-1);
    // H^{-1}(C) = ker(u) = 0 for injective u
    if !hm1.group.is_trivial() {
        return false;
    }
    // pairing matched: phi_C(c, j1'(y)) with the M3-side identification
    let hv = cp.pairing.mv.cohomology(0);
    for x in &h0c.gens_in_ambient {
        // v(pi2(x)) in Q
        let x2 = cp.cone.sums[&0].proj_b.apply(x);
        let x3 = v_hom.apply(&x2);
        for y in &hv.gens_in_ambient {
            // pull y back along vv applied into the cocone: the M3v-side
            // representative is pi2v-ish; use the cocone's second component
            let y2 = cp.cocone.sums[&0].proj_b.apply(y);
            // y2 lies in M2v; its class mod Ann pairs with S... full check:
            // phi_C(x, y) must equal phi3(v pi2 x, y') whenever y = j2 vv(y')
            // for some y' in M3v = Ann(S); test all y' and match.
            for yp in ann_struct.enumerate() {
                let mut amb = El(vec![0]);
                for (aj, ag) in ann_gens.iter().enumerate() {
                    amb = FinAb::cyclic(n).add(
                        &amb,
                        &FinAb::cyclic(n).reduce(&[yp.0[aj] * ag.0[0]]),
                    );
                }
                let y_cone = cp.cocone.sums[&0].inj_b.apply(&amb);
                let lhs = cp.pairing.eval(0, 0, x, &y_cone);
                let rhs = phi3.eval(0, 0, &q.reduce(&x3.0), &yp);
                if lhs != rhs {
                    return false;
                }
            }
            let _ = y2;
        }
    }
    true
}

// --- gcoh suite ---

pub fn suite_gcoh(seed: u64) -> SuiteReport {
    let mut rep = SuiteReport::new("gcoh", seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6c0a00);
    let budget = default_budget();

    // cores . res = [G:H] id on the battery
    {
        let batteries: Vec<(FinGroup, Vec<usize>, i128, &str)> = vec![
            (FinGroup::cyclic(4), vec![0, 2], 2, "(Z/4, Z/2)"),
            (FinGroup::cyclic(6), vec![0, 2, 4], 3, "(Z/6, Z/3)"),
            (FinGroup::cyclic(6), vec![0, 3], 2, "(Z/6, Z/2)"),
            (FinGroup::s3(), FinGroup::a3_in_s3(), 6, "(S3, A3)"),
        ];
        let mut ok = true;
        let mut details = Vec::new();
        for (g, helems, modn, name) in batteries {
            let h = SubgroupG::new(&g, helems).unwrap();
            let index = h.index() as i128;
            let m = GModule::trivial(g.clone(), FinAb::cyclic(modn));
            for n in 1..=2usize {
                let hg = cohomology(&m, n, budget).unwrap();
                let mh = m.restrict(&h);
                let hh = cohomology(&mh, n, budget).unwrap();
                let res = res_classes(&hg, &hh, &h).unwrap();
                let cores = cores_classes(&hh, &hg, &h).unwrap();
                let good = (0..hg.group.rank()).all(|col| {
                    let composed: Vec<i128> = (0..hg.group.rank())
                        .map(|i| {
                            (0..hh.group.rank()).map(|l| cores[i][l] * res[l][col]).sum()
                        })
                        .collect();
                    hg.group.reduce(&composed) == hg.group.scale(index, &hg.group.gen(col))
                });
                ok &= good;
                if !good {
                    details.push(format!("{name} n={n}"));
                }
            }
        }
        if details.is_empty() {
            details.push("battery x n in {1,2}".into());
        }
        rep.push("cores . res = [G:H] id", ok, details.join(", "));
    }

    // Shapiro composites inverse on the battery
    {
        let mut ok = true;
        let cases: Vec<(FinGroup, Vec<usize>, i128)> = vec![
            (FinGroup::cyclic(2), vec![0], 2),
            (FinGroup::cyclic(4), vec![0, 2], 2),
            (FinGroup::cyclic(6), vec![0, 2, 4], 3),
        ];
        for (g, helems, modn) in cases {
            let h = SubgroupG::new(&g, helems).unwrap();
            let m = GModule::trivial(g.clone(), FinAb::cyclic(modn));
            for n in 1..=2usize {
                let r = shapiro_check(&m, &h, n, budget).unwrap();
                ok &= r.forward_then_back_is_identity && r.back_then_forward_is_identity;
            }
        }
        rep.push(
            "Shapiro composites are mutually inverse",
            ok,
            "battery x n in {1,2}".into(),
        );
    }

    // H^1 and H^2 of cyclic groups with matching trivial coefficients
    {
        let mut ok = true;
        for n in 2..=6usize {
            let g = FinGroup::cyclic(n);
            let m = GModule::trivial(g, FinAb::cyclic(n as i128));
            ok &= cohomology(&m, 1, budget).unwrap().group.factors() == [n as i128];
            ok &= cohomology(&m, 2, budget).unwrap().group.factors() == [n as i128];
        }
        rep.push(
            "H^1(Z/n, Z/n) = H^2(Z/n, Z/n) = Z/n",
            ok,
            "n = 2..6".into(),
        );
    }

    // cup: x u x generator; graded commutativity on 50 class pairs
    {
        let g = FinGroup::cyclic(2);
        let m = GModule::trivial(g.clone(), FinAb::cyclic(2));
        let tens = tensor(&m, &m);
        let h1 = cohomology(&m, 1, budget).unwrap();
        let h2t = cohomology(&tens.t, 2, budget).unwrap();
        let x = &h1.reps[0];
        let xx = cup(&m, &m, &tens, x, x);
        let gen_ok = !h2t.group.is_zero(&h2t.class_of(&xx));
        rep.push(
            "Z/2 polynomial generator: x u x != 0",
            gen_ok,
            "direct cochain computation".into(),
        );

        let mut pass = 0;
        let total = 50;
        let configs = [(2usize, 2i128), (3, 3), (4, 2), (4, 4)];
        for i in 0..total {
            let (gn, modn) = configs[i % configs.len()];
            let g = FinGroup::cyclic(gn);
            let m = GModule::trivial(g.clone(), FinAb::cyclic(modn));
            let tens = tensor(&m, &m);
            let swap = tens.swap_into(&tens);
            let h1 = cohomology(&m, 1, budget).unwrap();
            if h1.group.is_trivial() {
                pass += 1;
                continue;
            }
            let h2t = cohomology(&tens.t, 2, budget).unwrap();
            // random classes realized through the representatives
            let mk = |rng: &mut ChaCha8Rng| -> Cochain {
                let mut f = Cochain::zero(&m, 1);
                for (gi, repc) in h1.reps.iter().enumerate() {
                    let c: i128 = rng.gen_range(0..h1.group.factors()[gi]);
                    for (idx, v) in repc.values.iter().enumerate() {
                        f.values[idx] = m.m.add(&f.values[idx], &m.m.scale(c, v));
                    }
                }
                f
            };
            let f = mk(&mut rng);
            let h = mk(&mut rng);
            let fg = cup(&m, &m, &tens, &f, &h);
            let gf = cup(&m, &m, &tens, &h, &f);
            let mut gf_sw = Cochain::zero(&tens.t, 2);
            for (idx, v) in gf.values.iter().enumerate() {
                gf_sw.values[idx] = tens.t.m.reduce(&lattice::mat_vec(&swap, &v.0));
            }
            // a u b = (-1)^{1*1} b u a on classes
            let lhs = h2t.class_of(&fg);
            let rhs = h2t.group.scale(-1, &h2t.class_of(&gf_sw));
            if lhs == rhs {
                pass += 1;
            }
        }
        rep.push(
            "cup graded commutativity on classes",
            pass == total,
            format!("{pass}/{total} class pairs"),
        );
    }

    // induced sequences exact; X|_H free of rank index-1
    {
        let mut ok = true;
        let cases: Vec<(FinGroup, Vec<usize>)> = vec![
            (FinGroup::cyclic(2), vec![0]),
            (FinGroup::cyclic(6), vec![0, 2, 4]),
            (FinGroup::cyclic(6), vec![0, 3]),
        ];
        for (g, helems) in cases {
            let h = SubgroupG::new(&g, helems).unwrap();
            let m = GModule::trivial(g.clone(), FinAb::cyclic(g.n as i128));
            let ind = induced_module(&m, &h);
            let seqs = induced_sequences(&m, &h, &ind);
            ok &= seqs.first_exact && seqs.second_exact;
            ok &= seqs.x_restricted_trivial != Some(false);
        }
        rep.push(
            "induced-module sequences exact; X|_H free of rank [G:H]-1",
            ok,
            "augmentation and norm sequences".into(),
        );
    }

    // trace compatibility: delta_H = delta_G . cores, rechecked on classes
    {
        let g = FinGroup::cyclic(4);
        let eta = GModule::trivial(g.clone(), FinAb::cyclic(4));
        let theta = TraceTheory::new(eta.clone(), 2, vec![QZ::new(1, 4)], budget).unwrap();
        let h = SubgroupG::new(&g, vec![0, 2]).unwrap();
        let (hh, vals) = theta.delta_for_subgroup(&h, budget).unwrap();
        // recheck: for each H-class, delta_H(c) = delta_G(cores c) by definition;
        // independent recheck on doubled classes
        let mut ok = true;
        for (i, rep_c) in hh.reps.iter().enumerate() {
            let mut doubled = rep_c.clone();
            for v in doubled.values.iter_mut() {
                *v = hh.module.m.scale(2, v);
            }
            let transferred = cores_cochain(&theta.eta, &h, &doubled);
            let direct = theta.delta(&theta.top.class_of(&transferred));
            ok &= direct == vals[i].scale(2);
        }
        rep.push(
            "trace maps compatible with corestriction",
            ok,
            "delta_H = delta_G . cores on classes".into(),
        );
    }

    // four-lemma propagation through trace pairings (50 seeded instances)
    {
        let mut consistent = 0;
        let mut hypotheses_held = 0;
        let total = 50;
        for i in 0..total {
            let (ok, hyp) = devissage_ladder_instance(&mut rng, i, budget);
            if ok {
                consistent += 1;
            }
            if hyp {
                hypotheses_held += 1;
            }
        }
        rep.push(
            "four-lemma propagation matches direct analysis",
            consistent == total && hypotheses_held > 0,
            format!("{consistent}/{total} consistent, {hypotheses_held} with hypotheses held"),
        );
    }

    rep
}

/// One instance of the devissage mechanism: the induction short exact
/// sequence `0 -> M -> Z[G/H] (x) M -> X (x) M -> 0` of pairings, pushed
/// through the trace pairing into a four-lemma ladder. With `H` trivial the
/// middle terms are cohomologically trivial in positive degrees, so the
/// hypotheses genuinely hold and the lemma yields the quotient pairing's
/// nondegeneracy; conclusions must match direct analysis either way.
fn devissage_ladder_instance<R: Rng>(rng: &mut R, tag: usize, budget: i128) -> (bool, bool) {
    let m_ord: i128 = [2, 3, 4][tag % 3];
    let g = FinGroup::cyclic(m_ord as usize);
    let n = 2i32;
    let i: i32 = 1 + (tag as i32 / 3) % 2; // i in {1, 2}
    let eta = GModule::trivial(g.clone(), FinAb::cyclic(m_ord));
    let h = SubgroupG::new(&g, vec![0]).unwrap();

    let h_top = match cohomology(&eta, n as usize, budget) {
        Ok(h) => h,
        Err(_) => return (true, false),
    };
    if h_top.group.is_trivial() {
        return (true, false);
    }
    // a unit scale keeps delta an isomorphism onto (1/m)Z/Z
    let scale = loop {
        let s = 1 + rng.gen_range(0..m_ord);
        if gcd_i128(s, m_ord) == 1 {
            break s;
        }
    };
    let delta: Vec<QZ> = h_top
        .group
        .factors()
        .iter()
        .map(|&f| QZ::new(scale, f))
        .collect();
    let theta = match TraceTheory::new(eta.clone(), n as usize, delta, budget) {
        Ok(t) => t,
        Err(_) => return (true, false),
    };

    // M# : M x M -> eta multiplication; M_X# the induced pairing; Q# the
    // quotient-by-kernel pairing
    let m_mod = GModule::trivial(g.clone(), FinAb::cyclic(m_ord));
    let ind = induced_module(&m_mod, &h);
    let mx = ind.module.clone();
    let diag_hom = FinHom::new(m_mod.m.clone(), mx.m.clone(), ind.diag_in.clone()).unwrap();
    let sum_hom = FinHom::new(mx.m.clone(), m_mod.m.clone(), ind.sum_out.clone()).unwrap();

    // psi on M_X: orthonormal cosets, phi on the fibers
    let nc = h.reps.len();
    let rank = m_mod.m.rank();
    let psi_vals: Vec<Vec<El>> = (0..mx.m.rank())
        .map(|gi| {
            let xi = ind.lift_raw(&mx.m.gen(gi));
            (0..mx.m.rank())
                .map(|gj| {
                    let yj = ind.lift_raw(&mx.m.gen(gj));
                    let mut acc = 0i128;
                    for c in 0..nc {
                        for a in 0..rank {
                            for b in 0..rank {
                                // phi(e_a, e_b) = delta_ab in Z/m
                                if a == b {
                                    acc += xi[c * rank + a] * yj[c * rank + b];
                                }
                            }
                        }
                    }
                    eta.m.reduce(&[acc])
                })
                .collect()
        })
        .collect();
    let mk_pairing = |ma: &GModule, mb: &GModule, vals: Vec<Vec<El>>| -> GChainPairing {
        let mut comps = std::collections::BTreeMap::new();
        comps.insert((0, 0), vals);
        GChainPairing {
            m: GComplex::concentrated(0, ma.clone()),
            mv: GComplex::concentrated(0, mb.clone()),
            eta: eta.clone(),
            eta_deg: 0,
            comps,
        }
    };
    let m_pairing = mk_pairing(&m_mod, &m_mod, vec![vec![eta.m.gen(0)]]);
    let mx_pairing = mk_pairing(&mx, &mx, psi_vals);

    // Q = M_X / diag(M) with the transported action; Qv = ker(sum)
    let (q_group, qproj) = finab::quotient(&mx.m, &diag_hom.image());
    let q_action: Vec<lattice::Mat> = (0..g.n)
        .map(|ge| {
            let mut mat = lattice::zeros(q_group.rank(), q_group.rank());
            for l in 0..q_group.rank() {
                let lift = match qproj.preimage(&q_group.gen(l)) {
                    Some(x) => x,
                    None => return lattice::zeros(q_group.rank(), q_group.rank()),
                };
                let img = qproj.apply(&mx.act(ge, &lift));
                for r in 0..q_group.rank() {
                    mat[r][l] = img.0[r];
                }
            }
            mat
        })
        .collect();
    let q_mod = match GModule::new(g.clone(), q_group.clone(), q_action) {
        Ok(m) => m,
        Err(_) => return (false, false),
    };
    let ker_sum = sum_hom.kernel();
    let sqv = finab::sub_quotient(&mx.m, &ker_sum, &finab::Subgroup::trivial());
    let qv_group = sqv.group.clone();
    let qv_action: Vec<lattice::Mat> = (0..g.n)
        .map(|ge| {
            let mut mat = lattice::zeros(qv_group.rank(), qv_group.rank());
            for l in 0..qv_group.rank() {
                let amb = &sqv.gens_in_ambient[l];
                let img = sqv.class_of(&mx.act(ge, amb));
                for r in 0..qv_group.rank() {
                    mat[r][l] = img.0[r];
                }
            }
            mat
        })
        .collect();
    let qv_mod = match GModule::new(g.clone(), qv_group.clone(), qv_action) {
        Ok(m) => m,
        Err(_) => return (false, false),
    };
    // Q# : Q x Qv -> eta via lifts
    let q_vals: Vec<Vec<El>> = (0..q_group.rank())
        .map(|qi| {
            let lift = qproj.preimage(&q_group.gen(qi)).expect("onto");
            (0..qv_group.rank())
                .map(|vj| {
                    let amb = &sqv.gens_in_ambient[vj];
                    // evaluate psi on lifts
                    let mut acc = eta.m.zero();
                    for (a, &xc) in lift.0.iter().enumerate() {
                        if xc == 0 {
                            continue;
                        }
                        for (b, &yc) in amb.0.iter().enumerate() {
                            if yc == 0 {
                                continue;
                            }
                            acc = eta
                                .m
                                .add(&acc, &eta.m.scale(xc * yc, &mx_pairing.comps[&(0, 0)][a][b]));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let q_pairing = mk_pairing(&q_mod, &qv_mod, q_vals);

    let trace_at = |pairing: &GChainPairing, idx: i32| -> Option<FinPairing> {
        trace_pairing(&theta, pairing, idx, budget).ok()
    };
    // ladder rows: (M_X, i-1), (Q, i-1), (M, i), (M_X, i)
    let (p1, p2, p3, p4) = match (
        trace_at(&mx_pairing, i - 1),
        trace_at(&q_pairing, i - 1),
        trace_at(&m_pairing, i),
        trace_at(&mx_pairing, i),
    ) {
        (Some(a), Some(b), Some(c), Some(d)) => (a, b, c, d),
        _ => return (false, false),
    };

    // cohomology groups with representatives
    let hx_prev = cohomology(&mx, (i - 1) as usize, budget).ok();
    let hq_prev = cohomology(&q_mod, (i - 1) as usize, budget).ok();
    let hm_i = cohomology(&m_mod, i as usize, budget).ok();
    let hx_i = cohomology(&mx, i as usize, budget).ok();
    let (hx_prev, hq_prev, hm_i, hx_i) = match (hx_prev, hq_prev, hm_i, hx_i) {
        (Some(a), Some(b), Some(c), Some(d)) => (a, b, c, d),
        _ => return (false, false),
    };

    // class-level maps
    let map_with = |src: &gcoh::Cohomology,
                    dst: &gcoh::Cohomology,
                    dst_mod: &GModule,
                    f: &dyn Fn(&El) -> Option<El>|
     -> Option<FinHom> {
        let mut m = lattice::zeros(dst.group.rank(), src.group.rank());
        for (col, repc) in src.reps.iter().enumerate() {
            let mut mapped = Cochain::zero(dst_mod, repc.degree);
            for (idx, v) in repc.values.iter().enumerate() {
                mapped.values[idx] = f(v)?;
            }
            if !dst.is_cocycle(&mapped) {
                return None;
            }
            let cls = dst.class_of(&mapped);
            for r in 0..dst.group.rank() {
                m[r][col] = cls.0[r];
            }
        }
        FinHom::new(src.group.clone(), dst.group.clone(), m).ok()
    };

    // u1 : H^{i-1}(M_X) -> H^{i-1}(Q) induced by the projection
    let u1 = match map_with(&hx_prev, &hq_prev, &q_mod, &|v| Some(qproj.apply(v))) {
        Some(h) => h,
        None => return (false, false),
    };
    // u2 : H^{i-1}(Q) -> H^i(M): connecting map of 0 -> M -> M_X -> Q -> 0
    let u2 = {
        let mut m = lattice::zeros(hm_i.group.rank(), hq_prev.group.rank());
        for (col, repc) in hq_prev.reps.iter().enumerate() {
            let mut lifted = Cochain::zero(&mx, repc.degree);
            for (idx, v) in repc.values.iter().enumerate() {
                lifted.values[idx] = match qproj.preimage(v) {
                    Some(x) => x,
                    None => return (false, false),
                };
            }
            let d = gcoh::coboundary(&mx, &lifted);
            let mut pulled = Cochain::zero(&m_mod, d.degree);
            for (idx, v) in d.values.iter().enumerate() {
                pulled.values[idx] = match diag_hom.preimage(v) {
                    Some(x) => x,
                    None => return (false, false),
                };
            }
            if !hm_i.is_cocycle(&pulled) {
                return (false, false);
            }
            let cls = hm_i.class_of(&pulled);
            for r in 0..hm_i.group.rank() {
                m[r][col] = cls.0[r];
            }
        }
        match FinHom::new(hq_prev.group.clone(), hm_i.group.clone(), m) {
            Ok(h) => h,
            Err(_) => return (false, false),
        }
    };
    // u3 : H^i(M) -> H^i(M_X) induced by the diagonal
    let u3 = match map_with(&hm_i, &hx_i, &mx, &|v| Some(diag_hom.apply(v))) {
        Some(h) => h,
        None => return (false, false),
    };

    // B-column (upward): B1 = H^{n-i+1}(M_X), B2 = H^{n-i+1}(Qv),
    // B3 = H^{n-i}(M), B4 = H^{n-i}(M_X)
    let j = n - i;
    let hxv_j1 = cohomology(&mx, (j + 1) as usize, budget).ok();
    let hqv_j1 = cohomology(&qv_mod, (j + 1) as usize, budget).ok();
    let hmv_j = cohomology(&m_mod, j as usize, budget).ok();
    let hxv_j = cohomology(&mx, j as usize, budget).ok();
    let (hxv_j1, hqv_j1, hmv_j, hxv_j) = match (hxv_j1, hqv_j1, hmv_j, hxv_j) {
        (Some(a), Some(b), Some(c), Some(d)) => (a, b, c, d),
        _ => return (false, false),
    };
    // v1 : B2 -> B1 induced by the inclusion Qv -> M_X
    let incl_qv = |v: &El| -> Option<El> {
        let mut acc = mx.m.zero();
        for (l, &c) in v.0.iter().enumerate() {
            acc = mx.m.add(&acc, &mx.m.scale(c, &sqv.gens_in_ambient[l]));
        }
        Some(acc)
    };
    let v1 = match map_with(&hqv_j1, &hxv_j1, &mx, &incl_qv) {
        Some(h) => h,
        None => return (false, false),
    };
    // v2 : B3 -> B2: connecting of the dual SES 0 -> Qv -> M_X -> M -> 0
    let v2 = {
        let mut m = lattice::zeros(hqv_j1.group.rank(), hmv_j.group.rank());
        for (col, repc) in hmv_j.reps.iter().enumerate() {
            let mut lifted = Cochain::zero(&mx, repc.degree);
            for (idx, v) in repc.values.iter().enumerate() {
                lifted.values[idx] = match sum_hom.preimage(v) {
                    Some(x) => x,
                    None => return (false, false),
                };
            }
            let d = gcoh::coboundary(&mx, &lifted);
            let mut pulled = Cochain::zero(&qv_mod, d.degree);
            for (idx, v) in d.values.iter().enumerate() {
                // value lies in ker(sum): express in Qv coordinates
                if !m_mod.m.is_zero(&sum_hom.apply(v)) {
                    return (false, false);
                }
                pulled.values[idx] = sqv.class_of(v);
            }
            if !hqv_j1.is_cocycle(&pulled) {
                return (false, false);
            }
            let cls = hqv_j1.class_of(&pulled);
            for r in 0..hqv_j1.group.rank() {
                m[r][col] = cls.0[r];
            }
        }
        match FinHom::new(hmv_j.group.clone(), hqv_j1.group.clone(), m) {
            Ok(h) => h,
            Err(_) => return (false, false),
        }
    };
    // v3 : B4 -> B3 induced by the norm map
    let v3 = match map_with(&hxv_j, &hmv_j, &m_mod, &|v| Some(sum_hom.apply(v))) {
        Some(h) => h,
        None => return (false, false),
    };

    let pairings = [p1, p2, p3, p4];
    let down = [u1, u2, u3];
    let up = [v1, v2, v3];
    // auto-detect the per-square signs (the four lemma only needs sign-commutativity)
    let mut signs = [1i128; 3];
    for sidx in 0..3 {
        let mut plus_ok = true;
        let mut minus_ok = true;
        let pa = &pairings[sidx];
        let pb = &pairings[sidx + 1];
        for gi in 0..pa.a.rank() {
            for hj in 0..pb.b.rank() {
                let ga = pa.a.gen(gi);
                let hb = pb.b.gen(hj);
                let lhs = pa.eval(&ga, &up[sidx].apply(&hb));
                let rhs = pb.eval(&down[sidx].apply(&ga), &hb);
                if lhs != rhs {
                    plus_ok = false;
                }
                if lhs != rhs.neg() {
                    minus_ok = false;
                }
            }
        }
        if plus_ok {
            signs[sidx] = 1;
        } else if minus_ok {
            signs[sidx] = -1;
        } else {
            return (false, false);
        }
    }

    let ladder = Ladder {
        pairings,
        down,
        up,
        signs,
    };
    match four_lemma_check_right(&ladder) {
        Ok(repo) => {
            let consistent = repo.brute_force_agrees != Some(false)
                && (!repo.hypotheses_hold || repo.conclusion);
            (consistent, repo.hypotheses_hold)
        }
        Err(_) => (false, false),
    }
}
