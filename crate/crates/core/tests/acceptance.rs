//! Acceptance criteria, one line each. Exits non-zero if any criterion fails.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crosm::classical::{so_algebra, su_algebra};
use crosm::config::{Overrides, RunConfig};
use crosm::contact::{
    build_structure, contact_check, einstein_check, normalized_structure, ricci_of, sasakian_einstein_check,
    three_sasakian_check,
};
use crosm::families::{
    ai_to_aii_map, catalog_grid, cpn_family, cpn_family_auto, cpn_grid, einstein_random_rejection,
    einstein_solve_sphere, einstein_with_mu_eps, g_kappa, model_isomorphism_check, sasaki_induced_metric,
    scaled_sasaki_metric, sphere_contact_family, sphere_grid, swap_candidates_report, kcontact_catalog,
    catalog_instance, three_sasakian_metric, unit_x_field, CpnFamilyParams, FamilyType, InfinitesimalModel,
    ModelPair, SphereFamilyParams,
};
use crosm::geometry::{
    constant_curvature_check, curvature, levi_civita, metric_from_blocks, sphere_closed_form_check,
    xi_sectional_check, xi_sectional_constant, BlockParams,
};
use crosm::models::{build_model, RankOneModel, SpaceKind};
use crosm::scalar::{canonical, Scalar, Q};
use crosm::suite::{self, structure_checks, structure_checks_any};
use crosm::tables::bracket_table_reports;

// Time budgets.
const ALGEBRA_BUDGET: Duration = Duration::from_secs(5);
const CLOSED_FORM_BUDGET: Duration = Duration::from_secs(30);
const SUITE_BUDGET: Duration = Duration::from_secs(180);
// Random metrics per sphere model for the closed-form comparison.
const CLOSED_FORM_SAMPLES: usize = 100;
// Perturbed metrics the Einstein solver must reject.
const EINSTEIN_REJECTIONS: usize = 200;

type Outcome = Result<String, String>;

fn exact(kind: SpaceKind) -> Arc<RankOneModel<Q>> {
    Arc::new(build_model::<Q>(kind).expect("model"))
}

fn r(n: i64, d: i64) -> Q {
    Q::ratio(n, d)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

const SPHERES: [SpaceKind; 5] = [
    SpaceKind::Sphere(2),
    SpaceKind::Sphere(3),
    SpaceKind::Sphere(4),
    SpaceKind::Sphere(5),
    SpaceKind::RealProjective(3),
];
const CPNS: [SpaceKind; 3] = [
    SpaceKind::ComplexProjective(1),
    SpaceKind::ComplexProjective(2),
    SpaceKind::ComplexProjective(3),
];

fn algebra_validity() -> Outcome {
    let start = Instant::now();
    let mut count = 0;
    for n in 2..=6 {
        let a = so_algebra::<Q>(n);
        ensure(a.jacobi_check().passed() && a.invariance_check().passed(), || a.name.clone())?;
        count += 1;
    }
    for n in 1..=4 {
        let a = su_algebra::<Q>(n);
        ensure(a.jacobi_check().passed() && a.invariance_check().passed(), || a.name.clone())?;
        count += 1;
    }
    let t = start.elapsed();
    ensure(t < ALGEBRA_BUDGET, || format!("took {t:?}"))?;
    Ok(format!("{count} algebras, {:.2}s", t.as_secs_f64()))
}

fn multiplicities() -> Outcome {
    for n in 2..=6 {
        let s = exact(SpaceKind::Sphere(n)).summary();
        ensure(s.multiplicities == [n - 1, 0], || format!("S^{n}: {:?}", s.multiplicities))?;
    }
    for n in 1..=4 {
        let s = exact(SpaceKind::ComplexProjective(n)).summary();
        ensure(s.multiplicities == [1, 2 * n - 2], || format!("CP^{n}: {:?}", s.multiplicities))?;
    }
    Ok("S^2..S^6 and CP^1..CP^4".into())
}

fn bracket_tables() -> Outcome {
    let mut identities = 0;
    for kind in SPHERES.iter().chain(&CPNS).chain(&[SpaceKind::ComplexProjective(4)]) {
        let m = exact(*kind);
        for rep in bracket_table_reports(&m) {
            ensure(rep.passed(), || format!("{} {}: {:?}", kind.short_name(), rep.name, rep.witness))?;
            identities += 1;
        }
    }
    Ok(format!("{identities} table checks"))
}

fn closed_forms() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for kind in SPHERES {
        let m = exact(kind);
        for _ in 0..CLOSED_FORM_SAMPLES {
            let mut x = || Q::ratio(rng.gen_range(1..=30), rng.gen_range(1..=9));
            let p = BlockParams::sphere(x(), x(), x());
            let g = metric_from_blocks(&m, &p).map_err(err)?;
            let (curv, ric) = ricci_of(&g);
            let rep = sphere_closed_form_check(&g, &curv, &ric).map_err(err)?;
            ensure(rep.passed() && rep.residual.to_f64() == 0.0, || {
                format!("{} {:?}: {:?}", kind.short_name(), p.describe(), rep.witness)
            })?;
        }
    }
    let t = start.elapsed();
    ensure(t < CLOSED_FORM_BUDGET, || format!("took {t:?}"))?;
    Ok(format!(
        "{} metrics on {} models, residual 0, {:.2}s",
        CLOSED_FORM_SAMPLES * SPHERES.len(),
        SPHERES.len(),
        t.as_secs_f64()
    ))
}

fn sphere_family() -> Outcome {
    let grid = sphere_grid();
    ensure(grid.len() >= 20, || format!("grid has {} points", grid.len()))?;
    for kind in SPHERES {
        let m = exact(kind);
        for p in &grid {
            let inst = sphere_contact_family(&m, p).map_err(err)?;
            let sc = structure_checks(&inst).map_err(err)?;
            let on = p.q_eps == Q::from_i64(1);
            ensure(sc.contact.passed(), || format!("{} {} not contact", kind.short_name(), inst.label))?;
            ensure(sc.kcontact.passed() == on && sc.sasakian.passed() == on, || {
                format!("{} {}: kcontact {:?} sasakian {:?}", kind.short_name(), inst.label, sc.kcontact.verdict, sc.sasakian.verdict)
            })?;
        }
    }
    Ok(format!("{} points on {} models", grid.len(), SPHERES.len()))
}

fn cpn_families() -> Outcome {
    let mut instances = 0;
    let mut non_orthogonal = 0;
    let mut rows = 0;
    for kind in CPNS {
        let models = ModelPair::new(kind).map_err(err)?;
        for f in FamilyType::ALL {
            for p in cpn_grid(f) {
                for inst in cpn_family_auto(&models, &p, false).map_err(err)? {
                    let sc = structure_checks_any(&inst).map_err(err)?;
                    ensure(sc.contact.passed(), || format!("{} {} not contact", kind.short_name(), inst.label()))?;
                    instances += 1;
                    if p.alpha != Q::from_i64(0) {
                        non_orthogonal += 1;
                    }
                }
            }
        }
        for cp in catalog_grid() {
            for row in kcontact_catalog(&models.exact, &cp).map_err(err)? {
                let inst = catalog_instance(&models.exact, &row, &cp.describe()).map_err(err)?;
                let sc = structure_checks(&inst).map_err(err)?;
                ensure(sc.contact.passed(), || format!("{} row {} not contact", kind.short_name(), row.family))?;
                ensure(sc.kcontact.passed() == row.kcontact_expected, || {
                    format!("{} row {} at {}: predicted {}", kind.short_name(), row.family, cp.describe(), row.kcontact_expected)
                })?;
                let half = cp.kappa == r(1, 2);
                let rule = match row.family {
                    FamilyType::BII | FamilyType::BIII => Some(half),
                    FamilyType::C => Some(true),
                    _ => None,
                };
                if let Some(want) = rule {
                    ensure(sc.kcontact.passed() == want, || format!("{} row {}", kind.short_name(), row.family))?;
                }
                rows += 1;
            }
        }
    }
    ensure(non_orthogonal > 0, || "no alpha != 0 instances".into())?;
    Ok(format!("{instances} family instances ({non_orthogonal} with alpha != 0), {rows} catalogue rows"))
}

fn three_sasakian() -> Outcome {
    for kind in CPNS {
        let m = exact(kind);
        let (g, xi) = three_sasakian_metric(&m).map_err(err)?;
        let rep = three_sasakian_check(&g, [&xi[0], &xi[1], &xi[2]]).map_err(err)?;
        ensure(rep.passed(), || format!("{}: {:?}", kind.short_name(), rep.witness))?;
    }
    Ok("CP^1, CP^2, CP^3 exact".into())
}

fn sasakian_einstein_cpn() -> Outcome {
    for kind in CPNS {
        let n = kind.n() as i64;
        let m = exact(kind);
        let (g, _) = three_sasakian_metric(&m).map_err(err)?;
        let (rep, lambda) = einstein_check(&g);
        ensure(rep.passed() && lambda == Some(Q::from_i64(2 * (2 * n - 1))), || {
            format!("CP^{n}: lambda {:?}", lambda.map(|l| canonical(&l)))
        })?;
        for k in [r(1, 3), r(1, 1), r(3, 2)] {
            for i in [1, 3] {
                let inst = g_kappa(&m, i, &k).map_err(err)?;
                let (e, mu) = einstein_with_mu_eps(&inst.metric);
                ensure(!e.passed(), || format!("CP^{n} g{i} kappa={} is Einstein", canonical(&k)))?;
                ensure(mu == Q::from_i64(n) - k.clone(), || format!("CP^{n} g{i}: Ric(mu,mu) = {}", canonical(&mu)))?;
            }
        }
    }
    Ok("lambda = 2(2n-1); Ric(mu_eps,mu_eps) = n - kappa off 1/2".into())
}

fn sphere_einstein() -> Outcome {
    for n in 2..=5usize {
        let m = exact(SpaceKind::Sphere(n));
        let ni = n as i64;
        for a0 in [r(1, 1), r(2, 3), r(5, 2)] {
            let g = einstein_solve_sphere(&m, &a0).map_err(err)?;
            let p = g.params.clone().unwrap();
            let want = r(ni, 2 * (ni - 1)) * a0.clone();
            ensure(p.a_eps == want && p.b_eps == want, || format!("S^{n} a0={}", canonical(&a0)))?;
            ensure(einstein_check(&g).0.passed(), || format!("S^{n} solution not Einstein"))?;
        }
        let k = r(ni - 1, ni);
        let inst = sphere_contact_family(&m, &SphereFamilyParams::new(k.clone(), Q::from_i64(1))).map_err(err)?;
        let s = build_structure(&inst.metric, &inst.xi).map_err(err)?;
        ensure(contact_check(&s).passed(), || format!("S^{n} contact-Einstein not contact"))?;
        let se = sasakian_einstein_check(&s).map_err(err)?;
        let (_, lambda) = einstein_check(&inst.metric);
        ensure(se.passed() && lambda == Some(Q::from_i64(2 * (ni - 1))), || {
            format!("S^{n}: {:?} lambda {:?}", se.witness, lambda.map(|l| canonical(&l)))
        })?;
        let rej = einstein_random_rejection(&m, EINSTEIN_REJECTIONS, 99 + n as u64).map_err(err)?;
        ensure(rej.passed(), || format!("S^{n}: {:?}", rej.witness))?;
    }
    Ok(format!("S^2..S^5, {EINSTEIN_REJECTIONS} perturbations rejected per model"))
}

fn sasaki_metrics() -> Outcome {
    let radii = [r(1, 4), r(1, 2), r(1, 1), r(2, 1)];
    let mut cp1_note = String::new();
    for kind in SPHERES.iter().chain(&CPNS) {
        let m = exact(*kind);
        for rad in &radii {
            let g = sasaki_induced_metric(&m, rad).map_err(err)?;
            let s = build_structure(&g, &unit_x_field(&g).map_err(err)?).map_err(err)?;
            let want = *rad == r(1, 2);
            ensure(contact_check(&s).passed() == want, || format!("{} r={}", kind.short_name(), canonical(rad)))?;
            let g = scaled_sasaki_metric(&m, rad).map_err(err)?;
            let inst_xi = unit_x_field(&g).map_err(err)?;
            let sc = structure_checks(&crosm::families::FamilyInstance {
                label: String::new(),
                params: g.params.clone().unwrap(),
                metric: g,
                xi: inst_xi,
                caveats: vec![],
            })
            .map_err(err)?;
            ensure(sc.contact.passed(), || format!("{} scaled r={} not contact", kind.short_name(), canonical(rad)))?;
            let kc = sc.kcontact.passed();
            let want = if kind.is_cpn() {
                if kind.n() == 1 && kc && *rad == Q::from_i64(1) {
                    // CP^1 has no half blocks, so it behaves like S^2.
                    cp1_note = "; CP^1 = S^2 is K-contact at r = 1".into();
                    true
                } else {
                    false
                }
            } else {
                *rad == Q::from_i64(1)
            };
            ensure(kc == want, || format!("{} scaled r={} kcontact {kc}", kind.short_name(), canonical(rad)))?;
        }
    }
    Ok(format!("contact iff r = 1/2; scaled K-contact only at r = 1 off CP^n (n >= 2){cp1_note}"))
}

fn xi_sectional_and_constant_curvature() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut branches = 0;
    for kind in SPHERES {
        let m = exact(kind);
        for _ in 0..10 {
            let mut x = || Q::ratio(rng.gen_range(1..=20), rng.gen_range(1..=6));
            let (a0, ae, be) = (x(), x(), x());
            for p in [BlockParams::sphere(a0.clone(), ae.clone(), ae.clone()), BlockParams::sphere(ae.clone() + be.clone(), ae.clone(), be.clone())] {
                let c = xi_sectional_constant(&p).ok_or("no branch constant")?;
                let want = if p.a_eps == p.b_eps && p.a0 != p.a_eps.clone() + p.b_eps.clone() {
                    p.a0.clone() / (Q::from_i64(4) * p.a_eps.clone() * p.a_eps.clone())
                } else {
                    Q::from_i64(1) / (p.a_eps.clone() + p.b_eps.clone())
                };
                ensure(c == want, || format!("{:?}: constant {}", p.describe(), canonical(&c)))?;
                let g = metric_from_blocks(&m, &p).map_err(err)?;
                let curv = curvature(&g, &levi_civita(&g));
                let rep = xi_sectional_check(&g, &curv, &c);
                ensure(rep.passed(), || format!("{:?}: {:?}", p.describe(), rep.witness))?;
                branches += 1;
            }
        }
    }
    for n in 2..=5 {
        let m = exact(SpaceKind::Sphere(n));
        for (p, proportional) in [
            (BlockParams::sphere(r(3, 1), r(3, 1), r(3, 1)), true),
            (BlockParams::sphere(r(1, 2), r(1, 2), r(1, 2)), true),
            (BlockParams::sphere(r(1, 1), r(2, 1), r(3, 1)), false),
        ] {
            let g = metric_from_blocks(&m, &p).map_err(err)?;
            let curv = curvature(&g, &levi_civita(&g));
            let (rep, c) = constant_curvature_check(&g, &curv);
            let want = n == 2 && proportional;
            ensure(rep.passed() == want, || format!("S^{n} {:?}", p.describe()))?;
            if want {
                ensure(c == Some(Q::from_i64(1) / (Q::from_i64(4) * p.a0.clone())), || "c != 1/(4 alpha)".into())?;
            }
        }
    }
    Ok(format!("{branches} branch metrics exact; constant curvature only on S^2 proportional"))
}

fn cone_equivalence() -> Outcome {
    let mut count = 0;
    for kind in SPHERES {
        let m = exact(kind);
        for p in sphere_grid() {
            let sc = structure_checks(&sphere_contact_family(&m, &p).map_err(err)?).map_err(err)?;
            ensure(sc.cone.passed() == sc.contact.passed(), || format!("{} grid point", kind.short_name()))?;
            count += 1;
        }
    }
    for kind in CPNS {
        let models = ModelPair::new(kind).map_err(err)?;
        for f in FamilyType::ALL {
            for p in cpn_grid(f) {
                for inst in cpn_family_auto(&models, &p, false).map_err(err)? {
                    let sc = structure_checks_any(&inst).map_err(err)?;
                    ensure(sc.cone.passed() == sc.contact.passed(), || inst.label().to_string())?;
                    count += 1;
                }
            }
        }
    }
    // Non-contact witness: unit X on the metric (1, 1, 1), with d eta
    // rescaled to an almost contact phi so that only Phi = d eta can fail.
    let m = exact(SpaceKind::Sphere(3));
    let g = metric_from_blocks(&m, &BlockParams::sphere(r(1, 1), r(1, 1), r(1, 1))).map_err(err)?;
    let xi = unit_x_field(&g).map_err(err)?;
    ensure(!contact_check(&build_structure(&g, &xi).map_err(err)?).passed(), || "witness is contact".into())?;
    let (s, c) = normalized_structure(&g, &xi).map_err(err)?;
    let (gap, at) = s.big_phi.sub(&s.d_eta).max_abs();
    ensure(gap != Q::from_i64(0), || "Phi - d eta vanishes".into())?;
    let cone = crosm::contact::cone_check(&s);
    ensure(!cone.passed(), || "witness cone is almost Kaehler".into())?;
    let (i, j) = at.unwrap();
    Ok(format!(
        "{count} grid structures agree; witness c = {}, |Phi - d eta| = {} at ({}, {})",
        canonical(&c),
        canonical(&gap),
        m.labels[i],
        m.labels[j]
    ))
}

fn isomorphisms() -> Outcome {
    let mut points = Vec::new();
    for p in cpn_grid(FamilyType::AI) {
        let key = (p.kappa.clone(), p.q_eps.clone(), p.q_half.clone());
        if !points.contains(&key) {
            points.push(key);
        }
    }
    let mut checked = 0;
    let mut swaps = 0;
    for kind in CPNS {
        let m = exact(kind);
        let l = ai_to_aii_map(&m).map_err(err)?;
        for (k, q, qh) in &points {
            let mk = |f| -> Result<InfinitesimalModel<Q>, String> {
                let p = CpnFamilyParams::new(f, k.clone(), q.clone(), qh.clone(), Q::from_i64(0));
                let i = cpn_family(&m, &p).map_err(err)?.remove(0);
                InfinitesimalModel::new(&i.metric, &i.xi).map_err(err)
            };
            let rep = model_isomorphism_check(&l, &mk(FamilyType::AI)?, &mk(FamilyType::AII)?).map_err(err)?;
            ensure(rep.passed(), || format!("{} kappa={}: {:?}", kind.short_name(), canonical(k), rep.witness))?;
            checked += 1;
        }
        if kind.n() >= 2 {
            for k in [r(1, 1), r(1, 3)] {
                let rep = swap_candidates_report(&m, &k).map_err(err)?;
                ensure(rep.passed(), || format!("{}: {:?}", kind.short_name(), rep.witness))?;
                swaps += 1;
            }
        }
    }
    Ok(format!("L passes at {checked} grid points; swap candidates fail in {swaps} runs"))
}

fn determinism() -> Outcome {
    let start = Instant::now();
    let mut spaces = Vec::new();
    for n in 2..=6 {
        spaces.push(("sphere", n));
    }
    spaces.push(("rpn", 3));
    for n in 1..=3 {
        spaces.push(("cpn", n));
    }
    let render = |space: &str, n: usize| -> Result<String, String> {
        let flags = Overrides {
            task: Some("full-suite".into()),
            space: Some(space.into()),
            n: Some(n),
            ..Default::default()
        };
        let cfg = RunConfig::build(None, &flags, None).map_err(err)?;
        let rep = suite::run(&cfg).map_err(err)?;
        ensure(rep.passed, || format!("full-suite {space} {n} failed"))?;
        rep.render(cfg.format).map_err(err)
    };
    let mut first = Vec::new();
    for (s, n) in &spaces {
        first.push(render(s, *n)?);
    }
    let t = start.elapsed();
    for ((s, n), a) in spaces.iter().zip(&first) {
        ensure(render(s, *n)? == *a, || format!("{s} {n}: reports differ"))?;
    }
    ensure(t < SUITE_BUDGET, || format!("full suites took {t:?}"))?;
    Ok(format!("{} full-suite reports byte-identical, one pass {:.2}s", spaces.len(), t.as_secs_f64()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 14] = [
        ("algebra validity", algebra_validity),
        ("root multiplicities", multiplicities),
        ("bracket tables", bracket_tables),
        ("closed forms vs brute force", closed_forms),
        ("sphere contact family", sphere_family),
        ("CP^n families and catalogue", cpn_families),
        ("3-Sasakian triple", three_sasakian),
        ("Sasakian-Einstein constant on CP^n", sasakian_einstein_cpn),
        ("sphere Einstein metrics", sphere_einstein),
        ("Sasaki metrics", sasaki_metrics),
        ("xi-sectional and constant curvature", xi_sectional_and_constant_curvature),
        ("cone equivalence", cone_equivalence),
        ("model isomorphisms", isomorphisms),
        ("determinism and runtime", determinism),
    ];
    let mut failed = 0;
    for (i, (title, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = f();
        let t = start.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("criterion {:>2} PASS {title}: {detail} [{t:.2}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL {title}: {why} [{t:.2}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
