use std::sync::Arc;

use proptest::prelude::*;

use crosm::contact::{build_structure, contact_check, contact_invariants, kcontact_check};
use crosm::families::{cpn_family, sphere_contact_family, CpnFamilyParams, FamilyType, SphereFamilyParams};
use crosm::geometry::{
    curvature, curvature_symmetries, d_eta_bracket, d_eta_nabla, levi_civita, metric_from_blocks, ricci, BlockParams,
};
use crosm::models::{build_model, RankOneModel, SpaceKind};
use crosm::scalar::{canonical, parse_rational, Scalar, Q};

fn model<S: Scalar>(kind: SpaceKind) -> Arc<RankOneModel<S>> {
    Arc::new(build_model::<S>(kind).unwrap())
}

fn pos() -> impl Strategy<Value = (i64, i64)> {
    (1i64..=12, 1i64..=6)
}

fn q((a, b): (i64, i64)) -> Q {
    Q::ratio(a, b)
}

fn blocks<S: Scalar>(v: [(i64, i64); 5]) -> BlockParams<S> {
    let r = |(a, b): (i64, i64)| S::ratio(a, b);
    BlockParams::diagonal(r(v[0]), r(v[1]), r(v[2]), r(v[3]), r(v[4]))
}

fn cfg() -> ProptestConfig {
    ProptestConfig::with_cases(24)
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn curvature_has_algebraic_symmetries(v in prop::array::uniform5(pos()), cpn in any::<bool>()) {
        let kind = if cpn { SpaceKind::ComplexProjective(2) } else { SpaceKind::Sphere(3) };
        let m = model::<Q>(kind);
        let g = metric_from_blocks(&m, &blocks(v)).unwrap();
        let conn = levi_civita(&g);
        let curv = curvature(&g, &conn);
        let r = curvature_symmetries(&curv, &m.labels, 0.0);
        prop_assert!(r.passed(), "{:?}", r.witness);
    }

    #[test]
    fn exterior_derivative_agrees_both_ways(
        v in prop::array::uniform5(pos()),
        c in prop::array::uniform3(-6i64..=6),
    ) {
        let m = model::<Q>(SpaceKind::ComplexProjective(2));
        let g = metric_from_blocks(&m, &blocks(v)).unwrap();
        let conn = levi_civita(&g);
        let mut xi = vec![Q::from_i64(0); m.dim()];
        xi[m.blocks.a.start] = Q::from_i64(c[0]);
        xi[m.blocks.m_eps.start] = Q::from_i64(c[1]);
        xi[m.blocks.k_eps.start] = Q::from_i64(c[2]);
        let eta = g.lower(&xi);
        prop_assert_eq!(d_eta_bracket(&g, &eta), d_eta_nabla(&conn, &eta));
    }

    #[test]
    fn first_families_are_contact(
        k in pos(), qe in pos(), qh in pos(), alpha in (-4i64..=4, 1i64..=3), which in 0usize..3,
    ) {
        let fam = [FamilyType::AI, FamilyType::AII, FamilyType::AIII][which];
        let m = model::<Q>(SpaceKind::ComplexProjective(2));
        let p = CpnFamilyParams::new(fam, q(k), q(qe), q(qh), Q::ratio(alpha.0, alpha.1));
        for inst in cpn_family(&m, &p).unwrap() {
            let s = build_structure(&inst.metric, &inst.xi).unwrap();
            let c = contact_check(&s);
            prop_assert!(c.passed(), "{} {:?}", inst.label, c.witness);
            prop_assert!(contact_invariants(&s).passed());
        }
    }

    #[test]
    fn sphere_family_kcontact_iff_unit_q(k in pos(), qe in pos()) {
        let m = model::<Q>(SpaceKind::Sphere(3));
        let p = SphereFamilyParams::new(q(k), q(qe));
        let inst = sphere_contact_family(&m, &p).unwrap();
        let s = build_structure(&inst.metric, &inst.xi).unwrap();
        prop_assert!(contact_check(&s).passed());
        let kc = kcontact_check(&s).unwrap().passed();
        prop_assert_eq!(kc, q(qe) == Q::from_i64(1));
    }

    #[test]
    fn float_ricci_tracks_exact(v in prop::array::uniform5(pos())) {
        let kind = SpaceKind::ComplexProjective(2);
        let (me, mf) = (model::<Q>(kind), model::<f64>(kind));
        let ge = metric_from_blocks(&me, &blocks::<Q>(v)).unwrap();
        let gf = metric_from_blocks(&mf, &blocks::<f64>(v)).unwrap();
        let re = ricci(&ge, &curvature(&ge, &levi_civita(&ge)));
        let rf = ricci(&gf, &curvature(&gf, &levi_civita(&gf)));
        let scale = 1.0 + re.scalar.to_f64().abs();
        prop_assert!((re.scalar.to_f64() - rf.scalar).abs() < 1e-9 * scale);
        for i in 0..me.dim() {
            for j in 0..me.dim() {
                prop_assert!((re.ric[(i, j)].to_f64() - rf.ric[(i, j)]).abs() < 1e-9 * scale);
            }
        }
    }

    #[test]
    fn canonical_rationals_round_trip(a in -500i64..500, b in 1i64..200) {
        let x = Q::ratio(a, b);
        let s = canonical(&x);
        prop_assert_eq!(parse_rational(&s).unwrap(), x);
        prop_assert_eq!(s.contains('/'), b / num::integer::gcd(a, b) != 1);
    }
}
