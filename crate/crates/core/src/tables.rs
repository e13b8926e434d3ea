//! Bracket-table verification for the rank-one models.

use crate::classical::{su_element, SuGen};
use crate::lie::Subspace;
use crate::linalg::{vadd, vscale, vsub};
use crate::models::{BlockName, RankOneModel, SpaceKind};
use crate::report::{CheckReport, Tracker};
use crate::scalar::Scalar;

/// Runs every bracket identity and block inclusion for the model.
pub fn verify_bracket_tables<S: Scalar>(model: &RankOneModel<S>) -> CheckReport {
    let parts = bracket_table_reports(model);
    CheckReport::all("bracket_tables", S::MODE, &parts).with_caveats(&model.caveats)
}

pub fn bracket_table_reports<S: Scalar>(model: &RankOneModel<S>) -> Vec<CheckReport> {
    let mut out = vec![
        basis_orthonormality(model),
        pairing(model),
        model_table(model),
        pairing_identities(model),
        block_inclusions(model),
    ];
    if model.kind.is_cpn() {
        out.push(h_action_table(model));
    }
    out.push(h_spanned_by_brackets(model));
    out
}

fn zero<S: Scalar>(n: usize) -> Vec<S> {
    vec![S::zero(); n]
}

fn track_vec<S: Scalar>(t: &mut Tracker<S>, got: &[S], want: &[S], witness: impl Fn() -> Vec<String>) {
    for (g, w) in got.iter().zip(want) {
        let diff = g.clone() - w.clone();
        t.track(&diff, &witness);
    }
}

fn basis_orthonormality<S: Scalar>(m: &RankOneModel<S>) -> CheckReport {
    let mut t = Tracker::<S>::new("mbar_orthonormal");
    let d = m.dim();
    for i in 0..d {
        for j in i..d {
            let mut v = m.algebra.inner(&m.basis[i], &m.basis[j]);
            if i == j {
                v = v - S::one();
            }
            t.track(&v, || vec![m.labels[i].clone(), m.labels[j].clone()]);
        }
        for w in &m.h.basis {
            let v = m.algebra.inner(&m.basis[i], w);
            t.track(&v, || vec![m.labels[i].clone(), "h".into()]);
        }
    }
    let checks = [
        (m.a.dim(), m.blocks.a.len(), "a"),
        (m.m_eps.dim(), m.blocks.m_eps.len(), "m_eps"),
        (m.k_eps.dim(), m.blocks.k_eps.len(), "k_eps"),
        (m.m_half.dim(), m.blocks.m_half.len(), "m_half"),
        (m.k_half.dim(), m.blocks.k_half.len(), "k_half"),
    ];
    for (got, want, name) in checks {
        if got != want {
            t.flag(vec![format!("dim {name}: {got} != {want}")]);
        }
    }
    // Canonical vectors lie in the computed eigenspaces.
    let inside = |s: &Subspace<S>, r: std::ops::Range<usize>| r.into_iter().all(|i| s.contains(&m.basis[i]));
    if !(inside(&m.a, m.blocks.a.clone())
        && inside(&m.m_eps, m.blocks.m_eps.clone())
        && inside(&m.k_eps, m.blocks.k_eps.clone())
        && inside(&m.m_half, m.blocks.m_half.clone())
        && inside(&m.k_half, m.blocks.k_half.clone()))
    {
        t.flag(vec!["canonical basis outside its eigenspace".into()]);
    }
    t.finish()
}

/// `[X, mu] = -lambda nu` and `[X, nu] = lambda mu` with lambda = 1 or 1/2.
fn pairing<S: Scalar>(m: &RankOneModel<S>) -> CheckReport {
    let mut t = Tracker::<S>::new("root_pairing");
    let pairs = [
        (m.blocks.m_eps.clone(), m.blocks.k_eps.clone(), S::one()),
        (m.blocks.m_half.clone(), m.blocks.k_half.clone(), S::half()),
    ];
    for (mr, kr, lam) in pairs {
        for (i, j) in mr.zip(kr) {
            let got = m.algebra.br(&m.x, &m.basis[i]);
            let want = vscale(&-lam.clone(), &m.basis[j]);
            track_vec(&mut t, &got, &want, || vec!["X".into(), m.labels[i].clone()]);
            let got = m.algebra.br(&m.x, &m.basis[j]);
            let want = vscale(&lam, &m.basis[i]);
            track_vec(&mut t, &got, &want, || vec!["X".into(), m.labels[j].clone()]);
        }
    }
    t.finish()
}

struct Expected<S> {
    d: usize,
    dg: usize,
    table: Vec<Option<Vec<S>>>,
}

impl<S: Scalar> Expected<S> {
    fn new(d: usize, dg: usize) -> Self {
        Expected {
            d,
            dg,
            table: vec![None; d * d],
        }
    }

    fn set(&mut self, i: usize, j: usize, v: Vec<S>) {
        self.table[j * self.d + i] = Some(vscale(&-S::one(), &v));
        self.table[i * self.d + j] = Some(v);
    }

    fn get(&self, i: usize, j: usize) -> Vec<S> {
        self.table[i * self.d + j].clone().unwrap_or_else(|| zero(self.dg))
    }
}

/// Full brackets of the canonical mbar basis against the explicit table.
fn model_table<S: Scalar>(m: &RankOneModel<S>) -> CheckReport {
    let d = m.dim();
    let dg = m.algebra.dim();
    let mut ex = Expected::<S>::new(d, dg);
    let e = |i: usize| m.basis[i].clone();
    let sc = |c: S, v: Vec<S>| vscale(&c, &v);
    match m.kind {
        SpaceKind::Sphere(n) | SpaceKind::RealProjective(n) => {
            for j in 1..n {
                let (mj, nj) = (m.mu_eps_index(j), m.nu_eps_index(j));
                ex.set(0, mj, sc(-S::one(), e(nj)));
                ex.set(0, nj, e(mj));
                for k in 1..n {
                    let (mk, nk) = (m.mu_eps_index(k), m.nu_eps_index(k));
                    if j == k {
                        ex.set(mj, nk, sc(-S::one(), e(0)));
                    } else {
                        ex.set(mj, nk, zero(dg));
                        if j < k {
                            let b = sc(-S::one(), m.b_element(0, 2 + j, 2 + k));
                            ex.set(mj, mk, b.clone());
                            ex.set(nj, nk, b);
                        }
                    }
                }
            }
        }
        SpaceKind::ComplexProjective(n) => {
            let (x, me, ne) = (0, 1, 2);
            let half = S::half();
            let q = S::ratio(1, 4);
            let pm = |a: usize| if a % 2 == 0 { S::one() } else { -S::one() };
            ex.set(x, me, sc(-S::one(), e(ne)));
            ex.set(x, ne, e(me));
            ex.set(me, ne, sc(-S::one(), e(x)));
            for j in 1..n {
                for a in 0..2 {
                    let mu = m.mu_half_index(j, a);
                    let nu = m.nu_half_index(j, a);
                    ex.set(x, mu, sc(-half.clone(), e(nu)));
                    ex.set(x, nu, sc(half.clone(), e(mu)));
                    let s = pm(a) * half.clone();
                    ex.set(me, mu, sc(s.clone(), e(m.nu_half_index(j, a + 1))));
                    ex.set(ne, nu, sc(s.clone(), e(m.nu_half_index(j, a + 1))));
                    ex.set(me, nu, sc(s.clone(), e(m.mu_half_index(j, a + 1))));
                    ex.set(ne, mu, sc(-s, e(m.mu_half_index(j, a + 1))));
                    ex.set(mu, nu, sc(-half.clone(), e(x)));
                }
                let (m0, m1) = (m.mu_half_index(j, 0), m.mu_half_index(j, 1));
                let (n0, n1) = (m.nu_half_index(j, 0), m.nu_half_index(j, 1));
                ex.set(m0, n1, sc(half.clone(), e(me)));
                ex.set(m1, n0, sc(-half.clone(), e(me)));
                let hj = su_element::<S>(
                    n,
                    &[
                        (half.clone(), SuGen::A(1, 2)),
                        (S::one(), SuGen::A(2, 3)),
                        (S::one(), SuGen::A(3, j + 2)),
                    ],
                );
                let hj = sc(half.clone(), hj);
                ex.set(m0, m1, vadd(&sc(-half.clone(), e(ne)), &hj));
                ex.set(n0, n1, vadd(&sc(half.clone(), e(ne)), &hj));
                for k in j + 1..n {
                    for a in 0..2usize {
                        let b0 = sc(-q.clone(), m.b_element(0, j + 2, k + 2));
                        ex.set(m.mu_half_index(j, a), m.mu_half_index(k, a), b0.clone());
                        ex.set(m.nu_half_index(j, a), m.nu_half_index(k, a), b0);
                    }
                    let b1 = sc(-q.clone(), m.b_element(1, j + 2, k + 2));
                    ex.set(m.mu_half_index(j, 0), m.mu_half_index(k, 1), b1.clone());
                    ex.set(m.nu_half_index(j, 0), m.nu_half_index(k, 1), b1.clone());
                    ex.set(m.mu_half_index(k, 0), m.mu_half_index(j, 1), b1.clone());
                    ex.set(m.nu_half_index(k, 0), m.nu_half_index(j, 1), b1);
                }
            }
        }
    }
    let mut t = Tracker::<S>::new("bracket_table");
    for i in 0..d {
        for j in i + 1..d {
            let got = m.algebra.br(&m.basis[i], &m.basis[j]);
            let want = ex.get(i, j);
            track_vec(&mut t, &got, &want, || vec![m.labels[i].clone(), m.labels[j].clone()]);
        }
    }
    t.finish()
}

/// Identities relating the paired bases, valid for every model.
fn pairing_identities<S: Scalar>(m: &RankOneModel<S>) -> CheckReport {
    let mut t = Tracker::<S>::new("pairing_identities");
    let br = |i: usize, j: usize| m.algebra.br(&m.basis[i], &m.basis[j]);
    let lab = |i: usize, j: usize| vec![m.labels[i].clone(), m.labels[j].clone()];
    let e = m.blocks.m_eps.len();
    let p = m.blocks.m_half.len();
    let me = |j: usize| m.blocks.m_eps.start + j;
    let ke = |j: usize| m.blocks.k_eps.start + j;
    let mh = |j: usize| m.blocks.m_half.start + j;
    let kh = |j: usize| m.blocks.k_half.start + j;
    let proj = |v: &[S], b: BlockName| -> Vec<S> {
        let c = m.to_mbar(v);
        let mut out = zero(m.algebra.dim());
        for i in m.blocks.range(b) {
            crate::linalg::axpy(&mut out, &c[i], &m.basis[i]);
        }
        out
    };
    for j in 0..e {
        for k in 0..e {
            track_vec(&mut t, &br(me(j), me(k)), &br(ke(j), ke(k)), || lab(me(j), me(k)));
            let minus = vscale(&-S::one(), &br(ke(j), me(k)));
            track_vec(&mut t, &br(me(j), ke(k)), &minus, || lab(me(j), ke(k)));
            let want = if j == k { vscale(&-S::one(), &m.x) } else { zero(m.algebra.dim()) };
            track_vec(&mut t, &br(me(j), ke(k)), &want, || lab(me(j), ke(k)));
        }
        for q in 0..p {
            track_vec(&mut t, &br(me(j), mh(q)), &br(ke(j), kh(q)), || lab(me(j), mh(q)));
            let minus = vscale(&-S::one(), &br(me(j), kh(q)));
            track_vec(&mut t, &br(ke(j), mh(q)), &minus, || lab(ke(j), mh(q)));
        }
    }
    let half = S::half();
    for a in 0..p {
        for b in 0..p {
            let mm = br(mh(a), mh(b));
            let nn = br(kh(a), kh(b));
            let diff = vscale(&half, &vsub(&mm, &nn));
            track_vec(&mut t, &proj(&mm, BlockName::KEps), &diff, || lab(mh(a), mh(b)));
            let neg = vscale(&-S::one(), &proj(&nn, BlockName::KEps));
            track_vec(&mut t, &neg, &diff, || lab(kh(a), kh(b)));
            let mn = br(mh(a), kh(b));
            let nm = br(kh(a), mh(b));
            let sum = vscale(&half, &vadd(&mn, &nm));
            track_vec(&mut t, &proj(&mn, BlockName::MEps), &sum, || lab(mh(a), kh(b)));
            track_vec(&mut t, &proj(&nm, BlockName::MEps), &sum, || lab(kh(a), mh(b)));
            let want = if a == b { vscale(&-half.clone(), &m.x) } else { zero(m.algebra.dim()) };
            track_vec(&mut t, &proj(&mn, BlockName::A), &want, || lab(mh(a), kh(b)));
        }
    }
    t.finish()
}

/// Block inclusions for brackets between h, a, m_eps, k_eps, m_half, k_half.
fn block_inclusions<S: Scalar>(m: &RankOneModel<S>) -> CheckReport {
    use BlockName::*;
    let mut t = Tracker::<S>::new("block_inclusions");
    let rules: Vec<(BlockName, BlockName, Vec<BlockName>)> = vec![
        (H, MEps, vec![MEps]),
        (H, KEps, vec![KEps]),
        (H, MHalf, vec![MHalf]),
        (H, KHalf, vec![KHalf]),
        (H, A, vec![]),
        (A, MEps, vec![KEps]),
        (A, KEps, vec![MEps]),
        (A, MHalf, vec![KHalf]),
        (A, KHalf, vec![MHalf]),
        (MEps, MEps, vec![H]),
        (MEps, MHalf, vec![KHalf]),
        (MEps, KEps, vec![A]),
        (MEps, KHalf, vec![MHalf]),
        (MHalf, MHalf, vec![H, KEps]),
        (MHalf, KEps, vec![MHalf]),
        (MHalf, KHalf, vec![A, MEps]),
        (KEps, KEps, vec![H]),
        (KEps, KHalf, vec![KHalf]),
        (KHalf, KHalf, vec![H, KEps]),
    ];
    let vectors = |b: BlockName| -> Vec<(String, Vec<S>)> {
        match b {
            H => m
                .h
                .basis
                .iter()
                .enumerate()
                .map(|(i, v)| (format!("h[{i}]"), v.clone()))
                .collect(),
            _ => m
                .blocks
                .range(b)
                .map(|i| (m.labels[i].clone(), m.basis[i].clone()))
                .collect(),
        }
    };
    for (left, right, target) in rules {
        for (lu, u) in vectors(left) {
            for (lv, v) in vectors(right) {
                let (c, hp) = m.split(&m.algebra.br(&u, &v));
                for (i, ci) in c.iter().enumerate() {
                    if !target.contains(&m.blocks.of(i)) {
                        t.track(ci, || vec![lu.clone(), lv.clone(), m.labels[i].clone()]);
                    }
                }
                if !target.contains(&H) {
                    for hi in &hp {
                        t.track(hi, || vec![lu.clone(), lv.clone(), "h".into()]);
                    }
                }
            }
        }
    }
    t.finish()
}

/// Action of h on the half blocks (CP^n).
fn h_action_table<S: Scalar>(m: &RankOneModel<S>) -> CheckReport {
    let mut t = Tracker::<S>::new("h_action");
    let n = m.n();
    let dg = m.algebra.dim();
    let br = |u: &[S], i: usize| m.algebra.br(u, &m.basis[i]);
    let pm = |a: usize| if a % 2 == 0 { S::one() } else { -S::one() };
    // [h, nbar] = 0
    for (wi, w) in m.h.basis.iter().enumerate() {
        for i in 0..3 {
            track_vec(&mut t, &br(w, i), &zero(dg), || vec![format!("h[{wi}]"), m.labels[i].clone()]);
        }
    }
    if n < 2 {
        return t.finish();
    }
    let idx = |is_mu: bool, j: usize, a: usize| {
        if is_mu {
            m.mu_half_index(j, a)
        } else {
            m.nu_half_index(j, a)
        }
    };
    let h0 = su_element::<S>(n, &[(S::one(), SuGen::A(1, 2)), (S::from_i64(2), SuGen::A(2, 3))]);
    for is_mu in [true, false] {
        for j in 1..n {
            for a in 0..2 {
                let target = idx(is_mu, j, a);
                let mut want = vscale(&pm(a), &m.basis[idx(is_mu, j, a + 1)]);
                if j == 1 {
                    want = vadd(&want, &vscale(&(pm(a) * S::from_i64(2)), &m.basis[idx(is_mu, 1, a + 1)]));
                }
                track_vec(&mut t, &br(&h0, target), &want, || {
                    vec!["A_12+2A_23".into(), m.labels[target].clone()]
                });
                for i in 3..=n {
                    let ai = su_element::<S>(n, &[(S::one(), SuGen::A(i, i + 1))]);
                    let mut want = zero(dg);
                    if i == j + 1 {
                        want = vadd(&want, &vscale(&pm(a), &m.basis[idx(is_mu, i - 1, a + 1)]));
                    }
                    if i == j + 2 {
                        want = vsub(&want, &vscale(&pm(a), &m.basis[idx(is_mu, i - 2, a + 1)]));
                    }
                    track_vec(&mut t, &br(&ai, target), &want, || {
                        vec![format!("A_{i}{}", i + 1), m.labels[target].clone()]
                    });
                }
                for p in 3..=n + 1 {
                    for q in p + 1..=n + 1 {
                        for c in 0..2usize {
                            let bpq = su_element::<S>(n, &[(S::one(), SuGen::B(c as u8, p, q))]);
                            let sign = if (c * (a + 1)) % 2 == 0 { S::one() } else { -S::one() };
                            let mut want = zero(dg);
                            if q == j + 2 {
                                want = vadd(&want, &m.basis[idx(is_mu, p - 2, c + a)]);
                            }
                            if p == j + 2 {
                                want = vadd(&want, &vscale(&pm(c + 1), &m.basis[idx(is_mu, q - 2, c + a)]));
                            }
                            let want = vscale(&sign, &want);
                            track_vec(&mut t, &br(&bpq, target), &want, || {
                                vec![format!("B{c}_{p}{q}"), m.labels[target].clone()]
                            });
                        }
                    }
                }
            }
        }
    }
    t.finish()
}

/// h is spanned by the h-parts of brackets of mbar.
fn h_spanned_by_brackets<S: Scalar>(m: &RankOneModel<S>) -> CheckReport {
    let mut t = Tracker::<S>::new("h_spanned_by_brackets");
    let d = m.dim();
    let mut vs = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            let hp = m.hpart(i, j);
            if hp.iter().any(|c| !c.is_zero()) {
                vs.push(hp.to_vec());
            }
        }
    }
    let got = Subspace::span_dim(m.algebra.dim(), &vs);
    if got != m.h.dim() {
        t.flag(vec![format!("span dim {got} != dim h {}", m.h.dim())]);
    }
    for v in &vs {
        if !m.h.contains(v) {
            t.flag(vec!["bracket h-part outside h".into()]);
            break;
        }
    }
    t.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::build_model;
    use crate::scalar::Q;

    #[test]
    fn all_tables_pass_small_models() {
        for kind in [
            SpaceKind::Sphere(2),
            SpaceKind::Sphere(4),
            SpaceKind::RealProjective(3),
            SpaceKind::ComplexProjective(1),
            SpaceKind::ComplexProjective(2),
            SpaceKind::ComplexProjective(3),
        ] {
            let m = build_model::<Q>(kind).unwrap();
            for r in bracket_table_reports(&m) {
                assert!(r.passed(), "{kind}: {r:?}");
            }
        }
    }

    #[test]
    fn cpn_mu_nu_eps_bracket() {
        let m = build_model::<Q>(SpaceKind::ComplexProjective(2)).unwrap();
        let got = m.to_mbar(&m.algebra.br(&m.basis[1], &m.basis[2]));
        assert_eq!(got[0], Q::from_i64(-1));
        assert!(got[1..].iter().all(|c| *c == Q::from_i64(0)));
    }
}
