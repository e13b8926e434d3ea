//! Invariant metrics on `G/H` and the Riemannian pipeline at the origin.
//!
//! Conventions: `R(U,V) = nabla_[U,V] - [nabla_U, nabla_V]`,
//! `R4(u,v,w,z) = g(R(u,v)w, z)`, `Ric(u,v) = sum R4(u,e_i,v,e_i)` over an
//! orthonormal frame, `d eta(u,v) = -1/2 eta([u,v])`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lie::{sparse, SVec};
use crate::linalg::{gdot, Mat};
use crate::models::{RankOneModel, SpaceKind};
use crate::report::{CheckReport, Tracker};
use crate::scalar::{canonical, Scalar, FLOAT_TOL};

/// Block coefficients of an invariant metric. Cross terms live on the
/// `nbar` block and must vanish for spheres.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockParams<S> {
    pub a0: S,
    pub a_eps: S,
    pub b_eps: S,
    pub a_half: S,
    pub b_half: S,
    pub a0_eps: S,
    pub b0_eps: S,
    pub c_eps: S,
}

impl<S: Scalar> BlockParams<S> {
    pub fn diagonal(a0: S, a_eps: S, b_eps: S, a_half: S, b_half: S) -> Self {
        BlockParams {
            a0,
            a_eps,
            b_eps,
            a_half,
            b_half,
            a0_eps: S::zero(),
            b0_eps: S::zero(),
            c_eps: S::zero(),
        }
    }

    /// Sphere metric `(a0, a_eps, b_eps)`; half blocks are absent.
    pub fn sphere(a0: S, a_eps: S, b_eps: S) -> Self {
        Self::diagonal(a0, a_eps, b_eps, S::one(), S::one())
    }

    pub fn is_orthogonal(&self) -> bool {
        self.a0_eps.is_zero() && self.b0_eps.is_zero() && self.c_eps.is_zero()
    }

    pub fn scaled(&self, c: &S) -> Self {
        let f = |x: &S| x.mul_ref(c);
        BlockParams {
            a0: f(&self.a0),
            a_eps: f(&self.a_eps),
            b_eps: f(&self.b_eps),
            a_half: f(&self.a_half),
            b_half: f(&self.b_half),
            a0_eps: f(&self.a0_eps),
            b0_eps: f(&self.b0_eps),
            c_eps: f(&self.c_eps),
        }
    }

    pub fn describe(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("a0".to_string(), canonical(&self.a0)),
            ("a_eps".into(), canonical(&self.a_eps)),
            ("b_eps".into(), canonical(&self.b_eps)),
            ("a_half".into(), canonical(&self.a_half)),
            ("b_half".into(), canonical(&self.b_half)),
        ];
        if !self.is_orthogonal() {
            out.push(("a0_eps".into(), canonical(&self.a0_eps)));
            out.push(("b0_eps".into(), canonical(&self.b0_eps)));
            out.push(("c_eps".into(), canonical(&self.c_eps)));
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct InvariantMetric<S> {
    pub model: Arc<RankOneModel<S>>,
    pub gram: Mat<S>,
    pub ginv: Mat<S>,
    pub params: Option<BlockParams<S>>,
    /// Absolute tolerance for float-mode checks on this metric.
    pub tol: f64,
}

pub fn metric_from_blocks<S: Scalar>(model: &Arc<RankOneModel<S>>, p: &BlockParams<S>) -> Result<InvariantMetric<S>> {
    let b = &model.blocks;
    let mut diag = vec![("a0", &p.a0), ("a_eps", &p.a_eps), ("b_eps", &p.b_eps)];
    if !b.m_half.is_empty() {
        diag.push(("a_half", &p.a_half));
        diag.push(("b_half", &p.b_half));
    }
    for (name, v) in diag {
        if !v.is_positive() {
            return Err(Error::Input(format!("{name}: must be > 0, got {}", canonical(v))));
        }
    }
    if !model.kind.is_cpn() && !p.is_orthogonal() {
        return Err(Error::Input("cross terms: only allowed on cpn".into()));
    }
    let d = model.dim();
    let mut g = Mat::zeros(d, d);
    let blocks = [
        (b.a.clone(), &p.a0),
        (b.m_eps.clone(), &p.a_eps),
        (b.k_eps.clone(), &p.b_eps),
        (b.m_half.clone(), &p.a_half),
        (b.k_half.clone(), &p.b_half),
    ];
    for (r, v) in blocks {
        for i in r {
            g.set(i, i, v.clone());
        }
    }
    if model.kind.is_cpn() {
        let (x, me, ne) = (0, b.m_eps.start, b.k_eps.start);
        for (i, j, v) in [(x, me, &p.a0_eps), (x, ne, &p.b0_eps), (me, ne, &p.c_eps)] {
            g.set(i, j, v.clone());
            g.set(j, i, v.clone());
        }
    }
    let mut m = metric_from_gram(model, g)?;
    m.params = Some(p.clone());
    Ok(m)
}

pub fn metric_from_gram<S: Scalar>(model: &Arc<RankOneModel<S>>, gram: Mat<S>) -> Result<InvariantMetric<S>> {
    let d = model.dim();
    if gram.rows() != d || gram.cols() != d {
        return Err(Error::Input(format!("gram: expected {d}x{d}, got {}x{}", gram.rows(), gram.cols())));
    }
    if !gram.is_symmetric(FLOAT_TOL) {
        return Err(Error::Input("gram: not symmetric".into()));
    }
    if let Err(k) = gram.positive_definite() {
        return Err(Error::Input(format!(
            "gram: not positive definite, leading minor of order {} fails",
            k + 1
        )));
    }
    let scale = gram.max_abs().0.to_f64().max(1.0);
    let tol = FLOAT_TOL * scale * scale;
    for (w, act) in model.h_actions.iter().enumerate() {
        let lhs = act.transpose().mul(&gram).add(&gram.mul(act));
        let (m, at) = lhs.max_abs();
        if !m.near_zero(tol) {
            let (i, j) = at.unwrap_or((0, 0));
            return Err(Error::Input(format!(
                "gram: not Ad(h)-invariant (h[{w}], {}, {})",
                model.labels[i], model.labels[j]
            )));
        }
    }
    let ginv = gram
        .inverse(FLOAT_TOL)
        .ok_or_else(|| Error::Input("gram: singular".into()))?;
    Ok(InvariantMetric {
        model: model.clone(),
        gram,
        ginv,
        params: None,
        tol: FLOAT_TOL,
    })
}

impl<S: Scalar> InvariantMetric<S> {
    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn g(&self, u: &[S], v: &[S]) -> S {
        gdot(&self.gram, u, v)
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// `c * g`, keeping block parameters in step.
    pub fn scaled(&self, c: &S) -> Result<Self> {
        let mut m = metric_from_gram(&self.model, self.gram.scale(c))?;
        m.params = self.params.as_ref().map(|p| p.scaled(c));
        m.tol = self.tol;
        Ok(m)
    }

    /// `g(e_i, v)` for a sparse vector.
    fn g_row_sparse(&self, i: usize, v: &SVec<S>) -> S {
        let mut s = S::zero();
        for (k, c) in v {
            s.add_mul(&self.gram[(i, *k)], c);
        }
        s
    }

    pub fn lower(&self, v: &[S]) -> Vec<S> {
        self.gram.mul_vec(v)
    }
}

fn sparse_axpy<S: Scalar>(out: &mut [S], c: &S, v: &SVec<S>) {
    if c.is_zero() {
        return;
    }
    for (k, x) in v {
        out[*k].add_mul(c, x);
    }
}

/// Levi-Civita data: `U` and `alpha = 1/2 [.,.]_mbar + U`, indexed `i * d + j`.
#[derive(Clone, Debug)]
pub struct Connection<S> {
    pub d: usize,
    pub u: Vec<SVec<S>>,
    pub alpha: Vec<SVec<S>>,
}

impl<S: Scalar> Connection<S> {
    pub fn alpha(&self, i: usize, j: usize) -> &SVec<S> {
        &self.alpha[i * self.d + j]
    }

    pub fn u(&self, i: usize, j: usize) -> &SVec<S> {
        &self.u[i * self.d + j]
    }

    pub fn alpha_vec(&self, u: &[S], v: &[S]) -> Vec<S> {
        self.bilinear(&self.alpha, u, v)
    }

    pub fn u_vec(&self, u: &[S], v: &[S]) -> Vec<S> {
        self.bilinear(&self.u, u, v)
    }

    fn bilinear(&self, t: &[SVec<S>], u: &[S], v: &[S]) -> Vec<S> {
        let d = self.d;
        let mut out = vec![S::zero(); d];
        for (i, ui) in u.iter().enumerate() {
            if ui.is_zero() {
                continue;
            }
            for (j, vj) in v.iter().enumerate() {
                if vj.is_zero() {
                    continue;
                }
                sparse_axpy(&mut out, &ui.mul_ref(vj), &t[i * d + j]);
            }
        }
        out
    }

    /// `alpha(e_i, v)` for sparse `v`.
    fn alpha_left(&self, i: usize, v: &SVec<S>) -> Vec<S> {
        let mut out = vec![S::zero(); self.d];
        for (l, c) in v {
            sparse_axpy(&mut out, c, self.alpha(i, *l));
        }
        out
    }

    /// `alpha(v, e_k)` for sparse `v`.
    fn alpha_right(&self, v: &SVec<S>, k: usize) -> Vec<S> {
        let mut out = vec![S::zero(); self.d];
        for (l, c) in v {
            sparse_axpy(&mut out, c, self.alpha(*l, k));
        }
        out
    }
}

/// Solves `2 g(U(u,v), w) = g([w,u], v) + g([w,v], u)` on basis triples.
pub fn u_map<S: Scalar>(metric: &InvariantMetric<S>) -> Vec<SVec<S>> {
    let m = &metric.model;
    let d = m.dim();
    // gb[k*d + i][j] = g([e_k, e_i], e_j)
    let mut gb = vec![vec![S::zero(); d]; d * d];
    for k in 0..d {
        for i in 0..d {
            let br = m.brm(k, i);
            if br.is_empty() {
                continue;
            }
            gb[k * d + i] = (0..d).map(|j| metric.g_row_sparse(j, br)).collect();
        }
    }
    let half = S::half();
    let mut u = vec![Vec::new(); d * d];
    for i in 0..d {
        for j in i..d {
            let rhs: Vec<S> = (0..d)
                .map(|k| gb[k * d + i][j].clone() + gb[k * d + j][i].clone())
                .collect();
            if rhs.iter().all(|c| c.is_zero()) {
                continue;
            }
            let mut v = metric.ginv.mul_vec(&rhs);
            for c in v.iter_mut() {
                *c = c.mul_ref(&half);
            }
            let s = sparse(&v);
            u[j * d + i] = s.clone();
            u[i * d + j] = s;
        }
    }
    u
}

pub fn levi_civita<S: Scalar>(metric: &InvariantMetric<S>) -> Connection<S> {
    let m = &metric.model;
    let d = m.dim();
    let u = u_map(metric);
    let half = S::half();
    let alpha = (0..d * d)
        .map(|idx| {
            let (i, j) = (idx / d, idx % d);
            let mut v = vec![S::zero(); d];
            sparse_axpy(&mut v, &half, m.brm(i, j));
            sparse_axpy(&mut v, &S::one(), &u[idx]);
            sparse(&v)
        })
        .collect();
    Connection { d, u, alpha }
}

/// `g(alpha(u,v), w) + g(v, alpha(u,w)) = 0` on basis triples.
pub fn metric_connection_check<S: Scalar>(metric: &InvariantMetric<S>, conn: &Connection<S>) -> CheckReport {
    let d = metric.dim();
    let mut t = Tracker::<S>::with_tol("metric_connection", metric.tol);
    let labels = &metric.model.labels;
    for i in 0..d {
        for j in 0..d {
            for k in j..d {
                let v = metric.g_row_sparse(k, conn.alpha(i, j)) + metric.g_row_sparse(j, conn.alpha(i, k));
                t.track(&v, || vec![labels[i].clone(), labels[j].clone(), labels[k].clone()]);
            }
        }
    }
    t.finish()
}

/// Closed-form `U` for orthogonal block metrics, as `(i, j, U(e_i, e_j))`
/// with `i <= j`; all other entries vanish.
pub fn u_closed_form<S: Scalar>(model: &RankOneModel<S>, p: &BlockParams<S>) -> Option<Vec<(usize, usize, Vec<S>)>> {
    if !p.is_orthogonal() {
        return None;
    }
    let d = model.dim();
    let mut out = Vec::new();
    let e = |i: usize, c: S| {
        let mut v = vec![S::zero(); d];
        v[i] = c;
        v
    };
    let sgn = |a: usize| if a % 2 == 0 { S::one() } else { -S::one() };
    let (a0, ae, be, ah, bh) = (&p.a0, &p.a_eps, &p.b_eps, &p.a_half, &p.b_half);
    let two = S::from_i64(2);
    let four = S::from_i64(4);
    let (me, ke) = (model.blocks.m_eps.clone(), model.blocks.k_eps.clone());
    for (mu, nu) in me.clone().zip(ke.clone()) {
        out.push((0, mu, e(nu, (a0.clone() - ae.clone()) / (two.clone() * be.clone()))));
        out.push((0, nu, e(mu, (be.clone() - a0.clone()) / (two.clone() * ae.clone()))));
        out.push((mu, nu, e(0, (ae.clone() - be.clone()) / (two.clone() * a0.clone()))));
    }
    if let SpaceKind::ComplexProjective(n) = model.kind {
        let (mue, nue) = (me.start, ke.start);
        for j in 1..n {
            for a in 0..2 {
                let mu = model.mu_half_index(j, a);
                let nu = model.nu_half_index(j, a);
                let mu1 = model.mu_half_index(j, a + 1);
                let nu1 = model.nu_half_index(j, a + 1);
                out.push((0, mu, e(nu, (a0.clone() - ah.clone()) / (four.clone() * bh.clone()))));
                out.push((0, nu, e(mu, (bh.clone() - a0.clone()) / (four.clone() * ah.clone()))));
                let s = sgn(a);
                out.push((mue, mu, e(nu1, s.clone() * (ah.clone() - ae.clone()) / (four.clone() * bh.clone()))));
                out.push((mue, nu, e(mu1, s.clone() * (bh.clone() - ae.clone()) / (four.clone() * ah.clone()))));
                out.push((nue, mu, e(mu1, s.clone() * (be.clone() - ah.clone()) / (four.clone() * ah.clone()))));
                out.push((nue, nu, e(nu1, s * (bh.clone() - be.clone()) / (four.clone() * bh.clone()))));
                // Corrected entry: the brute-force solve gives (a_h - b_h)/(4 a0) X.
                out.push((mu, nu, e(0, (ah.clone() - bh.clone()) / (four.clone() * a0.clone()))));
            }
            let c = (ah.clone() - bh.clone()) / (four.clone() * ae.clone());
            out.push((
                model.mu_half_index(j, 0),
                model.nu_half_index(j, 1),
                e(mue, -c.clone()),
            ));
            out.push((model.mu_half_index(j, 1), model.nu_half_index(j, 0), e(mue, c)));
        }
    }
    Some(
        out.into_iter()
            .map(|(i, j, v)| if i <= j { (i, j, v) } else { (j, i, v) })
            .collect(),
    )
}

/// Compares the solved `U` with the closed-form table when one applies.
pub fn u_cross_check<S: Scalar>(metric: &InvariantMetric<S>, conn: &Connection<S>) -> Option<CheckReport> {
    let p = metric.params.as_ref()?;
    let table = u_closed_form(&metric.model, p)?;
    let d = metric.dim();
    let mut want = vec![vec![S::zero(); d]; d * d];
    for (i, j, v) in table {
        want[i * d + j] = v;
    }
    let labels = &metric.model.labels;
    let mut t = Tracker::<S>::with_tol("u_closed_form", metric.tol);
    for i in 0..d {
        for j in i..d {
            let got = crate::lie::dense(d, conn.u(i, j));
            for (g, w) in got.iter().zip(&want[i * d + j]) {
                t.track(&(g.clone() - w.clone()), || vec![labels[i].clone(), labels[j].clone()]);
            }
        }
    }
    Some(t.finish().with_source("closed-form U table"))
}

/// `g(U(u,w), v) = 0` for all basis pairs.
pub fn killing_check<S: Scalar>(metric: &InvariantMetric<S>, conn: &Connection<S>, v: &[S]) -> Result<CheckReport> {
    if !metric.model.is_invariant_vector(v, metric.tol) {
        return Err(Error::Input("killing_check: vector is not Ad(h)-invariant".into()));
    }
    let d = metric.dim();
    let gv = metric.lower(v);
    let labels = &metric.model.labels;
    let mut t = Tracker::<S>::with_tol("killing", metric.tol);
    for i in 0..d {
        for j in i..d {
            let mut s = S::zero();
            for (k, c) in conn.u(i, j) {
                s.add_mul(c, &gv[*k]);
            }
            t.track(&s, || vec![labels[i].clone(), labels[j].clone()]);
        }
    }
    Ok(t.finish())
}

/// Covariant curvature tensor, indexed `((i*d + j)*d + k)*d + l`.
#[derive(Clone, Debug)]
pub struct Curvature<S> {
    pub d: usize,
    pub r4: Vec<S>,
}

impl<S: Scalar> Curvature<S> {
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> &S {
        let d = self.d;
        &self.r4[((i * d + j) * d + k) * d + l]
    }

    pub fn eval(&self, u: &[S], v: &[S], w: &[S], z: &[S]) -> S {
        let d = self.d;
        let nz = |x: &[S]| -> Vec<(usize, S)> {
            x.iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (i, c.clone()))
                .collect()
        };
        let (u, v, w, z) = (nz(u), nz(v), nz(w), nz(z));
        let mut s = S::zero();
        for (i, a) in &u {
            for (j, b) in &v {
                let ab = a.mul_ref(b);
                for (k, c) in &w {
                    let abc = ab.mul_ref(c);
                    for (l, e) in &z {
                        s.add_mul(&abc, &e.mul_ref(&self.r4[((i * d + j) * d + k) * d + l]));
                    }
                }
            }
        }
        s
    }
}

/// `R(e_i, e_j) e_k` in mbar coordinates.
pub fn curvature_vector<S: Scalar>(metric: &InvariantMetric<S>, conn: &Connection<S>, i: usize, j: usize, k: usize) -> Vec<S> {
    let m = &metric.model;
    let d = m.dim();
    let mut out = crate::lie::dense(d, m.adh(i, j, k));
    let br = m.brm(i, j);
    if !br.is_empty() {
        let t = conn.alpha_right(br, k);
        for (o, x) in out.iter_mut().zip(t) {
            o.add_ref(&x);
        }
    }
    let a = conn.alpha_left(j, conn.alpha(i, k));
    let b = conn.alpha_left(i, conn.alpha(j, k));
    for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
        o.add_ref(&x);
        o.sub_ref(&y);
    }
    out
}

pub fn curvature<S: Scalar>(metric: &InvariantMetric<S>, conn: &Connection<S>) -> Curvature<S> {
    let d = metric.dim();
    let mut r4 = vec![S::zero(); d * d * d * d];
    for i in 0..d {
        for j in i + 1..d {
            for k in 0..d {
                let rv = sparse(&curvature_vector(metric, conn, i, j, k));
                if rv.is_empty() {
                    continue;
                }
                for l in 0..d {
                    let v = metric.g_row_sparse(l, &rv);
                    if v.is_zero() {
                        continue;
                    }
                    r4[((j * d + i) * d + k) * d + l] = -v.clone();
                    r4[((i * d + j) * d + k) * d + l] = v;
                }
            }
        }
    }
    Curvature { d, r4 }
}

/// Pair antisymmetries, pair symmetry and the first Bianchi identity.
pub fn curvature_symmetries<S: Scalar>(curv: &Curvature<S>, labels: &[String], tol: f64) -> CheckReport {
    let d = curv.d;
    let mut t = Tracker::<S>::with_tol("curvature_symmetries", tol);
    let lab = |i: usize, j: usize, k: usize, l: usize| {
        vec![labels[i].clone(), labels[j].clone(), labels[k].clone(), labels[l].clone()]
    };
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let r = curv.get(i, j, k, l);
                    t.track(&(r.clone() + curv.get(j, i, k, l).clone()), || lab(i, j, k, l));
                    t.track(&(r.clone() + curv.get(i, j, l, k).clone()), || lab(i, j, k, l));
                    t.track(&(r.clone() - curv.get(k, l, i, j).clone()), || lab(i, j, k, l));
                    let b = r.clone() + curv.get(j, k, i, l).clone() + curv.get(k, i, j, l).clone();
                    t.track(&b, || lab(i, j, k, l));
                }
            }
        }
    }
    t.finish()
}

#[derive(Clone, Debug)]
pub struct Ricci<S> {
    /// `Ric(e_a, e_b)`.
    pub ric: Mat<S>,
    /// Ricci operator `Q = G^{-1} Ric`.
    pub q: Mat<S>,
    pub scalar: S,
}

pub fn ricci<S: Scalar>(metric: &InvariantMetric<S>, curv: &Curvature<S>) -> Ricci<S> {
    let d = metric.dim();
    let gi = &metric.ginv;
    let ric = Mat::from_fn(d, d, |a, b| {
        let mut s = S::zero();
        for c in 0..d {
            for e in 0..d {
                let w = &gi[(c, e)];
                if w.is_zero() {
                    continue;
                }
                s.add_mul(w, curv.get(a, c, b, e));
            }
        }
        s
    });
    let q = gi.mul(&ric);
    let scalar = q.trace();
    Ricci { ric, q, scalar }
}

/// Sectional curvature of the plane spanned by `u, v`.
pub fn sectional<S: Scalar>(metric: &InvariantMetric<S>, curv: &Curvature<S>, u: &[S], v: &[S]) -> Result<S> {
    let den = metric.g(u, u) * metric.g(v, v) - metric.g(u, v).sq();
    if den.near_zero(metric.tol) {
        return Err(Error::Input("sectional: vectors are linearly dependent".into()));
    }
    Ok(curv.eval(u, v, u, v) / den)
}

/// `R4(u,v,w,z) = c (g(u,w) g(v,z) - g(v,w) g(u,z))` with `c` read off one plane.
pub fn constant_curvature_check<S: Scalar>(metric: &InvariantMetric<S>, curv: &Curvature<S>) -> (CheckReport, Option<S>) {
    let d = metric.dim();
    let g = &metric.gram;
    let den = g[(0, 0)].mul_ref(&g[(1, 1)]) - g[(0, 1)].sq();
    let c = curv.get(0, 1, 0, 1).clone() / den;
    let labels = &metric.model.labels;
    let mut t = Tracker::<S>::with_tol("constant_curvature", metric.tol);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let want = c.mul_ref(&(g[(i, k)].mul_ref(&g[(j, l)]) - g[(j, k)].mul_ref(&g[(i, l)])));
                    t.track(&(curv.get(i, j, k, l).clone() - want), || {
                        vec![labels[i].clone(), labels[j].clone(), labels[k].clone(), labels[l].clone()]
                    });
                }
            }
        }
    }
    let r = t.finish();
    let value = if r.passed() { Some(c) } else { None };
    let r = match &value {
        Some(c) => r.with_value(canonical(c)),
        None => r,
    };
    (r, value)
}

// ---- sphere closed forms ----

/// The curvature tensor of a sphere block metric from the closed-form list,
/// filled over the symmetry orbit of each listed component.
pub fn sphere_closed_form_tensor<S: Scalar>(n: usize, p: &BlockParams<S>) -> Result<Vec<S>> {
    let d = 2 * n - 1;
    let (a0, ae, be) = (p.a0.clone(), p.a_eps.clone(), p.b_eps.clone());
    let two = S::from_i64(2);
    let four = S::from_i64(4);
    let mu = |j: usize| j;
    let nu = |j: usize| n - 1 + j;
    let mut t: Vec<Option<S>> = vec![None; d * d * d * d];
    let mut put = |i: usize, j: usize, k: usize, l: usize, v: S| -> Result<()> {
        let orbit = [
            (i, j, k, l, 1),
            (j, i, k, l, -1),
            (i, j, l, k, -1),
            (j, i, l, k, 1),
            (k, l, i, j, 1),
            (l, k, i, j, -1),
            (k, l, j, i, -1),
            (l, k, j, i, 1),
        ];
        for (a, b, c, e, s) in orbit {
            let val = if s > 0 { v.clone() } else { -v.clone() };
            let slot = &mut t[((a * d + b) * d + c) * d + e];
            match slot {
                Some(old) if !(old.clone() - val.clone()).near_zero(FLOAT_TOL) => {
                    return Err(Error::Consistency(format!(
                        "closed-form curvature entries conflict at ({a},{b},{c},{e})"
                    )))
                }
                _ => *slot = Some(val),
            }
        }
        Ok(())
    };
    let r_xmu = (two.clone() * be.clone() * (a0.clone() + ae.clone() - be.clone()) + (a0.clone() - ae.clone()).sq() - be.sq())
        / (four.clone() * be.clone());
    let r_xnu = (two.clone() * ae.clone() * (a0.clone() - ae.clone() + be.clone()) + (a0.clone() - be.clone()).sq() - ae.sq())
        / (four.clone() * ae.clone());
    let r_mmnn = (four.clone() * a0.clone() * be.clone() - (a0.clone() - ae.clone() + be.clone()).sq()) / (four.clone() * a0.clone());
    let gap = a0.sq() - (ae.clone() - be.clone()).sq();
    let c1 = -(two.clone() * a0.clone() * (a0.clone() - ae.clone() - be.clone())) / (four.clone() * a0.clone());
    let c2 = -gap.clone() / (four.clone() * a0.clone());
    for j in 1..n {
        put(0, mu(j), 0, mu(j), r_xmu.clone())?;
        put(0, nu(j), 0, nu(j), r_xnu.clone())?;
        for k in 1..n {
            if k != j {
                put(mu(j), mu(k), mu(j), mu(k), ae.clone())?;
                put(nu(j), nu(k), nu(j), nu(k), be.clone())?;
                put(mu(j), mu(k), nu(j), nu(k), r_mmnn.clone())?;
                put(mu(j), nu(k), mu(k), nu(j), c2.clone())?;
            }
            for l in 1..n {
                let mut v = S::zero();
                if k == l {
                    v.add_ref(&c1);
                }
                if j == k && j == l {
                    v.add_ref(&c2);
                }
                if !v.is_zero() {
                    put(mu(j), nu(j), mu(k), nu(l), v)?;
                }
            }
        }
    }
    Ok(t.into_iter().map(|x| x.unwrap_or_else(S::zero)).collect())
}

/// One closed-form component; zero when not listed.
pub fn sphere_curvature_closed_form<S: Scalar>(n: usize, p: &BlockParams<S>, idx: (usize, usize, usize, usize)) -> Result<S> {
    let d = 2 * n - 1;
    let (i, j, k, l) = idx;
    if i.max(j).max(k).max(l) >= d {
        return Err(Error::Input(format!("component index out of range for dim {d}")));
    }
    Ok(sphere_closed_form_tensor(n, p)?[((i * d + j) * d + k) * d + l].clone())
}

/// Ricci eigenvalues `(rho0, rho_eps, varrho_eps)` on `a`, `m_eps`, `k_eps`.
pub fn sphere_ricci_eigenvalues<S: Scalar>(n: usize, p: &BlockParams<S>) -> (S, S, S) {
    let (a0, ae, be) = (p.a0.clone(), p.a_eps.clone(), p.b_eps.clone());
    let m = S::from_i64(n as i64 - 1);
    let two = S::from_i64(2);
    let den = two.clone() * a0.clone() * ae.clone() * be.clone();
    let rho0 = m.clone() * (a0.sq() - (ae.clone() - be.clone()).sq()) / den.clone();
    let rho_e = (two.clone() * m.clone() * a0.clone() * be.clone() + ae.sq() - be.sq() - a0.sq()) / den.clone();
    let varrho_e = (two * m * a0.clone() * ae.clone() - ae.sq() + be.sq() - a0.sq()) / den;
    (rho0, rho_e, varrho_e)
}

pub fn sphere_scalar<S: Scalar>(n: usize, p: &BlockParams<S>) -> S {
    let (a0, ae, be) = (p.a0.clone(), p.a_eps.clone(), p.b_eps.clone());
    let m = S::from_i64(n as i64 - 1);
    let two = S::from_i64(2);
    m.clone() * (two.clone() * m * a0.clone() * (ae.clone() + be.clone()) - (ae - be).sq() - a0.sq())
        / (two * a0.clone() * p.a_eps.clone() * p.b_eps.clone())
}

/// Brute-force curvature, Ricci operator and scalar curvature against the
/// sphere closed forms.
pub fn sphere_closed_form_check<S: Scalar>(metric: &InvariantMetric<S>, curv: &Curvature<S>, ric: &Ricci<S>) -> Result<CheckReport> {
    let model = &metric.model;
    let p = metric
        .params
        .as_ref()
        .ok_or_else(|| Error::Input("sphere closed forms need block parameters".into()))?;
    if model.kind.is_cpn() {
        return Err(Error::Input("sphere closed forms apply to sphere/rpn only".into()));
    }
    let n = model.n();
    let d = model.dim();
    let labels = &model.labels;
    let table = sphere_closed_form_tensor(n, p)?;
    let mut tc = Tracker::<S>::with_tol("curvature_closed_form", metric.tol);
    for (idx, want) in table.iter().enumerate() {
        let got = &curv.r4[idx];
        tc.track(&(got.clone() - want.clone()), || {
            let (i, j, k, l) = (idx / (d * d * d), idx / (d * d) % d, idx / d % d, idx % d);
            vec![labels[i].clone(), labels[j].clone(), labels[k].clone(), labels[l].clone()]
        });
    }
    let (r0, re, ve) = sphere_ricci_eigenvalues(n, p);
    let mut tq = Tracker::<S>::with_tol("ricci_eigenvalues", metric.tol);
    for i in 0..d {
        for j in 0..d {
            let want = if i != j {
                S::zero()
            } else if i == 0 {
                r0.clone()
            } else if model.blocks.m_eps.contains(&i) {
                re.clone()
            } else {
                ve.clone()
            };
            tq.track(&(ric.q[(i, j)].clone() - want), || vec![labels[i].clone(), labels[j].clone()]);
        }
    }
    let mut ts = Tracker::<S>::with_tol("scalar_curvature", metric.tol);
    ts.track(&(ric.scalar.clone() - sphere_scalar(n, p)), || vec!["s".into()]);
    let parts = [
        tc.finish().with_source("closed-form curvature list"),
        tq.finish().with_source("closed-form Ricci eigenvalues"),
        ts.finish().with_source("closed-form scalar curvature"),
    ];
    Ok(CheckReport::all("sphere_closed_forms", S::MODE, &parts).with_caveats(&model.caveats))
}

/// Constant xi-sectional curvature `c` for a sphere block metric, if any.
pub fn xi_sectional_constant<S: Scalar>(p: &BlockParams<S>) -> Option<S> {
    if (p.a_eps.clone() - p.b_eps.clone()).near_zero(FLOAT_TOL) {
        Some(p.a0.clone() / (S::from_i64(4) * p.a_eps.sq()))
    } else if (p.a0.clone() - p.a_eps.clone() - p.b_eps.clone()).near_zero(FLOAT_TOL) {
        Some(S::one() / (p.a_eps.clone() + p.b_eps.clone()))
    } else {
        None
    }
}

/// Checks `R4(X,v,X,w) = c a0 g(v,w)` on the complement of `X`. Passing means
/// every `X`-plane has sectional curvature `c`.
pub fn xi_sectional_check<S: Scalar>(metric: &InvariantMetric<S>, curv: &Curvature<S>, c: &S) -> CheckReport {
    let d = metric.dim();
    let a0 = metric.gram[(0, 0)].clone();
    let labels = &metric.model.labels;
    let mut t = Tracker::<S>::with_tol("xi_sectional_constant", metric.tol);
    for i in 1..d {
        for j in 1..d {
            let want = c.mul_ref(&a0).mul_ref(&metric.gram[(i, j)]);
            t.track(&(curv.get(0, i, 0, j).clone() - want), || {
                vec!["X".into(), labels[i].clone(), labels[j].clone()]
            });
        }
    }
    t.finish().with_value(canonical(c))
}

// ---- derivatives of invariant tensors ----

/// `d eta(u,v) = -1/2 eta([u,v]_mbar)`; `eta` is a covector.
pub fn d_eta_bracket<S: Scalar>(metric: &InvariantMetric<S>, eta: &[S]) -> Mat<S> {
    let m = &metric.model;
    let d = m.dim();
    let mh = -S::half();
    Mat::from_fn(d, d, |i, j| {
        let mut s = S::zero();
        for (k, c) in m.brm(i, j) {
            s.add_mul(c, &eta[*k]);
        }
        s.mul_ref(&mh)
    })
}

/// `2 d eta(u,v) = (nabla_u eta)v - (nabla_v eta)u` with `(nabla_u eta)v = -eta(alpha(u,v))`.
pub fn d_eta_nabla<S: Scalar>(conn: &Connection<S>, eta: &[S]) -> Mat<S> {
    let d = conn.d;
    let ev = |v: &SVec<S>| {
        let mut s = S::zero();
        for (k, c) in v {
            s.add_mul(c, &eta[*k]);
        }
        s
    };
    let half = S::half();
    Mat::from_fn(d, d, |i, j| (ev(conn.alpha(j, i)) - ev(conn.alpha(i, j))).mul_ref(&half))
}

/// Both `d eta` computations; disagreement is a hard consistency error.
pub fn d_of_1form<S: Scalar>(metric: &InvariantMetric<S>, conn: &Connection<S>, eta: &[S]) -> Result<Mat<S>> {
    let a = d_eta_bracket(metric, eta);
    let b = d_eta_nabla(conn, eta);
    let (m, at) = a.sub(&b).max_abs();
    if !m.near_zero(metric.tol) {
        let (i, j) = at.unwrap_or((0, 0));
        return Err(Error::Consistency(format!(
            "d eta disagrees between bracket and connection formulas at ({}, {})",
            metric.model.labels[i], metric.model.labels[j]
        )));
    }
    Ok(a)
}

/// `(nabla_{e_u} xi)` as the columns of a matrix.
pub fn nabla_vector<S: Scalar>(conn: &Connection<S>, xi: &[S]) -> Mat<S> {
    let d = conn.d;
    let cols: Vec<Vec<S>> = (0..d)
        .map(|u| {
            let mut out = vec![S::zero(); d];
            for (k, c) in xi.iter().enumerate() {
                sparse_axpy(&mut out, c, conn.alpha(u, k));
            }
            out
        })
        .collect();
    Mat::from_cols(d, &cols)
}

/// Matrix of `v -> alpha(e_u, v)`.
pub fn alpha_operator<S: Scalar>(conn: &Connection<S>, u: usize) -> Mat<S> {
    let d = conn.d;
    let cols: Vec<Vec<S>> = (0..d).map(|k| crate::lie::dense(d, conn.alpha(u, k))).collect();
    Mat::from_cols(d, &cols)
}

/// `(nabla_{e_u} phi) = [A_u, phi]` with `A_u = alpha(e_u, .)`, one matrix per `u`.
pub fn nabla_endomorphism<S: Scalar>(conn: &Connection<S>, phi: &Mat<S>) -> Vec<Mat<S>> {
    (0..conn.d)
        .map(|u| {
            let a = alpha_operator(conn, u);
            a.mul(phi).sub(&phi.mul(&a))
        })
        .collect()
}

/// `(nabla_{e_u} Phi)(v,w) = -Phi(alpha(u,v), w) - Phi(v, alpha(u,w))`.
pub fn nabla_two_form<S: Scalar>(conn: &Connection<S>, two_form: &Mat<S>) -> Vec<Mat<S>> {
    (0..conn.d)
        .map(|u| {
            let a = alpha_operator(conn, u);
            let at = a.transpose().mul(two_form);
            at.add(&two_form.mul(&a)).scale(&-S::one())
        })
        .collect()
}

/// `3 dPhi(u,v,w)` = cyclic sum; returns `dPhi` indexed `(i*d + j)*d + k`.
pub fn d_of_2form<S: Scalar>(conn: &Connection<S>, two_form: &Mat<S>) -> Vec<S> {
    let d = conn.d;
    let nab = nabla_two_form(conn, two_form);
    let third = S::ratio(1, 3);
    let mut out = vec![S::zero(); d * d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let s = nab[i][(j, k)].clone() + nab[j][(k, i)].clone() + nab[k][(i, j)].clone();
                out[(i * d + j) * d + k] = s.mul_ref(&third);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::build_model;
    use crate::scalar::Q;

    fn q(n: i64, d: i64) -> Q {
        Q::ratio(n, d)
    }

    fn sphere(n: usize, a: (i64, i64, i64)) -> InvariantMetric<Q> {
        let m = Arc::new(build_model::<Q>(SpaceKind::Sphere(n)).unwrap());
        let p = BlockParams::sphere(q(a.0, 1), q(a.1, 1), q(a.2, 1));
        metric_from_blocks(&m, &p).unwrap()
    }

    #[test]
    fn round_metric_is_naturally_reductive() {
        let g = sphere(3, (1, 1, 1));
        let c = levi_civita(&g);
        assert!(c.u.iter().all(|v| v.is_empty()));
        assert!(metric_connection_check(&g, &c).passed());
    }

    #[test]
    fn u_matches_closed_form_value() {
        let g = sphere(3, (1, 2, 3));
        let c = levi_civita(&g);
        let mu1 = g.model.mu_eps_index(1);
        let nu1 = g.model.nu_eps_index(1);
        assert_eq!(c.u(0, mu1), &vec![(nu1, q(-1, 6))]);
        assert!(u_cross_check(&g, &c).unwrap().passed());
    }

    #[test]
    fn round_sphere_two_has_quarter_curvature() {
        let g = sphere(2, (1, 1, 1));
        let c = levi_civita(&g);
        let r = curvature(&g, &c);
        assert_eq!(r.get(0, 1, 0, 1), &q(1, 4));
        let (rep, cc) = constant_curvature_check(&g, &r);
        assert!(rep.passed());
        assert_eq!(cc, Some(q(1, 4)));
        let ric = ricci(&g, &r);
        assert_eq!(ric.scalar, q(3, 2));
    }

    #[test]
    fn sphere_closed_forms_agree() {
        for (n, a) in [(2, (1, 2, 3)), (3, (2, 1, 5)), (4, (3, 7, 2))] {
            let g = sphere(n, a);
            let c = levi_civita(&g);
            let r = curvature(&g, &c);
            assert!(curvature_symmetries(&r, &g.model.labels, 0.0).passed());
            let ric = ricci(&g, &r);
            let rep = sphere_closed_form_check(&g, &r, &ric).unwrap();
            assert!(rep.passed(), "{rep:?}");
        }
    }

    #[test]
    fn cpn_u_table_and_connection() {
        let m = Arc::new(build_model::<Q>(SpaceKind::ComplexProjective(3)).unwrap());
        let p = BlockParams::diagonal(q(2, 1), q(3, 1), q(5, 1), q(7, 1), q(11, 1));
        let g = metric_from_blocks(&m, &p).unwrap();
        let c = levi_civita(&g);
        assert!(metric_connection_check(&g, &c).passed());
        let rep = u_cross_check(&g, &c).unwrap();
        assert!(rep.passed(), "{rep:?}");
        let r = curvature(&g, &c);
        assert!(curvature_symmetries(&r, &m.labels, 0.0).passed());
    }

    #[test]
    fn d_eta_formulas_agree() {
        let m = Arc::new(build_model::<Q>(SpaceKind::ComplexProjective(2)).unwrap());
        let mut p = BlockParams::diagonal(q(2, 1), q(3, 1), q(5, 1), q(1, 2), q(1, 3));
        p.c_eps = q(1, 1);
        p.a0_eps = q(1, 2);
        let g = metric_from_blocks(&m, &p).unwrap();
        let c = levi_civita(&g);
        let eta = g.lower(&[q(1, 1), q(2, 1), q(3, 1), q(0, 1), q(0, 1), q(0, 1), q(0, 1)]);
        let de = d_of_1form(&g, &c, &eta).unwrap();
        assert_eq!(de[(0, 1)], eta[2].clone() / Q::from_i64(2));
    }

    #[test]
    fn rejects_indefinite_and_noninvariant() {
        let m = Arc::new(build_model::<Q>(SpaceKind::Sphere(3)).unwrap());
        assert!(metric_from_blocks(&m, &BlockParams::sphere(q(1, 1), q(-1, 1), q(1, 1))).is_err());
        let mut g = Mat::<Q>::identity(5);
        g.set(1, 1, q(2, 1));
        assert!(metric_from_gram(&m, g).is_err());
    }

    #[test]
    fn killing_rejects_noninvariant_vector() {
        let g = sphere(3, (1, 1, 1));
        let c = levi_civita(&g);
        let mut v = vec![q(0, 1); 5];
        v[1] = q(1, 1);
        assert!(killing_check(&g, &c, &v).is_err());
        let mut x = vec![q(0, 1); 5];
        x[0] = q(1, 1);
        assert!(killing_check(&g, &c, &x).unwrap().passed());
    }
}
