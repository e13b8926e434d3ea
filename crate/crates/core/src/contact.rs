//! Almost contact metric structures `(phi, xi, eta, g)` on mbar and the
//! contact, K-contact, Sasakian, 3-Sasakian, Einstein and cone checks.

use crate::error::{Error, Result};
use crate::geometry::{
    curvature, d_of_1form, d_of_2form, killing_check, levi_civita, nabla_endomorphism, nabla_vector, ricci,
    Connection, Curvature, InvariantMetric, Ricci,
};
use crate::linalg::{dot, Mat};
use crate::report::{CheckReport, Tracker};
use crate::scalar::{canonical, Scalar};

#[derive(Clone, Debug)]
pub struct AlmostContactStructure<S> {
    pub metric: InvariantMetric<S>,
    pub conn: Connection<S>,
    pub xi: Vec<S>,
    pub eta: Vec<S>,
    pub phi: Mat<S>,
    /// `Phi(u,v) = g(u, phi v)`.
    pub big_phi: Mat<S>,
    pub d_eta: Mat<S>,
}

fn check_xi<S: Scalar>(metric: &InvariantMetric<S>, xi: &[S]) -> Result<()> {
    if xi.len() != metric.dim() {
        return Err(Error::Input(format!("xi: expected {} coordinates, got {}", metric.dim(), xi.len())));
    }
    if !metric.model.is_invariant_vector(xi, metric.tol) {
        return Err(Error::Input("xi: not Ad(h)-invariant".into()));
    }
    let n = metric.g(xi, xi) - S::one();
    if !n.near_zero(metric.tol) {
        return Err(Error::Input("characteristic field not unit".into()));
    }
    Ok(())
}

/// `eta = g(xi, .)` and `phi` with `g(u, phi v) = d eta(u, v)`.
pub fn build_structure<S: Scalar>(metric: &InvariantMetric<S>, xi: &[S]) -> Result<AlmostContactStructure<S>> {
    check_xi(metric, xi)?;
    let conn = levi_civita(metric);
    let eta = metric.lower(xi);
    let d_eta = d_of_1form(metric, &conn, &eta)?;
    let phi = metric.ginv.mul(&d_eta);
    Ok(AlmostContactStructure {
        metric: metric.clone(),
        conn,
        xi: xi.to_vec(),
        eta,
        big_phi: d_eta.clone(),
        phi,
        d_eta,
    })
}

/// Structure with a prescribed `phi`; `Phi = g(., phi .)` need not equal `d eta`.
pub fn structure_with_phi<S: Scalar>(metric: &InvariantMetric<S>, xi: &[S], phi: Mat<S>) -> Result<AlmostContactStructure<S>> {
    check_xi(metric, xi)?;
    let d = metric.dim();
    if phi.rows() != d || phi.cols() != d {
        return Err(Error::Input(format!("phi: expected {d}x{d}")));
    }
    let conn = levi_civita(metric);
    let eta = metric.lower(xi);
    let d_eta = d_of_1form(metric, &conn, &eta)?;
    let big_phi = metric.gram.mul(&phi);
    Ok(AlmostContactStructure {
        metric: metric.clone(),
        conn,
        xi: xi.to_vec(),
        eta,
        phi,
        big_phi,
        d_eta,
    })
}

/// Rescales `A = G^{-1} d eta` to an almost contact `phi` when
/// `-A^2 = c (I - xi eta)` for some `c > 0`, so that `phi = A / sqrt(c)`.
/// Returns the structure and `c`.
pub fn normalized_structure<S: Scalar>(metric: &InvariantMetric<S>, xi: &[S]) -> Result<(AlmostContactStructure<S>, S)> {
    let base = build_structure(metric, xi)?;
    let d = metric.dim();
    let a = &base.phi;
    let m = a.mul(a).scale(&-S::one());
    let proj = Mat::from_fn(d, d, |i, j| {
        let id = if i == j { S::one() } else { S::zero() };
        id - xi[i].mul_ref(&base.eta[j])
    });
    let c = m.trace() / S::from_i64(d as i64 - 1);
    let (dev, _) = m.sub(&proj.scale(&c)).max_abs();
    if !dev.near_zero(metric.tol) || !c.is_positive() {
        return Err(Error::Infeasible("d eta is not a multiple of an almost contact form".into()));
    }
    let root = c
        .sqrt()
        .ok_or_else(|| Error::Unsupported(format!("sqrt({}) is irrational in exact mode", canonical(&c))))?;
    let phi = a.scale(&(S::one() / root));
    Ok((structure_with_phi(metric, xi, phi)?, c))
}

impl<S: Scalar> AlmostContactStructure<S> {
    fn labels(&self) -> &[String] {
        &self.metric.model.labels
    }

    fn tol(&self) -> f64 {
        self.metric.tol
    }

    fn lab2(&self, i: usize, j: usize) -> Vec<String> {
        vec![self.labels()[i].clone(), self.labels()[j].clone()]
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    /// `[u, v]_mbar` on coordinate vectors.
    fn br(&self, u: &[S], v: &[S]) -> Vec<S> {
        self.metric.model.bracket_mbar(u, v)
    }
}

/// `phi^2 = -I + xi (x) eta`, `g(phi u, phi v) = g(u,v) - eta(u) eta(v)`, `Phi = d eta`.
pub fn contact_check<S: Scalar>(s: &AlmostContactStructure<S>) -> CheckReport {
    let d = s.dim();
    let g = &s.metric.gram;
    let phi2 = s.phi.mul(&s.phi);
    let compat = s.phi.transpose().mul(g).mul(&s.phi);
    let mut t1 = Tracker::<S>::with_tol("phi_squared", s.tol());
    let mut t2 = Tracker::<S>::with_tol("metric_compatibility", s.tol());
    let mut t3 = Tracker::<S>::with_tol("Phi_equals_d_eta", s.tol());
    for i in 0..d {
        for j in 0..d {
            let id = if i == j { S::one() } else { S::zero() };
            let want = s.xi[i].mul_ref(&s.eta[j]) - id;
            t1.track(&(phi2[(i, j)].clone() - want), || s.lab2(i, j));
            let want = g[(i, j)].clone() - s.eta[i].mul_ref(&s.eta[j]);
            t2.track(&(compat[(i, j)].clone() - want), || s.lab2(i, j));
            t3.track(&(s.big_phi[(i, j)].clone() - s.d_eta[(i, j)].clone()), || s.lab2(i, j));
        }
    }
    let parts = [t1.finish(), t2.finish(), t3.finish()];
    CheckReport::all("contact", S::MODE, &parts).with_caveats(&s.metric.model.caveats)
}

fn require_contact<S: Scalar>(s: &AlmostContactStructure<S>, what: &str) -> Result<()> {
    if contact_check(s).passed() {
        Ok(())
    } else {
        Err(Error::Ordering(format!("{what}: structure is not contact")))
    }
}

/// `nabla_u xi = -phi u` on basis vectors.
pub fn nabla_xi_check<S: Scalar>(s: &AlmostContactStructure<S>) -> CheckReport {
    let nx = nabla_vector(&s.conn, &s.xi);
    let d = s.dim();
    let mut t = Tracker::<S>::with_tol("nabla_xi_equals_minus_phi", s.tol());
    for i in 0..d {
        for j in 0..d {
            t.track(&(nx[(i, j)].clone() + s.phi[(i, j)].clone()), || s.lab2(j, i));
        }
    }
    t.finish()
}

/// K-contact: `xi` is Killing; `nabla xi = -phi` must agree.
pub fn kcontact_check<S: Scalar>(s: &AlmostContactStructure<S>) -> Result<CheckReport> {
    require_contact(s, "kcontact_check")?;
    let killing = killing_check(&s.metric, &s.conn, &s.xi)?;
    let co = nabla_xi_check(s);
    if killing.passed() != co.passed() {
        return Err(Error::Consistency(format!(
            "Killing test ({:?}) and nabla xi = -phi ({:?}) disagree",
            killing.verdict, co.verdict
        )));
    }
    Ok(CheckReport::all("kcontact", S::MODE, &[killing, co]).with_caveats(&s.metric.model.caveats))
}

/// `N(e_i, e_j)` with mbar-projected brackets, indexed `i * d + j`.
pub fn nijenhuis<S: Scalar>(s: &AlmostContactStructure<S>) -> Vec<Vec<S>> {
    let d = s.dim();
    let phi2 = s.phi.mul(&s.phi);
    let cols: Vec<Vec<S>> = (0..d).map(|i| s.phi.col(i)).collect();
    let two = S::from_i64(2);
    let mut out = vec![vec![S::zero(); d]; d * d];
    for i in 0..d {
        for j in i + 1..d {
            let ei = crate::linalg::unit::<S>(d, i);
            let ej = crate::linalg::unit::<S>(d, j);
            let mut n = phi2.mul_vec(&s.br(&ei, &ej));
            let t = s.br(&cols[i], &cols[j]);
            let a = s.phi.mul_vec(&s.br(&cols[i], &ej));
            let b = s.phi.mul_vec(&s.br(&ei, &cols[j]));
            let c = two.mul_ref(&s.d_eta[(i, j)]);
            for k in 0..d {
                n[k] = n[k].clone() + t[k].clone() - a[k].clone() - b[k].clone() + c.mul_ref(&s.xi[k]);
            }
            out[j * d + i] = n.iter().map(|x| -x.clone()).collect();
            out[i * d + j] = n;
        }
    }
    out
}

/// `(nabla_u phi) v = g(u,v) xi - eta(v) u` on basis pairs.
pub fn nabla_phi_check<S: Scalar>(s: &AlmostContactStructure<S>) -> CheckReport {
    let d = s.dim();
    let nab = nabla_endomorphism(&s.conn, &s.phi);
    let g = &s.metric.gram;
    let mut t = Tracker::<S>::with_tol("nabla_phi", s.tol());
    for u in 0..d {
        for v in 0..d {
            for k in 0..d {
                let mut want = g[(u, v)].mul_ref(&s.xi[k]);
                if k == u {
                    want.sub_ref(&s.eta[v]);
                }
                t.track(&(nab[u][(k, v)].clone() - want), || s.lab2(u, v));
            }
        }
    }
    t.finish()
}

/// Sasakian iff `N = 0`; the `nabla phi` characterization must agree.
pub fn sasakian_check<S: Scalar>(s: &AlmostContactStructure<S>) -> Result<CheckReport> {
    require_contact(s, "sasakian_check")?;
    let d = s.dim();
    let n = nijenhuis(s);
    let mut t = Tracker::<S>::with_tol("nijenhuis", s.tol());
    for i in 0..d {
        for j in i + 1..d {
            for x in &n[i * d + j] {
                t.track(x, || s.lab2(i, j));
            }
        }
    }
    let nt = t.finish();
    let co = nabla_phi_check(s);
    if nt.passed() != co.passed() {
        return Err(Error::Consistency(format!(
            "Nijenhuis test ({:?}) and nabla phi test ({:?}) disagree",
            nt.verdict, co.verdict
        )));
    }
    Ok(CheckReport::all("sasakian", S::MODE, &[nt, co]).with_caveats(&s.metric.model.caveats))
}

/// Orthonormal triple with `[xi_i, xi_j] = 2 eps_ijk xi_k`, each Sasakian.
pub fn three_sasakian_check<S: Scalar>(metric: &InvariantMetric<S>, xis: [&[S]; 3]) -> Result<CheckReport> {
    let mut t = Tracker::<S>::with_tol("orthonormal_triple", metric.tol);
    for i in 0..3 {
        for j in i..3 {
            let want = if i == j { S::one() } else { S::zero() };
            t.track(&(metric.g(xis[i], xis[j]) - want), || vec![format!("xi{}", i + 1), format!("xi{}", j + 1)]);
        }
    }
    let mut parts = vec![t.finish()];
    let mut tb = Tracker::<S>::with_tol("triple_brackets", metric.tol);
    let two = S::from_i64(2);
    for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        let br = metric.model.bracket_mbar(xis[i], xis[j]);
        for (b, x) in br.iter().zip(xis[k]) {
            tb.track(&(b.clone() - two.mul_ref(x)), || vec![format!("xi{}", i + 1), format!("xi{}", j + 1)]);
        }
    }
    parts.push(tb.finish());
    if parts.iter().all(|p| p.passed()) {
        for (i, xi) in xis.iter().enumerate() {
            let s = build_structure(metric, xi)?;
            let c = contact_check(&s);
            let r = if c.passed() { sasakian_check(&s)? } else { c };
            parts.push(r.renamed(format!("sasakian_xi{}", i + 1)));
        }
    }
    Ok(CheckReport::all("three_sasakian", S::MODE, &parts).with_caveats(&metric.model.caveats))
}

/// Curvature and Ricci data of a metric.
pub fn ricci_of<S: Scalar>(metric: &InvariantMetric<S>) -> (Curvature<S>, Ricci<S>) {
    let conn = levi_civita(metric);
    let r = curvature(metric, &conn);
    let q = ricci(metric, &r);
    (r, q)
}

/// `Q = lambda I`; returns the report and `lambda` when Einstein.
pub fn einstein_check<S: Scalar>(metric: &InvariantMetric<S>) -> (CheckReport, Option<S>) {
    let (_, ric) = ricci_of(metric);
    einstein_from_ricci(metric, &ric)
}

pub fn einstein_from_ricci<S: Scalar>(metric: &InvariantMetric<S>, ric: &Ricci<S>) -> (CheckReport, Option<S>) {
    let d = metric.dim();
    let lambda = ric.q[(0, 0)].clone();
    let labels = &metric.model.labels;
    let mut t = Tracker::<S>::with_tol("einstein", metric.tol);
    for i in 0..d {
        for j in 0..d {
            let want = if i == j { lambda.clone() } else { S::zero() };
            t.track(&(ric.q[(i, j)].clone() - want), || {
                if i == j {
                    vec![
                        format!("Q({0},{0}) = {1}", labels[i], canonical(&ric.q[(i, i)])),
                        format!("Q(X,X) = {}", canonical(&lambda)),
                    ]
                } else {
                    vec![labels[i].clone(), labels[j].clone()]
                }
            });
        }
    }
    let r = t.finish().with_caveats(&metric.model.caveats);
    if r.passed() {
        (r.with_value(canonical(&lambda)), Some(lambda))
    } else {
        (r, None)
    }
}

/// For a Sasakian structure: Einstein with `lambda = dim(mbar) - 1`.
pub fn sasakian_einstein_check<S: Scalar>(s: &AlmostContactStructure<S>) -> Result<CheckReport> {
    let sas = sasakian_check(s)?;
    let (ein, lambda) = einstein_check(&s.metric);
    let mut t = Tracker::<S>::with_tol("einstein_constant", s.tol());
    if let Some(l) = &lambda {
        let want = S::from_i64(s.dim() as i64 - 1);
        t.track(&(l.clone() - want), || vec![format!("lambda = {}", canonical(l))]);
    }
    let mut r = CheckReport::all("sasakian_einstein", S::MODE, &[sas, ein, t.finish()]);
    if let Some(l) = lambda {
        r = r.with_value(canonical(&l));
    }
    Ok(r)
}

/// Cone at the slice `r = 1`: `J^2 = -I`, `J` orthogonal for `g + dr^2`,
/// and `dF = 0`, i.e. `Phi = d eta` and `dPhi = 0`.
pub fn cone_check<S: Scalar>(s: &AlmostContactStructure<S>) -> CheckReport {
    let d = s.dim();
    let j = cone_operator(s);
    let mut gbar = Mat::zeros(d + 1, d + 1);
    for a in 0..d {
        for b in 0..d {
            gbar.set(a, b, s.metric.gram[(a, b)].clone());
        }
    }
    gbar.set(d, d, S::one());
    let lab = |a: usize| {
        if a == d {
            "dr".to_string()
        } else {
            s.labels()[a].clone()
        }
    };
    let j2 = j.mul(&j);
    let jg = j.transpose().mul(&gbar).mul(&j);
    let mut t1 = Tracker::<S>::with_tol("J_squared", s.tol());
    let mut t2 = Tracker::<S>::with_tol("J_orthogonal", s.tol());
    for a in 0..=d {
        for b in 0..=d {
            let id = if a == b { S::one() } else { S::zero() };
            t1.track(&(j2[(a, b)].clone() + id), || vec![lab(a), lab(b)]);
            t2.track(&(jg[(a, b)].clone() - gbar[(a, b)].clone()), || vec![lab(a), lab(b)]);
        }
    }
    let mut t3 = Tracker::<S>::with_tol("Phi_minus_d_eta", s.tol());
    for a in 0..d {
        for b in 0..d {
            t3.track(&(s.big_phi[(a, b)].clone() - s.d_eta[(a, b)].clone()), || vec![lab(a), lab(b)]);
        }
    }
    let mut t4 = Tracker::<S>::with_tol("d_Phi", s.tol());
    let dphi = d_of_2form(&s.conn, &s.big_phi);
    for a in 0..d {
        for b in a + 1..d {
            for c in b + 1..d {
                t4.track(&dphi[(a * d + b) * d + c], || vec![lab(a), lab(b), lab(c)]);
            }
        }
    }
    let parts = [t1.finish(), t2.finish(), t3.finish(), t4.finish()];
    CheckReport::all("cone_almost_kaehler", S::MODE, &parts).with_caveats(&s.metric.model.caveats)
}

/// `J(u, l dr) = (phi u - l xi, eta(u) dr)` as a `(d+1)x(d+1)` matrix.
pub fn cone_operator<S: Scalar>(s: &AlmostContactStructure<S>) -> Mat<S> {
    let d = s.dim();
    Mat::from_fn(d + 1, d + 1, |a, b| match (a < d, b < d) {
        (true, true) => s.phi[(a, b)].clone(),
        (true, false) => -s.xi[a].clone(),
        (false, true) => s.eta[b].clone(),
        (false, false) => S::zero(),
    })
}

/// Structural facts for a contact structure: `phi xi = 0`, `eta phi = 0`,
/// `Phi` antisymmetric and `rank phi = dim - 1`.
pub fn contact_invariants<S: Scalar>(s: &AlmostContactStructure<S>) -> CheckReport {
    let d = s.dim();
    let mut t = Tracker::<S>::with_tol("contact_invariants", s.tol());
    for x in s.phi.mul_vec(&s.xi) {
        t.track(&x, || vec!["phi xi".into()]);
    }
    for x in s.phi.vec_mul(&s.eta) {
        t.track(&x, || vec!["eta phi".into()]);
    }
    for i in 0..d {
        for j in 0..d {
            t.track(&(s.big_phi[(i, j)].clone() + s.big_phi[(j, i)].clone()), || s.lab2(i, j));
        }
    }
    t.track(&(dot(&s.eta, &s.xi) - S::one()), || vec!["eta(xi)".into()]);
    if s.phi.rank(s.tol()) + 1 != d {
        t.flag(vec![format!("rank phi = {}", s.phi.rank(s.tol()))]);
    }
    t.finish()
}
