//! Explicit reductive models `g = h + mbar` for spheres, real and complex
//! projective spaces.

use std::fmt;
use std::ops::Range;

use serde::Serialize;

use crate::classical::{so_algebra, so_element, su_algebra, su_element, SuGen};
use crate::error::{Error, Result};
use crate::lie::{dense, sparse, LieAlgebra, SVec, Subspace};
use crate::linalg::{axpy, dot, unit, vscale, Mat};
use crate::scalar::Scalar;

pub const CAVEAT_COMPONENT_GROUP: &str = "component_group_unchecked";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "n")]
pub enum SpaceKind {
    Sphere(usize),
    RealProjective(usize),
    ComplexProjective(usize),
}

impl SpaceKind {
    pub fn parse(space: &str, n: usize) -> Result<Self> {
        let kind = match space.trim().to_ascii_lowercase().as_str() {
            "sphere" | "s" => SpaceKind::Sphere(n),
            "rpn" | "real-projective" | "rp" => SpaceKind::RealProjective(n),
            "cpn" | "complex-projective" | "cp" => SpaceKind::ComplexProjective(n),
            other => return Err(Error::Input(format!("space: unknown value `{other}`"))),
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn n(&self) -> usize {
        match *self {
            SpaceKind::Sphere(n) | SpaceKind::RealProjective(n) | SpaceKind::ComplexProjective(n) => n,
        }
    }

    pub fn is_cpn(&self) -> bool {
        matches!(self, SpaceKind::ComplexProjective(_))
    }

    pub fn short_name(&self) -> &'static str {
        match self {
            SpaceKind::Sphere(_) => "sphere",
            SpaceKind::RealProjective(_) => "rpn",
            SpaceKind::ComplexProjective(_) => "cpn",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SpaceKind::Sphere(n) | SpaceKind::RealProjective(n) if n < 2 => {
                Err(Error::Input(format!("n: must be >= 2 for {}, got {n}", self.short_name())))
            }
            SpaceKind::ComplexProjective(0) => Err(Error::Input("n: must be >= 1 for cpn".into())),
            _ => Ok(()),
        }
    }

    /// Multiplicities `(m_eps, m_half)`.
    pub fn multiplicities(&self) -> (usize, usize) {
        match *self {
            SpaceKind::Sphere(n) | SpaceKind::RealProjective(n) => (n - 1, 0),
            SpaceKind::ComplexProjective(n) => (1, 2 * n - 2),
        }
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceKind::Sphere(n) => write!(f, "S^{n}"),
            SpaceKind::RealProjective(n) => write!(f, "RP^{n}"),
            SpaceKind::ComplexProjective(n) => write!(f, "CP^{n}"),
        }
    }
}

/// Index ranges of the five blocks inside the ordered mbar basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Blocks {
    pub a: Range<usize>,
    pub m_eps: Range<usize>,
    pub k_eps: Range<usize>,
    pub m_half: Range<usize>,
    pub k_half: Range<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockName {
    H,
    A,
    MEps,
    KEps,
    MHalf,
    KHalf,
}

impl Blocks {
    pub fn of(&self, i: usize) -> BlockName {
        if self.a.contains(&i) {
            BlockName::A
        } else if self.m_eps.contains(&i) {
            BlockName::MEps
        } else if self.k_eps.contains(&i) {
            BlockName::KEps
        } else if self.m_half.contains(&i) {
            BlockName::MHalf
        } else {
            BlockName::KHalf
        }
    }

    pub fn range(&self, b: BlockName) -> Range<usize> {
        match b {
            BlockName::H => 0..0,
            BlockName::A => self.a.clone(),
            BlockName::MEps => self.m_eps.clone(),
            BlockName::KEps => self.k_eps.clone(),
            BlockName::MHalf => self.m_half.clone(),
            BlockName::KHalf => self.k_half.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RankOneModel<S> {
    pub kind: SpaceKind,
    pub algebra: LieAlgebra<S>,
    pub k: Subspace<S>,
    pub m: Subspace<S>,
    pub a: Subspace<S>,
    pub h: Subspace<S>,
    pub m_eps: Subspace<S>,
    pub k_eps: Subspace<S>,
    pub m_half: Subspace<S>,
    pub k_half: Subspace<S>,
    pub mbar: Subspace<S>,
    pub nbar: Subspace<S>,
    pub x: Vec<S>,
    pub mu_eps: Vec<Vec<S>>,
    pub nu_eps: Vec<Vec<S>>,
    pub mu_half: Vec<Vec<S>>,
    pub nu_half: Vec<Vec<S>>,
    /// Ordered mbar basis `X; mu_eps; nu_eps; mu_half; nu_half` in algebra coordinates.
    pub basis: Vec<Vec<S>>,
    pub labels: Vec<String>,
    pub blocks: Blocks,
    covectors: Vec<Vec<S>>,
    /// mbar coordinates of `[e_i, e_j]`, indexed `i * d + j`.
    brm: Vec<SVec<S>>,
    /// h-part of `[e_i, e_j]` in algebra coordinates.
    hpart: Vec<Vec<S>>,
    /// Columns of `ad([e_i, e_j]_h)` on mbar.
    adh: Vec<Vec<SVec<S>>>,
    /// `ad(w)` on mbar for each basis vector `w` of h.
    pub h_actions: Vec<Mat<S>>,
    pub caveats: Vec<String>,
}

impl<S: Scalar> RankOneModel<S> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn n(&self) -> usize {
        self.kind.n()
    }

    /// mbar coordinates of an algebra vector (the mbar basis is orthonormal).
    pub fn to_mbar(&self, v: &[S]) -> Vec<S> {
        self.covectors.iter().map(|c| dot(c, v)).collect()
    }

    pub fn from_mbar(&self, c: &[S]) -> Vec<S> {
        let mut v = vec![S::zero(); self.algebra.dim()];
        for (ci, b) in c.iter().zip(&self.basis) {
            axpy(&mut v, ci, b);
        }
        v
    }

    /// Splits an algebra vector into mbar coordinates and its h-part.
    pub fn split(&self, v: &[S]) -> (Vec<S>, Vec<S>) {
        let c = self.to_mbar(v);
        let mut h = v.to_vec();
        for (ci, b) in c.iter().zip(&self.basis) {
            axpy(&mut h, &-ci.clone(), b);
        }
        (c, h)
    }

    pub fn brm(&self, i: usize, j: usize) -> &SVec<S> {
        &self.brm[i * self.dim() + j]
    }

    pub fn hpart(&self, i: usize, j: usize) -> &[S] {
        &self.hpart[i * self.dim() + j]
    }

    /// Column `k` of `ad([e_i, e_j]_h)` on mbar.
    pub fn adh(&self, i: usize, j: usize, k: usize) -> &SVec<S> {
        &self.adh[i * self.dim() + j][k]
    }

    pub fn adh_matrix(&self, i: usize, j: usize) -> Mat<S> {
        let d = self.dim();
        let cols: Vec<Vec<S>> = (0..d).map(|k| dense(d, self.adh(i, j, k))).collect();
        Mat::from_cols(d, &cols)
    }

    pub fn brm_dense(&self, i: usize, j: usize) -> Vec<S> {
        dense(self.dim(), self.brm(i, j))
    }

    /// `[u, v]_mbar` for mbar coordinate vectors.
    pub fn bracket_mbar(&self, u: &[S], v: &[S]) -> Vec<S> {
        let d = self.dim();
        let mut out = vec![S::zero(); d];
        for (i, ui) in u.iter().enumerate() {
            if ui.is_zero() {
                continue;
            }
            for (j, vj) in v.iter().enumerate() {
                if vj.is_zero() {
                    continue;
                }
                let c = ui.mul_ref(vj);
                for (k, b) in self.brm(i, j) {
                    out[*k].add_mul(&c, b);
                }
            }
        }
        out
    }

    /// Index of `mu^{j,a}` (CP^n, `1 <= j <= n-1`, `a` mod 2).
    pub fn mu_half_index(&self, j: usize, a: usize) -> usize {
        self.blocks.m_half.start + 2 * (j - 1) + a % 2
    }

    pub fn nu_half_index(&self, j: usize, a: usize) -> usize {
        self.blocks.k_half.start + 2 * (j - 1) + a % 2
    }

    pub fn mu_eps_index(&self, j: usize) -> usize {
        self.blocks.m_eps.start + j - 1
    }

    pub fn nu_eps_index(&self, j: usize) -> usize {
        self.blocks.k_eps.start + j - 1
    }

    /// Algebra vector `B^a_{jk}` (CP^n) or `B^0_{jk}` (sphere), any index order.
    pub fn b_element(&self, a: u8, j: usize, k: usize) -> Vec<S> {
        match self.kind {
            SpaceKind::ComplexProjective(n) => {
                su_element(n, &[(S::one(), SuGen::B(a, j, k))])
            }
            _ => so_element(self.n(), j, k),
        }
    }

    /// Algebra vector of `sum c_i D_i` for a trace-free diagonal (CP^n only).
    pub fn diagonal_element(&self, terms: &[(usize, S)]) -> Vec<S> {
        let n = self.n();
        let gens: Vec<(S, SuGen)> = terms
            .iter()
            .map(|(i, c)| (c.clone(), SuGen::A(*i, n + 1)))
            .collect();
        su_element(n, &gens)
    }

    pub fn is_invariant_vector(&self, v_mbar: &[S], tol: f64) -> bool {
        self.h_actions
            .iter()
            .all(|m| m.mul_vec(v_mbar).iter().all(|c| c.near_zero(tol)))
    }

    pub fn summary(&self) -> ModelSummary {
        let (me, mh) = self.kind.multiplicities();
        ModelSummary {
            space: self.kind.short_name().to_string(),
            n: self.n(),
            algebra: self.algebra.name.clone(),
            dim_g: self.algebra.dim(),
            dim_mbar: self.dim(),
            dim_h: self.h.dim(),
            multiplicities: [me, mh],
            block_dims: [
                self.blocks.a.len(),
                self.blocks.m_eps.len(),
                self.blocks.k_eps.len(),
                self.blocks.m_half.len(),
                self.blocks.k_half.len(),
            ],
            labels: self.labels.clone(),
            caveats: self.caveats.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ModelSummary {
    pub space: String,
    pub n: usize,
    pub algebra: String,
    pub dim_g: usize,
    pub dim_mbar: usize,
    pub dim_h: usize,
    pub multiplicities: [usize; 2],
    pub block_dims: [usize; 5],
    pub labels: Vec<String>,
    pub caveats: Vec<String>,
}

pub fn build_model<S: Scalar>(kind: SpaceKind) -> Result<RankOneModel<S>> {
    kind.validate()?;
    match kind {
        SpaceKind::Sphere(n) => build_sphere(kind, n, vec![]),
        SpaceKind::RealProjective(n) => build_sphere(kind, n, vec![CAVEAT_COMPONENT_GROUP.to_string()]),
        SpaceKind::ComplexProjective(n) => build_cpn(n),
    }
}

fn basis_subspace<S: Scalar>(g: &LieAlgebra<S>, idx: impl Iterator<Item = usize>) -> Subspace<S> {
    Subspace {
        ambient: g.dim(),
        basis: idx.map(|i| unit(g.dim(), i)).collect(),
    }
}

fn build_sphere<S: Scalar>(kind: SpaceKind, n: usize, caveats: Vec<String>) -> Result<RankOneModel<S>> {
    let g = so_algebra::<S>(n);
    let big = n + 1;
    let idx = |j, k| crate::classical::so_index(n, j, k);
    let k = basis_subspace(&g, (2..=big).flat_map(|j| (j + 1..=big).map(move |k| (j, k))).map(|(j, k)| idx(j, k)));
    let m = basis_subspace(&g, (2..=big).map(|k| idx(1, k)));
    let x = so_element::<S>(n, 1, 2);
    let mu: Vec<Vec<S>> = (1..n).map(|j| so_element(n, 1, 2 + j)).collect();
    let nu: Vec<Vec<S>> = (1..n).map(|j| so_element(n, 2, 2 + j)).collect();
    let mut labels = vec!["X".to_string()];
    labels.extend((1..n).map(|j| format!("mu^{j}")));
    labels.extend((1..n).map(|j| format!("nu^{j}")));
    assemble(kind, g, k, m, x, mu, nu, vec![], vec![], labels, caveats)
}

fn build_cpn<S: Scalar>(n: usize) -> Result<RankOneModel<S>> {
    let g = su_algebra::<S>(n);
    let big = n + 1;
    let bidx = |a, j, k| crate::classical::su_b_index(n, a, j, k);
    let mut kidx: Vec<usize> = (0..n).collect();
    for j in 2..=big {
        for k in j + 1..=big {
            kidx.push(bidx(0, j, k));
            kidx.push(bidx(1, j, k));
        }
    }
    let k = basis_subspace(&g, kidx.into_iter());
    let m = basis_subspace(&g, (2..=big).flat_map(|k| [bidx(0, 1, k), bidx(1, 1, k)]));
    let half = S::half();
    let el = |terms: &[(S, SuGen)]| su_element::<S>(n, terms);
    let x = el(&[(half.clone(), SuGen::B(0, 1, 2))]);
    let mu_eps = vec![el(&[(half.clone(), SuGen::B(1, 1, 2))])];
    let nu_eps = vec![el(&[(-half.clone(), SuGen::A(1, 2))])];
    let mut mu_half = Vec::new();
    let mut nu_half = Vec::new();
    let mut labels = vec!["X".to_string(), "mu_eps".to_string(), "nu_eps".to_string()];
    let mut nu_labels = Vec::new();
    for j in 1..n {
        for a in 0..2u8 {
            mu_half.push(el(&[(half.clone(), SuGen::B(a, 1, j + 2))]));
            nu_half.push(el(&[(half.clone(), SuGen::B(a, 2, j + 2))]));
            labels.push(format!("mu^{{{j},{a}}}"));
            nu_labels.push(format!("nu^{{{j},{a}}}"));
        }
    }
    labels.extend(nu_labels);
    let kind = SpaceKind::ComplexProjective(n);
    assemble(kind, g, k, m, x, mu_eps, nu_eps, mu_half, nu_half, labels, vec![])
}

#[allow(clippy::too_many_arguments)]
fn assemble<S: Scalar>(
    kind: SpaceKind,
    g: LieAlgebra<S>,
    k: Subspace<S>,
    m: Subspace<S>,
    x: Vec<S>,
    mu_eps: Vec<Vec<S>>,
    nu_eps: Vec<Vec<S>>,
    mu_half: Vec<Vec<S>>,
    nu_half: Vec<Vec<S>>,
    labels: Vec<String>,
    caveats: Vec<String>,
) -> Result<RankOneModel<S>> {
    let dg = g.dim();
    let a = Subspace::new(dg, vec![x.clone()])?;
    let minus_one = -S::one();
    let minus_quarter = S::ratio(-1, 4);
    let m_eps = g.eigenspace_of_ad_squared(&x, &minus_one, &m)?;
    let k_eps = g.eigenspace_of_ad_squared(&x, &minus_one, &k)?;
    let m_half = g.eigenspace_of_ad_squared(&x, &minus_quarter, &m)?;
    let k_half = g.eigenspace_of_ad_squared(&x, &minus_quarter, &k)?;
    let h = g.eigenspace_of_ad_squared(&x, &S::zero(), &k)?;

    let mut basis = vec![x.clone()];
    basis.extend(mu_eps.iter().cloned());
    basis.extend(nu_eps.iter().cloned());
    basis.extend(mu_half.iter().cloned());
    basis.extend(nu_half.iter().cloned());
    let d = basis.len();
    let e = mu_eps.len();
    let p = mu_half.len();
    let blocks = Blocks {
        a: 0..1,
        m_eps: 1..1 + e,
        k_eps: 1 + e..1 + 2 * e,
        m_half: 1 + 2 * e..1 + 2 * e + p,
        k_half: 1 + 2 * e + p..d,
    };
    let mbar = Subspace::new(dg, basis.clone())?;
    let mut nb = vec![x.clone()];
    nb.extend(mu_eps.iter().cloned());
    nb.extend(nu_eps.iter().cloned());
    let nbar = Subspace::new(dg, nb)?;
    let covectors: Vec<Vec<S>> = basis.iter().map(|b| g.form.vec_mul(b)).collect();

    let mut model = RankOneModel {
        kind,
        algebra: g,
        k,
        m,
        a,
        h,
        m_eps,
        k_eps,
        m_half,
        k_half,
        mbar,
        nbar,
        x,
        mu_eps,
        nu_eps,
        mu_half,
        nu_half,
        basis,
        labels,
        blocks,
        covectors,
        brm: Vec::new(),
        hpart: Vec::new(),
        adh: Vec::new(),
        h_actions: Vec::new(),
        caveats,
    };

    let mut brm = vec![Vec::new(); d * d];
    let mut hpart = vec![vec![S::zero(); dg]; d * d];
    let mut adh = vec![vec![Vec::new(); d]; d * d];
    for i in 0..d {
        for j in i + 1..d {
            let b = model.algebra.br(&model.basis[i], &model.basis[j]);
            let (c, hp) = model.split(&b);
            let cols: Vec<SVec<S>> = if hp.iter().all(|v| v.is_zero()) {
                vec![Vec::new(); d]
            } else {
                (0..d)
                    .map(|kk| sparse(&model.to_mbar(&model.algebra.br(&hp, &model.basis[kk]))))
                    .collect()
            };
            let neg_cols = cols
                .iter()
                .map(|c| c.iter().map(|(i, v)| (*i, -v.clone())).collect())
                .collect();
            brm[i * d + j] = sparse(&c);
            brm[j * d + i] = sparse(&vscale(&minus_one, &c));
            hpart[j * d + i] = vscale(&minus_one, &hp);
            hpart[i * d + j] = hp;
            adh[i * d + j] = cols;
            adh[j * d + i] = neg_cols;
        }
    }
    model.brm = brm;
    model.hpart = hpart;
    model.adh = adh;
    model.h_actions = model
        .h
        .basis
        .iter()
        .map(|w| {
            let cols: Vec<Vec<S>> = (0..d)
                .map(|kk| model.to_mbar(&model.algebra.br(w, &model.basis[kk])))
                .collect();
            Mat::from_cols(d, &cols)
        })
        .collect();
    Ok(model)
}

/// Ad(h)-invariant vectors of mbar, in algebra coordinates.
pub fn invariant_vector_space<S: Scalar>(model: &RankOneModel<S>) -> Subspace<S> {
    let c = invariant_mbar_coords(model);
    Subspace {
        ambient: model.algebra.dim(),
        basis: c.iter().map(|v| model.from_mbar(v)).collect(),
    }
}

/// Ad(h)-invariant vectors of mbar, in mbar coordinates.
pub fn invariant_mbar_coords<S: Scalar>(model: &RankOneModel<S>) -> Vec<Vec<S>> {
    let d = model.dim();
    if model.h_actions.is_empty() {
        return (0..d).map(|i| unit(d, i)).collect();
    }
    let rows = model.h_actions.len() * d;
    let stacked = Mat::from_fn(rows, d, |r, c| model.h_actions[r / d][(r % d, c)].clone());
    stacked.kernel(crate::scalar::FLOAT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Q;

    #[test]
    fn sphere3_dimensions() {
        let m = build_model::<Q>(SpaceKind::Sphere(3)).unwrap();
        assert_eq!(m.algebra.dim(), 6);
        assert_eq!(m.dim(), 5);
        assert_eq!(m.h.dim(), 1);
        assert_eq!(m.m_half.dim(), 0);
        assert_eq!(invariant_vector_space(&m).dim(), 1);
    }

    #[test]
    fn cp2_dimensions() {
        let m = build_model::<Q>(SpaceKind::ComplexProjective(2)).unwrap();
        let s = m.summary();
        assert_eq!(s.block_dims, [1, 1, 1, 2, 2]);
        assert_eq!(s.dim_mbar, 7);
        assert_eq!(s.dim_h, 1);
        assert_eq!(invariant_vector_space(&m).dim(), 3);
    }

    #[test]
    fn cp1_has_trivial_h() {
        let m = build_model::<Q>(SpaceKind::ComplexProjective(1)).unwrap();
        assert_eq!(m.dim(), 3);
        assert_eq!(m.h.dim(), 0);
        assert_eq!(invariant_vector_space(&m).dim(), 3);
    }

    #[test]
    fn rpn_carries_caveat() {
        let m = build_model::<Q>(SpaceKind::RealProjective(3)).unwrap();
        assert_eq!(m.caveats, vec![CAVEAT_COMPONENT_GROUP.to_string()]);
    }

    #[test]
    fn rejects_small_n() {
        assert!(build_model::<Q>(SpaceKind::Sphere(1)).is_err());
        assert!(build_model::<Q>(SpaceKind::ComplexProjective(0)).is_err());
    }

    #[test]
    fn mbar_basis_is_orthonormal() {
        for kind in [SpaceKind::Sphere(4), SpaceKind::ComplexProjective(3)] {
            let m = build_model::<Q>(kind).unwrap();
            for i in 0..m.dim() {
                for j in 0..m.dim() {
                    let want = if i == j { Q::from_i64(1) } else { Q::from_i64(0) };
                    assert_eq!(m.algebra.inner(&m.basis[i], &m.basis[j]), want);
                }
                for w in &m.h.basis {
                    assert_eq!(m.algebra.inner(&m.basis[i], w), Q::from_i64(0));
                }
            }
        }
    }
}
