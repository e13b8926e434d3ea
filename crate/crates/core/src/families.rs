//! Metric families carrying invariant contact structures, the orthogonal
//! catalogue, Sasaki metrics, the Einstein solver and isomorphisms of
//! canonical infinitesimal models.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::contact::{build_structure, einstein_check, einstein_from_ricci, ricci_of};
use crate::error::{Error, Result};
use crate::geometry::{metric_from_blocks, BlockParams, InvariantMetric};
use crate::linalg::{vmax_abs, Mat};
use crate::models::RankOneModel;
use crate::report::{CheckReport, Tracker};
use crate::scalar::{canonical, parse_rational, Scalar, FLOAT_TOL, Q};

pub const CAVEAT_FLOAT_FALLBACK: &str = "float_fallback";
pub const CAVEAT_BETA_SIGN: &str = "beta_sign_choice";
pub const CAVEAT_TYPE_C_BOUNDARY: &str = "type_c_boundary";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyType {
    AI,
    AII,
    AIII,
    BI,
    BII,
    BIII,
    C,
}

impl FamilyType {
    pub const ALL: [FamilyType; 7] = [
        FamilyType::AI,
        FamilyType::AII,
        FamilyType::AIII,
        FamilyType::BI,
        FamilyType::BII,
        FamilyType::BIII,
        FamilyType::C,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FamilyType::AI => "AI",
            FamilyType::AII => "AII",
            FamilyType::AIII => "AIII",
            FamilyType::BI => "BI",
            FamilyType::BII => "BII",
            FamilyType::BIII => "BIII",
            FamilyType::C => "C",
        }
    }

    pub fn needs_theta(&self) -> bool {
        matches!(self, FamilyType::BI | FamilyType::BII | FamilyType::BIII | FamilyType::C)
    }

    pub fn needs_phi(&self) -> bool {
        *self == FamilyType::C
    }
}

impl fmt::Display for FamilyType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_uppercase();
        FamilyType::ALL
            .into_iter()
            .find(|f| f.name() == t)
            .ok_or_else(|| Error::Input(format!("type: unknown family `{s}`")))
    }
}

/// An angle as an exact point `(cos, sin)` on the unit circle, or in radians.
#[derive(Clone, Debug, PartialEq)]
pub enum Angle {
    Pair { c: Q, s: Q },
    Radians(f64),
}

impl Angle {
    pub fn pair(c: Q, s: Q) -> Result<Self> {
        let one: Q = Scalar::from_i64(1);
        if &c * &c + &s * &s != one {
            return Err(Error::Input(format!(
                "angle: ({}, {}) is not on the unit circle",
                canonical(&c),
                canonical(&s)
            )));
        }
        Ok(Angle::Pair { c, s })
    }

    pub fn ratio(c: (i64, i64), s: (i64, i64)) -> Self {
        Angle::pair(Q::ratio(c.0, c.1), Q::ratio(s.0, s.1)).expect("unit-circle literal")
    }

    /// `"c,s"` for an exact pair, a single number for radians.
    pub fn parse(text: &str) -> Result<Self> {
        match text.split_once(',') {
            Some((c, s)) => Angle::pair(parse_rational(c)?, parse_rational(s)?),
            None => text
                .trim()
                .parse::<f64>()
                .map(Angle::Radians)
                .map_err(|_| Error::Input(format!("angle: cannot parse `{text}`"))),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Angle::Pair { .. })
    }

    /// `(cos, sin)` in the scalar field; radians are unavailable in exact mode.
    pub fn cos_sin<S: Scalar>(&self) -> Result<(S, S)> {
        match self {
            Angle::Pair { c, s } => Ok((S::from_q(c), S::from_q(s))),
            Angle::Radians(t) => match S::MODE {
                crate::scalar::Mode::Exact => Err(Error::Unsupported("angle given in radians".into())),
                crate::scalar::Mode::Float => Ok((from_f64(t.cos()), from_f64(t.sin()))),
            },
        }
    }

    fn cos_sin_f64(&self) -> (f64, f64) {
        match self {
            Angle::Pair { c, s } => (c.to_f64(), s.to_f64()),
            Angle::Radians(t) => (t.cos(), t.sin()),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Angle::Pair { c, s } => format!("({},{})", canonical(c), canonical(s)),
            Angle::Radians(t) => format!("{t}rad"),
        }
    }
}

fn from_f64<S: Scalar>(x: f64) -> S {
    S::from_q(&Q::from_float(x).unwrap_or_default())
}

fn positive(name: &str, v: &Q) -> Result<()> {
    if v.is_positive() {
        Ok(())
    } else {
        Err(Error::Input(format!("{name}: must be > 0, got {}", canonical(v))))
    }
}

/// Exact square root, or `Unsupported` when it leaves the rationals.
fn root<S: Scalar>(x: &S, what: &str) -> Result<S> {
    if x.is_zero() {
        return Ok(S::zero());
    }
    if !x.is_positive() {
        return Err(Error::Infeasible(format!("{what} = {} is negative", canonical(x))));
    }
    x.sqrt()
        .ok_or_else(|| Error::Unsupported(format!("sqrt({what}) = sqrt({}) is irrational", canonical(x))))
}

/// A metric with its characteristic field, ready for the contact verifier.
#[derive(Clone, Debug)]
pub struct FamilyInstance<S> {
    pub label: String,
    pub params: BlockParams<S>,
    pub metric: InvariantMetric<S>,
    pub xi: Vec<S>,
    pub caveats: Vec<String>,
}

/// Float tolerance grows with the square of the entry scale.
pub fn instance_tolerance<S: Scalar>(gram: &Mat<S>, xi: &[S]) -> f64 {
    let g = gram.max_abs().0.to_f64();
    let x = vmax_abs(xi).0.to_f64();
    let s = 1f64.max(g).max(x);
    FLOAT_TOL * s * s
}

fn nbar_vector<S: Scalar>(model: &RankOneModel<S>, c: [S; 3]) -> Vec<S> {
    let b = &model.blocks;
    let mut v = vec![S::zero(); model.dim()];
    let [x, m, k] = c;
    v[b.a.start] = x;
    v[b.m_eps.start] = m;
    v[b.k_eps.start] = k;
    v
}

fn instance<S: Scalar>(
    model: &Arc<RankOneModel<S>>,
    label: String,
    params: BlockParams<S>,
    xi: Vec<S>,
    caveats: Vec<String>,
) -> Result<FamilyInstance<S>> {
    let metric = metric_from_blocks(model, &params)?;
    let tol = instance_tolerance(&metric.gram, &xi);
    let mut caveats = caveats;
    for c in &model.caveats {
        if !caveats.contains(c) {
            caveats.push(c.clone());
        }
    }
    Ok(FamilyInstance {
        label,
        params,
        metric: metric.with_tol(tol),
        xi,
        caveats,
    })
}

fn sign_scalar<S: Scalar>(sign: i8) -> S {
    if sign < 0 {
        -S::one()
    } else {
        S::one()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SphereFamilyParams {
    pub kappa: Q,
    pub q_eps: Q,
    /// Ignored when the half blocks are absent.
    pub q_half: Q,
    pub sign: i8,
}

impl SphereFamilyParams {
    pub fn new(kappa: Q, q_eps: Q) -> Self {
        SphereFamilyParams {
            kappa,
            q_eps,
            q_half: Scalar::from_i64(1),
            sign: 1,
        }
    }

    pub fn describe(&self) -> String {
        format!("kappa={} q_eps={}", canonical(&self.kappa), canonical(&self.q_eps))
    }
}

/// `(k^2, k/(2q), kq/2, k/(4q_h), k q_h/4)` with `xi = +-X/k`.
pub fn sphere_contact_family<S: Scalar>(
    model: &Arc<RankOneModel<S>>,
    p: &SphereFamilyParams,
) -> Result<FamilyInstance<S>> {
    positive("kappa", &p.kappa)?;
    positive("q_eps", &p.q_eps)?;
    if !model.blocks.m_half.is_empty() {
        positive("q_half", &p.q_half)?;
    }
    let (k, q, qh) = (S::from_q(&p.kappa), S::from_q(&p.q_eps), S::from_q(&p.q_half));
    let (two, four) = (S::from_i64(2), S::from_i64(4));
    let params = BlockParams::diagonal(
        k.sq(),
        k.clone() / (two.clone() * q.clone()),
        k.clone() * q / two,
        k.clone() / (four.clone() * qh.clone()),
        k.clone() * qh / four,
    );
    let xi = nbar_vector(model, [sign_scalar::<S>(p.sign) / k, S::zero(), S::zero()]);
    instance(model, format!("sphere family {}", p.describe()), params, xi, vec![])
}

#[derive(Clone, Debug, PartialEq)]
pub struct CpnFamilyParams {
    pub family: FamilyType,
    pub kappa: Q,
    pub q_eps: Q,
    pub q_half: Q,
    pub alpha: Q,
    pub theta: Option<Angle>,
    pub phi: Option<Angle>,
    pub sign: i8,
}

impl CpnFamilyParams {
    pub fn new(family: FamilyType, kappa: Q, q_eps: Q, q_half: Q, alpha: Q) -> Self {
        CpnFamilyParams {
            family,
            kappa,
            q_eps,
            q_half,
            alpha,
            theta: None,
            phi: None,
            sign: 1,
        }
    }

    pub fn with_theta(mut self, a: Angle) -> Self {
        self.theta = Some(a);
        self
    }

    pub fn with_phi(mut self, a: Angle) -> Self {
        self.phi = Some(a);
        self
    }

    pub fn describe(&self) -> String {
        let mut s = format!(
            "{} kappa={} q_eps={} q_half={} alpha={}",
            self.family,
            canonical(&self.kappa),
            canonical(&self.q_eps),
            canonical(&self.q_half),
            canonical(&self.alpha)
        );
        if let Some(t) = &self.theta {
            s.push_str(&format!(" theta={}", t.describe()));
        }
        if let Some(p) = &self.phi {
            s.push_str(&format!(" phi={}", p.describe()));
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        positive("kappa", &self.kappa)?;
        positive("q_eps", &self.q_eps)?;
        positive("q_half", &self.q_half)?;
        let eps = 1e-12;
        if self.family.needs_theta() {
            let t = self.theta.as_ref().ok_or_else(|| Error::Input("theta: required for this type".into()))?;
            let (c, s) = t.cos_sin_f64();
            if c.abs() <= eps || s.abs() <= eps {
                return Err(Error::Input("theta: must avoid multiples of pi/2".into()));
            }
            if self.family == FamilyType::BI {
                let bound_ok = match t {
                    Angle::Pair { s, .. } => &self.q_eps * s * s < Scalar::from_i64(1),
                    Angle::Radians(_) => self.q_eps.to_f64() * s * s < 1.0,
                };
                if !bound_ok {
                    return Err(Error::Input("q_eps: must be < 1/sin^2(theta) for type BI".into()));
                }
            }
        }
        if self.family.needs_phi() {
            let p = self.phi.as_ref().ok_or_else(|| Error::Input("phi: required for type C".into()))?;
            let (c, s) = p.cos_sin_f64();
            if c <= eps || s.abs() <= eps {
                return Err(Error::Input("phi: must lie in ]-pi/2, pi/2[ and be nonzero".into()));
            }
        }
        Ok(())
    }
}

struct Raw<S> {
    params: BlockParams<S>,
    xi: [S; 3],
    caveats: Vec<String>,
    tag: Option<String>,
}

fn raw<S: Scalar>(params: BlockParams<S>, xi: [S; 3]) -> Raw<S> {
    Raw {
        params,
        xi,
        caveats: vec![],
        tag: None,
    }
}

fn full<S: Scalar>(v: [S; 8]) -> BlockParams<S> {
    let [a0, a_eps, b_eps, a_half, b_half, a0_eps, b0_eps, c_eps] = v;
    BlockParams {
        a0,
        a_eps,
        b_eps,
        a_half,
        b_half,
        a0_eps,
        b0_eps,
        c_eps,
    }
}

fn family_blocks<S: Scalar>(p: &CpnFamilyParams) -> Result<Vec<Raw<S>>> {
    let (k, q, qh, al) = (
        S::from_q(&p.kappa),
        S::from_q(&p.q_eps),
        S::from_q(&p.q_half),
        S::from_q(&p.alpha),
    );
    let i = |n: i64| S::from_i64(n);
    let z = S::zero;
    let (c, s) = match &p.theta {
        Some(t) if p.family.needs_theta() => t.cos_sin::<S>()?,
        _ => (S::one(), S::zero()),
    };
    let (cp, sp) = match &p.phi {
        Some(t) if p.family.needs_phi() => t.cos_sin::<S>()?,
        _ => (S::one(), S::zero()),
    };
    let sg = if c.is_positive() { S::one() } else { -S::one() };
    let b_eps_a = q.clone() / (i(2) * k.clone()) * (i(4) * al.sq() + k.sq());
    let ah = k.clone() / (i(4) * qh.clone());
    let bh = k.clone() * qh.clone() / i(4);
    let out = match p.family {
        FamilyType::AI => vec![raw(
            full([k.sq(), k.clone() / (i(2) * q.clone()), b_eps_a, ah, bh, z(), z(), al]),
            [S::one() / k, z(), z()],
        )],
        FamilyType::AII => vec![raw(
            full([k.clone() / (i(2) * q.clone()), k.sq(), b_eps_a, ah, bh, z(), al, z()]),
            [z(), S::one() / k, z()],
        )],
        FamilyType::AIII => vec![raw(
            full([
                k.clone() / (i(2) * q.clone()),
                b_eps_a,
                k.sq(),
                k.clone() / i(4),
                k.clone() / i(4),
                al,
                z(),
                z(),
            ]),
            [z(), z(), S::one() / k],
        )],
        FamilyType::BI => {
            let rho2 = q.clone() * (S::one() - q.clone() * s.sq());
            let rho = root(&rho2, "q_eps(1 - q_eps sin^2 theta)")?;
            let sqq = root(&q, "q_eps")?;
            let c2 = c.sq();
            let one_q = S::one() - q.clone();
            let params = full([
                k.sq() * rho2.clone() / c2.clone(),
                k.sq() / c2.clone() * (c2.clone() + one_q.sq() * s.sq()),
                q.sq() * (k.pow_i(4) * al.sq() * rho2.clone() + s.sq() * c2.clone()) / (i(4) * rho2.clone() * s.sq()),
                k.clone() * sqq.clone() / (i(4) * qh.clone()),
                k.clone() * sqq * qh.clone() / i(4),
                -(sg.clone() * k.sq() * rho.clone() * one_q * s.clone() / c2),
                sg.clone() * al.clone() * k.pow_i(3) * q.clone() * rho.clone() / (i(2) * c.clone()),
                -(al * k.pow_i(3) * rho2 / (i(2) * s.clone() * c)),
            ]);
            vec![raw(params, [sg * rho / (q * k.clone()), s / k, z()])]
        }
        FamilyType::BII => {
            let t = s.clone() / c.clone();
            let rho = q.sq() * c.sq() + i(4) * (al.sq() * k.sq() + S::one()) * s.sq();
            let r2 = rho.sq();
            let sr = root(&rho, "q_eps^2 cos^2 theta + 4(alpha^2 kappa^2 + 1) sin^2 theta")?;
            let four_r = i(4) - rho.clone();
            let h = k.clone() * sr / (i(2) * rho.clone());
            let params = full([
                i(4) * k.sq() * q.sq() / r2.clone(),
                (r2.clone() + i(16) * al.sq() * q.sq() * k.pow_i(4) * t.sq()) / (q.sq() * r2.clone()),
                k.sq() * (S::one() + four_r.sq() * t.sq() / r2.clone() + al.sq() / q.sq()),
                h.clone(),
                h,
                i(8) * al.clone() * k.pow_i(3) * q.clone() * t.clone() / r2.clone(),
                i(2) * k.sq() * q.clone() * four_r.clone() * t.clone() / r2.clone(),
                k.clone() * al.clone() / (q.sq() * r2.clone())
                    * (i(4) * k.sq() * q.sq() * four_r * t.sq() - r2),
            ]);
            let mut r = raw(
                params,
                [q * c / (i(2) * k.clone()), s.clone() * al, s / k],
            );
            r.caveats.push(CAVEAT_BETA_SIGN.into());
            vec![r]
        }
        FamilyType::BIII => {
            let t = s.clone() / c.clone();
            let rho = c.sq() + q.sq() * s.sq();
            let r2 = rho.sq();
            let sr = root(&rho, "cos^2 theta + q_eps^2 sin^2 theta")?;
            let one_q2 = S::one() - q.sq();
            let h = k.clone() * q.clone() * sr / (i(4) * rho.clone());
            let params = full([
                q.sq() / i(4),
                k.sq() * q.sq() / r2.clone() * (S::one() + al.sq() * r2.clone() * t.sq()),
                k.sq() / r2.clone() * (r2.clone() * al.sq() + r2.clone() + one_q2.sq() * s.sq() * c.sq()),
                h.clone(),
                h,
                -(al.clone() * k.clone() * q.sq() * t.clone() / i(2)),
                al.clone() * k.clone() * q.clone() / i(2),
                -(q.clone() * k.sq() / r2.clone() * (al.sq() * r2 * t + one_q2 * s.clone() * c.clone())),
            ]);
            vec![raw(params, [z(), c / (k.clone() * q), s / k])]
        }
        FamilyType::C => type_c_blocks(&k, &q, &al, &c, &s, &cp, &sp)?,
    };
    Ok(out)
}

/// Both positive roots `delta` of `(q c cp)^2 d^2 - k^2 beta d + rho = 0`,
/// `beta = 2q/k`, each giving one metric.
fn type_c_blocks<S: Scalar>(k: &S, q: &S, al: &S, c: &S, s: &S, cp: &S, sp: &S) -> Result<Vec<Raw<S>>> {
    let i = |n: i64| S::from_i64(n);
    let rho = cp.sq() * (s.clone() - q.clone() * al.clone() * c.clone()).sq() + i(4) * q.sq() * sp.sq();
    let cc = c.sq() * cp.sq();
    let disc = k.sq() - cc.clone() * rho.clone();
    let tol = FLOAT_TOL * 1f64.max(k.to_f64().powi(2));
    if !disc.near_zero(tol) && !disc.is_positive() {
        return Err(Error::Infeasible(format!(
            "type C: rho cos^2 theta cos^2 phi = {} exceeds kappa^2",
            canonical(&(cc * rho))
        )));
    }
    let boundary = disc.near_zero(tol);
    let sd = if boundary {
        S::zero()
    } else {
        root(&disc, "kappa^2 - rho cos^2 theta cos^2 phi")?
    };
    let denom = q.clone() * cc.clone();
    let mut roots = vec![("+", (k.clone() + sd.clone()) / denom.clone())];
    if !boundary {
        roots.push(("-", (k.clone() - sd) / denom));
    }
    let k2b = i(2) * k.clone() * q.clone();
    let cot = cp.clone() / sp.clone();
    let mut out = Vec::new();
    for (tag, d) in roots {
        if !d.is_positive() {
            continue;
        }
        let g1 = cot.clone() / k2b.clone() * ((S::one() - k2b.clone() * d.clone()) * s.clone() - q.clone() * al.clone() * c.clone());
        let g2 = cot.clone() / (k2b.clone() * q.clone())
            * (q.clone() * al.clone() * s.clone() + (k2b.clone() * d.clone() - q.sq() * (al.sq() + d.sq())) * c.clone());
        let d2 = d.sq();
        let h2 = (q.sq() * d2.clone() * cc.clone() + rho.clone()) / (i(16) * d2.clone());
        let h = root(&h2, "half-block coefficient")?;
        let params = full([
            q.sq(),
            (S::one() + al.sq() * q.sq()) / d2.clone(),
            k.sq() / d2.clone() * (g1.sq() + q.sq() * g2.sq() + d2.clone()),
            h.clone(),
            h,
            -(al.clone() * q.sq() / d.clone()),
            k.clone() * q.sq() * g2.clone() / d.clone(),
            -(k.clone() / d2 * (g1.clone() + al.clone() * q.sq() * g2.clone())),
        ]);
        let xi = [
            (d.clone() * cp.clone() * (c.clone() + q.clone() * al.clone() * s.clone())
                + q.clone() * (al.clone() * g1.clone() - g2) * sp.clone())
                / (q.clone() * d.clone()),
            d.clone() * s.clone() * cp.clone() + g1 * sp.clone(),
            sp.clone() / k.clone(),
        ];
        let mut r = raw(params, xi);
        r.caveats.push(CAVEAT_BETA_SIGN.into());
        if boundary {
            r.caveats.push(CAVEAT_TYPE_C_BOUNDARY.into());
        }
        r.tag = Some(format!("delta{tag}={}", canonical(&d)));
        out.push(r);
    }
    if out.is_empty() {
        return Err(Error::Infeasible("type C: no positive root delta".into()));
    }
    Ok(out)
}

/// Every metric of the given type; Type C yields one instance per root.
pub fn cpn_family<S: Scalar>(model: &Arc<RankOneModel<S>>, p: &CpnFamilyParams) -> Result<Vec<FamilyInstance<S>>> {
    if !model.kind.is_cpn() {
        return Err(Error::Input("space: the seven families live on cpn".into()));
    }
    p.validate()?;
    let raws = family_blocks::<S>(p)?;
    raws.into_iter()
        .map(|r| {
            let sign = sign_scalar::<S>(p.sign);
            let [x, m, k] = r.xi;
            let xi = nbar_vector(model, [x * sign.clone(), m * sign.clone(), k * sign]);
            let label = match &r.tag {
                Some(t) => format!("{} {t}", p.describe()),
                None => p.describe(),
            };
            instance(model, label, r.params, xi, r.caveats)
        })
        .collect()
}

/// Models in both scalar fields; the float one is built on first use.
pub struct ModelPair {
    pub exact: Arc<RankOneModel<Q>>,
    float: std::sync::OnceLock<Arc<RankOneModel<f64>>>,
}

impl ModelPair {
    pub fn new(kind: crate::models::SpaceKind) -> Result<Self> {
        Ok(ModelPair {
            exact: Arc::new(crate::models::build_model::<Q>(kind)?),
            float: std::sync::OnceLock::new(),
        })
    }

    pub fn float(&self) -> Arc<RankOneModel<f64>> {
        self.float
            .get_or_init(|| Arc::new(crate::models::build_model::<f64>(self.exact.kind).expect("validated kind")))
            .clone()
    }
}

#[derive(Clone, Debug)]
pub enum AnyInstance {
    Exact(FamilyInstance<Q>),
    Float(FamilyInstance<f64>),
}

impl AnyInstance {
    pub fn label(&self) -> &str {
        match self {
            AnyInstance::Exact(i) => &i.label,
            AnyInstance::Float(i) => &i.label,
        }
    }

    pub fn caveats(&self) -> &[String] {
        match self {
            AnyInstance::Exact(i) => &i.caveats,
            AnyInstance::Float(i) => &i.caveats,
        }
    }
}

/// Exact when every coefficient is rational, otherwise float with the
/// `float_fallback` caveat. `force_float` skips the exact attempt.
pub fn cpn_family_auto(models: &ModelPair, p: &CpnFamilyParams, force_float: bool) -> Result<Vec<AnyInstance>> {
    if !force_float {
        match cpn_family(&models.exact, p) {
            Ok(v) => return Ok(v.into_iter().map(AnyInstance::Exact).collect()),
            Err(Error::Unsupported(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let v = cpn_family(&models.float(), p)?;
    Ok(v.into_iter()
        .map(|mut i| {
            if !force_float {
                i.caveats.push(CAVEAT_FLOAT_FALLBACK.into());
            }
            AnyInstance::Float(i)
        })
        .collect())
}

/// One row of the orthogonal catalogue.
#[derive(Clone, Debug)]
pub struct CatalogRow<S> {
    pub family: FamilyType,
    pub params: BlockParams<S>,
    /// Coefficients of `xi` on `X, mu_eps, nu_eps`.
    pub xi: [S; 3],
    pub condition: &'static str,
    pub kcontact_expected: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CatalogParams {
    pub kappa: Q,
    pub q_eps: Q,
    pub q_half: Q,
    pub theta: Angle,
    pub phi: Angle,
}

impl CatalogParams {
    pub fn describe(&self) -> String {
        format!(
            "kappa={} q_eps={} q_half={} theta={} phi={}",
            canonical(&self.kappa),
            canonical(&self.q_eps),
            canonical(&self.q_half),
            self.theta.describe(),
            self.phi.describe()
        )
    }
}

/// The seven orthogonal contact metric structures with their K-contact
/// predicates. On CP^1 the half-block condition is vacuous.
pub fn kcontact_catalog<S: Scalar>(model: &RankOneModel<S>, p: &CatalogParams) -> Result<Vec<CatalogRow<S>>> {
    if !model.kind.is_cpn() {
        return Err(Error::Input("space: the catalogue lives on cpn".into()));
    }
    positive("kappa", &p.kappa)?;
    positive("q_eps", &p.q_eps)?;
    positive("q_half", &p.q_half)?;
    let (k, q, qh) = (S::from_q(&p.kappa), S::from_q(&p.q_eps), S::from_q(&p.q_half));
    let (c, s) = p.theta.cos_sin::<S>()?;
    let (cp, sp) = p.phi.cos_sin::<S>()?;
    let i = |n: i64| S::from_i64(n);
    let z = S::zero;
    let one_q: Q = Scalar::from_i64(1);
    let half_q = Q::ratio(1, 2);
    let no_half = model.blocks.m_half.is_empty();
    let q1 = p.q_eps == one_q;
    let qh1 = no_half || p.q_half == one_q;
    let k_half = p.kappa == half_q;
    let quarter = S::ratio(1, 4);
    let eighth = S::ratio(1, 8);
    let inv_k = S::one() / k.clone();
    let diag = |v: [S; 5]| {
        let [a, b, c, d, e] = v;
        BlockParams::diagonal(a, b, c, d, e)
    };
    let ah = k.clone() / (i(4) * qh.clone());
    let bh = k.clone() * qh / i(4);
    let k4 = k.clone() / i(4);
    let a_lo = k.clone() / (i(2) * q.clone());
    let a_hi = k.clone() * q / i(2);
    Ok(vec![
        CatalogRow {
            family: FamilyType::AI,
            params: diag([k.sq(), a_lo.clone(), a_hi.clone(), ah.clone(), bh.clone()]),
            xi: [inv_k.clone(), z(), z()],
            condition: "q_eps = q_half = 1",
            kcontact_expected: q1 && qh1,
        },
        CatalogRow {
            family: FamilyType::AII,
            params: diag([a_lo.clone(), k.sq(), a_hi.clone(), ah.clone(), bh.clone()]),
            xi: [z(), inv_k.clone(), z()],
            condition: "q_eps = q_half = 1",
            kcontact_expected: q1 && qh1,
        },
        CatalogRow {
            family: FamilyType::AIII,
            params: diag([a_lo, a_hi, k.sq(), k4.clone(), k4.clone()]),
            xi: [z(), z(), inv_k.clone()],
            condition: "q_eps = 1",
            kcontact_expected: q1,
        },
        CatalogRow {
            family: FamilyType::BI,
            params: diag([k.sq(), k.sq(), quarter.clone(), ah, bh]),
            xi: [c.clone() * inv_k.clone(), s.clone() * inv_k.clone(), z()],
            condition: "kappa = 1/2, q_half = 1",
            kcontact_expected: k_half && qh1,
        },
        CatalogRow {
            family: FamilyType::BII,
            params: diag([k.sq(), quarter.clone(), k.sq(), k4.clone(), k4.clone()]),
            xi: [c.clone() * inv_k.clone(), z(), s.clone() * inv_k.clone()],
            condition: "kappa = 1/2",
            kcontact_expected: k_half,
        },
        CatalogRow {
            family: FamilyType::BIII,
            params: diag([quarter.clone(), k.sq(), k.sq(), k4.clone(), k4]),
            xi: [z(), c.clone() * inv_k.clone(), s.clone() * inv_k],
            condition: "kappa = 1/2",
            kcontact_expected: k_half,
        },
        CatalogRow {
            family: FamilyType::C,
            params: diag([quarter.clone(), quarter.clone(), quarter, eighth.clone(), eighth]),
            xi: [
                i(2) * c.clone() * cp.clone(),
                i(2) * s * cp,
                i(2) * sp,
            ],
            condition: "always",
            kcontact_expected: true,
        },
    ])
}

/// Metric and `xi` vector of a catalogue row.
pub fn catalog_instance<S: Scalar>(model: &Arc<RankOneModel<S>>, row: &CatalogRow<S>, label: &str) -> Result<FamilyInstance<S>> {
    let xi = nbar_vector(model, row.xi.clone());
    instance(model, format!("{} {label}", row.family), row.params.clone(), xi, vec![])
}

/// Metric induced by the Sasaki metric of radius `r`.
pub fn sasaki_induced_metric<S: Scalar>(model: &Arc<RankOneModel<S>>, r: &S) -> Result<InvariantMetric<S>> {
    if !r.is_positive() {
        return Err(Error::Input(format!("r: must be > 0, got {}", canonical(r))));
    }
    let r2 = r.sq();
    let p = BlockParams::diagonal(S::one(), S::one(), r2.clone(), S::one(), r2 / S::from_i64(4));
    metric_from_blocks(model, &p)
}

/// `1/(4 r^2)` times the Sasaki-induced metric.
pub fn scaled_sasaki_metric<S: Scalar>(model: &Arc<RankOneModel<S>>, r: &S) -> Result<InvariantMetric<S>> {
    let g = sasaki_induced_metric(model, r)?;
    g.scaled(&(S::one() / (S::from_i64(4) * r.sq())))
}

/// `X / sqrt(g(X,X))`.
pub fn unit_x_field<S: Scalar>(metric: &InvariantMetric<S>) -> Result<Vec<S>> {
    let d = metric.dim();
    let a0 = metric.gram[(0, 0)].clone();
    let r = root(&a0, "a0")?;
    let mut v = vec![S::zero(); d];
    v[0] = S::one() / r;
    Ok(v)
}

/// Unique invariant Einstein metric with the given `a0` on a sphere model.
pub fn einstein_solve_sphere<S: Scalar>(model: &Arc<RankOneModel<S>>, a0: &S) -> Result<InvariantMetric<S>> {
    if model.kind.is_cpn() {
        return Err(Error::Input("space: the Einstein solver covers sphere and rpn".into()));
    }
    if !a0.is_positive() {
        return Err(Error::Input(format!("a0: must be > 0, got {}", canonical(a0))));
    }
    let n = model.n() as i64;
    let t = S::from_i64(n) / S::from_i64(2 * (n - 1)) * a0.clone();
    metric_from_blocks(model, &BlockParams::sphere(a0.clone(), t.clone(), t))
}

/// `2(n-1)^3 / (n^2 a0)`.
pub fn einstein_constant_sphere<S: Scalar>(n: usize, a0: &S) -> S {
    let n = n as i64;
    S::from_i64(2 * (n - 1).pow(3)) / (S::from_i64(n * n) * a0.clone())
}

/// Case analysis behind uniqueness. Equal Ricci eigenvalues on `m_eps` and
/// `k_eps` force `a_eps = b_eps` or `a0 = (a_eps + b_eps)/(n-1)`. In the
/// second branch, with `D = a_eps - b_eps`, the remaining equation reduces
/// to `a0^2 ((n-1)^2 - n) = -(n-1) D^2`, which has no positive solution
/// with `D != 0`: the left side is positive for `n >= 3`, and for `n = 2`
/// it forces `|D| = a0 = a_eps + b_eps`, so one block vanishes. The first
/// branch gives `a_eps = n a0 / (2(n-1))`. Each step is evaluated here on
/// sample values of the closed-form eigenvalues.
pub fn einstein_case_analysis(n: usize) -> CheckReport {
    use crate::geometry::sphere_ricci_eigenvalues;
    let mut t = Tracker::<Q>::new("einstein_case_analysis");
    let nn = n as i64;
    let coef = Q::from_i64((nn - 1) * (nn - 1) - nn);
    if n >= 3 && !coef.is_positive() {
        t.flag(vec![format!("(n-1)^2 - n = {}", canonical(&coef))]);
    }
    // the factorisation of rho_eps - varrho_eps on sample metrics
    let samples = [(1, 2, 3), (2, 1, 5), (3, 7, 2), (5, 3, 3)];
    for (a, b, c) in samples {
        let p = BlockParams::sphere(Q::from_i64(a), Q::from_i64(b), Q::from_i64(c));
        let (_, re, ve) = sphere_ricci_eigenvalues::<Q>(n, &p);
        let (a0, ae, be) = (p.a0.clone(), p.a_eps.clone(), p.b_eps.clone());
        let two = Q::from_i64(2);
        let fact = (&be - &ae) * (Q::from_i64(2 * (nn - 1)) * &a0 - &two * (&ae + &be)) / (&two * &a0 * &ae * &be);
        t.track(&(re.clone() - ve.clone() - fact), || vec![format!("factorisation at ({a},{b},{c})")]);
        // second branch: a0 = (ae + be)/(n-1) with D != 0 never equalises rho0 and rho_eps
        let a0b = (&ae + &be) / Q::from_i64(nn - 1);
        let pb = BlockParams::sphere(a0b.clone(), ae.clone(), be.clone());
        let (r0, r1, _) = sphere_ricci_eigenvalues::<Q>(n, &pb);
        if ae != be && r0 == r1 {
            t.flag(vec![format!("second branch solution at ({},{},{})", canonical(&a0b), a, c)]);
        }
    }
    // first branch fixes a_eps uniquely
    for a0 in [Q::from_i64(1), Q::ratio(3, 7)] {
        let te = Q::from_i64(nn) / Q::from_i64(2 * (nn - 1)) * &a0;
        let (r0, r1, r2) = sphere_ricci_eigenvalues::<Q>(n, &BlockParams::sphere(a0.clone(), te.clone(), te));
        t.track(&(r0.clone() - r1), || vec!["first branch rho0 vs rho_eps".into()]);
        t.track(&(r0 - r2), || vec!["first branch rho0 vs varrho_eps".into()]);
    }
    t.finish()
        .with_source("a_eps = b_eps or a0 = (a_eps + b_eps)/(n-1)")
}

fn rand_q(rng: &mut ChaCha8Rng) -> Q {
    Q::ratio(rng.gen_range(1..=40), rng.gen_range(1..=12))
}

/// Random sphere metrics off the Einstein ray must all fail `Q = lambda I`.
pub fn einstein_random_rejection(model: &Arc<RankOneModel<Q>>, count: usize, seed: u64) -> Result<CheckReport> {
    let n = model.n() as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rejected = 0;
    let mut t = Tracker::<Q>::new("einstein_random_rejection");
    while rejected < count {
        let (a0, ae, be) = (rand_q(&mut rng), rand_q(&mut rng), rand_q(&mut rng));
        let want = Q::from_i64(n) / Q::from_i64(2 * (n - 1)) * &a0;
        if ae == want && be == want {
            continue;
        }
        let g = metric_from_blocks(model, &BlockParams::sphere(a0.clone(), ae.clone(), be.clone()))?;
        let (r, _) = einstein_check(&g);
        if r.passed() {
            t.flag(vec![format!(
                "accepted ({}, {}, {})",
                canonical(&a0),
                canonical(&ae),
                canonical(&be)
            )]);
        }
        rejected += 1;
    }
    Ok(t.finish().with_value(format!("{rejected} sampled")))
}

/// Scaling any single block of the Einstein metric by `1 +- 1/10` breaks `Q = lambda I`.
pub fn einstein_perturbation_check(model: &Arc<RankOneModel<Q>>, a0: &Q) -> Result<CheckReport> {
    let g = einstein_solve_sphere(model, a0)?;
    let p = g.params.clone().expect("block metric");
    let mut t = Tracker::<Q>::new("einstein_perturbation");
    for f in [Q::ratio(11, 10), Q::ratio(9, 10)] {
        for which in 0..3 {
            let mut q = p.clone();
            let slot = match which {
                0 => &mut q.a0,
                1 => &mut q.a_eps,
                _ => &mut q.b_eps,
            };
            *slot = &*slot * &f;
            let (r, _) = einstein_check(&metric_from_blocks(model, &q)?);
            if r.passed() {
                t.flag(vec![format!("block {which} scaled by {} stays Einstein", canonical(&f))]);
            }
        }
    }
    Ok(t.finish())
}

fn require_cpn<S: Scalar>(model: &RankOneModel<S>) -> Result<()> {
    if model.kind.is_cpn() {
        Ok(())
    } else {
        Err(Error::Input("space: requires cpn".into()))
    }
}

/// `(1/4, 1/4, 1/4, 1/8, 1/8)` with the triple `(2X, 2 nu_eps, 2 mu_eps)`.
pub fn three_sasakian_metric<S: Scalar>(model: &Arc<RankOneModel<S>>) -> Result<(InvariantMetric<S>, [Vec<S>; 3])> {
    require_cpn(model)?;
    let (q, e) = (S::ratio(1, 4), S::ratio(1, 8));
    let g = metric_from_blocks(model, &BlockParams::diagonal(q.clone(), q.clone(), q, e.clone(), e))?;
    let two = S::from_i64(2);
    let z = S::zero;
    let xis = [
        nbar_vector(model, [two.clone(), z(), z()]),
        nbar_vector(model, [z(), z(), two.clone()]),
        nbar_vector(model, [z(), two, z()]),
    ];
    Ok((g, xis))
}

/// The orthogonal Sasakian-Einstein metric of CP^n, equal to the 3-Sasakian one.
pub fn sasakian_einstein_cpn<S: Scalar>(model: &Arc<RankOneModel<S>>) -> Result<InvariantMetric<S>> {
    Ok(three_sasakian_metric(model)?.0)
}

/// `g_i^k`: `k^2` on one `nbar` line (`X`, `mu_eps`, `nu_eps` for `i = 1, 2, 3`),
/// `k/2` on the other two and `k/4` on the half blocks, with `xi` along the first.
pub fn g_kappa<S: Scalar>(model: &Arc<RankOneModel<S>>, i: usize, kappa: &S) -> Result<FamilyInstance<S>> {
    require_cpn(model)?;
    if !(1..=3).contains(&i) {
        return Err(Error::Input(format!("index: must be 1, 2 or 3, got {i}")));
    }
    if !kappa.is_positive() {
        return Err(Error::Input("kappa: must be > 0".into()));
    }
    let two = S::from_i64(2);
    let mut nb = [kappa.clone() / two.clone(), kappa.clone() / two.clone(), kappa.clone() / two];
    nb[i - 1] = kappa.sq();
    let h = kappa.clone() / S::from_i64(4);
    let [a, b, c] = nb;
    let params = BlockParams::diagonal(a, b, c, h.clone(), h);
    let mut x = [S::zero(), S::zero(), S::zero()];
    x[i - 1] = S::one() / kappa.clone();
    let xi = nbar_vector(model, x);
    instance(model, format!("g{i} kappa={}", canonical(kappa)), params, xi, vec![])
}

/// `Ric(mu_eps, mu_eps)` of a metric, in basis coordinates.
pub fn ricci_mu_eps<S: Scalar>(metric: &InvariantMetric<S>) -> S {
    let (_, ric) = ricci_of(metric);
    let m = metric.model.blocks.m_eps.start;
    ric.ric[(m, m)].clone()
}

/// Einstein verdict plus `Ric(mu_eps, mu_eps)`.
pub fn einstein_with_mu_eps<S: Scalar>(metric: &InvariantMetric<S>) -> (CheckReport, S) {
    let (_, ric) = ricci_of(metric);
    let m = metric.model.blocks.m_eps.start;
    let (r, _) = einstein_from_ricci(metric, &ric);
    (r, ric.ric[(m, m)].clone())
}

/// Origin data `(mbar, -[.,.]_mbar, ad_{[.,.]_h}, g)` together with `xi, phi`.
#[derive(Clone, Debug)]
pub struct InfinitesimalModel<S> {
    pub metric: InvariantMetric<S>,
    pub xi: Vec<S>,
    pub phi: Mat<S>,
}

impl<S: Scalar> InfinitesimalModel<S> {
    pub fn new(metric: &InvariantMetric<S>, xi: &[S]) -> Result<Self> {
        let s = build_structure(metric, xi)?;
        Ok(InfinitesimalModel {
            metric: metric.clone(),
            xi: s.xi,
            phi: s.phi,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.metric.model.labels
    }
}

fn col_support<S: Scalar>(l: &Mat<S>, j: usize) -> Vec<(usize, S)> {
    (0..l.rows())
        .filter(|&i| !l[(i, j)].is_zero())
        .map(|i| (i, l[(i, j)].clone()))
        .collect()
}

/// Conditions, in order: isometry, torsion `L[u,v] = [Lu,Lv]` on mbar,
/// curvature `L ad_{[u,v]_h} = ad_{[Lu,Lv]_h} L`, `L xi = xi'`, `L phi = phi' L`.
/// Stops at the first failing condition.
pub fn model_isomorphism_check<S: Scalar>(
    l: &Mat<S>,
    src: &InfinitesimalModel<S>,
    dst: &InfinitesimalModel<S>,
) -> Result<CheckReport> {
    let d = src.metric.dim();
    if l.rows() != d || l.cols() != d || dst.metric.dim() != d {
        return Err(Error::Input(format!("L: expected a {d}x{d} map between models on the same mbar")));
    }
    let tol = src.metric.tol.max(dst.metric.tol);
    let model = &src.metric.model;
    let lab = src.labels();
    let mut parts = Vec::new();
    let done = |parts: &mut Vec<CheckReport>, t: Tracker<S>| {
        let r = t.finish();
        let ok = r.passed();
        parts.push(r);
        ok
    };

    let mut t = Tracker::<S>::with_tol("isometry", tol);
    let pull = l.transpose().mul(&dst.metric.gram).mul(l);
    for i in 0..d {
        for j in i..d {
            t.track(&(pull[(i, j)].clone() - src.metric.gram[(i, j)].clone()), || vec![lab[i].clone(), lab[j].clone()]);
        }
    }
    if !done(&mut parts, t) {
        return Ok(CheckReport::all("model_isomorphism", S::MODE, &parts));
    }

    let cols: Vec<Vec<S>> = (0..d).map(|j| l.col(j)).collect();
    let mut t = Tracker::<S>::with_tol("torsion", tol);
    'tor: for i in 0..d {
        for j in i + 1..d {
            let lhs = l.mul_vec(&model.brm_dense(i, j));
            let rhs = model.bracket_mbar(&cols[i], &cols[j]);
            for (a, b) in lhs.iter().zip(&rhs) {
                t.track(&(a.clone() - b.clone()), || vec![lab[i].clone(), lab[j].clone()]);
            }
            if !t.ok() {
                break 'tor;
            }
        }
    }
    if !done(&mut parts, t) {
        return Ok(CheckReport::all("model_isomorphism", S::MODE, &parts));
    }

    let supports: Vec<Vec<(usize, S)>> = (0..d).map(|j| col_support(l, j)).collect();
    let mut t = Tracker::<S>::with_tol("curvature", tol);
    'cur: for i in 0..d {
        for j in i + 1..d {
            let lhs = l.mul(&model.adh_matrix(i, j));
            let mut ad = Mat::zeros(d, d);
            for (a, ca) in &supports[i] {
                for (b, cb) in &supports[j] {
                    let w = ca.mul_ref(cb);
                    if w.is_zero() {
                        continue;
                    }
                    ad = ad.add(&model.adh_matrix(*a, *b).scale(&w));
                }
            }
            let rhs = ad.mul(l);
            let (dev, _) = lhs.sub(&rhs).max_abs();
            t.track(&dev, || vec![lab[i].clone(), lab[j].clone()]);
            if !t.ok() {
                break 'cur;
            }
        }
    }
    if !done(&mut parts, t) {
        return Ok(CheckReport::all("model_isomorphism", S::MODE, &parts));
    }

    let mut t = Tracker::<S>::with_tol("characteristic_field", tol);
    for (k, (a, b)) in l.mul_vec(&src.xi).iter().zip(&dst.xi).enumerate() {
        t.track(&(a.clone() - b.clone()), || vec![lab[k].clone()]);
    }
    if !done(&mut parts, t) {
        return Ok(CheckReport::all("model_isomorphism", S::MODE, &parts));
    }

    let mut t = Tracker::<S>::with_tol("phi", tol);
    let diff = l.mul(&src.phi).sub(&dst.phi.mul(l));
    for i in 0..d {
        for j in 0..d {
            t.track(&diff[(i, j)], || vec![lab[i].clone(), lab[j].clone()]);
        }
    }
    done(&mut parts, t);
    Ok(CheckReport::all("model_isomorphism", S::MODE, &parts))
}

/// The map `X -> mu, mu -> -X, nu -> nu, mu^{j,a} -> (-1)^a mu^{j,a+1},
/// nu^{j,a} -> nu^{j,a}` taking Type AI data to Type AII data.
pub fn ai_to_aii_map<S: Scalar>(model: &RankOneModel<S>) -> Result<Mat<S>> {
    require_cpn(model)?;
    let d = model.dim();
    let b = &model.blocks;
    let mut l = Mat::zeros(d, d);
    l.set(b.m_eps.start, b.a.start, S::one());
    l.set(b.a.start, b.m_eps.start, -S::one());
    l.set(b.k_eps.start, b.k_eps.start, S::one());
    for j in 1..model.n() {
        for a in 0..2 {
            let s = if a == 0 { S::one() } else { -S::one() };
            l.set(model.mu_half_index(j, a + 1), model.mu_half_index(j, a), s);
            l.set(model.nu_half_index(j, a), model.nu_half_index(j, a), S::one());
        }
    }
    Ok(l)
}

/// Block-structured maps with `L a = k_eps`: `X -> +-nu_eps`, `mu_eps, nu_eps`
/// onto `X, mu_eps` in either order with signs, and on each half pair a block
/// choice, an optional swap of the `a` index and independent signs, uniform in `j`.
pub fn swap_candidates<S: Scalar>(model: &RankOneModel<S>) -> Result<Vec<(String, Mat<S>)>> {
    require_cpn(model)?;
    let d = model.dim();
    let b = &model.blocks;
    let (x, mu, nu) = (b.a.start, b.m_eps.start, b.k_eps.start);
    let sg = |k: usize| if k == 0 { S::one() } else { -S::one() };
    let pm = |k: usize| if k == 0 { '+' } else { '-' };
    let mut out = Vec::new();
    for sx in 0..2 {
        for mu_to_x in [true, false] {
            for smu in 0..2 {
                for snu in 0..2 {
                    for mh_to_k in [false, true] {
                        for mswap in 0..2 {
                            for ms in 0..4 {
                                for nswap in 0..2 {
                                    for ns in 0..4 {
                                        let mut l = Mat::zeros(d, d);
                                        l.set(nu, x, sg(sx));
                                        let (tm, tn) = if mu_to_x { (x, mu) } else { (mu, x) };
                                        l.set(tm, mu, sg(smu));
                                        l.set(tn, nu, sg(snu));
                                        for j in 1..model.n() {
                                            for a in 0..2 {
                                                let (src_m, src_n) = (model.mu_half_index(j, a), model.nu_half_index(j, a));
                                                let am = a ^ mswap;
                                                let an = a ^ nswap;
                                                let (dm, dn) = if mh_to_k {
                                                    (model.nu_half_index(j, am), model.mu_half_index(j, an))
                                                } else {
                                                    (model.mu_half_index(j, am), model.nu_half_index(j, an))
                                                };
                                                l.set(dm, src_m, sg((ms >> a) & 1));
                                                l.set(dn, src_n, sg((ns >> a) & 1));
                                            }
                                        }
                                        let name = format!(
                                            "X->{}nu mu->{}{} nu->{}{} m_half->{}{} k_half->{}",
                                            pm(sx),
                                            pm(smu),
                                            if mu_to_x { "X" } else { "mu" },
                                            pm(snu),
                                            if mu_to_x { "mu" } else { "X" },
                                            if mh_to_k { "k_half" } else { "m_half" },
                                            if mswap == 1 { " swapped" } else { "" },
                                            if nswap == 1 { "swapped" } else { "same" },
                                        );
                                        out.push((format!("{name} signs={ms}/{ns}"), l));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Every swap candidate between `g1^k` and `g3^k` must fail. The value counts
/// failures by first failing condition.
pub fn swap_candidates_report<S: Scalar>(model: &Arc<RankOneModel<S>>, kappa: &S) -> Result<CheckReport> {
    let g1 = g_kappa(model, 1, kappa)?;
    let g3 = g_kappa(model, 3, kappa)?;
    let src = InfinitesimalModel::new(&g1.metric, &g1.xi)?;
    let dst = InfinitesimalModel::new(&g3.metric, &g3.xi)?;
    let mut counts: std::collections::BTreeMap<String, usize> = Default::default();
    let mut t = Tracker::<S>::new("swap_candidates_fail");
    let cands = swap_candidates(model)?;
    let total = cands.len();
    for (name, l) in cands {
        let r = model_isomorphism_check(&l, &src, &dst)?;
        if r.passed() {
            t.flag(vec![format!("candidate passes: {name}")]);
            *counts.entry("none".into()).or_default() += 1;
        } else {
            let first = r.witness.first().cloned().unwrap_or_default();
            *counts.entry(first).or_default() += 1;
        }
    }
    let summary: Vec<String> = counts.iter().map(|(k, v)| format!("{k}:{v}")).collect();
    Ok(t.finish().with_value(format!("{total} candidates; first failure {}", summary.join(" "))))
}

/// Grid of `(kappa, q_eps)` for the sphere family, 20 points including the `q = 1` line.
pub fn sphere_grid() -> Vec<SphereFamilyParams> {
    let mut out = Vec::new();
    for k in [(1, 2), (2, 3), (1, 1), (3, 2), (2, 1)] {
        for q in [(1, 2), (1, 1), (2, 1), (3, 1)] {
            out.push(SphereFamilyParams::new(Q::ratio(k.0, k.1), Q::ratio(q.0, q.1)));
        }
    }
    out
}

/// Admissible parameter points for one family, at least 20 each.
pub fn cpn_grid(family: FamilyType) -> Vec<CpnFamilyParams> {
    let r = Q::ratio;
    let mut out = Vec::new();
    let thetas = [
        Angle::ratio((3, 5), (4, 5)),
        Angle::ratio((-5, 13), (12, 13)),
        Angle::ratio((4, 5), (-3, 5)),
        Angle::ratio((-8, 17), (-15, 17)),
    ];
    match family {
        FamilyType::AI | FamilyType::AII | FamilyType::AIII => {
            for k in [r(1, 2), r(1, 1), r(3, 2)] {
                for (q, qh) in [(r(1, 1), r(1, 1)), (r(2, 1), r(1, 1)), (r(1, 1), r(1, 3))] {
                    for al in [r(0, 1), r(1, 1), r(-2, 3)] {
                        out.push(CpnFamilyParams::new(family, k.clone(), q.clone(), qh.clone(), al));
                    }
                }
            }
        }
        FamilyType::BI => {
            // exact-friendly points (q = 1, sin = 4/5 gives rho = 3/5) and float ones
            for k in [r(1, 2), r(1, 1), r(2, 1)] {
                for th in &thetas {
                    for (q, al) in [(r(1, 1), r(0, 1)), (r(1, 1), r(1, 2)), (r(1, 2), r(1, 1))] {
                        if let Angle::Pair { s, .. } = th {
                            if &q * s * s >= r(1, 1) {
                                continue;
                            }
                        }
                        let p = CpnFamilyParams::new(family, k.clone(), q, r(1, 1), al).with_theta(th.clone());
                        out.push(p);
                    }
                }
            }
        }
        FamilyType::BII | FamilyType::BIII => {
            for k in [r(1, 2), r(1, 1), r(2, 1)] {
                for th in &thetas {
                    for (q, al) in [(r(2, 1), r(0, 1)), (r(1, 1), r(0, 1)), (r(1, 2), r(1, 1))] {
                        out.push(CpnFamilyParams::new(family, k.clone(), q, r(1, 1), al).with_theta(th.clone()));
                    }
                }
            }
        }
        FamilyType::C => {
            let phis = [Angle::ratio((3, 5), (4, 5)), Angle::ratio((12, 13), (-5, 13))];
            for (k, q) in [(r(1, 2), r(1, 2)), (r(1, 1), r(1, 2)), (r(2, 1), r(1, 1))] {
                for th in &thetas {
                    for ph in &phis {
                        for al in [r(0, 1), r(1, 3)] {
                            let p = CpnFamilyParams::new(family, k.clone(), q.clone(), r(1, 1), al)
                                .with_theta(th.clone())
                                .with_phi(ph.clone());
                            if type_c_admissible(&p) {
                                out.push(p);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// `rho cos^2 theta cos^2 phi <= kappa^2`.
pub fn type_c_admissible(p: &CpnFamilyParams) -> bool {
    let (Some(th), Some(ph)) = (&p.theta, &p.phi) else {
        return false;
    };
    let (c, s) = th.cos_sin_f64();
    let (cp, sp) = ph.cos_sin_f64();
    let (q, al, k) = (p.q_eps.to_f64(), p.alpha.to_f64(), p.kappa.to_f64());
    let rho = cp * cp * (s - q * al * c).powi(2) + 4.0 * q * q * sp * sp;
    rho * c * c * cp * cp <= k * k * (1.0 + 1e-12)
}

/// Parameter points of the catalogue grid, with boundary values of the predicates.
pub fn catalog_grid() -> Vec<CatalogParams> {
    let r = Q::ratio;
    let mut out = Vec::new();
    for k in [r(1, 2), r(1, 1), r(1, 3)] {
        for (q, qh) in [(r(1, 1), r(1, 1)), (r(1, 1), r(2, 1)), (r(2, 1), r(1, 1)), (r(1, 2), r(1, 2))] {
            out.push(CatalogParams {
                kappa: k.clone(),
                q_eps: q,
                q_half: qh,
                theta: Angle::ratio((3, 5), (4, 5)),
                phi: Angle::ratio((5, 13), (12, 13)),
            });
        }
    }
    out
}

impl<S: Scalar> FamilyInstance<S> {
    pub fn describe_xi(&self) -> String {
        let labels = &self.metric.model.labels;
        let terms: Vec<String> = self
            .xi
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("{}*{}", canonical(c), labels[i]))
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::{contact_check, kcontact_check, sasakian_check};
    use crate::models::{build_model, SpaceKind};

    fn cpn(n: usize) -> Arc<RankOneModel<Q>> {
        Arc::new(build_model::<Q>(SpaceKind::ComplexProjective(n)).unwrap())
    }

    fn contact_ok<S: Scalar>(inst: &FamilyInstance<S>) -> bool {
        let s = build_structure(&inst.metric, &inst.xi).unwrap();
        contact_check(&s).passed()
    }

    #[test]
    fn type_ai_example_coefficients() {
        let m = cpn(2);
        let p = CpnFamilyParams::new(FamilyType::AI, Q::from_i64(1), Q::from_i64(1), Q::from_i64(1), Q::from_i64(1));
        let inst = cpn_family(&m, &p).unwrap().remove(0);
        let b = &inst.params;
        assert_eq!(
            [&b.a0, &b.a_eps, &b.b_eps, &b.c_eps, &b.a_half, &b.b_half],
            [&Q::from_i64(1), &Q::ratio(1, 2), &Q::ratio(5, 2), &Q::from_i64(1), &Q::ratio(1, 4), &Q::ratio(1, 4)]
        );
        assert!(contact_ok(&inst));
    }

    #[test]
    fn every_family_is_contact_on_cp2_samples() {
        let models = ModelPair::new(SpaceKind::ComplexProjective(2)).unwrap();
        for f in FamilyType::ALL {
            for p in cpn_grid(f).into_iter().step_by(5) {
                for inst in cpn_family_auto(&models, &p, false).unwrap() {
                    let ok = match &inst {
                        AnyInstance::Exact(i) => contact_ok(i),
                        AnyInstance::Float(i) => contact_ok(i),
                    };
                    assert!(ok, "{}", inst.label());
                }
            }
        }
    }

    #[test]
    fn type_c_orthogonal_point_is_catalogue_row() {
        // the second root delta = 320/9 has an irrational half block, so compare in floats
        let m = Arc::new(build_model::<f64>(SpaceKind::ComplexProjective(2)).unwrap());
        let p = CpnFamilyParams::new(FamilyType::C, Q::ratio(1, 2), Q::ratio(1, 2), Q::from_i64(1), Q::from_i64(0))
            .with_theta(Angle::ratio((3, 5), (4, 5)))
            .with_phi(Angle::ratio((5, 13), (12, 13)));
        let insts = cpn_family(&m, &p).unwrap();
        assert_eq!(insts.len(), 2);
        let cat = CatalogParams {
            kappa: Q::ratio(1, 2),
            q_eps: Q::from_i64(1),
            q_half: Q::from_i64(1),
            theta: Angle::ratio((3, 5), (4, 5)),
            phi: Angle::ratio((5, 13), (12, 13)),
        };
        let row = &kcontact_catalog(&m, &cat).unwrap()[6];
        let want = metric_from_blocks(&m, &row.params).unwrap();
        let hit = insts
            .iter()
            .find(|i| i.metric.gram.sub(&want.gram).max_abs().0 < 1e-12)
            .expect("orthogonal root");
        let xi = nbar_vector(&m, row.xi.clone());
        assert!(hit.xi.iter().zip(&xi).all(|(a, b)| (a - b).abs() < 1e-12));
        for i in &insts {
            assert!(contact_ok(i), "{}", i.label);
        }
    }

    #[test]
    fn catalogue_kcontact_predicates_cp2() {
        let m = cpn(2);
        for cp in catalog_grid().into_iter().take(6) {
            for row in kcontact_catalog(&m, &cp).unwrap() {
                let inst = catalog_instance(&m, &row, "").unwrap();
                let s = build_structure(&inst.metric, &inst.xi).unwrap();
                assert!(contact_check(&s).passed(), "{} {}", row.family, cp.describe());
                let kc = kcontact_check(&s).unwrap().passed();
                assert_eq!(kc, row.kcontact_expected, "{} {}", row.family, cp.describe());
                if kc {
                    assert!(sasakian_check(&s).unwrap().passed());
                }
            }
        }
    }

    #[test]
    fn sasaki_metric_flip() {
        let m = Arc::new(build_model::<Q>(SpaceKind::Sphere(3)).unwrap());
        for (r, want) in [(Q::ratio(1, 2), true), (Q::from_i64(1), false), (Q::ratio(1, 3), false)] {
            let g = sasaki_induced_metric(&m, &r).unwrap();
            let xi = unit_x_field(&g).unwrap();
            assert_eq!(contact_check(&build_structure(&g, &xi).unwrap()).passed(), want);
        }
        let g = sasaki_induced_metric(&cpn(2), &Q::from_i64(2)).unwrap();
        let p = g.params.unwrap();
        assert_eq!((p.b_eps, p.b_half), (Q::from_i64(4), Q::from_i64(1)));
    }

    #[test]
    fn einstein_solver_n4() {
        let m = Arc::new(build_model::<Q>(SpaceKind::Sphere(4)).unwrap());
        let g = einstein_solve_sphere(&m, &Q::from_i64(1)).unwrap();
        assert_eq!(g.params.as_ref().unwrap().a_eps, Q::ratio(2, 3));
        let (r, l) = einstein_check(&g);
        assert!(r.passed());
        assert_eq!(l.unwrap(), Q::ratio(27, 8));
        assert_eq!(einstein_constant_sphere::<Q>(4, &Q::from_i64(1)), Q::ratio(27, 8));
        for n in 2..6 {
            assert!(einstein_case_analysis(n).passed());
        }
        assert!(einstein_perturbation_check(&m, &Q::from_i64(1)).unwrap().passed());
    }

    #[test]
    fn ai_aii_isomorphism_and_swaps() {
        let m = cpn(2);
        let (k, q, qh) = (Q::ratio(2, 3), Q::from_i64(2), Q::ratio(1, 3));
        let mk = |f| {
            let p = CpnFamilyParams::new(f, k.clone(), q.clone(), qh.clone(), Q::from_i64(0));
            let i = cpn_family(&m, &p).unwrap().remove(0);
            InfinitesimalModel::new(&i.metric, &i.xi).unwrap()
        };
        let (a1, a2) = (mk(FamilyType::AI), mk(FamilyType::AII));
        let l = ai_to_aii_map(&m).unwrap();
        let r = model_isomorphism_check(&l, &a1, &a2).unwrap();
        assert!(r.passed(), "{r:?}");
        let id = Mat::identity(m.dim());
        assert!(model_isomorphism_check(&id, &a1, &a1).unwrap().passed());
        assert!(!model_isomorphism_check(&id, &a1, &a2).unwrap().passed());
        assert_eq!(swap_candidates(&m).unwrap().len(), 2048);
        let rep = swap_candidates_report(&m, &Q::from_i64(1)).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn g_kappa_ricci_mu_eps() {
        for n in [1usize, 2] {
            let m = cpn(n);
            for (k, i) in [(Q::from_i64(1), 1), (Q::ratio(1, 3), 3)] {
                let inst = g_kappa(&m, i, &k).unwrap();
                let (r, mu) = einstein_with_mu_eps(&inst.metric);
                assert!(!r.passed());
                assert_eq!(mu, Q::from_i64(n as i64) - k.clone());
            }
        }
    }
}
