//! Task runners behind the CLI and the report they assemble.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{Format, MetricArgs, RunConfig, Task};
use crate::contact::{
    build_structure, cone_check, contact_check, contact_invariants, einstein_check, kcontact_check,
    normalized_structure, ricci_of, sasakian_check, sasakian_einstein_check, three_sasakian_check,
};
use crate::error::{Error, Result};
use crate::families::{
    ai_to_aii_map, catalog_grid, catalog_instance, cpn_family, cpn_family_auto, cpn_grid, einstein_case_analysis,
    einstein_constant_sphere, einstein_perturbation_check, einstein_random_rejection, einstein_solve_sphere,
    einstein_with_mu_eps, g_kappa, instance_tolerance, sasaki_induced_metric, scaled_sasaki_metric,
    sphere_contact_family, sphere_grid, swap_candidates_report, kcontact_catalog, three_sasakian_metric,
    unit_x_field, AnyInstance, CatalogParams, CpnFamilyParams, FamilyInstance, FamilyType, InfinitesimalModel,
    ModelPair, SphereFamilyParams, CAVEAT_FLOAT_FALLBACK,
};
use crate::geometry::{
    constant_curvature_check, curvature, levi_civita, metric_from_blocks, ricci, sphere_closed_form_check,
    u_cross_check, xi_sectional_check, xi_sectional_constant, BlockParams, InvariantMetric,
};
use crate::linalg::Mat;
use crate::models::{ModelSummary, RankOneModel};
use crate::report::{CheckReport, Tracker, Verdict};
use crate::scalar::{canonical, Mode, Scalar, FLOAT_TOL, Q};
use crate::tables::bracket_table_reports;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct ReportItem {
    pub subject: String,
    pub required: bool,
    #[serde(flatten)]
    pub check: CheckReport,
}

/// One catalogue row as emitted in CSV, in table column order.
#[derive(Clone, Debug, Serialize)]
pub struct CatalogLine {
    #[serde(rename = "type")]
    pub family: String,
    pub a0: String,
    pub a_eps: String,
    pub b_eps: String,
    pub a_half: String,
    pub b_half: String,
    pub xi: String,
    pub kcontact_condition: String,
    pub kcontact_predicted: bool,
    pub contact: Verdict,
    pub kcontact: Verdict,
    pub params: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub checks: usize,
    pub required: usize,
    pub required_failed: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub task: Task,
    pub passed: bool,
    pub summary: Summary,
    pub model: ModelSummary,
    pub params: BTreeMap<String, String>,
    pub results: BTreeMap<String, String>,
    pub items: Vec<ReportItem>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<CatalogLine>>,
}

impl RunReport {
    /// 0 when every required check passed, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            2
        }
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Input(format!("json: {e}")))?;
                s.push('\n');
                Ok(s)
            }
            Format::Csv => self.to_csv(),
            Format::Text => Ok(self.to_text()),
        }
    }

    fn to_csv(&self) -> Result<String> {
        let csv_err = |e: csv::Error| Error::Input(format!("csv: {e}"));
        let mut w = csv::Writer::from_writer(Vec::new());
        match &self.table {
            Some(lines) => {
                for l in lines {
                    w.serialize(l).map_err(csv_err)?;
                }
            }
            None => {
                w.write_record([
                    "subject", "check", "required", "verdict", "residual", "value", "source", "caveats", "witness",
                ])
                .map_err(csv_err)?;
                for it in &self.items {
                    let c = &it.check;
                    w.write_record([
                        it.subject.as_str(),
                        c.name.as_str(),
                        if it.required { "true" } else { "false" },
                        verdict_str(c.verdict),
                        &c.residual.to_string(),
                        c.value.as_deref().unwrap_or(""),
                        c.source.as_deref().unwrap_or(""),
                        &c.caveats.join(";"),
                        &c.witness.join(";"),
                    ])
                    .map_err(csv_err)?;
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Input(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Input(format!("csv: {e}")))
    }

    fn to_text(&self) -> String {
        let mut s = format!(
            "task {}  space {} n={}  dim mbar {}\n",
            self.task, self.model.space, self.model.n, self.model.dim_mbar
        );
        for (k, v) in &self.params {
            s.push_str(&format!("  {k} = {v}\n"));
        }
        for it in &self.items {
            let c = &it.check;
            s.push_str(&format!(
                "{} {}{} :: {}  residual {}",
                verdict_str(c.verdict).to_uppercase(),
                if it.required { "" } else { "(info) " },
                it.subject,
                c.name,
                c.residual
            ));
            if let Some(v) = &c.value {
                s.push_str(&format!("  value {v}"));
            }
            if !c.passed() && !c.witness.is_empty() {
                s.push_str(&format!("  at {}", c.witness.join(" ")));
            }
            if !c.caveats.is_empty() {
                s.push_str(&format!("  [{}]", c.caveats.join(", ")));
            }
            s.push('\n');
        }
        if let Some(lines) = &self.table {
            s.push_str("type  a0  a_eps  b_eps  a_half  b_half  xi  K-contact iff  predicted  contact  K-contact\n");
            for l in lines {
                s.push_str(&format!(
                    "{}  {}  {}  {}  {}  {}  {}  {}  {}  {}  {}\n",
                    l.family,
                    l.a0,
                    l.a_eps,
                    l.b_eps,
                    l.a_half,
                    l.b_half,
                    l.xi,
                    l.kcontact_condition,
                    l.kcontact_predicted,
                    verdict_str(l.contact),
                    verdict_str(l.kcontact)
                ));
            }
        }
        for (k, v) in &self.results {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s.push_str(&format!(
            "result {}  ({} checks, {} required, {} required failed)\n",
            if self.passed { "PASS" } else { "FAIL" },
            self.summary.checks,
            self.summary.required,
            self.summary.required_failed
        ));
        s
    }
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
    }
}

/// Pass/fail report carrying no residual of its own.
fn verdict<S: Scalar>(name: &str, ok: bool, witness: Vec<String>) -> CheckReport {
    let mut t = Tracker::<S>::new(name);
    if !ok {
        t.flag(witness);
    }
    t.finish()
}

/// Passes iff `actual` has the expected verdict.
fn expect(name: &str, actual: &CheckReport, want: bool, mode: Mode) -> CheckReport {
    if actual.passed() == want {
        let mut r = CheckReport::all(name, mode, &[]);
        r.value = Some(format!("{} {}", actual.name, if want { "holds" } else { "fails" }));
        r.caveats = actual.caveats.clone();
        r
    } else {
        let mut w = vec![format!("{} {}", actual.name, if want { "fails" } else { "holds" })];
        w.extend(actual.witness.iter().cloned());
        CheckReport::failure(name, mode, w).with_caveats(&actual.caveats)
    }
}

/// Contact, structural invariants, K-contact, Sasakian and cone verdicts.
#[derive(Clone, Debug)]
pub struct StructureChecks {
    pub contact: CheckReport,
    pub invariants: CheckReport,
    pub kcontact: CheckReport,
    pub sasakian: CheckReport,
    pub cone: CheckReport,
}

impl StructureChecks {
    pub fn all(&self) -> [&CheckReport; 5] {
        [&self.contact, &self.invariants, &self.kcontact, &self.sasakian, &self.cone]
    }

    /// Passes iff the cone is almost Kaehler exactly when the structure is contact.
    pub fn cone_equivalence(&self, mode: Mode) -> CheckReport {
        let ok = self.cone.passed() == self.contact.passed();
        let mut r = verdict_mode(mode, "cone_contact_equivalence", ok, vec![
            format!("contact {}", verdict_str(self.contact.verdict)),
            format!("cone {}", verdict_str(self.cone.verdict)),
        ]);
        r.value = Some(format!(
            "contact {} cone {}",
            verdict_str(self.contact.verdict),
            verdict_str(self.cone.verdict)
        ));
        r
    }
}

fn verdict_mode(mode: Mode, name: &str, ok: bool, witness: Vec<String>) -> CheckReport {
    match mode {
        Mode::Exact => verdict::<Q>(name, ok, witness),
        Mode::Float => verdict::<f64>(name, ok, witness),
    }
}

pub fn structure_checks<S: Scalar>(inst: &FamilyInstance<S>) -> Result<StructureChecks> {
    let s = build_structure(&inst.metric, &inst.xi)?;
    let contact = contact_check(&s).with_caveats(&inst.caveats);
    let invariants = contact_invariants(&s).with_caveats(&inst.caveats);
    let (kcontact, sasakian) = if contact.passed() {
        (
            kcontact_check(&s)?.with_caveats(&inst.caveats),
            sasakian_check(&s)?.with_caveats(&inst.caveats),
        )
    } else {
        let w = || vec!["requires a contact structure".to_string()];
        (
            CheckReport::failure("kcontact", S::MODE, w()),
            CheckReport::failure("sasakian", S::MODE, w()),
        )
    };
    let cone = cone_check(&s).with_caveats(&inst.caveats);
    Ok(StructureChecks {
        contact,
        invariants,
        kcontact,
        sasakian,
        cone,
    })
}

pub fn structure_checks_any(inst: &AnyInstance) -> Result<StructureChecks> {
    match inst {
        AnyInstance::Exact(i) => structure_checks(i),
        AnyInstance::Float(i) => structure_checks(i),
    }
}

/// Metric-level checks that do not depend on `xi`: Einstein, and the
/// closed-form comparisons that apply to the metric.
fn metric_checks<S: Scalar>(metric: &InvariantMetric<S>) -> Result<Vec<CheckReport>> {
    let conn = levi_civita(metric);
    let curv = curvature(metric, &conn);
    let ric = ricci(metric, &curv);
    let mut out = Vec::new();
    let (e, _) = crate::contact::einstein_from_ricci(metric, &ric);
    out.push(e);
    if let Some(r) = u_cross_check(metric, &conn) {
        out.push(r);
    }
    if !metric.model.kind.is_cpn() && metric.params.is_some() {
        out.push(sphere_closed_form_check(metric, &curv, &ric)?);
    }
    Ok(out)
}

fn metric_checks_any(inst: &AnyInstance) -> Result<Vec<CheckReport>> {
    match inst {
        AnyInstance::Exact(i) => metric_checks(&i.metric),
        AnyInstance::Float(i) => metric_checks(&i.metric),
    }
}

struct Runner<'a> {
    cfg: &'a RunConfig,
    models: ModelPair,
    items: Vec<ReportItem>,
    results: BTreeMap<String, String>,
    table: Option<Vec<CatalogLine>>,
}

impl<'a> Runner<'a> {
    fn mode(&self) -> Mode {
        self.cfg.mode
    }

    fn float(&self) -> bool {
        self.cfg.mode == Mode::Float
    }

    /// Requirement comes from `--require` when given, else the task default.
    fn push(&mut self, subject: &str, check: CheckReport, default_required: bool) {
        let required = match &self.cfg.require {
            Some(set) => set.contains(&check.name),
            None => default_required,
        };
        self.items.push(ReportItem {
            subject: subject.to_string(),
            required,
            check,
        });
    }

    fn result(&mut self, key: &str, value: impl Into<String>) {
        self.results.insert(key.to_string(), value.into());
    }

    /// Float tolerance from `--tol`, scaled like the instance default.
    fn retol<S: Scalar>(&self, mut inst: FamilyInstance<S>) -> FamilyInstance<S> {
        if S::MODE == Mode::Float {
            inst.metric.tol *= self.cfg.tol / FLOAT_TOL;
        }
        inst
    }

    fn retol_any(&self, inst: AnyInstance) -> AnyInstance {
        match inst {
            AnyInstance::Exact(i) => AnyInstance::Exact(i),
            AnyInstance::Float(i) => AnyInstance::Float(self.retol(i)),
        }
    }

    fn sphere_params(&self) -> SphereFamilyParams {
        let f = &self.cfg.family;
        SphereFamilyParams {
            kappa: f.kappa.clone().unwrap_or_else(|| Q::from_i64(1)),
            q_eps: f.q_eps.clone().unwrap_or_else(|| Q::from_i64(1)),
            q_half: f.q_half.clone().unwrap_or_else(|| Q::from_i64(1)),
            sign: f.sign.unwrap_or(1),
        }
    }

    fn cpn_params(&self) -> Result<CpnFamilyParams> {
        let f = &self.cfg.family;
        let family = f
            .family_type
            .ok_or_else(|| Error::Input("type: required for a cpn family".into()))?;
        let one = || Q::from_i64(1);
        Ok(CpnFamilyParams {
            family,
            kappa: f.kappa.clone().unwrap_or_else(one),
            q_eps: f.q_eps.clone().unwrap_or_else(one),
            q_half: f.q_half.clone().unwrap_or_else(one),
            alpha: f.alpha.clone().unwrap_or_else(|| Q::from_i64(0)),
            theta: f.theta.clone(),
            phi: f.phi.clone(),
            sign: f.sign.unwrap_or(1),
        })
    }

    /// The structures a `verify` or `cone` run is about.
    fn instances(&self) -> Result<Vec<AnyInstance>> {
        let out = if let Some(m) = &self.cfg.metric {
            if !self.float() {
                match metric_instance(&self.models.exact, m) {
                    Ok(i) => vec![AnyInstance::Exact(i)],
                    Err(Error::Unsupported(_)) => {
                        let mut i = metric_instance(&self.models.float(), m)?;
                        i.caveats.push(CAVEAT_FLOAT_FALLBACK.into());
                        vec![AnyInstance::Float(i)]
                    }
                    Err(e) => return Err(e),
                }
            } else {
                vec![AnyInstance::Float(metric_instance(&self.models.float(), m)?)]
            }
        } else if self.cfg.space.is_cpn() {
            cpn_family_auto(&self.models, &self.cpn_params()?, self.float())?
        } else {
            let p = self.sphere_params();
            if self.float() {
                vec![AnyInstance::Float(sphere_contact_family(&self.models.float(), &p)?)]
            } else {
                vec![AnyInstance::Exact(sphere_contact_family(&self.models.exact, &p)?)]
            }
        };
        Ok(out.into_iter().map(|i| self.retol_any(i)).collect())
    }

    fn verify(&mut self) -> Result<()> {
        for inst in self.instances()? {
            let subject = inst.label().to_string();
            let sc = structure_checks_any(&inst)?;
            for c in sc.all() {
                self.push(&subject, c.clone(), c.name == "contact");
            }
            for c in metric_checks_any(&inst)? {
                let req = c.name != "einstein";
                self.push(&subject, c, req);
            }
            self.describe_instance(&inst);
        }
        Ok(())
    }

    fn describe_instance(&mut self, inst: &AnyInstance) {
        let (label, blocks, xi) = match inst {
            AnyInstance::Exact(i) => (i.label.clone(), i.params.describe(), i.describe_xi()),
            AnyInstance::Float(i) => (i.label.clone(), i.params.describe(), i.describe_xi()),
        };
        for (k, v) in blocks {
            self.results.insert(format!("{label}: {k}"), v);
        }
        self.results.insert(format!("{label}: xi"), xi);
    }

    fn cone(&mut self) -> Result<()> {
        for inst in self.instances()? {
            let subject = inst.label().to_string();
            let sc = structure_checks_any(&inst)?;
            self.push(&subject, sc.contact.clone(), false);
            self.push(&subject, sc.cone.clone(), false);
            self.push(&subject, sc.cone_equivalence(self.mode()), true);
            if !sc.contact.passed() {
                let norm = match &inst {
                    AnyInstance::Exact(i) => normalized_cone(i),
                    AnyInstance::Float(i) => normalized_cone(i),
                };
                match norm {
                    Ok((r, c)) => {
                        self.result("normalization_constant", c);
                        self.push(&subject, r, false);
                    }
                    Err(Error::Infeasible(m)) | Err(Error::Unsupported(m)) => {
                        self.result("normalization", m);
                    }
                    Err(e) => return Err(e),
                }
            }
            self.describe_instance(&inst);
        }
        Ok(())
    }

    fn catalog_params(&self) -> CatalogParams {
        let f = &self.cfg.family;
        let one = || Q::from_i64(1);
        CatalogParams {
            kappa: f.kappa.clone().unwrap_or_else(one),
            q_eps: f.q_eps.clone().unwrap_or_else(one),
            q_half: f.q_half.clone().unwrap_or_else(one),
            theta: f.theta.clone().unwrap_or(crate::families::Angle::ratio((3, 5), (4, 5))),
            phi: f.phi.clone().unwrap_or(crate::families::Angle::ratio((5, 13), (12, 13))),
        }
    }

    fn catalog_at(&mut self, cp: &CatalogParams, lines: &mut Vec<CatalogLine>) -> Result<()> {
        let exact = !self.float() && cp.theta.is_exact() && cp.phi.is_exact();
        let rows = if exact {
            catalog_rows(&self.models.exact, cp)?
        } else {
            catalog_rows(&self.models.float(), cp)?
        };
        for (subject, checks, line) in rows {
            for (c, req) in checks {
                self.push(&subject, c, req);
            }
            lines.push(line);
        }
        Ok(())
    }

    fn catalog(&mut self) -> Result<()> {
        require_cpn(self.cfg)?;
        let cp = self.catalog_params();
        let mut lines = Vec::new();
        self.catalog_at(&cp, &mut lines)?;
        self.table = Some(lines);
        Ok(())
    }

    fn einstein(&mut self) -> Result<()> {
        if self.cfg.space.is_cpn() {
            self.einstein_cpn()
        } else {
            self.einstein_sphere()
        }
    }

    fn einstein_sphere(&mut self) -> Result<()> {
        let n = self.cfg.space.n();
        let a0 = self.cfg.family.a0.clone().unwrap_or_else(|| Q::from_i64(1));
        let subject = format!("einstein a0={}", canonical(&a0));
        if self.float() {
            let m = self.models.float();
            let a = a0.to_f64();
            let g = einstein_solve_sphere(&m, &a)?.with_tol(self.cfg.tol);
            self.einstein_solved(&subject, &g, &einstein_constant_sphere(n, &a));
        } else {
            let m = self.models.exact.clone();
            let g = einstein_solve_sphere(&m, &a0)?;
            self.einstein_solved(&subject, &g, &einstein_constant_sphere(n, &a0));
        }
        let exact = self.models.exact.clone();
        self.push("einstein uniqueness", einstein_case_analysis(n), true);
        self.push("einstein uniqueness", einstein_random_rejection(&exact, 200, 7)?, true);
        self.push("einstein uniqueness", einstein_perturbation_check(&exact, &a0)?, true);
        // contact-Einstein member of the sphere family
        let k = Q::ratio(n as i64 - 1, n as i64);
        let p = SphereFamilyParams::new(k.clone(), Q::from_i64(1));
        let subject = format!("contact einstein kappa={}", canonical(&k));
        if self.float() {
            let inst = self.retol(sphere_contact_family(&self.models.float(), &p)?);
            self.sasakian_einstein_items(&subject, &inst)?;
        } else {
            let inst = sphere_contact_family(&self.models.exact, &p)?;
            self.sasakian_einstein_items(&subject, &inst)?;
        }
        Ok(())
    }

    fn einstein_solved<S: Scalar>(&mut self, subject: &str, g: &InvariantMetric<S>, want: &S) {
        let p = g.params.clone().expect("block metric");
        self.result("a_eps", canonical(&p.a_eps));
        self.result("b_eps", canonical(&p.b_eps));
        let (r, lambda) = einstein_check(g);
        self.push(subject, r, true);
        let mut t = Tracker::<S>::with_tol("einstein_constant", g.tol);
        match &lambda {
            Some(l) => {
                t.track(&(l.clone() - want.clone()), || vec![format!("lambda = {}", canonical(l))]);
                self.result("lambda", canonical(l));
            }
            None => t.flag(vec!["not Einstein".into()]),
        }
        self.push(subject, t.finish().with_source("2(n-1)^3/(n^2 a0)").with_value(canonical(want)), true);
    }

    fn sasakian_einstein_items<S: Scalar>(&mut self, subject: &str, inst: &FamilyInstance<S>) -> Result<()> {
        let s = build_structure(&inst.metric, &inst.xi)?;
        let c = contact_check(&s);
        let ok = c.passed();
        self.push(subject, c, true);
        if ok {
            let r = sasakian_einstein_check(&s)?;
            if let Some(v) = &r.value {
                self.result(&format!("{subject}: lambda"), v.clone());
            }
            self.push(subject, r, true);
        }
        Ok(())
    }

    fn einstein_cpn(&mut self) -> Result<()> {
        if self.float() {
            let m = self.models.float();
            self.einstein_cpn_generic(&m)
        } else {
            let m = self.models.exact.clone();
            self.einstein_cpn_generic(&m)
        }
    }

    fn einstein_cpn_generic<S: Scalar>(&mut self, m: &Arc<RankOneModel<S>>) -> Result<()> {
        let n = m.n() as i64;
        let (g, xis) = three_sasakian_metric(m)?;
        let inst = FamilyInstance {
            label: "sasakian einstein (1/4,1/4,1/4,1/8,1/8)".into(),
            params: g.params.clone().expect("block metric"),
            xi: xis[0].clone(),
            metric: g.clone(),
            caveats: vec![],
        };
        let inst = self.retol(inst);
        self.sasakian_einstein_items(&inst.label.clone(), &inst)?;
        let (e, l) = einstein_check(&inst.metric);
        let mut t = Tracker::<S>::with_tol("einstein_constant", inst.metric.tol);
        match &l {
            Some(l) => t.track(&(l.clone() - S::from_i64(2 * (2 * n - 1))), || vec![canonical(l)]),
            None => t.flag(vec![e.witness.join(" ")]),
        }
        self.push(&inst.label, t.finish().with_source("2(2n-1)"), true);
        let kappas: Vec<Q> = match &self.cfg.family.kappa {
            Some(k) => vec![k.clone()],
            None => vec![Q::from_i64(1), Q::ratio(1, 3)],
        };
        for k in kappas {
            for i in [1, 3] {
                let ks = S::from_q(&k);
                let inst = self.retol(g_kappa(m, i, &ks)?);
                let (r, mu) = einstein_with_mu_eps(&inst.metric);
                let want_fail = k != Q::ratio(1, 2);
                self.push(&inst.label, expect("einstein_expected", &r, !want_fail, S::MODE), true);
                let mut t = Tracker::<S>::with_tol("ricci_mu_eps", inst.metric.tol);
                t.track(&(mu.clone() - (S::from_i64(n) - ks)), || vec![canonical(&mu)]);
                self.push(&inst.label, t.finish().with_source("n - kappa").with_value(canonical(&mu)), true);
            }
        }
        Ok(())
    }

    fn isomorphism(&mut self) -> Result<()> {
        require_cpn(self.cfg)?;
        let f = &self.cfg.family;
        let one = || Q::from_i64(1);
        let (k, q, qh) = (
            f.kappa.clone().unwrap_or_else(one),
            f.q_eps.clone().unwrap_or_else(one),
            f.q_half.clone().unwrap_or_else(one),
        );
        if self.float() {
            let m = self.models.float();
            self.isomorphism_at(&m, &k, &q, &qh)
        } else {
            let m = self.models.exact.clone();
            self.isomorphism_at(&m, &k, &q, &qh)
        }
    }

    fn isomorphism_at<S: Scalar>(&mut self, m: &Arc<RankOneModel<S>>, k: &Q, q: &Q, qh: &Q) -> Result<()> {
        let zero = Q::from_i64(0);
        let mk = |f: FamilyType| -> Result<InfinitesimalModel<S>> {
            let p = CpnFamilyParams::new(f, k.clone(), q.clone(), qh.clone(), zero.clone());
            let i = cpn_family(m, &p)?.remove(0);
            InfinitesimalModel::new(&i.metric, &i.xi)
        };
        let (a1, a2) = (mk(FamilyType::AI)?, mk(FamilyType::AII)?);
        let subject = format!(
            "AI->AII kappa={} q_eps={} q_half={}",
            canonical(k),
            canonical(q),
            canonical(qh)
        );
        let l = ai_to_aii_map(m)?;
        let r = crate::families::model_isomorphism_check(&l, &a1, &a2)?;
        self.push(&subject, r, true);
        let id = Mat::identity(m.dim());
        let r = crate::families::model_isomorphism_check(&id, &a1, &a1)?.renamed("identity_isomorphism");
        self.push(&subject, r, true);
        if m.n() >= 2 {
            let ks = S::from_q(k);
            let r = swap_candidates_report(m, &ks)?;
            self.push(&format!("g1->g3 kappa={}", canonical(k)), r, true);
        }
        Ok(())
    }

    fn full_suite(&mut self) -> Result<()> {
        if self.float() {
            let m = self.models.float();
            self.algebra_items(&m);
        } else {
            let m = self.models.exact.clone();
            self.algebra_items(&m);
        }
        if self.cfg.space.is_cpn() {
            self.full_cpn()
        } else {
            self.full_sphere()
        }
    }

    fn algebra_items<S: Scalar>(&mut self, m: &Arc<RankOneModel<S>>) {
        let name = m.algebra.name.clone();
        for r in [m.algebra.jacobi_check(), m.algebra.invariance_check(), m.algebra.antisymmetry_check()] {
            self.push(&name, r, true);
        }
        let s = m.summary();
        let want = m.kind.multiplicities();
        let got = (s.block_dims[1], s.block_dims[3]);
        let r = verdict::<S>("multiplicities", got == want && s.block_dims[1] == s.block_dims[2] && s.block_dims[3] == s.block_dims[4], vec![
            format!("m_eps {} m_half {}", got.0, got.1),
        ])
        .with_value(format!("({}, {})", got.0, got.1));
        self.push("restricted roots", r, true);
        for r in bracket_table_reports(m) {
            self.push("bracket tables", r, true);
        }
    }

    fn full_sphere(&mut self) -> Result<()> {
        let float = self.float();
        let grid = sphere_grid();
        for p in &grid {
            let inst = if float {
                AnyInstance::Float(self.retol(sphere_contact_family(&self.models.float(), p)?))
            } else {
                AnyInstance::Exact(sphere_contact_family(&self.models.exact, p)?)
            };
            let on_line = p.q_eps == Q::from_i64(1);
            let sc = structure_checks_any(&inst)?;
            let subject = inst.label().to_string();
            self.push(&subject, sc.contact.clone(), true);
            self.push(&subject, expect("kcontact_iff_q_eps_1", &sc.kcontact, on_line, self.mode()), true);
            self.push(&subject, expect("sasakian_iff_q_eps_1", &sc.sasakian, on_line, self.mode()), true);
            self.push(&subject, sc.cone_equivalence(self.mode()), true);
        }
        if float {
            let m = self.models.float();
            self.sphere_metric_items(&m, 10)?;
        } else {
            let m = self.models.exact.clone();
            self.sphere_metric_items(&m, 10)?;
        }
        self.einstein_sphere()
    }

    /// Closed forms on random metrics, xi-sectional branches, constant
    /// curvature detection and the Sasaki-metric checks.
    fn sphere_metric_items<S: Scalar>(&mut self, m: &Arc<RankOneModel<S>>, samples: usize) -> Result<()> {
        let n = m.n();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..samples {
            let mut r = || S::ratio(rng.gen_range(1..=20), rng.gen_range(1..=7));
            let p = BlockParams::sphere(r(), r(), r());
            let g = metric_from_blocks(m, &p)?.with_tol(self.cfg.tol);
            let (curv, ric) = ricci_of(&g);
            let subject = block_subject(&p);
            self.push(&subject, sphere_closed_form_check(&g, &curv, &ric)?, true);
        }
        let q = |a: i64, b: i64| S::ratio(a, b);
        for p in [
            BlockParams::sphere(q(3, 1), q(2, 1), q(2, 1)),
            BlockParams::sphere(q(5, 2), q(1, 1), q(3, 2)),
        ] {
            let g = metric_from_blocks(m, &p)?.with_tol(self.cfg.tol);
            let c = xi_sectional_constant(&p).expect("branch metric");
            let conn = levi_civita(&g);
            let curv = curvature(&g, &conn);
            let r = xi_sectional_check(&g, &curv, &c).with_source("a0/(4 a_eps^2) or 1/(a_eps + b_eps)");
            self.push(&block_subject(&p), r, true);
        }
        let off = BlockParams::sphere(q(1, 1), q(2, 1), q(3, 1));
        let none = xi_sectional_constant(&off).is_none();
        self.push(
            &block_subject(&off),
            verdict::<S>("xi_sectional_branches", none, vec!["unexpected constant".into()]),
            true,
        );
        for (p, want) in [
            (BlockParams::sphere(q(2, 1), q(2, 1), q(2, 1)), n == 2),
            (BlockParams::sphere(q(1, 1), q(2, 1), q(2, 1)), false),
        ] {
            let g = metric_from_blocks(m, &p)?.with_tol(self.cfg.tol);
            let conn = levi_civita(&g);
            let curv = curvature(&g, &conn);
            let (r, c) = constant_curvature_check(&g, &curv);
            let subject = block_subject(&p);
            self.push(&subject, expect("constant_curvature_expected", &r, want, S::MODE), true);
            if let Some(c) = c {
                let mut t = Tracker::<S>::with_tol("constant_curvature_value", g.tol);
                t.track(&(c.clone() - S::one() / (S::from_i64(4) * p.a0.clone())), || vec![canonical(&c)]);
                self.push(&subject, t.finish().with_source("1/(4 alpha)"), true);
            }
        }
        self.sasaki_items(m)
    }

    fn sasaki_items<S: Scalar>(&mut self, m: &Arc<RankOneModel<S>>) -> Result<()> {
        let cpn = m.kind.is_cpn();
        for r in [S::ratio(1, 4), S::ratio(1, 2), S::from_i64(1), S::from_i64(2)] {
            let g = sasaki_induced_metric(m, &r)?;
            let inst = self.sasaki_instance(&g, format!("sasaki r={}", canonical(&r)))?;
            let sc = structure_checks(&inst)?;
            let want = r == S::ratio(1, 2);
            self.push(&inst.label, expect("contact_iff_r_half", &sc.contact, want, S::MODE), true);
            let g = scaled_sasaki_metric(m, &r)?;
            let inst = self.sasaki_instance(&g, format!("scaled sasaki r={}", canonical(&r)))?;
            let sc = structure_checks(&inst)?;
            self.push(&inst.label, sc.contact.clone(), true);
            let want = r == S::one() && (!cpn || m.blocks.m_half.is_empty());
            self.push(&inst.label, expect("kcontact_expected", &sc.kcontact, want, S::MODE), true);
        }
        Ok(())
    }

    fn sasaki_instance<S: Scalar>(&self, g: &InvariantMetric<S>, label: String) -> Result<FamilyInstance<S>> {
        let xi = unit_x_field(g)?;
        let tol = instance_tolerance(&g.gram, &xi);
        Ok(self.retol(FamilyInstance {
            label,
            params: g.params.clone().expect("block metric"),
            metric: g.clone().with_tol(tol),
            xi,
            caveats: g.model.caveats.clone(),
        }))
    }

    fn full_cpn(&mut self) -> Result<()> {
        let float = self.float();
        for f in FamilyType::ALL {
            for p in cpn_grid(f) {
                for inst in cpn_family_auto(&self.models, &p, float)? {
                    let inst = self.retol_any(inst);
                    let sc = structure_checks_any(&inst)?;
                    let subject = inst.label().to_string();
                    self.push(&subject, sc.contact.clone(), true);
                    let agree = sc.kcontact.passed() == sc.sasakian.passed();
                    let r = verdict_mode(self.mode(), "sasakian_iff_kcontact", agree, vec![
                        format!("kcontact {}", verdict_str(sc.kcontact.verdict)),
                        format!("sasakian {}", verdict_str(sc.sasakian.verdict)),
                    ])
                    .with_value(format!("kcontact {}", verdict_str(sc.kcontact.verdict)));
                    self.push(&subject, r, true);
                    self.push(&subject, sc.cone_equivalence(self.mode()), true);
                }
            }
        }
        let mut lines = Vec::new();
        for cp in catalog_grid() {
            self.catalog_at(&cp, &mut lines)?;
        }
        self.table = Some(lines);
        if float {
            let m = self.models.float();
            self.three_sasakian_items(&m)?;
            self.sasaki_items(&m)?;
        } else {
            let m = self.models.exact.clone();
            self.three_sasakian_items(&m)?;
            self.sasaki_items(&m)?;
        }
        self.einstein_cpn()?;
        let iso_grid = [
            (Q::from_i64(1), Q::from_i64(1), Q::from_i64(1)),
            (Q::ratio(2, 3), Q::from_i64(2), Q::ratio(1, 3)),
            (Q::ratio(1, 2), Q::ratio(1, 2), Q::from_i64(3)),
        ];
        for (i, (k, q, qh)) in iso_grid.iter().enumerate() {
            if float {
                let m = self.models.float();
                self.isomorphism_grid_point(&m, k, q, qh, i == 0)?;
            } else {
                let m = self.models.exact.clone();
                self.isomorphism_grid_point(&m, k, q, qh, i == 0)?;
            }
        }
        Ok(())
    }

    fn isomorphism_grid_point<S: Scalar>(&mut self, m: &Arc<RankOneModel<S>>, k: &Q, q: &Q, qh: &Q, swaps: bool) -> Result<()> {
        if swaps {
            return self.isomorphism_at(m, k, q, qh);
        }
        let zero = Q::from_i64(0);
        let mk = |f: FamilyType| -> Result<InfinitesimalModel<S>> {
            let p = CpnFamilyParams::new(f, k.clone(), q.clone(), qh.clone(), zero.clone());
            let i = cpn_family(m, &p)?.remove(0);
            InfinitesimalModel::new(&i.metric, &i.xi)
        };
        let (a1, a2) = (mk(FamilyType::AI)?, mk(FamilyType::AII)?);
        let r = crate::families::model_isomorphism_check(&ai_to_aii_map(m)?, &a1, &a2)?;
        let subject = format!(
            "AI->AII kappa={} q_eps={} q_half={}",
            canonical(k),
            canonical(q),
            canonical(qh)
        );
        self.push(&subject, r, true);
        Ok(())
    }

    fn three_sasakian_items<S: Scalar>(&mut self, m: &Arc<RankOneModel<S>>) -> Result<()> {
        let (g, xis) = three_sasakian_metric(m)?;
        let g = g.with_tol(self.cfg.tol);
        let r = three_sasakian_check(&g, [&xis[0], &xis[1], &xis[2]])?;
        self.push("3-sasakian (1/4,1/4,1/4,1/8,1/8) (2X, 2nu, 2mu)", r, true);
        Ok(())
    }
}

fn block_subject<S: Scalar>(p: &BlockParams<S>) -> String {
    let parts: Vec<String> = p.describe().into_iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("metric {}", parts.join(" "))
}

fn require_cpn(cfg: &RunConfig) -> Result<()> {
    if cfg.space.is_cpn() {
        Ok(())
    } else {
        Err(Error::Input(format!("space: task {} requires cpn", cfg.task)))
    }
}

/// A metric given by blocks; `xi` defaults to `X / sqrt(a0)`.
fn metric_instance<S: Scalar>(model: &Arc<RankOneModel<S>>, m: &MetricArgs) -> Result<FamilyInstance<S>> {
    let conv = |x: &Q| S::from_q(x);
    let b = &m.blocks;
    let params = BlockParams {
        a0: conv(&b.a0),
        a_eps: conv(&b.a_eps),
        b_eps: conv(&b.b_eps),
        a_half: conv(&b.a_half),
        b_half: conv(&b.b_half),
        a0_eps: conv(&b.a0_eps),
        b0_eps: conv(&b.b0_eps),
        c_eps: conv(&b.c_eps),
    };
    let metric = metric_from_blocks(model, &params)?;
    let xi = match &m.xi {
        Some([x, mu, nu]) => {
            let bl = &model.blocks;
            let mut v = vec![S::zero(); model.dim()];
            v[bl.a.start] = conv(x);
            v[bl.m_eps.start] = conv(mu);
            v[bl.k_eps.start] = conv(nu);
            v
        }
        None => unit_x_field(&metric)?,
    };
    let tol = instance_tolerance(&metric.gram, &xi);
    Ok(FamilyInstance {
        label: block_subject(&params),
        params,
        metric: metric.with_tol(tol),
        xi,
        caveats: model.caveats.clone(),
    })
}

/// The cone of the rescaled structure `phi = A / sqrt(c)` and `c`.
fn normalized_cone<S: Scalar>(inst: &FamilyInstance<S>) -> Result<(CheckReport, String)> {
    let (s, c) = normalized_structure(&inst.metric, &inst.xi)?;
    Ok((cone_check(&s).renamed("normalized_cone"), canonical(&c)))
}

type CatalogRowOut = (String, Vec<(CheckReport, bool)>, CatalogLine);

fn catalog_rows<S: Scalar>(m: &Arc<RankOneModel<S>>, cp: &CatalogParams) -> Result<Vec<CatalogRowOut>> {
    let mut out = Vec::new();
    for row in kcontact_catalog(m, cp)? {
        let inst = catalog_instance(m, &row, &cp.describe())?;
        let sc = structure_checks(&inst)?;
        let pred = expect("kcontact_predicate", &sc.kcontact, row.kcontact_expected, S::MODE)
            .with_source(row.condition);
        let agree = !sc.kcontact.passed() || sc.sasakian.passed();
        let sas = verdict::<S>("kcontact_implies_sasakian", agree, sc.sasakian.witness.clone());
        let xi = inst.describe_xi();
        let p = &row.params;
        let line = CatalogLine {
            family: row.family.to_string(),
            a0: canonical(&p.a0),
            a_eps: canonical(&p.a_eps),
            b_eps: canonical(&p.b_eps),
            a_half: canonical(&p.a_half),
            b_half: canonical(&p.b_half),
            xi,
            kcontact_condition: row.condition.to_string(),
            kcontact_predicted: row.kcontact_expected,
            contact: sc.contact.verdict,
            kcontact: sc.kcontact.verdict,
            params: cp.describe(),
        };
        let checks = vec![
            (sc.contact, true),
            (sc.kcontact, false),
            (pred, true),
            (sas, true),
            (sc.cone, false),
        ];
        out.push((inst.label.clone(), checks, line));
    }
    Ok(out)
}

/// Runs the configured task and assembles the report.
pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    let models = ModelPair::new(cfg.space)?;
    let model = models.exact.summary();
    let mut r = Runner {
        cfg,
        models,
        items: Vec::new(),
        results: BTreeMap::new(),
        table: None,
    };
    match cfg.task {
        Task::Verify => r.verify()?,
        Task::Catalog => r.catalog()?,
        Task::Einstein => r.einstein()?,
        Task::Cone => r.cone()?,
        Task::Isomorphism => r.isomorphism()?,
        Task::FullSuite => r.full_suite()?,
    }
    if let Some(set) = &cfg.require {
        let known: BTreeSet<&str> = r.items.iter().map(|i| i.check.name.as_str()).collect();
        if let Some(bad) = set.iter().find(|s| !known.contains(s.as_str())) {
            return Err(Error::Input(format!("require: no check named `{bad}` in this task")));
        }
    }
    let required = r.items.iter().filter(|i| i.required).count();
    let required_failed = r.items.iter().filter(|i| i.required && !i.check.passed()).count();
    Ok(RunReport {
        schema: SCHEMA,
        task: cfg.task,
        passed: required_failed == 0,
        summary: Summary {
            checks: r.items.len(),
            required,
            required_failed,
        },
        model,
        params: cfg.describe().into_iter().collect(),
        results: r.results,
        items: r.items,
        table: r.table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Overrides;

    fn cfg(task: &str, space: &str, n: usize, extra: impl FnOnce(&mut Overrides)) -> RunConfig {
        let mut o = Overrides {
            task: Some(task.into()),
            space: Some(space.into()),
            n: Some(n),
            ..Default::default()
        };
        extra(&mut o);
        RunConfig::build(None, &o, None).unwrap()
    }

    #[test]
    fn verify_requires_contact_by_default() {
        let r = run(&cfg("verify", "sphere", 3, |o| o.q_eps = Some("2".into()))).unwrap();
        assert!(r.passed);
        let req: Vec<&str> = r.items.iter().filter(|i| i.required).map(|i| i.check.name.as_str()).collect();
        assert!(req.contains(&"contact"));
        assert!(!req.contains(&"kcontact"));
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn require_switches_exit_code() {
        let r = run(&cfg("verify", "sphere", 3, |o| {
            o.q_eps = Some("2".into());
            o.require = Some("kcontact".into());
        }))
        .unwrap();
        assert!(!r.passed);
        assert_eq!(r.exit_code(), 2);
        assert_eq!(r.summary.required_failed, 1);
    }

    #[test]
    fn unknown_required_check_is_input_error() {
        let e = run(&cfg("verify", "sphere", 3, |o| o.require = Some("nosuch".into()))).unwrap_err();
        assert!(matches!(e, Error::Input(_)));
    }

    #[test]
    fn catalog_needs_cpn() {
        assert!(run(&cfg("catalog", "sphere", 3, |_| {})).is_err());
    }

    #[test]
    fn cone_reports_normalized_witness() {
        let mut c = cfg("cone", "sphere", 3, |_| {});
        c.metric = Some(MetricArgs {
            blocks: BlockParams::sphere(Q::from_i64(1), Q::from_i64(1), Q::from_i64(1)),
            xi: None,
        });
        let r = run(&c).unwrap();
        assert!(r.passed);
        assert_eq!(r.results["normalization_constant"], "1/4");
        let n = r.items.iter().find(|i| i.check.name == "normalized_cone").unwrap();
        assert!(!n.check.passed());
    }

    #[test]
    fn csv_and_text_render() {
        let r = run(&cfg("isomorphism", "cpn", 1, |_| {})).unwrap();
        let csv = r.render(Format::Csv).unwrap();
        assert!(csv.starts_with("subject,check,required,verdict"));
        assert_eq!(csv.lines().count(), r.items.len() + 1);
        let text = r.render(Format::Text).unwrap();
        assert!(text.ends_with("required failed)\n"));
    }
}
