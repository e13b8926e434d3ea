//! Run configuration: TOML file, CLI overrides and the `CROSM_MODE` default.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::families::{Angle, FamilyType};
use crate::geometry::BlockParams;
use crate::models::SpaceKind;
use crate::scalar::{canonical, parse_rational, Mode, Scalar, FLOAT_TOL, Q};

pub const MODE_ENV: &str = "CROSM_MODE";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Verify,
    Catalog,
    Einstein,
    Cone,
    Isomorphism,
    FullSuite,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Verify => "verify",
            Task::Catalog => "catalog",
            Task::Einstein => "einstein",
            Task::Cone => "cone",
            Task::Isomorphism => "isomorphism",
            Task::FullSuite => "full-suite",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let all = [
            Task::Verify,
            Task::Catalog,
            Task::Einstein,
            Task::Cone,
            Task::Isomorphism,
            Task::FullSuite,
        ];
        let t = s.trim().to_ascii_lowercase().replace('_', "-");
        all.into_iter()
            .find(|x| x.name() == t)
            .ok_or_else(|| Error::Input(format!("run.task: unknown task `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" | "txt" => Ok(Format::Text),
            other => Err(Error::Input(format!("format: unknown value `{other}`"))),
        }
    }
}

/// Family parameters; every field is optional until a task needs it.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FamilyArgs {
    pub family_type: Option<FamilyType>,
    pub kappa: Option<Q>,
    pub q_eps: Option<Q>,
    pub q_half: Option<Q>,
    pub alpha: Option<Q>,
    pub theta: Option<Angle>,
    pub phi: Option<Angle>,
    pub r: Option<Q>,
    pub a0: Option<Q>,
    pub sign: Option<i8>,
}

/// Explicit block metric with `xi` given on `X, mu_eps, nu_eps`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricArgs {
    pub blocks: BlockParams<Q>,
    pub xi: Option<[Q; 3]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub space: SpaceKind,
    pub mode: Mode,
    pub tol: f64,
    pub family: FamilyArgs,
    pub metric: Option<MetricArgs>,
    pub format: Format,
    pub out: Option<PathBuf>,
    /// Check names whose failure sets exit code 2; `None` means the task default.
    pub require: Option<BTreeSet<String>>,
}

/// Values given on the command line, as raw strings.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub task: Option<String>,
    pub space: Option<String>,
    pub n: Option<usize>,
    pub family_type: Option<String>,
    pub kappa: Option<String>,
    pub q_eps: Option<String>,
    pub q_half: Option<String>,
    pub alpha: Option<String>,
    pub theta: Option<String>,
    pub phi: Option<String>,
    pub r: Option<String>,
    pub a0: Option<String>,
    pub mode: Option<String>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub require: Option<String>,
}

fn section<'a>(root: &'a Table, name: &str, allowed: &[&str]) -> Result<Option<&'a Table>> {
    match root.get(name) {
        None => Ok(None),
        Some(Value::Table(t)) => {
            for k in t.keys() {
                if !allowed.contains(&k.as_str()) {
                    return Err(Error::Input(format!("{name}.{k}: unknown key")));
                }
            }
            Ok(Some(t))
        }
        Some(_) => Err(Error::Input(format!("{name}: expected a table"))),
    }
}

fn value_q(key: &str, v: &Value) -> Result<Q> {
    let named = |e: Error| match e {
        Error::Input(m) => Error::Input(format!("{key}: {m}")),
        other => other,
    };
    match v {
        Value::String(s) => parse_rational(s).map_err(named),
        Value::Integer(i) => Ok(Q::from_i64(*i)),
        Value::Float(f) => parse_rational(&format!("{f}")).map_err(named),
        _ => Err(Error::Input(format!("{key}: expected a number"))),
    }
}

fn value_str<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str().ok_or_else(|| Error::Input(format!("{key}: expected a string")))
}

fn value_angle(key: &str, v: &Value) -> Result<Angle> {
    let named = |e: Error| match e {
        Error::Input(m) => Error::Input(format!("{key}: {m}")),
        other => other,
    };
    match v {
        Value::String(s) => Angle::parse(s).map_err(named),
        Value::Float(f) => Ok(Angle::Radians(*f)),
        Value::Integer(i) => Ok(Angle::Radians(*i as f64)),
        Value::Array(a) if a.len() == 2 => Angle::pair(value_q(key, &a[0])?, value_q(key, &a[1])?).map_err(named),
        _ => Err(Error::Input(format!("{key}: expected \"c,s\", [c, s] or radians"))),
    }
}

fn parse_q_flag(key: &str, s: &str) -> Result<Q> {
    parse_rational(s).map_err(|e| match e {
        Error::Input(m) => Error::Input(format!("{key}: {m}")),
        other => other,
    })
}

fn parse_require(s: &str) -> BTreeSet<String> {
    s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect()
}

impl RunConfig {
    /// Flags override the file, the file overrides `CROSM_MODE`, which
    /// overrides the exact default.
    pub fn build(file: Option<&str>, flags: &Overrides, env_mode: Option<&str>) -> Result<RunConfig> {
        let root: Table = match file {
            Some(text) => text
                .parse::<Table>()
                .map_err(|e| Error::Input(format!("config: {}", e.message())))?,
            None => Table::new(),
        };
        for k in root.keys() {
            if !["space", "family", "metric", "run"].contains(&k.as_str()) {
                return Err(Error::Input(format!("{k}: unknown section")));
            }
        }
        let space = section(&root, "space", &["kind", "n"])?;
        let fam = section(
            &root,
            "family",
            &["type", "kappa", "q_eps", "q_half", "alpha", "theta", "phi", "r", "a0", "sign"],
        )?;
        let met = section(
            &root,
            "metric",
            &["a0", "a_eps", "b_eps", "a_half", "b_half", "a0_eps", "b0_eps", "c_eps", "xi"],
        )?;
        let run = section(&root, "run", &["task", "mode", "tol", "format", "out", "require"])?;
        let get = |t: Option<&Table>, k: &str| t.and_then(|t| t.get(k)).cloned();

        let task = match (&flags.task, get(run, "task")) {
            (Some(t), _) => t.parse()?,
            (None, Some(v)) => value_str("run.task", &v)?.parse()?,
            (None, None) => return Err(Error::Input("run.task: missing".into())),
        };

        let kind = match (&flags.space, get(space, "kind")) {
            (Some(s), _) => s.clone(),
            (None, Some(v)) => value_str("space.kind", &v)?.to_string(),
            (None, None) => return Err(Error::Input("space.kind: missing".into())),
        };
        let n = match (flags.n, get(space, "n")) {
            (Some(n), _) => n,
            (None, Some(Value::Integer(i))) if i >= 0 => i as usize,
            (None, Some(_)) => return Err(Error::Input("space.n: expected a non-negative integer".into())),
            (None, None) => return Err(Error::Input("space.n: missing".into())),
        };
        let space = SpaceKind::parse(&kind, n)?;

        let mode = match (&flags.mode, get(run, "mode"), env_mode) {
            (Some(m), _, _) => m.parse()?,
            (None, Some(v), _) => value_str("run.mode", &v)?.parse()?,
            (None, None, Some(e)) if !e.trim().is_empty() => e
                .parse::<Mode>()
                .map_err(|_| Error::Input(format!("{MODE_ENV}: unknown value `{e}`")))?,
            _ => Mode::Exact,
        };
        let tol = match (flags.tol, get(run, "tol")) {
            (Some(t), _) => t,
            (None, Some(Value::Float(f))) => f,
            (None, Some(Value::Integer(i))) => i as f64,
            (None, Some(_)) => return Err(Error::Input("run.tol: expected a number".into())),
            (None, None) => FLOAT_TOL,
        };
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::Input(format!("tol: must be > 0, got {tol}")));
        }
        let format = match (&flags.format, get(run, "format")) {
            (Some(f), _) => f.parse()?,
            (None, Some(v)) => value_str("run.format", &v)?.parse()?,
            (None, None) => Format::Json,
        };
        let out = match (&flags.out, get(run, "out")) {
            (Some(p), _) => Some(p.clone()),
            (None, Some(v)) => Some(PathBuf::from(value_str("run.out", &v)?)),
            (None, None) => None,
        };
        let require = match (&flags.require, get(run, "require")) {
            (Some(s), _) => Some(parse_require(s)),
            (None, Some(Value::Array(a))) => Some(
                a.iter()
                    .map(|v| value_str("run.require", v).map(str::to_string))
                    .collect::<Result<BTreeSet<_>>>()?,
            ),
            (None, Some(Value::String(s))) => Some(parse_require(&s)),
            (None, Some(_)) => return Err(Error::Input("run.require: expected a list of check names".into())),
            (None, None) => None,
        };

        let q_field = |flag: &Option<String>, key: &str| -> Result<Option<Q>> {
            match (flag, get(fam, key)) {
                (Some(s), _) => parse_q_flag(key, s).map(Some),
                (None, Some(v)) => value_q(&format!("family.{key}"), &v).map(Some),
                (None, None) => Ok(None),
            }
        };
        let angle_field = |flag: &Option<String>, key: &str| -> Result<Option<Angle>> {
            match (flag, get(fam, key)) {
                (Some(s), _) => Angle::parse(s)
                    .map(Some)
                    .map_err(|e| Error::Input(format!("{key}: {e}"))),
                (None, Some(v)) => value_angle(&format!("family.{key}"), &v).map(Some),
                (None, None) => Ok(None),
            }
        };
        let family_type = match (&flags.family_type, get(fam, "type")) {
            (Some(t), _) => Some(t.parse()?),
            (None, Some(v)) => Some(value_str("family.type", &v)?.parse()?),
            (None, None) => None,
        };
        let sign = match get(fam, "sign") {
            None => None,
            Some(Value::Integer(1)) => Some(1),
            Some(Value::Integer(-1)) => Some(-1),
            Some(_) => return Err(Error::Input("family.sign: expected 1 or -1".into())),
        };
        let family = FamilyArgs {
            family_type,
            kappa: q_field(&flags.kappa, "kappa")?,
            q_eps: q_field(&flags.q_eps, "q_eps")?,
            q_half: q_field(&flags.q_half, "q_half")?,
            alpha: q_field(&flags.alpha, "alpha")?,
            theta: angle_field(&flags.theta, "theta")?,
            phi: angle_field(&flags.phi, "phi")?,
            r: q_field(&flags.r, "r")?,
            a0: q_field(&flags.a0, "a0")?,
            sign,
        };

        let metric = match met {
            None => None,
            Some(t) => {
                let one = Value::Integer(1);
                let zero = Value::Integer(0);
                let f = |k: &str, default: &Value| -> Result<Q> {
                    match t.get(k) {
                        Some(v) => value_q(&format!("metric.{k}"), v),
                        None if k == "a0" || k == "a_eps" || k == "b_eps" => {
                            Err(Error::Input(format!("metric.{k}: missing")))
                        }
                        None => value_q(k, default),
                    }
                };
                let blocks = BlockParams {
                    a0: f("a0", &one)?,
                    a_eps: f("a_eps", &one)?,
                    b_eps: f("b_eps", &one)?,
                    a_half: f("a_half", &one)?,
                    b_half: f("b_half", &one)?,
                    a0_eps: f("a0_eps", &zero)?,
                    b0_eps: f("b0_eps", &zero)?,
                    c_eps: f("c_eps", &zero)?,
                };
                let xi = match t.get("xi") {
                    None => None,
                    Some(Value::Array(a)) if a.len() == 3 => Some([
                        value_q("metric.xi", &a[0])?,
                        value_q("metric.xi", &a[1])?,
                        value_q("metric.xi", &a[2])?,
                    ]),
                    Some(_) => return Err(Error::Input("metric.xi: expected [x, mu_eps, nu_eps]".into())),
                };
                Some(MetricArgs { blocks, xi })
            }
        };

        Ok(RunConfig {
            task,
            space,
            mode,
            tol,
            family,
            metric,
            format,
            out,
            require,
        })
    }

    /// Key/value summary of the resolved parameters, in a fixed order.
    pub fn describe(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("space".to_string(), self.space.short_name().to_string()),
            ("n".into(), self.space.n().to_string()),
            ("mode".into(), self.mode.to_string()),
        ];
        if self.mode == Mode::Float {
            out.push(("tol".into(), format!("{:e}", self.tol)));
        }
        let f = &self.family;
        if let Some(t) = f.family_type {
            out.push(("type".into(), t.to_string()));
        }
        for (k, v) in [
            ("kappa", &f.kappa),
            ("q_eps", &f.q_eps),
            ("q_half", &f.q_half),
            ("alpha", &f.alpha),
            ("r", &f.r),
            ("a0", &f.a0),
        ] {
            if let Some(v) = v {
                out.push((k.into(), canonical(v)));
            }
        }
        for (k, v) in [("theta", &f.theta), ("phi", &f.phi)] {
            if let Some(v) = v {
                out.push((k.into(), v.describe()));
            }
        }
        if let Some(m) = &self.metric {
            out.extend(m.blocks.describe());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_and_env() {
        let file = "[space]\nkind = \"cpn\"\nn = 2\n[family]\ntype = \"AI\"\nkappa = \"1/2\"\n[run]\ntask = \"verify\"\nmode = \"float\"\n";
        let flags = Overrides {
            kappa: Some("2".into()),
            ..Default::default()
        };
        let c = RunConfig::build(Some(file), &flags, Some("exact")).unwrap();
        assert_eq!(c.family.kappa, Some(Q::from_i64(2)));
        assert_eq!(c.mode, Mode::Float);
        assert_eq!(c.space, SpaceKind::ComplexProjective(2));
        let c = RunConfig::build(Some(&file.replace("mode = \"float\"\n", "")), &flags, Some("float")).unwrap();
        assert_eq!(c.mode, Mode::Float);
    }

    #[test]
    fn unknown_key_is_named() {
        let file = "[space]\nkind = \"sphere\"\nn = 3\nradius = 2\n";
        let e = RunConfig::build(Some(file), &Overrides::default(), None).unwrap_err();
        assert!(e.to_string().contains("space.radius"), "{e}");
        let file = "[space]\nkind = \"sphere\"\nn = 3\n[family]\nkappa = \"x\"\n[run]\ntask = \"verify\"\n";
        let e = RunConfig::build(Some(file), &Overrides::default(), None).unwrap_err();
        assert!(e.to_string().contains("family.kappa"), "{e}");
    }

    #[test]
    fn metric_section_and_angles() {
        let file = "[space]\nkind = \"cpn\"\nn = 1\n[metric]\na0 = 1\na_eps = \"1/2\"\nb_eps = 0.25\nxi = [1, 0, 0]\n[family]\ntheta = [\"3/5\", \"4/5\"]\n[run]\ntask = \"cone\"\n";
        let c = RunConfig::build(Some(file), &Overrides::default(), None).unwrap();
        let m = c.metric.unwrap();
        assert_eq!(m.blocks.b_eps, Q::ratio(1, 4));
        assert_eq!(c.family.theta, Some(Angle::ratio((3, 5), (4, 5))));
    }
}
