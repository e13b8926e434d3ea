use serde::{Deserialize, Serialize};

use crate::scalar::{Mode, Residual, Scalar, FLOAT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub verdict: Verdict,
    pub residual: Residual,
    pub witness: Vec<String>,
    pub caveats: Vec<String>,
    /// Computed quantity attached to the check, such as an Einstein constant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    /// What the check compared against.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn with_caveats(mut self, caveats: &[String]) -> Self {
        for c in caveats {
            if !self.caveats.contains(c) {
                self.caveats.push(c.clone());
            }
        }
        self
    }

    pub fn with_value(mut self, v: impl Into<String>) -> Self {
        self.value = Some(v.into());
        self
    }

    pub fn with_source(mut self, s: impl Into<String>) -> Self {
        self.source = Some(s.into());
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// A failing report that is not tied to a numeric residual.
    pub fn failure(name: impl Into<String>, mode: Mode, witness: Vec<String>) -> Self {
        CheckReport {
            name: name.into(),
            verdict: Verdict::Fail,
            residual: match mode {
                Mode::Exact => Residual::Exact {
                    num: "1".into(),
                    den: "1".into(),
                },
                Mode::Float => Residual::Float(f64::INFINITY),
            },
            witness,
            caveats: vec![],
            value: None,
            source: None,
        }
    }

    /// Combines sub-reports: fails if any fails, keeps the first failing witness.
    pub fn all(name: impl Into<String>, mode: Mode, parts: &[CheckReport]) -> Self {
        let mut out = CheckReport {
            name: name.into(),
            verdict: Verdict::Pass,
            residual: Residual::zero(mode),
            witness: vec![],
            caveats: vec![],
            value: None,
            source: None,
        };
        let mut worst = 0.0f64;
        for p in parts {
            let r = p.residual.to_f64();
            if r > worst {
                worst = r;
                out.residual = p.residual.clone();
            }
            if p.verdict == Verdict::Fail && out.verdict == Verdict::Pass {
                out.verdict = Verdict::Fail;
                out.witness = std::iter::once(p.name.clone())
                    .chain(p.witness.iter().cloned())
                    .collect();
            }
            for c in &p.caveats {
                if !out.caveats.contains(c) {
                    out.caveats.push(c.clone());
                }
            }
        }
        out
    }
}

/// Accumulates residuals for one check. The verdict fails as soon as any
/// tracked value is nonzero (exact) or above tolerance (float); the residual is
/// the maximum absolute deviation and the witness is the first violation.
pub struct Tracker<S: Scalar> {
    name: String,
    tol: f64,
    max: S,
    witness: Option<Vec<String>>,
}

impl<S: Scalar> Tracker<S> {
    pub fn new(name: impl Into<String>) -> Self {
        Self::with_tol(name, FLOAT_TOL)
    }

    pub fn with_tol(name: impl Into<String>, tol: f64) -> Self {
        Tracker {
            name: name.into(),
            tol,
            max: S::zero(),
            witness: None,
        }
    }

    pub fn track(&mut self, deviation: &S, witness: impl FnOnce() -> Vec<String>) {
        let a = deviation.abs();
        if a.near_zero(self.tol) {
            if a > self.max {
                self.max = a;
            }
            return;
        }
        if self.witness.is_none() {
            self.witness = Some(witness());
        }
        if a > self.max {
            self.max = a;
        }
    }

    pub fn ok(&self) -> bool {
        self.witness.is_none()
    }

    /// Marks a non-numeric violation.
    pub fn flag(&mut self, witness: Vec<String>) {
        if self.witness.is_none() {
            self.witness = Some(witness);
        }
        if self.max.is_zero() {
            self.max = S::one();
        }
    }

    pub fn finish(self) -> CheckReport {
        let verdict = if self.witness.is_none() {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        CheckReport {
            name: self.name,
            verdict,
            residual: self.max.residual(),
            witness: self.witness.unwrap_or_default(),
            caveats: vec![],
            value: None,
            source: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Q;

    #[test]
    fn tracker_keeps_first_witness_and_max_residual() {
        let mut t = Tracker::<Q>::new("t");
        t.track(&Q::ratio(0, 1), || vec!["a".into()]);
        t.track(&Q::ratio(-1, 3), || vec!["b".into()]);
        t.track(&Q::ratio(1, 2), || vec!["c".into()]);
        let r = t.finish();
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.witness, vec!["b".to_string()]);
        assert_eq!(r.residual.to_string(), "1/2");
    }

    #[test]
    fn float_tracker_respects_tolerance() {
        let mut t = Tracker::<f64>::new("t");
        t.track(&1e-12, Vec::new);
        assert!(t.finish().passed());
    }
}
