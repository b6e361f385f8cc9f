//! Verdicts, witnesses and the report document emitted by the CLI.
//!
//! Every checker in the crate returns a [`Verdict`]: a boolean plus, when the
//! law fails, a [`Witness`] naming the law and the participants that break it.
//! Witnesses are plain data so they survive a JSON round trip unchanged.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Tool and format version stamped into every report.
pub const VERSION: &str = concat!("qcrib ", env!("CARGO_PKG_VERSION"), " / report-format 1");

/// A participant in a counterexample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Value {
    Object(String),
    /// An element of a hom-lattice `src -> dst` of a quantaloid.
    Arrow { src: String, dst: String, id: String },
    /// A morphism of a finite category.
    Morphism(String),
    Element(String),
    Sieve { at: String, members: Vec<String> },
    Crible {
        source: String,
        target: String,
        spans: Vec<(String, String)>,
    },
    /// Rows are indexed by the target typed set, columns by the source.
    Matrix {
        rows: Vec<String>,
        cols: Vec<String>,
        entries: Vec<Vec<String>>,
    },
    /// A natural family on a sieve: member morphism -> assigned morphism.
    Family(Vec<(String, String)>),
    Count(u64),
    Text(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Object(o) => write!(f, "{o}"),
            Value::Arrow { src, dst, id } => write!(f, "{id} : {src} -> {dst}"),
            Value::Morphism(m) | Value::Element(m) | Value::Text(m) => write!(f, "{m}"),
            Value::Sieve { at, members } => write!(f, "{{{}}} on {at}", members.join(",")),
            Value::Crible {
                source,
                target,
                spans,
            } => {
                let body: Vec<String> = spans.iter().map(|(a, b)| format!("({a},{b})")).collect();
                write!(f, "{{{}}} : {source} -|-> {target}", body.join(","))
            }
            Value::Matrix { rows, cols, entries } => {
                let body: Vec<String> = entries.iter().map(|r| format!("[{}]", r.join(" "))).collect();
                write!(f, "[{}] ({} <- {})", body.join(" "), rows.join(","), cols.join(","))
            }
            Value::Family(pairs) => {
                let body: Vec<String> = pairs.iter().map(|(s, t)| format!("{s}=>{t}")).collect();
                write!(f, "{{{}}}", body.join(", "))
            }
            Value::Count(n) => write!(f, "{n}"),
        }
    }
}

/// A structured counterexample: the violated law and its named participants.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub law: String,
    pub items: BTreeMap<String, Value>,
}

impl Witness {
    pub fn new(law: impl Into<String>) -> Self {
        Witness {
            law: law.into(),
            items: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: Value) -> Self {
        self.items.insert(key.into(), value);
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.items.get(key)
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.law)?;
        let mut first = true;
        for (k, v) in &self.items {
            write!(f, "{} {k} = {v}", if first { ":" } else { "," })?;
            first = false;
        }
        Ok(())
    }
}

/// Outcome of a single law check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub holds: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl Verdict {
    pub fn pass() -> Self {
        Verdict {
            holds: true,
            witness: None,
        }
    }

    pub fn fail(witness: Witness) -> Self {
        Verdict {
            holds: false,
            witness: Some(witness),
        }
    }

    pub fn from_option(witness: Option<Witness>) -> Self {
        match witness {
            None => Verdict::pass(),
            Some(w) => Verdict::fail(w),
        }
    }
}

/// One named line of a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub verdict: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl Check {
    pub fn new(name: impl Into<String>, verdict: Verdict) -> Self {
        Check {
            name: name.into(),
            verdict: verdict.holds,
            witness: verdict.witness,
            timing_ms: None,
        }
    }

    pub fn timed(mut self, ms: f64) -> Self {
        self.timing_ms = Some(ms);
        self
    }
}

/// The document written by every CLI command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub subject: String,
    pub version: String,
    pub overall: bool,
    pub checks: Vec<Check>,
    /// Constructed artefacts (derived topology, isomorphism tables, ...).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub data: BTreeMap<String, serde_json::Value>,
}

impl CheckReport {
    pub fn new(subject: impl Into<String>) -> Self {
        CheckReport {
            subject: subject.into(),
            version: VERSION.to_string(),
            overall: true,
            checks: Vec::new(),
            data: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        self.overall &= check.verdict;
        self.checks.push(check);
    }

    pub fn attach(&mut self, key: impl Into<String>, value: serde_json::Value) {
        self.data.insert(key.into(), value);
    }

    /// JSON with every timing field removed; equal inputs give equal strings.
    pub fn canonical_json(&self) -> String {
        let mut stripped = self.clone();
        for c in &mut stripped.checks {
            c.timing_ms = None;
        }
        serde_json::to_string_pretty(&stripped).expect("report serialises")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("subject: {}\n", self.subject);
        for c in &self.checks {
            let tag = if c.verdict { "pass" } else { "FAIL" };
            out.push_str(&format!("  [{tag}] {}", c.name));
            if let Some(w) = &c.witness {
                out.push_str(&format!("  witness {w}"));
            }
            out.push('\n');
        }
        for (k, v) in &self.data {
            match v {
                serde_json::Value::String(s) => out.push_str(&format!("{k}: {s}\n")),
                other => out.push_str(&format!("{k}: {other}\n")),
            }
        }
        out.push_str(&format!("overall: {}\n", if self.overall { "pass" } else { "FAIL" }));
        out
    }
}
