use std::collections::BTreeMap;
use std::fmt;

use jrt::{XLaurent, Q};
use num_traits::ToPrimitive;
use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

use crate::config::ScenarioConfig;

/// One side of a check. Rationals serialize as [numerator, denominator];
/// Laurent polynomials as a list of [exponent, [numerator, denominator]].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Rational(Q),
    Laurent(XLaurent),
    Integer(i64),
    Boolean(bool),
}

impl From<Q> for Value {
    fn from(q: Q) -> Self {
        Value::Rational(q)
    }
}

impl From<XLaurent> for Value {
    fn from(x: XLaurent) -> Self {
        Value::Laurent(x)
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::Integer(n)
    }
}

impl From<usize> for Value {
    fn from(n: usize) -> Self {
        Value::Integer(n as i64)
    }
}

impl From<u64> for Value {
    fn from(n: u64) -> Self {
        Value::Integer(n as i64)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Boolean(b)
    }
}

fn big<N: ToPrimitive + ToString>(n: &N) -> serde_json::Value {
    match n.to_i64() {
        Some(v) => v.into(),
        None => n.to_string().into(),
    }
}

fn pair(q: &Q) -> serde_json::Value {
    serde_json::Value::Array(vec![big(q.numer()), big(q.denom())])
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(1))?;
        match self {
            Value::Rational(q) => m.serialize_entry("rational", &pair(q))?,
            Value::Laurent(x) => m.serialize_entry("laurent", &LaurentTerms(x))?,
            Value::Integer(n) => m.serialize_entry("integer", n)?,
            Value::Boolean(b) => m.serialize_entry("boolean", b)?,
        }
        m.end()
    }
}

struct LaurentTerms<'a>(&'a XLaurent);

impl Serialize for LaurentTerms<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let terms: Vec<_> = self.0.terms().collect();
        let mut seq = s.serialize_seq(Some(terms.len()))?;
        for (k, c) in terms {
            seq.serialize_element(&(k, pair(c)))?;
        }
        seq.end()
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Rational(q) => write!(f, "{q}"),
            Value::Laurent(x) => write!(f, "{x}"),
            Value::Integer(n) => write!(f, "{n}"),
            Value::Boolean(b) => write!(f, "{b}"),
        }
    }
}

/// What a check asserts about its two sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Equal,
    /// The two sides are expected to differ.
    Differ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        })
    }
}

pub type Parameters = BTreeMap<String, serde_json::Value>;

/// A comparison produced by a suite body, before bookkeeping.
#[derive(Debug, Clone)]
pub struct Check {
    pub check: String,
    pub parameters: Parameters,
    pub lhs: Value,
    pub rhs: Value,
    pub relation: Relation,
}

impl Check {
    pub fn equal(check: impl Into<String>, parameters: Parameters, lhs: impl Into<Value>, rhs: impl Into<Value>) -> Self {
        Check { check: check.into(), parameters, lhs: lhs.into(), rhs: rhs.into(), relation: Relation::Equal }
    }

    pub fn differ(check: impl Into<String>, parameters: Parameters, lhs: impl Into<Value>, rhs: impl Into<Value>) -> Self {
        Check { check: check.into(), parameters, lhs: lhs.into(), rhs: rhs.into(), relation: Relation::Differ }
    }

    pub fn holds(&self) -> bool {
        match self.relation {
            Relation::Equal => self.lhs == self.rhs,
            Relation::Differ => self.lhs != self.rhs,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub suite: String,
    pub sample_id: usize,
    pub check: String,
    pub parameters: Parameters,
    pub lhs: Option<Value>,
    pub rhs: Option<Value>,
    pub relation: Option<Relation>,
    pub status: Status,
    pub runtime_ms: Option<u64>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
    pub config: ScenarioConfig,
    pub version: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub records: Vec<Record>,
    pub summary: Summary,
}

impl Report {
    pub fn new(records: Vec<Record>, config: ScenarioConfig) -> Self {
        let count = |s: Status| records.iter().filter(|r| r.status == s).count();
        let summary = Summary {
            pass: count(Status::Pass),
            fail: count(Status::Fail),
            skipped: count(Status::Skipped),
            config,
            version: env!("CARGO_PKG_VERSION").to_string(),
        };
        Report { records, summary }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.fail == 0
    }

    pub fn suite_records<'a>(&'a self, suite: &'a str) -> impl Iterator<Item = &'a Record> + 'a {
        self.records.iter().filter(move |r| r.suite == suite)
    }
}
