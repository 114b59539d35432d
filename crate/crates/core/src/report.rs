//! Machine-readable reports. Field order is fixed and nothing time-dependent
//! goes into the body, so identical inputs give byte-identical JSON.

use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::dsl::serialize_problem;
use crate::model::Problem;

pub const SCHEMA_VERSION: &str = "1.0";

/// A count as shown to users: exact, or a lower bound when enumeration hit
/// the cap. Serializes with its rendered form alongside.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Count {
    pub value: usize,
    pub exact: bool,
}

impl Count {
    pub fn new(value: usize, exact: bool) -> Self {
        Count { value, exact }
    }

    pub fn render(&self) -> String {
        if self.exact {
            self.value.to_string()
        } else {
            format!("≥ {}", self.value)
        }
    }
}

impl Serialize for Count {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Count", 3)?;
        st.serialize_field("value", &self.value)?;
        st.serialize_field("exact", &self.exact)?;
        st.serialize_field("display", &self.render())?;
        st.end()
    }
}

/// SHA-256 of the canonical text form, hex encoded.
pub fn problem_digest(p: &Problem) -> String {
    hex::encode(Sha256::digest(serialize_problem(p).as_bytes()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: &'static str,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem_digest: Option<String>,
    pub result: serde_json::Value,
    pub exactness: BTreeMap<String, bool>,
}

impl Report {
    pub fn new(command: impl Into<String>, problem: Option<&Problem>, result: impl Serialize) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            problem_digest: problem.map(problem_digest),
            result: serde_json::to_value(result).expect("report payloads serialize"),
            exactness: BTreeMap::new(),
        }
    }

    pub fn exact(mut self, what: impl Into<String>, exact: bool) -> Self {
        self.exactness.insert(what.into(), exact);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
