//! Verification reports and their JSON form.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub location: Option<String>,
    pub residual: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn pass(name: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            status: Status::Pass,
            location: None,
            residual: None,
            detail: None,
        }
    }

    /// A failure; `residual` must be a nonzero witness.
    pub fn fail(
        name: impl Into<String>,
        location: Option<String>,
        residual: impl Into<String>,
    ) -> Self {
        Check {
            name: name.into(),
            status: Status::Fail,
            location,
            residual: Some(residual.into()),
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn with_location(mut self, location: impl Into<String>) -> Self {
        self.location = Some(location.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub case: String,
    pub seed: u64,
    pub trials: usize,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(case: impl Into<String>, seed: u64, trials: usize) -> Self {
        Report {
            case: case.into(),
            seed,
            trials,
            checks: Vec::new(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = Check>) {
        self.checks.extend(checks);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let mut r = Report::new("233", 20231, 5);
        r.checks.push(Check::pass("eta"));
        r.checks
            .push(Check::fail("wdvv", Some("(1,2,3,4)".into()), "1/2"));
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["case"], "233");
        assert_eq!(v["seed"], 20231);
        assert_eq!(v["checks"][0]["status"], "pass");
        assert_eq!(v["checks"][0]["location"], serde_json::Value::Null);
        assert_eq!(v["checks"][1]["residual"], "1/2");
        assert!(!r.all_pass());
    }
}
