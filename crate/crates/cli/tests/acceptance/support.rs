use std::path::PathBuf;

pub struct Verdict {
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn pass(detail: impl Into<String>) -> Self {
        Self {
            passed: true,
            detail: detail.into(),
        }
    }

    pub fn fail(detail: impl Into<String>) -> Self {
        Self {
            passed: false,
            detail: detail.into(),
        }
    }

    /// Pass when every check holds; the detail lists the failing ones, or
    /// `summary` when none failed.
    pub fn from_checks(checks: &[(bool, String)], summary: String) -> Self {
        let failing: Vec<&str> = checks.iter().filter(|c| !c.0).map(|c| c.1.as_str()).collect();
        if failing.is_empty() {
            Self::pass(summary)
        } else {
            Self::fail(failing.join("; "))
        }
    }
}

pub fn core_data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core").join(rel)
}
