use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub const DEFAULT_LICENSES: [&str; 5] = ["CC0-1.0", "CC-BY-4.0", "CC-BY-SA-4.0", "CC-BY-3.0", "CC-BY-SA-3.0"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LicenseDecision {
    Accepted,
    Rejected,
}

/// Whitelist of license ids, compared case-insensitively.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct LicensePolicy {
    accepted: BTreeSet<String>,
}

impl Default for LicensePolicy {
    fn default() -> Self {
        Self::from_ids(DEFAULT_LICENSES)
    }
}

impl From<Vec<String>> for LicensePolicy {
    fn from(ids: Vec<String>) -> Self {
        Self::from_ids(ids)
    }
}

impl From<LicensePolicy> for Vec<String> {
    fn from(p: LicensePolicy) -> Self {
        p.accepted.into_iter().collect()
    }
}

fn key(id: &str) -> String {
    id.trim().to_ascii_uppercase()
}

impl LicensePolicy {
    pub fn from_ids<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        LicensePolicy {
            accepted: ids.into_iter().map(|s| key(s.as_ref())).filter(|s| !s.is_empty()).collect(),
        }
    }

    pub fn extend<I, S>(&mut self, ids: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.accepted
            .extend(ids.into_iter().map(|s| key(s.as_ref())).filter(|s| !s.is_empty()));
    }

    pub fn check(&self, id: &str) -> LicenseDecision {
        let k = key(id);
        if !k.is_empty() && self.accepted.contains(&k) {
            LicenseDecision::Accepted
        } else {
            LicenseDecision::Rejected
        }
    }

    pub fn accepts(&self, id: &str) -> bool {
        self.check(id) == LicenseDecision::Accepted
    }
}

/// Maps Creative Commons license URLs to SPDX-style ids; anything else is
/// returned trimmed.
pub fn canonical_license_id(raw: &str) -> String {
    let s = raw.trim();
    let lower = s.to_ascii_lowercase();
    let path = lower
        .trim_start_matches("https://")
        .trim_start_matches("http://")
        .trim_start_matches("www.");
    if let Some(rest) = path.strip_prefix("creativecommons.org/") {
        let parts: Vec<&str> = rest.split('/').filter(|p| !p.is_empty()).collect();
        match parts.as_slice() {
            ["publicdomain", "zero", version, ..] => return format!("CC0-{version}"),
            ["licenses", kind, version, ..] => return format!("CC-{}-{version}", kind.to_ascii_uppercase()),
            _ => {}
        }
    }
    s.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_whitelist() {
        let p = LicensePolicy::default();
        assert_eq!(p.check("CC-BY-4.0"), LicenseDecision::Accepted);
        assert!(p.accepts("cc0-1.0"));
        assert!(p.accepts(" cc-by-sa-3.0 "));
        assert_eq!(p.check(""), LicenseDecision::Rejected);
        assert_eq!(p.check("GPL-3.0-only"), LicenseDecision::Rejected);
        assert!(!p.accepts("CC-BY-NC-4.0"));
    }

    #[test]
    fn extension_by_config() {
        let mut p = LicensePolicy::default();
        assert!(!p.accepts("ODC-BY-1.0"));
        p.extend(["odc-by-1.0"]);
        assert!(p.accepts("ODC-BY-1.0"));
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<LicensePolicy>(&json).unwrap(), p);
    }

    #[test]
    fn creative_commons_urls() {
        assert_eq!(canonical_license_id("http://creativecommons.org/licenses/by/4.0/"), "CC-BY-4.0");
        assert_eq!(canonical_license_id("https://creativecommons.org/licenses/by-sa/3.0"), "CC-BY-SA-3.0");
        assert_eq!(canonical_license_id("http://creativecommons.org/publicdomain/zero/1.0/"), "CC0-1.0");
        assert_eq!(canonical_license_id(" MIT "), "MIT");
    }
}
