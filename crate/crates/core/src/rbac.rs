//! Token authentication and capability-level access control. Roles map
//! flatly to capability sets and readable node labels.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Label;

/// A routed intent class that access control decides on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CapabilityKind {
    GenericResponse,
    Summarize,
    SimilarArticles,
    SentimentLookup,
    TopicPrediction,
    FactCheck,
    IndustryPrediction,
    RawCypher,
}

impl CapabilityKind {
    pub const ALL: [CapabilityKind; 8] = [
        CapabilityKind::GenericResponse,
        CapabilityKind::Summarize,
        CapabilityKind::SimilarArticles,
        CapabilityKind::SentimentLookup,
        CapabilityKind::TopicPrediction,
        CapabilityKind::FactCheck,
        CapabilityKind::IndustryPrediction,
        CapabilityKind::RawCypher,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CapabilityKind::GenericResponse => "GenericResponse",
            CapabilityKind::Summarize => "Summarize",
            CapabilityKind::SimilarArticles => "SimilarArticles",
            CapabilityKind::SentimentLookup => "SentimentLookup",
            CapabilityKind::TopicPrediction => "TopicPrediction",
            CapabilityKind::FactCheck => "FactCheck",
            CapabilityKind::IndustryPrediction => "IndustryPrediction",
            CapabilityKind::RawCypher => "RawCypher",
        }
    }

    /// Whether the capability reads the knowledge graph.
    pub fn reads_graph(self) -> bool {
        matches!(
            self,
            CapabilityKind::SimilarArticles
                | CapabilityKind::SentimentLookup
                | CapabilityKind::TopicPrediction
                | CapabilityKind::RawCypher
        )
    }
}

impl fmt::Display for CapabilityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CapabilityKind {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CapabilityKind::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| PolicyError::UnknownCapabilityName(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Role {
    pub name: String,
    pub capabilities: BTreeSet<CapabilityKind>,
    /// Node labels this role may read.
    pub labels: BTreeSet<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Principal {
    pub user_id: String,
    pub roles: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenGrant {
    pub user: String,
    pub roles: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Policy {
    roles: Vec<Role>,
    tokens: BTreeMap<String, TokenGrant>,
}

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("policy format error: {0}")]
    Format(String),
    #[error("unknown capability name {0:?}")]
    UnknownCapabilityName(String),
    #[error("I/O failure reading policy: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AuthError {
    #[error("invalid token")]
    InvalidToken,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AccessVerdict {
    Grant,
    Deny,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessDecision {
    pub verdict: AccessVerdict,
    pub role_used: Option<String>,
    pub reason: String,
}

impl AccessDecision {
    pub fn is_grant(&self) -> bool {
        self.verdict == AccessVerdict::Grant
    }
}

#[derive(Serialize, Deserialize)]
struct RoleFile {
    name: String,
    capabilities: Vec<String>,
    #[serde(default)]
    labels: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyFile {
    roles: Vec<RoleFile>,
    #[serde(default)]
    tokens: BTreeMap<String, TokenGrant>,
}

const ADMIN_CAPABILITIES: &[CapabilityKind] = &CapabilityKind::ALL;
const ANALYST_CAPABILITIES: &[CapabilityKind] = &[
    CapabilityKind::SimilarArticles,
    CapabilityKind::SentimentLookup,
    CapabilityKind::TopicPrediction,
    CapabilityKind::Summarize,
    CapabilityKind::GenericResponse,
];
const GUEST_CAPABILITIES: &[CapabilityKind] = &[CapabilityKind::GenericResponse, CapabilityKind::Summarize];

impl Default for Policy {
    /// admin, analyst and guest roles with one token each.
    fn default() -> Self {
        let all_labels: BTreeSet<String> = Label::ALL.iter().map(|l| l.as_str().to_string()).collect();
        let role = |name: &str, caps: &[CapabilityKind], labels: BTreeSet<String>| Role {
            name: name.into(),
            capabilities: caps.iter().copied().collect(),
            labels,
        };
        let grant = |user: &str, role: &str| TokenGrant { user: user.into(), roles: vec![role.into()] };
        Policy {
            roles: vec![
                role("admin", ADMIN_CAPABILITIES, all_labels.clone()),
                role("analyst", ANALYST_CAPABILITIES, all_labels),
                role("guest", GUEST_CAPABILITIES, BTreeSet::new()),
            ],
            tokens: BTreeMap::from([
                ("t-admin-1".to_string(), grant("admin1", "admin")),
                ("t-analyst-1".to_string(), grant("analyst1", "analyst")),
                ("t-guest-1".to_string(), grant("guest1", "guest")),
            ]),
        }
    }
}

impl Policy {
    /// Builds a policy, checking that role names are unique, capability
    /// sets non-empty, labels known, and that every token maps to at
    /// least one existing role.
    pub fn new(roles: Vec<Role>, tokens: BTreeMap<String, TokenGrant>) -> Result<Self, PolicyError> {
        let mut names = BTreeSet::new();
        for role in &roles {
            if !names.insert(role.name.as_str()) {
                return Err(PolicyError::Format(format!("duplicate role {:?}", role.name)));
            }
            if role.capabilities.is_empty() {
                return Err(PolicyError::Format(format!("role {:?} has no capabilities", role.name)));
            }
            if let Some(bad) = role.labels.iter().find(|l| l.parse::<Label>().is_err()) {
                return Err(PolicyError::Format(format!("role {:?} lists unknown label {bad:?}", role.name)));
            }
        }
        for (token, grant) in &tokens {
            if token.is_empty() {
                return Err(PolicyError::Format("empty token".into()));
            }
            if grant.roles.is_empty() {
                return Err(PolicyError::Format(format!("user {:?} has no roles", grant.user)));
            }
            if let Some(bad) = grant.roles.iter().find(|r| !names.contains(r.as_str())) {
                return Err(PolicyError::Format(format!("user {:?} has unknown role {bad:?}", grant.user)));
            }
        }
        Ok(Policy { roles, tokens })
    }

    pub fn from_json(text: &str) -> Result<Self, PolicyError> {
        let file: PolicyFile = serde_json::from_str(text).map_err(|e| PolicyError::Format(e.to_string()))?;
        let mut roles = Vec::with_capacity(file.roles.len());
        for r in file.roles {
            let capabilities = r.capabilities.iter().map(|c| c.parse()).collect::<Result<_, _>>()?;
            roles.push(Role { name: r.name, capabilities, labels: r.labels.into_iter().collect() });
        }
        Policy::new(roles, file.tokens)
    }

    pub fn to_json(&self) -> String {
        let file = PolicyFile {
            roles: self
                .roles
                .iter()
                .map(|r| RoleFile {
                    name: r.name.clone(),
                    capabilities: r.capabilities.iter().map(|c| c.as_str().to_string()).collect(),
                    labels: r.labels.iter().cloned().collect(),
                })
                .collect(),
            tokens: self.tokens.clone(),
        };
        serde_json::to_string_pretty(&file).expect("policy serializes")
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn role(&self, name: &str) -> Option<&Role> {
        self.roles.iter().find(|r| r.name == name)
    }

    pub fn tokens(&self) -> &BTreeMap<String, TokenGrant> {
        &self.tokens
    }

    /// Capabilities granted by any of the principal's roles.
    pub fn capabilities_of(&self, principal: &Principal) -> BTreeSet<CapabilityKind> {
        self.roles_of(principal).flat_map(|r| r.capabilities.iter().copied()).collect()
    }

    /// Node labels readable through any of the principal's roles.
    pub fn labels_of(&self, principal: &Principal) -> BTreeSet<String> {
        self.roles_of(principal).flat_map(|r| r.labels.iter().cloned()).collect()
    }

    fn roles_of<'a>(&'a self, principal: &'a Principal) -> impl Iterator<Item = &'a Role> + 'a {
        principal.roles.iter().filter_map(|name| self.role(name))
    }
}

/// Reads a policy file, or returns the built-in policy when `path` is None.
pub fn load_policy(path: Option<&Path>) -> Result<Policy, PolicyError> {
    match path {
        None => Ok(Policy::default()),
        Some(path) => Policy::from_json(&std::fs::read_to_string(path)?),
    }
}

pub fn authenticate(token: &str, policy: &Policy) -> Result<Principal, AuthError> {
    policy
        .tokens
        .get(token)
        .map(|g| Principal { user_id: g.user.clone(), roles: g.roles.clone() })
        .ok_or(AuthError::InvalidToken)
}

/// Grants when any of the principal's roles lists `capability`; the first
/// such role, in the principal's order, is reported.
pub fn authorize(principal: &Principal, capability: CapabilityKind, policy: &Policy) -> AccessDecision {
    match policy.roles_of(principal).find(|r| r.capabilities.contains(&capability)) {
        Some(role) => AccessDecision {
            verdict: AccessVerdict::Grant,
            role_used: Some(role.name.clone()),
            reason: format!("role {} grants {}", role.name, capability),
        },
        None => AccessDecision {
            verdict: AccessVerdict::Deny,
            role_used: None,
            reason: format!("none of the roles [{}] grants {}", principal.roles.join(", "), capability),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    use CapabilityKind::*;

    fn principal(role: &str) -> Principal {
        Principal { user_id: format!("{role}-user"), roles: vec![role.into()] }
    }

    #[test]
    fn default_policy_shape() {
        let p = Policy::default();
        assert_eq!(p.roles().len(), 3);
        assert_eq!(p.role("admin").unwrap().capabilities.len(), 8);
        assert!(p.role("guest").unwrap().labels.is_empty());
    }

    #[test]
    fn full_matrix() {
        let p = Policy::default();
        let expected: [(&str, &[CapabilityKind]); 3] = [
            ("admin", &CapabilityKind::ALL),
            ("analyst", &[GenericResponse, Summarize, SimilarArticles, SentimentLookup, TopicPrediction]),
            ("guest", &[GenericResponse, Summarize]),
        ];
        for (role, granted) in expected {
            for cap in CapabilityKind::ALL {
                let d = authorize(&principal(role), cap, &p);
                assert_eq!(d.is_grant(), granted.contains(&cap), "{role} x {cap}");
                if d.is_grant() {
                    assert_eq!(d.role_used.as_deref(), Some(role));
                } else {
                    assert!(d.role_used.is_none());
                    assert!(d.reason.contains(cap.as_str()));
                }
            }
        }
    }

    #[test]
    fn authentication() {
        let p = Policy::default();
        assert_eq!(
            authenticate("t-analyst-1", &p).unwrap(),
            Principal { user_id: "analyst1".into(), roles: vec!["analyst".into()] }
        );
        assert_eq!(authenticate("", &p), Err(AuthError::InvalidToken));
        assert_eq!(authenticate("t-nobody", &p), Err(AuthError::InvalidToken));
    }

    #[test]
    fn file_round_trip_and_errors() {
        let p = Policy::default();
        assert_eq!(Policy::from_json(&p.to_json()).unwrap(), p);
        let bad = r#"{"roles":[{"name":"x","capabilities":["TimeTravel"],"labels":[]}],"tokens":{}}"#;
        assert!(matches!(Policy::from_json(bad), Err(PolicyError::UnknownCapabilityName(n)) if n == "TimeTravel"));
        let bad = r#"{"roles":[{"name":"x","capabilities":[],"labels":[]}]}"#;
        assert!(matches!(Policy::from_json(bad), Err(PolicyError::Format(_))));
        let bad = r#"{"roles":[{"name":"x","capabilities":["Summarize"],"labels":["User"]}]}"#;
        assert!(matches!(Policy::from_json(bad), Err(PolicyError::Format(_))));
        let bad = r#"{"roles":[{"name":"x","capabilities":["Summarize"]}],"tokens":{"t":{"user":"u","roles":["y"]}}}"#;
        assert!(matches!(Policy::from_json(bad), Err(PolicyError::Format(_))));
        assert!(matches!(Policy::from_json("[]"), Err(PolicyError::Format(_))));
        assert!(matches!(load_policy(Some(Path::new("/nonexistent/policy.json"))), Err(PolicyError::Io(_))));
        assert_eq!(load_policy(None).unwrap(), p);
    }

    #[test]
    fn multiple_roles_union() {
        let p = Policy::default();
        let both = Principal { user_id: "u".into(), roles: vec!["guest".into(), "analyst".into()] };
        let d = authorize(&both, SimilarArticles, &p);
        assert_eq!(d.role_used.as_deref(), Some("analyst"));
        assert_eq!(authorize(&both, Summarize, &p).role_used.as_deref(), Some("guest"));
        assert_eq!(p.labels_of(&both).len(), 2);
    }

    fn arb_caps() -> impl Strategy<Value = BTreeSet<CapabilityKind>> {
        prop::collection::btree_set(prop::sample::select(CapabilityKind::ALL.to_vec()), 1..=8)
    }

    proptest! {
        #[test]
        fn adding_a_capability_never_revokes(
            caps in arb_caps(),
            extra in prop::sample::select(CapabilityKind::ALL.to_vec()),
            probe in prop::sample::select(CapabilityKind::ALL.to_vec()),
        ) {
            let role = |caps: BTreeSet<CapabilityKind>| Role { name: "r".into(), capabilities: caps, labels: BTreeSet::new() };
            let before = Policy::new(vec![role(caps.clone())], BTreeMap::new()).unwrap();
            let mut grown = caps;
            grown.insert(extra);
            let after = Policy::new(vec![role(grown)], BTreeMap::new()).unwrap();
            let who = principal("r");
            if authorize(&who, probe, &before).is_grant() {
                prop_assert!(authorize(&who, probe, &after).is_grant());
            }
        }

        #[test]
        fn decision_depends_only_on_roles(
            role_caps in prop::collection::vec(arb_caps(), 1..4),
            pick in prop::collection::vec(any::<prop::sample::Index>(), 1..4),
            users in ("[a-z]{1,8}", "[a-z]{1,8}"),
            probe in prop::sample::select(CapabilityKind::ALL.to_vec()),
        ) {
            let roles: Vec<Role> = role_caps.iter().enumerate()
                .map(|(i, c)| Role { name: format!("r{i}"), capabilities: c.clone(), labels: BTreeSet::new() })
                .collect();
            let names: Vec<String> = pick.iter().map(|ix| roles[ix.index(roles.len())].name.clone()).collect();
            let policy = Policy::new(roles.clone(), BTreeMap::new()).unwrap();
            let a = Principal { user_id: users.0, roles: names.clone() };
            let b = Principal { user_id: users.1, roles: names.clone() };
            let da = authorize(&a, probe, &policy);
            prop_assert_eq!(&da, &authorize(&b, probe, &policy));
            let expected = names.iter().any(|n| roles.iter().any(|r| &r.name == n && r.capabilities.contains(&probe)));
            prop_assert_eq!(da.is_grant(), expected);
        }
    }
}
