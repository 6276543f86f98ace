use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use super::action::{Action, ActionPattern};
use super::condition::{ConditionBlock, Context, OneOrMany, RawCondition};
use super::resource::ResourcePattern;
use super::PolicyError;

/// The only policy language version accepted.
pub const POLICY_VERSION: &str = "2012-10-17";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Effect {
    Allow,
    Deny,
}

impl Effect {
    pub fn as_str(self) -> &'static str {
        match self {
            Effect::Allow => "Allow",
            Effect::Deny => "Deny",
        }
    }
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Effect {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Statement {
    effect: Effect,
    principals: Option<Vec<String>>,
    actions: Vec<ActionPattern>,
    resources: Vec<ResourcePattern>,
    condition: ConditionBlock,
}

impl Statement {
    pub fn new(
        effect: Effect,
        actions: Vec<ActionPattern>,
        resources: Vec<ResourcePattern>,
    ) -> Result<Self, PolicyError> {
        if actions.is_empty() {
            return Err(PolicyError::EmptyActions { statement: 0 });
        }
        if resources.is_empty() {
            return Err(PolicyError::EmptyResources { statement: 0 });
        }
        Ok(Self {
            effect,
            principals: None,
            actions,
            resources,
            condition: ConditionBlock::new(),
        })
    }

    /// Turns this into a resource-based statement naming user or account ids.
    pub fn with_principals(mut self, principals: Vec<String>) -> Result<Self, PolicyError> {
        if principals.is_empty() {
            return Err(PolicyError::EmptyPrincipals { statement: 0 });
        }
        self.principals = Some(principals);
        Ok(self)
    }

    pub fn with_condition(mut self, condition: ConditionBlock) -> Self {
        self.condition = condition;
        self
    }

    pub fn effect(&self) -> Effect {
        self.effect
    }

    pub fn principals(&self) -> Option<&[String]> {
        self.principals.as_deref()
    }

    pub fn actions(&self) -> &[ActionPattern] {
        &self.actions
    }

    pub fn resources(&self) -> &[ResourcePattern] {
        &self.resources
    }

    pub fn condition(&self) -> &ConditionBlock {
        &self.condition
    }

    pub fn matches_action(&self, action: &Action) -> bool {
        self.actions.iter().any(|p| p.matches(action))
    }

    pub fn matches_resource(&self, arn: &str) -> bool {
        self.resources.iter().any(|p| p.matches(arn))
    }

    pub fn condition_holds(&self, context: &Context) -> bool {
        self.condition.holds(context)
    }

    /// True when the principal list names `user` or `account`. Identity-based
    /// statements (no principal list) cover nobody.
    pub fn covers_principal(&self, user: &str, account: &str) -> bool {
        self.principals
            .as_deref()
            .is_some_and(|ps| ps.iter().any(|p| p == user || p == account))
    }
}

/// A named policy document. The name is not part of the JSON form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolicyDocument {
    name: String,
    statements: Vec<Statement>,
}

impl PolicyDocument {
    pub fn new(name: impl Into<String>, statements: Vec<Statement>) -> Self {
        Self {
            name: name.into(),
            statements,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn version(&self) -> &'static str {
        POLICY_VERSION
    }

    pub fn statements(&self) -> &[Statement] {
        &self.statements
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// True when any statement carries a `Principal` element.
    pub fn has_principals(&self) -> bool {
        self.statements.iter().any(|s| s.principals.is_some())
    }

    pub fn to_json(&self) -> String {
        serialize_policy(self)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&WireDocumentOut::from(self))
            .expect("policy documents always serialize")
    }
}

/// Default name given to documents parsed without one.
pub const DEFAULT_POLICY_NAME: &str = "policy";

/// Parses a policy document in the `Version`/`Statement` JSON grammar.
pub fn parse_policy(text: &str) -> Result<PolicyDocument, PolicyError> {
    parse_named_policy(DEFAULT_POLICY_NAME, text)
}

pub fn parse_named_policy(name: &str, text: &str) -> Result<PolicyDocument, PolicyError> {
    let wire: WireDocument = serde_json::from_str(text)?;
    wire.into_document(name)
}

/// Parses a document already decoded as a JSON value (e.g. embedded in a
/// scenario file).
pub fn policy_from_value(name: &str, value: serde_json::Value) -> Result<PolicyDocument, PolicyError> {
    let wire: WireDocument = serde_json::from_value(value)?;
    wire.into_document(name)
}

/// Compact canonical JSON: `Version`, `Statement`; within a statement
/// `Effect`, `Principal`, `Action`, `Resource`, `Condition`. Single-element
/// lists are written as plain strings.
pub fn serialize_policy(doc: &PolicyDocument) -> String {
    serde_json::to_string(&WireDocumentOut::from(doc)).expect("policy documents always serialize")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WireDocument {
    #[serde(rename = "Version")]
    version: String,
    #[serde(rename = "Statement")]
    statement: Vec<WireStatement>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WireStatement {
    #[serde(rename = "Effect")]
    effect: String,
    #[serde(rename = "Principal", default)]
    principal: Option<OneOrMany>,
    #[serde(rename = "Action")]
    action: OneOrMany,
    #[serde(rename = "Resource")]
    resource: OneOrMany,
    #[serde(rename = "Condition", default)]
    condition: Option<RawCondition>,
}

impl WireDocument {
    fn into_document(self, name: &str) -> Result<PolicyDocument, PolicyError> {
        if self.version != POLICY_VERSION {
            return Err(PolicyError::UnsupportedVersion(self.version));
        }
        let statements = self
            .statement
            .into_iter()
            .enumerate()
            .map(|(idx, s)| s.into_statement(idx))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PolicyDocument::new(name, statements))
    }
}

impl WireStatement {
    fn into_statement(self, idx: usize) -> Result<Statement, PolicyError> {
        let effect = match self.effect.as_str() {
            "Allow" => Effect::Allow,
            "Deny" => Effect::Deny,
            _ => {
                return Err(PolicyError::InvalidEffect {
                    statement: idx,
                    value: self.effect,
                })
            }
        };
        let actions = self
            .action
            .into_vec()
            .iter()
            .map(|a| a.parse::<ActionPattern>())
            .collect::<Result<Vec<_>, _>>()?;
        if actions.is_empty() {
            return Err(PolicyError::EmptyActions { statement: idx });
        }
        let resources = self
            .resource
            .into_vec()
            .iter()
            .map(|r| r.parse::<ResourcePattern>())
            .collect::<Result<Vec<_>, _>>()?;
        if resources.is_empty() {
            return Err(PolicyError::EmptyResources { statement: idx });
        }
        let principals = match self.principal {
            None => None,
            Some(p) => {
                let list = p.into_vec();
                if list.is_empty() || list.iter().any(|p| p.is_empty()) {
                    return Err(PolicyError::EmptyPrincipals { statement: idx });
                }
                Some(list)
            }
        };
        let condition = match self.condition {
            None => ConditionBlock::new(),
            Some(raw) => ConditionBlock::from_raw(raw)?,
        };
        Ok(Statement {
            effect,
            principals,
            actions,
            resources,
            condition,
        })
    }
}

struct OneOrManyOut<'a, T>(&'a [T]);

impl<T: Serialize> Serialize for OneOrManyOut<'_, T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            [one] => one.serialize(serializer),
            many => many.serialize(serializer),
        }
    }
}

#[derive(Serialize)]
struct WireDocumentOut<'a> {
    #[serde(rename = "Version")]
    version: &'static str,
    #[serde(rename = "Statement")]
    statement: Vec<WireStatementOut<'a>>,
}

#[derive(Serialize)]
struct WireStatementOut<'a> {
    #[serde(rename = "Effect")]
    effect: Effect,
    #[serde(rename = "Principal", skip_serializing_if = "Option::is_none")]
    principal: Option<OneOrManyOut<'a, String>>,
    #[serde(rename = "Action")]
    action: OneOrManyOut<'a, ActionPattern>,
    #[serde(rename = "Resource")]
    resource: OneOrManyOut<'a, ResourcePattern>,
    #[serde(rename = "Condition", skip_serializing_if = "Option::is_none")]
    condition: Option<&'a ConditionBlock>,
}

impl<'a> From<&'a PolicyDocument> for WireDocumentOut<'a> {
    fn from(doc: &'a PolicyDocument) -> Self {
        WireDocumentOut {
            version: POLICY_VERSION,
            statement: doc
                .statements
                .iter()
                .map(|s| WireStatementOut {
                    effect: s.effect,
                    principal: s.principals.as_deref().map(OneOrManyOut),
                    action: OneOrManyOut(&s.actions),
                    resource: OneOrManyOut(&s.resources),
                    condition: (!s.condition.is_empty()).then_some(&s.condition),
                })
                .collect(),
        }
    }
}

impl Serialize for PolicyDocument {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        WireDocumentOut::from(self).serialize(serializer)
    }
}
