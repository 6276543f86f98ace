use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::action::{Action, ActionLevel, ActionPattern};
use super::PolicyError;

const DEFAULT_TABLE: &str = include_str!("verbs.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AccessClass {
    Read,
    Write,
}

impl fmt::Display for AccessClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AccessClass::Read => "read",
            AccessClass::Write => "write",
        })
    }
}

/// Operation verbs used to build level-3 (`service:Verb*`) patterns.
///
/// Text form: one `Verb<TAB>read|write` per line. Blank lines and lines
/// starting with `#` are ignored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerbTable {
    verbs: BTreeMap<String, AccessClass>,
}

impl Default for VerbTable {
    fn default() -> Self {
        DEFAULT_TABLE.parse().expect("bundled verb table is valid")
    }
}

impl FromStr for VerbTable {
    type Err = PolicyError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut verbs = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: &str| PolicyError::VerbTable {
                line: line_no,
                reason: reason.to_owned(),
            };
            let (verb, class) = line.split_once('\t').ok_or_else(|| err("expected `Verb<TAB>read|write`"))?;
            let class = match class.trim_end_matches('\r') {
                "read" => AccessClass::Read,
                "write" => AccessClass::Write,
                other => return Err(err(&format!("unknown access class `{other}`"))),
            };
            let valid = verb.starts_with(|c: char| c.is_ascii_uppercase())
                && verb.bytes().all(|b| b.is_ascii_alphanumeric());
            if !valid {
                return Err(err(&format!("`{verb}` is not a capitalized verb")));
            }
            if verbs.insert(verb.to_owned(), class).is_some() {
                return Err(err(&format!("duplicate verb `{verb}`")));
            }
        }
        Ok(Self { verbs })
    }
}

impl VerbTable {
    pub fn class_of(&self, verb: &str) -> Option<AccessClass> {
        self.verbs.get(verb).copied()
    }

    pub fn verbs(&self) -> impl Iterator<Item = (&str, AccessClass)> {
        self.verbs.iter().map(|(v, c)| (v.as_str(), *c))
    }

    /// The longest table verb that starts `operation` at a word boundary,
    /// so `ListBuckets` yields `List` but `Listen` yields nothing.
    pub fn verb_of<'a>(&'a self, operation: &str) -> Option<&'a str> {
        self.verbs
            .keys()
            .filter(|verb| {
                operation.starts_with(verb.as_str())
                    && !operation[verb.len()..].starts_with(|c: char| c.is_ascii_lowercase())
            })
            .max_by_key(|verb| verb.len())
            .map(String::as_str)
    }
}

/// Result of widening a concrete action to a requested level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generalized {
    pub pattern: ActionPattern,
    /// Set when level 3 was requested but the operation's verb is not in the
    /// table; `pattern` is then the level-4 action itself.
    pub fallback: bool,
}

pub fn generalize_action(
    action: &Action,
    target: ActionLevel,
    verbs: &VerbTable,
) -> Result<Generalized, PolicyError> {
    let exact = || Generalized {
        pattern: ActionPattern::Exact(action.clone()),
        fallback: false,
    };
    match target {
        ActionLevel::All => Err(PolicyError::LevelOneNotPerAction),
        ActionLevel::Service => Ok(Generalized {
            pattern: ActionPattern::Service(action.service().to_owned()),
            fallback: false,
        }),
        ActionLevel::Verb => match verbs.verb_of(action.operation()) {
            Some(verb) => Ok(Generalized {
                pattern: ActionPattern::Prefix {
                    service: action.service().to_owned(),
                    prefix: verb.to_owned(),
                },
                fallback: false,
            }),
            None => Ok(Generalized {
                fallback: true,
                ..exact()
            }),
        },
        ActionLevel::Exact => Ok(exact()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gen(action: &str, level: ActionLevel) -> Generalized {
        generalize_action(&action.parse().unwrap(), level, &VerbTable::default()).unwrap()
    }

    #[test]
    fn bundled_table() {
        let t = VerbTable::default();
        assert_eq!(t.verbs().count(), 11);
        assert_eq!(t.class_of("Get"), Some(AccessClass::Read));
        assert_eq!(t.class_of("Head"), Some(AccessClass::Read));
        assert_eq!(t.class_of("Detach"), Some(AccessClass::Write));
        assert_eq!(t.class_of("Run"), None);
    }

    #[test]
    fn generalizes_to_each_level() {
        assert_eq!(gen("s3:PutObject", ActionLevel::Verb).pattern.to_string(), "s3:Put*");
        assert_eq!(gen("s3:PutObject", ActionLevel::Exact).pattern.to_string(), "s3:PutObject");
        assert_eq!(gen("s3:PutObject", ActionLevel::Service).pattern.to_string(), "s3:*");
        let d = gen("ec2:DescribeInstances", ActionLevel::Verb);
        assert_eq!(d.pattern.to_string(), "ec2:Describe*");
        assert!(!d.fallback);
        assert!(d.pattern.matches(&"ec2:DescribeInstances".parse().unwrap()));
    }

    #[test]
    fn unknown_verb_falls_back_to_exact() {
        let g = gen("ec2:RunInstances", ActionLevel::Verb);
        assert!(g.fallback);
        assert_eq!(g.pattern.to_string(), "ec2:RunInstances");
        assert_eq!(g.pattern.level(), ActionLevel::Exact);
    }

    #[test]
    fn verb_needs_word_boundary() {
        let t = VerbTable::default();
        assert_eq!(t.verb_of("ListBuckets"), Some("List"));
        assert_eq!(t.verb_of("Listen"), None);
        assert_eq!(t.verb_of("Get"), Some("Get"));
        assert_eq!(t.verb_of("Get2"), Some("Get"));
    }

    #[test]
    fn longest_verb_wins() {
        let t: VerbTable = "Get\tread\nGetBucket\tread\n".parse().unwrap();
        assert_eq!(t.verb_of("GetBucketPolicy"), Some("GetBucket"));
        assert_eq!(t.verb_of("GetObject"), Some("Get"));
    }

    #[test]
    fn level_one_is_rejected() {
        let err = generalize_action(
            &"s3:GetObject".parse().unwrap(),
            ActionLevel::All,
            &VerbTable::default(),
        );
        assert!(matches!(err, Err(PolicyError::LevelOneNotPerAction)));
    }

    #[test]
    fn table_parse_errors_carry_line() {
        let err = "Get\tread\nPut write\n".parse::<VerbTable>().unwrap_err();
        assert!(matches!(err, PolicyError::VerbTable { line: 2, .. }));
        assert!("Get\tsometimes\n".parse::<VerbTable>().is_err());
        assert!("get\tread\n".parse::<VerbTable>().is_err());
        assert!("Get\tread\nGet\twrite\n".parse::<VerbTable>().is_err());
        let t: VerbTable = "# comment\n\nRun\twrite\n".parse().unwrap();
        assert_eq!(t.class_of("Run"), Some(AccessClass::Write));
    }
}
