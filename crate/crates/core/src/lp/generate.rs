use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use super::{LpError, Principal, UsageIndex, Window};
use crate::eval::{authorize, AccessRequest, EvalError, Verdict};
use crate::org::{Organization, PermissionSet};
use crate::policy::{
    generalize_action, Action, ActionLevel, ActionPattern, Effect, PolicyDocument,
    ResourcePattern, Statement, VerbTable,
};

/// Upper bound on the number of unobserved pairs checked for excess.
pub const EXCESS_SAMPLE_CAP: usize = 10_000;

fn level_number<S: Serializer>(level: &ActionLevel, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u8(level.as_u8())
}

/// Outcome of replaying observed activity against a what-if organization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    pub observed: usize,
    pub covered: usize,
    /// `covered / observed`; 1.0 when nothing was observed.
    pub coverage: f64,
    /// Size of the unobserved (action, resource) universe.
    pub universe: usize,
    pub sampled: usize,
    /// Sampled pairs the generated policy grants beyond the principal's
    /// other (resource-side) access.
    pub excess_count: usize,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratedPolicy {
    pub document: PolicyDocument,
    #[serde(serialize_with = "level_number")]
    pub level: ActionLevel,
    pub principal: Principal,
    pub window: Window,
    /// Actions kept exact because their verb is not in the verb table.
    pub fallbacks: usize,
    pub verified: bool,
    pub verification: Verification,
}

impl GeneratedPolicy {
    /// Name of the permission set holding the generated policy in what-if
    /// organizations.
    pub fn permission_set_id(principal: &Principal, level: ActionLevel) -> String {
        format!("least-privilege-{}-{}-level{}", principal.user, principal.account, level.as_u8())
    }

    pub fn summary(&self) -> String {
        let v = &self.verification;
        format!(
            "principal: {}\nlevel: {}\nwindow: {}\nstatements: {}\nfallbacks: {}\ncoverage: {:.4} ({}/{})\nexcess: {:.4} ({}/{} sampled of {})\nverified: {}\n",
            self.principal,
            self.level.as_u8(),
            self.window,
            self.document.statements().len(),
            self.fallbacks,
            v.coverage,
            v.covered,
            v.observed,
            v.excess,
            v.excess_count,
            v.sampled,
            v.universe,
            self.verified,
        )
    }
}

/// Unobserved (action, resource) pairs to probe for excess: actions seen
/// anywhere in the log crossed with registered resources, minus `observed`.
/// Universes above [`EXCESS_SAMPLE_CAP`] are sampled without replacement
/// using `seed`.
pub fn complement_sample(
    org: &Organization,
    actions: &BTreeSet<Action>,
    observed: &BTreeSet<(Action, String)>,
    seed: u64,
) -> (usize, Vec<(Action, String)>) {
    let resources: Vec<&str> = org.resources().map(|r| r.arn.as_str()).collect();
    let universe: Vec<(Action, String)> = actions
        .iter()
        .flat_map(|a| resources.iter().map(move |r| (a.clone(), (*r).to_owned())))
        .filter(|pair| !observed.contains(pair))
        .collect();
    let size = universe.len();
    if size <= EXCESS_SAMPLE_CAP {
        return (size, universe);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, size, EXCESS_SAMPLE_CAP).into_vec();
    picked.sort_unstable();
    let sample = picked.into_iter().map(|i| universe[i].clone()).collect();
    (size, sample)
}

fn allowed(org: &Organization, principal: &Principal, action: &Action, resource: &str) -> Result<bool, EvalError> {
    let request = AccessRequest::new(&principal.user, &principal.account, action.clone(), resource);
    Ok(authorize(org, &request)?.verdict == Verdict::Allow)
}

/// Replays `observed` against `whatif` (where the generated policy is the
/// principal's sole permission set) and counts sampled pairs that `whatif`
/// allows but the same organization without that permission set denies.
pub fn replay_verify(
    whatif: &Organization,
    principal: &Principal,
    observed: &[(Action, String)],
    universe: usize,
    sample: &[(Action, String)],
) -> Result<Verification, LpError> {
    let baseline = whatif.with_sole_permission_set(&principal.user, &principal.account, None)?;
    let mut covered = 0;
    for (action, resource) in observed {
        if allowed(whatif, principal, action, resource)? {
            covered += 1;
        }
    }
    let mut excess_count = 0;
    for (action, resource) in sample {
        if allowed(whatif, principal, action, resource)?
            && !allowed(&baseline, principal, action, resource)?
        {
            excess_count += 1;
        }
    }
    let ratio = |n: usize, d: usize, empty: f64| if d == 0 { empty } else { n as f64 / d as f64 };
    Ok(Verification {
        observed: observed.len(),
        covered,
        coverage: ratio(covered, observed.len(), 1.0),
        universe,
        sampled: sample.len(),
        excess_count,
        excess: ratio(excess_count, sample.len(), 0.0),
    })
}

/// Builds a policy granting what `principal` was observed doing within
/// `window`, widened to `level`, and verifies it by replay.
///
/// Level 4 keeps the exact observed resources; levels 2 and 3 grant on `*`.
pub fn generate_least_privilege(
    org: &Organization,
    index: &UsageIndex,
    verbs: &VerbTable,
    principal: &Principal,
    level: ActionLevel,
    window: Window,
    seed: u64,
) -> Result<GeneratedPolicy, LpError> {
    if level == ActionLevel::All {
        return Err(LpError::Level(level.as_u8()));
    }
    let pairs: BTreeSet<(Action, String)> = index
        .observations_in(principal, &window)
        .map(|o| (o.action.clone(), o.resource.clone()))
        .collect();
    if pairs.is_empty() {
        return Err(LpError::NoObservations {
            principal: principal.clone(),
            window,
        });
    }

    let mut groups: BTreeMap<String, (ActionPattern, BTreeSet<&str>)> = BTreeMap::new();
    let mut fallback_actions = BTreeSet::new();
    for (action, resource) in &pairs {
        let g = generalize_action(action, level, verbs)?;
        if g.fallback {
            fallback_actions.insert(action);
        }
        groups
            .entry(g.pattern.to_string())
            .or_insert_with(|| (g.pattern, BTreeSet::new()))
            .1
            .insert(resource);
    }
    let fallbacks = fallback_actions.len();
    let statements = groups
        .into_values()
        .map(|(pattern, resources)| {
            let resources = if level == ActionLevel::Exact {
                resources
                    .into_iter()
                    .map(|r| r.parse::<ResourcePattern>())
                    .collect::<Result<Vec<_>, _>>()?
            } else {
                vec![ResourcePattern::any()]
            };
            Statement::new(Effect::Allow, vec![pattern], resources)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let set_id = GeneratedPolicy::permission_set_id(principal, level);
    let document = PolicyDocument::new(set_id.clone(), statements);
    let whatif = org.with_sole_permission_set(
        &principal.user,
        &principal.account,
        Some(PermissionSet {
            id: set_id,
            policies: vec![document.clone()],
        }),
    )?;
    let (universe, sample) = complement_sample(org, index.actions_seen(), &pairs, seed);
    let observed: Vec<_> = pairs.into_iter().collect();
    let verification = replay_verify(&whatif, principal, &observed, universe, &sample)?;
    let verified = verification.coverage == 1.0
        && (level != ActionLevel::Exact || verification.excess == 0.0);
    Ok(GeneratedPolicy {
        document,
        level,
        principal: principal.clone(),
        window,
        fallbacks,
        verified,
        verification,
    })
}
