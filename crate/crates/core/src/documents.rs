//! On-disk document formats: JSON profiles, assignments, speed functions,
//! decompositions, and verdicts.
//!
//! Rationals are serialized as lowest-terms `"num/den"` strings; bare
//! integers are accepted on input and normalized on output, so parse after
//! serialize is the identity.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::mechanisms::eating::{EatingSpeeds, SpeedPiece};
use crate::model::{
    Agent, ConvexDecomposition, Item, Profile, RandomAssignment,
};
use crate::properties::Witness;
use crate::rational::{format_rat, parse_rat};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

fn parse_json<'a, T: Deserialize<'a>>(json: &'a str) -> Result<T> {
    serde_json::from_str(json).map_err(|e| Error::InvalidDocument(e.to_string()))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::InvalidDocument(e.to_string()))
}

fn check_version(version: u32) -> Result<()> {
    if version != SCHEMA_VERSION {
        return Err(Error::InvalidDocument(format!(
            "unsupported schema version {version}, expected {SCHEMA_VERSION}"
        )));
    }
    Ok(())
}

/// Profile file: agents, items, and one ranking per agent.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileDocument {
    pub version: u32,
    pub agents: Vec<String>,
    pub items: Vec<String>,
    pub preferences: BTreeMap<String, Vec<String>>,
}

impl ProfileDocument {
    pub fn from_profile(p: &Profile) -> Self {
        let preferences = p
            .agents()
            .map(|a| {
                (
                    p.agent_id(a).to_string(),
                    p.preference(a).iter().map(|&o| p.item_id(o).to_string()).collect(),
                )
            })
            .collect();
        ProfileDocument {
            version: SCHEMA_VERSION,
            agents: p.agents().map(|a| p.agent_id(a).to_string()).collect(),
            items: p.items().map(|o| p.item_id(o).to_string()).collect(),
            preferences,
        }
    }

    pub fn into_profile(self) -> Result<Profile> {
        check_version(self.version)?;
        let rankings = self
            .agents
            .iter()
            .map(|id| {
                self.preferences
                    .get(id)
                    .cloned()
                    .ok_or_else(|| Error::InvalidDocument(format!("no preferences for agent `{id}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if self.preferences.len() != self.agents.len() {
            return Err(Error::InvalidDocument(
                "preferences mention agents outside the agent list".into(),
            ));
        }
        Profile::new(self.agents, self.items, rankings)
    }
}

pub fn parse_profile(json: &str) -> Result<Profile> {
    parse_json::<ProfileDocument>(json)?.into_profile()
}

pub fn profile_to_json(p: &Profile) -> Result<String> {
    to_json(&ProfileDocument::from_profile(p))
}

/// Optional provenance recorded in assignment files.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mechanism: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
}

/// Assignment file: a row-major matrix of rational strings over the listed
/// agents and items.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssignmentDocument {
    pub version: u32,
    pub agents: Vec<String>,
    pub items: Vec<String>,
    pub matrix: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl AssignmentDocument {
    pub fn from_matrix(p: &Profile, m: &RandomAssignment, provenance: Option<Provenance>) -> Self {
        let mut matrix = Vec::with_capacity(p.n() * p.n());
        for a in p.agents() {
            for o in p.items() {
                matrix.push(format_rat(m.share(a, o)));
            }
        }
        AssignmentDocument {
            version: SCHEMA_VERSION,
            agents: p.agents().map(|a| p.agent_id(a).to_string()).collect(),
            items: p.items().map(|o| p.item_id(o).to_string()).collect(),
            matrix,
            provenance,
        }
    }

    /// Interpret against `profile`, mapping the document's own agent/item
    /// order onto the profile's. Ids must match exactly as sets.
    pub fn into_matrix(self, profile: &Profile) -> Result<RandomAssignment> {
        check_version(self.version)?;
        let n = profile.n();
        if self.agents.len() != n || self.items.len() != n {
            return Err(Error::InvalidDocument(format!(
                "assignment is {}x{}, profile has {} agents",
                self.agents.len(),
                self.items.len(),
                n
            )));
        }
        if self.matrix.len() != n * n {
            return Err(Error::InvalidDocument(format!(
                "matrix has {} entries, expected {}",
                self.matrix.len(),
                n * n
            )));
        }
        let agents = self
            .agents
            .iter()
            .map(|id| profile.agent_by_id(id))
            .collect::<Result<Vec<_>>>()?;
        let items = self
            .items
            .iter()
            .map(|id| profile.item_by_id(id))
            .collect::<Result<Vec<_>>>()?;

        let mut rows = vec![vec![crate::rational::zero(); n]; n];
        for (ri, &agent) in agents.iter().enumerate() {
            for (ci, &item) in items.iter().enumerate() {
                rows[agent.0][item.0] = parse_rat(&self.matrix[ri * n + ci])?;
            }
        }
        RandomAssignment::from_rows(rows)
    }
}

pub fn parse_assignment(json: &str, profile: &Profile) -> Result<RandomAssignment> {
    parse_json::<AssignmentDocument>(json)?.into_matrix(profile)
}

pub fn assignment_to_json(
    profile: &Profile,
    m: &RandomAssignment,
    fixture: Option<String>,
) -> Result<String> {
    let provenance = fixture.map(|f| Provenance {
        fixture: Some(f),
        ..Provenance::default()
    });
    to_json(&AssignmentDocument::from_matrix(profile, m, provenance))
}

/// Eating-speed file: per-agent piecewise-constant rates on `[0,1]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpeedsDocument {
    pub version: u32,
    pub speeds: BTreeMap<String, Vec<SpeedPieceDocument>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpeedPieceDocument {
    pub from: String,
    pub to: String,
    pub rate: String,
}

impl SpeedsDocument {
    pub fn from_speeds(profile: &Profile, speeds: &EatingSpeeds) -> Self {
        let map = profile
            .agents()
            .map(|a| {
                let pieces = speeds
                    .pieces(a)
                    .iter()
                    .map(|p| SpeedPieceDocument {
                        from: format_rat(&p.start),
                        to: format_rat(&p.end),
                        rate: format_rat(&p.rate),
                    })
                    .collect();
                (profile.agent_id(a).to_string(), pieces)
            })
            .collect();
        SpeedsDocument {
            version: SCHEMA_VERSION,
            speeds: map,
        }
    }

    pub fn into_speeds(self, profile: &Profile) -> Result<EatingSpeeds> {
        check_version(self.version)?;
        let mut pieces = vec![Vec::new(); profile.n()];
        for (id, docs) in &self.speeds {
            let agent = profile.agent_by_id(id)?;
            pieces[agent.0] = docs
                .iter()
                .map(|d| {
                    Ok(SpeedPiece {
                        start: parse_rat(&d.from)?,
                        end: parse_rat(&d.to)?,
                        rate: parse_rat(&d.rate)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
        }
        EatingSpeeds::new(pieces)
    }
}

pub fn parse_speeds(json: &str, profile: &Profile) -> Result<EatingSpeeds> {
    parse_json::<SpeedsDocument>(json)?.into_speeds(profile)
}

pub fn speeds_to_json(profile: &Profile, speeds: &EatingSpeeds) -> Result<String> {
    to_json(&SpeedsDocument::from_speeds(profile, speeds))
}

/// Decomposition file: positive coefficients and the assignments they
/// weight.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionDocument {
    pub version: u32,
    pub terms: Vec<DecompositionTermDocument>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionTermDocument {
    pub coefficient: String,
    pub assignment: BTreeMap<String, String>,
}

impl DecompositionDocument {
    pub fn from_decomposition(profile: &Profile, d: &ConvexDecomposition) -> Self {
        let terms = d
            .terms()
            .iter()
            .map(|(c, a)| DecompositionTermDocument {
                coefficient: format_rat(c),
                assignment: a
                    .iter()
                    .map(|(agent, item)| {
                        (
                            profile.agent_id(agent).to_string(),
                            profile.item_id(item).to_string(),
                        )
                    })
                    .collect(),
            })
            .collect();
        DecompositionDocument {
            version: SCHEMA_VERSION,
            terms,
        }
    }
}

pub fn decomposition_to_json(profile: &Profile, d: &ConvexDecomposition) -> Result<String> {
    to_json(&DecompositionDocument::from_decomposition(profile, d))
}

/// Map a witness's dense indices back to ids for machine-readable output.
pub fn witness_to_json(profile: &Profile, witness: &Witness) -> serde_json::Value {
    use serde_json::json;
    let agent = |i: &usize| profile.agent_id(Agent(*i)).to_string();
    let item = |i: &usize| profile.item_id(Item(*i)).to_string();
    match witness {
        Witness::ImprovingCycle { agents } => json!({
            "kind": "improving-cycle",
            "agents": agents.iter().map(agent).collect::<Vec<_>>(),
        }),
        Witness::MoreFirstChoices {
            achieved,
            maximum,
            better,
        } => json!({
            "kind": "more-first-choices",
            "achieved": achieved,
            "maximum": maximum,
            "better": better
                .iter()
                .enumerate()
                .map(|(a, o)| (agent(&a), item(o)))
                .collect::<BTreeMap<_, _>>(),
        }),
        Witness::RankViolation {
            holder,
            other,
            item: it,
        } => json!({
            "kind": "rank-violation",
            "holder": agent(holder),
            "other": agent(other),
            "item": item(it),
        }),
        Witness::TierViolation {
            item: it,
            tier,
            holder,
            holder_top,
        } => json!({
            "kind": "tier-violation",
            "item": item(it),
            "tier": tier,
            "holder": agent(holder),
            "holder_top": item(holder_top),
        }),
        Witness::SignatureDominated {
            signature,
            dominating,
            better,
        } => json!({
            "kind": "signature-dominated",
            "signature": signature,
            "dominating": dominating,
            "better": better
                .iter()
                .enumerate()
                .map(|(a, o)| (agent(&a), item(o)))
                .collect::<BTreeMap<_, _>>(),
        }),
        Witness::MorePopular {
            better,
            in_favor,
            against,
        } => json!({
            "kind": "more-popular",
            "in_favor": in_favor,
            "against": against,
            "better": better
                .iter()
                .enumerate()
                .map(|(a, o)| (agent(&a), item(o)))
                .collect::<BTreeMap<_, _>>(),
        }),
        Witness::ItemCycle { items } => json!({
            "kind": "item-cycle",
            "items": items.iter().map(item).collect::<Vec<_>>(),
        }),
        Witness::EagerShortfall {
            agent: a,
            item: it,
            satisfied,
        } => json!({
            "kind": "eager-shortfall",
            "agent": agent(a),
            "item": item(it),
            "satisfied": satisfied,
        }),
        Witness::RankShortfall {
            holder,
            other,
            item: it,
            satisfied,
        } => json!({
            "kind": "rank-shortfall",
            "holder": agent(holder),
            "other": agent(other),
            "item": item(it),
            "satisfied": satisfied,
        }),
        Witness::UnequalPrefixShares {
            j,
            k,
            item: it,
            share_j,
            share_k,
        } => json!({
            "kind": "unequal-prefix-shares",
            "pair": [agent(j), agent(k)],
            "item": item(it),
            "shares": [share_j, share_k],
        }),
        Witness::Envy {
            envious,
            envied,
            item: it,
        } => json!({
            "kind": "envy",
            "envious": agent(envious),
            "envied": agent(envied),
            "item": item(it),
        }),
        Witness::Dominated { dominated, by } => json!({
            "kind": "dominated",
            "pair": [agent(dominated), agent(by)],
        }),
        Witness::NotInHull { generators } => json!({
            "kind": "not-in-hull",
            "generators": generators,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn profile_round_trip_is_exact() {
        let p = fixtures::fig1_profile();
        let json = profile_to_json(&p).unwrap();
        let back = parse_profile(&json).unwrap();
        assert_eq!(p, back);
        // Byte-identical on a second pass.
        assert_eq!(json, profile_to_json(&back).unwrap());
    }

    #[test]
    fn assignment_round_trip_is_exact() {
        let p = fixtures::fig1_profile();
        let m = fixtures::fig1_upre_assignment();
        let json = assignment_to_json(&p, &m, Some("upre".into())).unwrap();
        let back = parse_assignment(&json, &p).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn integer_entries_are_normalized() {
        let p = fixtures::tiny1_profile();
        let doc = AssignmentDocument {
            version: SCHEMA_VERSION,
            agents: vec!["1".into(), "2".into(), "3".into()],
            items: vec!["a".into(), "b".into(), "c".into()],
            matrix: vec![
                "1".into(), "0".into(), "0".into(),
                "0/1".into(), "1/1".into(), "0/1".into(),
                "0".into(), "0".into(), "2/2".into(),
            ],
            provenance: None,
        };
        let m = doc.into_matrix(&p).unwrap();
        let json = assignment_to_json(&p, &m, None).unwrap();
        assert!(json.contains("\"1/1\""));
        assert!(!json.contains("\"2/2\""));
    }

    #[test]
    fn document_agent_order_need_not_match_profile_order() {
        let p = fixtures::tiny1_profile();
        let doc = AssignmentDocument {
            version: SCHEMA_VERSION,
            agents: vec!["3".into(), "1".into(), "2".into()],
            items: vec!["b".into(), "a".into(), "c".into()],
            matrix: vec![
                // agent 3 row over b, a, c
                "3/4".into(), "0".into(), "1/4".into(),
                // agent 1 row
                "1/4".into(), "1/2".into(), "1/4".into(),
                // agent 2 row
                "0".into(), "1/2".into(), "1/2".into(),
            ],
            provenance: None,
        };
        let m = doc.into_matrix(&p).unwrap();
        assert_eq!(m, fixtures::tiny1_ps_assignment());
    }

    #[test]
    fn malformed_documents_are_input_errors() {
        assert!(matches!(
            parse_profile("{ not json"),
            Err(Error::InvalidDocument(_))
        ));
        let p = fixtures::tiny1_profile();
        assert!(parse_assignment("{\"version\":1,\"agents\":[],\"items\":[],\"matrix\":[]}", &p).is_err());

        // Wrong version.
        let doc = r#"{"version":9,"agents":["1"],"items":["a"],"preferences":{"1":["a"]}}"#;
        assert!(matches!(
            parse_profile(doc),
            Err(Error::InvalidDocument(_))
        ));
    }

    #[test]
    fn speeds_round_trip() {
        let p = fixtures::fig1_profile();
        let q = fixtures::fig1_upre_assignment();
        let speeds = crate::mechanisms::eating::recover_speeds(&p, &q).unwrap();
        let json = speeds_to_json(&p, &speeds).unwrap();
        let back = parse_speeds(&json, &p).unwrap();
        assert_eq!(speeds, back);
    }
}
