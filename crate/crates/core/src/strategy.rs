//! Exhaustive misreport testing: does any agent gain, in the stochastic
//! dominance sense, by reporting a ranking other than her true one?
//!
//! Comparisons always use exact expectations of the mechanism under the
//! true and the misreported profile, never samples.

use itertools::Itertools;
use rayon::prelude::*;

use crate::mechanisms::{eating, lottery};
use crate::model::{Agent, Budget, Item, Profile, RandomAssignment};
use crate::rational::Rat;
use crate::Result;

/// A mechanism as an expectation-producing function of the profile.
#[derive(Clone, Debug)]
pub enum Mechanism {
    Ebm,
    AbmUniform,
    BmUniform,
    Rp,
    Ps,
    Upre,
    Pre(eating::EatingSpeeds),
}

impl Mechanism {
    pub fn name(&self) -> &'static str {
        match self {
            Mechanism::Ebm => "ebm",
            Mechanism::AbmUniform => "abm-uniform",
            Mechanism::BmUniform => "bm-uniform",
            Mechanism::Rp => "rp",
            Mechanism::Ps => "ps",
            Mechanism::Upre => "upre",
            Mechanism::Pre(_) => "pre",
        }
    }

    /// The exact expected assignment under `profile`.
    pub fn expectation(&self, profile: &Profile, budget: &Budget) -> Result<RandomAssignment> {
        Ok(match self {
            Mechanism::Ebm => lottery::ebm_expectation(profile, budget)?.matrix,
            Mechanism::AbmUniform => lottery::abm_uniform_expectation(profile, budget)?,
            Mechanism::BmUniform => lottery::bm_uniform_expectation(profile, budget)?,
            Mechanism::Rp => lottery::rp_expectation(profile, budget)?,
            Mechanism::Ps => eating::ps_run(profile),
            Mechanism::Upre => eating::upre_run(profile),
            Mechanism::Pre(speeds) => eating::pre_run(profile, speeds)?.0,
        })
    }
}

/// A successful manipulation: the agent, the two rankings, and her
/// allocation rows under the true and the misreported profile.
#[derive(Clone, Debug)]
pub struct Deviation {
    pub agent: Agent,
    pub truthful_ranking: Vec<Item>,
    pub misreport: Vec<Item>,
    pub truthful_row: Vec<Rat>,
    pub deviating_row: Vec<Rat>,
}

/// All `n! - 1` alternative strict rankings, in lexicographic order of item
/// indices.
pub fn enumerate_misreports(ranking: &[Item]) -> impl Iterator<Item = Vec<Item>> + '_ {
    let n = ranking.len();
    (0..n)
        .permutations(n)
        .map(|perm| perm.into_iter().map(Item).collect::<Vec<Item>>())
        .filter(move |candidate| candidate != ranking)
}

enum Flavor {
    /// Misreport that strictly gains: the deviating row dominates the
    /// truthful row and differs from it.
    Weak,
    /// Truthful report fails to weakly dominate the deviating row.
    Strict,
}

fn search(
    mechanism: &Mechanism,
    profile: &Profile,
    budget: &Budget,
    flavor: Flavor,
) -> Result<Option<Deviation>> {
    let truthful = mechanism.expectation(profile, budget)?;
    for agent in profile.agents() {
        let ranking = profile.preference(agent);
        let misreports: Vec<Vec<Item>> = enumerate_misreports(ranking).collect();

        // Misreports are independent; evaluate in parallel but keep the
        // lexicographically first hit.
        let hit = misreports
            .par_iter()
            .map(|misreport| -> Result<Option<Deviation>> {
                let deviated_profile = profile.with_ranking(agent, misreport.clone())?;
                let deviated = mechanism.expectation(&deviated_profile, budget)?;
                let truthful_row = truthful.row(agent);
                let deviating_row = deviated.row(agent);
                let violated = match flavor {
                    Flavor::Weak => {
                        crate::dominance::sd_dominates(ranking, deviating_row, truthful_row)
                            && deviating_row != truthful_row
                    }
                    Flavor::Strict => {
                        !crate::dominance::sd_dominates(ranking, truthful_row, deviating_row)
                    }
                };
                Ok(violated.then(|| Deviation {
                    agent,
                    truthful_ranking: ranking.to_vec(),
                    misreport: misreport.clone(),
                    truthful_row: truthful_row.to_vec(),
                    deviating_row: deviating_row.to_vec(),
                }))
            })
            .find_first(|r| !matches!(r, Ok(None)));
        match hit {
            Some(Err(e)) => return Err(e),
            Some(Ok(found)) => return Ok(found),
            None => {}
        }
    }
    Ok(None)
}

/// First weak-strategyproofness violation: an agent whose misreport earns
/// an allocation that strictly sd-dominates her truthful one. Agents are
/// scanned in ascending order, misreports lexicographically.
pub fn find_sd_wsp_violation(
    mechanism: &Mechanism,
    profile: &Profile,
    budget: &Budget,
) -> Result<Option<Deviation>> {
    search(mechanism, profile, budget, Flavor::Weak)
}

/// First strategyproofness violation: an agent whose truthful allocation
/// fails to weakly sd-dominate some misreport's allocation.
pub fn find_sd_sp_violation(
    mechanism: &Mechanism,
    profile: &Profile,
    budget: &Budget,
) -> Result<Option<Deviation>> {
    search(mechanism, profile, budget, Flavor::Strict)
}
