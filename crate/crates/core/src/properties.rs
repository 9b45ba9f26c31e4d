//! Checkers for the efficiency, fairness, and strategyproofness axioms.
//!
//! Every checker returns a [`Verdict`]: a boolean plus, on failure, a
//! concrete [`Witness`] that independently demonstrates the violation.
//! Scanning orders are fixed (ascending agent/item indices, tiers in order),
//! so witnesses are reproducible.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::dominance::{sd_dominates, upper_sum};
use crate::mechanisms::eating;
use crate::model::{
    Agent, Budget, ConvexDecomposition, DeterministicAssignment, Item, ItemSet, Profile,
    RandomAssignment,
};
use crate::rational::Rat;
use crate::{oracles, Result};

/// Outcome of a property check.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub holds: bool,
    pub witness: Option<Witness>,
}

impl Verdict {
    fn ok() -> Self {
        Verdict {
            holds: true,
            witness: None,
        }
    }

    fn violated(witness: Witness) -> Self {
        Verdict {
            holds: false,
            witness: Some(witness),
        }
    }
}

/// Structured counterexamples. Indices are dense agent/item indices; the
/// document layer maps them back to ids for display.
#[derive(Clone, Debug, Serialize)]
pub enum Witness {
    /// Agents that can trade along a cycle so that each gets a better item.
    ImprovingCycle { agents: Vec<usize> },
    /// An assignment serving strictly more agents their first choice.
    MoreFirstChoices {
        achieved: usize,
        maximum: usize,
        better: Vec<usize>,
    },
    /// `other` ranks `item` strictly higher than its `holder`, yet holds
    /// something she ranks below it.
    RankViolation {
        holder: usize,
        other: usize,
        item: usize,
    },
    /// `item` sits in tier `tier` (1-based) but its holder's top remaining
    /// item is `holder_top`.
    TierViolation {
        item: usize,
        tier: usize,
        holder: usize,
        holder_top: usize,
    },
    /// A rank signature lexicographically above the assignment's.
    SignatureDominated {
        signature: Vec<usize>,
        dominating: Vec<usize>,
        better: Vec<usize>,
    },
    /// An assignment preferred by strictly more agents.
    MorePopular {
        better: Vec<usize>,
        in_favor: usize,
        against: usize,
    },
    /// A cycle in the trading relation over items.
    ItemCycle { items: Vec<usize> },
    /// `agent` was eager for `item` in an earlier residual round, the item
    /// survived, and her upper-contour share is `satisfied` instead of 1.
    EagerShortfall {
        agent: usize,
        item: usize,
        satisfied: String,
    },
    /// `holder` owns shares of `item` although `other` ranks it strictly
    /// higher and is not fully satisfied above it.
    RankShortfall {
        holder: usize,
        other: usize,
        item: usize,
        satisfied: String,
    },
    /// Two agents with `item` in their common preference prefix hold
    /// different shares of it.
    UnequalPrefixShares {
        j: usize,
        k: usize,
        item: usize,
        share_j: String,
        share_k: String,
    },
    /// Agent `envious`'s allocation fails to dominate `envied`'s; the
    /// cumulative shortfall first appears at `item`.
    Envy {
        envious: usize,
        envied: usize,
        item: usize,
    },
    /// Agent `dominated`'s allocation is strictly dominated by `by`'s.
    Dominated { dominated: usize, by: usize },
    /// The matrix lies outside the convex hull of the enumerated
    /// assignments.
    NotInHull { generators: usize },
}

/// The tier structure of eagerness for remaining items: tier `r` holds the
/// items that are some active agent's top remaining item after the earlier
/// tiers are removed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeriTiers {
    pub tiers: Vec<ItemSet>,
}

impl FeriTiers {
    /// 0-based tier index of `item`; tiers cover every item.
    pub fn tier_of(&self, item: Item) -> Option<usize> {
        self.tiers.iter().position(|t| t.contains(item))
    }
}

/// Number of agents receiving their `r`-th choice, for each rank `r`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct RankSignature {
    pub counts: Vec<usize>,
}

impl RankSignature {
    pub fn of(profile: &Profile, a: &DeterministicAssignment) -> Self {
        let mut counts = vec![0usize; profile.n()];
        for (agent, item) in a.iter() {
            counts[profile.rank_of(agent, item) - 1] += 1;
        }
        RankSignature { counts }
    }

    /// Signature dominance: strictly better at some rank, no worse earlier —
    /// which is exactly lexicographic "greater than".
    pub fn dominates(&self, other: &RankSignature) -> bool {
        self.counts > other.counts
    }
}

/// Pareto efficiency, decided by searching for an improving trading cycle
/// in the digraph `j -> k` iff `j` prefers `k`'s item to her own.
pub fn is_pe(profile: &Profile, a: &DeterministicAssignment) -> Verdict {
    let n = profile.n();
    let own_rank: Vec<usize> = profile
        .agents()
        .map(|j| profile.rank_of(j, a.item_of(j)))
        .collect();
    let adjacency: Vec<Vec<usize>> = (0..n)
        .map(|j| {
            (0..n)
                .filter(|&k| k != j && profile.rank_of(Agent(j), a.item_of(Agent(k))) < own_rank[j])
                .collect()
        })
        .collect();
    match first_cycle(&adjacency) {
        Some(agents) => Verdict::violated(Witness::ImprovingCycle { agents }),
        None => Verdict::ok(),
    }
}

/// First directed cycle found by DFS from the lowest node, neighbors in
/// ascending order. `None` when the graph is acyclic.
fn first_cycle(adjacency: &[Vec<usize>]) -> Option<Vec<usize>> {
    fn visit(
        v: usize,
        adjacency: &[Vec<usize>],
        color: &mut [u8],
        path: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        color[v] = 1;
        path.push(v);
        for &w in &adjacency[v] {
            if color[w] == 1 {
                let pos = path.iter().position(|&x| x == w).expect("on path");
                return Some(path[pos..].to_vec());
            }
            if color[w] == 0 {
                if let Some(cycle) = visit(w, adjacency, color, path) {
                    return Some(cycle);
                }
            }
        }
        color[v] = 2;
        path.pop();
        None
    }

    let mut color = vec![0u8; adjacency.len()];
    let mut path = Vec::new();
    for v in 0..adjacency.len() {
        if color[v] == 0 {
            if let Some(cycle) = visit(v, adjacency, &mut color, &mut path) {
                return Some(cycle);
            }
        }
    }
    None
}

/// First-choice maximality: the number of agents at their top item equals
/// the number of distinct top items (each distinct top can serve exactly
/// one of its fans).
pub fn is_fcm(profile: &Profile, a: &DeterministicAssignment) -> Verdict {
    let achieved = profile
        .agents()
        .filter(|&j| profile.rank_of(j, a.item_of(j)) == 1)
        .count();
    let tops: ItemSet = profile.agents().map(|j| profile.top(j)).collect();
    let maximum = tops.len();
    if achieved == maximum {
        return Verdict::ok();
    }

    // Build a witness greedily: hand every distinct top item to one of its
    // fans, then complete arbitrarily.
    let mut item_of: Vec<Option<Item>> = vec![None; profile.n()];
    let mut taken = ItemSet::empty();
    for j in profile.agents() {
        let t = profile.top(j);
        if !taken.contains(t) {
            item_of[j.0] = Some(t);
            taken.insert(t);
        }
    }
    let mut free: Vec<Item> = profile.items().filter(|&o| !taken.contains(o)).collect();
    for slot in item_of.iter_mut() {
        if slot.is_none() {
            *slot = Some(free.pop().expect("counts match"));
        }
    }
    let better = item_of.into_iter().map(|o| o.unwrap().0).collect();
    Verdict::violated(Witness::MoreFirstChoices {
        achieved,
        maximum,
        better,
    })
}

/// Favoring higher ranks: for all agents `j, k`, either `j` ranks her own
/// item at least as high as `k` ranks it, or `k` holds something she ranks
/// strictly above `j`'s item.
pub fn is_fhr(profile: &Profile, a: &DeterministicAssignment) -> Verdict {
    for j in profile.agents() {
        let item = a.item_of(j);
        let rj = profile.rank_of(j, item);
        for k in profile.agents() {
            if k == j {
                continue;
            }
            let rk = profile.rank_of(k, item);
            if rj <= rk || profile.rank_of(k, a.item_of(k)) < rk {
                continue;
            }
            return Verdict::violated(Witness::RankViolation {
                holder: j.0,
                other: k.0,
                item: item.0,
            });
        }
    }
    Verdict::ok()
}

/// Compute the eagerness tiers of an assignment: tier `r` collects the top
/// remaining items of agents whose own item is not in an earlier tier.
pub fn feri_tiers(profile: &Profile, a: &DeterministicAssignment) -> FeriTiers {
    let mut tiers = Vec::new();
    let mut used = ItemSet::empty();
    while used.len() < profile.n() {
        let remaining = profile.all_items().difference(used);
        let mut tier = ItemSet::empty();
        for j in profile.agents() {
            if !used.contains(a.item_of(j)) {
                let top = profile.top_among(j, remaining).expect("remaining nonempty");
                tier.insert(top);
            }
        }
        debug_assert!(!tier.is_empty(), "unassigned agents always have a top");
        tiers.push(tier);
        used = used.union(tier);
    }
    FeriTiers { tiers }
}

/// Favoring eagerness for remaining items: every tier item must be held by
/// an agent whose top remaining item it is.
pub fn is_feri(profile: &Profile, a: &DeterministicAssignment) -> (Verdict, FeriTiers) {
    let tiers = feri_tiers(profile, a);
    let mut used = ItemSet::empty();
    let mut verdict = Verdict::ok();
    'tiers: for r in 0..tiers.tiers.len() {
        let tier = tiers.tiers[r];
        let remaining = profile.all_items().difference(used);
        for item in tier.iter() {
            let holder = a.agent_of(item);
            let holder_top = profile
                .top_among(holder, remaining)
                .expect("remaining nonempty");
            if holder_top != item {
                verdict = Verdict::violated(Witness::TierViolation {
                    item: item.0,
                    tier: r + 1,
                    holder: holder.0,
                    holder_top: holder_top.0,
                });
                break 'tiers;
            }
        }
        used = used.union(tier);
    }
    (verdict, tiers)
}

/// Rank maximality: the signature is lexicographically maximal over all
/// bijections. Brute force; guarded by the enumeration budget.
pub fn is_rm(profile: &Profile, a: &DeterministicAssignment, budget: &Budget) -> Result<Verdict> {
    budget.check_enum(profile.n(), "rank-maximality enumeration")?;
    let mine = RankSignature::of(profile, a);
    let mut best: Option<(RankSignature, DeterministicAssignment)> = None;
    let all = oracles::enumerate_assignments(profile, budget)?;
    for other in all.iter() {
        let sig = RankSignature::of(profile, other);
        if best.as_ref().map_or(true, |(b, _)| sig > *b) {
            best = Some((sig, other.clone()));
        }
    }
    let (best_sig, best_assignment) = best.expect("at least one bijection");
    if best_sig.dominates(&mine) {
        Ok(Verdict::violated(Witness::SignatureDominated {
            signature: mine.counts,
            dominating: best_sig.counts,
            better: best_assignment.iter().map(|(_, o)| o.0).collect(),
        }))
    } else {
        Ok(Verdict::ok())
    }
}

/// Popularity, via its characterization: every agent holds her top item or
/// her best item among those that are nobody's first choice. On failure the
/// witness is a strictly more popular assignment found by brute force.
pub fn is_pop(profile: &Profile, a: &DeterministicAssignment, budget: &Budget) -> Result<Verdict> {
    let tops: ItemSet = profile.agents().map(|j| profile.top(j)).collect();
    let nobodys_first = profile.all_items().difference(tops);
    let characterization = profile.agents().all(|j| {
        let item = a.item_of(j);
        item == profile.top(j)
            || (!nobodys_first.is_empty()
                && profile.top_among(j, nobodys_first).expect("nonempty") == item)
    });
    if characterization {
        return Ok(Verdict::ok());
    }

    budget.check_enum(profile.n(), "popularity witness enumeration")?;
    let all = oracles::enumerate_assignments(profile, budget)?;
    for other in all.iter() {
        let (in_favor, against) = popularity_margin(profile, other, a);
        if in_favor > against {
            return Ok(Verdict::violated(Witness::MorePopular {
                better: other.iter().map(|(_, o)| o.0).collect(),
                in_favor,
                against,
            }));
        }
    }
    unreachable!("the characterization failing implies a more popular assignment exists");
}

/// Votes for `b` over `a` and for `a` over `b`.
pub fn popularity_margin(
    profile: &Profile,
    b: &DeterministicAssignment,
    a: &DeterministicAssignment,
) -> (usize, usize) {
    let mut in_favor = 0;
    let mut against = 0;
    for j in profile.agents() {
        let rb = profile.rank_of(j, b.item_of(j));
        let ra = profile.rank_of(j, a.item_of(j));
        if rb < ra {
            in_favor += 1;
        } else if ra < rb {
            against += 1;
        }
    }
    (in_favor, against)
}

/// Sd-Pareto-efficiency via acyclicity of the trading relation over items:
/// `x -> y` iff some agent prefers `x` to `y` while holding shares of `y`.
pub fn is_sd_pe(profile: &Profile, p: &RandomAssignment) -> Verdict {
    let n = profile.n();
    let mut edges = vec![ItemSet::empty(); n];
    for j in profile.agents() {
        let mut above = ItemSet::empty();
        for &o in profile.preference(j) {
            if !p.share(j, o).is_zero() {
                for x in above.iter() {
                    edges[x.0].insert(o);
                }
            }
            above.insert(o);
        }
    }
    let adjacency: Vec<Vec<usize>> = edges
        .iter()
        .map(|set| set.iter().map(|o| o.0).collect())
        .collect();
    match first_cycle(&adjacency) {
        Some(items) => Verdict::violated(Witness::ItemCycle { items }),
        None => Verdict::ok(),
    }
}

/// Ex-ante favoring eagerness for remaining items, decided on the
/// eager-residual trace of the matrix.
pub fn is_ea_feri(profile: &Profile, p: &RandomAssignment) -> Verdict {
    let trace = eating::ea_feri_trace(profile, p);
    match eating::ea_feri_violation(profile, p, &trace) {
        None => Verdict::ok(),
        Some(v) => Verdict::violated(Witness::EagerShortfall {
            agent: v.agent.0,
            item: v.item.0,
            satisfied: v.satisfied.to_string(),
        }),
    }
}

/// Ex-ante favoring higher ranks: whenever `j` holds shares of `o`, every
/// agent ranking `o` strictly higher than `j` does must be fully satisfied
/// by her weak upper contour at `o`.
pub fn is_ea_fhr(profile: &Profile, p: &RandomAssignment) -> Verdict {
    for j in profile.agents() {
        for o in profile.items() {
            if p.share(j, o).is_zero() {
                continue;
            }
            let rj = profile.rank_of(j, o);
            for k in profile.agents() {
                if profile.rank_of(k, o) >= rj {
                    continue;
                }
                let held = upper_sum(profile.preference(k), p.row(k), o);
                if !held.is_one() {
                    return Verdict::violated(Witness::RankShortfall {
                        holder: j.0,
                        other: k.0,
                        item: o.0,
                        satisfied: held.to_string(),
                    });
                }
            }
        }
    }
    Verdict::ok()
}

/// Strong equal treatment of equals: equal shares on every item in the
/// common preference prefix of every pair.
pub fn is_sete(profile: &Profile, p: &RandomAssignment) -> Verdict {
    for j in profile.agents() {
        for k in profile.agents() {
            if k.0 <= j.0 {
                continue;
            }
            for &o in profile.common_prefix(j, k) {
                if p.share(j, o) != p.share(k, o) {
                    return Verdict::violated(Witness::UnequalPrefixShares {
                        j: j.0,
                        k: k.0,
                        item: o.0,
                        share_j: p.share(j, o).to_string(),
                        share_k: p.share(k, o).to_string(),
                    });
                }
            }
        }
    }
    Verdict::ok()
}

/// Sd-envy-freeness: every agent's allocation weakly dominates every other
/// agent's under her own ranking.
pub fn is_sd_ef(profile: &Profile, p: &RandomAssignment) -> Verdict {
    for j in profile.agents() {
        for k in profile.agents() {
            if j == k {
                continue;
            }
            let pref = profile.preference(j);
            if sd_dominates(pref, p.row(j), p.row(k)) {
                continue;
            }
            // First prefix where the cumulative share falls short.
            let mut cj = Rat::zero();
            let mut ck = Rat::zero();
            for &o in pref {
                cj += p.share(j, o);
                ck += p.share(k, o);
                if cj < ck {
                    return Verdict::violated(Witness::Envy {
                        envious: j.0,
                        envied: k.0,
                        item: o.0,
                    });
                }
            }
            unreachable!("non-dominance implies a failing prefix");
        }
    }
    Verdict::ok()
}

/// Sd-weak-envy-freeness: no agent's allocation is strictly dominated by
/// another's under her own ranking.
pub fn is_sd_wef(profile: &Profile, p: &RandomAssignment) -> Verdict {
    for j in profile.agents() {
        for k in profile.agents() {
            if j == k {
                continue;
            }
            if sd_dominates(profile.preference(j), p.row(k), p.row(j)) && p.row(j) != p.row(k) {
                return Verdict::violated(Witness::Dominated {
                    dominated: j.0,
                    by: k.0,
                });
            }
        }
    }
    Verdict::ok()
}

/// Deterministic base properties for ex-post checks.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum BaseProperty {
    Pe,
    Fcm,
    Fhr,
    Feri,
    Rm,
    Pop,
}

impl BaseProperty {
    pub fn name(&self) -> &'static str {
        match self {
            BaseProperty::Pe => "pe",
            BaseProperty::Fcm => "fcm",
            BaseProperty::Fhr => "fhr",
            BaseProperty::Feri => "feri",
            BaseProperty::Rm => "rm",
            BaseProperty::Pop => "pop",
        }
    }

    /// Check the base property on a deterministic assignment.
    pub fn check(
        &self,
        profile: &Profile,
        a: &DeterministicAssignment,
        budget: &Budget,
    ) -> Result<bool> {
        Ok(match self {
            BaseProperty::Pe => is_pe(profile, a).holds,
            BaseProperty::Fcm => is_fcm(profile, a).holds,
            BaseProperty::Fhr => is_fhr(profile, a).holds,
            BaseProperty::Feri => is_feri(profile, a).0.holds,
            BaseProperty::Rm => is_rm(profile, a, budget)?.holds,
            BaseProperty::Pop => is_pop(profile, a, budget)?.holds,
        })
    }
}

/// Ex-post membership verdict: on success the certificate decomposition is
/// included; on failure the witness records definite infeasibility.
#[derive(Clone, Debug)]
pub struct EpVerdict {
    pub holds: bool,
    pub certificate: Option<ConvexDecomposition>,
    pub witness: Option<Witness>,
    pub generators: usize,
}

/// Ex-post `base`: is `p` an exact convex combination of deterministic
/// assignments satisfying `base`? Decided by exact rational feasibility
/// over the enumerated satisfying assignments.
pub fn is_ep(
    profile: &Profile,
    p: &RandomAssignment,
    base: BaseProperty,
    budget: &Budget,
) -> Result<EpVerdict> {
    let generators = oracles::enumerate_satisfying(profile, base, budget)?;
    let count = generators.len();
    match oracles::exact_feasibility(p, &generators) {
        Some(cert) => Ok(EpVerdict {
            holds: true,
            certificate: Some(cert),
            witness: None,
            generators: count,
        }),
        None => Ok(EpVerdict {
            holds: false,
            certificate: None,
            witness: Some(Witness::NotInHull { generators: count }),
            generators: count,
        }),
    }
}
