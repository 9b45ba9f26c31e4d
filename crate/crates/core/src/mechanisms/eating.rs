//! Continuous-consumption mechanisms.
//!
//! [`pre_run`] implements the respecting-eagerness family: each round, every
//! unsatisfied agent targets her top remaining item, and each targeted item
//! is eaten by its eager set until the item runs out or all of its eaters
//! are satisfied — so distinct items may be consumed for different durations
//! within the same round. [`upre_run`] is the uniform-speed member.
//! [`ps_run`] is classic simultaneous eating with a single global clock.
//!
//! Speed functions are piecewise-constant rationals, which keeps every stop
//! time an exact root of a piecewise-linear equation.

use num_traits::{One, Signed, Zero};

use crate::model::{
    Agent, AgentSet, Item, ItemSet, Profile, RandomAssignment,
};
use crate::rational::{rat, Rat};
use crate::{Error, Result};

/// One constant-rate piece of an eating-speed function; half-open `[start, end)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpeedPiece {
    pub start: Rat,
    pub end: Rat,
    pub rate: Rat,
}

/// Per-agent eating-speed functions on `[0,1]`: nonnegative piecewise-constant
/// rates whose exact integral is one. Rates are zero past `t = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EatingSpeeds {
    pieces: Vec<Vec<SpeedPiece>>,
    /// All agents eat at constant rate one; integrals collapse to clamped
    /// differences, which the misreport sweeps lean on heavily.
    uniform: bool,
}

impl EatingSpeeds {
    pub fn new(pieces: Vec<Vec<SpeedPiece>>) -> Result<Self> {
        for (agent, pieces) in pieces.iter().enumerate() {
            let err = |msg: String| Error::InvalidSpeeds(format!("agent index {agent}: {msg}"));
            if pieces.is_empty() {
                return Err(err("no pieces".into()));
            }
            let mut cursor = Rat::zero();
            let mut integral = Rat::zero();
            for p in pieces {
                if p.start != cursor {
                    return Err(err(format!("piece starts at {} instead of {}", p.start, cursor)));
                }
                if p.end <= p.start {
                    return Err(err("piece has nonpositive length".into()));
                }
                if p.rate.is_negative() {
                    return Err(err("negative rate".into()));
                }
                integral += &p.rate * (&p.end - &p.start);
                cursor = p.end.clone();
            }
            if cursor != Rat::one() {
                return Err(err(format!("pieces end at {cursor} instead of 1")));
            }
            if !integral.is_one() {
                return Err(err(format!("integral is {integral}, not 1")));
            }
        }
        let uniform = pieces
            .iter()
            .all(|ps| ps.len() == 1 && ps[0].rate.is_one());
        Ok(EatingSpeeds { pieces, uniform })
    }

    /// Everyone eats at rate one throughout `[0,1]`.
    pub fn uniform(n: usize) -> Self {
        let piece = SpeedPiece {
            start: Rat::zero(),
            end: Rat::one(),
            rate: Rat::one(),
        };
        EatingSpeeds {
            pieces: vec![vec![piece]; n],
            uniform: true,
        }
    }

    pub fn agents(&self) -> usize {
        self.pieces.len()
    }

    pub fn pieces(&self, a: Agent) -> &[SpeedPiece] {
        &self.pieces[a.0]
    }

    /// Exact integral of agent `a`'s rate over `[from, to]`; rates vanish
    /// outside `[0,1]`.
    pub fn consumed(&self, a: Agent, from: &Rat, to: &Rat) -> Rat {
        if self.uniform {
            let hi = if *to < Rat::one() { to.clone() } else { Rat::one() };
            return if hi > *from { hi - from } else { Rat::zero() };
        }
        let mut total = Rat::zero();
        for p in &self.pieces[a.0] {
            let lo = if *from > p.start { from.clone() } else { p.start.clone() };
            let hi = if *to < p.end { to.clone() } else { p.end.clone() };
            if hi > lo {
                total += &p.rate * (hi - lo);
            }
        }
        total
    }

    /// Agent `a`'s remaining demand at time `t`: the integral over `[t, 1]`.
    pub fn remaining_demand(&self, a: Agent, t: &Rat) -> Rat {
        self.consumed(a, t, &Rat::one())
    }

    /// Rate in force at time `t` (half-open pieces; zero past 1).
    fn rate_at(&self, a: Agent, t: &Rat) -> Rat {
        for p in &self.pieces[a.0] {
            if *t >= p.start && *t < p.end {
                return p.rate.clone();
            }
        }
        Rat::zero()
    }
}

/// How long a set of eaters consumes one item: the earliest time at which
/// either the supply is exhausted or every eater's remaining demand is met.
///
/// The cumulative consumption is piecewise linear in the duration, so the
/// stop time is found by walking its breakpoints and solving one linear
/// equation exactly.
pub fn gamma(eaters: AgentSet, elapsed: &[Rat], supply: &Rat, speeds: &EatingSpeeds) -> Rat {
    if speeds.uniform {
        return gamma_uniform(eaters, elapsed, supply);
    }
    let total_demand: Rat = eaters
        .iter()
        .map(|k| speeds.remaining_demand(k, &elapsed[k.0]))
        .sum();
    let target = if supply < &total_demand {
        supply.clone()
    } else {
        total_demand
    };
    if target.is_zero() {
        return Rat::zero();
    }

    // Breakpoints of the cumulative-consumption function, as durations.
    let mut breaks: Vec<Rat> = Vec::new();
    for k in eaters.iter() {
        for p in speeds.pieces(k) {
            for b in [&p.start, &p.end] {
                if *b > elapsed[k.0] {
                    breaks.push(b - &elapsed[k.0]);
                }
            }
        }
    }
    breaks.sort();
    breaks.dedup();

    let mut consumed = Rat::zero();
    let mut at = Rat::zero();
    for b in breaks {
        let slope: Rat = eaters
            .iter()
            .map(|k| speeds.rate_at(k, &(&elapsed[k.0] + &at)))
            .sum();
        let segment = &b - &at;
        let gain = &slope * &segment;
        if &consumed + &gain >= target {
            return at + (target - consumed) / slope;
        }
        consumed += gain;
        at = b;
    }
    unreachable!("demand target is reachable: rates vanish past t = 1");
}

/// Unit-rate specialization: cumulative consumption is
/// `sum_k min(rho, 1 - t_k)`, so walk the sorted residual demands.
fn gamma_uniform(eaters: AgentSet, elapsed: &[Rat], supply: &Rat) -> Rat {
    let one = Rat::one();
    let mut demands: Vec<Rat> = eaters
        .iter()
        .map(|k| {
            if elapsed[k.0] < one {
                &one - &elapsed[k.0]
            } else {
                Rat::zero()
            }
        })
        .collect();
    demands.sort();
    let total: Rat = demands.iter().sum();
    let target = if supply < &total { supply.clone() } else { total };

    let mut consumed = Rat::zero();
    let mut at = Rat::zero();
    for (done, d) in demands.iter().enumerate() {
        // Everyone not yet satisfied eats at rate one.
        let slope = (demands.len() - done) as i64;
        let gain = rat(slope, 1) * (d - &at);
        if &consumed + &gain >= target {
            return at + (target - consumed) / rat(slope, 1);
        }
        consumed += gain;
        at = d.clone();
    }
    at
}

/// One item's consumption within a round.
#[derive(Clone, Debug)]
pub struct ConsumptionRecord {
    pub item: Item,
    pub eaters: AgentSet,
    pub duration: Rat,
    pub amounts: Vec<(Agent, Rat)>,
}

/// Final supplies, elapsed eating times, and the per-round consumption log
/// of a respecting-eagerness run.
#[derive(Clone, Debug)]
pub struct EatingState {
    pub supplies: Vec<Rat>,
    pub elapsed: Vec<Rat>,
    pub rounds: Vec<Vec<ConsumptionRecord>>,
}

/// Run a respecting-eagerness mechanism with the given speed functions.
pub fn pre_run(profile: &Profile, speeds: &EatingSpeeds) -> Result<(RandomAssignment, EatingState)> {
    let n = profile.n();
    if speeds.agents() != n {
        return Err(Error::InvalidSpeeds(format!(
            "{} speed functions for {} agents",
            speeds.agents(),
            n
        )));
    }

    let mut supply: Vec<Rat> = vec![Rat::one(); n];
    let mut elapsed: Vec<Rat> = vec![Rat::zero(); n];
    let mut shares: Vec<Vec<Rat>> = vec![vec![Rat::zero(); n]; n];
    let mut rounds: Vec<Vec<ConsumptionRecord>> = Vec::new();

    // Each round kills an item or satisfies a whole eater set.
    for _ in 0..2 * n + 2 {
        let remaining: ItemSet = profile.items().filter(|o| !supply[o.0].is_zero()).collect();
        if remaining.is_empty() {
            break;
        }
        // Satisfied agents consume at rate zero; excluding them keeps every
        // eater set productive.
        let mut eager: Vec<AgentSet> = vec![AgentSet::empty(); n];
        for a in profile.agents() {
            if !speeds.remaining_demand(a, &elapsed[a.0]).is_zero() {
                let top = profile.top_among(a, remaining)?;
                eager[top.0].insert(a);
            }
        }

        let mut log = Vec::new();
        for o in remaining.iter() {
            let eaters = eager[o.0];
            if eaters.is_empty() {
                continue;
            }
            let duration = gamma(eaters, &elapsed, &supply[o.0], speeds);
            let mut amounts = Vec::new();
            for k in eaters.iter() {
                let amount = speeds.consumed(k, &elapsed[k.0], &(&elapsed[k.0] + &duration));
                supply[o.0] -= &amount;
                shares[k.0][o.0] += &amount;
                amounts.push((k, amount));
            }
            for k in eaters.iter() {
                let t = &elapsed[k.0] + &duration;
                elapsed[k.0] = if t > Rat::one() { Rat::one() } else { t };
            }
            log.push(ConsumptionRecord {
                item: o,
                eaters,
                duration,
                amounts,
            });
        }
        debug_assert!(!log.is_empty(), "remaining items imply unsatisfied agents");
        rounds.push(log);
    }

    let matrix = RandomAssignment::from_rows(shares)?;
    Ok((
        matrix,
        EatingState {
            supplies: supply,
            elapsed,
            rounds,
        },
    ))
}

/// The uniform-speed member of the respecting-eagerness family.
pub fn upre_run(profile: &Profile) -> RandomAssignment {
    pre_run(profile, &EatingSpeeds::uniform(profile.n()))
        .expect("uniform speeds are valid")
        .0
}

/// Classic probabilistic serial: all agents eat their top available item at
/// unit speed on a single global clock, and an item disappears at the exact
/// moment its supply hits zero.
pub fn ps_run(profile: &Profile) -> RandomAssignment {
    let n = profile.n();
    let mut supply: Vec<Rat> = vec![Rat::one(); n];
    let mut available = profile.all_items();
    let mut shares: Vec<Vec<Rat>> = vec![vec![Rat::zero(); n]; n];
    let mut clock = Rat::zero();

    while !available.is_empty() {
        let mut eaters: Vec<AgentSet> = vec![AgentSet::empty(); n];
        for a in profile.agents() {
            let top = profile.top_among(a, available).expect("available nonempty");
            eaters[top.0].insert(a);
        }
        // Next exhaustion event across all items being eaten.
        let step = available
            .iter()
            .filter(|o| !eaters[o.0].is_empty())
            .map(|o| &supply[o.0] / rat(eaters[o.0].len() as i64, 1))
            .min()
            .expect("all agents are eating until the clock hits 1");
        let mut exhausted = Vec::new();
        for o in available.iter() {
            let set = eaters[o.0];
            if set.is_empty() {
                continue;
            }
            for a in set.iter() {
                shares[a.0][o.0] += &step;
                supply[o.0] -= &step;
            }
            if supply[o.0].is_zero() {
                exhausted.push(o);
            }
        }
        for o in exhausted {
            available.remove(o);
        }
        clock += &step;
    }
    debug_assert!(clock.is_one());
    RandomAssignment::from_rows(shares).expect("eating preserves double stochasticity")
}

/// One round of the eager-residual structure of a random assignment: the
/// items that still have unclaimed supply, the agents eager for each, and
/// the residual supplies and demands.
#[derive(Clone, Debug)]
pub struct EaFeriRound {
    /// Items whose supply is not yet owned by their past eager sets.
    pub items: ItemSet,
    /// Per item: the agents whose top item this is (all agents, satisfied
    /// or not). Empty for items outside `items`.
    pub eager: Vec<AgentSet>,
    /// Per item in `items`: supply minus the shares held by agents that
    /// were eager for it in earlier rounds.
    pub residual_supply: Vec<Rat>,
    /// Per agent: demand left below the previous round's top item (1 in the
    /// first round).
    pub residual_demand: Vec<Rat>,
}

impl EaFeriRound {
    /// The eager agents that still have residual demand — the working set
    /// the residual-share arguments reason about.
    pub fn active_eager(&self, o: Item) -> AgentSet {
        self.eager[o.0]
            .iter()
            .filter(|a| !self.residual_demand[a.0].is_zero())
            .collect()
    }
}

/// The full eager-residual trace of a random assignment.
#[derive(Clone, Debug)]
pub struct EaFeriTrace {
    pub rounds: Vec<EaFeriRound>,
    /// True when the item set reached a nonempty fixed point instead of
    /// draining; those items survive every later round.
    pub stabilized: bool,
}

/// A witness that the eager-residual condition fails: `agent` was eager for
/// `item` in an earlier round, the item's supply survived, and the agent's
/// share of her weak upper contour at `item` falls short of one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EaFeriViolation {
    pub agent: Agent,
    pub item: Item,
    pub satisfied: Rat,
}

/// Compute the eager-residual rounds of `p`: round by round, remove the
/// items fully owned by their past eager sets and recompute everyone's top.
pub fn ea_feri_trace(profile: &Profile, p: &RandomAssignment) -> EaFeriTrace {
    let n = profile.n();
    let mut past_eager: Vec<AgentSet> = vec![AgentSet::empty(); n];
    let mut rounds: Vec<EaFeriRound> = Vec::new();
    let mut stabilized = false;

    for _ in 0..n * n + 2 {
        let items: ItemSet = profile
            .items()
            .filter(|&o| {
                let owned: Rat = past_eager[o.0].iter().map(|k| p.share(k, o).clone()).sum();
                !owned.is_one()
            })
            .collect();
        if items.is_empty() {
            break;
        }

        let mut eager: Vec<AgentSet> = vec![AgentSet::empty(); n];
        for a in profile.agents() {
            let top = profile.top_among(a, items).expect("items nonempty");
            eager[top.0].insert(a);
        }
        let residual_supply: Vec<Rat> = profile
            .items()
            .map(|o| {
                if items.contains(o) {
                    let owned: Rat = past_eager[o.0].iter().map(|k| p.share(k, o).clone()).sum();
                    Rat::one() - owned
                } else {
                    Rat::zero()
                }
            })
            .collect();
        let residual_demand: Vec<Rat> = profile
            .agents()
            .map(|a| match rounds.last() {
                None => Rat::one(),
                Some(prev) => {
                    let top = profile.top_among(a, prev.items).expect("nonempty");
                    let held = crate::dominance::upper_sum(profile.preference(a), p.row(a), top);
                    Rat::one() - held
                }
            })
            .collect();

        let same_items = rounds.last().map_or(false, |r| r.items == items);
        let mut grew = false;
        for o in items.iter() {
            let merged = past_eager[o.0].union(eager[o.0]);
            if merged != past_eager[o.0] {
                grew = true;
            }
            past_eager[o.0] = merged;
        }
        rounds.push(EaFeriRound {
            items,
            eager,
            residual_supply,
            residual_demand,
        });
        if same_items && !grew {
            stabilized = true;
            break;
        }
    }

    EaFeriTrace { rounds, stabilized }
}

/// First violation of the eager-residual condition in round order, scanning
/// items then agents in ascending index order.
pub fn ea_feri_violation(
    profile: &Profile,
    p: &RandomAssignment,
    trace: &EaFeriTrace,
) -> Option<EaFeriViolation> {
    let n = profile.n();
    let mut past_eager: Vec<AgentSet> = vec![AgentSet::empty(); n];
    let survives_past_end = |r: usize| trace.stabilized && r == trace.rounds.len() - 1;

    for (r, round) in trace.rounds.iter().enumerate() {
        // Items alive in round r+1: those of the next round, or the fixed
        // point itself when the trace stabilized.
        let next_items = trace
            .rounds
            .get(r + 1)
            .map(|nr| nr.items)
            .or_else(|| survives_past_end(r).then_some(round.items));
        for o in round.items.iter() {
            past_eager[o.0] = past_eager[o.0].union(round.eager[o.0]);
        }
        if let Some(next) = next_items {
            for o in next.iter() {
                for j in past_eager[o.0].iter() {
                    let held = crate::dominance::upper_sum(profile.preference(j), p.row(j), o);
                    if !held.is_one() {
                        return Some(EaFeriViolation {
                            agent: j,
                            item: o,
                            satisfied: held,
                        });
                    }
                }
            }
        }
    }
    None
}

/// Recover eating-speed functions that make [`pre_run`] reproduce an
/// eager-residual-respecting assignment `q` exactly: agent `j` eats at rate
/// `n * q(j,o)` on the `r`-th of `n` equal slots, where `r` is the first
/// round in which `o` is her top remaining item.
pub fn recover_speeds(profile: &Profile, q: &RandomAssignment) -> Result<EatingSpeeds> {
    let trace = ea_feri_trace(profile, q);
    if let Some(v) = ea_feri_violation(profile, q, &trace) {
        return Err(Error::Precondition(format!(
            "assignment does not respect eagerness for remaining items: agent `{}` was eager for \
             `{}` but holds only {} of its upper contour",
            profile.agent_id(v.agent),
            profile.item_id(v.item),
            v.satisfied
        )));
    }

    let n = profile.n();
    let slot = rat(1, n as i64);
    let mut pieces: Vec<Vec<SpeedPiece>> = vec![Vec::new(); n];
    for a in profile.agents() {
        let mut seen = ItemSet::empty();
        for r in 0..n {
            let rate = match trace.rounds.get(r) {
                Some(round) => {
                    let top = profile.top_among(a, round.items).expect("nonempty");
                    if seen.contains(top) {
                        Rat::zero()
                    } else {
                        seen.insert(top);
                        rat(n as i64, 1) * q.share(a, top)
                    }
                }
                None => Rat::zero(),
            };
            pieces[a.0].push(SpeedPiece {
                start: rat(r as i64, 1) * &slot,
                end: rat(r as i64 + 1, 1) * &slot,
                rate,
            });
        }
    }
    EatingSpeeds::new(pieces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::DeterministicAssignment;

    fn fig1() -> Profile {
        fixtures::fig1_profile()
    }

    #[test]
    fn gamma_matches_worked_examples() {
        let p = fig1();
        let speeds = EatingSpeeds::uniform(6);
        let zeros = vec![Rat::zero(); 6];
        // Four fresh eaters, unit supply: exhaustion after a quarter unit.
        let eaters: AgentSet = ["3", "4", "5", "6"]
            .iter()
            .map(|id| p.agent_by_id(id).unwrap())
            .collect();
        assert_eq!(gamma(eaters, &zeros, &Rat::one(), &speeds), rat(1, 4));

        // A single eater a quarter into her budget stops when satisfied.
        let mut elapsed = zeros.clone();
        let a6 = p.agent_by_id("6").unwrap();
        elapsed[a6.0] = rat(1, 4);
        let solo: AgentSet = [a6].into_iter().collect();
        assert_eq!(gamma(solo, &elapsed, &Rat::one(), &speeds), rat(3, 4));

        // Exhausted supply stops consumption immediately.
        assert_eq!(gamma(solo, &elapsed, &Rat::zero(), &speeds), rat(0, 1));
    }

    #[test]
    fn upre_reproduces_the_fig1_table() {
        let p = fig1();
        let got = upre_run(&p);
        assert_eq!(got, fixtures::fig1_upre_assignment());
    }

    #[test]
    fn upre_round_log_matches_the_worked_execution() {
        // Round 1: a, b eaten alone; c split four ways. Round 2: e split by
        // three, d eaten by agent 6 for 3/4. Round 3: d's remainder split
        // three ways.  Round 4: f split three ways.
        let p = fig1();
        let (_, state) = pre_run(&p, &EatingSpeeds::uniform(6)).unwrap();
        assert_eq!(state.rounds.len(), 4);
        let d = p.item_by_id("d").unwrap();
        let round2: Vec<_> = state.rounds[1].iter().filter(|r| r.item == d).collect();
        assert_eq!(round2.len(), 1);
        assert_eq!(round2[0].duration, rat(3, 4));
        let round3 = &state.rounds[2];
        assert_eq!(round3.len(), 1);
        assert_eq!(round3[0].item, d);
        assert_eq!(round3[0].duration, rat(1, 12));
        assert!(state.supplies.iter().all(|s| s.is_zero()));
    }

    #[test]
    fn upre_single_agent_and_identical_pair() {
        let p1 = Profile::from_indices(&[vec![0]]);
        assert_eq!(*upre_run(&p1).share(Agent(0), Item(0)), rat(1, 1));

        let p2 = Profile::from_indices(&[vec![0, 1], vec![0, 1]]);
        let m = upre_run(&p2);
        for a in p2.agents() {
            for o in p2.items() {
                assert_eq!(*m.share(a, o), rat(1, 2));
            }
        }
    }

    #[test]
    fn upre_on_the_four_agent_impossibility_profile() {
        // a>c>b>d / a>c>b>d / a>b>c>d / b>a>d>c: the first three agents
        // split a and then share c and d; agent 4 eats all of b.
        let p = fixtures::prop4_profile();
        let m = upre_run(&p);
        let a = p.item_by_id("a").unwrap();
        let b = p.item_by_id("b").unwrap();
        for id in ["1", "2", "3"] {
            assert_eq!(*m.share(p.agent_by_id(id).unwrap(), a), rat(1, 3));
        }
        assert_eq!(*m.share(p.agent_by_id("4").unwrap(), b), rat(1, 1));
    }

    #[test]
    fn ps_reproduces_the_three_agent_table() {
        let p = fixtures::tiny1_profile();
        assert_eq!(ps_run(&p), fixtures::tiny1_ps_assignment());
    }

    #[test]
    fn ps_with_identical_rankings_is_uniform() {
        let p = Profile::from_indices(&[vec![0, 1, 2], vec![0, 1, 2], vec![0, 1, 2]]);
        let m = ps_run(&p);
        for a in p.agents() {
            for o in p.items() {
                assert_eq!(*m.share(a, o), rat(1, 3));
            }
        }
    }

    #[test]
    fn ps_differs_from_upre_on_fig1_at_agent_6() {
        let p = fig1();
        let ps = ps_run(&p);
        let upre = upre_run(&p);
        let a6 = p.agent_by_id("6").unwrap();
        assert_ne!(ps.row(a6), upre.row(a6));
    }

    #[test]
    fn trace_of_the_rank_table_shows_the_residual_structure() {
        // After round 1 the three top items are gone; d survives with agent
        // 6 as its only unsatisfied eager agent.
        let p = fig1();
        let table = fixtures::fig1_fhr_sete_assignment();
        let trace = ea_feri_trace(&p, &table);
        let expect: ItemSet = ["d", "e", "f"]
            .iter()
            .map(|id| p.item_by_id(id).unwrap())
            .collect();
        assert_eq!(trace.rounds[1].items, expect);
        let d = p.item_by_id("d").unwrap();
        let active: Vec<Agent> = trace.rounds[1].active_eager(d).iter().collect();
        assert_eq!(active, vec![p.agent_by_id("6").unwrap()]);
    }

    #[test]
    fn trace_of_ps_table_flags_agent_3() {
        let p = fixtures::tiny1_profile();
        let ps = fixtures::tiny1_ps_assignment();
        let trace = ea_feri_trace(&p, &ps);
        let b = p.item_by_id("b").unwrap();
        let a3 = p.agent_by_id("3").unwrap();
        assert!(trace.rounds[0].eager[b.0].contains(a3));
        assert_eq!(trace.rounds[0].eager[b.0].len(), 1);
        assert!(trace.rounds[1].items.contains(b));
        let v = ea_feri_violation(&p, &ps, &trace).expect("violation");
        assert_eq!(v.agent, a3);
        assert_eq!(v.item, b);
        assert_eq!(v.satisfied, rat(3, 4));
    }

    #[test]
    fn trace_of_single_agent_is_one_round() {
        let p = Profile::from_indices(&[vec![0]]);
        let m = DeterministicAssignment::new(vec![Item(0)]).unwrap().matrix();
        let trace = ea_feri_trace(&p, &m);
        assert_eq!(trace.rounds.len(), 1);
        assert!(!trace.stabilized);
    }

    #[test]
    fn recover_speeds_round_trips_the_upre_output() {
        let p = fig1();
        let q = upre_run(&p);
        let speeds = recover_speeds(&p, &q).unwrap();
        // Agent 3 eats c, e, d, f at rates 6*(1/4), 6*(1/3), 6*(1/12),
        // 6*(1/3) on the first four sixths of [0,1].
        let a3 = p.agent_by_id("3").unwrap();
        let rates: Vec<Rat> = speeds.pieces(a3).iter().map(|p| p.rate.clone()).collect();
        assert_eq!(
            rates,
            vec![rat(3, 2), rat(2, 1), rat(1, 2), rat(2, 1), rat(0, 1), rat(0, 1)]
        );
        let (again, _) = pre_run(&p, &speeds).unwrap();
        assert_eq!(again, q);
    }

    #[test]
    fn recover_speeds_round_trips_a_deterministic_assignment() {
        let p = fig1();
        let a_star = fixtures::fig1_feri_assignment();
        let q = a_star.matrix();
        let speeds = recover_speeds(&p, &q).unwrap();
        let (again, _) = pre_run(&p, &speeds).unwrap();
        assert_eq!(again, q);
    }

    #[test]
    fn recover_speeds_single_agent() {
        let p = Profile::from_indices(&[vec![0]]);
        let q = DeterministicAssignment::new(vec![Item(0)]).unwrap().matrix();
        let speeds = recover_speeds(&p, &q).unwrap();
        assert_eq!(speeds.pieces(Agent(0)).len(), 1);
        assert_eq!(speeds.pieces(Agent(0))[0].rate, rat(1, 1));
    }

    #[test]
    fn recover_speeds_rejects_non_conforming_assignments() {
        let p = fixtures::tiny1_profile();
        let ps = fixtures::tiny1_ps_assignment();
        assert!(matches!(
            recover_speeds(&p, &ps),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn malformed_speeds_are_rejected() {
        let gap = EatingSpeeds::new(vec![vec![SpeedPiece {
            start: rat(1, 4),
            end: Rat::one(),
            rate: rat(4, 3),
        }]]);
        assert!(matches!(gap, Err(Error::InvalidSpeeds(_))));

        let wrong_integral = EatingSpeeds::new(vec![vec![SpeedPiece {
            start: Rat::zero(),
            end: Rat::one(),
            rate: rat(1, 2),
        }]]);
        assert!(matches!(wrong_integral, Err(Error::InvalidSpeeds(_))));

        let p = fixtures::tiny1_profile();
        let too_few = EatingSpeeds::uniform(2);
        assert!(matches!(
            pre_run(&p, &too_few),
            Err(Error::InvalidSpeeds(_))
        ));
    }

    #[test]
    fn pre_round_item_order_does_not_matter() {
        // Items are processed independently within a round: permuting item
        // labels and permuting the result back is a no-op.
        let base = fig1();
        let upre_base = upre_run(&base);
        // Relabel items f,e,d,c,b,a -> a,b,c,d,e,f (reverse) and rerun.
        let ids = ["f", "e", "d", "c", "b", "a"];
        let rankings: Vec<Vec<String>> = (0..6)
            .map(|a| {
                base.preference(Agent(a))
                    .iter()
                    .map(|&o| base.item_id(o).to_string())
                    .collect()
            })
            .collect();
        let relabeled = Profile::new(
            (1..=6).map(|i| i.to_string()).collect(),
            ids.iter().map(|s| s.to_string()).collect(),
            rankings,
        )
        .unwrap();
        let upre_re = upre_run(&relabeled);
        for a in base.agents() {
            for o in base.items() {
                let o_re = relabeled.item_by_id(base.item_id(o)).unwrap();
                assert_eq!(upre_base.share(a, o), upre_re.share(a, o_re));
            }
        }
    }
}
