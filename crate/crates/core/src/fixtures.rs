//! Worked instances embedded as data, and audits that replay their claims
//! computationally.
//!
//! Each audit re-derives every printed rational of the underlying argument
//! from the mechanisms and oracles in this crate and reports one check line
//! per value. The corpus ships inside the library and can be exported to
//! disk as documents for CLI use.

use num_traits::{One, Zero};

use crate::dominance::{sd_dominates, strict_prefixes, upper_sum};
use crate::mechanisms::{eating, lottery};
use crate::model::{
    Agent, Budget, DeterministicAssignment, Item, ItemSet, PriorityOrder, Profile,
    RandomAssignment,
};
use crate::oracles;
use crate::properties::{self, BaseProperty, RankSignature};
use crate::rational::{parse_rat, rat, Rat};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Instance data
// ---------------------------------------------------------------------------

fn profile(agents: &[&str], items: &[&str], rankings: &[&[&str]]) -> Profile {
    Profile::new(
        agents.iter().map(|s| s.to_string()).collect(),
        items.iter().map(|s| s.to_string()).collect(),
        rankings
            .iter()
            .map(|r| r.iter().map(|s| s.to_string()).collect())
            .collect(),
    )
    .expect("embedded instance is valid")
}

fn matrix(profile: &Profile, rows: &[&[&str]]) -> RandomAssignment {
    let parsed = rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|s| parse_rat(s).expect("embedded rational"))
                .collect()
        })
        .collect();
    let _ = profile;
    RandomAssignment::from_rows(parsed).expect("embedded table is doubly stochastic")
}

/// Six agents over items a–f: agents 3–5 share one ranking, and item c is
/// everyone's top among agents 3–6.
pub fn fig1_profile() -> Profile {
    profile(
        &["1", "2", "3", "4", "5", "6"],
        &["a", "b", "c", "d", "e", "f"],
        &[
            &["a", "b", "c", "d", "e", "f"],
            &["b", "a", "c", "d", "e", "f"],
            &["c", "e", "d", "f", "a", "b"],
            &["c", "e", "d", "f", "a", "b"],
            &["c", "e", "d", "f", "a", "b"],
            &["c", "a", "b", "d", "e", "f"],
        ],
    )
}

/// The eagerness-respecting assignment `A*` on the six-agent instance.
pub fn fig1_feri_assignment() -> DeterministicAssignment {
    DeterministicAssignment::from_pairs(
        &fig1_profile(),
        &[("1", "a"), ("2", "b"), ("3", "c"), ("4", "e"), ("5", "f"), ("6", "d")],
    )
    .expect("valid assignment")
}

/// The rank-respecting assignment circled in the six-agent instance.
pub fn fig1_circled_assignment() -> DeterministicAssignment {
    DeterministicAssignment::from_pairs(
        &fig1_profile(),
        &[("1", "a"), ("2", "b"), ("3", "c"), ("4", "e"), ("5", "d"), ("6", "f")],
    )
    .expect("valid assignment")
}

/// A rank-maximal assignment on the six-agent instance, signature
/// (3,1,1,1,0,0).
pub fn fig1_rm_assignment() -> DeterministicAssignment {
    DeterministicAssignment::from_pairs(
        &fig1_profile(),
        &[("1", "a"), ("2", "b"), ("3", "e"), ("4", "d"), ("5", "f"), ("6", "c")],
    )
    .expect("valid assignment")
}

/// An assignment more popular than `A*`: two agents prefer it, one prefers
/// `A*`.
pub fn fig1_popular_rival() -> DeterministicAssignment {
    DeterministicAssignment::from_pairs(
        &fig1_profile(),
        &[("1", "a"), ("2", "b"), ("3", "f"), ("4", "c"), ("5", "e"), ("6", "d")],
    )
    .expect("valid assignment")
}

/// The unique rank-respecting, equal-treatment random assignment on the
/// six-agent instance (also the probabilistic-rank output there).
pub fn fig1_fhr_sete_assignment() -> RandomAssignment {
    matrix(
        &fig1_profile(),
        &[
            &["1/1", "0/1", "0/1", "0/1", "0/1", "0/1"],
            &["0/1", "1/1", "0/1", "0/1", "0/1", "0/1"],
            &["0/1", "0/1", "1/4", "1/3", "1/3", "1/12"],
            &["0/1", "0/1", "1/4", "1/3", "1/3", "1/12"],
            &["0/1", "0/1", "1/4", "1/3", "1/3", "1/12"],
            &["0/1", "0/1", "1/4", "0/1", "0/1", "3/4"],
        ],
    )
}

/// The uniform respecting-eagerness output on the six-agent instance.
pub fn fig1_upre_assignment() -> RandomAssignment {
    matrix(
        &fig1_profile(),
        &[
            &["1/1", "0/1", "0/1", "0/1", "0/1", "0/1"],
            &["0/1", "1/1", "0/1", "0/1", "0/1", "0/1"],
            &["0/1", "0/1", "1/4", "1/12", "1/3", "1/3"],
            &["0/1", "0/1", "1/4", "1/12", "1/3", "1/3"],
            &["0/1", "0/1", "1/4", "1/12", "1/3", "1/3"],
            &["0/1", "0/1", "1/4", "3/4", "0/1", "0/1"],
        ],
    )
}

/// Three agents: a>b>c, a>c>b, b>a>c.
pub fn tiny1_profile() -> Profile {
    profile(
        &["1", "2", "3"],
        &["a", "b", "c"],
        &[&["a", "b", "c"], &["a", "c", "b"], &["b", "a", "c"]],
    )
}

/// The probabilistic-serial output on the three-agent instance.
pub fn tiny1_ps_assignment() -> RandomAssignment {
    matrix(
        &tiny1_profile(),
        &[
            &["1/2", "1/4", "1/4"],
            &["1/2", "0/1", "1/2"],
            &["0/1", "3/4", "1/4"],
        ],
    )
}

/// A serial-dictatorship outcome on the three-agent instance that is
/// Pareto efficient but ignores eagerness: 1 gets b, 2 gets a, 3 gets c.
pub fn tiny1_pe_not_feri_assignment() -> DeterministicAssignment {
    DeterministicAssignment::from_pairs(&tiny1_profile(), &[("1", "b"), ("2", "a"), ("3", "c")])
        .expect("valid assignment")
}

/// Five agents separating the eager Boston expectation from every uniform
/// adaptive Boston expectation: 1,2 want a then c; 3–5 want b then c.
pub fn app_b4_profile() -> Profile {
    profile(
        &["1", "2", "3", "4", "5"],
        &["a", "b", "c", "d", "e"],
        &[
            &["a", "c", "b", "d", "e"],
            &["a", "c", "b", "d", "e"],
            &["b", "c", "a", "d", "e"],
            &["b", "c", "a", "d", "e"],
            &["b", "c", "a", "d", "e"],
        ],
    )
}

/// Five agents with one identical ranking; here the two expectations agree.
pub fn app_b4_identical_profile() -> Profile {
    profile(
        &["1", "2", "3", "4", "5"],
        &["a", "b", "c", "d", "e"],
        &[
            &["a", "b", "c", "d", "e"],
            &["a", "b", "c", "d", "e"],
            &["a", "b", "c", "d", "e"],
            &["a", "b", "c", "d", "e"],
            &["a", "b", "c", "d", "e"],
        ],
    )
}

/// Four agents: a>c>b>d twice, a>b>c>d, b>a>d>c. Shares of a are forced
/// onto agents 1–3 and item b onto agent 4.
pub fn prop4_profile() -> Profile {
    profile(
        &["1", "2", "3", "4"],
        &["a", "b", "c", "d"],
        &[
            &["a", "c", "b", "d"],
            &["a", "c", "b", "d"],
            &["a", "b", "c", "d"],
            &["b", "a", "d", "c"],
        ],
    )
}

/// The four-agent profile after agent 3 copies agent 4's ranking.
pub fn prop4_misreport_profile() -> Profile {
    let p = prop4_profile();
    let a3 = p.agent_by_id("3").expect("agent 3");
    let ranking = ["b", "a", "d", "c"]
        .iter()
        .map(|id| p.item_by_id(id).expect("item"))
        .collect();
    p.with_ranking(a3, ranking).expect("valid misreport")
}

/// Eight agents over items a–h; the misreport fixture for weak
/// strategyproofness of the uniform eating mechanism.
pub fn prop7_profile() -> Profile {
    profile(
        &["1", "2", "3", "4", "5", "6", "7", "8"],
        &["a", "b", "c", "d", "e", "f", "g", "h"],
        &[
            &["a", "b", "d", "e", "f", "g", "h", "c"],
            &["a", "h", "g", "f", "e", "d", "b", "c"],
            &["c", "d", "e", "f", "g", "b", "h", "a"],
            &["c", "d", "e", "f", "g", "b", "h", "a"],
            &["c", "d", "e", "f", "g", "b", "h", "a"],
            &["c", "d", "e", "f", "g", "b", "h", "a"],
            &["c", "d", "e", "f", "g", "b", "h", "a"],
            &["c", "d", "b", "e", "f", "g", "h", "a"],
        ],
    )
}

/// Agent 8's profitable misreport: demote b below e.
pub fn prop7_misreport_ranking(p: &Profile) -> Vec<Item> {
    ["c", "d", "e", "b", "f", "g", "h", "a"]
        .iter()
        .map(|id| p.item_by_id(id).expect("item"))
        .collect()
}

/// Eighteen agents in three blocks plus a pivot agent `x`; four filler
/// items pad the market. The instance forces a decomposition component in
/// which `x` holds the last block item and eagerness fails at tier 4.
pub fn prop8_profile() -> Profile {
    let items = [
        "a1", "a2", "a3", "a4", "b1", "b2", "b3", "b4", "c1", "c2", "c3", "c4", "c5", "c6",
        "d1", "d2", "d3", "d4",
    ];
    let agents: Vec<String> = (1..=17)
        .map(|i| i.to_string())
        .chain(std::iter::once("x".to_string()))
        .collect();

    let complete = |prefix: &[&str]| -> Vec<String> {
        let mut order: Vec<String> = prefix.iter().map(|s| s.to_string()).collect();
        for it in items {
            if !prefix.contains(&it) {
                order.push(it.to_string());
            }
        }
        order
    };

    let mut rankings = Vec::new();
    rankings.push(complete(&["a1", "a2", "a3"])); // 1
    rankings.push(complete(&["a1", "a2", "a3"])); // 2
    rankings.push(complete(&["a1", "a2", "a4"])); // 3
    rankings.push(complete(&["b1", "b2", "b3"])); // 4
    rankings.push(complete(&["b1", "b2", "b3"])); // 5
    rankings.push(complete(&["b1", "b2", "b4"])); // 6
    for _ in 7..=17 {
        rankings.push(complete(&["c1", "c2", "c3", "c4", "c5", "c6"]));
    }
    rankings.push(complete(&["c1", "c2", "c3", "a3", "b3", "c5", "c4", "c6"])); // x

    Profile::new(
        agents,
        items.iter().map(|s| s.to_string()).collect(),
        rankings,
    )
    .expect("embedded instance is valid")
}

/// Ten agents whose eager Boston expectation trades shares of x and y in a
/// cycle.
pub fn ebm_cycle_profile() -> Profile {
    let items = ["a", "b", "c", "d", "e", "f", "g", "h", "x", "y"];
    let complete = |prefix: &[&str]| -> Vec<String> {
        let mut order: Vec<String> = prefix.iter().map(|s| s.to_string()).collect();
        for it in items {
            if !prefix.contains(&it) {
                order.push(it.to_string());
            }
        }
        order
    };
    let mut rankings = Vec::new();
    rankings.push(complete(&["a", "b", "c"]));
    rankings.push(complete(&["a", "b", "d"]));
    rankings.push(complete(&["a", "b", "e"]));
    rankings.push(complete(&["a", "b", "f"]));
    for _ in 5..=7 {
        rankings.push(complete(&["a", "b", "g", "c", "d", "x", "y"]));
    }
    for _ in 8..=10 {
        rankings.push(complete(&["a", "b", "h", "e", "f", "y", "x"]));
    }
    Profile::new(
        (1..=10).map(|i| i.to_string()).collect(),
        items.iter().map(|s| s.to_string()).collect(),
        rankings,
    )
    .expect("embedded instance is valid")
}

// ---------------------------------------------------------------------------
// Audits
// ---------------------------------------------------------------------------

/// One checked value inside an audit.
#[derive(Clone, Debug, serde::Serialize)]
pub struct AuditCheck {
    pub label: String,
    pub value: String,
    pub pass: bool,
}

/// The replay of one fixture's argument.
#[derive(Clone, Debug, serde::Serialize)]
pub struct AuditReport {
    pub fixture: String,
    pub checks: Vec<AuditCheck>,
}

impl AuditReport {
    fn new(fixture: &str) -> Self {
        AuditReport {
            fixture: fixture.to_string(),
            checks: Vec::new(),
        }
    }

    fn check(&mut self, label: &str, value: impl ToString, pass: bool) {
        self.checks.push(AuditCheck {
            label: label.to_string(),
            value: value.to_string(),
            pass,
        });
    }

    /// Expect an exact rational value.
    fn expect_rat(&mut self, label: &str, got: &Rat, want: &str) {
        let want = parse_rat(want).expect("audit literal");
        self.check(label, got, *got == want);
    }

    fn expect_true(&mut self, label: &str, got: bool) {
        self.check(label, got, got);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// First failing check, if any.
    pub fn first_failure(&self) -> Option<&AuditCheck> {
        self.checks.iter().find(|c| !c.pass)
    }
}

/// Registered fixture ids, in `audit all` order.
pub const FIXTURE_IDS: &[&str] = &[
    "app_b4",
    "prop_impefr",
    "prop_impefcr1",
    "prop_impsdcfr1",
    "prop_impefcr2",
    "prop_impsdcfr2",
    "prop_impefcrsdcfr",
    "prop_imprkm",
    "prop_rp",
    "prop_ps",
    "prop_pr",
    "prop_upre",
    "prop_nbm",
    "prop_ebm",
    "prop_pop",
];

/// Replay one fixture's argument. Unknown names are input errors.
pub fn audit_fixture(name: &str) -> Result<AuditReport> {
    match name {
        "app_b4" => Ok(audit_app_b4()),
        "prop_impefr" => Ok(audit_prop_impefr()),
        "prop_impefcr1" => Ok(audit_prop_impefcr1()),
        "prop_impsdcfr1" => Ok(audit_prop_impsdcfr1()),
        "prop_impefcr2" => Ok(audit_prop_impefcr2()),
        "prop_impsdcfr2" => Ok(audit_prop_impsdcfr2()),
        "prop_impefcrsdcfr" => Ok(audit_prop_impefcrsdcfr()),
        "prop_imprkm" => Ok(audit_prop_imprkm()),
        "prop_rp" => Ok(audit_prop_rp()),
        "prop_ps" => Ok(audit_prop_ps()),
        "prop_pr" => Ok(audit_prop_pr()),
        "prop_upre" => Ok(audit_prop_upre()),
        "prop_nbm" => Ok(audit_prop_nbm()),
        "prop_ebm" => Ok(audit_prop_ebm()),
        "prop_pop" => Ok(audit_prop_pop()),
        other => Err(Error::UnknownFixture(other.to_string())),
    }
}

/// The eager Boston expectation differs from every uniform-priority
/// adaptive Boston expectation: 1/6 against 3/20 on agent 1's share of c.
fn audit_app_b4() -> AuditReport {
    let mut r = AuditReport::new("app_b4");
    let budget = Budget::default();
    let p = app_b4_profile();
    let (a1, c) = (p.agent_by_id("1").unwrap(), p.item_by_id("c").unwrap());

    let ebm = lottery::ebm_expectation(&p, &budget).expect("within budget");
    r.expect_rat("eager Boston share (1, c)", ebm.matrix.share(a1, c), "1/6");
    r.expect_rat("world probability mass", &ebm.mass, "1/1");

    let abm = lottery::abm_uniform_expectation(&p, &budget).expect("within budget");
    r.expect_rat("uniform adaptive Boston share (1, c)", abm.share(a1, c), "3/20");
    r.expect_true(
        "expectations differ at (1, c)",
        ebm.matrix.share(a1, c) != abm.share(a1, c),
    );

    let identical = app_b4_identical_profile();
    let e1 = lottery::ebm_expectation(&identical, &budget).expect("within budget");
    let e2 = lottery::abm_uniform_expectation(&identical, &budget).expect("within budget");
    r.expect_true("identical rankings: expectations coincide", e1.matrix == e2);
    r
}

/// No mechanism is simultaneously ex-post rank-respecting, equal-treating,
/// and weakly envy-free: the six-agent instance forces a unique table and
/// that table is dominated at agent 6.
fn audit_prop_impefr() -> AuditReport {
    let mut r = AuditReport::new("prop_impefr");
    let budget = Budget::default();
    let p = fig1_profile();
    let table = fig1_fhr_sete_assignment();

    let fhr = oracles::enumerate_satisfying(&p, BaseProperty::Fhr, &budget).expect("n = 6");
    r.check("rank-respecting assignments", fhr.len(), fhr.len() == 12);
    let (a1, a2) = (p.agent_by_id("1").unwrap(), p.agent_by_id("2").unwrap());
    let (ia, ib) = (p.item_by_id("a").unwrap(), p.item_by_id("b").unwrap());
    r.expect_true(
        "every one gives a to agent 1 and b to agent 2",
        fhr.iter().all(|m| m.item_of(a1) == ia && m.item_of(a2) == ib),
    );

    // Equal treatment pins every entry of the table: the entry bounds over
    // the constrained hull collapse to the printed values.
    let eq = oracles::sete_equalities(&p, &fhr);
    let mut forced = true;
    for agent in p.agents() {
        for item in p.items() {
            let objective = oracles::entry_objective(&fhr, agent, item);
            let (lo, hi) =
                oracles::hull_objective_bounds(&fhr, &eq, &objective).expect("feasible");
            let want = table.share(agent, item);
            forced &= lo == *want && hi == *want;
        }
    }
    r.expect_true("equal treatment forces the whole table", forced);

    let ep = properties::is_ep(&p, &table, BaseProperty::Fhr, &budget).expect("n = 6");
    r.expect_true("table is a convex combination of rank-respecting assignments", ep.holds);
    r.expect_true("table treats equals equally", properties::is_sete(&p, &table).holds);

    let (a3, a6) = (p.agent_by_id("3").unwrap(), p.agent_by_id("6").unwrap());
    let pref6 = p.preference(a6);
    r.expect_true(
        "agent 3's allocation dominates agent 6's under agent 6's ranking",
        sd_dominates(pref6, table.row(a3), table.row(a6)) && table.row(a3) != table.row(a6),
    );
    let strict = strict_prefixes(pref6, table.row(a3), table.row(a6));
    let want: Vec<Item> = ["d", "e"].iter().map(|i| p.item_by_id(i).unwrap()).collect();
    r.check(
        "dominance is strict exactly at d and e",
        format!("{strict:?}"),
        strict == want,
    );
    r.expect_true(
        "weak envy-freeness fails",
        !properties::is_sd_wef(&p, &table).holds,
    );
    r
}

/// Ex-post eagerness-respecting plus equal treatment forces agents 1-3 to
/// split a and agent 4 to take b; envy-freeness then fails at pair (3, 4).
fn audit_prop_impefcr1() -> AuditReport {
    let mut r = AuditReport::new("prop_impefcr1");
    let budget = Budget::default();
    let p = prop4_profile();
    let feri = oracles::enumerate_satisfying(&p, BaseProperty::Feri, &budget).expect("n = 4");
    let eq = oracles::sete_equalities(&p, &feri);

    let (ia, ib) = (p.item_by_id("a").unwrap(), p.item_by_id("b").unwrap());
    for id in ["1", "2", "3"] {
        let agent = p.agent_by_id(id).unwrap();
        let objective = oracles::entry_objective(&feri, agent, ia);
        let (lo, hi) = oracles::hull_objective_bounds(&feri, &eq, &objective).expect("feasible");
        r.expect_rat(&format!("forced share ({id}, a), lower"), &lo, "1/3");
        r.expect_rat(&format!("forced share ({id}, a), upper"), &hi, "1/3");
    }
    let a4 = p.agent_by_id("4").unwrap();
    let objective = oracles::entry_objective(&feri, a4, ib);
    let (lo, hi) = oracles::hull_objective_bounds(&feri, &eq, &objective).expect("feasible");
    r.expect_rat("forced share (4, b), lower", &lo, "1/1");
    r.expect_rat("forced share (4, b), upper", &hi, "1/1");

    // Envy gap at pair (3, 4) on the upper contour of b under agent 3's
    // ranking: agent 3 reaches at most 1/3 while agent 4 reaches 1.
    let a3 = p.agent_by_id("3").unwrap();
    let ucs = p.upper_contour(a3, ib);
    let gap: Vec<Rat> = feri
        .iter()
        .map(|g| {
            let mut v = Rat::zero();
            if ucs.contains(g.item_of(a3)) {
                v += Rat::one();
            }
            if ucs.contains(g.item_of(a4)) {
                v -= Rat::one();
            }
            v
        })
        .collect();
    let (lo, hi) = oracles::hull_objective_bounds(&feri, &eq, &gap).expect("feasible");
    r.expect_rat("envy gap at (3, 4) over ucs(3, b), lower", &lo, "-2/3");
    r.expect_rat("envy gap at (3, 4) over ucs(3, b), upper", &hi, "-2/3");
    r.expect_true("agent 3 reaches 1/3 < 1", rat(1, 3) < rat(1, 1));
    r
}

/// The ex-ante version of the same impossibility: the eager-residual
/// structure forces the same split, realized here by the uniform eating
/// mechanism, and envy-freeness fails identically.
fn audit_prop_impsdcfr1() -> AuditReport {
    let mut r = AuditReport::new("prop_impsdcfr1");
    let p = prop4_profile();
    let q = eating::upre_run(&p);

    let (ia, ib) = (p.item_by_id("a").unwrap(), p.item_by_id("b").unwrap());
    for id in ["1", "2", "3"] {
        let agent = p.agent_by_id(id).unwrap();
        r.expect_rat(&format!("share ({id}, a)"), q.share(agent, ia), "1/3");
    }
    let a4 = p.agent_by_id("4").unwrap();
    r.expect_rat("share (4, b)", q.share(a4, ib), "1/1");
    r.expect_true(
        "output respects eagerness for remaining items",
        properties::is_ea_feri(&p, &q).holds,
    );
    r.expect_true("output treats equals equally", properties::is_sete(&p, &q).holds);

    let a3 = p.agent_by_id("3").unwrap();
    let held3 = upper_sum(p.preference(a3), q.row(a3), ib);
    let held4 = upper_sum(p.preference(a3), q.row(a4), ib);
    r.expect_rat("agent 3's mass on ucs(3, b)", &held3, "1/3");
    r.expect_rat("agent 4's mass on ucs(3, b)", &held4, "1/1");
    r.expect_true("envy-freeness fails", !properties::is_sd_ef(&p, &q).holds);
    r
}

/// With equal treatment, ex-post eagerness-respecting rules out strict
/// strategyproofness: agent 3 copying agent 4 moves her cumulative share at
/// b from 1/3 to 1/2.
fn audit_prop_impefcr2() -> AuditReport {
    let mut r = AuditReport::new("prop_impefcr2");
    let budget = Budget::default();
    let truthful = prop4_profile();
    let misreported = prop4_misreport_profile();

    // The misreported instance forces the familiar half/half table.
    let feri = oracles::enumerate_satisfying(&misreported, BaseProperty::Feri, &budget)
        .expect("n = 4");
    let eq = oracles::sete_equalities(&misreported, &feri);
    let expect = [
        ("1", &[("a", "1/2"), ("c", "1/2")] as &[(&str, &str)]),
        ("2", &[("a", "1/2"), ("c", "1/2")]),
        ("3", &[("b", "1/2"), ("d", "1/2")]),
        ("4", &[("b", "1/2"), ("d", "1/2")]),
    ];
    let mut forced = true;
    for agent in misreported.agents() {
        for item in misreported.items() {
            let objective = oracles::entry_objective(&feri, agent, item);
            let (lo, hi) =
                oracles::hull_objective_bounds(&feri, &eq, &objective).expect("feasible");
            let want = expect
                .iter()
                .find(|(id, _)| *id == misreported.agent_id(agent))
                .and_then(|(_, cells)| {
                    cells
                        .iter()
                        .find(|(it, _)| *it == misreported.item_id(item))
                        .map(|(_, v)| parse_rat(v).unwrap())
                })
                .unwrap_or_else(Rat::zero);
            forced &= lo == want && hi == want;
        }
    }
    r.expect_true("misreported instance forces the half/half table", forced);

    // Truthful cumulative share at b is forced to 1/3; after the misreport
    // it is 1/2, so the truthful allocation cannot dominate.
    let a3 = truthful.agent_by_id("3").unwrap();
    let ib = truthful.item_by_id("b").unwrap();
    let ucs = truthful.upper_contour(a3, ib);
    let truthful_feri =
        oracles::enumerate_satisfying(&truthful, BaseProperty::Feri, &budget).expect("n = 4");
    let truthful_eq = oracles::sete_equalities(&truthful, &truthful_feri);
    let cum: Vec<Rat> = truthful_feri
        .iter()
        .map(|g| {
            if ucs.contains(g.item_of(a3)) {
                Rat::one()
            } else {
                Rat::zero()
            }
        })
        .collect();
    let (lo, hi) =
        oracles::hull_objective_bounds(&truthful_feri, &truthful_eq, &cum).expect("feasible");
    r.expect_rat("truthful cumulative at ucs(3, b), lower", &lo, "1/3");
    r.expect_rat("truthful cumulative at ucs(3, b), upper", &hi, "1/3");

    let miscum: Vec<Rat> = feri
        .iter()
        .map(|g| {
            if ucs.contains(g.item_of(a3)) {
                Rat::one()
            } else {
                Rat::zero()
            }
        })
        .collect();
    let (lo, hi) = oracles::hull_objective_bounds(&feri, &eq, &miscum).expect("feasible");
    r.expect_rat("misreport cumulative at ucs(3, b), lower", &lo, "1/2");
    r.expect_rat("misreport cumulative at ucs(3, b), upper", &hi, "1/2");
    r.expect_true("truthful 1/3 < misreport 1/2", rat(1, 3) < rat(1, 2));
    r
}

/// The eight-agent misreport: the uniform eating mechanism rewards agent 8
/// for demoting b, with her cumulative share at e jumping from 5/6 to 1.
fn audit_prop_impsdcfr2() -> AuditReport {
    let mut r = AuditReport::new("prop_impsdcfr2");
    let p = prop7_profile();
    let truthful = eating::upre_run(&p);

    let share = |m: &RandomAssignment, agent: &str, item: &str| -> Rat {
        m.share(p.agent_by_id(agent).unwrap(), p.item_by_id(item).unwrap())
            .clone()
    };
    r.expect_rat("truthful (1, a)", &share(&truthful, "1", "a"), "1/2");
    r.expect_rat("truthful (1, b)", &share(&truthful, "1", "b"), "1/2");
    r.expect_rat("truthful (2, h)", &share(&truthful, "2", "h"), "1/2");
    for id in ["3", "4", "5", "6", "7"] {
        r.expect_rat(&format!("truthful ({id}, c)"), &share(&truthful, id, "c"), "1/6");
        r.expect_rat(&format!("truthful ({id}, d)"), &share(&truthful, id, "d"), "1/6");
        r.expect_rat(&format!("truthful ({id}, e)"), &share(&truthful, id, "e"), "1/5");
    }
    r.expect_rat("truthful (8, b)", &share(&truthful, "8", "b"), "1/2");
    r.expect_rat("truthful (8, c)", &share(&truthful, "8", "c"), "1/6");
    r.expect_rat("truthful (8, d)", &share(&truthful, "8", "d"), "1/6");
    r.expect_rat("truthful (8, e)", &share(&truthful, "8", "e"), "0/1");

    let a8 = p.agent_by_id("8").unwrap();
    let deviated_profile = p
        .with_ranking(a8, prop7_misreport_ranking(&p))
        .expect("valid misreport");
    let deviated = eating::upre_run(&deviated_profile);
    for id in ["3", "4", "5", "6", "7", "8"] {
        r.expect_rat(&format!("misreport ({id}, e)"), &share(&deviated, id, "e"), "1/6");
    }
    r.expect_rat("misreport (8, b)", &share(&deviated, "8", "b"), "1/2");

    let ie = p.item_by_id("e").unwrap();
    let before = upper_sum(p.preference(a8), truthful.row(a8), ie);
    let after = upper_sum(p.preference(a8), deviated.row(a8), ie);
    r.expect_rat("cumulative at e, truthful", &before, "5/6");
    r.expect_rat("cumulative at e, misreport", &after, "1/1");
    r.expect_true(
        "misreported allocation strictly dominates",
        sd_dominates(p.preference(a8), deviated.row(a8), truthful.row(a8))
            && deviated.row(a8) != truthful.row(a8),
    );
    r
}

/// The eighteen-agent instance: the uniform eating output realizes the
/// forced table, and every support component in which agent x holds c6
/// breaks the eagerness tiers at tier 4.
fn audit_prop_impefcrsdcfr() -> AuditReport {
    use rayon::prelude::*;

    let mut r = AuditReport::new("prop_impefcrsdcfr");
    let p = prop8_profile();
    let q = eating::upre_run(&p);

    let share = |agent: &str, item: &str| -> Rat {
        q.share(p.agent_by_id(agent).unwrap(), p.item_by_id(item).unwrap())
            .clone()
    };
    for (agent, item, want) in [
        ("1", "a1", "1/3"),
        ("1", "a2", "1/3"),
        ("1", "a3", "1/3"),
        ("3", "a4", "1/3"),
        ("4", "b1", "1/3"),
        ("4", "b3", "1/3"),
        ("6", "b4", "1/3"),
        ("7", "c1", "1/12"),
        ("7", "c4", "1/11"),
        ("7", "c5", "1/11"),
        ("7", "c6", "1/12"),
        ("x", "c1", "1/12"),
        ("x", "a3", "1/3"),
        ("x", "b3", "1/3"),
        ("x", "c6", "1/12"),
        ("x", "c4", "0/1"),
        ("x", "c5", "0/1"),
    ] {
        r.expect_rat(&format!("share ({agent}, {item})"), &share(agent, item), want);
    }
    r.expect_true(
        "output respects eagerness for remaining items",
        properties::is_ea_feri(&p, &q).holds,
    );
    r.expect_true("output treats equals equally", properties::is_sete(&p, &q).holds);

    // Any decomposition must contain a component with x holding c6 (her
    // share of c6 is positive). Enumerate every support-consistent
    // component of that form, covering both tie-break choices in each of
    // the a and b blocks and all placements of c1..c5.
    let agent = |id: &str| p.agent_by_id(id).unwrap();
    let item = |id: &str| p.item_by_id(id).unwrap();
    let c_agents: Vec<Agent> = (7..=17).map(|i| agent(&i.to_string())).collect();
    let c_items: Vec<Item> = ["c1", "c2", "c3", "c4", "c5"].map(item).to_vec();
    let filler_items: Vec<Item> = ["a4", "b4", "d1", "d2", "d3", "d4"].map(item).to_vec();
    let (ic5, ic4, ic6) = (item("c5"), item("c4"), item("c6"));

    let mut blocks: Vec<Vec<Vec<(Agent, Item)>>> = Vec::new();
    for (group, items) in [
        (["1", "2", "3"], ["a1", "a2", "a3"]),
        (["4", "5", "6"], ["b1", "b2", "b3"]),
    ] {
        let mut choices = Vec::new();
        // The third item goes to one of the two identical agents; the
        // first two go to the remaining pair in either order.
        for third in 0..2 {
            let rest: Vec<&str> = (0..3)
                .filter(|&i| i != third)
                .map(|i| group[i])
                .collect();
            for flip in [false, true] {
                let (fst, snd) = if flip { (rest[1], rest[0]) } else { (rest[0], rest[1]) };
                choices.push(vec![
                    (agent(group[third]), item(items[2])),
                    (agent(fst), item(items[0])),
                    (agent(snd), item(items[1])),
                ]);
            }
        }
        blocks.push(choices);
    }

    // Ordered placements of c1..c5 over the eleven block-c agents.
    let placements: Vec<Vec<usize>> = {
        use itertools::Itertools;
        (0..c_agents.len()).permutations(c_items.len()).collect()
    };

    let total = blocks[0].len() * blocks[1].len() * placements.len();
    let all_fail = placements.par_iter().all(|placement| {
        blocks[0].iter().all(|ablock| {
            blocks[1].iter().all(|bblock| {
                let mut item_of: Vec<Option<Item>> = vec![None; p.n()];
                item_of[agent("x").0] = Some(ic6);
                for &(a, o) in ablock.iter().chain(bblock.iter()) {
                    item_of[a.0] = Some(o);
                }
                for (slot, &ai) in placement.iter().enumerate() {
                    item_of[c_agents[ai].0] = Some(c_items[slot]);
                }
                let mut fillers = filler_items.iter();
                for slot in item_of.iter_mut() {
                    if slot.is_none() {
                        *slot = Some(*fillers.next().expect("six fillers"));
                    }
                }
                let component = DeterministicAssignment::new(
                    item_of.into_iter().map(|o| o.expect("complete")).collect(),
                )
                .expect("bijection");
                let (verdict, _) = properties::is_feri(&p, &component);
                match verdict.witness {
                    Some(properties::Witness::TierViolation {
                        item, tier, holder_top, ..
                    }) => item == ic5.0 && tier == 4 && holder_top == ic4.0,
                    _ => false,
                }
            })
        })
    });
    r.check(
        "every component with x holding c6 breaks tier 4 at c5",
        format!("{total} components"),
        all_fail,
    );
    r
}

/// Rank maximality forces agent 6 onto c, so any ex-post rank-maximal
/// matrix strictly dominates agent 3's allocation from agent 3's view.
fn audit_prop_imprkm() -> AuditReport {
    let mut r = AuditReport::new("prop_imprkm");
    let budget = Budget::default();
    let p = fig1_profile();

    let rm = oracles::enumerate_satisfying(&p, BaseProperty::Rm, &budget).expect("n = 6");
    let (a6, ic) = (p.agent_by_id("6").unwrap(), p.item_by_id("c").unwrap());
    r.check("rank-maximal assignments", rm.len(), rm.len() == 6);
    r.expect_true(
        "every rank-maximal assignment gives c to agent 6",
        rm.iter().all(|m| m.item_of(a6) == ic),
    );
    let y = RankSignature::of(&p, &fig1_rm_assignment());
    r.check(
        "winning signature",
        format!("{:?}", y.counts),
        y.counts == vec![3, 1, 1, 1, 0, 0],
    );
    let x = RankSignature::of(&p, &fig1_circled_assignment());
    r.check(
        "dominated signature",
        format!("{:?}", x.counts),
        x.counts == vec![3, 1, 1, 0, 0, 1],
    );
    r.expect_true("winning signature dominates", y.dominates(&x));

    // Any convex combination of the rank-maximal set leaves agent 3 with
    // nothing at c while agent 6 is already fully satisfied there.
    let mut acc = crate::model::MatrixAccumulator::new(p.n());
    let w = rat(1, rm.len() as i64);
    for m in rm.iter() {
        acc.add_assignment(&w, m);
    }
    let mix = acc.finish().expect("convex");
    let a3 = p.agent_by_id("3").unwrap();
    r.expect_rat("mixture share (6, c)", mix.share(a6, ic), "1/1");
    r.expect_rat("mixture share (3, c)", mix.share(a3, ic), "0/1");
    let v = properties::is_sd_wef(&p, &mix);
    r.expect_true("weak envy-freeness fails on the mixture", !v.holds);
    match v.witness {
        Some(properties::Witness::Dominated { dominated, by }) => r.check(
            "dominated pair",
            format!("({}, {})", p.agent_id(Agent(dominated)), p.agent_id(Agent(by))),
            dominated == a3.0 && by == a6.0,
        ),
        _ => r.check("dominated pair", "missing witness", false),
    }
    r
}

/// A serial-dictatorship outcome can serve one first choice where two are
/// possible.
fn audit_prop_rp() -> AuditReport {
    let mut r = AuditReport::new("prop_rp");
    let p = tiny1_profile();
    let order = PriorityOrder::from_ids(&p, &["2", "1", "3"]).expect("valid");
    let a = lottery::rp_run(&p, &order);
    r.check(
        "outcome under priority 2,1,3",
        format!("{a:?}"),
        a == tiny1_pe_not_feri_assignment(),
    );
    let v = properties::is_fcm(&p, &a);
    r.expect_true("first-choice maximality fails", !v.holds);
    match v.witness {
        Some(properties::Witness::MoreFirstChoices { achieved, maximum, .. }) => {
            r.check("first choices served", achieved, achieved == 1);
            r.check("first choices possible", maximum, maximum == 2);
        }
        _ => r.check("witness", "missing", false),
    }
    r
}

/// The probabilistic-serial output necessarily contains the non-maximal
/// outcome of the previous audit in every decomposition.
fn audit_prop_ps() -> AuditReport {
    let mut r = AuditReport::new("prop_ps");
    let p = tiny1_profile();
    let ps = eating::ps_run(&p);
    r.expect_true("output matches the worked table", ps == tiny1_ps_assignment());

    // Support argument: a component giving b to agent 1 must be exactly
    // {1:b, 2:a, 3:c}, and components giving b to agent 1 carry mass 1/4.
    let budget = Budget::default();
    let all = oracles::enumerate_assignments(&p, &budget).expect("n = 3");
    let a1 = p.agent_by_id("1").unwrap();
    let ib = p.item_by_id("b").unwrap();
    let consistent: Vec<&DeterministicAssignment> = all
        .iter()
        .filter(|m| {
            m.iter().all(|(agent, item)| !ps.share(agent, item).is_zero())
                && m.item_of(a1) == ib
        })
        .collect();
    r.check(
        "support components with agent 1 on b",
        consistent.len(),
        consistent.len() == 1 && *consistent[0] == tiny1_pe_not_feri_assignment(),
    );
    r.expect_rat("their total mass", ps.share(a1, ib), "1/4");
    r.expect_true(
        "that component is not first-choice maximal",
        !properties::is_fcm(&p, &tiny1_pe_not_feri_assignment()).holds,
    );
    r
}

/// The probabilistic-rank table on the six-agent instance fails both the
/// ex-ante and the ex-post eagerness conditions.
fn audit_prop_pr() -> AuditReport {
    let mut r = AuditReport::new("prop_pr");
    let budget = Budget::default();
    let p = fig1_profile();
    let table = fig1_fhr_sete_assignment();

    let trace = eating::ea_feri_trace(&p, &table);
    let want: ItemSet = ["d", "e", "f"].iter().map(|i| p.item_by_id(i).unwrap()).collect();
    r.check(
        "second-round residual items",
        format!("{:?}", trace.rounds[1].items),
        trace.rounds[1].items == want,
    );
    let id = p.item_by_id("d").unwrap();
    let active: Vec<Agent> = trace.rounds[1].active_eager(id).iter().collect();
    let a6 = p.agent_by_id("6").unwrap();
    r.check(
        "unsatisfied eager set for d in round 2",
        format!("{active:?}"),
        active == vec![a6],
    );
    let v = properties::is_ea_feri(&p, &table);
    match v.witness {
        Some(properties::Witness::EagerShortfall { agent, item, ref satisfied }) => {
            r.check(
                "eager-residual witness",
                format!("agent {}, item {}, held {}", p.agent_id(Agent(agent)), p.item_id(Item(item)), satisfied),
                agent == a6.0 && item == id.0 && satisfied == "1/4",
            );
        }
        _ => r.check("eager-residual witness", "missing", false),
    }
    let ep = properties::is_ep(&p, &table, BaseProperty::Feri, &budget).expect("n = 6");
    r.expect_true("not a mixture of eagerness-respecting assignments", !ep.holds);
    r.expect_true(
        "but the ex-ante rank condition holds",
        properties::is_ea_fhr(&p, &table).holds,
    );
    r
}

/// The uniform eating output on the six-agent instance: matches the worked
/// table, and fails the ex-post conditions.
fn audit_prop_upre() -> AuditReport {
    let mut r = AuditReport::new("prop_upre");
    let budget = Budget::default();
    let p = fig1_profile();
    let q = eating::upre_run(&p);
    r.expect_true("output matches the worked table", q == fig1_upre_assignment());

    let ep_fhr = properties::is_ep(&p, &q, BaseProperty::Fhr, &budget).expect("n = 6");
    r.expect_true("not ex-post rank-respecting", !ep_fhr.holds);

    let v = properties::is_ea_fhr(&p, &q);
    match v.witness {
        Some(properties::Witness::RankShortfall { holder, other, item, ref satisfied }) => {
            r.check(
                "rank-shortfall witness",
                format!(
                    "agent {} holds {}, agent {} held {}",
                    p.agent_id(Agent(holder)),
                    p.item_id(Item(item)),
                    p.agent_id(Agent(other)),
                    satisfied
                ),
                holder == p.agent_by_id("6").unwrap().0
                    && other == p.agent_by_id("3").unwrap().0
                    && item == p.item_by_id("d").unwrap().0
                    && satisfied == "2/3",
            );
        }
        _ => r.check("rank-shortfall witness", "missing", false),
    }
    r.expect_true(
        "ex-ante eagerness holds",
        properties::is_ea_feri(&p, &q).holds,
    );
    r
}

/// Classic Boston with the identity priority yields the circled assignment,
/// which ignores eagerness; its uniform expectation is the forced table.
fn audit_prop_nbm() -> AuditReport {
    let mut r = AuditReport::new("prop_nbm");
    let budget = Budget::default();
    let p = fig1_profile();
    let order = PriorityOrder::from_ids(&p, &["1", "2", "3", "4", "5", "6"]).expect("valid");
    let a = lottery::bm_run(&p, &order);
    r.expect_true("identity priority yields the circled assignment", a == fig1_circled_assignment());
    let (v, _) = properties::is_feri(&p, &a);
    r.expect_true("that assignment ignores eagerness", !v.holds);

    let mix = lottery::bm_uniform_expectation(&p, &budget).expect("n = 6");
    r.expect_true(
        "uniform expectation equals the forced equal-treatment table",
        mix == fig1_fhr_sete_assignment(),
    );
    r.expect_true("it treats equals equally", properties::is_sete(&p, &mix).holds);
    r.expect_true(
        "weak envy-freeness fails",
        !properties::is_sd_wef(&p, &mix).holds,
    );
    r
}

/// The ten-agent instance where the eager Boston expectation trades x and y
/// in a cycle, so it cannot be sd-efficient.
fn audit_prop_ebm() -> AuditReport {
    let mut r = AuditReport::new("prop_ebm");
    let budget = Budget::default();
    let p = ebm_cycle_profile();
    let e = lottery::ebm_expectation(&p, &budget).expect("within budget");
    r.expect_rat("world probability mass", &e.mass, "1/1");

    let (a7, a10) = (p.agent_by_id("7").unwrap(), p.agent_by_id("10").unwrap());
    let (ix, iy) = (p.item_by_id("x").unwrap(), p.item_by_id("y").unwrap());
    r.expect_true("agent 7 holds shares of y", !e.matrix.share(a7, iy).is_zero());
    r.expect_true("agent 10 holds shares of x", !e.matrix.share(a10, ix).is_zero());

    let v = properties::is_sd_pe(&p, &e.matrix);
    match v.witness {
        Some(properties::Witness::ItemCycle { ref items }) => {
            let names: Vec<&str> = items.iter().map(|&i| p.item_id(Item(i))).collect();
            r.check(
                "trading cycle through x and y",
                names.join(" -> "),
                items.contains(&ix.0) && items.contains(&iy.0),
            );
        }
        _ => r.check("trading cycle", "missing", false),
    }
    r
}

/// Popularity rejects `A*`: a rival assignment wins two votes to one.
fn audit_prop_pop() -> AuditReport {
    let mut r = AuditReport::new("prop_pop");
    let budget = Budget::default();
    let p = fig1_profile();
    let a_star = fig1_feri_assignment();
    let rival = fig1_popular_rival();
    let (in_favor, against) = properties::popularity_margin(&p, &rival, &a_star);
    r.check(
        "rival margin over A*",
        format!("+{in_favor} / -{against}"),
        in_favor == 2 && against == 1,
    );
    let v = properties::is_pop(&p, &a_star, &budget).expect("n = 6");
    r.expect_true("A* is not popular", !v.holds);

    // Every popular assignment on this instance respects the eagerness
    // tiers.
    let all = oracles::enumerate_assignments(&p, &budget).expect("n = 6");
    let mut implication = true;
    for m in all.iter() {
        if properties::is_pop(&p, m, &budget).expect("n = 6").holds {
            implication &= properties::is_feri(&p, m).0.holds;
        }
    }
    r.expect_true("popular implies eagerness-respecting here", implication);
    r
}

// ---------------------------------------------------------------------------
// Corpus export
// ---------------------------------------------------------------------------

/// Files written by [`export_corpus`]: profiles and assignment tables for
/// CLI use.
pub fn export_corpus(dir: &std::path::Path) -> Result<Vec<std::path::PathBuf>> {
    use crate::documents;

    let mut written = Vec::new();
    let mut write = |name: &str, contents: String| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| Error::InvalidDocument(format!("cannot write {}: {e}", path.display())))?;
        written.push(path);
        Ok(())
    };

    let profiles: Vec<(&str, Profile)> = vec![
        ("fig1.json", fig1_profile()),
        ("tiny1.json", tiny1_profile()),
        ("app_b4.json", app_b4_profile()),
        ("app_b4_identical.json", app_b4_identical_profile()),
        ("prop4.json", prop4_profile()),
        ("prop4_misreport.json", prop4_misreport_profile()),
        ("prop7.json", prop7_profile()),
        ("prop8.json", prop8_profile()),
        ("ebm_cycle.json", ebm_cycle_profile()),
    ];
    for (name, p) in &profiles {
        write(name, documents::profile_to_json(p)?)?;
    }

    let fig1 = fig1_profile();
    let tiny1 = tiny1_profile();
    let tables: Vec<(&str, &Profile, RandomAssignment, &str)> = vec![
        ("astar.json", &fig1, fig1_feri_assignment().matrix(), "fig1 A*"),
        (
            "circled.json",
            &fig1,
            fig1_circled_assignment().matrix(),
            "fig1 circled",
        ),
        (
            "prop1_P.json",
            &fig1,
            fig1_fhr_sete_assignment(),
            "fig1 rank-respecting equal-treatment table",
        ),
        ("upre_fig1.json", &fig1, fig1_upre_assignment(), "fig1 uniform eating"),
        ("ps_tiny1.json", &tiny1, tiny1_ps_assignment(), "tiny1 probabilistic serial"),
    ];
    for (name, profile, m, label) in &tables {
        write(
            name,
            documents::assignment_to_json(profile, m, Some(label.to_string()))?,
        )?;
    }
    Ok(written)
}
