//! Domain types: preference profiles, assignments, priorities, and the
//! ranking queries everything else is built from.
//!
//! Agent and item ids are opaque strings; internally both are dense indices
//! in input order. Subsets of agents/items are bitmasks, which caps instance
//! size at 128 — far beyond anything the enumeration oracles can touch.

use std::fmt;

use num_traits::{One, Zero};

use crate::rational::Rat;
use crate::{Error, Result};

/// Hard cap on instance size imposed by the bitmask set types.
pub const MAX_SIZE: usize = 128;

/// Dense agent index, assigned by input order.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Agent(pub usize);

/// Dense item index, assigned by input order.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Item(pub usize);

impl fmt::Debug for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A{}", self.0)
    }
}

impl fmt::Debug for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I{}", self.0)
    }
}

macro_rules! bitset {
    ($Set:ident, $Elem:ident) => {
        /// Bitmask set over dense indices.
        #[derive(Copy, Clone, PartialEq, Eq, Hash, Default)]
        pub struct $Set(u128);

        impl $Set {
            pub fn empty() -> Self {
                Self(0)
            }

            /// The full set `{0, .., n-1}`.
            pub fn full(n: usize) -> Self {
                debug_assert!(n <= MAX_SIZE);
                if n == MAX_SIZE {
                    Self(u128::MAX)
                } else {
                    Self((1u128 << n) - 1)
                }
            }

            pub fn contains(&self, e: $Elem) -> bool {
                self.0 >> e.0 & 1 == 1
            }

            pub fn insert(&mut self, e: $Elem) {
                self.0 |= 1 << e.0;
            }

            pub fn remove(&mut self, e: $Elem) {
                self.0 &= !(1 << e.0);
            }

            pub fn len(&self) -> usize {
                self.0.count_ones() as usize
            }

            pub fn is_empty(&self) -> bool {
                self.0 == 0
            }

            pub fn union(&self, other: Self) -> Self {
                Self(self.0 | other.0)
            }

            pub fn intersection(&self, other: Self) -> Self {
                Self(self.0 & other.0)
            }

            pub fn difference(&self, other: Self) -> Self {
                Self(self.0 & !other.0)
            }

            pub fn is_subset(&self, other: Self) -> bool {
                self.0 & !other.0 == 0
            }

            /// Ascending index order.
            pub fn iter(&self) -> impl Iterator<Item = $Elem> + '_ {
                let mut bits = self.0;
                std::iter::from_fn(move || {
                    if bits == 0 {
                        None
                    } else {
                        let i = bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        Some($Elem(i))
                    }
                })
            }
        }

        impl FromIterator<$Elem> for $Set {
            fn from_iter<I: IntoIterator<Item = $Elem>>(iter: I) -> Self {
                let mut s = Self::empty();
                for e in iter {
                    s.insert(e);
                }
                s
            }
        }

        impl fmt::Debug for $Set {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.debug_set().entries(self.iter()).finish()
            }
        }
    };
}

bitset!(AgentSet, Agent);
bitset!(ItemSet, Item);

/// A preference profile: `n` agents, `n` items, and one strict total order
/// over all items per agent.
#[derive(Clone, PartialEq, Eq)]
pub struct Profile {
    agent_ids: Vec<String>,
    item_ids: Vec<String>,
    /// Per agent, items from best to worst.
    prefs: Vec<Vec<Item>>,
    /// Per agent, 1-based rank of each item (indexed by `Item.0`).
    ranks: Vec<Vec<usize>>,
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Profile({} agents)", self.n())?;
        for a in self.agents() {
            let order: Vec<&str> = self.preference(a).iter().map(|&o| self.item_id(o)).collect();
            writeln!(f, "  {}: {}", self.agent_id(a), order.join(" > "))?;
        }
        Ok(())
    }
}

impl Profile {
    /// Build a profile from opaque ids. `rankings[i]` is agent `i`'s strict
    /// order over all item ids, best first.
    pub fn new(
        agent_ids: Vec<String>,
        item_ids: Vec<String>,
        rankings: Vec<Vec<String>>,
    ) -> Result<Self> {
        let n = agent_ids.len();
        if n == 0 {
            return Err(Error::InvalidProfile("no agents".into()));
        }
        if n > MAX_SIZE {
            return Err(Error::InvalidProfile(format!(
                "{n} agents exceeds the supported maximum of {MAX_SIZE}"
            )));
        }
        if item_ids.len() != n {
            return Err(Error::InvalidProfile(format!(
                "{} agents but {} items",
                n,
                item_ids.len()
            )));
        }
        if rankings.len() != n {
            return Err(Error::InvalidProfile(format!(
                "{} agents but {} rankings",
                n,
                rankings.len()
            )));
        }
        for ids in [&agent_ids, &item_ids] {
            let mut sorted: Vec<&String> = ids.iter().collect();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != n {
                return Err(Error::InvalidProfile("duplicate id".into()));
            }
        }

        let item_index = |id: &str| -> Result<Item> {
            item_ids
                .iter()
                .position(|x| x == id)
                .map(Item)
                .ok_or_else(|| Error::UnknownItem(id.to_string()))
        };

        let mut prefs = Vec::with_capacity(n);
        let mut ranks = Vec::with_capacity(n);
        for ranking in &rankings {
            if ranking.len() != n {
                return Err(Error::InvalidProfile(
                    "ranking does not cover all items".into(),
                ));
            }
            let mut order = Vec::with_capacity(n);
            let mut rank = vec![0usize; n];
            for (pos, id) in ranking.iter().enumerate() {
                let item = item_index(id)?;
                if rank[item.0] != 0 {
                    return Err(Error::InvalidProfile(format!(
                        "item `{id}` appears twice in a ranking"
                    )));
                }
                rank[item.0] = pos + 1;
                order.push(item);
            }
            prefs.push(order);
            ranks.push(rank);
        }

        Ok(Profile {
            agent_ids,
            item_ids,
            prefs,
            ranks,
        })
    }

    /// Test/fixture helper: agents named `"1".."n"`, items `"a","b",..`,
    /// rankings given as item indices.
    pub fn from_indices(rankings: &[Vec<usize>]) -> Self {
        let n = rankings.len();
        assert!(n <= 26, "index helper only supports single-letter items");
        let agent_ids: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
        let item_ids: Vec<String> = (0..n)
            .map(|i| ((b'a' + i as u8) as char).to_string())
            .collect();
        let rankings = rankings
            .iter()
            .map(|r| r.iter().map(|&i| item_ids[i].clone()).collect())
            .collect();
        Profile::new(agent_ids, item_ids, rankings).expect("valid index profile")
    }

    pub fn n(&self) -> usize {
        self.agent_ids.len()
    }

    pub fn agents(&self) -> impl Iterator<Item = Agent> {
        (0..self.n()).map(Agent)
    }

    pub fn items(&self) -> impl Iterator<Item = Item> {
        (0..self.n()).map(Item)
    }

    pub fn all_items(&self) -> ItemSet {
        ItemSet::full(self.n())
    }

    pub fn all_agents(&self) -> AgentSet {
        AgentSet::full(self.n())
    }

    pub fn agent_id(&self, a: Agent) -> &str {
        &self.agent_ids[a.0]
    }

    pub fn item_id(&self, o: Item) -> &str {
        &self.item_ids[o.0]
    }

    pub fn agent_by_id(&self, id: &str) -> Result<Agent> {
        self.agent_ids
            .iter()
            .position(|x| x == id)
            .map(Agent)
            .ok_or_else(|| Error::UnknownAgent(id.to_string()))
    }

    pub fn item_by_id(&self, id: &str) -> Result<Item> {
        self.item_ids
            .iter()
            .position(|x| x == id)
            .map(Item)
            .ok_or_else(|| Error::UnknownItem(id.to_string()))
    }

    /// Agent `a`'s strict order over all items, best first.
    pub fn preference(&self, a: Agent) -> &[Item] {
        &self.prefs[a.0]
    }

    /// 1-based position of `o` in agent `a`'s ranking.
    pub fn rank_of(&self, a: Agent, o: Item) -> usize {
        self.ranks[a.0][o.0]
    }

    /// Agent `a`'s single best item.
    pub fn top(&self, a: Agent) -> Item {
        self.prefs[a.0][0]
    }

    /// The item agent `a` ranks highest within `subset`.
    pub fn top_among(&self, a: Agent, subset: ItemSet) -> Result<Item> {
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        self.prefs[a.0]
            .iter()
            .copied()
            .find(|&o| subset.contains(o))
            .ok_or(Error::EmptySubset)
    }

    /// Items agent `a` weakly prefers to `o` (including `o` itself).
    pub fn upper_contour(&self, a: Agent, o: Item) -> ItemSet {
        let r = self.rank_of(a, o);
        self.prefs[a.0][..r].iter().copied().collect()
    }

    /// Longest initial segment on which the two rankings coincide
    /// position-by-position. Empty when the top items differ; the full
    /// ranking when they are identical.
    pub fn common_prefix(&self, j: Agent, k: Agent) -> &[Item] {
        let (pj, pk) = (&self.prefs[j.0], &self.prefs[k.0]);
        let len = pj.iter().zip(pk).take_while(|(a, b)| a == b).count();
        &pj[..len]
    }

    /// Replace one agent's ranking, keeping everyone else's. Used by the
    /// misreport machinery.
    pub fn with_ranking(&self, a: Agent, ranking: Vec<Item>) -> Result<Profile> {
        let n = self.n();
        if ranking.len() != n {
            return Err(Error::MismatchedItems);
        }
        let mut rank = vec![0usize; n];
        for (pos, item) in ranking.iter().enumerate() {
            if item.0 >= n || rank[item.0] != 0 {
                return Err(Error::MismatchedItems);
            }
            rank[item.0] = pos + 1;
        }
        let mut out = self.clone();
        out.prefs[a.0] = ranking;
        out.ranks[a.0] = rank;
        Ok(out)
    }
}

/// A bijection from agents to items.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeterministicAssignment {
    item_of: Vec<Item>,
}

impl fmt::Debug for DeterministicAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.item_of.iter().enumerate())
            .finish()
    }
}

impl DeterministicAssignment {
    pub fn new(item_of: Vec<Item>) -> Result<Self> {
        let n = item_of.len();
        let mut seen = vec![false; n];
        for &o in &item_of {
            if o.0 >= n || seen[o.0] {
                return Err(Error::NotBijective);
            }
            seen[o.0] = true;
        }
        Ok(DeterministicAssignment { item_of })
    }

    /// Id-based constructor; every agent must appear exactly once.
    pub fn from_pairs(profile: &Profile, pairs: &[(&str, &str)]) -> Result<Self> {
        if pairs.len() != profile.n() {
            return Err(Error::NotBijective);
        }
        let mut item_of = vec![None; profile.n()];
        for (agent, item) in pairs {
            let a = profile.agent_by_id(agent)?;
            let o = profile.item_by_id(item)?;
            if item_of[a.0].replace(o).is_some() {
                return Err(Error::NotBijective);
            }
        }
        DeterministicAssignment::new(item_of.into_iter().map(|o| o.unwrap()).collect())
    }

    pub fn n(&self) -> usize {
        self.item_of.len()
    }

    pub fn item_of(&self, a: Agent) -> Item {
        self.item_of[a.0]
    }

    pub fn agent_of(&self, o: Item) -> Agent {
        Agent(
            self.item_of
                .iter()
                .position(|&x| x == o)
                .expect("bijection"),
        )
    }

    pub fn iter(&self) -> impl Iterator<Item = (Agent, Item)> + '_ {
        self.item_of.iter().enumerate().map(|(a, &o)| (Agent(a), o))
    }

    /// The equivalent 0/1 doubly stochastic matrix.
    pub fn matrix(&self) -> RandomAssignment {
        let n = self.n();
        let mut entries = vec![Rat::zero(); n * n];
        for (a, o) in self.iter() {
            entries[a.0 * n + o.0] = Rat::one();
        }
        RandomAssignment { n, entries }
    }
}

/// An `n x n` doubly stochastic matrix of exact rationals: row `j` is agent
/// `j`'s probabilistic allocation.
#[derive(Clone, PartialEq, Eq)]
pub struct RandomAssignment {
    n: usize,
    /// Row-major; `entries[a * n + o]`.
    entries: Vec<Rat>,
}

impl fmt::Debug for RandomAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RandomAssignment({}x{})", self.n, self.n)?;
        for a in 0..self.n {
            let row: Vec<String> = self.row(Agent(a)).iter().map(|r| r.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl RandomAssignment {
    /// Validate and wrap a full matrix: entries nonnegative, every row and
    /// every column summing to exactly one.
    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::NotDoublyStochastic("matrix is not square".into()));
        }
        let entries: Vec<Rat> = rows.into_iter().flatten().collect();
        let out = RandomAssignment { n, entries };
        out.validate()?;
        Ok(out)
    }

    fn validate(&self) -> Result<()> {
        use num_traits::Signed;
        let n = self.n;
        for e in &self.entries {
            if e.is_negative() {
                return Err(Error::NotDoublyStochastic("negative entry".into()));
            }
        }
        for a in 0..n {
            let sum: Rat = self.entries[a * n..(a + 1) * n].iter().sum();
            if !sum.is_one() {
                return Err(Error::NotDoublyStochastic(format!(
                    "row {a} sums to {sum}, not 1"
                )));
            }
        }
        for o in 0..n {
            let sum: Rat = (0..n).map(|a| self.entries[a * n + o].clone()).sum();
            if !sum.is_one() {
                return Err(Error::NotDoublyStochastic(format!(
                    "column {o} sums to {sum}, not 1"
                )));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn share(&self, a: Agent, o: Item) -> &Rat {
        &self.entries[a.0 * self.n + o.0]
    }

    pub fn row(&self, a: Agent) -> &[Rat] {
        &self.entries[a.0 * self.n..(a.0 + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = (Agent, &[Rat])> {
        (0..self.n).map(move |a| (Agent(a), self.row(Agent(a))))
    }

    /// `Some` iff every entry is 0 or 1.
    pub fn as_deterministic(&self) -> Option<DeterministicAssignment> {
        let mut item_of = Vec::with_capacity(self.n);
        for a in 0..self.n {
            let row = self.row(Agent(a));
            let o = row.iter().position(|e| e.is_one())?;
            if row.iter().any(|e| !e.is_zero() && !e.is_one()) {
                return None;
            }
            item_of.push(Item(o));
        }
        DeterministicAssignment::new(item_of).ok()
    }
}

/// Accumulates exact convex combinations of assignments; finalizes into a
/// validated [`RandomAssignment`].
#[derive(Clone)]
pub struct MatrixAccumulator {
    n: usize,
    entries: Vec<Rat>,
}

impl MatrixAccumulator {
    pub fn new(n: usize) -> Self {
        MatrixAccumulator {
            n,
            entries: vec![Rat::zero(); n * n],
        }
    }

    pub fn add(&mut self, a: Agent, o: Item, amount: &Rat) {
        self.entries[a.0 * self.n + o.0] += amount;
    }

    pub fn add_assignment(&mut self, weight: &Rat, assignment: &DeterministicAssignment) {
        for (a, o) in assignment.iter() {
            self.add(a, o, weight);
        }
    }

    pub fn finish(self) -> Result<RandomAssignment> {
        let out = RandomAssignment {
            n: self.n,
            entries: self.entries,
        };
        out.validate()?;
        Ok(out)
    }
}

/// A strict total order over agents, highest priority first.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PriorityOrder {
    order: Vec<Agent>,
}

impl PriorityOrder {
    pub fn new(order: Vec<Agent>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &a in &order {
            if a.0 >= n || seen[a.0] {
                return Err(Error::InvalidPriority(
                    "priority must be a permutation of all agents".into(),
                ));
            }
            seen[a.0] = true;
        }
        Ok(PriorityOrder { order })
    }

    pub fn from_ids(profile: &Profile, ids: &[&str]) -> Result<Self> {
        if ids.len() != profile.n() {
            return Err(Error::InvalidPriority(format!(
                "priority names {} agents, profile has {}",
                ids.len(),
                profile.n()
            )));
        }
        let order = ids
            .iter()
            .map(|id| profile.agent_by_id(id))
            .collect::<Result<Vec<_>>>()?;
        PriorityOrder::new(order)
    }

    pub fn agents(&self) -> &[Agent] {
        &self.order
    }

    /// 0-based priority position; lower is higher priority.
    pub fn position(&self, a: Agent) -> usize {
        self.order.iter().position(|&x| x == a).expect("permutation")
    }

    /// The highest-priority member of `set`.
    pub fn first_of(&self, set: AgentSet) -> Option<Agent> {
        self.order.iter().copied().find(|&a| set.contains(a))
    }
}

/// A probability distribution over priority orders.
#[derive(Clone, Debug)]
pub struct PriorityDistribution {
    weights: Vec<(PriorityOrder, Rat)>,
}

impl PriorityDistribution {
    /// Weights must be nonnegative and sum to exactly one; zero-weight
    /// entries are dropped.
    pub fn new(weights: Vec<(PriorityOrder, Rat)>) -> Result<Self> {
        use num_traits::Signed;
        let mut sum = Rat::zero();
        for (_, w) in &weights {
            if w.is_negative() {
                return Err(Error::InvalidPriority("negative priority weight".into()));
            }
            sum += w;
        }
        if !sum.is_one() {
            return Err(Error::InvalidPriority(format!(
                "priority weights sum to {sum}, not 1"
            )));
        }
        let weights = weights.into_iter().filter(|(_, w)| !w.is_zero()).collect();
        Ok(PriorityDistribution { weights })
    }

    pub fn point_mass(order: PriorityOrder) -> Self {
        PriorityDistribution {
            weights: vec![(order, Rat::one())],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &(PriorityOrder, Rat)> {
        self.weights.iter()
    }
}

/// A convex combination of deterministic assignments.
#[derive(Clone, Debug)]
pub struct ConvexDecomposition {
    terms: Vec<(Rat, DeterministicAssignment)>,
}

impl ConvexDecomposition {
    /// Coefficients must be strictly positive and sum to exactly one.
    pub fn new(terms: Vec<(Rat, DeterministicAssignment)>) -> Result<Self> {
        use num_traits::Signed;
        if terms.is_empty() {
            return Err(Error::InvalidDecomposition("no terms".into()));
        }
        let mut sum = Rat::zero();
        for (c, _) in &terms {
            if !c.is_positive() {
                return Err(Error::InvalidDecomposition(
                    "coefficients must be positive".into(),
                ));
            }
            sum += c;
        }
        if !sum.is_one() {
            return Err(Error::InvalidDecomposition(format!(
                "coefficients sum to {sum}, not 1"
            )));
        }
        Ok(ConvexDecomposition { terms })
    }

    pub fn terms(&self) -> &[(Rat, DeterministicAssignment)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Re-sum the weighted assignments into a matrix.
    pub fn reconstruct(&self) -> RandomAssignment {
        let n = self.terms[0].1.n();
        let mut acc = MatrixAccumulator::new(n);
        for (c, a) in &self.terms {
            acc.add_assignment(c, a);
        }
        acc.finish().expect("convex combination is doubly stochastic")
    }

    /// Exact entrywise equality between the reconstruction and `target`.
    pub fn reconstructs(&self, target: &RandomAssignment) -> bool {
        self.reconstruct() == *target
    }
}

/// Caps on the enumeration-based operations. Exceeding a cap is a
/// [`Error::BudgetExceeded`], never silent truncation.
#[derive(Clone, Debug)]
pub struct Budget {
    /// Maximum number of lottery branches explored by world enumeration.
    pub max_worlds: u64,
    /// Maximum `n` for which `n!`-style enumeration is attempted.
    pub max_enum_agents: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_worlds: 10_000_000,
            max_enum_agents: 8,
        }
    }
}

impl Budget {
    pub fn check_enum(&self, n: usize, what: &'static str) -> Result<()> {
        if n > self.max_enum_agents {
            return Err(Error::BudgetExceeded {
                what,
                bound: self.max_enum_agents as u64,
            });
        }
        Ok(())
    }
}
