//! Brute-force ground truth: exhaustive assignment enumeration, exact
//! convex-hull feasibility, and machine checks of the characterization
//! results.

use itertools::Itertools;
use num_traits::{One, Zero};

use crate::lp::{self, LpOutcome};
use crate::mechanisms::lottery;
use crate::model::{
    Budget, ConvexDecomposition, DeterministicAssignment, Item, Profile, RandomAssignment,
};
use crate::properties::BaseProperty;
use crate::rational::Rat;
use crate::Result;

/// How an assignment set was generated.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum GeneratorTag {
    All,
    Satisfying(BaseProperty),
    AbmImage,
}

/// A set of distinct deterministic assignments over one instance, kept
/// sorted for deterministic iteration and set comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssignmentSet {
    members: Vec<DeterministicAssignment>,
    pub tag: GeneratorTag,
}

impl AssignmentSet {
    fn from_members(mut members: Vec<DeterministicAssignment>, tag: GeneratorTag) -> Self {
        members.sort();
        members.dedup();
        AssignmentSet { members, tag }
    }

    pub fn members(&self) -> &[DeterministicAssignment] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, a: &DeterministicAssignment) -> bool {
        self.members.binary_search(a).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = &DeterministicAssignment> {
        self.members.iter()
    }

    /// Set equality ignoring the generator tag.
    pub fn same_members(&self, other: &AssignmentSet) -> bool {
        self.members == other.members
    }
}

/// All `n!` bijections from agents to items.
pub fn enumerate_assignments(profile: &Profile, budget: &Budget) -> Result<AssignmentSet> {
    let n = profile.n();
    budget.check_enum(n, "assignment enumeration")?;
    let members = (0..n)
        .permutations(n)
        .map(|perm| {
            DeterministicAssignment::new(perm.into_iter().map(Item).collect())
                .expect("permutations are bijections")
        })
        .collect();
    Ok(AssignmentSet::from_members(members, GeneratorTag::All))
}

/// The bijections satisfying `base`.
pub fn enumerate_satisfying(
    profile: &Profile,
    base: BaseProperty,
    budget: &Budget,
) -> Result<AssignmentSet> {
    let all = enumerate_assignments(profile, budget)?;
    let mut members = Vec::new();
    for a in all.iter() {
        if base.check(profile, a, budget)? {
            members.push(a.clone());
        }
    }
    Ok(AssignmentSet::from_members(
        members,
        GeneratorTag::Satisfying(base),
    ))
}

/// The image of the adaptive Boston mechanism over all priority orders.
pub fn abm_image(profile: &Profile, budget: &Budget) -> Result<AssignmentSet> {
    let n = profile.n();
    budget.check_enum(n, "adaptive-Boston image enumeration")?;
    let members = profile
        .agents()
        .permutations(n)
        .map(|perm| {
            let order = crate::model::PriorityOrder::new(perm).expect("permutation");
            lottery::abm_run(profile, &order)
        })
        .collect();
    Ok(AssignmentSet::from_members(members, GeneratorTag::AbmImage))
}

/// The adaptive-Boston image must coincide with the eagerness-respecting
/// assignments, in both directions.
pub fn verify_abm_characterization(profile: &Profile, budget: &Budget) -> Result<bool> {
    let image = abm_image(profile, budget)?;
    let satisfying = enumerate_satisfying(profile, BaseProperty::Feri, budget)?;
    Ok(image.same_members(&satisfying))
}

/// Decide exactly whether `target` is a convex combination of `generators`;
/// on success the witness decomposition reconstructs `target` entrywise.
pub fn exact_feasibility(
    target: &RandomAssignment,
    generators: &AssignmentSet,
) -> Option<ConvexDecomposition> {
    if generators.is_empty() {
        return None;
    }
    let n = target.n();
    let cols = generators.len();

    // One row per matrix entry plus the convexity row.
    let mut a: Vec<Vec<Rat>> = Vec::with_capacity(n * n + 1);
    let mut b: Vec<Rat> = Vec::with_capacity(n * n + 1);
    for agent in 0..n {
        for item in 0..n {
            let row = generators
                .iter()
                .map(|g| {
                    if g.item_of(crate::model::Agent(agent)) == Item(item) {
                        Rat::one()
                    } else {
                        Rat::zero()
                    }
                })
                .collect();
            a.push(row);
            b.push(target.share(crate::model::Agent(agent), Item(item)).clone());
        }
    }
    a.push(vec![Rat::one(); cols]);
    b.push(Rat::one());

    let x = lp::feasible_point(&a, &b)?;
    let terms: Vec<(Rat, DeterministicAssignment)> = x
        .into_iter()
        .zip(generators.iter())
        .filter(|(c, _)| !c.is_zero())
        .map(|(c, g)| (c, g.clone()))
        .collect();
    let decomposition = ConvexDecomposition::new(terms).expect("feasible point is convex");
    debug_assert!(decomposition.reconstructs(target));
    Some(decomposition)
}

/// Exact minimum and maximum of `objective . x` over the polytope
/// `{x >= 0, sum x = 1, extra equalities}` spanned by generator weights.
/// `None` when the polytope is empty.
pub fn hull_objective_bounds(
    generators: &AssignmentSet,
    equalities: &[(Vec<Rat>, Rat)],
    objective: &[Rat],
) -> Option<(Rat, Rat)> {
    let cols = generators.len();
    let mut a: Vec<Vec<Rat>> = vec![vec![Rat::one(); cols]];
    let mut b: Vec<Rat> = vec![Rat::one()];
    for (row, rhs) in equalities {
        a.push(row.clone());
        b.push(rhs.clone());
    }

    let minimize = |c: &[Rat]| -> Option<Rat> {
        match lp::solve(&a, &b, c) {
            LpOutcome::Optimal { value, .. } => Some(value),
            LpOutcome::Infeasible => None,
            LpOutcome::Unbounded => unreachable!("the simplex is bounded"),
        }
    };
    let lo = minimize(objective)?;
    let neg: Vec<Rat> = objective.iter().map(|c| -c.clone()).collect();
    let hi = -minimize(&neg)?;
    Some((lo, hi))
}

/// Equality rows forcing equal treatment of equals over the generators:
/// for every agent pair and every item in their common preference prefix,
/// the two agents' shares coincide.
pub fn sete_equalities(profile: &Profile, generators: &AssignmentSet) -> Vec<(Vec<Rat>, Rat)> {
    let mut rows = Vec::new();
    for j in profile.agents() {
        for k in profile.agents() {
            if k.0 <= j.0 {
                continue;
            }
            for &o in profile.common_prefix(j, k) {
                let row = generators
                    .iter()
                    .map(|g| {
                        let mut c = Rat::zero();
                        if g.item_of(j) == o {
                            c += Rat::one();
                        }
                        if g.item_of(k) == o {
                            c -= Rat::one();
                        }
                        c
                    })
                    .collect();
                rows.push((row, Rat::zero()));
            }
        }
    }
    rows
}

/// Objective vector selecting one matrix entry over the generators.
pub fn entry_objective(
    generators: &AssignmentSet,
    agent: crate::model::Agent,
    item: Item,
) -> Vec<Rat> {
    generators
        .iter()
        .map(|g| {
            if g.item_of(agent) == item {
                Rat::one()
            } else {
                Rat::zero()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::Agent;
    use crate::rational::rat;

    #[test]
    fn enumeration_counts_are_factorials() {
        let budget = Budget::default();
        assert_eq!(
            enumerate_assignments(&Profile::from_indices(&[vec![0]]), &budget)
                .unwrap()
                .len(),
            1
        );
        assert_eq!(
            enumerate_assignments(&fixtures::tiny1_profile(), &budget)
                .unwrap()
                .len(),
            6
        );
        let p4 = Profile::from_indices(&[
            vec![0, 1, 2, 3],
            vec![1, 0, 2, 3],
            vec![2, 3, 0, 1],
            vec![3, 2, 1, 0],
        ]);
        assert_eq!(enumerate_assignments(&p4, &budget).unwrap().len(), 24);
    }

    #[test]
    fn budget_guards_enumeration() {
        let tight = Budget {
            max_enum_agents: 2,
            ..Budget::default()
        };
        assert!(enumerate_assignments(&fixtures::tiny1_profile(), &tight).is_err());
    }

    #[test]
    fn fhr_filter_on_fig1_pins_items_a_and_b() {
        let p = fixtures::fig1_profile();
        let set = enumerate_satisfying(&p, BaseProperty::Fhr, &Budget::default()).unwrap();
        assert_eq!(set.len(), 12);
        let a1 = p.agent_by_id("1").unwrap();
        let a2 = p.agent_by_id("2").unwrap();
        let a = p.item_by_id("a").unwrap();
        let b = p.item_by_id("b").unwrap();
        for m in set.iter() {
            assert_eq!(m.item_of(a1), a);
            assert_eq!(m.item_of(a2), b);
        }
    }

    #[test]
    fn feri_filter_on_fig1_contains_a_star_not_the_circled() {
        let p = fixtures::fig1_profile();
        let set = enumerate_satisfying(&p, BaseProperty::Feri, &Budget::default()).unwrap();
        assert!(set.contains(&fixtures::fig1_feri_assignment()));
        assert!(!set.contains(&fixtures::fig1_circled_assignment()));
    }

    #[test]
    fn identical_rankings_make_every_bijection_pe() {
        let p = Profile::from_indices(&[vec![0, 1, 2], vec![0, 1, 2], vec![0, 1, 2]]);
        let budget = Budget::default();
        let pe = enumerate_satisfying(&p, BaseProperty::Pe, &budget).unwrap();
        assert_eq!(pe.len(), 6);
    }

    #[test]
    fn abm_image_facts() {
        let budget = Budget::default();
        let fig1 = fixtures::fig1_profile();
        let image = abm_image(&fig1, &budget).unwrap();
        let feri = enumerate_satisfying(&fig1, BaseProperty::Feri, &budget).unwrap();
        assert!(image.same_members(&feri));
        assert!(verify_abm_characterization(&fig1, &budget).unwrap());

        let identical = Profile::from_indices(&[vec![0, 1, 2], vec![0, 1, 2], vec![0, 1, 2]]);
        assert_eq!(abm_image(&identical, &budget).unwrap().len(), 6);

        let tiny = fixtures::tiny1_profile();
        let image = abm_image(&tiny, &budget).unwrap();
        assert!(!image.contains(&fixtures::tiny1_pe_not_feri_assignment()));

        let single = Profile::from_indices(&[vec![0]]);
        assert!(verify_abm_characterization(&single, &budget).unwrap());
    }

    #[test]
    fn feasibility_trivial_cases() {
        let p = fixtures::tiny1_profile();
        let budget = Budget::default();
        let all = enumerate_assignments(&p, &budget).unwrap();

        // A generator itself.
        let g0 = all.members()[0].clone();
        let d = exact_feasibility(&g0.matrix(), &all).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.terms()[0].0, rat(1, 1));

        // Midpoint of two generators.
        let g1 = all.members()[1].clone();
        let mut acc = crate::model::MatrixAccumulator::new(3);
        acc.add_assignment(&rat(1, 2), &g0);
        acc.add_assignment(&rat(1, 2), &g1);
        let mid = acc.finish().unwrap();
        let d = exact_feasibility(&mid, &all).unwrap();
        assert!(d.reconstructs(&mid));
    }

    #[test]
    fn upre_hull_membership_on_fig1() {
        // The six-agent uniform-eating table equals the eager Boston
        // expectation there, so it lies inside the eagerness hull; it lies
        // outside the rank-respecting hull because agent 6 holds no f.
        let p = fixtures::fig1_profile();
        let budget = Budget::default();
        let upre = fixtures::fig1_upre_assignment();
        let ebm = crate::mechanisms::lottery::ebm_expectation(&p, &budget)
            .unwrap()
            .matrix;
        assert_eq!(upre, ebm);

        let feri = enumerate_satisfying(&p, BaseProperty::Feri, &budget).unwrap();
        let inside = exact_feasibility(&upre, &feri).expect("inside the eagerness hull");
        assert!(inside.reconstructs(&upre));
        assert!(inside.terms().iter().all(|(_, a)| feri.contains(a)));

        let fhr = enumerate_satisfying(&p, BaseProperty::Fhr, &budget).unwrap();
        assert!(exact_feasibility(&upre, &fhr).is_none());
    }

    /// Independent feasibility oracle: Caratheodory subsets plus rational
    /// Gaussian elimination, no simplex involved.
    fn feasibility_by_subsets(
        target: &RandomAssignment,
        generators: &AssignmentSet,
    ) -> bool {
        use num_traits::Signed;
        let n = target.n();
        let dim_bound = (n - 1) * (n - 1) + 1;
        let members = generators.members();
        let k = members.len();
        let mut chosen: Vec<usize> = Vec::new();

        fn subsets(
            start: usize,
            k: usize,
            max: usize,
            chosen: &mut Vec<usize>,
            test: &mut dyn FnMut(&[usize]) -> bool,
        ) -> bool {
            if !chosen.is_empty() && test(chosen) {
                return true;
            }
            if chosen.len() == max {
                return false;
            }
            for i in start..k {
                chosen.push(i);
                if subsets(i + 1, k, max, chosen, test) {
                    return true;
                }
                chosen.pop();
            }
            false
        }

        let mut test = |subset: &[usize]| -> bool {
            // Solve sum_i alpha_i * G_i = target, sum alpha = 1 exactly.
            let rows = n * n + 1;
            let cols = subset.len();
            let mut m: Vec<Vec<Rat>> = Vec::with_capacity(rows);
            for agent in 0..n {
                for item in 0..n {
                    let mut row: Vec<Rat> = subset
                        .iter()
                        .map(|&gi| {
                            if members[gi].item_of(Agent(agent)) == Item(item) {
                                Rat::one()
                            } else {
                                Rat::zero()
                            }
                        })
                        .collect();
                    row.push(target.share(Agent(agent), Item(item)).clone());
                    m.push(row);
                }
            }
            let mut last = vec![Rat::one(); cols];
            last.push(Rat::one());
            m.push(last);

            // Gaussian elimination to reduced row echelon form.
            let mut pivot_row = 0;
            let mut pivots: Vec<(usize, usize)> = Vec::new();
            for col in 0..cols {
                let Some(r) = (pivot_row..rows).find(|&r| !m[r][col].is_zero()) else {
                    continue;
                };
                m.swap(pivot_row, r);
                let inv = m[pivot_row][col].recip();
                for e in m[pivot_row].iter_mut() {
                    *e *= &inv;
                }
                for r2 in 0..rows {
                    if r2 != pivot_row && !m[r2][col].is_zero() {
                        let f = m[r2][col].clone();
                        for c2 in 0..=cols {
                            let delta = &f * &m[pivot_row][c2];
                            m[r2][c2] -= delta;
                        }
                    }
                }
                pivots.push((pivot_row, col));
                pivot_row += 1;
            }
            // Inconsistent system?
            for r in pivot_row..rows {
                if !m[r][cols].is_zero() {
                    return false;
                }
            }
            // Underdetermined subsets are skipped; a free variable means a
            // smaller subset also works and will be tried.
            if pivots.len() < cols {
                return false;
            }
            let mut alpha = vec![Rat::zero(); cols];
            for (r, c) in pivots {
                alpha[c] = m[r][cols].clone();
            }
            alpha.iter().all(|a| !a.is_negative())
        };

        subsets(0, k, dim_bound, &mut chosen, &mut test)
    }

    #[test]
    fn feasibility_agrees_with_the_subset_oracle_at_n3() {
        let budget = Budget::default();
        // Every profile over three agents, a deterministic sample of
        // targets: the PS output, the RP expectation, and a vertex.
        let mut profiles: Vec<Profile> = Vec::new();
        let perms: Vec<Vec<usize>> = (0..3).permutations(3).collect();
        for r1 in &perms {
            for r2 in &perms {
                for r3 in &perms {
                    profiles.push(Profile::from_indices(&[r1.clone(), r2.clone(), r3.clone()]));
                }
            }
        }
        assert_eq!(profiles.len(), 216);
        for profile in profiles.iter().step_by(9) {
            let feri = enumerate_satisfying(profile, BaseProperty::Feri, &budget).unwrap();
            for target in [
                crate::mechanisms::eating::ps_run(profile),
                crate::mechanisms::lottery::rp_expectation(profile, &budget).unwrap(),
                feri.members()[0].matrix(),
            ] {
                let simplex = exact_feasibility(&target, &feri).is_some();
                let subsets = feasibility_by_subsets(&target, &feri);
                assert_eq!(simplex, subsets, "disagreement on {profile:?}");
            }
        }
    }
}
