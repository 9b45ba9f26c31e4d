//! Birkhoff–von Neumann decomposition of doubly stochastic matrices.
//!
//! Repeatedly extracts a perfect matching on the bipartite graph of
//! positive-support entries and subtracts the minimum entry along it.
//! Matching search is deterministic (agents and items scanned in ascending
//! index order), so decompositions are reproducible.

use num_traits::Zero;

use crate::model::{Agent, ConvexDecomposition, DeterministicAssignment, Item, RandomAssignment};
use crate::rational::Rat;

/// Decompose `p` into a convex combination of permutation matrices.
///
/// The weighted sum of the result reconstructs `p` exactly and uses at most
/// `(n-1)^2 + 1` terms. Non-doubly-stochastic inputs are unrepresentable:
/// [`RandomAssignment`] validates on construction.
pub fn bvn_decompose(p: &RandomAssignment) -> ConvexDecomposition {
    let n = p.n();
    let mut work: Vec<Vec<Rat>> = (0..n)
        .map(|a| p.row(Agent(a)).to_vec())
        .collect();
    let mut terms: Vec<(Rat, DeterministicAssignment)> = Vec::new();

    loop {
        if work.iter().all(|row| row.iter().all(|e| e.is_zero())) {
            break;
        }
        let matching = perfect_matching(&work).expect(
            "a positive doubly stochastic remainder always contains a perfect matching",
        );
        let coeff = matching
            .iter()
            .enumerate()
            .map(|(a, &o)| work[a][o.0].clone())
            .min()
            .expect("nonempty matching");
        for (a, &o) in matching.iter().enumerate() {
            work[a][o.0] -= &coeff;
        }
        let assignment = DeterministicAssignment::new(matching).expect("matching is a bijection");
        terms.push((coeff, assignment));
    }

    ConvexDecomposition::new(terms).expect("coefficients sum to the total mass of 1")
}

/// Deterministic Kuhn matching over the positive entries of `work`.
/// Returns `item_of` indexed by agent, or `None` if no perfect matching.
fn perfect_matching(work: &[Vec<Rat>]) -> Option<Vec<Item>> {
    let n = work.len();
    // owner[o] = agent currently matched to item o
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for a in 0..n {
        let mut visited = vec![false; n];
        if !augment(work, a, &mut visited, &mut owner) {
            return None;
        }
    }
    let mut item_of = vec![Item(0); n];
    for (o, agent) in owner.iter().enumerate() {
        item_of[agent.expect("perfect matching")] = Item(o);
    }
    Some(item_of)
}

fn augment(
    work: &[Vec<Rat>],
    a: usize,
    visited: &mut [bool],
    owner: &mut [Option<usize>],
) -> bool {
    for o in 0..work.len() {
        if work[a][o].is_zero() || visited[o] {
            continue;
        }
        visited[o] = true;
        if owner[o].is_none() || augment(work, owner[o].unwrap(), visited, owner) {
            owner[o] = Some(a);
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DeterministicAssignment;
    use crate::rational::rat;
    use crate::{fixtures, mechanisms::eating};

    #[test]
    fn permutation_matrix_is_its_own_decomposition() {
        let a = DeterministicAssignment::new(vec![Item(1), Item(2), Item(0)]).unwrap();
        let d = bvn_decompose(&a.matrix());
        assert_eq!(d.len(), 1);
        assert_eq!(d.terms()[0].0, rat(1, 1));
        assert_eq!(d.terms()[0].1, a);
    }

    #[test]
    fn half_half_splits_into_identity_and_swap() {
        let p = RandomAssignment::from_rows(vec![
            vec![rat(1, 2), rat(1, 2)],
            vec![rat(1, 2), rat(1, 2)],
        ])
        .unwrap();
        let d = bvn_decompose(&p);
        assert_eq!(d.len(), 2);
        assert!(d.terms().iter().all(|(c, _)| *c == rat(1, 2)));
        assert!(d.reconstructs(&p));
    }

    #[test]
    fn upre_output_reconstructs_exactly() {
        let profile = fixtures::fig1_profile();
        let p = eating::upre_run(&profile);
        let d = bvn_decompose(&p);
        assert!(d.reconstructs(&p));
        let n = profile.n();
        assert!(d.len() <= (n - 1) * (n - 1) + 1);
    }

    #[test]
    fn decomposition_is_deterministic() {
        let profile = fixtures::fig1_profile();
        let p = eating::upre_run(&profile);
        let d1 = bvn_decompose(&p);
        let d2 = bvn_decompose(&p);
        assert_eq!(d1.terms().len(), d2.terms().len());
        for ((c1, a1), (c2, a2)) in d1.terms().iter().zip(d2.terms()) {
            assert_eq!(c1, c2);
            assert_eq!(a1, a2);
        }
    }
}
