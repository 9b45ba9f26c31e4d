//! The stochastic dominance (sd) relation between probabilistic allocations.

use num_traits::Zero;

use crate::model::{Agent, Item, Profile};
use crate::rational::Rat;

/// Sum of `row`'s shares over the items weakly preferred to `o` in `ranking`.
pub fn upper_sum(ranking: &[Item], row: &[Rat], o: Item) -> Rat {
    let mut sum = Rat::zero();
    for &x in ranking {
        sum += &row[x.0];
        if x == o {
            break;
        }
    }
    sum
}

/// `p` weakly stochastically dominates `q` under `ranking`: every
/// upper-contour cumulative share of `p` is at least `q`'s. Exact rational
/// comparison at every prefix.
pub fn sd_dominates(ranking: &[Item], p: &[Rat], q: &[Rat]) -> bool {
    let mut cp = Rat::zero();
    let mut cq = Rat::zero();
    for &o in ranking {
        cp += &p[o.0];
        cq += &q[o.0];
        if cp < cq {
            return false;
        }
    }
    true
}

/// Convenience wrapper: dominance under agent `a`'s ranking in `profile`.
pub fn sd_dominates_for(profile: &Profile, a: Agent, p: &[Rat], q: &[Rat]) -> bool {
    sd_dominates(profile.preference(a), p, q)
}

/// The items at which `p`'s cumulative share strictly exceeds `q`'s.
pub fn strict_prefixes(ranking: &[Item], p: &[Rat], q: &[Rat]) -> Vec<Item> {
    let mut out = Vec::new();
    let mut cp = Rat::zero();
    let mut cq = Rat::zero();
    for &o in ranking {
        cp += &p[o.0];
        cq += &q[o.0];
        if cp > cq {
            out.push(o);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::rat;

    #[test]
    fn reflexive() {
        let p = fixtures::tiny1_profile();
        let ps = fixtures::tiny1_ps_assignment();
        for a in p.agents() {
            assert!(sd_dominates_for(&p, a, ps.row(a), ps.row(a)));
        }
    }

    #[test]
    fn ps_fixture_rows() {
        // (1/2, 1/4, 1/4) vs (1/2, 0, 1/2) under a > b > c:
        // cumulative 1/2, 3/4, 1 against 1/2, 1/2, 1.
        let p = fixtures::tiny1_profile();
        let ps = fixtures::tiny1_ps_assignment();
        let (a1, a2) = (p.agent_by_id("1").unwrap(), p.agent_by_id("2").unwrap());
        assert!(sd_dominates_for(&p, a1, ps.row(a1), ps.row(a2)));
        assert!(!sd_dominates_for(&p, a1, ps.row(a2), ps.row(a1)));
    }

    #[test]
    fn dominated_row_in_impossibility_table() {
        // Agent 3's allocation dominates agent 6's under agent 6's own
        // ranking, strictly at d and e.
        let p = fixtures::fig1_profile();
        let table = fixtures::fig1_fhr_sete_assignment();
        let (a3, a6) = (p.agent_by_id("3").unwrap(), p.agent_by_id("6").unwrap());
        let ranking = p.preference(a6);
        assert!(sd_dominates(ranking, table.row(a3), table.row(a6)));
        assert_ne!(table.row(a3), table.row(a6));
        let strict = strict_prefixes(ranking, table.row(a3), table.row(a6));
        let d = p.item_by_id("d").unwrap();
        let e = p.item_by_id("e").unwrap();
        assert_eq!(strict, vec![d, e]);
    }

    #[test]
    fn upper_sum_is_prefix_sum() {
        let p = fixtures::fig1_profile();
        let table = fixtures::fig1_fhr_sete_assignment();
        let a6 = p.agent_by_id("6").unwrap();
        let d = p.item_by_id("d").unwrap();
        // ucs(6, d) = {c, a, b, d}: only the 1/4 share of c counts.
        assert_eq!(upper_sum(p.preference(a6), table.row(a6), d), rat(1, 4));
    }
}
