use super::{exact_objective, Method, SeparatorChoice};
use crate::error::{Error, Result};
use crate::graph::{NodeSet, UndirectedGraph};

pub const BRUTE_FORCE_MAX_NODES: usize = 18;

/// Exact minimiser of the largest remaining component over `1 <= |A| <= s`.
/// Ties go to the lexicographically smallest sorted node list.
pub fn brute_force_minmaxc(g: &UndirectedGraph, s: usize) -> Result<SeparatorChoice> {
    let m = g.p();
    if m > BRUTE_FORCE_MAX_NODES {
        return Err(Error::CapExceeded {
            what: "exhaustive separator search",
            limit: BRUTE_FORCE_MAX_NODES,
            got: m,
        });
    }
    if s == 0 || m == 0 {
        return Err(Error::InvalidArgument("need s >= 1 and a nonempty graph".into()));
    }
    let mut best: Option<(usize, Vec<usize>)> = None;
    for mask in 1u32..(1 << m) {
        if mask.count_ones() as usize > s {
            continue;
        }
        let a: Vec<usize> = (0..m).filter(|&v| mask >> v & 1 == 1).collect();
        let obj = exact_objective(g, &a.iter().copied().collect()).max;
        let better = match &best {
            None => true,
            Some((o, b)) => (obj, &a) < (*o, b),
        };
        if better {
            best = Some((obj, a));
        }
    }
    let (obj, a) = best.expect("at least one candidate");
    Ok(SeparatorChoice {
        nodes: a.into_iter().collect::<NodeSet>(),
        objective: obj as f64,
        method: Method::Brute,
        path_mode: None,
    })
}
