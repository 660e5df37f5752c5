use crate::graph::{NodeSet, UndirectedGraph};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Objective {
    /// `f_i(A)`: size of node `i`'s component once `A` is removed, 0 on `A`.
    pub per_node: Vec<usize>,
    /// Largest `f_i` over nodes outside `A`.
    pub max: usize,
}

pub fn exact_objective(g: &UndirectedGraph, a: &NodeSet) -> Objective {
    let mut per_node = vec![0; g.p()];
    for comp in g.components_without(a) {
        for &v in &comp {
            per_node[v] = comp.len();
        }
    }
    let max = per_node.iter().copied().max().unwrap_or(0);
    Objective { per_node, max }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fix_b() -> UndirectedGraph {
        UndirectedGraph::from_edges(4, &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    #[test]
    fn fix_b_values() {
        let g = fix_b();
        let f = |a: &[usize]| exact_objective(&g, &a.iter().copied().collect()).per_node[0] as i64;
        assert_eq!(f(&[]), 4);
        assert_eq!(f(&[1]), 3);
        assert_eq!(f(&[2]), 3);
        assert_eq!(f(&[1, 2]), 1);
        // removing node 2 helps less on its own than after node 3 is gone
        assert_eq!(f(&[1]) - f(&[]), -1);
        assert_eq!(f(&[1, 2]) - f(&[2]), -2);
    }

    #[test]
    fn empty_removal_gives_component_sizes() {
        let g = UndirectedGraph::from_edges(5, &[(0, 1), (2, 3), (3, 4)]).unwrap();
        let o = exact_objective(&g, &NodeSet::new());
        assert_eq!(o.per_node, vec![2, 2, 3, 3, 3]);
        assert_eq!(o.max, 3);
        assert_eq!(exact_objective(&g, &(0..5).collect()).max, 0);
    }
}
