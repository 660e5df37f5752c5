use crate::equivalence::{orient_cut, skeleton_with_vstructures, BeliefState};
use crate::graph::{meek::meek_in_place, NodeSet, Pdag};
use crate::scm::{interventional_mean, observational_mean, MeanVector, ProblemInstance, ShiftIntervention};

/// The experimenter's view of a hidden instance. Strategies see the desired
/// mean, the means they measure, and the essential graph implied by what
/// they performed; the model itself stays private.
pub struct Environment {
    instance: ProblemInstance,
    essential: Pdag,
    performed: Vec<NodeSet>,
    partial: ShiftIntervention,
    baseline: MeanVector,
    observational: MeanVector,
    experiments: usize,
}

impl Environment {
    pub fn new(instance: ProblemInstance) -> Self {
        let mut essential = skeleton_with_vstructures(instance.scm.dag());
        meek_in_place(&mut essential);
        let observational = observational_mean(&instance.scm);
        Environment {
            essential,
            performed: vec![NodeSet::new()],
            partial: ShiftIntervention::new(),
            baseline: observational.clone(),
            observational,
            experiments: 0,
            instance,
        }
    }

    pub fn p(&self) -> usize {
        self.instance.p()
    }

    pub fn q_mean(&self) -> &[f64] {
        &self.instance.q_mean
    }

    pub fn observational_mean(&self) -> &[f64] {
        &self.observational
    }

    /// Mean under the partial matching intervention performed last.
    pub fn baseline_mean(&self) -> &[f64] {
        &self.baseline
    }

    pub fn partial_matching(&self) -> &ShiftIntervention {
        &self.partial
    }

    pub fn essential(&self) -> &Pdag {
        &self.essential
    }

    /// Target sets whose orientations are known, starting with the empty
    /// observational one.
    pub fn performed(&self) -> &[NodeSet] {
        &self.performed
    }

    pub fn experiments(&self) -> usize {
        self.experiments
    }

    fn learn(&mut self, set: NodeSet) {
        let dag = self.instance.scm.dag();
        let sources = dag.sources_of(&set);
        orient_cut(&mut self.essential, dag, &set);
        orient_cut(&mut self.essential, dag, &sources);
        meek_in_place(&mut self.essential);
        self.performed.push(set);
    }

    fn run(&mut self, shift: &ShiftIntervention) -> MeanVector {
        self.experiments += 1;
        interventional_mean(&self.instance.scm, shift)
    }

    /// Performs the partial matching plus `+value` on `explore`. Both the
    /// combined target set and `explore` alone are learned from: the latter
    /// is a shift relative to the current baseline, which is itself a valid
    /// model over the same graph.
    pub fn perform_explore(&mut self, explore: &NodeSet, value: f64) -> MeanVector {
        let mut shift = self.partial.clone();
        for &v in explore {
            shift.add(v, value);
        }
        let mean = self.run(&shift);
        let union: NodeSet = self.partial.targets().union(explore).copied().collect();
        self.learn(union);
        if !self.partial.is_empty() {
            self.learn(explore.clone());
        }
        mean
    }

    /// Replaces the partial matching intervention and performs it.
    pub fn perform_matching(&mut self, partial: ShiftIntervention) -> MeanVector {
        let mean = self.run(&partial);
        self.learn(partial.targets());
        self.partial = partial;
        self.baseline = mean.clone();
        mean
    }

    pub fn belief(&self) -> BeliefState {
        BeliefState {
            essential: self.essential.clone(),
            performed: self.performed.clone(),
            partial_matching: self.partial.clone(),
            baseline_mean: self.baseline.clone(),
            q_mean: self.instance.q_mean.clone(),
        }
    }
}
