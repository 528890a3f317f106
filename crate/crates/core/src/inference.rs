//! Belief updating, expected free energy, and precision-weighted policy
//! posteriors over a [`CandidateSpace`].
//!
//! Expected free energy of a policy is accumulated over its predicted
//! trajectory: at every step the belief is rolled forward through each
//! possible observation, weighted by its predictive probability. The
//! epistemic term is expected information gain (bits), the pragmatic term
//! the expected log-preference, and
//!
//! ```text
//! total = -w_e * epistemic - w_p * pragmatic
//! ```
//!
//! so lower totals are better and `policy_posterior` is a softmax over
//! `-gamma * total`.

use std::sync::Arc;

use thiserror::Error;

use crate::categorical::{shannon_entropy, Categorical, CategoricalError};
use crate::environment::Action;
use crate::model::{CandidateSpace, ReadingEvidenceModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InferenceError {
    #[error("observation has zero probability under the current belief")]
    Contradiction,
    #[error("likelihood vector has {got} entries for {expected} options")]
    LikelihoodLength { expected: usize, got: usize },
    #[error("likelihood entry {0} is negative or not finite")]
    BadLikelihood(usize),
    #[error("policy is empty")]
    EmptyPolicy,
    #[error(transparent)]
    Categorical(#[from] CategoricalError),
}

/// The agent's generative model: candidate orderings plus the reading
/// channel. Placement feedback is deterministic and needs no parameters.
#[derive(Debug, Clone)]
pub struct GenerativeModel {
    pub space: Arc<CandidateSpace>,
    pub evidence: ReadingEvidenceModel,
}

impl GenerativeModel {
    pub fn new(space: Arc<CandidateSpace>, evidence: ReadingEvidenceModel) -> Self {
        Self { space, evidence }
    }

    pub fn orderings(&self) -> usize {
        self.space.len()
    }

    /// One likelihood row over orderings per possible observation of
    /// `action`.
    ///
    /// Reading yields one of the ordering cues. Typing yields whether the
    /// placement fits the ordering being produced. Everything else has a
    /// single uninformative outcome.
    pub fn outcome_rows(&self, action: &Action) -> Vec<Vec<f64>> {
        let n = self.orderings();
        match *action {
            Action::FixateSource(chunk) => (0..n)
                .map(|cue| self.evidence.cue_likelihoods(chunk, cue))
                .collect(),
            Action::TypeChunk { chunk, slot } => {
                let fits: Vec<f64> = self
                    .space
                    .orderings()
                    .iter()
                    .map(|o| if o.places(chunk, slot) { 1.0 } else { 0.0 })
                    .collect();
                let misfits = fits.iter().map(|f| 1.0 - f).collect();
                vec![fits, misfits]
            }
            _ => vec![vec![1.0; n]],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfeWeights {
    pub epistemic: f64,
    pub pragmatic: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EFEDecomposition {
    pub epistemic: f64,
    pub pragmatic: f64,
    pub total: f64,
    pub weights: EfeWeights,
}

impl EFEDecomposition {
    pub fn new(epistemic: f64, pragmatic: f64, weights: EfeWeights) -> Self {
        Self {
            epistemic,
            pragmatic,
            total: -weights.epistemic * epistemic - weights.pragmatic * pragmatic,
            weights,
        }
    }
}

/// Cost (as a positive number subtracted from pragmatic value) of the
/// actions that do not advance the target text.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionCosts {
    pub read: f64,
    pub pause: f64,
    pub look: f64,
    pub delete: f64,
    pub consult: f64,
}

impl Default for ActionCosts {
    fn default() -> Self {
        Self {
            read: 0.05,
            pause: 0.2,
            look: 0.05,
            delete: 0.1,
            consult: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceVector {
    /// Log preference over completed orderings, spread evenly over their
    /// slots as they are filled.
    pub log_pref: Vec<f64>,
    /// Reward for a placement that agrees with the ordering.
    pub progress_bonus: f64,
    /// Value of a placement the ordering contradicts (normally negative).
    pub inconsistency_penalty: f64,
    pub costs: ActionCosts,
}

impl PreferenceVector {
    pub fn flat(orderings: usize) -> Self {
        Self {
            log_pref: vec![0.0; orderings],
            progress_bonus: 1.0,
            inconsistency_penalty: -1.0,
            costs: ActionCosts::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Precision {
    pub gamma: f64,
    pub zeta: f64,
}

impl Precision {
    /// Clamps both precisions into their bounds; bounds must be positive.
    pub fn clamped(gamma: f64, zeta: f64, gamma_bounds: (f64, f64), zeta_bounds: (f64, f64)) -> Self {
        debug_assert!(gamma_bounds.0 > 0.0 && zeta_bounds.0 > 0.0);
        Self {
            gamma: gamma.clamp(gamma_bounds.0, gamma_bounds.1),
            zeta: zeta.clamp(zeta_bounds.0, zeta_bounds.1),
        }
    }
}

/// Posterior ∝ prior · likelihood^zeta. `zeta = 1` is exact Bayes.
pub fn bayes_update(
    prior: &Categorical,
    likelihoods: &[f64],
    zeta: f64,
) -> Result<Categorical, InferenceError> {
    if likelihoods.len() != prior.len() {
        return Err(InferenceError::LikelihoodLength {
            expected: prior.len(),
            got: likelihoods.len(),
        });
    }
    let mut weights = Vec::with_capacity(prior.len());
    for (i, (&p, &l)) in prior.probs().iter().zip(likelihoods).enumerate() {
        if !l.is_finite() || l < 0.0 {
            return Err(InferenceError::BadLikelihood(i));
        }
        let tempered = if zeta == 1.0 || l == 0.0 { l } else { l.powf(zeta) };
        weights.push(p * tempered);
    }
    if weights.iter().sum::<f64>() <= 0.0 {
        return Err(InferenceError::Contradiction);
    }
    Ok(Categorical::from_weights(weights)?)
}

pub fn shannon_entropy_of(dist: &Categorical) -> f64 {
    dist.entropy()
}

/// Predictive probability of each outcome row and the matching posterior
/// weights (unnormalized probabilities are divided by the predictive mass).
fn branch(belief: &[f64], row: &[f64]) -> Option<(f64, Vec<f64>)> {
    let joint: Vec<f64> = belief.iter().zip(row).map(|(b, l)| b * l).collect();
    let mass: f64 = joint.iter().sum();
    if mass <= 0.0 {
        return None;
    }
    Some((mass, joint.into_iter().map(|j| j / mass).collect()))
}

fn information_gain_raw(belief: &[f64], rows: &[Vec<f64>]) -> f64 {
    let prior_h = shannon_entropy(belief);
    let expected_posterior_h: f64 = rows
        .iter()
        .filter_map(|row| branch(belief, row))
        .map(|(mass, post)| mass * shannon_entropy(&post))
        .sum();
    (prior_h - expected_posterior_h).max(0.0)
}

/// `H(belief) - E_o[H(belief | o)]` for the observation channel of `action`.
pub fn expected_information_gain(
    belief: &Categorical,
    action: &Action,
    model: &GenerativeModel,
) -> f64 {
    information_gain_raw(belief.probs(), &model.outcome_rows(action))
}

fn pragmatic_raw(
    belief: &[f64],
    action: &Action,
    model: &GenerativeModel,
    prefs: &PreferenceVector,
) -> f64 {
    match *action {
        Action::TypeChunk { chunk, slot } => {
            let per_slot = 1.0 / model.space.slot_count() as f64;
            model
                .space
                .orderings()
                .iter()
                .zip(belief)
                .zip(&prefs.log_pref)
                .map(|((o, &b), &lp)| {
                    let value = if o.places(chunk, slot) {
                        prefs.progress_bonus + lp * per_slot
                    } else {
                        prefs.inconsistency_penalty
                    };
                    b * value
                })
                .sum()
        }
        Action::FixateSource(_) => -prefs.costs.read,
        Action::Pause(_) => -prefs.costs.pause,
        Action::FixateTarget(_) => -prefs.costs.look,
        Action::Delete(_) => -prefs.costs.delete,
        Action::Consult(_) => -prefs.costs.consult,
    }
}

/// Expected log-preference of the outcome `action` is predicted to yield.
pub fn pragmatic_value(
    belief: &Categorical,
    action: &Action,
    model: &GenerativeModel,
    prefs: &PreferenceVector,
) -> f64 {
    pragmatic_raw(belief.probs(), action, model, prefs)
}

/// Expected free energy of a policy, accumulated over its predicted
/// outcome tree.
pub fn expected_free_energy(
    belief: &Categorical,
    policy: &[Action],
    model: &GenerativeModel,
    prefs: &PreferenceVector,
    weights: EfeWeights,
) -> Result<EFEDecomposition, InferenceError> {
    if policy.is_empty() {
        return Err(InferenceError::EmptyPolicy);
    }
    let (epistemic, pragmatic) = rollout(belief.probs(), policy, model, prefs);
    Ok(EFEDecomposition::new(epistemic, pragmatic, weights))
}

fn rollout(
    belief: &[f64],
    policy: &[Action],
    model: &GenerativeModel,
    prefs: &PreferenceVector,
) -> (f64, f64) {
    let Some((action, rest)) = policy.split_first() else {
        return (0.0, 0.0);
    };
    let rows = model.outcome_rows(action);
    let mut epistemic = information_gain_raw(belief, &rows);
    let mut pragmatic = pragmatic_raw(belief, action, model, prefs);
    if !rest.is_empty() {
        for (mass, post) in rows.iter().filter_map(|row| branch(belief, row)) {
            let (e, p) = rollout(&post, rest, model, prefs);
            epistemic += mass * e;
            pragmatic += mass * p;
        }
    }
    (epistemic, pragmatic)
}

/// Evaluates many policies at once, sharing the outcome-tree work of common
/// prefixes. Results line up with `policies`; empty policies are rejected.
pub fn evaluate_policies(
    belief: &Categorical,
    policies: &[Vec<Action>],
    model: &GenerativeModel,
    prefs: &PreferenceVector,
    weights: EfeWeights,
) -> Result<Vec<EFEDecomposition>, InferenceError> {
    let mut trie = PolicyTrie::default();
    let mut leaves = Vec::with_capacity(policies.len());
    for policy in policies {
        if policy.is_empty() {
            return Err(InferenceError::EmptyPolicy);
        }
        leaves.push(trie.insert(policy));
    }
    for &root in &trie.roots.clone() {
        trie.accumulate(root, belief.probs(), 1.0, model, prefs);
    }
    Ok(leaves
        .into_iter()
        .map(|path| {
            let (e, p) = path.iter().fold((0.0, 0.0), |(e, p), &n| {
                (e + trie.nodes[n].epistemic, p + trie.nodes[n].pragmatic)
            });
            EFEDecomposition::new(e, p, weights)
        })
        .collect())
}

#[derive(Default)]
struct PolicyTrie {
    nodes: Vec<TrieNode>,
    roots: Vec<usize>,
}

struct TrieNode {
    action: Action,
    children: Vec<usize>,
    epistemic: f64,
    pragmatic: f64,
}

impl PolicyTrie {
    fn insert(&mut self, policy: &[Action]) -> Vec<usize> {
        let mut path = Vec::with_capacity(policy.len());
        let mut parent: Option<usize> = None;
        for action in policy {
            let siblings = match parent {
                Some(p) => &self.nodes[p].children,
                None => &self.roots,
            };
            let found = siblings
                .iter()
                .copied()
                .find(|&i| self.nodes[i].action == *action);
            let id = match found {
                Some(id) => id,
                None => {
                    let id = self.nodes.len();
                    self.nodes.push(TrieNode {
                        action: *action,
                        children: Vec::new(),
                        epistemic: 0.0,
                        pragmatic: 0.0,
                    });
                    match parent {
                        Some(p) => self.nodes[p].children.push(id),
                        None => self.roots.push(id),
                    }
                    id
                }
            };
            path.push(id);
            parent = Some(id);
        }
        path
    }

    fn accumulate(
        &mut self,
        node: usize,
        belief: &[f64],
        reach: f64,
        model: &GenerativeModel,
        prefs: &PreferenceVector,
    ) {
        let action = self.nodes[node].action;
        let rows = model.outcome_rows(&action);
        self.nodes[node].epistemic += reach * information_gain_raw(belief, &rows);
        self.nodes[node].pragmatic += reach * pragmatic_raw(belief, &action, model, prefs);
        let children = self.nodes[node].children.clone();
        if children.is_empty() {
            return;
        }
        for (mass, post) in rows.iter().filter_map(|row| branch(belief, row)) {
            for &child in &children {
                self.accumulate(child, &post, reach * mass, model, prefs);
            }
        }
    }
}

/// Softmax over `-gamma * total`, shifted by the best total for stability.
pub fn policy_posterior(efes: &[EFEDecomposition], gamma: f64) -> Categorical {
    let totals: Vec<f64> = efes.iter().map(|e| e.total).collect();
    softmax_neg(&totals, gamma)
}

pub fn softmax_neg(totals: &[f64], gamma: f64) -> Categorical {
    assert!(!totals.is_empty(), "no policies to weigh");
    if gamma == 0.0 {
        return Categorical::uniform(totals.len());
    }
    let best = totals.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = totals.iter().map(|t| (-gamma * (t - best)).exp()).collect();
    Categorical::from_weights(weights).expect("best policy has weight one")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::model::ChunkId;

    fn model(r: f64) -> GenerativeModel {
        let space = Arc::new(table2_space());
        let evidence = ReadingEvidenceModel::with_defaults(space.table(), space.len())
            .with_content_reliability(space.table(), r);
        GenerativeModel::new(space, evidence)
    }

    fn type_action(chunk: u8, slot: usize) -> Action {
        Action::TypeChunk { chunk: ChunkId(chunk), slot }
    }

    fn placement_row(m: &GenerativeModel, chunk: u8, slot: usize) -> Vec<f64> {
        m.outcome_rows(&type_action(chunk, slot))[0].clone()
    }

    #[test]
    fn pruning_by_first_chunk_at_slot_one() {
        let m = model(0.8);
        let post = bayes_update(&Categorical::uniform(6), &placement_row(&m, 1, 1), 1.0).unwrap();
        for (i, &p) in post.probs().iter().enumerate() {
            let expected = if [0, 2, 3, 4].contains(&i) { 0.25 } else { 0.0 };
            assert!((p - expected).abs() < 1e-12);
        }
        assert!((post.entropy() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn fronting_chunk_four_isolates_tt5() {
        let m = model(0.8);
        let post = bayes_update(&Categorical::uniform(6), &placement_row(&m, 4, 1), 1.0).unwrap();
        assert!((post.get(5) - 1.0).abs() < 1e-12);
        assert_eq!(post.entropy(), 0.0);
    }

    #[test]
    fn flat_likelihood_keeps_prior() {
        let prior = Categorical::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let post = bayes_update(&prior, &[1.0; 4], 1.0).unwrap();
        for (a, b) in post.probs().iter().zip(prior.probs()) {
            assert!((a - b).abs() < 1e-15);
        }
        let tempered = bayes_update(&prior, &[1.0; 4], 3.0).unwrap();
        assert_eq!(tempered.probs(), post.probs());
    }

    #[test]
    fn contradiction_is_reported() {
        let prior = Categorical::point_mass(3, 0);
        assert_eq!(
            bayes_update(&prior, &[0.0, 1.0, 1.0], 1.0),
            Err(InferenceError::Contradiction)
        );
        assert!(matches!(
            bayes_update(&prior, &[1.0, 1.0], 1.0),
            Err(InferenceError::LikelihoodLength { .. })
        ));
    }

    #[test]
    fn zeta_sharpens_evidence() {
        let prior = Categorical::uniform(2);
        let mild = bayes_update(&prior, &[0.8, 0.2], 1.0).unwrap();
        let sharp = bayes_update(&prior, &[0.8, 0.2], 2.0).unwrap();
        assert!((mild.get(0) - 0.8).abs() < 1e-12);
        assert!((sharp.get(0) - 0.64 / 0.68).abs() < 1e-12);
    }

    #[test]
    fn information_gain_zero_cases() {
        let m = model(0.8);
        let point = Categorical::point_mass(6, 3);
        for a in [Action::FixateSource(ChunkId(2)), type_action(4, 3), Action::Pause(800)] {
            assert_eq!(expected_information_gain(&point, &a, &m), 0.0);
        }
        let flat = model(0.5);
        let gain = expected_information_gain(&Categorical::uniform(6), &Action::FixateSource(ChunkId(1)), &flat);
        assert!(gain.abs() < 1e-12);
    }

    /// Information gain by enumerating (ordering, outcome) pairs of the joint
    /// distribution and computing mutual information from it.
    fn oracle_mutual_information(belief: &[f64], rows: &[Vec<f64>]) -> f64 {
        let mut mi = 0.0;
        for row in rows {
            let p_o: f64 = belief.iter().zip(row).map(|(b, l)| b * l).sum();
            for (b, l) in belief.iter().zip(row) {
                let joint = b * l;
                if joint > 0.0 {
                    mi += joint * (l / p_o).log2();
                }
            }
        }
        mi
    }

    #[test]
    fn typing_gain_matches_enumeration() {
        let m = model(0.8);
        let uniform = Categorical::uniform(6);
        for (chunk, slot) in [(4u8, 3usize), (4, 4), (2, 4), (1, 1), (0, 2), (3, 5)] {
            let a = type_action(chunk, slot);
            let got = expected_information_gain(&uniform, &a, &m);
            let want = oracle_mutual_information(uniform.probs(), &m.outcome_rows(&a));
            assert!((got - want).abs() < 1e-12, "{chunk}@{slot}: {got} vs {want}");
        }
        // the placement that isolates a single ordering: H2(1/6)
        let h2 = |p: f64| -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
        let gain = expected_information_gain(&uniform, &type_action(4, 3), &m);
        assert!((gain - h2(1.0 / 6.0)).abs() < 1e-12);
        assert!((gain - 0.650022).abs() < 1e-6);
    }

    #[test]
    fn reading_gain_matches_enumeration() {
        let m = model(0.8);
        let uniform = Categorical::uniform(6);
        let a = Action::FixateSource(ChunkId(2));
        let got = expected_information_gain(&uniform, &a, &m);
        let want = oracle_mutual_information(uniform.probs(), &m.outcome_rows(&a));
        assert!((got - want).abs() < 1e-12);
        // log2 6 - H(0.8, 0.04 x5)
        assert!((got - 1.398649).abs() < 1e-6);
    }

    #[test]
    fn pragmatic_examples() {
        let m = model(0.8);
        let prefs = PreferenceVector {
            progress_bonus: 1.5,
            inconsistency_penalty: -2.0,
            ..PreferenceVector::flat(6)
        };
        let tt3 = Categorical::point_mass(6, 3);
        assert_eq!(pragmatic_value(&tt3, &type_action(4, 3), &m, &prefs), 1.5);
        assert_eq!(pragmatic_value(&tt3, &Action::Pause(800), &m, &prefs), -prefs.costs.pause);
        let tt0_or_tt5 = Categorical::new(vec![0.5, 0.0, 0.0, 0.0, 0.0, 0.5]).unwrap();
        let got = pragmatic_value(&tt0_or_tt5, &type_action(1, 1), &m, &prefs);
        assert!((got - (0.5 * 1.5 + 0.5 * -2.0)).abs() < 1e-12);
    }

    #[test]
    fn efe_one_step_composes() {
        let m = model(0.8);
        let prefs = PreferenceVector::flat(6);
        let w = EfeWeights { epistemic: 2.0, pragmatic: 0.5 };
        let b = Categorical::new(vec![0.3, 0.1, 0.2, 0.25, 0.05, 0.1]).unwrap();
        for a in [Action::FixateSource(ChunkId(1)), type_action(2, 4), Action::Pause(800)] {
            let efe = expected_free_energy(&b, &[a], &m, &prefs, w).unwrap();
            let e = expected_information_gain(&b, &a, &m);
            let p = pragmatic_value(&b, &a, &m, &prefs);
            assert!((efe.total - (-2.0 * e - 0.5 * p)).abs() < 1e-12);
        }
        assert_eq!(
            expected_free_energy(&b, &[], &m, &prefs, w),
            Err(InferenceError::EmptyPolicy)
        );
    }

    #[test]
    fn zero_epistemic_weight_leaves_pragmatic_only() {
        let m = model(0.8);
        let prefs = PreferenceVector::flat(6);
        let w = EfeWeights { epistemic: 0.0, pragmatic: 1.0 };
        let policy = [Action::FixateSource(ChunkId(2)), type_action(1, 1)];
        let efe = expected_free_energy(&Categorical::uniform(6), &policy, &m, &prefs, w).unwrap();
        assert_eq!(efe.total, -efe.pragmatic);
        assert!(efe.epistemic > 0.0);
    }

    #[test]
    fn shared_prefix_evaluation_matches_single() {
        let m = model(0.8);
        let prefs = PreferenceVector::flat(6);
        let w = EfeWeights { epistemic: 3.0, pragmatic: 1.0 };
        let b = Categorical::uniform(6);
        let policies = vec![
            vec![Action::FixateSource(ChunkId(1))],
            vec![Action::FixateSource(ChunkId(1)), type_action(1, 1)],
            vec![Action::FixateSource(ChunkId(1)), Action::FixateSource(ChunkId(2))],
            vec![Action::FixateSource(ChunkId(1)), Action::FixateSource(ChunkId(2)), type_action(4, 3)],
            vec![Action::Pause(800)],
        ];
        let batch = evaluate_policies(&b, &policies, &m, &prefs, w).unwrap();
        for (policy, got) in policies.iter().zip(&batch) {
            let want = expected_free_energy(&b, policy, &m, &prefs, w).unwrap();
            assert!((got.total - want.total).abs() < 1e-12);
            assert!((got.epistemic - want.epistemic).abs() < 1e-12);
        }
    }

    fn efe(total: f64) -> EFEDecomposition {
        EFEDecomposition { epistemic: 0.0, pragmatic: 0.0, total, weights: EfeWeights { epistemic: 1.0, pragmatic: 1.0 } }
    }

    #[test]
    fn posterior_examples() {
        let q = policy_posterior(&[efe(1.0), efe(2.0)], 1.0);
        assert!((q.get(0) - 0.731059).abs() < 1e-6);
        assert!((q.get(1) - 0.268941).abs() < 1e-6);
        // closed form 1/(1+e^-1)
        assert!((q.get(0) - 1.0 / (1.0 + (-1.0f64).exp())).abs() < 1e-15);
        let flat = policy_posterior(&[efe(1.0), efe(-3.0), efe(7.0)], 0.0);
        assert!(flat.probs().iter().all(|&p| (p - 1.0 / 3.0).abs() < 1e-15));
        let tie = policy_posterior(&[efe(2.0), efe(2.0)], 50.0);
        assert_eq!(tie.probs(), &[0.5, 0.5]);
        let sharp = policy_posterior(&[efe(0.0), efe(1.0)], 1e4);
        assert!(sharp.get(0) > 1.0 - 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn posterior_shift_invariant(totals in proptest::collection::vec(-20.0f64..20.0, 1..8), shift in -100.0f64..100.0, gamma in 0.0f64..16.0) {
            let a = softmax_neg(&totals, gamma);
            let shifted: Vec<f64> = totals.iter().map(|t| t + shift).collect();
            let b = softmax_neg(&shifted, gamma);
            for (x, y) in a.probs().iter().zip(b.probs()) {
                proptest::prop_assert!((x - y).abs() < 1e-9);
            }
        }

        #[test]
        fn gain_is_nonnegative(weights in proptest::collection::vec(0.0f64..1.0, 6), r in 0.0f64..=1.0, chunk in 1u8..5, slot in 1usize..6) {
            proptest::prop_assume!(weights.iter().sum::<f64>() > 1e-6);
            let b = Categorical::from_weights(weights).unwrap();
            let m = model(r);
            for a in [Action::FixateSource(ChunkId(chunk)), type_action(chunk, slot)] {
                proptest::prop_assert!(expected_information_gain(&b, &a, &m) >= -1e-12);
            }
        }

        #[test]
        fn placement_never_raises_entropy_from_uniform(chunk in 0u8..5, slot in 1usize..6) {
            let m = model(0.8);
            let row = placement_row(&m, chunk, slot);
            if let Ok(post) = bayes_update(&Categorical::uniform(6), &row, 1.0) {
                proptest::prop_assert!(post.entropy() <= 6f64.log2() + 1e-12);
            }
        }

        #[test]
        fn informative_cue_reduces_expected_entropy(weights in proptest::collection::vec(0.05f64..1.0, 6), r in 0.55f64..=1.0, chunk in 1u8..5) {
            let b = Categorical::from_weights(weights).unwrap();
            let m = model(r);
            let gain = expected_information_gain(&b, &Action::FixateSource(ChunkId(chunk)), &m);
            proptest::prop_assert!(gain > 0.0);
        }
    }
}
