//! Translation task model: chunks, candidate target orderings, observation
//! likelihoods, and the positional/lexical entropy analytics.
//!
//! Slots are 1-based throughout the public API, matching how target
//! positions are usually counted ("chunk ③ appears at position 5").

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::categorical::{shannon_entropy, Categorical};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChunkId(pub u8);

impl fmt::Display for ChunkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChunkKind {
    Content,
    Punctuation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chunk {
    pub id: ChunkId,
    pub source_text: String,
    pub target_text: String,
    pub kind: ChunkKind,
    /// Punctuation belongs to the source span of a content chunk and becomes
    /// typeable once that chunk has been read.
    pub host: Option<ChunkId>,
}

impl Chunk {
    pub fn content(id: u8, source: &str, target: &str) -> Self {
        Self {
            id: ChunkId(id),
            source_text: source.to_owned(),
            target_text: target.to_owned(),
            kind: ChunkKind::Content,
            host: None,
        }
    }

    pub fn punctuation(id: u8, target: &str, host: Option<u8>) -> Self {
        Self {
            id: ChunkId(id),
            source_text: String::new(),
            target_text: target.to_owned(),
            kind: ChunkKind::Punctuation,
            host: host.map(ChunkId),
        }
    }

    pub fn is_content(&self) -> bool {
        self.kind == ChunkKind::Content
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("chunk id {0} appears more than once in the chunk table")]
    DuplicateChunkId(ChunkId),
    #[error("content chunk {0} needs nonempty source and target text")]
    EmptyContentChunk(ChunkId),
    #[error("chunk {chunk} names host {host}, which is not a content chunk")]
    BadHost { chunk: ChunkId, host: ChunkId },
    #[error("source order must be a permutation of the content chunk ids: {0}")]
    BadSourceOrder(String),
    #[error("ordering {ordering}: {detail}")]
    NotPermutation { ordering: String, detail: String },
    #[error("ordering {0} is listed twice")]
    DuplicateOrdering(String),
    #[error("orderings {first} and {second} place chunks identically")]
    DuplicateSlots { first: String, second: String },
    #[error("candidate space needs at least one ordering")]
    NoOrderings,
    #[error("unknown chunk id {0}")]
    UnknownChunk(ChunkId),
    #[error("unknown ordering {0}")]
    UnknownOrdering(String),
    #[error("slot {slot} outside 1..={slots}")]
    SlotOutOfRange { slot: usize, slots: usize },
    #[error("prior has {got} entries for {expected} orderings")]
    PriorLength { expected: usize, got: usize },
    #[error("reliability for chunk {chunk} must lie in [0, 1], got {value}")]
    BadReliability { chunk: ChunkId, value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChunkTable {
    chunks: Vec<Chunk>,
    source_order: Vec<ChunkId>,
}

impl ChunkTable {
    pub fn new(chunks: Vec<Chunk>, source_order: Vec<ChunkId>) -> Result<Self, ModelError> {
        let mut seen = BTreeSet::new();
        for chunk in &chunks {
            if !seen.insert(chunk.id) {
                return Err(ModelError::DuplicateChunkId(chunk.id));
            }
            if chunk.is_content()
                && (chunk.source_text.trim().is_empty() || chunk.target_text.is_empty())
            {
                return Err(ModelError::EmptyContentChunk(chunk.id));
            }
        }
        for chunk in &chunks {
            if let Some(host) = chunk.host {
                let ok = chunks.iter().any(|c| c.id == host && c.is_content());
                if !ok {
                    return Err(ModelError::BadHost {
                        chunk: chunk.id,
                        host,
                    });
                }
            }
        }
        let content: BTreeSet<ChunkId> = chunks
            .iter()
            .filter(|c| c.is_content())
            .map(|c| c.id)
            .collect();
        let order_set: BTreeSet<ChunkId> = source_order.iter().copied().collect();
        if order_set.len() != source_order.len() || order_set != content {
            return Err(ModelError::BadSourceOrder(format!(
                "got {:?}, content chunks are {:?}",
                source_order.iter().map(|c| c.0).collect::<Vec<_>>(),
                content.iter().map(|c| c.0).collect::<Vec<_>>()
            )));
        }
        Ok(Self {
            chunks,
            source_order,
        })
    }

    pub fn chunks(&self) -> &[Chunk] {
        &self.chunks
    }

    pub fn source_order(&self) -> &[ChunkId] {
        &self.source_order
    }

    pub fn get(&self, id: ChunkId) -> Option<&Chunk> {
        self.chunks.iter().find(|c| c.id == id)
    }

    pub fn chunk(&self, id: ChunkId) -> Result<&Chunk, ModelError> {
        self.get(id).ok_or(ModelError::UnknownChunk(id))
    }

    pub fn ids(&self) -> BTreeSet<ChunkId> {
        self.chunks.iter().map(|c| c.id).collect()
    }

    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateOrdering {
    pub id: String,
    slots: Vec<ChunkId>,
}

impl CandidateOrdering {
    pub fn slots(&self) -> &[ChunkId] {
        &self.slots
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    /// 1-based slot holding `chunk`.
    pub fn slot_of(&self, chunk: ChunkId) -> Option<usize> {
        self.slots.iter().position(|&c| c == chunk).map(|i| i + 1)
    }

    /// Chunk at 1-based `slot`.
    pub fn chunk_at(&self, slot: usize) -> Option<ChunkId> {
        slot.checked_sub(1).and_then(|i| self.slots.get(i)).copied()
    }

    pub fn places(&self, chunk: ChunkId, slot: usize) -> bool {
        self.chunk_at(slot) == Some(chunk)
    }
}

/// A finite set of admissible target orderings with a prior over them.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSpace {
    table: ChunkTable,
    orderings: Vec<CandidateOrdering>,
    prior: Categorical,
}

impl CandidateSpace {
    /// Builds a space with a uniform prior. Each slot list must place every
    /// chunk of `table` exactly once.
    pub fn build(
        table: ChunkTable,
        orderings: Vec<(String, Vec<ChunkId>)>,
    ) -> Result<Self, ModelError> {
        if orderings.is_empty() {
            return Err(ModelError::NoOrderings);
        }
        let ids = table.ids();
        let mut built: Vec<CandidateOrdering> = Vec::with_capacity(orderings.len());
        for (label, slots) in orderings {
            validate_permutation(&label, &slots, &ids)?;
            if built.iter().any(|o| o.id == label) {
                return Err(ModelError::DuplicateOrdering(label));
            }
            if let Some(prev) = built.iter().find(|o| o.slots == slots) {
                return Err(ModelError::DuplicateSlots {
                    first: prev.id.clone(),
                    second: label,
                });
            }
            built.push(CandidateOrdering { id: label, slots });
        }
        let prior = Categorical::uniform(built.len());
        Ok(Self {
            table,
            orderings: built,
            prior,
        })
    }

    pub fn with_prior(mut self, prior: Categorical) -> Result<Self, ModelError> {
        if prior.len() != self.orderings.len() {
            return Err(ModelError::PriorLength {
                expected: self.orderings.len(),
                got: prior.len(),
            });
        }
        self.prior = prior;
        Ok(self)
    }

    pub fn table(&self) -> &ChunkTable {
        &self.table
    }

    pub fn orderings(&self) -> &[CandidateOrdering] {
        &self.orderings
    }

    pub fn ordering(&self, index: usize) -> &CandidateOrdering {
        &self.orderings[index]
    }

    pub fn prior(&self) -> &Categorical {
        &self.prior
    }

    pub fn len(&self) -> usize {
        self.orderings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orderings.is_empty()
    }

    pub fn slot_count(&self) -> usize {
        self.orderings[0].slot_count()
    }

    pub fn index_of(&self, label: &str) -> Result<usize, ModelError> {
        self.orderings
            .iter()
            .position(|o| o.id == label)
            .ok_or_else(|| ModelError::UnknownOrdering(label.to_owned()))
    }

    /// Concatenated target text of an ordering.
    pub fn render(&self, index: usize) -> String {
        self.orderings[index]
            .slots
            .iter()
            .filter_map(|&c| self.table.get(c))
            .map(|c| c.target_text.as_str())
            .collect()
    }

    /// Shannon entropy (bits) of the slot a chunk lands in under the prior.
    pub fn positional_entropy(&self, chunk: ChunkId) -> Result<f64, ModelError> {
        self.table.chunk(chunk)?;
        let mut by_slot = vec![0.0; self.slot_count()];
        for (ordering, &p) in self.orderings.iter().zip(self.prior.probs()) {
            // Validated permutations always contain every table chunk.
            let slot = ordering.slot_of(chunk).expect("validated permutation");
            by_slot[slot - 1] += p;
        }
        Ok(marginal_entropy(by_slot))
    }

    /// Entropy (bits) over the target realizations a chunk takes across
    /// orderings. Orderings share the table's vocabulary, so every chunk has
    /// exactly one realization.
    pub fn lexical_entropy(&self, chunk: ChunkId) -> Result<f64, ModelError> {
        let text = &self.table.chunk(chunk)?.target_text;
        let mut by_text: BTreeMap<&str, f64> = BTreeMap::new();
        for &p in self.prior.probs() {
            *by_text.entry(text.as_str()).or_default() += p;
        }
        Ok(marginal_entropy(by_text.into_values().collect()))
    }
}

/// Entropy of accumulated prior mass, renormalized so that summation
/// residue does not show up as spurious uncertainty.
fn marginal_entropy(mut masses: Vec<f64>) -> f64 {
    let total: f64 = masses.iter().sum();
    for m in &mut masses {
        *m /= total;
    }
    shannon_entropy(&masses)
}

fn validate_permutation(
    label: &str,
    slots: &[ChunkId],
    ids: &BTreeSet<ChunkId>,
) -> Result<(), ModelError> {
    let fail = |detail: String| ModelError::NotPermutation {
        ordering: label.to_owned(),
        detail,
    };
    let mut seen = BTreeSet::new();
    for &c in slots {
        if !ids.contains(&c) {
            return Err(fail(format!("unknown chunk {c}")));
        }
        if !seen.insert(c) {
            return Err(fail(format!("chunk {c} placed twice")));
        }
    }
    if let Some(missing) = ids.iter().find(|c| !seen.contains(c)) {
        return Err(fail(format!("chunk {missing} is not placed")));
    }
    Ok(())
}

/// 1.0 if `ordering` puts `chunk` at `slot`, else 0.0.
pub fn placement_likelihood(
    ordering: &CandidateOrdering,
    chunk: ChunkId,
    slot: usize,
) -> Result<f64, ModelError> {
    let slots = ordering.slot_count();
    if slot == 0 || slot > slots {
        return Err(ModelError::SlotOutOfRange { slot, slots });
    }
    Ok(if ordering.places(chunk, slot) { 1.0 } else { 0.0 })
}

/// Noisy channel from the latent preferred ordering to the ordering cue a
/// reader picks up from a source chunk.
///
/// With reliability `r` the cue names the latent ordering with probability
/// `r` and is otherwise uniform over the remaining orderings. Reliabilities
/// at or below [`UNINFORMATIVE_RELIABILITY`] give a flat channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadingEvidenceModel {
    reliability: BTreeMap<ChunkId, f64>,
    orderings: usize,
}

pub const UNINFORMATIVE_RELIABILITY: f64 = 0.5;
pub const DEFAULT_CONTENT_RELIABILITY: f64 = 0.8;

impl ReadingEvidenceModel {
    pub fn new(
        reliability: BTreeMap<ChunkId, f64>,
        orderings: usize,
    ) -> Result<Self, ModelError> {
        for (&chunk, &value) in &reliability {
            if !(0.0..=1.0).contains(&value) || !value.is_finite() {
                return Err(ModelError::BadReliability { chunk, value });
            }
        }
        Ok(Self {
            reliability,
            orderings,
        })
    }

    /// Content chunks get 0.8, punctuation 0.5.
    pub fn with_defaults(table: &ChunkTable, orderings: usize) -> Self {
        let reliability = table
            .chunks()
            .iter()
            .map(|c| {
                let r = if c.is_content() {
                    DEFAULT_CONTENT_RELIABILITY
                } else {
                    UNINFORMATIVE_RELIABILITY
                };
                (c.id, r)
            })
            .collect();
        Self {
            reliability,
            orderings,
        }
    }

    /// Same reliability for every content chunk; punctuation keeps its value.
    pub fn with_content_reliability(mut self, table: &ChunkTable, r: f64) -> Self {
        for chunk in table.chunks().iter().filter(|c| c.is_content()) {
            self.reliability.insert(chunk.id, r.clamp(0.0, 1.0));
        }
        self
    }

    pub fn reliability(&self, chunk: ChunkId) -> f64 {
        self.reliability
            .get(&chunk)
            .copied()
            .unwrap_or(UNINFORMATIVE_RELIABILITY)
    }

    pub fn orderings(&self) -> usize {
        self.orderings
    }

    pub fn is_informative(&self, chunk: ChunkId) -> bool {
        self.orderings > 1 && self.reliability(chunk) > UNINFORMATIVE_RELIABILITY
    }

    /// P(cue | ordering) after reading `chunk`.
    pub fn reading_likelihood(&self, chunk: ChunkId, cue: usize, ordering: usize) -> f64 {
        let n = self.orderings;
        if n == 1 {
            return 1.0;
        }
        if !self.is_informative(chunk) {
            return 1.0 / n as f64;
        }
        let r = self.reliability(chunk);
        if cue == ordering {
            r
        } else {
            (1.0 - r) / (n - 1) as f64
        }
    }

    /// Likelihood of one observed cue across all orderings.
    pub fn cue_likelihoods(&self, chunk: ChunkId, cue: usize) -> Vec<f64> {
        (0..self.orderings)
            .map(|o| self.reading_likelihood(chunk, cue, o))
            .collect()
    }

    /// Distribution of cues emitted when the latent ordering is `ordering`.
    pub fn cue_distribution(&self, chunk: ChunkId, ordering: usize) -> Vec<f64> {
        (0..self.orderings)
            .map(|cue| self.reading_likelihood(chunk, cue, ordering))
            .collect()
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    /// Brute-force positional entropy straight from the raw Table 2 rows,
    /// without going through `CandidateSpace`.
    fn oracle_positional_entropy(chunk: u8) -> f64 {
        let rows = table2_rows();
        let mut counts = [0usize; 5];
        for (_, slots) in &rows {
            let pos = slots.iter().position(|c| c.0 == chunk).unwrap();
            counts[pos] += 1;
        }
        let n = rows.len() as f64;
        counts
            .iter()
            .filter(|&&k| k > 0)
            .map(|&k| {
                let p = k as f64 / n;
                -p * p.log2()
            })
            .sum()
    }

    #[test]
    fn table2_space_is_uniform() {
        let space = table2_space();
        assert_eq!(space.len(), 6);
        assert_eq!(space.slot_count(), 5);
        for &p in space.prior().probs() {
            assert!((p - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn singleton_space() {
        let space =
            CandidateSpace::build(table2_chunks(), vec![("only".into(), table2_rows()[0].1.clone())])
                .unwrap();
        assert_eq!(space.prior().probs(), &[1.0]);
        for id in [0, 1, 2, 3, 4] {
            assert_eq!(space.positional_entropy(ChunkId(id)).unwrap(), 0.0);
        }
    }

    #[test]
    fn rejects_double_placement() {
        let slots = [1, 1, 2, 4, 3].map(ChunkId).to_vec();
        let err = CandidateSpace::build(table2_chunks(), vec![("bad".into(), slots)]).unwrap_err();
        assert_eq!(
            err,
            ModelError::NotPermutation {
                ordering: "bad".into(),
                detail: "chunk 1 placed twice".into()
            }
        );
        assert!(err.to_string().contains("chunk 1 placed twice"));
    }

    #[test]
    fn rejects_missing_chunk_and_duplicates() {
        let short = [1, 0, 2, 4].map(ChunkId).to_vec();
        assert!(matches!(
            CandidateSpace::build(table2_chunks(), vec![("short".into(), short)]),
            Err(ModelError::NotPermutation { .. })
        ));
        let mut rows = table2_rows();
        rows.push(("TT6".into(), rows[0].1.clone()));
        assert!(matches!(
            CandidateSpace::build(table2_chunks(), rows),
            Err(ModelError::DuplicateSlots { .. })
        ));
        let mut rows = table2_rows();
        rows[1].0 = "TT0".into();
        assert_eq!(
            CandidateSpace::build(table2_chunks(), rows),
            Err(ModelError::DuplicateOrdering("TT0".into()))
        );
    }

    #[test]
    fn positional_entropy_matches_oracle() {
        let space = table2_space();
        for id in [0u8, 1, 2, 3, 4] {
            let got = space.positional_entropy(ChunkId(id)).unwrap();
            assert!((got - oracle_positional_entropy(id)).abs() < 1e-12, "chunk {id}");
        }
        // frozen oracle values
        let h = |c| space.positional_entropy(ChunkId(c)).unwrap();
        assert_eq!(h(3), 0.0);
        assert!((h(2) - 1.792481).abs() < 1e-6);
        assert!((h(1) - 0.918296).abs() < 1e-6);
        assert!((h(4) - h(2)).abs() < 1e-12);
        assert!((h(0) - h(1)).abs() < 1e-12);
    }

    #[test]
    fn chunks_two_and_four_carry_most_positional_information() {
        let space = table2_space();
        let max = [0u8, 1, 2, 3, 4]
            .iter()
            .map(|&c| space.positional_entropy(ChunkId(c)).unwrap())
            .fold(0.0, f64::max);
        for c in [2u8, 4] {
            assert!((space.positional_entropy(ChunkId(c)).unwrap() - max).abs() < 1e-12);
        }
    }

    #[test]
    fn lexical_entropy_is_zero() {
        let space = table2_space();
        for id in [0u8, 1, 2, 3, 4] {
            assert_eq!(space.lexical_entropy(ChunkId(id)).unwrap(), 0.0);
        }
        assert_eq!(
            space.lexical_entropy(ChunkId(9)),
            Err(ModelError::UnknownChunk(ChunkId(9)))
        );
        assert_eq!(
            space.positional_entropy(ChunkId(9)),
            Err(ModelError::UnknownChunk(ChunkId(9)))
        );
    }

    #[test]
    fn placement_likelihood_examples() {
        let space = table2_space();
        let tt = |i: usize| space.ordering(i);
        assert_eq!(placement_likelihood(tt(5), ChunkId(4), 1).unwrap(), 1.0);
        assert_eq!(placement_likelihood(tt(0), ChunkId(4), 1).unwrap(), 0.0);
        for o in space.orderings() {
            assert_eq!(placement_likelihood(o, ChunkId(3), 5).unwrap(), 1.0);
        }
        assert!(matches!(
            placement_likelihood(tt(0), ChunkId(1), 6),
            Err(ModelError::SlotOutOfRange { slot: 6, slots: 5 })
        ));
    }

    #[test]
    fn reading_likelihood_examples() {
        let table = table2_chunks();
        let m = ReadingEvidenceModel::with_defaults(&table, 6);
        assert!((m.reading_likelihood(ChunkId(1), 0, 3) - 0.04).abs() < 1e-12);
        assert_eq!(m.reading_likelihood(ChunkId(1), 3, 3), 0.8);
        // comma channel defaults to uninformative
        for cue in 0..6 {
            assert!((m.reading_likelihood(ChunkId(0), cue, 2) - 1.0 / 6.0).abs() < 1e-15);
        }
        let exact = m.clone().with_content_reliability(&table, 1.0);
        assert_eq!(exact.reading_likelihood(ChunkId(3), 3, 3), 1.0);
        assert_eq!(exact.reading_likelihood(ChunkId(3), 2, 3), 0.0);
    }

    #[test]
    fn render_matches_table_one_composition() {
        let space = table2_space();
        assert_eq!(
            space.render(0),
            "その結果、絶対的リーダーや官僚、職人が狩猟採集民族社会から支持されることは、めったにありませんでした"
        );
    }

    proptest::proptest! {
        #[test]
        fn reading_rows_sum_to_one(r in 0.0f64..=1.0, chunk in 0u8..5, ordering in 0usize..6) {
            let table = table2_chunks();
            let m = ReadingEvidenceModel::with_defaults(&table, 6).with_content_reliability(&table, r);
            let total: f64 = m.cue_distribution(ChunkId(chunk), ordering).iter().sum();
            proptest::prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn placement_sums_to_one_over_slots(ordering in 0usize..6, chunk in 0u8..5) {
            let space = table2_space();
            let o = space.ordering(ordering);
            let total: f64 = (1..=5).map(|s| placement_likelihood(o, ChunkId(chunk), s).unwrap()).sum();
            proptest::prop_assert_eq!(total, 1.0);
        }

        #[test]
        fn positional_entropy_bounded(weights in proptest::collection::vec(0.01f64..1.0, 6), chunk in 0u8..5) {
            let space = table2_space()
                .with_prior(Categorical::from_weights(weights).unwrap())
                .unwrap();
            let h = space.positional_entropy(ChunkId(chunk)).unwrap();
            proptest::prop_assert!(h >= 0.0 && h <= 6f64.log2() + 1e-12);
        }
    }
}
