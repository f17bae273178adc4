//! Synthesis cost of a batch under a reference sequence.
//!
//! The synthesizer walks the reference once and appends the current symbol to
//! every strand that needs it next. Strand `s` therefore uses the leftmost
//! embedding of `s` into the reference, and the batch cost is the largest
//! final position over the batch. Positions are reported 1-based.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::MarkovMeasure;
use crate::par::Execution;
use crate::params::{ConstraintParams, StateId, Symbol};
use crate::strand::StrandFormat;

const NONE: usize = usize::MAX;

/// A finite prefix followed by an (optional) infinitely repeated cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceSeq {
    alphabet: usize,
    prefix: Vec<Symbol>,
    cycle: Vec<Symbol>,
}

impl ReferenceSeq {
    /// `prefix` then `cycle` repeated forever. A nonempty cycle must contain
    /// every symbol of `[alphabet]`, so that every strand embeds.
    pub fn new(alphabet: usize, prefix: Vec<Symbol>, cycle: Vec<Symbol>) -> Result<Self> {
        let reference = Self::new_unchecked(alphabet, prefix, cycle)?;
        if !reference.cycle.is_empty() {
            if let Some(missing) =
                (0..alphabet).find(|&a| !reference.cycle.contains(&(a as Symbol)))
            {
                return Err(Error::InvalidReference(format!(
                    "cycle is missing symbol {missing}"
                )));
            }
        }
        Ok(reference)
    }

    /// Skips the completeness check on the cycle; strands needing a missing
    /// symbol past the prefix then fail to embed.
    pub fn new_unchecked(alphabet: usize, prefix: Vec<Symbol>, cycle: Vec<Symbol>) -> Result<Self> {
        if !(2..=256).contains(&alphabet) {
            return Err(Error::InvalidParams(format!("alphabet size {alphabet} out of range")));
        }
        if let Some(&s) = prefix.iter().chain(&cycle).find(|&&s| s as usize >= alphabet) {
            return Err(Error::SymbolOutOfRange { symbol: s, r: alphabet });
        }
        Ok(Self { alphabet, prefix, cycle })
    }

    pub fn finite(alphabet: usize, word: Vec<Symbol>) -> Result<Self> {
        Self::new(alphabet, word, Vec::new())
    }

    pub fn periodic(alphabet: usize, cycle: Vec<Symbol>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::InvalidReference("periodic reference needs a nonempty cycle".into()));
        }
        Self::new(alphabet, Vec::new(), cycle)
    }

    /// `0 1 … (r-1)` repeated.
    pub fn canonical(r: usize) -> Result<Self> {
        Self::periodic(r, (0..r).map(|s| s as Symbol).collect())
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn prefix(&self) -> &[Symbol] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[Symbol] {
        &self.cycle
    }

    pub fn is_finite(&self) -> bool {
        self.cycle.is_empty()
    }

    /// Length for finite references.
    pub fn len(&self) -> Option<usize> {
        self.is_finite().then_some(self.prefix.len())
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty() && self.cycle.is_empty()
    }

    /// Symbol at 0-based position `t`.
    pub fn symbol(&self, t: usize) -> Option<Symbol> {
        if t < self.prefix.len() {
            Some(self.prefix[t])
        } else if self.cycle.is_empty() {
            None
        } else {
            Some(self.cycle[(t - self.prefix.len()) % self.cycle.len()])
        }
    }

    /// Parses `canonical`, `periodic:<cycle>`, `finite:<word>` or
    /// `eventual:<prefix>/<cycle>`.
    pub fn parse(spec: &str, alphabet: usize, format: StrandFormat) -> Result<Self> {
        let (kind, body) = spec.split_once(':').unwrap_or((spec, ""));
        match kind {
            "canonical" if body.is_empty() => Self::canonical(alphabet),
            "periodic" => Self::periodic(alphabet, format.parse_word(body)?),
            "finite" => Self::finite(alphabet, format.parse_word(body)?),
            "eventual" => {
                let (prefix, cycle) = body.split_once('/').ok_or_else(|| {
                    Error::Parse("eventual reference must be `eventual:<prefix>/<cycle>`".into())
                })?;
                Self::new(alphabet, format.parse_word(prefix)?, format.parse_word(cycle)?)
            }
            _ => Err(Error::Parse(format!(
                "unknown reference `{spec}` (expected canonical, periodic:<w>, finite:<w> or eventual:<p>/<c>)"
            ))),
        }
    }

    /// The reference as a spec string accepted by [`parse`](Self::parse).
    pub fn to_spec(&self, format: StrandFormat) -> String {
        match (self.prefix.is_empty(), self.cycle.is_empty()) {
            (_, true) => format!("finite:{}", format.format_word(&self.prefix)),
            (true, false) => format!("periodic:{}", format.format_word(&self.cycle)),
            (false, false) => format!(
                "eventual:{}/{}",
                format.format_word(&self.prefix),
                format.format_word(&self.cycle)
            ),
        }
    }

    pub fn embedder(&self) -> Embedder<'_> {
        Embedder::new(self)
    }
}

impl fmt::Display for ReferenceSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_spec(StrandFormat::Digits))
    }
}

/// Next-occurrence tables for fast leftmost embedding.
#[derive(Debug, Clone)]
pub struct Embedder<'a> {
    reference: &'a ReferenceSeq,
    /// `next_prefix[p * r + s]`: first `q ≥ p` in the prefix with symbol `s`.
    next_prefix: Vec<usize>,
    /// `next_cycle[c * r + s]`: least `d ≥ 0` with `cycle[(c + d) mod L] = s`.
    next_cycle: Vec<usize>,
}

impl<'a> Embedder<'a> {
    fn new(reference: &'a ReferenceSeq) -> Self {
        let r = reference.alphabet;
        let plen = reference.prefix.len();
        let mut next_prefix = vec![NONE; (plen + 1) * r];
        for p in (0..plen).rev() {
            next_prefix.copy_within((p + 1) * r..(p + 2) * r, p * r);
            next_prefix[p * r + reference.prefix[p] as usize] = p;
        }
        let len = reference.cycle.len();
        let mut next_cycle = vec![NONE; len * r];
        for c in 0..len {
            for d in 0..len {
                let slot = &mut next_cycle[c * r + reference.cycle[(c + d) % len] as usize];
                if *slot == NONE {
                    *slot = d;
                }
            }
        }
        Self { reference, next_prefix, next_cycle }
    }

    /// Smallest 0-based position `≥ from` holding `symbol`.
    #[inline]
    pub fn find(&self, from: usize, symbol: Symbol) -> Option<usize> {
        let r = self.reference.alphabet;
        let plen = self.reference.prefix.len();
        if from < plen {
            let q = self.next_prefix[from * r + symbol as usize];
            if q != NONE {
                return Some(q);
            }
        }
        let len = self.reference.cycle.len();
        if len == 0 {
            return None;
        }
        let start = from.max(plen);
        let d = self.next_cycle[((start - plen) % len) * r + symbol as usize];
        (d != NONE).then(|| start + d)
    }

    fn check(&self, strand: &[Symbol]) -> Result<()> {
        match strand.iter().find(|&&s| s as usize >= self.reference.alphabet) {
            Some(&symbol) => Err(Error::SymbolOutOfRange { symbol, r: self.reference.alphabet }),
            None => Ok(()),
        }
    }

    /// 1-based positions used by the leftmost embedding of `strand`.
    pub fn embed(&self, strand: &[Symbol]) -> Result<Vec<usize>> {
        self.check(strand)?;
        let mut from = 0;
        strand
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let pos = self
                    .find(from, s)
                    .ok_or(Error::NotASupersequence { strand: 0, position: i })?;
                from = pos + 1;
                Ok(from)
            })
            .collect()
    }

    /// Final 1-based position of the leftmost embedding (0 for an empty strand).
    pub fn final_position(&self, strand: &[Symbol]) -> Result<usize> {
        self.check(strand)?;
        strand.iter().enumerate().try_fold(0usize, |from, (i, &s)| {
            self.find(from, s)
                .map(|pos| pos + 1)
                .ok_or(Error::NotASupersequence { strand: 0, position: i })
        })
    }
}

/// Leftmost embedding of `strand`; 1-based positions `τ_0 < τ_1 < …`.
pub fn greedy_embed(strand: &[Symbol], reference: &ReferenceSeq) -> Result<Vec<usize>> {
    reference.embedder().embed(strand)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostReport {
    pub per_strand_tau: Vec<Vec<usize>>,
    pub batch_cost: usize,
}

fn tag_strand(e: Error, strand: usize) -> Error {
    match e {
        Error::NotASupersequence { position, .. } => Error::NotASupersequence { strand, position },
        other => other,
    }
}

/// Length of the reference prefix needed to synthesize every strand.
pub fn batch_cost(strands: &[Vec<Symbol>], reference: &ReferenceSeq, exec: Execution) -> Result<usize> {
    let embedder = reference.embedder();
    let finals = exec.try_map_indexed(strands.len(), |i| {
        embedder.final_position(&strands[i]).map_err(|e| tag_strand(e, i))
    })?;
    Ok(finals.into_iter().max().unwrap_or(0))
}

pub fn cost_report(strands: &[Vec<Symbol>], reference: &ReferenceSeq, exec: Execution) -> Result<CostReport> {
    let embedder = reference.embedder();
    let per_strand_tau = exec.try_map_indexed(strands.len(), |i| {
        embedder.embed(&strands[i]).map_err(|e| tag_strand(e, i))
    })?;
    let batch_cost = per_strand_tau.iter().filter_map(|t| t.last().copied()).max().unwrap_or(0);
    Ok(CostReport { per_strand_tau, batch_cost })
}

/// Reference positions consumed under `0 1 … (r-1)` repeated to print the
/// label of `v` right after the label of `u`: `((L(v) - L(u) - 1) mod r) + 1`.
pub fn step_cost_f(u: StateId, v: StateId, params: &ConstraintParams) -> Result<usize> {
    let r = params.r();
    let high = params.state_count() / r;
    let is_edge = u.is_valid(params) && v.is_valid(params) && v != u && v.0 / r == u.0 % high;
    if !is_edge {
        return Err(Error::NoSuchEdge { from: u.0, to: v.0 });
    }
    Ok(cyclic_step(u.label(params), v.label(params), r))
}

#[inline]
pub(crate) fn cyclic_step(from: Symbol, to: Symbol, r: usize) -> usize {
    (to as usize + 2 * r - from as usize - 1) % r + 1
}

/// `C = Σ_i π_i Σ_j Q_{ij} f(i, j)`, the per-symbol cost rate under the
/// canonical periodic reference.
pub fn expected_cost_rate(measure: &MarkovMeasure) -> f64 {
    let params = measure.params();
    params
        .states()
        .map(|i| {
            let inner: f64 = measure
                .row(i)
                .map(|(j, q)| q * cyclic_step(i.label(params), j.label(params), params.r()) as f64)
                .sum();
            measure.pi()[i.0] * inner
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReferenceCost {
    pub reference: String,
    pub cost: usize,
    /// 1-based competition rank (ties share a rank).
    pub rank: usize,
}

/// Batch cost under each reference, with ranks.
pub fn compare_references(
    strands: &[Vec<Symbol>],
    references: &[ReferenceSeq],
    exec: Execution,
) -> Result<Vec<ReferenceCost>> {
    let costs = references
        .iter()
        .map(|r| batch_cost(strands, r, exec))
        .collect::<Result<Vec<_>>>()?;
    Ok(references
        .iter()
        .zip(&costs)
        .map(|(r, &cost)| ReferenceCost {
            reference: r.to_string(),
            cost,
            rank: 1 + costs.iter().filter(|&&c| c < cost).count(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn acgt(s: &str) -> Vec<Symbol> {
        StrandFormat::Acgt.parse_word(s).unwrap()
    }

    #[test]
    fn three_strand_embeddings() {
        let reference = ReferenceSeq::finite(4, acgt("ACGTACGT")).unwrap();
        assert_eq!(greedy_embed(&acgt("CTACG"), &reference).unwrap(), vec![2, 4, 5, 6, 7]);
        assert_eq!(greedy_embed(&acgt("AGTA"), &reference).unwrap(), vec![1, 3, 4, 5]);
        assert_eq!(greedy_embed(&acgt("CTT"), &reference).unwrap(), vec![2, 4, 8]);
        let batch = vec![acgt("CTACG"), acgt("AGTA"), acgt("CTT")];
        assert_eq!(batch_cost(&batch, &reference, Execution::Sequential).unwrap(), 8);
    }

    #[test]
    fn periodic_embedding() {
        let reference = ReferenceSeq::canonical(2).unwrap();
        assert_eq!(greedy_embed(&[0, 0, 0], &reference).unwrap(), vec![1, 3, 5]);
        let eventual = ReferenceSeq::new(2, vec![1, 1], vec![0, 1]).unwrap();
        assert_eq!(greedy_embed(&[1, 0, 0, 1, 1], &eventual).unwrap(), vec![1, 3, 5, 6, 8]);
    }

    #[test]
    fn not_a_supersequence() {
        let reference = ReferenceSeq::finite(4, acgt("ACGTACGT")).unwrap();
        let batch = vec![acgt("AC"), acgt("TTT")];
        assert_eq!(
            batch_cost(&batch, &reference, Execution::Sequential),
            Err(Error::NotASupersequence { strand: 1, position: 2 })
        );
        let missing = ReferenceSeq::new_unchecked(3, vec![], vec![0, 1]).unwrap();
        assert!(greedy_embed(&[2], &missing).is_err());
    }

    #[test]
    fn empty_and_single() {
        let reference = ReferenceSeq::canonical(3).unwrap();
        assert_eq!(batch_cost(&[], &reference, Execution::Sequential).unwrap(), 0);
        let strand = vec![2, 0, 0, 1];
        let tau = greedy_embed(&strand, &reference).unwrap();
        assert_eq!(
            batch_cost(&[strand], &reference, Execution::Sequential).unwrap(),
            *tau.last().unwrap()
        );
    }

    #[test]
    fn canonical_references() {
        assert_eq!(ReferenceSeq::canonical(4).unwrap().cycle(), acgt("ACGT").as_slice());
        assert_eq!(ReferenceSeq::canonical(2).unwrap().cycle(), &[0, 1]);
        assert_eq!(ReferenceSeq::canonical(3).unwrap().cycle(), &[0, 1, 2]);
    }

    #[test]
    fn incomplete_cycle_rejected() {
        assert!(matches!(
            ReferenceSeq::periodic(3, vec![0, 1, 0]),
            Err(Error::InvalidReference(_))
        ));
        assert!(ReferenceSeq::periodic(2, vec![]).is_err());
        assert!(ReferenceSeq::periodic(2, vec![0, 2]).is_err());
    }

    #[test]
    fn reference_parsing() {
        let r = ReferenceSeq::parse("periodic:0123", 4, StrandFormat::Digits).unwrap();
        assert_eq!(r, ReferenceSeq::canonical(4).unwrap());
        let r = ReferenceSeq::parse("finite:ACGTACGT", 4, StrandFormat::Acgt).unwrap();
        assert_eq!(r.len(), Some(8));
        let r = ReferenceSeq::parse("eventual:00/01", 2, StrandFormat::Digits).unwrap();
        assert_eq!(r.symbol(5), Some(1));
        assert_eq!(r.to_spec(StrandFormat::Digits), "eventual:00/01");
        assert!(ReferenceSeq::parse("random", 2, StrandFormat::Digits).is_err());
    }

    #[test]
    fn step_costs() {
        let params = ConstraintParams::new(3, 3).unwrap();
        let s = |d: &[Symbol]| StateId::from_digits(d, &params).unwrap();
        assert_eq!(step_cost_f(s(&[0, 0, 0]), s(&[0, 0, 2]), &params).unwrap(), 2);
        assert_eq!(step_cost_f(s(&[0, 1, 0]), s(&[1, 0, 0]), &params).unwrap(), 3);
        assert_eq!(step_cost_f(s(&[1, 2, 0]), s(&[2, 0, 1]), &params).unwrap(), 1);
        assert_eq!(step_cost_f(s(&[1, 2, 2]), s(&[2, 2, 0]), &params).unwrap(), 1);
        assert!(matches!(
            step_cost_f(s(&[0, 0, 0]), s(&[0, 0, 0]), &params),
            Err(Error::NoSuchEdge { .. })
        ));
        assert!(step_cost_f(s(&[0, 0, 0]), s(&[1, 0, 0]), &params).is_err());
    }

    #[test]
    fn cost_rate_k1() {
        let m = MarkovMeasure::from_params(ConstraintParams::new(2, 1).unwrap()).unwrap();
        assert!((expected_cost_rate(&m) - 1.0).abs() < 1e-15);
        let m = MarkovMeasure::from_params(ConstraintParams::new(4, 1).unwrap()).unwrap();
        assert!((expected_cost_rate(&m) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn ranking() {
        let batch = vec![acgt("CTACG"), acgt("AGTA"), acgt("CTT")];
        let refs = vec![
            ReferenceSeq::finite(4, acgt("ACGTACGT")).unwrap(),
            ReferenceSeq::finite(4, acgt("CTACGTA")).unwrap(),
            ReferenceSeq::canonical(4).unwrap(),
        ];
        let table = compare_references(&batch, &refs, Execution::Sequential).unwrap();
        let costs: Vec<_> = table.iter().map(|c| (c.cost, c.rank)).collect();
        assert_eq!(costs, vec![(8, 2), (7, 1), (8, 2)]);
    }
}
