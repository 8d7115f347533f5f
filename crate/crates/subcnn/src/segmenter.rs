//! Byte-pair-encoding segmentation, plus character- and word-level
//! segmenters for comparison runs.
//!
//! BPE is used here as a word segmenter: merges join frequent adjacent
//! symbols inside words but never replace them with new codes, so the
//! learned table turns any text into a sequence of subword tokens whose
//! concatenation restores the input.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// One learned merge: `left` followed by `right` becomes `merged`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeRule {
    pub left: String,
    pub right: String,
    pub merged: String,
    /// 0-based learning order.
    pub rank: usize,
}

/// Ordered list of learned merge rules.
///
/// Learning may stop before the requested iteration count when no adjacent
/// pair occurs at least twice, so `rules.len() <= iterations`.
#[derive(Debug, Clone)]
pub struct MergeTable {
    rules: Vec<MergeRule>,
    iterations: usize,
    /// All symbols producible by this table: base characters observed at
    /// learning time plus every merged symbol.
    symbols: BTreeSet<String>,
    /// (left, right) -> rank of the earliest rule for that pair.
    rank_map: HashMap<(String, String), usize>,
}

impl PartialEq for MergeTable {
    fn eq(&self, other: &Self) -> bool {
        self.rules == other.rules && self.iterations == other.iterations
    }
}

impl MergeTable {
    /// Builds a table from explicit rules, validating the invariants:
    /// `merged == left ++ right` and ranks contiguous from 0.
    pub fn new(rules: Vec<MergeRule>, iterations: usize) -> Result<Self> {
        if rules.len() > iterations {
            return Err(Error::MergeTableFormat(format!(
                "{} rules exceed the declared iteration count {iterations}",
                rules.len()
            )));
        }
        let mut symbols = BTreeSet::new();
        for (i, rule) in rules.iter().enumerate() {
            if rule.rank != i {
                return Err(Error::MergeTableFormat(format!(
                    "rule {i} carries rank {}, ranks must be contiguous from 0",
                    rule.rank
                )));
            }
            if rule.merged != format!("{}{}", rule.left, rule.right) {
                return Err(Error::MergeTableFormat(format!(
                    "rule {i}: `{}` is not the concatenation of `{}` and `{}`",
                    rule.merged, rule.left, rule.right
                )));
            }
            for part in [&rule.left, &rule.right] {
                for ch in part.chars() {
                    symbols.insert(ch.to_string());
                }
            }
            symbols.insert(rule.merged.clone());
        }
        Ok(Self::assemble(rules, iterations, symbols))
    }

    fn assemble(rules: Vec<MergeRule>, iterations: usize, symbols: BTreeSet<String>) -> Self {
        let mut rank_map = HashMap::new();
        for rule in &rules {
            rank_map
                .entry((rule.left.clone(), rule.right.clone()))
                .or_insert(rule.rank);
        }
        MergeTable {
            rules,
            iterations,
            symbols,
            rank_map,
        }
    }

    pub fn rules(&self) -> &[MergeRule] {
        &self.rules
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn symbol_inventory(&self) -> &BTreeSet<String> {
        &self.symbols
    }

    /// Count of base (single-character) symbols in the inventory.
    pub fn base_symbol_count(&self) -> usize {
        self.symbols
            .iter()
            .filter(|s| s.chars().count() == 1)
            .count()
    }

    /// A table containing only the first `n` rules.
    pub fn prefix(&self, n: usize) -> MergeTable {
        let rules: Vec<MergeRule> = self.rules.iter().take(n).cloned().collect();
        MergeTable::new(rules, n.min(self.iterations)).expect("prefix of a valid table is valid")
    }

    /// Serializes as UTF-8 text: a `#bpe v1 N=<iterations>` header, then one
    /// `left<TAB>right` line per rule in rank order.
    pub fn to_file_string(&self) -> String {
        let mut out = format!("#bpe v1 N={}\n", self.iterations);
        for rule in &self.rules {
            out.push_str(&rule.left);
            out.push('\t');
            out.push_str(&rule.right);
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path.as_ref(), self.to_file_string())
            .map_err(|e| Error::io(path.as_ref(), e))
    }

    pub fn from_file_string(content: &str) -> Result<Self> {
        let mut lines = content.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::MergeTableFormat("empty merge table file".into()))?;
        let iterations = header
            .strip_prefix("#bpe v1 N=")
            .and_then(|n| n.parse::<usize>().ok())
            .ok_or_else(|| {
                Error::MergeTableFormat(format!(
                    "bad header `{header}` (expected `#bpe v1 N=<iterations>`)"
                ))
            })?;
        let mut rules = Vec::new();
        for (i, line) in lines.enumerate() {
            let (left, right) = line.split_once('\t').ok_or_else(|| {
                Error::MergeTableFormat(format!("rule line {} has no tab separator", i + 2))
            })?;
            if left.is_empty() || right.is_empty() {
                return Err(Error::MergeTableFormat(format!(
                    "rule line {} has an empty side",
                    i + 2
                )));
            }
            rules.push(MergeRule {
                left: left.to_string(),
                right: right.to_string(),
                merged: format!("{left}{right}"),
                rank: i,
            });
        }
        MergeTable::new(rules, iterations)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let content =
            fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Self::from_file_string(&content)
    }
}

/// Learns merge rules greedily from a corpus of normalized lines.
///
/// Each iteration counts every adjacent symbol pair inside word boundaries
/// across the whole corpus in one left-to-right scan, merges the most
/// frequent pair everywhere (left-to-right, non-overlapping), and records
/// the rule. Ties go to the pair first encountered in corpus scan order.
/// Learning stops early once the best pair occurs fewer than twice.
pub fn bpe_learn(corpus: &[impl AsRef<str>], iterations: usize) -> MergeTable {
    // intern symbols so the hot counting loop works on integer pairs
    let mut sym_text: Vec<String> = Vec::new();
    let mut sym_id: HashMap<String, u32> = HashMap::new();
    let mut intern = |s: String, sym_text: &mut Vec<String>, sym_id: &mut HashMap<String, u32>| {
        if let Some(&id) = sym_id.get(&s) {
            id
        } else {
            let id = sym_text.len() as u32;
            sym_id.insert(s.clone(), id);
            sym_text.push(s);
            id
        }
    };

    let mut words: Vec<Vec<u32>> = Vec::new();
    for line in corpus {
        for word in line.as_ref().split_whitespace() {
            words.push(
                word.chars()
                    .map(|c| intern(c.to_string(), &mut sym_text, &mut sym_id))
                    .collect(),
            );
        }
    }
    let mut symbols: BTreeSet<String> = sym_text.iter().cloned().collect();

    let mut rules = Vec::new();
    for rank in 0..iterations {
        // count(pair) and the scan position of its first occurrence
        let mut counts: HashMap<(u32, u32), (usize, usize)> = HashMap::new();
        let mut pos = 0usize;
        for word in &words {
            for pair in word.windows(2) {
                let entry = counts.entry((pair[0], pair[1])).or_insert((0, pos));
                entry.0 += 1;
                pos += 1;
            }
        }
        let best = counts
            .into_iter()
            .max_by(|a, b| (a.1 .0).cmp(&b.1 .0).then((b.1 .1).cmp(&a.1 .1)));
        let Some(((left, right), (count, _))) = best else {
            break;
        };
        if count < 2 {
            break;
        }

        let merged_text = format!("{}{}", sym_text[left as usize], sym_text[right as usize]);
        let merged = intern(merged_text.clone(), &mut sym_text, &mut sym_id);
        symbols.insert(merged_text);
        rules.push(MergeRule {
            left: sym_text[left as usize].clone(),
            right: sym_text[right as usize].clone(),
            merged: sym_text[merged as usize].clone(),
            rank,
        });

        for word in &mut words {
            if word.len() < 2 {
                continue;
            }
            let mut out = Vec::with_capacity(word.len());
            let mut i = 0;
            while i < word.len() {
                if i + 1 < word.len() && word[i] == left && word[i + 1] == right {
                    out.push(merged);
                    i += 2;
                } else {
                    out.push(word[i]);
                    i += 1;
                }
            }
            *word = out;
        }
    }

    MergeTable::assemble(rules, iterations, symbols)
}

/// Segments one whitespace-delimited word with the merge table.
fn apply_word(table: &MergeTable, word: &str) -> Vec<String> {
    let mut syms: Vec<String> = word.chars().map(|c| c.to_string()).collect();
    if syms.len() < 2 {
        return syms;
    }
    // Rules fire in rank order, each merging all of its non-overlapping
    // occurrences left to right; `floor` mirrors the single in-order pass of
    // the learning loop, so applying the table to its own training corpus
    // reproduces the learner's final state.
    let mut floor = 0usize;
    loop {
        let mut best: Option<usize> = None;
        for pair in syms.windows(2) {
            if let Some(&rank) = table.rank_map.get(&(pair[0].clone(), pair[1].clone())) {
                if rank >= floor && best.is_none_or(|b| rank < b) {
                    best = Some(rank);
                }
            }
        }
        let Some(rank) = best else {
            break;
        };
        let rule = &table.rules[rank];
        let mut out = Vec::with_capacity(syms.len());
        let mut i = 0;
        while i < syms.len() {
            if i + 1 < syms.len() && syms[i] == rule.left && syms[i + 1] == rule.right {
                out.push(rule.merged.clone());
                i += 2;
            } else {
                out.push(std::mem::take(&mut syms[i]));
                i += 1;
            }
        }
        syms = out;
        floor = rank + 1;
        if syms.len() < 2 {
            break;
        }
    }
    syms
}

/// Segments normalized text into per-word token groups.
///
/// Joining each group with nothing and the groups with single spaces
/// restores the input exactly.
pub fn bpe_apply_words(table: &MergeTable, text: &str) -> Vec<Vec<String>> {
    text.split_whitespace()
        .map(|w| apply_word(table, w))
        .collect()
}

/// Segments normalized text into a flat subword token sequence.
///
/// Characters never seen at learning time pass through as single-character
/// tokens.
pub fn bpe_apply(table: &MergeTable, text: &str) -> Vec<String> {
    bpe_apply_words(table, text).into_iter().flatten().collect()
}

/// Token emitted by [`char_segment`] for each whitespace scalar.
pub const SPACE_TOKEN: &str = "\u{2420}";

/// Splits text into Unicode scalar values; whitespace becomes [`SPACE_TOKEN`].
pub fn char_segment(text: &str) -> Vec<String> {
    text.chars()
        .map(|c| {
            if c.is_whitespace() {
                SPACE_TOKEN.to_string()
            } else {
                c.to_string()
            }
        })
        .collect()
}

/// Splits on whitespace and peels trailing `.,!?;:` off as separate tokens.
pub fn word_segment(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for word in text.split_whitespace() {
        let mut base = word;
        let mut tail: Vec<char> = Vec::new();
        while let Some(c) = base.chars().last() {
            if ".,!?;:".contains(c) {
                tail.push(c);
                base = &base[..base.len() - c.len_utf8()];
            } else {
                break;
            }
        }
        if !base.is_empty() {
            tokens.push(base.to_string());
        }
        tokens.extend(tail.iter().rev().map(|c| c.to_string()));
    }
    tokens
}

/// Segmentation strategy selector used by the training/eval pipeline.
#[derive(Debug, Clone)]
pub enum TextSegmenter {
    Subword(MergeTable),
    Char,
    Word,
}

impl TextSegmenter {
    pub fn segment(&self, text: &str) -> Vec<String> {
        match self {
            TextSegmenter::Subword(table) => bpe_apply(table, text),
            TextSegmenter::Char => char_segment(text),
            TextSegmenter::Word => word_segment(text),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAPER_CORPUS: &str = "workers work in workshop.";

    #[test]
    fn paper_trace_learns_wo_wor_work() {
        let table = bpe_learn(&[PAPER_CORPUS], 3);
        let pairs: Vec<(&str, &str)> = table
            .rules()
            .iter()
            .map(|r| (r.left.as_str(), r.right.as_str()))
            .collect();
        assert_eq!(pairs, vec![("w", "o"), ("wo", "r"), ("wor", "k")]);

        let tokens = bpe_apply(&table, PAPER_CORPUS);
        assert_eq!(
            tokens.join(" "),
            "work e r s work i n work s h o p ."
        );
    }

    #[test]
    fn learning_stops_when_no_pair_repeats() {
        // after three merges every remaining pair in the trace corpus is a
        // singleton, so extra iterations change nothing
        let table = bpe_learn(&[PAPER_CORPUS], 50);
        assert_eq!(table.rules().len(), 3);
        assert_eq!(table.iterations(), 50);
    }

    #[test]
    fn empty_corpus_gives_empty_table() {
        let table = bpe_learn(&Vec::<String>::new(), 10);
        assert!(table.rules().is_empty());
    }

    #[test]
    fn overlapping_run_merges_left_to_right() {
        let table = bpe_learn(&["aaaa"], 1);
        assert_eq!(table.rules().len(), 1);
        assert_eq!(
            (table.rules()[0].left.as_str(), table.rules()[0].right.as_str()),
            ("a", "a")
        );
        assert_eq!(bpe_apply(&table, "aaaa"), vec!["aa", "aa"]);
    }

    #[test]
    fn empty_table_splits_into_characters() {
        let table = MergeTable::new(vec![], 0).unwrap();
        assert_eq!(bpe_apply(&table, "abc"), vec!["a", "b", "c"]);
    }

    #[test]
    fn apply_follows_rank_order() {
        let table = bpe_learn(&[PAPER_CORPUS], 3);
        assert_eq!(bpe_apply(&table, "working"), vec!["work", "i", "n", "g"]);
    }

    #[test]
    fn unseen_characters_pass_through() {
        let table = bpe_learn(&[PAPER_CORPUS], 3);
        assert_eq!(bpe_apply(&table, "zq"), vec!["z", "q"]);
    }

    /// Reference learner: no interning, no tricks; recounts and rescans the
    /// corpus with plain string vectors every iteration.
    fn reference_learn(corpus: &[&str], iterations: usize) -> (Vec<(String, String)>, Vec<Vec<String>>) {
        let mut words: Vec<Vec<String>> = corpus
            .iter()
            .flat_map(|l| l.split_whitespace())
            .map(|w| w.chars().map(|c| c.to_string()).collect())
            .collect();
        let mut rules = Vec::new();
        for _ in 0..iterations {
            let mut counts: Vec<((String, String), usize)> = Vec::new();
            for w in &words {
                for i in 0..w.len().saturating_sub(1) {
                    let key = (w[i].clone(), w[i + 1].clone());
                    if let Some(e) = counts.iter_mut().find(|(k, _)| *k == key) {
                        e.1 += 1;
                    } else {
                        counts.push((key, 1));
                    }
                }
            }
            // first-encountered order is the vec order; strictly-greater
            // comparison keeps the earliest pair on ties
            let mut best: Option<((String, String), usize)> = None;
            for (k, c) in &counts {
                if best.as_ref().map_or(true, |(_, bc)| c > bc) {
                    best = Some((k.clone(), *c));
                }
            }
            let Some(best) = best else {
                break;
            };
            if best.1 < 2 {
                break;
            }
            let (l, r) = best.0.clone();
            let merged = format!("{l}{r}");
            for w in &mut words {
                let mut out: Vec<String> = Vec::new();
                let mut i = 0;
                while i < w.len() {
                    if i + 1 < w.len() && w[i] == l && w[i + 1] == r {
                        out.push(merged.clone());
                        i += 2;
                    } else {
                        out.push(w[i].clone());
                        i += 1;
                    }
                }
                *w = out;
            }
            rules.push(best.0);
        }
        (rules, words)
    }

    #[test]
    fn learner_matches_reference_and_apply_matches_final_state() {
        let corpus = [
            "the cat sat on the mat",
            "the bats chatter at the cats",
            "that hat is the cats hat",
        ];
        let n = 12;
        let (ref_rules, ref_words) = reference_learn(&corpus, n);
        let table = bpe_learn(&corpus, n);
        let got_rules: Vec<(String, String)> = table
            .rules()
            .iter()
            .map(|r| (r.left.clone(), r.right.clone()))
            .collect();
        assert_eq!(got_rules, ref_rules);

        // learn/apply consistency: applying the table to the corpus must
        // reproduce the learning loop's final token state word for word
        let mut applied: Vec<Vec<String>> = Vec::new();
        for line in &corpus {
            applied.extend(bpe_apply_words(&table, line));
        }
        assert_eq!(applied, ref_words);
    }

    #[test]
    fn reconstruction_restores_input() {
        let corpus = ["workers work in workshop.", "play played playing"];
        let table = bpe_learn(&corpus, 20);
        for text in [
            "workers work in workshop.",
            "playing the drums on rockband made it look much easier than it is.",
        ] {
            let groups = bpe_apply_words(&table, text);
            let rebuilt: Vec<String> = groups.iter().map(|g| g.concat()).collect();
            assert_eq!(rebuilt.join(" "), text);
        }
    }

    #[test]
    fn token_count_is_non_increasing_in_iterations() {
        let corpus = ["workers work in workshop.", "working is working"];
        let full = bpe_learn(&corpus, 30);
        let text = "workers working in workshops.";
        let mut prev = usize::MAX;
        for n in 0..=full.rules().len() {
            let count = bpe_apply(&full.prefix(n), text).len();
            assert!(count <= prev, "N={n}: {count} > {prev}");
            prev = count;
        }
    }

    #[test]
    fn file_roundtrip_preserves_table() {
        let table = bpe_learn(&[PAPER_CORPUS], 3);
        let text = table.to_file_string();
        assert!(text.starts_with("#bpe v1 N=3\n"));
        assert!(text.contains("w\to\n"));
        let loaded = MergeTable::from_file_string(&text).unwrap();
        assert_eq!(loaded, table);
    }

    #[test]
    fn bad_header_is_rejected() {
        assert!(MergeTable::from_file_string("nonsense\nw\to\n").is_err());
        assert!(MergeTable::from_file_string("").is_err());
        assert!(MergeTable::from_file_string("#bpe v1 N=1\nw o\n").is_err());
    }

    #[test]
    fn char_segment_cases() {
        assert_eq!(char_segment("ab c"), vec!["a", "b", SPACE_TOKEN, "c"]);
        assert!(char_segment("").is_empty());
        assert_eq!(char_segment("héllo"), vec!["h", "é", "l", "l", "o"]);
    }

    #[test]
    fn word_segment_cases() {
        assert_eq!(word_segment("hello world"), vec!["hello", "world"]);
        assert_eq!(word_segment("it is."), vec!["it", "is", "."]);
        assert!(word_segment("").is_empty());
        assert_eq!(word_segment("wait?!"), vec!["wait", "?", "!"]);
    }

    #[test]
    fn symbol_inventory_tracks_base_and_merged() {
        let table = bpe_learn(&[PAPER_CORPUS], 3);
        let inv = table.symbol_inventory();
        assert!(inv.contains("w") && inv.contains("work") && inv.contains("."));
        // base chars: w o r k e s i n h p . = 11
        assert_eq!(table.base_symbol_count(), 11);
        assert_eq!(inv.len(), 11 + 3);
    }
}
