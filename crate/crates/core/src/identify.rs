//! Resolving raw artifact descriptions to canonical journals.
//!
//! Resolution tries, in order: an exact ISSN hit in the registry, the
//! equivalence table (ISSN or normalized-title variants), and finally a
//! fuzzy title match on normalized edit distance. A fuzzy match is only
//! accepted when it clears the threshold and beats the runner-up by
//! [`FUZZY_MARGIN`].
//!
//! Fuzzy candidates are the journals sharing a title word (three letters
//! or more) or the first four ISSN digits with the query. Words common
//! enough to match a large part of the registry are ignored unless
//! nothing else is shared.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{self, Read};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::graph::JournalId;
use crate::ingest::RawArtifactRef;

pub const DEFAULT_THRESHOLD: f64 = 0.90;
/// Required lead of the best fuzzy candidate over the second best.
pub const FUZZY_MARGIN: f64 = 0.02;

#[derive(Debug, Error)]
pub enum IdentifyError {
    #[error("duplicate journal id {0}")]
    DuplicateJournal(JournalId),
    #[error("journal {journal}: invalid ISSN {issn:?}")]
    InvalidIssn { journal: JournalId, issn: String },
    #[error("equivalence {variant:?} points to unknown journal {journal}")]
    UnknownJournal { variant: String, journal: JournalId },
    #[error("line {line}: {reason}")]
    Parse { line: u64, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Case-folds, strips diacritics, turns punctuation into spaces and
/// collapses whitespace. Idempotent.
pub fn normalize_title(title: &str) -> String {
    let mut out = String::with_capacity(title.len());
    let mut pending_space = false;
    for c in title.nfkd().filter(|c| !is_combining_mark(*c)) {
        if c.is_alphanumeric() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.extend(c.to_lowercase());
        } else {
            pending_space = true;
        }
    }
    out
}

/// ISSN check: eight characters once hyphens are removed, seven digits and
/// a check character (`X` = 10), with `Σ digit_i · (8 − i) ≡ 0 (mod 11)`.
pub fn validate_issn(issn: &str) -> bool {
    let chars: Vec<char> = issn.chars().filter(|&c| c != '-').collect();
    if chars.len() != 8 {
        return false;
    }
    let mut sum = 0u32;
    for (i, &c) in chars.iter().enumerate() {
        let v = match c {
            '0'..='9' => c as u32 - '0' as u32,
            'X' | 'x' if i == 7 => 10,
            _ => return false,
        };
        sum += v * (8 - i as u32);
    }
    sum % 11 == 0
}

/// Canonical `NNNN-NNNC` spelling of a valid ISSN.
pub fn normalize_issn(issn: &str) -> Option<String> {
    if !validate_issn(issn.trim()) {
        return None;
    }
    let flat: String = issn.trim().chars().filter(|&c| c != '-').map(|c| c.to_ascii_uppercase()).collect();
    Some(format!("{}-{}", &flat[..4], &flat[4..]))
}

/// `1 − levenshtein(a, b) / max(|a|, |b|)` over characters; two empty
/// strings are identical.
pub fn title_similarity(a: &str, b: &str) -> f64 {
    let max = a.chars().count().max(b.chars().count());
    if max == 0 {
        return 1.0;
    }
    1.0 - strsim::levenshtein(a, b) as f64 / max as f64
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalJournal {
    pub journal_id: JournalId,
    pub canonical_title: String,
    pub issns: BTreeSet<String>,
}

impl CanonicalJournal {
    /// Normalizes the title and validates every ISSN.
    pub fn new(
        journal_id: JournalId,
        title: &str,
        issns: impl IntoIterator<Item = impl AsRef<str>>,
    ) -> Result<Self, IdentifyError> {
        let mut set = BTreeSet::new();
        for issn in issns {
            let issn = issn.as_ref();
            match normalize_issn(issn) {
                Some(n) => {
                    set.insert(n);
                }
                None => return Err(IdentifyError::InvalidIssn { journal: journal_id, issn: issn.to_owned() }),
            }
        }
        Ok(CanonicalJournal { journal_id, canonical_title: normalize_title(title), issns: set })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMethod {
    ExactIssn,
    EquivalenceTable,
    FuzzyTitle,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchDecision {
    pub raw: RawArtifactRef,
    pub resolved: Option<JournalId>,
    pub method: MatchMethod,
    pub score: f64,
}

/// Canonical journals plus the variant equivalence table, indexed for
/// resolution. Read-only once built.
#[derive(Debug, Clone)]
pub struct Registry {
    journals: Vec<CanonicalJournal>,
    by_id: HashMap<JournalId, usize>,
    by_issn: HashMap<String, usize>,
    by_token: HashMap<String, Vec<usize>>,
    by_issn_prefix: HashMap<String, Vec<usize>>,
    equivalences: HashMap<String, usize>,
}

fn block_tokens(normalized: &str) -> impl Iterator<Item = &str> {
    normalized.split(' ').filter(|t| t.chars().count() >= 3)
}

fn equivalence_key(variant: &str) -> String {
    normalize_issn(variant).unwrap_or_else(|| normalize_title(variant))
}

impl Registry {
    pub fn new(
        journals: Vec<CanonicalJournal>,
        equivalences: impl IntoIterator<Item = (String, JournalId)>,
    ) -> Result<Self, IdentifyError> {
        let mut by_id = HashMap::new();
        let mut by_issn = HashMap::new();
        let mut by_token: HashMap<String, Vec<usize>> = HashMap::new();
        let mut by_issn_prefix: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, j) in journals.iter().enumerate() {
            if by_id.insert(j.journal_id.clone(), i).is_some() {
                return Err(IdentifyError::DuplicateJournal(j.journal_id.clone()));
            }
            for issn in &j.issns {
                by_issn.insert(issn.clone(), i);
                by_issn_prefix.entry(issn[..4].to_owned()).or_default().push(i);
            }
            for t in block_tokens(&j.canonical_title) {
                let list = by_token.entry(t.to_owned()).or_default();
                if list.last() != Some(&i) {
                    list.push(i);
                }
            }
        }
        let mut eq = HashMap::new();
        for (variant, journal) in equivalences {
            let idx = *by_id
                .get(&journal)
                .ok_or_else(|| IdentifyError::UnknownJournal { variant: variant.clone(), journal: journal.clone() })?;
            eq.insert(equivalence_key(&variant), idx);
        }
        Ok(Registry { journals, by_id, by_issn, by_token, by_issn_prefix, equivalences: eq })
    }

    /// Loads `journal_id,canonical_title,issn_list` and
    /// `variant_title_or_issn,journal_id` files.
    pub fn read<R1: Read, R2: Read>(registry: R1, equivalences: Option<R2>) -> Result<Self, IdentifyError> {
        let mut journals = Vec::new();
        for (line, rec) in read_rows(registry, &["journal_id", "canonical_title", "issn_list"])? {
            let issns: Vec<&str> = rec[2].split(';').map(str::trim).filter(|s| !s.is_empty()).collect();
            let j = CanonicalJournal::new(JournalId::new(&rec[0]), &rec[1], issns).map_err(|e| match e {
                IdentifyError::InvalidIssn { .. } => IdentifyError::Parse { line, reason: e.to_string() },
                other => other,
            })?;
            journals.push(j);
        }
        let mut eq = Vec::new();
        if let Some(r) = equivalences {
            for (_, rec) in read_rows(r, &["variant_title_or_issn", "journal_id"])? {
                eq.push((rec[0].to_owned(), JournalId::new(&rec[1])));
            }
        }
        Registry::new(journals, eq)
    }

    pub fn journals(&self) -> &[CanonicalJournal] {
        &self.journals
    }

    pub fn get(&self, id: &JournalId) -> Option<&CanonicalJournal> {
        self.by_id.get(id).map(|&i| &self.journals[i])
    }

    fn decided(&self, raw: &RawArtifactRef, idx: usize, method: MatchMethod, score: f64) -> MatchDecision {
        MatchDecision { raw: raw.clone(), resolved: Some(self.journals[idx].journal_id.clone()), method, score }
    }

    /// Resolves one artifact reference. Never fails: an unmatched reference
    /// yields [`MatchMethod::Unresolved`].
    pub fn resolve(&self, raw: &RawArtifactRef, threshold: f64) -> MatchDecision {
        let issn = raw.issn.as_deref().and_then(normalize_issn);
        if let Some(issn) = &issn {
            if let Some(&i) = self.by_issn.get(issn) {
                return self.decided(raw, i, MatchMethod::ExactIssn, 1.0);
            }
            if let Some(&i) = self.equivalences.get(issn) {
                return self.decided(raw, i, MatchMethod::EquivalenceTable, 1.0);
            }
        }
        let title = raw.title.as_deref().map(normalize_title).unwrap_or_default();
        if !title.is_empty() {
            if let Some(&i) = self.equivalences.get(&title) {
                return self.decided(raw, i, MatchMethod::EquivalenceTable, 1.0);
            }
        }

        let mut candidates: Vec<usize> = Vec::new();
        let common = (self.journals.len() / 20).max(50);
        let blocks: Vec<&Vec<usize>> = block_tokens(&title).filter_map(|t| self.by_token.get(t)).collect();
        let selective: Vec<&Vec<usize>> = blocks.iter().copied().filter(|b| b.len() <= common).collect();
        if selective.is_empty() {
            candidates.extend(blocks.into_iter().min_by_key(|b| b.len()).into_iter().flatten());
        } else {
            candidates.extend(selective.into_iter().flatten());
        }
        if let Some(issn) = &issn {
            candidates.extend(self.by_issn_prefix.get(&issn[..4]).into_iter().flatten());
        }
        candidates.sort_unstable();
        candidates.dedup();

        let mut best: Option<(f64, usize)> = None;
        let mut second = 0.0f64;
        if !title.is_empty() {
            for &c in &candidates {
                let s = title_similarity(&title, &self.journals[c].canonical_title);
                match best {
                    Some((b, _)) if s <= b => second = second.max(s),
                    Some((b, _)) => {
                        second = b;
                        best = Some((s, c));
                    }
                    None => best = Some((s, c)),
                }
            }
        }
        match best {
            Some((score, c)) if score >= threshold && score - second >= FUZZY_MARGIN - 1e-12 => {
                self.decided(raw, c, MatchMethod::FuzzyTitle, score)
            }
            Some((score, _)) => {
                MatchDecision { raw: raw.clone(), resolved: None, method: MatchMethod::Unresolved, score }
            }
            None => MatchDecision { raw: raw.clone(), resolved: None, method: MatchMethod::Unresolved, score: 0.0 },
        }
    }

    /// Resolves a bare journal reference as found in citation data: a
    /// registry journal id, an ISSN, or a title.
    pub fn resolve_journal_ref(&self, reference: &str, threshold: f64) -> Option<JournalId> {
        let id = JournalId::new(reference);
        if self.by_id.contains_key(&id) {
            return Some(id);
        }
        let mut raw = RawArtifactRef::new(reference);
        if validate_issn(reference.trim()) {
            raw = raw.with_issn(reference);
        } else {
            raw = raw.with_title(reference);
        }
        self.resolve(&raw, threshold).resolved
    }
}

fn read_rows<R: Read>(input: R, header: &[&str]) -> Result<Vec<(u64, csv::StringRecord)>, IdentifyError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(input);
    let mut rows = Vec::new();
    let mut first = true;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| IdentifyError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if first {
            first = false;
            if rec.iter().collect::<Vec<_>>() != header {
                return Err(IdentifyError::Parse { line, reason: format!("expected header {}", header.join(",")) });
            }
            continue;
        }
        if rec.len() != header.len() {
            return Err(IdentifyError::Parse { line, reason: format!("expected {} fields", header.len()) });
        }
        rows.push((line, rec));
    }
    Ok(rows)
}

/// Counts of match decisions by method.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub total: u64,
    pub by_method: BTreeMap<MatchMethod, u64>,
    pub unresolved_rate: f64,
}

impl QualityReport {
    pub fn add(&mut self, method: MatchMethod, count: u64) {
        self.total += count;
        *self.by_method.entry(method).or_insert(0) += count;
        let unresolved = self.by_method.get(&MatchMethod::Unresolved).copied().unwrap_or(0);
        self.unresolved_rate = if self.total == 0 { 0.0 } else { unresolved as f64 / self.total as f64 };
    }

    pub fn from_decisions<'a>(decisions: impl IntoIterator<Item = &'a MatchDecision>) -> Self {
        let mut r = QualityReport::default();
        for d in decisions {
            r.add(d.method, 1);
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dp_levenshtein(a: &str, b: &str) -> usize {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for (i, row) in d.iter_mut().enumerate() {
            row[0] = i;
        }
        for j in 0..=b.len() {
            d[0][j] = j;
        }
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
                d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
            }
        }
        d[a.len()][b.len()]
    }

    fn registry() -> Registry {
        Registry::new(
            vec![
                CanonicalJournal::new("J1".into(), "Journal of Chemical Physics", ["0021-9606"]).unwrap(),
                CanonicalJournal::new("J2".into(), "Hearing Research", ["0378-5955"]).unwrap(),
                CanonicalJournal::new("J3".into(), "Journal of Applied Physics", Vec::<&str>::new()).unwrap(),
            ],
            vec![("J Chem Phys".to_owned(), JournalId::new("J1")), ("1234-5679".to_owned(), JournalId::new("J2"))],
        )
        .unwrap()
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(normalize_title("J. Chem.  Phys."), "j chem phys");
        assert_eq!(normalize_title(""), "");
        assert_eq!(normalize_title("Révue Générale"), "revue generale");
        let once = normalize_title("  Ångström--Letters (B) ");
        assert_eq!(once, "angstrom letters b");
        assert_eq!(normalize_title(&once), once);
    }

    #[test]
    fn issn_examples() {
        assert!(validate_issn("0378-5955"));
        assert!(!validate_issn("0378-5954"));
        assert!(!validate_issn("123"));
        assert_eq!(normalize_issn("03785955").as_deref(), Some("0378-5955"));
        // 2049-369X: 2*8+0*7+4*6+9*5+3*4+6*3+9*2+10 = 143 = 13 * 11
        assert!(validate_issn("2049-369X"));
        assert!(validate_issn("2049-369x"));
        assert!(!validate_issn("X049-3690"));
    }

    #[test]
    fn exact_issn_path() {
        let r = registry();
        let d = r.resolve(&RawArtifactRef::new("a").with_issn("0378-5955"), 0.9);
        assert_eq!(d.method, MatchMethod::ExactIssn);
        assert_eq!(d.score, 1.0);
        assert_eq!(d.resolved, Some(JournalId::new("J2")));
    }

    #[test]
    fn equivalence_paths() {
        let r = registry();
        let d = r.resolve(&RawArtifactRef::new("a").with_title("J. Chem. Phys."), 0.9);
        assert_eq!((d.method, d.resolved.clone()), (MatchMethod::EquivalenceTable, Some(JournalId::new("J1"))));
        let d = r.resolve(&RawArtifactRef::new("a").with_issn("1234-5679"), 0.9);
        assert_eq!((d.method, d.score), (MatchMethod::EquivalenceTable, 1.0));
    }

    #[test]
    fn fuzzy_path_matches_dp_oracle() {
        let r = registry();
        let raw = "journal of chem physics";
        let canon = "journal of chemical physics";
        let expected = 1.0 - dp_levenshtein(raw, canon) as f64 / canon.len().max(raw.len()) as f64;
        let second = 1.0 - dp_levenshtein(raw, "journal of applied physics") as f64 / 26f64.max(23.0);
        let d = r.resolve(&RawArtifactRef::new("a").with_title(raw), 0.8);
        assert!((d.score - expected).abs() < 1e-12);
        let accept = expected >= 0.8 && expected - second >= FUZZY_MARGIN;
        assert_eq!(d.method == MatchMethod::FuzzyTitle, accept);
        let d = r.resolve(&RawArtifactRef::new("a").with_title(raw), 0.9);
        assert_eq!(d.method == MatchMethod::FuzzyTitle, expected >= 0.9 && expected - second >= FUZZY_MARGIN);
    }

    #[test]
    fn tie_between_canonicals_is_unresolved() {
        let r = Registry::new(
            vec![
                CanonicalJournal::new("A".into(), "Acta Physica", Vec::<&str>::new()).unwrap(),
                CanonicalJournal::new("B".into(), "Acta Physica", Vec::<&str>::new()).unwrap(),
            ],
            vec![],
        )
        .unwrap();
        let d = r.resolve(&RawArtifactRef::new("x").with_title("acta physica"), 0.9);
        assert_eq!(d.method, MatchMethod::Unresolved);
        assert_eq!(d.resolved, None);
    }

    #[test]
    fn threshold_one_requires_equality() {
        let r = registry();
        let d = r.resolve(&RawArtifactRef::new("a").with_title("Hearing Researc"), 1.0);
        assert_eq!(d.method, MatchMethod::Unresolved);
        let d = r.resolve(&RawArtifactRef::new("a").with_title("HEARING research!"), 1.0);
        assert_eq!(d.method, MatchMethod::FuzzyTitle);
        assert_eq!(d.score, 1.0);
    }

    #[test]
    fn registry_validation() {
        assert!(matches!(
            CanonicalJournal::new("X".into(), "t", ["0378-5954"]),
            Err(IdentifyError::InvalidIssn { .. })
        ));
        let dup = Registry::new(
            vec![
                CanonicalJournal::new("A".into(), "a", Vec::<&str>::new()).unwrap(),
                CanonicalJournal::new("A".into(), "b", Vec::<&str>::new()).unwrap(),
            ],
            vec![],
        );
        assert!(matches!(dup, Err(IdentifyError::DuplicateJournal(_))));
        let unknown = Registry::new(vec![], vec![("v".into(), JournalId::new("nope"))]);
        assert!(matches!(unknown, Err(IdentifyError::UnknownJournal { .. })));
    }

    #[test]
    fn registry_files() {
        let reg = "journal_id,canonical_title,issn_list\nJ1,Journal of Chemical Physics,0021-9606;1089-7690\nJ2,Hearing Research,\n";
        let eq = "variant_title_or_issn,journal_id\nJCP,J1\n";
        let r = Registry::read(reg.as_bytes(), Some(eq.as_bytes())).unwrap();
        assert_eq!(r.journals().len(), 2);
        assert_eq!(r.get(&"J1".into()).unwrap().issns.len(), 2);
        assert_eq!(r.resolve_journal_ref("jcp", 0.9), Some(JournalId::new("J1")));
        assert_eq!(r.resolve_journal_ref("J2", 0.9), Some(JournalId::new("J2")));
        assert_eq!(r.resolve_journal_ref("1089-7690", 0.9), Some(JournalId::new("J1")));
    }

    #[test]
    fn quality_report_counts() {
        let r = registry();
        let ds = [
            r.resolve(&RawArtifactRef::new("a").with_issn("0378-5955"), 0.9),
            r.resolve(&RawArtifactRef::new("b").with_title("unknown things"), 0.9),
        ];
        let q = QualityReport::from_decisions(&ds);
        assert_eq!(q.total, 2);
        assert_eq!(q.by_method[&MatchMethod::Unresolved], 1);
        assert_eq!(q.unresolved_rate, 0.5);
    }
}
