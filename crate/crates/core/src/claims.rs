//! Claim data model, claim-file ingestion and the derived indexes.
//!
//! A [`ClaimTable`] holds the raw positive claims exactly as ingested. A
//! [`DerivedView`] is built once from it and holds every index the
//! algorithms need: per-object universes, mutual-exclusion negative claims,
//! claimer/disclaimer sets and source coverage. Both are immutable after
//! construction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{self, BufRead, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClaimsError {
    #[error("line {line}: expected {expected} columns, found {found}")]
    ColumnCount { line: usize, expected: usize, found: usize },
    #[error("line {line}: empty {field}")]
    EmptyField { line: usize, field: &'static str },
    #[error("claim stream contains no rows")]
    EmptyTable,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Delimiter and header layout of a claim or truth file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClaimFormat {
    pub delimiter: char,
    pub has_header: bool,
}

impl Default for ClaimFormat {
    fn default() -> Self {
        Self {
            delimiter: '\t',
            has_header: false,
        }
    }
}

/// Values are atomic symbols compared after trimming and case folding.
pub fn canonical_value(raw: &str) -> String {
    raw.trim().to_lowercase()
}

fn canonical_id(raw: &str) -> String {
    raw.trim().to_string()
}

/// Splits the data rows of a delimited stream, skipping blank lines, `#`
/// comments and the optional header. Yields `(line_number, fields)`.
fn read_rows<R: BufRead>(
    reader: R,
    format: ClaimFormat,
    columns: usize,
    mut row: impl FnMut(usize, Vec<&str>) -> Result<(), ClaimsError>,
) -> Result<(), ClaimsError> {
    let mut header_pending = format.has_header;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if header_pending {
            header_pending = false;
            continue;
        }
        let fields: Vec<&str> = trimmed.split(format.delimiter).collect();
        if fields.len() != columns {
            return Err(ClaimsError::ColumnCount {
                line: line_no,
                expected: columns,
                found: fields.len(),
            });
        }
        row(line_no, fields)?;
    }
    Ok(())
}

fn require(line: usize, field: &'static str, raw: &str) -> Result<(), ClaimsError> {
    if raw.trim().is_empty() {
        Err(ClaimsError::EmptyField { line, field })
    } else {
        Ok(())
    }
}

/// Raw positive claims: which source asserts which values on which object.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClaimTable {
    objects: BTreeSet<String>,
    sources: BTreeSet<String>,
    positive: BTreeMap<(String, String), BTreeSet<String>>,
}

impl ClaimTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one claimed value. Identifiers are trimmed and the value is
    /// canonicalized; empty identifiers or values are ignored.
    pub fn insert(&mut self, source: &str, object: &str, value: &str) {
        let (source, object, value) = (canonical_id(source), canonical_id(object), canonical_value(value));
        if source.is_empty() || object.is_empty() || value.is_empty() {
            return;
        }
        self.sources.insert(source.clone());
        self.objects.insert(object.clone());
        self.positive.entry((source, object)).or_default().insert(value);
    }

    pub fn is_empty(&self) -> bool {
        self.positive.is_empty()
    }

    pub fn objects(&self) -> impl Iterator<Item = &str> {
        self.objects.iter().map(String::as_str)
    }

    pub fn sources(&self) -> impl Iterator<Item = &str> {
        self.sources.iter().map(String::as_str)
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn num_sources(&self) -> usize {
        self.sources.len()
    }

    /// `V_{s,o}`, the positive claims of `source` on `object`.
    pub fn positive_claims(&self, source: &str, object: &str) -> Option<&BTreeSet<String>> {
        self.positive.get(&(source.to_string(), object.to_string()))
    }

    /// Iterates `((source, object), values)` in lexicographic key order.
    pub fn claims(&self) -> impl Iterator<Item = (&str, &str, &BTreeSet<String>)> {
        self.positive
            .iter()
            .map(|((s, o), vals)| (s.as_str(), o.as_str(), vals))
    }
}

/// Reads `source_id, object_id, value` rows.
pub fn ingest_claims<R: BufRead>(reader: R, format: ClaimFormat) -> Result<ClaimTable, ClaimsError> {
    let mut table = ClaimTable::new();
    read_rows(reader, format, 3, |line, f| {
        require(line, "source_id", f[0])?;
        require(line, "object_id", f[1])?;
        require(line, "value", f[2])?;
        table.insert(f[0], f[1], f[2]);
        Ok(())
    })?;
    if table.is_empty() {
        return Err(ClaimsError::EmptyTable);
    }
    Ok(table)
}

pub fn write_claims<W: Write>(table: &ClaimTable, mut out: W, format: ClaimFormat) -> io::Result<()> {
    let d = format.delimiter;
    if format.has_header {
        writeln!(out, "source_id{d}object_id{d}value")?;
    }
    for (s, o, vals) in table.claims() {
        for v in vals {
            writeln!(out, "{s}{d}{o}{d}{v}")?;
        }
    }
    Ok(())
}

/// A set of values per object: identified truths `V_o*` or ground truth `V_o^g`.
///
/// An object may map to an empty set when every value was judged false.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TruthAssignment {
    pub truths: BTreeMap<String, BTreeSet<String>>,
}

impl TruthAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, object: &str) -> Option<&BTreeSet<String>> {
        self.truths.get(object)
    }

    pub fn objects(&self) -> impl Iterator<Item = &str> {
        self.truths.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.truths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truths.is_empty()
    }

    pub fn empty_objects(&self) -> impl Iterator<Item = &str> {
        self.truths
            .iter()
            .filter(|(_, v)| v.is_empty())
            .map(|(o, _)| o.as_str())
    }
}

/// Reads `object_id, value` rows (the ground-truth layout).
pub fn ingest_truths<R: BufRead>(reader: R, format: ClaimFormat) -> Result<TruthAssignment, ClaimsError> {
    let mut truths = TruthAssignment::new();
    read_rows(reader, format, 2, |line, f| {
        require(line, "object_id", f[0])?;
        require(line, "value", f[1])?;
        truths
            .truths
            .entry(canonical_id(f[0]))
            .or_default()
            .insert(canonical_value(f[1]));
        Ok(())
    })?;
    if truths.is_empty() {
        return Err(ClaimsError::EmptyTable);
    }
    Ok(truths)
}

/// Writes one `object_id, value` row per identified truth. Objects with an
/// empty truth set produce no rows.
pub fn write_truths<W: Write>(truths: &TruthAssignment, mut out: W, format: ClaimFormat) -> io::Result<()> {
    let d = format.delimiter;
    if format.has_header {
        writeln!(out, "object_id{d}value")?;
    }
    for (o, vals) in &truths.truths {
        for v in vals {
            writeln!(out, "{o}{d}{v}")?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectId(pub usize);

impl fmt::Display for SourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s#{}", self.0)
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "o#{}", self.0)
    }
}

/// One source's positive claims on one object, as indexes into the
/// object's universe.
#[derive(Debug, Clone)]
pub struct SourceClaim {
    pub source: SourceId,
    positive: Vec<usize>,
    mask: Vec<bool>,
}

impl SourceClaim {
    pub fn claims(&self, value: usize) -> bool {
        self.mask[value]
    }

    /// Sorted value indexes of `V_{s,o}`.
    pub fn positive(&self) -> &[usize] {
        &self.positive
    }

    /// Value indexes of `Ṽ_{s,o} = U_o − V_{s,o}`.
    pub fn negative(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, c)| !**c).map(|(i, _)| i)
    }

    pub fn positive_len(&self) -> usize {
        self.positive.len()
    }

    pub fn negative_len(&self) -> usize {
        self.mask.len() - self.positive.len()
    }
}

/// Everything known about one object: `U_o` and the claims made on it.
#[derive(Debug, Clone)]
pub struct ObjectEntry {
    pub name: String,
    /// `U_o`, sorted.
    pub universe: Vec<String>,
    /// One entry per source in `S_o`, ordered by source id.
    pub claims: Vec<SourceClaim>,
}

impl ObjectEntry {
    /// Position of `source` in [`ObjectEntry::claims`].
    pub fn slot(&self, source: SourceId) -> Option<usize> {
        self.claims.binary_search_by_key(&source, |c| c.source).ok()
    }

    pub fn value_index(&self, value: &str) -> Option<usize> {
        self.universe.binary_search_by(|v| v.as_str().cmp(value)).ok()
    }

    pub fn num_sources(&self) -> usize {
        self.claims.len()
    }
}

/// Reverse indexes and mutual-exclusion negative claims over a [`ClaimTable`].
#[derive(Debug, Clone)]
pub struct DerivedView {
    sources: Vec<String>,
    objects: Vec<ObjectEntry>,
    objects_of_source: Vec<Vec<(ObjectId, usize)>>,
    coverage: Vec<f64>,
}

pub fn derive_view(claims: &ClaimTable) -> Result<DerivedView, ClaimsError> {
    if claims.is_empty() {
        return Err(ClaimsError::EmptyTable);
    }
    let sources: Vec<String> = claims.sources().map(str::to_string).collect();
    let source_index: BTreeMap<&str, SourceId> = sources
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), SourceId(i)))
        .collect();

    let mut per_object: BTreeMap<&str, Vec<(SourceId, &BTreeSet<String>)>> = BTreeMap::new();
    for (s, o, vals) in claims.claims() {
        per_object.entry(o).or_default().push((source_index[s], vals));
    }

    let mut objects = Vec::with_capacity(per_object.len());
    let mut objects_of_source = vec![Vec::new(); sources.len()];
    for (oid, (name, mut entries)) in per_object.into_iter().enumerate() {
        entries.sort_by_key(|(s, _)| *s);
        let universe: Vec<String> = entries
            .iter()
            .flat_map(|(_, vals)| vals.iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let claims: Vec<SourceClaim> = entries
            .iter()
            .enumerate()
            .map(|(slot, (source, vals))| {
                objects_of_source[source.0].push((ObjectId(oid), slot));
                let mut mask = vec![false; universe.len()];
                let positive: Vec<usize> = vals
                    .iter()
                    .map(|v| {
                        let i = universe.binary_search(v).expect("value in universe");
                        mask[i] = true;
                        i
                    })
                    .collect();
                SourceClaim {
                    source: *source,
                    positive,
                    mask,
                }
            })
            .collect();
        objects.push(ObjectEntry {
            name: name.to_string(),
            universe,
            claims,
        });
    }

    let n_objects = objects.len() as f64;
    let coverage = objects_of_source
        .iter()
        .map(|objs| objs.len() as f64 / n_objects)
        .collect();

    Ok(DerivedView {
        sources,
        objects,
        objects_of_source,
        coverage,
    })
}

impl DerivedView {
    pub fn num_sources(&self) -> usize {
        self.sources.len()
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn source_ids(&self) -> impl Iterator<Item = SourceId> {
        (0..self.sources.len()).map(SourceId)
    }

    pub fn object_ids(&self) -> impl Iterator<Item = ObjectId> {
        (0..self.objects.len()).map(ObjectId)
    }

    pub fn source_name(&self, s: SourceId) -> &str {
        &self.sources[s.0]
    }

    pub fn object_name(&self, o: ObjectId) -> &str {
        &self.objects[o.0].name
    }

    pub fn source_id(&self, name: &str) -> Option<SourceId> {
        self.sources
            .binary_search_by(|s| s.as_str().cmp(name))
            .ok()
            .map(SourceId)
    }

    pub fn object_id(&self, name: &str) -> Option<ObjectId> {
        self.objects
            .binary_search_by(|o| o.name.as_str().cmp(name))
            .ok()
            .map(ObjectId)
    }

    pub fn object(&self, o: ObjectId) -> &ObjectEntry {
        &self.objects[o.0]
    }

    pub fn objects(&self) -> &[ObjectEntry] {
        &self.objects
    }

    /// `U_o`.
    pub fn universe(&self, o: ObjectId) -> &[String] {
        &self.objects[o.0].universe
    }

    pub fn claim(&self, s: SourceId, o: ObjectId) -> Option<&SourceClaim> {
        let entry = &self.objects[o.0];
        entry.slot(s).map(|slot| &entry.claims[slot])
    }

    pub fn positive_claims(&self, s: SourceId, o: ObjectId) -> Option<BTreeSet<&str>> {
        let universe = self.universe(o);
        self.claim(s, o)
            .map(|c| c.positive().iter().map(|&v| universe[v].as_str()).collect())
    }

    /// `Ṽ_{s,o}`; `None` when `s` makes no claim on `o`.
    pub fn negative_claims(&self, s: SourceId, o: ObjectId) -> Option<BTreeSet<&str>> {
        let universe = self.universe(o);
        self.claim(s, o)
            .map(|c| c.negative().map(|v| universe[v].as_str()).collect())
    }

    /// `S_o`.
    pub fn sources_of_object(&self, o: ObjectId) -> impl Iterator<Item = SourceId> + '_ {
        self.objects[o.0].claims.iter().map(|c| c.source)
    }

    /// `S_v`.
    pub fn claimers_of_value(&self, o: ObjectId, value: usize) -> impl Iterator<Item = SourceId> + '_ {
        self.objects[o.0]
            .claims
            .iter()
            .filter(move |c| c.claims(value))
            .map(|c| c.source)
    }

    /// `S_ṽ`.
    pub fn disclaimers_of_value(&self, o: ObjectId, value: usize) -> impl Iterator<Item = SourceId> + '_ {
        self.objects[o.0]
            .claims
            .iter()
            .filter(move |c| !c.claims(value))
            .map(|c| c.source)
    }

    /// `O_s` with the slot of `s` inside each object's claim list.
    pub fn objects_of_source(&self, s: SourceId) -> &[(ObjectId, usize)] {
        &self.objects_of_source[s.0]
    }

    /// `Cov(s) = |O_s| / |O|`, always in `(0, 1]`.
    pub fn coverage(&self, s: SourceId) -> f64 {
        self.coverage[s.0]
    }
}
