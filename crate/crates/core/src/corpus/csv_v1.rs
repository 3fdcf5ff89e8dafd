use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{Corpus, CorpusError, CorpusFormat, DocType, DocumentRecord, SourceRecord, SourceType};

/// Exact header row of the CsvV1 corpus format.
pub const CSV_V1_HEADER: [&str; 13] = [
    "doc_id",
    "source_id",
    "source_title",
    "source_type",
    "doc_type",
    "year",
    "language",
    "title",
    "abstract",
    "author_keywords",
    "index_keywords",
    "references",
    "citation_count",
];

pub fn parse_corpus(path: &Path, format: CorpusFormat) -> Result<Corpus, CorpusError> {
    match format {
        CorpusFormat::CsvV1 => read_csv_v1(File::open(path)?),
    }
}

fn split_multi(field: &str) -> Vec<String> {
    field
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

struct PartialSource {
    title: String,
    source_type: Option<SourceType>,
    first_doc: String,
}

/// Parses a CsvV1 corpus.
///
/// `source_title` and `source_type` may be left blank on a row when another
/// row of the same source supplies them; a source never described anywhere is
/// reported as [`CorpusError::UnknownSource`].
pub fn read_csv_v1<R: Read>(input: R) -> Result<Corpus, CorpusError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input);

    let headers = reader.headers()?.clone();
    if headers.iter().map(str::trim).ne(CSV_V1_HEADER.iter().copied()) {
        return Err(CorpusError::MalformedRow {
            line: 1,
            reason: format!(
                "header must be exactly `{}`",
                CSV_V1_HEADER.join(",")
            ),
        });
    }

    let mut docs = Vec::new();
    let mut sources: BTreeMap<String, PartialSource> = BTreeMap::new();

    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let malformed = |reason: String| CorpusError::MalformedRow { line, reason };
        if record.len() != CSV_V1_HEADER.len() {
            return Err(malformed(format!(
                "expected {} fields, found {}",
                CSV_V1_HEADER.len(),
                record.len()
            )));
        }
        let field = |i: usize| record.get(i).unwrap_or("").trim();
        let require = |i: usize| -> Result<&str, CorpusError> {
            let v = field(i);
            if v.is_empty() {
                Err(malformed(format!("missing {}", CSV_V1_HEADER[i])))
            } else {
                Ok(v)
            }
        };

        let doc_id = require(0)?.to_string();
        let source_id = require(1)?.to_string();
        let doc_type: DocType = require(4)?.parse().map_err(malformed)?;
        let year: i32 = require(5)?
            .parse()
            .map_err(|_| malformed(format!("year {:?} is not an integer", field(5))))?;
        if !(1900..=2100).contains(&year) {
            return Err(malformed(format!("year {year} outside [1900, 2100]")));
        }
        let citation_count: u64 = match field(12) {
            "" => 0,
            v => v
                .parse()
                .map_err(|_| malformed(format!("citation_count {v:?} is not a non-negative integer")))?,
        };

        let source_title = field(2);
        let source_type = match field(3) {
            "" => None,
            v => Some(v.parse::<SourceType>().map_err(malformed)?),
        };
        let entry = sources.entry(source_id.clone()).or_insert_with(|| PartialSource {
            title: String::new(),
            source_type: None,
            first_doc: doc_id.clone(),
        });
        if !source_title.is_empty() {
            if entry.title.is_empty() {
                entry.title = source_title.to_string();
            } else if entry.title != source_title {
                return Err(malformed(format!(
                    "source {source_id:?} titled both {:?} and {source_title:?}",
                    entry.title
                )));
            }
        }
        if let Some(st) = source_type {
            match entry.source_type {
                None => entry.source_type = Some(st),
                Some(prev) if prev != st => {
                    return Err(malformed(format!(
                        "source {source_id:?} typed both {prev} and {st}"
                    )))
                }
                _ => {}
            }
        }

        let keywords = |i: usize| -> Vec<String> {
            split_multi(field(i))
                .into_iter()
                .filter(|k| !crate::descriptors::normalize_term(k).is_empty())
                .collect()
        };
        docs.push(DocumentRecord {
            doc_id,
            source_id,
            title: field(7).to_string(),
            abstract_text: field(8).to_string(),
            author_keywords: keywords(9),
            index_keywords: keywords(10),
            doc_type,
            year,
            language: field(6).to_string(),
            references: split_multi(field(11)),
            citation_count,
        });
    }

    let mut records = Vec::with_capacity(sources.len());
    for (source_id, p) in sources {
        let Some(source_type) = p.source_type else {
            return Err(CorpusError::UnknownSource {
                doc_id: p.first_doc,
                source_id,
            });
        };
        records.push(SourceRecord {
            title: if p.title.is_empty() { source_id.clone() } else { p.title },
            source_id,
            source_type,
            categories: Vec::new(),
        });
    }
    Corpus::from_parts(docs, records)
}

/// Writes a corpus back out in CsvV1 form, documents in corpus order.
pub fn write_csv_v1<W: Write>(corpus: &Corpus, out: W) -> Result<(), CorpusError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_V1_HEADER)?;
    for d in corpus.documents() {
        let src = corpus.source(&d.source_id).expect("corpus invariant: known source");
        w.write_record([
            d.doc_id.as_str(),
            d.source_id.as_str(),
            src.title.as_str(),
            &src.source_type.to_string(),
            &d.doc_type.to_string(),
            &d.year.to_string(),
            d.language.as_str(),
            d.title.as_str(),
            d.abstract_text.as_str(),
            &d.author_keywords.join(";"),
            &d.index_keywords.join(";"),
            &d.references.join(";"),
            &d.citation_count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the `source_id,category` sidecar (header row required).
pub fn load_categories<R: Read>(input: R) -> Result<BTreeMap<String, Vec<String>>, CorpusError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.iter().map(str::trim).ne(["source_id", "category"]) {
        return Err(CorpusError::MalformedRow {
            line: 1,
            reason: "categories header must be `source_id,category`".into(),
        });
    }
    let mut map: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let (sid, cat) = match (record.get(0).map(str::trim), record.get(1).map(str::trim)) {
            (Some(s), Some(c)) if !s.is_empty() && !c.is_empty() => (s, c),
            _ => {
                return Err(CorpusError::MalformedRow {
                    line,
                    reason: "expected non-empty source_id and category".into(),
                })
            }
        };
        let cats = map.entry(sid.to_string()).or_default();
        if !cats.iter().any(|c| c == cat) {
            cats.push(cat.to_string());
        }
    }
    for cats in map.values_mut() {
        cats.sort();
    }
    Ok(map)
}

pub fn write_categories<W: Write>(
    categories: &BTreeMap<String, Vec<String>>,
    out: W,
) -> Result<(), CorpusError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["source_id", "category"])?;
    for (sid, cats) in categories {
        for c in cats {
            w.write_record([sid, c])?;
        }
    }
    w.flush()?;
    Ok(())
}
