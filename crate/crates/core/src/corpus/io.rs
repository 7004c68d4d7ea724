use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::legacy::{parse_legacy_line, render_legacy_line};
use super::{Corpus, CorpusError, ElementOrder, Sample, SampleRecord, Split};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// `<sentence>####<quad list>` lines with the given element order.
    Legacy(ElementOrder),
    /// One JSON object per line, preceded by an inventory header.
    Jsonl,
}

impl Format {
    pub fn legacy() -> Format {
        Format::Legacy(ElementOrder::default())
    }
}

/// First line of a canonical file. Carries what the sample lines cannot.
#[derive(Serialize, Deserialize)]
struct Header {
    category_inventory: Vec<String>,
    split: Split,
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn at_line(line: usize) -> impl FnOnce(CorpusError) -> CorpusError {
    move |source| CorpusError::Line {
        line,
        source: Box::new(source),
    }
}

pub fn load_corpus(path: impl AsRef<Path>, format: Format) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path).map_err(io_error(path))?);
    let mut header: Option<Header> = None;
    let mut samples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(io_error(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let sample = match format {
            Format::Legacy(order) => parse_legacy_line(&line, &order, &line_no.to_string()),
            Format::Jsonl => {
                if samples.is_empty() && header.is_none() && line.contains("\"category_inventory\"") {
                    let parsed: Header = serde_json::from_str(&line)
                        .map_err(|e| at_line(line_no)(CorpusError::MalformedLine(e.to_string())))?;
                    header = Some(parsed);
                    continue;
                }
                serde_json::from_str::<SampleRecord>(&line)
                    .map_err(|e| CorpusError::MalformedLine(e.to_string()))
                    .and_then(Sample::try_from)
            }
        };
        samples.push(sample.map_err(at_line(line_no))?);
    }
    if samples.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    match header {
        Some(header) => Corpus::new(samples, header.category_inventory, header.split),
        None => Corpus::from_samples(samples, Split::Train),
    }
}

/// Writes `corpus` deterministically. The canonical format round-trips
/// exactly; the legacy format keeps only text and quads.
pub fn write_corpus(corpus: &Corpus, path: impl AsRef<Path>, format: Format) -> Result<(), CorpusError> {
    let path = path.as_ref();
    if corpus.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let mut out = BufWriter::new(File::create(path).map_err(io_error(path))?);
    let mut emit = |line: String| -> Result<(), CorpusError> {
        out.write_all(line.as_bytes()).map_err(io_error(path))?;
        out.write_all(b"\n").map_err(io_error(path))
    };
    match format {
        Format::Jsonl => {
            let header = Header {
                category_inventory: corpus.categories().to_vec(),
                split: corpus.split(),
            };
            emit(serde_json::to_string(&header).expect("header serializes"))?;
            for sample in corpus.samples() {
                emit(serde_json::to_string(sample).expect("sample serializes"))?;
            }
        }
        Format::Legacy(order) => {
            for sample in corpus.samples() {
                emit(render_legacy_line(sample, &order))?;
            }
        }
    }
    out.flush().map_err(io_error(path))
}

/// Categories actually used by the samples, sorted.
pub(super) fn observed_categories(samples: &[Sample]) -> Vec<String> {
    let set: BTreeSet<&str> = samples
        .iter()
        .flat_map(|s| s.quads().iter().map(|q| q.category.as_str()))
        .collect();
    set.into_iter().map(String::from).collect()
}
