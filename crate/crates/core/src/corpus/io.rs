//! CSV/TSV corpus files.
//!
//! Header row `text,label,language`; `label` may be absent. When a corpus
//! carries ids that differ from row indices (e.g. a split of a larger
//! file) an extra `id` column is written and honoured on load, so that
//! loading a written corpus reproduces it exactly.
//!
//! CSV uses RFC 4180 quoting. TSV has no quoting at all, so text holding a
//! tab or a line break cannot be written as TSV.

use std::collections::HashSet;
use std::fs::File;
use std::path::Path;

use csv::{QuoteStyle, ReaderBuilder, StringRecord, WriterBuilder};

use super::{check_score, Corpus, Language, SplitName, Tweet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Csv,
    Tsv,
}

impl DataFormat {
    /// Guess from the file extension; anything but `.tsv` is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("tsv") => DataFormat::Tsv,
            _ => DataFormat::Csv,
        }
    }

    fn delimiter(self) -> u8 {
        match self {
            DataFormat::Csv => b',',
            DataFormat::Tsv => b'\t',
        }
    }
}

struct Columns {
    text: usize,
    language: usize,
    label: Option<usize>,
    id: Option<usize>,
}

fn locate_columns(path: &Path, header: &StringRecord) -> Result<Columns> {
    let find = |name: &str| header.iter().position(|h| h.trim() == name);
    let required = |name: &str| {
        find(name).ok_or_else(|| Error::MissingColumn {
            path: path.to_path_buf(),
            column: name.to_string(),
        })
    };
    Ok(Columns {
        text: required("text")?,
        language: required("language")?,
        label: find("label"),
        id: find("id"),
    })
}

pub fn load_dataset(path: impl AsRef<Path>, format: DataFormat) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = ReaderBuilder::new()
        .delimiter(format.delimiter())
        .quoting(format == DataFormat::Csv)
        .has_headers(true)
        .from_reader(file);

    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let cols = locate_columns(path, &header)?;

    let mut tweets = Vec::new();
    let mut ids = HashSet::new();
    for (index, record) in reader.records().enumerate() {
        let row = index + 1;
        let record = record.map_err(|e| csv_error(path, e))?;
        let row_err = |field: &str, message: String| Error::Row {
            path: path.to_path_buf(),
            row,
            field: field.to_string(),
            message,
        };
        let get = |col: usize| record.get(col).unwrap_or("");

        let text = get(cols.text);
        if text.trim().is_empty() {
            return Err(row_err("text", "empty text".into()));
        }
        let language: Language = get(cols.language)
            .parse()
            .map_err(|e: super::UnknownLanguage| row_err("language", e.to_string()))?;
        let score = match cols.label.map(get) {
            None | Some("") => None,
            Some(raw) => {
                let s: f64 = raw
                    .trim()
                    .parse()
                    .map_err(|_| row_err("label", format!("cannot parse `{raw}` as a score")))?;
                check_score(s).map_err(|m| row_err("label", m))?;
                Some(s)
            }
        };
        let id = match cols.id {
            None => index as u64,
            Some(c) => get(c)
                .trim()
                .parse()
                .map_err(|_| row_err("id", format!("cannot parse `{}` as an id", get(c))))?,
        };
        if !ids.insert(id) {
            return Err(row_err("id", format!("duplicate id {id}")));
        }
        tweets.push(Tweet {
            id,
            text: text.to_string(),
            language,
            score,
        });
    }

    Corpus::new(tweets, path.display().to_string(), SplitName::Custom)
}

pub fn write_dataset(corpus: &Corpus, path: impl AsRef<Path>, format: DataFormat) -> Result<()> {
    let path = path.as_ref();
    let with_label = corpus.iter().any(|t| t.score.is_some());
    let with_id = !corpus.has_row_index_ids();

    let mut header = vec!["text"];
    if with_label {
        header.push("label");
    }
    header.push("language");
    if with_id {
        header.push("id");
    }

    let mut rows = Vec::with_capacity(corpus.len());
    for t in corpus {
        if format == DataFormat::Tsv && t.text.contains(['\t', '\n', '\r']) {
            return Err(Error::format(
                path,
                format!(
                    "tweet {} contains a tab or line break and cannot be written as TSV",
                    t.id
                ),
            ));
        }
        let mut row = vec![t.text.clone()];
        if with_label {
            row.push(t.score.map(|s| s.to_string()).unwrap_or_default());
        }
        row.push(t.language.name().to_string());
        if with_id {
            row.push(t.id.to_string());
        }
        rows.push(row);
    }

    write_records(path, format, &header, &rows)
}

pub(crate) fn write_records<S: AsRef<str>>(
    path: &Path,
    format: DataFormat,
    header: &[&str],
    rows: &[Vec<S>],
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = WriterBuilder::new()
        .delimiter(format.delimiter())
        .quote_style(match format {
            DataFormat::Csv => QuoteStyle::Necessary,
            DataFormat::Tsv => QuoteStyle::Never,
        })
        .from_writer(file);
    writer
        .write_record(header)
        .map_err(|e| csv_error(path, e))?;
    for row in rows {
        writer
            .write_record(row.iter().map(|c| c.as_ref()))
            .map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::format(path, e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(dir: &Path, name: &str, content: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        std::fs::File::create(&p)
            .unwrap()
            .write_all(content.as_bytes())
            .unwrap();
        p
    }

    #[test]
    fn loads_csv_with_labels() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(
            dir.path(),
            "a.csv",
            "text,label,language\n\"hello, world\",1.5,English\nhola,4.4,Spanish\n",
        );
        let c = load_dataset(&p, DataFormat::Csv).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.tweets()[0].text, "hello, world");
        assert_eq!(c.tweets()[0].score, Some(1.5));
        assert_eq!(c.tweets()[1].id, 1);
        assert_eq!(c.tweets()[1].language, Language::Spanish);
    }

    #[test]
    fn header_only_is_empty_corpus() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(dir.path(), "a.csv", "text,label,language\n");
        assert!(load_dataset(&p, DataFormat::Csv).unwrap().is_empty());
    }

    #[test]
    fn missing_column_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(dir.path(), "a.csv", "text,label\nhi,2\n");
        match load_dataset(&p, DataFormat::Csv) {
            Err(Error::MissingColumn { column, .. }) => assert_eq!(column, "language"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn row_errors_carry_row_number() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(
            dir.path(),
            "a.csv",
            "text,label,language\nok,2,English\nbad,7,English\n",
        );
        match load_dataset(&p, DataFormat::Csv) {
            Err(Error::Row { row, field, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(field, "label");
            }
            other => panic!("unexpected {other:?}"),
        }
        let p = write_file(dir.path(), "b.csv", "text,label,language\nok,x,English\n");
        assert!(matches!(
            load_dataset(&p, DataFormat::Csv),
            Err(Error::Row { row: 1, .. })
        ));
        let p = write_file(dir.path(), "c.csv", "text,language\nok,Klingon\n");
        assert!(matches!(
            load_dataset(&p, DataFormat::Csv),
            Err(Error::Row { row: 1, .. })
        ));
        let p = write_file(dir.path(), "d.csv", "text,language\n,English\n");
        assert!(matches!(
            load_dataset(&p, DataFormat::Csv),
            Err(Error::Row { row: 1, .. })
        ));
    }

    #[test]
    fn unlabeled_tsv() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(dir.path(), "a.tsv", "text\tlanguage\n\"quoted\" text\tko\n");
        let c = load_dataset(&p, DataFormat::Tsv).unwrap();
        assert_eq!(c.tweets()[0].text, "\"quoted\" text");
        assert_eq!(c.tweets()[0].score, None);
    }

    #[test]
    fn missing_file_reports_path() {
        let err = load_dataset("/nonexistent/x.csv", DataFormat::Csv).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/x.csv"));
    }

    #[test]
    fn quoting_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let tweets = vec![
            Tweet::new(0, "a \"quoted\", comma", Language::English, Some(1.0)).unwrap(),
            Tweet::new(
                1,
                "multi\nline\r\ntext",
                Language::French,
                Some(2.123456789012345),
            )
            .unwrap(),
            Tweet::new(2, "  spaces  ", Language::Chinese, None).unwrap(),
        ];
        let c = Corpus::new(tweets, "mem", SplitName::Custom).unwrap();
        let p = dir.path().join("q.csv");
        write_dataset(&c, &p, DataFormat::Csv).unwrap();
        let back = load_dataset(&p, DataFormat::Csv).unwrap();
        assert_eq!(back.tweets(), c.tweets());
    }

    #[test]
    fn tsv_rejects_tabs() {
        let dir = tempfile::tempdir().unwrap();
        let c = Corpus::new(
            vec![Tweet::new(0, "a\tb", Language::English, None).unwrap()],
            "mem",
            SplitName::Custom,
        )
        .unwrap();
        assert!(write_dataset(&c, dir.path().join("x.tsv"), DataFormat::Tsv).is_err());
    }

    #[test]
    fn empty_corpus_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.csv");
        write_dataset(
            &Corpus::empty("mem", SplitName::Custom),
            &p,
            DataFormat::Csv,
        )
        .unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "text,language\n");
        assert!(load_dataset(&p, DataFormat::Csv).unwrap().is_empty());
    }

    #[test]
    fn non_row_ids_survive_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let c = Corpus::new(
            vec![
                Tweet::new(17, "x", Language::Dutch, Some(3.0)).unwrap(),
                Tweet::new(4, "y", Language::Hindi, Some(2.0)).unwrap(),
            ],
            "mem",
            SplitName::Test,
        )
        .unwrap();
        let p = dir.path().join("ids.tsv");
        write_dataset(&c, &p, DataFormat::Tsv).unwrap();
        assert_eq!(
            load_dataset(&p, DataFormat::Tsv).unwrap().tweets(),
            c.tweets()
        );
    }
}
