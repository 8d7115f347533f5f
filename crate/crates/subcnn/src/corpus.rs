//! Loading, normalizing, and splitting labeled short-text datasets.
//!
//! Datasets use a two-file layout: a UTF-8 text file with one example per
//! line and a parallel labels file with one base-10 class id per line.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::numerics::Rng;

/// One tweet/sentence and its class id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledExample {
    pub text: String,
    pub label: usize,
}

/// An ordered collection of labeled examples over `class_count` classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub examples: Vec<LabeledExample>,
    pub class_count: usize,
    /// Optional display names per class id.
    pub label_names: Option<BTreeMap<usize, String>>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

/// Text cleanup switches. NFC normalization and end trimming always apply;
/// lowercasing and whitespace collapsing can be turned off.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormalizeOptions {
    pub lowercase: bool,
    pub collapse_whitespace: bool,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        NormalizeOptions {
            lowercase: true,
            collapse_whitespace: true,
        }
    }
}

/// NFC-normalize, lowercase, trim, and collapse internal whitespace runs to
/// a single space. Empty output is permitted.
pub fn normalize_text(raw: &str) -> String {
    normalize_text_with(raw, &NormalizeOptions::default())
}

pub fn normalize_text_with(raw: &str, opts: &NormalizeOptions) -> String {
    let composed: String = raw.nfc().collect();
    let cased = if opts.lowercase {
        composed.to_lowercase()
    } else {
        composed
    };
    if opts.collapse_whitespace {
        cased.split_whitespace().collect::<Vec<_>>().join(" ")
    } else {
        cased.trim().to_string()
    }
}

/// Loads the two-file layout with default normalization.
pub fn load_dataset(
    text_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    class_count: usize,
) -> Result<Dataset> {
    load_dataset_with(
        text_path,
        labels_path,
        class_count,
        &NormalizeOptions::default(),
    )
}

/// Loads a dataset, normalizing each text line with the given options.
///
/// Texts that normalize to the empty string are retained (they encode as an
/// all-padding sequence downstream), keeping line/label alignment trivial.
pub fn load_dataset_with(
    text_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    class_count: usize,
    opts: &NormalizeOptions,
) -> Result<Dataset> {
    let text_path = text_path.as_ref();
    let labels_path = labels_path.as_ref();
    let text = fs::read_to_string(text_path).map_err(|e| Error::io(text_path, e))?;
    let labels = fs::read_to_string(labels_path).map_err(|e| Error::io(labels_path, e))?;
    let text_lines: Vec<&str> = text.lines().collect();
    let label_lines: Vec<&str> = labels.lines().collect();
    if text_lines.len() != label_lines.len() {
        return Err(Error::LineCountMismatch {
            text_path: text_path.to_path_buf(),
            text_lines: text_lines.len(),
            labels_path: labels_path.to_path_buf(),
            label_lines: label_lines.len(),
        });
    }
    let mut examples = Vec::with_capacity(text_lines.len());
    for (i, (line, label_line)) in text_lines.iter().zip(&label_lines).enumerate() {
        let label: i64 = label_line.trim().parse().map_err(|_| Error::BadLabel {
            path: labels_path.to_path_buf(),
            line: i + 1,
            message: format!("`{label_line}` is not a base-10 integer"),
        })?;
        if label < 0 || label as usize >= class_count {
            return Err(Error::BadLabel {
                path: labels_path.to_path_buf(),
                line: i + 1,
                message: format!("label {label} outside [0, {class_count})"),
            });
        }
        examples.push(LabeledExample {
            text: normalize_text_with(line, opts),
            label: label as usize,
        });
    }
    Ok(Dataset {
        examples,
        class_count,
        label_names: None,
    })
}

/// Writes a dataset back to the two-file layout.
pub fn save_dataset(
    dataset: &Dataset,
    text_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<()> {
    let mut text = String::new();
    let mut labels = String::new();
    for ex in &dataset.examples {
        text.push_str(&ex.text);
        text.push('\n');
        labels.push_str(&ex.label.to_string());
        labels.push('\n');
    }
    fs::write(text_path.as_ref(), text).map_err(|e| Error::io(text_path.as_ref(), e))?;
    fs::write(labels_path.as_ref(), labels).map_err(|e| Error::io(labels_path.as_ref(), e))?;
    Ok(())
}

/// Loads the optional `<id>\t<name>` display-name mapping.
pub fn load_label_names(path: impl AsRef<Path>) -> Result<BTreeMap<usize, String>> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut names = BTreeMap::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (id, name) = line.split_once('\t').ok_or_else(|| Error::BadLabel {
            path: path.to_path_buf(),
            line: i + 1,
            message: "expected `<id>\\t<name>`".into(),
        })?;
        let id: usize = id.trim().parse().map_err(|_| Error::BadLabel {
            path: path.to_path_buf(),
            line: i + 1,
            message: format!("`{id}` is not a class id"),
        })?;
        names.insert(id, name.to_string());
    }
    Ok(names)
}

/// Deterministic shuffle-and-split into (train, dev).
///
/// The train part has `ceil(n * (1 - dev_fraction))` examples; the dev part
/// gets the remainder. The union equals the input as a multiset.
pub fn split_dataset(dataset: &Dataset, dev_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(dev_fraction > 0.0 && dev_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "dev fraction must be in (0, 1), got {dev_fraction}"
        )));
    }
    if dataset.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot split an empty dataset".into(),
        ));
    }
    let n = dataset.len();
    let train_size = (n as f64 * (1.0 - dev_fraction)).ceil() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = Rng::new(seed);
    rng.shuffle(&mut order);
    let pick = |ix: &[usize]| Dataset {
        examples: ix.iter().map(|&i| dataset.examples[i].clone()).collect(),
        class_count: dataset.class_count,
        label_names: dataset.label_names.clone(),
    };
    Ok((pick(&order[..train_size]), pick(&order[train_size..])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;
    use tempfile::tempdir;

    fn write(dir: &Path, name: &str, content: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        fs::write(&p, content).unwrap();
        p
    }

    #[test]
    fn normalize_basic_cases() {
        assert_eq!(normalize_text("  Hello   WORLD "), "hello world");
        assert_eq!(normalize_text("a"), "a");
    }

    #[test]
    fn normalize_composes_nfc() {
        // decomposed e + combining acute must become the precomposed form
        let decomposed = "Cafe\u{0301}";
        assert_eq!(normalize_text(decomposed), "caf\u{00e9}");
    }

    #[test]
    fn normalize_options_can_keep_case() {
        let opts = NormalizeOptions {
            lowercase: false,
            collapse_whitespace: false,
        };
        assert_eq!(normalize_text_with("  Hello   WORLD ", &opts), "Hello   WORLD");
    }

    #[test]
    fn load_single_example() {
        let dir = tempdir().unwrap();
        let t = write(dir.path(), "t.txt", "hello world\n");
        let l = write(dir.path(), "l.txt", "0\n");
        let d = load_dataset(&t, &l, 20).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.examples[0].text, "hello world");
        assert_eq!(d.examples[0].label, 0);
    }

    #[test]
    fn line_count_mismatch_reports_both_counts() {
        let dir = tempdir().unwrap();
        let t = write(dir.path(), "t.txt", "a\nb\nc\n");
        let l = write(dir.path(), "l.txt", "0\n1\n");
        let err = load_dataset(&t, &l, 20).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains('3') && msg.contains('2'), "{msg}");
    }

    #[test]
    fn bad_label_reports_line_number() {
        let dir = tempdir().unwrap();
        let t = write(dir.path(), "t.txt", "a\nb\n");
        let l = write(dir.path(), "l.txt", "0\nx\n");
        let err = load_dataset(&t, &l, 20).unwrap_err();
        assert!(err.to_string().contains(":2"), "{err}");

        let l = write(dir.path(), "l.txt", "0\n25\n");
        let err = load_dataset(&t, &l, 20).unwrap_err();
        assert!(err.to_string().contains(":2"), "{err}");
    }

    #[test]
    fn roundtrip_reserializes_byte_for_byte() {
        let dir = tempdir().unwrap();
        let t = write(dir.path(), "t.txt", "a\nb\n");
        let l = write(dir.path(), "l.txt", "5\n19\n");
        let d = load_dataset(&t, &l, 20).unwrap();
        assert_eq!(d.examples[0].label, 5);
        assert_eq!(d.examples[1].label, 19);

        let t2 = dir.path().join("t2.txt");
        let l2 = dir.path().join("l2.txt");
        save_dataset(&d, &t2, &l2).unwrap();
        assert_eq!(fs::read(&t).unwrap(), fs::read(&t2).unwrap());
        assert_eq!(fs::read(&l).unwrap(), fs::read(&l2).unwrap());
    }

    #[test]
    fn empty_after_normalization_is_retained() {
        let dir = tempdir().unwrap();
        let t = write(dir.path(), "t.txt", "   \nreal text\n");
        let l = write(dir.path(), "l.txt", "0\n1\n");
        let d = load_dataset(&t, &l, 2).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.examples[0].text, "");
    }

    fn toy_dataset(n: usize) -> Dataset {
        Dataset {
            examples: (0..n)
                .map(|i| LabeledExample {
                    text: format!("example {i}"),
                    label: i % 3,
                })
                .collect(),
            class_count: 3,
            label_names: None,
        }
    }

    #[test]
    fn split_sizes_follow_ceiling_rule() {
        let (train, dev) = split_dataset(&toy_dataset(10), 0.2, 1).unwrap();
        assert_eq!((train.len(), dev.len()), (8, 2));
        let (train, dev) = split_dataset(&toy_dataset(3), 0.5, 1).unwrap();
        assert_eq!((train.len(), dev.len()), (2, 1));
    }

    #[test]
    fn split_is_deterministic_and_preserves_multiset() {
        let data = toy_dataset(17);
        let (a1, b1) = split_dataset(&data, 0.3, 99).unwrap();
        let (a2, b2) = split_dataset(&data, 0.3, 99).unwrap();
        assert_eq!(a1, a2);
        assert_eq!(b1, b2);

        let mut all: Vec<String> = a1
            .examples
            .iter()
            .chain(&b1.examples)
            .map(|e| e.text.clone())
            .collect();
        all.sort();
        let mut orig: Vec<String> = data.examples.iter().map(|e| e.text.clone()).collect();
        orig.sort();
        assert_eq!(all, orig);
    }

    #[test]
    fn split_rejects_bad_fraction() {
        let data = toy_dataset(4);
        assert!(split_dataset(&data, 0.0, 1).is_err());
        assert!(split_dataset(&data, 1.0, 1).is_err());
    }

    #[test]
    fn label_names_parse() {
        let dir = tempdir().unwrap();
        let p = write(dir.path(), "names.tsv", "0\tred heart\n1\tfire\n");
        let names = load_label_names(&p).unwrap();
        assert_eq!(names[&0], "red heart");
        assert_eq!(names[&1], "fire");
    }
}
