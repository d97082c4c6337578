use manipyr::apps::ExperimentConfig;
use manipyr::io::{comment_block, CsvTable};
use serde::Serialize;
use serde_json::Value;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Destination of a command's result: a file written atomically, or stdout.
pub struct Sink {
    pub path: Option<PathBuf>,
}

impl Sink {
    pub fn is_csv(&self) -> bool {
        self.path
            .as_deref()
            .and_then(Path::extension)
            .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
    }

    pub fn write(&self, text: &str) -> std::io::Result<()> {
        match &self.path {
            Some(path) => write_atomic(path, text.as_bytes()),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                out.flush()
            }
        }
    }
}

/// Writes to a temporary file in the target directory, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn config_header(config: &ExperimentConfig) -> String {
    let mut out = comment_block("", &config.to_json());
    out.insert_str(0, "# config\n");
    out
}

/// CSV sections, each introduced by a `# name` line, after the config block.
pub fn csv_report(config: &ExperimentConfig, sections: &[(&str, &CsvTable)]) -> String {
    let mut out = config_header(config);
    for (name, table) in sections {
        if sections.len() > 1 {
            out.push_str(&format!("# {name}\n"));
        }
        out.push_str(&table.to_csv());
    }
    out
}

/// Serializes `value` as a JSON object with the config under the `config` key.
pub fn json_with_config<T: Serialize>(
    value: &T,
    config: &ExperimentConfig,
) -> serde_json::Result<String> {
    let mut v = serde_json::to_value(value)?;
    if let Value::Object(map) = &mut v {
        map.insert("config".into(), serde_json::to_value(config)?);
    }
    let mut text = serde_json::to_string_pretty(&v)?;
    text.push('\n');
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.txt");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"second");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn config_is_embedded() {
        let c = ExperimentConfig::default();
        let text = json_with_config(&serde_json::json!({"a": 1}), &c).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["a"], 1);
        assert_eq!(
            serde_json::from_value::<ExperimentConfig>(v["config"].clone()).unwrap(),
            c
        );
        let mut t = CsvTable::new(["x"]);
        t.push(vec![1.0]);
        let csv = csv_report(&c, &[("only", &t)]);
        assert!(csv.starts_with("# config\n# {"));
        assert!(csv.ends_with("x\n1.0\n"));
    }

    #[test]
    fn csv_extension_detection() {
        assert!(Sink {
            path: Some("a/b.CSV".into())
        }
        .is_csv());
        assert!(!Sink {
            path: Some("a/b.json".into())
        }
        .is_csv());
        assert!(!Sink { path: None }.is_csv());
    }
}
