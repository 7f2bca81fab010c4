use std::io::Write;
use std::path::Path;
use std::time::Instant;

/// Buffered command output, printed or written only once the command
/// succeeds.
#[derive(Debug, Default)]
pub struct Output {
    text: String,
}

impl Output {
    pub fn line(&mut self, line: impl AsRef<str>) {
        self.text.push_str(line.as_ref());
        self.text.push('\n');
    }

    /// Appends text that already ends in a newline.
    pub fn push(&mut self, text: impl AsRef<str>) {
        self.text.push_str(text.as_ref());
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

/// Six decimals with trailing zeros trimmed.
pub fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

pub struct Manifest {
    pub command: String,
    pub seed: u64,
    pub version: String,
    pub started: Instant,
    pub stream_seed: u64,
}

impl Manifest {
    fn header(&self) -> String {
        format!(
            "# command: prefdist {}\n# seed: {} (stream {:#018x})\n# version: {}\n# elapsed_ms: {}\n",
            self.command,
            self.seed,
            self.stream_seed,
            self.version,
            self.started.elapsed().as_millis()
        )
    }
}

/// Writes to a temporary sibling and renames it over `path`.
pub fn write_atomic(path: &Path, manifest: &Manifest, body: &str) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = Path::new(&tmp);
    let result = (|| {
        let mut f = std::fs::File::create(tmp)?;
        f.write_all(manifest.header().as_bytes())?;
        f.write_all(body.as_bytes())?;
        f.sync_all()?;
        std::fs::rename(tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(tmp);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::num;

    #[test]
    fn number_format() {
        assert_eq!(num(1.0), "1");
        assert_eq!(num(1.5), "1.5");
        assert_eq!(num(1.0 / 3.0), "0.333333");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(-1e-9), "0");
        assert_eq!(num(2.25), "2.25");
    }
}
