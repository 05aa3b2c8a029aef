use std::fmt::Write;

/// Parameters that determine an output file, serialized as its first
/// comment line. Thread count is deliberately absent: it never changes
/// output bytes.
#[derive(Debug, Clone, Default)]
pub struct RunManifest {
    pub command: String,
    pub spec: Option<String>,
    pub cache: Option<String>,
    pub n_max: Option<usize>,
    pub rect: Option<String>,
    /// Extra `key=value` pairs in insertion order.
    pub params: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            ..Default::default()
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    /// One line starting with `# manifest`, no trailing newline. A
    /// timestamp appears only when `SOURCE_DATE_EPOCH` is set, so reruns
    /// stay byte-identical.
    pub fn to_line(&self) -> String {
        let mut s = format!(
            "# manifest tool=selberg/{} command={}",
            env!("CARGO_PKG_VERSION"),
            self.command
        );
        if let Some(v) = &self.spec {
            let _ = write!(s, " spec={v}");
        }
        if let Some(v) = &self.cache {
            let _ = write!(s, " cache={v}");
        }
        if let Some(v) = self.n_max {
            let _ = write!(s, " nmax={v}");
        }
        if let Some(v) = &self.rect {
            let _ = write!(s, " rect={v}");
        }
        for (k, v) in &self.params {
            let _ = write!(s, " {k}={v}");
        }
        if let Ok(epoch) = std::env::var("SOURCE_DATE_EPOCH") {
            let _ = write!(s, " timestamp={}", epoch.trim());
        }
        s
    }

    /// Prepends the manifest line to a body.
    pub fn wrap(&self, body: &str) -> String {
        format!("{}\n{body}", self.to_line())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_shape() {
        let m = RunManifest {
            spec: Some("X:12,13,14".into()),
            n_max: Some(8),
            ..RunManifest::new("eval")
        }
        .param("s", "0.1,2");
        let line = m.to_line();
        assert!(line.starts_with("# manifest tool=selberg/"));
        assert!(line.contains(" command=eval spec=X:12,13,14 nmax=8 s=0.1,2"));
        assert!(!line.contains('\n'));
    }
}
