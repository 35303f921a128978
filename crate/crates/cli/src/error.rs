use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] triptrie::Error),

    #[error("bad configuration: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    File {
        path: String,
        kind: &'static str,
        message: String,
    },

    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Config(_) => "config",
            CliError::File { kind, .. } => kind,
            CliError::Verification(_) => "verification",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Verification(_) => 3,
            _ => 1,
        }
    }

    pub fn file(path: &std::path::Path, err: impl std::fmt::Display) -> CliError {
        CliError::File {
            path: path.display().to_string(),
            kind: "io",
            message: err.to_string(),
        }
    }

    /// Like `file`, keeping the kind of a library error.
    pub fn in_file(path: &std::path::Path, err: triptrie::Error) -> CliError {
        CliError::File {
            path: path.display().to_string(),
            kind: err.kind(),
            message: err.to_string(),
        }
    }

    /// One line: `error<TAB>kind=<kind><TAB>message=<text>`, with backslash,
    /// tab and newline escaped in the message.
    pub fn record(&self) -> String {
        let message = self
            .to_string()
            .replace('\\', "\\\\")
            .replace('\t', "\\t")
            .replace('\n', "\\n");
        format!("error\tkind={}\tmessage={message}", self.kind())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_is_one_line() {
        let e = CliError::Config("a\tb\nc".into());
        assert_eq!(
            e.record(),
            "error\tkind=config\tmessage=bad configuration: a\\tb\\nc"
        );
        let e = CliError::from(triptrie::Error::NotFound("x".into()));
        assert_eq!(e.kind(), "not-found");
        assert_eq!(e.exit_code(), 1);
        let e = CliError::in_file("t.snap".as_ref(), triptrie::Error::Format("bad".into()));
        assert_eq!(e.kind(), "format");
    }
}
