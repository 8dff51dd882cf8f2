use std::fmt;

/// An input expected from an earlier stage is absent. Exit code 2.
#[derive(Debug)]
pub struct MissingArtifact {
    pub stage: &'static str,
    pub artifact: String,
    pub producer: &'static str,
}

impl fmt::Display for MissingArtifact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: missing upstream artifact {} (run `{}` first)",
            self.stage, self.artifact, self.producer
        )
    }
}

impl std::error::Error for MissingArtifact {}

/// Exit code 3.
#[derive(Debug)]
pub struct InvalidConfig(pub String);

impl fmt::Display for InvalidConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config: {}", self.0)
    }
}

impl std::error::Error for InvalidConfig {}

pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<MissingArtifact>().is_some() {
        2
    } else if err.downcast_ref::<InvalidConfig>().is_some()
        || matches!(
            err.downcast_ref::<xsum_forge::Error>(),
            Some(xsum_forge::Error::Config(_))
        )
    {
        3
    } else {
        1
    }
}
