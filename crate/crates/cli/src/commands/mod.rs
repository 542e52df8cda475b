pub mod diagnose;
pub mod evaluate;
pub mod fit;
pub mod simulate;

/// Marker error for runtime numeric failures (exit code 3, against the
/// usual 2 for configuration and validation problems).
#[derive(Debug)]
pub struct NumericFailure(pub String);

impl std::fmt::Display for NumericFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "numeric failure: {}", self.0)
    }
}

impl std::error::Error for NumericFailure {}
