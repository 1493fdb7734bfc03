use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("depth below admissible minimum at node {node} (x = {x}): h = {h} < {h_min}")]
    Admissibility { node: usize, x: f64, h: f64, h_min: f64 },

    #[error("vacuum state at node {node} (x = {x}): w - z = {gap}")]
    Vacuum { node: usize, x: f64, gap: f64 },

    #[error("numerical instability at t = {t}: {detail}")]
    Instability { t: f64, detail: String },

    #[error("requested time {t} is past the breaking time {t_star}")]
    Validity { t: f64, t_star: f64 },

    #[error("root solve failed: {0}")]
    Root(String),

    #[error("no steepening: min slope {min_slope} is not negative")]
    NotSteepening { min_slope: f64 },

    #[error("steepest point at node {node} is within {cells} cells of the box edge")]
    EdgeProximity { node: usize, cells: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("insufficient range: {0}")]
    InsufficientRange(String),

    #[error("insufficient history: {0}")]
    InsufficientHistory(String),

    #[error("no breaking detected: {0}")]
    NoBreaking(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn in_stage(self, stage: &str) -> Error {
        Error::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }
}
