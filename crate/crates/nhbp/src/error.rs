use thiserror::Error;

/// Complex value carried inside diagnostics, always widened to f64.
pub type Z64 = (f64, f64);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operation requires variant {expected}, got {found}")]
    VariantMismatch { expected: &'static str, found: &'static str },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("variant {0} needs a transverse momentum")]
    MissingTransverseMomentum(&'static str),
    #[error("variant {0} takes no transverse momentum")]
    UnexpectedTransverseMomentum(&'static str),
    #[error("need at least 2 unit cells, got {0}")]
    TooFewCells(usize),
    #[error("QR iteration did not converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("cannot pair left and right eigenvectors near an exceptional point; cluster {cluster:?}")]
    NearExceptionalPoint { cluster: Vec<Z64> },
    #[error("biorthogonal overlap {overlap:e} below threshold (EP collision)")]
    BiorthogonalBreakdown { overlap: f64 },
    #[error("no modes selected")]
    NoModesSelected,
    #[error("characteristic polynomial vanishes identically")]
    DegenerateModel,
    #[error("no admissible beta on the phase grid; smallest relative gap {min_gap:e}")]
    EmptyContour { min_gap: f64 },
    #[error("OBC bands touch on the GBZ (|E| = {min_abs_energy:e})")]
    GapClosed { min_abs_energy: f64 },
    #[error("closed forms need t3 = 0, got t3 = {0}")]
    AnalyticRegime(f64),
    #[error("GBZ radius denominator vanishes")]
    SingularRadius,
    #[error("edge ratio denominator t1 - delta*cos(ky) vanishes")]
    RatioSingularity,
    #[error("theta = {theta} is not of the form pi*j/N with 0 < j < N = {n_cells}")]
    QuantizationGrid { theta: f64, n_cells: usize },
    #[error("|E1 - E2| vanishes on the loop at sample {index}")]
    EpOnLoop { index: usize },
    #[error("phase step exceeds pi/2 at sample {index}; refine the loop")]
    Undersampled { index: usize },
    #[error("loop needs at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("EP condition has a vanishing denominator: {0}")]
    SingularCondition(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
