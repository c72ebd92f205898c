use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("cannot parse `{0}` as an exact rational")]
    Parse(String),
    #[error("probability `{0}` is not strictly positive")]
    NonPositiveProbability(String),
    #[error("probabilities sum to {0}, which is not within 1e-9 of 1")]
    SumOutOfTolerance(String),
    #[error("alphabet needs at least 2 symbols, got {0}")]
    AlphabetTooSmall(usize),
    #[error("source has {source_len} symbols but the table has {table_len}")]
    DimensionMismatch { source_len: usize, table_len: usize },
    #[error("symbol {0} has frequency 0")]
    ZeroFrequency(usize),
    #[error("invalid frequency table: {0}")]
    InvalidTable(String),
    #[error("denominator t = {t} is smaller than the alphabet size {m}")]
    DenominatorTooSmall { t: u64, m: usize },
    #[error("exhaustive search limited to m <= 4 and t <= 64 (got m = {m}, t = {t})")]
    InstanceTooLarge { m: usize, t: u64 },
    #[error("2^{width} cannot hold a table for {m} symbols")]
    WidthTooSmall { width: u32, m: usize },
    #[error("delta*/p_min = {0} is not below 1")]
    RatioNotLessThanOne(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("bound requires m > 2, got m = {0}")]
    AlphabetNotMary(usize),
    #[error("target redundancy must be positive")]
    NonPositiveTarget,
    #[error("binary sources need an explicit kappa")]
    KappaMissing,
    #[error("no t <= {limit} reaches the target redundancy")]
    TargetUnachievableWithinScan { limit: u64 },
    #[error("symbol {symbol} out of range for an alphabet of {m}")]
    SymbolOutOfRange { symbol: usize, m: usize },
    #[error("table total {0} exceeds the coder limit 2^24")]
    TableTooWide(u64),
    #[error("corrupt stream: {0}")]
    CorruptStream(String),
    #[error("malformed input: {0}")]
    Format(String),
}
