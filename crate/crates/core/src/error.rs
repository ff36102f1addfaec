use thiserror::Error;

/// Errors raised while describing, mapping, or accessing record data.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LayoutError {
    /// The record dimension (or its textual form) is malformed.
    #[error("schema error: {0}")]
    Schema(String),

    /// A tag path did not resolve.
    #[error("unknown tag `{tag}` below `{parent}`")]
    Lookup { tag: String, parent: String },

    /// An array index lies outside the extents it is used with.
    #[error("index {index} out of bounds for extents {extents}")]
    Bounds { index: String, extents: String },

    /// A mapping or view was configured with incompatible parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// An operation was called with arguments that violate its contract.
    #[error("usage error: {0}")]
    Usage(String),

    /// The element count of the extents does not fit into `usize`.
    #[error("extents product overflows usize")]
    Overflow,

    /// A specialized copy strategy does not apply to the given mappings.
    #[error("copy strategy not applicable: {0}")]
    Strategy(String),

    /// A blob allocator failed to provide memory.
    #[error("allocation of {size} bytes (align {align}) failed")]
    Alloc { size: usize, align: usize },
}

pub type Result<T, E = LayoutError> = std::result::Result<T, E>;
