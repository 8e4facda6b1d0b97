use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Patch dimensions are not a multiple of the cell size.
    NotDivisible { width: usize, height: usize, cell_size: usize },
    /// Two grids or channel stacks that must agree do not.
    ShapeMismatch { expected: (usize, usize, usize), found: (usize, usize, usize) },
    /// Requested output channel count exceeds the input channel count.
    InvalidChannelCount { requested: usize, available: usize },
    /// A numerical routine produced NaN or infinity.
    NonFinite(&'static str),
    /// An image-region that must contain pixels is empty.
    EmptyRegion(&'static str),
    /// Target box unusable for initialization.
    DegenerateBox,
    /// A configuration value is outside its allowed range or unknown.
    InvalidConfig(alloc::string::String),
    InvalidArgument(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotDivisible { width, height, cell_size } => {
                write!(f, "patch {width}x{height} is not divisible by cell size {cell_size}")
            }
            Error::ShapeMismatch { expected, found } => write!(
                f,
                "shape mismatch: expected {}x{}x{}, found {}x{}x{}",
                expected.0, expected.1, expected.2, found.0, found.1, found.2
            ),
            Error::InvalidChannelCount { requested, available } => {
                write!(f, "cannot project {available} channels onto {requested}")
            }
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::EmptyRegion(what) => write!(f, "empty {what} region"),
            Error::DegenerateBox => f.write_str("degenerate target box"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
