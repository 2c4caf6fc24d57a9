use core::fmt;
use core::str::FromStr;

use crate::error::Error;

/// How an h-step forecast is produced from an AR(k) working model.
///
/// The derived ordering puts plug-in before direct, which is the order used
/// to break ties.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    /// Iterate the fitted one-step model (power its companion matrix).
    PlugIn,
    /// Regress `x_{t+h}` on `x_t(k)` directly.
    Direct,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::PlugIn, Method::Direct];

    /// 1 for plug-in, 2 for direct, matching the `(k, j)` labels used in
    /// published frequency tables.
    pub fn label(self) -> u8 {
        match self {
            Method::PlugIn => 1,
            Method::Direct => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::PlugIn => "plug-in",
            Method::Direct => "direct",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plug-in" | "plugin" | "plug_in" | "p" | "1" => Ok(Method::PlugIn),
            "direct" | "d" | "2" => Ok(Method::Direct),
            other => Err(Error::invalid(alloc::format!("unknown method '{other}'"))),
        }
    }
}

/// A candidate predictor: working order, method and horizon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredictorSpec {
    pub k: usize,
    pub method: Method,
    pub h: usize,
}

impl PredictorSpec {
    pub fn new(k: usize, method: Method, h: usize) -> Self {
        PredictorSpec { k, method, h }
    }
}

impl fmt::Display for PredictorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{}) h={}", self.k, self.method.label(), self.h)
    }
}
