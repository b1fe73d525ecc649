use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// How the critic's scores on real and fake data are combined inside `f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Symmetric: `f(C(x))` and `f(-C(y))` applied separately.
    Sy,
    /// Relativistic paired: `f(C(x) - C(y))`.
    Rp,
    /// Relativistic average, both directions.
    Ra,
    /// Relativistic average, one direction only, doubled.
    Ralf,
    /// Relativistic centred on the mixture mean.
    Rc,
}

impl Variant {
    pub const ALL: [Variant; 5] = [Variant::Sy, Variant::Rp, Variant::Ra, Variant::Ralf, Variant::Rc];
    pub const RELATIVISTIC: [Variant; 4] = [Variant::Rp, Variant::Ra, Variant::Ralf, Variant::Rc];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Sy => "sy",
            Variant::Rp => "rp",
            Variant::Ra => "ra",
            Variant::Ralf => "ralf",
            Variant::Rc => "rc",
        }
    }

    /// Whether adding a constant to every critic value leaves the objective unchanged.
    pub fn is_shift_invariant(self) -> bool {
        !matches!(self, Variant::Sy)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| crate::error::invalid(format!("unknown variant `{s}` (expected sy, rp, ra, ralf or rc)")))
    }
}
