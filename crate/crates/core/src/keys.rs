//! Parameter, property and result keys, plus parsers for the extension
//! parameters carried through custom job fields.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::status::StatusCode;

macro_rules! named_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn name(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = StatusCode;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(StatusCode::InvalidArgument),
                }
            }
        }
    };
}

named_enum!(
    /// Session configuration keys. `Custom1` selects a backend by id,
    /// `Custom2` by alias.
    SessionParameterKey {
        BaseUrl => "BASEURL",
        Token => "TOKEN",
        AuthFile => "AUTHFILE",
        Custom1 => "CUSTOM1",
        Custom2 => "CUSTOM2",
    }
);

named_enum!(
    /// Job configuration keys. `Custom1` carries the heralding mode,
    /// `Custom5` the logical-to-physical qubit mapping.
    JobParameterKey {
        ProgramFormat => "PROGRAMFORMAT",
        Program => "PROGRAM",
        ShotsNum => "SHOTSNUM",
        Custom1 => "CUSTOM1",
        Custom5 => "CUSTOM5",
    }
);

named_enum!(
    ProgramFormat {
        IqmJson => "IQMJSON",
        QirBaseString => "QIRBASESTRING",
        Calibration => "CALIBRATION",
    }
);

named_enum!(
    /// Device properties. `CouplingMap` is a list of site-index pairs,
    /// `Custom1` the identifier of the active calibration set.
    DeviceProperty {
        Name => "NAME",
        Version => "VERSION",
        QubitCount => "QUBIT_COUNT",
        Sites => "SITES",
        CouplingMap => "COUPLING_MAP",
        Operations => "OPERATIONS",
        Status => "STATUS",
        Custom1 => "CUSTOM1",
    }
);

named_enum!(
    /// Per-site properties. Coherence times are in seconds.
    SiteProperty {
        Name => "NAME",
        Index => "INDEX",
        T1 => "T1",
        T2 => "T2",
    }
);

named_enum!(
    /// Per-operation properties. Duration is in seconds, fidelity in `[0, 1]`.
    OperationProperty {
        Name => "NAME",
        Fidelity => "FIDELITY",
        Duration => "DURATION",
        SitesSupported => "SITES_SUPPORTED",
    }
);

named_enum!(
    /// Result keys. `Custom1` is the new calibration-set id of a calibration job.
    JobResultKey {
        Shots => "SHOTS",
        HistKeys => "HIST_KEYS",
        HistValues => "HIST_VALUES",
        Custom1 => "CUSTOM1",
    }
);

impl ProgramFormat {
    /// Wire form used by the backend protocol.
    pub fn wire_name(self) -> &'static str {
        self.name()
    }
}

/// Readout heralding option.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeraldingMode {
    #[default]
    None,
    Zeros,
}

impl HeraldingMode {
    pub fn name(self) -> &'static str {
        match self {
            HeraldingMode::None => "none",
            HeraldingMode::Zeros => "zeros",
        }
    }
}

impl fmt::Display for HeraldingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses a heralding mode. Only the exact lowercase literals are accepted.
pub fn validate_heralding(text: &str) -> Result<HeraldingMode, StatusCode> {
    match text {
        "none" => Ok(HeraldingMode::None),
        "zeros" => Ok(HeraldingMode::Zeros),
        _ => Err(StatusCode::InvalidArgument),
    }
}

/// One `logical -> physical` assignment.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MappingEntry {
    pub logical: String,
    pub physical: String,
}

/// Ordered logical-to-physical qubit mapping with unique names on both sides.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<MappingEntry>", into = "Vec<MappingEntry>")]
pub struct QubitMapping {
    entries: Vec<MappingEntry>,
}

impl QubitMapping {
    /// Builds a mapping, rejecting duplicate logical or physical names.
    pub fn new(entries: Vec<MappingEntry>) -> Result<Self, StatusCode> {
        for (i, a) in entries.iter().enumerate() {
            if a.logical.is_empty() || a.physical.is_empty() {
                return Err(StatusCode::InvalidArgument);
            }
            for b in &entries[i + 1..] {
                if a.logical == b.logical || a.physical == b.physical {
                    return Err(StatusCode::InvalidArgument);
                }
            }
        }
        Ok(Self { entries })
    }

    /// Parses `logical:physical,logical:physical,...`.
    pub fn parse(text: &str) -> Result<Self, StatusCode> {
        let entries = text
            .split(',')
            .map(|entry| {
                let (logical, physical) =
                    entry.split_once(':').ok_or(StatusCode::InvalidArgument)?;
                if logical.is_empty() || physical.is_empty() || physical.contains(':') {
                    return Err(StatusCode::InvalidArgument);
                }
                Ok(MappingEntry {
                    logical: logical.to_string(),
                    physical: physical.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(entries)
    }

    pub fn entries(&self) -> &[MappingEntry] {
        &self.entries
    }

    pub fn physical_for(&self, logical: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|e| e.logical == logical)
            .map(|e| e.physical.as_str())
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl fmt::Display for QubitMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}:{}", e.logical, e.physical)?;
        }
        Ok(())
    }
}

impl TryFrom<Vec<MappingEntry>> for QubitMapping {
    type Error = StatusCode;

    fn try_from(entries: Vec<MappingEntry>) -> Result<Self, Self::Error> {
        Self::new(entries)
    }
}

impl From<QubitMapping> for Vec<MappingEntry> {
    fn from(mapping: QubitMapping) -> Self {
        mapping.entries
    }
}

/// Free-function form of [`QubitMapping::parse`].
pub fn parse_qubit_mapping(text: &str) -> Result<QubitMapping, StatusCode> {
    QubitMapping::parse(text)
}
