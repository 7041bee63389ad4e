//! Level-sphere sweeps of planar presentations.
//!
//! A generic level sphere is recorded as a [`LevelState`]: a tree whose nodes
//! are the complementary faces of the level circles and whose edges are the
//! circles themselves. Faces carry an in/out membership label that alternates
//! across every circle; the in-labelled faces are the components of the
//! planar cross-section. A [`Presentation`] is an ordered word of
//! [`MorseEvent`]s; [`simulate`] replays it from the empty state, classifying
//! every event as it goes and failing loudly on any structural violation.

mod parse;
mod random;
mod sim;
mod state;

pub use parse::{parse_presentation, ParseError};
pub use random::{PresentationGen, PresentationGenConfig};
pub use sim::{reflect, simulate, SimError, Trace, TraceEntry};
pub use state::{ApplyError, LevelState};

use crate::sym::Sym;
use serde::Serialize;

/// Membership label of a face: inside the manifold or outside it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Label {
    InM,
    OutM,
}

impl Label {
    pub fn opposite(self) -> Label {
        match self {
            Label::InM => Label::OutM,
            Label::OutM => Label::InM,
        }
    }
}

/// One Morse event of a sweep. Heights are ordinals: the position in the
/// word stands in for the critical value, and an optional real height from
/// the source text is kept only so its order can be validated.
#[derive(Clone, Debug, PartialEq)]
pub struct MorseEvent {
    pub kind: EventKind,
    pub height: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EventKind {
    /// A minimum: a circle is born inside `host`, cutting off `face`.
    Birth { host: Sym, circle: Sym, face: Sym },
    /// A maximum: `circle` shrinks away together with its bare leaf face.
    Death { circle: Sym },
    /// An upper saddle: two circles cofacial at `via` fuse into `circle`;
    /// their far faces merge and keep the far face of `a`'s name.
    Merge { a: Sym, b: Sym, via: Sym, circle: Sym },
    /// A lower saddle: `circle` pinches across `via`, dividing it in two.
    /// `side_a` lists the other circles of `via` that go with face `a`; the
    /// rest go with face `b`.
    Split {
        circle: Sym,
        via: Sym,
        side_a: Vec<Sym>,
        a: (Sym, Sym),
        b: (Sym, Sym),
    },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::Birth { .. } => "min",
            EventKind::Death { .. } => "max",
            EventKind::Merge { .. } => "merge",
            EventKind::Split { .. } => "split",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Extremity {
    Min,
    Max,
}

/// Whether an extremum opens into the manifold or out of it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Locality {
    Internal,
    External,
}

/// Upper saddles drop the circle count by one going up, lower saddles raise
/// it by one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Vertical {
    Upper,
    Lower,
}

/// A saddle is unnested exactly when the number of cross-section components
/// changes across it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Nesting {
    Nested,
    Unnested,
}

/// Classification of one event.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "polarity", rename_all = "lowercase")]
pub enum EventClass {
    Extremum {
        end: Extremity,
        locality: Locality,
    },
    Saddle {
        vertical: Vertical,
        nesting: Nesting,
    },
}

impl EventClass {
    pub fn is_saddle(&self) -> bool {
        matches!(self, EventClass::Saddle { .. })
    }

    pub fn is_unnested_saddle(&self) -> bool {
        matches!(
            self,
            EventClass::Saddle {
                nesting: Nesting::Unnested,
                ..
            }
        )
    }

    pub fn is_external_extremum(&self) -> bool {
        matches!(
            self,
            EventClass::Extremum {
                locality: Locality::External,
                ..
            }
        )
    }

    /// Cut levels of the connectivity graph: unnested saddles and external
    /// extrema.
    pub fn is_cut(&self) -> bool {
        self.is_unnested_saddle() || self.is_external_extremum()
    }

    pub fn describe(&self) -> String {
        match self {
            EventClass::Extremum { end, locality } => format!(
                "{} {}",
                match locality {
                    Locality::Internal => "internal",
                    Locality::External => "external",
                },
                match end {
                    Extremity::Min => "min",
                    Extremity::Max => "max",
                }
            ),
            EventClass::Saddle { vertical, nesting } => format!(
                "{} {} saddle",
                match nesting {
                    Nesting::Nested => "nested",
                    Nesting::Unnested => "unnested",
                },
                match vertical {
                    Vertical::Upper => "upper",
                    Vertical::Lower => "lower",
                }
            ),
        }
    }
}

/// An ordered word of Morse events with a label. Event ordinals are 1-based.
#[derive(Clone, Debug)]
pub struct Presentation {
    pub name: String,
    pub events: Vec<MorseEvent>,
}

impl Presentation {
    pub fn new(name: impl Into<String>, events: Vec<MorseEvent>) -> Self {
        Presentation {
            name: name.into(),
            events,
        }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Event at a 1-based ordinal.
    pub fn event(&self, ordinal: usize) -> &MorseEvent {
        &self.events[ordinal - 1]
    }
}
