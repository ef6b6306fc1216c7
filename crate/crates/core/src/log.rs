//! Event log of a sequence of realizations and its line-oriented text form.
//!
//! ```text
//! # ppp-trace v1
//! realize b
//! species 2
//! realize a
//! free b
//! ```

use fixedbitset::FixedBitSet;

use crate::error::TraceError;
use crate::matrix::BinaryMatrix;

pub const TRACE_HEADER: &str = "# ppp-trace v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    /// A character was realized; `component` holds the species of its
    /// connected component at that moment.
    CharacterRealized {
        character: usize,
        component: FixedBitSet,
    },
    /// An active character became free and lost its edges.
    CharacterFreed {
        character: usize,
        component: FixedBitSet,
    },
    /// A species lost its last edge.
    SpeciesRealized { species: usize },
}

impl Event {
    pub fn kind(&self) -> TraceEvent {
        match *self {
            Event::CharacterRealized { character, .. } => TraceEvent::Realize(character),
            Event::CharacterFreed { character, .. } => TraceEvent::Free(character),
            Event::SpeciesRealized { species } => TraceEvent::Species(species),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RealizationLog {
    events: Vec<Event>,
}

impl RealizationLog {
    pub fn push(&mut self, event: Event) {
        self.events.push(event);
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Characters in realization order.
    pub fn realized(&self) -> Vec<usize> {
        self.events
            .iter()
            .filter_map(|e| match e {
                Event::CharacterRealized { character, .. } => Some(*character),
                _ => None,
            })
            .collect()
    }

    pub fn trace_events(&self) -> Vec<TraceEvent> {
        self.events.iter().map(Event::kind).collect()
    }

    pub fn to_trace(&self, m: &BinaryMatrix) -> String {
        let mut out = String::from(TRACE_HEADER);
        out.push('\n');
        for event in &self.events {
            out.push_str(&event.kind().render(m));
            out.push('\n');
        }
        out
    }
}

/// One line of a trace, without component details.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEvent {
    Realize(usize),
    Free(usize),
    Species(usize),
}

impl TraceEvent {
    pub fn render(&self, m: &BinaryMatrix) -> String {
        match *self {
            TraceEvent::Realize(c) => format!("realize {}", m.character_label(c)),
            TraceEvent::Free(c) => format!("free {}", m.character_label(c)),
            TraceEvent::Species(s) => format!("species {}", m.species_label(s)),
        }
    }
}

/// A parsed trace. `realized` repeats the `realize` lines in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
    pub realized: Vec<usize>,
}

impl Trace {
    /// Whether the trace lists anything beyond `realize` lines.
    pub fn has_bookkeeping(&self) -> bool {
        self.events
            .iter()
            .any(|e| !matches!(e, TraceEvent::Realize(_)))
    }
}

/// Parses a trace against the labels of `m`. A character realized twice is
/// rejected.
pub fn parse_trace(text: &str, m: &BinaryMatrix) -> Result<Trace, TraceError> {
    let mut events = Vec::new();
    let mut realized = Vec::new();
    let mut seen = FixedBitSet::with_capacity(m.n_characters());
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let mut parts = text.split_whitespace();
        let (Some(verb), Some(label), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(TraceError::Syntax {
                line,
                msg: format!("expected `<verb> <label>`, got `{text}`"),
            });
        };
        let character = |label: &str| {
            m.character_index(label)
                .ok_or_else(|| TraceError::UnknownCharacter {
                    line,
                    label: label.to_string(),
                })
        };
        let event = match verb {
            "realize" => {
                let c = character(label)?;
                if seen.contains(c) {
                    return Err(TraceError::DuplicateRealization {
                        line,
                        label: label.to_string(),
                    });
                }
                seen.insert(c);
                realized.push(c);
                TraceEvent::Realize(c)
            }
            "free" => TraceEvent::Free(character(label)?),
            "species" => {
                let first = label.split('|').next().unwrap_or(label);
                let s = m
                    .species_index(first)
                    .ok_or_else(|| TraceError::UnknownSpecies {
                        line,
                        label: label.to_string(),
                    })?;
                TraceEvent::Species(s)
            }
            other => {
                return Err(TraceError::Syntax {
                    line,
                    msg: format!("unknown verb `{other}`"),
                })
            }
        };
        events.push(event);
    }
    Ok(Trace { events, realized })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::replay;
    use crate::matrix::{ExtendedMatrix, LoadOptions};

    fn worked() -> BinaryMatrix {
        BinaryMatrix::parse(
            "# characters: a,b,c,d,e\n5 5\n0 0 1 1 0\n0 1 0 0 0\n1 0 0 0 0\n1 0 0 0 1\n1 1 1 0 0\n",
            LoadOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn worked_trace_text() {
        let m = worked();
        let r = replay(&ExtendedMatrix::build(&m), &[1, 0, 2, 3, 4]).unwrap();
        let text = r.log.to_trace(&m);
        let expected = "# ppp-trace v1\nrealize b\nspecies 2\nrealize a\nrealize c\nspecies 5\n\
                        free b\nfree a\nfree c\nspecies 3\nrealize d\nspecies 1\nfree d\n\
                        realize e\nspecies 4\nfree e\n";
        assert_eq!(text, expected);
        let parsed = parse_trace(&text, &m).unwrap();
        assert_eq!(parsed.events, r.log.trace_events());
        assert_eq!(parsed.realized, vec![1, 0, 2, 3, 4]);
    }

    #[test]
    fn rejects_duplicate_realization() {
        let m = worked();
        let err = parse_trace("realize b\nrealize a\nrealize b\n", &m).unwrap_err();
        assert!(err.to_string().contains("duplicate realization"), "{err}");
    }

    #[test]
    fn rejects_unknown_labels_and_verbs() {
        let m = worked();
        assert!(matches!(
            parse_trace("realize z", &m),
            Err(TraceError::UnknownCharacter { line: 1, .. })
        ));
        assert!(matches!(
            parse_trace("\nspecies 9", &m),
            Err(TraceError::UnknownSpecies { line: 2, .. })
        ));
        assert!(matches!(
            parse_trace("grow a", &m),
            Err(TraceError::Syntax { .. })
        ));
        assert!(matches!(
            parse_trace("realize", &m),
            Err(TraceError::Syntax { .. })
        ));
    }

    #[test]
    fn bare_realize_lines() {
        let m = worked();
        let t = parse_trace("# hand written\nrealize b\nrealize a\n", &m).unwrap();
        assert!(!t.has_bookkeeping());
        assert_eq!(t.realized, vec![1, 0]);
    }
}
