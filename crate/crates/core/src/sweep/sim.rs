use std::collections::BTreeMap;

use thiserror::Error;

use super::state::{ApplyError, LevelState};
use super::{EventClass, EventKind, Label, MorseEvent, Presentation};
use crate::sym::Sym;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("event {ordinal} ({event}): {source}")]
    Apply {
        ordinal: usize,
        event: String,
        source: ApplyError,
    },
    #[error(
        "non-empty final state ({faces} faces, {circles} circles): the surface is unclosed or \
         encloses a pole; truncate the word above its highest critical value so the polar ball \
         is removed before presenting"
    )]
    NonEmptyFinal { faces: usize, circles: usize },
}

/// One step of a sweep: the classified event and the level state just above
/// it. The states between consecutive events are the regular levels.
#[derive(Clone, Debug)]
pub struct TraceEntry {
    pub class: EventClass,
    pub state_after: LevelState,
}

/// The full record of a sweep.
#[derive(Clone, Debug)]
pub struct Trace {
    pub name: String,
    pub initial: LevelState,
    pub entries: Vec<TraceEntry>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// State at regular gap `g`: gap 0 is below the first event, gap `n` is
    /// above the last.
    pub fn state_at_gap(&self, g: usize) -> &LevelState {
        if g == 0 {
            &self.initial
        } else {
            &self.entries[g - 1].state_after
        }
    }

    /// Class of the event at a 1-based ordinal.
    pub fn class(&self, ordinal: usize) -> EventClass {
        self.entries[ordinal - 1].class
    }

    /// Number of cross-section components at every interior regular level
    /// (gaps 1 through n-1).
    pub fn interior_census(&self) -> Vec<usize> {
        (1..self.entries.len())
            .map(|g| self.state_at_gap(g).in_face_count())
            .collect()
    }

    /// Ordinals of cut levels: unnested saddles and external extrema.
    pub fn cut_ordinals(&self) -> Vec<usize> {
        (1..=self.len()).filter(|&i| self.class(i).is_cut()).collect()
    }
}

/// Run a presentation from the empty state, validating every step, and
/// require that it closes back up to the empty state.
pub fn simulate(p: &Presentation) -> Result<Trace, SimError> {
    let initial = LevelState::empty(Sym::new("f0"));
    let mut state = initial.clone();
    let mut entries = Vec::with_capacity(p.len());
    for (i, ev) in p.events.iter().enumerate() {
        let ordinal = i + 1;
        let wrap = |source: ApplyError| SimError::Apply {
            ordinal,
            event: ev.kind.name().to_string(),
            source,
        };
        let (next, class) = state.apply(&ev.kind).map_err(wrap)?;
        next.validate().map_err(wrap)?;
        entries.push(TraceEntry {
            class,
            state_after: next.clone(),
        });
        state = next;
    }
    if !state.is_empty_state() {
        return Err(SimError::NonEmptyFinal {
            faces: state.face_count(),
            circles: state.circle_count(),
        });
    }
    Ok(Trace {
        name: p.name.clone(),
        initial,
        entries,
    })
}

/// The height-reflected presentation: the word reversed, with births and
/// deaths exchanged and merges and splits exchanged, sites transported.
/// Identifiers are regenerated, since every name's lifetime runs backwards.
pub fn reflect(p: &Presentation) -> Result<Presentation, SimError> {
    let trace = simulate(p)?;
    let n = p.len();
    let mut map: BTreeMap<Sym, Sym> = BTreeMap::new();
    let final_face = trace
        .state_at_gap(n)
        .faces()
        .next()
        .map(|(s, _)| s.clone())
        .expect("final state has one face");
    map.insert(final_face, Sym::new("f0"));
    let mut next_c = 0usize;
    let mut next_f = 0usize;
    let mut fresh_c = || {
        next_c += 1;
        Sym::new(&format!("c{next_c}"))
    };
    let mut fresh_f = || {
        next_f += 1;
        Sym::new(&format!("f{next_f}"))
    };

    let mut events = Vec::with_capacity(n);
    for ordinal in (1..=n).rev() {
        let before = trace.state_at_gap(ordinal - 1);
        let after = trace.state_at_gap(ordinal);
        let kind = match &p.event(ordinal).kind {
            EventKind::Birth { circle, face, .. } => {
                let d = EventKind::Death {
                    circle: map[circle].clone(),
                };
                map.remove(circle);
                map.remove(face);
                d
            }
            EventKind::Death { circle } => {
                let (a, b) = before.circle_faces(circle).expect("live at its death");
                let bare = |f: &Sym| before.face_circles(f).count() == 1;
                let dying = match (bare(a), bare(b)) {
                    (true, false) => a.clone(),
                    (false, true) => b.clone(),
                    _ => {
                        if before.label(a) == Some(Label::InM) {
                            a.clone()
                        } else {
                            b.clone()
                        }
                    }
                };
                let host = before.far_face(circle, &dying).expect("incident");
                let rc = fresh_c();
                let rf = fresh_f();
                let birth = EventKind::Birth {
                    host: map[&host].clone(),
                    circle: rc.clone(),
                    face: rf.clone(),
                };
                map.insert(circle.clone(), rc);
                map.insert(dying, rf);
                birth
            }
            EventKind::Merge { a, b, via, circle } => {
                let far_a = before.far_face(a, via).expect("incident");
                let far_b = before.far_face(b, via).expect("incident");
                // The fused face kept far_a's name.
                let side_a: Vec<Sym> = before
                    .face_circles(&far_a)
                    .filter(|c| *c != a)
                    .map(|c| map[c].clone())
                    .collect();
                let rca = fresh_c();
                let rcb = fresh_c();
                let rfa = fresh_f();
                let rfb = fresh_f();
                let split = EventKind::Split {
                    circle: map[circle].clone(),
                    via: map[&far_a].clone(),
                    side_a,
                    a: (rca.clone(), rfa.clone()),
                    b: (rcb.clone(), rfb.clone()),
                };
                map.remove(circle);
                map.remove(&far_a);
                map.insert(a.clone(), rca);
                map.insert(b.clone(), rcb);
                map.insert(far_a, rfa);
                map.insert(far_b, rfb);
                split
            }
            EventKind::Split {
                circle,
                via,
                a: (ca, fa),
                b: (cb, fb),
                ..
            } => {
                let far = after.far_face(ca, fa).expect("incident");
                let merge = EventKind::Merge {
                    a: map[ca].clone(),
                    b: map[cb].clone(),
                    via: map[&far].clone(),
                    circle: {
                        let rc = fresh_c();
                        map.insert(circle.clone(), rc.clone());
                        rc
                    },
                };
                // The reflected merge fuses the reflections of fa and fb and
                // keeps the reflection of fa's name, which now stands for the
                // original via face.
                let rfa = map[fa].clone();
                map.remove(ca);
                map.remove(cb);
                map.remove(fa);
                map.remove(fb);
                map.insert(via.clone(), rfa);
                merge
            }
        };
        events.push(MorseEvent { kind, height: None });
    }
    Ok(Presentation::new(format!("{}_reflected", p.name), events))
}

#[cfg(test)]
mod tests {
    use super::super::parse_presentation;
    use super::super::{Extremity, Locality, Nesting, Vertical};
    use super::*;

    pub(crate) const DONUT_FLAT: &str = "\
min c1 in f0 new f1
split c1 thru f0 as c2:f2[] c3:f3
merge c2 c3 in f1 as c4
max c4
";

    pub(crate) const DONUT_VERTICAL: &str = "\
min c1 in f0 new f1
split c1 thru f1 as c2:f2[] c3:f3
merge c2 c3 in f0 as c4
max c4
";

    fn classes(trace: &Trace) -> Vec<String> {
        trace.entries.iter().map(|e| e.class.describe()).collect()
    }

    #[test]
    fn donut_flat_sweep() {
        let p = parse_presentation("donut_flat", DONUT_FLAT).unwrap();
        let t = simulate(&p).unwrap();
        assert_eq!(
            classes(&t),
            [
                "external min",
                "nested lower saddle",
                "nested upper saddle",
                "external max"
            ]
        );
        assert_eq!(t.interior_census(), [1, 1, 1]);
    }

    #[test]
    fn donut_vertical_sweep() {
        let p = parse_presentation("donut_vertical", DONUT_VERTICAL).unwrap();
        let t = simulate(&p).unwrap();
        assert_eq!(
            classes(&t),
            [
                "external min",
                "unnested lower saddle",
                "unnested upper saddle",
                "external max"
            ]
        );
        assert_eq!(t.interior_census(), [1, 2, 1]);
    }

    #[test]
    fn two_balls_merge_is_unnested_upper() {
        let p = parse_presentation(
            "two_balls",
            "min c1 in f0 new f1\nmin c2 in f0 new f2\nmerge c1 c2 in f0 as c3\nmax c3",
        )
        .unwrap();
        let t = simulate(&p).unwrap();
        assert_eq!(
            t.class(3),
            EventClass::Saddle {
                vertical: Vertical::Upper,
                nesting: Nesting::Unnested
            }
        );
        // The cross-section census drops from 2 to 1 at the saddle.
        assert_eq!(t.interior_census(), [1, 2, 1]);
    }

    #[test]
    fn unclosed_word_is_rejected() {
        let p = parse_presentation("open", "min c1 in f0 new f1").unwrap();
        let e = simulate(&p).unwrap_err();
        assert!(matches!(e, SimError::NonEmptyFinal { .. }));
    }

    #[test]
    fn merge_same_circle_rejected_in_simulation() {
        let p = parse_presentation(
            "bad",
            "min c9 in f0 new f1\nmin c8 in f0 new f2\nmerge c9 c9 in f0 as c2\nmax c2",
        )
        .unwrap();
        let e = simulate(&p).unwrap_err();
        match e {
            SimError::Apply {
                ordinal, source, ..
            } => {
                assert_eq!(ordinal, 3);
                assert!(matches!(source, ApplyError::MergeSameCircle(_)));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn reflection_swaps_vertical_and_extremity_labels() {
        for src in [DONUT_FLAT, DONUT_VERTICAL] {
            let p = parse_presentation("p", src).unwrap();
            let t = simulate(&p).unwrap();
            let r = reflect(&p).unwrap();
            let rt = simulate(&r).unwrap();
            let mut fwd: Vec<EventClass> = t.entries.iter().map(|e| e.class).collect();
            let mut bwd: Vec<EventClass> = rt
                .entries
                .iter()
                .rev()
                .map(|e| match e.class {
                    EventClass::Saddle { vertical, nesting } => EventClass::Saddle {
                        vertical: match vertical {
                            Vertical::Upper => Vertical::Lower,
                            Vertical::Lower => Vertical::Upper,
                        },
                        nesting,
                    },
                    EventClass::Extremum { end, locality } => EventClass::Extremum {
                        end: match end {
                            Extremity::Min => Extremity::Max,
                            Extremity::Max => Extremity::Min,
                        },
                        locality,
                    },
                })
                .collect();
            fwd.sort_by_key(|c| format!("{c:?}"));
            bwd.sort_by_key(|c| format!("{c:?}"));
            assert_eq!(fwd, bwd);
        }
    }
}
