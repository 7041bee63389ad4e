use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{EventClass, EventKind, Extremity, Label, Locality, Nesting, Vertical};
use crate::sym::Sym;

/// The circle arrangement on a generic level sphere, kept as a labelled tree:
/// faces are nodes, circles are edges joining their two incident faces.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelState {
    faces: BTreeMap<Sym, FaceData>,
    circles: BTreeMap<Sym, (Sym, Sym)>,
}

#[derive(Clone, Debug, PartialEq)]
struct FaceData {
    label: Label,
    circles: BTreeSet<Sym>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ApplyError {
    #[error("unknown face {0}")]
    UnknownFace(Sym),
    #[error("unknown circle {0}")]
    UnknownCircle(Sym),
    #[error("merge needs two distinct circles, got {0} twice")]
    MergeSameCircle(Sym),
    #[error("circles {0} and {1} are not both incident to face {2}")]
    NotCofacial(Sym, Sym, Sym),
    #[error("circle {0} is not incident to face {1}")]
    NotIncident(Sym, Sym),
    #[error("split side list is not a partition of the via face's other circles: {0}")]
    BadPartition(String),
    #[error("death at {0}: neither side is a bare leaf face")]
    DeathNotLeaf(Sym),
    #[error("state invariant broken: {0}")]
    Invariant(String),
}

impl LevelState {
    /// The empty state: a single out-labelled face and no circles. Every
    /// valid presentation starts and ends here.
    pub fn empty(initial_face: Sym) -> Self {
        let mut faces = BTreeMap::new();
        faces.insert(
            initial_face,
            FaceData {
                label: Label::OutM,
                circles: BTreeSet::new(),
            },
        );
        LevelState {
            faces,
            circles: BTreeMap::new(),
        }
    }

    pub fn is_empty_state(&self) -> bool {
        self.circles.is_empty()
            && self.faces.len() == 1
            && self.faces.values().next().unwrap().label == Label::OutM
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn circle_count(&self) -> usize {
        self.circles.len()
    }

    pub fn has_face(&self, f: &Sym) -> bool {
        self.faces.contains_key(f)
    }

    pub fn has_circle(&self, c: &Sym) -> bool {
        self.circles.contains_key(c)
    }

    pub fn label(&self, f: &Sym) -> Option<Label> {
        self.faces.get(f).map(|d| d.label)
    }

    /// The unordered face pair of a circle.
    pub fn circle_faces(&self, c: &Sym) -> Option<(&Sym, &Sym)> {
        self.circles.get(c).map(|(a, b)| (a, b))
    }

    /// Circles incident to a face.
    pub fn face_circles(&self, f: &Sym) -> impl Iterator<Item = &Sym> {
        self.faces
            .get(f)
            .into_iter()
            .flat_map(|d| d.circles.iter())
    }

    pub fn faces(&self) -> impl Iterator<Item = (&Sym, Label)> {
        self.faces.iter().map(|(s, d)| (s, d.label))
    }

    pub fn circles(&self) -> impl Iterator<Item = (&Sym, &(Sym, Sym))> {
        self.circles.iter()
    }

    /// The components of the planar cross-section, in name order.
    pub fn in_faces(&self) -> Vec<Sym> {
        self.faces
            .iter()
            .filter(|(_, d)| d.label == Label::InM)
            .map(|(s, _)| s.clone())
            .collect()
    }

    pub fn in_face_count(&self) -> usize {
        self.faces
            .values()
            .filter(|d| d.label == Label::InM)
            .count()
    }

    /// Given a circle and one of its faces, the face on the other side.
    pub fn far_face(&self, circle: &Sym, near: &Sym) -> Result<Sym, ApplyError> {
        let (a, b) = self
            .circles
            .get(circle)
            .ok_or_else(|| ApplyError::UnknownCircle(circle.clone()))?;
        if a == near {
            Ok(b.clone())
        } else if b == near {
            Ok(a.clone())
        } else {
            Err(ApplyError::NotIncident(circle.clone(), near.clone()))
        }
    }

    /// Full structural check: connected tree, |circles| = |faces| - 1,
    /// alternating labels, and no all-inside sphere.
    pub fn validate(&self) -> Result<(), ApplyError> {
        if self.faces.is_empty() {
            return Err(ApplyError::Invariant("no faces".into()));
        }
        if self.circles.len() + 1 != self.faces.len() {
            return Err(ApplyError::Invariant(format!(
                "{} circles but {} faces",
                self.circles.len(),
                self.faces.len()
            )));
        }
        for (c, (a, b)) in &self.circles {
            if a == b {
                return Err(ApplyError::Invariant(format!("circle {c} bounds one face")));
            }
            let (da, db) = match (self.faces.get(a), self.faces.get(b)) {
                (Some(da), Some(db)) => (da, db),
                _ => {
                    return Err(ApplyError::Invariant(format!(
                        "circle {c} references a missing face"
                    )))
                }
            };
            if da.label == db.label {
                return Err(ApplyError::Invariant(format!(
                    "labels do not alternate across circle {c}"
                )));
            }
            if !da.circles.contains(c) || !db.circles.contains(c) {
                return Err(ApplyError::Invariant(format!(
                    "incidence sets disagree at circle {c}"
                )));
            }
        }
        let total_incidences: usize = self.faces.values().map(|d| d.circles.len()).sum();
        if total_incidences != 2 * self.circles.len() {
            return Err(ApplyError::Invariant("dangling incidence".into()));
        }
        // Connectivity: walk the tree from an arbitrary face.
        let start = self.faces.keys().next().unwrap().clone();
        let mut seen: BTreeSet<Sym> = BTreeSet::new();
        let mut stack = vec![start];
        while let Some(f) = stack.pop() {
            if !seen.insert(f.clone()) {
                continue;
            }
            for c in self.face_circles(&f) {
                let other = self.far_face(c, &f)?;
                if !seen.contains(&other) {
                    stack.push(other);
                }
            }
        }
        if seen.len() != self.faces.len() {
            return Err(ApplyError::Invariant("face tree is disconnected".into()));
        }
        if self.faces.len() == 1 && self.faces.values().next().unwrap().label == Label::InM {
            return Err(ApplyError::Invariant(
                "level sphere lies entirely inside the manifold".into(),
            ));
        }
        Ok(())
    }

    /// Apply one event, returning the successor state and the event's class.
    /// The input state is untouched; simulation snapshots every step.
    pub fn apply(&self, kind: &EventKind) -> Result<(LevelState, EventClass), ApplyError> {
        let mut next = self.clone();
        let class = match kind {
            EventKind::Birth { host, circle, face } => {
                let host_label = self
                    .label(host)
                    .ok_or_else(|| ApplyError::UnknownFace(host.clone()))?;
                next.faces.insert(
                    face.clone(),
                    FaceData {
                        label: host_label.opposite(),
                        circles: BTreeSet::from([circle.clone()]),
                    },
                );
                next.faces
                    .get_mut(host)
                    .unwrap()
                    .circles
                    .insert(circle.clone());
                next.circles
                    .insert(circle.clone(), (host.clone(), face.clone()));
                EventClass::Extremum {
                    end: Extremity::Min,
                    locality: if host_label == Label::OutM {
                        Locality::External
                    } else {
                        Locality::Internal
                    },
                }
            }
            EventKind::Death { circle } => {
                let (a, b) = self
                    .circle_faces(circle)
                    .ok_or_else(|| ApplyError::UnknownCircle(circle.clone()))?;
                let bare = |f: &Sym| self.faces[f].circles.len() == 1;
                // The dying side must be a leaf face bounded only by this
                // circle. When both sides qualify the state is a two-face
                // sphere; the inside face dies so that the survivor is the
                // outside one.
                let dying = match (bare(a), bare(b)) {
                    (true, false) => a.clone(),
                    (false, true) => b.clone(),
                    (true, true) => {
                        if self.faces[a].label == Label::InM {
                            a.clone()
                        } else {
                            b.clone()
                        }
                    }
                    (false, false) => return Err(ApplyError::DeathNotLeaf(circle.clone())),
                };
                let host = self.far_face(circle, &dying)?;
                let dying_label = self.faces[&dying].label;
                next.faces.remove(&dying);
                next.faces.get_mut(&host).unwrap().circles.remove(circle);
                next.circles.remove(circle);
                EventClass::Extremum {
                    end: Extremity::Max,
                    locality: if dying_label == Label::InM {
                        Locality::External
                    } else {
                        Locality::Internal
                    },
                }
            }
            EventKind::Merge { a, b, via, circle } => {
                if a == b {
                    return Err(ApplyError::MergeSameCircle(a.clone()));
                }
                let via_label = self
                    .label(via)
                    .ok_or_else(|| ApplyError::UnknownFace(via.clone()))?;
                if !self.has_circle(a) {
                    return Err(ApplyError::UnknownCircle(a.clone()));
                }
                if !self.has_circle(b) {
                    return Err(ApplyError::UnknownCircle(b.clone()));
                }
                let via_circles = &self.faces[via].circles;
                if !via_circles.contains(a) || !via_circles.contains(b) {
                    return Err(ApplyError::NotCofacial(a.clone(), b.clone(), via.clone()));
                }
                let far_a = self.far_face(a, via)?;
                let far_b = self.far_face(b, via)?;
                debug_assert_ne!(far_a, far_b, "tree state cannot repeat a far face");
                // Fuse far_b into far_a; the fused face keeps far_a's name.
                let moved: Vec<Sym> = next.faces[&far_b].circles.iter().cloned().collect();
                for c in moved {
                    if &c == b {
                        continue;
                    }
                    let pair = next.circles.get_mut(&c).unwrap();
                    if pair.0 == far_b {
                        pair.0 = far_a.clone();
                    }
                    if pair.1 == far_b {
                        pair.1 = far_a.clone();
                    }
                    next.faces
                        .get_mut(&far_a)
                        .unwrap()
                        .circles
                        .insert(c.clone());
                }
                next.faces.remove(&far_b);
                next.faces.get_mut(&far_a).unwrap().circles.remove(a);
                next.faces.get_mut(&far_a).unwrap().circles.remove(b);
                next.faces.get_mut(via).unwrap().circles.remove(a);
                next.faces.get_mut(via).unwrap().circles.remove(b);
                next.circles.remove(a);
                next.circles.remove(b);
                next.circles
                    .insert(circle.clone(), (via.clone(), far_a.clone()));
                next.faces
                    .get_mut(via)
                    .unwrap()
                    .circles
                    .insert(circle.clone());
                next.faces
                    .get_mut(&far_a)
                    .unwrap()
                    .circles
                    .insert(circle.clone());
                EventClass::Saddle {
                    vertical: Vertical::Upper,
                    // The far faces fuse; exactly when they are inside faces
                    // the cross-section loses a component.
                    nesting: if via_label == Label::OutM {
                        Nesting::Unnested
                    } else {
                        Nesting::Nested
                    },
                }
            }
            EventKind::Split {
                circle,
                via,
                side_a,
                a: (circle_a, face_a),
                b: (circle_b, face_b),
            } => {
                let via_label = self
                    .label(via)
                    .ok_or_else(|| ApplyError::UnknownFace(via.clone()))?;
                if !self.has_circle(circle) {
                    return Err(ApplyError::UnknownCircle(circle.clone()));
                }
                if !self.faces[via].circles.contains(circle) {
                    return Err(ApplyError::NotIncident(circle.clone(), via.clone()));
                }
                let far = self.far_face(circle, via)?;
                let mut others: BTreeSet<Sym> = self.faces[via].circles.clone();
                others.remove(circle);
                let mut to_a: BTreeSet<Sym> = BTreeSet::new();
                for c in side_a {
                    if !others.contains(c) {
                        return Err(ApplyError::BadPartition(format!(
                            "{c} is not one of the other circles of {via}"
                        )));
                    }
                    if !to_a.insert(c.clone()) {
                        return Err(ApplyError::BadPartition(format!("{c} listed twice")));
                    }
                }
                let to_b: BTreeSet<Sym> = others.difference(&to_a).cloned().collect();
                next.faces.remove(via);
                next.circles.remove(circle);
                next.faces.get_mut(&far).unwrap().circles.remove(circle);
                let mut fa = FaceData {
                    label: via_label,
                    circles: to_a.clone(),
                };
                fa.circles.insert(circle_a.clone());
                let mut fb = FaceData {
                    label: via_label,
                    circles: to_b.clone(),
                };
                fb.circles.insert(circle_b.clone());
                next.faces.insert(face_a.clone(), fa);
                next.faces.insert(face_b.clone(), fb);
                for c in &to_a {
                    let pair = next.circles.get_mut(c).unwrap();
                    if pair.0 == *via {
                        pair.0 = face_a.clone();
                    }
                    if pair.1 == *via {
                        pair.1 = face_a.clone();
                    }
                }
                for c in &to_b {
                    let pair = next.circles.get_mut(c).unwrap();
                    if pair.0 == *via {
                        pair.0 = face_b.clone();
                    }
                    if pair.1 == *via {
                        pair.1 = face_b.clone();
                    }
                }
                next.circles
                    .insert(circle_a.clone(), (face_a.clone(), far.clone()));
                next.circles
                    .insert(circle_b.clone(), (face_b.clone(), far.clone()));
                next.faces
                    .get_mut(&far)
                    .unwrap()
                    .circles
                    .insert(circle_a.clone());
                next.faces
                    .get_mut(&far)
                    .unwrap()
                    .circles
                    .insert(circle_b.clone());
                EventClass::Saddle {
                    vertical: Vertical::Lower,
                    // The via face divides; exactly when it is an inside face
                    // the cross-section gains a component.
                    nesting: if via_label == Label::InM {
                        Nesting::Unnested
                    } else {
                        Nesting::Nested
                    },
                }
            }
        };
        Ok((next, class))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> Sym {
        Sym::new(x)
    }

    #[test]
    fn first_birth_is_external_min() {
        let st = LevelState::empty(s("f0"));
        let (next, class) = st
            .apply(&EventKind::Birth {
                host: s("f0"),
                circle: s("c1"),
                face: s("f1"),
            })
            .unwrap();
        assert_eq!(next.face_count(), 2);
        assert_eq!(next.circle_count(), 1);
        assert_eq!(
            class,
            EventClass::Extremum {
                end: Extremity::Min,
                locality: Locality::External
            }
        );
        next.validate().unwrap();
    }

    #[test]
    fn merge_same_circle_rejected() {
        let st = LevelState::empty(s("f0"));
        let (st, _) = st
            .apply(&EventKind::Birth {
                host: s("f0"),
                circle: s("c1"),
                face: s("f1"),
            })
            .unwrap();
        let err = st
            .apply(&EventKind::Merge {
                a: s("c1"),
                b: s("c1"),
                via: s("f0"),
                circle: s("c2"),
            })
            .unwrap_err();
        assert!(matches!(err, ApplyError::MergeSameCircle(_)));
    }

    #[test]
    fn death_requires_bare_leaf() {
        // Chain f0 - c1 - f1 - c2 - f2 - c3 - f3: both sides of c2 carry
        // other circles, so it cannot die; the ends can.
        let mut st = LevelState::empty(s("f0"));
        for (host, circle, face) in [("f0", "c1", "f1"), ("f1", "c2", "f2"), ("f2", "c3", "f3")] {
            st = st
                .apply(&EventKind::Birth {
                    host: s(host),
                    circle: s(circle),
                    face: s(face),
                })
                .unwrap()
                .0;
        }
        let err = st.apply(&EventKind::Death { circle: s("c2") }).unwrap_err();
        assert!(matches!(err, ApplyError::DeathNotLeaf(_)));
        // c3's bare side is the inside face f3: an external max.
        let (next, class) = st.apply(&EventKind::Death { circle: s("c3") }).unwrap();
        assert_eq!(
            class,
            EventClass::Extremum {
                end: Extremity::Max,
                locality: Locality::External
            }
        );
        next.validate().unwrap();
        // c1's bare side is the outside face f0: an internal max closing the
        // region behind the level sphere.
        let (next, class) = st.apply(&EventKind::Death { circle: s("c1") }).unwrap();
        assert_eq!(
            class,
            EventClass::Extremum {
                end: Extremity::Max,
                locality: Locality::Internal
            }
        );
        next.validate().unwrap();
    }
}
