use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::state::LevelState;
use super::{EventKind, Label, MorseEvent, Presentation};
use crate::sym::Sym;

/// Shape of randomly generated presentations.
#[derive(Clone, Debug)]
pub struct PresentationGenConfig {
    /// Hard cap on the word length; every generated word closes up within it.
    pub max_events: usize,
    /// Probability of choosing a growing move (birth or split) while there is
    /// room left.
    pub grow_bias: f64,
    /// When set, unnested merges are only performed between cross-section
    /// components whose worldlines are not already joined, so the resulting
    /// connectivity graph is a forest.
    pub tree_only: bool,
}

impl Default for PresentationGenConfig {
    fn default() -> Self {
        PresentationGenConfig {
            max_events: 30,
            grow_bias: 0.62,
            tree_only: false,
        }
    }
}

/// Seeded generator of random legal presentations.
pub struct PresentationGen {
    rng: ChaCha8Rng,
}

/// Union-find over the worldline components of inside faces. Unnested merges
/// join classes; everything else leaves them alone, which is exactly the
/// cycle structure of the connectivity graph.
struct ComponentTracker {
    parent: Vec<usize>,
    class_of: BTreeMap<Sym, usize>,
}

impl ComponentTracker {
    fn new() -> Self {
        ComponentTracker {
            parent: Vec::new(),
            class_of: BTreeMap::new(),
        }
    }

    fn fresh(&mut self, face: Sym) {
        let id = self.parent.len();
        self.parent.push(id);
        self.class_of.insert(face, id);
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn face_class(&mut self, f: &Sym) -> usize {
        let id = self.class_of[f];
        self.find(id)
    }

    fn union(&mut self, a: usize, b: usize) -> usize {
        let (ra, rb) = (self.find(a), self.find(b));
        self.parent[rb] = ra;
        ra
    }
}

impl PresentationGen {
    pub fn new(seed: u64) -> Self {
        PresentationGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Generate one presentation. The word is legal by construction: it is
    /// built by applying candidate events to the evolving level state and
    /// closed up with deaths, which are always available.
    pub fn gen_presentation(&mut self, name: &str, cfg: &PresentationGenConfig) -> Presentation {
        assert!(cfg.max_events >= 2, "a closed word needs at least 2 events");
        let mut state = LevelState::empty(Sym::new("f0"));
        let mut events: Vec<MorseEvent> = Vec::new();
        let mut next_c = 0usize;
        let mut next_f = 0usize;
        let mut tracker = ComponentTracker::new();

        loop {
            let room = cfg.max_events - events.len();
            if state.circle_count() + 2 > room {
                break;
            }
            let grow = self.rng.gen_bool(cfg.grow_bias.clamp(0.0, 1.0));
            let kind = self.pick_event(
                &state,
                grow,
                cfg.tree_only,
                &mut tracker,
                &mut next_c,
                &mut next_f,
            );
            let kind = match kind {
                Some(k) => k,
                None => break,
            };
            self.track(&state, &kind, &mut tracker);
            let (next, _) = state.apply(&kind).expect("generated event is legal");
            events.push(MorseEvent { kind, height: None });
            state = next;
        }

        // Wind down: every tree with a circle has a bare leaf, so deaths
        // close any state.
        while !state.is_empty_state() {
            let candidates = death_candidates(&state);
            let circle = candidates
                .choose(&mut self.rng)
                .expect("non-empty state has a killable leaf")
                .clone();
            let kind = EventKind::Death { circle };
            self.track(&state, &kind, &mut tracker);
            let (next, _) = state.apply(&kind).expect("death of a bare leaf is legal");
            events.push(MorseEvent { kind, height: None });
            state = next;
        }
        Presentation::new(name, events)
    }

    fn pick_event(
        &mut self,
        state: &LevelState,
        grow: bool,
        tree_only: bool,
        tracker: &mut ComponentTracker,
        next_c: &mut usize,
        next_f: &mut usize,
    ) -> Option<EventKind> {
        let fresh_c = |n: &mut usize| {
            *n += 1;
            Sym::new(&format!("c{n}"))
        };
        let fresh_f = |n: &mut usize| {
            *n += 1;
            Sym::new(&format!("f{n}"))
        };
        if grow || state.circle_count() == 0 {
            // Births from any face; splits across any circle.
            let faces: Vec<Sym> = state.faces().map(|(f, _)| f.clone()).collect();
            let choices: Vec<usize> = vec![0; faces.len()];
            let mut split_choices: Vec<(Sym, Sym)> = Vec::new();
            for (c, (a, b)) in state.circles() {
                split_choices.push((c.clone(), a.clone()));
                split_choices.push((c.clone(), b.clone()));
            }
            let total = choices.len() + split_choices.len();
            let pick = self.rng.gen_range(0..total);
            if pick < choices.len() {
                let host = faces[pick].clone();
                return Some(EventKind::Birth {
                    host,
                    circle: fresh_c(next_c),
                    face: fresh_f(next_f),
                });
            }
            let (circle, via) = split_choices[pick - choices.len()].clone();
            let others: Vec<Sym> = state
                .face_circles(&via)
                .filter(|c| **c != circle)
                .cloned()
                .collect();
            let side_a: Vec<Sym> = others
                .into_iter()
                .filter(|_| self.rng.gen_bool(0.5))
                .collect();
            Some(EventKind::Split {
                circle,
                via,
                side_a,
                a: (fresh_c(next_c), fresh_f(next_f)),
                b: (fresh_c(next_c), fresh_f(next_f)),
            })
        } else {
            // Shrinking: merge or death.
            let mut merges: Vec<(Sym, Sym, Sym)> = Vec::new();
            for (f, label) in state.faces() {
                let cs: Vec<&Sym> = state.face_circles(f).collect();
                if cs.len() < 2 {
                    continue;
                }
                for i in 0..cs.len() {
                    for j in i + 1..cs.len() {
                        if tree_only && label == Label::OutM {
                            let fa = state.far_face(cs[i], f).unwrap();
                            let fb = state.far_face(cs[j], f).unwrap();
                            if tracker.face_class(&fa) == tracker.face_class(&fb) {
                                continue;
                            }
                        }
                        merges.push((cs[i].clone(), cs[j].clone(), f.clone()));
                    }
                }
            }
            let deaths = death_candidates(state);
            let total = merges.len() + deaths.len();
            if total == 0 {
                return None;
            }
            let pick = self.rng.gen_range(0..total);
            if pick < merges.len() {
                let (a, b, via) = merges[pick].clone();
                Some(EventKind::Merge {
                    a,
                    b,
                    via,
                    circle: fresh_c(next_c),
                })
            } else {
                Some(EventKind::Death {
                    circle: deaths[pick - merges.len()].clone(),
                })
            }
        }
    }

    fn track(&mut self, state: &LevelState, kind: &EventKind, tracker: &mut ComponentTracker) {
        match kind {
            EventKind::Birth { host, face, .. } => {
                if state.label(host) == Some(Label::OutM) {
                    tracker.fresh(face.clone());
                }
            }
            EventKind::Death { .. } => {}
            EventKind::Merge { a, b, via, .. } => {
                if state.label(via) == Some(Label::OutM) {
                    let far_a = state.far_face(a, via).unwrap();
                    let far_b = state.far_face(b, via).unwrap();
                    let ca = tracker.face_class(&far_a);
                    let cb = tracker.face_class(&far_b);
                    let joined = tracker.union(ca, cb);
                    tracker.class_of.remove(&far_b);
                    tracker.class_of.insert(far_a, joined);
                }
            }
            EventKind::Split {
                via,
                a: (_, fa),
                b: (_, fb),
                ..
            } => {
                if state.label(via) == Some(Label::InM) {
                    let cls = tracker.face_class(via);
                    tracker.class_of.remove(via);
                    tracker.class_of.insert(fa.clone(), cls);
                    tracker.class_of.insert(fb.clone(), cls);
                }
            }
        }
    }
}

fn death_candidates(state: &LevelState) -> Vec<Sym> {
    state
        .circles()
        .filter(|(c, (a, b))| {
            let bare = |f: &Sym| state.face_circles(f).count() == 1 && {
                let only = state.face_circles(f).next().unwrap();
                only == *c
            };
            bare(a) || bare(b)
        })
        .map(|(c, _)| c.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::simulate;
    use super::*;

    #[test]
    fn generated_words_simulate_clean() {
        let mut g = PresentationGen::new(7);
        let cfg = PresentationGenConfig::default();
        for i in 0..200 {
            let p = g.gen_presentation(&format!("rand{i}"), &cfg);
            assert!(p.len() <= cfg.max_events);
            simulate(&p).unwrap_or_else(|e| panic!("word {i} failed: {e}\n{p:?}"));
        }
    }

    #[test]
    fn tree_words_have_forest_connectivity() {
        use crate::connectivity::{build_connectivity_graph, fox_decision_graph};
        let mut g = PresentationGen::new(11);
        let cfg = PresentationGenConfig {
            tree_only: true,
            ..Default::default()
        };
        for i in 0..200 {
            let p = g.gen_presentation(&format!("tree{i}"), &cfg);
            let t = simulate(&p).unwrap();
            let gamma = build_connectivity_graph(&t);
            let fox = fox_decision_graph(&gamma);
            assert!(fox.verdict, "word {i} produced a cycle\n{p:?}");
        }
    }
}
