use std::collections::BTreeSet;

use thiserror::Error;

use super::{EventKind, MorseEvent, Presentation};
use crate::sym::Sym;

/// Syntax or resolution error, with a 1-based line and column.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}, col {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

fn err<T>(line: usize, col: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        col,
        msg: msg.into(),
    })
}

/// Parse presentation source. One event per line in the forms
///
/// ```text
/// min <circle> in <face> new <face>
/// max <circle>
/// merge <c1> <c2> in <face> as <c>
/// split <c> thru <face> as <c1>:<face1>[<circle-list>] <c2>:<face2>
/// ```
///
/// `#` starts a comment, `/` separates events inline, and any event may end
/// with `@ <height>`; heights must be strictly increasing and are otherwise
/// ignored, since only the order of events matters. The initial face is
/// always `f0` and is outside the manifold.
pub fn parse_presentation(name: &str, text: &str) -> Result<Presentation, ParseError> {
    let mut events = Vec::new();
    let mut defined: BTreeSet<Sym> = BTreeSet::new();
    defined.insert(Sym::new("f0"));
    let mut last_height: Option<(f64, usize)> = None;

    for (lineno, raw_line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = match raw_line.find('#') {
            Some(i) => &raw_line[..i],
            None => raw_line,
        };
        let mut chunk_start = 0usize;
        for chunk in line.split('/') {
            let col0 = chunk_start + 1;
            chunk_start += chunk.len() + 1;
            if chunk.trim().is_empty() {
                continue;
            }
            let mut toks = Tokens::new(chunk, line_no, col0);
            let event = parse_event(&mut toks, &mut defined)?;
            if let Some(h) = event.height {
                if let Some((prev, prev_line)) = last_height {
                    if h == prev {
                        return err(
                            line_no,
                            col0,
                            format!("height {h} already used on line {prev_line}: critical values must be distinct"),
                        );
                    }
                    if h < prev {
                        return err(
                            line_no,
                            col0,
                            format!(
                                "height {h} is below the previous height {prev}: events must be listed in height order"
                            ),
                        );
                    }
                }
                last_height = Some((h, line_no));
            }
            events.push(event);
        }
    }
    if events.is_empty() {
        return err(1, 1, "empty input: no events");
    }
    Ok(Presentation::new(name, events))
}

fn parse_event(
    toks: &mut Tokens<'_>,
    defined: &mut BTreeSet<Sym>,
) -> Result<MorseEvent, ParseError> {
    let (head, line, col) = toks.word()?;
    let kind = match head {
        "min" => {
            let circle = fresh(toks, defined)?;
            toks.keyword("in")?;
            let host = known(toks, defined)?;
            toks.keyword("new")?;
            let face = fresh(toks, defined)?;
            EventKind::Birth { host, circle, face }
        }
        "max" => {
            let circle = known(toks, defined)?;
            EventKind::Death { circle }
        }
        "merge" => {
            let a = known(toks, defined)?;
            let b = known(toks, defined)?;
            toks.keyword("in")?;
            let via = known(toks, defined)?;
            toks.keyword("as")?;
            let circle = fresh(toks, defined)?;
            EventKind::Merge { a, b, via, circle }
        }
        "split" => {
            let circle = known(toks, defined)?;
            toks.keyword("thru")?;
            let via = known(toks, defined)?;
            toks.keyword("as")?;
            let (ca, fa, list) = toks.side_spec()?;
            let circle_a = fresh_name(&ca, toks.line, toks.last_col, defined)?;
            let face_a = fresh_name(&fa, toks.line, toks.last_col, defined)?;
            let mut side_a = Vec::new();
            for name in list {
                let sym = Sym::new(&name);
                if !defined.contains(&sym) {
                    return err(toks.line, toks.last_col, format!("unknown identifier {name}"));
                }
                side_a.push(sym);
            }
            let (cb, fb, list_b) = toks.side_spec()?;
            if !list_b.is_empty() {
                return err(
                    toks.line,
                    toks.last_col,
                    "only the first split side carries a circle list; the rest go to the second side",
                );
            }
            let circle_b = fresh_name(&cb, toks.line, toks.last_col, defined)?;
            let face_b = fresh_name(&fb, toks.line, toks.last_col, defined)?;
            EventKind::Split {
                circle,
                via,
                side_a,
                a: (circle_a, face_a),
                b: (circle_b, face_b),
            }
        }
        other => return err(line, col, format!("unknown event `{other}`")),
    };
    let height = toks.height()?;
    toks.finish()?;
    Ok(MorseEvent { kind, height })
}

fn known(toks: &mut Tokens<'_>, defined: &BTreeSet<Sym>) -> Result<Sym, ParseError> {
    let (w, line, col) = toks.word()?;
    let sym = Sym::new(w);
    if !defined.contains(&sym) {
        return err(line, col, format!("unknown identifier {w}"));
    }
    Ok(sym)
}

fn fresh(toks: &mut Tokens<'_>, defined: &mut BTreeSet<Sym>) -> Result<Sym, ParseError> {
    let (w, line, col) = toks.word()?;
    fresh_name(w, line, col, defined)
}

fn fresh_name(
    w: &str,
    line: usize,
    col: usize,
    defined: &mut BTreeSet<Sym>,
) -> Result<Sym, ParseError> {
    if !is_ident(w) {
        return err(line, col, format!("bad identifier `{w}`"));
    }
    let sym = Sym::new(w);
    if !defined.insert(sym.clone()) {
        return err(
            line,
            col,
            format!("redefinition of {w}: identifiers are never reused"),
        );
    }
    Ok(sym)
}

fn is_ident(w: &str) -> bool {
    !w.is_empty()
        && w.chars().next().unwrap().is_ascii_alphabetic()
        && w.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Tokens<'a> {
    rest: &'a str,
    line: usize,
    col: usize,
    last_col: usize,
}

impl<'a> Tokens<'a> {
    fn new(chunk: &'a str, line: usize, col: usize) -> Self {
        Tokens {
            rest: chunk,
            line,
            col,
            last_col: col,
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.rest.chars().next() {
            if c.is_whitespace() {
                self.rest = &self.rest[c.len_utf8()..];
                self.col += 1;
            } else {
                break;
            }
        }
    }

    fn word(&mut self) -> Result<(&'a str, usize, usize), ParseError> {
        self.skip_ws();
        self.last_col = self.col;
        if self.rest.is_empty() {
            return err(self.line, self.col, "unexpected end of event");
        }
        let end = self
            .rest
            .find(|c: char| c.is_whitespace())
            .unwrap_or(self.rest.len());
        let w = &self.rest[..end];
        self.rest = &self.rest[end..];
        self.col += end;
        Ok((w, self.line, self.last_col))
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        let (w, line, col) = self.word()?;
        if w != kw {
            return err(line, col, format!("expected `{kw}`, found `{w}`"));
        }
        Ok(())
    }

    /// A split side: `circle:face` or `circle:face[list]`. The list, when
    /// present, may separate names with commas or spaces.
    fn side_spec(&mut self) -> Result<(String, String, Vec<String>), ParseError> {
        self.skip_ws();
        self.last_col = self.col;
        if self.rest.is_empty() {
            return err(self.line, self.col, "expected a split side `circle:face`");
        }
        // A side may contain spaces inside the bracket list, so scan through
        // a balanced bracket if one opens.
        let mut end = 0;
        let mut in_brackets = false;
        for (i, c) in self.rest.char_indices() {
            match c {
                '[' => in_brackets = true,
                ']' => in_brackets = false,
                c if c.is_whitespace() && !in_brackets => {
                    end = i;
                    break;
                }
                _ => {}
            }
            end = i + c.len_utf8();
        }
        if in_brackets {
            return err(self.line, self.last_col, "unclosed `[` in split side");
        }
        let spec = &self.rest[..end];
        self.rest = &self.rest[end..];
        self.col += end;
        let (pair, list) = match spec.find('[') {
            Some(i) => {
                if !spec.ends_with(']') {
                    return err(self.line, self.last_col, "expected `]` at end of side");
                }
                (&spec[..i], &spec[i + 1..spec.len() - 1])
            }
            None => (spec, ""),
        };
        let (c, f) = match pair.split_once(':') {
            Some((c, f)) if is_ident(c) && is_ident(f) => (c, f),
            _ => {
                return err(
                    self.line,
                    self.last_col,
                    format!("expected `circle:face`, found `{pair}`"),
                )
            }
        };
        let names: Vec<String> = list
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.to_string())
            .collect();
        Ok((c.to_string(), f.to_string(), names))
    }

    /// Optional trailing `@ <height>`.
    fn height(&mut self) -> Result<Option<f64>, ParseError> {
        self.skip_ws();
        if let Some(stripped) = self.rest.strip_prefix('@') {
            self.rest = stripped;
            self.col += 1;
            let (w, line, col) = self.word()?;
            match w.parse::<f64>() {
                Ok(h) if h.is_finite() => return Ok(Some(h)),
                _ => return err(line, col, format!("bad height `{w}`")),
            }
        }
        Ok(None)
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        self.skip_ws();
        if !self.rest.is_empty() {
            return err(
                self.line,
                self.col,
                format!("trailing input `{}`", self.rest.trim_end()),
            );
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_word_parses() {
        let p = parse_presentation("ball", "min c1 in f0 new f1 / max c1").unwrap();
        assert_eq!(p.len(), 2);
        assert!(matches!(p.events[0].kind, EventKind::Birth { .. }));
        assert!(matches!(p.events[1].kind, EventKind::Death { .. }));
    }

    #[test]
    fn donut_flat_fixture_parses() {
        let src = "\
# flat solid torus
min c1 in f0 new f1
split c1 thru f0 as c2:f2[] c3:f3
merge c2 c3 in f1 as c4
max c4
";
        let p = parse_presentation("donut_flat", src).unwrap();
        assert_eq!(p.len(), 4);
        match &p.events[1].kind {
            EventKind::Split { side_a, .. } => assert!(side_a.is_empty()),
            other => panic!("expected split, got {other:?}"),
        }
    }

    #[test]
    fn merge_with_identical_circles_is_caught_in_simulation_not_parse() {
        // `merge c9 c9` with undefined names is a parse error; with defined
        // names it parses and the simulator rejects it.
        let e = parse_presentation("bad", "merge c9 c9 in f0 as c2").unwrap_err();
        assert!(e.msg.contains("unknown identifier"));
    }

    #[test]
    fn redefinition_rejected() {
        let e = parse_presentation("bad", "min c1 in f0 new f1\nmin c1 in f0 new f2").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.msg.contains("redefinition"));
    }

    #[test]
    fn empty_input_rejected() {
        let e = parse_presentation("empty", "# nothing\n").unwrap_err();
        assert!(e.msg.contains("empty input"));
    }

    #[test]
    fn heights_must_increase_strictly() {
        let ok = parse_presentation("h", "min c1 in f0 new f1 @ 0.5\nmax c1 @ 1.5");
        assert!(ok.is_ok());
        let dup = parse_presentation("h", "min c1 in f0 new f1 @ 0.5\nmax c1 @ 0.5").unwrap_err();
        assert!(dup.msg.contains("distinct"));
        let dec = parse_presentation("h", "min c1 in f0 new f1 @ 0.5\nmax c1 @ 0.25").unwrap_err();
        assert!(dec.msg.contains("height order"));
    }

    #[test]
    fn split_list_names_must_exist() {
        let src = "min c1 in f0 new f1\nsplit c1 thru f0 as c2:f2[cZ] c3:f3";
        let e = parse_presentation("bad", src).unwrap_err();
        assert!(e.msg.contains("unknown identifier cZ"));
    }
}
