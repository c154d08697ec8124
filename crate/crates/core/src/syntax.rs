//! Textual TIOA format.
//!
//! ```text
//! automaton Scheduler {
//!   clocks x;
//!   inputs finish;
//!   outputs start;
//!   location A init inv: x<=100 {
//!     on start reset {x} goto B;
//!   }
//!   location B {
//!     on finish guard: x>=5 && x<=8 reset {x} goto A;
//!   }
//! }
//! ```
//!
//! A file holds any number of automata, optionally preceded by
//! `name "..." ;` and `description "..." ;`. Line comments start with `//`.

use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::constraint::{Atom, ClockConstraint as CC, Rel};
use crate::tioa::{Edge, Location, Tioa, Violation};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpecFile {
    pub name: Option<String>,
    pub description: Option<String>,
    pub automata: Vec<Tioa>,
}

impl SpecFile {
    pub fn get(&self, name: &str) -> Option<&Tioa> {
        self.automata.iter().find(|a| a.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("{pos}: syntax error: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("{pos}: duplicate {kind} `{name}`")]
    Duplicate { pos: Pos, kind: &'static str, name: String },
    #[error("{pos}: unknown {kind} `{name}`")]
    Unknown { pos: Pos, kind: &'static str, name: String },
    #[error("{pos}: invalid automaton `{automaton}`: {}", list(.violations))]
    Invalid { pos: Pos, automaton: String, violations: Vec<Violation> },
}

fn list(vs: &[Violation]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

impl ParseError {
    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::Duplicate { pos, .. }
            | ParseError::Unknown { pos, .. }
            | ParseError::Invalid { pos, .. } => *pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Int(i64),
    Str(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

const SYMBOLS: [&str; 16] =
    ["&&", "||", "<=", ">=", "==", "<", ">", "!", "(", ")", "{", "}", ";", ",", ":", "-"];

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '.' | '\'')
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize| {
        for k in 0..n {
            if chars[*i + k] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        }
        *i += n;
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            let mut n = 0;
            while i + n < chars.len() && chars[i + n] != '\n' {
                n += 1;
            }
            advance(&mut i, &mut line, &mut col, n);
        } else if c == '"' {
            let mut s = String::new();
            let mut n = 1;
            loop {
                match chars.get(i + n) {
                    None => {
                        return Err(ParseError::Syntax { pos, message: "unterminated string".into() })
                    }
                    Some('"') => break,
                    Some('\\') => {
                        match chars.get(i + n + 1) {
                            Some('n') => s.push('\n'),
                            Some(&e @ ('"' | '\\')) => s.push(e),
                            _ => {
                                return Err(ParseError::Syntax {
                                    pos,
                                    message: "bad escape in string".into(),
                                })
                            }
                        }
                        n += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        n += 1;
                    }
                }
            }
            advance(&mut i, &mut line, &mut col, n + 1);
            out.push((Tok::Str(s), pos));
        } else if is_word_char(c) {
            let mut n = 0;
            while i + n < chars.len() && is_word_char(chars[i + n]) {
                n += 1;
            }
            let w: String = chars[i..i + n].iter().collect();
            let tok = if w.chars().all(|c| c.is_ascii_digit()) {
                match w.parse() {
                    Ok(v) => Tok::Int(v),
                    Err(_) => {
                        return Err(ParseError::Syntax { pos, message: format!("integer `{w}` out of range") })
                    }
                }
            } else {
                Tok::Word(w)
            };
            advance(&mut i, &mut line, &mut col, n);
            out.push((tok, pos));
        } else {
            let rest: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                Some(s) => {
                    advance(&mut i, &mut line, &mut col, s.len());
                    out.push((Tok::Sym(s), pos));
                }
                None => {
                    return Err(ParseError::Syntax { pos, message: format!("unexpected character `{c}`") })
                }
            }
        }
    }
    out.push((Tok::Eof, Pos { line, column: col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

type Result<T> = std::result::Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if t != Tok::Eof {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &str) -> Result<T> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            message: format!("expected {expected}, found {}", self.peek()),
        })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Word(t) if t == w)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        let hit = self.is_sym(s);
        if hit {
            self.at += 1;
        }
        hit
    }

    fn eat_word(&mut self, w: &str) -> bool {
        let hit = self.is_word(w);
        if hit {
            self.at += 1;
        }
        hit
    }

    fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.fail(&format!("`{s}`"))
        }
    }

    fn expect_word(&mut self, w: &str) -> Result<()> {
        if self.eat_word(w) {
            Ok(())
        } else {
            self.fail(&format!("`{w}`"))
        }
    }

    fn name(&mut self) -> Result<(String, Pos)> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Word(w) => {
                self.at += 1;
                Ok((w, pos))
            }
            Tok::Int(n) => {
                self.at += 1;
                Ok((n.to_string(), pos))
            }
            _ => self.fail("a name"),
        }
    }

    fn string(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.at += 1;
                Ok(s)
            }
            _ => self.fail("a string"),
        }
    }

    fn int(&mut self) -> Result<i64> {
        let neg = self.eat_sym("-");
        match self.peek().clone() {
            Tok::Int(n) => {
                self.at += 1;
                Ok(if neg { -n } else { n })
            }
            _ => self.fail("an integer"),
        }
    }

    /// Comma-separated names up to `;`, possibly empty.
    fn names(&mut self) -> Result<Vec<(String, Pos)>> {
        let mut out = Vec::new();
        if self.eat_sym(";") {
            return Ok(out);
        }
        loop {
            out.push(self.name()?);
            if self.eat_sym(";") {
                return Ok(out);
            }
            self.expect_sym(",")?;
        }
    }

    fn file(&mut self) -> Result<SpecFile> {
        let mut spec = SpecFile::default();
        let mut seen: HashMap<String, Pos> = HashMap::new();
        loop {
            if self.eat_word("name") {
                spec.name = Some(self.string()?);
                self.expect_sym(";")?;
            } else if self.eat_word("description") {
                spec.description = Some(self.string()?);
                self.expect_sym(";")?;
            } else if self.is_word("automaton") {
                let (a, pos) = self.automaton()?;
                if seen.insert(a.name.clone(), pos).is_some() {
                    return Err(ParseError::Duplicate { pos, kind: "automaton", name: a.name });
                }
                spec.automata.push(a);
            } else if *self.peek() == Tok::Eof {
                return Ok(spec);
            } else {
                return self.fail("`automaton`");
            }
        }
    }

    fn automaton(&mut self) -> Result<(Tioa, Pos)> {
        let start = self.pos();
        self.expect_word("automaton")?;
        let (name, _) = self.name()?;
        let mut a = Tioa::new(name);
        self.expect_sym("{")?;
        let mut init: Option<(usize, Pos)> = None;
        // edges wait for all locations: (source, action, guard, resets, target)
        let mut pending = Vec::new();
        while !self.eat_sym("}") {
            let pos = self.pos();
            if self.eat_word("clocks") {
                for (c, p) in self.names()? {
                    if a.clocks.contains(&c) {
                        return Err(ParseError::Duplicate { pos: p, kind: "clock", name: c });
                    }
                    a.clocks.push(c);
                }
            } else if self.eat_word("inputs") {
                declare(&mut a.inputs, self.names()?, "input")?;
            } else if self.eat_word("outputs") {
                declare(&mut a.outputs, self.names()?, "output")?;
            } else if self.eat_word("derived") {
                self.expect_sym(";")?;
                a.derived = true;
            } else if self.eat_word("location") {
                let (lname, lpos) = self.name()?;
                if a.location_index(&lname).is_some() {
                    return Err(ParseError::Duplicate { pos: lpos, kind: "location", name: lname });
                }
                let mut l = Location::new(lname);
                let index = a.locations.len();
                loop {
                    if self.eat_word("init") {
                        if let Some((_, first)) = init {
                            return Err(ParseError::Syntax {
                                pos: self.pos(),
                                message: format!("second initial location (first at {first})"),
                            });
                        }
                        init = Some((index, lpos));
                    } else if self.eat_word("inv") {
                        self.expect_sym(":")?;
                        l.invariant = self.constraint(&a.clocks)?;
                    } else if self.eat_word("coinv") {
                        self.expect_sym(":")?;
                        l.co_invariant = self.constraint(&a.clocks)?;
                    } else {
                        break;
                    }
                }
                a.locations.push(l);
                if !self.eat_sym(";") {
                    self.expect_sym("{")?;
                    while !self.eat_sym("}") {
                        pending.push((index, self.edge(&a)?));
                    }
                }
            } else if *self.peek() == Tok::Eof {
                return self.fail("`}`");
            } else {
                return Err(ParseError::Syntax {
                    pos,
                    message: format!(
                        "expected `clocks`, `inputs`, `outputs`, `derived`, `location` or `}}`, found {}",
                        self.peek()
                    ),
                });
            }
        }
        if let Some(act) = a.inputs.intersection(&a.outputs).next() {
            return Err(ParseError::Invalid {
                pos: start,
                automaton: a.name.clone(),
                violations: vec![Violation::AlphabetOverlap { action: act.clone() }],
            });
        }
        a.initial = match init {
            Some((i, _)) => i,
            None if a.locations.is_empty() => 0,
            None => {
                return Err(ParseError::Syntax {
                    pos: start,
                    message: format!("automaton `{}` has no `init` location", a.name),
                })
            }
        };
        for (source, (action, apos, guard, resets, (target, tpos))) in pending {
            if !a.inputs.contains(&action) && !a.outputs.contains(&action) {
                return Err(ParseError::Unknown { pos: apos, kind: "action", name: action });
            }
            let Some(target) = a.location_index(&target) else {
                return Err(ParseError::Unknown { pos: tpos, kind: "location", name: target });
            };
            a.edges.push(Edge { source, guard, action, resets, target });
        }
        let violations = a.validate();
        if !violations.is_empty() {
            return Err(ParseError::Invalid { pos: start, automaton: a.name.clone(), violations });
        }
        Ok((a, start))
    }

    #[allow(clippy::type_complexity)]
    fn edge(&mut self, a: &Tioa) -> Result<(String, Pos, CC, Vec<usize>, (String, Pos))> {
        self.expect_word("on")?;
        let (action, apos) = self.name()?;
        let mut guard = CC::True;
        let mut resets = Vec::new();
        if self.eat_word("guard") {
            self.expect_sym(":")?;
            guard = self.constraint(&a.clocks)?;
        }
        if self.eat_word("reset") {
            self.expect_sym("{")?;
            if !self.eat_sym("}") {
                loop {
                    let (c, p) = self.name()?;
                    let Some(i) = a.clock_index(&c) else {
                        return Err(ParseError::Unknown { pos: p, kind: "clock", name: c });
                    };
                    if resets.contains(&i) {
                        return Err(ParseError::Duplicate { pos: p, kind: "reset of clock", name: c });
                    }
                    resets.push(i);
                    if self.eat_sym("}") {
                        break;
                    }
                    self.expect_sym(",")?;
                }
            }
        }
        self.expect_word("goto")?;
        let target = self.name()?;
        self.expect_sym(";")?;
        Ok((action, apos, guard, resets, target))
    }

    fn clock(&mut self, clocks: &[String]) -> Result<usize> {
        let (c, pos) = self.name()?;
        match clocks.iter().position(|x| *x == c) {
            Some(i) => Ok(i),
            None => Err(ParseError::Unknown { pos, kind: "clock", name: c }),
        }
    }

    fn constraint(&mut self, clocks: &[String]) -> Result<CC> {
        let mut parts = vec![self.conjunction(clocks)?];
        while self.eat_sym("||") {
            parts.push(self.conjunction(clocks)?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { CC::Or(parts) })
    }

    fn conjunction(&mut self, clocks: &[String]) -> Result<CC> {
        let mut parts = vec![self.unary(clocks)?];
        while self.eat_sym("&&") {
            parts.push(self.unary(clocks)?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { CC::And(parts) })
    }

    fn unary(&mut self, clocks: &[String]) -> Result<CC> {
        if self.eat_sym("!") {
            return Ok(CC::Not(Box::new(self.unary(clocks)?)));
        }
        if self.eat_sym("(") {
            let c = self.constraint(clocks)?;
            self.expect_sym(")")?;
            return Ok(c);
        }
        if self.eat_word("true") {
            return Ok(CC::True);
        }
        if self.eat_word("false") {
            return Ok(CC::False);
        }
        let left = self.clock(clocks)?;
        let right = if self.eat_sym("-") {
            Some(self.clock(clocks)?)
        } else {
            None
        };
        let rel = match self.bump() {
            Tok::Sym("<") => Rel::Lt,
            Tok::Sym("<=") => Rel::Le,
            Tok::Sym("==") => Rel::Eq,
            Tok::Sym(">=") => Rel::Ge,
            Tok::Sym(">") => Rel::Gt,
            _ => {
                self.at -= 1;
                return self.fail("a comparison");
            }
        };
        let constant = self.int()?;
        Ok(CC::Atom(Atom { left, right, rel, constant }))
    }
}

fn declare(set: &mut BTreeSet<String>, names: Vec<(String, Pos)>, kind: &'static str) -> Result<()> {
    for (n, pos) in names {
        if !set.insert(n.clone()) {
            return Err(ParseError::Duplicate { pos, kind, name: n });
        }
    }
    Ok(())
}

pub fn parse_spec(text: &str) -> Result<SpecFile> {
    let toks = lex(text)?;
    Parser { toks, at: 0 }.file()
}

/// Parses a file that must contain exactly one automaton.
pub fn parse_tioa(text: &str) -> Result<Tioa> {
    let mut spec = parse_spec(text)?;
    if spec.automata.len() != 1 {
        return Err(ParseError::Syntax {
            pos: Pos { line: 1, column: 1 },
            message: format!("expected exactly one automaton, found {}", spec.automata.len()),
        });
    }
    Ok(spec.automata.pop().unwrap())
}

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn print_tioa(a: &Tioa) -> String {
    let mut s = String::new();
    let list = |xs: &mut dyn Iterator<Item = &String>| xs.cloned().collect::<Vec<_>>().join(", ");
    let _ = writeln!(s, "automaton {} {{", a.name);
    if !a.clocks.is_empty() {
        let _ = writeln!(s, "  clocks {};", list(&mut a.clocks.iter()));
    }
    if !a.inputs.is_empty() {
        let _ = writeln!(s, "  inputs {};", list(&mut a.inputs.iter()));
    }
    if !a.outputs.is_empty() {
        let _ = writeln!(s, "  outputs {};", list(&mut a.outputs.iter()));
    }
    if a.derived {
        let _ = writeln!(s, "  derived;");
    }
    for (i, l) in a.locations.iter().enumerate() {
        let _ = write!(s, "  location {}", l.name);
        if i == a.initial {
            s.push_str(" init");
        }
        if l.invariant != CC::True {
            let _ = write!(s, " inv: {}", l.invariant.display(&a.clocks));
        }
        if l.co_invariant != CC::True {
            let _ = write!(s, " coinv: {}", l.co_invariant.display(&a.clocks));
        }
        let edges: Vec<&Edge> = a.edges.iter().filter(|e| e.source == i).collect();
        if edges.is_empty() {
            s.push_str(";\n");
            continue;
        }
        s.push_str(" {\n");
        for e in edges {
            let _ = write!(s, "    on {}", e.action);
            if e.guard != CC::True {
                let _ = write!(s, " guard: {}", e.guard.display(&a.clocks));
            }
            if !e.resets.is_empty() {
                let rs: Vec<&str> = e.resets.iter().map(|&c| a.clocks[c].as_str()).collect();
                let _ = write!(s, " reset {{{}}}", rs.join(", "));
            }
            let _ = writeln!(s, " goto {};", a.locations[e.target].name);
        }
        s.push_str("  }\n");
    }
    s.push_str("}\n");
    s
}

pub fn print_spec(spec: &SpecFile) -> String {
    let mut s = String::new();
    if let Some(n) = &spec.name {
        let _ = writeln!(s, "name {};", quote(n));
    }
    if let Some(d) = &spec.description {
        let _ = writeln!(s, "description {};", quote(d));
    }
    for (i, a) in spec.automata.iter().enumerate() {
        if i > 0 || spec.name.is_some() || spec.description.is_some() {
            s.push('\n');
        }
        s.push_str(&print_tioa(a));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{random_tioa, GenConfig};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const SCHEDULER: &str = "
        // the scheduler
        automaton Scheduler {
          clocks x;
          inputs finish;
          outputs start;
          location A init inv: x<=100 { on start reset {x} goto B; }
          location B { on finish guard: x>=5 && x<=8 reset {x} goto A; }
        }";

    #[test]
    fn parses_scheduler() {
        let a = parse_tioa(SCHEDULER).unwrap();
        assert_eq!(a.locations.len(), 2);
        assert_eq!(a.edges[1].guard, CC::And(vec![CC::ge(0, 5), CC::le(0, 8)]));
        assert_eq!(a.edges[0].resets, vec![0]);
        assert_eq!(parse_tioa(&print_tioa(&a)).unwrap(), a);
    }

    #[test]
    fn empty_file() {
        assert_eq!(parse_spec("").unwrap(), SpecFile::default());
        assert_eq!(parse_spec("  // nothing\n").unwrap(), SpecFile::default());
    }

    #[test]
    fn metadata_and_precedence() {
        let text = r#"name "demo \"x\"";
            description "two";
            automaton A { clocks x, y; outputs o;
              location 1 init inv: x<=4 {
                on o guard: !(x<=2 || y-x>=1) && true goto 1;
                on o guard: x<3 || y>1 && x==0 reset {y, x} goto 1;
              }
            }"#;
        let spec = parse_spec(text).unwrap();
        assert_eq!(spec.name.as_deref(), Some("demo \"x\""));
        let a = &spec.automata[0];
        assert_eq!(a.locations[0].name, "1");
        assert!(matches!(&a.edges[0].guard, CC::And(ps) if matches!(ps[0], CC::Not(_))));
        assert!(matches!(&a.edges[1].guard, CC::Or(ps) if matches!(ps[1], CC::And(_))));
        assert_eq!(a.edges[1].resets, vec![1, 0]);
        assert_eq!(parse_spec(&print_spec(&spec)).unwrap(), spec);
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_spec("automaton A {\n  clocks x;\n  location L init inv: z<=1;\n}").unwrap_err();
        assert_eq!(err, ParseError::Unknown { pos: Pos { line: 3, column: 24 }, kind: "clock", name: "z".into() });
        let err = parse_spec("automaton A { location L init; location L; }").unwrap_err();
        assert!(matches!(err, ParseError::Duplicate { kind: "location", .. }));
        let err = parse_spec("automaton A { location L init; }\nautomaton A { location L init; }").unwrap_err();
        assert_eq!(err.pos(), Pos { line: 2, column: 1 });
        let err = parse_spec("automaton A { inputs a; location L init { on b goto L; } }").unwrap_err();
        assert!(matches!(err, ParseError::Unknown { kind: "action", .. }));
        let err = parse_spec("automaton A { location L init { on a goto L } }").unwrap_err();
        assert!(err.to_string().contains("expected `;`"), "{err}");
        let err = parse_spec("automaton A { clocks x; location L init coinv: x>=1; }").unwrap_err();
        assert!(matches!(err, ParseError::Invalid { .. }), "{err}");
        let err = parse_spec("automaton A { location L init; } #").unwrap_err();
        assert_eq!(err.pos(), Pos { line: 1, column: 34 });
    }

    #[test]
    fn derived_marker_round_trips() {
        let text = "automaton D { clocks x; outputs o; derived;
            location L init inv: x<=2 coinv: x<1 || x<=1 { on o goto BOT; }
            location BOT coinv: false; }";
        let a = parse_tioa(text).unwrap();
        assert!(a.derived);
        assert_eq!(parse_tioa(&print_tioa(&a)).unwrap(), a);
    }

    proptest! {
        #[test]
        fn random_automata_round_trip(seed in any::<u64>(), det in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut cfg = GenConfig::new(&["a", "b'"], &["out.1"]);
            cfg.deterministic = det;
            let a = random_tioa(&mut rng, "R_1", &cfg);
            let text = print_tioa(&a);
            let b = parse_tioa(&text).unwrap();
            prop_assert_eq!(&b, &a);
            prop_assert_eq!(print_tioa(&b), text);
        }
    }
}
