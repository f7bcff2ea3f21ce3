//! Semigroup presentations `<Σ | ℛ>` and basewords.
//!
//! Letters are interned as indices into the alphabet; a [`Word`] is a plain
//! vector of [`Letter`]s. Relations keep the orientation they were written
//! with: the left-hand side is the top of a positive transistor.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

/// Index of a letter in its presentation's alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(pub u32);

impl Letter {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

pub type Word = Vec<Letter>;

/// An oriented relation `lhs = rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Relation {
    pub lhs: Word,
    pub rhs: Word,
}

/// Orientation of a transistor relative to its relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// Top side spells `lhs`, bottom side spells `rhs`.
    Positive,
    /// Top side spells `rhs`, bottom side spells `lhs`.
    Negative,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Positive => Direction::Negative,
            Direction::Negative => Direction::Positive,
        }
    }

    pub fn sign(self) -> char {
        match self {
            Direction::Positive => '+',
            Direction::Negative => '-',
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PresentationError {
    #[error("syntax error at byte {position}: expected {expected}")]
    Syntax { position: usize, expected: String },
    #[error("undeclared letter `{0}`")]
    UndeclaredLetter(String),
    #[error("duplicate letter `{0}`")]
    DuplicateLetter(String),
    #[error("invalid letter name `{0}`")]
    InvalidLetter(String),
    #[error("forbidden relation: {0}")]
    ForbiddenRelation(String),
    #[error("unknown builtin presentation `{0}`")]
    UnknownBuiltin(String),
    #[error("bad parameters for `{name}`: {reason}")]
    BadParams { name: String, reason: String },
    #[error("empty word")]
    EmptyWord,
}

/// One broken invariant, as reported by [`validate_presentation`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    DuplicateLetter { letter: String },
    InvalidLetterName { letter: String },
    UndeclaredLetter { relation: usize, letter: String },
    EmptySide { relation: usize },
    TrivialRelation { relation: usize },
    SwappedPair { relation: usize, other: usize },
    DuplicateRelation { relation: usize, other: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateLetter { letter } => write!(f, "letter `{letter}` declared twice"),
            Violation::InvalidLetterName { letter } => write!(f, "letter name `{letter}` is not an identifier"),
            Violation::UndeclaredLetter { relation, letter } => {
                write!(f, "relation {relation} uses undeclared letter `{letter}`")
            }
            Violation::EmptySide { relation } => write!(f, "relation {relation} has an empty side"),
            Violation::TrivialRelation { relation } => write!(f, "relation {relation} has the form u=u"),
            Violation::SwappedPair { relation, other } => {
                write!(f, "relation {relation} is relation {other} with its sides swapped")
            }
            Violation::DuplicateRelation { relation, other } => {
                write!(f, "relation {relation} repeats relation {other}")
            }
        }
    }
}

/// Unchecked presentation data, spelled with letter names.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RawPresentation {
    pub alphabet: Vec<String>,
    pub relations: Vec<(Vec<String>, Vec<String>)>,
}

const RESERVED: &[char] = &['<', '>', '|', '=', ',', '.', '^'];

pub fn is_identifier(name: &str) -> bool {
    !name.is_empty() && !name.chars().any(|c| c.is_whitespace() || RESERVED.contains(&c))
}

/// Lists every invariant violation of `raw`. Empty means the data describes a
/// valid [`SemigroupPresentation`].
pub fn validate_presentation(raw: &RawPresentation) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for name in &raw.alphabet {
        if !is_identifier(name) {
            out.push(Violation::InvalidLetterName { letter: name.clone() });
        }
        if !seen.insert(name.as_str()) {
            out.push(Violation::DuplicateLetter { letter: name.clone() });
        }
    }
    let mut first_seen: HashMap<(&[String], &[String]), usize> = HashMap::new();
    for (i, (lhs, rhs)) in raw.relations.iter().enumerate() {
        if lhs.is_empty() || rhs.is_empty() {
            out.push(Violation::EmptySide { relation: i });
        }
        for name in lhs.iter().chain(rhs.iter()) {
            if !seen.contains(name.as_str()) {
                out.push(Violation::UndeclaredLetter { relation: i, letter: name.clone() });
            }
        }
        if lhs == rhs {
            out.push(Violation::TrivialRelation { relation: i });
            continue;
        }
        if let Some(&j) = first_seen.get(&(rhs.as_slice(), lhs.as_slice())) {
            out.push(Violation::SwappedPair { relation: i, other: j });
        } else if let Some(&j) = first_seen.get(&(lhs.as_slice(), rhs.as_slice())) {
            out.push(Violation::DuplicateRelation { relation: i, other: j });
        } else {
            first_seen.insert((lhs.as_slice(), rhs.as_slice()), i);
        }
    }
    out
}

/// A validated semigroup presentation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SemigroupPresentation {
    alphabet: Vec<String>,
    relations: Vec<Relation>,
}

impl SemigroupPresentation {
    /// Builds a presentation from letter names, rejecting any invariant violation.
    pub fn from_raw(raw: &RawPresentation) -> Result<Self, PresentationError> {
        if let Some(v) = validate_presentation(raw).into_iter().next() {
            return Err(match v {
                Violation::DuplicateLetter { letter } => PresentationError::DuplicateLetter(letter),
                Violation::InvalidLetterName { letter } => PresentationError::InvalidLetter(letter),
                Violation::UndeclaredLetter { letter, .. } => PresentationError::UndeclaredLetter(letter),
                Violation::EmptySide { .. } => PresentationError::EmptyWord,
                other => PresentationError::ForbiddenRelation(other.to_string()),
            });
        }
        let index: HashMap<&str, Letter> = raw
            .alphabet
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), Letter(i as u32)))
            .collect();
        let to_word = |names: &[String]| names.iter().map(|n| index[n.as_str()]).collect::<Word>();
        let relations = raw
            .relations
            .iter()
            .map(|(l, r)| Relation { lhs: to_word(l), rhs: to_word(r) })
            .collect();
        Ok(SemigroupPresentation { alphabet: raw.alphabet.clone(), relations })
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn relation(&self, i: usize) -> Option<&Relation> {
        self.relations.get(i)
    }

    pub fn letter(&self, name: &str) -> Option<Letter> {
        self.alphabet.iter().position(|s| s == name).map(|i| Letter(i as u32))
    }

    pub fn letter_name(&self, l: Letter) -> &str {
        &self.alphabet[l.index()]
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.alphabet.len() as u32).map(Letter)
    }

    /// The word on the top side of a transistor labelled by `rel` with `dir`.
    pub fn top_side(&self, rel: usize, dir: Direction) -> &Word {
        let r = &self.relations[rel];
        match dir {
            Direction::Positive => &r.lhs,
            Direction::Negative => &r.rhs,
        }
    }

    pub fn bottom_side(&self, rel: usize, dir: Direction) -> &Word {
        self.top_side(rel, dir.flip())
    }

    /// Largest relation side length (the `K` of the length bounds).
    pub fn max_side_len(&self) -> usize {
        self.relations.iter().map(|r| r.lhs.len().max(r.rhs.len())).max().unwrap_or(0)
    }

    fn single_char_alphabet(&self) -> bool {
        self.alphabet.iter().all(|s| s.chars().count() == 1)
    }

    pub fn to_raw(&self) -> RawPresentation {
        let names = |w: &Word| w.iter().map(|&l| self.letter_name(l).to_string()).collect();
        RawPresentation {
            alphabet: self.alphabet.clone(),
            relations: self.relations.iter().map(|r| (names(&r.lhs), names(&r.rhs))).collect(),
        }
    }

    /// Parses a word in the presentation's syntax (`x.y^2`, or `xyy` when every
    /// letter is a single character).
    pub fn parse_word(&self, text: &str) -> Result<Word, PresentationError> {
        let mut p = Parser::new(text);
        let names = p.word()?;
        p.skip_ws();
        if !p.at_end() {
            return Err(p.expected("end of word"));
        }
        self.resolve(&names)
    }

    pub fn format_word(&self, w: &[Letter]) -> String {
        w.iter().map(|&l| self.letter_name(l)).collect::<Vec<_>>().join(".")
    }

    fn resolve(&self, atoms: &[(String, usize, usize)]) -> Result<Word, PresentationError> {
        let mut out = Vec::new();
        let juxtaposition = self.single_char_alphabet();
        for (name, power, _) in atoms {
            if let Some(l) = self.letter(name) {
                out.extend(std::iter::repeat_n(l, *power));
                continue;
            }
            if !juxtaposition {
                return Err(PresentationError::UndeclaredLetter(name.clone()));
            }
            let chars: Vec<char> = name.chars().collect();
            for (k, c) in chars.iter().enumerate() {
                let l = self
                    .letter(&c.to_string())
                    .ok_or_else(|| PresentationError::UndeclaredLetter(c.to_string()))?;
                let reps = if k + 1 == chars.len() { *power } else { 1 };
                out.extend(std::iter::repeat_n(l, reps));
            }
        }
        if out.is_empty() {
            return Err(PresentationError::EmptyWord);
        }
        Ok(out)
    }
}

impl fmt::Display for SemigroupPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{} | ", self.alphabet.join(","))?;
        for (i, r) in self.relations.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}={}", self.format_word(&r.lhs), self.format_word(&r.rhs))?;
        }
        write!(f, ">")
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { text, pos: 0 }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn at_end(&self) -> bool {
        self.pos >= self.text.len()
    }

    fn expected(&self, what: &str) -> PresentationError {
        PresentationError::Syntax { position: self.pos, expected: what.to_string() }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), PresentationError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.expected(&format!("`{c}`")))
        }
    }

    fn ident(&mut self) -> Result<String, PresentationError> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_whitespace() || RESERVED.contains(&c) {
                break;
            }
            self.pos += c.len_utf8();
        }
        if self.pos == start {
            return Err(self.expected("identifier"));
        }
        Ok(self.text[start..self.pos].to_string())
    }

    fn uint(&mut self) -> Result<usize, PresentationError> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.expected("unsigned integer"));
        }
        let n: usize = self.text[start..self.pos].parse().map_err(|_| self.expected("small integer"))?;
        if n == 0 {
            return Err(PresentationError::Syntax { position: start, expected: "positive exponent".into() });
        }
        Ok(n)
    }

    /// `atom ('.' atom)*`, returning (name, power, position) triples.
    fn word(&mut self) -> Result<Vec<(String, usize, usize)>, PresentationError> {
        let mut atoms = Vec::new();
        loop {
            self.skip_ws();
            let at = self.pos;
            let name = self.ident()?;
            let power = if self.eat('^') { self.uint()? } else { 1 };
            atoms.push((name, power, at));
            if !self.eat('.') {
                break;
            }
        }
        Ok(atoms)
    }
}

/// Parses `<a,b | a.b=b.a, ...>`.
pub fn parse_presentation(text: &str) -> Result<SemigroupPresentation, PresentationError> {
    let mut p = Parser::new(text);
    p.expect('<')?;
    let mut alphabet = vec![p.ident()?];
    while p.eat(',') {
        alphabet.push(p.ident()?);
    }
    p.expect('|')?;
    let mut sides = Vec::new();
    loop {
        let lhs = p.word()?;
        p.expect('=')?;
        let rhs = p.word()?;
        sides.push((lhs, rhs));
        if !p.eat(',') {
            break;
        }
    }
    p.expect('>')?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.expected("end of input"));
    }

    let mut declared = HashSet::new();
    for name in &alphabet {
        if !declared.insert(name.as_str()) {
            return Err(PresentationError::DuplicateLetter(name.clone()));
        }
    }
    // Resolve words against a relation-free presentation so juxtaposition and
    // powers are handled in one place.
    let scaffold = SemigroupPresentation { alphabet: alphabet.clone(), relations: Vec::new() };
    let names = |w: Word| w.into_iter().map(|l| scaffold.letter_name(l).to_string()).collect::<Vec<_>>();
    let mut raw = RawPresentation { alphabet, relations: Vec::new() };
    for (lhs, rhs) in sides {
        let l = scaffold.resolve(&lhs)?;
        let r = scaffold.resolve(&rhs)?;
        raw.relations.push((names(l), names(r)));
    }
    SemigroupPresentation::from_raw(&raw)
}

fn param(name: &str, params: &[i64], i: usize, min: i64, what: &str) -> Result<usize, PresentationError> {
    let v = *params.get(i).ok_or_else(|| PresentationError::BadParams {
        name: name.to_string(),
        reason: format!("missing parameter {what}"),
    })?;
    if v < min {
        return Err(PresentationError::BadParams {
            name: name.to_string(),
            reason: format!("{what} must be at least {min}, got {v}"),
        });
    }
    Ok(v as usize)
}

fn arity(name: &str, params: &[i64], n: usize) -> Result<(), PresentationError> {
    if params.len() != n {
        return Err(PresentationError::BadParams {
            name: name.to_string(),
            reason: format!("expected {n} parameters, got {}", params.len()),
        });
    }
    Ok(())
}

fn rep(s: &str, n: usize) -> Vec<String> {
    vec![s.to_string(); n]
}

/// The fixture presentations together with their basewords.
///
/// * `thompson`: `<x | x=x²>`, baseword `x`
/// * `higman(n, r)`: `<x | x=xⁿ>`, baseword `xʳ`
/// * `quasi_auto(n, r, p)`: `<x,a | x=xⁿa>`, baseword `xʳaᵖ`
/// * `houghton(n, p)`: `<a,r,x1..xn | r=x1⋯xn, xi=a.xi>`, baseword `raᵖ`
/// * `commuting_abc`: `<a,b,c | ab=ba, ac=ca, bc=cb>`, baseword `abc`
pub fn builtin_presentation(name: &str, params: &[i64]) -> Result<(SemigroupPresentation, Word), PresentationError> {
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let (raw, base): (RawPresentation, Vec<String>) = match name {
        "thompson" => {
            arity(name, params, 0)?;
            (RawPresentation { alphabet: s(&["x"]), relations: vec![(s(&["x"]), s(&["x", "x"]))] }, s(&["x"]))
        }
        "higman" => {
            arity(name, params, 2)?;
            let n = param(name, params, 0, 2, "n")?;
            let r = param(name, params, 1, 1, "r")?;
            (RawPresentation { alphabet: s(&["x"]), relations: vec![(s(&["x"]), rep("x", n))] }, rep("x", r))
        }
        "quasi_auto" => {
            arity(name, params, 3)?;
            let n = param(name, params, 0, 2, "n")?;
            let r = param(name, params, 1, 1, "r")?;
            let p = param(name, params, 2, 0, "p")?;
            let mut rhs = rep("x", n);
            rhs.push("a".into());
            let mut base = rep("x", r);
            base.extend(rep("a", p));
            (RawPresentation { alphabet: s(&["x", "a"]), relations: vec![(s(&["x"]), rhs)] }, base)
        }
        "houghton" => {
            arity(name, params, 2)?;
            let n = param(name, params, 0, 1, "n")?;
            let p = param(name, params, 1, 0, "p")?;
            let xs: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
            let mut alphabet = s(&["a", "r"]);
            alphabet.extend(xs.iter().cloned());
            let mut relations = vec![(s(&["r"]), xs.clone())];
            for x in &xs {
                relations.push((vec![x.clone()], vec!["a".to_string(), x.clone()]));
            }
            let mut base = s(&["r"]);
            base.extend(rep("a", p));
            (RawPresentation { alphabet, relations }, base)
        }
        "commuting_abc" => {
            arity(name, params, 0)?;
            (
                RawPresentation {
                    alphabet: s(&["a", "b", "c"]),
                    relations: vec![
                        (s(&["a", "b"]), s(&["b", "a"])),
                        (s(&["a", "c"]), s(&["c", "a"])),
                        (s(&["b", "c"]), s(&["c", "b"])),
                    ],
                },
                s(&["a", "b", "c"]),
            )
        }
        other => return Err(PresentationError::UnknownBuiltin(other.to_string())),
    };
    let p = SemigroupPresentation::from_raw(&raw)?;
    let w = base.iter().map(|n| p.letter(n).expect("builtin letter")).collect();
    Ok((p, w))
}

/// Parses `name` or `name:p1,p2,...` into a builtin presentation.
pub fn builtin_from_spec(spec: &str) -> Result<(SemigroupPresentation, Word), PresentationError> {
    let (name, rest) = match spec.split_once(':') {
        Some((n, r)) => (n, r),
        None => (spec, ""),
    };
    let params = if rest.trim().is_empty() {
        Vec::new()
    } else {
        rest.split(',')
            .map(|t| {
                t.trim().parse::<i64>().map_err(|_| PresentationError::BadParams {
                    name: name.to_string(),
                    reason: format!("`{t}` is not an integer"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?
    };
    builtin_presentation(name, &params)
}
