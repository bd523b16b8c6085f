//! Mealy automata: the wreath-recursion script format and the structural
//! constructions (inverse, dual, bireversibility, DOT export).

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::perm::Perm;

/// Marker for inverse rows of a non-invertible automaton.
pub(crate) const NO_ROW: u32 = u32::MAX;

/// Ordered list of distinct letters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    letters: Vec<String>,
    index: HashMap<String, u32>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(letters: impl IntoIterator<Item = S>) -> Result<Self> {
        let letters: Vec<String> = letters.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(letters.len());
        for (i, l) in letters.iter().enumerate() {
            if index.insert(l.clone(), i as u32).is_some() {
                return Err(Error::DuplicateLetter(l.clone()));
            }
        }
        if letters.is_empty() {
            return Err(Error::Malformed("empty alphabet".into()));
        }
        Ok(Alphabet { letters, index })
    }

    /// The canonical binary alphabet `{0, 1}`.
    pub fn binary() -> Self {
        Alphabet::new(["0", "1"]).expect("valid alphabet")
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[String] {
        &self.letters
    }

    pub fn letter(&self, i: u32) -> &str {
        &self.letters[i as usize]
    }

    pub fn index_of(&self, letter: &str) -> Option<u32> {
        self.index.get(letter).copied()
    }

    /// Renders a word over this alphabet. Letters are concatenated when they are all
    /// single characters and separated by `.` otherwise.
    pub fn render(&self, word: &[u32]) -> String {
        let sep = if self.letters.iter().all(|l| l.chars().count() == 1) {
            ""
        } else {
            "."
        };
        word.iter()
            .map(|&x| self.letter(x))
            .collect::<Vec<_>>()
            .join(sep)
    }

    /// Parses a word in the format produced by [`Alphabet::render`]. Whitespace and `.`
    /// separate letters; without separators single-character letters are read one by one.
    pub fn parse_word(&self, text: &str) -> Result<Vec<u32>> {
        let text = text.trim();
        if text.is_empty() || text == "ε" {
            return Ok(Vec::new());
        }
        let pieces: Vec<&str> = if text.contains(['.', ' ', ',']) {
            text.split(['.', ' ', ','])
                .filter(|s| !s.is_empty())
                .collect()
        } else if let Some(i) = self.index_of(text) {
            return Ok(vec![i]);
        } else {
            text.char_indices()
                .map(|(i, c)| &text[i..i + c.len_utf8()])
                .collect()
        };
        pieces
            .into_iter()
            .map(|p| self.index_of(p).ok_or_else(|| Error::UnknownLetter(p.to_string())))
            .collect()
    }
}

/// One line of a wreath recursion: `state = (sections...) permutation`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WreathRow {
    pub state: String,
    pub sections: Vec<String>,
    /// Images of the alphabet letters, in alphabet order.
    pub images: Vec<u32>,
}

/// Why an automaton failed the bireversibility test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bireversibility {
    Bireversible,
    NotInvertible,
    DualNotInvertible,
    DualOfInverseNotInvertible,
}

/// A finite Mealy automaton with dense state and letter indices.
///
/// Tables are row-major over `state * d + letter`. Alongside the plain tables the
/// automaton keeps "signed" tables with one row per state and one per inverse state
/// (row `2q` is `q`, row `2q+1` is `q⁻¹`); group words index these rows directly.
#[derive(Clone, Debug)]
pub struct MealyAutomaton {
    states: Vec<String>,
    state_index: HashMap<String, u32>,
    alphabet: Alphabet,
    transition: Vec<u32>,
    output: Vec<u32>,
    invertible: bool,
    pub(crate) signed_next: Vec<u32>,
    pub(crate) signed_out: Vec<u32>,
}

impl PartialEq for MealyAutomaton {
    fn eq(&self, other: &Self) -> bool {
        self.states == other.states
            && self.alphabet == other.alphabet
            && self.transition == other.transition
            && self.output == other.output
    }
}

impl Eq for MealyAutomaton {}

impl MealyAutomaton {
    /// Builds an automaton from total tables indexed by `state * d + letter`.
    pub fn new(
        states: Vec<String>,
        alphabet: Alphabet,
        transition: Vec<u32>,
        output: Vec<u32>,
    ) -> Result<Self> {
        let m = states.len();
        let d = alphabet.len();
        if m == 0 {
            return Err(Error::Malformed("automaton has no states".into()));
        }
        if transition.len() != m * d || output.len() != m * d {
            return Err(Error::Malformed(format!(
                "tables must have {} entries, found {} and {}",
                m * d,
                transition.len(),
                output.len()
            )));
        }
        if transition.iter().any(|&q| q as usize >= m) {
            return Err(Error::Malformed("transition table refers to a missing state".into()));
        }
        if output.iter().any(|&x| x as usize >= d) {
            return Err(Error::Malformed("output table refers to a missing letter".into()));
        }
        let mut state_index = HashMap::with_capacity(m);
        for (i, s) in states.iter().enumerate() {
            if state_index.insert(s.clone(), i as u32).is_some() {
                return Err(Error::DuplicateState(s.clone()));
            }
        }
        let invertible = (0..m).all(|q| Perm::from_images(output[q * d..(q + 1) * d].to_vec()).is_some());

        let mut signed_next = vec![NO_ROW; 2 * m * d];
        let mut signed_out = vec![NO_ROW; 2 * m * d];
        for q in 0..m {
            for x in 0..d {
                let y = output[q * d + x] as usize;
                let r = transition[q * d + x];
                signed_next[2 * q * d + x] = 2 * r;
                signed_out[2 * q * d + x] = y as u32;
                if invertible {
                    // q⁻¹ reads y, writes x and continues as π(q, x)⁻¹
                    signed_next[(2 * q + 1) * d + y] = 2 * r + 1;
                    signed_out[(2 * q + 1) * d + y] = x as u32;
                }
            }
        }
        Ok(MealyAutomaton {
            states,
            state_index,
            alphabet,
            transition,
            output,
            invertible,
            signed_next,
            signed_out,
        })
    }

    /// Builds an automaton from wreath-recursion rows, in row order.
    pub fn from_rows(alphabet: Alphabet, rows: &[WreathRow]) -> Result<Self> {
        let d = alphabet.len();
        let mut index = HashMap::new();
        for (i, row) in rows.iter().enumerate() {
            if index.insert(row.state.as_str(), i as u32).is_some() {
                return Err(Error::DuplicateState(row.state.clone()));
            }
        }
        let mut transition = Vec::with_capacity(rows.len() * d);
        let mut output = Vec::with_capacity(rows.len() * d);
        for row in rows {
            if row.sections.len() != d {
                return Err(Error::Arity {
                    state: row.state.clone(),
                    expected: d,
                    found: row.sections.len(),
                });
            }
            if Perm::from_images(row.images.clone()).is_none() || row.images.len() != d {
                return Err(Error::NotPermutation(row.state.clone()));
            }
            for s in &row.sections {
                let q = index.get(s.as_str()).ok_or_else(|| Error::UndefinedState(s.clone()))?;
                transition.push(*q);
            }
            output.extend_from_slice(&row.images);
        }
        MealyAutomaton::new(
            rows.iter().map(|r| r.state.clone()).collect(),
            alphabet,
            transition,
            output,
        )
    }

    /// One-state automaton acting as the constant permutation `perm` at every vertex.
    pub fn constant(alphabet: Alphabet, name: &str, perm: &Perm) -> Result<Self> {
        if perm.degree() != alphabet.len() {
            return Err(Error::AlphabetMismatch(format!(
                "permutation of degree {} over an alphabet of {} letters",
                perm.degree(),
                alphabet.len()
            )));
        }
        let d = alphabet.len();
        MealyAutomaton::new(vec![name.to_string()], alphabet, vec![0; d], perm.images().to_vec())
    }

    /// The 1-state automaton acting trivially on the binary tree.
    pub fn identity() -> Self {
        MealyAutomaton::constant(Alphabet::binary(), "e", &Perm::identity(2)).expect("valid")
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, q: u32) -> &str {
        &self.states[q as usize]
    }

    pub fn state_index(&self, name: &str) -> Option<u32> {
        self.state_index.get(name).copied()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn degree(&self) -> usize {
        self.alphabet.len()
    }

    pub fn is_invertible(&self) -> bool {
        self.invertible
    }

    /// `π(q, x)`.
    pub fn transition(&self, q: u32, x: u32) -> u32 {
        self.transition[q as usize * self.degree() + x as usize]
    }

    /// `λ(q, x)`.
    pub fn output(&self, q: u32, x: u32) -> u32 {
        self.output[q as usize * self.degree() + x as usize]
    }

    /// The output row of `q`, or `None` if it is not a permutation.
    pub fn root_permutation(&self, q: u32) -> Option<Perm> {
        let d = self.degree();
        Perm::from_images(self.output[q as usize * d..(q as usize + 1) * d].to_vec())
    }

    pub fn rows(&self) -> Vec<WreathRow> {
        let d = self.degree();
        (0..self.num_states())
            .map(|q| WreathRow {
                state: self.states[q].clone(),
                sections: (0..d)
                    .map(|x| self.states[self.transition[q * d + x] as usize].clone())
                    .collect(),
                images: self.output[q * d..(q + 1) * d].to_vec(),
            })
            .collect()
    }

    /// Automaton whose states are the inverses `q'` of the states of `self`.
    pub fn invert(&self) -> Result<MealyAutomaton> {
        if !self.invertible {
            let bad = (0..self.num_states() as u32)
                .find(|&q| self.root_permutation(q).is_none())
                .expect("some row is not a permutation");
            return Err(Error::NotInvertible(self.state_name(bad).to_string()));
        }
        let d = self.degree();
        let m = self.num_states();
        let mut transition = vec![0; m * d];
        let mut output = vec![0; m * d];
        for q in 0..m {
            for x in 0..d {
                let y = self.output[q * d + x] as usize;
                transition[q * d + y] = self.transition[q * d + x];
                output[q * d + y] = x as u32;
            }
        }
        let states = self.states.iter().map(|s| inverse_name(s)).collect();
        MealyAutomaton::new(states, self.alphabet.clone(), transition, output)
    }

    /// The dual automaton: letters become states and states become letters, with the
    /// transition and output tables swapped.
    pub fn dual(&self) -> MealyAutomaton {
        let d = self.degree();
        let m = self.num_states();
        let mut transition = vec![0; m * d];
        let mut output = vec![0; m * d];
        for x in 0..d {
            for q in 0..m {
                transition[x * m + q] = self.output[q * d + x];
                output[x * m + q] = self.transition[q * d + x];
            }
        }
        let alphabet = Alphabet::new(self.states.clone()).expect("state names are distinct");
        MealyAutomaton::new(self.alphabet.letters().to_vec(), alphabet, transition, output)
            .expect("dual of a well-formed automaton is well-formed")
    }

    pub fn bireversibility(&self) -> Bireversibility {
        if !self.invertible {
            return Bireversibility::NotInvertible;
        }
        if !self.dual().is_invertible() {
            return Bireversibility::DualNotInvertible;
        }
        let inverse = self.invert().expect("checked invertible");
        if !inverse.dual().is_invertible() {
            return Bireversibility::DualOfInverseNotInvertible;
        }
        Bireversibility::Bireversible
    }

    pub fn is_bireversible(&self) -> bool {
        self.bireversibility() == Bireversibility::Bireversible
    }

    /// Disjoint union of two automata over the same alphabet; states of `other` follow
    /// those of `self`.
    pub fn disjoint_union(&self, other: &MealyAutomaton) -> Result<MealyAutomaton> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch("union of automata over different alphabets".into()));
        }
        let m = self.num_states() as u32;
        let mut states = self.states.clone();
        states.extend(other.states.iter().cloned());
        let mut transition = self.transition.clone();
        transition.extend(other.transition.iter().map(|&q| q + m));
        let mut output = self.output.clone();
        output.extend_from_slice(&other.output);
        MealyAutomaton::new(states, self.alphabet.clone(), transition, output)
    }

    /// Parses the line-oriented recursion script format.
    pub fn parse(text: &str) -> Result<MealyAutomaton> {
        let (alphabet, rows) = parse_script(text)?;
        MealyAutomaton::from_rows(alphabet, &rows)
    }

    /// Canonical script: an `alphabet:` line, then one row per state in state order with
    /// the image list omitted for the identity.
    pub fn to_script(&self) -> String {
        let mut out = String::new();
        writeln!(out, "alphabet: {}", self.alphabet.letters().join(" ")).unwrap();
        for row in self.rows() {
            write!(out, "{} = ({})", row.state, row.sections.join(", ")).unwrap();
            if row.images.iter().enumerate().any(|(i, &x)| i as u32 != x) {
                let imgs: Vec<&str> = row.images.iter().map(|&x| self.alphabet.letter(x)).collect();
                write!(out, " [{}]", imgs.join(" ")).unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Moore diagram in Graphviz DOT: nodes labeled by root permutation in cycle
    /// notation, one edge per (state, letter) labeled by the letter.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph automaton {\n  rankdir=LR;\n");
        for q in 0..self.num_states() as u32 {
            let label = match self.root_permutation(q) {
                Some(p) => self.cycle_notation(&p),
                None => {
                    let row: Vec<&str> = (0..self.degree() as u32)
                        .map(|x| self.alphabet.letter(self.output(q, x)))
                        .collect();
                    format!("[{}]", row.join(" "))
                }
            };
            writeln!(
                out,
                "  \"{}\" [label=\"{}\\n{}\"];",
                escape(self.state_name(q)),
                escape(self.state_name(q)),
                escape(&label)
            )
            .unwrap();
        }
        for q in 0..self.num_states() as u32 {
            for x in 0..self.degree() as u32 {
                writeln!(
                    out,
                    "  \"{}\" -> \"{}\" [label=\"{}\"];",
                    escape(self.state_name(q)),
                    escape(self.state_name(self.transition(q, x))),
                    escape(self.alphabet.letter(x))
                )
                .unwrap();
            }
        }
        out.push_str("}\n");
        out
    }

    /// Cycle notation over letter names, `id` for the identity.
    pub fn cycle_notation(&self, p: &Perm) -> String {
        let cycles = p.cycles();
        if cycles.is_empty() {
            return "id".to_string();
        }
        cycles
            .iter()
            .map(|c| {
                let names: Vec<&str> = c.iter().map(|&x| self.alphabet.letter(x)).collect();
                format!("({})", names.join(" "))
            })
            .collect()
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// `q` ↦ `q'`, and `q'` ↦ `q`.
pub fn inverse_name(name: &str) -> String {
    match name.strip_suffix('\'') {
        Some(base) => base.to_string(),
        None => format!("{name}'"),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Eq,
    Open,
    Close,
    Comma,
    OpenBracket,
    CloseBracket,
}

fn tokenize(line: &str, line_no: usize) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '=' => {
                chars.next();
                tokens.push(Token::Eq);
            }
            '(' => {
                chars.next();
                tokens.push(Token::Open);
            }
            ')' => {
                chars.next();
                tokens.push(Token::Close);
            }
            ',' => {
                chars.next();
                tokens.push(Token::Comma);
            }
            '[' => {
                chars.next();
                tokens.push(Token::OpenBracket);
            }
            ']' => {
                chars.next();
                tokens.push(Token::CloseBracket);
            }
            _ => {
                let mut ident = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || "=(),[]".contains(c) {
                        break;
                    }
                    ident.push(c);
                    chars.next();
                }
                if ident.is_empty() {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("unexpected character `{c}`"),
                    });
                }
                tokens.push(Token::Ident(ident));
            }
        }
    }
    Ok(tokens)
}

fn parse_script(text: &str) -> Result<(Alphabet, Vec<WreathRow>)> {
    let mut alphabet: Option<Alphabet> = None;
    // rows with their permutation still in surface form
    let mut raw_rows: Vec<(usize, String, Vec<String>, PermSyntax)> = Vec::new();

    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw_line.split('#').next().unwrap_or("");
        for stmt in line.split(';') {
            let stmt = stmt.trim();
            if stmt.is_empty() {
                continue;
            }
            if let Some(rest) = stmt.strip_prefix("alphabet:") {
                if !raw_rows.is_empty() || alphabet.is_some() {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "`alphabet:` must come first and only once".into(),
                    });
                }
                alphabet = Some(Alphabet::new(rest.split_whitespace())?);
                continue;
            }
            let tokens = tokenize(stmt, line_no)?;
            let (name, sections, perm) = parse_row(&tokens, line_no)?;
            raw_rows.push((line_no, name, sections, perm));
        }
    }
    let alphabet = alphabet.unwrap_or_else(Alphabet::binary);
    if raw_rows.is_empty() {
        return Err(Error::Parse {
            line: text.lines().count().max(1),
            message: "script defines no states".into(),
        });
    }
    let d = alphabet.len();
    let mut rows = Vec::with_capacity(raw_rows.len());
    for (line_no, state, sections, perm) in raw_rows {
        let images = match perm {
            PermSyntax::Identity => (0..d as u32).collect(),
            PermSyntax::Sigma => {
                if d != 2 {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "`sigma` requires a binary alphabet".into(),
                    });
                }
                vec![1, 0]
            }
            PermSyntax::Images(names) => {
                if names.len() != d {
                    return Err(Error::NotPermutation(state));
                }
                names
                    .iter()
                    .map(|n| alphabet.index_of(n).ok_or_else(|| Error::UnknownLetter(n.clone())))
                    .collect::<Result<Vec<_>>>()?
            }
            PermSyntax::Cycles(cycles) => {
                let cycles = cycles
                    .iter()
                    .map(|c| {
                        c.iter()
                            .map(|n| alphabet.index_of(n).ok_or_else(|| Error::UnknownLetter(n.clone())))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                Perm::from_cycles(d, &cycles)
                    .ok_or_else(|| Error::NotPermutation(state.clone()))?
                    .images()
                    .to_vec()
            }
        };
        rows.push(WreathRow { state, sections, images });
    }
    Ok((alphabet, rows))
}

enum PermSyntax {
    Identity,
    Sigma,
    Images(Vec<String>),
    Cycles(Vec<Vec<String>>),
}

fn parse_row(tokens: &[Token], line: usize) -> Result<(String, Vec<String>, PermSyntax)> {
    let err = |message: &str| Error::Parse {
        line,
        message: message.to_string(),
    };
    let mut it = tokens.iter().peekable();
    let name = match it.next() {
        Some(Token::Ident(s)) => s.clone(),
        _ => return Err(err("expected a state name")),
    };
    if it.next() != Some(&Token::Eq) {
        return Err(err("expected `=` after the state name"));
    }
    if it.next() != Some(&Token::Open) {
        return Err(err("expected `(` opening the section list"));
    }
    let mut sections = Vec::new();
    loop {
        match it.next() {
            Some(Token::Ident(s)) => sections.push(s.clone()),
            _ => return Err(err("expected a section name")),
        }
        match it.next() {
            Some(Token::Comma) => continue,
            Some(Token::Close) => break,
            _ => return Err(err("expected `,` or `)` in the section list")),
        }
    }
    let perm = match it.next() {
        None => PermSyntax::Identity,
        Some(Token::Ident(s)) if s == "sigma" || s == "σ" => PermSyntax::Sigma,
        Some(Token::Ident(s)) if s == "id" => PermSyntax::Identity,
        Some(Token::OpenBracket) => {
            let mut names = Vec::new();
            loop {
                match it.next() {
                    Some(Token::Ident(s)) => names.push(s.clone()),
                    Some(Token::Comma) => {}
                    Some(Token::CloseBracket) => break,
                    _ => return Err(err("unterminated image list")),
                }
            }
            PermSyntax::Images(names)
        }
        Some(Token::Open) => {
            let mut cycles = vec![Vec::new()];
            loop {
                match it.next() {
                    Some(Token::Ident(s)) => cycles.last_mut().unwrap().push(s.clone()),
                    Some(Token::Comma) => {}
                    Some(Token::Close) => match it.next() {
                        None => break,
                        Some(Token::Open) => cycles.push(Vec::new()),
                        _ => return Err(err("expected `(` or end of line after a cycle")),
                    },
                    _ => return Err(err("unterminated cycle")),
                }
            }
            PermSyntax::Cycles(cycles)
        }
        Some(_) => return Err(err("expected `sigma`, `[images]` or cycles after the sections")),
    };
    if it.next().is_some() && !matches!(perm, PermSyntax::Cycles(_)) {
        return Err(err("trailing tokens after the permutation"));
    }
    Ok((name, sections, perm))
}
