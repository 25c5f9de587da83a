//! The `.uag` model language.
//!
//! ```text
//! signature Grp { e/0, inv/1, mul/2 }
//! algebra Z2 : Grp { size 2; e = 0; inv = [0,1]; mul = [[0,1],[1,0]] }
//! system T : Grp on (x1) { mul(x1,x1) = e }
//! words Wop : Grp { e -> e; inv -> inv(x1); mul -> mul(x2,x1) }
//! ```
//!
//! Lines starting at `#` are comments. Statements inside braces are
//! separated by `;` (signature operations by `,`); a trailing separator is
//! allowed. Tables are row-major nested lists with one nesting level per
//! argument, and elements are 0-based.

use std::fmt::{self, Write as _};
use std::sync::Arc;

use indexmap::IndexMap;

use crate::algebra::{Elem, FiniteAlgebra, Signature};
use crate::terms::{EquationSystem, GeneratorSet, Term};
use crate::verbal::WordSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParseErrorKind {
    Lexical,
    Syntax,
    UnknownSymbol,
    ArityMismatch,
    TableShape,
    TableRange,
    Incomplete,
    DuplicateName,
    GeneratorRange,
}

impl ParseErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseErrorKind::Lexical => "lexical",
            ParseErrorKind::Syntax => "syntax",
            ParseErrorKind::UnknownSymbol => "unknown-symbol",
            ParseErrorKind::ArityMismatch => "arity-mismatch",
            ParseErrorKind::TableShape => "table-shape",
            ParseErrorKind::TableRange => "table-range",
            ParseErrorKind::Incomplete => "incomplete",
            ParseErrorKind::DuplicateName => "duplicate-name",
            ParseErrorKind::GeneratorRange => "generator-range",
        }
    }
}

/// A parse failure at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {} error: {}",
            self.line,
            self.column,
            self.kind.as_str(),
            self.message
        )
    }
}

impl std::error::Error for ParseError {}

type PResult<T> = std::result::Result<T, ParseError>;

/// Everything declared in one model file, in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModelFile {
    pub signatures: IndexMap<String, Arc<Signature>>,
    pub algebras: IndexMap<String, Arc<FiniteAlgebra>>,
    pub systems: IndexMap<String, EquationSystem>,
    pub word_systems: IndexMap<String, WordSystem>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(usize),
    Punct(char),
    Arrow,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Punct(c) => format!("`{c}`"),
            Tok::Arrow => "`->`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> PResult<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        let (start_line, start_col) = (line, column);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
        } else if c == '#' {
            while chars.peek().is_some_and(|&c| c != '\n') {
                bump(&mut chars);
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while chars
                .peek()
                .is_some_and(|&c| c.is_ascii_alphanumeric() || c == '_')
            {
                s.push(bump(&mut chars).unwrap());
            }
            out.push(Token {
                tok: Tok::Ident(s),
                line: start_line,
                column: start_col,
            });
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while chars.peek().is_some_and(|c| c.is_ascii_digit()) {
                s.push(bump(&mut chars).unwrap());
            }
            let n = s.parse().map_err(|_| ParseError {
                kind: ParseErrorKind::Lexical,
                line: start_line,
                column: start_col,
                message: format!("integer `{s}` is too large"),
            })?;
            out.push(Token {
                tok: Tok::Int(n),
                line: start_line,
                column: start_col,
            });
        } else if c == '-' {
            bump(&mut chars);
            if chars.peek() == Some(&'>') {
                bump(&mut chars);
                out.push(Token {
                    tok: Tok::Arrow,
                    line: start_line,
                    column: start_col,
                });
            } else {
                return Err(ParseError {
                    kind: ParseErrorKind::Lexical,
                    line: start_line,
                    column: start_col,
                    message: "`-` must be followed by `>`".into(),
                });
            }
        } else if "{}()[],;:=/".contains(c) {
            bump(&mut chars);
            out.push(Token {
                tok: Tok::Punct(c),
                line: start_line,
                column: start_col,
            });
        } else {
            return Err(ParseError {
                kind: ParseErrorKind::Lexical,
                line: start_line,
                column: start_col,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}

/// Parses `xN` into the 0-based generator index `N - 1`.
fn generator_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse::<usize>().ok().map(|n| n.wrapping_sub(1))
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(t: &Token, kind: ParseErrorKind, message: impl Into<String>) -> ParseError {
        ParseError {
            kind,
            line: t.line,
            column: t.column,
            message: message.into(),
        }
    }

    fn is_punct(&self, c: char) -> bool {
        self.peek().tok == Tok::Punct(c)
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if self.is_punct(c) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, c: char) -> PResult<Token> {
        let t = self.next();
        if t.tok == Tok::Punct(c) {
            Ok(t)
        } else {
            Err(Self::error_at(
                &t,
                ParseErrorKind::Syntax,
                format!("expected `{c}`, found {}", t.tok.describe()),
            ))
        }
    }

    fn expect_ident(&mut self, what: &str) -> PResult<(String, Token)> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) => Ok((s.clone(), t)),
            other => Err(Self::error_at(
                &t,
                ParseErrorKind::Syntax,
                format!("expected {what}, found {}", other.describe()),
            )),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        let (s, t) = self.expect_ident(&format!("`{kw}`"))?;
        if s == kw {
            Ok(())
        } else {
            Err(Self::error_at(
                &t,
                ParseErrorKind::Syntax,
                format!("expected `{kw}`, found `{s}`"),
            ))
        }
    }

    fn expect_int(&mut self, what: &str) -> PResult<(usize, Token)> {
        let t = self.next();
        match t.tok {
            Tok::Int(n) => Ok((n, t)),
            ref other => Err(Self::error_at(
                &t,
                ParseErrorKind::Syntax,
                format!("expected {what}, found {}", other.describe()),
            )),
        }
    }

    /// Consumes a statement separator unless the block closes next.
    fn statement_end(&mut self, sep: char) -> PResult<()> {
        if self.eat_punct(sep) || self.is_punct('}') {
            Ok(())
        } else {
            let t = self.peek().clone();
            Err(Self::error_at(
                &t,
                ParseErrorKind::Syntax,
                format!("expected `{sep}` or `}}`, found {}", t.tok.describe()),
            ))
        }
    }

    fn term(&mut self, sig: &Signature, rank: usize) -> PResult<Term> {
        let (name, t) = self.expect_ident("a term")?;
        if let Some(i) = generator_index(&name) {
            if i >= rank {
                return Err(Self::error_at(
                    &t,
                    ParseErrorKind::GeneratorRange,
                    format!("generator `{name}` outside x1..x{rank}"),
                ));
            }
            return Ok(Term::Var(i));
        }
        let op = sig.index_of(&name).ok_or_else(|| {
            Self::error_at(
                &t,
                ParseErrorKind::UnknownSymbol,
                format!("`{name}` is not an operation of {}", sig.name()),
            )
        })?;
        let mut args = Vec::new();
        if self.eat_punct('(') && !self.eat_punct(')') {
            loop {
                args.push(self.term(sig, rank)?);
                if self.eat_punct(')') {
                    break;
                }
                self.expect_punct(',')?;
            }
        }
        let arity = sig.arity(op);
        if args.len() != arity {
            return Err(Self::error_at(
                &t,
                ParseErrorKind::ArityMismatch,
                format!("`{name}` takes {arity} arguments, found {}", args.len()),
            ));
        }
        Ok(Term::App(op, args))
    }

    fn signature_ref(&mut self, model: &ModelFile) -> PResult<Arc<Signature>> {
        self.expect_punct(':')?;
        let (name, t) = self.expect_ident("a signature name")?;
        model.signatures.get(&name).cloned().ok_or_else(|| {
            Self::error_at(
                &t,
                ParseErrorKind::UnknownSymbol,
                format!("unknown signature `{name}`"),
            )
        })
    }

    fn signature(&mut self, name: String) -> PResult<Signature> {
        self.expect_punct('{')?;
        let mut ops: Vec<(String, usize)> = Vec::new();
        while !self.eat_punct('}') {
            let (sym, t) = self.expect_ident("an operation symbol")?;
            if generator_index(&sym).is_some() {
                return Err(Self::error_at(
                    &t,
                    ParseErrorKind::Syntax,
                    format!("`{sym}` is reserved for generators"),
                ));
            }
            if ops.iter().any(|(s, _)| *s == sym) {
                return Err(Self::error_at(
                    &t,
                    ParseErrorKind::DuplicateName,
                    format!("operation `{sym}` declared twice"),
                ));
            }
            self.expect_punct('/')?;
            let (arity, _) = self.expect_int("an arity")?;
            ops.push((sym, arity));
            self.statement_end(',')?;
        }
        Ok(Signature::new(name, ops).expect("symbols were validated"))
    }

    fn table(&mut self, size: usize, arity: usize, out: &mut Vec<Elem>) -> PResult<()> {
        if arity == 0 {
            let (v, t) = self.expect_int("a table entry")?;
            if v >= size {
                return Err(Self::error_at(
                    &t,
                    ParseErrorKind::TableRange,
                    format!("entry {v} outside 0..{size}"),
                ));
            }
            out.push(v);
            return Ok(());
        }
        let open = self.peek().clone();
        if open.tok != Tok::Punct('[') {
            return Err(Self::error_at(
                &open,
                ParseErrorKind::TableShape,
                format!("expected a list nested {arity} deep"),
            ));
        }
        self.next();
        let mut count = 0;
        while !self.eat_punct(']') {
            if count > 0 {
                self.expect_punct(',')?;
                if self.eat_punct(']') {
                    break;
                }
            }
            self.table(size, arity - 1, out)?;
            count += 1;
        }
        if count != size {
            return Err(Self::error_at(
                &open,
                ParseErrorKind::TableShape,
                format!("list has {count} entries, expected {size}"),
            ));
        }
        Ok(())
    }

    fn algebra(&mut self, name: &str, sig: Arc<Signature>) -> PResult<FiniteAlgebra> {
        let open = self.expect_punct('{')?;
        self.expect_keyword("size")?;
        let (size, size_tok) = self.expect_int("the carrier size")?;
        if size == 0 {
            return Err(Self::error_at(
                &size_tok,
                ParseErrorKind::TableShape,
                "carrier must be nonempty",
            ));
        }
        self.statement_end(';')?;
        let mut tables: Vec<Option<Vec<Elem>>> = vec![None; sig.len()];
        while !self.eat_punct('}') {
            let (sym, t) = self.expect_ident("an operation symbol")?;
            let op = sig.index_of(&sym).ok_or_else(|| {
                Self::error_at(
                    &t,
                    ParseErrorKind::UnknownSymbol,
                    format!("`{sym}` is not an operation of {}", sig.name()),
                )
            })?;
            if tables[op].is_some() {
                return Err(Self::error_at(
                    &t,
                    ParseErrorKind::DuplicateName,
                    format!("table for `{sym}` given twice"),
                ));
            }
            self.expect_punct('=')?;
            let mut table = Vec::new();
            self.table(size, sig.arity(op), &mut table)?;
            tables[op] = Some(table);
            self.statement_end(';')?;
        }
        if let Some(missing) = tables.iter().position(Option::is_none) {
            return Err(Self::error_at(
                &open,
                ParseErrorKind::Incomplete,
                format!("algebra `{name}` has no table for `{}`", sig.symbol(missing)),
            ));
        }
        let tables = tables.into_iter().map(Option::unwrap).collect();
        Ok(FiniteAlgebra::new(sig, size, tables).expect("tables were validated"))
    }

    fn system(&mut self, sig: Arc<Signature>) -> PResult<EquationSystem> {
        self.expect_keyword("on")?;
        let open = self.expect_punct('(')?;
        let mut rank = 0;
        while !self.eat_punct(')') {
            if rank > 0 {
                self.expect_punct(',')?;
            }
            let (g, t) = self.expect_ident("a generator")?;
            if generator_index(&g) != Some(rank) {
                return Err(Self::error_at(
                    &t,
                    ParseErrorKind::GeneratorRange,
                    format!("expected generator `x{}`, found `{g}`", rank + 1),
                ));
            }
            rank += 1;
        }
        let generators = GeneratorSet::new(rank).map_err(|_| {
            Self::error_at(&open, ParseErrorKind::GeneratorRange, "no generators")
        })?;
        self.expect_punct('{')?;
        let mut pairs = Vec::new();
        while !self.eat_punct('}') {
            let l = self.term(&sig, rank)?;
            self.expect_punct('=')?;
            let r = self.term(&sig, rank)?;
            pairs.push((l, r));
            self.statement_end(';')?;
        }
        Ok(EquationSystem::new(sig, generators, pairs).expect("terms were validated"))
    }

    fn words(&mut self, name: &str, sig: Arc<Signature>) -> PResult<WordSystem> {
        let open = self.expect_punct('{')?;
        let mut words: Vec<Option<Term>> = vec![None; sig.len()];
        while !self.eat_punct('}') {
            let (sym, t) = self.expect_ident("an operation symbol")?;
            let op = sig.index_of(&sym).ok_or_else(|| {
                Self::error_at(
                    &t,
                    ParseErrorKind::UnknownSymbol,
                    format!("`{sym}` is not an operation of {}", sig.name()),
                )
            })?;
            if words[op].is_some() {
                return Err(Self::error_at(
                    &t,
                    ParseErrorKind::DuplicateName,
                    format!("word for `{sym}` given twice"),
                ));
            }
            let arrow = self.next();
            if arrow.tok != Tok::Arrow {
                return Err(Self::error_at(
                    &arrow,
                    ParseErrorKind::Syntax,
                    format!("expected `->`, found {}", arrow.tok.describe()),
                ));
            }
            words[op] = Some(self.term(&sig, sig.arity(op))?);
            self.statement_end(';')?;
        }
        if let Some(missing) = words.iter().position(Option::is_none) {
            return Err(Self::error_at(
                &open,
                ParseErrorKind::Incomplete,
                format!("word system `{name}` has no word for `{}`", sig.symbol(missing)),
            ));
        }
        let words = words.into_iter().map(Option::unwrap).collect();
        Ok(WordSystem::new(sig, words).expect("words were validated"))
    }

    fn model(&mut self) -> PResult<ModelFile> {
        let mut model = ModelFile::default();
        loop {
            let t = self.next();
            let kw = match &t.tok {
                Tok::Eof => return Ok(model),
                Tok::Ident(s) => s.clone(),
                other => {
                    return Err(Self::error_at(
                        &t,
                        ParseErrorKind::Syntax,
                        format!("expected a declaration, found {}", other.describe()),
                    ))
                }
            };
            let (name, name_tok) = self.expect_ident("a name")?;
            let duplicate = match kw.as_str() {
                "signature" => model.signatures.contains_key(&name),
                "algebra" => model.algebras.contains_key(&name),
                "system" => model.systems.contains_key(&name),
                "words" => model.word_systems.contains_key(&name),
                _ => {
                    return Err(Self::error_at(
                        &t,
                        ParseErrorKind::Syntax,
                        format!(
                            "expected `signature`, `algebra`, `system` or `words`, found `{kw}`"
                        ),
                    ))
                }
            };
            if duplicate {
                return Err(Self::error_at(
                    &name_tok,
                    ParseErrorKind::DuplicateName,
                    format!("{kw} `{name}` declared twice"),
                ));
            }
            match kw.as_str() {
                "signature" => {
                    let sig = self.signature(name.clone())?;
                    model.signatures.insert(name, Arc::new(sig));
                }
                "algebra" => {
                    let sig = self.signature_ref(&model)?;
                    let alg = self.algebra(&name, sig)?;
                    model.algebras.insert(name, Arc::new(alg));
                }
                "system" => {
                    let sig = self.signature_ref(&model)?;
                    let sys = self.system(sig)?;
                    model.systems.insert(name, sys);
                }
                _ => {
                    let sig = self.signature_ref(&model)?;
                    let w = self.words(&name, sig)?;
                    model.word_systems.insert(name, w);
                }
            }
        }
    }
}

pub fn parse_model(text: &str) -> PResult<ModelFile> {
    Parser {
        tokens: lex(text)?,
        pos: 0,
    }
    .model()
}

/// Parses a single term over `x1..x{rank}`.
pub fn parse_term(sig: &Signature, rank: usize, text: &str) -> PResult<Term> {
    let mut p = Parser {
        tokens: lex(text)?,
        pos: 0,
    };
    let t = p.term(sig, rank)?;
    let end = p.next();
    if end.tok != Tok::Eof {
        return Err(Parser::error_at(
            &end,
            ParseErrorKind::Syntax,
            format!("unexpected {} after term", end.tok.describe()),
        ));
    }
    Ok(t)
}

pub fn render_signature(name: &str, sig: &Signature) -> String {
    let ops: Vec<String> = sig
        .ops()
        .iter()
        .map(|o| format!("{}/{}", o.name, o.arity))
        .collect();
    format!("signature {name} {{ {} }}\n", ops.join(", "))
}

fn render_table(out: &mut String, table: &[Elem], size: usize, arity: usize) {
    if arity == 0 {
        write!(out, "{}", table[0]).unwrap();
        return;
    }
    let stride = table.len() / size;
    out.push('[');
    for i in 0..size {
        if i > 0 {
            out.push_str(", ");
        }
        render_table(out, &table[i * stride..(i + 1) * stride], size, arity - 1);
    }
    out.push(']');
}

pub fn render_algebra(name: &str, alg: &FiniteAlgebra) -> String {
    let sig = alg.signature();
    let mut out = format!("algebra {name} : {} {{\n  size {};\n", sig.name(), alg.size());
    for op in 0..sig.len() {
        write!(out, "  {} = ", sig.symbol(op)).unwrap();
        render_table(&mut out, alg.table(op), alg.size(), sig.arity(op));
        out.push_str(";\n");
    }
    out.push_str("}\n");
    out
}

pub fn render_system(name: &str, sys: &EquationSystem) -> String {
    let sig = sys.signature();
    let gens: Vec<String> = (1..=sys.rank()).map(|i| format!("x{i}")).collect();
    let eqs: Vec<String> = sys
        .pairs()
        .iter()
        .map(|(l, r)| format!("{} = {}", l.display(sig), r.display(sig)))
        .collect();
    let body = if eqs.is_empty() {
        " ".to_string()
    } else {
        format!(" {} ", eqs.join("; "))
    };
    format!(
        "system {name} : {} on ({}) {{{body}}}\n",
        sig.name(),
        gens.join(",")
    )
}

pub fn render_words(name: &str, w: &WordSystem) -> String {
    let sig = w.signature();
    let items: Vec<String> = (0..sig.len())
        .map(|op| format!("{} -> {}", sig.symbol(op), w.word(op).display(sig)))
        .collect();
    format!("words {name} : {} {{ {} }}\n", sig.name(), items.join("; "))
}

/// Canonical text of a model: signatures, algebras, systems, word systems,
/// each group in declaration order.
pub fn render_model(model: &ModelFile) -> String {
    let mut out = String::new();
    for (name, sig) in &model.signatures {
        out.push_str(&render_signature(name, sig));
    }
    for (name, alg) in &model.algebras {
        out.push('\n');
        out.push_str(&render_algebra(name, alg));
    }
    if !model.systems.is_empty() {
        out.push('\n');
    }
    for (name, sys) in &model.systems {
        out.push_str(&render_system(name, sys));
    }
    if !model.word_systems.is_empty() {
        out.push('\n');
    }
    for (name, w) in &model.word_systems {
        out.push_str(&render_words(name, w));
    }
    out
}
