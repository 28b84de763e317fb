//! The `.vago` ontology language.
//!
//! ```text
//! # adaptors, declarations, then axioms; statements may appear in any order
//! adaptor X1 = 18
//! adaptor D = 1000.0 granularity 0.5
//! concept Person
//! dataprop hasAge functional
//! individual Jo
//! define LegalAdult == and(Person, data(hasAge, ge, $X1))
//! sub Bookshop < SpatialThing
//! assert LegalAdult(Jo)
//! assert hasAge(Jo, 17)
//! assert not LegalAdult(Ann)
//! ```
//!
//! Declarations are collected before any axiom is resolved, so names may be
//! used before they are declared. `assert` also accepts a full concept
//! expression in front of the individual.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use crate::model::{
    format_number, Adaptor, Axiom, Comparator, Concept, DomainKind, NameKind, Ontology, Severity,
    Signature, Term, ValueDomain,
};

const KEYWORDS: &[&str] = &[
    "adaptor",
    "granularity",
    "concept",
    "role",
    "dataprop",
    "functional",
    "individual",
    "define",
    "sub",
    "assert",
    "not",
    "and",
    "some",
    "data",
    "min",
    "max",
    "exact",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceSpan {
    pub file: PathBuf,
    /// 1-based.
    pub line: usize,
    /// 1-based, counted in characters.
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file.display(), self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub span: SourceSpan,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}: {level}: {}", self.span, self.message)
    }
}

/// A successfully parsed ontology and any warnings raised on the way.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub ontology: Ontology,
    pub warnings: Vec<Diagnostic>,
}

pub fn parse_ontology(text: &str) -> Result<Parsed, Vec<Diagnostic>> {
    parse_ontology_in(text, Path::new("<input>"))
}

/// Parses `text`, attributing diagnostics to `file`.
pub fn parse_ontology_in(text: &str, file: &Path) -> Result<Parsed, Vec<Diagnostic>> {
    let statements = Parser::new(text, file).statements()?;
    build(statements, file, None).map(|(ontology, warnings, _)| Parsed { ontology, warnings })
}

pub fn read_ontology(path: &Path) -> Result<Parsed, Vec<Diagnostic>> {
    let text = read(path)?;
    parse_ontology_in(&text, path)
}

/// Parses training axioms against the signature of `original`. The file may
/// declare further individuals; adaptor declarations are rejected.
pub fn parse_training(text: &str, original: &Ontology) -> Result<Vec<Axiom>, Vec<Diagnostic>> {
    parse_training_in(text, Path::new("<training>"), original)
}

pub fn parse_training_in(
    text: &str,
    file: &Path,
    original: &Ontology,
) -> Result<Vec<Axiom>, Vec<Diagnostic>> {
    let statements = Parser::new(text, file).statements()?;
    build(statements, file, Some(original)).map(|(_, _, training)| training)
}

pub fn read_training(path: &Path, original: &Ontology) -> Result<Vec<Axiom>, Vec<Diagnostic>> {
    let text = read(path)?;
    parse_training_in(&text, path, original)
}

fn read(path: &Path) -> Result<String, Vec<Diagnostic>> {
    std::fs::read_to_string(path).map_err(|e| {
        vec![Diagnostic {
            severity: Severity::Error,
            span: SourceSpan {
                file: path.to_path_buf(),
                line: 1,
                column: 1,
            },
            message: format!("cannot read file: {e}"),
        }]
    })
}

// ---------------------------------------------------------------------------
// Lexing

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number { text: String, value: f64 },
    Dollar,
    LParen,
    RParen,
    Comma,
    EqEq,
    Eq,
    Lt,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Number { text, .. } => write!(f, "number {text}"),
            Tok::Dollar => f.write_str("`$`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::EqEq => f.write_str("`==`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Lt => f.write_str("`<`"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

fn lex(text: &str, file: &Path) -> Result<Vec<(Tok, Pos)>, Vec<Diagnostic>> {
    let mut tokens = Vec::new();
    let mut errors = Vec::new();
    for (line_index, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let pos = Pos {
                line: line_index + 1,
                column: i + 1,
            };
            let c = chars[i];
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            let single = match c {
                '$' => Some(Tok::Dollar),
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                ',' => Some(Tok::Comma),
                '<' => Some(Tok::Lt),
                _ => None,
            };
            if let Some(tok) = single {
                tokens.push((tok, pos));
                i += 1;
            } else if c == '=' {
                if chars.get(i + 1) == Some(&'=') {
                    tokens.push((Tok::EqEq, pos));
                    i += 2;
                } else {
                    tokens.push((Tok::Eq, pos));
                    i += 1;
                }
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '-')
                {
                    i += 1;
                }
                tokens.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            } else if c.is_ascii_digit()
                || (c == '-' && chars.get(i + 1).is_some_and(char::is_ascii_digit))
            {
                let start = i;
                i += 1;
                while i < chars.len()
                    && (chars[i].is_ascii_digit()
                        || chars[i] == '.'
                        || chars[i] == 'e'
                        || chars[i] == 'E'
                        || ((chars[i] == '-' || chars[i] == '+')
                            && matches!(chars[i - 1], 'e' | 'E')))
                {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                match text.parse::<f64>() {
                    Ok(value) if value.is_finite() => {
                        tokens.push((Tok::Number { text, value }, pos))
                    }
                    _ => errors.push(error_at(file, pos, format!("malformed number `{text}`"))),
                }
            } else {
                errors.push(error_at(file, pos, format!("unexpected character `{c}`")));
                i += 1;
            }
        }
    }
    if errors.is_empty() {
        Ok(tokens)
    } else {
        Err(errors)
    }
}

fn error_at(file: &Path, pos: Pos, message: String) -> Diagnostic {
    Diagnostic {
        severity: Severity::Error,
        span: span(file, pos),
        message,
    }
}

fn span(file: &Path, pos: Pos) -> SourceSpan {
    SourceSpan {
        file: file.to_path_buf(),
        line: pos.line,
        column: pos.column,
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug)]
enum Arg {
    Name(String),
    Number(f64),
}

#[derive(Debug)]
enum Stmt {
    Adaptor {
        id: String,
        value: f64,
        decimal: bool,
        granularity: Option<f64>,
    },
    Declare {
        kind: NameKind,
        name: String,
        functional: bool,
    },
    Define {
        name: String,
        definition: Concept,
    },
    Sub {
        sub: Concept,
        sup: Concept,
    },
    Member {
        concept: Concept,
        individual: String,
    },
    Pair {
        name: String,
        subject: String,
        object: Arg,
    },
}

struct Parser<'a> {
    file: &'a Path,
    source: &'a str,
    tokens: Vec<(Tok, Pos)>,
    at: usize,
}

type Parse<T> = Result<T, Diagnostic>;

impl<'a> Parser<'a> {
    fn new(source: &'a str, file: &'a Path) -> Parser<'a> {
        Parser {
            file,
            source,
            tokens: Vec::new(),
            at: 0,
        }
    }

    fn statements(mut self) -> Result<Vec<(Stmt, Pos)>, Vec<Diagnostic>> {
        self.tokens = lex(self.source, self.file)?;
        let mut out = Vec::new();
        let mut errors = Vec::new();
        while self.at < self.tokens.len() {
            let start = self.pos();
            match self.statement() {
                Ok(stmt) => out.push((stmt, start)),
                Err(d) => {
                    errors.push(d);
                    self.recover();
                }
            }
        }
        if errors.is_empty() {
            Ok(out)
        } else {
            Err(errors)
        }
    }

    /// Skips to the next token that can start a statement.
    fn recover(&mut self) {
        self.at += 1;
        while let Some((tok, _)) = self.tokens.get(self.at) {
            if let Tok::Ident(word) = tok {
                if matches!(
                    word.as_str(),
                    "adaptor"
                        | "concept"
                        | "role"
                        | "dataprop"
                        | "individual"
                        | "define"
                        | "sub"
                        | "assert"
                ) {
                    return;
                }
            }
            self.at += 1;
        }
    }

    fn pos(&self) -> Pos {
        match self.tokens.get(self.at) {
            Some((_, p)) => *p,
            None => {
                let line = self.source.lines().count().max(1);
                let column = self.source.lines().last().map_or(0, |l| l.chars().count()) + 1;
                Pos { line, column }
            }
        }
    }

    fn fail<T>(&self, message: String) -> Parse<T> {
        Err(error_at(self.file, self.pos(), message))
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.at).map(|(t, _)| t)
    }

    fn next_is(&self, tok: &Tok) -> bool {
        self.peek() == Some(tok)
    }

    fn found(&self) -> String {
        match self.peek() {
            Some(t) => t.to_string(),
            None => "end of input".into(),
        }
    }

    fn expect(&mut self, tok: Tok) -> Parse<()> {
        if self.next_is(&tok) {
            self.at += 1;
            Ok(())
        } else {
            self.fail(format!("expected {tok}, found {}", self.found()))
        }
    }

    fn keyword(&mut self, word: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(w)) if w == word) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn name(&mut self) -> Parse<String> {
        match self.peek() {
            Some(Tok::Ident(w)) if KEYWORDS.contains(&w.as_str()) => self.fail(format!(
                "`{w}` is a reserved word and cannot be used as a name"
            )),
            Some(Tok::Ident(w)) => {
                let w = w.clone();
                self.at += 1;
                Ok(w)
            }
            _ => self.fail(format!("expected a name, found {}", self.found())),
        }
    }

    fn number(&mut self) -> Parse<(String, f64)> {
        match self.peek() {
            Some(Tok::Number { text, value }) => {
                let out = (text.clone(), *value);
                self.at += 1;
                Ok(out)
            }
            _ => self.fail(format!("expected a number, found {}", self.found())),
        }
    }

    fn statement(&mut self) -> Parse<Stmt> {
        let Some(Tok::Ident(word)) = self.peek() else {
            return self.fail(format!("expected a statement, found {}", self.found()));
        };
        let word = word.clone();
        self.at += 1;
        match word.as_str() {
            "adaptor" => {
                let id = self.name()?;
                self.expect(Tok::Eq)?;
                let (text, value) = self.number()?;
                let mut decimal = is_decimal_literal(&text);
                let mut granularity = None;
                if self.keyword("granularity") {
                    let (gtext, g) = self.number()?;
                    decimal |= is_decimal_literal(&gtext);
                    granularity = Some(g);
                }
                Ok(Stmt::Adaptor {
                    id,
                    value,
                    decimal,
                    granularity,
                })
            }
            "concept" | "role" | "individual" => Ok(Stmt::Declare {
                kind: match word.as_str() {
                    "concept" => NameKind::Concept,
                    "role" => NameKind::Role,
                    _ => NameKind::Individual,
                },
                name: self.name()?,
                functional: false,
            }),
            "dataprop" => {
                let name = self.name()?;
                Ok(Stmt::Declare {
                    kind: NameKind::DataProperty,
                    name,
                    functional: self.keyword("functional"),
                })
            }
            "define" => {
                let name = self.name()?;
                self.expect(Tok::EqEq)?;
                Ok(Stmt::Define {
                    name,
                    definition: self.expr()?,
                })
            }
            "sub" => {
                let sub = self.expr()?;
                self.expect(Tok::Lt)?;
                Ok(Stmt::Sub {
                    sub,
                    sup: self.expr()?,
                })
            }
            "assert" => {
                let concept = self.expr()?;
                self.expect(Tok::LParen)?;
                let subject = self.name()?;
                if self.next_is(&Tok::Comma) {
                    let Concept::Atomic(name) = concept else {
                        return self.fail("a role or data assertion needs a plain name".into());
                    };
                    self.at += 1;
                    let object = match self.peek() {
                        Some(Tok::Number { .. }) => Arg::Number(self.number()?.1),
                        _ => Arg::Name(self.name()?),
                    };
                    self.expect(Tok::RParen)?;
                    return Ok(Stmt::Pair {
                        name,
                        subject,
                        object,
                    });
                }
                self.expect(Tok::RParen)?;
                Ok(Stmt::Member {
                    concept,
                    individual: subject,
                })
            }
            other => {
                self.at -= 1;
                self.fail(format!("expected a statement, found `{other}`"))
            }
        }
    }

    fn term(&mut self) -> Parse<Term> {
        if self.next_is(&Tok::Dollar) {
            self.at += 1;
            return Ok(Term::Adaptor(self.name()?));
        }
        Ok(Term::Literal(self.number()?.1))
    }

    fn expr(&mut self) -> Parse<Concept> {
        let Some(Tok::Ident(word)) = self.peek() else {
            return self.fail(format!("expected a concept, found {}", self.found()));
        };
        let word = word.clone();
        match word.as_str() {
            "not" => {
                self.at += 1;
                Ok(Concept::not(self.expr()?))
            }
            "and" => {
                self.at += 1;
                self.expect(Tok::LParen)?;
                let mut parts = vec![self.expr()?];
                while self.next_is(&Tok::Comma) {
                    self.at += 1;
                    parts.push(self.expr()?);
                }
                self.expect(Tok::RParen)?;
                Ok(Concept::And(parts))
            }
            "some" => {
                self.at += 1;
                self.expect(Tok::LParen)?;
                let role = self.name()?;
                self.expect(Tok::Comma)?;
                let filler = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(Concept::exists(role, filler))
            }
            "data" => {
                self.at += 1;
                self.expect(Tok::LParen)?;
                let property = self.name()?;
                self.expect(Tok::Comma)?;
                let comparator = match self.peek() {
                    Some(Tok::Ident(w)) => Comparator::from_keyword(w),
                    _ => None,
                };
                let Some(comparator) = comparator else {
                    return self.fail(format!(
                        "expected one of lt, le, ge, gt, eq, found {}",
                        self.found()
                    ));
                };
                self.at += 1;
                self.expect(Tok::Comma)?;
                let value = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(Concept::data(property, comparator, value))
            }
            "min" | "max" | "exact" => {
                self.at += 1;
                self.expect(Tok::LParen)?;
                let count = self.term()?;
                self.expect(Tok::Comma)?;
                let role = self.name()?;
                self.expect(Tok::Comma)?;
                let filler = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(match word.as_str() {
                    "min" => Concept::min_card(count, role, filler),
                    "max" => Concept::max_card(count, role, filler),
                    _ => Concept::exact_card(count, role, filler),
                })
            }
            _ => Ok(Concept::atomic(self.name()?)),
        }
    }
}

fn is_decimal_literal(text: &str) -> bool {
    text.contains(['.', 'e', 'E'])
}

// ---------------------------------------------------------------------------
// Resolution

/// Resolves parsed statements. With a `base`, statements are training
/// axioms checked against it; otherwise they form a standalone ontology.
fn build(
    statements: Vec<(Stmt, Pos)>,
    file: &Path,
    base: Option<&Ontology>,
) -> Result<(Ontology, Vec<Diagnostic>, Vec<Axiom>), Vec<Diagnostic>> {
    let mut errors = Vec::new();
    let mut signature = base.map(|o| o.signature().clone()).unwrap_or_default();
    let mut adaptors: BTreeMap<String, (Adaptor, Pos)> = BTreeMap::new();

    // Pass 1: declarations.
    let mut declared_at: BTreeMap<String, (NameKind, Pos)> = BTreeMap::new();
    for (stmt, pos) in &statements {
        match stmt {
            Stmt::Declare { kind, name, .. } => {
                let clash = match declared_at.get(name) {
                    Some((prev, _)) if prev != kind => Some(*prev),
                    Some(_) => None,
                    None => signature.kinds_of(name).into_iter().find(|k| k != kind),
                };
                if let Some(prev) = clash {
                    errors.push(error_at(
                        file,
                        *pos,
                        format!("`{name}` is already declared as {}", prev.describe()),
                    ));
                    continue;
                }
                declared_at.entry(name.clone()).or_insert((*kind, *pos));
                signature.declare(*kind, name.clone());
            }
            Stmt::Adaptor {
                id,
                value,
                decimal,
                granularity,
            } => {
                if base.is_some() {
                    errors.push(error_at(
                        file,
                        *pos,
                        "training files cannot declare adaptors".into(),
                    ));
                    continue;
                }
                if adaptors.contains_key(id) {
                    errors.push(error_at(
                        file,
                        *pos,
                        format!("adaptor `{id}` declared twice"),
                    ));
                    continue;
                }
                let domain = match (decimal, granularity) {
                    (true, g) => ValueDomain::decimal(g.unwrap_or(1.0)),
                    (false, None) => Ok(ValueDomain::INTEGER),
                    (false, Some(g)) if *g >= 1.0 => ValueDomain::integer(*g as u64),
                    (false, Some(_)) => ValueDomain::integer(0),
                };
                match domain {
                    Ok(domain) => {
                        adaptors.insert(
                            id.clone(),
                            (
                                Adaptor {
                                    id: id.clone(),
                                    current: *value,
                                    domain,
                                },
                                *pos,
                            ),
                        );
                    }
                    Err(e) => errors.push(error_at(file, *pos, e.to_string())),
                }
            }
            _ => {}
        }
    }

    // Pass 2: axioms.
    let mut axioms = Vec::new();
    let mut axiom_pos = Vec::new();
    for (stmt, pos) in statements {
        let axiom = match stmt {
            Stmt::Adaptor { .. } => continue,
            Stmt::Declare {
                kind: NameKind::DataProperty,
                name,
                functional: true,
            } => Axiom::FunctionalData(name),
            Stmt::Declare { .. } => continue,
            Stmt::Define { name, definition } => Axiom::Equiv { name, definition },
            Stmt::Sub { sub, sup } => Axiom::SubClass { sub, sup },
            Stmt::Member {
                concept,
                individual,
            } => Axiom::ConceptAssertion {
                concept,
                individual,
            },
            Stmt::Pair {
                name,
                subject,
                object,
            } => {
                let kinds = signature.kinds_of(&name);
                let resolved = match (kinds.first(), object) {
                    (Some(NameKind::Role), Arg::Name(object)) => Ok(Axiom::RoleAssertion {
                        role: name,
                        subject,
                        object,
                    }),
                    (Some(NameKind::DataProperty), Arg::Number(value)) => {
                        Ok(Axiom::DataAssertion {
                            property: name,
                            individual: subject,
                            value,
                        })
                    }
                    (Some(NameKind::Role), Arg::Number(_)) => Err(format!(
                        "role `{name}` needs an individual as second argument"
                    )),
                    (Some(NameKind::DataProperty), Arg::Name(_)) => Err(format!(
                        "data property `{name}` needs a number as second argument"
                    )),
                    (Some(other), _) => Err(format!(
                        "`{name}` is a {}, expected a role or data property",
                        other.describe()
                    )),
                    (None, _) => Err(format!("unknown name {name}")),
                };
                match resolved {
                    Ok(ax) => ax,
                    Err(message) => {
                        errors.push(error_at(file, pos, message));
                        continue;
                    }
                }
            }
        };
        axioms.push(axiom);
        axiom_pos.push(pos);
    }

    let offset = base.map_or(0, |o| o.axioms().len());
    let all_axioms: Vec<Axiom> = match base {
        Some(o) => o
            .axioms()
            .iter()
            .cloned()
            .chain(axioms.iter().cloned())
            .collect(),
        None => axioms.clone(),
    };
    let adaptor_pos: BTreeMap<String, Pos> =
        adaptors.iter().map(|(k, (_, p))| (k.clone(), *p)).collect();
    let table: Vec<Adaptor> = match base {
        Some(o) => o.adaptors().cloned().collect(),
        None => adaptors.into_values().map(|(a, _)| a).collect(),
    };
    let ontology = Ontology::new_unchecked(signature, all_axioms, table);

    let origin = Pos { line: 1, column: 1 };
    let mut warnings = Vec::new();
    if errors.is_empty() {
        for issue in ontology.check() {
            let pos = match (issue.axiom, &issue.adaptor) {
                (Some(i), _) if i >= offset => axiom_pos[i - offset],
                // An issue confined to the base ontology is not ours to report.
                (Some(_), _) => continue,
                (None, Some(id)) => adaptor_pos.get(id).copied().unwrap_or(origin),
                (None, None) => origin,
            };
            if base.is_some() && issue.axiom.is_none() {
                continue;
            }
            let d = Diagnostic {
                severity: issue.severity,
                span: span(file, pos),
                message: issue.message,
            };
            match d.severity {
                Severity::Error => errors.push(d),
                Severity::Warning => warnings.push(d),
            }
        }
    }
    if !errors.is_empty() {
        errors.sort_by_key(|d| (d.span.line, d.span.column));
        return Err(errors);
    }
    Ok((ontology, warnings, axioms))
}

// ---------------------------------------------------------------------------
// Serialization

/// Renders an ontology so that parsing the text yields an equal ontology.
/// Adaptors come first, then declarations, then axioms in list order.
pub fn serialize_ontology(ontology: &Ontology) -> String {
    let mut out = String::new();
    for a in ontology.adaptors() {
        out.push_str(&format!("adaptor {} = ", a.id));
        match a.domain.kind {
            DomainKind::Integer => {
                out.push_str(&format_number(a.current));
                if a.domain.granularity != 1.0 {
                    out.push_str(&format!(
                        " granularity {}",
                        format_number(a.domain.granularity)
                    ));
                }
            }
            DomainKind::Decimal => {
                out.push_str(&format!(
                    "{} granularity {}",
                    decimal(a.current),
                    decimal(a.domain.granularity)
                ));
            }
        }
        out.push('\n');
    }
    // A functional property is declared by its `dataprop X functional` line.
    let functional: HashSet<&str> = ontology
        .axioms()
        .iter()
        .filter_map(|ax| match ax {
            Axiom::FunctionalData(property) => Some(property.as_str()),
            _ => None,
        })
        .collect();
    write_declarations(&mut out, ontology.signature(), &functional);
    for ax in ontology.axioms() {
        out.push_str(&axiom_line(ax));
        out.push('\n');
    }
    out
}

/// Renders training axioms, declaring the individuals `original` lacks.
pub fn serialize_training(axioms: &[Axiom], original: &Ontology) -> String {
    let mut out = String::new();
    let mut declared: HashSet<&str> = HashSet::new();
    for ax in axioms {
        for ind in ax.individuals() {
            if !original.signature().individuals.contains(ind) && declared.insert(ind) {
                out.push_str(&format!("individual {ind}\n"));
            }
        }
    }
    for ax in axioms {
        out.push_str(&axiom_line(ax));
        out.push('\n');
    }
    out
}

fn write_declarations(out: &mut String, sig: &Signature, skip: &HashSet<&str>) {
    let groups = [
        ("concept", &sig.concepts),
        ("role", &sig.roles),
        ("dataprop", &sig.data_properties),
        ("individual", &sig.individuals),
    ];
    for (keyword, names) in groups {
        for name in names
            .iter()
            .filter(|n| !(keyword == "dataprop" && skip.contains(n.as_str())))
        {
            out.push_str(&format!("{keyword} {name}\n"));
        }
    }
}

fn decimal(v: f64) -> String {
    let s = format_number(v);
    if is_decimal_literal(&s) {
        s
    } else {
        format!("{s}.0")
    }
}

fn axiom_line(ax: &Axiom) -> String {
    match ax {
        Axiom::Equiv { name, definition } => format!("define {name} == {}", expr(definition)),
        Axiom::SubClass { sub, sup } => format!("sub {} < {}", expr(sub), expr(sup)),
        Axiom::ConceptAssertion {
            concept,
            individual,
        } => format!("assert {}({individual})", expr(concept)),
        Axiom::RoleAssertion {
            role,
            subject,
            object,
        } => format!("assert {role}({subject}, {object})"),
        Axiom::DataAssertion {
            property,
            individual,
            value,
        } => format!("assert {property}({individual}, {})", format_number(*value)),
        Axiom::FunctionalData(p) => format!("dataprop {p} functional"),
    }
}

fn term(t: &Term) -> String {
    match t {
        Term::Literal(v) => format_number(*v),
        Term::Adaptor(id) => format!("${id}"),
    }
}

fn expr(c: &Concept) -> String {
    match c {
        Concept::Atomic(name) => name.clone(),
        Concept::Not(inner) => format!("not {}", expr(inner)),
        Concept::And(parts) => format!(
            "and({})",
            parts.iter().map(expr).collect::<Vec<_>>().join(", ")
        ),
        Concept::Exists { role, filler } => format!("some({role}, {})", expr(filler)),
        Concept::Data {
            property,
            comparator,
            value,
        } => format!(
            "data({property}, {}, {})",
            comparator.keyword(),
            term(value)
        ),
        Concept::MinCard {
            count,
            role,
            filler,
        } => format!("min({}, {role}, {})", term(count), expr(filler)),
        Concept::MaxCard {
            count,
            role,
            filler,
        } => format!("max({}, {role}, {})", term(count), expr(filler)),
        Concept::ExactCard {
            count,
            role,
            filler,
        } => format!("exact({}, {role}, {})", term(count), expr(filler)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ADULT: &str = "\
adaptor X1 = 18
concept Person
concept LegalAdult
dataprop hasAge functional
define LegalAdult == and(Person, data(hasAge, ge, $X1))
";

    #[test]
    fn parses_definition_with_adaptor() {
        let parsed = parse_ontology(ADULT).unwrap();
        assert!(parsed.warnings.is_empty());
        let o = parsed.ontology;
        assert_eq!(o.adaptor("X1").unwrap().current, 18.0);
        assert_eq!(o.adaptor("X1").unwrap().domain, ValueDomain::INTEGER);
        assert_eq!(o.axioms().len(), 2);
        assert_eq!(o.axioms()[0], Axiom::FunctionalData("hasAge".into()));
        assert_eq!(
            o.axioms()[1],
            Axiom::Equiv {
                name: "LegalAdult".into(),
                definition: Concept::And(vec![
                    Concept::atomic("Person"),
                    Concept::data("hasAge", Comparator::Ge, Term::Adaptor("X1".into())),
                ]),
            }
        );
    }

    #[test]
    fn empty_input_is_empty_ontology() {
        let parsed = parse_ontology("").unwrap();
        assert_eq!(parsed.ontology, Ontology::default());
        assert!(parsed.warnings.is_empty());
        assert!(parse_ontology("# only a comment\n\n").is_ok());
    }

    #[test]
    fn unknown_name_is_reported_with_position() {
        let errors = parse_ontology("concept A\ndefine A == and(B)\n").unwrap_err();
        let unknown = errors
            .iter()
            .find(|d| d.message == "unknown name B")
            .expect("unknown-name diagnostic");
        assert_eq!((unknown.span.line, unknown.span.column), (2, 1));
    }

    #[test]
    fn syntax_errors_carry_spans_and_recover() {
        let errors = parse_ontology("concept A\ndefine A = A\nconcept 3\n").unwrap_err();
        assert_eq!(errors.len(), 2);
        assert_eq!((errors[0].span.line, errors[0].span.column), (2, 10));
        assert_eq!(errors[1].span.line, 3);
        assert!(errors[0].to_string().starts_with("<input>:2:10: error:"));
    }

    #[test]
    fn cycles_are_rejected() {
        let errors =
            parse_ontology("concept A\nconcept B\ndefine A == not B\ndefine B == A\n").unwrap_err();
        assert!(errors
            .iter()
            .any(|d| d.message.starts_with("cyclic definition")));
    }

    #[test]
    fn cardinality_adaptor_must_be_integer() {
        let text = "adaptor N = 2.5\nconcept A\nconcept B\nrole r\ndefine A == min($N, r, B)\n";
        let errors = parse_ontology(text).unwrap_err();
        assert!(errors[0].message.starts_with("adaptor domain mismatch"));
        assert_eq!(errors[0].span.line, 1);
    }

    #[test]
    fn assertions_are_disambiguated_by_kind() {
        let text = "\
concept Person
role parentOf
dataprop hasAge
individual p
individual c
assert Person(p)
assert parentOf(p, c)
assert hasAge(c, 4)
assert not Person(c)
";
        let o = parse_ontology(text).unwrap().ontology;
        assert!(matches!(o.axioms()[1], Axiom::RoleAssertion { .. }));
        assert!(matches!(o.axioms()[2], Axiom::DataAssertion { value, .. } if value == 4.0));
        assert!(matches!(
            &o.axioms()[3],
            Axiom::ConceptAssertion {
                concept: Concept::Not(_),
                ..
            }
        ));
        let bad = parse_ontology("dataprop hasAge\nindividual c\nassert hasAge(c, c)\n");
        assert!(bad.unwrap_err()[0].message.contains("needs a number"));
    }

    #[test]
    fn reserved_words_are_not_names() {
        let errors = parse_ontology("concept and\n").unwrap_err();
        assert!(errors[0].message.contains("reserved"));
    }

    #[test]
    fn decimal_adaptors_keep_their_kind() {
        let text =
            "adaptor D = 2.5 granularity 0.5\nadaptor E = 4.0\nadaptor G = 10 granularity 5\n";
        let o = parse_ontology(text).unwrap().ontology;
        assert_eq!(
            o.adaptor("D").unwrap().domain,
            ValueDomain::decimal(0.5).unwrap()
        );
        assert_eq!(o.adaptor("E").unwrap().domain.kind, DomainKind::Decimal);
        assert_eq!(
            o.adaptor("G").unwrap().domain,
            ValueDomain::integer(5).unwrap()
        );
        let back = parse_ontology(&serialize_ontology(&o)).unwrap().ontology;
        assert_eq!(back, o);
    }

    #[test]
    fn mixed_adaptor_use_warns() {
        let text = "\
adaptor N = 2
concept A
concept B
role r
dataprop v
define A == and(min($N, r, B), data(v, ge, $N))
";
        let parsed = parse_ontology(text).unwrap();
        assert_eq!(parsed.warnings.len(), 1);
        assert_eq!(parsed.warnings[0].span.line, 1);
    }

    #[test]
    fn round_trip_preserves_structure() {
        let text = format!(
            "{ADULT}individual Jo\nassert LegalAdult(Jo)\nassert hasAge(Jo, 17)\nconcept Agent\nsub Person < not Agent\n"
        );
        let o = parse_ontology(&text).unwrap().ontology;
        let again = parse_ontology(&serialize_ontology(&o)).unwrap().ontology;
        assert_eq!(again, o);
        assert_eq!(serialize_ontology(&again), serialize_ontology(&o));
    }

    #[test]
    fn training_may_declare_individuals_only_for_itself() {
        let original = parse_ontology(ADULT).unwrap().ontology;
        let training = parse_training(
            "individual John\nassert LegalAdult(John)\nassert hasAge(John, 16)\n",
            &original,
        )
        .unwrap();
        assert_eq!(training.len(), 2);
        let text = serialize_training(&training, &original);
        assert_eq!(parse_training(&text, &original).unwrap(), training);

        let errors = parse_training("assert Adult(Nobody)\n", &original).unwrap_err();
        assert!(errors.iter().any(|d| d.message == "unknown name Adult"));
        assert!(parse_training("adaptor Y = 1\n", &original).is_err());
    }
}
