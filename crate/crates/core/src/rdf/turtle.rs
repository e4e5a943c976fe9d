//! Turtle parser.
//!
//! Covers the constructs found in published vocabularies: `@prefix`/`@base`
//! and their SPARQL-style forms, predicate and object lists, `a`, blank-node
//! property lists, collections, and string, numeric and boolean literals.
//! Blank nodes are relabelled `_:b0`, `_:b1`, ... in document order.

use url::Url;

use super::{vocab, BlankNodeNamer, Graph, Literal, RdfError, Term, Triple};

pub fn parse_turtle(text: &str) -> Result<Graph, RdfError> {
    Parser::new(text, None).parse()
}

/// Parses with an initial base IRI used to resolve relative references.
pub fn parse_turtle_with_base(text: &str, base: &str) -> Result<Graph, RdfError> {
    let base = Url::parse(base).map_err(|e| RdfError::syntax(1, 1, format!("invalid base IRI: {e}")))?;
    Parser::new(text, Some(base)).parse()
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    base: Option<Url>,
    graph: Graph,
    namer: BlankNodeNamer,
}

type PResult<T> = Result<T, RdfError>;

impl Parser {
    fn new(text: &str, base: Option<Url>) -> Self {
        let text = text.strip_prefix('\u{feff}').unwrap_or(text);
        Parser {
            chars: text.chars().collect(),
            pos: 0,
            base,
            graph: Graph::new(),
            namer: BlankNodeNamer::default(),
        }
    }

    fn parse(mut self) -> PResult<Graph> {
        loop {
            self.skip_ws();
            if self.eof() {
                break;
            }
            self.statement()?;
        }
        Ok(self.graph)
    }

    // ---- position helpers ----

    fn eof(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn location(&self, pos: usize) -> (usize, usize) {
        let mut line = 1;
        let mut column = 1;
        for &c in &self.chars[..pos.min(self.chars.len())] {
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
        }
        (line, column)
    }

    fn error_at(&self, pos: usize, message: impl Into<String>) -> RdfError {
        let (line, column) = self.location(pos);
        RdfError::syntax(line, column, message)
    }

    fn error(&self, message: impl Into<String>) -> RdfError {
        self.error_at(self.pos, message)
    }

    fn unexpected(&self, expected: &str) -> RdfError {
        match self.peek() {
            Some(c) => self.error(format!("expected {expected}, found '{c}'")),
            None => self.error(format!("expected {expected}, found end of input")),
        }
    }

    fn expect(&mut self, c: char) -> PResult<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{c}'")))
        }
    }

    fn starts_with(&self, s: &str) -> bool {
        s.chars().enumerate().all(|(i, c)| self.peek_at(i) == Some(c))
    }

    fn starts_with_keyword_ci(&self, kw: &str) -> bool {
        let n = kw.chars().count();
        kw.chars()
            .enumerate()
            .all(|(i, c)| self.peek_at(i).is_some_and(|x| x.eq_ignore_ascii_case(&c)))
            && self.peek_at(n).is_some_and(char::is_whitespace)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += 1;
            } else if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    // ---- statements ----

    fn statement(&mut self) -> PResult<()> {
        if self.starts_with("@prefix") {
            self.pos += "@prefix".len();
            self.prefix_decl()?;
            self.skip_ws();
            return self.expect('.');
        }
        if self.starts_with("@base") {
            self.pos += "@base".len();
            self.base_decl()?;
            self.skip_ws();
            return self.expect('.');
        }
        if self.starts_with_keyword_ci("PREFIX") {
            self.pos += "PREFIX".len();
            return self.prefix_decl();
        }
        if self.starts_with_keyword_ci("BASE") {
            self.pos += "BASE".len();
            return self.base_decl();
        }
        self.triples()?;
        self.skip_ws();
        self.expect('.')
    }

    fn prefix_decl(&mut self) -> PResult<()> {
        self.skip_ws();
        let prefix = self.pn_prefix();
        self.expect(':')?;
        self.skip_ws();
        if self.peek() != Some('<') {
            return Err(self.unexpected("namespace IRI"));
        }
        let ns = self.iri_ref()?;
        self.graph.add_prefix(prefix, ns);
        Ok(())
    }

    fn base_decl(&mut self) -> PResult<()> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() != Some('<') {
            return Err(self.unexpected("base IRI"));
        }
        let iri = self.iri_ref()?;
        let url = Url::parse(&iri).map_err(|e| self.error_at(start, format!("invalid base IRI: {e}")))?;
        self.base = Some(url);
        Ok(())
    }

    fn triples(&mut self) -> PResult<()> {
        if self.peek() == Some('[') {
            let start = self.pos;
            let (subject, had_props) = self.blank_node_property_list()?;
            self.skip_ws();
            if self.peek() == Some('.') {
                if !had_props {
                    return Err(self.error_at(start, "'[]' subject without predicates"));
                }
                return Ok(());
            }
            return self.predicate_object_list(&subject);
        }
        let subject = self.subject()?;
        self.skip_ws();
        self.predicate_object_list(&subject)
    }

    fn subject(&mut self) -> PResult<Term> {
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iri_ref()?)),
            Some('_') if self.peek_at(1) == Some(':') => self.blank_node_label(),
            Some('(') => self.collection(),
            Some(_) => Ok(Term::Iri(self.prefixed_name()?)),
            None => Err(self.unexpected("subject")),
        }
    }

    fn predicate_object_list(&mut self, subject: &Term) -> PResult<()> {
        loop {
            let predicate = self.verb()?;
            self.skip_ws();
            self.object_list(subject, &predicate)?;
            self.skip_ws();
            let mut semicolons = 0;
            while self.peek() == Some(';') {
                self.pos += 1;
                semicolons += 1;
                self.skip_ws();
            }
            if semicolons == 0 {
                return Ok(());
            }
            match self.peek() {
                Some('.') | Some(']') | None => return Ok(()),
                _ => {}
            }
        }
    }

    fn verb(&mut self) -> PResult<Term> {
        if self.peek() == Some('a') && !self.peek_at(1).is_some_and(is_pn_chars_or_colon) {
            self.pos += 1;
            return Ok(Term::iri(vocab::RDF_TYPE));
        }
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iri_ref()?)),
            Some(c) if c == ':' || is_pn_chars_base(c) => Ok(Term::Iri(self.prefixed_name()?)),
            _ => Err(self.unexpected("predicate")),
        }
    }

    fn object_list(&mut self, subject: &Term, predicate: &Term) -> PResult<()> {
        loop {
            let object = self.object()?;
            self.emit(subject.clone(), predicate.clone(), object);
            self.skip_ws();
            if self.peek() == Some(',') {
                self.pos += 1;
                self.skip_ws();
            } else {
                return Ok(());
            }
        }
    }

    fn emit(&mut self, subject: Term, predicate: Term, object: Term) {
        self.graph.insert(Triple {
            subject,
            predicate,
            object,
        });
    }

    fn object(&mut self) -> PResult<Term> {
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iri_ref()?)),
            Some('_') if self.peek_at(1) == Some(':') => self.blank_node_label(),
            Some('[') => Ok(self.blank_node_property_list()?.0),
            Some('(') => self.collection(),
            Some('"') | Some('\'') => self.rdf_literal(),
            Some(c) if c.is_ascii_digit() || c == '+' || c == '-' || c == '.' => self.numeric_literal(),
            Some(_) if self.boolean_ahead("true") => {
                self.pos += 4;
                Ok(Term::Literal(Literal::typed("true", vocab::XSD_BOOLEAN)))
            }
            Some(_) if self.boolean_ahead("false") => {
                self.pos += 5;
                Ok(Term::Literal(Literal::typed("false", vocab::XSD_BOOLEAN)))
            }
            Some(c) if c == ':' || is_pn_chars_base(c) => Ok(Term::Iri(self.prefixed_name()?)),
            _ => Err(self.unexpected("object")),
        }
    }

    fn boolean_ahead(&self, word: &str) -> bool {
        self.starts_with(word)
            && !self
                .peek_at(word.len())
                .is_some_and(is_pn_chars_or_colon)
    }

    /// Returns the node and whether it carried any predicates.
    fn blank_node_property_list(&mut self) -> PResult<(Term, bool)> {
        self.expect('[')?;
        let node = self.namer.fresh();
        self.skip_ws();
        if self.peek() == Some(']') {
            self.pos += 1;
            return Ok((node, false));
        }
        self.predicate_object_list(&node)?;
        self.skip_ws();
        self.expect(']')?;
        Ok((node, true))
    }

    fn collection(&mut self) -> PResult<Term> {
        self.expect('(')?;
        let mut items = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(')') => {
                    self.pos += 1;
                    break;
                }
                None => return Err(self.unexpected("')'")),
                _ => items.push(self.object()?),
            }
        }
        if items.is_empty() {
            return Ok(Term::iri(vocab::RDF_NIL));
        }
        let nodes: Vec<Term> = items.iter().map(|_| self.namer.fresh()).collect();
        for (i, item) in items.into_iter().enumerate() {
            let rest = nodes
                .get(i + 1)
                .cloned()
                .unwrap_or_else(|| Term::iri(vocab::RDF_NIL));
            self.emit(nodes[i].clone(), Term::iri(vocab::RDF_FIRST), item);
            self.emit(nodes[i].clone(), Term::iri(vocab::RDF_REST), rest);
        }
        Ok(nodes[0].clone())
    }

    // ---- terminals ----

    fn iri_ref(&mut self) -> PResult<String> {
        let start = self.pos;
        self.expect('<')?;
        let mut raw = String::new();
        loop {
            match self.bump() {
                Some('>') => break,
                Some('\\') => {
                    let c = self.unicode_escape()?;
                    raw.push(c);
                }
                Some(c) if c == '<' || c == '"' || c == '{' || c == '}' || c == '|' || c == '^' || c == '`' || c <= ' ' => {
                    return Err(self.error_at(self.pos - 1, format!("invalid character {c:?} in IRI")));
                }
                Some(c) => raw.push(c),
                None => return Err(self.error_at(start, "unterminated IRI")),
            }
        }
        self.resolve(&raw, start)
    }

    fn resolve(&self, raw: &str, start: usize) -> PResult<String> {
        if has_scheme(raw) {
            return Ok(raw.to_string());
        }
        match &self.base {
            Some(base) => base
                .join(raw)
                .map(String::from)
                .map_err(|e| self.error_at(start, format!("cannot resolve <{raw}>: {e}"))),
            None => Err(self.error_at(start, format!("relative IRI <{raw}> with no base"))),
        }
    }

    fn unicode_escape(&mut self) -> PResult<char> {
        let start = self.pos - 1;
        let len = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(self.error_at(start, "invalid escape in IRI")),
        };
        self.hex_char(len, start)
    }

    fn hex_char(&mut self, len: usize, start: usize) -> PResult<char> {
        let mut code = 0u32;
        for _ in 0..len {
            let d = self
                .bump()
                .and_then(|c| c.to_digit(16))
                .ok_or_else(|| self.error_at(start, "invalid unicode escape"))?;
            code = code * 16 + d;
        }
        char::from_u32(code).ok_or_else(|| self.error_at(start, "escape is not a valid code point"))
    }

    fn pn_prefix(&mut self) -> String {
        let mut out = String::new();
        if !self.peek().is_some_and(is_pn_chars_base) {
            return out;
        }
        while let Some(c) = self.peek() {
            if is_pn_chars(c) || (c == '.' && self.peek_at(1).is_some_and(|n| is_pn_chars(n) || n == '.')) {
                out.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        out
    }

    fn prefixed_name(&mut self) -> PResult<String> {
        let start = self.pos;
        let prefix = self.pn_prefix();
        if self.peek() != Some(':') {
            return Err(self.error_at(start, "expected IRI or prefixed name"));
        }
        self.pos += 1;
        let local = self.pn_local()?;
        match self.graph.prefixes().get(&prefix) {
            Some(ns) => Ok(format!("{ns}{local}")),
            None => {
                let (line, column) = self.location(start);
                Err(RdfError::UnresolvedPrefix {
                    prefix,
                    line,
                    column,
                })
            }
        }
    }

    fn pn_local(&mut self) -> PResult<String> {
        let mut out = String::new();
        let mut first = true;
        while let Some(c) = self.peek() {
            let ok_plain = if first {
                is_pn_chars_u(c) || c == ':' || c.is_ascii_digit()
            } else {
                is_pn_chars(c) || c == ':'
            };
            if ok_plain || (c == '.' && !first && self.local_continues_after_dot()) {
                out.push(c);
                self.pos += 1;
            } else if c == '%' {
                let hex: Option<(char, char)> = self.peek_at(1).zip(self.peek_at(2));
                match hex {
                    Some((a, b)) if a.is_ascii_hexdigit() && b.is_ascii_hexdigit() => {
                        out.push('%');
                        out.push(a);
                        out.push(b);
                        self.pos += 3;
                    }
                    _ => return Err(self.error("invalid percent escape in local name")),
                }
            } else if c == '\\' {
                match self.peek_at(1) {
                    Some(e) if "_~.-!$&'()*+,;=/?#@%".contains(e) => {
                        out.push(e);
                        self.pos += 2;
                    }
                    _ => return Err(self.error("invalid escape in local name")),
                }
            } else {
                break;
            }
            first = false;
        }
        Ok(out)
    }

    fn local_continues_after_dot(&self) -> bool {
        let mut i = 1;
        while self.peek_at(i) == Some('.') {
            i += 1;
        }
        self.peek_at(i)
            .is_some_and(|c| is_pn_chars(c) || c == ':' || c == '%' || c == '\\')
    }

    fn blank_node_label(&mut self) -> PResult<Term> {
        let start = self.pos;
        self.pos += 2;
        let mut label = String::new();
        match self.peek() {
            Some(c) if is_pn_chars_u(c) || c.is_ascii_digit() => {}
            _ => return Err(self.error_at(start, "empty blank node label")),
        }
        while let Some(c) = self.peek() {
            if is_pn_chars(c) || (c == '.' && self.peek_at(1).is_some_and(|n| is_pn_chars(n) || n == '.')) {
                label.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(self.namer.named(&label))
    }

    fn rdf_literal(&mut self) -> PResult<Term> {
        let lexical = self.string()?;
        if self.peek() == Some('@') {
            self.pos += 1;
            let start = self.pos;
            let mut tag = String::new();
            while let Some(c) = self.peek() {
                if c.is_ascii_alphanumeric() || c == '-' {
                    tag.push(c);
                    self.pos += 1;
                } else {
                    break;
                }
            }
            if tag.is_empty() || !tag.starts_with(|c: char| c.is_ascii_alphabetic()) {
                return Err(self.error_at(start, "invalid language tag"));
            }
            return Ok(Term::Literal(Literal::lang(lexical, tag)));
        }
        if self.starts_with("^^") {
            self.pos += 2;
            let datatype = if self.peek() == Some('<') {
                self.iri_ref()?
            } else {
                self.prefixed_name()?
            };
            return Ok(Term::Literal(Literal::typed(lexical, datatype)));
        }
        Ok(Term::Literal(Literal::simple(lexical)))
    }

    fn string(&mut self) -> PResult<String> {
        let start = self.pos;
        let quote = self.bump().expect("caller checked quote");
        let long = self.peek() == Some(quote) && self.peek_at(1) == Some(quote);
        if long {
            self.pos += 2;
        }
        let mut out = String::new();
        loop {
            let Some(c) = self.bump() else {
                return Err(self.error_at(start, "unterminated string literal"));
            };
            if c == quote {
                if !long {
                    return Ok(out);
                }
                if self.peek() == Some(quote) && self.peek_at(1) == Some(quote) {
                    // A long string may end with up to two extra quotes before the closer.
                    if self.peek_at(2) == Some(quote) {
                        out.push(c);
                        continue;
                    }
                    self.pos += 2;
                    return Ok(out);
                }
                out.push(c);
            } else if c == '\\' {
                let esc_start = self.pos - 1;
                let e = self
                    .bump()
                    .ok_or_else(|| self.error_at(esc_start, "unterminated escape"))?;
                match e {
                    't' => out.push('\t'),
                    'b' => out.push('\u{8}'),
                    'n' => out.push('\n'),
                    'r' => out.push('\r'),
                    'f' => out.push('\u{c}'),
                    '"' => out.push('"'),
                    '\'' => out.push('\''),
                    '\\' => out.push('\\'),
                    'u' => out.push(self.hex_char(4, esc_start)?),
                    'U' => out.push(self.hex_char(8, esc_start)?),
                    other => return Err(self.error_at(esc_start, format!("invalid escape '\\{other}'"))),
                }
            } else if !long && (c == '\n' || c == '\r') {
                return Err(self.error_at(self.pos - 1, "newline in short string literal"));
            } else {
                out.push(c);
            }
        }
    }

    fn numeric_literal(&mut self) -> PResult<Term> {
        let start = self.pos;
        let mut text = String::new();
        if let Some(c @ ('+' | '-')) = self.peek() {
            text.push(c);
            self.pos += 1;
        }
        let int_digits = self.digits(&mut text);
        let mut datatype = vocab::XSD_INTEGER;
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            text.push('.');
            self.pos += 1;
            self.digits(&mut text);
            datatype = vocab::XSD_DECIMAL;
        } else if int_digits == 0 {
            return Err(self.error_at(start, "malformed numeric literal"));
        }
        if let Some(e @ ('e' | 'E')) = self.peek() {
            let save = self.pos;
            let mut exp = String::from(e);
            self.pos += 1;
            if let Some(s @ ('+' | '-')) = self.peek() {
                exp.push(s);
                self.pos += 1;
            }
            if self.digits(&mut exp) == 0 {
                self.pos = save;
                return Err(self.error_at(start, "malformed exponent"));
            }
            text.push_str(&exp);
            datatype = vocab::XSD_DOUBLE;
        }
        Ok(Term::Literal(Literal::typed(text, datatype)))
    }

    fn digits(&mut self, out: &mut String) -> usize {
        let mut n = 0;
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            out.push(c);
            self.pos += 1;
            n += 1;
        }
        n
    }
}

fn has_scheme(iri: &str) -> bool {
    let mut chars = iri.chars();
    if !chars.next().is_some_and(|c| c.is_ascii_alphabetic()) {
        return false;
    }
    for c in chars {
        if c == ':' {
            return true;
        }
        if !(c.is_ascii_alphanumeric() || c == '+' || c == '-' || c == '.') {
            return false;
        }
    }
    false
}

fn is_pn_chars_base(c: char) -> bool {
    c.is_ascii_alphabetic()
        || matches!(c as u32,
            0xC0..=0xD6 | 0xD8..=0xF6 | 0xF8..=0x2FF | 0x370..=0x37D | 0x37F..=0x1FFF
            | 0x200C..=0x200D | 0x2070..=0x218F | 0x2C00..=0x2FEF | 0x3001..=0xD7FF
            | 0xF900..=0xFDCF | 0xFDF0..=0xFFFD | 0x10000..=0xEFFFF)
}

fn is_pn_chars_u(c: char) -> bool {
    is_pn_chars_base(c) || c == '_'
}

fn is_pn_chars(c: char) -> bool {
    is_pn_chars_u(c)
        || c == '-'
        || c.is_ascii_digit()
        || matches!(c as u32, 0xB7 | 0x300..=0x36F | 0x203F..=0x2040)
}

fn is_pn_chars_or_colon(c: char) -> bool {
    is_pn_chars(c) || c == ':'
}
