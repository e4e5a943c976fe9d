use super::{BlankNodeNamer, Graph, Literal, RdfError, Term, Triple};

/// Parses an N-Triples document. IRIs are taken verbatim from the angle
/// brackets; blank nodes are relabelled in document order.
pub fn parse_ntriples(text: &str) -> Result<Graph, RdfError> {
    let mut graph = Graph::new();
    let mut namer = BlankNodeNamer::default();
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    for (idx, line) in text.lines().enumerate() {
        let mut cursor = LineCursor {
            chars: line.chars().collect(),
            pos: 0,
            line: idx + 1,
        };
        cursor.skip_ws();
        if cursor.at_end_or_comment() {
            continue;
        }
        let subject = cursor.term(&mut namer)?;
        cursor.skip_ws();
        let predicate = cursor.term(&mut namer)?;
        cursor.skip_ws();
        let object = cursor.term(&mut namer)?;
        cursor.skip_ws();
        if cursor.peek() != Some('.') {
            return Err(cursor.error("expected '.' at end of statement"));
        }
        cursor.pos += 1;
        cursor.skip_ws();
        if !cursor.at_end_or_comment() {
            return Err(cursor.error("trailing content after statement"));
        }
        let triple = Triple::new(subject, predicate, object)
            .ok_or_else(|| cursor.error_at(0, "literal subject or non-IRI predicate"))?;
        graph.insert(triple);
    }
    Ok(graph)
}

struct LineCursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl LineCursor {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        self.pos += usize::from(c.is_some());
        c
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t' | '\r')) {
            self.pos += 1;
        }
    }

    fn at_end_or_comment(&self) -> bool {
        matches!(self.peek(), None | Some('#'))
    }

    fn error(&self, message: &str) -> RdfError {
        self.error_at(self.pos, message)
    }

    fn error_at(&self, pos: usize, message: &str) -> RdfError {
        RdfError::syntax(self.line, pos + 1, message)
    }

    fn term(&mut self, namer: &mut BlankNodeNamer) -> Result<Term, RdfError> {
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iri()?)),
            Some('_') => {
                self.pos += 1;
                if self.bump() != Some(':') {
                    return Err(self.error("expected ':' in blank node label"));
                }
                let start = self.pos;
                while self
                    .peek()
                    .is_some_and(|c| !c.is_whitespace() && c != '.' || (c == '.' && self.more_label_after_dot()))
                {
                    self.pos += 1;
                }
                if self.pos == start {
                    return Err(self.error("empty blank node label"));
                }
                let label: String = self.chars[start..self.pos].iter().collect();
                Ok(namer.named(&label))
            }
            Some('"') => self.literal(),
            _ => Err(self.error("expected IRI, blank node or literal")),
        }
    }

    fn more_label_after_dot(&self) -> bool {
        self.chars
            .get(self.pos + 1)
            .is_some_and(|c| !c.is_whitespace() && *c != '#')
    }

    fn iri(&mut self) -> Result<String, RdfError> {
        let start = self.pos;
        self.pos += 1;
        let mut out = String::new();
        loop {
            match self.bump() {
                Some('>') => break,
                Some('\\') => out.push(self.uchar()?),
                Some(c) if c == ' ' || c == '<' || c == '"' => {
                    return Err(self.error_at(self.pos - 1, "invalid character in IRI"));
                }
                Some(c) => out.push(c),
                None => return Err(self.error_at(start, "unterminated IRI")),
            }
        }
        if !out.contains(':') {
            return Err(self.error_at(start, "relative IRI in N-Triples"));
        }
        Ok(out)
    }

    fn uchar(&mut self) -> Result<char, RdfError> {
        let len = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(self.error("invalid escape")),
        };
        let mut code = 0u32;
        for _ in 0..len {
            let d = self
                .bump()
                .and_then(|c| c.to_digit(16))
                .ok_or_else(|| self.error("invalid unicode escape"))?;
            code = code * 16 + d;
        }
        char::from_u32(code).ok_or_else(|| self.error("escape is not a valid code point"))
    }

    fn literal(&mut self) -> Result<Term, RdfError> {
        let start = self.pos;
        self.pos += 1;
        let mut lexical = String::new();
        loop {
            match self.bump() {
                Some('"') => break,
                Some('\\') => match self.peek() {
                    Some('u' | 'U') => lexical.push(self.uchar()?),
                    Some(e) => {
                        self.pos += 1;
                        lexical.push(match e {
                            't' => '\t',
                            'b' => '\u{8}',
                            'n' => '\n',
                            'r' => '\r',
                            'f' => '\u{c}',
                            '"' => '"',
                            '\'' => '\'',
                            '\\' => '\\',
                            _ => return Err(self.error("invalid string escape")),
                        });
                    }
                    None => return Err(self.error("unterminated escape")),
                },
                Some(c) => lexical.push(c),
                None => return Err(self.error_at(start, "unterminated literal")),
            }
        }
        match self.peek() {
            Some('@') => {
                self.pos += 1;
                let tag_start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '-') {
                    self.pos += 1;
                }
                if self.pos == tag_start {
                    return Err(self.error("empty language tag"));
                }
                let tag: String = self.chars[tag_start..self.pos].iter().collect();
                Ok(Term::Literal(Literal::lang(lexical, tag)))
            }
            Some('^') => {
                self.pos += 1;
                if self.bump() != Some('^') || self.peek() != Some('<') {
                    return Err(self.error("expected ^^<datatype>"));
                }
                let dt = self.iri()?;
                Ok(Term::Literal(Literal::typed(lexical, dt)))
            }
            _ => Ok(Term::Literal(Literal::simple(lexical))),
        }
    }
}
