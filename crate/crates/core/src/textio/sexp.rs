use std::fmt;

/// Byte range plus the line/column (1-based) of its start.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SExp {
    Atom(String, SourceSpan),
    List(Vec<SExp>, SourceSpan),
}

impl SExp {
    pub fn span(&self) -> SourceSpan {
        match self {
            SExp::Atom(_, s) | SExp::List(_, s) => *s,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UnknownForm,
    Arity,
    UndeclaredVariable,
    Shape,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{span}: error: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: SourceSpan,
    pub message: String,
}

impl ParseError {
    pub fn new(kind: ParseErrorKind, span: SourceSpan, message: impl Into<String>) -> Self {
        Self {
            kind,
            span,
            message: message.into(),
        }
    }

    /// `file:line:col: error: message`.
    pub fn diagnostic(&self, file: &str) -> String {
        format!("{file}:{}:{}: error: {}", self.span.line, self.span.col, self.message)
    }
}

struct Reader<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Reader<'a> {
    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn here(&self) -> SourceSpan {
        SourceSpan {
            start: self.pos,
            end: self.pos,
            line: self.line,
            col: self.col,
        }
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c == ';' {
                while !matches!(self.bump(), None | Some('\n')) {}
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<SExp, ParseError> {
        let mut span = self.here();
        match self.bump() {
            Some('(') => {
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.peek() {
                        None => {
                            span.end = self.pos;
                            return Err(ParseError::new(ParseErrorKind::Syntax, span, "unclosed form"));
                        }
                        Some(')') => {
                            self.bump();
                            span.end = self.pos;
                            return Ok(SExp::List(items, span));
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
            }
            Some(')') => {
                span.end = self.pos;
                Err(ParseError::new(ParseErrorKind::Syntax, span, "unexpected `)`"))
            }
            Some(_) => {
                while let Some(c) = self.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    self.bump();
                }
                span.end = self.pos;
                Ok(SExp::Atom(self.text[span.start..span.end].to_string(), span))
            }
            None => unreachable!("caller checks for input"),
        }
    }
}

/// Reads every top-level s-expression in `text`.
pub fn read_all(text: &str) -> Result<Vec<SExp>, ParseError> {
    let mut r = Reader {
        text,
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        r.skip_trivia();
        if r.peek().is_none() {
            return Ok(out);
        }
        out.push(r.read()?);
    }
}
