//! Recursive-descent parser for queries, patterns and expressions.
//!
//! Keywords are case-insensitive; names, labels, types and keys are
//! case-sensitive. Expression operators bind, tightest first:
//!
//! 1. property access, indexing, slicing
//! 2. comparisons `<  <=  >=  >  =  <>` (left-associative)
//! 3. `IS NULL`, `IS NOT NULL`
//! 4. `STARTS WITH`, `ENDS WITH`, `CONTAINS`, `IN`
//! 5. `NOT`
//! 6. `AND`
//! 7. `XOR`
//! 8. `OR`
//!
//! Parentheses group. Numeric literals are integers only; a `-` directly in
//! front of an integer literal makes it negative.

mod lexer;

use std::fmt;

use thiserror::Error;

use crate::ast::*;
use lexer::{tokenize, Tok, Token};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub message: String,
    pub span: Span,
    pub expected: String,
}

impl ParseError {
    pub(crate) fn new(message: impl Into<String>, span: Span, expected: impl Into<String>) -> Self {
        ParseError {
            message: message.into(),
            span,
            expected: expected.into(),
        }
    }

    /// `line:column` (1-based) of the error start.
    pub fn line_col(&self, src: &str) -> (usize, usize) {
        let upto = &src[..self.span.start.min(src.len())];
        let line = upto.matches('\n').count() + 1;
        let col = upto.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        (line, col)
    }

    /// Multi-line diagnostic with a caret under the offending text.
    pub fn render(&self, src: &str) -> String {
        let (line, col) = self.line_col(src);
        let text = src.lines().nth(line - 1).unwrap_or("");
        let width = src[self.span.start.min(src.len())..self.span.end.min(src.len())]
            .chars()
            .count()
            .max(1);
        format!(
            "parse error at {line}:{col}: {} (expected {})\n  {text}\n  {}{}",
            self.message,
            self.expected,
            " ".repeat(col - 1),
            "^".repeat(width)
        )
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at byte {} (expected {})",
            self.message, self.span.start, self.expected
        )
    }
}

pub fn parse_query(text: &str) -> Result<Query, ParseError> {
    let mut p = Parser::new(text)?;
    let q = p.query()?;
    p.expect_eof()?;
    Ok(q)
}

pub fn parse_pattern(text: &str) -> Result<PathPattern, ParseError> {
    let mut p = Parser::new(text)?;
    let pat = p.path_pattern()?;
    p.expect_eof()?;
    Ok(pat)
}

pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(text: &str) -> PResult<Parser> {
        Ok(Parser {
            tokens: tokenize(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        Err(ParseError::new(
            format!("unexpected {}", self.peek().describe()),
            self.span(),
            expected,
        ))
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> PResult<Span> {
        if *self.peek() == tok {
            Ok(self.bump().span)
        } else {
            self.error(expected)
        }
    }

    fn expect_eof(&mut self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.error("end of input")
        }
    }

    fn at_kw(&self, kw: &str) -> bool {
        is_kw(self.peek(), kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<Span> {
        if self.at_kw(kw) {
            Ok(self.bump().span)
        } else {
            self.error(kw)
        }
    }

    /// A variable name: an identifier that is not a keyword, or a quoted name.
    fn name(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !display_is_keyword(&s) => {
                self.bump();
                Ok(s)
            }
            Tok::Quoted(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.error("a name"),
        }
    }

    fn at_name(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => !display_is_keyword(s),
            Tok::Quoted(_) => true,
            _ => false,
        }
    }

    /// A label, type or property key; keywords are allowed here.
    fn symbol(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) | Tok::Quoted(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.error("a label, type or key"),
        }
    }

    // ---- queries and clauses ----

    fn query(&mut self) -> PResult<Query> {
        let mut q = self.single_query()?;
        while self.eat_kw("UNION") {
            let all = self.eat_kw("ALL");
            let right = self.single_query()?;
            q = Query::Union {
                left: Box::new(q),
                right: Box::new(right),
                all,
            };
        }
        Ok(q)
    }

    fn single_query(&mut self) -> PResult<Query> {
        let mut clauses = Vec::new();
        loop {
            if self.eat_kw("RETURN") {
                let ret = self.projection(false)?;
                return Ok(Query::Single { clauses, ret });
            }
            clauses.push(self.clause()?);
        }
    }

    fn clause(&mut self) -> PResult<Clause> {
        if self.at_kw("OPTIONAL") || self.at_kw("MATCH") {
            let optional = self.eat_kw("OPTIONAL");
            self.expect_kw("MATCH")?;
            let pattern = self.pattern_tuple()?;
            let filter = self.where_opt()?;
            Ok(Clause::Match {
                optional,
                pattern,
                filter,
            })
        } else if self.eat_kw("WITH") {
            let projection = self.projection(true)?;
            let filter = self.where_opt()?;
            Ok(Clause::With { projection, filter })
        } else if self.eat_kw("UNWIND") {
            let expr = self.expr()?;
            self.expect_kw("AS")?;
            let alias = self.name()?;
            Ok(Clause::Unwind { expr, alias })
        } else {
            self.error("MATCH, OPTIONAL MATCH, WITH, UNWIND or RETURN")
        }
    }

    fn where_opt(&mut self) -> PResult<Option<Expr>> {
        if self.eat_kw("WHERE") {
            Ok(Some(self.expr()?))
        } else {
            Ok(None)
        }
    }

    fn projection(&mut self, is_with: bool) -> PResult<Projection> {
        let star = self.eat(&Tok::Star);
        let mut items = Vec::new();
        if star && !self.eat(&Tok::Comma) {
            return Ok(Projection { star, items });
        }
        loop {
            let expr = self.expr()?;
            let alias = if self.eat_kw("AS") {
                Some(self.name()?)
            } else {
                None
            };
            if is_with && alias.is_none() && expr.as_var().is_none() {
                return Err(ParseError::new(
                    "WITH item must be a name or carry an alias",
                    expr.span,
                    "AS <name>",
                ));
            }
            items.push(ProjectionItem { expr, alias });
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(Projection { star, items })
    }

    // ---- patterns ----

    fn pattern_tuple(&mut self) -> PResult<PatternTuple> {
        let mut pats = vec![self.path_pattern()?];
        while self.eat(&Tok::Comma) {
            pats.push(self.path_pattern()?);
        }
        Ok(PatternTuple(pats))
    }

    fn path_pattern(&mut self) -> PResult<PathPattern> {
        let start_span = self.span();
        let name = if self.at_name() && *self.peek_at(1) == Tok::Eq {
            let n = self.name()?;
            self.bump();
            Some(n)
        } else {
            None
        };
        let start = self.node_pattern()?;
        let mut steps = Vec::new();
        while matches!(self.peek(), Tok::Dash | Tok::LeftArrow | Tok::Arrow) {
            let rel = self.rel_pattern()?;
            let node = self.node_pattern()?;
            steps.push((rel, node));
        }
        Ok(PathPattern {
            name,
            start,
            steps,
            span: start_span.to(self.prev_span()),
        })
    }

    fn node_pattern(&mut self) -> PResult<NodePattern> {
        let open = self.expect(Tok::LParen, "`(` starting a node pattern")?;
        let name = if self.at_name() {
            Some(self.name()?)
        } else {
            None
        };
        let mut labels = Vec::new();
        while self.eat(&Tok::Colon) {
            let l = self.symbol()?;
            if !labels.contains(&l) {
                labels.push(l);
            }
        }
        let props = if *self.peek() == Tok::LBrace {
            self.pattern_props()?
        } else {
            Vec::new()
        };
        let close = self.expect(Tok::RParen, "`)` closing the node pattern")?;
        Ok(NodePattern {
            name,
            labels,
            props,
            span: open.to(close),
        })
    }

    fn rel_pattern(&mut self) -> PResult<RelPattern> {
        let start = self.span();
        let left_arrow = match self.bump().tok {
            Tok::LeftArrow => true,
            Tok::Dash => false,
            // `-->` lexes as Dash Arrow; a bare `->` here has no leading dash
            _ => {
                self.pos -= 1;
                return self.error("`-` or `<-` starting a relationship pattern");
            }
        };
        let mut rel = RelPattern::new(Direction::Both);
        // `--`, `-->`, `<--` abbreviate an empty bracket
        if self.eat(&Tok::LBracket) {
            if self.at_name() {
                rel.name = Some(self.name()?);
            }
            if self.eat(&Tok::Colon) {
                loop {
                    let t = self.symbol()?;
                    if !rel.types.contains(&t) {
                        rel.types.push(t);
                    }
                    if !self.eat(&Tok::Pipe) {
                        break;
                    }
                    self.eat(&Tok::Colon);
                }
            }
            if self.eat(&Tok::Star) {
                rel.length = Some(self.length()?);
            }
            if *self.peek() == Tok::LBrace {
                rel.props = self.pattern_props()?;
            }
            self.expect(Tok::RBracket, "`]` closing the relationship pattern")?;
        }
        let right_arrow = match self.peek() {
            Tok::Arrow => true,
            Tok::Dash => false,
            _ => return self.error("`-` or `->` ending the relationship pattern"),
        };
        self.bump();
        rel.direction = match (left_arrow, right_arrow) {
            (false, true) => Direction::Outgoing,
            (true, false) => Direction::Incoming,
            (false, false) => Direction::Both,
            (true, true) => {
                return Err(ParseError::new(
                    "relationship pattern cannot point both ways",
                    start.to(self.prev_span()),
                    "at most one arrow head",
                ))
            }
        };
        rel.span = start.to(self.prev_span());
        Ok(rel)
    }

    fn length(&mut self) -> PResult<Length> {
        let min = self.opt_nat()?;
        if self.eat(&Tok::DotDot) {
            let max = self.opt_nat()?;
            Ok(Length { min, max })
        } else if min.is_some() {
            Ok(Length { min, max: min })
        } else {
            Ok(Length {
                min: None,
                max: None,
            })
        }
    }

    fn opt_nat(&mut self) -> PResult<Option<u64>> {
        if let Tok::Int(digits) = self.peek().clone() {
            let span = self.bump().span;
            digits
                .parse::<u64>()
                .map(Some)
                .map_err(|_| ParseError::new("hop bound out of range", span, "a small integer"))
        } else {
            Ok(None)
        }
    }

    fn pattern_props(&mut self) -> PResult<Vec<(String, Expr)>> {
        let open = self.span();
        let props = self.map_entries()?;
        for (i, (k, _)) in props.iter().enumerate() {
            if props[..i].iter().any(|(k2, _)| k2 == k) {
                return Err(ParseError::new(
                    format!("duplicate key `{k}` in pattern properties"),
                    open.to(self.prev_span()),
                    "distinct keys",
                ));
            }
        }
        Ok(props)
    }

    fn map_entries(&mut self) -> PResult<Vec<(String, Expr)>> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut entries = Vec::new();
        if self.eat(&Tok::RBrace) {
            return Ok(entries);
        }
        loop {
            let k = self.symbol()?;
            self.expect(Tok::Colon, "`:` after map key")?;
            let e = self.expr()?;
            entries.push((k, e));
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RBrace, "`,` or `}`")?;
        Ok(entries)
    }

    // ---- expressions ----

    fn expr(&mut self) -> PResult<Expr> {
        self.or_expr()
    }

    fn logic_level(
        &mut self,
        kw: &str,
        op: LogicOp,
        next: fn(&mut Parser) -> PResult<Expr>,
    ) -> PResult<Expr> {
        let mut e = next(self)?;
        while self.eat_kw(kw) {
            let rhs = next(self)?;
            let span = e.span.to(rhs.span);
            e = Expr::new(ExprKind::Logic(op, Box::new(e), Box::new(rhs)), span);
        }
        Ok(e)
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        self.logic_level("OR", LogicOp::Or, Parser::xor_expr)
    }

    fn xor_expr(&mut self) -> PResult<Expr> {
        self.logic_level("XOR", LogicOp::Xor, Parser::and_expr)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        self.logic_level("AND", LogicOp::And, Parser::not_expr)
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if self.at_kw("NOT") {
            let start = self.bump().span;
            let e = self.not_expr()?;
            let span = start.to(e.span);
            return Ok(Expr::new(ExprKind::Not(Box::new(e)), span));
        }
        self.string_expr()
    }

    fn string_expr(&mut self) -> PResult<Expr> {
        let mut e = self.null_check_expr()?;
        loop {
            let op = if self.at_kw("STARTS") && is_kw(self.peek_at(1), "WITH") {
                self.bump();
                self.bump();
                Some(StrOp::StartsWith)
            } else if self.at_kw("ENDS") && is_kw(self.peek_at(1), "WITH") {
                self.bump();
                self.bump();
                Some(StrOp::EndsWith)
            } else if self.eat_kw("CONTAINS") {
                Some(StrOp::Contains)
            } else if self.eat_kw("IN") {
                None
            } else {
                break;
            };
            let rhs = self.null_check_expr()?;
            let span = e.span.to(rhs.span);
            let kind = match op {
                Some(op) => ExprKind::Str(op, Box::new(e), Box::new(rhs)),
                None => ExprKind::In(Box::new(e), Box::new(rhs)),
            };
            e = Expr::new(kind, span);
        }
        Ok(e)
    }

    fn null_check_expr(&mut self) -> PResult<Expr> {
        let mut e = self.comparison()?;
        while self.eat_kw("IS") {
            let negated = self.eat_kw("NOT");
            let end = self.expect_kw("NULL")?;
            let span = e.span.to(end);
            e = Expr::new(
                ExprKind::IsNull {
                    expr: Box::new(e),
                    negated,
                },
                span,
            );
        }
        Ok(e)
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let mut e = self.postfix()?;
        loop {
            let op = match self.peek() {
                Tok::Lt => CmpOp::Lt,
                Tok::Le => CmpOp::Le,
                Tok::Ge => CmpOp::Ge,
                Tok::Gt => CmpOp::Gt,
                Tok::Eq => CmpOp::Eq,
                Tok::Ne => CmpOp::Ne,
                _ => break,
            };
            self.bump();
            let rhs = self.postfix()?;
            let span = e.span.to(rhs.span);
            e = Expr::new(ExprKind::Cmp(op, Box::new(e), Box::new(rhs)), span);
        }
        Ok(e)
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.atom()?;
        loop {
            if self.eat(&Tok::Dot) {
                let k = self.symbol()?;
                let span = e.span.to(self.prev_span());
                e = Expr::new(ExprKind::Prop(Box::new(e), k), span);
            } else if self.eat(&Tok::LBracket) {
                let kind = if self.eat(&Tok::DotDot) {
                    let to = self.expr()?;
                    ExprKind::Slice {
                        list: Box::new(e),
                        from: None,
                        to: Some(Box::new(to)),
                    }
                } else {
                    let first = self.expr()?;
                    if self.eat(&Tok::DotDot) {
                        let to = if *self.peek() == Tok::RBracket {
                            None
                        } else {
                            Some(Box::new(self.expr()?))
                        };
                        ExprKind::Slice {
                            list: Box::new(e),
                            from: Some(Box::new(first)),
                            to,
                        }
                    } else {
                        ExprKind::Index(Box::new(e), Box::new(first))
                    }
                };
                let end = self.expect(Tok::RBracket, "`]`")?;
                let span = match &kind {
                    ExprKind::Slice { list, .. } | ExprKind::Index(list, _) => list.span.to(end),
                    _ => end,
                };
                e = Expr::new(kind, span);
            } else {
                break;
            }
        }
        Ok(e)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Int(digits) => {
                self.bump();
                let i = digits.parse::<i64>().map_err(|_| {
                    ParseError::new("integer literal out of range", start, "a 64-bit integer")
                })?;
                Ok(Expr::new(ExprKind::Literal(Literal::Int(i)), start))
            }
            Tok::Dash => {
                self.bump();
                let Tok::Int(digits) = self.peek().clone() else {
                    return self.error("an integer after `-`");
                };
                let span = start.to(self.bump().span);
                let i = format!("-{digits}").parse::<i64>().map_err(|_| {
                    ParseError::new("integer literal out of range", span, "a 64-bit integer")
                })?;
                Ok(Expr::new(ExprKind::Literal(Literal::Int(i)), span))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::new(ExprKind::Literal(Literal::Str(s)), start))
            }
            Tok::Ident(word) if display_is_keyword(&word) => {
                let lit = if word.eq_ignore_ascii_case("true") {
                    Literal::Bool(true)
                } else if word.eq_ignore_ascii_case("false") {
                    Literal::Bool(false)
                } else if word.eq_ignore_ascii_case("null") {
                    Literal::Null
                } else {
                    return self.error("an expression");
                };
                self.bump();
                Ok(Expr::new(ExprKind::Literal(lit), start))
            }
            Tok::Ident(word) if *self.peek_at(1) == Tok::LParen => {
                self.bump();
                self.bump();
                let mut args = Vec::new();
                if !self.eat(&Tok::RParen) {
                    loop {
                        args.push(self.expr()?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(Tok::RParen, "`,` or `)`")?;
                }
                Ok(Expr::new(
                    ExprKind::Call(word, args),
                    start.to(self.prev_span()),
                ))
            }
            Tok::Ident(_) | Tok::Quoted(_) => {
                let name = self.name()?;
                Ok(Expr::new(ExprKind::Var(name), start))
            }
            Tok::LBrace => {
                let entries = self.map_entries()?;
                Ok(Expr::new(
                    ExprKind::Map(entries),
                    start.to(self.prev_span()),
                ))
            }
            Tok::LBracket => {
                self.bump();
                let mut items = Vec::new();
                if !self.eat(&Tok::RBracket) {
                    loop {
                        items.push(self.expr()?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(Tok::RBracket, "`,` or `]`")?;
                }
                Ok(Expr::new(ExprKind::List(items), start.to(self.prev_span())))
            }
            Tok::LParen => {
                self.bump();
                let mut e = self.expr()?;
                let end = self.expect(Tok::RParen, "`)`")?;
                e.span = start.to(end);
                Ok(e)
            }
            _ => self.error("an expression"),
        }
    }
}

fn is_kw(tok: &Tok, kw: &str) -> bool {
    matches!(tok, Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
}

fn display_is_keyword(word: &str) -> bool {
    crate::ast::is_keyword(word)
}
