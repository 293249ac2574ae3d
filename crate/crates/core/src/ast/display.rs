//! Canonical unparsing. The output re-parses to an equal AST, with
//! parentheses only where precedence requires them.

use std::fmt::{self, Display, Formatter, Write};

use super::*;

const KEYWORDS: &[&str] = &[
    "ALL", "AND", "AS", "CONTAINS", "ENDS", "FALSE", "IN", "IS", "MATCH", "NOT", "NULL",
    "OPTIONAL", "OR", "RETURN", "STARTS", "TRUE", "UNION", "UNWIND", "WHERE", "WITH", "XOR",
];

pub(crate) fn is_keyword(word: &str) -> bool {
    KEYWORDS.iter().any(|k| k.eq_ignore_ascii_case(word))
}

fn is_plain_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A name as it must be written in a variable position.
pub fn quote_name(name: &str) -> String {
    if is_plain_identifier(name) && !is_keyword(name) {
        name.to_string()
    } else {
        quote_symbol(name)
    }
}

/// A key, label or type; keywords are allowed unquoted in these positions.
pub fn quote_symbolic(name: &str) -> String {
    if is_plain_identifier(name) {
        name.to_string()
    } else {
        quote_symbol(name)
    }
}

fn quote_symbol(name: &str) -> String {
    format!("`{}`", name.replace('`', "``"))
}

pub fn quote_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

// Binding strength, loosest first.
const OR: u8 = 1;
const XOR: u8 = 2;
const AND: u8 = 3;
const NOT: u8 = 4;
const STR_IN: u8 = 5;
const IS_NULL: u8 = 6;
const CMP: u8 = 7;
const POSTFIX: u8 = 8;
const ATOM: u8 = 9;

impl ExprKind {
    fn level(&self) -> u8 {
        match self {
            ExprKind::Logic(LogicOp::Or, ..) => OR,
            ExprKind::Logic(LogicOp::Xor, ..) => XOR,
            ExprKind::Logic(LogicOp::And, ..) => AND,
            ExprKind::Not(_) => NOT,
            ExprKind::Str(..) | ExprKind::In(..) => STR_IN,
            ExprKind::IsNull { .. } => IS_NULL,
            ExprKind::Cmp(..) => CMP,
            ExprKind::Prop(..) | ExprKind::Index(..) | ExprKind::Slice { .. } => POSTFIX,
            ExprKind::Literal(_)
            | ExprKind::Var(_)
            | ExprKind::Call(..)
            | ExprKind::Map(_)
            | ExprKind::List(_) => ATOM,
        }
    }
}

impl Display for LogicOp {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogicOp::And => "AND",
            LogicOp::Or => "OR",
            LogicOp::Xor => "XOR",
        })
    }
}

impl Display for CmpOp {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
            CmpOp::Eq => "=",
            CmpOp::Ne => "<>",
        })
    }
}

impl Display for StrOp {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrOp::StartsWith => "STARTS WITH",
            StrOp::EndsWith => "ENDS WITH",
            StrOp::Contains => "CONTAINS",
        })
    }
}

impl Display for Literal {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Null => f.write_str("null"),
            Literal::Bool(b) => write!(f, "{b}"),
            Literal::Int(i) => write!(f, "{i}"),
            Literal::Str(s) => f.write_str(&quote_string(s)),
        }
    }
}

struct At<'a>(&'a Expr, u8);

impl Display for At<'_> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if self.0.kind.level() < self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

fn comma_separated<T: Display>(f: &mut Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

fn write_props(f: &mut Formatter<'_>, props: &[(String, Expr)]) -> fmt::Result {
    f.write_str("{")?;
    for (i, (k, e)) in props.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{}: {e}", quote_symbolic(k))?;
    }
    f.write_str("}")
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Literal(l) => write!(f, "{l}"),
            ExprKind::Var(a) => f.write_str(&quote_name(a)),
            ExprKind::Call(name, args) => {
                write!(f, "{name}(")?;
                comma_separated(f, args)?;
                f.write_str(")")
            }
            ExprKind::Prop(e, k) => write!(f, "{}.{}", At(e, POSTFIX), quote_symbolic(k)),
            ExprKind::Map(entries) => write_props(f, entries),
            ExprKind::List(items) => {
                f.write_str("[")?;
                comma_separated(f, items)?;
                f.write_str("]")
            }
            ExprKind::In(a, b) => write!(f, "{} IN {}", At(a, STR_IN), At(b, STR_IN + 1)),
            ExprKind::Index(e, i) => write!(f, "{}[{i}]", At(e, POSTFIX)),
            ExprKind::Slice { list, from, to } => {
                write!(f, "{}[", At(list, POSTFIX))?;
                if let Some(from) = from {
                    write!(f, "{from}")?;
                }
                f.write_str("..")?;
                if let Some(to) = to {
                    write!(f, "{to}")?;
                }
                f.write_str("]")
            }
            ExprKind::Str(op, a, b) => write!(f, "{} {op} {}", At(a, STR_IN), At(b, STR_IN + 1)),
            ExprKind::Logic(op, a, b) => {
                let level = self.kind.level();
                write!(f, "{} {op} {}", At(a, level), At(b, level + 1))
            }
            ExprKind::Not(e) => write!(f, "NOT {}", At(e, NOT)),
            ExprKind::IsNull { expr, negated } => write!(
                f,
                "{} IS {}NULL",
                At(expr, IS_NULL),
                if *negated { "NOT " } else { "" }
            ),
            ExprKind::Cmp(op, a, b) => write!(f, "{} {op} {}", At(a, CMP), At(b, CMP + 1)),
        }
    }
}

impl Display for NodePattern {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        if let Some(a) = &self.name {
            f.write_str(&quote_name(a))?;
        }
        for l in &self.labels {
            write!(f, ":{}", quote_symbolic(l))?;
        }
        if !self.props.is_empty() {
            if self.name.is_some() || !self.labels.is_empty() {
                f.write_str(" ")?;
            }
            write_props(f, &self.props)?;
        }
        f.write_str(")")
    }
}

impl Display for Length {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str("*")?;
        match (self.min, self.max) {
            (None, None) => Ok(()),
            (Some(a), Some(b)) if a == b => write!(f, "{a}"),
            (Some(a), None) => write!(f, "{a}.."),
            (None, Some(b)) => write!(f, "..{b}"),
            (Some(a), Some(b)) => write!(f, "{a}..{b}"),
        }
    }
}

impl Display for RelPattern {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let mut inner = String::new();
        if let Some(a) = &self.name {
            inner.push_str(&quote_name(a));
        }
        for (i, t) in self.types.iter().enumerate() {
            inner.push(if i == 0 { ':' } else { '|' });
            inner.push_str(&quote_symbolic(t));
        }
        if let Some(len) = &self.length {
            let _ = write!(inner, "{len}");
        }
        if !self.props.is_empty() {
            if !inner.is_empty() {
                inner.push(' ');
            }
            let _ = write!(inner, "{}", PropsDisplay(&self.props));
        }
        match self.direction {
            Direction::Outgoing => write!(f, "-[{inner}]->"),
            Direction::Incoming => write!(f, "<-[{inner}]-"),
            Direction::Both => write!(f, "-[{inner}]-"),
        }
    }
}

struct PropsDisplay<'a>(&'a [(String, Expr)]);

impl Display for PropsDisplay<'_> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_props(f, self.0)
    }
}

impl Display for PathPattern {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if let Some(a) = &self.name {
            write!(f, "{} = ", quote_name(a))?;
        }
        write!(f, "{}", self.start)?;
        for (r, n) in &self.steps {
            write!(f, "{r}{n}")?;
        }
        Ok(())
    }
}

impl Display for PatternTuple {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        comma_separated(f, &self.0)
    }
}

impl Display for ProjectionItem {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr)?;
        if let Some(a) = &self.alias {
            write!(f, " AS {}", quote_name(a))?;
        }
        Ok(())
    }
}

impl Display for Projection {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if self.star {
            f.write_str("*")?;
            if !self.items.is_empty() {
                f.write_str(", ")?;
            }
        }
        comma_separated(f, &self.items)
    }
}

impl Display for Clause {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Clause::Match {
                optional,
                pattern,
                filter,
            } => {
                if *optional {
                    f.write_str("OPTIONAL ")?;
                }
                write!(f, "MATCH {pattern}")?;
                if let Some(e) = filter {
                    write!(f, " WHERE {e}")?;
                }
                Ok(())
            }
            Clause::With { projection, filter } => {
                write!(f, "WITH {projection}")?;
                if let Some(e) = filter {
                    write!(f, " WHERE {e}")?;
                }
                Ok(())
            }
            Clause::Unwind { expr, alias } => write!(f, "UNWIND {expr} AS {}", quote_name(alias)),
        }
    }
}

impl Display for Query {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Query::Single { clauses, ret } => {
                for c in clauses {
                    write!(f, "{c} ")?;
                }
                write!(f, "RETURN {ret}")
            }
            Query::Union { left, right, all } => {
                write!(f, "{left} UNION ")?;
                if *all {
                    f.write_str("ALL ")?;
                }
                write!(f, "{right}")
            }
        }
    }
}
