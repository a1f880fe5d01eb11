//! Recursive-descent parser for the coefficient expression language.
//!
//! Grammar (whitespace insignificant):
//!   expr     := term (('+' | '-') term)*
//!   term     := factor ('*' factor)*
//!   factor   := ['-'] primary ('^' '(' rational ')')*
//!   primary  := atom | number | 'i' | 't' | '(' expr ')'
//!   atom     := ('sin' | 'cos' | 'exp') '(' expr ')'
//!             | 'besselj' '(' integer ';' expr ')'
//!   rational := ['-'] integer ['/' integer]
//!
//! A unary minus folds into a numeric literal when one follows directly and
//! otherwise becomes a -1 scalar multiple, so every parse result stays inside
//! the plain binary AST. Atom arguments are checked to be monomials a*t^nu
//! during parsing, while the position is still known.

use num_rational::Ratio;

use super::ast::{monomial_exponent, Atom, AtomKind, Expr};
use super::ParseError;

const MAX_DEPTH: usize = 256;
/// Bound on literal integers in exponents; avoids overflow in later
/// rational arithmetic while being far beyond any meaningful exponent.
const MAX_INT: i64 = 1 << 62;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    Semi,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn lex(src: &'a str) -> Result<Vec<(usize, Tok)>, ParseError> {
        let mut lx = Lexer { src: src.as_bytes(), pos: 0 };
        let mut out = Vec::new();
        while let Some(t) = lx.next_token()? {
            out.push(t);
        }
        Ok(out)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn next_token(&mut self) -> Result<Option<(usize, Tok)>, ParseError> {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(b) = self.peek() else { return Ok(None) };
        let tok = match b {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'^' => Tok::Caret,
            b'/' => Tok::Slash,
            b';' => Tok::Semi,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' => return Ok(Some((start, self.number(start)?))),
            b'a'..=b'z' | b'A'..=b'Z' => {
                while matches!(self.peek(), Some(c) if c.is_ascii_alphabetic()) {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
                return Ok(Some((start, Tok::Ident(name))));
            }
            other => {
                return Err(ParseError::UnexpectedChar { pos: start, ch: other as char });
            }
        };
        self.pos += 1;
        Ok(Some((start, tok)))
    }

    fn number(&mut self, start: usize) -> Result<Tok, ParseError> {
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            if !matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                return Err(ParseError::BadNumber { pos: start });
            }
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        // exponent part only if it is actually followed by digits
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = mark;
            }
        }
        Ok(Tok::Num(std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string()))
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    depth: usize,
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = Lexer::lex(src)?;
    let mut p = Parser { toks, at: 0, end: src.len(), depth: 0 };
    let e = p.expr()?;
    if let Some((pos, _)) = p.toks.get(p.at) {
        return Err(ParseError::Trailing { pos: *pos });
    }
    Ok(e)
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &'static str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.at += 1;
                Ok(())
            }
            Some(_) => Err(ParseError::Expected { pos: self.pos(), expected: what }),
            None => Err(ParseError::UnexpectedEnd { expected: what }),
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError::TooDeep { max: MAX_DEPTH });
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.at += 1;
                    acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.at += 1;
                    acc = Expr::Sub(Box::new(acc), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        self.depth -= 1;
        Ok(acc)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.at += 1;
            acc = Expr::Mul(Box::new(acc), Box::new(self.factor()?));
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let out = if self.peek() == Some(&Tok::Minus) {
            self.at += 1;
            match self.factor()? {
                Expr::Num(s) if !s.starts_with('-') => Expr::Num(format!("-{s}")),
                other => Expr::Mul(Box::new(Expr::Num("-1".into())), Box::new(other)),
            }
        } else {
            let mut acc = self.primary()?;
            while self.peek() == Some(&Tok::Caret) {
                self.at += 1;
                self.expect(Tok::LParen, "'(' after '^'")?;
                let r = self.rational()?;
                self.expect(Tok::RParen, "')' closing the exponent")?;
                acc = Expr::Pow(Box::new(acc), r);
            }
            acc
        };
        self.depth -= 1;
        Ok(out)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Some(Tok::Num(s)) => Ok(Expr::Num(s)),
            Some(Tok::Ident(name)) => match name.as_str() {
                "t" => Ok(Expr::T),
                "i" => Ok(Expr::I),
                "sin" => self.atom(AtomKind::Sin, pos),
                "cos" => self.atom(AtomKind::Cos, pos),
                "exp" => self.atom(AtomKind::Exp, pos),
                "besselj" => self.besselj(pos),
                _ => Err(ParseError::UnknownName { pos, name }),
            },
            Some(_) => Err(ParseError::Expected { pos, expected: "a value" }),
            None => Err(ParseError::UnexpectedEnd { expected: "a value" }),
        }
    }

    fn atom(&mut self, kind: AtomKind, pos: usize) -> Result<Expr, ParseError> {
        self.expect(Tok::LParen, "'(' after function name")?;
        let arg = self.expr()?;
        self.expect(Tok::RParen, "')'")?;
        self.monomial_guard(kind, &arg, pos)?;
        Ok(Expr::Atom(Atom { kind, arg: Box::new(arg) }))
    }

    fn besselj(&mut self, pos: usize) -> Result<Expr, ParseError> {
        self.expect(Tok::LParen, "'(' after function name")?;
        let opos = self.pos();
        let order = match self.bump() {
            Some(Tok::Num(s)) => {
                s.parse::<u64>().map_err(|_| ParseError::Expected {
                    pos: opos,
                    expected: "a nonnegative integer order",
                })?
            }
            Some(_) => {
                return Err(ParseError::Expected { pos: opos, expected: "an integer order" })
            }
            None => return Err(ParseError::UnexpectedEnd { expected: "an integer order" }),
        };
        self.expect(Tok::Semi, "';' between order and argument")?;
        let arg = self.expr()?;
        self.expect(Tok::RParen, "')'")?;
        let kind = AtomKind::BesselJ(order);
        self.monomial_guard(kind, &arg, pos)?;
        Ok(Expr::Atom(Atom { kind, arg: Box::new(arg) }))
    }

    fn monomial_guard(&self, kind: AtomKind, arg: &Expr, pos: usize) -> Result<(), ParseError> {
        if monomial_exponent(arg).is_none() {
            return Err(ParseError::NonMonomialAtom { pos, atom: kind.name() });
        }
        Ok(())
    }

    fn rational(&mut self) -> Result<Ratio<i64>, ParseError> {
        let neg = if self.peek() == Some(&Tok::Minus) {
            self.at += 1;
            true
        } else {
            false
        };
        let n = self.integer()?;
        let d = if self.peek() == Some(&Tok::Slash) {
            self.at += 1;
            let dpos = self.pos();
            let d = self.integer()?;
            if d == 0 {
                return Err(ParseError::BadExponent { pos: dpos });
            }
            d
        } else {
            1
        };
        Ok(Ratio::new(if neg { -n } else { n }, d))
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Num(s)) => match s.parse::<i64>() {
                Ok(v) if v <= MAX_INT => Ok(v),
                _ => Err(ParseError::BadNumber { pos }),
            },
            Some(_) => Err(ParseError::Expected { pos, expected: "an integer" }),
            None => Err(ParseError::UnexpectedEnd { expected: "an integer" }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trip(src: &str) {
        let e = parse(src).unwrap();
        let printed = e.to_string();
        let again = parse(&printed).unwrap_or_else(|err| panic!("reparse of {printed:?}: {err}"));
        assert_eq!(e, again, "canonical form {printed:?}");
    }

    #[test]
    fn accepts_coefficient_forms() {
        assert!(parse("sin(2*t^(1/2))").is_ok());
        assert!(parse("t^(5/2)").is_ok());
        assert!(parse("besselj(0; t^(5/4))").is_ok());
        assert!(parse("exp(i*80*t^(1/2))").is_ok());
        assert!(parse("0.5*besselj(0; t^(5/4))").is_ok());
        assert!(parse("1e-3 + 2.25e+1*t").is_ok());
    }

    #[test]
    fn rejects_non_monomial_atom_argument() {
        assert!(matches!(
            parse("sin(t + 1)"),
            Err(ParseError::NonMonomialAtom { atom: "sin", .. })
        ));
        assert!(matches!(
            parse("exp(sin(t))"),
            Err(ParseError::NonMonomialAtom { atom: "exp", .. })
        ));
    }

    #[test]
    fn error_positions_point_at_problem() {
        match parse("2 * @") {
            Err(ParseError::UnexpectedChar { pos, ch }) => {
                assert_eq!((pos, ch), (4, '@'));
            }
            other => panic!("{other:?}"),
        }
        match parse("t^2") {
            Err(ParseError::Expected { pos, .. }) => assert_eq!(pos, 2),
            other => panic!("{other:?}"),
        }
        match parse("t t") {
            Err(ParseError::Trailing { pos }) => assert_eq!(pos, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_malformed_numbers() {
        assert!(matches!(parse("1."), Err(ParseError::BadNumber { .. })));
        assert!(parse("1.2.3").is_err());
        assert!(matches!(parse("t^(1/0)"), Err(ParseError::BadExponent { .. })));
    }

    #[test]
    fn unknown_names_are_reported() {
        assert!(matches!(
            parse("tan(t)"),
            Err(ParseError::UnknownName { name, .. }) if name == "tan"
        ));
    }

    #[test]
    fn besselj_needs_integer_order() {
        assert!(parse("besselj(1.5; t)").is_err());
        assert!(parse("besselj(2, t)").is_err());
    }

    #[test]
    fn deep_nesting_is_cut_off() {
        let mut src = String::new();
        for _ in 0..400 {
            src.push('(');
        }
        src.push('t');
        for _ in 0..400 {
            src.push(')');
        }
        assert!(matches!(parse(&src), Err(ParseError::TooDeep { .. })));
    }

    #[test]
    fn print_parse_round_trips() {
        for src in [
            "t^(5/2)",
            "sin(2*t^(1/2))",
            "besselj(0; t^(5/4))",
            "exp(i*80*t^(1/2))",
            "1.5e-3*t + 2 - t^(3)*cos(t^(1/2))",
            "-1",
            "3 - -2",
            "-t^(2)",
            "(t + 1)*(t - 1)",
            "2*(t + 1)^(3)",
            "t*(t*t)",
            "1 + (2 - (3 + t))",
            "i*i*t^(1/6)",
        ] {
            round_trip(src);
        }
    }

    #[test]
    fn garbage_never_panics() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xfeed);
        let alphabet: &[u8] = b"ts0123456789.+-*/^();ie ";
        for _ in 0..500 {
            let len = rng.gen_range(0..200);
            let s: String =
                (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())] as char).collect();
            let _ = parse(&s);
        }
    }
}
