use rug::ops::Pow;
use rug::{Integer, Rational};

use super::dag::{Dag, ExprId};
use super::system::ParametricSystem;
use crate::error::{Error, Result};

/// A parsed problem file: the system plus optional numeric seed data.
/// Seed numbers are kept as exact rationals so the working precision can be
/// chosen later.
#[derive(Debug)]
pub struct ParsedProblem {
    pub system: ParametricSystem,
    pub seed_params: Option<Vec<(Rational, Rational)>>,
    pub seed_solution: Option<Vec<(Rational, Rational)>>,
}

/// Parses problem-file source text:
///
/// ```text
/// vars x y; params a b;
/// eqs x^2 + a*y - 1; y^2 - b;          # one expression per `;`
/// seed_params 1.5 -2+0.5i;
/// seed_solution 0.25+1i 2;
/// ```
///
/// `#` starts a line comment. Numeric literals are exact decimals; `[lo,hi]`
/// is a real interval constant.
pub fn parse_problem(name: &str, src: &str) -> Result<ParsedProblem> {
    let tokens = lex(src)?;
    Parser {
        toks: &tokens,
        pos: 0,
    }
    .file(name)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(Rational),
    Sym(char),
    Eof,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut it = src.chars().peekable();
    while let Some(&c) = it.peek() {
        if c == '\n' {
            it.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            it.next();
            col += 1;
            continue;
        }
        if c == '#' {
            while let Some(&d) = it.peek() {
                if d == '\n' {
                    break;
                }
                it.next();
            }
            continue;
        }
        let (tline, tcol) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&d) = it.peek() {
                if d.is_ascii_alphanumeric() || d == '_' {
                    s.push(d);
                    it.next();
                    col += 1;
                } else {
                    break;
                }
            }
            out.push(Spanned {
                tok: Tok::Ident(s),
                line: tline,
                col: tcol,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && {
            let mut probe = it.clone();
            probe.next();
            probe.peek().is_some_and(|d| d.is_ascii_digit())
        }) {
            let mut s = String::new();
            let mut seen_dot = false;
            let mut seen_exp = false;
            while let Some(&d) = it.peek() {
                let take = d.is_ascii_digit()
                    || (d == '.' && !seen_dot && !seen_exp)
                    || ((d == 'e' || d == 'E') && !seen_exp && !s.is_empty())
                    || ((d == '+' || d == '-')
                        && s.ends_with(|e| e == 'e' || e == 'E'));
                if !take {
                    break;
                }
                if d == '.' {
                    seen_dot = true;
                }
                if d == 'e' || d == 'E' {
                    seen_exp = true;
                }
                s.push(d);
                it.next();
                col += 1;
            }
            // An 'e'/'E' not followed by digits belongs to the next token
            // (e.g. `2e` as in `2 e`): reject rather than guess.
            let q = decimal_to_rational(&s).ok_or(Error::Syntax {
                line: tline,
                col: tcol,
                msg: format!("malformed numeric literal `{s}`"),
            })?;
            out.push(Spanned {
                tok: Tok::Number(q),
                line: tline,
                col: tcol,
            });
            continue;
        }
        if "+-*/^();[],".contains(c) {
            it.next();
            col += 1;
            out.push(Spanned {
                tok: Tok::Sym(c),
                line: tline,
                col: tcol,
            });
            continue;
        }
        return Err(Error::Syntax {
            line,
            col,
            msg: format!("unexpected character `{c}`"),
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

/// Exact conversion of a decimal literal (with optional fraction and
/// exponent) to a rational.
fn decimal_to_rational(s: &str) -> Option<Rational> {
    let (mant, exp) = match s.find(|c| c == 'e' || c == 'E') {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
        None => (s, 0i64),
    };
    let (int_part, frac_part) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let num = Integer::from_str_radix(&digits, 10).ok()?;
    let shift = exp - frac_part.len() as i64;
    let mut q = Rational::from(num);
    let scale = Integer::from(10).pow(shift.unsigned_abs() as u32);
    if shift >= 0 {
        q *= Rational::from(scale);
    } else {
        q /= Rational::from(scale);
    }
    Some(q)
}

struct Parser<'a> {
    toks: &'a [Spanned],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> &Spanned {
        let t = &self.toks[self.pos];
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let t = self.peek();
        Err(Error::Syntax {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        })
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        if self.peek().tok == Tok::Sym(c) {
            self.next();
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn at_sym(&self, c: char) -> bool {
        self.peek().tok == Tok::Sym(c)
    }

    fn file(mut self, name: &str) -> Result<ParsedProblem> {
        let mut vars: Vec<String> = Vec::new();
        let mut params: Vec<String> = Vec::new();
        let mut dag = Dag::new();
        let mut equations: Vec<ExprId> = Vec::new();
        let mut seed_params = None;
        let mut seed_solution = None;
        loop {
            let kw = match &self.peek().tok {
                Tok::Eof => break,
                Tok::Ident(s) => s.clone(),
                _ => return self.err("expected a section keyword"),
            };
            match kw.as_str() {
                "vars" => {
                    self.next();
                    vars = self.ident_list()?;
                }
                "params" => {
                    self.next();
                    params = self.ident_list()?;
                }
                "eqs" => {
                    self.next();
                    loop {
                        let e = self.expr(&mut dag, &vars, &params)?;
                        equations.push(e);
                        self.expect_sym(';')?;
                        match &self.peek().tok {
                            Tok::Eof => break,
                            Tok::Ident(s)
                                if matches!(
                                    s.as_str(),
                                    "vars" | "params" | "eqs" | "seed_params" | "seed_solution"
                                ) =>
                            {
                                break
                            }
                            _ => {}
                        }
                    }
                }
                "seed_params" => {
                    self.next();
                    seed_params = Some(self.complex_list()?);
                }
                "seed_solution" => {
                    self.next();
                    seed_solution = Some(self.complex_list()?);
                }
                other => return self.err(format!("unknown section `{other}`")),
            }
        }
        let system = ParametricSystem::new(name, dag, equations, vars, params)?;
        Ok(ParsedProblem {
            system,
            seed_params,
            seed_solution,
        })
    }

    fn ident_list(&mut self) -> Result<Vec<String>> {
        let mut out = Vec::new();
        loop {
            match &self.peek().tok {
                Tok::Ident(s) => {
                    out.push(s.clone());
                    self.next();
                }
                Tok::Sym(';') => {
                    self.next();
                    break;
                }
                _ => return self.err("expected identifier or `;`"),
            }
        }
        if out.is_empty() {
            return self.err("empty identifier list");
        }
        Ok(out)
    }

    /// `a`, `a+bi`, `a-bi`, `bi`, `-a`, ... terminated by `;`.
    fn complex_list(&mut self) -> Result<Vec<(Rational, Rational)>> {
        let mut out = Vec::new();
        while !self.at_sym(';') {
            out.push(self.complex_number()?);
        }
        self.next(); // consume ';'
        if out.is_empty() {
            return self.err("empty number list");
        }
        Ok(out)
    }

    fn signed_number(&mut self) -> Result<Rational> {
        let mut sign = Rational::from(1);
        loop {
            match &self.peek().tok {
                Tok::Sym('-') => {
                    sign = -sign;
                    self.next();
                }
                Tok::Sym('+') => {
                    self.next();
                }
                _ => break,
            }
        }
        match self.peek().tok.clone() {
            Tok::Number(q) => {
                self.next();
                Ok(sign * q)
            }
            _ => self.err("expected a number"),
        }
    }

    fn eat_i(&mut self) -> bool {
        if let Tok::Ident(s) = &self.peek().tok {
            if s == "i" {
                self.next();
                return true;
            }
        }
        false
    }

    fn complex_number(&mut self) -> Result<(Rational, Rational)> {
        let first = self.signed_number()?;
        if self.eat_i() {
            return Ok((Rational::new(), first));
        }
        // optional imaginary tail `+ b i` / `- b i`
        if matches!(self.peek().tok, Tok::Sym('+') | Tok::Sym('-')) {
            // only a tail if it ends with `i`; a bare sign starts the next
            // number in the list, which we can tell apart by lookahead
            let save = self.pos;
            let second = self.signed_number()?;
            if self.eat_i() {
                return Ok((first, second));
            }
            self.pos = save;
        }
        Ok((first, Rational::new()))
    }

    fn expr(&mut self, dag: &mut Dag, vars: &[String], params: &[String]) -> Result<ExprId> {
        let mut acc = self.term(dag, vars, params)?;
        loop {
            match self.peek().tok {
                Tok::Sym('+') => {
                    self.next();
                    let rhs = self.term(dag, vars, params)?;
                    acc = dag.add(acc, rhs);
                }
                Tok::Sym('-') => {
                    self.next();
                    let rhs = self.term(dag, vars, params)?;
                    acc = dag.sub(acc, rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self, dag: &mut Dag, vars: &[String], params: &[String]) -> Result<ExprId> {
        let mut acc = self.factor(dag, vars, params)?;
        loop {
            match self.peek().tok {
                Tok::Sym('*') => {
                    self.next();
                    let rhs = self.factor(dag, vars, params)?;
                    acc = dag.mul(acc, rhs);
                }
                Tok::Sym('/') => {
                    self.next();
                    let rhs = self.factor(dag, vars, params)?;
                    acc = dag.div(acc, rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self, dag: &mut Dag, vars: &[String], params: &[String]) -> Result<ExprId> {
        if self.at_sym('-') {
            self.next();
            let inner = self.factor(dag, vars, params)?;
            return Ok(dag.neg(inner));
        }
        let mut base = self.primary(dag, vars, params)?;
        while self.at_sym('^') {
            self.next();
            let k = match self.peek().tok.clone() {
                Tok::Number(q) if q.is_integer() && q.cmp0() != std::cmp::Ordering::Less => {
                    q.numer().to_u32().ok_or_else(|| Error::Other(
                        "exponent too large".into(),
                    ))?
                }
                _ => return self.err("exponent must be a nonnegative integer"),
            };
            self.next();
            base = dag.pow(base, k);
        }
        Ok(base)
    }

    fn primary(&mut self, dag: &mut Dag, vars: &[String], params: &[String]) -> Result<ExprId> {
        match self.peek().tok.clone() {
            Tok::Number(q) => {
                self.next();
                Ok(dag.rational(q, Rational::new()))
            }
            Tok::Ident(s) => {
                self.next();
                if let Some(j) = vars.iter().position(|v| *v == s) {
                    Ok(dag.var(j as u32))
                } else if let Some(j) = params.iter().position(|p| *p == s) {
                    Ok(dag.param(j as u32))
                } else {
                    Err(Error::UnknownSymbol(s))
                }
            }
            Tok::Sym('(') => {
                self.next();
                let e = self.expr(dag, vars, params)?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Tok::Sym('[') => {
                self.next();
                let lo = self.signed_number()?;
                self.expect_sym(',')?;
                let hi = self.signed_number()?;
                self.expect_sym(']')?;
                if lo > hi {
                    return self.err("interval literal with lo > hi");
                }
                Ok(dag.interval_const(lo, hi, Rational::new(), Rational::new()))
            }
            _ => self.err("expected a number, identifier, `(` or `[`"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::{CPoint, Precision};

    const P: Precision = Precision::DEFAULT;

    #[test]
    fn quadratic_family() {
        let p = parse_problem("q", "vars x; params c0 c1; eqs x^2 + c1*x + c0;").unwrap();
        assert_eq!(p.system.n_vars(), 1);
        assert_eq!(p.system.n_params(), 2);
        // F(2; c0=-6, c1=1) = 4 + 2 - 6 = 0
        let x = [CPoint::from_f64(2.0, 0.0, P)];
        let z = [CPoint::from_f64(-6.0, 0.0, P), CPoint::from_f64(1.0, 0.0, P)];
        let v = p.system.eval_point(&x, &z, P).unwrap();
        assert!(v[0].re.to_f64().abs() < 1e-70 && v[0].im.to_f64().abs() < 1e-70);
    }

    #[test]
    fn non_square_rejected() {
        let r = parse_problem("bad", "vars x; eqs x; x - 1;");
        assert!(matches!(r, Err(Error::NonSquareSystem { n_eqs: 2, n_vars: 1 })));
    }

    #[test]
    fn unknown_symbol_rejected() {
        let r = parse_problem("bad", "vars x; eqs x + y;");
        assert!(matches!(r, Err(Error::UnknownSymbol(s)) if s == "y"));
    }

    #[test]
    fn syntax_error_has_position() {
        let r = parse_problem("bad", "vars x;\neqs x + * 2;");
        match r {
            Err(Error::Syntax { line, col, .. }) => {
                assert_eq!(line, 2);
                assert!(col >= 8);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn comments_and_seeds() {
        let src = "\
# a univariate problem
vars x; params c;
eqs x^2 - c;  # vanishing locus
seed_params 2;
seed_solution 1.5-0.25i;
";
        let p = parse_problem("seeded", src).unwrap();
        let sp = p.seed_params.unwrap();
        assert_eq!(sp[0].0, Rational::from(2));
        let ss = p.seed_solution.unwrap();
        assert_eq!(ss[0].0, Rational::from((3u32, 2u32)));
        assert_eq!(ss[0].1, Rational::from((-1i32, 4i32)));
    }

    #[test]
    fn complex_list_forms() {
        let src = "vars x; eqs x; seed_params 1+2i -3 0.5i 4-1i;";
        let p = parse_problem("c", src).unwrap();
        let sp = p.seed_params.unwrap();
        assert_eq!(sp.len(), 4);
        assert_eq!(sp[0], (Rational::from(1), Rational::from(2)));
        assert_eq!(sp[1], (Rational::from(-3), Rational::new()));
        assert_eq!(sp[2], (Rational::new(), Rational::from((1u32, 2u32))));
        assert_eq!(sp[3], (Rational::from(4), Rational::from(-1)));
    }

    #[test]
    fn interval_literal() {
        let p = parse_problem("iv", "vars x; eqs x - [1,2];").unwrap();
        let x = [crate::interval::ComplexInterval::zero(P)];
        let v = p.system.eval_box(&x, &[], P).unwrap();
        assert_eq!(v[0].re.lo().to_f64(), -2.0);
        assert_eq!(v[0].re.hi().to_f64(), -1.0);
    }

    #[test]
    fn exponent_rules() {
        let p = parse_problem("e", "vars x; eqs x^3 - 8;").unwrap();
        let x = [CPoint::from_f64(2.0, 0.0, P)];
        let v = p.system.eval_point(&x, &[], P).unwrap();
        assert!(v[0].re.to_f64().abs() < 1e-70);
        assert!(parse_problem("e", "vars x; eqs x^(-1);").is_err());
    }

    #[test]
    fn exact_decimal_literals() {
        assert_eq!(
            decimal_to_rational("0.125").unwrap(),
            Rational::from((1u32, 8u32))
        );
        assert_eq!(
            decimal_to_rational("1.5e2").unwrap(),
            Rational::from(150)
        );
        assert_eq!(
            decimal_to_rational("25e-2").unwrap(),
            Rational::from((1u32, 4u32))
        );
    }
}
