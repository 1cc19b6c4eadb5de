//! The function-spec language.
//!
//! ```text
//! spec    := IDENT [ "(" arglist ")" ]
//! arglist := arg { "," arg }
//! arg     := [ IDENT "=" ] ( NUMBER | COMPLEX | spec )
//! COMPLEX := NUMBER ( "+" | "-" | "−" ) NUMBER "i"
//! ```
//!
//! Constructors for `f` and `g`: `identity`, `koebe(alpha[, n])`,
//! `poly(a2, a3, ...)` for `z + a2 z^2 + a3 z^3 + ...`,
//! `starlike(alpha[, seed[, atoms[, n]]])`, `synth(g, mu, w)` and
//! `rsynth(g, mu, w)`. Constructors for `w`: `cmono(c, m)`, `mmono(c, m, a)`
//! and `wpoly(c1, c2, ...)`.

use std::fmt;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stc_core::families::{koebe_alpha_n, random_starlike_n, realize_w, synth_with, HerglotzAtoms, WSpec};
use stc_core::{Complex64, CoreError, Direction, NormalizedFunction};

/// Atom count for `starlike(...)` when none is given.
pub const DEFAULT_ATOMS: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Number(f64),
    Complex(Complex64),
    Spec(Spec),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Arg {
    pub name: Option<String>,
    pub value: Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spec {
    pub name: String,
    pub args: Vec<Arg>,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("parse error at {pos}: expected {}, found {found}", expected.join(" or "))]
pub struct ParseError {
    /// Character offset.
    pub pos: usize,
    pub expected: Vec<String>,
    pub found: String,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SpecError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

fn fmt_f64(x: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "{x:?}")
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(x) => fmt_f64(*x, f),
            Value::Complex(c) => {
                fmt_f64(c.re, f)?;
                if c.im.is_sign_negative() {
                    f.write_str("-")?;
                    fmt_f64(-c.im, f)?;
                } else {
                    f.write_str("+")?;
                    fmt_f64(c.im, f)?;
                }
                f.write_str("i")
            }
            Value::Spec(s) => s.fmt(f),
        }
    }
}

/// Canonical form: no whitespace, shortest round-trip floats.
impl fmt::Display for Spec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if self.args.is_empty() {
            return Ok(());
        }
        f.write_str("(")?;
        for (i, arg) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            if let Some(name) = &arg.name {
                write!(f, "{name}=")?;
            }
            arg.value.fmt(f)?;
        }
        f.write_str(")")
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

fn is_minus(c: char) -> bool {
    c == '-' || c == '\u{2212}'
}

impl Parser {
    fn new(src: &str) -> Self {
        Self { chars: src.chars().collect(), pos: 0 }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError {
            pos: self.pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: match self.peek() {
                Some(c) => format!("'{c}'"),
                None => "end of input".into(),
            },
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let start = self.pos;
        if !self.peek().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') {
            return Err(self.error(&["identifier"]));
        }
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn digits(&mut self, text: &mut String) -> usize {
        let mut count = 0;
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            text.push(c);
            self.pos += 1;
            count += 1;
        }
        count
    }

    /// Unsigned decimal with optional fraction and exponent.
    fn unsigned(&mut self) -> Result<f64, ParseError> {
        let start = self.pos;
        let mut text = String::new();
        if self.digits(&mut text) == 0 {
            return Err(self.error(&["number"]));
        }
        if self.peek() == Some('.') {
            text.push('.');
            self.pos += 1;
            if self.digits(&mut text) == 0 {
                return Err(self.error(&["digit"]));
            }
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            text.push('e');
            self.pos += 1;
            match self.peek() {
                Some('+') => self.pos += 1,
                Some(c) if is_minus(c) => {
                    text.push('-');
                    self.pos += 1;
                }
                _ => {}
            }
            if self.digits(&mut text) == 0 {
                return Err(self.error(&["exponent digits"]));
            }
        }
        text.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or(ParseError { pos: start, expected: vec!["finite number".into()], found: text })
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some('+') => {
                self.pos += 1;
                self.unsigned()
            }
            Some(c) if is_minus(c) => {
                self.pos += 1;
                Ok(-self.unsigned()?)
            }
            _ => self.unsigned(),
        }
    }

    fn value(&mut self) -> Result<Value, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => Ok(Value::Spec(self.spec()?)),
            Some(c) if c.is_ascii_digit() || c == '+' || is_minus(c) => {
                let re = self.number()?;
                self.skip_ws();
                let sign = match self.peek() {
                    Some('+') => 1.0,
                    Some(c) if is_minus(c) => -1.0,
                    _ => return Ok(Value::Number(re)),
                };
                self.pos += 1;
                self.skip_ws();
                let im = sign * self.unsigned()?;
                self.skip_ws();
                if self.peek() != Some('i') {
                    return Err(self.error(&["'i'"]));
                }
                self.pos += 1;
                Ok(Value::Complex(Complex64::new(re, im)))
            }
            _ => Err(self.error(&["number", "identifier"])),
        }
    }

    fn arg(&mut self) -> Result<Arg, ParseError> {
        self.skip_ws();
        if self.peek().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') {
            let save = self.pos;
            let name = self.ident()?;
            self.skip_ws();
            if self.peek() == Some('=') {
                self.pos += 1;
                return Ok(Arg { name: Some(name), value: self.value()? });
            }
            self.pos = save;
        }
        Ok(Arg { name: None, value: self.value()? })
    }

    fn spec(&mut self) -> Result<Spec, ParseError> {
        let name = self.ident()?;
        self.skip_ws();
        let mut args = Vec::new();
        if self.peek() == Some('(') {
            self.pos += 1;
            args.push(self.arg()?);
            loop {
                self.skip_ws();
                match self.peek() {
                    Some(',') => {
                        self.pos += 1;
                        args.push(self.arg()?);
                    }
                    Some(')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.error(&["','", "')'"])),
                }
            }
        }
        Ok(Spec { name, args })
    }
}

pub fn parse_spec(text: &str) -> Result<Spec, ParseError> {
    let mut p = Parser::new(text);
    p.skip_ws();
    if p.peek().is_none() {
        return Err(p.error(&["identifier"]));
    }
    let spec = p.spec()?;
    p.skip_ws();
    if p.peek().is_some() {
        return Err(p.error(&["end of input"]));
    }
    Ok(spec)
}

impl std::str::FromStr for Spec {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_spec(s)
    }
}

/// Settings shared by every constructor.
#[derive(Clone, Copy, Debug)]
pub struct BuildContext {
    pub order: usize,
    /// Seed for `starlike(...)` when the spec gives none.
    pub seed: u64,
}

fn invalid<T>(msg: String) -> Result<T, SpecError> {
    Err(SpecError::Invalid(msg))
}

/// Arguments bound to parameter names.
struct Bound<'a> {
    ctor: &'a str,
    slots: Vec<(&'static str, Option<&'a Value>)>,
}

impl<'a> Bound<'a> {
    fn new(spec: &'a Spec, params: &[&'static str]) -> Result<Self, SpecError> {
        let mut slots: Vec<(&'static str, Option<&Value>)> = params.iter().map(|p| (*p, None)).collect();
        let mut next = 0;
        for arg in &spec.args {
            let idx = match &arg.name {
                Some(name) => match params.iter().position(|p| p == name) {
                    Some(i) => i,
                    None => return invalid(format!("{}: unknown argument '{name}'", spec.name)),
                },
                None => {
                    if next >= params.len() {
                        return invalid(format!("{}: takes at most {} arguments", spec.name, params.len()));
                    }
                    next
                }
            };
            if slots[idx].1.is_some() {
                return invalid(format!("{}: argument '{}' given twice", spec.name, params[idx]));
            }
            slots[idx].1 = Some(&arg.value);
            next = idx + 1;
        }
        Ok(Self { ctor: &spec.name, slots })
    }

    fn get(&self, name: &str) -> Option<&'a Value> {
        self.slots.iter().find(|(p, _)| *p == name).and_then(|(_, v)| *v)
    }

    fn required(&self, name: &str) -> Result<&'a Value, SpecError> {
        self.get(name).ok_or_else(|| SpecError::Invalid(format!("{}: missing argument '{name}'", self.ctor)))
    }

    fn real(&self, name: &str) -> Result<Option<f64>, SpecError> {
        match self.get(name) {
            None => Ok(None),
            Some(Value::Number(x)) => Ok(Some(*x)),
            Some(_) => invalid(format!("{}: '{name}' must be a real number", self.ctor)),
        }
    }

    fn required_real(&self, name: &str) -> Result<f64, SpecError> {
        self.required(name)?;
        Ok(self.real(name)?.unwrap_or_default())
    }

    fn count(&self, name: &str) -> Result<Option<usize>, SpecError> {
        match self.real(name)? {
            None => Ok(None),
            Some(x) if x >= 0.0 && x.fract() == 0.0 && x <= u32::MAX as f64 => Ok(Some(x as usize)),
            Some(x) => invalid(format!("{}: '{name}' must be a nonnegative integer, got {x}", self.ctor)),
        }
    }

    fn complex(&self, name: &str) -> Result<Complex64, SpecError> {
        to_complex(self.ctor, self.required(name)?)
    }

    fn spec(&self, name: &str) -> Result<&'a Spec, SpecError> {
        match self.required(name)? {
            Value::Spec(s) => Ok(s),
            _ => invalid(format!("{}: '{name}' must be a constructor", self.ctor)),
        }
    }
}

fn to_complex(ctor: &str, v: &Value) -> Result<Complex64, SpecError> {
    match v {
        Value::Number(x) => Ok(Complex64::new(*x, 0.0)),
        Value::Complex(c) => Ok(*c),
        Value::Spec(_) => invalid(format!("{ctor}: expected a number")),
    }
}

fn variadic(spec: &Spec) -> Result<Vec<Complex64>, SpecError> {
    if spec.args.is_empty() {
        return invalid(format!("{}: needs at least one coefficient", spec.name));
    }
    spec.args
        .iter()
        .map(|a| match a.name {
            Some(_) => invalid(format!("{}: coefficients are positional", spec.name)),
            None => to_complex(&spec.name, &a.value),
        })
        .collect()
}

/// Resolves a spec for `f` or `g`.
pub fn build_function(spec: &Spec, ctx: &BuildContext) -> Result<NormalizedFunction, SpecError> {
    let order = ctx.order;
    match spec.name.as_str() {
        "identity" => {
            Bound::new(spec, &[])?;
            Ok(NormalizedFunction::identity(order))
        }
        "koebe" => {
            let b = Bound::new(spec, &["alpha", "n"])?;
            let alpha = b.required_real("alpha")?;
            Ok(koebe_alpha_n(alpha, b.count("n")?.unwrap_or(1), order)?)
        }
        "poly" => {
            let tail = variadic(spec)?;
            if tail.len() >= order {
                return invalid(format!("poly: {} coefficients exceed order {order}", tail.len()));
            }
            let mut c = vec![Complex64::new(0.0, 0.0); order + 1];
            c[1] = Complex64::new(1.0, 0.0);
            c[2..2 + tail.len()].copy_from_slice(&tail);
            Ok(NormalizedFunction::detect(stc_core::AnalyticSeries::from_coeffs(c)?)?)
        }
        "starlike" => {
            let b = Bound::new(spec, &["alpha", "seed", "atoms", "n"])?;
            let alpha = b.required_real("alpha")?;
            let seed = match b.real("seed")? {
                None => ctx.seed,
                Some(x) if x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(53) => x as u64,
                Some(x) => return invalid(format!("starlike: seed must be a nonnegative integer, got {x}")),
            };
            let atoms = b.count("atoms")?.unwrap_or(DEFAULT_ATOMS);
            let n = b.count("n")?.unwrap_or(1);
            let atoms = HerglotzAtoms::sample(&mut ChaCha8Rng::seed_from_u64(seed), atoms)?;
            Ok(random_starlike_n(alpha, &atoms, n, order)?)
        }
        "synth" | "rsynth" => {
            let b = Bound::new(spec, &["g", "mu", "w"])?;
            let g = build_function(b.spec("g")?, ctx)?;
            let mu = b.required_real("mu")?;
            let w = realize_w(&build_w(b.spec("w")?)?, 1, order)?;
            let d = if spec.name == "synth" { Direction::Forward } else { Direction::Reciprocal };
            Ok(synth_with(&g, mu, &w, d)?)
        }
        other => invalid(format!(
            "unknown function constructor '{other}' (expected identity, koebe, poly, starlike, synth or rsynth)"
        )),
    }
}

/// Resolves a spec for `w`.
pub fn build_w(spec: &Spec) -> Result<WSpec, SpecError> {
    match spec.name.as_str() {
        "cmono" => {
            let b = Bound::new(spec, &["c", "m"])?;
            b.required("m")?;
            Ok(WSpec::ScaledMonomial { c: b.complex("c")?, m: b.count("m")?.unwrap_or_default() })
        }
        "mmono" => {
            let b = Bound::new(spec, &["c", "m", "a"])?;
            b.required("m")?;
            Ok(WSpec::MobiusMonomial {
                c: b.complex("c")?,
                m: b.count("m")?.unwrap_or_default(),
                a: b.complex("a")?,
            })
        }
        "wpoly" => Ok(WSpec::Poly(variadic(spec)?)),
        other => invalid(format!("unknown w constructor '{other}' (expected cmono, mmono or wpoly)")),
    }
}

/// Parses and resolves in one step.
pub fn function_from_str(text: &str, ctx: &BuildContext) -> Result<NormalizedFunction, SpecError> {
    build_function(&parse_spec(text)?, ctx)
}

pub fn w_from_str(text: &str) -> Result<WSpec, SpecError> {
    build_w(&parse_spec(text)?)
}
