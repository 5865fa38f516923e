//! Complex expressions in `z` and `zbar`.
//!
//! Expressions are immutable trees shared through [`Arc`], so cloning is cheap
//! and a parsed expression can be evaluated from many threads at once.
//! Constant subtrees are folded at construction time; nothing else is
//! simplified.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

mod order;
mod parse;
mod wirtinger;

pub use order::{order_at, OrderEstimate};
pub use parse::{parse, ParseError, ParseErrorKind};
pub use wirtinger::{wirtinger, Wrt};

/// Denominators with modulus below this value raise [`Error::PoleSignal`].
pub const POLE_THRESHOLD: f64 = 1e-300;

/// Unary functions of the grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Conj,
    Re,
    Im,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Conj => "conj",
            Func::Re => "re",
            Func::Im => "im",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "conj" => Func::Conj,
            "re" => Func::Re,
            "im" => Func::Im,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    /// Functions that break holomorphy.
    fn is_antiholomorphic_marker(self) -> bool {
        matches!(self, Func::Conj | Func::Re | Func::Im | Func::Abs)
    }

    fn apply(self, w: Complex64) -> Result<Complex64> {
        Ok(match self {
            Func::Exp => w.exp(),
            Func::Log => {
                if w.re == 0.0 && w.im == 0.0 {
                    return Err(Error::DomainError("log of zero"));
                }
                w.ln()
            }
            Func::Sin => w.sin(),
            Func::Cos => w.cos(),
            Func::Sqrt => w.sqrt(),
            Func::Conj => w.conj(),
            Func::Re => Complex64::new(w.re, 0.0),
            Func::Im => Complex64::new(w.im, 0.0),
            Func::Abs => Complex64::new(w.norm(), 0.0),
        })
    }
}

/// A node of the expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Lit(Complex64),
    Z,
    Zbar,
    Neg(ComplexExpr),
    Add(ComplexExpr, ComplexExpr),
    Sub(ComplexExpr, ComplexExpr),
    Mul(ComplexExpr, ComplexExpr),
    Div(ComplexExpr, ComplexExpr),
    Pow(ComplexExpr, i32),
    Call(Func, ComplexExpr),
}

/// Immutable complex-valued expression in `z` and `zbar`.
#[derive(Clone, PartialEq)]
pub struct ComplexExpr {
    node: Arc<Node>,
    holomorphic: bool,
    has_abs: bool,
}

fn normalize_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

impl ComplexExpr {
    fn from_node(node: Node) -> Self {
        let (holomorphic, has_abs) = match &node {
            Node::Lit(_) | Node::Z => (true, false),
            Node::Zbar => (false, false),
            Node::Neg(a) | Node::Pow(a, _) => (a.holomorphic, a.has_abs),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                (a.holomorphic && b.holomorphic, a.has_abs || b.has_abs)
            }
            Node::Call(f, a) => (
                a.holomorphic && !f.is_antiholomorphic_marker(),
                a.has_abs || *f == Func::Abs,
            ),
        };
        ComplexExpr {
            node: Arc::new(node),
            holomorphic,
            has_abs,
        }
    }

    /// Literal; signed zeros are normalized to `+0.0` so printing is exact.
    pub fn lit(c: Complex64) -> Self {
        Self::from_node(Node::Lit(Complex64::new(
            normalize_zero(c.re),
            normalize_zero(c.im),
        )))
    }

    pub fn real(x: f64) -> Self {
        Self::lit(Complex64::new(x, 0.0))
    }

    pub fn z() -> Self {
        Self::from_node(Node::Z)
    }

    pub fn zbar() -> Self {
        Self::from_node(Node::Zbar)
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn as_lit(&self) -> Option<Complex64> {
        match *self.node {
            Node::Lit(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_lit() == Some(Complex64::new(0.0, 0.0))
    }

    fn is_one(&self) -> bool {
        self.as_lit() == Some(Complex64::new(1.0, 0.0))
    }

    /// True when the tree has no `zbar`, `conj`, `re`, `im` or `abs` node.
    pub fn is_holomorphic(&self) -> bool {
        self.holomorphic
    }

    pub fn contains_abs(&self) -> bool {
        self.has_abs
    }

    fn folded(node: Node) -> Self {
        let e = Self::from_node(node);
        if let Some(ep) = e.try_fold() {
            return ep;
        }
        e
    }

    /// Folds a node whose children are all literals, when evaluation succeeds
    /// and stays finite.
    fn try_fold(&self) -> Option<Self> {
        let all_lit = match &*self.node {
            Node::Lit(_) | Node::Z | Node::Zbar => return None,
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => a.as_lit().is_some(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.as_lit().is_some() && b.as_lit().is_some()
            }
        };
        if !all_lit {
            return None;
        }
        match self.eval(Complex64::new(0.0, 0.0)) {
            Ok(v) if v.re.is_finite() && v.im.is_finite() => Some(Self::lit(v)),
            _ => None,
        }
    }

    pub fn neg(a: &Self) -> Self {
        Self::folded(Node::Neg(a.clone()))
    }

    pub fn add(a: &Self, b: &Self) -> Self {
        Self::folded(Node::Add(a.clone(), b.clone()))
    }

    pub fn sub(a: &Self, b: &Self) -> Self {
        Self::folded(Node::Sub(a.clone(), b.clone()))
    }

    pub fn mul(a: &Self, b: &Self) -> Self {
        Self::folded(Node::Mul(a.clone(), b.clone()))
    }

    pub fn div(a: &Self, b: &Self) -> Self {
        Self::folded(Node::Div(a.clone(), b.clone()))
    }

    pub fn pow(a: &Self, n: i32) -> Self {
        Self::folded(Node::Pow(a.clone(), n))
    }

    pub fn call(f: Func, a: &Self) -> Self {
        Self::folded(Node::Call(f, a.clone()))
    }

    // Builders used by derivative construction: they also drop additive
    // zeros and multiplicative ones and zeros.

    pub(crate) fn sum(a: &Self, b: &Self) -> Self {
        if a.is_zero() {
            b.clone()
        } else if b.is_zero() {
            a.clone()
        } else {
            Self::add(a, b)
        }
    }

    pub(crate) fn difference(a: &Self, b: &Self) -> Self {
        if b.is_zero() {
            a.clone()
        } else if a.is_zero() {
            Self::neg(b)
        } else {
            Self::sub(a, b)
        }
    }

    pub(crate) fn product(a: &Self, b: &Self) -> Self {
        if a.is_zero() || b.is_zero() {
            Self::real(0.0)
        } else if a.is_one() {
            b.clone()
        } else if b.is_one() {
            a.clone()
        } else {
            Self::mul(a, b)
        }
    }

    pub(crate) fn quotient(a: &Self, b: &Self) -> Self {
        if a.is_zero() {
            Self::real(0.0)
        } else if b.is_one() {
            a.clone()
        } else {
            Self::div(a, b)
        }
    }

    /// Evaluates at `z`, with `zbar` bound to the conjugate of `z`.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        match &*self.node {
            Node::Lit(c) => Ok(*c),
            Node::Z => Ok(z),
            Node::Zbar => Ok(z.conj()),
            Node::Neg(a) => Ok(-a.eval(z)?),
            Node::Add(a, b) => Ok(a.eval(z)? + b.eval(z)?),
            Node::Sub(a, b) => Ok(a.eval(z)? - b.eval(z)?),
            Node::Mul(a, b) => Ok(a.eval(z)? * b.eval(z)?),
            Node::Div(a, b) => {
                let num = a.eval(z)?;
                let den = b.eval(z)?;
                checked_div(num, den)
            }
            Node::Pow(a, n) => int_pow(a.eval(z)?, *n),
            Node::Call(f, a) => f.apply(a.eval(z)?),
        }
    }
}

pub(crate) fn checked_div(num: Complex64, den: Complex64) -> Result<Complex64> {
    if den.norm() < POLE_THRESHOLD {
        return Err(Error::PoleSignal);
    }
    Ok(num / den)
}

fn int_pow(base: Complex64, n: i32) -> Result<Complex64> {
    let mut acc = Complex64::new(1.0, 0.0);
    let mut sq = base;
    let mut k = n.unsigned_abs();
    while k > 0 {
        if k & 1 == 1 {
            acc *= sq;
        }
        k >>= 1;
        if k > 0 {
            sq = sq * sq;
        }
    }
    if n < 0 {
        checked_div(Complex64::new(1.0, 0.0), acc)
    } else {
        Ok(acc)
    }
}

fn fmt_real(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    if x.is_sign_negative() {
        write!(f, "(-{:?})", -x)
    } else {
        write!(f, "{:?}", x)
    }
}

fn fmt_lit(f: &mut fmt::Formatter<'_>, c: Complex64) -> fmt::Result {
    if c.im == 0.0 {
        return fmt_real(f, c.re);
    }
    if c.re == 0.0 {
        return if c.im < 0.0 {
            write!(f, "(-{:?}*i)", -c.im)
        } else {
            write!(f, "({:?}*i)", c.im)
        };
    }
    write!(f, "(")?;
    if c.re < 0.0 {
        write!(f, "-{:?}", -c.re)?;
    } else {
        write!(f, "{:?}", c.re)?;
    }
    if c.im < 0.0 {
        write!(f, " - {:?}*i)", -c.im)
    } else {
        write!(f, " + {:?}*i)", c.im)
    }
}

impl fmt::Display for ComplexExpr {
    /// Prints in the input grammar; binary operations are fully parenthesized
    /// so that printing and re-parsing reproduce the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.node {
            Node::Lit(c) => fmt_lit(f, *c),
            Node::Z => write!(f, "z"),
            Node::Zbar => write!(f, "zbar"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Div(a, b) => write!(f, "({a} / {b})"),
            Node::Pow(a, n) => {
                // `^` is right-associative, so a power base needs parentheses
                if matches!(a.node(), Node::Pow(..)) {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                if *n < 0 {
                    write!(f, "^(-{})", n.unsigned_abs())
                } else {
                    write!(f, "^{n}")
                }
            }
            Node::Call(func, a) => {
                let inner = a.to_string();
                // Avoid doubled parentheses around already-wrapped arguments.
                if inner.starts_with('(') && balanced_outer(&inner) {
                    write!(f, "{}{}", func.name(), inner)
                } else {
                    write!(f, "{}({})", func.name(), inner)
                }
            }
        }
    }
}

/// True when the first character's parenthesis closes at the very end.
fn balanced_outer(s: &str) -> bool {
    let mut depth = 0i32;
    for (k, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return k == s.len() - 1;
                }
            }
            _ => {}
        }
    }
    false
}

impl fmt::Debug for ComplexExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexExpr({self})")
    }
}

impl std::str::FromStr for ComplexExpr {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        parse(s)
    }
}
