use num_complex::Complex64;

use super::{ComplexExpr, Func, Node};
use crate::error::{Error, Result};

/// Which Wirtinger derivative to take.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Wrt {
    Z,
    Zbar,
}

impl Wrt {
    fn other(self) -> Wrt {
        match self {
            Wrt::Z => Wrt::Zbar,
            Wrt::Zbar => Wrt::Z,
        }
    }
}

/// Symbolic Wirtinger derivative, with `z` and `zbar` treated as
/// independent variables.
///
/// `abs` is rejected anywhere in the tree. The `zbar` derivative of a
/// holomorphic expression is the literal zero.
pub fn wirtinger(e: &ComplexExpr, which: Wrt) -> Result<ComplexExpr> {
    if e.contains_abs() {
        return Err(Error::UnsupportedNode("abs"));
    }
    Ok(diff(e, which))
}

fn zero() -> ComplexExpr {
    ComplexExpr::real(0.0)
}

fn one() -> ComplexExpr {
    ComplexExpr::real(1.0)
}

fn diff(e: &ComplexExpr, w: Wrt) -> ComplexExpr {
    if w == Wrt::Zbar && e.is_holomorphic() {
        return zero();
    }
    use ComplexExpr as E;
    match e.node() {
        Node::Lit(_) => zero(),
        Node::Z => {
            if w == Wrt::Z {
                one()
            } else {
                zero()
            }
        }
        Node::Zbar => {
            if w == Wrt::Zbar {
                one()
            } else {
                zero()
            }
        }
        Node::Neg(a) => {
            let da = diff(a, w);
            if da.is_zero() {
                da
            } else {
                E::neg(&da)
            }
        }
        Node::Add(a, b) => E::sum(&diff(a, w), &diff(b, w)),
        Node::Sub(a, b) => E::difference(&diff(a, w), &diff(b, w)),
        Node::Mul(a, b) => E::sum(&E::product(&diff(a, w), b), &E::product(a, &diff(b, w))),
        Node::Div(a, b) => {
            // a'/b - a b'/b^2
            let first = E::quotient(&diff(a, w), b);
            let db = diff(b, w);
            let second = E::quotient(&E::product(a, &db), &E::pow(b, 2));
            E::difference(&first, &second)
        }
        Node::Pow(a, n) => {
            if *n == 0 {
                return zero();
            }
            let outer = match n {
                1 => one(),
                2 => E::product(&E::real(2.0), a),
                _ => E::product(&E::real(*n as f64), &E::pow(a, n - 1)),
            };
            E::product(&outer, &diff(a, w))
        }
        Node::Call(f, a) => match f {
            Func::Conj => E::call(Func::Conj, &diff(a, w.other())),
            Func::Re => {
                let s = E::sum(&diff(a, w), &E::call(Func::Conj, &diff(a, w.other())));
                E::quotient(&s, &E::real(2.0))
            }
            Func::Im => {
                let s = E::difference(&diff(a, w), &E::call(Func::Conj, &diff(a, w.other())));
                E::quotient(&s, &E::lit(Complex64::new(0.0, 2.0)))
            }
            Func::Abs => unreachable!("abs rejected before differentiation"),
            _ => {
                let da = diff(a, w);
                if da.is_zero() {
                    return da;
                }
                let outer = match f {
                    Func::Exp => E::call(Func::Exp, a),
                    Func::Log => E::quotient(&one(), a),
                    Func::Sin => E::call(Func::Cos, a),
                    Func::Cos => E::neg(&E::call(Func::Sin, a)),
                    Func::Sqrt => E::quotient(&one(), &E::product(&E::real(2.0), &E::call(Func::Sqrt, a))),
                    _ => unreachable!(),
                };
                E::product(&outer, &da)
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn square_derivative() {
        let d = wirtinger(&parse("z^2").unwrap(), Wrt::Z).unwrap();
        assert_eq!(d, parse("2*z").unwrap());
        assert_eq!(d.eval(c(1.5, -2.0)).unwrap(), c(3.0, -4.0));
    }

    #[test]
    fn holomorphic_has_zero_zbar_derivative() {
        let d = wirtinger(&parse("z").unwrap(), Wrt::Zbar).unwrap();
        assert!(d.is_zero());
        let d = wirtinger(&parse("exp(z)/(1 + z^2)").unwrap(), Wrt::Zbar).unwrap();
        assert!(d.is_zero());
    }

    #[test]
    fn conj_rules() {
        let d = wirtinger(&parse("conj(z)").unwrap(), Wrt::Zbar).unwrap();
        assert_eq!(d.as_lit(), Some(c(1.0, 0.0)));
        let d = wirtinger(&parse("conj(z)").unwrap(), Wrt::Z).unwrap();
        assert!(d.is_zero());
        // |z|^2 = z zbar
        let d = wirtinger(&parse("z*zbar").unwrap(), Wrt::Zbar).unwrap();
        assert_eq!(d.eval(c(0.3, 0.7)).unwrap(), c(0.3, 0.7));
    }

    #[test]
    fn real_and_imaginary_parts() {
        // re z = (z + zbar)/2, im z = (z - zbar)/(2i)
        let p = c(0.4, -1.1);
        let dre = wirtinger(&parse("re(z)").unwrap(), Wrt::Z).unwrap();
        assert!((dre.eval(p).unwrap() - c(0.5, 0.0)).norm() < 1e-15);
        let dim = wirtinger(&parse("im(z)").unwrap(), Wrt::Zbar).unwrap();
        assert!((dim.eval(p).unwrap() - c(0.0, 0.5)).norm() < 1e-15);
        let dim = wirtinger(&parse("im(z)").unwrap(), Wrt::Z).unwrap();
        assert!((dim.eval(p).unwrap() - c(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn abs_is_rejected() {
        let err = wirtinger(&parse("z + abs(z)").unwrap(), Wrt::Z).unwrap_err();
        assert!(matches!(err, Error::UnsupportedNode("abs")));
    }
}
