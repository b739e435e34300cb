//! Evaluation of parsed expressions against the series constructors.

use std::cell::RefCell;

use donaldson_core::modforms::bracket;
use donaldson_core::series::with_output_trunc;
use donaldson_core::{Error, QExp, Rat};

use crate::expr::{line_col, Expr, ExprKind, Span};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Series(QExp),
    Scalar(Rat),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{line}:{column}: {source}")]
pub struct EvalError {
    pub line: usize,
    pub column: usize,
    pub span: Span,
    #[source]
    pub source: Error,
}

struct Ctx<'a> {
    src: &'a str,
}

impl Ctx<'_> {
    fn fail(&self, span: Span, source: Error) -> EvalError {
        let (line, column) = line_col(self.src, span.start);
        EvalError { line, column, span, source }
    }

    fn wrap<T>(&self, span: Span, r: Result<T, Error>) -> Result<T, EvalError> {
        r.map_err(|e| self.fail(span, e))
    }

    /// Evaluates with every named series built at input truncation `t`.
    fn at_input(&self, e: &Expr, t: i64) -> Result<Value, EvalError> {
        use Value::{Scalar, Series};
        let s = e.span;
        Ok(match &e.kind {
            ExprKind::Name(n) => Series(self.wrap(s, n.build(t))?),
            ExprKind::IntLit(n) => Scalar(Rat::from(*n)),
            ExprKind::RatLit(r) => Scalar(r.clone()),
            ExprKind::Neg(a) => match self.at_input(a, t)? {
                Series(f) => Series(f.neg()),
                Scalar(c) => Scalar(-c),
            },
            ExprKind::Add(a, b) | ExprKind::Sub(a, b) => {
                let neg = matches!(e.kind, ExprKind::Sub(..));
                let (x, y) = (self.at_input(a, t)?, self.at_input(b, t)?);
                let y = match (neg, y) {
                    (false, y) => y,
                    (true, Series(g)) => Series(g.neg()),
                    (true, Scalar(c)) => Scalar(-c),
                };
                match (x, y) {
                    (Scalar(c), Scalar(d)) => Scalar(c + d),
                    (Series(f), Series(g)) => Series(f.add(&g)),
                    (Series(f), Scalar(c)) | (Scalar(c), Series(f)) => {
                        Series(f.add(&QExp::constant(c, f.trunc().max(1))))
                    }
                }
            }
            ExprKind::Mul(a, b) => match (self.at_input(a, t)?, self.at_input(b, t)?) {
                (Scalar(c), Scalar(d)) => Scalar(c * d),
                (Series(f), Series(g)) => Series(f.mul(&g)),
                (Series(f), Scalar(c)) | (Scalar(c), Series(f)) => Series(f.mul_scalar(&c)),
            },
            ExprKind::Div(a, b) => {
                // the divisor goes first so a vanishing one fails before the numerator is built
                match self.at_input(b, t)? {
                    Scalar(d) if d.is_zero() => {
                        return Err(self.fail(b.span, Error::InvalidArgument("division by zero".into())))
                    }
                    Scalar(d) => match self.at_input(a, t)? {
                        Scalar(c) => Scalar(c / d),
                        Series(f) => Series(f.mul_scalar(&d.recip())),
                    },
                    Series(g) => {
                        let inv = self.wrap(b.span, g.inverse())?;
                        match self.at_input(a, t)? {
                            Scalar(c) => Series(inv.mul_scalar(&c)),
                            Series(f) => Series(f.mul(&inv)),
                        }
                    }
                }
            }
            ExprKind::PowInt(a, k) => match self.at_input(a, t)? {
                Scalar(c) if c.is_zero() && *k < 0 => {
                    return Err(self.fail(s, Error::InvalidArgument("zero to a negative power".into())))
                }
                Scalar(c) => Scalar(c.pow(self.wrap(s, small_exponent(*k))?)),
                Series(f) => Series(self.wrap(s, f.pow_int(*k))?),
            },
            ExprKind::Scale(a, k) => match self.at_input(a, t)? {
                Series(f) => Series(f.scale_q(*k)),
                c => c,
            },
            ExprKind::Deriv(a) => match self.at_input(a, t)? {
                Series(f) => Series(f.q_derivative()),
                Scalar(_) => Scalar(Rat::zero()),
            },
            ExprKind::Bracket(a, l) => match self.at_input(a, t)? {
                Series(f) => Series(bracket(&f, *l)),
                Scalar(c) => Series(bracket(&QExp::constant(c, t.max(1)), *l)),
            },
            ExprKind::Coeff(a, exp) => Scalar(self.coefficient(a, *exp)?),
        })
    }

    fn coefficient(&self, e: &Expr, exp: i64) -> Result<Rat, EvalError> {
        if is_scalar(e) {
            return match self.at_input(e, 1)? {
                Value::Scalar(c) if exp == 0 => Ok(c),
                _ => Ok(Rat::zero()),
            };
        }
        let f = self.series(e, exp + 1)?;
        self.wrap(e.span, f.coefficient(exp))
    }

    /// A series-valued `e`, exact below `trunc`.
    fn series(&self, e: &Expr, trunc: i64) -> Result<QExp, EvalError> {
        let last_err = RefCell::new(None);
        let r = with_output_trunc(trunc, |t| match self.at_input(e, t) {
            Ok(Value::Series(f)) => Ok(f),
            Ok(Value::Scalar(c)) => Ok(QExp::constant(c, t.max(trunc))),
            Err(err) => {
                let source = err.source.clone();
                *last_err.borrow_mut() = Some(err);
                Err(source)
            }
        });
        r.map_err(|source| last_err.into_inner().unwrap_or_else(|| self.fail(e.span, source)))
    }
}

/// True if `e` evaluates to a number rather than a series.
fn is_scalar(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::IntLit(_) | ExprKind::RatLit(_) | ExprKind::Coeff(..) => true,
        ExprKind::Name(_) | ExprKind::Bracket(..) => false,
        ExprKind::Neg(a) | ExprKind::PowInt(a, _) | ExprKind::Scale(a, _) | ExprKind::Deriv(a) => is_scalar(a),
        ExprKind::Add(a, b) | ExprKind::Sub(a, b) | ExprKind::Mul(a, b) | ExprKind::Div(a, b) => {
            is_scalar(a) && is_scalar(b)
        }
    }
}

fn small_exponent(k: i64) -> Result<i32, Error> {
    i32::try_from(k).map_err(|_| Error::InvalidArgument(format!("exponent {k} out of range")))
}

/// Evaluates `expr` (parsed from `src`). Series results are exact below
/// `trunc`; expressions built from literals and `coeff` yield scalars.
pub fn evaluate(expr: &Expr, src: &str, trunc: i64) -> Result<Value, EvalError> {
    let ctx = Ctx { src };
    if is_scalar(expr) {
        ctx.at_input(expr, 1)
    } else {
        ctx.series(expr, trunc).map(Value::Series)
    }
}
