use super::{BinOp, Expr, ExprError, Func, Var};

// Folding constructors keep nested Lie derivatives from growing without bound.

fn is_num(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Num(n) if *n == v)
}

pub(crate) fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x + y),
        _ if is_num(&a, 0.0) => b,
        _ if is_num(&b, 0.0) => a,
        _ => Expr::Bin(BinOp::Add, Box::new(a), Box::new(b)),
    }
}

pub(crate) fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x - y),
        _ if is_num(&b, 0.0) => a,
        _ if is_num(&a, 0.0) => neg(b),
        _ => Expr::Bin(BinOp::Sub, Box::new(a), Box::new(b)),
    }
}

pub(crate) fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x * y),
        _ if is_num(&a, 0.0) || is_num(&b, 0.0) => Expr::Num(0.0),
        _ if is_num(&a, 1.0) => b,
        _ if is_num(&b, 1.0) => a,
        _ if is_num(&a, -1.0) => neg(b),
        _ if is_num(&b, -1.0) => neg(a),
        _ => Expr::Bin(BinOp::Mul, Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        _ if is_num(&a, 0.0) => Expr::Num(0.0),
        _ if is_num(&b, 1.0) => a,
        _ => Expr::Bin(BinOp::Div, Box::new(a), Box::new(b)),
    }
}

pub(crate) fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) => Expr::Num(if v == 0.0 { 0.0 } else { -v }),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

fn pow(a: Expr, n: i32) -> Expr {
    match n {
        0 => Expr::Num(1.0),
        1 => a,
        _ => Expr::Pow(Box::new(a), n),
    }
}

pub(super) fn derivative(e: &Expr, var: Var) -> Result<Expr, ExprError> {
    Ok(match e {
        Expr::Num(_) | Expr::Const(_) => Expr::Num(0.0),
        Expr::Var(v) => Expr::Num(if *v == var { 1.0 } else { 0.0 }),
        Expr::Neg(a) => neg(derivative(a, var)?),
        Expr::Func(f, a) => {
            let da = derivative(a, var)?;
            if is_num(&da, 0.0) && *f != Func::Abs {
                return Ok(Expr::Num(0.0));
            }
            let a = (**a).clone();
            match f {
                Func::Sin => mul(Expr::Func(Func::Cos, Box::new(a)), da),
                Func::Cos => neg(mul(Expr::Func(Func::Sin, Box::new(a)), da)),
                Func::Sqrt => div(da, mul(Expr::Num(2.0), Expr::Func(Func::Sqrt, Box::new(a)))),
                Func::Abs => return Err(ExprError::NotDifferentiable("abs")),
            }
        }
        Expr::Bin(op, a, b) => {
            let da = derivative(a, var)?;
            let db = derivative(b, var)?;
            match op {
                BinOp::Add => add(da, db),
                BinOp::Sub => sub(da, db),
                BinOp::Mul => add(mul(da, (**b).clone()), mul((**a).clone(), db)),
                BinOp::Div => {
                    if is_num(&db, 0.0) {
                        div(da, (**b).clone())
                    } else {
                        div(
                            sub(mul(da, (**b).clone()), mul((**a).clone(), db)),
                            pow((**b).clone(), 2),
                        )
                    }
                }
            }
        }
        Expr::Pow(a, n) => {
            if *n == 0 {
                return Ok(Expr::Num(0.0));
            }
            let da = derivative(a, var)?;
            mul(mul(Expr::Num(*n as f64), pow((**a).clone(), n - 1)), da)
        }
    })
}
