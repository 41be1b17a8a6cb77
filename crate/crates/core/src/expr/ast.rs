use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Abs,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    /// Every built-in takes one argument.
    pub fn arity(self) -> usize {
        1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    pub fn name(self) -> &'static str {
        match self {
            Constant::Pi => "pi",
            Constant::E => "e",
        }
    }
}

/// Expression tree over the single variable `x`.
///
/// Numeric literals keep their source spelling so that rendering and
/// re-parsing reproduce the same tree, and so that they can be rounded
/// afresh at any working precision.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Num(String),
    Var,
    Const(Constant),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn num(text: impl Into<String>) -> Self {
        Expr::Num(text.into())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn neg(inner: Expr) -> Self {
        Expr::Neg(Box::new(inner))
    }

    pub fn call(func: Func, arg: Expr) -> Self {
        Expr::Call(func, Box::new(arg))
    }

    pub fn contains_var(&self) -> bool {
        match self {
            Expr::Var => true,
            Expr::Num(_) | Expr::Const(_) => false,
            Expr::Neg(inner) | Expr::Call(_, inner) => inner.contains_var(),
            Expr::Binary(_, lhs, rhs) => lhs.contains_var() || rhs.contains_var(),
        }
    }

    pub fn count_calls(&self, func: Func) -> usize {
        match self {
            Expr::Var | Expr::Num(_) | Expr::Const(_) => 0,
            Expr::Neg(inner) => inner.count_calls(func),
            Expr::Call(f, inner) => usize::from(*f == func) + inner.count_calls(func),
            Expr::Binary(_, lhs, rhs) => lhs.count_calls(func) + rhs.count_calls(func),
        }
    }

    // Binding strength used by the renderer: 1 additive, 2 multiplicative,
    // 3 unary minus, 4 power, 5 atoms.
    fn level(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Binary(BinOp::Pow, ..) => 4,
            Expr::Num(_) | Expr::Var | Expr::Const(_) | Expr::Call(..) => 5,
        }
    }

    fn write_with_min(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.level() < min {
            write!(f, "(")?;
            self.write_bare(f)?;
            write!(f, ")")
        } else {
            self.write_bare(f)
        }
    }

    fn write_bare(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(text) => f.write_str(text),
            Expr::Var => f.write_str("x"),
            Expr::Const(c) => f.write_str(c.name()),
            Expr::Call(func, arg) => {
                write!(f, "{}(", func.name())?;
                arg.write_bare(f)?;
                write!(f, ")")
            }
            Expr::Neg(inner) => {
                write!(f, "-")?;
                inner.write_with_min(f, 4)
            }
            Expr::Binary(op, lhs, rhs) => {
                // The right operand of + - * / needs parentheses at its own level
                // because those operators associate to the left; the exponent of
                // ^ is a factor, which already admits unary minus and powers.
                let (lmin, rmin) = match op {
                    BinOp::Add | BinOp::Sub => (1, 2),
                    BinOp::Mul | BinOp::Div => (2, 3),
                    BinOp::Pow => (5, 3),
                };
                lhs.write_with_min(f, lmin)?;
                write!(f, " {} ", op.symbol())?;
                rhs.write_with_min(f, rmin)
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_bare(f)
    }
}
