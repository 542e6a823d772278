//! Closed-form expressions in the measures |Ω|, |Γ|, |∂Ω|.
//!
//! The oracle builds every constant as a `Form`, so the same tree serves as
//! the second evaluation (at the spec's measures) and as the symbolic side
//! of the dilation audit (at scaled measures).

use std::ops::{Add, Div, Mul};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measures {
    pub vol: f64,
    pub gamma: f64,
    pub bdry: f64,
}

impl Measures {
    /// Measures of λΩ in dimension n.
    pub fn dilated(&self, n: u32, lambda: f64) -> Measures {
        let vol = lambda.powi(n as i32);
        let surf = lambda.powi(n as i32 - 1);
        Measures {
            vol: self.vol * vol,
            gamma: self.gamma * surf,
            bdry: self.bdry * surf,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Form {
    Num(f64),
    Vol,
    Gamma,
    Bdry,
    Sum(Box<Form>, Box<Form>),
    Prod(Box<Form>, Box<Form>),
    Pow(Box<Form>, f64),
    Max(Box<Form>, Box<Form>),
}

pub use Form::{Bdry, Gamma, Vol};

pub fn num(x: f64) -> Form {
    Form::Num(x)
}

impl Form {
    pub fn eval(&self, m: &Measures) -> f64 {
        match self {
            Form::Num(x) => *x,
            Form::Vol => m.vol,
            Form::Gamma => m.gamma,
            Form::Bdry => m.bdry,
            Form::Sum(a, b) => a.eval(m) + b.eval(m),
            Form::Prod(a, b) => a.eval(m) * b.eval(m),
            Form::Pow(a, e) => a.eval(m).powf(*e),
            Form::Max(a, b) => a.eval(m).max(b.eval(m)),
        }
    }

    pub fn powf(self, e: f64) -> Form {
        match self {
            Form::Num(x) => Form::Num(x.powf(e)),
            other => Form::Pow(Box::new(other), e),
        }
    }

    pub fn sqrt(self) -> Form {
        self.powf(0.5)
    }

    pub fn max(self, other: Form) -> Form {
        match (self, other) {
            (Form::Num(a), Form::Num(b)) => Form::Num(a.max(b)),
            (a, b) => Form::Max(Box::new(a), Box::new(b)),
        }
    }

    /// Exponents `[a, b, c]` when the form is `k·|Ω|^a|Γ|^b|∂Ω|^c`.
    pub fn monomial(&self) -> Option<[f64; 3]> {
        match self {
            Form::Num(_) => Some([0.0; 3]),
            Form::Vol => Some([1.0, 0.0, 0.0]),
            Form::Gamma => Some([0.0, 1.0, 0.0]),
            Form::Bdry => Some([0.0, 0.0, 1.0]),
            Form::Prod(a, b) => {
                let (x, y) = (a.monomial()?, b.monomial()?);
                Some([x[0] + y[0], x[1] + y[1], x[2] + y[2]])
            }
            Form::Pow(a, e) => a.monomial().map(|x| x.map(|v| v * e)),
            Form::Sum(..) | Form::Max(..) => None,
        }
    }
}

impl From<f64> for Form {
    fn from(x: f64) -> Form {
        Form::Num(x)
    }
}

impl<T: Into<Form>> Add<T> for Form {
    type Output = Form;
    fn add(self, rhs: T) -> Form {
        match (self, rhs.into()) {
            (Form::Num(a), Form::Num(b)) => Form::Num(a + b),
            (Form::Num(z), b) if z == 0.0 => b,
            (a, Form::Num(z)) if z == 0.0 => a,
            (a, b) => Form::Sum(Box::new(a), Box::new(b)),
        }
    }
}

impl<T: Into<Form>> Mul<T> for Form {
    type Output = Form;
    fn mul(self, rhs: T) -> Form {
        match (self, rhs.into()) {
            (Form::Num(a), Form::Num(b)) => Form::Num(a * b),
            (a, b) => Form::Prod(Box::new(a), Box::new(b)),
        }
    }
}

impl<T: Into<Form>> Div<T> for Form {
    type Output = Form;
    fn div(self, rhs: T) -> Form {
        self * rhs.into().powf(-1.0)
    }
}

impl Add<Form> for f64 {
    type Output = Form;
    fn add(self, rhs: Form) -> Form {
        Form::Num(self) + rhs
    }
}

impl Mul<Form> for f64 {
    type Output = Form;
    fn mul(self, rhs: Form) -> Form {
        Form::Num(self) * rhs
    }
}

impl Div<Form> for f64 {
    type Output = Form;
    fn div(self, rhs: Form) -> Form {
        Form::Num(self) / rhs
    }
}
