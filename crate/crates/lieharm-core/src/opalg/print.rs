//! Canonical text rendering of operator systems. `parse_system` of the output
//! reproduces the input AST structurally.

use super::{GenKind, Generator, OperatorExpr, ScalarLit, SystemDef};
use crate::exact::GaussRational;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt::Write;

pub fn format_system(sys: &SystemDef) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "group {}", sys.group.text());
    for (name, expr) in &sys.ops {
        let _ = writeln!(out, "{name} = {}", format_expr(expr));
    }
    out
}

fn format_expr(expr: &OperatorExpr) -> String {
    render(expr, 0)
}

// Precedence levels: 0 sum, 1 product, 2 power, 3 atom.
fn render(expr: &OperatorExpr, ctx: u8) -> String {
    let (text, level) = match expr {
        OperatorExpr::Scalar(lit) => (render_scalar(lit), 3),
        OperatorExpr::Gen(g) => (render_gen(g), 3),
        OperatorExpr::Sum(children) => {
            let body = children.iter().map(|c| render(c, 1)).collect::<Vec<_>>().join(" + ");
            (body, 0)
        }
        OperatorExpr::Prod(children) => {
            let body = children.iter().map(|c| render(c, 2)).collect::<Vec<_>>().join("*");
            (body, 1)
        }
        OperatorExpr::Pow(base, k) => (format!("{}^{}", render(base, 3), k), 2),
    };
    if level < ctx {
        format!("({text})")
    } else {
        text
    }
}

fn render_gen(g: &Generator) -> String {
    match g.kind {
        GenKind::Dx => format!("dx{}", g.factor),
        _ => format!("{}_{}", g.kind.name(), g.factor),
    }
}

fn render_rat(r: &BigRational) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn render_scalar(lit: &ScalarLit) -> String {
    match lit {
        ScalarLit::Pi => "pi".into(),
        ScalarLit::Sqrt(m) => format!("sqrt({m})"),
        ScalarLit::Liouville(b) => format!("liouville({b})"),
        ScalarLit::Rational(g) => render_gauss(g),
    }
}

fn render_gauss(g: &GaussRational) -> String {
    let GaussRational { re, im } = g;
    if im.is_zero() {
        if re.is_negative() {
            format!("({})", render_rat(re))
        } else {
            render_rat(re)
        }
    } else if re.is_zero() {
        if im.is_one() {
            "i".into()
        } else if im.is_negative() {
            if (-im).is_one() {
                "(-i)".into()
            } else {
                format!("({}i)", render_rat(im))
            }
        } else {
            format!("{}i", render_rat(im))
        }
    } else {
        let im_part = if im.is_one() {
            "+i".to_string()
        } else if (-im.clone()).is_one() {
            "-i".to_string()
        } else if im.is_negative() {
            format!("{}i", render_rat(im))
        } else {
            format!("+{}i", render_rat(im))
        };
        format!("({}{})", render_rat(re), im_part)
    }
}
