//! Straight-line single-assignment programs.
//!
//! Lowering walks the tree in post-order and gives every internal node one
//! temporary. Leaves stay inline as operands. There is no common
//! subexpression elimination: the program executes exactly the operations
//! of the tree, in the order the tree interpreter performs them.

use std::fmt::Write;

use crate::expr::{BinOp, Expr, ExprKind, Func};
use crate::format::real_literal;

#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Operand {
    Input(usize),
    Int(i64),
    Float(f64),
    Temp(usize),
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Instr {
    Neg(Operand),
    Binary(BinOp, Operand, Operand),
    Call(Func, Operand),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub arity: usize,
    pub instrs: Vec<Instr>,
    pub result: Operand,
}

impl Program {
    pub fn lower(e: &Expr) -> Program {
        let mut instrs = Vec::with_capacity(e.operation_count());
        let result = lower_into(e, &mut instrs);
        Program {
            arity: e.arity(),
            instrs,
            result,
        }
    }

    /// Number of executed operations (arithmetic plus function calls).
    pub fn flop_count(&self) -> usize {
        self.instrs.len()
    }

    /// Count of instructions matching `pred`.
    pub fn count(&self, pred: impl Fn(&Instr) -> bool) -> usize {
        self.instrs.iter().filter(|i| pred(i)).count()
    }

    /// Execute the program directly. Used to cross-check lowering.
    pub fn run(&self, x: &[f64]) -> f64 {
        let mut temps = Vec::with_capacity(self.instrs.len());
        let get = |temps: &Vec<f64>, o: Operand| match o {
            Operand::Input(i) => x[i],
            Operand::Int(n) => n as f64,
            Operand::Float(v) => v,
            Operand::Temp(k) => temps[k],
        };
        for instr in &self.instrs {
            let v = match *instr {
                Instr::Neg(a) => -get(&temps, a),
                Instr::Binary(op, a, b) => op.apply(get(&temps, a), get(&temps, b)),
                Instr::Call(f, a) => f.apply(get(&temps, a)),
            };
            temps.push(v);
        }
        get(&temps, self.result)
    }
}

fn lower_into(e: &Expr, out: &mut Vec<Instr>) -> Operand {
    let instr = match e.kind() {
        ExprKind::Var(v) => return Operand::Input(v.0),
        ExprKind::Int(n) => return Operand::Int(*n),
        ExprKind::Real(x) => return Operand::Float(*x),
        ExprKind::Folded { value, .. } => return Operand::Float(*value),
        ExprKind::Neg(c) => Instr::Neg(lower_into(c, out)),
        ExprKind::Binary(op, l, r) => {
            let a = lower_into(l, out);
            let b = lower_into(r, out);
            Instr::Binary(*op, a, b)
        }
        ExprKind::Func(f, c) => Instr::Call(*f, lower_into(c, out)),
    };
    out.push(instr);
    Operand::Temp(out.len() - 1)
}

/// Operand spelling for the neutral dialect.
fn neutral_operand(o: Operand) -> String {
    match o {
        Operand::Input(i) => format!("x[{i}]"),
        Operand::Temp(k) => format!("t{k}"),
        Operand::Int(n) if n < 0 => format!("({n})"),
        Operand::Int(n) => n.to_string(),
        Operand::Float(v) if v.is_sign_negative() && !v.is_nan() => format!("({})", real_literal(v)),
        Operand::Float(v) => real_literal(v),
    }
}

/// Operand spelling for C. Every constant becomes an exact double literal.
fn c_operand(o: Operand) -> String {
    let lit = |v: f64| -> String {
        if v.is_nan() {
            "__builtin_nan(\"\")".into()
        } else if v.is_infinite() {
            if v > 0.0 { "__builtin_inf()".into() } else { "(-__builtin_inf())".into() }
        } else if v.is_sign_negative() {
            format!("({})", real_literal(v))
        } else {
            real_literal(v)
        }
    };
    match o {
        Operand::Input(i) => format!("x[{i}]"),
        Operand::Temp(k) => format!("t{k}"),
        Operand::Int(n) => lit(n as f64),
        Operand::Float(v) => lit(v),
    }
}

fn instr_text(instr: &Instr, operand: fn(Operand) -> String) -> String {
    match *instr {
        Instr::Neg(a) => format!("-{}", operand(a)),
        Instr::Binary(op, a, b) => format!("{} {} {}", operand(a), op.symbol(), operand(b)),
        Instr::Call(f, a) => format!("{}({})", f.name(), operand(a)),
    }
}

/// Neutral straight-line text: a header, one `t<k> = ...;` line per
/// operation, and a `return`.
pub fn emit_source(e: &Expr, name: &str) -> String {
    let program = Program::lower(e);
    let mut out = String::new();
    let _ = writeln!(out, "program {name}(x[0..{}])", program.arity);
    if !crate::simplify::is_normal_form(e) {
        let _ = writeln!(out, "// warning: input is not in simplifier normal form");
    }
    for (k, instr) in program.instrs.iter().enumerate() {
        let _ = writeln!(out, "t{k} = {};", instr_text(instr, neutral_operand));
    }
    let _ = writeln!(out, "return {};", neutral_operand(program.result));
    out
}

/// Just the statement list of [`emit_source`], joined with spaces.
pub fn emit_body(e: &Expr) -> String {
    let program = Program::lower(e);
    let mut parts: Vec<String> = program
        .instrs
        .iter()
        .enumerate()
        .map(|(k, i)| format!("t{k} = {};", instr_text(i, neutral_operand)))
        .collect();
    parts.push(format!("return {}", neutral_operand(program.result)));
    parts.join(" ")
}

/// A C99 function `double symbol(const double *x)` computing `program`.
pub(crate) fn emit_c_function(program: &Program, symbol: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "double {symbol}(const double *x)\n{{");
    if program.arity == 0 {
        let _ = writeln!(out, "    (void)x;");
    }
    for (k, instr) in program.instrs.iter().enumerate() {
        let _ = writeln!(out, "    const double t{k} = {};", instr_text(instr, c_operand));
    }
    let _ = writeln!(out, "    return {};\n}}\n", c_operand(program.result));
    out
}
