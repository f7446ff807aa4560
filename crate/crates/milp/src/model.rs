//! Problem description shared by the LP and branch-and-bound layers.

use std::fmt::Write as _;

/// A decision variable. Every variable must carry finite bounds; the dual
/// simplex relies on boxed columns to keep the starting basis dual feasible.
#[derive(Debug, Clone, PartialEq)]
pub struct Var {
    pub name: String,
    pub lb: f64,
    pub ub: f64,
    pub obj: f64,
    pub integer: bool,
    /// Branching class. Lower classes are branched on first; `None` means the
    /// variable is never branched on even if it is integer.
    pub branch_class: Option<u8>,
}

/// A linear row `lo <= sum(coef * x) <= hi`. Either side may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub coefs: Vec<(usize, f64)>,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Model {
    pub vars: Vec<Var>,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    UnboundedVariable(String),
    EmptyRange(String),
    BadIndex(String),
}

impl std::fmt::Display for ModelError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelError::UnboundedVariable(n) => write!(f, "variable {n} has an infinite bound"),
            ModelError::EmptyRange(n) => write!(f, "{n} has lower bound above upper bound"),
            ModelError::BadIndex(n) => write!(f, "row {n} references a missing variable"),
        }
    }
}

impl std::error::Error for ModelError {}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lb: f64, ub: f64, obj: f64) -> usize {
        self.vars.push(Var {
            name: name.into(),
            lb,
            ub,
            obj,
            integer: false,
            branch_class: None,
        });
        self.vars.len() - 1
    }

    pub fn add_binary(&mut self, name: impl Into<String>, obj: f64, class: u8) -> usize {
        self.vars.push(Var {
            name: name.into(),
            lb: 0.0,
            ub: 1.0,
            obj,
            integer: true,
            branch_class: Some(class),
        });
        self.vars.len() - 1
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coefs: Vec<(usize, f64)>,
        lo: f64,
        hi: f64,
    ) -> usize {
        self.rows.push(Row {
            name: name.into(),
            coefs,
            lo,
            hi,
        });
        self.rows.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for v in &self.vars {
            if !v.lb.is_finite() || !v.ub.is_finite() {
                return Err(ModelError::UnboundedVariable(v.name.clone()));
            }
            if v.lb > v.ub {
                return Err(ModelError::EmptyRange(v.name.clone()));
            }
        }
        for r in &self.rows {
            if r.lo > r.hi {
                return Err(ModelError::EmptyRange(r.name.clone()));
            }
            if r.coefs.iter().any(|&(j, _)| j >= self.vars.len()) {
                return Err(ModelError::BadIndex(r.name.clone()));
            }
        }
        Ok(())
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.vars.iter().zip(x).map(|(v, xi)| v.obj * xi).sum()
    }

    pub fn row_activity(&self, row: usize, x: &[f64]) -> f64 {
        self.rows[row].coefs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Largest absolute bound or row violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (v, &xi) in self.vars.iter().zip(x) {
            worst = worst.max(v.lb - xi).max(xi - v.ub);
        }
        for i in 0..self.rows.len() {
            let act = self.row_activity(i, x);
            let r = &self.rows[i];
            worst = worst.max(r.lo - act).max(act - r.hi);
        }
        worst
    }

    /// CPLEX LP text rendering, for cross-checking instances with external
    /// solvers.
    pub fn to_lp_format(&self) -> String {
        let mut out = String::new();
        let name = |j: usize| sanitize(&self.vars[j].name, j);
        out.push_str("\\ generated by fbs-milp\nMinimize\n obj:");
        let mut any = false;
        for (j, v) in self.vars.iter().enumerate() {
            if v.obj != 0.0 {
                push_term(&mut out, v.obj, &name(j));
                any = true;
            }
        }
        if !any {
            out.push_str(" 0 ");
            out.push_str(&name(0));
        }
        out.push_str("\nSubject To\n");
        for (i, r) in self.rows.iter().enumerate() {
            let lhs = |out: &mut String, tag: &str| {
                let _ = write!(out, " {}{}:", sanitize(&r.name, i), tag);
                if r.coefs.is_empty() {
                    out.push_str(" 0 ");
                    out.push_str(&name(0));
                }
                for &(j, a) in &r.coefs {
                    push_term(out, a, &name(j));
                }
            };
            if r.lo == r.hi {
                lhs(&mut out, "");
                let _ = writeln!(out, " = {}", fmt_num(r.hi));
                continue;
            }
            if r.lo.is_finite() {
                lhs(&mut out, if r.hi.is_finite() { "_lo" } else { "" });
                let _ = writeln!(out, " >= {}", fmt_num(r.lo));
            }
            if r.hi.is_finite() {
                lhs(&mut out, if r.lo.is_finite() { "_hi" } else { "" });
                let _ = writeln!(out, " <= {}", fmt_num(r.hi));
            }
        }
        out.push_str("Bounds\n");
        for (j, v) in self.vars.iter().enumerate() {
            let _ = writeln!(
                out,
                " {} <= {} <= {}",
                fmt_num(v.lb),
                name(j),
                fmt_num(v.ub)
            );
        }
        let ints: Vec<String> = (0..self.vars.len())
            .filter(|&j| self.vars[j].integer)
            .map(name)
            .collect();
        if !ints.is_empty() {
            out.push_str("General\n");
            for chunk in ints.chunks(8) {
                let _ = writeln!(out, " {}", chunk.join(" "));
            }
        }
        out.push_str("End\n");
        out
    }
}

fn sanitize(name: &str, idx: usize) -> String {
    let s: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    match s.chars().next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => s,
        _ => format!("v{idx}_{s}"),
    }
}

fn push_term(out: &mut String, a: f64, name: &str) {
    if a < 0.0 {
        let _ = write!(out, " - {} {}", fmt_num(-a), name);
    } else {
        let _ = write!(out, " + {} {}", fmt_num(a), name);
    }
}

fn fmt_num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:?}")
    }
}
