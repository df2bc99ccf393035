//! Concrete-syntax rendering of terms and actions. Output of [`pp`] on
//! parser-produced terms round-trips through the parser.

use crate::term::{Action, Prefix, Process, Rat};

/// Renders a probability. Whole numbers print without a denominator.
pub fn pp_prob(r: &Rat) -> String {
    r.to_string()
}

pub fn pp_action(a: &Action) -> String {
    match a {
        Action::Input(x, y) => format!("{}?({})", x.text(), y.text()),
        Action::FreeOutput(x, y) => format!("{}!{}", x.text(), y.text()),
        Action::BoundOutput(x, y) => format!("{}!({})", x.text(), y.text()),
        Action::Tau(None) => "tau".to_string(),
        Action::Tau(Some(l)) => format!("tau[{l}]"),
    }
}

/// Pretty-prints a process in the concrete grammar.
pub fn pp(p: &Process) -> String {
    let mut s = String::new();
    write_proc(p, &mut s);
    s
}

fn is_atomic(p: &Process) -> bool {
    matches!(p, Process::Output(..) | Process::Var(_)) || p.is_nil()
}

fn write_proc(p: &Process, out: &mut String) {
    // Top level: parallel composition, loosest.
    match p {
        Process::Par(l, r) => {
            write_par_component(l, out);
            out.push_str(" | ");
            write_par_component(r, out);
        }
        _ => write_term(p, out),
    }
}

fn write_par_component(p: &Process, out: &mut String) {
    match p {
        Process::Par(..) => write_proc(p, out),
        Process::Sum(bs) if bs.len() > 1 => {
            out.push('(');
            write_term(p, out);
            out.push(')');
        }
        _ => write_term(p, out),
    }
}

fn write_term(p: &Process, out: &mut String) {
    match p {
        Process::Output(x, y) => {
            out.push_str(&x.text());
            out.push('!');
            out.push_str(&y.text());
        }
        Process::Sum(bs) => {
            if bs.is_empty() {
                out.push('0');
                return;
            }
            for (i, b) in bs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" + ");
                }
                out.push_str(&pp_prob(&b.prob));
                out.push_str(": ");
                match &b.prefix {
                    Prefix::Input(x, f) => {
                        out.push_str(&format!("{}?({})", x.text(), f.text()));
                    }
                    Prefix::Tau(None) => out.push_str("tau"),
                    Prefix::Tau(Some(l)) => out.push_str(&format!("tau[{l}]")),
                }
                out.push_str(". ");
                if is_atomic(&b.cont) {
                    write_term(&b.cont, out);
                } else {
                    out.push('(');
                    write_proc(&b.cont, out);
                    out.push(')');
                }
            }
        }
        Process::Par(..) => {
            out.push('(');
            write_proc(p, out);
            out.push(')');
        }
        Process::Res(..) => {
            // Collapse nested restrictions.
            let mut names = Vec::new();
            let mut body = p;
            while let Process::Res(n, b) = body {
                names.push(n.text());
                body = b;
            }
            out.push_str("new ");
            out.push_str(&names.join(" "));
            out.push_str(" in ");
            if matches!(body, Process::Par(..)) {
                out.push('(');
                write_proc(body, out);
                out.push(')');
            } else {
                write_term(body, out);
            }
        }
        Process::Var(x) => out.push_str(&x.0),
        Process::Rec(x, body) => {
            out.push_str("rec ");
            out.push_str(&x.0);
            out.push_str(". ");
            if matches!(&**body, Process::Par(..)) {
                out.push('(');
                write_proc(body, out);
                out.push(')');
            } else {
                write_term(body, out);
            }
        }
        Process::If(c, t, e) => {
            out.push_str("if ");
            out.push_str(&c.text());
            out.push_str(" then ");
            if is_atomic(t) {
                write_term(t, out);
            } else {
                out.push('(');
                write_proc(t, out);
                out.push(')');
            }
            out.push_str(" else ");
            if is_atomic(e) {
                write_term(e, out);
            } else {
                out.push('(');
                write_proc(e, out);
                out.push(')');
            }
        }
    }
}
