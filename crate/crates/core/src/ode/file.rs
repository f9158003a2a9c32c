//! Line-based text form of [`OdeSystem`]s.
//!
//! ```text
//! # optional header comments
//! system NAME
//! state f g
//! param y
//! wrt x | wrt len(x) | wrt L=NAME
//! init f = EXPR
//! deriv f = EXPR
//! bound f = EXPR
//! ```
//!
//! `wrt L=NAME` takes the derivative along a registered level function in
//! the variable `x`; `wrt L=NAME(v)` names a different variable. Printing
//! then parsing gives back the same system, header included.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use super::{DerivVar, Kind, OdeSystem};
use crate::expr::{parse_expr, Expr};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct FileError {
    /// 1-based; `0` for errors about the system as a whole.
    pub line: usize,
    pub message: String,
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_wrt(arg: &str) -> Option<DerivVar> {
    let arg = arg.trim();
    if let Some(rest) = arg.strip_prefix("L=") {
        let (spec, var) = match rest.split_once('(') {
            Some((spec, var)) => (spec, var.strip_suffix(')')?),
            None => (rest, "x"),
        };
        return (is_ident(spec) && is_ident(var))
            .then(|| DerivVar::Named { var: var.to_string(), spec: spec.to_string() });
    }
    if let Some(var) = arg.strip_prefix("len(").and_then(|r| r.strip_suffix(')')) {
        return is_ident(var).then(|| DerivVar::Length(var.to_string()));
    }
    is_ident(arg).then(|| DerivVar::Plain(arg.to_string()))
}

/// Parse the text form of a system.
pub fn parse_system(text: &str) -> Result<OdeSystem, FileError> {
    let mut header = Vec::new();
    let mut name = None;
    let mut state: Option<Vec<String>> = None;
    let mut params: Option<Vec<String>> = None;
    let mut deriv = None;
    let mut init: HashMap<String, (usize, Expr)> = HashMap::new();
    let mut rhs: HashMap<String, (usize, Expr)> = HashMap::new();
    let mut bounds: HashMap<String, (usize, Expr)> = HashMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |message: String| FileError { line, message };
        let (content, comment) = match raw.split_once('#') {
            Some((c, comment)) => (c.trim(), Some(comment)),
            None => (raw.trim(), None),
        };
        if content.is_empty() {
            if let (Some(comment), None) = (comment, &name) {
                header.push(comment.strip_prefix(' ').unwrap_or(comment).to_string());
            }
            continue;
        }
        let (keyword, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        let rest = rest.trim();
        if keyword != "system" && name.is_none() {
            return Err(err("expected `system NAME` first".into()));
        }
        match keyword {
            "system" => {
                if name.is_some() {
                    return Err(err("duplicate `system` line".into()));
                }
                if !is_ident(rest) {
                    return Err(err(format!("bad system name `{rest}`")));
                }
                name = Some(rest.to_string());
            }
            "state" | "param" => {
                let slot = if keyword == "state" { &mut state } else { &mut params };
                if slot.is_some() {
                    return Err(err(format!("duplicate `{keyword}` line")));
                }
                let names: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                if let Some(bad) = names.iter().find(|n| !is_ident(n)) {
                    return Err(err(format!("bad name `{bad}`")));
                }
                *slot = Some(names);
            }
            "wrt" => {
                if deriv.is_some() {
                    return Err(err("duplicate `wrt` line".into()));
                }
                deriv = Some(parse_wrt(rest).ok_or_else(|| err(format!("bad derivation variable `{rest}`")))?);
            }
            "init" | "deriv" | "bound" => {
                let (target, expr) = rest
                    .split_once('=')
                    .ok_or_else(|| err(format!("expected `{keyword} NAME = EXPR`")))?;
                let target = target.trim();
                let expr = parse_expr(expr).map_err(|e| err(e.to_string()))?;
                let table = match keyword {
                    "init" => &mut init,
                    "deriv" => &mut rhs,
                    _ => &mut bounds,
                };
                if table.insert(target.to_string(), (line, expr)).is_some() {
                    return Err(err(format!("duplicate `{keyword}` for `{target}`")));
                }
            }
            other => return Err(err(format!("unknown directive `{other}`"))),
        }
    }

    let whole = |message: String| FileError { line: 0, message };
    let name = name.ok_or_else(|| whole("missing `system` line".into()))?;
    let state = state.ok_or_else(|| whole("missing `state` line".into()))?;
    let deriv = deriv.ok_or_else(|| whole("missing `wrt` line".into()))?;
    let params = params.unwrap_or_default();

    let take = |table: &mut HashMap<String, (usize, Expr)>, keyword: &str| {
        let out = state
            .iter()
            .map(|s| table.remove(s).map(|(_, e)| e).ok_or_else(|| whole(format!("missing `{keyword} {s}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        match table.drain().min_by_key(|(_, (line, _))| *line) {
            Some((target, (line, _))) => Err(FileError { line, message: format!("`{target}` is not a state variable") }),
            None => Ok(out),
        }
    };
    let init = take(&mut init, "init")?;
    let rhs = take(&mut rhs, "deriv")?;
    let bounds = if bounds.is_empty() { None } else { Some(take(&mut bounds, "bound")?) };

    OdeSystem::new(name, state, params, deriv, init, rhs, bounds)
        .map(|s| s.with_header(header))
        .map_err(|e| whole(e.to_string()))
}

impl fmt::Display for OdeSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in &self.header {
            if line.is_empty() {
                writeln!(f, "#")?;
            } else {
                writeln!(f, "# {line}")?;
            }
        }
        writeln!(f, "system {}", self.name)?;
        writeln!(f, "state {}", self.state.join(" "))?;
        if !self.params.is_empty() {
            writeln!(f, "param {}", self.params.join(" "))?;
        }
        match &self.deriv {
            DerivVar::Plain(v) => writeln!(f, "wrt {v}")?,
            DerivVar::Length(v) => writeln!(f, "wrt len({v})")?,
            DerivVar::Named { var, spec } if var == "x" => writeln!(f, "wrt L={spec}")?,
            DerivVar::Named { var, spec } => writeln!(f, "wrt L={spec}({var})")?,
        }
        for (s, e) in self.state.iter().zip(&self.init) {
            writeln!(f, "init {s} = {e}")?;
        }
        for (s, e) in self.state.iter().zip(&self.rhs) {
            writeln!(f, "deriv {s} = {e}")?;
        }
        if let Kind::Bounded(bounds) = &self.kind {
            for (s, e) in self.state.iter().zip(bounds) {
                writeln!(f, "bound {s} = {e}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LENPROD: &str = "\
# 2^(len(x) * len(y))
system lenprod
state f
param y
wrt len(x)
init f = 1
deriv f = f*(pow2(len(y)) - 1)
";

    #[test]
    fn parses_and_prints_identically() {
        let sys = parse_system(LENPROD).unwrap();
        assert_eq!(sys.kind, Kind::LinearLengthOde);
        assert_eq!(sys.header, vec!["2^(len(x) * len(y))".to_string()]);
        assert_eq!(sys.to_string(), LENPROD);
    }

    #[test]
    fn kinds_from_directives() {
        let bounded = "system b\nstate f\nwrt x\ninit f = 0\nderiv f = 1\nbound f = x\n";
        let sys = parse_system(bounded).unwrap();
        assert!(matches!(sys.kind, Kind::Bounded(_)));
        assert_eq!(sys.to_string(), bounded);

        let named = "system n\nstate f\nwrt L=len_sq\ninit f = 1\nderiv f = f\n";
        let sys = parse_system(named).unwrap();
        assert_eq!(sys.kind, Kind::LOde);
        assert_eq!(sys.deriv, DerivVar::Named { var: "x".into(), spec: "len_sq".into() });
        assert_eq!(sys.to_string(), named);

        let other_var = "system n\nstate f\nwrt L=isqrt(s)\ninit f = 1\nderiv f = f + s\n";
        assert_eq!(parse_system(other_var).unwrap().to_string(), other_var);
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "system c # trailing\n\nstate f g\n# inner comment\nwrt t\ninit g = 2\ninit f = 1\nderiv g = g\nderiv f = f*g\n";
        let sys = parse_system(text).unwrap();
        assert_eq!(sys.state, vec!["f", "g"]);
        assert_eq!(sys.kind, Kind::Plain);
        assert!(sys.header.is_empty());
        let again = parse_system(&sys.to_string()).unwrap();
        assert_eq!(again, sys);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_system("state f\n").unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse_system("system a\nstate f\nwrt x\ninit f = 1 +\nderiv f = 1\n").unwrap_err();
        assert_eq!(e.line, 4);
        let e = parse_system("system a\nstate f\nwrt x\ninit f = 1\n").unwrap_err();
        assert_eq!(e.line, 0);
        let e = parse_system("system a\nstate f\nwrt x\ninit f = 1\nderiv f = 1\nderiv g = 2\n").unwrap_err();
        assert_eq!(e.line, 6);
        let e = parse_system("system a\nstate f\nwrt len(\ninit f = 1\nderiv f = 1\n").unwrap_err();
        assert_eq!(e.line, 3);
        let e = parse_system("system a\nstate f\nwrt x\ninit f = 1\nderiv f = 1\nfrobnicate\n").unwrap_err();
        assert_eq!(e.line, 6);
        let e = parse_system("system a\nstate f\nwrt x\ninit f = 1\nderiv f = q\n").unwrap_err();
        assert_eq!(e.line, 0);
    }
}
