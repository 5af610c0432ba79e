//! Queries over a compiled extended minimal network.
//!
//! A formula is a Boolean combination of comparisons such as
//! `X2 < X1 and not (X4 = 2)`. Formulas mentioning at most k variables are
//! answered from the single covering relation of the compiled network;
//! larger ones fall back to a budgeted search and are labeled best effort.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::compile::{compare_with, Direction, ExtendedConstraint, ExtendedNetwork};
use crate::error::{Error, Result};
use crate::search::{SearchModel, SearchStatus, DEFAULT_BUDGET};
use crate::value::{PartialAssignment, Tuple, Value, VariableId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Operand {
    Var(String),
    Const(Value),
    /// Smallest or largest value the variable takes in any solution.
    Extremum(Direction, String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    True,
    False,
    Cmp(Operand, CmpOp, Operand),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub formula: Formula,
}

impl std::str::FromStr for Query {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Query::parse(s)
    }
}

impl Query {
    pub fn parse(text: &str) -> Result<Query> {
        let tokens = tokenize(text)?;
        let mut p = Parser { tokens, pos: 0 };
        let formula = p.disjunction()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Query(format!(
                "unexpected {} after the end of the formula",
                p.tokens[p.pos].describe()
            )));
        }
        Ok(Query { formula })
    }

    pub fn always() -> Query {
        Query {
            formula: Formula::True,
        }
    }

    /// Conjunction of `var = value` for every pinned variable.
    pub fn from_assignment(pinned: &PartialAssignment) -> Query {
        let formula = pinned
            .iter()
            .map(|(v, x)| {
                Formula::Cmp(
                    Operand::Var(v.name().to_string()),
                    CmpOp::Eq,
                    Operand::Const(x.clone()),
                )
            })
            .reduce(|a, b| Formula::And(Box::new(a), Box::new(b)))
            .unwrap_or(Formula::True);
        Query { formula }
    }

    /// Names of the variables the formula reads. `min(X)` and `max(X)` are
    /// constants and do not count.
    pub fn vars(&self) -> BTreeSet<String> {
        fn walk(f: &Formula, out: &mut BTreeSet<String>) {
            match f {
                Formula::True | Formula::False => {}
                Formula::Cmp(a, _, b) => {
                    for o in [a, b] {
                        if let Operand::Var(v) = o {
                            out.insert(v.clone());
                        }
                    }
                }
                Formula::Not(x) => walk(x, out),
                Formula::And(x, y) | Formula::Or(x, y) => {
                    walk(x, out);
                    walk(y, out);
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(&self.formula, &mut out);
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Ident(String),
    Int(i64),
    Str(String),
    Op(CmpOp),
    LParen,
    RParen,
    And,
    Or,
    Not,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Ident(s) => format!("identifier {s}"),
            Token::Int(n) => format!("number {n}"),
            Token::Str(s) => format!("string {s:?}"),
            Token::Op(o) => format!("operator {}", o.symbol()),
            Token::LParen => "'('".into(),
            Token::RParen => "')'".into(),
            Token::And => "'and'".into(),
            Token::Or => "'or'".into(),
            Token::Not => "'not'".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        match c {
            c if c.is_whitespace() => i += 1,
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            '=' => {
                out.push(Token::Op(CmpOp::Eq));
                i += if next == Some('=') { 2 } else { 1 };
            }
            '≠' => {
                out.push(Token::Op(CmpOp::Ne));
                i += 1;
            }
            '≤' => {
                out.push(Token::Op(CmpOp::Le));
                i += 1;
            }
            '≥' => {
                out.push(Token::Op(CmpOp::Ge));
                i += 1;
            }
            '¬' => {
                out.push(Token::Not);
                i += 1;
            }
            '∧' => {
                out.push(Token::And);
                i += 1;
            }
            '∨' => {
                out.push(Token::Or);
                i += 1;
            }
            '!' if next == Some('=') => {
                out.push(Token::Op(CmpOp::Ne));
                i += 2;
            }
            '!' => {
                out.push(Token::Not);
                i += 1;
            }
            '&' if next == Some('&') => {
                out.push(Token::And);
                i += 2;
            }
            '|' if next == Some('|') => {
                out.push(Token::Or);
                i += 2;
            }
            '<' => {
                let (op, w) = match next {
                    Some('=') => (CmpOp::Le, 2),
                    Some('>') => (CmpOp::Ne, 2),
                    _ => (CmpOp::Lt, 1),
                };
                out.push(Token::Op(op));
                i += w;
            }
            '>' => {
                let (op, w) = if next == Some('=') { (CmpOp::Ge, 2) } else { (CmpOp::Gt, 1) };
                out.push(Token::Op(op));
                i += w;
            }
            '"' | '\'' => {
                let end = chars[i + 1..]
                    .iter()
                    .position(|&x| x == c)
                    .ok_or_else(|| Error::Query(format!("unterminated string at column {}", i + 1)))?;
                out.push(Token::Str(chars[i + 1..i + 1 + end].iter().collect()));
                i += end + 2;
            }
            c if c.is_ascii_digit() || (c == '-' && next.is_some_and(|d| d.is_ascii_digit())) => {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let n = s
                    .parse()
                    .map_err(|_| Error::Query(format!("number {s} is out of range")))?;
                out.push(Token::Int(n));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_alphanumeric() || matches!(chars[i], '_' | '#' | '^' | '.'))
                {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                out.push(match word.to_ascii_lowercase().as_str() {
                    "and" => Token::And,
                    "or" => Token::Or,
                    "not" => Token::Not,
                    _ => Token::Ident(word),
                });
            }
            c => {
                return Err(Error::Query(format!(
                    "unexpected character {c:?} at column {}",
                    i + 1
                )))
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Result<Token> {
        let t = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::Query("unexpected end of formula".into()))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, want: Token) -> Result<()> {
        let t = self.next()?;
        if t == want {
            Ok(())
        } else {
            Err(Error::Query(format!(
                "expected {} but found {}",
                want.describe(),
                t.describe()
            )))
        }
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut f = self.conjunction()?;
        while self.peek() == Some(&Token::Or) {
            self.pos += 1;
            f = Formula::Or(Box::new(f), Box::new(self.conjunction()?));
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut f = self.negation()?;
        while self.peek() == Some(&Token::And) {
            self.pos += 1;
            f = Formula::And(Box::new(f), Box::new(self.negation()?));
        }
        Ok(f)
    }

    fn negation(&mut self) -> Result<Formula> {
        match self.peek() {
            Some(Token::Not) => {
                self.pos += 1;
                Ok(Formula::Not(Box::new(self.negation()?)))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let f = self.disjunction()?;
                self.expect(Token::RParen)?;
                Ok(f)
            }
            Some(Token::Ident(w)) if w.eq_ignore_ascii_case("true") => {
                self.pos += 1;
                Ok(Formula::True)
            }
            Some(Token::Ident(w)) if w.eq_ignore_ascii_case("false") => {
                self.pos += 1;
                Ok(Formula::False)
            }
            _ => {
                let a = self.operand()?;
                let op = match self.next()? {
                    Token::Op(op) => op,
                    t => {
                        return Err(Error::Query(format!(
                            "expected a comparison operator but found {}",
                            t.describe()
                        )))
                    }
                };
                let b = self.operand()?;
                Ok(Formula::Cmp(a, op, b))
            }
        }
    }

    fn operand(&mut self) -> Result<Operand> {
        match self.next()? {
            Token::Int(n) => Ok(Operand::Const(Value::Number(n))),
            Token::Str(s) => Ok(Operand::Const(Value::sym(&s))),
            Token::Ident(name) => {
                let dir = match name.to_ascii_lowercase().as_str() {
                    "min" => Some(Direction::Min),
                    "max" => Some(Direction::Max),
                    _ => None,
                };
                match (dir, self.peek()) {
                    (Some(d), Some(Token::LParen)) => {
                        self.pos += 1;
                        let var = match self.next()? {
                            Token::Ident(v) => v,
                            t => {
                                return Err(Error::Query(format!(
                                    "expected a variable inside {name}( ) but found {}",
                                    t.describe()
                                )))
                            }
                        };
                        self.expect(Token::RParen)?;
                        Ok(Operand::Extremum(d, var))
                    }
                    _ => Ok(Operand::Var(name)),
                }
            }
            t => Err(Error::Query(format!(
                "expected a variable or constant but found {}",
                t.describe()
            ))),
        }
    }
}

#[derive(Clone, Debug)]
enum BoundOperand {
    Col(usize),
    Const(Value),
    /// min/max of a variable with no solution value; every comparison with it fails.
    Undefined,
}

#[derive(Clone, Debug)]
enum Bound {
    Const(bool),
    Cmp(BoundOperand, CmpOp, BoundOperand),
    Not(Box<Bound>),
    And(Box<Bound>, Box<Bound>),
    Or(Box<Bound>, Box<Bound>),
}

/// Resolves names to variables and `min`/`max` to constants read from the
/// unary relations of `m`. Columns index full tuples of `m.base`.
fn bind(m: &ExtendedNetwork, f: &Formula) -> Result<Bound> {
    let operand = |o: &Operand| -> Result<BoundOperand> {
        Ok(match o {
            Operand::Var(v) => BoundOperand::Col(lookup(m, v)?.rank() as usize),
            Operand::Const(c) => BoundOperand::Const(c.clone()),
            Operand::Extremum(d, v) => {
                let var = lookup(m, v)?.clone();
                let scope = crate::value::Scope::new(vec![var])?;
                let values = m
                    .base
                    .constraint(&scope)
                    .map(|r| r.column_values(0))
                    .unwrap_or_else(|| m.base.domain(&scope.vars()[0]).to_vec());
                let pick = match d {
                    Direction::Min => values.into_iter().min(),
                    Direction::Max => values.into_iter().max(),
                };
                pick.map_or(BoundOperand::Undefined, BoundOperand::Const)
            }
        })
    };
    Ok(match f {
        Formula::True => Bound::Const(true),
        Formula::False => Bound::Const(false),
        Formula::Cmp(a, op, b) => Bound::Cmp(operand(a)?, *op, operand(b)?),
        Formula::Not(x) => Bound::Not(Box::new(bind(m, x)?)),
        Formula::And(x, y) => Bound::And(Box::new(bind(m, x)?), Box::new(bind(m, y)?)),
        Formula::Or(x, y) => Bound::Or(Box::new(bind(m, x)?), Box::new(bind(m, y)?)),
    })
}

fn lookup<'a>(m: &'a ExtendedNetwork, name: &str) -> Result<&'a VariableId> {
    m.base
        .var(name)
        .ok_or_else(|| Error::Query(format!("unknown variable {name}")))
}

fn compare(a: &Value, op: CmpOp, b: &Value) -> Result<bool> {
    let ord = match op {
        CmpOp::Eq => return Ok(a == b),
        CmpOp::Ne => return Ok(a != b),
        _ => match (a, b) {
            (Value::Number(x), Value::Number(y)) => x.cmp(y),
            _ => {
                return Err(Error::Query(format!(
                    "cannot order {a:?} and {b:?}: ordering comparisons need numbers"
                )))
            }
        },
    };
    Ok(match op {
        CmpOp::Lt => ord == Ordering::Less,
        CmpOp::Le => ord != Ordering::Greater,
        CmpOp::Gt => ord == Ordering::Greater,
        _ => ord != Ordering::Less,
    })
}

/// Evaluates against a (possibly partial) assignment given by `get`.
fn eval(f: &Bound, get: &dyn Fn(usize) -> Value) -> Result<bool> {
    Ok(match f {
        Bound::Const(b) => *b,
        Bound::Cmp(a, op, b) => {
            let val = |o: &BoundOperand| match o {
                BoundOperand::Col(c) => Some(get(*c)),
                BoundOperand::Const(v) => Some(v.clone()),
                BoundOperand::Undefined => None,
            };
            match (val(a), val(b)) {
                (Some(x), Some(y)) => compare(&x, *op, &y)?,
                _ => false,
            }
        }
        Bound::Not(x) => !eval(x, get)?,
        Bound::And(x, y) => eval(x, get)? && eval(y, get)?,
        Bound::Or(x, y) => eval(x, get)? || eval(y, get)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    Exact,
    BestEffort,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryAnswer {
    pub satisfiable: bool,
    pub witness: Option<Tuple>,
    pub top: Vec<Tuple>,
    pub exactness: Exactness,
    /// The fallback search ran out of budget before it finished.
    pub budget_exhausted: bool,
}

/// First constraint in canonical scope order whose scope holds every name.
fn covering<'a>(m: &'a ExtendedNetwork, names: &BTreeSet<String>) -> Result<Option<&'a ExtendedConstraint>> {
    let vars = names
        .iter()
        .map(|n| lookup(m, n).cloned())
        .collect::<Result<Vec<_>>>()?;
    Ok(m
        .extended
        .iter()
        .find(|c| vars.iter().all(|v| c.scope.contains(v))))
}

fn row_getter<'a>(ec: &'a ExtendedConstraint, row: &'a Tuple) -> impl Fn(usize) -> Value + 'a {
    move |col| {
        let pos = ec
            .scope
            .vars()
            .iter()
            .position(|v| v.rank() as usize == col)
            .expect("column inside the covering scope");
        row[pos].clone()
    }
}

/// SELECT A SOLUTION WHERE φ, with the default search budget for the
/// fallback path.
pub fn select_solution(m: &ExtendedNetwork, q: &Query) -> Result<QueryAnswer> {
    select_solution_with(m, q, DEFAULT_BUDGET)
}

pub fn select_solution_with(m: &ExtendedNetwork, q: &Query, budget: u64) -> Result<QueryAnswer> {
    let f = bind(m, &q.formula)?;
    let names = q.vars();
    if names.len() <= m.k {
        if let Some(ec) = covering(m, &names)? {
            for row in &ec.rows {
                if eval(&f, &row_getter(ec, &row.tuple))? {
                    let w = row.witnesses[0].clone();
                    return Ok(QueryAnswer {
                        satisfiable: true,
                        witness: Some(w.clone()),
                        top: vec![w],
                        exactness: Exactness::Exact,
                        budget_exhausted: false,
                    });
                }
            }
            return Ok(QueryAnswer {
                satisfiable: false,
                witness: None,
                top: Vec::new(),
                exactness: Exactness::Exact,
                budget_exhausted: false,
            });
        }
    }
    let (found, exhausted) = search_matching(m, &f, 1, budget)?;
    let witness = found.first().cloned();
    Ok(QueryAnswer {
        satisfiable: witness.is_some(),
        witness,
        top: found,
        exactness: Exactness::BestEffort,
        budget_exhausted: exhausted,
    })
}

/// Searches the base network for solutions satisfying `f`. Keeps the `keep`
/// most preferred ones seen; with `keep == 1` it stops at the first hit.
fn search_matching(
    m: &ExtendedNetwork,
    f: &Bound,
    keep: usize,
    budget: u64,
) -> Result<(Vec<Tuple>, bool)> {
    let obj = m.preference.resolve(&m.base)?;
    let model = SearchModel::new(&m.base);
    let mut best: Vec<Tuple> = Vec::new();
    let mut err = None;
    let first_only = keep == 1 && obj.is_none();
    let status = model.search(&[], budget, |a| {
        let t = model.to_tuple(a);
        match eval(f, &|c| t[c].clone()) {
            Err(e) => {
                err = Some(e);
                return ControlFlow::Break(());
            }
            Ok(false) => return ControlFlow::Continue(()),
            Ok(true) => {}
        }
        let pos = best
            .binary_search_by(|x| compare_with(obj, x, &t))
            .unwrap_or_else(|p| p);
        if pos < keep {
            best.insert(pos, t);
            best.truncate(keep);
        }
        if first_only {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok((best, status == SearchStatus::BudgetExhausted))
}

/// The `count` most preferred solutions satisfying φ. Exact when φ fits in
/// one scope and `count` does not exceed the number of witnesses stored per
/// row.
pub fn top_k_solutions(m: &ExtendedNetwork, q: &Query, count: usize) -> Result<QueryAnswer> {
    top_k_solutions_with(m, q, count, DEFAULT_BUDGET)
}

pub fn top_k_solutions_with(
    m: &ExtendedNetwork,
    q: &Query,
    count: usize,
    budget: u64,
) -> Result<QueryAnswer> {
    let f = bind(m, &q.formula)?;
    let names = q.vars();
    let obj = m.preference.resolve(&m.base)?;
    if names.len() <= m.k {
        if let Some(ec) = covering(m, &names)? {
            let mut all: Vec<Tuple> = Vec::new();
            for row in &ec.rows {
                if eval(&f, &row_getter(ec, &row.tuple))? {
                    all.extend(row.witnesses.iter().cloned());
                }
            }
            all.sort_by(|a, b| compare_with(obj, a, b));
            all.dedup();
            all.truncate(count);
            return Ok(QueryAnswer {
                satisfiable: !all.is_empty(),
                witness: all.first().cloned(),
                top: all,
                exactness: if count <= m.top_k {
                    Exactness::Exact
                } else {
                    Exactness::BestEffort
                },
                budget_exhausted: false,
            });
        }
    }
    let (mut top, exhausted) = search_matching(m, &f, count.max(1), budget)?;
    let satisfiable = !top.is_empty();
    let witness = top.first().cloned();
    top.truncate(count);
    Ok(QueryAnswer {
        satisfiable,
        witness,
        top,
        exactness: Exactness::BestEffort,
        budget_exhausted: exhausted,
    })
}

/// Extremal value of `target` among the rows of the single relation covering
/// `target` and the condition's variables that satisfy the condition.
pub fn extremum_lookup(
    m: &ExtendedNetwork,
    target: &str,
    direction: Direction,
    condition: &Query,
) -> Result<Option<Value>> {
    let f = bind(m, &condition.formula)?;
    let mut names = condition.vars();
    names.insert(target.to_string());
    let col = lookup(m, target)?.rank() as usize;
    let ec = match covering(m, &names)? {
        Some(ec) if names.len() <= m.k => ec,
        _ => {
            return Err(Error::Query(format!(
                "no relation of arity at most {} covers {}",
                m.k,
                names.into_iter().collect::<Vec<_>>().join(", ")
            )))
        }
    };
    let mut best: Option<Value> = None;
    for row in &ec.rows {
        let get = row_getter(ec, &row.tuple);
        if !eval(&f, &get)? {
            continue;
        }
        let v = get(col);
        best = Some(match (best, direction) {
            (None, _) => v,
            (Some(b), Direction::Max) => b.max(v),
            (Some(b), Direction::Min) => b.min(v),
        });
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pruning {
    /// Feasible values per variable; a pinned variable maps to its pin when
    /// the pins are consistent.
    pub feasible: BTreeMap<VariableId, Vec<Value>>,
    pub exactness: Exactness,
}

/// Values of each free variable Y that, together with the pins, project into
/// every relation whose scope lies within the pinned variables and Y.
/// Exact when at most k−1 variables are pinned; otherwise a superset of the
/// feasible values.
pub fn prune_domains(m: &ExtendedNetwork, pinned: &PartialAssignment) -> Result<Pruning> {
    let net = &m.base;
    for (var, value) in pinned {
        if net.var(var.name()) != Some(var) {
            return Err(Error::Input(format!("unknown variable {var}")));
        }
        if net.domain(var).binary_search(value).is_err() {
            return Err(Error::Domain(format!("{value} is not in dom({var})")));
        }
    }
    let holds = |extra: Option<(&VariableId, &Value)>, need: Option<&VariableId>| {
        net.constraints().all(|rel| {
            let vars = rel.scope().vars();
            if need.is_some_and(|n| !rel.scope().contains(n)) {
                return true;
            }
            let mut row = Vec::with_capacity(vars.len());
            for v in vars {
                match (pinned.get(v), extra) {
                    (Some(x), _) => row.push(x.clone()),
                    (None, Some((ev, x))) if ev == v => row.push(x.clone()),
                    _ => return true,
                }
            }
            rel.contains_values(&row)
        })
    };
    let consistent = holds(None, None);
    let mut feasible = BTreeMap::new();
    for (i, var) in net.variables().iter().enumerate() {
        let values = match pinned.get(var) {
            Some(x) if consistent => vec![x.clone()],
            Some(_) => Vec::new(),
            None if !consistent => Vec::new(),
            None => net.domains()[i]
                .iter()
                .filter(|x| holds(Some((var, x)), Some(var)))
                .cloned()
                .collect(),
        };
        feasible.insert(var.clone(), values);
    }
    Ok(Pruning {
        feasible,
        exactness: if pinned.len() < m.k {
            Exactness::Exact
        } else {
            Exactness::BestEffort
        },
    })
}
