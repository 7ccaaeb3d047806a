//! Recursive-descent parsers for domain and problem files, with
//! declaration checking (predicates, types, bound variables, supported
//! requirement flags).

use super::lexer::{lex, Tok, Token};
use super::{
    ActionSchema, DomainAst, GroundAtom, LiteralTemplate, ParseError, PredicateDef, ProblemAst,
    Requirement, Term, TypedName, WhenTemplate,
};
use std::collections::{BTreeSet, HashMap, HashSet};

struct Cursor {
    tokens: Vec<Token>,
    pos: usize,
}

impl Cursor {
    fn new(text: &str) -> Result<Cursor, ParseError> {
        Ok(Cursor {
            tokens: lex(text)?,
            pos: 0,
        })
    }

    fn err_here(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self
            .tokens
            .get(self.pos.min(self.tokens.len().saturating_sub(1)))
            .map(|t| (t.line, t.col))
            .unwrap_or((0, 0));
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn next(&mut self) -> Result<Tok, ParseError> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| self.err_here("unexpected end of input"))?;
        self.pos += 1;
        Ok(tok.tok)
    }

    fn expect_lparen(&mut self) -> Result<(), ParseError> {
        match self.next()? {
            Tok::LParen => Ok(()),
            other => Err(self.before(format!("expected `(`, found {}", show(&other)))),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.next()? {
            Tok::RParen => Ok(()),
            other => Err(self.before(format!("expected `)`, found {}", show(&other)))),
        }
    }

    fn expect_sym(&mut self, want: &str) -> Result<(), ParseError> {
        match self.next()? {
            Tok::Sym(s) if s == want => Ok(()),
            other => Err(self.before(format!("expected `{want}`, found {}", show(&other)))),
        }
    }

    fn symbol(&mut self, what: &str) -> Result<String, ParseError> {
        match self.next()? {
            Tok::Sym(s) => Ok(s),
            other => Err(self.before(format!("expected {what}, found {}", show(&other)))),
        }
    }

    fn before(&self, message: String) -> ParseError {
        let idx = self.pos.saturating_sub(1);
        let (line, col) = self
            .tokens
            .get(idx)
            .map(|t| (t.line, t.col))
            .unwrap_or((0, 0));
        ParseError { line, col, message }
    }

    fn at_rparen(&self) -> bool {
        matches!(self.peek(), Some(Tok::RParen))
    }

    fn skip_balanced(&mut self) -> Result<(), ParseError> {
        // Assumes the opening paren was consumed.
        let mut depth = 1;
        while depth > 0 {
            match self.next()? {
                Tok::LParen => depth += 1,
                Tok::RParen => depth -= 1,
                Tok::Sym(_) => {}
            }
        }
        Ok(())
    }
}

fn show(tok: &Tok) -> String {
    match tok {
        Tok::LParen => "`(`".to_string(),
        Tok::RParen => "`)`".to_string(),
        Tok::Sym(s) => format!("`{s}`"),
    }
}

/// `name... [- type]` lists, as used by :types, :objects and parameters.
/// Parameter variables are stored without their `?` prefix, matching
/// [`Term::Var`].
fn typed_list(cur: &mut Cursor, what: &str) -> Result<Vec<TypedName>, ParseError> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    while !cur.at_rparen() {
        let sym = cur.symbol(what)?;
        if sym == "-" {
            let ty = cur.symbol("a type name")?;
            for name in pending.drain(..) {
                out.push(TypedName { name, ty: ty.clone() });
            }
        } else {
            pending.push(sym.trim_start_matches('?').to_string());
        }
    }
    for name in pending {
        out.push(TypedName {
            name,
            ty: "object".to_string(),
        });
    }
    Ok(out)
}

fn atom_body(cur: &mut Cursor, pred: String) -> Result<LiteralTemplate, ParseError> {
    let mut args = Vec::new();
    while !cur.at_rparen() {
        let sym = cur.symbol("an argument")?;
        args.push(term(sym));
    }
    cur.expect_rparen()?;
    Ok(LiteralTemplate { pred, args })
}

fn term(sym: String) -> Term {
    if let Some(stripped) = sym.strip_prefix('?') {
        Term::Var(stripped.to_string())
    } else {
        Term::Const(sym)
    }
}

/// Condition items collected by [`condition`].
#[derive(Default)]
struct Condition {
    pos: Vec<LiteralTemplate>,
    neg: Vec<LiteralTemplate>,
    equalities: Vec<(Term, Term, bool)>,
}

/// Parses a goal description: an atom, `(not atom)`, `(= a b)`,
/// `(not (= a b))`, or `(and ...)` of those (recursively flattened).
/// The opening paren is consumed by the caller.
fn condition(cur: &mut Cursor, out: &mut Condition, negated: bool) -> Result<(), ParseError> {
    let head = cur.symbol("a condition")?;
    match head.as_str() {
        "and" => {
            if negated {
                return Err(cur.before("negated conjunctions are not supported".into()));
            }
            while !cur.at_rparen() {
                cur.expect_lparen()?;
                condition(cur, out, false)?;
            }
            cur.expect_rparen()?;
        }
        "not" => {
            if negated {
                return Err(cur.before("double negation is not supported".into()));
            }
            cur.expect_lparen()?;
            condition(cur, out, true)?;
            cur.expect_rparen()?;
        }
        "=" => {
            let left = term(cur.symbol("a term")?);
            let right = term(cur.symbol("a term")?);
            cur.expect_rparen()?;
            out.equalities.push((left, right, !negated));
        }
        "or" | "exists" | "forall" | "imply" => {
            return Err(cur.before(format!("`{head}` conditions are not supported")));
        }
        pred => {
            let lit = atom_body(cur, pred.to_string())?;
            if negated {
                out.neg.push(lit);
            } else {
                out.pos.push(lit);
            }
        }
    }
    Ok(())
}

#[derive(Default)]
struct EffectItems {
    add: Vec<LiteralTemplate>,
    del: Vec<LiteralTemplate>,
    when: Vec<WhenTemplate>,
    cost: Option<u64>,
}

/// Parses an effect: an add/delete literal, `(when cond eff)`,
/// `(increase (total-cost) n)`, or `(and ...)` of those. The opening
/// paren is consumed by the caller. `nested` forbids `when`/`increase`
/// inside conditional effects.
fn effect(cur: &mut Cursor, out: &mut EffectItems, nested: bool) -> Result<(), ParseError> {
    let head = cur.symbol("an effect")?;
    match head.as_str() {
        "and" => {
            while !cur.at_rparen() {
                cur.expect_lparen()?;
                effect(cur, out, nested)?;
            }
            cur.expect_rparen()?;
        }
        "not" => {
            cur.expect_lparen()?;
            let pred = cur.symbol("a predicate")?;
            if pred == "=" {
                return Err(cur.before("equality cannot appear in effects".into()));
            }
            let lit = atom_body(cur, pred)?;
            cur.expect_rparen()?;
            out.del.push(lit);
        }
        "when" => {
            if nested {
                return Err(cur.before("nested conditional effects are not supported".into()));
            }
            let mut cond = Condition::default();
            cur.expect_lparen()?;
            condition(cur, &mut cond, false)?;
            if !cond.equalities.is_empty() {
                return Err(cur.before("equality inside `when` conditions is not supported".into()));
            }
            let mut sub = EffectItems::default();
            cur.expect_lparen()?;
            effect(cur, &mut sub, true)?;
            cur.expect_rparen()?;
            out.when.push(WhenTemplate {
                when_pos: cond.pos,
                when_neg: cond.neg,
                add: sub.add,
                del: sub.del,
            });
        }
        "increase" => {
            if nested {
                return Err(cur.before("cost changes inside `when` are not supported".into()));
            }
            cur.expect_lparen()?;
            cur.expect_sym("total-cost")?;
            cur.expect_rparen()?;
            let amount = cur.symbol("a cost literal")?;
            let value: u64 = amount
                .parse()
                .map_err(|_| cur.before(format!("action costs must be nonnegative integers, found `{amount}`")))?;
            cur.expect_rparen()?;
            if out.cost.is_some() {
                return Err(cur.before("multiple cost effects on one action".into()));
            }
            out.cost = Some(value);
        }
        "=" | "assign" | "decrease" | "scale-up" | "scale-down" => {
            return Err(cur.before(format!("`{head}` effects are not supported")));
        }
        pred => {
            out.add.push(atom_body(cur, pred.to_string())?);
        }
    }
    Ok(())
}

/// Parses a PDDL domain into a checked [`DomainAst`].
pub fn parse_domain(text: &str) -> Result<DomainAst, ParseError> {
    let mut cur = Cursor::new(text)?;
    cur.expect_lparen()?;
    cur.expect_sym("define")?;
    cur.expect_lparen()?;
    cur.expect_sym("domain")?;
    let name = cur.symbol("a domain name")?;
    cur.expect_rparen()?;

    let mut domain = DomainAst {
        name,
        requirements: BTreeSet::new(),
        types: Vec::new(),
        predicates: Vec::new(),
        uses_total_cost: false,
        schemas: Vec::new(),
    };

    while !cur.at_rparen() {
        cur.expect_lparen()?;
        let section = cur.symbol("a domain section")?;
        match section.as_str() {
            ":requirements" => {
                while !cur.at_rparen() {
                    let flag = cur.symbol("a requirement flag")?;
                    match Requirement::from_flag(&flag) {
                        Some(req) => {
                            domain.requirements.insert(req);
                        }
                        None => {
                            return Err(cur.before(format!("unsupported requirement `{flag}`")))
                        }
                    }
                }
                cur.expect_rparen()?;
            }
            ":types" => {
                domain.types = typed_list(&mut cur, "a type name")?;
                cur.expect_rparen()?;
            }
            ":constants" => {
                return Err(cur.before(
                    "`:constants` are not supported; declare objects in the problem".into(),
                ));
            }
            ":predicates" => {
                while !cur.at_rparen() {
                    cur.expect_lparen()?;
                    let pname = cur.symbol("a predicate name")?;
                    let params = typed_list(&mut cur, "a parameter")?;
                    cur.expect_rparen()?;
                    domain.predicates.push(PredicateDef {
                        name: pname,
                        params,
                    });
                }
                cur.expect_rparen()?;
            }
            ":functions" => {
                while !cur.at_rparen() {
                    cur.expect_lparen()?;
                    let fname = cur.symbol("a function name")?;
                    if fname != "total-cost" {
                        return Err(
                            cur.before(format!("only the total-cost function is supported, found `{fname}`"))
                        );
                    }
                    cur.expect_rparen()?;
                    domain.uses_total_cost = true;
                }
                cur.expect_rparen()?;
            }
            ":action" => {
                let aname = cur.symbol("an action name")?;
                let mut params = Vec::new();
                let mut cond = Condition::default();
                let mut eff = EffectItems::default();
                while !cur.at_rparen() {
                    let key = cur.symbol("an action keyword")?;
                    match key.as_str() {
                        ":parameters" => {
                            cur.expect_lparen()?;
                            params = typed_list(&mut cur, "a parameter")?;
                            cur.expect_rparen()?;
                        }
                        ":precondition" => {
                            cur.expect_lparen()?;
                            if cur.at_rparen() {
                                cur.expect_rparen()?; // empty `()`
                            } else {
                                condition(&mut cur, &mut cond, false)?;
                            }
                        }
                        ":effect" => {
                            cur.expect_lparen()?;
                            if cur.at_rparen() {
                                cur.expect_rparen()?;
                            } else {
                                effect(&mut cur, &mut eff, false)?;
                            }
                        }
                        other => {
                            return Err(cur.before(format!("unsupported action keyword `{other}`")))
                        }
                    }
                }
                cur.expect_rparen()?;
                domain.schemas.push(ActionSchema {
                    name: aname,
                    params,
                    pre_pos: cond.pos,
                    pre_neg: cond.neg,
                    equalities: cond.equalities,
                    add: eff.add,
                    del: eff.del,
                    when_effects: eff.when,
                    cost: eff.cost,
                });
            }
            other => {
                if other.starts_with(':') {
                    return Err(cur.before(format!("unsupported domain section `{other}`")));
                }
                cur.skip_balanced()?;
            }
        }
    }
    cur.expect_rparen()?;
    check_domain(&domain).map_err(|m| cur.before(m))?;
    Ok(domain)
}

fn check_domain(domain: &DomainAst) -> Result<(), String> {
    // A name used only as a parent is an implicit type declaration.
    let mut types: HashSet<&str> = HashSet::from(["object"]);
    for t in &domain.types {
        types.insert(&t.name);
        types.insert(&t.ty);
    }
    let mut preds: HashMap<&str, usize> = HashMap::new();
    for p in &domain.predicates {
        if preds.insert(&p.name, p.params.len()).is_some() {
            return Err(format!("predicate `{}` declared twice", p.name));
        }
        for param in &p.params {
            if !types.contains(param.ty.as_str()) {
                return Err(format!(
                    "predicate `{}` uses undeclared type `{}`",
                    p.name, param.ty
                ));
            }
        }
    }
    for schema in &domain.schemas {
        let mut bound: HashSet<&str> = HashSet::new();
        for p in &schema.params {
            if !types.contains(p.ty.as_str()) {
                return Err(format!(
                    "action `{}` parameter ?{} has undeclared type `{}`",
                    schema.name, p.name, p.ty
                ));
            }
            if !bound.insert(&p.name) {
                return Err(format!(
                    "action `{}` declares parameter ?{} twice",
                    schema.name, p.name
                ));
            }
        }
        let check_lit = |lit: &LiteralTemplate| -> Result<(), String> {
            match preds.get(lit.pred.as_str()) {
                None => Err(format!(
                    "action `{}` uses undeclared predicate `{}`",
                    schema.name, lit.pred
                )),
                Some(&arity) if arity != lit.args.len() => Err(format!(
                    "action `{}`: predicate `{}` expects {} arguments, found {}",
                    schema.name,
                    lit.pred,
                    arity,
                    lit.args.len()
                )),
                Some(_) => {
                    for arg in &lit.args {
                        if let Term::Var(v) = arg {
                            if !bound.contains(v.as_str()) {
                                return Err(format!(
                                    "action `{}` uses unbound variable ?{v}",
                                    schema.name
                                ));
                            }
                        }
                    }
                    Ok(())
                }
            }
        };
        for lit in schema
            .pre_pos
            .iter()
            .chain(&schema.pre_neg)
            .chain(&schema.add)
            .chain(&schema.del)
        {
            check_lit(lit)?;
        }
        for when in &schema.when_effects {
            for lit in when
                .when_pos
                .iter()
                .chain(&when.when_neg)
                .chain(&when.add)
                .chain(&when.del)
            {
                check_lit(lit)?;
            }
        }
        for (left, right, _) in &schema.equalities {
            for t in [left, right] {
                if let Term::Var(v) = t {
                    if !bound.contains(v.as_str()) {
                        return Err(format!(
                            "action `{}` compares unbound variable ?{v}",
                            schema.name
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Parses a PDDL problem into a checked [`ProblemAst`].
pub fn parse_problem(text: &str) -> Result<ProblemAst, ParseError> {
    let mut cur = Cursor::new(text)?;
    cur.expect_lparen()?;
    cur.expect_sym("define")?;
    cur.expect_lparen()?;
    cur.expect_sym("problem")?;
    let name = cur.symbol("a problem name")?;
    cur.expect_rparen()?;

    let mut problem = ProblemAst {
        name,
        domain: String::new(),
        objects: Vec::new(),
        init: Vec::new(),
        goal: Vec::new(),
    };

    while !cur.at_rparen() {
        cur.expect_lparen()?;
        let section = cur.symbol("a problem section")?;
        match section.as_str() {
            ":domain" => {
                problem.domain = cur.symbol("a domain name")?;
                cur.expect_rparen()?;
            }
            ":requirements" => {
                while !cur.at_rparen() {
                    let flag = cur.symbol("a requirement flag")?;
                    if Requirement::from_flag(&flag).is_none() {
                        return Err(cur.before(format!("unsupported requirement `{flag}`")));
                    }
                }
                cur.expect_rparen()?;
            }
            ":objects" => {
                problem.objects = typed_list(&mut cur, "an object name")?;
                cur.expect_rparen()?;
            }
            ":init" => {
                while !cur.at_rparen() {
                    cur.expect_lparen()?;
                    let head = cur.symbol("an init atom")?;
                    if head == "=" {
                        // (= (total-cost) 0)
                        cur.expect_lparen()?;
                        cur.expect_sym("total-cost")?;
                        cur.expect_rparen()?;
                        let v = cur.symbol("a number")?;
                        if v != "0" {
                            return Err(cur.before("total-cost must start at 0".into()));
                        }
                        cur.expect_rparen()?;
                        continue;
                    }
                    if head == "not" {
                        return Err(cur.before("negated init literals are not supported".into()));
                    }
                    let mut args = Vec::new();
                    while !cur.at_rparen() {
                        args.push(cur.symbol("an object name")?);
                    }
                    cur.expect_rparen()?;
                    problem.init.push(GroundAtom { pred: head, args });
                }
                cur.expect_rparen()?;
            }
            ":goal" => {
                cur.expect_lparen()?;
                if !cur.at_rparen() {
                    let head = cur.symbol("a goal")?;
                    if head == "and" {
                        while !cur.at_rparen() {
                            cur.expect_lparen()?;
                            problem.goal.push(goal_atom(&mut cur)?);
                        }
                    } else if head == "not" {
                        return Err(cur.before(
                            "negative goals are not supported; goals are positive conjunctions"
                                .into(),
                        ));
                    } else {
                        let mut args = Vec::new();
                        while !cur.at_rparen() {
                            args.push(cur.symbol("an object name")?);
                        }
                        problem.goal.push(GroundAtom { pred: head, args });
                    }
                }
                cur.expect_rparen()?;
                cur.expect_rparen()?;
            }
            ":metric" => {
                cur.skip_balanced()?;
            }
            other => {
                return Err(cur.before(format!("unsupported problem section `{other}`")));
            }
        }
    }
    cur.expect_rparen()?;

    // Init and goal may only mention declared objects.
    let declared: HashSet<&str> = problem.objects.iter().map(|o| o.name.as_str()).collect();
    for (place, atoms) in [("init", &problem.init), ("goal", &problem.goal)] {
        for atom in atoms.iter() {
            for arg in &atom.args {
                if !declared.contains(arg.as_str()) {
                    return Err(cur.before(format!(
                        "{place} references undeclared object `{arg}`"
                    )));
                }
            }
        }
    }
    Ok(problem)
}

/// Parses a bare list of ground atoms, e.g. `(on a b) (clear c)`;
/// the complete-state file format of the benchmark harness.
pub fn parse_atom_list(text: &str) -> Result<Vec<GroundAtom>, ParseError> {
    let mut cur = Cursor::new(text)?;
    let mut atoms = Vec::new();
    while cur.peek().is_some() {
        cur.expect_lparen()?;
        let pred = cur.symbol("a predicate")?;
        let mut args = Vec::new();
        while !cur.at_rparen() {
            args.push(cur.symbol("an object name")?);
        }
        cur.expect_rparen()?;
        atoms.push(GroundAtom { pred, args });
    }
    Ok(atoms)
}

fn goal_atom(cur: &mut Cursor) -> Result<GroundAtom, ParseError> {
    let head = cur.symbol("a goal atom")?;
    if head == "not" {
        return Err(cur.before(
            "negative goals are not supported; goals are positive conjunctions".into(),
        ));
    }
    let mut args = Vec::new();
    while !cur.at_rparen() {
        args.push(cur.symbol("an object name")?);
    }
    cur.expect_rparen()?;
    Ok(GroundAtom { pred: head, args })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BLOCKSWORLD: &str =
        include_str!("../../../../benchmarks/blocksworld/domain.pddl");
    const BW3: &str = include_str!("../../../../benchmarks/blocksworld/p03.pddl");

    #[test]
    fn minimal_domain_with_one_parameterless_action() {
        let text = "(define (domain tiny) (:predicates (done))
                    (:action finish :parameters () :precondition () :effect (done)))";
        let domain = parse_domain(text).unwrap();
        assert_eq!(domain.name, "tiny");
        assert_eq!(domain.schemas.len(), 1);
        assert!(domain.schemas[0].pre_pos.is_empty());
        assert_eq!(domain.schemas[0].add.len(), 1);
    }

    #[test]
    fn blocksworld_has_four_schemas() {
        let domain = parse_domain(BLOCKSWORLD).unwrap();
        let mut names: Vec<&str> = domain.schemas.iter().map(|s| s.name.as_str()).collect();
        names.sort();
        assert_eq!(names, ["pick-up", "put-down", "stack", "unstack"]);
    }

    #[test]
    fn unsupported_requirement_is_rejected() {
        let text = "(define (domain bad) (:requirements :strips :probabilistic-effects))";
        let err = parse_domain(text).unwrap_err();
        assert!(err.message.contains("unsupported requirement"));
        assert!(err.message.contains(":probabilistic-effects"));
    }

    #[test]
    fn undeclared_predicate_is_rejected() {
        let text = "(define (domain bad) (:predicates (p))
                    (:action a :parameters () :effect (q)))";
        let err = parse_domain(text).unwrap_err();
        assert!(err.message.contains("undeclared predicate"));
    }

    #[test]
    fn unbound_variable_is_rejected() {
        let text = "(define (domain bad) (:predicates (p ?x))
                    (:action a :parameters (?y) :effect (p ?z)))";
        let err = parse_domain(text).unwrap_err();
        assert!(err.message.contains("unbound variable"));
    }

    #[test]
    fn empty_init_and_goal() {
        let text = "(define (problem empty) (:domain tiny) (:init) (:goal (and)))";
        let problem = parse_problem(text).unwrap();
        assert!(problem.init.is_empty());
        assert!(problem.goal.is_empty());
    }

    #[test]
    fn three_block_instance() {
        let problem = parse_problem(BW3).unwrap();
        assert_eq!(problem.objects.len(), 3);
        assert_eq!(problem.domain, "blocksworld");
        // ontable ×3, clear ×3, handempty.
        assert_eq!(problem.init.len(), 7);
        let preds: std::collections::BTreeSet<&str> =
            problem.init.iter().map(|a| a.pred.as_str()).collect();
        assert_eq!(
            preds,
            ["clear", "handempty", "ontable"].into_iter().collect()
        );
    }

    #[test]
    fn undeclared_goal_object_is_rejected() {
        let text = "(define (problem bad) (:domain tiny) (:objects a)
                    (:init) (:goal (and (on a b))))";
        let err = parse_problem(text).unwrap_err();
        assert!(err.message.contains("undeclared object `b`"));
    }

    #[test]
    fn parse_error_carries_position() {
        let err = parse_domain("(define (domain x) (:action)))").unwrap_err();
        assert!(err.line >= 1);
        assert!(err.col > 1);
    }

    #[test]
    fn costs_and_conditional_effects_parse() {
        let text = "(define (domain costly)
          (:requirements :strips :action-costs :conditional-effects)
          (:predicates (p) (q) (r))
          (:functions (total-cost))
          (:action a :parameters ()
            :precondition (and (p) (not (q)))
            :effect (and (q) (not (p)) (when (and (r)) (and (p)))
                         (increase (total-cost) 4))))";
        let domain = parse_domain(text).unwrap();
        let schema = &domain.schemas[0];
        assert_eq!(schema.cost, Some(4));
        assert_eq!(schema.when_effects.len(), 1);
        assert!(domain.uses_total_cost);
        assert_eq!(domain.default_action_cost(), 0);
    }

    #[test]
    fn constants_are_rejected() {
        let text = "(define (domain c) (:constants a b))";
        let err = parse_domain(text).unwrap_err();
        assert!(err.message.contains(":constants"));
    }
}
