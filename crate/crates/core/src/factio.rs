//! Reading and writing completion instances as ground logic-programming
//! facts.
//!
//! ```text
//! metabolite(S1,s).  reaction(r6,r).  bounds(r6,"0","99999").
//! rct(S1,"1",r6,r).  prd(A,"1",r6,r).  objective(r5,t).  reversible(r3).
//! ```
//!
//! The last argument of `metabolite`, `reaction`, `objective`, `rct` and
//! `prd` is a type token: `d` (draft), `s` (seed), `t` (target) or `r`
//! (reference). Entities typed `d`, `s` or `t` belong to the draft network,
//! entities typed `r` to the reference network. Seeds are the metabolites
//! typed `s`, targets the reactions typed `t`. Numbers are quoted decimal
//! strings. `%` starts a comment that runs to the end of the line.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::error::Error as ModelError;
use crate::model::{EntityType, Instance, MetabolicNetwork, MetaboliteId, Reaction, ReactionId};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("{at}: syntax error: {message}")]
    Syntax { at: Position, message: String },
    #[error("{at}: reference to undeclared {kind} `{name}`")]
    UnknownEntity {
        at: Position,
        kind: &'static str,
        name: String,
    },
    #[error("{at}: `{text}` is not a number")]
    BadNumber { at: Position, text: String },
    #[error("{at}: duplicate fact {fact}")]
    DuplicateFact { at: Position, fact: String },
    #[error("reaction `{0}` has no bounds fact and no default bounds were given")]
    MissingBounds(ReactionId),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One ground fact of the instance format.
#[derive(Clone, Debug, PartialEq)]
pub enum Fact {
    Metabolite {
        id: MetaboliteId,
        ty: EntityType,
    },
    Reaction {
        id: ReactionId,
        ty: EntityType,
    },
    Bounds {
        id: ReactionId,
        lower: f64,
        upper: f64,
    },
    Objective {
        id: ReactionId,
        ty: EntityType,
    },
    Reversible {
        id: ReactionId,
    },
    Reactant {
        metabolite: MetaboliteId,
        coefficient: f64,
        reaction: ReactionId,
        ty: EntityType,
    },
    Product {
        metabolite: MetaboliteId,
        coefficient: f64,
        reaction: ReactionId,
        ty: EntityType,
    },
}

/// Ordered facts with the position each one started at.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FactFile {
    pub facts: Vec<(Position, Fact)>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParseOptions {
    /// Bounds for reactions without a `bounds` fact.
    pub default_bounds: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Quoted(String),
    Open,
    Close,
    Comma,
    Dot,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Position,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            chars: text.chars().peekable(),
            pos: Position { line: 1, column: 1 },
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    fn syntax(&self, at: Position, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            at,
            message: message.into(),
        }
    }

    fn next_token(&mut self) -> Result<Option<(Position, Token)>, ParseError> {
        loop {
            match self.chars.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('%') => while self.bump().is_some_and(|c| c != '\n') {},
                _ => break,
            }
        }
        let at = self.pos;
        let Some(c) = self.bump() else {
            return Ok(None);
        };
        let tok = match c {
            '(' => Token::Open,
            ')' => Token::Close,
            ',' => Token::Comma,
            '.' => Token::Dot,
            '"' => {
                let mut s = String::new();
                loop {
                    match self.bump() {
                        Some('"') => break,
                        Some('\n') | None => return Err(self.syntax(at, "unterminated string")),
                        Some(c) => s.push(c),
                    }
                }
                Token::Quoted(s)
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut s = String::from(c);
                while let Some(&c) = self.chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                Token::Ident(s)
            }
            c => return Err(self.syntax(at, format!("unexpected character `{c}`"))),
        };
        Ok(Some((at, tok)))
    }
}

enum Arg {
    Ident(String),
    Quoted(String),
}

/// Predicate name and arguments of one fact, with positions.
type RawFact = (Position, String, Vec<(Position, Arg)>);

fn parse_raw(text: &str) -> Result<Vec<RawFact>, ParseError> {
    let mut lx = Lexer::new(text);
    let mut out = Vec::new();
    while let Some((at, tok)) = lx.next_token()? {
        let Token::Ident(name) = tok else {
            return Err(lx.syntax(at, "expected a predicate name"));
        };
        match lx.next_token()? {
            Some((_, Token::Open)) => {}
            Some((p, _)) => return Err(lx.syntax(p, "expected `(`")),
            None => return Err(lx.syntax(lx.pos, "unexpected end of input")),
        }
        let mut args = Vec::new();
        loop {
            let (p, tok) = lx
                .next_token()?
                .ok_or_else(|| lx.syntax(lx.pos, "unexpected end of input"))?;
            match tok {
                Token::Ident(s) => args.push((p, Arg::Ident(s))),
                Token::Quoted(s) => args.push((p, Arg::Quoted(s))),
                _ => return Err(lx.syntax(p, "expected an argument")),
            }
            match lx.next_token()? {
                Some((_, Token::Comma)) => continue,
                Some((_, Token::Close)) => break,
                Some((p, _)) => return Err(lx.syntax(p, "expected `,` or `)`")),
                None => return Err(lx.syntax(lx.pos, "unexpected end of input")),
            }
        }
        match lx.next_token()? {
            Some((_, Token::Dot)) => {}
            Some((p, _)) => return Err(lx.syntax(p, "expected `.` after fact")),
            None => return Err(lx.syntax(lx.pos, "missing `.` at end of input")),
        }
        out.push((at, name, args));
    }
    Ok(out)
}

fn syntax(at: Position, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        at,
        message: message.into(),
    }
}

fn ident<T: std::str::FromStr>(arg: &(Position, Arg)) -> Result<T, ParseError> {
    match &arg.1 {
        Arg::Ident(s) => s
            .parse()
            .map_err(|_| syntax(arg.0, format!("invalid identifier `{s}`"))),
        Arg::Quoted(_) => Err(syntax(arg.0, "expected an identifier, found a string")),
    }
}

fn entity_type(arg: &(Position, Arg)) -> Result<EntityType, ParseError> {
    match &arg.1 {
        Arg::Ident(s) => EntityType::from_token(s).ok_or_else(|| {
            syntax(
                arg.0,
                format!("type must be one of d, r, s, t; found `{s}`"),
            )
        }),
        Arg::Quoted(_) => Err(syntax(arg.0, "expected a type token")),
    }
}

fn number(arg: &(Position, Arg)) -> Result<f64, ParseError> {
    match &arg.1 {
        Arg::Quoted(s) => match s.trim().parse::<f64>() {
            Ok(x) if !x.is_nan() => Ok(x),
            _ => Err(ParseError::BadNumber {
                at: arg.0,
                text: s.clone(),
            }),
        },
        Arg::Ident(s) => Err(syntax(
            arg.0,
            format!("expected a quoted number, found `{s}`"),
        )),
    }
}

impl FactFile {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut facts = Vec::new();
        for (at, name, args) in parse_raw(text)? {
            let arity = |n: usize| {
                if args.len() == n {
                    Ok(())
                } else {
                    Err(syntax(
                        at,
                        format!("`{name}` takes {n} arguments, found {}", args.len()),
                    ))
                }
            };
            let fact = match name.as_str() {
                "metabolite" => {
                    arity(2)?;
                    Fact::Metabolite {
                        id: ident(&args[0])?,
                        ty: entity_type(&args[1])?,
                    }
                }
                "reaction" => {
                    arity(2)?;
                    Fact::Reaction {
                        id: ident(&args[0])?,
                        ty: entity_type(&args[1])?,
                    }
                }
                "bounds" => {
                    arity(3)?;
                    Fact::Bounds {
                        id: ident(&args[0])?,
                        lower: number(&args[1])?,
                        upper: number(&args[2])?,
                    }
                }
                "objective" => {
                    arity(2)?;
                    Fact::Objective {
                        id: ident(&args[0])?,
                        ty: entity_type(&args[1])?,
                    }
                }
                "reversible" => {
                    arity(1)?;
                    Fact::Reversible {
                        id: ident(&args[0])?,
                    }
                }
                "rct" | "prd" => {
                    arity(4)?;
                    let metabolite = ident(&args[0])?;
                    let coefficient = number(&args[1])?;
                    let reaction = ident(&args[2])?;
                    let ty = entity_type(&args[3])?;
                    if name == "rct" {
                        Fact::Reactant {
                            metabolite,
                            coefficient,
                            reaction,
                            ty,
                        }
                    } else {
                        Fact::Product {
                            metabolite,
                            coefficient,
                            reaction,
                            ty,
                        }
                    }
                }
                other => return Err(syntax(at, format!("unknown predicate `{other}`"))),
            };
            facts.push((at, fact));
        }
        Ok(FactFile { facts })
    }

    /// Assembles the instance described by the facts, in any order.
    pub fn to_instance(&self, opts: &ParseOptions) -> Result<Instance, ParseError> {
        #[derive(Default)]
        struct Side {
            metabolites: BTreeSet<MetaboliteId>,
            reactions: BTreeMap<ReactionId, Reaction>,
        }
        let mut draft = Side::default();
        let mut reference = Side::default();
        let mut seeds = BTreeSet::new();
        let mut targets = BTreeSet::new();
        let side_of = |ty: EntityType| ty == EntityType::Reference;

        // Declarations first so that facts may appear in any order.
        for (_, fact) in &self.facts {
            match fact {
                Fact::Metabolite { id, ty } => {
                    if side_of(*ty) {
                        reference.metabolites.insert(id.clone());
                    } else {
                        draft.metabolites.insert(id.clone());
                        if *ty == EntityType::Seed {
                            seeds.insert(id.clone());
                        }
                    }
                }
                Fact::Reaction { id, ty } => {
                    let side = if side_of(*ty) {
                        &mut reference
                    } else {
                        &mut draft
                    };
                    side.reactions
                        .entry(id.clone())
                        .or_insert_with(|| Reaction::new(id.clone()));
                    if *ty == EntityType::Target {
                        targets.insert(id.clone());
                    }
                }
                _ => {}
            }
        }

        let declared: BTreeSet<MetaboliteId> = draft
            .metabolites
            .union(&reference.metabolites)
            .cloned()
            .collect();
        let unknown_reaction = |at: Position, id: &ReactionId| ParseError::UnknownEntity {
            at,
            kind: "reaction",
            name: id.to_string(),
        };

        let mut bounded: BTreeSet<ReactionId> = BTreeSet::new();
        let mut stoichiometry: BTreeSet<(bool, bool, MetaboliteId, ReactionId)> = BTreeSet::new();
        let mut pending = Vec::new();
        for (at, fact) in &self.facts {
            match fact {
                Fact::Metabolite { .. } | Fact::Reaction { .. } => {}
                Fact::Bounds { id, lower, upper } => {
                    if !draft.reactions.contains_key(id) && !reference.reactions.contains_key(id) {
                        return Err(unknown_reaction(*at, id));
                    }
                    if !bounded.insert(id.clone()) {
                        return Err(ParseError::DuplicateFact {
                            at: *at,
                            fact: format!("bounds({id},...)"),
                        });
                    }
                    for side in [&mut draft, &mut reference] {
                        if let Some(r) = side.reactions.get_mut(id) {
                            r.lower_bound = *lower;
                            r.upper_bound = *upper;
                        }
                    }
                }
                Fact::Objective { id, ty } => {
                    let side = if side_of(*ty) {
                        &mut reference
                    } else {
                        &mut draft
                    };
                    side.reactions
                        .get_mut(id)
                        .ok_or_else(|| unknown_reaction(*at, id))?
                        .is_objective = true;
                }
                Fact::Reversible { id } => {
                    let mut found = false;
                    for side in [&mut draft, &mut reference] {
                        if let Some(r) = side.reactions.get_mut(id) {
                            r.reversible = true;
                            found = true;
                        }
                    }
                    if !found {
                        return Err(unknown_reaction(*at, id));
                    }
                }
                Fact::Reactant {
                    metabolite,
                    coefficient,
                    reaction,
                    ty,
                }
                | Fact::Product {
                    metabolite,
                    coefficient,
                    reaction,
                    ty,
                } => {
                    let is_reactant = matches!(fact, Fact::Reactant { .. });
                    if !declared.contains(metabolite) {
                        return Err(ParseError::UnknownEntity {
                            at: *at,
                            kind: "metabolite",
                            name: metabolite.to_string(),
                        });
                    }
                    let on_reference = side_of(*ty);
                    let side = if on_reference { &reference } else { &draft };
                    if !side.reactions.contains_key(reaction) {
                        return Err(unknown_reaction(*at, reaction));
                    }
                    let key = (
                        on_reference,
                        is_reactant,
                        metabolite.clone(),
                        reaction.clone(),
                    );
                    if !stoichiometry.insert(key) {
                        let pred = if is_reactant { "rct" } else { "prd" };
                        return Err(ParseError::DuplicateFact {
                            at: *at,
                            fact: format!("{pred}({metabolite},_,{reaction},{ty})"),
                        });
                    }
                    pending.push((
                        on_reference,
                        is_reactant,
                        metabolite,
                        *coefficient,
                        reaction,
                    ));
                }
            }
        }
        for (on_reference, is_reactant, m, c, r) in pending {
            let side = if on_reference {
                &mut reference
            } else {
                &mut draft
            };
            let rx = side.reactions.get_mut(r).expect("checked above");
            let map = if is_reactant {
                &mut rx.reactants
            } else {
                &mut rx.products
            };
            map.insert(m.clone(), c);
        }

        let build = |side: Side| -> Result<MetabolicNetwork, ParseError> {
            let mut net = MetabolicNetwork::new();
            for m in side.metabolites {
                net.add_metabolite(m);
            }
            for (id, mut r) in side.reactions {
                if !bounded.contains(&id) {
                    let (lo, hi) = opts
                        .default_bounds
                        .ok_or_else(|| ParseError::MissingBounds(id.clone()))?;
                    r.lower_bound = lo;
                    r.upper_bound = hi;
                }
                net.add_reaction(r)?;
            }
            Ok(net)
        };
        let draft = build(draft)?;
        let reference = build(reference)?;
        Ok(Instance::new(draft, reference, seeds, targets)?)
    }
}

/// Parses an instance; every reaction needs a `bounds` fact.
pub fn parse_facts(text: &str) -> Result<Instance, ParseError> {
    parse_facts_with(text, &ParseOptions::default())
}

pub fn parse_facts_with(text: &str, opts: &ParseOptions) -> Result<Instance, ParseError> {
    FactFile::parse(text)?.to_instance(opts)
}

fn num(x: f64) -> String {
    format!("\"{x}\"")
}

/// Renders an instance as facts, sorted by predicate and then by arguments.
///
/// Draft entities carry the type the instance assigns them (target before
/// seed before draft). A seed that is also a target compound gets both a
/// `t` and an `s` declaration so that it stays a seed when read back.
pub fn emit_facts(instance: &Instance) -> String {
    let typing = instance.typing();
    let draft = instance.draft();
    let reference = instance.reference();
    let draft_type = |id: &ReactionId| typing[&crate::model::Entity::Reaction(id.clone())];

    let mut groups: [Vec<String>; 7] = Default::default();
    for m in draft.metabolites() {
        let ty = typing[&crate::model::Entity::Metabolite(m.clone())];
        groups[0].push(format!("metabolite({m},{ty})."));
        if ty == EntityType::Target && instance.seeds().contains(m) {
            groups[0].push(format!("metabolite({m},s)."));
        }
    }
    for m in reference.metabolites() {
        groups[0].push(format!("metabolite({m},r)."));
    }

    let sides = [(draft, false), (reference, true)];
    let mut bounded = BTreeSet::new();
    let mut reversible = BTreeSet::new();
    for (net, is_reference) in sides {
        for r in net.reactions() {
            let ty = if is_reference {
                EntityType::Reference
            } else {
                draft_type(&r.id)
            };
            let id = &r.id;
            groups[1].push(format!("reaction({id},{ty})."));
            if bounded.insert(id.clone()) {
                groups[2].push(format!(
                    "bounds({id},{},{}).",
                    num(r.lower_bound),
                    num(r.upper_bound)
                ));
            }
            if r.is_objective {
                groups[3].push(format!("objective({id},{ty})."));
            }
            if r.reversible && reversible.insert(id.clone()) {
                groups[4].push(format!("reversible({id})."));
            }
            for (m, &c) in &r.reactants {
                groups[5].push(format!("rct({m},{},{id},{ty}).", num(c)));
            }
            for (m, &c) in &r.products {
                groups[6].push(format!("prd({m},{},{id},{ty}).", num(c)));
            }
        }
    }

    let mut out = String::new();
    for mut g in groups {
        g.sort();
        g.dedup();
        for line in g {
            let _ = writeln!(out, "{line}");
        }
    }
    out
}
