//! Conventional source mutants, used as a yardstick for how well the suite
//! tests pseudo-tested methods compared with required ones.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use syn::visit::{self, Visit};
use syn::{BinOp, Block, Expr, ExprLit, Lit, Stmt};

use crate::adapter::shape::ReturnShape;
use crate::adapter::source::LineIndex;
use crate::adapter::{build_patch, MethodInventory, PatchOrigin, SourcePatch};
use crate::error::{Error, Result};
use crate::model::{ByteSpan, ConstantTag, MethodDescriptor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationOperator {
    NegateConditional,
    ConditionalBoundary,
    ArithmeticReplacement,
    IncrementFlip,
    ReturnValueMutation,
    RemoveCall,
}

impl MutationOperator {
    pub fn name(self) -> &'static str {
        match self {
            MutationOperator::NegateConditional => "negate_conditional",
            MutationOperator::ConditionalBoundary => "conditional_boundary",
            MutationOperator::ArithmeticReplacement => "arithmetic_replacement",
            MutationOperator::IncrementFlip => "increment_flip",
            MutationOperator::ReturnValueMutation => "return_value_mutation",
            MutationOperator::RemoveCall => "remove_call",
        }
    }
}

impl fmt::Display for MutationOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One mutant: replace `site` (absolute byte offsets in the method's file)
/// with `replacement`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutantSpec {
    pub method_id: String,
    pub operator: MutationOperator,
    pub site: ByteSpan,
    pub replacement: String,
}

/// Every mutant for `descriptor`, ordered by site then operator.
///
/// `source` is the full text of the method's file. Macro invocations are
/// opaque and never mutated.
pub fn mutants_for(descriptor: &MethodDescriptor, source: &str) -> Vec<MutantSpec> {
    let Some(body) = source.get(descriptor.span.range()) else {
        return Vec::new();
    };
    let Ok(block) = syn::parse_str::<Block>(body) else {
        return Vec::new();
    };
    let mut scan = Scanner {
        index: LineIndex::new(body),
        text: body,
        shape: ReturnShape::parse(descriptor.return_type.as_deref()),
        return_type: descriptor.return_type.as_deref(),
        closure_depth: 0,
        found: Vec::new(),
    };
    scan.visit_block(&block);
    if let Some(Stmt::Expr(tail, None)) = block.stmts.last() {
        scan.return_site(tail);
    }

    let mut found = scan.found;
    found.sort_by_key(|a| (a.0.start, a.0.end, a.1));
    found.dedup();
    found
        .into_iter()
        .map(|(site, operator, replacement)| MutantSpec {
            method_id: descriptor.id.clone(),
            operator,
            site: ByteSpan::new(site.start + descriptor.span.start, site.end + descriptor.span.start),
            replacement,
        })
        .collect()
}

struct Scanner<'a> {
    index: LineIndex<'a>,
    text: &'a str,
    shape: ReturnShape,
    return_type: Option<&'a str>,
    closure_depth: usize,
    found: Vec<(ByteSpan, MutationOperator, String)>,
}

impl Scanner<'_> {
    fn push(&mut self, site: ByteSpan, op: MutationOperator, replacement: impl Into<String>) {
        self.found.push((site, op, replacement.into()));
    }

    fn binary(&mut self, op: &BinOp, rhs: &Expr) {
        use MutationOperator::*;
        let site = self.index.node(op);
        let negate = match op {
            BinOp::Lt(_) => Some(">="),
            BinOp::Le(_) => Some(">"),
            BinOp::Gt(_) => Some("<="),
            BinOp::Ge(_) => Some("<"),
            BinOp::Eq(_) => Some("!="),
            BinOp::Ne(_) => Some("=="),
            _ => None,
        };
        if let Some(r) = negate {
            self.push(site, NegateConditional, r);
        }
        let boundary = match op {
            BinOp::Lt(_) => Some("<="),
            BinOp::Le(_) => Some("<"),
            BinOp::Gt(_) => Some(">="),
            BinOp::Ge(_) => Some(">"),
            _ => None,
        };
        if let Some(r) = boundary {
            self.push(site, ConditionalBoundary, r);
        }
        let unit_step = is_literal_one(rhs);
        match op {
            BinOp::AddAssign(_) if unit_step => self.push(site, IncrementFlip, "-="),
            BinOp::SubAssign(_) if unit_step => self.push(site, IncrementFlip, "+="),
            _ => {}
        }
        let arithmetic = match op {
            BinOp::Add(_) => Some("-"),
            BinOp::Sub(_) => Some("+"),
            BinOp::Mul(_) => Some("/"),
            BinOp::Div(_) => Some("*"),
            BinOp::Rem(_) => Some("*"),
            BinOp::AddAssign(_) if !unit_step => Some("-="),
            BinOp::SubAssign(_) if !unit_step => Some("+="),
            BinOp::MulAssign(_) => Some("/="),
            BinOp::DivAssign(_) => Some("*="),
            BinOp::RemAssign(_) => Some("*="),
            _ => None,
        };
        if let Some(r) = arithmetic {
            self.push(site, ArithmeticReplacement, r);
        }
    }

    fn return_site(&mut self, expr: &Expr) {
        let site = self.index.node(expr);
        let text = &self.text[site.range()];
        let ty = self.return_type.unwrap_or("()");
        let replacement = match self.shape {
            ReturnShape::Bool => format!("!({text})"),
            ReturnShape::Int => {
                format!("{{ let v: {ty} = ({text}); if v == 0 {{ 1 }} else {{ 0 }} }}")
            }
            ReturnShape::Float => format!("{{ let v: {ty} = ({text}); -(v + 1.0) }}"),
            ReturnShape::Char => {
                format!("{{ let v: char = ({text}); if v == 'A' {{ ' ' }} else {{ 'A' }} }}")
            }
            ReturnShape::OwnedString | ReturnShape::StrRef => {
                match self.shape.constant(ConstantTag::StringEmpty) {
                    Some(c) => c,
                    None => return,
                }
            }
            ReturnShape::OwnedVec | ReturnShape::Slice { .. } => {
                match self.shape.constant(ConstantTag::EmptySequence) {
                    Some(c) => c,
                    None => return,
                }
            }
            ReturnShape::Option => "None".to_owned(),
            _ => return,
        };
        self.push(site, MutationOperator::ReturnValueMutation, replacement);
    }
}

fn is_literal_one(e: &Expr) -> bool {
    match e {
        Expr::Lit(ExprLit { lit: Lit::Int(i), .. }) => i.base10_digits() == "1",
        Expr::Paren(p) => is_literal_one(&p.expr),
        _ => false,
    }
}

impl<'ast> Visit<'ast> for Scanner<'_> {
    fn visit_expr_binary(&mut self, e: &'ast syn::ExprBinary) {
        self.binary(&e.op, &e.right);
        visit::visit_expr_binary(self, e);
    }

    fn visit_expr_closure(&mut self, e: &'ast syn::ExprClosure) {
        self.closure_depth += 1;
        visit::visit_expr_closure(self, e);
        self.closure_depth -= 1;
    }

    fn visit_expr_return(&mut self, e: &'ast syn::ExprReturn) {
        if self.closure_depth == 0 {
            if let Some(value) = &e.expr {
                self.return_site(value);
            }
        }
        visit::visit_expr_return(self, e);
    }

    fn visit_block(&mut self, b: &'ast Block) {
        for stmt in &b.stmts {
            if let Stmt::Expr(Expr::Call(_) | Expr::MethodCall(_), Some(_)) = stmt {
                self.push(self.index.node(stmt), MutationOperator::RemoveCall, "");
            }
        }
        visit::visit_block(self, b);
    }

    // Nested items are separate functions, not part of this body.
    fn visit_item(&mut self, _: &'ast syn::Item) {}
}

/// Detection outcome of one executed mutant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutantOutcome {
    pub mutant: MutantSpec,
    /// `None` when the mutant did not compile and is left out of scores.
    pub detected: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MutationResult {
    pub per_mutant: Vec<MutantOutcome>,
    pub per_method_score: BTreeMap<String, Option<f64>>,
}

impl MutationResult {
    pub fn from_outcomes(per_mutant: Vec<MutantOutcome>) -> Self {
        let mut grouped: BTreeMap<String, Vec<bool>> = BTreeMap::new();
        for o in &per_mutant {
            let entry = grouped.entry(o.mutant.method_id.clone()).or_default();
            if let Some(d) = o.detected {
                entry.push(d);
            }
        }
        let per_method_score = grouped
            .into_iter()
            .map(|(id, detected)| (id, method_mutation_score(&detected)))
            .collect();
        MutationResult {
            per_mutant,
            per_method_score,
        }
    }

    /// Detected and scored mutant counts over the methods accepted by
    /// `select`.
    pub fn tally(&self, mut select: impl FnMut(&str) -> bool) -> (u64, u64) {
        self.per_mutant
            .iter()
            .filter(|o| select(&o.mutant.method_id))
            .filter_map(|o| o.detected)
            .fold((0, 0), |(d, n), det| (d + u64::from(det), n + 1))
    }
}

/// Share of detected mutants; `None` without mutants.
pub fn method_mutation_score(detected: &[bool]) -> Option<f64> {
    if detected.is_empty() {
        return None;
    }
    Some(detected.iter().filter(|d| **d).count() as f64 / detected.len() as f64)
}

/// Patch applying mutant `index` of `method_id`'s mutant list.
pub fn synthesize_mutant(inventory: &MethodInventory, mutant: &MutantSpec, index: usize) -> Result<SourcePatch> {
    let method = inventory
        .get(&mutant.method_id)
        .ok_or_else(|| Error::Precondition(format!("no method `{}` in inventory", mutant.method_id)))?;
    if !method.span.contains(&mutant.site) {
        return Err(Error::ContractViolation(format!(
            "mutant site {:?} lies outside {}",
            mutant.site, method.id
        )));
    }
    build_patch(
        inventory,
        method,
        mutant.site,
        mutant.replacement.clone(),
        PatchOrigin::Mutant(index),
    )
}
