//! Domain types for analyzable methods, extreme transformations and
//! classifications, plus the structural filters that decide which covered
//! methods are worth transforming.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use syn::{Attribute, Block, Expr, FnArg, Lit, Pat, ReturnType, Signature, Stmt, UnOp};

use crate::error::{Error, Result};

/// What a method hands back to its caller, bucketed by the constants an
/// extreme transformation may return in its place.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReturnCategory {
    Unit,
    Boolean,
    Integral,
    Floating,
    Character,
    Textual,
    Reference,
    Sequence,
}

impl ReturnCategory {
    pub const ALL: [ReturnCategory; 8] = [
        ReturnCategory::Unit,
        ReturnCategory::Boolean,
        ReturnCategory::Integral,
        ReturnCategory::Floating,
        ReturnCategory::Character,
        ReturnCategory::Textual,
        ReturnCategory::Reference,
        ReturnCategory::Sequence,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Visibility {
    Public,
    NonPublic,
}

/// Half-open byte range `start..end` inside one source file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ByteSpan {
    pub start: usize,
    pub end: usize,
}

impl ByteSpan {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        ByteSpan { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, other: &ByteSpan) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.end
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StructuralFlags {
    pub is_getter: bool,
    pub is_setter: bool,
    pub is_constant_return: bool,
    pub is_empty_unit: bool,
    pub is_deprecated: bool,
    pub is_generated: bool,
    pub is_hash_protocol: bool,
}

/// One analyzable function or method.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MethodDescriptor {
    /// `module::path::Container::name/arity`, unique within an inventory.
    pub id: String,
    /// Source file, relative to the project root.
    pub file: PathBuf,
    /// The body block including its braces.
    pub span: ByteSpan,
    pub return_category: ReturnCategory,
    /// Declared return type as written, `None` for unit.
    pub return_type: Option<String>,
    pub flags: StructuralFlags,
    pub visibility: Visibility,
    pub is_const: bool,
}

impl MethodDescriptor {
    pub fn returns_value(&self) -> bool {
        self.return_category != ReturnCategory::Unit
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformationKind {
    StripBody,
    FixedReturn,
}

/// The canned values an extreme transformation may return, one row of the
/// return-type table per category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantTag {
    TrueVal,
    FalseVal,
    IntZero,
    IntOne,
    FloatZero,
    FloatTenth,
    CharSpace,
    #[serde(rename = "char_A")]
    CharA,
    StringEmpty,
    #[serde(rename = "string_A")]
    StringA,
    NullRef,
    EmptySequence,
}

impl ConstantTag {
    pub const ALL: [ConstantTag; 12] = [
        ConstantTag::TrueVal,
        ConstantTag::FalseVal,
        ConstantTag::IntZero,
        ConstantTag::IntOne,
        ConstantTag::FloatZero,
        ConstantTag::FloatTenth,
        ConstantTag::CharSpace,
        ConstantTag::CharA,
        ConstantTag::StringEmpty,
        ConstantTag::StringA,
        ConstantTag::NullRef,
        ConstantTag::EmptySequence,
    ];

    /// The single return category this constant may stand in for.
    pub fn category(self) -> ReturnCategory {
        use ConstantTag::*;
        match self {
            TrueVal | FalseVal => ReturnCategory::Boolean,
            IntZero | IntOne => ReturnCategory::Integral,
            FloatZero | FloatTenth => ReturnCategory::Floating,
            CharSpace | CharA => ReturnCategory::Character,
            StringEmpty | StringA => ReturnCategory::Textual,
            NullRef => ReturnCategory::Reference,
            EmptySequence => ReturnCategory::Sequence,
        }
    }

    pub fn name(self) -> &'static str {
        use ConstantTag::*;
        match self {
            TrueVal => "true_val",
            FalseVal => "false_val",
            IntZero => "int_zero",
            IntOne => "int_one",
            FloatZero => "float_zero",
            FloatTenth => "float_tenth",
            CharSpace => "char_space",
            CharA => "char_A",
            StringEmpty => "string_empty",
            StringA => "string_A",
            NullRef => "null_ref",
            EmptySequence => "empty_sequence",
        }
    }

    pub fn from_name(name: &str) -> Option<ConstantTag> {
        ConstantTag::ALL.into_iter().find(|t| t.name() == name)
    }
}

/// One extreme transformation: either drop the body of a unit method, or
/// replace a value-returning body with a single canned return.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct TransformationSpec {
    kind: TransformationKind,
    constant_tag: Option<ConstantTag>,
}

impl TransformationSpec {
    pub const fn strip_body() -> Self {
        TransformationSpec {
            kind: TransformationKind::StripBody,
            constant_tag: None,
        }
    }

    pub const fn fixed_return(tag: ConstantTag) -> Self {
        TransformationSpec {
            kind: TransformationKind::FixedReturn,
            constant_tag: Some(tag),
        }
    }

    pub fn kind(&self) -> TransformationKind {
        self.kind
    }

    pub fn constant_tag(&self) -> Option<ConstantTag> {
        self.constant_tag
    }

    /// Whether this spec may be applied to a method of `category`.
    pub fn admissible_for(&self, category: ReturnCategory) -> bool {
        match self.constant_tag {
            None => category == ReturnCategory::Unit,
            Some(tag) => tag.category() == category,
        }
    }

    pub fn label(&self) -> &'static str {
        match self.constant_tag {
            None => "strip_body",
            Some(tag) => tag.name(),
        }
    }
}

impl fmt::Display for TransformationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl From<TransformationSpec> for String {
    fn from(spec: TransformationSpec) -> String {
        spec.label().to_owned()
    }
}

impl TryFrom<String> for TransformationSpec {
    type Error = String;

    fn try_from(value: String) -> std::result::Result<Self, String> {
        if value == "strip_body" {
            return Ok(TransformationSpec::strip_body());
        }
        ConstantTag::from_name(&value)
            .map(TransformationSpec::fixed_return)
            .ok_or_else(|| format!("unknown transformation `{value}`"))
    }
}

/// The extreme transformations for a return category, in table order.
pub fn transformations_for(category: ReturnCategory) -> Vec<TransformationSpec> {
    use ConstantTag::*;
    let tags: &[ConstantTag] = match category {
        ReturnCategory::Unit => return vec![TransformationSpec::strip_body()],
        ReturnCategory::Boolean => &[TrueVal, FalseVal],
        ReturnCategory::Integral => &[IntZero, IntOne],
        ReturnCategory::Floating => &[FloatZero, FloatTenth],
        ReturnCategory::Character => &[CharSpace, CharA],
        ReturnCategory::Textual => &[StringEmpty, StringA],
        ReturnCategory::Reference => &[NullRef],
        ReturnCategory::Sequence => &[EmptySequence],
    };
    tags.iter()
        .copied()
        .map(TransformationSpec::fixed_return)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    NotCovered,
    GetterOrSetter,
    ConstantReturn,
    EmptyUnit,
    Deprecated,
    Generated,
    HashProtocol,
    ConstructorOrInitializer,
    UserFiltered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InclusionDecision {
    pub included: bool,
    pub exclusion_reason: Option<ExclusionReason>,
}

impl InclusionDecision {
    pub fn included() -> Self {
        InclusionDecision {
            included: true,
            exclusion_reason: None,
        }
    }

    pub fn excluded(reason: ExclusionReason) -> Self {
        InclusionDecision {
            included: false,
            exclusion_reason: Some(reason),
        }
    }
}

/// Decide whether a method enters the extreme-transformation analysis.
///
/// Uncovered methods are rejected first; the structural filters then apply
/// in a fixed order so that a method with several flags always reports the
/// same reason.
pub fn is_method_under_analysis(descriptor: &MethodDescriptor, covered: bool) -> InclusionDecision {
    if !covered {
        return InclusionDecision::excluded(ExclusionReason::NotCovered);
    }
    let f = &descriptor.flags;
    let ordered = [
        (f.is_hash_protocol, ExclusionReason::HashProtocol),
        (f.is_getter || f.is_setter, ExclusionReason::GetterOrSetter),
        (f.is_constant_return, ExclusionReason::ConstantReturn),
        (f.is_empty_unit, ExclusionReason::EmptyUnit),
        (f.is_deprecated, ExclusionReason::Deprecated),
        (f.is_generated, ExclusionReason::Generated),
    ];
    match ordered.iter().find(|(set, _)| *set) {
        Some((_, reason)) => InclusionDecision::excluded(*reason),
        None => InclusionDecision::included(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    PseudoTested,
    Required,
    NotCovered,
    Excluded,
    Unassessable,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Classification {
    pub label: Label,
    pub reason: Option<String>,
}

impl Classification {
    pub fn new(label: Label) -> Self {
        Classification {
            label,
            reason: None,
        }
    }

    pub fn with_reason(label: Label, reason: impl Into<String>) -> Self {
        Classification {
            label,
            reason: Some(reason.into()),
        }
    }
}

/// Borrowed view of a function definition as parsed.
#[derive(Clone, Copy)]
pub struct MethodNode<'a> {
    pub attrs: &'a [Attribute],
    pub sig: &'a Signature,
    pub block: Option<&'a Block>,
    /// Byte range of the whole definition, for error reporting.
    pub span: ByteSpan,
}

/// Facts about the items enclosing a method that affect its flags.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EnclosingScope {
    /// Last path segment of the implemented trait, if inside a trait impl.
    pub impl_trait: Option<String>,
    /// An enclosing impl, module, or the self type is marked `#[deprecated]`.
    pub deprecated: bool,
    /// An enclosing impl is `#[automatically_derived]` or the file is marked `@generated`.
    pub generated: bool,
}

const HASH_PROTOCOL: &[(&str, &[&str])] = &[("Hash", &["hash"]), ("PartialEq", &["eq", "ne"])];

/// Compute structural flags from syntax alone.
pub fn structural_flags(node: &MethodNode<'_>, scope: &EnclosingScope) -> Result<StructuralFlags> {
    let block = node.block.ok_or_else(|| Error::StructuralAnalysis {
        start: node.span.start,
        end: node.span.end,
        message: format!("`{}` has no body", node.sig.ident),
    })?;

    let unit = returns_unit(&node.sig.output);
    let single = single_statement(block);
    let is_getter = !unit && single.and_then(returned_expr).is_some_and(is_self_field_read);
    let is_setter = !is_getter && single.is_some_and(|s| is_param_store(s, node.sig));
    let is_constant_return = !unit && single.and_then(returned_expr).is_some_and(is_literal);
    let is_empty_unit = unit && block.stmts.is_empty();

    let name = node.sig.ident.to_string();
    let is_hash_protocol = scope.impl_trait.as_deref().is_some_and(|t| {
        HASH_PROTOCOL
            .iter()
            .any(|(trait_name, methods)| *trait_name == t && methods.contains(&name.as_str()))
    });

    Ok(StructuralFlags {
        is_getter,
        is_setter,
        is_constant_return,
        is_empty_unit,
        is_deprecated: scope.deprecated || has_attr(node.attrs, "deprecated"),
        is_generated: scope.generated || has_attr(node.attrs, "automatically_derived"),
        is_hash_protocol,
    })
}

pub(crate) fn has_attr(attrs: &[Attribute], name: &str) -> bool {
    attrs.iter().any(|a| a.path().is_ident(name))
}

pub(crate) fn returns_unit(output: &ReturnType) -> bool {
    match output {
        ReturnType::Default => true,
        ReturnType::Type(_, ty) => matches!(&**ty, syn::Type::Tuple(t) if t.elems.is_empty()),
    }
}

fn single_statement(block: &Block) -> Option<&Stmt> {
    match block.stmts.as_slice() {
        [only] => Some(only),
        _ => None,
    }
}

/// The value produced by a one-statement body: a tail expression or
/// `return expr;`.
fn returned_expr(stmt: &Stmt) -> Option<&Expr> {
    match stmt {
        Stmt::Expr(Expr::Return(ret), _) => ret.expr.as_deref(),
        Stmt::Expr(e, None) => Some(e),
        _ => None,
    }
}

fn strip_wrappers(mut e: &Expr) -> &Expr {
    loop {
        match e {
            Expr::Paren(p) => e = &p.expr,
            Expr::Group(g) => e = &g.expr,
            Expr::Reference(r) => e = &r.expr,
            _ => return e,
        }
    }
}

fn is_self_field(e: &Expr) -> bool {
    match strip_wrappers(e) {
        Expr::Field(field) => matches!(&*field.base, Expr::Path(p) if p.path.is_ident("self")),
        _ => false,
    }
}

fn is_self_field_read(e: &Expr) -> bool {
    match strip_wrappers(e) {
        Expr::MethodCall(call) if call.method == "clone" && call.args.is_empty() => {
            is_self_field(&call.receiver)
        }
        other => is_self_field(other),
    }
}

fn is_param_store(stmt: &Stmt, sig: &Signature) -> bool {
    let expr = match stmt {
        Stmt::Expr(e, _) => e,
        _ => return false,
    };
    let Expr::Assign(assign) = expr else {
        return false;
    };
    if !is_self_field(&assign.left) {
        return false;
    }
    let Expr::Path(rhs) = strip_wrappers(&assign.right) else {
        return false;
    };
    let Some(ident) = rhs.path.get_ident() else {
        return false;
    };
    sig.inputs.iter().any(|arg| match arg {
        FnArg::Typed(pt) => matches!(&*pt.pat, Pat::Ident(pi) if pi.ident == *ident),
        FnArg::Receiver(_) => false,
    })
}

fn is_literal(e: &Expr) -> bool {
    match e {
        Expr::Lit(_) => true,
        Expr::Paren(p) => is_literal(&p.expr),
        Expr::Group(g) => is_literal(&g.expr),
        Expr::Unary(u) if matches!(u.op, UnOp::Neg(_)) => {
            matches!(&*u.expr, Expr::Lit(l) if matches!(l.lit, Lit::Int(_) | Lit::Float(_)))
        }
        _ => false,
    }
}
