//! Return-type shapes and how each extreme constant is spelled in Rust.

use syn::Type;

use crate::model::{ConstantTag, ReturnCategory};

const INTEGERS: &[&str] = &[
    "i8", "i16", "i32", "i64", "i128", "isize", "u8", "u16", "u32", "u64", "u128", "usize",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ReturnShape {
    Unit,
    Bool,
    Int,
    Float,
    Char,
    OwnedString,
    StrRef,
    OwnedVec,
    Slice { mutable: bool },
    Option,
    Result,
    RawPtr { mutable: bool },
    /// Anything else with a plausible `Default` impl.
    Defaultable,
    /// No neutral value can be written (`impl Trait`, `!`, borrowed objects).
    Opaque,
}

impl ReturnShape {
    pub(crate) fn of(ty: Option<&Type>) -> ReturnShape {
        match ty {
            None => ReturnShape::Unit,
            Some(ty) => shape_of(ty),
        }
    }

    pub(crate) fn parse(return_type: Option<&str>) -> ReturnShape {
        match return_type {
            None => ReturnShape::Unit,
            Some(text) => match syn::parse_str::<Type>(text) {
                Ok(ty) => shape_of(&ty),
                Err(_) => ReturnShape::Opaque,
            },
        }
    }

    pub(crate) fn category(self) -> ReturnCategory {
        use ReturnShape::*;
        match self {
            Unit => ReturnCategory::Unit,
            Bool => ReturnCategory::Boolean,
            Int => ReturnCategory::Integral,
            Float => ReturnCategory::Floating,
            Char => ReturnCategory::Character,
            OwnedString | StrRef => ReturnCategory::Textual,
            OwnedVec | Slice { .. } => ReturnCategory::Sequence,
            Option | Result | RawPtr { .. } | Defaultable | Opaque => ReturnCategory::Reference,
        }
    }

    /// Rust expression for `tag` in a function returning this shape, or
    /// `None` when the constant is inadmissible or cannot be written.
    pub(crate) fn constant(self, tag: ConstantTag) -> Option<String> {
        use ConstantTag::*;
        use ReturnShape::*;
        if tag.category() != self.category() {
            return None;
        }
        let text = match (self, tag) {
            (Bool, TrueVal) => "true",
            (Bool, FalseVal) => "false",
            (Int, IntZero) => "0",
            (Int, IntOne) => "1",
            (Float, FloatZero) => "0.0",
            (Float, FloatTenth) => "0.1",
            (Char, CharSpace) => "' '",
            (Char, CharA) => "'A'",
            (OwnedString, StringEmpty) => "String::new()",
            (OwnedString, StringA) => "String::from(\"A\")",
            (StrRef, StringEmpty) => "\"\"",
            (StrRef, StringA) => "\"A\"",
            (OwnedVec, EmptySequence) => "Vec::new()",
            (Slice { mutable: false }, EmptySequence) => "&[]",
            (Slice { mutable: true }, EmptySequence) => "&mut []",
            (Option, NullRef) => "None",
            (Result, NullRef) => "Ok(Default::default())",
            (RawPtr { mutable: false }, NullRef) => "::std::ptr::null()",
            (RawPtr { mutable: true }, NullRef) => "::std::ptr::null_mut()",
            (Defaultable, NullRef) => "Default::default()",
            _ => return None,
        };
        Some(text.to_owned())
    }
}

fn shape_of(ty: &Type) -> ReturnShape {
    match ty {
        Type::Paren(p) => shape_of(&p.elem),
        Type::Group(g) => shape_of(&g.elem),
        Type::Tuple(t) if t.elems.is_empty() => ReturnShape::Unit,
        Type::Tuple(_) | Type::Array(_) => ReturnShape::Defaultable,
        Type::Path(p) if p.qself.is_none() => {
            let Some(last) = p.path.segments.last() else {
                return ReturnShape::Opaque;
            };
            let name = last.ident.to_string();
            match name.as_str() {
                "bool" => ReturnShape::Bool,
                "f32" | "f64" => ReturnShape::Float,
                "char" => ReturnShape::Char,
                "String" => ReturnShape::OwnedString,
                "Vec" => ReturnShape::OwnedVec,
                "Option" => ReturnShape::Option,
                "Result" => ReturnShape::Result,
                n if INTEGERS.contains(&n) => ReturnShape::Int,
                _ => ReturnShape::Defaultable,
            }
        }
        Type::Path(_) => ReturnShape::Defaultable,
        Type::Reference(r) => match &*r.elem {
            Type::Path(p) if p.path.is_ident("str") && r.mutability.is_none() => ReturnShape::StrRef,
            Type::Slice(_) => ReturnShape::Slice {
                mutable: r.mutability.is_some(),
            },
            _ => ReturnShape::Opaque,
        },
        Type::Ptr(p) => ReturnShape::RawPtr {
            mutable: p.mutability.is_some(),
        },
        _ => ReturnShape::Opaque,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(text: &str) -> ReturnShape {
        ReturnShape::parse(Some(text))
    }

    #[test]
    fn categories_follow_declared_types() {
        assert_eq!(shape("()").category(), ReturnCategory::Unit);
        assert_eq!(shape("bool").category(), ReturnCategory::Boolean);
        assert_eq!(shape("u64").category(), ReturnCategory::Integral);
        assert_eq!(shape("std::primitive::usize").category(), ReturnCategory::Integral);
        assert_eq!(shape("f32").category(), ReturnCategory::Floating);
        assert_eq!(shape("char").category(), ReturnCategory::Character);
        assert_eq!(shape("String").category(), ReturnCategory::Textual);
        assert_eq!(shape("&'a str").category(), ReturnCategory::Textual);
        assert_eq!(shape("Vec<u8>").category(), ReturnCategory::Sequence);
        assert_eq!(shape("&[u8]").category(), ReturnCategory::Sequence);
        assert_eq!(shape("Option<u8>").category(), ReturnCategory::Reference);
        assert_eq!(shape("T").category(), ReturnCategory::Reference);
        assert_eq!(shape("impl Iterator<Item = u8>"), ReturnShape::Opaque);
        assert_eq!(shape("&Foo"), ReturnShape::Opaque);
    }

    #[test]
    fn constants_only_for_matching_category() {
        assert_eq!(shape("bool").constant(ConstantTag::IntZero), None);
        assert_eq!(shape("u8").constant(ConstantTag::IntOne).as_deref(), Some("1"));
        assert_eq!(shape("&mut [u8]").constant(ConstantTag::EmptySequence).as_deref(), Some("&mut []"));
        assert_eq!(shape("Option<Self>").constant(ConstantTag::NullRef).as_deref(), Some("None"));
        assert_eq!(shape("impl Fn()").constant(ConstantTag::NullRef), None);
    }
}
