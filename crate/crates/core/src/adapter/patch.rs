use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::discover::MethodInventory;
use super::shape::ReturnShape;
use super::source::sha256_hex;
use crate::error::{Error, Result};
use crate::model::{transformations_for, ByteSpan, MethodDescriptor, TransformationKind, TransformationSpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatchOrigin {
    Variant(TransformationSpec),
    /// Index into the method's conventional mutant list.
    Mutant(usize),
}

/// A single-span textual replacement in one file of the project.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourcePatch {
    pub file: PathBuf,
    pub span: ByteSpan,
    pub replacement: String,
    pub method_id: String,
    pub origin: PatchOrigin,
    /// Digest of the unpatched file; applying to any other content fails.
    pub base_digest: String,
}

/// Bytes needed to undo an applied patch.
#[must_use = "an applied patch should be restored"]
pub struct AppliedPatch {
    path: PathBuf,
    original: Vec<u8>,
    base_digest: String,
}

impl SourcePatch {
    pub fn patched_text(&self, original: &str) -> Result<String> {
        if self.span.end > original.len()
            || !original.is_char_boundary(self.span.start)
            || !original.is_char_boundary(self.span.end)
        {
            return Err(Error::StaleInventory(self.file.clone()));
        }
        let mut out = String::with_capacity(original.len() + self.replacement.len());
        out.push_str(&original[..self.span.start]);
        out.push_str(&self.replacement);
        out.push_str(&original[self.span.end..]);
        Ok(out)
    }

    /// Write the patched file under `root`, which must hold the same bytes
    /// the patch was synthesized against.
    pub fn apply(&self, root: &Path) -> Result<AppliedPatch> {
        let path = root.join(&self.file);
        let original = fs::read(&path)?;
        if sha256_hex(&original) != self.base_digest {
            return Err(Error::StaleInventory(self.file.clone()));
        }
        let text = String::from_utf8(original.clone())
            .map_err(|_| Error::StaleInventory(self.file.clone()))?;
        fs::write(&path, self.patched_text(&text)?)?;
        Ok(AppliedPatch {
            path,
            original,
            base_digest: self.base_digest.clone(),
        })
    }
}

impl AppliedPatch {
    pub fn restore(self) -> Result<()> {
        fs::write(&self.path, &self.original)?;
        let now = fs::read(&self.path)?;
        if sha256_hex(&now) != self.base_digest {
            return Err(Error::Environment(format!(
                "{} did not restore to its original content",
                self.path.display()
            )));
        }
        Ok(())
    }
}

/// Transformations from the return-type table that can actually be
/// written for this method's declared type, in table order.
pub fn applicable_transformations(method: &MethodDescriptor) -> Vec<TransformationSpec> {
    let shape = ReturnShape::parse(method.return_type.as_deref());
    transformations_for(method.return_category)
        .into_iter()
        .filter(|spec| match spec.constant_tag() {
            None => true,
            Some(tag) => shape.constant(tag).is_some(),
        })
        .collect()
}

/// Body text replacing the method's block for `spec`.
pub fn render_body(method: &MethodDescriptor, spec: TransformationSpec) -> Result<String> {
    if !spec.admissible_for(method.return_category) {
        return Err(Error::Precondition(format!(
            "{spec} is not admissible for {} returning {:?}",
            method.id, method.return_category
        )));
    }
    match spec.kind() {
        TransformationKind::StripBody => Ok("{}".to_owned()),
        TransformationKind::FixedReturn => {
            let tag = spec.constant_tag().expect("fixed return has a constant");
            let shape = ReturnShape::parse(method.return_type.as_deref());
            let value = shape.constant(tag).ok_or_else(|| {
                Error::Precondition(format!(
                    "{spec} is inapplicable to {}: no neutral value for `{}`",
                    method.id,
                    method.return_type.as_deref().unwrap_or("()")
                ))
            })?;
            Ok(format!("{{ {value} }}"))
        }
    }
}

/// Build the patch that replaces `method_id`'s body with the extreme
/// variant described by `spec`.
pub fn synthesize_variant(
    inventory: &MethodInventory,
    method_id: &str,
    spec: TransformationSpec,
) -> Result<SourcePatch> {
    let method = inventory
        .get(method_id)
        .ok_or_else(|| Error::Precondition(format!("no method `{method_id}` in inventory")))?;
    let replacement = render_body(method, spec)?;
    build_patch(
        inventory,
        method,
        method.span,
        replacement,
        PatchOrigin::Variant(spec),
    )
}

pub(crate) fn build_patch(
    inventory: &MethodInventory,
    method: &MethodDescriptor,
    span: ByteSpan,
    replacement: String,
    origin: PatchOrigin,
) -> Result<SourcePatch> {
    let bytes = inventory.check_fresh(&method.file)?;
    let text = String::from_utf8(bytes).map_err(|_| Error::StaleInventory(method.file.clone()))?;
    let patch = SourcePatch {
        file: method.file.clone(),
        span,
        replacement,
        method_id: method.id.clone(),
        origin,
        base_digest: sha256_hex(text.as_bytes()),
    };
    let patched = patch.patched_text(&text)?;
    if let Err(e) = syn::parse_file(&patched) {
        return Err(Error::Precondition(format!(
            "patch for {} does not parse: {e}",
            method.id
        )));
    }
    Ok(patch)
}
