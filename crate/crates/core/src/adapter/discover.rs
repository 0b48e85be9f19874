//! Method discovery: walk the library's module tree from `src/lib.rs` and
//! describe every function with a body.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use syn::{Attribute, FnArg, ImplItem, Item, ItemImpl, Meta, ReturnType, TraitItem, Type};

use super::shape::ReturnShape;
use super::source::{sha256_hex, LineIndex};
use crate::error::{Error, Result};
use crate::model::{
    has_attr, structural_flags, EnclosingScope, MethodDescriptor, MethodNode, Visibility,
};

/// Every analyzable method of one project.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodInventory {
    pub project_root: PathBuf,
    pub methods: Vec<MethodDescriptor>,
    /// Digest over all parsed files (path and content).
    pub source_digest: String,
    /// Per-file content digests, keyed by path relative to the root.
    pub file_digests: BTreeMap<PathBuf, String>,
    /// The library crate root, when the project has one.
    pub crate_root: Option<PathBuf>,
}

impl MethodInventory {
    pub fn get(&self, id: &str) -> Option<&MethodDescriptor> {
        self.methods.iter().find(|m| m.id == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.methods.iter().map(|m| m.id.as_str())
    }

    /// Fail with a stale-inventory error unless `file` still has the bytes
    /// it had at discovery.
    pub fn check_fresh(&self, file: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(self.project_root.join(file))?;
        match self.file_digests.get(file) {
            Some(digest) if *digest == sha256_hex(&bytes) => Ok(bytes),
            _ => Err(Error::StaleInventory(file.to_path_buf())),
        }
    }

    pub fn check_all_fresh(&self) -> Result<()> {
        for file in self.file_digests.keys() {
            self.check_fresh(file)?;
        }
        Ok(())
    }
}

/// Describe every method of the library target under `project_root`.
///
/// Test code (`#[cfg(test)]` modules, `#[test]` functions, and the
/// `tests/`, `benches/`, `examples/` trees) is never part of the inventory.
/// Constructor analogs (associated functions returning `Self` without a
/// receiver) are omitted.
pub fn discover(project_root: &Path) -> Result<MethodInventory> {
    if !project_root.join("Cargo.toml").is_file() {
        return Err(Error::NotAProject(project_root.to_path_buf()));
    }
    let lib = PathBuf::from("src/lib.rs");
    let mut files = Vec::new();
    if project_root.join(&lib).is_file() {
        let mut seen = HashSet::new();
        load_module(project_root, lib.clone(), Vec::new(), &mut files, &mut seen)?;
    }

    let deprecated_types: HashSet<String> = files
        .iter()
        .flat_map(|f| deprecated_type_names(&f.ast.items))
        .collect();

    let mut methods = Vec::new();
    for file in &files {
        let index = LineIndex::new(&file.text);
        let walker = Walker {
            file,
            index: &index,
            deprecated_types: &deprecated_types,
        };
        let ctx = Ctx {
            path: file.module_path.clone(),
            deprecated: false,
            generated: file.generated,
        };
        walker.items(&file.ast.items, &ctx, &mut methods)?;
    }
    dedup_ids(&mut methods);

    let mut file_digests = BTreeMap::new();
    let mut all = Vec::new();
    for f in &files {
        let digest = sha256_hex(f.text.as_bytes());
        all.extend_from_slice(f.rel.to_string_lossy().as_bytes());
        all.push(0);
        all.extend_from_slice(digest.as_bytes());
        file_digests.insert(f.rel.clone(), digest);
    }

    Ok(MethodInventory {
        project_root: project_root.to_path_buf(),
        methods,
        source_digest: sha256_hex(&all),
        file_digests,
        crate_root: (!files.is_empty()).then_some(lib),
    })
}

struct ParsedFile {
    rel: PathBuf,
    module_path: Vec<String>,
    text: String,
    ast: syn::File,
    generated: bool,
}

fn load_module(
    root: &Path,
    rel: PathBuf,
    module_path: Vec<String>,
    out: &mut Vec<ParsedFile>,
    seen: &mut HashSet<PathBuf>,
) -> Result<()> {
    if !seen.insert(rel.clone()) {
        return Ok(());
    }
    let text = fs::read_to_string(root.join(&rel))?;
    let ast = syn::parse_file(&text).map_err(|e| {
        let pos = e.span().start();
        Error::Discovery {
            file: rel.clone(),
            line: pos.line,
            column: pos.column + 1,
            message: e.to_string(),
        }
    })?;
    let generated = text.lines().take(5).any(|l| l.contains("@generated"));

    // Children of `lib.rs` and `mod.rs` live beside them; children of
    // `foo.rs` live in `foo/`.
    let parent = rel.parent().unwrap_or(Path::new("")).to_path_buf();
    let stem = rel.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    let child_dir = if module_path.is_empty() || stem == "mod" {
        parent.clone()
    } else {
        parent.join(stem)
    };

    let mut children = Vec::new();
    collect_child_files(root, &ast.items, &child_dir, &parent, &module_path, &mut children);
    out.push(ParsedFile {
        rel,
        module_path,
        text,
        ast,
        generated,
    });
    for (child, path) in children {
        load_module(root, child, path, out, seen)?;
    }
    Ok(())
}

fn collect_child_files(
    root: &Path,
    items: &[Item],
    dir: &Path,
    file_dir: &Path,
    module_path: &[String],
    out: &mut Vec<(PathBuf, Vec<String>)>,
) {
    for item in items {
        let Item::Mod(m) = item else { continue };
        if is_test_only(&m.attrs) {
            continue;
        }
        let name = m.ident.to_string();
        let mut path = module_path.to_vec();
        path.push(name.clone());
        match &m.content {
            Some((_, inner)) => {
                collect_child_files(root, inner, &dir.join(&name), file_dir, &path, out)
            }
            None => {
                let candidates = match path_attr(&m.attrs) {
                    Some(explicit) => vec![file_dir.join(explicit)],
                    None => vec![
                        dir.join(format!("{name}.rs")),
                        dir.join(&name).join("mod.rs"),
                    ],
                };
                if let Some(found) = candidates.into_iter().find(|c| root.join(c).is_file()) {
                    out.push((found, path));
                }
            }
        }
    }
}

fn path_attr(attrs: &[Attribute]) -> Option<String> {
    attrs.iter().find_map(|a| match &a.meta {
        Meta::NameValue(nv) if nv.path.is_ident("path") => match &nv.value {
            syn::Expr::Lit(syn::ExprLit {
                lit: syn::Lit::Str(s),
                ..
            }) => Some(s.value()),
            _ => None,
        },
        _ => None,
    })
}

/// `#[test]`, `#[cfg(test)]` and `#[cfg(all(test, ...))]` mark test-only items.
pub(crate) fn is_test_only(attrs: &[Attribute]) -> bool {
    attrs.iter().any(|a| {
        if a.path().is_ident("test") {
            return true;
        }
        if !a.path().is_ident("cfg") {
            return false;
        }
        a.parse_args::<Meta>().map(|m| cfg_requires_test(&m)).unwrap_or(false)
    })
}

fn cfg_requires_test(meta: &Meta) -> bool {
    match meta {
        Meta::Path(p) => p.is_ident("test"),
        Meta::List(list) if list.path.is_ident("all") => list
            .parse_args_with(syn::punctuated::Punctuated::<Meta, syn::Token![,]>::parse_terminated)
            .map(|items| items.iter().any(cfg_requires_test))
            .unwrap_or(false),
        _ => false,
    }
}

fn deprecated_type_names(items: &[Item]) -> Vec<String> {
    let mut out = Vec::new();
    for item in items {
        match item {
            Item::Struct(s) if has_attr(&s.attrs, "deprecated") => out.push(s.ident.to_string()),
            Item::Enum(e) if has_attr(&e.attrs, "deprecated") => out.push(e.ident.to_string()),
            Item::Union(u) if has_attr(&u.attrs, "deprecated") => out.push(u.ident.to_string()),
            Item::Mod(m) => {
                if let Some((_, inner)) = &m.content {
                    out.extend(deprecated_type_names(inner));
                }
            }
            _ => {}
        }
    }
    out
}

#[derive(Clone)]
struct Ctx {
    path: Vec<String>,
    deprecated: bool,
    generated: bool,
}

struct Walker<'a> {
    file: &'a ParsedFile,
    index: &'a LineIndex<'a>,
    deprecated_types: &'a HashSet<String>,
}

impl Walker<'_> {
    fn items(&self, items: &[Item], ctx: &Ctx, out: &mut Vec<MethodDescriptor>) -> Result<()> {
        for item in items {
            match item {
                Item::Fn(f) if !is_test_only(&f.attrs) => {
                    let node = MethodNode {
                        attrs: &f.attrs,
                        sig: &f.sig,
                        block: Some(&f.block),
                        span: self.index.node(f),
                    };
                    let vis = visibility(&f.vis);
                    out.push(self.describe(&node, &ctx.path, vis, &self.scope(ctx, None))?);
                }
                Item::Impl(imp) if !is_test_only(&imp.attrs) => self.impl_block(imp, ctx, out)?,
                Item::Trait(t) if !is_test_only(&t.attrs) => {
                    let mut path = ctx.path.clone();
                    path.push(t.ident.to_string());
                    let mut scope = self.scope(ctx, None);
                    scope.deprecated |= has_attr(&t.attrs, "deprecated");
                    for ti in &t.items {
                        let TraitItem::Fn(f) = ti else { continue };
                        let Some(block) = &f.default else { continue };
                        if is_test_only(&f.attrs) {
                            continue;
                        }
                        let node = MethodNode {
                            attrs: &f.attrs,
                            sig: &f.sig,
                            block: Some(block),
                            span: self.index.node(f),
                        };
                        out.push(self.describe(&node, &path, Visibility::Public, &scope)?);
                    }
                }
                Item::Mod(m) if !is_test_only(&m.attrs) => {
                    if let Some((_, inner)) = &m.content {
                        let mut child = ctx.clone();
                        child.path.push(m.ident.to_string());
                        child.deprecated |= has_attr(&m.attrs, "deprecated");
                        self.items(inner, &child, out)?;
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn impl_block(&self, imp: &ItemImpl, ctx: &Ctx, out: &mut Vec<MethodDescriptor>) -> Result<()> {
        let self_name = type_name(&imp.self_ty);
        let trait_name = imp
            .trait_
            .as_ref()
            .and_then(|(_, path, _)| path.segments.last())
            .map(|s| s.ident.to_string());
        let container = match &trait_name {
            Some(t) => format!("<{self_name} as {t}>"),
            None => self_name.clone(),
        };
        let mut path = ctx.path.clone();
        path.push(container);

        let mut scope = self.scope(ctx, trait_name);
        scope.deprecated |=
            has_attr(&imp.attrs, "deprecated") || self.deprecated_types.contains(&self_name);
        scope.generated |= has_attr(&imp.attrs, "automatically_derived");

        for ii in &imp.items {
            let ImplItem::Fn(f) = ii else { continue };
            if is_test_only(&f.attrs) || is_constructor(&f.sig, &self_name) {
                continue;
            }
            let vis = if imp.trait_.is_some() {
                Visibility::Public
            } else {
                visibility(&f.vis)
            };
            let node = MethodNode {
                attrs: &f.attrs,
                sig: &f.sig,
                block: Some(&f.block),
                span: self.index.node(f),
            };
            out.push(self.describe(&node, &path, vis, &scope)?);
        }
        Ok(())
    }

    fn scope(&self, ctx: &Ctx, impl_trait: Option<String>) -> EnclosingScope {
        EnclosingScope {
            impl_trait,
            deprecated: ctx.deprecated,
            generated: ctx.generated,
        }
    }

    fn describe(
        &self,
        node: &MethodNode<'_>,
        container: &[String],
        visibility: Visibility,
        scope: &EnclosingScope,
    ) -> Result<MethodDescriptor> {
        let sig = node.sig;
        let arity = sig
            .inputs
            .iter()
            .filter(|a| matches!(a, FnArg::Typed(_)))
            .count();
        let mut id = container.join("::");
        if !id.is_empty() {
            id.push_str("::");
        }
        id.push_str(&format!("{}/{}", sig.ident, arity));

        let declared = match &sig.output {
            ReturnType::Default => None,
            ReturnType::Type(_, ty) => Some(&**ty),
        };
        let shape = ReturnShape::of(declared);
        let return_type = declared
            .filter(|_| shape != ReturnShape::Unit)
            .map(|ty| self.file.text[self.index.node(ty).range()].to_owned());
        let block = node.block.expect("walker only builds nodes with bodies");

        Ok(MethodDescriptor {
            id,
            file: self.file.rel.clone(),
            span: self.index.node(block),
            return_category: shape.category(),
            return_type,
            flags: structural_flags(node, scope)?,
            visibility,
            is_const: sig.constness.is_some(),
        })
    }
}

fn visibility(vis: &syn::Visibility) -> Visibility {
    match vis {
        syn::Visibility::Public(_) => Visibility::Public,
        _ => Visibility::NonPublic,
    }
}

fn type_name(ty: &Type) -> String {
    match ty {
        Type::Path(p) => p
            .path
            .segments
            .last()
            .map(|s| s.ident.to_string())
            .unwrap_or_default(),
        Type::Reference(r) => type_name(&r.elem),
        Type::Paren(p) => type_name(&p.elem),
        Type::Group(g) => type_name(&g.elem),
        other => quote::quote!(#other).to_string().replace(' ', ""),
    }
}

fn is_constructor(sig: &syn::Signature, self_name: &str) -> bool {
    if sig.receiver().is_some() {
        return false;
    }
    match &sig.output {
        ReturnType::Type(_, ty) => {
            let name = type_name(ty);
            matches!(&**ty, Type::Path(_)) && (name == "Self" || name == self_name)
        }
        ReturnType::Default => false,
    }
}

fn dedup_ids(methods: &mut [MethodDescriptor]) {
    let mut counts: HashMap<String, usize> = HashMap::new();
    for m in methods.iter_mut() {
        let n = counts.entry(m.id.clone()).or_insert(0);
        *n += 1;
        if *n > 1 {
            m.id = format!("{}#{}", m.id, n);
        }
    }
}
