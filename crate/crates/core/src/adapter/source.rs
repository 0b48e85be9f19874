//! Byte-offset bookkeeping for parsed Rust source.

use proc_macro2::{LineColumn, Span, TokenStream, TokenTree};
use quote::ToTokens;

use crate::model::ByteSpan;

/// Maps proc-macro2 line/column positions (1-based lines, 0-based char
/// columns) back to byte offsets in the text they were parsed from.
pub(crate) struct LineIndex<'a> {
    text: &'a str,
    line_starts: Vec<usize>,
}

impl<'a> LineIndex<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        let mut line_starts = vec![0];
        line_starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        LineIndex { text, line_starts }
    }

    pub(crate) fn offset(&self, pos: LineColumn) -> usize {
        let Some(&start) = self.line_starts.get(pos.line.saturating_sub(1)) else {
            return self.text.len();
        };
        let line = &self.text[start..];
        start
            + line
                .char_indices()
                .nth(pos.column)
                .map(|(i, _)| i)
                .unwrap_or(line.len())
    }

    pub(crate) fn span(&self, span: Span) -> ByteSpan {
        ByteSpan::new(self.offset(span.start()), self.offset(span.end()))
    }

    /// Range covered by a syntax node, from its first to its last token.
    pub(crate) fn node<T: ToTokens + ?Sized>(&self, node: &T) -> ByteSpan {
        self.tokens(node.to_token_stream())
    }

    pub(crate) fn tokens(&self, tokens: TokenStream) -> ByteSpan {
        let mut range: Option<ByteSpan> = None;
        for tt in tokens {
            let s = self.span(token_span(&tt));
            range = Some(match range {
                None => s,
                Some(r) => ByteSpan::new(r.start.min(s.start), r.end.max(s.end)),
            });
        }
        range.unwrap_or(ByteSpan::new(0, 0))
    }
}

fn token_span(tt: &TokenTree) -> Span {
    match tt {
        TokenTree::Group(g) => g.span(),
        other => other.span(),
    }
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maps_multibyte_columns() {
        let text = "fn a() {}\n// é\nfn b() { 1 }\n";
        let file: syn::File = syn::parse_str(text).unwrap();
        let idx = LineIndex::new(text);
        let syn::Item::Fn(b) = &file.items[1] else {
            panic!()
        };
        let span = idx.node(&*b.block);
        assert_eq!(&text[span.range()], "{ 1 }");
    }
}
