//! Minimal owned XML element tree on top of `quick-xml`.
//!
//! Every document format in this crate (SCL, the SG-ML proprietary files,
//! PLCopen) is read into an [`Element`] tree first and then mapped onto typed
//! models. Comments, processing instructions and the XML declaration are
//! dropped. Whitespace-only text inside elements that have child elements is
//! dropped as insignificant; the text of leaf elements is kept exactly as
//! written (CDATA sections are taken raw, entity references are decoded).

use std::fmt::Write as _;

use quick_xml::escape::{escape, partial_escape};
use quick_xml::events::Event;
use quick_xml::Reader;

/// Position-annotated XML syntax error.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed XML at line {line}, column {column} (byte {offset}): {message}")]
pub struct XmlError {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl XmlError {
    fn at(source: &str, offset: usize, message: impl Into<String>) -> Self {
        let offset = offset.min(source.len());
        let before = &source.as_bytes()[..offset];
        let line = before.iter().filter(|b| **b == b'\n').count() + 1;
        let column = match before.iter().rposition(|b| *b == b'\n') {
            Some(nl) => offset - nl,
            None => offset + 1,
        };
        XmlError {
            offset,
            line,
            column,
            message: message.into(),
        }
    }
}

/// An XML element with ordered attributes, child elements and text content.
#[derive(Debug, Clone, Default)]
pub struct Element {
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<Element>,
    pub text: String,
    /// Byte range of the element in the source it was parsed from.
    pub span: Option<(usize, usize)>,
}

impl Element {
    pub fn new(name: impl Into<String>) -> Self {
        Element {
            name: name.into(),
            ..Element::default()
        }
    }

    pub fn with_attr(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.set_attr(key, value);
        self
    }

    pub fn with_child(mut self, child: Element) -> Self {
        self.children.push(child);
        self
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Self {
        self.text = text.into();
        self
    }

    /// Name without namespace prefix.
    pub fn local_name(&self) -> &str {
        local(&self.name)
    }

    pub fn attr(&self, key: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn set_attr(&mut self, key: impl Into<String>, value: impl Into<String>) {
        let key = key.into();
        let value = value.into();
        match self.attrs.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.attrs.push((key, value)),
        }
    }

    pub fn child(&self, local_name: &str) -> Option<&Element> {
        self.children.iter().find(|c| c.local_name() == local_name)
    }

    pub fn children_named<'a>(&'a self, local_name: &'a str) -> impl Iterator<Item = &'a Element> + 'a {
        self.children
            .iter()
            .filter(move |c| c.local_name() == local_name)
    }

    /// Number of elements in this subtree, including `self`.
    pub fn element_count(&self) -> usize {
        1 + self.children.iter().map(Element::element_count).sum::<usize>()
    }

    /// Visit every element of the subtree in document order.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Element)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }

    pub fn walk_mut(&mut self, f: &mut dyn FnMut(&mut Element)) {
        f(self);
        for c in &mut self.children {
            c.walk_mut(f);
        }
    }

    /// Serialize with two-space indentation starting at `depth`.
    pub fn write_to(&self, out: &mut String, depth: usize) {
        indent(out, depth);
        out.push('<');
        out.push_str(&self.name);
        for (k, v) in &self.attrs {
            let _ = write!(out, " {}=\"{}\"", k, escape(v.as_str()));
        }
        if self.children.is_empty() && self.text.is_empty() {
            out.push_str("/>\n");
            return;
        }
        out.push('>');
        if self.children.is_empty() {
            out.push_str(&partial_escape(self.text.as_str()));
        } else {
            out.push('\n');
            if !self.text.trim().is_empty() {
                indent(out, depth + 1);
                out.push_str(&partial_escape(self.text.trim()));
                out.push('\n');
            }
            for c in &self.children {
                c.write_to(out, depth + 1);
            }
            indent(out, depth);
        }
        let _ = writeln!(out, "</{}>", self.name);
    }

    pub fn to_xml_string(&self) -> String {
        let mut s = String::new();
        self.write_to(&mut s, 0);
        s
    }
}

/// Structural equality: attribute order, span and surrounding whitespace of
/// text are ignored.
impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        if self.name != other.name || self.attrs.len() != other.attrs.len() {
            return false;
        }
        let mut a: Vec<_> = self.attrs.iter().collect();
        let mut b: Vec<_> = other.attrs.iter().collect();
        a.sort();
        b.sort();
        a == b && self.text.trim() == other.text.trim() && self.children == other.children
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

pub fn local(name: &str) -> &str {
    match name.rfind(':') {
        Some(i) => &name[i + 1..],
        None => name,
    }
}

/// A parsed document: its root element plus the source text for verbatim
/// slicing of subtrees.
#[derive(Debug, Clone)]
pub struct XmlDocument {
    pub root: Element,
    pub source: String,
}

impl XmlDocument {
    /// Verbatim source text of an element parsed from this document.
    pub fn verbatim(&self, el: &Element) -> Option<&str> {
        el.span.and_then(|(s, e)| self.source.get(s..e))
    }
}

/// Parse UTF-8 bytes into an element tree.
pub fn parse(bytes: &[u8]) -> Result<XmlDocument, XmlError> {
    let source = match std::str::from_utf8(bytes) {
        Ok(s) => s.to_owned(),
        Err(e) => {
            let lossy = String::from_utf8_lossy(bytes).into_owned();
            return Err(XmlError::at(&lossy, e.valid_up_to(), "invalid UTF-8"));
        }
    };
    let root = parse_str(&source)?;
    Ok(XmlDocument { root, source })
}

fn parse_str(source: &str) -> Result<Element, XmlError> {
    let mut reader = Reader::from_str(source);
    reader.config_mut().trim_text(false);
    let mut stack: Vec<Element> = Vec::new();
    let mut root: Option<Element> = None;

    loop {
        let before = reader.buffer_position() as usize;
        let event = reader
            .read_event()
            .map_err(|e| XmlError::at(source, reader.error_position() as usize, e.to_string()))?;
        let after = reader.buffer_position() as usize;
        match event {
            Event::Start(start) | Event::Empty(start) if root.is_some() => {
                let _ = start;
                return Err(XmlError::at(source, before, "content after the root element"));
            }
            Event::Start(start) => {
                let el = open_element(source, before, &start)?;
                stack.push(Element {
                    span: Some((before, 0)),
                    ..el
                });
            }
            Event::Empty(start) => {
                let mut el = open_element(source, before, &start)?;
                el.span = Some((before, after));
                attach(&mut stack, &mut root, el);
            }
            Event::End(_) => {
                let mut el = stack
                    .pop()
                    .ok_or_else(|| XmlError::at(source, before, "unexpected closing tag"))?;
                if let Some((s, _)) = el.span {
                    el.span = Some((s, after));
                }
                if !el.children.is_empty() && el.text.trim().is_empty() {
                    el.text.clear();
                }
                attach(&mut stack, &mut root, el);
            }
            Event::Text(t) => {
                let text = t
                    .unescape()
                    .map_err(|e| XmlError::at(source, before, e.to_string()))?;
                match stack.last_mut() {
                    Some(top) => top.text.push_str(&text),
                    None if text.trim().is_empty() => {}
                    None => return Err(XmlError::at(source, before, "text outside the root element")),
                }
            }
            Event::CData(c) => {
                let raw = std::str::from_utf8(c.as_ref())
                    .map_err(|_| XmlError::at(source, before, "invalid UTF-8 in CDATA"))?;
                match stack.last_mut() {
                    Some(top) => top.text.push_str(raw),
                    None => return Err(XmlError::at(source, before, "CDATA outside the root element")),
                }
            }
            Event::Eof => break,
            // comments, declarations, processing instructions, doctype
            _ => {}
        }
    }
    if let Some(open) = stack.last() {
        return Err(XmlError::at(
            source,
            source.len(),
            format!("unclosed element <{}>", open.name),
        ));
    }
    root.ok_or_else(|| XmlError::at(source, 0, "document has no root element"))
}

fn open_element(
    source: &str,
    offset: usize,
    start: &quick_xml::events::BytesStart<'_>,
) -> Result<Element, XmlError> {
    let name = std::str::from_utf8(start.name().as_ref())
        .map_err(|_| XmlError::at(source, offset, "invalid UTF-8 in element name"))?
        .to_owned();
    let mut el = Element::new(name);
    for attr in start.attributes() {
        let attr = attr.map_err(|e| XmlError::at(source, offset, e.to_string()))?;
        let key = std::str::from_utf8(attr.key.as_ref())
            .map_err(|_| XmlError::at(source, offset, "invalid UTF-8 in attribute name"))?
            .to_owned();
        let value = attr
            .unescape_value()
            .map_err(|e| XmlError::at(source, offset, e.to_string()))?
            .into_owned();
        if el.attr(&key).is_some() {
            return Err(XmlError::at(source, offset, format!("duplicate attribute {key}")));
        }
        el.attrs.push((key, value));
    }
    Ok(el)
}

fn attach(stack: &mut [Element], root: &mut Option<Element>, el: Element) {
    match stack.last_mut() {
        Some(parent) => parent.children.push(el),
        None => *root = Some(el),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_elements_and_attributes() {
        let doc = parse(br#"<?xml version="1.0"?><a x="1"><!-- c --><b y="&amp;"/>  <c>hi</c></a>"#)
            .unwrap();
        assert_eq!(doc.root.name, "a");
        assert_eq!(doc.root.attr("x"), Some("1"));
        assert_eq!(doc.root.children.len(), 2);
        assert_eq!(doc.root.children[0].attr("y"), Some("&"));
        assert_eq!(doc.root.children[1].text, "hi");
        assert!(doc.root.text.is_empty());
    }

    #[test]
    fn cdata_is_raw() {
        let doc = parse(b"<st><![CDATA[ a < b && c ]]></st>").unwrap();
        assert_eq!(doc.root.text, " a < b && c ");
    }

    #[test]
    fn verbatim_span_covers_element() {
        let src = r#"<r><t id="1"><x/></t><u/></r>"#;
        let doc = parse(src.as_bytes()).unwrap();
        assert_eq!(doc.verbatim(&doc.root.children[0]), Some(r#"<t id="1"><x/></t>"#));
        assert_eq!(doc.verbatim(&doc.root.children[1]), Some("<u/>"));
        assert_eq!(doc.verbatim(&doc.root), Some(src));
    }

    #[test]
    fn malformed_reports_position() {
        let err = parse(b"<a>\n<b></a>").unwrap_err();
        assert_eq!(err.line, 2);
        let err = parse(b"<a>").unwrap_err();
        assert!(err.message.contains("unclosed"), "{err}");
        assert!(parse(b"").is_err());
        assert!(parse(b"<a/><b/>").is_err());
    }

    #[test]
    fn equality_ignores_attribute_order_and_whitespace() {
        let a = parse(br#"<a x="1" y="2"><b> t </b></a>"#).unwrap().root;
        let b = parse(b"<a y=\"2\" x=\"1\">\n  <b>t</b>\n</a>").unwrap().root;
        assert_eq!(a, b);
    }

    #[test]
    fn writer_output_reparses_equal() {
        let el = Element::new("r")
            .with_attr("q", "a\"<b>&")
            .with_child(Element::new("p").with_text("x < y"))
            .with_child(Element::new("e"));
        let again = parse(el.to_xml_string().as_bytes()).unwrap().root;
        assert_eq!(el, again);
    }
}
