use super::Dendrogram;
use crate::error::{Error, Result};

/// Formats `x` with at most nine significant digits, trailing zeros removed.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".into() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

const RESERVED: &[char] = &['(', ')', '[', ']', '\'', ':', ';', ',', ' ', '\t', '\n', '\r'];

fn push_label(out: &mut String, label: &str) {
    if label.is_empty() || label.contains(RESERVED) {
        out.push('\'');
        out.push_str(&label.replace('\'', "''"));
        out.push('\'');
    } else {
        out.push_str(label);
    }
}

/// Newick text with leaf names from the tree labels. A leaf's branch is its
/// parent's height; an internal branch is the parent height minus its own.
pub fn export_newick(tree: &Dendrogram) -> String {
    let mut out = String::new();
    let n = tree.n_leaves();
    if n == 1 {
        push_label(&mut out, &tree.labels()[0]);
        out.push(';');
        return out;
    }
    enum Step {
        Open(usize, f64),
        Comma,
        Close(usize, f64),
    }
    let mut stack = vec![Step::Open(tree.root(), f64::NAN)];
    while let Some(step) = stack.pop() {
        match step {
            Step::Open(node, parent_h) => match tree.children(node) {
                Some((l, r)) => {
                    out.push('(');
                    let h = tree.height(node);
                    stack.push(Step::Close(node, parent_h));
                    stack.push(Step::Open(r, h));
                    stack.push(Step::Comma);
                    stack.push(Step::Open(l, h));
                }
                None => {
                    push_label(&mut out, &tree.labels()[node]);
                    out.push(':');
                    out.push_str(&format_sig9(parent_h));
                }
            },
            Step::Comma => out.push(','),
            Step::Close(node, parent_h) => {
                out.push(')');
                if !parent_h.is_nan() {
                    out.push(':');
                    out.push_str(&format_sig9(parent_h - tree.height(node)));
                }
            }
        }
    }
    out.push(';');
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewickNode {
    pub name: Option<String>,
    pub length: Option<f64>,
    pub children: Vec<NewickNode>,
}

impl NewickNode {
    /// Distance from this node down to its first leaf.
    pub fn height(&self) -> f64 {
        match self.children.first() {
            None => 0.0,
            Some(c) => c.height() + c.length.unwrap_or(0.0),
        }
    }

    pub fn leaf_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<String>) {
        if self.children.is_empty() {
            out.push(self.name.clone().unwrap_or_default());
        }
        for c in &self.children {
            c.collect_leaves(out);
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse {
            file: "<newick>".into(),
            line: 1,
            message: format!("{msg} at byte {}", self.pos),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn node(&mut self) -> Result<NewickNode> {
        let mut children = Vec::new();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            loop {
                children.push(self.node()?);
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.err("expected ',' or ')'")),
                }
            }
        }
        let name = self.label()?;
        let length = if self.peek() == Some(b':') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len()
                && matches!(self.src[self.pos], b'0'..=b'9' | b'.' | b'-' | b'+' | b'e' | b'E')
            {
                self.pos += 1;
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
            Some(text.parse().map_err(|_| self.err("bad branch length"))?)
        } else {
            None
        };
        Ok(NewickNode {
            name,
            length,
            children,
        })
    }

    fn label(&mut self) -> Result<Option<String>> {
        match self.peek() {
            Some(b'\'') => {
                self.pos += 1;
                let mut bytes = Vec::new();
                loop {
                    match self.src.get(self.pos) {
                        None => return Err(self.err("unterminated quoted label")),
                        Some(b'\'') if self.src.get(self.pos + 1) == Some(&b'\'') => {
                            bytes.push(b'\'');
                            self.pos += 2;
                        }
                        Some(b'\'') => {
                            self.pos += 1;
                            break;
                        }
                        Some(&b) => {
                            bytes.push(b);
                            self.pos += 1;
                        }
                    }
                }
                String::from_utf8(bytes)
                    .map(Some)
                    .map_err(|_| self.err("label is not UTF-8"))
            }
            _ => {
                let start = self.pos;
                while self.pos < self.src.len() && !RESERVED.contains(&(self.src[self.pos] as char)) {
                    self.pos += 1;
                }
                if start == self.pos {
                    return Ok(None);
                }
                String::from_utf8(self.src[start..self.pos].to_vec())
                    .map(Some)
                    .map_err(|_| self.err("label is not UTF-8"))
            }
        }
    }
}

pub fn parse_newick(text: &str) -> Result<NewickNode> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let root = p.node()?;
    if p.peek() != Some(b';') {
        return Err(p.err("expected ';'"));
    }
    p.pos += 1;
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    Ok(root)
}
