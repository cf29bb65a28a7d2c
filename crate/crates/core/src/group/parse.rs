//! Text grammar for elements.
//!
//! * `finite_table`: bare decimal index, e.g. `4`
//! * `finite_perm`: one-line images, e.g. `[1,0,2]`
//! * `free_abelian`: signed coordinates, e.g. `(1,-2)`
//! * `free_group`: letters `a..z` for generators and `A..Z` for their inverses,
//!   whitespace ignored; `1` or the empty string is the identity. Input is
//!   freely reduced, so `aA` parses to the identity.

use super::{reduce_word, GroupElem, GroupSpec};
use crate::error::{Result, WalkError};

fn syntax(position: usize, message: impl Into<String>) -> WalkError {
    WalkError::Syntax {
        position,
        message: message.into(),
    }
}

pub(super) fn parse_elem(spec: &GroupSpec, text: &str) -> Result<GroupElem> {
    match spec {
        GroupSpec::FiniteTable { table, .. } => {
            let start = leading_ws(text);
            let t = text.trim();
            let i: u32 = t
                .parse()
                .map_err(|_| syntax(start, format!("expected a table index, found {t:?}")))?;
            if i as usize >= table.len() {
                return Err(syntax(start, format!("index {i} out of range 0..{}", table.len())));
            }
            Ok(GroupElem::Table(i))
        }
        GroupSpec::FinitePerm { degree, .. } => {
            let items = bracketed(text, '[', ']')?;
            if items.len() != *degree {
                return Err(syntax(0, format!("expected {degree} images, found {}", items.len())));
            }
            let mut seen = vec![false; *degree];
            let mut out = Vec::with_capacity(*degree);
            for (pos, item) in items {
                let v: u32 = item
                    .parse()
                    .map_err(|_| syntax(pos, format!("expected an image index, found {item:?}")))?;
                if v as usize >= *degree || std::mem::replace(&mut seen[v as usize], true) {
                    return Err(syntax(pos, format!("{v} breaks bijectivity on 0..{degree}")));
                }
                out.push(v);
            }
            Ok(GroupElem::Perm(out))
        }
        GroupSpec::FreeAbelian { rank } => {
            let items = bracketed(text, '(', ')')?;
            if items.len() != *rank {
                return Err(syntax(0, format!("expected {rank} coordinates, found {}", items.len())));
            }
            items
                .into_iter()
                .map(|(pos, item)| {
                    item.parse::<i64>()
                        .map_err(|_| syntax(pos, format!("expected an integer, found {item:?}")))
                })
                .collect::<Result<Vec<_>>>()
                .map(GroupElem::Vector)
        }
        GroupSpec::FreeGroup { rank } => {
            if text.trim() == "1" {
                return Ok(GroupElem::Word(Vec::new()));
            }
            let mut letters = Vec::with_capacity(text.len());
            for (pos, c) in text.char_indices() {
                if c.is_whitespace() {
                    continue;
                }
                let (index, sign) = match c {
                    'a'..='z' => (c as u8 - b'a', 1i16),
                    'A'..='Z' => (c as u8 - b'A', -1i16),
                    _ => return Err(syntax(pos, format!("unexpected character {c:?}"))),
                };
                if index as usize >= *rank {
                    return Err(syntax(pos, format!("letter {c:?} exceeds rank {rank}")));
                }
                letters.push(sign * (index as i16 + 1));
            }
            Ok(GroupElem::Word(reduce_word(&letters)))
        }
    }
}

pub(super) fn format_elem(a: &GroupElem) -> String {
    match a {
        GroupElem::Table(i) => i.to_string(),
        GroupElem::Perm(p) => format!("[{}]", join(p.iter())),
        GroupElem::Vector(v) => format!("({})", join(v.iter())),
        GroupElem::Word(w) if w.is_empty() => "1".to_string(),
        GroupElem::Word(w) => w
            .iter()
            .map(|&l| {
                let base = if l > 0 { b'a' } else { b'A' };
                (base + (l.unsigned_abs() as u8 - 1)) as char
            })
            .collect(),
    }
}

fn join<T: ToString>(items: impl Iterator<Item = T>) -> String {
    items.map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn leading_ws(text: &str) -> usize {
    text.len() - text.trim_start().len()
}

/// Splits `open item, item, ... close` into trimmed items with their byte
/// offsets.
fn bracketed(text: &str, open: char, close: char) -> Result<Vec<(usize, &str)>> {
    let start = leading_ws(text);
    let t = text.trim_end();
    if !t[start..].starts_with(open) {
        return Err(syntax(start, format!("expected {open:?}")));
    }
    if !t.ends_with(close) || t.len() - start < 2 {
        return Err(syntax(t.len(), format!("expected closing {close:?}")));
    }
    let inner_start = start + open.len_utf8();
    let inner = &t[inner_start..t.len() - close.len_utf8()];
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut offset = inner_start;
    for piece in inner.split(',') {
        let pos = offset + leading_ws(piece);
        let item = piece.trim();
        if item.is_empty() {
            return Err(syntax(pos, "empty entry"));
        }
        out.push((pos, item));
        offset += piece.len() + 1;
    }
    Ok(out)
}
