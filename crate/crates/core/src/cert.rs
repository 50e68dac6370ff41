//! Plain-text certificates.
//!
//! ```text
//! vnwb-certificate v1
//! kind ppbasis
//! status complete
//! precision 20
//! m (1/1+0/1 i)*1
//! ...
//! backend
//! vnwb-backend v1
//! ...
//! end-backend
//! ```
//!
//! Fields are `key value` lines in emission order; keys may repeat. The
//! backend block embeds the input so that `verify` needs nothing else.

use std::fmt::Write as _;

use crate::{Error, Result};

pub const CERT_HEADER: &str = "vnwb-certificate v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Complete,
    /// Budget exhausted; `stage` records where.
    Partial,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Complete => "complete",
            Status::Partial => "partial",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub kind: String,
    pub status: Status,
    pub fields: Vec<(String, String)>,
    pub backend: String,
}

impl Certificate {
    pub fn new(kind: &str, backend: String) -> Self {
        Self { kind: kind.into(), status: Status::Complete, fields: Vec::new(), backend }
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        let v = value.to_string();
        debug_assert!(!key.contains(char::is_whitespace) && !v.contains('\n'));
        self.fields.push((key.into(), v));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Format(format!("certificate lacks `{key}`")))
    }

    pub fn all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.fields.iter().filter(move |(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn parse_field<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.require(key)?.parse().map_err(|_| Error::Format(format!("bad value for `{key}`")))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{CERT_HEADER}").ok();
        writeln!(s, "kind {}", self.kind).ok();
        writeln!(s, "status {}", self.status.as_str()).ok();
        for (k, v) in &self.fields {
            writeln!(s, "{k} {v}").ok();
        }
        writeln!(s, "backend").ok();
        s.push_str(&self.backend);
        if !self.backend.ends_with('\n') {
            s.push('\n');
        }
        writeln!(s, "end-backend").ok();
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(CERT_HEADER) {
            return Err(Error::Format(format!("expected header `{CERT_HEADER}`")));
        }
        let mut kind = None;
        let mut status = None;
        let mut fields = Vec::new();
        let mut backend = None;
        while let Some(line) = lines.next() {
            let (k, v) = line.split_once(' ').unwrap_or((line, ""));
            match k {
                "kind" if kind.is_none() => kind = Some(v.to_string()),
                "status" if status.is_none() => {
                    status = Some(match v {
                        "complete" => Status::Complete,
                        "partial" => Status::Partial,
                        _ => return Err(Error::Format(format!("unknown status `{v}`"))),
                    })
                }
                "backend" => {
                    let mut b = String::new();
                    let mut closed = false;
                    for l in lines.by_ref() {
                        if l == "end-backend" {
                            closed = true;
                            break;
                        }
                        b.push_str(l);
                        b.push('\n');
                    }
                    if !closed {
                        return Err(Error::Format("unterminated backend block".into()));
                    }
                    backend = Some(b);
                }
                "" => {}
                _ => fields.push((k.to_string(), v.to_string())),
            }
        }
        Ok(Self {
            kind: kind.ok_or_else(|| Error::Format("certificate lacks `kind`".into()))?,
            status: status.ok_or_else(|| Error::Format("certificate lacks `status`".into()))?,
            fields,
            backend: backend.ok_or_else(|| Error::Format("certificate lacks a backend block".into()))?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut c = Certificate::new("trace", "vnwb-backend v1\ndims 1\n".into());
        c.push("term", "(1/2+0/1 i)*g1*g2'");
        c.push("value", "1/4");
        c.push("value", "1/8");
        c.status = Status::Partial;
        let t = c.to_text();
        let back = Certificate::parse(&t).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.all("value").collect::<Vec<_>>(), ["1/4", "1/8"]);
        assert_eq!(back.to_text(), t);
    }

    #[test]
    fn rejects_malformed() {
        assert!(Certificate::parse("kind x\n").is_err());
        assert!(Certificate::parse(&format!("{CERT_HEADER}\nkind x\nstatus complete\nbackend\n")).is_err());
        assert!(Certificate::parse(&format!("{CERT_HEADER}\nkind x\nstatus done\n")).is_err());
    }
}
