//! Textual record dimension schemas.
//!
//! ```text
//! dim    := scalar arrays | record
//! record := [Name] "{" field ("," field)* "}"
//! field  := Tag ":" (scalar arrays | record) | Tag "{" field ("," field)* "}"
//! arrays := ("[" INT "]")*
//! ```
//!
//! `Particle{Id:u16,Pos{X:f32,Y:f32},Mass:f64,Flags:bool[3]}` is a valid schema.
//! Record names are informational and dropped; only tags and types are kept.

use crate::error::{LayoutError, Result};
use crate::record::{normalize_arrays, RawDim, RecordDim, ScalarType};

pub fn parse_schema(text: &str) -> Result<RecordDim> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let raw = p.dim()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("trailing input"));
    }
    normalize_arrays(&raw)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, what: &str) -> LayoutError {
        LayoutError::Schema(format!("{what} at byte {}", self.pos))
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

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", c as char)))
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected identifier"));
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn dim(&mut self) -> Result<RawDim> {
        if self.peek() == Some(b'{') {
            return self.record_body();
        }
        let name = self.ident()?;
        if self.peek() == Some(b'{') {
            return self.record_body();
        }
        self.scalar_with_arrays(&name)
    }

    fn record_body(&mut self) -> Result<RawDim> {
        self.expect(b'{')?;
        let mut fields = Vec::new();
        loop {
            let tag = self.ident()?;
            let dim = if self.eat(b':') {
                self.dim()?
            } else if self.peek() == Some(b'{') {
                self.record_body()?
            } else {
                return Err(self.error("expected `:` or `{` after tag"));
            };
            fields.push((tag, dim));
            if self.eat(b'}') {
                break;
            }
            self.expect(b',')?;
        }
        Ok(RawDim::Record(fields))
    }

    fn scalar_with_arrays(&mut self, name: &str) -> Result<RawDim> {
        let ty = ScalarType::from_name(name)
            .ok_or_else(|| LayoutError::Schema(format!("unknown scalar type `{name}`")))?;
        let mut extents = Vec::new();
        while self.eat(b'[') {
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
            let n: usize = digits
                .parse()
                .map_err(|_| self.error("expected array extent"))?;
            self.expect(b']')?;
            extents.push(n);
        }
        // `T[a][b]` is `a` elements of `T[b]`
        Ok(extents
            .into_iter()
            .rev()
            .fold(RawDim::Scalar(ty), RawDim::array))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record_dim;

    #[test]
    fn parses_particle() {
        let parsed = parse_schema("Particle{Id:u16,Pos{X:f32,Y:f32},Mass:f64,Flags:bool[3]}").unwrap();
        let built = record_dim!({
            Id: u16,
            Pos: { X: f32, Y: f32 },
            Mass: f64,
            Flags: [bool; 3],
        });
        assert_eq!(parsed, built);
    }

    #[test]
    fn accepts_named_nested_records_and_whitespace() {
        let a = parse_schema(" P { Pos : Vec { X : f32 , Y : f32 } } ").unwrap();
        let b = parse_schema("{Pos{X:f32,Y:f32}}").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scalar_root_and_nested_arrays() {
        assert_eq!(
            parse_schema("f64").unwrap(),
            RecordDim::Leaf(ScalarType::F64)
        );
        let m = parse_schema("{M:f32[2][3]}").unwrap();
        assert_eq!(m.fields()[0].dim.fields().len(), 2);
        assert_eq!(m.fields()[0].dim.fields()[0].dim.fields().len(), 3);
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            "",
            "{}",
            "{A:f16}",
            "{A:f32,}",
            "{A:f32",
            "{A:f32[0]}",
            "{A:f32,A:u8}",
            "{A:f32} x",
            "{A f32}",
        ] {
            assert!(
                matches!(parse_schema(bad), Err(LayoutError::Schema(_))),
                "{bad:?} should fail"
            );
        }
    }

    #[test]
    fn display_round_trips() {
        let dim = parse_schema("Particle{Id:u16,Pos{X:f32,Y:f32},Mass:f64,Flags:bool[3]}").unwrap();
        assert_eq!(parse_schema(&dim.to_string()).unwrap(), dim);
    }
}
