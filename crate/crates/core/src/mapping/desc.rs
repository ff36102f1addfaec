use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::{linearizer_suffix, AoS, AoSoA, Heatmap, Mapping, One, SoA, Split, Trace};
use crate::array::{ArrayExtents, Linearizer};
use crate::error::{LayoutError, Result};
use crate::info::RecordInfo;
use crate::record::Packing;

/// Parsed form of a textual mapping descriptor such as `aosoa:8` or
/// `split:Pos:soa:mb:aos:packed`.
///
/// Tokens are separated by `:`. `aos`, `soa` and `aosoa:<L>` accept a trailing
/// `:col` or `:morton` linearizer token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MappingDesc {
    AoS { packing: Packing, linearizer: Linearizer },
    SoA { multi_blob: bool, linearizer: Linearizer },
    AoSoA { lanes: usize, linearizer: Linearizer },
    One,
    Split { path: String, selected: Box<MappingDesc>, rest: Box<MappingDesc> },
    Trace(Box<MappingDesc>),
    Heatmap(Box<MappingDesc>),
}

struct Tokens<'a> {
    items: Vec<&'a str>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn peek(&self) -> Option<&'a str> {
        self.items.get(self.pos).copied()
    }

    fn next(&mut self, what: &str) -> Result<&'a str> {
        let t = self
            .peek()
            .ok_or_else(|| LayoutError::Config(format!("mapping descriptor ends before {what}")))?;
        self.pos += 1;
        Ok(t)
    }

    fn eat(&mut self, token: &str) -> bool {
        if self.peek() == Some(token) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn linearizer(&mut self) -> Linearizer {
        if self.eat("col") {
            Linearizer::ColMajor
        } else if self.eat("morton") {
            Linearizer::Morton
        } else {
            Linearizer::RowMajor
        }
    }
}

fn parse(t: &mut Tokens) -> Result<MappingDesc> {
    let head = t.next("a mapping name")?;
    Ok(match head {
        "aos" => {
            let packing = if t.eat("packed") {
                Packing::Packed
            } else {
                t.eat("aligned");
                Packing::Aligned
            };
            MappingDesc::AoS { packing, linearizer: t.linearizer() }
        }
        "soa" => {
            let multi_blob = t.eat("mb");
            if !multi_blob {
                t.eat("sb");
            }
            MappingDesc::SoA { multi_blob, linearizer: t.linearizer() }
        }
        "aosoa" => {
            let raw = t.next("the AoSoA lane count")?;
            let lanes: usize = raw
                .parse()
                .map_err(|_| LayoutError::Config(format!("invalid AoSoA lane count `{raw}`")))?;
            if lanes == 0 {
                return Err(LayoutError::Config("AoSoA needs at least one lane".into()));
            }
            MappingDesc::AoSoA { lanes, linearizer: t.linearizer() }
        }
        "one" => MappingDesc::One,
        "split" => {
            let path = t.next("the split tag path")?.to_string();
            if path.is_empty() {
                return Err(LayoutError::Config("empty split tag path".into()));
            }
            let selected = Box::new(parse(t)?);
            let rest = Box::new(parse(t)?);
            MappingDesc::Split { path, selected, rest }
        }
        "trace" => MappingDesc::Trace(Box::new(parse(t)?)),
        "heatmap" => MappingDesc::Heatmap(Box::new(parse(t)?)),
        other => {
            return Err(LayoutError::Config(format!("unknown mapping `{other}`")));
        }
    })
}

impl FromStr for MappingDesc {
    type Err = LayoutError;

    fn from_str(s: &str) -> Result<Self> {
        let mut t = Tokens { items: s.trim().split(':').collect(), pos: 0 };
        let desc = parse(&mut t)?;
        if let Some(extra) = t.peek() {
            return Err(LayoutError::Config(format!(
                "unexpected `{extra}` after mapping descriptor `{desc}`"
            )));
        }
        Ok(desc)
    }
}

impl fmt::Display for MappingDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MappingDesc::AoS { packing, linearizer } => {
                let p = if *packing == Packing::Packed { ":packed" } else { "" };
                write!(f, "aos{p}{}", linearizer_suffix(*linearizer))
            }
            MappingDesc::SoA { multi_blob, linearizer } => {
                let m = if *multi_blob { ":mb" } else { "" };
                write!(f, "soa{m}{}", linearizer_suffix(*linearizer))
            }
            MappingDesc::AoSoA { lanes, linearizer } => {
                write!(f, "aosoa:{lanes}{}", linearizer_suffix(*linearizer))
            }
            MappingDesc::One => f.write_str("one"),
            MappingDesc::Split { path, selected, rest } => write!(f, "split:{path}:{selected}:{rest}"),
            MappingDesc::Trace(inner) => write!(f, "trace:{inner}"),
            MappingDesc::Heatmap(inner) => write!(f, "heatmap:{inner}"),
        }
    }
}

impl MappingDesc {
    /// Instantiates the described mapping for the given extents and record dimension.
    pub fn build(&self, extents: ArrayExtents, info: Arc<RecordInfo>) -> Result<Box<dyn Mapping>> {
        Ok(match self {
            MappingDesc::AoS { packing, linearizer } => {
                Box::new(AoS::new(extents, info, *packing).with_linearizer(*linearizer)?)
            }
            MappingDesc::SoA { multi_blob, linearizer } => {
                Box::new(SoA::new(extents, info, *multi_blob).with_linearizer(*linearizer)?)
            }
            MappingDesc::AoSoA { lanes, linearizer } => {
                Box::new(AoSoA::new(extents, info, *lanes)?.with_linearizer(*linearizer)?)
            }
            MappingDesc::One => Box::new(One::new(extents, info)),
            MappingDesc::Split { path, selected, rest } => {
                let tags: Vec<&str> = path.split('.').collect();
                let selector = info
                    .dim()
                    .coord_from_tags(&tags)
                    .map_err(|e| LayoutError::Config(format!("invalid split selector: {e}")))?;
                Box::new(Split::new(
                    extents,
                    info,
                    &selector,
                    |e, i| selected.build(e, i),
                    |e, i| rest.build(e, i),
                )?)
            }
            MappingDesc::Trace(inner) => Box::new(Trace::new(inner.build(extents, info)?)),
            MappingDesc::Heatmap(inner) => Box::new(Heatmap::new(inner.build(extents, info)?)),
        })
    }
}
