//! `name:key=value,...` function specifications.
//!
//! ```text
//! tribes:w=3,s=4        cyclerun:n=9          majority:n=5
//! parity:n=4,k=3        parity:n=4,set=1+3    dictator:n=3,i=2
//! and:n=2               const:n=3,value=-1    random:n=8,seed=1
//! balanced:n=8,seed=1   ft:n=10,t=0.5         builder:n=5,c1=8
//! file:path=table.txt
//! ```
//!
//! Every key is required unless noted, and unknown or repeated keys are
//! errors. `builder` takes an optional `c1`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::builder;
use crate::cube::{self, SubsetMask};
use crate::error::{invalid, Result};
use crate::function::{parse_truth_table, BooleanFunction, BoundedFunction, CubeFunction};
use crate::zoo;

#[derive(Clone, Debug, PartialEq)]
pub enum FnSpec {
    Tribes { w: usize, s: usize },
    CycleRun { n: usize },
    Majority { n: usize },
    Parity { n: usize, mask: SubsetMask },
    Dictator { n: usize, i: usize },
    And { n: usize },
    Const { n: usize, value: i8 },
    Random { n: usize, seed: u64 },
    Balanced { n: usize, seed: u64 },
    Threshold { n: usize, t: f64 },
    Builder { n: usize, c1: f64 },
    File { path: String },
}

/// A constructed table, Boolean when the spec guarantees it.
#[derive(Clone, Debug, PartialEq)]
pub enum Table {
    Boolean(BooleanFunction),
    Bounded(BoundedFunction),
}

impl Table {
    pub fn n(&self) -> usize {
        match self {
            Table::Boolean(f) => f.n(),
            Table::Bounded(g) => g.n(),
        }
    }

    /// The Boolean view; bounded tables qualify when every entry is ±1.
    pub fn boolean(&self) -> Result<BooleanFunction> {
        match self {
            Table::Boolean(f) => Ok(f.clone()),
            Table::Bounded(g) => g.to_boolean().ok_or_else(|| invalid("this operation needs a Boolean function")),
        }
    }

    pub fn bounded(&self) -> BoundedFunction {
        match self {
            Table::Boolean(f) => f.to_bounded(),
            Table::Bounded(g) => g.clone(),
        }
    }

    pub fn as_cube(&self) -> &dyn CubeFunction {
        match self {
            Table::Boolean(f) => f,
            Table::Bounded(g) => g,
        }
    }
}

struct Args<'a> {
    name: &'a str,
    map: BTreeMap<&'a str, &'a str>,
}

impl<'a> Args<'a> {
    fn parse(name: &'a str, body: &'a str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for part in body.split(',').filter(|p| !p.is_empty()) {
            let (k, v) =
                part.split_once('=').ok_or_else(|| invalid(format!("{name}: expected key=value, got '{part}'")))?;
            if map.insert(k.trim(), v.trim()).is_some() {
                return Err(invalid(format!("{name}: key '{k}' given twice")));
            }
        }
        Ok(Self { name, map })
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let raw = self.map.remove(key).ok_or_else(|| invalid(format!("{}: missing key '{key}'", self.name)))?;
        raw.parse().map_err(|_| invalid(format!("{}: bad value '{raw}' for '{key}'", self.name)))
    }

    fn take_opt<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        if self.map.contains_key(key) {
            self.take(key).map(Some)
        } else {
            Ok(None)
        }
    }

    fn finish(self) -> Result<()> {
        match self.map.keys().next() {
            Some(k) => Err(invalid(format!("{}: unknown key '{k}'", self.name))),
            None => Ok(()),
        }
    }
}

fn parse_set(raw: &str, n: usize) -> Result<SubsetMask> {
    let coords = raw
        .split('+')
        .map(|c| c.trim().parse::<usize>().map_err(|_| invalid(format!("parity: bad coordinate '{c}'"))))
        .collect::<Result<Vec<_>>>()?;
    cube::mask_of(&coords, n)
}

impl FromStr for FnSpec {
    type Err = crate::Error;

    fn from_str(text: &str) -> Result<Self> {
        let (name, body) = text.split_once(':').unwrap_or((text, ""));
        let name = name.trim();
        if name == "file" {
            let path = body
                .strip_prefix("path=")
                .filter(|p| !p.is_empty())
                .ok_or_else(|| invalid("file: expected file:path=<path>"))?;
            return Ok(FnSpec::File { path: path.to_string() });
        }
        let mut a = Args::parse(name, body)?;
        let spec = match name {
            "tribes" => FnSpec::Tribes { w: a.take("w")?, s: a.take("s")? },
            "cyclerun" => FnSpec::CycleRun { n: a.take("n")? },
            "majority" => FnSpec::Majority { n: a.take("n")? },
            "parity" => {
                let n: usize = a.take("n")?;
                let k: Option<usize> = a.take_opt("k")?;
                let set: Option<String> = a.take_opt("set")?;
                let mask = match (k, set) {
                    (Some(k), None) if k <= n => ((1u64 << k) - 1) as SubsetMask,
                    (None, Some(set)) => parse_set(&set, n)?,
                    _ => return Err(invalid("parity: give exactly one of k (≤ n) or set")),
                };
                FnSpec::Parity { n, mask }
            }
            "dictator" => FnSpec::Dictator { n: a.take("n")?, i: a.take("i")? },
            "and" => FnSpec::And { n: a.take("n")? },
            "const" => {
                let n = a.take("n")?;
                let value: i8 = a.take("value")?;
                if value != 1 && value != -1 {
                    return Err(invalid("const: value must be 1 or -1"));
                }
                FnSpec::Const { n, value }
            }
            "random" => FnSpec::Random { n: a.take("n")?, seed: a.take("seed")? },
            "balanced" => FnSpec::Balanced { n: a.take("n")?, seed: a.take("seed")? },
            "ft" => FnSpec::Threshold { n: a.take("n")?, t: a.take("t")? },
            "builder" => FnSpec::Builder { n: a.take("n")?, c1: a.take_opt("c1")?.unwrap_or(builder::DEFAULT_C1) },
            other => return Err(invalid(format!("unknown function '{other}'"))),
        };
        a.finish()?;
        Ok(spec)
    }
}

impl fmt::Display for FnSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FnSpec::Tribes { w, s } => write!(f, "tribes:w={w},s={s}"),
            FnSpec::CycleRun { n } => write!(f, "cyclerun:n={n}"),
            FnSpec::Majority { n } => write!(f, "majority:n={n}"),
            FnSpec::Parity { n, mask } => {
                let set: Vec<String> = cube::coords_of(*mask).iter().map(|c| c.to_string()).collect();
                write!(f, "parity:n={n},set={}", set.join("+"))
            }
            FnSpec::Dictator { n, i } => write!(f, "dictator:n={n},i={i}"),
            FnSpec::And { n } => write!(f, "and:n={n}"),
            FnSpec::Const { n, value } => write!(f, "const:n={n},value={value}"),
            FnSpec::Random { n, seed } => write!(f, "random:n={n},seed={seed}"),
            FnSpec::Balanced { n, seed } => write!(f, "balanced:n={n},seed={seed}"),
            FnSpec::Threshold { n, t } => write!(f, "ft:n={n},t={t}"),
            FnSpec::Builder { n, c1 } => write!(f, "builder:n={n},c1={c1}"),
            FnSpec::File { path } => write!(f, "file:path={path}"),
        }
    }
}

impl FnSpec {
    /// Builds the table; `file` specs read from disk.
    pub fn build(&self) -> Result<Table> {
        if let FnSpec::File { path } = self {
            let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {path}: {e}")))?;
            return table_from_text(&text);
        }
        self.build_pure()
    }

    /// Builds every spec except `file`.
    pub fn build_pure(&self) -> Result<Table> {
        let boolean = match *self {
            FnSpec::Tribes { w, s } => zoo::tribes(w, s)?,
            FnSpec::CycleRun { n } => zoo::cyclerun(n)?,
            FnSpec::Majority { n } => zoo::majority(n)?,
            FnSpec::Parity { n, mask } => zoo::parity(mask, n)?,
            FnSpec::Dictator { n, i } => zoo::dictator(i, n)?,
            FnSpec::And { n } => zoo::and(n)?,
            FnSpec::Const { n, value } => zoo::constant(n, value == 1)?,
            FnSpec::Random { n, seed } => zoo::random(n, seed)?,
            FnSpec::Balanced { n, seed } => zoo::random_balanced(n, seed)?,
            FnSpec::Threshold { n, t } => return Ok(Table::Bounded(zoo::threshold_ft(t, n)?.to_bounded()?)),
            FnSpec::Builder { n, c1 } => {
                let report = builder::build_one_resilient(n, c1)?;
                report.function.expect("builder returns its function")
            }
            FnSpec::File { .. } => return Err(invalid("file specs need filesystem access")),
        };
        Ok(Table::Boolean(boolean))
    }
}

/// Parses the truth-table text format, keeping Boolean tables Boolean.
pub fn table_from_text(text: &str) -> Result<Table> {
    let g = parse_truth_table(text)?;
    Ok(match g.to_boolean() {
        Some(f) => Table::Boolean(f),
        None => Table::Bounded(g),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_display() {
        for text in [
            "tribes:w=3,s=4",
            "cyclerun:n=9",
            "parity:n=4,set=1+3",
            "dictator:n=3,i=2",
            "const:n=3,value=-1",
            "random:n=8,seed=1",
            "ft:n=10,t=0.5",
            "builder:n=5,c1=8",
            "file:path=a,b.txt",
        ] {
            let spec: FnSpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
        }
        let k: FnSpec = "parity:n=4,k=2".parse().unwrap();
        assert_eq!(k, FnSpec::Parity { n: 4, mask: 0b11 });
    }

    #[test]
    fn rejects_bad_specs() {
        for text in [
            "tribes:w=3",
            "tribes:w=3,s=4,x=1",
            "tribes:w=3,w=3,s=4",
            "majority:n=five",
            "parity:n=4,k=2,set=1",
            "parity:n=4,k=5",
            "const:n=3,value=0",
            "nonsense:n=3",
            "file:",
        ] {
            assert!(text.parse::<FnSpec>().is_err(), "{text}");
        }
    }

    #[test]
    fn builds_tables() {
        let t: FnSpec = "tribes:w=2,s=2".parse().unwrap();
        assert_eq!(t.build().unwrap().n(), 4);
        let ft: FnSpec = "ft:n=6,t=0.5".parse().unwrap();
        assert!(matches!(ft.build().unwrap(), Table::Bounded(_)));
        assert!(ft.build().unwrap().boolean().is_err());
    }

    #[test]
    fn text_tables_stay_boolean() {
        let text = crate::function::write_truth_table(&zoo::majority(3).unwrap());
        assert!(matches!(table_from_text(&text).unwrap(), Table::Boolean(_)));
    }
}
