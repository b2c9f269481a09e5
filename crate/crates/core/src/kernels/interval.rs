//! Finite unions of real intervals with explicit open/closed end points.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Self {
        Self {
            lo,
            hi,
            lo_closed: lo_closed && lo.is_finite(),
            hi_closed: hi_closed && hi.is_finite(),
        }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, true, true)
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, false, false)
    }

    /// `[lo, hi)`, the shape of a grid cell.
    pub fn closed_open(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, true, false)
    }

    pub fn point(x: f64) -> Self {
        Self::closed(x, x)
    }

    /// `(-inf, x)`.
    pub fn below(x: f64) -> Self {
        Self::open(f64::NEG_INFINITY, x)
    }

    /// `(-inf, x]`.
    pub fn at_most(x: f64) -> Self {
        Self::new(f64::NEG_INFINITY, x, false, true)
    }

    pub fn real_line() -> Self {
        Self::open(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn is_empty(&self) -> bool {
        self.lo.is_nan()
            || self.hi.is_nan()
            || self.lo > self.hi
            || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn length(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.hi - self.lo
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = x > self.lo || (self.lo_closed && x == self.lo);
        let below = x < self.hi || (self.hi_closed && x == self.hi);
        above && below
    }

    fn intersect(&self, other: &Interval) -> Interval {
        let (lo, lo_closed) = match self.lo.total_cmp(&other.lo) {
            Ordering::Greater => (self.lo, self.lo_closed),
            Ordering::Less => (other.lo, other.lo_closed),
            Ordering::Equal => (self.lo, self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.total_cmp(&other.hi) {
            Ordering::Less => (self.hi, self.hi_closed),
            Ordering::Greater => (other.hi, other.hi_closed),
            Ordering::Equal => (self.hi, self.hi_closed && other.hi_closed),
        };
        Interval::new(lo, hi, lo_closed, hi_closed)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("{}");
        }
        if self.lo == self.hi {
            return write!(f, "{{{}}}", self.lo);
        }
        let open = if self.lo_closed { '[' } else { '(' };
        let close = if self.hi_closed { ']' } else { ')' };
        write!(f, "{open}{}, {}{close}", self.lo, self.hi)
    }
}

/// Sorted, pairwise disjoint, non-empty intervals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalSet {
    parts: Vec<Interval>,
}

impl IntervalSet {
    pub fn new(parts: impl IntoIterator<Item = Interval>) -> Self {
        let mut v: Vec<Interval> = parts.into_iter().filter(|p| !p.is_empty()).collect();
        v.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(b.lo_closed.cmp(&a.lo_closed)));
        let mut out: Vec<Interval> = Vec::with_capacity(v.len());
        for next in v {
            if let Some(cur) = out.last_mut() {
                let touches = next.lo < cur.hi || (next.lo == cur.hi && (cur.hi_closed || next.lo_closed));
                if touches {
                    match next.hi.total_cmp(&cur.hi) {
                        Ordering::Greater => {
                            cur.hi = next.hi;
                            cur.hi_closed = next.hi_closed;
                        }
                        Ordering::Equal => cur.hi_closed |= next.hi_closed,
                        Ordering::Less => {}
                    }
                    continue;
                }
            }
            out.push(next);
        }
        Self { parts: out }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(i: Interval) -> Self {
        Self::new([i])
    }

    pub fn real_line() -> Self {
        Self::single(Interval::real_line())
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.parts.iter().any(|p| p.contains(x))
    }

    /// Lebesgue measure.
    pub fn measure(&self) -> f64 {
        self.parts.iter().map(Interval::length).sum()
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        IntervalSet::new(self.parts.iter().chain(&other.parts).copied())
    }

    pub fn intersection(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        for a in &self.parts {
            for b in &other.parts {
                let c = a.intersect(b);
                if !c.is_empty() {
                    out.push(c);
                }
            }
        }
        IntervalSet::new(out)
    }

    pub fn complement(&self) -> IntervalSet {
        let mut out = Vec::with_capacity(self.parts.len() + 1);
        let mut lo = f64::NEG_INFINITY;
        let mut lo_closed = false;
        for p in &self.parts {
            out.push(Interval::new(lo, p.lo, lo_closed, !p.lo_closed));
            lo = p.hi;
            lo_closed = !p.hi_closed;
        }
        out.push(Interval::new(lo, f64::INFINITY, lo_closed, false));
        IntervalSet::new(out)
    }

    pub fn difference(&self, other: &IntervalSet) -> IntervalSet {
        self.intersection(&other.complement())
    }

    pub fn is_subset(&self, other: &IntervalSet) -> bool {
        self.difference(other).is_empty()
    }

    pub fn is_disjoint(&self, other: &IntervalSet) -> bool {
        self.intersection(other).is_empty()
    }

    /// Finite end points of all components, in order.
    pub fn endpoints(&self) -> Vec<f64> {
        self.parts
            .iter()
            .flat_map(|p| [p.lo, p.hi])
            .filter(|x| x.is_finite())
            .collect()
    }
}

impl From<Interval> for IntervalSet {
    fn from(i: Interval) -> Self {
        IntervalSet::single(i)
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return f.write_str("{}");
        }
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                f.write_str(" U ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

fn parse_number(s: &str) -> Result<f64> {
    let t = s.trim();
    let v = match t {
        "inf" | "+inf" | "∞" | "+∞" => f64::INFINITY,
        "-inf" | "-∞" => f64::NEG_INFINITY,
        _ => t
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad number {t:?}")))?,
    };
    if v.is_nan() {
        return Err(Error::Parse("NaN end point".into()));
    }
    Ok(v)
}

fn parse_interval(s: &str) -> Result<Interval> {
    let t = s.trim();
    if t == "R" || t == "ℝ" {
        return Ok(Interval::real_line());
    }
    if t == "{}" || t == "∅" {
        return Ok(Interval::open(0.0, 0.0));
    }
    if let Some(inner) = t.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
        let x = parse_number(inner)?;
        if !x.is_finite() {
            return Err(Error::Parse("singleton must be finite".into()));
        }
        return Ok(Interval::point(x));
    }
    let mut chars = t.chars();
    let open = chars.next().ok_or_else(|| Error::Parse("empty interval text".into()))?;
    let close = chars.next_back().ok_or_else(|| Error::Parse(format!("truncated interval {t:?}")))?;
    let lo_closed = match open {
        '[' => true,
        '(' => false,
        c => return Err(Error::Parse(format!("unexpected {c:?} opening an interval"))),
    };
    let hi_closed = match close {
        ']' => true,
        ')' => false,
        c => return Err(Error::Parse(format!("unexpected {c:?} closing an interval"))),
    };
    let body = chars.as_str();
    let (a, b) = body
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("missing comma in {t:?}")))?;
    let lo = parse_number(a)?;
    let hi = parse_number(b)?;
    if lo > hi {
        return Err(Error::Parse(format!("lower end point exceeds upper in {t:?}")));
    }
    if lo == f64::INFINITY || hi == f64::NEG_INFINITY {
        return Err(Error::Parse(format!("degenerate infinite interval {t:?}")));
    }
    Ok(Interval::new(lo, hi, lo_closed, hi_closed))
}

impl FromStr for IntervalSet {
    type Err = Error;

    /// Parses `"[a, b) U (c, inf)"`, `"{x}"`, `"R"` or `"{}"`. Components are
    /// separated by `U`, `∪` or `;`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.is_empty() {
            return Err(Error::Parse("empty interval set text".into()));
        }
        let parts = t
            .split(['U', '∪', ';'])
            .map(parse_interval)
            .collect::<Result<Vec<_>>>()?;
        Ok(IntervalSet::new(parts))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_merges_touching_parts() {
        let s = IntervalSet::new([
            Interval::closed_open(2.0, 3.0),
            Interval::closed_open(0.0, 1.0),
            Interval::closed_open(1.0, 2.0),
        ]);
        assert_eq!(s.parts(), &[Interval::closed_open(0.0, 3.0)]);
        // (0,1) and (1,2) leave the point 1 out.
        let s = IntervalSet::new([Interval::open(0.0, 1.0), Interval::open(1.0, 2.0)]);
        assert_eq!(s.parts().len(), 2);
        assert!(!s.contains(1.0));
    }

    #[test]
    fn set_operations() {
        let a: IntervalSet = "[0, 2]".parse().unwrap();
        let b: IntervalSet = "(1, 3)".parse().unwrap();
        assert_eq!(a.intersection(&b).to_string(), "(1, 2]");
        assert_eq!(a.difference(&b).to_string(), "[0, 1]");
        assert_eq!(a.union(&b).to_string(), "[0, 3)");
        assert_eq!(a.complement().to_string(), "(-inf, 0) U (2, inf)");
        assert!((a.union(&b).measure() - 3.0).abs() < 1e-15);
        assert!(IntervalSet::from(Interval::point(0.0)).measure() == 0.0);
    }

    #[test]
    fn parse_forms() {
        let s: IntervalSet = "(-inf, 0] U {2} ; [3, 4)".parse().unwrap();
        assert_eq!(s.parts().len(), 3);
        assert!(s.contains(0.0) && s.contains(2.0) && !s.contains(4.0));
        assert_eq!("R".parse::<IntervalSet>().unwrap(), IntervalSet::real_line());
        assert!("{}".parse::<IntervalSet>().unwrap().is_empty());
        assert!("[2, 1]".parse::<IntervalSet>().is_err());
        assert!("[a, 1]".parse::<IntervalSet>().is_err());
        assert!("[0 1]".parse::<IntervalSet>().is_err());
        assert!("".parse::<IntervalSet>().is_err());
        assert!("[NaN, 1]".parse::<IntervalSet>().is_err());
    }

    #[test]
    fn infinite_end_points_are_open() {
        let s: IntervalSet = "[-inf, 1]".parse().unwrap();
        assert!(!s.parts()[0].lo_closed);
    }
}
