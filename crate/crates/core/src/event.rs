//! Events on the state space `[0, 1)`: canonical finite unions of half-open
//! intervals with exact endpoints in ℚ(√2).

use std::cmp::Ordering;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The half-open interval `[lo, hi)` with `0 ≤ lo ≤ hi ≤ 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Scalar,
    hi: Scalar,
}

impl Interval {
    pub fn new(lo: Scalar, hi: Scalar) -> Result<Self> {
        if lo.is_negative() || hi > Scalar::one() || lo > hi {
            return Err(Error::BadInterval { lo: lo.to_string(), hi: hi.to_string() });
        }
        Ok(Interval { lo, hi })
    }

    pub fn lo(&self) -> &Scalar {
        &self.lo
    }

    pub fn hi(&self) -> &Scalar {
        &self.hi
    }

    pub fn len(&self) -> Scalar {
        &self.hi - &self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, point: &Scalar) -> bool {
        &self.lo <= point && point < &self.hi
    }
}

/// A finite union of pairwise disjoint, non-adjacent, nonempty intervals
/// sorted by left endpoint. The empty event has no intervals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Event {
    intervals: Vec<Interval>,
}

impl Event {
    pub fn empty() -> Self {
        Event::default()
    }

    /// The sure event `[0, 1)`.
    pub fn full() -> Self {
        Event { intervals: vec![Interval { lo: Scalar::zero(), hi: Scalar::one() }] }
    }

    /// `[lo, hi)` as an event.
    pub fn interval(lo: Scalar, hi: Scalar) -> Result<Self> {
        Ok(Event::from_intervals([Interval::new(lo, hi)?]))
    }

    /// Builds the canonical form of an arbitrary union of intervals.
    pub fn from_intervals(intervals: impl IntoIterator<Item = Interval>) -> Self {
        let mut items: Vec<Interval> = intervals.into_iter().filter(|i| !i.is_empty()).collect();
        items.sort_by(|a, b| a.lo.cmp(&b.lo));
        Event { intervals: coalesce_sorted(items) }
    }

    /// Canonical union of many events.
    pub fn union_all<'a>(events: impl IntoIterator<Item = &'a Event>) -> Self {
        Event::from_intervals(events.into_iter().flat_map(|e| e.intervals.iter().cloned()))
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn is_full(&self) -> bool {
        *self == Event::full()
    }

    /// Lebesgue measure.
    pub fn measure(&self) -> Scalar {
        let mut total = Scalar::zero();
        for i in &self.intervals {
            total += &i.hi;
            total -= &i.lo;
        }
        total
    }

    /// Leftmost point of the event, if any.
    pub fn start(&self) -> Option<&Scalar> {
        self.intervals.first().map(|i| &i.lo)
    }

    pub fn contains(&self, point: &Scalar) -> bool {
        // Last interval whose lo is <= point.
        let idx = self.intervals.partition_point(|i| &i.lo <= point);
        idx > 0 && self.intervals[idx - 1].contains(point)
    }

    pub fn intersect(&self, other: &Event) -> Event {
        let (a, b) = (&self.intervals, &other.intervals);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            let lo = std::cmp::max(&a[i].lo, &b[j].lo);
            let hi = std::cmp::min(&a[i].hi, &b[j].hi);
            if lo < hi {
                out.push(Interval { lo: lo.clone(), hi: hi.clone() });
            }
            if a[i].hi <= b[j].hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        Event { intervals: coalesce_sorted(out) }
    }

    pub fn union(&self, other: &Event) -> Event {
        let mut merged = Vec::with_capacity(self.intervals.len() + other.intervals.len());
        let (a, b) = (&self.intervals, &other.intervals);
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let take_a = j >= b.len() || (i < a.len() && a[i].lo <= b[j].lo);
            if take_a {
                merged.push(a[i].clone());
                i += 1;
            } else {
                merged.push(b[j].clone());
                j += 1;
            }
        }
        Event { intervals: coalesce_sorted(merged) }
    }

    /// `[0, 1) \ self`.
    pub fn complement(&self) -> Event {
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        let mut cursor = Scalar::zero();
        for i in &self.intervals {
            if cursor < i.lo {
                out.push(Interval { lo: cursor, hi: i.lo.clone() });
            }
            cursor = i.hi.clone();
        }
        if cursor < Scalar::one() {
            out.push(Interval { lo: cursor, hi: Scalar::one() });
        }
        Event { intervals: out }
    }

    pub fn difference(&self, other: &Event) -> Event {
        self.intersect(&other.complement())
    }

    pub fn is_disjoint(&self, other: &Event) -> bool {
        self.intersect(other).is_empty()
    }

    /// `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Event) -> bool {
        self.intervals.iter().all(|piece| {
            let idx = other.intervals.partition_point(|i| i.lo <= piece.lo);
            idx > 0 && {
                let host = &other.intervals[idx - 1];
                piece.hi <= host.hi
            }
        })
    }

    /// Splits off the leftmost sub-event of measure exactly `t`.
    ///
    /// Returns `(prefix, rest)`; the cut point lies in ℚ(√2) because it is
    /// an interval endpoint plus the remaining mass.
    pub fn split_prefix(&self, t: &Scalar) -> Result<(Event, Event)> {
        let available = self.measure();
        if t.is_negative() || t > &available {
            return Err(Error::PrefixOutOfRange {
                requested: t.to_string(),
                available: available.to_string(),
            });
        }
        let mut cutter = PrefixCutter::new(self);
        let prefix = cutter.take(t);
        Ok((prefix, cutter.rest()))
    }

    /// Cuts `count` consecutive pieces of measure `unit` off the left of the
    /// event, returning them together with the leftover. Fails if the event
    /// is too small.
    pub fn chop(&self, unit: &Scalar, count: usize) -> Result<(Vec<Event>, Event)> {
        let needed = unit.mul_rational(&num_rational::BigRational::from_integer(count.into()));
        let available = self.measure();
        if unit.is_negative() || needed > available {
            return Err(Error::PrefixOutOfRange {
                requested: needed.to_string(),
                available: available.to_string(),
            });
        }
        let mut cutter = PrefixCutter::new(self);
        let pieces = (0..count).map(|_| cutter.take(unit)).collect();
        Ok((pieces, cutter.rest()))
    }
}

/// Walks an event left to right, handing out prefixes of requested measure.
struct PrefixCutter<'a> {
    source: &'a [Interval],
    index: usize,
    // Left end of the unconsumed part of `source[index]`.
    cursor: Option<Scalar>,
}

impl<'a> PrefixCutter<'a> {
    fn new(event: &'a Event) -> Self {
        PrefixCutter { source: &event.intervals, index: 0, cursor: None }
    }

    fn take(&mut self, mass: &Scalar) -> Event {
        let mut remaining = mass.clone();
        let mut out = Vec::new();
        while remaining.is_positive() && self.index < self.source.len() {
            let current = &self.source[self.index];
            let lo = self.cursor.take().unwrap_or_else(|| current.lo.clone());
            let room = &current.hi - &lo;
            match remaining.cmp(&room) {
                Ordering::Less => {
                    let cut = &lo + &remaining;
                    out.push(Interval { lo, hi: cut.clone() });
                    self.cursor = Some(cut);
                    remaining = Scalar::zero();
                }
                _ => {
                    remaining -= &room;
                    out.push(Interval { lo, hi: current.hi.clone() });
                    self.index += 1;
                }
            }
        }
        Event { intervals: out }
    }

    fn rest(mut self) -> Event {
        let mut out = Vec::new();
        if self.index < self.source.len() {
            let current = &self.source[self.index];
            let lo = self.cursor.take().unwrap_or_else(|| current.lo.clone());
            out.push(Interval { lo, hi: current.hi.clone() });
            out.extend_from_slice(&self.source[self.index + 1..]);
        }
        Event { intervals: out }
    }
}

fn coalesce_sorted(items: Vec<Interval>) -> Vec<Interval> {
    let mut out: Vec<Interval> = Vec::with_capacity(items.len());
    for item in items {
        if item.is_empty() {
            continue;
        }
        match out.last_mut() {
            Some(last) if item.lo <= last.hi => {
                if item.hi > last.hi {
                    last.hi = item.hi;
                }
            }
            _ => out.push(item),
        }
    }
    out
}

impl Serialize for Event {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = serializer.serialize_seq(Some(self.intervals.len()))?;
        for i in &self.intervals {
            seq.serialize_element(&[&i.lo, &i.hi])?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Event {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<(Scalar, Scalar)> = Vec::deserialize(deserializer)?;
        let intervals = pairs
            .into_iter()
            .map(|(lo, hi)| Interval::new(lo, hi))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        Ok(Event::from_intervals(intervals))
    }
}
