//! Real intervals with explicit endpoint closedness, and partition analysis of
//! a set of bands over a domain.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval<T = f64> {
    pub lower: T,
    pub upper: T,
    pub lower_closed: bool,
    pub upper_closed: bool,
}

impl<T: PartialOrd> Interval<T> {
    pub fn new(lower: T, upper: T, lower_closed: bool, upper_closed: bool) -> Self {
        Self {
            lower,
            upper,
            lower_closed,
            upper_closed,
        }
    }

    pub fn closed(lower: T, upper: T) -> Self {
        Self::new(lower, upper, true, true)
    }

    pub fn contains(&self, value: &T) -> bool {
        let above = if self.lower_closed {
            *value >= self.lower
        } else {
            *value > self.lower
        };
        let below = if self.upper_closed {
            *value <= self.upper
        } else {
            *value < self.upper
        };
        above && below
    }

    pub fn is_empty(&self) -> bool {
        match self.lower.partial_cmp(&self.upper) {
            Some(Ordering::Less) => false,
            Some(Ordering::Equal) => !(self.lower_closed && self.upper_closed),
            _ => true,
        }
    }

    /// Whether the open segment strictly between two adjacent breakpoints lies
    /// inside this interval.
    fn covers_open(&self, from: &T, to: &T) -> bool {
        self.lower <= *from && self.upper >= *to && !self.is_empty()
    }
}

impl<T: Scalar> Interval<T> {
    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Interval<U> {
        Interval::new(
            f(&self.lower),
            f(&self.upper),
            self.lower_closed,
            self.upper_closed,
        )
    }
}

impl<T: fmt::Display> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lower_closed { '[' } else { '(' },
            self.lower,
            self.upper,
            if self.upper_closed { ']' } else { ')' }
        )
    }
}

/// Uncovered and multiply covered parts of a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionReport<T> {
    pub gaps: Vec<Interval<T>>,
    pub overlaps: Vec<Interval<T>>,
}

impl<T> PartitionReport<T> {
    pub fn is_partition(&self) -> bool {
        self.gaps.is_empty() && self.overlaps.is_empty()
    }
}

#[derive(Clone)]
enum Piece<T> {
    Point(T),
    Open(T, T),
}

/// Checks whether `bands` partition `domain` exactly.
///
/// The real line is cut at every endpoint into points and open segments; each
/// piece inside the domain is covered by zero, one, or several bands. Runs of
/// zero-covered pieces are gaps; runs of multiply covered pieces are overlaps.
pub fn analyze_partition<T>(domain: &Interval<T>, bands: &[Interval<T>]) -> PartitionReport<T>
where
    T: PartialOrd + Clone,
{
    let mut cuts: Vec<T> = Vec::with_capacity(bands.len() * 2 + 2);
    cuts.push(domain.lower.clone());
    cuts.push(domain.upper.clone());
    for band in bands {
        cuts.push(band.lower.clone());
        cuts.push(band.upper.clone());
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    cuts.dedup_by(|a, b| a == b);

    let mut pieces = Vec::with_capacity(cuts.len() * 2);
    for (i, cut) in cuts.iter().enumerate() {
        pieces.push(Piece::Point(cut.clone()));
        if let Some(next) = cuts.get(i + 1) {
            pieces.push(Piece::Open(cut.clone(), next.clone()));
        }
    }

    let inside = |piece: &Piece<T>, iv: &Interval<T>| match piece {
        Piece::Point(v) => iv.contains(v),
        Piece::Open(a, b) => iv.covers_open(a, b),
    };

    let mut gaps = RunCollector::default();
    let mut overlaps = RunCollector::default();
    for piece in &pieces {
        if !inside(piece, domain) {
            gaps.close();
            overlaps.close();
            continue;
        }
        let count = bands.iter().filter(|b| inside(piece, b)).count();
        if count == 0 {
            gaps.extend(piece);
        } else {
            gaps.close();
        }
        if count >= 2 {
            overlaps.extend(piece);
        } else {
            overlaps.close();
        }
    }
    gaps.close();
    overlaps.close();
    PartitionReport {
        gaps: gaps.done,
        overlaps: overlaps.done,
    }
}

struct RunCollector<T> {
    current: Option<(Piece<T>, Piece<T>)>,
    done: Vec<Interval<T>>,
}

impl<T> Default for RunCollector<T> {
    fn default() -> Self {
        Self {
            current: None,
            done: Vec::new(),
        }
    }
}

impl<T: Clone + PartialOrd> RunCollector<T> {
    fn extend(&mut self, piece: &Piece<T>) {
        match &mut self.current {
            Some((_, last)) => *last = piece.clone(),
            None => self.current = Some((piece.clone(), piece.clone())),
        }
    }

    fn close(&mut self) {
        if let Some((first, last)) = self.current.take() {
            let (lower, lower_closed) = match first {
                Piece::Point(v) => (v, true),
                Piece::Open(a, _) => (a, false),
            };
            let (upper, upper_closed) = match last {
                Piece::Point(v) => (v, true),
                Piece::Open(_, b) => (b, false),
            };
            self.done
                .push(Interval::new(lower, upper, lower_closed, upper_closed));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn iv(a: f64, b: f64, lc: bool, uc: bool) -> Interval {
        Interval::new(a, b, lc, uc)
    }

    #[test]
    fn membership_respects_closedness() {
        let band = iv(60.0, 90.0, false, true);
        assert!(!band.contains(&60.0));
        assert!(band.contains(&60.5));
        assert!(band.contains(&90.0));
        assert!(iv(100.0, 100.0, true, true).contains(&100.0));
        assert!(iv(5.0, 5.0, true, false).is_empty());
        assert!(iv(6.0, 5.0, true, true).is_empty());
    }

    #[test]
    fn exact_partition() {
        let domain = Interval::closed(0.0, 100.0);
        let bands = [
            iv(0.0, 60.0, true, true),
            iv(60.0, 90.0, false, true),
            iv(90.0, 100.0, false, true),
        ];
        assert!(analyze_partition(&domain, &bands).is_partition());
    }

    #[test]
    fn gap_between_bands_is_reported_open() {
        let domain = Interval::closed(0.0, 100.0);
        let bands = [Interval::closed(0.0, 60.0), Interval::closed(70.0, 100.0)];
        let report = analyze_partition(&domain, &bands);
        assert_eq!(report.gaps, vec![iv(60.0, 70.0, false, false)]);
        assert!(report.overlaps.is_empty());
        assert_eq!(report.gaps[0].to_string(), "(60, 70)");
    }

    #[test]
    fn shared_closed_endpoint_is_an_overlap() {
        let domain = Interval::closed(0.0, 10.0);
        let bands = [Interval::closed(0.0, 5.0), Interval::closed(5.0, 10.0)];
        let report = analyze_partition(&domain, &bands);
        assert_eq!(report.overlaps, vec![Interval::closed(5.0, 5.0)]);
        assert!(report.gaps.is_empty());
    }

    #[test]
    fn missing_point_is_a_gap() {
        let domain = Interval::closed(0.0, 100.0);
        let bands = [iv(0.0, 90.0, true, false), iv(90.0, 100.0, false, true)];
        let report = analyze_partition(&domain, &bands);
        assert_eq!(report.gaps, vec![Interval::closed(90.0, 90.0)]);
    }

    #[test]
    fn point_band_completes_half_open() {
        let domain = Interval::closed(0.0, 100.0);
        let bands = [
            Interval::closed(100.0, 100.0),
            iv(90.0, 100.0, true, false),
            iv(0.0, 90.0, true, false),
        ];
        assert!(analyze_partition(&domain, &bands).is_partition());
    }

    #[test]
    fn bands_outside_domain_are_ignored() {
        let domain = Interval::closed(0.0, 10.0);
        let bands = [Interval::closed(-5.0, 20.0)];
        assert!(analyze_partition(&domain, &bands).is_partition());
    }

    #[test]
    fn rational_instantiation() {
        let domain = Interval::closed(ratio(0, 1), ratio(1, 1));
        let bands = [
            Interval::new(ratio(0, 1), ratio(1, 3), true, false),
            Interval::new(ratio(1, 3), ratio(1, 1), true, true),
        ];
        assert!(analyze_partition(&domain, &bands).is_partition());
        let holes = [Interval::new(ratio(0, 1), ratio(1, 3), true, false)];
        let report = analyze_partition(&domain, &holes);
        assert_eq!(
            report.gaps,
            vec![Interval::new(ratio(1, 3), ratio(1, 1), true, true)]
        );
    }
}
