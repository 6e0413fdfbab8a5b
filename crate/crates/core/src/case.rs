//! The six slip cases and their fixed ordering.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// One of the six slip cases, the classification target.
///
/// The ordering `A < B < C < D < E < F` is total and fixed; it drives the
/// pair enumeration `AB..EF` and the row grouping of the feature database.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CaseLabel {
    /// A: phone placed gently on a table and left there.
    NormalTouchKeep,
    /// B: phone thrown onto a table or chair.
    AccidentalKeep,
    /// C: phone slips completely down a slope.
    CompleteSlip,
    /// D: phone on a slope, recorded up to the instant it starts slipping.
    SlipTillTippingPoint,
    /// E: phone flipped and thrown from one point to another.
    Flip,
    /// F: controlled fall from a height, ending in an impact.
    Fall,
}

impl CaseLabel {
    /// All six cases in label order.
    pub const ALL: [CaseLabel; 6] = [
        CaseLabel::NormalTouchKeep,
        CaseLabel::AccidentalKeep,
        CaseLabel::CompleteSlip,
        CaseLabel::SlipTillTippingPoint,
        CaseLabel::Flip,
        CaseLabel::Fall,
    ];

    /// Position in label order: A is 0, F is 5.
    pub fn index(self) -> usize {
        self as usize
    }

    /// Single-letter name used in file names and reports.
    pub fn letter(self) -> char {
        (b'A' + self.index() as u8) as char
    }

    pub fn from_letter(c: char) -> Option<CaseLabel> {
        let idx = (c as i32) - ('A' as i32);
        if (0..6).contains(&idx) {
            Some(CaseLabel::ALL[idx as usize])
        } else {
            None
        }
    }

    /// The 15 unordered case pairs in row order AB, AC, .., EF.
    pub fn pairs() -> Vec<(CaseLabel, CaseLabel)> {
        let mut out = Vec::with_capacity(15);
        for i in 0..6 {
            for j in i + 1..6 {
                out.push((CaseLabel::ALL[i], CaseLabel::ALL[j]));
            }
        }
        out
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for CaseLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => CaseLabel::from_letter(c)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown case letter `{s}`"))),
            _ => Err(Error::InvalidArgument(format!("unknown case letter `{s}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_is_total_and_fixed() {
        for w in CaseLabel::ALL.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert_eq!(CaseLabel::ALL.len(), 6);
    }

    #[test]
    fn letters_round_trip() {
        for case in CaseLabel::ALL {
            assert_eq!(CaseLabel::from_letter(case.letter()), Some(case));
            assert_eq!(case.letter().to_string().parse::<CaseLabel>().unwrap(), case);
        }
        assert_eq!(CaseLabel::from_letter('G'), None);
        assert!("G".parse::<CaseLabel>().is_err());
        assert!("AB".parse::<CaseLabel>().is_err());
    }

    #[test]
    fn pair_enumeration_matches_table_order() {
        let pairs = CaseLabel::pairs();
        assert_eq!(pairs.len(), 15);
        let names: Vec<String> = pairs
            .iter()
            .map(|(a, b)| format!("{}{}", a.letter(), b.letter()))
            .collect();
        assert_eq!(
            names,
            [
                "AB", "AC", "AD", "AE", "AF", "BC", "BD", "BE", "BF", "CD", "CE", "CF", "DE",
                "DF", "EF"
            ]
        );
    }
}
