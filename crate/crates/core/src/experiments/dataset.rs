//! 8x8 black-and-white digit bitmaps and their serialization order.

use crate::error::{Error, Result};

pub const SIDE: usize = 8;
pub const PIXELS: usize = SIDE * SIDE;

const BUILTIN: &str = include_str!("../../data/digits.txt");

/// Serial index of a pixel: bottom row first, left to right within a row.
pub fn pixel_index(row_from_top: usize, col: usize) -> usize {
    (SIDE - 1 - row_from_top) * SIDE + col
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitBitmap {
    /// `rows[0]` is the top row.
    rows: [[bool; SIDE]; SIDE],
}

impl DigitBitmap {
    pub fn from_rows(rows: [[bool; SIDE]; SIDE]) -> Self {
        Self { rows }
    }

    pub fn blank() -> Self {
        Self {
            rows: [[false; SIDE]; SIDE],
        }
    }

    pub fn get(&self, row_from_top: usize, col: usize) -> bool {
        self.rows[row_from_top][col]
    }

    pub fn set(&mut self, row_from_top: usize, col: usize, black: bool) {
        self.rows[row_from_top][col] = black;
    }

    /// Pixels in serial order.
    pub fn serialized(&self) -> [bool; PIXELS] {
        let mut out = [false; PIXELS];
        for (r, row) in self.rows.iter().enumerate() {
            for (c, &px) in row.iter().enumerate() {
                out[pixel_index(r, c)] = px;
            }
        }
        out
    }

    pub fn black_count(&self) -> usize {
        self.rows.iter().flatten().filter(|&&p| p).count()
    }

    /// True when every black pixel of `self` is also black in `other`.
    pub fn is_subset_of(&self, other: &DigitBitmap) -> bool {
        self.rows
            .iter()
            .flatten()
            .zip(other.rows.iter().flatten())
            .all(|(&a, &b)| !a || b)
    }

    /// Black pixels of `self` that are white in `other`.
    pub fn difference_count(&self, other: &DigitBitmap) -> usize {
        self.rows
            .iter()
            .flatten()
            .zip(other.rows.iter().flatten())
            .filter(|(&a, &b)| a && !b)
            .count()
    }

    fn to_text(&self) -> String {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&p| if p { '#' } else { '.' }).collect::<String>())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    digits: Vec<DigitBitmap>,
}

impl Dataset {
    /// The bundled ten-digit set.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("bundled digit set is well formed")
    }

    /// Parses blank-line separated blocks of eight 8-character rows
    /// (`#` black, `.` white), digits 0 to 9 in order.
    pub fn parse(text: &str) -> Result<Self> {
        let mut digits = Vec::new();
        let mut block: Vec<&str> = Vec::new();
        let flush = |block: &mut Vec<&str>, digits: &mut Vec<DigitBitmap>| -> Result<()> {
            if block.is_empty() {
                return Ok(());
            }
            if block.len() != SIDE {
                return Err(Error::Parse(format!(
                    "digit {} has {} rows, expected {SIDE}",
                    digits.len(),
                    block.len()
                )));
            }
            let mut bm = DigitBitmap::blank();
            for (r, line) in block.iter().enumerate() {
                let chars: Vec<char> = line.chars().collect();
                if chars.len() != SIDE {
                    return Err(Error::Parse(format!(
                        "digit {} row {r}: expected {SIDE} characters",
                        digits.len()
                    )));
                }
                for (c, ch) in chars.into_iter().enumerate() {
                    match ch {
                        '#' => bm.set(r, c, true),
                        '.' => {}
                        other => {
                            return Err(Error::Parse(format!(
                                "digit {} row {r}: unexpected `{other}`",
                                digits.len()
                            )))
                        }
                    }
                }
            }
            digits.push(bm);
            block.clear();
            Ok(())
        };
        for line in text.lines() {
            let line = line.trim_end();
            if line.is_empty() {
                flush(&mut block, &mut digits)?;
            } else {
                block.push(line);
            }
        }
        flush(&mut block, &mut digits)?;
        if digits.len() != 10 {
            return Err(Error::Parse(format!("expected 10 digits, found {}", digits.len())));
        }
        Ok(Self { digits })
    }

    pub fn to_text(&self) -> String {
        let mut out = self
            .digits
            .iter()
            .map(DigitBitmap::to_text)
            .collect::<Vec<_>>()
            .join("\n\n");
        out.push('\n');
        out
    }

    pub fn digit(&self, d: usize) -> &DigitBitmap {
        &self.digits[d]
    }

    pub fn digits(&self) -> &[DigitBitmap] {
        &self.digits
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_has_three_inside_eight() {
        let ds = Dataset::builtin();
        assert_eq!(ds.digits().len(), 10);
        assert!(ds.digit(3).is_subset_of(ds.digit(8)));
        assert!(ds.digit(3).black_count() < ds.digit(8).black_count());
    }

    #[test]
    fn no_other_containment() {
        let ds = Dataset::builtin();
        for a in 0..10 {
            for b in 0..10 {
                if a == b || (a, b) == (3, 8) {
                    continue;
                }
                assert!(
                    ds.digit(a).difference_count(ds.digit(b)) >= 2,
                    "digit {a} nearly inside {b}"
                );
            }
        }
    }

    #[test]
    fn scan_order_starts_bottom_left() {
        assert_eq!(pixel_index(7, 0), 0);
        assert_eq!(pixel_index(7, 7), 7);
        assert_eq!(pixel_index(6, 0), 8);
        assert_eq!(pixel_index(0, 7), 63);
    }

    #[test]
    fn text_round_trip() {
        let ds = Dataset::builtin();
        assert_eq!(Dataset::parse(&ds.to_text()).unwrap(), ds);
    }

    #[test]
    fn parse_errors() {
        assert!(Dataset::parse("").is_err());
        assert!(Dataset::parse("........\n").is_err());
        let bad = Dataset::builtin().to_text().replacen('#', "x", 1);
        assert!(Dataset::parse(&bad).is_err());
    }
}
