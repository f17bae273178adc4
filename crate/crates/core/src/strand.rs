//! Text encoding of strands: one strand per line, digits `0..r-1`, or the
//! nucleotide alias `A=0, C=1, G=2, T=3` when `r = 4`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Symbol;

const NUCLEOTIDES: [char; 4] = ['A', 'C', 'G', 'T'];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrandFormat {
    #[default]
    Digits,
    Acgt,
}

impl FromStr for StrandFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "digits" => Ok(StrandFormat::Digits),
            "acgt" => Ok(StrandFormat::Acgt),
            other => Err(Error::Parse(format!("unknown strand format `{other}`"))),
        }
    }
}

impl fmt::Display for StrandFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrandFormat::Digits => "digits",
            StrandFormat::Acgt => "acgt",
        })
    }
}

impl StrandFormat {
    /// Checks that the format can represent an alphabet of size `r`.
    pub fn check_alphabet(self, r: usize) -> Result<()> {
        match self {
            StrandFormat::Digits if r > 10 => Err(Error::InvalidParams(
                "digit text encoding requires r ≤ 10".into(),
            )),
            StrandFormat::Acgt if r != 4 => {
                Err(Error::InvalidParams("ACGT alias requires r = 4".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn parse_word(self, text: &str) -> Result<Vec<Symbol>> {
        text.chars()
            .map(|c| match self {
                StrandFormat::Digits => c
                    .to_digit(10)
                    .map(|d| d as Symbol)
                    .ok_or_else(|| Error::Parse(format!("invalid digit `{c}`"))),
                StrandFormat::Acgt => NUCLEOTIDES
                    .iter()
                    .position(|&n| n == c.to_ascii_uppercase())
                    .map(|d| d as Symbol)
                    .ok_or_else(|| Error::Parse(format!("invalid nucleotide `{c}`"))),
            })
            .collect()
    }

    pub fn format_word(self, word: &[Symbol]) -> String {
        word.iter()
            .map(|&s| match self {
                StrandFormat::Digits => char::from_digit(s as u32, 10).unwrap_or('?'),
                StrandFormat::Acgt => NUCLEOTIDES.get(s as usize).copied().unwrap_or('?'),
            })
            .collect()
    }

    /// Parses one strand per non-empty line.
    pub fn parse_batch(self, text: &str) -> Result<Vec<Vec<Symbol>>> {
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| self.parse_word(l))
            .collect()
    }

    pub fn format_batch(self, strands: &[Vec<Symbol>]) -> String {
        let mut out = String::with_capacity(strands.iter().map(|s| s.len() + 1).sum());
        for s in strands {
            out.push_str(&self.format_word(s));
            out.push('\n');
        }
        out
    }
}
