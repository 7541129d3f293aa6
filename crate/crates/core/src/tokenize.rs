//! Deterministic tokenization shared by the metrics.
//!
//! [`tokenize_intl`] reproduces the international BLEU tokenizer: three
//! regex substitution passes over Unicode general categories, applied left to
//! right without overlap, then a whitespace split.

use std::borrow::Cow;
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use unicode_general_category::{get_general_category, GeneralCategory};

/// Unicode version of the category tables used by the tokenizer.
pub fn unicode_version() -> String {
    let (major, minor, patch) = unicode_general_category::UNICODE_VERSION;
    format!("{major}.{minor}.{patch}")
}

/// Non-empty, whitespace-free tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenSeq(Vec<String>);

impl TokenSeq {
    /// Splits on whitespace. Callers guarantee the text is already tokenized.
    pub fn from_whitespace(text: &str) -> Self {
        Self(
            text.split(is_split_space)
                .filter(|t| !t.is_empty())
                .map(String::from)
                .collect(),
        )
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.0
    }

    /// Tokens joined by single spaces.
    pub fn canonical(&self) -> String {
        self.0.join(" ")
    }
}

impl Deref for TokenSeq {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

impl AsRef<[String]> for TokenSeq {
    fn as_ref(&self) -> &[String] {
        &self.0
    }
}

impl fmt::Display for TokenSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

/// Unicode scalar values of a text, optionally without whitespace.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct CharSeq(Vec<char>);

impl CharSeq {
    pub fn chars(&self) -> &[char] {
        &self.0
    }
}

impl Deref for CharSeq {
    type Target = [char];

    fn deref(&self) -> &[char] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Casing {
    #[default]
    Mixed,
    Lower,
}

impl fmt::Display for Casing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Casing::Mixed => "mixed",
            Casing::Lower => "lc",
        })
    }
}

pub fn apply_casing(text: &str, mode: Casing) -> Cow<'_, str> {
    match mode {
        Casing::Mixed => Cow::Borrowed(text),
        Casing::Lower => Cow::Owned(text.to_lowercase()),
    }
}

fn is_number(c: char) -> bool {
    matches!(
        get_general_category(c),
        GeneralCategory::DecimalNumber
            | GeneralCategory::LetterNumber
            | GeneralCategory::OtherNumber
    )
}

fn is_punctuation(c: char) -> bool {
    matches!(
        get_general_category(c),
        GeneralCategory::ConnectorPunctuation
            | GeneralCategory::DashPunctuation
            | GeneralCategory::OpenPunctuation
            | GeneralCategory::ClosePunctuation
            | GeneralCategory::InitialPunctuation
            | GeneralCategory::FinalPunctuation
            | GeneralCategory::OtherPunctuation
    )
}

fn is_symbol(c: char) -> bool {
    matches!(
        get_general_category(c),
        GeneralCategory::MathSymbol
            | GeneralCategory::CurrencySymbol
            | GeneralCategory::ModifierSymbol
            | GeneralCategory::OtherSymbol
    )
}

/// Whitespace as understood by a Python `str.split()`: the Unicode
/// `White_Space` set plus the ASCII information separators.
fn is_split_space(c: char) -> bool {
    c.is_whitespace() || ('\u{1c}'..='\u{1f}').contains(&c)
}

/// Tokenizes with the international scheme:
///
/// 1. a punctuation character preceded by a non-digit gets spaces around it,
/// 2. a punctuation character followed by a non-digit gets spaces around it,
/// 3. every symbol character gets spaces around it,
///
/// then the result is split on whitespace. Punctuation between two digits
/// (`7.5`, `7,5`) stays attached.
pub fn tokenize_intl(text: &str) -> TokenSeq {
    let chars: Vec<char> = text.chars().collect();
    let pass1 = sub_nondigit_punct(&chars);
    let pass2 = sub_punct_nondigit(&pass1);
    let mut pass3 = String::with_capacity(pass2.len() * 2);
    for c in pass2 {
        if is_symbol(c) {
            pass3.push(' ');
            pass3.push(c);
            pass3.push(' ');
        } else {
            pass3.push(c);
        }
    }
    TokenSeq::from_whitespace(&pass3)
}

// `(\P{N})(\p{P})` -> `\1 \2 `
fn sub_nondigit_punct(chars: &[char]) -> Vec<char> {
    let mut out = Vec::with_capacity(chars.len() + 8);
    let mut i = 0;
    while i < chars.len() {
        if i + 1 < chars.len() && !is_number(chars[i]) && is_punctuation(chars[i + 1]) {
            out.extend_from_slice(&[chars[i], ' ', chars[i + 1], ' ']);
            i += 2;
        } else {
            out.push(chars[i]);
            i += 1;
        }
    }
    out
}

// `(\p{P})(\P{N})` -> ` \1 \2`
fn sub_punct_nondigit(chars: &[char]) -> Vec<char> {
    let mut out = Vec::with_capacity(chars.len() + 8);
    let mut i = 0;
    while i < chars.len() {
        if i + 1 < chars.len() && is_punctuation(chars[i]) && !is_number(chars[i + 1]) {
            out.extend_from_slice(&[' ', chars[i], ' ', chars[i + 1]]);
            i += 2;
        } else {
            out.push(chars[i]);
            i += 1;
        }
    }
    out
}

pub fn char_sequence(text: &str, remove_whitespace: bool) -> CharSeq {
    CharSeq(
        text.chars()
            .filter(|c| !(remove_whitespace && c.is_whitespace()))
            .collect(),
    )
}
