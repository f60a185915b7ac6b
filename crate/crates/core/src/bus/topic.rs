//! Routing keys, binding patterns and AMQP-style topic matching.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::BusError;

fn valid_word(word: &str) -> bool {
    !word.is_empty()
        && word
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
}

/// Publisher-side address: one or more dot-separated words.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RoutingKey {
    words: Vec<String>,
}

impl RoutingKey {
    pub fn parse(s: &str) -> Result<Self, BusError> {
        let words: Vec<String> = s.split('.').map(str::to_owned).collect();
        if let Some(bad) = words.iter().find(|w| !valid_word(w)) {
            return Err(BusError::InvalidKey {
                key: s.to_owned(),
                reason: format!("bad word {bad:?}"),
            });
        }
        Ok(Self { words })
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn first(&self) -> &str {
        &self.words[0]
    }
}

impl fmt::Display for RoutingKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.words.join("."))
    }
}

impl FromStr for RoutingKey {
    type Err = BusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl Serialize for RoutingKey {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RoutingKey {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Self::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PatternToken {
    Word(String),
    /// `*`: exactly one word.
    Star,
    /// `#`: zero or more words.
    Hash,
}

/// Subscriber-side filter over routing keys.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BindingPattern {
    tokens: Vec<PatternToken>,
}

impl BindingPattern {
    pub fn parse(s: &str) -> Result<Self, BusError> {
        let tokens = s
            .split('.')
            .map(|t| match t {
                "*" => Ok(PatternToken::Star),
                "#" => Ok(PatternToken::Hash),
                w if valid_word(w) => Ok(PatternToken::Word(w.to_owned())),
                w => Err(BusError::InvalidPattern {
                    pattern: s.to_owned(),
                    reason: format!("bad token {w:?}"),
                }),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { tokens })
    }

    pub fn tokens(&self) -> &[PatternToken] {
        &self.tokens
    }

    /// Literal first word, if the pattern starts with one.
    pub fn literal_prefix(&self) -> Option<&str> {
        match &self.tokens[0] {
            PatternToken::Word(w) => Some(w),
            _ => None,
        }
    }

    pub fn matches(&self, key: &RoutingKey) -> bool {
        topic_match(self, key)
    }
}

impl From<&RoutingKey> for BindingPattern {
    fn from(key: &RoutingKey) -> Self {
        Self {
            tokens: key.words.iter().cloned().map(PatternToken::Word).collect(),
        }
    }
}

impl fmt::Display for BindingPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.tokens.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            match t {
                PatternToken::Word(w) => f.write_str(w)?,
                PatternToken::Star => f.write_str("*")?,
                PatternToken::Hash => f.write_str("#")?,
            }
        }
        Ok(())
    }
}

impl FromStr for BindingPattern {
    type Err = BusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl Serialize for BindingPattern {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BindingPattern {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Self::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Topic-exchange matching: `*` consumes exactly one word, `#` zero or more.
///
/// Runs a boolean DP over (pattern prefix, key prefix); `reach[j]` is true when
/// the pattern tokens seen so far can consume exactly the first `j` words.
pub fn topic_match(pattern: &BindingPattern, key: &RoutingKey) -> bool {
    let words = key.words();
    let n = words.len();
    let mut reach = vec![false; n + 1];
    reach[0] = true;
    for token in pattern.tokens() {
        let mut next = vec![false; n + 1];
        match token {
            PatternToken::Hash => {
                let mut any = false;
                for j in 0..=n {
                    any |= reach[j];
                    next[j] = any;
                }
            }
            PatternToken::Star => {
                next[1..(n + 1)].copy_from_slice(&reach[..n]);
            }
            PatternToken::Word(w) => {
                for j in 0..n {
                    next[j + 1] = reach[j] && words[j] == *w;
                }
            }
        }
        reach = next;
        if !reach.iter().any(|r| *r) {
            return false;
        }
    }
    reach[n]
}
