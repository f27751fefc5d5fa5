//! Supported Q-tori and their rational characters.

use std::fmt;

use crate::error::{Error, Result};
use crate::fields::AbelianFieldSpec;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TorusFactor {
    /// `G_m^rank`.
    Split(u32),
    /// `Res_{F/Q} G_m`.
    WeilRestriction(AbelianFieldSpec),
    /// The kernel of the norm `Res_{F/Q} G_m → G_m`.
    NormOne(AbelianFieldSpec),
}

impl TorusFactor {
    /// Number of character slots: one per split coordinate, one (the norm)
    /// per Weil restriction. Norm-one tori have no nontrivial rational characters.
    pub fn character_slots(&self) -> usize {
        match self {
            TorusFactor::Split(r) => *r as usize,
            TorusFactor::WeilRestriction(_) => 1,
            TorusFactor::NormOne(_) => 0,
        }
    }

    pub fn splitting_field(&self) -> AbelianFieldSpec {
        match self {
            TorusFactor::Split(_) => AbelianFieldSpec::rational(),
            TorusFactor::WeilRestriction(f) | TorusFactor::NormOne(f) => f.clone(),
        }
    }

    pub fn dimension(&self) -> u64 {
        match self {
            TorusFactor::Split(r) => *r as u64,
            TorusFactor::WeilRestriction(f) => f.degree(),
            TorusFactor::NormOne(f) => f.degree() - 1,
        }
    }
}

impl fmt::Display for TorusFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TorusFactor::Split(r) => write!(f, "split {r}"),
            TorusFactor::WeilRestriction(k) => write!(f, "weil {k}"),
            TorusFactor::NormOne(k) => write!(f, "normone {k}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TorusSpec {
    factors: Vec<TorusFactor>,
    class_number_override: Option<u64>,
}

impl TorusSpec {
    pub fn new(factors: Vec<TorusFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Invalid("a torus needs at least one factor".into()));
        }
        if factors.iter().any(|f| matches!(f, TorusFactor::Split(0))) {
            return Err(Error::Invalid("split factor of rank 0".into()));
        }
        if let Some(f) = factors.iter().find(|f| matches!(f, TorusFactor::NormOne(k) if k.is_rational())) {
            return Err(Error::Invalid(format!("{f} is the trivial torus")));
        }
        Ok(TorusSpec { factors, class_number_override: None })
    }

    pub fn split(rank: u32) -> Self {
        TorusSpec::new(vec![TorusFactor::Split(rank)]).expect("positive rank")
    }

    pub fn weil(field: AbelianFieldSpec) -> Self {
        TorusSpec { factors: vec![TorusFactor::WeilRestriction(field)], class_number_override: None }
    }

    pub fn with_class_number(mut self, h: u64) -> Result<Self> {
        if h == 0 {
            return Err(Error::Invalid("class number override must be positive".into()));
        }
        self.class_number_override = Some(h);
        Ok(self)
    }

    pub fn factors(&self) -> &[TorusFactor] {
        &self.factors
    }

    pub fn class_number_override(&self) -> Option<u64> {
        self.class_number_override
    }

    pub fn character_slots(&self) -> usize {
        self.factors.iter().map(TorusFactor::character_slots).sum()
    }

    /// Ordered factor list, used as the torus identity when grouping classes.
    pub fn signature(&self) -> String {
        self.factors.iter().map(ToString::to_string).collect::<Vec<_>>().join(" x ")
    }

    pub fn is_split(&self) -> bool {
        self.factors.iter().all(|f| f.splitting_field().is_rational())
    }
}

/// A rational character of a torus, as integer exponents on its slots.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CharacterSpec {
    exponents: Vec<i64>,
}

impl CharacterSpec {
    pub fn new(exponents: Vec<i64>) -> Self {
        CharacterSpec { exponents }
    }

    pub fn exponents(&self) -> &[i64] {
        &self.exponents
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }

    pub fn check(&self, torus: &TorusSpec) -> Result<()> {
        if self.exponents.len() != torus.character_slots() {
            return Err(Error::UnsupportedCharacter(format!(
                "character has {} exponents, torus {} has {} slots",
                self.exponents.len(),
                torus.signature(),
                torus.character_slots()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &CharacterSpec) -> CharacterSpec {
        CharacterSpec { exponents: self.exponents.iter().zip(&other.exponents).map(|(a, b)| a + b).collect() }
    }
}

impl fmt::Display for CharacterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.exponents.iter().map(i64::to_string).collect();
        write!(f, "{}", parts.join(" "))
    }
}
