//! Category and functor files shipped with the crate, compiled in so the
//! binary can resolve them by name.

use crate::ainfty::{AInftyError, TableCategory};
use crate::functors::TableFunctor;

macro_rules! bundle {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../data/", $name, ".cat")))),*]
    };
}

/// `(name, text)` for every bundled category, in a fixed order.
pub const CATEGORIES: &[(&str, &str)] = bundle!(
    "z2-resolution",
    "z2",
    "k",
    "k-f5",
    "k1",
    "k2-f3",
    "dual-numbers",
    "dual-numbers-shifted",
    "contractible-ideal",
    "gauged-ideal",
    "gauged-path",
    "square",
    "empty",
);

/// `(name, source, target, text)` for every bundled functor.
pub const FUNCTORS: &[(&str, &str, &str, &str)] = &[
    ("gauge", "contractible-ideal", "gauged-ideal", include_str!("../data/gauge.fun")),
    ("collapse", "k1", "k", include_str!("../data/collapse.fun")),
];

pub fn category_text(name: &str) -> Option<&'static str> {
    CATEGORIES.iter().find(|c| c.0 == name).map(|c| c.1)
}

/// Parses a bundled category. Panics on an unknown name.
pub fn category(name: &str) -> TableCategory {
    let text = category_text(name).unwrap_or_else(|| panic!("no bundled category {name}"));
    TableCategory::from_text(text).expect("bundled files parse")
}

pub fn functor(name: &str) -> Result<(TableCategory, TableCategory, TableFunctor), AInftyError> {
    let &(_, a, b, text) = FUNCTORS.iter().find(|f| f.0 == name).ok_or_else(|| AInftyError::Invalid(format!("no bundled functor {name}")))?;
    let (a, b) = (category(a), category(b));
    let f = TableFunctor::from_text(text, &a, &b)?;
    Ok((a, b, f))
}
