//! Snowball stemmers for the two supported languages.

pub mod english;
pub mod russian;

use crate::lang::Language;

/// Stems one lowercase token. Tokens outside the language's alphabet pass
/// through unchanged.
pub fn stem(token: &str, language: Language) -> String {
    match language {
        Language::En => english::stem(token),
        Language::Ru => russian::stem(token),
    }
}
