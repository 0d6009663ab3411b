//! Russian Snowball stemmer.
//!
//! Works on byte offsets: every letter of the accepted alphabet is two bytes
//! in UTF-8, so a char position `i` is byte `2 * i`.

fn is_vowel(c: char) -> bool {
    matches!(c, 'а' | 'е' | 'и' | 'о' | 'у' | 'ы' | 'э' | 'ю' | 'я')
}

pub(super) fn in_alphabet(word: &str) -> bool {
    word.chars().all(|c| matches!(c, 'а'..='я' | 'ё'))
}

const PERFECTIVE_GERUND_1: [&str; 3] = ["в", "вши", "вшись"];
const PERFECTIVE_GERUND_2: [&str; 6] = ["ив", "ыв", "ивши", "ывши", "ившись", "ывшись"];

const ADJECTIVE: [&str; 26] = [
    "ее", "ие", "ое", "ые", "ими", "ыми", "ей", "ий", "ой", "ый", "ем", "им", "ом", "ым", "его", "ого",
    "ему", "ому", "их", "ых", "ею", "ою", "ую", "юю", "ая", "яя",
];

const PARTICIPLE_1: [&str; 5] = ["ем", "нн", "вш", "щ", "ющ"];
const PARTICIPLE_2: [&str; 3] = ["ивш", "ывш", "ующ"];

const REFLEXIVE: [&str; 2] = ["сь", "ся"];

const VERB_1: [&str; 17] = [
    "ла", "на", "ете", "йте", "ли", "й", "л", "ем", "н", "ло", "но", "ет", "ют", "ны", "ть", "ешь", "нно",
];
const VERB_2: [&str; 29] = [
    "ила", "ыла", "ена", "ейте", "уйте", "ите", "или", "ыли", "ей", "уй", "ил", "ыл", "им", "ым", "ен",
    "ило", "ыло", "ено", "ят", "ует", "уют", "ит", "ыт", "ены", "ить", "ыть", "ишь", "ую", "ю",
];

const NOUN: [&str; 36] = [
    "а", "ев", "ов", "ие", "ье", "е", "иями", "ями", "ами", "еи", "ии", "и", "ией", "ей", "ой", "ий",
    "й", "иям", "ям", "ием", "ем", "ам", "ом", "о", "у", "ах", "иях", "ях", "ы", "ь", "ию", "ью", "ю",
    "ия", "ья", "я",
];

const SUPERLATIVE: [&str; 2] = ["ейш", "ейше"];
const DERIVATIONAL: [&str; 2] = ["ост", "ость"];

/// Stems a lowercase Russian word. Words containing anything other than
/// Cyrillic `а-я`/`ё` are returned unchanged.
pub fn stem(word: &str) -> String {
    if !in_alphabet(word) {
        return word.to_owned();
    }
    let mut w = word.replace('ё', "е");
    let (rv, r2) = mark_regions(&w);

    if !perfective_gerund(&mut w, rv) {
        remove_longest(&mut w, rv, &REFLEXIVE);
        let _ = adjectival(&mut w, rv) || verb(&mut w, rv) || remove_longest(&mut w, rv, &NOUN);
    }
    if region_ends(&w, rv, "и") {
        w.truncate(w.len() - "и".len());
    }
    if let Some(s) = longest(&w, rv, &[&DERIVATIONAL]) {
        if w.len() - s.len() >= r2 {
            w.truncate(w.len() - s.len());
        }
    }
    tidy_up(&mut w, rv);
    w
}

/// Byte offsets of RV (after the first vowel) and R2.
fn mark_regions(w: &str) -> (usize, usize) {
    let chars: Vec<char> = w.chars().collect();
    let n = chars.len();
    let find = |from: usize, want_vowel: bool| {
        (from..n).find(|&i| is_vowel(chars[i]) == want_vowel).map(|i| i + 1)
    };
    let rv = find(0, true);
    let r2 = rv
        .and_then(|i| find(i, false))
        .and_then(|i| find(i, true))
        .and_then(|i| find(i, false));
    (2 * rv.unwrap_or(n), 2 * r2.unwrap_or(n))
}

fn region_ends(w: &str, rv: usize, s: &str) -> bool {
    w.ends_with(s) && w.len() - s.len() >= rv
}

fn longest<'a>(w: &str, rv: usize, tables: &[&[&'a str]]) -> Option<&'a str> {
    tables
        .iter()
        .flat_map(|t| t.iter())
        .filter(|s| region_ends(w, rv, s))
        .max_by_key(|s| s.len())
        .copied()
}

/// True when the suffix is preceded, inside RV, by `а` or `я`.
fn after_a_or_ya(w: &str, rv: usize, suffix: &str) -> bool {
    let stem = &w[..w.len() - suffix.len()];
    region_ends(stem, rv, "а") || region_ends(stem, rv, "я")
}

/// Removes the longest suffix from a group whose first table needs a
/// preceding `а`/`я` and whose second table is unconditional.
fn remove_grouped(w: &mut String, rv: usize, needs_a: &[&str], plain: &[&str]) -> bool {
    let Some(s) = longest(w, rv, &[needs_a, plain]) else {
        return false;
    };
    if needs_a.contains(&s) && !after_a_or_ya(w, rv, s) {
        return false;
    }
    w.truncate(w.len() - s.len());
    true
}

fn remove_longest(w: &mut String, rv: usize, table: &[&str]) -> bool {
    match longest(w, rv, &[table]) {
        Some(s) => {
            w.truncate(w.len() - s.len());
            true
        }
        None => false,
    }
}

fn perfective_gerund(w: &mut String, rv: usize) -> bool {
    remove_grouped(w, rv, &PERFECTIVE_GERUND_1, &PERFECTIVE_GERUND_2)
}

fn adjectival(w: &mut String, rv: usize) -> bool {
    if !remove_longest(w, rv, &ADJECTIVE) {
        return false;
    }
    remove_grouped(w, rv, &PARTICIPLE_1, &PARTICIPLE_2);
    true
}

fn verb(w: &mut String, rv: usize) -> bool {
    remove_grouped(w, rv, &VERB_1, &VERB_2)
}

fn tidy_up(w: &mut String, rv: usize) {
    match longest(w, rv, &[&SUPERLATIVE, &["н", "ь"]]) {
        Some("ь") => w.truncate(w.len() - "ь".len()),
        Some("н") => {
            if region_ends(w, rv, "нн") {
                w.truncate(w.len() - "н".len());
            }
        }
        Some(s) => {
            w.truncate(w.len() - s.len());
            if region_ends(w, rv, "нн") {
                w.truncate(w.len() - "н".len());
            }
        }
        None => {}
    }
}
