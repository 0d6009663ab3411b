//! English Snowball stemmer (Porter2, current revision).

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u' | b'y')
}

// vowels plus w, x and the consonant-y marker
fn is_vowel_wxy(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u' | b'y' | b'w' | b'x' | b'Y')
}

fn is_valid_li(c: u8) -> bool {
    matches!(c, b'c' | b'd' | b'e' | b'g' | b'h' | b'k' | b'm' | b'n' | b'r' | b't')
}

const REGION_PREFIXES: [&str; 9] = [
    "arsen", "commun", "emerg", "gener", "inter", "later", "organ", "past", "univers",
];

const EXCEPTIONS: [(&str, &str); 15] = [
    ("andes", "andes"),
    ("atlas", "atlas"),
    ("bias", "bias"),
    ("cosmos", "cosmos"),
    ("early", "earli"),
    ("gently", "gentl"),
    ("howe", "howe"),
    ("idly", "idl"),
    ("news", "news"),
    ("only", "onli"),
    ("singly", "singl"),
    ("skies", "sky"),
    ("skis", "ski"),
    ("sky", "sky"),
    ("ugly", "ugli"),
];

pub(super) fn in_alphabet(word: &str) -> bool {
    word.bytes().all(|c| c.is_ascii_lowercase() || c == b'\'')
}

/// Stems a lowercase English word. Words with characters outside `a-z` and
/// the apostrophe are returned unchanged.
pub fn stem(word: &str) -> String {
    if !in_alphabet(word) {
        return word.to_owned();
    }
    if let Some(&(_, out)) = EXCEPTIONS.iter().find(|(w, _)| *w == word) {
        return out.to_owned();
    }
    if word.len() < 3 {
        return word.to_owned();
    }

    let mut w = word.as_bytes().to_vec();
    if w[0] == b'\'' {
        w.remove(0);
    }
    let mut y_found = false;
    if w.first() == Some(&b'y') {
        w[0] = b'Y';
        y_found = true;
    }
    for i in 1..w.len() {
        if w[i] == b'y' && is_vowel(w[i - 1]) {
            w[i] = b'Y';
            y_found = true;
        }
    }

    let (p1, p2) = mark_regions(&w);
    step_1a(&mut w);
    step_1b(&mut w, p1);
    step_1c(&mut w);
    step_2(&mut w, p1);
    step_3(&mut w, p1, p2);
    step_4(&mut w, p2);
    step_5(&mut w, p1, p2);

    if y_found {
        for c in w.iter_mut() {
            if *c == b'Y' {
                *c = b'y';
            }
        }
    }
    String::from_utf8(w).expect("ascii in, ascii out")
}

/// Position just past the first non-vowel that follows a vowel, searching
/// from `start`.
fn after_vowel_consonant(w: &[u8], start: usize) -> Option<usize> {
    let v = start + w.get(start..)?.iter().position(|&c| is_vowel(c))?;
    let c = v + 1 + w[v + 1..].iter().position(|&c| !is_vowel(c))?;
    Some(c + 1)
}

fn mark_regions(w: &[u8]) -> (usize, usize) {
    let n = w.len();
    let p1 = match REGION_PREFIXES.iter().find(|p| w.starts_with(p.as_bytes())) {
        Some(p) => Some(p.len()),
        None => after_vowel_consonant(w, 0),
    };
    match p1 {
        Some(p1) => (p1, after_vowel_consonant(w, p1).unwrap_or(n)),
        None => (n, n),
    }
}

fn short_syllable_before(w: &[u8], end: usize) -> bool {
    let w = &w[..end];
    let n = w.len();
    (n >= 3 && !is_vowel_wxy(w[n - 1]) && is_vowel(w[n - 2]) && !is_vowel(w[n - 3]))
        || (n == 2 && !is_vowel(w[1]) && is_vowel(w[0]))
        || w.ends_with(b"past")
}

fn ends(w: &[u8], s: &str) -> bool {
    w.ends_with(s.as_bytes())
}

fn replace_suffix(w: &mut Vec<u8>, len: usize, with: &str) {
    w.truncate(w.len() - len);
    w.extend_from_slice(with.as_bytes());
}

/// Longest entry of `table` that `w` ends with.
fn longest<'a, T>(w: &[u8], table: &'a [(&'a str, T)]) -> Option<&'a (&'a str, T)> {
    table
        .iter()
        .filter(|(s, _)| ends(w, s))
        .max_by_key(|(s, _)| s.len())
}

fn step_1a(w: &mut Vec<u8>) {
    for suffix in ["'s'", "'s", "'"] {
        if ends(w, suffix) {
            w.truncate(w.len() - suffix.len());
            break;
        }
    }
    let n = w.len();
    if ends(w, "sses") {
        replace_suffix(w, 4, "ss");
    } else if ends(w, "ied") || ends(w, "ies") {
        let with = if n - 3 >= 2 { "i" } else { "ie" };
        replace_suffix(w, 3, with);
    } else if ends(w, "ss") || ends(w, "us") {
    } else if ends(w, "s") && n >= 2 && w[..n - 2].iter().any(|&c| is_vowel(c)) {
        w.truncate(n - 1);
    }
}

#[derive(Clone, Copy)]
enum Suffix1b {
    Eed,
    Ing,
    Ed,
}

fn step_1b(w: &mut Vec<u8>, p1: usize) {
    const TABLE: [(&str, Suffix1b); 6] = [
        ("eedly", Suffix1b::Eed),
        ("ingly", Suffix1b::Ed),
        ("edly", Suffix1b::Ed),
        ("eed", Suffix1b::Eed),
        ("ing", Suffix1b::Ing),
        ("ed", Suffix1b::Ed),
    ];
    let Some(&(suffix, kind)) = longest(w, &TABLE) else {
        return;
    };
    let start = w.len() - suffix.len();
    match kind {
        Suffix1b::Eed => {
            if start >= p1 && !matches!(&w[..start], b"succ" | b"proc" | b"exc") {
                replace_suffix(w, suffix.len(), "ee");
            }
            return;
        }
        Suffix1b::Ing => {
            let stem = &w[..start];
            if stem.len() == 2 && stem[1] == b'y' && !is_vowel(stem[0]) {
                // dying -> die
                w.truncate(1);
                w.extend_from_slice(b"ie");
                return;
            }
            if matches!(stem, b"even" | b"cann" | b"inn" | b"earr" | b"herr" | b"out") {
                return;
            }
        }
        Suffix1b::Ed => {}
    }

    if !w[..start].iter().any(|&c| is_vowel(c)) {
        return;
    }
    w.truncate(start);
    let n = w.len();
    if ends(w, "at") || ends(w, "bl") || ends(w, "iz") {
        w.push(b'e');
    } else if n >= 2 && w[n - 1] == w[n - 2] && matches!(w[n - 1], b'b' | b'd' | b'f' | b'g' | b'm' | b'n' | b'p' | b'r' | b't') {
        if !(n == 3 && matches!(w[0], b'a' | b'e' | b'o')) {
            w.pop();
        }
    } else if n == p1 && short_syllable_before(w, n) {
        w.push(b'e');
    }
}

fn step_1c(w: &mut [u8]) {
    let n = w.len();
    if n >= 3 && matches!(w[n - 1], b'y' | b'Y') && !is_vowel(w[n - 2]) {
        w[n - 1] = b'i';
    }
}

#[derive(Clone, Copy)]
enum Step2 {
    To(&'static str),
    Ogi,
    Li,
}

fn step_2(w: &mut Vec<u8>, p1: usize) {
    use Step2::*;
    const TABLE: [(&str, Step2); 25] = [
        ("tional", To("tion")),
        ("enci", To("ence")),
        ("anci", To("ance")),
        ("abli", To("able")),
        ("entli", To("ent")),
        ("izer", To("ize")),
        ("ization", To("ize")),
        ("ational", To("ate")),
        ("ation", To("ate")),
        ("ator", To("ate")),
        ("alism", To("al")),
        ("aliti", To("al")),
        ("alli", To("al")),
        ("fulness", To("ful")),
        ("fulli", To("ful")),
        ("ousli", To("ous")),
        ("ousness", To("ous")),
        ("iveness", To("ive")),
        ("iviti", To("ive")),
        ("biliti", To("ble")),
        ("bli", To("ble")),
        ("ogist", To("og")),
        ("lessli", To("less")),
        ("ogi", Ogi),
        ("li", Li),
    ];
    let Some(&(suffix, action)) = longest(w, &TABLE) else {
        return;
    };
    let start = w.len() - suffix.len();
    if start < p1 {
        return;
    }
    match action {
        To(rep) => replace_suffix(w, suffix.len(), rep),
        Ogi => {
            if start > 0 && w[start - 1] == b'l' {
                replace_suffix(w, 3, "og");
            }
        }
        Li => {
            if start > 0 && is_valid_li(w[start - 1]) {
                w.truncate(start);
            }
        }
    }
}

fn step_3(w: &mut Vec<u8>, p1: usize, p2: usize) {
    const TABLE: [(&str, Option<&str>); 9] = [
        ("tional", Some("tion")),
        ("ational", Some("ate")),
        ("alize", Some("al")),
        ("icate", Some("ic")),
        ("iciti", Some("ic")),
        ("ical", Some("ic")),
        ("ful", Some("")),
        ("ness", Some("")),
        // deleted only inside R2
        ("ative", None),
    ];
    let Some(&(suffix, action)) = longest(w, &TABLE) else {
        return;
    };
    let start = w.len() - suffix.len();
    if start < p1 {
        return;
    }
    match action {
        Some(rep) => replace_suffix(w, suffix.len(), rep),
        None if start >= p2 => w.truncate(start),
        None => {}
    }
}

fn step_4(w: &mut Vec<u8>, p2: usize) {
    const TABLE: [(&str, ()); 18] = [
        ("ic", ()),
        ("ance", ()),
        ("ence", ()),
        ("able", ()),
        ("ible", ()),
        ("ate", ()),
        ("ive", ()),
        ("ize", ()),
        ("iti", ()),
        ("al", ()),
        ("ism", ()),
        ("ion", ()),
        ("er", ()),
        ("ous", ()),
        ("ant", ()),
        ("ent", ()),
        ("ment", ()),
        ("ement", ()),
    ];
    let Some(&(suffix, ())) = longest(w, &TABLE) else {
        return;
    };
    let start = w.len() - suffix.len();
    if start < p2 {
        return;
    }
    if suffix == "ion" && !(start > 0 && matches!(w[start - 1], b's' | b't')) {
        return;
    }
    w.truncate(start);
}

fn step_5(w: &mut Vec<u8>, p1: usize, p2: usize) {
    let n = w.len();
    if n == 0 {
        return;
    }
    let start = n - 1;
    match w[start] {
        b'e' => {
            if start >= p2 || (start >= p1 && !short_syllable_before(w, start)) {
                w.truncate(start);
            }
        }
        b'l' if start >= p2 && start > 0 && w[start - 1] == b'l' => w.truncate(start),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::stem;

    #[test]
    fn examples() {
        let cases = [
            ("running", "run"),
            ("a", "a"),
            ("dogs", "dog"),
            ("fast", "fast"),
            ("generously", "generous"),
            ("dying", "die"),
            ("inning", "inning"),
            ("succeeded", "succeed"),
            ("agreed", "agre"),
            ("cries", "cri"),
            ("ties", "tie"),
            ("gas", "gas"),
            ("kiwis", "kiwi"),
            ("hopping", "hop"),
            ("added", "add"),
            ("skies", "sky"),
            ("biologist", "biolog"),
            ("communism", "communism"),
            ("yelling", "yell"),
            ("sayings", "say"),
        ];
        for (w, s) in cases {
            assert_eq!(stem(w), s, "{w}");
        }
    }

    #[test]
    fn foreign_alphabet_passes_through() {
        assert_eq!(stem("дурак"), "дурак");
        assert_eq!(stem("café"), "café");
    }
}
