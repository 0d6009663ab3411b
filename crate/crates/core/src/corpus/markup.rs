use std::borrow::Cow;
use std::sync::LazyLock;

use regex::{Captures, Regex};

static LINE_BREAK: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)<br\s*/?>").unwrap());
static TAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"<[A-Za-z/!?][^<>]*>").unwrap());
// an opening bracket that would still read as the start of a tag
static STRAY_TAG_OPEN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"<([A-Za-z/!?])").unwrap());
static ENTITY: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"&(gt|lt|amp|quot|#[0-9]{1,7});").unwrap());
static QUOTE_LINK: LazyLock<Regex> = LazyLock::new(|| Regex::new(r">>[0-9]+").unwrap());
static URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)https?://\S*").unwrap());

/// Strips imageboard markup from a post body.
///
/// One pass applies, in order: line breaks to spaces, removal of tag spans,
/// entity decoding (`&gt; &lt; &amp; &quot;` and decimal `&#NN;`), removal of
/// `>>123` quote-links, removal of `http(s)://` URLs and whitespace
/// collapsing. Passes repeat until the text stops changing, so the function
/// is idempotent even when decoding an entity exposes new markup
/// (`&lt;b&gt;` decodes to a tag that the next pass removes).
pub fn clean_markup(text: &str) -> String {
    let mut current = clean_pass(text);
    loop {
        let next = clean_pass(&current);
        if next == current {
            return current;
        }
        current = next;
    }
}

fn clean_pass(text: &str) -> String {
    let s = LINE_BREAK.replace_all(text, " ");
    let s = replace_cow(s, &TAG, "");
    let s = replace_cow(s, &STRAY_TAG_OPEN, " $1");
    let s = match ENTITY.replace_all(&s, decode_entity) {
        Cow::Borrowed(_) => s,
        Cow::Owned(o) => Cow::Owned(o),
    };
    let s = replace_cow(s, &QUOTE_LINK, "");
    let s = replace_cow(s, &URL, "");
    collapse_whitespace(&s)
}

fn replace_cow<'a>(s: Cow<'a, str>, re: &Regex, rep: &str) -> Cow<'a, str> {
    match re.replace_all(&s, rep) {
        Cow::Borrowed(_) => s,
        Cow::Owned(o) => Cow::Owned(o),
    }
}

fn decode_entity(caps: &Captures<'_>) -> String {
    let name = &caps[1];
    match name {
        "gt" => ">".to_owned(),
        "lt" => "<".to_owned(),
        "amp" => "&".to_owned(),
        "quot" => "\"".to_owned(),
        _ => name[1..]
            .parse::<u32>()
            .ok()
            .and_then(char::from_u32)
            .filter(|&c| c != '\0')
            .map(String::from)
            // unknown code points stay verbatim
            .unwrap_or_else(|| caps[0].to_owned()),
    }
}

fn collapse_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_break_becomes_space() {
        assert_eq!(clean_markup("a<br>b"), "a b");
        assert_eq!(clean_markup("a<br/>b"), "a b");
        assert_eq!(clean_markup("a<BR />b"), "a b");
    }

    #[test]
    fn empty_input() {
        assert_eq!(clean_markup(""), "");
    }

    #[test]
    fn quote_link_greentext_and_url() {
        let raw = "&gt;&gt;123 <span class=\"quote\">&gt;implying</span> see https://x.example now";
        assert_eq!(clean_markup(raw), ">implying see now");
    }

    #[test]
    fn thread_comment() {
        assert_eq!(clean_markup("&gt;&gt;123 <br>you idiot"), "you idiot");
    }

    #[test]
    fn entities() {
        assert_eq!(clean_markup("a &amp; b &quot;c&quot; &#39;d&#39;"), "a & b \"c\" 'd'");
        assert_eq!(clean_markup("&nbsp;x &copy;"), "&nbsp;x &copy;");
        assert_eq!(clean_markup("&#99999999;"), "&#99999999;");
        assert_eq!(clean_markup("&#0;"), "&#0;");
    }

    #[test]
    fn decoded_markup_is_removed_on_the_next_pass() {
        assert_eq!(clean_markup("&lt;b&gt;bold&lt;/b&gt;"), "bold");
        assert_eq!(clean_markup("x &gt;&gt;42 y"), "x y");
    }

    #[test]
    fn stray_tag_openers_are_neutralized() {
        assert_eq!(clean_markup("a<b and c"), "a b and c");
        assert_eq!(clean_markup("i <3 you"), "i <3 you");
    }

    #[test]
    fn lone_greentext_marker_is_kept() {
        assert_eq!(clean_markup(">be me"), ">be me");
    }

    #[test]
    fn whitespace_collapsed_and_trimmed() {
        assert_eq!(clean_markup("  a \t\n b  "), "a b");
    }
}
