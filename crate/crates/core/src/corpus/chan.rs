use serde_json::Value;

use super::{clean_markup, RawMessage};
use crate::error::{Error, Result};

/// Parses a 4chan-style thread document (`{"posts": [...]}`).
///
/// Posts without a `com` body are image-only and are skipped. The thread id
/// is the number of the first post. `board` is left empty; callers fill it.
pub fn parse_chan_thread(document: &[u8]) -> Result<Vec<RawMessage>> {
    let value: Value =
        serde_json::from_slice(document).map_err(|e| Error::format(None, format!("invalid thread JSON: {e}")))?;
    let posts = value
        .get("posts")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::format(None, "thread document has no `posts` array"))?;

    let mut thread_id = None;
    let mut out = Vec::new();
    for (i, post) in posts.iter().enumerate() {
        let no = post
            .get("no")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::format(None, format!("post {i} has no integer `no`")))?;
        let thread = thread_id.get_or_insert_with(|| no.to_string()).clone();
        let timestamp = match post.get("time") {
            None | Some(Value::Null) => 0,
            Some(t) => t
                .as_i64()
                .ok_or_else(|| Error::format(None, format!("post {no} has a non-integer `time`")))?,
        };
        let Some(com) = post.get("com") else { continue };
        let com = com
            .as_str()
            .ok_or_else(|| Error::format(None, format!("post {no} has a non-string `com`")))?;
        out.push(RawMessage {
            id: no.to_string(),
            board: String::new(),
            thread_id: thread,
            timestamp,
            text: clean_markup(com),
            label: None,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_thread() {
        let msgs = parse_chan_thread(br#"{"posts":[{"no":5,"time":10,"com":"hi"}]}"#).unwrap();
        assert_eq!(msgs.len(), 1);
        assert_eq!(msgs[0].id, "5");
        assert_eq!(msgs[0].text, "hi");
        assert_eq!(msgs[0].thread_id, "5");
        assert_eq!(msgs[0].timestamp, 10);
    }

    #[test]
    fn image_only_post_skipped() {
        let msgs = parse_chan_thread(br#"{"posts":[{"no":5,"time":10}]}"#).unwrap();
        assert!(msgs.is_empty());
    }

    #[test]
    fn replies_share_the_op_thread_id() {
        let doc = br#"{"posts":[
            {"no":100,"time":1,"com":"op post","sub":"title"},
            {"no":101,"time":2},
            {"no":102,"time":3,"com":"&gt;&gt;100 <br>you idiot"}
        ]}"#;
        let msgs = parse_chan_thread(doc).unwrap();
        assert_eq!(msgs.len(), 2);
        assert_eq!(msgs[1].id, "102");
        assert_eq!(msgs[1].thread_id, "100");
        assert_eq!(msgs[1].text, "you idiot");
    }

    #[test]
    fn missing_posts_is_a_format_error() {
        assert!(matches!(parse_chan_thread(br#"{"threads":[]}"#), Err(Error::Format { .. })));
        assert!(matches!(parse_chan_thread(b"not json"), Err(Error::Format { .. })));
        assert!(matches!(
            parse_chan_thread(br#"{"posts":[{"time":1,"com":"x"}]}"#),
            Err(Error::Format { .. })
        ));
    }
}
