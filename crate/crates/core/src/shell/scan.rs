//! Top-level scanning: finds characters outside quotes and brackets.

/// Byte offsets and characters of `s` lying outside double quotes and
/// outside any `()` or `{}` nesting. Quote and bracket characters themselves
/// are reported only when they open or close at the top level.
pub(crate) fn top_level(s: &str) -> Vec<(usize, char)> {
    let mut out = Vec::new();
    let mut depth: i32 = 0;
    let mut in_quote = false;
    let mut escaped = false;
    for (i, c) in s.char_indices() {
        if in_quote {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_quote = false;
                if depth == 0 {
                    out.push((i, c));
                }
            }
            continue;
        }
        match c {
            '"' => {
                in_quote = true;
                if depth == 0 {
                    out.push((i, c));
                }
            }
            '(' | '{' => {
                if depth == 0 {
                    out.push((i, c));
                }
                depth += 1;
            }
            ')' | '}' => {
                depth -= 1;
                if depth == 0 {
                    out.push((i, c));
                }
            }
            _ if depth == 0 => out.push((i, c)),
            _ => {}
        }
    }
    out
}

pub(crate) fn first_top(s: &str, pred: impl Fn(char) -> bool) -> Option<usize> {
    top_level(s).into_iter().find(|&(_, c)| pred(c)).map(|(i, _)| i)
}

pub(crate) fn last_top(s: &str, pred: impl Fn(char) -> bool) -> Option<usize> {
    top_level(s).into_iter().rev().find(|&(_, c)| pred(c)).map(|(i, _)| i)
}

/// True when quotes and brackets close properly (brackets of one kind must
/// close with the same kind).
pub(crate) fn balanced(s: &str) -> bool {
    let mut stack = Vec::new();
    let mut in_quote = false;
    let mut escaped = false;
    for c in s.chars() {
        if in_quote {
            match (escaped, c) {
                (true, _) => escaped = false,
                (false, '\\') => escaped = true,
                (false, '"') => in_quote = false,
                _ => {}
            }
            continue;
        }
        match c {
            '"' => in_quote = true,
            '(' | '{' => stack.push(c),
            ')' if stack.pop() != Some('(') => return false,
            '}' if stack.pop() != Some('{') => return false,
            _ => {}
        }
    }
    stack.is_empty() && !in_quote
}

/// If `s` opens with `open` and the matching close is its last character,
/// the text between them.
pub(crate) fn wrapped(s: &str, open: char, close: char) -> Option<&str> {
    if !s.starts_with(open) || !s.ends_with(close) || s.len() < 2 || !balanced(s) {
        return None;
    }
    // The opening bracket must not close before the end.
    let tops = top_level(s);
    let closes_at = tops.iter().find(|&&(i, c)| i > 0 && c == close).map(|&(i, _)| i);
    (closes_at == Some(s.len() - close.len_utf8()) && tops.len() == 2).then(|| &s[open.len_utf8()..s.len() - close.len_utf8()])
}

/// Decodes a double-quoted string spanning all of `s`.
pub(crate) fn unquote(s: &str) -> Option<String> {
    let inner = s.strip_prefix('"')?.strip_suffix('"')?;
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.next()? {
                'n' => out.push('\n'),
                't' => out.push('\t'),
                other => out.push(other),
            },
            '"' => return None,
            c => out.push(c),
        }
    }
    Some(out)
}

/// Removes `#` comments outside quotes.
pub(crate) fn strip_comment(line: &str) -> &str {
    let mut in_quote = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        if in_quote {
            match (escaped, c) {
                (true, _) => escaped = false,
                (false, '\\') => escaped = true,
                (false, '"') => in_quote = false,
                _ => {}
            }
        } else if c == '"' {
            in_quote = true;
        } else if c == '#' {
            return &line[..i];
        }
    }
    line
}

/// Splits program text into logical lines: a trailing backslash joins a
/// line to the next, `#` starts a comment, and blank lines are dropped.
/// Each line is returned with its 1-based starting line number.
pub fn logical_lines(text: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut pending: Option<(usize, String)> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        let (start, mut acc) = pending.take().unwrap_or((n + 1, String::new()));
        if let Some(body) = line.strip_suffix('\\') {
            acc.push_str(body);
            pending = Some((start, acc));
            continue;
        }
        acc.push_str(line);
        if !acc.trim().is_empty() {
            out.push((start, acc.trim().to_owned()));
        }
    }
    if let Some((start, acc)) = pending {
        if !acc.trim().is_empty() {
            out.push((start, acc.trim().to_owned()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nesting_hides_inner_characters() {
        let tops: String = top_level("a (b c) {d:e} \"f g\"").into_iter().map(|(_, c)| c).collect();
        assert_eq!(tops, "a () {} \"\"");
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrapped("(a b)", '(', ')'), Some("a b"));
        assert_eq!(wrapped("(a)(b)", '(', ')'), None);
        assert_eq!(wrapped("{a:(b)}", '{', '}'), Some("a:(b)"));
        assert_eq!(wrapped("(a", '(', ')'), None);
    }

    #[test]
    fn quoting() {
        assert_eq!(unquote("\"a \\\"b\\\"\"").as_deref(), Some("a \"b\""));
        assert_eq!(unquote("\"a\"b\""), None);
        assert_eq!(unquote("plain"), None);
    }

    #[test]
    fn comments_and_continuation() {
        let lines = logical_lines("# header\nls \\\n  . # trailing\n\nshow d:\"a#b\"\n");
        assert_eq!(lines, vec![(2, "ls   .".to_owned()), (5, "show d:\"a#b\"".to_owned())]);
    }
}
