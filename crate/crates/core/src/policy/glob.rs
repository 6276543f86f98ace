//! `*`-only glob matching shared by resource patterns and `StringLike`.

/// Returns true when `text` is in the language of `pattern`, where `*` matches
/// any run of characters (including the empty run, `:` and `/`) and every
/// other character matches only itself.
pub fn glob_match(pattern: &str, text: &str) -> bool {
    let p = pattern.as_bytes();
    let t = text.as_bytes();
    let (mut pi, mut ti) = (0usize, 0usize);
    // Position of the last `*` seen and the text index it was tried against.
    let mut backtrack: Option<(usize, usize)> = None;

    while ti < t.len() {
        if pi < p.len() && p[pi] == b'*' {
            backtrack = Some((pi, ti));
            pi += 1;
        } else if pi < p.len() && p[pi] == t[ti] {
            pi += 1;
            ti += 1;
        } else if let Some((star, from)) = backtrack {
            pi = star + 1;
            ti = from + 1;
            backtrack = Some((star, from + 1));
        } else {
            return false;
        }
    }
    p[pi..].iter().all(|&c| c == b'*')
}

#[cfg(test)]
mod tests {
    use super::glob_match;

    #[test]
    fn literal_matches_only_itself() {
        assert!(glob_match("abc", "abc"));
        assert!(!glob_match("abc", "abcd"));
        assert!(!glob_match("abc", "ab"));
        assert!(!glob_match("abc", "ABC"));
    }

    #[test]
    fn star_spans_separators() {
        assert!(glob_match("*", ""));
        assert!(glob_match("*", "arn:aws:s3:::x/y"));
        assert!(glob_match("arn:aws:s3:::assets/*", "arn:aws:s3:::assets/img/logo.png"));
        assert!(glob_match("arn:*:s3:::*/logo.png", "arn:aws:s3:::assets/img/logo.png"));
        assert!(!glob_match("arn:aws:s3:::assets/*", "arn:aws:s3:::asset/img"));
    }

    #[test]
    fn multiple_stars_backtrack() {
        assert!(glob_match("a*b*c", "aXbYbZc"));
        assert!(glob_match("**", "x"));
        assert!(!glob_match("a*b*c", "aXbYbZ"));
        assert!(glob_match("*a", "aaa"));
    }

    #[test]
    fn multibyte_text() {
        assert!(glob_match("tëam/*", "tëam/röd"));
        assert!(!glob_match("tëam/*", "team/röd"));
    }
}
