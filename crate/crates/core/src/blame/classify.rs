// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineClass {
    Code,
    Blank,
    Comment,
}

struct CommentSyntax {
    line: &'static [&'static str],
    block: Option<(&'static str, &'static str)>,
}

const C_LIKE: CommentSyntax = CommentSyntax {
    line: &["//"],
    block: Some(("/*", "*/")),
};
const HASH: CommentSyntax = CommentSyntax {
    line: &["#"],
    block: None,
};
const INI: CommentSyntax = CommentSyntax {
    line: &["#", ";"],
    block: None,
};
const MARKUP: CommentSyntax = CommentSyntax {
    line: &[],
    block: Some(("<!--", "-->")),
};

fn syntax_for(path: &str) -> Option<&'static CommentSyntax> {
    let file = path.rsplit('/').next().unwrap_or(path);
    let ext = file.rsplit_once('.')?.1.to_ascii_lowercase();
    match ext.as_str() {
        "c" | "h" | "cpp" | "hpp" | "cc" | "rs" | "java" | "js" | "ts" => Some(&C_LIKE),
        "py" | "sh" | "toml" | "yml" => Some(&HASH),
        "ini" => Some(&INI),
        "html" | "xml" | "xhtml" => Some(&MARKUP),
        _ => None,
    }
}

/// Classifies one line in isolation: a block comment opened on this line
/// counts, one opened on an earlier line does not.
pub fn classify_line(text: &str, path: &str) -> LineClass {
    let mut in_block = false;
    scan_line(text, syntax_for(path), &mut in_block)
}

/// Classifies every line of a file, carrying block-comment state forward.
/// Nested block comments are not recognised.
pub fn classify_file(lines: &[String], path: &str) -> Vec<LineClass> {
    let syntax = syntax_for(path);
    let mut in_block = false;
    lines.iter().map(|l| scan_line(l, syntax, &mut in_block)).collect()
}

fn scan_line(text: &str, syntax: Option<&CommentSyntax>, in_block: &mut bool) -> LineClass {
    let blank = text.trim().is_empty();
    let Some(syntax) = syntax else {
        return if blank { LineClass::Blank } else { LineClass::Code };
    };
    let mut rest = text;
    let mut has_code = false;
    loop {
        if *in_block {
            let (_, close) = syntax.block.expect("in block without block syntax");
            match rest.find(close) {
                Some(i) => {
                    *in_block = false;
                    rest = &rest[i + close.len()..];
                }
                None => break,
            }
        }
        let trimmed = rest.trim_start();
        if trimmed.is_empty() {
            break;
        }
        if syntax.line.iter().any(|tok| trimmed.starts_with(tok)) {
            break;
        }
        if let Some((open, _)) = syntax.block {
            if let Some(after) = trimmed.strip_prefix(open) {
                *in_block = true;
                rest = after;
                continue;
            }
        }
        has_code = true;
        // Look for a comment opener later on the line to keep block state.
        let next_line_tok = syntax.line.iter().filter_map(|tok| trimmed.find(tok)).min();
        let next_block = syntax.block.and_then(|(open, _)| trimmed.find(open));
        match (next_line_tok, next_block) {
            (Some(l), Some(b)) if b < l => rest = &trimmed[b..],
            (_, Some(b)) if next_line_tok.is_none() => rest = &trimmed[b..],
            _ => break,
        }
    }
    if blank {
        LineClass::Blank
    } else if has_code {
        LineClass::Code
    } else {
        LineClass::Comment
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lines(src: &[&str]) -> Vec<String> {
        src.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn blank_for_any_path() {
        assert_eq!(classify_line("   ", "x.unknown"), LineClass::Blank);
        assert_eq!(classify_line("\t", "a.cpp"), LineClass::Blank);
        assert_eq!(classify_line("", "a.py"), LineClass::Blank);
    }

    #[test]
    fn line_comments_by_extension() {
        assert_eq!(classify_line("// retry later", "a.cpp"), LineClass::Comment);
        assert_eq!(classify_line("  # note", "run.sh"), LineClass::Comment);
        assert_eq!(classify_line("; note", "conf.ini"), LineClass::Comment);
        assert_eq!(classify_line("x = 1  # note", "a.py"), LineClass::Code);
        assert_eq!(classify_line("// looks like a comment", "notes.txt"), LineClass::Code);
    }

    #[test]
    fn preprocessor_directives_are_code() {
        assert_eq!(classify_line("#ifndef GUARD", "a.h"), LineClass::Code);
        assert_eq!(classify_line("#include <stdio.h>", "a.c"), LineClass::Code);
    }

    #[test]
    fn block_comments_span_lines() {
        let src = lines(&[
            "int a; /* start",
            "  still comment",
            "",
            "end */",
            "end */ int b;",
            "/* one */ /* two */",
            "<!-- no -->",
        ]);
        let classes = classify_file(&src, "m.c");
        assert_eq!(
            classes,
            vec![
                LineClass::Code,
                LineClass::Comment,
                LineClass::Blank,
                LineClass::Comment,
                LineClass::Code,
                LineClass::Comment,
                LineClass::Code,
            ]
        );
        let html = classify_file(&lines(&["<!-- a", "b -->", "<p>x</p>"]), "i.html");
        assert_eq!(html, vec![LineClass::Comment, LineClass::Comment, LineClass::Code]);
    }

    #[test]
    fn code_then_line_comment_does_not_open_block() {
        let classes = classify_file(&lines(&["x(); // a /* b", "y();"]), "a.js");
        assert_eq!(classes, vec![LineClass::Code, LineClass::Code]);
    }
}
