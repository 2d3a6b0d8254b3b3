// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no fenced python block in the response")]
pub struct FormatError;

fn fence_tag(line: &str) -> Option<&str> {
    line.trim().strip_prefix("```").map(str::trim)
}

/// Contents of the last complete ```python block.
pub fn extract_spec_block(text: &str) -> Result<String, FormatError> {
    let mut last = None;
    let mut open: Option<(bool, Vec<&str>)> = None;
    for line in text.lines() {
        match (&mut open, fence_tag(line)) {
            (None, Some(tag)) => open = Some((tag == "python", vec![])),
            (Some(_), Some("")) => {
                let (is_py, body) = open.take().unwrap();
                if is_py {
                    last = Some(body);
                }
            }
            (Some((_, body)), _) => body.push(line),
            (None, None) => {}
        }
    }
    last.map(|body| {
        let mut s = body.join("\n");
        s.push('\n');
        s
    })
    .ok_or(FormatError)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_block() {
        assert_eq!(extract_spec_block("reasoning...\n```python\nDEF_TEXT\n```").unwrap(), "DEF_TEXT\n");
    }

    #[test]
    fn last_block_wins() {
        let t = "draft:\n```python\nfirst\n```\nfinal:\n```python\nsecond\nline\n```\ndone";
        assert_eq!(extract_spec_block(t).unwrap(), "second\nline\n");
    }

    #[test]
    fn other_languages_ignored() {
        let t = "```python\nkeep\n```\n```c\nint x;\n```\n";
        assert_eq!(extract_spec_block(t).unwrap(), "keep\n");
    }

    #[test]
    fn prose_and_unterminated() {
        assert_eq!(extract_spec_block("I think the spec is cond = True."), Err(FormatError));
        assert_eq!(extract_spec_block("```python\ndef f(old):\n"), Err(FormatError));
        assert_eq!(extract_spec_block("```\nuntagged\n```"), Err(FormatError));
    }
}
