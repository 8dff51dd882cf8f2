//! Language-agnostic token segmentation.
//!
//! Whitespace separates tokens in most scripts. Han, kana, Thai, Lao, Khmer
//! and Myanmar text is written without word spacing, so every grapheme cluster
//! of those scripts counts as its own token.

use unicode_segmentation::UnicodeSegmentation;

use crate::corpus_io::LangCode;

fn is_unspaced(c: char) -> bool {
    matches!(c as u32,
        0x0E00..=0x0E7F     // Thai
        | 0x0E80..=0x0EFF   // Lao
        | 0x1000..=0x109F   // Myanmar
        | 0x1780..=0x17FF   // Khmer
        | 0x19E0..=0x19FF   // Khmer symbols
        | 0x3040..=0x309F   // Hiragana
        | 0x30A0..=0x30FF   // Katakana
        | 0x31F0..=0x31FF   // Katakana phonetic extensions
        | 0x3400..=0x4DBF   // CJK extension A
        | 0x4E00..=0x9FFF   // CJK unified ideographs
        | 0xA9E0..=0xA9FF   // Myanmar extended-B
        | 0xAA60..=0xAA7F   // Myanmar extended-A
        | 0xF900..=0xFAFF   // CJK compatibility ideographs
        | 0xFF66..=0xFF9F   // halfwidth katakana
        | 0x20000..=0x3134F // CJK extensions B..G
    )
}

/// Tokens of `text`: whitespace-delimited words, with unspaced-script
/// graphemes split out individually.
pub fn tokenize(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        let mut start: Option<usize> = None;
        for (i, g) in word.grapheme_indices(true) {
            let unspaced = g.chars().next().is_some_and(is_unspaced);
            if unspaced {
                if let Some(s) = start.take() {
                    out.push(&word[s..i]);
                }
                out.push(g);
            } else if start.is_none() {
                start = Some(i);
            }
        }
        if let Some(s) = start {
            out.push(&word[s..]);
        }
    }
    out
}

/// Token count used for length penalties. The language tag is accepted for
/// interface symmetry; segmentation is decided per character.
pub fn segment_tokens(text: &str, _lang: Option<&LangCode>) -> usize {
    tokenize(text).len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(segment_tokens("the cat sat", None), 3);
        assert_eq!(segment_tokens("", None), 0);
        assert_eq!(segment_tokens("hello 世界", None), 3);
        assert_eq!(tokenize("hello世界!"), vec!["hello", "世", "界", "!"]);
        assert_eq!(segment_tokens("สวัสดี", None), "สวัสดี".graphemes(true).count());
        assert_eq!(segment_tokens("  spaced\tout \n ", None), 2);
    }
}
