//! Script membership tests shared by the composition and language reports.

/// Han ideographs: the CJK Unified Ideographs blocks (base and extensions
/// A through H) plus the two compatibility-ideograph blocks.
pub fn is_han(c: char) -> bool {
    matches!(c,
        '\u{3400}'..='\u{4DBF}'
        | '\u{4E00}'..='\u{9FFF}'
        | '\u{F900}'..='\u{FAFF}'
        | '\u{20000}'..='\u{2A6DF}'
        | '\u{2A700}'..='\u{2EBEF}'
        | '\u{2EBF0}'..='\u{2EE5F}'
        | '\u{2F800}'..='\u{2FA1F}'
        | '\u{30000}'..='\u{3134F}'
        | '\u{31350}'..='\u{323AF}')
}
