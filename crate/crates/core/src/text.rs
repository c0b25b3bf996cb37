//! Tokenization and longest-common-subsequence text similarity.
//!
//! Similarity is the LCS-based F1 over token sequences. With `L` the LCS
//! length, `P = L/|candidate|`, `R = L/|reference|`, the harmonic mean
//! `2PR/(P+R)` reduces algebraically to `2L/(|candidate| + |reference|)`;
//! the reduced form is used so threshold comparisons near a cutoff are exact
//! rational arithmetic in floating point (a ratio of two small integers).

/// Lowercases, splits on whitespace, and strips leading and trailing ASCII
/// punctuation from each token. Interior punctuation survives, so ARNs,
/// event names, IPs, and hyphenated words stay whole. Tokens that are all
/// punctuation vanish.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|raw| {
            let lowered = raw.to_lowercase();
            let trimmed = lowered.trim_matches(|c: char| c.is_ascii_punctuation());
            if trimmed.is_empty() {
                None
            } else {
                Some(trimmed.to_string())
            }
        })
        .collect()
}

/// Length of the longest common subsequence of two token slices.
///
/// Single-row dynamic program, O(|a|·|b|) time and O(|b|) space.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut row = vec![0usize; b.len() + 1];
    for item_a in a {
        let mut diag = 0; // row[j] from the previous iteration of the outer loop
        for (j, item_b) in b.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = if item_a == item_b {
                diag + 1
            } else {
                above.max(row[j])
            };
            diag = above;
        }
    }
    row[b.len()]
}

/// LCS-based F1 similarity between a reference and a candidate token
/// sequence. Symmetric in its arguments; 0.0 when either side is empty and
/// 1.0 exactly when the sequences are equal.
pub fn rouge_l(reference: &[String], candidate: &[String]) -> f64 {
    if reference.is_empty() || candidate.is_empty() {
        return 0.0;
    }
    let lcs = lcs_len(reference, candidate);
    (2 * lcs) as f64 / (reference.len() + candidate.len()) as f64
}

/// Convenience wrapper: tokenize both strings, then score.
pub fn rouge_l_text(reference: &str, candidate: &str) -> f64 {
    rouge_l(&tokenize(reference), &tokenize(candidate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn tokenize_strips_surrounding_punctuation_only() {
        assert_eq!(
            tokenize("Attacker assumed Role X."),
            toks(&["attacker", "assumed", "role", "x"])
        );
        assert_eq!(
            tokenize("ARN (arn:aws:iam::123456789012:role/Admin)!"),
            toks(&["arn", "arn:aws:iam::123456789012:role/admin"])
        );
        assert_eq!(
            tokenize("ip 203.0.113.9, port 4444"),
            toks(&["ip", "203.0.113.9", "port", "4444"])
        );
        assert_eq!(tokenize("  --- ... !!! "), Vec::<String>::new());
        assert_eq!(tokenize(""), Vec::<String>::new());
    }

    #[test]
    fn tokenize_is_idempotent_on_rejoined_output() {
        let first = tokenize("Repeated, failed sign-in; user 'alice.brooks'!");
        let second = tokenize(&first.join(" "));
        assert_eq!(first, second);
    }

    #[test]
    fn lcs_known_values() {
        assert_eq!(lcs_len(&toks(&["a", "b", "c", "d"]), &toks(&["a", "c", "d"])), 3);
        assert_eq!(lcs_len(&toks(&["a", "b"]), &toks(&["c", "d"])), 0);
        assert_eq!(lcs_len::<String>(&[], &toks(&["a"])), 0);
        // Classic interleaving: LCS("abcbdab", "bdcaba") = 4.
        let a: Vec<String> = "abcbdab".chars().map(String::from).collect();
        let b: Vec<String> = "bdcaba".chars().map(String::from).collect();
        assert_eq!(lcs_len(&a, &b), 4);
    }

    #[test]
    fn rouge_worked_example() {
        // L = 3, reference length 4, candidate length 3:
        // P = 1, R = 3/4, F1 = 2·(3/4)/(7/4) = 6/7.
        let score = rouge_l(&toks(&["a", "b", "c", "d"]), &toks(&["a", "c", "d"]));
        assert!((score - 6.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn rouge_identity_and_empty() {
        let s = toks(&["role", "was", "assumed"]);
        assert_eq!(rouge_l(&s, &s), 1.0);
        assert_eq!(rouge_l(&s, &[]), 0.0);
        assert_eq!(rouge_l(&[], &s), 0.0);
    }

    #[test]
    fn rouge_exact_at_a_threshold_boundary() {
        // 21 shared tokens, both sides 50 long: score = 42/100 = 0.42 exactly,
        // so a strict > 0.42 comparison must not match this pair.
        let reference: Vec<String> = (0..50).map(|i| format!("r{i}")).collect();
        let mut candidate: Vec<String> = (0..50).map(|i| format!("c{i}")).collect();
        for i in 0..21 {
            candidate[i * 2] = format!("r{i}");
        }
        let score = rouge_l(&reference, &candidate);
        assert_eq!(score, 0.42);
        assert!(!(score > 0.42));
    }

    proptest! {
        #[test]
        fn rouge_is_bounded_and_symmetric(
            a in proptest::collection::vec("[a-e]{1,3}", 0..24),
            b in proptest::collection::vec("[a-e]{1,3}", 0..24),
        ) {
            let score = rouge_l(&a, &b);
            prop_assert!((0.0..=1.0).contains(&score));
            prop_assert_eq!(score, rouge_l(&b, &a));
        }

        #[test]
        fn rouge_identity_is_one(a in proptest::collection::vec("[a-e]{1,3}", 1..24)) {
            prop_assert_eq!(rouge_l(&a, &a), 1.0);
        }

        #[test]
        fn tokenize_idempotence(s in "[ -~]{0,80}") {
            let first = tokenize(&s);
            let second = tokenize(&first.join(" "));
            prop_assert_eq!(first, second);
        }
    }
}
