/// Adjacent n-grams of every requested order, joined with `_`.
///
/// Orders of zero are ignored. The output is a multiset: repeated n-grams
/// appear once per occurrence. Callers keep tweet boundaries by calling this
/// once per tweet.
pub fn build_ngrams<S: AsRef<str>>(stems: &[S], orders: &[usize]) -> Vec<String> {
    let mut out = Vec::new();
    for &n in orders {
        if n == 0 || n > stems.len() {
            continue;
        }
        for window in stems.windows(n) {
            let mut gram = String::from(window[0].as_ref());
            for s in &window[1..] {
                gram.push('_');
                gram.push_str(s.as_ref());
            }
            out.push(gram);
        }
    }
    out
}
