use leaning::textprep::porter_stem;

#[test]
fn matches_reference_vocabulary() {
    let data = include_str!("data/porter_reference.txt");
    let mut total = 0usize;
    let mut mismatches = Vec::new();
    for line in data.lines() {
        let mut parts = line.split_whitespace();
        let (Some(word), Some(stem)) = (parts.next(), parts.next()) else {
            continue;
        };
        total += 1;
        let got = porter_stem(word);
        if got != stem {
            mismatches.push((word.to_owned(), stem.to_owned(), got));
        }
    }
    assert!(total > 60_000);
    assert!(
        mismatches.is_empty(),
        "{} of {total} differ, first: {:?}",
        mismatches.len(),
        &mismatches[..mismatches.len().min(10)]
    );
}
