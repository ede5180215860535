/// Advances `a` to its lexicographic successor. Returns `false`, leaving `a`
/// untouched, when it is already the last (descending) permutation.
pub fn next_permutation<T: Ord>(a: &mut [T]) -> bool {
    if a.len() < 2 {
        return false;
    }
    // largest k with a[k] < a[k + 1]
    let Some(k) = (0..a.len() - 1).rev().find(|&k| a[k] < a[k + 1]) else {
        return false;
    };
    // largest l > k with a[k] < a[l]
    let l = (k + 1..a.len()).rev().find(|&l| a[k] < a[l]).expect("a[k+1] qualifies");
    a.swap(k, l);
    a[k + 1..].reverse();
    true
}
