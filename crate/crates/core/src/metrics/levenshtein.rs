/// Edit distance over arbitrary token slices (unit-cost insert, delete and
/// substitute). Two-row dynamic program, `O(|a|·|b|)` time.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let substitute = prev[j] + usize::from(x != y);
            curr[j + 1] = substitute.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// Word-level distance: both texts are split on whitespace.
pub fn word_levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<&str> = a.split_whitespace().collect();
    let b: Vec<&str> = b.split_whitespace().collect();
    levenshtein(&a, &b)
}

/// One step of a minimal alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum AlignOp {
    Match,
    Substitute,
    Delete,
    Insert,
}

/// Minimal alignment from `a` to `b`. On ties the backtrace prefers the
/// diagonal, then deletion, then insertion.
pub(crate) fn align<T: PartialEq>(a: &[T], b: &[T]) -> Vec<AlignOp> {
    let (n, m) = (a.len(), b.len());
    let width = m + 1;
    let mut table = vec![0usize; (n + 1) * width];
    for j in 0..=m {
        table[j] = j;
    }
    for i in 1..=n {
        table[i * width] = i;
        for j in 1..=m {
            let diag = table[(i - 1) * width + j - 1] + usize::from(a[i - 1] != b[j - 1]);
            let up = table[(i - 1) * width + j] + 1;
            let left = table[i * width + j - 1] + 1;
            table[i * width + j] = diag.min(up).min(left);
        }
    }

    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = table[i * width + j];
        if i > 0 && j > 0 {
            let same = a[i - 1] == b[j - 1];
            if table[(i - 1) * width + j - 1] + usize::from(!same) == here {
                ops.push(if same { AlignOp::Match } else { AlignOp::Substitute });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && table[(i - 1) * width + j] + 1 == here {
            ops.push(AlignOp::Delete);
            i -= 1;
        } else {
            ops.push(AlignOp::Insert);
            j -= 1;
        }
    }
    ops.reverse();
    ops
}
