//! Reference implementations used only by tests. They are written from the
//! definitions, deliberately without sharing code or data structures with
//! the library.

/// Top-down recursive edit distance with a memo over suffix positions.
pub fn recursive_levenshtein(a: &[u8], b: &[u8]) -> usize {
    fn go(a: &[u8], b: &[u8], i: usize, j: usize, memo: &mut Vec<Vec<Option<usize>>>) -> usize {
        if let Some(v) = memo[i][j] {
            return v;
        }
        let v = if i == a.len() {
            b.len() - j
        } else if j == b.len() {
            a.len() - i
        } else if a[i] == b[j] {
            go(a, b, i + 1, j + 1, memo)
        } else {
            1 + go(a, b, i + 1, j, memo)
                .min(go(a, b, i, j + 1, memo))
                .min(go(a, b, i + 1, j + 1, memo))
        };
        memo[i][j] = Some(v);
        v
    }
    let mut memo = vec![vec![None; b.len() + 1]; a.len() + 1];
    go(a, b, 0, 0, &mut memo)
}

fn grams(tokens: &[&str], n: usize) -> Vec<String> {
    if tokens.len() < n {
        return Vec::new();
    }
    (0..=tokens.len() - n).map(|i| tokens[i..i + n].join(" ")).collect()
}

fn count(list: &[String], g: &str) -> usize {
    list.iter().filter(|x| x.as_str() == g).count()
}

fn distinct(list: &[String]) -> Vec<String> {
    let mut v = list.to_vec();
    v.sort();
    v.dedup();
    v
}

fn div(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// SARI by direct enumeration of n-gram lists.
pub fn sari_oracle(source: &str, output: &str, references: &[&str]) -> f64 {
    let s: Vec<&str> = source.split_whitespace().collect();
    let c: Vec<&str> = output.split_whitespace().collect();
    let refs: Vec<Vec<&str>> = references.iter().map(|r| r.split_whitespace().collect()).collect();
    let r = refs.len();
    let (mut keep_total, mut del_total, mut add_total) = (0.0, 0.0, 0.0);
    for n in 1..=4 {
        let sg = grams(&s, n);
        let cg = grams(&c, n);
        let rg: Vec<String> = refs.iter().flat_map(|x| grams(x, n)).collect();
        let universe = distinct(&[sg.clone(), cg.clone(), rg.clone()].concat());

        // keep
        let (mut p_sum, mut r_sum, mut kept_distinct, mut all_distinct) = (0.0, 0.0, 0usize, 0usize);
        for g in &universe {
            let sr = count(&sg, g) * r;
            let cr = count(&cg, g) * r;
            let rc = count(&rg, g);
            let kept = sr.min(cr);
            let good = kept.min(rc);
            let all = sr.min(rc);
            if kept > 0 {
                kept_distinct += 1;
                p_sum += good as f64 / kept as f64;
            }
            if all > 0 {
                all_distinct += 1;
                r_sum += good as f64 / all as f64;
            }
        }
        keep_total += f1(div(p_sum, kept_distinct as f64), div(r_sum, all_distinct as f64));

        // delete
        let (mut d_sum, mut deleted_distinct) = (0.0, 0usize);
        for g in &universe {
            let deleted = (count(&sg, g) * r).saturating_sub(count(&cg, g) * r);
            if deleted > 0 {
                deleted_distinct += 1;
                let good = deleted.saturating_sub(count(&rg, g));
                d_sum += good as f64 / deleted as f64;
            }
        }
        del_total += div(d_sum, deleted_distinct as f64);

        // add
        let (mut added, mut added_good, mut addable) = (0usize, 0usize, 0usize);
        for g in &universe {
            let in_s = count(&sg, g) > 0;
            let in_c = count(&cg, g) > 0;
            let in_r = count(&rg, g) > 0;
            if in_c && !in_s {
                added += 1;
                if in_r {
                    added_good += 1;
                }
            }
            if in_r && !in_s {
                addable += 1;
            }
        }
        add_total += f1(
            div(added_good as f64, added as f64),
            div(added_good as f64, addable as f64),
        );
    }
    100.0 * (keep_total / 4.0 + del_total / 4.0 + add_total / 4.0) / 3.0
}

/// Hand-built SARI cases with their oracle values, frozen. Each is a single
/// add, keep or delete difference (or a mix of them) over one to three
/// references.
pub const SARI_CASES: [(&str, &str, &[&str], f64); 5] = [
    // unigram/bigram: keep 1, delete 1, add 1; trigram: keep 0, delete 1, add 1
    ("a b c", "a b d", &["a b d"], 66.66666666666667),
    // delete-only: keep .5, delete .75, add 0
    ("a b c", "a b", &["a b"], 41.666666666666664),
    ("a b", "a b c", &["a b c", "a b"], 41.666666666666664),
    ("x y z", "x z", &["x y", "x z"], 32.96568627450981),
    (
        "the cat sat",
        "the cat",
        &["the dog sat", "the cat sat", "cat sat"],
        17.222222222222218,
    ),
];

/// Output, source and reference all equal: keep is 1 for orders 1-3 and 0
/// for the empty 4-gram order, delete and add have empty denominators.
pub const SARI_DEGENERATE: (&str, &str, &[&str], f64) = ("a b c", "a b c", &["a b c"], 25.0);
