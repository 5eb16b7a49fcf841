#![allow(dead_code)]

use std::path::Path;

use symclust::synth::SynthProfile;

/// Four groups of household-like units over three variables. Group `g`
/// only uses categories `2g` and `2g + 1` of `a` and `b`, and category `g`
/// of `c`, so supports are disjoint between groups.
pub fn planted_profile(group_size: usize, weight_scheme: &str) -> SynthProfile {
    let mut text = format!(
        r#"
        weight_scheme = "{weight_scheme}"
        [[variables]]
        name = "a"
        categories = ["a0", "a1", "a2", "a3", "a4", "a5", "a6", "a7"]
        [[variables]]
        name = "b"
        categories = ["b0", "b1", "b2", "b3", "b4", "b5", "b6", "b7"]
        [[variables]]
        name = "c"
        categories = ["c0", "c1", "c2", "c3"]
        "#
    );
    for g in 0..4 {
        let mut a = vec![0.0; 8];
        a[2 * g] = 1.0 + g as f64;
        a[2 * g + 1] = 2.0;
        let mut b = vec![0.0; 8];
        b[2 * g] = 3.0;
        b[2 * g + 1] = 1.0;
        let mut c = vec![0.0; 4];
        c[g] = 1.0;
        text.push_str(&format!(
            "[[groups]]\nsize = {group_size}\nmembers = [1, 6]\n\
             templates = {{ a = {a:?}, b = {b:?}, c = {c:?} }}\n"
        ));
    }
    SynthProfile::parse(&text, Path::new("planted.toml")).unwrap()
}

/// True when the two labelings induce the same partition.
pub fn same_partition(a: &[usize], b: &[usize]) -> bool {
    use std::collections::HashMap;
    if a.len() != b.len() {
        return false;
    }
    let mut ab = HashMap::new();
    let mut ba = HashMap::new();
    a.iter()
        .zip(b)
        .all(|(x, y)| *ab.entry(x).or_insert(y) == y && *ba.entry(y).or_insert(x) == x)
}
