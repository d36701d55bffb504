//! Tuple enumeration helpers.
//!
//! Tuples over `0..n` are enumerated in lexicographic order. Injective
//! enumeration skips tuples with a repeated coordinate.

/// Calls `visit` on every tuple of length `len` over `0..n` in lexicographic
/// order. `visit` returns `false` to stop early; the function then returns
/// `false` as well.
pub fn for_each_tuple(n: usize, len: usize, mut visit: impl FnMut(&[usize]) -> bool) -> bool {
    if len == 0 {
        return visit(&[]);
    }
    if n == 0 {
        return true;
    }
    let mut t = vec![0usize; len];
    loop {
        if !visit(&t) {
            return false;
        }
        let mut i = len;
        loop {
            if i == 0 {
                return true;
            }
            i -= 1;
            t[i] += 1;
            if t[i] < n {
                break;
            }
            t[i] = 0;
        }
    }
}

/// Like [`for_each_tuple`] but only visits tuples of pairwise distinct
/// coordinates.
pub fn for_each_injective_tuple(
    n: usize,
    len: usize,
    mut visit: impl FnMut(&[usize]) -> bool,
) -> bool {
    fn rec(
        n: usize,
        len: usize,
        t: &mut Vec<usize>,
        used: &mut [bool],
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if t.len() == len {
            return visit(t);
        }
        for x in 0..n {
            if used[x] {
                continue;
            }
            used[x] = true;
            t.push(x);
            let go_on = rec(n, len, t, used, visit);
            t.pop();
            used[x] = false;
            if !go_on {
                return false;
            }
        }
        true
    }
    if len > n {
        return true;
    }
    let mut used = vec![false; n];
    rec(n, len, &mut Vec::with_capacity(len), &mut used, &mut visit)
}

/// All injective tuples of length `len` over `0..n`, materialized.
pub fn injective_tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for_each_injective_tuple(n, len, |t| {
        out.push(t.to_vec());
        true
    });
    out
}

/// Number of injective tuples of length `len` over `0..n` (falling factorial),
/// saturating on overflow.
pub fn falling_factorial(n: usize, len: usize) -> usize {
    if len > n {
        return 0;
    }
    (0..len).fold(1usize, |acc, i| acc.saturating_mul(n - i))
}

/// Tuples over `0..n` of length `len` with at least one coordinate `>= from`,
/// in lexicographic order.
pub(crate) fn for_each_tuple_touching(
    n: usize,
    len: usize,
    from: usize,
    visit: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    fn rec(
        n: usize,
        len: usize,
        from: usize,
        touched: bool,
        t: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if t.len() == len {
            return visit(t);
        }
        let last = t.len() + 1 == len;
        let start = if last && !touched { from } else { 0 };
        for x in start..n {
            t.push(x);
            let go_on = rec(n, len, from, touched || x >= from, t, visit);
            t.pop();
            if !go_on {
                return false;
            }
        }
        true
    }
    if len == 0 {
        return if from == 0 { visit(&[]) } else { true };
    }
    rec(n, len, from, false, &mut Vec::with_capacity(len), visit)
}

/// k-element subsets of `0..n` as increasing vectors, in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..n {
            if n - x < k - cur.len() {
                break;
            }
            cur.push(x);
            rec(n, k, x + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(n, k, 0, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    injective_tuples(n, n)
}
