//! Deterministic data-parallel helpers: work is split over output slots, so
//! results are byte-identical for every thread count.

/// Worker count: the `HANKELOPS_THREADS` environment variable when set to a
/// positive integer, otherwise the machine's available parallelism.
pub fn thread_count() -> usize {
    if let Ok(s) = std::env::var("HANKELOPS_THREADS") {
        if let Ok(n) = s.parse::<usize>() {
            if n >= 1 {
                return n;
            }
        }
    }
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

/// Fill `out[i] = f(i)` for all i, splitting contiguous chunks across
/// threads. `f` must be pure; the output does not depend on the thread count.
pub fn parallel_fill<T: Send, F: Fn(usize) -> T + Sync>(out: &mut [T], f: F) {
    let n = out.len();
    if n == 0 {
        return;
    }
    let nt = thread_count().min(n);
    if nt <= 1 {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = f(i);
        }
        return;
    }
    let chunk = n.div_ceil(nt);
    std::thread::scope(|scope| {
        for (ci, slab) in out.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                for (j, slot) in slab.iter_mut().enumerate() {
                    *slot = f(ci * chunk + j);
                }
            });
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fills_every_slot() {
        let mut v = vec![0usize; 1003];
        parallel_fill(&mut v, |i| i * i);
        for (i, &x) in v.iter().enumerate() {
            assert_eq!(x, i * i);
        }
    }

    #[test]
    fn thread_count_positive() {
        assert!(thread_count() >= 1);
    }
}
