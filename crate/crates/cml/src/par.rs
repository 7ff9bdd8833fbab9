//! Batch evaluation that is data-parallel when the `parallel` feature is
//! compiled in. Campaigns, atom feasibility sweeps and family evaluations are
//! independent per item, so results are identical under either mode.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Runtime switch used by the batch entry points; `Parallel` degrades to
/// sequential execution when the feature is off.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    #[default]
    Parallel,
    Sequential,
}

pub fn map_range<U, F>(exec: Exec, n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec == Exec::Parallel {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = exec;
    (0..n).map(f).collect()
}

pub fn map_slice<'a, T, U, F>(exec: Exec, items: &'a [T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&'a T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec == Exec::Parallel {
            return items.par_iter().map(f).collect();
        }
    }
    let _ = exec;
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree() {
        let squares_par = map_range(Exec::Parallel, 100, |i| i * i);
        let squares_seq = map_range(Exec::Sequential, 100, |i| i * i);
        assert_eq!(squares_par, squares_seq);
        let v: Vec<usize> = (0..50).collect();
        assert_eq!(
            map_slice(Exec::Parallel, &v, |x| x + 1),
            map_slice(Exec::Sequential, &v, |x| x + 1)
        );
    }
}
