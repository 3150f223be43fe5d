use super::FmeError;
use crate::geometry::Point;
use crate::scores::is_cech;
use std::sync::Arc;

type Kernel = Arc<dyn Fn(&[Point<f64>]) -> f64 + Send + Sync>;

/// U-statistic of order k: F(μ) = Σ_{S⊆μ, |S|=k} h(S) for a symmetric
/// kernel h, with point score ξ(x, μ) = Σ_{S⊆μ\x, |S|=k−1} h(x ∪ S).
#[derive(Clone)]
pub struct UStatistic {
    order: usize,
    /// h vanishes unless every point of S lies within `reach` of every other.
    reach: f64,
    kernel: Kernel,
}

impl std::fmt::Debug for UStatistic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("UStatistic")
            .field("order", &self.order)
            .field("reach", &self.reach)
            .finish()
    }
}

/// Calls f on every m-subset of 0..n in lexicographic order.
fn for_each_subset(n: usize, m: usize, f: &mut impl FnMut(&[usize])) {
    if m > n {
        return;
    }
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        f(&idx);
        let mut i = m;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < n - m + i {
                idx[i] += 1;
                for j in i + 1..m {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

impl UStatistic {
    pub fn new<F>(order: usize, reach: f64, kernel: F) -> Result<Self, FmeError>
    where
        F: Fn(&[Point<f64>]) -> f64 + Send + Sync + 'static,
    {
        if order == 0 || !(reach >= 0.0) {
            return Err(FmeError::InvalidParameter(format!(
                "order {order}, reach {reach}"
            )));
        }
        Ok(UStatistic {
            order,
            reach,
            kernel: Arc::new(kernel),
        })
    }

    /// Half the length of each edge shorter than r: ξ is the edge-length score.
    pub fn edge_length(r: f64) -> Self {
        UStatistic {
            order: 2,
            reach: r,
            kernel: Arc::new(move |s: &[Point<f64>]| {
                let d = s[0].dist(&s[1]);
                if d <= r {
                    d / 2.0
                } else {
                    0.0
                }
            }),
        }
    }

    /// Indicator of a Čech k-clique at radius r; integer valued, so sums and
    /// differences of small configurations are exact.
    pub fn cech_indicator(k: usize, r: f64) -> Self {
        UStatistic {
            order: k,
            reach: 2.0 * r,
            kernel: Arc::new(move |s: &[Point<f64>]| if is_cech(s, r) { 1.0 } else { 0.0 }),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn reach(&self) -> f64 {
        self.reach
    }

    pub fn kernel(&self, s: &[Point<f64>]) -> f64 {
        (self.kernel)(s)
    }

    pub fn total(&self, mu: &[Point<f64>]) -> f64 {
        let mut acc = 0.0;
        let mut buf = Vec::with_capacity(self.order);
        for_each_subset(mu.len(), self.order, &mut |ids| {
            buf.clear();
            buf.extend(ids.iter().map(|&i| mu[i]));
            acc += (self.kernel)(&buf);
        });
        acc
    }

    /// ξ(x, μ); points of μ equal to x are skipped.
    pub fn score(&self, x: &Point<f64>, mu: &[Point<f64>]) -> f64 {
        let others: Vec<Point<f64>> = mu.iter().filter(|p| *p != x).copied().collect();
        let mut acc = 0.0;
        let mut buf = Vec::with_capacity(self.order);
        for_each_subset(others.len(), self.order - 1, &mut |ids| {
            buf.clear();
            buf.push(*x);
            buf.extend(ids.iter().map(|&i| others[i]));
            acc += (self.kernel)(&buf);
        });
        acc
    }
}

/// F·G written as Σ_m H_m with H_m a U-statistic of order m ∈ [max(k,l), k+l]:
/// h_m(U) = Σ f(S)g(T) over S, T ⊆ U with |S| = k, |T| = l, S ∪ T = U.
pub fn product_expansion(f: &UStatistic, g: &UStatistic) -> Vec<UStatistic> {
    let (k, l) = (f.order, g.order);
    (k.max(l)..=k + l)
        .map(|m| {
            // a nonzero term needs an S–T chain, so the reach adds up
            let reach = f.reach + g.reach;
            let (f, g) = (f.clone(), g.clone());
            let kernel = move |u: &[Point<f64>]| {
                let mut acc = 0.0;
                let mut s = Vec::with_capacity(k);
                let mut t = Vec::with_capacity(l);
                for_each_subset(m, k, &mut |si| {
                    let smask = si.iter().fold(0u64, |a, &i| a | 1 << i);
                    s.clear();
                    s.extend(si.iter().map(|&i| u[i]));
                    let fs = f.kernel(&s);
                    if fs == 0.0 {
                        return;
                    }
                    for_each_subset(m, l, &mut |ti| {
                        let tmask = ti.iter().fold(0u64, |a, &i| a | 1 << i);
                        if (smask | tmask).count_ones() as usize == m {
                            t.clear();
                            t.extend(ti.iter().map(|&i| u[i]));
                            acc += fs * g.kernel(&t);
                        }
                    });
                });
                acc
            };
            UStatistic {
                order: m,
                reach,
                kernel: Arc::new(kernel),
            }
        })
        .collect()
}
