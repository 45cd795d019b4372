//! Partitions of a series into contiguous groups: fixed-size blocks, ANOVA
//! merges, variance change-point detection and the validation-driven
//! boundary adjustment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{mean, one_way_anova};

pub const DEFAULT_GROUP_SIZE: usize = 8;
pub const DEFAULT_MIN_SEGMENT_LEN: usize = 7;
pub const DEFAULT_K_MAX: usize = 10;
/// Threshold on the second difference of the normalised contrast.
pub const SLOPE_THRESHOLD: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentationSource {
    Fixed,
    AnovaMerged,
    ChangePoint,
}

/// Ordered, contiguous, exhaustive partition into 1-based inclusive ranges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segmentation {
    groups: Vec<(usize, usize)>,
    source: SegmentationSource,
}

impl Segmentation {
    pub fn new(groups: Vec<(usize, usize)>, source: SegmentationSource) -> Result<Self> {
        if groups.is_empty() || groups[0].0 != 1 {
            return Err(Error::InvalidInput("segmentation must start at index 1".into()));
        }
        for (i, &(s, e)) in groups.iter().enumerate() {
            if e < s {
                return Err(Error::InvalidInput(format!("empty group {s}-{e}")));
            }
            if i > 0 && s != groups[i - 1].1 + 1 {
                return Err(Error::InvalidInput(format!(
                    "group {s}-{e} does not follow {}-{}",
                    groups[i - 1].0,
                    groups[i - 1].1
                )));
            }
        }
        Ok(Segmentation { groups, source })
    }

    /// Consecutive blocks of `m`; the last block absorbs the remainder.
    pub fn fixed(n: usize, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidInput(format!("group size {m} must be >= 2")));
        }
        if m > n {
            return Err(Error::InvalidInput(format!(
                "group size {m} exceeds series length {n}"
            )));
        }
        let full = n / m;
        let mut groups: Vec<(usize, usize)> = (0..full).map(|j| (j * m + 1, (j + 1) * m)).collect();
        if let Some(last) = groups.last_mut() {
            last.1 = n;
        }
        Segmentation::new(groups, SegmentationSource::Fixed)
    }

    /// Segments ending at each change point, the last ending at `n`.
    pub fn from_change_points(n: usize, points: &[usize]) -> Result<Self> {
        let mut groups = Vec::with_capacity(points.len() + 1);
        let mut start = 1;
        for &p in points {
            groups.push((start, p));
            start = p + 1;
        }
        groups.push((start, n));
        Segmentation::new(groups, SegmentationSource::ChangePoint)
    }

    pub fn groups(&self) -> &[(usize, usize)] {
        &self.groups
    }

    pub fn source(&self) -> SegmentationSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn series_len(&self) -> usize {
        self.groups.last().map_or(0, |g| g.1)
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(|(s, e)| e - s + 1).collect()
    }

    /// Last index of every group but the final one.
    pub fn change_points(&self) -> Vec<usize> {
        self.groups[..self.groups.len() - 1].iter().map(|g| g.1).collect()
    }

    pub fn covers(&self, n: usize) -> bool {
        self.series_len() == n
    }

    pub fn min_group_len(&self) -> usize {
        self.sizes().into_iter().min().unwrap_or(0)
    }

    /// Merges runs of adjacent groups. Each request `(a, b)` names the
    /// 1-based group indices `a..=b` to fuse into one group.
    pub fn merge_groups(&self, merges: &[(usize, usize)]) -> Result<Self> {
        if merges.is_empty() {
            return Ok(self.clone());
        }
        let mut requests = merges.to_vec();
        requests.sort_unstable();
        for &(a, b) in &requests {
            if a == 0 || b > self.groups.len() || a > b {
                return Err(Error::NonAdjacentMerge(format!(
                    "groups {a}..{b} outside 1..{}",
                    self.groups.len()
                )));
            }
        }
        for w in requests.windows(2) {
            if w[1].0 <= w[0].1 {
                return Err(Error::NonAdjacentMerge(format!(
                    "overlapping requests {:?} and {:?}",
                    w[0], w[1]
                )));
            }
        }
        let mut out = Vec::new();
        let mut j = 1;
        let mut req = requests.into_iter().peekable();
        while j <= self.groups.len() {
            match req.peek() {
                Some(&(a, b)) if a == j => {
                    out.push((self.groups[a - 1].0, self.groups[b - 1].1));
                    j = b + 1;
                    req.next();
                }
                _ => {
                    out.push(self.groups[j - 1]);
                    j += 1;
                }
            }
        }
        Segmentation::new(out, SegmentationSource::AnovaMerged)
    }

    /// Merges a non-contiguous selection of groups, e.g. `[1, 3]`; only
    /// accepted when the listed groups are consecutive.
    pub fn merge_listed(&self, listed: &[usize]) -> Result<Self> {
        if listed.is_empty() {
            return Ok(self.clone());
        }
        let mut sorted = listed.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(Error::NonAdjacentMerge(format!("groups {listed:?} are not adjacent")));
        }
        self.merge_groups(&[(sorted[0], *sorted.last().unwrap())])
    }

    /// Greedily fuses neighbouring groups whose two-group ANOVA p-value exceeds `alpha`.
    pub fn auto_merge(&self, values: &[f64], alpha: f64) -> Result<Self> {
        if !self.covers(values.len()) {
            return Err(Error::InvalidInput("segmentation does not cover series".into()));
        }
        let mut out: Vec<(usize, usize)> = Vec::new();
        let mut current = self.groups[0];
        for &next in &self.groups[1..] {
            let a = &values[current.0 - 1..current.1];
            let b = &values[next.0 - 1..next.1];
            let same = match one_way_anova(&[a, b]) {
                Ok(t) => t.p_value > alpha,
                // both groups constant: merge only when they share a level
                Err(_) => (mean(a) - mean(b)).abs() <= f64::EPSILON * mean(a).abs().max(1.0),
            };
            if same {
                current.1 = next.1;
            } else {
                out.push(current);
                current = next;
            }
        }
        out.push(current);
        Segmentation::new(out, SegmentationSource::AnovaMerged)
    }
}

/// Detected variance change points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangePointSet {
    /// Last index (1-based) of every segment except the final one.
    pub points: Vec<usize>,
    /// Threshold applied to the normalised contrast curvature.
    pub penalty_used: f64,
    /// Optimal contrast for 1..=k_max segments.
    pub contrasts: Vec<f64>,
}

/// Gaussian contrast `len · ln σ̂²` of a segment, from centred prefix sums.
struct SegmentCost {
    s1: Vec<f64>,
    s2: Vec<f64>,
    floor: f64,
}

impl SegmentCost {
    fn new(x: &[f64]) -> Self {
        let m = mean(x);
        let mut s1 = vec![0.0; x.len() + 1];
        let mut s2 = vec![0.0; x.len() + 1];
        for (i, v) in x.iter().enumerate() {
            let c = v - m;
            s1[i + 1] = s1[i] + c;
            s2[i + 1] = s2[i] + c * c;
        }
        let total_var = s2[x.len()] / x.len() as f64;
        SegmentCost {
            s1,
            s2,
            floor: (total_var * 1e-12).max(1e-300),
        }
    }

    /// Cost of the half-open range `[i, j)`.
    fn cost(&self, i: usize, j: usize) -> f64 {
        let len = (j - i) as f64;
        let s = self.s1[j] - self.s1[i];
        let q = self.s2[j] - self.s2[i];
        let var = ((q - s * s / len) / len).max(self.floor);
        len * var.ln()
    }
}

/// Exact optimal segmentations for 1..=k_max segments; returns the contrast
/// per segment count and the change points of each optimum.
#[allow(clippy::needless_range_loop)]
fn optimal_segmentations(x: &[f64], k_max: usize, min_len: usize) -> (Vec<f64>, Vec<Vec<usize>>) {
    let n = x.len();
    let cost = SegmentCost::new(x);
    let inf = f64::INFINITY;
    // best[k][j]: minimal contrast of x[0..j) split into k+1 segments
    let mut best = vec![vec![inf; n + 1]; k_max];
    let mut arg = vec![vec![0usize; n + 1]; k_max];
    for j in min_len..=n {
        best[0][j] = cost.cost(0, j);
    }
    for k in 1..k_max {
        let lo = (k + 1) * min_len;
        for j in lo..=n {
            let mut b = inf;
            let mut a = 0;
            for i in (k * min_len)..=(j - min_len) {
                let prev = best[k - 1][i];
                if !prev.is_finite() {
                    continue;
                }
                let c = prev + cost.cost(i, j);
                if c < b {
                    b = c;
                    a = i;
                }
            }
            best[k][j] = b;
            arg[k][j] = a;
        }
    }
    let mut contrasts = Vec::with_capacity(k_max);
    let mut points = Vec::with_capacity(k_max);
    for k in 0..k_max {
        contrasts.push(best[k][n]);
        let mut cps = Vec::with_capacity(k);
        let mut j = n;
        for kk in (1..=k).rev() {
            let i = arg[kk][j];
            cps.push(i);
            j = i;
        }
        cps.reverse();
        points.push(cps);
    }
    (contrasts, points)
}

/// Segment count minimising the contrast plus three parameters' worth of
/// BIC penalty per extra segment.
fn bic_segment_count(contrasts: &[f64], n: usize) -> usize {
    let pen = 3.0 * (n as f64).ln();
    (0..contrasts.len())
        .min_by(|&a, &b| (contrasts[a] + pen * a as f64).total_cmp(&(contrasts[b] + pen * b as f64)))
        .map_or(1, |k| k + 1)
}

/// Chooses the segment count from the optimal contrasts.
///
/// With at least three candidate counts the contrast curve is rescaled to
/// run from `k_max` down to 1 and the largest count whose second
/// difference exceeds [`SLOPE_THRESHOLD`] wins, capped by the BIC count.
/// The rescaling alone inflates noise curvature on homogeneous series.
/// With only two candidates the BIC count decides.
fn select_segment_count(contrasts: &[f64], n: usize) -> usize {
    let k_max = contrasts.len();
    if k_max == 1 {
        return 1;
    }
    let bic = bic_segment_count(contrasts, n);
    if k_max == 2 {
        return bic;
    }
    let first = contrasts[0];
    let last = contrasts[k_max - 1];
    if !(first - last > 0.0) {
        return 1;
    }
    let scaled: Vec<f64> = contrasts
        .iter()
        .map(|j| (last - j) / (last - first) * (k_max - 1) as f64 + 1.0)
        .collect();
    let mut chosen = 1;
    for k in 2..k_max {
        let d = scaled[k - 2] - 2.0 * scaled[k - 1] + scaled[k];
        if d > SLOPE_THRESHOLD {
            chosen = k;
        }
    }
    chosen.min(bic)
}

/// Penalised least-squares detection of changes in variance.
pub fn detect_change_points(values: &[f64], k_max: usize, min_len: usize) -> Result<ChangePointSet> {
    let n = values.len();
    if min_len == 0 {
        return Err(Error::InvalidInput("minimum segment length must be >= 1".into()));
    }
    if n < 2 * min_len {
        return Err(Error::TooShort {
            needed: 2 * min_len,
            got: n,
        });
    }
    if k_max == 0 || k_max > n / min_len {
        return Err(Error::InvalidInput(format!(
            "k_max {k_max} outside 1..={}",
            n / min_len
        )));
    }
    let (contrasts, points) = optimal_segmentations(values, k_max, min_len);
    let usable = contrasts.iter().take_while(|c| c.is_finite()).count();
    let k = select_segment_count(&contrasts[..usable], n);
    Ok(ChangePointSet {
        points: points[k - 1].clone(),
        penalty_used: SLOPE_THRESHOLD,
        contrasts,
    })
}

/// Rescales detected change points so that every group ending at a
/// detected point passes `validate`.
///
/// Segments are processed left to right. A failing group has its right
/// boundary moved one step left until validation succeeds or the group
/// reaches `min_len`; in the latter case the group is extended to the next
/// detected point instead. The final group always ends at `n` and is not
/// validated here; the calibration pass decides its fate.
pub fn adjust_change_points<F>(
    n: usize,
    points: &ChangePointSet,
    min_len: usize,
    mut validate: F,
) -> Result<Segmentation>
where
    F: FnMut(usize, usize) -> bool,
{
    let mut anchors: Vec<usize> = points.points.clone();
    if anchors.windows(2).any(|w| w[1] <= w[0]) || anchors.iter().any(|&p| p == 0 || p >= n) {
        return Err(Error::InvalidInput(format!("invalid change points {anchors:?}")));
    }
    anchors.push(n);
    let mut rescaled = Vec::with_capacity(anchors.len() - 1);
    let mut start = 1;
    let mut idx = 0;
    while idx + 1 < anchors.len() {
        let floor = start + min_len - 1;
        let mut l = anchors[idx];
        let mut accepted = None;
        while l >= floor {
            if validate(start, l) {
                accepted = Some(l);
                break;
            }
            l -= 1;
        }
        if let Some(l) = accepted {
            rescaled.push(l);
            start = l + 1;
        }
        idx += 1;
    }
    if n + 1 - start < min_len {
        return Err(Error::Unsegmentable { start, end: n });
    }
    let mut seg = Segmentation::from_change_points(n, &rescaled)?;
    seg.source = SegmentationSource::ChangePoint;
    Ok(seg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_partition_examples() {
        let s = Segmentation::fixed(68, 8).unwrap();
        assert_eq!(s.len(), 8);
        assert_eq!(s.groups()[7], (57, 68));
        assert_eq!(s.groups()[6], (49, 56));
        assert_eq!(Segmentation::fixed(16, 8).unwrap().groups(), &[(1, 8), (9, 16)]);
        assert_eq!(Segmentation::fixed(9, 8).unwrap().groups(), &[(1, 9)]);
        assert!(Segmentation::fixed(7, 8).is_err());
    }

    #[test]
    fn merge_examples() {
        let s = Segmentation::fixed(68, 8).unwrap();
        let m = s.merge_groups(&[(3, 7)]).unwrap();
        assert_eq!(m.groups(), &[(1, 8), (9, 16), (17, 56), (57, 68)]);
        assert_eq!(s.merge_groups(&[]).unwrap(), s);
        assert!(matches!(s.merge_listed(&[1, 3]), Err(Error::NonAdjacentMerge(_))));
        assert!(s.merge_groups(&[(2, 4), (4, 5)]).is_err());
    }

    #[test]
    fn auto_merge_joins_equal_level_blocks() {
        let mut v = Vec::new();
        for j in 0..4 {
            let level = if j < 2 { 1.0 } else { 3.0 };
            for i in 0..8 {
                v.push(level + 0.01 * ((i * 7 + j * 3) % 5) as f64);
            }
        }
        let s = Segmentation::fixed(32, 8).unwrap().auto_merge(&v, 0.05).unwrap();
        assert_eq!(s.groups(), &[(1, 16), (17, 32)]);
    }

    #[test]
    fn kmax_one_gives_no_points() {
        let v: Vec<f64> = (0..30).map(|i| ((i * 37) % 11) as f64).collect();
        assert!(detect_change_points(&v, 1, 7).unwrap().points.is_empty());
    }

    #[test]
    fn minimal_length_split_at_midpoint() {
        let v = [0.1, -0.1, 0.12, -0.09, 0.1, -0.11, 0.1, 10.0, -10.0, 11.0, -9.0, 10.5, -10.0, 9.5];
        let cp = detect_change_points(&v, 2, 7).unwrap();
        assert_eq!(cp.points, vec![7]);
        assert!(detect_change_points(&v[..13], 1, 7).is_err());
    }

    #[test]
    fn adjust_with_accepting_hook_is_identity() {
        let cps = ChangePointSet { points: vec![10, 20], penalty_used: 0.75, contrasts: vec![] };
        let seg = adjust_change_points(30, &cps, 3, |_, _| true).unwrap();
        assert_eq!(seg.change_points(), vec![10, 20]);
    }

    #[test]
    fn adjust_shifts_rejected_boundary_left() {
        let cps = ChangePointSet { points: vec![10, 20], penalty_used: 0.75, contrasts: vec![] };
        let seg = adjust_change_points(30, &cps, 3, |s, e| !(s == 1 && e == 10)).unwrap();
        assert_eq!(seg.groups(), &[(1, 9), (10, 20), (21, 30)]);
    }

    #[test]
    fn adjust_advances_past_unfixable_segment() {
        let cps = ChangePointSet { points: vec![10, 20], penalty_used: 0.75, contrasts: vec![] };
        // every group starting at 11 and ending before 21 fails
        let mut seen = Vec::new();
        let seg = adjust_change_points(30, &cps, 3, |s, e| {
            seen.push((s, e));
            !(s == 11 && e <= 20)
        })
        .unwrap();
        assert_eq!(seg.groups(), &[(1, 10), (11, 30)]);
        assert!(seen.contains(&(11, 13)));
        assert!(!seen.contains(&(11, 12)));
    }

    #[test]
    fn adjust_leaves_tail_to_calibration() {
        let cps = ChangePointSet { points: vec![10], penalty_used: 0.75, contrasts: vec![] };
        let mut seen = Vec::new();
        let seg = adjust_change_points(20, &cps, 3, |s, e| {
            seen.push((s, e));
            s == 1
        })
        .unwrap();
        assert_eq!(seg.groups(), &[(1, 10), (11, 20)]);
        assert!(!seen.iter().any(|&(s, _)| s == 11));
    }
}
