//! Texture-driven importance weights for the pruned coder.
//!
//! The pipeline is:
//!
//! 1. [`extract_features`]: one feature vector per spatial-orientation tree.
//! 2. [`kmeans`]: seeded Lloyd clustering of those vectors.
//! 3. [`em_step`]: optional refinement of the clustering with a mixture of
//!    per-texture densities. Each texture models every feature dimension as
//!    a zero-mean two-state ("high" / "low" variance) Gaussian mixture.
//! 4. [`cluster_stats`]: entropy and non-zero count of each cluster's
//!    coefficients, combined into a relevance score.
//! 5. [`importance_weights`]: the `m` most relevant coefficients get a
//!    positive weight, everything else is blocked out with weight zero.
//! 6. [`rescale`]: blocked coefficients are zeroed and retained ones are
//!    multiplied by a power of two.
//!
//! [`crossband_mask`] is the alternative, threshold-based way to choose the
//! retained set.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metrics::entropy_of_counts;
use crate::pixelio::GrayImage;
use crate::spiht::{Coord, TreeLayout};
use crate::wavelet::WaveletPyramid;

/// Features of one tree, rooted at a non-childless LL coefficient.
///
/// `vector` holds the mean coefficient magnitude over the spatial footprint
/// of the root's 2x2 LL group in every detail band, ordered coarsest level
/// first and `LH, HL, HH` within a level. The three trees of a group cover
/// the same image region, so they share one vector.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeFeature {
    pub tree_id: usize,
    pub root: Coord,
    pub vector: Vec<f64>,
}

/// Indices of the non-childless LL roots in row-major order. Position in the
/// returned list is the tree id.
pub fn tree_roots(layout: &TreeLayout) -> Vec<usize> {
    layout
        .roots()
        .filter(|&r| layout.first_child(r).is_some())
        .collect()
}

pub fn extract_features(pyr: &WaveletPyramid) -> Vec<TreeFeature> {
    let layout = TreeLayout::of(pyr);
    let levels = pyr.levels();
    let (h, w) = (pyr.height(), pyr.width());
    tree_roots(&layout)
        .into_iter()
        .enumerate()
        .map(|(tree_id, root)| {
            let c = layout.coord(root);
            let (gr, gc) = (c.row & !1, c.col & !1);
            let mut vector = Vec::with_capacity(3 * usize::from(levels));
            for level in (1..=levels).rev() {
                let (bh, bw) = (h >> level, w >> level);
                let span = 1usize << (levels - level);
                let (r0, c0) = (gr * span, gc * span);
                let size = 2 * span;
                for (or, oc) in [(bh, 0), (0, bw), (bh, bw)] {
                    let mut sum = 0.0;
                    for r in r0..r0 + size {
                        for cc in c0..c0 + size {
                            sum += pyr.get(or + r, oc + cc).abs();
                        }
                    }
                    vector.push(sum / (size * size) as f64);
                }
            }
            TreeFeature {
                tree_id,
                root: c,
                vector,
            }
        })
        .collect()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    /// Cluster of each tree, indexed by tree id.
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Squared-error objective after every iteration.
    pub objective: Vec<f64>,
}

/// Seeded Lloyd iterations. Starts from `k` distinct features drawn
/// uniformly; stops when assignments stop changing or after `max_iter`
/// iterations.
pub fn kmeans(features: &[TreeFeature], k: usize, max_iter: usize, seed: u64) -> Result<KMeans> {
    let points: Vec<&[f64]> = features.iter().map(|f| f.vector.as_slice()).collect();
    kmeans_points(&points, k, max_iter, seed)
}

pub fn kmeans_points(points: &[&[f64]], k: usize, max_iter: usize, seed: u64) -> Result<KMeans> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::Argument(format!("k = {k} with {n} points")));
    }
    let dim = points[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = sample(&mut rng, n, k).into_vec();
    picks.sort_unstable();
    let mut centroids: Vec<Vec<f64>> = picks.iter().map(|&i| points[i].to_vec()).collect();
    let mut assignments = vec![usize::MAX; n];
    let mut objective = Vec::new();

    for _ in 0..max_iter.max(1) {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (j, c) in centroids.iter().enumerate() {
                let d = sq_dist(p, c);
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
            if assignments[i] != best {
                assignments[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        // empty clusters keep their previous centre
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(p.iter()) {
                *s += v;
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                centroids[j] = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            }
        }
        let j: f64 = points
            .iter()
            .zip(&assignments)
            .map(|(p, &a)| sq_dist(p, &centroids[a]))
            .sum();
        objective.push(j);
    }
    Ok(KMeans {
        assignments,
        centroids,
        objective,
    })
}

const VAR_FLOOR: f64 = 1e-6;
const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Zero-mean two-state Gaussian mixture for one feature dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoState {
    pub p_high: f64,
    pub var_high: f64,
    pub var_low: f64,
}

impl TwoState {
    fn log_normal(x: f64, var: f64) -> f64 {
        -0.5 * (LN_2PI + var.ln() + x * x / var)
    }

    /// `(ln p(x), posterior probability of the high state)`.
    fn evaluate(&self, x: f64) -> (f64, f64) {
        let lh = self.p_high.ln() + Self::log_normal(x, self.var_high);
        let ll = (1.0 - self.p_high).ln() + Self::log_normal(x, self.var_low);
        let total = log_sum_exp(&[lh, ll]);
        let r_high = if total.is_finite() { (lh - total).exp() } else { 0.5 };
        (total, r_high)
    }
}

/// One texture: an independent [`TwoState`] per feature dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct TextureDensity {
    pub dims: Vec<TwoState>,
}

impl TextureDensity {
    pub fn log_density(&self, x: &[f64]) -> f64 {
        self.dims.iter().zip(x).map(|(d, &v)| d.evaluate(v).0).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel {
    /// Mixing coefficients, non-negative and summing to one.
    pub alpha: Vec<f64>,
    pub components: Vec<TextureDensity>,
}

impl MixtureModel {
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// Initial model from a hard clustering: priors from cluster sizes,
    /// state variances bracketing each cluster's second moment.
    pub fn from_assignments(features: &[TreeFeature], assignments: &[usize], k: usize) -> Self {
        let n = features.len().max(1);
        let dim = features.first().map_or(0, |f| f.vector.len());
        let mut counts = vec![0usize; k];
        let mut second = vec![vec![0.0; dim]; k];
        for (f, &a) in features.iter().zip(assignments) {
            counts[a] += 1;
            for (s, v) in second[a].iter_mut().zip(&f.vector) {
                *s += v * v;
            }
        }
        let components = (0..k)
            .map(|j| TextureDensity {
                dims: second[j]
                    .iter()
                    .map(|&s| {
                        let m2 = s / counts[j].max(1) as f64;
                        TwoState {
                            p_high: 0.5,
                            var_high: (2.0 * m2).max(VAR_FLOOR * 4.0),
                            var_low: (0.5 * m2).max(VAR_FLOOR),
                        }
                    })
                    .collect(),
            })
            .collect();
        Self {
            alpha: counts.iter().map(|&c| c as f64 / n as f64).collect(),
            components,
        }
    }

    /// `ln P(w_t | texture j)` for every tree and texture.
    pub fn log_likelihoods(&self, features: &[TreeFeature]) -> Vec<Vec<f64>> {
        features
            .iter()
            .map(|f| {
                self.components
                    .iter()
                    .map(|c| c.log_density(&f.vector))
                    .collect()
            })
            .collect()
    }
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return max;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Bayes posteriors `alpha_j p_j(t) / sum_i alpha_i p_i(t)` computed from
/// log-likelihoods.
pub fn posteriors(log_lik: &[Vec<f64>], alpha: &[f64]) -> Result<Vec<Vec<f64>>> {
    let log_alpha: Vec<f64> = alpha.iter().map(|a| a.ln()).collect();
    log_lik
        .iter()
        .enumerate()
        .map(|(t, row)| {
            let joint: Vec<f64> = row.iter().zip(&log_alpha).map(|(l, a)| l + a).collect();
            let total = log_sum_exp(&joint);
            if !total.is_finite() {
                return Err(Error::NumericalUnderflow { tree: t });
            }
            Ok(joint.iter().map(|j| (j - total).exp()).collect())
        })
        .collect()
}

/// `sum_t ln sum_j alpha_j P(w_t | texture j)`.
pub fn data_log_likelihood(features: &[TreeFeature], model: &MixtureModel) -> Result<f64> {
    let log_alpha: Vec<f64> = model.alpha.iter().map(|a| a.ln()).collect();
    let mut total = 0.0;
    for (t, row) in model.log_likelihoods(features).iter().enumerate() {
        let joint: Vec<f64> = row.iter().zip(&log_alpha).map(|(l, a)| l + a).collect();
        let lt = log_sum_exp(&joint);
        if !lt.is_finite() {
            return Err(Error::NumericalUnderflow { tree: t });
        }
        total += lt;
    }
    Ok(total)
}

/// One EM iteration: texture posteriors per tree, `alpha_j = mean_t P_j(t)`,
/// then posterior-weighted moment matching of every two-state density.
pub fn em_step(features: &[TreeFeature], model: &MixtureModel) -> Result<MixtureModel> {
    let n = features.len();
    if n == 0 {
        return Ok(model.clone());
    }
    let post = posteriors(&model.log_likelihoods(features), &model.alpha)?;
    let k = model.len();
    let mut alpha: Vec<f64> = (0..k).map(|j| post.iter().map(|p| p[j]).sum::<f64>() / n as f64).collect();
    let total: f64 = alpha.iter().sum();
    alpha.iter_mut().for_each(|a| *a /= total);

    let components = model
        .components
        .iter()
        .enumerate()
        .map(|(j, comp)| {
            let weight: f64 = post.iter().map(|p| p[j]).sum();
            if weight <= 0.0 {
                return comp.clone();
            }
            let dims = comp
                .dims
                .iter()
                .enumerate()
                .map(|(d, state)| {
                    let (mut wh, mut wl, mut sh, mut sl) = (0.0, 0.0, 0.0, 0.0);
                    for (f, p) in features.iter().zip(&post) {
                        let x = f.vector[d];
                        let (_, r) = state.evaluate(x);
                        wh += p[j] * r;
                        wl += p[j] * (1.0 - r);
                        sh += p[j] * r * x * x;
                        sl += p[j] * (1.0 - r) * x * x;
                    }
                    TwoState {
                        p_high: (wh / weight).clamp(1e-9, 1.0 - 1e-9),
                        var_high: if wh > 0.0 { (sh / wh).max(VAR_FLOOR) } else { state.var_high },
                        var_low: if wl > 0.0 { (sl / wl).max(VAR_FLOOR) } else { state.var_low },
                    }
                })
                .collect();
            TextureDensity { dims }
        })
        .collect();
    Ok(MixtureModel { alpha, components })
}

/// Most probable texture of every tree.
pub fn classify(features: &[TreeFeature], model: &MixtureModel) -> Result<Vec<usize>> {
    let post = posteriors(&model.log_likelihoods(features), &model.alpha)?;
    Ok(post
        .iter()
        .map(|p| {
            p.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (j, &v)| if v > best.1 { (j, v) } else { best })
                .0
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStats {
    pub cluster: usize,
    /// Trees assigned to the cluster.
    pub size: usize,
    /// Entropy of the cluster's integer-rounded coefficient magnitudes.
    pub entropy_bits: f64,
    pub nonzero_count: usize,
    /// No tree was assigned to this cluster.
    pub empty: bool,
}

/// Per-cluster entropy and non-zero count over the detail coefficients of
/// the trees in each cluster.
pub fn cluster_stats(pyr: &WaveletPyramid, assignments: &[usize], k: usize) -> Vec<ClusterStats> {
    let layout = TreeLayout::of(pyr);
    let roots = tree_roots(&layout);
    let mut histograms: Vec<std::collections::BTreeMap<u64, usize>> = vec![Default::default(); k];
    let mut sizes = vec![0usize; k];
    for (tree, &root) in roots.iter().enumerate() {
        let cluster = assignments[tree];
        sizes[cluster] += 1;
        for d in layout.descendants(root) {
            let m = pyr.coeffs()[d].abs().round() as u64;
            *histograms[cluster].entry(m).or_default() += 1;
        }
    }
    histograms
        .iter()
        .enumerate()
        .map(|(cluster, hist)| ClusterStats {
            cluster,
            size: sizes[cluster],
            entropy_bits: entropy_of_counts(hist.values().copied()),
            nonzero_count: hist.iter().filter(|(&m, _)| m != 0).map(|(_, &c)| c).sum(),
            empty: sizes[cluster] == 0,
        })
        .collect()
}

/// Relevance of a cluster, used to rank its coefficients.
pub type ClusterScore = fn(&ClusterStats) -> f64;

/// Entropy times non-zero count.
pub fn entropy_times_nonzero(stats: &ClusterStats) -> f64 {
    stats.entropy_bits * stats.nonzero_count as f64
}

pub fn cluster_scores(stats: &[ClusterStats], score: ClusterScore) -> Vec<f64> {
    stats.iter().map(score).collect()
}

/// Per-coefficient non-negative weights; zero means blocked out.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMap {
    pub width: usize,
    pub height: usize,
    pub weights: Vec<f64>,
}

impl WeightMap {
    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            weights: vec![value; width * height],
        }
    }

    pub fn from_mask(width: usize, height: usize, mask: &[bool]) -> Self {
        Self {
            width,
            height,
            weights: mask.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect(),
        }
    }

    /// `weight > 0` per coefficient.
    pub fn mask(&self) -> Vec<bool> {
        self.weights.iter().map(|&w| w > 0.0).collect()
    }

    pub fn support_size(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.width + col]
    }
}

/// Tree id owning each coefficient. LL coefficients map to the tree they
/// root; the childless root of each group maps to `None`.
fn coefficient_trees(layout: &TreeLayout) -> Vec<Option<usize>> {
    let mut owner = vec![None; layout.len()];
    for (tree, root) in tree_roots(layout).into_iter().enumerate() {
        owner[root] = Some(tree);
        for d in layout.descendants(root) {
            owner[d] = Some(tree);
        }
    }
    owner
}

/// Relevance score of every coefficient: the score of the cluster of its
/// tree. A childless LL root takes the best score among its group's trees.
pub fn coefficient_scores(
    pyr: &WaveletPyramid,
    assignments: &[usize],
    cluster_scores: &[f64],
) -> Vec<f64> {
    let layout = TreeLayout::of(pyr);
    let owner = coefficient_trees(&layout);
    let tree_score = |t: usize| cluster_scores[assignments[t]];
    (0..layout.len())
        .map(|idx| match owner[idx] {
            Some(t) => tree_score(t),
            None => {
                let c = layout.coord(idx);
                [(0, 1), (1, 0), (1, 1)]
                    .iter()
                    .filter_map(|&(dr, dc)| owner[layout.index(Coord::new(c.row + dr, c.col + dc))])
                    .map(tree_score)
                    .fold(0.0, f64::max)
            }
        })
        .collect()
}

/// Ranks coefficients by relevance (cluster score, then magnitude, then
/// row-major position) and gives the top `m` the weight
/// `max(1, -1 + lambda * gamma)`, where `gamma` is the coefficient's
/// relevance normalized to `[0, 1]`. All other coefficients get 0, except
/// LL coefficients, which always keep a weight of at least 1.
pub fn importance_weights(
    pyr: &WaveletPyramid,
    assignments: &[usize],
    cluster_scores: &[f64],
    m: usize,
    lambda: f64,
) -> Result<WeightMap> {
    let n = pyr.len();
    if m > n {
        return Err(Error::Argument(format!("m = {m} exceeds {n} coefficients")));
    }
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::Argument(format!("lambda = {lambda} must be non-negative")));
    }
    let score = coefficient_scores(pyr, assignments, cluster_scores);
    let top = score.iter().copied().fold(0.0, f64::max);
    let mut order: Vec<usize> = (0..n).collect();
    let coeffs = pyr.coeffs();
    order.sort_by(|&a, &b| {
        score[b]
            .total_cmp(&score[a])
            .then(coeffs[b].abs().total_cmp(&coeffs[a].abs()))
            .then(a.cmp(&b))
    });
    let mut weights = vec![0.0; n];
    for &idx in &order[..m] {
        let gamma = if top > 0.0 { score[idx] / top } else { 0.0 };
        weights[idx] = (-1.0 + lambda * gamma.abs()).max(1.0);
    }
    for (idx, w) in weights.iter_mut().enumerate() {
        if pyr.is_ll(idx / pyr.width(), idx % pyr.width()) && *w < 1.0 {
            *w = 1.0;
        }
    }
    Ok(WeightMap {
        width: pyr.width(),
        height: pyr.height(),
        weights,
    })
}

/// Zeroes blocked coefficients and multiplies retained ones by
/// `2^scale_shift`.
pub fn rescale(pyr: &WaveletPyramid, weights: &WeightMap, scale_shift: u8) -> Result<WaveletPyramid> {
    check_weight_shape(pyr, weights)?;
    let factor = (1u64 << scale_shift) as f64;
    let mut out = pyr.clone();
    for (c, &w) in out.coeffs_mut().iter_mut().zip(&weights.weights) {
        *c = if w > 0.0 { *c * factor } else { 0.0 };
    }
    Ok(out)
}

/// Divides the coefficients on `mask` by `2^scale_shift`.
pub fn unscale(pyr: &WaveletPyramid, mask: &[bool], scale_shift: u8) -> WaveletPyramid {
    let factor = (1u64 << scale_shift) as f64;
    let mut out = pyr.clone();
    for (c, &keep) in out.coeffs_mut().iter_mut().zip(mask) {
        if keep {
            *c /= factor;
        }
    }
    out
}

fn check_weight_shape(pyr: &WaveletPyramid, weights: &WeightMap) -> Result<()> {
    if weights.width != pyr.width() || weights.height != pyr.height() || weights.weights.len() != pyr.len() {
        return Err(Error::Shape(format!(
            "weights {}x{} for a {}x{} pyramid",
            weights.width,
            weights.height,
            pyr.width(),
            pyr.height()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CrossbandPolicy {
    /// All three same-position detail coefficients must reach the threshold.
    #[default]
    All,
    /// Any one of them suffices.
    Any,
}

/// Binary mask that keeps a same-level `(LH, HL, HH)` triple when its
/// magnitudes reach `T = 2^(floor(log2 max |LL|) - u0)` under `policy`.
/// LL is always kept. An all-zero LL band is treated as `max |LL| = 1`.
pub fn crossband_mask(pyr: &WaveletPyramid, u0: u32, policy: CrossbandPolicy) -> WeightMap {
    let (llh, llw) = pyr.ll_dims();
    let mut ll_max = 0.0f64;
    for r in 0..llh {
        for c in 0..llw {
            ll_max = ll_max.max(pyr.get(r, c).abs());
        }
    }
    let top = if ll_max >= 1.0 { ll_max.log2().floor() as i32 } else { 0 };
    let t = 2f64.powi(top - u0.min(i32::MAX as u32) as i32);

    let (h, w) = (pyr.height(), pyr.width());
    let mut mask = vec![false; pyr.len()];
    for r in 0..llh {
        for c in 0..llw {
            mask[r * w + c] = true;
        }
    }
    for level in 1..=pyr.levels() {
        let (bh, bw) = (h >> level, w >> level);
        for r in 0..bh {
            for c in 0..bw {
                let triple = [(bh + r, c), (r, bw + c), (bh + r, bw + c)];
                let hits = triple.iter().filter(|&&(rr, cc)| pyr.get(rr, cc).abs() >= t).count();
                let keep = match policy {
                    CrossbandPolicy::All => hits == 3,
                    CrossbandPolicy::Any => hits > 0,
                };
                for (rr, cc) in triple {
                    mask[rr * w + cc] = keep;
                }
            }
        }
    }
    WeightMap::from_mask(w, h, &mask)
}

/// Diagnostic selection cost
/// `(1/N) sum_i (lambda * keep_i * (w_i - q_i)^2 + (w_i - q_i)^2)` between
/// original coefficients `w` and their decoded values `q`, with the regressor
/// taken as the identity on retained coefficients.
pub fn selection_cost(
    original: &WaveletPyramid,
    decoded: &WaveletPyramid,
    weights: &WeightMap,
    lambda: f64,
) -> Result<f64> {
    check_weight_shape(original, weights)?;
    if decoded.len() != original.len() {
        return Err(Error::Shape("decoded pyramid differs in size".into()));
    }
    let n = original.len() as f64;
    let sum: f64 = original
        .coeffs()
        .iter()
        .zip(decoded.coeffs())
        .zip(&weights.weights)
        .map(|((&w, &q), &beta)| {
            let e = (w - q) * (w - q);
            let keep = if beta > 0.0 { 1.0 } else { 0.0 };
            lambda * keep * e + e
        })
        .sum();
    Ok(sum / n)
}

/// Settings for the texture-driven selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub em_iters: usize,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        Self {
            k: 2,
            seed: 0,
            max_iter: 100,
            em_iters: 10,
        }
    }
}

/// Clustering of the trees of one pyramid.
#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub features: Vec<TreeFeature>,
    pub assignments: Vec<usize>,
    pub stats: Vec<ClusterStats>,
    pub scores: Vec<f64>,
    pub model: Option<MixtureModel>,
}

/// k-means, then `em_iters` mixture refinements, then per-cluster scoring.
pub fn segment(pyr: &WaveletPyramid, cfg: &SegmentConfig, score: ClusterScore) -> Result<Segmentation> {
    let features = extract_features(pyr);
    let km = kmeans(&features, cfg.k, cfg.max_iter, cfg.seed)?;
    let (assignments, model) = if cfg.em_iters > 0 {
        let mut model = MixtureModel::from_assignments(&features, &km.assignments, cfg.k);
        for _ in 0..cfg.em_iters {
            model = em_step(&features, &model)?;
        }
        (classify(&features, &model)?, Some(model))
    } else {
        (km.assignments, None)
    };
    let stats = cluster_stats(pyr, &assignments, cfg.k);
    let scores = cluster_scores(&stats, score);
    Ok(Segmentation {
        features,
        assignments,
        stats,
        scores,
        model,
    })
}

/// Pixel-domain map of the tree clusters: every pixel under a 2x2 LL group
/// gets `cluster * floor(255 / (k - 1))` of that group's trees.
pub fn label_image(pyr: &WaveletPyramid, assignments: &[usize], k: usize) -> Result<GrayImage> {
    let layout = TreeLayout::of(pyr);
    let step = if k > 1 { (255 / (k - 1)) as f64 } else { 0.0 };
    let mut group_label = std::collections::HashMap::new();
    for (tree, root) in tree_roots(&layout).into_iter().enumerate() {
        let c = layout.coord(root);
        group_label.entry((c.row / 2, c.col / 2)).or_insert(assignments[tree]);
    }
    let span = 1usize << (pyr.levels() + 1);
    GrayImage::from_fn(pyr.width(), pyr.height(), |row, col| {
        group_label[&(row / span, col / span)] as f64 * step
    })
}

/// Writes `cluster_id,size,entropy_bits,nonzero_count,score`.
pub fn write_cluster_stats<W: std::io::Write>(out: W, stats: &[ClusterStats], scores: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["cluster_id", "size", "entropy_bits", "nonzero_count", "score"])
        .map_err(csv_err)?;
    for (s, score) in stats.iter().zip(scores) {
        w.write_record([
            s.cluster.to_string(),
            s.size.to_string(),
            format!("{:.6}", s.entropy_bits),
            s.nonzero_count.to_string(),
            format!("{score:.6}"),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
