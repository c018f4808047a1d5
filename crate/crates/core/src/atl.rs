//! Adaptive topology learning: a tensor is approximated by a sum of
//! tensor-network components fitted greedily to the running residual. Each
//! component starts with no edges and grows one bond at a time, choosing the
//! factor pair whose subnetwork best explains the current residual.

use std::collections::BTreeMap;

use log::{debug, info};
use nalgebra::{DMatrix, SVD};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{gemm, pinv_psd, PINV_RTOL};
use crate::network::{MtnrModel, TnComponent};
use crate::tensor::{fold_matrix, DenseTensor, Grouping};

/// Fits closer than this (relative) are treated as exact and never grow.
const EXACT_FIT_RTOL: f64 = 1e-10;

/// Solver settings shared by decomposition and completion.
#[derive(Clone, Debug, PartialEq)]
pub struct AtlConfig {
    /// Stop once the residual norm is at most `epsilon` times the input norm.
    pub epsilon: f64,
    /// A component may grow an edge once the relative change per sweep drops to `delta`.
    pub delta: f64,
    /// Maximum number of sweeps per component.
    pub s_max: usize,
    /// Parameter budget per component; `None` means `N * max(I_k) * 4^t`.
    pub gamma: Option<usize>,
    /// Maximum number of edges per factor.
    pub max_connections: usize,
    pub max_components: usize,
    /// Seed for [`AtlConfig::rng`]; the solvers themselves take an explicit generator.
    pub seed: u64,
}

impl Default for AtlConfig {
    fn default() -> Self {
        Self {
            epsilon: 2e-2,
            delta: 4e-3,
            s_max: 3000,
            gamma: None,
            max_connections: 3,
            max_components: 32,
            seed: 0,
        }
    }
}

impl AtlConfig {
    /// A generator seeded with `self.seed`.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// The parameter budget for a tensor with dimensions `dims`.
    pub fn gamma_for(&self, dims: &[usize]) -> usize {
        self.gamma.unwrap_or_else(|| {
            let i_max = dims.iter().copied().max().unwrap_or(1);
            let t = u32::try_from(self.max_connections).unwrap_or(u32::MAX);
            dims.len()
                .saturating_mul(i_max)
                .saturating_mul(4usize.saturating_pow(t))
        })
    }

    pub fn validate(&self, dims: &[usize]) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.delta > 0.0) {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        if self.s_max < 1 {
            return bad("s_max must be at least 1".into());
        }
        if self.max_connections < 1 {
            return bad("max_connections must be at least 1".into());
        }
        if self.max_components < 1 {
            return bad("max_components must be at least 1".into());
        }
        let floor = dims.len() * dims.iter().copied().max().unwrap_or(1);
        let gamma = self.gamma_for(dims);
        if gamma < floor {
            return bad(format!("gamma {gamma} is below N * max(I_k) = {floor}"));
        }
        Ok(())
    }
}

/// Bookkeeping for edge selection within one component.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgeSelectionState {
    pub last_selected: Option<(usize, usize)>,
    pub selection_count: BTreeMap<(usize, usize), usize>,
}

impl EdgeSelectionState {
    pub fn count(&self, i: usize, j: usize) -> usize {
        self.selection_count.get(&(i, j)).copied().unwrap_or(0)
    }

    /// Whether `(i, j)`, `i < j`, may be selected next.
    pub fn admissible(&self, c: &TnComponent, i: usize, j: usize) -> bool {
        let dims = c.physical_dims();
        self.last_selected != Some((i, j)) && self.count(i, j) < dims[i].min(dims[j]) && c.can_grow(i, j)
    }
}

/// Replaces factor `n` by the least-squares solution of `target ≈ recover(c)`
/// with every other factor fixed.
pub fn als_update_factor(c: &TnComponent, target: &DenseTensor, n: usize) -> Result<TnComponent> {
    if target.dims() != c.physical_dims().as_slice() {
        return Err(Error::shape(format!(
            "target dims {:?} differ from component dims {:?}",
            target.dims(),
            c.physical_dims()
        )));
    }
    if n >= c.order() {
        return Err(Error::ModeOutOfRange { mode: n, order: c.order() });
    }
    let mut out = c.clone();
    let unfolded = target.matricize_mode(n)?.matrix;
    als_update_in_place(&mut out, &unfolded, n);
    Ok(out)
}

/// `t_n` is the mode-`n` unfolding of the target. Returns the basis `B` used,
/// so callers can form the new reconstruction `Z_(n) Bᵀ` cheaply.
pub(crate) fn als_update_in_place(c: &mut TnComponent, t_n: &DMatrix<f64>, n: usize) -> Option<DMatrix<f64>> {
    if c.order() == 1 {
        let f = DenseTensor::new(c.factor(0).dims().to_vec(), t_n.as_slice().to_vec()).expect("factor shape");
        c.set_factor(0, f).expect("same shape");
        return None;
    }
    let b = c.excluded_basis(n);
    let gram = c.excluded_gram(n);
    let tb = gemm(t_n.nrows(), t_n.ncols(), b.ncols(), t_n.as_slice(), false, b.as_slice(), false);
    let inv = pinv_psd(&gram, PINV_RTOL);
    let p = b.ncols();
    let z = gemm(t_n.nrows(), p, p, &tb, false, inv.as_slice(), false);
    let dims = c.factor(n).dims().to_vec();
    let f = fold_matrix(&DMatrix::from_vec(t_n.nrows(), p, z), &dims, Grouping::Mode(n)).expect("factor shape");
    c.set_factor(n, f).expect("same shape");
    Some(b)
}

/// Reconstruction from the mode-`n` unfolding of factor `n` and the basis `B`
/// of the other factors: `X_(n) = Z_(n) Bᵀ`.
pub(crate) fn recover_from_basis(c: &TnComponent, n: usize, b: &DMatrix<f64>) -> DenseTensor {
    let z = c.factor(n).matricize_mode(n).expect("valid mode").matrix;
    let x = gemm(z.nrows(), z.ncols(), b.nrows(), z.as_slice(), false, b.as_slice(), true);
    fold_matrix(&DMatrix::from_vec(z.nrows(), b.nrows(), x), &c.physical_dims(), Grouping::Mode(n))
        .expect("reconstruction shape")
}

/// Projection-error score of one pair: the Frobenius norm of the
/// least-squares coefficient `W` in `E_(i,j) ≈ W Bᵀ`, where `B` is the network
/// without factors `i` and `j` with rows enumerating the other physical
/// indices and columns the bonds into `i` and `j`. `W` is what a new slice
/// shared by `i` and `j` would have to carry.
fn pair_score(c: &TnComponent, error: &DenseTensor, i: usize, j: usize) -> f64 {
    if c.order() == 2 {
        return error.norm();
    }
    let z = c.recover_excluding(&[i, j]).expect("valid pair");
    let nd = z.dims().len();
    let cols = z.dims()[nd - 1] * z.dims()[nd - 2];
    let zm = DMatrix::from_vec(z.len() / cols, cols, z.into_vec());
    let e = error.matricize_mode_pair(i, j).expect("valid pair").matrix;
    let svd = SVD::new(zm, true, false);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0.0;
    }
    let u = svd.u.expect("u requested");
    let eu = &e * &u;
    let mut total = 0.0;
    for (r, &s) in svd.singular_values.iter().enumerate() {
        if s <= PINV_RTOL * smax {
            continue;
        }
        total += eu.column(r).norm_squared() / (s * s);
    }
    total.sqrt()
}

/// Scores `w_{i,j}` for every factor pair `i < j` given the fit error
/// `target - recover(c)`.
pub fn projection_error_scores(c: &TnComponent, target: &DenseTensor) -> Result<BTreeMap<(usize, usize), f64>> {
    let error = target.sub(&c.recover())?;
    Ok(scores_for_pairs(c, &error, all_pairs(c.order())))
}

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

fn scores_for_pairs(c: &TnComponent, error: &DenseTensor, pairs: Vec<(usize, usize)>) -> BTreeMap<(usize, usize), f64> {
    pairs.into_iter().map(|(i, j)| ((i, j), pair_score(c, error, i, j))).collect()
}

/// Picks the admissible pair with the largest score (ties: lexicographically
/// smallest) and records the selection in `state`.
pub fn select_edge(
    scores: &BTreeMap<(usize, usize), f64>,
    state: &mut EdgeSelectionState,
    c: &TnComponent,
) -> Option<(usize, usize)> {
    let mut best: Option<((usize, usize), f64)> = None;
    for (&(i, j), &w) in scores {
        if i >= j || !state.admissible(c, i, j) {
            continue;
        }
        if best.is_none_or(|(_, bw)| w > bw) {
            best = Some(((i, j), w));
        }
    }
    let (pair, _) = best?;
    state.last_selected = Some(pair);
    *state.selection_count.entry(pair).or_insert(0) += 1;
    Some(pair)
}

/// Random starting component: no edges, Gaussian entries, scaled so that its
/// reconstruction has the norm of `target`.
pub(crate) fn initial_component<R: Rng + ?Sized>(target: &DenseTensor, t: usize, rng: &mut R) -> TnComponent {
    let dims = target.dims();
    let vectors: Vec<Vec<f64>> = dims
        .iter()
        .map(|&d| (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    let mut c = TnComponent::rank_one(&vectors).expect("valid vectors");
    c.set_max_connections(t).expect("no edges yet");
    let norm = c.recover().norm();
    if norm > 0.0 {
        c.scale(target.norm() / norm);
    }
    c
}

pub(crate) fn zero_component(dims: &[usize], t: usize) -> TnComponent {
    let vectors: Vec<Vec<f64>> = dims.iter().map(|&d| vec![0.0; d]).collect();
    let mut c = TnComponent::rank_one(&vectors).expect("valid vectors");
    c.set_max_connections(t).expect("no edges yet");
    c
}

/// One pass of factor updates inside a component fit.
pub(crate) trait Sweeper {
    /// Updates the factors of `c` against `target`; returns the new reconstruction.
    fn sweep<R: Rng + ?Sized>(&mut self, c: &mut TnComponent, target: &DenseTensor, rng: &mut R) -> DenseTensor;

    /// Called after edge `(i, j)` of `c` has grown.
    fn grown(&mut self, _c: &TnComponent, _i: usize, _j: usize) {}

    /// Extra `key=value` fields for the progress log.
    fn log_fields(&self) -> String {
        String::new()
    }
}

/// Plain ALS sweep: every factor once, in a fresh random order.
pub(crate) struct AlsSweeper;

impl Sweeper for AlsSweeper {
    fn sweep<R: Rng + ?Sized>(&mut self, c: &mut TnComponent, target: &DenseTensor, rng: &mut R) -> DenseTensor {
        let mut order: Vec<usize> = (0..c.order()).collect();
        order.shuffle(rng);
        let mut last = None;
        for &n in &order {
            let t_n = target.matricize_mode(n).expect("valid mode").matrix;
            last = als_update_in_place(c, &t_n, n).map(|b| (n, b));
        }
        match last {
            Some((n, b)) => recover_from_basis(c, n, &b),
            None => c.recover(),
        }
    }
}

/// Summary of one component fit.
#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    pub sweeps: usize,
    pub growths: usize,
    /// Relative change of the reconstruction in the last sweep.
    pub last_rse: f64,
}

/// The fitting loop shared by decomposition and both completion solvers.
/// `refresh` updates the target from the latest reconstruction after every sweep.
pub(crate) fn fit_loop<S: Sweeper, R: Rng + ?Sized>(
    mut target: DenseTensor,
    mut refresh: impl FnMut(&DenseTensor, &mut DenseTensor),
    sweeper: &mut S,
    cfg: &AtlConfig,
    component_index: usize,
    rng: &mut R,
) -> (TnComponent, FitReport) {
    let dims = target.dims().to_vec();
    let t = cfg.max_connections;
    let mut report = FitReport {
        sweeps: 0,
        growths: 0,
        last_rse: 0.0,
    };
    if target.norm() == 0.0 {
        return (zero_component(&dims, t), report);
    }
    let gamma = cfg.gamma_for(&dims);
    let mut c = initial_component(&target, t, rng);
    let mut state = EdgeSelectionState::default();
    let mut old = c.recover();
    for s in 0..cfg.s_max {
        let new = sweeper.sweep(&mut c, &target, rng);
        let old_norm = old.norm();
        let diff = new.sub(&old).expect("same shape").norm();
        let rse = if old_norm > 0.0 { diff / old_norm } else { diff };
        report.sweeps = s + 1;
        report.last_rse = rse;
        refresh(&new, &mut target);
        let params = c.parameter_count();
        let mut edge = None;
        // A growth on the last sweep would return unfitted slices.
        if rse <= cfg.delta && params <= gamma && s + 1 < cfg.s_max {
            let pairs: Vec<(usize, usize)> = all_pairs(c.order())
                .into_iter()
                .filter(|&(i, j)| state.admissible(&c, i, j))
                .collect();
            let error = target.sub(&new).expect("same shape");
            // An exact fit leaves nothing for a new edge to explain.
            if !pairs.is_empty() && error.norm() > EXACT_FIT_RTOL * target.norm() {
                let scores = scores_for_pairs(&c, &error, pairs);
                edge = select_edge(&scores, &mut state, &c);
            }
        }
        debug!(
            "component={component_index} sweep={s} rse={rse:.6e} params={params} edge={}{}",
            edge.map_or("none".to_string(), |(i, j)| format!("{i}-{j}")),
            sweeper.log_fields()
        );
        match edge {
            Some((i, j)) => {
                c.grow_in_place_random(i, j, rng).expect("admissible edge");
                sweeper.grown(&c, i, j);
                report.growths += 1;
            }
            None if rse <= cfg.delta / 10.0 => break,
            None => {}
        }
        old = new;
    }
    (c, report)
}

/// Fits a single component to `target`.
pub fn fit_component<R: Rng + ?Sized>(target: &DenseTensor, cfg: &AtlConfig, rng: &mut R) -> Result<TnComponent> {
    cfg.validate(target.dims())?;
    let (c, _) = fit_loop(target.clone(), |_, _| {}, &mut AlsSweeper, cfg, 0, rng);
    Ok(c)
}

/// Greedy multi-component decomposition of `x`: components are fitted to the
/// running residual until its norm is at most `epsilon * ||x||` or
/// `max_components` is reached. A zero input yields a single zero component.
pub fn run_atl<R: Rng + ?Sized>(x: &DenseTensor, cfg: &AtlConfig, rng: &mut R) -> Result<MtnrModel> {
    cfg.validate(x.dims())?;
    let mut model = MtnrModel::new(x.dims());
    let x_norm = x.norm();
    if x_norm == 0.0 {
        model.push(zero_component(x.dims(), cfg.max_connections))?;
        return Ok(model);
    }
    let mut residual = x.clone();
    for k in 0..cfg.max_components {
        let (c, report) = fit_loop(residual.clone(), |_, _| {}, &mut AlsSweeper, cfg, k, rng);
        residual.sub_assign(&c.recover());
        let rel = residual.norm() / x_norm;
        info!(
            "component={k} sweeps={} growths={} params={} edges={} relative_error={rel:.6e}",
            report.sweeps,
            report.growths,
            c.parameter_count(),
            c.ranks().edges().len()
        );
        model.push(c)?;
        if rel <= cfg.epsilon {
            break;
        }
    }
    Ok(model)
}
