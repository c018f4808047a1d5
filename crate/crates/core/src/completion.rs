//! Tensor completion with multi-component tensor networks.
//!
//! Both solvers fit components greedily to the observed residual. Missing
//! entries of the working target are re-imputed from the current component
//! after every sweep; observed entries of the returned tensor are copied from
//! the input unchanged.
//!
//! - [`mtnr_als_complete`] updates factors by alternating least squares.
//! - [`mtnr_admm_complete`] adds a sum-of-nuclear-norms penalty on every
//!   matricization of every factor and solves the split problem with ADMM.

use log::info;
use nalgebra::DMatrix;
use rand::Rng;

use crate::atl::{fit_loop, AlsSweeper, AtlConfig, FitReport, Sweeper};
use crate::error::{Error, Result};
use crate::linalg::{gemm, svt_with_norm};
use crate::mask::ObservationMask;
use crate::network::{extend_mode, MtnrModel, TnComponent};
use crate::tensor::{fold_matrix, DenseTensor, Grouping};

pub use crate::linalg::svt;
pub use crate::mask::apply_mask;

/// ADMM settings on top of the shared solver settings.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmmConfig {
    pub atl: AtlConfig,
    /// Weight of the data-fit term.
    pub lambda: f64,
    /// Initial penalty parameter, reset for every component.
    pub rho: f64,
    pub rho_max: f64,
    /// Multiplicative penalty increase per iteration.
    pub rho_growth: f64,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self {
            atl: AtlConfig::default(),
            lambda: 10.0,
            rho: 0.1,
            rho_max: 30.0,
            rho_growth: 1.01,
        }
    }
}

impl AdmmConfig {
    pub fn validate(&self, dims: &[usize]) -> Result<()> {
        self.atl.validate(dims)?;
        if !(self.lambda > 0.0) {
            return Err(Error::Config(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !(self.rho > 0.0 && self.rho <= self.rho_max) {
            return Err(Error::Config(format!(
                "need 0 < rho <= rho_max, got rho={} rho_max={}",
                self.rho, self.rho_max
            )));
        }
        if !(self.rho_growth >= 1.0) {
            return Err(Error::Config(format!("rho_growth must be at least 1, got {}", self.rho_growth)));
        }
        Ok(())
    }
}

/// Output of a completion run.
#[derive(Clone, Debug, PartialEq)]
pub struct Completion {
    /// Observed entries of the input, model values elsewhere.
    pub tensor: DenseTensor,
    pub model: MtnrModel,
    pub reports: Vec<FitReport>,
}

fn check_inputs(m: &DenseTensor, mask: &ObservationMask) -> Result<()> {
    mask.check_tensor(m, "completion")?;
    if mask.observed_count() == 0 {
        return Err(Error::invalid("the mask has no observed entries"));
    }
    Ok(())
}

/// Runs the greedy outer loop with `fit` producing each component from the
/// initial target and a refresh closure.
fn complete_with(
    m: &DenseTensor,
    mask: &ObservationMask,
    cfg: &AtlConfig,
    mut fit: impl FnMut(DenseTensor, &mut dyn FnMut(&DenseTensor, &mut DenseTensor), usize) -> (TnComponent, FitReport),
) -> Result<Completion> {
    let observed = mask.project(m)?;
    let observed_norm = observed.norm();
    let mut model = MtnrModel::new(m.dims());
    let mut reports = Vec::new();
    // Observed part of the residual `P_Ω(M - Σ_prev A)`.
    let mut residual = observed.clone();
    let mut fill = DenseTensor::zeros(m.dims());
    for k in 0..cfg.max_components {
        let fixed = residual.clone();
        let mut refresh = |recovered: &DenseTensor, target: &mut DenseTensor| {
            *target = apply_mask(recovered, mask, &fixed).expect("mask shape");
        };
        let (c, report) = fit(residual.clone(), &mut refresh, k);
        let recovered = c.recover();
        let part = mask.observed_norm(&recovered)?;
        residual = residual.sub(&mask.project(&recovered)?)?;
        fill.add_assign(&recovered);
        let ratio = if observed_norm > 0.0 { part / observed_norm } else { 0.0 };
        info!(
            "component={k} sweeps={} growths={} params={} observed_share={ratio:.6e} observed_residual={:.6e}",
            report.sweeps,
            report.growths,
            c.parameter_count(),
            residual.norm() / observed_norm.max(f64::MIN_POSITIVE)
        );
        model.push(c)?;
        reports.push(report);
        if ratio < cfg.epsilon {
            break;
        }
    }
    let tensor = apply_mask(&fill, mask, m)?;
    Ok(Completion { tensor, model, reports })
}

/// Completion by greedy components fitted with alternating least squares.
pub fn mtnr_als_complete<R: Rng + ?Sized>(
    m: &DenseTensor,
    mask: &ObservationMask,
    cfg: &AtlConfig,
    rng: &mut R,
) -> Result<Completion> {
    check_inputs(m, mask)?;
    cfg.validate(m.dims())?;
    complete_with(m, mask, cfg, |target, refresh, k| {
        fit_loop(target, refresh, &mut AlsSweeper, cfg, k, rng)
    })
}

/// Auxiliary variables `G_n^{(i)}` and multipliers `Y_n^{(i)}`, one pair per
/// factor `i` and mode `n`, each shaped like factor `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmmState {
    /// `g[i][n]`
    pub g: Vec<Vec<DenseTensor>>,
    /// `y[i][n]`
    pub y: Vec<Vec<DenseTensor>>,
    pub rho: f64,
}

impl AdmmState {
    /// Zero-initialized state for `c`.
    pub fn new(c: &TnComponent, rho: f64) -> Self {
        let n = c.order();
        let zeros = |i: usize| vec![DenseTensor::zeros(c.factor(i).dims()); n];
        Self {
            g: (0..n).map(zeros).collect(),
            y: (0..n).map(zeros).collect(),
            rho,
        }
    }

    /// Whether every `G` and `Y` has the shape of the matching factor.
    pub fn matches(&self, c: &TnComponent) -> bool {
        (0..c.order()).all(|i| {
            let d = c.factor(i).dims();
            self.g[i].iter().chain(&self.y[i]).all(|t| t.dims() == d)
        })
    }

    /// Appends the slices added by growing edge `(i, j)`: `G` copies the new
    /// factor slice, `Y` gets zeros.
    pub fn grow(&mut self, c: &TnComponent, i: usize, j: usize) {
        for (a, b) in [(i, j), (j, i)] {
            let f = c.factor(a);
            let new_index = f.dims()[b] - 1;
            let stride = f.strides()[b];
            for g in self.g[a].iter_mut() {
                let mut src = (0..f.len()).filter(|&p| (p / stride) % f.dims()[b] == new_index);
                *g = extend_mode(g, b, 1, || f.as_slice()[src.next().expect("slice entry")]);
            }
            for y in self.y[a].iter_mut() {
                *y = extend_mode(y, b, 1, || 0.0);
            }
        }
        debug_assert!(self.matches(c));
    }

    /// `Σ_{i,n} ||G_n^{(i)} - Z^{(i)}||_F`.
    pub fn primal_residual(&self, c: &TnComponent) -> f64 {
        let mut total = 0.0;
        for (i, gs) in self.g.iter().enumerate() {
            for g in gs {
                total += g.sub(c.factor(i)).expect("state shape").norm();
            }
        }
        total
    }
}

/// `Z^{(i)}_(i) = (Σ_n (ρ G_n + Y_n)_(i) + λ T_(i) B)(λ BᵀB + ρ N I)⁻¹` with
/// `B` the prefix matricization of the network without factor `i`.
pub fn admm_update_factor(
    c: &TnComponent,
    state: &AdmmState,
    target: &DenseTensor,
    i: usize,
    lambda: f64,
) -> Result<TnComponent> {
    if target.dims() != c.physical_dims().as_slice() {
        return Err(Error::shape("target dims differ from component dims"));
    }
    if i >= c.order() {
        return Err(Error::ModeOutOfRange { mode: i, order: c.order() });
    }
    if !state.matches(c) {
        return Err(Error::shape("ADMM state does not match the component"));
    }
    let mut out = c.clone();
    let t_i = target.matricize_mode(i)?.matrix;
    admm_update_in_place(&mut out, state, &t_i, i, lambda);
    Ok(out)
}

fn admm_update_in_place(c: &mut TnComponent, state: &AdmmState, t_i: &DMatrix<f64>, i: usize, lambda: f64) -> DMatrix<f64> {
    let n = c.order();
    let rho = state.rho;
    let dims = c.factor(i).dims().to_vec();
    let mut acc = DenseTensor::zeros(&dims);
    for m in 0..n {
        acc.add_assign(&state.g[i][m].scale(rho));
        acc.add_assign(&state.y[i][m]);
    }
    let mut rhs = acc.matricize_mode(i).expect("valid mode").matrix;
    let (rows, p) = (rhs.nrows(), rhs.ncols());
    let b;
    let mut lhs;
    if n == 1 {
        b = DMatrix::from_element(1, 1, 1.0);
        rhs += t_i * lambda;
        lhs = DMatrix::from_element(1, 1, lambda);
    } else {
        b = c.excluded_basis(i);
        let tb = gemm(t_i.nrows(), t_i.ncols(), p, t_i.as_slice(), false, b.as_slice(), false);
        for (r, v) in rhs.as_mut_slice().iter_mut().zip(&tb) {
            *r += lambda * v;
        }
        lhs = c.excluded_gram(i) * lambda;
    }
    for d in 0..p {
        lhs[(d, d)] += rho * n as f64;
    }
    // Z L = R with L symmetric positive definite: solve L Zᵀ = Rᵀ.
    let chol = lhs.cholesky().expect("regularized Gram matrix is positive definite");
    let z = chol.solve(&rhs.transpose()).transpose();
    debug_assert_eq!(z.shape(), (rows, p));
    let f = fold_matrix(&z, &dims, Grouping::Mode(i)).expect("factor shape");
    c.set_factor(i, f).expect("same shape");
    b
}

/// Whether the nuclear-norm term of mode `n` of factor `i` is active: a
/// matricization with a single row or column is skipped.
fn svt_active(c: &TnComponent, i: usize, n: usize) -> bool {
    let f = c.factor(i);
    let rows = f.dims()[n];
    rows > 1 && f.len() / rows > 1
}

/// `G_n^{(i)} = fold_n(D_{1/ρ}(unfold_n(Z^{(i)} - Y_n^{(i)} / ρ)))`; returns
/// the new value and its nuclear norm (0 for skipped modes).
pub fn admm_update_aux(c: &TnComponent, state: &AdmmState, i: usize, n: usize) -> Result<(DenseTensor, f64)> {
    if i >= c.order() || n >= c.order() {
        return Err(Error::ModeOutOfRange { mode: i.max(n), order: c.order() });
    }
    let rho = state.rho;
    let v = c.factor(i).sub(&state.y[i][n].scale(1.0 / rho))?;
    if !svt_active(c, i, n) {
        return Ok((v, 0.0));
    }
    let unfolded = v.matricize_mode(n)?;
    let (shrunk, nuclear) = svt_with_norm(&unfolded.matrix, 1.0 / rho);
    Ok((fold_matrix(&shrunk, v.dims(), Grouping::Mode(n))?, nuclear))
}

/// `Y_n^{(i)} + ρ (G_n^{(i)} - Z^{(i)})`.
pub fn admm_update_multiplier(state: &AdmmState, c: &TnComponent, i: usize, n: usize) -> Result<DenseTensor> {
    if i >= c.order() || n >= c.order() {
        return Err(Error::ModeOutOfRange { mode: i.max(n), order: c.order() });
    }
    let rho = state.rho;
    let gap = state.g[i][n].sub(c.factor(i))?;
    state.y[i][n].zip_with(&gap, "multiplier update", |y, d| y + rho * d)
}

struct AdmmSweeper<'a> {
    cfg: &'a AdmmConfig,
    state: Option<AdmmState>,
    objective: f64,
    primal: f64,
}

impl Sweeper for AdmmSweeper<'_> {
    fn sweep<R: Rng + ?Sized>(&mut self, c: &mut TnComponent, target: &DenseTensor, _rng: &mut R) -> DenseTensor {
        let state = self.state.get_or_insert_with(|| AdmmState::new(c, self.cfg.rho));
        let n = c.order();
        let mut last = None;
        for i in 0..n {
            let t_i = target.matricize_mode(i).expect("valid mode").matrix;
            last = Some((i, admm_update_in_place(c, state, &t_i, i, self.cfg.lambda)));
        }
        let mut nuclear = 0.0;
        for i in 0..n {
            for m in 0..n {
                let (g, nn) = admm_update_aux(c, state, i, m).expect("consistent state");
                state.g[i][m] = g;
                nuclear += nn;
            }
        }
        for i in 0..n {
            for m in 0..n {
                state.y[i][m] = admm_update_multiplier(state, c, i, m).expect("consistent state");
            }
        }
        let recovered = match last {
            Some((i, b)) if n > 1 => crate::atl::recover_from_basis(c, i, &b),
            _ => c.recover(),
        };
        self.primal = state.primal_residual(c);
        let fit = target.sub(&recovered).expect("same shape").norm_sq();
        self.objective = nuclear + 0.5 * self.cfg.lambda * fit;
        state.rho = (state.rho * self.cfg.rho_growth).min(self.cfg.rho_max);
        recovered
    }

    fn grown(&mut self, c: &TnComponent, i: usize, j: usize) {
        if let Some(state) = self.state.as_mut() {
            state.grow(c, i, j);
        }
    }

    fn log_fields(&self) -> String {
        let rho = self.state.as_ref().map_or(self.cfg.rho, |s| s.rho);
        format!(
            " rho={rho:.6e} primal_residual={:.6e} objective={:.6e}",
            self.primal, self.objective
        )
    }
}

/// Completion with nuclear-norm-regularized factors, solved by ADMM.
pub fn mtnr_admm_complete<R: Rng + ?Sized>(
    m: &DenseTensor,
    mask: &ObservationMask,
    cfg: &AdmmConfig,
    rng: &mut R,
) -> Result<Completion> {
    check_inputs(m, mask)?;
    cfg.validate(m.dims())?;
    complete_with(m, mask, &cfg.atl, |target, refresh, k| {
        let mut sweeper = AdmmSweeper {
            cfg,
            state: None,
            objective: 0.0,
            primal: 0.0,
        };
        fit_loop(target, refresh, &mut sweeper, &cfg.atl, k, rng)
    })
}
