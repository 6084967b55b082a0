use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cell::{build_effective_table, CellOptions, EffectiveTable};
use crate::error::{Error, Result};
use crate::hj_solver::{estimate_scheme, solve_oscillatory, InitialData, OscillatoryHamiltonian, SolveOptions};
use crate::model::{HamiltonianModel, PotentialField};
use crate::scalar::Real;

/// Settings of [`quasiconvexification_check`].
#[derive(Clone, Debug)]
pub struct QuasiconvexParams<T> {
    pub p_radius: T,
    pub steps: usize,
    pub cell: CellOptions<T>,
    /// Reciprocal of the eps used for the paired solver run.
    pub eps_recip: u32,
    pub nx: usize,
    pub horizon: T,
    pub samples: usize,
    pub seed: u64,
}

impl<T: Real> QuasiconvexParams<T> {
    pub fn for_dim(dim: usize) -> Self {
        Self {
            p_radius: T::lit(3.0),
            steps: if dim == 1 { 12 } else { 6 },
            cell: CellOptions { tolerance: T::lit(0.1), ..CellOptions::for_dim(dim) },
            eps_recip: 16,
            nx: if dim == 1 { 16 * 64 } else { 256 },
            horizon: T::lit(0.5),
            samples: 2000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct QuasiconvexReport<T: Real> {
    pub double_well: EffectiveTable<T>,
    pub truncated: EffectiveTable<T>,
    /// `max_k |Hbar(p_k) - Hbar~(p_k)|`.
    pub max_discrepancy: T,
    /// Largest ratio of the node discrepancy to the summed node error estimates.
    pub max_discrepancy_ratio: T,
    /// Nodes whose discrepancy exceeds twice the summed error estimates.
    pub disagreeing_nodes: Vec<usize>,
    /// `min H - H~` over random samples; nonnegative when the ordering holds.
    pub min_hamiltonian_gap: T,
    /// `min (u~ - u)` over all grid nodes and snapshots of the paired run.
    pub min_solution_gap: T,
    /// `osc V < 1`: equality of the effective Hamiltonians is not claimed.
    pub uncharted: bool,
}

impl<T: Real> QuasiconvexReport<T> {
    pub fn tables_agree(&self) -> bool {
        self.disagreeing_nodes.is_empty()
    }

    pub fn ordering_holds(&self) -> bool {
        self.min_hamiltonian_gap >= T::zero() && self.min_solution_gap >= T::zero()
    }
}

/// Compares the double-well Hamiltonian `max(|p| - 1, 1 - |p|) + V` with its truncation
/// `max(0, |p| - 1) + V`: effective tables node by node, the pointwise ordering `H >= H~`, and
/// the solution ordering `u~ >= u` of the monotone scheme run with a shared viscosity.
pub fn quasiconvexification_check<T: Real>(v: &PotentialField<T>, params: &QuasiconvexParams<T>) -> Result<QuasiconvexReport<T>> {
    let dim = v.dim();
    let dw = HamiltonianModel::double_well(v.clone());
    let te = HamiltonianModel::truncated_eikonal(v.clone());
    let double_well = build_effective_table(&dw, params.p_radius, params.steps, &params.cell)?;
    let truncated = build_effective_table(&te, params.p_radius, params.steps, &params.cell)?;
    if double_well.is_flagged() || truncated.is_flagged() {
        return Err(Error::FlaggedTable);
    }
    let mut max_discrepancy = T::zero();
    let mut max_ratio = T::zero();
    let mut disagreeing = Vec::new();
    for k in 0..double_well.len() {
        let d = (double_well.value(k) - truncated.value(k)).abs();
        let budget = double_well.error(k) + truncated.error(k);
        max_discrepancy = max_discrepancy.max(d);
        let ratio = if budget > T::zero() { d / budget } else if d > T::zero() { T::infinity() } else { T::zero() };
        max_ratio = max_ratio.max(ratio);
        if d > T::lit(2.0) * budget {
            disagreeing.push(k);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut min_h_gap = T::infinity();
    for _ in 0..params.samples {
        let y: Vec<T> = (0..dim).map(|_| T::lit(rng.gen_range(0.0..1.0))).collect();
        let p: Vec<T> = (0..dim).map(|_| T::lit(rng.gen_range(-1.0..1.0)) * params.p_radius).collect();
        min_h_gap = min_h_gap.min(dw.eval_h(&y, &p)? - te.eval_h(&y, &p)?);
    }

    let g = InitialData::sin(dim);
    let k = params.eps_recip;
    let pa = estimate_scheme(&OscillatoryHamiltonian::new(&dw, k, params.nx)?, &g, params.nx)?;
    let pb = estimate_scheme(&OscillatoryHamiltonian::new(&te, k, params.nx)?, &g, params.nx)?;
    let theta = pa.theta[0].max(pa.theta[1]).max(pb.theta[0]).max(pb.theta[1]);
    let opts = SolveOptions {
        theta: Some(theta),
        snapshot_times: vec![params.horizon / T::lit(2.0), params.horizon],
        record_initial: false,
        ..Default::default()
    };
    let u = solve_oscillatory(&dw, k, &g, params.horizon, params.nx, &opts)?;
    let ut = solve_oscillatory(&te, k, &g, params.horizon, params.nx, &opts)?;
    let mut min_u_gap = T::infinity();
    for s in 0..u.times().len() {
        for (a, b) in ut.snapshot(s).iter().zip(u.snapshot(s)) {
            min_u_gap = min_u_gap.min(*a - *b);
        }
    }
    Ok(QuasiconvexReport {
        double_well,
        truncated,
        max_discrepancy,
        max_discrepancy_ratio: max_ratio,
        disagreeing_nodes: disagreeing,
        min_hamiltonian_gap: min_h_gap,
        min_solution_gap: min_u_gap,
        uncharted: v.oscillation() < T::one(),
    })
}
