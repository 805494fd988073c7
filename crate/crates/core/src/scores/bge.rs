//! BGe marginal likelihood for linear-Gaussian data.
//!
//! Uses the closed form with prior mean zero and prior precision `t·I`,
//! `t = α_μ(α_w − p − 1)/(α_μ + 1)`. The local score of node `i` with
//! parents `Pa` (size `l`) is
//!
//! ```text
//! c(l) − (N + α_w − p + l + 1)/2 · ln(T_ii − T_iP T_PP⁻¹ T_Pi) − ½ ln|T_PP|
//! ```
//!
//! where `T` is the posterior scale matrix.

use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::ln_gamma;

use super::{ScoreProvider, SearchSpace};
use crate::error::{Error, Result};
use crate::nodeset::NodeSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BgeParams {
    pub alpha_mu: f64,
    /// Defaults to `p + alpha_mu + 1`.
    pub alpha_w: Option<f64>,
}

impl Default for BgeParams {
    fn default() -> Self {
        BgeParams {
            alpha_mu: 0.1,
            alpha_w: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BgeScorer {
    p: usize,
    m: usize,
    alpha_w: f64,
    tn: DMatrix<f64>,
    consts: Vec<f64>,
}

impl BgeScorer {
    pub fn new(data: &super::DataMatrix, params: BgeParams) -> Result<Self> {
        let p = data.p();
        let m = data.m();
        if m < 2 {
            return Err(Error::Invalid("BGe needs at least 2 samples".into()));
        }
        let am = params.alpha_mu;
        let aw = params.alpha_w.unwrap_or(p as f64 + am + 1.0);
        if !(am > 0.0) {
            return Err(Error::Invalid(format!("alpha_mu must be positive, got {am}")));
        }
        if !(aw > p as f64 + 1.0) {
            return Err(Error::Invalid(format!(
                "alpha_w must exceed p + 1 = {}, got {aw}",
                p + 1
            )));
        }
        let n = m as f64;
        let pf = p as f64;
        let t = am * (aw - pf - 1.0) / (am + 1.0);

        let mut mean = DVector::zeros(p);
        for r in 0..m {
            for c in 0..p {
                mean[c] += data.get(r, c);
            }
        }
        mean /= n;
        let mut tn = DMatrix::from_diagonal_element(p, p, t);
        for r in 0..m {
            let d = DVector::from_iterator(p, (0..p).map(|c| data.get(r, c) - mean[c]));
            tn.ger(1.0, &d, &d, 1.0);
        }
        tn.ger(am * n / (am + n), &mean, &mean, 1.0);

        let consts = (0..p)
            .map(|l| {
                let l = l as f64;
                -(n / 2.0) * std::f64::consts::PI.ln() + 0.5 * (am / (am + n)).ln()
                    + ln_gamma((aw - pf + l + 1.0 + n) / 2.0)
                    - ln_gamma((aw - pf + l + 1.0) / 2.0)
                    + (aw - pf + 2.0 * l + 1.0) / 2.0 * t.ln()
            })
            .collect();
        Ok(BgeScorer {
            p,
            m,
            alpha_w: aw,
            tn,
            consts,
        })
    }

    pub fn alpha_w(&self) -> f64 {
        self.alpha_w
    }

    pub fn local_score(&self, node: usize, parents: NodeSet) -> Result<f64> {
        debug_assert!(!parents.contains(node));
        let pa = parents.to_vec();
        let l = pa.len();
        let a = self.tn[(node, node)];
        let half = (self.m as f64 + self.alpha_w - self.p as f64 + l as f64 + 1.0) / 2.0;
        if l == 0 {
            return Ok(self.consts[0] - half * a.ln());
        }
        let d = DMatrix::from_fn(l, l, |r, c| self.tn[(pa[r], pa[c])]);
        let b = DVector::from_iterator(l, pa.iter().map(|&j| self.tn[(j, node)]));
        let chol = d.cholesky().ok_or_else(|| {
            Error::DegenerateData(format!(
                "scale matrix of parents {pa:?} of node {node} is not positive definite"
            ))
        })?;
        let logdet: f64 = 2.0 * chol.l_dirty().diagonal().iter().map(|x| x.ln()).sum::<f64>();
        let y = chol
            .l_dirty()
            .solve_lower_triangular(&b)
            .expect("cholesky factor is invertible");
        let schur = a - y.norm_squared();
        if !(schur > 0.0) {
            return Err(Error::DegenerateData(format!(
                "residual scale of node {node} given {pa:?} is not positive"
            )));
        }
        Ok(self.consts[l] - half * schur.ln() - logdet / 2.0)
    }
}

fn large_set_warning(count: usize, m: usize) -> Option<String> {
    (count > 0).then(|| {
        format!("{count} parent sets have at least m = {m} parents; BGe scores remain defined")
    })
}

/// BGe tables over a preselected-plus-one search space.
pub fn compute_bge_tables(
    data: &super::DataMatrix,
    space: &SearchSpace,
    params: BgeParams,
) -> Result<ScoreProvider> {
    let scorer = BgeScorer::new(data, params)?;
    let mut big = 0;
    let mut sp = ScoreProvider::from_space(data.names().to_vec(), space, |i, s| {
        if s.len() >= data.m() {
            big += 1;
        }
        scorer.local_score(i, s)
    })?;
    if let Some(w) = large_set_warning(big, data.m()) {
        sp.push_warning(w);
    }
    Ok(sp)
}

/// BGe scores for every parent set of at most `max_parents` nodes.
pub fn compute_bge_listed(
    data: &super::DataMatrix,
    max_parents: usize,
    params: BgeParams,
) -> Result<ScoreProvider> {
    let scorer = BgeScorer::new(data, params)?;
    let p = data.p();
    let mut big = 0;
    let mut lists = Vec::with_capacity(p);
    for i in 0..p {
        let others: Vec<usize> = (0..p).filter(|&j| j != i).collect();
        let mut list = Vec::new();
        let mut stack = vec![(NodeSet::EMPTY, 0usize)];
        while let Some((set, from)) = stack.pop() {
            if set.len() >= data.m() {
                big += 1;
            }
            list.push((set, scorer.local_score(i, set)?));
            if set.len() < max_parents {
                for (k, &j) in others.iter().enumerate().skip(from) {
                    stack.push((set.with(j), k + 1));
                }
            }
        }
        lists.push(list);
    }
    let mut sp = ScoreProvider::from_lists(data.names().to_vec(), lists)?;
    if let Some(w) = large_set_warning(big, data.m()) {
        sp.push_warning(w);
    }
    Ok(sp)
}
