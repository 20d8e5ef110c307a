//! Bona-Smith mollifier and frequency-envelope diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolver::Trajectory;
use crate::fit::{fit_loglog, LogLogFit};
use crate::littlewood_paley::{max_shell, project, ProjectorSelector};
use crate::semigroup::l4_in_time;
use crate::spectral::{derivative, l2_norm, sobolev_norm, sup_norm, Field};

/// `J_{eta,s} f = exp(-eta |d_x|^s) f`.
pub fn bona_smith(f: &Field, eta: f64, s: f64) -> Result<Field> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParameter(format!("eta must lie in (0, 1], got {eta}")));
    }
    if !(s >= 1.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("s must be at least 1, got {s}")));
    }
    Ok(f.apply_real_multiplier(|xi| (-eta * xi.abs().powf(s)).exp()))
}

/// Log-log slope of `||J_{eta,s} f||_{H^{s+j}}` against `eta`.
pub fn bona_smith_rate(f: &Field, s: f64, j: f64, etas: &[f64]) -> Result<LogLogFit> {
    if !(j > 0.0) {
        return Err(Error::InvalidParameter(format!("j must be positive, got {j}")));
    }
    if etas.len() < 4 {
        return Err(Error::InvalidParameter(format!(
            "need at least 4 eta values, got {}",
            etas.len()
        )));
    }
    if etas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter("eta values must decrease".into()));
    }
    if etas[0] / etas[etas.len() - 1] < 100.0 {
        return Err(Error::InvalidParameter(
            "eta values must span at least two decades".into(),
        ));
    }
    let norms = etas
        .iter()
        .map(|&eta| bona_smith(f, eta, s).map(|g| sobolev_norm(&g, s + j)))
        .collect::<Result<Vec<_>>>()?;
    fit_loglog(etas, &norms)
}

/// `sum_m 2^{-2 delta |m|}`, the bound on `sum_k c_k^2` for the minimal envelope.
pub fn summability_constant(delta: f64) -> f64 {
    1.0 + 2.0 / (2f64.powf(2.0 * delta) - 1.0)
}

/// A slowly varying majorant of the shell norms of some datum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub s: f64,
    pub delta: f64,
    /// Normalization `R >= ||phi||_{H^s}`.
    pub r: f64,
    /// `c[k]` for shells `k = 0..=K_max`.
    pub c: Vec<f64>,
}

#[derive(Serialize)]
struct EnvelopeExport {
    s: f64,
    delta: f64,
    r: f64,
    shells: Vec<ShellValue>,
}

#[derive(Serialize)]
struct ShellValue {
    k: usize,
    c: f64,
}

impl Envelope {
    pub fn max_shell(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.c.iter().map(|v| v * v).sum()
    }

    /// Largest violation of `c_j <= 2^{delta |j - k|} c_k` over all pairs,
    /// relative to `max c` (zero when it holds).
    pub fn slow_variation_excess(&self) -> f64 {
        let top = self.c.iter().cloned().fold(0.0, f64::max);
        if top == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for (j, &cj) in self.c.iter().enumerate() {
            for (k, &ck) in self.c.iter().enumerate() {
                let bound = 2f64.powf(self.delta * (j as f64 - k as f64).abs()) * ck;
                worst = worst.max((cj - bound) / top);
            }
        }
        worst
    }

    /// Largest violation of `||P_k phi||_{H^s} / R <= c_k`.
    pub fn domination_excess(&self, phi: &Field) -> f64 {
        shell_norms(phi, self.s, self.max_shell() as i32)
            .iter()
            .zip(&self.c)
            .map(|(a, c)| a / self.r - c)
            .fold(0.0, f64::max)
    }

    /// JSON with `k, c_k` pairs and the `s, delta, R` metadata.
    pub fn to_json(&self) -> Result<String> {
        let export = EnvelopeExport {
            s: self.s,
            delta: self.delta,
            r: self.r,
            shells: self.c.iter().enumerate().map(|(k, &c)| ShellValue { k, c }).collect(),
        };
        Ok(serde_json::to_string_pretty(&export)?)
    }
}

/// `||P_k phi||_{H^s}` for `k = 0..=k_max`.
pub fn shell_norms(phi: &Field, s: f64, k_max: i32) -> Vec<f64> {
    (0..=k_max)
        .map(|k| sobolev_norm(&project(phi, ProjectorSelector::Band(k)), s))
        .collect()
}

/// Minimal envelope `c_k = max_j 2^{-delta |j - k|} ||P_j phi||_{H^s} / R`.
pub fn build_envelope(phi: &Field, s: f64, delta: f64, r: f64) -> Result<Envelope> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("s must be positive, got {s}")));
    }
    if !(delta > 0.0 && delta < (0.01f64).min(s / 2.0)) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, min(1/100, s/2)), got {delta}"
        )));
    }
    let norm = sobolev_norm(phi, s);
    if !(r > 0.0) || r < norm {
        return Err(Error::InvalidParameter(format!(
            "R = {r} is below ||phi||_H^s = {norm}"
        )));
    }
    let k_max = max_shell(phi.grid());
    let a: Vec<f64> = shell_norms(phi, s, k_max).into_iter().map(|v| v / r).collect();
    let c = (0..a.len())
        .map(|k| {
            a.iter()
                .enumerate()
                .map(|(j, &aj)| 2f64.powf(-delta * (j as f64 - k as f64).abs()) * aj)
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(Envelope { s, delta, r, c })
}

/// Discrete `S_T = L^inf_T L^2 cap L^4_T L^inf` norm of one time series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeNorm {
    pub linf_l2: f64,
    pub l4_linf: f64,
}

impl SpaceTimeNorm {
    pub fn value(&self) -> f64 {
        self.linf_l2 + self.l4_linf
    }

    pub fn of(times: &[f64], fields: &[Field]) -> Self {
        let linf_l2 = fields.iter().map(l2_norm).fold(0.0, f64::max);
        let sups: Vec<f64> = fields.iter().map(sup_norm).collect();
        SpaceTimeNorm {
            linf_l2,
            l4_linf: l4_in_time(times, &sups),
        }
    }
}

/// `||.||_{S_t}` on every prefix `[t_0, t_n]` of the samples.
fn running_space_time(times: &[f64], l2s: &[f64], sups: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(times.len());
    let mut max_l2: f64 = 0.0;
    let mut acc = 0.0;
    for n in 0..times.len() {
        max_l2 = max_l2.max(l2s[n]);
        if n > 0 {
            acc += 0.5 * (times[n] - times[n - 1]) * (sups[n].powi(4) + sups[n - 1].powi(4));
        }
        out.push(max_l2 + acc.powf(0.25));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellProfile {
    pub k: usize,
    pub c: f64,
    pub norm: SpaceTimeNorm,
    /// `2^{sk} c_k^{-1} ||P_k v||_{S_T}`; `None` when `c_k = 0`.
    pub weighted: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeDiagnostic {
    /// `M(T)` over the whole trajectory.
    pub m: f64,
    /// `M` over the first sample alone.
    pub m_initial: f64,
    /// `(t, M(t))` for each sample time.
    pub history: Vec<(f64, f64)>,
    pub profile: Vec<ShellProfile>,
    /// Shells with `c_k = 0` but a nonzero piece of `v`.
    pub flagged: Vec<usize>,
}

/// `M(T) = sup_k 2^{sk} c_k^{-1} ||P_k v||_{S_T}` on a gauged trajectory.
pub fn envelope_diagnostic(traj_v: &Trajectory, env: &Envelope, s: f64) -> Result<EnvelopeDiagnostic> {
    if traj_v.is_empty() {
        return Err(Error::TrajectoryMismatch("empty trajectory".into()));
    }
    let times = traj_v.times();
    let scale = traj_v.fields().iter().map(l2_norm).fold(0.0, f64::max);
    let mut per_shell = Vec::with_capacity(env.c.len());
    let mut flagged = Vec::new();
    for (k, &ck) in env.c.iter().enumerate() {
        let pieces: Vec<Field> = traj_v
            .fields()
            .iter()
            .map(|v| project(v, ProjectorSelector::Band(k as i32)))
            .collect();
        let weight = 2f64.powf(s * k as f64);
        let l2s: Vec<f64> = pieces.iter().map(l2_norm).collect();
        let sups: Vec<f64> = pieces.iter().map(sup_norm).collect();
        let running = running_space_time(times, &l2s, &sups);
        let norm = SpaceTimeNorm {
            linf_l2: l2s.iter().cloned().fold(0.0, f64::max),
            l4_linf: l4_in_time(times, &sups),
        };
        let weighted = if ck > 0.0 {
            Some(weight * norm.value() / ck)
        } else {
            if norm.value() > 1e-13 * scale.max(f64::MIN_POSITIVE) {
                flagged.push(k);
            }
            None
        };
        per_shell.push((
            ShellProfile {
                k,
                c: ck,
                norm,
                weighted,
            },
            running,
            weight,
        ));
    }
    let history: Vec<(f64, f64)> = times
        .iter()
        .enumerate()
        .map(|(n, &t)| {
            let m = per_shell
                .iter()
                .filter(|(p, _, _)| p.c > 0.0)
                .map(|(p, running, w)| w * running[n] / p.c)
                .fold(0.0, f64::max);
            (t, m)
        })
        .collect();
    Ok(EnvelopeDiagnostic {
        m: history.last().map(|h| h.1).unwrap_or(0.0),
        m_initial: history[0].1,
        history,
        profile: per_shell.into_iter().map(|(p, _, _)| p).collect(),
        flagged,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRatio {
    pub k: i32,
    /// `||P_{>=k} v||_{L^inf H^s} + ||P_{>=k} v||_{L^4 W'^{1,inf}}`
    pub lhs: f64,
    /// `(sum_{l >= k} c_l^2)^{1/2}`
    pub tail_envelope: f64,
    /// Zero when both sides vanish; `None` on a violation.
    pub ratio: Option<f64>,
    /// The envelope tail vanishes but the field tail does not.
    pub violation: bool,
}

pub fn tail_bound_check(traj_v: &Trajectory, env: &Envelope, s: f64, k: i32) -> Result<TailRatio> {
    if traj_v.is_empty() {
        return Err(Error::TrajectoryMismatch("empty trajectory".into()));
    }
    let tails: Vec<Field> = traj_v
        .fields()
        .iter()
        .map(|v| project(v, ProjectorSelector::AtLeast(k)))
        .collect();
    let hs = tails.iter().map(|f| sobolev_norm(f, s)).fold(0.0, f64::max);
    let grads: Vec<f64> = tails.iter().map(|f| sup_norm(&derivative(f))).collect();
    let lhs = hs + l4_in_time(traj_v.times(), &grads);
    let start = k.max(0) as usize;
    let tail_envelope = env.c.iter().skip(start).map(|v| v * v).sum::<f64>().sqrt();
    let scale = traj_v.fields().iter().map(|f| sobolev_norm(f, s)).fold(0.0, f64::max);
    let negligible = lhs <= 1e-13 * scale.max(f64::MIN_POSITIVE);
    let (ratio, violation) = if tail_envelope > 0.0 {
        (Some(lhs / tail_envelope), false)
    } else if negligible {
        (Some(0.0), false)
    } else {
        (None, true)
    };
    Ok(TailRatio {
        k,
        lhs,
        tail_envelope,
        ratio,
        violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn mollifier_on_a_tone() {
        let g = make_grid(128, 2.0 * std::f64::consts::PI, 0.0).unwrap();
        let f = Field::tone(&g, 5.0);
        let j = bona_smith(&f, 0.1, 1.5).unwrap();
        let factor = (-0.1 * 5f64.powf(1.5)).exp();
        let want = f.scale(num_complex::Complex64::new(factor, 0.0));
        assert!(l2_norm(&j.sub(&want).unwrap()) < 1e-14);
    }

    #[test]
    fn mollifier_parameter_ranges() {
        let g = make_grid(16, 1.0, 0.0).unwrap();
        let f = Field::zeros(&g);
        assert!(bona_smith(&f, 0.0, 1.0).is_err());
        assert!(bona_smith(&f, 1.5, 1.0).is_err());
        assert!(bona_smith(&f, 0.5, 0.5).is_err());
        assert!(bona_smith(&f, 1.0, 1.0).is_ok());
    }

    #[test]
    fn rate_needs_a_proper_ladder() {
        let g = make_grid(64, 20.0, -10.0).unwrap();
        let f = Field::from_real_fn(&g, |x| (-x * x).exp());
        assert!(bona_smith_rate(&f, 1.0, 1.0, &[0.1, 0.05, 0.02]).is_err());
        assert!(bona_smith_rate(&f, 1.0, 1.0, &[0.1, 0.05, 0.02, 0.01]).is_err());
        assert!(bona_smith_rate(&f, 1.0, 1.0, &[0.01, 0.1, 0.02, 0.001]).is_err());
        assert!(bona_smith_rate(&f, 1.0, 1.0, &[0.1, 0.03, 0.01, 0.001]).is_ok());
    }

    #[test]
    fn zero_datum_has_zero_envelope() {
        let g = make_grid(128, 20.0, -10.0).unwrap();
        let env = build_envelope(&Field::zeros(&g), 1.0, 0.005, 1.0).unwrap();
        assert!(env.c.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn single_tone_envelope_is_a_geometric_tent() {
        let length = 16.0 * std::f64::consts::PI;
        let g = make_grid(512, length, 0.0).unwrap();
        // |xi| = 4 sits where the band-2 symbol is one
        let f = Field::tone(&g, 4.0);
        let r = 2.0 * sobolev_norm(&f, 1.0);
        let env = build_envelope(&f, 1.0, 0.005, r).unwrap();
        let peak = sobolev_norm(&f, 1.0) / r;
        for (k, &c) in env.c.iter().enumerate() {
            let want = 2f64.powf(-0.005 * (k as f64 - 2.0).abs()) * peak;
            assert!((c - want).abs() < 1e-14 * peak, "shell {k}");
        }
    }

    #[test]
    fn envelope_rejects_small_radius_and_bad_delta() {
        let g = make_grid(128, 20.0, -10.0).unwrap();
        let f = Field::from_real_fn(&g, |x| (-x * x).exp());
        let n = sobolev_norm(&f, 1.0);
        assert!(build_envelope(&f, 1.0, 0.005, 0.5 * n).is_err());
        assert!(build_envelope(&f, 1.0, 0.02, 2.0 * n).is_err());
        assert!(build_envelope(&f, 0.004, 0.005, 2.0 * n).is_err());
    }

    #[test]
    fn envelope_json_lists_shells() {
        let env = Envelope {
            s: 1.0,
            delta: 0.005,
            r: 0.5,
            c: vec![0.1, 0.2],
        };
        let v: serde_json::Value = serde_json::from_str(&env.to_json().unwrap()).unwrap();
        assert_eq!(v["shells"][1]["k"], 1);
        assert_eq!(v["shells"][1]["c"], 0.2);
        assert_eq!(v["r"], 0.5);
    }

    #[test]
    fn zero_trajectory_has_zero_m() {
        let g = make_grid(128, 20.0, -10.0).unwrap();
        let traj = Trajectory::from_samples(vec![0.0, 1.0], vec![Field::zeros(&g), Field::zeros(&g)]).unwrap();
        let env = Envelope {
            s: 1.0,
            delta: 0.005,
            r: 1.0,
            c: vec![0.5; 6],
        };
        let d = envelope_diagnostic(&traj, &env, 1.0).unwrap();
        assert_eq!(d.m, 0.0);
        assert!(d.flagged.is_empty());
        let t = tail_bound_check(&traj, &env, 1.0, 2).unwrap();
        assert_eq!(t.ratio, Some(0.0));
    }
}
