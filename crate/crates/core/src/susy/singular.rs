use std::sync::Arc;

use serde::Serialize;

use crate::error::Result;
use crate::numerics::{Grid, SampledFunction};
use crate::profile::MassProfile;
use crate::solver::{discretize, solve_spectrum, BoundaryCondition, SpectrumReport};

/// Zeros of a transform's denominator and the regular intervals between them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularityReport {
    pub locations: Vec<f64>,
    /// Closed intervals `[a, b]` between consecutive zeros and the grid ends.
    pub subdomains: Vec<(f64, f64)>,
    #[serde(skip)]
    ranges: Vec<(usize, usize)>,
    #[serde(skip)]
    mask: Vec<bool>,
    pub mask_radius: usize,
}

impl SingularityReport {
    /// Interior sign changes (and exact interior zeros) of `denominator`,
    /// ignoring samples below `1e-12` of its peak.
    pub fn from_denominator(grid: &Arc<Grid>, denominator: &[f64], radius: usize) -> Self {
        let n = denominator.len();
        let pts = grid.points();
        let h = grid.spacing();
        let peak = denominator
            .iter()
            .filter(|v| v.is_finite())
            .fold(0.0f64, |a, v| a.max(v.abs()));
        let floor = 1e-12 * peak;
        // (location, last index of the left piece, first index of the right piece)
        let mut zeros: Vec<(f64, usize, usize)> = Vec::new();
        for i in 1..n - 1 {
            let (a, b) = (denominator[i - 1], denominator[i + 1]);
            if denominator[i] == 0.0 && a * b < 0.0 && a.abs().max(b.abs()) > floor {
                zeros.push((pts[i], i, i));
            }
        }
        for i in 0..n - 1 {
            let (a, b) = (denominator[i], denominator[i + 1]);
            if a * b < 0.0 && a.abs().max(b.abs()) > floor {
                let t = a / (a - b);
                zeros.push((pts[i] + t * h, i, i + 1));
            }
        }
        zeros.sort_by(|p, q| p.0.total_cmp(&q.0));

        let mut mask = vec![false; n];
        for &(z, _, _) in &zeros {
            for (j, &x) in pts.iter().enumerate() {
                if (x - z).abs() <= radius as f64 * h * (1.0 + 1e-9) {
                    mask[j] = true;
                }
            }
        }
        let mut ranges = Vec::with_capacity(zeros.len() + 1);
        let mut start = 0;
        for &(_, left_end, right_start) in &zeros {
            if left_end > start {
                ranges.push((start, left_end));
            }
            start = right_start;
        }
        if n - 1 > start {
            ranges.push((start, n - 1));
        }
        let subdomains = ranges.iter().map(|&(a, b)| (pts[a], pts[b])).collect();
        Self {
            locations: zeros.iter().map(|z| z.0).collect(),
            subdomains,
            ranges,
            mask,
            mask_radius: radius,
        }
    }

    pub fn is_regular(&self) -> bool {
        self.locations.is_empty()
    }

    /// `true` at samples within the mask radius of a pole.
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Index ranges `start..=end` of the subdomains.
    pub fn ranges(&self) -> &[(usize, usize)] {
        &self.ranges
    }

    /// Points to keep in residual norms: unmasked and `margin` away from the grid ends.
    pub fn keep(&self, margin: usize) -> Vec<bool> {
        let n = self.mask.len();
        (0..n)
            .map(|i| !self.mask[i] && i >= margin && i + margin < n)
            .collect()
    }
}

/// Oracle spectrum on one regular subdomain.
#[derive(Debug, Clone)]
pub struct SubdomainSpectrum {
    pub interval: (f64, f64),
    pub report: SpectrumReport,
}

/// Solves each subdomain with Dirichlet conditions at its ends (poles and
/// truncation points). Subdomains too small for a meaningful solve are skipped;
/// `k` is capped at what each subdomain can support.
pub fn subdomain_spectra(
    profile: &MassProfile,
    potential: &SampledFunction,
    report: &SingularityReport,
    k: usize,
    hbar: f64,
) -> Result<Vec<SubdomainSpectrum>> {
    let mut out = Vec::new();
    for &(a, b) in report.ranges() {
        let len = b - a + 1;
        if len < 64 {
            continue;
        }
        let v = potential.restrict(a, b)?;
        let op = discretize(profile, &v, BoundaryCondition::dirichlet(), hbar)?;
        let k_eff = k.min((len - 1) / 4);
        let spectrum = solve_spectrum(&op, k_eff)?;
        out.push(SubdomainSpectrum {
            interval: (v.grid().x_min(), v.grid().x_max()),
            report: spectrum,
        });
    }
    Ok(out)
}
