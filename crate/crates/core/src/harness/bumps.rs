//! Compactly supported smooth test functions for generator-convergence
//! checks: the quartic bump (1 - u^2)^4 on |u| <= 1, u = (x - c)/w, and
//! its x- and x^2-weighted variants, with exact first and second
//! derivatives (the bump is C^3, so the generator sees smooth data).

use crate::pearson::{C2Fn, DiffusionKind};

/// x^power * (1 - u^2)^4 with u = (x - center)/width, zero off-support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpFn {
    pub center: f64,
    pub width: f64,
    pub power: u32,
}

impl BumpFn {
    fn bump_parts(&self, x: f64) -> (f64, f64, f64) {
        let u = (x - self.center) / self.width;
        if u.abs() >= 1.0 {
            return (0.0, 0.0, 0.0);
        }
        let s = 1.0 - u * u;
        let psi = s.powi(4);
        let d1 = -8.0 * u * s.powi(3) / self.width;
        let d2 = 8.0 * s.powi(2) * (7.0 * u * u - 1.0) / (self.width * self.width);
        (psi, d1, d2)
    }
}

impl C2Fn for BumpFn {
    fn value(&self, x: f64) -> f64 {
        let (psi, _, _) = self.bump_parts(x);
        match self.power {
            0 => psi,
            1 => x * psi,
            _ => x * x * psi,
        }
    }

    fn d1(&self, x: f64) -> f64 {
        let (psi, dpsi, _) = self.bump_parts(x);
        match self.power {
            0 => dpsi,
            1 => psi + x * dpsi,
            _ => 2.0 * x * psi + x * x * dpsi,
        }
    }

    fn d2(&self, x: f64) -> f64 {
        let (psi, dpsi, ddpsi) = self.bump_parts(x);
        match self.power {
            0 => ddpsi,
            1 => 2.0 * dpsi + x * ddpsi,
            _ => 2.0 * psi + 4.0 * x * dpsi + x * x * ddpsi,
        }
    }
}

/// The three-bump suite {psi, x psi, x^2 psi} centered to cover the bulk
/// of each diffusion's state space.
pub fn bump_suite(kind: DiffusionKind) -> Vec<BumpFn> {
    let (center, width) = match kind {
        DiffusionKind::Ou => (0.0, 3.0),
        DiffusionKind::Jacobi => (0.5, 0.45),
        DiffusionKind::Cir => (3.0, 2.8),
    };
    (0..3).map(|power| BumpFn { center, width, power }).collect()
}
