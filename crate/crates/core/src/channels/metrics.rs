//! Distances between states (or between Choi matrices).

use crate::linalg::{psd_sqrt, trace_norm, CMat};

/// `½‖a − b‖₁`, from singular values.
pub fn trace_distance(a: &CMat, b: &CMat) -> f64 {
    0.5 * trace_norm(&(a - b))
}

/// `(Tr √(√ρ σ √ρ))²`.
pub fn fidelity(rho: &CMat, sigma: &CMat) -> f64 {
    let s = psd_sqrt(rho);
    let inner = &s * sigma * &s;
    let t = psd_sqrt(&inner).trace().re;
    t * t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, cr, projector, CVec};

    fn bloch(x: f64, y: f64, z: f64) -> CMat {
        CMat::from_row_slice(2, 2, &[cr(1.0 + z), c(x, -y), c(x, y), cr(1.0 - z)]) * cr(0.5)
    }

    #[test]
    fn identical_and_orthogonal_states() {
        let rho = bloch(0.1, 0.2, 0.3);
        assert!(trace_distance(&rho, &rho) < 1e-15);
        assert!((fidelity(&rho, &rho) - 1.0).abs() < 1e-12);
        let zero = projector(&CVec::from_vec(vec![cr(1.0), cr(0.0)]));
        let one = projector(&CVec::from_vec(vec![cr(0.0), cr(1.0)]));
        assert!((trace_distance(&zero, &one) - 1.0).abs() < 1e-15);
        assert!(fidelity(&zero, &one).abs() < 1e-15);
    }

    #[test]
    fn qubit_trace_distance_is_half_bloch_distance() {
        let (a, b) = ([0.3, -0.4, 0.5], [-0.1, 0.2, 0.6]);
        let d = ((a[0] - b[0]) as f64).hypot(a[1] - b[1]).hypot(a[2] - b[2]);
        let td = trace_distance(&bloch(a[0], a[1], a[2]), &bloch(b[0], b[1], b[2]));
        assert!((td - d / 2.0).abs() < 1e-14);
    }

    #[test]
    fn qubit_fidelity_closed_form() {
        let (a, b) = ([0.3, -0.4, 0.5], [-0.1, 0.2, 0.6]);
        let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        let na: f64 = a.iter().map(|x| x * x).sum();
        let nb: f64 = b.iter().map(|x| x * x).sum();
        let expected = 0.5 * (1.0 + dot + ((1.0 - na) * (1.0 - nb)).sqrt());
        let f = fidelity(&bloch(a[0], a[1], a[2]), &bloch(b[0], b[1], b[2]));
        assert!((f - expected).abs() < 1e-12);
    }
}
