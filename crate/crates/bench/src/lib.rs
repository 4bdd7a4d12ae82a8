//! Fixtures shared by the benchmarks.

use ptshock_core::characteristics::Characteristics;
use ptshock_core::{parse, DeformedSystem, GridSpec};

/// The Lorentzian pulse `1/(1+x^2)` under the deformation `eps`.
pub fn lorentzian(eps: f64) -> (Characteristics, DeformedSystem) {
    let sys = DeformedSystem::burgers(eps).expect("eps is positive");
    let u0 = parse("1/(1+x^2)").expect("profile parses");
    (Characteristics::for_system(u0, &sys), sys)
}

pub fn grid(x_min: f64, x_max: f64, points: usize) -> GridSpec {
    GridSpec::new(x_min, x_max, points).expect("grid is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        let (ch, sys) = lorentzian(3.0);
        assert_eq!(sys.epsilon, 3.0);
        assert!(ch.point(num_complex::Complex64::new(0.0, 0.0), 0.0).is_ok());
        assert_eq!(grid(-1.0, 1.0, 5).points, 5);
    }
}
