//! Conformal reference maps and the Taylor expansion of the angle-sum
//! defect.
//!
//! Each built-in map carries `f`, `f'` and the derivatives of `g = log f'`
//! up to fourth order in closed form; five-fold numerical differentiation is
//! far too noisy for the extrapolation tolerances used downstream. The
//! angle-sum defect of a one-ring star with scale factors `u = log |f'|`
//! vanishes to fourth order in the lattice scale; its `epsilon^4`
//! coefficient is predicted here from the Schwarzian derivative of `f` and a
//! lattice-dependent coefficient.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::theta;
use crate::lattice::{LatticeSpec, Subcomplex};
use crate::layout::Normalization;

type CFn = Box<dyn Fn(Complex64) -> Complex64 + Send + Sync>;
type JetFn = Box<dyn Fn(Complex64) -> [Complex64; 4] + Send + Sync>;
type DomainFn = Box<dyn Fn(Complex64) -> bool + Send + Sync>;

/// A holomorphic map with nonvanishing derivative, together with the exact
/// derivatives of `g = log f'` (so `g' = f''/f'`) and a domain predicate.
pub struct ConformalMap {
    pub name: String,
    f: CFn,
    fprime: CFn,
    /// `(g', g'', g''', g'''')` at a point.
    g_derivs: JetFn,
    domain: DomainFn,
}

impl ConformalMap {
    fn build(name: &str, f: CFn, fprime: CFn, g_derivs: JetFn, domain: DomainFn) -> Self {
        Self { name: name.to_string(), f, fprime, g_derivs, domain }
    }

    pub fn in_domain(&self, z: Complex64) -> bool {
        (self.domain)(z)
    }

    fn check_domain(&self, z: Complex64) -> Result<()> {
        if self.in_domain(z) {
            Ok(())
        } else {
            Err(Error::OutsideDomain(format!("{} is outside the domain of map {}", z, self.name)))
        }
    }

    pub fn eval_f(&self, z: Complex64) -> Result<Complex64> {
        self.check_domain(z)?;
        Ok((self.f)(z))
    }

    pub fn eval_fprime(&self, z: Complex64) -> Result<Complex64> {
        self.check_domain(z)?;
        Ok((self.fprime)(z))
    }

    /// `(g', g'', g''', g'''')` of `g = log f'`.
    pub fn eval_g_derivs(&self, z: Complex64) -> Result<[Complex64; 4]> {
        self.check_domain(z)?;
        Ok((self.g_derivs)(z))
    }

    /// `log |f'(z)|`, the scale factor of `f` at `z`.
    pub fn log_abs_fprime(&self, z: Complex64) -> Result<f64> {
        let fp = self.eval_fprime(z)?;
        if fp.norm() <= 0.0 {
            return Err(Error::OutsideDomain(format!(
                "f' vanishes at {} for map {}",
                z, self.name
            )));
        }
        Ok(fp.norm().ln())
    }

    /// The identity map.
    pub fn identity() -> Self {
        Self::affine(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    /// `f(z) = c z + d` with `c != 0`.
    pub fn affine(c: Complex64, d: Complex64) -> Self {
        let zero = [Complex64::new(0.0, 0.0); 4];
        Self::build(
            if c == Complex64::new(1.0, 0.0) && d == Complex64::new(0.0, 0.0) {
                "identity"
            } else {
                "affine"
            },
            Box::new(move |z| c * z + d),
            Box::new(move |_| c),
            Box::new(move |_| zero),
            Box::new(|_| true),
        )
    }

    /// `f(z) = e^z`, entire, with `g = z`.
    pub fn exp() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self::build(
            "exp",
            Box::new(|z| z.exp()),
            Box::new(|z| z.exp()),
            Box::new(move |_| [one, zero, zero, zero]),
            Box::new(|_| true),
        )
    }

    /// `f(z) = z^2` away from the critical point: the domain excludes
    /// `|z| <= 0.2` where `f'` degenerates.
    pub fn square() -> Self {
        Self::build(
            "square",
            Box::new(|z| z * z),
            Box::new(|z| 2.0 * z),
            Box::new(|z| {
                let inv = 1.0 / z;
                let inv2 = inv * inv;
                [inv, -inv2, 2.0 * inv2 * inv, -6.0 * inv2 * inv2]
            }),
            Box::new(|z| z.norm() > 0.2),
        )
    }

    /// `f(z) = z + mu z^2`; the domain keeps `f' = 1 + 2 mu z` away from 0.
    pub fn cubic_perturbation(mu: Complex64) -> Self {
        Self::build(
            "cubic_perturbation",
            Box::new(move |z| z + mu * z * z),
            Box::new(move |z| 1.0 + 2.0 * mu * z),
            Box::new(move |z| {
                let w = 1.0 + 2.0 * mu * z;
                let r = mu / w;
                let r2 = r * r;
                [2.0 * r, -4.0 * r2, 16.0 * r2 * r, -96.0 * r2 * r2]
            }),
            Box::new(move |z| (1.0 + 2.0 * mu * z).norm() > 0.1),
        )
    }

    /// `f(z) = (a z + b)/(c z + d)` with `a d - b c != 0`; the domain keeps
    /// `c z + d` away from 0.
    pub fn moebius(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let det = a * d - b * c;
        if det.norm() <= f64::MIN_POSITIVE {
            return Err(Error::InvalidInput(
                "moebius coefficients must satisfy a d - b c != 0".into(),
            ));
        }
        Ok(Self::build(
            "moebius",
            Box::new(move |z| (a * z + b) / (c * z + d)),
            Box::new(move |z| {
                let x = c * z + d;
                det / (x * x)
            }),
            Box::new(move |z| {
                let r = c / (c * z + d);
                let r2 = r * r;
                [-2.0 * r, 2.0 * r2, -4.0 * r2 * r, 12.0 * r2 * r2]
            }),
            Box::new(move |z| (c * z + d).norm() > 0.1),
        ))
    }
}

impl std::fmt::Debug for ConformalMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConformalMap").field("name", &self.name).finish()
    }
}

/// Registry of built-in map names accepted by configuration files.
pub fn builtin_maps() -> Vec<&'static str> {
    vec!["identity", "affine", "exp", "square", "cubic_perturbation", "moebius"]
}

/// Predicted fourth-order coefficient of the angle-sum defect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorConstant {
    pub value: f64,
}

/// Schwarzian derivative `S(f) = g'' - (1/2) g'^2` with `g = log f'`.
pub fn schwarzian(map: &ConformalMap, z: Complex64) -> Result<Complex64> {
    let [g1, g2, _, _] = map.eval_g_derivs(z)?;
    Ok(g2 - 0.5 * g1 * g1)
}

/// Predicted coefficient `C_{v0}` of `epsilon^4` in the angle-sum defect at
/// `v0` for the given lattice angles:
///
/// `C_{v0} = -(1/4) Re( s S(f) conj(g'') + c (1/2 g'^2 g'' - 1/3 g'''') )`
///
/// with `s = sin a sin b sin c` and the lattice coefficient
/// `c = cos b sin^3 b + cos c sin^3 c e^{4ia} + cos a sin^3 a e^{4i(a+b)}`,
/// which vanishes for the equilateral lattice, leaving
/// `-(3 sqrt 3 / 32) Re(S(f) conj(g''))`.
///
/// The fourth-power phases come from the quartic term of the cotangent-
/// weighted second-difference expansion: the weight of each lattice
/// direction `e^{i t}` is the cotangent of the opposite angle, and the
/// quadratic term cancels by the identity
/// `sum_d cos(phi_d) sin(phi_d) e^{2 i t_d} = 0`.
pub fn predicted_constant(
    map: &ConformalMap,
    v0: Complex64,
    spec: &LatticeSpec,
) -> Result<TaylorConstant> {
    let [g1, g2, _, g4] = map.eval_g_derivs(v0)?;
    let (a, b, c) = (spec.alpha, spec.beta, spec.gamma);
    let s = a.sin() * b.sin() * c.sin();
    let sch = g2 - 0.5 * g1 * g1;
    let phase = |t: f64| Complex64::from_polar(1.0, 4.0 * t);
    let lattice_coeff = b.cos() * b.sin().powi(3) * Complex64::new(1.0, 0.0)
        + c.cos() * c.sin().powi(3) * phase(a)
        + a.cos() * a.sin().powi(3) * phase(a + b);
    let cross = 0.5 * g1 * g1 * g2 - g4 / 3.0;
    let value = -0.25 * (s * sch * g2.conj() + lattice_coeff * cross).re;
    Ok(TaylorConstant { value })
}

/// Angle sum minus `2 pi` of the one-ring star at `v0` on the lattice with
/// the given angles at scale `epsilon`, with scale factors `u = log |f'|`
/// sampled at the exact star vertices. Negative `epsilon` reflects the six
/// neighbors through `v0`; the defect is an even function of `epsilon`.
/// Obtuse lattice angles are permitted.
pub fn angle_sum_defect(
    map: &ConformalMap,
    v0: Complex64,
    spec: &LatticeSpec,
    epsilon: f64,
) -> Result<f64> {
    let (sa, sb, sc) = (spec.alpha.sin(), spec.beta.sin(), spec.gamma.sin());
    // Star directions parallel to 1, e^{i alpha}, e^{i(alpha+beta)} with
    // side lengths epsilon sin(beta), sin(gamma), sin(alpha).
    let steps = [
        Complex64::from_polar(epsilon * sb, 0.0),
        Complex64::from_polar(epsilon * sc, spec.alpha),
        Complex64::from_polar(epsilon * sa, spec.alpha + spec.beta),
    ];
    let u0 = map.log_abs_fprime(v0)?;
    let eta = |step: Complex64| -> Result<f64> { Ok(map.log_abs_fprime(v0 + step)? - u0) };
    let e1 = eta(steps[0])?;
    let e2 = eta(steps[1])?;
    let e3 = eta(steps[2])?;
    let e4 = eta(-steps[0])?;
    let e5 = eta(-steps[1])?;
    let e6 = eta(-steps[2])?;
    let l = |num: f64, den: f64| 2.0 * (num / den).ln();
    let sum = theta(l(sa, sc) + e1, l(sa, sb) + e2)?
        + theta(l(sb, sa) + e2, l(sb, sc) + e3)?
        + theta(l(sc, sb) + e3, l(sc, sa) + e4)?
        + theta(l(sa, sc) + e4, l(sa, sb) + e5)?
        + theta(l(sb, sa) + e5, l(sb, sc) + e6)?
        + theta(l(sc, sb) + e6, l(sc, sa) + e1)?;
    Ok(sum - 2.0 * std::f64::consts::PI)
}

/// The normalization induced by a conformal map: the origin vertex maps to
/// `f(origin)`, and the seed edge leaves it in the direction of the source
/// edge rotated by `arg f'` at the edge midpoint.
pub fn normalization_for(map: &ConformalMap, sub: &Subcomplex) -> Result<Normalization> {
    let o = sub.origin_vertex;
    let [a, b] = sub.edges[sub.seed_edge];
    let w = if a == o { b } else { a };
    let po = sub.vertices[o].position;
    let pw = sub.vertices[w].position;
    let mid = (po + pw) / 2.0;
    Ok(Normalization::new(
        map.eval_f(po)?,
        (pw - po).arg() + map.eval_fprime(mid)?.arg(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_3;

    fn sample_maps() -> Vec<(ConformalMap, Complex64, f64)> {
        // (map, sample center, sample radius) staying inside each domain.
        vec![
            (ConformalMap::identity(), Complex64::new(0.0, 0.0), 0.8),
            (
                ConformalMap::affine(Complex64::new(1.0, 2.0), Complex64::new(3.0, 0.0)),
                Complex64::new(0.0, 0.0),
                0.8,
            ),
            (ConformalMap::exp(), Complex64::new(0.0, 0.0), 0.8),
            (ConformalMap::square(), Complex64::new(1.0, 0.0), 0.5),
            (
                ConformalMap::cubic_perturbation(Complex64::new(0.1, 0.0)),
                Complex64::new(0.0, 0.0),
                0.8,
            ),
            (
                ConformalMap::moebius(
                    Complex64::new(1.0, 0.0),
                    Complex64::new(0.0, 0.5),
                    Complex64::new(0.3, 0.0),
                    Complex64::new(1.0, 0.0),
                )
                .unwrap(),
                Complex64::new(0.0, 0.0),
                0.8,
            ),
        ]
    }

    #[test]
    fn derivative_jets_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = 1e-5;
        for (map, center, radius) in sample_maps() {
            for _ in 0..100 {
                let z = center
                    + Complex64::from_polar(
                        radius * rng.gen::<f64>(),
                        std::f64::consts::TAU * rng.gen::<f64>(),
                    );
                if !map.in_domain(z) {
                    continue;
                }
                let dz = Complex64::new(h, 0.0);
                // f' against central differences of f.
                let fd_fp = (map.eval_f(z + dz).unwrap() - map.eval_f(z - dz).unwrap()) / (2.0 * h);
                let fp = map.eval_fprime(z).unwrap();
                assert!((fd_fp - fp).norm() <= 1e-6 * (1.0 + fp.norm()), "{} f'", map.name);
                // g' = f''/f' against central differences of f'.
                let fd_fpp =
                    (map.eval_fprime(z + dz).unwrap() - map.eval_fprime(z - dz).unwrap()) / (2.0 * h);
                let [g1, g2, g3, g4] = map.eval_g_derivs(z).unwrap();
                assert!(
                    (fd_fpp / fp - g1).norm() <= 1e-6 * (1.0 + g1.norm()),
                    "{} g'",
                    map.name
                );
                // Each higher derivative against differences of the previous.
                let jet = |w: Complex64| map.eval_g_derivs(w).unwrap();
                for (k, target) in [(0, g2), (1, g3), (2, g4)] {
                    let fd = (jet(z + dz)[k] - jet(z - dz)[k]) / (2.0 * h);
                    assert!(
                        (fd - target).norm() <= 1e-5 * (1.0 + target.norm()),
                        "{} jet {}",
                        map.name,
                        k + 1
                    );
                }
            }
        }
    }

    #[test]
    fn schwarzian_examples() {
        let z = Complex64::new(0.3, -0.2);
        assert!((schwarzian(&ConformalMap::exp(), z).unwrap() - Complex64::new(-0.5, 0.0)).norm() < 1e-14);
        assert!(
            (schwarzian(&ConformalMap::square(), Complex64::new(1.0, 0.0)).unwrap()
                - Complex64::new(-1.5, 0.0))
            .norm()
                < 1e-14
        );
        let affine = ConformalMap::affine(Complex64::new(2.0, 1.0), Complex64::new(0.0, 0.0));
        assert!(schwarzian(&affine, z).unwrap().norm() < 1e-15);
    }

    #[test]
    fn predicted_constant_examples() {
        let eq = LatticeSpec::equilateral(0.1);
        let v0 = Complex64::new(1.0, 0.0);
        // exp and affine have vanishing constants everywhere.
        assert_eq!(predicted_constant(&ConformalMap::exp(), v0, &eq).unwrap().value, 0.0);
        assert_eq!(
            predicted_constant(
                &ConformalMap::affine(Complex64::new(1.0, 2.0), Complex64::new(3.0, 0.0)),
                v0,
                &eq
            )
            .unwrap()
            .value,
            0.0
        );
        // Square map at v0 = 1: S = -3/2, g'' = -1,
        // value = -(3 sqrt3/32) * 3/2 = -9 sqrt3 / 64.
        let c = predicted_constant(&ConformalMap::square(), v0, &eq).unwrap().value;
        let expected = -9.0 * 3f64.sqrt() / 64.0;
        assert!((c - expected).abs() < 1e-14, "{c} vs {expected}");
    }

    #[test]
    fn equilateral_lattice_coefficient_vanishes() {
        // For the equilateral lattice the cross-term coefficient is a sum of
        // three unit vectors at angles 0, 4 pi/3, 8 pi/3.
        let phase = |t: f64| Complex64::from_polar(1.0, 4.0 * t);
        let w = FRAC_PI_3.cos() * FRAC_PI_3.sin().powi(3);
        let sum = w * (Complex64::new(1.0, 0.0) + phase(FRAC_PI_3) + phase(2.0 * FRAC_PI_3));
        assert!(sum.norm() < 1e-15);
    }

    #[test]
    fn defect_vanishes_for_identity_and_affine() {
        let specs = [
            LatticeSpec::equilateral(1.0),
            LatticeSpec::new(80f64.to_radians(), 60f64.to_radians(), 40f64.to_radians(), 1.0)
                .unwrap(),
        ];
        let affine = ConformalMap::affine(Complex64::new(1.0, 2.0), Complex64::new(3.0, 0.0));
        for spec in &specs {
            for eps in [0.3, 0.1, 0.05] {
                let d =
                    angle_sum_defect(&ConformalMap::identity(), Complex64::new(0.2, 0.1), spec, eps)
                        .unwrap();
                assert!(d.abs() < 1e-13, "identity defect {d}");
                let d = angle_sum_defect(&affine, Complex64::new(0.2, 0.1), spec, eps).unwrap();
                assert!(d.abs() < 1e-13, "affine defect {d}");
            }
        }
    }

    #[test]
    fn defect_is_even_in_epsilon() {
        let spec = LatticeSpec::new(80f64.to_radians(), 60f64.to_radians(), 40f64.to_radians(), 1.0)
            .unwrap();
        let map = ConformalMap::square();
        let v0 = Complex64::new(1.0, 0.0);
        for eps in [0.05, 0.02] {
            let plus = angle_sum_defect(&map, v0, &spec, eps).unwrap();
            let minus = angle_sum_defect(&map, v0, &spec, -eps).unwrap();
            assert!((plus - minus).abs() < 1e-14, "{plus} vs {minus}");
        }
    }

    #[test]
    fn equilateral_defect_matches_predicted_constant() {
        let spec = LatticeSpec::equilateral(1.0);
        let map = ConformalMap::square();
        let v0 = Complex64::new(1.0, 0.0);
        let predicted = predicted_constant(&map, v0, &spec).unwrap().value;
        let eps = 0.05;
        let measured = angle_sum_defect(&map, v0, &spec, eps).unwrap() / eps.powi(4);
        let rel = ((measured - predicted) / predicted).abs();
        assert!(rel <= 0.02, "relative deviation {rel}");
    }

    #[test]
    fn general_lattice_defect_matches_predicted_constant() {
        // The fourth-power-phase lattice coefficient is exercised on a
        // scalene lattice where the cross term does not cancel.
        let spec = LatticeSpec::new(80f64.to_radians(), 60f64.to_radians(), 40f64.to_radians(), 1.0)
            .unwrap();
        let v0 = Complex64::new(1.0, 0.0);
        for map in [
            ConformalMap::square(),
            ConformalMap::cubic_perturbation(Complex64::new(0.1, 0.0)),
        ] {
            let predicted = predicted_constant(&map, v0, &spec).unwrap().value;
            // Deviations from the limit shrink like epsilon^2: the ratio of
            // successive deviations under halving sits near 4.
            let dev = |eps: f64| {
                (angle_sum_defect(&map, v0, &spec, eps).unwrap() / eps.powi(4) - predicted).abs()
            };
            let (d1, d2) = (dev(0.1), dev(0.05));
            let ratio = d1 / d2;
            assert!((3.0..=5.0).contains(&ratio), "{}: deviation ratio {ratio}", map.name);
            // And the small-epsilon value is already within a percent.
            let rel = dev(0.02) / predicted.abs();
            assert!(rel <= 0.01, "{}: relative deviation {rel}", map.name);
        }
    }

    #[test]
    fn obtuse_lattice_defect_is_finite_and_even() {
        let spec = LatticeSpec::new(
            100f64.to_radians(),
            45f64.to_radians(),
            35f64.to_radians(),
            1.0,
        )
        .unwrap();
        let map = ConformalMap::exp();
        let v0 = Complex64::new(0.1, 0.2);
        let d = angle_sum_defect(&map, v0, &spec, 0.05).unwrap();
        assert!(d.is_finite());
        let dm = angle_sum_defect(&map, v0, &spec, -0.05).unwrap();
        assert!((d - dm).abs() < 1e-14);
    }

    #[test]
    fn domain_checks_are_enforced() {
        let sq = ConformalMap::square();
        assert!(matches!(
            sq.eval_f(Complex64::new(0.0, 0.0)),
            Err(Error::OutsideDomain(_))
        ));
        assert!(matches!(
            angle_sum_defect(&sq, Complex64::new(0.0, 0.0), &LatticeSpec::equilateral(1.0), 0.05),
            Err(Error::OutsideDomain(_))
        ));
        assert!(ConformalMap::moebius(
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
        )
        .is_err());
    }

    #[test]
    fn registry_lists_all_builtins() {
        let names = builtin_maps();
        for expected in ["identity", "affine", "exp", "square", "cubic_perturbation", "moebius"] {
            assert!(names.contains(&expected));
        }
    }
}
