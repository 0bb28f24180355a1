//! Exact discretisation of a damped oscillator under piecewise-linear
//! forcing (interpolation-of-excitation coefficients). Unconditionally
//! stable at any step size.

/// Stepper for `m q'' + c q' + k q = F(t)` with `F` linear between samples.
#[derive(Debug, Clone)]
pub struct PiecewiseExactSdof {
    pub omega: f64,
    pub zeta: f64,
    pub mass: f64,
    dt: f64,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    ap: f64,
    bp: f64,
    cp: f64,
    dp: f64,
    pub q: f64,
    pub qdot: f64,
    prev_force: f64,
}

impl PiecewiseExactSdof {
    /// `omega` in rad/s, `zeta` the damping fraction (underdamped, < 1).
    pub fn new(omega: f64, zeta: f64, mass: f64, dt: f64) -> Self {
        assert!(omega > 0.0 && mass > 0.0 && dt > 0.0);
        assert!((0.0..1.0).contains(&zeta), "underdamped systems only");
        let k = mass * omega * omega;
        let wd = omega * (1.0 - zeta * zeta).sqrt();
        let e = (-zeta * omega * dt).exp();
        let s = (wd * dt).sin();
        let co = (wd * dt).cos();
        let zr = zeta / (1.0 - zeta * zeta).sqrt();
        let wdt = omega * dt;

        let a = e * (co + zr * s);
        let b = e * s / wd;
        let c = (1.0 / k)
            * (2.0 * zeta / wdt
                + e * (((1.0 - 2.0 * zeta * zeta) / (wd * dt) - zr) * s
                    - (1.0 + 2.0 * zeta / wdt) * co));
        let d = (1.0 / k)
            * (1.0 - 2.0 * zeta / wdt
                + e * ((2.0 * zeta * zeta - 1.0) / (wd * dt) * s + 2.0 * zeta / wdt * co));
        let ap = -e * (omega / (1.0 - zeta * zeta).sqrt()) * s;
        let bp = e * (co - zr * s);
        let cp = (1.0 / k)
            * (-1.0 / dt
                + e * ((omega / (1.0 - zeta * zeta).sqrt() + zeta / (dt * (1.0 - zeta * zeta).sqrt()))
                    * s
                    + co / dt));
        let dp = (1.0 / (k * dt)) * (1.0 - e * (zr * s + co));

        Self {
            omega,
            zeta,
            mass,
            dt,
            a,
            b,
            c,
            d,
            ap,
            bp,
            cp,
            dp,
            q: 0.0,
            qdot: 0.0,
            prev_force: 0.0,
        }
    }

    /// Set the force at the current time before the first step.
    pub fn prime(&mut self, force: f64) {
        self.prev_force = force;
    }

    /// Advance one step to the next sample where the force is `next_force`.
    pub fn step(&mut self, next_force: f64) {
        let q = self.a * self.q + self.b * self.qdot + self.c * self.prev_force + self.d * next_force;
        let qdot =
            self.ap * self.q + self.bp * self.qdot + self.cp * self.prev_force + self.dp * next_force;
        self.q = q;
        self.qdot = qdot;
        self.prev_force = next_force;
    }

    /// Acceleration consistent with the current state and force.
    pub fn accel(&self) -> f64 {
        (self.prev_force
            - 2.0 * self.zeta * self.omega * self.mass * self.qdot
            - self.mass * self.omega * self.omega * self.q)
            / self.mass
    }

    /// Mechanical energy (per unit mass scale handled by caller).
    pub fn energy(&self) -> f64 {
        0.5 * self.mass * (self.qdot * self.qdot + self.omega * self.omega * self.q * self.q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn free_decay_matches_closed_form() {
        let omega = TAU * 3.0;
        let zeta = 0.05;
        let dt = 1.0 / 200.0;
        let mut sys = PiecewiseExactSdof::new(omega, zeta, 1.0, dt);
        sys.q = 1.0;
        sys.qdot = 0.0;
        let wd = omega * (1.0 - zeta * zeta).sqrt();
        for i in 1..=400 {
            sys.step(0.0);
            let t = i as f64 * dt;
            let expected =
                (-zeta * omega * t).exp() * ((wd * t).cos() + zeta * omega / wd * (wd * t).sin());
            assert!(
                (sys.q - expected).abs() < 1e-9,
                "t={t}: {q} vs {expected}",
                q = sys.q
            );
        }
    }

    #[test]
    fn steady_state_matches_frequency_response() {
        let omega = TAU * 2.0;
        let zeta = 0.1;
        let mass = 2.5;
        let dt = 1.0 / 500.0;
        let drive = TAU * 1.3;
        let mut sys = PiecewiseExactSdof::new(omega, zeta, mass, dt);
        let force = |t: f64| (drive * t).sin();
        sys.prime(force(0.0));
        let mut last_peak: f64 = 0.0;
        let n = (60.0 / dt) as usize;
        for i in 1..=n {
            sys.step(force(i as f64 * dt));
            if i as f64 * dt > 50.0 {
                last_peak = last_peak.max(sys.q.abs());
            }
        }
        let k = mass * omega * omega;
        let r = drive / omega;
        let expected =
            1.0 / (k * (((1.0 - r * r).powi(2) + (2.0 * zeta * r).powi(2)).sqrt()));
        assert!(
            (last_peak - expected).abs() < 0.01 * expected,
            "amplitude {last_peak} vs FRF {expected}"
        );
    }

    #[test]
    fn static_force_settles_to_static_deflection() {
        let omega = TAU * 4.0;
        let zeta = 0.2;
        let mass = 1.5;
        let dt = 1.0 / 100.0;
        let mut sys = PiecewiseExactSdof::new(omega, zeta, mass, dt);
        sys.prime(3.0);
        for _ in 0..5000 {
            sys.step(3.0);
        }
        let expected = 3.0 / (mass * omega * omega);
        assert!((sys.q - expected).abs() < 1e-9 * expected.abs().max(1.0));
    }

    #[test]
    fn energy_decays_without_forcing() {
        let mut sys = PiecewiseExactSdof::new(TAU * 5.0, 0.02, 1.0, 1.0 / 500.0);
        sys.q = 0.5;
        sys.qdot = 2.0;
        let mut prev = sys.energy();
        for _ in 0..2000 {
            sys.step(0.0);
            let e = sys.energy();
            assert!(e <= prev * (1.0 + 1e-12), "energy grew: {prev} -> {e}");
            prev = e;
        }
    }
}
