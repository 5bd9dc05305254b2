//! Exact Riemann solver for the 1-D Euler equations, used as the Sod-tube
//! oracle. Star-state pressure by Newton iteration on the classical
//! pressure function; sampling by wave-pattern classification.

#[derive(Debug, Clone, Copy)]
pub struct PrimState {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct StarState {
    pub p: f64,
    pub u: f64,
    pub rho_left: f64,
    pub rho_right: f64,
}

fn sound_speed(s: &PrimState, gamma: f64) -> f64 {
    (gamma * s.p / s.rho).sqrt()
}

/// f_K(p) and its derivative for one side (shock above p_K, rarefaction
/// below).
fn side_function(p: f64, s: &PrimState, gamma: f64) -> (f64, f64) {
    let a = sound_speed(s, gamma);
    if p > s.p {
        let ak = 2.0 / ((gamma + 1.0) * s.rho);
        let bk = (gamma - 1.0) / (gamma + 1.0) * s.p;
        let root = (ak / (p + bk)).sqrt();
        let f = (p - s.p) * root;
        let df = root * (1.0 - 0.5 * (p - s.p) / (p + bk));
        (f, df)
    } else {
        let pr = p / s.p;
        let ex = (gamma - 1.0) / (2.0 * gamma);
        let f = 2.0 * a / (gamma - 1.0) * (pr.powf(ex) - 1.0);
        let df = 1.0 / (s.rho * a) * pr.powf(-(gamma + 1.0) / (2.0 * gamma));
        (f, df)
    }
}

pub fn solve_star(left: &PrimState, right: &PrimState, gamma: f64) -> StarState {
    let du = right.u - left.u;
    // two-rarefaction initial guess keeps the iterate positive
    let al = sound_speed(left, gamma);
    let ar = sound_speed(right, gamma);
    let z = (gamma - 1.0) / (2.0 * gamma);
    let guess = ((al + ar - 0.5 * (gamma - 1.0) * du)
        / (al / left.p.powf(z) + ar / right.p.powf(z)))
    .powf(1.0 / z);
    let mut p = guess.max(1e-12);
    for _ in 0..100 {
        let (fl, dfl) = side_function(p, left, gamma);
        let (fr, dfr) = side_function(p, right, gamma);
        let f = fl + fr + du;
        let step = f / (dfl + dfr);
        let p_new = (p - step).max(1e-14);
        if (p_new - p).abs() < 1e-14 * p {
            p = p_new;
            break;
        }
        p = p_new;
    }
    let (fl, _) = side_function(p, left, gamma);
    let (fr, _) = side_function(p, right, gamma);
    let u = 0.5 * (left.u + right.u) + 0.5 * (fr - fl);
    let gm = (gamma - 1.0) / (gamma + 1.0);
    let rho_left = if p > left.p {
        left.rho * ((p / left.p + gm) / (gm * p / left.p + 1.0))
    } else {
        left.rho * (p / left.p).powf(1.0 / gamma)
    };
    let rho_right = if p > right.p {
        right.rho * ((p / right.p + gm) / (gm * p / right.p + 1.0))
    } else {
        right.rho * (p / right.p).powf(1.0 / gamma)
    };
    StarState {
        p,
        u,
        rho_left,
        rho_right,
    }
}

/// Self-similar solution at xi = x/t.
pub fn sample(
    star: &StarState,
    left: &PrimState,
    right: &PrimState,
    gamma: f64,
    xi: f64,
) -> PrimState {
    let gm1 = gamma - 1.0;
    let gp1 = gamma + 1.0;
    if xi <= star.u {
        // left of the contact
        let a = sound_speed(left, gamma);
        if star.p > left.p {
            // left shock
            let s = left.u - a * (gp1 / (2.0 * gamma) * star.p / left.p + gm1 / (2.0 * gamma)).sqrt();
            if xi < s {
                *left
            } else {
                PrimState {
                    rho: star.rho_left,
                    u: star.u,
                    p: star.p,
                }
            }
        } else {
            // left rarefaction
            let a_star = a * (star.p / left.p).powf(gm1 / (2.0 * gamma));
            let head = left.u - a;
            let tail = star.u - a_star;
            if xi < head {
                *left
            } else if xi > tail {
                PrimState {
                    rho: star.rho_left,
                    u: star.u,
                    p: star.p,
                }
            } else {
                let u = 2.0 / gp1 * (a + 0.5 * gm1 * left.u + xi);
                let a_loc = 2.0 / gp1 * (a + 0.5 * gm1 * (left.u - xi));
                let rho = left.rho * (a_loc / a).powf(2.0 / gm1);
                let p = left.p * (a_loc / a).powf(2.0 * gamma / gm1);
                PrimState { rho, u, p }
            }
        }
    } else {
        // right of the contact
        let a = sound_speed(right, gamma);
        if star.p > right.p {
            let s =
                right.u + a * (gp1 / (2.0 * gamma) * star.p / right.p + gm1 / (2.0 * gamma)).sqrt();
            if xi > s {
                *right
            } else {
                PrimState {
                    rho: star.rho_right,
                    u: star.u,
                    p: star.p,
                }
            }
        } else {
            let a_star = a * (star.p / right.p).powf(gm1 / (2.0 * gamma));
            let head = right.u + a;
            let tail = star.u + a_star;
            if xi > head {
                *right
            } else if xi < tail {
                PrimState {
                    rho: star.rho_right,
                    u: star.u,
                    p: star.p,
                }
            } else {
                let u = 2.0 / gp1 * (-a + 0.5 * gm1 * right.u + xi);
                let a_loc = 2.0 / gp1 * (a - 0.5 * gm1 * (right.u - xi));
                let rho = right.rho * (a_loc / a).powf(2.0 / gm1);
                let p = right.p * (a_loc / a).powf(2.0 * gamma / gm1);
                PrimState { rho, u, p }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SOD_L: PrimState = PrimState {
        rho: 1.0,
        u: 0.0,
        p: 1.0,
    };
    const SOD_R: PrimState = PrimState {
        rho: 0.125,
        u: 0.0,
        p: 0.1,
    };

    #[test]
    fn sod_star_state() {
        let star = solve_star(&SOD_L, &SOD_R, 1.4);
        // classical reference values
        assert!((star.p - 0.30313).abs() < 1e-4, "p* = {}", star.p);
        assert!((star.u - 0.92745).abs() < 1e-4, "u* = {}", star.u);
        assert!((star.rho_left - 0.42632).abs() < 1e-4);
        assert!((star.rho_right - 0.26557).abs() < 1e-4);
    }

    #[test]
    fn sampling_limits_and_jumps() {
        let star = solve_star(&SOD_L, &SOD_R, 1.4);
        // far field recovers the initial states
        let s = sample(&star, &SOD_L, &SOD_R, 1.4, -5.0);
        assert_eq!(s.rho, 1.0);
        let s = sample(&star, &SOD_L, &SOD_R, 1.4, 5.0);
        assert_eq!(s.rho, 0.125);
        // pressure and velocity are continuous across the contact
        let a = sample(&star, &SOD_L, &SOD_R, 1.4, star.u - 1e-9);
        let b = sample(&star, &SOD_L, &SOD_R, 1.4, star.u + 1e-9);
        assert!((a.p - b.p).abs() < 1e-8);
        assert!((a.u - b.u).abs() < 1e-8);
        assert!((a.rho - b.rho).abs() > 0.1); // density jumps
    }

    #[test]
    fn symmetric_double_expansion() {
        let l = PrimState {
            rho: 1.0,
            u: -0.5,
            p: 0.4,
        };
        let r = PrimState {
            rho: 1.0,
            u: 0.5,
            p: 0.4,
        };
        let star = solve_star(&l, &r, 1.4);
        assert!(star.u.abs() < 1e-12);
        assert!(star.p < 0.4);
    }
}
