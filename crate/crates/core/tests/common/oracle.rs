//! Brute-force oscillator-algebra oracle for the quartic interaction.
//!
//! Applies every normal-ordered monomial for every ordered mode quadruple
//! with `n1 + n2 + n3 + n4 = 0` inside a symmetric window, one ladder
//! operator at a time, to the unprojected Fock components of a parity
//! state. Shares nothing with the library beyond the input parameters.

#![allow(dead_code)]

use std::collections::BTreeMap;

pub type Occ = BTreeMap<i32, u32>;
pub type Vector = BTreeMap<Occ, f64>;

pub struct Theory {
    pub mass: f64,
    pub length: f64,
    pub coupling: f64,
}

impl Theory {
    fn omega(&self, n: i32) -> f64 {
        let k = 2.0 * std::f64::consts::PI * n as f64 / self.length;
        (k * k + self.mass * self.mass).sqrt()
    }
}

fn lower(state: &Occ, n: i32) -> Option<(Occ, f64)> {
    let r = *state.get(&n)?;
    let mut out = state.clone();
    if r == 1 {
        out.remove(&n);
    } else {
        out.insert(n, r - 1);
    }
    Some((out, (r as f64).sqrt()))
}

fn raise(state: &Occ, n: i32) -> (Occ, f64) {
    let r = state.get(&n).copied().unwrap_or(0);
    let mut out = state.clone();
    out.insert(n, r + 1);
    (out, ((r + 1) as f64).sqrt())
}

/// `V|state⟩` using ordered quadruples with every `|n_i| <= window`.
pub fn apply_v(theory: &Theory, state: &Occ, window: i32) -> Vector {
    let weights = [1.0, 4.0, 6.0, 4.0, 1.0];
    let mut out = Vector::new();
    let pref = theory.coupling * theory.length / 4.0;
    for n1 in -window..=window {
        for n2 in -window..=window {
            for n3 in -window..=window {
                let n4 = -(n1 + n2 + n3);
                if n4.abs() > window {
                    continue;
                }
                let quad = [n1, n2, n3, n4];
                let mode_factor: f64 = quad
                    .iter()
                    .map(|&n| 1.0 / (theory.length * theory.omega(n)).sqrt())
                    .product();
                for creators in 0..=4usize {
                    // Operator string: a†_{-n1} .. a†_{-n_c} a_{n_{c+1}} .. a_{n4};
                    // the rightmost factor acts first.
                    let mut cur = state.clone();
                    let mut amp = pref * weights[creators] * mode_factor;
                    let mut alive = true;
                    for idx in (0..4).rev() {
                        if idx >= creators {
                            match lower(&cur, quad[idx]) {
                                Some((s, f)) => {
                                    cur = s;
                                    amp *= f;
                                }
                                None => {
                                    alive = false;
                                    break;
                                }
                            }
                        } else {
                            let (s, f) = raise(&cur, -quad[idx]);
                            cur = s;
                            amp *= f;
                        }
                    }
                    if alive {
                        *out.entry(cur).or_insert(0.0) += amp;
                    }
                }
            }
        }
    }
    out
}

/// Fock expansion `β(|r⟩ + P|r⟩)` of a parity-even state.
pub fn parity_vector(occ: &[(i32, u32)]) -> Vector {
    let direct: Occ = occ.iter().copied().collect();
    let mirrored: Occ = occ.iter().map(|&(n, r)| (-n, r)).collect();
    let mut v = Vector::new();
    if direct == mirrored {
        v.insert(direct, 1.0);
    } else {
        let beta = std::f64::consts::FRAC_1_SQRT_2;
        v.insert(direct, beta);
        v.insert(mirrored, beta);
    }
    v
}

/// `⟨i|V|j⟩` for parity states given by representative occupations.
pub fn matrix_element(theory: &Theory, bra: &[(i32, u32)], ket: &[(i32, u32)], window: i32) -> f64 {
    let bra_v = parity_vector(bra);
    let mut image = Vector::new();
    for (comp, c) in parity_vector(ket) {
        for (s, a) in apply_v(theory, &comp, window) {
            *image.entry(s).or_insert(0.0) += c * a;
        }
    }
    bra_v
        .iter()
        .map(|(s, c)| c * image.get(s).copied().unwrap_or(0.0))
        .sum()
}

/// Dense `V` over a list of representatives (row-major).
pub fn dense_v(theory: &Theory, reps: &[Vec<(i32, u32)>], window: i32) -> Vec<f64> {
    let dim = reps.len();
    let index: BTreeMap<Occ, (usize, f64)> = reps
        .iter()
        .enumerate()
        .flat_map(|(i, r)| parity_vector(r).into_iter().map(move |(s, c)| (s, (i, c))))
        .collect();
    let mut out = vec![0.0; dim * dim];
    for (j, rep) in reps.iter().enumerate() {
        let mut image = Vector::new();
        for (comp, c) in parity_vector(rep) {
            for (s, a) in apply_v(theory, &comp, window) {
                *image.entry(s).or_insert(0.0) += c * a;
            }
        }
        for (s, a) in image {
            if let Some(&(i, c)) = index.get(&s) {
                out[i * dim + j] += c * a;
            }
        }
    }
    out
}
