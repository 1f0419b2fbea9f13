//! Difference bound matrices over clocks `1..n` and the reference clock 0.
//!
//! Entry `(i, j)` bounds `x_i - x_j`. Bounds are packed as
//! `(value << 1) | weak`, so integer order is bound order and
//! `LT(c) < LE(c) < LT(c + 1)`.

use std::fmt;

use crate::model::ClockRel;
use crate::network::CClockAtom;

pub type Bound = i64;

pub const INF: Bound = i64::MAX;

pub fn le(c: i64) -> Bound {
    (c << 1) | 1
}

pub fn lt(c: i64) -> Bound {
    c << 1
}

pub fn add(a: Bound, b: Bound) -> Bound {
    if a == INF || b == INF {
        INF
    } else {
        (((a >> 1) + (b >> 1)) << 1) | (a & b & 1)
    }
}

fn show(b: Bound) -> String {
    if b == INF {
        "<inf".into()
    } else if b & 1 == 1 {
        format!("<={}", b >> 1)
    } else {
        format!("<{}", b >> 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dbm {
    dim: usize,
    m: Vec<Bound>,
}

impl Dbm {
    /// The single valuation with every clock at 0.
    pub fn zero(clocks: usize) -> Self {
        let dim = clocks + 1;
        Dbm {
            dim,
            m: vec![le(0); dim * dim],
        }
    }

    /// All non-negative valuations.
    pub fn universe(clocks: usize) -> Self {
        let dim = clocks + 1;
        let mut m = vec![INF; dim * dim];
        for i in 0..dim {
            m[i * dim + i] = le(0);
            m[i] = le(0);
        }
        Dbm { dim, m }
    }

    pub fn clocks(&self) -> usize {
        self.dim - 1
    }

    pub fn get(&self, i: usize, j: usize) -> Bound {
        self.m[i * self.dim + j]
    }

    fn set(&mut self, i: usize, j: usize, b: Bound) {
        self.m[i * self.dim + j] = b;
    }

    pub fn is_empty(&self) -> bool {
        (0..self.dim).any(|i| self.get(i, i) < le(0))
    }

    /// All-pairs shortest path closure.
    pub fn canonicalize(&mut self) {
        let d = self.dim;
        for k in 0..d {
            for i in 0..d {
                let ik = self.get(i, k);
                if ik == INF {
                    continue;
                }
                for j in 0..d {
                    let through = add(ik, self.get(k, j));
                    if through < self.get(i, j) {
                        self.set(i, j, through);
                    }
                }
            }
        }
    }

    /// Tightens `x_i - x_j` to `b`, keeping canonical form.
    pub fn constrain(&mut self, i: usize, j: usize, b: Bound) {
        if b >= self.get(i, j) {
            return;
        }
        self.set(i, j, b);
        let d = self.dim;
        for a in 0..d {
            let ai = self.get(a, i);
            if ai == INF {
                continue;
            }
            for c in 0..d {
                let through = add(add(ai, b), self.get(j, c));
                if through < self.get(a, c) {
                    self.set(a, c, through);
                }
            }
        }
    }

    /// Intersection with a conjunction of clock atoms.
    pub fn intersect(&mut self, atoms: &[CClockAtom]) {
        for a in atoms {
            let (x, y, c) = (a.x, a.y, a.bound);
            match a.rel {
                ClockRel::Lt => self.constrain(x, y, lt(c)),
                ClockRel::Le => self.constrain(x, y, le(c)),
                ClockRel::Eq => {
                    self.constrain(x, y, le(c));
                    self.constrain(y, x, le(-c));
                }
                ClockRel::Ge => self.constrain(y, x, le(-c)),
                ClockRel::Gt => self.constrain(y, x, lt(-c)),
            }
            if self.is_empty() {
                return;
            }
        }
    }

    /// Delay closure: removes upper bounds on individual clocks.
    pub fn up(&mut self) {
        for i in 1..self.dim {
            self.set(i, 0, INF);
        }
    }

    /// Sets clock `x` (1-based) to 0.
    pub fn reset(&mut self, x: usize) {
        for j in 0..self.dim {
            let b = self.get(0, j);
            self.set(x, j, b);
            let b = self.get(j, 0);
            self.set(j, x, b);
        }
        self.set(x, x, le(0));
    }

    pub fn is_subset(&self, other: &Dbm) -> bool {
        self.m.iter().zip(&other.m).all(|(a, b)| a <= b)
    }

    /// Max-constant extrapolation with one global constant `k`.
    pub fn extrapolate(&mut self, k: i64) {
        let d = self.dim;
        let mut changed = false;
        for i in 0..d {
            for j in 0..d {
                if i == j {
                    continue;
                }
                let b = self.get(i, j);
                if i != 0 && b != INF && b > le(k) {
                    self.set(i, j, INF);
                    changed = true;
                } else if j != 0 && b < lt(-k) {
                    self.set(i, j, lt(-k));
                    changed = true;
                }
            }
        }
        if changed {
            self.canonicalize();
        }
    }

    /// Membership of a valuation given in clock order (without the
    /// reference clock), scaled by `denom`.
    pub fn contains_scaled(&self, values: &[i64], denom: i64) -> bool {
        let v = |i: usize| if i == 0 { 0 } else { values[i - 1] };
        for i in 0..self.dim {
            for j in 0..self.dim {
                let b = self.get(i, j);
                if b == INF {
                    continue;
                }
                let diff = v(i) - v(j);
                let c = (b >> 1) * denom;
                let ok = if b & 1 == 1 { diff <= c } else { diff < c };
                if !ok {
                    return false;
                }
            }
        }
        true
    }
}

impl Dbm {
    /// Non-trivial bounds, with clock `k` printed as `names[k - 1]`.
    pub fn describe(&self, names: &[String]) -> String {
        let name = |k: usize| {
            if k == 0 {
                "0".to_string()
            } else {
                names.get(k - 1).cloned().unwrap_or_else(|| format!("x{k}"))
            }
        };
        let mut parts = Vec::new();
        for i in 0..self.dim {
            for j in 0..self.dim {
                let b = self.get(i, j);
                if i == j || b == INF || (i == 0 && b == le(0)) {
                    continue;
                }
                match (i, j) {
                    (_, 0) => parts.push(format!("{}{}", name(i), show(b))),
                    (0, _) => parts.push(format!("-{}{}", name(j), show(b))),
                    _ => parts.push(format!("{}-{}{}", name(i), name(j), show(b))),
                }
            }
        }
        if parts.is_empty() {
            "true".into()
        } else {
            parts.join(" & ")
        }
    }
}

impl fmt::Display for Dbm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe(&[]))
    }
}
