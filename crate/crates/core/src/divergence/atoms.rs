use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scenario::{vertex_entry_table, Scenario};

/// Above this many atoms the per-atom scores are computed in parallel.
const PAR_THRESHOLD: usize = 4096;

/// How an atom decomposes into deterministic vertices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AtomSource {
    Vertex(usize),
    /// `lambda * low + (1 - lambda) * high`.
    Crossing {
        low: usize,
        high: usize,
        lambda: f64,
    },
}

/// Generating points of a polytope inside behavior space, stored sparsely.
///
/// For the local polytope the atoms are the deterministic vertices. For the
/// local polytope cut by a half-space `β ≤ c` they are the vertices on the
/// feasible side together with the points where segments between a feasible
/// and an infeasible vertex cross the hyperplane.
#[derive(Clone, Debug)]
pub struct AtomSet {
    dim: usize,
    vertex_count: usize,
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
    sources: Vec<AtomSource>,
}

impl AtomSet {
    pub fn local_polytope(scenario: &Scenario, cap: usize) -> Result<Self> {
        let table = vertex_entry_table(scenario, cap)?;
        let tau = scenario.joint_settings();
        let count = table.len() / tau;
        Ok(AtomSet {
            dim: scenario.num_entries(),
            vertex_count: count,
            offsets: (0..=count).map(|v| v * tau).collect(),
            values: vec![1.0; table.len()],
            indices: table,
            sources: (0..count).map(AtomSource::Vertex).collect(),
        })
    }

    /// Local polytope intersected with `Σ coefficients[e] * q[e] ≤ bound`.
    pub fn restricted_local_polytope(
        scenario: &Scenario,
        coefficients: &[f64],
        bound: f64,
        cap: usize,
    ) -> Result<Self> {
        if coefficients.len() != scenario.num_entries() {
            return Err(Error::LengthMismatch(
                coefficients.len(),
                scenario.num_entries(),
            ));
        }
        let full = AtomSet::local_polytope(scenario, cap)?;
        let values: Vec<f64> = (0..full.len()).map(|a| full.dot(a, coefficients)).collect();
        let eps = 1e-12 * (1.0 + bound.abs());
        let low: Vec<usize> = (0..full.len())
            .filter(|&v| values[v] <= bound + eps)
            .collect();
        let strict_low: Vec<usize> = low
            .iter()
            .copied()
            .filter(|&v| values[v] < bound - eps)
            .collect();
        let high: Vec<usize> = (0..full.len())
            .filter(|&v| values[v] > bound + eps)
            .collect();
        if low.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "no local behavior satisfies the bound {bound}"
            )));
        }
        let crossings = strict_low.len() as u128 * high.len() as u128;
        if crossings + low.len() as u128 > cap as u128 {
            return Err(Error::Capacity {
                what: "restricted-polytope atom",
                count: crossings + low.len() as u128,
                cap: cap as u128,
            });
        }

        let mut set = AtomSet {
            dim: full.dim,
            vertex_count: full.len(),
            offsets: vec![0],
            indices: Vec::new(),
            values: Vec::new(),
            sources: Vec::new(),
        };
        for &v in &low {
            let (idx, val) = full.atom(v);
            set.push(
                idx.iter().copied().zip(val.iter().copied()),
                AtomSource::Vertex(v),
            );
        }
        for &i in &strict_low {
            for &j in &high {
                let lambda = (values[j] - bound) / (values[j] - values[i]);
                let mut merged: Vec<(usize, f64)> = full
                    .atom(i)
                    .0
                    .iter()
                    .map(|&e| (e, lambda))
                    .chain(full.atom(j).0.iter().map(|&e| (e, 1.0 - lambda)))
                    .collect();
                merged.sort_by_key(|&(e, _)| e);
                let mut combined: Vec<(usize, f64)> = Vec::with_capacity(merged.len());
                for (e, w) in merged {
                    match combined.last_mut() {
                        Some(last) if last.0 == e => last.1 += w,
                        _ => combined.push((e, w)),
                    }
                }
                set.push(
                    combined.into_iter(),
                    AtomSource::Crossing {
                        low: i,
                        high: j,
                        lambda,
                    },
                );
            }
        }
        Ok(set)
    }

    fn push(&mut self, entries: impl Iterator<Item = (usize, f64)>, source: AtomSource) {
        for (e, w) in entries {
            self.indices.push(e);
            self.values.push(w);
        }
        self.offsets.push(self.indices.len());
        self.sources.push(source);
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    /// Dimension of behavior space (number of table entries).
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of deterministic vertices the atoms are built from.
    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn source(&self, atom: usize) -> AtomSource {
        self.sources[atom]
    }

    pub fn atom(&self, atom: usize) -> (&[usize], &[f64]) {
        let r = self.offsets[atom]..self.offsets[atom + 1];
        (&self.indices[r.clone()], &self.values[r])
    }

    pub fn dot(&self, atom: usize, g: &[f64]) -> f64 {
        let (idx, val) = self.atom(atom);
        idx.iter().zip(val).map(|(&e, &w)| g[e] * w).sum()
    }

    /// `scores[a] = <g, atom_a>` for every atom.
    pub fn scores(&self, g: &[f64], scores: &mut [f64]) {
        if self.len() >= PAR_THRESHOLD {
            scores
                .par_iter_mut()
                .enumerate()
                .for_each(|(a, s)| *s = self.dot(a, g));
        } else {
            for (a, s) in scores.iter_mut().enumerate() {
                *s = self.dot(a, g);
            }
        }
    }

    pub fn add_scaled(&self, atom: usize, scale: f64, x: &mut [f64]) {
        let (idx, val) = self.atom(atom);
        for (&e, &w) in idx.iter().zip(val) {
            x[e] += scale * w;
        }
    }

    /// Point `Σ_a weights[a] * atom_a`.
    pub fn combine(&self, weights: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        for (a, &w) in weights.iter().enumerate() {
            if w != 0.0 {
                self.add_scaled(a, w, &mut x);
            }
        }
        x
    }

    /// Pushes atom weights down onto the underlying vertices.
    pub fn vertex_weights(&self, weights: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.vertex_count];
        for (a, &w) in weights.iter().enumerate() {
            match self.sources[a] {
                AtomSource::Vertex(v) => out[v] += w,
                AtomSource::Crossing { low, high, lambda } => {
                    out[low] += w * lambda;
                    out[high] += w * (1.0 - lambda);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restricted_chsh_atoms() {
        let s = Scenario::homogeneous(2, 2, 2).unwrap();
        let mut coeff = vec![0.0; 16];
        for st in 0..4 {
            let m = s.setting_tuple(st);
            for j in 0..4 {
                let a = s.outcome_tuple(st, j);
                coeff[st * 4 + j] = if (a[0] + a[1] + m[0] * m[1]) % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
            }
        }
        let set = AtomSet::restricted_local_polytope(&s, &coeff, 2f64.sqrt(), 1 << 20).unwrap();
        // 8 vertices at -2, 8 at +2: 8 feasible + 64 crossings
        assert_eq!(set.len(), 72);
        for a in 0..set.len() {
            let beta = set.dot(a, &coeff);
            assert!(beta <= 2f64.sqrt() + 1e-12);
            let mass: f64 = set.atom(a).1.iter().sum();
            assert!((mass - 4.0).abs() < 1e-12);
        }
        let w = vec![1.0 / 72.0; 72];
        let vw = set.vertex_weights(&w);
        assert!((vw.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
