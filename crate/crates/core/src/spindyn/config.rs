use std::fmt;

use super::SpinDynError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Helicity {
    Minus,
    Plus,
}

impl Helicity {
    pub fn flipped(self) -> Self {
        match self {
            Helicity::Minus => Helicity::Plus,
            Helicity::Plus => Helicity::Minus,
        }
    }
}

impl fmt::Display for Helicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Helicity::Minus => "-",
            Helicity::Plus => "+",
        })
    }
}

/// Labelled trivalent multigraph. Edge identities are stable across moves;
/// recoupling rewires endpoints, so the endpoint list is part of the state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinNetworkConfig {
    pub vertices: usize,
    /// Endpoints stored with the smaller vertex first; self-loops allowed.
    pub edges: Vec<(usize, usize)>,
    pub twice_spin: Vec<u32>,
    /// Always 0: trivalent intertwiner spaces are one-dimensional.
    pub intertwiner: Vec<u32>,
    pub helicity: Vec<Helicity>,
}

impl SpinNetworkConfig {
    pub fn new(
        vertices: usize,
        edges: Vec<(usize, usize)>,
        twice_spin: Vec<u32>,
        helicity: Vec<Helicity>,
    ) -> Result<Self, SpinDynError> {
        if twice_spin.len() != edges.len() || helicity.len() != edges.len() {
            return Err(SpinDynError::InvalidModel(format!(
                "{} edges but {} spins and {} helicities",
                edges.len(),
                twice_spin.len(),
                helicity.len()
            )));
        }
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u >= vertices || v >= vertices) {
            return Err(SpinDynError::InvalidModel(format!("edge ({u}, {v}) uses an unknown vertex")));
        }
        let edges = edges.into_iter().map(|(u, v)| (u.min(v), u.max(v))).collect();
        Ok(SpinNetworkConfig {
            vertices,
            edges,
            twice_spin,
            intertwiner: vec![0; vertices],
            helicity,
        })
    }

    /// Theta graph: two vertices joined by three parallel edges.
    pub fn theta(twice_spin: [u32; 3], helicity: [Helicity; 3]) -> Self {
        SpinNetworkConfig::new(2, vec![(0, 1); 3], twice_spin.to_vec(), helicity.to_vec())
            .expect("theta graph shape is fixed")
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edge slots at `v`; a self-loop appears twice.
    pub fn incident(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(3);
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            if a == v {
                out.push(e);
            }
            if b == v {
                out.push(e);
            }
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices == 0 {
            return true;
        }
        let mut seen = vec![false; self.vertices];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(a, b) in &self.edges {
                for (from, to) in [(a, b), (b, a)] {
                    if from == v && !seen[to] {
                        seen[to] = true;
                        stack.push(to);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn is_trivalent(&self) -> bool {
        (0..self.vertices).all(|v| self.incident(v).len() == 3)
    }

    pub fn vertex_admissible(&self, v: usize) -> bool {
        let inc = self.incident(v);
        inc.len() == 3 && triad_admissible(
            self.twice_spin[inc[0]],
            self.twice_spin[inc[1]],
            self.twice_spin[inc[2]],
        )
    }

    /// Area-like cost `Σ sqrt(j(j+1))` with `j = s/2`.
    pub fn cost(&self) -> f64 {
        self.twice_spin.iter().map(|&s| edge_cost(s)).sum()
    }

    pub fn plus_count(&self) -> usize {
        self.helicity.iter().filter(|&&h| h == Helicity::Plus).count()
    }
}

pub fn edge_cost(twice_spin: u32) -> f64 {
    let s = twice_spin as f64;
    (s * (s + 2.0)).sqrt() / 2.0
}

/// Triangle inequality and even total on twice-spins.
pub fn triad_admissible(a: u32, b: u32, c: u32) -> bool {
    a.abs_diff(b) <= c && c <= a + b && (a + b + c).is_multiple_of(2)
}

/// Structural checks (trivalent, connected) plus every vertex triad.
pub fn admissible(config: &SpinNetworkConfig) -> bool {
    config.is_trivalent()
        && config.is_connected()
        && (0..config.vertices).all(|v| config.vertex_admissible(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Helicity::*;

    #[test]
    fn theta_examples() {
        assert!(admissible(&SpinNetworkConfig::theta([1, 1, 2], [Minus; 3])));
        assert!(!admissible(&SpinNetworkConfig::theta([1, 1, 4], [Minus; 3])));
        assert!(!admissible(&SpinNetworkConfig::theta([1, 1, 1], [Minus; 3])));
        assert!(admissible(&SpinNetworkConfig::theta([0, 0, 0], [Plus; 3])));
    }

    #[test]
    fn structure_checks() {
        // a single vertex with a self-loop and a dangling edge is not trivalent
        let c = SpinNetworkConfig::new(2, vec![(0, 0), (0, 1)], vec![2, 0], vec![Minus; 2]).unwrap();
        assert!(!c.is_trivalent());
        // two disjoint "dumbbell halves" are trivalent at each end but disconnected
        let d = SpinNetworkConfig::new(
            4,
            vec![(0, 0), (0, 1), (1, 1), (2, 2), (2, 3), (3, 3)],
            vec![2, 0, 2, 2, 0, 2],
            vec![Minus; 6],
        )
        .unwrap();
        assert!(d.is_trivalent());
        assert!(!d.is_connected());
        assert!(!admissible(&d));
    }

    #[test]
    fn dumbbell_with_loops() {
        let c = SpinNetworkConfig::new(2, vec![(0, 0), (0, 1), (1, 1)], vec![2, 0, 4], vec![Minus; 3]).unwrap();
        assert!(admissible(&c));
        let odd = SpinNetworkConfig::new(2, vec![(0, 0), (0, 1), (1, 1)], vec![2, 1, 4], vec![Minus; 3]).unwrap();
        assert!(!admissible(&odd));
    }

    #[test]
    fn cost_values() {
        assert_eq!(edge_cost(0), 0.0);
        assert!((edge_cost(1) - 0.75f64.sqrt()).abs() < 1e-15);
        assert!((edge_cost(2) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bad_shapes() {
        assert!(SpinNetworkConfig::new(2, vec![(0, 2)], vec![0], vec![Minus]).is_err());
        assert!(SpinNetworkConfig::new(2, vec![(0, 1)], vec![], vec![Minus]).is_err());
    }
}
