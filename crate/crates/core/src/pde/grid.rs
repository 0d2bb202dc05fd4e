use crate::error::{param, Result};

/// Spatial nodes on `[0, xmax]`, clustered at the degenerate boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    nodes: Vec<f64>,
    grading: f64,
}

/// `node[k] = xmax (k / (m - 1))^p`.
pub fn build_grid(xmax: f64, m: usize, p: f64) -> Result<Grid1D> {
    if !(xmax.is_finite() && xmax > 0.0) {
        return param(format!("xmax must be positive, got {xmax}"));
    }
    if m < 3 {
        return param(format!("grid needs at least 3 nodes, got {m}"));
    }
    if !(p.is_finite() && p >= 1.0) {
        return param(format!("grading exponent must be >= 1, got {p}"));
    }
    let last = (m - 1) as f64;
    let mut nodes: Vec<f64> = (0..m).map(|k| xmax * (k as f64 / last).powf(p)).collect();
    nodes[m - 1] = xmax;
    Ok(Grid1D { nodes, grading: p })
}

impl Grid1D {
    /// Graded grid whose `xmax` is stretched so that `anchor` is a node.
    pub fn with_node_at(xmax: f64, m: usize, p: f64, anchor: f64) -> Result<Grid1D> {
        if !(anchor > 0.0 && anchor < xmax) {
            return build_grid(xmax, m, p);
        }
        let last = (m - 1) as f64;
        let k = ((anchor / xmax).powf(1.0 / p) * last).round().clamp(1.0, last - 1.0);
        let stretched = anchor / (k / last).powf(p);
        let mut grid = build_grid(stretched, m, p)?;
        grid.nodes[k as usize] = anchor;
        Ok(grid)
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Grid1D> {
        if nodes.len() < 3 {
            return param("grid needs at least 3 nodes");
        }
        if nodes[0] != 0.0 {
            return param("first node must be 0");
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || !nodes[nodes.len() - 1].is_finite() {
            return param("grid nodes must be finite and strictly increasing");
        }
        Ok(Grid1D { nodes, grading: f64::NAN })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn xmax(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    /// Index of a node equal to `x` up to relative `1e-12`.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let k = self.nodes.partition_point(|&n| n < x);
        [k.saturating_sub(1), k]
            .into_iter()
            .filter(|&i| i < self.nodes.len())
            .find(|&i| (self.nodes[i] - x).abs() <= 1e-12 * x.abs().max(1.0))
    }
}

/// Increasing time levels; the first level carries the initial data.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn uniform(horizon: f64, steps: usize) -> Result<TimeGrid> {
        Self::uniform_from(0.0, horizon, steps)
    }

    pub fn uniform_from(start: f64, end: f64, steps: usize) -> Result<TimeGrid> {
        if steps == 0 || !(end > start) || start < 0.0 {
            return param(format!("bad time grid [{start}, {end}] with {steps} steps"));
        }
        let dt = (end - start) / steps as f64;
        let mut times: Vec<f64> = (0..=steps).map(|k| start + dt * k as f64).collect();
        times[steps] = end;
        Ok(TimeGrid { times })
    }

    /// `t_k = T (k / n)^q`, refined near the initial kink.
    pub fn graded(horizon: f64, steps: usize, q: f64) -> Result<TimeGrid> {
        if steps == 0 || !(horizon > 0.0) || !(q >= 1.0) {
            return param("bad graded time grid");
        }
        let times = (0..=steps).map(|k| horizon * (k as f64 / steps as f64).powf(q)).collect();
        Ok(TimeGrid { times })
    }

    pub fn from_times(times: Vec<f64>) -> Result<TimeGrid> {
        if times.len() < 2 || times[0] < 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return param("time levels must be >= 0 and strictly increasing");
        }
        Ok(TimeGrid { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Index of the level at `t` (absolute tolerance `1e-10`).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let k = self.times.partition_point(|&s| s < t - 1e-10);
        (k < self.times.len() && (self.times[k] - t).abs() <= 1e-10).then_some(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_examples() {
        assert_eq!(build_grid(1.0, 3, 1.0).unwrap().nodes(), &[0.0, 0.5, 1.0]);
        assert_eq!(build_grid(1.0, 3, 2.0).unwrap().nodes(), &[0.0, 0.25, 1.0]);
        assert_eq!(build_grid(4.0, 5, 1.0).unwrap().nodes(), &[0.0, 1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(build_grid(0.0, 10, 1.0).is_err());
        assert!(build_grid(1.0, 2, 1.0).is_err());
        assert!(build_grid(1.0, 10, 0.5).is_err());
        assert!(Grid1D::from_nodes(vec![0.0, 1.0, 1.0]).is_err());
        assert!(Grid1D::from_nodes(vec![0.1, 1.0, 2.0]).is_err());
    }

    #[test]
    fn anchored_grid_contains_strike() {
        for &(xmax, m, p, k) in &[(4.0, 101, 2.0, 1.0), (13.0, 801, 2.0, 1.0), (7.0, 64, 1.0, 2.3)] {
            let g = Grid1D::with_node_at(xmax, m, p, k).unwrap();
            assert_eq!(g.len(), m);
            assert!(g.index_of(k).is_some());
            assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
            assert!((g.xmax() - xmax).abs() / xmax < 0.2);
        }
    }

    #[test]
    fn time_grids() {
        let t = TimeGrid::uniform(1.0, 4).unwrap();
        assert_eq!(t.times(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(t.index_of(0.5), Some(2));
        assert_eq!(t.index_of(0.6), None);
        let g = TimeGrid::graded(1.0, 4, 2.0).unwrap();
        assert_eq!(g.times(), &[0.0, 0.0625, 0.25, 0.5625, 1.0]);
        assert!(TimeGrid::from_times(vec![0.0, 0.0]).is_err());
    }
}
