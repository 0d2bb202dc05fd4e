//! Two-dimensional diagonal problems, solved face-first.
//!
//! The corner `(0, 0)` follows `u_t = 0`; each face `x_i = 0` is a 1D
//! problem with the restricted payoff; the interior takes the face
//! solutions as Dirichlet data and advances with one theta sweep per
//! coordinate (locally one-dimensional splitting).

use crate::error::{LabError, Result};
use crate::models::{DiffusionModel, Payoff};
use crate::pde::grid::{Grid1D, TimeGrid};
use crate::pde::solve1d::{solve_1d, Scheme, Solution1D};
use crate::pde::tridiag::solve_tridiagonal;

#[derive(Debug, Clone)]
pub struct Solution2D {
    pub grid1: Grid1D,
    pub grid2: Grid1D,
    pub tgrid: TimeGrid,
    recorded: Vec<usize>,
    snapshots: Vec<Vec<f64>>,
    /// Solution on the face `x1 = 0`, over `grid2`.
    pub face_x1: Solution1D,
    /// Solution on the face `x2 = 0`, over `grid1`.
    pub face_x2: Solution1D,
}

impl Solution2D {
    pub fn recorded_times(&self) -> Vec<f64> {
        self.recorded.iter().map(|&k| self.tgrid.times()[k]).collect()
    }

    /// Values at a recorded level, indexed `i * m2 + j`.
    pub fn snapshot(&self, t: f64) -> Option<&[f64]> {
        let k = self.tgrid.index_of(t)?;
        let pos = self.recorded.iter().position(|&r| r == k)?;
        Some(&self.snapshots[pos])
    }

    pub fn value(&self, t: f64, i: usize, j: usize) -> Option<f64> {
        self.snapshot(t).map(|s| s[i * self.grid2.len() + j])
    }

    /// Values along `x1` at the `x2` node `j`.
    pub fn line_x1(&self, t: f64, j: usize) -> Option<Vec<f64>> {
        let m2 = self.grid2.len();
        self.snapshot(t).map(|s| (0..self.grid1.len()).map(|i| s[i * m2 + j]).collect())
    }

    /// Values along `x2` at the `x1` node `i`.
    pub fn line_x2(&self, t: f64, i: usize) -> Option<Vec<f64>> {
        let m2 = self.grid2.len();
        self.snapshot(t).map(|s| s[i * m2..(i + 1) * m2].to_vec())
    }

    pub fn write_csv(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(out, "t,x,x2,u")?;
        let m2 = self.grid2.len();
        for (pos, &k) in self.recorded.iter().enumerate() {
            let t = self.tgrid.times()[k];
            for (i, &x1) in self.grid1.nodes().iter().enumerate() {
                for (j, &x2) in self.grid2.nodes().iter().enumerate() {
                    writeln!(out, "{t},{x1},{x2},{}", self.snapshots[pos][i * m2 + j])?;
                }
            }
        }
        Ok(())
    }
}

/// Interior second-difference operator along one coordinate, frozen far end.
struct LineOperator {
    lo: Vec<f64>,
    mid: Vec<f64>,
    hi: Vec<f64>,
}

impl LineOperator {
    fn assemble(model: &DiffusionModel, coord: usize, nodes: &[f64], t: f64) -> Self {
        let m = nodes.len();
        let mut op = Self { lo: vec![0.0; m], mid: vec![0.0; m], hi: vec![0.0; m] };
        for j in 1..m - 1 {
            let hm = nodes[j] - nodes[j - 1];
            let hp = nodes[j + 1] - nodes[j];
            let s = hm + hp;
            let a = model.a(coord, nodes[j], t);
            op.lo[j] = a * 2.0 / (hm * s);
            op.hi[j] = a * 2.0 / (hp * s);
            op.mid[j] = -(op.lo[j] + op.hi[j]);
        }
        op
    }
}

struct LineSweeper {
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
    scratch: Vec<f64>,
}

impl LineSweeper {
    /// Theta step of `line` in place; `line[0]` becomes `left`, the last entry is frozen.
    fn sweep(
        &mut self,
        line: &mut [f64],
        old: &LineOperator,
        new: &LineOperator,
        theta: f64,
        dt: f64,
        left: f64,
        step: usize,
    ) -> Result<()> {
        let m = line.len();
        self.sub.resize(m, 0.0);
        self.diag.resize(m, 0.0);
        self.sup.resize(m, 0.0);
        let explicit = (1.0 - theta) * dt;
        if explicit != 0.0 {
            let mut prev = line[0];
            for j in 1..m - 1 {
                let cur = line[j];
                line[j] = cur + explicit * (old.lo[j] * prev + old.mid[j] * cur + old.hi[j] * line[j + 1]);
                prev = cur;
            }
        }
        for j in 1..m - 1 {
            self.sub[j] = -theta * dt * new.lo[j];
            self.diag[j] = 1.0 - theta * dt * new.mid[j];
            self.sup[j] = -theta * dt * new.hi[j];
        }
        self.diag[0] = 1.0;
        self.sup[0] = 0.0;
        self.sub[m - 1] = 0.0;
        self.diag[m - 1] = 1.0;
        line[0] = left;
        solve_tridiagonal(&self.sub, &self.diag, &self.sup, line, &mut self.scratch)
            .map_err(|row| LabError::SingularSystem { step, row })
    }
}

/// Solves the 2D problem face-first. `record` lists the times (snapped to
/// `tgrid` levels) at which full snapshots are kept; the first and last
/// levels are always kept.
pub fn solve_2d_with_faces(
    model: &DiffusionModel,
    payoff: &Payoff,
    grid1: &Grid1D,
    grid2: &Grid1D,
    tgrid: &TimeGrid,
    scheme: Scheme,
    record: &[f64],
) -> Result<Solution2D> {
    if model.dim() != 2 || payoff.dim != 2 {
        return Err(LabError::Parameter("solve_2d needs a diagonal 2D model and a 2D payoff".into()));
    }
    if !(0.5..=1.0).contains(&scheme.theta) {
        return Err(LabError::Parameter(format!("theta must lie in [1/2, 1], got {}", scheme.theta)));
    }
    // Faces first: x1 = 0 evolves in x2 only and vice versa.
    let face_scheme = Scheme { rannacher_steps: scheme.rannacher_steps, ..scheme };
    let face_x1 = solve_1d(&model.marginal(1), &payoff.restrict_to_face(0), grid2, tgrid, face_scheme)?;
    let face_x2 = solve_1d(&model.marginal(0), &payoff.restrict_to_face(1), grid1, tgrid, face_scheme)?;

    let (n1, n2) = (grid1.nodes(), grid2.nodes());
    let (m1, m2) = (n1.len(), n2.len());
    let times = tgrid.times();
    let last = tgrid.steps();

    let mut recorded: Vec<usize> = record
        .iter()
        .map(|&t| {
            tgrid.index_of(t).ok_or_else(|| LabError::Parameter(format!("record time {t} is not a time level")))
        })
        .collect::<Result<_>>()?;
    recorded.push(0);
    recorded.push(last);
    recorded.sort_unstable();
    recorded.dedup();

    let mut u = vec![0.0; m1 * m2];
    for (i, &x1) in n1.iter().enumerate() {
        for (j, &x2) in n2.iter().enumerate() {
            u[i * m2 + j] = payoff.eval(&[x1, x2]);
        }
    }
    if let Some(p) = u.iter().position(|v| !v.is_finite()) {
        return Err(LabError::NonFinitePayoff(p));
    }
    let mut snapshots = vec![u.clone()];

    let mut sweeper = LineSweeper { sub: Vec::new(), diag: Vec::new(), sup: Vec::new(), scratch: Vec::new() };
    let mut line1 = vec![0.0; m1];
    let mut old1 = LineOperator::assemble(model, 0, n1, times[0]);
    let mut old2 = LineOperator::assemble(model, 1, n2, times[0]);

    for n in 0..last {
        let t1 = times[n + 1];
        let dt = t1 - times[n];
        let theta = if n < scheme.rannacher_steps { 1.0 } else { scheme.theta };
        let new1 = LineOperator::assemble(model, 0, n1, t1);
        let new2 = LineOperator::assemble(model, 1, n2, t1);
        let f1 = face_x1.row(n + 1);
        let f2 = face_x2.row(n + 1);

        for j in 1..m2 {
            for i in 0..m1 {
                line1[i] = u[i * m2 + j];
            }
            sweeper.sweep(&mut line1, &old1, &new1, theta, dt, f1[j], n)?;
            for i in 0..m1 {
                u[i * m2 + j] = line1[i];
            }
        }
        for i in 1..m1 {
            let line = &mut u[i * m2..(i + 1) * m2];
            sweeper.sweep(line, &old2, &new2, theta, dt, f2[i], n)?;
        }
        // Faces are imposed, not solved.
        u[..m2].copy_from_slice(&f1[..m2]);
        for i in 0..m1 {
            u[i * m2] = f2[i];
        }
        if let Some(p) = u.iter().position(|v| !v.is_finite()) {
            return Err(LabError::Unstable { step: n + 1, node: p, t: t1 });
        }
        if recorded.binary_search(&(n + 1)).is_ok() {
            snapshots.push(u.clone());
        }
        old1 = new1;
        old2 = new2;
    }

    Ok(Solution2D {
        grid1: grid1.clone(),
        grid2: grid2.clone(),
        tgrid: tgrid.clone(),
        recorded,
        snapshots,
        face_x1,
        face_x2,
    })
}
