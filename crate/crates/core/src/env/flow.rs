//! Steady airflow on a staggered uniform grid.
//!
//! Walls block cells, vents prescribe face-normal velocities on the outer
//! boundary, and a potential solve (conjugate gradient on the free-cell
//! graph Laplacian) fills in the interior so that every free cell is
//! discretely divergence-free. Velocities live on cell faces — the only
//! discretization where "no flow through walls" and "zero divergence per
//! cell" hold exactly at the same time; cell-centered and point queries are
//! averaged/interpolated views of the face field.

use super::Environment;
use crate::geometry::{segment_intersects_rect, Vec2};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    /// Grid cell size in meters.
    pub cell: f64,
    pub nx: usize,
    pub ny: usize,
    /// x-velocity on vertical faces: (nx+1) x ny, index j*(nx+1)+i,
    /// face (i,j) at position (i*cell, (j+0.5)*cell).
    u: Vec<f64>,
    /// y-velocity on horizontal faces: nx x (ny+1), index j*nx+i,
    /// face (i,j) at position ((i+0.5)*cell, j*cell).
    v: Vec<f64>,
    /// Cells blocked by walls: nx x ny.
    solid: Vec<bool>,
}

impl FlowField {
    /// Quiescent air over an all-free grid (useful for isolated gas tests).
    pub fn still(nx: usize, ny: usize, cell: f64) -> Self {
        Self {
            cell,
            nx,
            ny,
            u: vec![0.0; (nx + 1) * ny],
            v: vec![0.0; nx * (ny + 1)],
            solid: vec![false; nx * ny],
        }
    }

    pub(crate) fn from_raw(
        cell: f64,
        nx: usize,
        ny: usize,
        u: Vec<f64>,
        v: Vec<f64>,
        solid: Vec<bool>,
    ) -> Result<Self> {
        if u.len() != (nx + 1) * ny || v.len() != nx * (ny + 1) || solid.len() != nx * ny {
            return Err(Error::Bundle("flow grid size mismatch".to_string()));
        }
        Ok(Self {
            cell,
            nx,
            ny,
            u,
            v,
            solid,
        })
    }

    pub(crate) fn u_slice(&self) -> &[f64] {
        &self.u
    }

    pub(crate) fn v_slice(&self) -> &[f64] {
        &self.v
    }

    pub(crate) fn solid_slice(&self) -> &[bool] {
        &self.solid
    }

    pub fn is_solid(&self, i: usize, j: usize) -> bool {
        self.solid[j * self.nx + i]
    }

    fn u_at(&self, i: usize, j: usize) -> f64 {
        self.u[j * (self.nx + 1) + i]
    }

    fn v_at(&self, i: usize, j: usize) -> f64 {
        self.v[j * self.nx + i]
    }

    /// Net outflow per unit area of cell (i,j), in 1/s.
    pub fn divergence(&self, i: usize, j: usize) -> f64 {
        (self.u_at(i + 1, j) - self.u_at(i, j) + self.v_at(i, j + 1) - self.v_at(i, j))
            / self.cell
    }

    /// Largest |divergence| over free cells.
    pub fn max_divergence(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.ny {
            for i in 0..self.nx {
                if !self.is_solid(i, j) {
                    worst = worst.max(self.divergence(i, j).abs());
                }
            }
        }
        worst
    }

    /// Face-averaged velocity at the center of cell (i,j).
    pub fn cell_velocity(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(
            0.5 * (self.u_at(i, j) + self.u_at(i + 1, j)),
            0.5 * (self.v_at(i, j) + self.v_at(i, j + 1)),
        )
    }

    /// Velocity at an arbitrary point: per-component bilinear interpolation
    /// on each face grid, clamped at the domain edge.
    pub fn velocity_at(&self, p: Vec2) -> Vec2 {
        let h = self.cell;
        let ux = bilerp(&self.u, self.nx + 1, self.ny, p.x / h, p.y / h - 0.5);
        let vy = bilerp(&self.v, self.nx, self.ny + 1, p.x / h - 0.5, p.y / h);
        Vec2::new(ux, vy)
    }
}

pub(crate) fn bilerp(vals: &[f64], w: usize, h: usize, x: f64, y: f64) -> f64 {
    let x = x.clamp(0.0, (w - 1) as f64);
    let y = y.clamp(0.0, (h - 1) as f64);
    let i0 = (x.floor() as usize).min(w - 1);
    let j0 = (y.floor() as usize).min(h - 1);
    let i1 = (i0 + 1).min(w - 1);
    let j1 = (j0 + 1).min(h - 1);
    let fx = x - i0 as f64;
    let fy = y - j0 as f64;
    let at = |i: usize, j: usize| vals[j * w + i];
    at(i0, j0) * (1.0 - fx) * (1.0 - fy)
        + at(i1, j0) * fx * (1.0 - fy)
        + at(i0, j1) * (1.0 - fx) * fy
        + at(i1, j1) * fx * fy
}

/// True for wall segments that lie exactly on the outer arena boundary;
/// those are represented by boundary faces, not by blocked cells.
fn on_outer_boundary(seg: &crate::geometry::Segment, size: Vec2) -> bool {
    let e = 1e-9;
    (seg.a.x.abs() < e && seg.b.x.abs() < e)
        || ((seg.a.x - size.x).abs() < e && (seg.b.x - size.x).abs() < e)
        || (seg.a.y.abs() < e && seg.b.y.abs() < e)
        || ((seg.a.y - size.y).abs() < e && (seg.b.y - size.y).abs() < e)
}

/// Solve the steady airflow for an environment.
///
/// `resolution` is the grid cell size (must tile the arena), `tolerance`
/// the maximum allowed |divergence| per free cell in 1/s, and `max_iters`
/// the conjugate-gradient iteration cap. Outlet speeds are rescaled once so
/// total outflow exactly matches total inflow. Fails with `NoVents` when
/// the environment has no usable inlet or outlet, and `NoConvergence` when
/// the iteration cap is hit.
pub fn solve_flow(
    env: &Environment,
    resolution: f64,
    tolerance: f64,
    max_iters: usize,
) -> Result<FlowField> {
    let h = resolution;
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Config(format!("bad flow resolution {h}")));
    }
    let nx = (env.size.x / h).round() as usize;
    let ny = (env.size.y / h).round() as usize;
    if nx < 2
        || ny < 2
        || (nx as f64 * h - env.size.x).abs() > 1e-6
        || (ny as f64 * h - env.size.y).abs() > 1e-6
    {
        return Err(Error::Config(format!(
            "resolution {h} does not tile a {}x{} arena",
            env.size.x, env.size.y
        )));
    }

    // Blocked cells: any cell touched by an interior wall segment.
    let mut solid = vec![false; nx * ny];
    let interior: Vec<_> = env
        .walls
        .iter()
        .filter(|w| !on_outer_boundary(w, env.size))
        .collect();
    for j in 0..ny {
        for i in 0..nx {
            let lo = Vec2::new(i as f64 * h, j as f64 * h);
            let hi = Vec2::new((i + 1) as f64 * h, (j + 1) as f64 * h);
            if interior.iter().any(|w| segment_intersects_rect(w, lo, hi)) {
                solid[j * nx + i] = true;
            }
        }
    }

    let mut u = vec![0.0; (nx + 1) * ny];
    let mut v = vec![0.0; nx * (ny + 1)];

    // Prescribe vent faces. A face is usable only if its interior-side cell
    // is free. Returns the total inflow (m^2/s, per unit depth) it carries.
    #[derive(Clone, Copy)]
    enum Kind {
        Inlet,
        Outlet,
    }
    let mut outlet_faces: Vec<(bool, usize)> = Vec::new(); // (is_u_grid, index)
    let mut q_in = 0.0;
    let mut q_out = 0.0;
    let mut prescribe = |span: &super::BoundarySpan,
                         kind: Kind,
                         u: &mut Vec<f64>,
                         v: &mut Vec<f64>,
                         outlet_faces: &mut Vec<(bool, usize)>|
     -> Result<()> {
        let n = span.normal;
        let dir = match kind {
            Kind::Inlet => n * span.speed,
            Kind::Outlet => n * -span.speed,
        };
        let mut used = 0usize;
        if n.x.abs() > 0.5 {
            // Vertical boundary: u-faces at i = 0 (left) or nx (right).
            let i = if n.x > 0.0 { 0 } else { nx };
            let ci = if n.x > 0.0 { 0 } else { nx - 1 };
            let (ylo, yhi) = (span.seg.a.y.min(span.seg.b.y), span.seg.a.y.max(span.seg.b.y));
            for j in 0..ny {
                let mid = (j as f64 + 0.5) * h;
                if mid >= ylo - 1e-9 && mid <= yhi + 1e-9 && !solid[j * nx + ci] {
                    let idx = j * (nx + 1) + i;
                    u[idx] = dir.x;
                    used += 1;
                    match kind {
                        Kind::Inlet => q_in += span.speed * h,
                        Kind::Outlet => {
                            q_out += span.speed * h;
                            outlet_faces.push((true, idx));
                        }
                    }
                }
            }
        } else {
            // Horizontal boundary: v-faces at j = 0 (bottom) or ny (top).
            let j = if n.y > 0.0 { 0 } else { ny };
            let cj = if n.y > 0.0 { 0 } else { ny - 1 };
            let (xlo, xhi) = (span.seg.a.x.min(span.seg.b.x), span.seg.a.x.max(span.seg.b.x));
            for i in 0..nx {
                let mid = (i as f64 + 0.5) * h;
                if mid >= xlo - 1e-9 && mid <= xhi + 1e-9 && !solid[cj * nx + i] {
                    let idx = j * nx + i;
                    v[idx] = dir.y;
                    used += 1;
                    match kind {
                        Kind::Inlet => q_in += span.speed * h,
                        Kind::Outlet => {
                            q_out += span.speed * h;
                            outlet_faces.push((false, idx));
                        }
                    }
                }
            }
        }
        if used == 0 {
            return Err(Error::EnvGen(
                "vent span has no usable open faces".to_string(),
            ));
        }
        Ok(())
    };
    if env.inlets.is_empty() || env.outlets.is_empty() {
        return Err(Error::NoVents);
    }
    for span in &env.inlets {
        prescribe(span, Kind::Inlet, &mut u, &mut v, &mut outlet_faces)?;
    }
    for span in &env.outlets {
        prescribe(span, Kind::Outlet, &mut u, &mut v, &mut outlet_faces)?;
    }
    if q_in <= 0.0 || q_out <= 0.0 {
        return Err(Error::NoVents);
    }
    // Exact mass balance: rescale every outlet face once.
    let scale = q_in / q_out;
    for &(on_u, idx) in &outlet_faces {
        if on_u {
            u[idx] *= scale;
        } else {
            v[idx] *= scale;
        }
    }

    // Free-cell indexing for the potential solve.
    let mut index = vec![usize::MAX; nx * ny];
    let mut cells = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if !solid[j * nx + i] {
                index[j * nx + i] = cells.len();
                cells.push((i, j));
            }
        }
    }
    let n_free = cells.len();
    if n_free == 0 {
        return Err(Error::EnvGen("no free cells in flow grid".to_string()));
    }
    let mut nbrs: Vec<[usize; 4]> = vec![[usize::MAX; 4]; n_free];
    for (c, &(i, j)) in cells.iter().enumerate() {
        let mut k = 0;
        let mut add = |ii: i64, jj: i64| {
            if ii >= 0 && jj >= 0 && (ii as usize) < nx && (jj as usize) < ny {
                let idx = index[jj as usize * nx + ii as usize];
                if idx != usize::MAX {
                    nbrs[c][k] = idx;
                    k += 1;
                }
            }
        };
        add(i as i64 - 1, j as i64);
        add(i as i64 + 1, j as i64);
        add(i as i64, j as i64 - 1);
        add(i as i64, j as i64 + 1);
    }

    // Right-hand side: h * (net prescribed outflow of each cell).
    let mut b = vec![0.0; n_free];
    for (c, &(i, j)) in cells.iter().enumerate() {
        let flux = u[j * (nx + 1) + i + 1] - u[j * (nx + 1) + i] + v[(j + 1) * nx + i]
            - v[j * nx + i];
        b[c] = h * flux;
    }

    // The solve is compatible only if each connected free region has zero
    // net prescribed flux (a region fed by an inlet with no outlet cannot
    // satisfy conservation). Check per component, then remove numerical dust.
    {
        let mut comp = vec![usize::MAX; n_free];
        let mut n_comp = 0;
        for start in 0..n_free {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            comp[start] = n_comp;
            while let Some(c) = stack.pop() {
                for &nb in &nbrs[c] {
                    if nb != usize::MAX && comp[nb] == usize::MAX {
                        comp[nb] = n_comp;
                        stack.push(nb);
                    }
                }
            }
            n_comp += 1;
        }
        let mut sums = vec![0.0; n_comp];
        let mut counts = vec![0usize; n_comp];
        for c in 0..n_free {
            sums[comp[c]] += b[c];
            counts[comp[c]] += 1;
        }
        for (k, &s) in sums.iter().enumerate() {
            if s.abs() > 1e-9 * h {
                return Err(Error::EnvGen(
                    "inlet and outlet are not connected through free space".to_string(),
                ));
            }
            let mean = s / counts[k] as f64;
            for c in 0..n_free {
                if comp[c] == k {
                    b[c] -= mean;
                }
            }
        }
    }

    // Conjugate gradient on A phi = b, A = graph Laplacian of free cells.
    // Residual r = b - A phi equals h^2 * divergence, so the stopping rule
    // max|r| <= 0.1 * tolerance * h^2 leaves an order of margin.
    let tol_r = 0.1 * tolerance * h * h;
    let apply = |x: &[f64], y: &mut [f64]| {
        for c in 0..n_free {
            let mut acc = 0.0;
            let mut deg = 0.0;
            for &nb in &nbrs[c] {
                if nb != usize::MAX {
                    acc += x[nb];
                    deg += 1.0;
                }
            }
            y[c] = deg * x[c] - acc;
        }
    };
    let mut phi = vec![0.0; n_free];
    let mut r = b.clone();
    let mut p = r.clone();
    let mut ap = vec![0.0; n_free];
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let max_abs = |a: &[f64]| a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut rs = dot(&r, &r);
    let mut converged = max_abs(&r) <= tol_r;
    let mut iters = 0;
    while !converged && iters < max_iters {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break; // null-space direction; residual check below decides
        }
        let alpha = rs / pap;
        for c in 0..n_free {
            phi[c] += alpha * p[c];
            r[c] -= alpha * ap[c];
        }
        let rs_new = dot(&r, &r);
        converged = max_abs(&r) <= tol_r;
        let beta = rs_new / rs;
        rs = rs_new;
        for c in 0..n_free {
            p[c] = r[c] + beta * p[c];
        }
        iters += 1;
    }
    if !converged {
        return Err(Error::NoConvergence {
            iters,
            residual: max_abs(&r) / (h * h),
        });
    }

    // Fill interior free-free faces from the potential.
    for j in 0..ny {
        for i in 1..nx {
            let a = index[j * nx + i - 1];
            let c = index[j * nx + i];
            if a != usize::MAX && c != usize::MAX {
                u[j * (nx + 1) + i] = (phi[c] - phi[a]) / h;
            }
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            let a = index[(j - 1) * nx + i];
            let c = index[j * nx + i];
            if a != usize::MAX && c != usize::MAX {
                v[j * nx + i] = (phi[c] - phi[a]) / h;
            }
        }
    }

    Ok(FlowField {
        cell: h,
        nx,
        ny,
        u,
        v,
        solid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{boundary_walls, BoundarySpan, Environment};
    use crate::geometry::{Rect, Segment};

    fn corridor() -> Environment {
        let size = Vec2::new(10.0, 2.0);
        Environment {
            id: "corridor".into(),
            size,
            walls: boundary_walls(size),
            inlets: vec![BoundarySpan {
                seg: Segment::new(Vec2::ZERO, Vec2::new(0.0, 2.0)),
                normal: Vec2::new(1.0, 0.0),
                speed: 1.0,
            }],
            outlets: vec![BoundarySpan {
                seg: Segment::new(Vec2::new(10.0, 0.0), Vec2::new(10.0, 2.0)),
                normal: Vec2::new(-1.0, 0.0),
                speed: 1.0,
            }],
            source_pos: Vec2::new(5.0, 1.0),
            spawn_region: Rect::new(Vec2::new(1.0, 0.5), Vec2::new(2.0, 1.5)),
            seed: 0,
        }
    }

    #[test]
    fn corridor_flow_is_uniform() {
        let flow = solve_flow(&corridor(), 0.1, 1e-3, 20_000).unwrap();
        for &(x, y) in &[(2.0, 1.0), (5.0, 0.5), (5.0, 1.5), (8.0, 1.0), (5.0, 1.0)] {
            let vel = flow.velocity_at(Vec2::new(x, y));
            assert!((vel.x - 1.0).abs() <= 0.05, "u={} at ({x},{y})", vel.x);
            assert!(vel.y.abs() <= 0.05, "v={} at ({x},{y})", vel.y);
        }
        assert!(flow.max_divergence() <= 1e-3);
    }

    #[test]
    fn sealed_box_has_no_flow_solution() {
        let mut env = corridor();
        env.inlets.clear();
        env.outlets.clear();
        match solve_flow(&env, 0.1, 1e-3, 1000) {
            Err(crate::Error::NoVents) => {}
            other => panic!("expected NoVents, got {other:?}"),
        }
    }

    #[test]
    fn unbalanced_vent_sizes_still_conserve_mass() {
        // Outlet half as long as the inlet: outlet speed doubles so the
        // fluxes match, and the interior stays divergence-free.
        let mut env = corridor();
        env.outlets[0].seg = Segment::new(Vec2::new(10.0, 0.5), Vec2::new(10.0, 1.5));
        let flow = solve_flow(&env, 0.1, 1e-3, 20_000).unwrap();
        assert!(flow.max_divergence() <= 1e-3);
        // Outlet faces carry inlet flux 2.0 m^2/s across 1.0 m.
        let out_speed = flow.velocity_at(Vec2::new(10.0, 1.0)).x;
        assert!((out_speed - 2.0).abs() < 0.2, "out={out_speed}");
    }

    #[test]
    fn walls_deflect_flow() {
        // A slab across most of the corridor forces flow through the gap.
        let mut env = corridor();
        env.walls
            .push(Segment::new(Vec2::new(5.0, 0.0), Vec2::new(5.0, 1.4)));
        let flow = solve_flow(&env, 0.1, 1e-3, 20_000).unwrap();
        assert!(flow.max_divergence() <= 1e-3);
        let gap = flow.velocity_at(Vec2::new(5.05, 1.75));
        let blocked = flow.velocity_at(Vec2::new(5.05, 0.5));
        assert!(
            gap.norm() > blocked.norm(),
            "gap {} vs blocked {}",
            gap.norm(),
            blocked.norm()
        );
        // Faster than the free-corridor speed through the constriction.
        assert!(gap.x > 1.5, "gap.x={}", gap.x);
    }

    #[test]
    fn disconnected_outlet_is_an_error() {
        // Wall seals the corridor fully: inlet side and outlet side become
        // separate regions, each with unbalanced flux.
        let mut env = corridor();
        env.walls
            .push(Segment::new(Vec2::new(5.0, 0.0), Vec2::new(5.0, 2.0)));
        let err = solve_flow(&env, 0.1, 1e-3, 20_000).unwrap_err();
        assert!(
            err.to_string().contains("not connected"),
            "unexpected: {err}"
        );
    }

    #[test]
    fn divergence_is_exact_zero_interior_for_uniform_field() {
        let mut f = FlowField::still(4, 3, 0.5);
        for val in f.u.iter_mut() {
            *val = 1.0;
        }
        assert_eq!(f.max_divergence(), 0.0);
        assert_eq!(f.cell_velocity(1, 1), Vec2::new(1.0, 0.0));
        assert_eq!(f.velocity_at(Vec2::new(1.0, 0.75)), Vec2::new(1.0, 0.0));
    }

    #[test]
    fn resolution_must_tile_arena() {
        assert!(solve_flow(&corridor(), 0.3, 1e-3, 100).is_err());
    }
}
