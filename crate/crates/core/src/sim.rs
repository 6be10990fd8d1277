//! Event-driven evolution of the wavefront-tracking solution.
//!
//! Fronts are kept in a vector sorted by position. A γ-jump sits at every
//! region boundary for the whole run, so a front or the bottleneck reaching a
//! boundary is an ordinary collision with that front. At each event every
//! front meeting at the collision point is removed and one Riemann problem
//! between the outermost states is solved in its place — constrained when the
//! bottleneck is there too.

use std::sync::Arc;

use serde::Serialize;

use crate::diagnostics::{diag_row, front_temple, varpi, DiagRow, RunBounds, VarpiBranch};
use crate::error::{Error, Result};
use crate::flux::velocity_raw;
use crate::grid::{build_grid, GridRef, GridSystem};
use crate::network::RoadNetwork;
use crate::profile::{sample_initial, InitialProfile, Piecewise, StateProfile};
use crate::riemann::{solve_classical, solve_constrained, ConstraintCase, Wave, WaveKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunOptions {
    /// Relative collision tolerance; the absolute one is `tol · max(1, |t|, |x|)`.
    pub collision_tol: f64,
    pub front_cap: usize,
    /// Events allowed at one space-time point before giving up.
    pub cascade_limit: usize,
    /// Width `ς` of the zone before a boundary where the bottleneck term
    /// switches to the downstream region; `None` means `2 δ̄` of the grid.
    /// `Some(0.0)` is the `ς → 0+` limit (switch only on the boundary).
    pub varsigma: Option<f64>,
    /// Re-check state chaining and bottleneck consistency after every event.
    pub check_invariants: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            collision_tol: 1e-12,
            front_cap: 1_000_000,
            cascade_limit: 64,
            varsigma: None,
            check_invariants: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Front {
    pub id: u64,
    /// Position at time `t0`.
    pub x0: f64,
    pub t0: f64,
    pub speed: f64,
    pub left: GridRef,
    pub right: GridRef,
    pub kind: WaveKind,
    #[serde(skip)]
    trace: usize,
}

impl Front {
    pub fn pos(&self, t: f64) -> f64 {
        self.x0 + self.speed * (t - self.t0)
    }

    pub fn birth(&self) -> f64 {
        self.t0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bottleneck {
    pub y0: f64,
    pub t0: f64,
    pub speed: f64,
    pub region: usize,
    /// Number of fronts left of, or riding on, the bottleneck.
    pub slot: usize,
}

impl Bottleneck {
    pub fn pos(&self, t: f64) -> f64 {
        self.y0 + self.speed * (t - self.t0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventClass {
    ZZ,
    ZBottleneck,
    ZGamma,
    BottleneckGamma,
    BottleneckBoundary,
}

impl EventClass {
    pub fn as_str(self) -> &'static str {
        match self {
            EventClass::ZZ => "z-z",
            EventClass::ZBottleneck => "z-bottleneck",
            EventClass::ZGamma => "z-gamma",
            EventClass::BottleneckGamma => "bottleneck-gamma",
            EventClass::BottleneckBoundary => "bottleneck-boundary",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventRecord {
    pub t: f64,
    pub x: f64,
    pub class: EventClass,
    pub fronts_in: Vec<u64>,
    pub fronts_out: Vec<u64>,
    pub temple_before: f64,
    pub temple_after: f64,
    pub varpi_before: VarpiBranch,
    pub varpi_after: VarpiBranch,
    pub case: Option<ConstraintCase>,
    pub front_count: usize,
}

/// Space-time segment of one front, for audits and plots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontTrace {
    pub id: u64,
    pub kind: WaveKind,
    pub left: GridRef,
    pub right: GridRef,
    pub t_start: f64,
    pub t_end: f64,
    pub x_start: f64,
    pub speed: f64,
}

impl FrontTrace {
    pub fn pos(&self, t: f64) -> f64 {
        self.x_start + self.speed * (t - self.t_start)
    }
}

/// Bottleneck state from `t` until the next knot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryKnot {
    pub t: f64,
    pub y: f64,
    pub ydot: f64,
    pub region: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub profile: StateProfile,
    pub y: f64,
    pub ydot: f64,
    pub region: usize,
    pub rho_left: GridRef,
    pub rho_right: GridRef,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NextEvent {
    pub t: f64,
    pub x: f64,
}

#[derive(Debug, Clone)]
pub struct SimState {
    pub grid: Arc<GridSystem>,
    pub opts: RunOptions,
    pub t: f64,
    pub fronts: Vec<Front>,
    pub far_left: GridRef,
    pub bottleneck: Bottleneck,
    pub events: Vec<EventRecord>,
    pub traces: Vec<FrontTrace>,
    pub trajectory: Vec<TrajectoryKnot>,
    /// Collision time of fronts `i` and `i + 1`.
    hits: Vec<f64>,
    next_id: u64,
    front_sum: f64,
    cascade: (f64, f64, usize),
    max_fronts: usize,
}

impl SimState {
    /// Solve the initial Riemann problems: constrained at `y0`, classical at
    /// every other breakpoint of the (already sampled) profile.
    pub fn init(grid: Arc<GridSystem>, profile: &StateProfile, y0: f64, opts: RunOptions) -> Result<Self> {
        if !y0.is_finite() {
            return Err(Error::Config(format!("bottleneck position {y0} must be finite")));
        }
        let mut jumps: Vec<(f64, GridRef, GridRef)> = profile
            .breaks
            .iter()
            .enumerate()
            .map(|(i, &x)| (x, profile.values[i], profile.values[i + 1]))
            .collect();
        if !profile.breaks.contains(&y0) {
            let s = profile.eval(y0);
            let at = profile.breaks.partition_point(|&b| b < y0);
            jumps.insert(at, (y0, s, s));
        }

        let mut st = SimState {
            grid: grid.clone(),
            opts,
            t: 0.0,
            fronts: Vec::new(),
            far_left: profile.values[0],
            bottleneck: Bottleneck { y0, t0: 0.0, speed: 0.0, region: 0, slot: 0 },
            events: Vec::new(),
            traces: Vec::new(),
            trajectory: Vec::new(),
            hits: Vec::new(),
            next_id: 0,
            front_sum: 0.0,
            cascade: (f64::NAN, f64::NAN, 0),
            max_fronts: 0,
        };

        for (x, l, r) in jumps {
            if x == y0 {
                let sol = solve_constrained(&grid, l, r)?;
                st.bottleneck.region = r.region;
                st.bottleneck.speed = sol.ydot;
                let before = st.fronts.len();
                let waves = st.snap_to_bottleneck(sol.seq.waves, sol.ydot);
                let riding = waves.iter().filter(|w| w.speed <= sol.ydot).count();
                st.push_waves(&waves, x, 0.0);
                st.bottleneck.slot = before + riding;
            } else {
                let seq = solve_classical(&grid, l, r)?;
                st.push_waves(&seq.waves, x, 0.0);
            }
        }
        st.hits = vec![f64::INFINITY; st.fronts.len()];
        for i in 0..st.fronts.len() {
            st.refresh_hit(i);
        }
        st.front_sum = st.fronts.iter().map(|f| front_temple(&st.grid, f.left, f.right, f.kind)).sum();
        st.trajectory.push(TrajectoryKnot { t: 0.0, y: y0, ydot: st.bottleneck.speed, region: st.bottleneck.region });
        st.max_fronts = st.fronts.len();
        st.check_cap()?;
        if st.opts.check_invariants {
            st.check_consistency()?;
        }
        Ok(st)
    }

    fn tol(&self, t: f64, x: f64) -> f64 {
        self.opts.collision_tol * 1f64.max(t.abs()).max(x.abs())
    }

    fn snap_to_bottleneck(&self, mut waves: Vec<Wave>, ydot: f64) -> Vec<Wave> {
        for w in &mut waves {
            if (w.speed - ydot).abs() <= 1e-12 {
                w.speed = ydot;
            }
        }
        waves
    }

    fn push_waves(&mut self, waves: &[Wave], x: f64, t: f64) {
        let new = self.make_fronts(waves, x, t);
        self.fronts.extend(new);
    }

    fn make_fronts(&mut self, waves: &[Wave], x: f64, t: f64) -> Vec<Front> {
        waves
            .iter()
            .filter(|w| w.left != w.right)
            .map(|w| {
                let id = self.next_id;
                self.next_id += 1;
                self.traces.push(FrontTrace {
                    id,
                    kind: w.kind,
                    left: w.left,
                    right: w.right,
                    t_start: t,
                    t_end: f64::INFINITY,
                    x_start: x,
                    speed: w.speed,
                });
                Front {
                    id,
                    x0: x,
                    t0: t,
                    speed: w.speed,
                    left: w.left,
                    right: w.right,
                    kind: w.kind,
                    trace: self.traces.len() - 1,
                }
            })
            .collect()
    }

    fn refresh_hit(&mut self, i: usize) {
        if i + 1 >= self.fronts.len() {
            if i < self.hits.len() {
                self.hits[i] = f64::INFINITY;
            }
            return;
        }
        let (a, b) = (&self.fronts[i], &self.fronts[i + 1]);
        self.hits[i] = if a.speed > b.speed {
            let gap = (b.pos(self.t) - a.pos(self.t)).max(0.0);
            self.t + gap / (a.speed - b.speed)
        } else {
            f64::INFINITY
        };
    }

    /// State immediately right of the bottleneck.
    pub fn right_of_bottleneck(&self) -> GridRef {
        let s = self.bottleneck.slot;
        if s == 0 {
            self.far_left
        } else {
            self.fronts[s - 1].right
        }
    }

    /// State immediately left of the bottleneck: left of every front riding on it.
    pub fn left_of_bottleneck(&self) -> GridRef {
        let b = &self.bottleneck;
        let y = b.pos(self.t);
        let tol = self.tol(self.t, y);
        let mut s = b.slot;
        while s > 0 {
            let f = &self.fronts[s - 1];
            if f.speed == b.speed && (f.pos(self.t) - y).abs() <= tol {
                s -= 1;
            } else {
                break;
            }
        }
        if s == b.slot {
            self.right_of_bottleneck()
        } else {
            self.fronts[s].left
        }
    }

    pub fn far_right(&self) -> GridRef {
        self.fronts.last().map_or(self.far_left, |f| f.right)
    }

    pub fn current_varpi(&self) -> (f64, VarpiBranch) {
        let y = self.bottleneck.pos(self.t);
        varpi(
            &self.grid,
            self.bottleneck.region,
            y,
            self.left_of_bottleneck(),
            self.right_of_bottleneck(),
            self.varsigma().max(self.tol(self.t, y)),
        )
    }

    pub fn varsigma(&self) -> f64 {
        self.opts.varsigma.unwrap_or(self.grid.delta_hi * 2.0)
    }

    /// Temple functional of the current state.
    pub fn temple(&self) -> f64 {
        self.front_sum + self.current_varpi().0
    }

    pub fn front_count(&self) -> usize {
        self.fronts.len()
    }

    /// Largest front count seen so far.
    pub fn max_front_count(&self) -> usize {
        self.max_fronts
    }

    fn check_cap(&self) -> Result<()> {
        if self.fronts.len() > self.opts.front_cap {
            return Err(Error::FrontExplosion { count: self.fronts.len(), cap: self.opts.front_cap, t: self.t });
        }
        Ok(())
    }

    /// Earliest collision (front pair or bottleneck with a neighbour), if any.
    pub fn next_event(&self) -> Option<NextEvent> {
        let mut best: Option<(f64, f64)> = None;
        let mut consider = |t: f64, x: f64| {
            if t.is_finite() && best.is_none_or(|(bt, _)| t < bt) {
                best = Some((t, x));
            }
        };
        let (i_min, t_min) = self
            .hits
            .iter()
            .enumerate()
            .fold((usize::MAX, f64::INFINITY), |acc, (i, &t)| if t < acc.1 { (i, t) } else { acc });
        if i_min != usize::MAX {
            consider(t_min, self.fronts[i_min].pos(t_min));
        }
        let b = &self.bottleneck;
        let y = b.pos(self.t);
        if b.slot > 0 {
            let f = &self.fronts[b.slot - 1];
            if f.speed > b.speed {
                let gap = (y - f.pos(self.t)).max(0.0);
                let t = self.t + gap / (f.speed - b.speed);
                consider(t, b.pos(t));
            }
        }
        if let Some(f) = self.fronts.get(b.slot) {
            if f.speed < b.speed {
                let gap = (f.pos(self.t) - y).max(0.0);
                let t = self.t + gap / (b.speed - f.speed);
                consider(t, b.pos(t));
            }
        }
        best.map(|(t, x)| NextEvent { t, x })
    }

    /// Resolve the collision at `ev`.
    pub fn resolve_event(&mut self, ev: NextEvent) -> Result<()> {
        let t = ev.t.max(self.t);
        self.t = t;
        let tol = self.tol(t, ev.x);
        let x = ev.x;

        // Gather the contiguous run of fronts at x.
        let first_right = self.fronts.partition_point(|f| f.pos(t) < x - tol);
        let mut hi = first_right;
        while hi < self.fronts.len() && (self.fronts[hi].pos(t) - x).abs() <= tol {
            hi += 1;
        }
        let lo = first_right;
        let y = self.bottleneck.pos(t);
        let with_bn = (y - x).abs() <= tol;
        if hi == lo {
            return Err(Error::Invariant(format!("empty collision at t = {t}, x = {x}")));
        }
        if with_bn && !(lo <= self.bottleneck.slot && self.bottleneck.slot <= hi) {
            return Err(Error::Invariant(format!(
                "bottleneck slot {} outside colliding fronts {lo}..{hi}",
                self.bottleneck.slot
            )));
        }

        // Cascade guard.
        let (ct, cx, count) = self.cascade;
        let count = if (ct - t).abs() <= tol && (cx - x).abs() <= tol { count + 1 } else { 1 };
        self.cascade = (t, x, count);
        if count > self.opts.cascade_limit {
            return Err(Error::Cascade { t, x, count });
        }

        let gamma_at = self.fronts[lo..hi].iter().find(|f| f.kind == WaveKind::GammaJump).map(|f| f.x0);
        let has_gamma = gamma_at.is_some();
        // Events on a boundary happen exactly on it.
        let x = gamma_at.unwrap_or(x);
        let class = match (with_bn, has_gamma) {
            (true, true) => {
                let gamma_ahead = self.fronts[self.bottleneck.slot..hi].iter().any(|f| f.kind == WaveKind::GammaJump);
                if gamma_ahead {
                    EventClass::BottleneckBoundary
                } else {
                    EventClass::BottleneckGamma
                }
            }
            (true, false) => EventClass::ZBottleneck,
            (false, true) => EventClass::ZGamma,
            (false, false) => EventClass::ZZ,
        };

        let (varpi_before, branch_before) = self.current_varpi();
        let temple_before = self.front_sum + varpi_before;

        let left = self.fronts[lo].left;
        let right = self.fronts[hi - 1].right;
        let (waves, case) = if with_bn {
            let sol = solve_constrained(&self.grid, left, right)?;
            let waves = self.snap_to_bottleneck(sol.seq.waves, sol.ydot);
            self.bottleneck = Bottleneck { y0: x, t0: t, speed: sol.ydot, region: right.region, slot: lo };
            (waves, Some(sol.case))
        } else {
            (solve_classical(&self.grid, left, right)?.waves, None)
        };

        let removed: Vec<Front> = self.fronts[lo..hi].to_vec();
        let added = self.make_fronts(&waves, x, t);
        for f in &removed {
            self.traces[f.trace].t_end = t;
            self.front_sum -= front_temple(&self.grid, f.left, f.right, f.kind);
        }
        for f in &added {
            self.front_sum += front_temple(&self.grid, f.left, f.right, f.kind);
        }
        let n_removed = removed.len();
        let n_added = added.len();
        if with_bn {
            let ydot = self.bottleneck.speed;
            self.bottleneck.slot = lo + added.iter().filter(|f| f.speed <= ydot).count();
            self.trajectory.push(TrajectoryKnot { t, y: x, ydot, region: self.bottleneck.region });
        } else if lo < self.bottleneck.slot {
            self.bottleneck.slot = self.bottleneck.slot + n_added - n_removed;
        }
        let ids_out: Vec<u64> = added.iter().map(|f| f.id).collect();
        self.fronts.splice(lo..hi, added);
        self.hits.splice(lo..hi, std::iter::repeat_n(f64::INFINITY, n_added));
        let from = lo.saturating_sub(1);
        for i in from..(lo + n_added).min(self.fronts.len()) {
            self.refresh_hit(i);
        }
        if lo + n_added == 0 && !self.fronts.is_empty() {
            self.refresh_hit(0);
        }

        let (varpi_after, branch_after) = self.current_varpi();
        self.events.push(EventRecord {
            t,
            x,
            class,
            fronts_in: removed.iter().map(|f| f.id).collect(),
            fronts_out: ids_out,
            temple_before,
            temple_after: self.front_sum + varpi_after,
            varpi_before: branch_before,
            varpi_after: branch_after,
            case,
            front_count: self.fronts.len(),
        });
        self.max_fronts = self.max_fronts.max(self.fronts.len());
        self.check_cap()?;
        if self.opts.check_invariants {
            self.check_consistency()?;
        }
        Ok(())
    }

    /// Verify state chaining, ordering and the bottleneck speed rule.
    pub fn check_consistency(&self) -> Result<()> {
        let t = self.t;
        let mut prev = self.far_left;
        for (i, f) in self.fronts.iter().enumerate() {
            if f.left != prev {
                return Err(Error::Invariant(format!("broken state chain at front {i} (t = {t})")));
            }
            if f.left == f.right {
                return Err(Error::Invariant(format!("null front {} at t = {t}", f.id)));
            }
            if i > 0 {
                let p = self.fronts[i - 1].pos(t);
                let q = f.pos(t);
                if q < p - 1e3 * self.tol(t, q) {
                    return Err(Error::Invariant(format!("fronts out of order at t = {t}: {p} > {q}")));
                }
            }
            if f.kind == WaveKind::GammaJump {
                if f.speed != 0.0 || !self.grid.network.boundaries.contains(&f.x0) {
                    return Err(Error::Invariant(format!("gamma front {} off a boundary", f.id)));
                }
            } else if f.left.region != f.right.region {
                return Err(Error::Invariant(format!("z-front {} spans two regions", f.id)));
            }
            prev = f.right;
        }
        let nc = self.fronts.iter().filter(|f| f.kind == WaveKind::NonClassical).count();
        if nc > 1 {
            return Err(Error::Invariant(format!("{nc} non-classical fronts at t = {t}")));
        }
        let b = &self.bottleneck;
        let r = self.right_of_bottleneck();
        if r.region != b.region {
            return Err(Error::Invariant(format!(
                "bottleneck region {} but the state right of it lies in region {}",
                b.region, r.region
            )));
        }
        let vb = self.grid.region(b.region).v_b;
        let omega = vb.min(velocity_raw(self.grid.gamma(b.region), self.grid.rho(r)));
        if (b.speed - omega).abs() > 1e-12 {
            return Err(Error::Invariant(format!(
                "bottleneck speed {} differs from min(V_b, v(ρ(y+))) = {omega}",
                b.speed
            )));
        }
        Ok(())
    }

    /// Piecewise-constant profile at time `t ≥ self.t` (fronts at one point collapse).
    pub fn profile_at(&self, t: f64) -> StateProfile {
        let mut breaks: Vec<f64> = Vec::with_capacity(self.fronts.len());
        let mut values = vec![self.far_left];
        for f in &self.fronts {
            let x = f.pos(t);
            if let Some(&last) = breaks.last() {
                if x <= last {
                    *values.last_mut().unwrap() = f.right;
                    continue;
                }
            }
            breaks.push(x);
            values.push(f.right);
        }
        Piecewise::from_pieces(breaks, values)
    }

    pub fn snapshot(&self, t: f64) -> Snapshot {
        Snapshot {
            t,
            profile: self.profile_at(t),
            y: self.bottleneck.pos(t),
            ydot: self.bottleneck.speed,
            region: self.bottleneck.region,
            rho_left: self.left_of_bottleneck(),
            rho_right: self.right_of_bottleneck(),
        }
    }

    /// Advance to `t_end`, taking snapshots at the requested times.
    pub fn run(&mut self, t_end: f64, snapshot_times: &[f64]) -> Result<Vec<Snapshot>> {
        self.run_with(t_end, snapshot_times, |_| {})
    }

    /// [`run`](Self::run), calling `on_event` after every resolved event.
    pub fn run_with(
        &mut self,
        t_end: f64,
        snapshot_times: &[f64],
        mut on_event: impl FnMut(&SimState),
    ) -> Result<Vec<Snapshot>> {
        if t_end.is_nan() || t_end <= self.t {
            return Err(Error::Config(format!("t_end = {t_end} must exceed the current time {}", self.t)));
        }
        let mut times: Vec<f64> = snapshot_times.iter().copied().filter(|&s| s >= self.t && s <= t_end).collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        let mut next_snap = 0;
        let mut snaps = Vec::with_capacity(times.len());
        loop {
            let ev = self.next_event().filter(|e| e.t <= t_end);
            let horizon = ev.map_or(t_end, |e| e.t);
            while next_snap < times.len() && times[next_snap] <= horizon {
                // A snapshot exactly at an event time sees the pre-event
                // fronts, which describe the same function a.e.
                snaps.push(self.snapshot(times[next_snap]));
                next_snap += 1;
            }
            match ev {
                Some(e) => {
                    self.resolve_event(e)?;
                    on_event(self);
                }
                None => break,
            }
        }
        self.t = t_end;
        Ok(snaps)
    }

    /// Close open traces and the trajectory at the current time.
    pub fn finish(&mut self) {
        let t = self.t;
        for f in &self.fronts {
            self.traces[f.trace].t_end = t;
        }
        let b = self.bottleneck;
        if self.trajectory.last().is_none_or(|k| k.t < t) {
            self.trajectory.push(TrajectoryKnot { t, y: b.pos(t), ydot: b.speed, region: b.region });
        }
    }

    pub fn y(&self) -> f64 {
        self.bottleneck.pos(self.t)
    }
}

/// `(t, y)` knots of the piecewise-linear bottleneck path.
pub fn bottleneck_trajectory(state: &SimState) -> Vec<(f64, f64)> {
    let mut knots: Vec<(f64, f64)> = state.trajectory.iter().map(|k| (k.t, k.y)).collect();
    let end = (state.t, state.y());
    if knots.last().is_none_or(|k| k.0 < end.0) {
        knots.push(end);
    }
    knots
}

/// Position of the bottleneck at time `t` from the recorded knots.
pub fn trajectory_at(knots: &[TrajectoryKnot], t: f64) -> f64 {
    let i = knots.partition_point(|k| k.t <= t).saturating_sub(1);
    let k = &knots[i];
    k.y + k.ydot * (t - k.t)
}

/// Everything needed to run the simulation at any level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub network: RoadNetwork,
    pub initial: InitialProfile,
    pub y0: f64,
    pub t_end: f64,
    pub snapshots: Vec<f64>,
    pub options: RunOptions,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub state: SimState,
    pub initial: StateProfile,
    pub snapshots: Vec<Snapshot>,
    pub bounds: RunBounds,
    /// Row at `t = 0` and after every event.
    pub diagnostics: Vec<DiagRow>,
    pub tv_z_max: f64,
    pub sup_z_max: f64,
    pub temple_max: f64,
}

impl Scenario {
    pub fn run(&self, n: u32) -> Result<RunResult> {
        let grid = Arc::new(build_grid(&self.network, n)?);
        self.run_on(grid)
    }

    pub fn run_on(&self, grid: Arc<GridSystem>) -> Result<RunResult> {
        let initial = sample_initial(&grid, &self.initial)?;
        let bounds = RunBounds::new(&grid, &initial);
        let mut state = SimState::init(grid, &initial, self.y0, self.options)?;
        let mut diagnostics = vec![diag_row(&state)];
        let snapshots = state.run_with(self.t_end, &self.snapshots, |s| diagnostics.push(diag_row(s)))?;
        state.finish();
        let tv_z_max = diagnostics.iter().map(|d| d.tv_z).fold(0.0, f64::max);
        let sup_z_max = diagnostics.iter().map(|d| d.sup_z).fold(0.0, f64::max);
        let temple_max = diagnostics.iter().map(|d| d.temple).fold(0.0, f64::max);
        Ok(RunResult { state, initial, snapshots, bounds, diagnostics, tv_z_max, sup_z_max, temple_max })
    }

    /// A bounded window containing all the action up to `t_end`.
    pub fn default_window(&self) -> (f64, f64) {
        let xs = self.initial.steps.iter().map(|s| s.0).chain(self.network.boundaries.iter().copied()).chain([self.y0]);
        let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        let pad = self.network.max_gamma() * self.t_end + 1.0;
        (lo - pad, hi + pad)
    }
}
