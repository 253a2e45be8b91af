//! Seeded generators for the standard experiment setups: random arrays,
//! one- and two-value damping, polytope-vertex initializations and the
//! community-cleavage experiment, plus 1-d histograms of end states.
//!
//! Every generator is a pure function of its arguments and seed; see
//! [`crate::rng`] for the random source.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{DampingMatrix, InfluenceMatrix, StateMatrix, System};
use crate::rng::ScenarioRng;

/// Edge weights before row normalization are uniform on this range.
const WEIGHT_RANGE: (f64, f64) = (0.1, 1.0);

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            range: "[0, 1]",
        })
    }
}

/// Random strongly connected, aperiodic influence matrix.
///
/// A directed Hamiltonian cycle over a random node order guarantees strong
/// connectivity; every other ordered pair (self-loops included) becomes an
/// edge with probability `extra_edge_prob`; if no self-loop was drawn one is
/// added at a random node. Weights are uniform on `[0.1, 1)` and rows are
/// normalized.
pub fn random_strong_w(n: usize, extra_edge_prob: f64, seed: u64) -> Result<InfluenceMatrix> {
    random_strong_w_with(&mut ScenarioRng::new(seed), n, extra_edge_prob)
}

fn random_strong_w_with(
    rng: &mut ScenarioRng,
    n: usize,
    extra_edge_prob: f64,
) -> Result<InfluenceMatrix> {
    if n == 0 {
        return Err(Error::Scenario("random_strong_w needs n >= 1".into()));
    }
    check_unit("extra_edge_prob", extra_edge_prob)?;
    let mut adj = vec![false; n * n];
    let order = rng.permutation(n);
    for k in 0..n {
        adj[order[k] * n + order[(k + 1) % n]] = true;
    }
    for edge in adj.iter_mut() {
        if !*edge && rng.bernoulli(extra_edge_prob) {
            *edge = true;
        }
    }
    if !(0..n).any(|i| adj[i * n + i]) {
        let i = rng.below(n);
        adj[i * n + i] = true;
    }
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if adj[i * n + j] {
                w[(i, j)] = rng.uniform_in(WEIGHT_RANGE.0, WEIGHT_RANGE.1);
            }
        }
        let s = w.row(i).sum();
        w.row_mut(i).unscale_mut(s);
    }
    InfluenceMatrix::new(w)
}

/// Every `a_ii = a`.
pub fn uniform_damping(n: usize, a: f64) -> Result<DampingMatrix> {
    check_unit("a", a)?;
    DampingMatrix::uniform(n, a)
}

/// A random subset of `round(high_fraction * n)` nodes gets `a_high`, the
/// rest `a_low`.
pub fn two_value_damping(
    n: usize,
    a_low: f64,
    a_high: f64,
    high_fraction: f64,
    seed: u64,
) -> Result<DampingMatrix> {
    two_value_damping_with(&mut ScenarioRng::new(seed), n, a_low, a_high, high_fraction)
}

fn two_value_damping_with(
    rng: &mut ScenarioRng,
    n: usize,
    a_low: f64,
    a_high: f64,
    high_fraction: f64,
) -> Result<DampingMatrix> {
    check_unit("a_low", a_low)?;
    check_unit("a_high", a_high)?;
    check_unit("high_fraction", high_fraction)?;
    let high = (high_fraction * n as f64).round() as usize;
    let order = rng.permutation(n);
    let mut a = vec![a_low; n];
    for &i in &order[..high] {
        a[i] = a_high;
    }
    DampingMatrix::new(a)
}

/// Places point `i` on vertex `assignment[i]`. Every vertex must receive at
/// least one point.
pub fn polytope_init(vertices: &StateMatrix, assignment: &[usize]) -> Result<StateMatrix> {
    let v = vertices.n();
    let mut used = vec![false; v];
    for (i, &k) in assignment.iter().enumerate() {
        if k >= v {
            return Err(Error::Scenario(format!(
                "point {} assigned to vertex {k}, but there are only {v} vertices",
                i + 1
            )));
        }
        used[k] = true;
    }
    if let Some(k) = used.iter().position(|u| !u) {
        return Err(Error::Scenario(format!(
            "vertex {k} is vacuous (no point assigned)"
        )));
    }
    let vm = vertices.as_matrix();
    StateMatrix::new(DMatrix::from_fn(assignment.len(), vertices.m(), |i, h| {
        vm[(assignment[i], h)]
    }))
}

/// Vertices of a regular polygon centred at the origin, first vertex on the
/// positive x axis.
pub fn regular_polygon(sides: usize, radius: f64) -> Result<StateMatrix> {
    if sides == 0 {
        return Err(Error::Scenario(
            "a polygon needs at least one vertex".into(),
        ));
    }
    let step = std::f64::consts::TAU / sides as f64;
    StateMatrix::new(DMatrix::from_fn(sides, 2, |k, h| {
        let t = step * k as f64;
        radius * if h == 0 { t.cos() } else { t.sin() }
    }))
}

/// Parameters of the community-cleavage experiment.
///
/// Moderates start near `moderate_center` (normal with standard deviation
/// `moderate_spread`, truncated to `[pole_low, pole_high]`) with `a_ii`
/// uniform on `a_moderate_range`; extremists start at the two poles with
/// `a_ii = a_extremist`. The network has `communities` blocks, each drawn
/// with [`random_strong_w`], whose rows send weight `community_mixing` to a
/// random node of the next block. Low-pole extremists sit in even blocks,
/// high-pole extremists in odd ones; with one block the poles are assigned
/// at random.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CleavageParams {
    pub extremist_fraction: f64,
    pub moderate_center: f64,
    pub moderate_spread: f64,
    pub pole_low: f64,
    pub pole_high: f64,
    pub a_moderate_range: (f64, f64),
    pub a_extremist: f64,
    pub communities: usize,
    pub community_mixing: f64,
    pub extra_edge_prob: f64,
}

impl Default for CleavageParams {
    fn default() -> Self {
        CleavageParams {
            extremist_fraction: 0.1,
            moderate_center: 0.0,
            moderate_spread: 1.0,
            pole_low: -20.0,
            pole_high: 20.0,
            a_moderate_range: (0.9, 0.99),
            a_extremist: 0.98,
            communities: 2,
            community_mixing: 0.02,
            extra_edge_prob: 0.3,
        }
    }
}

impl CleavageParams {
    fn validate(&self, n: usize) -> Result<()> {
        check_unit("extremist_fraction", self.extremist_fraction)?;
        check_unit("a_extremist", self.a_extremist)?;
        check_unit("a_moderate_range.0", self.a_moderate_range.0)?;
        check_unit("a_moderate_range.1", self.a_moderate_range.1)?;
        check_unit("community_mixing", self.community_mixing)?;
        check_unit("extra_edge_prob", self.extra_edge_prob)?;
        if self.a_moderate_range.0 > self.a_moderate_range.1 {
            return Err(Error::Scenario(
                "a_moderate_range must be ordered (low, high)".into(),
            ));
        }
        if self.pole_low >= self.pole_high || self.pole_low.is_nan() || self.pole_high.is_nan() {
            return Err(Error::Scenario("pole_low must be below pole_high".into()));
        }
        if !(self.pole_low..=self.pole_high).contains(&self.moderate_center) {
            return Err(Error::Scenario(
                "moderate_center must lie between the poles".into(),
            ));
        }
        if !(self.moderate_spread >= 0.0 && self.moderate_spread.is_finite()) {
            return Err(Error::OutOfRange {
                name: "moderate_spread",
                value: self.moderate_spread,
                range: "[0, inf)",
            });
        }
        if self.communities == 0 || self.communities > n {
            return Err(Error::Scenario(format!(
                "communities must be in 1..={n}, got {}",
                self.communities
            )));
        }
        if self.communities > 1 && self.community_mixing == 0.0 {
            return Err(Error::Scenario(
                "community_mixing must be positive with several communities (W would be reducible)"
                    .into(),
            ));
        }
        Ok(())
    }

    fn truncated_normal(&self, rng: &mut ScenarioRng) -> f64 {
        if self.moderate_spread == 0.0 {
            return self.moderate_center;
        }
        loop {
            let v = self.moderate_center + self.moderate_spread * rng.standard_normal();
            if (self.pole_low..=self.pole_high).contains(&v) {
                return v;
            }
        }
    }
}

/// Block sizes for `c` communities over `n` nodes; the first `n % c` blocks
/// get one extra node.
fn block_sizes(n: usize, c: usize) -> Vec<usize> {
    (0..c).map(|k| n / c + usize::from(k < n % c)).collect()
}

fn community_w(rng: &mut ScenarioRng, n: usize, p: &CleavageParams) -> Result<InfluenceMatrix> {
    let c = p.communities;
    if c == 1 {
        return random_strong_w_with(rng, n, p.extra_edge_prob);
    }
    let sizes = block_sizes(n, c);
    let starts: Vec<usize> = sizes
        .iter()
        .scan(0, |acc, &s| {
            let start = *acc;
            *acc += s;
            Some(start)
        })
        .collect();
    let mut w = DMatrix::zeros(n, n);
    for k in 0..c {
        let block = random_strong_w_with(rng, sizes[k], p.extra_edge_prob)?;
        w.view_mut((starts[k], starts[k]), (sizes[k], sizes[k]))
            .copy_from(block.as_matrix());
    }
    for k in 0..c {
        let next = (k + 1) % c;
        for i in starts[k]..starts[k] + sizes[k] {
            let target = starts[next] + rng.below(sizes[next]);
            w.row_mut(i).scale_mut(1.0 - p.community_mixing);
            w[(i, target)] += p.community_mixing;
        }
    }
    InfluenceMatrix::new(w)
}

/// Community-cleavage system `{W, A, X(0)}` with one opinion dimension.
pub fn cleavage_scenario(n: usize, params: &CleavageParams, seed: u64) -> Result<System> {
    if n == 0 {
        return Err(Error::Scenario("cleavage scenario needs n >= 1".into()));
    }
    params.validate(n)?;
    let mut rng = ScenarioRng::new(seed);
    let w = community_w(&mut rng, n, params)?;

    let extremists = (params.extremist_fraction * n as f64).round() as usize;
    let n_low = extremists / 2;
    let n_high = extremists - n_low;
    let (mut low_pool, mut high_pool): (Vec<usize>, Vec<usize>) = if params.communities == 1 {
        let order = rng.permutation(n);
        (
            order[..n_low].to_vec(),
            order[n_low..n_low + n_high].to_vec(),
        )
    } else {
        let sizes = block_sizes(n, params.communities);
        let community_of: Vec<usize> = sizes
            .iter()
            .enumerate()
            .flat_map(|(k, &s)| std::iter::repeat_n(k, s))
            .collect();
        (0..n).partition(|&i| community_of[i].is_multiple_of(2))
    };
    if params.communities > 1 {
        rng.shuffle(&mut low_pool);
        rng.shuffle(&mut high_pool);
        if low_pool.len() < n_low || high_pool.len() < n_high {
            return Err(Error::Scenario(format!(
                "{extremists} extremists do not fit in the communities"
            )));
        }
        low_pool.truncate(n_low);
        high_pool.truncate(n_high);
    }

    // 0 = moderate, 1 = low pole, 2 = high pole
    let mut role = vec![0u8; n];
    for &i in &low_pool {
        role[i] = 1;
    }
    for &i in &high_pool {
        role[i] = 2;
    }

    let x: Vec<f64> = role
        .iter()
        .map(|r| match r {
            1 => params.pole_low,
            2 => params.pole_high,
            _ => params.truncated_normal(&mut rng),
        })
        .collect();
    let (lo, hi) = params.a_moderate_range;
    let a: Vec<f64> = role
        .iter()
        .map(|&r| {
            if r == 0 {
                rng.uniform_in(lo, hi)
            } else {
                params.a_extremist
            }
        })
        .collect();

    System::new(w, DampingMatrix::new(a)?, StateMatrix::column(&x)?)
}

/// Equal-width bins over `[min, max]`; every bin is left-closed and the last
/// one is also right-closed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Number of local modes whose topographic prominence is at least
    /// `min_prominence`.
    ///
    /// A mode is a maximal run of equal nonzero counts higher than both
    /// neighbours (the histogram is padded with empty bins). Its prominence
    /// is its height minus the higher of the two lowest points met while
    /// walking outwards until a strictly higher bin or the padding.
    pub fn modes(&self, min_prominence: usize) -> usize {
        let c = &self.counts;
        let b = c.len();
        let at = |k: isize| -> usize {
            if k < 0 || k as usize >= b {
                0
            } else {
                c[k as usize]
            }
        };
        let mut found = 0;
        let mut i = 0;
        while i < b {
            let mut j = i;
            while j + 1 < b && c[j + 1] == c[i] {
                j += 1;
            }
            let h = c[i];
            if h > 0 && h > at(i as isize - 1) && h > at(j as isize + 1) {
                let side_base = |start: isize, dir: isize| -> usize {
                    let mut k = start;
                    let mut low = h;
                    loop {
                        k += dir;
                        let v = at(k);
                        if k < 0 || k as usize >= b {
                            return 0;
                        }
                        if v > h {
                            return low;
                        }
                        low = low.min(v);
                    }
                };
                let base = side_base(i as isize, -1).max(side_base(j as isize, 1));
                if h - base >= min_prominence {
                    found += 1;
                }
            }
            i = j + 1;
        }
        found
    }

    /// Modes with prominence of at least 10% of the points.
    pub fn significant_modes(&self) -> usize {
        let threshold = (self.total() as f64 * 0.1).ceil().max(1.0) as usize;
        self.modes(threshold)
    }
}

pub fn histogram(x: &StateMatrix, bins: usize) -> Result<Histogram> {
    if x.m() != 1 {
        return Err(Error::dims(format!(
            "histogram needs a 1-dimensional state, got m = {}",
            x.m()
        )));
    }
    if bins == 0 {
        return Err(Error::OutOfRange {
            name: "bins",
            value: 0.0,
            range: "[1, inf)",
        });
    }
    if x.n() == 0 {
        return Err(Error::EmptyState);
    }
    let col = x.as_matrix().column(0);
    let (lo, hi) = (col.min(), col.max());
    let width = (hi - lo) / bins as f64;
    let edges = (0..=bins)
        .map(|k| if k == bins { hi } else { lo + width * k as f64 })
        .collect();
    let mut counts = vec![0; bins];
    for &v in col.iter() {
        let k = if width > 0.0 {
            ((v - lo) / width).floor() as usize
        } else {
            0
        };
        counts[k.min(bins - 1)] += 1;
    }
    Ok(Histogram { edges, counts })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomArrayParams {
    pub extra_edge_prob: f64,
    pub a_range: (f64, f64),
    pub x_range: (f64, f64),
}

impl Default for RandomArrayParams {
    fn default() -> Self {
        RandomArrayParams {
            extra_edge_prob: 0.1,
            a_range: (0.05, 0.95),
            x_range: (0.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OneValueParams {
    pub extra_edge_prob: f64,
    pub a: f64,
    pub x_range: (f64, f64),
}

impl Default for OneValueParams {
    fn default() -> Self {
        OneValueParams {
            extra_edge_prob: 0.1,
            a: 0.8,
            x_range: (0.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoValueParams {
    pub extra_edge_prob: f64,
    pub a_low: f64,
    pub a_high: f64,
    pub high_fraction: f64,
    pub x_range: (f64, f64),
}

impl Default for TwoValueParams {
    fn default() -> Self {
        TwoValueParams {
            extra_edge_prob: 0.1,
            a_low: 0.1,
            a_high: 0.8,
            high_fraction: 0.5,
            x_range: (0.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolytopeParams {
    pub extra_edge_prob: f64,
    pub a: f64,
    /// Regular polygon with this many vertices, unless `vertices` is given.
    pub sides: usize,
    pub radius: f64,
    pub vertices: Option<Vec<Vec<f64>>>,
}

impl Default for PolytopeParams {
    fn default() -> Self {
        PolytopeParams {
            extra_edge_prob: 0.1,
            a: 0.8,
            sides: 5,
            radius: 1.0,
            vertices: None,
        }
    }
}

/// Generator selection; serialized as `"kind"` plus `"parameters"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters")]
pub enum ScenarioKind {
    #[serde(rename = "random-array")]
    RandomArray(RandomArrayParams),
    #[serde(rename = "one-value-A")]
    OneValueA(OneValueParams),
    #[serde(rename = "two-value-A")]
    TwoValueA(TwoValueParams),
    #[serde(rename = "polytope")]
    Polytope(PolytopeParams),
    #[serde(rename = "cleavage")]
    Cleavage(CleavageParams),
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::RandomArray(_) => "random-array",
            ScenarioKind::OneValueA(_) => "one-value-A",
            ScenarioKind::TwoValueA(_) => "two-value-A",
            ScenarioKind::Polytope(_) => "polytope",
            ScenarioKind::Cleavage(_) => "cleavage",
        }
    }
}

/// A complete, reproducible scenario description (the JSON config format).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub kind: ScenarioKind,
}

fn random_state(
    rng: &mut ScenarioRng,
    n: usize,
    m: usize,
    range: (f64, f64),
) -> Result<StateMatrix> {
    if range.0 > range.1 || range.0.is_nan() || range.1.is_nan() {
        return Err(Error::Scenario(
            "x_range must be ordered (low, high)".into(),
        ));
    }
    let mut x = DMatrix::zeros(n, m);
    for i in 0..n {
        for h in 0..m {
            x[(i, h)] = rng.uniform_in(range.0, range.1);
        }
    }
    StateMatrix::new(x)
}

impl ScenarioSpec {
    pub fn generate(&self) -> Result<System> {
        let (n, m) = (self.n, self.m);
        if n == 0 || m == 0 {
            return Err(Error::Scenario("scenarios need n >= 1 and m >= 1".into()));
        }
        let mut rng = ScenarioRng::new(self.seed);
        match &self.kind {
            ScenarioKind::RandomArray(p) => {
                check_unit("a_range.0", p.a_range.0)?;
                check_unit("a_range.1", p.a_range.1)?;
                let w = random_strong_w_with(&mut rng, n, p.extra_edge_prob)?;
                let x0 = random_state(&mut rng, n, m, p.x_range)?;
                let a = (0..n)
                    .map(|_| rng.uniform_in(p.a_range.0, p.a_range.1))
                    .collect();
                System::new(w, DampingMatrix::new(a)?, x0)
            }
            ScenarioKind::OneValueA(p) => {
                let w = random_strong_w_with(&mut rng, n, p.extra_edge_prob)?;
                let x0 = random_state(&mut rng, n, m, p.x_range)?;
                System::new(w, uniform_damping(n, p.a)?, x0)
            }
            ScenarioKind::TwoValueA(p) => {
                let w = random_strong_w_with(&mut rng, n, p.extra_edge_prob)?;
                let x0 = random_state(&mut rng, n, m, p.x_range)?;
                let a = two_value_damping_with(&mut rng, n, p.a_low, p.a_high, p.high_fraction)?;
                System::new(w, a, x0)
            }
            ScenarioKind::Polytope(p) => {
                let vertices = match &p.vertices {
                    Some(v) => StateMatrix::from_rows(v)?,
                    None => regular_polygon(p.sides, p.radius)?,
                };
                if vertices.m() != m {
                    return Err(Error::Scenario(format!(
                        "polytope vertices are {}-dimensional but m = {m}",
                        vertices.m()
                    )));
                }
                if n < vertices.n() {
                    return Err(Error::Scenario(format!(
                        "n = {n} points cannot occupy {} vertices",
                        vertices.n()
                    )));
                }
                let w = random_strong_w_with(&mut rng, n, p.extra_edge_prob)?;
                let assignment: Vec<usize> = (0..n).map(|i| i % vertices.n()).collect();
                let x0 = polytope_init(&vertices, &assignment)?;
                System::new(w, uniform_damping(n, p.a)?, x0)
            }
            ScenarioKind::Cleavage(p) => {
                if m != 1 {
                    return Err(Error::Scenario(
                        "the cleavage scenario is 1-dimensional (m = 1)".into(),
                    ));
                }
                cleavage_scenario(n, p, self.seed)
            }
        }
    }
}
