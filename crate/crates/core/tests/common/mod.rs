#![allow(dead_code)]

use episurvey::designs::Stratum;
use episurvey::estimators::{AnchorObservation, GwsmInput, TracedContact};
use episurvey::frames::{FrameId, Frames, LinkView, Membership, World};
use episurvey::PersonId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A hand-checkable world of at most ten people.
pub struct Toy {
    pub world: World,
    pub adj: Vec<Vec<usize>>,
    pub member: Vec<Membership>,
    pub y: Vec<bool>,
}

/// Random toy world with at least one verified case and one infected
/// complement member.
pub fn toy(seed: u64, n: usize) -> Toy {
    let mut g = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut adj = vec![Vec::new(); n];
        for a in 0..n {
            for b in a + 1..n {
                if g.random::<f64>() < 0.35 {
                    adj[a].push(b);
                    adj[b].push(a);
                }
            }
        }
        let member: Vec<Membership> = (0..n)
            .map(|_| match g.random::<f64>() {
                x if x < 0.1 => Membership::Dead,
                x if x < 0.4 => Membership::Verified,
                _ => Membership::Complement,
            })
            .collect();
        let y: Vec<bool> = member
            .iter()
            .map(|m| match m {
                Membership::Dead => false,
                Membership::Verified => g.random::<f64>() < 0.7,
                Membership::Complement => g.random::<f64>() < 0.4,
            })
            .collect();
        let has_v = member.iter().filter(|&&m| m == Membership::Verified).count() >= 2;
        let has_c = member
            .iter()
            .zip(&y)
            .filter(|(&m, &y)| m == Membership::Complement && y)
            .count()
            >= 1;
        let n_c = member.iter().filter(|&&m| m == Membership::Complement).count();
        if !(has_v && has_c && n_c >= 3) {
            continue;
        }
        let lists = adj
            .iter()
            .map(|l| l.iter().map(|&j| PersonId(j as u32)).collect())
            .collect();
        let link = LinkView::from_adjacency(10, 14, lists);
        let frames = Frames::from_membership(10, member.clone());
        let world = World::from_parts(link, frames, y.clone()).unwrap();
        return Toy { world, adj, member, y };
    }
}

impl Toy {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Contacts of `k` including itself, sorted.
    pub fn contacts(&self, k: usize) -> Vec<usize> {
        let mut c = self.adj[k].clone();
        c.push(k);
        c.sort_unstable();
        c
    }

    pub fn linked(&self, k: usize, j: usize) -> bool {
        k == j || self.adj[k].contains(&j)
    }

    pub fn frame(&self, m: Membership) -> Vec<usize> {
        (0..self.n()).filter(|&k| self.member[k] == m).collect()
    }

    pub fn l_v(&self, j: usize) -> u32 {
        self.frame(Membership::Verified).iter().filter(|&&k| self.linked(k, j)).count() as u32
    }

    pub fn l_c(&self, j: usize) -> u32 {
        self.frame(Membership::Complement)
            .iter()
            .filter(|&&k| self.y[k] && self.linked(k, j))
            .count() as u32
    }

    /// `(Y, Y_A, Y_B, Y_AB)` by direct counting.
    pub fn truth(&self) -> (u64, u64, u64, u64) {
        let mut t = (0, 0, 0, 0);
        for j in 0..self.n() {
            if !self.y[j] {
                continue;
            }
            let (a, b) = (self.l_v(j) >= 1, self.l_c(j) >= 1);
            t.0 += 1;
            t.1 += u64::from(a);
            t.2 += u64::from(b);
            t.3 += u64::from(a && b);
        }
        t
    }

    pub fn contact_obs(&self, j: usize) -> TracedContact {
        TracedContact {
            person: PersonId(j as u32),
            y: f64::from(u8::from(self.y[j])),
            l_v: self.l_v(j),
            l_c: self.l_c(j),
            l_total: self.contacts(j).len() as u32,
            in_complement: self.member[j] == Membership::Complement,
        }
    }
}

/// All `k`-subsets of `items`.
pub fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if items.len() < k {
        return Vec::new();
    }
    let mut with: Vec<Vec<usize>> = subsets(&items[1..], k - 1)
        .into_iter()
        .map(|mut s| {
            s.insert(0, items[0]);
            s
        })
        .collect();
    with.extend(subsets(&items[1..], k));
    with
}

/// Every joint outcome of a first-stage SRSWOR of `n` from `frame` and an
/// SRSWOR of `take(#U_k)` contacts per traced anchor, with its probability.
pub fn enumerate_two_stage(
    toy: &Toy,
    frame_id: FrameId,
    frame: &[usize],
    n: usize,
    take: impl Fn(usize) -> usize,
    traced: impl Fn(usize) -> bool,
) -> Vec<(f64, GwsmInput)> {
    let mut out = Vec::new();
    let firsts = subsets(frame, n);
    let p1 = 1.0 / firsts.len() as f64;
    let pi1 = n as f64 / frame.len() as f64;
    for s in firsts {
        // per-anchor list of possible contact subsets
        let options: Vec<Vec<Vec<usize>>> = s
            .iter()
            .map(|&k| {
                if traced(k) {
                    let c = toy.contacts(k);
                    subsets(&c, take(c.len()))
                } else {
                    vec![Vec::new()]
                }
            })
            .collect();
        let mut idx = vec![0usize; s.len()];
        loop {
            let mut p = p1;
            let anchors = s
                .iter()
                .enumerate()
                .map(|(i, &k)| {
                    p /= options[i].len() as f64;
                    let pool = toy.contacts(k).len();
                    let chosen = &options[i][idx[i]];
                    AnchorObservation {
                        person: PersonId(k as u32),
                        pi1,
                        pi2: if traced(k) { take(pool) as f64 / pool as f64 } else { 1.0 },
                        y: match frame_id {
                            FrameId::V => 1.0,
                            FrameId::C => f64::from(u8::from(toy.y[k])),
                        },
                        stratum: 0,
                        pool_size: pool,
                        contacts: chosen.iter().map(|&j| toy.contact_obs(j)).collect(),
                    }
                })
                .collect();
            out.push((
                p,
                GwsmInput {
                    frame: frame_id,
                    anchors,
                    strata: vec![Stratum { label: 0, population: frame.len(), sample: n }],
                },
            ));
            // odometer over the per-anchor options
            let mut i = 0;
            while i < idx.len() {
                idx[i] += 1;
                if idx[i] < options[i].len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == idx.len() {
                break;
            }
        }
    }
    out
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

/// Config text for a quick end-to-end run on a small grid.
pub const SMALL_CONFIG: &str = "\
grid_rows = 3
grid_cols = 3
cell_pop_min = 150
cell_pop_max = 250
initial_exposed = 6
sim_seed = 7
seed = 11
days = 15,25
replications = 12
n_v = 40
n_c = 120
";
