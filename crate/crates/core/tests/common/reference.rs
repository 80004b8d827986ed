//! A deliberately plain SPIHT encoder used as an oracle.
//!
//! Everything is recomputed from scratch: descendant maxima by recursion,
//! list maintenance with `Vec::remove`, coordinates as `(row, col)` pairs.
//! It shares no code with the library.

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Kind {
    A,
    B,
}

pub struct Grid<'a> {
    pub values: &'a [Vec<i64>],
    pub levels: u32,
    pub keep: Option<&'a [Vec<bool>]>,
}

impl Grid<'_> {
    fn h(&self) -> usize {
        self.values.len()
    }

    fn w(&self) -> usize {
        self.values[0].len()
    }

    fn ll(&self) -> (usize, usize) {
        (self.h() >> self.levels, self.w() >> self.levels)
    }

    fn kept(&self, (r, c): (usize, usize)) -> bool {
        self.keep.is_none_or(|k| k[r][c])
    }

    fn offspring(&self, (r, c): (usize, usize)) -> Vec<(usize, usize)> {
        let (lh, lw) = self.ll();
        let base = if r < lh && c < lw {
            match (r % 2, c % 2) {
                (0, 0) => return vec![],
                (0, 1) => (r, c - 1 + lw),
                (1, 0) => (r - 1 + lh, c),
                _ => (r - 1 + lh, c - 1 + lw),
            }
        } else if 2 * r >= self.h() || 2 * c >= self.w() {
            return vec![];
        } else {
            (2 * r, 2 * c)
        };
        vec![base, (base.0, base.1 + 1), (base.0 + 1, base.1), (base.0 + 1, base.1 + 1)]
    }

    fn all_descendants(&self, p: (usize, usize), out: &mut Vec<(usize, usize)>) {
        for o in self.offspring(p) {
            out.push(o);
            self.all_descendants(o, out);
        }
    }

    fn set_members(&self, p: (usize, usize), kind: Kind) -> Vec<(usize, usize)> {
        let mut all = Vec::new();
        self.all_descendants(p, &mut all);
        if kind == Kind::B {
            let direct = self.offspring(p);
            all.retain(|x| !direct.contains(x));
        }
        all
    }

    fn mag(&self, (r, c): (usize, usize)) -> i64 {
        self.values[r][c].abs()
    }

    fn set_live(&self, p: (usize, usize), kind: Kind) -> bool {
        self.set_members(p, kind).iter().any(|&x| self.kept(x))
    }
}

/// Payload bits of the full-depth encoding.
pub fn encode(grid: &Grid) -> Vec<bool> {
    let max = grid.values.iter().flatten().map(|v| v.abs()).max().unwrap_or(0);
    if max == 0 {
        return vec![];
    }
    let top = 63 - max.leading_zeros();
    let (lh, lw) = grid.ll();
    let mut lip = Vec::new();
    let mut lis = Vec::new();
    for r in 0..lh {
        for c in 0..lw {
            lip.push((r, c));
            if !grid.offspring((r, c)).is_empty() {
                lis.push(((r, c), Kind::A));
            }
        }
    }
    let mut lsp: Vec<((usize, usize), u32)> = Vec::new();
    let mut out = Vec::new();

    for n in (0..=top).rev() {
        let sig = |x: i64| (x >> n) != 0;

        let mut i = 0;
        while i < lip.len() {
            let p = lip[i];
            if !grid.kept(p) {
                i += 1;
                continue;
            }
            let s = sig(grid.mag(p));
            out.push(s);
            if s {
                out.push(grid.values[p.0][p.1] < 0);
                lsp.push((p, n));
                lip.remove(i);
            } else {
                i += 1;
            }
        }

        let mut i = 0;
        while i < lis.len() {
            let (p, kind) = lis[i];
            if !grid.set_live(p, kind) {
                i += 1;
                continue;
            }
            let max = grid.set_members(p, kind).iter().map(|&x| grid.mag(x)).max().unwrap_or(0);
            let s = sig(max);
            out.push(s);
            if !s {
                i += 1;
                continue;
            }
            lis.remove(i);
            match kind {
                Kind::A => {
                    for o in grid.offspring(p) {
                        if !grid.kept(o) {
                            lip.push(o);
                            continue;
                        }
                        let so = sig(grid.mag(o));
                        out.push(so);
                        if so {
                            out.push(grid.values[o.0][o.1] < 0);
                            lsp.push((o, n));
                        } else {
                            lip.push(o);
                        }
                    }
                    if !grid.set_members(p, Kind::B).is_empty() {
                        lis.push((p, Kind::B));
                    }
                }
                Kind::B => {
                    for o in grid.offspring(p) {
                        lis.push((o, Kind::A));
                    }
                }
            }
        }

        if grid.keep.is_some() {
            lip.retain(|&p| grid.kept(p));
            lis.retain(|&(p, k)| grid.set_live(p, k));
        }

        for &(p, found) in &lsp {
            if found > n {
                out.push((grid.mag(p) >> n) & 1 == 1);
            }
        }
    }
    out
}
