//! Bucket grid for nearest-terrestrial-site queries.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{CellSite, Position};

pub(crate) struct SiteIndex {
    origin: Position,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
    /// (position, id) per indexed site, addressed by the bucket entries.
    entries: Vec<(Position, u32, usize)>,
}

impl SiteIndex {
    /// Indexes the terrestrial sites of `sites`. Queries must fall inside the
    /// rectangle `[0, width] x [0, height]` to use the grid; anything outside
    /// falls back to a scan.
    pub(crate) fn new(sites: &[CellSite], width: f64, height: f64) -> Self {
        let entries: Vec<(Position, u32, usize)> = sites
            .iter()
            .enumerate()
            .filter(|(_, s)| s.kind.is_terrestrial())
            .map(|(i, s)| (s.position, s.id, i))
            .collect();

        let mut min = Position::new(0.0, 0.0);
        let mut max = Position::new(width, height);
        for (p, _, _) in &entries {
            min.x_m = min.x_m.min(p.x_m);
            min.y_m = min.y_m.min(p.y_m);
            max.x_m = max.x_m.max(p.x_m);
            max.y_m = max.y_m.max(p.y_m);
        }
        let w = (max.x_m - min.x_m).max(1e-9);
        let h = (max.y_m - min.y_m).max(1e-9);
        let n = entries.len().max(1) as f64;
        let cell = libm::sqrt(w * h / n).max(1e-9);
        let nx = (libm::ceil(w / cell) as usize).max(1);
        let ny = (libm::ceil(h / cell) as usize).max(1);

        let mut index = Self {
            origin: min,
            cell,
            nx,
            ny,
            buckets: vec![Vec::new(); nx * ny],
            entries,
        };
        for k in 0..index.entries.len() {
            let (cx, cy) = index.cell_of(&index.entries[k].0);
            index.buckets[cy * nx + cx].push(k);
        }
        index
    }

    fn cell_of(&self, p: &Position) -> (usize, usize) {
        let cx = libm::floor((p.x_m - self.origin.x_m) / self.cell).max(0.0) as usize;
        let cy = libm::floor((p.y_m - self.origin.y_m) / self.cell).max(0.0) as usize;
        (cx.min(self.nx - 1), cy.min(self.ny - 1))
    }

    fn better(cand: (f64, u32), best: Option<(f64, u32, usize)>) -> bool {
        match best {
            None => true,
            Some((bd, bid, _)) => cand.0 < bd || (cand.0 == bd && cand.1 < bid),
        }
    }

    /// Index into the original site slice of the nearest terrestrial site.
    pub(crate) fn nearest(&self, p: &Position) -> Option<usize> {
        if self.entries.is_empty() {
            return None;
        }
        let inside = p.x_m >= self.origin.x_m
            && p.y_m >= self.origin.y_m
            && p.x_m <= self.origin.x_m + self.cell * self.nx as f64
            && p.y_m <= self.origin.y_m + self.cell * self.ny as f64;
        let mut best: Option<(f64, u32, usize)> = None;
        if !inside {
            for (pos, id, i) in &self.entries {
                let d = pos.distance_sq(p);
                if Self::better((d, *id), best) {
                    best = Some((d, *id, *i));
                }
            }
            return best.map(|b| b.2);
        }

        let (cx, cy) = self.cell_of(p);
        let max_ring = self.nx.max(self.ny);
        for r in 0..=max_ring {
            let x0 = cx as isize - r as isize;
            let x1 = cx as isize + r as isize;
            let y0 = cy as isize - r as isize;
            let y1 = cy as isize + r as isize;
            for y in y0..=y1 {
                if y < 0 || y >= self.ny as isize {
                    continue;
                }
                let on_edge_row = y == y0 || y == y1;
                let mut x = x0;
                while x <= x1 {
                    if x >= 0 && x < self.nx as isize {
                        for &k in &self.buckets[y as usize * self.nx + x as usize] {
                            let (pos, id, i) = &self.entries[k];
                            let d = pos.distance_sq(p);
                            if Self::better((d, *id), best) {
                                best = Some((d, *id, *i));
                            }
                        }
                    }
                    x = if on_edge_row || x == x1 { x + 1 } else { x1 };
                }
            }
            if let Some((bd, _, _)) = best {
                let bound = r as f64 * self.cell;
                if bd < bound * bound {
                    break;
                }
            }
        }
        best.map(|b| b.2)
    }
}
