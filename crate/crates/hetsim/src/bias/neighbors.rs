//! Offloading and retaining neighbor-set derivation from the RSRP map.
//!
//! For each pico, the cells detectable inside its (biased) coverage
//! region form the retaining set; the top handover targets among the
//! macro members form the offloading set. The handover-probability proxy
//! for the ordering is the share of the pico's coverage-boundary points
//! where a candidate is the strongest other cell.

use crate::network::{CellId, CellKind, RsrpMap, Scenario};

/// Tuning knobs of the derivation.
#[derive(Debug, Clone, Copy)]
pub struct NeighborParams {
    /// Offloading-set size.
    pub n_off: usize,
    /// A cell within this window below the pico's RSRP anywhere in the
    /// pico region is detectable and joins the retaining set.
    pub detect_window_db: f64,
    /// Picos within this distance of each other form a neighbor group.
    pub group_radius_m: f64,
}

/// Neighbor sets of one pico, both ordered by descending handover
/// probability.
#[derive(Debug, Clone)]
pub struct PicoNeighbors {
    pub pico: CellId,
    /// Top macro handover targets, at most `n_off`.
    pub offloading: Vec<CellId>,
    /// Every detectable neighbor (macros and picos); superset of the
    /// offloading set.
    pub retaining: Vec<CellId>,
    /// No candidate was detectable anywhere in the region.
    pub isolated: bool,
    /// The pico wins no grid point even at the supplied bias.
    pub zero_coverage: bool,
}

impl PicoNeighbors {
    /// Ordered macro members of the retaining set.
    pub fn retaining_macros(&self, kinds: &[CellKind]) -> Vec<CellId> {
        self.retaining
            .iter()
            .copied()
            .filter(|&c| kinds[c] == CellKind::Macro)
            .collect()
    }
}

/// Derived neighbor structure of the deployment.
#[derive(Debug, Clone)]
pub struct NeighborSets {
    /// One entry per pico, ordered by pico id.
    pub per_pico: Vec<PicoNeighbors>,
    /// Connected components of picos within the group radius.
    pub groups: Vec<Vec<CellId>>,
}

impl NeighborSets {
    pub fn for_pico(&self, pico: CellId) -> Option<&PicoNeighbors> {
        self.per_pico.iter().find(|p| p.pico == pico)
    }

    pub fn group_of(&self, pico: CellId) -> Option<&[CellId]> {
        self.groups
            .iter()
            .find(|g| g.contains(&pico))
            .map(|g| g.as_slice())
    }

    /// Cardinality report: one row per pico with retaining and offloading
    /// set sizes and the group index.
    pub fn cardinality_csv(&self) -> String {
        let mut out = String::from("pico,retaining,offloading,group\n");
        for p in &self.per_pico {
            let group = self
                .groups
                .iter()
                .position(|g| g.contains(&p.pico))
                .map(|g| g.to_string())
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{}\n",
                p.pico,
                p.retaining.len(),
                p.offloading.len(),
                group
            ));
        }
        out
    }
}

/// Derive neighbor sets from the map. `pico_bias_db[cell]` is the range
/// extension applied to each pico when delimiting its coverage region
/// (zero for an unbiased analysis; macro entries are ignored).
pub fn derive_neighbor_sets(
    scenario: &Scenario,
    map: &RsrpMap,
    pico_bias_db: &[f64],
    params: &NeighborParams,
) -> NeighborSets {
    let kinds = scenario.kinds();
    let n = map.n_cells();
    let grid = &map.grid;
    let npoints = grid.num_points();
    let picos = scenario.pico_ids();
    let mut per_pico = Vec::with_capacity(picos.len());

    for &p in &picos {
        let v = pico_bias_db.get(p).copied().unwrap_or(0.0);
        // Coverage region under the pico's own bias.
        let mut region = vec![false; npoints];
        let mut any = false;
        let mut best_idx = 0usize;
        let mut best_deficit = f64::INFINITY;
        for idx in 0..npoints {
            let mut max_other = f64::NEG_INFINITY;
            for c in 0..n {
                if c != p {
                    max_other = max_other.max(map.value(c, idx));
                }
            }
            let deficit = max_other - (map.value(p, idx) + v);
            if deficit < 0.0 {
                region[idx] = true;
                any = true;
            }
            if deficit < best_deficit {
                best_deficit = deficit;
                best_idx = idx;
            }
        }
        let zero_coverage = !any;
        if zero_coverage {
            // Fall back to the least-dominated point so the pico still
            // gets a candidate ordering.
            region[best_idx] = true;
        }

        // Boundary: region points with a neighbor outside the region.
        let mut boundary = Vec::new();
        for idx in 0..npoints {
            if !region[idx] {
                continue;
            }
            let (ix, iy) = (idx % grid.nx, idx / grid.nx);
            let mut edge = false;
            if ix == 0 || !region[idx - 1] {
                edge = true;
            }
            if ix + 1 >= grid.nx || !region[idx + 1] {
                edge = true;
            }
            if iy == 0 || !region[idx - grid.nx] {
                edge = true;
            }
            if iy + 1 >= grid.ny || !region[idx + grid.nx] {
                edge = true;
            }
            if edge {
                boundary.push(idx);
            }
        }

        // Detectability: within the window of the pico somewhere in the
        // region.
        let mut detectable = vec![false; n];
        for idx in 0..npoints {
            if !region[idx] {
                continue;
            }
            let p_rsrp = map.value(p, idx);
            for c in 0..n {
                if c != p && !detectable[c] && map.value(c, idx) >= p_rsrp - params.detect_window_db
                {
                    detectable[c] = true;
                }
            }
        }

        // Handover-probability proxy: boundary share, then mean margin,
        // then id.
        let mut share = vec![0usize; n];
        for &idx in &boundary {
            let mut strongest = None;
            for c in 0..n {
                if c == p {
                    continue;
                }
                let better = match strongest {
                    None => true,
                    Some(s) => map.value(c, idx) > map.value(s, idx),
                };
                if better {
                    strongest = Some(c);
                }
            }
            if let Some(s) = strongest {
                share[s] += 1;
            }
        }
        let mean_margin = |c: CellId| -> f64 {
            if boundary.is_empty() {
                return f64::NEG_INFINITY;
            }
            boundary
                .iter()
                .map(|&idx| map.value(c, idx) - map.value(p, idx))
                .sum::<f64>()
                / boundary.len() as f64
        };
        let mut candidates: Vec<CellId> =
            (0..n).filter(|&c| c != p && detectable[c]).collect();
        candidates.sort_by(|&a, &b| {
            share[b]
                .cmp(&share[a])
                .then_with(|| {
                    mean_margin(b)
                        .partial_cmp(&mean_margin(a))
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .then_with(|| a.cmp(&b))
        });

        let offloading: Vec<CellId> = candidates
            .iter()
            .copied()
            .filter(|&c| kinds[c] == CellKind::Macro)
            .take(params.n_off)
            .collect();
        per_pico.push(PicoNeighbors {
            pico: p,
            offloading,
            isolated: candidates.is_empty(),
            retaining: candidates,
            zero_coverage,
        });
    }

    // Pico groups: connected components under the group radius.
    let mut groups: Vec<Vec<CellId>> = Vec::new();
    let mut assigned = vec![false; picos.len()];
    for (i, &p) in picos.iter().enumerate() {
        if assigned[i] {
            continue;
        }
        let mut group = vec![p];
        assigned[i] = true;
        let mut frontier = vec![i];
        while let Some(j) = frontier.pop() {
            let cj = &scenario.cells[picos[j]];
            for (k, &q) in picos.iter().enumerate() {
                if !assigned[k]
                    && cj.distance_to(scenario.cells[q].x_m, scenario.cells[q].y_m)
                        <= params.group_radius_m
                {
                    assigned[k] = true;
                    group.push(q);
                    frontier.push(k);
                }
            }
        }
        group.sort_unstable();
        groups.push(group);
    }

    NeighborSets { per_pico, groups }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::test_fixtures::{line_scenario, three_cell_line};
    use crate::network::{compute_rsrp_map, CellKind, ShadowField};

    fn params(n_off: usize) -> NeighborParams {
        NeighborParams {
            n_off,
            detect_window_db: 10.0,
            group_radius_m: 150.0,
        }
    }

    #[test]
    fn single_macro_single_pico() {
        let sc = line_scenario(&[
            (CellKind::Macro, 0.0, 30.0),
            (CellKind::Pico, 600.0, 5.0),
        ]);
        let map = compute_rsrp_map(&sc, &ShadowField::zero(&sc.grid, 2)).unwrap();
        let sets = derive_neighbor_sets(&sc, &map, &[0.0, 0.0], &params(3));
        let p = sets.for_pico(1).unwrap();
        assert_eq!(p.offloading, vec![0]);
        assert_eq!(p.retaining, vec![0]);
        assert!(!p.isolated);
    }

    #[test]
    fn three_cell_line_sets() {
        // The near macro is the single offloading target; the far macro is
        // detectable at the region edge and lands in the retaining set.
        let sc = three_cell_line();
        let map = compute_rsrp_map(&sc, &ShadowField::zero(&sc.grid, 3)).unwrap();
        let sets = derive_neighbor_sets(&sc, &map, &[5.0, 0.0, 0.0], &params(1));
        let p = sets.for_pico(0).unwrap();
        assert_eq!(p.offloading, vec![1]);
        assert!(p.retaining.contains(&1) && p.retaining.contains(&2));
        assert_eq!(p.retaining[0], 1);
    }

    #[test]
    fn nearby_picos_form_one_group() {
        let sc = line_scenario(&[
            (CellKind::Macro, 0.0, 30.0),
            (CellKind::Pico, 500.0, 5.0),
            (CellKind::Pico, 580.0, 5.0),
            (CellKind::Pico, 1200.0, 5.0),
        ]);
        let map = compute_rsrp_map(&sc, &ShadowField::zero(&sc.grid, 4)).unwrap();
        let sets = derive_neighbor_sets(&sc, &map, &[0.0; 4], &params(3));
        assert_eq!(sets.groups.len(), 2);
        assert_eq!(sets.group_of(1).unwrap(), &[1, 2]);
        assert_eq!(sets.group_of(3).unwrap(), &[3]);
    }

    #[test]
    fn offloading_is_subset_of_retaining() {
        let sc = three_cell_line();
        let map = compute_rsrp_map(&sc, &ShadowField::zero(&sc.grid, 3)).unwrap();
        let sets = derive_neighbor_sets(&sc, &map, &[5.0, 0.0, 0.0], &params(2));
        for p in &sets.per_pico {
            assert!(p.offloading.iter().all(|c| p.retaining.contains(c)));
            assert!(!p.retaining.contains(&p.pico));
        }
    }

    #[test]
    fn cardinality_report_lists_each_pico() {
        let sc = three_cell_line();
        let map = compute_rsrp_map(&sc, &ShadowField::zero(&sc.grid, 3)).unwrap();
        let sets = derive_neighbor_sets(&sc, &map, &[5.0, 0.0, 0.0], &params(1));
        let csv = sets.cardinality_csv();
        assert!(csv.starts_with("pico,retaining,offloading,group\n"));
        assert_eq!(csv.lines().count(), 2);
    }
}
