//! Partition construction for the catching-up schemes. Anchors (domain
//! endpoints, breakpoints of the moving set, prescription times) are fixed
//! across refinement levels; the gaps between them are subdivided
//! uniformly, with the count doubling per level. Interior nodes are
//! generated as `s + j * (gap / n)`, which makes every level-`l` node
//! reappear bit for bit at level `l + 1`.

use std::collections::BTreeMap;

use crate::solver::SolverError;

#[derive(Clone, Debug)]
pub(crate) struct Partition {
    anchors: Vec<f64>,
    base_counts: Vec<usize>,
    /// Anchor index by original prescription-list position.
    prescription_anchor: BTreeMap<usize, usize>,
}

impl Partition {
    /// Assemble anchors from the domain, the moving-set anchor times, and
    /// prescription times. Times closer than `tol` merge into one anchor.
    pub fn build(
        domain: [f64; 2],
        anchor_times: &[f64],
        prescription_times: &[f64],
        base_steps: usize,
        tol: f64,
    ) -> Result<Self, SolverError> {
        let [a, b] = domain;
        let mut anchors = vec![a, b];
        anchors.extend(anchor_times.iter().copied());
        anchors.retain(|t| t.is_finite() && *t >= a - tol && *t <= b + tol);
        anchors.sort_by(|x, y| x.partial_cmp(y).unwrap());
        anchors.dedup_by(|x, y| (*x - *y).abs() <= tol);
        // Prescription times become anchors too, merged onto existing ones
        // when they coincide.
        let mut prescription_anchor = BTreeMap::new();
        for (idx, &t) in prescription_times.iter().enumerate() {
            if t < a - tol || t > b + tol {
                return Err(SolverError::InvalidPartition(format!(
                    "prescription time {t} outside [{a}, {b}]"
                )));
            }
            let pos = match anchors
                .binary_search_by(|x| x.partial_cmp(&t).unwrap())
            {
                Ok(i) => i,
                Err(ins) => {
                    if ins > 0 && (t - anchors[ins - 1]).abs() <= tol {
                        ins - 1
                    } else if ins < anchors.len() && (anchors[ins] - t).abs() <= tol {
                        ins
                    } else {
                        anchors.insert(ins, t);
                        ins
                    }
                }
            };
            prescription_anchor.insert(idx, pos);
        }
        // Inserting anchors shifts indices; recompute the map once the set
        // is final.
        let mut prescription_anchor_final = BTreeMap::new();
        for (idx, &t) in prescription_times.iter().enumerate() {
            let pos = anchors
                .iter()
                .position(|x| (x - t).abs() <= tol)
                .expect("prescription anchor inserted above");
            prescription_anchor_final.insert(idx, pos);
        }
        let _ = prescription_anchor;

        let span = b - a;
        let base_counts = anchors
            .windows(2)
            .map(|w| {
                let frac = (w[1] - w[0]) / span;
                ((base_steps as f64 * frac).ceil() as usize).max(1)
            })
            .collect();
        Ok(Self {
            anchors,
            base_counts,
            prescription_anchor: prescription_anchor_final,
        })
    }

    #[cfg(test)]
    pub fn anchors(&self) -> &[f64] {
        &self.anchors
    }

    /// Node times at a refinement level, plus the flat-index of each anchor.
    pub fn nodes(&self, level: u32) -> (Vec<f64>, Vec<usize>) {
        let mut times = Vec::new();
        let mut anchor_index = Vec::with_capacity(self.anchors.len());
        anchor_index.push(0);
        times.push(self.anchors[0]);
        for (gap, &count) in self.base_counts.iter().enumerate() {
            let s = self.anchors[gap];
            let e = self.anchors[gap + 1];
            let n = count << level;
            let h = (e - s) / n as f64;
            for j in 1..n {
                times.push(s + j as f64 * h);
            }
            times.push(e);
            anchor_index.push(times.len() - 1);
        }
        (times, anchor_index)
    }

    /// Flat node index of a prescription (by its position in the
    /// prescription list) at the given level.
    pub fn prescription_node(&self, prescription_idx: usize, anchor_index: &[usize]) -> usize {
        anchor_index[self.prescription_anchor[&prescription_idx]]
    }

    /// Map each node of `coarse_level` to its node index one level finer.
    /// Interior nodes double in place; anchors stay anchors.
    pub fn shared_node_map(&self, coarse_level: u32) -> Vec<(usize, usize)> {
        let mut map = Vec::new();
        let mut coarse_pos = 0usize;
        let mut fine_pos = 0usize;
        map.push((0, 0));
        for &count in &self.base_counts {
            let n_coarse = count << coarse_level;
            for j in 1..=n_coarse {
                map.push((coarse_pos + j, fine_pos + 2 * j));
            }
            coarse_pos += n_coarse;
            fine_pos += 2 * n_coarse;
        }
        map
    }
}
