use std::collections::{BTreeMap, VecDeque};

use super::{ClusterCenter, SuperpixelMap};

struct Component {
    label: u32,
    size: usize,
}

enum Fate {
    /// Largest piece of its label; keeps the label.
    Main,
    /// Small stray piece, absorbed by a neighbor.
    Orphan,
    /// Large stray piece, becomes a superpixel of its own.
    Split,
}

fn find(parent: &mut [usize], mut c: usize) -> usize {
    while parent[c] != c {
        parent[c] = parent[parent[c]];
        c = parent[c];
    }
    c
}

/// Makes every superpixel a single 4-connected region.
///
/// Each label keeps its largest connected piece. Stray pieces smaller than
/// `S^2 / 4` merge into the neighboring region with which they share the
/// longest boundary (ties: lowest component in scan order); larger stray
/// pieces become new superpixels. Surviving labels are then compacted to
/// `[0, K')`, preserving the relative order of the original ids.
pub fn enforce_connectivity(map: &SuperpixelMap) -> SuperpixelMap {
    let (w, h) = (map.width, map.height);
    let n = w * h;

    let mut comp = vec![usize::MAX; n];
    let mut comps: Vec<Component> = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let label = map.labels[start];
        comp[start] = id;
        queue.push_back(start);
        let mut size = 0;
        while let Some(p) = queue.pop_front() {
            size += 1;
            let (x, y) = (p % w, p / w);
            let mut visit = |q: usize| {
                if comp[q] == usize::MAX && map.labels[q] == label {
                    comp[q] = id;
                    queue.push_back(q);
                }
            };
            if x > 0 {
                visit(p - 1);
            }
            if x + 1 < w {
                visit(p + 1);
            }
            if y > 0 {
                visit(p - w);
            }
            if y + 1 < h {
                visit(p + w);
            }
        }
        comps.push(Component { label, size });
    }

    let max_label = map.labels.iter().copied().max().unwrap_or(0) as usize;
    let mut main_of: Vec<Option<usize>> = vec![None; max_label + 1];
    for (id, c) in comps.iter().enumerate() {
        let slot = &mut main_of[c.label as usize];
        match slot {
            Some(m) if comps[*m].size >= c.size => {}
            _ => *slot = Some(id),
        }
    }

    let min_size = map.grid_interval * map.grid_interval / 4.0;
    let mut fates: Vec<Fate> = comps
        .iter()
        .enumerate()
        .map(|(id, c)| {
            if main_of[c.label as usize] == Some(id) {
                Fate::Main
            } else if (c.size as f64) < min_size {
                Fate::Orphan
            } else {
                Fate::Split
            }
        })
        .collect();

    let labels_dense = main_of.iter().all(Option::is_some) && map.centers.len() == max_label + 1;
    if labels_dense && comps.len() == main_of.len() {
        return map.clone();
    }

    // Shared boundary lengths between each orphan and its neighbors.
    let mut shared: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
    let is_orphan = |fates: &[Fate], c: usize| matches!(fates[c], Fate::Orphan);
    for p in 0..n {
        let (x, y) = (p % w, p / w);
        let right = (x + 1 < w).then(|| p + 1);
        let down = (y + 1 < h).then(|| p + w);
        for q in right.into_iter().chain(down) {
            let (a, b) = (comp[p], comp[q]);
            if a == b {
                continue;
            }
            if is_orphan(&fates, a) {
                *shared.entry(a).or_default().entry(b).or_default() += 1;
            }
            if is_orphan(&fates, b) {
                *shared.entry(b).or_default().entry(a).or_default() += 1;
            }
        }
    }

    let mut parent: Vec<usize> = (0..comps.len()).collect();
    for (&orphan, neighbors) in &shared {
        let me = find(&mut parent, orphan);
        let mut totals: BTreeMap<usize, usize> = BTreeMap::new();
        for (&nb, &len) in neighbors {
            let root = find(&mut parent, nb);
            if root != me {
                *totals.entry(root).or_default() += len;
            }
        }
        let target =
            totals.iter().fold(
                None,
                |best: Option<(usize, usize)>, (&root, &len)| match best {
                    Some((_, l)) if l >= len => best,
                    _ => Some((root, len)),
                },
            );
        match target {
            Some((root, _)) => parent[me] = root,
            None => fates[me] = Fate::Split,
        }
    }

    // Order surviving roots: mains by original label, splits after them.
    let mut roots: Vec<(usize, usize)> = Vec::new();
    for id in 0..comps.len() {
        if find(&mut parent, id) != id {
            continue;
        }
        let key = match fates[id] {
            Fate::Main => comps[id].label as usize,
            _ => max_label + 1 + id,
        };
        roots.push((key, id));
    }
    roots.sort_unstable();
    let mut new_label = vec![u32::MAX; comps.len()];
    let mut centers = Vec::with_capacity(roots.len());
    for (i, &(_, root)) in roots.iter().enumerate() {
        new_label[root] = i as u32;
        let source = comps[root].label as usize;
        let v = map.centers.get(source).map_or(0.0, |c| c.v);
        centers.push(ClusterCenter { v, x: 0.0, y: 0.0 });
    }

    let labels = comp
        .iter()
        .map(|&c| new_label[find(&mut parent, c)])
        .collect();
    let mut out = SuperpixelMap {
        width: w,
        height: h,
        labels,
        centers,
        grid_interval: map.grid_interval,
    };
    out.recompute_positions();
    out
}
