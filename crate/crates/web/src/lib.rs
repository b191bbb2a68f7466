//! WebAssembly entry points for the static demo page in `www/`.
//!
//! Every export returns a JSON string; errors come back as a JS string.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use gbs_dks::graph::planted_instance;
use gbs_dks::hafnian::{pm_upper_bound, PmBoundInput};
use gbs_dks::harness::fig1_sweep;
use gbs_dks::optimize::random_search;
use gbs_dks::rng::{run_stream, seeded};
use gbs_dks::sampler::{Explorer, Gbs, TableStore, Uniform, DEFAULT_ENUMERATION_BUDGET};

/// Subset sizes the page may request; larger tables take too long to build
/// in a browser tab.
const MAX_DEMO_K: usize = 8;

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

fn check_k(k: usize) -> Result<(), String> {
    if !(2..=MAX_DEMO_K).contains(&k) || !k.is_multiple_of(2) {
        return Err(format!("k must be even and between 2 and {MAX_DEMO_K}"));
    }
    Ok(())
}

#[derive(Serialize)]
struct ScatterPoint {
    p: f64,
    edges: usize,
    hafnian: u64,
}

#[derive(Serialize)]
struct Scatter {
    k: usize,
    points: Vec<ScatterPoint>,
    bound: Vec<(usize, f64)>,
    zero_rows: usize,
}

pub fn fig1_scatter_json(k: usize, per_p: usize, seed: u64) -> Result<String, String> {
    if !(4..=16).contains(&k) {
        return Err("k must be between 4 and 16".into());
    }
    let probs: Vec<f64> = (1..=10).map(|i| f64::from(i) / 10.0).collect();
    let table = fig1_sweep(k, &probs, per_p.min(200), seed).map_err(|e| e.to_string())?;
    let max_edges = k * (k - 1) / 2;
    let bound = (0..=max_edges)
        .filter_map(|l| {
            let b = PmBoundInput::new(k, l).ok()?;
            Some((l, pm_upper_bound(b)))
        })
        .filter(|&(_, b)| b >= 1.0)
        .collect();
    to_json(&Scatter {
        k,
        points: table
            .rows
            .iter()
            .filter(|r| !r.zero)
            .map(|r| ScatterPoint {
                p: r.p,
                edges: r.edges,
                hafnian: r.hafnian,
            })
            .collect(),
        bound,
        zero_rows: table.zero_rows,
    })
}

#[derive(Serialize)]
struct Histograms {
    k: usize,
    max_edges: usize,
    planted: Vec<usize>,
    gbs: Vec<u32>,
    uniform: Vec<u32>,
    planted_hits_gbs: u32,
    planted_hits_uniform: u32,
}

/// Induced edge counts of `draws` GBS and uniform samples on a planted
/// instance, and how often each sample lies entirely inside the planted part.
pub fn sample_histograms_json(graph_seed: u64, k: usize, draws: u32, seed: u64) -> Result<String, String> {
    check_k(k)?;
    let inst = planted_instance(graph_seed);
    let g = &inst.graph;
    let store = TableStore::new(g.clone(), DEFAULT_ENUMERATION_BUDGET, None);
    let max_edges = k * (k - 1) / 2;
    let mut out = Histograms {
        k,
        max_edges,
        planted: inst.planted.indices().to_vec(),
        gbs: vec![0; max_edges + 1],
        uniform: vec![0; max_edges + 1],
        planted_hits_gbs: 0,
        planted_hits_uniform: 0,
    };
    let inside = |s: &gbs_dks::VertexSubset| s.iter().all(|v| inst.planted.contains(v));
    let mut rng = seeded(seed);
    let (mut gbs, mut uni) = (Gbs::new(&store), Uniform::new(g));
    for _ in 0..draws.min(200_000) {
        let s = gbs.explore(k, &mut rng).map_err(|e| e.to_string())?.subset;
        out.gbs[g.induced_edge_count(s.indices())] += 1;
        out.planted_hits_gbs += u32::from(inside(&s));
        let s = uni.explore(k, &mut rng).map_err(|e| e.to_string())?.subset;
        out.uniform[g.induced_edge_count(s.indices())] += 1;
        out.planted_hits_uniform += u32::from(inside(&s));
    }
    to_json(&out)
}

#[derive(Serialize)]
struct Curves {
    k: usize,
    samples: usize,
    gbs: Vec<f64>,
    uniform: Vec<f64>,
}

/// Mean best-so-far edge count of random search after each draw, averaged
/// over `reps` runs.
pub fn search_curves_json(graph_seed: u64, k: usize, samples: usize, reps: u32, seed: u64) -> Result<String, String> {
    check_k(k)?;
    let (samples, reps) = (samples.clamp(1, 1000), reps.clamp(1, 500));
    let inst = planted_instance(graph_seed);
    let g = &inst.graph;
    let store = TableStore::new(g.clone(), DEFAULT_ENUMERATION_BUDGET, None);
    let mut gbs = vec![0.0; samples];
    let mut uniform = vec![0.0; samples];
    for rep in 0..reps {
        let t = random_search(g, k, samples, &mut Gbs::new(&store), &mut run_stream(seed, 1, rep))
            .map_err(|e| e.to_string())?;
        for (acc, &b) in gbs.iter_mut().zip(&t.best_edges) {
            *acc += b as f64 / f64::from(reps);
        }
        let t = random_search(g, k, samples, &mut Uniform::new(g), &mut run_stream(seed, 0, rep))
            .map_err(|e| e.to_string())?;
        for (acc, &b) in uniform.iter_mut().zip(&t.best_edges) {
            *acc += b as f64 / f64::from(reps);
        }
    }
    to_json(&Curves {
        k,
        samples,
        gbs,
        uniform,
    })
}

#[wasm_bindgen]
pub fn fig1_scatter(k: usize, per_p: usize, seed: u64) -> Result<String, JsValue> {
    fig1_scatter_json(k, per_p, seed).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn sample_histograms(graph_seed: u64, k: usize, draws: u32, seed: u64) -> Result<String, JsValue> {
    sample_histograms_json(graph_seed, k, draws, seed).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn search_curves(graph_seed: u64, k: usize, samples: usize, reps: u32, seed: u64) -> Result<String, JsValue> {
    search_curves_json(graph_seed, k, samples, reps, seed).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn scatter_has_rows_and_bound() {
        let v: Value = serde_json::from_str(&fig1_scatter_json(8, 10, 1).unwrap()).unwrap();
        let points = v["points"].as_array().unwrap().len();
        assert_eq!(points as u64 + v["zero_rows"].as_u64().unwrap(), 100);
        assert!(!v["bound"].as_array().unwrap().is_empty());
        assert!(fig1_scatter_json(7, 10, 1).is_err());
    }

    #[test]
    fn gbs_histogram_is_denser() {
        let v: Value = serde_json::from_str(&sample_histograms_json(3, 4, 4000, 2).unwrap()).unwrap();
        let mean = |key: &str| {
            let h: Vec<f64> = v[key].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
            h.iter().enumerate().map(|(e, c)| e as f64 * c).sum::<f64>() / h.iter().sum::<f64>()
        };
        assert!(mean("gbs") > mean("uniform"));
        assert!(sample_histograms_json(3, 5, 10, 2).is_err());
    }

    #[test]
    fn curves_have_one_point_per_sample() {
        let v: Value = serde_json::from_str(&search_curves_json(3, 4, 30, 5, 1).unwrap()).unwrap();
        assert_eq!(v["gbs"].as_array().unwrap().len(), 30);
        assert_eq!(v["uniform"].as_array().unwrap().len(), 30);
    }
}
