use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

use super::pairwise::PairwiseMatrix;
use super::profile::DistanceProfile;

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// CSV with columns `d0, density, stderr, N, eps, t, manifold`.
pub fn profile_csv(profile: &DistanceProfile) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(["d0", "density", "stderr", "N", "eps", "t", "manifold"])?;
    let manifold = profile.manifold.to_string();
    for p in &profile.points {
        w.write_record([
            p.d0.to_string(),
            p.density.to_string(),
            p.stderr.to_string(),
            profile.n_paths.to_string(),
            profile.eps.to_string(),
            profile.t.to_string(),
            manifold.clone(),
        ])?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

/// Dense CSV of the density matrix, one row per location.
pub fn pairwise_csv(matrix: &PairwiseMatrix) -> Result<Vec<u8>> {
    let n = matrix.locations.len();
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record((0..n).map(|j| format!("x{j}")))?;
    for i in 0..n {
        w.write_record((0..n).map(|j| matrix.density[(i, j)].to_string()))?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

#[derive(Serialize)]
struct PairwiseSidecar<'a> {
    manifold: String,
    t: f64,
    eps: f64,
    delta: f64,
    n_paths: usize,
    seed: u64,
    stderr: Vec<Vec<f64>>,
    hits: Vec<Vec<usize>>,
    locations: Vec<Vec<f64>>,
    version: &'a str,
}

/// Metadata record accompanying [`pairwise_csv`].
pub fn pairwise_sidecar(matrix: &PairwiseMatrix) -> Result<Vec<u8>> {
    let n = matrix.locations.len();
    let rows = |f: &dyn Fn(usize, usize) -> f64| -> Vec<Vec<f64>> {
        (0..n).map(|i| (0..n).map(|j| f(i, j)).collect()).collect()
    };
    let sidecar = PairwiseSidecar {
        manifold: matrix.manifold.to_string(),
        t: matrix.t,
        eps: matrix.eps,
        delta: matrix.delta,
        n_paths: matrix.n_paths,
        seed: matrix.seed,
        stderr: rows(&|i, j| matrix.stderr[(i, j)]),
        hits: (0..n).map(|i| (0..n).map(|j| matrix.hits[(i, j)]).collect()).collect(),
        locations: matrix.locations.iter().map(|p| p.rep().flatten()).collect(),
        version: env!("CARGO_PKG_VERSION"),
    };
    let mut out = serde_json::to_vec_pretty(&sidecar)?;
    out.push(b'\n');
    Ok(out)
}
