//! Synthetic scene generation: a deterministic stand-in for the detector
//! and embedding network. Every ground-truth identity gets one latent
//! unit feature vector; per-frame features are the latent plus bounded
//! noise, renormalized. Objects move along separated lanes and may leave
//! and re-enter, which is what exercises label retention.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bbox::Bbox;
use crate::error::{Error, Result};
use crate::metric::{distance, normalize, FeatureVector, MetricKind};

/// One per-frame observation: box, appearance feature, and (for synthetic
/// scenes) the ground-truth identity.
#[derive(Clone, Debug)]
pub struct Detection {
    pub frame: u64,
    pub camera: u32,
    pub bbox: Bbox,
    pub feature: FeatureVector,
    pub truth_id: Option<u64>,
}

/// Scene parameters. `windows[i]` lists the presence intervals
/// `[enter, exit)` of object `i`; objects re-enter by having several
/// windows.
#[derive(Clone, Debug)]
pub struct SceneSpec {
    pub dim: usize,
    /// Maximum euclidean perturbation added to a latent before
    /// renormalization.
    pub noise_radius: f64,
    /// Minimum pairwise cosine distance between latent vectors.
    pub min_separation: f64,
    pub seed: u64,
    pub windows: Vec<Vec<(u64, u64)>>,
    /// Horizontal speed in pixels per frame.
    pub velocity: f64,
    /// Vertical gap between object lanes.
    pub lane_gap: f64,
    pub box_height: f64,
    pub box_aspect: f64,
}

impl SceneSpec {
    /// All objects present for the whole scene.
    pub fn persistent(
        dim: usize,
        objects: usize,
        frames: u64,
        noise_radius: f64,
        min_separation: f64,
        seed: u64,
    ) -> Self {
        SceneSpec {
            dim,
            noise_radius,
            min_separation,
            seed,
            windows: vec![vec![(0, frames)]; objects],
            velocity: 3.0,
            lane_gap: 100.0,
            box_height: 40.0,
            box_aspect: 0.5,
        }
    }

    /// Re-entry scene: `persistent` objects live for the whole scene
    /// while `cyclers` objects appear one after another, each leaving for
    /// `gap` frames (long enough to kill its track) and then returning
    /// before the next cycler first appears.
    pub fn reentry(
        dim: usize,
        persistent: usize,
        cyclers: usize,
        appear: u64,
        gap: u64,
        noise_radius: f64,
        min_separation: f64,
        seed: u64,
    ) -> Self {
        let stride = appear + gap + appear + 2;
        let total = 2 + cyclers as u64 * stride + 2;
        let mut windows = vec![vec![(0, total)]; persistent];
        for j in 0..cyclers as u64 {
            let t0 = 2 + j * stride;
            windows.push(vec![
                (t0, t0 + appear),
                (t0 + appear + gap, t0 + appear + gap + appear),
            ]);
        }
        SceneSpec {
            dim,
            noise_radius,
            min_separation,
            seed,
            windows,
            velocity: 3.0,
            lane_gap: 100.0,
            box_height: 40.0,
            box_aspect: 0.5,
        }
    }

    pub fn objects(&self) -> usize {
        self.windows.len()
    }

    pub fn frames(&self) -> u64 {
        self.windows
            .iter()
            .flat_map(|ws| ws.iter().map(|w| w.1))
            .max()
            .unwrap_or(0)
    }

    /// Number of re-entry events (windows after each object's first).
    pub fn reentries(&self) -> u64 {
        self.windows
            .iter()
            .map(|ws| ws.len().saturating_sub(1) as u64)
            .sum()
    }
}

/// Random unit vector (gaussian direction, normalized).
pub fn random_unit_vector(dim: usize, rng: &mut ChaCha8Rng) -> FeatureVector {
    loop {
        let values: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let v = FeatureVector::new(values).expect("gaussian draws are finite");
        if let Ok(u) = normalize(&v) {
            return u;
        }
    }
}

/// Latent plus a perturbation of euclidean length at most `radius`,
/// renormalized. Zero radius returns the latent unchanged, bit for bit.
pub fn noisy_sample(latent: &FeatureVector, radius: f64, rng: &mut ChaCha8Rng) -> FeatureVector {
    if radius == 0.0 {
        return latent.clone();
    }
    let dir = random_unit_vector(latent.dim(), rng);
    let scale = radius * rng.gen::<f64>();
    let values: Vec<f64> = latent
        .as_slice()
        .iter()
        .zip(dir.as_slice())
        .map(|(l, d)| l + scale * d)
        .collect();
    let v = FeatureVector::new(values).expect("finite by construction");
    normalize(&v).expect("latent dominates the perturbation")
}

/// Samples `count` unit vectors with pairwise cosine distance at least
/// `min_separation`, by rejection.
pub fn separated_latents(
    dim: usize,
    count: usize,
    min_separation: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<FeatureVector>> {
    let mut latents: Vec<FeatureVector> = Vec::with_capacity(count);
    let mut tries = 0usize;
    while latents.len() < count {
        tries += 1;
        if tries > 200_000 {
            return Err(Error::InfeasibleScene(format!(
                "could not sample {count} unit vectors in {dim}-d with pairwise distance >= {min_separation}"
            )));
        }
        let candidate = random_unit_vector(dim, rng);
        if latents
            .iter()
            .all(|l| distance(l, &candidate, MetricKind::Cosine) >= min_separation)
        {
            latents.push(candidate);
        }
    }
    Ok(latents)
}

/// Generates the frame-ordered detection stream of a scene.
pub fn generate_scene(spec: &SceneSpec) -> Result<Vec<Detection>> {
    if spec.objects() == 0 {
        return Err(Error::InfeasibleScene("scene has no objects".into()));
    }
    if spec.min_separation < 2.0 * spec.noise_radius {
        return Err(Error::InfeasibleScene(format!(
            "separation {} is below twice the noise radius {}",
            spec.min_separation, spec.noise_radius
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let latents = separated_latents(spec.dim, spec.objects(), spec.min_separation, &mut rng)?;

    let mut detections = Vec::new();
    for frame in 0..spec.frames() {
        for (obj, windows) in spec.windows.iter().enumerate() {
            let Some(window) = windows.iter().find(|(s, e)| frame >= *s && frame < *e) else {
                continue;
            };
            let t = (frame - window.0) as f64;
            let bbox = Bbox::new(
                40.0 + spec.velocity * t,
                spec.lane_gap * (obj as f64 + 1.0),
                spec.box_aspect,
                spec.box_height,
            );
            let feature = noisy_sample(&latents[obj], spec.noise_radius, &mut rng);
            detections.push(Detection {
                frame,
                camera: 0,
                bbox,
                feature,
                truth_id: Some(obj as u64 + 1),
            });
        }
    }
    Ok(detections)
}

/// A clustered synthetic corpus for index benchmarks: `total` vectors
/// assigned round-robin to `clusters` separated centers.
pub struct ClusteredCorpus {
    pub vectors: Vec<FeatureVector>,
    pub cluster_of: Vec<usize>,
    pub centers: Vec<FeatureVector>,
}

pub fn clustered_corpus(
    dim: usize,
    clusters: usize,
    total: usize,
    noise_radius: f64,
    min_separation: f64,
    seed: u64,
) -> Result<ClusteredCorpus> {
    if clusters == 0 {
        return Err(Error::Config("corpus needs at least one cluster".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers = separated_latents(dim, clusters, min_separation, &mut rng)?;
    let mut vectors = Vec::with_capacity(total);
    let mut cluster_of = Vec::with_capacity(total);
    for i in 0..total {
        let c = i % clusters;
        vectors.push(noisy_sample(&centers[c], noise_radius, &mut rng));
        cluster_of.push(c);
    }
    Ok(ClusteredCorpus {
        vectors,
        cluster_of,
        centers,
    })
}

/// Fresh queries drawn around the same centers.
pub fn cluster_queries(
    centers: &[FeatureVector],
    count: usize,
    noise_radius: f64,
    seed: u64,
) -> Vec<FeatureVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| noisy_sample(&centers[i % centers.len()], noise_radius, &mut rng))
        .collect()
}
