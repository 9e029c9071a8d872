//! Deterministic counter-based noise streams.
//!
//! Every random number is a pure function of `(base_seed, path, step,
//! component)`: the counter triple is fed through the splitmix64 finalizer
//! (xor-shift-multiply rounds with the constants below), one full mixing
//! round per counter word. Uniform deviates take the top 53 bits offset by
//! one half, so they lie strictly inside `(0, 1)`; standard normals come
//! from the Box-Muller transform applied to component pairs.
//!
//! Identical inputs give identical outputs independent of worker count or
//! call order, which is what makes ensembles reproducible under `--workers`.

/// splitmix64 finalizer: a bijective 64-bit mixer.
#[inline(always)]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const WEYL_PATH: u64 = 0x9e37_79b9_7f4a_7c15;
const WEYL_STEP: u64 = 0xd1b5_4a32_d192_ed03;
const WEYL_COMP: u64 = 0x8cb9_2ba7_2f3d_8dd7;

/// Keyed hash of the `(path, step, component)` counter.
#[inline(always)]
pub fn counter_hash(seed: u64, path: u64, step: u64, component: u64) -> u64 {
    let mut h = seed ^ mix64(path.wrapping_mul(WEYL_PATH).wrapping_add(WEYL_STEP));
    h = mix64(h ^ step.wrapping_mul(WEYL_STEP).wrapping_add(WEYL_COMP));
    mix64(h ^ component.wrapping_mul(WEYL_COMP).wrapping_add(WEYL_PATH))
}

/// Uniform deviate in the open interval `(0, 1)`.
#[inline(always)]
pub fn uniform(seed: u64, path: u64, step: u64, component: u64) -> f64 {
    let h = counter_hash(seed, path, step, component);
    ((h >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal pair from counter components `2m` and `2m+1`.
#[inline(always)]
pub fn normal_pair(seed: u64, path: u64, step: u64, pair: u64) -> (f64, f64) {
    let u1 = uniform(seed, path, step, 2 * pair);
    let u2 = uniform(seed, path, step, 2 * pair + 1);
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = std::f64::consts::TAU * u2;
    (r * theta.cos(), r * theta.sin())
}

/// Fills `out` with independent standard normals for one `(path, step)`.
pub fn fill_normals<T: crate::scalar::Scalar>(seed: u64, path: u64, step: u64, out: &mut [T]) {
    let d = out.len();
    let mut i = 0;
    while i < d {
        let (a, b) = normal_pair(seed, path, step, (i / 2) as u64);
        out[i] = T::of(a);
        if i + 1 < d {
            out[i + 1] = T::of(b);
        }
        i += 2;
    }
}

/// Derives an independent stream key from a seed and a tag; used to give
/// sub-experiments (reference ensembles, per-beta runs) disjoint noise.
pub fn derive_stream(seed: u64, tag: u64) -> u64 {
    mix64(seed ^ mix64(tag.wrapping_add(WEYL_COMP)))
}
