use maspa::geometry::{classify_planar, MarsupialParams, PlanarScene, PlaneFrame, PlanePoint, Rect2};
use maspa::oracle::{oracle_c_visible, oracle_min_catenary, oracle_p_visible};
use maspa::pva2d::pva2d;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn random_planar(seed: u64, n: usize, target_z: f64, l_max: f64) -> PlanarScene {
    let params = MarsupialParams { h: 1.5, r: 0.5, max_tether: l_max };
    let toz = params.take_off_z();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut rects = Vec::with_capacity(n);
    for _ in 0..n {
        let ground = rng.gen_bool(0.4);
        let (z0, height) = if ground {
            (-0.5, rng.gen_range(1.0..target_z * 1.1))
        } else {
            (rng.gen_range(toz..target_z * 0.8), rng.gen_range(0.8..8.0))
        };
        let d0 = rng.gen_range(-3.0..22.0);
        let w = rng.gen_range(0.5..5.0);
        if d0 + w <= 0.1 { continue; }
        rects.push(Rect2::new(d0, d0 + w, z0, z0 + height));
    }
    rects.retain(|r| !(r.d_min < 0.3 && r.z_min < target_z + 0.3 && r.z_max > target_z - 0.3));
    classify_planar(&mut rects, &params, target_z);
    PlanarScene { rects, target: PlanePoint::new(0.0, target_z), take_off_z: toz,
                  frame: PlaneFrame::new(0.0, [0.0, 0.0], target_z) }
}

fn main() {
    for seed in 0..200u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(0xCAFE + seed);
        let n = rng.gen_range(1..=8);
        let target_z = rng.gen_range(8.0..16.0);
        let l_max = rng.gen_range(15.0..35.0);
        let scene = random_planar(9000 + seed, n, target_z, l_max);
        let v = pva2d(&scene, l_max);
        let Some(d_q) = v.q_reach else { continue };
        for _ in 0..500 {
            let d = rng.gen_range(0.0..d_q);
            let near = v.visible.iter().flat_map(|iv| [iv[0], iv[1]]).any(|e| (d - e).abs() < 1e-6);
            if near || v.contains(d) { continue; }
            let y = PlanePoint::new(d, scene.take_off_z);
            if oracle_c_visible(y, scene.target, l_max, 26, &scene.rects) {
                println!("VIOLATION seed {seed} d {d} target_z {target_z} l_max {l_max}");
                println!("  rects:");
                for r in &scene.rects {
                    println!("    d[{:.3},{:.3}] z[{:.3},{:.3}] flags {:?}", r.d_min, r.d_max, r.z_min, r.z_max, r.flags);
                }
                let len = oracle_min_catenary(y, scene.target, l_max, 26, &scene.rects);
                let (pvis, plen) = oracle_p_visible(y, &scene, l_max);
                println!("  catenary len {:?}; p_visible {pvis} best chain {:?}", len, plen);
                println!("  intervals {:?}", v.visible);
                return;
            }
        }
    }
    println!("no violation found");
}
