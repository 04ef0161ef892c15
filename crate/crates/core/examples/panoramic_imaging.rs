//! Overlays three consecutive radar scans from a simulated walk, projects
//! them to a panoramic depth image and dumps it as a PGM.
//!
//! cargo run --example panoramic_imaging -- [out.pgm]

use mio_odometry::imaging::{panoramic_image, ImagingConfig};
use mio_odometry::sim::{routes, simulate, Floorplan, MotionScript, SensorNoiseConfig};

fn main() -> mio_odometry::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "target/panorama.pgm".into());
    let plan = Floorplan::apartment();
    let script = MotionScript::walk(routes::LIVING_LOOP, 20.0, 1.0, 1.5)?;
    let seq = simulate(&plan, &script, &SensorNoiseConfig::default().with_seed(3))?;

    let cfg = ImagingConfig::default();
    let k = 50;
    let img = panoramic_image(&seq.scans[k - 2..=k], &cfg)?;
    let lit = img.data().iter().filter(|v| **v > 0.0).count();
    println!("frame t={:.1}s, {}x{} pixels, {lit} lit", img.frame_timestamp, img.height(), img.width());
    for r in 0..img.height() {
        let row: String = (0..img.width())
            .map(|c| match img.get(r, c) {
                0.0 => ' ',
                v if v < 0.4 => '.',
                v if v < 0.7 => 'o',
                _ => '#',
            })
            .collect();
        println!("|{row}|");
    }
    if let Some(dir) = std::path::Path::new(&out).parent() {
        std::fs::create_dir_all(dir)?;
    }
    img.write_pgm(&out)?;
    println!("wrote {out}");
    Ok(())
}
