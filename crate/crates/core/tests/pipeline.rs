mod common;

use std::io::Write;
use std::net::TcpStream;
use std::time::{Duration, Instant};

use mio_odometry::model::{ModelConfig, ModelParams};
use mio_odometry::pipeline::{
    encode_pose, run_pipeline, run_sequence, serve_sink, Mode, PipelineConfig, PoseMessage, ReplaySource, SINK_CSV_HEADER,
};
use mio_odometry::sim::routes;
use mio_odometry::PoseSE3;

#[test]
fn offline_run_is_lossless() {
    let seq = common::walk(routes::SWEEP_ALL, 60.0, 3);
    assert_eq!(seq.scans.len(), 600);
    let out = run_sequence(&seq, &common::toy_model(2), &PipelineConfig::default()).unwrap();
    assert_eq!(out.stats.offered, 599);
    assert_eq!(out.stats.processed, 599);
    assert_eq!(out.stats.dropped, 0);
    assert_eq!(out.trajectory.len(), 600);
    assert_eq!(out.messages.len(), 599);
    assert!(out.messages.iter().enumerate().all(|(k, m)| m.seq as usize == k + 1));
    assert!(out.stats.max_queue_occupancy <= out.stats.queue_capacity);
}

#[test]
fn offline_runs_repeat_exactly() {
    let seq = common::walk(routes::EAST_BEDROOM, 20.0, 4);
    let params = common::toy_model(3);
    let a = run_sequence(&seq, &params, &PipelineConfig::default()).unwrap();
    let b = run_sequence(&seq, &params, &PipelineConfig::default()).unwrap();
    assert_eq!(a.trajectory, b.trajectory);
}

#[test]
fn zero_model_stays_at_the_origin() {
    let seq = common::walk(routes::LIVING_LOOP, 20.0, 5);
    let out = run_sequence(&seq, &ModelParams::zeros(ModelConfig::default()), &PipelineConfig::default()).unwrap();
    assert_eq!(out.trajectory.len(), seq.scans.len());
    for p in out.trajectory.poses() {
        assert_eq!(*p, PoseSE3::identity());
    }
}

#[test]
fn slow_inference_drops_most_frames_but_keeps_going() {
    // 10 Hz input against a 1 frame/s model, replayed ten times faster.
    let seq = common::walk(routes::LIVING_LOOP, 30.0, 6);
    let cfg = PipelineConfig {
        mode: Mode::Realtime,
        inference_delay_s: 0.1,
        replay_speed: 10.0,
        ..PipelineConfig::default()
    };
    let start = Instant::now();
    let out = run_pipeline(ReplaySource::from_sequence(&seq).paced(cfg.replay_speed), &common::toy_model(1), &cfg).unwrap();
    let outside = start.elapsed().as_secs_f64();
    let s = &out.stats;
    assert_eq!(s.offered, 299);
    assert_eq!(s.processed + s.dropped, s.offered);
    let rate = s.dropped as f64 / s.offered as f64;
    assert!((0.8..=0.99).contains(&rate), "drop rate {rate} ({s:?})");
    assert!(s.max_queue_occupancy <= s.queue_capacity);
    // the last frames still made it through
    let last_scan = seq.scans.last().unwrap().timestamp;
    assert!(out.trajectory.last().unwrap().0 > last_scan - 1.0);
    let ts: Vec<f64> = out.messages.iter().map(|m| m.timestamp).collect();
    assert!(ts.windows(2).all(|w| w[1] > w[0]));
    // seq is the radar frame index, so drops show up as gaps
    assert!(out.messages.windows(2).all(|w| w[1].seq > w[0].seq));
    assert!(out.messages.windows(2).any(|w| w[1].seq > w[0].seq + 1));
    // fps is measured against the pipeline's own wall time
    assert!((s.fps - s.processed as f64 / s.wall_time_s).abs() <= 0.01 * s.fps);
    assert!(s.wall_time_s <= outside && s.wall_time_s > 0.95 * outside, "{} vs {outside}", s.wall_time_s);
}

#[test]
fn poses_reach_the_sink() {
    let seq = common::walk(routes::WEST_BEDROOM, 20.0, 7);
    let dir = tempfile::tempdir().unwrap();
    let sink = serve_sink("127.0.0.1:0", dir.path()).unwrap();
    let cfg = PipelineConfig {
        uplink: Some(sink.local_addr().to_string()),
        ..PipelineConfig::default()
    };
    let out = run_sequence(&seq, &common::toy_model(4), &cfg).unwrap();
    let reports = sink.wait_closed(1, Duration::from_secs(10));
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0].error, None);
    let text = std::fs::read_to_string(&reports[0].path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(SINK_CSV_HEADER));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), out.messages.len());
    for (row, m) in rows.iter().zip(&out.messages) {
        assert_eq!(row[0] as u32, m.seq);
        assert!((row[1] - m.timestamp).abs() < 1e-6);
        assert!((row[2] - m.translation[0]).abs() < 1e-6 * m.translation[0].abs().max(1.0));
    }
}

fn send(addr: std::net::SocketAddr, n: u32, seq0: u32) {
    let mut s = TcpStream::connect(addr).unwrap();
    for k in 0..n {
        let msg = PoseMessage::from_pose(seq0 + k, k as f64 * 0.1, &PoseSE3::from_yaw(0.01 * k as f64));
        s.write_all(&encode_pose(&msg)).unwrap();
    }
}

#[test]
fn sink_keeps_clients_apart() {
    let dir = tempfile::tempdir().unwrap();
    let sink = serve_sink("127.0.0.1:0", dir.path()).unwrap();
    let addr = sink.local_addr();
    send(addr, 100, 0);
    let first = sink.wait_closed(1, Duration::from_secs(10));
    assert_eq!(first.len(), 1);
    assert_eq!(std::fs::read_to_string(&first[0].path).unwrap().lines().count(), 101);

    let a = std::thread::spawn(move || send(addr, 30, 1000));
    let b = std::thread::spawn(move || send(addr, 40, 2000));
    a.join().unwrap();
    b.join().unwrap();
    let all = sink.wait_closed(3, Duration::from_secs(10));
    let mut files: Vec<_> = all.iter().map(|r| r.path.clone()).collect();
    files.sort();
    files.dedup();
    assert_eq!(files.len(), 3);
    for r in &all[1..] {
        let text = std::fs::read_to_string(&r.path).unwrap();
        let seqs: Vec<u32> = text.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
        let base = seqs[0];
        assert!(base == 1000 || base == 2000);
        assert_eq!(seqs, (base..base + seqs.len() as u32).collect::<Vec<_>>());
        assert_eq!(seqs.len(), if base == 1000 { 30 } else { 40 });
    }
}

#[test]
fn garbage_only_closes_its_own_connection() {
    let dir = tempfile::tempdir().unwrap();
    let sink = serve_sink("127.0.0.1:0", dir.path()).unwrap();
    let addr = sink.local_addr();
    let mut bad = TcpStream::connect(addr).unwrap();
    let mut frame = encode_pose(&PoseMessage::from_pose(0, 0.0, &PoseSE3::identity()));
    bad.write_all(&frame).unwrap();
    frame[0] = b'X';
    bad.write_all(&frame).unwrap();
    let closed = sink.wait_closed(1, Duration::from_secs(10));
    assert_eq!(closed.len(), 1);
    assert!(closed[0].error.is_some());
    assert_eq!(closed[0].frames, 1);
    send(addr, 5, 0);
    let closed = sink.wait_closed(2, Duration::from_secs(10));
    assert_eq!(closed.len(), 2);
    assert_eq!(closed[1].error, None);
    assert_eq!(closed[1].frames, 5);
}

#[test]
fn one_second_model_at_ten_hertz() {
    let seq = common::walk(routes::EAST_BEDROOM, 20.0, 8);
    let cfg = PipelineConfig {
        mode: Mode::Realtime,
        inference_delay_s: 1.0,
        ..PipelineConfig::default()
    };
    let out = run_sequence(&seq, &common::toy_model(1), &cfg).unwrap();
    let s = &out.stats;
    let rate = s.dropped as f64 / s.offered as f64;
    println!("offered {} processed {} dropped {} ({:.1}%)", s.offered, s.processed, s.dropped, 100.0 * rate);
    assert!((0.8..=0.99).contains(&rate), "drop rate {rate}");
}
