// Copyright 2026 The vpe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vpe/cli.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "vpe/common.h"
#include "vpe/depth_align.h"
#include "vpe/io.h"
#include "vpe/metrics.h"
#include "vpe/pipeline.h"
#include "vpe/providers.h"
#include "vpe/sim.h"

namespace vpe {

namespace {

namespace fs = std::filesystem;

std::string join(const std::string& dir, const std::string& leaf) {
  return (fs::path(dir) / leaf).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail("IOError", "cannot create directory " + dir + ": " + ec.message());
}

std::string indexed_name(const char* prefix, int frame, int view) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%06d_%d.bin", prefix, frame, view);
  return buf;
}

// Full round-trip precision for metric output lines.
std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string model_name(CameraModel m) {
  return m == CameraModel::kUnified ? "unified" : "pinhole";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail("IOError", "cannot open " + path + " for writing");
  f << text;
  if (!f) fail("IOError", "short write to " + path);
}

// Resolution comes from the dataset unless the caller pinned it; focal/model
// stay whatever the config says so a solve can start from a deliberately
// wrong guess.
RunConfig with_dataset_defaults(const RunConfig& config, const FileProviders& fp) {
  RunConfig cfg = config;
  if (!cfg.has("camera.width"))
    cfg.set("camera.width", std::to_string(static_cast<int>(fp.camera().width)));
  if (!cfg.has("camera.height"))
    cfg.set("camera.height", std::to_string(static_cast<int>(fp.camera().height)));
  return cfg;
}

void audit_dataset(const FileProviders& fp) {
  const std::vector<std::string> missing = fp.missing_required();
  if (missing.empty()) return;
  std::ostringstream msg;
  msg << missing.size() << " required dataset file(s) missing under " << fp.paths().root;
  for (const std::string& m : missing) msg << "\n  " << m;
  fail("IOError", msg.str());
}

AlignConfig align_config_from(const RunConfig& cfg) {
  AlignConfig ac;
  ac.momentum = cfg.get_double("align.momentum");
  ac.consistency.tau_px = cfg.get_double("align.tau_px");
  ac.consistency.tau_rel = cfg.get_double("align.tau_rel");
  ac.consistency.neighbors = cfg.get_int("align.neighbors");
  ac.gate.coverage_lo = cfg.get_double("align.coverage_lo");
  ac.gate.coverage_hi = cfg.get_double("align.coverage_hi");
  return ac;
}

}  // namespace

void cmd_simulate(const RunConfig& config, const std::string& out_dir) {
  sim::SceneConfig sc;
  sc.num_frames = config.get_int("sim.frames");
  sc.width = config.get_int("sim.width");
  sc.height = config.get_int("sim.height");
  sc.fov_deg = config.get_double("sim.fov_deg");
  sc.seed = static_cast<uint64_t>(config.get_int("seed"));
  sc.sprinkle_points = config.get_int("sim.sprinkle");
  sc.motion_scale = config.get_double("sim.motion_scale");
  sc.palindrome = config.get_bool("sim.palindrome");
  sc.dynamic_object = config.get_bool("sim.dynamic");
  sc.dynamic_size = config.get_double("sim.dynamic_size");
  const sim::Scene scene = sim::Scene::build(sc);

  // sim.flow_sigma is given in full-resolution pixels; the flow grid lives at
  // 1/kDepthStride scale, so rescale to grid units (matches SimProviders).
  const double flow_sigma =
      config.get_double("sim.flow_sigma") / static_cast<double>(kDepthStride);
  const double track_sigma = config.get_double("sim.track_sigma");
  const int tracks_per_pair = config.get_int("sim.tracks_per_pair");
  const int radius = config.get_int("sim.flow_radius");
  const double vda_alpha = config.get_double("sim.vda_alpha");
  const double vda_beta = config.get_double("sim.vda_beta");
  const bool emit_frames = config.get_bool("sim.emit_frames");

  const DatasetPaths paths{out_dir};
  ensure_dir(out_dir);
  ensure_dir(join(out_dir, "flow"));
  ensure_dir(join(out_dir, "prior_lo"));
  ensure_dir(join(out_dir, "prior_hi"));
  ensure_dir(join(out_dir, "mask"));
  ensure_dir(join(out_dir, "vda"));
  if (emit_frames) ensure_dir(join(out_dir, "frames"));

  {
    std::ostringstream meta;
    meta << "sim.frames = " << sc.num_frames << "\n"
         << "camera.width = " << sc.width << "\n"
         << "camera.height = " << sc.height << "\n";
    write_text(paths.meta(), meta.str());
  }
  {
    const Intrinsics& k = scene.camera;
    std::ostringstream intr;
    intr.precision(17);
    intr << "camera.model = " << model_name(k.model) << "\n"
         << "camera.f = " << k.f << "\n"
         << "camera.alpha = " << k.alpha << "\n"
         << "camera.width = " << static_cast<int>(k.width) << "\n"
         << "camera.height = " << static_cast<int>(k.height) << "\n";
    write_text(paths.intrinsics(), intr.str());
  }
  {
    Trajectory gt;
    gt.reserve(scene.trajectory.size());
    for (int f = 0; f < sc.num_frames; ++f)
      gt.push_back({static_cast<double>(f), scene.pose(f)});
    write_trajectory(paths.gt_trajectory(), gt);
  }

  const int low_rows = low_res_rows(sc.height);
  const int low_cols = low_res_cols(sc.width);
  const Intrinsics low_k = scene.camera.scaled(1.0 / kDepthStride);

  // Per-frame modalities: depth prior at both resolutions, static mask,
  // affine-corrupted video depth, optional textured render.
  for (int f = 0; f < sc.num_frames; ++f) {
    const sim::DepthRender low = sim::render_depth(scene, f, low_k, low_rows, low_cols);
    Grid<double> weight(low_rows, low_cols);
    for (int i = 0; i < low_rows * low_cols; ++i)
      weight[i] = depth_valid(low.inv_depth[i]) ? 1.0 : 0.0;
    write_tensor(paths.prior_lo(f, 0), tensor_from_grids(low.inv_depth, weight));
    write_pgm(paths.mask(f, 0), mask_to_bytes(low.static_mask));

    const sim::DepthRender full =
        sim::render_depth(scene, f, scene.camera, sc.height, sc.width);
    write_tensor(paths.prior_hi(f, 0), tensor_from_grid(full.inv_depth));
    write_tensor(paths.vda(f, 0),
                 tensor_from_grid(sim::affine_depth(scene, f, scene.camera, sc.height,
                                                    sc.width, vda_alpha, vda_beta)));
    if (emit_frames)
      write_pgm_float(paths.frame_image(f, 0),
                      sim::render_image(scene, f, scene.camera, sc.height, sc.width));
  }

  // Pairwise modalities within the emission radius, both directions. Track
  // order is pinned (i ascending, forward then backward per pair) so the
  // dataset is byte-reproducible.
  TrackSet all_tracks;
  for (int i = 0; i < sc.num_frames; ++i) {
    for (int j = i + 1; j < std::min(sc.num_frames, i + radius + 1); ++j) {
      write_tensor(paths.flow(i, 0, j, 0),
                   tensor_from_flow(sim::induced_flow(scene, i, j, low_k, low_rows,
                                                      low_cols, flow_sigma)));
      write_tensor(paths.flow(j, 0, i, 0),
                   tensor_from_flow(sim::induced_flow(scene, j, i, low_k, low_rows,
                                                      low_cols, flow_sigma)));
      const TrackSet fwd = sim::sample_tracks(scene, i, j, tracks_per_pair, track_sigma);
      const TrackSet bwd = sim::sample_tracks(scene, j, i, tracks_per_pair, track_sigma);
      all_tracks.tracks.insert(all_tracks.tracks.end(), fwd.tracks.begin(),
                               fwd.tracks.end());
      all_tracks.tracks.insert(all_tracks.tracks.end(), bwd.tracks.begin(),
                               bwd.tracks.end());
    }
  }
  write_tracks(paths.tracks_file(), all_tracks);
}

void cmd_solve(const RunConfig& config, const std::string& dataset_dir,
               const std::string& out_dir, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();

  FileProviders fp(dataset_dir, config.get_bool("prior.scale_conditioned"));
  audit_dataset(fp);

  const RunConfig cfg = with_dataset_defaults(config, fp);
  const int threads = cfg.get_int("solver.threads");
  if (threads > 0) set_num_threads(threads);

  const PipelineConfig pc = pipeline_config_from(cfg);
  VideoSession session = run_video(pc, fp.set(), fp.num_frames());
  const Trajectory traj = session.trajectory();

  ensure_dir(out_dir);
  write_trajectory(join(out_dir, "trajectory.txt"), traj);

  ensure_dir(join(out_dir, "kf_depth"));
  for (const Keyframe& kf : session.graph().vertices)
    write_tensor(join(out_dir, indexed_name("kf_depth/d", kf.frame_index, kf.view)),
                 tensor_from_grid(kf.inv_depth));

  const AlignConfig ac = align_config_from(cfg);
  if (file_exists(fp.paths().vda(0, 0))) {
    const AlignResult ar =
        align_video_depth(session.graph(), traj, &fp, &fp, &fp, ac);
    ensure_dir(join(out_dir, "depth"));
    for (size_t i = 0; i < ar.depth.size(); ++i)
      write_tensor(join(out_dir, indexed_name("depth/h", static_cast<int>(i), 0)),
                   tensor_from_grid(ar.depth[i]));
  }

  if (cfg.get_bool("out.ply")) {
    const std::vector<Vec3> cloud =
        build_consistent_cloud(session.graph(), ac.consistency);
    std::vector<CloudPoint> points(cloud.size());
    for (size_t i = 0; i < cloud.size(); ++i) points[i] = {cloud[i], 1.0};
    write_ply(join(out_dir, "cloud.ply"), points);
  }

  const double runtime_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const SessionStats& st = session.stats();
  const Intrinsics& est_k = session.graph().intrinsics;
  std::ostringstream report;
  report << "keyframes=" << st.keyframes << "\n"
         << "backend_runs=" << st.backend_runs << "\n"
         << "infill_fallbacks=" << st.infill_fallbacks << "\n"
         << "final_energy=" << num(st.final_energy) << "\n"
         << "focal_est=" << num(est_k.f) << "\n"
         << "fov_est_deg=" << num(est_k.fov_deg()) << "\n";
  if (file_exists(fp.paths().gt_trajectory())) {
    const Trajectory gt = read_trajectory(fp.paths().gt_trajectory());
    report << "ate=" << num(ate(traj, gt, AlignMode::kRigid)) << "\n"
           << "rte=" << num(rte(traj, gt, 1)) << "\n"
           << "rre_deg=" << num(rre_deg(traj, gt, 1)) << "\n"
           << "focal_error_deg=" << num(focal_error_deg(est_k, fp.camera())) << "\n";
  }
  out << report.str();
  // runtime goes to the report only: everything echoed above is reproducible.
  report << "runtime_sec=" << num(runtime_sec) << "\n";
  write_text(join(out_dir, "report.txt"), report.str());
}

void cmd_eval(const std::string& est_path, const std::string& gt_path, int delta,
              const std::string& mode, std::ostream& out) {
  AlignMode m;
  if (mode == "rigid") {
    m = AlignMode::kRigid;
  } else if (mode == "similarity") {
    m = AlignMode::kSimilarity;
  } else if (mode == "none") {
    m = AlignMode::kNone;
  } else {
    fail("ConfigError", "unknown alignment mode '" + mode +
                            "' (expected rigid, similarity, or none)");
  }
  const Trajectory est = read_trajectory(est_path);
  const Trajectory gt = read_trajectory(gt_path);
  out << "ate=" << num(ate(est, gt, m)) << "\n"
      << "rte=" << num(rte(est, gt, delta)) << "\n"
      << "rre_deg=" << num(rre_deg(est, gt, delta)) << "\n";
}

void cmd_shuttle(const RunConfig& config, const std::string& dataset_dir,
                 std::ostream& out) {
  FileProviders fp(dataset_dir, config.get_bool("prior.scale_conditioned"));
  audit_dataset(fp);

  const RunConfig cfg = with_dataset_defaults(config, fp);
  const int threads = cfg.get_int("solver.threads");
  if (threads > 0) set_num_threads(threads);

  const PipelineConfig pc = pipeline_config_from(cfg);
  const int n = fp.num_frames();
  const ShuttleResult r = shuttle_eval([&](bool reversed) {
    if (reversed) {
      ReversedProviders rp(fp.set(), n);
      VideoSession session = run_video(pc, rp.set(), n);
      return std::make_pair(session.trajectory(), session.graph().intrinsics.fov_deg());
    }
    VideoSession session = run_video(pc, fp.set(), n);
    return std::make_pair(session.trajectory(), session.graph().intrinsics.fov_deg());
  });
  out << "s_ate=" << num(r.s_ate) << "\n"
      << "s_rte=" << num(r.s_rte) << "\n"
      << "s_rre_deg=" << num(r.s_rre_deg) << "\n"
      << "s_focal_deg=" << num(r.s_focal_deg) << "\n";
}

void cmd_sampson(const std::string& traj_path, const std::string& intrinsics_path,
                 const std::string& tracks_path, std::ostream& out) {
  const Trajectory traj = read_trajectory(traj_path);
  const Intrinsics k = init_intrinsics(RunConfig::load(intrinsics_path));
  const TrackSet tracks = read_tracks(tracks_path);

  std::map<long long, int> frame_of;
  for (size_t i = 0; i < traj.size(); ++i)
    frame_of[std::llround(traj[i].t)] = static_cast<int>(i);

  CorrespondenceSet cs;
  cs.pairs.resize(traj.empty() ? 0 : traj.size() - 1);
  for (const Track& t : tracks.tracks) {
    const auto ii = frame_of.find(t.frame_i);
    const auto jj = frame_of.find(t.frame_j);
    if (ii == frame_of.end() || jj == frame_of.end()) continue;
    if (jj->second == ii->second + 1) {
      cs.pairs[ii->second].emplace_back(t.p_i, t.p_j);
    } else if (ii->second == jj->second + 1) {
      cs.pairs[jj->second].emplace_back(t.p_j, t.p_i);
    }
  }

  const SampsonResult r = sampson_error(traj, k, cs);
  out << "sampson_mean_px=" << num(r.mean_px) << "\n"
      << "sampson_used=" << r.used << "\n"
      << "sampson_skipped=" << r.skipped << "\n";
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"keyframe bundle-adjusted video pose and depth engine"};
  app.require_subcommand(1);

  std::string config_path, out_dir, dataset_dir;
  std::string est_path, gt_path, traj_path, intrinsics_path, tracks_path;
  std::string mode = "rigid";
  int delta = 1;
  int threads = 0;
  bool no_dense = false, no_sparse = false, no_depth_reg = false, no_mask = false;

  CLI::App* simulate = app.add_subcommand(
      "simulate", "Render an oracle dataset (flows, priors, masks, tracks)");
  simulate->add_option("--config", config_path, "run configuration file")->required();
  simulate->add_option("--out", out_dir, "dataset output directory")->required();

  CLI::App* solve = app.add_subcommand(
      "solve", "Estimate trajectory, intrinsics, and depth over a dataset");
  solve->add_option("--dataset", dataset_dir, "dataset directory")->required();
  solve->add_option("--out", out_dir, "output directory")->required();
  solve->add_option("--config", config_path, "run configuration file");
  solve->add_option("--threads", threads, "worker threads (0 = library default)");
  solve->add_flag("--no-dense", no_dense, "disable the dense flow term");
  solve->add_flag("--no-sparse", no_sparse, "disable the sparse track term");
  solve->add_flag("--no-depth-reg", no_depth_reg, "disable the depth prior term");
  solve->add_flag("--no-mask", no_mask, "ignore static masks");

  CLI::App* eval = app.add_subcommand("eval", "Compare a trajectory against a reference");
  eval->add_option("--est", est_path, "estimated trajectory")->required();
  eval->add_option("--gt", gt_path, "reference trajectory")->required();
  eval->add_option("--delta", delta, "relative-error frame gap");
  eval->add_option("--mode", mode, "alignment: rigid, similarity, none");

  CLI::App* shuttle = app.add_subcommand(
      "shuttle", "Forward/reversed self-consistency over a dataset");
  shuttle->add_option("--dataset", dataset_dir, "dataset directory")->required();
  shuttle->add_option("--config", config_path, "run configuration file");

  CLI::App* sampson = app.add_subcommand(
      "sampson", "Epipolar consistency of tracks under a trajectory");
  sampson->add_option("--traj", traj_path, "trajectory file")->required();
  sampson->add_option("--intrinsics", intrinsics_path, "intrinsics config")->required();
  sampson->add_option("--tracks", tracks_path, "track file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    RunConfig cfg =
        config_path.empty() ? RunConfig() : RunConfig::load(config_path);
    if (*simulate) {
      cmd_simulate(cfg, out_dir);
      out << "dataset written to " << out_dir << "\n";
    } else if (*solve) {
      if (no_dense) cfg.set("terms.dense", "false");
      if (no_sparse) cfg.set("terms.sparse", "false");
      if (no_depth_reg) cfg.set("terms.depth_reg", "false");
      if (no_mask) cfg.set("terms.mask", "false");
      if (solve->count("--threads")) cfg.set("solver.threads", std::to_string(threads));
      cmd_solve(cfg, dataset_dir, out_dir, out);
    } else if (*eval) {
      cmd_eval(est_path, gt_path, delta, mode, out);
    } else if (*shuttle) {
      cmd_shuttle(cfg, dataset_dir, out);
    } else if (*sampson) {
      cmd_sampson(traj_path, intrinsics_path, tracks_path, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: Unknown: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace vpe
