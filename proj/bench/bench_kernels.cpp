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
//
// Serial reference vs OpenMP kernels. The pairs are bit-identical by
// construction; this target measures what the parallel paths buy.

#include <benchmark/benchmark.h>

#include "vpe/depth_align.h"
#include "vpe/pipeline.h"
#include "vpe/residuals.h"
#include "vpe/sim.h"
#include "vpe/tracker.h"

namespace {

using namespace vpe;

const sim::Scene& bench_scene() {
  static const sim::Scene scene = [] {
    sim::SceneConfig sc;
    sc.num_frames = 48;
    return sim::Scene::build(sc);
  }();
  return scene;
}

// One short oracle solve provides a realistic multi-keyframe graph.
const BAGraph& bench_graph() {
  static SimProviders providers(bench_scene(), SimProviderOptions{});
  static const VideoSession session = [] {
    PipelineConfig pc;
    pc.camera = bench_scene().camera;
    return run_video(pc, providers.set(), bench_scene().cfg.num_frames);
  }();
  return session.graph();
}

void assemble(benchmark::State& state, bool parallel) {
  const BAGraph& g = bench_graph();
  const SolveScope scope = SolveScope::all_but_first_pose(g, true);
  const TermSwitches switches;
  const AssembleParams params;
  for (auto _ : state) {
    EnergyBreakdown energy;
    NormalEquations ne = parallel
        ? build_normal_equations(g, scope, switches, params, &energy)
        : build_normal_equations_serial(g, scope, switches, params, &energy);
    benchmark::DoNotOptimize(ne.g_c.data());
  }
}
void BM_assemble_serial(benchmark::State& s) { assemble(s, false); }
void BM_assemble_parallel(benchmark::State& s) { assemble(s, true); }
BENCHMARK(BM_assemble_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_assemble_parallel)->Unit(benchmark::kMillisecond);

void render_depth(benchmark::State& state, bool parallel) {
  const sim::Scene& scene = bench_scene();
  for (auto _ : state) {
    sim::DepthRender r = parallel
        ? sim::render_depth(scene, 10, scene.camera, 240, 320)
        : sim::render_depth_serial(scene, 10, scene.camera, 240, 320);
    benchmark::DoNotOptimize(r.inv_depth[0]);
  }
}
void BM_render_depth_serial(benchmark::State& s) { render_depth(s, false); }
void BM_render_depth_parallel(benchmark::State& s) { render_depth(s, true); }
BENCHMARK(BM_render_depth_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_render_depth_parallel)->Unit(benchmark::kMillisecond);

void induced_flow(benchmark::State& state, bool parallel) {
  const sim::Scene& scene = bench_scene();
  for (auto _ : state) {
    FlowField f = parallel
        ? sim::induced_flow(scene, 10, 14, scene.camera, 240, 320)
        : sim::induced_flow_serial(scene, 10, 14, scene.camera, 240, 320);
    benchmark::DoNotOptimize(f.flow[0]);
  }
}
void BM_induced_flow_serial(benchmark::State& s) { induced_flow(s, false); }
void BM_induced_flow_parallel(benchmark::State& s) { induced_flow(s, true); }
BENCHMARK(BM_induced_flow_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_induced_flow_parallel)->Unit(benchmark::kMillisecond);

void lk(benchmark::State& state, bool parallel) {
  const sim::Scene& scene = bench_scene();
  static const ImageF img_a = sim::render_image(scene, 10, scene.camera, 240, 320);
  static const ImageF img_b = sim::render_image(scene, 11, scene.camera, 240, 320);
  static const int levels = default_pyramid_levels(240, 320);
  static const ImagePyramid pyr_a = ImagePyramid::build(img_a, levels);
  static const ImagePyramid pyr_b = ImagePyramid::build(img_b, levels);
  static const std::vector<Vec2> points = [] {
    std::vector<Vec2> pts;
    for (const Corner& c : detect_corners(img_a, 400, 0.01, 8.0))
      pts.push_back(c.position);
    return pts;
  }();
  for (auto _ : state) {
    std::vector<LKTrack> tracks = parallel ? track_lk(pyr_a, pyr_b, points)
                                           : track_lk_serial(pyr_a, pyr_b, points);
    benchmark::DoNotOptimize(tracks.data());
  }
}
void BM_track_lk_serial(benchmark::State& s) { lk(s, false); }
void BM_track_lk_parallel(benchmark::State& s) { lk(s, true); }
BENCHMARK(BM_track_lk_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_track_lk_parallel)->Unit(benchmark::kMillisecond);

void consistent_cloud(benchmark::State& state, bool parallel) {
  const BAGraph& g = bench_graph();
  const ConsistencyParams params;
  for (auto _ : state) {
    std::vector<Vec3> cloud = parallel ? build_consistent_cloud(g, params)
                                       : build_consistent_cloud_serial(g, params);
    benchmark::DoNotOptimize(cloud.data());
  }
}
void BM_cloud_serial(benchmark::State& s) { consistent_cloud(s, false); }
void BM_cloud_parallel(benchmark::State& s) { consistent_cloud(s, true); }
BENCHMARK(BM_cloud_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_cloud_parallel)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
