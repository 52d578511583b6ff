#include <filesystem>
#include <fstream>

#include "csf/dataset.hpp"
#include "csf/synth.hpp"
#include "doctest.h"
#include "oracles.hpp"

using csf::Image;
using csf::Intrinsics;
using csf::Pose;
using csf::TrajectoryEntry;
using csf::Vec3d;

namespace {

std::filesystem::path fresh_dir(const char* name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("depth png round trip is exact at storage resolution") {
  const auto dir = fresh_dir("csf_test_png");
  auto gen = testutil::rng(101);
  Image<double> d(37, 23, 0.0);
  for (auto& v : d.data) {
    const double r = testutil::uniform(gen, -0.5, 6.0);
    v = r > 0.0 ? r : 0.0;  // leave holes
  }
  const Image<double> stored = csf::quantize_depth(d, 5000.0);
  const auto path = (dir / "depth.png").string();
  csf::write_depth_png16(path, d, 5000.0);
  const Image<double> back = csf::read_depth_png16(path, 5000.0);
  REQUIRE(back.width == d.width);
  REQUIRE(back.height == d.height);
  for (size_t i = 0; i < back.data.size(); ++i)
    CHECK(back.data[i] == stored.data[i]);
}

TEST_CASE("reading a corrupt png fails loudly") {
  const auto dir = fresh_dir("csf_test_badpng");
  const auto path = (dir / "bad.png").string();
  std::ofstream(path) << "this is not a png";
  CHECK_THROWS_AS(csf::read_depth_png16(path, 5000.0), std::runtime_error);
  CHECK_THROWS_AS(csf::read_depth_png16((dir / "missing.png").string(), 5000.0),
                  std::runtime_error);
}

TEST_CASE("intrinsics file round trip and validation") {
  const auto dir = fresh_dir("csf_test_intr");
  Intrinsics k;
  k.fx = 517.3;
  k.fy = 516.5;
  k.cx = 318.6;
  k.cy = 255.3;
  k.width = 640;
  k.height = 480;
  k.depth_scale = 5000.0;
  const auto path = (dir / "intrinsics.txt").string();
  csf::write_intrinsics(path, k);
  const Intrinsics r = csf::read_intrinsics(path);
  CHECK(r.fx == k.fx);
  CHECK(r.fy == k.fy);
  CHECK(r.cx == k.cx);
  CHECK(r.cy == k.cy);
  CHECK(r.width == k.width);
  CHECK(r.height == k.height);
  CHECK(r.depth_scale == k.depth_scale);

  std::ofstream(path) << "1 2 3 4 5 6\n";  // six numbers only
  CHECK_THROWS_AS(csf::read_intrinsics(path), std::runtime_error);
  std::ofstream(path) << "-1 2 3 4 5 6 7\n";
  CHECK_THROWS_AS(csf::read_intrinsics(path), std::runtime_error);
  CHECK_THROWS_AS(csf::read_intrinsics((dir / "nope.txt").string()),
                  std::runtime_error);
}

TEST_CASE("trajectory file round trip") {
  const auto dir = fresh_dir("csf_test_traj");
  auto gen = testutil::rng(107);
  std::vector<TrajectoryEntry> traj;
  for (int i = 0; i < 10; ++i) {
    csf::Vec6d xi;
    for (int j = 0; j < 6; ++j) xi[j] = testutil::uniform(gen, -1.0, 1.0);
    traj.push_back({0.25 * i + 1300000000.0, csf::exp_map<double>(xi)});
  }
  const auto path = (dir / "traj.txt").string();
  csf::write_trajectory(path, traj);
  const auto back = csf::read_trajectory(path);
  REQUIRE(back.size() == traj.size());
  for (size_t i = 0; i < traj.size(); ++i) {
    CHECK(back[i].timestamp == traj[i].timestamp);
    CHECK((back[i].pose.translation - traj[i].pose.translation).norm() == 0.0);
    CHECK((back[i].pose.rotation - traj[i].pose.rotation).norm() < 1e-12);
  }
}

TEST_CASE("sequence directory round trip") {
  const auto dir = fresh_dir("csf_test_seq");
  Intrinsics k;
  k.fx = 70.0;
  k.fy = 70.0;
  k.cx = 31.5;
  k.cy = 23.5;
  k.width = 64;
  k.height = 48;

  const csf::Scene scene = csf::default_scene();
  std::vector<Image<double>> depths;
  std::vector<TrajectoryEntry> gt;
  for (int i = 0; i < 3; ++i) {
    const Pose p = csf::orbit_pose(Vec3d(0, 0, 0.4), 2.2, 1.2, 0.4 * i);
    depths.push_back(csf::render_depth(scene, p, k));
    gt.push_back({10.0 + 0.1 * i, p});
  }
  csf::write_sequence(dir.string(), k, depths, gt);

  const csf::Sequence seq = csf::open_sequence(dir.string());
  REQUIRE(seq.frames.size() == 3);
  REQUIRE(seq.groundtruth.size() == 3);
  CHECK(seq.intrinsics.fx == k.fx);
  CHECK(seq.frames[1].timestamp == 10.1);
  const Image<double> d1 = seq.load_depth(1);
  const Image<double> want = csf::quantize_depth(depths[1], k.depth_scale);
  REQUIRE(d1.width == want.width);
  for (size_t i = 0; i < d1.data.size(); ++i) CHECK(d1.data[i] == want.data[i]);
  CHECK((seq.groundtruth[2].pose.translation - gt[2].pose.translation).norm() == 0.0);

  CHECK_THROWS_AS(csf::open_sequence((dir / "nothere").string()),
                  std::runtime_error);
}

}  // TEST_SUITE
