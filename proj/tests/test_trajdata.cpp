// Copyright 2026 The IntDiff Authors
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

#include "intdiff/errors.hpp"
#include "intdiff/intention.hpp"
#include "intdiff/rng.hpp"
#include "intdiff/trajdata.hpp"

#include "doctest.h"

#include <cmath>
#include <cstring>
#include <sstream>
#include <string>

using namespace intdiff;

namespace
{

std::string straight_track(std::int64_t ped, int frames, std::int64_t first = 0,
                           std::int64_t step = 10)
{
  std::ostringstream os;
  for (int i = 0; i < frames; ++i) {
    os << first + i * step << ' ' << ped << ' ' << 0.4 * i << ' ' << 1.0 << '\n';
  }
  return os.str();
}

TrajectoryWindow random_window(Rng & rng, double spread)
{
  TrajectoryWindow w;
  for (Eigen::Index i = 0; i < w.obs.size(); ++i) {
    w.obs.data()[i] = spread * (2.0 * rng.uniform() - 1.0);
  }
  for (Eigen::Index i = 0; i < w.fut.size(); ++i) {
    w.fut.data()[i] = spread * (2.0 * rng.uniform() - 1.0);
  }
  return w;
}

bool bitwise_equal(const Mat & a, const Mat & b)
{
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) ==
           0;
}

}  // namespace

TEST_CASE("parse_scene_file: minimal input")
{
  const auto scene = parse_scene_file(std::string_view("0 1 2.0 3.0\n10 1 2.4 3.0"));
  REQUIRE(scene.pedestrians.size() == 1);
  const auto & recs = scene.pedestrians.at(1);
  REQUIRE(recs.size() == 2);
  CHECK(recs[1].frame_id == 10);
  CHECK(recs[1].x == 2.4);
  CHECK(scene.frame_increment == 10);
}

TEST_CASE("parse_scene_file: empty input gives an empty scene")
{
  const auto scene = parse_scene_file(std::string_view(""));
  CHECK(scene.pedestrians.empty());
  CHECK(scene.record_count() == 0);
}

TEST_CASE("parse_scene_file: malformed lines report their line number")
{
  try {
    parse_scene_file(std::string_view("0 1 abc 3.0"));
    FAIL("expected a parse error");
  } catch (const ParseError & e) {
    CHECK(e.line() == 1);
  }
  try {
    parse_scene_file(std::string_view("# header\n0 1 2.0 3.0\n10 1 2.0\n"));
    FAIL("expected a parse error");
  } catch (const ParseError & e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_scene_file(std::string_view("0.5 1 2 3")), ParseError);
  CHECK_THROWS_AS(parse_scene_file(std::string_view("-10 1 2 3")), ParseError);
  CHECK_THROWS_AS(parse_scene_file(std::string_view("0 1 nan 3")), ParseError);
}

TEST_CASE("parse_scene_file: duplicates are rejected")
{
  CHECK_THROWS_AS(
    parse_scene_file(std::string_view("0 1 2.0 3.0\n0 1 2.5 3.0\n")), ValidationError);
}

TEST_CASE("parse_scene_file: comments, CRLF, float ids, unsorted frames")
{
  const std::string text =
    "# frame ped x y\r\n20.0\t2.0\t1.0\t1.0\r\n\r\n0.0\t2.0\t0.0\t0.0\r\n10.0\t2.0\t0.5\t0.5\r\n"
    "10 3 7 7 extra\n";
  const auto scene = parse_scene_file(std::string_view(text));
  REQUIRE(scene.pedestrians.size() == 2);
  const auto & recs = scene.pedestrians.at(2);
  REQUIRE(recs.size() == 3);
  CHECK(recs[0].frame_id == 0);
  CHECK(recs[1].frame_id == 10);
  CHECK(recs[2].frame_id == 20);
  CHECK(scene.record_count() == 4);
}

TEST_CASE("parse_scene_file never drops a record")
{
  Rng rng(11);
  std::ostringstream os;
  std::size_t expected = 0;
  for (int ped = 0; ped < 20; ++ped) {
    const int n = static_cast<int>(rng.uniform_int(30));
    for (int f = 0; f < n; ++f) {
      os << f * 6 << ' ' << ped << ' ' << rng.uniform() << ' ' << rng.uniform() << '\n';
      ++expected;
    }
  }
  CHECK(parse_scene_file(std::string_view(os.str())).record_count() == expected);
}

TEST_CASE("build_windows: window counts")
{
  CHECK(build_windows(parse_scene_file(std::string_view(straight_track(1, 20)))).size() == 1);
  CHECK(build_windows(parse_scene_file(std::string_view(straight_track(1, 21)))).size() == 2);
  CHECK(build_windows(parse_scene_file(std::string_view(straight_track(1, 19)))).empty());

  // Brute-force count: every offset whose 20 frames are all present and consecutive.
  for (int frames : {20, 21, 25, 33, 40}) {
    for (int stride : {1, 2, 3, 7}) {
      std::size_t expected = 0;
      for (int off = 0; off + 20 <= frames; off += stride) {
        ++expected;
      }
      const auto scene = parse_scene_file(std::string_view(straight_track(4, frames)));
      CHECK(build_windows(scene, 8, 12, stride).size() == expected);
    }
  }
}

TEST_CASE("build_windows: gaps split runs, windows come from consecutive frames")
{
  // 15 frames, a gap, then 22 frames: only the second run yields windows.
  std::string text = straight_track(5, 15, 0, 10) + straight_track(5, 22, 200, 10);
  const auto scene = parse_scene_file(std::string_view(text));
  const auto windows = build_windows(scene);
  REQUIRE(windows.size() == 3);
  const auto & recs = scene.pedestrians.at(5);
  for (std::size_t w = 0; w < windows.size(); ++w) {
    const auto & win = windows[w];
    CHECK(win.obs.rows() == 8);
    CHECK(win.fut.rows() == 12);
    CHECK(win.ped_id == 5);
    CHECK(win.origin.isZero());
    for (int j = 0; j < 20; ++j) {
      const auto & rec = recs[15 + w + static_cast<std::size_t>(j)];
      const double x = j < 8 ? win.obs(j, 0) : win.fut(j - 8, 0);
      CHECK(x == rec.x);
    }
  }
  CHECK_THROWS_AS(build_windows(scene, 8, 12, 0), ValidationError);
}

TEST_CASE("normalize: definition and identity case")
{
  TrajectoryWindow w;
  for (int i = 0; i < 8; ++i) {
    w.obs.row(i) << 5.0 - (7 - i) * 0.4, 7.0;
  }
  for (int i = 0; i < 12; ++i) {
    w.fut.row(i) << 5.0 + (i + 1) * 0.4, 7.0;
  }
  const auto n = normalize(w);
  CHECK(n.obs.row(7).isZero());
  CHECK(n.origin == Point2(5.0, 7.0));

  const auto again = normalize(n);
  CHECK(bitwise_equal(again.obs, n.obs));
  CHECK(bitwise_equal(again.fut, n.fut));
  CHECK(again.origin == n.origin);
}

TEST_CASE("normalize/denormalize round trip")
{
  Rng rng(3);
  SUBCASE("bitwise on coordinates with an exact common grid")
  {
    // Coordinates quantized to 2^-16 m within +-512 m: every difference is exact.
    for (int trial = 0; trial < 500; ++trial) {
      TrajectoryWindow w = random_window(rng, 512.0);
      w.obs = (w.obs * 65536.0).array().round().matrix() / 65536.0;
      w.fut = (w.fut * 65536.0).array().round().matrix() / 65536.0;
      const auto back = denormalize(normalize(w));
      CHECK(bitwise_equal(back.obs, w.obs));
      CHECK(bitwise_equal(back.fut, w.fut));
      CHECK(back.origin.isZero());

      const auto n = normalize(w);
      const auto n2 = normalize(denormalize(n));
      CHECK(bitwise_equal(n2.obs, n.obs));
      CHECK(bitwise_equal(n2.fut, n.fut));
    }
  }
  SUBCASE("within rounding on arbitrary reals")
  {
    for (int trial = 0; trial < 500; ++trial) {
      const TrajectoryWindow w = random_window(rng, 30.0);
      const auto back = denormalize(normalize(w));
      CHECK((back.obs - w.obs).cwiseAbs().maxCoeff() <= 1e-13);
      CHECK((back.fut - w.fut).cwiseAbs().maxCoeff() <= 1e-13);
    }
  }
}

TEST_CASE("generate_synthetic: determinism and layout")
{
  SyntheticSpec spec;
  spec.count = 10;
  spec.seed = 7;
  spec.noise_std = 0.05;
  const auto a = generate_synthetic(spec);
  const auto b = generate_synthetic(spec);
  REQUIRE(a.size() == 10);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(bitwise_equal(a[i].obs, b[i].obs));
    CHECK(bitwise_equal(a[i].fut, b[i].fut));
    CHECK(a[i].origin == b[i].origin);
    CHECK(a[i].obs.row(7).isZero());
    CHECK_NOTHROW(validate_window(a[i]));
  }
  spec.seed = 8;
  CHECK(!bitwise_equal(generate_synthetic(spec)[0].obs, a[0].obs));
}

TEST_CASE("generate_synthetic: straight-only futures are collinear with the history")
{
  SyntheticSpec spec;
  spec.count = 50;
  spec.turn_probabilities = {0.0, 1.0, 0.0};
  spec.noise_std = 0.0;
  for (const auto & w : generate_synthetic(spec)) {
    const Point2 heading = (w.obs.row(7) - w.obs.row(0)).transpose().normalized();
    for (int t = 0; t < 12; ++t) {
      const Point2 p = w.fut.row(t).transpose();
      CHECK(std::abs(heading.x() * p.y() - heading.y() * p.x()) < 1e-9);
      CHECK(heading.dot(p) > 0.0);
    }
  }
}

TEST_CASE("generate_synthetic: left-only futures are all labeled Lt")
{
  for (double speed : {1.0, 1.5}) {
    for (double rate : {0.15, 0.25}) {
      SyntheticSpec spec;
      spec.count = 200;
      spec.turn_probabilities = {1.0, 0.0, 0.0};
      spec.noise_std = 0.0;
      spec.speed = speed;
      spec.turn_rate = rate;
      for (const auto & w : generate_synthetic(spec)) {
        CHECK(label_window(w).label.lateral == Lateral::Lt);
      }
    }
  }
}

TEST_CASE("generate_synthetic: invalid specs")
{
  SyntheticSpec spec;
  spec.turn_probabilities = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(generate_synthetic(spec), ValidationError);
  spec = {};
  spec.count = 0;
  CHECK_THROWS_AS(generate_synthetic(spec), ValidationError);
  spec = {};
  spec.noise_std = -1.0;
  CHECK_THROWS_AS(generate_synthetic(spec), ValidationError);
}

TEST_CASE("windows JSON Lines are lossless")
{
  SyntheticSpec spec;
  spec.count = 25;
  spec.noise_std = 0.1;
  const auto windows = generate_synthetic(spec);
  std::stringstream ss;
  write_windows_jsonl(ss, windows);
  const auto back = read_windows_jsonl(ss);
  REQUIRE(back.size() == windows.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(bitwise_equal(back[i].obs, windows[i].obs));
    CHECK(bitwise_equal(back[i].fut, windows[i].fut));
    CHECK(back[i].origin == windows[i].origin);
    CHECK(back[i].ped_id == windows[i].ped_id);
  }

  std::stringstream bad("{\"obs\": [[0,0]], \"fut\": []}\n");
  CHECK_THROWS_AS(read_windows_jsonl(bad), ParseError);
}
