#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hvr/location.hpp"
#include "hvr/rng.hpp"

using namespace hvr;

namespace {

// Direct evaluation of the truncated-Gaussian prior: average of key-frame
// one-hots convolved with the full 3D kernel (cube truncation), normalized
// once over the grid. Deliberately not separable.
LocationDistribution prior_brute(const CameraTrack& track,
                                 const GridSpec& grid, double sigma) {
  const std::size_t W = static_cast<std::size_t>(grid.nx);
  const std::size_t D = static_cast<std::size_t>(grid.ny);
  const std::size_t H = static_cast<std::size_t>(grid.nz);
  LocationDistribution base{W, D, H, std::vector<double>(W * D * H, 0.0)};
  std::size_t used = 0;
  for (const KeyFrame& k : track.key_frames) {
    auto cell = grid.parent_cell(k.position);
    if (!cell) continue;
    base.probs[base.index((*cell)[0], (*cell)[1], (*cell)[2])] += 1.0;
    ++used;
  }
  if (used == 0) return LocationDistribution::uniform(W, D, H);
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  LocationDistribution out{W, D, H, std::vector<double>(W * D * H, 0.0)};
  for (int x = 0; x < grid.nx; ++x)
    for (int y = 0; y < grid.ny; ++y)
      for (int z = 0; z < grid.nz; ++z) {
        double acc = 0.0;
        for (int dx = -radius; dx <= radius; ++dx)
          for (int dy = -radius; dy <= radius; ++dy)
            for (int dz = -radius; dz <= radius; ++dz) {
              const int sx = x - dx, sy = y - dy, sz = z - dz;
              if (sx < 0 || sy < 0 || sz < 0 || sx >= grid.nx ||
                  sy >= grid.ny || sz >= grid.nz)
                continue;
              const double w = std::exp(
                  -0.5 * (static_cast<double>(dx) * dx + dy * dy + dz * dz) /
                  (sigma * sigma));
              acc += w * base.probs[base.index(sx, sy, sz)] /
                     static_cast<double>(used);
            }
        out.probs[out.index(x, y, z)] = acc;
      }
  double total = 0.0;
  for (double v : out.probs) total += v;
  for (double& v : out.probs) v /= total;
  return out;
}

CameraTrack track_at(std::initializer_list<Vec3> positions) {
  CameraTrack t;
  long frame = 0;
  for (const Vec3& p : positions) t.key_frames.push_back({frame++, p});
  return t;
}

}  // namespace

TEST_SUITE_BEGIN("location_prior");

TEST_CASE("empty track falls back to uniform") {
  GridSpec grid{{0, 0, 0}, {2.0, 2.0, 2.0}, 2, 2, 2, 1};
  LocationDistribution prior = make_prior({}, grid, 1.0);
  for (double v : prior.probs) CHECK(v == doctest::Approx(0.125));
  prior.validate();
}

TEST_CASE("sigma -> 0 gives a one-hot on the containing voxel") {
  GridSpec grid{{0, 0, 0}, {5.0, 5.0, 5.0}, 5, 5, 5, 1};
  LocationDistribution prior =
      make_prior(track_at({{2.5, 2.5, 2.5}}), grid, 1e-6);
  const std::size_t hot = prior.index(2, 2, 2);
  for (std::size_t i = 0; i < prior.probs.size(); ++i)
    CHECK(std::abs(prior.probs[i] - (i == hot ? 1.0 : 0.0)) < 1e-9);
}

TEST_CASE("gaussian prior matches the direct kernel-sum oracle") {
  GridSpec grid{{0, 0, 0}, {5.0, 5.0, 5.0}, 5, 5, 5, 1};
  CameraTrack track = track_at({{2.5, 2.5, 2.5}});
  LocationDistribution got = make_prior(track, grid, 1.0);
  LocationDistribution want = prior_brute(track, grid, 1.0);
  REQUIRE(got.probs.size() == want.probs.size());
  for (std::size_t i = 0; i < got.probs.size(); ++i)
    CHECK(got.probs[i] == doctest::Approx(want.probs[i]).epsilon(1e-12));

  // multiple key frames, off-center, boundary truncation in play
  GridSpec grid2{{-1.0, -1.0, 0.0}, {6.0, 4.0, 3.0}, 6, 4, 3, 2};
  CameraTrack track2 =
      track_at({{-0.5, -0.5, 0.3}, {4.2, 2.1, 2.5}, {0.1, 0.2, 1.4}});
  LocationDistribution got2 = make_prior(track2, grid2, 0.8);
  LocationDistribution want2 = prior_brute(track2, grid2, 0.8);
  for (std::size_t i = 0; i < got2.probs.size(); ++i)
    CHECK(got2.probs[i] == doctest::Approx(want2.probs[i]).epsilon(1e-12));
  got2.validate();
}

TEST_CASE("key frames outside the grid are skipped; all skipped -> uniform") {
  GridSpec grid{{0, 0, 0}, {2.0, 2.0, 2.0}, 2, 2, 2, 1};
  std::size_t skipped = 0;
  bool fallback = false;
  LocationDistribution prior = make_prior(
      track_at({{0.5, 0.5, 0.5}, {9.0, 9.0, 9.0}}), grid, 1.0, &skipped,
      &fallback);
  CHECK(skipped == 1);
  CHECK(!fallback);
  prior.validate();

  prior = make_prior(track_at({{9, 9, 9}, {-3, 0, 0}}), grid, 1.0, &skipped,
                     &fallback);
  CHECK(skipped == 2);
  CHECK(fallback);
  for (double v : prior.probs) CHECK(v == doctest::Approx(0.125));
}

TEST_CASE("smoothing keeps the argmax on the key-frame voxel when interior") {
  GridSpec grid{{0, 0, 0}, {9.0, 9.0, 9.0}, 9, 9, 9, 1};
  const double sigma = 1.0;  // radius 3; cell (4,4,4) is 3+ from every face
  LocationDistribution prior =
      make_prior(track_at({{4.5, 4.5, 4.5}}), grid, sigma);
  CHECK(prior.argmax() == prior.index(4, 4, 4));
}

TEST_CASE("make_prior output is always a valid distribution") {
  Rng rng(41);
  GridSpec grid{{0, 0, 0}, {4.0, 4.0, 2.0}, 4, 4, 2, 1};
  for (int rep = 0; rep < 100; ++rep) {
    CameraTrack track;
    const int n = static_cast<int>(rng.uniform_index(4));  // 0..3 key frames
    for (int i = 0; i < n; ++i)
      track.key_frames.push_back(
          {i, {rng.uniform(-2.0, 6.0), rng.uniform(-2.0, 6.0),
               rng.uniform(-1.0, 3.0)}});
    LocationDistribution prior =
        make_prior(track, grid, rng.uniform(0.3, 2.0));
    prior.validate();
  }
}

TEST_CASE("downsample_distribution pools mass exactly") {
  LocationDistribution uniform = LocationDistribution::uniform(4, 4, 2);
  LocationDistribution one = downsample_distribution(uniform, 4, 4, 2);
  CHECK(one.cells() == 1);
  CHECK(one.probs[0] == doctest::Approx(1.0).epsilon(1e-12));

  LocationDistribution big = LocationDistribution::uniform(28, 28, 8);
  LocationDistribution small = downsample_distribution(big, 4, 4, 2);
  CHECK(small.w == 7);
  CHECK(small.d == 7);
  CHECK(small.h == 4);

  Rng rng(42);
  LocationDistribution random{6, 4, 2, std::vector<double>(48)};
  double total = 0.0;
  for (double& v : random.probs) total += (v = rng.uniform(0.0, 1.0));
  for (double& v : random.probs) v /= total;
  LocationDistribution pooled = downsample_distribution(random, 3, 2, 2);
  CHECK(std::abs(pooled.sum() - 1.0) < 1e-9);
  // block (0,0,0) mass equals the sum of its source cells
  double block = 0.0;
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t y = 0; y < 2; ++y)
      for (std::size_t z = 0; z < 2; ++z)
        block += random.probs[random.index(x, y, z)];
  CHECK(pooled.probs[0] == doctest::Approx(block).epsilon(1e-12));

  CHECK_THROWS(downsample_distribution(random, 5, 2, 2));
}

TEST_CASE("track parse/write round trip and validation") {
  std::istringstream in("track\n# comment\nk 0 1.5 2.5 0.5\nk 8 1.75 2.5 0.5\n");
  CameraTrack track = parse_track(in);
  REQUIRE(track.key_frames.size() == 2);
  CHECK(track.key_frames[1].frame == 8);

  std::stringstream buf;
  write_track(buf, track);
  CameraTrack back = parse_track(buf);
  CHECK(back.key_frames.size() == 2);
  CHECK(back.key_frames[0].position.x == track.key_frames[0].position.x);

  std::istringstream bad("track\nk 5 0 0 0\nk 5 1 1 1\n");
  CHECK_THROWS(parse_track(bad));

  std::istringstream noheader("k 0 1 2 3\n");
  CHECK_THROWS(parse_track(noheader));
}

TEST_CASE("LOCD round trip") {
  Rng rng(43);
  LocationDistribution d{3, 2, 2, std::vector<double>(12)};
  double total = 0.0;
  for (double& v : d.probs) total += (v = rng.uniform(0.0, 1.0));
  for (double& v : d.probs) v /= total;

  std::stringstream buf;
  write_locd(buf, d);
  LocationDistribution back = read_locd(buf);
  CHECK(back.w == 3);
  CHECK(back.d == 2);
  CHECK(back.h == 2);
  CHECK(back.probs == d.probs);

  std::istringstream bad("NOPE");
  CHECK_THROWS(read_locd(bad));
}

TEST_SUITE_END();
