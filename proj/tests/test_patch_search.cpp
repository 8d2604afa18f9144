#include "doctest.h"

#include <random>
#include <set>

#include "mcwnnm/image.hpp"
#include "mcwnnm/patch_search.hpp"
#include "support.hpp"

using namespace mcwnnm;

TEST_CASE("block_match on a constant image keeps raster order") {
  const ImagePlanes img(20, 20, 50.0);
  const int p = 4, M = 10, window = 6;
  const Origin ref{8, 8};
  const PatchGroup g = block_match(img, ref, p, M, window);
  REQUIRE(g.size() == M);
  CHECK(g.origins[0] == ref);
  for (double d : g.distances) CHECK(d == 0.0);

  const SearchWindow w = search_window(17, 17, ref, window, M);
  std::vector<Origin> expected{ref};
  for (int r = w.row_begin; r < w.row_end && static_cast<int>(expected.size()) < M; ++r)
    for (int c = w.col_begin; c < w.col_end && static_cast<int>(expected.size()) < M; ++c)
      if (Origin{r, c} != ref) expected.push_back({r, c});
  CHECK(g.origins == expected);
}

TEST_CASE("block_match puts an exact duplicate right after the reference") {
  std::mt19937_64 rng(21);
  ImagePlanes img = testsupport::random_image(rng, 32, 32);
  const int p = 5;
  const Origin ref{4, 4}, dup{15, 17};
  for (int c = 0; c < 3; ++c)
    for (int dr = 0; dr < p; ++dr)
      for (int dc = 0; dc < p; ++dc) img.at(c, dup.row + dr, dup.col + dc) = img.at(c, ref.row + dr, ref.col + dc);
  const PatchGroup g = block_match(img, ref, p, 12, 30);
  CHECK(g.origins[0] == ref);
  CHECK(g.origins[1] == dup);
  CHECK(g.distances[1] == 0.0);
  CHECK(g.distances[2] > 0.0);
  CHECK((g.Y.col(0) - g.Y.col(1)).norm() == 0.0);
}

TEST_CASE("block_match agrees with exhaustive search") {
  std::mt19937_64 rng(22);
  const ImagePlanes img = testsupport::random_image(rng, 64, 64);
  const int p = 6, M = 70, window = 40;
  const PatchBank bank(img, p);
  for (const Origin ref : {Origin{0, 0}, Origin{29, 31}, Origin{58, 58}, Origin{10, 50}}) {
    const PatchGroup g = block_match(bank, ref, M, window);
    const SearchWindow w = search_window(bank.origin_rows(), bank.origin_cols(), ref, window, M);
    std::mt19937_64 shuf(ref.row * 100 + ref.col);
    const auto oracle = testsupport::brute_force_match(img, ref, p, M, w, &shuf);
    REQUIRE(g.size() == M);
    for (int j = 0; j < M; ++j) {
      CHECK(g.origins[j] == oracle[j].o);
      CHECK(g.distances[j] == doctest::Approx(oracle[j].d).epsilon(1e-12));
      CHECK(g.Y.col(j) == extract_patch(img, oracle[j].o.row, oracle[j].o.col, p).data);
    }
  }
}

TEST_CASE("block_match distances are non-decreasing") {
  std::mt19937_64 rng(23);
  const ImagePlanes img = testsupport::random_image(rng, 40, 40);
  const PatchGroup g = block_match(img, Origin{12, 20}, 6, 40, 20);
  for (int j = 2; j < g.size(); ++j) CHECK(g.distances[j - 1] <= g.distances[j]);
  std::set<Origin> unique(g.origins.begin(), g.origins.end());
  CHECK(static_cast<int>(unique.size()) == g.size());
}

TEST_CASE("per-channel bank matches on one channel only") {
  std::mt19937_64 rng(24);
  const ImagePlanes img = testsupport::random_image(rng, 24, 24);
  const PatchBank bank(img, 4, 1);
  CHECK(bank.dim() == 16);
  const PatchGroup g = block_match(bank, Origin{5, 5}, 8, 10);
  for (int j = 0; j < g.size(); ++j)
    CHECK(g.distances[j] ==
          doctest::Approx(testsupport::patch_distance(img, {5, 5}, g.origins[j], 4, 1)));
}

TEST_CASE("search_window clips and grows") {
  const SearchWindow w = search_window(59, 59, Origin{0, 0}, 40, 70);
  CHECK(w.row_begin == 0);
  CHECK(w.row_end == 20);
  CHECK(w.count() == 400);

  const SearchWindow small = search_window(10, 10, Origin{5, 5}, 2, 30);
  CHECK(small.count() >= 30);

  CHECK_THROWS_WITH(search_window(7, 7, Origin{3, 3}, 40, 70), "search window too small");
  ImagePlanes tiny(12, 12);
  CHECK_THROWS_WITH(block_match(tiny, Origin{0, 0}, 6, 70, 40), "search window too small");
}

TEST_CASE("reference origins on small images") {
  const auto o8 = assemble_reference_origins(8, 8, 6, 4);
  const std::vector<Origin> expected8{{0, 0}, {0, 2}, {2, 0}, {2, 2}};
  CHECK(o8 == expected8);

  const auto o6 = assemble_reference_origins(6, 6, 6, 4);
  REQUIRE(o6.size() == 1);
  CHECK(o6[0] == Origin{0, 0});
}

TEST_CASE("reference origins cover every pixel") {
  const int n = 128, p = 6;
  const auto origins = assemble_reference_origins(n, n, p, 4);
  std::vector<int> hits(n * n, 0);
  for (const Origin o : origins)
    for (int dr = 0; dr < p; ++dr)
      for (int dc = 0; dc < p; ++dc) ++hits[(o.row + dr) * n + o.col + dc];
  for (int h : hits) CHECK(h >= 1);
  CHECK(origins.size() == 32u * 32u);
}

TEST_CASE("aggregating clean patches returns the image") {
  std::mt19937_64 rng(25);
  const ImagePlanes img = testsupport::random_image(rng, 30, 26);
  const int p = 6;
  std::vector<DenoisedGroup> groups;
  for (const Origin ref : assemble_reference_origins(30, 26, p, 4)) {
    const PatchGroup g = block_match(img, ref, p, 16, 12);
    groups.push_back({g.Y, g.origins, p, std::nullopt});
  }
  CHECK(testsupport::max_abs_diff(aggregate(groups, 30, 26), img) <= 1e-10);
}

TEST_CASE("two overlapping patches average in the overlap") {
  const int p = 2;
  Eigen::MatrixXd X(12, 2);
  X.col(0).setConstant(10.0);
  X.col(1).setConstant(20.0);
  DenoisedGroup g{X, {Origin{0, 0}, Origin{0, 1}}, p, std::nullopt};
  Accumulator acc(3, 2);
  acc.add_group(g.X, g.origins, p);
  const ImagePlanes out = acc.finalize();
  for (int c = 0; c < 3; ++c) {
    CHECK(out.at(c, 0, 0) == 10.0);
    CHECK(out.at(c, 1, 1) == 15.0);
    CHECK(out.at(c, 0, 2) == 20.0);
  }
}

TEST_CASE("aggregation is linear for fixed origins") {
  std::mt19937_64 rng(26);
  const int p = 3, w = 9, h = 9;
  const auto origins = assemble_reference_origins(w, h, p, 2);
  std::vector<Origin> all(origins.begin(), origins.end());
  const Eigen::MatrixXd X1 = testsupport::gaussian_matrix(rng, 27, static_cast<int>(all.size()));
  const Eigen::MatrixXd X2 = testsupport::gaussian_matrix(rng, 27, static_cast<int>(all.size()));
  const DenoisedGroup g1{X1, all, p, {}}, g2{X2, all, p, {}}, g12{X1 + 2.5 * X2, all, p, {}};
  const ImagePlanes a = aggregate(std::span(&g1, 1), w, h);
  const ImagePlanes b = aggregate(std::span(&g2, 1), w, h);
  const ImagePlanes ab = aggregate(std::span(&g12, 1), w, h);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < ab.plane(c).size(); ++i)
      CHECK(ab.plane(c)[i] == doctest::Approx(a.plane(c)[i] + 2.5 * b.plane(c)[i]).epsilon(1e-12));
}

TEST_CASE("accumulator merge equals a single accumulator") {
  std::mt19937_64 rng(27);
  const ImagePlanes img = testsupport::random_image(rng, 12, 12);
  const auto origins = assemble_reference_origins(12, 12, 4, 2);
  Accumulator one(12, 12), left(12, 12), right(12, 12);
  for (std::size_t i = 0; i < origins.size(); ++i) {
    const auto v = extract_patch(img, origins[i].row, origins[i].col, 4).data;
    one.add_patch(v, origins[i], 4);
    (i % 2 ? left : right).add_patch(v, origins[i], 4);
  }
  left.merge(right);
  CHECK(testsupport::max_abs_diff(left.finalize(), one.finalize()) <= 1e-12);
}

TEST_CASE("uncovered pixels are reported") {
  Accumulator acc(4, 4);
  acc.add_patch(Eigen::VectorXd::Ones(12), Origin{0, 0}, 2);
  CHECK_THROWS_WITH(acc.finalize(), "aggregation hole");
  CHECK_THROWS_AS(acc.add_patch(Eigen::VectorXd::Ones(12), Origin{3, 3}, 2), std::out_of_range);
}
