#include "test_support.hpp"

#include "mvocc/dataset.hpp"
#include "mvocc/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

using namespace mvocc;
using testing::TempDir;
using testing::write_file;

namespace {

MultiViewDataset cohort(Index mi, Index non_mi) {
  std::vector<std::string> labels;
  std::vector<std::string> ids;
  for (Index i = 0; i < mi + non_mi; ++i) {
    labels.emplace_back(i < mi ? "MI" : "non-MI");
    ids.push_back("p" + std::to_string(i));
  }
  Rng rng(99);
  return {{{1, testing::gaussian(6, mi + non_mi, rng)}, {2, testing::gaussian(6, mi + non_mi, rng)}},
          labels,
          ids,
          "MI"};
}

// per fold, per class counts computed directly from the assignment vector
std::map<std::string, std::vector<int>> fold_counts(const MultiViewDataset& ds, const FoldPlan& plan) {
  std::map<std::string, std::vector<int>> out;
  for (const auto& c : ds.classes()) out[c] = std::vector<int>(static_cast<std::size_t>(plan.k), 0);
  for (Index i = 0; i < ds.size(); ++i)
    ++out[ds.labels()[static_cast<std::size_t>(i)]][static_cast<std::size_t>(plan.assignments[static_cast<std::size_t>(i)])];
  return out;
}

} // namespace

TEST_SUITE("prng") {
  TEST_CASE("splitmix64 matches the reference sequence") {
    // reference values of the SplitMix64 generator seeded with 0 (state advanced by the golden gamma)
    std::uint64_t state = 0;
    const std::uint64_t expected[] = {0xE220A8397B1DCDAFULL, 0x6E789E6AA1B965F4ULL, 0x06C45D188009454FULL};
    for (const auto e : expected) {
      CHECK(splitmix64(state) == e);
      state += 0x9E3779B97F4A7C15ULL;
    }
  }

  TEST_CASE("xorshift64* follows its documented recurrence") {
    Rng rng(42);
    std::uint64_t s = splitmix64(42 ^ splitmix64(0));
    for (int i = 0; i < 100; ++i) {
      s ^= s >> 12;
      s ^= s << 25;
      s ^= s >> 27;
      CHECK(rng.next() == s * 0x2545F4914F6CDD1DULL);
    }
  }

  TEST_CASE("split depends only on the parent seed") {
    Rng a(7);
    const Rng b(7);
    for (int i = 0; i < 10; ++i) (void)a.next();
    Rng sa = a.split(3);
    Rng sb = b.split(3);
    for (int i = 0; i < 20; ++i) CHECK(sa.next() == sb.next());
    Rng other = b.split(4);
    Rng again = b.split(3);
    CHECK(other.next() != again.next());
  }

  TEST_CASE("uniform stays in [0, 1) and normals have sane moments") {
    Rng rng(5);
    double sum = 0.0;
    double sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const double u = rng.uniform();
      CHECK((u >= 0.0 && u < 1.0));
      const double z = rng.normal();
      sum += z;
      sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.05);
    CHECK(std::abs(sq / n - 1.0) < 0.05);
  }

  TEST_CASE("shuffle is a permutation") {
    Rng rng(11);
    std::vector<int> v(50);
    for (int i = 0; i < 50; ++i) v[static_cast<std::size_t>(i)] = i;
    rng.shuffle(std::span<int>(v));
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
    CHECK(v != sorted);
  }
}

TEST_SUITE("dataset") {
  TEST_CASE("construction enforces the invariants") {
    Rng rng(1);
    const MatrixXd f = testing::gaussian(2, 3, rng);
    CHECK_THROWS_AS(MultiViewDataset({{1, f}}, {"a", "b"}, {"x", "y", "z"}, "a"), ShapeError);
    CHECK_THROWS_AS(MultiViewDataset({{1, f}}, {"a", "b", "a"}, {"x", "x", "z"}, "a"), ConfigError);
    CHECK_THROWS_AS(MultiViewDataset({{1, f}}, {"a", "b", "c"}, {"x", "y", "z"}, "a"), ConfigError);
    CHECK_THROWS_AS(MultiViewDataset({{1, f}}, {"a", "b", "a"}, {"x", "y", "z"}, "q"), ConfigError);
    CHECK_THROWS_AS(MultiViewDataset({{1, f}, {2, testing::gaussian(2, 2, rng)}}, {"a", "b", "a"}, {"x", "y", "z"}, "a"),
                    ShapeError);
    MatrixXd bad = f;
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS(MultiViewDataset({{1, bad}}, {"a", "b", "a"}, {"x", "y", "z"}, "a"));
    const MultiViewDataset ok({{1, f}}, {"a", "b", "a"}, {"x", "y", "z"}, "a");
    CHECK(ok.size() == 3);
    CHECK(ok.target_count() == 2);
    CHECK(ok.negative_class() == std::optional<std::string>("b"));
  }

  TEST_CASE("loading two aligned files") {
    TempDir dir("load");
    // second file lists the subjects in a different order and omits the label column
    write_file(dir / "a.csv", "subject_id,label,x1,x2\ns1,MI,1,2\ns2,non-MI,3,4\ns3,MI,5,6\n");
    write_file(dir / "b.csv", "subject_id,y1\ns3,30\ns1,10\ns2,20\n");
    const std::vector<std::filesystem::path> paths{dir / "a.csv", dir / "b.csv"};
    const auto ds = load_multiview_csv(paths, "MI");
    CHECK(ds.view_count() == 2);
    CHECK(ds.size() == 3);
    CHECK(ds.view(0).feature_dim() == 2);
    CHECK(ds.view(1).feature_dim() == 1);
    CHECK(ds.subject_ids() == std::vector<std::string>{"s1", "s2", "s3"});
    CHECK(ds.view(1).features(0, 0) == 10.0);
    CHECK(ds.view(1).features(0, 2) == 30.0);
    CHECK(ds.view(0).features(1, 1) == 4.0);
    CHECK(ds.target_count() == 2);
  }

  TEST_CASE("a single row with a single feature is a valid dataset") {
    TempDir dir("single");
    write_file(dir / "a.csv", "subject_id,label,x\nonly,MI,0.5\n");
    const std::vector<std::filesystem::path> paths{dir / "a.csv"};
    const auto ds = load_multiview_csv(paths, "MI");
    CHECK(ds.view_count() == 1);
    CHECK(ds.size() == 1);
    CHECK(ds.view(0).feature_dim() == 1);
  }

  TEST_CASE("130 subjects over two six-feature files") {
    TempDir dir("mi_counts");
    const auto src = cohort(88, 42);
    const std::vector<std::filesystem::path> paths{dir / "a4c.csv", dir / "a2c.csv"};
    write_multiview_csv(src, paths);
    const auto ds = load_multiview_csv(paths, "MI");
    CHECK(ds.view_count() == 2);
    CHECK(ds.size() == 130);
    CHECK(ds.view(0).feature_dim() == 6);
    CHECK(ds.view(1).feature_dim() == 6);
    CHECK(ds.target_count() == 88);
    // %.17g round-trips doubles exactly
    CHECK(ds.view(1).features == src.view(1).features);
  }

  TEST_CASE("load errors") {
    TempDir dir("errors");
    write_file(dir / "a.csv", "subject_id,label,x\ns1,MI,1\ns2,non-MI,2\n");
    write_file(dir / "disjoint.csv", "subject_id,y\nt1,1\nt2,2\n");
    write_file(dir / "bad.csv", "subject_id,label,x\ns1,MI,1\ns2,non-MI,abc\n");
    write_file(dir / "empty.csv", "");

    SUBCASE("disjoint subjects name the missing ids") {
      const std::vector<std::filesystem::path> paths{dir / "a.csv", dir / "disjoint.csv"};
      try {
        (void)load_multiview_csv(paths, "MI");
        FAIL("expected an alignment error");
      } catch (const AlignmentError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("s1") != std::string::npos);
        CHECK(msg.find("t1") != std::string::npos);
      }
    }
    SUBCASE("non-numeric cell reports row and column") {
      const std::vector<std::filesystem::path> paths{dir / "bad.csv"};
      try {
        (void)load_multiview_csv(paths, "MI");
        FAIL("expected a parse error");
      } catch (const ParseError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 2") != std::string::npos);
        CHECK(msg.find("'x'") != std::string::npos);
      }
    }
    SUBCASE("unknown target") {
      const std::vector<std::filesystem::path> paths{dir / "a.csv"};
      CHECK_THROWS_AS((void)load_multiview_csv(paths, "healthy"), ConfigError);
    }
    SUBCASE("empty file") {
      const std::vector<std::filesystem::path> paths{dir / "empty.csv"};
      CHECK_THROWS_AS((void)load_multiview_csv(paths, "MI"), ParseError);
    }
    SUBCASE("missing file") {
      const std::vector<std::filesystem::path> paths{dir / "nope.csv"};
      CHECK_THROWS_AS((void)load_multiview_csv(paths, "MI"), ConfigError);
    }
  }

  TEST_CASE("concatenation stacks blocks in modality order") {
    MatrixXd f1(2, 1);
    f1 << 1, 2;
    MatrixXd f2(1, 1);
    f2 << 3;
    const MultiViewDataset ds({{1, f1}, {2, f2}}, {"a"}, {"s"}, "a");
    const auto cat = concatenate_views(ds);
    REQUIRE(cat.view_count() == 1);
    CHECK(cat.view(0).features.col(0) == Eigen::Vector3d(1, 2, 3));

    const auto big = cohort(10, 5);
    const auto joined = concatenate_views(big);
    CHECK(joined.view(0).feature_dim() == 12);
    CHECK(joined.view(0).features.topRows(6) == big.view(0).features);
    CHECK(joined.view(0).features.bottomRows(6) == big.view(1).features);
    CHECK(joined.labels() == big.labels());

    const auto single = testing::labeled(4, 3);
    CHECK(concatenate_views(single).view(0).features == single.view(0).features);
  }
}

TEST_SUITE("folds") {
  TEST_CASE("88/42 over five folds") {
    const auto ds = cohort(88, 42);
    for (std::uint64_t seed : {0ULL, 1ULL, 2024ULL}) {
      const auto plan = stratified_folds(ds, 5, seed);
      const auto counts = fold_counts(ds, plan);
      CHECK(counts.at("MI") == std::vector<int>{18, 18, 18, 17, 17});
      CHECK(counts.at("non-MI") == std::vector<int>{8, 8, 8, 9, 9});
      for (int f = 0; f < 5; ++f) CHECK(plan.members(f).size() == 26);
      CHECK(plan.seed == seed);
    }
  }

  TEST_CASE("k=2 with four per class splits two and two") {
    const auto ds = testing::labeled(4, 4);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto counts = fold_counts(ds, stratified_folds(ds, 2, seed));
      CHECK(counts.at("P") == std::vector<int>{2, 2});
      CHECK(counts.at("N") == std::vector<int>{2, 2});
    }
  }

  TEST_CASE("per-class counts differ by at most one") {
    for (Index pos : {5, 7, 13, 31}) {
      for (Index neg : {5, 6, 11}) {
        const auto ds = testing::labeled(pos, neg);
        for (int k : {2, 3, 5}) {
          const auto counts = fold_counts(ds, stratified_folds(ds, k, 17));
          for (const auto& [cls, c] : counts) {
            const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
            CHECK(*hi - *lo <= 1);
          }
        }
      }
    }
  }

  TEST_CASE("plans are pure functions of the seed") {
    const auto ds = cohort(20, 12);
    CHECK(stratified_folds(ds, 4, 9).assignments == stratified_folds(ds, 4, 9).assignments);
    CHECK(stratified_folds(ds, 4, 9).assignments != stratified_folds(ds, 4, 10).assignments);
  }

  TEST_CASE("test folds partition the dataset") {
    const auto ds = cohort(23, 9);
    const auto plan = stratified_folds(ds, 3, 4);
    std::set<Index> seen;
    Index total = 0;
    for (int f = 0; f < 3; ++f) {
      for (const Index i : plan.members(f)) {
        CHECK(seen.insert(i).second);
        ++total;
      }
    }
    CHECK(total == ds.size());
  }

  TEST_CASE("stratification errors") {
    CHECK_THROWS_AS((void)stratified_folds(testing::labeled(10, 0), 5, 0), StratificationError);
    CHECK_THROWS_AS((void)stratified_folds(testing::labeled(10, 3), 5, 0), StratificationError);
    CHECK_THROWS_AS((void)stratified_folds(testing::labeled(10, 10), 1, 0), StratificationError);
  }

  TEST_CASE("target-only training splits") {
    const auto ds = cohort(88, 42);
    const auto plan = stratified_folds(ds, 5, 3);
    for (const std::string target : {"MI", "non-MI"}) {
      const auto retargeted = ds.with_target(target);
      for (int f = 0; f < 5; ++f) {
        const auto [train, test] = split_target_only(retargeted, plan, f);
        for (Index i = 0; i < train.size(); ++i) CHECK(train.is_target(i));
        CHECK(test.size() == 26);
        CHECK(train.classes() == ds.classes());
        const Index expected = target == "MI" ? (f < 3 ? 70 : 71) : (f < 3 ? 34 : 33);
        CHECK(train.size() == expected);
      }
    }
    CHECK_THROWS_AS((void)split_target_only(ds, plan, 5), SplitError);
  }

  TEST_CASE("all-target data trains on four fifths") {
    const auto one_class = testing::labeled(10, 0);
    FoldPlan plan{5, {0, 1, 2, 3, 4, 0, 1, 2, 3, 4}, 0};
    const auto [train, test] = split_target_only(one_class, plan, 2);
    CHECK(train.size() == 8);
    CHECK(test.size() == 2);
    CHECK(test.target_count() == 2);
  }
}

TEST_SUITE("standardizer") {
  TEST_CASE("zero mean, unit variance on the fitted data; constant features untouched in scale") {
    Rng rng(3);
    MatrixXd f = testing::gaussian(3, 40, rng, 5.0);
    f.row(2).setConstant(7.0);
    const MultiViewDataset ds({{1, f}}, std::vector<std::string>(40, "a"), [] {
      std::vector<std::string> ids;
      for (int i = 0; i < 40; ++i) ids.push_back(std::to_string(i));
      return ids;
    }(), "a");
    const auto s = Standardizer::fit(ds);
    const MatrixXd g = s.apply(ds).view(0).features;
    for (Index r = 0; r < 2; ++r) {
      CHECK(std::abs(g.row(r).mean()) < 1e-12);
      const double var = (g.row(r).array() - g.row(r).mean()).square().mean();
      CHECK(std::abs(var - 1.0) < 1e-10);
    }
    CHECK(g.row(2).cwiseAbs().maxCoeff() == 0.0);
  }
}
