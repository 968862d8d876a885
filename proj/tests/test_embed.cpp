#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <tuple>

#include "descfm/embed.hpp"
#include "descfm/errors.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace descfm;

namespace {

using AtomTuple = std::tuple<int, int, int, int, bool, bool>;

AtomTuple atom_tuple(const Molecule& m, int i) {
  const Atom& a = m.atom(i);
  return {a.atomic_number, m.heavy_degree(i), a.formal_charge, m.hydrogen_count(i), a.aromatic, m.atom_in_ring(i)};
}

// Distinct radius-0 and radius-1 environments by explicit tuple enumeration.
std::pair<std::size_t, std::size_t> distinct_environments(const Molecule& m) {
  std::set<AtomTuple> r0;
  std::set<std::pair<AtomTuple, std::multiset<std::pair<int, AtomTuple>>>> r1;
  for (int i = 0; i < m.num_atoms(); ++i) {
    if (m.atom(i).is_hydrogen()) continue;
    r0.insert(atom_tuple(m, i));
    std::multiset<std::pair<int, AtomTuple>> env;
    for (const Neighbor& nb : m.neighbors(i))
      if (!m.atom(nb.atom).is_hydrogen()) env.insert({static_cast<int>(m.bond(nb.bond).order), atom_tuple(m, nb.atom)});
    r1.insert({atom_tuple(m, i), env});
  }
  return {r0.size(), r1.size()};
}

std::size_t nonzero(const std::vector<std::uint32_t>& fp) {
  std::size_t n = 0;
  for (auto c : fp) n += c != 0;
  return n;
}

int sgn(double v) { return (v > 0) - (v < 0); }

// Tau-b written as a normalized sum of sign products.
double tau_sign_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (i == j) continue;
      const int a = sgn(x[i] - x[j]), b = sgn(y[i] - y[j]);
      s += a * b;
      sx += a * a;
      sy += b * b;
    }
  return s / std::sqrt(sx * sy);
}

Tensor two_clusters(std::size_t per, double gap, std::uint64_t seed, std::vector<int>* labels) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Tensor x(2 * per, 10, 0.0);
  for (std::size_t i = 0; i < 2 * per; ++i) {
    const bool second = i >= per;
    for (std::size_t c = 0; c < 10; ++c) x(i, c) = z(rng) + (second && c == 0 ? gap : 0.0);
    if (labels) labels->push_back(second ? 1 : 0);
  }
  return x;
}

}  // namespace

TEST_CASE("morgan radius 0 on ethanol has three environments") {
  const auto fp = morgan_fingerprint(parse_smiles("CCO"), 0);
  CHECK(fp.size() == 2048);
  CHECK(nonzero(fp) == 3);
  CHECK(morgan_fingerprint(parse_smiles("CCO")) == morgan_fingerprint(parse_smiles("OCC")));
  CHECK(morgan_fingerprint(parse_smiles("CCO")) != morgan_fingerprint(parse_smiles("CCN")));
}

TEST_CASE("morgan identifiers match environment enumeration on the corpus") {
  const auto smiles = oracle::corpus_smiles();
  for (std::size_t k = 0; k < 300; ++k) {
    const Molecule m = parse_smiles(smiles[k]);
    const auto ids = morgan_identifiers(m, 1);
    const auto [n0, n1] = distinct_environments(m);
    CAPTURE(smiles[k]);
    CHECK(std::set<std::uint64_t>(ids[0].begin(), ids[0].end()).size() == n0);
    CHECK(std::set<std::uint64_t>(ids[1].begin(), ids[1].end()).size() == n1);
    const auto fp = morgan_fingerprint(m, 2);
    std::size_t total = 0;
    for (auto c : fp) total += c;
    CHECK(total == 3 * ids[0].size());
  }
}

TEST_CASE("explicit hydrogen atoms do not change the fingerprint") {
  CHECK(morgan_fingerprint(parse_smiles("[H]C([H])([H])O")) == morgan_fingerprint(parse_smiles("CO")));
}

TEST_CASE("morgan fingerprints are invariant under atom reindexing") {
  const auto smiles = oracle::corpus_smiles();
  std::mt19937_64 rng(17);
  for (std::size_t k = 0; k < 200; ++k) {
    const Molecule m = parse_smiles(smiles[k * 5]);
    const auto ref = morgan_fingerprint(m);
    for (int p = 0; p < 5; ++p) {
      const auto perm = oracle::random_permutation(m.num_atoms(), rng);
      CHECK(morgan_fingerprint(canonical_reindex(m, perm)) == ref);
    }
  }
}

TEST_CASE("kendall tau-b") {
  const std::vector<double> a{1, 2, 3, 4, 5}, rev{5, 4, 3, 2, 1};
  CHECK(*kendall_tau_b(a, a) == 1.0);
  CHECK(*kendall_tau_b(a, rev) == -1.0);
  CHECK_FALSE(kendall_tau_b(a, std::vector<double>{2, 2, 2, 2, 2}).has_value());
  std::mt19937_64 rng(4);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 2 + rng() % 9;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng() % 4);
      y[i] = static_cast<double>(rng() % 4);
    }
    const auto tau = kendall_tau_b(x, y);
    const double oracle = tau_sign_oracle(x, y);
    if (std::isnan(oracle)) {
      CHECK_FALSE(tau.has_value());
    } else {
      REQUIRE(tau.has_value());
      CHECK(*tau == doctest::Approx(oracle).epsilon(1e-12));
    }
  }
}

TEST_CASE("cosine sort examples") {
  const std::vector<double> lead{1.0, 0.0};
  std::vector<std::vector<double>> line;
  for (int i = 1; i <= 5; ++i) line.push_back({std::cos(0.2 * i), std::sin(0.2 * i)});
  const auto fwd = cosine_sort(lead, line);
  CHECK(*fwd.tau == doctest::Approx(1.0));
  CHECK(fwd.order == std::vector<std::size_t>{0, 1, 2, 3, 4});
  std::vector<std::vector<double>> reversed(line.rbegin(), line.rend());
  CHECK(*cosine_sort(lead, reversed).tau == doctest::Approx(-1.0));

  auto with_zero = line;
  with_zero[1] = {0.0, 0.0};
  const auto z = cosine_sort(lead, with_zero);
  CHECK(z.zero_norm == std::vector<bool>{false, true, false, false, false});
  CHECK(z.order.back() == 1);

  CHECK_THROWS_AS(cosine_sort(std::vector<double>{0.0, 0.0}, line), InputError);
  CHECK_THROWS_AS(cosine_sort(lead, {{1.0, 0.0}}), InputError);
  CHECK_THROWS_AS(cosine_sort(lead, {{1.0, 0.0}, {1.0}}), InputError);
}

TEST_CASE("cosine sort on random series matches pair counting and ignores scale") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> lead(16);
    for (double& v : lead) v = z(rng);
    std::vector<std::vector<double>> members(5, std::vector<double>(16));
    for (auto& m : members)
      for (double& v : m) v = z(rng);
    const auto r = cosine_sort(lead, members);
    std::vector<double> pos(5);
    for (std::size_t i = 0; i < 5; ++i) pos[r.order[i]] = static_cast<double>(i);
    CHECK(*r.tau == doctest::Approx(tau_sign_oracle({0, 1, 2, 3, 4}, pos)).epsilon(1e-12));

    auto lead2 = lead;
    for (double& v : lead2) v *= 3.7;
    auto members2 = members;
    for (auto& m : members2)
      for (double& v : m) v *= 3.7;
    CHECK(cosine_sort(lead2, members2).order == r.order);
  }
}

TEST_CASE("series files") {
  const auto dir = std::filesystem::temp_directory_path() / "descfm_test_embed";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "series.json").string();
  {
    std::ofstream out(path);
    out << R"([{"label": "amines", "lead": "CCCCN", "members": ["CCCCCN", "CCCCCCN", "c1ccccc1"]},
               {"lead": "CCO", "members": ["CCCO"]}])";
  }
  const auto series = read_series_json(path);
  REQUIRE(series.size() == 2);
  CHECK(series[0].label == "amines");
  CHECK(series[1].label == "series2");
  const auto r = sort_series(series[0], [](const Molecule& m) { return morgan_bits(m); });
  CHECK(r.order.back() == 2);
  CHECK_THROWS_AS(sort_series(series[1], [](const Molecule& m) { return morgan_bits(m); }), InputError);

  {
    std::ofstream out(path);
    out << R"([{"lead": "CCO", "members": []}])";
  }
  CHECK_THROWS_WITH_AS(read_series_json(path), doctest::Contains("series 0"), InputError);
  {
    std::ofstream out(path);
    out << "{not json";
  }
  CHECK_THROWS_AS(read_series_json(path), InputError);
  const SeriesSpec bad{"x", "C1CC", {"CC", "CCC"}};
  CHECK_THROWS_WITH_AS(sort_series(bad, [](const Molecule& m) { return morgan_bits(m); }), doctest::Contains("lead"),
                       InputError);
}

TEST_CASE("t-SNE affinities") {
  Tensor x = two_clusters(30, 8.0, 1, nullptr);
  const auto a = tsne_affinities(x, 10.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    CHECK(a.p(i, i) == 0.0);
    CHECK(std::abs(a.perplexity[i] - 10.0) < 1e-3);
    CHECK(a.iterations[i] <= 60);
    for (std::size_t j = 0; j < x.rows(); ++j) {
      CHECK(a.p(i, j) >= 0.0);
      CHECK(a.p(i, j) == a.p(j, i));
      sum += a.p(i, j);
    }
  }
  CHECK(std::abs(sum - 1.0) < 1e-9);

  // dyadic coordinates make the shift exact, so P must match bit for bit
  std::mt19937_64 rng(3);
  Tensor g(40, 3, 0.0), shifted(40, 3, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = static_cast<double>(static_cast<int>(rng() % 2048) - 1024) / 256.0;
    shifted[i] = g[i] + 1000.0;
  }
  const auto pa = tsne_affinities(g, 5.0), pb = tsne_affinities(shifted, 5.0);
  CHECK(std::equal(pa.p.values().begin(), pa.p.values().end(), pb.p.values().begin()));
}

TEST_CASE("t-SNE handles duplicate points") {
  Tensor x(6, 2, 0.0);
  for (std::size_t i = 3; i < 6; ++i) x(i, 0) = 5.0;
  TsneConfig cfg;
  cfg.perplexity = 2.0;
  cfg.iters = 300;
  const auto r = tsne(x, cfg);
  CHECK(r.y.all_finite());
  CHECK(std::isfinite(r.kl_final));
}

TEST_CASE("t-SNE recovers two separated clusters") {
  std::vector<int> labels;
  const Tensor x = two_clusters(30, 10.0, 2, &labels);
  TsneConfig cfg;
  cfg.perplexity = 10.0;
  cfg.seed = 5;
  const auto r = tsne(x, cfg);
  for (double p : r.row_perplexity) CHECK(std::abs(p - 10.0) < 1e-3);
  const double s = silhouette_score(r.y, labels);
  MESSAGE("silhouette " << s << " kl " << r.kl_initial << " -> " << r.kl_final);
  CHECK(s > 0.5);
  CHECK(r.kl_final < r.kl_initial);

  const auto again = tsne(x, cfg);
  CHECK(std::equal(r.y.values().begin(), r.y.values().end(), again.y.values().begin()));

  cfg.pca_init = false;
  const auto rnd = tsne(x, cfg);
  CHECK(rnd.kl_final < rnd.kl_initial);
}

TEST_CASE("t-SNE validation") {
  TsneConfig cfg;
  CHECK_THROWS_AS(tsne(Tensor(2, 2, 0.0), cfg), InputError);
  cfg.perplexity = 5.0;
  CHECK_THROWS_AS(tsne(Tensor(5, 2, 0.0), cfg), std::invalid_argument);
  Tensor bad(5, 2, 0.0);
  bad(0, 0) = NAN;
  cfg.perplexity = 2.0;
  CHECK_THROWS_AS(tsne(bad, cfg), InputError);
}

TEST_CASE("silhouette score by hand") {
  // 1-D points {0, 1} and {10, 11}
  Tensor x(4, 1, 0.0);
  x(1, 0) = 1.0;
  x(2, 0) = 10.0;
  x(3, 0) = 11.0;
  const std::vector<int> labels{0, 0, 1, 1};
  // point 0: a = 1, b = 10.5; point 1: a = 1, b = 9.5 (mirrored for cluster 1)
  const double expect = ((9.5 / 10.5) + (8.5 / 9.5)) / 2.0;
  CHECK(silhouette_score(x, labels) == doctest::Approx(expect).epsilon(1e-14));
  CHECK_THROWS_AS(silhouette_score(x, std::vector<int>{0, 0, 0, 0}), InputError);
}
