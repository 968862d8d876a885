#include "descfm/embed.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "descfm/errors.hpp"
#include "json.hpp"

namespace descfm {

namespace {

// splitmix64 finalizer; fixed so identifiers are stable across platforms.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_seq(std::span<const std::uint64_t> v) {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (std::uint64_t x : v) h = mix(h ^ x);
  return h;
}

std::uint64_t bond_code(BondOrder o) {
  switch (o) {
    case BondOrder::Single: return 1;
    case BondOrder::Double: return 2;
    case BondOrder::Triple: return 3;
    case BondOrder::Aromatic: return 4;
  }
  return 0;
}

}  // namespace

std::uint64_t morgan_atom_invariant(const Molecule& m, int atom) {
  const Atom& a = m.atom(atom);
  const std::uint64_t v[] = {static_cast<std::uint64_t>(a.atomic_number),
                             static_cast<std::uint64_t>(m.heavy_degree(atom)),
                             static_cast<std::uint64_t>(static_cast<std::int64_t>(a.formal_charge) + 64),
                             static_cast<std::uint64_t>(m.hydrogen_count(atom)),
                             a.aromatic ? 1ULL : 0ULL,
                             m.atom_in_ring(atom) ? 1ULL : 0ULL};
  return hash_seq(v);
}

std::vector<std::vector<std::uint64_t>> morgan_identifiers(const Molecule& m, int radius) {
  if (radius < 0) throw std::invalid_argument("radius must be non-negative");
  const int n = m.num_atoms();
  std::vector<std::vector<std::uint64_t>> rounds;
  std::vector<std::uint64_t> cur(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i)
    if (!m.atom(i).is_hydrogen()) cur[static_cast<std::size_t>(i)] = morgan_atom_invariant(m, i);
  rounds.push_back(cur);
  for (int r = 1; r <= radius; ++r) {
    std::vector<std::uint64_t> next(cur.size(), 0);
    for (int i = 0; i < n; ++i) {
      if (m.atom(i).is_hydrogen()) continue;
      std::vector<std::pair<std::uint64_t, std::uint64_t>> env;
      for (const Neighbor& nb : m.neighbors(i)) {
        if (m.atom(nb.atom).is_hydrogen()) continue;
        env.emplace_back(bond_code(m.bond(nb.bond).order), cur[static_cast<std::size_t>(nb.atom)]);
      }
      std::sort(env.begin(), env.end());
      std::vector<std::uint64_t> seq{static_cast<std::uint64_t>(r), cur[static_cast<std::size_t>(i)]};
      for (const auto& [b, id] : env) {
        seq.push_back(b);
        seq.push_back(id);
      }
      next[static_cast<std::size_t>(i)] = hash_seq(seq);
    }
    cur = std::move(next);
    rounds.push_back(cur);
  }
  // drop hydrogen slots
  for (auto& round : rounds) {
    std::vector<std::uint64_t> heavy;
    for (int i = 0; i < n; ++i)
      if (!m.atom(i).is_hydrogen()) heavy.push_back(round[static_cast<std::size_t>(i)]);
    round = std::move(heavy);
  }
  return rounds;
}

std::vector<std::uint32_t> morgan_fingerprint(const Molecule& m, int radius, std::size_t width) {
  if (width == 0) throw std::invalid_argument("fingerprint width must be positive");
  std::vector<std::uint32_t> counts(width, 0);
  for (const auto& round : morgan_identifiers(m, radius))
    for (std::uint64_t id : round) ++counts[id % width];
  return counts;
}

std::vector<double> morgan_bits(const Molecule& m, int radius, std::size_t width) {
  const auto c = morgan_fingerprint(m, radius, width);
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i] ? 1.0 : 0.0;
  return out;
}

// ---------------------------------------------------------------------------

std::optional<double> kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputError("kendall_tau_b: length mismatch");
  const std::size_t n = x.size();
  double concordant = 0.0, discordant = 0.0, tie_x = 0.0, tie_y = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool tx = x[i] == x[j], ty = y[i] == y[j];
      if (tx) tie_x += 1.0;
      if (ty) tie_y += 1.0;
      if (tx || ty) continue;
      if ((x[i] < x[j]) == (y[i] < y[j]))
        concordant += 1.0;
      else
        discordant += 1.0;
    }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - (n > 0)) / 2.0;
  const double denom = std::sqrt((pairs - tie_x) * (pairs - tie_y));
  if (!(denom > 0.0)) return std::nullopt;
  return (concordant - discordant) / denom;
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("cosine_distance: length mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}

SortResult cosine_sort(std::span<const double> lead, const std::vector<std::vector<double>>& members) {
  if (members.size() < 2) throw InputError("cosine_sort needs at least two members");
  double lead_norm = 0.0;
  for (double v : lead) lead_norm += v * v;
  if (lead_norm == 0.0) throw InputError("lead embedding has zero norm");
  SortResult r;
  r.distance.resize(members.size());
  r.zero_norm.assign(members.size(), false);
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members[i].size() != lead.size()) throw InputError("member " + std::to_string(i) + " has a different width");
    r.distance[i] = cosine_distance(lead, members[i]);
    r.zero_norm[i] = std::isinf(r.distance[i]);
  }
  r.order.resize(members.size());
  std::iota(r.order.begin(), r.order.end(), 0);
  std::stable_sort(r.order.begin(), r.order.end(),
                   [&](std::size_t a, std::size_t b) { return r.distance[a] < r.distance[b]; });
  std::vector<double> ref(members.size());
  std::iota(ref.begin(), ref.end(), 0.0);
  r.tau = kendall_tau_b(ref, r.distance);
  return r;
}

std::vector<SeriesSpec> read_series_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  if (!j.is_array()) throw InputError(path + ": expected a JSON list of series");
  std::vector<SeriesSpec> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    const std::string where = path + ": series " + std::to_string(i);
    if (!e.is_object() || !e.contains("lead") || !e.contains("members") || !e["lead"].is_string() ||
        !e["members"].is_array())
      throw InputError(where + ": needs a string lead and a members list");
    SeriesSpec s;
    s.label = e.value("label", "series" + std::to_string(i + 1));
    s.lead = e["lead"].get<std::string>();
    for (const auto& mem : e["members"]) {
      if (!mem.is_string()) throw InputError(where + ": members must be SMILES strings");
      s.members.push_back(mem.get<std::string>());
    }
    if (s.members.empty()) throw InputError(where + ": members list is empty");
    out.push_back(std::move(s));
  }
  return out;
}

SortResult sort_series(const SeriesSpec& s, const FingerprintFn& fp) {
  auto parse = [&](const std::string& smi, const std::string& what) {
    try {
      return parse_smiles(smi);
    } catch (const InputError& e) {
      throw InputError("series " + s.label + " " + what + ": " + e.what());
    }
  };
  const auto lead = fp(parse(s.lead, "lead"));
  std::vector<std::vector<double>> members;
  for (std::size_t i = 0; i < s.members.size(); ++i)
    members.push_back(fp(parse(s.members[i], "member " + std::to_string(i + 1))));
  try {
    return cosine_sort(lead, members);
  } catch (const InputError& e) {
    throw InputError("series " + s.label + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// t-SNE

void TsneConfig::validate(std::size_t n) const {
  if (n < 3) throw InputError("t-SNE needs at least 3 points");
  if (!(perplexity > 0.0 && perplexity < static_cast<double>(n)))
    throw std::invalid_argument("perplexity must lie in (0, n)");
  if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
  if (!(exaggeration >= 1.0)) throw std::invalid_argument("exaggeration must be at least 1");
}

namespace {

constexpr double kDistFloor = 1e-12;

Tensor squared_distances(const Tensor& x) {
  const std::size_t n = x.rows(), d = x.cols();
  Tensor out(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = x(i, c) - x(j, c);
        s += diff * diff;
      }
      s = std::max(s, kDistFloor);
      out(i, j) = s;
      out(j, i) = s;
    }
  return out;
}

}  // namespace

Affinities tsne_affinities(const Tensor& x, double perplexity) {
  const std::size_t n = x.rows();
  if (n < 2) throw InputError("t-SNE affinities need at least 2 points");
  if (!x.all_finite()) throw InputError("t-SNE input contains non-finite values");
  const Tensor d2 = squared_distances(x);
  const double target = std::log2(perplexity);
  Affinities a;
  a.p = Tensor(n, n, 0.0);
  a.perplexity.resize(n);
  a.iterations.resize(n);
  std::vector<double> row(n);
  for (std::size_t i = 0; i < n; ++i) {
    double dmin = std::numeric_limits<double>::infinity(), dsum = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) {
        dmin = std::min(dmin, d2(i, j));
        dsum += d2(i, j);
      }
    const double spread = dsum / static_cast<double>(n - 1) - dmin;
    double beta = spread > 0.0 ? 1.0 / spread : 1.0;
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double h = 0.0;
    std::size_t it = 0;
    for (; it < 60; ++it) {
      double z = 0.0, wsum = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) {
          row[j] = 0.0;
          continue;
        }
        const double dd = d2(i, j) - dmin;
        row[j] = std::exp(-beta * dd);
        z += row[j];
        wsum += row[j] * dd;
      }
      // entropy in bits of row / z
      h = (std::log(z) + beta * wsum / z) / std::numbers::ln2;
      if (std::abs(h - target) < 1e-5) break;
      if (h > target) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (lo + hi);
      } else {
        hi = beta;
        beta = 0.5 * (lo + hi);
      }
    }
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += row[j];
    for (std::size_t j = 0; j < n; ++j) a.p(i, j) = row[j] / z;
    a.perplexity[i] = std::exp2(h);
    a.iterations[i] = it;
  }
  const double denom = 2.0 * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = (a.p(i, j) + a.p(j, i)) / denom;
      a.p(i, j) = s;
      a.p(j, i) = s;
    }
  return a;
}

double tsne_kl(const Tensor& p, const Tensor& y) {
  const std::size_t n = y.rows();
  Tensor num(n, n, 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < y.cols(); ++c) s += (y(i, c) - y(j, c)) * (y(i, c) - y(j, c));
      const double v = 1.0 / (1.0 + s);
      num(i, j) = num(j, i) = v;
      z += 2.0 * v;
    }
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || p(i, j) <= 0.0) continue;
      kl += p(i, j) * std::log(p(i, j) / std::max(num(i, j) / z, kDistFloor));
    }
  return kl;
}

namespace {

// First two principal-component scores, each scaled to std 1e-4.
Tensor pca_init(const Tensor& x, std::mt19937_64& rng) {
  const Eigen::Index n = static_cast<Eigen::Index>(x.rows()), d = static_cast<Eigen::Index>(x.cols());
  Eigen::MatrixXd xc(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < d; ++c) xc(i, c) = x(static_cast<std::size_t>(i), static_cast<std::size_t>(c));
  xc.rowwise() -= xc.colwise().mean();
  Eigen::MatrixXd scores(n, 2);
  scores.setZero();
  // eigen-decompose the smaller of the covariance and the Gram matrix
  if (d <= n) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(xc.transpose() * xc);
    for (Eigen::Index k = 0; k < std::min<Eigen::Index>(2, d); ++k) scores.col(k) = xc * es.eigenvectors().col(d - 1 - k);
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(xc * xc.transpose());
    for (Eigen::Index k = 0; k < 2; ++k) {
      const double lambda = std::max(0.0, es.eigenvalues()(n - 1 - k));
      scores.col(k) = es.eigenvectors().col(n - 1 - k) * std::sqrt(lambda);
    }
  }
  Tensor y(x.rows(), 2, 0.0);
  std::normal_distribution<double> normal(0.0, 1e-4);
  for (Eigen::Index k = 0; k < 2; ++k) {
    Eigen::Index arg = 0;
    scores.col(k).cwiseAbs().maxCoeff(&arg);
    if (scores(arg, k) < 0.0) scores.col(k) *= -1.0;
    const double mean = scores.col(k).mean();
    const double sd = std::sqrt((scores.col(k).array() - mean).square().mean());
    for (Eigen::Index i = 0; i < n; ++i)
      y(static_cast<std::size_t>(i), static_cast<std::size_t>(k)) =
          sd > 1e-150 ? (scores(i, k) - mean) / sd * 1e-4 : normal(rng);
  }
  return y;
}

}  // namespace

TsneResult tsne(const Tensor& x, const TsneConfig& cfg) {
  const std::size_t n = x.rows();
  cfg.validate(n);
  Affinities aff = tsne_affinities(x, cfg.perplexity);
  const Tensor& p = aff.p;

  std::mt19937_64 rng(cfg.seed);
  Tensor y(n, 2, 0.0);
  if (cfg.pca_init) {
    y = pca_init(x, rng);
  } else {
    std::normal_distribution<double> normal(0.0, 1e-4);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = normal(rng);
  }

  TsneResult r;
  r.kl_initial = tsne_kl(p, y);
  r.row_perplexity = std::move(aff.perplexity);

  Tensor update(n, 2, 0.0), gains(n, 2, 1.0), grad(n, 2, 0.0), num(n, n, 0.0);
  for (std::size_t it = 0; it < cfg.iters; ++it) {
    const double exag = it < cfg.exaggeration_iters ? cfg.exaggeration : 1.0;
    const double momentum = it < cfg.momentum_switch ? cfg.momentum_initial : cfg.momentum_final;
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = y(i, 0) - y(j, 0), dy = y(i, 1) - y(j, 1);
        const double v = 1.0 / (1.0 + dx * dx + dy * dy);
        num(i, j) = num(j, i) = v;
        z += 2.0 * v;
      }
    grad.fill(0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double w = 4.0 * (exag * p(i, j) - num(i, j) / z) * num(i, j);
        grad(i, 0) += w * (y(i, 0) - y(j, 0));
        grad(i, 1) += w * (y(i, 1) - y(j, 1));
      }
    double mean[2] = {0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < 2; ++c) {
        const bool same_sign = (grad(i, c) > 0.0) == (update(i, c) > 0.0);
        gains(i, c) = same_sign ? std::max(gains(i, c) * 0.8, 0.01) : gains(i, c) + 0.2;
        update(i, c) = momentum * update(i, c) - cfg.lr * gains(i, c) * grad(i, c);
        y(i, c) += update(i, c);
        mean[c] += y(i, c);
      }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < 2; ++c) y(i, c) -= mean[c] / static_cast<double>(n);
  }
  if (!y.all_finite()) throw NumericError("t-SNE diverged to non-finite coordinates");
  r.kl_final = tsne_kl(p, y);
  r.y = std::move(y);
  return r;
}

double silhouette_score(const Tensor& x, std::span<const int> labels) {
  const std::size_t n = x.rows();
  if (labels.size() != n) throw InputError("silhouette_score: label count mismatch");
  std::vector<int> ids(labels.begin(), labels.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.size() < 2) throw InputError("silhouette_score needs at least two clusters");
  auto dist = [&](std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) s += (x(i, c) - x(j, c)) * (x(i, c) - x(j, c));
    return std::sqrt(s);
  };
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> sum(ids.size(), 0.0), cnt(ids.size(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto k = static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), labels[j]) - ids.begin());
      sum[k] += dist(i, j);
      cnt[k] += 1.0;
    }
    const auto own = static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), labels[i]) - ids.begin());
    if (cnt[own] == 0.0) continue;
    const double a = sum[own] / cnt[own];
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < ids.size(); ++k)
      if (k != own && cnt[k] > 0.0) b = std::min(b, sum[k] / cnt[k]);
    const double m = std::max(a, b);
    total += m > 0.0 ? (b - a) / m : 0.0;
  }
  return total / static_cast<double>(n);
}

}  // namespace descfm
