#include <cmath>
#include <random>

#include "descfm/tensor.hpp"
#include "doctest.h"

using namespace descfm;

namespace {

Tensor random_tensor(std::size_t r, std::size_t c, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(r, c);
  for (double& x : t.values()) x = u(rng);
  return t;
}

// Keeps inputs away from the relu kink so central differences are valid.
Tensor away_from_zero(Tensor t) {
  for (double& x : t.values())
    if (std::abs(x) < 0.05) x = x < 0 ? x - 0.05 : x + 0.05;
  return t;
}

// Reduces an arbitrary output to a scalar with random fixed weights so every
// output cell carries a distinct upstream gradient.
Var weighted_sum(Tape& t, Var y, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sum(mul(y, t.constant(random_tensor(y.rows(), y.cols(), rng))));
}

std::vector<int> random_index(std::size_t n, int range, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> u(0, range - 1);
  std::vector<int> idx(n);
  for (int& i : idx) i = u(rng);
  return idx;
}

}  // namespace

TEST_CASE("primitive examples") {
  Tape t;
  Var x = t.leaf(Tensor::row({-1, 2}), true);
  Var r = relu(x);
  CHECK(r.value() == Tensor::row({0, 2}));
  t.backward(sum(r));
  CHECK(x.grad() == Tensor::row({0, 1}));

  Tape t2;
  Tensor eye(2, 2, std::vector<double>{1, 0, 0, 1});
  Tensor a(2, 3, std::vector<double>{1, 2, 3, 4, 5, 6});
  CHECK(matmul(t2.constant(eye), t2.constant(a)).value() == a);

  Tape t3;
  Var p = t3.leaf(Tensor::row({1, 5}), true);
  Var loss = mse_masked(p, Tensor::row({1, 1}), Tensor::row({1, 0}));
  CHECK(loss.value()[0] == 0.0);
  t3.backward(loss);
  CHECK(p.grad() == Tensor::row({0, 0}));

  Tape t4;
  Var all_masked = mse_masked(t4.leaf(Tensor::row({3}), true), Tensor::row({0}), Tensor::row({0}));
  CHECK(all_masked.value()[0] == 0.0);
}

TEST_CASE("add broadcasts a row over the leading axis") {
  Tape t;
  Var a = t.leaf(Tensor(3, 2, std::vector<double>{1, 2, 3, 4, 5, 6}), true);
  Var b = t.leaf(Tensor::row({10, 20}), true);
  Var c = add(a, b);
  CHECK(c.value() == Tensor(3, 2, std::vector<double>{11, 22, 13, 24, 15, 26}));
  t.backward(sum(c));
  CHECK(b.grad() == Tensor::row({3, 3}));
}

TEST_CASE("shape and index errors") {
  Tape t;
  Var a = t.constant(Tensor(2, 3));
  Var b = t.constant(Tensor(2, 3));
  CHECK_THROWS_AS(matmul(a, b), ShapeError);
  CHECK_THROWS_AS(add(a, t.constant(Tensor(3, 2))), ShapeError);
  CHECK_THROWS_AS(mul(a, t.constant(Tensor(1, 3))), ShapeError);
  CHECK_THROWS_AS(concat(a, t.constant(Tensor(3, 1))), ShapeError);
  const std::vector<int> bad{0, 2};
  CHECK_THROWS_AS(gather_rows(a, bad), ShapeError);
  CHECK_THROWS_AS(scatter_add_rows(a, bad, 2), ShapeError);
  const std::vector<int> short_idx{0};
  CHECK_THROWS_AS(scatter_add_rows(a, short_idx, 2), ShapeError);
  CHECK_THROWS_AS(mse_masked(a, Tensor(2, 2), Tensor(2, 3)), ShapeError);
  Tape t2;
  Var x = t2.leaf(Tensor(2, 2), true);
  CHECK_THROWS_AS(t2.backward(x), ShapeError);
  CHECK_THROWS_AS(Tensor(2, 2, std::vector<double>{1, 2, 3}), ShapeError);
}

TEST_CASE("grad_check examples") {
  const double quad = grad_check([](Tape&, Var x) { return sum(mul(x, x)); }, Tensor::scalar(3.0), 1e-4);
  CHECK(quad < 1e-6);
  {
    Tape t;
    Var x = t.leaf(Tensor::scalar(3.0), true);
    t.backward(sum(mul(x, x)));
    CHECK(x.grad()[0] == doctest::Approx(6.0));
  }
  const double constant =
      grad_check([](Tape& t, Var x) { return add(scale(sum(x), 0.0), t.constant(Tensor::scalar(5))); }, Tensor::row({1, 2}));
  CHECK(constant == 0.0);
  CHECK_THROWS_AS(grad_check([](Tape&, Var x) { return x; }, Tensor::row({1, 2})), ShapeError);
}

TEST_CASE("grad_check on a random three-layer MLP loss") {
  std::mt19937_64 rng(11);
  const Tensor w1 = random_tensor(4, 6, rng), b1 = random_tensor(1, 6, rng);
  const Tensor w2 = random_tensor(6, 5, rng), b2 = random_tensor(1, 5, rng);
  const Tensor w3 = random_tensor(5, 2, rng), b3 = random_tensor(1, 2, rng);
  const Tensor target = random_tensor(7, 2, rng);
  const Tensor mask(7, 2, 1.0);
  const Tensor x = random_tensor(7, 4, rng);
  auto mlp = [&](Tape& t, Var in) {
    Var h = relu(linear(in, t.constant(w1), t.constant(b1)));
    h = relu(linear(h, t.constant(w2), t.constant(b2)));
    return mse_masked(linear(h, t.constant(w3), t.constant(b3)), target, mask);
  };
  CHECK(grad_check(mlp, x) < 1e-4);
  // and with respect to a weight matrix
  auto by_weight = [&](Tape& t, Var w) {
    Var h = relu(linear(t.constant(x), t.constant(w1), t.constant(b1)));
    h = relu(linear(h, w, t.constant(b2)));
    return mse_masked(linear(h, t.constant(w3), t.constant(b3)), target, mask);
  };
  CHECK(grad_check(by_weight, w2) < 1e-4);
}

TEST_CASE("every primitive passes grad_check on 100 random shapes") {
  std::uniform_int_distribution<int> dim(1, 6);
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t r = dim(rng), c = dim(rng), k = dim(rng);
    const Tensor other = random_tensor(c, k, rng);
    const Tensor same = random_tensor(r, c, rng);
    const Tensor bias = random_tensor(1, c, rng);
    const Tensor right = random_tensor(r, k, rng);
    const Tensor x = away_from_zero(random_tensor(r, c, rng));
    const auto gidx = random_index(static_cast<std::size_t>(dim(rng)), static_cast<int>(r), rng);
    const auto sidx = random_index(r, static_cast<int>(k), rng);
    std::vector<double> factors(r);
    for (double& f : factors) f = std::uniform_real_distribution<double>(-2, 2)(rng);
    const Tensor left = random_tensor(2, r, rng);
    const Tensor out_bias = random_tensor(1, k, rng);
    const Tensor target = random_tensor(r, c, rng);
    Tensor mask = random_tensor(r, c, rng);
    for (double& m : mask.values()) m = m > -0.3 ? 1.0 : 0.0;
    Tensor labels = random_tensor(r, c, rng);
    for (double& y : labels.values()) y = y > 0 ? 1.0 : 0.0;

    const std::vector<ScalarFn> fns = {
        [&](Tape& t, Var v) { return weighted_sum(t, matmul(v, t.constant(other)), seed); },
        [&](Tape& t, Var v) { return weighted_sum(t, matmul(t.constant(left), v), seed); },
        [&](Tape& t, Var v) { return weighted_sum(t, add(v, t.constant(same)), seed); },
        [&](Tape& t, Var v) { return weighted_sum(t, add(t.constant(same), v), seed); },
        [&](Tape& t, Var v) { return weighted_sum(t, add(t.constant(same), gather_rows(v, std::vector<int>(r, 0))), seed); },
        [&](Tape& t, Var v) { return weighted_sum(t, add(v, gather_rows(v, std::vector<int>{0})), seed); },
        [&](Tape& t, Var v) { return weighted_sum(t, add(t.constant(x), matmul(t.constant(Tensor(r, 1, 1.0)), gather_rows(v, std::vector<int>{0}))), seed); },
        [&](Tape& t, Var v) { return weighted_sum(t, sub(v, t.constant(same)), seed); },
        [&](Tape& t, Var v) { return weighted_sum(t, mul(v, t.constant(same)), seed); },
        [&](Tape& t, Var v) { return weighted_sum(t, mul(v, v), seed); },
        [&](Tape& t, Var v) { return weighted_sum(t, scale(v, -1.7), seed); },
        [&](Tape& t, Var v) { return weighted_sum(t, relu(v), seed); },
        [&](Tape&, Var v) { return sum(v); },
        [&](Tape&, Var v) { return mul(mean(v), mean(v)); },
        [&](Tape& t, Var v) { return weighted_sum(t, concat(v, t.constant(right)), seed); },
        [&](Tape& t, Var v) { return weighted_sum(t, concat(t.constant(right), v), seed); },
        [&](Tape& t, Var v) { return weighted_sum(t, gather_rows(v, gidx), seed); },
        [&](Tape& t, Var v) { return weighted_sum(t, scatter_add_rows(v, sidx, k), seed); },
        [&](Tape& t, Var v) { return weighted_sum(t, row_scale(v, factors), seed); },
        [&](Tape&, Var v) { return mse_masked(v, target, mask); },
        [&](Tape&, Var v) { return bce_with_logits(v, labels); },
        [&](Tape&, Var v) { return bce_with_logits(v, labels, mask); },
        [&](Tape& t, Var v) { return weighted_sum(t, linear(v, t.constant(other), t.constant(out_bias)), seed); },
    };
    for (std::size_t i = 0; i < fns.size(); ++i) {
      const double err = grad_check(fns[i], x);
      CAPTURE(seed);
      CAPTURE(i);
      CHECK(err < 1e-4);
      worst = std::max(worst, err);
    }
    // broadcast bias gradient
    CHECK(grad_check([&](Tape& t, Var b) { return weighted_sum(t, add(t.constant(x), b), seed); }, bias) < 1e-4);
  }
  MESSAGE("worst primitive gradient error: " << worst);
}

TEST_CASE("scatter then gather is linear and exactly superposable") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> small(-50, 50);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t rows = 7, cols = 3, out_rows = 4;
    Tensor a(rows, cols), b(rows, cols), ab(rows, cols);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = small(rng);
      b[i] = small(rng);
      ab[i] = a[i] + b[i];
    }
    const auto sidx = random_index(rows, static_cast<int>(out_rows), rng);
    const auto gidx = random_index(9, static_cast<int>(out_rows), rng);
    auto f = [&](const Tensor& in) {
      Tape t;
      return gather_rows(scatter_add_rows(t.constant(in), sidx, out_rows), gidx).value();
    };
    const Tensor fa = f(a), fb = f(b), fab = f(ab);
    for (std::size_t i = 0; i < fab.size(); ++i) CHECK(fab[i] == fa[i] + fb[i]);
    Tensor x(rows, cols);
    for (double& v : x.values()) v = std::uniform_real_distribution<double>(-1, 1)(rng);
    CHECK(grad_check([&](Tape& t, Var v) { return weighted_sum(t, gather_rows(scatter_add_rows(v, sidx, out_rows), gidx), 9); },
                     x) < 1e-4);
  }
}

TEST_CASE("gradients accumulate into parameters across uses") {
  Parameter p("w", Tensor::row({2.0}));
  Tape t;
  Var w = t.param(p);
  t.backward(add(sum(w), sum(mul(w, w))));
  CHECK(p.grad[0] == doctest::Approx(1.0 + 4.0));
  Tape t2;
  t2.backward(sum(t2.param(p)));
  CHECK(p.grad[0] == doctest::Approx(6.0));
  p.zero_grad();
  CHECK(p.grad[0] == 0.0);
}

TEST_CASE("adam examples") {
  AdamConfig cfg;
  cfg.float32_params = false;
  {
    Parameter p("p", Tensor::row({1.5, -2.0}));
    AdamState s;
    Parameter* ps[] = {&p};
    adam_step(ps, s, 0.1, cfg);
    CHECK(p.value == Tensor::row({1.5, -2.0}));
  }
  {
    Parameter p("p", Tensor::scalar(0.0));
    p.grad[0] = 1.0;
    AdamState s;
    Parameter* ps[] = {&p};
    adam_step(ps, s, 0.1, cfg);
    // m_hat = 1, v_hat = 1 after bias correction
    CHECK(p.value[0] == doctest::Approx(-0.1 / (1.0 + 1e-8)).epsilon(1e-12));
  }
  {
    Parameter p("p", Tensor::scalar(0.0));
    AdamState s;
    Parameter* ps[] = {&p};
    double step = 0.0;
    for (int i = 0; i < 2000; ++i) {
      p.grad[0] = 0.37;
      const double before = p.value[0];
      adam_step(ps, s, 1e-3, cfg);
      step = before - p.value[0];
    }
    CHECK(step == doctest::Approx(1e-3).epsilon(1e-6));
  }
}

TEST_CASE("adam rejects non-finite gradients and leaves parameters untouched") {
  Parameter a("layer.a", Tensor::row({1.0, 2.0}));
  Parameter b("layer.b", Tensor::row({3.0}));
  a.grad[0] = 0.5;
  b.grad[0] = std::nan("");
  AdamState s;
  Parameter* ps[] = {&a, &b};
  try {
    adam_step(ps, s, 0.1);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("layer.b") != std::string::npos);
  }
  CHECK(a.value == Tensor::row({1.0, 2.0}));
  CHECK(s.step == 0);
}

TEST_CASE("float32 parameter rounding") {
  Parameter p("p", Tensor::scalar(0.0));
  p.grad[0] = 1.0;
  AdamState s;
  Parameter* ps[] = {&p};
  adam_step(ps, s, 0.1);
  CHECK(p.value[0] == static_cast<double>(static_cast<float>(p.value[0])));
  CHECK(p.value[0] == doctest::Approx(-0.1).epsilon(1e-6));
}
