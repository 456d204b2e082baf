#include "polynet/nn/mlp.hpp"
#include "polynet/nn/optim.hpp"

#include "support.hpp"

#include <cmath>
#include <random>

using namespace polynet;
using nn::Matrix;
using nn::Mode;
using test::require_error;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix m(r, c);
  for (double& x : m.values()) x = g(rng);
  return m;
}

nn::Mlp small_mlp(std::mt19937_64& rng) {
  nn::MlpSpec spec;
  spec.dims = {3, 4, 2};
  return nn::Mlp(spec, rng, "mlp");
}

}  // namespace

TEST_CASE("zero network in eval mode outputs zeros") {
  std::mt19937_64 rng(1);
  nn::MlpSpec spec;
  spec.dims = {3, 5, 4, 2};
  nn::Mlp mlp(spec, rng);
  for (auto* p : mlp.parameters())
    if (p->name.find("gamma") == std::string::npos) p->value.fill(0.0);
  const Matrix y = mlp.forward(random_matrix(6, 3, rng), Mode::Eval);
  for (double v : y.values()) CHECK(v == 0.0);
}

TEST_CASE("identity layer") {
  std::mt19937_64 rng(1);
  nn::MlpSpec spec;
  spec.dims = {3, 3};
  nn::Mlp mlp(spec, rng);
  auto& layer = mlp.layers().front();
  layer.weight.value = Matrix::identity(3);
  layer.bias.value.fill(0.0);
  const Matrix x = random_matrix(4, 3, rng);
  CHECK(mlp.forward(x, Mode::Train).values() == x.values());
}

TEST_CASE("eval forward is repeatable") {
  std::mt19937_64 rng(2);
  nn::Mlp mlp = small_mlp(rng);
  const Matrix x = random_matrix(5, 3, rng);
  CHECK(mlp.forward(x, Mode::Eval).values() == mlp.forward(x, Mode::Eval).values());
}

TEST_CASE("batch norm statistics") {
  std::mt19937_64 rng(3);
  nn::MlpSpec spec;
  spec.dims = {2, 3};
  spec.batchnorm_output = true;
  nn::Mlp mlp(spec, rng);
  const Matrix x = random_matrix(50, 2, rng, 3.0);
  nn::Mlp::Cache cache;
  const Matrix y = mlp.forward(x, Mode::Train, &cache);
  for (std::size_t c = 0; c < 3; ++c) {
    double mean = 0.0, sq = 0.0;
    for (std::size_t r = 0; r < 50; ++r) mean += y(r, c);
    mean /= 50;
    for (std::size_t r = 0; r < 50; ++r) sq += (y(r, c) - mean) * (y(r, c) - mean);
    CHECK(std::abs(mean) < 1e-12);
    CHECK(sq / 50 == doctest::Approx(1.0).epsilon(1e-3));
  }
  // Running stats moved 10% toward the batch statistics.
  const auto& layer = mlp.layers().front();
  bool moved = false;
  for (double m : layer.running_mean.values()) moved |= m != 0.0;
  CHECK(moved);
  require_error(ErrorCode::BatchTooSmall, [&] { mlp.forward(random_matrix(1, 2, rng), Mode::Train); });
  CHECK(mlp.forward(random_matrix(1, 2, rng), Mode::Eval).rows() == 1);
}

TEST_CASE("MLP gradients match finite differences") {
  for (Mode mode : {Mode::Train, Mode::Eval}) {
    std::mt19937_64 rng(4);
    nn::Mlp mlp = small_mlp(rng);
    for (auto* p : mlp.parameters())
      for (double& v : p->value.values()) v += std::uniform_real_distribution<double>(-0.2, 0.2)(rng);
    const Matrix x = random_matrix(6, 3, rng);
    const std::vector<int> labels{0, 1, 1, 0, 1, 0};
    auto loss = [&] { return nn::cross_entropy(mlp.forward(x, mode), labels).loss; };
    auto analytic = [&] {
      for (auto* p : mlp.parameters()) p->zero_grad();
      nn::Mlp::Cache cache;
      const Matrix y = mlp.forward(x, mode, &cache);
      mlp.backward(cache, nn::cross_entropy(y, labels).grad);
    };
    const auto params = mlp.parameters();
    const auto result = nn::grad_check(params, loss, analytic);
    CHECK_MESSAGE(result.max_rel_error < 1e-6, result.worst, " ", result.max_rel_error);
    CHECK(result.checked == 3 * 4 + 4 + 4 + 4 * 2 + 2);
  }
}

TEST_CASE("gradient check catches a broken backward pass") {
  std::mt19937_64 rng(4);
  nn::Mlp mlp = small_mlp(rng);
  const Matrix x = random_matrix(6, 3, rng);
  const std::vector<int> labels{0, 1, 1, 0, 1, 0};
  auto loss = [&] { return nn::cross_entropy(mlp.forward(x, Mode::Train), labels).loss; };
  auto broken = [&] {
    for (auto* p : mlp.parameters()) p->zero_grad();
    nn::Mlp::Cache cache;
    const Matrix y = mlp.forward(x, Mode::Train, &cache);
    mlp.backward(cache, nn::cross_entropy(y, labels).grad);
    for (double& g : mlp.layers().front().weight.grad.values()) g *= 1.5;
  };
  const auto params = mlp.parameters();
  CHECK(nn::grad_check(params, loss, broken).max_rel_error > 1e-2);
}

TEST_CASE("backward is linear in the output gradient") {
  std::mt19937_64 rng(6);
  nn::Mlp mlp = small_mlp(rng);
  const Matrix x = random_matrix(5, 3, rng);
  nn::Mlp::Cache cache;
  const Matrix y = mlp.forward(x, Mode::Train, &cache);
  const Matrix g = random_matrix(y.rows(), y.cols(), rng);
  Matrix g2 = g;
  for (double& v : g2.values()) v *= 2.0;

  for (auto* p : mlp.parameters()) p->zero_grad();
  const Matrix dx1 = mlp.backward(cache, g);
  std::vector<Matrix> first;
  for (auto* p : mlp.parameters()) first.push_back(p->grad);
  for (auto* p : mlp.parameters()) p->zero_grad();
  const Matrix dx2 = mlp.backward(cache, g2);
  const auto params = mlp.parameters();
  for (std::size_t n = 0; n < params.size(); ++n)
    for (std::size_t i = 0; i < first[n].size(); ++i)
      CHECK(params[n]->grad.values()[i] == doctest::Approx(2.0 * first[n].values()[i]).epsilon(1e-12));
  for (std::size_t i = 0; i < dx1.size(); ++i)
    CHECK(dx2.values()[i] == doctest::Approx(2.0 * dx1.values()[i]).epsilon(1e-12));
}

TEST_CASE("zero output gradient leaves parameters without gradient") {
  std::mt19937_64 rng(6);
  nn::Mlp mlp = small_mlp(rng);
  nn::Mlp::Cache cache;
  const Matrix y = mlp.forward(random_matrix(4, 3, rng), Mode::Train, &cache);
  for (auto* p : mlp.parameters()) p->zero_grad();
  mlp.backward(cache, Matrix(y.rows(), y.cols()));
  for (auto* p : mlp.parameters())
    for (double v : p->grad.values()) CHECK(v == 0.0);
}

TEST_CASE("cross-entropy") {
  SUBCASE("uniform logits") {
    const auto r = nn::cross_entropy(Matrix(3, 10, 0.25), {0, 4, 9});
    CHECK(r.loss == doctest::Approx(std::log(10.0)).epsilon(1e-15));
  }
  SUBCASE("huge logit on the true class") {
    Matrix logits(1, 3);
    logits(0, 1) = 1000.0;
    const auto r = nn::cross_entropy(logits, {1});
    CHECK(std::isfinite(r.loss));
    CHECK(r.loss < 1e-12);
  }
  SUBCASE("gradient rows sum to zero") {
    std::mt19937_64 rng(8);
    const auto r = nn::cross_entropy(random_matrix(4, 5, rng), {0, 1, 2, 3});
    for (std::size_t row = 0; row < 4; ++row) {
      double s = 0.0;
      for (double v : r.grad.row(row)) s += v;
      CHECK(std::abs(s) < 1e-15);
    }
  }
  SUBCASE("bad labels") {
    require_error(ErrorCode::Label, [] { nn::cross_entropy(Matrix(1, 3), {3}); });
    require_error(ErrorCode::Dimension, [] { nn::cross_entropy(Matrix(2, 3), {0}); });
  }
  SUBCASE("softmax rows") {
    const Matrix p = nn::softmax(Matrix(2, 4, 1.0));
    for (double v : p.values()) CHECK(v == doctest::Approx(0.25));
  }
}

TEST_CASE("Adam") {
  SUBCASE("first step") {
    nn::Parameter p("p", 1, 1, 0.0);
    p.grad.fill(1.0);
    nn::AdamState s;
    nn::Parameter* list[] = {&p};
    nn::adam_step(list, s, 0.001);
    CHECK(p.value(0, 0) == doctest::Approx(-0.001 / (1.0 + 1e-8)).epsilon(1e-15));
    CHECK(s.step == 1);
  }
  SUBCASE("zero gradients") {
    nn::Parameter p("p", 2, 2, 3.0);
    nn::AdamState s;
    nn::Parameter* list[] = {&p};
    for (int i = 0; i < 5; ++i) nn::adam_step(list, s, 0.01);
    for (double v : p.value.values()) CHECK(v == 3.0);
    CHECK(s.step == 5);
  }
  SUBCASE("constant gradient drifts at most lr per step") {
    nn::Parameter p("p", 1, 1, 0.0);
    nn::AdamState s;
    nn::Parameter* list[] = {&p};
    double prev = 0.0;
    for (int i = 0; i < 200; ++i) {
      p.grad.fill(0.7);
      nn::adam_step(list, s, 0.01);
      const double step = prev - p.value(0, 0);
      CHECK(step > 0.0);
      CHECK(step <= 0.01 * (1.0 + 1e-12));
      prev = p.value(0, 0);
    }
  }
  SUBCASE("loss falls on a separable toy problem") {
    std::mt19937_64 rng(12);
    nn::Mlp mlp = small_mlp(rng);
    Matrix x = random_matrix(20, 3, rng);
    std::vector<int> labels;
    for (std::size_t r = 0; r < 20; ++r) labels.push_back(x(r, 0) + x(r, 1) > 0 ? 1 : 0);
    nn::AdamState s;
    const auto params = mlp.parameters();
    double first = 0.0, last = 0.0;
    for (int step = 0; step < 100; ++step) {
      for (auto* p : params) p->zero_grad();
      nn::Mlp::Cache cache;
      const auto r = nn::cross_entropy(mlp.forward(x, Mode::Train, &cache), labels);
      mlp.backward(cache, r.grad);
      nn::adam_step(params, s, 0.01);
      (step == 0 ? first : last) = r.loss;
    }
    CHECK(last < first);
  }
}

TEST_CASE("plateau scheduler") {
  SUBCASE("improving metric keeps the rate") {
    nn::PlateauState s;
    for (int e = 0; e < 30; ++e) CHECK(nn::plateau_step(s, 1.0 - 0.01 * e) == 1e-3);
  }
  SUBCASE("eleven flat epochs halve once") {
    nn::PlateauState s;
    for (int e = 0; e < 11; ++e) nn::plateau_step(s, 1.0);
    CHECK(s.lr == 5e-4);
    nn::plateau_step(s, 1.0);
    CHECK(s.lr == 5e-4);
  }
  SUBCASE("floor at min_lr") {
    nn::PlateauState s;
    s.lr = s.min_lr;
    for (int e = 0; e < 50; ++e) nn::plateau_step(s, 1.0);
    CHECK(s.lr == s.min_lr);
  }
}
