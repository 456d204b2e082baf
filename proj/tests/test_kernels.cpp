#include "polynet/nn/kernels.hpp"
#include "polynet/nn/matrix.hpp"

#include "support.hpp"

#include <cmath>
#include <random>

using namespace polynet;
namespace k = polynet::nn::kernels;

namespace {

std::vector<double> random_values(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

// Plain triple loop, independent of either kernel table.
double naive(std::size_t r, std::size_t c, std::size_t kk, const std::vector<double>& a, const std::vector<double>& b,
             std::size_t m, std::size_t n, char op) {
  double s = 0.0;
  for (std::size_t t = 0; t < kk; ++t) {
    const double x = op == 't' ? a[t * m + r] : a[r * kk + t];
    const double y = op == 'n' ? b[c * kk + t] : b[t * n + c];
    s += x * y;
  }
  return s;
}

struct Shape {
  std::size_t m, n, k;
};

const Shape kShapes[] = {{1, 1, 1}, {3, 5, 7}, {4, 4, 4}, {8, 8, 8}, {17, 13, 9},
                         {33, 64, 65}, {2, 70, 131}, {64, 3, 5}, {5, 1, 12}, {0, 4, 3}};

void check_table(const k::KernelTable& table) {
  std::mt19937_64 rng(11);
  for (const auto& [m, n, kk] : kShapes) {
    const auto a = random_values(m * kk, rng);
    const auto bn = random_values(kk * n, rng);
    const auto bt = random_values(n * kk, rng);
    const auto init = random_values(m * n, rng);
    for (bool acc : {false, true}) {
      std::vector<double> c1 = init, c2 = init, c3 = init;
      table.gemm_nn(m, n, kk, a.data(), bn.data(), c1.data(), acc);
      table.gemm_nt(m, n, kk, a.data(), bt.data(), c2.data(), acc);
      table.gemm_tn(m, n, kk, a.data(), bn.data(), c3.data(), acc);
      for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
          const double base = acc ? init[r * n + c] : 0.0;
          const double tol = 1e-13 * static_cast<double>(kk + 1);
          CHECK(std::abs(c1[r * n + c] - (base + naive(r, c, kk, a, bn, m, n, 'x'))) < tol);
          CHECK(std::abs(c2[r * n + c] - (base + naive(r, c, kk, a, bt, m, n, 'n'))) < tol);
          CHECK(std::abs(c3[r * n + c] - (base + naive(r, c, kk, a, bn, m, n, 't'))) < tol);
        }
      }
    }
  }
}

}  // namespace

TEST_CASE("scalar kernels match a naive product") { check_table(k::scalar_table()); }

TEST_CASE("AVX2 kernels match the scalar reference") {
  const k::KernelTable* fast = k::avx2_table();
  if (!fast) {
    MESSAGE("AVX2 kernels unavailable here; equivalence not exercised");
    return;
  }
  check_table(*fast);

  std::mt19937_64 rng(5);
  for (const auto& [m, n, kk] : kShapes) {
    const auto a = random_values(m * kk, rng);
    const auto b = random_values(kk * n, rng);
    std::vector<double> ref(m * n), vec(m * n);
    k::scalar_table().gemm_nn(m, n, kk, a.data(), b.data(), ref.data(), false);
    fast->gemm_nn(m, n, kk, a.data(), b.data(), vec.data(), false);
    for (std::size_t i = 0; i < ref.size(); ++i)
      CHECK(std::abs(ref[i] - vec[i]) <= 1e-14 * (1.0 + std::abs(ref[i])) * static_cast<double>(kk));
  }
}

TEST_CASE("backend selection") {
  const auto before = k::active_backend();
  k::select(k::Backend::Scalar);
  CHECK(k::active_backend() == k::Backend::Scalar);
  CHECK(&k::active() == &k::scalar_table());
  if (k::avx2_table()) {
    k::select(k::Backend::Avx2);
    CHECK(k::active_backend() == k::Backend::Avx2);
  } else {
    test::require_error(ErrorCode::Config, [] { k::select(k::Backend::Avx2); });
  }
  k::select(before);
}

TEST_CASE("matrix products go through the active table") {
  nn::Matrix a(2, 3), b(3, 2);
  for (std::size_t i = 0; i < 6; ++i) {
    a.values()[i] = static_cast<double>(i + 1);
    b.values()[i] = static_cast<double>(6 - i);
  }
  const nn::Matrix c = nn::matmul_nn(a, b);
  CHECK(c(0, 0) == 20.0);
  CHECK(c(0, 1) == 14.0);
  CHECK(c(1, 0) == 56.0);
  CHECK(c(1, 1) == 41.0);
  nn::Matrix bt(2, 3);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t col = 0; col < 2; ++col) bt(col, r) = b(r, col);
  const nn::Matrix d = nn::matmul_nt(a, bt);
  CHECK(d.values() == c.values());
  nn::Matrix at(3, 2);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t col = 0; col < 3; ++col) at(col, r) = a(r, col);
  nn::Matrix e(2, 2, 1.0);
  nn::matmul_tn_accumulate(at, b, e);
  for (std::size_t i = 0; i < 4; ++i) CHECK(e.values()[i] == c.values()[i] + 1.0);
}
