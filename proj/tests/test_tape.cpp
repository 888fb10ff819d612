#include <doctest.h>

#include <functional>

#include "proxnas/finite_diff.hpp"
#include "proxnas/tape.hpp"
#include "support/gradcheck.hpp"

using namespace proxnas;
using namespace proxnas::testing;

namespace {

Matrix row(std::initializer_list<double> xs) {
  Matrix m(1, static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) m(0, i++) = x;
  return m;
}

}  // namespace

TEST_SUITE_BEGIN("tape");

TEST_CASE("elementwise add") {
  Tape tape;
  Var a = tape.input(row({1, 2}));
  Var b = tape.input(row({3, 4}));
  Var c = tape.add(a, b);
  CHECK(tape.value(c)(0, 0) == 4.0);
  CHECK(tape.value(c)(0, 1) == 6.0);
}

TEST_CASE("matmul with the identity is the identity") {
  Tape tape;
  Matrix x(2, 1);
  x << 0.3, -1.7;
  Var xi = tape.input(x);
  Var id = tape.input(Matrix::Identity(2, 2));
  Var y = tape.matmul(id, xi);
  CHECK(tape.value(y) == x);
}

TEST_CASE("relu clamps negatives") {
  Tape tape;
  Var x = tape.input(row({-1, 2}));
  Var y = tape.relu(x);
  CHECK(tape.value(y)(0, 0) == 0.0);
  CHECK(tape.value(y)(0, 1) == 2.0);
}

TEST_CASE("shape mismatch names both shapes") {
  Tape tape;
  Var a = tape.input(Matrix::Zero(2, 3));
  Var b = tape.input(Matrix::Zero(4, 2));
  CHECK_THROWS_WITH_AS(tape.matmul(a, b), doctest::Contains("2x3"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(tape.add(a, b), doctest::Contains("4x2"), std::invalid_argument);
}

TEST_CASE("gradient requires a scalar output") {
  Tape tape;
  Var a = tape.input(Matrix::Zero(2, 2));
  Var b = tape.relu(a);
  CHECK_THROWS_AS((void)tape.gradient(b, std::span<const Var>(&a, 1)), std::invalid_argument);
}

TEST_CASE("d(x*x)/dx = 2x at x = 3") {
  Tape tape;
  Var x = tape.input(Matrix::Constant(1, 1, 3.0));
  Var y = tape.multiply(x, x);
  const Matrix g = tape.gradient(y, std::span<const Var>(&x, 1))[0];
  CHECK(g(0, 0) == doctest::Approx(6.0));
}

TEST_CASE("relu subgradient at the kink is 0") {
  Tape tape;
  Var x = tape.input(row({-1, 2}));
  Var s = tape.sum(tape.relu(x));
  const Matrix g = tape.gradient(s, std::span<const Var>(&x, 1))[0];
  CHECK(g(0, 0) == 0.0);
  CHECK(g(0, 1) == 1.0);

  Tape t2;
  Var z = t2.input(row({0.0}));
  Var s2 = t2.sum(t2.relu(z));
  CHECK(t2.gradient(s2, std::span<const Var>(&z, 1))[0](0, 0) == 0.0);
}

TEST_CASE("cross-entropy gradient matches finite differences on random 3x3") {
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = random_matrix(3, 3, rng);
    const Matrix w0 = random_matrix(3, 3, rng);
    IntVector labels(3);
    for (int i = 0; i < 3; ++i) labels(i) = static_cast<int>(rng.below(3));

    auto build = [&](const Matrix& w) {
      Tape tape;
      Var xv = tape.input(x);
      Var wv = tape.input(w);
      return tape.scalar(tape.softmax_cross_entropy(tape.matmul(xv, wv), labels));
    };
    Tape tape;
    Var xv = tape.input(x);
    Var wv = tape.input(w0);
    Var loss = tape.softmax_cross_entropy(tape.matmul(xv, wv), labels);
    const Matrix g = tape.gradient(loss, std::span<const Var>(&wv, 1))[0];
    CHECK(check_gradient(build, w0, g) < kGradTol);
  }
}

TEST_CASE("every primitive agrees with finite differences over seeded instances") {
  // One scalar composition per primitive; >= 100 instances each.
  struct Check {
    const char* name;
    std::function<double(Rng&)> run;  // returns relative error for one instance
  };

  auto simple_unary = [](auto record, bool away_from_zero) {
    return [record, away_from_zero](Rng& rng) {
      const int r = 1 + static_cast<int>(rng.below(4));
      const int c = 1 + static_cast<int>(rng.below(4));
      const Matrix x0 = away_from_zero ? random_matrix_away_from_zero(r, c, rng)
                                       : random_matrix(r, c, rng, -2.0, 2.0);
      auto build = [&](const Matrix& x) {
        Tape t;
        Var xv = t.input(x);
        return t.scalar(t.sum(record(t, xv)));
      };
      Tape t;
      Var xv = t.input(x0);
      Var s = t.sum(record(t, xv));
      const Matrix g = t.gradient(s, std::span<const Var>(&xv, 1))[0];
      return check_gradient(build, x0, g);
    };
  };

  std::vector<Check> checks;
  checks.push_back({"relu", simple_unary([](Tape& t, Var v) { return t.relu(v); }, true)});
  checks.push_back({"tanh", simple_unary([](Tape& t, Var v) { return t.tanh(v); }, false)});
  checks.push_back({"sigmoid", simple_unary([](Tape& t, Var v) { return t.sigmoid(v); }, false)});
  checks.push_back(
      {"scale", simple_unary([](Tape& t, Var v) { return t.scale(v, -1.7); }, false)});
  checks.push_back({"sum", simple_unary([](Tape& t, Var v) { return v; }, false)});

  checks.push_back({"matmul", [](Rng& rng) {
                      const Matrix a0 = random_matrix(3, 4, rng);
                      const Matrix b = random_matrix(4, 2, rng);
                      auto build = [&](const Matrix& a) {
                        Tape t;
                        return t.scalar(t.sum(t.tanh(t.matmul(t.input(a), t.input(b)))));
                      };
                      Tape t;
                      Var av = t.input(a0);
                      Var s = t.sum(t.tanh(t.matmul(av, t.input(b))));
                      const Matrix g = t.gradient(s, std::span<const Var>(&av, 1))[0];
                      return check_gradient(build, a0, g);
                    }});

  checks.push_back({"add", [](Rng& rng) {
                      const Matrix a0 = random_matrix(3, 3, rng);
                      const Matrix b = random_matrix(3, 3, rng);
                      const Matrix c = random_matrix(3, 3, rng);
                      auto build = [&](const Matrix& a) {
                        Tape t;
                        return t.scalar(
                            t.sum(t.multiply(t.add(t.input(a), t.input(b)), t.input(c))));
                      };
                      Tape t;
                      Var av = t.input(a0);
                      Var s = t.sum(t.multiply(t.add(av, t.input(b)), t.input(c)));
                      const Matrix g = t.gradient(s, std::span<const Var>(&av, 1))[0];
                      return check_gradient(build, a0, g);
                    }});

  checks.push_back({"multiply", [](Rng& rng) {
                      const Matrix a0 = random_matrix(2, 5, rng);
                      const Matrix b = random_matrix(2, 5, rng);
                      auto build = [&](const Matrix& a) {
                        Tape t;
                        return t.scalar(t.sum(t.multiply(t.input(a), t.input(b))));
                      };
                      Tape t;
                      Var av = t.input(a0);
                      Var s = t.sum(t.multiply(av, t.input(b)));
                      const Matrix g = t.gradient(s, std::span<const Var>(&av, 1))[0];
                      return check_gradient(build, a0, g);
                    }});

  checks.push_back({"multiply-scalar-broadcast", [](Rng& rng) {
                      const Matrix c0 = random_matrix(1, 1, rng);
                      const Matrix b = random_matrix(3, 4, rng);
                      auto build = [&](const Matrix& c) {
                        Tape t;
                        return t.scalar(t.sum(t.tanh(t.multiply(t.input(c), t.input(b)))));
                      };
                      Tape t;
                      Var cv = t.input(c0);
                      Var s = t.sum(t.tanh(t.multiply(cv, t.input(b))));
                      const Matrix g = t.gradient(s, std::span<const Var>(&cv, 1))[0];
                      return check_gradient(build, c0, g);
                    }});

  checks.push_back({"softmax_rows", [](Rng& rng) {
                      const Matrix a0 = random_matrix(3, 5, rng, -2.0, 2.0);
                      const Matrix c = random_matrix(3, 5, rng);
                      auto build = [&](const Matrix& a) {
                        Tape t;
                        return t.scalar(
                            t.sum(t.multiply(t.softmax_rows(t.input(a)), t.input(c))));
                      };
                      Tape t;
                      Var av = t.input(a0);
                      Var s = t.sum(t.multiply(t.softmax_rows(av), t.input(c)));
                      const Matrix g = t.gradient(s, std::span<const Var>(&av, 1))[0];
                      return check_gradient(build, a0, g);
                    }});

  checks.push_back({"entry", [](Rng& rng) {
                      const Matrix a0 = random_matrix(3, 3, rng);
                      const Matrix b = random_matrix(3, 3, rng);
                      const int i = static_cast<int>(rng.below(3));
                      const int j = static_cast<int>(rng.below(3));
                      auto build = [&](const Matrix& a) {
                        Tape t;
                        return t.scalar(t.entry(t.tanh(t.matmul(t.input(a), t.input(b))), i, j));
                      };
                      Tape t;
                      Var av = t.input(a0);
                      Var s = t.entry(t.tanh(t.matmul(av, t.input(b))), i, j);
                      const Matrix g = t.gradient(s, std::span<const Var>(&av, 1))[0];
                      return check_gradient(build, a0, g);
                    }});

  checks.push_back({"softmax_cross_entropy", [](Rng& rng) {
                      const int n = 2 + static_cast<int>(rng.below(4));
                      const int k = 2 + static_cast<int>(rng.below(3));
                      const Matrix l0 = random_matrix(n, k, rng, -2.0, 2.0);
                      IntVector labels(n);
                      for (int i = 0; i < n; ++i) {
                        labels(i) = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
                      }
                      auto build = [&](const Matrix& l) {
                        Tape t;
                        return t.scalar(t.softmax_cross_entropy(t.input(l), labels));
                      };
                      Tape t;
                      Var lv = t.input(l0);
                      Var s = t.softmax_cross_entropy(lv, labels);
                      const Matrix g = t.gradient(s, std::span<const Var>(&lv, 1))[0];
                      return check_gradient(build, l0, g);
                    }});

  checks.push_back({"mean_squared_error", [](Rng& rng) {
                      const Matrix p0 = random_matrix(4, 3, rng);
                      const Matrix target = random_matrix(4, 3, rng);
                      auto build = [&](const Matrix& p) {
                        Tape t;
                        return t.scalar(t.mean_squared_error(t.input(p), target));
                      };
                      Tape t;
                      Var pv = t.input(p0);
                      Var s = t.mean_squared_error(pv, target);
                      const Matrix g = t.gradient(s, std::span<const Var>(&pv, 1))[0];
                      return check_gradient(build, p0, g);
                    }});

  for (const Check& check : checks) {
    CAPTURE(check.name);
    Rng rng(777);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) worst = std::max(worst, check.run(rng));
    CHECK_MESSAGE(worst < kGradTol, check.name << " worst rel error " << worst);
  }
}

TEST_CASE("rebuilt tapes and repeated backward passes are bit-identical") {
  auto run = []() {
    Rng rng(31);
    Tape tape;
    Var x = tape.input(random_matrix(4, 3, rng));
    Var w = tape.input(random_matrix(3, 3, rng));
    IntVector labels(4);
    for (int i = 0; i < 4; ++i) labels(i) = static_cast<int>(rng.below(3));
    Var loss = tape.softmax_cross_entropy(tape.tanh(tape.matmul(x, w)), labels);
    const Matrix g1 = tape.gradient(loss, std::span<const Var>(&w, 1))[0];
    const Matrix g2 = tape.gradient(loss, std::span<const Var>(&w, 1))[0];
    REQUIRE(g1 == g2);  // same tape, repeated backward
    return std::make_pair(tape.scalar(loss), g1);
  };
  const auto [l1, g1] = run();
  const auto [l2, g2] = run();
  CHECK(l1 == l2);
  CHECK(g1 == g2);
}

TEST_CASE("record dispatches plain primitives") {
  Tape tape;
  Var a = tape.input(row({1, -2, 3}));
  std::vector<Var> in{a};
  Var r = tape.record(Primitive::kRelu, in);
  CHECK(tape.value(r)(0, 1) == 0.0);
  CHECK_THROWS_AS(tape.record(Primitive::kScale, in), std::invalid_argument);
}

TEST_CASE("finite difference oracle on closed forms") {
  auto square = [](const Matrix& x) { return x(0, 0) * x(0, 0); };
  const Matrix at = Matrix::Constant(1, 1, 3.0);
  CHECK(finite_difference_gradient(square, at, 1e-4)(0, 0) == doctest::Approx(6.0).epsilon(1e-7));

  auto total = [](const Matrix& x) { return x.sum(); };
  const Matrix g = finite_difference_gradient(total, Matrix::Random(3, 3), 1e-4);
  CHECK((g.array() - 1.0).abs().maxCoeff() < 1e-9);

  auto tanh0 = [](const Matrix& x) { return std::tanh(x(0, 0)); };
  CHECK(finite_difference_gradient(tanh0, Matrix::Zero(1, 1), 1e-4)(0, 0) ==
        doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("finite difference rejects non-finite objectives and bad steps") {
  auto bad = [](const Matrix& x) { return std::log(x(0, 0)); };
  CHECK_THROWS_AS(finite_difference_gradient(bad, Matrix::Zero(1, 1), 1e-4), std::domain_error);
  auto fine = [](const Matrix& x) { return x.sum(); };
  CHECK_THROWS_AS(finite_difference_gradient(fine, Matrix::Zero(1, 1), 0.0),
                  std::invalid_argument);
}

TEST_SUITE_END();
