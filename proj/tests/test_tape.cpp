#include <doctest.h>

#include <cmath>
#include <vector>

#include "frontierlab/tape.hpp"
#include "test_helpers.hpp"

using namespace frontierlab;

TEST_SUITE("tape") {

TEST_CASE("recorded forward values") {
  Tape tape;
  SUBCASE("add") {
    const NodeId a = tape.leaf(NumArray::vector({1, 2}));
    const NodeId b = tape.leaf(NumArray::vector({3, 4}));
    const NodeId c = tape.add(a, b);
    CHECK(tape.value(c)[0] == 4.0);
    CHECK(tape.value(c)[1] == 6.0);
  }
  SUBCASE("matvec identity") {
    const NodeId w = tape.leaf(NumArray(2, 2, {1, 0, 0, 1}));
    const NodeId x = tape.leaf(NumArray::vector({5, 7}));
    const NodeId y = tape.matvec(w, x);
    CHECK(tape.value(y)[0] == 5.0);
    CHECK(tape.value(y)[1] == 7.0);
  }
  SUBCASE("tanh at zero") {
    const NodeId x = tape.leaf(NumArray::vector({0.0}));
    CHECK(tape.value(tape.tanh(x))[0] == 0.0);
  }
  SUBCASE("shape mismatch is an error") {
    const NodeId a = tape.leaf(NumArray::vector({1, 2}));
    const NodeId b = tape.leaf(NumArray::vector({1, 2, 3}));
    CHECK_THROWS_AS((void)tape.add(a, b), std::invalid_argument);
  }
  SUBCASE("non-finite result is a numeric error") {
    const NodeId a = tape.leaf(NumArray::vector({1.0, 0.0}));
    const NodeId b = tape.leaf(NumArray::vector({0.0, 0.0}));
    CHECK_THROWS_AS((void)tape.div(a, b), NumericError);
  }
}

TEST_CASE("backward basics") {
  SUBCASE("x^2 at 3") {
    Tape tape;
    const NodeId x = tape.leaf(NumArray::scalar(3.0));
    const NodeId loss = tape.square(x);
    tape.backward(loss);
    CHECK(tape.grad(x)[0] == doctest::Approx(6.0));
  }
  SUBCASE("tanh at 0") {
    Tape tape;
    const NodeId x = tape.leaf(NumArray::scalar(0.0));
    tape.backward(tape.tanh(x));
    CHECK(tape.grad(x)[0] == doctest::Approx(1.0));
  }
  SUBCASE("mean of a batch") {
    Tape tape;
    const NodeId x = tape.leaf(NumArray::vector({1, 2, 3}));
    tape.backward(tape.mean(x));
    for (int i = 0; i < 3; ++i)
      CHECK(tape.grad(x)[i] == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("seed must be scalar") {
    Tape tape;
    const NodeId x = tape.leaf(NumArray::vector({1, 2}));
    CHECK_THROWS_AS(tape.backward(x), std::invalid_argument);
  }
}

TEST_CASE("kink subgradient conventions are exact") {
  Tape tape;
  const NodeId x = tape.leaf(NumArray::vector({-1.0, 0.0, 0.5, 1.0, 2.0}));
  SUBCASE("positive part: 1 for x>0, 0 for x<=0") {
    tape.backward(tape.sum(tape.pos(x)));
    const NumArray& g = tape.grad(x);
    CHECK(g[0] == 0.0);
    CHECK(g[1] == 0.0);
    CHECK(g[2] == 1.0);
    CHECK(g[3] == 1.0);
  }
  SUBCASE("abs: sign with 0 at 0") {
    tape.backward(tape.sum(tape.abs(x)));
    const NumArray& g = tape.grad(x);
    CHECK(g[0] == -1.0);
    CHECK(g[1] == 0.0);
    CHECK(g[2] == 1.0);
  }
  SUBCASE("clip: pass-through strictly inside, 0 at and beyond boundaries") {
    tape.backward(tape.sum(tape.clip(x, 0.0, 1.0)));
    const NumArray& g = tape.grad(x);
    CHECK(g[0] == 0.0);  // below
    CHECK(g[1] == 0.0);  // at lower boundary
    CHECK(g[2] == 1.0);  // inside
    CHECK(g[3] == 0.0);  // at upper boundary
    CHECK(g[4] == 0.0);  // above
  }
}

TEST_CASE("batch variance value and gradient are exact") {
  Tape tape;
  const std::vector<double> values{1.0, 2.0, 4.0, 7.0};
  const NodeId x = tape.leaf(NumArray::vector({1.0, 2.0, 4.0, 7.0}));
  const NodeId v = tape.variance(x);
  const double mean = 3.5;
  double expected = 0.0;
  for (double xi : values) expected += (xi - mean) * (xi - mean);
  expected /= 4.0;
  CHECK(tape.value(v)[0] == doctest::Approx(expected).epsilon(1e-15));

  tape.backward(v);
  for (std::size_t i = 0; i < values.size(); ++i)
    CHECK(tape.grad(x)[i] ==
          doctest::Approx(2.0 / 4.0 * (values[i] - mean)).epsilon(1e-14));

  // Against the independent finite-difference oracle.
  auto f = [](const std::vector<double>& in) {
    double m = 0.0;
    for (double v2 : in) m += v2;
    m /= static_cast<double>(in.size());
    double acc = 0.0;
    for (double v2 : in) acc += (v2 - m) * (v2 - m);
    return acc / static_cast<double>(in.size());
  };
  const auto fd = testing::central_differences(f, values);
  CHECK(testing::gradients_match(testing::flatten(tape.grad(x)), fd));
}

TEST_CASE("two backward passes give bitwise-identical gradients") {
  Tape tape;
  const NodeId x = tape.leaf(NumArray::vector({0.3, -0.7, 1.9}));
  const NodeId y = tape.leaf(NumArray::vector({1.1, 0.2, -0.4}));
  const NodeId loss =
      tape.mean(tape.square(tape.add(tape.tanh(x), tape.mul(x, y))));
  tape.backward(loss);
  const NumArray g1 = tape.grad(x);
  const NumArray g2 = tape.grad(y);
  tape.backward(loss);
  CHECK(tape.grad(x) == g1);
  CHECK(tape.grad(y) == g2);
}

TEST_CASE("tail mean selects the k largest and routes gradient to them") {
  Tape tape;
  const NodeId x = tape.leaf(NumArray::vector({5, 1, 9, 7, 3}));
  const NodeId t = tape.tail_mean_largest(x, 2);
  CHECK(tape.value(t)[0] == doctest::Approx(8.0));
  tape.backward(t);
  const NumArray& g = tape.grad(x);
  CHECK(g[2] == doctest::Approx(0.5));
  CHECK(g[3] == doctest::Approx(0.5));
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 0.0);
  CHECK(g[4] == 0.0);
}

TEST_CASE("concat and slice round-trip the columns") {
  Tape tape;
  const NodeId a = tape.leaf(NumArray::vector({1, 2}));
  const NodeId b = tape.leaf(NumArray::vector({3, 4}));
  const std::vector<NodeId> cols{a, b};
  const NodeId m = tape.concat_cols(cols);
  CHECK(tape.value(m)(0, 1) == 3.0);
  CHECK(tape.value(m)(1, 0) == 2.0);
  const NodeId back = tape.slice_col(m, 1);
  CHECK(tape.value(back)[0] == 3.0);
  tape.backward(tape.sum(back));
  CHECK(tape.grad(b)[0] == 1.0);
  CHECK(tape.grad(a)[0] == 0.0);
}

}  // TEST_SUITE
