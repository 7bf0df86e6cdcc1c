#include <algorithm>
#include <cmath>
#include <random>
#include <tuple>

#include "doctest.h"
#include "support.hpp"

#include "dfprune/error.hpp"
#include "dfprune/pruner.hpp"
#include "dfprune/saliency.hpp"

using namespace dfprune;

namespace {

// Two inputs, two relu hidden units, two outputs. Unit 0 has incoming (1, 0),
// unit 1 has (0, 1); both biases 1; unit 0's outgoing weights are {1, 3}.
Network saliency_example() {
  Network net;
  net.input_dim = 2;
  set_uniform_input_bounds(net, 0.0f, 1.0f);
  DenseLayer hidden(2, 2, ActivationKind::relu);
  hidden.weights = {1, 0, 0, 1};
  hidden.bias = {1, 1};
  DenseLayer out(2, 2, ActivationKind::identity);
  out.weights = {1, 3, 2, -1};
  net.layers = {hidden, out};
  return net;
}

}  // namespace

TEST_SUITE("saliency") {

TEST_CASE("worked example") {
  const Network net = saliency_example();
  // mean{1, 3} * (||(1,0) - (0,1)||_2 + 0)
  CHECK(saliency(net, 0, 0, 1) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(std::abs(saliency(net, 0, 0, 1) - 2.8284) < 1e-4);
  // l1 normalisation of the same sum: 4 / 4
  SaliencyOptions l1;
  l1.denominator = SaliencyDenominator::l1;
  CHECK(saliency(net, 0, 0, 1, l1) == doctest::Approx(std::sqrt(2.0)));
  // unit 1 -> 0: mean{2, -1} = 0.5
  CHECK(saliency(net, 0, 1, 0) == doctest::Approx(0.5 * std::sqrt(2.0)));
}

TEST_CASE("bias term") {
  Network net = saliency_example();
  net.layers[0].bias = {1, 3};
  // 2 * (sqrt 2 + |1 - 3| / |1 + 3|)
  CHECK(saliency(net, 0, 0, 1) == doctest::Approx(2.0 * (std::sqrt(2.0) + 0.5)));
}

TEST_CASE("identical units or zero outgoing sum give zero") {
  Network net = saliency_example();
  net.layers[0].weights = {0.3f, 0.3f, -0.7f, -0.7f};
  net.layers[0].bias = {0.2f, 0.2f};
  CHECK(saliency(net, 0, 0, 1) == 0.0);
  CHECK(saliency(net, 0, 1, 0) == 0.0);

  net = saliency_example();
  net.layers[1].weights = {2, -2, 2, -1};
  CHECK(saliency(net, 0, 0, 1) == 0.0);
}

TEST_CASE("invalid pairs") {
  Network net = saliency_example();
  CHECK_THROWS(saliency(net, 0, 0, 0));
  CHECK_THROWS(saliency(net, 1, 0, 1));
  CHECK_THROWS(saliency(net, 0, 0, 5));
  prune_pair(net, 0, 1, 0);
  CHECK_THROWS(saliency_list(net, 0));
}

TEST_CASE("list holds every ordered pair, sorted") {
  std::mt19937_64 rng(3);
  Network net = test::random_network({4, 3, 2}, ActivationKind::relu, rng);
  CHECK(saliency_list(net, 0).size() == 6);

  net = test::random_network({5, 7, 6, 3}, ActivationKind::sigmoid, rng);
  prune_pair(net, 0, 4, 2);
  const auto list = saliency_list(net, 0);
  CHECK(list.size() == 6 * 5);

  // Oracle: enumerate, then sort by the documented key.
  std::vector<std::tuple<double, std::size_t, std::size_t>> expect;
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t j = 0; j < 7; ++j) {
      if (i != j && i != 4 && j != 4) expect.emplace_back(saliency(net, 0, i, j), i, j);
    }
  }
  std::sort(expect.begin(), expect.end());
  REQUIRE(expect.size() == list.size());
  for (std::size_t n = 0; n < list.size(); ++n) {
    CHECK(list[n].layer == 0);
    CHECK(list[n].saliency == std::get<0>(expect[n]));
    CHECK(list[n].nominee == std::get<1>(expect[n]));
    CHECK(list[n].delegate == std::get<2>(expect[n]));
  }
}

TEST_CASE("identical unit pair sorts first") {
  std::mt19937_64 rng(6);
  Network net = test::random_network({4, 5, 3}, ActivationKind::relu, rng);
  auto& hidden = net.layers[0];
  for (std::size_t i = 0; i < hidden.fan_in; ++i) hidden.weight(i, 3) = hidden.weight(i, 1);
  hidden.bias[3] = hidden.bias[1];
  // keep every other saliency positive
  for (auto& w : net.layers[1].weights) w = std::abs(w) + 0.1f;
  const auto list = saliency_list(net, 0);
  CHECK(list[0] == CandidatePair{0, 1, 3, 0.0});
  CHECK(list[1] == CandidatePair{0, 3, 1, 0.0});
}

TEST_CASE("saliency depends only on the adjacent layers") {
  std::mt19937_64 rng(7);
  Network net = test::random_network({4, 5, 5, 3}, ActivationKind::relu, rng);
  const auto before = saliency_list(net, 0);
  for (auto& w : net.layers[2].weights) w *= 3.0f;
  net.layers[1].bias[0] += 1.0f;
  CHECK(saliency_list(net, 0) == before);
  CHECK(saliency_list(net, 0) == before);  // deterministic
}

}  // TEST_SUITE
