#include <catch2/catch_amalgamated.hpp>

#include "acts/andgate.hpp"
#include "acts/train.hpp"
#include "test_helpers.hpp"

using namespace acts;
using namespace testutil;

namespace {

Dataset two_point_dataset() {
  Dataset ds;
  ds.features = {{0.1, 0.1}, {0.9, 0.9}};
  ds.labels = {0, 1};
  ds.ids = {"0", "1"};
  return ds;
}

}  // namespace

TEST_CASE("train_sgd: zero epochs leaves the weights untouched") {
  Network net = make_random_network({2, 4, 2}, {Activation::ReLU, Activation::Identity},
                                    ScoreTransform::NegLogit, 5);
  TrainResult result = train_sgd(net, two_point_dataset(), 0, 0.1, 99);
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    CHECK(result.net.layers()[l].weights.data == net.layers()[l].weights.data);
    CHECK(result.net.layers()[l].bias == net.layers()[l].bias);
  }
}

TEST_CASE("train_sgd: perfectly separates a 2-point linearly separable set") {
  Network net = make_random_network({2, 2}, {Activation::Identity},
                                    ScoreTransform::NegLogit, 3);
  TrainResult result = train_sgd(net, two_point_dataset(), 200, 0.5, 1);
  CHECK(result.accuracy == 1.0);
}

TEST_CASE("train_sgd: deterministic given the seed") {
  Dataset ds = generate_and_dataset(300, Sampling::UniformRandom, 17);
  Network net = make_random_network({2, 8, 2}, {Activation::ReLU, Activation::Identity},
                                    ScoreTransform::NegLogit, 5);
  TrainResult a = train_sgd(net, ds, 3, 0.2, 42);
  TrainResult b = train_sgd(net, ds, 3, 0.2, 42);
  for (std::size_t l = 0; l < a.net.layers().size(); ++l)
    CHECK(a.net.layers()[l].weights.data == b.net.layers()[l].weights.data);
  CHECK(a.accuracy == b.accuracy);
}

TEST_CASE("train_sgd: reaches 0.99 on the AND-gate task") {
  Dataset train = generate_and_dataset(10000, Sampling::UniformRandom, 300);
  Dataset test = generate_and_dataset(2000, Sampling::UniformRandom, 301);
  Network net = make_random_network({2, 8, 2}, {Activation::ReLU, Activation::Identity},
                                    ScoreTransform::NegLogit, 302);
  TrainResult result = train_sgd(net, train, 30, 0.3, 303);
  CHECK(result.accuracy >= 0.99);
  CHECK(accuracy(result.net, test) >= 0.99);
}

TEST_CASE("train_sgd: diverging run raises a typed error") {
  Dataset ds = two_point_dataset();
  Network net = make_random_network({2, 4, 2}, {Activation::Identity, Activation::Identity},
                                    ScoreTransform::NegLogit, 7);
  CHECK_THROWS_AS(train_sgd(net, ds, 50, 1e150, 1), ComputeError);
}

TEST_CASE("train_sgd: validates dataset shape and labels") {
  Network net = make_random_network({2, 2}, {Activation::Identity},
                                    ScoreTransform::NegLogit, 3);
  Dataset empty;
  CHECK_THROWS_AS(train_sgd(net, empty, 1, 0.1, 0), ValidationError);
  Dataset bad = two_point_dataset();
  bad.labels[1] = 2;
  CHECK_THROWS_AS(train_sgd(net, bad, 1, 0.1, 0), ValidationError);
}
