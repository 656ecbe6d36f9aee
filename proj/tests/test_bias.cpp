#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "alignpxtr/bias.hpp"
#include "alignpxtr/serialization.hpp"

using namespace alignpxtr;

namespace {
BiasSpec two_dims() {
  return BiasSpec({{"duration", Continuous{{10.0, 30.0}}}, {"category", Categorical{4}}});
}
}  // namespace

TEST_CASE("continuous readings use half-open buckets") {
  const BiasSpec spec({{"d", Continuous{{10.0, 30.0}}}});
  CHECK(discretize(std::vector<double>{5.0}, spec).indices[0] == 0);
  CHECK(discretize(std::vector<double>{10.0}, spec).indices[0] == 1);
  CHECK(discretize(std::vector<double>{45.0}, spec).indices[0] == 2);
  CHECK(discretize(std::vector<double>{29.999}, spec).indices[0] == 1);
}

TEST_CASE("categorical codes map to themselves") {
  const BiasSpec spec({{"c", Categorical{4}}});
  CHECK(discretize(std::vector<double>{3.0}, spec).indices[0] == 3);
  CHECK_THROWS_AS(discretize(std::vector<double>{4.0}, spec), std::invalid_argument);
  CHECK_THROWS_AS(discretize(std::vector<double>{1.5}, spec), std::invalid_argument);
}

TEST_CASE("discretize rejects bad readings") {
  const auto spec = two_dims();
  CHECK_THROWS_AS(discretize(std::vector<double>{std::nan(""), 1.0}, spec), std::invalid_argument);
  CHECK_THROWS_AS(discretize(std::vector<double>{1.0}, spec), std::invalid_argument);
}

TEST_CASE("spec construction validates dimensions") {
  CHECK_THROWS_AS(BiasSpec(std::vector<BiasDimension>{}), std::invalid_argument);
  CHECK_THROWS_AS(BiasSpec({{"c", Categorical{0}}}), std::invalid_argument);
  CHECK_THROWS_AS(BiasSpec({{"d", Continuous{{}}}}), std::invalid_argument);
  CHECK_THROWS_AS(BiasSpec({{"d", Continuous{{2.0, 1.0}}}}), std::invalid_argument);
  CHECK(two_dims().bucket_combinations() == 12);
}

TEST_CASE("flat index and key enumeration agree") {
  const auto spec = two_dims();
  const auto keys = spec.all_keys();
  REQUIRE(keys.size() == 12);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    CHECK(spec.flat_index(keys[i]) == i);
    CHECK(spec.key_at(i) == keys[i]);
  }
  CHECK_THROWS_AS(spec.validate_key(BiasKey{{3, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(spec.validate_key(BiasKey{{0}}), std::invalid_argument);
}

TEST_CASE("keys render and parse") {
  const BiasKey key{{2, 0, 7}};
  CHECK(key.to_string() == "2,0,7");
  CHECK(BiasKey::parse("2,0,7") == key);
  CHECK_THROWS_AS(BiasKey::parse("2,x"), std::invalid_argument);
}

TEST_CASE("encoding is one-hot for categories and midpoints for ranges") {
  const auto spec = two_dims();
  REQUIRE(spec.encoded_size() == 5);
  const auto e = spec.encode(BiasKey{{1, 2}});
  CHECK(e == std::vector<double>{20.0, 0.0, 0.0, 1.0, 0.0});
  // Open-ended buckets borrow the width of their neighbour.
  CHECK(spec.encode(BiasKey{{0, 0}})[0] == 0.0);
  CHECK(spec.encode(BiasKey{{2, 0}})[0] == 40.0);
}

TEST_CASE("bias spec json round trip") {
  const auto spec = two_dims();
  CHECK(bias_spec_from_json(bias_spec_to_json(spec)) == spec);
}
