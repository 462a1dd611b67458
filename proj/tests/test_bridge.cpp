#include <gtest/gtest.h>

#include "harsanyi/bridge.hpp"
#include "harsanyi/experiments.hpp"

using namespace harsanyi;

namespace {

const std::string kEvaluator = HARSANYI_REFERENCE_EVALUATOR;

std::string evaluator(const std::string& args) { return "'" + kEvaluator + "' " + args; }

std::vector<double> sample10() {
  return {0.3, -1.2, 0.8, 0.05, 2.0, -0.4, 1.1, -0.9, 0.6, 0.0};
}

}  // namespace

TEST(Codec, RequestRoundTrip) {
  const EvalRequest r{42, {0.1, -2.5}, {0.0, 1.0}, "10"};
  const auto back = decode_request(encode_request(r));
  EXPECT_EQ(back.id, 42);
  EXPECT_EQ(back.sample, r.sample);
  EXPECT_EQ(back.baseline, r.baseline);
  EXPECT_EQ(back.mask, "10");
  EXPECT_THROW(encode_request({1, {0.1}, {0.0, 1.0}, "1"}), DimensionError);
  EXPECT_THROW(decode_request(R"({"id":1,"sample":[1],"baseline":[0],"mask":"2"})"), ProtocolError);
}

TEST(Codec, ResponseNonFiniteNamesId) {
  EXPECT_EQ(decode_response(encode_response({7, 0.1})).value, 0.1);
  try {
    decode_response(encode_response({9, NAN}));
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_NE(std::string(e.what()).find("9"), std::string::npos);
  }
  EXPECT_THROW(decode_response(R"({"id": 3, "value": Infinity})"), ProtocolError);
  EXPECT_THROW(decode_response(R"({"value": 1.0})"), ProtocolError);
  EXPECT_THROW(decode_response(R"({"id": 3})"), ProtocolError);
  EXPECT_THROW(decode_response("{oops"), ProtocolError);
}

TEST(Bridge, PopcountEvaluator) {
  EvaluatorProcess p(evaluator("--mode popcount"));
  const auto t = bridge_value_table(p, std::vector<double>{1, 1}, std::vector<double>{0, 0});
  EXPECT_EQ(std::vector<double>(t.entries().begin(), t.entries().end()), (std::vector<double>{0, 1, 1, 2}));
}

TEST(Bridge, ProcessIsReusableAcrossTables) {
  EvaluatorProcess p(evaluator("--mode linear"));
  const std::vector<double> x{1, 2, 3}, b{0, 0, 0};
  const auto a = bridge_value_table(p, x, b, 0);
  const auto c = bridge_value_table(p, x, b, 8);
  EXPECT_EQ(a, c);
  EXPECT_EQ(a[7], 1 * 1 + 2 * 2 + 3 * 3);
}

TEST(Bridge, OutOfOrderAnswersMatchInProcessExactly) {
  const auto model = init_model({{10, 16, 16, 4}, 3, 1.0});
  const auto path = (std::filesystem::temp_directory_path() / "harsanyi_bridge_model.json").string();
  save_model(path, model);
  const auto x = sample10();
  const std::vector<double> b(10, 0.1);
  EvaluatorProcess p(evaluator("--mode mlp --class 2 --reverse 13 --model '" + path + "'"), {30.0, 32});
  const auto via_bridge = bridge_value_table(p, x, b, 0, true);
  const auto local = build_value_table(
      [&](const VariableSet& s) { return logit_value(model.forward(apply_mask(x, b, s)), 2); }, 10);
  EXPECT_EQ(via_bridge, local);
  std::filesystem::remove(path);
}

TEST(Bridge, NanValueNamesId) {
  EvaluatorProcess p(evaluator("--mode nan"));
  try {
    bridge_value_table(p, std::vector<double>{1, 1}, std::vector<double>{0, 0}, 5);
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_NE(std::string(e.what()).find("response 5"), std::string::npos) << e.what();
  }
}

class BridgeFault : public ::testing::TestWithParam<std::pair<const char*, const char*>> {};

TEST_P(BridgeFault, RaisesProtocolError) {
  const auto [fault, message] = GetParam();
  EvaluatorProcess p(evaluator(std::string("--fault ") + fault + " --fault-at 3"), {1.0, 64});
  try {
    bridge_value_table(p, std::vector<double>{1, 1, 1}, std::vector<double>{0, 0, 0}, 0, true);
    FAIL() << "no error for fault " << fault;
  } catch (const ProtocolError& e) {
    EXPECT_NE(std::string(e.what()).find(message), std::string::npos) << e.what();
  }
}

INSTANTIATE_TEST_SUITE_P(Faults, BridgeFault,
                         ::testing::Values(std::make_pair("malformed", "malformed"),
                                           std::make_pair("duplicate", "duplicate response for id 3"),
                                           std::make_pair("drop", "first missing id 3"),
                                           std::make_pair("hang", "timeout"),
                                           std::make_pair("unknown", "unknown id")));

TEST(Bridge, CommandThatExitsImmediately) {
  EvaluatorProcess p("true");
  EXPECT_THROW(bridge_value_table(p, std::vector<double>{1}, std::vector<double>{0}), ProtocolError);
}
