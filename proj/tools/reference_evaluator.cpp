// Reference evaluator speaking the line protocol on stdin/stdout.
// Used by the bridge tests and the samples; the fault modes exercise the
// client's error handling.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "harsanyi/bridge.hpp"
#include "harsanyi/mlp.hpp"

using namespace harsanyi;

namespace {

double evaluate(const std::string& mode, const EvalRequest& r, const std::optional<MlpModel>& model,
                int cls) {
  const auto x = apply_mask(r.sample, r.baseline, VariableSet::from_bitstring(r.mask));
  if (mode == "popcount") return static_cast<double>(std::count(r.mask.begin(), r.mask.end(), '1'));
  if (mode == "linear") {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += static_cast<double>(i + 1) * x[i];
    return s;
  }
  if (mode == "nan") return std::numeric_limits<double>::quiet_NaN();
  // mlp
  const Eigen::VectorXd out = model->forward(x);
  return cls < 0 ? out[0] : logit_value(out, cls);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reference evaluator for the harsanyi line protocol"};
  std::string mode = "popcount", model_path, fault = "none";
  int cls = -1;
  std::size_t reverse = 1;
  long long fault_at = 0;
  app.add_option("--mode", mode, "popcount, linear, mlp or nan")
      ->check(CLI::IsMember({"popcount", "linear", "mlp", "nan"}));
  app.add_option("--model", model_path, "Weight file for --mode mlp")->check(CLI::ExistingFile);
  app.add_option("--class", cls, "Logit of this class as value (default: raw output 0)");
  app.add_option("--reverse", reverse, "Answer in reversed blocks of this many requests");
  app.add_option("--fault", fault, "none, malformed, duplicate, drop, hang or unknown")
      ->check(CLI::IsMember({"none", "malformed", "duplicate", "drop", "hang", "unknown"}));
  app.add_option("--fault-at", fault_at, "Request id that triggers the fault");
  CLI11_PARSE(app, argc, argv);

  std::optional<MlpModel> model;
  if (mode == "mlp") {
    if (model_path.empty()) {
      std::cerr << "--mode mlp needs --model\n";
      return 2;
    }
    model = load_model(model_path);
  }
  reverse = std::max<std::size_t>(reverse, 1);

  std::vector<std::string> pending;
  auto flush = [&] {
    for (auto it = pending.rbegin(); it != pending.rend(); ++it) std::cout << *it << '\n';
    pending.clear();
    std::cout.flush();
  };

  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    EvalRequest r;
    try {
      r = decode_request(line);
    } catch (const Error& e) {
      std::cerr << e.what() << '\n';
      return 2;
    }
    if (fault != "none" && r.id == fault_at) {
      if (fault == "malformed") {
        pending.push_back("{\"id\": " + std::to_string(r.id) + ", \"value\": ");
      } else if (fault == "duplicate") {
        const std::string once = encode_response({r.id, evaluate(mode, r, model, cls)});
        pending.push_back(once);
        pending.push_back(once);
      } else if (fault == "unknown") {
        pending.push_back(encode_response({r.id + 1000000, 0.0}));
      } else if (fault == "hang") {
        flush();
        std::this_thread::sleep_for(std::chrono::hours(1));
      }
      // drop: no answer at all
    } else {
      pending.push_back(encode_response({r.id, evaluate(mode, r, model, cls)}));
    }
    if (pending.size() >= reverse) flush();
  }
  flush();
  return 0;
}
