#include "aston/decode.hpp"

namespace aston {

DecodeConfig::Strategy parse_strategy(const std::string& name) {
  if (name == "argmax") return DecodeConfig::Strategy::kArgmax;
  if (name == "random") return DecodeConfig::Strategy::kRandom;
  if (name == "beam") return DecodeConfig::Strategy::kBeam;
  if (name == "beam_norm") return DecodeConfig::Strategy::kBeamNorm;
  std::string valid;
  for (const std::string& s : all_strategy_names()) valid += (valid.empty() ? "" : ", ") + s;
  throw ConfigError("unknown strategy '" + name + "' (valid: " + valid + ")");
}

std::string strategy_name(DecodeConfig::Strategy s) {
  switch (s) {
    case DecodeConfig::Strategy::kArgmax: return "argmax";
    case DecodeConfig::Strategy::kRandom: return "random";
    case DecodeConfig::Strategy::kBeam: return "beam";
    case DecodeConfig::Strategy::kBeamNorm: return "beam_norm";
  }
  throw ConfigError("unknown strategy value");
}

std::vector<std::string> all_strategy_names() {
  return {"argmax", "random", "beam", "beam_norm"};
}

}  // namespace aston
