#include "superfact/spec_json.hpp"

namespace superfact {

nlohmann::json to_json(const SystemSpec& spec) {
  nlohmann::json j{{"family", family_name(spec.family())},
                   {"omega", spec.omega()},
                   {"gamma", {{"m", spec.gamma().m()}, {"n", spec.gamma().n()}}}};
  if (spec.alpha()) {
    j["alpha"] = *spec.alpha();
    j["beta"] = *spec.beta();
  }
  return j;
}

SystemSpec spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw ConfigError("system config must be a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    if (key != "family" && key != "omega" && key != "gamma" && key != "alpha" && key != "beta") {
      throw ConfigError("unknown config field '" + key + "'");
    }
  }
  auto number = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key)) {
      return std::nullopt;
    }
    if (!j.at(key).is_number()) {
      throw ConfigError(std::string("config field '") + key + "' must be a number");
    }
    return j.at(key).get<double>();
  };
  if (!j.contains("family") || !j.at("family").is_string()) {
    throw ConfigError("config needs a string 'family'");
  }
  const Family family = parse_family(j.at("family").get<std::string>());
  const auto omega = number("omega");
  if (!omega) {
    throw ConfigError("config needs 'omega'");
  }
  if (!j.contains("gamma") || !j.at("gamma").is_object()) {
    throw ConfigError("config needs 'gamma' as {\"m\": int, \"n\": int}");
  }
  const auto& g = j.at("gamma");
  if (!g.contains("m") || !g.contains("n") || !g.at("m").is_number_integer() ||
      !g.at("n").is_number_integer()) {
    throw ConfigError("gamma needs integer fields 'm' and 'n'");
  }
  const RationalGamma gamma(g.at("m").get<int>(), g.at("n").get<int>());
  const auto alpha = number("alpha");
  const auto beta = number("beta");
  switch (family) {
    case Family::euclidean:
      if (alpha || beta) throw ConfigError("alpha and beta apply to ttw only");
      return SystemSpec::euclidean(*omega, gamma);
    case Family::sphere:
      if (alpha || beta) throw ConfigError("alpha and beta apply to ttw only");
      return SystemSpec::sphere(*omega, gamma);
    case Family::ttw:
      if (!alpha || !beta) throw ConfigError("ttw needs alpha and beta");
      return SystemSpec::ttw(*omega, gamma, *alpha, *beta);
  }
  throw ConfigError("unknown family");
}

}  // namespace superfact
