#include "cmlab/posenc/config.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <string>

namespace cmlab::posenc {

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::Sinusoidal: return "SINUSOIDAL";
    case Variant::Dynamic: return "DYNAMIC";
    case Variant::Relative: return "RELATIVE";
    case Variant::Spdrpe: return "SPDRPE";
    case Variant::Rotary: return "ROTARY";
    case Variant::SpRotary: return "SP_ROTARY";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  std::string up(name);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  for (Variant v : kAllVariants)
    if (variant_name(v) == up) return v;
  throw std::invalid_argument("unknown positional-encoding variant '" + std::string(name) + "'");
}

std::string_view sprm_mode_name(SprmMode m) { return m == SprmMode::Transpose ? "transpose" : "negate"; }

SprmMode parse_sprm_mode(std::string_view name) {
  if (name == "transpose") return SprmMode::Transpose;
  if (name == "negate") return SprmMode::Negate;
  throw std::invalid_argument("unknown sprm_mode '" + std::string(name) + "'");
}

void PEConfig::validate() const {
  if (d_model <= 0 || d_model % 2 != 0) throw std::invalid_argument("PEConfig: d_model must be even and positive");
  if (!(base > 1.0)) throw std::invalid_argument("PEConfig: base must exceed 1");
  if (clip_k <= 0) throw std::invalid_argument("PEConfig: clip_k must be positive");
  if (max_len <= 0) throw std::invalid_argument("PEConfig: max_len must be positive");
}

Capabilities capabilities(Variant v) {
  Capabilities c;
  switch (v) {
    case Variant::Sinusoidal: c.sin_cos = c.index = true; break;
    case Variant::Dynamic: c.index = c.dynamic = true; break;
    case Variant::Relative: c.relative = true; break;
    case Variant::Spdrpe: c.dynamic = c.spi = c.relative = true; break;
    case Variant::Rotary: c.sin_cos = c.index = c.rm = true; break;
    case Variant::SpRotary: c.sin_cos = c.index = c.spi = c.rm = c.sprm = true; break;
  }
  return c;
}

nlohmann::ordered_json to_json(const PEConfig& c) {
  nlohmann::ordered_json j;
  j["variant"] = std::string(variant_name(c.variant));
  j["d_model"] = c.d_model;
  j["base"] = c.base;
  j["clip_k"] = c.clip_k;
  j["max_len"] = c.max_len;
  j["sprm_mode"] = std::string(sprm_mode_name(c.sprm_mode));
  return j;
}

PEConfig pe_config_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object()) throw std::invalid_argument("PEConfig: expected an object");
  PEConfig c;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "variant") {
        c.variant = parse_variant(value.get<std::string>());
      } else if (key == "d_model") {
        c.d_model = value.get<int>();
      } else if (key == "base") {
        c.base = value.get<double>();
      } else if (key == "clip_k") {
        c.clip_k = value.get<int>();
      } else if (key == "max_len") {
        c.max_len = value.get<int>();
      } else if (key == "sprm_mode") {
        c.sprm_mode = parse_sprm_mode(value.get<std::string>());
      } else {
        throw std::invalid_argument("PEConfig: unknown key '" + key + "'");
      }
    } catch (const nlohmann::json::type_error&) {
      throw std::invalid_argument("PEConfig: wrong type for key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

}  // namespace cmlab::posenc
