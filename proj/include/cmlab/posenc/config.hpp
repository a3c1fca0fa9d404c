#pragma once

#include <array>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace cmlab::posenc {

enum class Variant { Sinusoidal, Dynamic, Relative, Spdrpe, Rotary, SpRotary };

inline constexpr std::array<Variant, 6> kAllVariants{Variant::Sinusoidal, Variant::Dynamic, Variant::Relative,
                                                     Variant::Spdrpe,     Variant::Rotary,  Variant::SpRotary};

std::string_view variant_name(Variant v);  // e.g. "SP_ROTARY"
Variant parse_variant(std::string_view name);  // case-insensitive

/// How a switching-point flag of -1 acts on a 2x2 rotation block.
///   Transpose: R(m theta) becomes R(m theta)^T = R(-m theta) (sine entries flip).
///   Negate:    every entry is multiplied by -1, i.e. -R(m theta). Kept for ablations.
enum class SprmMode { Transpose, Negate };

std::string_view sprm_mode_name(SprmMode m);
SprmMode parse_sprm_mode(std::string_view name);

struct PEConfig {
  Variant variant = Variant::SpRotary;
  int d_model = 48;
  double base = 10000.0;
  int clip_k = 8;
  int max_len = 256;
  SprmMode sprm_mode = SprmMode::Transpose;

  /// d_model even and positive, base > 1, clip_k and max_len positive.
  void validate() const;

  bool needs_spi() const { return variant == Variant::Spdrpe; }
  bool needs_sign() const { return variant == Variant::SpRotary; }
  bool is_rotary() const { return variant == Variant::Rotary || variant == Variant::SpRotary; }
  bool has_relative() const { return variant == Variant::Relative || variant == Variant::Spdrpe; }
  bool has_dynamic() const { return variant == Variant::Dynamic || variant == Variant::Spdrpe; }
};

/// Which positional representations a variant uses, in the column order of
/// the comparison tables: sin/cos, index, dynamic, SPI, relative, RM, SPRM.
struct Capabilities {
  bool sin_cos = false;
  bool index = false;
  bool dynamic = false;
  bool spi = false;
  bool relative = false;
  bool rm = false;
  bool sprm = false;
};
Capabilities capabilities(Variant v);

/// Keys: variant, d_model, base, clip_k, max_len, and optional sprm_mode.
/// Unknown keys are rejected with std::invalid_argument.
nlohmann::ordered_json to_json(const PEConfig& c);
PEConfig pe_config_from_json(const nlohmann::ordered_json& j);

}  // namespace cmlab::posenc
