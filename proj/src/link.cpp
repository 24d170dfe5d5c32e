#include "spolf/link.hpp"

namespace spolf {

std::string_view to_string(LinkKind kind) {
  return kind == LinkKind::kIdentity ? "identity" : "sigmoid";
}

std::optional<LinkKind> parse_link(std::string_view name) {
  if (name == "identity" || name == "linear") return LinkKind::kIdentity;
  if (name == "sigmoid" || name == "logistic") return LinkKind::kSigmoid;
  return std::nullopt;
}

std::optional<double> LinkFunction::inverse(double y) const {
  if (kind == LinkKind::kIdentity) return y;
  if (!(y > 0.0 && y < 1.0)) return std::nullopt;
  return std::log(y / (1.0 - y));
}

}  // namespace spolf
