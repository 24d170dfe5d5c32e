#pragma once

#include <cmath>
#include <optional>
#include <string_view>

namespace spolf {

enum class LinkKind { kIdentity, kSigmoid };

std::string_view to_string(LinkKind kind);
std::optional<LinkKind> parse_link(std::string_view name);

/// Strictly increasing GLM link with the derivative bounds the confidence
/// radius depends on: L bounds mu', M bounds |mu''|.
struct LinkFunction {
  LinkKind kind = LinkKind::kIdentity;

  static LinkFunction of(LinkKind kind) { return LinkFunction{kind}; }

  double mean(double x) const {
    return kind == LinkKind::kIdentity ? x : 1.0 / (1.0 + std::exp(-x));
  }
  double derivative(double x) const {
    if (kind == LinkKind::kIdentity) return 1.0;
    const double m = mean(x);
    return m * (1.0 - m);
  }
  double lipschitz() const { return kind == LinkKind::kIdentity ? 1.0 : 0.25; }
  /// max |mu''|; for the sigmoid it is attained at mu = (3 - sqrt 3) / 6.
  double curvature() const {
    return kind == LinkKind::kIdentity ? 0.0 : 1.0 / (6.0 * std::sqrt(3.0));
  }
  /// Lower bound on mu' over |argument| <= bound. The sigmoid derivative is
  /// even and decreasing in |x|, so the infimum sits at the bound.
  double xi(double bound) const {
    return kind == LinkKind::kIdentity ? 1.0 : derivative(std::abs(bound));
  }
  /// Inverse of mean(); nullopt outside the link's range.
  std::optional<double> inverse(double y) const;
};

}  // namespace spolf
