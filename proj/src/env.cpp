#include "spolf/env.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "spolf/csv.hpp"
#include "spolf/errors.hpp"

namespace spolf {

namespace {

constexpr double kNormSlack = 1e-9;

Eigen::VectorXd random_direction(int dim, Rng& rng, bool nonnegative) {
  Eigen::VectorXd v(dim);
  do {
    for (int i = 0; i < dim; ++i) {
      const double z = standard_normal(rng);
      v(i) = nonnegative ? std::abs(z) : z;
    }
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

/// Uniform in the unit ball (or its nonnegative orthant).
Eigen::MatrixXd sample_features(int dim, std::size_t count, Rng& rng, bool nonnegative) {
  Eigen::MatrixXd f(dim, static_cast<Eigen::Index>(count));
  for (std::size_t s = 0; s < count; ++s) {
    const double radius = std::pow(uniform01(rng), 1.0 / dim);
    f.col(static_cast<Eigen::Index>(s)) = radius * random_direction(dim, rng, nonnegative);
  }
  return f;
}

/// Unit vector at the given cosine to `anchor`.
Eigen::VectorXd correlated_direction(const Eigen::VectorXd& anchor, double cosine, Rng& rng,
                                     bool nonnegative) {
  const int dim = static_cast<int>(anchor.size());
  Eigen::VectorXd other = random_direction(dim, rng, nonnegative);
  if (dim == 1) return anchor;
  other -= other.dot(anchor) * anchor;
  if (other.norm() < 1e-12) return anchor;
  other.normalize();
  Eigen::VectorXd out = cosine * anchor + std::sqrt(std::max(0.0, 1.0 - cosine * cosine)) * other;
  if (nonnegative) out = out.cwiseAbs();
  return out / out.norm();
}

/// Identity link: nonnegative coefficients scaled so max_s phi_s' theta = 1.
Eigen::VectorXd scale_identity(const Eigen::VectorXd& direction, const Eigen::MatrixXd& features) {
  const double top = (features.transpose() * direction).maxCoeff();
  if (!(top > 0.0)) return direction;
  return direction / top;
}

/// Sigmoid safety: pick the norm so the requested fraction of cells has
/// g < h (exactly, up to ties at the quantile).
double calibrate_safety_norm(const Eigen::VectorXd& direction, const Eigen::MatrixXd& features,
                             double h, double unsafe_fraction) {
  constexpr double kFallback = 1.0;
  if (!(h > 0.0 && h < 1.0) || !(unsafe_fraction > 0.0)) return kFallback;
  Eigen::VectorXd proj = features.transpose() * direction;
  std::vector<double> sorted(proj.data(), proj.data() + proj.size());
  std::sort(sorted.begin(), sorted.end());
  const auto k = std::min(sorted.size() - 1,
                          static_cast<std::size_t>(unsafe_fraction * static_cast<double>(sorted.size())));
  const double boundary = sorted[k];
  const double logit_h = std::log(h / (1.0 - h));
  if (boundary == 0.0 || (boundary < 0.0) != (logit_h < 0.0)) return kFallback;
  return logit_h / boundary;
}

void check_world_invariants(const GridWorld& w) {
  const auto& spec = w.spec();
  const double h = spec.safety_threshold;
  for (std::size_t s = 0; s < w.num_states(); ++s) {
    const auto si = static_cast<StateIndex>(s);
    if (w.feature(si).norm() > 1.0 + kNormSlack) {
      throw InvalidSpec("feature norm exceeds 1 at state " + std::to_string(s));
    }
    for (double v : {w.true_reward(si), w.true_safety(si)}) {
      if (!(v >= -kNormSlack && v <= 1.0 + kNormSlack)) {
        throw InvalidSpec("true reward/safety outside [0,1] at state " + std::to_string(s));
      }
    }
  }
  if (w.s0().empty()) throw InvalidSpec("s0 is empty");
  if (!w.s0_set().contains(w.start())) throw InvalidSpec("start is not in s0");
  for (StateIndex s : w.s0()) {
    if (w.true_safety(s) < h) throw InvalidSpec("s0 contains an unsafe state");
  }
  if (connected_components(w.topology(), w.s0_set()).size() != 1) {
    throw InvalidSpec("s0 is not connected");
  }
}

}  // namespace

void validate(const GridSpec& spec) {
  if (spec.width < 1 || spec.height < 1) throw InvalidSpec("width and height must be >= 1");
  if (spec.feature_dim < 1) throw InvalidSpec("feature_dim must be >= 1");
  if (!(spec.safety_threshold >= 0.0 && spec.safety_threshold <= 1.0)) {
    throw InvalidSpec("safety_threshold must lie in [0, 1]");
  }
  if (!(spec.noise_sigma_r >= 0.0) || !(spec.noise_sigma_g >= 0.0)) {
    throw InvalidSpec("noise sigmas must be nonnegative");
  }
  if (spec.fov_radius < 0) throw InvalidSpec("fov_radius must be >= 0");
  if (spec.min_safe_region < 1) throw InvalidSpec("min_safe_region must be >= 1");
  if (!(spec.s0_margin >= 0.0)) throw InvalidSpec("s0_margin must be >= 0");
  if (!(spec.unsafe_fraction >= 0.0 && spec.unsafe_fraction < 1.0)) {
    throw InvalidSpec("unsafe_fraction must lie in [0, 1)");
  }
  if (!(spec.reward_scale >= 0.0)) throw InvalidSpec("reward_scale must be >= 0");
  if (!(spec.reward_safety_correlation >= -1.0 && spec.reward_safety_correlation <= 1.0)) {
    throw InvalidSpec("reward_safety_correlation must lie in [-1, 1]");
  }
}

GridWorld GridWorld::from_parts(const GridSpec& spec, Eigen::MatrixXd features,
                                Eigen::VectorXd theta_r, Eigen::VectorXd theta_g,
                                std::vector<StateIndex> s0, StateIndex start) {
  validate(spec);
  GridWorld w;
  w.spec_ = spec;
  w.topology_ = GridTopology(spec.width, spec.height);
  const auto n = static_cast<Eigen::Index>(w.topology_.num_states());
  if (features.rows() != spec.feature_dim || features.cols() != n) {
    throw InvalidSpec("feature matrix shape does not match the grid");
  }
  if (theta_r.size() != spec.feature_dim || theta_g.size() != spec.feature_dim) {
    throw InvalidSpec("coefficient dimension mismatch");
  }
  w.features_ = std::move(features);
  w.theta_r_ = std::move(theta_r);
  w.theta_g_ = std::move(theta_g);
  const LinkFunction mu_r = w.reward_link();
  const LinkFunction mu_g = w.safety_link();
  const Eigen::VectorXd eta_r = w.features_.transpose() * w.theta_r_;
  const Eigen::VectorXd eta_g = w.features_.transpose() * w.theta_g_;
  w.reward_.resize(static_cast<std::size_t>(n));
  w.safety_.resize(static_cast<std::size_t>(n));
  for (Eigen::Index s = 0; s < n; ++s) {
    w.reward_[static_cast<std::size_t>(s)] = mu_r.mean(eta_r(s));
    w.safety_[static_cast<std::size_t>(s)] = mu_g.mean(eta_g(s));
  }
  std::sort(s0.begin(), s0.end());
  s0.erase(std::unique(s0.begin(), s0.end()), s0.end());
  for (StateIndex s : s0) {
    if (s >= static_cast<StateIndex>(n)) throw InvalidSpec("s0 state out of range");
  }
  if (start >= static_cast<StateIndex>(n)) throw InvalidSpec("start state out of range");
  w.s0_ = std::move(s0);
  w.s0_set_ = StateSet::of(static_cast<std::size_t>(n), w.s0_);
  w.start_ = start;
  check_world_invariants(w);
  return w;
}

bool operator==(const GridWorld& a, const GridWorld& b) {
  return a.spec_ == b.spec_ && a.features_ == b.features_ && a.theta_r_ == b.theta_r_ &&
         a.theta_g_ == b.theta_g_ && a.start_ == b.start_ && a.s0_ == b.s0_;
}

std::vector<std::vector<StateIndex>> connected_components(const GridTopology& topo,
                                                          const StateSet& members) {
  std::vector<std::vector<StateIndex>> out;
  StateSet seen(members.universe());
  std::deque<StateIndex> queue;
  members.for_each([&](StateIndex root) {
    if (seen.contains(root)) return;
    std::vector<StateIndex> comp;
    seen.insert(root);
    queue.push_back(root);
    while (!queue.empty()) {
      const StateIndex s = queue.front();
      queue.pop_front();
      comp.push_back(s);
      for (StateIndex nb : topo.successors(s)) {
        if (members.contains(nb) && seen.insert(nb)) queue.push_back(nb);
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  });
  return out;
}

GridWorld generate(const GridSpec& spec) {
  validate(spec);
  const GridTopology topo(spec.width, spec.height);
  const std::size_t n = topo.num_states();
  const int d = spec.feature_dim;
  const bool both_sigmoid =
      spec.link_reward == LinkKind::kSigmoid && spec.link_safety == LinkKind::kSigmoid;
  // Identity links need phi' theta >= 0, hence the nonnegative orthant.
  const bool nonnegative = !both_sigmoid;
  const double h = spec.safety_threshold;

  for (int attempt = 0; attempt < kGenerationAttempts; ++attempt) {
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(attempt)));
    Eigen::MatrixXd features = sample_features(d, n, rng, nonnegative);

    const bool safety_identity = spec.link_safety == LinkKind::kIdentity;
    const Eigen::VectorXd dir_g = random_direction(d, rng, safety_identity);
    const Eigen::VectorXd theta_g =
        safety_identity ? scale_identity(dir_g, features)
                        : Eigen::VectorXd(dir_g * calibrate_safety_norm(dir_g, features, h,
                                                                       spec.unsafe_fraction));

    const bool reward_identity = spec.link_reward == LinkKind::kIdentity;
    const Eigen::VectorXd dir_r =
        correlated_direction(dir_g, spec.reward_safety_correlation, rng, reward_identity);
    const Eigen::VectorXd theta_r = reward_identity ? scale_identity(dir_r, features)
                                                    : Eigen::VectorXd(dir_r * spec.reward_scale);

    const LinkFunction mu_g = LinkFunction::of(spec.link_safety);
    const Eigen::VectorXd eta_g = features.transpose() * theta_g;
    StateSet robust(n);
    for (std::size_t s = 0; s < n; ++s) {
      if (mu_g.mean(eta_g(static_cast<Eigen::Index>(s))) >= h + spec.s0_margin) {
        robust.insert(static_cast<StateIndex>(s));
      }
    }
    const auto comps = connected_components(topo, robust);
    const std::vector<StateIndex>* best = nullptr;
    for (const auto& c : comps) {
      // Components arrive in order of their lowest index, so strict > keeps
      // the lowest-indexed component among equal sizes.
      if (!best || c.size() > best->size()) best = &c;
    }
    if (!best || best->size() < static_cast<std::size_t>(spec.min_safe_region)) continue;
    return GridWorld::from_parts(spec, std::move(features), theta_r, theta_g, *best,
                                 best->front());
  }
  throw GenerationFailed("no prior-safe region of size >= " +
                         std::to_string(spec.min_safe_region) + " after " +
                         std::to_string(kGenerationAttempts) + " attempts");
}

StateIndex step(const GridWorld& world, StateIndex s, Action a) {
  return world.topology().step(s, a);
}

Observation near_observe(const GridWorld& world, StateIndex s, Rng& rng) {
  const double n_r = standard_normal(rng);
  const double n_g = standard_normal(rng);
  Observation obs;
  obs.state = s;
  obs.feature = world.feature(s);
  obs.y_r = world.true_reward(s) + world.spec().noise_sigma_r * n_r;
  obs.y_g = world.true_safety(s) + world.spec().noise_sigma_g * n_g;
  return obs;
}

std::vector<StateIndex> observation_window(const GridTopology& topo, StateIndex s, int radius) {
  const Cell c = topo.cell(s);
  std::vector<StateIndex> out;
  const int y0 = std::max(0, c.y - radius), y1 = std::min(topo.height() - 1, c.y + radius);
  const int x0 = std::max(0, c.x - radius), x1 = std::min(topo.width() - 1, c.x + radius);
  out.reserve(static_cast<std::size_t>((y1 - y0 + 1) * (x1 - x0 + 1)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) out.push_back(topo.index({x, y}));
  }
  return out;
}

std::vector<FeatureObservation> far_observe(const GridWorld& world, StateIndex s) {
  return far_observe(world, s, world.spec().fov_radius);
}

std::vector<FeatureObservation> far_observe(const GridWorld& world, StateIndex s, int radius) {
  std::vector<FeatureObservation> out;
  for (StateIndex q : observation_window(world.topology(), s, radius)) {
    out.push_back({q, world.feature(q)});
  }
  return out;
}

bool is_unsafe(const GridWorld& world, StateIndex s) {
  return world.true_safety(s) < world.spec().safety_threshold;
}

// ---------------------------------------------------------------------------
// JSON. Reals are written with %.17g so a save/load round trip is exact.

namespace {

void write_vector(std::ostringstream& out, const double* data, Eigen::Index n) {
  out << '[';
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i) out << ',';
    out << format_real(data[i]);
  }
  out << ']';
}

std::string quoted(std::string_view s) { return "\"" + std::string(s) + "\""; }

Eigen::VectorXd read_vector(const nlohmann::json& j, int dim, const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    throw ParseError(std::string(what) + ": expected array of length " + std::to_string(dim));
  }
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = j.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

}  // namespace

std::string world_to_json(const GridWorld& world) {
  const GridSpec& s = world.spec();
  std::ostringstream out;
  out << "{\n  \"spec\": {"
      << "\"width\": " << s.width << ", \"height\": " << s.height
      << ", \"feature_dim\": " << s.feature_dim
      << ", \"link_kind_reward\": " << quoted(to_string(s.link_reward))
      << ", \"link_kind_safety\": " << quoted(to_string(s.link_safety))
      << ", \"noise_sigma_r\": " << format_real(s.noise_sigma_r)
      << ", \"noise_sigma_g\": " << format_real(s.noise_sigma_g)
      << ", \"safety_threshold\": " << format_real(s.safety_threshold)
      << ", \"fov_radius\": " << s.fov_radius << ", \"min_safe_region\": " << s.min_safe_region
      << ", \"seed\": " << s.seed << ", \"s0_margin\": " << format_real(s.s0_margin)
      << ", \"unsafe_fraction\": " << format_real(s.unsafe_fraction)
      << ", \"reward_scale\": " << format_real(s.reward_scale)
      << ", \"reward_safety_correlation\": " << format_real(s.reward_safety_correlation)
      << "},\n  \"theta_r_star\": ";
  write_vector(out, world.theta_r().data(), world.theta_r().size());
  out << ",\n  \"theta_g_star\": ";
  write_vector(out, world.theta_g().data(), world.theta_g().size());
  out << ",\n  \"features\": [";
  for (std::size_t q = 0; q < world.num_states(); ++q) {
    out << (q ? ",\n    " : "\n    ");
    write_vector(out, world.features().col(static_cast<Eigen::Index>(q)).data(), world.dim());
  }
  out << "\n  ],\n  \"s0\": [";
  for (std::size_t i = 0; i < world.s0().size(); ++i) out << (i ? "," : "") << world.s0()[i];
  out << "],\n  \"start\": " << world.start() << "\n}\n";
  return out.str();
}

GridWorld world_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid env JSON: ") + e.what());
  }
  try {
    const auto& js = j.at("spec");
    GridSpec spec;
    spec.width = js.at("width").get<int>();
    spec.height = js.at("height").get<int>();
    spec.feature_dim = js.at("feature_dim").get<int>();
    auto link = [&](const char* key) {
      auto k = parse_link(js.at(key).get<std::string>());
      if (!k) throw ParseError(std::string("unknown link in ") + key);
      return *k;
    };
    spec.link_reward = link("link_kind_reward");
    spec.link_safety = link("link_kind_safety");
    spec.noise_sigma_r = js.at("noise_sigma_r").get<double>();
    spec.noise_sigma_g = js.at("noise_sigma_g").get<double>();
    spec.safety_threshold = js.at("safety_threshold").get<double>();
    spec.fov_radius = js.at("fov_radius").get<int>();
    spec.min_safe_region = js.at("min_safe_region").get<int>();
    spec.seed = js.at("seed").get<std::uint64_t>();
    spec.s0_margin = js.value("s0_margin", spec.s0_margin);
    spec.unsafe_fraction = js.value("unsafe_fraction", spec.unsafe_fraction);
    spec.reward_scale = js.value("reward_scale", spec.reward_scale);
    spec.reward_safety_correlation =
        js.value("reward_safety_correlation", spec.reward_safety_correlation);
    validate(spec);

    const int d = spec.feature_dim;
    const auto n = static_cast<std::size_t>(spec.width) * static_cast<std::size_t>(spec.height);
    const auto& jf = j.at("features");
    if (!jf.is_array() || jf.size() != n) throw ParseError("features: wrong number of rows");
    Eigen::MatrixXd features(d, static_cast<Eigen::Index>(n));
    for (std::size_t q = 0; q < n; ++q) {
      features.col(static_cast<Eigen::Index>(q)) = read_vector(jf[q], d, "features row");
    }
    auto s0 = j.at("s0").get<std::vector<StateIndex>>();
    return GridWorld::from_parts(spec, std::move(features),
                                 read_vector(j.at("theta_r_star"), d, "theta_r_star"),
                                 read_vector(j.at("theta_g_star"), d, "theta_g_star"),
                                 std::move(s0), j.at("start").get<StateIndex>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed env JSON: ") + e.what());
  }
}

void save_world(const GridWorld& world, const std::filesystem::path& path) {
  write_text_file(path, world_to_json(world));
}

GridWorld load_world(const std::filesystem::path& path) {
  return world_from_json(read_text_file(path));
}

}  // namespace spolf
