#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spolf/grid.hpp"
#include "spolf/link.hpp"
#include "spolf/rng.hpp"
#include "spolf/state_set.hpp"

namespace spolf {

struct GridSpec {
  int width = 25;
  int height = 25;
  int feature_dim = 5;
  LinkKind link_reward = LinkKind::kSigmoid;
  LinkKind link_safety = LinkKind::kSigmoid;
  double noise_sigma_r = 0.1;
  double noise_sigma_g = 0.1;
  double safety_threshold = 0.1;
  /// Far-sighted window is the (2k+1)x(2k+1) square centred on the agent.
  int fov_radius = 3;
  int min_safe_region = 10;
  std::uint64_t seed = 0;

  // Generation knobs.
  /// Prior-safe region keeps states with g >= h + s0_margin.
  double s0_margin = 0.05;
  /// Sigmoid safety: coefficient norm is calibrated so this fraction of cells
  /// falls below the threshold.
  double unsafe_fraction = 0.15;
  /// Sigmoid reward: norm of the reward coefficient vector.
  double reward_scale = 2.0;
  /// Cosine between the reward and safety coefficient directions.
  double reward_safety_correlation = 0.5;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Throws InvalidSpec describing the first violated constraint.
void validate(const GridSpec& spec);

/// Ground-truth environment. Immutable once built.
class GridWorld {
 public:
  /// Builds a world from explicit parts and checks every invariant: feature
  /// norms, value ranges, and that s0 is a connected safe set holding start.
  static GridWorld from_parts(const GridSpec& spec, Eigen::MatrixXd features,
                              Eigen::VectorXd theta_r, Eigen::VectorXd theta_g,
                              std::vector<StateIndex> s0, StateIndex start);

  const GridSpec& spec() const { return spec_; }
  const GridTopology& topology() const { return topology_; }
  std::size_t num_states() const { return topology_.num_states(); }
  int dim() const { return spec_.feature_dim; }

  /// d x |S|; column s is phi_s.
  const Eigen::MatrixXd& features() const { return features_; }
  auto feature(StateIndex s) const { return features_.col(s); }
  const Eigen::VectorXd& theta_r() const { return theta_r_; }
  const Eigen::VectorXd& theta_g() const { return theta_g_; }
  LinkFunction reward_link() const { return LinkFunction::of(spec_.link_reward); }
  LinkFunction safety_link() const { return LinkFunction::of(spec_.link_safety); }

  double true_reward(StateIndex s) const { return reward_[s]; }
  double true_safety(StateIndex s) const { return safety_[s]; }
  const std::vector<double>& reward_values() const { return reward_; }
  const std::vector<double>& safety_values() const { return safety_; }

  StateIndex start() const { return start_; }
  const std::vector<StateIndex>& s0() const { return s0_; }
  const StateSet& s0_set() const { return s0_set_; }

  friend bool operator==(const GridWorld& a, const GridWorld& b);

 private:
  GridWorld() = default;

  GridSpec spec_;
  GridTopology topology_;
  Eigen::MatrixXd features_;
  Eigen::VectorXd theta_r_;
  Eigen::VectorXd theta_g_;
  std::vector<double> reward_;
  std::vector<double> safety_;
  StateIndex start_ = 0;
  std::vector<StateIndex> s0_;
  StateSet s0_set_;
};

struct Observation {
  StateIndex state = 0;
  Eigen::VectorXd feature;
  double y_r = 0.0;
  double y_g = 0.0;
};

struct FeatureObservation {
  StateIndex state = 0;
  Eigen::VectorXd feature;
};

inline constexpr int kGenerationAttempts = 100;

/// Deterministic in the spec; retries with fresh sub-seeds until a prior-safe
/// region of at least min_safe_region cells exists, else GenerationFailed.
GridWorld generate(const GridSpec& spec);

StateIndex step(const GridWorld& world, StateIndex s, Action a);

/// Feature of s plus Gaussian-noised reward and safety. Draws exactly two
/// normals from rng, reward first.
Observation near_observe(const GridWorld& world, StateIndex s, Rng& rng);

/// States of the (2k+1)^2 window centred on s, clipped to the grid, ascending.
std::vector<StateIndex> observation_window(const GridTopology& topo, StateIndex s, int radius);

/// Noiseless features over the window; radius defaults to the spec's FOV.
std::vector<FeatureObservation> far_observe(const GridWorld& world, StateIndex s);
std::vector<FeatureObservation> far_observe(const GridWorld& world, StateIndex s, int radius);

/// Evaluation-only: true safety below threshold.
bool is_unsafe(const GridWorld& world, StateIndex s);

/// Connected components of `members` under grid moves, each sorted ascending.
std::vector<std::vector<StateIndex>> connected_components(const GridTopology& topo,
                                                          const StateSet& members);

std::string world_to_json(const GridWorld& world);
GridWorld world_from_json(const std::string& text);
void save_world(const GridWorld& world, const std::filesystem::path& path);
GridWorld load_world(const std::filesystem::path& path);

}  // namespace spolf
