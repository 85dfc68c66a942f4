#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace lowrank {

enum class ObservationModel { Reward, TransitionPairs, Trajectory };

struct RewardSample {
  int i = 0;
  int j = 0;
  double y = 0.0;
};

/// Raw data from one of the three sampling models. Only the container matching
/// `model` is populated.
struct ObservationBatch {
  ObservationModel model = ObservationModel::Reward;
  int m = 0;
  int n = 0;
  std::vector<RewardSample> rewards;
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> states;

  /// Number of observed samples: rewards, states covered by the pairs (two
  /// per pair), or trajectory length.
  std::size_t T() const {
    switch (model) {
      case ObservationModel::Reward:
        return rewards.size();
      case ObservationModel::TransitionPairs:
        return 2 * pairs.size();
      case ObservationModel::Trajectory:
        return states.size();
    }
    return 0;
  }
};

}  // namespace lowrank
