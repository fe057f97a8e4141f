#pragma once

namespace mhpolicy {

/// One environment transition together with the log probability the
/// behaviour policy assigned to the action taken.
template <class State>
struct TransitionSample {
    State state{};
    int action = 0;
    State next_state{};
    double reward = 0.0;
    bool terminal = false;
    double behavior_log_prob = 0.0;
    /// Undiscounted reward from this step to the end of its episode. For the
    /// single-step tabular objective this is the immediate reward.
    double return_to_go = 0.0;
};

} // namespace mhpolicy
